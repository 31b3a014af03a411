//! Tournament data model: teams, slots, matches, play/travel vectors and
//! objective evaluation.
//!
//! Teams and slots are 1-based throughout the public API. Vectors over matches
//! and travel triples follow one fixed global layout (see [`Layout`]) shared by
//! the model builder, the LP exporter and the rank computations.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TeamId(u16);

impl TeamId {
    /// `index` is 1-based.
    pub fn new(index: usize) -> Self {
        assert!(index >= 1 && index <= u16::MAX as usize, "team index {index} out of range");
        TeamId(index as u16)
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotId(u16);

impl SlotId {
    /// `index` is 1-based.
    pub fn new(index: usize) -> Self {
        assert!(index >= 1 && index <= u16::MAX as usize, "slot index {index} out of range");
        SlotId(index as u16)
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SlotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Match `(k, i, j)`: team `away` plays at the venue of team `home` in slot `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatchKey {
    pub slot: SlotId,
    pub home: TeamId,
    pub away: TeamId,
}

impl MatchKey {
    pub fn new(slot: usize, home: usize, away: usize) -> Self {
        MatchKey { slot: SlotId::new(slot), home: TeamId::new(home), away: TeamId::new(away) }
    }
}

impl fmt::Display for MatchKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.slot, self.home, self.away)
    }
}

/// Ordered pair of distinct venues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArcKey {
    pub from: TeamId,
    pub to: TeamId,
}

impl ArcKey {
    pub fn new(from: usize, to: usize) -> Self {
        assert_ne!(from, to, "arc endpoints must differ");
        ArcKey { from: TeamId::new(from), to: TeamId::new(to) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("team count {0} is not supported (must be even and at least 4)")]
    InvalidTeamCount(usize),
    #[error("match {0} refers to a slot or team outside the instance")]
    KeyOutOfRange(MatchKey),
    #[error("match {0} has identical home and away team")]
    SelfMatch(MatchKey),
    #[error("team {team} plays {count} matches in slot {slot}")]
    TeamSlotCount { slot: usize, team: usize, count: usize },
    #[error("pair ({home},{away}) occurs {count} times")]
    PairCount { home: usize, away: usize, count: usize },
    #[error("instance has {instance} teams but tournament has {tournament}")]
    SizeMismatch { instance: usize, tournament: usize },
}

pub fn check_team_count(n: usize) -> Result<(), ScheduleError> {
    if n < 4 || !n.is_multiple_of(2) || n > 64 {
        return Err(ScheduleError::InvalidTeamCount(n));
    }
    Ok(())
}

/// Global index layout of the variable vector `(x, y)`.
///
/// `x` entries come first, ordered lexicographically by `(slot, home, away)`;
/// `y` entries follow, ordered by `(team, from, to)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    n: usize,
}

impl Layout {
    pub fn new(n: usize) -> Self {
        Layout { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_slots(&self) -> usize {
        2 * self.n - 2
    }

    pub fn num_arcs(&self) -> usize {
        self.n * (self.n - 1)
    }

    pub fn num_play(&self) -> usize {
        self.num_slots() * self.num_arcs()
    }

    pub fn num_travel(&self) -> usize {
        self.n * self.num_arcs()
    }

    pub fn num_vars(&self) -> usize {
        self.num_play() + self.num_travel()
    }

    /// Position of arc `(i, j)` among all arcs, lexicographic, 0-based.
    pub fn arc(&self, i: usize, j: usize) -> usize {
        debug_assert!(i != j && i >= 1 && j >= 1 && i <= self.n && j <= self.n);
        (i - 1) * (self.n - 1) + if j < i { j - 1 } else { j - 2 }
    }

    pub fn arc_key(&self, arc: usize) -> ArcKey {
        let i = arc / (self.n - 1) + 1;
        let r = arc % (self.n - 1) + 1;
        let j = if r < i { r } else { r + 1 };
        ArcKey::new(i, j)
    }

    /// Column of `x_{k,i,j}`.
    pub fn x(&self, k: usize, i: usize, j: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.num_slots());
        (k - 1) * self.num_arcs() + self.arc(i, j)
    }

    /// Offset of `y_{t,i,j}` inside the travel block.
    pub fn travel(&self, t: usize, i: usize, j: usize) -> usize {
        (t - 1) * self.num_arcs() + self.arc(i, j)
    }

    /// Column of `y_{t,i,j}`.
    pub fn y(&self, t: usize, i: usize, j: usize) -> usize {
        self.num_play() + self.travel(t, i, j)
    }

    pub fn match_key(&self, col: usize) -> MatchKey {
        assert!(col < self.num_play());
        let k = col / self.num_arcs() + 1;
        let arc = self.arc_key(col % self.num_arcs());
        MatchKey { slot: SlotId::new(k), home: arc.from, away: arc.to }
    }

    /// `(team, arc)` of a travel-block offset.
    pub fn travel_key(&self, offset: usize) -> (TeamId, ArcKey) {
        assert!(offset < self.num_travel());
        let t = offset / self.num_arcs() + 1;
        (TeamId::new(t), self.arc_key(offset % self.num_arcs()))
    }
}

/// A problem instance: team count and distances between venues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    name: String,
    distances: Vec<Rational>,
}

impl Instance {
    /// `distance(i, j)` supplies `d_{i,j}` for `i != j` (1-based).
    pub fn from_fn(
        name: impl Into<String>,
        n: usize,
        mut distance: impl FnMut(usize, usize) -> Rational,
    ) -> Result<Self, ScheduleError> {
        check_team_count(n)?;
        let mut distances = vec![Rational::zero(); n * n];
        for i in 1..=n {
            for j in 1..=n {
                if i != j {
                    let d = distance(i, j);
                    assert!(d >= Rational::zero(), "negative distance d[{i},{j}]");
                    distances[(i - 1) * n + (j - 1)] = d;
                }
            }
        }
        Ok(Instance { n, name: name.into(), distances })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn distance(&self, i: usize, j: usize) -> &Rational {
        &self.distances[(i - 1) * self.n + (j - 1)]
    }

    pub fn is_symmetric(&self) -> bool {
        (1..=self.n).all(|i| (1..=self.n).all(|j| self.distance(i, j) == self.distance(j, i)))
    }

    /// Instance with teams relabelled: new team `p[i-1]` takes the role of old team `i`.
    pub fn permuted(&self, perm: &[usize]) -> Instance {
        assert_eq!(perm.len(), self.n);
        let mut distances = vec![Rational::zero(); self.n * self.n];
        for i in 1..=self.n {
            for j in 1..=self.n {
                distances[(perm[i - 1] - 1) * self.n + (perm[j - 1] - 1)] = self.distance(i, j).clone();
            }
        }
        Instance { n: self.n, name: self.name.clone(), distances }
    }
}

/// 0/1 vector over all matches in [`Layout`] order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlayVector(pub Vec<u8>);

/// 0/1 vector over all `(t, i, j)` travel triples in [`Layout`] order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TravelVector(pub Vec<u8>);

/// A point `(x, y)` of the polytope: the play vector of a tournament together
/// with a travel vector dominating the actual travels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SolutionPoint {
    pub x: PlayVector,
    pub y: TravelVector,
}

impl SolutionPoint {
    pub fn dim(&self) -> usize {
        self.x.0.len() + self.y.0.len()
    }

    /// Coordinates concatenated in global layout order.
    pub fn coords(&self) -> impl Iterator<Item = u8> + '_ {
        self.x.0.iter().chain(self.y.0.iter()).copied()
    }

    pub fn to_vec(&self) -> Vec<u8> {
        self.coords().collect()
    }

    /// Copy with travel entry `offset` set to one.
    pub fn augmented(&self, offset: usize) -> SolutionPoint {
        let mut p = self.clone();
        p.y.0[offset] = 1;
        p
    }
}

/// A valid double round-robin tournament.
///
/// Stored as a slot-by-team grid: for every slot and team, the opponent and
/// whether the team plays at home.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tournament {
    n: usize,
    opponent: Vec<u8>,
    at_home: Vec<bool>,
}

/// Checks both round-robin conditions (slot 1 included) and builds the tournament.
pub fn validate_tournament(
    matches: impl IntoIterator<Item = MatchKey>,
    n: usize,
) -> Result<Tournament, ScheduleError> {
    check_team_count(n)?;
    let layout = Layout::new(n);
    let slots = layout.num_slots();
    let mut team_count = vec![0usize; slots * n];
    let mut pair_count = vec![0usize; layout.num_arcs()];
    let mut opponent = vec![0u8; slots * n];
    let mut at_home = vec![false; slots * n];
    for m in matches {
        let (k, i, j) = (m.slot.get(), m.home.get(), m.away.get());
        if k > slots || i > n || j > n {
            return Err(ScheduleError::KeyOutOfRange(m));
        }
        if i == j {
            return Err(ScheduleError::SelfMatch(m));
        }
        team_count[(k - 1) * n + (i - 1)] += 1;
        team_count[(k - 1) * n + (j - 1)] += 1;
        pair_count[layout.arc(i, j)] += 1;
        opponent[(k - 1) * n + (i - 1)] = j as u8;
        opponent[(k - 1) * n + (j - 1)] = i as u8;
        at_home[(k - 1) * n + (i - 1)] = true;
        at_home[(k - 1) * n + (j - 1)] = false;
    }
    for k in 1..=slots {
        for i in 1..=n {
            let count = team_count[(k - 1) * n + (i - 1)];
            if count != 1 {
                return Err(ScheduleError::TeamSlotCount { slot: k, team: i, count });
            }
        }
    }
    for (arc, &count) in pair_count.iter().enumerate() {
        if count != 1 {
            let a = layout.arc_key(arc);
            return Err(ScheduleError::PairCount { home: a.from.get(), away: a.to.get(), count });
        }
    }
    Ok(Tournament { n, opponent, at_home })
}

impl Tournament {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_slots(&self) -> usize {
        2 * self.n - 2
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.n)
    }

    /// Opponent of team `i` in slot `k`.
    pub fn opponent(&self, k: usize, i: usize) -> usize {
        self.opponent[(k - 1) * self.n + (i - 1)] as usize
    }

    pub fn plays_home(&self, k: usize, i: usize) -> bool {
        self.at_home[(k - 1) * self.n + (i - 1)]
    }

    /// Venue at which team `i` plays in slot `k`.
    pub fn venue(&self, k: usize, i: usize) -> usize {
        if self.plays_home(k, i) {
            i
        } else {
            self.opponent(k, i)
        }
    }

    pub fn contains(&self, m: MatchKey) -> bool {
        let (k, i, j) = (m.slot.get(), m.home.get(), m.away.get());
        k <= self.num_slots() && i <= self.n && j <= self.n && self.opponent(k, i) == j && self.plays_home(k, i)
    }

    /// All matches in lexicographic `(slot, home, away)` order.
    pub fn matches(&self) -> Vec<MatchKey> {
        let mut out = Vec::with_capacity(self.num_slots() * self.n / 2);
        for k in 1..=self.num_slots() {
            for i in 1..=self.n {
                if self.plays_home(k, i) {
                    out.push(MatchKey::new(k, i, self.opponent(k, i)));
                }
            }
        }
        out
    }

    /// Venues visited by team `t`: its home, one venue per slot, then home again.
    pub fn itinerary(&self, t: usize) -> Vec<TeamId> {
        let mut out = Vec::with_capacity(self.num_slots() + 2);
        out.push(TeamId::new(t));
        out.extend((1..=self.num_slots()).map(|k| TeamId::new(self.venue(k, t))));
        out.push(TeamId::new(t));
        out
    }

    pub fn play_vector(&self) -> PlayVector {
        let layout = self.layout();
        let mut x = vec![0u8; layout.num_play()];
        for m in self.matches() {
            x[layout.x(m.slot.get(), m.home.get(), m.away.get())] = 1;
        }
        PlayVector(x)
    }

    pub fn travel_vector(&self) -> TravelVector {
        let layout = self.layout();
        let mut y = vec![0u8; layout.num_travel()];
        for t in 1..=self.n {
            let it = self.itinerary(t);
            for w in it.windows(2) {
                let (i, j) = (w[0].get(), w[1].get());
                if i != j {
                    let e = &mut y[layout.travel(t, i, j)];
                    assert_eq!(*e, 0, "team {t} travels arc ({i},{j}) twice");
                    *e = 1;
                }
            }
        }
        TravelVector(y)
    }

    pub fn as_point(&self) -> SolutionPoint {
        SolutionPoint { x: self.play_vector(), y: self.travel_vector() }
    }

    pub fn total_distance(&self, inst: &Instance) -> Result<Rational, ScheduleError> {
        if inst.n() != self.n {
            return Err(ScheduleError::SizeMismatch { instance: inst.n(), tournament: self.n });
        }
        let mut total = Rational::zero();
        for t in 1..=self.n {
            for w in self.itinerary(t).windows(2) {
                let (i, j) = (w[0].get(), w[1].get());
                if i != j {
                    total += inst.distance(i, j);
                }
            }
        }
        Ok(total)
    }

    /// Checks the home-no-repeat condition: the two matches of a pair are
    /// never in consecutive slots.
    pub fn has_no_repeaters(&self) -> bool {
        (1..self.num_slots()).all(|k| (1..=self.n).all(|i| self.opponent(k, i) != self.opponent(k + 1, i)))
    }

    /// Longest run of consecutive home (resp. away) slots over all teams.
    pub fn max_stand(&self) -> usize {
        let mut best = 0;
        for t in 1..=self.n {
            let mut run = 0;
            for k in 1..=self.num_slots() {
                if k > 1 && self.plays_home(k, t) == self.plays_home(k - 1, t) {
                    run += 1;
                } else {
                    run = 1;
                }
                best = best.max(run);
            }
        }
        best
    }

    /// Second half repeats the first with home and away exchanged.
    pub fn is_mirrored(&self) -> bool {
        let half = self.n - 1;
        (1..=half).all(|k| {
            (1..=self.n).all(|i| {
                self.opponent(k + half, i) == self.opponent(k, i) && self.plays_home(k + half, i) != self.plays_home(k, i)
            })
        })
    }

    /// Human-readable slot grid: one row per team, `@j` marks an away match at `j`.
    pub fn grid(&self) -> String {
        let mut s = String::new();
        s.push_str("team |");
        for k in 1..=self.num_slots() {
            s.push_str(&format!(" {k:>3}"));
        }
        s.push('\n');
        for t in 1..=self.n {
            s.push_str(&format!("{t:>4} |"));
            for k in 1..=self.num_slots() {
                let o = self.opponent(k, t);
                if self.plays_home(k, t) {
                    s.push_str(&format!(" {o:>3}"));
                } else {
                    s.push_str(&format!(" {:>3}", format!("@{o}")));
                }
            }
            s.push('\n');
        }
        s
    }
}
