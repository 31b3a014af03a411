//! Building and transforming tournaments.
//!
//! Tournaments are obtained from a sequence of perfect matchings (one per slot)
//! whose edges are oriented complementarily: each edge occurs in exactly two
//! slots, once in each direction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::schedule::{check_team_count, validate_tournament, MatchKey, ScheduleError, Tournament};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("enumeration is only supported for n = 4 (got n = {0})")]
    UnsupportedEnumeration(usize),
    #[error("edge {{{0},{1}}} occurs {2} times in the factorization (expected 2)")]
    EdgeMultiplicity(usize, usize, usize),
    #[error("factorization has {got} matchings, expected {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("expected {expected} orientation choices, got {got}")]
    WrongChoiceCount { got: usize, expected: usize },
    #[error("match {0} is not part of the tournament")]
    MissingMatch(MatchKey),
    #[error("teams of a partial slot swap must be distinct")]
    TeamsNotDistinct,
}

/// A set of disjoint edges covering every team exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PerfectMatching {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl PerfectMatching {
    /// Edges are normalized to `(low, high)` and sorted.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut edges: Vec<(usize, usize)> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        edges.sort_unstable();
        let m = PerfectMatching { n, edges };
        assert!(m.is_perfect(), "not a perfect matching: {:?}", m.edges);
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_perfect(&self) -> bool {
        let mut seen = vec![false; self.n + 1];
        if self.edges.len() * 2 != self.n {
            return false;
        }
        for &(a, b) in &self.edges {
            if a == b || a == 0 || b > self.n || seen[a] || seen[b] {
                return false;
            }
            seen[a] = true;
            seen[b] = true;
        }
        true
    }
}

/// Ordered list of `2n-2` perfect matchings, one per slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    n: usize,
    matchings: Vec<PerfectMatching>,
}

impl Factorization {
    pub fn new(n: usize, matchings: Vec<PerfectMatching>) -> Result<Self, ConstructError> {
        check_team_count(n)?;
        if matchings.len() != 2 * n - 2 {
            return Err(ConstructError::WrongLength { got: matchings.len(), expected: 2 * n - 2 });
        }
        Ok(Factorization { n, matchings })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matchings(&self) -> &[PerfectMatching] {
        &self.matchings
    }

    /// Slots (1-based, ascending) in which edge `{i, j}` occurs.
    pub fn occurrences(&self, i: usize, j: usize) -> Vec<usize> {
        let e = (i.min(j), i.max(j));
        self.matchings
            .iter()
            .enumerate()
            .filter(|(_, m)| m.edges.binary_search(&e).is_ok())
            .map(|(k, _)| k + 1)
            .collect()
    }
}

/// All edges `{i, j}` with `i < j`, lexicographic.
pub fn all_edges(n: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect()
}

fn reduce_mod(v: i64, m: i64) -> usize {
    ((v - 1).rem_euclid(m) + 1) as usize
}

/// `M_k = {{k, n}} ∪ {{k+i, k-i} : i = 1..n/2-1}` for `k < n`, residues taken in
/// `1..=n-1`; `M_k = M_{k-n+1}` for the second half.
pub fn canonical_factorization(n: usize) -> Result<Factorization, ConstructError> {
    check_team_count(n)?;
    let m = (n - 1) as i64;
    let mut first = Vec::with_capacity(n - 1);
    for k in 1..n {
        let mut edges = vec![(k, n)];
        for i in 1..n / 2 {
            let a = reduce_mod(k as i64 + i as i64, m);
            let b = reduce_mod(k as i64 - i as i64, m);
            edges.push((a, b));
        }
        first.push(PerfectMatching::new(n, edges));
    }
    let mut matchings = first.clone();
    matchings.extend(first);
    Factorization::new(n, matchings)
}

/// Orients a factorization complementarily.
///
/// `choices[e]` refers to the `e`-th edge of [`all_edges`]; `true` puts the
/// lower-indexed team at home in the earlier of the edge's two slots, `false`
/// in the later one.
pub fn orient_complementary(f: &Factorization, choices: &[bool]) -> Result<Tournament, ConstructError> {
    let n = f.n;
    let edges = all_edges(n);
    if choices.len() != edges.len() {
        return Err(ConstructError::WrongChoiceCount { got: choices.len(), expected: edges.len() });
    }
    let mut matches = Vec::with_capacity(n * (n - 1));
    for (e, &(i, j)) in edges.iter().enumerate() {
        let occ = f.occurrences(i, j);
        if occ.len() != 2 {
            return Err(ConstructError::EdgeMultiplicity(i, j, occ.len()));
        }
        let (home_first, home_second) = if choices[e] { ((i, j), (j, i)) } else { ((j, i), (i, j)) };
        matches.push(MatchKey::new(occ[0], home_first.0, home_first.1));
        matches.push(MatchKey::new(occ[1], home_second.0, home_second.1));
    }
    Ok(validate_tournament(matches, n)?)
}

/// Orientation with every lower-indexed team at home in the earlier slot.
pub fn default_orientation(n: usize) -> Vec<bool> {
    vec![true; n * (n - 1) / 2]
}

/// Moves every match from slot `k` to slot `k + s` (cyclically over `2n-2` slots).
pub fn cyclic_shift(t: &Tournament, s: i64) -> Tournament {
    let slots = t.num_slots() as i64;
    let moved = t.matches().into_iter().map(|m| {
        let k = reduce_mod(m.slot.get() as i64 + s, slots);
        MatchKey::new(k, m.home.get(), m.away.get())
    });
    validate_tournament(moved, t.n()).expect("cyclic shift preserves validity")
}

/// Exchanges home and away of the two matches between `i` and `j`, which must
/// be `(k1, i, j)` and `(k2, j, i)`.
pub fn home_away_swap(
    t: &Tournament,
    k1: usize,
    k2: usize,
    i: usize,
    j: usize,
) -> Result<Tournament, ConstructError> {
    let a = MatchKey::new(k1, i, j);
    let b = MatchKey::new(k2, j, i);
    for m in [a, b] {
        if !t.contains(m) {
            return Err(ConstructError::MissingMatch(m));
        }
    }
    let out = t
        .matches()
        .into_iter()
        .filter(|m| *m != a && *m != b)
        .chain([MatchKey::new(k1, j, i), MatchKey::new(k2, i, j)]);
    Ok(validate_tournament(out, t.n())?)
}

/// Given `(k1,i,j), (k1,i2,j2), (k2,i,j2), (k2,i2,j)` in `t`, replaces them by
/// `(k1,i,j2), (k1,i2,j), (k2,i,j), (k2,i2,j2)`.
#[allow(clippy::too_many_arguments)]
pub fn partial_slot_swap(
    t: &Tournament,
    k1: usize,
    k2: usize,
    i: usize,
    j: usize,
    i2: usize,
    j2: usize,
) -> Result<Tournament, ConstructError> {
    let teams = [i, j, i2, j2];
    for a in 0..4 {
        for b in a + 1..4 {
            if teams[a] == teams[b] {
                return Err(ConstructError::TeamsNotDistinct);
            }
        }
    }
    let removed = [
        MatchKey::new(k1, i, j),
        MatchKey::new(k1, i2, j2),
        MatchKey::new(k2, i, j2),
        MatchKey::new(k2, i2, j),
    ];
    for m in removed {
        if !t.contains(m) {
            return Err(ConstructError::MissingMatch(m));
        }
    }
    let added = [
        MatchKey::new(k1, i, j2),
        MatchKey::new(k1, i2, j),
        MatchKey::new(k2, i, j),
        MatchKey::new(k2, i2, j2),
    ];
    let out = t.matches().into_iter().filter(|m| !removed.contains(m)).chain(added);
    Ok(validate_tournament(out, t.n())?)
}

/// Renames teams: old team `i` becomes `perm[i-1]`.
pub fn relabel_teams(t: &Tournament, perm: &[usize]) -> Tournament {
    assert_eq!(perm.len(), t.n());
    let out = t
        .matches()
        .into_iter()
        .map(|m| MatchKey::new(m.slot.get(), perm[m.home.get() - 1], perm[m.away.get() - 1]));
    validate_tournament(out, t.n()).expect("team permutation preserves validity")
}

/// All `(k1, k2, i, j)` for which [`home_away_swap`] applies.
pub fn home_away_swap_sites(t: &Tournament) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for m in t.matches() {
        let (k1, i, j) = (m.slot.get(), m.home.get(), m.away.get());
        let k2 = (1..=t.num_slots()).find(|&k| t.opponent(k, i) == j && k != k1).expect("pair plays twice");
        out.push((k1, k2, i, j));
    }
    out
}

/// All `(k1, k2, i, j, i2, j2)` for which [`partial_slot_swap`] applies.
pub fn partial_slot_swap_sites(t: &Tournament) -> Vec<(usize, usize, usize, usize, usize, usize)> {
    let mut out = Vec::new();
    let slots = t.num_slots();
    for k1 in 1..=slots {
        for k2 in 1..=slots {
            if k1 == k2 {
                continue;
            }
            for i in 1..=t.n() {
                if !t.plays_home(k1, i) {
                    continue;
                }
                let j = t.opponent(k1, i);
                for i2 in 1..=t.n() {
                    if i2 == i || !t.plays_home(k1, i2) {
                        continue;
                    }
                    let j2 = t.opponent(k1, i2);
                    if t.contains(MatchKey::new(k2, i, j2)) && t.contains(MatchKey::new(k2, i2, j)) {
                        out.push((k1, k2, i, j, i2, j2));
                    }
                }
            }
        }
    }
    out
}

/// All perfect matchings of `K_n` in lexicographic order of their edge lists.
pub fn all_perfect_matchings(n: usize) -> Vec<PerfectMatching> {
    fn rec(free: &mut Vec<usize>, cur: &mut Vec<(usize, usize)>, n: usize, out: &mut Vec<PerfectMatching>) {
        if free.is_empty() {
            out.push(PerfectMatching::new(n, cur.iter().copied()));
            return;
        }
        let a = free.remove(0);
        for idx in 0..free.len() {
            let b = free.remove(idx);
            cur.push((a, b));
            rec(free, cur, n, out);
            cur.pop();
            free.insert(idx, b);
        }
        free.insert(0, a);
    }
    let mut out = Vec::new();
    rec(&mut (1..=n).collect(), &mut Vec::new(), n, &mut out);
    out.sort_by(|a, b| a.edges.cmp(&b.edges));
    out
}

struct Enumerator<'a, F: FnMut(&Tournament)> {
    n: usize,
    matchings: Vec<PerfectMatching>,
    edge_index: Vec<usize>,
    first_slot: Vec<usize>,
    uses: Vec<u8>,
    matches: Vec<MatchKey>,
    count: u64,
    visitor: &'a mut F,
}

impl<F: FnMut(&Tournament)> Enumerator<'_, F> {
    fn edge_id(&self, i: usize, j: usize) -> usize {
        self.edge_index[i * (self.n + 1) + j]
    }

    fn place_slot(&mut self, k: usize) {
        if k > 2 * self.n - 2 {
            let t = validate_tournament(self.matches.iter().copied(), self.n).expect("enumerated tournament is valid");
            self.count += 1;
            (self.visitor)(&t);
            return;
        }
        for m in 0..self.matchings.len() {
            let edges = self.matchings[m].edges.clone();
            if edges.iter().any(|&(i, j)| self.uses[self.edge_id(i, j)] >= 2) {
                continue;
            }
            for &(i, j) in &edges {
                let e = self.edge_id(i, j);
                self.uses[e] += 1;
                if self.uses[e] == 1 {
                    self.first_slot[e] = k;
                }
            }
            self.orient(k, &edges, 0);
            for &(i, j) in &edges {
                let e = self.edge_id(i, j);
                self.uses[e] -= 1;
            }
        }
    }

    /// Orients the edges of slot `k` from position `pos` on. First occurrences
    /// are left open; a second occurrence fixes both matches of the edge.
    fn orient(&mut self, k: usize, edges: &[(usize, usize)], pos: usize) {
        if pos == edges.len() {
            self.place_slot(k + 1);
            return;
        }
        let (i, j) = edges[pos];
        let e = self.edge_id(i, j);
        if self.uses[e] == 1 {
            self.orient(k, edges, pos + 1);
            return;
        }
        let k0 = self.first_slot[e];
        for low_home_first in [true, false] {
            let (a, b) = if low_home_first { ((i, j), (j, i)) } else { ((j, i), (i, j)) };
            self.matches.push(MatchKey::new(k0, a.0, a.1));
            self.matches.push(MatchKey::new(k, b.0, b.1));
            self.orient(k, edges, pos + 1);
            self.matches.pop();
            self.matches.pop();
        }
    }
}

/// Visits every tournament on `n = 4` teams exactly once and returns the count.
///
/// Slots are filled in order 1..2n-2 with perfect matchings taken in
/// lexicographic order; an edge's orientation is chosen when its second
/// occurrence is placed. The visiting order is deterministic.
pub fn enumerate_tournaments(n: usize, mut visitor: impl FnMut(&Tournament)) -> Result<u64, ConstructError> {
    check_team_count(n)?;
    if n != 4 {
        return Err(ConstructError::UnsupportedEnumeration(n));
    }
    let edges = all_edges(n);
    let mut edge_index = vec![usize::MAX; (n + 1) * (n + 1)];
    for (e, &(i, j)) in edges.iter().enumerate() {
        edge_index[i * (n + 1) + j] = e;
    }
    let mut en = Enumerator {
        n,
        matchings: all_perfect_matchings(n),
        edge_index,
        first_slot: vec![0; edges.len()],
        uses: vec![0; edges.len()],
        matches: Vec::with_capacity(n * (n - 1)),
        count: 0,
        visitor: &mut visitor,
    };
    en.place_slot(1);
    Ok(en.count)
}

/// Collects all tournaments of [`enumerate_tournaments`] in visiting order.
pub fn all_tournaments(n: usize) -> Result<Vec<Tournament>, ConstructError> {
    let mut out = Vec::new();
    enumerate_tournaments(n, |t| out.push(t.clone()))?;
    Ok(out)
}

/// Random tournament: canonical factorization, uniformly random team
/// relabelling, slot rotation and orientation. Deterministic in `seed`.
pub fn random_tournament(n: usize, seed: u64) -> Result<Tournament, ConstructError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = canonical_factorization(n)?;
    let choices: Vec<bool> = (0..n * (n - 1) / 2).map(|_| rng.gen()).collect();
    let t = orient_complementary(&f, &choices)?;
    let mut perm: Vec<usize> = (1..=n).collect();
    perm.shuffle(&mut rng);
    let t = relabel_teams(&t, &perm);
    let s = rng.gen_range(0..(2 * n - 2) as i64);
    Ok(cyclic_shift(&t, s))
}
