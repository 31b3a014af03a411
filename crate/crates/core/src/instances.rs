//! Instance families and the RobinX XML subset (team count and distances).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use crate::schedule::{check_team_count, Instance, ScheduleError};
use crate::Rational;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("cannot read {path}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("no teams found in the resources section")]
    NoTeams,
    #[error("distance entry has bad attribute {attr:?}: {value:?}")]
    BadAttribute { attr: &'static str, value: String },
    #[error("distance entry refers to team {0} outside the instance")]
    TeamOutOfRange(i64),
    #[error("missing distance for pair ({0},{1})")]
    MissingDistance(usize, usize),
    #[error("conflicting distances for pair ({0},{1})")]
    ConflictingDistance(usize, usize),
    #[error("negative distance for pair ({0},{1})")]
    NegativeDistance(usize, usize),
    #[error("unknown instance family {0:?}")]
    UnknownFamily(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Con,
    Circ,
    Line,
    Incr,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] = [FamilyKind::Con, FamilyKind::Circ, FamilyKind::Line, FamilyKind::Incr];

    pub fn label(self) -> &'static str {
        match self {
            FamilyKind::Con => "CON",
            FamilyKind::Circ => "CIRC",
            FamilyKind::Line => "LINE",
            FamilyKind::Incr => "INCR",
        }
    }

    pub fn generate(self, n: usize) -> Result<Instance, ScheduleError> {
        match self {
            FamilyKind::Con => gen_con(n),
            FamilyKind::Circ => gen_circ(n),
            FamilyKind::Line => gen_line(n),
            FamilyKind::Incr => gen_incr(n),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FamilyKind {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "con" => Ok(FamilyKind::Con),
            "circ" => Ok(FamilyKind::Circ),
            "line" => Ok(FamilyKind::Line),
            "incr" => Ok(FamilyKind::Incr),
            _ => Err(InstanceError::UnknownFamily(s.to_string())),
        }
    }
}

/// Where an instance comes from: a generated family or a RobinX file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceFamily {
    Generated { kind: FamilyKind, n: usize },
    File { path: PathBuf },
}

impl InstanceFamily {
    pub fn load(&self) -> Result<Instance, InstanceError> {
        match self {
            InstanceFamily::Generated { kind, n } => Ok(kind.generate(*n)?),
            InstanceFamily::File { path } => parse_robinx(path),
        }
    }

    /// Parses names such as `circ4`, `CON6`, or a file path (an existing file,
    /// or anything with a directory separator or an `.xml` extension).
    pub fn parse(spec: &str) -> Result<Self, InstanceError> {
        let lower = spec.to_ascii_lowercase();
        let split = lower.find(|c: char| c.is_ascii_digit());
        if let Some(pos) = split {
            if let (Ok(kind), Ok(n)) = (lower[..pos].parse::<FamilyKind>(), lower[pos..].parse::<usize>()) {
                return Ok(InstanceFamily::Generated { kind, n });
            }
        }
        let path = PathBuf::from(spec);
        let looks_like_path = spec.contains(std::path::MAIN_SEPARATOR) || spec.contains('/') || lower.ends_with(".xml");
        if path.exists() || looks_like_path {
            return Ok(InstanceFamily::File { path });
        }
        Err(InstanceError::UnknownFamily(spec.to_string()))
    }
}

fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Constant distance 1.
pub fn gen_con(n: usize) -> Result<Instance, ScheduleError> {
    Instance::from_fn(format!("CON{n}"), n, |_, _| int(1))
}

/// Venues equidistant on a circle: `d = min(|i-j|, n-|i-j|)`.
pub fn gen_circ(n: usize) -> Result<Instance, ScheduleError> {
    Instance::from_fn(format!("CIRC{n}"), n, |i, j| {
        let d = i.abs_diff(j);
        int(d.min(n - d) as i64)
    })
}

/// Venues equidistant on a line: `d = |i-j|`.
pub fn gen_line(n: usize) -> Result<Instance, ScheduleError> {
    Instance::from_fn(format!("LINE{n}"), n, |i, j| int(i.abs_diff(j) as i64))
}

/// Venue positions on a line with increasing gaps.
pub fn incr_positions(n: usize) -> Vec<i64> {
    let mut p = vec![0i64; n];
    for i in 1..n {
        p[i] = p[i - 1] + i as i64;
    }
    p
}

/// Venues on a line at positions `0, 1, 3, 6, ...` (gap between venue `i` and
/// `i+1` is `i`).
pub fn gen_incr(n: usize) -> Result<Instance, ScheduleError> {
    let p = incr_positions(n);
    Instance::from_fn(format!("INCR{n}"), n, |i, j| int((p[i - 1] - p[j - 1]).abs()))
}

pub fn parse_robinx(path: &Path) -> Result<Instance, InstanceError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| InstanceError::Io { path: path.to_path_buf(), source })?;
    let fallback = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    parse_robinx_str(&text, fallback)
}

/// Parses the RobinX subset: team resources and `distance` entries with
/// `team1`, `team2`, `dist` attributes. Everything else is ignored.
///
/// Team ids may be 0- or 1-based; the base is detected from the smallest id.
pub fn parse_robinx_str(text: &str, fallback_name: &str) -> Result<Instance, InstanceError> {
    let doc = roxmltree::Document::parse(text)?;
    let root = doc.root_element();
    let name = root
        .descendants()
        .find(|n| n.has_tag_name("InstanceName"))
        .and_then(|n| n.text())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| fallback_name.to_string());

    let n = root
        .descendants()
        .find(|n| n.has_tag_name("Teams"))
        .map(|teams| teams.children().filter(|c| c.has_tag_name("team")).count())
        .unwrap_or(0);
    if n == 0 {
        return Err(InstanceError::NoTeams);
    }
    check_team_count(n)?;

    let mut raw = Vec::new();
    for node in root.descendants().filter(|n| n.has_tag_name("distance")) {
        let attr = |key: &'static str| -> Result<&str, InstanceError> {
            node.attribute(key).ok_or(InstanceError::BadAttribute { attr: key, value: String::new() })
        };
        let t1 = attr("team1")?;
        let t2 = attr("team2")?;
        let dist = attr("dist")?;
        let t1: i64 = t1.trim().parse().map_err(|_| InstanceError::BadAttribute { attr: "team1", value: t1.into() })?;
        let t2: i64 = t2.trim().parse().map_err(|_| InstanceError::BadAttribute { attr: "team2", value: t2.into() })?;
        let d = parse_distance(dist)?;
        raw.push((t1, t2, d));
    }
    let offset = if raw.iter().any(|&(a, b, _)| a == 0 || b == 0) { 1 } else { 0 };

    let mut matrix: Vec<Option<Rational>> = vec![None; n * n];
    for (t1, t2, d) in raw {
        let (i, j) = (t1 + offset, t2 + offset);
        for v in [i, j] {
            if v < 1 || v > n as i64 {
                return Err(InstanceError::TeamOutOfRange(v - offset));
            }
        }
        let (i, j) = (i as usize, j as usize);
        if i == j {
            continue;
        }
        if d.is_negative() {
            return Err(InstanceError::NegativeDistance(i, j));
        }
        let cell = &mut matrix[(i - 1) * n + (j - 1)];
        match cell {
            Some(old) if *old != d => return Err(InstanceError::ConflictingDistance(i, j)),
            _ => *cell = Some(d),
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            if i != j && matrix[(i - 1) * n + (j - 1)].is_none() {
                return Err(InstanceError::MissingDistance(i, j));
            }
        }
    }
    Ok(Instance::from_fn(name, n, |i, j| matrix[(i - 1) * n + (j - 1)].clone().expect("checked above"))?)
}

fn parse_distance(s: &str) -> Result<Rational, InstanceError> {
    let bad = || InstanceError::BadAttribute { attr: "dist", value: s.to_string() };
    let s = s.trim();
    if let Ok(v) = s.parse::<BigInt>() {
        return Ok(Rational::from_integer(v));
    }
    // Decimal notation, kept exact.
    let (int_part, frac_part) = s.split_once('.').ok_or_else(bad)?;
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(Rational::new(num, den))
}

fn format_distance(d: &Rational) -> String {
    if d.is_integer() {
        d.numer().to_string()
    } else {
        // Non-integer distances are written in decimal when exact, else as float.
        let f = d.to_f64().unwrap_or(f64::NAN);
        format!("{f}")
    }
}

/// Writes the RobinX subset read by [`parse_robinx_str`] (0-based team ids).
pub fn write_robinx(inst: &Instance) -> String {
    let n = inst.n();
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<Instance>\n");
    s.push_str(&format!("  <MetaData>\n    <InstanceName>{}</InstanceName>\n  </MetaData>\n", inst.name()));
    s.push_str("  <Data>\n    <Distances>\n");
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                s.push_str(&format!(
                    "      <distance dist=\"{}\" team1=\"{}\" team2=\"{}\"/>\n",
                    format_distance(inst.distance(i, j)),
                    i - 1,
                    j - 1
                ));
            }
        }
    }
    s.push_str("    </Distances>\n  </Data>\n  <Resources>\n    <Teams>\n");
    for i in 0..n {
        s.push_str(&format!("      <team id=\"{i}\" league=\"0\" name=\"T{}\"/>\n", i + 1));
    }
    s.push_str("    </Teams>\n  </Resources>\n</Instance>\n");
    s
}
