//! LP-format and fixed-column MPS writers, plus minimal readers for the
//! subset written here (used for round-trip checks).

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use num_traits::{Signed, ToPrimitive, Zero};

use super::{Model, Sense};
use crate::Rational;

/// Constraint tag turned into an identifier accepted by LP/MPS readers:
/// `away_away[1,2,3,4]` becomes `away_away_1_2_3_4`.
pub fn row_name(tag: &str) -> String {
    let mut s: String = tag.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    while s.ends_with('_') {
        s.pop();
    }
    s
}

fn num(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{:.17}", r.to_f64().unwrap_or(f64::NAN))
    }
}

fn push_term(line: &mut String, c: &Rational, name: &str, first: bool) {
    let mag = num(&c.abs());
    let sign = if c.is_negative() { "-" } else { "+" };
    if first && !c.is_negative() {
        let _ = write!(line, " {mag} {name}");
    } else {
        let _ = write!(line, " {sign} {mag} {name}");
    }
}

const TERMS_PER_LINE: usize = 8;

pub fn write_lp(model: &Model) -> String {
    let names: Vec<String> = model.vars().map(|v| v.name()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", model.name);
    out.push_str("Minimize\n obj:");
    let obj: Vec<(usize, &Rational)> =
        model.objective().iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
    if obj.is_empty() {
        let _ = write!(out, " 0 {}", names[0]);
    }
    for (k, (col, c)) in obj.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        push_term(&mut out, c, &names[*col], k == 0);
    }
    out.push_str("\nSubject To\n");
    for row in model.constraints() {
        let _ = write!(out, " {}:", row_name(&row.tag));
        for (k, (col, c)) in row.terms().iter().enumerate() {
            if k > 0 && k % TERMS_PER_LINE == 0 {
                out.push_str("\n   ");
            }
            push_term(&mut out, c, &names[*col], k == 0);
        }
        if row.terms().is_empty() {
            let _ = write!(out, " 0 {}", names[0]);
        }
        let _ = writeln!(out, " {} {}", row.sense, num(&row.rhs));
    }
    out.push_str("Bounds\n");
    for name in &names {
        let _ = writeln!(out, " 0 <= {name} <= 1");
    }
    if model.is_integral() {
        out.push_str("Binaries\n");
        for chunk in names.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

fn mps_line(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str) {
    // Fields start at columns 2, 5, 15 and 25; longer names push later fields right.
    let _ = writeln!(out, " {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}");
}

pub fn write_mps(model: &Model) -> String {
    let names: Vec<String> = model.vars().map(|v| v.name()).collect();
    let rows: Vec<String> = model.constraints().iter().map(|r| row_name(&r.tag)).collect();
    let mut columns: Vec<Vec<(usize, &Rational)>> = vec![Vec::new(); model.num_vars()];
    for (r, row) in model.constraints().iter().enumerate() {
        for (col, c) in row.terms() {
            columns[*col].push((r, c));
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", model.name);
    out.push_str("ROWS\n N  obj\n");
    for (row, name) in model.constraints().iter().zip(&rows) {
        let t = match row.sense {
            Sense::Le => "L",
            Sense::Eq => "E",
            Sense::Ge => "G",
        };
        let _ = writeln!(out, " {t}  {name}");
    }
    out.push_str("COLUMNS\n");
    if model.is_integral() {
        out.push_str("    MARKER                 'MARKER'                 'INTORG'\n");
    }
    for (col, name) in names.iter().enumerate() {
        mps_line(&mut out, "", name, "obj", &num(&model.objective()[col]));
        for (r, c) in &columns[col] {
            mps_line(&mut out, "", name, &rows[*r], &num(c));
        }
    }
    if model.is_integral() {
        out.push_str("    MARKER                 'MARKER'                 'INTEND'\n");
    }
    out.push_str("RHS\n");
    for (row, name) in model.constraints().iter().zip(&rows) {
        if !row.rhs.is_zero() {
            mps_line(&mut out, "", "RHS", name, &num(&row.rhs));
        }
    }
    out.push_str("BOUNDS\n");
    for name in &names {
        mps_line(&mut out, "UP", "BND", name, "1");
    }
    out.push_str("ENDATA\n");
    out
}

pub fn export_lp(model: &Model, path: &Path) -> io::Result<()> {
    std::fs::write(path, write_lp(model))
}

pub fn export_mps(model: &Model, path: &Path) -> io::Result<()> {
    std::fs::write(path, write_mps(model))
}

/// Row/column/nonzero counts recovered from an exported file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileSummary {
    pub rows: usize,
    pub columns: usize,
    pub nonzeros: usize,
    pub binaries: usize,
}

#[derive(Debug, thiserror::Error)]
#[error("unreadable model file: {0}")]
pub struct ReadError(String);

/// Reads the LP subset produced by [`write_lp`].
pub fn read_lp_summary(text: &str) -> Result<FileSummary, ReadError> {
    #[derive(PartialEq)]
    enum Section {
        Head,
        Objective,
        Rows,
        Bounds,
        Binaries,
        End,
    }
    let mut section = Section::Head;
    let mut columns = BTreeSet::new();
    let mut rows = 0;
    let mut nonzeros = 0;
    let mut binaries = 0;
    let mut current: Vec<String> = Vec::new();
    let flush = |stmt: &mut Vec<String>, columns: &mut BTreeSet<String>, nonzeros: &mut usize| {
        for tok in stmt.iter() {
            if tok.starts_with("x_") || tok.starts_with("y_") {
                columns.insert(tok.clone());
                *nonzeros += 1;
            }
        }
        stmt.clear();
    };
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        match line.to_ascii_lowercase().as_str() {
            "minimize" | "minimise" => {
                section = Section::Objective;
                continue;
            }
            "subject to" | "st" | "s.t." => {
                section = Section::Rows;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "binaries" | "binary" => {
                section = Section::Binaries;
                continue;
            }
            "end" => {
                section = Section::End;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Objective => {
                for tok in line.split_whitespace() {
                    if tok.starts_with("x_") || tok.starts_with("y_") {
                        columns.insert(tok.to_string());
                    }
                }
            }
            Section::Rows => {
                let toks: Vec<String> = line.split_whitespace().map(str::to_string).collect();
                if toks.first().is_some_and(|t| t.ends_with(':')) {
                    rows += 1;
                    current.extend(toks.into_iter().skip(1));
                } else {
                    current.extend(toks);
                }
                if current.iter().any(|t| t == "<=" || t == ">=" || t == "=") {
                    let op = current.iter().position(|t| t == "<=" || t == ">=" || t == "=").unwrap();
                    let mut lhs = current[..op].to_vec();
                    // zero-coefficient placeholders are not nonzeros
                    if lhs.len() == 2 && lhs[0] == "0" {
                        lhs.clear();
                    }
                    flush(&mut lhs, &mut columns, &mut nonzeros);
                    current.clear();
                }
            }
            Section::Bounds => {
                for tok in line.split_whitespace() {
                    if tok.starts_with("x_") || tok.starts_with("y_") {
                        columns.insert(tok.to_string());
                    }
                }
            }
            Section::Binaries => binaries += line.split_whitespace().count(),
            Section::Head | Section::End => return Err(ReadError(format!("unexpected line {line:?}"))),
        }
    }
    if section != Section::End {
        return Err(ReadError("missing End".into()));
    }
    Ok(FileSummary { rows, columns: columns.len(), nonzeros, binaries })
}

/// Reads the MPS subset produced by [`write_mps`] (whitespace-separated fields).
pub fn read_mps_summary(text: &str) -> Result<FileSummary, ReadError> {
    let mut section = "";
    let mut rows = HashMap::new();
    let mut columns = BTreeSet::new();
    let mut nonzeros = 0;
    let mut integer = false;
    let mut binaries = BTreeSet::new();
    for line in text.lines() {
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        if !line.starts_with(' ') {
            section = line.split_whitespace().next().unwrap_or("");
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        match section {
            "ROWS" => {
                if f.len() != 2 {
                    return Err(ReadError(format!("bad row line {line:?}")));
                }
                rows.insert(f[1].to_string(), f[0].to_string());
            }
            "COLUMNS" => {
                if f.len() >= 3 && f[1] == "'MARKER'" {
                    integer = f[2] == "'INTORG'";
                    continue;
                }
                if f.len() < 3 || f.len().is_multiple_of(2) {
                    return Err(ReadError(format!("bad column line {line:?}")));
                }
                columns.insert(f[0].to_string());
                if integer {
                    binaries.insert(f[0].to_string());
                }
                for pair in f[1..].chunks(2) {
                    let kind = rows.get(pair[0]).ok_or_else(|| ReadError(format!("unknown row {}", pair[0])))?;
                    if kind != "N" {
                        nonzeros += 1;
                    }
                }
            }
            "RHS" | "BOUNDS" | "RANGES" => {}
            other => return Err(ReadError(format!("unexpected section {other:?}"))),
        }
    }
    if section != "ENDATA" {
        return Err(ReadError("missing ENDATA".into()));
    }
    let n_rows = rows.values().filter(|k| *k != "N").count();
    Ok(FileSummary { rows: n_rows, columns: columns.len(), nonzeros, binaries: binaries.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_circ, gen_con};
    use crate::model::{build, BuildOptions};

    #[test]
    fn lp_roundtrip_counts() {
        let m = build(&gen_circ(4).unwrap(), &BuildOptions::base().with_flow(true)).unwrap();
        let s = read_lp_summary(&write_lp(&m)).unwrap();
        assert_eq!(s.rows, m.num_constraints());
        assert_eq!(s.columns, 120);
        assert_eq!(s.nonzeros, m.num_nonzeros());
        assert_eq!(s.binaries, 120);
        let s = read_lp_summary(&write_lp(&m.relax())).unwrap();
        assert_eq!(s.binaries, 0);
    }

    #[test]
    fn mps_roundtrip_counts() {
        let m = build(&gen_con(6).unwrap(), &BuildOptions::base().with_mirrored(true)).unwrap();
        let s = read_mps_summary(&write_mps(&m)).unwrap();
        assert_eq!(s.rows, m.num_constraints());
        assert_eq!(s.columns, 480);
        assert_eq!(s.nonzeros, m.num_nonzeros());
        assert_eq!(s.binaries, 480);
    }

    #[test]
    fn output_is_deterministic() {
        let a = build(&gen_circ(4).unwrap(), &BuildOptions::base()).unwrap();
        let b = build(&gen_circ(4).unwrap(), &BuildOptions::base()).unwrap();
        assert_eq!(write_lp(&a), write_lp(&b));
        assert_eq!(write_mps(&a), write_mps(&b));
    }

    #[test]
    fn names() {
        assert_eq!(row_name("away_away[1,2,3,4]"), "away_away_1_2_3_4");
        let m = build(&gen_circ(4).unwrap(), &BuildOptions::plain()).unwrap();
        let lp = write_lp(&m);
        assert!(lp.contains(" team_plays_2_1: 1 x_2_1_2 + 1 x_2_1_3"));
        assert!(lp.contains(" first_slot_1_2: 1 x_1_2_1 - 1 y_1_1_2 <= 0\n"));
    }
}
