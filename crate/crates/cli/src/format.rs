//! The system-file grammar, its canonical printer, and matrix files.
//!
//! ```text
//! # comment
//! vars y1 y2;
//! P0: 1, y1*y1';
//! P1: 1, y1;
//! P2: 1, y2';
//! u0_1 = [1, 2, -1/3];      # optional series value of a coefficient
//! ```
//!
//! A file may instead list bare monomials with `mons: ...;` for the
//! support-matrix commands.

use std::fmt::Write as _;

use sparse_diffres::diffpoly::{parse_monomial, DiffPolyError};
use sparse_diffres::{DiffIndex, DiffSystem, Monomial, Rational};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// A parsed system file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemFile {
    pub n: usize,
    pub system: Option<DiffSystem>,
    pub mons: Option<Vec<Monomial>>,
}

struct Src<'a> {
    text: &'a str,
}

impl Src<'_> {
    fn err(&self, offset: usize, msg: impl Into<String>) -> ParseError {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
        ParseError { line, col, msg: msg.into() }
    }
}

/// Blanks out comments so offsets stay valid.
fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_comment = false;
    for ch in text.chars() {
        if ch == '#' {
            in_comment = true;
        }
        if ch == '\n' {
            in_comment = false;
        }
        if in_comment {
            for _ in 0..ch.len_utf8() {
                out.push(' ');
            }
        } else {
            out.push(ch);
        }
    }
    out
}

/// Pieces of `s` split at `sep`, each with its offset, trimmed.
fn pieces(s: &str, base: usize, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, ch) in s.char_indices().chain(std::iter::once((s.len(), sep))) {
        if ch == sep {
            let raw = &s[start..i];
            let lead = raw.len() - raw.trim_start().len();
            out.push((base + start + lead, raw.trim()));
            start = i + ch.len_utf8();
        }
    }
    out
}

fn parse_mon_list(src: &Src, body: &str, base: usize, n: usize) -> Result<Vec<Monomial>, ParseError> {
    let mut out: Vec<Monomial> = Vec::new();
    for (off, tok) in pieces(body, base, ',') {
        if tok.is_empty() {
            return Err(src.err(off, "empty monomial"));
        }
        let m = parse_monomial(tok).map_err(|e| match e {
            DiffPolyError::Parse { offset, msg } => src.err(off + offset, format!("malformed monomial: {msg}")),
            other => src.err(off, other.to_string()),
        })?;
        for (v, _) in m.exps() {
            match v.base {
                DiffIndex::Y { j } if j >= 1 && (j as usize) <= n => {}
                _ => return Err(src.err(off, format!("unknown variable {v}"))),
            }
        }
        if out.contains(&m) {
            return Err(src.err(off, format!("duplicate monomial {m}")));
        }
        out.push(m);
    }
    Ok(out)
}

fn parse_rational(src: &Src, tok: &str, off: usize) -> Result<Rational, ParseError> {
    tok.parse::<Rational>().map_err(|_| src.err(off, format!("not a rational number: {tok:?}")))
}

pub fn parse_system(text: &str) -> Result<SystemFile, ParseError> {
    let clean = strip_comments(text);
    let src = Src { text };
    let mut n: Option<usize> = None;
    let mut polys: Vec<Option<Vec<Monomial>>> = Vec::new();
    let mut mons = None;
    let mut values: Vec<(usize, usize, Vec<Rational>, usize)> = Vec::new();
    let stmts = pieces(&clean, 0, ';');
    let last = stmts.len() - 1;
    for (idx, (off, stmt)) in stmts.into_iter().enumerate() {
        if stmt.is_empty() {
            continue;
        }
        if idx == last {
            return Err(src.err(off + stmt.len(), "missing ';'"));
        }
        if let Some(rest) = stmt.strip_prefix("vars") {
            if n.is_some() {
                return Err(src.err(off, "vars declared twice"));
            }
            let names: Vec<&str> = rest.split_whitespace().collect();
            if names.is_empty() {
                return Err(src.err(off, "vars needs at least one variable"));
            }
            for (j, name) in names.iter().enumerate() {
                if *name != format!("y{}", j + 1) {
                    let at = off + stmt.find(name).unwrap_or(0);
                    return Err(src.err(at, format!("expected y{} in the variable list, found {name}", j + 1)));
                }
            }
            n = Some(names.len());
            continue;
        }
        let Some(nv) = n else { return Err(src.err(off, "the file must start with a vars declaration")) };
        if let Some((head, body)) = stmt.split_once(':') {
            let body_off = off + head.len() + 1;
            let head = head.trim();
            if head == "mons" {
                mons = Some(parse_mon_list(&src, body, body_off, nv)?);
            } else if let Some(i) = head.strip_prefix('P').and_then(|x| x.parse::<usize>().ok()) {
                if i > nv {
                    return Err(src.err(off, format!("P{i} exceeds P{nv} for {nv} variables")));
                }
                polys.resize(nv + 1, None);
                if polys[i].is_some() {
                    return Err(src.err(off, format!("P{i} defined twice")));
                }
                let sup = parse_mon_list(&src, body, body_off, nv)?;
                if sup.len() < 2 {
                    return Err(src.err(off, format!("P{i} needs at least two monomials")));
                }
                polys[i] = Some(sup);
            } else {
                return Err(src.err(off, format!("unknown statement {head:?}")));
            }
        } else if let Some((lhs, rhs)) = stmt.split_once('=') {
            let name = lhs.trim();
            let (i, k) = name
                .strip_prefix('u')
                .and_then(|x| x.split_once('_'))
                .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
                .ok_or_else(|| src.err(off, format!("expected a coefficient name like u0_1, found {name:?}")))?;
            let rhs_off = off + lhs.len() + 1;
            let r = rhs.trim();
            let inner = r.strip_prefix('[').and_then(|x| x.strip_suffix(']')).ok_or_else(|| src.err(rhs_off, "expected [c0, c1, ...]"))?;
            let inner_off = rhs_off + (rhs.len() - rhs.trim_start().len()) + 1;
            let mut cs = Vec::new();
            for (o, tok) in pieces(inner, inner_off, ',') {
                cs.push(parse_rational(&src, tok, o)?);
            }
            values.push((i, k, cs, off));
        } else {
            return Err(src.err(off, format!("cannot parse statement {stmt:?}")));
        }
    }
    let n = n.ok_or_else(|| src.err(0, "empty file: expected a vars declaration"))?;
    let system = if polys.is_empty() {
        None
    } else {
        let mut sups = Vec::new();
        for (i, p) in polys.into_iter().enumerate() {
            sups.push(p.ok_or_else(|| src.err(text.len(), format!("P{i} is missing")))?);
        }
        let mut sys = DiffSystem::new(n, sups).map_err(|e| src.err(0, e.to_string()))?;
        for (i, k, cs, off) in values {
            sys.set_value(i, k, cs).map_err(|e| src.err(off, e.to_string()))?;
        }
        Some(sys)
    };
    if system.is_none() && mons.is_none() {
        return Err(src.err(text.len(), "no polynomials or monomials given"));
    }
    Ok(SystemFile { n, system, mons })
}

/// Canonical text of a system; `parse_system` inverts it.
pub fn print_system(sys: &DiffSystem) -> String {
    let mut out = String::new();
    let names: Vec<String> = (1..=sys.n()).map(|j| format!("y{j}")).collect();
    let _ = writeln!(out, "vars {};", names.join(" "));
    for (i, sup) in sys.supports().iter().enumerate() {
        let ms: Vec<String> = sup.iter().map(|m| m.to_string()).collect();
        let _ = writeln!(out, "P{i}: {};", ms.join(", "));
    }
    for ((i, k), cs) in sys.values() {
        let cs: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "u{i}_{k} = [{}];", cs.join(", "));
    }
    out
}

pub fn print_monomials(n: usize, mons: &[Monomial]) -> String {
    let names: Vec<String> = (1..=n).map(|j| format!("y{j}")).collect();
    let ms: Vec<String> = mons.iter().map(|m| m.to_string()).collect();
    format!("vars {};\nmons: {};\n", names.join(" "), ms.join(", "))
}

/// Whether a file holds a system rather than a matrix.
pub fn is_system_file(text: &str) -> bool {
    strip_comments(text).split_whitespace().next().is_some_and(|t| t.starts_with("vars"))
}

/// An order matrix: whitespace-separated integers, `-inf` for absent entries, one row per line.
pub fn parse_order_matrix(text: &str) -> Result<Vec<Vec<Option<i64>>>, ParseError> {
    let clean = strip_comments(text);
    let src = Src { text };
    let mut rows = Vec::new();
    let mut offset = 0;
    for line in clean.split_inclusive('\n') {
        let mut row = Vec::new();
        let mut pos = 0;
        for tok in line.split(|c: char| c.is_whitespace() || c == ',') {
            let at = offset + pos;
            pos += tok.len() + 1;
            if tok.is_empty() {
                continue;
            }
            row.push(match tok {
                "-inf" | "-∞" => None,
                t => Some(t.parse::<i64>().map_err(|_| src.err(at, format!("not an order: {t:?}")))?),
            });
        }
        offset += line.len();
        if !row.is_empty() {
            rows.push(row);
        }
    }
    if rows.is_empty() {
        return Err(src.err(0, "empty matrix"));
    }
    let w = rows[0].len();
    if let Some(r) = rows.iter().position(|r| r.len() != w) {
        return Err(ParseError { line: r + 1, col: 1, msg: format!("row {} has {} entries, expected {w}", r + 1, rows[r].len()) });
    }
    Ok(rows)
}
