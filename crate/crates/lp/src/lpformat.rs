//! Reading and writing the CPLEX LP text format.
//!
//! The writer emits `Minimize`, `Subject To`, `Bounds` and `End` sections with every
//! variable listed in `Bounds`, so a problem survives a write/parse round trip with its
//! variable order intact. The parser accepts that output plus the common hand-written
//! variants (`x free`, one-sided bounds, `x >= l`, terms split across lines). The objective
//! constant has no portable spelling and is stored in a `\ constant:` comment line.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::problem::{LpProblem, Relation, VarId};
use crate::LpError;

const TERMS_PER_LINE: usize = 8;

/// Legal LP-format name: starts with a letter or `_` and uses only `[A-Za-z0-9_.]`.
/// Names starting with `e`/`E` followed by a digit are avoided because some readers take
/// them for exponents.
fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    if !(first.is_ascii_alphabetic() || first == '_') {
        return false;
    }
    if matches!(first, 'e' | 'E') && name[1..].starts_with(|c: char| c.is_ascii_digit()) {
        return false;
    }
    let lower = name.to_ascii_lowercase();
    if matches!(
        lower.as_str(),
        "free" | "inf" | "infinity" | "st" | "end" | "bounds"
    ) {
        return false;
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// Names used in the written file: the original name when legal and unique, else `_v{i}`
/// (or `_c{i}` for rows).
fn export_names<'a>(names: impl Iterator<Item = &'a str>, prefix: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    names
        .enumerate()
        .map(|(i, n)| {
            if is_valid_name(n) && !n.starts_with('_') && seen.insert(n.to_string()) {
                n.to_string()
            } else {
                format!("_{prefix}{i}")
            }
        })
        .collect()
}

/// Names the writer will use for each variable, in variable order.
pub fn exported_var_names(problem: &LpProblem) -> Vec<String> {
    export_names(problem.vars().iter().map(|v| v.name.as_str()), "v")
}

fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        // `{:?}` gives the shortest round-trippable decimal.
        format!("{x:?}")
    }
}

fn write_terms(out: &mut String, terms: &[(VarId, f64)], names: &[String]) {
    if terms.is_empty() {
        // Some readers reject an empty linear form; `0 x` keeps the line parseable.
        let _ = write!(
            out,
            " 0 {}",
            names.first().map(String::as_str).unwrap_or("_v0")
        );
        return;
    }
    for (k, &(v, a)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if a < 0.0 || (a == 0.0 && a.is_sign_negative()) {
            '-'
        } else {
            '+'
        };
        let _ = write!(out, " {sign} {} {}", fmt_num(a.abs()), names[v.0]);
    }
}

/// Render `problem` in LP text format.
pub fn write_lp(problem: &LpProblem) -> String {
    let vnames = exported_var_names(problem);
    let cnames = export_names(problem.constraints().iter().map(|c| c.name.as_str()), "c");
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ Problem: {}",
        problem.name.replace(['\n', '\r'], " ")
    );
    let _ = writeln!(
        out,
        "\\ constant: {}",
        fmt_num(problem.objective_constant())
    );
    out.push_str("Minimize\n obj:");
    write_terms(&mut out, problem.objective_terms(), &vnames);
    out.push_str("\nSubject To\n");
    for (c, name) in problem.constraints().iter().zip(&cnames) {
        let _ = write!(out, " {name}:");
        write_terms(&mut out, &c.terms, &vnames);
        let _ = writeln!(out, " {} {}", c.relation.symbol(), fmt_num(c.rhs));
    }
    out.push_str("Bounds\n");
    for (v, name) in problem.vars().iter().zip(&vnames) {
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
            _ => {
                let _ = writeln!(
                    out,
                    " {} <= {name} <= {}",
                    fmt_num(v.lower),
                    fmt_num(v.upper)
                );
            }
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sign(f64),
    Rel(Relation),
    Colon,
}

fn parse_err(line: usize, message: impl Into<String>) -> LpError {
    LpError::Parse {
        line,
        message: message.into(),
    }
}

fn tokenize(line_no: usize, text: &str) -> Result<Vec<Tok>, LpError> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            ':' => {
                toks.push(Tok::Colon);
                i += 1;
            }
            '+' | '-' => {
                // Signed infinity is a number, else a sign.
                let rest = text[i + 1..].to_ascii_lowercase();
                let inf_len = ["infinity", "inf"]
                    .iter()
                    .find(|w| rest.starts_with(*w))
                    .map(|w| w.len());
                let s = if c == '-' { -1.0 } else { 1.0 };
                if let Some(l) = inf_len {
                    toks.push(Tok::Num(s * f64::INFINITY));
                    i += 1 + l;
                } else {
                    toks.push(Tok::Sign(s));
                    i += 1;
                }
            }
            '<' | '>' | '=' => {
                let mut j = i + 1;
                if j < bytes.len() && matches!(bytes[j], b'=' | b'<' | b'>') {
                    j += 1;
                }
                let rel = match &text[i..j] {
                    "<=" | "=<" | "<" => Relation::Le,
                    ">=" | "=>" | ">" => Relation::Ge,
                    "=" => Relation::Eq,
                    other => return Err(parse_err(line_no, format!("bad relation {other}"))),
                };
                toks.push(Tok::Rel(rel));
                i = j;
            }
            d if d.is_ascii_digit() || d == '.' => {
                let mut j = i;
                while j < bytes.len() {
                    let b = bytes[j] as char;
                    let exp_sign =
                        matches!(b, '+' | '-') && j > i && matches!(bytes[j - 1], b'e' | b'E');
                    if b.is_ascii_digit() || b == '.' || matches!(b, 'e' | 'E') || exp_sign {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let v: f64 = text[i..j]
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad number {}", &text[i..j])))?;
                toks.push(Tok::Num(v));
                i = j;
            }
            _ => {
                let mut j = i;
                while j < bytes.len()
                    && !matches!(
                        bytes[j],
                        b' ' | b'\t' | b':' | b'<' | b'>' | b'=' | b'+' | b'-'
                    )
                {
                    j += 1;
                }
                let word = &text[i..j];
                match word.to_ascii_lowercase().as_str() {
                    "inf" | "infinity" => toks.push(Tok::Num(f64::INFINITY)),
                    _ => toks.push(Tok::Ident(word.to_string())),
                }
                i = j;
            }
        }
    }
    Ok(toks)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Done,
}

fn section_header(line: &str) -> Option<Section> {
    match line.trim().to_ascii_lowercase().as_str() {
        "minimize" | "minimum" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "end" => Some(Section::Done),
        _ => None,
    }
}

struct Builder {
    order: Vec<String>,
    index: HashMap<String, usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Builder {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.order.len();
        self.order.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.lower.push(0.0);
        self.upper.push(f64::INFINITY);
        i
    }
}

/// Optional label, terms, and the number of tokens consumed.
type LinearForm = (Option<String>, Vec<(usize, f64)>, usize);

/// Parse a linear form `[name:] ±c x ±c y ...`.
fn parse_linear(line: usize, toks: &[Tok], b: &mut Builder) -> Result<LinearForm, LpError> {
    let mut pos = 0;
    let mut label = None;
    if let [Tok::Ident(n), Tok::Colon, ..] = toks {
        label = Some(n.clone());
        pos = 2;
    }
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    while pos < toks.len() {
        match &toks[pos] {
            Tok::Sign(s) => {
                if coef.is_some() {
                    return Err(parse_err(line, "coefficient without variable"));
                }
                sign *= s;
            }
            Tok::Num(v) => {
                if coef.is_some() {
                    return Err(parse_err(line, "two numbers in a row"));
                }
                coef = Some(*v);
            }
            Tok::Ident(n) => {
                let i = b.var(n);
                terms.push((i, sign * coef.unwrap_or(1.0)));
                sign = 1.0;
                coef = None;
            }
            Tok::Rel(_) => break,
            Tok::Colon => return Err(parse_err(line, "unexpected ':'")),
        }
        pos += 1;
    }
    if coef.is_some() {
        return Err(parse_err(line, "dangling constant in linear form"));
    }
    Ok((label, terms, pos))
}

fn signed_number(line: usize, toks: &[Tok]) -> Result<f64, LpError> {
    match toks {
        [Tok::Num(v)] => Ok(*v),
        [Tok::Sign(s), Tok::Num(v)] => Ok(s * v),
        _ => Err(parse_err(line, "expected a number")),
    }
}

fn parse_bound(line: usize, toks: &[Tok], b: &mut Builder) -> Result<(), LpError> {
    match toks {
        [Tok::Ident(n), Tok::Ident(kw)] if kw.eq_ignore_ascii_case("free") => {
            let i = b.var(n);
            b.lower[i] = f64::NEG_INFINITY;
            b.upper[i] = f64::INFINITY;
            return Ok(());
        }
        _ => {}
    }
    let rels: Vec<usize> = toks
        .iter()
        .enumerate()
        .filter(|(_, t)| matches!(t, Tok::Rel(_)))
        .map(|(i, _)| i)
        .collect();
    let rel_at = |k: usize| match toks[k] {
        Tok::Rel(r) => r,
        _ => unreachable!(),
    };
    match rels.as_slice() {
        [r1, r2] => {
            let lo = signed_number(line, &toks[..*r1])?;
            let Tok::Ident(n) = &toks[r1 + 1] else {
                return Err(parse_err(line, "expected variable in double bound"));
            };
            if *r2 != r1 + 2 {
                return Err(parse_err(line, "malformed double bound"));
            }
            let hi = signed_number(line, &toks[r2 + 1..])?;
            if rel_at(*r1) != Relation::Le || rel_at(*r2) != Relation::Le {
                return Err(parse_err(line, "double bounds must use <="));
            }
            let i = b.var(n);
            b.lower[i] = lo;
            b.upper[i] = hi;
        }
        [r] => {
            let rel = rel_at(*r);
            if let [Tok::Ident(n)] = &toks[..*r] {
                let v = signed_number(line, &toks[r + 1..])?;
                let i = b.var(n);
                match rel {
                    Relation::Le => b.upper[i] = v,
                    Relation::Ge => b.lower[i] = v,
                    Relation::Eq => {
                        b.lower[i] = v;
                        b.upper[i] = v;
                    }
                }
            } else if let [Tok::Ident(n)] = &toks[r + 1..] {
                let v = signed_number(line, &toks[..*r])?;
                let i = b.var(n);
                match rel {
                    Relation::Le => b.lower[i] = v,
                    Relation::Ge => b.upper[i] = v,
                    Relation::Eq => {
                        b.lower[i] = v;
                        b.upper[i] = v;
                    }
                }
            } else {
                return Err(parse_err(line, "malformed bound"));
            }
        }
        _ => return Err(parse_err(line, "malformed bound")),
    }
    Ok(())
}

/// Parse LP text into a problem. Variables are ordered by first appearance in the `Bounds`
/// section, then by first appearance elsewhere.
pub fn parse_lp(text: &str) -> Result<LpProblem, LpError> {
    let mut name = String::new();
    let mut constant = 0.0;
    let mut section = Section::Preamble;
    // Statements may span lines; a statement is complete when the next one starts.
    let mut objective_toks: Vec<Tok> = Vec::new();
    let mut objective_line = 0;
    let mut rows: Vec<(usize, Vec<Tok>)> = Vec::new();
    let mut bounds: Vec<(usize, Vec<Tok>)> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('\\') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("Problem:") {
                name = rest.trim().to_string();
            } else if let Some(rest) = comment.strip_prefix("constant:") {
                let t = tokenize(line_no, rest)?;
                constant = signed_number(line_no, &t)?;
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        if let Some(s) = section_header(trimmed) {
            if s == Section::Objective {
                objective_line = line_no;
            }
            section = s;
            continue;
        }
        let toks = tokenize(line_no, trimmed)?;
        match section {
            Section::Preamble => return Err(parse_err(line_no, "content before Minimize")),
            Section::Done => return Err(parse_err(line_no, "content after End")),
            Section::Objective => objective_toks.extend(toks),
            Section::Constraints => {
                let starts_new = matches!(toks.as_slice(), [Tok::Ident(_), Tok::Colon, ..])
                    || rows.last().is_none_or(|(_, t)| {
                        // previous row complete once it has a relation followed by a number
                        t.iter()
                            .rposition(|x| matches!(x, Tok::Rel(_)))
                            .is_some_and(|p| p + 1 < t.len())
                    });
                if starts_new {
                    rows.push((line_no, toks));
                } else if let Some((_, t)) = rows.last_mut() {
                    t.extend(toks);
                }
            }
            Section::Bounds => bounds.push((line_no, toks)),
        }
    }
    if section != Section::Done {
        return Err(parse_err(text.lines().count(), "missing End"));
    }

    let mut b = Builder {
        order: Vec::new(),
        index: HashMap::new(),
        lower: Vec::new(),
        upper: Vec::new(),
    };
    for (line, toks) in &bounds {
        parse_bound(*line, toks, &mut b)?;
    }
    let (_, obj_terms, used) = parse_linear(objective_line, &objective_toks, &mut b)?;
    if used != objective_toks.len() {
        return Err(parse_err(objective_line, "relation in objective"));
    }
    let mut parsed_rows = Vec::new();
    for (i, (line, toks)) in rows.iter().enumerate() {
        let (label, terms, pos) = parse_linear(*line, toks, &mut b)?;
        let Some(Tok::Rel(rel)) = toks.get(pos) else {
            return Err(parse_err(*line, "constraint without relation"));
        };
        let rhs = signed_number(*line, &toks[pos + 1..])?;
        parsed_rows.push((label.unwrap_or_else(|| format!("_c{i}")), terms, *rel, rhs));
    }

    let mut lp = LpProblem::new(name);
    let ids: Vec<VarId> = (0..b.order.len())
        .map(|i| lp.add_var(b.order[i].clone(), b.lower[i], b.upper[i]))
        .collect();
    // Drop the `0 x` placeholder used for empty forms.
    let keep = |t: &Vec<(usize, f64)>| -> Vec<(VarId, f64)> {
        t.iter()
            .filter(|(_, a)| *a != 0.0)
            .map(|&(i, a)| (ids[i], a))
            .collect()
    };
    lp.set_objective(keep(&obj_terms), constant);
    for (label, terms, rel, rhs) in parsed_rows {
        lp.add_constraint(label, keep(&terms), rel, rhs);
    }
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> LpProblem {
        let mut lp = LpProblem::new("sample");
        let x = lp.add_nonneg("x");
        let y = lp.add_var("y", -2.5, 4.0);
        let z = lp.add_var("z", f64::NEG_INFINITY, f64::INFINITY);
        let w = lp.add_var("bad name!", 1.0, 1.0);
        lp.set_objective(vec![(x, 1.0), (y, -3.25), (z, 1e-12)], 7.5);
        lp.add_constraint("c1", vec![(x, 1.0), (y, 1.0)], Relation::Le, 10.0);
        lp.add_constraint("c1", vec![(z, -1.0), (w, 2.0)], Relation::Ge, -3.0);
        lp.add_constraint("eq", vec![(x, 0.5), (z, 1.0)], Relation::Eq, 0.125);
        lp.add_constraint("empty", vec![], Relation::Le, 1.0);
        lp
    }

    #[test]
    fn round_trip_preserves_numbers() {
        let lp = sample();
        let text = write_lp(&lp);
        let back = parse_lp(&text).unwrap();
        assert_eq!(back.num_vars(), lp.num_vars());
        assert_eq!(back.objective_constant(), 7.5);
        for (a, b) in lp.vars().iter().zip(back.vars()) {
            assert_eq!((a.lower, a.upper), (b.lower, b.upper));
        }
        assert_eq!(back.objective_terms(), lp.objective_terms());
        for (a, b) in lp.constraints().iter().zip(back.constraints()) {
            assert_eq!(a.terms, b.terms);
            assert_eq!(a.relation, b.relation);
            assert_eq!(a.rhs, b.rhs);
        }
        // Duplicate and illegal names were replaced.
        assert!(text.contains("_v3"));
        assert!(text.contains("_c1:"));
    }

    #[test]
    fn parses_hand_written_variants() {
        let text = "\\ hand\nMinimize\n obj: 2 x + y\n   - z\nSubject To\n c: x + y\n  >= 1\n d: z <= 4\nBounds\n x <= 5\n -1 <= y\n z free\nEnd\n";
        let lp = parse_lp(text).unwrap();
        assert_eq!(lp.num_vars(), 3);
        assert_eq!(lp.var(VarId(0)).upper, 5.0);
        assert_eq!(lp.var(VarId(1)).lower, -1.0);
        assert_eq!(lp.var(VarId(2)).lower, f64::NEG_INFINITY);
        assert_eq!(lp.constraints()[0].relation, Relation::Ge);
        assert_eq!(lp.objective_terms().len(), 3);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_lp("Minimize\n obj: x\nSubject To\n c: x <=\nEnd\n").is_err());
        assert!(parse_lp("Minimize\n obj: x\n").is_err());
        assert!(parse_lp("x + y\nEnd\n").is_err());
    }

    #[test]
    fn name_rules() {
        assert!(is_valid_name("x_1.2"));
        assert!(!is_valid_name("1x"));
        assert!(!is_valid_name("e1"));
        assert!(!is_valid_name("free"));
        assert!(!is_valid_name("a-b"));
    }
}
