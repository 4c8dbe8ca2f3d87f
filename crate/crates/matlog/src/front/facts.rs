//! Parsers for the three fact input formats.
//!
//! * `atoms` — ordinary clause syntax restricted to ground unit clauses;
//!   carries its own predicate names.
//! * `tsv` — one `subject<TAB>object` pair per line; bound to a caller-
//!   supplied predicate.
//! * `konect` — whitespace-separated integer edge lists as published in
//!   network dataset collections: `%` lines are comments, only the first
//!   two columns are read, and duplicate edges collapse. Bound to a
//!   caller-supplied predicate.
//!
//! All constants must be lexically valid in the clause language
//! (lowercase-initial identifiers or digit strings), so any loaded fact
//! set can be rendered back out and re-parsed.

use super::parser::{parse_raw, RawTerm};
use super::FrontError;

/// Input format for fact files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactFormat {
    Atoms,
    Tsv,
    Konect,
}

impl FactFormat {
    pub fn from_name(name: &str) -> Option<FactFormat> {
        match name {
            "atoms" => Some(FactFormat::Atoms),
            "tsv" => Some(FactFormat::Tsv),
            "konect" => Some(FactFormat::Konect),
            _ => None,
        }
    }
}

/// Facts parsed from one input, as `(predicate, (subject, object))` name
/// triples in input order (duplicates preserved here; merging collapses
/// them).
pub type RawFactPairs = Vec<(String, (String, String))>;

/// Parses fact text in the given format. `bind` names the predicate that
/// `tsv`/`konect` rows belong to; the `atoms` format ignores it because
/// atoms name their own predicates.
pub fn parse_facts(
    text: &str,
    format: FactFormat,
    bind: Option<&str>,
) -> Result<RawFactPairs, FrontError> {
    match format {
        FactFormat::Atoms => parse_atom_facts(text),
        FactFormat::Tsv => {
            let pred = bind.ok_or(FrontError::BindRequired { format: "tsv" })?;
            parse_tsv(text, pred)
        }
        FactFormat::Konect => {
            let pred = bind.ok_or(FrontError::BindRequired { format: "konect" })?;
            parse_konect(text, pred)
        }
    }
}

fn parse_atom_facts(text: &str) -> Result<RawFactPairs, FrontError> {
    let raw = parse_raw(text)?;
    let mut out = Vec::with_capacity(raw.len());
    for clause in raw {
        if !clause.body.is_empty() {
            return Err(FrontError::RuleInFactInput { line: clause.head.line });
        }
        let mut pair = Vec::with_capacity(2);
        for arg in &clause.head.args {
            match arg {
                RawTerm::Const(name) => pair.push(name.clone()),
                RawTerm::Var(v) => {
                    return Err(FrontError::NonGroundFact {
                        line: clause.head.line,
                        col: clause.head.col,
                        variable: v.clone(),
                    })
                }
            }
        }
        out.push((clause.head.predicate, (pair.remove(0), pair.remove(0))));
    }
    Ok(out)
}

/// A constant loaded from a tabular format must re-parse as a constant.
fn check_constant(name: &str, line: usize) -> Result<(), FrontError> {
    let ok = !name.is_empty()
        && name.chars().next().is_some_and(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(FrontError::InvalidConstant { line, token: name.to_string() })
    }
}

fn parse_tsv(text: &str, pred: &str) -> Result<RawFactPairs, FrontError> {
    let mut out = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a.trim(), b.trim()),
            _ => {
                return Err(FrontError::MalformedLine {
                    line: line_no,
                    msg: "expected exactly two tab-separated fields".into(),
                })
            }
        };
        if a.is_empty() || b.is_empty() {
            return Err(FrontError::MalformedLine { line: line_no, msg: "empty field".into() });
        }
        check_constant(a, line_no)?;
        check_constant(b, line_no)?;
        out.push((pred.to_string(), (a.to_string(), b.to_string())));
    }
    Ok(out)
}

fn parse_konect(text: &str, pred: &str) -> Result<RawFactPairs, FrontError> {
    let mut out = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (a, b) = match (fields.next(), fields.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(FrontError::MalformedLine {
                    line: line_no,
                    msg: "expected at least two whitespace-separated fields".into(),
                })
            }
        };
        for field in [a, b] {
            if field.is_empty() || !field.chars().all(|c| c.is_ascii_digit()) {
                return Err(FrontError::MalformedLine {
                    line: line_no,
                    msg: format!("node id '{field}' is not a nonnegative integer"),
                });
            }
        }
        out.push((pred.to_string(), (a.to_string(), b.to_string())));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_format_reads_ground_atoms() {
        let got = parse_facts("r1(e1,e2). r1(e2,e3).\ndiag(e1,e1).", FactFormat::Atoms, None)
            .unwrap();
        assert_eq!(got.len(), 3);
        assert_eq!(got[0], ("r1".into(), ("e1".into(), "e2".into())));
        assert_eq!(got[2].0, "diag");
    }

    #[test]
    fn atoms_format_rejects_rules() {
        let err = parse_facts("r2(X,Z) :- r1(X,Z).", FactFormat::Atoms, None).unwrap_err();
        assert!(matches!(err, FrontError::RuleInFactInput { line: 1 }));
    }

    #[test]
    fn tsv_reads_pairs_and_reports_bad_lines() {
        let got = parse_facts("e1\te2\n\ne2\te3\n", FactFormat::Tsv, Some("r1")).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[1], ("r1".into(), ("e2".into(), "e3".into())));

        let err = parse_facts("e1\te2\te3\n", FactFormat::Tsv, Some("r1")).unwrap_err();
        assert!(matches!(err, FrontError::MalformedLine { line: 1, .. }));

        let err = parse_facts("Alice\te2\n", FactFormat::Tsv, Some("r1")).unwrap_err();
        assert!(matches!(err, FrontError::InvalidConstant { line: 1, .. }));
    }

    #[test]
    fn tsv_requires_a_bound_predicate() {
        let err = parse_facts("e1\te2\n", FactFormat::Tsv, None).unwrap_err();
        assert!(matches!(err, FrontError::BindRequired { format: "tsv" }));
    }

    #[test]
    fn konect_skips_comments_and_reads_first_two_columns() {
        let text = "% directed edge list\n% 2 nodes\n1 2 1 917721600\n2 3\n";
        let got = parse_facts(text, FactFormat::Konect, Some("r1")).unwrap();
        assert_eq!(
            got,
            vec![
                ("r1".into(), ("1".into(), "2".into())),
                ("r1".into(), ("2".into(), "3".into())),
            ]
        );
    }

    #[test]
    fn konect_rejects_non_integer_ids() {
        let err = parse_facts("a b\n", FactFormat::Konect, Some("r1")).unwrap_err();
        assert!(matches!(err, FrontError::MalformedLine { line: 1, .. }));
    }
}
