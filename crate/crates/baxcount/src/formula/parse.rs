//! Extended DIMACS reader and writer.
//!
//! The format is plain DIMACS CNF plus two comment-line extensions:
//!
//! ```text
//! p cnf <num-vars> <num-clauses>
//! c max <v1> <v2> ... 0      declares witness (X) variables
//! c ind <v1> <v2> ... 0      declares counting (Y) variables
//! ```
//!
//! Multiple `c max` / `c ind` lines accumulate. Variables in neither
//! declaration belong to the intermediate set `Z`. Any other `c` line is
//! ignored. Tautological clauses are dropped and duplicate literals within a
//! clause are removed while reading.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use super::{Clause, Lit, ProblemInstance, Var, VarPartition};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {0}: malformed header (expected `p cnf <vars> <clauses>`)")]
    MalformedHeader(usize),
    #[error("line {0}: second `p` header")]
    DuplicateHeader(usize),
    #[error("no `p cnf` header found")]
    MissingHeader,
    #[error("line {0}: malformed `{1}` declaration (expected variables followed by 0)")]
    MalformedDeclaration(usize, String),
    #[error("line {line}: variable {var} out of range 1..={num_vars}")]
    VarOutOfRange { line: usize, var: u64, num_vars: u32 },
    #[error("line {0}: unexpected token `{1}`")]
    UnexpectedToken(usize, String),
    #[error("clause list ends mid-clause (missing terminating 0)")]
    UnterminatedClause,
    #[error("header declares {declared} clauses but {found} were found")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("variable {0} declared in both `c max` and `c ind`")]
    OverlappingDeclarations(Var),
}

/// Parse the extended DIMACS format.
pub fn parse_instance(text: &str) -> Result<ProblemInstance, ParseError> {
    let mut header: Option<(u32, usize)> = None;
    let mut x: BTreeSet<Var> = BTreeSet::new();
    let mut y: BTreeSet<Var> = BTreeSet::new();
    let mut clauses: Vec<Clause> = Vec::new();
    let mut raw_clause_count = 0usize;
    let mut pending: Vec<Lit> = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            // Only `c max` and `c ind` carry meaning; other comments are skipped.
            let mut toks = rest.split_whitespace();
            match toks.next() {
                Some(kw @ ("max" | "ind")) => {
                    let num_vars = header.ok_or(ParseError::MissingHeader)?.0;
                    let target = if kw == "max" { &mut x } else { &mut y };
                    parse_declaration(toks, lineno, kw, num_vars, target)?;
                }
                _ => continue,
            }
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::DuplicateHeader(lineno));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(ParseError::MalformedHeader(lineno));
            }
            let num_vars: u32 = parts[2]
                .parse()
                .map_err(|_| ParseError::MalformedHeader(lineno))?;
            let num_clauses: usize = parts[3]
                .parse()
                .map_err(|_| ParseError::MalformedHeader(lineno))?;
            header = Some((num_vars, num_clauses));
            continue;
        }
        // Clause tokens; a clause may span lines and ends at 0.
        let (num_vars, _) = header.ok_or(ParseError::MissingHeader)?;
        for tok in line.split_whitespace() {
            let n: i64 = tok
                .parse()
                .map_err(|_| ParseError::UnexpectedToken(lineno, tok.to_string()))?;
            if n == 0 {
                raw_clause_count += 1;
                let clause = Clause::new(std::mem::take(&mut pending));
                if !clause.is_tautology() {
                    clauses.push(clause);
                }
            } else {
                let var = n.unsigned_abs();
                if var < 1 || var > u64::from(num_vars) {
                    return Err(ParseError::VarOutOfRange {
                        line: lineno,
                        var,
                        num_vars,
                    });
                }
                pending.push(Lit::from_dimacs(n));
            }
        }
    }

    let (num_vars, declared) = header.ok_or(ParseError::MissingHeader)?;
    if !pending.is_empty() {
        return Err(ParseError::UnterminatedClause);
    }
    if raw_clause_count != declared {
        return Err(ParseError::ClauseCountMismatch {
            declared,
            found: raw_clause_count,
        });
    }
    if let Some(&v) = x.intersection(&y).next() {
        return Err(ParseError::OverlappingDeclarations(v));
    }
    let partition = VarPartition::with_implicit_z(x, y, num_vars);
    // Clause literals were range-checked and the partition is total by
    // construction, so structural validation cannot fail here.
    Ok(ProblemInstance::new(num_vars, clauses, partition).expect("parsed instance is valid"))
}

fn parse_declaration<'a>(
    toks: impl Iterator<Item = &'a str>,
    lineno: usize,
    kw: &str,
    num_vars: u32,
    target: &mut BTreeSet<Var>,
) -> Result<(), ParseError> {
    let mut terminated = false;
    for tok in toks {
        if terminated {
            return Err(ParseError::MalformedDeclaration(lineno, kw.to_string()));
        }
        let n: u64 = tok
            .parse()
            .map_err(|_| ParseError::MalformedDeclaration(lineno, kw.to_string()))?;
        if n == 0 {
            terminated = true;
        } else if n > u64::from(num_vars) {
            return Err(ParseError::VarOutOfRange {
                line: lineno,
                var: n,
                num_vars,
            });
        } else {
            target.insert(n as Var);
        }
    }
    if !terminated {
        return Err(ParseError::MalformedDeclaration(lineno, kw.to_string()));
    }
    Ok(())
}

/// Write an instance back in the extended DIMACS format.
///
/// The output reparses to an identical instance.
pub fn serialize_instance(inst: &ProblemInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", inst.num_vars(), inst.clauses().len());
    if !inst.x_vars().is_empty() {
        let _ = write!(out, "c max");
        for v in inst.x_vars() {
            let _ = write!(out, " {v}");
        }
        let _ = writeln!(out, " 0");
    }
    if !inst.y_vars().is_empty() {
        let _ = write!(out, "c ind");
        for v in inst.y_vars() {
            let _ = write!(out, " {v}");
        }
        let _ = writeln!(out, " 0");
    }
    for c in inst.clauses() {
        for l in c.lits() {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        let _ = writeln!(out, "0");
    }
    out
}
