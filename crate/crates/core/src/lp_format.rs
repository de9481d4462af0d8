//! Plain-text interchange format for the optimization programs.
//!
//! The format is line-oriented and easy to feed to external solvers for
//! cross-checking: an objective section, one constraint row per line,
//! variable bounds and the list of integer-constrained variables. Variables
//! are named `x0..xN` in program order. Floats are printed with Rust's
//! shortest round-trip representation, so write/parse is lossless.
//!
//! ```text
//! \ comment
//! maximize
//! obj: +1 x0
//! subject_to
//! r0: +1 x1 -2.5 x2 <= 0
//! bounds
//! 0 <= x1 <= 50
//! integers
//! x1
//! end
//! ```

use crate::formulation::{LinRow, LinearProgram, MilpProblem, RowSense};

#[derive(Debug, thiserror::Error)]
pub enum LpFormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unexpected end of input (missing `end`)")]
    Truncated,
}

fn fmt_term(coef: f64, var: usize, out: &mut String) {
    if coef >= 0.0 {
        out.push('+');
    }
    out.push_str(&format!("{coef} x{var} "));
}

/// Serialize a program (with integrality marks) to the interchange format.
pub fn write_program(lp: &LinearProgram, integer: &[bool]) -> String {
    let mut out = String::new();
    out.push_str("\\ mpcqkd linear program, format v1\n");
    out.push_str("maximize\n");
    out.push_str("obj:");
    for (j, &c) in lp.objective.iter().enumerate() {
        if c != 0.0 {
            out.push(' ');
            let mut term = String::new();
            fmt_term(c, j, &mut term);
            out.push_str(term.trim_end());
        }
    }
    out.push('\n');
    out.push_str("subject_to\n");
    for (ri, row) in lp.rows.iter().enumerate() {
        out.push_str(&format!("r{ri}:"));
        for &(j, c) in &row.coeffs {
            out.push(' ');
            let mut term = String::new();
            fmt_term(c, j, &mut term);
            out.push_str(term.trim_end());
        }
        let op = match row.sense {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        };
        out.push_str(&format!(" {op} {}\n", row.rhs));
    }
    out.push_str("bounds\n");
    for j in 0..lp.n_vars() {
        let hi = if lp.upper[j].is_infinite() {
            "inf".to_string()
        } else {
            format!("{}", lp.upper[j])
        };
        out.push_str(&format!("{} <= x{j} <= {hi}\n", lp.lower[j]));
    }
    out.push_str("integers\n");
    let ints: Vec<String> = integer
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(j, _)| format!("x{j}"))
        .collect();
    if !ints.is_empty() {
        out.push_str(&ints.join(" "));
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

impl MilpProblem {
    /// Export this program in the interchange format.
    pub fn to_interchange(&self) -> String {
        write_program(&self.lp, &self.integer)
    }
}

fn parse_var(tok: &str, line: usize) -> Result<usize, LpFormatError> {
    tok.strip_prefix('x')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| LpFormatError::Syntax {
            line,
            message: format!("expected variable name, got `{tok}`"),
        })
}

fn parse_num(tok: &str, line: usize) -> Result<f64, LpFormatError> {
    if tok == "inf" {
        return Ok(f64::INFINITY);
    }
    tok.parse().map_err(|_| LpFormatError::Syntax {
        line,
        message: format!("expected number, got `{tok}`"),
    })
}

/// Parse terms of the form `<coef> x<idx>` until an optional relational
/// operator; returns the terms and the index where parsing stopped.
fn parse_terms(
    toks: &[&str],
    line: usize,
) -> Result<(Vec<(usize, f64)>, usize), LpFormatError> {
    let mut terms = Vec::new();
    let mut i = 0;
    while i < toks.len() && !matches!(toks[i], "<=" | ">=" | "=") {
        if i + 1 >= toks.len() {
            return Err(LpFormatError::Syntax {
                line,
                message: "dangling coefficient".into(),
            });
        }
        let coef = parse_num(toks[i], line)?;
        let var = parse_var(toks[i + 1], line)?;
        terms.push((var, coef));
        i += 2;
    }
    Ok((terms, i))
}

/// Parse the interchange format back into a program.
pub fn parse_program(text: &str) -> Result<(LinearProgram, Vec<bool>), LpFormatError> {
    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Objective,
        Rows,
        Bounds,
        Integers,
        Done,
    }
    let mut section = Section::Preamble;
    let mut objective: Vec<(usize, f64)> = Vec::new();
    let mut rows: Vec<LinRow> = Vec::new();
    let mut bounds: Vec<(usize, f64, f64)> = Vec::new();
    let mut integers: Vec<usize> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('\\') {
            continue;
        }
        match trimmed {
            "maximize" => {
                section = Section::Objective;
                continue;
            }
            "subject_to" => {
                section = Section::Rows;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "integers" => {
                section = Section::Integers;
                continue;
            }
            "end" => {
                section = Section::Done;
                break;
            }
            _ => {}
        }
        match section {
            Section::Objective => {
                let rest = trimmed.strip_prefix("obj:").ok_or(LpFormatError::Syntax {
                    line,
                    message: "objective line must start with `obj:`".into(),
                })?;
                let toks: Vec<&str> = rest.split_whitespace().collect();
                let (terms, used) = parse_terms(&toks, line)?;
                if used != toks.len() {
                    return Err(LpFormatError::Syntax {
                        line,
                        message: "unexpected operator in objective".into(),
                    });
                }
                objective = terms;
            }
            Section::Rows => {
                let colon = trimmed.find(':').ok_or(LpFormatError::Syntax {
                    line,
                    message: "row line must be `name: terms op rhs`".into(),
                })?;
                let toks: Vec<&str> = trimmed[colon + 1..].split_whitespace().collect();
                let (coeffs, i) = parse_terms(&toks, line)?;
                if i + 2 != toks.len() {
                    return Err(LpFormatError::Syntax {
                        line,
                        message: "row must end with `op rhs`".into(),
                    });
                }
                let sense = match toks[i] {
                    "<=" => RowSense::Le,
                    ">=" => RowSense::Ge,
                    "=" => RowSense::Eq,
                    other => {
                        return Err(LpFormatError::Syntax {
                            line,
                            message: format!("unknown operator `{other}`"),
                        })
                    }
                };
                let rhs = parse_num(toks[i + 1], line)?;
                rows.push(LinRow { coeffs, sense, rhs });
            }
            Section::Bounds => {
                let toks: Vec<&str> = trimmed.split_whitespace().collect();
                if toks.len() != 5 || toks[1] != "<=" || toks[3] != "<=" {
                    return Err(LpFormatError::Syntax {
                        line,
                        message: "bound must be `lo <= x <= hi`".into(),
                    });
                }
                let lo = parse_num(toks[0], line)?;
                let var = parse_var(toks[2], line)?;
                let hi = parse_num(toks[4], line)?;
                bounds.push((var, lo, hi));
            }
            Section::Integers => {
                for tok in trimmed.split_whitespace() {
                    integers.push(parse_var(tok, line)?);
                }
            }
            Section::Preamble | Section::Done => {
                return Err(LpFormatError::Syntax {
                    line,
                    message: format!("unexpected content `{trimmed}`"),
                })
            }
        }
    }
    if section != Section::Done {
        return Err(LpFormatError::Truncated);
    }

    let n_vars = bounds
        .iter()
        .map(|&(v, _, _)| v + 1)
        .chain(rows.iter().flat_map(|r| r.coeffs.iter().map(|&(v, _)| v + 1)))
        .chain(objective.iter().map(|&(v, _)| v + 1))
        .max()
        .unwrap_or(0);
    let mut lp = LinearProgram {
        objective: vec![0.0; n_vars],
        lower: vec![0.0; n_vars],
        upper: vec![f64::INFINITY; n_vars],
        rows,
    };
    for (v, c) in objective {
        lp.objective[v] = c;
    }
    for (v, lo, hi) in bounds {
        lp.lower[v] = lo;
        lp.upper[v] = hi;
    }
    let mut integer = vec![false; n_vars];
    for v in integers {
        integer[v] = true;
    }
    Ok((lp, integer))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_lp() -> (LinearProgram, Vec<bool>) {
        let lp = LinearProgram {
            objective: vec![1.0, 0.0, -0.25],
            lower: vec![0.0, 0.0, 1.5],
            upper: vec![f64::INFINITY, 50.0, 3.0],
            rows: vec![
                LinRow {
                    coeffs: vec![(0, 1.0), (1, -2.5)],
                    sense: RowSense::Le,
                    rhs: 0.0,
                },
                LinRow {
                    coeffs: vec![(1, 1.0), (2, 1.0)],
                    sense: RowSense::Eq,
                    rhs: 4.0,
                },
            ],
        };
        (lp, vec![false, true, false])
    }

    #[test]
    fn roundtrip_preserves_program_exactly() {
        let (lp, ints) = sample_lp();
        let text = write_program(&lp, &ints);
        let (lp2, ints2) = parse_program(&text).unwrap();
        assert_eq!(lp2.objective, lp.objective);
        assert_eq!(lp2.lower, lp.lower);
        assert_eq!(lp2.upper, lp.upper);
        assert_eq!(ints2, ints);
        assert_eq!(lp2.rows.len(), lp.rows.len());
        for (a, b) in lp.rows.iter().zip(&lp2.rows) {
            assert_eq!(a.coeffs, b.coeffs);
            assert_eq!(a.sense, b.sense);
            assert_eq!(a.rhs, b.rhs);
        }
        // And the canonical text itself is a fixed point.
        assert_eq!(write_program(&lp2, &ints2), text);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = parse_program("maximize\nobj: +1 x0\nsubject_to\nr0: wat\nend\n").unwrap_err();
        match err {
            LpFormatError::Syntax { line, .. } => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_end_is_truncated() {
        assert!(matches!(
            parse_program("maximize\nobj: +1 x0\n"),
            Err(LpFormatError::Truncated)
        ));
    }
}
