//! Text format for Lie model definitions: generator names, the nonzero
//! `de^k` tables as signed index pairs, the symplectic form, and optional
//! named constants.
//!
//! ```text
//! # comment
//! model solv_custom
//! const lambda = 0.96242365011920694
//! generators e1 e2 e3 e4 e5 e6
//! d e1 = - lambda e1^e5
//! d e2 = + lambda e2^e5
//! d e3 = - lambda e3^e6
//! d e4 = + lambda e4^e6
//! omega = e1^e2 + e3^e4 + e5^e6
//! ```
//!
//! An optional `convention bracket_sign +1|-1` line flips the sign relating
//! the differential table to the structure constants (default `-1`,
//! i.e. `(de^k)(e_i,e_j) = −c^k{}_{ij}`).

use std::collections::BTreeMap;

use crate::forms6::{KForm, DIM};

use super::{LieModel, LieModelError};

fn err(line: usize, msg: impl Into<String>) -> LieModelError {
    LieModelError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses a model definition document. Validation (Jacobi, `dω = 0`,
/// nondegeneracy) runs on the assembled model; failures carry line 0.
pub fn parse_model(text: &str) -> Result<LieModel, LieModelError> {
    let mut name = String::from("custom");
    let mut consts: BTreeMap<String, f64> = BTreeMap::new();
    let mut generators: Vec<String> = (1..=DIM).map(|i| format!("e{i}")).collect();
    let mut dgen: [KForm; DIM] = std::array::from_fn(|_| KForm::zero(2));
    let mut dgen_seen = [false; DIM];
    let mut omega: Option<KForm> = None;
    let mut bracket_sign = -1.0f64;

    for (ln0, raw) in text.lines().enumerate() {
        let ln = ln0 + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "model" => {
                if tokens.len() != 2 {
                    return Err(err(ln, "expected: model <name>"));
                }
                name = tokens[1].to_string();
            }
            "const" => {
                // const <name> = <float>
                if tokens.len() != 4 || tokens[2] != "=" {
                    return Err(err(ln, "expected: const <name> = <value>"));
                }
                let v: f64 = tokens[3]
                    .parse()
                    .map_err(|_| err(ln, format!("bad numeric literal `{}`", tokens[3])))?;
                consts.insert(tokens[1].to_string(), v);
            }
            "generators" => {
                if tokens.len() != DIM + 1 {
                    return Err(err(ln, "expected six generator names"));
                }
                generators = tokens[1..].iter().map(|s| s.to_string()).collect();
            }
            "convention" => {
                if tokens.len() != 3 || tokens[1] != "bracket_sign" {
                    return Err(err(ln, "expected: convention bracket_sign +1|-1"));
                }
                bracket_sign = match tokens[2] {
                    "+1" | "1" => 1.0,
                    "-1" => -1.0,
                    other => return Err(err(ln, format!("bad bracket sign `{other}`"))),
                };
            }
            "d" => {
                // d <gen> = <terms>
                if tokens.len() < 4 || tokens[2] != "=" {
                    return Err(err(ln, "expected: d <generator> = <terms>"));
                }
                let k = gen_index(tokens[1], &generators)
                    .ok_or_else(|| err(ln, format!("unknown generator `{}`", tokens[1])))?;
                if dgen_seen[k] {
                    return Err(err(ln, format!("duplicate d-table for `{}`", tokens[1])));
                }
                dgen_seen[k] = true;
                dgen[k] = parse_two_form(&tokens[3..], &generators, &consts, ln)?;
            }
            "omega" => {
                if tokens.len() < 3 || tokens[1] != "=" {
                    return Err(err(ln, "expected: omega = <terms>"));
                }
                if omega.is_some() {
                    return Err(err(ln, "duplicate omega line"));
                }
                omega = Some(parse_two_form(&tokens[2..], &generators, &consts, ln)?);
            }
            other => return Err(err(ln, format!("unknown directive `{other}`"))),
        }
    }
    let omega = omega.ok_or_else(|| err(0, "missing omega line"))?;
    LieModel::from_differentials_with_convention(&name, dgen, &omega, bracket_sign)
}

fn gen_index(tok: &str, generators: &[String]) -> Option<usize> {
    generators.iter().position(|g| g == tok)
}

/// Parses `[±] [factor…] gᵢ^gⱼ (± [factor…] gᵢ^gⱼ)*` into a 2-form.
fn parse_two_form(
    tokens: &[&str],
    generators: &[String],
    consts: &BTreeMap<String, f64>,
    ln: usize,
) -> Result<KForm, LieModelError> {
    let mut out = KForm::zero(2);
    let mut sign = 1.0f64;
    let mut coeff: Option<f64> = None;
    for &tok in tokens {
        let (tok, tok_sign) = match tok {
            "+" => {
                sign *= 1.0;
                continue;
            }
            "-" => {
                sign *= -1.0;
                continue;
            }
            t if t.len() > 1 && (t.starts_with('+') || t.starts_with('-')) && !is_number(t) => {
                (&t[1..], if t.starts_with('-') { -1.0 } else { 1.0 })
            }
            t => (t, 1.0),
        };
        sign *= tok_sign;
        if let Some((a, b)) = tok.split_once('^') {
            let i = gen_index(a, generators)
                .ok_or_else(|| err(ln, format!("unknown generator `{a}`")))?;
            let j = gen_index(b, generators)
                .ok_or_else(|| err(ln, format!("unknown generator `{b}`")))?;
            if i == j {
                return Err(err(ln, format!("repeated generator in pair `{tok}`")));
            }
            let c = sign * coeff.unwrap_or(1.0);
            let mut term = KForm::zero(2);
            let (lo, hi, s) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
            term.set_coeff(&[lo + 1, hi + 1], s * c);
            out = out.add(&term);
            sign = 1.0;
            coeff = None;
        } else if let Ok(v) = tok.parse::<f64>() {
            coeff = Some(coeff.unwrap_or(1.0) * v);
        } else if let Some(&v) = consts.get(tok) {
            coeff = Some(coeff.unwrap_or(1.0) * v);
        } else {
            return Err(err(ln, format!("unrecognized token `{tok}`")));
        }
    }
    if coeff.is_some() {
        return Err(err(ln, "dangling coefficient without a generator pair"));
    }
    Ok(out)
}

fn is_number(t: &str) -> bool {
    t.parse::<f64>().is_ok()
}

impl LieModel {
    /// Echo of the model in the normalized text form.
    pub fn normalized_text(&self) -> String {
        let mut s = format!("model {}\n", self.name());
        for k in 0..DIM {
            let dk = self.d_generator(k);
            if dk.norm_inf() == 0.0 {
                continue;
            }
            s.push_str(&format!("d e{} ={}\n", k + 1, two_form_text(dk)));
        }
        s.push_str(&format!("omega ={}\n", two_form_text(self.omega().form())));
        s
    }
}

fn two_form_text(f: &KForm) -> String {
    let mut s = String::new();
    for (idx, c) in f.terms() {
        if c == 0.0 {
            continue;
        }
        let sign = if c < 0.0 { " - " } else { " + " };
        s.push_str(sign);
        if (c.abs() - 1.0).abs() > 0.0 {
            s.push_str(&format!("{:.17e} ", c.abs()));
        }
        s.push_str(&format!("e{}^e{}", idx[0], idx[1]));
    }
    if s.is_empty() {
        s = " 0".into();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_solv_model() {
        let text = format!(
            "# solvable model\n\
             model solv\n\
             const lambda = {:.17}\n\
             d e1 = - lambda e1^e5\n\
             d e2 = + lambda e2^e5\n\
             d e3 = - lambda e3^e6\n\
             d e4 = lambda e4^e6\n\
             omega = e1^e2 + e3^e4 + e5^e6\n",
            LieModel::solv_lambda()
        );
        let m = parse_model(&text).unwrap();
        let builtin = LieModel::solv();
        for k in 0..DIM {
            assert!(m.d_generator(k).max_abs_diff(builtin.d_generator(k)) < 1e-15);
        }
        assert_eq!(m.name(), "solv");
        // echo round-trips
        let echoed = parse_model(&m.normalized_text()).unwrap();
        for k in 0..DIM {
            assert!(echoed.d_generator(k).max_abs_diff(m.d_generator(k)) < 1e-15);
        }
    }

    #[test]
    fn parses_nil_with_defaults() {
        let text = "d e4 = e1^e5\nd e6 = e1^e3\nomega = e1^e2 + e3^e4 + e5^e6\n";
        let m = parse_model(text).unwrap();
        let builtin = LieModel::nil();
        for k in 0..DIM {
            assert!(m.d_generator(k).max_abs_diff(builtin.d_generator(k)) < 1e-15);
        }
    }

    #[test]
    fn parses_custom_generator_names() {
        let text = "generators f1 f2 f3 f4 f5 f6\n\
                    d f4 = f1^f5\n\
                    d f6 = f1^f3\n\
                    omega = f1^f2 + f3^f4 + f5^f6\n";
        let m = parse_model(text).unwrap();
        let builtin = LieModel::nil();
        for k in 0..DIM {
            assert!(m.d_generator(k).max_abs_diff(builtin.d_generator(k)) < 1e-15);
        }
        // old names are no longer recognized
        let bad = "generators f1 f2 f3 f4 f5 f6\nd e4 = f1^f5\nomega = f1^f2 + f3^f4 + f5^f6\n";
        assert!(matches!(
            parse_model(bad),
            Err(LieModelError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn reports_line_numbers_on_errors() {
        let text = "model x\nd e4 = e1^e9\nomega = e1^e2 + e3^e4 + e5^e6\n";
        match parse_model(text) {
            Err(LieModelError::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("e9"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let text2 = "omega = e1^e2\n"; // degenerate omega
        assert!(parse_model(text2).is_err());
        let text3 = "d e1 = e2^e3 frob\nomega = e1^e2 + e3^e4 + e5^e6\n";
        match parse_model(text3) {
            Err(LieModelError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_closed_omega() {
        // omega containing e1^e5 is not closed on the nil model? d(e^{15}) = 0
        // there; use a pair whose differential survives: on nil d(e^{34}) =
        // e^{135}, so omega with an e3^e4 term stays closed; instead make up
        // a model where dω ≠ 0: d e2 = e1^e3 with omega containing e2^e4
        let text = "d e2 = e1^e3\nomega = e2^e4 + e1^e3 + e5^e6\n";
        let r = parse_model(text);
        assert!(matches!(r, Err(LieModelError::OmegaNotClosed(_))), "{r:?}");
    }
}
