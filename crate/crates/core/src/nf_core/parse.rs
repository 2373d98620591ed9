//! Plain-text polynomial syntax: `coeff * v^e * v^e ... + ...` with
//! variables `nu` / `nu<n>` and `u<n>` / `u<k>_<n>`, indices 1-based.

use super::polynomial::Monomial;
use super::{MultiPolynomial, VarLayout};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Star,
    Caret,
    Plus,
    Minus,
}

fn err(message: impl Into<String>) -> Error {
    Error::Parse {
        line: None,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v = s
                    .parse::<f64>()
                    .map_err(|_| err(format!("bad number `{s}`")))?;
                out.push(Token::Number(v));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

fn resolve(name: &str, layout: &VarLayout) -> Result<usize> {
    let unknown = || err(format!("unknown variable `{name}` for this layout"));
    let one_based = |s: &str| -> Result<usize> {
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n - 1),
            _ => Err(unknown()),
        }
    };
    if let Some(rest) = name.strip_prefix("nu") {
        let n = if rest.is_empty() { 0 } else { one_based(rest)? };
        return (n < layout.n_initial).then_some(n).ok_or_else(unknown);
    }
    if let Some(rest) = name.strip_prefix('u') {
        let (k, n) = match rest.split_once('_') {
            Some((k, n)) => (one_based(k)?, one_based(n)?),
            None if layout.n_components == 1 => (0, one_based(rest)?),
            None => return Err(unknown()),
        };
        if k < layout.n_components && n < layout.n_times {
            return Ok(layout.excitation(k, n));
        }
    }
    Err(unknown())
}

/// Parses the term syntax into a polynomial over `layout`.
pub fn parse_polynomial(text: &str, layout: VarLayout) -> Result<MultiPolynomial> {
    let tokens = tokenize(text)?;
    let mut p = MultiPolynomial::zero(layout);
    if tokens.is_empty() {
        return Err(err("empty polynomial"));
    }
    let mut pos = 0;
    let mut first = true;
    while pos < tokens.len() {
        let mut sign = 1.0;
        match tokens[pos] {
            Token::Plus => pos += 1,
            Token::Minus => {
                sign = -1.0;
                pos += 1;
            }
            _ if first => {}
            _ => return Err(err("expected `+` or `-` between terms")),
        }
        first = false;
        let mut coeff = sign;
        let mut exps = vec![0u16; layout.n_vars()];
        let mut expect_factor = true;
        while pos < tokens.len() {
            match (&tokens[pos], expect_factor) {
                (Token::Number(v), true) => {
                    coeff *= v;
                    pos += 1;
                    expect_factor = false;
                }
                (Token::Ident(name), true) => {
                    let var = resolve(name, &layout)?;
                    pos += 1;
                    let mut e = 1u16;
                    if pos < tokens.len() && tokens[pos] == Token::Caret {
                        match tokens.get(pos + 1) {
                            Some(Token::Number(v)) if v.fract() == 0.0 && *v >= 0.0 => {
                                e = *v as u16;
                                pos += 2;
                            }
                            _ => return Err(err("exponent must be a nonnegative integer")),
                        }
                    }
                    exps[var] += e;
                    expect_factor = false;
                }
                (Token::Star, false) => {
                    pos += 1;
                    expect_factor = true;
                }
                (Token::Plus | Token::Minus, false) => break,
                _ => return Err(err("malformed term")),
            }
        }
        if expect_factor {
            return Err(err("dangling operator"));
        }
        p.add_term(Monomial::new(exps), coeff);
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalar_terms() {
        let l = VarLayout::scalar(3);
        let p = parse_polynomial("2.5 * nu^2 * u1 - 3 * u2^3 + 1", l).unwrap();
        assert_eq!(p.coefficient(&[2, 1, 0, 0]), 2.5);
        assert_eq!(p.coefficient(&[0, 0, 3, 0]), -3.0);
        assert_eq!(p.coefficient(&[0, 0, 0, 0]), 1.0);
        assert_eq!(p.n_terms(), 3);
    }

    #[test]
    fn parses_vector_names_and_exponent_notation() {
        let l = VarLayout::vector(2, 2, 2);
        let p = parse_polynomial("-1e-3 * nu2 * u2_1^2 + u1_2", l).unwrap();
        let mut e = vec![0u16; l.n_vars()];
        e[1] = 1;
        e[l.excitation(1, 0)] = 2;
        assert_eq!(p.coefficient(&e), -1e-3);
    }

    #[test]
    fn display_round_trips() {
        let l = VarLayout::vector(1, 2, 3);
        let p = parse_polynomial("0.1 * nu * u1_3 - 2 * u2_2^4 + 7", l).unwrap();
        let q = parse_polynomial(&p.to_string(), l).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn rejects_garbage() {
        let l = VarLayout::scalar(2);
        assert!(parse_polynomial("u9", l).is_err());
        assert!(parse_polynomial("2 * * u1", l).is_err());
        assert!(parse_polynomial("u1 u2", l).is_err());
        assert!(parse_polynomial("", l).is_err());
        assert!(parse_polynomial("u1^x", l).is_err());
    }
}
