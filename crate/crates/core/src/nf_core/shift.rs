use super::moments::GaussianMomentSpec;
use super::polynomial::Monomial;
use super::MultiPolynomial;
use crate::error::{Error, Result};

/// One of the three quadratic averaged shift operators whose product is the
/// Gaussian averaged shift operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftKind {
    /// `exp(1/2 C_{X0X0} d^2/dnu^2)`
    X0X0,
    /// `exp(sum_j w_j C_{X0 Xi}(s_j) d/dnu d/du_j)`
    X0Xi,
    /// `exp(1/2 sum_{ij} w_i w_j C_{Xi Xi}(s_i, s_j) d^2/du_i du_j)`
    XiXi,
}

impl ShiftKind {
    pub const ALL: [ShiftKind; 3] = [ShiftKind::X0X0, ShiftKind::X0Xi, ShiftKind::XiXi];

    /// All six application orders.
    pub fn permutations() -> [[ShiftKind; 3]; 6] {
        use ShiftKind::*;
        [
            [X0X0, X0Xi, XiXi],
            [X0X0, XiXi, X0Xi],
            [X0Xi, X0X0, XiXi],
            [X0Xi, XiXi, X0X0],
            [XiXi, X0X0, X0Xi],
            [XiXi, X0Xi, X0X0],
        ]
    }
}

/// `(a, b, c)` triples of the second-order operator `sum c d_a d_b`, `a <= b`.
fn generator_pairs(kind: ShiftKind, spec: &GaussianMomentSpec) -> Vec<(usize, usize, f64)> {
    let layout = spec.layout();
    let initial = layout.initial_vars();
    let excitation = layout.excitation_vars();
    let mut pairs = Vec::new();
    let mut push = |a: usize, b: usize, c: f64| {
        if c != 0.0 {
            pairs.push((a, b, c));
        }
    };
    match kind {
        ShiftKind::X0X0 => {
            for a in initial.clone() {
                push(a, a, 0.5 * spec.cov(a, a));
                for b in a + 1..initial.end {
                    push(a, b, spec.cov(a, b));
                }
            }
        }
        ShiftKind::X0Xi => {
            for a in initial {
                for j in excitation.clone() {
                    push(a, j, spec.weight(j) * spec.cov(a, j));
                }
            }
        }
        ShiftKind::XiXi => {
            for i in excitation.clone() {
                let wi = spec.weight(i);
                push(i, i, 0.5 * wi * wi * spec.cov(i, i));
                for j in i + 1..excitation.end {
                    push(i, j, wi * spec.weight(j) * spec.cov(i, j));
                }
            }
        }
    }
    pairs
}

fn apply_pairs(p: &MultiPolynomial, pairs: &[(usize, usize, f64)]) -> MultiPolynomial {
    let mut out = MultiPolynomial::zero(p.layout());
    for (m, c) in p.terms() {
        let e = m.exponents();
        for &(a, b, w) in pairs {
            let factor = if a == b {
                if e[a] < 2 {
                    continue;
                }
                (e[a] as f64) * (e[a] - 1) as f64
            } else {
                if e[a] == 0 || e[b] == 0 {
                    continue;
                }
                (e[a] as f64) * (e[b] as f64)
            };
            let mut d = e.to_vec();
            d[a] -= 1;
            d[b] -= 1;
            out.add_term(Monomial::new(d), c * w * factor);
        }
    }
    out
}

fn check_layout(p: &MultiPolynomial, spec: &GaussianMomentSpec) -> Result<()> {
    if p.layout() != spec.layout() {
        return Err(Error::DimensionMismatch {
            expected: spec.layout().n_vars(),
            found: p.n_vars(),
        });
    }
    Ok(())
}

/// The second-order differential operator inside the exponential of `kind`.
pub fn apply_generator(
    p: &MultiPolynomial,
    kind: ShiftKind,
    spec: &GaussianMomentSpec,
) -> Result<MultiPolynomial> {
    check_layout(p, spec)?;
    Ok(apply_pairs(p, &generator_pairs(kind, spec)))
}

/// `exp(A) p = sum_k A^k p / k!`; each power of `A` lowers the degree by two,
/// so on polynomials the series stops after `degree/2 + 1` terms.
pub fn apply_quadratic_shift(
    p: &MultiPolynomial,
    kind: ShiftKind,
    spec: &GaussianMomentSpec,
) -> Result<MultiPolynomial> {
    check_layout(p, spec)?;
    let pairs = generator_pairs(kind, spec);
    let mut result = p.clone();
    let mut term = p.clone();
    let mut k = 1.0;
    loop {
        term = apply_pairs(&term, &pairs).scaled(1.0 / k);
        if term.is_zero() {
            return Ok(result);
        }
        result = result.checked_add(&term)?;
        k += 1.0;
    }
}

/// Applies the operators in the given order (first element first).
pub fn apply_averaged_shift(
    p: &MultiPolynomial,
    order: &[ShiftKind],
    spec: &GaussianMomentSpec,
) -> Result<MultiPolynomial> {
    order.iter().try_fold(p.clone(), |acc, &kind| {
        apply_quadratic_shift(&acc, kind, spec)
    })
}

/// Gaussian expectation by differentiation: apply the averaged shift operator
/// and evaluate at the mean.
pub fn averaged_shift_expectation(p: &MultiPolynomial, spec: &GaussianMomentSpec) -> Result<f64> {
    check_layout(p, spec)?;
    spec.check_degree(p.degree())?;
    let shifted = apply_averaged_shift(
        p,
        &[ShiftKind::X0X0, ShiftKind::X0Xi, ShiftKind::XiXi],
        spec,
    )?;
    shifted.eval(spec.mean())
}
