use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

/// Variable layout of a polynomial functional.
///
/// Variables `0..n_initial` are the initial-value arguments `nu` (one per
/// component of the initial vector). They are followed by the excitation
/// arguments `u` at every grid time, component-major: variable
/// `n_initial + k * n_times + n` is component `k` at time index `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarLayout {
    pub n_initial: usize,
    pub n_components: usize,
    pub n_times: usize,
}

/// What a variable index stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    Initial(usize),
    Excitation { component: usize, time: usize },
}

impl VarLayout {
    /// Scalar initial value and scalar excitation on `n_times` grid points.
    pub fn scalar(n_times: usize) -> Self {
        VarLayout {
            n_initial: 1,
            n_components: 1,
            n_times,
        }
    }

    pub fn vector(n_initial: usize, n_components: usize, n_times: usize) -> Self {
        VarLayout {
            n_initial,
            n_components,
            n_times,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_initial + self.n_components * self.n_times
    }

    pub fn is_scalar(&self) -> bool {
        self.n_initial == 1 && self.n_components == 1
    }

    pub fn initial_vars(&self) -> Range<usize> {
        0..self.n_initial
    }

    pub fn excitation_vars(&self) -> Range<usize> {
        self.n_initial..self.n_vars()
    }

    pub fn excitation(&self, component: usize, time: usize) -> usize {
        self.n_initial + component * self.n_times + time
    }

    pub fn variable(&self, index: usize) -> Variable {
        if index < self.n_initial {
            Variable::Initial(index)
        } else {
            let r = index - self.n_initial;
            Variable::Excitation {
                component: r / self.n_times,
                time: r % self.n_times,
            }
        }
    }

    /// Text name: `nu` / `nu<n>` for initial values, `u<n>` (scalar) or
    /// `u<k>_<n>` (vector) for the excitation; all indices 1-based.
    pub fn name(&self, index: usize) -> String {
        match self.variable(index) {
            Variable::Initial(0) if self.n_initial == 1 => "nu".to_string(),
            Variable::Initial(n) => format!("nu{}", n + 1),
            Variable::Excitation { time, .. } if self.n_components == 1 => {
                format!("u{}", time + 1)
            }
            Variable::Excitation { component, time } => format!("u{}_{}", component + 1, time + 1),
        }
    }
}

/// Exponent vector, ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u16>);

impl Monomial {
    pub fn new(exponents: Vec<u16>) -> Self {
        Monomial(exponents)
    }

    pub fn one(n_vars: usize) -> Self {
        Monomial(vec![0; n_vars])
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse real polynomial in the variables of a [`VarLayout`]; the
/// finite-dimensional stand-in for a function-functional `G[nu; u(.)]`.
///
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPolynomial {
    layout: VarLayout,
    terms: BTreeMap<Monomial, f64>,
}

impl MultiPolynomial {
    pub fn zero(layout: VarLayout) -> Self {
        MultiPolynomial {
            layout,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(layout: VarLayout, c: f64) -> Self {
        let mut p = Self::zero(layout);
        p.add_term(Monomial::one(layout.n_vars()), c);
        p
    }

    /// The polynomial `x_index`.
    pub fn variable(layout: VarLayout, index: usize) -> Result<Self> {
        check_index(&layout, index)?;
        let mut e = vec![0; layout.n_vars()];
        e[index] = 1;
        let mut p = Self::zero(layout);
        p.add_term(Monomial(e), 1.0);
        Ok(p)
    }

    pub fn monomial(layout: VarLayout, exponents: Vec<u16>, coefficient: f64) -> Result<Self> {
        Self::from_terms(layout, [(exponents, coefficient)])
    }

    pub fn from_terms(
        layout: VarLayout,
        terms: impl IntoIterator<Item = (Vec<u16>, f64)>,
    ) -> Result<Self> {
        let mut p = Self::zero(layout);
        for (e, c) in terms {
            if e.len() != layout.n_vars() {
                return Err(Error::DimensionMismatch {
                    expected: layout.n_vars(),
                    found: e.len(),
                });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    pub fn layout(&self) -> VarLayout {
        self.layout
    }

    pub fn n_vars(&self) -> usize {
        self.layout.n_vars()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coefficient(&self, exponents: &[u16]) -> f64 {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .copied()
            .unwrap_or(0.0)
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars(),
                found: other.n_vars(),
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self::zero(self.layout);
        for (m, c) in self.terms() {
            out.add_term(m.clone(), c * factor);
        }
        out
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = Self::zero(self.layout);
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                let e = ma.0.iter().zip(&mb.0).map(|(a, b)| a + b).collect();
                out.add_term(Monomial(e), ca * cb);
            }
        }
        Ok(out)
    }

    /// Partial derivative with respect to variable `index`: `d/dnu` for an
    /// initial variable, the discrete Volterra derivative for an excitation
    /// variable.
    pub fn partial(&self, index: usize) -> Result<Self> {
        check_index(&self.layout, index)?;
        let mut out = Self::zero(self.layout);
        for (m, c) in self.terms() {
            let e = m.0[index];
            if e == 0 {
                continue;
            }
            let mut d = m.0.clone();
            d[index] = e - 1;
            out.add_term(Monomial(d), c * e as f64);
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars(),
                found: point.len(),
            });
        }
        Ok(self
            .terms()
            .map(|(m, c)| {
                c * m
                    .0
                    .iter()
                    .zip(point)
                    .filter(|(e, _)| **e > 0)
                    .map(|(&e, x)| x.powi(e as i32))
                    .product::<f64>()
            })
            .sum())
    }

    /// Largest absolute coefficient of `self - other`.
    pub fn max_coefficient_diff(&self, other: &Self) -> f64 {
        let mut max = 0.0f64;
        for (m, c) in self.terms() {
            let d = c - other.terms.get(m).copied().unwrap_or(0.0);
            max = max.max(d.abs());
        }
        for (m, c) in other.terms() {
            if !self.terms.contains_key(m) {
                max = max.max(c.abs());
            }
        }
        max
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

fn check_index(layout: &VarLayout, index: usize) -> Result<()> {
    if index >= layout.n_vars() {
        return Err(Error::DimensionMismatch {
            expected: layout.n_vars(),
            found: index + 1,
        });
    }
    Ok(())
}

impl fmt::Display for MultiPolynomial {
    /// Writes the `coeff * v^e * ...` term syntax, highest graded-lex term first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            match (i, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            write!(f, "{mag:?}")?;
            for (v, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, " * {}", self.layout.name(v))?,
                    _ => write!(f, " * {}^{}", self.layout.name(v), e)?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lay() -> VarLayout {
        VarLayout::scalar(3)
    }

    #[test]
    fn partial_of_square() {
        let nu = MultiPolynomial::variable(lay(), 0).unwrap();
        let nu2 = nu.checked_mul(&nu).unwrap();
        assert_eq!(nu2.partial(0).unwrap(), nu.scaled(2.0));
    }

    #[test]
    fn mixed_partials_of_product() {
        let u1 = MultiPolynomial::variable(lay(), 1).unwrap();
        let u2 = MultiPolynomial::variable(lay(), 2).unwrap();
        let p = u1.checked_mul(&u2).unwrap();
        let d = p.partial(1).unwrap().partial(2).unwrap();
        assert_eq!(d, MultiPolynomial::constant(lay(), 1.0));
    }

    #[test]
    fn evaluation() {
        let p = MultiPolynomial::monomial(VarLayout::scalar(1), vec![1, 1], 1.0).unwrap();
        assert_eq!(p.eval(&[2.0, 3.0]).unwrap(), 6.0);
        assert!(matches!(
            p.eval(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn no_zero_coefficients_after_cancellation() {
        let u1 = MultiPolynomial::variable(lay(), 1).unwrap();
        let z = u1.checked_sub(&u1).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.degree(), 0);
    }

    #[test]
    fn layout_mismatch_is_an_error() {
        let a = MultiPolynomial::constant(VarLayout::scalar(2), 1.0);
        let b = MultiPolynomial::constant(VarLayout::scalar(3), 1.0);
        assert!(a.checked_add(&b).is_err());
        assert!(a.checked_mul(&b).is_err());
        assert!(a.partial(7).is_err());
    }

    #[test]
    fn graded_lex_order() {
        let low = Monomial::new(vec![0, 0, 5]);
        let high = Monomial::new(vec![1, 0, 5]);
        let same_degree = Monomial::new(vec![0, 1, 5]);
        assert!(low < high);
        assert!(same_degree < high);
    }

    #[test]
    fn variable_names() {
        let v = VarLayout::vector(2, 2, 3);
        assert_eq!(v.name(0), "nu1");
        assert_eq!(v.name(1), "nu2");
        assert_eq!(v.name(v.excitation(1, 2)), "u2_3");
        assert_eq!(VarLayout::scalar(2).name(0), "nu");
        assert_eq!(VarLayout::scalar(2).name(2), "u2");
    }
}
