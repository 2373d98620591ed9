use super::moments::GaussianMomentSpec;
use super::shift::{apply_averaged_shift, apply_quadratic_shift, ShiftKind};
use super::MultiPolynomial;
use crate::error::Result;

/// Coefficient max-norm residuals of the operator identities, each maximised
/// over operators, variables and grid times.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LemmaReport {
    /// `T(a p + b q) - a T p - b T q`
    pub linearity: f64,
    /// `d_v T p - T d_v p`
    pub derivative_commutation: f64,
    /// Spread over the six application orders of the three operators.
    pub ordering: f64,
    /// `T_{X0X0}(u_t p) - u_t T_{X0X0} p`
    pub initial_split: f64,
    /// `T_{X0Xi}(u_t p) - u_t T_{X0Xi} p - w_t C_{X0 Xi}(t) T_{X0Xi} dp/dnu`
    pub cross_split: f64,
    /// `T_{XiXi}(u_t p) - u_t T_{XiXi} p - sum_j w_t w_j C(t, s_j) T_{XiXi} dp/du_j`
    pub excitation_split: f64,
    /// The same split for the full product of the three operators.
    pub combined_split: f64,
    /// `d_j(u_t p) - u_t d_j p - [t = j] p`
    pub product_rule: f64,
}

impl LemmaReport {
    pub fn max(&self) -> f64 {
        [
            self.linearity,
            self.derivative_commutation,
            self.ordering,
            self.initial_split,
            self.cross_split,
            self.excitation_split,
            self.combined_split,
            self.product_rule,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn entries(&self) -> [(&'static str, f64); 8] {
        [
            ("linearity", self.linearity),
            ("derivative_commutation", self.derivative_commutation),
            ("ordering", self.ordering),
            ("initial_split", self.initial_split),
            ("cross_split", self.cross_split),
            ("excitation_split", self.excitation_split),
            ("combined_split", self.combined_split),
            ("product_rule", self.product_rule),
        ]
    }
}

const LIN_A: f64 = 0.7;
const LIN_B: f64 = -1.3;

/// Checks linearity, commutation with derivatives, mutual commutation, the
/// action on `u_t p` of each operator and the product rule, all on `p`.
pub fn lemma_residuals(p: &MultiPolynomial, spec: &GaussianMomentSpec) -> Result<LemmaReport> {
    let layout = p.layout();
    let mut r = LemmaReport::default();

    // Companion polynomial for the linearity check.
    let mut q = MultiPolynomial::constant(layout, 1.0);
    for v in 0..layout.n_vars() {
        q = q.checked_add(&p.partial(v)?)?;
    }

    let mut shifted = Vec::with_capacity(3);
    for kind in ShiftKind::ALL {
        let tp = apply_quadratic_shift(p, kind, spec)?;
        let tq = apply_quadratic_shift(&q, kind, spec)?;
        let combo = p.scaled(LIN_A).checked_add(&q.scaled(LIN_B))?;
        let lhs = apply_quadratic_shift(&combo, kind, spec)?;
        let rhs = tp.scaled(LIN_A).checked_add(&tq.scaled(LIN_B))?;
        r.linearity = r.linearity.max(lhs.max_coefficient_diff(&rhs));
        for v in 0..layout.n_vars() {
            let a = tp.partial(v)?;
            let b = apply_quadratic_shift(&p.partial(v)?, kind, spec)?;
            r.derivative_commutation = r.derivative_commutation.max(a.max_coefficient_diff(&b));
        }
        shifted.push(tp);
    }

    let orders = ShiftKind::permutations();
    let reference = apply_averaged_shift(p, &orders[0], spec)?;
    for order in &orders[1..] {
        let other = apply_averaged_shift(p, order, spec)?;
        r.ordering = r.ordering.max(reference.max_coefficient_diff(&other));
    }

    let full = [ShiftKind::X0X0, ShiftKind::X0Xi, ShiftKind::XiXi];
    for t in layout.excitation_vars() {
        let u_t = MultiPolynomial::variable(layout, t)?;
        let utp = u_t.checked_mul(p)?;
        let w_t = spec.weight(t);

        // X0X0 ignores u_t entirely.
        let lhs = apply_quadratic_shift(&utp, ShiftKind::X0X0, spec)?;
        let rhs = u_t.checked_mul(&shifted[0])?;
        r.initial_split = r.initial_split.max(lhs.max_coefficient_diff(&rhs));

        let lhs = apply_quadratic_shift(&utp, ShiftKind::X0Xi, spec)?;
        let mut rhs = u_t.checked_mul(&shifted[1])?;
        for a in layout.initial_vars() {
            let c = w_t * spec.cov(a, t);
            let d = apply_quadratic_shift(&p.partial(a)?, ShiftKind::X0Xi, spec)?;
            rhs = rhs.checked_add(&d.scaled(c))?;
        }
        r.cross_split = r.cross_split.max(lhs.max_coefficient_diff(&rhs));

        let lhs = apply_quadratic_shift(&utp, ShiftKind::XiXi, spec)?;
        let mut rhs = u_t.checked_mul(&shifted[2])?;
        for j in layout.excitation_vars() {
            let c = w_t * spec.weight(j) * spec.cov(t, j);
            let d = apply_quadratic_shift(&p.partial(j)?, ShiftKind::XiXi, spec)?;
            rhs = rhs.checked_add(&d.scaled(c))?;
        }
        r.excitation_split = r.excitation_split.max(lhs.max_coefficient_diff(&rhs));

        let lhs = apply_averaged_shift(&utp, &full, spec)?;
        let mut rhs = u_t.checked_mul(&apply_averaged_shift(p, &full, spec)?)?;
        for a in 0..layout.n_vars() {
            let c = if a < layout.n_initial {
                w_t * spec.cov(a, t)
            } else {
                w_t * spec.weight(a) * spec.cov(t, a)
            };
            let d = apply_averaged_shift(&p.partial(a)?, &full, spec)?;
            rhs = rhs.checked_add(&d.scaled(c))?;
        }
        r.combined_split = r.combined_split.max(lhs.max_coefficient_diff(&rhs));

        for j in 0..layout.n_vars() {
            let lhs = utp.partial(j)?;
            let mut rhs = u_t.checked_mul(&p.partial(j)?)?;
            if j == t {
                rhs = rhs.checked_add(p)?;
            }
            r.product_rule = r.product_rule.max(lhs.max_coefficient_diff(&rhs));
        }
    }
    Ok(r)
}
