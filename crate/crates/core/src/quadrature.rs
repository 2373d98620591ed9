//! Composite trapezoid helpers on (possibly nonuniform) node sets.

/// Trapezoid weights for the nodes `points`. A single node gets weight 0.
pub fn trapezoid_weights(points: &[f64]) -> Vec<f64> {
    let n = points.len();
    let mut weights = vec![0.0; n];
    for i in 1..n {
        let half = 0.5 * (points[i] - points[i - 1]);
        weights[i - 1] += half;
        weights[i] += half;
    }
    weights
}

/// Composite trapezoid rule of `values` sampled at `points`.
pub fn trapezoid(points: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(points.len(), values.len());
    points
        .windows(2)
        .zip(values.windows(2))
        .map(|(p, v)| 0.5 * (p[1] - p[0]) * (v[0] + v[1]))
        .sum()
}

/// Running trapezoid integral, `out[k] = int_{points[0]}^{points[k]}`.
pub fn cumulative_trapezoid(points: &[f64], values: &[f64]) -> Vec<f64> {
    debug_assert_eq!(points.len(), values.len());
    let mut out = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    if !points.is_empty() {
        out.push(0.0);
    }
    for i in 1..points.len() {
        acc += 0.5 * (points[i] - points[i - 1]) * (values[i] + values[i - 1]);
        out.push(acc);
    }
    out
}

/// Trapezoid rule on a uniform grid with spacing `dx`.
pub fn trapezoid_uniform(dx: f64, values: &[f64]) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dx * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_span() {
        let pts = [0.0, 0.1, 0.35, 1.0];
        let w = trapezoid_weights(&pts);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(trapezoid_weights(&[2.0]), vec![0.0]);
    }

    #[test]
    fn exact_for_linear_integrands() {
        let pts: Vec<f64> = (0..7).map(|i| (i as f64).powf(1.3)).collect();
        let vals: Vec<f64> = pts.iter().map(|x| 3.0 * x - 1.0).collect();
        let end = *pts.last().unwrap();
        let exact = 1.5 * end * end - end;
        assert!((trapezoid(&pts, &vals) - exact).abs() < 1e-12);
        let cum = cumulative_trapezoid(&pts, &vals);
        assert!((cum[6] - exact).abs() < 1e-12);
        assert_eq!(cum[0], 0.0);
    }

    #[test]
    fn uniform_matches_general() {
        let pts: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let vals: Vec<f64> = pts.iter().map(|x: &f64| x.exp()).collect();
        assert!((trapezoid_uniform(0.1, &vals) - trapezoid(&pts, &vals)).abs() < 1e-14);
    }
}
