use super::{DensityEstimator, PathEnsemble};
use crate::error::{Error, Result};
use crate::genfpk::{PdfGrid, PdfSnapshot};
use crate::quadrature::trapezoid_uniform;

/// Smallest ensemble accepted by [`estimate_pdf`].
const MIN_SAMPLES: usize = 100;
/// Kernel support in bandwidths; `exp(-32)` is below `1.3e-14`.
const KDE_CUTOFF: f64 = 8.0;

/// `0.9 min(sd, IQR / 1.34) n^(-1/5)`, falling back to whichever spread
/// measure is positive.
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n < 2 {
        return 0.0;
    }
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let sd = (sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt();
    let q = |p: f64| {
        let pos = p * (n - 1) as f64;
        let (i, frac) = (pos.floor() as usize, pos.fract());
        if i + 1 < n {
            sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
        } else {
            sorted[n - 1]
        }
    };
    let iqr = (q(0.75) - q(0.25)) / 1.34;
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        (false, true) => iqr,
        (false, false) => 0.0,
    };
    0.9 * spread * (n as f64).powf(-0.2)
}

/// Density estimate of `samples` on `grid`, normalized to unit trapezoid mass.
pub fn estimate_pdf_from_samples(
    samples: &[f64],
    grid: PdfGrid,
    time: f64,
    method: DensityEstimator,
) -> Result<PdfSnapshot> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "empty"));
    }
    let dx = grid.dx();
    let n_x = grid.n_x;
    let mut values = vec![0.0; n_x];
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut h = match method {
        DensityEstimator::Histogram => 0.0,
        DensityEstimator::GaussianKde => silverman_bandwidth(&sorted),
    };
    if method == DensityEstimator::GaussianKde && !(h > 0.0) {
        // Coincident samples: fall back to one cell width.
        h = dx;
    }
    match method {
        DensityEstimator::Histogram => {
            for &s in samples {
                let pos = ((s - grid.x_min) / dx + 0.5).floor();
                if pos >= 0.0 && (pos as usize) < n_x {
                    values[pos as usize] += 1.0;
                }
            }
        }
        DensityEstimator::GaussianKde => {
            let reach = KDE_CUTOFF * h;
            let inv = 1.0 / h;
            for (i, v) in values.iter_mut().enumerate() {
                let x = grid.node(i);
                let lo = sorted.partition_point(|&s| s < x - reach);
                let hi = sorted.partition_point(|&s| s <= x + reach);
                *v = sorted[lo..hi]
                    .iter()
                    .map(|&s| {
                        let u = (x - s) * inv;
                        (-0.5 * u * u).exp()
                    })
                    .sum();
            }
        }
    }
    let mass = trapezoid_uniform(dx, &values);
    if mass > 0.0 {
        values.iter_mut().for_each(|v| *v /= mass);
    }
    PdfSnapshot::new(grid, time, values)
}

/// Density of the recorded responses at grid index `t_index`.
pub fn estimate_pdf(
    ens: &PathEnsemble,
    t_index: usize,
    grid: PdfGrid,
    method: DensityEstimator,
) -> Result<PdfSnapshot> {
    if ens.n_paths < MIN_SAMPLES {
        return Err(Error::invalid(
            "ensemble",
            format!(
                "density estimates need at least {MIN_SAMPLES} paths, got {}",
                ens.n_paths
            ),
        ));
    }
    let samples = ens.values_at(t_index)?;
    estimate_pdf_from_samples(samples, grid, ens.grid.points()[t_index], method)
}

/// Trapezoid `int |a - b| dx` on a shared grid.
pub fn l1_distance(a: &PdfSnapshot, b: &PdfSnapshot) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let diff: Vec<f64> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .collect();
    Ok(trapezoid_uniform(a.grid.dx(), &diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_exact::gaussian_pdf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn grid() -> PdfGrid {
        PdfGrid::new(-8.0, 8.0, 1024).unwrap()
    }

    #[test]
    fn identical_samples_fill_one_cell() {
        let g = PdfGrid::new(0.0, 1.0, 101).unwrap();
        let snap =
            estimate_pdf_from_samples(&[0.423; 500], g, 0.0, DensityEstimator::Histogram).unwrap();
        let nonzero: Vec<usize> = (0..101).filter(|&i| snap.values[i] > 0.0).collect();
        assert_eq!(nonzero, vec![42]);
        assert!((snap.mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kde_of_normal_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s: Vec<f64> = (0..100_000)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let g = grid();
        let kde = estimate_pdf_from_samples(&s, g, 0.0, DensityEstimator::GaussianKde).unwrap();
        assert!((kde.mass - 1.0).abs() < 1e-12);
        let exact = PdfSnapshot::from_fn(g, 0.0, |x| gaussian_pdf(0.0, 1.0, x));
        let d = l1_distance(&kde, &exact).unwrap();
        assert!(d <= 0.02, "{d}");
    }

    #[test]
    fn l1_reference_values() {
        let g = grid();
        let a = PdfSnapshot::from_fn(g, 0.0, |x| gaussian_pdf(0.0, 1.0, x));
        let b = PdfSnapshot::from_fn(g, 0.0, |x| gaussian_pdf(0.1, 1.0, x));
        assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        // 2 (2 Phi(0.05) - 1)
        let expect = 0.079_755_223_353_49;
        let d = l1_distance(&a, &b).unwrap();
        assert!((d - expect).abs() < 1e-5, "{d}");
        assert_eq!(d, l1_distance(&b, &a).unwrap());
        let left = PdfSnapshot::from_fn(g, 0.0, |x| {
            if x < 0.0 {
                gaussian_pdf(-4.0, 0.25, x)
            } else {
                0.0
            }
        });
        let right = PdfSnapshot::from_fn(g, 0.0, |x| {
            if x > 0.0 {
                gaussian_pdf(4.0, 0.25, x)
            } else {
                0.0
            }
        });
        assert!((l1_distance(&left, &right).unwrap() - 2.0).abs() < 1e-6);
        let other = PdfSnapshot::from_fn(PdfGrid::new(-8.0, 8.0, 512).unwrap(), 0.0, |_| 0.0);
        assert!(matches!(l1_distance(&a, &other), Err(Error::GridMismatch)));
    }
}
