//! Monte Carlo statistics of the inverse pathloss along random-walk
//! trajectories started from the uniform law.

use serde::Serialize;

use crate::channel::PathlossModel;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, stream_rng};
use crate::geometry::{sample_uniform_point, slot_count, step_walk, CellGeometry, Point, WalkParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceEstimate {
    pub tau_s: f64,
    pub s_s: f64,
    pub covariance: f64,
    pub std_error: f64,
}

/// Sample covariance of `1/l(x(tau))` and `1/l(x(s))` for each requested
/// time pair. Times are rounded down to whole walk steps.
pub fn empirical_pathloss_covariance(
    params: &WalkParams,
    geometry: &CellGeometry,
    model: &PathlossModel,
    t_pairs: &[(f64, f64)],
    trials: usize,
    seed: u64,
) -> Result<Vec<CovarianceEstimate>> {
    if trials < 1000 {
        return Err(Error::Domain(format!("need at least 1000 trajectories, got {trials}")));
    }
    if t_pairs.iter().any(|&(a, b)| !(a >= 0.0 && b >= 0.0)) {
        return Err(Error::Domain("times must be non-negative".into()));
    }
    let step = |t: f64| slot_count(t, params.interval_s);
    let horizon = t_pairs.iter().map(|&(a, b)| step(a).max(step(b))).max().unwrap_or(0);
    let samples: Vec<Vec<(f64, f64)>> = map_indexed(trials as u64, |i| {
        let mut rng = stream_rng(seed, i);
        let mut p = sample_uniform_point(geometry, &mut rng);
        let mut path = Vec::with_capacity(horizon + 1);
        path.push(model.inverse(p));
        for _ in 0..horizon {
            p = step_walk(p, params, geometry, &mut rng);
            path.push(model.inverse(p));
        }
        t_pairs.iter().map(|&(a, b)| (path[step(a)], path[step(b)])).collect()
    });
    let n = trials as f64;
    Ok(t_pairs
        .iter()
        .enumerate()
        .map(|(j, &(tau_s, s_s))| {
            let (ma, mb) = samples.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v[j].0, acc.1 + v[j].1));
            let (ma, mb) = (ma / n, mb / n);
            let prods: Vec<f64> = samples.iter().map(|v| (v[j].0 - ma) * (v[j].1 - mb)).collect();
            let covariance = prods.iter().sum::<f64>() / (n - 1.0);
            let spread = prods.iter().map(|q| (q - covariance).powi(2)).sum::<f64>() / (n - 1.0);
            CovarianceEstimate {
                tau_s,
                s_s,
                covariance,
                std_error: (spread / n).sqrt(),
            }
        })
        .collect())
}

/// Variance of `int_0^T 1/l(x(t)) dt` over trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratedCovariance {
    /// Expected variance given the starting point, `E[Var(. | x(0))]`.
    pub conditional: f64,
    pub conditional_std_error: f64,
    /// Unconditional variance, which adds the spread of the conditional mean.
    pub total: f64,
}

/// Estimates the variance of the time-integrated inverse pathloss with
/// `groups` uniform starting points and `paths_per_group` independent walks
/// from each. Integration uses the trapezoid rule on the walk grid.
pub fn integrated_pathloss_covariance(
    params: &WalkParams,
    geometry: &CellGeometry,
    model: &PathlossModel,
    horizon_s: f64,
    groups: usize,
    paths_per_group: usize,
    seed: u64,
) -> Result<IntegratedCovariance> {
    if groups < 2 || paths_per_group < 2 {
        return Err(Error::Domain("need at least two groups of two paths".into()));
    }
    let steps = slot_count(horizon_s, params.interval_s);
    let xi = params.interval_s;
    let integrals: Vec<Vec<f64>> = map_indexed(groups as u64, |g| {
        let mut rng = stream_rng(seed, g);
        let start = sample_uniform_point(geometry, &mut rng);
        (0..paths_per_group)
            .map(|_| integrate_path(start, steps, xi, params, geometry, model, &mut rng))
            .collect()
    });
    let m = paths_per_group as f64;
    let within: Vec<f64> = integrals
        .iter()
        .map(|ys| {
            let mean = ys.iter().sum::<f64>() / m;
            ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (m - 1.0)
        })
        .collect();
    let g = groups as f64;
    let conditional = within.iter().sum::<f64>() / g;
    let spread = within.iter().map(|w| (w - conditional).powi(2)).sum::<f64>() / (g - 1.0);
    let all: Vec<f64> = integrals.into_iter().flatten().collect();
    let n = all.len() as f64;
    let mean = all.iter().sum::<f64>() / n;
    let total = all.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(IntegratedCovariance {
        conditional,
        conditional_std_error: (spread / g).sqrt(),
        total,
    })
}

fn integrate_path(
    start: Point,
    steps: usize,
    xi: f64,
    params: &WalkParams,
    geometry: &CellGeometry,
    model: &PathlossModel,
    rng: &mut impl rand::Rng,
) -> f64 {
    let mut p = start;
    let mut prev = model.inverse(p);
    let mut acc = 0.0;
    for _ in 0..steps {
        p = step_walk(p, params, geometry, rng);
        let cur = model.inverse(p);
        acc += 0.5 * (prev + cur) * xi;
        prev = cur;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::mean_inverse_pathloss;
    use crate::quad::integrate;
    use crate::units::db_to_linear;

    fn setup() -> (WalkParams, CellGeometry, PathlossModel) {
        (
            WalkParams::new(50.0, 30.0).unwrap(),
            CellGeometry::new(500.0).unwrap(),
            PathlossModel::new(4.0, 25.0, db_to_linear(-93.0)).unwrap(),
        )
    }

    #[test]
    fn zero_lag_is_disc_variance() {
        let (p, g, m) = setup();
        let est = empirical_pathloss_covariance(&p, &g, &m, &[(0.0, 0.0)], 40_000, 1).unwrap()[0];
        let r = g.radius_m;
        let second = integrate(|x| m.inverse_at_distance(x).powi(2) * 2.0 * x, 0.0, r, 0.0, 1e-12).unwrap() / (r * r);
        let first = mean_inverse_pathloss(&m, &g);
        let want = second - first * first;
        assert!((est.covariance - want).abs() < 4.0 * est.std_error, "{} vs {want}", est.covariance);
    }

    #[test]
    fn decorrelates_at_long_lags() {
        let (p, g, m) = setup();
        let lag = 20.0 * g.radius_m.powi(2) / p.effective_diffusion();
        let est = empirical_pathloss_covariance(&p, &g, &m, &[(0.0, 0.0), (0.0, lag)], 4000, 2).unwrap();
        assert!(est[1].covariance.abs() < 4.0 * est[1].std_error);
        assert!(est[1].covariance.abs() < 0.1 * est[0].covariance);
        assert!(empirical_pathloss_covariance(&p, &g, &m, &[(0.0, 0.0)], 999, 2).is_err());
    }

    #[test]
    fn mean_is_stationary() {
        let (p, g, m) = setup();
        let steps = [0usize, 30, 300];
        let means: Vec<(f64, f64)> = steps
            .iter()
            .map(|&s| {
                let vals = map_indexed(20_000, |i| {
                    let mut rng = stream_rng(3, i);
                    let mut x = sample_uniform_point(&g, &mut rng);
                    for _ in 0..s {
                        x = step_walk(x, &p, &g, &mut rng);
                    }
                    m.inverse(x)
                });
                let n = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / n;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                (mean, (var / n).sqrt())
            })
            .collect();
        let disc = mean_inverse_pathloss(&m, &g);
        for (mean, se) in means {
            assert!((mean - disc).abs() < 4.0 * se, "{mean} vs {disc}");
        }
    }

    #[test]
    fn conditional_variance_is_below_total() {
        let (p, g, m) = setup();
        let c = integrated_pathloss_covariance(&p, &g, &m, 3600.0, 500, 4, 4).unwrap();
        assert!(c.conditional > 0.0 && c.conditional < c.total);
    }
}
