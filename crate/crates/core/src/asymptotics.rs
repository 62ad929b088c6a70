//! Large-system deterministic equivalents of the transmit power.
//!
//! For OLP, MRT, ZF and statistical RZF the power hardens to
//! `P = c sigma^2 A / eta` with `A = (1/K) sum_k gamma_k / l_k`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::PathlossModel;
use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Olp,
    Mrt,
    Zf,
    RzfStatistical,
    RzfClassical,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::Olp,
        SchemeKind::Mrt,
        SchemeKind::Zf,
        SchemeKind::RzfStatistical,
        SchemeKind::RzfClassical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Olp => "olp",
            SchemeKind::Mrt => "mrt",
            SchemeKind::Zf => "zf",
            SchemeKind::RzfStatistical => "rzf-statistical",
            SchemeKind::RzfClassical => "rzf-classical",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let scheme = match key.as_str() {
            "olp" => SchemeKind::Olp,
            "mrt" => SchemeKind::Mrt,
            "zf" => SchemeKind::Zf,
            "rzf" | "rzf-statistical" => SchemeKind::RzfStatistical,
            "rzf-classical" => SchemeKind::RzfClassical,
            _ => return Err(Error::config("scheme", format!("unknown scheme `{s}`"))),
        };
        Ok(scheme)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn check_inputs(c: f64, gamma: &[f64]) -> Result<()> {
    if gamma.is_empty() {
        return Err(Error::Domain("need at least one user".into()));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::Domain(format!("load c = K/N must lie in (0, 1], got {c}")));
    }
    if let Some(g) = gamma.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::Domain(format!("SINR targets must be positive, got {g}")));
    }
    Ok(())
}

/// Efficiency factor `eta` of each scheme. Classical RZF is given the
/// statistical-RZF row here; its actual power comes from [`classical_rzf`].
pub fn eta_for(scheme: SchemeKind, c: f64, gamma: &[f64]) -> Result<f64> {
    check_inputs(c, gamma)?;
    let gbar = mean(gamma);
    let eta = match scheme {
        SchemeKind::Olp => 1.0 - c * mean(&gamma.iter().map(|g| g / (1.0 + g)).collect::<Vec<_>>()),
        SchemeKind::Mrt => 1.0 - c * gbar,
        SchemeKind::Zf => 1.0 - c,
        SchemeKind::RzfStatistical | SchemeKind::RzfClassical => 1.0 - c * gbar / (1.0 + gbar),
    };
    if eta <= 0.0 {
        let reason = match scheme {
            SchemeKind::Mrt => format!(
                "c * mean(gamma) = {:.4} >= 1; uniform rates must stay below log2(1 + 1/c) = {:.4}",
                c * gbar,
                (1.0 + 1.0 / c).log2()
            ),
            _ => format!("efficiency factor {eta:.4} is not positive"),
        };
        return Err(Error::infeasible(scheme, reason));
    }
    Ok(eta)
}

/// `A = (1/K) sum_k gamma_k / l_k` from attenuations.
pub fn a_from_attenuations(gamma: &[f64], attenuations: &[f64]) -> f64 {
    gamma.iter().zip(attenuations).map(|(g, l)| g / l).sum::<f64>() / gamma.len() as f64
}

pub fn a_of_t(positions: &[Point], gamma: &[f64], model: &PathlossModel) -> f64 {
    gamma
        .iter()
        .zip(positions)
        .map(|(g, &p)| g * model.inverse(p))
        .sum::<f64>()
        / gamma.len() as f64
}

pub fn asymptotic_lambda(gamma_k: f64, attenuation: f64, eta: f64) -> f64 {
    gamma_k / (attenuation * eta)
}

/// Solution of `mu = (c/K sum_i a_i l_i / (1 + a_i l_i mu) + rho)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuSolution {
    pub mu: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Newton iteration on `mu - f(mu)` safeguarded by the bracket `(0, 1/rho]`,
/// which always contains the unique root since `f` increases from
/// `f(0) > 0` to at most `1/rho`.
pub fn mu_fixed_point(alpha: &[f64], attenuations: &[f64], rho: f64, c: f64) -> Result<MuSolution> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("regularization must be positive, got {rho}")));
    }
    let k = alpha.len() as f64;
    let al: Vec<f64> = alpha.iter().zip(attenuations).map(|(a, l)| a * l).collect();
    // f(mu) and f'(mu) with f = 1 / (s(mu) + rho)
    let eval = |mu: f64| {
        let (mut s, mut ds) = (0.0, 0.0);
        for &x in &al {
            let d = 1.0 + x * mu;
            s += x / d;
            ds -= x * x / (d * d);
        }
        let (s, ds) = (c * s / k, c * ds / k);
        let f = 1.0 / (s + rho);
        (f, -ds * f * f)
    };
    let (mut lo, mut hi) = (0.0, 1.0 / rho);
    let mut mu = hi;
    for it in 1..=200 {
        let (f, df) = eval(mu);
        let g = mu - f;
        if g.abs() <= 1e-14 * mu {
            return Ok(MuSolution { mu, iterations: it, residual: g.abs() / mu });
        }
        if g > 0.0 {
            hi = mu;
        } else {
            lo = mu;
        }
        let newton = mu - g / (1.0 - df);
        mu = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::NonConvergence { what: "mu fixed point", iterations: 200 })
}

/// Deterministic equivalents for a heuristic precoder with weights `alpha` and
/// regularization `rho`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeuristicEquivalent {
    pub mu: f64,
    pub pbar_w: f64,
    pub user_pbar_w: Vec<f64>,
    /// `B = (1/K) sum gamma_i / (1 + a_i l_i mu)^2`.
    pub b: f64,
    /// `F = (c/K) sum (a_i l_i)^2 / (1 + a_i l_i mu)^2`.
    pub f: f64,
}

pub fn heuristic_equivalent(
    alpha: &[f64],
    attenuations: &[f64],
    gamma: &[f64],
    rho: f64,
    c: f64,
    noise_w: f64,
) -> Result<HeuristicEquivalent> {
    check_inputs(c, gamma)?;
    let mu = mu_fixed_point(alpha, attenuations, rho, c)?.mu;
    power_at_mu(alpha, attenuations, gamma, mu, c, noise_w)
}

fn power_at_mu(alpha: &[f64], l: &[f64], gamma: &[f64], mu: f64, c: f64, noise_w: f64) -> Result<HeuristicEquivalent> {
    let k = gamma.len() as f64;
    let (mut b, mut f) = (0.0, 0.0);
    for i in 0..gamma.len() {
        let x = alpha[i] * l[i];
        let d = (1.0 + x * mu).powi(2);
        b += gamma[i] / d;
        f += x * x / d;
    }
    let (b, f) = (b / k, c * f / k);
    let denom = 1.0 - mu * mu * f - c * b;
    if denom <= 0.0 {
        return Err(Error::infeasible("heuristic precoder", format!("power denominator {denom:.4} is not positive")));
    }
    let pbar = c * noise_w * a_from_attenuations(gamma, l) / denom;
    let user = (0..gamma.len())
        .map(|i| gamma[i] / (l[i] * mu * mu) * (pbar + noise_w / l[i] * (1.0 + alpha[i] * l[i] * mu).powi(2)))
        .collect();
    Ok(HeuristicEquivalent { mu, pbar_w: pbar, user_pbar_w: user, b, f })
}

/// `1/mean(gamma) - c / (1 + mean(gamma))`.
pub fn optimal_rho_statistical(gamma: &[f64], c: f64) -> f64 {
    let g = mean(gamma);
    1.0 / g - c / (1.0 + g)
}

/// Statistical-RZF power as a function of `rho`:
/// `c sigma^2 (1 + mu)^2 A / (mu (c + rho (1 + mu)^2) - c mean(gamma))`
/// with `mu = (c / (1 + mu) + rho)^{-1}`.
pub fn rzf_statistical_power(rho: f64, gamma: &[f64], a: f64, c: f64, noise_w: f64) -> f64 {
    // mu solves rho mu^2 + (rho + c - 1) mu - 1 = 0
    let bq = rho + c - 1.0;
    let mu = (-bq + (bq * bq + 4.0 * rho).sqrt()) / (2.0 * rho);
    c * noise_w * (1.0 + mu).powi(2) * a / (mu * (c + rho * (1.0 + mu).powi(2)) - c * mean(gamma))
}

/// Classical RZF (`alpha = 1`) at its power-minimizing regularization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalRzf {
    pub mu_star: f64,
    pub rho_star: f64,
    pub pbar_w: f64,
    pub user_pbar_w: Vec<f64>,
    pub iterations: usize,
    /// Relative residual of the ratio fixed point at `mu_star`.
    pub residual: f64,
}

fn classical_ratio(l: &[f64], gamma: &[f64], mu: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (li, gi) in l.iter().zip(gamma) {
        let d = (1.0 + li * mu).powi(3);
        num += li * gi / d;
        den += li * li / d;
    }
    num / den
}

pub fn classical_rzf(attenuations: &[f64], gamma: &[f64], c: f64, noise_w: f64) -> Result<ClassicalRzf> {
    check_inputs(c, gamma)?;
    const MAX_ITER: usize = 10_000;
    let l = attenuations;
    let mut mu = classical_ratio(l, gamma, 0.0);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < MAX_ITER {
        iterations += 1;
        let next = classical_ratio(l, gamma, mu);
        residual = (next - mu).abs() / mu;
        if residual < 1e-13 {
            mu = next;
            break;
        }
        mu = 0.5 * (mu + next);
    }
    if residual >= 1e-13 {
        return Err(Error::NonConvergence { what: "classical RZF fixed point", iterations });
    }
    let k = gamma.len() as f64;
    let rho = 1.0 / mu - c / k * l.iter().map(|li| li / (1.0 + li * mu)).sum::<f64>();
    if rho <= 0.0 {
        return Err(Error::infeasible(SchemeKind::RzfClassical, "optimal regularization is not positive"));
    }
    let ones = vec![1.0; gamma.len()];
    let eq = power_at_mu(&ones, l, gamma, mu, c, noise_w)?;
    Ok(ClassicalRzf {
        mu_star: mu,
        rho_star: rho,
        pbar_w: eq.pbar_w,
        user_pbar_w: eq.user_pbar_w,
        iterations,
        residual: (classical_ratio(l, gamma, mu) - mu).abs() / mu,
    })
}

/// Weights and regularization of a heuristic scheme. `None` for OLP and ZF,
/// which are not built from a finite `rho`.
pub fn heuristic_design(scheme: SchemeKind, attenuations: &[f64], gamma: &[f64], c: f64, noise_w: f64) -> Result<Option<(Vec<f64>, f64)>> {
    Ok(match scheme {
        SchemeKind::Olp | SchemeKind::Zf => None,
        SchemeKind::Mrt => Some((vec![0.0; gamma.len()], 1.0)),
        SchemeKind::RzfStatistical => Some((
            attenuations.iter().map(|l| 1.0 / l).collect(),
            optimal_rho_statistical(gamma, c),
        )),
        SchemeKind::RzfClassical => Some((vec![1.0; gamma.len()], classical_rzf(attenuations, gamma, c, noise_w)?.rho_star)),
    })
}

/// Deterministic-equivalent summary of one scheme at one time instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticSummary {
    pub scheme: SchemeKind,
    /// For classical RZF this is the effective `c sigma^2 A / P`.
    pub eta: f64,
    pub a_of_t: f64,
    pub pbar_w: f64,
    pub user_pbar_w: Vec<f64>,
    pub user_lambda: Option<Vec<f64>>,
    pub mu: Option<f64>,
    pub rho: Option<f64>,
}

pub fn summarize(scheme: SchemeKind, c: f64, gamma: &[f64], attenuations: &[f64], noise_w: f64) -> Result<AsymptoticSummary> {
    check_inputs(c, gamma)?;
    if attenuations.len() != gamma.len() {
        return Err(Error::DimensionMismatch(format!("{} attenuations for {} users", attenuations.len(), gamma.len())));
    }
    let a = a_from_attenuations(gamma, attenuations);
    let l = attenuations;
    let mut out = AsymptoticSummary {
        scheme,
        eta: 0.0,
        a_of_t: a,
        pbar_w: 0.0,
        user_pbar_w: Vec::new(),
        user_lambda: None,
        mu: None,
        rho: None,
    };
    match scheme {
        SchemeKind::Olp => {
            let eta = eta_for(scheme, c, gamma)?;
            let pbar = c * noise_w * a / eta;
            out.eta = eta;
            out.pbar_w = pbar;
            out.user_pbar_w = gamma
                .iter()
                .zip(l)
                .map(|(g, li)| g / (li * eta * eta) * (pbar + noise_w / li * (1.0 + g).powi(2)))
                .collect();
            out.user_lambda = Some(gamma.iter().zip(l).map(|(g, li)| asymptotic_lambda(*g, *li, eta)).collect());
        }
        SchemeKind::Zf => {
            let eta = eta_for(scheme, c, gamma)?;
            out.eta = eta;
            out.pbar_w = c * noise_w * a / eta;
            out.user_pbar_w = gamma.iter().map(|g| g * noise_w).collect();
        }
        SchemeKind::Mrt | SchemeKind::RzfStatistical => {
            let eta = eta_for(scheme, c, gamma)?;
            let (alpha, rho) = heuristic_design(scheme, l, gamma, c, noise_w)?.expect("heuristic scheme");
            let mu = if scheme == SchemeKind::Mrt { 1.0 } else { mean(gamma) };
            let eq = power_at_mu(&alpha, l, gamma, mu, c, noise_w)?;
            out.eta = eta;
            out.pbar_w = c * noise_w * a / eta;
            out.user_pbar_w = eq.user_pbar_w;
            out.mu = Some(mu);
            out.rho = Some(rho);
        }
        SchemeKind::RzfClassical => {
            let cl = classical_rzf(l, gamma, c, noise_w)?;
            out.eta = c * noise_w * a / cl.pbar_w;
            out.pbar_w = cl.pbar_w;
            out.user_pbar_w = cl.user_pbar_w;
            out.mu = Some(cl.mu_star);
            out.rho = Some(cl.rho_star);
        }
    }
    Ok(out)
}

pub fn asymptotic_power(
    scheme: SchemeKind,
    c: f64,
    gamma: &[f64],
    positions: &[Point],
    model: &PathlossModel,
    noise_w: f64,
) -> Result<f64> {
    let l: Vec<f64> = positions.iter().map(|&p| model.at_distance(p.norm())).collect();
    Ok(summarize(scheme, c, gamma, &l, noise_w)?.pbar_w)
}

pub fn asymptotic_user_power(scheme: SchemeKind, c: f64, gamma: &[f64], attenuations: &[f64], noise_w: f64) -> Result<Vec<f64>> {
    Ok(summarize(scheme, c, gamma, attenuations, noise_w)?.user_pbar_w)
}

/// Efficiency factor and effective targets `gamma / (1 - tau^2)` under
/// imperfect channel estimates. The error sum is averaged over users so
/// that `tau = 0` recovers the perfect-CSI factor.
pub fn imperfect_csi_eta(scheme: SchemeKind, c: f64, gamma: &[f64], tau: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_inputs(c, gamma)?;
    if tau.len() != gamma.len() {
        return Err(Error::DimensionMismatch(format!("{} CSI qualities for {} users", tau.len(), gamma.len())));
    }
    if let Some(t) = tau.iter().find(|t| !(**t >= 0.0 && **t < 1.0)) {
        return Err(Error::Domain(format!("tau must lie in [0, 1), got {t}")));
    }
    let gp: Vec<f64> = gamma.iter().zip(tau).map(|(g, t)| g / (1.0 - t * t)).collect();
    let penalty = c * gp.iter().zip(tau).map(|(g, t)| g * t * t).sum::<f64>() / gamma.len() as f64;
    let gbar = mean(gamma);
    let eta = match scheme {
        SchemeKind::Zf => 1.0 - c - penalty,
        SchemeKind::RzfStatistical => 1.0 - c * gbar / (1.0 + gbar) - penalty,
        other => {
            return Err(Error::Domain(format!("imperfect-CSI equivalents are only available for zf and rzf, not {other}")))
        }
    };
    if eta <= 0.0 {
        return Err(Error::infeasible(scheme, format!("channel estimates too poor: eta' = {eta:.4}")));
    }
    Ok((eta, gp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{db_to_linear, dbm_to_watts};

    fn gamma_15(k: usize) -> Vec<f64> {
        vec![2f64.powf(1.5) - 1.0; k]
    }

    fn spread_attenuations(k: usize) -> Vec<f64> {
        let m = PathlossModel::new(4.0, 25.0, db_to_linear(-93.0)).unwrap();
        (0..k).map(|i| m.at_distance(500.0 * ((i as f64 + 0.5) / k as f64).sqrt())).collect()
    }

    #[test]
    fn eta_table_values() {
        let g = gamma_15(8);
        assert_eq!(eta_for(SchemeKind::Zf, 0.5, &g).unwrap(), 0.5);
        let olp = eta_for(SchemeKind::Olp, 0.5, &g).unwrap();
        let y = 2f64.powf(1.5) - 1.0;
        assert!((olp - (1.0 - 0.5 * y / (1.0 + y))).abs() < 1e-15);
        assert!((olp - 0.6768).abs() < 1e-4);
        let mrt = eta_for(SchemeKind::Mrt, 0.5, &g).unwrap();
        assert!((mrt - 0.0858).abs() < 1e-4);
        assert!((olp / mrt - 7.89).abs() < 0.01);
        assert!(matches!(eta_for(SchemeKind::Mrt, 0.5, &vec![2.5; 4]), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn eta_ordering_and_uniform_collapse() {
        let g = vec![0.5, 1.0, 2.0, 4.0];
        for c in [0.1, 0.25, 0.5, 0.75, 1.0] {
            let olp = eta_for(SchemeKind::Olp, c, &g).unwrap();
            let rzf = eta_for(SchemeKind::RzfStatistical, c, &g).unwrap();
            let zf = eta_for(SchemeKind::Zf, c, &g).unwrap_or(0.0);
            assert!(olp >= rzf && rzf >= zf);
            if let Ok(mrt) = eta_for(SchemeKind::Mrt, c, &g) {
                assert!(olp >= mrt);
            }
        }
        let u = gamma_15(5);
        assert_eq!(eta_for(SchemeKind::Olp, 0.5, &u).unwrap(), eta_for(SchemeKind::RzfStatistical, 0.5, &u).unwrap());
    }

    #[test]
    fn a_of_t_reference_points() {
        let m = PathlossModel::new(4.0, 25.0, db_to_linear(-93.0)).unwrap();
        let g = vec![1.0, 3.0];
        let a = a_of_t(&[Point::ORIGIN, Point::ORIGIN], &g, &m);
        assert!((a / (2.0 / (2.0 * m.l_xbar)) - 1.0).abs() < 1e-15);
        let one = a_of_t(&[Point::new(0.0, 25.0)], &[2.0], &m);
        assert!((one / (2.0 / m.l_xbar) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mu_fixed_point_cases() {
        let l = spread_attenuations(6);
        let s = mu_fixed_point(&[0.0; 6], &l, 0.4, 0.5).unwrap();
        assert_eq!(s.mu, 2.5);
        // a l = 1: mu = 1/(c/(1+mu) + rho)  =>  rho mu^2 + (rho + c - 1) mu - 1 = 0
        let alpha: Vec<f64> = l.iter().map(|x| 1.0 / x).collect();
        for (rho, c) in [(0.3, 0.5), (1.2, 0.25), (0.01, 1.0)] {
            let s = mu_fixed_point(&alpha, &l, rho, c).unwrap();
            let b: f64 = rho + c - 1.0;
            let root = (-b + (b * b + 4.0 * rho).sqrt()) / (2.0 * rho);
            assert!((s.mu / root - 1.0).abs() < 1e-12);
            assert!(s.residual < 1e-12);
        }
        let g = gamma_15(6);
        let rho = optimal_rho_statistical(&g, 0.5);
        let s = mu_fixed_point(&alpha, &l, rho, 0.5).unwrap();
        assert!((s.mu / g[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rho_star_minimizes_statistical_power() {
        assert!((optimal_rho_statistical(&[1.0, 1.0], 0.5) - 0.75).abs() < 1e-15);
        let g = vec![0.8, 1.5, 2.5, 3.0];
        let (a, c, s2) = (1e13, 0.5, 1e-13);
        let rho = optimal_rho_statistical(&g, c);
        let p = |r: f64| rzf_statistical_power(r, &g, a, c, s2);
        let h = 1e-4 * rho;
        assert!((p(rho + h) - p(rho)) / h > 0.0);
        assert!((p(rho) - p(rho - h)) / h < 0.0);
        let closed = c * s2 * a / eta_for(SchemeKind::RzfStatistical, c, &g).unwrap();
        assert!((p(rho) / closed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn olp_equals_heuristic_with_deterministic_multipliers() {
        let l = spread_attenuations(10);
        let g: Vec<f64> = (0..10).map(|i| 0.5 + 0.2 * i as f64).collect();
        let (c, s2) = (0.5, dbm_to_watts(-97.8));
        let olp = summarize(SchemeKind::Olp, c, &g, &l, s2).unwrap();
        let eta = olp.eta;
        let alpha: Vec<f64> = g.iter().zip(&l).map(|(gi, li)| asymptotic_lambda(*gi, *li, eta)).collect();
        let h = heuristic_equivalent(&alpha, &l, &g, 1.0, c, s2).unwrap();
        assert!((h.mu / eta - 1.0).abs() < 1e-12);
        assert!((h.pbar_w / olp.pbar_w - 1.0).abs() < 1e-10);
        for (a, b) in h.user_pbar_w.iter().zip(&olp.user_pbar_w) {
            assert!((a / b - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn unified_schemes_follow_eta_law() {
        let l = spread_attenuations(12);
        let g = gamma_15(12);
        let (c, s2) = (0.5, dbm_to_watts(-97.8));
        for scheme in [SchemeKind::Olp, SchemeKind::Mrt, SchemeKind::Zf, SchemeKind::RzfStatistical] {
            let s = summarize(scheme, c, &g, &l, s2).unwrap();
            assert!((s.pbar_w / (c * s2 * s.a_of_t / s.eta) - 1.0).abs() < 1e-14);
        }
        // MRT and statistical RZF through the generic weighted route.
        for scheme in [SchemeKind::Mrt, SchemeKind::RzfStatistical] {
            let (alpha, rho) = heuristic_design(scheme, &l, &g, c, s2).unwrap().unwrap();
            let h = heuristic_equivalent(&alpha, &l, &g, rho, c, s2).unwrap();
            let s = summarize(scheme, c, &g, &l, s2).unwrap();
            assert!((h.pbar_w / s.pbar_w - 1.0).abs() < 1e-10, "{scheme}");
        }
        let zf = summarize(SchemeKind::Zf, c, &g, &l, s2).unwrap();
        assert!(zf.user_pbar_w.iter().all(|p| (p / (g[0] * s2) - 1.0).abs() < 1e-15));
        let olp = summarize(SchemeKind::Olp, c, &g, &l, s2).unwrap();
        let rzf = summarize(SchemeKind::RzfStatistical, c, &g, &l, s2).unwrap();
        assert!((olp.pbar_w / rzf.pbar_w - 1.0).abs() < 1e-14);
        let lam = olp.user_lambda.unwrap();
        for i in 1..12 {
            assert!(lam[i] > lam[i - 1]);
        }
    }

    #[test]
    fn zf_is_small_rho_limit_of_classical_weights() {
        let l = spread_attenuations(8);
        let g = gamma_15(8);
        let (c, s2) = (0.5, 1e-13);
        let zf = summarize(SchemeKind::Zf, c, &g, &l, s2).unwrap().pbar_w;
        let lmin = l.iter().cloned().fold(f64::INFINITY, f64::min);
        let h = heuristic_equivalent(&[1.0; 8], &l, &g, 1e-8 * lmin, c, s2).unwrap();
        assert!((h.pbar_w / zf - 1.0).abs() < 1e-5);
    }

    #[test]
    fn classical_rzf_properties() {
        let l = spread_attenuations(16);
        let g: Vec<f64> = (0..16).map(|i| 0.6 + 0.1 * i as f64).collect();
        let (c, s2) = (0.5, 1e-13);
        let cl = classical_rzf(&l, &g, c, s2).unwrap();
        assert!(cl.residual < 1e-10);
        let mu = mu_fixed_point(&[1.0; 16], &l, cl.rho_star, c).unwrap().mu;
        assert!((mu / cl.mu_star - 1.0).abs() < 1e-10);
        let olp = summarize(SchemeKind::Olp, c, &g, &l, s2).unwrap().pbar_w;
        assert!(cl.pbar_w >= olp * (1.0 - 1e-12));
        // A neighbouring regularization costs more.
        for f in [0.9, 1.1] {
            let h = heuristic_equivalent(&[1.0; 16], &l, &g, f * cl.rho_star, c, s2).unwrap();
            assert!(h.pbar_w > cl.pbar_w);
        }
        // gamma proportional to l: classical RZF is optimal.
        let gp: Vec<f64> = l.iter().map(|x| 1.5 * x / l[0]).collect();
        let cl = classical_rzf(&l, &gp, c, s2).unwrap();
        let olp = summarize(SchemeKind::Olp, c, &gp, &l, s2).unwrap().pbar_w;
        assert!((cl.pbar_w / olp - 1.0).abs() < 1e-9);
        // equal attenuations and targets: same as statistical RZF
        let flat = vec![l[3]; 8];
        let cl = classical_rzf(&flat, &gamma_15(8), c, s2).unwrap();
        let st = summarize(SchemeKind::RzfStatistical, c, &gamma_15(8), &flat, s2).unwrap();
        assert!((cl.pbar_w / st.pbar_w - 1.0).abs() < 1e-10);
    }

    #[test]
    fn imperfect_csi() {
        let g = gamma_15(4);
        let (eta0, gp) = imperfect_csi_eta(SchemeKind::Zf, 0.5, &g, &[0.0; 4]).unwrap();
        assert_eq!(eta0, 0.5);
        assert_eq!(gp, g);
        let t = 0.05f64.sqrt();
        let (eta, gp) = imperfect_csi_eta(SchemeKind::RzfStatistical, 0.5, &g, &[t; 4]).unwrap();
        let y = g[0];
        let want = 1.0 - 0.5 * y / (1.0 + y) - 0.5 * (y / 0.95) * 0.05;
        assert!((eta - want).abs() < 1e-14);
        assert!((gp[0] - y / 0.95).abs() < 1e-14);
        let mut last = f64::INFINITY;
        for i in 0..10 {
            let tau = 0.05 * i as f64;
            let (e, _) = imperfect_csi_eta(SchemeKind::Zf, 0.5, &g, &[tau, 0.1, 0.1, 0.1]).unwrap();
            assert!(e < last);
            last = e;
        }
        assert!(imperfect_csi_eta(SchemeKind::Olp, 0.5, &g, &[0.1; 4]).is_err());
        assert!(imperfect_csi_eta(SchemeKind::Zf, 0.5, &g, &[1.0; 4]).is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in SchemeKind::ALL {
            assert_eq!(s.name().parse::<SchemeKind>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("foo".parse::<SchemeKind>().is_err());
    }
}
