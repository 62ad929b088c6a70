//! Mean, variance and Gaussian law of the energy `E_T` spent over a horizon
//! `T` while serving mobile users.
//!
//! The variance is driven by the mobility covariance series
//! `Theta = sum_i 2 phi_i^2 / (kappa_i^2 J_0(kappa_i)^2) I_i` with `kappa_i`
//! the zeros of `J_1`, `phi_i = 2 int_0^1 l(Rz)^{-1} J_0(kappa_i z) z dz` and
//! `I_i = int_0^1 (1 - exp(-kappa_i^2 D T t / R^2))^2 dt`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::channel::{mean_inverse_pathloss, PathlossModel};
use crate::error::{Error, Result};
use crate::geometry::CellGeometry;
use crate::quad::integrate_panels;
use crate::specfun::{bessel_j, j1_zeros, q_function, BesselZeros};
use crate::units::JOULES_PER_WATT_HOUR;

/// Relative tail below which the series is considered converged.
pub const THETA_TAIL_TOL: f64 = 1e-8;
pub const DEFAULT_THETA_TERMS: usize = 100;

/// `phi_i` for a generic profile `z -> 1 / l(R z)` on `[0, 1]`.
pub fn phi_from_profile(inverse_profile: impl Fn(f64) -> f64, kappa: &BesselZeros) -> Result<Vec<f64>> {
    kappa
        .iter()
        .map(|k| {
            let pieces = (k / PI).ceil() as usize + 2;
            let scale = inverse_profile(1.0).abs().max(inverse_profile(0.0).abs());
            integrate_panels(|z| inverse_profile(z) * bessel_j(0, k * z) * z, 0.0, 1.0, pieces, 1e-15 * scale, 1e-12)
                .map(|v| 2.0 * v)
        })
        .collect()
}

/// `int_0^1 x^beta J_0(kappa x) x dx` in closed form for `beta` in {4, 6}.
fn moment_closed_form(beta: f64, k: f64) -> Option<f64> {
    let j0 = bessel_j(0, k);
    if beta == 4.0 {
        Some(4.0 * j0 * (k * k - 8.0) / k.powi(4))
    } else if beta == 6.0 {
        Some(6.0 * j0 * (k.powi(4) - 24.0 * k * k + 192.0) / k.powi(6))
    } else {
        None
    }
}

/// Closed-form `phi_i` when `beta` is 4 or 6.
pub fn phi_closed_form(model: &PathlossModel, radius_m: f64, kappa: &BesselZeros) -> Option<Vec<f64>> {
    let scale = (radius_m / model.xbar_m).powf(model.beta) / model.l_xbar;
    kappa.iter().map(|k| moment_closed_form(model.beta, k).map(|m| scale * m)).collect()
}

pub fn phi_by_quadrature(model: &PathlossModel, radius_m: f64, kappa: &BesselZeros) -> Result<Vec<f64>> {
    phi_from_profile(|z| model.inverse_at_distance(radius_m * z), kappa)
}

/// Closed form where available, adaptive quadrature otherwise.
pub fn phi_coefficients(model: &PathlossModel, radius_m: f64, kappa: &BesselZeros) -> Result<Vec<f64>> {
    match phi_closed_form(model, radius_m, kappa) {
        Some(v) => Ok(v),
        None => phi_by_quadrature(model, radius_m, kappa),
    }
}

/// `int_0^1 (1 - exp(-a t))^2 dt`.
pub fn time_factor(a: f64) -> f64 {
    if a < 0.5 {
        // sum_{n>=2} (-1)^n (2^n - 2) a^n / (n! (n + 1))
        let mut sum = 0.0;
        let mut pow_over_fact = a; // a^n / n!
        for n in 2..30 {
            pow_over_fact *= a / n as f64;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (2f64.powi(n) - 2.0) * pow_over_fact / (n + 1) as f64;
        }
        sum
    } else {
        1.0 + 2.0 * (-a).exp_m1() / a - (-2.0 * a).exp_m1() / (2.0 * a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaSeries {
    #[serde(skip)]
    pub kappa: BesselZeros,
    pub phi: Vec<f64>,
    pub time_factors: Vec<f64>,
    pub value: f64,
    pub terms_used: usize,
    /// Estimated sum of the omitted terms from their `kappa^-6` envelope.
    pub tail_estimate: f64,
}

impl ThetaSeries {
    pub fn terms(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.terms_used).map(|i| {
            let k = self.kappa.get(i);
            2.0 * self.phi[i].powi(2) / (k * k * bessel_j(0, k).powi(2)) * self.time_factors[i]
        })
    }
}

/// Exactly `terms` terms of the series.
pub fn theta_fixed(model: &PathlossModel, radius_m: f64, d_m2_per_s: f64, horizon_s: f64, terms: usize) -> Result<ThetaSeries> {
    if terms == 0 {
        return Err(Error::Domain("theta needs at least one term".into()));
    }
    if !(horizon_s >= 0.0 && d_m2_per_s > 0.0 && radius_m > 0.0) {
        return Err(Error::Domain("theta needs T >= 0, D > 0 and R > 0".into()));
    }
    let kappa = j1_zeros(terms);
    let phi = phi_coefficients(model, radius_m, &kappa)?;
    let u = d_m2_per_s * horizon_s / (radius_m * radius_m);
    let time_factors: Vec<f64> = kappa.iter().map(|k| time_factor(k * k * u)).collect();
    let mut series = ThetaSeries {
        kappa,
        phi,
        time_factors,
        value: 0.0,
        terms_used: terms,
        tail_estimate: 0.0,
    };
    let terms_vec: Vec<f64> = series.terms().collect();
    series.value = terms_vec.iter().sum();
    let last = *terms_vec.last().expect("non-empty");
    // sum_{j>n} kappa_j^-6 ~ kappa_n^-5 / (5 pi) for zeros spaced by pi
    series.tail_estimate = last * series.kappa.get(terms - 1) / (5.0 * PI);
    Ok(series)
}

/// Series with at least `terms` terms, doubled until the tail estimate is
/// below `THETA_TAIL_TOL` of the value.
pub fn theta(model: &PathlossModel, radius_m: f64, d_m2_per_s: f64, horizon_s: f64, terms: usize) -> Result<ThetaSeries> {
    let mut n = terms.max(1);
    loop {
        let s = theta_fixed(model, radius_m, d_m2_per_s, horizon_s, n)?;
        if s.tail_estimate <= THETA_TAIL_TOL * s.value || n >= 1 << 14 {
            return Ok(s);
        }
        n *= 2;
    }
}

/// `Omega` with `Theta = Omega R^8` for `beta = 4`.
pub fn omega_beta4(model: &PathlossModel, radius_m: f64, d_m2_per_s: f64, horizon_s: f64, terms: usize) -> f64 {
    let u = d_m2_per_s * horizon_s / (radius_m * radius_m);
    let sum: f64 = j1_zeros(terms)
        .iter()
        .map(|k| 32.0 * (k * k - 8.0).powi(2) / k.powi(10) * time_factor(k * k * u))
        .sum();
    sum / (model.xbar_m.powi(8) * model.l_xbar.powi(2))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `eps = T (c sigma^2 / eta) mean(gamma) mean(1/l)`.
pub fn energy_mean(eta: f64, c: f64, gamma: &[f64], noise_w: f64, model: &PathlossModel, geometry: &CellGeometry, horizon_s: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::infeasible("energy mean", format!("eta = {eta} is not positive")));
    }
    Ok(horizon_s * c * noise_w / eta * mean(gamma) * mean_inverse_pathloss(model, geometry))
}

/// `Sigma = (c sigma^2 / eta)^2 mean(gamma^2) (T R^2 / D) Theta`; the
/// variance of `E_T` is `Sigma / K`.
pub fn energy_variance(
    eta: f64,
    c: f64,
    gamma: &[f64],
    noise_w: f64,
    theta: f64,
    radius_m: f64,
    d_m2_per_s: f64,
    horizon_s: f64,
) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::infeasible("energy variance", format!("eta = {eta} is not positive")));
    }
    let g2 = gamma.iter().map(|g| g * g).sum::<f64>() / gamma.len() as f64;
    Ok((c * noise_w / eta).powi(2) * g2 * horizon_s * radius_m * radius_m / d_m2_per_s * theta)
}

/// Gaussian approximation `E_T ~ N(eps, Sigma / K)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyLaw {
    pub epsilon_j: f64,
    pub sigma_var: f64,
    pub k_users: usize,
}

impl EnergyLaw {
    pub fn new(epsilon_j: f64, sigma_var: f64, k_users: usize) -> Result<Self> {
        if !(epsilon_j > 0.0 && sigma_var > 0.0 && k_users >= 1) {
            return Err(Error::Domain(format!(
                "energy law needs positive mean and variance, got {epsilon_j} and {sigma_var}"
            )));
        }
        Ok(EnergyLaw { epsilon_j, sigma_var, k_users })
    }

    pub fn variance(&self) -> f64 {
        self.sigma_var / self.k_users as f64
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn standardize(&self, x_j: f64) -> f64 {
        (x_j - self.epsilon_j) / self.std_dev()
    }
}

/// `Pr(E_T > E) = Q(sqrt(K) (E - eps) / sqrt(Sigma))`.
pub fn outage_probability(energy_budget_j: f64, law: &EnergyLaw) -> f64 {
    q_function(law.standardize(energy_budget_j))
}

pub fn clt_cdf(x_j: f64, law: &EnergyLaw) -> f64 {
    1.0 - q_function(law.standardize(x_j))
}

/// Everything the variance formula needs besides the scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityContext {
    pub model: PathlossModel,
    pub geometry: CellGeometry,
    pub diffusion_m2_per_s: f64,
    pub horizon_s: f64,
}

/// One row of the theory report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeEnergy {
    pub scheme: String,
    pub eta: f64,
    pub epsilon_j: f64,
    pub epsilon_wh: f64,
    pub sigma_var: f64,
    pub std_dev_j: f64,
    pub mean_power_w: f64,
}

pub fn scheme_energy(
    scheme: impl ToString,
    eta: f64,
    c: f64,
    gamma: &[f64],
    noise_w: f64,
    ctx: &MobilityContext,
    theta_value: f64,
) -> Result<(SchemeEnergy, EnergyLaw)> {
    let eps = energy_mean(eta, c, gamma, noise_w, &ctx.model, &ctx.geometry, ctx.horizon_s)?;
    let sig = energy_variance(
        eta,
        c,
        gamma,
        noise_w,
        theta_value,
        ctx.geometry.radius_m,
        ctx.diffusion_m2_per_s,
        ctx.horizon_s,
    )?;
    let law = EnergyLaw::new(eps, sig, gamma.len())?;
    Ok((
        SchemeEnergy {
            scheme: scheme.to_string(),
            eta,
            epsilon_j: eps,
            epsilon_wh: eps / JOULES_PER_WATT_HOUR,
            sigma_var: sig,
            std_dev_j: law.std_dev(),
            mean_power_w: eps / ctx.horizon_s,
        },
        law,
    ))
}
