//! Battery dimensioning under an outage constraint and the cell radius that
//! minimizes mean energy per unit area.

use serde::Serialize;

use crate::channel::PathlossModel;
use crate::energy::{energy_mean, outage_probability, EnergyLaw};
use crate::error::{Error, Result};
use crate::geometry::CellGeometry;
use crate::specfun::q_inv;

/// Smallest battery energy `sqrt(Sigma / K) Q^{-1}(chi) + eps` with
/// `Pr(E_T > level) <= chi`.
pub fn battery_level(law: &EnergyLaw, chi: f64) -> Result<f64> {
    if !(chi > 0.0 && chi < 1.0) {
        return Err(Error::Domain(format!("outage target must lie in (0, 1), got {chi}")));
    }
    Ok(law.std_dev() * q_inv(chi)? + law.epsilon_j)
}

/// Scheme-dependent inputs of the mean energy as a function of the radius.
#[derive(Debug, Clone, PartialEq)]
pub struct CellEnergyInputs {
    pub model: PathlossModel,
    pub c: f64,
    pub gamma: Vec<f64>,
    pub noise_w: f64,
    pub eta: f64,
    pub horizon_s: f64,
    /// Fixed site consumption `theta` in watts.
    pub overhead_w: f64,
}

impl CellEnergyInputs {
    fn mean_gamma(&self) -> f64 {
        self.gamma.iter().sum::<f64>() / self.gamma.len() as f64
    }
}

/// `F(R) = (eps(R) + theta T) / R^2` in joules per square meter.
pub fn energy_per_area(radius_m: f64, inputs: &CellEnergyInputs) -> Result<f64> {
    let geometry = CellGeometry::new(radius_m)?;
    let eps = energy_mean(inputs.eta, inputs.c, &inputs.gamma, inputs.noise_w, &inputs.model, &geometry, inputs.horizon_s)?;
    Ok((eps + inputs.overhead_w * inputs.horizon_s) / (radius_m * radius_m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusOptimum {
    pub radius_m: f64,
    /// `None` when `beta <= 2`, where the stationarity condition has no root.
    pub closed_form_m: Option<f64>,
    pub numeric_m: f64,
    pub used_numeric_fallback: bool,
    pub energy_per_area: f64,
}

/// `R* = xbar ((1 + 2 L eta theta / (c mean(gamma) sigma^2)) (beta + 2) / (beta - 2))^{1/beta}`.
pub fn closed_form_radius(inputs: &CellEnergyInputs) -> Option<f64> {
    let m = &inputs.model;
    if m.beta <= 2.0 {
        return None;
    }
    let boost = 1.0 + 2.0 * m.l_xbar * inputs.eta * inputs.overhead_w / (inputs.c * inputs.mean_gamma() * inputs.noise_w);
    Some(m.xbar_m * (boost * (m.beta + 2.0) / (m.beta - 2.0)).powf(1.0 / m.beta))
}

/// Golden-section search for the minimizer of `f` on `[lo, hi]` in log scale.
pub fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, rel_tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let g = |x: f64| f(x.exp());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    while b - a > rel_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = g(d);
        }
    }
    (0.5 * (a + b)).exp()
}

/// Radius minimizing [`energy_per_area`], searched over `[xbar, 100 xbar]`.
pub fn optimal_cell_radius(inputs: &CellEnergyInputs) -> Result<RadiusOptimum> {
    if inputs.overhead_w < 0.0 {
        return Err(Error::Domain("overhead power must be non-negative".into()));
    }
    let xbar = inputs.model.xbar_m;
    // evaluate once up front so parameter errors surface as errors
    energy_per_area(xbar, inputs)?;
    let f = |r: f64| energy_per_area(r, inputs).unwrap_or(f64::INFINITY);
    let numeric = golden_section(f, xbar, 100.0 * xbar, 1e-12);
    let closed = closed_form_radius(inputs);
    let radius = closed.unwrap_or(numeric);
    Ok(RadiusOptimum {
        radius_m: radius,
        closed_form_m: closed,
        numeric_m: numeric,
        used_numeric_fallback: closed.is_none(),
        energy_per_area: energy_per_area(radius, inputs)?,
    })
}

/// Outage probability at the battery level for `chi`; equals `chi`.
pub fn check_battery(law: &EnergyLaw, chi: f64) -> Result<f64> {
    Ok(outage_probability(battery_level(law, chi)?, law))
}
