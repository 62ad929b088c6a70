//! The acceptance suite. Each criterion runs its own experiments and
//! returns gated checks (which decide pass or fail) together with
//! informational ones.

use std::fmt;

use serde::Serialize;

use crate::asymptotics::{asymptotic_lambda, eta_for, summarize, SchemeKind};
use crate::channel::{assemble_channels, draw_fading};
use crate::energy::{omega_beta4, outage_probability, phi_by_quadrature, phi_closed_form, theta, theta_fixed, time_factor};
use crate::error::Result;
use crate::exec::stream_rng;
use crate::geometry::sample_initial_positions;
use crate::mobility::integrated_pathloss_covariance;
use crate::planner::{battery_level, optimal_cell_radius, CellEnergyInputs};
use crate::precoding::{allocate, compute_sinr, solve_olp, zf_directions, SinrTargets, OLP_MAX_ITER, OLP_TOL};
use crate::simkit::{fading_variance_probe, mobility_variance_probe, run_ensemble, theory_law, ExperimentConfig, SimMode};
use crate::specfun::{bessel_j, j1_zeros};

/// Published MRT over OLP mean-energy ratio, checked as info only.
const PUBLISHED_MRT_RATIO: f64 = 7.92;
const ANALYTIC_MRT_RATIO: f64 = 7.89;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationOptions {
    pub trials: u64,
    pub seed: u64,
    /// Trials of the informational EXACT-mode ensemble.
    pub exact_trials: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            trials: 1000,
            seed: 2024,
            exact_trials: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub target: String,
    pub passed: bool,
    /// Informational checks are reported but do not affect the verdict.
    pub gated: bool,
}

impl Check {
    fn within(label: impl Into<String>, value: f64, center: f64, tol: f64) -> Self {
        Check {
            label: label.into(),
            value,
            target: format!("{center} ± {tol}"),
            passed: (value - center).abs() <= tol,
            gated: true,
        }
    }

    fn below(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            label: label.into(),
            value,
            target: format!("< {bound:e}"),
            passed: value < bound,
            gated: true,
        }
    }

    fn above(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            label: label.into(),
            value,
            target: format!("> {bound:e}"),
            passed: value > bound,
            gated: true,
        }
    }

    fn holds(label: impl Into<String>, ok: bool) -> Self {
        Check {
            label: label.into(),
            value: f64::from(u8::from(ok)),
            target: "true".into(),
            passed: ok,
            gated: true,
        }
    }

    fn value(label: impl Into<String>, value: f64) -> Self {
        Check {
            label: label.into(),
            value,
            target: "-".into(),
            passed: true,
            gated: false,
        }
    }

    fn info(mut self) -> Self {
        self.gated = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.gated).all(|c| c.passed)
    }

    /// One summary line.
    pub fn line(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} {verdict}  {}:", self.id, self.title)?;
        for (i, c) in self.checks.iter().enumerate() {
            let mark = match (c.gated, c.passed) {
                (false, _) => "info",
                (true, true) => "ok",
                (true, false) => "FAIL",
            };
            let sep = if i == 0 { " " } else { "; " };
            write!(f, "{sep}{} = {} [{}] {mark}", c.label, show(c.value), c.target)?;
        }
        Ok(())
    }
}

fn show(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.3e}")
    } else {
        format!("{v:.6}")
    }
}

fn reference(opts: &ValidationOptions, users: usize, hours: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::reference_cell().with_users(users, 2 * users).with_horizon_hours(hours);
    cfg.trials = opts.trials;
    cfg.seed = opts.seed;
    cfg
}

/// Ensemble ratios against the closed-form law.
pub fn criterion_1(opts: &ValidationOptions) -> Result<CriterionReport> {
    let cells = [
        (16, 3.0, 1.030, 0.02, 1.19, 0.15),
        (32, 24.0, 1.000, 0.01, 1.02, 0.12),
        (64, 3.0, 1.019, 0.015, 1.07, 0.12),
    ];
    let mut checks = Vec::new();
    for (k, hours, m, mt, v, vt) in cells {
        let s = run_ensemble(&reference(opts, k, hours))?;
        let tag = format!("K={k} T={hours}h");
        checks.push(Check::within(format!("{tag} ratio_mean"), s.ratio_mean.unwrap_or(f64::NAN), m, mt));
        checks.push(Check::within(format!("{tag} ratio_var"), s.ratio_var.unwrap_or(f64::NAN), v, vt));
    }
    Ok(CriterionReport { id: 1, title: "ensemble mean and variance ratios (FAST, OLP)", checks })
}

/// MRT over OLP mean energy.
pub fn criterion_2(opts: &ValidationOptions) -> Result<CriterionReport> {
    let gamma = vec![2f64.powf(1.5) - 1.0];
    let analytic = eta_for(SchemeKind::Olp, 0.5, &gamma)? / eta_for(SchemeKind::Mrt, 0.5, &gamma)?;
    let mut cfg = reference(opts, 32, 3.0);
    let olp = run_ensemble(&cfg)?;
    cfg.scheme = SchemeKind::Mrt;
    let mrt = run_ensemble(&cfg)?;
    let simulated = mrt.mean_j / olp.mean_j;
    Ok(CriterionReport {
        id: 2,
        title: "MRT/OLP mean-energy ratio",
        checks: vec![
            Check::within("analytic ratio", analytic, ANALYTIC_MRT_RATIO, 0.005 * ANALYTIC_MRT_RATIO),
            Check::within("FAST ratio / analytic", simulated / analytic, 1.0, 0.03),
            Check::within("analytic / published 7.92", analytic / PUBLISHED_MRT_RATIO, 1.0, 0.01).info(),
        ],
    })
}

/// Random instances at load 1/2 with uniform rate 1.5.
fn instances(opts: &ValidationOptions, n: usize, count: u64, salt: u64) -> Result<Vec<crate::channel::ChannelMatrix>> {
    let base = ExperimentConfig::reference_cell();
    (0..count)
        .map(|i| {
            let mut rng = stream_rng(opts.seed ^ salt, (n as u64) << 32 | i);
            let k = n / 2;
            let pos = sample_initial_positions(k, &base.geometry, &mut rng);
            assemble_channels(&pos, &draw_fading(n, k, &mut rng), &base.model)
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

const SIZES: [usize; 3] = [32, 64, 128];

/// OLP multipliers against their deterministic equivalents.
pub fn criterion_3(opts: &ValidationOptions) -> Result<CriterionReport> {
    let noise = ExperimentConfig::reference_cell().noise_w;
    let mut errors = Vec::new();
    let mut worst_sinr: f64 = 0.0;
    for n in SIZES {
        let targets = SinrTargets::uniform(n / 2, 1.5)?;
        let eta = eta_for(SchemeKind::Olp, 0.5, &targets.gamma)?;
        let mut acc = 0.0;
        let chans = instances(opts, n, 50, 0x33)?;
        for ch in &chans {
            let sol = solve_olp(ch, &targets, noise, OLP_TOL, OLP_MAX_ITER)?;
            let lambda = sol.multipliers.as_ref().expect("olp multipliers");
            let rel: Vec<f64> = lambda
                .iter()
                .zip(&targets.gamma)
                .zip(&ch.attenuations)
                .map(|((lam, g), l)| {
                    let bar = asymptotic_lambda(*g, *l, eta);
                    (lam - bar).abs() / bar
                })
                .collect();
            acc += median(rel);
            for (s, g) in sol.achieved_sinr.iter().zip(&targets.gamma) {
                worst_sinr = worst_sinr.max((s / g - 1.0).abs());
            }
        }
        errors.push(acc / chans.len() as f64);
    }
    let mut checks: Vec<Check> = SIZES
        .iter()
        .zip(&errors)
        .map(|(n, e)| Check::value(format!("N={n} median rel. error"), *e))
        .collect();
    checks.push(Check::holds("decreasing in N", errors.windows(2).all(|w| w[1] < w[0])));
    checks.push(Check::below("N=128 median rel. error", errors[2], 0.05));
    checks.push(Check::below("max |SINR/target - 1|", worst_sinr, 1e-6));
    Ok(CriterionReport { id: 3, title: "finite-N OLP multipliers (EXACT)", checks })
}

/// ZF per-user coefficients against `gamma sigma^2`.
pub fn criterion_4(opts: &ValidationOptions) -> Result<CriterionReport> {
    let noise = ExperimentConfig::reference_cell().noise_w;
    let mut coeff_err = Vec::new();
    let mut power_gap = Vec::new();
    for n in SIZES {
        let targets = SinrTargets::uniform(n / 2, 1.5)?;
        let chans = instances(opts, n, 50, 0x44)?;
        let (mut e, mut g) = (0.0, 0.0);
        for ch in &chans {
            let sol = allocate(ch, zf_directions(ch)?, &targets, noise)?;
            let sinr = compute_sinr(ch, &sol.precoder(), noise)?;
            debug_assert!(sinr.iter().zip(&targets.gamma).all(|(s, t)| (s / t - 1.0).abs() < 1e-6));
            e += sol
                .user_powers
                .iter()
                .zip(&targets.gamma)
                .map(|(p, y)| (p - y * noise).abs() / (y * noise))
                .sum::<f64>()
                / targets.len() as f64;
            let bar = summarize(SchemeKind::Zf, 0.5, &targets.gamma, &ch.attenuations, noise)?.pbar_w;
            g += (sol.total_power - bar).abs() / bar;
        }
        coeff_err.push(e / chans.len() as f64);
        power_gap.push(g / chans.len() as f64);
    }
    let mut checks = Vec::new();
    for (i, n) in SIZES.iter().enumerate() {
        checks.push(Check::value(format!("N={n} total-power gap"), power_gap[i]));
    }
    checks.push(Check::below("N=128 mean |p_k - gamma sigma^2| / gamma sigma^2", coeff_err[2], 0.10));
    // The coefficients are exact up to round-off at every N, so the trend
    // is checked as non-increasing within that round-off.
    checks.push(Check::holds(
        "coefficient error non-increasing in N",
        coeff_err.windows(2).all(|w| w[1] <= w[0] + 1e-12),
    ));
    checks.push(Check::holds("total-power gap decreasing in N", power_gap.windows(2).all(|w| w[1] < w[0])).info());
    Ok(CriterionReport { id: 4, title: "ZF per-user powers (EXACT)", checks })
}

/// Truncation and closed-form checks of the `Theta` series.
pub fn criterion_5(_opts: &ValidationOptions) -> Result<CriterionReport> {
    let cfg = ExperimentConfig::reference_cell();
    let (r, d, t) = (cfg.geometry.radius_m, cfg.walk.effective_diffusion(), cfg.horizon_s);
    let m4 = cfg.model;
    let a = theta_fixed(&m4, r, d, t, 50)?.value;
    let b = theta_fixed(&m4, r, d, t, 200)?.value;

    let terms = 100;
    let kappa = j1_zeros(terms);
    let u = d * t / (r * r);
    let quad = phi_by_quadrature(&m4, r, &kappa)?;
    let theta_quad: f64 = kappa
        .iter()
        .zip(&quad)
        .map(|(k, p)| 2.0 * p * p / (k * k * bessel_j(0, k).powi(2)) * time_factor(k * k * u))
        .sum();
    let theta_omega = omega_beta4(&m4, r, d, t, terms) * r.powi(8);

    let mut m6 = m4;
    m6.beta = 6.0;
    let closed6 = phi_closed_form(&m6, r, &kappa).expect("beta 6 closed form");
    let quad6 = phi_by_quadrature(&m6, r, &kappa)?;
    let worst6 = closed6.iter().zip(&quad6).map(|(x, y)| (x / y - 1.0).abs()).fold(0.0, f64::max);
    Ok(CriterionReport {
        id: 5,
        title: "Theta series",
        checks: vec![
            Check::below("50 vs 200 terms rel. diff", (a / b - 1.0).abs(), 1e-6),
            Check::below("beta=4 closed form vs quadrature", (theta_omega / theta_quad - 1.0).abs(), 1e-8),
            Check::below("beta=6 phi closed form vs quadrature", worst6, 1e-8),
        ],
    })
}

/// `(T R^2 / D) Theta` against the simulated variance of the integrated
/// inverse pathloss.
pub fn criterion_6(opts: &ValidationOptions) -> Result<CriterionReport> {
    let cfg = ExperimentConfig::reference_cell();
    let r = cfg.geometry.radius_m;
    let d = cfg.walk.effective_diffusion();
    let mut checks = Vec::new();
    for u in [0.1, 0.5, 2.0] {
        let t = u * r * r / d;
        let th = theta(&cfg.model, r, d, t, cfg.theta_terms)?.value;
        let theory = t * r * r / d * th;
        let mc = integrated_pathloss_covariance(&cfg.walk, &cfg.geometry, &cfg.model, t, 4000, 8, opts.seed ^ 0x66)?;
        checks.push(Check::within(format!("DT/R^2={u} simulated / theory"), mc.conditional / theory, 1.0, 0.05));
    }
    Ok(CriterionReport { id: 6, title: "mobility covariance cross-oracle", checks })
}

/// Kolmogorov–Smirnov test of FAST energies against the Gaussian law.
pub fn criterion_7(opts: &ValidationOptions) -> Result<CriterionReport> {
    let s = run_ensemble(&reference(opts, 64, 12.0))?;
    Ok(CriterionReport {
        id: 7,
        title: "Gaussianity (K=64, T=12h, FAST)",
        checks: vec![
            Check::above("KS p-value", s.ks_p_value.unwrap_or(f64::NAN), 0.01),
            Check::below("CCDF sup-distance", s.ks_stat.unwrap_or(f64::NAN), 0.05),
        ],
    })
}

/// Slopes of the mobility- and fading-induced variances against `K`.
pub fn criterion_8(opts: &ValidationOptions) -> Result<CriterionReport> {
    let users = [8, 16, 32, 64];
    let base = reference(opts, 16, 3.0);
    let mob = mobility_variance_probe(&base, &users)?;
    let mut exact = base.clone();
    exact.mode = SimMode::Exact;
    let olp = fading_variance_probe(&exact, &users, 200)?;
    exact.scheme = SchemeKind::Zf;
    let zf = fading_variance_probe(&exact, &users, 200)?;
    Ok(CriterionReport {
        id: 8,
        title: "variance scaling in K",
        checks: vec![
            Check::within("mobility slope", mob.slope, -1.0, 0.3),
            Check::within("fading slope (OLP)", olp.slope, -2.0, 0.3),
            Check::within("fading slope (ZF)", zf.slope, -2.0, 0.3).info(),
        ],
    })
}

/// Battery round trip and optimal radius.
pub fn criterion_9(_opts: &ValidationOptions) -> Result<CriterionReport> {
    let cfg = ExperimentConfig::reference_cell();
    let law = theory_law(&cfg)?.law;
    let mut worst: f64 = 0.0;
    for chi in [1e-4, 1e-3, 0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9] {
        worst = worst.max((outage_probability(battery_level(&law, chi)?, &law) - chi).abs());
    }
    let gamma = cfg.targets()?.gamma;
    let inputs = CellEnergyInputs {
        model: cfg.model,
        c: cfg.load(),
        eta: eta_for(SchemeKind::Olp, cfg.load(), &gamma)?,
        gamma,
        noise_w: cfg.noise_w,
        horizon_s: cfg.horizon_s,
        overhead_w: 18.0,
    };
    let opt = optimal_cell_radius(&inputs)?;
    let closed = opt.closed_form_m.unwrap_or(f64::NAN);
    Ok(CriterionReport {
        id: 9,
        title: "planner",
        checks: vec![
            Check::below("max |outage(battery(chi)) - chi|", worst, 1e-10),
            Check::below("|R* closed / golden-section - 1|", (closed / opt.numeric_m - 1.0).abs(), 1e-3),
            Check::within("R* (m)", closed, 554.0, 5.0).info(),
        ],
    })
}

/// Imperfect CSI with substituted `(gamma', eta')`.
pub fn criterion_10(opts: &ValidationOptions) -> Result<CriterionReport> {
    let mut checks = Vec::new();
    for tau2 in [0.05, 0.15] {
        for scheme in [SchemeKind::Zf, SchemeKind::RzfStatistical] {
            let mut cfg = reference(opts, 32, 12.0);
            cfg.scheme = scheme;
            let perfect = theory_law(&cfg)?.law.epsilon_j;
            cfg.tau = f64::sqrt(tau2);
            let s = run_ensemble(&cfg)?;
            let tag = format!("{scheme} tau^2={tau2}");
            checks.push(Check::within(format!("{tag} ratio_mean"), s.ratio_mean.unwrap_or(f64::NAN), 1.0, 0.01));
            checks.push(Check::within(format!("{tag} ratio_var"), s.ratio_var.unwrap_or(f64::NAN), 1.02, 0.12));
            checks.push(Check::above(format!("{tag} eps / perfect eps"), s.epsilon_j.unwrap_or(f64::NAN) / perfect, 1.0));
            // FAST mode scales every slot by the same constant, so its ratios
            // cannot depend on tau. A short EXACT ensemble on the estimated
            // channel shows how the substituted law fares with real estimates.
            let mut exact = cfg.with_horizon_hours(1.0);
            exact.mode = SimMode::Exact;
            exact.trials = 40;
            let e = run_ensemble(&exact)?;
            checks.push(Check::within(format!("{tag} EXACT T=1h ratio_mean"), e.ratio_mean.unwrap_or(f64::NAN), 1.0, 0.05).info());
        }
    }
    Ok(CriterionReport { id: 10, title: "imperfect CSI (FAST)", checks })
}

/// EXACT-mode ensemble at `K = 16`, `T = 3 h`, reported next to the FAST
/// cell of criterion 1. Not part of the verdict.
pub fn exact_reference_cell(opts: &ValidationOptions) -> Result<CriterionReport> {
    let mut cfg = reference(opts, 16, 3.0);
    cfg.mode = SimMode::Exact;
    cfg.trials = opts.exact_trials;
    let s = run_ensemble(&cfg)?;
    Ok(CriterionReport {
        id: 0,
        title: "EXACT-mode reference cell K=16 T=3h (informational)",
        checks: vec![
            Check::within("ratio_mean", s.ratio_mean.unwrap_or(f64::NAN), 1.030, 0.02).info(),
            Check::within("ratio_var", s.ratio_var.unwrap_or(f64::NAN), 1.19, 0.15).info(),
        ],
    })
}

pub type CriterionFn = fn(&ValidationOptions) -> Result<CriterionReport>;

pub const CRITERIA: [CriterionFn; 10] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
];
