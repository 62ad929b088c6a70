//! Monte-Carlo engine. Each trial drops `K` users uniformly in the cell,
//! lets them random-walk over the horizon and sums the transmit power of
//! every slot into the consumed energy `E_T`.
//!
//! Two modes share the same trajectories:
//! * `Exact` redraws Rayleigh fading every slot and solves the configured
//!   precoder with exact power allocation.
//! * `Fast` uses the deterministic-equivalent power `c sigma^2 A(t) / eta`,
//!   so only the mobility randomness remains.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::{asymptotic_lambda, classical_rzf, eta_for, heuristic_design, imperfect_csi_eta, SchemeKind};
use crate::channel::{assemble_channels, corrupt_csi, draw_fading, ChannelMatrix, CsiQuality, PathlossModel};
use crate::energy::{outage_probability, scheme_energy, theta, EnergyLaw, MobilityContext, SchemeEnergy, ThetaSeries};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, map_indexed_sequential, stream_rng};
use crate::geometry::{sample_initial_positions, slot_count, step_walk, CellGeometry, Point, Trajectory, WalkParams};
use crate::precoding::{allocate, heuristic_directions, solve_olp_from, zf_directions, SinrTargets, OLP_MAX_ITER, OLP_TOL};
use crate::stats::{ks_p_value, ks_statistic, log_log_slope, mean, sample_variance, sorted};
use crate::units::{db_to_linear, dbm_to_watts, hours_to_seconds};

/// Fading draws use streams of a salted seed so that both modes see the
/// same trajectories for a given trial.
const FADING_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    Exact,
    Fast,
}

impl SimMode {
    pub fn name(self) -> &'static str {
        match self {
            SimMode::Exact => "exact",
            SimMode::Fast => "fast",
        }
    }
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(SimMode::Exact),
            "fast" => Ok(SimMode::Fast),
            _ => Err(Error::config("mode", format!("expected `exact` or `fast`, got `{s}`"))),
        }
    }
}

/// Rate targets in bit/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RateSpec {
    Uniform { rate: f64 },
    /// Rates evenly spaced over `[min, max]` in user order.
    Range { min: f64, max: f64 },
}

impl RateSpec {
    pub fn rates(&self, k: usize) -> Vec<f64> {
        match *self {
            RateSpec::Uniform { rate } => vec![rate; k],
            RateSpec::Range { min, max } if k > 1 => {
                (0..k).map(|i| min + (max - min) * i as f64 / (k - 1) as f64).collect()
            }
            RateSpec::Range { min, max } => vec![0.5 * (min + max); k],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub geometry: CellGeometry,
    pub walk: WalkParams,
    pub model: PathlossModel,
    pub users: usize,
    pub antennas: usize,
    pub rates: RateSpec,
    pub noise_w: f64,
    pub scheme: SchemeKind,
    /// Uniform CSI error `tau`; 0 is perfect CSI.
    pub tau: f64,
    pub horizon_s: f64,
    pub slot_s: f64,
    pub trials: u64,
    pub seed: u64,
    pub mode: SimMode,
    pub theta_terms: usize,
}

impl ExperimentConfig {
    /// Cell and walk parameters of the reference scenario with `K = 16`,
    /// `N = 32`, `r = 1.5` and a 3 hour horizon.
    pub fn reference_cell() -> Self {
        ExperimentConfig {
            geometry: CellGeometry { radius_m: 500.0 },
            walk: WalkParams::new(50.0, 30.0).expect("valid walk"),
            model: PathlossModel::new(4.0, 25.0, db_to_linear(-93.0)).expect("valid model"),
            users: 16,
            antennas: 32,
            rates: RateSpec::Uniform { rate: 1.5 },
            noise_w: dbm_to_watts(-97.8),
            scheme: SchemeKind::Olp,
            tau: 0.0,
            horizon_s: hours_to_seconds(3.0),
            slot_s: 30.0,
            trials: 1000,
            seed: 1,
            mode: SimMode::Fast,
            theta_terms: crate::energy::DEFAULT_THETA_TERMS,
        }
    }

    pub fn with_users(mut self, users: usize, antennas: usize) -> Self {
        self.users = users;
        self.antennas = antennas;
        self
    }

    pub fn with_horizon_hours(mut self, hours: f64) -> Self {
        self.horizon_s = hours_to_seconds(hours);
        self
    }

    pub fn load(&self) -> f64 {
        self.users as f64 / self.antennas as f64
    }

    /// Field-level checks. Field names follow the configuration file keys.
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.geometry.radius_m) {
            return Err(Error::config("radius_m", "must be positive"));
        }
        if !(self.walk.step_m >= 0.0 && self.walk.step_m.is_finite()) {
            return Err(Error::config("step_m", "must be non-negative"));
        }
        if !pos(self.walk.interval_s) {
            return Err(Error::config("interval_s", "must be positive"));
        }
        if !pos(self.walk.diffusion_factor) {
            return Err(Error::config("diffusion_factor", "must be positive"));
        }
        if !(self.model.beta >= 2.0) {
            return Err(Error::config("beta", "pathloss exponent must be at least 2"));
        }
        if !pos(self.model.xbar_m) || self.model.xbar_m >= self.geometry.radius_m {
            return Err(Error::config("xbar_m", "must be positive and smaller than the cell radius"));
        }
        if !pos(self.model.l_xbar) {
            return Err(Error::config("l_xbar_db", "must be finite"));
        }
        if self.users == 0 {
            return Err(Error::config("users", "need at least one user"));
        }
        if self.antennas == 0 {
            return Err(Error::config("antennas", "need at least one antenna"));
        }
        if self.users >= self.antennas {
            return Err(Error::config(
                "users",
                format!("the load K/N must be below 1, got {} users on {} antennas", self.users, self.antennas),
            ));
        }
        match self.rates {
            RateSpec::Uniform { rate } if !pos(rate) => return Err(Error::config("rate", "must be positive")),
            RateSpec::Range { min, max } if !(pos(min) && pos(max) && min <= max) => {
                return Err(Error::config("rate_min", "need 0 < rate_min <= rate_max"))
            }
            _ => {}
        }
        if !pos(self.noise_w) {
            return Err(Error::config("noise_dbm", "must be finite"));
        }
        if !(self.tau >= 0.0 && self.tau < 1.0) {
            return Err(Error::config("tau", format!("must lie in [0, 1), got {}", self.tau)));
        }
        if !(self.horizon_s >= 0.0 && self.horizon_s.is_finite()) {
            return Err(Error::config("horizon_h", "must be non-negative"));
        }
        if !pos(self.slot_s) {
            return Err(Error::config("slot_s", "must be positive"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "need at least one trial"));
        }
        if self.theta_terms == 0 {
            return Err(Error::config("theta_terms", "need at least one term"));
        }
        Ok(())
    }

    pub fn targets(&self) -> Result<SinrTargets> {
        SinrTargets::from_rates(self.rates.rates(self.users))
    }

    pub fn csi(&self) -> Result<CsiQuality> {
        CsiQuality::uniform(self.users, self.tau)
    }

    /// Targets the precoder is designed for: `gamma / (1 - tau^2)`.
    pub fn design_gamma(&self) -> Result<Vec<f64>> {
        let t2 = self.tau * self.tau;
        Ok(self.targets()?.gamma.iter().map(|g| g / (1.0 - t2)).collect())
    }

    /// Efficiency factor and targets entering `c sigma^2 A / eta`, with the
    /// imperfect-CSI substitution when `tau > 0`. `None` for classical RZF,
    /// whose power is not of that form.
    pub fn efficiency(&self) -> Result<Option<(f64, Vec<f64>)>> {
        if self.scheme == SchemeKind::RzfClassical {
            if self.tau > 0.0 {
                return Err(Error::Domain("rzf-classical has no imperfect-CSI equivalent".into()));
            }
            return Ok(None);
        }
        let gamma = self.targets()?.gamma;
        let c = self.load();
        if self.tau > 0.0 {
            imperfect_csi_eta(self.scheme, c, &gamma, &vec![self.tau; self.users]).map(Some)
        } else {
            Ok(Some((eta_for(self.scheme, c, &gamma)?, gamma)))
        }
    }

    pub fn mobility(&self) -> MobilityContext {
        MobilityContext {
            model: self.model,
            geometry: self.geometry,
            diffusion_m2_per_s: self.walk.effective_diffusion(),
            horizon_s: self.horizon_s,
        }
    }

    /// SHA-256 of the JSON serialization.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Theoretical law of `E_T` with its `Theta` series.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryLaw {
    pub summary: SchemeEnergy,
    pub law: EnergyLaw,
    pub theta: ThetaSeries,
}

pub fn theory_law(cfg: &ExperimentConfig) -> Result<TheoryLaw> {
    let Some((eta, gamma)) = cfg.efficiency()? else {
        return Err(Error::Domain("rzf-classical has no closed-form energy law".into()));
    };
    let ctx = cfg.mobility();
    let th = theta(&cfg.model, cfg.geometry.radius_m, ctx.diffusion_m2_per_s, cfg.horizon_s, cfg.theta_terms)?;
    let (summary, law) = scheme_energy(cfg.scheme, eta, cfg.load(), &gamma, cfg.noise_w, &ctx, th.value)?;
    Ok(TheoryLaw { summary, law, theta: th })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: u64,
    pub seed: u64,
    pub energy_j: f64,
    pub slot_powers: Option<Vec<f64>>,
}

/// Per-slot power evaluator. Holds what does not change across slots.
struct SlotPower<'a> {
    cfg: &'a ExperimentConfig,
    c: f64,
    gamma: Vec<f64>,
    design: SinrTargets,
    efficiency: Option<(f64, Vec<f64>)>,
    olp_eta: Option<f64>,
    csi: CsiQuality,
}

impl<'a> SlotPower<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let targets = cfg.targets()?;
        let design = SinrTargets {
            gamma: cfg.design_gamma()?,
            rates: targets.rates.clone(),
        };
        let c = cfg.load();
        let efficiency = match cfg.mode {
            SimMode::Fast => cfg.efficiency()?,
            SimMode::Exact => None,
        };
        let olp_eta = eta_for(SchemeKind::Olp, c, &design.gamma).ok();
        Ok(SlotPower {
            cfg,
            c,
            gamma: targets.gamma,
            design,
            efficiency,
            olp_eta,
            csi: cfg.csi()?,
        })
    }

    fn fast(&self, positions: &[Point]) -> Result<f64> {
        let m = &self.cfg.model;
        match &self.efficiency {
            Some((eta, gamma)) => {
                let a = positions.iter().zip(gamma).map(|(p, g)| g * m.inverse(*p)).sum::<f64>() / gamma.len() as f64;
                Ok(self.c * self.cfg.noise_w * a / eta)
            }
            None => {
                let l: Vec<f64> = positions.iter().map(|p| m.at_distance(p.norm())).collect();
                Ok(classical_rzf(&l, &self.gamma, self.c, self.cfg.noise_w)?.pbar_w)
            }
        }
    }

    fn exact(&self, positions: &[Point], rng: &mut impl Rng) -> Result<f64> {
        let cfg = self.cfg;
        let fading = draw_fading(cfg.antennas, cfg.users, rng);
        let truth = assemble_channels(positions, &fading, &cfg.model)?;
        let est = if self.csi.is_perfect() {
            truth
        } else {
            corrupt_csi(&truth, &self.csi, rng)?
        };
        exact_power(&est, cfg.scheme, &self.design, cfg.noise_w, self.olp_eta)
    }
}

/// Transmit power of `scheme` on one channel realization, with exact power
/// allocation meeting `targets`.
pub fn exact_power(
    ch: &ChannelMatrix,
    scheme: SchemeKind,
    targets: &SinrTargets,
    noise_w: f64,
    olp_eta: Option<f64>,
) -> Result<f64> {
    let c = ch.load();
    let l = &ch.attenuations;
    let sol = match scheme {
        SchemeKind::Olp => {
            let start: Vec<f64> = match olp_eta {
                Some(eta) => targets.gamma.iter().zip(l).map(|(g, li)| asymptotic_lambda(*g, *li, eta)).collect(),
                None => targets.gamma.clone(),
            };
            solve_olp_from(ch, targets, noise_w, OLP_TOL, OLP_MAX_ITER, &start)?
        }
        SchemeKind::Zf => allocate(ch, zf_directions(ch)?, targets, noise_w)?,
        _ => {
            let (alpha, rho) = heuristic_design(scheme, l, &targets.gamma, c, noise_w)?.expect("heuristic scheme");
            allocate(ch, heuristic_directions(ch, &alpha, rho)?, targets, noise_w)?
        }
    };
    Ok(sol.total_power)
}

fn label(err: Error, trial: u64, slot: usize) -> Error {
    match err {
        Error::Infeasible { scheme, reason } => Error::Infeasible {
            scheme,
            reason: format!("trial {trial}, slot {slot}: {reason}"),
        },
        other => other,
    }
}

/// Slot `j` starts after `floor(j slot_s / xi)` walk steps.
fn steps_before_slot(j: usize, slot_s: f64, interval_s: f64) -> usize {
    slot_count(j as f64 * slot_s, interval_s)
}

/// One trial: `E_T = sum_j P(t_j) slot_s` over `floor(T / slot_s)` slots.
pub fn run_trial(cfg: &ExperimentConfig, trial: u64, record_slots: bool) -> Result<TrialResult> {
    let power = SlotPower::new(cfg)?;
    run_trial_with(&power, trial, record_slots)
}

fn run_trial_with(power: &SlotPower<'_>, trial: u64, record_slots: bool) -> Result<TrialResult> {
    let cfg = power.cfg;
    let mut walk_rng = stream_rng(cfg.seed, trial);
    let mut fade_rng = stream_rng(cfg.seed ^ FADING_SALT, trial);
    let mut positions = sample_initial_positions(cfg.users, &cfg.geometry, &mut walk_rng);
    let slots = slot_count(cfg.horizon_s, cfg.slot_s);
    let mut steps = 0;
    let mut energy = 0.0;
    let mut record = record_slots.then(|| Vec::with_capacity(slots));
    for j in 0..slots {
        let target = steps_before_slot(j, cfg.slot_s, cfg.walk.interval_s);
        while steps < target {
            for p in positions.iter_mut() {
                *p = step_walk(*p, &cfg.walk, &cfg.geometry, &mut walk_rng);
            }
            steps += 1;
        }
        let p = match cfg.mode {
            SimMode::Fast => power.fast(&positions),
            SimMode::Exact => power.exact(&positions, &mut fade_rng),
        }
        .map_err(|e| label(e, trial, j))?;
        energy += p * cfg.slot_s;
        if let Some(r) = record.as_mut() {
            r.push(p);
        }
    }
    Ok(TrialResult {
        trial,
        seed: cfg.seed,
        energy_j: energy,
        slot_powers: record,
    })
}

/// Walker positions of one trial at the start of every slot, drawn from
/// the same stream as [`run_trial`].
pub fn trial_trajectories(cfg: &ExperimentConfig, trial: u64) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    let mut walk_rng = stream_rng(cfg.seed, trial);
    let mut positions = sample_initial_positions(cfg.users, &cfg.geometry, &mut walk_rng);
    let slots = slot_count(cfg.horizon_s, cfg.slot_s);
    let mut out: Vec<Trajectory> = (0..cfg.users)
        .map(|k| Trajectory {
            positions: Vec::with_capacity(slots + 1),
            slot_duration_s: cfg.slot_s,
            user_index: k,
        })
        .collect();
    let mut steps = 0;
    for j in 0..=slots {
        let target = steps_before_slot(j, cfg.slot_s, cfg.walk.interval_s);
        while steps < target {
            for p in positions.iter_mut() {
                *p = step_walk(*p, &cfg.walk, &cfg.geometry, &mut walk_rng);
            }
            steps += 1;
        }
        for (t, p) in out.iter_mut().zip(&positions) {
            t.positions.push(*p);
        }
    }
    Ok(out)
}

/// Energies of all trials in trial order, computed in parallel when the
/// `parallel` feature is on.
pub fn trial_energies(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let power = SlotPower::new(cfg)?;
    map_indexed(cfg.trials, |t| run_trial_with(&power, t, false).map(|r| r.energy_j))
        .into_iter()
        .collect()
}

pub fn trial_energies_sequential(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let power = SlotPower::new(cfg)?;
    map_indexed_sequential(cfg.trials, |t| run_trial_with(&power, t, false).map(|r| r.energy_j))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub mode: SimMode,
    pub scheme: SchemeKind,
    pub users: usize,
    pub horizon_s: f64,
    /// Trial energies in trial order.
    #[serde(skip)]
    pub energies: Vec<f64>,
    pub mean_j: f64,
    pub variance_j2: f64,
    pub std_error_j: f64,
    pub epsilon_j: Option<f64>,
    pub sigma_var: Option<f64>,
    /// `E[E_T] / eps`.
    pub ratio_mean: Option<f64>,
    /// `K VAR[E_T] / Sigma`.
    pub ratio_var: Option<f64>,
    pub ks_stat: Option<f64>,
    pub ks_p_value: Option<f64>,
}

impl EnsembleStats {
    pub fn from_energies(cfg: &ExperimentConfig, energies: Vec<f64>, law: Option<&EnergyLaw>) -> Result<Self> {
        if energies.len() < 2 {
            return Err(Error::config("trials", "an ensemble needs at least two trials"));
        }
        let m = mean(&energies);
        let v = sample_variance(&energies);
        let n = energies.len();
        let ks = law.map(|law| ks_statistic(&energies, |x| 1.0 - outage_probability(x, law)));
        Ok(EnsembleStats {
            mode: cfg.mode,
            scheme: cfg.scheme,
            users: cfg.users,
            horizon_s: cfg.horizon_s,
            mean_j: m,
            variance_j2: v,
            std_error_j: (v / n as f64).sqrt(),
            epsilon_j: law.map(|l| l.epsilon_j),
            sigma_var: law.map(|l| l.sigma_var),
            ratio_mean: law.map(|l| m / l.epsilon_j),
            ratio_var: law.map(|l| l.k_users as f64 * v / l.sigma_var),
            ks_stat: ks,
            ks_p_value: ks.map(|d| ks_p_value(d, n)),
            energies,
        })
    }

    /// Sorted energies, i.e. the empirical distribution function.
    pub fn cdf(&self) -> Vec<f64> {
        sorted(&self.energies)
    }
}

/// Whether a closed-form law exists for comparison.
fn has_theory(cfg: &ExperimentConfig) -> bool {
    cfg.scheme != SchemeKind::RzfClassical && cfg.walk.effective_diffusion() > 0.0 && cfg.horizon_s > 0.0
}

pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleStats> {
    if cfg.trials < 2 {
        return Err(Error::config("trials", "an ensemble needs at least two trials"));
    }
    let energies = trial_energies(cfg)?;
    let theory = if has_theory(cfg) { Some(theory_law(cfg)?) } else { None };
    EnsembleStats::from_energies(cfg, energies, theory.as_ref().map(|t| &t.law))
}

/// `Pr(E_T / T > alpha)` for each `alpha` in `grid` (watts).
pub fn empirical_ccdf(stats: &EnsembleStats, grid: &[f64]) -> Vec<(f64, f64)> {
    let s = stats.cdf();
    let n = s.len() as f64;
    grid.iter()
        .map(|&alpha| {
            let below = s.partition_point(|e| *e / stats.horizon_s <= alpha);
            (alpha, (s.len() - below) as f64 / n)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutageRow {
    pub alpha_w: f64,
    pub empirical: f64,
    pub theoretical: f64,
}

pub fn compare_outage(stats: &EnsembleStats, law: &EnergyLaw, grid: &[f64]) -> Vec<OutageRow> {
    empirical_ccdf(stats, grid)
        .into_iter()
        .map(|(alpha_w, empirical)| OutageRow {
            alpha_w,
            empirical,
            theoretical: outage_probability(alpha_w * stats.horizon_s, law),
        })
        .collect()
}

/// Evenly spaced mean powers covering the sample range with a 10% margin.
pub fn default_grid(stats: &EnsembleStats, points: usize) -> Vec<f64> {
    let s = stats.cdf();
    let (lo, hi) = (s[0] / stats.horizon_s, s[s.len() - 1] / stats.horizon_s);
    let pad = 0.1 * (hi - lo);
    let (a, b) = (lo - pad, hi + pad);
    (0..points).map(|i| a + (b - a) * i as f64 / (points.max(2) - 1) as f64).collect()
}

/// Largest gap between the two outage curves.
pub fn ccdf_sup_distance(rows: &[OutageRow]) -> f64 {
    rows.iter().map(|r| (r.empirical - r.theoretical).abs()).fold(0.0, f64::max)
}

/// Variance estimates over a range of user counts at fixed load.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingProbe {
    pub users: Vec<usize>,
    pub variances: Vec<f64>,
    pub slope: f64,
}

/// Users frozen on radial quantiles `R sqrt((k - 1/2) / K)` with evenly
/// spread angles.
pub fn quantile_positions(k: usize, geometry: &CellGeometry) -> Vec<Point> {
    (0..k)
        .map(|i| {
            let r = geometry.radius_m * ((i as f64 + 0.5) / k as f64).sqrt();
            Point::polar(r, 2.0 * std::f64::consts::PI * i as f64 / k as f64)
        })
        .collect()
}

/// Variance of the instantaneous power across fading draws at frozen
/// positions, for each `K` in `users` with `N = K / c`.
pub fn fading_variance_probe(base: &ExperimentConfig, users: &[usize], draws: u64) -> Result<ScalingProbe> {
    let c = base.load();
    let mut variances = Vec::with_capacity(users.len());
    for &k in users {
        let n = (k as f64 / c).round() as usize;
        let cfg = base.clone().with_users(k, n);
        cfg.validate()?;
        let design = SinrTargets {
            gamma: cfg.design_gamma()?,
            rates: cfg.rates.rates(k),
        };
        let olp_eta = eta_for(SchemeKind::Olp, cfg.load(), &design.gamma).ok();
        let positions = quantile_positions(k, &cfg.geometry);
        let csi = cfg.csi()?;
        let powers: Vec<f64> = map_indexed(draws, |d| {
            let mut rng = stream_rng(cfg.seed ^ FADING_SALT, (k as u64) << 32 | d);
            let truth = assemble_channels(&positions, &draw_fading(n, k, &mut rng), &cfg.model)?;
            let est = if csi.is_perfect() { truth } else { corrupt_csi(&truth, &csi, &mut rng)? };
            exact_power(&est, cfg.scheme, &design, cfg.noise_w, olp_eta)
        })
        .into_iter()
        .collect::<Result<_>>()?;
        variances.push(sample_variance(&powers));
    }
    Ok(probe(users, variances))
}

/// Variance of `E_T` from FAST ensembles for each `K` at fixed load.
pub fn mobility_variance_probe(base: &ExperimentConfig, users: &[usize]) -> Result<ScalingProbe> {
    let c = base.load();
    let mut variances = Vec::with_capacity(users.len());
    for &k in users {
        let mut cfg = base.clone().with_users(k, (k as f64 / c).round() as usize);
        cfg.mode = SimMode::Fast;
        variances.push(sample_variance(&trial_energies(&cfg)?));
    }
    Ok(probe(users, variances))
}

fn probe(users: &[usize], variances: Vec<f64>) -> ScalingProbe {
    let x: Vec<f64> = users.iter().map(|k| *k as f64).collect();
    ScalingProbe {
        users: users.to_vec(),
        slope: log_log_slope(&x, &variances),
        variances,
    }
}

/// Rows `trial,energy_j`.
pub fn write_results_csv<W: Write + ?Sized>(out: &mut W, energies: &[f64]) -> io::Result<()> {
    writeln!(out, "trial,energy_j")?;
    for (t, e) in energies.iter().enumerate() {
        writeln!(out, "{t},{e}")?;
    }
    Ok(())
}

/// Rows `alpha_w,empirical,theoretical`.
pub fn write_ccdf_csv<W: Write + ?Sized>(out: &mut W, rows: &[OutageRow]) -> io::Result<()> {
    writeln!(out, "alpha_w,empirical,theoretical")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.alpha_w, r.empirical, r.theoretical)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub config_digest: String,
    pub mode: SimMode,
    pub scheme: SchemeKind,
    pub trials: usize,
    pub mean_j: f64,
    pub variance_j2: f64,
    pub std_error_j: f64,
    pub epsilon: Option<f64>,
    pub sigma: Option<f64>,
    pub ratio_mean: Option<f64>,
    pub ratio_var: Option<f64>,
    pub ks_stat: Option<f64>,
    pub ks_p_value: Option<f64>,
}

impl RunSummary {
    pub fn new(cfg: &ExperimentConfig, stats: &EnsembleStats) -> Self {
        RunSummary {
            config_digest: cfg.digest(),
            mode: stats.mode,
            scheme: stats.scheme,
            trials: stats.energies.len(),
            mean_j: stats.mean_j,
            variance_j2: stats.variance_j2,
            std_error_j: stats.std_error_j,
            epsilon: stats.epsilon_j,
            sigma: stats.sigma_var,
            ratio_mean: stats.ratio_mean,
            ratio_var: stats.ratio_var,
            ks_stat: stats.ks_stat,
            ks_p_value: stats.ks_p_value,
        }
    }
}
