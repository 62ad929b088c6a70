//! TOML experiment files. Every key carries its unit in the name and all
//! dB and dBm values are converted to linear units when the file is turned
//! into an [`ExperimentConfig`].
//!
//! ```toml
//! [cell]
//! radius_m = 500.0
//! xbar_m = 25.0
//! beta = 4.0
//! l_xbar_db = -93.0
//! noise_dbm = -97.8
//!
//! [mobility]
//! step_m = 50.0
//! interval_s = 30.0
//!
//! [system]
//! users = 16
//! antennas = 32
//! rate = 1.5
//! scheme = "olp"
//!
//! [simulation]
//! horizon_h = 3.0
//! trials = 1000
//! seed = 1
//! mode = "fast"
//! ```
//!
//! Missing sections and keys take the values shown above.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::asymptotics::SchemeKind;
use crate::channel::PathlossModel;
use crate::energy::DEFAULT_THETA_TERMS;
use crate::error::{Error, Result};
use crate::geometry::{CellGeometry, WalkParams};
use crate::simkit::{ExperimentConfig, RateSpec, SimMode};
use crate::units::{db_to_linear, dbm_to_watts, hours_to_seconds};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellSection {
    pub radius_m: f64,
    pub xbar_m: f64,
    pub beta: f64,
    pub l_xbar_db: f64,
    pub noise_dbm: f64,
}

impl Default for CellSection {
    fn default() -> Self {
        CellSection {
            radius_m: 500.0,
            xbar_m: 25.0,
            beta: 4.0,
            l_xbar_db: -93.0,
            noise_dbm: -97.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilitySection {
    pub step_m: f64,
    pub interval_s: f64,
    /// Multiplies `step_m^2 / (4 interval_s)` in the theory.
    pub diffusion_factor: f64,
}

impl Default for MobilitySection {
    fn default() -> Self {
        MobilitySection {
            step_m: 50.0,
            interval_s: 30.0,
            diffusion_factor: 1.0,
        }
    }
}

/// Rate used when neither `rate` nor a range is given.
pub const DEFAULT_RATE: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub users: usize,
    pub antennas: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_max: Option<f64>,
    pub scheme: String,
    pub tau: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            users: 16,
            antennas: 32,
            rate: None,
            rate_min: None,
            rate_max: None,
            scheme: "olp".into(),
            tau: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub horizon_h: f64,
    /// Defaults to the walk interval.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot_s: Option<f64>,
    pub trials: u64,
    pub seed: u64,
    pub mode: String,
    pub theta_terms: usize,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            horizon_h: 3.0,
            slot_s: None,
            trials: 1000,
            seed: 1,
            mode: "fast".into(),
            theta_terms: DEFAULT_THETA_TERMS,
        }
    }
}

/// Grids for the battery and cell-radius tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSection {
    pub chi: f64,
    pub overhead_w: f64,
    pub schemes: Vec<String>,
    pub rate_grid: Vec<f64>,
    pub users_grid: Vec<usize>,
}

impl Default for PlanSection {
    fn default() -> Self {
        PlanSection {
            chi: 0.01,
            overhead_w: 18.0,
            schemes: vec!["olp".into(), "zf".into(), "rzf".into(), "mrt".into()],
            rate_grid: vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
            users_grid: vec![8, 16, 32, 64],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub cell: CellSection,
    pub mobility: MobilitySection,
    pub system: SystemSection,
    pub simulation: SimulationSection,
    pub plan: PlanSection,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = unknown_field(&msg).unwrap_or_else(|| "<file>".into());
            Error::config(field, msg)
        })?;
        file.experiment()?;
        file.plan_settings()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn scheme(&self) -> Result<SchemeKind> {
        self.system.scheme.parse()
    }

    pub fn rates(&self) -> Result<RateSpec> {
        let s = &self.system;
        match (s.rate, s.rate_min, s.rate_max) {
            (Some(rate), None, None) => Ok(RateSpec::Uniform { rate }),
            (None, Some(min), Some(max)) => Ok(RateSpec::Range { min, max }),
            (None, None, None) => Ok(RateSpec::Uniform { rate: DEFAULT_RATE }),
            (Some(_), _, _) => Err(Error::config("rate", "`rate` excludes `rate_min` and `rate_max`")),
            _ => Err(Error::config("rate_min", "`rate_min` and `rate_max` go together")),
        }
    }

    pub fn set_rates(&mut self, rates: RateSpec) {
        let s = &mut self.system;
        (s.rate, s.rate_min, s.rate_max) = match rates {
            RateSpec::Uniform { rate } => (Some(rate), None, None),
            RateSpec::Range { min, max } => (None, Some(min), Some(max)),
        };
    }

    /// Converts to simulator units and validates every field.
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let cell = &self.cell;
        let geometry = CellGeometry::new(cell.radius_m).map_err(|e| Error::config("radius_m", e.to_string()))?;
        let walk = WalkParams::new(self.mobility.step_m, self.mobility.interval_s)
            .map_err(|e| Error::config("mobility", e.to_string()))?
            .with_diffusion_factor(self.mobility.diffusion_factor);
        let model = PathlossModel::new(cell.beta, cell.xbar_m, db_to_linear(cell.l_xbar_db))
            .map_err(|e| Error::config("beta", e.to_string()))?;
        let sim = &self.simulation;
        let mode: SimMode = sim.mode.parse()?;
        let cfg = ExperimentConfig {
            geometry,
            walk,
            model,
            users: self.system.users,
            antennas: self.system.antennas,
            rates: self.rates()?,
            noise_w: dbm_to_watts(cell.noise_dbm),
            scheme: self.scheme()?,
            tau: self.system.tau,
            horizon_s: hours_to_seconds(sim.horizon_h),
            slot_s: sim.slot_s.unwrap_or(self.mobility.interval_s),
            trials: sim.trials,
            seed: sim.seed,
            mode,
            theta_terms: sim.theta_terms,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn plan_settings(&self) -> Result<PlanSettings> {
        let p = &self.plan;
        if !(p.chi > 0.0 && p.chi < 1.0) {
            return Err(Error::config("chi", format!("must lie in (0, 1), got {}", p.chi)));
        }
        if !(p.overhead_w >= 0.0 && p.overhead_w.is_finite()) {
            return Err(Error::config("overhead_w", "must be non-negative"));
        }
        if let Some(r) = p.rate_grid.iter().find(|r| !(**r > 0.0)) {
            return Err(Error::config("rate_grid", format!("rates must be positive, got {r}")));
        }
        if p.users_grid.contains(&0) {
            return Err(Error::config("users_grid", "user counts must be positive"));
        }
        let schemes = p
            .schemes
            .iter()
            .map(|s| s.parse().map_err(|_| Error::config("schemes", format!("unknown scheme `{s}`"))))
            .collect::<Result<Vec<SchemeKind>>>()?;
        Ok(PlanSettings {
            chi: p.chi,
            overhead_w: p.overhead_w,
            schemes,
            rate_grid: p.rate_grid.clone(),
            users_grid: p.users_grid.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanSettings {
    pub chi: f64,
    pub overhead_w: f64,
    pub schemes: Vec<SchemeKind>,
    pub rate_grid: Vec<f64>,
    pub users_grid: Vec<usize>,
}

fn unknown_field(msg: &str) -> Option<String> {
    let rest = msg.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}
