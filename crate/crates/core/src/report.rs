//! Theory reports and planning tables built from an experiment
//! configuration, with their CSV and JSON writers.

use std::io::{self, Write};

use serde::Serialize;

use crate::asymptotics::{eta_for, SchemeKind};
use crate::config::PlanSettings;
use crate::error::{Error, Result};
use crate::planner::{battery_level, optimal_cell_radius, CellEnergyInputs};
use crate::simkit::{theory_law, ExperimentConfig, RateSpec};
use crate::units::JOULES_PER_WATT_HOUR;
use crate::energy::SchemeEnergy;

/// Schemes listed by default in the theory report.
pub const REPORT_SCHEMES: [SchemeKind; 4] = [SchemeKind::Olp, SchemeKind::Mrt, SchemeKind::Zf, SchemeKind::RzfStatistical];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeRow {
    #[serde(flatten)]
    pub energy: SchemeEnergy,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryReport {
    pub config_digest: String,
    /// Values below belong to the first scheme of the table.
    pub scheme: String,
    pub epsilon_j: f64,
    pub epsilon_wh: f64,
    pub sigma_var: f64,
    pub theta: f64,
    pub terms_used: usize,
    pub theta_tail_estimate: f64,
    pub users: usize,
    pub horizon_s: f64,
    pub diffusion_m2_per_s: f64,
    pub schemes: Vec<SchemeRow>,
}

/// Mean and variance of `E_T` for each scheme. Any infeasible scheme is an
/// error naming it.
pub fn theory_report(cfg: &ExperimentConfig, schemes: &[SchemeKind]) -> Result<TheoryReport> {
    if schemes.is_empty() {
        return Err(Error::config("scheme", "no scheme selected"));
    }
    let mut rows = Vec::with_capacity(schemes.len());
    let mut first = None;
    for &s in schemes {
        let mut c = cfg.clone();
        c.scheme = s;
        let t = theory_law(&c)?;
        rows.push(SchemeRow {
            energy: t.summary,
            theta: t.theta.value,
        });
        first.get_or_insert(t.theta);
    }
    let th = first.expect("non-empty");
    let head = &rows[0].energy;
    Ok(TheoryReport {
        config_digest: cfg.digest(),
        scheme: head.scheme.clone(),
        epsilon_j: head.epsilon_j,
        epsilon_wh: head.epsilon_wh,
        sigma_var: head.sigma_var,
        theta: th.value,
        terms_used: th.terms_used,
        theta_tail_estimate: th.tail_estimate,
        users: cfg.users,
        horizon_s: cfg.horizon_s,
        diffusion_m2_per_s: cfg.walk.effective_diffusion(),
        schemes: rows,
    })
}

pub fn write_theory_csv<W: Write + ?Sized>(out: &mut W, report: &TheoryReport) -> io::Result<()> {
    writeln!(out, "scheme,eta,epsilon_j,epsilon_wh,sigma_var,std_dev_j,mean_power_w,theta")?;
    for r in &report.schemes {
        let e = &r.energy;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            e.scheme, e.eta, e.epsilon_j, e.epsilon_wh, e.sigma_var, e.std_dev_j, e.mean_power_w, r.theta
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryRow {
    pub scheme: SchemeKind,
    pub users: usize,
    pub antennas: usize,
    pub rate: f64,
    pub epsilon_j: f64,
    pub std_dev_j: f64,
    pub battery_j: f64,
    pub battery_wh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusRow {
    pub scheme: SchemeKind,
    pub users: usize,
    pub antennas: usize,
    pub load: f64,
    pub radius_m: f64,
    pub closed_form_m: Option<f64>,
    pub numeric_m: f64,
    pub used_numeric_fallback: bool,
    pub energy_per_area_j_m2: f64,
}

/// Grid points with no finite answer, e.g. MRT above its rate limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedPoint {
    pub scheme: SchemeKind,
    pub users: usize,
    pub rate: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PlanTables {
    pub battery: Vec<BatteryRow>,
    pub radius: Vec<RadiusRow>,
    pub skipped: Vec<SkippedPoint>,
}

fn skippable(e: &Error) -> bool {
    matches!(e, Error::Infeasible { .. } | Error::Config { .. } | Error::Domain(_))
}

/// Battery level over `rate_grid x users_grid` and the optimal radius over
/// `users_grid`, both at the configured antenna count and horizon.
pub fn plan_tables(cfg: &ExperimentConfig, plan: &PlanSettings) -> Result<PlanTables> {
    let mut out = PlanTables::default();
    for &scheme in &plan.schemes {
        for &k in &plan.users_grid {
            for &rate in &plan.rate_grid {
                let mut c = cfg.clone().with_users(k, cfg.antennas);
                c.scheme = scheme;
                c.rates = RateSpec::Uniform { rate };
                let row = c.validate().and_then(|_| theory_law(&c)).and_then(|t| {
                    let battery = battery_level(&t.law, plan.chi)?;
                    Ok(BatteryRow {
                        scheme,
                        users: k,
                        antennas: c.antennas,
                        rate,
                        epsilon_j: t.law.epsilon_j,
                        std_dev_j: t.law.std_dev(),
                        battery_j: battery,
                        battery_wh: battery / JOULES_PER_WATT_HOUR,
                    })
                });
                match row {
                    Ok(r) => out.battery.push(r),
                    Err(e) if skippable(&e) => out.skipped.push(SkippedPoint { scheme, users: k, rate, reason: e.to_string() }),
                    Err(e) => return Err(e),
                }
            }
            let mut c = cfg.clone().with_users(k, cfg.antennas);
            c.scheme = scheme;
            let row = c.validate().and_then(|_| radius_row(&c, plan.overhead_w));
            match row {
                Ok(r) => out.radius.push(r),
                Err(e) if skippable(&e) => out.skipped.push(SkippedPoint {
                    scheme,
                    users: k,
                    rate: f64::NAN,
                    reason: e.to_string(),
                }),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

fn radius_row(c: &ExperimentConfig, overhead_w: f64) -> Result<RadiusRow> {
    if c.scheme == SchemeKind::RzfClassical {
        return Err(Error::Domain("rzf-classical has no closed-form mean energy".into()));
    }
    let gamma = c.targets()?.gamma;
    let inputs = CellEnergyInputs {
        model: c.model,
        c: c.load(),
        eta: eta_for(c.scheme, c.load(), &gamma)?,
        gamma,
        noise_w: c.noise_w,
        horizon_s: c.horizon_s,
        overhead_w,
    };
    let opt = optimal_cell_radius(&inputs)?;
    Ok(RadiusRow {
        scheme: c.scheme,
        users: c.users,
        antennas: c.antennas,
        load: c.load(),
        radius_m: opt.radius_m,
        closed_form_m: opt.closed_form_m,
        numeric_m: opt.numeric_m,
        used_numeric_fallback: opt.used_numeric_fallback,
        energy_per_area_j_m2: opt.energy_per_area,
    })
}

pub fn write_battery_csv<W: Write + ?Sized>(out: &mut W, rows: &[BatteryRow]) -> io::Result<()> {
    writeln!(out, "scheme,users,antennas,rate,epsilon_j,std_dev_j,battery_j,battery_wh")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.scheme, r.users, r.antennas, r.rate, r.epsilon_j, r.std_dev_j, r.battery_j, r.battery_wh
        )?;
    }
    Ok(())
}

pub fn write_radius_csv<W: Write + ?Sized>(out: &mut W, rows: &[RadiusRow]) -> io::Result<()> {
    writeln!(out, "scheme,users,antennas,load,radius_m,closed_form_m,numeric_m,used_numeric_fallback,energy_per_area_j_m2")?;
    for r in rows {
        let closed = r.closed_form_m.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.scheme, r.users, r.antennas, r.load, r.radius_m, closed, r.numeric_m, r.used_numeric_fallback, r.energy_per_area_j_m2
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigFile;

    #[test]
    fn reference_report_has_four_schemes() {
        let cfg = ExperimentConfig::reference_cell();
        let r = theory_report(&cfg, &REPORT_SCHEMES).unwrap();
        assert_eq!(r.schemes.len(), 4);
        let eps: Vec<f64> = r.schemes.iter().map(|s| s.energy.epsilon_j).collect();
        // OLP and RZF coincide at equal rates; MRT is the most expensive
        assert!((eps[0] / eps[3] - 1.0).abs() < 1e-12);
        assert!(eps[1] > eps[2] && eps[2] > eps[0]);
    }

    #[test]
    fn mrt_above_rate_limit_is_named() {
        let mut cfg = ExperimentConfig::reference_cell();
        cfg.rates = RateSpec::Uniform { rate: 3f64.log2() };
        let err = theory_report(&cfg, &REPORT_SCHEMES).unwrap_err();
        assert!(matches!(&err, Error::Infeasible { scheme, .. } if scheme == "mrt"), "{err}");
    }

    #[test]
    fn larger_exponent_costs_more() {
        let base = ExperimentConfig::reference_cell();
        let mut six = base.clone();
        six.model.beta = 6.0;
        let a = theory_report(&base, &[SchemeKind::Olp]).unwrap();
        let b = theory_report(&six, &[SchemeKind::Olp]).unwrap();
        assert!(b.epsilon_j > a.epsilon_j && b.sigma_var > a.sigma_var);
    }

    #[test]
    fn battery_grows_with_rate_and_users() {
        let file = ConfigFile::parse("[system]\nantennas = 128\n[simulation]\nhorizon_h = 12.0\n").unwrap();
        let cfg = file.experiment().unwrap();
        let plan = file.plan_settings().unwrap();
        let t = plan_tables(&cfg, &plan).unwrap();
        for scheme in [SchemeKind::Olp, SchemeKind::Zf] {
            for &k in &plan.users_grid {
                let b: Vec<f64> = t.battery.iter().filter(|r| r.scheme == scheme && r.users == k).map(|r| r.battery_j).collect();
                assert_eq!(b.len(), plan.rate_grid.len());
                assert!(b.windows(2).all(|w| w[1] > w[0]));
            }
            for &rate in &plan.rate_grid {
                let b: Vec<f64> = t.battery.iter().filter(|r| r.scheme == scheme && r.rate == rate).map(|r| r.battery_j).collect();
                assert!(b.windows(2).all(|w| w[1] > w[0]));
            }
        }
        assert!(t.skipped.iter().any(|s| s.scheme == SchemeKind::Mrt));
        assert_eq!(t.radius.len(), plan.schemes.len() * plan.users_grid.len());
    }
}
