//! Ensemble-level checks of the simulator.

use mimo_energy::simkit::{run_ensemble, run_trial, ExperimentConfig, SimMode};

#[test]
fn exact_and_fast_means_agree_for_larger_systems() {
    let mut cfg = ExperimentConfig::reference_cell().with_users(32, 64).with_horizon_hours(1.0);
    cfg.trials = 60;
    let fast = run_ensemble(&cfg).unwrap();
    cfg.mode = SimMode::Exact;
    let exact = run_ensemble(&cfg).unwrap();
    let se = (exact.std_error_j.powi(2) + fast.std_error_j.powi(2)).sqrt();
    assert!((exact.mean_j - fast.mean_j).abs() < 3.0 * se, "{} vs {} (se {se})", exact.mean_j, fast.mean_j);
}

#[test]
fn identical_seeds_give_identical_statistics() {
    let mut cfg = ExperimentConfig::reference_cell();
    cfg.trials = 200;
    let a = run_ensemble(&cfg).unwrap();
    let b = run_ensemble(&cfg).unwrap();
    assert_eq!(a, b);
    cfg.seed += 1;
    assert_ne!(run_ensemble(&cfg).unwrap().mean_j, a.mean_j);
}

#[test]
fn ensemble_ratios_are_positive_and_cdf_sorted() {
    let mut cfg = ExperimentConfig::reference_cell();
    cfg.trials = 100;
    let s = run_ensemble(&cfg).unwrap();
    assert!(s.ratio_mean.unwrap() > 0.0 && s.ratio_var.unwrap() > 0.0);
    assert!(s.cdf().windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn exact_slots_meet_targets_through_the_trial() {
    // A trial errors out if any slot's allocation is infeasible, and the
    // allocation itself meets every target; a short EXACT run exercises both.
    let mut cfg = ExperimentConfig::reference_cell().with_users(8, 16).with_horizon_hours(0.25);
    cfg.mode = SimMode::Exact;
    let r = run_trial(&cfg, 0, true).unwrap();
    assert_eq!(r.slot_powers.unwrap().len(), 30);
}
