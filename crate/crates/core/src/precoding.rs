//! Finite-dimensional linear precoders.
//!
//! Every direction matrix used here has the form `C = H X` for a `K x K`
//! matrix `X`: `(sum_i a_i h_i h_i^H + N rho I)^{-1} H = H (A G + N rho I)^{-1}`
//! with `G = H^H H`, so all solves happen in user space. Directions are kept
//! un-normalized: the precoder is `V = C diag(sqrt(p))` and the transmitted
//! power is `sum_k p_k |c_k|^2`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::channel::{CMatrix, ChannelMatrix, C64};
use crate::error::{Error, Result};

/// Per-user SINR targets `gamma_k = 2^{r_k} - 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinrTargets {
    pub gamma: Vec<f64>,
    pub rates: Vec<f64>,
}

impl SinrTargets {
    pub fn from_rates(rates: Vec<f64>) -> Result<Self> {
        if let Some(r) = rates.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::Domain(format!("rates must be positive, got {r}")));
        }
        let gamma = rates.iter().map(|r| 2f64.powf(*r) - 1.0).collect();
        Ok(SinrTargets { gamma, rates })
    }

    pub fn uniform(k: usize, rate: f64) -> Result<Self> {
        Self::from_rates(vec![rate; k])
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn mean_gamma(&self) -> f64 {
        self.gamma.iter().sum::<f64>() / self.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSolution {
    /// Un-normalized directions `C`, one column per user.
    pub directions: CMatrix,
    /// Power coefficients `p` applied as `C diag(sqrt(p))`.
    pub user_powers: Vec<f64>,
    /// OLP Lagrange multipliers.
    pub multipliers: Option<Vec<f64>>,
    pub achieved_sinr: Vec<f64>,
    /// Power radiated towards each user, `p_k |c_k|^2`.
    pub radiated_power: Vec<f64>,
    /// `tr(V V^H)` in watts.
    pub total_power: f64,
    /// Maximum relative multiplier change per OLP iteration.
    pub change_history: Vec<f64>,
}

impl PrecoderSolution {
    pub fn precoder(&self) -> CMatrix {
        let mut v = self.directions.clone();
        for (k, mut col) in v.column_iter_mut().enumerate() {
            col *= C64::from(self.user_powers[k].sqrt());
        }
        v
    }

    pub fn iterations(&self) -> usize {
        self.change_history.len()
    }
}

/// `SINR_k = |h_k^H v_k|^2 / (sum_{i != k} |h_k^H v_i|^2 + sigma^2)`.
pub fn compute_sinr(channels: &ChannelMatrix, precoder: &CMatrix, noise_w: f64) -> Result<Vec<f64>> {
    let h = &channels.entries;
    if precoder.nrows() != h.nrows() || precoder.ncols() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "precoder {}x{} for channel {}x{}",
            precoder.nrows(),
            precoder.ncols(),
            h.nrows(),
            h.ncols()
        )));
    }
    let cross = h.adjoint() * precoder;
    Ok((0..h.ncols())
        .map(|k| {
            let row = cross.row(k);
            let total: f64 = row.iter().map(|z| z.norm_sqr()).sum();
            let signal = row[k].norm_sqr();
            signal / (total - signal + noise_w)
        })
        .collect())
}

fn gram(channels: &ChannelMatrix) -> CMatrix {
    channels.entries.adjoint() * &channels.entries
}

/// `(diag(a) G + shift I)^{-1}`.
fn user_space_inverse(g: &CMatrix, a: &[f64], shift: f64) -> Result<CMatrix> {
    let k = g.nrows();
    let mut m = g.clone();
    for (i, mut row) in m.row_iter_mut().enumerate() {
        row *= C64::from(a[i]);
    }
    for i in 0..k {
        m[(i, i)] += C64::from(shift);
    }
    m.lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular("regularized Gram operator".into()))
}

fn check_len(what: &str, got: usize, k: usize) -> Result<()> {
    if got != k {
        return Err(Error::DimensionMismatch(format!("{got} {what} for {k} users")));
    }
    Ok(())
}

/// `(sum_i alpha_i h_i h_i^H + N rho I)^{-1} H`.
pub fn heuristic_directions(channels: &ChannelMatrix, alpha: &[f64], rho: f64) -> Result<CMatrix> {
    check_len("weights", alpha.len(), channels.users())?;
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("regularization must be positive, got {rho}")));
    }
    if alpha.iter().any(|a| !(*a >= 0.0)) {
        return Err(Error::Domain("weights must be non-negative".into()));
    }
    let n = channels.antennas() as f64;
    let x = user_space_inverse(&gram(channels), alpha, n * rho)?;
    Ok(&channels.entries * x)
}

/// `H (H^H H)^{-1}`.
pub fn zf_directions(channels: &ChannelMatrix) -> Result<CMatrix> {
    if channels.users() > channels.antennas() {
        return Err(Error::Singular(format!(
            "zero forcing needs K <= N, got K = {} and N = {}",
            channels.users(),
            channels.antennas()
        )));
    }
    let chol = gram(channels)
        .cholesky()
        .ok_or_else(|| Error::Singular("channel matrix is rank deficient".into()))?;
    Ok(&channels.entries * chol.inverse())
}

/// Coefficients `p` making every SINR equal its target:
/// `p = sigma^2 D^{-1} 1` with `D_kk = |h_k^H c_k|^2 / gamma_k` and
/// `D_ki = -|h_k^H c_i|^2`.
pub fn exact_power_allocation(
    channels: &ChannelMatrix,
    directions: &CMatrix,
    targets: &SinrTargets,
    noise_w: f64,
) -> Result<Vec<f64>> {
    let k = channels.users();
    check_len("targets", targets.len(), k)?;
    if directions.shape() != channels.entries.shape() {
        return Err(Error::DimensionMismatch("directions and channel shapes differ".into()));
    }
    let cross = channels.entries.adjoint() * directions;
    let d = DMatrix::from_fn(k, k, |r, c| {
        let v = cross[(r, c)].norm_sqr();
        if r == c {
            v / targets.gamma[r]
        } else {
            -v
        }
    });
    let rhs = DVector::from_element(k, noise_w);
    let p = d
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("power allocation system".into()))?;
    if let Some(u) = p.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::infeasible(
            "power allocation",
            format!("user {u} would need power {:.3e} W", p[u]),
        ));
    }
    Ok(p.iter().copied().collect())
}

/// Assembles `V = C diag(sqrt(p))` and its bookkeeping.
pub fn build_solution(channels: &ChannelMatrix, directions: CMatrix, powers: Vec<f64>, noise_w: f64) -> Result<PrecoderSolution> {
    check_len("powers", powers.len(), directions.ncols())?;
    let radiated: Vec<f64> = directions
        .column_iter()
        .zip(&powers)
        .map(|(c, p)| p * c.norm_squared())
        .collect();
    let mut sol = PrecoderSolution {
        directions,
        user_powers: powers,
        multipliers: None,
        achieved_sinr: Vec::new(),
        total_power: radiated.iter().sum(),
        radiated_power: radiated,
        change_history: Vec::new(),
    };
    sol.achieved_sinr = compute_sinr(channels, &sol.precoder(), noise_w)?;
    Ok(sol)
}

/// Directions with exact power allocation.
pub fn allocate(channels: &ChannelMatrix, directions: CMatrix, targets: &SinrTargets, noise_w: f64) -> Result<PrecoderSolution> {
    let p = exact_power_allocation(channels, &directions, targets, noise_w)?;
    build_solution(channels, directions, p, noise_w)
}

/// Optimal linear precoder: the multipliers solve
/// `(1 + 1/gamma_k) lambda_k = 1 / h_k^H (sum_i lambda_i h_i h_i^H + N I)^{-1} h_k`.
/// Iteration starts from `lambda_k = gamma_k`.
pub fn solve_olp(
    channels: &ChannelMatrix,
    targets: &SinrTargets,
    noise_w: f64,
    tol: f64,
    max_iter: usize,
) -> Result<PrecoderSolution> {
    solve_olp_from(channels, targets, noise_w, tol, max_iter, &targets.gamma)
}

/// [`solve_olp`] started from given multipliers, e.g. their deterministic
/// equivalents. The fixed point is unique, so only the iteration count
/// depends on the start.
pub fn solve_olp_from(
    channels: &ChannelMatrix,
    targets: &SinrTargets,
    noise_w: f64,
    tol: f64,
    max_iter: usize,
    start: &[f64],
) -> Result<PrecoderSolution> {
    let k = channels.users();
    check_len("targets", targets.len(), k)?;
    check_len("starting multipliers", start.len(), k)?;
    if start.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("starting multipliers must be positive".into()));
    }
    let n = channels.antennas() as f64;
    let g = gram(channels);
    let share: Vec<f64> = targets.gamma.iter().map(|y| y / (1.0 + y)).collect();
    let mut lambda = start.to_vec();
    let mut history = Vec::new();
    let mut damping = 1.0;
    loop {
        // q_k = h_k^H (H L H^H + N I)^{-1} h_k = [G (L G + N I)^{-1}]_kk
        let q = &g * user_space_inverse(&g, &lambda, n)?;
        let mut change = 0.0f64;
        for i in 0..k {
            let target = share[i] / q[(i, i)].re;
            let next = (1.0 - damping) * lambda[i] + damping * target;
            change = change.max((next - lambda[i]).abs() / lambda[i]);
            lambda[i] = next;
        }
        if history.last().is_some_and(|&prev| change > prev) && damping == 1.0 {
            damping = 0.5;
        }
        history.push(change);
        if change < tol {
            break;
        }
        if history.len() >= max_iter {
            return Err(Error::NonConvergence {
                what: "optimal precoder multipliers",
                iterations: history.len(),
            });
        }
    }
    let directions = &channels.entries * user_space_inverse(&g, &lambda, n)?;
    let mut sol = allocate(channels, directions, targets, noise_w)?;
    sol.multipliers = Some(lambda);
    sol.change_history = history;
    Ok(sol)
}

pub const OLP_TOL: f64 = 1e-10;
pub const OLP_MAX_ITER: usize = 500;
