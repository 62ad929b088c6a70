//! Special functions: integer-order Bessel functions of the first kind,
//! zeros of `J_1` and of `J_m'`, and the Gaussian tail function with its
//! inverse.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Below this magnitude the ascending power series is used.
const SERIES_LIMIT: f64 = 12.0;
/// Above this magnitude the Hankel expansion of `J_0`, `J_1` is accurate to
/// machine precision.
const HANKEL_LIMIT: f64 = 25.0;

/// Bessel function of the first kind `J_n(x)` for integer `n >= 0`.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(order, -x);
        return if order % 2 == 1 { -v } else { v };
    }
    if x == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        return series(order, x);
    }
    if x > HANKEL_LIMIT && (order as f64) < x {
        let j0 = hankel(0, x);
        if order == 0 {
            return j0;
        }
        let mut prev = j0;
        let mut cur = hankel(1, x);
        for k in 1..order {
            let next = 2.0 * k as f64 / x * cur - prev;
            prev = cur;
            cur = next;
        }
        return cur;
    }
    miller(order, x)
}

/// Derivative `J_m'(x)` via `J_m' = J_{m-1} - (m/x) J_m`, with `J_0' = -J_1`.
pub fn bessel_j_prime(order: u32, x: f64) -> f64 {
    if order == 0 {
        return -bessel_j(1, x);
    }
    if x == 0.0 {
        return if order == 1 { 0.5 } else { 0.0 };
    }
    bessel_j(order - 1, x) - order as f64 / x * bessel_j(order, x)
}

fn series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / k as f64;
    }
    let q = half * half;
    let mut sum = term;
    let n = order as f64;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (n + k));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > q.sqrt() {
            break;
        }
        if k > 300.0 {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion for `J_0` and `J_1`.
fn hankel(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        // a_k alternates into P (even k) and Q (odd k) with sign (-1)^{floor(k/2)}
        let signed = if (k / 2) % 2 == 0 { term } else { -term };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
    }
    let chi = x - (0.5 * order as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Miller backward recurrence normalized by `J_0 + 2 sum J_2k = 1`.
fn miller(order: u32, x: f64) -> f64 {
    let top = (order as f64).max(x);
    let mut start = (top + 30.0 + (40.0 * top).sqrt()) as u32;
    start += start % 2;
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        let idx = k - 1;
        if idx == order {
            wanted = cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    if order == 0 {
        wanted = cur;
    }
    norm += cur;
    wanted / norm
}

/// Ordered positive zeros of a Bessel-type function.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselZeros {
    values: Vec<f64>,
}

impl BesselZeros {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }
}

const ZERO_TOL: f64 = 1e-12;
const SCAN_STEP: f64 = 0.5;

/// First `count` positive zeros of `J_1`.
pub fn j1_zeros(count: usize) -> BesselZeros {
    BesselZeros {
        values: scan_zeros(|x| bessel_j(1, x), 1.0, count),
    }
}

/// First `count` non-trivial positive zeros of `J_m'`. For `m = 0` these
/// coincide with the zeros of `J_1`.
pub fn bessel_jp_zeros(order: u32, count: usize) -> BesselZeros {
    if order == 0 {
        return j1_zeros(count);
    }
    // J_m increases on (0, j'_{m,1}) and j'_{m,1} > m.
    let start = (order as f64).max(1.0);
    BesselZeros {
        values: scan_zeros(|x| bessel_j_prime(order, x), start, count),
    }
}

fn scan_zeros(f: impl Fn(f64) -> f64, start: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut a = start;
    let mut fa = f(a);
    while out.len() < count {
        let b = a + SCAN_STEP;
        let fb = f(b);
        if fa == 0.0 {
            out.push(a);
        } else if fa.signum() != fb.signum() {
            out.push(bisect(&f, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    out
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    while hi - lo > ZERO_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gaussian tail `Q(x) = P(Z > x)` for standard normal `Z`.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of the Gaussian tail function.
pub fn q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("q_inv requires 0 < p < 1, got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Safeguarded Newton on a bracket; Q is strictly decreasing.
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    let mut x = initial_guess(p);
    for _ in 0..200 {
        let r = q_function(x) - p;
        if r > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if r.abs() < 1e-16 * p.max(1e-300) || hi - lo < 1e-15 {
            break;
        }
        let density = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        let newton = x + r / density;
        x = if density > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(x)
}

fn initial_guess(p: f64) -> f64 {
    // Tail approximation from the logistic-like bound; refined by Newton.
    let t = (-2.0 * p.min(1.0 - p).ln()).sqrt();
    let z = t - (2.515517 + 0.802853 * t + 0.010328 * t * t)
        / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
    if p < 0.5 {
        z
    } else {
        -z
    }
}
