//! Transition density of reflecting Brownian motion on the disc, expanded in
//! Neumann eigenfunctions `J_m(kappa r / R) cos(m phi)` with `J_m'(kappa) = 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{CellGeometry, Point, WalkParams};
use crate::specfun::{bessel_j, bessel_jp_zeros};

/// Relative size of the first omitted term above which an evaluation is
/// flagged as under-resolved.
pub const TAIL_WARNING: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
struct Mode {
    order: u32,
    kappa: f64,
    /// `w_m / (pi R^2 (1 - m^2/kappa^2) J_m(kappa)^2)` with `w_0 = 1`,
    /// `w_m = 2` folding the sine and cosine partners together.
    scale: f64,
}

/// Density value together with a truncation diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub density: f64,
    /// Bound on the first omitted term relative to the computed sum.
    pub tail_ratio: f64,
}

impl KernelValue {
    pub fn truncation_warning(&self) -> bool {
        self.tail_ratio > TAIL_WARNING
    }
}

#[derive(Debug, Clone)]
pub struct HeatKernel {
    radius_m: f64,
    diffusion: f64,
    max_order: u32,
    modes: Vec<Mode>,
    /// Omitted modes one step beyond the truncation in either index.
    frontier: Vec<Mode>,
}

impl HeatKernel {
    /// Keeps azimuthal orders `0..=max_order` and `radial` zeros per order,
    /// plus the constant eigenfunction.
    pub fn new(params: &WalkParams, geometry: &CellGeometry, max_order: u32, radial: usize) -> Result<Self> {
        if radial == 0 {
            return Err(Error::Domain("kernel needs at least one radial term".into()));
        }
        let area = geometry.area();
        let mode = |order: u32, kappa: f64| {
            let m = order as f64;
            let weight = if order == 0 { 1.0 } else { 2.0 };
            let j = bessel_j(order, kappa);
            Mode {
                order,
                kappa,
                scale: weight / (area * (1.0 - m * m / (kappa * kappa)) * j * j),
            }
        };
        let mut modes = Vec::with_capacity((max_order as usize + 1) * radial);
        let mut frontier = Vec::with_capacity(max_order as usize + 2 + radial);
        for m in 0..=max_order {
            let zeros = bessel_jp_zeros(m, radial + 1);
            modes.extend(zeros.values()[..radial].iter().map(|&k| mode(m, k)));
            frontier.push(mode(m, zeros.get(radial)));
        }
        let outer = max_order + 1;
        frontier.extend(bessel_jp_zeros(outer, radial).iter().map(|k| mode(outer, k)));
        Ok(HeatKernel {
            radius_m: geometry.radius_m,
            diffusion: params.effective_diffusion(),
            max_order,
            modes,
            frontier,
        })
    }

    /// Same number of azimuthal and radial terms, as used by the command line.
    pub fn with_terms(params: &WalkParams, geometry: &CellGeometry, terms: usize) -> Result<Self> {
        if terms == 0 {
            return Err(Error::Domain("kernel needs at least one term".into()));
        }
        Self::new(params, geometry, terms as u32 - 1, terms)
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len() + 1
    }

    fn uniform(&self) -> f64 {
        1.0 / (PI * self.radius_m * self.radius_m)
    }

    fn decay(&self, kappa: f64, t: f64) -> f64 {
        (-self.diffusion * kappa * kappa * t / (self.radius_m * self.radius_m)).exp()
    }

    /// `J_m(kappa r / R)` for every retained mode, in mode order.
    pub fn radial_profile(&self, r: f64) -> Vec<f64> {
        let rho = r / self.radius_m;
        self.modes.iter().map(|md| bessel_j(md.order, md.kappa * rho)).collect()
    }

    /// Density from precomputed radial profiles; `dphi` is the angle between
    /// the two points.
    pub fn density_from_profiles(&self, a: &[f64], b: &[f64], dphi: f64, t: f64) -> f64 {
        let dphi = dphi.abs();
        let cosines: Vec<f64> = (0..=self.max_order).map(|m| (m as f64 * dphi).cos()).collect();
        let mut sum = 0.0;
        for (i, md) in self.modes.iter().enumerate() {
            sum += md.scale * self.decay(md.kappa, t) * cosines[md.order as usize] * (a[i] * b[i]);
        }
        self.uniform() + sum
    }

    pub fn evaluate(&self, x: Point, x_prime: Point, t: f64) -> KernelValue {
        let a = self.radial_profile(x.norm());
        let b = self.radial_profile(x_prime.norm());
        let density = self.density_from_profiles(&a, &b, x.angle() - x_prime.angle(), t);
        // |J_m| <= 1 bounds every omitted eigenfunction product.
        let tail = self
            .frontier
            .iter()
            .map(|md| md.scale.abs() * self.decay(md.kappa, t))
            .fold(0.0, f64::max);
        let tail_ratio = if density.abs() > 0.0 { tail / density.abs() } else { f64::INFINITY };
        KernelValue { density, tail_ratio }
    }
}

/// Transition density from `x` to `x_prime` after `t` seconds, truncated to
/// `terms` azimuthal orders and `terms` radial zeros per order.
pub fn transition_probability(
    x: Point,
    x_prime: Point,
    t: f64,
    params: &WalkParams,
    geometry: &CellGeometry,
    terms: usize,
) -> Result<KernelValue> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("transition time must be positive, got {t}")));
    }
    if !geometry.contains(x) || !geometry.contains(x_prime) {
        return Err(Error::Domain("kernel points must lie in the cell".into()));
    }
    Ok(HeatKernel::with_terms(params, geometry, terms)?.evaluate(x, x_prime, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre;

    const R: f64 = 500.0;

    fn setup() -> (WalkParams, CellGeometry) {
        (WalkParams::new(50.0, 30.0).unwrap(), CellGeometry::new(R).unwrap())
    }

    /// Time at which `D t / R^2` equals `u`.
    fn time_for(params: &WalkParams, u: f64) -> f64 {
        u * R * R / params.effective_diffusion()
    }

    /// Polar product grid: Gauss-Legendre in r, equispaced in phi.
    fn polar_grid(nr: usize, nphi: usize) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for (r, w) in gauss_legendre(nr, 0.0, R) {
            for j in 0..nphi {
                let phi = 2.0 * PI * j as f64 / nphi as f64;
                out.push((r, phi, w * r * 2.0 * PI / nphi as f64));
            }
        }
        out
    }

    #[test]
    fn long_times_are_uniform() {
        let (p, g) = setup();
        let t = time_for(&p, 10.5);
        for (x, y) in [(Point::ORIGIN, Point::new(400.0, 10.0)), (Point::polar(490.0, 1.0), Point::polar(100.0, 2.0))] {
            let v = transition_probability(x, y, t, &p, &g, 20).unwrap();
            assert!((v.density * PI * R * R - 1.0).abs() < 1e-6);
            assert!(!v.truncation_warning());
        }
    }

    #[test]
    fn symmetric_in_its_arguments() {
        let (p, g) = setup();
        let k = HeatKernel::with_terms(&p, &g, 20).unwrap();
        let t = time_for(&p, 0.05);
        let pts = [Point::polar(120.0, 0.3), Point::polar(470.0, -2.0), Point::polar(10.0, 2.9)];
        for a in pts {
            for b in pts {
                assert_eq!(k.evaluate(a, b, t).density, k.evaluate(b, a, t).density);
            }
        }
    }

    #[test]
    fn integrates_to_one() {
        let (p, g) = setup();
        let k = HeatKernel::with_terms(&p, &g, 20).unwrap();
        let x = Point::polar(300.0, 0.7);
        let ax = k.radial_profile(x.norm());
        for u in [0.02, 0.1, 1.0] {
            let t = time_for(&p, u);
            let mut total = 0.0;
            for (r, phi, w) in polar_grid(60, 64) {
                let b = k.radial_profile(r);
                total += w * k.density_from_profiles(&ax, &b, x.angle() - phi, t);
            }
            assert!((total - 1.0).abs() < 1e-6, "u {u}: {total}");
        }
    }

    #[test]
    fn chapman_kolmogorov() {
        let (p, g) = setup();
        let k = HeatKernel::with_terms(&p, &g, 20).unwrap();
        let (x, z) = (Point::polar(200.0, 0.4), Point::polar(350.0, 2.5));
        let (ax, az) = (k.radial_profile(x.norm()), k.radial_profile(z.norm()));
        let (t, s) = (time_for(&p, 0.03), time_for(&p, 0.05));
        let mut total = 0.0;
        for (r, phi, w) in polar_grid(60, 64) {
            let b = k.radial_profile(r);
            total += w
                * k.density_from_profiles(&ax, &b, x.angle() - phi, t)
                * k.density_from_profiles(&b, &az, phi - z.angle(), s);
        }
        let direct = k.evaluate(x, z, t + s).density;
        assert!((total / direct - 1.0).abs() < 1e-4, "{total} vs {direct}");
    }

    #[test]
    fn non_negative_after_truncation() {
        let (p, g) = setup();
        let k = HeatKernel::with_terms(&p, &g, 30).unwrap();
        let x = Point::polar(250.0, 0.0);
        let ax = k.radial_profile(x.norm());
        for u in [0.01, 0.05, 0.5] {
            let t = time_for(&p, u);
            for i in 0..=25 {
                let b = k.radial_profile(R * i as f64 / 25.0);
                for j in 0..36 {
                    let phi = 2.0 * PI * j as f64 / 36.0;
                    let d = k.density_from_profiles(&ax, &b, -phi, t);
                    // floor at round-off relative to the uniform level
                    assert!(d * PI * R * R >= -1e-9, "u {u}, r {i}, phi {j}: {d}");
                }
            }
        }
    }

    #[test]
    fn short_times_raise_warning() {
        let (p, g) = setup();
        let v = transition_probability(Point::ORIGIN, Point::ORIGIN, 1.0, &p, &g, 5).unwrap();
        assert!(v.truncation_warning());
        assert!(transition_probability(Point::ORIGIN, Point::new(600.0, 0.0), 1.0, &p, &g, 5).is_err());
    }
}
