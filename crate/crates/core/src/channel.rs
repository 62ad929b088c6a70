//! Pathloss, small-scale fading and channel-matrix assembly, plus the
//! Gauss–Markov model used for imperfect channel estimates.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CellGeometry, Point};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Distance-dependent attenuation `l(x) = 2 L / (1 + (|x| / xbar)^beta)`.
///
/// `l_xbar` is linear (e.g. `10^-9.3` for -93 dB).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathlossModel {
    pub beta: f64,
    pub xbar_m: f64,
    pub l_xbar: f64,
}

impl PathlossModel {
    pub fn new(beta: f64, xbar_m: f64, l_xbar: f64) -> Result<Self> {
        if !(beta >= 2.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("pathloss exponent must be >= 2, got {beta}")));
        }
        if !(xbar_m > 0.0 && l_xbar > 0.0) {
            return Err(Error::Domain("cut-off distance and attenuation must be positive".into()));
        }
        Ok(PathlossModel { beta, xbar_m, l_xbar })
    }

    /// Attenuation at distance `r` meters.
    pub fn at_distance(&self, r: f64) -> f64 {
        2.0 * self.l_xbar / (1.0 + (r / self.xbar_m).powf(self.beta))
    }

    pub fn inverse_at_distance(&self, r: f64) -> f64 {
        (1.0 + (r / self.xbar_m).powf(self.beta)) / (2.0 * self.l_xbar)
    }

    pub fn inverse(&self, x: Point) -> f64 {
        self.inverse_at_distance(x.norm())
    }
}

pub fn pathloss(x: Point, model: &PathlossModel) -> f64 {
    model.at_distance(x.norm())
}

/// Average of `1/l` over the uniformly populated disc, in closed form.
pub fn mean_inverse_pathloss(model: &PathlossModel, geometry: &CellGeometry) -> f64 {
    let ratio = (geometry.radius_m / model.xbar_m).powf(model.beta);
    ratio / (2.0 * model.l_xbar) * (2.0 / (2.0 + model.beta) + 1.0 / ratio)
}

/// `n x k` matrix of i.i.d. `CN(0, 1)` entries.
pub fn draw_fading(n: usize, k: usize, rng: &mut impl Rng) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(n, k, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

/// Downlink channels `h_k = sqrt(l(x_k)) w_k` stacked as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: CMatrix,
    pub positions: Vec<Point>,
    pub attenuations: Vec<f64>,
    pub model: PathlossModel,
}

impl ChannelMatrix {
    pub fn antennas(&self) -> usize {
        self.entries.nrows()
    }

    pub fn users(&self) -> usize {
        self.entries.ncols()
    }

    /// `c = K / N`.
    pub fn load(&self) -> f64 {
        self.users() as f64 / self.antennas() as f64
    }
}

pub fn assemble_channels(positions: &[Point], fading: &CMatrix, model: &PathlossModel) -> Result<ChannelMatrix> {
    if fading.ncols() != positions.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} fading columns for {} users",
            fading.ncols(),
            positions.len()
        )));
    }
    let attenuations: Vec<f64> = positions.iter().map(|&p| pathloss(p, model)).collect();
    let mut entries = fading.clone();
    for (k, mut col) in entries.column_iter_mut().enumerate() {
        col *= C64::from(attenuations[k].sqrt());
    }
    Ok(ChannelMatrix {
        entries,
        positions: positions.to_vec(),
        attenuations,
        model: *model,
    })
}

/// Per-user channel estimation error magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsiQuality {
    pub tau: Vec<f64>,
}

impl CsiQuality {
    pub fn perfect(k: usize) -> Self {
        CsiQuality { tau: vec![0.0; k] }
    }

    pub fn uniform(k: usize, tau: f64) -> Result<Self> {
        Self::new(vec![tau; k])
    }

    pub fn new(tau: Vec<f64>) -> Result<Self> {
        if let Some((k, t)) = tau.iter().enumerate().find(|(_, t)| !(**t >= 0.0 && **t <= 1.0)) {
            return Err(Error::Domain(format!("tau[{k}] = {t} outside [0, 1]")));
        }
        Ok(CsiQuality { tau })
    }

    pub fn is_perfect(&self) -> bool {
        self.tau.iter().all(|&t| t == 0.0)
    }
}

/// Channel estimate `sqrt(l_k) (sqrt(1 - tau_k^2) w_k + tau_k e_k)` with
/// fresh `e_k ~ CN(0, I)`. Users with `tau_k = 0` keep the true column.
pub fn corrupt_csi(true_channels: &ChannelMatrix, quality: &CsiQuality, rng: &mut impl Rng) -> Result<ChannelMatrix> {
    let k = true_channels.users();
    if quality.tau.len() != k {
        return Err(Error::DimensionMismatch(format!("{} CSI qualities for {k} users", quality.tau.len())));
    }
    if let Some(u) = quality.tau.iter().position(|&t| t >= 1.0) {
        return Err(Error::Domain(format!(
            "tau[{u}] = 1 leaves the estimate uncorrelated with the channel"
        )));
    }
    let noise = draw_fading(true_channels.antennas(), k, rng);
    let mut est = true_channels.clone();
    for (u, mut col) in est.entries.column_iter_mut().enumerate() {
        let tau = quality.tau[u];
        if tau == 0.0 {
            continue;
        }
        let keep = C64::from((1.0 - tau * tau).sqrt());
        let fresh = C64::from(tau * true_channels.attenuations[u].sqrt());
        for (h, e) in col.iter_mut().zip(noise.column(u).iter()) {
            *h = *h * keep + *e * fresh;
        }
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::stream_rng;
    use crate::quad::integrate;
    use crate::units::db_to_linear;

    fn table_model() -> PathlossModel {
        PathlossModel::new(4.0, 25.0, db_to_linear(-93.0)).unwrap()
    }

    #[test]
    fn pathloss_reference_points() {
        let m = table_model();
        assert_eq!(pathloss(Point::ORIGIN, &m), 2.0 * m.l_xbar);
        assert!((pathloss(Point::new(25.0, 0.0), &m) / m.l_xbar - 1.0).abs() < 1e-15);
        let want = 2.0 * 10f64.powf(-9.3) / 160_001.0;
        assert!((pathloss(Point::new(0.0, 500.0), &m) / want - 1.0).abs() < 1e-12);
        assert!(PathlossModel::new(1.5, 25.0, 1e-9).is_err());
    }

    #[test]
    fn pathloss_monotone_and_bounded() {
        let m = table_model();
        let mut last = f64::INFINITY;
        for i in 0..1000 {
            let v = m.at_distance(i as f64);
            assert!(v > 0.0 && v <= 2.0 * m.l_xbar && v < last);
            last = v;
        }
    }

    /// Polar quadrature of the disc average `(1/pi R^2) int 1/l dA`.
    fn disc_average(m: &PathlossModel, radius: f64) -> f64 {
        let radial = integrate(|r| m.inverse_at_distance(r) * 2.0 * r, 0.0, radius, 0.0, 1e-13).unwrap();
        radial / (radius * radius)
    }

    #[test]
    fn mean_inverse_pathloss_matches_quadrature() {
        for beta in [2.0, 3.0, 4.0, 6.0] {
            let m = PathlossModel::new(beta, 25.0, db_to_linear(-93.0)).unwrap();
            let g = CellGeometry::new(500.0).unwrap();
            let closed = mean_inverse_pathloss(&m, &g);
            assert!((closed / disc_average(&m, 500.0) - 1.0).abs() < 1e-8, "beta {beta}");
        }
        let m = table_model();
        let g = CellGeometry::new(25.0).unwrap();
        let want = (2.0 / 6.0 + 1.0) / (2.0 * m.l_xbar);
        assert!((mean_inverse_pathloss(&m, &g) / want - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fading_statistics() {
        let a = draw_fading(4, 3, &mut stream_rng(1, 0));
        assert_eq!(a, draw_fading(4, 3, &mut stream_rng(1, 0)));
        let w = draw_fading(1000, 1000, &mut stream_rng(2, 0));
        let m2 = w.iter().map(|z| z.norm_sqr()).sum::<f64>() / 1e6;
        assert!((m2 - 1.0).abs() < 0.005);
        let re2 = w.iter().map(|z| z.re * z.re).sum::<f64>() / 1e6;
        assert!((re2 - 0.5).abs() < 0.005);
        for col in w.column_iter().take(10) {
            let n = col.norm_squared() / 1000.0;
            assert!((n - 1.0).abs() < 4.0 / 1000f64.sqrt());
        }
    }

    #[test]
    fn assembly_scales_columns() {
        let m = table_model();
        let n = 4096;
        let w = draw_fading(n, 2, &mut stream_rng(3, 0));
        let pos = [Point::ORIGIN, Point::ORIGIN];
        let h = assemble_channels(&pos, &w, &m).unwrap();
        let expect = (2.0 * m.l_xbar * n as f64).sqrt();
        for col in h.entries.column_iter() {
            assert!((col.norm() / expect - 1.0).abs() < 0.05);
        }
        let pos = [Point::new(20.0, 0.0), Point::new(0.0, 300.0)];
        let h = assemble_channels(&pos, &w, &m).unwrap();
        let ratio = h.entries.column(0).norm() / h.entries.column(1).norm();
        let want = (m.at_distance(20.0) / m.at_distance(300.0)).sqrt();
        assert!((ratio / want - 1.0).abs() < 0.05);
        let zero = assemble_channels(&pos, &CMatrix::zeros(8, 2), &m).unwrap();
        assert!(zero.entries.iter().all(|z| *z == C64::new(0.0, 0.0)));
        assert!(assemble_channels(&pos[..1], &w, &m).is_err());
    }

    #[test]
    fn perfect_csi_is_identity() {
        let m = table_model();
        let w = draw_fading(8, 3, &mut stream_rng(4, 0));
        let h = assemble_channels(&[Point::ORIGIN; 3], &w, &m).unwrap();
        let est = corrupt_csi(&h, &CsiQuality::perfect(3), &mut stream_rng(4, 1)).unwrap();
        assert_eq!(est, h);
        assert!(corrupt_csi(&h, &CsiQuality::uniform(3, 1.0).unwrap(), &mut stream_rng(4, 1)).is_err());
        assert!(CsiQuality::new(vec![0.1, 1.2]).is_err());
    }

    #[test]
    fn imperfect_csi_correlation_and_variance() {
        let m = table_model();
        let n = 100_000;
        let p = Point::new(100.0, 50.0);
        let l = pathloss(p, &m);
        for tau in [0.9999, 0.5] {
            let w = draw_fading(n, 1, &mut stream_rng(5, 0));
            let h = assemble_channels(&[p], &w, &m).unwrap();
            let est = corrupt_csi(&h, &CsiQuality::uniform(1, tau).unwrap(), &mut stream_rng(5, 1)).unwrap();
            let (a, b) = (h.entries.column(0), est.entries.column(0));
            let cross: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
            let corr = cross.re / (a.norm() * b.norm());
            let want = (1.0 - tau * tau).sqrt();
            // 3 sigma band for a sample correlation over n draws
            assert!((corr - want).abs() < 3.0 / (n as f64).sqrt(), "tau {tau}: {corr} vs {want}");
            let var = b.norm_squared() / n as f64;
            assert!((var / l - 1.0).abs() < 0.02);
        }
    }
}
