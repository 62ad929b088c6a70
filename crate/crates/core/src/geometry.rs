//! Circular cell geometry and the reflecting random walk users follow.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A position in the plane, in meters, with the base station at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(r: f64, angle: f64) -> Self {
        Point {
            x: r * angle.cos(),
            y: r * angle.sin(),
        }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub radius_m: f64,
}

impl CellGeometry {
    pub fn new(radius_m: f64) -> Result<Self> {
        if !(radius_m > 0.0 && radius_m.is_finite()) {
            return Err(Error::Domain(format!("cell radius must be positive, got {radius_m}")));
        }
        Ok(CellGeometry { radius_m })
    }

    pub fn area(&self) -> f64 {
        PI * self.radius_m * self.radius_m
    }

    pub fn contains(&self, p: Point) -> bool {
        p.norm() <= self.radius_m
    }
}

/// Step length and step interval of the walk.
///
/// `diffusion_m2_per_s` is the Brownian-limit constant `l^2 / (4 xi)`.
/// The kernel and the covariance series use [`WalkParams::effective_diffusion`],
/// which multiplies it by a calibration factor (1 by default).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    pub step_m: f64,
    pub interval_s: f64,
    pub diffusion_m2_per_s: f64,
    pub diffusion_factor: f64,
}

impl WalkParams {
    pub fn new(step_m: f64, interval_s: f64) -> Result<Self> {
        if !(step_m >= 0.0 && step_m.is_finite()) {
            return Err(Error::Domain(format!("step length must be non-negative, got {step_m}")));
        }
        if !(interval_s > 0.0 && interval_s.is_finite()) {
            return Err(Error::Domain(format!("step interval must be positive, got {interval_s}")));
        }
        Ok(WalkParams {
            step_m,
            interval_s,
            diffusion_m2_per_s: step_m * step_m / (4.0 * interval_s),
            diffusion_factor: 1.0,
        })
    }

    pub fn with_diffusion_factor(mut self, factor: f64) -> Self {
        self.diffusion_factor = factor;
        self
    }

    pub fn velocity_m_per_s(&self) -> f64 {
        self.step_m / self.interval_s
    }

    pub fn effective_diffusion(&self) -> f64 {
        self.diffusion_factor * self.diffusion_m2_per_s
    }
}

/// Time-ordered positions of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub positions: Vec<Point>,
    pub slot_duration_s: f64,
    pub user_index: usize,
}

/// Number of walk steps that fit in `horizon_s`.
pub fn slot_count(horizon_s: f64, interval_s: f64) -> usize {
    // Guard against 10800/30 evaluating to 359.999...
    ((horizon_s / interval_s) + 1e-9).floor() as usize
}

/// Uniform point on the disc (square-root radius transform).
pub fn sample_uniform_point(geometry: &CellGeometry, rng: &mut impl Rng) -> Point {
    let r = geometry.radius_m * rng.random::<f64>().sqrt();
    let angle = 2.0 * PI * rng.random::<f64>();
    Point::polar(r, angle)
}

pub fn sample_initial_positions(k: usize, geometry: &CellGeometry, rng: &mut impl Rng) -> Vec<Point> {
    (0..k).map(|_| sample_uniform_point(geometry, rng)).collect()
}

/// One step of length `step_m` in a uniform direction, specularly reflected
/// at the cell boundary as many times as needed.
pub fn step_walk(position: Point, params: &WalkParams, geometry: &CellGeometry, rng: &mut impl Rng) -> Point {
    let angle = 2.0 * PI * rng.random::<f64>();
    let (s, c) = angle.sin_cos();
    reflect_move(position, params.step_m * c, params.step_m * s, geometry.radius_m)
}

/// Moves from `p` by `(dx, dy)` inside the disc of radius `radius`,
/// bouncing specularly off the boundary circle.
pub fn reflect_move(p: Point, mut dx: f64, mut dy: f64, radius: f64) -> Point {
    let r2 = radius * radius;
    let (mut px, mut py) = (p.x, p.y);
    for _ in 0..64 {
        let (nx, ny) = (px + dx, py + dy);
        if nx * nx + ny * ny <= r2 {
            return Point::new(nx, ny);
        }
        let a = dx * dx + dy * dy;
        let b = 2.0 * (px * dx + py * dy);
        let c = (px * px + py * py - r2).min(0.0);
        let disc = (b * b - 4.0 * a * c).max(0.0);
        // Positive root; written to avoid cancellation when b > 0.
        let t = if b > 0.0 {
            (-2.0 * c) / (b + disc.sqrt())
        } else {
            (-b + disc.sqrt()) / (2.0 * a)
        };
        let t = t.clamp(0.0, 1.0);
        let (hx, hy) = (px + t * dx, py + t * dy);
        let norm = hx.hypot(hy);
        let (ux, uy) = (hx / norm, hy / norm);
        let (rx, ry) = ((1.0 - t) * dx, (1.0 - t) * dy);
        let along = rx * ux + ry * uy;
        dx = rx - 2.0 * along * ux;
        dy = ry - 2.0 * along * uy;
        // Land exactly on the circle so rounding cannot leave the disc.
        px = ux * radius;
        py = uy * radius;
    }
    clamp_to_disc(Point::new(px + dx, py + dy), radius)
}

fn clamp_to_disc(p: Point, radius: f64) -> Point {
    let n = p.norm();
    if n <= radius {
        p
    } else {
        Point::new(p.x * radius / n, p.y * radius / n)
    }
}

/// Walks `floor(T / xi)` steps from `start`.
pub fn generate_trajectory(
    start: Point,
    params: &WalkParams,
    geometry: &CellGeometry,
    horizon_s: f64,
    user_index: usize,
    rng: &mut impl Rng,
) -> Trajectory {
    let steps = slot_count(horizon_s, params.interval_s);
    let mut positions = Vec::with_capacity(steps + 1);
    let mut p = start;
    positions.push(p);
    for _ in 0..steps {
        p = step_walk(p, params, geometry, rng);
        debug_assert!(p.norm() <= geometry.radius_m * (1.0 + 1e-12));
        positions.push(p);
    }
    Trajectory {
        positions,
        slot_duration_s: params.interval_s,
        user_index,
    }
}

/// Writes trajectories as CSV rows `trial,user,slot,x_m,y_m`.
pub fn write_trajectories_csv<W: Write + ?Sized>(
    out: &mut W,
    trial: u64,
    trajectories: &[Trajectory],
    header: bool,
) -> io::Result<()> {
    if header {
        writeln!(out, "trial,user,slot,x_m,y_m")?;
    }
    for t in trajectories {
        for (slot, p) in t.positions.iter().enumerate() {
            writeln!(out, "{trial},{},{slot},{},{}", t.user_index, p.x, p.y)?;
        }
    }
    Ok(())
}
