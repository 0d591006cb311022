//! Initial data `(u0, u1)` on a physical mesh.
//!
//! `u0` is piecewise linear between mesh nodes and constant outside the hull.
//! `u1` is piecewise constant: `u1[k]` is the value on the cell `(x_k, x_{k+1})`
//! (the last entry is never read) and zero outside the hull. At a node where
//! the slope or the velocity jumps, point queries return the left limit.

use crate::error::{Error, Result};
use crate::quad::gauss5;
use crate::wavespeed::WaveSpeed;

#[derive(Clone, Debug, PartialEq)]
pub struct InitialData {
    mesh: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
}

/// Mesh cells per unit width used by [`InitialData::gaussian`].
pub const GAUSSIAN_CELLS_PER_WIDTH: usize = 1000;
/// Half-length of the Gaussian support, in widths.
pub const GAUSSIAN_HALF_SPAN: f64 = 6.0;

impl InitialData {
    pub fn new(mesh: Vec<f64>, u0: Vec<f64>, u1: Vec<f64>) -> Result<Self> {
        if mesh.len() < 2 {
            return Err(Error::InvalidData("mesh needs at least two points".into()));
        }
        if u0.len() != mesh.len() || u1.len() != mesh.len() {
            return Err(Error::InvalidData(format!(
                "array lengths differ: mesh {}, u0 {}, u1 {}",
                mesh.len(),
                u0.len(),
                u1.len()
            )));
        }
        if mesh.iter().chain(&u0).chain(&u1).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite entry".into()));
        }
        if let Some(k) = mesh.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidData(format!(
                "mesh not strictly increasing at index {}",
                k + 1
            )));
        }
        Ok(InitialData { mesh, u0, u1 })
    }

    /// `u0 = u1 = 0` on `[lo, hi]`.
    pub fn zero(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![0.0; 2], vec![0.0; 2])
    }

    /// `u0 = amplitude * exp(-((x - center)/width)^2)`, `u1 = 0`.
    pub fn gaussian(amplitude: f64, width: f64, center: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::validation("data.width", "must be positive"));
        }
        let cells = 2 * GAUSSIAN_HALF_SPAN as usize * GAUSSIAN_CELLS_PER_WIDTH;
        let lo = center - GAUSSIAN_HALF_SPAN * width;
        let dx = 2.0 * GAUSSIAN_HALF_SPAN * width / cells as f64;
        let mesh: Vec<f64> = (0..=cells).map(|k| lo + dx * k as f64).collect();
        let u0 = mesh
            .iter()
            .map(|&x| {
                let s = (x - center) / width;
                amplitude * (-s * s).exp()
            })
            .collect();
        Self::new(mesh, u0, vec![0.0; cells + 1])
    }

    /// `u0 = 0`, `u1 = height` on `(a, b)`.
    pub fn box_velocity(height: f64, a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::validation("data.b", "must exceed data.a"));
        }
        Self::new(vec![a, b], vec![0.0; 2], vec![height, 0.0])
    }

    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    pub fn u0_nodes(&self) -> &[f64] {
        &self.u0
    }

    pub fn u1_cells(&self) -> &[f64] {
        &self.u1
    }

    pub fn hull(&self) -> (f64, f64) {
        (self.mesh[0], self.mesh[self.mesh.len() - 1])
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.len() - 1
    }

    /// Data with the velocity reversed, i.e. the initial data of `u(-t, x)`.
    pub fn time_reflected(&self) -> Self {
        InitialData {
            mesh: self.mesh.clone(),
            u0: self.u0.clone(),
            u1: self.u1.iter().map(|v| -v).collect(),
        }
    }

    /// Index `k` of the cell `(x_k, x_{k+1}]` containing `x`, if inside the hull.
    fn cell_left_limit(&self, x: f64) -> Option<usize> {
        let (lo, hi) = self.hull();
        if !(x > lo && x <= hi) {
            return None;
        }
        let k = self.mesh.partition_point(|&m| m < x);
        Some(k - 1)
    }

    /// Slope of `u0` on cell `k`.
    #[inline]
    pub fn cell_slope(&self, k: usize) -> f64 {
        (self.u0[k + 1] - self.u0[k]) / (self.mesh[k + 1] - self.mesh[k])
    }

    #[inline]
    pub fn cell_velocity(&self, k: usize) -> f64 {
        self.u1[k]
    }

    pub fn u0_at(&self, x: f64) -> f64 {
        let (lo, hi) = self.hull();
        if x <= lo {
            return self.u0[0];
        }
        if x >= hi {
            return self.u0[self.u0.len() - 1];
        }
        let k = self.mesh.partition_point(|&m| m <= x) - 1;
        self.u0_in_cell(k, x)
    }

    #[inline]
    pub fn u0_in_cell(&self, k: usize, x: f64) -> f64 {
        let theta = (x - self.mesh[k]) / (self.mesh[k + 1] - self.mesh[k]);
        self.u0[k] + theta * (self.u0[k + 1] - self.u0[k])
    }

    pub fn slope_at(&self, x: f64) -> f64 {
        self.cell_left_limit(x).map_or(0.0, |k| self.cell_slope(k))
    }

    pub fn u1_at(&self, x: f64) -> f64 {
        self.cell_left_limit(x).map_or(0.0, |k| self.u1[k])
    }

    /// `∫_a^b u1 dx` for the piecewise constant velocity.
    pub fn u1_integral(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.u1_integral(b, a);
        }
        let (lo, hi) = self.hull();
        let (a, b) = (a.max(lo), b.min(hi));
        if b <= a {
            return 0.0;
        }
        let first = self.mesh.partition_point(|&m| m <= a).saturating_sub(1);
        let mut acc = 0.0;
        for k in first..self.n_cells() {
            let (l, r) = (self.mesh[k], self.mesh[k + 1]);
            if l >= b {
                break;
            }
            let len = r.min(b) - l.max(a);
            if len > 0.0 {
                acc += self.u1[k] * len;
            }
        }
        acc
    }

    /// Riemann variables inside cell `k` at `x`.
    #[inline]
    pub fn rs_in_cell(&self, ws: &WaveSpeed, k: usize, x: f64) -> (f64, f64) {
        let cs = ws.c(self.u0_in_cell(k, x)) * self.cell_slope(k);
        let v = self.u1[k];
        (v + cs, v - cs)
    }
}

/// `(R0, S0) = (u1 + c(u0) u0_x, u1 - c(u0) u0_x)` at `x`.
pub fn initial_rs(data: &InitialData, ws: &WaveSpeed, x: f64) -> (f64, f64) {
    match data.cell_left_limit(x) {
        Some(k) => data.rs_in_cell(ws, k, x),
        None => (0.0, 0.0),
    }
}

/// `E0 = 1/2 ∫ (u1^2 + c(u0)^2 u0_x^2) dx`, integrated cell by cell.
pub fn total_energy(data: &InitialData, ws: &WaveSpeed) -> f64 {
    (0..data.n_cells())
        .map(|k| cell_energy(data, ws, k, data.mesh[k], data.mesh[k + 1]))
        .sum()
}

/// Energy `1/4 ∫ (R^2 + S^2)` over `[a, b]` inside cell `k`.
pub(crate) fn cell_energy(data: &InitialData, ws: &WaveSpeed, k: usize, a: f64, b: f64) -> f64 {
    let v = data.u1[k];
    let s = data.cell_slope(k);
    let kinetic = 0.5 * v * v * (b - a);
    if s == 0.0 {
        return kinetic;
    }
    kinetic
        + 0.5
            * s
            * s
            * gauss5(a, b, |x| {
                let c = ws.c(data.u0_in_cell(k, x));
                c * c
            })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_speed() -> WaveSpeed {
        WaveSpeed::constant(1.0).unwrap()
    }

    #[test]
    fn rejects_bad_meshes() {
        assert!(InitialData::new(vec![0.0], vec![0.0], vec![0.0]).is_err());
        assert!(InitialData::new(vec![0.0, 0.0], vec![0.0; 2], vec![0.0; 2]).is_err());
        assert!(InitialData::new(vec![0.0, 1.0], vec![0.0; 3], vec![0.0; 2]).is_err());
        assert!(InitialData::new(vec![0.0, f64::NAN], vec![0.0; 2], vec![0.0; 2]).is_err());
    }

    #[test]
    fn zero_data() {
        let d = InitialData::zero(-1.0, 1.0).unwrap();
        let ws = unit_speed();
        assert_eq!(initial_rs(&d, &ws, 0.3), (0.0, 0.0));
        assert_eq!(total_energy(&d, &ws), 0.0);
    }

    #[test]
    fn box_velocity_values() {
        let d = InitialData::box_velocity(1.0, 0.0, 1.0).unwrap();
        let ws = unit_speed();
        assert_eq!(initial_rs(&d, &ws, 0.5), (1.0, 1.0));
        assert_eq!(initial_rs(&d, &ws, 1.5), (0.0, 0.0));
        assert_eq!(initial_rs(&d, &ws, -0.5), (0.0, 0.0));
        // left limits at the jumps
        assert_eq!(d.u1_at(0.0), 0.0);
        assert_eq!(d.u1_at(1.0), 1.0);
        assert!((total_energy(&d, &ws) - 0.5).abs() < 1e-15);
        assert!((d.u1_integral(0.25, 0.75) - 0.5).abs() < 1e-15);
        assert!((d.u1_integral(-3.0, 3.0) - 1.0).abs() < 1e-15);
        assert!((d.u1_integral(0.5, -3.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn gaussian_riemann_variables() {
        let d = InitialData::gaussian(1.0, 1.0, 0.0).unwrap();
        let (r, s) = initial_rs(&d, &unit_speed(), 1.0);
        let exact = 2.0 * (-1.0f64).exp();
        // slope of the chord over the cell ending at x = 1 (left limit)
        assert!((r + exact).abs() < 1e-3);
        assert!((s - exact).abs() < 1e-3);
        let dx = 1e-3_f64;
        let chord = ((-1.0f64).exp() - (-(1.0 - dx) * (1.0 - dx)).exp()) / dx;
        assert!((r - chord).abs() < 1e-12);
    }

    #[test]
    fn gaussian_energy() {
        let d = InitialData::gaussian(1.0, 1.0, 0.0).unwrap();
        let e = total_energy(&d, &unit_speed());
        let exact = 0.5 * (std::f64::consts::PI / 2.0).sqrt();
        assert!((e - exact).abs() < 1e-6, "{e}");
    }

    #[test]
    fn energy_matches_riemann_form() {
        let ws = WaveSpeed::liquid_crystal(1.5, 0.5).unwrap();
        let mesh: Vec<f64> = (0..40).map(|k| -2.0 + 0.1 * k as f64).collect();
        let u0: Vec<f64> = mesh.iter().map(|x| (3.0 * x).sin()).collect();
        let u1: Vec<f64> = mesh.iter().map(|x| x.cos() - 0.5).collect();
        let d = InitialData::new(mesh, u0, u1).unwrap();
        let direct = total_energy(&d, &ws);
        let mut via_rs = 0.0;
        for k in 0..d.n_cells() {
            let (a, b) = (d.mesh()[k], d.mesh()[k + 1]);
            via_rs += gauss5(a, b, |x| {
                let (r, s) = d.rs_in_cell(&ws, k, x);
                0.25 * (r * r + s * s)
            });
        }
        assert!((direct - via_rs).abs() <= 1e-12 * direct);
    }

    #[test]
    fn time_reflection_flips_velocity() {
        let d = InitialData::box_velocity(2.0, 0.0, 1.0).unwrap();
        let r = d.time_reflected();
        assert_eq!(r.u1_at(0.5), -2.0);
        assert_eq!(r.u0_at(0.5), 0.0);
    }

    #[test]
    fn constant_extension() {
        let d = InitialData::new(vec![0.0, 1.0], vec![1.0, 3.0], vec![0.5, 0.0]).unwrap();
        assert_eq!(d.u0_at(-5.0), 1.0);
        assert_eq!(d.u0_at(5.0), 3.0);
        assert_eq!(d.u0_at(0.25), 1.5);
        assert_eq!(d.slope_at(5.0), 0.0);
        assert_eq!(d.slope_at(1.0), 2.0);
    }
}
