//! The image `γ` of the line `t = 0` in the characteristic plane.
//!
//! `X(x) = ∫_0^x (1 + R0^2)` and `Y(x) = -∫_0^x (1 + S0^2)`, sampled on the data
//! mesh (optionally subdivided) and extended by a margin of trivial data on
//! both sides. At data nodes the Riemann variables are the mean of the two
//! one-sided limits.

use crate::data::{total_energy, InitialData};
use crate::error::{Error, Result};
use crate::quad::gauss5;
use crate::wavespeed::WaveSpeed;

/// A point of `γ` with its boundary values; `p = q = 1` there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaPoint {
    pub x: f64,
    pub xc: f64,
    pub yc: f64,
    pub w: f64,
    pub z: f64,
    pub u: f64,
}

#[derive(Clone, Debug)]
pub struct BoundaryCurve {
    pub x: Vec<f64>,
    pub xg: Vec<f64>,
    pub yg: Vec<f64>,
    pub wbar: Vec<f64>,
    pub zbar: Vec<f64>,
    pub pbar: Vec<f64>,
    pub qbar: Vec<f64>,
    pub ubar: Vec<f64>,
    /// `u0_x` at the samples (node values are the mean of both sides).
    pub uxbar: Vec<f64>,
    /// `∫ R0^2/4 dx` over each sample interval.
    pub seg_minus: Vec<f64>,
    /// `∫ S0^2/4 dx` over each sample interval.
    pub seg_plus: Vec<f64>,
    pub e0: f64,
}

/// Integrals of `(1 + R^2, 1 + S^2, R^2/4, S^2/4)` over `[a, b]`.
fn segment_integrals(data: &InitialData, ws: &WaveSpeed, cell: Option<usize>, a: f64, b: f64) -> [f64; 4] {
    let len = b - a;
    match cell {
        None => [len, len, 0.0, 0.0],
        Some(k) => {
            let r2 = gauss5(a, b, |x| data.rs_in_cell(ws, k, x).0.powi(2));
            let s2 = gauss5(a, b, |x| data.rs_in_cell(ws, k, x).1.powi(2));
            [len + r2, len + s2, 0.25 * r2, 0.25 * s2]
        }
    }
}

pub fn build_boundary(data: &InitialData, ws: &WaveSpeed, refine: usize) -> Result<BoundaryCurve> {
    BoundaryCurve::build(data, ws, refine, 0.0)
}

impl BoundaryCurve {
    pub fn build(data: &InitialData, ws: &WaveSpeed, refine: usize, margin: f64) -> Result<Self> {
        if refine < 1 {
            return Err(Error::InvalidConfig("refine must be at least 1".into()));
        }
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(Error::InvalidConfig(format!("bad margin {margin}")));
        }
        let mesh = data.mesh();
        let n_cells = data.n_cells();
        let u_last = data.u0_nodes()[mesh.len() - 1];

        // samples and the data cell each following interval lies in
        let mut xs = Vec::with_capacity(n_cells * refine + 5);
        let mut cells: Vec<Option<usize>> = Vec::with_capacity(n_cells * refine + 4);
        // a jump at the hull ends is spread over one sample spacing, not the margin
        let first = (mesh[1] - mesh[0]) / refine as f64;
        let last = (mesh[n_cells] - mesh[n_cells - 1]) / refine as f64;
        if margin > 0.0 {
            xs.push(mesh[0] - margin);
            cells.push(None);
            if margin > first {
                xs.push(mesh[0] - first);
                cells.push(None);
            }
        }
        for k in 0..n_cells {
            let (a, b) = (mesh[k], mesh[k + 1]);
            for r in 0..refine {
                xs.push(a + (b - a) * r as f64 / refine as f64);
                cells.push(Some(k));
            }
        }
        xs.push(mesh[n_cells]);
        if margin > 0.0 {
            if margin > last {
                cells.push(None);
                xs.push(mesh[n_cells] + last);
            }
            cells.push(None);
            xs.push(mesh[n_cells] + margin);
        }
        let n = xs.len();

        let mut r_s = Vec::with_capacity(n);
        let mut ubar = Vec::with_capacity(n);
        let mut uxbar = Vec::with_capacity(n);
        let mut node = 0usize;
        for &x in &xs {
            while node < mesh.len() && mesh[node] < x {
                node += 1;
            }
            if node < mesh.len() && mesh[node] == x {
                let left = (node > 0).then(|| (data.rs_in_cell(ws, node - 1, x), data.cell_slope(node - 1)));
                let right = (node < n_cells).then(|| (data.rs_in_cell(ws, node, x), data.cell_slope(node)));
                let ((rl, sl), gl) = left.unwrap_or(((0.0, 0.0), 0.0));
                let ((rr, sr), gr) = right.unwrap_or(((0.0, 0.0), 0.0));
                r_s.push((0.5 * (rl + rr), 0.5 * (sl + sr)));
                ubar.push(data.u0_nodes()[node]);
                uxbar.push(0.5 * (gl + gr));
            } else if node == 0 || node == mesh.len() {
                r_s.push((0.0, 0.0));
                ubar.push(if node == 0 { data.u0_nodes()[0] } else { u_last });
                uxbar.push(0.0);
            } else {
                let k = node - 1;
                r_s.push(data.rs_in_cell(ws, k, x));
                ubar.push(data.u0_in_cell(k, x));
                uxbar.push(data.cell_slope(k));
            }
        }

        let mut xr = vec![0.0; n];
        let mut yr = vec![0.0; n];
        let mut seg_minus = Vec::with_capacity(n - 1);
        let mut seg_plus = Vec::with_capacity(n - 1);
        for s in 0..n - 1 {
            let [fx, fy, m, p] = segment_integrals(data, ws, cells[s], xs[s], xs[s + 1]);
            xr[s + 1] = xr[s] + fx;
            yr[s + 1] = yr[s] + fy;
            seg_minus.push(m);
            seg_plus.push(p);
        }

        // shift so that X = Y = 0 at x = 0
        let (ox, oy) = if 0.0 <= xs[0] {
            (xr[0] - xs[0], yr[0] - xs[0])
        } else if 0.0 >= xs[n - 1] {
            (xr[n - 1] - xs[n - 1], yr[n - 1] - xs[n - 1])
        } else {
            let s = xs.partition_point(|&v| v <= 0.0) - 1;
            let [fx, fy, _, _] = segment_integrals(data, ws, cells[s], xs[s], 0.0);
            (xr[s] + fx, yr[s] + fy)
        };
        let xg: Vec<f64> = xr.iter().map(|v| v - ox).collect();
        let yg: Vec<f64> = yr.iter().map(|v| oy - v).collect();

        let wbar = r_s.iter().map(|(r, _)| 2.0 * r.atan()).collect();
        let zbar = r_s.iter().map(|(_, s)| 2.0 * s.atan()).collect();

        Ok(BoundaryCurve {
            x: xs,
            xg,
            yg,
            wbar,
            zbar,
            pbar: vec![1.0; n],
            qbar: vec![1.0; n],
            ubar,
            uxbar,
            seg_minus,
            seg_plus,
            e0: total_energy(data, ws),
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xg[0], self.xg[self.len() - 1])
    }

    /// `(min Y, max Y)`.
    pub fn y_range(&self) -> (f64, f64) {
        (self.yg[self.len() - 1], self.yg[0])
    }

    pub fn point(&self, s: usize) -> GammaPoint {
        GammaPoint {
            x: self.x[s],
            xc: self.xg[s],
            yc: self.yg[s],
            w: self.wbar[s],
            z: self.zbar[s],
            u: self.ubar[s],
        }
    }

    fn lerp(&self, s: usize, theta: f64) -> GammaPoint {
        if theta == 0.0 || s + 1 == self.len() {
            return self.point(s);
        }
        let l = |v: &[f64]| v[s] + theta * (v[s + 1] - v[s]);
        GammaPoint {
            x: l(&self.x),
            xc: l(&self.xg),
            yc: l(&self.yg),
            w: l(&self.wbar),
            z: l(&self.zbar),
            u: l(&self.ubar),
        }
    }

    /// Point of `γ` with first coordinate `xc`.
    pub fn gamma_of_x(&self, xc: f64) -> Result<GammaPoint> {
        let (lo, hi) = self.x_range();
        if !(xc >= lo && xc <= hi) {
            return Err(Error::OutOfRange { value: xc, lo, hi });
        }
        let s = self
            .xg
            .partition_point(|&v| v <= xc)
            .saturating_sub(1)
            .min(self.len() - 2);
        let theta = ((xc - self.xg[s]) / (self.xg[s + 1] - self.xg[s])).clamp(0.0, 1.0);
        let mut g = self.lerp(s, theta);
        g.xc = xc;
        Ok(g)
    }

    /// Point of `γ` with second coordinate `yc`.
    pub fn gamma_of_y(&self, yc: f64) -> Result<GammaPoint> {
        let (lo, hi) = self.y_range();
        if !(yc >= lo && yc <= hi) {
            return Err(Error::OutOfRange { value: yc, lo, hi });
        }
        let s = self
            .yg
            .partition_point(|&v| v >= yc)
            .saturating_sub(1)
            .min(self.len() - 2);
        let theta = ((yc - self.yg[s]) / (self.yg[s + 1] - self.yg[s])).clamp(0.0, 1.0);
        let mut g = self.lerp(s, theta);
        g.yc = yc;
        Ok(g)
    }

    /// `φ(X)`, the graph function of `γ`.
    pub fn phi(&self, xc: f64) -> Result<f64> {
        self.gamma_of_x(xc).map(|g| g.yc)
    }
}

/// `max |tan(w̄/2) - tan(z̄/2) - 2 c(ū) u0_x|` over the samples.
pub fn check_f_identity(curve: &BoundaryCurve, ws: &WaveSpeed) -> f64 {
    (0..curve.len())
        .map(|s| {
            let lhs = (0.5 * curve.wbar[s]).tan() - (0.5 * curve.zbar[s]).tan();
            (lhs - 2.0 * ws.c(curve.ubar[s]) * curve.uxbar[s]).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn unit() -> WaveSpeed {
        WaveSpeed::constant(1.0).unwrap()
    }

    #[test]
    fn zero_data_is_the_antidiagonal() {
        let d = InitialData::zero(-2.0, 3.0).unwrap();
        let c = BoundaryCurve::build(&d, &unit(), 4, 1.0).unwrap();
        for s in 0..c.len() {
            assert!((c.xg[s] - c.x[s]).abs() < 1e-14);
            assert!((c.yg[s] + c.x[s]).abs() < 1e-14);
            assert_eq!((c.wbar[s], c.zbar[s]), (0.0, 0.0));
        }
        let g = c.gamma_of_x(0.3).unwrap();
        assert!((g.yc + 0.3).abs() < 1e-14);
        assert_eq!((g.w, g.z, g.u), (0.0, 0.0, 0.0));
        assert_eq!(check_f_identity(&c, &unit()), 0.0);
        assert_eq!(c.e0, 0.0);
    }

    #[test]
    fn box_velocity_curve() {
        let d = InitialData::box_velocity(1.0, 0.0, 1.0).unwrap();
        let c = build_boundary(&d, &unit(), 8).unwrap();
        let last = c.len() - 1;
        assert!((c.xg[last] - 2.0).abs() < 1e-14);
        assert!((c.yg[last] + 2.0).abs() < 1e-14);
        for s in 1..last {
            assert!((c.wbar[s] - FRAC_PI_2).abs() < 1e-15);
            assert!((c.zbar[s] - FRAC_PI_2).abs() < 1e-15);
        }
        assert!((c.gamma_of_x(2.0).unwrap().yc + 2.0).abs() < 1e-14);
        assert!(check_f_identity(&c, &unit()) < 1e-15);
        let m: f64 = c.seg_minus.iter().sum();
        let p: f64 = c.seg_plus.iter().sum();
        assert!((m - 0.25).abs() < 1e-15 && (p - 0.25).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_queries() {
        let d = InitialData::zero(0.0, 1.0).unwrap();
        let c = build_boundary(&d, &unit(), 1).unwrap();
        assert!(matches!(c.gamma_of_x(1.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(c.gamma_of_y(0.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn origin_outside_the_hull() {
        let d = InitialData::box_velocity(1.0, 2.0, 3.0).unwrap();
        let c = build_boundary(&d, &unit(), 2).unwrap();
        assert!((c.xg[0] - 2.0).abs() < 1e-14);
        assert!((c.yg[0] + 2.0).abs() < 1e-14);
        let d = InitialData::box_velocity(1.0, -3.0, -2.0).unwrap();
        let c = build_boundary(&d, &unit(), 2).unwrap();
        assert!((c.xg[c.len() - 1] + 2.0).abs() < 1e-14);
        assert!((c.xg[0] + 4.0).abs() < 1e-14);
    }
}
