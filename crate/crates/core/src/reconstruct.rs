//! Physical-space reconstruction on level curves `t = τ` of the solved lattice.

use crate::charsolver::{crosses_odd_pi, CharGrid, Node};
use crate::error::{Error, Result};
use crate::wavespeed::WaveSpeed;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CurvePoint {
    pub xc: f64,
    pub yc: f64,
    pub x: f64,
    pub w: f64,
    pub z: f64,
    pub p: f64,
    pub q: f64,
    pub u: f64,
}

impl CurvePoint {
    fn lerp(&self, o: &CurvePoint, th: f64) -> CurvePoint {
        let l = |a: f64, b: f64| a + th * (b - a);
        CurvePoint {
            xc: l(self.xc, o.xc),
            yc: l(self.yc, o.yc),
            x: l(self.x, o.x),
            w: l(self.w, o.w),
            z: l(self.z, o.z),
            p: l(self.p, o.p),
            q: l(self.q, o.q),
            u: l(self.u, o.u),
        }
    }
}

/// The level set `{t = τ}` as a staircase polyline, ordered by increasing
/// `X - Y`, with the two energy masses carried by each segment.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelCurve {
    pub tau: f64,
    pub points: Vec<CurvePoint>,
    /// `∫ (1 - cos w) p / 8 dX` over each segment.
    pub seg_minus: Vec<f64>,
    /// `-∫ (1 - cos z) q / 8 dY` over each segment.
    pub seg_plus: Vec<f64>,
    /// Segment touches `1 + cos w = 0`.
    pub sing_w: Vec<bool>,
    /// Segment touches `1 + cos z = 0`.
    pub sing_z: Vec<bool>,
}

impl LevelCurve {
    pub fn n_segments(&self) -> usize {
        self.seg_minus.len()
    }

    pub fn total(&self) -> f64 {
        self.seg_minus.iter().sum::<f64>() + self.seg_plus.iter().sum::<f64>()
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.points[0].x, self.points[self.points.len() - 1].x)
    }

    #[inline]
    pub fn is_singular(&self, s: usize) -> bool {
        self.sing_w[s] || self.sing_z[s]
    }
}

fn node_point(n: &Node, xc: f64, yc: f64) -> CurvePoint {
    let s = &n.s;
    CurvePoint {
        xc,
        yc,
        x: s.x,
        w: s.w,
        z: s.z,
        p: s.p,
        q: s.q,
        u: s.u,
    }
}

fn foot_point(g: &crate::boundary::GammaPoint) -> CurvePoint {
    CurvePoint {
        xc: g.xc,
        yc: g.yc,
        x: g.x,
        w: g.w,
        z: g.z,
        p: 1.0,
        q: 1.0,
        u: g.u,
    }
}

/// First index in `lo..hi` where `pred` fails, `pred` being monotone.
fn partition(mut lo: usize, mut hi: usize, pred: impl Fn(usize) -> bool) -> usize {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

fn flags_for(a: &CurvePoint, b: &CurvePoint, sing_tol: f64) -> (bool, bool) {
    let sw = 1.0 + a.w.cos() < sing_tol || 1.0 + b.w.cos() < sing_tol || crosses_odd_pi(a.w, b.w);
    let sz = 1.0 + a.z.cos() < sing_tol || 1.0 + b.z.cos() < sing_tol || crosses_odd_pi(a.z, b.z);
    (sw, sz)
}

/// Trace `{t = τ}` through the lattice by interpolation along cell edges.
pub fn extract_level_curve(grid: &CharGrid, tau: f64) -> Result<LevelCurve> {
    if !(tau >= 0.0 && tau <= grid.horizon) {
        return Err(Error::OutOfHorizon {
            tau,
            horizon: grid.horizon,
        });
    }
    if tau == 0.0 {
        return Ok(initial_curve(grid));
    }

    let mut pts: Vec<CurvePoint> = Vec::new();
    // crossings on vertical edges
    for (i, col) in grid.columns.iter().enumerate() {
        let k = col.nodes.partition_point(|n| n.s.t < tau);
        if k == col.nodes.len() {
            continue;
        }
        let upper = &col.nodes[k];
        let (lower, t0) = if k == 0 {
            (foot_point(&col.foot), 0.0)
        } else {
            let n = &col.nodes[k - 1];
            (node_point(n, grid.xc(i), grid.yc(col.j0 + k - 1)), n.s.t)
        };
        let th = (tau - t0) / (upper.s.t - t0);
        pts.push(lower.lerp(&node_point(upper, grid.xc(i), grid.yc(col.j0 + k)), th));
    }
    // crossings on horizontal edges
    for (j, &i0) in grid.row_start.iter().enumerate() {
        let end = partition(i0, grid.nx + 1, |i| grid.node(i, j).is_some());
        if end == i0 {
            continue;
        }
        let k = partition(i0, end, |i| grid.node(i, j).unwrap().s.t < tau);
        if k == end {
            continue;
        }
        let upper = grid.node(k, j).unwrap();
        let (left, t0) = if k == i0 {
            (foot_point(&grid.row_feet[j]), 0.0)
        } else {
            let n = grid.node(k - 1, j).unwrap();
            (node_point(n, grid.xc(k - 1), grid.yc(j)), n.s.t)
        };
        let th = (tau - t0) / (upper.s.t - t0);
        pts.push(left.lerp(&node_point(upper, grid.xc(k), grid.yc(j)), th));
    }
    if pts.len() < 2 {
        return Err(Error::OutOfHorizon {
            tau,
            horizon: grid.horizon,
        });
    }

    pts.sort_by(|a, b| (a.xc - a.yc).total_cmp(&(b.xc - b.yc)).then(a.xc.total_cmp(&b.xc)));
    let eps = 1e-12 * grid.h;
    pts.dedup_by(|b, a| (a.xc - b.xc).abs() <= eps && (a.yc - b.yc).abs() <= eps);
    for k in 1..pts.len() {
        pts[k].x = pts[k].x.max(pts[k - 1].x);
    }

    let n = pts.len();
    let mut seg_minus = Vec::with_capacity(n - 1);
    let mut seg_plus = Vec::with_capacity(n - 1);
    let mut sing_w = Vec::with_capacity(n - 1);
    let mut sing_z = Vec::with_capacity(n - 1);
    for s in 0..n - 1 {
        let (a, b) = (&pts[s], &pts[s + 1]);
        let dx = (b.xc - a.xc).max(0.0);
        let dy = (a.yc - b.yc).max(0.0);
        seg_minus.push(0.0625 * ((1.0 - a.w.cos()) * a.p + (1.0 - b.w.cos()) * b.p) * dx);
        seg_plus.push(0.0625 * ((1.0 - a.z.cos()) * a.q + (1.0 - b.z.cos()) * b.q) * dy);
        let (fw, fz) = flags_for(a, b, grid.sing_tol);
        sing_w.push(fw);
        sing_z.push(fz);
    }
    Ok(LevelCurve {
        tau,
        points: pts,
        seg_minus,
        seg_plus,
        sing_w,
        sing_z,
    })
}

/// The data curve itself, with the exact per-interval masses of the data.
fn initial_curve(grid: &CharGrid) -> LevelCurve {
    let c = &grid.curve;
    let points: Vec<CurvePoint> = (0..c.len()).map(|s| foot_point(&c.point(s))).collect();
    let (sing_w, sing_z): (Vec<bool>, Vec<bool>) = points
        .windows(2)
        .map(|p| flags_for(&p[0], &p[1], grid.sing_tol))
        .unzip();
    LevelCurve {
        tau: 0.0,
        points,
        seg_minus: c.seg_minus.clone(),
        seg_plus: c.seg_plus.clone(),
        sing_w,
        sing_z,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSlice {
    pub tau: f64,
    pub xs: Vec<f64>,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
    pub ux: Vec<f64>,
    pub edens: Vec<f64>,
    pub mdens: Vec<f64>,
    pub singular: Vec<bool>,
    pub singular_intervals: Vec<(f64, f64)>,
}

impl TimeSlice {
    /// The slice of `u(-t, x)`, built from a solution of the time-reflected problem.
    pub fn reflected(mut self) -> TimeSlice {
        self.tau = -self.tau;
        for v in self.ut.iter_mut().chain(self.mdens.iter_mut()) {
            *v = -*v;
        }
        self
    }
}

/// Values reconstructed at one `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub u: f64,
    pub ut: f64,
    pub ux: f64,
    pub edens: f64,
    pub mdens: f64,
    pub singular: bool,
}

/// `u_t`, `u_x` and the densities from the angles at a regular point.
#[inline]
pub fn point_values(w: f64, z: f64, u: f64, c: f64) -> Sample {
    let (sw, cw) = w.sin_cos();
    let (sz, cz) = z.sin_cos();
    let r = sw / (1.0 + cw);
    let s = sz / (1.0 + cz);
    Sample {
        u,
        ut: 0.5 * (r + s),
        ux: (r - s) / (2.0 * c),
        edens: 0.25 * (r * r + s * s),
        mdens: (s * s - r * r) / (4.0 * c),
        singular: false,
    }
}

/// Index of the segment containing `x`, if `x` lies inside the curve's hull.
fn locate(curve: &LevelCurve, x: f64) -> Option<(usize, f64)> {
    let pts = &curve.points;
    let (lo, hi) = curve.x_range();
    if !(x >= lo && x <= hi) || pts.len() < 2 {
        return None;
    }
    let s = (pts.partition_point(|p| p.x <= x).max(1) - 1).min(pts.len() - 2);
    let (a, b) = (pts[s].x, pts[s + 1].x);
    let th = if b > a {
        ((x - a) / (b - a)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Some((s, th))
}

pub fn sample_curve(curve: &LevelCurve, ws: &WaveSpeed, x: f64) -> Sample {
    let pts = &curve.points;
    match locate(curve, x) {
        None => {
            let end = if x < pts[0].x { &pts[0] } else { &pts[pts.len() - 1] };
            Sample {
                u: end.u,
                ut: 0.0,
                ux: 0.0,
                edens: 0.0,
                mdens: 0.0,
                singular: false,
            }
        }
        Some((s, th)) => {
            let p = pts[s].lerp(&pts[s + 1], th);
            if curve.is_singular(s) {
                Sample {
                    u: p.u,
                    ut: 0.0,
                    ux: 0.0,
                    edens: 0.0,
                    mdens: 0.0,
                    singular: true,
                }
            } else {
                point_values(p.w, p.z, p.u, ws.c(p.u))
            }
        }
    }
}

/// Merged `x`-extents of singular segments.
pub fn singular_intervals(curve: &LevelCurve) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for s in 0..curve.n_segments() {
        if !curve.is_singular(s) {
            continue;
        }
        let (a, b) = (curve.points[s].x, curve.points[s + 1].x);
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

pub fn slice_curve(curve: &LevelCurve, ws: &WaveSpeed, xs: &[f64]) -> TimeSlice {
    let samples: Vec<Sample> = xs.iter().map(|&x| sample_curve(curve, ws, x)).collect();
    TimeSlice {
        tau: curve.tau,
        xs: xs.to_vec(),
        u: samples.iter().map(|s| s.u).collect(),
        ut: samples.iter().map(|s| s.ut).collect(),
        ux: samples.iter().map(|s| s.ux).collect(),
        edens: samples.iter().map(|s| s.edens).collect(),
        mdens: samples.iter().map(|s| s.mdens).collect(),
        singular: samples.iter().map(|s| s.singular).collect(),
        singular_intervals: singular_intervals(curve),
    }
}

pub fn slice(grid: &CharGrid, tau: f64, xs: &[f64]) -> Result<TimeSlice> {
    Ok(slice_curve(&extract_level_curve(grid, tau)?, &grid.ws, xs))
}

/// Uniformly spaced sample points covering the level curve.
pub fn uniform_xs(curve: &LevelCurve, spacing: f64) -> Vec<f64> {
    let (lo, hi) = curve.x_range();
    let n = ((hi - lo) / spacing).ceil().max(1.0) as usize;
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyMeasure {
    pub breakpoints: Vec<f64>,
    /// Mass of interval `k`: `(-∞, b0]`, `(b0, b1]`, ..., `(b_last, ∞)`.
    pub mu_minus: Vec<f64>,
    pub mu_plus: Vec<f64>,
    pub total: f64,
}

/// Distribute segment masses over the intervals cut by `breakpoints`.
///
/// A segment's mass is spread uniformly over its `x`-extent; a segment of zero
/// extent sitting exactly on a breakpoint goes to the interval on its left.
pub fn measures_on_curve(curve: &LevelCurve, breakpoints: &[f64]) -> Result<EnergyMeasure> {
    if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidConfig("breakpoints must be strictly increasing".into()));
    }
    let m = breakpoints.len() + 1;
    let mut mu_minus = vec![0.0; m];
    let mut mu_plus = vec![0.0; m];
    for s in 0..curve.n_segments() {
        let (a, b) = (curve.points[s].x, curve.points[s + 1].x);
        let (mm, mp) = (curve.seg_minus[s], curve.seg_plus[s]);
        if mm == 0.0 && mp == 0.0 {
            continue;
        }
        let first = breakpoints.partition_point(|&v| v < a);
        if b <= a {
            mu_minus[first] += mm;
            mu_plus[first] += mp;
            continue;
        }
        let last = breakpoints.partition_point(|&v| v < b);
        for k in first..=last {
            let lo = if k == 0 { a } else { breakpoints[k - 1].max(a) };
            let hi = if k == m - 1 { b } else { breakpoints[k].min(b) };
            let frac = ((hi - lo) / (b - a)).max(0.0);
            mu_minus[k] += mm * frac;
            mu_plus[k] += mp * frac;
        }
    }
    let total = mu_minus.iter().sum::<f64>() + mu_plus.iter().sum::<f64>();
    Ok(EnergyMeasure {
        breakpoints: breakpoints.to_vec(),
        mu_minus,
        mu_plus,
        total,
    })
}

pub fn energy_measures(grid: &CharGrid, tau: f64, breakpoints: &[f64]) -> Result<EnergyMeasure> {
    measures_on_curve(&extract_level_curve(grid, tau)?, breakpoints)
}

/// Energy of the absolutely continuous part: masses of segments away from
/// `1 + cos w = 0` (backward part) and `1 + cos z = 0` (forward part).
pub fn energy_abs_on_curve(curve: &LevelCurve) -> f64 {
    (0..curve.n_segments())
        .map(|s| {
            let a = if curve.sing_w[s] { 0.0 } else { curve.seg_minus[s] };
            let b = if curve.sing_z[s] { 0.0 } else { curve.seg_plus[s] };
            a + b
        })
        .sum()
}

pub fn energy_at_time(grid: &CharGrid, tau: f64) -> Result<f64> {
    Ok(energy_abs_on_curve(&extract_level_curve(grid, tau)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryCurve;
    use crate::charsolver::{solve_domain, SolverConfig};
    use crate::data::InitialData;
    use std::f64::consts::FRAC_PI_2;

    fn grid(data: &InitialData, ws: &WaveSpeed, h: f64, t: f64) -> CharGrid {
        let curve = BoundaryCurve::build(data, ws, 8, ws.kappa * t + 0.5).unwrap();
        solve_domain(&curve, &SolverConfig::new(h, t), ws).unwrap()
    }

    #[test]
    fn zero_data_level_curve_is_a_line() {
        let ws = WaveSpeed::constant(1.0).unwrap();
        let g = grid(&InitialData::zero(-1.0, 1.0).unwrap(), &ws, 0.05, 1.0);
        let c = extract_level_curve(&g, 0.5).unwrap();
        for p in &c.points {
            assert!((p.xc + p.yc - 1.0).abs() < 1e-12);
            assert!((p.x - 0.5 * (p.xc - p.yc)).abs() < 1e-12);
        }
        assert!(c.points.windows(2).all(|w| w[1].x > w[0].x));
        assert_eq!(c.total(), 0.0);
        let xs = uniform_xs(&c, 0.1);
        let sl = slice_curve(&c, &ws, &xs);
        assert!(sl.u.iter().chain(&sl.ut).chain(&sl.ux).all(|v| *v == 0.0));
        assert_eq!(energy_at_time(&g, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn out_of_horizon() {
        let ws = WaveSpeed::constant(1.0).unwrap();
        let g = grid(&InitialData::zero(-1.0, 1.0).unwrap(), &ws, 0.1, 1.0);
        assert!(matches!(extract_level_curve(&g, 1.5), Err(Error::OutOfHorizon { .. })));
        assert!(matches!(extract_level_curve(&g, -0.1), Err(Error::OutOfHorizon { .. })));
    }

    #[test]
    fn point_values_at_unit_riemann_variables() {
        let s = point_values(FRAC_PI_2, FRAC_PI_2, 0.0, 1.0);
        assert!((s.ut - 1.0).abs() < 1e-15);
        assert!(s.ux.abs() < 1e-15);
        assert!((s.edens - 0.5).abs() < 1e-15);
    }

    #[test]
    fn box_measures_at_time_zero() {
        let ws = WaveSpeed::constant(1.0).unwrap();
        let g = grid(&InitialData::box_velocity(1.0, 0.0, 1.0).unwrap(), &ws, 0.05, 0.5);
        let m = energy_measures(&g, 0.0, &[0.0, 1.0]).unwrap();
        assert!((m.mu_minus[1] - 0.25).abs() < 1e-14);
        assert!((m.mu_plus[1] - 0.25).abs() < 1e-14);
        assert!(m.mu_minus[0].abs() < 1e-14 && m.mu_minus[2].abs() < 1e-14);
        assert!((m.total - 0.5).abs() < 1e-14);
    }

    #[test]
    fn stalled_segment_goes_left() {
        let pt = |x: f64| CurvePoint {
            x,
            ..Default::default()
        };
        let curve = LevelCurve {
            tau: 1.0,
            points: vec![pt(0.0), pt(1.0), pt(1.0), pt(2.0)],
            seg_minus: vec![1.0, 5.0, 1.0],
            seg_plus: vec![0.0, 0.0, 0.0],
            sing_w: vec![false, true, false],
            sing_z: vec![false; 3],
        };
        let m = measures_on_curve(&curve, &[1.0]).unwrap();
        assert_eq!(m.mu_minus, vec![6.0, 1.0]);
        assert_eq!(energy_abs_on_curve(&curve), 2.0);
        assert_eq!(singular_intervals(&curve), vec![(1.0, 1.0)]);
        assert!(measures_on_curve(&curve, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn reflection_flips_time_odd_fields() {
        let sl = TimeSlice {
            tau: 0.5,
            xs: vec![0.0],
            u: vec![1.0],
            ut: vec![2.0],
            ux: vec![3.0],
            edens: vec![4.0],
            mdens: vec![5.0],
            singular: vec![false],
            singular_intervals: vec![],
        };
        let r = sl.reflected();
        assert_eq!(
            (r.tau, r.ut[0], r.mdens[0], r.ux[0], r.u[0]),
            (-0.5, -2.0, -5.0, 3.0, 1.0)
        );
    }
}
