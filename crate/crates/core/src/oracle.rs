//! Independent reference solutions: d'Alembert's formula for constant speed
//! and a first-order upwind scheme for the Riemann variables.
//!
//! The upwind scheme solves
//!
//! ```text
//! R_t - c R_x = c'/(4c) (R^2 - S^2)
//! S_t + c S_x = c'/(4c) (S^2 - R^2)
//! u_t = (R + S) / 2
//! ```
//!
//! on a uniform grid with zero ghost values.

use crate::data::{initial_rs, InitialData};
use crate::error::{Error, Result};
use crate::wavespeed::WaveSpeed;

/// Default threshold on `max(|R|, |S|)` past which the upwind oracle refuses.
pub const BLOWUP_CEILING: f64 = 1e3;

/// Exact solution of `u_tt = c0^2 u_xx`.
pub fn dalembert(data: &InitialData, c0: f64, t: f64, x: f64) -> f64 {
    let (a, b) = (x - c0 * t, x + c0 * t);
    0.5 * (data.u0_at(a) + data.u0_at(b)) + data.u1_integral(a, b) / (2.0 * c0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdState {
    pub xs: Vec<f64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
    pub cfl: f64,
}

impl FdState {
    pub fn dx(&self) -> f64 {
        self.xs[1] - self.xs[0]
    }

    /// `∫ (R^2 + S^2)/4 dx`.
    pub fn energy(&self) -> f64 {
        0.25 * self.dx() * self.r.iter().zip(&self.s).map(|(r, s)| r * r + s * s).sum::<f64>()
    }

    pub fn max_rs(&self) -> f64 {
        self.r.iter().chain(&self.s).fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Linear interpolation of `u`, constant outside the grid.
    pub fn u_at(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.u[0];
        }
        if x >= self.xs[n - 1] {
            return self.u[n - 1];
        }
        let f = (x - self.xs[0]) / self.dx();
        let k = (f.floor() as usize).min(n - 2);
        let th = f - k as f64;
        self.u[k] + th * (self.u[k + 1] - self.u[k])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpwindOptions {
    pub dx: f64,
    /// Extension of the grid beyond the data hull on both sides.
    pub margin: f64,
    pub ceiling: f64,
    /// Snapshot times in `(0, T]`; `T` itself is always recorded.
    pub snapshots: Vec<f64>,
}

impl UpwindOptions {
    pub fn new(dx: f64, margin: f64) -> Self {
        UpwindOptions {
            dx,
            margin,
            ceiling: BLOWUP_CEILING,
            snapshots: Vec::new(),
        }
    }
}

/// Upwind trajectory from `t = 0` to `t_end`: the initial state, every
/// requested snapshot, and the final state, in time order.
pub fn upwind_solve(
    data: &InitialData,
    ws: &WaveSpeed,
    t_end: f64,
    cfl: f64,
    opts: &UpwindOptions,
) -> Result<Vec<FdState>> {
    if !(cfl > 0.0 && cfl < 1.0) {
        return Err(Error::InvalidConfig(format!("cfl must lie in (0, 1), got {cfl}")));
    }
    if !(opts.dx > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidConfig("dx must be positive and T nonnegative".into()));
    }
    let (lo, hi) = data.hull();
    let (lo, hi) = (lo - opts.margin, hi + opts.margin);
    let n = ((hi - lo) / opts.dx).ceil() as usize + 1;
    let xs: Vec<f64> = (0..n).map(|k| lo + opts.dx * k as f64).collect();
    let (mut r, mut s): (Vec<f64>, Vec<f64>) = xs.iter().map(|&x| initial_rs(data, ws, x)).unzip();
    let mut u: Vec<f64> = xs.iter().map(|&x| data.u0_at(x)).collect();
    let dt_max = cfl * opts.dx / ws.kappa;

    let mut stops: Vec<f64> = opts
        .snapshots
        .iter()
        .copied()
        .filter(|&v| v > 0.0 && v < t_end)
        .collect();
    stops.push(t_end);
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let snapshot = |r: &[f64], s: &[f64], u: &[f64], t: f64| FdState {
        xs: xs.clone(),
        r: r.to_vec(),
        s: s.to_vec(),
        u: u.to_vec(),
        t,
        cfl,
    };
    let mut out = vec![snapshot(&r, &s, &u, 0.0)];
    let mut t = 0.0;
    let (mut rn, mut sn) = (vec![0.0; n], vec![0.0; n]);
    for &stop in &stops {
        while t < stop {
            let dt = dt_max.min(stop - t);
            let lam = dt / opts.dx;
            for k in 0..n {
                let e = ws.eval(u[k]);
                let src = e.cp / (4.0 * e.c) * (r[k] * r[k] - s[k] * s[k]);
                let r_right = if k + 1 < n { r[k + 1] } else { 0.0 };
                let s_left = if k > 0 { s[k - 1] } else { 0.0 };
                rn[k] = r[k] + lam * e.c * (r_right - r[k]) + dt * src;
                sn[k] = s[k] - lam * e.c * (s[k] - s_left) - dt * src;
            }
            for k in 0..n {
                u[k] += 0.5 * dt * (r[k] + s[k]);
            }
            std::mem::swap(&mut r, &mut rn);
            std::mem::swap(&mut s, &mut sn);
            t = if stop - t <= dt { stop } else { t + dt };
            let max_rs = r.iter().chain(&s).fold(0.0_f64, |m, v| m.max(v.abs()));
            if !(max_rs <= opts.ceiling) {
                return Err(Error::BlowupSuspected { t, max_rs });
            }
        }
        out.push(snapshot(&r, &s, &u, t));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dalembert_examples() {
        let zero = InitialData::zero(-1.0, 1.0).unwrap();
        assert_eq!(dalembert(&zero, 1.0, 0.3, 0.2), 0.0);
        let bx = InitialData::box_velocity(1.0, 0.0, 1.0).unwrap();
        assert!((dalembert(&bx, 1.0, 0.25, 0.5) - 0.25).abs() < 1e-15);
        let g = InitialData::gaussian(1.0, 1.0, 0.0).unwrap();
        assert!((dalembert(&g, 1.0, 0.5, 0.0) - (-0.25f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn zero_trajectory() {
        let zero = InitialData::zero(-1.0, 1.0).unwrap();
        let ws = WaveSpeed::constant(1.0).unwrap();
        let traj = upwind_solve(&zero, &ws, 0.5, 0.5, &UpwindOptions::new(0.05, 1.0)).unwrap();
        assert_eq!(traj.len(), 2);
        assert!(traj.iter().all(|s| s.max_rs() == 0.0 && s.u.iter().all(|v| *v == 0.0)));
        assert_eq!(traj[1].t, 0.5);
    }

    #[test]
    fn snapshots_land_on_requested_times() {
        let g = InitialData::gaussian(1.0, 1.0, 0.0).unwrap();
        let ws = WaveSpeed::constant(1.0).unwrap();
        let mut o = UpwindOptions::new(0.05, 2.0);
        o.snapshots = vec![0.25, 0.5];
        let traj = upwind_solve(&g, &ws, 1.0, 0.9, &o).unwrap();
        let ts: Vec<f64> = traj.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![0.0, 0.25, 0.5, 1.0]);
    }

    #[test]
    fn upwind_energy_does_not_grow_for_constant_speed() {
        let g = InitialData::gaussian(1.0, 0.5, 0.0).unwrap();
        let ws = WaveSpeed::constant(1.0).unwrap();
        let mut o = UpwindOptions::new(0.02, 2.0);
        o.snapshots = (1..10).map(|k| 0.1 * k as f64).collect();
        let traj = upwind_solve(&g, &ws, 1.0, 0.8, &o).unwrap();
        for w in traj.windows(2) {
            assert!(w[1].energy() <= w[0].energy() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn ceiling_is_enforced() {
        let g = InitialData::gaussian(1.0, 1.0, 0.0).unwrap();
        let ws = WaveSpeed::constant(1.0).unwrap();
        let mut o = UpwindOptions::new(0.05, 1.0);
        o.ceiling = 0.1;
        assert!(matches!(
            upwind_solve(&g, &ws, 0.1, 0.5, &o),
            Err(Error::BlowupSuspected { .. })
        ));
        assert!(upwind_solve(&g, &ws, 0.1, 1.5, &o).is_err());
    }
}
