//! Solving a data set on both sides of `t = 0`.

use crate::boundary::BoundaryCurve;
use crate::charsolver::{solve_domain, CharGrid, SolverConfig};
use crate::data::InitialData;
use crate::error::Result;
use crate::reconstruct::{extract_level_curve, measures_on_curve, slice_curve, EnergyMeasure, LevelCurve, TimeSlice};
use crate::wavespeed::WaveSpeed;

/// Width of trivial data added on each side of the data hull.
///
/// The level curve `t = τ` spans the data curve shrunk by up to `κτ` at both
/// ends while the support of the solution grows by up to `κτ`, so the margin
/// needs twice the distance travelled.
pub fn domain_margin(ws: &WaveSpeed, horizon: f64, box_margin: f64) -> f64 {
    2.0 * ws.kappa * horizon + box_margin
}

/// Subdivisions per data cell so that curve samples are at most `h/4` apart.
pub fn default_refine(data: &InitialData, h: f64) -> usize {
    let widest = data.mesh().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    ((4.0 * widest / h).ceil() as usize).clamp(1, 4096)
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub ws: WaveSpeed,
    pub data: InitialData,
    /// Lattice for `t >= 0`.
    pub forward: CharGrid,
    /// Lattice of the time-reflected data, covering `t <= 0`.
    pub backward: Option<CharGrid>,
}

pub fn solve(
    data: &InitialData,
    ws: &WaveSpeed,
    config: &SolverConfig,
    box_margin: f64,
    with_backward: bool,
) -> Result<Solution> {
    let margin = domain_margin(ws, config.horizon, box_margin);
    let refine = default_refine(data, config.h);
    let curve = BoundaryCurve::build(data, ws, refine, margin)?;
    let forward = solve_domain(&curve, config, ws)?;
    let backward = if with_backward {
        let reflected = data.time_reflected();
        let curve = BoundaryCurve::build(&reflected, ws, refine, margin)?;
        Some(solve_domain(&curve, config, ws)?)
    } else {
        None
    };
    Ok(Solution {
        ws: *ws,
        data: data.clone(),
        forward,
        backward,
    })
}

impl Solution {
    pub fn e0(&self) -> f64 {
        self.forward.e0
    }

    /// Level curve at `|τ|` in the lattice covering the sign of `τ`.
    pub fn level_curve(&self, tau: f64) -> Result<LevelCurve> {
        match (&self.backward, tau < 0.0) {
            (Some(b), true) => extract_level_curve(b, -tau),
            _ => extract_level_curve(&self.forward, tau),
        }
    }

    pub fn slice_on(&self, curve: &LevelCurve, negative: bool, xs: &[f64]) -> TimeSlice {
        let s = slice_curve(curve, &self.ws, xs);
        if negative {
            s.reflected()
        } else {
            s
        }
    }

    /// Energy measures; for negative times the backward and forward parts of
    /// the reflected solution trade places.
    pub fn measures_on(&self, curve: &LevelCurve, negative: bool, breakpoints: &[f64]) -> Result<EnergyMeasure> {
        let mut m = measures_on_curve(curve, breakpoints)?;
        if negative {
            std::mem::swap(&mut m.mu_minus, &mut m.mu_plus);
        }
        Ok(m)
    }
}
