//! Wave speed models `c(u)` with closed-form derivatives.
//!
//! Every coefficient of the characteristic system is evaluated through
//! [`WaveSpeed::eval`], which returns `c`, `c'` and the two ratios
//! `c'/(8c^2)` and `c'/(4c^2)` that appear in the right-hand sides.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Minimal excess of `kappa` over one.
pub const EPS_KAPPA: f64 = 1e-9;

/// Default number of samples used when a [`WaveSpeed`] computes its bounds.
pub const DEFAULT_BOUND_SAMPLES: usize = 1 << 16;

/// A registered closed-form speed: `c` and `c'` as plain functions.
#[derive(Clone, Copy)]
pub struct RegisteredSpeed {
    pub id: &'static str,
    pub description: &'static str,
    pub c: fn(f64) -> f64,
    pub c_prime: fn(f64) -> f64,
}

impl fmt::Debug for RegisteredSpeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegisteredSpeed").field("id", &self.id).finish()
    }
}

impl PartialEq for RegisteredSpeed {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

fn tanh_ramp(u: f64) -> f64 {
    1.0 + 0.25 * u.tanh()
}

fn tanh_ramp_prime(u: f64) -> f64 {
    let s = 1.0 / u.cosh();
    0.25 * s * s
}

fn cos_modulated(u: f64) -> f64 {
    1.0 + 0.3 * u.cos()
}

fn cos_modulated_prime(u: f64) -> f64 {
    -0.3 * u.sin()
}

/// Speeds that can be selected by id from a scenario file.
pub const REGISTERED_SPEEDS: &[RegisteredSpeed] = &[
    RegisteredSpeed {
        id: "tanh_ramp",
        description: "c(u) = 1 + 0.25 tanh(u)",
        c: tanh_ramp,
        c_prime: tanh_ramp_prime,
    },
    RegisteredSpeed {
        id: "cos_modulated",
        description: "c(u) = 1 + 0.3 cos(u)",
        c: cos_modulated,
        c_prime: cos_modulated_prime,
    },
];

pub fn registered_speed(id: &str) -> Option<RegisteredSpeed> {
    REGISTERED_SPEEDS.iter().copied().find(|s| s.id == id)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpeedModel {
    /// `c(u) = c0`.
    Constant {
        c0: f64,
    },
    /// Planar director field of a nematic liquid crystal:
    /// `c^2(u) = alpha cos^2 u + beta sin^2 u`.
    LiquidCrystal {
        alpha: f64,
        beta: f64,
    },
    Registered(RegisteredSpeed),
}

impl SpeedModel {
    #[inline]
    pub fn c(&self, u: f64) -> f64 {
        match *self {
            SpeedModel::Constant { c0 } => c0,
            SpeedModel::LiquidCrystal { alpha, beta } => {
                let (s, c) = u.sin_cos();
                (alpha * c * c + beta * s * s).sqrt()
            }
            SpeedModel::Registered(r) => (r.c)(u),
        }
    }

    #[inline]
    pub fn c_prime(&self, u: f64) -> f64 {
        match *self {
            SpeedModel::Constant { .. } => 0.0,
            SpeedModel::LiquidCrystal { alpha, beta } => {
                // 2 c c' = (beta - alpha) sin 2u
                (beta - alpha) * (2.0 * u).sin() / (2.0 * self.c(u))
            }
            SpeedModel::Registered(r) => (r.c_prime)(u),
        }
    }

    /// Natural sampling window for bound computation. The liquid-crystal
    /// speed is pi-periodic, so one period suffices.
    pub fn default_range(&self) -> (f64, f64) {
        match self {
            SpeedModel::Constant { .. } => (-1.0, 1.0),
            SpeedModel::LiquidCrystal { .. } => (-PI, PI),
            SpeedModel::Registered(_) => (-4.0 * PI, 4.0 * PI),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, SpeedModel::Constant { .. })
    }
}

/// Speed values at a point, including the two coefficient ratios.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpeedEval {
    pub c: f64,
    pub cp: f64,
    /// `c' / (8 c^2)`
    pub a8: f64,
    /// `c' / (4 c^2)`
    pub a4: f64,
}

impl SpeedEval {
    #[inline]
    pub fn from_values(c: f64, cp: f64) -> Self {
        let a8 = cp / (8.0 * c * c);
        SpeedEval {
            c,
            cp,
            a8,
            a4: 2.0 * a8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpeedBounds {
    pub kappa: f64,
    pub c0: f64,
}

/// Sampled bounds `kappa` (with `c in [1/kappa, kappa]`) and
/// `C0 = sup |c'/(4c^2)|`.
///
/// Samples lie on a dyadic lattice of `2^m + 1` points with `2^m >= n_samples - 1`,
/// so the sample sets are nested and both bounds are nondecreasing in `n_samples`.
pub fn compute_bounds(model: &SpeedModel, u_range: (f64, f64), n_samples: usize) -> Result<SpeedBounds> {
    if n_samples < 2 {
        return Err(Error::InvalidConfig("compute_bounds needs at least 2 samples".into()));
    }
    let (lo, hi) = u_range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidConfig(format!("bad sampling range [{lo}, {hi}]")));
    }
    let intervals = (n_samples - 1).next_power_of_two();
    let mut c_max = f64::MIN;
    let mut c_min = f64::MAX;
    let mut c0 = 0.0_f64;
    for k in 0..=intervals {
        let u = lo + (hi - lo) * (k as f64) / (intervals as f64);
        let c = model.c(u);
        if !(c > 0.0) {
            return Err(Error::NonPositiveSpeed { u, c });
        }
        c_max = c_max.max(c);
        c_min = c_min.min(c);
        c0 = c0.max((model.c_prime(u) / (4.0 * c * c)).abs());
    }
    let kappa = (1.0 + EPS_KAPPA).max(c_max).max(1.0 / c_min);
    Ok(SpeedBounds { kappa, c0 })
}

/// A wave speed together with its global bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveSpeed {
    pub model: SpeedModel,
    pub kappa: f64,
    pub c0: f64,
}

impl WaveSpeed {
    pub fn new(model: SpeedModel) -> Result<Self> {
        Self::with_sampling(model, model.default_range(), DEFAULT_BOUND_SAMPLES)
    }

    pub fn with_sampling(model: SpeedModel, u_range: (f64, f64), n_samples: usize) -> Result<Self> {
        match model {
            SpeedModel::Constant { c0 } if !(c0 > 0.0 && c0.is_finite()) => {
                return Err(Error::validation("speed.c0", "must be positive"))
            }
            SpeedModel::LiquidCrystal { alpha, beta } if !(alpha > 0.0 && beta > 0.0) => {
                return Err(Error::validation("speed", "alpha and beta must be positive"))
            }
            _ => {}
        }
        let bounds = compute_bounds(&model, u_range, n_samples)?;
        Ok(WaveSpeed {
            model,
            kappa: bounds.kappa,
            c0: bounds.c0,
        })
    }

    pub fn constant(c0: f64) -> Result<Self> {
        Self::new(SpeedModel::Constant { c0 })
    }

    pub fn liquid_crystal(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(SpeedModel::LiquidCrystal { alpha, beta })
    }

    #[inline]
    pub fn c(&self, u: f64) -> f64 {
        self.model.c(u)
    }

    #[inline]
    pub fn c_prime(&self, u: f64) -> f64 {
        self.model.c_prime(u)
    }

    #[inline]
    pub fn eval(&self, u: f64) -> SpeedEval {
        SpeedEval::from_values(self.model.c(u), self.model.c_prime(u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn constant_speed_has_no_coefficients() {
        let ws = WaveSpeed::constant(1.0).unwrap();
        let e = ws.eval(0.7);
        assert_eq!((e.c, e.cp, e.a8, e.a4), (1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn degenerate_liquid_crystal_is_constant() {
        let ws = WaveSpeed::liquid_crystal(1.0, 1.0).unwrap();
        let e = ws.eval(0.3);
        assert!((e.c - 1.0).abs() < 1e-15);
        assert!(e.cp.abs() < 1e-15 && e.a8.abs() < 1e-15 && e.a4.abs() < 1e-15);
    }

    #[test]
    fn liquid_crystal_at_quarter_pi() {
        let ws = WaveSpeed::liquid_crystal(1.5, 0.5).unwrap();
        let e = ws.eval(FRAC_PI_4);
        // d/du (1.5 cos^2 u + 0.5 sin^2 u) = -sin 2u = -1 at pi/4, so c' = -1/(2c) = -0.5
        let step = 1e-6;
        let fd = (ws.c(FRAC_PI_4 + step) - ws.c(FRAC_PI_4 - step)) / (2.0 * step);
        assert!((e.c - 1.0).abs() < 1e-14);
        assert!((e.cp + 0.5).abs() < 1e-14);
        assert!((fd - e.cp).abs() < 1e-9);
        assert!((e.a8 + 0.0625).abs() < 1e-14);
        assert!((e.a4 + 0.125).abs() < 1e-14);
    }

    #[test]
    fn c_prime_matches_centered_difference() {
        let models = [
            SpeedModel::LiquidCrystal { alpha: 1.5, beta: 0.5 },
            SpeedModel::LiquidCrystal { alpha: 0.3, beta: 2.0 },
            SpeedModel::Registered(registered_speed("tanh_ramp").unwrap()),
            SpeedModel::Registered(registered_speed("cos_modulated").unwrap()),
        ];
        for m in models {
            for k in 0..50 {
                let u = -3.0 + 0.123 * k as f64;
                let h = 1e-4;
                let fd = (m.c(u + h) - m.c(u - h)) / (2.0 * h);
                assert!((fd - m.c_prime(u)).abs() < 1e-7, "{m:?} at {u}");
            }
        }
    }

    #[test]
    fn bounds_for_constant_speed() {
        let b = compute_bounds(&SpeedModel::Constant { c0: 1.0 }, (-5.0, 5.0), 10).unwrap();
        assert_eq!(b.kappa, 1.0 + EPS_KAPPA);
        assert_eq!(b.c0, 0.0);
        let b = compute_bounds(&SpeedModel::Constant { c0: 1.0 }, (-100.0, 3.0), 1000).unwrap();
        assert_eq!(b.c0, 0.0);
    }

    #[test]
    fn bounds_for_liquid_crystal() {
        // brute force over 10^6 samples of [-pi, pi]: max |c'/(4c^2)| = 0.171294572095...
        let model = SpeedModel::LiquidCrystal { alpha: 1.5, beta: 0.5 };
        let b = compute_bounds(&model, (-PI, PI), 1 << 20).unwrap();
        assert!((b.kappa - 2.0_f64.sqrt()).abs() < 1e-12);
        assert!((b.c0 - 0.171_294_572_095_653_8).abs() < 1e-9);
        for k in 0..1000 {
            let u = -PI + 2.0 * PI * k as f64 / 999.0;
            let c = model.c(u);
            assert!(c >= 1.0 / b.kappa - 1e-15 && c <= b.kappa + 1e-15);
        }
    }

    #[test]
    fn bounds_are_monotone_in_sample_count() {
        let model = SpeedModel::LiquidCrystal { alpha: 1.5, beta: 0.5 };
        let mut prev = compute_bounds(&model, (-1.3, 2.9), 2).unwrap();
        for n in 3..300 {
            let b = compute_bounds(&model, (-1.3, 2.9), n).unwrap();
            assert!(b.kappa >= prev.kappa && b.c0 >= prev.c0, "n = {n}");
            prev = b;
        }
    }

    #[test]
    fn non_positive_speed_is_rejected() {
        let bad = RegisteredSpeed {
            id: "bad",
            description: "",
            c: |u| u,
            c_prime: |_| 1.0,
        };
        let err = compute_bounds(&SpeedModel::Registered(bad), (-1.0, 1.0), 16).unwrap_err();
        assert!(matches!(err, Error::NonPositiveSpeed { .. }));
        assert!(compute_bounds(&SpeedModel::Constant { c0: 1.0 }, (0.0, 1.0), 1).is_err());
    }
}
