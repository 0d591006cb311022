//! Scenario files: a small sectioned `key=value` format.
//!
//! ```text
//! # comment
//! [speed] kind=liquid_crystal alpha=1.5 beta=0.5
//! [data]  kind=gaussian amplitude=1 width=1 center=0
//! [run]   T=2.0 h=0.01 slices=0,0.5,1
//! [diagnostics] loops=true lambda=true
//! ```
//!
//! A line holds an optional `[section]` header followed by whitespace-separated
//! `key=value` tokens; values contain no whitespace.

use std::collections::BTreeMap;

use crate::charsolver::SolverConfig;
use crate::data::InitialData;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::wavespeed::{registered_speed, SpeedModel, WaveSpeed, REGISTERED_SPEEDS};

#[derive(Clone, Debug, PartialEq)]
pub enum SpeedSpec {
    Constant { c0: f64 },
    LiquidCrystal { alpha: f64, beta: f64 },
    Registered(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSpec {
    Zero { a: f64, b: f64 },
    Gaussian { amplitude: f64, width: f64, center: f64 },
    BoxVelocity { height: f64, a: f64, b: f64 },
    Registered(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub horizon: f64,
    pub h: f64,
    pub box_margin: f64,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub cap_factor: f64,
    pub sing_tol: f64,
    pub slices: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DiagnosticToggles {
    pub loops: bool,
    pub weak: bool,
    pub lipschitz: bool,
    pub holder: bool,
    pub lambda: bool,
    pub singular: bool,
}

impl DiagnosticToggles {
    pub fn all() -> Self {
        DiagnosticToggles {
            loops: true,
            weak: true,
            lipschitz: true,
            holder: true,
            lambda: true,
            singular: true,
        }
    }

    pub fn any(&self) -> bool {
        self.loops || self.weak || self.lipschitz || self.holder || self.lambda || self.singular
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub speed: SpeedSpec,
    pub data: DataSpec,
    pub run: RunSpec,
    pub diagnostics: DiagnosticToggles,
}

/// Data sets selectable by id.
pub struct RegisteredData {
    pub id: &'static str,
    pub description: &'static str,
    pub build: fn() -> Result<InitialData>,
}

fn sine_packet() -> Result<InitialData> {
    let (lo, cells) = (-8.0, 12800);
    let dx = 16.0 / cells as f64;
    let mesh: Vec<f64> = (0..=cells).map(|k| lo + dx * k as f64).collect();
    let u0 = mesh
        .iter()
        .map(|x| 0.5 * (2.0 * x).sin() * (-0.25 * x * x).exp())
        .collect();
    let u1 = mesh
        .iter()
        .map(|x| {
            let m = x + 0.5 * dx;
            0.3 * (-m * m).exp()
        })
        .collect();
    InitialData::new(mesh, u0, u1)
}

pub const REGISTERED_DATA: &[RegisteredData] = &[RegisteredData {
    id: "sine_packet",
    description: "u0 = 0.5 sin(2x) exp(-x^2/4), u1 = 0.3 exp(-x^2) on [-8, 8]",
    build: sine_packet,
}];

/// Scenario files shipped with the library.
pub const PRESETS: &[(&str, &str)] = &[
    ("zero", include_str!("../scenarios/zero.cfg")),
    ("linear_gaussian", include_str!("../scenarios/linear_gaussian.cfg")),
    ("lc_gaussian", include_str!("../scenarios/lc_gaussian.cfg")),
    ("lc_steep", include_str!("../scenarios/lc_steep.cfg")),
    ("box_velocity", include_str!("../scenarios/box_velocity.cfg")),
    ("tanh_packet", include_str!("../scenarios/tanh_packet.cfg")),
];

pub fn preset(name: &str) -> Option<Scenario> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| parse_config_named(text, n).expect("shipped scenario parses"))
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("speed", &["kind", "c0", "alpha", "beta"]),
    ("data", &["kind", "amplitude", "width", "center", "height", "a", "b"]),
    (
        "run",
        &[
            "T",
            "h",
            "box_margin",
            "fp_tol",
            "fp_max_iter",
            "cap_factor",
            "sing_tol",
            "slices",
        ],
    ),
    (
        "diagnostics",
        &["loops", "weak", "lipschitz", "holder", "lambda", "singular"],
    ),
];

/// Syntactic check of a value against the type of its key.
fn check_value(sec: &str, key: &str, value: &str) -> std::result::Result<(), String> {
    let number = |v: &str| v.trim().parse::<f64>().is_ok_and(f64::is_finite);
    let ok = match (sec, key) {
        (_, "kind") => true,
        ("diagnostics", _) => matches!(value, "true" | "false" | "yes" | "no" | "on" | "off" | "1" | "0"),
        ("run", "fp_max_iter") => value.parse::<usize>().is_ok(),
        ("run", "slices") => value.split(',').all(number),
        _ => number(value),
    };
    if ok {
        Ok(())
    } else {
        Err(format!("{sec}.{key}: malformed value '{value}'"))
    }
}

struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn raw(&self, field: &str) -> Option<&(usize, String)> {
        self.0.get(field)
    }

    fn f64_opt(&self, field: &str) -> Result<Option<f64>> {
        match self.raw(field) {
            None => Ok(None),
            Some((line, v)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(Error::Parse {
                    line: *line,
                    reason: format!("{field}: expected a finite number, got '{v}'"),
                }),
            },
        }
    }

    fn f64_or(&self, field: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(field)?.unwrap_or(default))
    }

    fn f64_req(&self, field: &str) -> Result<f64> {
        self.f64_opt(field)?.ok_or_else(|| Error::validation(field, "required"))
    }

    fn positive(&self, field: &str, value: f64) -> Result<f64> {
        if value > 0.0 {
            Ok(value)
        } else {
            Err(Error::validation(field, "must be positive"))
        }
    }

    fn bool_or(&self, field: &str, default: bool) -> Result<bool> {
        match self.raw(field) {
            None => Ok(default),
            Some((line, v)) => match v.as_str() {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err(Error::Parse {
                    line: *line,
                    reason: format!("{field}: expected a boolean, got '{v}'"),
                }),
            },
        }
    }
}

pub fn parse_config(text: &str) -> Result<Scenario> {
    parse_config_named(text, "scenario")
}

pub fn parse_config_named(text: &str, name: &str) -> Result<Scenario> {
    let mut entries = BTreeMap::new();
    let mut section: Option<&str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut rest = raw.split('#').next().unwrap_or("").trim();
        if let Some(after) = rest.strip_prefix('[') {
            let close = after.find(']').ok_or_else(|| Error::Parse {
                line,
                reason: "unterminated section header".into(),
            })?;
            let sec = after[..close].trim();
            section = Some(
                SECTIONS
                    .iter()
                    .find(|(s, _)| *s == sec)
                    .map(|(s, _)| *s)
                    .ok_or_else(|| Error::Parse {
                        line,
                        reason: format!("unknown section '{sec}'"),
                    })?,
            );
            rest = after[close + 1..].trim();
        }
        for token in rest.split_whitespace() {
            let sec = section.ok_or_else(|| Error::Parse {
                line,
                reason: "key outside of any section".into(),
            })?;
            let (key, value) = token.split_once('=').ok_or_else(|| Error::Parse {
                line,
                reason: format!("expected key=value, got '{token}'"),
            })?;
            let keys = SECTIONS.iter().find(|(s, _)| *s == sec).unwrap().1;
            if !keys.contains(&key) {
                return Err(Error::Parse {
                    line,
                    reason: format!("unknown key '{key}' in section [{sec}]"),
                });
            }
            if value.is_empty() {
                return Err(Error::Parse {
                    line,
                    reason: format!("empty value for '{key}'"),
                });
            }
            check_value(sec, key, value).map_err(|reason| Error::Parse { line, reason })?;
            let field = format!("{sec}.{key}");
            if entries.insert(field.clone(), (line, value.to_string())).is_some() {
                return Err(Error::Parse {
                    line,
                    reason: format!("duplicate key '{field}'"),
                });
            }
        }
    }
    let e = Entries(entries);

    let speed = match e.raw("speed.kind").map(|(_, v)| v.as_str()) {
        None => return Err(Error::validation("speed.kind", "required")),
        Some("constant") => SpeedSpec::Constant {
            c0: e.positive("speed.c0", e.f64_or("speed.c0", 1.0)?)?,
        },
        Some("liquid_crystal") => SpeedSpec::LiquidCrystal {
            alpha: e.positive("speed.alpha", e.f64_req("speed.alpha")?)?,
            beta: e.positive("speed.beta", e.f64_req("speed.beta")?)?,
        },
        Some(id) if registered_speed(id).is_some() => SpeedSpec::Registered(id.to_string()),
        Some(other) => return Err(Error::validation("speed.kind", format!("unknown speed '{other}'"))),
    };

    let data = match e.raw("data.kind").map(|(_, v)| v.as_str()) {
        None => return Err(Error::validation("data.kind", "required")),
        Some("zero") => DataSpec::Zero {
            a: e.f64_or("data.a", -1.0)?,
            b: e.f64_or("data.b", 1.0)?,
        },
        Some("gaussian") => DataSpec::Gaussian {
            amplitude: e.f64_or("data.amplitude", 1.0)?,
            width: e.positive("data.width", e.f64_or("data.width", 1.0)?)?,
            center: e.f64_or("data.center", 0.0)?,
        },
        Some("box_velocity") => DataSpec::BoxVelocity {
            height: e.f64_or("data.height", 1.0)?,
            a: e.f64_or("data.a", 0.0)?,
            b: e.f64_or("data.b", 1.0)?,
        },
        Some(id) if REGISTERED_DATA.iter().any(|d| d.id == id) => DataSpec::Registered(id.to_string()),
        Some(other) => return Err(Error::validation("data.kind", format!("unknown data '{other}'"))),
    };
    match data {
        DataSpec::Zero { a, b } | DataSpec::BoxVelocity { a, b, .. } if !(b > a) => {
            return Err(Error::validation("data.b", "must exceed data.a"))
        }
        _ => {}
    }

    let horizon = e.positive("run.T", e.f64_req("run.T")?)?;
    let h = e.positive("run.h", e.f64_req("run.h")?)?;
    let box_margin = e.f64_or("run.box_margin", 0.5)?;
    if box_margin < 0.0 {
        return Err(Error::validation("run.box_margin", "must be nonnegative"));
    }
    let fp_max_iter = match e.raw("run.fp_max_iter") {
        None => 8,
        Some((line, v)) => v.parse::<usize>().map_err(|_| Error::Parse {
            line: *line,
            reason: format!("run.fp_max_iter: expected an integer, got '{v}'"),
        })?,
    };
    if fp_max_iter < 1 {
        return Err(Error::validation("run.fp_max_iter", "must be at least 1"));
    }
    let cap_factor = e.f64_or("run.cap_factor", 2.0)?;
    if cap_factor < 1.0 {
        return Err(Error::validation("run.cap_factor", "must be at least 1"));
    }
    let fp_tol = e.positive("run.fp_tol", e.f64_or("run.fp_tol", 1e-12)?)?;
    let sing_tol = e.positive("run.sing_tol", e.f64_or("run.sing_tol", 1e-8)?)?;
    let slices = match e.raw("run.slices") {
        None => vec![0.0, 0.5 * horizon, horizon],
        Some((line, v)) => v
            .split(',')
            .map(|s| match s.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(Error::Parse {
                    line: *line,
                    reason: format!("run.slices: bad time '{s}'"),
                }),
            })
            .collect::<Result<Vec<f64>>>()?,
    };

    let diagnostics = DiagnosticToggles {
        loops: e.bool_or("diagnostics.loops", false)?,
        weak: e.bool_or("diagnostics.weak", false)?,
        lipschitz: e.bool_or("diagnostics.lipschitz", false)?,
        holder: e.bool_or("diagnostics.holder", false)?,
        lambda: e.bool_or("diagnostics.lambda", false)?,
        singular: e.bool_or("diagnostics.singular", false)?,
    };

    Ok(Scenario {
        name: name.to_string(),
        speed,
        data,
        run: RunSpec {
            horizon,
            h,
            box_margin,
            fp_tol,
            fp_max_iter,
            cap_factor,
            sing_tol,
            slices,
        },
        diagnostics,
    })
}

impl Scenario {
    pub fn wave_speed(&self) -> Result<WaveSpeed> {
        let model = match &self.speed {
            SpeedSpec::Constant { c0 } => SpeedModel::Constant { c0: *c0 },
            SpeedSpec::LiquidCrystal { alpha, beta } => SpeedModel::LiquidCrystal {
                alpha: *alpha,
                beta: *beta,
            },
            SpeedSpec::Registered(id) => SpeedModel::Registered(
                registered_speed(id).ok_or_else(|| Error::validation("speed.kind", "unknown id"))?,
            ),
        };
        WaveSpeed::new(model)
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        match &self.data {
            DataSpec::Zero { a, b } => InitialData::zero(*a, *b),
            DataSpec::Gaussian {
                amplitude,
                width,
                center,
            } => InitialData::gaussian(*amplitude, *width, *center),
            DataSpec::BoxVelocity { height, a, b } => InitialData::box_velocity(*height, *a, *b),
            DataSpec::Registered(id) => (REGISTERED_DATA
                .iter()
                .find(|d| d.id == id)
                .ok_or_else(|| Error::validation("data.kind", "unknown id"))?
                .build)(),
        }
    }

    pub fn solver_config(&self, execution: Execution) -> SolverConfig {
        SolverConfig {
            h: self.run.h,
            horizon: self.run.horizon,
            bbox: None,
            fp_tol: self.run.fp_tol,
            fp_max_iter: self.run.fp_max_iter,
            cap_factor: self.run.cap_factor,
            sing_tol: self.run.sing_tol,
            execution,
        }
    }
}

/// Every name a config or the command line can refer to, as `(kind, id, description)`.
pub fn registered_names() -> Vec<(&'static str, &'static str, &'static str)> {
    let mut out = vec![
        ("speed", "constant", "c(u) = c0"),
        ("speed", "liquid_crystal", "c(u)^2 = alpha cos^2 u + beta sin^2 u"),
    ];
    out.extend(REGISTERED_SPEEDS.iter().map(|s| ("speed", s.id, s.description)));
    out.push(("data", "zero", "u0 = u1 = 0 on [a, b]"));
    out.push((
        "data",
        "gaussian",
        "u0 = amplitude exp(-((x - center)/width)^2), u1 = 0",
    ));
    out.push(("data", "box_velocity", "u0 = 0, u1 = height on (a, b)"));
    out.extend(REGISTERED_DATA.iter().map(|d| ("data", d.id, d.description)));
    out.extend(PRESETS.iter().map(|(n, _)| ("scenario", *n, "shipped scenario file")));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let s = parse_config("[speed] kind=constant c0=1.0\n[data] kind=zero\n[run] T=1.0 h=0.01\n").unwrap();
        assert_eq!(s.speed, SpeedSpec::Constant { c0: 1.0 });
        assert_eq!(s.data, DataSpec::Zero { a: -1.0, b: 1.0 });
        assert_eq!((s.run.horizon, s.run.h), (1.0, 0.01));
        assert_eq!(s.run.fp_max_iter, 8);
        assert_eq!(s.run.slices, vec![0.0, 0.5, 1.0]);
        assert!(!s.diagnostics.any());
    }

    #[test]
    fn missing_horizon() {
        let err = parse_config("[speed] kind=constant c0=1.0\n[data] kind=zero\n[run] h=0.01\n").unwrap_err();
        match err {
            Error::Validation { field, reason } => assert_eq!((field.as_str(), reason.as_str()), ("run.T", "required")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn liquid_crystal_speed() {
        let s = parse_config(
            "[speed]\nkind=liquid_crystal alpha=1.5 beta=0.5\n[data]\nkind=gaussian\n[run]\nT=1 h=0.1 slices=0.5,1\n",
        )
        .unwrap();
        let ws = s.wave_speed().unwrap();
        let u: f64 = 0.3;
        let expected = (1.5 * u.cos().powi(2) + 0.5 * u.sin().powi(2)).sqrt();
        assert!((ws.c(u) - expected).abs() < 1e-15);
        assert_eq!(s.run.slices, vec![0.5, 1.0]);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let cases = [
            ("[speed] kind=constant\n[bogus] x=1\n", 2),
            ("kind=constant\n", 1),
            ("[speed] kind=constant\n\n[run] T\n", 3),
            ("[speed] kind=constant kind=constant\n", 1),
            ("[speed] kind=constant\n[run] T=abc\n", 2),
            ("[speed] kind=constant\n[run] T=1 h=0.1 colour=red\n", 2),
            ("[speed kind=constant\n", 1),
            (
                "[speed] kind=constant\n[data] kind=zero\n[run] T=1 h=0.1\n[diagnostics] loops=maybe\n",
                4,
            ),
        ];
        for (text, line) in cases {
            match parse_config(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn validation_errors() {
        let base = "[speed] kind=constant c0=1\n[data] kind=zero\n[run] T=1 h=0.1\n";
        let bad = [
            (base.replace("c0=1", "c0=-1"), "speed.c0"),
            (base.replace("h=0.1", "h=0"), "run.h"),
            (base.replace("kind=zero", "kind=nothing"), "data.kind"),
            (base.replace("kind=constant", "kind=warp"), "speed.kind"),
            (base.replace("kind=zero", "kind=box_velocity a=2 b=1"), "data.b"),
            (base.replace("h=0.1", ""), "run.h"),
        ];
        for (text, f) in bad {
            match parse_config(&text) {
                Err(Error::Validation { field, .. }) => assert_eq!(field, f),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn comments_and_layout() {
        let s = parse_config(
            "# header\n[speed] # trailing\n  kind=tanh_ramp\n[data] kind=sine_packet\n[run] T=2 h=0.05 fp_max_iter=12\n[diagnostics] loops=yes weak=0\n",
        )
        .unwrap();
        assert_eq!(s.speed, SpeedSpec::Registered("tanh_ramp".into()));
        assert_eq!(s.run.fp_max_iter, 12);
        assert!(s.diagnostics.loops && !s.diagnostics.weak);
        assert!(s.initial_data().is_ok());
    }

    #[test]
    fn presets_parse() {
        for (name, _) in PRESETS {
            let s = preset(name).unwrap();
            assert!(s.wave_speed().is_ok() && s.initial_data().is_ok(), "{name}");
        }
    }
}
