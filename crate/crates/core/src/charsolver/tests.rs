use super::*;
use crate::boundary::BoundaryCurve;
use crate::data::InitialData;
use crate::wavespeed::{RegisteredSpeed, SpeedModel};
use std::f64::consts::{FRAC_PI_2, PI};

fn unit() -> WaveSpeed {
    WaveSpeed::constant(1.0).unwrap()
}

fn ctx(ws: &WaveSpeed) -> CellContext<'_> {
    CellContext {
        ws,
        e0: 0.0,
        cap_factor: 2.0,
        fp_tol: 1e-14,
        fp_max_iter: 50,
        sing_tol: 1e-8,
    }
}

fn st(w: f64, z: f64, p: f64, q: f64, u: f64) -> State {
    State {
        w,
        z,
        p,
        q,
        u,
        x: 0.0,
        t: 0.0,
    }
}

#[test]
fn rhs_vanishes_without_coefficient() {
    let ev = unit().eval(0.4);
    let r = rhs(&ev, &st(1.0, -2.0, 1.5, 0.7, 0.4));
    assert_eq!((r.w_y, r.z_x, r.p_y, r.q_x), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn rhs_vanishes_for_equal_angles() {
    let ev = SpeedEval::from_values(1.3, 0.9);
    let r = rhs(&ev, &st(0.8, 0.8, 2.0, 3.0, 0.0));
    assert_eq!((r.w_y, r.z_x, r.p_y, r.q_x), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn rhs_reference_values() {
    let ev = SpeedEval::from_values(1.0, -0.25);
    assert_eq!(ev.a8, -0.03125);
    let r = rhs(&ev, &st(FRAC_PI_2, 0.0, 1.0, 1.0, 0.0));
    assert!((r.w_y + 0.03125).abs() < 1e-16);
    assert!((r.p_y - 0.03125).abs() < 1e-16);
    assert!((r.x_x - 0.25).abs() < 1e-16);
    assert!((r.t_x - 0.25).abs() < 1e-16);
    // t_Y = (1 + cos 0) q / (4c)
    assert!((r.t_y - 0.5).abs() < 1e-16);
    assert!((r.x_y + 0.5).abs() < 1e-16);
    assert!((r.u_x - 0.25).abs() < 1e-16);
    assert_eq!(r.u_y, 0.0);
}

#[test]
fn constant_speed_cell_is_transport() {
    let ws = unit();
    let s = st(0.3, -0.4, 1.0, 1.0, 0.1);
    let out = advance_node(&Source { s, step: 0.1 }, &Source { s, step: 0.1 }, 0.0, 0.0, &ctx(&ws)).unwrap();
    let n = out.node.s;
    assert_eq!((n.w, n.z, n.p, n.q), (0.3, -0.4, 1.0, 1.0));
    assert_eq!(out.node.flags, FLAG_SET);
}

#[test]
fn cap_is_enforced() {
    let artificial = RegisteredSpeed {
        id: "a8_one",
        description: "",
        c: |_| 1.0,
        c_prime: |_| 8.0,
    };
    let ws = WaveSpeed {
        model: SpeedModel::Registered(artificial),
        kappa: 1.0 + 1e-9,
        c0: 1.0,
    };
    assert_eq!(ws.eval(0.0).a8, 1.0);
    let c = ctx(&ws);
    assert_eq!(c.cap(0.0, 0.0), 2.0);
    let s = st(0.0, FRAC_PI_2, 1.9, 1.9, 0.0);
    let out = advance_node(&Source { s, step: 0.1 }, &Source { s, step: 0.1 }, 0.0, 0.0, &c).unwrap();
    assert_eq!(out.node.s.p, 2.0);
    assert!(out.node.flags & FLAG_CAPPED != 0);
}

fn frozen_speed() -> WaveSpeed {
    // c = 1/(1 - 8 a u) has c'/(8 c^2) = a identically; a = 0.5
    let model = SpeedModel::Registered(RegisteredSpeed {
        id: "frozen",
        description: "",
        c: |u| 1.0 / (1.0 - 4.0 * u),
        c_prime: |u| 4.0 / ((1.0 - 4.0 * u) * (1.0 - 4.0 * u)),
    });
    WaveSpeed {
        model,
        kappa: 2.0,
        c0: 1.0,
    }
}

#[test]
fn frozen_coefficient_local_error_is_third_order() {
    // z = 0, q = 1, u fixed: w' = a (1 - cos w), so cot(w/2) = cot(w0/2) - a Y
    let ws = frozen_speed();
    let a = ws.eval(0.0).a8;
    assert!((a - 0.5).abs() < 1e-15);
    let w0 = 1.0_f64;
    let exact = |y: f64| 2.0 * (1.0 / ((0.5 * w0).tan().recip() - a * y)).atan();
    let err = |h: f64| {
        let s = st(w0, 0.0, 1.0, 1.0, 0.0);
        let west = st(exact(h), 0.0, 1.0, 1.0, 0.0);
        let out = advance_node(
            &Source { s, step: h },
            &Source { s: west, step: 0.0 },
            0.0,
            h,
            &ctx(&ws),
        )
        .unwrap();
        (out.node.s.w - exact(h)).abs()
    };
    let (e1, e2) = (err(0.1), err(0.05));
    let order = (e1 / e2).log2();
    assert!(order > 2.8, "local order {order}");
}

#[test]
fn odd_pi_crossings() {
    assert!(!crosses_odd_pi(0.0, 3.0));
    assert!(crosses_odd_pi(3.0, 3.2));
    assert!(crosses_odd_pi(-3.0, -3.2));
    assert!(!crosses_odd_pi(-3.2, -9.0));
    assert!(crosses_odd_pi(-3.2, -9.5));
    assert!(!crosses_odd_pi(PI - 1e-9, PI - 1e-12));
}

fn zero_grid(h: f64, exec: Execution) -> CharGrid {
    let d = InitialData::zero(-0.5, 2.5).unwrap();
    let ws = unit();
    let curve = BoundaryCurve::build(&d, &ws, 1, 0.0).unwrap();
    let cfg = SolverConfig {
        bbox: Some(Rect {
            x_lo: 0.0,
            x_hi: 2.0,
            y_lo: -2.0,
            y_hi: 0.0,
        }),
        execution: exec,
        ..SolverConfig::new(h, 10.0)
    };
    solve_domain(&curve, &cfg, &ws).unwrap()
}

#[test]
fn zero_data_grid_is_exact() {
    let g = zero_grid(0.05, Execution::Sequential);
    assert!(g.node_count() > 800);
    for (i, j, n) in g.iter_nodes() {
        let (xc, yc) = (g.xc(i), g.yc(j));
        assert!(yc >= -xc - 1e-12);
        let s = n.s;
        assert_eq!((s.w, s.z), (0.0, 0.0));
        assert_eq!((s.p, s.q), (1.0, 1.0));
        assert!((s.t - 0.5 * (xc + yc)).abs() < 1e-12);
        assert!((s.x - 0.5 * (xc - yc)).abs() < 1e-12);
    }
    assert_eq!(compatibility_residual(&g), 0.0);
    assert_eq!(conservation_residual(&g), (0.0, 0.0));
}

#[test]
fn parallel_and_sequential_agree_bitwise() {
    let d = InitialData::gaussian(1.0, 0.5, 0.0).unwrap();
    let ws = WaveSpeed::liquid_crystal(1.5, 0.5).unwrap();
    let curve = BoundaryCurve::build(&d, &ws, 1, 2.0).unwrap();
    let mut cfg = SolverConfig::new(0.02, 0.5);
    cfg.execution = Execution::Sequential;
    let a = solve_domain(&curve, &cfg, &ws).unwrap();
    cfg.execution = Execution::Parallel;
    let b = solve_domain(&curve, &cfg, &ws).unwrap();
    assert_eq!(a.node_count(), b.node_count());
    for (ca, cb) in a.columns.iter().zip(&b.columns) {
        assert_eq!(ca.j0, cb.j0);
        assert_eq!(ca.nodes, cb.nodes);
    }
}

#[test]
fn decoupled_fields_for_constant_speed() {
    let d = InitialData::box_velocity(1.0, 0.0, 1.0).unwrap();
    let ws = WaveSpeed::constant(2.0).unwrap();
    let curve = BoundaryCurve::build(&d, &ws, 16, 1.0).unwrap();
    let g = solve_domain(&curve, &SolverConfig::new(0.05, 0.6), &ws).unwrap();
    for (i, col) in g.columns.iter().enumerate() {
        for n in &col.nodes {
            assert_eq!((n.s.p, n.s.q), (1.0, 1.0));
            assert_eq!(n.s.w, col.foot.w, "column {i}");
        }
    }
    for (j, &i0) in g.row_start.iter().enumerate() {
        let mut i = i0;
        while let Some(n) = g.node(i, j) {
            assert_eq!(n.s.z, g.row_feet[j].z);
            i += 1;
        }
    }
}

#[test]
fn monotone_inverse_map() {
    let d = InitialData::gaussian(1.0, 1.0, 0.0).unwrap();
    let ws = WaveSpeed::liquid_crystal(1.5, 0.5).unwrap();
    let curve = BoundaryCurve::build(&d, &ws, 1, 2.0).unwrap();
    let g = solve_domain(&curve, &SolverConfig::new(0.05, 1.0), &ws).unwrap();
    for (i, j, n) in g.iter_nodes() {
        assert!(n.s.p > 0.0 && n.s.q > 0.0);
        if let Some(s) = g.node(i, j + 1) {
            assert!(s.s.t >= n.s.t && s.s.x <= n.s.x);
        }
        if let Some(e) = g.node(i + 1, j) {
            assert!(e.s.t >= n.s.t && e.s.x >= n.s.x);
        }
    }
}

#[test]
fn dump_round_trip() {
    let g = zero_grid(0.25, Execution::Sequential);
    let mut buf = Vec::new();
    write_dump(&g, &mut buf).unwrap();
    assert_eq!(&buf[..4], b"CGRD");
    let back = read_dump(buf.as_slice()).unwrap();
    assert_eq!(back.nx, g.nx + 1);
    assert_eq!(back.ny, g.ny + 1);
    assert_eq!(back.h, 0.25);
    for (i, j, n) in g.iter_nodes() {
        assert_eq!(back.at("t", i, j), Some(n.s.t));
        assert_eq!(back.at("flags", i, j), Some(n.flags as f64));
    }
    assert!(back.at("w", 0, 0).unwrap().is_nan());
    assert!(read_dump(&buf[..20]).is_err());
}
