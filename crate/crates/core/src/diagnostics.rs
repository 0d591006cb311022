//! Quantitative checks of the structure of a solved lattice: closed 1-forms,
//! the weak formulation, Lipschitz and Hölder bounds, the interaction
//! potential and the location of singular points.

use crate::charsolver::{rhs, CharGrid, State, FLAG_BOUNDARY};
use crate::error::{Error, Result};
use crate::reconstruct::{extract_level_curve, sample_curve, LevelCurve};

/// Closed-form names, in the order returned by [`loop_integrals`].
pub const FORM_NAMES: [&str; 6] = ["p_q", "p_q_over_c", "energy", "momentum", "dx", "dt"];

/// Lattice-aligned rectangle `[i0, i1] x [j0, j1]` (node indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeRect {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

/// `(A, B)` coefficients of the six forms `A dX + B dY` at a state.
fn form_coefficients(grid: &CharGrid, s: &State) -> [(f64, f64); 6] {
    let c = grid.ws.c(s.u);
    let (cw, cz) = (s.w.cos(), s.z.cos());
    let (em, ep) = ((1.0 - cw) * s.p / 8.0, (1.0 - cz) * s.q / 8.0);
    let (dxa, dxb) = ((1.0 + cw) * s.p / 4.0, (1.0 + cz) * s.q / 4.0);
    [
        (s.p, -s.q),
        (s.p / c, s.q / c),
        (em, -ep),
        (em / c, ep / c),
        (dxa, -dxb),
        (dxa / c, dxb / c),
    ]
}

/// Trapezoidal circulation of the six closed forms around `rect`, counterclockwise.
pub fn loop_integrals(grid: &CharGrid, rect: &LatticeRect) -> Result<[f64; 6]> {
    let LatticeRect { i0, i1, j0, j1 } = *rect;
    if !(i1 > i0 && j1 > j0) {
        return Err(Error::OutsideSolvedRegion);
    }
    let get = |i: usize, j: usize| grid.state(i, j).ok_or(Error::OutsideSolvedRegion);
    let h = grid.h;
    let mut acc = [0.0; 6];
    let mut edge = |a: &State, b: &State, dir: (f64, f64)| {
        let (fa, fb) = (form_coefficients(grid, a), form_coefficients(grid, b));
        for k in 0..6 {
            acc[k] += 0.5 * h * (dir.0 * (fa[k].0 + fb[k].0) + dir.1 * (fa[k].1 + fb[k].1));
        }
    };
    for i in i0..i1 {
        edge(get(i, j0)?, get(i + 1, j0)?, (1.0, 0.0));
        edge(get(i + 1, j1)?, get(i, j1)?, (-1.0, 0.0));
    }
    for j in j0..j1 {
        edge(get(i1, j)?, get(i1, j + 1)?, (0.0, 1.0));
        edge(get(i0, j + 1)?, get(i0, j)?, (0.0, -1.0));
    }
    Ok(acc)
}

/// Every node of `rect` is set and none lies in the boundary layer.
pub fn rect_inside(grid: &CharGrid, rect: &LatticeRect) -> bool {
    (rect.i0..=rect.i1)
        .all(|i| (rect.j0..=rect.j1).all(|j| grid.node(i, j).is_some_and(|n| n.flags & FLAG_BOUNDARY == 0)))
}

/// `b(s) = (1 - s^2)^4` on `|s| < 1`, with derivative.
#[inline]
fn bump(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let m = 1.0 - s * s;
    let m3 = m * m * m;
    (m3 * m, -8.0 * s * m3)
}

/// Product bump `b((t - tc)/rt) b((x - xc)/rx)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub name: String,
    pub tc: f64,
    pub rt: f64,
    pub xc: f64,
    pub rx: f64,
}

impl TestFunction {
    pub fn bump(name: &str, tc: f64, rt: f64, xc: f64, rx: f64) -> Self {
        TestFunction {
            name: name.to_string(),
            tc,
            rt,
            xc,
            rx,
        }
    }

    /// `(φ, φ_t, φ_x)`.
    #[inline]
    pub fn eval(&self, t: f64, x: f64) -> (f64, f64, f64) {
        let (bt, dbt) = bump((t - self.tc) / self.rt);
        let (bx, dbx) = bump((x - self.xc) / self.rx);
        (bt * bx, dbt * bx / self.rt, bt * dbx / self.rx)
    }
}

/// The two bumps used by the scenario runner, placed in the middle of the
/// time horizon around the data.
pub fn registered_test_functions(horizon: f64, x_center: f64, x_half: f64) -> Vec<TestFunction> {
    vec![
        TestFunction::bump("bump_wide", 0.5 * horizon, 0.35 * horizon, x_center, x_half),
        TestFunction::bump(
            "bump_offset",
            0.55 * horizon,
            0.25 * horizon,
            x_center + 0.3 * x_half,
            0.5 * x_half,
        ),
    ]
}

/// Weak-form integrand at a node.
fn weak_integrand(grid: &CharGrid, s: &State, phi: &TestFunction) -> f64 {
    let (f, ft, fx) = phi.eval(s.t, s.x);
    if f == 0.0 && ft == 0.0 && fx == 0.0 {
        return 0.0;
    }
    let ev = grid.ws.eval(s.u);
    let r = rhs(&ev, s);
    let phi_x = ft * r.t_x + fx * r.x_x;
    let phi_y = ft * r.t_y + fx * r.x_y;
    0.5 * s.p * s.w.sin() * phi_y + 0.5 * s.q * s.z.sin() * phi_x + ev.a8 * s.p * s.q * ((s.w - s.z).cos() - 1.0) * f
}

/// `∫∫ (p sin w / 2) φ_Y + (q sin z / 2) φ_X + c'pq/(8c^2) (cos(w - z) - 1) φ dX dY`,
/// by the four-corner average on every complete cell.
pub fn weak_residual(grid: &CharGrid, phi: &TestFunction) -> Result<f64> {
    let h2 = grid.h * grid.h;
    let mut total = 0.0;
    let mut touched = false;
    for i in 0..=grid.nx {
        let col = &grid.columns[i];
        for (k, n) in col.nodes.iter().enumerate() {
            let j = col.j0 + k;
            let (f, ft, fx) = phi.eval(n.s.t, n.s.x);
            if f == 0.0 && ft == 0.0 && fx == 0.0 {
                continue;
            }
            touched = true;
            let interior = n.flags & FLAG_BOUNDARY == 0
                && i > 0
                && j > 0
                && grid.cell_complete(i - 1, j - 1)
                && grid.cell_complete(i, j - 1)
                && grid.cell_complete(i - 1, j)
                && grid.cell_complete(i, j);
            if !interior {
                return Err(Error::SupportExceedsDomain);
            }
            // each node carries a quarter of each of its four cells
            total += h2 * weak_integrand(grid, &n.s, phi);
        }
    }
    if !touched {
        return Err(Error::SupportExceedsDomain);
    }
    Ok(total)
}

/// `(lhs, rhs)` with `lhs = ||u(t) - u(s)||_{L^2}` and
/// `rhs = |t - s| sqrt(4 (kappa^3 + 1) E0)`.
pub fn lipschitz_check(grid: &CharGrid, s: f64, t: f64, e0: f64, kappa: f64) -> Result<(f64, f64)> {
    let cs = extract_level_curve(grid, s)?;
    let ct = extract_level_curve(grid, t)?;
    Ok((l2_distance(grid, &cs, &ct), lipschitz_bound(s, t, e0, kappa)))
}

pub fn lipschitz_bound(s: f64, t: f64, e0: f64, kappa: f64) -> f64 {
    (t - s).abs() * (4.0 * (kappa.powi(3) + 1.0) * e0).sqrt()
}

fn l2_distance(grid: &CharGrid, a: &LevelCurve, b: &LevelCurve) -> f64 {
    let lo = a.x_range().0.min(b.x_range().0);
    let hi = a.x_range().1.max(b.x_range().1);
    let n = ((hi - lo) / (0.25 * grid.h)).ceil().max(1.0) as usize;
    let dx = (hi - lo) / n as f64;
    let mut acc = 0.0;
    for k in 0..=n {
        let x = lo + dx * k as f64;
        let d = sample_curve(a, &grid.ws, x).u - sample_curve(b, &grid.ws, x).u;
        let wgt = if k == 0 || k == n { 0.5 } else { 1.0 };
        acc += wgt * d * d;
    }
    (acc * dx).sqrt()
}

/// A lattice line: a row (fixed `Y`, a forward characteristic) or a column
/// (fixed `X`, a backward characteristic).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Line {
    Row(usize),
    Column(usize),
}

/// `∫ p/(2c) dX` along a row or `∫ q/(2c) dY` along a column, over the
/// consecutive node pairs whose times both lie in `[t0, t1]`.
pub fn holder_budget(grid: &CharGrid, line: Line, t0: f64, t1: f64) -> f64 {
    let inside = |s: &State| s.t >= t0 && s.t <= t1;
    let mut acc = 0.0;
    let mut prev: Option<f64> = None;
    let mut add = |s: &State, v: f64| {
        if inside(s) {
            if let Some(pv) = prev {
                acc += 0.5 * grid.h * (pv + v);
            }
            prev = Some(v);
        } else {
            prev = None;
        }
    };
    match line {
        Line::Row(j) => {
            let Some(&i0) = grid.row_start.get(j) else { return 0.0 };
            let mut i = i0;
            while let Some(n) = grid.node(i, j) {
                add(&n.s, n.s.p / (2.0 * grid.ws.c(n.s.u)));
                i += 1;
            }
        }
        Line::Column(i) => {
            let Some(col) = grid.columns.get(i) else { return 0.0 };
            for n in &col.nodes {
                add(&n.s, n.s.q / (2.0 * grid.ws.c(n.s.u)));
            }
        }
    }
    acc
}

/// `Λ = (μ⁻ ⊗ μ⁺)({x > y})`, with the segment masses as atoms at the segment
/// midpoints. Pairs of atoms at the same point count with weight one half.
pub fn interaction_potential_on_curve(curve: &LevelCurve) -> f64 {
    let n = curve.n_segments();
    let mut atoms: Vec<(f64, f64, f64)> = (0..n)
        .map(|s| {
            let xm = 0.5 * (curve.points[s].x + curve.points[s + 1].x);
            (xm, curve.seg_minus[s], curve.seg_plus[s])
        })
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut lam = 0.0;
    let mut below = 0.0;
    let mut k = 0;
    while k < atoms.len() {
        let mut e = k;
        let (mut gm, mut gp) = (0.0, 0.0);
        while e < atoms.len() && atoms[e].0 == atoms[k].0 {
            gm += atoms[e].1;
            gp += atoms[e].2;
            e += 1;
        }
        lam += gm * (below + 0.5 * gp);
        below += gp;
        k = e;
    }
    lam
}

pub fn interaction_potential(grid: &CharGrid, tau: f64) -> Result<f64> {
    Ok(interaction_potential_on_curve(&extract_level_curve(grid, tau)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularSite {
    pub t: f64,
    pub x: f64,
    pub cp: f64,
}

/// Singular nodes ordered by time.
pub fn singular_sites(grid: &CharGrid) -> Vec<SingularSite> {
    let mut out: Vec<SingularSite> = grid
        .iter_nodes()
        .filter(|(_, _, n)| n.is_singular())
        .map(|(_, _, n)| SingularSite {
            t: n.s.t,
            x: n.s.x,
            cp: grid.ws.c_prime(n.s.u),
        })
        .collect();
    out.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.x.total_cmp(&b.x)));
    out
}

/// Sorted samples of `(τ, Λ(τ))`.
pub fn lambda_series(grid: &CharGrid, taus: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut ts = taus.to_vec();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts.iter()
        .map(|&t| interaction_potential(grid, t).map(|l| (t, l)))
        .collect()
}

/// Largest one-sided slope `(Λ(t) - Λ(s)) / (t - s)` over sampled pairs `s < t`.
pub fn max_lambda_slope(series: &[(f64, f64)]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (a, sa) in series.iter().enumerate() {
        for sb in &series[a + 1..] {
            if sb.0 > sa.0 {
                best = best.max((sb.1 - sa.1) / (sb.0 - sa.0));
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopResult {
    pub rect: LatticeRect,
    pub values: [f64; 6],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzPair {
    pub s: f64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderBound {
    pub line: Line,
    /// `Y` of the row or `X` of the column.
    pub coord: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticsReport {
    pub loop_residuals: Vec<LoopResult>,
    pub weak_residuals: Vec<(String, f64)>,
    pub lipschitz_pairs: Vec<LipschitzPair>,
    pub holder_bounds: Vec<HolderBound>,
    pub lambda_series: Vec<(f64, f64)>,
    pub singular_sites: Vec<SingularSite>,
}

impl DiagnosticsReport {
    /// Per-form maximum of `|circulation|` over the sampled rectangles.
    pub fn loop_maxima(&self) -> [f64; 6] {
        let mut m = [0.0_f64; 6];
        for r in &self.loop_residuals {
            for (mk, v) in m.iter_mut().zip(&r.values) {
                *mk = mk.max(v.abs());
            }
        }
        m
    }
}

/// Up to `count` square lattice rectangles of half-width `half` centered on
/// interior nodes with `t` in the middle half of the horizon, evenly spread.
pub fn sample_rects(grid: &CharGrid, count: usize, half: usize) -> Vec<LatticeRect> {
    let (t0, t1) = (0.25 * grid.horizon, 0.75 * grid.horizon);
    let candidates: Vec<(usize, usize)> = grid
        .iter_nodes()
        .filter(|(i, j, n)| n.s.t >= t0 && n.s.t <= t1 && *i >= half && *j >= half)
        .map(|(i, j, _)| (i, j))
        .collect();
    let mut out = Vec::new();
    if candidates.is_empty() || count == 0 {
        return out;
    }
    let stride = (candidates.len() / (4 * count)).max(1);
    for &(i, j) in candidates.iter().step_by(stride) {
        let r = LatticeRect {
            i0: i - half,
            i1: i + half,
            j0: j - half,
            j1: j + half,
        };
        if rect_inside(grid, &r) {
            out.push(r);
        }
    }
    if out.len() > count {
        let step = out.len() as f64 / count as f64;
        out = (0..count).map(|k| out[(k as f64 * step) as usize]).collect();
    }
    out
}
