//! Integration of the semilinear system in characteristic coordinates.
//!
//! Unknowns on the lattice `X_i = X_lo + i h`, `Y_j = Y_lo + j h` above `γ`:
//!
//! ```text
//! w_Y = a8 (cos z - cos w) q          z_X = a8 (cos w - cos z) p
//! p_Y = a8 (sin z - sin w) p q        q_X = a8 (sin w - sin z) p q
//! u_X = sin w p / (4c)                u_Y = sin z q / (4c)
//! x_X = (1 + cos w) p / 4             x_Y = -(1 + cos z) q / 4
//! t_X = (1 + cos w) p / (4c)          t_Y = (1 + cos z) q / (4c)
//! ```
//!
//! with `a8 = c'(u) / (8 c(u)^2)`. Nodes are advanced one cell at a time by a
//! trapezoidal predictor-corrector, anti-diagonal by anti-diagonal.

mod dump;

pub use dump::{read_dump, write_dump, GridDump, DUMP_FIELDS, DUMP_MAGIC, DUMP_VERSION};

use crate::boundary::{BoundaryCurve, GammaPoint};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::wavespeed::{SpeedEval, WaveSpeed};

pub const FLAG_SET: u8 = 1;
/// Seeded from `γ` along at least one lattice direction.
pub const FLAG_BOUNDARY: u8 = 2;
/// `p` or `q` was clamped to the a priori cap.
pub const FLAG_CAPPED: u8 = 4;
/// `1 + cos w` or `1 + cos z` vanishes at or next to the node.
pub const FLAG_SINGULAR: u8 = 8;

/// Floor below which `p` or `q` counts as non-positive.
pub const PQ_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct State {
    pub w: f64,
    pub z: f64,
    pub p: f64,
    pub q: f64,
    pub u: f64,
    pub x: f64,
    pub t: f64,
}

impl State {
    pub fn from_gamma(g: &GammaPoint) -> Self {
        State {
            w: g.w,
            z: g.z,
            p: 1.0,
            q: 1.0,
            u: g.u,
            x: g.x,
            t: 0.0,
        }
    }

    fn max_diff(&self, o: &State) -> f64 {
        [
            self.w - o.w,
            self.z - o.z,
            self.p - o.p,
            self.q - o.q,
            self.u - o.u,
            self.x - o.x,
            self.t - o.t,
        ]
        .iter()
        .fold(0.0_f64, |m, d| m.max(d.abs()))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Node {
    pub s: State,
    pub flags: u8,
}

impl Node {
    #[inline]
    pub fn is_singular(&self) -> bool {
        self.flags & FLAG_SINGULAR != 0
    }
}

/// Right-hand sides of the characteristic system at one state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Rhs {
    pub w_y: f64,
    pub z_x: f64,
    pub p_y: f64,
    pub q_x: f64,
    pub u_x: f64,
    pub u_y: f64,
    pub x_x: f64,
    pub x_y: f64,
    pub t_x: f64,
    pub t_y: f64,
}

#[inline]
pub fn rhs(ev: &SpeedEval, s: &State) -> Rhs {
    let (sw, cw) = s.w.sin_cos();
    let (sz, cz) = s.z.sin_cos();
    let a8 = ev.a8;
    let pq = s.p * s.q;
    Rhs {
        w_y: a8 * (cz - cw) * s.q,
        z_x: a8 * (cw - cz) * s.p,
        p_y: a8 * (sz - sw) * pq,
        q_x: a8 * (sw - sz) * pq,
        u_x: sw * s.p / (4.0 * ev.c),
        u_y: sz * s.q / (4.0 * ev.c),
        x_x: (1.0 + cw) * s.p / 4.0,
        x_y: -(1.0 + cz) * s.q / 4.0,
        t_x: (1.0 + cw) * s.p / (4.0 * ev.c),
        t_y: (1.0 + cz) * s.q / (4.0 * ev.c),
    }
}

/// Axis-aligned rectangle in the `(X, Y)` plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub h: f64,
    /// Nodes are computed while one of their parents has `t <= horizon`.
    pub horizon: f64,
    /// Lattice window; defaults to the bounding box of `γ`.
    pub bbox: Option<Rect>,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub cap_factor: f64,
    pub sing_tol: f64,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            h: 0.01,
            horizon: 1.0,
            bbox: None,
            fp_tol: 1e-12,
            fp_max_iter: 8,
            cap_factor: 2.0,
            sing_tol: 1e-8,
            execution: Execution::default(),
        }
    }
}

impl SolverConfig {
    pub fn new(h: f64, horizon: f64) -> Self {
        SolverConfig {
            h,
            horizon,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidConfig(format!("h must be positive, got {}", self.h)));
        }
        if !(self.horizon >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "horizon must be nonnegative, got {}",
                self.horizon
            )));
        }
        if self.fp_max_iter < 1 {
            return Err(Error::InvalidConfig("fp_max_iter must be at least 1".into()));
        }
        if !(self.cap_factor >= 1.0) {
            return Err(Error::InvalidConfig("cap_factor must be at least 1".into()));
        }
        if !(self.fp_tol > 0.0) || !(self.sing_tol >= 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Constants needed by a single cell update.
#[derive(Clone, Copy, Debug)]
pub struct CellContext<'a> {
    pub ws: &'a WaveSpeed,
    pub e0: f64,
    pub cap_factor: f64,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub sing_tol: f64,
}

impl CellContext<'_> {
    /// `cap_factor * exp(2 C0 (|X| + |Y| + 4 E0))`.
    #[inline]
    pub fn cap(&self, xc: f64, yc: f64) -> f64 {
        self.cap_factor * (2.0 * self.ws.c0 * (xc.abs() + yc.abs() + 4.0 * self.e0)).exp()
    }
}

/// A parent of the node being advanced, at lattice distance `step`.
#[derive(Clone, Copy, Debug)]
pub struct Source {
    pub s: State,
    pub step: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Advanced {
    pub node: Node,
    /// `|u| , |x|, |t|` mismatch between the column and row estimates.
    pub discrepancy: [f64; 3],
    pub iterations: usize,
}

#[inline]
fn lift_index(a: f64) -> f64 {
    ((a + std::f64::consts::PI) / std::f64::consts::TAU).floor()
}

/// Whether the segment of angles from `a` to `b` meets an odd multiple of `π`.
#[inline]
pub fn crosses_odd_pi(a: f64, b: f64) -> bool {
    lift_index(a) != lift_index(b)
}

/// Advance one node at `(xc, yc)` from its south and west parents.
///
/// `(w, p)` are integrated from the south in `Y`, `(z, q)` from the west in
/// `X`; `(u, x, t)` are the mean of both estimates.
pub fn advance_node(south: &Source, west: &Source, xc: f64, yc: f64, ctx: &CellContext) -> Result<Advanced> {
    let (ls, lw) = (south.step, west.step);
    let (ss, sw) = (&south.s, &west.s);
    let fs = rhs(&ctx.ws.eval(ss.u), ss);
    let fw = rhs(&ctx.ws.eval(sw.u), sw);
    let cap = ctx.cap(xc, yc);
    let mut flags = FLAG_SET;

    let mut clamp = |n: &mut State| {
        if n.p > cap {
            n.p = cap;
            flags |= FLAG_CAPPED;
        }
        if n.q > cap {
            n.q = cap;
            flags |= FLAG_CAPPED;
        }
    };

    let compose = |fn_: &Rhs, k: f64| -> (State, [f64; 3]) {
        // k = 0 gives the explicit Euler predictor, k = 0.5 the trapezoid
        let e = 1.0 - k;
        let us = ss.u + ls * (e * fs.u_y + k * fn_.u_y);
        let uw = sw.u + lw * (e * fw.u_x + k * fn_.u_x);
        let xs = ss.x + ls * (e * fs.x_y + k * fn_.x_y);
        let xw = sw.x + lw * (e * fw.x_x + k * fn_.x_x);
        let ts = ss.t + ls * (e * fs.t_y + k * fn_.t_y);
        let tw = sw.t + lw * (e * fw.t_x + k * fn_.t_x);
        let n = State {
            w: ss.w + ls * (e * fs.w_y + k * fn_.w_y),
            p: ss.p + ls * (e * fs.p_y + k * fn_.p_y),
            z: sw.z + lw * (e * fw.z_x + k * fn_.z_x),
            q: sw.q + lw * (e * fw.q_x + k * fn_.q_x),
            u: 0.5 * (us + uw),
            x: 0.5 * (xs + xw),
            t: 0.5 * (ts + tw),
        };
        (n, [(us - uw).abs(), (xs - xw).abs(), (ts - tw).abs()])
    };

    let (mut n, mut disc) = compose(&fs, 0.0);
    clamp(&mut n);

    let mut prev_delta = f64::INFINITY;
    let mut delta = f64::INFINITY;
    let mut iterations = 0;
    while iterations < ctx.fp_max_iter {
        iterations += 1;
        let fnode = rhs(&ctx.ws.eval(n.u), &n);
        let (mut next, d) = compose(&fnode, 0.5);
        clamp(&mut next);
        prev_delta = delta;
        delta = next.max_diff(&n);
        n = next;
        disc = d;
        if !delta.is_finite() {
            break;
        }
        if delta < ctx.fp_tol {
            break;
        }
    }
    let diverged = !delta.is_finite() || (delta >= ctx.fp_tol && iterations >= 2 && delta > prev_delta);
    if diverged {
        return Err(Error::FixedPointDivergence {
            i: 0,
            j: 0,
            x: xc,
            y: yc,
            last: delta,
            iterations,
        });
    }
    if !(n.p >= PQ_FLOOR && n.q >= PQ_FLOOR) {
        return Err(Error::NonPositivePQ {
            i: 0,
            j: 0,
            x: xc,
            y: yc,
        });
    }

    // discrete monotonicity of the inverse map
    n.t = n.t.max(ss.t).max(sw.t);
    if sw.x <= ss.x {
        n.x = n.x.clamp(sw.x, ss.x);
    }

    if 1.0 + n.w.cos() < ctx.sing_tol
        || 1.0 + n.z.cos() < ctx.sing_tol
        || crosses_odd_pi(ss.w, n.w)
        || crosses_odd_pi(sw.z, n.z)
    {
        flags |= FLAG_SINGULAR;
    }

    Ok(Advanced {
        node: Node { s: n, flags },
        discrepancy: disc,
        iterations,
    })
}

/// One lattice column: nodes `j0, j0 + 1, ...` above the foot on `γ`.
#[derive(Clone, Debug)]
pub struct Column {
    pub j0: usize,
    pub foot: GammaPoint,
    pub nodes: Vec<Node>,
}

impl Column {
    #[inline]
    pub fn get(&self, j: usize) -> Option<&Node> {
        j.checked_sub(self.j0).and_then(|k| self.nodes.get(k))
    }

    /// One past the last computed row index.
    #[inline]
    pub fn end(&self) -> usize {
        self.j0 + self.nodes.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub nodes: usize,
    pub boundary_nodes: usize,
    pub capped: usize,
    pub singular: usize,
    pub max_u_discrepancy: f64,
    pub max_x_discrepancy: f64,
    pub max_t_discrepancy: f64,
    pub max_iterations: usize,
}

#[derive(Clone, Debug)]
pub struct CharGrid {
    pub h: f64,
    pub x_lo: f64,
    pub y_lo: f64,
    /// Largest column index.
    pub nx: usize,
    /// Largest row index.
    pub ny: usize,
    pub columns: Vec<Column>,
    /// First column index of each row.
    pub row_start: Vec<usize>,
    /// Foot of each row on `γ`.
    pub row_feet: Vec<GammaPoint>,
    pub horizon: f64,
    pub e0: f64,
    pub cap_factor: f64,
    pub sing_tol: f64,
    pub ws: WaveSpeed,
    pub curve: BoundaryCurve,
    pub stats: SolveStats,
}

impl CharGrid {
    #[inline]
    pub fn xc(&self, i: usize) -> f64 {
        self.x_lo + self.h * i as f64
    }

    #[inline]
    pub fn yc(&self, j: usize) -> f64 {
        self.y_lo + self.h * j as f64
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Option<&Node> {
        self.columns.get(i).and_then(|c| c.get(j))
    }

    #[inline]
    pub fn state(&self, i: usize, j: usize) -> Option<&State> {
        self.node(i, j).map(|n| &n.s)
    }

    /// All four corners of the cell with lower-left node `(i, j)` are set.
    #[inline]
    pub fn cell_complete(&self, i: usize, j: usize) -> bool {
        self.node(i, j).is_some()
            && self.node(i + 1, j).is_some()
            && self.node(i, j + 1).is_some()
            && self.node(i + 1, j + 1).is_some()
    }

    pub fn cap(&self, xc: f64, yc: f64) -> f64 {
        self.cap_factor * (2.0 * self.ws.c0 * (xc.abs() + yc.abs() + 4.0 * self.e0)).exp()
    }

    /// Iterate `(i, j, node)` over every set node.
    pub fn iter_nodes(&self) -> impl Iterator<Item = (usize, usize, &Node)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.nodes.iter().enumerate().map(move |(k, n)| (i, c.j0 + k, n)))
    }

    /// Largest `t` over set nodes.
    pub fn t_max(&self) -> f64 {
        self.iter_nodes().map(|(_, _, n)| n.s.t).fold(0.0, f64::max)
    }

    pub fn node_count(&self) -> usize {
        self.columns.iter().map(|c| c.nodes.len()).sum()
    }
}

fn attach(err: Error, i: usize, j: usize) -> Error {
    match err {
        Error::FixedPointDivergence {
            x, y, last, iterations, ..
        } => Error::FixedPointDivergence {
            i,
            j,
            x,
            y,
            last,
            iterations,
        },
        Error::NonPositivePQ { x, y, .. } => Error::NonPositivePQ { i, j, x, y },
        other => other,
    }
}

/// Solve the characteristic system on the lattice above `γ` up to the horizon.
pub fn solve_domain(curve: &BoundaryCurve, config: &SolverConfig, ws: &WaveSpeed) -> Result<CharGrid> {
    config.validate()?;
    let h = config.h;
    let (gx_lo, gx_hi) = curve.x_range();
    let (gy_lo, gy_hi) = curve.y_range();
    let bbox = config.bbox.unwrap_or(Rect {
        x_lo: gx_lo,
        x_hi: gx_hi,
        y_lo: gy_lo,
        y_hi: gy_hi,
    });
    let tol = 1e-9 * h;
    if !(bbox.x_lo >= gx_lo - tol && bbox.x_hi <= gx_hi + tol && bbox.y_lo >= gy_lo - tol && bbox.y_hi <= gy_hi + tol) {
        return Err(Error::InvalidConfig("box exceeds the extent of the data curve".into()));
    }
    if !(bbox.x_hi > bbox.x_lo && bbox.y_hi > bbox.y_lo) {
        return Err(Error::InvalidConfig("empty box".into()));
    }
    let nx = ((bbox.x_hi - bbox.x_lo) / h + 1e-9).floor() as usize;
    let ny = ((bbox.y_hi - bbox.y_lo) / h + 1e-9).floor() as usize;
    let xc = |i: usize| bbox.x_lo + h * i as f64;
    let yc = |j: usize| bbox.y_lo + h * j as f64;

    // every lattice column and row inside the box must start on γ
    let x_last = xc(nx).min(gx_hi);
    if curve.phi(x_last)? < bbox.y_lo - tol {
        return Err(Error::InvalidConfig("box bottom lies above the data curve".into()));
    }
    if curve.gamma_of_y(yc(ny).min(gy_hi))?.xc < bbox.x_lo - tol {
        return Err(Error::InvalidConfig(
            "box left side lies right of the data curve".into(),
        ));
    }

    let mut columns = Vec::with_capacity(nx + 1);
    for i in 0..=nx {
        let foot = curve.gamma_of_x(xc(i).clamp(gx_lo, gx_hi))?;
        let j0 = ((foot.yc - bbox.y_lo) / h - 1e-9).ceil().max(0.0) as usize;
        columns.push(Column {
            j0,
            foot,
            nodes: Vec::new(),
        });
    }
    let mut row_start = Vec::with_capacity(ny + 1);
    let mut row_feet = Vec::with_capacity(ny + 1);
    for j in 0..=ny {
        row_start.push(columns.partition_point(|c| c.j0 > j));
        row_feet.push(curve.gamma_of_y(yc(j).clamp(gy_lo, gy_hi))?);
    }

    let ctx = CellContext {
        ws,
        e0: curve.e0,
        cap_factor: config.cap_factor,
        fp_tol: config.fp_tol,
        fp_max_iter: config.fp_max_iter,
        sing_tol: config.sing_tol,
    };

    // columns become active on the diagonal of their first node
    let mut starts: Vec<(usize, usize)> = columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.j0 <= ny)
        .map(|(i, c)| (i + c.j0, i))
        .collect();
    starts.sort_unstable();
    let mut next_start = 0;
    let mut active: Vec<usize> = Vec::new();
    let mut stopped = vec![false; nx + 1];
    let mut stats = SolveStats::default();
    let mut tasks: Vec<(usize, usize, Source, Source, bool)> = Vec::new();

    let mut d = starts.first().map_or(usize::MAX, |s| s.0);
    while d != usize::MAX {
        while next_start < starts.len() && starts[next_start].0 == d {
            active.push(starts[next_start].1);
            next_start += 1;
        }
        active.sort_unstable();

        tasks.clear();
        for &i in &active {
            let col = &columns[i];
            let j = col.end();
            debug_assert_eq!(i + j, d);
            if j > ny {
                stopped[i] = true;
                continue;
            }
            let (south, s_boundary) = match col.nodes.last() {
                Some(n) => (Source { s: n.s, step: h }, false),
                None => (
                    Source {
                        s: State::from_gamma(&col.foot),
                        step: (yc(j) - col.foot.yc).max(0.0),
                    },
                    true,
                ),
            };
            let west = if i > 0 && columns[i - 1].j0 <= j {
                columns[i - 1].get(j).map(|n| (Source { s: n.s, step: h }, false))
            } else {
                let foot = &row_feet[j];
                Some((
                    Source {
                        s: State::from_gamma(foot),
                        step: (xc(i) - foot.xc).max(0.0),
                    },
                    true,
                ))
            };
            let Some((west, w_boundary)) = west else {
                stopped[i] = true;
                continue;
            };
            if south.s.t.min(west.s.t) > config.horizon {
                stopped[i] = true;
                continue;
            }
            tasks.push((i, j, south, west, s_boundary || w_boundary));
        }
        active.retain(|&i| !stopped[i]);

        let results = config.execution.map(&tasks, |(i, j, south, west, _)| {
            advance_node(south, west, xc(*i), yc(*j), &ctx).map_err(|e| attach(e, *i, *j))
        });
        for (task, res) in tasks.iter().zip(results) {
            let mut adv = res?;
            if task.4 {
                adv.node.flags |= FLAG_BOUNDARY;
                stats.boundary_nodes += 1;
            }
            if adv.node.flags & FLAG_CAPPED != 0 {
                stats.capped += 1;
            }
            if adv.node.is_singular() {
                stats.singular += 1;
            }
            stats.nodes += 1;
            stats.max_u_discrepancy = stats.max_u_discrepancy.max(adv.discrepancy[0]);
            stats.max_x_discrepancy = stats.max_x_discrepancy.max(adv.discrepancy[1]);
            stats.max_t_discrepancy = stats.max_t_discrepancy.max(adv.discrepancy[2]);
            stats.max_iterations = stats.max_iterations.max(adv.iterations);
            columns[task.0].nodes.push(adv.node);
        }

        d = if active.is_empty() {
            starts.get(next_start).map_or(usize::MAX, |s| s.0)
        } else {
            d + 1
        };
    }

    Ok(CharGrid {
        h,
        x_lo: bbox.x_lo,
        y_lo: bbox.y_lo,
        nx,
        ny,
        columns,
        row_start,
        row_feet,
        horizon: config.horizon,
        e0: curve.e0,
        cap_factor: config.cap_factor,
        sing_tol: config.sing_tol,
        ws: *ws,
        curve: curve.clone(),
        stats,
    })
}

/// Maximum over interior cells of the mixed-difference mismatch
/// `|Δ_Y(u_X) - Δ_X(u_Y)| / h`, with `u_X`, `u_Y` from the closed-form
/// derivatives averaged over cell edges.
pub fn compatibility_residual(grid: &CharGrid) -> f64 {
    let ux = |s: &State| s.w.sin() * s.p / (4.0 * grid.ws.c(s.u));
    let uy = |s: &State| s.z.sin() * s.q / (4.0 * grid.ws.c(s.u));
    let mut worst = 0.0_f64;
    for_each_interior_cell(grid, |[a, b, c, d]| {
        // a = (i, j), b = (i+1, j), c = (i, j+1), d = (i+1, j+1)
        let dy_ux = (ux(&c.s) + ux(&d.s) - ux(&a.s) - ux(&b.s)) / (2.0 * grid.h);
        let dx_uy = (uy(&b.s) + uy(&d.s) - uy(&a.s) - uy(&c.s)) / (2.0 * grid.h);
        worst = worst.max((dy_ux - dx_uy).abs());
    });
    worst
}

/// Maximum cell residuals of `q_X + p_Y` and `(q/c)_X - (p/c)_Y`.
pub fn conservation_residual(grid: &CharGrid) -> (f64, f64) {
    let h2 = 2.0 * grid.h;
    let mut r1 = 0.0_f64;
    let mut r2 = 0.0_f64;
    let pc = |s: &State| s.p / grid.ws.c(s.u);
    let qc = |s: &State| s.q / grid.ws.c(s.u);
    for_each_interior_cell(grid, |[a, b, c, d]| {
        let (a, b, c, d) = (&a.s, &b.s, &c.s, &d.s);
        let qx = (b.q + d.q - a.q - c.q) / h2;
        let py = (c.p + d.p - a.p - b.p) / h2;
        r1 = r1.max((qx + py).abs());
        let qcx = (qc(b) + qc(d) - qc(a) - qc(c)) / h2;
        let pcy = (pc(c) + pc(d) - pc(a) - pc(b)) / h2;
        r2 = r2.max((qcx - pcy).abs());
    });
    (r1, r2)
}

/// Visit complete cells none of whose corners is a boundary-layer node.
pub(crate) fn for_each_interior_cell<F: FnMut([&Node; 4])>(grid: &CharGrid, mut f: F) {
    for i in 0..grid.nx {
        let (left, right) = (&grid.columns[i], &grid.columns[i + 1]);
        let lo = left.j0.max(right.j0);
        let hi = left.end().min(right.end());
        for j in lo..hi.saturating_sub(1) {
            let corners = [
                left.get(j).unwrap(),
                right.get(j).unwrap(),
                left.get(j + 1).unwrap(),
                right.get(j + 1).unwrap(),
            ];
            if corners.iter().any(|n| n.flags & FLAG_BOUNDARY != 0) {
                continue;
            }
            f(corners);
        }
    }
}

#[cfg(test)]
mod tests;
