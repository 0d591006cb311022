use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use varwave::charsolver::{compatibility_residual, conservation_residual, write_dump, CharGrid};
use varwave::diagnostics::{
    holder_budget, lambda_series, lipschitz_check, loop_integrals, max_lambda_slope, registered_test_functions,
    sample_rects, singular_sites, weak_residual, DiagnosticsReport, HolderBound, Line, LipschitzPair, LoopResult,
    FORM_NAMES,
};
use varwave::oracle::{dalembert, upwind_solve, FdState, UpwindOptions};
use varwave::reconstruct::{energy_abs_on_curve, uniform_xs, TimeSlice};
use varwave::scenario::{DiagnosticToggles, Scenario, SpeedSpec};
use varwave::{Error, Execution, Solution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Compare {
    None,
    Dalembert,
    Upwind,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    pub compare: Compare,
    pub execution: Execution,
    /// Diagnostics switched on in addition to those of the scenario.
    pub extra: DiagnosticToggles,
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub report: String,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Floats are written with 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

struct SliceRecord {
    tau: f64,
    total: f64,
    e_abs: f64,
    ut_l2: f64,
    n_singular: usize,
    oracle_err: Option<f64>,
}

const MEASURE_BINS: usize = 200;
const UPWIND_CFL: f64 = 0.5;

fn write_file(dir: &Path, name: &str, body: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    files.push(path);
    Ok(())
}

fn slice_csv(s: &TimeSlice) -> String {
    let mut out = String::from("x,u,ut,ux,Edens,Mdens,singular\n");
    for k in 0..s.xs.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(s.xs[k]),
            num(s.u[k]),
            num(s.ut[k]),
            num(s.ux[k]),
            num(s.edens[k]),
            num(s.mdens[k]),
            u8::from(s.singular[k])
        );
    }
    out
}

fn ut_l2(s: &TimeSlice) -> f64 {
    let mut acc = 0.0;
    for k in 1..s.xs.len() {
        let dx = s.xs[k] - s.xs[k - 1];
        acc += 0.5 * dx * (s.ut[k] * s.ut[k] + s.ut[k - 1] * s.ut[k - 1]);
    }
    acc.sqrt()
}

pub fn run(scn: &Scenario, opts: &RunOptions) -> Result<RunSummary> {
    let ctx = |what: &str| format!("scenario '{}': {what}", scn.name);
    let ws = scn.wave_speed().with_context(|| ctx("wave speed"))?;
    let data = scn.initial_data().with_context(|| ctx("initial data"))?;
    let config = scn.solver_config(opts.execution);
    let horizon = scn.run.horizon;
    let needs_backward = scn.run.slices.iter().any(|&t| t < 0.0 && -t <= horizon);
    let sol = varwave::solve(&data, &ws, &config, scn.run.box_margin, needs_backward)
        .with_context(|| ctx("characteristic solve"))?;
    let grid = &sol.forward;

    fs::create_dir_all(&opts.out).with_context(|| format!("creating {}", opts.out.display()))?;
    let mut summary = RunSummary::default();
    let mut diag_rows: Vec<(String, String, f64)> = Vec::new();

    if let Some(path) = &opts.dump {
        let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_dump(grid, BufWriter::new(f)).with_context(|| ctx("grid dump"))?;
        summary.files.push(path.clone());
    }

    let upwind = match opts.compare {
        Compare::Upwind => {
            let mut uo = UpwindOptions::new(0.5 * scn.run.h, varwave::solution::domain_margin(&ws, horizon, 0.0));
            uo.snapshots = scn
                .run
                .slices
                .iter()
                .copied()
                .filter(|t| *t > 0.0 && *t <= horizon)
                .collect();
            let t_end = uo.snapshots.iter().copied().fold(0.0, f64::max);
            match upwind_solve(&data, &ws, t_end, UPWIND_CFL, &uo) {
                Ok(traj) => Some(traj),
                Err(e @ Error::BlowupSuspected { .. }) => {
                    summary.warnings.push(format!("upwind comparison skipped: {e}"));
                    None
                }
                Err(e) => return Err(e).with_context(|| ctx("upwind oracle")),
            }
        }
        _ => None,
    };
    let c0 = match (&scn.speed, opts.compare) {
        (SpeedSpec::Constant { c0 }, _) => Some(*c0),
        (_, Compare::Dalembert) => {
            summary
                .warnings
                .push("d'Alembert comparison needs a constant speed; skipped".to_string());
            None
        }
        _ => None,
    };

    let mut taus: Vec<f64> = Vec::new();
    for &t in &scn.run.slices {
        if !taus.contains(&t) {
            taus.push(t);
        }
    }
    let mut records = Vec::new();
    let (hull_lo, hull_hi) = data.hull();
    for &tau in &taus {
        if tau.abs() > horizon {
            summary.warnings.push(format!(
                "slice t = {tau} lies outside the horizon [-{horizon}, {horizon}]; skipped"
            ));
            continue;
        }
        let negative = tau < 0.0;
        let curve = match sol.level_curve(tau) {
            Ok(c) => c,
            Err(e @ Error::OutOfHorizon { .. }) => {
                summary.warnings.push(format!("slice t = {tau}: {e}; skipped"));
                continue;
            }
            Err(e) => return Err(e).with_context(|| ctx("level curve")),
        };
        let xs = uniform_xs(&curve, 0.5 * scn.run.h);
        let slice = sol.slice_on(&curve, negative, &xs);
        write_file(
            &opts.out,
            &format!("slice_{tau}.csv"),
            &slice_csv(&slice),
            &mut summary.files,
        )?;

        let (cx_lo, cx_hi) = curve.x_range();
        let spread = ws.kappa * tau.abs();
        let (lo, hi) = ((hull_lo - spread).max(cx_lo), (hull_hi + spread).min(cx_hi));
        let bps: Vec<f64> = if hi > lo {
            (0..=MEASURE_BINS)
                .map(|k| lo + (hi - lo) * k as f64 / MEASURE_BINS as f64)
                .collect()
        } else {
            Vec::new()
        };
        let m = sol.measures_on(&curve, negative, &bps)?;
        let mut body = String::from("a,b,mu_minus,mu_plus\n");
        for k in 0..m.mu_minus.len() {
            let a = if k == 0 { cx_lo } else { bps[k - 1] };
            let b = if k == bps.len() { cx_hi } else { bps[k] };
            let _ = writeln!(
                body,
                "{},{},{},{}",
                num(a),
                num(b),
                num(m.mu_minus[k]),
                num(m.mu_plus[k])
            );
        }
        write_file(&opts.out, &format!("measures_{tau}.csv"), &body, &mut summary.files)?;

        let oracle_err = if let Some(c0) = c0.filter(|_| opts.compare == Compare::Dalembert) {
            Some(max_err(&slice, |x| dalembert(&data, c0, tau, x)))
        } else if let (Some(traj), false) = (&upwind, negative) {
            traj.iter()
                .find(|s: &&FdState| s.t == tau)
                .map(|s| max_err(&slice, |x| s.u_at(x)))
        } else {
            None
        };
        records.push(SliceRecord {
            tau,
            total: m.total,
            e_abs: energy_abs_on_curve(&curve),
            ut_l2: ut_l2(&slice),
            n_singular: slice.singular.iter().filter(|s| **s).count(),
            oracle_err,
        });
    }

    for r in &records {
        diag_rows.push(("energy".into(), format!("measure_total_t={}", r.tau), r.total));
        diag_rows.push(("energy".into(), format!("absolute_t={}", r.tau), r.e_abs));
        diag_rows.push(("energy".into(), format!("ut_l2_t={}", r.tau), r.ut_l2));
        if let Some(e) = r.oracle_err {
            diag_rows.push(("oracle".into(), format!("max_abs_u_error_t={}", r.tau), e));
        }
    }

    let compat = compatibility_residual(grid);
    let (r1, r2) = conservation_residual(grid);
    diag_rows.push(("residual".into(), "compatibility".into(), compat));
    diag_rows.push(("residual".into(), "conservation_p_q".into(), r1));
    diag_rows.push(("residual".into(), "conservation_p_q_over_c".into(), r2));

    let toggles = DiagnosticToggles {
        loops: scn.diagnostics.loops || opts.extra.loops,
        weak: scn.diagnostics.weak || opts.extra.weak,
        lipschitz: scn.diagnostics.lipschitz || opts.extra.lipschitz,
        holder: scn.diagnostics.holder || opts.extra.holder,
        lambda: scn.diagnostics.lambda || opts.extra.lambda,
        singular: scn.diagnostics.singular || opts.extra.singular,
    };
    let report = diagnostics(&sol, horizon, toggles, &opts.out, &mut summary, &mut diag_rows)?;

    let mut body = String::from("family,name,value\n");
    for (f, n, v) in &diag_rows {
        let _ = writeln!(body, "{f},{n},{}", num(*v));
    }
    write_file(&opts.out, "diagnostics.csv", &body, &mut summary.files)?;

    let text = report_text(scn, &sol, &records, &report, compat, (r1, r2), &summary.warnings);
    write_file(&opts.out, "report.txt", &text, &mut summary.files)?;
    summary.report = text;
    Ok(summary)
}

fn max_err(s: &TimeSlice, exact: impl Fn(f64) -> f64) -> f64 {
    s.xs.iter()
        .zip(&s.u)
        .zip(&s.singular)
        .filter(|(_, sing)| !**sing)
        .map(|((x, u), _)| (u - exact(*x)).abs())
        .fold(0.0, f64::max)
}

fn diagnostics(
    sol: &Solution,
    horizon: f64,
    toggles: DiagnosticToggles,
    outdir: &Path,
    summary: &mut RunSummary,
    rows: &mut Vec<(String, String, f64)>,
) -> Result<DiagnosticsReport> {
    let grid: &CharGrid = &sol.forward;
    let mut rep = DiagnosticsReport::default();

    if toggles.loops {
        let half = ((0.1 / grid.h).round() as usize).max(2);
        for rect in sample_rects(grid, 20, half) {
            rep.loop_residuals.push(LoopResult {
                rect,
                values: loop_integrals(grid, &rect)?,
            });
        }
        let mut body = String::from("i0,i1,j0,j1,");
        body.push_str(&FORM_NAMES.join(","));
        body.push('\n');
        for r in &rep.loop_residuals {
            let vals: Vec<String> = r.values.iter().map(|v| num(*v)).collect();
            let _ = writeln!(
                body,
                "{},{},{},{},{}",
                r.rect.i0,
                r.rect.i1,
                r.rect.j0,
                r.rect.j1,
                vals.join(",")
            );
        }
        write_file(outdir, "loops.csv", &body, &mut summary.files)?;
        for (k, m) in rep.loop_maxima().iter().enumerate() {
            rows.push(("loops".into(), format!("max_abs_{}", FORM_NAMES[k]), *m));
        }
    }

    if toggles.weak {
        let (lo, hi) = sol.data.hull();
        let mut body = String::from("name,tc,rt,xc,rx,residual\n");
        for tf in registered_test_functions(horizon, 0.5 * (lo + hi), 0.5 * (hi - lo) + 0.5) {
            match weak_residual(grid, &tf) {
                Ok(v) => {
                    let _ = writeln!(
                        body,
                        "{},{},{},{},{},{}",
                        tf.name,
                        num(tf.tc),
                        num(tf.rt),
                        num(tf.xc),
                        num(tf.rx),
                        num(v)
                    );
                    rows.push(("weak".into(), tf.name.clone(), v));
                    rep.weak_residuals.push((tf.name.clone(), v));
                }
                Err(e) => summary.warnings.push(format!("weak residual {}: {e}", tf.name)),
            }
        }
        write_file(outdir, "weak.csv", &body, &mut summary.files)?;
    }

    if toggles.lipschitz {
        let e0 = grid.e0;
        let kappa = sol.ws.kappa;
        let mut body = String::from("s,t,lhs,rhs\n");
        let mut worst = f64::NEG_INFINITY;
        for k in 0..10 {
            let s = horizon * k as f64 / 20.0;
            let t = horizon * (2 * k + 3).min(20) as f64 / 20.0;
            let (lhs, rhs) = lipschitz_check(grid, s, t, e0, kappa)?;
            let _ = writeln!(body, "{},{},{},{}", num(s), num(t), num(lhs), num(rhs));
            worst = worst.max(lhs - rhs);
            rep.lipschitz_pairs.push(LipschitzPair { s, t, lhs, rhs });
        }
        write_file(outdir, "lipschitz.csv", &body, &mut summary.files)?;
        rows.push(("lipschitz".into(), "max_lhs_minus_rhs".into(), worst));
    }

    if toggles.holder {
        let mut body = String::from("kind,index,coord,value\n");
        let rows_with_nodes: Vec<usize> = (0..=grid.ny)
            .filter(|&j| grid.node(grid.row_start[j], j).is_some())
            .collect();
        let cols_with_nodes: Vec<usize> = (0..=grid.nx).filter(|&i| !grid.columns[i].nodes.is_empty()).collect();
        let mut worst = 0.0_f64;
        for (lines, is_row) in [(&rows_with_nodes, true), (&cols_with_nodes, false)] {
            if lines.is_empty() {
                continue;
            }
            for k in 0..10 {
                let idx = lines[(k * (lines.len() - 1)) / 9];
                let (line, coord) = if is_row {
                    (Line::Row(idx), grid.yc(idx))
                } else {
                    (Line::Column(idx), grid.xc(idx))
                };
                let value = holder_budget(grid, line, 0.0, horizon);
                worst = worst.max(value);
                let kind = if is_row { "row" } else { "column" };
                let _ = writeln!(body, "{kind},{idx},{},{}", num(coord), num(value));
                rep.holder_bounds.push(HolderBound { line, coord, value });
            }
        }
        write_file(outdir, "holder.csv", &body, &mut summary.files)?;
        rows.push(("holder".into(), "max_budget".into(), worst));
    }

    if toggles.lambda {
        let taus: Vec<f64> = (0..=20).map(|k| horizon * k as f64 / 20.0).collect();
        rep.lambda_series = lambda_series(grid, &taus)?;
        let mut body = String::from("tau,lambda\n");
        for (t, l) in &rep.lambda_series {
            let _ = writeln!(body, "{},{}", num(*t), num(*l));
        }
        write_file(outdir, "lambda.csv", &body, &mut summary.files)?;
        rows.push((
            "lambda".into(),
            "max_one_sided_slope".into(),
            max_lambda_slope(&rep.lambda_series),
        ));
    }

    if toggles.singular {
        rep.singular_sites = singular_sites(grid);
        let mut body = String::from("t,x,cprime\n");
        for s in &rep.singular_sites {
            let _ = writeln!(body, "{},{},{}", num(s.t), num(s.x), num(s.cp));
        }
        write_file(outdir, "singular.csv", &body, &mut summary.files)?;
        rows.push(("singular".into(), "count".into(), rep.singular_sites.len() as f64));
        if let Some(first) = rep.singular_sites.first() {
            rows.push(("singular".into(), "first_t".into(), first.t));
        }
    }
    Ok(rep)
}

fn report_text(
    scn: &Scenario,
    sol: &Solution,
    records: &[SliceRecord],
    rep: &DiagnosticsReport,
    compat: f64,
    (r1, r2): (f64, f64),
    warnings: &[String],
) -> String {
    let g = &sol.forward;
    let st = &g.stats;
    let mut out = String::new();
    let _ = writeln!(out, "scenario        {}", scn.name);
    let _ = writeln!(out, "E0              {}", num(g.e0));
    let _ = writeln!(out, "kappa           {}", num(sol.ws.kappa));
    let _ = writeln!(out, "C0              {}", num(sol.ws.c0));
    let _ = writeln!(out, "h               {}", num(g.h));
    let _ = writeln!(out, "T               {}", num(g.horizon));
    let _ = writeln!(out, "lattice         {} x {} ({} nodes)", g.nx + 1, g.ny + 1, st.nodes);
    let _ = writeln!(out, "cap events      {}", st.capped);
    let _ = writeln!(out, "singular nodes  {}", st.singular);
    let _ = writeln!(out, "max iterations  {}", st.max_iterations);
    let _ = writeln!(
        out,
        "discrepancy     u {} x {} t {}",
        num(st.max_u_discrepancy),
        num(st.max_x_discrepancy),
        num(st.max_t_discrepancy)
    );
    let _ = writeln!(out, "compatibility   {}", num(compat));
    let _ = writeln!(out, "conservation    {} {}", num(r1), num(r2));

    let _ = writeln!(out, "\nslices");
    for r in records {
        let _ = write!(
            out,
            "  t {:>8}  measure {}  absolute {}  ut_l2 {}  singular samples {}",
            r.tau,
            num(r.total),
            num(r.e_abs),
            num(r.ut_l2),
            r.n_singular
        );
        if let Some(e) = r.oracle_err {
            let _ = write!(out, "  oracle max |du| {}", num(e));
        }
        out.push('\n');
    }

    if !rep.singular_sites.is_empty() {
        let first = &rep.singular_sites[0];
        let _ = writeln!(
            out,
            "\nsingular sites  {} (first at t {} x {} with c'(u) {})",
            rep.singular_sites.len(),
            num(first.t),
            num(first.x),
            num(first.cp)
        );
    }
    if !rep.loop_residuals.is_empty() {
        let _ = writeln!(
            out,
            "\nloop integrals (max abs over {} rectangles)",
            rep.loop_residuals.len()
        );
        for (name, m) in FORM_NAMES.iter().zip(rep.loop_maxima()) {
            let _ = writeln!(out, "  {name:<12} {}", num(m));
        }
    }
    if !rep.weak_residuals.is_empty() {
        let _ = writeln!(out, "\nweak residuals");
        for (name, v) in &rep.weak_residuals {
            let _ = writeln!(out, "  {name:<12} {}", num(*v));
        }
    }
    if !rep.lipschitz_pairs.is_empty() {
        let ok = rep.lipschitz_pairs.iter().all(|p| p.lhs <= p.rhs);
        let _ = writeln!(
            out,
            "\nlipschitz pairs {} ({})",
            rep.lipschitz_pairs.len(),
            if ok { "within bound" } else { "bound exceeded" }
        );
    }
    if !rep.holder_bounds.is_empty() {
        let worst = rep.holder_bounds.iter().map(|b| b.value).fold(0.0, f64::max);
        let _ = writeln!(out, "\nholder budget   max {}", num(worst));
    }
    if !rep.lambda_series.is_empty() {
        let _ = writeln!(out, "\ninteraction potential");
        for (t, l) in &rep.lambda_series {
            let _ = writeln!(out, "  t {}  {}", num(*t), num(*l));
        }
        let _ = writeln!(
            out,
            "  max one-sided slope {}",
            num(max_lambda_slope(&rep.lambda_series))
        );
    }
    if !warnings.is_empty() {
        let _ = writeln!(out, "\nwarnings");
        for w in warnings {
            let _ = writeln!(out, "  {w}");
        }
    }
    out
}
