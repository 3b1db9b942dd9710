//! Subcommand implementations. Each returns a short summary for stdout.

use std::fmt::Write as _;

use foldwave_core::continuation::{
    check_containment, detect_bt, detect_cusp, fold::singular_curve_point, grid_scan_oracle,
    trace_fold_curves, Axis, BeamFamily, BifurcationCurve, BtReport, Containment, CubicFamily,
    Cusp, OracleField, SurrogateCubic,
};
use foldwave_core::equilibria::{critical_manifold, uniform_grid, well_count};
use foldwave_core::galerkin::compatibility_report;
use foldwave_core::model::coeffs_slow;
use foldwave_core::simulation::{
    classify_bursts, default_amp_threshold, default_burst_window, integrate, transformed_portrait,
    FastState,
};
use foldwave_core::SlowPhase;

use crate::config::{RunConfig, SystemKind};
use crate::error::{CliError, CliResult};
use crate::output::{Field, Outputs};

pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "z1", "z2", "d"];
pub const BURSTS_HEADER: [&str; 5] = ["t_start", "t_end", "phase", "center", "peak"];
pub const PORTRAIT_HEADER: [&str; 2] = ["d", "z1"];
pub const MANIFOLD_HEADER: [&str; 9] =
    ["d", "z1", "k_eff", "re_l1", "im_l1", "re_l2", "im_l2", "stability", "branch_id"];
pub const POTENTIAL_HEADER: [&str; 5] = ["d", "F", "J", "G", "well_count"];
pub const BRACKETS_HEADER: [&str; 4] = ["d_lo", "d_hi", "count_lo", "count_hi"];
pub const FOLDCURVE_HEADER: [&str; 8] =
    ["p1_name", "p1", "p2_name", "p2", "z1", "test_cusp", "test_bt", "kind"];
pub const CUSPS_HEADER: [&str; 10] = [
    "p1_name",
    "p1",
    "p2_name",
    "p2",
    "z1",
    "sigma_pp",
    "sigma_ppp",
    "residual",
    "nondegenerate",
    "normal_form_decreasing",
];
pub const COMPAT_HEADER: [&str; 6] = ["t", "coef", "closed_form", "quadrature", "abs_diff", "rel_diff"];

pub fn simulate(cfg: &RunConfig) -> CliResult<String> {
    cfg.validate()?;
    let traj = integrate(&cfg.params, FastState::new(cfg.z1_0, cfg.z2_0), cfg.t_span(), &cfg.sim)?;
    let window = cfg.burst_window.unwrap_or_else(|| default_burst_window(&cfg.params));
    let threshold = cfg.amp_threshold.unwrap_or_else(|| default_amp_threshold(&traj));
    let bursts = classify_bursts(&traj, window, threshold)?;
    let portrait = transformed_portrait(&traj);

    let mut out = Outputs::new(cfg, "simulate");
    out.csv(
        "trajectory.csv",
        &TRAJECTORY_HEADER,
        traj.samples
            .iter()
            .map(|s| vec![Field::F(s.t), Field::F(s.state.z1), Field::F(s.state.z2), Field::F(s.d)]),
    )?;
    out.csv(
        "bursts.csv",
        &BURSTS_HEADER,
        bursts.episodes.iter().map(|e| {
            vec![
                Field::F(e.t_start),
                Field::F(e.t_end),
                Field::S(e.phase.name()),
                Field::F(e.center),
                Field::F(e.peak),
            ]
        }),
    )?;
    out.csv("portrait.csv", &PORTRAIT_HEADER, portrait.iter().map(|&(d, z)| vec![Field::F(d), Field::F(z)]))?;
    out.note("samples", traj.samples.len());
    out.note("accepted_steps", traj.meta.accepted_steps);
    out.note("rejected_steps", traj.meta.rejected_steps);
    out.note("burst_window", bursts.window);
    out.note("amp_threshold", bursts.amp_threshold);
    out.note("transitions", bursts.transition_count);
    out.finish(cfg)?;

    Ok(format!(
        "simulate: {} samples, max |z1| = {}, {} episodes, {} transitions -> {}",
        traj.samples.len(),
        traj.max_abs_z1(),
        bursts.episodes.len(),
        bursts.transition_count,
        cfg.out_dir.display()
    ))
}

pub fn manifold(cfg: &RunConfig) -> CliResult<String> {
    cfg.validate()?;
    let grid = uniform_grid(cfg.d_min, cfg.d_max, cfg.d_points);
    let m = critical_manifold(&cfg.params, &grid, cfg.branch)?;
    let range = cfg.well_range.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));

    let mut potential = Vec::with_capacity(grid.len());
    for &d in &grid {
        let c = coeffs_slow(SlowPhase::new(d, cfg.branch)?, &cfg.params)?;
        potential.push((d, c, well_count(&c, cfg.params.gamma, range)));
    }

    let mut out = Outputs::new(cfg, "manifold");
    out.csv(
        "manifold.csv",
        &MANIFOLD_HEADER,
        m.branches.iter().flat_map(|b| {
            b.points.iter().map(move |p| {
                vec![
                    Field::F(p.d),
                    Field::F(p.z1_star),
                    Field::F(p.k_eff),
                    Field::F(p.eigenvalues[0].re),
                    Field::F(p.eigenvalues[0].im),
                    Field::F(p.eigenvalues[1].re),
                    Field::F(p.eigenvalues[1].im),
                    Field::S(p.stability.name()),
                    Field::U(b.id),
                ]
            })
        }),
    )?;
    out.csv(
        "potential.csv",
        &POTENTIAL_HEADER,
        potential.iter().map(|(d, c, w)| {
            vec![Field::F(*d), Field::F(c.forcing), Field::F(c.stiffness), Field::F(c.quadratic), Field::U(*w)]
        }),
    )?;
    out.csv(
        "fold_brackets.csv",
        &BRACKETS_HEADER,
        m.brackets.iter().map(|b| {
            vec![Field::F(b.d_lo), Field::F(b.d_hi), Field::U(b.count_lo), Field::U(b.count_hi)]
        }),
    )?;
    out.note("branches", m.branches.len());
    out.note("fold_brackets", m.brackets.len());
    out.finish(cfg)?;

    Ok(format!(
        "manifold: {} branches, {} fold brackets over {} d-values -> {}",
        m.branches.len(),
        m.brackets.len(),
        grid.len(),
        cfg.out_dir.display()
    ))
}

/// Everything the fold-curve and cusp-scan commands compute.
pub struct FoldAnalysis {
    pub field: OracleField,
    pub curves: Vec<BifurcationCurve>,
    pub cusps: Vec<Vec<Cusp>>,
    pub bt: Vec<BtReport>,
    pub containment: Containment,
}

fn analyse<F: CubicFamily>(family: &F, cfg: &RunConfig) -> CliResult<FoldAnalysis> {
    let (p1, p2) = cfg.pair();
    if p1 == p2 {
        return Err(CliError::Config(format!("p1 and p2 are both `{p1}`")));
    }
    for id in [p1, p2] {
        if !family.supports(id) {
            return Err(CliError::Config(format!(
                "parameter `{id}` is not available for the {} system",
                cfg.system.name()
            )));
        }
    }
    let [r1, r2] = cfg.ranges();
    let x = Axis::new(p1, r1.0, r1.1, cfg.grid_x).map_err(|e| CliError::Config(e.to_string()))?;
    let y = Axis::new(p2, r2.0, r2.1, cfg.grid_y).map_err(|e| CliError::Config(e.to_string()))?;
    let field = grid_scan_oracle(family, x, y)?;
    if field.bracket_cells().is_empty() {
        return Err(CliError::Empty(format!(
            "no fold in {p1} x {p2} = [{}, {}] x [{}, {}]",
            r1.0, r1.1, r2.0, r2.1
        )));
    }
    let curves = trace_fold_curves(family, &field, &cfg.cont, cfg.max_curves)?;
    if curves.is_empty() {
        return Err(CliError::Empty(format!(
            "{} bracket cells found but no fold could be seeded",
            field.bracket_cells().len()
        )));
    }
    let mut cusps = Vec::with_capacity(curves.len());
    let mut bt = Vec::with_capacity(curves.len());
    for c in &curves {
        cusps.push(detect_cusp(family, c, &cfg.cont)?);
        bt.push(detect_bt(family, c, cfg.bt_mode, &cfg.cont)?);
    }
    let containment = check_containment(&field, &curves);
    Ok(FoldAnalysis {
        field,
        curves,
        cusps,
        bt,
        containment,
    })
}

/// Builds the configured family and runs the fold analysis.
pub fn fold_analysis(cfg: &RunConfig) -> CliResult<FoldAnalysis> {
    cfg.validate()?;
    match cfg.system {
        SystemKind::Beam => analyse(&BeamFamily::new(cfg.params, cfg.d)?, cfg),
        SystemKind::Surrogate => {
            let s = &cfg.surrogate;
            let fam = SurrogateCubic {
                forcing: s.forcing,
                linear: s.linear,
                quadratic: s.quadratic,
                gamma: s.gamma,
                xi: cfg.params.xi,
            };
            analyse(&fam, cfg)
        }
    }
}

fn cusp_line(c: &Cusp) -> String {
    let params: Vec<String> = c.point.params.iter().map(|(id, v)| format!("{id}={v}")).collect();
    format!(
        "  cusp {} z1={} sigma_pp={:e} sigma_ppp={} residual={:e} nondegenerate={} normal_form_decreasing={} reduced_precision={}",
        params.join(" "),
        c.point.z1,
        c.point.tests.sigma_pp,
        c.sigma_ppp,
        c.point.residual,
        c.nondegenerate,
        c.normal_form_decreasing,
        c.point.reduced_precision
    )
}

fn render_report(cfg: &RunConfig, a: &FoldAnalysis) -> String {
    let (p1, p2) = cfg.pair();
    let mut s = String::new();
    let _ = writeln!(s, "system: {}", cfg.system.name());
    let _ = writeln!(
        s,
        "oracle: {} x {} grid over ({p1}, {p2}), {} bracket cells",
        cfg.grid_x,
        cfg.grid_y,
        a.field.bracket_cells().len()
    );
    let mut row = 0usize;
    for (i, c) in a.curves.iter().enumerate() {
        let n = c.points.len()
            + a.cusps[i].len()
            + a.bt[i].points.len();
        let _ = writeln!(
            s,
            "curve {i}: rows {}..{} ({} points), backward: {}, forward: {}",
            row,
            row + n,
            c.points.len(),
            c.backward.describe(),
            c.forward.describe()
        );
        row += n;
        for cusp in &a.cusps[i] {
            let _ = writeln!(s, "{}", cusp_line(cusp));
        }
        let _ = writeln!(s, "  bt ({}): {}", a.bt[i].mode.name(), a.bt[i].diagnostic);
    }
    let c = &a.containment;
    let _ = writeln!(
        s,
        "containment: {} of {} points inside bracket cells, {} of {} bracket cells without a nearby point",
        c.points_checked - c.outside.len(),
        c.points_checked,
        c.uncovered.len(),
        c.bracket_cells
    );
    s
}

pub fn fold_curve(cfg: &RunConfig) -> CliResult<String> {
    let a = fold_analysis(cfg)?;
    let (p1, p2) = cfg.pair();
    let mut rows = Vec::new();
    for (i, c) in a.curves.iter().enumerate() {
        let mut singular: Vec<_> = a.cusps[i]
            .iter()
            .map(|k| (k.segment, singular_curve_point(&k.point, c, c.points[k.segment].internal)))
            .collect();
        singular.extend(
            a.bt[i]
                .points
                .iter()
                .map(|(seg, p)| (*seg, singular_curve_point(p, c, c.points[*seg].internal))),
        );
        rows.extend(c.annotated(&singular));
    }

    let mut out = Outputs::new(cfg, "fold-curve");
    out.csv(
        "foldcurve.csv",
        &FOLDCURVE_HEADER,
        rows.iter().map(|p| {
            vec![
                Field::S(p1.name()),
                Field::F(p.p1),
                Field::S(p2.name()),
                Field::F(p.p2),
                Field::F(p.z1),
                Field::F(p.test_cusp),
                Field::F(p.test_bt),
                Field::S(p.kind.name()),
            ]
        }),
    )?;
    let report = render_report(cfg, &a);
    out.text("fold_report.txt", &report)?;
    out.note("curves", a.curves.len());
    out.note("cusps", a.cusps.iter().map(Vec::len).sum::<usize>());
    out.finish(cfg)?;

    Ok(format!(
        "fold-curve: {} curves, {} rows, {} cusps -> {}\n{}",
        a.curves.len(),
        rows.len(),
        a.cusps.iter().map(Vec::len).sum::<usize>(),
        cfg.out_dir.display(),
        report.trim_end()
    ))
}

pub fn cusp_scan(cfg: &RunConfig) -> CliResult<String> {
    let a = fold_analysis(cfg)?;
    let (p1, p2) = cfg.pair();
    let cusps: Vec<&Cusp> = a.cusps.iter().flatten().collect();
    if cusps.is_empty() {
        return Err(CliError::Empty(format!(
            "{} fold curves in ({p1}, {p2}) and none has a cusp",
            a.curves.len()
        )));
    }
    let mut out = Outputs::new(cfg, "cusp-scan");
    out.csv(
        "cusps.csv",
        &CUSPS_HEADER,
        cusps.iter().map(|c| {
            vec![
                Field::S(p1.name()),
                Field::F(c.point.param(p1).unwrap_or(f64::NAN)),
                Field::S(p2.name()),
                Field::F(c.point.param(p2).unwrap_or(f64::NAN)),
                Field::F(c.point.z1),
                Field::F(c.point.tests.sigma_pp),
                Field::F(c.sigma_ppp),
                Field::F(c.point.residual),
                Field::S(if c.nondegenerate { "true" } else { "false" }),
                Field::S(if c.normal_form_decreasing { "true" } else { "false" }),
            ]
        }),
    )?;
    let report = render_report(cfg, &a);
    out.text("cusp_report.txt", &report)?;
    out.note("cusps", cusps.len());
    out.finish(cfg)?;
    Ok(format!("cusp-scan: {} cusps -> {}\n{}", cusps.len(), cfg.out_dir.display(), report.trim_end()))
}

pub fn coeffs(cfg: &RunConfig) -> CliResult<String> {
    cfg.validate()?;
    let r = compatibility_report(&cfg.params, cfg.nodes, cfg.coeff_samples)?;
    let mut out = Outputs::new(cfg, "coeffs");
    out.csv(
        "compat.csv",
        &COMPAT_HEADER,
        r.rows.iter().map(|row| {
            vec![
                Field::F(row.t),
                Field::S(row.coef),
                Field::F(row.closed_form),
                Field::F(row.quadrature),
                Field::F(row.abs_diff),
                Field::F(row.rel_diff),
            ]
        }),
    )?;
    let report = r.render();
    out.text("compat_report.txt", &report)?;
    out.note("passed", r.passed());
    out.finish(cfg)?;
    let mismatches: Vec<&str> = r.sign_mismatches().iter().map(|t| t.name()).collect();
    Ok(format!(
        "coeffs: {} ({} nodes, {} samples), sign mismatches: [{}] -> {}",
        if r.passed() { "compatible" } else { "INCOMPATIBLE" },
        r.nodes,
        r.samples,
        mismatches.join(", "),
        cfg.out_dir.display()
    ))
}
