//! The one-shot verification suite.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use foldwave_core::continuation::family::eval_cubic;
use foldwave_core::continuation::{
    check_containment, detect_cusp, grid_scan_oracle, trace_fold_curves, Axis, BeamFamily,
    BifurcationCurve, ContinuationSettings, CubicFamily, ParamId, SurrogateCubic,
};
use foldwave_core::cubic::Cubic;
use foldwave_core::equilibria::eigenvalues;
use foldwave_core::galerkin::compatibility_report;
use foldwave_core::model::{reduce_cos_multiple, reduce_cos_shifted};
use foldwave_core::ode::DormandPrince;
use foldwave_core::simulation::{
    integrate, rhs_equivalence_check, rhs_equivalence_check_with, FastState, SimulationSettings,
};
use foldwave_core::{BeamFoundationParams, SlowFastCoefficients, SlowPhase};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;

/// Replacement for the slow-phase coefficients, used to inject faults.
pub type CoefficientOverride<'a> = &'a (dyn Fn(SlowPhase) -> SlowFastCoefficients + Sync);

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Check {
    pub fn line(&self) -> String {
        format!(
            "{} {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn timed(name: &'static str, f: impl FnOnce() -> Result<(bool, String), String>) -> Check {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    Check {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub const TRIG_TOL: f64 = 1e-12;
pub const RHS_TOL: f64 = 1e-9;
pub const CUBIC_TOL: f64 = 1e-9;
pub const CUSP_LAW_TOL: f64 = 1e-6;
pub const RETURN_TOL: f64 = 1e-7;
pub const ENERGY_TOL: f64 = 1e-6;
pub const FOLD_RESIDUAL_TOL: f64 = 1e-10;
pub const FOLD_EIGEN_TOL: f64 = 1e-8;

/// De Moivre reductions against direct evaluation at random phases.
pub fn trig_reductions(samples: usize, seed: u64) -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = rng.random_range(0.0..2.0 * PI);
        let theta = rng.random_range(-2.0 * PI..2.0 * PI);
        let p = SlowPhase::from_angle(a);
        // Compare at the angle the phase represents: rounding in cos(a) is
        // amplified by sqrt(1 - d^2) near d = +-1 and is not a reduction error.
        let a = p.branch().sign() * p.d().acos();
        for n in 1..=3u32 {
            let nf = n as f64;
            let direct = reduce_cos_multiple(p, n).map_err(|e| e.to_string())?;
            worst = worst.max((direct - (nf * a).cos()).abs());
            let shifted = reduce_cos_shifted(p, theta, n).map_err(|e| e.to_string())?;
            worst = worst.max((shifted - (nf * (theta - a)).cos()).abs());
        }
    }
    Ok((worst <= TRIG_TOL, format!("{samples} phases, max deviation {worst:.3e}")))
}

/// Time-form and slow-form right-hand sides at random states.
pub fn rhs_equivalence(
    params: &BeamFoundationParams,
    samples: usize,
    seed: u64,
    slow: Option<CoefficientOverride<'_>>,
) -> Result<(bool, String), String> {
    let dev = match slow {
        Some(f) => rhs_equivalence_check_with(params, samples, seed, f),
        None => rhs_equivalence_check(params, samples, seed),
    }
    .map_err(|e| e.to_string())?;
    Ok((
        dev.max() <= RHS_TOL,
        format!(
            "{samples} samples, max deviation {:.3e} (rhs {:.3e}, F {:.3e}, J {:.3e}, G {:.3e})",
            dev.max(),
            dev.rhs,
            dev.forcing,
            dev.stiffness,
            dev.quadratic
        ),
    ))
}

/// Real roots of a cubic by bisection on its monotone pieces. The pieces
/// are delimited by the Cauchy bound and the critical points.
pub fn bisection_roots(c: &[f64; 4]) -> Vec<f64> {
    let f = |x: f64| c[0] + x * (c[1] + x * (c[2] + x * c[3]));
    let bound = 1.0 + c[..3].iter().map(|v| (v / c[3]).abs()).fold(0.0, f64::max);
    let mut breaks = vec![-bound];
    // f' = c1 + 2 c2 x + 3 c3 x^2.
    let (qa, qb, qc) = (3.0 * c[3], 2.0 * c[2], c[1]);
    let disc = qb * qb - 4.0 * qa * qc;
    if disc > 0.0 {
        let s = disc.sqrt();
        let mut crit = [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)];
        crit.sort_by(f64::total_cmp);
        breaks.extend(crit.iter().filter(|x| x.abs() < bound));
    }
    breaks.push(bound);
    let mut roots = Vec::new();
    for w in breaks.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    roots
}

/// Analytic roots against [`bisection_roots`] on random cubics.
pub fn cubic_oracle(samples: usize, seed: u64) -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut count_mismatch, mut worst) = (0usize, 0.0f64);
    for _ in 0..samples {
        let lead = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let c = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            lead,
        ];
        let analytic: Vec<f64> = Cubic(c).roots().iter().map(|r| r.value).collect();
        let oracle = bisection_roots(&c);
        if analytic.len() != oracle.len() {
            count_mismatch += 1;
            continue;
        }
        for (a, b) in analytic.iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok((
        count_mismatch == 0 && worst <= CUBIC_TOL,
        format!("{samples} cubics, {count_mismatch} root-count mismatches, max |dz| {worst:.3e}"),
    ))
}

/// Fold curves of the symmetric surrogate in `(J, F)`.
pub fn symmetric_fold_curves(gamma: f64) -> foldwave_core::Result<(SurrogateCubic, Vec<BifurcationCurve>)> {
    let fam = SurrogateCubic::symmetric(-3.0, 0.0, gamma);
    let x = Axis::new(ParamId::Linear, -4.0, 1.0, 200)?;
    let y = Axis::new(ParamId::Forcing, -3.0, 3.0, 200)?;
    let field = grid_scan_oracle(&fam, x, y)?;
    let curves = trace_fold_curves(&fam, &field, &ContinuationSettings::default(), 4)?;
    Ok((fam, curves))
}

/// `81 gamma F^2 + 16 J^3 = 0` along the traced curve and a cusp at the
/// origin.
pub fn cusp_law() -> Result<(bool, String), String> {
    let gamma = 4.0;
    let (fam, curves) = symmetric_fold_curves(gamma).map_err(|e| e.to_string())?;
    if curves.is_empty() {
        return Ok((false, "no fold curve traced".into()));
    }
    let mut worst = 0.0f64;
    let mut points = 0usize;
    let mut cusp_distance = f64::INFINITY;
    for c in &curves {
        for p in &c.points {
            let (j, f) = (p.p1, p.p2);
            let a = 81.0 * gamma * f * f;
            let b = 16.0 * j * j * j;
            let scale = a.abs() + b.abs();
            if scale > 0.0 {
                worst = worst.max((a + b).abs() / scale);
            }
            points += 1;
        }
        for k in detect_cusp(&fam, c, &ContinuationSettings::default()).map_err(|e| e.to_string())? {
            let j = k.point.param(ParamId::Linear).unwrap_or(f64::NAN);
            let f = k.point.param(ParamId::Forcing).unwrap_or(f64::NAN);
            cusp_distance = cusp_distance.min(j.hypot(f));
        }
    }
    Ok((
        worst <= CUSP_LAW_TOL && cusp_distance <= CUSP_LAW_TOL,
        format!(
            "{} curves, {points} points, max relative law residual {worst:.3e}, cusp at distance {cusp_distance:.3e} from (0, 0)",
            curves.len()
        ),
    ))
}

fn harmonic(_t: f64, y: &[f64; 2]) -> [f64; 2] {
    [y[1], -y[0]]
}

fn period_error(solver: &DormandPrince) -> Result<f64, String> {
    let sol = solver
        .integrate(&harmonic, 0.0, [1.0, 0.0], 2.0 * PI, None)
        .map_err(|e| e.to_string())?;
    let y = sol.y.last().ok_or("empty solution")?;
    Ok((y[0] - 1.0).hypot(y[1]))
}

/// Return error, observed order and energy drift of the integrator.
pub fn integrator_quality() -> Result<(bool, String), String> {
    let adaptive = DormandPrince {
        abs_tol: 1e-9,
        rel_tol: 1e-9,
        ..Default::default()
    };
    let ret = period_error(&adaptive)?;

    let errors: Vec<f64> = [32.0, 64.0, 128.0]
        .iter()
        .map(|n| period_error(&DormandPrince::fixed(2.0 * PI / n)))
        .collect::<Result<_, _>>()?;
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order_ok = orders.iter().all(|o| (4.5..=5.5).contains(o));

    // Undamped, unforced oscillator: h0 = 0 removes every time dependence.
    let params = BeamFoundationParams {
        xi: 0.0,
        h0: 0.0,
        ..Default::default()
    };
    let settings = SimulationSettings {
        abs_tol: 1e-10,
        rel_tol: 1e-10,
        sample_dt: 0.1,
        ..Default::default()
    };
    let traj = integrate(&params, FastState::new(0.1, 0.0), (0.0, 100.0), &settings).map_err(|e| e.to_string())?;
    let stiffness = std::f64::consts::PI.powi(4) + params.sigma;
    let energy = |z: f64, v: f64| 0.5 * v * v + 0.5 * stiffness * z * z + 0.1875 * params.gamma * z.powi(4);
    let e0 = energy(0.1, 0.0);
    let drift = traj
        .samples
        .iter()
        .map(|s| (energy(s.state.z1, s.state.z2) - e0).abs())
        .fold(0.0, f64::max);

    Ok((
        ret <= RETURN_TOL && order_ok && drift <= ENERGY_TOL,
        format!(
            "return error {ret:.3e} per period, observed orders [{}], energy drift {drift:.3e} over [0, 100]",
            orders.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

pub fn galerkin(params: &BeamFoundationParams, nodes: usize, samples: usize) -> Result<(bool, String), String> {
    let r = compatibility_report(params, nodes, samples).map_err(|e| e.to_string())?;
    let worst = r.terms.iter().map(|t| t.max_rel_diff()).fold(0.0, f64::max);
    let mismatches: Vec<&str> = r.sign_mismatches().iter().map(|t| t.name()).collect();
    Ok((
        r.passed(),
        format!(
            "{nodes} nodes, max harmonic rel diff {worst:.3e}, cubic {} vs {}, sign mismatches [{}]",
            r.cubic,
            r.cubic_expected,
            mismatches.join(", ")
        ),
    ))
}

/// Settings fine enough for continued points to stay inside 500x500
/// bracket cells.
pub fn fine_settings() -> ContinuationSettings {
    ContinuationSettings {
        initial_step: 1e-3,
        max_step: 2e-3,
        ..Default::default()
    }
}

/// A fold-bearing beam family and plane.
#[derive(Debug, Clone, Copy)]
pub struct Plane {
    pub label: &'static str,
    pub params: BeamFoundationParams,
    pub d: f64,
    pub x: (ParamId, f64, f64),
    pub y: (ParamId, f64, f64),
}

/// Softened families whose frozen fast subsystem has folds in each plane.
pub fn softened_planes() -> Vec<Plane> {
    let soft = BeamFoundationParams {
        sigma: -120.0,
        gamma: 150.0,
        ..Default::default()
    };
    vec![
        Plane {
            label: "(sigma, gamma) at d = 1",
            params: BeamFoundationParams::default(),
            d: 1.0,
            x: (ParamId::Sigma, -200.0, 200.0),
            y: (ParamId::Gamma, 1.0, 300.0),
        },
        Plane {
            label: "(d, h0) at sigma = -120, gamma = 150",
            params: soft,
            d: 1.0,
            x: (ParamId::D, -1.0, 1.0),
            y: (ParamId::H0, 1e-3, 0.5),
        },
        Plane {
            label: "(d, kappa) at sigma = -120, gamma = 150",
            params: soft,
            d: 1.0,
            x: (ParamId::D, -1.0, 1.0),
            y: (ParamId::Kappa, 0.05, 3.0),
        },
    ]
}

/// Oracle field and traced curves of one plane.
pub fn trace_plane(
    plane: &Plane,
    n: usize,
    settings: &ContinuationSettings,
) -> foldwave_core::Result<(BeamFamily, foldwave_core::continuation::OracleField, Vec<BifurcationCurve>)> {
    let fam = BeamFamily::new(plane.params, plane.d)?;
    let x = Axis::new(plane.x.0, plane.x.1, plane.x.2, n)?;
    let y = Axis::new(plane.y.0, plane.y.1, plane.y.2, n)?;
    let field = grid_scan_oracle(&fam, x, y)?;
    let curves = trace_fold_curves(&fam, &field, settings, 16)?;
    Ok((fam, field, curves))
}

/// Largest scaled fold residuals and eigenvalue deviations along curves.
pub fn fold_defects<F: CubicFamily>(family: &F, curves: &[BifurcationCurve]) -> (usize, f64, f64) {
    let (mut n, mut res, mut eig) = (0usize, 0.0f64, 0.0f64);
    for c in curves {
        for p in &c.points {
            let mut f = family.clone();
            f.set_external(c.p1, p.p1);
            f.set_external(c.p2, p.p2);
            let r = eval_cubic(&f.coefficients(), p.z1);
            let s = f.residual_scales(p.z1);
            res = res.max(r[0].abs() / s[0]).max(r[1].abs() / s[1]);
            let xi = f.xi();
            let mut l = eigenvalues(-r[1], xi);
            l.sort_by(|a, b| b.re.total_cmp(&a.re));
            eig = eig.max(l[0].norm()).max((l[1] + xi).norm());
            n += 1;
        }
    }
    (n, res, eig)
}

/// Fold residuals, fold eigenvalues and oracle containment on the softened
/// planes.
pub fn fold_planes() -> Vec<Check> {
    let mut checks = Vec::new();
    let mut traced = Vec::new();
    checks.push(timed("oracle containment", || {
        let mut ok = true;
        let mut detail = Vec::new();
        for plane in softened_planes() {
            let (fam, field, curves) = trace_plane(&plane, 500, &fine_settings()).map_err(|e| e.to_string())?;
            let c = check_containment(&field, &curves);
            let pass = !curves.is_empty() && c.points_contained() && c.cells_covered();
            ok &= pass;
            detail.push(format!(
                "{}: {} curves, {}/{} points inside, {} uncovered cells",
                plane.label,
                curves.len(),
                c.points_checked - c.outside.len(),
                c.points_checked,
                c.uncovered.len()
            ));
            traced.push((fam, curves));
        }
        Ok((ok, detail.join("; ")))
    }));
    checks.push(timed("fold residuals", || {
        if traced.is_empty() {
            return Err("no traced curves".into());
        }
        let (mut n, mut res, mut eig) = (0, 0.0f64, 0.0f64);
        for (fam, curves) in &traced {
            let (k, r, e) = fold_defects(fam, curves);
            n += k;
            res = res.max(r);
            eig = eig.max(e);
        }
        Ok((
            n > 0 && res <= FOLD_RESIDUAL_TOL && eig <= FOLD_EIGEN_TOL,
            format!("{n} fold points, max scaled residual {res:.3e}, max eigenvalue deviation from {{0, -xi}} {eig:.3e}"),
        ))
    }));
    checks
}

/// Runs every check. `slow` replaces the slow-phase coefficients in the RHS
/// equivalence check.
pub fn run_suite(cfg: &RunConfig, slow: Option<CoefficientOverride<'_>>) -> Vec<Check> {
    let mut checks = vec![
        timed("trig reductions", || trig_reductions(10_000, cfg.seed)),
        timed("rhs equivalence", || rhs_equivalence(&cfg.params, 1_000, cfg.seed, slow)),
        timed("cubic oracle", || cubic_oracle(10_000, cfg.seed)),
        timed("analytic cusp law", cusp_law),
        timed("integrator quality", integrator_quality),
        timed("galerkin compatibility", || galerkin(&cfg.params, cfg.nodes, cfg.coeff_samples)),
    ];
    checks.extend(fold_planes());
    checks
}

pub fn render(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let _ = writeln!(s, "{}", c.line());
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let _ = writeln!(s, "{} of {} checks passed", checks.len() - failed, checks.len());
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_known_roots() {
        // (x - 1)(x + 2)(x - 0.5) = x^3 + 0.5 x^2 - 2.5 x + 1
        let r = bisection_roots(&[1.0, -2.5, 0.5, 1.0]);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-2.0, 0.5, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(bisection_roots(&[1.0, 0.0, 0.0, 1.0]).len(), 1);
    }

    #[test]
    fn sign_flip_is_caught() {
        let p = BeamFoundationParams::default();
        let flipped = move |ph: SlowPhase| {
            let mut c = foldwave_core::model::coeffs_slow(ph, &p).unwrap();
            c.forcing = -c.forcing;
            c
        };
        let (ok, _) = rhs_equivalence(&p, 200, 1, Some(&flipped)).unwrap();
        assert!(!ok);
        let (ok, _) = rhs_equivalence(&p, 200, 1, None).unwrap();
        assert!(ok);
    }
}
