//! Two-parameter fold curves, cusp and Bogdanov-Takens points.

use nalgebra::{DMatrix, DVector};

use super::engine::{correct_with_row, newton_square, trace_both_ways, DefiningSystem, Termination};
use super::family::{eval_cubic, CubicFamily, ParamId};
use super::{
    check_range, check_supported, internal_bounds, point_info, BifurcationKind, BifurcationPoint,
    ContinuationSettings,
};
use crate::error::{Error, Result};

/// Fold conditions `r = 0, dr/dz = 0` in unknowns `(z, p1, p2)`.
pub(crate) struct FoldSystem<F> {
    pub family: F,
    pub params: [ParamId; 2],
    pub z_bound: f64,
    pub bounds: [(f64, f64); 2],
}

impl<F: CubicFamily> FoldSystem<F> {
    pub fn at(&self, u: &DVector<f64>) -> F {
        let mut f = self.family.clone();
        f.set(self.params[0], u[1]);
        f.set(self.params[1], u[2]);
        f
    }

    /// Derivatives of `(r, r', r'')` in parameter `id` at `z`.
    fn param_derivatives(f: &F, id: ParamId, z: f64) -> [f64; 3] {
        let d = f.partials(id);
        [
            d[0] + z * (d[1] + z * (d[2] + z * d[3])),
            d[1] + z * (2.0 * d[2] + 3.0 * d[3] * z),
            2.0 * d[2] + 6.0 * d[3] * z,
        ]
    }

    /// Residuals and Jacobian of `(r, r', r'')` in `(z, p1, p2)`.
    fn full(&self, u: &DVector<f64>) -> ([f64; 4], [[f64; 3]; 3], [f64; 2]) {
        let f = self.at(u);
        let z = u[0];
        let a = f.coefficients();
        let e = eval_cubic(&a, z);
        let d1 = Self::param_derivatives(&f, self.params[0], z);
        let d2 = Self::param_derivatives(&f, self.params[1], z);
        let jac = [
            [e[1], d1[0], d2[0]],
            [e[2], d1[1], d2[1]],
            [e[3], d1[2], d2[2]],
        ];
        (e, jac, f.residual_scales(z))
    }
}

impl<F: CubicFamily> DefiningSystem for FoldSystem<F> {
    fn unknowns(&self) -> usize {
        3
    }

    fn residual(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let (e, _, _) = self.full(u);
        Ok(DVector::from_vec(vec![e[0], e[1]]))
    }

    fn jacobian(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (_, j, _) = self.full(u);
        Ok(DMatrix::from_row_slice(2, 3, &[j[0][0], j[0][1], j[0][2], j[1][0], j[1][1], j[1][2]]))
    }

    fn residual_scale(&self, u: &DVector<f64>) -> DVector<f64> {
        let (_, _, s) = self.full(u);
        DVector::from_vec(vec![s[0].max(1e-300), s[1].max(1e-300)])
    }

    fn scales(&self) -> DVector<f64> {
        let w = |b: (f64, f64)| (b.1 - b.0).max(1e-12);
        DVector::from_vec(vec![1.0, w(self.bounds[0]), w(self.bounds[1])])
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(-self.z_bound, self.z_bound), self.bounds[0], self.bounds[1]]
    }

    fn barrier(&self, from: &DVector<f64>, to: &DVector<f64>) -> Option<(usize, f64)> {
        for k in 0..2 {
            if let Some(v) = self.family.barrier(self.params[k], from[k + 1], to[k + 1]) {
                return Some((k + 1, v));
            }
        }
        None
    }
}

/// A fold in external coordinates, used to start a fold curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldSeed {
    pub z1: f64,
    pub p1: f64,
    pub p2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Regular,
    FoldSeed,
    Cusp,
    Bt,
}

impl PointKind {
    pub fn name(self) -> &'static str {
        match self {
            PointKind::Regular => "regular",
            PointKind::FoldSeed => "fold_seed",
            PointKind::Cusp => "cusp",
            PointKind::Bt => "bt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub p1: f64,
    pub p2: f64,
    pub z1: f64,
    /// `d^2 r / dz^2`; vanishes at a cusp.
    pub test_cusp: f64,
    /// Trace of the fast Jacobian; vanishes at a Bogdanov-Takens point.
    pub test_bt: f64,
    pub kind: PointKind,
    /// `(z, p1, p2)` in internal coordinates.
    pub internal: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationCurve {
    pub p1: ParamId,
    pub p2: ParamId,
    pub points: Vec<CurvePoint>,
    pub seed_index: usize,
    pub backward: Termination,
    pub forward: Termination,
    /// Parameter box in external coordinates.
    pub ranges: [(f64, f64); 2],
}

impl BifurcationCurve {
    /// Curve points with singular points spliced in after the curve point
    /// that precedes them.
    pub fn annotated(&self, singular: &[(usize, CurvePoint)]) -> Vec<CurvePoint> {
        let mut sorted: Vec<_> = singular.to_vec();
        sorted.sort_by_key(|(i, _)| *i);
        let mut out = Vec::with_capacity(self.points.len() + sorted.len());
        let mut next = sorted.into_iter().peekable();
        for (i, p) in self.points.iter().enumerate() {
            out.push(*p);
            while let Some((_, s)) = next.next_if(|(k, _)| *k == i) {
                out.push(s);
            }
        }
        out.extend(next.map(|(_, s)| s));
        out
    }
}

fn curve_point<F: CubicFamily>(sys: &FoldSystem<F>, u: &DVector<f64>, kind: PointKind) -> CurvePoint {
    let f = sys.at(u);
    let (tests, _, _) = point_info(&f, u[0]);
    CurvePoint {
        p1: f.to_external(sys.params[0], u[1]),
        p2: f.to_external(sys.params[1], u[2]),
        z1: u[0],
        test_cusp: tests.sigma_pp,
        test_bt: tests.trace,
        kind,
        internal: [u[0], u[1], u[2]],
    }
}

fn bifurcation_point<F: CubicFamily>(
    sys: &FoldSystem<F>,
    u: &DVector<f64>,
    kind: BifurcationKind,
    reduced: bool,
) -> BifurcationPoint {
    let f = sys.at(u);
    let (tests, residual, scales) = point_info(&f, u[0]);
    BifurcationPoint {
        kind,
        z1: u[0],
        params: vec![
            (sys.params[0], f.to_external(sys.params[0], u[1])),
            (sys.params[1], f.to_external(sys.params[1], u[2])),
        ],
        tests,
        residual,
        scales,
        reduced_precision: reduced,
    }
}

fn system_for<F: CubicFamily>(
    family: &F,
    pair: (ParamId, ParamId),
    ranges: [(f64, f64); 2],
    settings: &ContinuationSettings,
) -> FoldSystem<F> {
    FoldSystem {
        family: family.clone(),
        params: [pair.0, pair.1],
        z_bound: settings.z_bound,
        bounds: [
            internal_bounds(family, pair.0, ranges[0]),
            internal_bounds(family, pair.1, ranges[1]),
        ],
    }
}

/// Continues the fold through `seed` in the `pair` plane, inside `ranges`
/// (external coordinates).
pub fn continue_fold_curve<F: CubicFamily>(
    family: &F,
    pair: (ParamId, ParamId),
    ranges: [(f64, f64); 2],
    seed: FoldSeed,
    settings: &ContinuationSettings,
) -> Result<BifurcationCurve> {
    settings.validate()?;
    if pair.0 == pair.1 {
        return Err(Error::InvalidInput("fold curves need two distinct parameters".into()));
    }
    check_supported(family, &[pair.0, pair.1])?;
    check_range(pair.0, ranges[0])?;
    check_range(pair.1, ranges[1])?;

    let mut base = family.clone();
    base.set_external(pair.0, seed.p1);
    base.set_external(pair.1, seed.p2);
    base.admissible()?;
    let a = base.coefficients();
    let e = eval_cubic(&a, seed.z1);
    let s = base.residual_scales(seed.z1);
    if !(e[0].abs() <= 1e-6 * s[0].max(1.0) && e[1].abs() <= 1e-6 * s[1].max(1.0)) {
        return Err(Error::InvalidInput(format!(
            "seed is not a fold: r = {:e}, dr/dz = {:e}",
            e[0], e[1]
        )));
    }

    let sys = system_for(&base, pair, ranges, settings);
    let u0 = DVector::from_vec(vec![seed.z1, base.get(pair.0), base.get(pair.1)]);
    let traced = trace_both_ways(&sys, u0, None, settings)?;
    let points = traced
        .points
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let kind = if i == traced.seed_index {
                PointKind::FoldSeed
            } else {
                PointKind::Regular
            };
            curve_point(&sys, u, kind)
        })
        .collect();
    Ok(BifurcationCurve {
        p1: pair.0,
        p2: pair.1,
        points,
        seed_index: traced.seed_index,
        backward: traced.backward,
        forward: traced.forward,
        ranges,
    })
}

/// Normal-form residual `27 A^2 D + 4 B^3` of `r`, written around its
/// inflection point as `A + B y + D y^3`, together with the magnitude
/// `27 A^2 |D| + 4 |B|^3` of its two terms. Vanishes on the fold set.
pub fn normal_form_residual(a: &[f64; 4]) -> (f64, f64) {
    if a[3] == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let zc = -a[2] / (3.0 * a[3]);
    let e = eval_cubic(a, zc);
    let (aa, b, d) = (e[0], e[1], a[3]);
    (27.0 * aa * aa * d + 4.0 * b * b * b, 27.0 * aa * aa * d.abs() + 4.0 * (b * b * b).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalFormSample {
    /// Index offset from the cusp along the curve; negative before it.
    pub offset: isize,
    /// Scaled distance from the cusp.
    pub distance: f64,
    pub residual: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cusp {
    pub point: BifurcationPoint,
    /// Curve index after which the cusp lies.
    pub segment: usize,
    /// `d^3 r / dz^3 = -(9/2) gamma` for the beam.
    pub sigma_ppp: f64,
    /// `sigma_ppp != 0`; otherwise the point is only a degenerate candidate.
    pub nondegenerate: bool,
    pub normal_form: Vec<NormalFormSample>,
    /// Whether the normal-form magnitude shrinks monotonically toward the
    /// cusp from both sides.
    pub normal_form_decreasing: bool,
}

/// Number of curve points on each side used for the normal-form check.
const NORMAL_FORM_NEIGHBOURS: usize = 6;

/// Cusp points along a fold curve: sign changes of `r''`, refined by Newton
/// on `(r, r', r'') = 0`.
pub fn detect_cusp<F: CubicFamily>(
    family: &F,
    curve: &BifurcationCurve,
    settings: &ContinuationSettings,
) -> Result<Vec<Cusp>> {
    settings.validate()?;
    let sys = system_for(family, (curve.p1, curve.p2), curve.ranges, settings);
    let mut cusps: Vec<Cusp> = Vec::new();
    for (i, w) in curve.points.windows(2).enumerate() {
        let (ta, tb) = (w[0].test_cusp, w[1].test_cusp);
        let crosses = (ta == 0.0 && i == 0) || (tb == 0.0) || ta.signum() != tb.signum() && ta != 0.0;
        if !crosses {
            continue;
        }
        let ua = DVector::from_row_slice(&w[0].internal);
        let ub = DVector::from_row_slice(&w[1].internal);
        let (u, reduced) = refine_cusp(&sys, &ua, &ub, settings)?;
        let point = bifurcation_point(&sys, &u, BifurcationKind::Cusp, reduced);
        if cusps.iter().any(|c| {
            (c.point.z1 - point.z1).abs() <= 1e-9
                && c.point.params.iter().zip(&point.params).all(|(a, b)| (a.1 - b.1).abs() <= 1e-9)
        }) {
            continue;
        }
        let a = sys.at(&u).coefficients();
        let sigma_ppp = 6.0 * a[3];
        let (normal_form, decreasing) = normal_form_samples(&sys, curve, i, &u);
        cusps.push(Cusp {
            point,
            segment: i,
            sigma_ppp,
            nondegenerate: sigma_ppp.abs() > settings.newton_tol,
            normal_form,
            normal_form_decreasing: decreasing,
        });
    }
    Ok(cusps)
}

fn refine_cusp<F: CubicFamily>(
    sys: &FoldSystem<F>,
    ua: &DVector<f64>,
    ub: &DVector<f64>,
    settings: &ContinuationSettings,
) -> Result<(DVector<f64>, bool)> {
    let test = |u: &DVector<f64>| sys.full(u).0[2];
    let (ta, tb) = (test(ua), test(ub));
    let frac = if ta != tb { (ta / (ta - tb)).clamp(0.0, 1.0) } else { 0.5 };
    let guess = ua + (ub - ua) * frac;
    let newton = newton_square(
        |u| {
            let (e, j, s) = sys.full(u);
            let m = sys.at(u).magnitudes();
            let s3 = 2.0 * m[2] + 6.0 * m[3] * u[0].abs();
            Ok((
                DVector::from_vec(vec![e[0], e[1], e[2]]),
                DMatrix::from_fn(3, 3, |r, c| j[r][c]),
                DVector::from_vec(vec![s[0].max(1e-300), s[1].max(1e-300), s3.max(1e-300)]),
            ))
        },
        guess.clone(),
        settings.newton_tol,
        settings.max_newton_iter,
        true,
    );
    let seg = (ub - ua).component_div(&sys.scales()).norm();
    if let Ok((u, _)) = newton {
        let d = (&u - &guess).component_div(&sys.scales()).norm();
        if d <= 2.0 * seg.max(1e-12) && sys.at(&u).admissible().is_ok() {
            return Ok((u, false));
        }
    }

    // Bisection on r'' along the segment, re-corrected onto the fold curve.
    let scales = sys.scales();
    let row = (ub - ua).component_div(&scales).component_div(&scales);
    let (mut lo, mut hi, mut t_lo) = (0.0, 1.0, ta);
    let mut best = ua.clone();
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let g = ua + (ub - ua) * mid;
        let target = row.dot(&g);
        let (u, _) = correct_with_row(sys, g, &row, target, settings, true)?;
        let t = test(&u);
        best = u;
        if t == 0.0 || hi - lo <= 1e-15 {
            break;
        }
        if t.signum() == t_lo.signum() {
            lo = mid;
            t_lo = t;
        } else {
            hi = mid;
        }
    }
    Ok((best, true))
}

fn normal_form_samples<F: CubicFamily>(
    sys: &FoldSystem<F>,
    curve: &BifurcationCurve,
    segment: usize,
    cusp: &DVector<f64>,
) -> (Vec<NormalFormSample>, bool) {
    let scales = sys.scales();
    let n = curve.points.len();
    let mut samples = Vec::new();
    let mut decreasing = true;
    let mut side = |indices: Vec<usize>, sign: isize| {
        // Far to near.
        let mut prev = f64::INFINITY;
        let mut count = 0;
        for (k, &i) in indices.iter().enumerate() {
            let u = DVector::from_row_slice(&curve.points[i].internal);
            let (residual, magnitude) = normal_form_residual(&sys.at(&u).coefficients());
            let distance = (&u - cusp).component_div(&scales).norm();
            let offset = sign * (indices.len() - k) as isize;
            samples.push(NormalFormSample {
                offset,
                distance,
                residual,
                magnitude,
            });
            if !(magnitude < prev) {
                decreasing = false;
            }
            prev = magnitude;
            count += 1;
        }
        if count < 2 {
            decreasing = false;
        }
    };
    let before: Vec<usize> = (segment.saturating_sub(NORMAL_FORM_NEIGHBOURS - 1)..=segment).collect();
    let after: Vec<usize> = (segment + 1..(segment + 1 + NORMAL_FORM_NEIGHBOURS).min(n)).rev().collect();
    side(before, -1);
    side(after, 1);
    samples.sort_by_key(|s| s.offset);
    (samples, decreasing)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtMode {
    /// Damping stays at its configured value.
    Fixed,
    /// Damping is released as an extra unknown.
    Freed,
}

impl BtMode {
    pub fn name(self) -> &'static str {
        match self {
            BtMode::Fixed => "fixed",
            BtMode::Freed => "freed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BtReport {
    pub mode: BtMode,
    /// `(curve index after which the point lies, point)`.
    pub points: Vec<(usize, BifurcationPoint)>,
    pub diagnostic: String,
}

/// Double-zero eigenvalue points associated with a fold curve.
///
/// The fast trace is `-xi` everywhere, so at fixed damping the set is either
/// empty or the whole curve. In freed mode the fold is continued from the
/// curve's seed in `(z, p1, xi)` with `p2` frozen until the trace vanishes.
pub fn detect_bt<F: CubicFamily>(
    family: &F,
    curve: &BifurcationCurve,
    mode: BtMode,
    settings: &ContinuationSettings,
) -> Result<BtReport> {
    settings.validate()?;
    let sys = system_for(family, (curve.p1, curve.p2), curve.ranges, settings);
    match mode {
        BtMode::Fixed => {
            let xi = family.xi();
            if xi.abs() <= settings.newton_tol {
                let points = curve
                    .points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let u = DVector::from_row_slice(&p.internal);
                        (i, bifurcation_point(&sys, &u, BifurcationKind::Bt, false))
                    })
                    .collect();
                Ok(BtReport {
                    mode,
                    points,
                    diagnostic: format!(
                        "damping {xi:e} is zero: every fold point has eigenvalues {{0, 0}}"
                    ),
                })
            } else {
                Ok(BtReport {
                    mode,
                    points: Vec::new(),
                    diagnostic: format!(
                        "trace is identically -xi = {:e} along the fold curve; no double-zero \
                         eigenvalue exists at fixed damping",
                        -xi
                    ),
                })
            }
        }
        BtMode::Freed => freed_bt(family, curve, settings),
    }
}

fn freed_bt<F: CubicFamily>(
    family: &F,
    curve: &BifurcationCurve,
    settings: &ContinuationSettings,
) -> Result<BtReport> {
    if curve.p1 == ParamId::Xi || curve.p2 == ParamId::Xi {
        return Err(Error::InvalidInput("damping is already a curve parameter".into()));
    }
    let seed = curve.points[curve.seed_index];
    let mut base = family.clone();
    base.set(curve.p1, seed.internal[1]);
    base.set(curve.p2, seed.internal[2]);
    let xi0 = base.xi();
    let span = xi0.abs() + 1.0;
    let sys = FoldSystem {
        family: base.clone(),
        params: [curve.p1, ParamId::Xi],
        z_bound: settings.z_bound,
        bounds: [internal_bounds(family, curve.p1, curve.ranges[0]), (-span, span)],
    };
    let u0 = DVector::from_vec(vec![seed.internal[0], seed.internal[1], xi0]);
    let toward_zero = DVector::from_vec(vec![0.0, 0.0, -xi0.signum()]);
    let traced = trace_both_ways(&sys, u0, Some(&toward_zero), settings)?;

    let mut crossing = None;
    for w in traced.points.windows(2) {
        if w[0][2] == 0.0 {
            crossing = Some(w[0].clone());
            break;
        }
        if w[0][2].signum() != w[1][2].signum() {
            crossing = Some(w[0].clone() + (&w[1] - &w[0]) * (w[0][2] / (w[0][2] - w[1][2])));
            break;
        }
    }
    let Some(guess) = crossing else {
        return Ok(BtReport {
            mode: BtMode::Freed,
            points: Vec::new(),
            diagnostic: "freed-damping continuation never reached zero trace".into(),
        });
    };

    let (u, _) = newton_square(
        |u| {
            let (e, j, s) = sys.full(u);
            let jac = DMatrix::from_row_slice(
                3,
                3,
                &[j[0][0], j[0][1], j[0][2], j[1][0], j[1][1], j[1][2], 0.0, 0.0, 1.0],
            );
            Ok((
                DVector::from_vec(vec![e[0], e[1], u[2]]),
                jac,
                DVector::from_vec(vec![s[0].max(1e-300), s[1].max(1e-300), 1.0]),
            ))
        },
        guess,
        settings.newton_tol,
        settings.max_newton_iter,
        true,
    )?;

    let mut at = sys.at(&u);
    at.set(ParamId::Xi, u[2]);
    let (tests, residual, scales) = point_info(&at, u[0]);
    let point = BifurcationPoint {
        kind: BifurcationKind::Bt,
        z1: u[0],
        params: vec![
            (curve.p1, at.to_external(curve.p1, u[1])),
            (curve.p2, seed.p2),
            (ParamId::Xi, u[2]),
        ],
        tests,
        residual,
        scales,
        reduced_precision: false,
    };
    Ok(BtReport {
        mode: BtMode::Freed,
        points: vec![(curve.seed_index, point)],
        diagnostic: format!(
            "damping released at the fold seed; trace vanishes at xi = {:e}",
            u[2]
        ),
    })
}

/// Curve point representing a located singular point.
pub fn singular_curve_point(point: &BifurcationPoint, curve: &BifurcationCurve, internal: [f64; 3]) -> CurvePoint {
    CurvePoint {
        p1: point.param(curve.p1).unwrap_or(f64::NAN),
        p2: point.param(curve.p2).unwrap_or(f64::NAN),
        z1: point.z1,
        test_cusp: point.tests.sigma_pp,
        test_bt: point.tests.trace,
        kind: match point.kind {
            BifurcationKind::Cusp => PointKind::Cusp,
            BifurcationKind::Bt => PointKind::Bt,
            BifurcationKind::Fold => PointKind::Regular,
        },
        internal,
    }
}
