//! One-parameter continuation of equilibria and fold refinement.

use nalgebra::{DMatrix, DVector};

use super::engine::{correct_with_row, newton_square, trace_both_ways, DefiningSystem, Termination};
use super::family::{eval_cubic, CubicFamily, ParamId};
use super::{
    check_range, check_supported, internal_bounds, point_info, BifurcationKind, BifurcationPoint,
    ContinuationSettings,
};
use crate::equilibria::ROOT_ACCEPT_TOL;
use crate::error::{Error, Result};

/// `r(z; p) = 0` in unknowns `(z, p)`.
pub(crate) struct EquilibriumSystem<F> {
    pub family: F,
    pub free: ParamId,
    pub z_bound: f64,
    pub p_bounds: (f64, f64),
}

impl<F: CubicFamily> EquilibriumSystem<F> {
    pub fn at(&self, u: &DVector<f64>) -> F {
        let mut f = self.family.clone();
        f.set(self.free, u[1]);
        f
    }

    fn partial_r(f: &F, id: ParamId, z: f64) -> f64 {
        let d = f.partials(id);
        d[0] + z * (d[1] + z * (d[2] + z * d[3]))
    }

    fn partial_k(f: &F, id: ParamId, z: f64) -> f64 {
        let d = f.partials(id);
        d[1] + z * (2.0 * d[2] + 3.0 * d[3] * z)
    }
}

impl<F: CubicFamily> DefiningSystem for EquilibriumSystem<F> {
    fn unknowns(&self) -> usize {
        2
    }

    fn residual(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let f = self.at(u);
        Ok(DVector::from_element(1, eval_cubic(&f.coefficients(), u[0])[0]))
    }

    fn jacobian(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        let f = self.at(u);
        let e = eval_cubic(&f.coefficients(), u[0]);
        Ok(DMatrix::from_row_slice(
            1,
            2,
            &[e[1], Self::partial_r(&f, self.free, u[0])],
        ))
    }

    fn residual_scale(&self, u: &DVector<f64>) -> DVector<f64> {
        let f = self.at(u);
        DVector::from_element(1, f.residual_scales(u[0])[0].max(1e-300))
    }

    fn scales(&self) -> DVector<f64> {
        let (lo, hi) = self.p_bounds;
        DVector::from_vec(vec![1.0, (hi - lo).max(1e-12)])
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(-self.z_bound, self.z_bound), self.p_bounds]
    }

    fn barrier(&self, from: &DVector<f64>, to: &DVector<f64>) -> Option<(usize, f64)> {
        self.family.barrier(self.free, from[1], to[1]).map(|v| (1, v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPoint {
    /// Free parameter in external coordinates.
    pub p: f64,
    pub z1: f64,
    pub k_eff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumBranch {
    pub free: ParamId,
    pub points: Vec<EquilibriumPoint>,
    pub folds: Vec<BifurcationPoint>,
    pub backward: Termination,
    pub forward: Termination,
}

/// Continues the equilibrium through `(start_z1, family[free])` while the
/// free parameter stays in `range` (external coordinates).
pub fn continue_equilibrium<F: CubicFamily>(
    family: &F,
    free: ParamId,
    range: (f64, f64),
    start_z1: f64,
    settings: &ContinuationSettings,
) -> Result<EquilibriumBranch> {
    settings.validate()?;
    check_supported(family, &[free])?;
    check_range(free, range)?;
    family.admissible()?;
    let a = family.coefficients();
    let r = eval_cubic(&a, start_z1)[0];
    let scale = family.residual_scales(start_z1)[0];
    if !(r.abs() <= ROOT_ACCEPT_TOL * scale.max(1.0)) {
        return Err(Error::NotAnEquilibrium {
            z1: start_z1,
            residual: r,
        });
    }

    let sys = EquilibriumSystem {
        family: family.clone(),
        free,
        z_bound: settings.z_bound,
        p_bounds: internal_bounds(family, free, range),
    };
    let seed = DVector::from_vec(vec![start_z1, family.get(free)]);
    let traced = trace_both_ways(&sys, seed, None, settings)?;

    let k_at = |u: &DVector<f64>| -eval_cubic(&sys.at(u).coefficients(), u[0])[1];
    let mut folds = Vec::new();
    for w in traced.points.windows(2) {
        let (ka, kb) = (k_at(&w[0]), k_at(&w[1]));
        if ka == 0.0 || ka.signum() != kb.signum() {
            if let Ok(fold) = locate_fold_internal(&sys, &w[0], &w[1], settings) {
                let duplicate = folds.iter().any(|f: &BifurcationPoint| {
                    (f.z1 - fold.z1).abs() <= 1e-9 && (f.params[0].1 - fold.params[0].1).abs() <= 1e-9
                });
                if !duplicate {
                    folds.push(fold);
                }
            }
        }
    }

    let points = traced
        .points
        .iter()
        .map(|u| EquilibriumPoint {
            p: family.to_external(free, u[1]),
            z1: u[0],
            k_eff: k_at(u),
        })
        .collect();
    Ok(EquilibriumBranch {
        free,
        points,
        folds,
        backward: traced.backward,
        forward: traced.forward,
    })
}

/// Refines a fold between two equilibria `(z, p)` (external `p`) across which
/// `k_eff` changes sign.
pub fn locate_fold<F: CubicFamily>(
    family: &F,
    free: ParamId,
    a: (f64, f64),
    b: (f64, f64),
    settings: &ContinuationSettings,
) -> Result<BifurcationPoint> {
    settings.validate()?;
    check_supported(family, &[free])?;
    let (pa, pb) = (family.to_internal(free, a.1), family.to_internal(free, b.1));
    let lo = pa.min(pb);
    let hi = pa.max(pb);
    let pad = (hi - lo).max(1e-9);
    let sys = EquilibriumSystem {
        family: family.clone(),
        free,
        z_bound: settings.z_bound,
        p_bounds: (lo - pad, hi + pad),
    };
    locate_fold_internal(
        &sys,
        &DVector::from_vec(vec![a.0, pa]),
        &DVector::from_vec(vec![b.0, pb]),
        settings,
    )
}

pub(crate) fn locate_fold_internal<F: CubicFamily>(
    sys: &EquilibriumSystem<F>,
    a: &DVector<f64>,
    b: &DVector<f64>,
    settings: &ContinuationSettings,
) -> Result<BifurcationPoint> {
    let k_at = |u: &DVector<f64>| eval_cubic(&sys.at(u).coefficients(), u[0])[1];
    let (ka, kb) = (k_at(a), k_at(b));
    let frac = if ka != kb { (ka / (ka - kb)).clamp(0.0, 1.0) } else { 0.5 };
    let guess = a + (b - a) * frac;
    let seg = (b - a).component_div(&sys.scales()).norm();

    let newton = newton_square(
        |u| {
            let f = sys.at(u);
            let z = u[0];
            let c = f.coefficients();
            let e = eval_cubic(&c, z);
            let s = f.residual_scales(z);
            let res = DVector::from_vec(vec![e[0], e[1]]);
            let jac = DMatrix::from_row_slice(
                2,
                2,
                &[
                    e[1],
                    EquilibriumSystem::<F>::partial_r(&f, sys.free, z),
                    e[2],
                    EquilibriumSystem::<F>::partial_k(&f, sys.free, z),
                ],
            );
            Ok((res, jac, DVector::from_vec(vec![s[0].max(1e-300), s[1].max(1e-300)])))
        },
        guess.clone(),
        settings.newton_tol,
        settings.max_newton_iter,
        true,
    );
    let near = |u: &DVector<f64>| {
        let d = (u - &guess).component_div(&sys.scales()).norm();
        d <= 2.0 * seg.max(1e-12)
    };
    match newton {
        Ok((u, _)) if near(&u) && sys.at(&u).admissible().is_ok() => Ok(fold_point(sys, &u, false)),
        _ => bisect_fold(sys, a, b, settings),
    }
}

/// Bisection on `k_eff` along the segment, each probe corrected back onto the
/// branch orthogonally to the segment.
fn bisect_fold<F: CubicFamily>(
    sys: &EquilibriumSystem<F>,
    a: &DVector<f64>,
    b: &DVector<f64>,
    settings: &ContinuationSettings,
) -> Result<BifurcationPoint> {
    let scales = sys.scales();
    let dir = (b - a).component_div(&scales);
    let row = dir.component_div(&scales);
    let k_at = |u: &DVector<f64>| eval_cubic(&sys.at(u).coefficients(), u[0])[1];
    let project = |s: f64| -> Result<DVector<f64>> {
        let guess = a + (b - a) * s;
        let target = row.dot(&guess);
        correct_with_row(sys, guess, &row, target, settings, true).map(|(u, _)| u)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut k_lo = k_at(a);
    let mut best = a.clone();
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let u = project(mid)?;
        let k = k_at(&u);
        best = u;
        if k == 0.0 {
            break;
        }
        if k.signum() == k_lo.signum() {
            lo = mid;
            k_lo = k;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 {
            break;
        }
    }
    Ok(fold_point(sys, &best, true))
}

fn fold_point<F: CubicFamily>(sys: &EquilibriumSystem<F>, u: &DVector<f64>, reduced: bool) -> BifurcationPoint {
    let f = sys.at(u);
    let (tests, residual, scales) = point_info(&f, u[0]);
    BifurcationPoint {
        kind: BifurcationKind::Fold,
        z1: u[0],
        params: vec![(sys.free, f.to_external(sys.free, u[1]))],
        tests,
        residual,
        scales,
        reduced_precision: reduced,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::{BeamFamily, SurrogateCubic};
    use crate::model::BeamFoundationParams;

    #[test]
    fn unforced_branch_is_flat_without_folds() {
        let params = BeamFoundationParams {
            h0: 0.0,
            ..Default::default()
        };
        let fam = BeamFamily::new(params, -1.0).unwrap();
        let branch =
            continue_equilibrium(&fam, ParamId::D, (-1.0, 1.0), 0.0, &ContinuationSettings::default()).unwrap();
        assert!(branch.folds.is_empty());
        assert!(branch.points.iter().all(|p| p.z1 == 0.0));
        let (first, last) = (branch.points.first().unwrap(), branch.points.last().unwrap());
        let ends = [first.p.min(last.p), first.p.max(last.p)];
        assert!((ends[0] + 1.0).abs() < 1e-12 && (ends[1] - 1.0).abs() < 1e-12, "{ends:?}");
    }

    #[test]
    fn symmetric_pitchfork_in_linear_coefficient() {
        let fam = SurrogateCubic::symmetric(2.0, 0.0, 4.0);
        let branch =
            continue_equilibrium(&fam, ParamId::Linear, (-3.0, 3.0), 0.0, &ContinuationSettings::default())
                .unwrap();
        assert!(branch.points.iter().all(|p| p.z1.abs() < 1e-12));
        assert_eq!(branch.folds.len(), 1);
        let fold = &branch.folds[0];
        assert!(fold.param(ParamId::Linear).unwrap().abs() < 1e-10, "{fold:?}");
        assert!(fold.tests.k_eff.abs() < 1e-10);
    }

    #[test]
    fn forced_double_well_folds() {
        // J = -3, gamma = 4: folds at F = +-2/sqrt(3), z = -+1/sqrt(3).
        let fam = SurrogateCubic::symmetric(-3.0, 0.0, 4.0);
        let branch =
            continue_equilibrium(&fam, ParamId::Forcing, (-3.0, 3.0), 1.0, &ContinuationSettings::default())
                .unwrap();
        assert_eq!(branch.folds.len(), 2, "{:?}", branch.folds);
        let want = 2.0 / 3f64.sqrt();
        for fold in &branch.folds {
            let f = fold.param(ParamId::Forcing).unwrap();
            assert!((f.abs() - want).abs() < 1e-10, "{f}");
            assert!((fold.z1 + f.signum() / 3f64.sqrt()).abs() < 1e-9);
            assert!(!fold.reduced_precision);
            assert!(fold.residual <= 1e-10 * fold.scales[0]);
        }
    }

    #[test]
    fn quadratic_normal_form_fold_at_origin() {
        // r = alpha + z^2
        let fam = SurrogateCubic {
            forcing: -1.0,
            linear: 0.0,
            quadratic: 1.0,
            gamma: 0.0,
            xi: 0.1,
        };
        let fold = locate_fold(&fam, ParamId::Forcing, (-1.0, -1.0), (1.0, -1.0), &ContinuationSettings::default())
            .unwrap();
        assert!(fold.z1.abs() < 1e-10 && fold.param(ParamId::Forcing).unwrap().abs() < 1e-10);
    }

    #[test]
    fn non_equilibrium_start_is_rejected() {
        let fam = SurrogateCubic::symmetric(-3.0, 0.0, 4.0);
        let err = continue_equilibrium(&fam, ParamId::Forcing, (-3.0, 3.0), 0.5, &ContinuationSettings::default())
            .unwrap_err();
        assert!(matches!(err, Error::NotAnEquilibrium { .. }));
        assert!(continue_equilibrium(&fam, ParamId::Kappa, (0.0, 1.0), 0.0, &ContinuationSettings::default())
            .is_err());
    }

    #[test]
    fn step_size_does_not_move_folds() {
        let fam = SurrogateCubic {
            forcing: 0.0,
            linear: -2.0,
            quadratic: 0.7,
            gamma: 3.0,
            xi: 0.02,
        };
        let roots = crate::cubic::Cubic(fam.coefficients()).roots();
        let run = |initial_step: f64| {
            let settings = ContinuationSettings {
                initial_step,
                ..Default::default()
            };
            continue_equilibrium(&fam, ParamId::Forcing, (-5.0, 5.0), roots[0].value, &settings).unwrap()
        };
        let (a, b) = (run(1e-2), run(5e-3));
        assert_eq!(a.folds.len(), 2);
        assert_eq!(a.folds.len(), b.folds.len());
        for (x, y) in a.folds.iter().zip(&b.folds) {
            assert!((x.params[0].1 - y.params[0].1).abs() <= 1e-8);
            assert!((x.z1 - y.z1).abs() <= 1e-8);
        }
    }
}
