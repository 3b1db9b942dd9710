//! Pseudo-arclength continuation of the zero set of `G: R^n -> R^(n-1)`.
//!
//! Arclength is measured in scaled coordinates `v_i = u_i / s_i` so unknowns
//! of very different magnitude (a displacement and a stiffness, say) move at
//! comparable rates.

use nalgebra::{DMatrix, DVector};

use super::ContinuationSettings;
use crate::error::{Error, Result};

/// Smallest cosine allowed between consecutive tangents before a step is
/// considered a branch jump.
const MIN_TANGENT_COSINE: f64 = 0.8;

pub trait DefiningSystem {
    /// Number of unknowns; there is one equation fewer.
    fn unknowns(&self) -> usize;

    fn residual(&self, u: &DVector<f64>) -> Result<DVector<f64>>;

    /// `(n - 1) x n` Jacobian of [`DefiningSystem::residual`].
    fn jacobian(&self, u: &DVector<f64>) -> Result<DMatrix<f64>>;

    /// Natural magnitude of each equation at `u`; residuals are compared
    /// against `tol * scale`.
    fn residual_scale(&self, u: &DVector<f64>) -> DVector<f64>;

    /// Per-unknown coordinate scales.
    fn scales(&self) -> DVector<f64>;

    /// Per-unknown admissible box.
    fn bounds(&self) -> Vec<(f64, f64)>;

    /// Additional interior barriers crossed on the way from `from` to `to`,
    /// as `(index, value)` of the first one met.
    fn barrier(&self, _from: &DVector<f64>, _to: &DVector<f64>) -> Option<(usize, f64)> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MaxPoints,
    /// Stopped on the box edge or a barrier in the given unknown.
    Boundary(usize),
    /// Returned to the starting point.
    Closed,
    /// The step fell below the minimum without a converged correction.
    StepUnderflow,
}

impl Termination {
    pub fn describe(self) -> &'static str {
        match self {
            Termination::MaxPoints => "point limit reached",
            Termination::Boundary(_) => "left the parameter box",
            Termination::Closed => "closed curve",
            Termination::StepUnderflow => "corrector failed at minimum step",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub points: Vec<DVector<f64>>,
    pub termination: Termination,
}

/// A traced curve, ordered from the end of the backward run to the end of the
/// forward run.
#[derive(Debug, Clone, PartialEq)]
pub struct Traced {
    pub points: Vec<DVector<f64>>,
    pub seed_index: usize,
    pub backward: Termination,
    pub forward: Termination,
}

/// Newton iteration for a square system.
///
/// `eval` returns the residual, its Jacobian and the per-equation scale.
/// Converges when every `|res_i| <= tol * scale_i`; with `polish` one more
/// step is taken and kept if it does not increase the residual.
pub fn newton_square<E>(
    eval: E,
    u0: DVector<f64>,
    tol: f64,
    max_iter: usize,
    polish: bool,
) -> Result<(DVector<f64>, usize)>
where
    E: Fn(&DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>, DVector<f64>)>,
{
    let mut u = u0;
    for iter in 0..=max_iter {
        let (res, jac, scale) = eval(&u)?;
        if res.iter().any(|v| !v.is_finite()) {
            return Err(Error::NoConvergence("non-finite residual".into()));
        }
        let converged = res
            .iter()
            .zip(scale.iter())
            .all(|(r, s)| r.abs() <= tol * s.max(f64::MIN_POSITIVE));
        if converged {
            if polish {
                if let Some(step) = jac.clone().lu().solve(&res) {
                    let candidate = &u - step;
                    if let Ok((r2, _, _)) = eval(&candidate) {
                        if r2.iter().all(|v| v.is_finite()) && r2.amax() <= res.amax() {
                            u = candidate;
                        }
                    }
                }
            }
            return Ok((u, iter));
        }
        if iter == max_iter {
            break;
        }
        let step = jac
            .lu()
            .solve(&res)
            .ok_or_else(|| Error::NoConvergence("singular Newton matrix".into()))?;
        if step.iter().any(|v| !v.is_finite()) {
            return Err(Error::NoConvergence("non-finite Newton step".into()));
        }
        u -= step;
    }
    Err(Error::NoConvergence(format!("Newton did not converge in {max_iter} iterations")))
}

/// Newton on `G(u) = 0` augmented with the linear condition `c . u = b`.
pub fn correct_with_row<S: DefiningSystem + ?Sized>(
    sys: &S,
    u0: DVector<f64>,
    row: &DVector<f64>,
    target: f64,
    settings: &ContinuationSettings,
    polish: bool,
) -> Result<(DVector<f64>, usize)> {
    let n = sys.unknowns();
    let row_scale = row.amax().max(f64::MIN_POSITIVE);
    newton_square(
        |u| {
            let g = sys.residual(u)?;
            let j = sys.jacobian(u)?;
            let s = sys.residual_scale(u);
            let mut res = DVector::zeros(n);
            let mut jac = DMatrix::zeros(n, n);
            let mut scale = DVector::zeros(n);
            res.rows_mut(0, n - 1).copy_from(&g);
            jac.view_mut((0, 0), (n - 1, n)).copy_from(&j);
            scale.rows_mut(0, n - 1).copy_from(&s);
            res[n - 1] = row.dot(u) - target;
            jac.row_mut(n - 1).copy_from(&row.transpose());
            scale[n - 1] = row_scale * u.amax().max(1.0);
            Ok((res, jac, scale))
        },
        u0,
        settings.newton_tol,
        settings.max_newton_iter,
        polish,
    )
}

/// Pulls an approximate point onto the curve by minimum-norm Gauss-Newton
/// steps.
pub fn correct_seed<S: DefiningSystem + ?Sized>(
    sys: &S,
    u0: DVector<f64>,
    settings: &ContinuationSettings,
) -> Result<DVector<f64>> {
    let scales = sys.scales();
    let mut u = u0;
    for _ in 0..=settings.max_newton_iter {
        let g = sys.residual(&u)?;
        let s = sys.residual_scale(&u);
        if g.iter().zip(s.iter()).all(|(r, s)| r.abs() <= settings.newton_tol * s.max(f64::MIN_POSITIVE)) {
            return Ok(u);
        }
        let jv = scaled_jacobian(sys, &u, &scales)?;
        let dv = jv
            .svd(true, true)
            .solve(&g, 1e-14)
            .map_err(|e| Error::NoConvergence(e.to_string()))?;
        u -= dv.component_mul(&scales);
    }
    Err(Error::NoConvergence("seed correction failed".into()))
}

fn scaled_jacobian<S: DefiningSystem + ?Sized>(
    sys: &S,
    u: &DVector<f64>,
    scales: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let mut j = sys.jacobian(u)?;
    for (k, s) in scales.iter().enumerate() {
        j.column_mut(k).scale_mut(*s);
    }
    Ok(j)
}

/// Unit null vector of the scaled Jacobian.
pub fn initial_tangent<S: DefiningSystem + ?Sized>(sys: &S, u: &DVector<f64>) -> Result<DVector<f64>> {
    let n = sys.unknowns();
    let jv = scaled_jacobian(sys, u, &sys.scales())?;
    let mut padded = DMatrix::zeros(n, n);
    padded.view_mut((0, 0), (n - 1, n)).copy_from(&jv);
    let svd = padded.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::NoConvergence("tangent decomposition failed".into()))?;
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let t = v_t.row(k).transpose();
    Ok(&t / t.norm())
}

/// Tangent continuing the orientation of `previous`.
fn next_tangent<S: DefiningSystem + ?Sized>(
    sys: &S,
    u: &DVector<f64>,
    previous: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = sys.unknowns();
    let jv = scaled_jacobian(sys, u, &sys.scales())?;
    let mut m = DMatrix::zeros(n, n);
    m.view_mut((0, 0), (n - 1, n)).copy_from(&jv);
    m.row_mut(n - 1).copy_from(&previous.transpose());
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let t = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NoConvergence("singular tangent system".into()))?;
    let norm = t.norm();
    if !norm.is_finite() || norm == 0.0 {
        return Err(Error::NoConvergence("degenerate tangent".into()));
    }
    Ok(t / norm)
}

fn first_exit<S: DefiningSystem + ?Sized>(
    sys: &S,
    from: &DVector<f64>,
    to: &DVector<f64>,
) -> Option<(usize, f64)> {
    let mut best: Option<(f64, usize, f64)> = None;
    for (i, (lo, hi)) in sys.bounds().into_iter().enumerate() {
        let x = to[i];
        let bound = if x < lo {
            lo
        } else if x > hi {
            hi
        } else {
            continue;
        };
        let denom = to[i] - from[i];
        let frac = if denom != 0.0 { (bound - from[i]) / denom } else { 0.0 };
        if best.is_none_or(|(f, _, _)| frac < f) {
            best = Some((frac, i, bound));
        }
    }
    let barrier = sys.barrier(from, to).map(|(i, v)| {
        let denom = to[i] - from[i];
        let frac = if denom != 0.0 { (v - from[i]) / denom } else { 0.0 };
        (frac, i, v)
    });
    match (best, barrier) {
        (Some(a), Some(b)) => Some(if a.0 <= b.0 { (a.1, a.2) } else { (b.1, b.2) }),
        (Some(a), None) => Some((a.1, a.2)),
        (None, Some(b)) => Some((b.1, b.2)),
        (None, None) => None,
    }
}

/// Traces the curve from `u0` along the scaled unit tangent `t0`.
pub fn trace<S: DefiningSystem + ?Sized>(
    sys: &S,
    u0: &DVector<f64>,
    t0: &DVector<f64>,
    settings: &ContinuationSettings,
) -> Result<Run> {
    settings.validate()?;
    let n = sys.unknowns();
    let scales = sys.scales();
    let v0 = u0.component_div(&scales);
    let mut points = vec![u0.clone()];
    let mut u = u0.clone();
    let mut t = t0.clone();
    let mut h = settings.initial_step;
    let mut travelled = 0.0;

    while points.len() < settings.max_points {
        let v = u.component_div(&scales);
        let vp = &v + &t * h;
        let up = vp.component_mul(&scales);
        let row = t.component_div(&scales);
        let target = t.dot(&vp);

        let attempt = correct_with_row(sys, up.clone(), &row, target, settings, true)
            .and_then(|(un, iters)| {
                let tn = next_tangent(sys, &un, &t)?;
                Ok((un, tn, iters))
            });
        let accepted = match attempt {
            Ok((un, tn, iters)) => {
                let vn = un.component_div(&scales);
                let dist = (&vn - &v).norm();
                if tn.dot(&t) >= MIN_TANGENT_COSINE && dist <= 2.0 * h {
                    Some((un, tn, iters, dist))
                } else {
                    None
                }
            }
            Err(_) => None,
        };

        let Some((un, tn, iters, dist)) = accepted else {
            h *= settings.shrink;
            if h < settings.min_step {
                return Ok(Run {
                    points,
                    termination: Termination::StepUnderflow,
                });
            }
            continue;
        };

        if let Some((index, value)) = first_exit(sys, &u, &un) {
            // Land exactly on the bound by fixing that coordinate.
            let mut row = DVector::zeros(n);
            row[index] = 1.0;
            let frac = if un[index] != u[index] {
                ((value - u[index]) / (un[index] - u[index])).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let guess = &u + (&un - &u) * frac;
            match correct_with_row(sys, guess, &row, value, settings, true) {
                Ok((ub, _)) if first_exit(sys, &u, &ub).is_none_or(|(i, _)| i == index) => {
                    let fresh = (&ub - &u).component_div(&scales).norm() > 1e-14;
                    if fresh {
                        points.push(ub);
                    }
                    return Ok(Run {
                        points,
                        termination: Termination::Boundary(index),
                    });
                }
                _ => {
                    h *= settings.shrink;
                    if h < settings.min_step {
                        return Ok(Run {
                            points,
                            termination: Termination::Boundary(index),
                        });
                    }
                    continue;
                }
            }
        }

        travelled += dist;
        let vn = un.component_div(&scales);
        if points.len() > 4 && travelled > 4.0 * h && (&vn - &v0).norm() < 0.5 * h.max(dist) {
            return Ok(Run {
                points,
                termination: Termination::Closed,
            });
        }

        points.push(un.clone());
        u = un;
        t = tn;
        if iters <= 3 {
            h = (h * settings.grow).min(settings.max_step);
        }
    }
    Ok(Run {
        points,
        termination: Termination::MaxPoints,
    })
}

/// Corrects the seed, then traces both directions and joins the runs.
///
/// `prefer` orients the forward direction (positive dot product with the
/// scaled tangent) when given.
pub fn trace_both_ways<S: DefiningSystem + ?Sized>(
    sys: &S,
    seed: DVector<f64>,
    prefer: Option<&DVector<f64>>,
    settings: &ContinuationSettings,
) -> Result<Traced> {
    let u0 = correct_seed(sys, seed, settings)?;
    let mut t0 = initial_tangent(sys, &u0)?;
    if let Some(p) = prefer {
        if t0.dot(p) < 0.0 {
            t0 = -t0;
        }
    }
    let forward = trace(sys, &u0, &t0, settings)?;
    if forward.termination == Termination::Closed {
        return Ok(Traced {
            seed_index: 0,
            points: forward.points,
            backward: Termination::Closed,
            forward: Termination::Closed,
        });
    }
    let backward = trace(sys, &u0, &(-&t0), settings)?;
    let seed_index = backward.points.len() - 1;
    let mut points: Vec<_> = backward.points.into_iter().rev().collect();
    points.extend(forward.points.into_iter().skip(1));
    Ok(Traced {
        points,
        seed_index,
        backward: backward.termination,
        forward: forward.termination,
    })
}
