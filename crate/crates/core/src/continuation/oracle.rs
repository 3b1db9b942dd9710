//! Brute-force equilibrium counts over a parameter grid.
//!
//! The count is taken from the closed-form cubic solver at every node using
//! [`CubicFamily::oracle_coefficients`]; cells whose corners disagree bracket
//! a fold. The field is independent of the continuation code and is used to
//! seed and to cross-check it.

use nalgebra::DVector;
use rayon::prelude::*;

use super::engine::newton_square;
use super::family::{eval_cubic, CubicFamily, ParamId};
use super::fold::{continue_fold_curve, BifurcationCurve, CurvePoint, FoldSeed};
use super::{check_range, check_supported, ContinuationSettings};
use crate::cubic::Cubic;
use crate::error::{Error, Result};

/// Marker for nodes where the family is not admissible.
pub const INVALID: u8 = u8::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub id: ParamId,
    pub lo: f64,
    pub hi: f64,
    /// Number of nodes.
    pub n: usize,
}

impl Axis {
    pub fn new(id: ParamId, lo: f64, hi: f64, n: usize) -> Result<Self> {
        check_range(id, (lo, hi))?;
        if n < 2 {
            return Err(Error::InvalidInput(format!("axis {id} needs at least two nodes")));
        }
        Ok(Self { id, lo, hi, n })
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    /// Fractional node coordinate of `v`.
    pub fn position(&self, v: f64) -> f64 {
        (v - self.lo) / self.step()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// Distinct real equilibria of the family at its current parameters.
pub fn root_count<F: CubicFamily>(family: &F) -> u8 {
    match family.oracle_coefficients() {
        Ok(a) if a.iter().all(|v| v.is_finite()) => Cubic(a).roots().len() as u8,
        _ => INVALID,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleField {
    pub x: Axis,
    pub y: Axis,
    /// Row-major counts, `counts[j * x.n + i]`.
    pub counts: Vec<u8>,
}

impl OracleField {
    pub fn count(&self, i: usize, j: usize) -> u8 {
        self.counts[j * self.x.n + i]
    }

    /// A cell is a bracket when its valid corners do not all agree.
    pub fn is_bracket(&self, i: usize, j: usize) -> bool {
        let corners = [
            self.count(i, j),
            self.count(i + 1, j),
            self.count(i, j + 1),
            self.count(i + 1, j + 1),
        ];
        if corners.contains(&INVALID) {
            return false;
        }
        corners.iter().any(|&c| c != corners[0])
    }

    pub fn bracket_cells(&self) -> Vec<(usize, usize)> {
        (0..self.y.n - 1)
            .flat_map(|j| (0..self.x.n - 1).map(move |i| (i, j)))
            .filter(|&(i, j)| self.is_bracket(i, j))
            .collect()
    }

    /// Cell containing the external point `(p1, p2)`.
    pub fn cell_of(&self, p1: f64, p2: f64) -> Option<(usize, usize)> {
        let (fx, fy) = (self.x.position(p1), self.y.position(p2));
        let eps = 1e-9;
        if fx < -eps || fy < -eps || fx > (self.x.n - 1) as f64 + eps || fy > (self.y.n - 1) as f64 + eps {
            return None;
        }
        let i = (fx.floor().max(0.0) as usize).min(self.x.n - 2);
        let j = (fy.floor().max(0.0) as usize).min(self.y.n - 2);
        Some((i, j))
    }

    /// Whether the point lies in a bracket cell. A point on a cell edge
    /// belongs to every cell sharing that edge.
    pub fn in_bracket(&self, p1: f64, p2: f64) -> bool {
        let (fx, fy) = (self.x.position(p1), self.y.position(p2));
        let eps = 1e-9;
        let xs = candidate_cells(fx, self.x.n - 1, eps);
        let ys = candidate_cells(fy, self.y.n - 1, eps);
        xs.iter().any(|&i| ys.iter().any(|&j| self.is_bracket(i, j)))
    }

    pub fn is_uniform(&self) -> bool {
        self.counts.iter().all(|&c| c == self.counts[0])
    }
}

fn candidate_cells(f: f64, cells: usize, eps: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let base = f.floor();
    for c in [base - 1.0, base, base + 1.0] {
        if c >= 0.0 && (c as usize) < cells && f >= c - eps && f <= c + 1.0 + eps {
            out.push(c as usize);
        }
    }
    out
}

/// Root-count field of `family` over the `x` by `y` grid.
pub fn grid_scan_oracle<F: CubicFamily>(family: &F, x: Axis, y: Axis) -> Result<OracleField> {
    check_supported(family, &[x.id, y.id])?;
    if x.id == y.id {
        return Err(Error::InvalidInput("oracle axes must differ".into()));
    }
    let counts: Vec<u8> = (0..y.n)
        .into_par_iter()
        .flat_map_iter(|j| {
            let mut f = family.clone();
            f.set_external(y.id, y.value(j));
            (0..x.n)
                .map(|i| {
                    f.set_external(x.id, x.value(i));
                    root_count(&f)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(OracleField { x, y, counts })
}

/// Locates a fold on one edge of a bracket cell and returns it as a seed.
pub fn seed_from_cell<F: CubicFamily>(
    family: &F,
    field: &OracleField,
    cell: (usize, usize),
    settings: &ContinuationSettings,
) -> Result<FoldSeed> {
    let (i, j) = cell;
    let edges = [
        ((i, j), (i + 1, j), true),
        ((i, j + 1), (i + 1, j + 1), true),
        ((i, j), (i, j + 1), false),
        ((i + 1, j), (i + 1, j + 1), false),
    ];
    let mut last_err = Error::NoConvergence("cell has no count change on its edges".into());
    for (a, b, along_x) in edges {
        let (ca, cb) = (field.count(a.0, a.1), field.count(b.0, b.1));
        if ca == cb || ca == INVALID || cb == INVALID {
            continue;
        }
        match seed_on_edge(family, field, a, b, along_x, settings) {
            Ok(seed) => return Ok(seed),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

fn seed_on_edge<F: CubicFamily>(
    family: &F,
    field: &OracleField,
    a: (usize, usize),
    b: (usize, usize),
    along_x: bool,
    settings: &ContinuationSettings,
) -> Result<FoldSeed> {
    let (moving, fixed_axis, fixed_value, lo, hi) = if along_x {
        (field.x, field.y, field.y.value(a.1), field.x.value(a.0), field.x.value(b.0))
    } else {
        (field.y, field.x, field.x.value(a.0), field.y.value(a.1), field.y.value(b.1))
    };
    let mut f = family.clone();
    f.set_external(fixed_axis.id, fixed_value);
    let count_at = |v: f64| {
        let mut g = f.clone();
        g.set_external(moving.id, v);
        root_count(&g)
    };

    // Shrink the edge onto the count change.
    let (mut lo, mut hi) = (lo, hi);
    let c_lo = count_at(lo);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if count_at(mid) == c_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (multi, other) = if count_at(lo) > count_at(hi) { (lo, hi) } else { (hi, lo) };
    let mut g = f.clone();
    g.set_external(moving.id, multi);
    let roots = Cubic(g.oracle_coefficients()?).roots();
    let double = roots.iter().find(|r| r.multiplicity >= 2).map(|r| r.value);
    let z_guess = double
        .or_else(|| {
            roots
                .windows(2)
        .min_by(|p, q| (p[1].value - p[0].value).total_cmp(&(q[1].value - q[0].value)))
                .map(|w| 0.5 * (w[0].value + w[1].value))
        })
        .or_else(|| roots.first().map(|r| r.value))
        .ok_or_else(|| Error::NoConvergence("no roots near the bracket".into()))?;
    let p_guess = f.to_internal(moving.id, 0.5 * (multi + other));

    let (u, _) = newton_square(
        |u| {
            let mut h = f.clone();
            h.set(moving.id, u[1]);
            let c = h.coefficients();
            let e = eval_cubic(&c, u[0]);
            let s = h.residual_scales(u[0]);
            let d = h.partials(moving.id);
            let z = u[0];
            let jac = nalgebra::DMatrix::from_row_slice(
                2,
                2,
                &[
                    e[1],
                    d[0] + z * (d[1] + z * (d[2] + z * d[3])),
                    e[2],
                    d[1] + z * (2.0 * d[2] + 3.0 * d[3] * z),
                ],
            );
            Ok((
                DVector::from_vec(vec![e[0], e[1]]),
                jac,
                DVector::from_vec(vec![s[0].max(1e-300), s[1].max(1e-300)]),
            ))
        },
        DVector::from_vec(vec![z_guess, p_guess]),
        settings.newton_tol,
        settings.max_newton_iter,
        true,
    )?;
    let p = f.to_external(moving.id, u[1]);
    let width = (hi - lo).abs().max(moving.step());
    if (p - 0.5 * (multi + other)).abs() > 2.0 * width {
        return Err(Error::NoConvergence("fold seed left its bracket".into()));
    }
    Ok(if along_x {
        FoldSeed {
            z1: u[0],
            p1: p,
            p2: fixed_value,
        }
    } else {
        FoldSeed {
            z1: u[0],
            p1: fixed_value,
            p2: p,
        }
    })
}

/// Seeds and continues fold curves until every bracket cell lies near some
/// traced curve, or `max_curves` curves were traced.
pub fn trace_fold_curves<F: CubicFamily>(
    family: &F,
    field: &OracleField,
    settings: &ContinuationSettings,
    max_curves: usize,
) -> Result<Vec<BifurcationCurve>> {
    let brackets = field.bracket_cells();
    let mut covered = vec![false; brackets.len()];
    let mut tried = vec![false; brackets.len()];
    let mut curves: Vec<BifurcationCurve> = Vec::new();
    let ranges = [field.x.range(), field.y.range()];
    while curves.len() < max_curves {
        let Some(k) = (0..brackets.len()).find(|&k| !covered[k] && !tried[k]) else {
            break;
        };
        tried[k] = true;
        let Ok(seed) = seed_from_cell(family, field, brackets[k], settings) else {
            continue;
        };
        let Ok(curve) = continue_fold_curve(family, (field.x.id, field.y.id), ranges, seed, settings) else {
            continue;
        };
        // Chords of a coarsely sampled curve can pass a few cells away from
        // it, so the same curve may be reached again from a missed cell.
        let duplicate = curves.iter().any(|c| same_curve(field, c, &curve));
        let near = cells_near_curve(field, &curve, &brackets, true);
        for (c, n) in covered.iter_mut().zip(near) {
            *c |= n;
        }
        covered[k] = true;
        if !duplicate {
            curves.push(curve);
        }
    }
    Ok(curves)
}

fn same_curve(field: &OracleField, a: &BifurcationCurve, b: &BifurcationCurve) -> bool {
    let pos = |p: &CurvePoint| (field.x.position(p.p1), field.y.position(p.p2));
    let close = |p: &CurvePoint, q: &CurvePoint| {
        let (u, v) = (pos(p), pos(q));
        ((u.0 - v.0).powi(2) + (u.1 - v.1).powi(2)).sqrt() <= 1e-3 && (p.z1 - q.z1).abs() <= 1e-6 * (1.0 + p.z1.abs())
    };
    let (Some(a0), Some(a1), Some(b0), Some(b1)) = (a.points.first(), a.points.last(), b.points.first(), b.points.last())
    else {
        return false;
    };
    (close(a0, b0) && close(a1, b1)) || (close(a0, b1) && close(a1, b0))
}

/// For each bracket cell, whether the curve passes within two cell
/// diagonals of the cell centre (measured in cell units). With `chords` the
/// straight segments between curve points count as well; otherwise only the
/// points themselves do.
fn cells_near_curve(
    field: &OracleField,
    curve: &BifurcationCurve,
    brackets: &[(usize, usize)],
    chords: bool,
) -> Vec<bool> {
    let radius = 2.0 * 2f64.sqrt();
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .map(|p| (field.x.position(p.p1), field.y.position(p.p2)))
        .collect();
    brackets
        .par_iter()
        .map(|&(i, j)| {
            let c = (i as f64 + 0.5, j as f64 + 0.5);
            if chords {
                pts.windows(2).any(|w| segment_distance(w[0], w[1], c) <= radius)
                    || pts.iter().any(|&p| segment_distance(p, p, c) <= radius)
            } else {
                pts.iter().any(|&p| segment_distance(p, p, c) <= radius)
            }
        })
        .collect()
}

fn segment_distance(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ((a.0 + t * dx - p.0).powi(2) + (a.1 + t * dy - p.1).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Containment {
    pub points_checked: usize,
    /// Curve points outside every bracket cell, as `(p1, p2)`.
    pub outside: Vec<(f64, f64)>,
    pub bracket_cells: usize,
    /// Bracket cells with no curve point within two cell diagonals of their
    /// centre.
    pub uncovered: Vec<(usize, usize)>,
}

impl Containment {
    pub fn points_contained(&self) -> bool {
        self.outside.is_empty()
    }

    pub fn cells_covered(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// Cross-checks continued fold curves against the oracle field.
pub fn check_containment(field: &OracleField, curves: &[BifurcationCurve]) -> Containment {
    let mut outside = Vec::new();
    let mut checked = 0;
    for curve in curves {
        for p in &curve.points {
            checked += 1;
            if !field.in_bracket(p.p1, p.p2) {
                outside.push((p.p1, p.p2));
            }
        }
    }
    let brackets = field.bracket_cells();
    let mut covered = vec![false; brackets.len()];
    for curve in curves {
        for (c, n) in covered.iter_mut().zip(cells_near_curve(field, curve, &brackets, false)) {
            *c |= n;
        }
    }
    let uncovered = brackets
        .iter()
        .zip(&covered)
        .filter(|(_, &c)| !c)
        .map(|(&b, _)| b)
        .collect();
    Containment {
        points_checked: checked,
        outside,
        bracket_cells: brackets.len(),
        uncovered,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::{BeamFamily, SurrogateCubic};
    use crate::model::BeamFoundationParams;

    #[test]
    fn unforced_plane_is_uniform() {
        let params = BeamFoundationParams {
            h0: 0.0,
            ..Default::default()
        };
        let fam = BeamFamily::new(params, 1.0).unwrap();
        let field = grid_scan_oracle(
            &fam,
            Axis::new(ParamId::D, -1.0, 1.0, 41).unwrap(),
            Axis::new(ParamId::Sigma, 0.0, 200.0, 41).unwrap(),
        )
        .unwrap();
        assert!(field.is_uniform());
        assert_eq!(field.count(0, 0), 1);
        assert!(field.bracket_cells().is_empty());
    }

    #[test]
    fn symmetric_bracket_boundary_follows_cusp_law() {
        let gamma = 4.0;
        let fam = SurrogateCubic::symmetric(0.0, 0.0, gamma);
        let field = grid_scan_oracle(
            &fam,
            Axis::new(ParamId::Linear, -4.0, 1.0, 201).unwrap(),
            Axis::new(ParamId::Forcing, -3.0, 3.0, 201).unwrap(),
        )
        .unwrap();
        let brackets = field.bracket_cells();
        assert!(!brackets.is_empty());
        let law = |j: f64, f: f64| 81.0 * gamma * f * f + 16.0 * j * j * j;
        for (i, j) in brackets {
            let corners = [
                (field.x.value(i), field.y.value(j)),
                (field.x.value(i + 1), field.y.value(j)),
                (field.x.value(i), field.y.value(j + 1)),
                (field.x.value(i + 1), field.y.value(j + 1)),
            ];
            // A node on the discriminant zero belongs to both sides.
            let values: Vec<f64> = corners.iter().map(|&(a, b)| law(a, b)).collect();
            let tol = 1e-9 * values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            assert!(
                values.iter().any(|&v| v >= -tol) && values.iter().any(|&v| v <= tol),
                "cell ({i},{j})"
            );
        }
    }

    #[test]
    fn traced_symmetric_curve_is_contained() {
        let fam = SurrogateCubic::symmetric(0.0, 0.0, 4.0);
        let field = grid_scan_oracle(
            &fam,
            Axis::new(ParamId::Linear, -4.0, 1.0, 101).unwrap(),
            Axis::new(ParamId::Forcing, -3.0, 3.0, 101).unwrap(),
        )
        .unwrap();
        let settings = ContinuationSettings {
            initial_step: 1e-3,
            max_step: 1e-2,
            ..Default::default()
        };
        let curves = trace_fold_curves(&fam, &field, &settings, 8).unwrap();
        assert_eq!(curves.len(), 1);
        let report = check_containment(&field, &curves);
        assert!(report.cells_covered(), "{:?}", report.uncovered);
        assert!(report.points_checked > 10);
        // Only points near the cusp tip may sit in a cell whose corners all
        // see one root.
        for (j, f) in &report.outside {
            assert!(j.abs() < 0.2 && f.abs() < 0.2, "({j}, {f})");
        }
    }
}
