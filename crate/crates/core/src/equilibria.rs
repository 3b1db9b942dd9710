//! Equilibria of the frozen fast subsystem and the critical manifold.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cubic::{Cubic, Root};
use crate::error::{Error, Result};
use crate::model::{
    coeffs_slow, effective_stiffness, restoring_force, BeamFoundationParams, SineBranch,
    SlowFastCoefficients, SlowPhase,
};

/// Residual (relative to the term magnitudes) a candidate must meet to be
/// accepted as an equilibrium by [`classify`].
pub const ROOT_ACCEPT_TOL: f64 = 1e-9;

/// Relative tolerance under which `k_eff` counts as zero.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// The equilibrium cubic `F - J z + G z^2 - (3/4) gamma z^3`.
pub fn equilibrium_cubic(c: &SlowFastCoefficients, gamma: f64) -> Cubic {
    Cubic([c.forcing, -c.stiffness, c.quadratic, -0.75 * gamma])
}

/// All real equilibria, ascending, each polished and tagged with its
/// multiplicity. `gamma = 0` falls back to the quadratic or linear case.
pub fn equilibrium_roots(c: &SlowFastCoefficients, gamma: f64) -> Vec<Root> {
    equilibrium_cubic(c, gamma).roots()
}

/// `-K(z1)`: positive for a potential minimum.
pub fn k_eff(z1: f64, c: &SlowFastCoefficients, gamma: f64) -> f64 {
    -effective_stiffness(z1, c, gamma)
}

fn k_eff_scale(z1: f64, c: &SlowFastCoefficients, gamma: f64) -> f64 {
    c.stiffness.abs() + 2.0 * (c.quadratic * z1).abs() + 2.25 * gamma * z1 * z1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    StableFocus,
    StableNode,
    Saddle,
    Center,
    Degenerate,
}

impl Stability {
    pub fn is_stable(self) -> bool {
        matches!(self, Stability::StableFocus | Stability::StableNode)
    }

    pub fn name(self) -> &'static str {
        match self {
            Stability::StableFocus => "stable-focus",
            Stability::StableNode => "stable-node",
            Stability::Saddle => "saddle",
            Stability::Center => "center",
            Stability::Degenerate => "degenerate",
        }
    }

    pub const ALL: [Stability; 5] = [
        Stability::StableFocus,
        Stability::StableNode,
        Stability::Saddle,
        Stability::Center,
        Stability::Degenerate,
    ];
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumRecord {
    pub d: f64,
    pub z1_star: f64,
    pub k_eff: f64,
    pub eigenvalues: [Complex64; 2],
    pub stability: Stability,
}

/// Roots of `lambda^2 + xi lambda + k = 0`.
pub fn eigenvalues(k: f64, xi: f64) -> [Complex64; 2] {
    let disc = xi * xi - 4.0 * k;
    if disc >= 0.0 {
        // Avoid cancellation in the smaller root.
        let q = -0.5 * (xi + disc.sqrt());
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(q, 0.0), Complex64::new(k / q, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(-0.5 * xi, im), Complex64::new(-0.5 * xi, -im)]
    }
}

/// Linear stability of an equilibrium `z1_star` at slow value `d`.
pub fn classify(
    d: f64,
    z1_star: f64,
    c: &SlowFastCoefficients,
    gamma: f64,
    xi: f64,
) -> Result<EquilibriumRecord> {
    let cubic = equilibrium_cubic(c, gamma);
    let residual = restoring_force(z1_star, c, gamma);
    if !(residual.abs() <= ROOT_ACCEPT_TOL * cubic.magnitude(z1_star).max(1.0)) {
        return Err(Error::NotAnEquilibrium {
            z1: z1_star,
            residual,
        });
    }
    let k = k_eff(z1_star, c, gamma);
    let stability = if k.abs() <= DEGENERATE_TOL * k_eff_scale(z1_star, c, gamma) {
        Stability::Degenerate
    } else if k < 0.0 {
        Stability::Saddle
    } else if xi == 0.0 {
        Stability::Center
    } else if xi * xi >= 4.0 * k {
        Stability::StableNode
    } else {
        Stability::StableFocus
    };
    Ok(EquilibriumRecord {
        d,
        z1_star,
        k_eff: k,
        eigenvalues: eigenvalues(k, xi),
        stability,
    })
}

/// Number of wells (strict local minima) of the full potential.
pub fn well_count(c: &SlowFastCoefficients, gamma: f64, z1_range: (f64, f64)) -> usize {
    equilibrium_roots(c, gamma)
        .iter()
        .filter(|r| r.multiplicity == 1)
        .filter(|r| r.value >= z1_range.0 && r.value <= z1_range.1)
        .filter(|r| k_eff(r.value, c, gamma) > 0.0)
        .count()
}

/// A continuous piece of the critical manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldBranch {
    pub id: usize,
    pub points: Vec<EquilibriumRecord>,
    /// Slow values where the branch starts or ends strictly inside the grid.
    pub fold_endpoints: Vec<f64>,
}

/// Grid cell `[d_lo, d_hi]` across which the equilibrium count changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldBracket {
    pub d_lo: f64,
    pub d_hi: f64,
    pub count_lo: usize,
    pub count_hi: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalManifold {
    pub branches: Vec<ManifoldBranch>,
    pub brackets: Vec<FoldBracket>,
    /// Distinct equilibria at every grid value.
    pub counts: Vec<usize>,
}

/// `n` uniformly spaced values on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Equilibria of the beam model over a grid in `d` on one sine branch.
pub fn critical_manifold(
    params: &BeamFoundationParams,
    d_grid: &[f64],
    branch: SineBranch,
) -> Result<CriticalManifold> {
    params.validate()?;
    critical_manifold_with(d_grid, params.gamma, params.xi, |d| {
        coeffs_slow(SlowPhase::new(d, branch)?, params)
    })
}

/// Critical manifold for arbitrary coefficient functions of `d`.
pub fn critical_manifold_with<C>(
    d_grid: &[f64],
    gamma: f64,
    xi: f64,
    coefficients: C,
) -> Result<CriticalManifold>
where
    C: Fn(f64) -> Result<SlowFastCoefficients> + Sync,
{
    if d_grid.is_empty() {
        return Err(Error::InvalidInput("empty d grid".into()));
    }
    if d_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("d grid must be strictly increasing".into()));
    }
    if d_grid.iter().any(|d| d.abs() > 1.0) {
        return Err(Error::InvalidInput("d grid must lie in [-1, 1]".into()));
    }

    let rows: Vec<Vec<EquilibriumRecord>> = d_grid
        .par_iter()
        .map(|&d| {
            let c = coefficients(d)?;
            equilibrium_roots(&c, gamma)
                .into_iter()
                .map(|r| classify(d, r.value, &c, gamma, xi))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let counts: Vec<usize> = rows.iter().map(Vec::len).collect();
    let brackets = d_grid
        .windows(2)
        .zip(counts.windows(2))
        .filter(|(_, n)| n[0] != n[1])
        .map(|(d, n)| FoldBracket {
            d_lo: d[0],
            d_hi: d[1],
            count_lo: n[0],
            count_hi: n[1],
        })
        .collect();

    let branches = thread_branches(&rows);
    Ok(CriticalManifold {
        branches,
        brackets,
        counts,
    })
}

/// Threads per-grid equilibria into branches. Real roots of a cubic keep
/// their order until two of them merge, so rows with equal counts pair up in
/// sorted order. When the count changes, the closest adjacent pair of the
/// larger row is the one born or lost at the fold.
fn thread_branches(rows: &[Vec<EquilibriumRecord>]) -> Vec<ManifoldBranch> {
    let mut finished: Vec<ManifoldBranch> = Vec::new();
    // Active branches in ascending z1 order.
    let mut active: Vec<ManifoldBranch> = Vec::new();
    let mut next_id = 0;
    let last_row = rows.len().saturating_sub(1);
    let start = |rec: &EquilibriumRecord, interior: bool, next_id: &mut usize| {
        let b = ManifoldBranch {
            id: *next_id,
            points: vec![*rec],
            fold_endpoints: if interior { vec![rec.d] } else { vec![] },
        };
        *next_id += 1;
        b
    };

    for (i, row) in rows.iter().enumerate() {
        if i == 0 {
            active = row.iter().map(|r| start(r, false, &mut next_id)).collect();
            continue;
        }
        let interior = i < last_row;
        if row.len() == active.len() {
            for (b, r) in active.iter_mut().zip(row) {
                b.points.push(*r);
            }
        } else if row.len() < active.len() {
            let tails: Vec<f64> = active.iter().map(|b| b.points.last().unwrap().z1_star).collect();
            let lost = closest_pairs(&tails, active.len() - row.len());
            let mut kept = Vec::with_capacity(row.len());
            for (k, mut b) in active.into_iter().enumerate() {
                if lost.contains(&k) {
                    let end = b.points.last().unwrap().d;
                    b.fold_endpoints.push(end);
                    finished.push(b);
                } else {
                    kept.push(b);
                }
            }
            for (b, r) in kept.iter_mut().zip(row) {
                b.points.push(*r);
            }
            active = kept;
        } else {
            let values: Vec<f64> = row.iter().map(|r| r.z1_star).collect();
            let born = closest_pairs(&values, row.len() - active.len());
            let mut old = active.into_iter();
            let mut next = Vec::with_capacity(row.len());
            for (k, r) in row.iter().enumerate() {
                if born.contains(&k) {
                    next.push(start(r, interior, &mut next_id));
                } else if let Some(mut b) = old.next() {
                    b.points.push(*r);
                    next.push(b);
                }
            }
            active = next;
        }
    }
    finished.extend(active);
    finished.sort_by_key(|b| b.id);
    finished
}

/// Indices of `excess` entries of the sorted `values` forming the closest
/// adjacent pair (two entries per pair; an odd excess takes one extra
/// neighbour).
fn closest_pairs(values: &[f64], excess: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    while out.len() < excess {
        let free: Vec<usize> = (0..values.len()).filter(|k| !out.contains(k)).collect();
        if free.len() < 2 {
            out.extend(free.into_iter().take(excess - out.len()));
            break;
        }
        let w = free
            .windows(2)
            .min_by(|a, b| (values[a[1]] - values[a[0]]).total_cmp(&(values[b[1]] - values[b[0]])))
            .unwrap();
        out.push(w[0]);
        if out.len() < excess {
            out.push(w[1]);
        }
    }
    out
}
