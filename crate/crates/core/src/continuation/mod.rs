//! Continuation of equilibria and fold curves of the frozen fast subsystem.
//!
//! Every defining system is posed on the scalar restoring force
//! `r(z) = a0 + a1 z + a2 z^2 + a3 z^3` (the velocity is zero at any
//! equilibrium), so the unknowns are `z` plus one to three parameters.

pub mod engine;
pub mod equilibrium;
pub mod family;
pub mod fold;
pub mod oracle;

use std::fmt;

use crate::error::{Error, Result};

pub use engine::Termination;
pub use equilibrium::{continue_equilibrium, locate_fold, EquilibriumBranch, EquilibriumPoint};
pub use family::{BeamFamily, CubicFamily, ParamId, SurrogateCubic};
pub use fold::{
    continue_fold_curve, detect_bt, detect_cusp, normal_form_residual, BifurcationCurve, BtMode,
    BtReport, CurvePoint, Cusp, FoldSeed, NormalFormSample, PointKind,
};
pub use oracle::{
    check_containment, grid_scan_oracle, seed_from_cell, trace_fold_curves, Axis, Containment,
    OracleField,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationSettings {
    /// Initial arclength step in scaled coordinates.
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Residual tolerance relative to each equation's natural scale.
    pub newton_tol: f64,
    pub max_newton_iter: usize,
    pub max_points: usize,
    pub grow: f64,
    pub shrink: f64,
    /// Equilibria with `|z| > z_bound` end a branch.
    pub z_bound: f64,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        Self {
            initial_step: 1e-2,
            min_step: 1e-8,
            max_step: 1e-1,
            newton_tol: 1e-10,
            max_newton_iter: 20,
            max_points: 10_000,
            grow: 1.3,
            shrink: 0.5,
            z_bound: 50.0,
        }
    }
}

impl ContinuationSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = self.min_step > 0.0
            && self.min_step <= self.initial_step
            && self.initial_step <= self.max_step
            && self.max_step.is_finite()
            && self.newton_tol > 0.0
            && self.max_newton_iter > 0
            && self.max_points >= 2
            && self.grow >= 1.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.z_bound > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("inconsistent continuation settings: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BifurcationKind {
    Fold,
    Cusp,
    Bt,
}

impl BifurcationKind {
    pub fn name(self) -> &'static str {
        match self {
            BifurcationKind::Fold => "fold",
            BifurcationKind::Cusp => "cusp",
            BifurcationKind::Bt => "bt",
        }
    }
}

impl fmt::Display for BifurcationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Test-function values at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestValues {
    /// `-dr/dz`.
    pub k_eff: f64,
    /// `d^2 r / dz^2`.
    pub sigma_pp: f64,
    /// Trace of the fast Jacobian, `-xi`.
    pub trace: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationPoint {
    pub kind: BifurcationKind,
    pub z1: f64,
    /// Active parameter values in external coordinates.
    pub params: Vec<(ParamId, f64)>,
    pub tests: TestValues,
    /// `|r|` at the point.
    pub residual: f64,
    /// Natural magnitudes of `r` and `dr/dz` at the point.
    pub scales: [f64; 2],
    /// Set when Newton failed and the point came from bisection.
    pub reduced_precision: bool,
}

impl BifurcationPoint {
    pub fn param(&self, id: ParamId) -> Option<f64> {
        self.params.iter().find(|(p, _)| *p == id).map(|(_, v)| *v)
    }
}

/// Test values and residual information of `family` at `z`.
pub(crate) fn point_info<F: CubicFamily>(family: &F, z: f64) -> (TestValues, f64, [f64; 2]) {
    let a = family.coefficients();
    let e = family::eval_cubic(&a, z);
    (
        TestValues {
            k_eff: -e[1],
            sigma_pp: e[2],
            trace: -family.xi(),
        },
        e[0].abs(),
        family.residual_scales(z),
    )
}

/// Internal box for a parameter given an external range.
pub(crate) fn internal_bounds<F: CubicFamily>(family: &F, id: ParamId, range: (f64, f64)) -> (f64, f64) {
    let a = family.to_internal(id, range.0);
    let b = family.to_internal(id, range.1);
    (a.min(b), a.max(b))
}

pub(crate) fn check_supported<F: CubicFamily>(family: &F, ids: &[ParamId]) -> Result<()> {
    for &id in ids {
        if !family.supports(id) {
            return Err(Error::UnsupportedParameter(format!(
                "{} is not a parameter of the {} family",
                id,
                family.name()
            )));
        }
    }
    Ok(())
}

pub(crate) fn check_range(id: ParamId, range: (f64, f64)) -> Result<()> {
    if !(range.0.is_finite() && range.1.is_finite() && range.0 < range.1) {
        return Err(Error::InvalidInput(format!(
            "range for {id} must be finite and increasing, got [{}, {}]",
            range.0, range.1
        )));
    }
    Ok(())
}
