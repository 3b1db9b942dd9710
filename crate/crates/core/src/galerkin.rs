//! Quadrature re-derivation of the single-mode coefficients.
//!
//! The foundation terms of the nondimensional beam equation are projected on
//! `W = sin(pi chi)` with Gauss-Legendre quadrature and compared, harmonic by
//! harmonic, with the closed forms in [`crate::model`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{time_terms, BeamFoundationParams, CoefficientTerms};

const PI4: f64 = PI * PI * PI * PI;

/// Base displacement `h0 cos(kappa chi - omega tau)`.
pub fn wave_profile(chi: f64, tau: f64, params: &BeamFoundationParams) -> f64 {
    params.h0 * (params.kappa * chi - params.omega * tau).cos()
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess for the i-th largest root on [-1, 1].
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

/// Numerically projected coefficients at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionResult {
    pub t: f64,
    /// Stiffness, quadratic and the two forcing parts.
    pub terms: CoefficientTerms,
    /// Coefficient of `q^3`.
    pub cubic: f64,
    pub nodes: usize,
    /// Largest change against a half-size rule.
    pub error_estimate: f64,
}

impl ProjectionResult {
    pub fn forcing(&self) -> f64 {
        self.terms.forcing_linear + self.terms.forcing_cubic
    }
}

fn project_raw(t: f64, params: &BeamFoundationParams, n: usize) -> (CoefficientTerms, f64) {
    let (nodes, weights) = gauss_legendre(n);
    let (sigma, gamma) = (params.sigma, params.gamma);
    let (mut stiff, mut quad, mut f_lin, mut f_cub, mut cubic) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&chi, &w) in nodes.iter().zip(&weights) {
        let m = (PI * chi).sin();
        let z = wave_profile(chi, t, params);
        let m2 = m * m;
        stiff += w * (sigma + 3.0 * gamma * z * z) * m2;
        quad += w * 3.0 * gamma * z * m2 * m;
        cubic += w * gamma * m2 * m2;
        f_lin += w * sigma * z * m;
        f_cub += w * gamma * z * z * z * m;
    }
    // Divide by the modal mass 1/2.
    (
        CoefficientTerms {
            stiffness: PI4 + 2.0 * stiff,
            quadratic: 2.0 * quad,
            forcing_linear: 2.0 * f_lin,
            forcing_cubic: 2.0 * f_cub,
        },
        2.0 * cubic,
    )
}

/// Projects the foundation terms on the first mode with `n_nodes` points.
pub fn project_coefficients(
    t: f64,
    params: &BeamFoundationParams,
    n_nodes: usize,
) -> Result<ProjectionResult> {
    params.validate()?;
    if n_nodes < 8 {
        return Err(Error::InvalidInput(format!(
            "at least 8 quadrature nodes are required, got {n_nodes}"
        )));
    }
    let (terms, cubic) = project_raw(t, params, n_nodes);
    let (coarse, coarse_cubic) = project_raw(t, params, n_nodes / 2);
    let error_estimate = [
        terms.stiffness - coarse.stiffness,
        terms.quadratic - coarse.quadratic,
        terms.forcing_linear - coarse.forcing_linear,
        terms.forcing_cubic - coarse.forcing_cubic,
        cubic - coarse_cubic,
    ]
    .iter()
    .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(ProjectionResult {
        t,
        terms,
        cubic,
        nodes: n_nodes,
        error_estimate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    Stiffness,
    Quadratic,
    ForcingLinear,
    ForcingCubic,
}

impl Term {
    pub const ALL: [Term; 4] = [
        Term::Stiffness,
        Term::Quadratic,
        Term::ForcingLinear,
        Term::ForcingCubic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Term::Stiffness => "J",
            Term::Quadratic => "G",
            Term::ForcingLinear => "F_sigma",
            Term::ForcingCubic => "F_gamma",
        }
    }

    /// Highest harmonic of `omega t` the closed form contains.
    pub fn max_harmonic(self) -> usize {
        match self {
            Term::Stiffness => 2,
            Term::Quadratic | Term::ForcingLinear => 1,
            Term::ForcingCubic => 3,
        }
    }

    pub fn of(self, c: &CoefficientTerms) -> f64 {
        match self {
            Term::Stiffness => c.stiffness,
            Term::Quadratic => c.quadratic,
            Term::ForcingLinear => c.forcing_linear,
            Term::ForcingCubic => c.forcing_cubic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignRelation {
    Same,
    Opposite,
    Inconclusive,
}

impl SignRelation {
    pub fn name(self) -> &'static str {
        match self {
            SignRelation::Same => "same",
            SignRelation::Opposite => "opposite",
            SignRelation::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicComparison {
    pub harmonic: usize,
    pub closed_form: f64,
    pub quadrature: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermComparison {
    pub term: Term,
    pub harmonics: Vec<HarmonicComparison>,
    pub sign: SignRelation,
    /// Largest sample of the quadrature series not explained by harmonics up
    /// to `max_harmonic`, relative to the term scale.
    pub structural_residual: f64,
}

impl TermComparison {
    pub fn max_rel_diff(&self) -> f64 {
        self.harmonics.iter().fold(0.0, |m, h| m.max(h.rel_diff))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub coef: &'static str,
    pub closed_form: f64,
    pub quadrature: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub nodes: usize,
    pub samples: usize,
    pub terms: Vec<TermComparison>,
    pub cubic: f64,
    pub cubic_expected: f64,
    pub max_error_estimate: f64,
    pub rows: Vec<CsvRow>,
}

/// Harmonics of a term agree when their relative magnitude difference is at
/// most this.
pub const HARMONIC_TOL: f64 = 1e-8;
/// Tolerance on the projected cubic coefficient.
pub const CUBIC_TOL: f64 = 1e-10;

impl CompatibilityReport {
    pub fn harmonics_agree(&self) -> bool {
        self.terms.iter().all(|t| t.max_rel_diff() <= HARMONIC_TOL)
    }

    pub fn structure_agrees(&self) -> bool {
        self.terms.iter().all(|t| t.structural_residual <= HARMONIC_TOL)
    }

    pub fn cubic_agrees(&self) -> bool {
        (self.cubic - self.cubic_expected).abs() <= CUBIC_TOL
    }

    pub fn sign_mismatches(&self) -> Vec<Term> {
        self.terms
            .iter()
            .filter(|t| t.sign != SignRelation::Same)
            .map(|t| t.term)
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.harmonics_agree() && self.structure_agrees() && self.cubic_agrees()
    }

    /// Plain-text summary, one line per term and harmonic.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "projection on sin(pi x): {} nodes, {} samples per slow period\n",
            self.nodes, self.samples
        ));
        for t in &self.terms {
            out.push_str(&format!(
                "{:<8} sign={:<12} structural_residual={:.3e}\n",
                t.term.name(),
                t.sign.name(),
                t.structural_residual
            ));
            for h in &t.harmonics {
                out.push_str(&format!(
                    "    harmonic {}: closed={:.15e} quadrature={:.15e} rel_diff={:.3e}\n",
                    h.harmonic, h.closed_form, h.quadrature, h.rel_diff
                ));
            }
        }
        out.push_str(&format!(
            "cubic: quadrature={:.15e} expected={:.15e} diff={:.3e}\n",
            self.cubic,
            self.cubic_expected,
            (self.cubic - self.cubic_expected).abs()
        ));
        let mismatches: Vec<_> = self.sign_mismatches().iter().map(|t| t.name()).collect();
        out.push_str(&format!(
            "sign mismatches: {}\n",
            if mismatches.is_empty() {
                "none".to_string()
            } else {
                mismatches.join(", ")
            }
        ));
        out.push_str(&format!("quadrature error estimate: {:.3e}\n", self.max_error_estimate));
        out
    }
}

/// Complex Fourier coefficients `c_k`, `k = 0..=kmax`, of equally spaced
/// samples over one period.
fn fourier(samples: &[f64], kmax: usize) -> Vec<Complex64> {
    let m = samples.len() as f64;
    (0..=kmax)
        .map(|k| {
            samples
                .iter()
                .enumerate()
                .map(|(j, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * j) as f64 / m))
                .sum::<Complex64>()
                / m
        })
        .collect()
}

/// Amplitude of harmonic `k` of a real series from its complex coefficient.
fn amplitude(c: Complex64, k: usize) -> f64 {
    if k == 0 {
        c.re.abs()
    } else {
        2.0 * c.norm()
    }
}

fn reconstruct(c: &[Complex64], j: usize, m: usize) -> f64 {
    c.iter()
        .enumerate()
        .map(|(k, ck)| {
            let v = (ck * Complex64::from_polar(1.0, 2.0 * PI * (k * j) as f64 / m as f64)).re;
            if k == 0 {
                v
            } else {
                2.0 * v
            }
        })
        .sum()
}

/// Compares quadrature and closed-form coefficients over one slow period.
///
/// `samples` equally spaced instants are used; the CSV rows cover every one
/// of them.
pub fn compatibility_report(
    params: &BeamFoundationParams,
    n_nodes: usize,
    samples: usize,
) -> Result<CompatibilityReport> {
    params.validate()?;
    if samples < 8 {
        return Err(Error::InvalidInput(format!(
            "at least 8 time samples are required, got {samples}"
        )));
    }
    let period = 2.0 * PI / params.omega;
    let times: Vec<f64> = (0..samples).map(|j| period * j as f64 / samples as f64).collect();
    let mut quad = Vec::with_capacity(samples);
    let mut closed = Vec::with_capacity(samples);
    for &t in &times {
        quad.push(project_coefficients(t, params, n_nodes)?);
        closed.push(time_terms(t, params)?);
    }

    // Harmonics are only compared up to 3; the series has more room than that.
    let kmax = 3.min((samples - 1) / 2);
    let mut terms = Vec::new();
    for term in Term::ALL {
        let q: Vec<f64> = quad.iter().map(|r| term.of(&r.terms)).collect();
        let c: Vec<f64> = closed.iter().map(|r| term.of(r)).collect();
        let qf = fourier(&q, kmax);
        let cf = fourier(&c, kmax);
        let scale = (0..=kmax)
            .map(|k| amplitude(cf[k], k).max(amplitude(qf[k], k)))
            .fold(0.0, f64::max);
        let floor = 1e-12 * scale;
        let harmonics = (0..=kmax)
            .map(|k| {
                let (a, b) = (amplitude(qf[k], k), amplitude(cf[k], k));
                let rel_diff = if a.max(b) <= floor {
                    0.0
                } else {
                    (a - b).abs() / a.max(b)
                };
                HarmonicComparison {
                    harmonic: k,
                    closed_form: b,
                    quadrature: a,
                    rel_diff,
                }
            })
            .collect();

        let kept = &qf[..=term.max_harmonic().min(kmax)];
        let structural_residual = q
            .iter()
            .enumerate()
            .map(|(j, v)| (v - reconstruct(kept, j, samples)).abs())
            .fold(0.0, f64::max)
            / scale.max(f64::MIN_POSITIVE);

        let same: f64 = q.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let flip: f64 = q.iter().zip(&c).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sign = if same <= 1e-6 * norm {
            SignRelation::Same
        } else if flip <= 1e-6 * norm {
            SignRelation::Opposite
        } else {
            SignRelation::Inconclusive
        };

        terms.push(TermComparison {
            term,
            harmonics,
            sign,
            structural_residual,
        });
    }

    let mut rows = Vec::new();
    for ((t, q), c) in times.iter().zip(&quad).zip(&closed) {
        for term in Term::ALL {
            let (a, b) = (term.of(&q.terms), term.of(c));
            let abs_diff = (a - b).abs();
            rows.push(CsvRow {
                t: *t,
                coef: term.name(),
                closed_form: b,
                quadrature: a,
                abs_diff,
                rel_diff: if b != 0.0 { abs_diff / b.abs() } else { abs_diff },
            });
        }
        let expected = 0.75 * params.gamma;
        let abs_diff = (q.cubic - expected).abs();
        rows.push(CsvRow {
            t: *t,
            coef: "cubic",
            closed_form: expected,
            quadrature: q.cubic,
            abs_diff,
            rel_diff: if expected != 0.0 { abs_diff / expected } else { abs_diff },
        });
    }

    Ok(CompatibilityReport {
        nodes: n_nodes,
        samples,
        cubic: quad[0].cubic,
        cubic_expected: 0.75 * params.gamma,
        max_error_estimate: quad.iter().fold(0.0, |m, r| m.max(r.error_estimate)),
        terms,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QuadraticForm;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // Degree 15 is the highest exact degree for 8 nodes.
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(15)).sum();
        assert!((integral - 1.0 / 16.0).abs() < 1e-15);
        assert!(x.windows(2).all(|p| p[1] > p[0]));
        let (x, w) = gauss_legendre(7);
        assert!((x[3] - 0.5).abs() < 1e-15);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn profile_examples() {
        let params = BeamFoundationParams::default();
        assert_eq!(wave_profile(0.0, 0.0, &params), params.h0);
        let period = 2.0 * PI / params.omega;
        let (a, b) = (wave_profile(0.3, 17.0, &params), wave_profile(0.3, 17.0 + period, &params));
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn profile_projection_matches_hand_integral() {
        let params = BeamFoundationParams::default();
        let (x, w) = gauss_legendre(64);
        for t in [0.0, 40.0, 300.0] {
            let wt = params.omega * t;
            let num: f64 = x
                .iter()
                .zip(&w)
                .map(|(&chi, &wi)| wi * (PI * chi).sin() * wave_profile(chi, t, &params))
                .sum();
            let k = params.kappa;
            let exact = params.h0 * PI * (wt.cos() + (k - wt).cos()) / (PI * PI - k * k);
            assert!((num - exact).abs() < 1e-14, "{num} vs {exact}");
        }
    }

    #[test]
    fn unforced_projection_is_exact() {
        let params = BeamFoundationParams {
            h0: 0.0,
            ..Default::default()
        };
        let r = project_coefficients(1.0, &params, 32).unwrap();
        assert_eq!(r.forcing(), 0.0);
        assert_eq!(r.terms.quadratic, 0.0);
        assert!((r.terms.stiffness - PI4 - params.sigma).abs() <= 1e-12);
    }

    #[test]
    fn node_doubling_converges() {
        let params = BeamFoundationParams::default();
        let a = project_coefficients(0.0, &params, 32).unwrap();
        let b = project_coefficients(0.0, &params, 64).unwrap();
        for term in Term::ALL {
            assert!((term.of(&a.terms) - term.of(&b.terms)).abs() <= 1e-10);
        }
        assert!((b.cubic - 0.75 * params.gamma).abs() <= 1e-10);
        assert!(project_coefficients(0.0, &params, 4).is_err());
    }

    #[test]
    fn projected_form_matches_harmonics_and_itemizes_sign() {
        let report = compatibility_report(&BeamFoundationParams::default(), 64, 64).unwrap();
        assert!(report.passed(), "{}", report.render());
        assert_eq!(report.sign_mismatches(), vec![Term::ForcingLinear]);
    }

    #[test]
    fn printed_form_shows_quadratic_mismatch() {
        let params = BeamFoundationParams {
            quadratic_form: QuadraticForm::Printed,
            ..Default::default()
        };
        let report = compatibility_report(&params, 64, 64).unwrap();
        let g = report.terms.iter().find(|t| t.term == Term::Quadratic).unwrap();
        assert!(g.max_rel_diff() > 1e-3);
        assert!(!report.harmonics_agree());
    }
}
