//! Closed-form quantities of the single-mode beam/foundation model.
//!
//! The reduced oscillator is
//!
//! ```text
//! q'' + xi q' + J q - G q^2 + (3/4) gamma q^3 = F
//! ```
//!
//! with coefficients that are periodic in `omega t`. They are available in two
//! forms: literally in time ([`coeffs_time`]) and autonomised in the slow
//! variable `d = cos(omega t)` together with the sign of `sin(omega t)`
//! ([`coeffs_slow`]). The two must agree wherever both are defined.

use std::f64::consts::PI;

use nalgebra::Matrix2;

use crate::error::{Error, Result};

const PI2: f64 = PI * PI;
const PI3: f64 = PI2 * PI;
const PI4: f64 = PI2 * PI2;

/// Default absolute exclusion radius around the singular wave numbers.
pub const DEFAULT_KAPPA_EXCLUSION: f64 = 1e-3;

/// Denominator used for the quadratic (parametric) coefficient `G`.
///
/// `Projected` is `(pi^2 - kappa^2)(9 pi^2 - kappa^2)`, which is what the
/// single-mode projection of the foundation term actually produces.
/// `Printed` is `9 pi^4 + 10 pi^2 kappa^2 + kappa^4`, kept so the literal
/// published coefficient can still be run and compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadraticForm {
    #[default]
    Projected,
    Printed,
}

impl QuadraticForm {
    pub fn denominator(self, kappa: f64) -> f64 {
        let k2 = kappa * kappa;
        match self {
            QuadraticForm::Projected => 9.0 * PI4 - 10.0 * PI2 * k2 + k2 * k2,
            QuadraticForm::Printed => 9.0 * PI4 + 10.0 * PI2 * k2 + k2 * k2,
        }
    }

    /// Derivative of [`Self::denominator`] with respect to kappa.
    pub fn denominator_slope(self, kappa: f64) -> f64 {
        let k3 = kappa * kappa * kappa;
        match self {
            QuadraticForm::Projected => -20.0 * PI2 * kappa + 4.0 * k3,
            QuadraticForm::Printed => 20.0 * PI2 * kappa + 4.0 * k3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QuadraticForm::Projected => "projected",
            QuadraticForm::Printed => "printed",
        }
    }
}

impl std::str::FromStr for QuadraticForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "projected" => Ok(QuadraticForm::Projected),
            "printed" => Ok(QuadraticForm::Printed),
            other => Err(Error::InvalidInput(format!(
                "unknown quadratic form `{other}` (expected projected|printed)"
            ))),
        }
    }
}

/// Dimensionless parameter set of the beam on a cubic foundation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamFoundationParams {
    /// Damping ratio.
    pub xi: f64,
    /// Linear foundation stiffness `k L^4 / EI`.
    pub sigma: f64,
    /// Cubic foundation stiffness `alpha L^6 / EI`.
    pub gamma: f64,
    /// Wave number over the beam length.
    pub kappa: f64,
    /// Wave amplitude relative to the beam length.
    pub h0: f64,
    /// Excitation frequency.
    pub omega: f64,
    /// Absolute exclusion radius around the singular wave numbers.
    pub kappa_exclusion: f64,
    pub quadratic_form: QuadraticForm,
}

impl Default for BeamFoundationParams {
    /// The bursting case: `xi = 0.02, sigma = 120, gamma = 150, kappa = 1,
    /// h0 = 0.1, omega = 0.01`.
    fn default() -> Self {
        Self {
            xi: 0.02,
            sigma: 120.0,
            gamma: 150.0,
            kappa: 1.0,
            h0: 0.1,
            omega: 0.01,
            kappa_exclusion: DEFAULT_KAPPA_EXCLUSION,
            quadratic_form: QuadraticForm::default(),
        }
    }
}

impl BeamFoundationParams {
    /// Wave numbers at which a closed-form denominator vanishes.
    pub fn singular_wave_numbers(&self) -> &'static [f64] {
        match self.quadratic_form {
            QuadraticForm::Projected => &[PI / 3.0, PI, 3.0 * PI],
            QuadraticForm::Printed => &[PI / 3.0, PI],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("xi", self.xi),
            ("sigma", self.sigma),
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("h0", self.h0),
            ("omega", self.omega),
            ("kappa_exclusion", self.kappa_exclusion),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        let checks = [
            ("xi", self.xi, self.xi >= 0.0, "must be non-negative"),
            ("gamma", self.gamma, self.gamma >= 0.0, "must be non-negative"),
            ("h0", self.h0, self.h0 >= 0.0, "must be non-negative"),
            ("omega", self.omega, self.omega > 0.0, "must be positive"),
            ("kappa", self.kappa, self.kappa > 0.0, "must be positive"),
            (
                "kappa_exclusion",
                self.kappa_exclusion,
                self.kappa_exclusion >= 0.0,
                "must be non-negative",
            ),
        ];
        for (name, value, ok, reason) in checks {
            if !ok {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason,
                });
            }
        }
        self.check_kappa(self.kappa)
    }

    /// Rejects wave numbers inside the exclusion radius of a singular value.
    pub fn check_kappa(&self, kappa: f64) -> Result<()> {
        for &pole in self.singular_wave_numbers() {
            if (kappa - pole).abs() <= self.kappa_exclusion {
                return Err(Error::SingularKappa {
                    kappa,
                    pole,
                    radius: self.kappa_exclusion,
                });
            }
        }
        Ok(())
    }

    /// Linearised fast frequency `sqrt(pi^4 + sigma)` of the unforced beam.
    pub fn linear_fast_frequency(&self) -> f64 {
        (PI4 + self.sigma).max(0.0).sqrt()
    }
}

/// Sign of `sin(omega t)`; selects the half period on which `d` is inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SineBranch {
    #[default]
    Upper,
    Lower,
}

impl SineBranch {
    pub fn sign(self) -> f64 {
        match self {
            SineBranch::Upper => 1.0,
            SineBranch::Lower => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            SineBranch::Upper => SineBranch::Lower,
            SineBranch::Lower => SineBranch::Upper,
        }
    }

    /// Branch of a phase angle; `sin a = 0` maps to `Upper`.
    pub fn of_angle(angle: f64) -> Self {
        if angle.sin() < 0.0 {
            SineBranch::Lower
        } else {
            SineBranch::Upper
        }
    }
}

/// Slow phase `d = cos(omega t)` together with the sign of `sin(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowPhase {
    d: f64,
    branch: SineBranch,
}

impl SlowPhase {
    pub fn new(d: f64, branch: SineBranch) -> Result<Self> {
        if !d.is_finite() || d.abs() > 1.0 {
            return Err(Error::SlowDomain(d));
        }
        Ok(Self { d, branch })
    }

    pub fn upper(d: f64) -> Result<Self> {
        Self::new(d, SineBranch::Upper)
    }

    /// Phase at `omega t = angle`.
    pub fn from_angle(angle: f64) -> Self {
        Self {
            d: angle.cos().clamp(-1.0, 1.0),
            branch: SineBranch::of_angle(angle),
        }
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn branch(&self) -> SineBranch {
        self.branch
    }

    pub fn with_branch(self, branch: SineBranch) -> Self {
        Self { branch, ..self }
    }

    /// `sin(omega t)` reconstructed as `s sqrt(1 - d^2)`.
    pub fn sine(&self) -> f64 {
        let d = self.d;
        self.branch.sign() * ((1.0 - d) * (1.0 + d)).max(0.0).sqrt()
    }

    fn sin_multiple(&self, n: u32) -> Result<f64> {
        let d = self.d;
        match n {
            1 => Ok(self.sine()),
            2 => Ok(2.0 * d * self.sine()),
            3 => Ok((4.0 * d * d - 1.0) * self.sine()),
            _ => Err(Error::UnsupportedHarmonic(n)),
        }
    }
}

/// `cos(omega t) + cos(kappa - omega t)` expressed in the slow phase.
pub fn phase_factor(p: SlowPhase, kappa: f64) -> f64 {
    p.d * (1.0 + kappa.cos()) + p.sine() * kappa.sin()
}

/// `cos(n omega t)` as a polynomial in `d`.
pub fn reduce_cos_multiple(p: SlowPhase, n: u32) -> Result<f64> {
    let d = p.d;
    match n {
        1 => Ok(d),
        2 => Ok(2.0 * d * d - 1.0),
        3 => Ok(d * (4.0 * d * d - 3.0)),
        _ => Err(Error::UnsupportedHarmonic(n)),
    }
}

/// `cos(n (theta - omega t))` in the slow phase, using the branch sign for
/// the sine multiples.
pub fn reduce_cos_shifted(p: SlowPhase, theta: f64, n: u32) -> Result<f64> {
    let nt = n as f64 * theta;
    Ok(nt.cos() * reduce_cos_multiple(p, n)? + nt.sin() * p.sin_multiple(n)?)
}

/// The triple `(F, J, G)` at one slow phase or instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SlowFastCoefficients {
    /// External forcing `F`.
    pub forcing: f64,
    /// Linear stiffness `J`, including `pi^4 + sigma`.
    pub stiffness: f64,
    /// Quadratic coefficient `G` (enters the oscillator as `- G q^2`).
    pub quadratic: f64,
}

/// Coefficients split by physical origin, as used by the projection check.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoefficientTerms {
    pub stiffness: f64,
    pub quadratic: f64,
    /// Part of `F` proportional to `sigma`.
    pub forcing_linear: f64,
    /// Part of `F` proportional to `gamma`.
    pub forcing_cubic: f64,
}

impl CoefficientTerms {
    pub fn combined(&self) -> SlowFastCoefficients {
        SlowFastCoefficients {
            forcing: self.forcing_linear + self.forcing_cubic,
            stiffness: self.stiffness,
            quadratic: self.quadratic,
        }
    }
}

/// Harmonic content the coefficient formulas are built from, at one phase.
struct Harmonics {
    /// `cos(wt) + cos(kappa - wt)`
    first: f64,
    /// `cos(kappa - 2 wt)`
    second_shifted: f64,
    /// `cos(3 wt) + cos(3 (kappa - wt))`
    third: f64,
}

fn assemble(params: &BeamFoundationParams, h: Harmonics) -> CoefficientTerms {
    let BeamFoundationParams {
        sigma,
        gamma,
        kappa,
        h0,
        ..
    } = *params;
    let k2 = kappa * kappa;
    let gap = PI2 - k2;

    let stiffness = PI4
        + sigma
        + 3.0 * gamma * h0 * h0 / (2.0 * kappa * gap)
            * (kappa * gap + PI2 * kappa.sin() * h.second_shifted);
    let quadratic =
        36.0 * PI3 * gamma * h0 / params.quadratic_form.denominator(kappa) * h.first;
    let forcing_linear = -2.0 * PI * sigma * h0 / gap * h.first;
    let forcing_cubic = PI * gamma * h0.powi(3) / (2.0 * (9.0 * k2 * k2 - 10.0 * PI2 * k2 + PI4))
        * (3.0 * (PI2 - 9.0 * k2) * h.first + gap * h.third);

    CoefficientTerms {
        stiffness,
        quadratic,
        forcing_linear,
        forcing_cubic,
    }
}

pub(crate) fn time_terms_unchecked(t: f64, params: &BeamFoundationParams) -> CoefficientTerms {
    let kappa = params.kappa;
    let wt = params.omega * t;
    assemble(
        params,
        Harmonics {
            first: wt.cos() + (kappa - wt).cos(),
            second_shifted: (kappa - 2.0 * wt).cos(),
            third: (3.0 * wt).cos() + (3.0 * (kappa - wt)).cos(),
        },
    )
}

pub(crate) fn slow_terms_unchecked(p: SlowPhase, params: &BeamFoundationParams) -> CoefficientTerms {
    let kappa = params.kappa;
    // n is always supported here, the reductions cannot fail.
    let cos2 = reduce_cos_multiple(p, 2).unwrap_or_default();
    let sin2 = p.sin_multiple(2).unwrap_or_default();
    let cos3 = reduce_cos_multiple(p, 3).unwrap_or_default();
    let shifted3 = reduce_cos_shifted(p, kappa, 3).unwrap_or_default();
    assemble(
        params,
        Harmonics {
            first: phase_factor(p, kappa),
            second_shifted: kappa.cos() * cos2 + kappa.sin() * sin2,
            third: cos3 + shifted3,
        },
    )
}

/// Per-term coefficients at time `t`.
pub fn time_terms(t: f64, params: &BeamFoundationParams) -> Result<CoefficientTerms> {
    params.validate()?;
    Ok(time_terms_unchecked(t, params))
}

/// Time-periodic coefficients evaluated directly in `t`.
pub fn coeffs_time(t: f64, params: &BeamFoundationParams) -> Result<SlowFastCoefficients> {
    Ok(time_terms(t, params)?.combined())
}

/// Per-term coefficients at a slow phase.
pub fn slow_terms(p: SlowPhase, params: &BeamFoundationParams) -> Result<CoefficientTerms> {
    params.validate()?;
    Ok(slow_terms_unchecked(p, params))
}

/// Autonomised coefficients `F(d)`, `J(d)`, `G(d)`.
///
/// Every cosine of the time-domain form is reduced individually, including
/// the third-harmonic pair `cos(3 wt) + cos(3 (kappa - wt))`.
pub fn coeffs_slow(p: SlowPhase, params: &BeamFoundationParams) -> Result<SlowFastCoefficients> {
    Ok(slow_terms(p, params)?.combined())
}

/// `F - J z + G z^2 - (3/4) gamma z^3`.
pub fn restoring_force(z1: f64, c: &SlowFastCoefficients, gamma: f64) -> f64 {
    c.forcing + z1 * (-c.stiffness + z1 * (c.quadratic - 0.75 * gamma * z1))
}

/// Derivative of [`restoring_force`] in `z1`.
pub fn effective_stiffness(z1: f64, c: &SlowFastCoefficients, gamma: f64) -> f64 {
    -c.stiffness + z1 * (2.0 * c.quadratic - 2.25 * gamma * z1)
}

/// Second derivative of [`restoring_force`] in `z1`.
pub fn restoring_curvature(z1: f64, c: &SlowFastCoefficients, gamma: f64) -> f64 {
    2.0 * c.quadratic - 4.5 * gamma * z1
}

/// Whether [`potential`] includes the work of the external forcing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Forcing {
    Excluded,
    Included,
}

/// `J z^2/2 - G z^3/3 + (3/16) gamma z^4`, minus `F z` when the forcing is
/// included. The full potential satisfies `dV/dz = -restoring_force`.
pub fn potential(z1: f64, c: &SlowFastCoefficients, gamma: f64, forcing: Forcing) -> f64 {
    let z2 = z1 * z1;
    let elastic = c.stiffness * z2 / 2.0 - c.quadratic * z2 * z1 / 3.0 + 3.0 / 16.0 * gamma * z2 * z2;
    match forcing {
        Forcing::Excluded => elastic,
        Forcing::Included => elastic - c.forcing * z1,
    }
}

/// Jacobian of the frozen fast subsystem at `z1`.
///
/// The lower-left entry is `d(z2')/d(z1)`, the stiffness function itself, so
/// the characteristic polynomial is `lambda^2 + xi lambda - K(z1)`.
pub fn fast_jacobian(z1: f64, c: &SlowFastCoefficients, gamma: f64, xi: f64) -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, effective_stiffness(z1, c, gamma), -xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn phase_factor_examples() {
        assert!(close(phase_factor(SlowPhase::upper(1.0).unwrap(), 0.0), 2.0, 1e-15));
        assert!(close(phase_factor(SlowPhase::upper(0.0).unwrap(), FRAC_PI_2), 1.0, 1e-15));
        assert!(close(phase_factor(SlowPhase::upper(0.5).unwrap(), PI / 3.0), 1.5, 1e-15));
    }

    #[test]
    fn slow_phase_rejects_out_of_range() {
        assert_eq!(SlowPhase::upper(1.5), Err(Error::SlowDomain(1.5)));
        assert!(SlowPhase::upper(f64::NAN).is_err());
    }

    #[test]
    fn cos_multiple_examples() {
        let one = SlowPhase::upper(1.0).unwrap();
        let half = SlowPhase::upper(0.5).unwrap();
        let zero = SlowPhase::upper(0.0).unwrap();
        assert!(close(reduce_cos_multiple(one, 3).unwrap(), 1.0, 1e-15));
        assert!(close(reduce_cos_multiple(half, 3).unwrap(), -1.0, 1e-15));
        assert!(close(reduce_cos_multiple(zero, 2).unwrap(), -1.0, 1e-15));
        assert_eq!(reduce_cos_multiple(one, 4), Err(Error::UnsupportedHarmonic(4)));
        assert_eq!(reduce_cos_shifted(one, 0.3, 0), Err(Error::UnsupportedHarmonic(0)));
    }

    #[test]
    fn cos_shifted_examples() {
        let one = SlowPhase::upper(1.0).unwrap();
        let kappa = 0.7;
        assert!(close(reduce_cos_shifted(one, kappa, 1).unwrap(), kappa.cos(), 1e-15));
        let half = SlowPhase::upper(0.5).unwrap();
        assert!(close(reduce_cos_shifted(half, PI / 3.0, 3).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn unforced_foundation_is_exact() {
        let params = BeamFoundationParams {
            h0: 0.0,
            ..Default::default()
        };
        for t in [0.0, 1.3, 400.0] {
            let c = coeffs_time(t, &params).unwrap();
            assert_eq!(c.forcing, 0.0);
            assert_eq!(c.quadratic, 0.0);
            assert_eq!(c.stiffness, PI4 + params.sigma);
        }
        for d in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            let c = coeffs_slow(SlowPhase::upper(d).unwrap(), &params).unwrap();
            assert_eq!(c.forcing, 0.0);
            assert_eq!(c.quadratic, 0.0);
            assert_eq!(c.stiffness, PI4 + params.sigma);
        }
    }

    #[test]
    fn stiffness_at_time_zero_matches_hand_evaluation() {
        // J(0) = pi^4 + 120 + 3*150*0.01/(2*(pi^2-1)) * ((pi^2-1) + pi^2 sin(1) cos(1)),
        // evaluated by hand to 220.797383810642.
        let params = BeamFoundationParams::default();
        let c = coeffs_time(0.0, &params).unwrap();
        let gap = PI2 - 1.0;
        let parametric = 4.5 / (2.0 * gap) * (gap + PI2 * 1f64.sin() * 1f64.cos());
        assert!(close(c.stiffness, PI4 + 120.0 + parametric, 1e-12));
        assert!(close(parametric, 3.388292776639533, 1e-12));
        assert!(close(c.stiffness, 220.79738381064195, 1e-10));
    }

    #[test]
    fn periodic_in_slow_period() {
        let params = BeamFoundationParams::default();
        let period = 2.0 * PI / params.omega;
        let a = coeffs_time(37.0, &params).unwrap();
        let b = coeffs_time(37.0 + period, &params).unwrap();
        assert!(close(a.forcing, b.forcing, 1e-10));
        assert!(close(a.stiffness, b.stiffness, 1e-10));
        assert!(close(a.quadratic, b.quadratic, 1e-10));
    }

    #[test]
    fn slow_form_matches_time_form_at_phase_origin_and_generic_phase() {
        let params = BeamFoundationParams::default();
        let at0 = coeffs_slow(SlowPhase::upper(1.0).unwrap(), &params).unwrap();
        let t0 = coeffs_time(0.0, &params).unwrap();
        assert!(close(at0.forcing, t0.forcing, 1e-12));
        assert!(close(at0.stiffness, t0.stiffness, 1e-12));
        assert!(close(at0.quadratic, t0.quadratic, 1e-12));

        let t = 0.3f64.acos() / params.omega;
        let slow = coeffs_slow(SlowPhase::upper(0.3).unwrap(), &params).unwrap();
        let time = coeffs_time(t, &params).unwrap();
        assert!(close(slow.forcing, time.forcing, 1e-9 * time.forcing.abs().max(1.0)));
        assert!(close(slow.stiffness, time.stiffness, 1e-9 * time.stiffness.abs()));
        assert!(close(slow.quadratic, time.quadratic, 1e-9 * time.quadratic.abs().max(1.0)));
    }

    #[test]
    fn singular_wave_numbers_are_rejected() {
        for kappa in [PI / 3.0, PI, PI + 5e-4] {
            let params = BeamFoundationParams {
                kappa,
                ..Default::default()
            };
            assert!(matches!(
                coeffs_time(0.0, &params),
                Err(Error::SingularKappa { .. })
            ));
        }
        let printed = BeamFoundationParams {
            kappa: 3.0 * PI,
            quadratic_form: QuadraticForm::Printed,
            ..Default::default()
        };
        assert!(printed.validate().is_ok());
        let projected = BeamFoundationParams {
            quadratic_form: QuadraticForm::Projected,
            ..printed
        };
        assert!(projected.validate().unwrap_err().is_singular());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let base = BeamFoundationParams::default();
        for bad in [
            BeamFoundationParams { xi: -0.1, ..base },
            BeamFoundationParams { h0: -0.1, ..base },
            BeamFoundationParams { omega: 0.0, ..base },
            BeamFoundationParams { gamma: -1.0, ..base },
            BeamFoundationParams { kappa: 0.0, ..base },
            BeamFoundationParams { sigma: f64::NAN, ..base },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidParameter { .. })));
        }
    }

    #[test]
    fn restoring_force_and_stiffness_examples() {
        let c = SlowFastCoefficients {
            forcing: 0.0,
            stiffness: -3.0,
            quadratic: 0.0,
        };
        assert_eq!(restoring_force(0.0, &SlowFastCoefficients { forcing: 2.5, ..c }, 4.0), 2.5);
        assert!(close(restoring_force(1.0, &c, 4.0), 0.0, 1e-15));
        let z = 1.0 / 3f64.sqrt();
        assert!(close(effective_stiffness(z, &c, 4.0), 0.0, 1e-14));
        assert!(close(effective_stiffness(-z, &c, 4.0), 0.0, 1e-14));
        let j2 = SlowFastCoefficients { stiffness: 2.0, ..c };
        assert_eq!(effective_stiffness(0.0, &j2, 4.0), -2.0);
    }

    #[test]
    fn potential_examples() {
        let c = SlowFastCoefficients {
            forcing: 0.0,
            stiffness: 1.0,
            quadratic: 0.0,
        };
        assert!(close(potential(2.0, &c, 0.0, Forcing::Excluded), 2.0, 1e-15));
        let c = SlowFastCoefficients {
            forcing: 0.4,
            stiffness: -2.0,
            quadratic: 0.0,
        };
        for z in [0.1, 0.7, 1.9] {
            assert_eq!(
                potential(z, &c, 3.0, Forcing::Excluded),
                potential(-z, &c, 3.0, Forcing::Excluded)
            );
        }
    }

    #[test]
    fn jacobian_structure() {
        let c = SlowFastCoefficients {
            forcing: 0.0,
            stiffness: 2.0,
            quadratic: 0.0,
        };
        let a = fast_jacobian(0.0, &c, 1.0, 0.5);
        assert_eq!(a, Matrix2::new(0.0, 1.0, -2.0, -0.5));
    }

    fn coefficients() -> impl Strategy<Value = (SlowFastCoefficients, f64)> {
        (-50.0..50.0f64, -200.0..200.0f64, -50.0..50.0f64, 0.0..200.0f64).prop_map(
            |(forcing, stiffness, quadratic, gamma)| {
                (
                    SlowFastCoefficients {
                        forcing,
                        stiffness,
                        quadratic,
                    },
                    gamma,
                )
            },
        )
    }

    proptest! {
        #[test]
        fn shifted_reduction_is_identity_on_matching_phase(a in 0.0..(2.0 * PI)) {
            let p = SlowPhase::from_angle(a);
            prop_assert!((reduce_cos_shifted(p, a, 1).unwrap() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn stiffness_is_derivative_of_restoring_force(
            (c, gamma) in coefficients(), z in -2.0..2.0f64,
        ) {
            let h = 1e-6;
            let fd = (restoring_force(z + h, &c, gamma) - restoring_force(z - h, &c, gamma)) / (2.0 * h);
            let exact = effective_stiffness(z, &c, gamma);
            let scale = c.stiffness.abs() + 2.0 * (c.quadratic * z).abs() + 2.25 * gamma * z * z + 1.0;
            prop_assert!((fd - exact).abs() <= 1e-6 * scale);
        }

        #[test]
        fn potential_gradient_is_minus_restoring_force(
            (c, gamma) in coefficients(), z in -2.0..2.0f64,
        ) {
            let h = 1e-6;
            let fd = (potential(z + h, &c, gamma, Forcing::Included)
                - potential(z - h, &c, gamma, Forcing::Included)) / (2.0 * h);
            let scale = c.forcing.abs() + (c.stiffness * z).abs() + (c.quadratic * z * z).abs()
                + 0.75 * gamma * (z * z * z).abs() + 1.0;
            prop_assert!((fd + restoring_force(z, &c, gamma)).abs() <= 1e-6 * scale);
        }

        #[test]
        fn jacobian_trace_and_determinant((c, gamma) in coefficients(), z in -2.0..2.0f64, xi in 0.0..1.0f64) {
            let a = fast_jacobian(z, &c, gamma, xi);
            prop_assert_eq!(a.trace(), -xi);
            prop_assert!((a.determinant() + effective_stiffness(z, &c, gamma)).abs() <= 1e-12 * (1.0 + a.determinant().abs()));
        }
    }
}
