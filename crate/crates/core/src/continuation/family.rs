//! Parametrised cubic restoring forces `r(z) = a0 + a1 z + a2 z^2 + a3 z^3`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{coeffs_slow, BeamFoundationParams, SlowPhase};

const PI2: f64 = PI * PI;
const PI3: f64 = PI2 * PI;
const PI4: f64 = PI2 * PI2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamId {
    /// Slow variable `d = cos(omega t)`; continued internally as the angle
    /// `a = arccos d` on the upper sine branch.
    D,
    Sigma,
    Gamma,
    Kappa,
    H0,
    Xi,
    /// Surrogate forcing `F`.
    Forcing,
    /// Surrogate linear coefficient `J`.
    Linear,
    /// Surrogate quadratic coefficient `G`.
    Quadratic,
}

impl ParamId {
    pub fn name(self) -> &'static str {
        match self {
            ParamId::D => "d",
            ParamId::Sigma => "sigma",
            ParamId::Gamma => "gamma",
            ParamId::Kappa => "kappa",
            ParamId::H0 => "h0",
            ParamId::Xi => "xi",
            ParamId::Forcing => "F",
            ParamId::Linear => "J",
            ParamId::Quadratic => "G",
        }
    }
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "d" => ParamId::D,
            "sigma" => ParamId::Sigma,
            "gamma" => ParamId::Gamma,
            "kappa" => ParamId::Kappa,
            "h0" => ParamId::H0,
            "xi" => ParamId::Xi,
            "F" | "forcing" => ParamId::Forcing,
            "J" | "linear" => ParamId::Linear,
            "G" | "quadratic" => ParamId::Quadratic,
            other => return Err(Error::InvalidInput(format!("unknown parameter `{other}`"))),
        })
    }
}

/// A cubic restoring force depending on named parameters.
///
/// Parameters are read and written in internal coordinates, which coincide
/// with the external ones except where [`CubicFamily::to_internal`] says
/// otherwise.
pub trait CubicFamily: Clone + Send + Sync {
    fn supports(&self, id: ParamId) -> bool;

    fn get(&self, id: ParamId) -> f64;

    fn set(&mut self, id: ParamId, value: f64);

    fn to_internal(&self, _id: ParamId, external: f64) -> f64 {
        external
    }

    fn to_external(&self, _id: ParamId, internal: f64) -> f64 {
        internal
    }

    fn set_external(&mut self, id: ParamId, value: f64) {
        let v = self.to_internal(id, value);
        self.set(id, v);
    }

    fn get_external(&self, id: ParamId) -> f64 {
        self.to_external(id, self.get(id))
    }

    /// `[a0, a1, a2, a3]` at the current parameters.
    fn coefficients(&self) -> [f64; 4];

    /// Gross size of each coefficient: the sum of the magnitudes of the
    /// terms it is assembled from. Residual tolerances are relative to these,
    /// so cancellation inside a coefficient does not make them unreachable.
    fn magnitudes(&self) -> [f64; 4] {
        self.coefficients().map(f64::abs)
    }

    /// Natural magnitudes of `r` and `dr/dz` at `z`.
    fn residual_scales(&self, z: f64) -> [f64; 2] {
        residual_scales(&self.magnitudes(), z)
    }

    /// Derivatives of [`CubicFamily::coefficients`] in the internal
    /// coordinate of `id`.
    fn partials(&self, id: ParamId) -> [f64; 4];

    /// Rejects parameter values at which the family is undefined.
    fn admissible(&self) -> Result<()>;

    /// Coefficients through an evaluation route independent of
    /// [`CubicFamily::coefficients`], used by the grid-scan oracle.
    fn oracle_coefficients(&self) -> Result<[f64; 4]> {
        self.admissible()?;
        Ok(self.coefficients())
    }

    /// First excluded value of `id` met when moving from `from` to `to`
    /// (internal coordinates), if any.
    fn barrier(&self, _id: ParamId, _from: f64, _to: f64) -> Option<f64> {
        None
    }

    fn xi(&self) -> f64 {
        self.get(ParamId::Xi)
    }

    fn name(&self) -> &'static str;
}

/// Restoring force and its first three `z` derivatives from coefficients.
pub fn eval_cubic(a: &[f64; 4], z: f64) -> [f64; 4] {
    [
        a[0] + z * (a[1] + z * (a[2] + z * a[3])),
        a[1] + z * (2.0 * a[2] + 3.0 * a[3] * z),
        2.0 * a[2] + 6.0 * a[3] * z,
        6.0 * a[3],
    ]
}

/// Sums of term magnitudes of `r` and `dr/dz`, used to scale residuals.
pub fn residual_scales(a: &[f64; 4], z: f64) -> [f64; 2] {
    let az = z.abs();
    [
        a[0].abs() + az * (a[1].abs() + az * (a[2].abs() + az * a[3].abs())),
        a[1].abs() + az * (2.0 * a[2].abs() + 3.0 * a[3].abs() * az),
    ]
}

/// The beam model on the upper sine branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamFamily {
    pub params: BeamFoundationParams,
    angle: f64,
    d: f64,
}

impl BeamFamily {
    pub fn new(params: BeamFoundationParams, d: f64) -> Result<Self> {
        params.validate()?;
        if !(d.abs() <= 1.0) {
            return Err(Error::SlowDomain(d));
        }
        Ok(Self {
            params,
            angle: d.acos(),
            d,
        })
    }

    pub fn d(&self) -> f64 {
        self.d
    }
}

impl CubicFamily for BeamFamily {
    fn supports(&self, id: ParamId) -> bool {
        matches!(
            id,
            ParamId::D | ParamId::Sigma | ParamId::Gamma | ParamId::Kappa | ParamId::H0 | ParamId::Xi
        )
    }

    fn get(&self, id: ParamId) -> f64 {
        match id {
            ParamId::D => self.angle,
            ParamId::Sigma => self.params.sigma,
            ParamId::Gamma => self.params.gamma,
            ParamId::Kappa => self.params.kappa,
            ParamId::H0 => self.params.h0,
            ParamId::Xi => self.params.xi,
            _ => f64::NAN,
        }
    }

    fn set(&mut self, id: ParamId, value: f64) {
        match id {
            ParamId::D => {
                self.angle = value;
                self.d = value.cos();
            }
            ParamId::Sigma => self.params.sigma = value,
            ParamId::Gamma => self.params.gamma = value,
            ParamId::Kappa => self.params.kappa = value,
            ParamId::H0 => self.params.h0 = value,
            ParamId::Xi => self.params.xi = value,
            _ => {}
        }
    }

    fn to_internal(&self, id: ParamId, external: f64) -> f64 {
        match id {
            ParamId::D => external.clamp(-1.0, 1.0).acos(),
            _ => external,
        }
    }

    fn to_external(&self, id: ParamId, internal: f64) -> f64 {
        match id {
            ParamId::D => internal.cos(),
            _ => internal,
        }
    }

    fn set_external(&mut self, id: ParamId, value: f64) {
        match id {
            ParamId::D => {
                self.d = value;
                self.angle = value.clamp(-1.0, 1.0).acos();
            }
            _ => self.set(id, value),
        }
    }

    fn coefficients(&self) -> [f64; 4] {
        let h = BeamHarmonics::new(&self.params, self.angle);
        let p = &self.params;
        let (gamma, h0) = (p.gamma, p.h0);
        let stiffness = PI4 + p.sigma + 1.5 * gamma * h0 * h0 * (1.0 + h.p * h.s2);
        let quadratic = 36.0 * PI3 * gamma * h0 * h.c1 / h.dq;
        let forcing_linear = -2.0 * PI * p.sigma * h0 * h.c1 / h.gap;
        let forcing_cubic = PI * gamma * h0.powi(3) / (2.0 * h.dc) * h.nc;
        [forcing_linear + forcing_cubic, -stiffness, quadratic, -0.75 * gamma]
    }

    fn magnitudes(&self) -> [f64; 4] {
        let h = BeamHarmonics::new(&self.params, self.angle);
        let p = &self.params;
        let (gamma, h0, kappa, a) = (p.gamma, p.h0, p.kappa, self.angle);
        let c1 = a.cos().abs() + (kappa - a).cos().abs();
        let c3 = (3.0 * a).cos().abs() + (3.0 * (kappa - a)).cos().abs();
        let nc = 3.0 * (PI2 - 9.0 * kappa * kappa).abs() * c1 + h.gap.abs() * c3;
        [
            2.0 * PI * p.sigma.abs() * h0 * c1 / h.gap.abs() + PI * gamma * h0.powi(3) / (2.0 * h.dc.abs()) * nc,
            PI4 + p.sigma.abs() + 1.5 * gamma * h0 * h0 * (1.0 + (h.p * h.s2).abs()),
            36.0 * PI3 * gamma * h0 * c1 / h.dq.abs(),
            0.75 * gamma,
        ]
    }

    fn partials(&self, id: ParamId) -> [f64; 4] {
        let h = BeamHarmonics::new(&self.params, self.angle);
        let p = &self.params;
        let (sigma, gamma, h0, kappa, a) = (p.sigma, p.gamma, p.h0, p.kappa, self.angle);
        let k2 = kappa * kappa;
        let bc = PI * gamma * h0.powi(3) / (2.0 * h.dc);
        match id {
            ParamId::Sigma => [-2.0 * PI * h0 * h.c1 / h.gap, -1.0, 0.0, 0.0],
            ParamId::Gamma => [
                PI * h0.powi(3) / (2.0 * h.dc) * h.nc,
                -1.5 * h0 * h0 * (1.0 + h.p * h.s2),
                36.0 * PI3 * h0 * h.c1 / h.dq,
                -0.75,
            ],
            ParamId::H0 => [
                -2.0 * PI * sigma * h.c1 / h.gap + 3.0 * PI * gamma * h0 * h0 / (2.0 * h.dc) * h.nc,
                -3.0 * gamma * h0 * (1.0 + h.p * h.s2),
                36.0 * PI3 * gamma * h.c1 / h.dq,
                0.0,
            ],
            ParamId::D => {
                let dc1 = -a.sin() + (kappa - a).sin();
                let ds2 = 2.0 * (kappa - 2.0 * a).sin();
                let dc3 = -3.0 * (3.0 * a).sin() + 3.0 * (3.0 * (kappa - a)).sin();
                let dnc = 3.0 * (PI2 - 9.0 * k2) * dc1 + h.gap * dc3;
                [
                    -2.0 * PI * sigma * h0 * dc1 / h.gap + bc * dnc,
                    -1.5 * gamma * h0 * h0 * h.p * ds2,
                    36.0 * PI3 * gamma * h0 * dc1 / h.dq,
                    0.0,
                ]
            }
            ParamId::Kappa => {
                let dc1 = -(kappa - a).sin();
                let ds2 = -(kappa - 2.0 * a).sin();
                let dc3 = -3.0 * (3.0 * (kappa - a)).sin();
                let kg = kappa * h.gap;
                let dp = PI2 * (kappa.cos() * kg - kappa.sin() * (PI2 - 3.0 * k2)) / (kg * kg);
                let dgap = -2.0 * kappa;
                let ddq = p.quadratic_form.denominator_slope(kappa);
                let ddc = 36.0 * k2 * kappa - 20.0 * PI2 * kappa;
                let dnc = -54.0 * kappa * h.c1 + 3.0 * (PI2 - 9.0 * k2) * dc1 + dgap * h.c3 + h.gap * dc3;
                let dbc = -bc * ddc / h.dc;
                [
                    -2.0 * PI * sigma * h0 * (dc1 / h.gap - h.c1 * dgap / (h.gap * h.gap))
                        + dbc * h.nc
                        + bc * dnc,
                    -1.5 * gamma * h0 * h0 * (dp * h.s2 + h.p * ds2),
                    36.0 * PI3 * gamma * h0 * (dc1 / h.dq - h.c1 * ddq / (h.dq * h.dq)),
                    0.0,
                ]
            }
            _ => [0.0; 4],
        }
    }

    fn admissible(&self) -> Result<()> {
        let p = &self.params;
        if !(self.d.abs() <= 1.0) || !(0.0..=PI).contains(&self.angle) {
            return Err(Error::SlowDomain(self.d));
        }
        let checks = [
            ("gamma", p.gamma, p.gamma >= 0.0),
            ("h0", p.h0, p.h0 >= 0.0),
            ("kappa", p.kappa, p.kappa > 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "outside the valid range",
                });
            }
        }
        if !p.sigma.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: p.sigma,
                reason: "must be finite",
            });
        }
        p.check_kappa(p.kappa)
    }

    fn oracle_coefficients(&self) -> Result<[f64; 4]> {
        self.admissible()?;
        // Damping and frequency do not enter the coefficients; keep them valid
        // so the public evaluator accepts the set.
        let params = BeamFoundationParams {
            xi: self.params.xi.max(0.0),
            ..self.params
        };
        let c = coeffs_slow(SlowPhase::upper(self.d)?, &params)?;
        Ok([c.forcing, -c.stiffness, c.quadratic, -0.75 * params.gamma])
    }

    fn barrier(&self, id: ParamId, from: f64, to: f64) -> Option<f64> {
        if id != ParamId::Kappa {
            return None;
        }
        let r = self.params.kappa_exclusion;
        let (lo, hi) = (from.min(to), from.max(to));
        self.params
            .singular_wave_numbers()
            .iter()
            .filter_map(|&pole| {
                // The edge of the excluded interval facing `from`.
                let edge = if from <= pole { pole - r } else { pole + r };
                (hi >= pole - r && lo <= pole + r).then_some(edge)
            })
            .min_by(|a, b| (a - from).abs().total_cmp(&(b - from).abs()))
    }

    fn name(&self) -> &'static str {
        "beam"
    }
}

/// Harmonic building blocks at phase angle `a` (with `omega t = a`).
struct BeamHarmonics {
    gap: f64,
    dq: f64,
    dc: f64,
    /// `pi^2 sin(kappa) / (kappa (pi^2 - kappa^2))`
    p: f64,
    /// `cos(a) + cos(kappa - a)`
    c1: f64,
    /// `cos(kappa - 2a)`
    s2: f64,
    /// `cos(3a) + cos(3(kappa - a))`
    c3: f64,
    /// `3 (pi^2 - 9 kappa^2) c1 + (pi^2 - kappa^2) c3`
    nc: f64,
}

impl BeamHarmonics {
    fn new(params: &BeamFoundationParams, a: f64) -> Self {
        let kappa = params.kappa;
        let k2 = kappa * kappa;
        let gap = PI2 - k2;
        let c1 = a.cos() + (kappa - a).cos();
        let c3 = (3.0 * a).cos() + (3.0 * (kappa - a)).cos();
        Self {
            gap,
            dq: params.quadratic_form.denominator(kappa),
            dc: 9.0 * k2 * k2 - 10.0 * PI2 * k2 + PI4,
            p: PI2 * kappa.sin() / (kappa * gap),
            c1,
            s2: (kappa - 2.0 * a).cos(),
            c3,
            nc: 3.0 * (PI2 - 9.0 * k2) * c1 + gap * c3,
        }
    }
}

/// A cubic with directly prescribed coefficients:
/// `r(z) = F - J z + G z^2 - (3/4) gamma z^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateCubic {
    pub forcing: f64,
    pub linear: f64,
    pub quadratic: f64,
    pub gamma: f64,
    pub xi: f64,
}

impl SurrogateCubic {
    /// The symmetric double-well family `G = 0`.
    pub fn symmetric(linear: f64, forcing: f64, gamma: f64) -> Self {
        Self {
            forcing,
            linear,
            quadratic: 0.0,
            gamma,
            xi: 0.02,
        }
    }
}

impl CubicFamily for SurrogateCubic {
    fn supports(&self, id: ParamId) -> bool {
        matches!(
            id,
            ParamId::Forcing | ParamId::Linear | ParamId::Quadratic | ParamId::Gamma | ParamId::Xi
        )
    }

    fn get(&self, id: ParamId) -> f64 {
        match id {
            ParamId::Forcing => self.forcing,
            ParamId::Linear => self.linear,
            ParamId::Quadratic => self.quadratic,
            ParamId::Gamma => self.gamma,
            ParamId::Xi => self.xi,
            _ => f64::NAN,
        }
    }

    fn set(&mut self, id: ParamId, value: f64) {
        match id {
            ParamId::Forcing => self.forcing = value,
            ParamId::Linear => self.linear = value,
            ParamId::Quadratic => self.quadratic = value,
            ParamId::Gamma => self.gamma = value,
            ParamId::Xi => self.xi = value,
            _ => {}
        }
    }

    fn coefficients(&self) -> [f64; 4] {
        [self.forcing, -self.linear, self.quadratic, -0.75 * self.gamma]
    }

    fn partials(&self, id: ParamId) -> [f64; 4] {
        match id {
            ParamId::Forcing => [1.0, 0.0, 0.0, 0.0],
            ParamId::Linear => [0.0, -1.0, 0.0, 0.0],
            ParamId::Quadratic => [0.0, 0.0, 1.0, 0.0],
            ParamId::Gamma => [0.0, 0.0, 0.0, -0.75],
            _ => [0.0; 4],
        }
    }

    fn admissible(&self) -> Result<()> {
        let values = [self.forcing, self.linear, self.quadratic, self.gamma, self.xi];
        if values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidInput("non-finite surrogate coefficient".into()))
        }
    }

    fn name(&self) -> &'static str {
        "surrogate"
    }
}
