//! Dormand-Prince 5(4) with PI step-size control and dense output.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output (Hairer & Wanner).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

impl<F, const N: usize> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        self(t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    Adaptive,
    /// Constant step; the error estimate is ignored.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DormandPrince {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// First trial step.
    pub initial_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
    pub control: StepControl,
}

impl Default for DormandPrince {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            initial_step: 5e-3,
            max_step: f64::INFINITY,
            max_steps: 50_000_000,
            control: StepControl::Adaptive,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

struct DenseStep<const N: usize> {
    t0: f64,
    h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    fn at(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let r = &self.r;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        y
    }
}

impl DormandPrince {
    pub fn fixed(step: f64) -> Self {
        Self {
            control: StepControl::Fixed(step),
            initial_step: step,
            ..Self::default()
        }
    }

    fn validate(&self, t0: f64, t_end: f64) -> Result<()> {
        if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidInput(format!(
                "integration span [{t0}, {t_end}] is degenerate"
            )));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if !(self.initial_step > 0.0 && self.max_step > 0.0) {
            return Err(Error::InvalidInput("step sizes must be positive".into()));
        }
        if let StepControl::Fixed(h) = self.control {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidInput("fixed step must be positive".into()));
            }
        }
        Ok(())
    }

    /// Integrates from `t0` to `t_end`.
    ///
    /// With `stride = Some(dt)` the solution is sampled by dense output at
    /// `t0 + k dt` plus `t_end`; otherwise every accepted step is returned.
    pub fn integrate<S, const N: usize>(
        &self,
        system: &S,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        stride: Option<f64>,
    ) -> Result<Solution<N>>
    where
        S: OdeSystem<N> + ?Sized,
    {
        self.validate(t0, t_end)?;
        if let Some(dt) = stride {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidInput("sampling stride must be positive".into()));
            }
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(t0));
        }

        let mut sol = Solution {
            t: vec![t0],
            y: vec![y0],
            accepted: 0,
            rejected: 0,
            evaluations: 1,
        };
        let mut next_sample = 1usize;

        let mut t = t0;
        let mut y = y0;
        let mut k1 = system.rhs(t, &y);
        let span = t_end - t0;
        let mut h = match self.control {
            StepControl::Fixed(step) => step,
            StepControl::Adaptive => self.initial_step,
        }
        .min(self.max_step)
        .min(span);
        let mut err_old: f64 = 1e-4;
        let mut last_rejected = false;

        while t < t_end {
            if sol.accepted + sol.rejected >= self.max_steps {
                return Err(Error::StepLimit(self.max_steps));
            }
            let mut last = false;
            if t + h >= t_end || (t_end - (t + h)) <= 1e-12 * span {
                h = t_end - t;
                last = true;
            }
            if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(Error::StepUnderflow {
                    t,
                    step: h,
                    state: y.to_vec(),
                });
            }

            let k2 = system.rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = system.rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = system.rhs(
                t + C4 * h,
                &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = system.rhs(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = system.rhs(
                t + h,
                &axpy(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = axpy(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = system.rhs(t + h, &y_new);
            sol.evaluations += 6;

            let err = match self.control {
                StepControl::Fixed(_) => 0.0,
                StepControl::Adaptive => {
                    let e = axpy(
                        &[0.0; N],
                        h,
                        &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
                    );
                    let mut acc = 0.0;
                    for i in 0..N {
                        let sc = self.abs_tol + self.rel_tol * y[i].abs().max(y_new[i].abs());
                        acc += (e[i] / sc).powi(2);
                    }
                    (acc / N as f64).sqrt()
                }
            };
            let finite = err.is_finite() && y_new.iter().all(|v| v.is_finite());

            if finite && err <= 1.0 {
                let dense = DenseStep {
                    t0: t,
                    h,
                    r: dense_coefficients(&y, &y_new, h, [&k1, &k3, &k4, &k5, &k6, &k7]),
                };
                let t_new = if last { t_end } else { t + h };
                match stride {
                    Some(dt) => {
                        loop {
                            let ts = t0 + next_sample as f64 * dt;
                            if ts > t_new || ts >= t_end - 1e-12 * span {
                                break;
                            }
                            sol.t.push(ts);
                            sol.y.push(dense.at(ts));
                            next_sample += 1;
                        }
                        if last {
                            sol.t.push(t_end);
                            sol.y.push(y_new);
                        }
                    }
                    None => {
                        sol.t.push(t_new);
                        sol.y.push(y_new);
                    }
                }

                sol.accepted += 1;
                t = t_new;
                y = y_new;
                k1 = k7;

                if let StepControl::Adaptive = self.control {
                    let e = err.max(1e-10);
                    let mut factor = e.powf(0.2 - 0.75 * BETA) * err_old.powf(-BETA) / SAFETY;
                    factor = factor.clamp(1.0 / MAX_FACTOR, 1.0 / MIN_FACTOR);
                    let mut h_new = h / factor;
                    if last_rejected {
                        h_new = h_new.min(h);
                    }
                    err_old = err.max(1e-4);
                    h = h_new.min(self.max_step);
                    last_rejected = false;
                }
            } else {
                if let StepControl::Fixed(_) = self.control {
                    return Err(Error::NonFinite(t + h));
                }
                sol.rejected += 1;
                let factor = if finite {
                    (err.powf(0.2 - 0.75 * BETA) / SAFETY).min(1.0 / MIN_FACTOR)
                } else {
                    1.0 / MIN_FACTOR
                };
                h /= factor.max(1.0);
                last_rejected = true;
            }
        }
        Ok(sol)
    }
}

fn dense_coefficients<const N: usize>(
    y0: &[f64; N],
    y1: &[f64; N],
    h: f64,
    k: [&[f64; N]; 6],
) -> [[f64; N]; 5] {
    let [k1, k3, k4, k5, k6, k7] = k;
    let mut r = [[0.0; N]; 5];
    for i in 0..N {
        let diff = y1[i] - y0[i];
        let bspl = h * k1[i] - diff;
        r[0][i] = y0[i];
        r[1][i] = diff;
        r[2][i] = bspl;
        r[3][i] = diff - h * k7[i] - bspl;
        r[4][i] = h
            * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn harmonic(_t: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    #[test]
    fn harmonic_period_returns_to_start() {
        let solver = DormandPrince {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            ..Default::default()
        };
        let sol = solver.integrate(&harmonic, 0.0, [1.0, 0.0], 2.0 * PI, None).unwrap();
        let end = sol.y.last().unwrap();
        assert!((end[0] - 1.0).abs() < 1e-7 && end[1].abs() < 1e-7, "{end:?}");
        assert_eq!(*sol.t.last().unwrap(), 2.0 * PI);
    }

    #[test]
    fn dense_samples_track_exact_solution() {
        let solver = DormandPrince {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            ..Default::default()
        };
        let sol = solver.integrate(&harmonic, 0.0, [1.0, 0.0], 10.0, Some(0.01)).unwrap();
        assert_eq!(sol.t.len(), 1001);
        assert!(sol.t.windows(2).all(|w| w[1] > w[0]));
        for (t, y) in sol.t.iter().zip(&sol.y) {
            assert!((y[0] - t.cos()).abs() < 1e-8, "t = {t}");
            assert!((y[1] + t.sin()).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn damped_envelope_decays_exponentially() {
        let xi = 0.1;
        let system = |_t: f64, y: &[f64; 2]| [y[1], -xi * y[1] - y[0]];
        let solver = DormandPrince {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            ..Default::default()
        };
        let t_end = 30.0;
        let sol = solver.integrate(&system, 0.0, [1.0, 0.0], t_end, None).unwrap();
        let y = sol.y.last().unwrap();
        let wd = (1.0 - xi * xi / 4.0).sqrt();
        let decay = (-xi * t_end / 2.0).exp();
        let exact = decay * ((wd * t_end).cos() + xi / (2.0 * wd) * (wd * t_end).sin());
        assert!((y[0] - exact).abs() <= 1e-4 * decay);
        // Energy-like envelope: z^2 + (z' + xi z / 2)^2 / wd^2 decays as exp(-xi t).
        let env = (y[0].powi(2) + ((y[1] + xi * y[0] / 2.0) / wd).powi(2)).sqrt();
        let env0 = (1.0 + (xi / 2.0 / wd).powi(2)).sqrt();
        assert!((env / env0 - decay).abs() <= 1e-4 * decay);
    }

    #[test]
    fn rejects_degenerate_spans_and_tolerances() {
        let solver = DormandPrince::default();
        assert!(solver.integrate(&harmonic, 1.0, [1.0, 0.0], 1.0, None).is_err());
        let bad = DormandPrince {
            abs_tol: 0.0,
            ..solver
        };
        assert!(bad.integrate(&harmonic, 0.0, [1.0, 0.0], 1.0, None).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y^2 from y(0) = 1 blows up at t = 1.
        let system = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let err = DormandPrince::default()
            .integrate(&system, 0.0, [1.0], 2.0, None)
            .unwrap_err();
        assert!(matches!(err, Error::StepUnderflow { .. } | Error::StepLimit(_)), "{err:?}");
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let solver = DormandPrince::default();
        let a = solver.integrate(&harmonic, 0.0, [0.3, 0.1], 50.0, Some(0.1)).unwrap();
        let b = solver.integrate(&harmonic, 0.0, [0.3, 0.1], 50.0, Some(0.1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fixed_step_shows_fifth_order() {
        let errors: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| {
                let sol = DormandPrince::fixed(h)
                    .integrate(&harmonic, 0.0, [1.0, 0.0], 2.0 * PI, None)
                    .unwrap();
                let y = sol.y.last().unwrap();
                ((y[0] - 1.0).powi(2) + y[1].powi(2)).sqrt()
            })
            .collect();
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((4.5..=5.5).contains(&order), "order {order}, errors {errors:?}");
        }
    }
}
