//! Real roots of polynomials up to degree three.
//!
//! Closed form (Cardano for one real root, the trigonometric form for three)
//! followed by a Newton polish on the original, unnormalised polynomial.

use std::f64::consts::PI;

/// Relative discriminant threshold below which a double root is reported.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: f64,
    pub multiplicity: u8,
}

impl Root {
    fn simple(value: f64) -> Self {
        Self {
            value,
            multiplicity: 1,
        }
    }
}

/// `c[0] + c[1] x + c[2] x^2 + c[3] x^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic(pub [f64; 4]);

impl Cubic {
    pub fn eval(&self, x: f64) -> f64 {
        let c = &self.0;
        c[0] + x * (c[1] + x * (c[2] + x * c[3]))
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let c = &self.0;
        c[1] + x * (2.0 * c[2] + x * 3.0 * c[3])
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        2.0 * self.0[2] + 6.0 * self.0[3] * x
    }

    /// Sum of the magnitudes of the individual terms at `x`; the natural
    /// scale for residuals.
    pub fn magnitude(&self, x: f64) -> f64 {
        let c = &self.0;
        let ax = x.abs();
        c[0].abs() + ax * (c[1].abs() + ax * (c[2].abs() + ax * c[3].abs()))
    }

    /// All real roots in ascending order, with multiplicities.
    ///
    /// An identically zero polynomial has no isolated roots and yields an
    /// empty list.
    pub fn roots(&self) -> Vec<Root> {
        let [c0, c1, c2, c3] = self.0;
        let mut roots = if c3 != 0.0 {
            depressed_roots(c2 / c3, c1 / c3, c0 / c3)
        } else if c2 != 0.0 {
            quadratic_roots(c2, c1, c0)
        } else if c1 != 0.0 {
            vec![Root::simple(-c0 / c1)]
        } else {
            Vec::new()
        };
        for root in &mut roots {
            root.value = self.polish(*root);
        }
        roots.sort_by(|a, b| a.value.total_cmp(&b.value));
        roots
    }

    fn polish(&self, root: Root) -> f64 {
        // A multiple root is a simple root of the derivative.
        let multiple = root.multiplicity > 1;
        let f = |x| if multiple { self.derivative(x) } else { self.eval(x) };
        let df = |x| {
            if multiple {
                self.second_derivative(x)
            } else {
                self.derivative(x)
            }
        };
        let mut x = root.value;
        let mut fx = f(x);
        for _ in 0..4 {
            let slope = df(x);
            if slope == 0.0 || fx == 0.0 {
                break;
            }
            let next = x - fx / slope;
            let fnext = f(next);
            if !(fnext.abs() < fx.abs()) {
                break;
            }
            x = next;
            fx = fnext;
        }
        x
    }
}

/// Roots of `x^3 + b x^2 + c x + d`.
fn depressed_roots(b: f64, c: f64, d: f64) -> Vec<Root> {
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;

    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let scale = half_q * half_q + third_p.abs().powi(3);

    if disc.abs() <= DEGENERACY_TOL * scale || scale == 0.0 {
        let p_scale = c.abs().max(b * b / 3.0);
        if p.abs() <= f64::EPSILON * p_scale || p == 0.0 {
            return vec![Root {
                value: -shift,
                multiplicity: 3,
            }];
        }
        let single = 3.0 * q / p - shift;
        let double = -3.0 * q / (2.0 * p) - shift;
        let mut roots = vec![
            Root::simple(single),
            Root {
                value: double,
                multiplicity: 2,
            },
        ];
        roots.sort_by(|a, b| a.value.total_cmp(&b.value));
        return roots;
    }

    if disc > 0.0 {
        let s = disc.sqrt();
        let u = (-half_q - half_q.signum() * s).cbrt();
        let y = if u != 0.0 { u - third_p / u } else { 0.0 };
        vec![Root::simple(y - shift)]
    } else {
        let r = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| Root::simple(r * (phi - 2.0 * PI * k as f64 / 3.0).cos() - shift))
            .collect()
    }
}

/// Roots of `a x^2 + b x + c` with `a != 0`.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<Root> {
    let disc = b * b - 4.0 * a * c;
    let scale = b * b + (4.0 * a * c).abs();
    if disc.abs() <= DEGENERACY_TOL * scale {
        return vec![Root {
            value: -b / (2.0 * a),
            multiplicity: 2,
        }];
    }
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut roots = if q == 0.0 {
        vec![Root::simple(0.0), Root::simple(0.0)]
    } else {
        vec![Root::simple(q / a), Root::simple(c / q)]
    };
    roots.sort_by(|a, b| a.value.total_cmp(&b.value));
    roots
}
