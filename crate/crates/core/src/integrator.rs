//! Dormand–Prince 5(4) stepper with Hairer's fourth-order continuous
//! extension.
//!
//! The stepper advances one accepted step at a time and hands back the dense
//! polynomial of that step, so callers own event detection: zero crossings,
//! blow-up guards and forced stops at breakpoints are all handled outside.

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

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const MAX_GROWTH: f64 = 5.0;
const MAX_SHRINK: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest step the controller may take before giving up.
    pub h_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_min: 1e-15,
        }
    }
}

/// Continuous extension of one accepted step, valid for `t` in `[t0, t0 + h]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    /// Per component: `y(theta) = c0 + theta (c1 + (1-theta)(c2 + theta (c3 + (1-theta) c4)))`.
    pub coeffs: [[f64; 5]; N],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> [f64; N] {
        std::array::from_fn(|i| self.coeffs[i][0])
    }

    pub fn end(&self) -> [f64; N] {
        std::array::from_fn(|i| self.coeffs[i][0] + self.coeffs[i][1])
    }

    pub fn component(&self, i: usize, t: f64) -> f64 {
        let theta = (t - self.t0) / self.h;
        let c = &self.coeffs[i];
        let one = 1.0 - theta;
        c[0] + theta * (c[1] + one * (c[2] + theta * (c[3] + one * c[4])))
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        std::array::from_fn(|i| self.component(i, t))
    }

    /// Time derivative of the interpolant for component `i`.
    pub fn component_derivative(&self, i: usize, t: f64) -> f64 {
        let theta = (t - self.t0) / self.h;
        let c = &self.coeffs[i];
        let one = 1.0 - theta;
        let a = c[3] + one * c[4];
        let b = c[2] + theta * a;
        let cc = c[1] + one * b;
        let da = -c[4];
        let db = a + theta * da;
        let dc = -b + one * db;
        (cc + theta * dc) / self.h
    }

    /// Scales every coefficient of component `i` by `factor`.
    pub fn scale_component(&mut self, i: usize, factor: f64) {
        for c in &mut self.coeffs[i] {
            *c *= factor;
        }
    }

    /// Maps the step through `t -> t / scale`.
    pub fn rescale_time(&mut self, scale: f64) {
        self.t0 /= scale;
        self.h /= scale;
    }
}

/// Locates a root of `g` on `[a, b]` by bisection, assuming `g(a)` and `g(b)`
/// have opposite signs (or one of them vanishes).
pub fn bisect_root(mut a: f64, mut b: f64, g: impl Fn(f64) -> f64, iterations: usize) -> f64 {
    let mut ga = g(a);
    if ga == 0.0 {
        return a;
    }
    if g(b) == 0.0 {
        return b;
    }
    for _ in 0..iterations {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

pub struct Stepper<F, const N: usize>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    rhs: F,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    tol: Tolerances,
    accepted: usize,
    rejected: usize,
}

impl<F, const N: usize> Stepper<F, N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(mut rhs: F, t0: f64, y0: [f64; N], tol: Tolerances, h_init: Option<f64>) -> Self {
        let k1 = rhs(t0, &y0);
        let mut stepper = Self {
            rhs,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            tol,
            accepted: 0,
            rejected: 0,
        };
        stepper.h = h_init.unwrap_or_else(|| stepper.initial_step());
        stepper
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> [f64; N] {
        self.y
    }

    pub fn accepted_steps(&self) -> usize {
        self.accepted
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    /// Multiplies the state by `factor`. Only meaningful for linear homogeneous
    /// systems, where it keeps amplitudes in range without changing zeros.
    pub fn rescale_state(&mut self, factor: f64) {
        for i in 0..N {
            self.y[i] *= factor;
            self.k1[i] *= factor;
        }
    }

    fn weight(&self, a: f64, b: f64) -> f64 {
        self.tol.atol + self.tol.rtol * a.abs().max(b.abs())
    }

    fn norm(&self, v: &[f64; N], scale: &[f64; N]) -> f64 {
        let sum: f64 = (0..N)
            .map(|i| {
                let s = v[i] / self.weight(scale[i], scale[i]);
                s * s
            })
            .sum();
        (sum / N as f64).sqrt()
    }

    fn initial_step(&mut self) -> f64 {
        let d0 = self.norm(&self.y, &self.y);
        let d1 = self.norm(&self.k1, &self.y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1: [f64; N] = std::array::from_fn(|i| self.y[i] + h0 * self.k1[i]);
        let f1 = (self.rhs)(self.t + h0, &y1);
        let diff: [f64; N] = std::array::from_fn(|i| f1[i] - self.k1[i]);
        let d2 = self.norm(&diff, &self.y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        let h = (100.0 * h0).min(h1);
        if h.is_finite() && h > 0.0 {
            h
        } else {
            1e-6
        }
    }

    /// Takes one accepted step that does not pass `t_limit` and whose length
    /// does not exceed `h_cap`. A step that ends within rounding of `t_limit`
    /// lands on it exactly.
    pub fn step(&mut self, t_limit: f64, h_cap: f64) -> Result<DenseStep<N>> {
        let mut h_trial = self.h;
        loop {
            let mut h = h_trial.min(h_cap);
            let remaining = t_limit - self.t;
            let landing = h >= remaining - 1e-14 * t_limit.abs().max(1.0);
            if landing {
                h = remaining;
            }
            if !(h >= self.tol.h_min) {
                return Err(Error::StepSizeUnderflow { r: self.t, h });
            }

            let t = self.t;
            let y = self.y;
            let k1 = self.k1;
            let stage = |coef: &[(f64, &[f64; N])]| -> [f64; N] {
                std::array::from_fn(|i| y[i] + h * coef.iter().map(|(c, k)| c * k[i]).sum::<f64>())
            };
            let k2 = (self.rhs)(t + C2 * h, &stage(&[(A21, &k1)]));
            let k3 = (self.rhs)(t + C3 * h, &stage(&[(A31, &k1), (A32, &k2)]));
            let k4 = (self.rhs)(t + C4 * h, &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = (self.rhs)(
                t + C5 * h,
                &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = (self.rhs)(
                t + h,
                &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y1 = stage(&[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let t1 = if landing { t_limit } else { t + h };
            let k7 = (self.rhs)(t1, &y1);

            let err: [f64; N] = std::array::from_fn(|i| {
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            });
            let err_norm = {
                let sum: f64 = (0..N)
                    .map(|i| {
                        let s = err[i] / self.weight(y[i], y1[i]);
                        s * s
                    })
                    .sum();
                (sum / N as f64).sqrt()
            };
            let finite = err_norm.is_finite() && y1.iter().chain(k7.iter()).all(|v| v.is_finite());

            if !finite {
                self.rejected += 1;
                h_trial = 0.25 * h;
                continue;
            }
            if err_norm > 1.0 {
                self.rejected += 1;
                h_trial = h * (SAFETY * err_norm.powf(-0.2)).max(MAX_SHRINK);
                continue;
            }

            let coeffs: [[f64; 5]; N] = std::array::from_fn(|i| {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                [
                    y[i],
                    ydiff,
                    bspl,
                    ydiff - h * k7[i] - bspl,
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]),
                ]
            });

            let growth = if err_norm == 0.0 {
                MAX_GROWTH
            } else {
                (SAFETY * err_norm.powf(-0.2)).clamp(MAX_SHRINK, MAX_GROWTH)
            };
            let mut next = h * growth;
            if landing || h < h_trial {
                // a clipped step says nothing about the natural step length
                next = next.max(h_trial.min(MAX_GROWTH * h_trial));
            }
            self.h = next;
            self.t = t1;
            self.y = y1;
            self.k1 = k7;
            self.accepted += 1;
            return Ok(DenseStep { t0: t, h: t1 - t, coeffs });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay_to_tolerance() {
        let tol = Tolerances::default();
        let mut stepper = Stepper::new(|_t, y: &[f64; 1]| [-y[0]], 0.0, [1.0], tol, None);
        let mut last = None;
        while stepper.t() < 2.0 {
            last = Some(stepper.step(2.0, f64::INFINITY).unwrap());
        }
        assert_eq!(stepper.t(), 2.0);
        assert_relative_eq!(stepper.y()[0], (-2.0f64).exp(), max_relative = 1e-9);
        let dense = last.unwrap();
        let mid = dense.t0 + 0.37 * dense.h;
        assert_relative_eq!(dense.component(0, mid), (-mid).exp(), max_relative = 1e-8);
        assert_relative_eq!(
            dense.component_derivative(0, mid),
            -(-mid).exp(),
            max_relative = 1e-6
        );
    }

    #[test]
    fn dense_output_matches_endpoints() {
        let tol = Tolerances::default();
        let mut stepper = Stepper::new(
            |t, y: &[f64; 2]| [y[1], -y[0] + t.sin()],
            0.0,
            [0.3, -0.1],
            tol,
            None,
        );
        let step = stepper.step(10.0, f64::INFINITY).unwrap();
        assert_eq!(step.component(0, step.t0), 0.3);
        let end = step.end();
        for (i, value) in end.iter().enumerate() {
            assert!((step.component(i, step.t1()) - value).abs() <= 1e-15);
        }
    }

    #[test]
    fn step_cap_and_landing_are_respected() {
        let tol = Tolerances::default();
        let mut stepper = Stepper::new(|_t, _y: &[f64; 1]| [1.0], 0.0, [0.0], tol, Some(1.0));
        let step = stepper.step(10.0, 0.25).unwrap();
        assert!(step.h <= 0.25);
        let mut step = step;
        while stepper.t() < 0.6 {
            step = stepper.step(0.6, f64::INFINITY).unwrap();
        }
        assert_eq!(step.t1(), 0.6);
        assert_relative_eq!(stepper.y()[0], 0.6, max_relative = 1e-14);
    }

    #[test]
    fn non_finite_stages_shrink_the_step() {
        // sqrt(1 - t) turns NaN past t = 1; the controller backs off instead of
        // propagating it.
        let tol = Tolerances::default();
        let mut stepper = Stepper::new(
            |t, _y: &[f64; 1]| [(1.0 - t).sqrt()],
            0.0,
            [0.0],
            tol,
            Some(4.0),
        );
        let step = stepper.step(2.0, f64::INFINITY).unwrap();
        assert!(step.t1() <= 1.0);
        assert!(stepper.rejected_steps() >= 1);
    }

    #[test]
    fn bisection_finds_simple_root() {
        let root = bisect_root(0.0, 2.0, |x| x * x - 2.0, 80);
        assert_relative_eq!(root, 2f64.sqrt(), max_relative = 1e-15);
    }
}
