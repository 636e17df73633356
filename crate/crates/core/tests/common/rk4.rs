//! Fixed-step classical RK4 for `u'' + (n-1)/r u' + g(u) = 0`, `u(0) = m`,
//! started from a two-term Taylor expansion. Shares no code with the
//! library's adaptive integrator.

/// Radius at which the series hands over to RK4.
const SERIES_RADIUS: f64 = 1e-3;
const ZERO_BISECTIONS: usize = 80;

pub struct Problem<'a> {
    pub n: usize,
    pub g: &'a dyn Fn(f64) -> f64,
    pub dg: &'a dyn Fn(f64) -> f64,
}

impl Problem<'_> {
    fn rhs(&self, r: f64, y: [f64; 2]) -> [f64; 2] {
        [y[1], -(self.n as f64 - 1.0) / r * y[1] - (self.g)(y[0])]
    }

    fn step(&self, r: f64, y: [f64; 2], h: f64) -> [f64; 2] {
        let add = |y: [f64; 2], k: [f64; 2], c: f64| [y[0] + c * k[0], y[1] + c * k[1]];
        let k1 = self.rhs(r, y);
        let k2 = self.rhs(r + h / 2.0, add(y, k1, h / 2.0));
        let k3 = self.rhs(r + h / 2.0, add(y, k2, h / 2.0));
        let k4 = self.rhs(r + h, add(y, k3, h));
        [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }

    /// `u = m + a r^2 + b r^4` with `a = -g(m)/(2n)`, `b = g(m) g'(m) / (8n(n+2))`.
    fn series(&self, m: f64, r: f64) -> [f64; 2] {
        let n = self.n as f64;
        let a = -(self.g)(m) / (2.0 * n);
        let b = (self.g)(m) * (self.dg)(m) / (8.0 * n * (n + 2.0));
        [m + a * r * r + b * r.powi(4), 2.0 * a * r + 4.0 * b * r.powi(3)]
    }

    /// First zero of `u`, or `None` if `u` stays positive up to `r_max`.
    pub fn first_zero(&self, m: f64, h: f64, r_max: f64) -> Option<f64> {
        let mut steps = 0usize;
        let mut r = SERIES_RADIUS;
        let mut y = self.series(m, r);
        while r < r_max {
            let next = self.step(r, y, h);
            if next[0] <= 0.0 {
                // the RK4 step as a function of its length is smooth; bisect it
                let (mut lo, mut hi) = (0.0, h);
                for _ in 0..ZERO_BISECTIONS {
                    let mid = 0.5 * (lo + hi);
                    if self.step(r, y, mid)[0] > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Some(r + 0.5 * (lo + hi));
            }
            if next[0] >= 1.0 || !next.iter().all(|v| v.is_finite()) {
                return None;
            }
            steps += 1;
            r = SERIES_RADIUS + steps as f64 * h;
            y = next;
        }
        None
    }
}

/// `g(u) = a (1 - u)^(-p)` and its derivative.
pub fn power_law(a: f64, p: f64) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
    (move |u: f64| a * (1.0 - u).powf(-p), move |u: f64| a * p * (1.0 - u).powf(-p - 1.0))
}
