//! Adaptive Gauss–Kronrod (7, 15) quadrature and a dyadic-shell driver for
//! integrals with a possibly divergent endpoint at the origin.

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_DEPTH: u32 = 48;

/// Value and absolute error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut gauss = fc * WG[3];
    let mut kron = fc * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kron += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

fn adapt<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: (f64, f64),
    abs_tol: f64,
    rel_tol: f64,
    depth: u32,
) -> Estimate {
    let (value, error) = whole;
    if error <= abs_tol.max(rel_tol * value.abs()) || depth >= MAX_DEPTH || !error.is_finite() {
        return Estimate { value, error };
    }
    let mid = 0.5 * (a + b);
    if mid <= a || mid >= b {
        return Estimate { value, error };
    }
    let left = kronrod(f, a, mid);
    let right = kronrod(f, mid, b);
    let l = adapt(f, a, mid, left, 0.5 * abs_tol, rel_tol, depth + 1);
    let r = adapt(f, mid, b, right, 0.5 * abs_tol, rel_tol, depth + 1);
    Estimate {
        value: l.value + r.value,
        error: l.error + r.error,
    }
}

/// Integrates `f` over `[a, b]` to `max(abs_tol, rel_tol |I|)` by recursive
/// bisection of the Gauss–Kronrod rule.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Estimate {
    if a == b {
        return Estimate {
            value: 0.0,
            error: 0.0,
        };
    }
    let whole = kronrod(&mut f, a, b);
    adapt(&mut f, a, b, whole, abs_tol, rel_tol, 0)
}

/// Integrates over consecutive panels `[x_i, x_{i+1}]` of a sorted breakpoint list.
pub fn integrate_panels<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> Estimate {
    let panels = breaks.len().saturating_sub(1).max(1) as f64;
    breaks.windows(2).fold(
        Estimate {
            value: 0.0,
            error: 0.0,
        },
        |acc, w| {
            let e = integrate(&mut f, w[0], w[1], abs_tol / panels, rel_tol);
            Estimate {
                value: acc.value + e.value,
                error: acc.error + e.error,
            }
        },
    )
}

/// Outcome of summing a series of dyadic shell contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShellSum {
    /// Sum including a geometric estimate of the unresolved tail.
    Convergent { value: f64, tail: f64 },
    /// The shell contributions stop decaying: the Cauchy criterion fails.
    Divergent { partial: f64 },
}

/// Ratio above which shell contributions are treated as non-decaying.
pub const DIVERGENCE_RATIO: f64 = 1.0 - 1e-8;

/// Sums nonnegative shell contributions `s_0, s_1, ...` (outermost first).
///
/// The tail beyond the last shell is extrapolated from the ratio of the last
/// two contributions. A ratio at or above [`DIVERGENCE_RATIO`] marks the
/// series as divergent.
pub fn sum_shells(shells: &[f64]) -> ShellSum {
    let partial: f64 = shells.iter().sum();
    let k = shells.len();
    if k < 2 {
        return ShellSum::Convergent {
            value: partial,
            tail: 0.0,
        };
    }
    let last = shells[k - 1];
    let prev = shells[k - 2];
    if last == 0.0 {
        return ShellSum::Convergent {
            value: partial,
            tail: 0.0,
        };
    }
    let ratio = last / prev;
    if !(ratio < DIVERGENCE_RATIO) {
        return ShellSum::Divergent { partial };
    }
    let tail = last * ratio / (1.0 - ratio);
    ShellSum::Convergent {
        value: partial + tail,
        tail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(|x| x.powi(6) - 3.0 * x, 0.0, 2.0, 1e-14, 0.0);
        assert_relative_eq!(e.value, 128.0 / 7.0 - 6.0, max_relative = 1e-14);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // int_0^1 x^{-1/2} dx = 2
        let e = integrate(|x| x.powf(-0.5), 0.0, 1.0, 1e-10, 1e-12);
        assert_relative_eq!(e.value, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn panels_add_up() {
        let e = integrate_panels(|x| x.cos(), &[0.0, 0.3, 1.1, 2.0], 1e-13, 0.0);
        assert_relative_eq!(e.value, 2f64.sin(), max_relative = 1e-13);
    }

    #[test]
    fn shell_sums() {
        let constant = vec![std::f64::consts::LN_2; 60];
        assert!(matches!(sum_shells(&constant), ShellSum::Divergent { .. }));
        let geometric: Vec<f64> = (0..30).map(|k| 0.5f64.powi(k)).collect();
        match sum_shells(&geometric) {
            ShellSum::Convergent { value, .. } => assert_relative_eq!(value, 2.0, max_relative = 1e-14),
            other => panic!("unexpected {other:?}"),
        }
    }
}
