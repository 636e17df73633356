use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::DenseStep;

/// One sample `(r, u, u_r)` of a radial function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub r: f64,
    pub u: f64,
    pub ur: f64,
}

/// Behaviour at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Center {
    /// `u(0) = m`, `u_r(0) = 0` and `u ~ m - rhs r^2/(2n)` for `r <= series_radius`,
    /// where `rhs` is the effective right-hand side at the center.
    Regular { m: f64, rhs: f64, series_radius: f64 },
    /// `u(0+) = 1`; the profile is only known on `(0, r_end]`.
    Singular,
}

/// Common sampling interface shared by solved profiles and closed forms.
pub trait RadialFunction {
    fn dim(&self) -> usize;

    /// `(u, u_r)` at radius `r`.
    fn eval(&self, r: f64) -> Result<(f64, f64)>;

    fn second_derivative(&self, r: f64) -> Result<f64>;

    /// `(r_lo, r_end)`: the interval where nodes live. Closed forms report
    /// `r_lo = 0`.
    fn range(&self) -> (f64, f64);

    fn nodes(&self) -> Cow<'_, [Node]>;

    fn center(&self) -> Center;

    /// Radii where the interpolant may lose smoothness; quadrature panels
    /// never straddle them.
    fn breakpoints(&self) -> Vec<f64> {
        self.nodes().iter().map(|n| n.r).collect()
    }

    /// `lambda` when the function lives on the unit ball for `-Δu = λ f(u)`.
    fn lambda(&self) -> Option<f64> {
        None
    }

    /// `u_r(r_end)`.
    fn boundary_slope(&self) -> Result<f64> {
        self.eval(self.range().1).map(|(_, ur)| ur)
    }
}

/// A solution of the radial equation produced by the shooting integrator.
///
/// Between consecutive nodes the profile is the Dormand–Prince continuous
/// extension of the accepted step; below the first node it is the
/// center series.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    n: usize,
    m: f64,
    center_rhs: f64,
    series_radius: f64,
    nodes: Vec<Node>,
    segments: Vec<DenseStep<2>>,
    lambda: Option<f64>,
}

impl RadialProfile {
    pub(crate) fn new(
        n: usize,
        m: f64,
        center_rhs: f64,
        series_radius: f64,
        nodes: Vec<Node>,
        segments: Vec<DenseStep<2>>,
    ) -> Self {
        debug_assert_eq!(segments.len() + 1, nodes.len());
        Self {
            n,
            m,
            center_rhs,
            series_radius,
            nodes,
            segments,
            lambda: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Value at the center.
    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn node_list(&self) -> &[Node] {
        &self.nodes
    }

    pub fn segments(&self) -> &[DenseStep<2>] {
        &self.segments
    }

    pub fn r0(&self) -> f64 {
        self.nodes[0].r
    }

    pub fn r_end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].r
    }

    /// Effective right-hand side `λ g(m)` at the center, in this profile's own
    /// radial coordinate.
    pub fn center_rhs(&self) -> f64 {
        self.center_rhs
    }

    pub fn lambda_value(&self) -> Option<f64> {
        self.lambda
    }

    /// Index of the segment containing `r`; `r` must lie in `[r0, r_end]`.
    pub fn segment_index(&self, r: f64) -> usize {
        let idx = self.nodes.partition_point(|node| node.r <= r);
        idx.saturating_sub(1).min(self.segments.len().saturating_sub(1))
    }

    fn series(&self, r: f64) -> (f64, f64) {
        let n = self.n as f64;
        (
            self.m - self.center_rhs * r * r / (2.0 * n),
            -self.center_rhs * r / n,
        )
    }

    fn check_range(&self, r: f64) -> Result<()> {
        let hi = self.r_end();
        if !(r >= 0.0 && r <= hi * (1.0 + 1e-14)) {
            return Err(Error::OutOfRange { r, lo: 0.0, hi });
        }
        Ok(())
    }

    /// Dense-output evaluation of `(u, u_r)`; below the first node the center
    /// series is used.
    pub fn eval_profile(&self, r: f64) -> Result<(f64, f64)> {
        self.check_range(r)?;
        if r < self.r0() || self.segments.is_empty() {
            return Ok(self.series(r));
        }
        let seg = &self.segments[self.segment_index(r)];
        Ok((seg.component(0, r), seg.component(1, r)))
    }

    /// `u` alone, looked up in segment `idx` (no range checks).
    pub fn u_in_segment(&self, idx: usize, r: f64) -> f64 {
        if r < self.r0() || self.segments.is_empty() {
            return self.series(r).0;
        }
        self.segments[idx].component(0, r)
    }

    /// Maps a free-shooting profile on `[0, R]` to the unit ball:
    /// `u(r) = v(R r)`, `u_r(r) = R v_r(R r)`, `λ = R^2`.
    pub fn rescaled_to_unit_ball(&self) -> RadialProfile {
        let radius = self.r_end();
        let mut nodes: Vec<Node> = self
            .nodes
            .iter()
            .map(|node| Node {
                r: node.r / radius,
                u: node.u,
                ur: node.ur * radius,
            })
            .collect();
        if let Some(last) = nodes.last_mut() {
            last.r = 1.0;
        }
        let segments = self
            .segments
            .iter()
            .map(|seg| {
                let mut seg = *seg;
                seg.rescale_time(radius);
                seg.scale_component(1, radius);
                seg
            })
            .collect();
        RadialProfile {
            n: self.n,
            m: self.m,
            center_rhs: self.center_rhs * radius * radius,
            series_radius: self.series_radius / radius,
            nodes,
            segments,
            lambda: Some(radius * radius),
        }
    }

    /// Checks the structural invariants every solved profile must satisfy:
    /// `0 <= u <= 1`, `u` strictly decreasing, `u_r < 0` and
    /// `r^(n-1) u_r` nonincreasing up to `slack` (relative).
    pub fn check_invariants(&self, slack: f64) -> std::result::Result<(), String> {
        let n = self.n as i32;
        for (i, node) in self.nodes.iter().enumerate() {
            if !(node.u >= -1e-10 && node.u <= 1.0) {
                return Err(format!("node {i}: u = {} outside [0, 1]", node.u));
            }
            if !(node.ur < 0.0) {
                return Err(format!("node {i}: u_r = {} is not negative", node.ur));
            }
        }
        for (i, w) in self.nodes.windows(2).enumerate() {
            if !(w[1].u < w[0].u) {
                return Err(format!("nodes {i}->{}: u not strictly decreasing", i + 1));
            }
            let a = w[0].r.powi(n - 1) * w[0].ur;
            let b = w[1].r.powi(n - 1) * w[1].ur;
            if b - a > slack * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
                return Err(format!("nodes {i}->{}: flux r^(n-1) u_r increased", i + 1));
            }
        }
        Ok(())
    }
}

impl RadialFunction for RadialProfile {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, r: f64) -> Result<(f64, f64)> {
        self.eval_profile(r)
    }

    fn second_derivative(&self, r: f64) -> Result<f64> {
        self.check_range(r)?;
        if r < self.r0() || self.segments.is_empty() {
            return Ok(-self.center_rhs / self.n as f64);
        }
        Ok(self.segments[self.segment_index(r)].component_derivative(1, r))
    }

    fn range(&self) -> (f64, f64) {
        (self.r0(), self.r_end())
    }

    fn nodes(&self) -> Cow<'_, [Node]> {
        Cow::Borrowed(&self.nodes)
    }

    fn center(&self) -> Center {
        Center::Regular {
            m: self.m,
            rhs: self.center_rhs,
            series_radius: self.series_radius,
        }
    }

    fn lambda(&self) -> Option<f64> {
        self.lambda
    }
}

/// A profile known only through its nodes, e.g. one read back from CSV.
///
/// `u` is the cubic Hermite interpolant of `(u, u_r)`; `u_r` is piecewise
/// linear. The center is inferred from the first node as a regular center.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeProfile {
    n: usize,
    nodes: Vec<Node>,
    lambda: Option<f64>,
}

impl NodeProfile {
    pub fn new(n: usize, nodes: Vec<Node>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid("a node profile needs at least two nodes".into()));
        }
        if nodes.windows(2).any(|w| !(w[1].r > w[0].r)) || !(nodes[0].r > 0.0) {
            return Err(Error::InvalidGrid("node radii must be positive and strictly increasing".into()));
        }
        Ok(Self {
            n,
            nodes,
            lambda: None,
        })
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    fn locate(&self, r: f64) -> Result<usize> {
        let (lo, hi) = (self.nodes[0].r, self.nodes[self.nodes.len() - 1].r);
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfRange { r, lo, hi });
        }
        let idx = self.nodes.partition_point(|node| node.r <= r);
        Ok(idx.saturating_sub(1).min(self.nodes.len() - 2))
    }
}

impl RadialFunction for NodeProfile {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let i = self.locate(r)?;
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let h = b.r - a.r;
        let s = (r - a.r) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let u = h00 * a.u + h10 * h * a.ur + h01 * b.u + h11 * h * b.ur;
        Ok((u, a.ur + s * (b.ur - a.ur)))
    }

    fn second_derivative(&self, r: f64) -> Result<f64> {
        let i = self.locate(r)?;
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        Ok((b.ur - a.ur) / (b.r - a.r))
    }

    fn range(&self) -> (f64, f64) {
        (self.nodes[0].r, self.nodes[self.nodes.len() - 1].r)
    }

    fn nodes(&self) -> Cow<'_, [Node]> {
        Cow::Borrowed(&self.nodes)
    }

    fn center(&self) -> Center {
        let first = self.nodes[0];
        let n = self.n as f64;
        let rhs = -n * first.ur / first.r;
        Center::Regular {
            m: first.u + rhs * first.r * first.r / (2.0 * n),
            rhs,
            series_radius: first.r,
        }
    }

    fn lambda(&self) -> Option<f64> {
        self.lambda
    }
}
