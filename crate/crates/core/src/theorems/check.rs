use serde::{Deserialize, Serialize};

/// How `margin` and `pass` derive from `lhs`, `rhs` and `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `lhs <= rhs`: margin `rhs - lhs`, pass iff `margin >= -tolerance`.
    Le,
    /// `lhs = rhs`: margin `|lhs - rhs| / |lhs|`, pass iff `margin <= tolerance`.
    /// Two infinities of the same sign agree with margin 0.
    RelEq,
    /// `lhs` finite: margin 0 when finite, `-inf` otherwise.
    Finite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// The statement being checked, in words.
    pub citation: String,
    pub n: usize,
    pub params: String,
    pub kind: CheckKind,
    #[serde(with = "crate::io::lenient_float")]
    pub lhs: f64,
    #[serde(with = "crate::io::lenient_float")]
    pub rhs: f64,
    #[serde(with = "crate::io::lenient_float")]
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: CheckKind,
        name: &str,
        citation: &str,
        n: usize,
        params: impl Into<String>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> Self {
        let margin = margin_of(kind, lhs, rhs);
        let mut check = Self {
            name: name.to_string(),
            citation: citation.to_string(),
            n,
            params: params.into(),
            kind,
            lhs,
            rhs,
            margin,
            tolerance,
            pass: false,
        };
        check.pass = check.recomputed_pass();
        check
    }

    pub fn le(name: &str, citation: &str, n: usize, params: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::new(CheckKind::Le, name, citation, n, params, lhs, rhs, tol)
    }

    pub fn rel_eq(name: &str, citation: &str, n: usize, params: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::new(CheckKind::RelEq, name, citation, n, params, lhs, rhs, tol)
    }

    pub fn finite(name: &str, citation: &str, n: usize, params: impl Into<String>, value: f64) -> Self {
        Self::new(CheckKind::Finite, name, citation, n, params, value, f64::INFINITY, 0.0)
    }

    /// `pass` recomputed from the stored fields.
    pub fn recomputed_pass(&self) -> bool {
        let margin = margin_of(self.kind, self.lhs, self.rhs);
        let same = margin == self.margin || (margin.is_nan() && self.margin.is_nan());
        same && match self.kind {
            CheckKind::Le | CheckKind::Finite => margin >= -self.tolerance,
            CheckKind::RelEq => margin <= self.tolerance,
        }
    }
}

fn margin_of(kind: CheckKind, lhs: f64, rhs: f64) -> f64 {
    match kind {
        CheckKind::Le => {
            if lhs.is_nan() || rhs.is_nan() {
                f64::NAN
            } else if lhs == rhs {
                0.0
            } else {
                rhs - lhs
            }
        }
        CheckKind::RelEq => {
            if lhs == rhs {
                0.0
            } else if lhs.is_finite() && rhs.is_finite() {
                (lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE)
            } else {
                f64::INFINITY
            }
        }
        CheckKind::Finite => {
            if lhs.is_finite() {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_and_pass_flags() {
        let c = CheckResult::le("x", "", 2, "", 1.0, 2.0, 0.0);
        assert_eq!((c.margin, c.pass), (1.0, true));
        let c = CheckResult::le("x", "", 2, "", 2.0 + 1e-10, 2.0, 1e-9);
        assert!(c.pass);
        let c = CheckResult::le("x", "", 2, "", f64::INFINITY, f64::INFINITY, 0.0);
        assert!(c.pass);
        let c = CheckResult::rel_eq("x", "", 2, "", f64::INFINITY, f64::INFINITY, 1e-6);
        assert!(c.pass);
        let c = CheckResult::rel_eq("x", "", 2, "", f64::INFINITY, 3.0, 1e-6);
        assert!(!c.pass);
        let c = CheckResult::finite("x", "", 2, "", f64::NAN);
        assert!(!c.pass);
        assert!(c.recomputed_pass() == c.pass);
    }

    #[test]
    fn non_finite_fields_serialize_as_text() {
        let c = CheckResult::rel_eq("x", "", 7, "", f64::INFINITY, f64::INFINITY, 1e-6);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains(r#""lhs":"inf""#), "{json}");
        let back: CheckResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }
}
