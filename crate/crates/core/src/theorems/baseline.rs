//! Recorded per-dimension constants `M_n = max λF(m)/u_r(1)^2` over the
//! stable records of the standard sweeps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gelfand::{standard_grid, sweep, SweepOptions};
use crate::nonlinearity::{Nonlinearity, NonlinearitySpec};

const RECORDED: &str = include_str!("../../baselines/sandwich_constants.json");

/// Ratio above the recorded constant that counts as a regression.
pub const REGRESSION_FACTOR: f64 = 1.05;
pub const BASELINE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichBaseline {
    pub version: u32,
    pub grid_points: usize,
    pub families: Vec<String>,
    /// Dimension to `M_n`.
    pub constants: BTreeMap<usize, f64>,
}

impl SandwichBaseline {
    pub fn constant(&self, n: usize) -> Option<f64> {
        self.constants.get(&n).copied()
    }

    /// Largest ratio tolerated before a regression is flagged.
    pub fn regression_limit(&self, n: usize) -> Option<f64> {
        self.constant(n).map(|c| REGRESSION_FACTOR * c)
    }
}

/// The baseline shipped with the crate.
pub fn sandwich_baseline() -> SandwichBaseline {
    serde_json::from_str(RECORDED).expect("shipped sandwich baseline is valid JSON")
}

/// Families swept to build the baseline: MEMS and `p = 1`.
pub fn baseline_families() -> Vec<NonlinearitySpec> {
    vec![
        NonlinearitySpec::mems(),
        NonlinearitySpec::power(1.0, 1.0).expect("valid exponent"),
    ]
}

/// Largest `λF(m)/u_r(1)^2` over the stable records of a standard sweep.
pub fn max_sandwich_ratio(n: usize, f: &dyn Nonlinearity, opts: &SweepOptions) -> Result<f64> {
    let diagram = sweep(n, f, &standard_grid(), opts)?;
    Ok(diagram
        .records
        .iter()
        .filter(|r| r.stable)
        .map(|r| r.f_m / (r.ur1 * r.ur1))
        .fold(0.0, f64::max))
}

/// Recomputes the baseline for `n = 2..=6`.
pub fn measure_sandwich_constants(opts: &SweepOptions) -> Result<SandwichBaseline> {
    let families = baseline_families();
    let mut constants = BTreeMap::new();
    for n in 2..=6 {
        let mut best = 0.0f64;
        for f in &families {
            best = best.max(max_sandwich_ratio(n, f, opts)?);
        }
        constants.insert(n, best);
    }
    Ok(SandwichBaseline {
        version: BASELINE_VERSION,
        grid_points: standard_grid().len(),
        families: families.iter().map(|f| f.label()).collect(),
        constants,
    })
}
