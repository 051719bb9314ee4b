//! Terminal payoff functions φ.
//!
//! Both shapes vanish on `[0, r_cap]`, are positive above it, and are convex
//! and non-decreasing on `[0, ∞)`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffKind {
    /// `max(x − r_cap, 0)`
    #[default]
    Hinge,
    /// `max(x − r_cap, 0)²`
    QuadraticAboveCapture,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffSpec {
    pub kind: PayoffKind,
    pub r_cap: f64,
}

impl PayoffSpec {
    pub fn hinge(r_cap: f64) -> Self {
        Self {
            kind: PayoffKind::Hinge,
            r_cap,
        }
    }

    pub fn quadratic(r_cap: f64) -> Self {
        Self {
            kind: PayoffKind::QuadraticAboveCapture,
            r_cap,
        }
    }

    /// φ(x) for a distance already known to be non-negative.
    ///
    /// Negative inputs are treated as 0, which is where φ vanishes anyway.
    pub fn at(&self, x: f64) -> f64 {
        let excess = (x - self.r_cap).max(0.0);
        match self.kind {
            PayoffKind::Hinge => excess,
            PayoffKind::QuadraticAboveCapture => excess * excess,
        }
    }
}

/// φ(x), rejecting negative or non-finite distances.
pub fn phi_eval(spec: &PayoffSpec, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "payoff distance must be finite and non-negative, got {x}"
        )));
    }
    Ok(spec.at(x))
}
