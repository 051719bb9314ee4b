//! Closed-form sensing counts, value-function bounds and degradation metrics.
//!
//! Notation: `rho` is the separation at the latest sensing instant, `tau` the
//! time left in the game and `ell` the number of sensing requests left.
//! `B(ell) = (1 − ν^{ℓ+1}) / (1 − ν)` is the total path length of a pursuer
//! that repeatedly runs to the last sensed point while the separation shrinks
//! by a factor ν per leg; most case boundaries are `tau = B(ell)·rho`.

use serde::{Deserialize, Serialize};

use crate::payoff::PayoffSpec;
use crate::{Error, Result};

/// Relative slack used when deciding which side of a case boundary a query
/// falls on.
pub const BOUNDARY_RTOL: f64 = 1e-12;

/// Relative nudge applied before `floor`/`ceil` of a log ratio, so exact
/// powers of 1/ν do not lose a unit to rounding.
pub const ROUNDING_NUDGE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueQuery {
    pub rho: f64,
    pub tau: f64,
    pub ell: u32,
}

impl ValueQuery {
    pub fn new(rho: f64, tau: f64, ell: u32) -> Result<Self> {
        for (name, v) in [("rho", rho), ("tau", tau)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Domain { name, value: v });
            }
        }
        Ok(Self { rho, tau, ell })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    CaptureRegion,
    TimeLimited,
    WaitRegion,
    Stage0Case1,
    Stage0Case2a,
    Stage0Case2b,
    Stage0Case3,
}

impl CaseTag {
    pub const ALL: [CaseTag; 7] = [
        CaseTag::CaptureRegion,
        CaseTag::TimeLimited,
        CaseTag::WaitRegion,
        CaseTag::Stage0Case1,
        CaseTag::Stage0Case2a,
        CaseTag::Stage0Case2b,
        CaseTag::Stage0Case3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::CaptureRegion => "capture_region",
            CaseTag::TimeLimited => "time_limited",
            CaseTag::WaitRegion => "wait_region",
            CaseTag::Stage0Case1 => "stage0_case1",
            CaseTag::Stage0Case2a => "stage0_case2a",
            CaseTag::Stage0Case2b => "stage0_case2b",
            CaseTag::Stage0Case3 => "stage0_case3",
        }
    }
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Upper bound on the equilibrium value, the analytic case it came from, and
/// whether the bound is known to be attained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueBound {
    pub value: f64,
    pub case_tag: CaseTag,
    pub is_tight: bool,
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { name: "nu", value: nu })
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { name, value: v })
    }
}

fn floor_nudged(x: f64) -> f64 {
    (x + ROUNDING_NUDGE * x.abs().max(1.0)).floor()
}

fn ceil_nudged(x: f64) -> f64 {
    (x - ROUNDING_NUDGE * x.abs().max(1.0)).ceil()
}

fn clamp_count(x: f64) -> u32 {
    if x <= 0.0 {
        0
    } else {
        x as u32
    }
}

/// `B(ell) = (1 − ν^{ℓ+1}) / (1 − ν)`.
pub fn geometric_reach(nu: f64, ell: u32) -> f64 {
    (1.0 - nu.powi(ell as i32 + 1)) / (1.0 - nu)
}

/// `√(1 − ν²) / (ν + √(1 − ν²))`: the self-triggered scheme waits this many
/// multiples of the sensed separation before sensing again.
pub fn aleem_trigger_gain(nu: f64) -> Result<f64> {
    check_nu(nu)?;
    let s = (1.0 - nu * nu).sqrt();
    Ok(s / (nu + s))
}

/// Per-sensing contraction factor of the self-triggered scheme.
///
/// Uses the factored form `1 − (1 − ν)·√(1 − ν²)/(ν + √(1 − ν²))`, which has
/// no pole at ν = 1/√2.
pub fn h_of_nu(nu: f64) -> Result<f64> {
    Ok(1.0 - (1.0 - nu) * aleem_trigger_gain(nu)?)
}

/// The contraction factor as originally printed, with denominator `2ν² − 1`.
/// Undefined (0/0) at ν = 1/√2; kept for cross-checking [`h_of_nu`].
pub fn h_of_nu_raw(nu: f64) -> Result<f64> {
    check_nu(nu)?;
    let s = (1.0 - nu * nu).sqrt();
    let num = nu * (1.0 - nu) * s - (1.0 - nu) * (1.0 - nu * nu);
    Ok(1.0 - num / (2.0 * nu * nu - 1.0))
}

/// Sensing count of the self-triggered scheme: `⌈log(r_cap/ρ₀) / log h(ν)⌉`,
/// clamped at 0.
pub fn aleem_n_max(rho0: f64, r_cap: f64, nu: f64) -> Result<u32> {
    check_positive("rho0", rho0)?;
    check_positive("r_cap", r_cap)?;
    let h = h_of_nu(nu)?;
    Ok(clamp_count(ceil_nudged((r_cap.ln() - rho0.ln()) / h.ln())))
}

/// Sensing count of the run-to-last-sensed-point pursuer:
/// `⌊log(r_cap/ρ₀) / log ν⌋`, clamped at 0.
pub fn prop1_n_max(rho0: f64, r_cap: f64, nu: f64) -> Result<u32> {
    check_positive("rho0", rho0)?;
    check_positive("r_cap", r_cap)?;
    check_nu(nu)?;
    Ok(clamp_count(floor_nudged((r_cap.ln() - rho0.ln()) / nu.ln())))
}

/// Sensing count and path-length budget of the run-to-last-sensed-point
/// pursuer.
///
/// With `m` the smallest integer such that `r_cap > ν^m·ρ₀`, returns
/// `(max(m − 1, 0), (1 − ν^{m+1}) / (1 − ν) · ρ₀)`.
pub fn corollary1(rho0: f64, r_cap: f64, nu: f64) -> Result<(u32, f64)> {
    check_positive("rho0", rho0)?;
    check_positive("r_cap", r_cap)?;
    check_nu(nu)?;
    let m = if r_cap > rho0 {
        0
    } else {
        // Largest k with ν^k ρ₀ ≥ r_cap, plus one.
        clamp_count(floor_nudged((r_cap.ln() - rho0.ln()) / nu.ln())) + 1
    };
    Ok((m.saturating_sub(1), geometric_reach(nu, m) * rho0))
}

/// Membership in Ω₀ = {τ ≥ ρ, r_cap < νρ ≤ √(1+ν²)·r_cap}, the only part of
/// the zero-budget stage where the bound is not known to be attained.
pub fn in_omega0(rho: f64, tau: f64, nu: f64, r_cap: f64) -> bool {
    let nu_rho = nu * rho;
    tau >= rho && r_cap < nu_rho && nu_rho <= (1.0 + nu * nu).sqrt() * r_cap
}

/// The non-tight region for `ell ≥ 1` exactly as printed alongside the main
/// bound: `{τ ≥ B(ℓ)ρ, r_cap ≤ ρ ≤ √(1+ν²)·r_cap}`.
pub fn in_nontight_region_printed(rho: f64, tau: f64, ell: u32, nu: f64, r_cap: f64) -> bool {
    tau >= geometric_reach(nu, ell) * rho && r_cap <= rho && rho <= (1.0 + nu * nu).sqrt() * r_cap
}

/// The same region with the ν scaling that Ω₀ carries:
/// `{τ ≥ B(ℓ)ρ, r_cap < νρ ≤ √(1+ν²)·r_cap}`. Exposed for comparison only.
pub fn in_nontight_region_scaled(rho: f64, tau: f64, ell: u32, nu: f64, r_cap: f64) -> bool {
    let nu_rho = nu * rho;
    tau >= geometric_reach(nu, ell) * rho
        && r_cap < nu_rho
        && nu_rho <= (1.0 + nu * nu).sqrt() * r_cap
}

/// Bound on the value once the sensing budget is spent.
pub fn v_stage0(rho: f64, tau: f64, phi: &PayoffSpec, nu: f64, r_cap: f64) -> ValueBound {
    if rho <= r_cap {
        return ValueBound {
            value: 0.0,
            case_tag: CaseTag::Stage0Case1,
            is_tight: true,
        };
    }
    if tau < rho {
        return ValueBound {
            value: phi.at(nu * tau + rho - tau),
            case_tag: CaseTag::Stage0Case3,
            is_tight: true,
        };
    }
    if nu * rho <= r_cap {
        return ValueBound {
            value: 0.0,
            case_tag: CaseTag::Stage0Case1,
            is_tight: true,
        };
    }
    let omega0 = in_omega0(rho, tau, nu, r_cap);
    ValueBound {
        value: phi.at(nu * tau),
        case_tag: if omega0 {
            CaseTag::Stage0Case2b
        } else {
            CaseTag::Stage0Case2a
        },
        is_tight: !omega0,
    }
}

/// Upper bound on `V(ρ, τ, ℓ)`.
///
/// `ell = 0` delegates to [`v_stage0`]. For `ell ≥ 1`:
/// - `τ ≤ B(ℓ)ρ`: `φ(ντ + ρ − τ)` (time-limited; exact boundary lands here),
/// - `ν^{ℓ+1}ρ ≤ r_cap`: 0 (capture),
/// - otherwise `φ((1 − ν)/(1 − ν^{ℓ+1}) · ν^{ℓ+1} · τ)` (wait first).
pub fn v_bound(q: ValueQuery, phi: &PayoffSpec, nu: f64, r_cap: f64) -> ValueBound {
    let ValueQuery { rho, tau, ell } = q;
    if ell == 0 {
        return v_stage0(rho, tau, phi, nu, r_cap);
    }
    if rho <= r_cap {
        return ValueBound {
            value: 0.0,
            case_tag: CaseTag::CaptureRegion,
            is_tight: true,
        };
    }
    let is_tight = !in_nontight_region_printed(rho, tau, ell, nu, r_cap);
    let reach = geometric_reach(nu, ell);
    if tau <= reach * rho * (1.0 + BOUNDARY_RTOL) {
        return ValueBound {
            value: phi.at(nu * tau + rho - tau),
            case_tag: CaseTag::TimeLimited,
            is_tight,
        };
    }
    let shrink = nu.powi(ell as i32 + 1);
    if shrink * rho <= r_cap {
        ValueBound {
            value: 0.0,
            case_tag: CaseTag::CaptureRegion,
            is_tight,
        }
    } else {
        ValueBound {
            value: phi.at(shrink * tau / reach),
            case_tag: CaseTag::WaitRegion,
            is_tight,
        }
    }
}

/// How long the pursuer should idle at the last sensed point before its next
/// sensing request: `w = τ/B(ℓ) − ρ` in the wait region, `None` elsewhere.
pub fn wait_time(rho: f64, tau: f64, ell: u32, nu: f64, r_cap: f64) -> Option<f64> {
    if ell == 0 {
        return None;
    }
    let reach = geometric_reach(nu, ell);
    if tau <= reach * rho * (1.0 + BOUNDARY_RTOL) || nu.powi(ell as i32 + 1) * rho <= r_cap {
        return None;
    }
    Some((tau / reach - rho).max(0.0))
}

fn check_assumption3(rho0: f64, nu: f64, r_cap: f64) -> Result<()> {
    if nu * rho0 > (1.0 + nu * nu).sqrt() * r_cap {
        Ok(())
    } else {
        Err(Error::RegionNotCovered(format!(
            "need nu*rho0 > sqrt(1+nu^2)*r_cap, got nu*rho0 = {}, sqrt(1+nu^2)*r_cap = {}",
            nu * rho0,
            (1.0 + nu * nu).sqrt() * r_cap
        )))
    }
}

/// Time the continuously-sensing pursuer needs to capture: `(ρ₀ − r_cap)/(1 − ν)`.
pub fn capture_horizon(rho0: f64, r_cap: f64, nu: f64) -> f64 {
    (rho0 - r_cap) / (1.0 - nu)
}

/// Number of sensings that matches the continuously-sensing payoff.
pub fn n_star(rho0: f64, t_f: f64, nu: f64, r_cap: f64) -> Result<u32> {
    check_nu(nu)?;
    check_positive("r_cap", r_cap)?;
    check_assumption3(rho0, nu, r_cap)?;
    if !(t_f >= 0.0) {
        return Err(Error::Domain { name: "t_f", value: t_f });
    }
    let numerator = if t_f < capture_horizon(rho0, r_cap, nu) {
        (rho0 - (1.0 - nu) * t_f).ln() - rho0.ln()
    } else {
        r_cap.ln() - rho0.ln()
    };
    Ok(clamp_count(floor_nudged(numerator / nu.ln())))
}

/// Payoff under continuous sensing: `φ([ρ₀ − (1 − ν)·t_f]⁺)`.
pub fn continuous_payoff(rho0: f64, t_f: f64, nu: f64, phi: &PayoffSpec) -> f64 {
    phi.at((rho0 - (1.0 - nu) * t_f).max(0.0))
}

/// Lower-bound coefficient on the degradation:
/// `ν^{n+1}/(1 − ν^{n+1}) · (1 − ν)t_f / (ρ₀ − (1 − ν)t_f) − 1`.
///
/// `None` when `ρ₀ − (1 − ν)t_f ≤ 0`.
pub fn beta(n: u32, rho0: f64, t_f: f64, nu: f64) -> Option<f64> {
    let remaining = rho0 - (1.0 - nu) * t_f;
    if remaining <= 0.0 {
        return None;
    }
    let shrink = nu.powi(n as i32 + 1);
    Some(shrink / (1.0 - shrink) * ((1.0 - nu) * t_f / remaining) - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegradationRow {
    pub n: u32,
    /// `V(ρ₀, t_f, n)` minus the continuous-sensing payoff.
    pub delta: f64,
    pub beta: Option<f64>,
    pub bound: ValueBound,
    /// `δ(n) ≥ β(n)·φ(ρ₀ − (1 − ν)t_f)`; `None` where it is not claimed
    /// (`n ≥ n*` or β undefined).
    pub jensen_holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegradationReport {
    pub n_star: u32,
    pub continuous_payoff: f64,
    /// Rows for `n = 0..=n_star`.
    pub rows: Vec<DegradationRow>,
}

impl DegradationReport {
    pub fn delta(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.delta).collect()
    }

    pub fn beta(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.beta).collect()
    }
}

/// Payoff degradation δ(n) for every budget up to n*, with the exponential
/// lower-bound coefficient β(n).
///
/// δ(n) evaluates the value at `(ρ₀, t_f, n)`, i.e. with the whole game
/// duration remaining.
pub fn degradation(rho0: f64, t_f: f64, nu: f64, r_cap: f64, phi: &PayoffSpec) -> Result<DegradationReport> {
    let n_star = n_star(rho0, t_f, nu, r_cap)?;
    let cont = continuous_payoff(rho0, t_f, nu, phi);
    let base = phi.at(rho0 - (1.0 - nu) * t_f);
    let rows = (0..=n_star)
        .map(|n| {
            let bound = v_bound(ValueQuery { rho: rho0, tau: t_f, ell: n }, phi, nu, r_cap);
            let delta = bound.value - cont;
            let beta = beta(n, rho0, t_f, nu);
            let jensen_holds = match beta {
                Some(b) if n < n_star => Some(delta >= b * base - 1e-12),
                _ => None,
            };
            DegradationRow {
                n,
                delta,
                beta,
                bound,
                jensen_holds,
            }
        })
        .collect();
    Ok(DegradationReport {
        n_star,
        continuous_payoff: cont,
        rows,
    })
}

#[cfg(test)]
mod properties;
