//! Deviation searches and independent oracles for the equilibrium and bound
//! claims.
//!
//! Nothing here trusts the closed forms beyond using them as the quantity
//! under test: payoffs come from simulation, expectations from exact
//! enumeration over side sequences (or Monte Carlo past the enumeration cap).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::GameConfig;
use crate::engine::{
    exact_expected_payoff, monte_carlo_expected_payoff, payoff_of, simulate, Outcome,
    MAX_ENUMERATED_INTERVALS,
};
use crate::geom::{perp, Side, Vec2};
use crate::strategies::{
    pursuer_thm1, AleemPursuer, ContinuousPursuit, EquilibriumEvader, EvaderChoice, EvaderInfo,
    EvaderPolicy, FixedSides, GameParams, PerpendicularEvader, Prop1Pursuer, PursuerAction,
    PursuerInfo, PursuerPolicy, RadialEvader, ScriptPiece, ScriptedEvader, SeededSides, SensingLog,
    ThetaSource, Thm1Pursuer, ARRIVAL_TOLERANCE,
};
use crate::value::{
    capture_horizon, corollary1, prop1_n_max, v_bound, wait_time, CaseTag, ValueBound, ValueQuery,
};
use crate::{Error, Result};

/// Tolerance for claims that hold in exact arithmetic.
pub const EXACT_TOLERANCE: f64 = 1e-9;

/// Tolerance for the pointwise two-branch distance inequality.
pub const JENSEN_TOLERANCE: f64 = 1e-12;

pub const MONTE_CARLO_SAMPLES: u64 = 1_000_000;

/// Margin, in standard errors, granted to Monte Carlo expectations.
pub const MONTE_CARLO_MARGIN: f64 = 4.0;

/// Violations kept verbatim in a report; the rest are only counted.
pub const MAX_LISTED_VIOLATIONS: usize = 50;

/// Step of the dense oracle used by the `oracle` suite.
pub const DEFAULT_ORACLE_DT: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub description: String,
    /// Game to replay, when the check involved a simulation.
    pub config: Option<GameConfig>,
    /// Evader to replay with, when it was not a named policy.
    pub evader: Option<EvaderChoice>,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub trials: u64,
    /// Largest observed excess over the claimed bound; negative means slack.
    pub worst_violation: f64,
    pub violation_count: u64,
    pub violations: Vec<Violation>,
    pub tolerance: f64,
    pub passed: bool,
    pub notes: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>, tolerance: f64) -> Self {
        Self {
            suite: suite.into(),
            trials: 0,
            worst_violation: f64::NEG_INFINITY,
            violation_count: 0,
            violations: Vec::new(),
            tolerance,
            passed: true,
            notes: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    /// Records one comparison whose claim is `excess ≤ tolerance`.
    pub fn observe(&mut self, excess: f64, violation: impl FnOnce() -> Violation) {
        self.trials += 1;
        let excess = if excess.is_nan() { f64::INFINITY } else { excess };
        self.worst_violation = self.worst_violation.max(excess);
        if excess > self.tolerance {
            self.violation_count += 1;
            if self.violations.len() < MAX_LISTED_VIOLATIONS {
                let mut v = violation();
                v.magnitude = excess.min(f64::MAX);
                self.violations.push(v);
            }
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    fn metric_max(&mut self, key: &str, value: f64) {
        let slot = self.metrics.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
        *slot = slot.max(value);
    }

    /// Fixes `passed` and replaces the "nothing observed" sentinel.
    pub fn finish(mut self) -> Self {
        if self.trials == 0 {
            self.worst_violation = 0.0;
        }
        self.worst_violation = self.worst_violation.min(f64::MAX);
        self.passed = self.violation_count == 0;
        self
    }

    /// Folds several reports of one suite into one.
    pub fn merge(suite: &str, reports: Vec<VerificationReport>) -> VerificationReport {
        let tolerance = reports.first().map_or(0.0, |r| r.tolerance);
        let mut out = VerificationReport::new(suite, tolerance);
        for r in reports {
            out.trials += r.trials;
            out.worst_violation = out.worst_violation.max(r.worst_violation);
            out.violation_count += r.violation_count;
            let room = MAX_LISTED_VIOLATIONS.saturating_sub(out.violations.len());
            out.violations.extend(r.violations.into_iter().take(room));
            out.notes.extend(r.notes.into_iter().map(|n| format!("{}: {n}", r.suite)));
            for (k, v) in r.metrics {
                out.metrics.insert(format!("{}.{k}", r.suite), v);
            }
        }
        out.finish()
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Open-loop evader with 1 to 5 heading switches at uniform times in
/// `[0, horizon)`; each piece has a uniform heading and, with probability ½,
/// full speed ν (otherwise a uniform speed in `[0, ν]`).
pub fn random_scripted_evader<R: Rng>(rng: &mut R, nu: f64, horizon: f64) -> ScriptedEvader {
    let switches = rng.gen_range(1..=5);
    let mut ends: Vec<f64> = (0..switches)
        .map(|_| rng.gen_range(0.0..horizon.max(f64::MIN_POSITIVE)))
        .collect();
    ends.sort_by(f64::total_cmp);
    ends.push(horizon);
    let pieces = ends
        .into_iter()
        .map(|until| {
            let heading = rng.gen_range(0.0..std::f64::consts::TAU);
            let speed = if rng.gen_bool(0.5) {
                nu
            } else {
                rng.gen_range(0.0..=nu)
            };
            ScriptPiece {
                until,
                velocity: Vec2::from_angle(heading) * speed,
            }
        })
        .collect();
    ScriptedEvader { pieces }
}

fn bound_for(config: &GameConfig) -> Result<ValueBound> {
    let q = ValueQuery::new(config.rho0(), config.t_f, config.n)?;
    Ok(v_bound(q, &config.payoff(), config.nu, config.r_cap))
}

fn describe(config: &GameConfig) -> String {
    format!(
        "nu={} r_cap={} rho0={} t_f={} n={}",
        config.nu,
        config.r_cap,
        config.rho0(),
        config.t_f,
        config.n
    )
}

/// Realised payoff of the budget-aware pursuer never exceeds the value
/// bound, whatever the evader does.
///
/// Runs `trials` random open-loop evaders plus radial flight, both
/// perpendicular side-steps and eight equilibrium side sequences.
pub fn pursuer_guarantee_check(config: &GameConfig, trials: u64, seed: u64) -> Result<VerificationReport> {
    config.validate()?;
    let bound = bound_for(config)?;
    let mut report = VerificationReport::new("pursuer", EXACT_TOLERANCE);
    report.metric("bound", bound.value);
    if !bound.is_tight {
        report.note("non-tight region: only the one-sided bound is checked");
    }

    let random: Vec<(f64, ScriptedEvader)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let ev = random_scripted_evader(&mut trial_rng(seed, k), config.nu, config.t_f);
            let r = simulate(config, &Thm1Pursuer, &ev, &FixedSides(Vec::new()))?;
            Ok((r.outcome.payoff, ev))
        })
        .collect::<Result<_>>()?;
    for (payoff, ev) in random {
        report.metric_max("max_payoff", payoff);
        report.observe(payoff - bound.value, || Violation {
            description: format!("random evader beats bound {} ({})", bound.value, describe(config)),
            config: Some(config.clone()),
            evader: Some(EvaderChoice::Scripted { pieces: ev.pieces }),
            magnitude: 0.0,
        });
    }

    let none = FixedSides(Vec::new());
    let mut structured: Vec<(String, Box<dyn EvaderPolicy>, Box<dyn ThetaSource>)> = vec![
        ("radial".into(), Box::new(RadialEvader), Box::new(none.clone())),
        (
            "perpendicular ccw".into(),
            Box::new(PerpendicularEvader { side: Side::Ccw }),
            Box::new(none.clone()),
        ),
        (
            "perpendicular cw".into(),
            Box::new(PerpendicularEvader { side: Side::Cw }),
            Box::new(none),
        ),
    ];
    for stream in 0..8 {
        structured.push((
            format!("equilibrium stream {stream}"),
            Box::new(EquilibriumEvader),
            Box::new(SeededSides { seed, stream }),
        ));
    }
    for (name, ev, sides) in structured {
        let payoff = simulate(config, &Thm1Pursuer, ev.as_ref(), sides.as_ref())?.outcome.payoff;
        report.metric_max("max_payoff", payoff);
        report.observe(payoff - bound.value, || Violation {
            description: format!("{name} evader beats bound {} ({})", bound.value, describe(config)),
            config: Some(config.clone()),
            evader: None,
            magnitude: 0.0,
        });
    }
    Ok(report.finish())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl GridAxis {
    pub fn points(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.lo],
            n => (0..n)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

/// Pursuer deviations tried against the equilibrium evader.
///
/// With no budget left the pursuer's whole choice is where it ends up, so
/// deviations are endpoint offsets `(α₁, α₂)` in the line-of-sight frame.
/// With budget left, the first leg of the waiting policy is perturbed by a
/// heading rotation, a speed fraction and a rescaled sensing time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationGrid {
    pub alpha1: GridAxis,
    pub alpha2: GridAxis,
    pub headings: Vec<f64>,
    pub speed_fractions: Vec<f64>,
    pub sense_factors: Vec<f64>,
}

impl DeviationGrid {
    /// `steps × steps` offsets over `[−τ, τ]²` and a small perturbation set.
    pub fn square(tau: f64, steps: usize) -> Self {
        let axis = GridAxis {
            lo: -tau,
            hi: tau,
            steps,
        };
        Self {
            alpha1: axis,
            alpha2: axis,
            headings: vec![-0.4, -0.15, 0.0, 0.15, 0.4],
            speed_fractions: vec![0.5, 0.8, 1.0],
            sense_factors: vec![0.5, 0.8, 1.0, 1.2],
        }
    }

    /// Grid offsets reachable within `tau`, i.e. with `√(α₁² + α₂²) ≤ τ`.
    pub fn endpoints(&self, tau: f64) -> Vec<(f64, f64)> {
        let a2s = self.alpha2.points();
        self.alpha1
            .points()
            .into_iter()
            .flat_map(|a1| a2s.iter().map(move |&a2| (a1, a2)))
            .filter(|&(a1, a2)| a1.hypot(a2) <= tau)
            .collect()
    }
}

/// Runs straight to `x_p(0) + α₁ r(0) + α₂ r(0)^⊥` at the constant speed
/// that arrives exactly at `t_f`, never sensing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndpointPursuer {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl PursuerPolicy for EndpointPursuer {
    fn name(&self) -> &str {
        "endpoint"
    }

    fn decide(&self, info: &PursuerInfo<'_>) -> Result<PursuerAction> {
        let first = info.log.records()[0];
        let r = first.line_of_sight()?;
        let offset = r * self.alpha1 + perp(r, Side::Ccw)? * self.alpha2;
        let length = offset.norm();
        let heading = offset.normalized().unwrap_or(r);
        let speed = if info.params.t_f > 0.0 {
            (length / info.params.t_f).min(1.0)
        } else {
            0.0
        };
        Ok(PursuerAction {
            heading,
            speed_fraction: speed,
            sense_now: false,
            hold: f64::INFINITY,
        })
    }
}

/// The waiting policy with its first leg perturbed; from the first sensing
/// on it plays the undeviated policy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaitDeviation {
    /// Rotation of the first-leg heading away from r(0), radians.
    pub heading_offset: f64,
    pub speed_fraction: f64,
    /// Multiplies the undeviated first sensing time.
    pub sense_factor: f64,
}

impl WaitDeviation {
    pub const NONE: WaitDeviation = WaitDeviation {
        heading_offset: 0.0,
        speed_fraction: 1.0,
        sense_factor: 1.0,
    };
}

impl PursuerPolicy for WaitDeviation {
    fn name(&self) -> &str {
        "wait_deviation"
    }

    fn decide(&self, info: &PursuerInfo<'_>) -> Result<PursuerAction> {
        if info.log.interval_index() > 0 || info.log.budget_remaining() == 0 {
            return pursuer_thm1(info);
        }
        let p = info.params;
        let first = info.log.records()[0];
        let rho = first.separation();
        let r = first.line_of_sight()?;
        let nominal = rho + wait_time(rho, p.t_f, info.log.budget_remaining(), p.nu, p.r_cap).unwrap_or(0.0);
        let sense_at = self.sense_factor * nominal;
        let leg_end = rho.min(sense_at);
        let heading = r * self.heading_offset.cos() + perp(r, Side::Ccw)? * self.heading_offset.sin();
        let action = if leg_end - info.time > ARRIVAL_TOLERANCE {
            PursuerAction {
                heading,
                speed_fraction: self.speed_fraction,
                sense_now: false,
                hold: leg_end - info.time,
            }
        } else if sense_at - info.time > ARRIVAL_TOLERANCE {
            PursuerAction {
                heading,
                speed_fraction: 0.0,
                sense_now: false,
                hold: sense_at - info.time,
            }
        } else {
            PursuerAction {
                heading,
                speed_fraction: 0.0,
                sense_now: true,
                hold: 0.0,
            }
        };
        Ok(action)
    }
}

/// An expected payoff with the one-sided slack it may be trusted to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub value: f64,
    pub margin: f64,
    pub exact: bool,
}

/// E[J] against the equilibrium evader: exact enumeration when the number of
/// intervals allows it, Monte Carlo with a 4-standard-error margin otherwise.
pub fn expected_against_equilibrium(
    config: &GameConfig,
    pursuer: &dyn PursuerPolicy,
    seed: u64,
) -> Result<Expectation> {
    if config.n as usize + 1 <= MAX_ENUMERATED_INTERVALS {
        Ok(Expectation {
            value: exact_expected_payoff(config, pursuer, &EquilibriumEvader)?,
            margin: 0.0,
            exact: true,
        })
    } else {
        let mc = monte_carlo_expected_payoff(config, pursuer, &EquilibriumEvader, MONTE_CARLO_SAMPLES, seed)?;
        Ok(Expectation {
            value: mc.mean,
            margin: MONTE_CARLO_MARGIN * mc.standard_error,
            exact: false,
        })
    }
}

/// No pursuer deviation in `grid` lowers the equilibrium evader's expected
/// payoff below the value bound; the undeviated pursuer attains it.
pub fn evader_guarantee_check(config: &GameConfig, grid: &DeviationGrid) -> Result<VerificationReport> {
    config.validate()?;
    let bound = bound_for(config)?;
    let mut report = VerificationReport::new("evader", EXACT_TOLERANCE);
    report.metric("bound", bound.value);
    if !bound.is_tight {
        report.note(format!(
            "two-sided check skipped: ({}) is in the non-tight region",
            describe(config)
        ));
        return Ok(report.finish());
    }
    let rho = config.rho0();
    let tau = config.t_f;

    let deviations: Vec<(String, Box<dyn PursuerPolicy>)> = if config.n == 0 {
        let mut points = grid.endpoints(tau);
        if rho <= tau {
            points.push((rho, 0.0));
        }
        points
            .into_iter()
            .map(|(a1, a2)| {
                (
                    format!("endpoint ({a1}, {a2})"),
                    Box::new(EndpointPursuer { alpha1: a1, alpha2: a2 }) as Box<dyn PursuerPolicy>,
                )
            })
            .collect()
    } else {
        let mut out: Vec<(String, Box<dyn PursuerPolicy>)> = Vec::new();
        for &h in &grid.headings {
            for &g in &grid.speed_fractions {
                for &s in &grid.sense_factors {
                    out.push((
                        format!("wait deviation heading {h} speed {g} sense x{s}"),
                        Box::new(WaitDeviation {
                            heading_offset: h,
                            speed_fraction: g,
                            sense_factor: s,
                        }),
                    ));
                }
            }
        }
        out
    };

    let values: Vec<Expectation> = deviations
        .par_iter()
        .map(|(_, p)| expected_against_equilibrium(config, p.as_ref(), config.seed))
        .collect::<Result<_>>()?;
    if values.iter().any(|e| !e.exact) {
        report.note("enumeration cap exceeded: Monte Carlo expectations with a 4-standard-error margin");
    }
    let mut grid_min = f64::INFINITY;
    for ((label, _), e) in deviations.iter().zip(&values) {
        grid_min = grid_min.min(e.value);
        report.observe(bound.value - e.value - e.margin, || Violation {
            description: format!(
                "{label}: expectation {} below bound {} ({})",
                e.value,
                bound.value,
                describe(config)
            ),
            config: Some(config.clone()),
            evader: None,
            magnitude: 0.0,
        });
    }
    report.metric("grid_min", grid_min);

    // The undeviated pursuer must attain the bound where the proofs build
    // the evader's response.
    let attains = match bound.case_tag {
        CaseTag::Stage0Case2a => config.n == 0,
        CaseTag::WaitRegion | CaseTag::TimeLimited => config.n > 0,
        _ => false,
    };
    if attains {
        let at_optimum = if config.n == 0 {
            expected_against_equilibrium(config, &EndpointPursuer { alpha1: rho, alpha2: 0.0 }, config.seed)?
        } else {
            expected_against_equilibrium(config, &Thm1Pursuer, config.seed)?
        };
        report.metric("optimum", at_optimum.value);
        report.observe((at_optimum.value - bound.value).abs() - at_optimum.margin, || Violation {
            description: format!(
                "undeviated expectation {} differs from bound {} ({})",
                at_optimum.value,
                bound.value,
                describe(config)
            ),
            config: Some(config.clone()),
            evader: None,
            magnitude: 0.0,
        });
        report.observe(at_optimum.value - grid_min - at_optimum.margin, || Violation {
            description: format!(
                "grid minimum {grid_min} is below the undeviated expectation {} ({})",
                at_optimum.value,
                describe(config)
            ),
            config: Some(config.clone()),
            evader: None,
            magnitude: 0.0,
        });
    }
    Ok(report.finish())
}

/// Two-branch expectation `½[g(+1) + g(−1)]` with
/// `g(θ) = √((ρ − α₁)² + (θντ − α₂)²)`.
pub fn two_branch_distance(rho: f64, tau: f64, nu: f64, alpha1: f64, alpha2: f64) -> f64 {
    let a = rho - alpha1;
    let g = |theta: f64| a.hypot(theta * nu * tau - alpha2);
    0.5 * (g(1.0) + g(-1.0))
}

/// Claimed lower bound `√((ρ − α₁)² + ν²τ² + α₂²)`.
pub fn jensen_claimed_bound(rho: f64, tau: f64, nu: f64, alpha1: f64, alpha2: f64) -> f64 {
    ((rho - alpha1).powi(2) + (nu * tau).powi(2) + alpha2 * alpha2).sqrt()
}

/// Lower bound `√((ρ − α₁)² + ν²τ²)`, from convexity and evenness in α₂.
pub fn jensen_even_bound(rho: f64, tau: f64, nu: f64, alpha1: f64) -> f64 {
    (rho - alpha1).hypot(nu * tau)
}

fn check_reachable(tau: f64, grid: &[(f64, f64)]) -> Result<()> {
    for &(a1, a2) in grid {
        if a1.hypot(a2) > tau * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!(
                "offset ({a1}, {a2}) is not reachable within tau = {tau}"
            )));
        }
    }
    Ok(())
}

fn jensen_report(
    suite: &str,
    rho: f64,
    tau: f64,
    nu: f64,
    grid: &[(f64, f64)],
    rhs: impl Fn(f64, f64) -> f64,
) -> Result<VerificationReport> {
    check_reachable(tau, grid)?;
    let mut report = VerificationReport::new(suite, JENSEN_TOLERANCE);
    for &(a1, a2) in grid {
        let lhs = two_branch_distance(rho, tau, nu, a1, a2);
        let bound = rhs(a1, a2);
        let label = format!("rho={rho} tau={tau} nu={nu} alpha=({a1}, {a2})");
        report.observe(bound - lhs, || Violation {
            description: format!("{label}: E[g] = {lhs} < {bound}"),
            config: None,
            evader: None,
            magnitude: 0.0,
        });
        if a2 == 0.0 {
            report.observe((lhs - bound).abs(), || Violation {
                description: format!("{label}: no equality at alpha2 = 0 ({lhs} vs {bound})"),
                config: None,
                evader: None,
                magnitude: 0.0,
            });
        }
    }
    Ok(report.finish())
}

/// Checks `E[g(θ)] ≥ √((ρ − α₁)² + ν²τ² + α₂²)` pointwise, with equality at
/// α₂ = 0.
///
/// `√` is concave, so the inequality actually runs the other way whenever
/// α₂ ≠ 0; this check reports those points as violations.
pub fn jensen_bound_check(rho: f64, tau: f64, nu: f64, grid: &[(f64, f64)]) -> Result<VerificationReport> {
    jensen_report("jensen", rho, tau, nu, grid, |a1, a2| {
        jensen_claimed_bound(rho, tau, nu, a1, a2)
    })
}

/// Checks `E[g(θ)] ≥ √((ρ − α₁)² + ν²τ²)` pointwise, with equality at α₂ = 0.
/// This weaker bound still puts the pursuer's optimum at `(ρ, 0)`.
pub fn even_jensen_check(rho: f64, tau: f64, nu: f64, grid: &[(f64, f64)]) -> Result<VerificationReport> {
    jensen_report("jensen_even", rho, tau, nu, grid, |a1, _| {
        jensen_even_bound(rho, tau, nu, a1)
    })
}

/// One random `(ρ, τ, ν, α₁, α₂)` point for the distance inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JensenTuple {
    pub rho: f64,
    pub tau: f64,
    pub nu: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

/// `count` tuples with α uniform in the reachable disc; every fourth has
/// α₂ = 0 exactly.
pub fn jensen_tuples(count: u64, seed: u64) -> Vec<JensenTuple> {
    (0..count)
        .map(|k| {
            let mut rng = trial_rng(seed, k);
            let rho = rng.gen_range(0.1..5.0);
            let tau = rng.gen_range(0.1..5.0);
            let nu = rng.gen_range(0.05..0.95);
            let radius = tau * rng.gen::<f64>().sqrt();
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let (alpha1, alpha2) = if k % 4 == 0 {
                (rng.gen_range(-tau..=tau), 0.0)
            } else {
                (radius * angle.cos(), radius * angle.sin())
            };
            JensenTuple {
                rho,
                tau,
                nu,
                alpha1,
                alpha2,
            }
        })
        .collect()
}

/// Claimed and even-bound checks over random tuples.
pub fn jensen_sweep(count: u64, seed: u64) -> Result<(VerificationReport, VerificationReport)> {
    let tuples = jensen_tuples(count, seed);
    let mut claimed = Vec::new();
    let mut even = Vec::new();
    for t in &tuples {
        let grid = [(t.alpha1, t.alpha2)];
        claimed.push(jensen_bound_check(t.rho, t.tau, t.nu, &grid)?);
        even.push(even_jensen_check(t.rho, t.tau, t.nu, &grid)?);
    }
    Ok((
        VerificationReport::merge("jensen", claimed),
        VerificationReport::merge("jensen_even", even),
    ))
}

/// The run-to-last-sensed-point pursuer, given the sensing count its
/// analysis calls for, captures every evader within `(ρ₀ − r_cap)/(1 − ν)`,
/// contracts the separation by ν per interval and stays within the path
/// length bound.
pub fn capture_time_bound_check(
    nu: f64,
    rho0: f64,
    r_cap: f64,
    trials: u64,
    seed: u64,
) -> Result<VerificationReport> {
    let horizon = capture_horizon(rho0, r_cap, nu);
    let n_max = prop1_n_max(rho0, r_cap, nu)?;
    let (_, path_bound) = corollary1(rho0, r_cap, nu)?;
    let config = GameConfig::head_on(nu, r_cap, rho0, 2.0 * horizon + 1.0, n_max);
    config.validate()?;

    let mut report = VerificationReport::new("capture_time", EXACT_TOLERANCE);
    report.metric("capture_time_bound", horizon);
    report.metric("path_length_bound", path_bound);
    report.metric("sensing_bound", n_max as f64);

    let mut runs: Vec<(String, Option<EvaderChoice>, Outcome, f64, Vec<f64>)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let ev = random_scripted_evader(&mut trial_rng(seed, k), nu, config.t_f);
            let r = simulate(&config, &Prop1Pursuer, &ev, &FixedSides(Vec::new()))?;
            let seps = r.log.records().iter().map(|x| x.separation()).collect();
            Ok((
                format!("trial {k}"),
                Some(EvaderChoice::Scripted { pieces: ev.pieces }),
                r.outcome,
                r.pursuer.path_length(),
                seps,
            ))
        })
        .collect::<Result<_>>()?;
    let stationary = ScriptedEvader { pieces: Vec::new() };
    for (name, ev) in [
        ("radial", &RadialEvader as &dyn EvaderPolicy),
        ("stationary", &stationary as &dyn EvaderPolicy),
    ] {
        let r = simulate(&config, &Prop1Pursuer, ev, &FixedSides(Vec::new()))?;
        if let Some(t) = r.outcome.capture_time {
            report.metric(&format!("{name}_capture_time"), t);
        }
        let seps = r.log.records().iter().map(|x| x.separation()).collect();
        runs.push((name.to_string(), None, r.outcome, r.pursuer.path_length(), seps));
    }

    for (label, ev, outcome, path, seps) in runs {
        let (config, ev, label) = (&config, &ev, &label);
        let violation = |what: String| {
            move || Violation {
                description: format!("{label}: {what}"),
                config: Some(config.clone()),
                evader: ev.clone(),
                magnitude: 0.0,
            }
        };
        let t = outcome.capture_time.unwrap_or(f64::INFINITY);
        report.observe(if outcome.captured { f64::NEG_INFINITY } else { 1.0 }, violation("no capture".into()));
        report.observe(t - horizon, violation(format!("capture at {t} > {horizon}")));
        let used = outcome.sensing_times.len() as f64;
        report.observe(used - n_max as f64, violation(format!("{used} sensings > {n_max}")));
        report.observe(
            path - path_bound * (1.0 + EXACT_TOLERANCE),
            violation(format!("path {path} > {path_bound}")),
        );
        for pair in seps.windows(2) {
            report.observe(
                pair[1] - nu * pair[0],
                violation(format!("separation {} after {} breaks contraction", pair[1], pair[0])),
            );
        }
        report.metric_max("max_capture_time", if t.is_finite() { t } else { f64::MAX });
        report.metric_max("max_path_length", path);
        report.metric_max("max_sensings", used);
    }
    Ok(report.finish())
}

/// Fixed-step reference simulator.
///
/// Steps of at most `dt` (shortened to honour policy holds and `t_f`);
/// capture is declared at the first sampled instant with separation at most
/// `r_cap`.
pub fn dense_oracle(
    config: &GameConfig,
    pursuer: &dyn PursuerPolicy,
    evader: &dyn EvaderPolicy,
    sides: &dyn ThetaSource,
    dt: f64,
) -> Result<Outcome> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    config.validate()?;
    let params = GameParams::from_config(config);
    let mut log = SensingLog::new(config.x_p0, config.x_e0, config.n);
    let (mut p, mut e) = (config.x_p0, config.x_e0);
    let mut t = 0.0;
    loop {
        let d = p.distance(e);
        if d <= config.r_cap || t >= config.t_f {
            let captured = d <= config.r_cap;
            return Ok(Outcome {
                captured,
                capture_time: captured.then_some(t),
                final_distance: d,
                payoff: payoff_of(captured, d, &config.payoff())?,
                sensing_times: log.times()[1..].to_vec(),
            });
        }
        let action = loop {
            let info = PursuerInfo {
                time: t,
                position: p,
                log: &log,
                params,
                observed_evader: pursuer.needs_full_observation().then_some(e),
            };
            let a = pursuer.decide(&info)?;
            if !a.sense_now {
                break a;
            }
            log.record(t, e, p)?;
        };
        let e_action = evader.decide(
            &EvaderInfo {
                time: t,
                position: e,
                pursuer_position: p,
                log: &log,
                params,
            },
            sides,
        )?;
        // Policies are queried only at decision points, as in the exact
        // engine; in between, motion is sampled every `dt`.
        let event = (t + action.hold).min(t + e_action.hold).min(config.t_f);
        if !(event > t) {
            return Err(Error::Numerical(format!("dense oracle stalled at t = {t}")));
        }
        let (vp, ve) = (action.velocity(), e_action.velocity);
        while t < event {
            let step = dt.min(event - t);
            p += vp * step;
            e += ve * step;
            t = if event - t == step { event } else { t + step };
            if p.distance(e) <= config.r_cap {
                break;
            }
        }
    }
}

/// A random game with random strategies, for cross-checking simulators.
pub struct RandomScenario {
    pub config: GameConfig,
    pub pursuer: Box<dyn PursuerPolicy>,
    pub evader: Box<dyn EvaderPolicy>,
    pub evader_choice: Option<EvaderChoice>,
    pub sides: SeededSides,
}

pub fn random_scenario(seed: u64, trial: u64) -> RandomScenario {
    let mut rng = trial_rng(seed, trial);
    let nu = rng.gen_range(0.3..0.9);
    let r_cap = rng.gen_range(0.05..0.3);
    let rho0 = rng.gen_range(r_cap + 0.1..3.0);
    let x_p0 = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let x_e0 = x_p0 + Vec2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU)) * rho0;
    let config = GameConfig {
        nu,
        r_cap,
        x_p0,
        x_e0,
        t_f: rng.gen_range(0.2..5.0),
        n: rng.gen_range(0..=4),
        phi: Default::default(),
        seed: trial,
    };
    let pursuer: Box<dyn PursuerPolicy> = match rng.gen_range(0..4) {
        0 => Box::new(Prop1Pursuer),
        1 => Box::new(Thm1Pursuer),
        2 => Box::new(AleemPursuer),
        _ => Box::new(ContinuousPursuit::default()),
    };
    let (evader, evader_choice): (Box<dyn EvaderPolicy>, _) = match rng.gen_range(0..3) {
        0 => (Box::new(RadialEvader), None),
        1 => (Box::new(EquilibriumEvader), None),
        _ => {
            let ev = random_scripted_evader(&mut rng, nu, config.t_f);
            let choice = EvaderChoice::Scripted {
                pieces: ev.pieces.clone(),
            };
            (Box::new(ev), Some(choice))
        }
    };
    RandomScenario {
        config,
        pursuer,
        evader,
        evader_choice,
        sides: SeededSides { seed, stream: trial },
    }
}

/// Event-exact and dense simulators agree within `dt·(1 + ν)` on capture
/// times (or final distances when neither captures).
pub fn oracle_agreement_check(trials: u64, seed: u64, dt: f64) -> Result<VerificationReport> {
    let rows: Vec<(RandomScenario, Outcome, Outcome)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let sc = random_scenario(seed, k);
            let exact = simulate(&sc.config, sc.pursuer.as_ref(), sc.evader.as_ref(), &sc.sides)?.outcome;
            let dense = dense_oracle(&sc.config, sc.pursuer.as_ref(), sc.evader.as_ref(), &sc.sides, dt)?;
            Ok((sc, exact, dense))
        })
        .collect::<Result<_>>()?;
    let mut report = VerificationReport::new("oracle", 0.0);
    report.metric("dt", dt);
    let mut captures = 0.0;
    for (sc, exact, dense) in rows {
        let envelope = dt * (1.0 + sc.config.nu);
        let (excess, what) = match (exact.capture_time, dense.capture_time) {
            (Some(a), Some(b)) => {
                captures += 1.0;
                ((a - b).abs() - envelope, format!("capture times {a} vs {b}"))
            }
            (None, None) => (
                (exact.final_distance - dense.final_distance).abs() - envelope,
                format!("final distances {} vs {}", exact.final_distance, dense.final_distance),
            ),
            (a, b) => (1.0, format!("capture disagreement {a:?} vs {b:?}")),
        };
        report.observe(excess, || Violation {
            description: format!("{} vs {}: {what}", sc.pursuer.name(), sc.evader.name()),
            config: Some(sc.config.clone()),
            evader: sc.evader_choice.clone(),
            magnitude: 0.0,
        });
    }
    report.metric("captured_runs", captures);
    Ok(report.finish())
}

/// Tight-region games spanning every case of the value bound, with
/// ν = 0.7, r_cap = 0.1 unless stated.
pub fn standard_configs() -> Vec<GameConfig> {
    let base = [
        (0.14, 1.0, 0),
        (0.12, 0.5, 0),
        (1.0, 2.0, 0),
        (0.5, 3.0, 0),
        (2.0, 2.5, 0),
        (0.15, 1.0, 0),
        (0.16, 0.5, 0),
        (5.0, 2.0, 0),
        (1.0, 0.5, 0),
        (0.2, 5.0, 1),
        (5.0, 20.0, 10),
        (1.0, 5.0, 6),
        (5.0, 3.0, 2),
        (1.0, 1.5, 1),
        (2.0, 2.0, 3),
        (1.0, 5.0, 2),
        (1.0, 3.0, 1),
        (5.0, 14.7, 3),
        (0.5, 4.0, 2),
    ];
    let mut out: Vec<GameConfig> = base
        .iter()
        .map(|&(rho, tau, n)| GameConfig::head_on(0.7, 0.1, rho, tau, n))
        .collect();
    out.push(GameConfig::head_on(0.5, 0.1, 1.0, 3.0, 1));
    out.push(GameConfig::head_on(0.9, 0.1, 1.0, 1.0, 0));
    out
}

pub const SUITES: [&str; 5] = ["pursuer", "evader", "jensen", "capture_time", "oracle"];

/// Runs a named suite (or `all`) with default configurations.
pub fn run_suite(name: &str, trials: u64, seed: u64, oracle_dt: f64) -> Result<Vec<VerificationReport>> {
    match name {
        "pursuer" => {
            let reports = standard_configs()
                .iter()
                .map(|c| pursuer_guarantee_check(c, trials, seed))
                .collect::<Result<Vec<_>>>()?;
            Ok(vec![VerificationReport::merge("pursuer", reports)])
        }
        "evader" => {
            let reports = standard_configs()
                .iter()
                .map(|c| evader_guarantee_check(c, &DeviationGrid::square(c.t_f, 50)))
                .collect::<Result<Vec<_>>>()?;
            Ok(vec![VerificationReport::merge("evader", reports)])
        }
        "jensen" => {
            let (claimed, even) = jensen_sweep(trials, seed)?;
            Ok(vec![claimed, even])
        }
        "capture_time" => Ok(vec![capture_time_bound_check(0.7, 5.0, 0.1, trials, seed)?]),
        "oracle" => Ok(vec![oracle_agreement_check(trials.min(100), seed, oracle_dt)?]),
        "all" => {
            let mut out = Vec::new();
            for suite in SUITES {
                out.extend(run_suite(suite, trials, seed, oracle_dt)?);
            }
            Ok(out)
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown suite {other:?}; expected one of {SUITES:?} or \"all\""
        ))),
    }
}
