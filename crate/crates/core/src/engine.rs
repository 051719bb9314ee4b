//! Event-exact simulation.
//!
//! Both players hold piecewise-constant velocities, so the separation is a
//! quadratic in time on every step and capture is found in closed form. Steps
//! end at the earliest of: a policy's hold expiring, capture, or `t_f`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{GameConfig, PhiConfig};
use crate::geom::Vec2;
use crate::payoff::{phi_eval, PayoffSpec};
use crate::strategies::{
    EvaderChoice, EvaderInfo, EvaderPolicy, FixedSides, GameParams, PursuerChoice, PursuerInfo,
    PursuerPolicy, SeededSides, SensingLog, ThetaSource,
};
use crate::{Error, Result};

/// Relative slack on the discriminant sign in [`detect_capture`].
pub const DISCRIMINANT_TOLERANCE: f64 = 1e-12;

/// Relative slack on the speed caps.
pub const SPEED_TOLERANCE: f64 = 1e-12;

/// Safety net against policies that never let time advance.
pub const MAX_EVENTS: usize = 20_000_000;

/// Largest number of randomised intervals enumerated exactly.
pub const MAX_ENUMERATED_INTERVALS: usize = 20;

/// Constant-velocity motion over `[t_start, t_end]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub start: Vec2,
    pub velocity: Vec2,
}

impl Segment {
    pub fn position_at(&self, t: f64) -> Vec2 {
        self.start + self.velocity * (t - self.t_start)
    }

    pub fn end(&self) -> Vec2 {
        self.position_at(self.t_end)
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// Time-contiguous segments of one player.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub segments: Vec<Segment>,
}

impl Trajectory {
    pub fn path_length(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.velocity.norm() * s.duration())
            .sum()
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t_end)
    }

    /// Position at time `t`, clamped to the covered interval. `None` when
    /// the trajectory is empty.
    pub fn position_at(&self, t: f64) -> Option<Vec2> {
        let first = self.segments.first()?;
        if t <= first.t_start {
            return Some(first.start);
        }
        let idx = self.segments.partition_point(|s| s.t_end < t);
        let seg = self.segments.get(idx).or(self.segments.last())?;
        Some(seg.position_at(t.min(seg.t_end)))
    }

    pub fn max_speed(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.velocity.norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub captured: bool,
    pub capture_time: Option<f64>,
    /// Separation when the game ended (capture instant or `t_f`).
    pub final_distance: f64,
    pub payoff: f64,
    /// Times of the sensing requests; the free observation at t = 0 is not
    /// listed.
    pub sensing_times: Vec<f64>,
}

impl Outcome {
    /// Copy with every number rounded to 9 significant digits.
    pub fn rounded(&self) -> Outcome {
        Outcome {
            captured: self.captured,
            capture_time: self.capture_time.map(round_sig9),
            final_distance: round_sig9(self.final_distance),
            payoff: round_sig9(self.payoff),
            sensing_times: self.sensing_times.iter().copied().map(round_sig9).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationResult {
    pub outcome: Outcome,
    pub pursuer: Trajectory,
    pub evader: Trajectory,
    pub log: SensingLog,
}

/// 0 when captured, φ(final distance) otherwise.
pub fn payoff_of(captured: bool, final_distance: f64, phi: &PayoffSpec) -> Result<f64> {
    if captured {
        Ok(0.0)
    } else {
        phi_eval(phi, final_distance)
    }
}

/// Earliest time in the overlap of the two segments at which the separation
/// is at most `r_cap`.
pub fn detect_capture(p: &Segment, e: &Segment, r_cap: f64) -> Option<f64> {
    let t0 = p.t_start.max(e.t_start);
    let t1 = p.t_end.min(e.t_end);
    if t1 < t0 {
        return None;
    }
    let d0 = e.position_at(t0) - p.position_at(t0);
    let c = d0.norm_sq() - r_cap * r_cap;
    if c <= 0.0 {
        return Some(t0);
    }
    let dv = e.velocity - p.velocity;
    let a = dv.norm_sq();
    let b = 2.0 * d0.dot(dv);
    // Separation is non-decreasing on the overlap unless it is closing.
    if a == 0.0 || b >= 0.0 {
        return None;
    }
    let mut disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc >= -DISCRIMINANT_TOLERANCE * b * b {
            disc = 0.0;
        } else {
            return None;
        }
    }
    // b < 0, so q > 0 and c / q is the smaller root without cancellation.
    let q = -0.5 * (b - disc.sqrt());
    let s = c / q;
    (t0 + s <= t1).then_some(t0 + s)
}

fn check_speed(player: &'static str, v: Vec2, cap: f64) -> Result<()> {
    let speed = v.norm();
    if !speed.is_finite() || speed > cap * (1.0 + SPEED_TOLERANCE) {
        return Err(Error::SpeedLimit { player, speed, cap });
    }
    Ok(())
}

fn check_hold(player: &str, hold: f64) -> Result<()> {
    if hold.is_nan() || hold <= 0.0 {
        return Err(Error::Numerical(format!("{player} policy returned hold {hold}")));
    }
    Ok(())
}

/// Lets the pursuer sense as often as it asks at the current instant and
/// returns its resulting motion decision.
fn pursuer_decision(
    pursuer: &dyn PursuerPolicy,
    log: &mut SensingLog,
    t: f64,
    p: Vec2,
    e: Vec2,
    params: GameParams,
) -> Result<(Vec2, f64)> {
    loop {
        let info = PursuerInfo {
            time: t,
            position: p,
            log,
            params,
            observed_evader: pursuer.needs_full_observation().then_some(e),
        };
        let action = pursuer.decide(&info)?;
        if action.sense_now {
            log.record(t, e, p)?;
            continue;
        }
        if !(0.0..=1.0).contains(&action.speed_fraction) {
            return Err(Error::SpeedLimit {
                player: "pursuer",
                speed: action.speed_fraction,
                cap: 1.0,
            });
        }
        let v = action.velocity();
        check_speed("pursuer", v, 1.0)?;
        check_hold("pursuer", action.hold)?;
        return Ok((v, action.hold));
    }
}

fn evader_decision(
    evader: &dyn EvaderPolicy,
    sides: &dyn ThetaSource,
    log: &SensingLog,
    t: f64,
    p: Vec2,
    e: Vec2,
    params: GameParams,
) -> Result<(Vec2, f64)> {
    let info = EvaderInfo {
        time: t,
        position: e,
        pursuer_position: p,
        log,
        params,
    };
    let action = evader.decide(&info, sides)?;
    check_speed("evader", action.velocity, params.nu)?;
    check_hold("evader", action.hold)?;
    Ok((action.velocity, action.hold))
}

fn finish(
    config: &GameConfig,
    captured_at: Option<f64>,
    p: Vec2,
    e: Vec2,
    log: SensingLog,
    pursuer: Trajectory,
    evader: Trajectory,
) -> Result<SimulationResult> {
    let final_distance = p.distance(e);
    let outcome = Outcome {
        captured: captured_at.is_some(),
        capture_time: captured_at,
        final_distance,
        payoff: payoff_of(captured_at.is_some(), final_distance, &config.payoff())?,
        sensing_times: log.times()[1..].to_vec(),
    };
    Ok(SimulationResult {
        outcome,
        pursuer,
        evader,
        log,
    })
}

/// Plays one game to capture or `t_f`.
///
/// Deterministic in `(config, policies, sides)`. Capture takes priority over
/// the end of the game, which takes priority over a sensing request at the
/// same instant.
pub fn simulate(
    config: &GameConfig,
    pursuer: &dyn PursuerPolicy,
    evader: &dyn EvaderPolicy,
    sides: &dyn ThetaSource,
) -> Result<SimulationResult> {
    config.validate()?;
    let params = GameParams::from_config(config);
    let mut log = SensingLog::new(config.x_p0, config.x_e0, config.n);
    let (mut p, mut e) = (config.x_p0, config.x_e0);
    let mut p_traj = Trajectory::default();
    let mut e_traj = Trajectory::default();
    let mut t = 0.0;

    if p.distance(e) <= config.r_cap {
        return finish(config, Some(0.0), p, e, log, p_traj, e_traj);
    }

    for _ in 0..MAX_EVENTS {
        if t >= config.t_f {
            return finish(config, None, p, e, log, p_traj, e_traj);
        }
        let (vp, p_hold) = pursuer_decision(pursuer, &mut log, t, p, e, params)?;
        let (ve, e_hold) = evader_decision(evader, sides, &log, t, p, e, params)?;
        let next = (t + p_hold).min(t + e_hold).min(config.t_f);
        if !(next > t) {
            return Err(Error::Numerical(format!("simulation stalled at t = {t}")));
        }
        let mut p_seg = Segment {
            t_start: t,
            t_end: next,
            start: p,
            velocity: vp,
        };
        let mut e_seg = Segment {
            t_start: t,
            t_end: next,
            start: e,
            velocity: ve,
        };
        let capture = detect_capture(&p_seg, &e_seg, config.r_cap);
        let t_end = capture.unwrap_or(next);
        p_seg.t_end = t_end;
        e_seg.t_end = t_end;
        p = p_seg.end();
        e = e_seg.end();
        if !p.is_finite() || !e.is_finite() {
            return Err(Error::Numerical(format!("non-finite position at t = {t_end}")));
        }
        if t_end > t {
            p_traj.segments.push(p_seg);
            e_traj.segments.push(e_seg);
        }
        t = t_end;
        if capture.is_some() {
            return finish(config, capture, p, e, log, p_traj, e_traj);
        }
    }
    Err(Error::Numerical(format!(
        "event limit {MAX_EVENTS} reached at t = {t}"
    )))
}

/// Exact E[J] for a given pursuer against `evader`, averaging over all
/// `2^(n+1)` side sequences (one side per inter-sensing interval).
pub fn exact_expected_payoff(
    config: &GameConfig,
    pursuer: &dyn PursuerPolicy,
    evader: &dyn EvaderPolicy,
) -> Result<f64> {
    let intervals = config.n as usize + 1;
    if intervals > MAX_ENUMERATED_INTERVALS {
        return Err(Error::EnumerationCap {
            intervals,
            cap: MAX_ENUMERATED_INTERVALS,
        });
    }
    let count = 1u64 << intervals;
    let payoffs = (0..count)
        .into_par_iter()
        .map(|mask| {
            let sides = FixedSides::from_mask(mask, intervals);
            simulate(config, pursuer, evader, &sides).map(|r| r.outcome.payoff)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(payoffs.iter().sum::<f64>() / count as f64)
}

/// Monte Carlo estimate of E[J] with independent fair sides per interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub samples: u64,
}

pub fn monte_carlo_expected_payoff(
    config: &GameConfig,
    pursuer: &dyn PursuerPolicy,
    evader: &dyn EvaderPolicy,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let payoffs = (0..samples)
        .into_par_iter()
        .map(|stream| {
            let sides = SeededSides { seed, stream };
            simulate(config, pursuer, evader, &sides).map(|r| r.outcome.payoff)
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = samples as f64;
    let mean = payoffs.iter().sum::<f64>() / n;
    let var = payoffs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MonteCarloEstimate {
        mean,
        standard_error: (var / n).sqrt(),
        samples,
    })
}

/// A game plus named strategies, as read from a JSON scenario file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    #[serde(flatten)]
    pub game: GameConfig,
    pub pursuer: PursuerChoice,
    pub evader: EvaderChoice,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    nu: f64,
    r_cap: f64,
    x_p0: Vec2,
    x_e0: Vec2,
    t_f: f64,
    n: u32,
    #[serde(default)]
    phi: PhiConfig,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    pursuer: PursuerChoice,
    #[serde(default)]
    evader: EvaderChoice,
}

impl Scenario {
    /// Parses a scenario; `pursuer` defaults to `thm1` and `evader` to
    /// `equilibrium`.
    pub fn from_json(text: &str) -> std::result::Result<Scenario, serde_json::Error> {
        let f: ScenarioFile = serde_json::from_str(text)?;
        Ok(Scenario {
            game: GameConfig {
                nu: f.nu,
                r_cap: f.r_cap,
                x_p0: f.x_p0,
                x_e0: f.x_e0,
                t_f: f.t_f,
                n: f.n,
                phi: f.phi,
                seed: f.seed,
            },
            pursuer: f.pursuer,
            evader: f.evader,
        })
    }

    /// Simulates with sides drawn from the configured seed.
    pub fn run(&self) -> Result<SimulationResult> {
        let sides = SeededSides {
            seed: self.game.seed,
            stream: 0,
        };
        simulate(
            &self.game,
            self.pursuer.build().as_ref(),
            self.evader.build().as_ref(),
            &sides,
        )
    }
}

/// `x` rounded to 9 significant digits.
pub fn round_sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Shortest decimal text of `x` after rounding to 9 significant digits.
pub fn format_sig9(x: f64) -> String {
    round_sig9(x).to_string()
}

/// Writes both trajectories as CSV: `player,t_start,t_end,x0,y0,vx,vy`.
pub fn write_trajectory_csv<W: Write>(out: W, pursuer: &Trajectory, evader: &Trajectory) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["player", "t_start", "t_end", "x0", "y0", "vx", "vy"])?;
    for (player, traj) in [("pursuer", pursuer), ("evader", evader)] {
        for s in &traj.segments {
            w.write_record([
                player.to_string(),
                format_sig9(s.t_start),
                format_sig9(s.t_end),
                format_sig9(s.start.x),
                format_sig9(s.start.y),
                format_sig9(s.velocity.x),
                format_sig9(s.velocity.y),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod invariants;
