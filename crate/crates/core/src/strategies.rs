//! Sensing and motion policies.
//!
//! Every policy is a pure function of the deciding player's information plus,
//! for the evader, an explicit stream of ±1 side choices indexed by sensing
//! interval. A decision carries a `hold` duration: the policy promises not to
//! change its action for that long unless some other event intervenes, which
//! is what lets the engine propagate the game exactly between events.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{line_of_sight, perp, Side, Vec2};
use crate::value::{aleem_trigger_gain, in_omega0, wait_time};
use crate::{Error, Result};

/// Distance (and time) below which "has reached the sensed point" holds.
pub const ARRIVAL_TOLERANCE: f64 = 1e-9;

/// Re-decision period of the continuously-sensing pursuer.
pub const CONTINUOUS_RESAMPLE: f64 = 1e-3;

/// Share of the clearance `νρ − r_cap` the capture-avoiding heading keeps in
/// reserve.
pub const SAFE_MARGIN_FRACTION: f64 = 0.5;

/// One sensing instant: the evader's reported position together with the
/// pursuer's own position at that time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensingRecord {
    pub time: f64,
    pub evader: Vec2,
    pub pursuer: Vec2,
}

impl SensingRecord {
    pub fn separation(&self) -> f64 {
        self.pursuer.distance(self.evader)
    }

    /// r(t_k), the line of sight at the sensing instant.
    pub fn line_of_sight(&self) -> Result<Vec2> {
        line_of_sight(self.pursuer, self.evader)
    }
}

/// The sensing history `T(t)` with the positions observed at each instant.
///
/// The first record is the free observation at t₀ = 0 and does not consume
/// budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensingLog {
    records: Vec<SensingRecord>,
    budget_remaining: u32,
}

impl SensingLog {
    pub fn new(pursuer0: Vec2, evader0: Vec2, budget: u32) -> Self {
        Self {
            records: vec![SensingRecord {
                time: 0.0,
                evader: evader0,
                pursuer: pursuer0,
            }],
            budget_remaining: budget,
        }
    }

    pub fn records(&self) -> &[SensingRecord] {
        &self.records
    }

    pub fn last(&self) -> &SensingRecord {
        self.records.last().expect("log always holds t0")
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn budget_remaining(&self) -> u32 {
        self.budget_remaining
    }

    /// m(t): sensing requests made so far.
    pub fn sensings_used(&self) -> usize {
        self.records.len() - 1
    }

    /// Index of the current inter-sensing interval (0 before the first request).
    pub fn interval_index(&self) -> usize {
        self.records.len() - 1
    }

    pub fn record(&mut self, time: f64, evader: Vec2, pursuer: Vec2) -> Result<()> {
        if self.budget_remaining == 0 {
            return Err(Error::BudgetViolation { time });
        }
        if !(time >= self.last().time) {
            return Err(Error::Numerical(format!(
                "sensing times must not decrease: {} after {}",
                time,
                self.last().time
            )));
        }
        self.records.push(SensingRecord {
            time,
            evader,
            pursuer,
        });
        self.budget_remaining -= 1;
        Ok(())
    }
}

/// Game constants both players know.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameParams {
    pub nu: f64,
    pub r_cap: f64,
    pub t_f: f64,
    pub n: u32,
}

impl GameParams {
    pub fn from_config(cfg: &crate::config::GameConfig) -> Self {
        Self {
            nu: cfg.nu,
            r_cap: cfg.r_cap,
            t_f: cfg.t_f,
            n: cfg.n,
        }
    }
}

/// What the pursuer knows: its own trajectory and the sensed evader positions.
///
/// `observed_evader` is only filled for policies that ask for continuous
/// observation (the unconstrained baseline).
#[derive(Clone, Copy, Debug)]
pub struct PursuerInfo<'a> {
    pub time: f64,
    pub position: Vec2,
    pub log: &'a SensingLog,
    pub params: GameParams,
    pub observed_evader: Option<Vec2>,
}

/// What the evader knows: both positions at all times and the sensing history.
#[derive(Clone, Copy, Debug)]
pub struct EvaderInfo<'a> {
    pub time: f64,
    pub position: Vec2,
    pub pursuer_position: Vec2,
    pub log: &'a SensingLog,
    pub params: GameParams,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PursuerAction {
    /// Unit heading.
    pub heading: Vec2,
    /// γ ∈ [0, 1].
    pub speed_fraction: f64,
    /// Request a sensing now. The engine records it and asks again; the other
    /// fields are then ignored.
    pub sense_now: bool,
    /// How long this action stays valid absent other events.
    pub hold: f64,
}

impl PursuerAction {
    pub fn velocity(&self) -> Vec2 {
        self.heading * self.speed_fraction
    }

    fn moving(heading: Vec2, hold: f64) -> Self {
        Self {
            heading,
            speed_fraction: 1.0,
            sense_now: false,
            hold,
        }
    }

    fn waiting(heading: Vec2, hold: f64) -> Self {
        Self {
            heading,
            speed_fraction: 0.0,
            sense_now: false,
            hold,
        }
    }

    fn sense(heading: Vec2) -> Self {
        Self {
            heading,
            speed_fraction: 0.0,
            sense_now: true,
            hold: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvaderAction {
    pub velocity: Vec2,
    pub hold: f64,
}

/// Source of the evader's per-interval side choices θ_i.
pub trait ThetaSource: Sync {
    fn side(&self, interval: usize) -> Side;
}

/// An explicit θ sequence; intervals past its end use `Ccw`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedSides(pub Vec<Side>);

impl FixedSides {
    /// Side sequence encoded by the low `len` bits of `mask` (bit i set ⇒ `Cw`).
    pub fn from_mask(mask: u64, len: usize) -> Self {
        Self((0..len).map(|i| Side::from_bit(mask >> i & 1 == 1)).collect())
    }

    pub fn constant(side: Side, len: usize) -> Self {
        Self(vec![side; len])
    }
}

impl ThetaSource for FixedSides {
    fn side(&self, interval: usize) -> Side {
        self.0.get(interval).copied().unwrap_or(Side::Ccw)
    }
}

/// Fair coin flips addressed by `(seed, stream, interval)`, so any trial's
/// sequence can be regenerated without replaying the others.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeededSides {
    pub seed: u64,
    pub stream: u64,
}

impl ThetaSource for SeededSides {
    fn side(&self, interval: usize) -> Side {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(interval as u128 * 2);
        Side::from_bit(rng.next_u32() & 1 == 1)
    }
}

pub trait PursuerPolicy: Send + Sync {
    fn name(&self) -> &str;
    fn decide(&self, info: &PursuerInfo<'_>) -> Result<PursuerAction>;
    fn needs_full_observation(&self) -> bool {
        false
    }
}

pub trait EvaderPolicy: Send + Sync {
    fn name(&self) -> &str;
    fn decide(&self, info: &EvaderInfo<'_>, sides: &dyn ThetaSource) -> Result<EvaderAction>;
}

// ---------------------------------------------------------------------------
// Pursuer policies
// ---------------------------------------------------------------------------

/// Pure pursuit with free, continuous observation: head along r(t) at full
/// speed, re-deciding every `resample` time units.
pub fn pursuer_continuous(info: &PursuerInfo<'_>) -> Result<PursuerAction> {
    ContinuousPursuit::default().decide(info)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuousPursuit {
    pub resample: f64,
}

impl Default for ContinuousPursuit {
    fn default() -> Self {
        Self {
            resample: CONTINUOUS_RESAMPLE,
        }
    }
}

impl PursuerPolicy for ContinuousPursuit {
    fn name(&self) -> &str {
        "continuous"
    }

    fn decide(&self, info: &PursuerInfo<'_>) -> Result<PursuerAction> {
        let evader = info.observed_evader.ok_or_else(|| {
            Error::Precondition("continuous pursuit needs the evader's current position".into())
        })?;
        Ok(PursuerAction::moving(line_of_sight(info.position, evader)?, self.resample))
    }

    fn needs_full_observation(&self) -> bool {
        true
    }
}

/// Once νρ_k ≤ r_cap, capture is certain by running along
/// r(t_k), so no more sensing is needed.
fn no_sensing_needed(info: &PursuerInfo<'_>) -> bool {
    info.params.nu * info.log.last().separation() <= info.params.r_cap
}

/// Moves toward the last sensed point along r(t_k); `None` once there.
fn approach_last_sensed(info: &PursuerInfo<'_>) -> Result<Option<PursuerAction>> {
    let last = info.log.last();
    let heading = last.line_of_sight()?;
    let remaining = info.position.distance(last.evader);
    if remaining > ARRIVAL_TOLERANCE {
        Ok(Some(PursuerAction::moving(heading, remaining)))
    } else {
        Ok(None)
    }
}

/// Run to the last sensed evader position and request a sensing on arrival.
pub fn pursuer_prop1(info: &PursuerInfo<'_>) -> Result<PursuerAction> {
    let heading = info.log.last().line_of_sight()?;
    if no_sensing_needed(info) {
        return Ok(PursuerAction::moving(heading, f64::INFINITY));
    }
    if let Some(action) = approach_last_sensed(info)? {
        return Ok(action);
    }
    if info.log.budget_remaining() > 0 {
        Ok(PursuerAction::sense(heading))
    } else {
        Ok(PursuerAction::waiting(heading, f64::INFINITY))
    }
}

/// Budget- and horizon-aware pursuer.
///
/// At each sensing instant with separation ρ, time left τ and ℓ requests
/// left: in the wait region it runs to the sensed point, idles for
/// `τ/B(ℓ) − ρ`, then senses; elsewhere it behaves like [`pursuer_prop1`].
/// With no budget left it stops at the sensed point (or never reaches it when
/// τ < ρ, which is the same as running along r(t_k) until the end).
pub fn pursuer_thm1(info: &PursuerInfo<'_>) -> Result<PursuerAction> {
    let last = info.log.last();
    let heading = last.line_of_sight()?;
    if no_sensing_needed(info) {
        return Ok(PursuerAction::moving(heading, f64::INFINITY));
    }
    if let Some(action) = approach_last_sensed(info)? {
        return Ok(action);
    }
    let ell = info.log.budget_remaining();
    if ell == 0 {
        return Ok(PursuerAction::waiting(heading, f64::INFINITY));
    }
    let p = info.params;
    let rho = last.separation();
    let tau = p.t_f - last.time;
    if let Some(w) = wait_time(rho, tau, ell, p.nu, p.r_cap) {
        let sense_at = last.time + rho + w;
        let left = sense_at - info.time;
        if left > ARRIVAL_TOLERANCE {
            return Ok(PursuerAction::waiting(heading, left));
        }
    }
    Ok(PursuerAction::sense(heading))
}

/// Self-triggered baseline: run along r(t_k) at full speed and sense again
/// `f(ν)·ρ_k` after the last sensing, for as long as budget remains.
pub fn pursuer_aleem(info: &PursuerInfo<'_>) -> Result<PursuerAction> {
    let last = info.log.last();
    let heading = last.line_of_sight()?;
    if info.log.budget_remaining() == 0 {
        return Ok(PursuerAction::moving(heading, f64::INFINITY));
    }
    let gain = aleem_trigger_gain(info.params.nu)?;
    let left = last.time + gain * last.separation() - info.time;
    if left > ARRIVAL_TOLERANCE {
        Ok(PursuerAction::moving(heading, left))
    } else {
        Ok(PursuerAction::sense(heading))
    }
}

macro_rules! fn_pursuer {
    ($ty:ident, $name:literal, $f:path) => {
        #[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
        pub struct $ty;

        impl PursuerPolicy for $ty {
            fn name(&self) -> &str {
                $name
            }

            fn decide(&self, info: &PursuerInfo<'_>) -> Result<PursuerAction> {
                $f(info)
            }
        }
    };
}

fn_pursuer!(Prop1Pursuer, "prop1", pursuer_prop1);
fn_pursuer!(Thm1Pursuer, "thm1", pursuer_thm1);
fn_pursuer!(AleemPursuer, "aleem", pursuer_aleem);

// ---------------------------------------------------------------------------
// Evader policies
// ---------------------------------------------------------------------------

/// Flee along the current line of sight at full speed.
pub fn evader_radial(info: &EvaderInfo<'_>) -> Result<EvaderAction> {
    let r = line_of_sight(info.pursuer_position, info.position)?;
    Ok(EvaderAction {
        velocity: r * info.params.nu,
        hold: f64::INFINITY,
    })
}

/// Closest approach between a pursuer running from distance `rho` to the
/// evader's starting point and an evader leaving that point at speed `nu`
/// with heading `(cos ψ, sin ψ)` in the line-of-sight frame.
pub fn closest_approach(rho: f64, nu: f64, psi: f64) -> f64 {
    // d(s) = (ρ + s(ν cos ψ − 1), ν s sin ψ), s ∈ [0, ρ]
    let k = nu * psi.cos() - 1.0;
    let lateral = nu * psi.sin();
    let quad = k * k + lateral * lateral;
    let s = (-rho * k / quad).clamp(0.0, rho);
    ((rho + s * k).powi(2) + (lateral * s).powi(2)).sqrt()
}

/// Angle from r(t_k) of the most sideways heading whose closest approach to
/// the inbound pursuer still clears `r_cap` with margin. Requires νρ > r_cap
/// (ψ = 0, straight flight, then clears by νρ − r_cap).
pub fn safe_heading_angle(rho: f64, nu: f64, r_cap: f64) -> Result<f64> {
    if !(nu * rho > r_cap) {
        return Err(Error::Precondition(format!(
            "no capture-free heading when nu*rho = {} <= r_cap = {}",
            nu * rho,
            r_cap
        )));
    }
    let target = r_cap + SAFE_MARGIN_FRACTION * (nu * rho - r_cap);
    let right = std::f64::consts::FRAC_PI_2;
    if closest_approach(rho, nu, right) >= target {
        return Ok(right);
    }
    let (mut lo, mut hi) = (0.0, right);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if closest_approach(rho, nu, mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn sideways(r: Vec2, side: Side, psi: f64, nu: f64) -> Result<Vec2> {
    Ok((r * psi.cos() + perp(r, side)? * psi.sin()) * nu)
}

/// Equilibrium evader.
///
/// In interval i (since sensing t_i, separation ρ_i, time left τ_i) the evader
/// side-steps along θ_i·r(t_i)^⊥ at full speed. Exceptions, all keyed on the
/// state at t_i:
/// - τ_i ≤ ρ_i: the pursuer cannot reach the sensed point before the end, so
///   flee along r(t_i) (this is the final interval of the time-limited case);
/// - νρ_i ≤ √(1+ν²)·r_cap < … : a full side-step would be caught on the
///   pursuer's inbound leg, so take the most sideways heading that clears
///   (side still θ_i); when νρ_i ≤ r_cap capture cannot be avoided and the
///   evader flees radially.
pub fn evader_equilibrium(info: &EvaderInfo<'_>, sides: &dyn ThetaSource) -> Result<EvaderAction> {
    let last = info.log.last();
    let p = info.params;
    let r = last.line_of_sight()?;
    let rho = last.separation();
    let tau = p.t_f - last.time;
    let side = sides.side(info.log.interval_index());
    let velocity = if tau <= rho || p.nu * rho <= p.r_cap {
        r * p.nu
    } else if p.nu * rho <= (1.0 + p.nu * p.nu).sqrt() * p.r_cap {
        sideways(r, side, safe_heading_angle(rho, p.nu, p.r_cap)?, p.nu)?
    } else {
        perp(r, side)? * p.nu
    };
    Ok(EvaderAction {
        velocity,
        hold: f64::INFINITY,
    })
}

/// Capture-avoiding evader for states inside Ω₀, where a pure side-step would
/// be caught by the inbound pursuer.
///
/// Takes the most sideways straight heading that keeps the closest approach
/// above `r_cap` with margin, on side θ_i.
pub fn evader_safe_heuristic(info: &EvaderInfo<'_>, sides: &dyn ThetaSource) -> Result<EvaderAction> {
    let last = info.log.last();
    let p = info.params;
    let rho = last.separation();
    let tau = p.t_f - last.time;
    if !in_omega0(rho, tau, p.nu, p.r_cap) {
        return Err(Error::Precondition(format!(
            "state (rho = {rho}, tau = {tau}) is outside Omega0"
        )));
    }
    let psi = safe_heading_angle(rho, p.nu, p.r_cap)?;
    let side = sides.side(info.log.interval_index());
    Ok(EvaderAction {
        velocity: sideways(last.line_of_sight()?, side, psi, p.nu)?,
        hold: f64::INFINITY,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RadialEvader;

impl EvaderPolicy for RadialEvader {
    fn name(&self) -> &str {
        "radial"
    }

    fn decide(&self, info: &EvaderInfo<'_>, _sides: &dyn ThetaSource) -> Result<EvaderAction> {
        evader_radial(info)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EquilibriumEvader;

impl EvaderPolicy for EquilibriumEvader {
    fn name(&self) -> &str {
        "equilibrium"
    }

    fn decide(&self, info: &EvaderInfo<'_>, sides: &dyn ThetaSource) -> Result<EvaderAction> {
        evader_equilibrium(info, sides)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SafeHeuristicEvader;

impl EvaderPolicy for SafeHeuristicEvader {
    fn name(&self) -> &str {
        "safe_heuristic"
    }

    fn decide(&self, info: &EvaderInfo<'_>, sides: &dyn ThetaSource) -> Result<EvaderAction> {
        evader_safe_heuristic(info, sides)
    }
}

/// Side-step along θ·r(t_i)^⊥ in every interval, with no exceptions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PerpendicularEvader {
    pub side: Side,
}

impl EvaderPolicy for PerpendicularEvader {
    fn name(&self) -> &str {
        "perpendicular"
    }

    fn decide(&self, info: &EvaderInfo<'_>, _sides: &dyn ThetaSource) -> Result<EvaderAction> {
        Ok(EvaderAction {
            velocity: perp(info.log.last().line_of_sight()?, self.side)? * info.params.nu,
            hold: f64::INFINITY,
        })
    }
}

/// One piece of a scripted evader: `velocity` until time `until`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScriptPiece {
    pub until: f64,
    pub velocity: Vec2,
}

/// Open-loop evader following a fixed list of velocity pieces; it stands
/// still after the last piece ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScriptedEvader {
    pub pieces: Vec<ScriptPiece>,
}

impl EvaderPolicy for ScriptedEvader {
    fn name(&self) -> &str {
        "scripted"
    }

    fn decide(&self, info: &EvaderInfo<'_>, _sides: &dyn ThetaSource) -> Result<EvaderAction> {
        let current = self
            .pieces
            .iter()
            .find(|piece| piece.until - info.time > ARRIVAL_TOLERANCE);
        let Some(piece) = current else {
            return Ok(EvaderAction {
                velocity: Vec2::ZERO,
                hold: f64::INFINITY,
            });
        };
        let speed = piece.velocity.norm();
        if speed > info.params.nu * (1.0 + 1e-12) {
            return Err(Error::SpeedLimit {
                player: "evader",
                speed,
                cap: info.params.nu,
            });
        }
        Ok(EvaderAction {
            velocity: piece.velocity,
            hold: piece.until - info.time,
        })
    }
}

/// Pursuer selection by name in a scenario file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PursuerChoice {
    Continuous,
    Prop1,
    #[default]
    Thm1,
    Aleem,
}

impl PursuerChoice {
    pub fn build(self) -> Box<dyn PursuerPolicy> {
        match self {
            PursuerChoice::Continuous => Box::new(ContinuousPursuit::default()),
            PursuerChoice::Prop1 => Box::new(Prop1Pursuer),
            PursuerChoice::Thm1 => Box::new(Thm1Pursuer),
            PursuerChoice::Aleem => Box::new(AleemPursuer),
        }
    }
}

/// Evader selection by name in a scenario file. `scripted` carries its
/// pieces: `{"scripted": {"pieces": [{"until": 1.0, "velocity": [0, 0.5]}]}}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaderChoice {
    Radial,
    #[default]
    Equilibrium,
    SafeHeuristic,
    Scripted { pieces: Vec<ScriptPiece> },
}

impl EvaderChoice {
    pub fn build(&self) -> Box<dyn EvaderPolicy> {
        match self {
            EvaderChoice::Radial => Box::new(RadialEvader),
            EvaderChoice::Equilibrium => Box::new(EquilibriumEvader),
            EvaderChoice::SafeHeuristic => Box::new(SafeHeuristicEvader),
            EvaderChoice::Scripted { pieces } => Box::new(ScriptedEvader {
                pieces: pieces.clone(),
            }),
        }
    }
}
