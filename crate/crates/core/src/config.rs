//! Game parameters and the speed normalisation that maps a physical game onto
//! the frame where the pursuer's top speed is 1.

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::payoff::{PayoffKind, PayoffSpec};
use crate::{Error, Result};

/// The `phi` object of the JSON config: only the shape is configurable, the
/// capture radius comes from `r_cap`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhiConfig {
    pub kind: PayoffKind,
}

/// Every parameter of one game, in the normalised frame.
///
/// JSON keys are fixed: `nu, r_cap, x_p0, x_e0, t_f, n, phi, seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    /// Evader-to-pursuer speed ratio, in (0, 1).
    pub nu: f64,
    pub r_cap: f64,
    pub x_p0: Vec2,
    pub x_e0: Vec2,
    /// Game duration.
    pub t_f: f64,
    /// Sensing budget, not counting the free observation at t = 0.
    pub n: u32,
    #[serde(default)]
    pub phi: PhiConfig,
    #[serde(default)]
    pub seed: u64,
}

impl GameConfig {
    /// A game with the pursuer at the origin and the evader at `(rho0, 0)`.
    pub fn head_on(nu: f64, r_cap: f64, rho0: f64, t_f: f64, n: u32) -> Self {
        Self {
            nu,
            r_cap,
            x_p0: Vec2::ZERO,
            x_e0: Vec2::new(rho0, 0.0),
            t_f,
            n,
            phi: PhiConfig::default(),
            seed: 0,
        }
    }

    pub fn with_phi(mut self, kind: PayoffKind) -> Self {
        self.phi = PhiConfig { kind };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "nu must lie in (0, 1), got {}",
                self.nu
            )));
        }
        if !(self.r_cap > 0.0) || !self.r_cap.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "r_cap must be positive, got {}",
                self.r_cap
            )));
        }
        if !(self.t_f >= 0.0) || !self.t_f.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "t_f must be finite and non-negative, got {}",
                self.t_f
            )));
        }
        if !self.x_p0.is_finite() || !self.x_e0.is_finite() {
            return Err(Error::InvalidConfig("initial positions must be finite".into()));
        }
        Ok(())
    }

    /// Initial separation ρ₀.
    pub fn rho0(&self) -> f64 {
        self.x_p0.distance(self.x_e0)
    }

    pub fn payoff(&self) -> PayoffSpec {
        PayoffSpec {
            kind: self.phi.kind,
            r_cap: self.r_cap,
        }
    }
}

/// Top speeds in physical units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawSpeeds {
    pub v_p_max: f64,
    pub v_e_max: f64,
}

/// A game stated in physical units, before normalisation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalGame {
    pub r_cap: f64,
    pub x_p0: Vec2,
    pub x_e0: Vec2,
    pub t_f: f64,
    pub n: u32,
    #[serde(default)]
    pub phi: PhiConfig,
    #[serde(default)]
    pub seed: u64,
}

/// Time dilation `x̄(s) = x(s / c)`, `v̄(s) = v(s / c) / c` with `c = v_p_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeScaling {
    pub c: f64,
}

impl TimeScaling {
    pub fn to_normalized_time(&self, t: f64) -> f64 {
        self.c * t
    }

    pub fn to_physical_time(&self, s: f64) -> f64 {
        s / self.c
    }

    pub fn to_normalized_velocity(&self, v: Vec2) -> Vec2 {
        v * (1.0 / self.c)
    }

    pub fn to_physical_velocity(&self, v: Vec2) -> Vec2 {
        v * self.c
    }
}

/// Normalise a physical game so the pursuer's top speed becomes 1.
///
/// Positions are unchanged; durations are multiplied by `c = v_p_max`.
pub fn normalize_speeds(raw: RawSpeeds, game: &PhysicalGame) -> Result<(GameConfig, TimeScaling)> {
    if !(raw.v_p_max > 0.0) || !(raw.v_e_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "speeds must be positive, got v_p_max = {}, v_e_max = {}",
            raw.v_p_max, raw.v_e_max
        )));
    }
    if raw.v_e_max >= raw.v_p_max {
        return Err(Error::SlowerPursuer {
            v_p_max: raw.v_p_max,
            v_e_max: raw.v_e_max,
        });
    }
    let scaling = TimeScaling { c: raw.v_p_max };
    let config = GameConfig {
        nu: raw.v_e_max / raw.v_p_max,
        r_cap: game.r_cap,
        x_p0: game.x_p0,
        x_e0: game.x_e0,
        t_f: scaling.to_normalized_time(game.t_f),
        n: game.n,
        phi: game.phi,
        seed: game.seed,
    };
    config.validate()?;
    Ok((config, scaling))
}
