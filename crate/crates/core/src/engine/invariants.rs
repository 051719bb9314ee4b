use proptest::prelude::*;

use crate::config::GameConfig;
use crate::engine::simulate;
use crate::geom::{Side, Vec2};
use crate::strategies::{
    pursuer_aleem, pursuer_prop1, pursuer_thm1, AleemPursuer, EquilibriumEvader, FixedSides, GameParams,
    Prop1Pursuer, PursuerInfo, PursuerPolicy, RadialEvader, ScriptPiece, ScriptedEvader, SensingLog,
    Thm1Pursuer,
};
use crate::value::wait_time;

fn pieces() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.05..3.0f64, 0.0..std::f64::consts::TAU, 0.0..=1.0f64), 1..6)
}

fn scripted(nu: f64, raw: &[(f64, f64, f64)]) -> ScriptedEvader {
    let mut until = 0.0;
    ScriptedEvader {
        pieces: raw
            .iter()
            .map(|&(dur, angle, frac)| {
                until += dur;
                ScriptPiece {
                    until,
                    velocity: Vec2::from_angle(angle) * (nu * frac),
                }
            })
            .collect(),
    }
}

fn pursuer(which: usize) -> Box<dyn PursuerPolicy> {
    match which {
        0 => Box::new(Prop1Pursuer),
        1 => Box::new(Thm1Pursuer),
        _ => Box::new(AleemPursuer),
    }
}

/// A log with `used` sensings already made out of `used + left`, and the
/// pursuer somewhere on the segment toward the last sensed point.
fn state(left: std::ops::Range<u32>) -> impl Strategy<Value = (SensingLog, GameParams, f64, Vec2)> {
    (
        0.1..0.95f64,
        0.02..0.3f64,
        0u32..4,
        left,
        prop::collection::vec((0.1..4.0f64, 0.0..std::f64::consts::TAU, 0.0..2.0f64), 4),
        0.0..=1.0f64,
        0.0..20.0f64,
    )
        .prop_map(|(nu, r_cap, used, left, shots, progress, extra)| {
            let mut log = SensingLog::new(Vec2::ZERO, Vec2::new(shots[0].0, 0.0), used + left);
            let mut t = 0.0;
            for &(rho, angle, gap) in shots.iter().skip(1).take(used as usize) {
                t += gap;
                let p = log.last().evader;
                log.record(t, p + Vec2::from_angle(angle) * rho, p).unwrap();
            }
            let last = *log.last();
            let position = last.pursuer + (last.evader - last.pursuer) * progress;
            let now = last.time + progress * last.separation();
            let params = GameParams {
                nu,
                r_cap,
                t_f: now + extra,
                n: used + left,
            };
            (log, params, now, position)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Between sensing instants the pursuer only moves along r(t_k).
    #[test]
    fn heading_fixed_between_sensings(nu in 0.1..0.95f64, rho0 in 0.3..5.0f64, t_f in 0.5..30.0f64,
                                      n in 0u32..8, raw in pieces(), which in 0usize..3) {
        let cfg = GameConfig::head_on(nu, 0.1, rho0, t_f, n);
        let r = simulate(&cfg, pursuer(which).as_ref(), &scripted(nu, &raw), &FixedSides(vec![])).unwrap();
        let records = r.log.records();
        for s in &r.pursuer.segments {
            let speed = s.velocity.norm();
            if speed == 0.0 {
                continue;
            }
            prop_assert!(speed <= 1.0 + 1e-12);
            let k = records.iter().rposition(|rec| rec.time <= s.t_start).unwrap();
            let los = records[k].line_of_sight().unwrap();
            prop_assert!((s.velocity * (1.0 / speed)).distance(los) <= 1e-9, "{:?} vs {:?}", s, los);
        }
        for s in &r.evader.segments {
            prop_assert!(s.velocity.norm() <= nu * (1.0 + 1e-12));
        }
    }

    #[test]
    fn no_sensing_request_without_budget((log, params, now, position) in state(0..1), which in 0usize..3) {
        let info = PursuerInfo { time: now, position, log: &log, params, observed_evader: None };
        let action = match which {
            0 => pursuer_prop1(&info),
            1 => pursuer_thm1(&info),
            _ => pursuer_aleem(&info),
        }.unwrap();
        prop_assert!(!action.sense_now);
    }

    /// Wherever no waiting is prescribed the two pursuers decide identically.
    #[test]
    fn thm1_without_wait_is_prop1((log, params, now, position) in state(0..4)) {
        let last = *log.last();
        let w = wait_time(last.separation(), params.t_f - last.time, log.budget_remaining(), params.nu, params.r_cap);
        prop_assume!(w.map_or(true, |w| w == 0.0) || log.budget_remaining() == 0);
        let info = PursuerInfo { time: now, position, log: &log, params, observed_evader: None };
        prop_assert_eq!(pursuer_thm1(&info).unwrap(), pursuer_prop1(&info).unwrap());
    }

    /// Full runs agree too when the game never enters the wait region.
    #[test]
    fn thm1_run_matches_prop1_in_time_limited_games(nu in 0.1..0.95f64, rho0 in 0.3..5.0f64,
                                                    n in 0u32..6, raw in pieces()) {
        // τ ≤ ρ₀ keeps every sensing instant out of the wait region
        let cfg = GameConfig::head_on(nu, 0.1, rho0, rho0, n);
        let ev = scripted(nu, &raw);
        let sides = FixedSides(vec![]);
        let a = simulate(&cfg, &Thm1Pursuer, &ev, &sides).unwrap();
        let b = simulate(&cfg, &Prop1Pursuer, &ev, &sides).unwrap();
        prop_assert_eq!(a.outcome, b.outcome);
        prop_assert_eq!(a.pursuer, b.pursuer);
    }

    #[test]
    fn sensing_count_within_budget(nu in 0.1..0.95f64, rho0 in 0.3..5.0f64, t_f in 0.0..40.0f64,
                                   n in 0u32..10, mask in any::<u64>(), which in 0usize..3, radial in any::<bool>()) {
        let cfg = GameConfig::head_on(nu, 0.1, rho0, t_f, n);
        let sides = FixedSides::from_mask(mask, 16);
        let r = if radial {
            simulate(&cfg, pursuer(which).as_ref(), &RadialEvader, &sides)
        } else {
            simulate(&cfg, pursuer(which).as_ref(), &EquilibriumEvader, &sides)
        }.unwrap();
        prop_assert!(r.outcome.sensing_times.len() <= n as usize);
        prop_assert_eq!(r.log.budget_remaining() as usize + r.outcome.sensing_times.len(), n as usize);
        prop_assert!(r.outcome.sensing_times.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn prop1_contracts_against_many_evaders() {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    let cfg = GameConfig::head_on(0.7, 0.1, 5.0, 200.0, 40);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let ev = crate::verify::random_scripted_evader(&mut rng, 0.7, 20.0);
        let r = simulate(&cfg, &Prop1Pursuer, &ev, &FixedSides::constant(Side::Ccw, 0)).unwrap();
        for pair in r.log.records().windows(2) {
            assert!(pair[1].separation() <= 0.7 * pair[0].separation() + 1e-9);
        }
    }
}
