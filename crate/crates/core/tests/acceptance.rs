//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Every reference value is recomputed here from first principles (direct
//! formulas, iteration, brute-force sampling) rather than taken from the
//! library's closed forms.

use std::collections::BTreeSet;
use std::time::Instant;

use pursuit_core::config::GameConfig;
use pursuit_core::engine::simulate;
use pursuit_core::payoff::PayoffSpec;
use pursuit_core::strategies::{EquilibriumEvader, FixedSides, Thm1Pursuer};
use pursuit_core::value::{
    aleem_n_max, degradation, h_of_nu, prop1_n_max, v_bound, CaseTag, ValueQuery,
};
use pursuit_core::verify::{
    capture_time_bound_check, evader_guarantee_check, jensen_sweep, oracle_agreement_check,
    pursuer_guarantee_check, random_scripted_evader, standard_configs, DeviationGrid,
    VerificationReport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn failures(r: &VerificationReport) -> String {
    format!(
        "{} checks, {} violations, worst excess {:.3e}",
        r.trials, r.violation_count, r.worst_violation
    )
}

// --- independent references -------------------------------------------------

/// The raw printed form of h(ν), with the 2ν² − 1 denominator.
fn h_raw(nu: f64) -> f64 {
    let s = (1.0 - nu * nu).sqrt();
    1.0 - (nu * (1.0 - nu) * s - (1.0 - nu) * (1.0 - nu * nu)) / (2.0 * nu * nu - 1.0)
}

/// Largest k with ν^k ρ₀ ≥ r_cap, by repeated multiplication.
fn prop1_count_by_iteration(nu: f64, rho0: f64, r_cap: f64) -> u32 {
    let mut k = 0;
    let mut reach = rho0 * nu;
    while reach >= r_cap {
        k += 1;
        reach *= nu;
    }
    k
}

/// Smallest k with h^k ρ₀ ≤ r_cap, by repeated multiplication.
fn aleem_count_by_iteration(nu: f64, rho0: f64, r_cap: f64) -> u32 {
    let h = h_raw(nu);
    let mut k = 0;
    let mut reach = rho0;
    while reach > r_cap {
        k += 1;
        reach *= h;
    }
    k
}

fn hinge(x: f64, r: f64) -> f64 {
    (x - r).max(0.0)
}

fn reach(nu: f64, ell: u32) -> f64 {
    (0..=ell).map(|i| nu.powi(i as i32)).sum()
}

// --- criteria ---------------------------------------------------------------

fn sensing_count_comparison() -> Verdict {
    let (rho0, r) = (5.0, 0.1);
    let mut rows = Vec::new();
    for i in 1..=19 {
        let nu = 0.05 * i as f64;
        let prop1 = prop1_n_max(rho0, r, nu).unwrap();
        let aleem = aleem_n_max(rho0, r, nu).unwrap();
        if prop1 != prop1_count_by_iteration(nu, rho0, r) || aleem != aleem_count_by_iteration(nu, rho0, r) {
            return verdict(false, format!("count mismatch against iteration at nu={nu}"));
        }
        rows.push((nu, prop1, aleem));
    }
    let dominated = rows.iter().all(|&(_, p, a)| p <= a);
    let ratio_ok = rows
        .iter()
        .filter(|r| r.0 >= 0.7 - 1e-9)
        .all(|&(_, p, a)| a as f64 > 2.0 * p as f64);
    let gaps: Vec<i64> = rows.iter().map(|&(_, p, a)| a as i64 - p as i64).collect();
    let growing = gaps.windows(2).all(|w| w[1] >= w[0]);
    let at = |nu: f64| rows.iter().find(|r| (r.0 - nu).abs() < 1e-9).unwrap();
    let (p7, a7) = (at(0.7).1, at(0.7).2);
    let (p9, a9) = (at(0.9).1, at(0.9).2);
    verdict(
        dominated && ratio_ok && growing && (p7, a7) == (10, 24) && (p9, a9) == (37, 118),
        format!(
            "dominated={dominated} ratio>2 for nu>=0.7: {ratio_ok} gap non-decreasing: {growing} \
             nu=0.7 ({p7}, {a7}) nu=0.9 ({p9}, {a9}) gaps={gaps:?}"
        ),
    )
}

fn value_surfaces() -> Verdict {
    let (nu, r) = (0.7, 0.1);
    let phi = PayoffSpec::hinge(r);
    let n = 300;
    let rhos: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let taus: Vec<f64> = (0..n).map(|i| 3.0 * i as f64 / (n - 1) as f64).collect();
    let v = |rho: f64, tau: f64, ell: u32| v_bound(ValueQuery { rho, tau, ell }, &phi, nu, r);

    // (a) τ = 0 boundary
    let mut boundary_bad = 0;
    for ell in 0..=5 {
        for &rho in &rhos {
            let expected = if rho > r { hinge(rho, r) } else { 0.0 };
            if v(rho, 0.0, ell).value != expected {
                boundary_bad += 1;
            }
        }
    }

    // (b) one-sided limits across every case boundary
    let side = |x: f64, s: f64| x * (1.0 + s * 1e-11);
    let mut jumps: Vec<(&str, f64)> = Vec::new();
    let mut record = |name: &'static str, a: f64, b: f64| {
        let d = (a - b).abs();
        match jumps.iter_mut().find(|j| j.0 == name) {
            Some(j) => j.1 = j.1.max(d),
            None => jumps.push((name, d)),
        }
    };
    for ell in 0..=5u32 {
        let b = reach(nu, ell);
        for &t in &taus[1..] {
            if ell == 0 {
                // τ = ρ
                record("tau=rho (l=0)", v(side(t, -1.0), t, 0).value, v(side(t, 1.0), t, 0).value);
                // νρ = r_cap with τ > ρ
                let rho = r / nu;
                if t > rho * 1.01 {
                    record("nu*rho=r_cap (l=0)", v(side(rho, -1.0), t, 0).value, v(side(rho, 1.0), t, 0).value);
                }
                // νρ = √(1+ν²) r_cap with τ > ρ
                let rho = (1.0 + nu * nu).sqrt() * r / nu;
                if t > rho * 1.01 {
                    record("nu*rho=sqrt(1+nu^2)r_cap (l=0)", v(side(rho, -1.0), t, 0).value, v(side(rho, 1.0), t, 0).value);
                }
            } else {
                // τ = B(ℓ)ρ
                let rho = t / b;
                record("tau=B*rho", v(side(rho, 1.0), t, ell).value, v(side(rho, -1.0), t, ell).value);
                // ν^{ℓ+1}ρ = r_cap with τ > B(ℓ)ρ
                let rho = r / nu.powi(ell as i32 + 1);
                if t > b * rho * 1.01 {
                    record("nu^(l+1)*rho=r_cap", v(side(rho, -1.0), t, ell).value, v(side(rho, 1.0), t, ell).value);
                }
                // ρ = r_cap
                record("rho=r_cap", v(side(r, -1.0), t, ell).value, v(side(r, 1.0), t, ell).value);
            }
        }
    }
    let continuity_ok = jumps.iter().all(|j| j.1 <= 1e-9);

    // (c) monotone in ℓ; (d) tightness flags
    let mut monotone_bad = 0;
    let mut flag_bad = 0;
    let mut band = (f64::INFINITY, f64::NEG_INFINITY);
    let s = (1.0 + nu * nu).sqrt();
    for &rho in &rhos {
        for &tau in &taus {
            let vals: Vec<_> = (0..=5).map(|ell| v(rho, tau, ell)).collect();
            monotone_bad += vals.windows(2).filter(|w| w[1].value > w[0].value + 1e-12).count();
            for (ell, b) in vals.iter().enumerate() {
                let nontight = if ell == 0 {
                    tau >= rho && r < nu * rho && nu * rho <= s * r
                } else {
                    tau >= reach(nu, ell as u32) * rho && r <= rho && rho <= s * r
                };
                if b.is_tight == nontight {
                    flag_bad += 1;
                }
                if ell == 0 && nontight {
                    band = (band.0.min(rho), band.1.max(rho));
                }
            }
        }
    }
    let band_ok = band.0 > r / nu && band.1 <= s * r / nu;
    let jump_text: Vec<String> = jumps.iter().map(|(n, d)| format!("{n}: {d:.3e}")).collect();
    verdict(
        boundary_bad == 0 && continuity_ok && monotone_bad == 0 && flag_bad == 0 && band_ok,
        format!(
            "(a) boundary mismatches {boundary_bad}; (b) largest jump per boundary [{}]; \
             (c) monotonicity breaks {monotone_bad}; (d) flag mismatches {flag_bad}, \
             omega0 band rho in [{:.4}, {:.4}]",
            jump_text.join(", "),
            band.0,
            band.1
        ),
    )
}

fn capture_and_budget_bounds() -> Verdict {
    let r = capture_time_bound_check(0.7, 5.0, 0.1, 10_000, SEED).unwrap();
    let limit = 16.3334;
    let max_t = r.metrics["max_capture_time"];
    let max_path = r.metrics["max_path_length"];
    let max_sense = r.metrics["max_sensings"];
    let radial = r.metrics["radial_capture_time"];
    let exact = (5.0 - 0.1) / (1.0 - 0.7);
    let ok = r.passed
        && max_t <= limit + 1e-9
        && max_sense <= 10.0
        && max_path <= limit * (1.0 + 1e-9)
        && (radial - exact).abs() <= 1e-9;
    verdict(
        ok,
        format!(
            "{}; max capture {max_t:.9}, max path {max_path:.9}, max sensings {max_sense}, \
             radial capture {radial:.12} (bound {exact:.12})",
            failures(&r)
        ),
    )
}

fn no_sensing_exactness() -> Verdict {
    let mut worst_eq = 0.0f64;
    let mut not_earlier = 0;
    let mut deviations = 0;
    for k in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x5151);
        rng.set_stream(k);
        let nu = rng.gen_range(0.1..0.95);
        let r = rng.gen_range(0.05..0.5);
        let rho0 = rng.gen_range(r * 1.001..=r / nu);
        let horizon = (rho0 - r) / (1.0 - nu);
        let cfg = GameConfig::head_on(nu, r, rho0, 2.0 * horizon + 1.0, rng.gen_range(0..=3));
        let eq = simulate(&cfg, &Thm1Pursuer, &EquilibriumEvader, &FixedSides(Vec::new())).unwrap();
        let t_eq = eq.outcome.capture_time.unwrap_or(f64::INFINITY);
        worst_eq = worst_eq.max((t_eq - horizon).abs());
        let ev = random_scripted_evader(&mut rng, nu, cfg.t_f);
        let dev = simulate(&cfg, &Thm1Pursuer, &ev, &FixedSides(Vec::new())).unwrap();
        deviations += 1;
        match dev.outcome.capture_time {
            Some(t) if t < t_eq => {}
            _ => not_earlier += 1,
        }
    }
    verdict(
        worst_eq <= 1e-9 && not_earlier == 0,
        format!("worst |t_capture - (rho0-r)/(1-nu)| = {worst_eq:.3e}; {not_earlier}/{deviations} deviations not strictly earlier"),
    )
}

fn equilibrium_verification() -> Verdict {
    let configs = standard_configs();
    let phi = PayoffSpec::hinge(0.1);
    let tags: BTreeSet<&str> = configs
        .iter()
        .map(|c| {
            v_bound(ValueQuery::new(c.rho0(), c.t_f, c.n).unwrap(), &phi, c.nu, c.r_cap)
                .case_tag
                .as_str()
        })
        .collect();
    let mut pursuer = Vec::new();
    let mut evader = Vec::new();
    for c in &configs {
        pursuer.push(pursuer_guarantee_check(c, 10_000, SEED).unwrap());
        evader.push(evader_guarantee_check(c, &DeviationGrid::square(c.t_f, 50)).unwrap());
    }
    let p = VerificationReport::merge("pursuer", pursuer);
    let e = VerificationReport::merge("evader", evader);
    let skipped = e.notes.iter().filter(|n| n.contains("skipped")).count();
    let all_tags = tags.len() == CaseTag::ALL.len();
    let mut detail = format!(
        "{} configs, tags covered {}/{}; (a) {}; (b) {} ({} non-tight configs skipped)",
        configs.len(),
        tags.len(),
        CaseTag::ALL.len(),
        failures(&p),
        failures(&e),
        skipped
    );
    for v in p.violations.iter().chain(&e.violations).take(3) {
        detail.push_str(&format!("; e.g. {}", v.description));
    }
    verdict(p.passed && e.passed && all_tags && configs.len() >= 20, detail)
}

fn jensen_inequality() -> Verdict {
    let (claimed, even) = jensen_sweep(1_000, SEED).unwrap();
    let mut detail = format!(
        "claimed bound: {}; even bound sqrt((rho-a1)^2+nu^2tau^2): {}",
        failures(&claimed),
        failures(&even)
    );
    if let Some(v) = claimed.violations.first() {
        detail.push_str(&format!("; e.g. {}", v.description));
    }
    verdict(claimed.passed, detail)
}

fn degradation_report() -> Verdict {
    let (rho0, r) = (5.0, 0.1);
    let phi = PayoffSpec::hinge(r);
    let mut problems = Vec::new();
    let mut worst_diff = 0.0f64;
    let mut check_config = |nu: f64, t_f: f64| {
        let rep = degradation(rho0, t_f, nu, r, &phi).unwrap();
        let remaining = rho0 - (1.0 - nu) * t_f;
        let base = hinge(remaining, r);
        let cont = hinge(remaining.max(0.0), r);
        // n* by its defining formula
        let ratio = if t_f < (rho0 - r) / (1.0 - nu) { remaining / rho0 } else { r / rho0 };
        let n_star = (ratio.ln() / nu.ln() * (1.0 + 1e-12)).floor() as u32;
        if n_star != rep.n_star {
            problems.push(format!("nu={nu}: n* {} vs {n_star}", rep.n_star));
        }
        worst_diff = worst_diff.max((rep.continuous_payoff - cont).abs());
        let mut prev_beta = f64::INFINITY;
        for row in &rep.rows {
            let n = row.n;
            let shrink = nu.powi(n as i32 + 1);
            let b = reach(nu, n);
            let value = if t_f <= b * rho0 {
                hinge(nu * t_f + rho0 - t_f, r)
            } else if shrink * rho0 <= r {
                0.0
            } else {
                hinge(shrink * t_f / b, r)
            };
            let delta = value - cont;
            worst_diff = worst_diff.max((row.delta - delta).abs());
            if remaining > 0.0 {
                let beta = shrink / (1.0 - shrink) * ((1.0 - nu) * t_f / remaining) - 1.0;
                let got = row.beta.unwrap_or(f64::NAN);
                worst_diff = worst_diff.max((got - beta).abs());
                if !(beta < prev_beta) {
                    problems.push(format!("nu={nu}: beta not decreasing at n={n}"));
                }
                prev_beta = beta;
                if n < rep.n_star && row.delta < beta * base - 1e-12 {
                    problems.push(format!("nu={nu}: delta({n}) = {} < beta*phi = {}", row.delta, beta * base));
                }
            }
            if n == rep.n_star && t_f >= (rho0 - r) / (1.0 - nu) && row.delta.abs() > 1e-12 {
                problems.push(format!("nu={nu}: delta(n*) = {}", row.delta));
            }
        }
    };
    for nu in [0.5, 0.6, 0.7, 0.8] {
        let horizon = (rho0 - r) / (1.0 - nu);
        check_config(nu, 0.9 * horizon);
        check_config(nu, horizon);
        check_config(nu, 1.1 * horizon);
    }
    let ok = problems.is_empty() && worst_diff <= 1e-12;
    verdict(
        ok,
        format!(
            "largest difference from direct evaluation {worst_diff:.3e}; problems: {}",
            if problems.is_empty() { "none".to_string() } else { problems.join("; ") }
        ),
    )
}

fn engine_validation() -> Verdict {
    let oracle = oracle_agreement_check(100, SEED, 1e-5).unwrap();
    let singular = std::f64::consts::FRAC_1_SQRT_2;
    let mut worst = 0.0f64;
    for i in 1..10_000 {
        let nu = i as f64 / 10_000.0;
        if (nu - singular).abs() <= 1e-3 {
            continue;
        }
        worst = worst.max((h_of_nu(nu).unwrap() - h_raw(nu)).abs());
    }
    let at = h_of_nu(singular).unwrap();
    let (lo, hi) = (h_of_nu(singular - 1e-6).unwrap(), h_of_nu(singular + 1e-6).unwrap());
    let singular_ok = at.is_finite() && lo <= at && at <= hi && (at - 0.85355).abs() < 5e-6;
    verdict(
        oracle.passed && worst <= 1e-10 && singular_ok,
        format!(
            "oracle: {} over {} captured runs; h raw vs simplified worst {worst:.3e}; h(1/sqrt2) = {at:.9} between {lo:.9} and {hi:.9}",
            failures(&oracle),
            oracle.metrics["captured_runs"]
        ),
    )
}

fn main() {
    // (name, check, wall-clock limit in seconds)
    let criteria: [(&str, fn() -> Verdict, Option<f64>); 8] = [
        ("sensing-count comparison", sensing_count_comparison, Some(1.0)),
        ("value surfaces", value_surfaces, Some(10.0)),
        ("capture-time and budget bounds", capture_and_budget_bounds, None),
        ("no-sensing capture exactness", no_sensing_exactness, None),
        ("equilibrium verification", equilibrium_verification, Some(300.0)),
        ("two-branch distance inequality", jensen_inequality, None),
        ("degradation", degradation_report, None),
        ("engine validation", engine_validation, None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut v = run();
        let secs = start.elapsed().as_secs_f64();
        if let Some(limit) = limit {
            if secs >= *limit {
                v.passed = false;
                v.detail.push_str(&format!("; runtime over the {limit} s limit"));
            }
        }
        if !v.passed {
            failed += 1;
        }
        println!(
            "criterion {} {:<32} {} ({secs:.2} s) {}",
            i + 1,
            name,
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
