use proptest::prelude::*;

use crate::payoff::PayoffSpec;
use crate::value::{
    aleem_n_max, geometric_reach, h_of_nu, h_of_nu_raw, n_star, prop1_n_max, v_bound, CaseTag, ValueQuery,
};

fn phi(quad: bool, r_cap: f64) -> PayoffSpec {
    if quad {
        PayoffSpec::quadratic(r_cap)
    } else {
        PayoffSpec::hinge(r_cap)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    /// Both sides of τ = B(ℓ)ρ give φ(ν^{ℓ+1}ρ).
    #[test]
    fn continuous_across_reach_boundary(nu in 0.1..0.95f64, rho in 0.2..5.0f64, ell in 1u32..8, quad in any::<bool>()) {
        let r_cap = 0.1;
        prop_assume!(nu.powi(ell as i32 + 1) * rho > r_cap);
        let p = phi(quad, r_cap);
        let tau = geometric_reach(nu, ell) * rho;
        let eps = 1e-9 * tau;
        let below = v_bound(ValueQuery { rho, tau: tau - eps, ell }, &p, nu, r_cap);
        let above = v_bound(ValueQuery { rho, tau: tau + eps, ell }, &p, nu, r_cap);
        prop_assert_eq!(below.case_tag, CaseTag::TimeLimited);
        prop_assert_eq!(above.case_tag, CaseTag::WaitRegion);
        let at = p.at(nu.powi(ell as i32 + 1) * rho);
        prop_assert!((below.value - at).abs() <= 1e-8 * (1.0 + at));
        prop_assert!((above.value - at).abs() <= 1e-8 * (1.0 + at));
    }

    #[test]
    fn n_star_never_exceeds_prop1_count(nu in 0.05..0.95f64, rho0 in 0.5..10.0f64, frac in 0.0..3.0f64) {
        let r_cap = 0.1;
        prop_assume!(nu * rho0 > (1.0 + nu * nu).sqrt() * r_cap);
        let t_f = frac * (rho0 - r_cap) / (1.0 - nu);
        let cap = ((r_cap.ln() - rho0.ln()) / nu.ln()).floor() as u32;
        prop_assert!(n_star(rho0, t_f, nu, r_cap).unwrap() <= cap);
    }

    #[test]
    fn h_strictly_between_nu_and_one(nu in 0.001..0.999f64) {
        let h = h_of_nu(nu).unwrap();
        prop_assert!(nu < h && h < 1.0);
        if (nu - std::f64::consts::FRAC_1_SQRT_2).abs() > 1e-3 {
            prop_assert!((h - h_of_nu_raw(nu).unwrap()).abs() <= 1e-10);
        }
    }

    #[test]
    fn aleem_needs_at_least_as_many(nu in 0.01..0.99f64) {
        prop_assert!(aleem_n_max(5.0, 0.1, nu).unwrap() >= prop1_n_max(5.0, 0.1, nu).unwrap());
    }

    #[test]
    fn zero_inside_capture_radius(rho in 0.0..=0.1f64, tau in 0.0..10.0f64, ell in 0u32..8, quad in any::<bool>()) {
        let b = v_bound(ValueQuery { rho, tau, ell }, &phi(quad, 0.1), 0.7, 0.1);
        prop_assert_eq!(b.value, 0.0);
    }
}
