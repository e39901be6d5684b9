//! Property tests for the structural invariants: the angular-strength triad,
//! the coupling law, the balance between the two solve directions, the
//! matching-point identity and report serialisation.

use proptest::prelude::*;
use scatter::localwave::{self, Region};
use scatter::matching::{
    lambda_triad, master_residual, solution_for_radius, solve_matching_radius, solve_stage,
};
use scatter::potentials::PotentialClass;
use scatter::report::{self, SolveReport};

fn any_class() -> impl Strategy<Value = PotentialClass> {
    prop::sample::select(PotentialClass::all_tags().to_vec())
        .prop_map(|tag| PotentialClass::from_tag(tag).unwrap())
}

proptest! {
    /// The split centrifugal strengths bracket the mean with an exact 1/8 gap
    /// on each side, for every partial wave.
    #[test]
    fn triad_split_is_exact(l in 0u32..200) {
        let t = lambda_triad(l);
        let half = (l as f64) + 0.5;
        prop_assert_eq!(t.lambda_eps_sq, half * half);
        prop_assert_eq!(t.lambda_tau_sq, (l * (l + 1)) as f64);
        prop_assert_eq!(t.lambda_eps_sq - t.lambda_sq, 0.125);
        prop_assert_eq!(t.lambda_sq - t.lambda_tau_sq, 0.125);
    }

    /// The coupling factor decays strictly with the matching radius.
    #[test]
    fn coupling_decays_with_radius(class in any_class(),
                                   r in 1.5f64..50.0,
                                   bump in 0.01f64..2.0) {
        let a = class.log_coupling(r);
        let b = class.log_coupling(r + bump);
        prop_assert!(b < a, "log g^2({}) = {a} vs log g^2({}) = {b}", r, r + bump);
    }

    /// The log-form potential agrees with the direct product of its three
    /// factors wherever the latter is representable in f64.
    #[test]
    fn log_potential_matches_linear_product(class in any_class(),
                                            r_match in 2.0f64..20.0,
                                            t in 0.3f64..3.0) {
        let triad = lambda_triad(0);
        let s = solve_stage(&class, 1.0, &triad, r_match).unwrap();
        let r = r_match * t;
        prop_assume!(class.representable(s, r_match, r));
        let lw = class.log_potential(s, r_match, r);
        prop_assume!(lw.abs() < 650.0);
        let direct = class.potential_value(s, r_match, r).unwrap().linear().unwrap();
        let rel = (lw.exp() - direct).abs() / direct.abs().max(1e-300);
        prop_assert!(rel < 1e-12, "rel gap {rel} at s = {s}, r = {r}");
    }

    /// Solving for the stage at a radius and then for the radius at that
    /// stage lands back on the starting radius, and the balance residual
    /// vanishes at the solution.
    #[test]
    fn stage_and_radius_solves_are_inverse(class in any_class(),
                                           l in 0u32..4,
                                           k in 0.4f64..3.0,
                                           r in 2.0f64..80.0) {
        let triad = lambda_triad(l);
        prop_assume!(k * k * r * r > triad.lambda_sq * 1.5);
        let s = solve_stage(&class, k, &triad, r).unwrap();
        prop_assert!(s > 0.0);
        let r_back = solve_matching_radius(&class, k, &triad, s).unwrap();
        prop_assert!((r_back - r).abs() / r < 1e-9, "r = {r}, back = {r_back}");
        prop_assert!(master_residual(&class, k, &triad, r, s).abs() < 1e-12);
    }

    /// Both local wave numbers equal 1/(8 R^2) at the matching point, for
    /// arbitrary admissible (class, l, k, R).
    #[test]
    fn matching_point_identity(class in any_class(),
                               l in 0u32..4,
                               k in 0.4f64..3.0,
                               r in 2.0f64..80.0) {
        let triad = lambda_triad(l);
        prop_assume!(k * k * r * r > triad.lambda_sq * 1.5);
        let sol = solution_for_radius(&class, k, l, r).unwrap();
        for region in [Region::Epsilon, Region::Tau] {
            let k2 = localwave::k_squared(region, &sol, 1.0).unwrap().linear().unwrap();
            prop_assert!((k2 * 8.0 * r * r - 1.0).abs() < 1e-12);
        }
    }

    /// Report rows survive the CSV and JSON round trips byte-identically for
    /// arbitrary finite payloads.
    #[test]
    fn report_round_trips(class in any_class(),
                          k in prop::num::f64::POSITIVE,
                          l in 0u32..50,
                          r_match in prop::num::f64::POSITIVE,
                          stage in prop::num::f64::NORMAL,
                          g2 in prop::num::f64::NORMAL,
                          ce in 0usize..12,
                          ct in 0usize..12,
                          delta in prop::num::f64::NORMAL,
                          branches in -40i64..40,
                          t_far in prop::num::f64::POSITIVE) {
        let row = SolveReport {
            class: class.tag(),
            k, l, r_match, stage, g2,
            cutoff_eps: ce,
            cutoff_tau: ct,
            delta, branches, t_far,
        };
        let csv = report::to_csv(std::slice::from_ref(&row));
        let back = report::from_csv(&csv).unwrap();
        prop_assert_eq!(&back[..], std::slice::from_ref(&row));
        prop_assert_eq!(report::to_csv(&back), csv);

        let json = report::to_json(std::slice::from_ref(&row)).unwrap();
        let back = report::from_json(&json).unwrap();
        prop_assert_eq!(&back[..], std::slice::from_ref(&row));
        prop_assert_eq!(report::to_json(&back).unwrap(), json);
    }
}
