use proptest::prelude::*;
use qwass::closedform::{
    coupling_symm_commuting, coupling_z_commuting, coupling_z_xy, d_symm_commuting, d_symm_general, d_z_commuting,
    d_z_xy, eliminate_y, potentials_symm_commuting, potentials_z_commuting, potentials_z_xy, rho_x, rho_z,
    state_from_bloch, triangle_margin_symm, triangle_margin_z, z_rotation,
};
use qwass::cost::{cost_symm, cost_z};
use qwass::linalg::{DensityMatrix, HermitianMatrix};
use qwass::transport::{purification_coupling, wasserstein_distance, Coupling, DualPotentials, TransportInstance};
use qwass::{BlochVector, SolverOptions};

fn sdp_value(rho: &DensityMatrix, omega: &DensityMatrix, cost: HermitianMatrix, p: f64) -> f64 {
    let inst = TransportInstance::joint(rho.clone(), omega.clone(), cost, p).unwrap();
    wasserstein_distance(&inst, &SolverOptions::default()).unwrap().value
}

/// Best objective among the feasible candidate potentials.
fn best_potential(cands: &[DualPotentials], coupling: &Coupling, cost: &HermitianMatrix) -> f64 {
    cands
        .iter()
        .filter(|pot| pot.min_slack(cost).unwrap() >= -1e-9)
        .map(|pot| pot.objective(coupling.rho(), coupling.omega()))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), 1.0f64..3.0]
}

fn radius() -> impl Strategy<Value = f64> {
    -0.95f64..0.95
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn symm_commuting_matches_sdp(a in radius(), b in radius(), p in exponent()) {
        let want = d_symm_commuting(a, b, p);
        let got = sdp_value(&rho_z(a).unwrap(), &rho_z(b).unwrap(), cost_symm(p).unwrap(), p);
        prop_assert!((got - want).abs() <= 1e-5, "{got} vs {want}");
    }

    #[test]
    fn symm_collinear_matches_sdp(dir in prop::array::uniform3(-1.0f64..1.0), a in radius(), b in radius(), p in exponent()) {
        let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(n > 0.1);
        let r1 = BlochVector::new(dir.map(|x| a * x / n)).unwrap();
        let r2 = BlochVector::new(dir.map(|x| b * x / n)).unwrap();
        let want = d_symm_general(&r1, &r2, p).unwrap();
        let got = sdp_value(&state_from_bloch(&r1), &state_from_bloch(&r2), cost_symm(p).unwrap(), p);
        prop_assert!((got - want).abs() <= 1e-5, "{got} vs {want}");
    }

    #[test]
    fn z_cost_closed_forms_match_sdp(a in radius(), b in radius(), p in exponent()) {
        let xy = sdp_value(&rho_x(a).unwrap(), &rho_x(b).unwrap(), cost_z(p).unwrap(), p);
        prop_assert!((xy - d_z_xy(a, b, p)).abs() <= 1e-5);
        let zz = sdp_value(&rho_z(a).unwrap(), &rho_z(b).unwrap(), cost_z(p).unwrap(), p);
        prop_assert!((zz - d_z_commuting(a, b, p)).abs() <= 1e-5);
    }

    #[test]
    fn witnesses_sandwich_the_formula(a in radius(), b in radius(), p in exponent()) {
        let cases = [
            (coupling_symm_commuting(a, b).unwrap(), potentials_symm_commuting(a, b, p).unwrap().to_vec(), cost_symm(p).unwrap(), d_symm_commuting(a, b, p)),
            (coupling_z_xy(a, b).unwrap(), potentials_z_xy(a, b, p).unwrap().to_vec(), cost_z(p).unwrap(), d_z_xy(a, b, p)),
            (coupling_z_commuting(a, b).unwrap(), potentials_z_commuting(p).unwrap().to_vec(), cost_z(p).unwrap(), d_z_commuting(a, b, p)),
        ];
        for (coupling, pots, cost, want) in cases {
            prop_assert!(coupling.check(1e-8).unwrap().valid);
            let primal = coupling.objective(&cost).unwrap();
            let dual = best_potential(&pots, &coupling, &cost);
            prop_assert!(primal - dual <= 1e-9, "{primal} vs {dual}");
            prop_assert!((primal - want).abs() <= 1e-9);
            prop_assert!((dual - want).abs() <= 1e-9);
        }
    }

    #[test]
    fn self_distance_is_purification_cost(a in radius()) {
        let pi = purification_coupling(&rho_z(a).unwrap()).unwrap();
        let got = pi.objective(&cost_symm(2.0).unwrap()).unwrap();
        prop_assert!((got - d_symm_commuting(a, a, 2.0)).abs() <= 1e-9);
    }

    #[test]
    fn triangle_inequalities(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, r in 0.0f64..1.0, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        prop_assert!(triangle_margin_symm(a, b, c) >= -1e-9);
        prop_assert!(triangle_margin_z(r, s, t) >= -1e-9);
    }
}

fn ball() -> impl Strategy<Value = BlochVector> {
    prop::array::uniform3(-0.9f64..0.9)
        .prop_filter("inside the ball", |v| v.iter().map(|x| x * x).sum::<f64>() <= 0.81)
        .prop_map(|v| BlochVector::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn z_rotation_removes_y_component(r1 in ball(), r2 in ball(), p in exponent()) {
        let (a, b, phi_a, phi_b) = eliminate_y(&r1, &r2);
        for (r, e, phi) in [(&r1, &a, phi_a), (&r2, &b, phi_b)] {
            let rotated = state_from_bloch(r).conjugate_by(&z_rotation(phi));
            prop_assert!(rotated.max_abs_diff(&state_from_bloch(e)) <= 1e-12);
        }
        let before = sdp_value(&state_from_bloch(&r1), &state_from_bloch(&r2), cost_z(p).unwrap(), p);
        let after = sdp_value(&state_from_bloch(&a), &state_from_bloch(&b), cost_z(p).unwrap(), p);
        prop_assert!((before - after).abs() <= 1e-6, "{before} vs {after}");
    }
}

#[test]
fn rotated_pair_matches_reference_value() {
    let r1 = BlochVector::new([0.3, 0.2, 0.4]).unwrap();
    let r2 = BlochVector::new([0.1, -0.5, 0.2]).unwrap();
    let (a, b, _, _) = eliminate_y(&r1, &r2);
    for (x, y) in [(r1, r2), (a, b)] {
        let got = sdp_value(&state_from_bloch(&x), &state_from_bloch(&y), cost_z(2.0).unwrap(), 2.0);
        assert!((got - 0.4025029365681622).abs() <= 1e-6, "{got}");
    }
}
