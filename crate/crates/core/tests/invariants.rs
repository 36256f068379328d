use ctq_core::bounds::lower_bound_thm2;
use ctq_core::closedform::{ctq_isotropic, isotropic_envelope, zeta_isotropic, DEFAULT_GRID_STEP};
use ctq_core::measures::{ctq_pure, ctq_two_qubit_mixed};
use ctq_core::qlinalg::{partial_transpose, realign, trace_norm};
use ctq_core::states::{
    isotropic, random_pure_with, random_unitary_with, schmidt_spectrum, werner,
};
use ctq_core::DimensionSignature;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn isotropic_states_are_twirl_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for d in [2usize, 3] {
        let rho = isotropic(0.7, d).unwrap();
        for _ in 0..50 {
            let u = random_unitary_with(d, &mut rng);
            let twirled = rho.conjugate_by(&u.kron(&u.conjugate())).unwrap();
            assert!(twirled.matrix().sub(rho.matrix()).max_abs() < 1e-12);
        }
    }
}

#[test]
fn werner_states_are_twirl_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for d in [2usize, 3] {
        let rho = werner(0.8, d).unwrap();
        for _ in 0..50 {
            let u = random_unitary_with(d, &mut rng);
            let twirled = rho.conjugate_by(&u.kron(&u)).unwrap();
            assert!(twirled.matrix().sub(rho.matrix()).max_abs() < 1e-12);
        }
    }
}

#[test]
fn pure_state_trace_norms_equal_schmidt_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for (da, db) in [(2, 2), (2, 3), (3, 3), (3, 4)] {
        let sig = DimensionSignature::bipartite(da, db).unwrap();
        for _ in 0..25 {
            let psi = random_pure_with(&sig, &mut rng).unwrap();
            let rho = psi.density();
            let expected: f64 = schmidt_spectrum(&psi).values().iter().map(|l| l.sqrt()).sum::<f64>().powi(2);
            let pt = trace_norm(&partial_transpose(rho.matrix(), &sig).unwrap());
            let re = trace_norm(&realign(rho.matrix(), &sig).unwrap());
            assert!((pt - expected).abs() <= 1e-8 * expected);
            assert!((re - expected).abs() <= 1e-8 * expected);
        }
    }
}

#[test]
fn theorem2_bound_is_tight_on_qubit_isotropic_states() {
    for k in 0..=40 {
        let f = 0.5 + 0.5 * k as f64 / 40.0;
        let value = ctq_isotropic(f, 4.0, 2).unwrap();
        let bound = lower_bound_thm2(&isotropic(f, 2).unwrap(), 4.0).unwrap().lower_bound;
        assert!(value - bound >= -1e-9);
    }
    for f in [0.5, 1.0] {
        let value = ctq_isotropic(f, 4.0, 2).unwrap();
        let bound = lower_bound_thm2(&isotropic(f, 2).unwrap(), 4.0).unwrap().lower_bound;
        assert!((value - bound).abs() < 1e-9);
    }
}

#[test]
fn qutrit_isotropic_bound_holds() {
    for q in [3.0, 4.0] {
        for k in 1..=200 {
            let f = 1.0 / 3.0 + (2.0 / 3.0) * k as f64 / 200.0;
            let bound = lower_bound_thm2(&isotropic(f, 3).unwrap(), q).unwrap().lower_bound;
            assert!(bound <= ctq_isotropic(f, q, 3).unwrap() + 1e-9);
        }
    }
}

#[test]
fn envelope_is_convex_and_below_zeta() {
    for (q, d) in [(3.0, 3), (4.0, 3), (2.0, 4), (5.0, 2)] {
        let c = isotropic_envelope(q, d, DEFAULT_GRID_STEP).unwrap();
        for w in c.values.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-9);
        }
        for (k, &f) in c.grid.iter().enumerate() {
            assert!(c.values[k] <= zeta_isotropic(f, q, d, true).unwrap() + 1e-12);
        }
    }
}

#[test]
fn werner_mixed_formula_matches_closed_form() {
    for k in 1..10 {
        let w = 0.5 + 0.05 * k as f64;
        for q in [2.0, 3.0, 4.0] {
            let via_state = ctq_two_qubit_mixed(&werner(w, 2).unwrap(), q).unwrap().value;
            let closed = ctq_core::closedform::zeta_werner(w, q, true).unwrap();
            assert!((via_state - closed).abs() < 1e-10);
        }
    }
}

#[test]
fn maximally_entangled_pure_states_reach_one() {
    for d in [2usize, 3, 4] {
        let amps = ctq_core::states::max_entangled(d);
        let psi = ctq_core::states::pure_from_amplitudes(amps, DimensionSignature::bipartite(d, d).unwrap()).unwrap();
        for q in [2.0, 3.0, 6.0] {
            assert!((ctq_pure(&psi, q).unwrap().value - 1.0).abs() < 1e-12);
        }
    }
}
