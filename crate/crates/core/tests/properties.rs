use std::collections::BTreeSet;

use num_complex::Complex64;
use proptest::prelude::*;
use unsharp_core::causality::{inflated_set, leakage_scan};
use unsharp_core::effects::{annihilation_equivalence, Effect, Endpoint};
use unsharp_core::ensemble::{self, EnsembleConfig};
use unsharp_core::linalg::{self, commutator_norm, eig_hermitian, op_norm, psd_sqrt};
use unsharp_core::localization::{
    check_covariance, sharp_position_map, smeared_position_map, LatticeModel, SpatialSet,
};
use unsharp_core::luders::{LudersInstrument, State};
use unsharp_core::matrix::{basis_vector, Matrix};
use unsharp_core::pom::Pom;
use unsharp_core::random::{self, trial_rng};

fn hermitian_strategy(max_dim: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_dim).prop_flat_map(|n| {
        prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), n * n).prop_map(move |v| {
            let raw = Matrix::from_fn(n, |i, j| Complex64::new(v[i * n + j].0, v[i * n + j].1));
            raw.hermitian_part()
        })
    })
}

fn seeded() -> impl Strategy<Value = (u64, u64, usize)> {
    (any::<u64>(), 0..1000u64, 1..=6usize)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_reconstructs(m in hermitian_strategy(8)) {
        let eig = eig_hermitian(&m).unwrap();
        let scale = m.frobenius_norm().max(1.0);
        prop_assert!(eig.reconstruct().max_abs_diff(&m) <= 1e-10 * scale);
        let v = Matrix::from_fn(m.dim(), |i, j| eig.eigenvectors[(i, j)]);
        let vv = &v.adjoint() * &v;
        prop_assert!(vv.max_abs_diff(&Matrix::identity(m.dim())) <= 1e-10);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = eig.eigenvalues.iter().sum();
        prop_assert!((trace - m.trace().re).abs() <= 1e-10 * scale);
    }

    #[test]
    fn operator_norm_bounds(m in hermitian_strategy(6), s in -3.0..3.0f64) {
        let n = op_norm(&m);
        prop_assert!(n <= m.frobenius_norm() + 1e-12);
        prop_assert!(n + 1e-12 >= m.max_abs());
        prop_assert!((op_norm(&m.scale(s)) - s.abs() * n).abs() <= 1e-10 * (1.0 + n));
    }

    #[test]
    fn unitary_has_unit_norm((seed, trial, n) in seeded()) {
        let mut rng = trial_rng(seed, trial);
        let u = random::random_unitary(&mut rng, n);
        prop_assert!((op_norm(&u) - 1.0).abs() <= 1e-10);
        let uu = &u.adjoint() * &u;
        prop_assert!(uu.max_abs_diff(&Matrix::identity(n)) <= 1e-12);
    }

    #[test]
    fn commutator_antisymmetric(a in hermitian_strategy(5), seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let b = random::random_hermitian(&mut rng, a.dim());
        let ab = commutator_norm(&a, &b).unwrap();
        let ba = commutator_norm(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-10 * (1.0 + ab));
        prop_assert!(ab <= 2.0 * op_norm(&a) * op_norm(&b) + 1e-10);
        prop_assert!(commutator_norm(&a, &a).unwrap() <= 1e-10 * (1.0 + op_norm(&a)));
    }

    #[test]
    fn psd_sqrt_squares_back((seed, trial, n) in seeded()) {
        let mut rng = trial_rng(seed, trial);
        let e = random::random_effect(&mut rng, n);
        let r = psd_sqrt(e.matrix()).unwrap();
        prop_assert!((&r * &r).max_abs_diff(e.matrix()) <= 1e-10);
        prop_assert!(eig_hermitian(&r).unwrap().min() >= -1e-12);
    }

    #[test]
    fn complement_is_involutive((seed, trial, n) in seeded()) {
        let mut rng = trial_rng(seed, trial);
        let e = random::random_effect(&mut rng, n);
        let back = e.complement().complement();
        prop_assert_eq!(back.matrix(), e.matrix());
        let sum = e.matrix() + e.complement().matrix();
        prop_assert!(sum.max_abs_diff(&Matrix::identity(n)) <= 1e-15);
    }

    #[test]
    fn spectral_projections_are_orthogonal_projections((seed, trial, n) in seeded(), rank in 0..=6usize) {
        let mut rng = trial_rng(seed, trial);
        let e = random::random_projection(&mut rng, n, rank.min(n));
        let p1 = e.spectral_projection(Endpoint::One, 1e-8);
        let p0 = e.spectral_projection(Endpoint::Zero, 1e-8);
        prop_assert_eq!(p1.rank() + p0.rank(), n);
        prop_assert!((p1.matrix() * p0.matrix()).max_abs() <= 1e-10);
        prop_assert!((p1.matrix() * p1.matrix()).max_abs_diff(p1.matrix()) <= 1e-10);
        prop_assert!(p1.matrix().max_abs_diff(e.matrix()) <= 1e-10);
        prop_assert!(e.is_sharp(1e-8));
    }

    #[test]
    fn sharpness_matches_defect((seed, trial, _) in seeded()) {
        let e = ensemble::draw_sharpness_effect(seed, trial, &(1..=6));
        prop_assert_eq!(e.is_sharp(1e-8), e.sharpness_defect() <= 1e-8);
    }

    #[test]
    fn annihilation_equivalence_agrees((seed, trial, _) in seeded()) {
        let pair = ensemble::draw_support_pair(seed, trial, &(2..=6));
        let r = annihilation_equivalence(&pair.e1, &pair.e2, 1e-8).unwrap();
        prop_assert!(r.agree());
        if pair.orthogonal_by_construction {
            prop_assert!(r.prod_zero && r.ranges_orthogonal);
        }
    }

    #[test]
    fn random_pom_is_normalized((seed, trial, n) in seeded(), k in 1..=5usize) {
        let mut rng = trial_rng(seed, trial);
        let p = random::random_pom(&mut rng, n, k);
        prop_assert!(p.is_normalized());
        prop_assert!(p.total().matrix().max_abs_diff(&Matrix::identity(n)) <= 1e-10);
    }

    #[test]
    fn effect_of_is_additive((seed, trial, n) in seeded(), k in 2..=5usize, mask in any::<u8>()) {
        let mut rng = trial_rng(seed, trial);
        let p = random::random_pom(&mut rng, n, k);
        let x: BTreeSet<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        let y: BTreeSet<usize> = (0..k).filter(|i| mask >> i & 1 == 0).collect();
        let xy: BTreeSet<usize> = x.union(&y).copied().collect();
        let sum = p.effect_of_indices(&x).matrix() + p.effect_of_indices(&y).matrix();
        prop_assert!(sum.max_abs_diff(p.effect_of_indices(&xy).matrix()) <= 1e-12);
        prop_assert!(p.effect_of_indices(&BTreeSet::new()).matrix().max_abs() == 0.0);
    }

    #[test]
    fn luders_channel_preserves_states((seed, trial, n) in seeded(), k in 1..=4usize) {
        let mut rng = trial_rng(seed, trial);
        let a = random::random_pom(&mut rng, n, k);
        let instrument = LudersInstrument::new(a).unwrap();
        let rho = State::new(random::random_density(&mut rng, n)).unwrap();
        let out = instrument.luders_channel(&rho).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() <= 1e-10);
        prop_assert!(eig_hermitian(out.matrix()).unwrap().min() >= -1e-10);
        let dual_id = instrument.apply_channel(&Matrix::identity(n));
        prop_assert!(dual_id.max_abs_diff(&Matrix::identity(n)) <= 1e-10);
    }

    #[test]
    fn commuting_effect_is_not_disturbed((seed, trial, n) in seeded(), k in 2..=4usize) {
        let mut rng = trial_rng(seed, trial);
        let u = random::random_unitary(&mut rng, n);
        let a = random::diagonal_pom(&mut rng, &u, k);
        let b = random::diagonal_pom(&mut rng, &u, 2);
        let instrument = LudersInstrument::new(a).unwrap();
        let r = instrument.nondisturbance(b.effect(0), 1e-8).unwrap();
        prop_assert!(r.holds, "deviation {}", r.deviation);
    }

    #[test]
    fn ensemble_trials_are_equivalent(seed in any::<u64>(), trial in 0..1000u64) {
        let inputs = ensemble::draw_trial(seed, trial, &(2..=5), &(2..=4));
        let r = ensemble::run_trial(seed, &inputs, 1e-8).unwrap();
        prop_assert!(!r.is_counterexample(), "{:?}", r);
    }

    #[test]
    fn inflated_set_is_monotone(x in 0..16usize, s in 0.0..6.0f64, ds in 0.0..4.0f64) {
        let map = sharp_position_map(&LatticeModel::hopping(16));
        let d = SpatialSet::new([x], 0);
        let a = inflated_set(&d, s, &map).unwrap();
        let b = inflated_set(&d, s + ds, &map).unwrap();
        prop_assert!(a.sites.is_subset(&b.sites));
        prop_assert!(a.sites.contains(&x));
        prop_assert_eq!(inflated_set(&d, 0.0, &map).unwrap().sites, d.sites);
    }

    #[test]
    fn leakage_within_unit_interval(seed in any::<u64>(), t in 0.0..6.0f64) {
        let n = 16;
        let map = sharp_position_map(&LatticeModel::hopping(n));
        let mut rng = trial_rng(seed, 0);
        let phi = random::random_unit_vector(&mut rng, n);
        let d = SpatialSet::new(0..8, 0);
        let s = leakage_scan(&map, &phi, &d, &[t]).unwrap();
        prop_assert!(s.leakage[0] >= -1e-10 && s.leakage[0] <= 1.0 + 1e-10);
    }

    #[test]
    fn static_leakage_vanishes(x in 0..16usize, t in 0.0..10.0f64) {
        let n = 16;
        let map = sharp_position_map(&LatticeModel::static_model(n));
        let s = leakage_scan(&map, &basis_vector(n, x), &SpatialSet::new([x], 0), &[t]).unwrap();
        prop_assert!(s.leakage[0].abs() <= 1e-10);
    }

    #[test]
    fn smeared_map_is_covariant(weights in prop::collection::vec(0.0..1.0f64, 8), a in -10..10i64) {
        let total: f64 = weights.iter().sum();
        prop_assume!(total > 1e-3);
        let kernel: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let kernel_sum: f64 = kernel.iter().sum();
        prop_assume!((kernel_sum - 1.0).abs() <= 1e-12);
        let map = smeared_position_map(&LatticeModel::hopping(8), &kernel).unwrap();
        prop_assert!(check_covariance(&map, a, 1e-12).holds);
    }

    #[test]
    fn weak_localizability_follows_from_strict((seed, trial, _) in seeded()) {
        let pair = ensemble::draw_support_pair(seed, trial, &(2..=5));
        let strict = op_norm(&(pair.e1.matrix() * pair.e2.matrix()));
        let weak = unsharp_core::effects::weak_exclusion_residual(&pair.e1, &pair.e2, 1e-8).unwrap();
        if strict <= 1e-10 {
            prop_assert!(weak <= 1e-8);
        }
    }

    #[test]
    fn sharp_pom_iff_disjoint_annihilation((seed, trial, _) in seeded()) {
        let p: Pom = ensemble::draw_sharpness_pom(seed, trial, &(1..=5), &(2..=4));
        let (max_prod, _) = p.max_disjoint_product();
        prop_assert_eq!(max_prod <= 1e-8, p.is_sharp_pom(1e-8));
    }
}

#[test]
fn ensemble_is_deterministic() {
    let cfg = EnsembleConfig {
        seed: 42,
        trials: 24,
        ..Default::default()
    };
    let a = ensemble::records_to_csv(&ensemble::run_ensemble(&cfg).unwrap());
    let b = ensemble::records_to_csv(&ensemble::run_ensemble(&cfg).unwrap());
    assert_eq!(a, b);
}

#[test]
fn effect_json_round_trip() {
    let mut rng = trial_rng(5, 5);
    let e = random::random_effect(&mut rng, 3);
    let text = serde_json::to_string(&e).unwrap();
    let back: Effect = serde_json::from_str(&text).unwrap();
    assert_eq!(back.matrix(), e.matrix());
    let p = random::random_pom(&mut rng, 3, 3);
    let back: Pom = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(back.effects(), p.effects());
    let _ = linalg::is_hermitian(e.matrix(), 1e-12);
}
