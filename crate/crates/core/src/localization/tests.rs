use super::*;
use crate::tolerance::VERDICT;

fn delta(sites: &[usize], t: i64) -> SpatialSet {
    SpatialSet::new(sites.iter().copied(), t)
}

#[test]
fn hopping_is_translation_invariant() {
    let m = LatticeModel::hopping(8);
    let t = m.shift();
    let moved = m.hamiltonian().conjugate_by(t);
    assert!(moved.max_abs_diff(m.hamiltonian()) < 1e-15);
}

#[test]
fn sharp_map_is_covariant_and_strictly_localizable() {
    let model = LatticeModel::hopping(8);
    let map = sharp_position_map(&model);
    for a in -3..=9 {
        assert!(check_covariance(&map, a, VERDICT).holds);
    }
    let r = check_localizability(
        &map,
        &delta(&[0, 1], 0),
        &delta(&[3], 0),
        Variant::Strict,
        VERDICT,
    )
    .unwrap();
    assert!(r.holds && r.residual < 1e-14);
    assert!(map.singleton(3).is_sharp(1e-12));
}

#[test]
fn localizability_rejects_bad_sets() {
    let map = sharp_position_map(&LatticeModel::hopping(6));
    assert!(matches!(
        check_localizability(
            &map,
            &delta(&[0, 1], 0),
            &delta(&[1], 0),
            Variant::Weak,
            VERDICT
        ),
        Err(Error::InvalidSets(_))
    ));
    assert!(matches!(
        check_localizability(
            &map,
            &delta(&[0], 0),
            &delta(&[2], 1),
            Variant::Weak,
            VERDICT
        ),
        Err(Error::InvalidSets(_))
    ));
}

#[test]
fn smeared_singletons_are_strongly_unsharp() {
    let model = LatticeModel::hopping(16);
    let map = smeared_position_map(&model, &three_point_kernel(16)).unwrap();
    assert!(singletons_strongly_unsharp(&map, VERDICT));
    assert!(check_covariance(&map, 5, VERDICT).holds);
    assert!((map.singleton(0).max_eigenvalue() - 0.5).abs() < 1e-12);
    let r = check_localizability(
        &map,
        &delta(&[0], 0),
        &delta(&[1], 0),
        Variant::Strict,
        VERDICT,
    )
    .unwrap();
    assert!(!r.holds);
    assert!((r.residual - 0.125).abs() < 1e-12);
}

#[test]
fn kernel_validation() {
    let model = LatticeModel::static_model(4);
    assert!(matches!(
        smeared_position_map(&model, &[0.5, 0.5, 0.1, 0.0]),
        Err(Error::InvalidKernel(_))
    ));
    assert!(matches!(
        smeared_position_map(&model, &[1.2, -0.2, 0.0, 0.0]),
        Err(Error::InvalidKernel(_))
    ));
    assert!(matches!(
        smeared_position_map(&model, &[1.0]),
        Err(Error::InvalidKernel(_))
    ));
}

#[test]
fn coherent_povm_resolves_identity() {
    let n = 8;
    let povm = coherent_state_povm(n, &default_fiducial(n)).unwrap();
    assert_eq!(povm.len(), n * n);
    assert!(povm.is_normalized());
    let map = position_marginal(&povm, &LatticeModel::hopping(n)).unwrap();
    assert!(is_normalized(&map));
    assert!(check_covariance(&map, 3, VERDICT).holds);
    assert!(singletons_strongly_unsharp(&map, VERDICT));
}

#[test]
fn coherent_rejects_non_unit_fiducial() {
    let mut f = default_fiducial(4);
    f[0] *= 2.0;
    assert!(matches!(
        coherent_state_povm(4, &f),
        Err(Error::NonUnitVector { .. })
    ));
}

#[test]
fn marginal_rejects_incomplete_grid() {
    let n = 3;
    let povm = coherent_state_povm(n, &default_fiducial(n)).unwrap();
    let model = LatticeModel::hopping(4);
    assert!(position_marginal(&povm, &model).is_err());
}

#[test]
fn spacelike_uses_cyclic_distance() {
    let model = LatticeModel::hopping(10);
    assert!(spacelike_separated(
        &delta(&[0], 0),
        &delta(&[2], 1),
        &model
    ));
    assert!(!spacelike_separated(
        &delta(&[0], 0),
        &delta(&[1], 1),
        &model
    ));
    assert!(spacelike_separated(
        &delta(&[0], 0),
        &delta(&[8], 1),
        &model
    ));
    assert!(!spacelike_separated(
        &delta(&[0], 0),
        &delta(&[9], 1),
        &model
    ));
    assert!(spacelike_separated(
        &delta(&[0], 3),
        &delta(&[1], 3),
        &model
    ));
}

#[test]
fn local_commutativity_fails_for_sharp_hopping() {
    let model = LatticeModel::hopping(16);
    let map = sharp_position_map(&model);
    let r = check_local_commutativity(&map, &delta(&[0], 0), &delta(&[2], 1), 1e-3).unwrap();
    assert!(r.applicable);
    assert_eq!(r.holds, Some(false));
    assert!(r.commutator > 0.1);

    let r = check_local_commutativity(&map, &delta(&[0], 0), &delta(&[1], 1), 1e-3).unwrap();
    assert_eq!(r.holds, None);
}

#[test]
fn static_model_commutes() {
    let model = LatticeModel::static_model(8);
    let map = sharp_position_map(&model);
    let r = check_local_commutativity(&map, &delta(&[0], 0), &delta(&[2], 1), VERDICT).unwrap();
    assert_eq!(r.holds, Some(true));
    assert_eq!(r.commutator, 0.0);
}

#[test]
fn custom_map_needs_site_outcomes() {
    let model = LatticeModel::static_model(2);
    let pom = Pom::with_outcomes(
        vec![Outcome::from("a"), Outcome::from("b")],
        vec![
            Matrix::from_diag(&[1.0, 0.0]),
            Matrix::from_diag(&[0.0, 1.0]),
        ],
        true,
    )
    .unwrap();
    assert!(LocalizationMap::new(pom, model).is_err());
}

#[test]
fn config_round_trip() {
    let text = r#"{"n_sites": 8, "hamiltonian": "hopping", "construction": "smeared",
                   "kernel": [0.5, 0.25, 0, 0, 0, 0, 0, 0.25]}"#;
    let cfg = ModelConfig::from_json(text).unwrap();
    let built = cfg.build().unwrap();
    assert_eq!(built.map.construction(), Construction::Smeared);
    let again: ModelConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(again, cfg);

    let bad = r#"{"n_sites": 4, "hamiltonian": "ising", "construction": "sharp"}"#;
    assert!(ModelConfig::from_json(bad).unwrap().build().is_err());
    let bad = r#"{"n_sites": 4, "construction": "sharp", "kernel": [1,0,0,0]}"#;
    assert!(ModelConfig::from_json(bad).unwrap().build().is_err());
}

#[test]
fn max_unwrapped_slices_respects_half_lattice() {
    assert_eq!(LatticeModel::hopping(8).max_unwrapped_slices(), 3);
    assert_eq!(LatticeModel::hopping(32).max_unwrapped_slices(), 15);
    let slow = LatticeModel::new(8, hopping_hamiltonian(8), 0.5, 1.0).unwrap();
    assert_eq!(slow.max_unwrapped_slices(), 7);
}
