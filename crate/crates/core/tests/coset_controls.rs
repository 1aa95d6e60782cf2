use qglab_core::coset::{
    bare_action, group_action, random_bond_unitary, random_group_element, verify_invariance, CosetPoint, Profile,
};
use qglab_core::grassmann::{superspace_grading, SuperMatrix};
use qglab_core::rng::rng_from_seed;
use qglab_core::Grassmann64;

const BONDS: usize = 2;

fn action(points: &[CosetPoint<f64>], bcal: &SuperMatrix<f64>) -> Grassmann64 {
    let z: Vec<_> = points.iter().map(|p| p.z().clone()).collect();
    let zt: Vec<_> = points.iter().map(|p| p.zt().clone()).collect();
    bare_action(&SuperMatrix::block_diag(&z), &SuperMatrix::block_diag(&zt), bcal).unwrap()
}

#[test]
fn bond_dependent_transformations_break_invariance() {
    for (gens, seed) in [(2, 1u64), (4, 2), (4, 3)] {
        let mut rng = rng_from_seed(seed);
        let points: Vec<_> = (0..BONDS).map(|_| CosetPoint::<f64>::random(gens, Profile::Generic, &mut rng)).collect();
        let u = random_bond_unitary::<f64>(BONDS, &mut rng);
        let b = SuperMatrix::outer_numeric(gens, &u, &superspace_grading());
        let g: Vec<_> = (0..BONDS).map(|_| random_group_element::<f64>(gens, &mut rng)).collect();
        let before = action(&points, &b);

        let uniform: Vec<_> = points.iter().map(|p| group_action(&g[0], p).unwrap()).collect();
        let mixed: Vec<_> = points.iter().zip(&g).map(|(p, gb)| group_action(gb, p).unwrap()).collect();
        let same = action(&uniform, &b).max_abs_diff(&before);
        let broken = action(&mixed, &b).max_abs_diff(&before);
        assert!(same < 1e-9, "G={gens}: uniform g0 moved the action by {same}");
        assert!(broken > 1e-4, "G={gens}: bond-dependent g left the action unchanged ({broken})");

        let checks = verify_invariance(&g[0], &points, &u).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
    }
}

#[test]
fn invariance_rejects_mismatched_bond_count() {
    let mut rng = rng_from_seed(9);
    let points: Vec<_> = (0..BONDS).map(|_| CosetPoint::<f64>::random(2, Profile::Generic, &mut rng)).collect();
    let u = random_bond_unitary::<f64>(BONDS + 1, &mut rng);
    let g = random_group_element::<f64>(2, &mut rng);
    assert!(verify_invariance(&g, &points, &u).is_err());
}
