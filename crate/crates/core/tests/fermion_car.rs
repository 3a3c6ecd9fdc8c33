mod common;

use common::{close, s};
use lindcert::catalog;
use lindcert::config::Model;
use lindcert::fermion::{self, build_car, Derivation, FermionModelSpec};
use lindcert::lattice::Region;
use lindcert::linalg::{self, CMat};
use lindcert::random;
use proptest::prelude::*;

fn hopping(j: f64, h: f64) -> FermionModelSpec {
    match catalog::model_fermion_hopping(j, 1, h, 3).build().unwrap() {
        Model::Fermion(f) => f,
        Model::Qudit(_) => panic!("expected fermions"),
    }
}

#[test]
fn single_mode() {
    let rep = build_car(&Region::chain(0, 1), 0.0);
    let a = &rep.a[0];
    assert!(close(a, &linalg::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]), 0.0));
    assert!(close(&linalg::anticommutator(a, &linalg::dagger(a)), &linalg::eye(2), 0.0));
}

#[test]
fn all_car_pairings_on_three_modes() {
    let rep = build_car(&Region::chain(0, 3), 0.0);
    let (id, zero) = (linalg::eye(8), linalg::zeros(8));
    let mut checked = 0;
    for x in 0..3 {
        for y in 0..3 {
            let (ax, ay) = (&rep.a[x], &rep.a[y]);
            let (axs, ays) = (linalg::dagger(ax), linalg::dagger(ay));
            assert!(close(&linalg::anticommutator(ax, ay), &zero, 0.0));
            assert!(close(&linalg::anticommutator(&axs, &ays), &zero, 0.0));
            assert!(close(&linalg::anticommutator(ax, &ays), if x == y { &id } else { &zero }, 0.0));
            assert!(close(&linalg::anticommutator(&axs, ay), if x == y { &id } else { &zero }, 0.0));
            checked += 4;
        }
    }
    assert_eq!(checked, 36);
    assert!(fermion::car_residual(&rep) < 1e-15);
}

#[test]
fn parity_operator_on_basis_states() {
    let rep = build_car(&Region::chain(0, 3), 0.0);
    for state in 0..8usize {
        let mut e = CMat::zeros(8, 1);
        e[(state, 0)] = linalg::ONE;
        let sign = if state.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        assert!(close(&(&rep.w * &e), &linalg::scale_re(&e, sign), 0.0));
    }
}

#[test]
fn derivation_table() {
    let rep = build_car(&Region::chain(0, 3), 0.4);
    let one = linalg::eye(8);
    for kind in [Derivation::D, Derivation::DBar, Derivation::DCheck, Derivation::DBarCheck] {
        assert_eq!(linalg::max_abs(&rep.derivation(kind, &s(1), &one).unwrap()), 0.0);
    }
    for k in 0..3 {
        let a = &rep.a[k];
        let ad = linalg::dagger(a);
        assert!(close(&rep.big_d(k, &ad), &ad, 1e-14));
        assert!(close(&rep.big_dbar(k, a), a, 1e-14));
    }
    assert!(rep.derivation(Derivation::D, &s(7), &one).is_err());
}

#[test]
fn skew_derivation_law() {
    let rep = build_car(&Region::chain(0, 3), 0.0);
    let mut rng = random::rng(12);
    for _ in 0..5 {
        let (f, g) = (random::matrix(&mut rng, 8), random::matrix(&mut rng, 8));
        let adw = &rep.w * &f * &rep.w;
        for kind in [Derivation::D, Derivation::DBar] {
            let lhs = rep.derivation(kind, &s(1), &(&f * &g)).unwrap();
            let rhs = rep.derivation(kind, &s(1), &f).unwrap() * &g + &adw * rep.derivation(kind, &s(1), &g).unwrap();
            assert!(linalg::max_abs(&(lhs - rhs)) < 1e-10);
        }
    }
}

#[test]
fn decomposition_identity() {
    let rep = build_car(&Region::chain(0, 3), 0.2);
    assert!(fermion::decomposition_residual(&rep, &linalg::eye(8)) < 1e-15);
    for k in 0..3 {
        let n = rep.number(k);
        // n_x − E_x n_x = n_x − ½
        let e = rep.e_x(k, &n);
        assert!(close(&e, &linalg::scale_re(&linalg::eye(8), 0.5), 1e-14));
    }
    let mut rng = random::rng(13);
    for _ in 0..5 {
        let f = random::matrix(&mut rng, 8);
        assert!(fermion::decomposition_residual(&rep, &f) < 1e-10);
    }
}

#[test]
fn ou_single_site_gap() {
    for h in [0.0, 0.5, -1.3, 2.0] {
        let rep = build_car(&Region::chain(0, 1), h);
        let gen = rep.fermi_ou_generator();
        let mut ev: Vec<f64> = linalg::eigvals(&gen.heisenberg().matrix).unwrap().iter().map(|z| -z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!(ev[0].abs() < 1e-12);
        assert!((ev[1] - 2.0 * (h / 2.0).cosh()).abs() < 1e-10, "h = {h}: {ev:?}");
        assert!(linalg::max_abs(&gen.apply(&linalg::eye(2))) < 1e-14);
    }
    assert_eq!(fermion::ou_gap(0.0), 2.0);
}

#[test]
fn ou_intertwining_and_symmetry() {
    let rep = build_car(&Region::chain(0, 2), 0.0);
    assert!(fermion::intertwining_residual(&rep) < 1e-10);
    assert!(fermion::ou_gns_symmetry_residual(&rep) < 1e-10);
}

#[test]
fn hopping_term_norm() {
    for j in [0.1, -0.7, 2.0] {
        assert!((linalg::op_norm(&catalog::hopping_matrix(j)) - j.abs()).abs() < 1e-14);
    }
}

#[test]
fn hopping_theta_table() {
    let j = 0.03;
    let spec = hopping(j, 0.0);
    let cols = fermion::theta_columns(&spec);
    assert!(!cols.is_empty());
    for col in cols {
        for (x, theta, _) in &col.entries {
            let want = match x.dist(&col.y) {
                0 => 8.0 * j,
                1 => 4.0 * j,
                _ => 0.0,
            };
            assert!((theta - want).abs() < 1e-12, "θ({x}, {}) = {theta}", col.y);
        }
    }
}

#[test]
fn hopping_certificate() {
    let j = 0.02;
    let cert = fermion::fermion_certificate(&hopping(j, 0.0));
    assert!((cert.m - 32.0 * j).abs() < 1e-12);
    let free = fermion::fermion_certificate(&hopping(0.0, 0.3));
    assert_eq!(free.m, 0.0);
    assert!(free.pass);
    for h in [0.0, 1.0, 3.0] {
        let edge = (h / 2.0f64).cosh() / 16.0;
        for jj in [0.5 * edge, 0.99 * edge, 1.01 * edge, 2.0 * edge] {
            let cert = fermion::fermion_certificate(&hopping(jj, h));
            assert_eq!(cert.pass, jj < edge, "h = {h}, j = {jj}");
            assert_eq!(cert.pass, catalog::hopping_criterion(jj, 1, h));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn e_x_is_a_conditional_expectation(seed in any::<u64>(), k in 0usize..3) {
        let rep = build_car(&Region::chain(0, 3), 0.0);
        let mut rng = random::rng(seed);
        let f = random::matrix(&mut rng, 8);
        let e = rep.e_x(k, &f);
        prop_assert!(close(&rep.e_x(k, &e), &e, 1e-12));
        prop_assert!((linalg::trace(&e) - linalg::trace(&f)).norm() < 1e-12);
        prop_assert!(linalg::op_norm(&e) <= linalg::op_norm(&f) * (1.0 + 1e-12));
    }
}
