mod common;

use std::collections::BTreeMap;

use common::{qudit, xyz};
use lindcert::catalog::{self, FlipRates, CATALOG};
use lindcert::config::{Model, ModelConfig};
use lindcert::lattice::{Region, Site};
use lindcert::linalg::{self, CMat};
use lindcert::random;
use lindcert::verify::{verify, VerifyOptions};
use proptest::prelude::*;
use rand::Rng;

fn cert_json(cfg: &ModelConfig) -> String {
    serde_json::to_string(&cfg.build().unwrap().certificate()).unwrap()
}

fn objective(family: &[([CMat; 2], CMat)], p: [f64; 2]) -> f64 {
    family
        .iter()
        .map(|(a, l)| linalg::op_norm(&(linalg::scale_re(&a[0], p[0]) + linalg::scale_re(&a[1], p[1]) - l)))
        .sum()
}

#[test]
fn every_builtin_round_trips_bit_for_bit() {
    for entry in CATALOG {
        let cfg = catalog::builtin(entry.name, &BTreeMap::new()).unwrap();
        let back = ModelConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cert_json(&cfg), cert_json(&back), "{}", entry.name);
        let path = std::env::temp_dir().join(format!("lindcert-rt-{}-{}.json", entry.name, std::process::id()));
        cfg.save(&path).unwrap();
        let loaded = ModelConfig::load(&path).unwrap();
        std::fs::remove_file(&path).unwrap();
        assert_eq!(cert_json(&cfg), cert_json(&loaded), "{}", entry.name);
    }
}

#[test]
fn unknown_model_and_parameters_are_rejected() {
    assert!(catalog::builtin("ising", &BTreeMap::new()).is_err());
    let bad = BTreeMap::from([("q".to_string(), 1.0)]);
    assert!(catalog::builtin("xyz", &bad).is_err());
    let frac = BTreeMap::from([("l".to_string(), 2.5)]);
    assert!(catalog::builtin("xyz", &frac).is_err());
}

#[test]
fn symmetric_dissipative_fit_reduces_to_xyz_site() {
    let jumps = catalog::perturbed_chain_jumps(0.5, 0.5, 0.0, 0.0, 0.0);
    let (cfg, data) = catalog::model_spin_dissipative("d", 1, 1, &jumps, vec![3]).unwrap();
    assert!((data.alpha[0] - 0.5).abs() < 1e-8 && (data.alpha[1] - 0.5).abs() < 1e-8);
    assert!(data.delta12 < 1e-8 && data.delta3 < 1e-8);
    let spec = qudit(&cfg);
    let (x, _) = xyz([0.0; 3], 1);
    let diff = &lindcert::single_site::build_l0(&spec.single_site).matrix
        - &lindcert::single_site::build_l0(&x.single_site).matrix;
    assert!(linalg::max_abs(&diff) < 1e-8);
    assert!((spec.spectral.eta - 2f64.sqrt()).abs() < 1e-8);
}

#[test]
fn degenerate_fit_is_an_error() {
    let jumps = catalog::perturbed_chain_jumps(0.0, 0.0, 0.3, 0.1, 0.0);
    assert!(catalog::model_spin_dissipative("d", 1, 1, &jumps, vec![3]).is_err());
}

#[test]
fn constant_rate_conjugation() {
    let rates = FlipRates::constant(1.0).unwrap();
    let (cfg, _) = catalog::model_classical_conjugation("c", &rates, 0.0, 3).unwrap();
    assert!(catalog::conjugation_residual(&cfg, &rates).unwrap() < 1e-10);
    let gen = cfg.build().unwrap().generator(&cfg.volume).unwrap();
    assert!(linalg::max_abs(&gen.apply(&linalg::eye(8))) < 1e-14);
}

#[test]
fn glauber_conjugation() {
    let rates = FlipRates::glauber(0.2);
    let (cfg, _) = catalog::model_classical_conjugation("g", &rates, 0.0, 4).unwrap();
    assert!(catalog::conjugation_residual(&cfg, &rates).unwrap() < 1e-9);
}

#[test]
fn negative_rates_are_rejected() {
    assert!(FlipRates::constant(-1.0).is_err());
    assert!(FlipRates::new(1, vec![1.0; 4]).is_err());
}

#[test]
fn xyz_certificate_examples() {
    let cfg = catalog::builtin("xyz", &BTreeMap::from([("j".to_string(), 0.0)])).unwrap();
    let c = cfg.build().unwrap().certificate();
    assert_eq!(c.m, 0.0);
    assert_eq!(c.margin, c.lambda1);
    let c = catalog::builtin("xyz", &BTreeMap::from([("j".to_string(), 1.0)])).unwrap().build().unwrap().certificate();
    assert!(!c.pass);
}

#[test]
fn fermion_hopping_example() {
    let cfg = catalog::model_fermion_hopping(0.05, 1, 0.0, 4);
    let c = cfg.build().unwrap().certificate();
    assert!((c.m - 1.6).abs() < 1e-12);
    assert!((c.lambda1 - 2.0).abs() < 1e-12);
    assert!(c.pass);
    let Model::Fermion(_) = cfg.build().unwrap() else { panic!("expected fermions") };
}

#[test]
fn verify_is_deterministic_for_a_fixed_seed() {
    let cfg = catalog::builtin("classical_constant", &BTreeMap::new()).unwrap();
    let opts = VerifyOptions { seed: 17, ..Default::default() };
    let a = verify(&cfg, &opts).unwrap();
    let b = verify(&cfg, &opts).unwrap();
    assert_eq!(serde_json::to_string(&a.checks).unwrap(), serde_json::to_string(&b.checks).unwrap());
    assert_eq!(a.skipped, b.skipped);
    assert!(a.all_pass());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn delta_fit_beats_random_probes(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let mut p = || rng.random_range(-1.0..1.0);
        let jumps = catalog::perturbed_chain_jumps(p(), p(), p(), p(), 0.2 * p());
        let ball = Region::ball(&Site::origin(1), 1);
        let (f12, f3) = catalog::delta_families(&jumps, &ball).unwrap();
        for fam in [f12, f3] {
            let fit = catalog::minimize_affine(&fam);
            prop_assert!((objective(&fam, fit.params) - fit.value).abs() < 1e-12 * (1.0 + fit.value));
            let mut probe = random::rng(seed ^ 0x9e37);
            for _ in 0..1000 {
                let q = [probe.random_range(-3.0..3.0), probe.random_range(-3.0..3.0)];
                prop_assert!(fit.value <= objective(&fam, q) + 1e-8);
            }
        }
    }

    #[test]
    fn exact_m_stays_below_closed_form_bound(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let a0 = rng.random_range(0.3..1.2);
        let a1 = rng.random_range(0.3..1.2);
        let (b0, b1) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let eps = rng.random_range(0.0..0.05);
        let jumps = catalog::perturbed_chain_jumps(a0, a1, b0, b1, eps);
        let (cfg, data) = catalog::model_spin_dissipative("d", 1, 1, &jumps, vec![3]).unwrap();
        let cert = cfg.build().unwrap().certificate();
        prop_assert!(cert.m <= data.m_bound * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn xyz_config_round_trip(j1 in -1.0f64..1.0, j2 in -1.0f64..1.0, j3 in -1.0f64..1.0, l in 1usize..5) {
        let cfg = catalog::model_xyz([j1, j2, j3], 1, l);
        let back = ModelConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(cert_json(&cfg), cert_json(&back));
    }
}
