mod common;

use common::{close, kron_list, qubit_at, qudit, s, xyz};
use lindcert::catalog::{self, FlipRates};
use lindcert::config::Boundary;
use lindcert::dynamics::{self, BoundConstants};
use lindcert::lattice::Region;
use lindcert::linalg::{self, pauli, CMat};
use lindcert::locality::{self, QuditCalculus};
use lindcert::model::{self, FiniteVolumeGenerator};
use lindcert::operator::LocalOperator;
use lindcert::random;
use lindcert::superop::LindbladForm;
use rand::Rng;

/// Classical RK4 on `df/dt = 𝓛f` with a fixed step.
fn rk4(gen: &FiniteVolumeGenerator, f: &CMat, t: f64, h: f64) -> CMat {
    let n = (t / h).round() as usize;
    let h = t / n as f64;
    let mut x = f.clone();
    for _ in 0..n {
        let k1 = gen.apply(&x);
        let k2 = gen.apply(&(&x + linalg::scale_re(&k1, h / 2.0)));
        let k3 = gen.apply(&(&x + linalg::scale_re(&k2, h / 2.0)));
        let k4 = gen.apply(&(&x + linalg::scale_re(&k3, h)));
        x += linalg::scale_re(&(k1 + linalg::scale_re(&k2, 2.0) + linalg::scale_re(&k3, 2.0) + k4), h / 6.0);
    }
    x
}

fn periodic_dissipative(eps: f64, l: usize) -> (model::ModelSpec, Region) {
    let jumps = catalog::perturbed_chain_jumps(0.6, 0.9, 0.3, -0.2, eps);
    let (mut cfg, _) = catalog::model_spin_dissipative("d", 1, 1, &jumps, vec![l]).unwrap();
    cfg.volume.boundary = Boundary::Periodic;
    let spec = cfg.build().unwrap().qudit_spec_on(&cfg.volume).unwrap().unwrap();
    (spec, cfg.region().unwrap())
}

#[test]
fn evolution_at_time_zero_is_identity() {
    let (spec, volume) = xyz([0.1, 0.2, 0.3], 2);
    let gen = model::assemble(&spec, &volume).unwrap();
    let mut rng = random::rng(1);
    let f = random::matrix(&mut rng, 4);
    let r = dynamics::evolve(&gen, &f, &[0.0], None, None).unwrap();
    assert!(close(&r.observables[0], &f, 1e-15));
}

#[test]
fn single_site_sigma3_decays_exponentially() {
    let (spec, volume) = xyz([0.0; 3], 1);
    let gen = model::assemble(&spec, &volume).unwrap();
    let times = dynamics::time_grid(0.0, 3.0, 7);
    let r = dynamics::evolve(&gen, &pauli::z(), &times, None, None).unwrap();
    // L₀σ₃ = −2σ₃ for the σ/2 jumps
    for (t, f) in times.iter().zip(&r.observables) {
        assert!(close(f, &linalg::scale_re(&pauli::z(), (-2.0 * t).exp()), 1e-12), "t = {t}");
    }
}

#[test]
fn matrix_exponential_matches_rk4() {
    let mut rng = random::rng(2);
    let j: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let (spec, volume) = xyz(j, 2);
    let gen = model::assemble(&spec, &volume).unwrap();
    let f = random::matrix(&mut rng, 4);
    for t in [0.3, 1.0] {
        let exact = dynamics::apply(&dynamics::propagator(&gen, t).unwrap(), &f);
        let approx = rk4(&gen, &f, t, 1e-3);
        assert!(linalg::max_abs(&(&exact - &approx)) <= 1e-6 * linalg::max_abs(&exact));
    }
}

#[test]
fn unperturbed_stationary_state_is_a_product() {
    let (spec, volume) = periodic_dissipative(0.0, 3);
    let gen = model::assemble(&spec, &volume).unwrap();
    let st = dynamics::stationary_state(&gen).unwrap();
    let rho = &spec.single_site.rho;
    assert!(close(&st.density, &kron_list(&[rho.clone(), rho.clone(), rho.clone()]), 1e-10));
    assert_eq!(st.degeneracy, Some(1));
}

#[test]
fn xyz_without_coupling_is_maximally_mixed() {
    let (spec, volume) = xyz([0.0; 3], 3);
    let st = dynamics::stationary_state(&model::assemble(&spec, &volume).unwrap()).unwrap();
    assert!(close(&st.density, &linalg::scale_re(&linalg::eye(8), 0.125), 1e-12));
}

#[test]
fn glauber_stationary_state_is_ising_gibbs() {
    let (beta, l) = (0.3, 3);
    let (cfg, _) = catalog::model_classical_conjugation("g", &FlipRates::glauber(beta), 0.0, l).unwrap();
    let gen = cfg.build().unwrap().generator(&cfg.volume).unwrap();
    let st = dynamics::stationary_state(&gen).unwrap();
    let spin = |c: usize, x: usize| if (c >> (l - 1 - x)) & 1 == 0 { 1.0 } else { -1.0 };
    let w: Vec<f64> =
        (0..8).map(|c| (beta * (0..l).map(|x| spin(c, x) * spin(c, (x + 1) % l)).sum::<f64>()).exp()).collect();
    let z: f64 = w.iter().sum();
    for (c, wc) in w.iter().enumerate() {
        assert!((st.density[(c, c)].re - wc / z).abs() < 1e-10, "config {c}");
    }
}

#[test]
fn intertwining_for_xyz_chain() {
    let (spec, volume) = xyz([0.0; 3], 3);
    let l0 = model::unperturbed_generator(&spec, &volume).unwrap();
    let calc = QuditCalculus::new(volume, spec.spectral.clone());
    assert!(dynamics::intertwining_residual(&l0, &calc).unwrap() < 1e-10);
}

#[test]
fn intertwining_for_random_detailed_balance() {
    let mut rng = random::rng(5);
    for _ in 0..3 {
        let g = lindcert::single_site::random_detailed_balance(2, &mut rng);
        let volume = Region::chain(0, 2);
        let mut form = LindbladForm::new(4);
        for x in volume.sites() {
            for l in &g.jumps {
                form.add_jump(&LocalOperator::at(x.clone(), 2, l.clone()).unwrap().matrix_on(&volume).unwrap());
            }
        }
        let l0 = FiniteVolumeGenerator::from_form(volume.clone(), 2, form);
        let sd = lindcert::single_site::spectral_decompose(&g, &lindcert::single_site::build_l0(&g)).unwrap();
        let calc = QuditCalculus::new(volume, sd);
        assert!(dynamics::intertwining_residual(&l0, &calc).unwrap() < 1e-9);
    }
}

fn constants(spec: &model::ModelSpec, volume: &Region) -> BoundConstants {
    let cert = locality::certify(spec);
    let theta = locality::compute_theta(spec, volume);
    BoundConstants { lambda1: cert.lambda1, m: cert.m.max(theta.max_column_sum()), c0: cert.c0, theta: Some(theta) }
}

#[test]
fn resolvent_of_identity_and_small_coupling() {
    let (spec, volume) = xyz([0.001; 3], 3);
    let gen = model::assemble(&spec, &volume).unwrap();
    let calc = QuditCalculus::new(volume.clone(), spec.spectral.clone());
    let k = constants(&spec, &volume);
    let one = linalg::eye(8);
    let r = dynamics::check_resolvent_bound(&gen, &calc, &k, 1.0, &[one]).unwrap();
    assert!(r.scalar.abs() < 1e-12);
    let mut rng = random::rng(6);
    let fs: Vec<CMat> = (0..50).map(|_| random::matrix(&mut rng, 8)).collect();
    let r = dynamics::check_resolvent_bound(&gen, &calc, &k, 1.0, &fs).unwrap();
    assert!(r.scalar >= -1e-9 && r.pointwise.unwrap() >= -1e-9);
}

#[test]
fn contraction_without_perturbation() {
    let (spec, volume) = xyz([0.0; 3], 2);
    let gen = model::assemble(&spec, &volume).unwrap();
    let calc = QuditCalculus::new(volume.clone(), spec.spectral.clone());
    let k = constants(&spec, &volume);
    let f = qubit_at(&pauli::z(), 0, 2);
    let times = dynamics::time_grid(0.0, 3.0, 10);
    let r = dynamics::evolve(&gen, &f, &times, Some(&calc), None).unwrap();
    // ⦀P_tσ₃⦀ = e^{−2t} against the bound e^{−λ₁t} with λ₁ = 1
    for (t, v) in times.iter().zip(r.seminorm_trace.unwrap()) {
        assert!((v - (-2.0 * t).exp()).abs() < 1e-12);
    }
    let slack = dynamics::check_contraction(&gen, &calc, &k, std::slice::from_ref(&f), &[0.0]).unwrap();
    assert!(slack.scalar.abs() < 1e-12);
    let slack = dynamics::check_contraction(&gen, &calc, &k, &[f], &times).unwrap();
    assert!(slack.scalar >= 0.0);
}

#[test]
fn contraction_for_weak_xyz_chain() {
    let (spec, volume) = xyz([0.001; 3], 4);
    let gen = model::assemble(&spec, &volume).unwrap();
    let calc = QuditCalculus::new(volume.clone(), spec.spectral.clone());
    let k = constants(&spec, &volume);
    let mut rng = random::rng(8);
    let fs: Vec<CMat> = (0..4).map(|_| random::hermitian(&mut rng, 16)).collect();
    let slack = dynamics::check_contraction(&gen, &calc, &k, &fs, &dynamics::time_grid(0.0, 3.0, 7)).unwrap();
    assert!(slack.scalar >= -1e-9);
}

#[test]
fn convergence_bounds() {
    let (spec, volume) = xyz([0.0; 3], 2);
    let gen = model::assemble(&spec, &volume).unwrap();
    let calc = QuditCalculus::new(volume.clone(), spec.spectral.clone());
    let k = constants(&spec, &volume);
    let pi = dynamics::stationary_state(&gen).unwrap().density;
    let times = dynamics::time_grid(0.0, 5.0, 11);
    let one = linalg::eye(4);
    assert!(dynamics::check_convergence(&gen, &calc, &k, &pi, &[one], &times).unwrap().abs() < 1e-12);
    let mut rng = random::rng(9);
    let fs: Vec<CMat> = (0..5).map(|_| random::hermitian(&mut rng, 4)).collect();
    assert!(dynamics::check_convergence(&gen, &calc, &k, &pi, &fs, &times).unwrap() >= 0.0);

    let (spec, volume) = xyz([0.002; 3], 3);
    let gen = model::assemble(&spec, &volume).unwrap();
    let calc = QuditCalculus::new(volume.clone(), spec.spectral.clone());
    let k = constants(&spec, &volume);
    let pi = dynamics::stationary_state(&gen).unwrap().density;
    let fs: Vec<CMat> = (0..3).map(|_| random::hermitian(&mut rng, 8)).collect();
    assert!(dynamics::check_convergence(&gen, &calc, &k, &pi, &fs, &times).unwrap() >= -1e-9);
}

#[test]
fn product_dynamics_factorizes() {
    let (spec, volume) = xyz([0.0; 3], 3);
    let gen = model::assemble(&spec, &volume).unwrap();
    let mut rng = random::rng(10);
    let f1 = qubit_at(&random::matrix(&mut rng, 2), 0, 3);
    let f2 = qubit_at(&random::matrix(&mut rng, 2), 2, 3);
    for t in [0.0, 0.5, 2.0] {
        let p = dynamics::propagator(&gen, t).unwrap();
        let lhs = dynamics::apply(&p, &(&f1 * &f2)) - dynamics::apply(&p, &f1) * dynamics::apply(&p, &f2);
        assert!(linalg::op_norm(&lhs) < 1e-12);
    }
}

#[test]
fn correlations_vanish_for_product_states() {
    let (spec, volume) = periodic_dissipative(0.0, 3);
    let gen = model::assemble(&spec, &volume).unwrap();
    let pi = dynamics::stationary_state(&gen).unwrap().density;
    let calc = QuditCalculus::new(volume, spec.spectral.clone());
    let mut rng = random::rng(11);
    let f1 = qubit_at(&random::hermitian(&mut rng, 2), 0, 3);
    let f2 = qubit_at(&random::hermitian(&mut rng, 2), 1, 3);
    let pts = dynamics::check_correlation_decay(&pi, &calc, 1.0, 1.0, &[(f1.clone(), f2, 1.0), (f1, linalg::eye(8), 1.0)]);
    assert!(pts.iter().all(|p| p.correlation < 1e-10));
}

#[test]
fn volume_limit_increments() {
    let (spec, _) = xyz([0.0; 3], 1);
    let f = LocalOperator::at(s(0), 2, pauli::z()).unwrap();
    let vols = [Region::chain(0, 1), Region::chain(-1, 3), Region::chain(-2, 5)];
    let r = dynamics::check_volume_limit(&spec, &f, 1.0, &vols).unwrap();
    assert!(r.increments.iter().all(|&x| x < 1e-12));

    let (spec, _) = xyz([0.01; 3], 1);
    let r = dynamics::check_volume_limit(&spec, &f, 0.0, &vols).unwrap();
    assert!(r.increments.iter().all(|&x| x == 0.0));
    let r = dynamics::check_volume_limit(&spec, &f, 1.0, &vols).unwrap();
    assert!(r.increments[1] * 10.0 <= r.increments[0], "{:?}", r.increments);
    assert!(r.pass);
}

#[test]
fn choi_matrix_is_positive() {
    let spec = qudit(&catalog::builtin("classical_constant", &Default::default()).unwrap());
    let gen = model::assemble(&spec, &Region::chain(0, 2)).unwrap();
    assert!(dynamics::choi_min_eigenvalue(&gen, 0.7) > -1e-10);
    let z = kron_list(&[pauli::z(), pauli::z()]);
    let out = dynamics::apply(&dynamics::propagator(&gen, 0.0).unwrap(), &z);
    assert!(close(&out, &z, 1e-14));
}
