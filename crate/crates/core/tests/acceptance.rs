//! Acceptance suite: one line per criterion with the measured quantity,
//! the pinned tolerance and the runtime budget. Exits nonzero if any
//! criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use lindcert::catalog::{self, FlipRates};
use lindcert::config::{to_doc, Boundary, InteractionDoc, Model, ModelConfig, SingleSiteDoc, Statistics, VolumeDoc};
use lindcert::dynamics::{self, BoundConstants, PropagationConstants};
use lindcert::fermion::{self, FermionCalculus};
use lindcert::lattice::{Region, Site};
use lindcert::linalg::{self, CMat};
use lindcert::locality::{self, QuditCalculus};
use lindcert::model::{self, FiniteVolumeGenerator, ModelSpec};
use lindcert::random::{self, Rng64};
use lindcert::single_site::{self, build_l0};
use lindcert::wasserstein;
use rand::Rng;

type Outcome = Result<(bool, String), String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "XYZ single-site spectrum and eta", budget: Duration::from_secs(1), run: c1 },
        Criterion { id: 2, name: "dissipative spin single-site spectrum", budget: Duration::from_secs(1), run: c2 },
        Criterion { id: 3, name: "intertwining residuals", budget: Duration::from_secs(10), run: c3 },
        Criterion { id: 4, name: "certificate constants", budget: Duration::from_secs(5), run: c4 },
        Criterion { id: 5, name: "resolvent bounds", budget: Duration::from_secs(30), run: c5 },
        Criterion { id: 6, name: "seminorm contraction", budget: Duration::from_secs(120), run: c6 },
        Criterion { id: 7, name: "convergence to stationarity", budget: Duration::from_secs(120), run: c7 },
        Criterion { id: 8, name: "propagation bound", budget: Duration::from_secs(60), run: c8 },
        Criterion { id: 9, name: "correlation decay", budget: Duration::from_secs(300), run: c9 },
        Criterion { id: 10, name: "CAR suite and decomposition", budget: Duration::from_secs(10), run: c10 },
        Criterion { id: 11, name: "classical conjugation", budget: Duration::from_secs(10), run: c11 },
        Criterion { id: 12, name: "complete positivity", budget: Duration::from_secs(60), run: c12 },
        Criterion { id: 13, name: "Wasserstein bracket and decay", budget: Duration::from_secs(120), run: c13 },
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let t = Instant::now();
        let outcome = (c.run)();
        let el = t.elapsed();
        let in_budget = el <= c.budget;
        let (pass, detail) = match outcome {
            Ok((ok, d)) => (ok && in_budget, d),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} | {} | {} | {:.2}s (budget {}s{})",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.name,
            detail,
            el.as_secs_f64(),
            c.budget.as_secs(),
            if in_budget { "" } else { ", exceeded" }
        );
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Eigenvalues of `−L₀` computed from the superoperator matrix.
fn minus_l0_spectrum(g: &single_site::SingleSiteGenerator) -> Result<Vec<f64>, String> {
    let l0 = build_l0(g);
    let ev = linalg::eigvals(&l0.matrix).map_err(err)?;
    Ok(sorted(ev.iter().map(|z| -z.re).collect()))
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn qudit(cfg: &ModelConfig) -> Result<ModelSpec, String> {
    match cfg.build().map_err(err)? {
        Model::Qudit(s) => Ok(s),
        Model::Fermion(_) => Err("expected a qudit model".into()),
    }
}

struct QuditSetup {
    volume: Region,
    gen: FiniteVolumeGenerator,
    calc: QuditCalculus,
    k: BoundConstants,
    spec: ModelSpec,
}

fn xyz_setup(j: f64, l: usize) -> Result<QuditSetup, String> {
    let cfg = catalog::model_xyz([j, j, j], 1, l);
    let spec = qudit(&cfg)?;
    let volume = cfg.region().map_err(err)?;
    let gen = model::assemble(&spec, &volume).map_err(err)?;
    let cert = locality::certify(&spec);
    let theta = locality::compute_theta(&spec, &volume);
    let k = BoundConstants { lambda1: cert.lambda1, m: cert.m.max(theta.max_column_sum()), c0: cert.c0, theta: Some(theta) };
    let calc = QuditCalculus::new(volume.clone(), spec.spectral.clone());
    Ok(QuditSetup { volume, gen, calc, k, spec })
}

fn observables(rng: &mut Rng64, allowed: &[Site], volume: &Region, n: usize) -> Vec<CMat> {
    (0..n).map(|_| random::local_observable(rng, allowed, volume, 2)).collect()
}

fn c1() -> Outcome {
    let spec = qudit(&catalog::model_xyz([0.001; 3], 1, 1))?;
    let ev = minus_l0_spectrum(&spec.single_site)?;
    let want = [0.0, 2.0, 2.0, 4.0];
    let dev = max_dev(&ev, &want);
    let eta_dev = (spec.spectral.eta - 2f64.sqrt()).abs();
    Ok((
        dev <= 1e-10 && eta_dev <= 1e-10,
        format!("spectrum {ev:.6?} vs {want:?} (max dev {dev:.2e}, tol 1e-10); eta dev {eta_dev:.2e} (tol 1e-10)"),
    ))
}

fn c2() -> Outcome {
    let mut rng = random::rng(2);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let a0 = rng.random_range(0.2..1.2) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let a1 = rng.random_range(0.2..1.2);
        let (b0, b1) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let jumps = catalog::perturbed_chain_jumps(a0, a1, b0, b1, 0.0);
        let (cfg, _) = catalog::model_spin_dissipative("random", 1, 1, &jumps, vec![3]).map_err(err)?;
        let spec = qudit(&cfg)?;
        let ev = minus_l0_spectrum(&spec.single_site)?;
        let s = a0 * a0 + a1 * a1;
        let mu = 2.0 * s + (b0 - b1) * (b0 - b1);
        let want = sorted(vec![0.0, 4.0 * s, mu, mu]);
        worst = worst.max(max_dev(&ev, &want));
    }
    Ok((worst <= 1e-9, format!("3 random (α,β): max eigenvalue dev {worst:.2e} (tol 1e-9)")))
}

fn c3() -> Outcome {
    let tol = 1e-9;
    let s = xyz_setup(0.001, 3)?;
    let l0 = model::unperturbed_generator(&s.spec, &s.volume).map_err(err)?;
    let r_xyz = dynamics::intertwining_residual(&l0, &s.calc).map_err(err)?;

    let mut rng = random::rng(3);
    let g = single_site::random_detailed_balance(3, &mut rng);
    let cfg = ModelConfig {
        name: "random_q3".into(),
        statistics: Statistics::Qudit,
        site_dim: 3,
        dimension: 1,
        h_field: None,
        single_site: Some(SingleSiteDoc { rho: to_doc(&g.rho), jumps: g.jumps.iter().map(to_doc).collect(), basis: None }),
        interactions: vec![InteractionDoc {
            offsets: vec![vec![0]],
            hamiltonian: None,
            jumps: g.jumps.iter().map(to_doc).collect(),
            parity: 0,
            split: None,
            anchor: None,
        }],
        covariant: true,
        range: Some(0),
        volume: VolumeDoc { shape: vec![2], boundary: Boundary::Open },
    };
    let spec = qudit(&cfg)?;
    let volume = cfg.region().map_err(err)?;
    let l0 = model::unperturbed_generator(&spec, &volume).map_err(err)?;
    let r_rand = dynamics::intertwining_residual(&l0, &QuditCalculus::new(volume, spec.spectral.clone())).map_err(err)?;

    let mut r_f = 0.0f64;
    for h in [0.0, 1.0] {
        r_f = r_f.max(fermion::intertwining_residual(&fermion::build_car(&Region::chain(0, 2), h)));
    }
    Ok((
        r_xyz < tol && r_rand < tol && r_f < tol,
        format!("XYZ L=3 {r_xyz:.2e}, random q=3 L=2 {r_rand:.2e}, fermion |Λ|=2 h∈{{0,1}} {r_f:.2e} (tol 1e-9)"),
    ))
}

fn c4() -> Outcome {
    let mut ok = true;
    let mut parts = vec!["rel. tol 1e-12".to_string()];
    // |J| = Σ_j |J_j|, spread evenly over the three couplings
    for jn in [1e-3, 1e-2, 1e-1] {
        let js = [jn / 3.0; 3];
        let cert = locality::certify(&qudit(&catalog::model_xyz(js, 1, 4))?);
        let (c0_bound, m_bound) = catalog::xyz_bounds(&js, 1);
        // the C₀ bound is attained when J₁ = J₂ = J₃; compare up to rounding
        ok &= cert.m <= m_bound * (1.0 + 1e-12) && cert.c0 <= c0_bound * (1.0 + 1e-12);
        parts.push(format!(
            "|J|={jn:e}: M {:.4e} ≤ {m_bound:.4e}, C₀ − bound {:.1e}",
            cert.m,
            cert.c0 - c0_bound
        ));
    }
    for j in [0.01, 0.05] {
        let m = catalog::model_fermion_hopping(j, 1, 0.0, 4).build().map_err(err)?.certificate().m;
        let dev = (m - 32.0 * j).abs();
        ok &= dev <= 1e-9;
        parts.push(format!("fermion J={j}: M {m:.6} vs 32|J| (dev {dev:.1e}, tol 1e-9)"));
    }
    Ok((ok, parts.join("; ")))
}

fn c5() -> Outcome {
    let s = xyz_setup(0.005, 3)?;
    let mut rng = random::rng(5);
    let fs = observables(&mut rng, s.volume.sites(), &s.volume, 50);
    let ps = dynamics::check_resolvent_bound(&s.gen, &s.calc, &s.k, 1.0, &fs).map_err(err)?;
    let pw = ps.pointwise.ok_or("no pointwise bound")?;
    Ok((pw >= -1e-9 && ps.scalar >= -1e-9, format!("worst slack pointwise {pw:.3e}, scalar {:.3e} (tol -1e-9)", ps.scalar)))
}

fn c6() -> Outcome {
    let s = xyz_setup(0.002, 4)?;
    let mut rng = random::rng(6);
    let fs = observables(&mut rng, s.volume.sites(), &s.volume, 20);
    let times = dynamics::time_grid(0.0, 3.0, 12);
    let ps = dynamics::check_contraction(&s.gen, &s.calc, &s.k, &fs, &times).map_err(err)?;
    let pw = ps.pointwise.ok_or("no pointwise bound")?;
    Ok((pw >= -1e-8 && ps.scalar >= -1e-8, format!("worst slack pointwise {pw:.3e}, scalar {:.3e} (tol -1e-8)", ps.scalar)))
}

fn c7() -> Outcome {
    let times = dynamics::time_grid(0.0, 3.0, 12);
    let s = xyz_setup(0.002, 4)?;
    let r = locality::effective_range(&s.spec);
    let inner: Vec<Site> = s.volume.sites().iter().filter(|x| s.volume.depth(x) >= r).cloned().collect();
    let mut rng = random::rng(7);
    let fs = observables(&mut rng, &inner, &s.volume, 20);
    let pi = dynamics::stationary_state(&s.gen).map_err(err)?.density;
    let q = dynamics::check_convergence(&s.gen, &s.calc, &s.k, &pi, &fs, &times).map_err(err)?;

    let cfg = catalog::model_fermion_hopping(0.05, 1, 0.0, 4);
    let spec = match cfg.build().map_err(err)? {
        Model::Fermion(f) => f,
        Model::Qudit(_) => return Err("expected a fermion model".into()),
    };
    let volume = cfg.region().map_err(err)?;
    let cert = fermion::fermion_certificate(&spec);
    let gen = fermion::fermion_generator(&spec, &volume).map_err(err)?;
    let rep = fermion::build_car(&volume, spec.h_field);
    let k = BoundConstants { lambda1: cert.lambda1, m: cert.m, c0: cert.c0, theta: None };
    let r = spec.effective_range();
    let inner: Vec<usize> = (0..volume.len()).filter(|&i| volume.depth(&volume.sites()[i]) >= r).collect();
    let fs: Vec<CMat> = (0..20)
        .map(|_| {
            let i = inner[rng.random_range(0..inner.len())];
            let mut sites = vec![i];
            if inner.contains(&(i + 1)) && rng.random_bool(0.5) {
                sites.push(i + 1);
            }
            fermion::random_local(&rep, &mut rng, &sites)
        })
        .collect();
    let pi = dynamics::stationary_state(&gen).map_err(err)?.density;
    let f = dynamics::check_convergence(&gen, &FermionCalculus { rep }, &k, &pi, &fs, &times).map_err(err)?;
    Ok((q >= -1e-6 && f >= -1e-6, format!("worst slack XYZ L=4 {q:.3e}, fermion L=4 {f:.3e} (tol -1e-6)")))
}

fn c8() -> Outcome {
    let s = xyz_setup(0.002, 4)?;
    let xi = 0.5;
    let xc = locality::xi_constants(&s.spec, xi);
    let cert = locality::certify(&s.spec);
    let pc = PropagationConstants {
        lambda1: cert.lambda1,
        xi,
        m_xi: xc.m_xi,
        omega_xi: xc.omega_xi,
        theta: s.k.theta.clone().expect("qudit θ"),
        omega: locality::compute_omega(&s.spec, &s.volume),
    };
    let mut rng = random::rng(8);
    let (x, y) = (s.volume.sites()[0].clone(), s.volume.sites()[3].clone());
    let dist = x.dist(&y) as f64;
    let times = dynamics::time_grid(0.0, 3.0, 12);
    let mut worst = f64::INFINITY;
    for _ in 0..5 {
        let f1 = random::local_matrix(&mut rng, &Region::single(x.clone()), &s.volume, 2);
        let f2 = random::local_matrix(&mut rng, &Region::single(y.clone()), &s.volume, 2);
        let ps = dynamics::check_propagation(&s.gen, &s.calc, &pc, &f1, &f2, dist, &times).map_err(err)?;
        worst = worst.min(ps.displayed);
    }
    Ok((worst >= -1e-8 && dist == 3.0, format!("ξ=0.5, dist {dist}: worst slack {worst:.3e} (tol -1e-8)")))
}

fn c9() -> Outcome {
    let s = xyz_setup(0.002, 6)?;
    let cert = locality::certify(&s.spec);
    let (c, zeta) = (cert.c.ok_or("no C")?, cert.zeta.ok_or("no ζ")?);
    let pi = dynamics::stationary_state(&s.gen).map_err(err)?.density;
    let mut rng = random::rng(9);
    let x0 = s.volume.sites()[0].clone();
    let mut pairs = Vec::new();
    for y in &s.volume.sites()[1..] {
        for _ in 0..3 {
            let f1 = linalg::hermitian_part(&random::local_matrix(&mut rng, &Region::single(x0.clone()), &s.volume, 2));
            let f2 = linalg::hermitian_part(&random::local_matrix(&mut rng, &Region::single(y.clone()), &s.volume, 2));
            pairs.push((f1, f2, x0.dist(y) as f64));
        }
    }
    let pts = dynamics::check_correlation_decay(&pi, &s.calc, c, zeta, &pairs);
    let worst = pts.iter().map(|p| p.slack).fold(f64::INFINITY, f64::min);
    let max_corr = pts.iter().map(|p| p.correlation).fold(0.0, f64::max);
    Ok((worst >= -1e-9, format!("separations 1-5, C={c:.3}, ζ={zeta:.4}: max |corr| {max_corr:.2e}, worst slack {worst:.3e} (tol -1e-9)")))
}

fn c10() -> Outcome {
    let rep = fermion::build_car(&Region::chain(0, 3), 0.0);
    let car = fermion::car_residual(&rep);
    let mut rng = random::rng(10);
    let dec = (0..50).map(|_| fermion::decomposition_residual(&rep, &random::matrix(&mut rng, 8))).fold(0.0, f64::max);
    Ok((car <= 1e-12 && dec < 1e-10, format!("identities {car:.2e} (tol 1e-12), decomposition {dec:.2e} on 50 observables (tol 1e-10)")))
}

/// Glauber flip rate at site `x` of configuration `s` on a ring.
fn glauber_rate(beta: f64, s: &[f64], x: usize) -> f64 {
    let l = s.len();
    1.0 / (1.0 + (2.0 * beta * s[x] * (s[(x + l - 1) % l] + s[(x + 1) % l])).exp())
}

fn c11() -> Outcome {
    let (beta, l) = (0.2, 4);
    let rates = FlipRates::glauber(beta);
    let (cfg, _) = catalog::model_classical_conjugation("glauber", &rates, 0.0, l).map_err(err)?;
    let model = cfg.build().map_err(err)?;
    let gen = model.generator(&cfg.volume).map_err(err)?;
    let n = 1usize << l;
    // digit 0 ↔ spin +1, first site most significant
    let spins = |c: usize| -> Vec<f64> { (0..l).map(|x| if (c >> (l - 1 - x)) & 1 == 0 { 1.0 } else { -1.0 }).collect() };
    let mut worst = 0.0f64;
    for target in 0..n {
        let f: Vec<f64> = (0..n).map(|c| if c == target { 1.0 } else { 0.0 }).collect();
        let lf: Vec<f64> = (0..n)
            .map(|c| {
                let s = spins(c);
                (0..l).map(|x| glauber_rate(beta, &s, x) * (f[c ^ (1 << (l - 1 - x))] - f[c])).sum()
            })
            .collect();
        let iota = |v: &[f64]| linalg::diag(&v.iter().map(|&x| linalg::re(x)).collect::<Vec<_>>());
        let r = gen.apply(&iota(&f)) - iota(&lf);
        worst = worst.max(linalg::op_norm(&r));
    }
    Ok((worst < 1e-9, format!("Glauber β=0.2, L=4 ring, 16-state oracle: residual {worst:.2e} (tol 1e-9)")))
}

fn c12() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for e in catalog::CATALOG {
        let mut p = BTreeMap::new();
        p.insert("l".to_string(), 3.0);
        let cfg = catalog::builtin(e.name, &p).map_err(err)?;
        let gen = cfg.build().map_err(err)?.generator(&cfg.volume).map_err(err)?;
        let m = [0.1, 1.0].iter().map(|&t| dynamics::choi_min_eigenvalue(&gen, t)).fold(f64::INFINITY, f64::min);
        worst = worst.min(m);
        parts.push(format!("{} {m:.2e}", e.name));
    }
    Ok((worst >= -1e-8, format!("min Choi eigenvalue at t∈{{0.1,1}}, L=3: {} (tol -1e-8)", parts.join(", "))))
}

fn c13() -> Outcome {
    let mut rng = random::rng(13);
    let mut sandwich = f64::INFINITY;
    for i in 0..100 {
        let volume = Region::chain(0, 1 + i % 2);
        let d = 1 << volume.len();
        let (mu, nu) = (random::density(&mut rng, d), random::density(&mut rng, d));
        let b = wasserstein::w1_bracket(&mu, &nu, &volume, 2).map_err(err)?;
        sandwich = sandwich.min(b.upper - b.lower).min(b.lower);
    }
    let one = Region::chain(0, 1);
    let mut half_trace = 0.0f64;
    let e0 = linalg::diag(&[linalg::re(1.0), linalg::re(0.0)]);
    let e1 = linalg::diag(&[linalg::re(0.0), linalg::re(1.0)]);
    let mut pairs = vec![(e0, e1)];
    for _ in 0..10 {
        pairs.push((random::density(&mut rng, 2), random::density(&mut rng, 2)));
    }
    for (mu, nu) in &pairs {
        let ht = 0.5 * linalg::herm_eigvals(&linalg::hermitian_part(&(mu - nu))).iter().map(|v| v.abs()).sum::<f64>();
        let b = wasserstein::w1_bracket(mu, nu, &one, 2).map_err(err)?;
        half_trace = half_trace.max((b.upper - ht).abs()).max((b.lower - ht).abs());
    }

    let s = xyz_setup(0.002, 4)?;
    let cert = locality::certify(&s.spec);
    let gap = cert.lambda1 - s.k.m;
    let c = cert.c0 / gap * s.spec.spectral.n() as f64 * s.spec.spectral.eta / 2.0;
    let pi = dynamics::stationary_state(&s.gen).map_err(err)?.density;
    let mu = random::density(&mut rng, s.gen.dim());
    let pts = wasserstein::check_w_decay(&s.gen, &mu, &pi, c, gap, &dynamics::time_grid(0.0, 4.0, 9)).map_err(err)?;
    let decay = pts.iter().map(|p| p.slack).fold(f64::INFINITY, f64::min);
    Ok((
        sandwich >= -1e-10 && half_trace <= 1e-8 && decay >= -1e-9,
        format!(
            "100 pairs: min(lower, upper−lower) {sandwich:.2e} (tol -1e-10); single qubit |bracket − ½‖Δ‖₁| {half_trace:.2e} (tol 1e-8); decay worst slack {decay:.3e} (tol -1e-9)"
        ),
    ))
}
