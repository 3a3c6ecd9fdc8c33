//! The `verify` check suite: every finite-volume inequality and identity
//! that applies to a model, evaluated on its configured volume.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::bounds;
use crate::config::{Boundary, Model, ModelConfig};
use crate::dynamics::{self, BoundConstants, PropagationConstants};
use crate::error::{Error, Result};
use crate::fermion::{self, FermionCalculus};
use crate::lattice::{Region, Site};
use crate::linalg::{self, CMat};
use crate::locality::{self, CertificateReport, QuditCalculus};
use crate::model::{self, ModelSpec};
use crate::random::{self, Rng64};
use crate::report::{CheckRecord, Tolerances};
use crate::single_site::{build_l0, check_gns_selfadjoint};
use crate::wasserstein;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub tolerances: Tolerances,
    pub times: Vec<f64>,
    /// Random observables per check.
    pub trials: usize,
    /// `ξ` of the propagation check.
    pub xi: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            tolerances: Tolerances::standard(),
            times: dynamics::time_grid(0.0, 3.0, 12),
            trials: 20,
            xi: 0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub check: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: &'static str,
    pub model: String,
    pub volume: Region,
    pub seed: u64,
    pub certificate: CertificateReport,
    pub checks: Vec<CheckRecord>,
    /// Checks whose preconditions fail on this volume, with the reason.
    pub skipped: Vec<String>,
    pub timings: Vec<Timing>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

struct Ctx<'a> {
    model: &'a str,
    volume: Region,
    tol: Tolerances,
}

struct Suite<'a> {
    ctx: Ctx<'a>,
    checks: Vec<CheckRecord>,
    skipped: Vec<String>,
    timings: Vec<Timing>,
}

impl Suite<'_> {
    /// Runs one check and records its time; a precondition that does not
    /// hold on this volume drops the check.
    fn run(&mut self, name: &str, f: impl FnOnce(&Ctx) -> Result<Vec<CheckRecord>>) -> Result<()> {
        let t = Instant::now();
        match f(&self.ctx) {
            Ok(recs) => self.checks.extend(recs),
            Err(Error::Precondition(why)) => self.skipped.push(format!("{name}: {why}")),
            Err(e) => return Err(e),
        }
        self.timings.push(Timing { check: name.to_string(), seconds: t.elapsed().as_secs_f64() });
        Ok(())
    }
}

impl Ctx<'_> {
    fn rec(&self, check: &str, params: serde_json::Value, slack: f64, tol: f64) -> CheckRecord {
        CheckRecord::new(check, self.model, &self.volume, params, slack, tol)
    }

    fn res(&self, check: &str, params: serde_json::Value, residual: f64, tol: f64) -> CheckRecord {
        CheckRecord::residual(check, self.model, &self.volume, params, residual, tol)
    }
}

/// Sites at depth ≥ `r`, or every site on a torus.
fn inner_sites(volume: &Region, r: u64, periodic: bool) -> Vec<Site> {
    volume.sites().iter().filter(|x| periodic || volume.depth(x) >= r).cloned().collect()
}

fn observables(rng: &mut Rng64, allowed: &[Site], volume: &Region, q: usize, n: usize) -> Vec<CMat> {
    (0..n).map(|_| random::local_observable(rng, allowed, volume, q)).collect()
}

/// Pairs of random self-adjoint single-site observables at the first site
/// and at each site along the first axis.
fn separated_pairs(rng: &mut Rng64, volume: &Region, q: usize) -> Result<Vec<(CMat, CMat, f64)>> {
    let x0 = volume.sites()[0].clone();
    let mut out = Vec::new();
    for y in volume.sites() {
        let same_line = y.0[1..] == x0.0[1..];
        if y == &x0 || !same_line {
            continue;
        }
        let f1 = random::local_matrix(rng, &Region::single(x0.clone()), volume, q);
        let f2 = random::local_matrix(rng, &Region::single(y.clone()), volume, q);
        out.push((linalg::hermitian_part(&f1), linalg::hermitian_part(&f2), x0.dist(y) as f64));
    }
    Ok(out)
}

pub fn verify(cfg: &ModelConfig, opts: &VerifyOptions) -> Result<RunReport> {
    let model = cfg.build()?;
    let volume = cfg.region()?;
    let certificate = model.certificate();
    let ctx = Ctx { model: model.name(), volume: volume.clone(), tol: opts.tolerances };
    let mut suite = Suite { ctx, checks: Vec::new(), skipped: Vec::new(), timings: Vec::new() };
    let mut rng = random::rng(opts.seed);
    match &model {
        Model::Qudit(spec) => verify_qudit(&mut suite, cfg, &model, spec, &certificate, opts, &mut rng)?,
        Model::Fermion(spec) => verify_fermion(&mut suite, cfg, spec, &certificate, opts, &mut rng)?,
    }
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        model: model.name().to_string(),
        volume,
        seed: opts.seed,
        certificate,
        checks: suite.checks,
        skipped: suite.skipped,
        timings: suite.timings,
    })
}

fn verify_qudit(
    s: &mut Suite,
    cfg: &ModelConfig,
    model: &Model,
    spec: &ModelSpec,
    cert: &CertificateReport,
    opts: &VerifyOptions,
    rng: &mut Rng64,
) -> Result<()> {
    let volume = s.ctx.volume.clone();
    let q = spec.site_dim;
    let d = crate::operator::pow(q, volume.len());
    let periodic = cfg.volume.boundary == Boundary::Periodic;
    let fin = model.qudit_spec_on(&cfg.volume)?.expect("qudit model");
    let gen = model.generator(&cfg.volume)?;
    let calc = QuditCalculus::new(volume.clone(), spec.spectral.clone());
    let r = locality::effective_range(spec);
    let n = opts.trials;

    s.run("gns_selfadjoint", |c| {
        let g = &spec.single_site;
        let (_, resid) = check_gns_selfadjoint(g, &build_l0(g));
        Ok(vec![c.res("gns_selfadjoint", json!({}), resid, c.tol.residual)])
    })?;
    s.run("split", |c| {
        let sp = model::split_perturbation(&fin, &volume)?;
        Ok(vec![c.res("split_residual", json!({}), sp.residual, c.tol.residual)])
    })?;
    if d <= 16 {
        s.run("intertwining", |c| {
            let l0 = model::unperturbed_generator(&fin, &volume)?;
            let v = dynamics::intertwining_residual(&l0, &calc)?;
            Ok(vec![c.res("intertwining", json!({}), v, c.tol.residual)])
        })?;
    } else {
        s.skipped.push("intertwining: Hilbert space dimension above 16".into());
    }
    s.run("local_inequalities", |c| {
        let p = json!({ "trials": n });
        Ok(vec![
            c.rec("exh_contraction", p.clone(), bounds::exh_contraction_slack(&calc, rng, n)?, c.tol.inequality),
            c.res("exh_reconstruction", p.clone(), bounds::reconstruction_residual(&calc, rng, n)?, c.tol.residual),
            c.rec("commutator_locality", p.clone(), bounds::commutator_locality_slack(&calc, rng, n), c.tol.inequality),
            c.rec("product_bound", p.clone(), bounds::product_bound_slack(&calc, rng, n), c.tol.inequality),
            c.rec("term_commutator", p.clone(), bounds::term_commutator_slack(spec, rng, n)?, c.tol.inequality),
        ])
    })?;
    if !periodic {
        s.run("generator_bound", |c| {
            let v = bounds::generator_bound_slack(spec, &volume, rng, n)?;
            Ok(vec![c.rec("generator_bound", json!({ "trials": n }), v, c.tol.inequality)])
        })?;
    } else {
        s.skipped.push("generator_bound: periodic volume".into());
    }
    if volume.len() <= 3 {
        s.run("complete_positivity", |c| {
            Ok([0.1, 1.0]
                .iter()
                .map(|&time| c.rec("choi_min_eigenvalue", json!({ "t": time }), dynamics::choi_min_eigenvalue(&gen, time), c.tol.positivity))
                .collect())
        })?;
    } else {
        s.skipped.push("complete_positivity: more than 3 sites".into());
    }
    s.run("expm_rk4", |c| {
        let f = random::matrix(rng, d);
        let v = dynamics::expm_rk4_discrepancy(&gen, &f, 1.0)?;
        Ok(vec![c.res("expm_rk4", json!({ "t": 1.0, "step": 1e-3 }), v, c.tol.convergence)])
    })?;

    let theta = locality::compute_theta(&fin, &volume);
    let k = BoundConstants {
        lambda1: cert.lambda1,
        m: cert.m.max(theta.max_column_sum()),
        c0: cert.c0,
        theta: Some(theta.clone()),
    };
    let all = volume.sites().to_vec();
    s.run("resolvent", |c| {
        let fs = observables(rng, &all, &volume, q, n);
        let lambda = 1.0;
        let ps = dynamics::check_resolvent_bound(&gen, &calc, &k, lambda, &fs)?;
        let p = json!({ "lambda": lambda, "observables": n });
        Ok(vec![
            c.rec("resolvent_pointwise", p.clone(), ps.pointwise.unwrap_or(f64::INFINITY), c.tol.inequality),
            c.rec("resolvent_scalar", p, ps.scalar, c.tol.inequality),
        ])
    })?;
    s.run("contraction", |c| {
        let fs = observables(rng, &all, &volume, q, n);
        let ps = dynamics::check_contraction(&gen, &calc, &k, &fs, &opts.times)?;
        let p = json!({ "times": opts.times, "observables": n });
        Ok(vec![
            c.rec("contraction_pointwise", p.clone(), ps.pointwise.unwrap_or(f64::INFINITY), c.tol.contraction),
            c.rec("contraction_scalar", p, ps.scalar, c.tol.contraction),
        ])
    })?;
    if !cert.pass {
        s.skipped.push("convergence, propagation, correlations, wasserstein: certificate fails".into());
        return Ok(());
    }
    let stationary = match dynamics::stationary_state(&gen) {
        Ok(st) => st,
        Err(Error::Numeric(why)) => {
            s.skipped.push(format!("convergence, propagation, correlations, wasserstein: {why}"));
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    let inner = inner_sites(&volume, r, periodic);
    if !inner.is_empty() {
        s.run("convergence", |c| {
            let fs = observables(rng, &inner, &volume, q, n);
            let v = dynamics::check_convergence(&gen, &calc, &k, &stationary.density, &fs, &opts.times)?;
            Ok(vec![c.rec("convergence", json!({ "times": opts.times, "observables": n }), v, c.tol.convergence)])
        })?;
    } else {
        s.skipped.push("convergence: no site at depth ≥ R".into());
    }
    if !periodic && volume.diameter() >= 2 {
        s.run("propagation", |c| {
            let x0 = volume.sites()[0].clone();
            let far = volume.sites().iter().max_by_key(|y| x0.dist(y)).expect("nonempty").clone();
            let dist = x0.dist(&far) as f64;
            let f1 = random::local_matrix(rng, &Region::single(x0), &volume, q);
            let f2 = random::local_matrix(rng, &Region::single(far), &volume, q);
            let xc = locality::xi_constants(spec, opts.xi);
            let pc = PropagationConstants {
                lambda1: cert.lambda1,
                xi: opts.xi,
                m_xi: xc.m_xi,
                omega_xi: xc.omega_xi,
                theta: theta.clone(),
                omega: locality::compute_omega(&fin, &volume),
            };
            let ps = dynamics::check_propagation(&gen, &calc, &pc, &f1, &f2, dist, &opts.times)?;
            let p = json!({ "xi": opts.xi, "dist": dist, "times": opts.times });
            Ok(vec![
                c.rec("propagation_displayed", p.clone(), ps.displayed, c.tol.propagation),
                c.rec("propagation_integral", p, ps.integral, c.tol.propagation),
            ])
        })?;
    } else {
        s.skipped.push("propagation: periodic volume or diameter below 2".into());
    }
    if let (false, Some(cc), Some(zeta)) = (periodic, cert.c, cert.zeta) {
        if volume.len() >= 2 {
            s.run("correlations", |c| {
                let pairs = separated_pairs(rng, &volume, q)?;
                let pts = dynamics::check_correlation_decay(&stationary.density, &calc, cc, zeta, &pairs);
                let worst = pts.iter().map(|p| p.slack).fold(f64::INFINITY, f64::min);
                Ok(vec![c.rec("correlation_decay", json!({ "c": cc, "zeta": zeta, "pairs": pairs.len() }), worst, c.tol.inequality)])
            })?;
        }
    } else {
        s.skipped.push("correlations: periodic volume or no C, ζ".into());
    }
    if volume.len() <= 4 {
        s.run("wasserstein", |c| {
            let (n_, eta) = (spec.spectral.n(), spec.spectral.eta);
            let gap = cert.lambda1 - k.m;
            let cw = cert.c0 / gap * n_ as f64 * eta / 2.0;
            let mu = random::density(rng, d);
            let pts = wasserstein::check_w_decay(&gen, &mu, &stationary.density, cw, gap, &opts.times)?;
            let worst = pts.iter().map(|p| p.slack).fold(f64::INFINITY, f64::min);
            let fs: Vec<CMat> = observables(rng, &all, &volume, q, n).iter().map(linalg::hermitian_part).collect();
            let ap = wasserstein::appena_slack(&calc, n_, eta, q, &fs)?;
            Ok(vec![
                c.rec("wasserstein_decay", json!({ "c": cw, "rate": gap, "times": opts.times }), worst, c.tol.inequality),
                c.rec("lip_seminorm_bound", json!({ "observables": n }), ap, c.tol.inequality),
            ])
        })?;
    } else {
        s.skipped.push("wasserstein: more than 4 sites".into());
    }
    Ok(())
}

fn verify_fermion(
    s: &mut Suite,
    cfg: &ModelConfig,
    spec: &fermion::FermionModelSpec,
    cert: &CertificateReport,
    opts: &VerifyOptions,
    rng: &mut Rng64,
) -> Result<()> {
    let volume = s.ctx.volume.clone();
    let rep = fermion::build_car(&volume, spec.h_field);
    let gen = fermion::fermion_generator(spec, &volume)?;
    let calc = FermionCalculus { rep: rep.clone() };
    let d = rep.dim();
    let n = opts.trials;
    let nsites = volume.len();
    let _ = cfg;

    s.run("car", |c| Ok(vec![c.res("car_identities", json!({}), fermion::car_residual(&rep), c.tol.residual)]))?;
    s.run("decomposition", |c| {
        let v = (0..n).map(|_| fermion::decomposition_residual(&rep, &random::matrix(rng, d))).fold(0.0, f64::max);
        Ok(vec![c.res("decomposition", json!({ "observables": n }), v, c.tol.residual)])
    })?;
    if d <= 16 {
        s.run("intertwining", |c| {
            Ok(vec![
                c.res("intertwining", json!({}), fermion::intertwining_residual(&rep), c.tol.residual),
                c.res("ou_gns_symmetry", json!({}), fermion::ou_gns_symmetry_residual(&rep), c.tol.residual),
            ])
        })?;
    } else {
        s.skipped.push("intertwining: Hilbert space dimension above 16".into());
    }
    s.run("local_inequalities", |c| {
        let b = fermion::fermion_bound_slacks(spec, &volume, rng, n)?;
        let p = json!({ "trials": n });
        let mut v = vec![
            c.rec("fermion_commutator", p.clone(), b.commutator, c.tol.inequality),
            c.rec("ou_bound", p.clone(), b.ou_bound, c.tol.inequality),
            c.rec("even_commutator", p.clone(), b.even_commutator, c.tol.inequality),
            c.res("v_norm", p.clone(), b.v_norm_residual, c.tol.residual),
        ];
        if b.generator_bound.is_finite() {
            v.push(c.rec("generator_bound", p, b.generator_bound, c.tol.inequality));
        }
        Ok(v)
    })?;
    if nsites <= 3 {
        s.run("complete_positivity", |c| {
            Ok([0.1, 1.0]
                .iter()
                .map(|&time| c.rec("choi_min_eigenvalue", json!({ "t": time }), dynamics::choi_min_eigenvalue(&gen, time), c.tol.positivity))
                .collect())
        })?;
    } else {
        s.skipped.push("complete_positivity: more than 3 sites".into());
    }
    let k = BoundConstants { lambda1: cert.lambda1, m: cert.m, c0: cert.c0, theta: None };
    let all: Vec<usize> = (0..nsites).collect();
    let local = |rng: &mut Rng64, allowed: &[usize]| -> Vec<CMat> {
        (0..n)
            .map(|_| {
                let x = allowed[rng.random_range(0..allowed.len())];
                let mut sites = vec![x];
                if x + 1 < nsites && rng.random_bool(0.5) {
                    sites.push(x + 1);
                }
                fermion::random_local(&rep, rng, &sites)
            })
            .collect()
    };
    s.run("contraction", |c| {
        let fs = local(rng, &all);
        let ps = dynamics::check_contraction(&gen, &calc, &k, &fs, &opts.times)?;
        Ok(vec![c.rec("contraction_scalar", json!({ "times": opts.times, "observables": n }), ps.scalar, c.tol.contraction)])
    })?;
    if !cert.pass {
        s.skipped.push("convergence: certificate fails".into());
        return Ok(());
    }
    let r = spec.effective_range();
    let inner: Vec<usize> = (0..nsites).filter(|&i| volume.depth(&volume.sites()[i]) >= r).collect();
    if !inner.is_empty() {
        s.run("convergence", |c| {
            let pi = dynamics::stationary_state(&gen)?;
            let fs = local(rng, &inner);
            let v = dynamics::check_convergence(&gen, &calc, &k, &pi.density, &fs, &opts.times)?;
            Ok(vec![c.rec("convergence", json!({ "times": opts.times, "observables": n }), v, c.tol.convergence)])
        })?;
    } else {
        s.skipped.push("convergence: no site at depth ≥ R".into());
    }
    Ok(())
}
