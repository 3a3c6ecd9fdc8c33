//! Exact finite-volume evolution, stationary states, and the bounds on
//! contraction, convergence, propagation and correlations.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Region;
use crate::linalg::{self, c64, CMat, ONE};
use crate::locality::{Gradient, QuditCalculus, SiteMatrix};
use crate::model::{assemble, FiniteVolumeGenerator, ModelSpec};
use crate::operator::embed_matrix;

/// `P_t = exp(t𝓛)` as a matrix on vectorized observables.
pub fn propagator(gen: &FiniteVolumeGenerator, t: f64) -> Result<CMat> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Numeric(format!("time {t} is not a finite nonnegative number")));
    }
    Ok(linalg::expm(&linalg::scale_re(&gen.heisenberg().matrix, t)))
}

pub fn propagators(gen: &FiniteVolumeGenerator, times: &[f64]) -> Result<Vec<CMat>> {
    let _ = gen.heisenberg();
    times.par_iter().map(|&t| propagator(gen, t)).collect()
}

pub fn apply(p: &CMat, f: &CMat) -> CMat {
    linalg::devectorize(&(p * &linalg::vectorize(f)), f.nrows())
}

/// `t0:t1:n` style grid with `n` points including both ends.
pub fn time_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![t0],
        _ => (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    #[serde(skip)]
    pub observables: Vec<CMat>,
    pub norm_trace: Vec<f64>,
    pub seminorm_trace: Option<Vec<f64>>,
    pub distance_trace: Option<Vec<f64>>,
}

pub fn evolve(
    gen: &FiniteVolumeGenerator,
    f: &CMat,
    times: &[f64],
    grad: Option<&dyn Gradient>,
    pi: Option<&CMat>,
) -> Result<EvolutionResult> {
    if f.nrows() != gen.dim() {
        return Err(Error::Dimension("observable does not live on the volume".into()));
    }
    let ps = propagators(gen, times)?;
    let observables: Vec<CMat> = ps.iter().map(|p| apply(p, f)).collect();
    let norm_trace = observables.iter().map(linalg::op_norm).collect();
    let seminorm_trace = grad.map(|g| observables.iter().map(|o| g.seminorm(o)).collect());
    let distance_trace = pi.map(|pi| {
        let m = expectation(pi, f);
        observables
            .iter()
            .map(|o| linalg::op_norm(&(o - &linalg::scale(&linalg::eye(o.nrows()), m))))
            .collect()
    });
    Ok(EvolutionResult { times: times.to_vec(), observables, norm_trace, seminorm_trace, distance_trace })
}

/// `π(f) = tr(π f)`.
pub fn expectation(pi: &CMat, f: &CMat) -> c64 {
    linalg::trace(&(pi * f))
}

#[derive(Clone, Debug, Serialize)]
pub struct StationaryState {
    #[serde(serialize_with = "ser_mat")]
    pub density: CMat,
    pub residual: f64,
    pub min_eigenvalue: f64,
    /// Eigenvalues of the Schrödinger generator with |Re| < 1e−9; not
    /// computed on the large-volume path.
    pub degeneracy: Option<usize>,
    pub method: String,
}

fn ser_mat<S: serde::Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::operator::matrix_to_pairs(m).serialize(s)
}

/// Superoperator dimension up to which the stationary state comes from a
/// full eigendecomposition.
pub const FULL_EIG_LIMIT: usize = 1024;

pub fn stationary_state(gen: &FiniteVolumeGenerator) -> Result<StationaryState> {
    let d = gen.dim();
    let s = &gen.schrodinger().matrix;
    let (raw, degeneracy, method) = if d * d <= FULL_EIG_LIMIT {
        let (vals, vecs) = linalg::eig(s)?;
        let k = (0..vals.len())
            .min_by(|&a, &b| vals[a].norm().partial_cmp(&vals[b].norm()).expect("finite eigenvalues"))
            .ok_or_else(|| Error::Numeric("empty generator".into()))?;
        let deg = vals.iter().filter(|v| v.re.abs() < 1e-9).count();
        (vecs.subcols(k, 1).to_owned(), Some(deg), "eigendecomposition")
    } else {
        let mut a = s.clone();
        for j in 0..d * d {
            a[(0, j)] = linalg::ZERO;
        }
        for i in 0..d {
            a[(0, i * d + i)] = ONE;
        }
        let mut b = CMat::zeros(d * d, 1);
        b[(0, 0)] = ONE;
        (linalg::solve(&a, &b)?, None, "trace-constrained solve")
    };
    let rho = linalg::devectorize(&raw, d);
    let tr = linalg::trace(&rho);
    if tr.norm() < 1e-300 {
        return Err(Error::Numeric("null vector has zero trace".into()));
    }
    let density = linalg::hermitian_part(&linalg::scale(&rho, ONE / tr));
    let residual = linalg::op_norm(&gen.apply_schrodinger(&density));
    let min_eigenvalue = linalg::herm_eigvals(&density)[0];
    if residual > 1e-8 || min_eigenvalue < -1e-8 {
        return Err(Error::Numeric(format!(
            "no PSD stationary state (residual {residual:e}, min eigenvalue {min_eigenvalue:e})"
        )));
    }
    Ok(StationaryState { density, residual, min_eigenvalue, degeneracy, method: method.to_string() })
}

/// Minimum eigenvalue of the Choi matrix of `exp(t·schrodinger)`.
pub fn choi_min_eigenvalue(gen: &FiniteVolumeGenerator, t: f64) -> f64 {
    let e = linalg::expm(&linalg::scale_re(&gen.schrodinger().matrix, t));
    let ch = crate::superop::SuperOperator { dim: gen.dim(), matrix: e }.choi();
    linalg::herm_eigvals(&linalg::hermitian_part(&ch))[0]
}

/// Largest real part in the spectrum of the Heisenberg generator.
pub fn max_real_eigenvalue(gen: &FiniteVolumeGenerator) -> Result<f64> {
    Ok(linalg::eigvals(&gen.heisenberg().matrix)?.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Relative difference between `expm` and a fixed-step RK4 integration of
/// `ḟ = 𝓛f` (step 1e−3) on the given generator and observable.
pub fn expm_rk4_discrepancy(gen: &FiniteVolumeGenerator, f: &CMat, t: f64) -> Result<f64> {
    let h = &gen.heisenberg().matrix;
    let a = apply(&propagator(gen, t)?, f);
    let steps = (t / 1e-3).ceil().max(1.0) as usize;
    let b = linalg::devectorize(&linalg::rk4_flow(h, &linalg::vectorize(f), t, steps), f.nrows());
    Ok(linalg::fro(&(&a - &b)) / linalg::fro(&a).max(1e-300))
}

/// `max_{x,h,f} ‖E_{x,h}𝓛₀f − 𝓛₀E_{x,h}f + λ_h E_{x,h}f‖` over normalized
/// matrix units `f`.
pub fn intertwining_residual(l0: &FiniteVolumeGenerator, calc: &QuditCalculus) -> Result<f64> {
    let d = l0.dim();
    let nb = calc.spectral.basis.len();
    let units: Vec<CMat> = (0..d * d)
        .map(|k| {
            let mut e = linalg::zeros(d);
            e[(k % d, k / d)] = ONE;
            e
        })
        .collect();
    let images: Vec<CMat> = units.iter().map(|e| l0.apply(e)).collect();
    let mut worst = 0.0f64;
    for x in calc.volume.sites() {
        for h in 0..nb {
            let lam = calc.spectral.eigenvalues[h];
            let r = units
                .par_iter()
                .zip(images.par_iter())
                .map(|(e, le)| -> Result<f64> {
                    let ef = calc.exh(e, x, h)?;
                    let mut r = calc.exh(le, x, h)? - l0.apply(&ef);
                    linalg::axpy(&mut r, linalg::re(lam), &ef);
                    Ok(linalg::op_norm(&r))
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// The perturbative constants the bounds are checked against.
#[derive(Clone, Debug)]
pub struct BoundConstants {
    pub lambda1: f64,
    pub m: f64,
    pub c0: f64,
    /// Finite-volume θ-matrix for the pointwise bounds; `None` when only the
    /// scalar bounds apply.
    pub theta: Option<SiteMatrix>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairSlack {
    pub pointwise: Option<f64>,
    pub scalar: f64,
}

fn min_slack(bound: &[f64], observed: &[f64]) -> f64 {
    bound.iter().zip(observed).map(|(b, o)| b - o).fold(f64::INFINITY, f64::min)
}

/// Solves `(λ − 𝓛)g = f` and checks `δ(g) ≤ (λ+λ₁−Θ)⁻¹δ(f)` pointwise and
/// `⦀g⦀ ≤ ⦀f⦀/(λ+λ₁−M)`.
pub fn check_resolvent_bound(
    gen: &FiniteVolumeGenerator,
    grad: &dyn Gradient,
    k: &BoundConstants,
    lambda: f64,
    fs: &[CMat],
) -> Result<PairSlack> {
    if lambda <= 0.0 || lambda + k.lambda1 <= k.m {
        return Err(Error::Precondition("need λ > 0 and λ + λ₁ > M".into()));
    }
    let d = gen.dim();
    let h = &gen.heisenberg().matrix;
    let mut a = linalg::scale_re(h, -1.0);
    for i in 0..d * d {
        a[(i, i)] += linalg::re(lambda);
    }
    let rhs = CMat::from_fn(d * d, fs.len(), |i, j| fs[j][(i % d, i / d)]);
    let sol = linalg::solve(&a, &rhs)?;
    let results: Vec<Result<(Option<f64>, f64)>> = fs
        .par_iter()
        .enumerate()
        .map(|(j, f)| {
            let g = linalg::devectorize(&sol.subcols(j, 1).to_owned(), d);
            let df = grad.profile(f);
            let dg = grad.profile(&g);
            let pw = match &k.theta {
                Some(th) => Some(min_slack(&th.shifted_solve(lambda + k.lambda1, &df)?, &dg)),
                None => None,
            };
            let sc = df.iter().sum::<f64>() / (lambda + k.lambda1 - k.m) - dg.iter().sum::<f64>();
            Ok((pw, sc))
        })
        .collect();
    fold_pairs(results)
}

fn fold_pairs(results: Vec<Result<(Option<f64>, f64)>>) -> Result<PairSlack> {
    let mut pw: Option<f64> = None;
    let mut sc = f64::INFINITY;
    for r in results {
        let (p, s) = r?;
        if let Some(p) = p {
            pw = Some(pw.map_or(p, |q: f64| q.min(p)));
        }
        sc = sc.min(s);
    }
    Ok(PairSlack { pointwise: pw, scalar: sc })
}

/// `δ(P_tf) ≤ e^{−λ₁t}e^{tΘ}δ(f)` pointwise and `⦀P_tf⦀ ≤ e^{(M−λ₁)t}⦀f⦀`.
pub fn check_contraction(
    gen: &FiniteVolumeGenerator,
    grad: &dyn Gradient,
    k: &BoundConstants,
    fs: &[CMat],
    times: &[f64],
) -> Result<PairSlack> {
    let ps = propagators(gen, times)?;
    let profiles: Vec<Vec<f64>> = fs.par_iter().map(|f| grad.profile(f)).collect();
    let jobs: Vec<(usize, usize)> = (0..times.len()).flat_map(|i| (0..fs.len()).map(move |j| (i, j))).collect();
    let results = jobs
        .par_iter()
        .map(|&(i, j)| {
            let t = times[i];
            let dp = grad.profile(&apply(&ps[i], &fs[j]));
            let df = &profiles[j];
            let pw = k.theta.as_ref().map(|th| {
                let b: Vec<f64> = th.exp_apply(t, df).into_iter().map(|v| v * (-k.lambda1 * t).exp()).collect();
                min_slack(&b, &dp)
            });
            let sc = ((k.m - k.lambda1) * t).exp() * df.iter().sum::<f64>() - dp.iter().sum::<f64>();
            Ok((pw, sc))
        })
        .collect();
    fold_pairs(results)
}

/// `‖P_tf − π(f)1‖ ≤ C₀/(λ₁−M)·e^{−(λ₁−M)t}⦀f⦀`.
pub fn check_convergence(
    gen: &FiniteVolumeGenerator,
    grad: &dyn Gradient,
    k: &BoundConstants,
    pi: &CMat,
    fs: &[CMat],
    times: &[f64],
) -> Result<f64> {
    let gap = k.lambda1 - k.m;
    if gap <= 0.0 {
        return Err(Error::Precondition("certificate fails (M ≥ λ₁); convergence bound not claimed".into()));
    }
    let ps = propagators(gen, times)?;
    let d = gen.dim();
    let mut worst = f64::INFINITY;
    for f in fs {
        let sf = grad.seminorm(f);
        let shift = linalg::scale(&linalg::eye(d), expectation(pi, f));
        for (p, &t) in ps.iter().zip(times) {
            let lhs = linalg::op_norm(&(apply(p, f) - &shift));
            let rhs = k.c0 / gap * (-gap * t).exp() * sf;
            worst = worst.min(rhs - lhs);
        }
    }
    Ok(worst)
}

/// Constants of the propagation bound at one `ξ`.
#[derive(Clone, Debug)]
pub struct PropagationConstants {
    pub lambda1: f64,
    pub xi: f64,
    pub m_xi: f64,
    pub omega_xi: f64,
    pub theta: SiteMatrix,
    pub omega: SiteMatrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropagationSlack {
    pub displayed: f64,
    pub integral: f64,
    pub max_lhs: f64,
}

/// Simpson rule with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// `‖P_t(f₁f₂) − (P_tf₁)(P_tf₂)‖` against the displayed bound
/// `Ω_ξ (e^{2(M_ξ−λ₁)t}−1)/(2(M_ξ−λ₁)) e^{−ξ dist}⦀f₁⦀⦀f₂⦀` and against
/// `Σ ω_{x,y}∫₀ᵗ e^{−2λ₁s}(e^{sΘ}δ(f₁))_x(e^{sΘ}δ(f₂))_y ds`.
pub fn check_propagation(
    gen: &FiniteVolumeGenerator,
    grad: &dyn Gradient,
    k: &PropagationConstants,
    f1: &CMat,
    f2: &CMat,
    dist: f64,
    times: &[f64],
) -> Result<PropagationSlack> {
    let ps = propagators(gen, times)?;
    let d1 = grad.profile(f1);
    let d2 = grad.profile(f2);
    let (s1, s2): (f64, f64) = (d1.iter().sum(), d2.iter().sum());
    let prod = f1 * f2;
    let rate = 2.0 * (k.m_xi - k.lambda1);
    let n = k.omega.n();
    let integrand = |s: f64| {
        let a = k.theta.exp_apply(s, &d1);
        let b = k.theta.exp_apply(s, &d2);
        let mut acc = 0.0;
        for x in 0..n {
            for y in 0..n {
                acc += k.omega.entries[x][y] * a[x] * b[y];
            }
        }
        (-2.0 * k.lambda1 * s).exp() * acc
    };
    let mut out = PropagationSlack { displayed: f64::INFINITY, integral: f64::INFINITY, max_lhs: 0.0 };
    for (p, &t) in ps.iter().zip(times) {
        let lhs = linalg::op_norm(&(apply(p, &prod) - &(apply(p, f1) * apply(p, f2))));
        let growth = if rate.abs() < 1e-14 { t } else { (rate * t).exp_m1() / rate };
        let displayed = k.omega_xi * growth * (-k.xi * dist).exp() * s1 * s2;
        let integral = simpson(integrand, 0.0, t, 200);
        out.displayed = out.displayed.min(displayed - lhs);
        out.integral = out.integral.min(integral - lhs);
        out.max_lhs = out.max_lhs.max(lhs);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationPoint {
    pub dist: f64,
    pub correlation: f64,
    pub bound: f64,
    pub slack: f64,
}

/// `|π(f₁f₂) − π(f₁)π(f₂)| ≤ C e^{−ζ dist}(‖f₁‖+⦀f₁⦀)(‖f₂‖+⦀f₂⦀)`.
pub fn check_correlation_decay(
    pi: &CMat,
    grad: &dyn Gradient,
    c: f64,
    zeta: f64,
    pairs: &[(CMat, CMat, f64)],
) -> Vec<CorrelationPoint> {
    pairs
        .par_iter()
        .map(|(f1, f2, dist)| {
            let corr = (expectation(pi, &(f1 * f2)) - expectation(pi, f1) * expectation(pi, f2)).norm();
            let w1 = linalg::op_norm(f1) + grad.seminorm(f1);
            let w2 = linalg::op_norm(f2) + grad.seminorm(f2);
            let bound = c * (-zeta * dist).exp() * w1 * w2;
            CorrelationPoint { dist: *dist, correlation: corr, bound, slack: bound - corr }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeLimitReport {
    pub volumes: Vec<usize>,
    pub increments: Vec<f64>,
    pub pass: bool,
}

/// Increments `‖P_t^{Λ_n}f − P_t^{Λ_{n+1}}f‖` along an increasing sequence of
/// volumes; passes when the last increment is at most a tenth of the first.
pub fn check_volume_limit(
    spec: &ModelSpec,
    f: &crate::operator::LocalOperator,
    t: f64,
    volumes: &[Region],
) -> Result<VolumeLimitReport> {
    let mut evolved: Vec<CMat> = Vec::new();
    for v in volumes {
        let gen = assemble(spec, v)?;
        evolved.push(apply(&propagator(&gen, t)?, &f.matrix_on(v)?));
    }
    let mut increments = Vec::new();
    for i in 0..volumes.len().saturating_sub(1) {
        let small = embed_matrix(&evolved[i], &volumes[i], &volumes[i + 1], spec.site_dim)?;
        increments.push(linalg::op_norm(&(&small - &evolved[i + 1])));
    }
    let pass = match (increments.first(), increments.last()) {
        (Some(a), Some(b)) => *b <= a / 10.0 + 1e-15,
        _ => true,
    };
    Ok(VolumeLimitReport { volumes: volumes.iter().map(Region::len).collect(), increments, pass })
}
