//! Brackets for the quantum one-Wasserstein distance `W_Λ` and the
//! Lipschitz seminorm, and the decay check of the specific distance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Region, Site};
use crate::linalg::{self, CMat};
use crate::operator::{embed_matrix, pow, weighted_partial_trace_matrix};

/// `T_x A = tr_x(A) ⊗ 1_x/q`.
pub fn t_x(a: &CMat, volume: &Region, q: usize, x: &Site) -> Result<CMat> {
    let pos = volume.position(x).ok_or_else(|| Error::SiteNotInSupport(x.to_string()))?;
    let r = weighted_partial_trace_matrix(a, volume.len(), q, pos, &linalg::eye(q));
    Ok(linalg::scale_re(&embed_matrix(&r, &volume.without(x), volume, q)?, 1.0 / q as f64))
}

fn partial_trace_at(a: &CMat, volume: &Region, q: usize, x: &Site) -> CMat {
    let pos = volume.position(x).expect("site of the volume");
    weighted_partial_trace_matrix(a, volume.len(), q, pos, &linalg::eye(q))
}

/// Trace over every site except `x`.
fn reduce_to(a: &CMat, volume: &Region, q: usize, x: &Site) -> CMat {
    let mut m = a.clone();
    let mut vol = volume.clone();
    for y in volume.sites() {
        if y != x {
            m = partial_trace_at(&m, &vol, q, y);
            vol = vol.without(y);
        }
    }
    m
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzBracket {
    /// `max_x ‖f − T_xf‖`
    pub lower: f64,
    /// `max_x 2‖f − T_xf‖`
    pub upper: f64,
    /// `max_x 2‖f − g_x‖` with `g_x` from subgradient descent; ≤ `upper`.
    pub refined_upper: f64,
}

/// `min ‖f − G⊗1_x‖` over Hermitian `G` by subgradient descent from `T_xf`.
fn refine_site(f: &CMat, volume: &Region, q: usize, x: &Site, iterations: usize) -> Result<f64> {
    let rest = volume.without(x);
    let mut g = linalg::scale_re(&partial_trace_at(f, volume, q, x), 1.0 / q as f64);
    let mut best = f64::INFINITY;
    let scale = linalg::op_norm(f).max(1e-300);
    for k in 0..iterations {
        let a = f - embed_matrix(&g, &rest, volume, q)?;
        let (vals, vecs) = linalg::herm_eig(&linalg::hermitian_part(&a));
        let (lo, hi) = (vals[0], vals[vals.len() - 1]);
        let val = lo.abs().max(hi.abs());
        best = best.min(val);
        let (idx, sign) = if hi.abs() >= lo.abs() { (vals.len() - 1, 1.0) } else { (0, -1.0) };
        let psi = vecs.subcols(idx, 1).to_owned();
        let p = &psi * linalg::dagger(&psi);
        let grad = partial_trace_at(&p, volume, q, x);
        let step = 0.5 * scale / ((k + 1) as f64).sqrt();
        // ∂‖A‖/∂G = −sign·tr_x(ψψ*)
        linalg::axpy(&mut g, linalg::re(sign * step), &grad);
        g = linalg::hermitian_part(&g);
    }
    Ok(best)
}

pub const REFINE_ITERATIONS: usize = 500;

pub fn lipschitz_seminorm(f: &CMat, volume: &Region, q: usize) -> Result<LipschitzBracket> {
    if !linalg::is_hermitian(f, 1e-10) {
        return Err(Error::Precondition("Lipschitz seminorm needs a self-adjoint observable".into()));
    }
    let f = linalg::hermitian_part(f);
    if volume.len() == 1 {
        let ev = linalg::herm_eigvals(&f);
        let v = ev[ev.len() - 1] - ev[0];
        return Ok(LipschitzBracket { lower: v, upper: v, refined_upper: v });
    }
    let mut out = LipschitzBracket { lower: 0.0, upper: 0.0, refined_upper: 0.0 };
    for x in volume.sites() {
        let dev = linalg::op_norm(&(&f - t_x(&f, volume, q, x)?));
        let refined = if dev == 0.0 { 0.0 } else { 2.0 * refine_site(&f, volume, q, x, REFINE_ITERATIONS)? };
        out.lower = out.lower.max(dev);
        out.upper = out.upper.max(2.0 * dev);
        out.refined_upper = out.refined_upper.max(refined.min(2.0 * dev));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct WassersteinBracket {
    pub lower: f64,
    pub upper: f64,
    pub order: Vec<Site>,
    pub site_terms: Vec<f64>,
    pub witness: String,
}

/// Telescoping decomposition `Δ^{(x_j)} = (Π_{i<j}T_{x_i})(Δ − T_{x_j}Δ)`.
pub fn telescoping(delta: &CMat, volume: &Region, q: usize, order: &[Site]) -> Result<Vec<CMat>> {
    let mut prefix = delta.clone();
    let mut out = Vec::with_capacity(order.len());
    for x in order {
        let tp = t_x(&prefix, volume, q, x)?;
        out.push(&prefix - &tp);
        prefix = tp;
    }
    Ok(out)
}

/// Reconstruction residual `‖Σ_xΔ^{(x)} − Δ‖` and `max_x ‖tr_xΔ^{(x)}‖`.
pub fn decomposition_feasibility(delta: &CMat, volume: &Region, q: usize, order: &[Site]) -> Result<(f64, f64)> {
    let parts = telescoping(delta, volume, q, order)?;
    let mut sum = linalg::zeros(delta.nrows());
    let mut ptr = 0.0f64;
    for (x, p) in order.iter().zip(&parts) {
        sum += p;
        ptr = ptr.max(linalg::max_abs(&partial_trace_at(p, volume, q, x)));
    }
    Ok((linalg::max_abs(&(&sum - delta)), ptr))
}

fn permutations(items: &[Site]) -> Vec<Vec<Site>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head.clone());
            out.push(p);
        }
    }
    out
}

fn candidate_orders(volume: &Region) -> Vec<Vec<Site>> {
    let s = volume.sites().to_vec();
    if s.len() <= 5 {
        return permutations(&s);
    }
    let mut out = Vec::new();
    for r in 0..s.len() {
        let mut o = s.clone();
        o.rotate_left(r);
        out.push(o.clone());
        o.reverse();
        out.push(o);
    }
    out
}

fn check_state(m: &CMat, d: usize) -> Result<()> {
    if m.nrows() != d {
        return Err(Error::Dimension("state has the wrong size".into()));
    }
    crate::operator::check_density(m, 1e-9)
}

/// Upper bound only (minimum over site orders).
pub fn w1_upper(mu: &CMat, nu: &CMat, volume: &Region, q: usize) -> Result<(f64, Vec<Site>, Vec<f64>)> {
    let delta = mu - nu;
    let mut best = (f64::INFINITY, Vec::new(), Vec::new());
    for order in candidate_orders(volume) {
        let terms: Vec<f64> = telescoping(&delta, volume, q, &order)?.iter().map(|p| 0.5 * linalg::trace_norm(p)).collect();
        let v: f64 = terms.iter().sum();
        if v < best.0 {
            best = (v, order, terms);
        }
    }
    Ok(best)
}

fn sign_matrix(a: &CMat) -> CMat {
    let (vals, vecs) = linalg::herm_eig(&linalg::hermitian_part(a));
    let s: Vec<linalg::c64> = vals.iter().map(|&v| linalg::re(if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 })).collect();
    &(&vecs * &linalg::diag(&s)) * &linalg::dagger(&vecs)
}

pub fn w1_bracket(mu: &CMat, nu: &CMat, volume: &Region, q: usize) -> Result<WassersteinBracket> {
    let d = pow(q, volume.len());
    check_state(mu, d)?;
    check_state(nu, d)?;
    let delta = mu - nu;
    let (upper, order, site_terms) = w1_upper(mu, nu, volume, q)?;
    let mut dict: Vec<(String, CMat)> = Vec::new();
    let gm = linalg::gell_mann(q);
    for (a, g) in gm.iter().enumerate() {
        let mut sum = linalg::zeros(d);
        for x in volume.sites() {
            let e = embed_matrix(g, &Region::single(x.clone()), volume, q)?;
            sum += &e;
            dict.push((format!("gell-mann {a} at {x}"), e));
        }
        dict.push((format!("gell-mann {a} summed"), sum));
    }
    for x in volume.sites() {
        let s = sign_matrix(&reduce_to(&delta, volume, q, x));
        dict.push((format!("sign of reduced difference at {x}"), embed_matrix(&s, &Region::single(x.clone()), volume, q)?));
    }
    dict.push(("sign of difference".into(), sign_matrix(&delta)));
    let mut lower = 0.0f64;
    let mut witness = String::from("none");
    for (name, f) in dict {
        let lip = lipschitz_seminorm(&f, volume, q)?;
        let bound = lip.refined_upper;
        if bound <= 1e-14 {
            continue;
        }
        let v = linalg::trace(&(&delta * &f)).norm() / bound;
        if v > lower {
            lower = v;
            witness = name;
        }
    }
    // equal values can differ in the last bits
    if lower > upper && lower - upper < 1e-12 {
        lower = upper;
    }
    Ok(WassersteinBracket { lower, upper, order, site_terms, witness })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayPoint {
    pub t: f64,
    pub per_site_upper: f64,
    pub bound: f64,
    pub slack: f64,
}

/// `W_Λ(μP_t, π_Λ)/|Λ| ≤ C e^{−rate·t}` on a time grid, with `μP_t` from the
/// Schrödinger generator and `W` replaced by its certified upper bound.
pub fn check_w_decay(
    gen: &crate::model::FiniteVolumeGenerator,
    mu: &CMat,
    pi: &CMat,
    c: f64,
    rate: f64,
    times: &[f64],
) -> Result<Vec<DecayPoint>> {
    use rayon::prelude::*;
    let volume = &gen.volume;
    let q = gen.site_dim;
    let s = &gen.schrodinger().matrix;
    let pi = linalg::hermitian_part(pi);
    times
        .par_iter()
        .map(|&t| {
            let e = linalg::expm(&linalg::scale_re(s, t));
            let mt = linalg::hermitian_part(&linalg::devectorize(&(&e * &linalg::vectorize(mu)), mu.nrows()));
            let (w, _, _) = w1_upper(&mt, &pi, volume, q)?;
            let per_site = w / volume.len() as f64;
            let bound = c * (-rate * t).exp();
            Ok(DecayPoint { t, per_site_upper: per_site, bound, slack: bound - per_site })
        })
        .collect()
}

/// `½Nη|Λ|⦀f⦀_{Λ,Lip} − ⦀f⦀` over the given self-adjoint observables, with
/// the refined upper Lipschitz estimate.
pub fn appena_slack(grad: &dyn crate::locality::Gradient, n: usize, eta: f64, q: usize, fs: &[CMat]) -> Result<f64> {
    let volume = grad.volume().clone();
    let mut worst = f64::INFINITY;
    for f in fs {
        let lip = lipschitz_seminorm(f, &volume, q)?;
        let rhs = 0.5 * n as f64 * eta * volume.len() as f64 * lip.refined_upper;
        worst = worst.min(rhs - grad.seminorm(f));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    #[test]
    fn single_qubit_basis_states() {
        let v = Region::chain(0, 1);
        let mu = linalg::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let nu = linalg::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]);
        let b = w1_bracket(&mu, &nu, &v, 2).unwrap();
        assert!((b.upper - 1.0).abs() < 1e-12 && (b.lower - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_of_sigma_z() {
        let v = Region::chain(0, 1);
        let b = lipschitz_seminorm(&pauli::z(), &v, 2).unwrap();
        assert!((b.upper - 2.0).abs() < 1e-14);
        let v2 = Region::chain(0, 2);
        let f = linalg::kron(&pauli::z(), &linalg::eye(2)) + linalg::kron(&linalg::eye(2), &pauli::z());
        let b = lipschitz_seminorm(&f, &v2, 2).unwrap();
        assert!(b.lower <= 2.0 + 1e-12 && b.refined_upper >= 2.0 - 1e-9, "{b:?}");
    }
}
