//! Built-in models: dissipative spin systems with a fitted unperturbed part,
//! conjugates of classical spin-flip systems, the XYZ chain with site
//! dissipation, and nearest-neighbour hopping fermions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::config::{to_doc, Boundary, InteractionDoc, ModelConfig, SingleSiteDoc, Statistics, VolumeDoc};
use crate::error::{Error, Result};
use crate::lattice::{Region, Site};
use crate::linalg::{self, c64, pauli, CMat};
use crate::operator::{embed_matrix, pow};

pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// `key=default` pairs accepted by [`builtin`].
    pub params: &'static [(&'static str, f64)],
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "xyz",
        description: "XYZ chain with site dissipation σ_j/2 (j=1,2); j sets J₁=J₂=J₃",
        params: &[("j", 0.001), ("j1", f64::NAN), ("j2", f64::NAN), ("j3", f64::NAN), ("d", 1.0), ("l", 4.0)],
    },
    CatalogEntry {
        name: "fermion_hopping",
        description: "nearest-neighbour hopping fermions with Fermi Ornstein-Uhlenbeck site dissipation",
        params: &[("j", 0.05), ("h", 0.0), ("d", 1.0), ("l", 4.0)],
    },
    CatalogEntry {
        name: "spin_dissipative",
        description: "purely dissipative range-1 spin chain on a periodic ring; unperturbed part fitted from the jumps",
        params: &[("a0", 0.5), ("a1", 0.7), ("b0", 0.3), ("b1", -0.2), ("eps", 0.0005), ("l", 3.0)],
    },
    CatalogEntry {
        name: "classical_glauber",
        description: "quantum conjugate of the 1-D Glauber dynamics of the Ising chain, periodic ring",
        params: &[("beta", 0.2), ("dephasing", 0.0), ("l", 4.0)],
    },
    CatalogEntry {
        name: "classical_constant",
        description: "quantum conjugate of independent spin flips at constant rate, periodic ring",
        params: &[("c", 1.0), ("dephasing", 0.0), ("l", 3.0)],
    },
];

fn param(name: &str, params: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    let entry = CATALOG.iter().find(|e| e.name == name).expect("catalog entry");
    for k in params.keys() {
        if !entry.params.iter().any(|(p, _)| p == k) {
            return Err(Error::Config(format!("model {name} has no parameter {k}")));
        }
    }
    let default = entry.params.iter().find(|(p, _)| *p == key).expect("declared parameter").1;
    Ok(params.get(key).copied().unwrap_or(default))
}

fn count(v: f64, what: &str) -> Result<usize> {
    if v.fract() != 0.0 || v < 1.0 {
        return Err(Error::Config(format!("{what} must be a positive integer")));
    }
    Ok(v as usize)
}

/// Configuration of a built-in model with parameter overrides.
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<ModelConfig> {
    let p = |k: &str| param(name, params, k);
    match name {
        "xyz" => {
            let j = p("j")?;
            let pick = |v: f64| if v.is_nan() { j } else { v };
            let d = count(p("d")?, "d")?;
            Ok(model_xyz([pick(p("j1")?), pick(p("j2")?), pick(p("j3")?)], d, count(p("l")?, "l")?))
        }
        "fermion_hopping" => {
            let d = count(p("d")?, "d")?;
            Ok(model_fermion_hopping(p("j")?, d, p("h")?, count(p("l")?, "l")?))
        }
        "spin_dissipative" => {
            let (a0, a1, b0, b1, eps) = (p("a0")?, p("a1")?, p("b0")?, p("b1")?, p("eps")?);
            let jumps = perturbed_chain_jumps(a0, a1, b0, b1, eps);
            let mut cfg = model_spin_dissipative("spin_dissipative", 1, 1, &jumps, vec![count(p("l")?, "l")?])?.0;
            cfg.volume.boundary = Boundary::Periodic;
            Ok(cfg)
        }
        "classical_glauber" => {
            let rates = FlipRates::glauber(p("beta")?);
            Ok(model_classical_conjugation("classical_glauber", &rates, p("dephasing")?, count(p("l")?, "l")?)?.0)
        }
        "classical_constant" => {
            let rates = FlipRates::constant(p("c")?)?;
            Ok(model_classical_conjugation("classical_constant", &rates, p("dephasing")?, count(p("l")?, "l")?)?.0)
        }
        _ => Err(Error::Config(format!("unknown built-in model {name}"))),
    }
}

fn unit(d: usize, axis: usize) -> Vec<i64> {
    let mut v = vec![0; d];
    v[axis] = 1;
    v
}

fn open_box(l: usize, d: usize) -> VolumeDoc {
    VolumeDoc { shape: vec![l; d], boundary: Boundary::Open }
}

// ---------------------------------------------------------------- XYZ

pub fn model_xyz(j: [f64; 3], d: usize, l: usize) -> ModelConfig {
    let half = |m: CMat| to_doc(&linalg::scale_re(&m, 0.5));
    let s2 = std::f64::consts::SQRT_2;
    let single_site = SingleSiteDoc {
        rho: to_doc(&linalg::scale_re(&linalg::eye(2), 0.5)),
        jumps: vec![half(pauli::x()), half(pauli::y())],
        basis: Some(vec![
            to_doc(&linalg::eye(2)),
            to_doc(&linalg::scale_re(&pauli::plus(), s2)),
            to_doc(&linalg::scale_re(&pauli::minus(), s2)),
            to_doc(&pauli::z()),
        ]),
    };
    let mut interactions = vec![InteractionDoc {
        offsets: vec![vec![0; d]],
        hamiltonian: None,
        jumps: single_site.jumps.clone(),
        parity: 0,
        split: Some(vec![Some(0), Some(1)]),
        anchor: None,
    }];
    for axis in 0..d {
        for (k, &jk) in j.iter().enumerate() {
            let s = pauli::sigma(k + 1);
            interactions.push(InteractionDoc {
                offsets: vec![vec![0; d], unit(d, axis)],
                hamiltonian: Some(to_doc(&linalg::scale_re(&linalg::kron(&s, &s), jk))),
                jumps: vec![],
                parity: 0,
                split: None,
                anchor: None,
            });
        }
    }
    ModelConfig {
        name: "xyz".into(),
        statistics: Statistics::Qudit,
        site_dim: 2,
        dimension: d,
        h_field: None,
        single_site: Some(single_site),
        interactions,
        covariant: true,
        range: Some(1),
        volume: open_box(l, d),
    }
}

/// `|J| = Σ_j |J_j|`.
pub fn j_norm(j: &[f64; 3]) -> f64 {
    j.iter().map(|x| x.abs()).sum()
}

/// `(2√2(1 + 2d|J|), 96√2·d|J|)`: the stated bounds on `C₀` and `M`.
pub fn xyz_bounds(j: &[f64; 3], d: usize) -> (f64, f64) {
    let s2 = std::f64::consts::SQRT_2;
    let jn = j_norm(j);
    (2.0 * s2 * (1.0 + 2.0 * d as f64 * jn), 96.0 * s2 * d as f64 * jn)
}

// ---------------------------------------------------------------- fermions

pub fn hopping_matrix(j: f64) -> CMat {
    let a = linalg::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let a1 = linalg::kron(&a, &linalg::eye(2));
    let a2 = linalg::kron(&pauli::z(), &a);
    let k = &linalg::dagger(&a1) * &a2 + &linalg::dagger(&a2) * &a1;
    linalg::scale_re(&k, j)
}

pub fn model_fermion_hopping(j: f64, d: usize, h: f64, l: usize) -> ModelConfig {
    let interactions = (0..d)
        .map(|axis| InteractionDoc {
            offsets: vec![vec![0; d], unit(d, axis)],
            hamiltonian: Some(to_doc(&hopping_matrix(j))),
            jumps: vec![],
            parity: 0,
            split: None,
            anchor: None,
        })
        .collect();
    ModelConfig {
        name: "fermion_hopping".into(),
        statistics: Statistics::Fermion,
        site_dim: 2,
        dimension: d,
        h_field: Some(h),
        single_site: None,
        interactions,
        covariant: true,
        range: Some(1),
        volume: open_box(l, d),
    }
}

/// `|J| < ch(h/2)/(16d)`.
pub fn hopping_criterion(j: f64, d: usize, h: f64) -> bool {
    j.abs() < (h / 2.0).cosh() / (16.0 * d as f64)
}

// ---------------------------------------------------------------- Δ fits

/// Minimum of `Σ_i ‖p₀A_{i,0} + p₁A_{i,1} − ℓ_i‖` over real `(p₀, p₁)`.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaFit {
    pub value: f64,
    pub params: [f64; 2],
}

type AffineFamily = Vec<([CMat; 2], CMat)>;

fn affine_objective(parts: &AffineFamily, p: [f64; 2]) -> f64 {
    parts
        .iter()
        .map(|(a, l)| {
            let mut m = linalg::scale_re(l, -1.0);
            linalg::axpy(&mut m, linalg::re(p[0]), &a[0]);
            linalg::axpy(&mut m, linalg::re(p[1]), &a[1]);
            linalg::op_norm(&m)
        })
        .sum()
}

/// Least-squares (Frobenius) solution of the same affine family.
fn least_squares_seed(parts: &AffineFamily) -> [f64; 2] {
    let ip = |x: &CMat, y: &CMat| linalg::trace(&(&linalg::dagger(x) * y)).re;
    let mut g = [[0.0; 2]; 2];
    let mut r = [0.0; 2];
    for (a, l) in parts {
        for k in 0..2 {
            r[k] += ip(&a[k], l);
            for m in 0..2 {
                g[k][m] += ip(&a[k], &a[m]);
            }
        }
    }
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if det.abs() < 1e-300 {
        return [0.0, 0.0];
    }
    [(g[1][1] * r[0] - g[0][1] * r[1]) / det, (g[0][0] * r[1] - g[1][0] * r[0]) / det]
}

const GOLDEN_TOL: f64 = 1e-9;

/// Minimizer of a convex function of one variable; never worse than `0`.
fn line_min(phi: &dyn Fn(f64) -> f64, s0: f64) -> f64 {
    let f0 = phi(0.0);
    let expand = |dir: f64| -> (f64, f64) {
        let (mut a, mut b) = (0.0f64, dir * s0);
        let mut fb = phi(b);
        loop {
            let c = 2.0 * b;
            let fc = phi(c);
            if fc >= fb || c.abs() > 1e12 {
                return (a.min(c), a.max(c));
            }
            a = b;
            b = c;
            fb = fc;
        }
    };
    let (mut lo, mut hi) = if phi(s0) < f0 {
        expand(1.0)
    } else if phi(-s0) < f0 {
        expand(-1.0)
    } else {
        (-s0, s0)
    };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (phi(c), phi(d));
    while hi - lo > GOLDEN_TOL * (1.0 + lo.abs().max(hi.abs())) {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = phi(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = phi(d);
        }
    }
    let t = 0.5 * (lo + hi);
    if phi(t) < f0 {
        t
    } else {
        0.0
    }
}

/// Coordinate descent with golden-section line searches along the two axes
/// and the two diagonals.
fn descend(parts: &AffineFamily, start: [f64; 2], scale: f64) -> DeltaFit {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let dirs = [[1.0, 0.0], [0.0, 1.0], [s, s], [s, -s]];
    let mut p = start;
    let mut val = affine_objective(parts, p);
    for _ in 0..500 {
        let before = val;
        for u in &dirs {
            let phi = |t: f64| affine_objective(parts, [p[0] + t * u[0], p[1] + t * u[1]]);
            let t = line_min(&phi, 0.1 * scale);
            p = [p[0] + t * u[0], p[1] + t * u[1]];
            val = affine_objective(parts, p);
        }
        if before - val <= 1e-15 * (1.0 + val) {
            break;
        }
    }
    DeltaFit { value: val, params: p }
}

/// Two starts (origin and least-squares seed); ties go to the smaller
/// parameter norm.
pub fn minimize_affine(parts: &AffineFamily) -> DeltaFit {
    let scale = parts.iter().map(|(_, l)| linalg::op_norm(l)).fold(1e-3, f64::max);
    let a = descend(parts, [0.0, 0.0], scale);
    let b = descend(parts, least_squares_seed(parts), scale);
    let norm = |f: &DeltaFit| f.params[0].hypot(f.params[1]);
    if (a.value - b.value).abs() <= 1e-14 * (1.0 + a.value) {
        if norm(&a) <= norm(&b) {
            a
        } else {
            b
        }
    } else if a.value < b.value {
        a
    } else {
        b
    }
}

// ---------------------------------------------------------------- spin systems

/// Fitted unperturbed data of a dissipative spin model.
#[derive(Clone, Debug, Serialize)]
pub struct SpinDissipative {
    pub delta12: f64,
    pub delta3: f64,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub lambda: f64,
    pub mu: f64,
    pub lambda1: f64,
    pub eta: f64,
    pub range: u64,
    pub dimension: usize,
    /// `72η²(η²+1)(2R+1)^d(2(|α₀|∨|α₁|)Δ₁,₂ + 2(|β₀|∨|β₁|)Δ₃ + Δ₁,₂² + Δ₃²)`
    pub m_bound: f64,
}

fn proj(k: usize) -> CMat {
    let mut m = linalg::zeros(2);
    m[(k, k)] = linalg::ONE;
    m
}

/// The families `σ_{0,j}·diag(p)_0 − ℓ_j` (j = 1, 2) and `diag(p)_0 − ℓ_3`
/// on the ball `B_R(0)`.
pub fn delta_families(jumps: &[CMat; 3], ball: &Region) -> Result<(AffineFamily, AffineFamily)> {
    let origin = Region::single(Site::origin(ball.sites()[0].dim()));
    let e = |m: &CMat| embed_matrix(m, &origin, ball, 2);
    let mut f12 = Vec::new();
    for (j, l) in jumps.iter().take(2).enumerate() {
        let s = pauli::sigma(j + 1);
        f12.push(([e(&(&s * &proj(0)))?, e(&(&s * &proj(1)))?], l.clone()));
    }
    let f3 = vec![([e(&proj(0))?, e(&proj(1))?], jumps[2].clone())];
    Ok((f12, f3))
}

/// Fits `a, b ∈ span{1, σ₃}` to translation covariant jumps `ℓ_{(0,j)}`
/// given on `B_R(0)`, and returns the configuration with
/// `ℓ⁰_j = σ_j a` (j = 1, 2), `ℓ⁰_3 = b` and `ι` the identity.
pub fn model_spin_dissipative(
    name: &str,
    dimension: usize,
    range: u64,
    jumps: &[CMat; 3],
    shape: Vec<usize>,
) -> Result<(ModelConfig, SpinDissipative)> {
    let ball = Region::ball(&Site::origin(dimension), range as usize);
    let d = pow(2, ball.len());
    if jumps.iter().any(|l| l.nrows() != d || l.ncols() != d) {
        return Err(Error::Dimension(format!("jumps must act on the {} sites of B_R(0)", ball.len())));
    }
    let (f12, f3) = delta_families(jumps, &ball)?;
    let fa = minimize_affine(&f12);
    let fb = minimize_affine(&f3);
    let [a0, a1] = fa.params;
    let [b0, b1] = fb.params;
    let s = a0 * a0 + a1 * a1;
    if s <= 1e-12 {
        return Err(Error::Model(format!("degenerate fit a = diag({a0:e}, {a1:e})")));
    }
    if a0 == 0.0 || a1 == 0.0 {
        return Err(Error::Model("fitted a is singular; the reference state is not faithful".into()));
    }
    let a = linalg::from_real_rows(&[&[a0, 0.0], &[0.0, a1]]);
    let b = linalg::from_real_rows(&[&[b0, 0.0], &[0.0, b1]]);
    let rho = linalg::from_real_rows(&[&[a1 * a1 / s, 0.0], &[0.0, a0 * a0 / s]]);
    let basis = [
        linalg::eye(2),
        linalg::from_real_rows(&[&[a0 / a1, 0.0], &[0.0, -a1 / a0]]),
        linalg::scale_re(&pauli::plus(), (1.0 + a1 * a1 / (a0 * a0)).sqrt()),
        linalg::scale_re(&pauli::minus(), (1.0 + a0 * a0 / (a1 * a1)).sqrt()),
    ];
    let r = (a0 / a1).abs().max((a1 / a0).abs());
    let eta = (1.0 + r * r).sqrt();
    let lambda = 4.0 * s;
    let mu = 2.0 * s + (b0 - b1).powi(2);
    let (d12, d3) = (fa.value, fb.value);
    let m_bound = 72.0
        * eta.powi(2)
        * (eta.powi(2) + 1.0)
        * ((2 * range + 1) as f64).powi(dimension as i32)
        * (2.0 * a0.abs().max(a1.abs()) * d12 + 2.0 * b0.abs().max(b1.abs()) * d3 + d12 * d12 + d3 * d3);
    let single_site = SingleSiteDoc {
        rho: to_doc(&rho),
        jumps: vec![to_doc(&(&pauli::x() * &a)), to_doc(&(&pauli::y() * &a)), to_doc(&b)],
        basis: Some(basis.iter().map(to_doc).collect()),
    };
    let offsets: Vec<Vec<i64>> = ball.sites().iter().map(|s| s.0.clone()).collect();
    let interactions = jumps
        .iter()
        .enumerate()
        .map(|(j, l)| InteractionDoc {
            offsets: offsets.clone(),
            hamiltonian: None,
            jumps: vec![to_doc(l)],
            parity: 0,
            split: Some(vec![Some(j)]),
            anchor: None,
        })
        .collect();
    let cfg = ModelConfig {
        name: name.into(),
        statistics: Statistics::Qudit,
        site_dim: 2,
        dimension,
        h_field: None,
        single_site: Some(single_site),
        interactions,
        covariant: true,
        // χ(x, j) = B_R(x) has diameter 2R
        range: Some(2 * range),
        volume: VolumeDoc { shape, boundary: Boundary::Open },
    };
    let data = SpinDissipative {
        delta12: d12,
        delta3: d3,
        alpha: [a0, a1],
        beta: [b0, b1],
        lambda,
        mu,
        lambda1: lambda.min(mu),
        eta,
        range,
        dimension,
        m_bound,
    };
    Ok((cfg, data))
}

/// Range-1 chain jumps `ℓ_j = σ_{0,j}a_0 + ε σ_{0,j}σ_{1,3}` (j = 1, 2) and
/// `ℓ_3 = b_0 + ε σ_{−1,1}` on `B_1(0) = {−1, 0, 1}`.
pub fn perturbed_chain_jumps(a0: f64, a1: f64, b0: f64, b1: f64, eps: f64) -> [CMat; 3] {
    let id = linalg::eye(2);
    let a = linalg::from_real_rows(&[&[a0, 0.0], &[0.0, a1]]);
    let b = linalg::from_real_rows(&[&[b0, 0.0], &[0.0, b1]]);
    let k3 = |x: &CMat, y: &CMat, z: &CMat| linalg::kron_all(&[x.clone(), y.clone(), z.clone()]);
    let l = |j: usize| {
        let s = pauli::sigma(j);
        k3(&id, &(&s * &a), &id) + linalg::scale_re(&k3(&id, &s, &pauli::z()), eps)
    };
    [l(1), l(2), k3(&id, &b, &id) + linalg::scale_re(&k3(&pauli::x(), &id, &id), eps)]
}

// ---------------------------------------------------------------- classical conjugation

/// Flip rates `c_x(σ)` of a one-dimensional spin system as a table over the
/// spins of `{x−R, …, x+R}`; digit 0 is spin +1 and the leftmost site is the
/// most significant digit.
#[derive(Clone, Debug, Serialize)]
pub struct FlipRates {
    pub radius: usize,
    pub table: Vec<f64>,
}

impl FlipRates {
    pub fn new(radius: usize, table: Vec<f64>) -> Result<Self> {
        if table.len() != 1 << (2 * radius + 1) {
            return Err(Error::Config(format!("rate table needs {} entries", 1 << (2 * radius + 1))));
        }
        if let Some(c) = table.iter().find(|c| !(**c >= 0.0) || !c.is_finite()) {
            return Err(Error::Model(format!("negative or non-finite flip rate {c}")));
        }
        Ok(FlipRates { radius, table })
    }

    pub fn constant(c: f64) -> Result<Self> {
        FlipRates::new(0, vec![c, c])
    }

    /// Heat-bath rates `1/(1 + exp(2βσ_x(σ_{x−1} + σ_{x+1})))` of the Ising chain.
    pub fn glauber(beta: f64) -> Self {
        let table = (0..8)
            .map(|idx| {
                let spin = |k: usize| if (idx >> (2 - k)) & 1 == 0 { 1.0 } else { -1.0 };
                1.0 / (1.0 + (2.0 * beta * spin(1) * (spin(0) + spin(2))).exp())
            })
            .collect();
        FlipRates { radius: 1, table }
    }

    /// Rate at `x` on a ring of `l` sites for configuration index `sigma`
    /// (site 0 most significant).
    pub fn rate_on_ring(&self, sigma: usize, x: usize, l: usize) -> f64 {
        let r = self.radius as i64;
        let mut idx = 0;
        for k in -r..=r {
            let y = (x as i64 + k).rem_euclid(l as i64) as usize;
            idx = idx * 2 + ((sigma >> (l - 1 - y)) & 1);
        }
        self.table[idx]
    }
}

/// Jumps `ℓ_j = ½σ_{0,j}ι(√c_0)` (j = 1, 2) and `ℓ_3 = κσ_{0,3}` on `B_R(0)`.
pub fn conjugation_jumps(rates: &FlipRates, dephasing: f64) -> Result<[CMat; 3]> {
    let ball = Region::ball(&Site::origin(1), rates.radius);
    let origin = Region::single(Site::origin(1));
    let sqrt_c: Vec<c64> = rates.table.iter().map(|c| linalg::re(c.sqrt())).collect();
    let g = linalg::diag(&sqrt_c);
    let l = |j: usize| -> Result<CMat> {
        Ok(linalg::scale_re(&(&embed_matrix(&pauli::sigma(j), &origin, &ball, 2)? * &g), 0.5))
    };
    Ok([l(1)?, l(2)?, linalg::scale_re(&embed_matrix(&pauli::z(), &origin, &ball, 2)?, dephasing)])
}

pub fn model_classical_conjugation(
    name: &str,
    rates: &FlipRates,
    dephasing: f64,
    ring: usize,
) -> Result<(ModelConfig, SpinDissipative)> {
    let jumps = conjugation_jumps(rates, dephasing)?;
    let (mut cfg, data) = model_spin_dissipative(name, 1, rates.radius as u64, &jumps, vec![ring])?;
    cfg.volume.boundary = Boundary::Periodic;
    Ok((cfg, data))
}

/// Matrix of `𝓛_cl f(σ) = Σ_x c_x(σ)[f(σ^x) − f(σ)]` on `{−1,1}^l`.
pub fn classical_generator(rates: &FlipRates, l: usize) -> Vec<Vec<f64>> {
    let n = 1 << l;
    let mut m = vec![vec![0.0; n]; n];
    for (sigma, row) in m.iter_mut().enumerate() {
        for x in 0..l {
            let c = rates.rate_on_ring(sigma, x, l);
            row[sigma ^ (1 << (l - 1 - x))] += c;
            row[sigma] -= c;
        }
    }
    m
}

/// `max_f ‖𝓛(ι f) − ι(𝓛_cl f)‖` over the indicator functions `f` of the
/// `2^l` configurations, with `𝓛` assembled on the ring.
pub fn conjugation_residual(cfg: &ModelConfig, rates: &FlipRates) -> Result<f64> {
    let l = cfg.volume.shape[0];
    if cfg.dimension != 1 || cfg.volume.boundary != Boundary::Periodic {
        return Err(Error::Config("conjugation check needs a periodic chain".into()));
    }
    let gen = cfg.build()?.generator(&cfg.volume)?;
    let lcl = classical_generator(rates, l);
    let n = 1 << l;
    let mut worst = 0.0f64;
    for s in 0..n {
        let mut f = linalg::zeros(n);
        f[(s, s)] = linalg::ONE;
        let image: Vec<c64> = (0..n).map(|sigma| linalg::re(lcl[sigma][s])).collect();
        worst = worst.max(linalg::op_norm(&(gen.apply(&f) - linalg::diag(&image))));
    }
    Ok(worst)
}
