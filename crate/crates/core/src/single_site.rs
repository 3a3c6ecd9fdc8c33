//! The unperturbed one-site generator L₀ and its GNS spectral data.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMat, ONE, ZERO};
use crate::operator::{check_density, gns_inner_unchecked};
use crate::superop::{LindbladForm, SuperOperator};

/// Jumps `ℓ⁰_j` on one site together with the reference state `ρ`.
#[derive(Clone, Debug)]
pub struct SingleSiteGenerator {
    pub site_dim: usize,
    pub rho: CMat,
    pub jumps: Vec<CMat>,
}

impl SingleSiteGenerator {
    pub fn new(rho: CMat, jumps: Vec<CMat>) -> Result<Self> {
        let q = rho.nrows();
        check_density(&rho, 1e-10)?;
        let ev = linalg::herm_eigvals(&linalg::hermitian_part(&rho));
        if ev[0] <= 1e-12 {
            return Err(Error::InvalidState(format!("ρ is not faithful (eigenvalue {:e})", ev[0])));
        }
        for j in &jumps {
            if j.nrows() != q || j.ncols() != q {
                return Err(Error::Dimension("jump size differs from ρ".into()));
            }
        }
        Ok(SingleSiteGenerator { site_dim: q, rho, jumps })
    }

    pub fn form(&self) -> LindbladForm {
        let mut f = LindbladForm::new(self.site_dim);
        for l in &self.jumps {
            f.add_jump(l);
        }
        f
    }
}

/// Heisenberg-picture superoperator of
/// `L₀ f = Σ_j (ℓ_j*[f,ℓ_j] + [ℓ_j*,f]ℓ_j)`.
pub fn build_l0(g: &SingleSiteGenerator) -> SuperOperator {
    g.form().heisenberg()
}

fn matrix_unit(q: usize, k: usize) -> CMat {
    let mut e = linalg::zeros(q);
    e[(k % q, k / q)] = ONE;
    e
}

/// `max_{a,b} |⟨a, L₀b⟩_ρ − ⟨L₀a, b⟩_ρ|` over matrix units; true iff below 1e−9.
pub fn check_gns_selfadjoint(g: &SingleSiteGenerator, l0: &SuperOperator) -> (bool, f64) {
    let q = g.site_dim;
    let units: Vec<CMat> = (0..q * q).map(|k| matrix_unit(q, k)).collect();
    let images: Vec<CMat> = units.iter().map(|e| l0.apply(e)).collect();
    let mut res = 0.0f64;
    for a in 0..q * q {
        for b in 0..q * q {
            let lhs = gns_inner_unchecked(&g.rho, &units[a], &images[b]);
            let rhs = gns_inner_unchecked(&g.rho, &images[a], &units[b]);
            res = res.max((lhs - rhs).norm());
        }
    }
    (res < 1e-9, res)
}

/// GNS-orthonormal eigenbasis of −L₀ with `e₀ = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralData {
    #[serde(serialize_with = "ser_mats")]
    pub basis: Vec<CMat>,
    pub eigenvalues: Vec<f64>,
    pub eta: f64,
    pub gap: f64,
    #[serde(serialize_with = "ser_mat")]
    pub rho: CMat,
}

fn ser_mat<S: serde::Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    crate::operator::matrix_to_pairs(m).serialize(s)
}

fn ser_mats<S: serde::Serializer>(m: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    m.iter().map(crate::operator::matrix_to_pairs).collect::<Vec<_>>().serialize(s)
}

impl SpectralData {
    pub fn site_dim(&self) -> usize {
        self.rho.nrows()
    }

    /// `N = dim A − 1`, the number of non-constant basis elements.
    pub fn n(&self) -> usize {
        self.basis.len() - 1
    }

    /// Builds spectral data from a user-supplied basis, validating
    /// orthonormality and the eigen-relation.
    pub fn from_basis(g: &SingleSiteGenerator, l0: &SuperOperator, basis: Vec<CMat>) -> Result<Self> {
        let q = g.site_dim;
        if basis.len() != q * q {
            return Err(Error::Dimension(format!("basis must have {} elements", q * q)));
        }
        if linalg::max_abs(&(&basis[0] - &linalg::eye(q))) > 1e-12 {
            return Err(Error::Model("first basis element must be the identity".into()));
        }
        for (h, a) in basis.iter().enumerate() {
            for (k, b) in basis.iter().enumerate() {
                let ip = gns_inner_unchecked(&g.rho, a, b);
                let expect = if h == k { ONE } else { ZERO };
                if (ip - expect).norm() > 1e-10 {
                    return Err(Error::Model(format!("basis not GNS-orthonormal at ({h},{k})")));
                }
            }
        }
        let mut pairs = Vec::with_capacity(basis.len());
        for e in basis {
            let img = linalg::scale_re(&l0.apply(&e), -1.0);
            let lam = gns_inner_unchecked(&g.rho, &e, &img).re;
            let resid = linalg::max_abs(&(&img - &linalg::scale_re(&e, lam)));
            if resid > 1e-10 {
                return Err(Error::Model(format!("basis element is not an eigenvector (residual {resid:e})")));
            }
            pairs.push((lam, e));
        }
        let first = pairs.remove(0);
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite eigenvalues"));
        pairs.insert(0, (0.0, first.1));
        Ok(assemble(pairs, g.rho.clone()))
    }

    /// `−L₀ f` reconstructed from the spectral decomposition.
    pub fn reconstruct(&self, f: &CMat) -> CMat {
        let mut out = linalg::zeros(self.site_dim());
        for (e, &lam) in self.basis.iter().zip(&self.eigenvalues) {
            let c = gns_inner_unchecked(&self.rho, e, f);
            linalg::axpy(&mut out, c * lam, e);
        }
        out
    }
}

fn assemble(pairs: Vec<(f64, CMat)>, rho: CMat) -> SpectralData {
    let eta = pairs[1..].iter().map(|(_, e)| linalg::op_norm(e)).fold(0.0, f64::max);
    let gap = if pairs.len() > 1 { pairs[1].0 } else { 0.0 };
    let gap = if gap <= 1e-12 { 0.0 } else { gap };
    let (eigenvalues, basis) = pairs.into_iter().unzip();
    SpectralData { basis, eigenvalues, eta, gap, rho }
}

/// Rotates `e` so that its largest-magnitude entry (first in column-major
/// order among near-ties) is real and positive.
fn orient(e: &CMat) -> CMat {
    let m = linalg::max_abs(e);
    let mut pick = ONE;
    'outer: for j in 0..e.ncols() {
        for i in 0..e.nrows() {
            if e[(i, j)].norm() >= m * (1.0 - 1e-9) {
                pick = e[(i, j)];
                break 'outer;
            }
        }
    }
    let phase = pick.conj() / pick.norm();
    linalg::scale(e, phase)
}

fn rounded_key(e: &CMat) -> Vec<i64> {
    let mut k = Vec::with_capacity(2 * e.nrows() * e.ncols());
    for j in 0..e.ncols() {
        for i in 0..e.nrows() {
            k.push((e[(i, j)].re * 1e8).round() as i64);
            k.push((e[(i, j)].im * 1e8).round() as i64);
        }
    }
    k
}

/// Solves the GNS-self-adjoint eigenproblem of −L₀ in a GNS-orthonormal frame
/// obtained from the Cholesky factor of the Gram matrix of matrix units.
pub fn spectral_decompose(g: &SingleSiteGenerator, l0: &SuperOperator) -> Result<SpectralData> {
    let (ok, res) = check_gns_selfadjoint(g, l0);
    if !ok {
        return Err(Error::NotSelfAdjoint(res));
    }
    let q = g.site_dim;
    let n = q * q;
    let units: Vec<CMat> = (0..n).map(|k| matrix_unit(q, k)).collect();
    let gram = CMat::from_fn(n, n, |a, b| gns_inner_unchecked(&g.rho, &units[a], &units[b]));
    let l = linalg::cholesky(&linalg::hermitian_part(&gram))?;
    let lstar = linalg::dagger(&l);
    let lstar_inv = linalg::dagger(&linalg::lower_inverse(&l));
    let a = linalg::scale_re(&l0.matrix, -1.0);
    let b = &(&lstar * &a) * &lstar_inv;
    let y1 = &lstar * &linalg::vectorize(&linalg::eye(q));
    let qfull = linalg::qr_q(&y1);
    let qrest = qfull.subcols(1, n - 1).to_owned();
    let bc = &(&linalg::dagger(&qrest) * &b) * &qrest;
    let (vals, vecs) = linalg::herm_eig(&linalg::hermitian_part(&bc));
    let coords = &lstar_inv * &(&qrest * &vecs);
    let mut pairs: Vec<(f64, CMat)> = (0..n - 1)
        .map(|h| {
            let c = coords.subcols(h, 1).to_owned();
            (vals[h], orient(&linalg::devectorize(&c, q)))
        })
        .collect();
    // ascending; near-degenerate clusters ordered by rounded entries
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite eigenvalues"));
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && (pairs[end].0 - pairs[start].0).abs() < 1e-9 {
            end += 1;
        }
        pairs[start..end].sort_by_key(|p| rounded_key(&p.1));
        start = end;
    }
    pairs.insert(0, (0.0, linalg::eye(q)));
    Ok(assemble(pairs, g.rho.clone()))
}

/// A random generator with diagonal faithful `ρ` satisfying detailed balance:
/// transition jumps `√(γ p_a)|a⟩⟨b|`, `√(γ p_b)|b⟩⟨a|` and real diagonal
/// dephasing.
pub fn random_detailed_balance<R: Rng>(q: usize, rng: &mut R) -> SingleSiteGenerator {
    let p: Vec<f64> = (0..q).map(|_| rng.random_range(0.2..1.0)).collect();
    let z: f64 = p.iter().sum();
    let p: Vec<f64> = p.iter().map(|x| x / z).collect();
    let rho = linalg::diag(&p.iter().map(|&x| c64::new(x, 0.0)).collect::<Vec<_>>());
    let mut jumps = Vec::new();
    for a in 0..q {
        for b in (a + 1)..q {
            let gamma = rng.random_range(0.3..1.5);
            let mut up = linalg::zeros(q);
            up[(a, b)] = c64::new((gamma * p[a]).sqrt(), 0.0);
            let mut down = linalg::zeros(q);
            down[(b, a)] = c64::new((gamma * p[b]).sqrt(), 0.0);
            jumps.push(up);
            jumps.push(down);
        }
    }
    let deph: Vec<c64> = (0..q).map(|_| c64::new(rng.random_range(-0.5..0.5), 0.0)).collect();
    jumps.push(linalg::diag(&deph));
    SingleSiteGenerator::new(rho, jumps).expect("random detailed-balance generator is valid")
}
