//! Operators on finite regions of a qudit lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Region, Site};
use crate::linalg::{self, c64, CMat, ONE, ZERO};

/// A dense matrix acting on the tensor product of the site spaces of
/// `support`, factors in the global site order.
#[derive(Clone, Debug)]
pub struct LocalOperator {
    pub support: Region,
    pub site_dim: usize,
    pub matrix: CMat,
}

pub fn pow(q: usize, n: usize) -> usize {
    q.checked_pow(n as u32).expect("dimension overflow")
}

/// Index tables for splitting a multi-index over `n` sites into the digits at
/// `positions` and the remaining digits. `combine[s][c]` is the global index
/// with sub-index `s` on `positions` and `c` on the complement.
struct IndexSplit {
    combine: Vec<Vec<usize>>,
}

impl IndexSplit {
    fn new(n: usize, q: usize, positions: &[usize]) -> Self {
        let k = positions.len();
        let rest: Vec<usize> = (0..n).filter(|p| !positions.contains(p)).collect();
        let ds = pow(q, k);
        let dc = pow(q, n - k);
        let place = |digits_at: &[usize], value: usize, width: usize| -> Vec<(usize, usize)> {
            let mut out = Vec::with_capacity(width);
            let mut v = value;
            for &p in digits_at.iter().rev() {
                out.push((p, v % q));
                v /= q;
            }
            out
        };
        let weight = |p: usize| pow(q, n - 1 - p);
        let mut combine = vec![vec![0usize; dc]; ds];
        for (s, row) in combine.iter_mut().enumerate() {
            let base: usize = place(positions, s, k).iter().map(|&(p, d)| d * weight(p)).sum();
            for (c, slot) in row.iter_mut().enumerate() {
                let off: usize = place(&rest, c, n - k).iter().map(|&(p, d)| d * weight(p)).sum();
                *slot = base + off;
            }
        }
        IndexSplit { combine }
    }
}

/// Embeds `m` (acting on `support`) into `target ⊇ support` by padding with
/// identities.
pub fn embed_matrix(m: &CMat, support: &Region, target: &Region, q: usize) -> Result<CMat> {
    if !support.is_subset(target) {
        return Err(Error::SupportNotContained(support.to_string(), target.to_string()));
    }
    if m.nrows() != pow(q, support.len()) {
        return Err(Error::Dimension(format!(
            "matrix of size {} on {} sites of dimension {q}",
            m.nrows(),
            support.len()
        )));
    }
    if support.len() == target.len() {
        return Ok(m.clone());
    }
    let positions: Vec<usize> = support
        .sites()
        .iter()
        .map(|s| target.position(s).expect("subset"))
        .collect();
    let split = IndexSplit::new(target.len(), q, &positions);
    let d = pow(q, target.len());
    let mut out = linalg::zeros(d);
    let dc = pow(q, target.len() - support.len());
    for (i, j, v) in linalg::nonzeros(m) {
        for c in 0..dc {
            out[(split.combine[i][c], split.combine[j][c])] = v;
        }
    }
    Ok(out)
}

/// `tr_x((w ⊗ 1) m)` for the site at `pos` among `n` sites, with a general
/// single-site weight matrix `w`.
pub fn weighted_partial_trace_matrix(m: &CMat, n: usize, q: usize, pos: usize, w: &CMat) -> CMat {
    let split = IndexSplit::new(n, q, &[pos]);
    let dc = pow(q, n - 1);
    let mut out = linalg::zeros(dc);
    let wnz = linalg::nonzeros(w);
    for jr in 0..dc {
        for ir in 0..dc {
            let mut acc = ZERO;
            for &(a, b, wv) in &wnz {
                acc += wv * m[(split.combine[b][ir], split.combine[a][jr])];
            }
            out[(ir, jr)] = acc;
        }
    }
    out
}

/// Reorders the tensor factors of `m`, given in the order of `listed`, into
/// the sorted order of the region they span.
pub fn sort_factors(m: &CMat, q: usize, listed: &[Site]) -> Result<(Region, CMat)> {
    let region = Region::new(listed.to_vec())?;
    let n = listed.len();
    if m.nrows() != pow(q, n) || m.ncols() != m.nrows() {
        return Err(Error::Dimension(format!("matrix of size {}×{} on {n} sites", m.nrows(), m.ncols())));
    }
    let pos: Vec<usize> = listed.iter().map(|s| region.position(s).expect("member")).collect();
    let d = pow(q, n);
    let old_index: Vec<usize> = (0..d)
        .map(|new| {
            let digit = |k: usize| (new / pow(q, n - 1 - k)) % q;
            listed.iter().enumerate().fold(0, |acc, (i, _)| acc * q + digit(pos[i]))
        })
        .collect();
    let out = CMat::from_fn(d, d, |a, b| m[(old_index[a], old_index[b])]);
    Ok((region, out))
}

impl LocalOperator {
    pub fn new(support: Region, site_dim: usize, matrix: CMat) -> Result<Self> {
        if site_dim < 2 {
            return Err(Error::Dimension("site dimension must be at least 2".into()));
        }
        let d = pow(site_dim, support.len());
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension(format!(
                "expected {d}×{d} matrix on {} sites, got {}×{}",
                support.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(LocalOperator { support, site_dim, matrix })
    }

    pub fn at(x: Site, site_dim: usize, matrix: CMat) -> Result<Self> {
        LocalOperator::new(Region::single(x), site_dim, matrix)
    }

    pub fn identity(support: Region, site_dim: usize) -> Self {
        let d = pow(site_dim, support.len());
        LocalOperator { support, site_dim, matrix: linalg::eye(d) }
    }

    pub fn zero(support: Region, site_dim: usize) -> Self {
        let d = pow(site_dim, support.len());
        LocalOperator { support, site_dim, matrix: linalg::zeros(d) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn embed(&self, target: &Region) -> Result<LocalOperator> {
        let m = embed_matrix(&self.matrix, &self.support, target, self.site_dim)?;
        Ok(LocalOperator { support: target.clone(), site_dim: self.site_dim, matrix: m })
    }

    /// Embedding into `target`, returning the bare matrix.
    pub fn matrix_on(&self, target: &Region) -> Result<CMat> {
        embed_matrix(&self.matrix, &self.support, target, self.site_dim)
    }

    pub fn norm(&self) -> f64 {
        linalg::op_norm(&self.matrix)
    }

    pub fn trace_norm(&self) -> f64 {
        linalg::trace_norm(&self.matrix)
    }

    pub fn adjoint(&self) -> LocalOperator {
        LocalOperator {
            support: self.support.clone(),
            site_dim: self.site_dim,
            matrix: linalg::dagger(&self.matrix),
        }
    }

    pub fn scaled(&self, k: c64) -> LocalOperator {
        LocalOperator {
            support: self.support.clone(),
            site_dim: self.site_dim,
            matrix: linalg::scale(&self.matrix, k),
        }
    }

    fn lift_pair(&self, other: &LocalOperator) -> Result<(Region, CMat, CMat)> {
        if self.site_dim != other.site_dim {
            return Err(Error::Dimension("site dimensions differ".into()));
        }
        let u = self.support.union(&other.support);
        Ok((u.clone(), self.matrix_on(&u)?, other.matrix_on(&u)?))
    }

    pub fn mul(&self, other: &LocalOperator) -> Result<LocalOperator> {
        let (u, a, b) = self.lift_pair(other)?;
        Ok(LocalOperator { support: u, site_dim: self.site_dim, matrix: &a * &b })
    }

    pub fn add(&self, other: &LocalOperator) -> Result<LocalOperator> {
        let (u, a, b) = self.lift_pair(other)?;
        Ok(LocalOperator { support: u, site_dim: self.site_dim, matrix: &a + &b })
    }

    pub fn sub(&self, other: &LocalOperator) -> Result<LocalOperator> {
        let (u, a, b) = self.lift_pair(other)?;
        Ok(LocalOperator { support: u, site_dim: self.site_dim, matrix: &a - &b })
    }

    /// Tensor product of operators on disjoint supports.
    pub fn tensor(&self, other: &LocalOperator) -> Result<LocalOperator> {
        if !self.support.is_disjoint(&other.support) {
            return Err(Error::Model("tensor product needs disjoint supports".into()));
        }
        self.mul(other)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        linalg::is_hermitian(&self.matrix, tol)
    }
}

pub fn commutator(a: &LocalOperator, b: &LocalOperator) -> Result<LocalOperator> {
    let (u, x, y) = a.lift_pair(b)?;
    Ok(LocalOperator { support: u, site_dim: a.site_dim, matrix: linalg::commutator(&x, &y) })
}

pub fn anticommutator(a: &LocalOperator, b: &LocalOperator) -> Result<LocalOperator> {
    let (u, x, y) = a.lift_pair(b)?;
    Ok(LocalOperator { support: u, site_dim: a.site_dim, matrix: linalg::anticommutator(&x, &y) })
}

/// Checks that `rho` is a density matrix (Hermitian, PSD, unit trace).
pub fn check_density(rho: &CMat, tol: f64) -> Result<()> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::InvalidState("not square".into()));
    }
    if !linalg::is_hermitian(rho, tol) {
        return Err(Error::InvalidState("not Hermitian".into()));
    }
    let ev = linalg::herm_eigvals(&linalg::hermitian_part(rho));
    if ev[0] < -tol {
        return Err(Error::InvalidState(format!("negative eigenvalue {:e}", ev[0])));
    }
    let tr = linalg::trace(rho);
    if (tr - ONE).norm() > tol {
        return Err(Error::InvalidState(format!("trace {} ≠ 1", tr.re)));
    }
    Ok(())
}

/// Partial trace over `x`. Without weight this is `tr_x f`; with a density
/// matrix `ρ` it is `tr_x((ρ ⊗ 1) f)`.
pub fn partial_trace(f: &LocalOperator, x: &Site, weight: Option<&CMat>) -> Result<LocalOperator> {
    let pos = f
        .support
        .position(x)
        .ok_or_else(|| Error::SiteNotInSupport(x.to_string()))?;
    let q = f.site_dim;
    let w = match weight {
        Some(rho) => {
            if rho.nrows() != q {
                return Err(Error::Dimension("weight has wrong size".into()));
            }
            check_density(rho, 1e-10)?;
            rho.clone()
        }
        None => linalg::eye(q),
    };
    let m = weighted_partial_trace_matrix(&f.matrix, f.support.len(), q, pos, &w);
    Ok(LocalOperator { support: f.support.without(x), site_dim: q, matrix: m })
}

/// GNS inner product `⟨a, b⟩_ρ = tr(ρ a* b)`.
pub fn gns_inner(rho: &CMat, a: &CMat, b: &CMat) -> Result<c64> {
    if rho.nrows() != a.nrows() || rho.nrows() != b.nrows() {
        return Err(Error::Dimension("gns_inner operands differ in size".into()));
    }
    let ev = linalg::herm_eigvals(&linalg::hermitian_part(rho));
    if ev[0] <= 1e-12 {
        return Err(Error::InvalidState(format!("state is not faithful (eigenvalue {:e})", ev[0])));
    }
    Ok(gns_inner_unchecked(rho, a, b))
}

pub(crate) fn gns_inner_unchecked(rho: &CMat, a: &CMat, b: &CMat) -> c64 {
    let n = rho.nrows();
    let mut acc = ZERO;
    // tr(ρ a* b) = Σ_{i,j,k} ρ_ij conj(a_kj) b_ki
    for i in 0..n {
        for j in 0..n {
            let r = rho[(i, j)];
            if r == ZERO {
                continue;
            }
            for k in 0..n {
                acc += r * a[(k, j)].conj() * b[(k, i)];
            }
        }
    }
    acc
}

/// Serializable form of a local operator used in reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorRecord {
    pub support: Region,
    pub site_dim: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

pub fn matrix_to_pairs(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config("matrix is not square".into()));
    }
    Ok(CMat::from_fn(n, n, |i, j| c64::new(rows[i][j][0], rows[i][j][1])))
}
