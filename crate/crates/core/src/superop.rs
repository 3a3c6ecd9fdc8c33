//! Superoperators in the column-stacking vectorization and Lindblad-form
//! generators built from Hamiltonian and jump pieces.

use crate::linalg::{self, c64, CMat, I, ONE};

/// Linear map on `D×D` matrices, stored as a `D²×D²` matrix acting on
/// vectorizations.
#[derive(Clone, Debug)]
pub struct SuperOperator {
    pub dim: usize,
    pub matrix: CMat,
}

impl SuperOperator {
    pub fn zero(dim: usize) -> Self {
        SuperOperator { dim, matrix: linalg::zeros(dim * dim) }
    }

    pub fn identity(dim: usize) -> Self {
        SuperOperator { dim, matrix: linalg::eye(dim * dim) }
    }

    pub fn apply(&self, f: &CMat) -> CMat {
        linalg::devectorize(&(&self.matrix * &linalg::vectorize(f)), self.dim)
    }

    pub fn compose(&self, other: &SuperOperator) -> SuperOperator {
        SuperOperator { dim: self.dim, matrix: &self.matrix * &other.matrix }
    }

    pub fn exp(&self, t: f64) -> SuperOperator {
        SuperOperator { dim: self.dim, matrix: linalg::expm(&linalg::scale_re(&self.matrix, t)) }
    }

    /// Superoperator of `f ↦ a f b`.
    pub fn sandwich(a: &CMat, b: &CMat) -> SuperOperator {
        SuperOperator { dim: a.nrows(), matrix: linalg::kron(&linalg::transpose(b), a) }
    }

    /// Choi matrix `Σ_{ij} E_ij ⊗ Φ(E_ij)`.
    pub fn choi(&self) -> CMat {
        let d = self.dim;
        let mut out = linalg::zeros(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut e = linalg::zeros(d);
                e[(i, j)] = ONE;
                let img = self.apply(&e);
                for a in 0..d {
                    for b in 0..d {
                        out[(i * d + a, j * d + b)] = img[(a, b)];
                    }
                }
            }
        }
        out
    }
}

/// A generator written as `Σ i[k,·] + Σ (u[·,v] + [u,·]v)` on a space of
/// dimension `dim`. A Lindblad jump `ℓ` contributes the pair `(ℓ*, ℓ)`.
#[derive(Clone, Debug, Default)]
pub struct LindbladForm {
    pub dim: usize,
    pub hamiltonians: Vec<CMat>,
    pub pairs: Vec<(CMat, CMat)>,
}

impl LindbladForm {
    pub fn new(dim: usize) -> Self {
        LindbladForm { dim, hamiltonians: Vec::new(), pairs: Vec::new() }
    }

    pub fn add_hamiltonian(&mut self, k: CMat) {
        assert_eq!(k.nrows(), self.dim);
        self.hamiltonians.push(k);
    }

    pub fn add_jump(&mut self, l: &CMat) {
        self.add_pair(linalg::dagger(l), l.clone());
    }

    pub fn add_pair(&mut self, u: CMat, v: CMat) {
        assert_eq!(u.nrows(), self.dim);
        assert_eq!(v.nrows(), self.dim);
        self.pairs.push((u, v));
    }

    pub fn extend(&mut self, other: &LindbladForm) {
        assert_eq!(self.dim, other.dim);
        self.hamiltonians.extend(other.hamiltonians.iter().cloned());
        self.pairs.extend(other.pairs.iter().cloned());
    }

    /// Heisenberg action `f ↦ Σ i[k,f] + Σ (2ufv − uvf − fuv)`.
    pub fn apply_heisenberg(&self, f: &CMat) -> CMat {
        let mut out = linalg::zeros(self.dim);
        for k in &self.hamiltonians {
            linalg::axpy(&mut out, I, &linalg::commutator(k, f));
        }
        for (u, v) in &self.pairs {
            let uv = u * v;
            let ufv = &(u * f) * v;
            linalg::axpy(&mut out, linalg::re(2.0), &ufv);
            linalg::axpy(&mut out, linalg::re(-1.0), &(&uv * f));
            linalg::axpy(&mut out, linalg::re(-1.0), &(f * &uv));
        }
        out
    }

    /// Schrödinger action, the trace dual: `ρ ↦ Σ −i[k,ρ] + Σ (2vρu − uvρ − ρuv)`.
    pub fn apply_schrodinger(&self, rho: &CMat) -> CMat {
        let mut out = linalg::zeros(self.dim);
        for k in &self.hamiltonians {
            linalg::axpy(&mut out, -I, &linalg::commutator(k, rho));
        }
        for (u, v) in &self.pairs {
            let uv = u * v;
            let vru = &(v * rho) * u;
            linalg::axpy(&mut out, linalg::re(2.0), &vru);
            linalg::axpy(&mut out, linalg::re(-1.0), &(&uv * rho));
            linalg::axpy(&mut out, linalg::re(-1.0), &(rho * &uv));
        }
        out
    }

    pub fn heisenberg(&self) -> SuperOperator {
        let d = self.dim;
        let id = linalg::eye(d);
        let mut m = linalg::zeros(d * d);
        for k in &self.hamiltonians {
            linalg::add_kron(&mut m, I, &id, k);
            linalg::add_kron(&mut m, -I, &linalg::transpose(k), &id);
        }
        for (u, v) in &self.pairs {
            let uv = u * v;
            linalg::add_kron(&mut m, linalg::re(2.0), &linalg::transpose(v), u);
            linalg::add_kron(&mut m, linalg::re(-1.0), &id, &uv);
            linalg::add_kron(&mut m, linalg::re(-1.0), &linalg::transpose(&uv), &id);
        }
        SuperOperator { dim: d, matrix: m }
    }

    pub fn schrodinger(&self) -> SuperOperator {
        let d = self.dim;
        let id = linalg::eye(d);
        let mut m = linalg::zeros(d * d);
        for k in &self.hamiltonians {
            linalg::add_kron(&mut m, -I, &id, k);
            linalg::add_kron(&mut m, I, &linalg::transpose(k), &id);
        }
        for (u, v) in &self.pairs {
            let uv = u * v;
            linalg::add_kron(&mut m, linalg::re(2.0), &linalg::transpose(u), v);
            linalg::add_kron(&mut m, linalg::re(-1.0), &id, &uv);
            linalg::add_kron(&mut m, linalg::re(-1.0), &linalg::transpose(&uv), &id);
        }
        SuperOperator { dim: d, matrix: m }
    }

    pub fn scaled(&self, k: f64) -> LindbladForm {
        let s = c64::new(k, 0.0);
        LindbladForm {
            dim: self.dim,
            hamiltonians: self.hamiltonians.iter().map(|h| linalg::scale(h, s)).collect(),
            pairs: self.pairs.iter().map(|(u, v)| (linalg::scale(u, s), v.clone())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, pauli};

    #[test]
    fn matrix_and_direct_action_agree() {
        let mut g = LindbladForm::new(2);
        g.add_hamiltonian(linalg::scale_re(&pauli::x(), 0.3));
        g.add_jump(&linalg::scale_re(&pauli::minus(), 0.7));
        g.add_pair(pauli::z(), pauli::plus());
        let f = linalg::from_rows(&[
            &[linalg::cx(0.1, 0.2), linalg::cx(1.0, -0.5)],
            &[linalg::cx(-0.3, 0.0), linalg::cx(0.4, 0.9)],
        ]);
        let h = g.heisenberg();
        let s = g.schrodinger();
        assert!(max_abs(&(h.apply(&f) - g.apply_heisenberg(&f))) < 1e-14);
        assert!(max_abs(&(s.apply(&f) - g.apply_schrodinger(&f))) < 1e-14);
        // trace duality
        let rho = linalg::from_rows(&[
            &[linalg::cx(0.6, 0.0), linalg::cx(0.1, 0.2)],
            &[linalg::cx(0.1, -0.2), linalg::cx(0.4, 0.0)],
        ]);
        let a = linalg::trace(&(&rho * &h.apply(&f)));
        let b = linalg::trace(&(&s.apply(&rho) * &f));
        assert!((a - b).norm() < 1e-14);
    }
}
