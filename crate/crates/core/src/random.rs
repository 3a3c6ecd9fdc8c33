//! Seeded random matrices for the verification checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::{Region, Site};
use crate::linalg::{self, c64, CMat};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with real and imaginary parts uniform in [−1, 1].
pub fn matrix<R: Rng>(rng: &mut R, d: usize) -> CMat {
    CMat::from_fn(d, d, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn hermitian<R: Rng>(rng: &mut R, d: usize) -> CMat {
    linalg::hermitian_part(&matrix(rng, d))
}

/// Random full-rank density matrix `G G* / tr(G G*)`.
pub fn density<R: Rng>(rng: &mut R, d: usize) -> CMat {
    let g = matrix(rng, d);
    let p = &g * linalg::dagger(&g);
    let t = linalg::trace(&p).re;
    linalg::hermitian_part(&linalg::scale_re(&p, 1.0 / t))
}

/// Random pure state `|ψ⟩⟨ψ|`.
pub fn pure_state<R: Rng>(rng: &mut R, d: usize) -> CMat {
    let v = CMat::from_fn(d, 1, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let n = v.norm_l2();
    let v = linalg::scale_re(&v, 1.0 / n);
    &v * linalg::dagger(&v)
}

/// Random operator on `support`, embedded into `volume`.
pub fn local_matrix<R: Rng>(rng: &mut R, support: &Region, volume: &Region, q: usize) -> CMat {
    let d = crate::operator::pow(q, support.len());
    crate::operator::embed_matrix(&matrix(rng, d), support, volume, q).expect("support inside volume")
}

/// Random support of one or two adjacent sites among `allowed` (sites of a
/// chain or box), embedded operator on `volume`.
pub fn local_observable<R: Rng>(rng: &mut R, allowed: &[Site], volume: &Region, q: usize) -> CMat {
    let x = allowed[rng.random_range(0..allowed.len())].clone();
    let neighbours: Vec<&Site> = allowed.iter().filter(|y| x.dist(y) == 1).collect();
    let support = if !neighbours.is_empty() && rng.random_bool(0.5) {
        let y = neighbours[rng.random_range(0..neighbours.len())].clone();
        Region::new(vec![x, y]).expect("distinct sites")
    } else {
        Region::single(x)
    };
    local_matrix(rng, &support, volume, q)
}
