#![allow(dead_code)]

use lindcert::config::{Model, ModelConfig};
use lindcert::lattice::{Region, Site};
use lindcert::linalg::{self, CMat};
use lindcert::model::ModelSpec;

pub fn s(i: i64) -> Site {
    Site::new(&[i])
}

pub fn qudit(cfg: &ModelConfig) -> ModelSpec {
    match cfg.build().unwrap() {
        Model::Qudit(m) => m,
        Model::Fermion(_) => panic!("expected a qudit model"),
    }
}

pub fn xyz(j: [f64; 3], l: usize) -> (ModelSpec, Region) {
    let cfg = lindcert::catalog::model_xyz(j, 1, l);
    (qudit(&cfg), cfg.region().unwrap())
}

/// Tensor product of single-site matrices listed in site order.
pub fn kron_list(ms: &[CMat]) -> CMat {
    let mut out = ms[0].clone();
    for m in &ms[1..] {
        out = linalg::kron(&out, m);
    }
    out
}

/// `m` at position `pos` of an `n`-site qubit chain.
pub fn qubit_at(m: &CMat, pos: usize, n: usize) -> CMat {
    let ms: Vec<CMat> = (0..n).map(|i| if i == pos { m.clone() } else { linalg::eye(2) }).collect();
    kron_list(&ms)
}

pub fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
    linalg::max_abs(&(a - b)) <= tol
}
