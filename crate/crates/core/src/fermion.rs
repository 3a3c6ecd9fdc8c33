//! Jordan–Wigner CAR representation, the skew derivations `∂, ∂̄, ∂̌, ∂̄̌`,
//! the Fermi Ornstein–Uhlenbeck generator and the fermionic certificate.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Region, Site};
use crate::linalg::{self, c64, CMat, ONE};
use crate::locality::{CertificateReport, Gradient, SiteMatrix};
use crate::model::FiniteVolumeGenerator;
use crate::operator::pow;
use crate::random;
use crate::superop::LindbladForm;

/// CAR operators on `2^|Λ|`-dimensional Fock space, sites in the order of
/// the region.
#[derive(Clone, Debug)]
pub struct CarRep {
    pub volume: Region,
    pub h: f64,
    pub a: Vec<CMat>,
    pub w: CMat,
    pub v: Vec<CMat>,
}

fn lowering() -> CMat {
    linalg::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
}

pub fn build_car(volume: &Region, h: f64) -> CarRep {
    let n = volume.len();
    let z = linalg::pauli::z();
    let id = linalg::eye(2);
    let a: Vec<CMat> = (0..n)
        .map(|k| {
            let factors: Vec<CMat> = (0..n)
                .map(|j| match j.cmp(&k) {
                    std::cmp::Ordering::Less => z.clone(),
                    std::cmp::Ordering::Equal => lowering(),
                    std::cmp::Ordering::Greater => id.clone(),
                })
                .collect();
            linalg::kron_all(&factors)
        })
        .collect();
    let w = linalg::kron_all(&vec![z; n]);
    let v = a.iter().map(|ax| &w * ax).collect();
    CarRep { volume: volume.clone(), h, a, w, v }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Derivation {
    /// `∂_x = w[v_x,·]`
    D,
    /// `∂̄_x = −w[v_x*,·]`
    DBar,
    /// `∂̌_x = w[a_x,·]`
    DCheck,
    /// `∂̄̌_x = −w[a_x*,·]`
    DBarCheck,
}

impl CarRep {
    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    fn idx(&self, x: &Site) -> Result<usize> {
        self.volume.position(x).ok_or_else(|| Error::SiteNotInSupport(x.to_string()))
    }

    pub fn a(&self, x: &Site) -> Result<&CMat> {
        Ok(&self.a[self.idx(x)?])
    }

    pub fn number(&self, k: usize) -> CMat {
        &linalg::dagger(&self.a[k]) * &self.a[k]
    }

    pub fn derivation(&self, kind: Derivation, x: &Site, f: &CMat) -> Result<CMat> {
        let k = self.idx(x)?;
        Ok(self.derive_at(kind, k, f))
    }

    fn derive_at(&self, kind: Derivation, k: usize, f: &CMat) -> CMat {
        let (op, sign) = match kind {
            Derivation::D => (self.v[k].clone(), 1.0),
            Derivation::DBar => (linalg::dagger(&self.v[k]), -1.0),
            Derivation::DCheck => (self.a[k].clone(), 1.0),
            Derivation::DBarCheck => (linalg::dagger(&self.a[k]), -1.0),
        };
        linalg::scale_re(&(&self.w * &linalg::commutator(&op, f)), sign)
    }

    /// `D_x = v_x*[v_x,·]`.
    pub fn big_d(&self, k: usize, f: &CMat) -> CMat {
        &linalg::dagger(&self.v[k]) * &linalg::commutator(&self.v[k], f)
    }

    /// `D̄_x = v_x[v_x*,·]`.
    pub fn big_dbar(&self, k: usize, f: &CMat) -> CMat {
        &self.v[k] * &linalg::commutator(&linalg::dagger(&self.v[k]), f)
    }

    /// Normalized partial trace on the factor generated by `v_x`, i.e. the
    /// conditional expectation onto the algebra of the other sites, computed
    /// as the twirl `¼Σ_P PfP` over the Pauli unitaries built from `v_x`.
    pub fn e_x(&self, k: usize, f: &CMat) -> CMat {
        let v = &self.v[k];
        let vd = linalg::dagger(v);
        let x = v + &vd;
        let y = linalg::scale(&(v - &vd), linalg::I);
        let z = &(&vd * v) - &(v * &vd);
        let mut r = f.clone();
        for p in [x, y, z] {
            r += &p * f * &p;
        }
        linalg::scale_re(&r, 0.25)
    }

    /// Free-fermion product state `e^{hN}/(1+e^h)^{|Λ|}`.
    pub fn pi0(&self) -> CMat {
        let n = self.volume.len();
        let z = 1.0 + self.h.exp();
        let site = linalg::diag(&[linalg::re(1.0 / z), linalg::re(self.h.exp() / z)]);
        linalg::kron_all(&vec![site; n])
    }

    /// `L⁰_x` as a Lindblad form: jumps `e^{h/4}v_x*` and `e^{−h/4}v_x`.
    pub fn ou_form(&self, k: usize) -> LindbladForm {
        let mut form = LindbladForm::new(self.dim());
        form.add_jump(&linalg::scale_re(&linalg::dagger(&self.v[k]), (self.h / 4.0).exp()));
        form.add_jump(&linalg::scale_re(&self.v[k], (-self.h / 4.0).exp()));
        form
    }

    /// `𝓛₀ = Σ_x L⁰_x` on the volume.
    pub fn fermi_ou_generator(&self) -> FiniteVolumeGenerator {
        let mut form = LindbladForm::new(self.dim());
        for k in 0..self.volume.len() {
            form.extend(&self.ou_form(k));
        }
        let mut g = FiniteVolumeGenerator::from_form(self.volume.clone(), 2, form);
        g.included_terms = self.volume.len();
        g
    }

    /// Ordered monomials `Π_j b_j`, `b_j ∈ {1, a_j, a_j*, n_j}`.
    fn monomials(&self) -> Vec<CMat> {
        let n = self.volume.len();
        let d = self.dim();
        let mut out = vec![linalg::eye(d)];
        for k in 0..n {
            let letters = [linalg::eye(d), self.a[k].clone(), linalg::dagger(&self.a[k]), self.number(k)];
            out = out.iter().flat_map(|m| letters.iter().map(move |b| m * b)).collect();
        }
        out
    }
}

/// Random element of the CAR algebra of the sites at positions `sites`: a
/// combination of the ordered monomials in `1, a, a*, n` at those sites.
pub fn random_local<R: Rng>(rep: &CarRep, rng: &mut R, sites: &[usize]) -> CMat {
    let d = rep.dim();
    let mut out = vec![linalg::eye(d)];
    for &k in sites {
        let letters = [linalg::eye(d), rep.a[k].clone(), linalg::dagger(&rep.a[k]), rep.number(k)];
        out = out.iter().flat_map(|m| letters.iter().map(move |b| m * b)).collect();
    }
    let mut f = linalg::zeros(d);
    for m in &out {
        linalg::axpy(&mut f, c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)), m);
    }
    f
}

/// `2ch(h/2)`, the gap of `−L⁰_x`.
pub fn ou_gap(h: f64) -> f64 {
    2.0 * (h / 2.0).cosh()
}

/// Largest violation among the CAR relations, the sign-operator relations
/// and the `v`-commutation relations, plus `w e_X = (−1)^{|X|} e_X`.
pub fn car_residual(rep: &CarRep) -> f64 {
    let n = rep.volume.len();
    let d = rep.dim();
    let id = linalg::eye(d);
    let zero = linalg::zeros(d);
    let mut worst = 0.0f64;
    let mut upd = |a: &CMat, b: &CMat| worst = worst.max(linalg::max_abs(&(a - b)));
    for x in 0..n {
        let ax = &rep.a[x];
        let axs = linalg::dagger(ax);
        let vx = &rep.v[x];
        let vxs = linalg::dagger(vx);
        upd(&(&rep.w * ax), &linalg::scale_re(&(ax * &rep.w), -1.0));
        upd(&(&rep.w * &axs), &linalg::scale_re(&(&axs * &rep.w), -1.0));
        for y in 0..n {
            let ay = &rep.a[y];
            let ays = linalg::dagger(ay);
            upd(&linalg::anticommutator(ax, ay), &zero);
            upd(&linalg::anticommutator(&axs, &ays), &zero);
            upd(&linalg::anticommutator(ax, &ays), if x == y { &id } else { &zero });
            upd(&linalg::commutator(vx, ay), &zero);
            upd(&linalg::commutator(&vxs, &ays), &zero);
            let expect = if x == y { rep.w.clone() } else { zero.clone() };
            upd(&linalg::commutator(vx, &ays), &expect);
            upd(&linalg::scale_re(&linalg::commutator(&vxs, ay), -1.0), &expect);
        }
    }
    upd(&(&rep.w * &rep.w), &id);
    for s in 0..d {
        let parity = if (s as u32).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        worst = worst.max((rep.w[(s, s)] - linalg::re(parity)).norm());
    }
    worst
}

/// `max_x ‖f − (E_x + D_x + D̄_x − ½(D_xD̄_x + D̄_xD_x))f‖`.
pub fn decomposition_residual(rep: &CarRep, f: &CMat) -> f64 {
    (0..rep.volume.len())
        .map(|k| {
            let d = rep.big_d(k, f);
            let db = rep.big_dbar(k, f);
            let mut r = f - rep.e_x(k, f) - &d - &db;
            linalg::axpy(&mut r, linalg::re(0.5), &(rep.big_d(k, &db) + rep.big_dbar(k, &d)));
            linalg::op_norm(&r)
        })
        .fold(0.0, f64::max)
}

/// `(‖∂_xf‖+‖∂̄_xf‖)` calculus on a CAR representation.
pub struct FermionCalculus {
    pub rep: CarRep,
}

impl Gradient for FermionCalculus {
    fn volume(&self) -> &Region {
        &self.rep.volume
    }

    fn profile(&self, f: &CMat) -> Vec<f64> {
        (0..self.rep.volume.len())
            .map(|k| {
                linalg::op_norm(&self.rep.derive_at(Derivation::D, k, f))
                    + linalg::op_norm(&self.rep.derive_at(Derivation::DBar, k, f))
            })
            .collect()
    }
}

/// One member of a fermionic interaction. Matrices act on the Fock space of
/// `region` in its own Jordan–Wigner order; `jump` lies in `w^p 𝒜_p`.
#[derive(Clone, Debug)]
pub struct FermionTerm {
    pub id: usize,
    pub region: Region,
    pub parity: u8,
    pub hamiltonian: Option<CMat>,
    pub jump: Option<CMat>,
}

impl FermionTerm {
    pub fn new(id: usize, region: Region, parity: u8, hamiltonian: Option<CMat>, jump: Option<CMat>) -> Result<Self> {
        if parity > 1 {
            return Err(Error::Model("parity must be 0 or 1".into()));
        }
        let d = pow(2, region.len());
        let w = linalg::kron_all(&vec![linalg::pauli::z(); region.len()]);
        for m in hamiltonian.iter().chain(jump.iter()) {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Dimension(format!("fermion term {id}: expected {d}×{d} matrices")));
            }
        }
        if let Some(k) = &hamiltonian {
            if parity != 0 {
                return Err(Error::Model(format!("term {id}: odd terms carry no hamiltonian")));
            }
            if !linalg::is_hermitian(k, 1e-12) {
                return Err(Error::Model(format!("term {id}: hamiltonian is not self-adjoint")));
            }
            if linalg::max_abs(&(&(&w * k) * &w - k)) > 1e-12 {
                return Err(Error::Model(format!("term {id}: hamiltonian is not even")));
            }
        }
        if let Some(l) = &jump {
            let s = if parity == 0 { 1.0 } else { -1.0 };
            if linalg::max_abs(&(&(&w * l) * &w - linalg::scale_re(l, s))) > 1e-12 {
                return Err(Error::Model(format!("term {id}: jump does not have parity {parity}")));
            }
        }
        Ok(FermionTerm { id, region, parity, hamiltonian, jump })
    }

    fn translated(&self, by: &Site) -> FermionTerm {
        FermionTerm { region: self.region.translate(by), ..self.clone() }
    }

    fn is_zero(&self) -> bool {
        let z = |o: &Option<CMat>| o.as_ref().is_none_or(|m| linalg::max_abs(m) == 0.0);
        z(&self.hamiltonian) && z(&self.jump)
    }
}

#[derive(Clone, Debug)]
pub struct FermionModelSpec {
    pub name: String,
    pub dim: usize,
    pub h_field: f64,
    pub terms: Vec<FermionTerm>,
    pub covariant: bool,
    pub range: Option<u64>,
}

impl FermionModelSpec {
    pub fn new(name: &str, dim: usize, h_field: f64, terms: Vec<FermionTerm>, covariant: bool, range: Option<u64>) -> Result<Self> {
        for (i, t) in terms.iter().enumerate() {
            if t.id != i {
                return Err(Error::Model("term ids must be 0..n in order".into()));
            }
            if t.region.sites().iter().any(|s| s.dim() != dim) {
                return Err(Error::Model(format!("term {i} has sites of the wrong dimension")));
            }
            if let Some(r) = range {
                if t.region.diameter() > r && !t.is_zero() {
                    return Err(Error::Model(format!("term {i} exceeds the declared range {r}")));
                }
            }
        }
        Ok(FermionModelSpec { name: name.to_string(), dim, h_field, terms, covariant, range })
    }

    pub fn terms_in(&self, volume: &Region) -> (Vec<FermionTerm>, usize) {
        let mut inc = Vec::new();
        let mut exc = 0;
        for t in &self.terms {
            if self.covariant {
                let mut shifts = std::collections::BTreeSet::new();
                for s in volume.sites() {
                    for r in t.region.sites() {
                        shifts.insert(Site(s.0.iter().zip(&r.0).map(|(a, b)| a - b).collect()));
                    }
                }
                for z in shifts {
                    let p = t.translated(&z);
                    if p.region.is_subset(volume) {
                        inc.push(p);
                    } else {
                        exc += 1;
                    }
                }
            } else if t.region.is_subset(volume) {
                inc.push(t.clone());
            } else if !t.region.is_disjoint(volume) {
                exc += 1;
            }
        }
        (inc, exc)
    }

    pub fn terms_containing(&self, x: &Site) -> Vec<FermionTerm> {
        let mut out = Vec::new();
        for t in &self.terms {
            if self.covariant {
                for r in t.region.sites() {
                    out.push(t.translated(&Site(x.0.iter().zip(&r.0).map(|(a, b)| a - b).collect())));
                }
            } else if t.region.contains(x) {
                out.push(t.clone());
            }
        }
        out
    }

    fn sup_sites(&self) -> Vec<Site> {
        if self.covariant {
            return vec![Site::origin(self.dim)];
        }
        let mut r = Region::empty();
        for t in &self.terms {
            r = r.union(&t.region);
        }
        r.sites().to_vec()
    }

    pub fn effective_range(&self) -> u64 {
        self.range
            .unwrap_or_else(|| self.terms.iter().filter(|t| !t.is_zero()).map(|t| t.region.diameter()).max().unwrap_or(0))
    }
}

/// Coefficients of `g` in the ordered monomials of a representation.
fn monomial_coefficients(local: &CarRep, g: &CMat) -> Result<Vec<c64>> {
    let mons = local.monomials();
    let d2 = local.dim() * local.dim();
    let a = CMat::from_fn(d2, mons.len(), |i, j| mons[j][(i % local.dim(), i / local.dim())]);
    let c = linalg::solve(&a, &linalg::vectorize(g))?;
    Ok((0..mons.len()).map(|i| c[(i, 0)]).collect())
}

/// Embeds an operator of `w^p 𝒜_{region,p}`, given in the Fock space of
/// `region`, into the representation on a larger volume.
pub fn embed_fermion(rep: &CarRep, region: &Region, m: &CMat, parity: u8) -> Result<CMat> {
    if !region.is_subset(&rep.volume) {
        return Err(Error::SupportNotContained(region.to_string(), rep.volume.to_string()));
    }
    let local = build_car(region, rep.h);
    let g = if parity == 1 { &local.w * m } else { m.clone() };
    let coeffs = monomial_coefficients(&local, &g)?;
    let d = rep.dim();
    let pos: Vec<usize> = region.sites().iter().map(|s| rep.volume.position(s).expect("subset")).collect();
    let mut letters: Vec<[CMat; 4]> = Vec::new();
    for &k in &pos {
        letters.push([linalg::eye(d), rep.a[k].clone(), linalg::dagger(&rep.a[k]), rep.number(k)]);
    }
    let mut out = linalg::zeros(d);
    let n = region.len();
    for (idx, c) in coeffs.iter().enumerate() {
        if c.norm() < 1e-15 {
            continue;
        }
        let mut mono = linalg::eye(d);
        for (j, lt) in letters.iter().enumerate() {
            let digit = (idx / 4usize.pow((n - 1 - j) as u32)) % 4;
            if digit != 0 {
                mono = &mono * &lt[digit];
            }
        }
        linalg::axpy(&mut out, *c, &mono);
    }
    Ok(if parity == 1 { &rep.w * &out } else { out })
}

/// `𝓛₁` on the volume: `Σ_{χ(α)⊆Λ} (i[k_α,·] + [ℓ_α*,·]ℓ_α + ℓ_α*[·,ℓ_α])`.
pub fn perturbation_generator(spec: &FermionModelSpec, rep: &CarRep) -> Result<FiniteVolumeGenerator> {
    let (terms, excluded) = spec.terms_in(&rep.volume);
    let mut form = LindbladForm::new(rep.dim());
    for t in &terms {
        if let Some(k) = &t.hamiltonian {
            form.add_hamiltonian(linalg::hermitian_part(&embed_fermion(rep, &t.region, k, 0)?));
        }
        if let Some(l) = &t.jump {
            form.add_jump(&embed_fermion(rep, &t.region, l, t.parity)?);
        }
    }
    let mut g = FiniteVolumeGenerator::from_form(rep.volume.clone(), 2, form);
    g.included_terms = terms.len();
    g.excluded_terms = excluded;
    Ok(g)
}

/// `𝓛_Λ = Σ_{x∈Λ} L⁰_x + Σ_{χ(α)⊆Λ} L¹_α`.
pub fn fermion_generator(spec: &FermionModelSpec, volume: &Region) -> Result<FiniteVolumeGenerator> {
    let rep = build_car(volume, spec.h_field);
    Ok(rep.fermi_ou_generator().plus(&perturbation_generator(spec, &rep)?))
}

struct FermionTermNorms {
    region: Region,
    k_norm: f64,
    l_norm: f64,
    /// per site of the region: (θ-summand, θ̃-summand) without the factor 4
    parts: Vec<(f64, f64)>,
}

fn term_norms(t: &FermionTerm, h: f64) -> FermionTermNorms {
    let rep = build_car(&t.region, h);
    let n = t.region.len();
    let mut parts = vec![(0.0, 0.0); n];
    let k_norm = t.hamiltonian.as_ref().map_or(0.0, linalg::op_norm);
    let l_norm = t.jump.as_ref().map_or(0.0, linalg::op_norm);
    for (k, p) in parts.iter_mut().enumerate() {
        if let Some(km) = &t.hamiltonian {
            p.0 += linalg::op_norm(&rep.derive_at(Derivation::D, k, km));
            p.1 += linalg::op_norm(&rep.derive_at(Derivation::DBar, k, km));
        }
        if let Some(l) = &t.jump {
            let ls = linalg::dagger(l);
            let c = linalg::op_norm(&rep.derive_at(Derivation::DCheck, k, l))
                + linalg::op_norm(&rep.derive_at(Derivation::DCheck, k, &ls));
            let cb = linalg::op_norm(&rep.derive_at(Derivation::DBarCheck, k, l))
                + linalg::op_norm(&rep.derive_at(Derivation::DBarCheck, k, &ls));
            p.0 += 2.0 * l_norm * c;
            p.1 += 2.0 * l_norm * cb;
        }
    }
    FermionTermNorms { region: t.region.clone(), k_norm, l_norm, parts }
}

/// `θ_{x,y}` and `θ̃_{x,y}` summed over the given terms.
fn theta_pair(spec: &FermionModelSpec, terms: &[FermionTerm]) -> BTreeMap<(Site, Site), (f64, f64)> {
    let mut out: BTreeMap<(Site, Site), (f64, f64)> = BTreeMap::new();
    for t in terms {
        let tn = term_norms(t, spec.h_field);
        for (xi, x) in tn.region.sites().iter().enumerate() {
            for y in tn.region.sites() {
                let (a, b) = tn.parts[xi];
                let e = out.entry((x.clone(), y.clone())).or_insert((0.0, 0.0));
                e.0 += 4.0 * a;
                e.1 += 4.0 * b;
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct FermionThetaTable {
    pub y: Site,
    pub entries: Vec<(Site, f64, f64)>,
}

/// Column `y` of `(θ, θ̃)` over the lattice, for every site in `sup_sites`.
pub fn theta_columns(spec: &FermionModelSpec) -> Vec<FermionThetaTable> {
    let mut out = Vec::new();
    for y in spec.sup_sites() {
        let terms = if spec.covariant {
            spec.terms_containing(&y)
        } else {
            spec.terms.iter().filter(|t| t.region.contains(&y)).cloned().collect()
        };
        let map = theta_pair(spec, &terms);
        let entries = map.into_iter().filter(|((_, b), _)| *b == y).map(|((x, _), (t, tt))| (x, t, tt)).collect();
        out.push(FermionThetaTable { y, entries });
    }
    out
}

/// Finite-volume matrix `θ + θ̃` over the included terms.
pub fn theta_matrix(spec: &FermionModelSpec, volume: &Region) -> (SiteMatrix, SiteMatrix) {
    let (terms, _) = spec.terms_in(volume);
    let map = theta_pair(spec, &terms);
    let mut th = SiteMatrix::zeros(volume);
    let mut tt = SiteMatrix::zeros(volume);
    for ((x, y), (a, b)) in map {
        if let (Some(i), Some(j)) = (volume.position(&x), volume.position(&y)) {
            th.entries[i][j] += a;
            tt.entries[i][j] += b;
        }
    }
    (th, tt)
}

/// `C₀ = 2ch(h/2) + 4 sup_x Σ_{α∋x}(‖k_α‖ + 2‖ℓ_α‖²)`.
pub fn compute_c0(spec: &FermionModelSpec) -> f64 {
    let s = spec
        .sup_sites()
        .iter()
        .map(|x| {
            spec.terms_containing(x)
                .iter()
                .map(|t| {
                    let n = term_norms(t, spec.h_field);
                    n.k_norm + 2.0 * n.l_norm * n.l_norm
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    ou_gap(spec.h_field) + 4.0 * s
}

pub fn compute_m(spec: &FermionModelSpec) -> f64 {
    theta_columns(spec)
        .iter()
        .map(|c| c.entries.iter().map(|(_, a, b)| a + b).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn fermion_certificate(spec: &FermionModelSpec) -> CertificateReport {
    let cols = theta_columns(spec);
    let m = cols.iter().map(|c| c.entries.iter().map(|(_, a, b)| a + b).sum::<f64>()).fold(0.0, f64::max);
    let m_xi = |xi: f64| {
        cols.iter()
            .map(|c| c.entries.iter().map(|(x, a, b)| (a + b) * (xi * x.dist(&c.y) as f64).exp()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    CertificateReport::build(
        &spec.name,
        "fermion",
        None,
        None,
        ou_gap(spec.h_field),
        compute_c0(spec),
        m,
        spec.covariant,
        Some(spec.effective_range()),
        &m_xi,
        None,
    )
}

/// `max_{x,f} ‖∂_x𝓛₀f − 𝓛₀∂_xf + 2ch(h/2)∂_xf‖` and the same for `∂̄`, over
/// matrix units.
pub fn intertwining_residual(rep: &CarRep) -> f64 {
    let l0 = rep.fermi_ou_generator();
    let d = rep.dim();
    let gap = ou_gap(rep.h);
    let mut worst = 0.0f64;
    for k in 0..rep.volume.len() {
        for kind in [Derivation::D, Derivation::DBar] {
            for u in 0..d * d {
                let mut f = linalg::zeros(d);
                f[(u % d, u / d)] = ONE;
                let df = rep.derive_at(kind, k, &f);
                let mut r = rep.derive_at(kind, k, &l0.apply(&f)) - l0.apply(&df);
                linalg::axpy(&mut r, linalg::re(gap), &df);
                worst = worst.max(linalg::op_norm(&r));
            }
        }
    }
    worst
}

/// Randomized slacks of the local fermionic inequalities.
#[derive(Clone, Debug, Serialize)]
pub struct FermionBoundSlacks {
    /// `Σ_y θ_{x,y}(‖∂_yf‖+‖∂̄_yf‖) − ‖∂_x𝓛₁f − 𝓛₁∂_xf‖`, and the `∂̄` analog.
    pub commutator: f64,
    /// `2ch(h/2)(‖∂_xf‖+‖∂̄_xf‖) − ‖L⁰_xf‖`.
    pub ou_bound: f64,
    /// `4‖u‖Σ_{x∈X}(‖∂_xf‖+‖∂̄_xf‖) − ‖[u,f]‖` for even `u`.
    pub even_commutator: f64,
    /// `max |‖[v_x,f]‖ − ‖∂_xf‖| + |‖[v_x*,f]‖ − ‖∂̄_xf‖|`.
    pub v_norm_residual: f64,
    /// `C₀⦀f⦀ − ‖𝓛f‖` for `f` at depth ≥ R.
    pub generator_bound: f64,
}

pub fn fermion_bound_slacks<R: Rng>(spec: &FermionModelSpec, volume: &Region, rng: &mut R, trials: usize) -> Result<FermionBoundSlacks> {
    let rep = build_car(volume, spec.h_field);
    let l1 = perturbation_generator(spec, &rep)?;
    let full = rep.fermi_ou_generator().plus(&l1);
    let (th, tt) = theta_matrix(spec, volume);
    let calc = FermionCalculus { rep: rep.clone() };
    let d = rep.dim();
    let n = volume.len();
    let gap = ou_gap(spec.h_field);
    let c0 = compute_c0(spec);
    let r = spec.effective_range();
    let inner: Vec<usize> = (0..n).filter(|&k| volume.depth(&volume.sites()[k]) >= r).collect();
    let mut out = FermionBoundSlacks {
        commutator: f64::INFINITY,
        ou_bound: f64::INFINITY,
        even_commutator: f64::INFINITY,
        v_norm_residual: 0.0,
        generator_bound: f64::INFINITY,
    };
    for _ in 0..trials {
        let f = random::matrix(rng, d);
        let prof = calc.profile(&f);
        let lf = l1.apply(&f);
        for k in 0..n {
            for (kind, tm) in [(Derivation::D, &th), (Derivation::DBar, &tt)] {
                let lhs = rep.derive_at(kind, k, &lf) - l1.apply(&rep.derive_at(kind, k, &f));
                let rhs: f64 = (0..n).map(|y| tm.entries[k][y] * prof[y]).sum();
                out.commutator = out.commutator.min(rhs - linalg::op_norm(&lhs));
            }
            let lx = rep.ou_form(k).apply_heisenberg(&f);
            out.ou_bound = out.ou_bound.min(gap * prof[k] - linalg::op_norm(&lx));
            let vx = &rep.v[k];
            let a = (linalg::op_norm(&linalg::commutator(vx, &f)) - linalg::op_norm(&rep.derive_at(Derivation::D, k, &f))).abs();
            let b = (linalg::op_norm(&linalg::commutator(&linalg::dagger(vx), &f))
                - linalg::op_norm(&rep.derive_at(Derivation::DBar, k, &f)))
            .abs();
            out.v_norm_residual = out.v_norm_residual.max(a + b);
        }
        // even u on one or two sites
        let x = rng.random_range(0..n);
        let y = rng.random_range(0..n);
        let xs: Vec<usize> = if x == y { vec![x] } else { vec![x, y] };
        let mut u = linalg::zeros(d);
        for &i in &xs {
            for &j in &xs {
                let c = c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                linalg::axpy(&mut u, c, &(&linalg::dagger(&rep.a[i]) * &rep.a[j]));
            }
        }
        linalg::axpy(&mut u, linalg::re(rng.random_range(-1.0..1.0)), &linalg::eye(d));
        let s: f64 = xs.iter().map(|&i| prof[i]).sum();
        out.even_commutator = out.even_commutator.min(4.0 * linalg::op_norm(&u) * s - linalg::op_norm(&linalg::commutator(&u, &f)));
        if !inner.is_empty() {
            let k = inner[rng.random_range(0..inner.len())];
            let a = &rep.a[k];
            let g = linalg::scale(a, c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                + linalg::scale(&linalg::dagger(a), c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                + linalg::scale(&rep.number(k), c64::new(rng.random_range(-1.0..1.0), 0.0));
            out.generator_bound = out.generator_bound.min(c0 * calc.seminorm(&g) - linalg::op_norm(&full.apply(&g)));
        }
    }
    Ok(out)
}

/// `max_{a,b} |⟨a,𝓛₀b⟩_{π₀} − ⟨𝓛₀a,b⟩_{π₀}|` over matrix units.
pub fn ou_gns_symmetry_residual(rep: &CarRep) -> f64 {
    let l0 = rep.fermi_ou_generator();
    let pi = rep.pi0();
    let d = rep.dim();
    let units: Vec<CMat> = (0..d * d)
        .map(|u| {
            let mut e = linalg::zeros(d);
            e[(u % d, u / d)] = ONE;
            e
        })
        .collect();
    let imgs: Vec<CMat> = units.iter().map(|e| l0.apply(e)).collect();
    let mut worst = 0.0f64;
    for a in 0..d * d {
        for b in 0..d * d {
            let l = linalg::trace(&(&(&pi * &linalg::dagger(&units[a])) * &imgs[b]));
            let r = linalg::trace(&(&(&pi * &linalg::dagger(&imgs[a])) * &units[b]));
            worst = worst.max((l - r).norm());
        }
    }
    worst
}
