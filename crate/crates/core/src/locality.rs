//! The `E_{x,h}` calculus, δ-profiles, the seminorm ⦀·⦀ and the certificate
//! constants C₀, θ, M, ω, M_ξ, Ω_ξ, ζ.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Region, Site};
use crate::linalg::{self, CMat};
use crate::model::{ModelSpec, PlacedTerm};
use crate::operator::{self, embed_matrix, weighted_partial_trace_matrix, LocalOperator};
use crate::single_site::SpectralData;
use crate::superop::LindbladForm;

/// A per-site gradient structure on a finite volume: the qudit `E_{x,h}`
/// calculus or the fermionic `(∂, ∂̄)` calculus.
pub trait Gradient: Sync {
    fn volume(&self) -> &Region;
    /// `δ_x(f)` for every site of the volume, in volume order.
    fn profile(&self, f: &CMat) -> Vec<f64>;
    fn seminorm(&self, f: &CMat) -> f64 {
        self.profile(f).iter().sum()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaProfile {
    pub values: Vec<(Site, f64)>,
    pub total: f64,
}

impl DeltaProfile {
    pub fn from_values(volume: &Region, v: Vec<f64>) -> Self {
        let total = v.iter().sum();
        DeltaProfile { values: volume.sites().iter().cloned().zip(v).collect(), total }
    }

    pub fn at(&self, x: &Site) -> f64 {
        self.values.iter().find(|(s, _)| s == x).map_or(0.0, |(_, v)| *v)
    }
}

/// Weights `ρ e_h*` so that `E_{x,h} f = tr_x((ρ e_h* ⊗ 1) f) ⊗ 1_x`.
fn weights(spectral: &SpectralData) -> Vec<CMat> {
    spectral.basis.iter().map(|e| &spectral.rho * linalg::dagger(e)).collect()
}

/// `E_{x,h}` calculus on a fixed volume.
#[derive(Clone, Debug)]
pub struct QuditCalculus {
    pub volume: Region,
    pub spectral: SpectralData,
    weights: Vec<CMat>,
}

impl QuditCalculus {
    pub fn new(volume: Region, spectral: SpectralData) -> Self {
        let weights = weights(&spectral);
        QuditCalculus { volume, spectral, weights }
    }

    pub fn q(&self) -> usize {
        self.spectral.site_dim()
    }

    /// `E_{x,h} f` as an operator on the volume minus `x`.
    pub fn exh_reduced(&self, f: &CMat, x: &Site, h: usize) -> Result<CMat> {
        let pos = self
            .volume
            .position(x)
            .ok_or_else(|| Error::SiteNotInSupport(x.to_string()))?;
        Ok(weighted_partial_trace_matrix(f, self.volume.len(), self.q(), pos, &self.weights[h]))
    }

    /// `E_{x,h} f` embedded back into the volume.
    pub fn exh(&self, f: &CMat, x: &Site, h: usize) -> Result<CMat> {
        let r = self.exh_reduced(f, x, h)?;
        embed_matrix(&r, &self.volume.without(x), &self.volume, self.q())
    }

    /// `F_x f = Σ_{h≥1} (E_{x,h} f) e_{x,h}`.
    pub fn fx(&self, f: &CMat, x: &Site) -> Result<CMat> {
        let mut out = linalg::zeros(f.nrows());
        for h in 1..self.spectral.basis.len() {
            let e = embed_matrix(&self.spectral.basis[h], &Region::single(x.clone()), &self.volume, self.q())?;
            out += &self.exh(f, x, h)? * &e;
        }
        Ok(out)
    }

    pub fn delta_at(&self, f: &CMat, x: &Site) -> Result<f64> {
        let mut s = 0.0;
        for h in 1..self.spectral.basis.len() {
            s += linalg::op_norm(&self.exh_reduced(f, x, h)?);
        }
        Ok(s)
    }
}

impl Gradient for QuditCalculus {
    fn volume(&self) -> &Region {
        &self.volume
    }

    fn profile(&self, f: &CMat) -> Vec<f64> {
        self.volume
            .sites()
            .iter()
            .map(|x| self.delta_at(f, x).expect("site of the volume"))
            .collect()
    }
}

/// `E_{x,h} f` for a local operator; `x` must lie in its support.
pub fn exh_apply(spectral: &SpectralData, f: &LocalOperator, x: &Site, h: usize) -> Result<LocalOperator> {
    let calc = QuditCalculus::new(f.support.clone(), spectral.clone());
    let m = calc.exh(&f.matrix, x, h)?;
    LocalOperator::new(f.support.clone(), f.site_dim, m)
}

/// `δ_x(f)` computed on the support of `f`; zero for `x` outside it.
pub fn delta_at(spectral: &SpectralData, f: &LocalOperator, x: &Site) -> f64 {
    let Some(pos) = f.support.position(x) else { return 0.0 };
    let w = weights(spectral);
    (1..w.len())
        .map(|h| linalg::op_norm(&weighted_partial_trace_matrix(&f.matrix, f.support.len(), f.site_dim, pos, &w[h])))
        .sum()
}

pub fn delta_profile(spectral: &SpectralData, f: &LocalOperator) -> DeltaProfile {
    let v = f.support.sites().iter().map(|x| delta_at(spectral, f, x)).collect();
    DeltaProfile::from_values(&f.support, v)
}

/// Per-term data used by θ: `δ_x(k)` and the bracket of the jump part at
/// every site `x` of the region.
struct TermDeltas {
    region: Region,
    dk: Vec<f64>,
    bracket: Vec<f64>,
    jump_norm: f64,
    ham_norm: f64,
}

fn term_deltas(spec: &ModelSpec, p: &PlacedTerm) -> TermDeltas {
    let s = &spec.spectral;
    let region = p.term.region.clone();
    let sites = region.sites();
    let dk = match &p.term.hamiltonian {
        Some(k) => sites.iter().map(|x| delta_at(s, k, x)).collect(),
        None => vec![0.0; sites.len()],
    };
    let mut bracket = vec![0.0; sites.len()];
    if let Some(l) = &p.term.jump {
        let pieces: Vec<(LocalOperator, LocalOperator)> = match &p.unperturbed {
            Some((x0, j)) => {
                let l0 = spec.unperturbed_jump(x0, *j).embed(&region).expect("anchor inside region");
                let l1 = spec.perturbation_jump(p).expect("ι-term has a jump");
                vec![(l0.adjoint(), l1.clone()), (l1.adjoint(), l0), (l1.adjoint(), l1)]
            }
            None => vec![(l.adjoint(), l.clone())],
        };
        for (u, v) in &pieces {
            let (nu, nv) = (u.norm(), v.norm());
            for (i, x) in sites.iter().enumerate() {
                bracket[i] += delta_at(s, u, x) * nv + nu * delta_at(s, v, x);
            }
        }
    }
    TermDeltas {
        region,
        dk,
        bracket,
        jump_norm: p.term.jump.as_ref().map_or(0.0, |l| l.norm()),
        ham_norm: p.term.hamiltonian.as_ref().map_or(0.0, |k| k.norm()),
    }
}

/// `θ_{x,y}(α)` for `x, y ∈ χ(α)` (zero otherwise):
/// `2η(1+η²δ_{xy})δ_x(k) + 4η(η²+δ_{xy})·bracket_x`.
fn theta_alpha(eta: f64, t: &TermDeltas, xi: usize, yi: usize) -> f64 {
    let same = if xi == yi { 1.0 } else { 0.0 };
    2.0 * eta * (1.0 + eta * eta * same) * t.dk[xi] + 4.0 * eta * (eta * eta + same) * t.bracket[xi]
}

/// `θ_{x,y}(α)` of one placed term, as a map over pairs of its sites.
pub fn theta_of_term(spec: &ModelSpec, p: &PlacedTerm) -> BTreeMap<(Site, Site), f64> {
    let t = term_deltas(spec, p);
    let eta = spec.spectral.eta;
    let mut out = BTreeMap::new();
    for (xi, x) in t.region.sites().iter().enumerate() {
        for (yi, y) in t.region.sites().iter().enumerate() {
            out.insert((x.clone(), y.clone()), theta_alpha(eta, &t, xi, yi));
        }
    }
    out
}

/// `θ_{x,y} = N Σ_{α: χ(α)∋y} θ_{x,y}(α)` over the given terms.
fn theta_entries(spec: &ModelSpec, terms: &[PlacedTerm]) -> BTreeMap<(Site, Site), f64> {
    let n = spec.spectral.n() as f64;
    let eta = spec.spectral.eta;
    let per_term: Vec<TermDeltas> = {
        use rayon::prelude::*;
        terms.par_iter().map(|p| term_deltas(spec, p)).collect()
    };
    let mut out: BTreeMap<(Site, Site), f64> = BTreeMap::new();
    for t in &per_term {
        for (xi, x) in t.region.sites().iter().enumerate() {
            for (yi, y) in t.region.sites().iter().enumerate() {
                let v = n * theta_alpha(eta, t, xi, yi);
                if v != 0.0 {
                    *out.entry((x.clone(), y.clone())).or_insert(0.0) += v;
                }
            }
        }
    }
    out
}

/// `ω_{x,y} = 8η² Σ_{α: χ(α)⊇{x,y}} ‖ℓ_α‖²`.
fn omega_entries(spec: &ModelSpec, terms: &[PlacedTerm]) -> BTreeMap<(Site, Site), f64> {
    let eta = spec.spectral.eta;
    let mut out: BTreeMap<(Site, Site), f64> = BTreeMap::new();
    for p in terms {
        let Some(l) = &p.term.jump else { continue };
        let v = 8.0 * eta * eta * l.norm().powi(2);
        if v == 0.0 {
            continue;
        }
        for x in p.term.region.sites() {
            for y in p.term.region.sites() {
                *out.entry((x.clone(), y.clone())).or_insert(0.0) += v;
            }
        }
    }
    out
}

/// Finite matrix indexed by the sites of a volume (rows `x`, columns `y`).
#[derive(Clone, Debug, Serialize)]
pub struct SiteMatrix {
    pub sites: Vec<Site>,
    pub entries: Vec<Vec<f64>>,
}

impl SiteMatrix {
    fn from_map(volume: &Region, m: &BTreeMap<(Site, Site), f64>) -> Self {
        let n = volume.len();
        let mut entries = vec![vec![0.0; n]; n];
        for ((x, y), v) in m {
            if let (Some(i), Some(j)) = (volume.position(x), volume.position(y)) {
                entries[i][j] += v;
            }
        }
        SiteMatrix { sites: volume.sites().to_vec(), entries }
    }

    pub fn zeros(volume: &Region) -> Self {
        let n = volume.len();
        SiteMatrix { sites: volume.sites().to_vec(), entries: vec![vec![0.0; n]; n] }
    }

    pub fn n(&self) -> usize {
        self.sites.len()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.n()).map(|j| (0..self.n()).map(|i| self.entries[i][j]).sum()).collect()
    }

    pub fn max_column_sum(&self) -> f64 {
        self.column_sums().into_iter().fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n()).map(|i| (0..self.n()).map(|j| self.entries[i][j] * v[j]).sum()).collect()
    }

    pub fn as_cmat(&self) -> CMat {
        CMat::from_fn(self.n(), self.n(), |i, j| linalg::re(self.entries[i][j]))
    }

    /// `e^{tΘ} v` via the dense matrix exponential.
    pub fn exp_apply(&self, t: f64, v: &[f64]) -> Vec<f64> {
        let e = linalg::expm(&linalg::scale_re(&self.as_cmat(), t));
        (0..self.n()).map(|i| (0..self.n()).map(|j| e[(i, j)].re * v[j]).sum()).collect()
    }

    /// `(c·1 − Θ)⁻¹ v`.
    pub fn shifted_solve(&self, c: f64, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        let a = CMat::from_fn(n, n, |i, j| linalg::re(if i == j { c } else { 0.0 } - self.entries[i][j]));
        let b = CMat::from_fn(n, 1, |i, _| linalg::re(v[i]));
        let x = linalg::solve(&a, &b)?;
        Ok((0..n).map(|i| x[(i, 0)].re).collect())
    }
}

/// Finite-volume θ-matrix built from the terms with `χ(α) ⊆ Λ`.
pub fn compute_theta(spec: &ModelSpec, volume: &Region) -> SiteMatrix {
    let (terms, _) = spec.terms_in(volume);
    SiteMatrix::from_map(volume, &theta_entries(spec, &terms))
}

/// Finite-volume ω-matrix built from the terms with `χ(α) ⊆ Λ`.
pub fn compute_omega(spec: &ModelSpec, volume: &Region) -> SiteMatrix {
    let (terms, _) = spec.terms_in(volume);
    SiteMatrix::from_map(volume, &omega_entries(spec, &terms))
}

/// `C₀ = 2η sup_x Σ_{α∋x}(‖k_α‖ + 2‖ℓ_α‖²)`.
pub fn compute_c0(spec: &ModelSpec) -> f64 {
    let eta = spec.spectral.eta;
    spec.sup_sites()
        .iter()
        .map(|x| {
            spec.terms_containing(x)
                .iter()
                .map(|p| {
                    let k = p.term.hamiltonian.as_ref().map_or(0.0, |k| k.norm());
                    let l = p.term.jump.as_ref().map_or(0.0, |l| l.norm());
                    k + 2.0 * l * l
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
        * 2.0
        * eta
}

/// Column data of θ and ω relevant for the lattice suprema: for every `y`
/// in `sup_sites`, the entries `θ_{x,y}` and `ω_{x,y}` over all `x`.
struct Columns {
    theta: Vec<(Site, Vec<(Site, f64)>)>,
    omega: Vec<(Site, Vec<(Site, f64)>)>,
}

fn lattice_columns(spec: &ModelSpec) -> Columns {
    let mut theta = Vec::new();
    let mut omega = Vec::new();
    if spec.covariant {
        let o = Site::origin(spec.dim);
        let terms = spec.terms_containing(&o);
        let th = theta_entries(spec, &terms);
        let om = omega_entries(spec, &terms);
        theta.push((o.clone(), th.into_iter().filter(|((_, y), _)| *y == o).map(|((x, _), v)| (x, v)).collect()));
        omega.push((o.clone(), om.into_iter().filter(|((_, y), _)| *y == o).map(|((x, _), v)| (x, v)).collect()));
    } else {
        let terms: Vec<PlacedTerm> = {
            let mut all = Region::empty();
            for t in &spec.terms {
                all = all.union(&t.region);
            }
            spec.terms_in(&all).0
        };
        let th = theta_entries(spec, &terms);
        let om = omega_entries(spec, &terms);
        for y in spec.sup_sites() {
            theta.push((y.clone(), th.iter().filter(|((_, b), _)| *b == y).map(|((x, _), v)| (x.clone(), *v)).collect()));
            omega.push((y.clone(), om.iter().filter(|((_, b), _)| *b == y).map(|((x, _), v)| (x.clone(), *v)).collect()));
        }
    }
    Columns { theta, omega }
}

fn weighted_sup(cols: &[(Site, Vec<(Site, f64)>)], xi: f64, sum: bool) -> f64 {
    cols.iter()
        .map(|(y, col)| {
            let it = col.iter().map(|(x, v)| v * (xi * x.dist(y) as f64).exp());
            if sum {
                it.sum::<f64>()
            } else {
                it.fold(0.0, f64::max)
            }
        })
        .fold(0.0, f64::max)
}

/// `M = sup_y Σ_x θ_{x,y}` and whether it is exact (covariant models) or a
/// finite estimate.
pub fn compute_m(spec: &ModelSpec) -> (f64, bool) {
    let cols = lattice_columns(spec);
    (weighted_sup(&cols.theta, 0.0, true), spec.covariant)
}

/// The 32-point logarithmic ξ-grid on [10⁻³, 5].
pub fn xi_grid() -> Vec<f64> {
    let (a, b) = (1e-3f64.ln(), 5f64.ln());
    (0..32).map(|i| (a + (b - a) * i as f64 / 31.0).exp()).collect()
}

pub fn zeta(lambda1: f64, m: f64, range: f64, xi: f64) -> f64 {
    let g = lambda1 - m;
    g * xi / (g + 2.0 * m * (range * xi).exp())
}

#[derive(Clone, Debug, Serialize)]
pub struct XiPoint {
    pub xi: f64,
    pub zeta: f64,
    pub m_xi: f64,
    pub omega_xi: f64,
    pub c: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub model: String,
    pub calculus: String,
    pub n: Option<usize>,
    pub eta: Option<f64>,
    pub lambda1: f64,
    pub c0: f64,
    pub m: f64,
    pub m_exact: bool,
    pub margin: f64,
    pub pass: bool,
    pub verdict: String,
    pub range: Option<u64>,
    pub convergence_prefactor: Option<f64>,
    pub xi: Option<f64>,
    pub m_xi: Option<f64>,
    pub omega_xi: Option<f64>,
    pub zeta: Option<f64>,
    pub c: Option<f64>,
    pub xi_grid: Vec<XiPoint>,
}

impl CertificateReport {
    /// Fills verdict, ζ and the ξ-grid from the basic constants.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn build(
        model: &str,
        calculus: &str,
        n: Option<usize>,
        eta: Option<f64>,
        lambda1: f64,
        c0: f64,
        m: f64,
        m_exact: bool,
        range: Option<u64>,
        m_xi: &dyn Fn(f64) -> f64,
        omega_xi: Option<&dyn Fn(f64) -> f64>,
    ) -> Self {
        let m = m + 0.0;
        let margin = lambda1 - m;
        let pass = margin > 0.0;
        let mut grid = Vec::new();
        let (mut best, mut best_i) = (f64::NEG_INFINITY, None);
        if pass {
            if let Some(r) = range {
                for (i, xi) in xi_grid().into_iter().enumerate() {
                    let z = zeta(lambda1, m, r as f64, xi);
                    let om = omega_xi.map(|f| f(xi));
                    let c = match (n, eta, om) {
                        (Some(n), Some(eta), Some(om)) => {
                            let second = if m > 0.0 {
                                om / (2.0 * m * (r as f64 * xi).exp())
                            } else {
                                om / (2.0 * lambda1)
                            };
                            Some(2.0 * n as f64 * eta * eta * (c0 / margin).max(second))
                        }
                        _ => None,
                    };
                    if z > best {
                        best = z;
                        best_i = Some(i);
                    }
                    grid.push(XiPoint { xi, zeta: z, m_xi: m_xi(xi), omega_xi: om.unwrap_or(f64::NAN), c });
                }
            }
        }
        let pick = best_i.map(|i| grid[i].clone());
        CertificateReport {
            model: model.to_string(),
            calculus: calculus.to_string(),
            n,
            eta,
            lambda1,
            c0,
            m,
            m_exact,
            margin,
            pass,
            verdict: if pass { "pass" } else { "fail" }.to_string(),
            range,
            convergence_prefactor: pass.then(|| c0 / margin),
            xi: pick.as_ref().map(|p| p.xi),
            m_xi: pick.as_ref().map(|p| p.m_xi),
            omega_xi: pick.as_ref().and_then(|p| omega_xi.map(|_| p.omega_xi)),
            zeta: pick.as_ref().map(|p| p.zeta),
            c: pick.as_ref().and_then(|p| p.c),
            xi_grid: grid,
        }
    }
}

/// Range `R`: declared, or the largest diameter of a nonzero term.
pub fn effective_range(spec: &ModelSpec) -> u64 {
    spec.range.unwrap_or_else(|| {
        spec.terms.iter().filter(|t| !t.is_zero()).map(|t| t.region.diameter()).max().unwrap_or(0)
    })
}

/// Constants needed by the lattice-dependent bounds, evaluated at one ξ.
#[derive(Clone, Copy, Debug)]
pub struct XiConstants {
    pub m_xi: f64,
    pub omega_xi: f64,
}

pub fn xi_constants(spec: &ModelSpec, xi: f64) -> XiConstants {
    let cols = lattice_columns(spec);
    XiConstants { m_xi: weighted_sup(&cols.theta, xi, true), omega_xi: weighted_sup(&cols.omega, xi, false) }
}

pub fn certify(spec: &ModelSpec) -> CertificateReport {
    let cols = lattice_columns(spec);
    let c0 = compute_c0(spec);
    let m = weighted_sup(&cols.theta, 0.0, true);
    let s = &spec.spectral;
    let mxi = |xi: f64| weighted_sup(&cols.theta, xi, true);
    let oxi = |xi: f64| weighted_sup(&cols.omega, xi, false);
    CertificateReport::build(
        &spec.name,
        "qudit",
        Some(s.n()),
        Some(s.eta),
        s.gap,
        c0,
        m,
        spec.covariant,
        Some(effective_range(spec)),
        &mxi,
        Some(&oxi),
    )
}

/// `L¹_α` of one placed term as a Lindblad-form generator on `volume`.
pub fn perturbation_form(spec: &ModelSpec, p: &PlacedTerm, volume: &Region) -> Result<LindbladForm> {
    let d = operator::pow(spec.site_dim, volume.len());
    let mut form = LindbladForm::new(d);
    if let Some(k) = &p.term.hamiltonian {
        form.add_hamiltonian(k.matrix_on(volume)?);
    }
    if let Some(l) = &p.term.jump {
        match &p.unperturbed {
            None => form.add_jump(&l.matrix_on(volume)?),
            Some((x, j)) => {
                let l0 = spec.unperturbed_jump(x, *j).matrix_on(volume)?;
                let l1 = &l.matrix_on(volume)? - &l0;
                form.add_pair(linalg::dagger(&l0), l1.clone());
                form.add_pair(linalg::dagger(&l1), l0);
                form.add_pair(linalg::dagger(&l1), l1);
            }
        }
    }
    Ok(form)
}

/// Right-hand side `Σ_{y∈χ(α)} θ_{x,y}(α) δ_y(f)` of the commutator bound.
pub fn commutator_bound_rhs(spec: &ModelSpec, p: &PlacedTerm, x: &Site, profile: &DeltaProfile) -> f64 {
    let t = term_deltas(spec, p);
    let Some(xi) = t.region.position(x) else { return 0.0 };
    t.region
        .sites()
        .iter()
        .enumerate()
        .map(|(yi, y)| theta_alpha(spec.spectral.eta, &t, xi, yi) * profile.at(y))
        .sum()
}

/// `‖k_α‖` and `‖ℓ_α‖` of a placed term.
pub fn term_norms(spec: &ModelSpec, p: &PlacedTerm) -> (f64, f64) {
    let t = term_deltas(spec, p);
    (t.ham_norm, t.jump_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::single_site::{build_l0, SingleSiteGenerator};

    fn xyz_spectral() -> SpectralData {
        let half = linalg::scale_re(&linalg::eye(2), 0.5);
        let g = SingleSiteGenerator::new(half, vec![linalg::scale_re(&pauli::x(), 0.5), linalg::scale_re(&pauli::y(), 0.5)])
            .unwrap();
        let r2 = 2f64.sqrt();
        let basis = vec![
            linalg::eye(2),
            linalg::scale_re(&pauli::plus(), r2),
            linalg::scale_re(&pauli::minus(), r2),
            pauli::z(),
        ];
        SpectralData::from_basis(&g, &build_l0(&g), basis).unwrap()
    }

    #[test]
    fn exh_on_pauli() {
        let s = xyz_spectral();
        let x = Site::new(&[0]);
        let z = LocalOperator::at(x.clone(), 2, pauli::z()).unwrap();
        // basis sorted by eigenvalue: σ₃ is last
        let e3 = exh_apply(&s, &z, &x, 3).unwrap();
        assert!(linalg::max_abs(&(&e3.matrix - &linalg::eye(2))) < 1e-14);
        for h in 1..3 {
            assert!(linalg::max_abs(&exh_apply(&s, &z, &x, h).unwrap().matrix) < 1e-14);
        }
        assert!((delta_at(&s, &z, &x) - 1.0).abs() < 1e-14);
        let sx = LocalOperator::at(x.clone(), 2, pauli::x()).unwrap();
        assert!((delta_at(&s, &sx, &x) - 2f64.sqrt()).abs() < 1e-14);
        let one = LocalOperator::identity(Region::single(x.clone()), 2);
        assert!(delta_at(&s, &one, &x).abs() < 1e-15);
        assert!(delta_at(&s, &z, &Site::new(&[1])).abs() < 1e-15);
    }

    #[test]
    fn xi_grid_endpoints() {
        let g = xi_grid();
        assert_eq!(g.len(), 32);
        assert!((g[0] - 1e-3).abs() < 1e-15);
        assert!((g[31] - 5.0).abs() < 1e-12);
    }
}
