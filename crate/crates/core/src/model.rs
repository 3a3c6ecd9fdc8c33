//! Interaction families `{χ(α), k_α, ℓ_α}`, the split `𝓛 = 𝓛₀ + 𝓛₁`, and
//! finite-volume generators.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::lattice::{Region, Site};
use crate::linalg::{self, CMat};
use crate::operator::LocalOperator;
use crate::single_site::{build_l0, SingleSiteGenerator, SpectralData};
use crate::superop::{LindbladForm, SuperOperator};

/// One member `α` of the interaction family.
#[derive(Clone, Debug)]
pub struct InteractionTerm {
    pub id: usize,
    pub region: Region,
    pub hamiltonian: Option<LocalOperator>,
    pub jump: Option<LocalOperator>,
}

impl InteractionTerm {
    pub fn new(
        id: usize,
        region: Region,
        hamiltonian: Option<LocalOperator>,
        jump: Option<LocalOperator>,
    ) -> Result<Self> {
        let site_dim = hamiltonian.as_ref().or(jump.as_ref()).map(|o| o.site_dim);
        let fix = |op: Option<LocalOperator>| -> Result<Option<LocalOperator>> {
            match op {
                None => Ok(None),
                Some(o) => {
                    if Some(o.site_dim) != site_dim {
                        return Err(Error::Model("operators of a term differ in site dimension".into()));
                    }
                    Ok(Some(o.embed(&region)?))
                }
            }
        };
        let hamiltonian = fix(hamiltonian)?;
        let jump = fix(jump)?;
        if let Some(k) = &hamiltonian {
            if !k.is_self_adjoint(1e-12) {
                return Err(Error::Model(format!("hamiltonian of term {id} is not self-adjoint")));
            }
        }
        Ok(InteractionTerm { id, region, hamiltonian, jump })
    }

    pub fn is_zero(&self) -> bool {
        let z = |o: &Option<LocalOperator>| o.as_ref().is_none_or(|x| linalg::max_abs(&x.matrix) == 0.0);
        z(&self.hamiltonian) && z(&self.jump)
    }
}

/// Shifts the region of a term by `x`; the local matrices are unchanged.
pub fn translate_term(term: &InteractionTerm, x: &Site) -> InteractionTerm {
    let region = term.region.translate(x);
    let mv = |o: &Option<LocalOperator>| {
        o.as_ref().map(|op| LocalOperator {
            support: op.support.translate(x),
            site_dim: op.site_dim,
            matrix: op.matrix.clone(),
        })
    };
    InteractionTerm { id: term.id, region, hamiltonian: mv(&term.hamiltonian), jump: mv(&term.jump) }
}

/// `ι(site, j) = term`. For covariant models `site` is the origin and the
/// entry is understood up to translation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitEntry {
    pub site: Site,
    pub j: usize,
    pub term: usize,
}

/// A term placed on the lattice: a template id plus the shift applied to it.
#[derive(Clone, Debug)]
pub struct PlacedTerm {
    pub term: InteractionTerm,
    pub shift: Site,
    /// `α₀ = (x, j)` with `ι(α₀)` equal to this term.
    pub unperturbed: Option<(Site, usize)>,
}

#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub name: String,
    pub site_dim: usize,
    pub dim: usize,
    pub single_site: SingleSiteGenerator,
    pub spectral: SpectralData,
    pub terms: Vec<InteractionTerm>,
    pub split: Vec<SplitEntry>,
    /// Terms are templates repeated under all translations of ℤ^d.
    pub covariant: bool,
    pub range: Option<u64>,
}

impl ModelSpec {
    /// Validates the family and fills in the default ι when `split` is empty.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        dim: usize,
        single_site: SingleSiteGenerator,
        spectral: Option<SpectralData>,
        terms: Vec<InteractionTerm>,
        split: Vec<SplitEntry>,
        covariant: bool,
        range: Option<u64>,
    ) -> Result<Self> {
        let site_dim = single_site.site_dim;
        let spectral = match spectral {
            Some(s) => s,
            None => crate::single_site::spectral_decompose(&single_site, &build_l0(&single_site))?,
        };
        for (i, t) in terms.iter().enumerate() {
            if t.id != i {
                return Err(Error::Model("term ids must be 0..n in order".into()));
            }
            for op in t.hamiltonian.iter().chain(t.jump.iter()) {
                if op.site_dim != site_dim {
                    return Err(Error::Model(format!("term {i} has the wrong site dimension")));
                }
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
        let mut spec = ModelSpec {
            name: name.to_string(),
            site_dim,
            dim,
            single_site,
            spectral,
            terms,
            split,
            covariant,
            range,
        };
        if spec.split.is_empty() {
            spec.split = spec.default_split()?;
        }
        spec.validate_split()?;
        Ok(spec)
    }

    fn default_split(&self) -> Result<Vec<SplitEntry>> {
        let n0 = self.single_site.jumps.len();
        let mut by_site: std::collections::BTreeMap<Site, Vec<usize>> = Default::default();
        for t in &self.terms {
            if t.region.len() == 1 && t.jump.is_some() {
                by_site.entry(t.region.sites()[0].clone()).or_default().push(t.id);
            }
        }
        if self.covariant {
            let origin = Site::origin(self.dim);
            let ids = by_site.remove(&origin).unwrap_or_default();
            if !by_site.is_empty() {
                return Err(Error::Config("covariant single-site templates must sit at the origin".into()));
            }
            if ids.len() != n0 {
                return Err(Error::Config(format!(
                    "default split: {} single-site jump terms but {n0} unperturbed jumps",
                    ids.len()
                )));
            }
            return Ok(ids
                .into_iter()
                .enumerate()
                .map(|(j, term)| SplitEntry { site: origin.clone(), j, term })
                .collect());
        }
        let mut out = Vec::new();
        for (site, ids) in by_site {
            if ids.len() != n0 {
                return Err(Error::Config(format!(
                    "default split at {site}: {} single-site jump terms but {n0} unperturbed jumps",
                    ids.len()
                )));
            }
            for (j, term) in ids.into_iter().enumerate() {
                out.push(SplitEntry { site: site.clone(), j, term });
            }
        }
        Ok(out)
    }

    fn validate_split(&self) -> Result<()> {
        let n0 = self.single_site.jumps.len();
        let mut seen_terms = std::collections::BTreeSet::new();
        let mut seen_idx = std::collections::BTreeSet::new();
        for e in &self.split {
            if e.j >= n0 {
                return Err(Error::Model(format!("split index {} out of range", e.j)));
            }
            let t = self
                .terms
                .get(e.term)
                .ok_or_else(|| Error::Model(format!("split refers to missing term {}", e.term)))?;
            if !t.region.contains(&e.site) {
                return Err(Error::Model(format!("ι-term {} does not contain its site {}", e.term, e.site)));
            }
            if t.jump.is_none() {
                return Err(Error::Model(format!("ι-term {} has no jump", e.term)));
            }
            if !seen_terms.insert(e.term) || !seen_idx.insert((e.site.clone(), e.j)) {
                return Err(Error::Model("split map ι is not injective".into()));
            }
            if self.covariant && e.site != Site::origin(self.dim) {
                return Err(Error::Model("covariant split entries must be anchored at the origin".into()));
            }
        }
        if self.covariant && n0 > 0 && seen_idx.len() != n0 {
            return Err(Error::Model("split must cover every unperturbed jump".into()));
        }
        Ok(())
    }

    fn split_of(&self, term: usize) -> Option<&SplitEntry> {
        self.split.iter().find(|e| e.term == term)
    }

    fn place(&self, t: &InteractionTerm, shift: &Site) -> PlacedTerm {
        let unperturbed = self.split_of(t.id).map(|e| (e.site.shifted(shift), e.j));
        PlacedTerm { term: translate_term(t, shift), shift: shift.clone(), unperturbed }
    }

    /// Terms with `χ(α) ⊆ Λ` and the number of terms meeting `Λ` that were left out.
    pub fn terms_in(&self, volume: &Region) -> (Vec<PlacedTerm>, usize) {
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
                    let p = self.place(t, &z);
                    if p.term.region.is_subset(volume) {
                        inc.push(p);
                    } else {
                        exc += 1;
                    }
                }
            } else if t.region.is_subset(volume) {
                inc.push(self.place(t, &Site::origin(self.dim)));
            } else if !t.region.is_disjoint(volume) {
                exc += 1;
            }
        }
        (inc, exc)
    }

    /// All terms whose region contains `x` (all translates for covariant models).
    pub fn terms_containing(&self, x: &Site) -> Vec<PlacedTerm> {
        let mut out = Vec::new();
        for t in &self.terms {
            if self.covariant {
                for r in t.region.sites() {
                    let z = Site(x.0.iter().zip(&r.0).map(|(a, b)| a - b).collect());
                    out.push(self.place(t, &z));
                }
            } else if t.region.contains(x) {
                out.push(self.place(t, &Site::origin(self.dim)));
            }
        }
        out
    }

    /// Sites over which per-site suprema are taken: the origin for covariant
    /// models, otherwise every site touched by a term.
    pub fn sup_sites(&self) -> Vec<Site> {
        if self.covariant {
            return vec![Site::origin(self.dim)];
        }
        let mut r = Region::empty();
        for t in &self.terms {
            r = r.union(&t.region);
        }
        r.sites().to_vec()
    }

    pub fn unperturbed_jump(&self, x: &Site, j: usize) -> LocalOperator {
        LocalOperator::at(x.clone(), self.site_dim, self.single_site.jumps[j].clone())
            .expect("single-site jump has the site dimension")
    }

    /// `ℓ¹ = ℓ_{ι(α₀)} − ℓ⁰_{α₀}` on the region of the term.
    pub fn perturbation_jump(&self, p: &PlacedTerm) -> Option<LocalOperator> {
        let (x, j) = p.unperturbed.as_ref()?;
        let l = p.term.jump.as_ref()?;
        let l0 = self.unperturbed_jump(x, *j).embed(&p.term.region).ok()?;
        Some(LocalOperator {
            support: p.term.region.clone(),
            site_dim: self.site_dim,
            matrix: &l.matrix - &l0.matrix,
        })
    }
}

/// Lindblad generator on a finite volume with cached superoperators.
#[derive(Debug)]
pub struct FiniteVolumeGenerator {
    pub volume: Region,
    pub site_dim: usize,
    pub form: LindbladForm,
    pub included_terms: usize,
    pub excluded_terms: usize,
    heis: OnceLock<SuperOperator>,
    schr: OnceLock<SuperOperator>,
}

impl Clone for FiniteVolumeGenerator {
    fn clone(&self) -> Self {
        FiniteVolumeGenerator::from_form(self.volume.clone(), self.site_dim, self.form.clone())
    }
}

impl FiniteVolumeGenerator {
    pub fn from_form(volume: Region, site_dim: usize, form: LindbladForm) -> Self {
        FiniteVolumeGenerator {
            volume,
            site_dim,
            form,
            included_terms: 0,
            excluded_terms: 0,
            heis: OnceLock::new(),
            schr: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.form.dim
    }

    pub fn heisenberg(&self) -> &SuperOperator {
        self.heis.get_or_init(|| self.form.heisenberg())
    }

    pub fn schrodinger(&self) -> &SuperOperator {
        self.schr.get_or_init(|| self.form.schrodinger())
    }

    pub fn apply(&self, f: &CMat) -> CMat {
        self.form.apply_heisenberg(f)
    }

    pub fn apply_schrodinger(&self, rho: &CMat) -> CMat {
        self.form.apply_schrodinger(rho)
    }

    pub fn plus(&self, other: &FiniteVolumeGenerator) -> FiniteVolumeGenerator {
        let mut form = self.form.clone();
        form.extend(&other.form);
        let mut g = FiniteVolumeGenerator::from_form(self.volume.clone(), self.site_dim, form);
        g.included_terms = self.included_terms + other.included_terms;
        g.excluded_terms = self.excluded_terms.max(other.excluded_terms);
        g
    }

    /// Term count and dimensions.
    pub fn manifest(&self) -> serde_json::Value {
        serde_json::json!({
            "volume": self.volume,
            "sites": self.volume.len(),
            "hilbert_dim": self.dim(),
            "superoperator_dim": self.dim() * self.dim(),
            "included_terms": self.included_terms,
            "excluded_terms": self.excluded_terms,
        })
    }
}

/// Non-covariant copy of a covariant model on the torus `∏ ℤ/L_i`: every
/// translate of every template, with sites reduced mod `L_i`.
pub fn periodic_wrap(spec: &ModelSpec, extents: &[usize]) -> Result<ModelSpec> {
    if !spec.covariant {
        return Err(Error::Config("periodic boundary needs a translation covariant model".into()));
    }
    if extents.len() != spec.dim {
        return Err(Error::Config(format!("box has {} axes, model has dimension {}", extents.len(), spec.dim)));
    }
    let q = spec.site_dim;
    let torus = Region::boxed(extents);
    let wrap = |s: &Site| Site(s.0.iter().zip(extents).map(|(c, &l)| c.rem_euclid(l as i64)).collect());
    let mut terms = Vec::new();
    let mut split = Vec::new();
    for x in torus.sites() {
        for t in &spec.terms {
            let listed: Vec<Site> = t.region.sites().iter().map(|s| wrap(&s.shifted(x))).collect();
            let region = Region::new(listed.clone())
                .map_err(|_| Error::Config(format!("torus {extents:?} is too small for term {}", t.id)))?;
            let place = |o: &Option<LocalOperator>| -> Result<Option<LocalOperator>> {
                match o {
                    None => Ok(None),
                    Some(o) => {
                        let (r, m) = crate::operator::sort_factors(&o.matrix, q, &listed)?;
                        Ok(Some(LocalOperator::new(r, q, m)?))
                    }
                }
            };
            let id = terms.len();
            if let Some(e) = spec.split.iter().find(|e| e.term == t.id) {
                split.push(SplitEntry { site: wrap(&e.site.shifted(x)), j: e.j, term: id });
            }
            terms.push(InteractionTerm::new(id, region, place(&t.hamiltonian)?, place(&t.jump)?)?);
        }
    }
    ModelSpec::new(&spec.name, spec.dim, spec.single_site.clone(), Some(spec.spectral.clone()), terms, split, false, None)
}

/// `𝓛_Λ = Σ_{χ(α) ⊆ Λ} (i[k_α,·] + ℓ_α*[·,ℓ_α] + [ℓ_α*,·]ℓ_α)`.
pub fn assemble(spec: &ModelSpec, volume: &Region) -> Result<FiniteVolumeGenerator> {
    let (terms, excluded) = spec.terms_in(volume);
    let d = crate::operator::pow(spec.site_dim, volume.len());
    let mut form = LindbladForm::new(d);
    for p in &terms {
        if let Some(k) = &p.term.hamiltonian {
            form.add_hamiltonian(k.matrix_on(volume)?);
        }
        if let Some(l) = &p.term.jump {
            form.add_jump(&l.matrix_on(volume)?);
        }
    }
    let mut g = FiniteVolumeGenerator::from_form(volume.clone(), spec.site_dim, form);
    g.included_terms = terms.len();
    g.excluded_terms = excluded;
    Ok(g)
}

/// `𝓛₀ = Σ_{x∈Λ} L⁰_x` on the volume.
pub fn unperturbed_generator(spec: &ModelSpec, volume: &Region) -> Result<FiniteVolumeGenerator> {
    let d = crate::operator::pow(spec.site_dim, volume.len());
    let mut form = LindbladForm::new(d);
    for x in volume.sites() {
        for j in 0..spec.single_site.jumps.len() {
            form.add_jump(&spec.unperturbed_jump(x, j).matrix_on(volume)?);
        }
    }
    let mut g = FiniteVolumeGenerator::from_form(volume.clone(), spec.site_dim, form);
    g.included_terms = volume.len() * spec.single_site.jumps.len();
    Ok(g)
}

/// The two parts of the split plus the reassembly residual
/// `‖(𝓛₀ + 𝓛₁) − 𝓛_Λ‖` (max entry of the Heisenberg matrices, or of the
/// action on probe observables for large volumes).
#[derive(Debug)]
pub struct Split {
    pub l0: FiniteVolumeGenerator,
    pub l1: FiniteVolumeGenerator,
    pub residual: f64,
}

impl Split {
    pub fn total(&self) -> FiniteVolumeGenerator {
        self.l0.plus(&self.l1)
    }
}

pub fn split_perturbation(spec: &ModelSpec, volume: &Region) -> Result<Split> {
    let n0 = spec.single_site.jumps.len();
    if !spec.covariant {
        for x in volume.sites() {
            for j in 0..n0 {
                if !spec.split.iter().any(|e| &e.site == x && e.j == j) {
                    return Err(Error::Model(format!("split undefined for ({x}, {j})")));
                }
            }
        }
    }
    let l0 = unperturbed_generator(spec, volume)?;
    let (terms, excluded) = spec.terms_in(volume);
    let d = l0.dim();
    let mut form = LindbladForm::new(d);
    for p in &terms {
        if let Some(k) = &p.term.hamiltonian {
            form.add_hamiltonian(k.matrix_on(volume)?);
        }
        let Some(l) = &p.term.jump else { continue };
        match &p.unperturbed {
            None => form.add_jump(&l.matrix_on(volume)?),
            Some((x, j)) => {
                let l0m = spec.unperturbed_jump(x, *j).matrix_on(volume)?;
                let l1m = &l.matrix_on(volume)? - &l0m;
                if linalg::max_abs(&l1m) == 0.0 {
                    continue;
                }
                form.add_pair(linalg::dagger(&l0m), l1m.clone());
                form.add_pair(linalg::dagger(&l1m), l0m);
                form.add_pair(linalg::dagger(&l1m), l1m);
            }
        }
    }
    let mut l1 = FiniteVolumeGenerator::from_form(volume.clone(), spec.site_dim, form);
    l1.included_terms = terms.len();
    l1.excluded_terms = excluded;
    let full = assemble(spec, volume)?;
    let sum = l0.plus(&l1);
    let residual = if d <= 32 {
        linalg::max_abs(&(&sum.heisenberg().matrix - &full.heisenberg().matrix))
    } else {
        let mut rng = crate::random::rng(0x5eed);
        (0..6)
            .map(|_| {
                let f = crate::random::matrix(&mut rng, d);
                linalg::max_abs(&(sum.apply(&f) - full.apply(&f)))
            })
            .fold(0.0, f64::max)
    };
    Ok(Split { l0, l1, residual })
}
