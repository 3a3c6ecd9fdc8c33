//! Model configuration documents and their conversion to model specs.
//!
//! Matrices are nested arrays of `[re, im]` pairs; the factors of an
//! interaction matrix follow the order of its `offsets`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::{fermion_certificate, fermion_generator, FermionModelSpec, FermionTerm};
use crate::lattice::{Region, Site};
use crate::linalg::CMat;
use crate::locality::{certify, CertificateReport};
use crate::model::{assemble, periodic_wrap, FiniteVolumeGenerator, InteractionTerm, ModelSpec, SplitEntry};
use crate::operator::{matrix_from_pairs, matrix_to_pairs, sort_factors, LocalOperator};
use crate::single_site::{build_l0, SingleSiteGenerator, SpectralData};

pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

pub fn to_doc(m: &CMat) -> MatrixDoc {
    matrix_to_pairs(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Qudit,
    Fermion,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleSiteDoc {
    pub rho: MatrixDoc,
    pub jumps: Vec<MatrixDoc>,
    /// Optional eigenbasis `e_0 = 1, e_1, …` overriding the computed one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<MatrixDoc>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionDoc {
    pub offsets: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<MatrixDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jumps: Vec<MatrixDoc>,
    #[serde(default)]
    pub parity: u8,
    /// Unperturbed jump index `j` with `ι(x, j)` equal to each jump, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Vec<Option<usize>>>,
    /// Site `x` of the split entries; the origin for covariant models,
    /// otherwise the first offset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeDoc {
    pub shape: Vec<usize>,
    #[serde(default)]
    pub boundary: Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub statistics: Statistics,
    pub site_dim: usize,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_field: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_site: Option<SingleSiteDoc>,
    #[serde(default)]
    pub interactions: Vec<InteractionDoc>,
    pub covariant: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<u64>,
    pub volume: VolumeDoc,
}

/// A validated model of either statistics.
#[derive(Clone, Debug)]
pub enum Model {
    Qudit(ModelSpec),
    Fermion(FermionModelSpec),
}

fn site(coords: &[i64], dim: usize) -> Result<Site> {
    if coords.len() != dim {
        return Err(Error::Config(format!("site {coords:?} does not have {dim} coordinates")));
    }
    Ok(Site(coords.to_vec()))
}

fn matrix(doc: &MatrixDoc, what: &str) -> Result<CMat> {
    matrix_from_pairs(doc).map_err(|e| Error::Config(format!("{what}: {e}")))
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid model document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        ModelConfig::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::report::write_atomic(path, self.to_json().as_bytes()).map_err(Error::Io)
    }

    pub fn region(&self) -> Result<Region> {
        if self.volume.shape.len() != self.dimension || self.volume.shape.contains(&0) {
            return Err(Error::Config(format!(
                "volume shape {:?} must have {} positive extents",
                self.volume.shape, self.dimension
            )));
        }
        Ok(Region::boxed(&self.volume.shape))
    }

    /// Same model on the box with the given extents.
    pub fn with_shape(&self, shape: Vec<usize>) -> ModelConfig {
        let mut c = self.clone();
        c.volume.shape = shape;
        c
    }

    fn sites(&self, i: usize, it: &InteractionDoc) -> Result<Vec<Site>> {
        if it.offsets.is_empty() {
            return Err(Error::Config(format!("interaction {i} has no offsets")));
        }
        it.offsets.iter().map(|o| site(o, self.dimension)).collect()
    }

    pub fn build(&self) -> Result<Model> {
        if self.dimension == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        self.region()?;
        match self.statistics {
            Statistics::Qudit => self.build_qudit().map(Model::Qudit),
            Statistics::Fermion => self.build_fermion().map(Model::Fermion),
        }
    }

    fn build_qudit(&self) -> Result<ModelSpec> {
        let q = self.site_dim;
        let ss = self.single_site.as_ref().ok_or_else(|| Error::Config("qudit model needs single_site".into()))?;
        if self.h_field.is_some() {
            return Err(Error::Config("h_field applies to fermion models only".into()));
        }
        let rho = matrix(&ss.rho, "single_site.rho")?;
        if rho.nrows() != q {
            return Err(Error::Config(format!("single_site.rho is not {q}×{q}")));
        }
        let jumps = ss.jumps.iter().map(|m| matrix(m, "single_site.jumps")).collect::<Result<Vec<_>>>()?;
        let g = SingleSiteGenerator::new(rho, jumps)?;
        let spectral = match &ss.basis {
            None => None,
            Some(b) => {
                let basis = b.iter().map(|m| matrix(m, "single_site.basis")).collect::<Result<Vec<_>>>()?;
                Some(SpectralData::from_basis(&g, &build_l0(&g), basis)?)
            }
        };
        let mut terms = Vec::new();
        let mut split = Vec::new();
        for (i, it) in self.interactions.iter().enumerate() {
            if it.parity != 0 {
                return Err(Error::Config(format!("interaction {i}: parity applies to fermion models only")));
            }
            let listed = self.sites(i, it)?;
            let op = |doc: &MatrixDoc, what: &str| -> Result<LocalOperator> {
                let (r, m) = sort_factors(&matrix(doc, what)?, q, &listed)
                    .map_err(|e| Error::Config(format!("interaction {i}: {e}")))?;
                LocalOperator::new(r, q, m)
            };
            let region = Region::new(listed.clone()).map_err(|e| Error::Config(format!("interaction {i}: {e}")))?;
            if let Some(k) = &it.hamiltonian {
                terms.push(InteractionTerm::new(terms.len(), region.clone(), Some(op(k, "hamiltonian")?), None)?);
            }
            if let Some(s) = &it.split {
                if s.len() != it.jumps.len() {
                    return Err(Error::Config(format!("interaction {i}: split needs one entry per jump")));
                }
            }
            let anchor = match &it.anchor {
                Some(a) => site(a, self.dimension)?,
                None if self.covariant => Site::origin(self.dimension),
                None => listed[0].clone(),
            };
            for (n, l) in it.jumps.iter().enumerate() {
                let id = terms.len();
                if let Some(j) = it.split.as_ref().and_then(|s| s[n]) {
                    split.push(SplitEntry { site: anchor.clone(), j, term: id });
                }
                terms.push(InteractionTerm::new(id, region.clone(), None, Some(op(l, "jump")?))?);
            }
        }
        ModelSpec::new(&self.name, self.dimension, g, spectral, terms, split, self.covariant, self.range)
    }

    fn build_fermion(&self) -> Result<FermionModelSpec> {
        if self.site_dim != 2 {
            return Err(Error::Config("fermion models have site_dim 2".into()));
        }
        if self.single_site.is_some() {
            return Err(Error::Config("fermion models take h_field instead of single_site".into()));
        }
        if self.volume.boundary == Boundary::Periodic {
            return Err(Error::Config("periodic boundary is not supported for fermions".into()));
        }
        let mut terms = Vec::new();
        for (i, it) in self.interactions.iter().enumerate() {
            let listed = self.sites(i, it)?;
            let region = Region::new(listed.clone()).map_err(|e| Error::Config(format!("interaction {i}: {e}")))?;
            if region.sites() != listed.as_slice() {
                return Err(Error::Config(format!("interaction {i}: fermion offsets must be listed in lexicographic order")));
            }
            if it.split.is_some() || it.anchor.is_some() {
                return Err(Error::Config(format!("interaction {i}: split applies to qudit models only")));
            }
            if let Some(k) = &it.hamiltonian {
                terms.push(FermionTerm::new(terms.len(), region.clone(), 0, Some(matrix(k, "hamiltonian")?), None)?);
            }
            for l in &it.jumps {
                terms.push(FermionTerm::new(terms.len(), region.clone(), it.parity, None, Some(matrix(l, "jump")?))?);
            }
        }
        FermionModelSpec::new(&self.name, self.dimension, self.h_field.unwrap_or(0.0), terms, self.covariant, self.range)
    }
}

impl Model {
    pub fn name(&self) -> &str {
        match self {
            Model::Qudit(s) => &s.name,
            Model::Fermion(s) => &s.name,
        }
    }

    pub fn certificate(&self) -> CertificateReport {
        match self {
            Model::Qudit(s) => certify(s),
            Model::Fermion(s) => fermion_certificate(s),
        }
    }

    /// `𝓛_Λ` on `volume` with the given boundary.
    pub fn generator(&self, volume: &VolumeDoc) -> Result<FiniteVolumeGenerator> {
        let region = Region::boxed(&volume.shape);
        match (self, volume.boundary) {
            (Model::Qudit(s), Boundary::Open) => assemble(s, &region),
            (Model::Qudit(s), Boundary::Periodic) => assemble(&periodic_wrap(s, &volume.shape)?, &region),
            (Model::Fermion(s), Boundary::Open) => fermion_generator(s, &region),
            (Model::Fermion(_), Boundary::Periodic) => {
                Err(Error::Config("periodic boundary is not supported for fermions".into()))
            }
        }
    }

    /// The qudit spec that `volume` is assembled from: the model itself, or
    /// its torus copy.
    pub fn qudit_spec_on(&self, volume: &VolumeDoc) -> Result<Option<ModelSpec>> {
        match (self, volume.boundary) {
            (Model::Qudit(s), Boundary::Open) => Ok(Some(s.clone())),
            (Model::Qudit(s), Boundary::Periodic) => periodic_wrap(s, &volume.shape).map(Some),
            _ => Ok(None),
        }
    }
}
