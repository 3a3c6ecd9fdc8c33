//! Randomized checks of the local inequalities of the `E_{x,h}` calculus:
//! contraction of `E_{x,h}`, commutator locality, the product bound, the
//! per-term commutator estimate for `L¹_α`, and `‖𝓛f‖ ≤ C₀⦀f⦀`.

use rand::Rng;

use crate::error::Result;
use crate::lattice::{Region, Site};
use crate::linalg::{self, CMat};
use crate::locality::{self, DeltaProfile, Gradient, QuditCalculus};
use crate::model::{assemble, ModelSpec, PlacedTerm};
use crate::operator;
use crate::random;

/// `min(η‖f‖ − ‖E_{x,h}f‖, ‖f‖ − ‖E_{x,0}f‖)` over random `f` on the volume.
pub fn exh_contraction_slack<R: Rng>(calc: &QuditCalculus, rng: &mut R, trials: usize) -> Result<f64> {
    let d = operator::pow(calc.q(), calc.volume.len());
    let eta = calc.spectral.eta;
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let f = random::matrix(rng, d);
        let nf = linalg::op_norm(&f);
        for x in calc.volume.sites() {
            for h in 0..calc.spectral.basis.len() {
                let c = if h == 0 { 1.0 } else { eta };
                let e = linalg::op_norm(&calc.exh_reduced(&f, x, h)?);
                worst = worst.min(c * nf - e);
            }
        }
    }
    Ok(worst)
}

/// `max ‖f − Σ_h (E_{x,h}f) e_{x,h}‖` over random `f` and sites.
pub fn reconstruction_residual<R: Rng>(calc: &QuditCalculus, rng: &mut R, trials: usize) -> Result<f64> {
    let d = operator::pow(calc.q(), calc.volume.len());
    let q = calc.q();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let f = random::matrix(rng, d);
        for x in calc.volume.sites() {
            let mut r = f.clone();
            for (h, e) in calc.spectral.basis.iter().enumerate() {
                let ex = operator::embed_matrix(e, &Region::single(x.clone()), &calc.volume, q)?;
                r -= &calc.exh(&f, x, h)? * &ex;
            }
            worst = worst.max(linalg::op_norm(&r));
        }
    }
    Ok(worst)
}

/// `2η‖u‖Σ_{x∈X}δ_x(f) − ‖[u,f]‖` for `u` random on at most two sites `X`.
pub fn commutator_locality_slack<R: Rng>(calc: &QuditCalculus, rng: &mut R, trials: usize) -> f64 {
    let q = calc.q();
    let d = operator::pow(q, calc.volume.len());
    let eta = calc.spectral.eta;
    let sites = calc.volume.sites();
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let a = sites[rng.random_range(0..sites.len())].clone();
        let b = sites[rng.random_range(0..sites.len())].clone();
        let x = Region::new(if a == b { vec![a] } else { vec![a, b] }).expect("distinct sites");
        let u = random::local_matrix(rng, &x, &calc.volume, q);
        let f = random::matrix(rng, d);
        let prof = calc.profile(&f);
        let s: f64 = x.sites().iter().map(|y| prof[calc.volume.position(y).expect("inside")]).sum();
        worst = worst.min(2.0 * eta * linalg::op_norm(&u) * s - linalg::op_norm(&linalg::commutator(&u, &f)));
    }
    worst
}

/// `Nη²(⦀f₁⦀‖f₂‖ + ‖f₁‖⦀f₂⦀) − ⦀f₁f₂⦀` on random pairs.
pub fn product_bound_slack<R: Rng>(calc: &QuditCalculus, rng: &mut R, trials: usize) -> f64 {
    let d = operator::pow(calc.q(), calc.volume.len());
    let c = calc.spectral.n() as f64 * calc.spectral.eta.powi(2);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let f1 = random::matrix(rng, d);
        let f2 = random::matrix(rng, d);
        let rhs = c * (calc.seminorm(&f1) * linalg::op_norm(&f2) + linalg::op_norm(&f1) * calc.seminorm(&f2));
        worst = worst.min(rhs - calc.seminorm(&(&f1 * &f2)));
    }
    worst
}

/// Distinct term placements used for the per-term checks: every template
/// once (covariant) or every term.
fn representative_terms(spec: &ModelSpec) -> Vec<PlacedTerm> {
    let mut all = Region::empty();
    for t in &spec.terms {
        all = all.union(&t.region);
    }
    let (terms, _) = spec.terms_in(&all);
    if !spec.covariant {
        return terms;
    }
    let mut seen = std::collections::BTreeSet::new();
    terms
        .into_iter()
        .filter(|p| seen.insert(p.term.id))
        .filter(|p| !p.term.is_zero())
        .collect()
}

/// `χ(α)` plus one neighbouring site, so that sites outside the term are
/// also exercised.
fn padded(region: &Region) -> Region {
    let x = &region.sites()[0];
    for axis in 0..x.dim() {
        for step in [-1i64, 1] {
            let mut c = x.0.clone();
            c[axis] += step;
            let y = Site(c);
            if !region.contains(&y) {
                return region.union(&Region::single(y));
            }
        }
    }
    region.clone()
}

/// `Σ_{y∈χ(α)} θ_{x,y}(α)δ_y(f) − ‖E_{x,h}L¹_αf − L¹_αE_{x,h}f‖` over all
/// representative terms, sites of the padded region, `h ≥ 1` and random `f`.
pub fn term_commutator_slack<R: Rng>(spec: &ModelSpec, rng: &mut R, trials: usize) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for p in representative_terms(spec) {
        let vol = padded(&p.term.region);
        if vol.len() > 5 {
            continue;
        }
        let calc = QuditCalculus::new(vol.clone(), spec.spectral.clone());
        let form = locality::perturbation_form(spec, &p, &vol)?;
        let d = form.dim;
        for _ in 0..trials {
            let f = random::matrix(rng, d);
            let prof = DeltaProfile::from_values(&vol, calc.profile(&f));
            let lf = form.apply_heisenberg(&f);
            for x in vol.sites() {
                let rhs = locality::commutator_bound_rhs(spec, &p, x, &prof);
                for h in 1..spec.spectral.basis.len() {
                    let lhs = calc.exh(&lf, x, h)? - form.apply_heisenberg(&calc.exh(&f, x, h)?);
                    worst = worst.min(rhs - linalg::op_norm(&lhs));
                }
            }
        }
    }
    Ok(worst)
}

/// `C₀⦀f⦀ − ‖𝓛f‖` for random `f` supported at depth ≥ R inside `volume`,
/// so that every term acting on `f` is included.
pub fn generator_bound_slack<R: Rng>(spec: &ModelSpec, volume: &Region, rng: &mut R, trials: usize) -> Result<f64> {
    let r = locality::effective_range(spec);
    let inner: Vec<Site> = volume.sites().iter().filter(|x| volume.depth(x) >= r).cloned().collect();
    if inner.is_empty() {
        return Err(crate::Error::Precondition(format!("volume has no site at depth {r}")));
    }
    let gen = assemble(spec, volume)?;
    let calc = QuditCalculus::new(volume.clone(), spec.spectral.clone());
    let c0 = locality::compute_c0(spec);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let x = inner[rng.random_range(0..inner.len())].clone();
        let f: CMat = random::local_matrix(rng, &Region::single(x), volume, spec.site_dim);
        worst = worst.min(c0 * calc.seminorm(&f) - linalg::op_norm(&gen.apply(&f)));
    }
    Ok(worst)
}
