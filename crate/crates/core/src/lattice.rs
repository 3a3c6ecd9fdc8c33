//! Sites of ℤ^d and finite regions in the global lexicographic order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lattice site. The derived order is lexicographic in the coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Site(pub Vec<i64>);

impl Site {
    pub fn new(coords: &[i64]) -> Self {
        Site(coords.to_vec())
    }

    pub fn origin(d: usize) -> Self {
        Site(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn shifted(&self, by: &Site) -> Site {
        assert_eq!(self.dim(), by.dim(), "site dimension mismatch");
        Site(self.0.iter().zip(&by.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> Site {
        Site(self.0.iter().map(|a| -a).collect())
    }

    /// Max-metric distance.
    pub fn dist(&self, other: &Site) -> u64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.abs_diff(*b))
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Finite set of sites, stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Site>", into = "Vec<Site>")]
pub struct Region {
    sites: Vec<Site>,
}

impl TryFrom<Vec<Site>> for Region {
    type Error = Error;
    fn try_from(v: Vec<Site>) -> Result<Self> {
        Region::new(v)
    }
}

impl From<Region> for Vec<Site> {
    fn from(r: Region) -> Self {
        r.sites
    }
}

impl Region {
    /// Builds a region; duplicates are an error, order is normalized.
    pub fn new(mut sites: Vec<Site>) -> Result<Self> {
        sites.sort();
        for w in sites.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Model(format!("duplicate site {} in region", w[0])));
            }
            if w[0].dim() != w[1].dim() {
                return Err(Error::Model("mixed site dimensions in region".into()));
            }
        }
        Ok(Region { sites })
    }

    pub fn empty() -> Self {
        Region { sites: Vec::new() }
    }

    pub fn single(x: Site) -> Self {
        Region { sites: vec![x] }
    }

    /// Chain `{start, …, start+len-1}` in d = 1.
    pub fn chain(start: i64, len: usize) -> Self {
        Region {
            sites: (0..len as i64).map(|i| Site(vec![start + i])).collect(),
        }
    }

    /// Box `∏ [0, extents_i)` in ℤ^d.
    pub fn boxed(extents: &[usize]) -> Self {
        let mut sites = vec![Site(vec![])];
        for &e in extents {
            let mut next = Vec::with_capacity(sites.len() * e);
            for s in &sites {
                for c in 0..e as i64 {
                    let mut v = s.0.clone();
                    v.push(c);
                    next.push(Site(v));
                }
            }
            sites = next;
        }
        Region::new(sites).expect("box sites are distinct")
    }

    /// Max-metric ball of radius `r` around `center`.
    pub fn ball(center: &Site, r: usize) -> Self {
        let d = center.dim();
        let b = Region::boxed(&vec![2 * r + 1; d]);
        let shift = Site(center.0.iter().map(|c| c - r as i64).collect());
        b.translate(&shift)
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, x: &Site) -> bool {
        self.sites.binary_search(x).is_ok()
    }

    pub fn position(&self, x: &Site) -> Option<usize> {
        self.sites.binary_search(x).ok()
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.sites.iter().all(|s| other.contains(s))
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut v = self.sites.clone();
        for s in &other.sites {
            if !self.contains(s) {
                v.push(s.clone());
            }
        }
        Region::new(v).expect("union of regions has no duplicates")
    }

    pub fn without(&self, x: &Site) -> Region {
        Region {
            sites: self.sites.iter().filter(|s| *s != x).cloned().collect(),
        }
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.sites.iter().all(|s| !other.contains(s))
    }

    pub fn translate(&self, by: &Site) -> Region {
        Region {
            sites: self.sites.iter().map(|s| s.shifted(by)).collect(),
        }
    }

    pub fn diameter(&self) -> u64 {
        let mut d = 0;
        for (i, a) in self.sites.iter().enumerate() {
            for b in &self.sites[i + 1..] {
                d = d.max(a.dist(b));
            }
        }
        d
    }

    /// Max-metric distance between two regions (minimum over pairs).
    pub fn dist(&self, other: &Region) -> u64 {
        let mut d = u64::MAX;
        for a in &self.sites {
            for b in &other.sites {
                d = d.min(a.dist(b));
            }
        }
        d
    }

    /// Largest `r` with the ball `B_r(x)` inside this region.
    pub fn depth(&self, x: &Site) -> u64 {
        let mut r = 0u64;
        loop {
            let b = Region::ball(x, r as usize + 1);
            if !b.is_subset(self) {
                return r;
            }
            r += 1;
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.sites.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}
