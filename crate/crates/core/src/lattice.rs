//! Lattice sites, finite boxes and their boundaries.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{invalid, Result};

/// A point of ℤ^d. Ordering is lexicographic on coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site(pub Vec<i64>);

impl Site {
    pub fn new(coords: Vec<i64>) -> Self {
        assert!(!coords.is_empty(), "site needs at least one coordinate");
        Site(coords)
    }

    pub fn origin(d: usize) -> Self {
        Site(vec![0; d])
    }

    pub fn d1(x: i64) -> Self {
        Site(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm1(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn norm_inf(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn dist1(&self, other: &Site) -> i64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn dist_inf(&self, other: &Site) -> i64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).max().unwrap_or(0)
    }

    /// The 2d nearest neighbours in ℓ¹.
    pub fn neighbors(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.dim()).flat_map(move |j| {
            [-1i64, 1].into_iter().map(move |step| {
                let mut c = self.0.clone();
                c[j] += step;
                Site(c)
            })
        })
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            write!(f, "{}", self.0[0])
        } else {
            write!(f, "{:?}", self.0)
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl Add for &Site {
    type Output = Site;
    fn add(self, rhs: &Site) -> Site {
        Site(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Site {
    type Output = Site;
    fn sub(self, rhs: &Site) -> Site {
        Site(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Site {
    type Output = Site;
    fn neg(self) -> Site {
        Site(self.0.iter().map(|a| -a).collect())
    }
}

/// How a geometry was built; kept for reporting.
#[derive(Clone, Debug, PartialEq)]
pub enum Descriptor {
    Cube { radius: i64, center: Site },
    Explicit,
}

/// An ordered finite subset of ℤ^d with a site ↔ index map.
#[derive(Clone, Debug)]
pub struct BoxGeometry {
    sites: Vec<Site>,
    index: HashMap<Site, usize>,
    dim: usize,
    pub descriptor: Descriptor,
}

impl BoxGeometry {
    /// Builds a geometry from arbitrary sites; they are sorted and deduplicated.
    /// An empty set is allowed only when `d` is given explicitly.
    pub fn from_sites(dim: usize, sites: impl IntoIterator<Item = Site>) -> Result<Self> {
        let set: BTreeSet<Site> = sites.into_iter().collect();
        if set.iter().any(|s| s.dim() != dim) {
            return invalid("sites of mixed dimension");
        }
        let sites: Vec<Site> = set.into_iter().collect();
        let index = sites.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(Self { sites, index, dim, descriptor: Descriptor::Explicit })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, i: usize) -> &Site {
        &self.sites[i]
    }

    pub fn index_of(&self, s: &Site) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn contains(&self, s: &Site) -> bool {
        self.index.contains_key(s)
    }

    pub fn is_subset_of(&self, other: &BoxGeometry) -> bool {
        self.sites.iter().all(|s| other.contains(s))
    }

    pub fn minus(&self, other: &BoxGeometry) -> BoxGeometry {
        Self::from_sites(self.dim, self.sites.iter().filter(|s| !other.contains(s)).cloned()).expect("same dimension")
    }

    pub fn union(&self, other: &BoxGeometry) -> BoxGeometry {
        Self::from_sites(self.dim, self.sites.iter().chain(other.sites.iter()).cloned()).expect("same dimension")
    }

    pub fn intersect(&self, other: &BoxGeometry) -> BoxGeometry {
        Self::from_sites(self.dim, self.sites.iter().filter(|s| other.contains(s)).cloned()).expect("same dimension")
    }

    pub fn translate(&self, by: &Site) -> BoxGeometry {
        Self::from_sites(self.dim, self.sites.iter().map(|s| s + by)).expect("same dimension")
    }

    /// Sites of the set with fewer than 2d neighbours inside it.
    pub fn interior_boundary(&self) -> Result<BoxGeometry> {
        if self.is_empty() {
            return invalid("boundary of an empty set");
        }
        let inner = self.sites.iter().filter(|s| s.neighbors().any(|n| !self.contains(&n)));
        Self::from_sites(self.dim, inner.cloned())
    }

    /// Sites outside the set with at least one neighbour inside it.
    pub fn exterior_boundary(&self) -> Result<BoxGeometry> {
        if self.is_empty() {
            return invalid("boundary of an empty set");
        }
        let outer = self.sites.iter().flat_map(|s| s.neighbors()).filter(|n| !self.contains(n));
        Self::from_sites(self.dim, outer)
    }

    /// The set together with its exterior boundary.
    pub fn thicken(&self) -> BoxGeometry {
        if self.is_empty() {
            return self.clone();
        }
        self.union(&self.exterior_boundary().expect("nonempty"))
    }

    /// Number of unordered ℓ¹-adjacent pairs inside the set.
    pub fn bond_count(&self) -> usize {
        self.sites.iter().map(|s| s.neighbors().filter(|n| self.contains(n)).count()).sum::<usize>() / 2
    }

    /// Connected components under ℓ¹ adjacency, each sorted, listed by smallest site.
    pub fn components(&self) -> Vec<BoxGeometry> {
        let mut label = vec![usize::MAX; self.len()];
        let mut comps = Vec::new();
        for start in 0..self.len() {
            if label[start] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut members = Vec::new();
            let mut queue = VecDeque::from([start]);
            label[start] = id;
            while let Some(i) = queue.pop_front() {
                members.push(self.sites[i].clone());
                for n in self.sites[i].neighbors() {
                    if let Some(j) = self.index_of(&n) {
                        if label[j] == usize::MAX {
                            label[j] = id;
                            queue.push_back(j);
                        }
                    }
                }
            }
            comps.push(Self::from_sites(self.dim, members).expect("same dimension"));
        }
        comps
    }

    /// The component containing `s`, if `s` belongs to the set.
    pub fn component_of(&self, s: &Site) -> Option<BoxGeometry> {
        self.index_of(s)?;
        self.components().into_iter().find(|c| c.contains(s))
    }
}

impl PartialEq for BoxGeometry {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.sites == other.sites
    }
}

/// The cube {k : |k − center|_∞ ≤ radius} in lexicographic order.
pub fn build_box(radius: i64, center: &Site) -> Result<BoxGeometry> {
    if radius < 0 {
        return invalid("box radius must be non-negative");
    }
    let d = center.dim();
    let mut sites = Vec::new();
    let mut offset = vec![-radius; d];
    loop {
        sites.push(Site(center.0.iter().zip(&offset).map(|(c, o)| c + o).collect()));
        let mut j = d;
        loop {
            if j == 0 {
                let mut g = BoxGeometry::from_sites(d, sites)?;
                g.descriptor = Descriptor::Cube { radius, center: center.clone() };
                return Ok(g);
            }
            j -= 1;
            if offset[j] < radius {
                offset[j] += 1;
                break;
            }
            offset[j] = -radius;
        }
    }
}

/// The one-dimensional interval {lo, ..., hi}.
pub fn interval(lo: i64, hi: i64) -> BoxGeometry {
    BoxGeometry::from_sites(1, (lo..=hi).map(Site::d1)).expect("one-dimensional")
}

/// All multi-indices / offsets in the cube of given radius around the origin.
pub fn cube_offsets(d: usize, radius: i64) -> Vec<Site> {
    build_box(radius, &Site::origin(d)).expect("non-negative radius").sites().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(d: usize, v: &[&[i64]]) -> BoxGeometry {
        BoxGeometry::from_sites(d, v.iter().map(|c| Site(c.to_vec()))).unwrap()
    }

    #[test]
    fn box_cardinality_and_order() {
        let b = build_box(0, &Site::origin(1)).unwrap();
        assert_eq!(b.sites(), &[Site::d1(0)]);
        let b = build_box(1, &Site::origin(1)).unwrap();
        assert_eq!(b, interval(-1, 1));
        let b = build_box(2, &Site(vec![1, 1])).unwrap();
        assert_eq!(b.len(), 25);
        assert!(b.sites().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(b.site(0), &Site(vec![-1, -1]));
        for (i, s) in b.sites().iter().enumerate() {
            assert_eq!(b.index_of(s), Some(i));
        }
    }

    #[test]
    fn boundaries_1d() {
        let g = interval(-1, 1);
        assert_eq!(g.interior_boundary().unwrap(), set(1, &[&[-1], &[1]]));
        assert_eq!(g.exterior_boundary().unwrap(), set(1, &[&[-2], &[2]]));
        assert_eq!(interval(0, 0).interior_boundary().unwrap(), interval(0, 0));
        assert!(BoxGeometry::from_sites(1, []).unwrap().interior_boundary().is_err());
    }

    #[test]
    fn boundaries_2d_against_enumeration() {
        let g = build_box(1, &Site::origin(2)).unwrap();
        let inner = g.interior_boundary().unwrap();
        assert_eq!(inner.len(), 8);
        assert!(!inner.contains(&Site::origin(2)));
        // Brute force: sites outside with some neighbour inside.
        let mut outer = Vec::new();
        for x in -3..=3 {
            for y in -3..=3 {
                let s = Site(vec![x, y]);
                if !g.contains(&s) && s.neighbors().any(|n| g.contains(&n)) {
                    outer.push(s);
                }
            }
        }
        assert_eq!(outer.len(), 12);
        assert_eq!(g.exterior_boundary().unwrap(), BoxGeometry::from_sites(2, outer).unwrap());
    }

    #[test]
    fn components_split() {
        let g = set(1, &[&[0], &[1], &[3], &[4], &[7]]);
        let c = g.components();
        assert_eq!(c.len(), 3);
        assert_eq!(c[1], set(1, &[&[3], &[4]]));
        assert_eq!(g.component_of(&Site::d1(7)).unwrap().len(), 1);
        assert_eq!(build_box(2, &Site::origin(2)).unwrap().bond_count(), 2 * 5 * 4);
    }
}
