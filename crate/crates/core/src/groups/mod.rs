//! Finite groups of isometries: closure from generators, subgroups,
//! stabilizers and permutation actions on the tessellations.

mod action;
mod named;

pub use action::{act, hemisphere_orbit_check, ActionSummary, GroupAction, HemisphereOrbitReport};
pub use named::{
    build_named_groups, certify, default_cap, exchange_element, shifted_cell_stabilizer, GroupCertificate, NamedGroups,
};

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::s3core::{Isometry4, PointS3, ORTHO_TOL};

/// Elements closer than this in max-abs matrix distance are identified.
pub const DEDUP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupError {
    #[error("closure exceeded {cap} elements")]
    CapExceeded { cap: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not an action on the family: {0}")]
    NotAnAction(String),
}

/// A finite group of isometries with its multiplication table.
///
/// Element 0 is the identity; the remaining elements are in breadth-first
/// order from the generators, each layer sorted lexicographically by matrix
/// entries.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    elements: Vec<Isometry4>,
    generators: Vec<usize>,
    table: Vec<Vec<u32>>,
    inverse: Vec<usize>,
    index: ElementIndex,
}

fn lex_cmp(a: &Isometry4, b: &Isometry4) -> Ordering {
    a.row_major()
        .iter()
        .zip(b.row_major().iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Hash lookup on rounded entries, with a linear scan as the authoritative fallback.
#[derive(Clone, Debug, Default)]
struct ElementIndex {
    buckets: HashMap<[i64; 16], usize>,
}

impl ElementIndex {
    fn key(g: &Isometry4) -> [i64; 16] {
        g.row_major().map(|x| (x * 1e6).round() as i64)
    }

    fn find(&self, elements: &[Isometry4], g: &Isometry4) -> Option<usize> {
        if let Some(&i) = self.buckets.get(&Self::key(g)) {
            if elements[i].distance(g) < DEDUP_TOL {
                return Some(i);
            }
        }
        elements.iter().position(|e| e.distance(g) < DEDUP_TOL)
    }

    fn insert(&mut self, g: &Isometry4, i: usize) {
        self.buckets.insert(Self::key(g), i);
    }
}

impl FiniteGroup {
    /// Closure of `generators` under composition, failing once it exceeds `cap` elements.
    pub fn close(generators: &[Isometry4], cap: usize) -> Result<FiniteGroup, GroupError> {
        for g in generators {
            if !g.is_orthogonal(ORTHO_TOL) {
                return Err(GroupError::InvalidInput(format!(
                    "generator is not orthogonal (defect {:e})",
                    g.orthogonality_defect()
                )));
            }
        }
        let mut elements = vec![Isometry4::identity()];
        let mut index = ElementIndex::default();
        index.insert(&elements[0], 0);
        let mut frontier = vec![0usize];
        while !frontier.is_empty() {
            let mut layer: Vec<Isometry4> = Vec::new();
            for &f in &frontier {
                for s in generators {
                    let g = elements[f].compose(s);
                    if index.find(&elements, &g).is_none() && layer.iter().all(|h| h.distance(&g) >= DEDUP_TOL) {
                        layer.push(g);
                    }
                }
            }
            layer.sort_by(lex_cmp);
            frontier.clear();
            for g in layer {
                let i = elements.len();
                index.insert(&g, i);
                elements.push(g);
                frontier.push(i);
                if elements.len() > cap {
                    return Err(GroupError::CapExceeded { cap });
                }
            }
        }
        let generators = generators
            .iter()
            .map(|g| index.find(&elements, g).expect("generators are elements"))
            .collect();
        Ok(Self::with_table(elements, generators, index))
    }

    fn with_table(elements: Vec<Isometry4>, generators: Vec<usize>, index: ElementIndex) -> FiniteGroup {
        let n = elements.len();
        let table: Vec<Vec<u32>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let p = elements[a].compose(&elements[b]);
                        index.find(&elements, &p).expect("closed under products") as u32
                    })
                    .collect()
            })
            .collect();
        let inverse = (0..n)
            .map(|a| {
                (0..n)
                    .find(|&b| table[a][b] == 0)
                    .expect("every element has an inverse")
            })
            .collect();
        FiniteGroup {
            elements,
            generators,
            table,
            inverse,
            index,
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Isometry4] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Isometry4 {
        &self.elements[i]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// Index of `elements[a] ∘ elements[b]`.
    pub fn multiply(&self, a: usize, b: usize) -> usize {
        self.table[a][b] as usize
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn index_of(&self, g: &Isometry4) -> Option<usize> {
        self.index.find(&self.elements, g)
    }

    pub fn contains(&self, g: &Isometry4) -> bool {
        self.index_of(g).is_some()
    }

    pub fn is_subgroup_of(&self, other: &FiniteGroup) -> bool {
        self.elements.iter().all(|g| other.contains(g))
    }

    /// Same element set.
    pub fn same_elements(&self, other: &FiniteGroup) -> bool {
        self.order() == other.order() && self.is_subgroup_of(other)
    }

    /// The elements shared with `other`, as a group.
    pub fn intersection(&self, other: &FiniteGroup) -> FiniteGroup {
        let common: Vec<Isometry4> = self.elements.iter().filter(|g| other.contains(g)).copied().collect();
        FiniteGroup::close(&common, self.order()).expect("an intersection of groups is closed")
    }

    /// The subgroup of elements satisfying `keep`; `None` if they are not closed.
    pub fn filter<F: Fn(&Isometry4) -> bool>(&self, keep: F) -> Option<FiniteGroup> {
        let chosen: Vec<Isometry4> = self.elements.iter().filter(|g| keep(g)).copied().collect();
        let g = FiniteGroup::close(&chosen, self.order()).ok()?;
        (g.order() == chosen.len()).then_some(g)
    }

    /// `{g : g A = A}` for a finite point set `A`, compared as sets within `tol`.
    pub fn stabilizer(&self, points: &[PointS3], tol: f64) -> FiniteGroup {
        self.filter(|g| points.iter().all(|p| points.iter().any(|q| g.apply(p).chord(q) <= tol)))
            .expect("stabilizers are subgroups")
    }

    /// Checks identity, inverses and associativity of the table on sampled triples.
    pub fn table_is_consistent<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> bool {
        let n = self.order();
        let identity = (0..n).all(|a| self.multiply(0, a) == a && self.multiply(a, 0) == a);
        let inverses = (0..n).all(|a| self.multiply(a, self.inverse(a)) == 0 && self.multiply(self.inverse(a), a) == 0);
        let assoc = (0..samples).all(|_| {
            let (a, b, c) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
            self.multiply(self.multiply(a, b), c) == self.multiply(a, self.multiply(b, c))
        });
        identity && inverses && assoc
    }

    pub fn document(&self, name: &str) -> GroupDocument {
        GroupDocument {
            name: name.to_string(),
            order: self.order(),
            generators: self.generators.clone(),
            elements: self.elements.iter().map(|g| g.row_major()).collect(),
            table: self.table.clone(),
        }
    }
}

/// JSON form of a group: row-major matrices and the multiplication table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupDocument {
    pub name: String,
    pub order: usize,
    pub generators: Vec<usize>,
    pub elements: Vec<[f64; 16]>,
    pub table: Vec<Vec<u32>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s3core::{rotate_about, GreatCircle, Mat4};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_generates_trivial_group() {
        let g = FiniteGroup::close(&[Isometry4::identity()], 10).unwrap();
        assert_eq!(g.order(), 1);
        let empty = FiniteGroup::close(&[], 10).unwrap();
        assert_eq!(empty.order(), 1);
        assert_eq!(empty.stabilizer(&[PointS3::on_c(0.3)], 1e-9).order(), 1);
    }

    #[test]
    fn cyclic_rotation_group() {
        for n in [2, 5, 12] {
            let r = rotate_about(&GreatCircle::c(), std::f64::consts::TAU / n as f64);
            let g = FiniteGroup::close(&[r], 100).unwrap();
            assert_eq!(g.order(), n);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            assert!(g.table_is_consistent(1000, &mut rng));
        }
    }

    #[test]
    fn irrational_rotation_hits_cap() {
        let r = rotate_about(&GreatCircle::c(), 1.0);
        assert_eq!(
            FiniteGroup::close(&[r], 50).unwrap_err(),
            GroupError::CapExceeded { cap: 50 }
        );
    }

    #[test]
    fn non_orthogonal_generator_rejected() {
        let bad = Isometry4::from_matrix_unchecked(Mat4::identity() * 2.0);
        assert!(matches!(
            FiniteGroup::close(&[bad], 10),
            Err(GroupError::InvalidInput(_))
        ));
    }

    #[test]
    fn ordering_is_deterministic() {
        let a = rotate_about(&GreatCircle::c(), std::f64::consts::FRAC_PI_2);
        let b = GreatCircle::c_perp().reflection();
        let g1 = FiniteGroup::close(&[a, b], 100).unwrap();
        let g2 = FiniteGroup::close(&[a, b], 100).unwrap();
        assert_eq!(g1.elements(), g2.elements());
        let doc = serde_json::to_string(&g1.document("d")).unwrap();
        let back: GroupDocument = serde_json::from_str(&doc).unwrap();
        assert_eq!(back.order, g1.order());
        assert_eq!(back.table[1][2] as usize, g1.multiply(1, 2));
    }
}
