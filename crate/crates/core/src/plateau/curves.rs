//! Sections of a disc by great spheres: the curves `α`, `β` and the axis point.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::lattice::Lattice;
use crate::s3core::{arc_distance, PointS3, Vec4};

use super::mesh::{cone_coefficients, TriMeshS3};
use super::PlateauError;

const ZERO: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Vertex(u32),
    Edge(u32, u32),
}

fn node_point(mesh: &TriMeshS3, s: &[f64], node: Node) -> PointS3 {
    match node {
        Node::Vertex(v) => *mesh.vertex(v as usize),
        Node::Edge(a, b) => {
            let (xa, xb) = (mesh.vertex(a as usize).coords(), mesh.vertex(b as usize).coords());
            let (sa, sb) = (s[a as usize].abs(), s[b as usize].abs());
            PointS3::normalize(xa * sb + xb * sa).expect("crossing edges are short")
        }
    }
}

/// The intersection of the mesh with the great sphere `n·x = 0`, as polylines.
///
/// Closed loops repeat their first point at the end. A vertex meeting more
/// than two section segments is an error.
pub fn sphere_section(mesh: &TriMeshS3, normal: &Vec4) -> Result<Vec<Vec<PointS3>>, PlateauError> {
    let s: Vec<f64> = mesh
        .vertices()
        .iter()
        .map(|v| {
            let d = normal.dot(v.coords());
            if d.abs() <= ZERO {
                0.0
            } else {
                d
            }
        })
        .collect();
    let mut segments: BTreeSet<(Node, Node)> = BTreeSet::new();
    for tri in mesh.triangles() {
        let sv = tri.map(|v| s[v as usize]);
        if sv.iter().all(|&x| x == 0.0) {
            continue;
        }
        let mut nodes = Vec::new();
        for c in 0..3 {
            let (a, b) = (tri[c], tri[(c + 1) % 3]);
            let (sa, sb) = (sv[c], sv[(c + 1) % 3]);
            if sa == 0.0 {
                nodes.push(Node::Vertex(a));
            }
            if sa * sb < 0.0 {
                nodes.push(Node::Edge(a.min(b), a.max(b)));
            }
        }
        if nodes.len() == 2 {
            let (p, q) = (nodes[0].min(nodes[1]), nodes[0].max(nodes[1]));
            segments.insert((p, q));
        }
    }
    let mut adj: BTreeMap<Node, Vec<Node>> = BTreeMap::new();
    for &(p, q) in &segments {
        adj.entry(p).or_default().push(q);
        adj.entry(q).or_default().push(p);
    }
    if let Some((n, nb)) = adj.iter().find(|(_, v)| v.len() > 2) {
        return Err(PlateauError::CurveTopology(format!(
            "section branches at {n:?} ({} segments)",
            nb.len()
        )));
    }
    let mut used: BTreeSet<(Node, Node)> = BTreeSet::new();
    let mut chains = Vec::new();
    let starts: Vec<Node> = adj
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(n, _)| *n)
        .chain(adj.keys().copied())
        .collect();
    for start in starts {
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(&next) = adj[&cur].iter().find(|&&q| !used.contains(&(cur.min(q), cur.max(q)))) {
            used.insert((cur.min(next), cur.max(next)));
            chain.push(next);
            cur = next;
        }
        if chain.len() > 1 {
            chains.push(chain.into_iter().map(|n| node_point(mesh, &s, n)).collect());
        }
    }
    Ok(chains)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscCurves {
    /// `x₀⁰`: where the disc meets the arc from `t₀` to `t⁰`.
    pub axis_point: [f64; 4],
    /// Angle of the axis point from `t₀` along that arc.
    pub axis_angle: f64,
    /// `α₀^{0∓}`, from `t^{∓½}` to the axis point.
    pub alpha_minus: Vec<[f64; 4]>,
    pub alpha_plus: Vec<[f64; 4]>,
    /// `β_{0∓}⁰`, from `t_{∓½}` to the axis point.
    pub beta_minus: Vec<[f64; 4]>,
    pub beta_plus: Vec<[f64; 4]>,
    /// Largest distance between a curve endpoint and the corner it should reach.
    pub endpoint_error: f64,
}

fn single(chains: Vec<Vec<PointS3>>, what: &str) -> Result<Vec<PointS3>, PlateauError> {
    match <[Vec<PointS3>; 1]>::try_from(chains) {
        Ok([c]) => Ok(c),
        Err(c) => Err(PlateauError::CurveTopology(format!("{what} has {} pieces", c.len()))),
    }
}

/// Points of the mesh on the great circle through orthonormal `a1, a2`, at
/// angles in `[lo, hi]`.
pub(crate) fn circle_hits(mesh: &TriMeshS3, a1: &Vec4, a2: &Vec4, lo: f64, hi: f64) -> Vec<(f64, PointS3)> {
    let mut hits: Vec<(f64, PointS3)> = Vec::new();
    for t in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle_points(t).map(|p| *p.coords());
        let n = mesh.triangle_normal(t);
        let (u, v) = (n.dot(a1), n.dot(a2));
        if u.hypot(v) <= 1e-14 * n.norm() {
            continue;
        }
        let theta0 = (-u).atan2(v);
        for theta in [theta0, theta0 + std::f64::consts::PI] {
            let mut th = theta.rem_euclid(std::f64::consts::TAU);
            if th > hi + 1e-9 && th - std::f64::consts::TAU >= lo - 1e-9 {
                th -= std::f64::consts::TAU;
            }
            if th < lo - 1e-9 || th > hi + 1e-9 {
                continue;
            }
            let y = a1 * th.cos() + a2 * th.sin();
            let inside = cone_coefficients(&a, &b, &c, &y).is_some_and(|w| w.iter().all(|&x| x >= -1e-10));
            let p = PointS3::from_unit_unchecked(y.normalize());
            if inside && hits.iter().all(|(_, q)| q.chord(&p) > 1e-9) {
                hits.push((th, p));
            }
        }
    }
    hits.sort_by(|x, y| x.0.total_cmp(&y.0));
    hits
}

/// Splits `curve` at the point of it nearest to `x`, inserting `x`.
fn split_at(curve: &[PointS3], x: &PointS3) -> (Vec<PointS3>, Vec<PointS3>) {
    let seg = (0..curve.len() - 1)
        .min_by(|&i, &j| {
            arc_distance(&curve[i], &curve[i + 1], x).total_cmp(&arc_distance(&curve[j], &curve[j + 1], x))
        })
        .expect("curve has a segment");
    let mut head: Vec<PointS3> = curve[..=seg].to_vec();
    let mut tail: Vec<PointS3> = curve[seg + 1..].to_vec();
    if head.last().is_some_and(|p| p.chord(x) < 1e-12) {
        head.pop();
    }
    if tail.first().is_some_and(|p| p.chord(x) < 1e-12) {
        tail.remove(0);
    }
    head.push(*x);
    tail.insert(0, *x);
    (head, tail)
}

fn oriented_from(mut curve: Vec<PointS3>, start: &PointS3) -> Vec<PointS3> {
    if curve.last().unwrap().chord(start) < curve[0].chord(start) {
        curve.reverse();
    }
    curve
}

/// `D ∩ Σ₀ = α₀^{0−} ∪ α₀^{0+}` and `D ∩ Σ⁰ = β_{0−}⁰ ∪ β_{0+}⁰`, meeting at
/// the axis point.
pub fn extract_curves(mesh: &TriMeshS3, lat: &Lattice) -> Result<DiscCurves, PlateauError> {
    let alpha = single(sphere_section(mesh, lat.sigma_lower(0).normal())?, "D ∩ Σ₀")?;
    let beta = single(sphere_section(mesh, lat.sigma_upper(0).normal())?, "D ∩ Σ⁰")?;
    let (a1, a2) = (*lat.t_lower(0).coords(), *lat.t_upper(0).coords());
    let hits = circle_hits(mesh, &a1, &a2, 0.0, FRAC_PI_2);
    let [(angle, x)] = <[(f64, PointS3); 1]>::try_from(hits)
        .map_err(|h| PlateauError::CurveTopology(format!("axis arc meets the disc {} times", h.len())))?;
    let (um, up) = (lat.t_upper(-1), lat.t_upper(1));
    let (lm, lp) = (lat.t_lower(-1), lat.t_lower(1));
    let alpha = oriented_from(alpha, &um);
    let beta = oriented_from(beta, &lm);
    let endpoint_error = [
        alpha[0].chord(&um),
        alpha.last().unwrap().chord(&up),
        beta[0].chord(&lm),
        beta.last().unwrap().chord(&lp),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let (am, ap) = split_at(&alpha, &x);
    let (bm, bp) = split_at(&beta, &x);
    let arr = |c: Vec<PointS3>| c.iter().map(|p| p.to_array()).collect();
    Ok(DiscCurves {
        axis_point: x.to_array(),
        axis_angle: angle,
        alpha_minus: arr(am),
        alpha_plus: arr(ap.into_iter().rev().collect()),
        beta_minus: arr(bm),
        beta_plus: arr(bp.into_iter().rev().collect()),
        endpoint_error,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubdiscPiece {
    /// Signs of the half-spaces of `Σ₀` and `Σ⁰` the piece lies in.
    pub signs: [i8; 2],
    pub euler_characteristic: i64,
    pub boundary_loops: usize,
    pub components: usize,
    pub area: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubdiscReport {
    pub pieces: Vec<SubdiscPiece>,
    /// `|Σ area(piece) − area(D)|`.
    pub area_residual: f64,
}

impl SubdiscReport {
    pub fn passed(&self) -> bool {
        self.area_residual < 1e-9
            && self
                .pieces
                .iter()
                .all(|p| p.euler_characteristic == 1 && p.boundary_loops == 1 && p.components == 1)
    }
}

/// Cuts the disc along `α ∪ β` into its four quarters and checks each is a disc.
pub fn subdisc_checks(mesh: &TriMeshS3, lat: &Lattice) -> SubdiscReport {
    let (n1, n2) = (*lat.sigma_lower(0).normal(), *lat.sigma_upper(0).normal());
    let mut pieces = Vec::new();
    for s1 in [-1i8, 1] {
        for s2 in [-1i8, 1] {
            let piece = mesh.clip(&[n1 * s1 as f64, n2 * s2 as f64]);
            let top = piece.topology();
            pieces.push(SubdiscPiece {
                signs: [s1, s2],
                euler_characteristic: top.euler_characteristic,
                boundary_loops: top.boundary_components,
                components: top.components,
                area: piece.area(),
            });
        }
    }
    let area_residual = (pieces.iter().map(|p| p.area).sum::<f64>() - mesh.area()).abs();
    SubdiscReport { pieces, area_residual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeParams;
    use crate::plateau::initial_disc;

    #[test]
    fn section_of_a_split_square() {
        let lat = Lattice::build(LatticeParams::new(3, 2).unwrap());
        let d = initial_disc(&lat, 3).unwrap();
        // The initial disc is ∂₋, which Σ₀ meets in the two medians through t₀.
        let chains = sphere_section(&d, lat.sigma_lower(0).normal()).unwrap();
        assert_eq!(chains.len(), 1);
        let c = &chains[0];
        let ends = [c[0], *c.last().unwrap()];
        for e in [lat.t_upper(-1), lat.t_upper(1)] {
            assert!(ends.iter().any(|p| p.chord(&e) < 1e-12));
        }
        assert!(c.iter().all(|p| p.coords()[1].abs() < 1e-12));
    }

    #[test]
    fn curves_of_initial_disc_meet_at_t0() {
        let lat = Lattice::build(LatticeParams::new(4, 3).unwrap());
        let d = initial_disc(&lat, 2).unwrap();
        let c = extract_curves(&d, &lat).unwrap();
        assert!(c.axis_angle.abs() < 1e-12);
        assert!((PointS3::from_coords(c.axis_point).unwrap().chord(&lat.t_lower(0))) < 1e-12);
        assert!(c.endpoint_error < 1e-12);
        let r = subdisc_checks(&d, &lat);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn circle_hits_on_a_flat_triangle() {
        let e = |i: usize| PointS3::from_coords(std::array::from_fn(|r| if r == i { 1.0 } else { 0.0 })).unwrap();
        let mesh = TriMeshS3::from_triangles(vec![e(0), e(1), e(2)], vec![[0, 1, 2]]).unwrap();
        // The circle through e₁ and e₄ meets the octant only at e₁.
        let hits = circle_hits(&mesh, e(0).coords(), e(3).coords(), 0.0, FRAC_PI_2);
        assert_eq!(hits.len(), 1);
        assert!(hits[0].1.chord(&e(0)) < 1e-12);
        let far = PointS3::normalize(Vec4::new(1.0, 1.0, 1.0, 0.0)).unwrap();
        let hits = circle_hits(&mesh, far.coords(), e(3).coords(), 0.0, FRAC_PI_2);
        assert_eq!(hits.len(), 1);
    }
}
