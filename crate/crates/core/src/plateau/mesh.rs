//! Triangle meshes whose vertices lie on S³ and whose triangles are geodesic.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::s3core::{arc_distance, cross4, Isometry4, PointS3, Vec4};

use super::energy::triangle_area;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error("edge ({a}, {b}) is shared by {count} triangles")]
    NonManifoldEdge { a: u32, b: u32, count: usize },
    #[error("mesh is not orientable")]
    NonOrientable,
    #[error("checkpoint parse error on line {line}: {detail}")]
    Parse { line: usize, detail: String },
}

/// A triangulated surface in S³.
///
/// Triangles are geodesic: the triangle `(a, b, c)` is the cone over its
/// vertices. `orbit[i]` tags the symmetry orbit of vertex `i` by its smallest
/// member.
#[derive(Clone, Debug)]
pub struct TriMeshS3 {
    vertices: Vec<PointS3>,
    triangles: Vec<[u32; 3]>,
    boundary: Vec<bool>,
    orbit: Vec<u32>,
}

/// Counts read off the combinatorics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub euler_characteristic: i64,
    pub boundary_components: usize,
    pub components: usize,
    pub manifold: bool,
    pub orientable: bool,
}

impl TriMeshS3 {
    pub fn new(vertices: Vec<PointS3>, triangles: Vec<[u32; 3]>, boundary: Vec<bool>) -> Result<Self, MeshError> {
        if boundary.len() != vertices.len() {
            return Err(MeshError::Invalid(format!(
                "{} boundary flags for {} vertices",
                boundary.len(),
                vertices.len()
            )));
        }
        let n = vertices.len() as u32;
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(MeshError::Invalid(format!("triangle {t} has an out-of-range vertex")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::Invalid(format!("triangle {t} repeats a vertex")));
            }
        }
        let orbit = (0..n).collect();
        Ok(TriMeshS3 {
            vertices,
            triangles,
            boundary,
            orbit,
        })
    }

    /// Mesh with boundary flags read off the topology.
    pub fn from_triangles(vertices: Vec<PointS3>, triangles: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        let boundary = vec![false; vertices.len()];
        let mut mesh = TriMeshS3::new(vertices, triangles, boundary)?;
        mesh.mark_topological_boundary();
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[PointS3] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &PointS3 {
        &self.vertices[i]
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn orbit_tags(&self) -> &[u32] {
        &self.orbit
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub(crate) fn set_positions(&mut self, positions: Vec<PointS3>) {
        debug_assert_eq!(positions.len(), self.vertices.len());
        self.vertices = positions;
    }

    pub(crate) fn set_orbits(&mut self, orbit: Vec<u32>) {
        debug_assert_eq!(orbit.len(), self.vertices.len());
        self.orbit = orbit;
    }

    pub fn triangle_points(&self, t: usize) -> [PointS3; 3] {
        self.triangles[t].map(|v| self.vertices[v as usize])
    }

    /// Undirected edges with their incident triangles, in sorted order.
    pub fn edge_map(&self) -> BTreeMap<(u32, u32), Vec<u32>> {
        let mut edges: BTreeMap<(u32, u32), Vec<u32>> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                edges.entry((a.min(b), a.max(b))).or_default().push(t as u32);
            }
        }
        edges
    }

    /// Boundary edges directed as they occur in their triangle.
    pub fn boundary_edges(&self) -> Vec<(u32, u32)> {
        let edges = self.edge_map();
        let mut out = Vec::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                if edges[&(a.min(b), a.max(b))].len() == 1 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Sets the boundary flags to the vertices of edges with a single triangle.
    pub fn mark_topological_boundary(&mut self) {
        self.boundary = vec![false; self.vertices.len()];
        for (a, b) in self.boundary_edges() {
            self.boundary[a as usize] = true;
            self.boundary[b as usize] = true;
        }
    }

    /// Closed boundary loops, following edge directions.
    pub fn boundary_loops(&self) -> Vec<Vec<u32>> {
        let mut next: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (a, b) in self.boundary_edges() {
            next.entry(a).or_default().push(b);
        }
        let mut loops = Vec::new();
        while let Some((&start, _)) = next.iter().find(|(_, v)| !v.is_empty()) {
            let mut lp = vec![start];
            let mut cur = start;
            while let Some(n) = next.get_mut(&cur).and_then(Vec::pop) {
                if n == start {
                    break;
                }
                lp.push(n);
                cur = n;
            }
            loops.push(lp);
        }
        loops
    }

    pub fn is_manifold(&self) -> Result<(), MeshError> {
        for (&(a, b), tris) in &self.edge_map() {
            if tris.len() > 2 {
                return Err(MeshError::NonManifoldEdge {
                    a,
                    b,
                    count: tris.len(),
                });
            }
        }
        Ok(())
    }

    /// Every interior edge is traversed once in each direction.
    pub fn is_consistently_oriented(&self) -> bool {
        let mut directed: HashMap<(u32, u32), usize> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                *directed.entry((tri[e], tri[(e + 1) % 3])).or_default() += 1;
            }
        }
        directed.values().all(|&c| c == 1)
    }

    /// Flips triangles so that neighbours agree, component by component; the
    /// lowest-numbered triangle of each component keeps its orientation.
    pub fn orient(&mut self) -> Result<(), MeshError> {
        self.is_manifold()?;
        let edges = self.edge_map();
        let n = self.triangles.len();
        let mut visited = vec![false; n];
        for seed in 0..n {
            if visited[seed] {
                continue;
            }
            visited[seed] = true;
            let mut stack = vec![seed];
            while let Some(t) = stack.pop() {
                let tri = self.triangles[t];
                for e in 0..3 {
                    let (a, b) = (tri[e], tri[(e + 1) % 3]);
                    for &u in &edges[&(a.min(b), a.max(b))] {
                        let u = u as usize;
                        if u == t {
                            continue;
                        }
                        let other = self.triangles[u];
                        let same_direction = (0..3).any(|f| other[f] == a && other[(f + 1) % 3] == b);
                        if visited[u] {
                            if same_direction {
                                return Err(MeshError::NonOrientable);
                            }
                        } else {
                            if same_direction {
                                self.triangles[u].swap(1, 2);
                            }
                            visited[u] = true;
                            stack.push(u);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Connected components of the vertex-triangle incidence graph.
    pub fn component_labels(&self) -> (usize, Vec<usize>) {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for tri in &self.triangles {
            let r0 = find(&mut parent, tri[0] as usize);
            for &v in &tri[1..] {
                let r = find(&mut parent, v as usize);
                if r != r0 {
                    parent[r] = r0;
                }
            }
        }
        let mut labels = vec![usize::MAX; self.vertices.len()];
        let mut roots: BTreeMap<usize, usize> = BTreeMap::new();
        let mut used = vec![false; self.vertices.len()];
        for tri in &self.triangles {
            for &v in tri {
                used[v as usize] = true;
            }
        }
        for v in 0..self.vertices.len() {
            if used[v] {
                let r = find(&mut parent, v);
                let next = roots.len();
                labels[v] = *roots.entry(r).or_insert(next);
            }
        }
        (roots.len(), labels)
    }

    pub fn topology(&self) -> Topology {
        let edges = self.edge_map();
        let used = {
            let mut u = vec![false; self.vertices.len()];
            for tri in &self.triangles {
                for &v in tri {
                    u[v as usize] = true;
                }
            }
            u.iter().filter(|&&x| x).count()
        };
        let manifold = edges.values().all(|t| t.len() <= 2);
        let mut oriented = self.clone();
        let orientable = manifold && oriented.orient().is_ok();
        Topology {
            vertices: used,
            edges: edges.len(),
            triangles: self.triangles.len(),
            euler_characteristic: used as i64 - edges.len() as i64 + self.triangles.len() as i64,
            boundary_components: if orientable {
                oriented.boundary_loops().len()
            } else {
                self.boundary_loops().len()
            },
            components: self.component_labels().0,
            manifold,
            orientable,
        }
    }

    /// Total area of the geodesic triangles.
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|v| *self.vertices[v as usize].coords());
                triangle_area(&a, &b, &c)
            })
            .sum()
    }

    /// Splits every triangle into four at the geodesic midpoints of its edges.
    pub fn subdivide(&self) -> TriMeshS3 {
        let edges = self.edge_map();
        let mut vertices = self.vertices.clone();
        let mut boundary = self.boundary.clone();
        let mut mid: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, vertices: &mut Vec<PointS3>, boundary: &mut Vec<bool>| -> u32 {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let (p, q) = (vertices[key.0 as usize], vertices[key.1 as usize]);
                vertices.push(PointS3::normalize(p.coords() + q.coords()).expect("edge endpoints are not antipodal"));
                boundary.push(edges[&key].len() == 1);
                (vertices.len() - 1) as u32
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = midpoint(a, b, &mut vertices, &mut boundary);
            let bc = midpoint(b, c, &mut vertices, &mut boundary);
            let ca = midpoint(c, a, &mut vertices, &mut boundary);
            triangles.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        let orbit = (0..vertices.len() as u32).collect();
        TriMeshS3 {
            vertices,
            triangles,
            boundary,
            orbit,
        }
    }

    /// Image under an isometry, with the same combinatorics.
    pub fn transformed(&self, g: &Isometry4) -> TriMeshS3 {
        TriMeshS3 {
            vertices: self.vertices.iter().map(|v| g.apply(v)).collect(),
            ..self.clone()
        }
    }

    /// Disjoint union.
    pub fn concat(parts: &[TriMeshS3]) -> TriMeshS3 {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut boundary = Vec::new();
        for p in parts {
            let off = vertices.len() as u32;
            vertices.extend_from_slice(&p.vertices);
            boundary.extend_from_slice(&p.boundary);
            triangles.extend(p.triangles.iter().map(|t| t.map(|v| v + off)));
        }
        let orbit = (0..vertices.len() as u32).collect();
        TriMeshS3 {
            vertices,
            triangles,
            boundary,
            orbit,
        }
    }

    /// Merges vertices closer than `tol` (chordal), keeping the first of each
    /// cluster, drops collapsed triangles and recomputes the boundary.
    pub fn weld(&self, tol: f64) -> TriMeshS3 {
        let mut grid = PointGrid::new(tol);
        let mut vertices = Vec::new();
        let mut map = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            let id = match grid.find(&vertices, v, tol) {
                Some(id) => id,
                None => {
                    vertices.push(*v);
                    grid.insert(v, vertices.len() - 1);
                    vertices.len() - 1
                }
            };
            map.push(id as u32);
        }
        let triangles: Vec<[u32; 3]> = self
            .triangles
            .iter()
            .map(|t| t.map(|v| map[v as usize]))
            .filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
            .collect();
        let mut mesh = TriMeshS3 {
            boundary: vec![false; vertices.len()],
            orbit: (0..vertices.len() as u32).collect(),
            vertices,
            triangles,
        };
        mesh.mark_topological_boundary();
        mesh
    }

    /// The part of the mesh in `{x : n·x ≥ 0 for every n}`, cut along the
    /// great spheres and re-triangulated.
    pub fn clip(&self, normals: &[Vec4]) -> TriMeshS3 {
        const ON: f64 = 1e-13;
        let mut points: Vec<PointS3> = Vec::new();
        let mut triangles = Vec::new();
        for t in 0..self.triangles.len() {
            let mut poly: Vec<Vec4> = self.triangle_points(t).iter().map(|p| *p.coords()).collect();
            for n in normals {
                if poly.is_empty() {
                    break;
                }
                let s: Vec<f64> = poly.iter().map(|x| n.dot(x)).collect();
                if s.iter().all(|&v| v >= -ON) {
                    continue;
                }
                let mut out = Vec::with_capacity(poly.len() + 1);
                for a in 0..poly.len() {
                    let b = (a + 1) % poly.len();
                    let (ina, inb) = (s[a] >= -ON, s[b] >= -ON);
                    if ina {
                        out.push(poly[a]);
                    }
                    if ina != inb && (s[a] > ON || s[b] > ON) {
                        let (i, o) = if ina { (a, b) } else { (b, a) };
                        out.push((poly[o] * s[i] - poly[i] * s[o]).normalize());
                    }
                }
                poly = out;
            }
            if poly.len() < 3 {
                continue;
            }
            let base = points.len() as u32;
            points.extend(poly.iter().map(|x| PointS3::from_unit_unchecked(x.normalize())));
            for f in 1..poly.len() as u32 - 1 {
                triangles.push([base, base + f, base + f + 1]);
            }
        }
        let raw = TriMeshS3 {
            boundary: vec![false; points.len()],
            orbit: (0..points.len() as u32).collect(),
            vertices: points,
            triangles,
        };
        raw.weld(1e-11).compact()
    }

    /// Removes vertices not used by any triangle.
    pub fn compact(&self) -> TriMeshS3 {
        let mut map = vec![u32::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        let mut boundary = Vec::new();
        let mut triangles = Vec::with_capacity(self.triangles.len());
        for t in &self.triangles {
            triangles.push(t.map(|v| {
                if map[v as usize] == u32::MAX {
                    map[v as usize] = vertices.len() as u32;
                    vertices.push(self.vertices[v as usize]);
                    boundary.push(self.boundary[v as usize]);
                }
                map[v as usize]
            }));
        }
        let mut mesh = TriMeshS3 {
            orbit: (0..vertices.len() as u32).collect(),
            vertices,
            triangles,
            boundary,
        };
        mesh.mark_topological_boundary();
        mesh
    }

    /// Unit normals tangent to S³, averaged over the incident triangles with
    /// weights `|x_a ∧ x_b ∧ x_c|` and oriented by the triangle order.
    pub fn vertex_normals(&self) -> Vec<Vec4> {
        let mut acc = vec![Vec4::zeros(); self.vertices.len()];
        for t in 0..self.triangles.len() {
            let n = self.triangle_normal(t);
            for &v in &self.triangles[t] {
                acc[v as usize] += n;
            }
        }
        acc.iter()
            .zip(&self.vertices)
            .map(|(n, x)| {
                let t = x.tangent_part(n);
                let len = t.norm();
                if len > 0.0 {
                    t / len
                } else {
                    t
                }
            })
            .collect()
    }

    /// `x_a ∧ x_b ∧ x_c` as a vector: normal to the great sphere of the
    /// triangle, with length the volume of the spanned parallelepiped.
    pub fn triangle_normal(&self, t: usize) -> Vec4 {
        let [a, b, c] = self.triangles[t].map(|v| *self.vertices[v as usize].coords());
        cross4(&a, &b, &c)
    }

    /// Vertex-to-vertex adjacency lists, sorted.
    pub fn neighbours(&self) -> Vec<Vec<u32>> {
        let mut nb: Vec<Vec<u32>> = vec![Vec::new(); self.vertices.len()];
        for (a, b) in self.edge_map().keys() {
            nb[*a as usize].push(*b);
            nb[*b as usize].push(*a);
        }
        for n in &mut nb {
            n.sort_unstable();
        }
        nb
    }

    /// Mean chordal edge length.
    pub fn mean_edge_length(&self) -> f64 {
        let edges = self.edge_map();
        let total: f64 = edges
            .keys()
            .map(|&(a, b)| self.vertices[a as usize].chord(&self.vertices[b as usize]))
            .sum();
        total / edges.len().max(1) as f64
    }

    /// Chordal distance from `p` to the nearest point of the mesh.
    pub fn distance_to(&self, p: &PointS3) -> f64 {
        (0..self.triangles.len())
            .map(|t| triangle_distance(&self.triangle_points(t), p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Index map `i ↦ j` with `g(vᵢ) = vⱼ` within `tol`, if `g` permutes the vertices.
    pub fn vertex_permutation(&self, g: &Isometry4, tol: f64) -> Option<Vec<u32>> {
        let grid = PointGrid::build(&self.vertices, tol);
        self.vertices
            .iter()
            .map(|v| grid.find(&self.vertices, &g.apply(v), tol).map(|j| j as u32))
            .collect()
    }

    pub fn document(&self) -> MeshDocument {
        MeshDocument {
            vertices: self.vertices.iter().map(|v| v.to_array()).collect(),
            triangles: self.triangles.clone(),
            boundary: self.boundary.clone(),
            orbit: self.orbit.clone(),
        }
    }

    pub fn from_document(doc: &MeshDocument) -> Result<TriMeshS3, MeshError> {
        let vertices = doc
            .vertices
            .iter()
            .map(|&c| PointS3::from_coords(c).map_err(|e| MeshError::Invalid(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut mesh = TriMeshS3::new(vertices, doc.triangles.clone(), doc.boundary.clone())?;
        if doc.orbit.len() == mesh.vertices.len() {
            mesh.orbit = doc.orbit.clone();
        }
        Ok(mesh)
    }

    /// OBJ with the first three coordinates on `v` lines and the fourth in a
    /// `#w` comment after each.
    pub fn write_obj_4d<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# vertices on S3; the 4th coordinate follows each v line as '#w'")?;
        for v in &self.vertices {
            let [x, y, z, w] = v.to_array();
            writeln!(out, "v {x:.17e} {y:.17e} {z:.17e}")?;
            writeln!(out, "#w {w:.17e}")?;
        }
        for t in &self.triangles {
            writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    }

    pub fn read_obj_4d<R: BufRead>(input: R) -> Result<TriMeshS3, MeshError> {
        let mut coords: Vec<[f64; 4]> = Vec::new();
        let mut triangles = Vec::new();
        let mut pending = false;
        for (n, line) in input.lines().enumerate() {
            let err = |detail: String| MeshError::Parse { line: n + 1, detail };
            let line = line.map_err(|e| err(e.to_string()))?;
            let mut it = line.split_whitespace();
            let num = |s: Option<&str>| -> Result<f64, MeshError> {
                s.ok_or_else(|| err("missing field".into()))?
                    .parse::<f64>()
                    .map_err(|e| err(e.to_string()))
            };
            match it.next() {
                Some("v") => {
                    if pending {
                        return Err(err("vertex without #w line".into()));
                    }
                    coords.push([num(it.next())?, num(it.next())?, num(it.next())?, 0.0]);
                    pending = true;
                }
                Some("#w") => {
                    let last = coords
                        .last_mut()
                        .filter(|_| pending)
                        .ok_or_else(|| err("stray #w line".into()))?;
                    last[3] = num(it.next())?;
                    pending = false;
                }
                Some("f") => {
                    let mut idx = [0u32; 3];
                    for slot in &mut idx {
                        let s = it.next().ok_or_else(|| err("short face".into()))?;
                        let first = s.split('/').next().unwrap_or(s);
                        let v: u32 = first.parse().map_err(|e: std::num::ParseIntError| err(e.to_string()))?;
                        *slot = v.checked_sub(1).ok_or_else(|| err("face indices are 1-based".into()))?;
                    }
                    triangles.push(idx);
                }
                _ => {}
            }
        }
        if pending {
            return Err(MeshError::Parse {
                line: 0,
                detail: "last vertex has no #w line".into(),
            });
        }
        let vertices = coords
            .into_iter()
            .map(|c| PointS3::normalize(Vec4::from(c)).map_err(|e| MeshError::Invalid(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        TriMeshS3::from_triangles(vertices, triangles)
    }
}

/// JSON form of a mesh: exact coordinates, 0-based triangles, boundary flags
/// and orbit tags.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MeshDocument {
    pub vertices: Vec<[f64; 4]>,
    pub triangles: Vec<[u32; 3]>,
    pub boundary: Vec<bool>,
    pub orbit: Vec<u32>,
}

/// Chordal distance from `p` to the geodesic triangle `tri`.
pub fn triangle_distance(tri: &[PointS3; 3], p: &PointS3) -> f64 {
    let [a, b, c] = tri.map(|v| *v.coords());
    let n = cross4(&a, &b, &c);
    let nn = n.norm();
    if nn > 1e-300 {
        let n = n / nn;
        let q = p.coords() - n * n.dot(p.coords());
        if q.norm() > 1e-15 && in_cone(&a, &b, &c, &q) {
            return (p.coords() - q.normalize()).norm();
        }
    }
    arc_distance(&tri[0], &tri[1], p)
        .min(arc_distance(&tri[1], &tri[2], p))
        .min(arc_distance(&tri[2], &tri[0], p))
}

/// Coefficients of `q` in the basis `a, b, c` of their span (least squares).
pub(crate) fn cone_coefficients(a: &Vec4, b: &Vec4, c: &Vec4, q: &Vec4) -> Option<[f64; 3]> {
    let g = nalgebra::Matrix3::new(
        a.dot(a),
        a.dot(b),
        a.dot(c),
        b.dot(a),
        b.dot(b),
        b.dot(c),
        c.dot(a),
        c.dot(b),
        c.dot(c),
    );
    let r = nalgebra::Vector3::new(a.dot(q), b.dot(q), c.dot(q));
    let x = g.lu().solve(&r)?;
    Some([x[0], x[1], x[2]])
}

fn in_cone(a: &Vec4, b: &Vec4, c: &Vec4, q: &Vec4) -> bool {
    cone_coefficients(a, b, c, q).is_some_and(|x| x.iter().all(|&v| v >= -1e-12))
}

/// Uniform hash grid on R⁴ for tolerance lookups among points of S³.
#[derive(Clone, Debug)]
pub(crate) struct PointGrid {
    cell: f64,
    buckets: HashMap<[i64; 4], Vec<usize>>,
}

impl PointGrid {
    pub(crate) fn new(tol: f64) -> PointGrid {
        PointGrid {
            cell: (4.0 * tol).max(1e-12),
            buckets: HashMap::new(),
        }
    }

    pub(crate) fn build(points: &[PointS3], tol: f64) -> PointGrid {
        let mut g = PointGrid::new(tol);
        for (i, p) in points.iter().enumerate() {
            g.insert(p, i);
        }
        g
    }

    fn key(&self, p: &PointS3) -> [i64; 4] {
        p.to_array().map(|x| (x / self.cell).floor() as i64)
    }

    pub(crate) fn insert(&mut self, p: &PointS3, i: usize) {
        let k = self.key(p);
        self.buckets.entry(k).or_default().push(i);
    }

    /// Lowest-numbered stored point within `tol` of `p`.
    pub(crate) fn find(&self, points: &[PointS3], p: &PointS3, tol: f64) -> Option<usize> {
        let k = self.key(p);
        let mut best: Option<usize> = None;
        for d in 0..81 {
            let off = [d % 3, (d / 3) % 3, (d / 9) % 3, d / 27].map(|o| o as i64 - 1);
            let key = [k[0] + off[0], k[1] + off[1], k[2] + off[2], k[3] + off[3]];
            if let Some(ids) = self.buckets.get(&key) {
                for &i in ids {
                    if points[i].chord(p) <= tol && best.is_none_or(|b| i < b) {
                        best = Some(i);
                    }
                }
            }
        }
        best
    }

    /// Chordal distance to the nearest stored point, scanning everything when
    /// nothing lies in the neighbouring cells.
    pub(crate) fn nearest_distance(&self, points: &[PointS3], p: &PointS3) -> f64 {
        let k = self.key(p);
        let mut best = f64::INFINITY;
        for d in 0..81 {
            let off = [d % 3, (d / 3) % 3, (d / 9) % 3, d / 27].map(|o| o as i64 - 1);
            let key = [k[0] + off[0], k[1] + off[1], k[2] + off[2], k[3] + off[3]];
            if let Some(ids) = self.buckets.get(&key) {
                for &i in ids {
                    best = best.min(points[i].chord(p));
                }
            }
        }
        if best <= self.cell {
            best
        } else {
            points.iter().map(|q| q.chord(p)).fold(f64::INFINITY, f64::min)
        }
    }
}
