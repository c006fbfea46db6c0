//! Umbilic detection by local quadric fits.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::lattice::Lattice;
use crate::plateau::TriMeshS3;
use crate::s3core::{PointS3, Vec4};

use super::{SurfaceError, WELD_TOL};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UmbilicCandidate {
    pub point: [f64; 4],
    pub vertex: usize,
    /// `|κ₁ − κ₂|` from the quadric fit.
    pub statistic: f64,
    /// Whether the point should be umbilic; the `tᵢ` for `k = 2` are controls.
    pub expected: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UmbilicReport {
    pub candidates: Vec<UmbilicCandidate>,
    pub samples: usize,
    /// 5th percentile of the statistic over the random vertices.
    pub threshold: f64,
    pub sample_median: f64,
    /// Expected candidates below the threshold.
    pub detected: usize,
    pub expected_count: usize,
    /// `4g − 4`, the total umbilic degree.
    pub total_degree: i64,
}

impl UmbilicReport {
    pub fn passed(&self) -> bool {
        self.detected == self.expected_count
            && self.candidates.iter().filter(|c| c.expected).count() == self.expected_count
    }
}

fn tangent_frame(p: &Vec4, n: &Vec4) -> [Vec4; 2] {
    let mut frame: Vec<Vec4> = Vec::with_capacity(2);
    for i in 0..4 {
        let mut v = Vec4::from_fn(|r, _| if r == i { 1.0 } else { 0.0 });
        for u in [p, n].into_iter().chain(frame.iter()) {
            v -= u * u.dot(&v);
        }
        if v.norm() > 0.5 {
            frame.push(v.normalize());
            if frame.len() == 2 {
                break;
            }
        }
    }
    [frame[0], frame[1]]
}

/// `|κ₁ − κ₂|` at vertex `v` from a least-squares quadric over its 2-ring,
/// in gnomonic coordinates centred at the vertex.
pub(crate) fn anisotropy(mesh: &TriMeshS3, nbrs: &[Vec<u32>], normals: &[Vec4], v: usize) -> f64 {
    let p = *mesh.vertex(v).coords();
    let n = normals[v];
    let [e1, e2] = tangent_frame(&p, &n);
    let mut ring: Vec<u32> = nbrs[v].clone();
    for &a in &nbrs[v] {
        ring.extend(&nbrs[a as usize]);
    }
    ring.sort_unstable();
    ring.dedup();
    ring.retain(|&x| x as usize != v);
    let rows = ring.len();
    let mut a = DMatrix::<f64>::zeros(rows, 5);
    let mut z = DVector::<f64>::zeros(rows);
    for (r, &q) in ring.iter().enumerate() {
        let q = mesh.vertex(q as usize).coords();
        let w = q / q.dot(&p) - p;
        let (x, y) = (w.dot(&e1), w.dot(&e2));
        a.row_mut(r).copy_from_slice(&[0.5 * x * x, x * y, 0.5 * y * y, x, y]);
        z[r] = w.dot(&n);
    }
    let Ok(sol) = a.svd(true, true).solve(&z, 1e-14) else {
        return f64::INFINITY;
    };
    let (h11, h12, h22) = (sol[0], sol[1], sol[2]);
    ((h11 - h22).powi(2) + 4.0 * h12 * h12).sqrt()
}

/// Compares the curvature anisotropy at `tʲ` (and `tᵢ`), `i, j ∈ ½ + ℤ`, with
/// `samples` random vertices.
pub fn umbilic_probe<R: Rng + ?Sized>(
    mesh: &TriMeshS3,
    lat: &Lattice,
    samples: usize,
    rng: &mut R,
) -> Result<UmbilicReport, SurfaceError> {
    let (m, k) = (lat.params().m(), lat.params().k());
    let nbrs = mesh.neighbours();
    let normals = mesh.vertex_normals();
    let upper = (0..2 * k).map(|j| (lat.t_upper(2 * j + 1), true));
    let lower = (0..2 * m).map(|i| (lat.t_lower(2 * i + 1), k > 2));
    let mut candidates = Vec::new();
    for (point, expected) in upper.chain(lower) {
        let (vertex, distance) = nearest_vertex(mesh, &point);
        if distance > WELD_TOL {
            return Err(SurfaceError::ProbeMiss {
                point: point.to_array(),
                distance,
            });
        }
        candidates.push(UmbilicCandidate {
            point: point.to_array(),
            vertex,
            statistic: anisotropy(mesh, &nbrs, &normals, vertex),
            expected,
        });
    }
    let mut stats: Vec<f64> = (0..samples)
        .map(|_| anisotropy(mesh, &nbrs, &normals, rng.random_range(0..mesh.vertex_count())))
        .collect();
    stats.sort_by(f64::total_cmp);
    let quantile = |q: f64| {
        stats
            .get(((q * samples as f64) as usize).min(samples.saturating_sub(1)))
            .copied()
            .unwrap_or(f64::NAN)
    };
    let threshold = quantile(0.05);
    let detected = candidates
        .iter()
        .filter(|c| c.expected && c.statistic < threshold)
        .count();
    let genus = (k - 1) * (m - 1);
    Ok(UmbilicReport {
        candidates,
        samples,
        threshold,
        sample_median: quantile(0.5),
        detected,
        expected_count: if k > 2 { (2 * k + 2 * m) as usize } else { 4 },
        total_degree: 4 * genus - 4,
    })
}

fn nearest_vertex(mesh: &TriMeshS3, p: &PointS3) -> (usize, f64) {
    mesh.vertices()
        .iter()
        .enumerate()
        .map(|(i, q)| (i, q.chord(p)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::tests::lawson;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn candidates_sit_below_the_sample_percentile() {
        for (m, k) in [(3, 2), (3, 3)] {
            let (lat, s, _) = lawson(m, k, 3);
            let r = umbilic_probe(&s.mesh, &lat, 1000, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
            assert!(r.passed(), "({m},{k}) {r:?}");
            assert_eq!(r.expected_count, if k == 2 { 4 } else { 12 });
            assert_eq!(r.total_degree, 4 * (k - 1) * (m - 1) - 4);
        }
    }

    #[test]
    fn negative_control_for_k_two() {
        let (lat, s, _) = lawson(3, 2, 3);
        let r = umbilic_probe(&s.mesh, &lat, 1000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let controls: Vec<&UmbilicCandidate> = r.candidates.iter().filter(|c| !c.expected).collect();
        assert_eq!(controls.len(), 6);
        assert!(controls.iter().all(|c| c.statistic > r.threshold), "{r:?}");
    }

    #[test]
    fn missing_candidate_is_reported() {
        let lat = Lattice::build(crate::lattice::LatticeParams::new(3, 2).unwrap());
        let d = crate::plateau::initial_disc(&lat, 2).unwrap();
        let err = umbilic_probe(&d, &lat, 10, &mut ChaCha8Rng::seed_from_u64(0)).unwrap_err();
        assert!(matches!(err, SurfaceError::ProbeMiss { .. }));
    }
}
