#![allow(dead_code)]

use distgeom::geom::Vec3;
use distgeom::{DistanceConstraint, Embedding, Instance, InstanceMeta};
use rand::Rng;

pub fn random_points<R: Rng>(rng: &mut R, n: usize, side: f64) -> Vec<Vec3<f64>> {
    (0..n).map(|_| [0; 3].map(|_| rng.random::<f64>() * side)).collect()
}

/// Random spanning tree plus `extra` random chords, without duplicates.
pub fn random_connected_edges<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b && !edges.contains(&(a.min(b), a.max(b))) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    edges
}

/// Instance over `pts` with an interval around each true edge length, shifted
/// by up to `noise` so that some intervals miss the true distance.
pub fn noisy_instance<R: Rng>(rng: &mut R, pts: &[Vec3<f64>], edges: &[(usize, usize)], noise: f64) -> Instance<f64> {
    let cons = edges
        .iter()
        .map(|&(a, b)| {
            let d = distgeom::geom::dist(pts[a], pts[b]);
            let shift = (rng.random::<f64>() - 0.5) * 2.0 * noise;
            let half = rng.random::<f64>() * 0.2;
            let lo = (d + shift - half).max(0.0);
            (a, b, DistanceConstraint::interval(lo, (d + shift + half).max(lo)))
        })
        .collect();
    Instance::from_edges(pts.len(), cons, Some(Embedding::new(pts.to_vec())), InstanceMeta::default()).unwrap()
}

/// Random 3x3 proper rotation from a normalized random quaternion.
pub fn random_rotation<R: Rng>(rng: &mut R) -> [[f64; 3]; 3] {
    loop {
        let q: [f64; 4] = [0; 4].map(|_| rng.random::<f64>() * 2.0 - 1.0);
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            let [w, x, y, z] = q.map(|v| v / n);
            return [
                [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
                [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
                [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
            ];
        }
    }
}

pub fn rotate(r: &[[f64; 3]; 3], p: Vec3<f64>) -> Vec3<f64> {
    [0, 1, 2].map(|i| r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2])
}

/// Dense Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}
