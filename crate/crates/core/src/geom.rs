//! Small fixed-size vector helpers for 3D coordinates.

use crate::scalar::Real;

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

#[inline]
pub fn zero<T: Real>() -> Vec3<T> {
    [T::zero(); 3]
}

#[inline]
pub fn add<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale<T: Real>(a: Vec3<T>, s: T) -> Vec3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm_sq<T: Real>(a: Vec3<T>) -> T {
    dot(a, a)
}

#[inline]
pub fn norm<T: Real>(a: Vec3<T>) -> T {
    norm_sq(a).sqrt()
}

#[inline]
pub fn dist<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    norm(sub(a, b))
}

#[inline]
pub fn is_finite<T: Real>(a: Vec3<T>) -> bool {
    a.iter().all(|c| c.is_finite())
}

pub fn identity<T: Real>() -> Mat3<T> {
    let mut m = [[T::zero(); 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn mat_vec<T: Real>(m: &Mat3<T>, v: Vec3<T>) -> Vec3<T> {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

pub fn mat_mul<T: Real>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn transpose<T: Real>(m: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i];
        }
    }
    out
}

pub fn det<T: Real>(m: &Mat3<T>) -> T {
    dot(m[0], cross(m[1], m[2]))
}

/// 64-bit finalizer from SplitMix64; used to derive reproducible pseudo-random values from ids.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Reproducible unit vector for the unordered pair `{a, b}`, oriented so that
/// `pair_direction(a, b) == -pair_direction(b, a)`.
///
/// Stands in for the direction between two coincident points.
pub fn pair_direction<T: Real>(a: usize, b: usize) -> Vec3<T> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut h = splitmix64(((lo as u64) << 32) ^ (hi as u64) ^ 0x5DEE_CE66);
    let mut dir = [0.0f64; 3];
    loop {
        for c in dir.iter_mut() {
            h = splitmix64(h);
            *c = (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
        }
        let len2 = dir.iter().map(|c| c * c).sum::<f64>();
        if len2 > 1e-4 && len2 <= 1.0 {
            let len = len2.sqrt();
            let sign = if a <= b { 1.0 } else { -1.0 };
            return [
                T::lit(sign * dir[0] / len),
                T::lit(sign * dir[1] / len),
                T::lit(sign * dir[2] / len),
            ];
        }
    }
}

/// Singular value decomposition of a 3x3 matrix by one-sided Jacobi rotations.
///
/// Returns `(u, s, v)` with `a = u * diag(s) * v^T`, singular values sorted in
/// descending order and `u`, `v` orthonormal. Columns of `u` belonging to zero
/// singular values are completed to an orthonormal basis.
pub fn svd3<T: Real>(a: &Mat3<T>) -> (Mat3<T>, Vec3<T>, Mat3<T>) {
    // Work on columns: cols[j] is column j of a.
    let mut cols = [[T::zero(); 3]; 3];
    for j in 0..3 {
        for i in 0..3 {
            cols[j][i] = a[i][j];
        }
    }
    // vcols[j] is column j of v.
    let mut vcols: Mat3<T> = identity();
    let eps = T::epsilon();

    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..2 {
            for q in (p + 1)..3 {
                let alpha = norm_sq(cols[p]);
                let beta = norm_sq(cols[q]);
                let gamma = dot(cols[p], cols[q]);
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == T::zero() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for k in 0..3 {
                    let ap = cols[p][k];
                    let aq = cols[q][k];
                    cols[p][k] = c * ap - s * aq;
                    cols[q][k] = s * ap + c * aq;
                    let vp = vcols[p][k];
                    let vq = vcols[q][k];
                    vcols[p][k] = c * vp - s * vq;
                    vcols[q][k] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order = [0usize, 1, 2];
    let sv = [norm(cols[0]), norm(cols[1]), norm(cols[2])];
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap_or(std::cmp::Ordering::Equal));

    let s = [sv[order[0]], sv[order[1]], sv[order[2]]];
    let mut ucols = [[T::zero(); 3]; 3];
    let mut vsorted = [[T::zero(); 3]; 3];
    let tiny = T::lit(1e3) * eps * s[0].max(T::min_positive_value());
    let mut rank = 0;
    for (k, &src) in order.iter().enumerate() {
        vsorted[k] = vcols[src];
        if s[k] > tiny {
            ucols[k] = scale(cols[src], T::one() / s[k]);
            rank += 1;
        }
    }
    // Complete u for rank-deficient input.
    if rank == 0 {
        ucols = identity();
    } else if rank == 1 {
        let u0 = ucols[0];
        let pick = if u0[0].abs() < T::lit(0.9) { [T::one(), T::zero(), T::zero()] } else { [T::zero(), T::one(), T::zero()] };
        let u1 = cross(u0, pick);
        ucols[1] = scale(u1, T::one() / norm(u1));
        ucols[2] = cross(ucols[0], ucols[1]);
    } else if rank == 2 {
        ucols[2] = cross(ucols[0], ucols[1]);
    }

    (transpose(&ucols), s, transpose(&vsorted))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(u: &Mat3<f64>, s: Vec3<f64>, v: &Mat3<f64>) -> Mat3<f64> {
        let mut us = *u;
        for row in us.iter_mut() {
            for j in 0..3 {
                row[j] *= s[j];
            }
        }
        mat_mul(&us, &transpose(v))
    }

    #[test]
    fn svd_reconstructs_general_matrix() {
        let a = [[2.0, -1.0, 0.5], [0.3, 4.0, 1.0], [-2.0, 0.1, 3.0]];
        let (u, s, v) = svd3(&a);
        let r = reconstruct(&u, s, &v);
        for i in 0..3 {
            for j in 0..3 {
                assert!((r[i][j] - a[i][j]).abs() < 1e-12);
            }
        }
        assert!(s[0] >= s[1] && s[1] >= s[2]);
        let utu = mat_mul(&transpose(&u), &u);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((utu[i][j] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_rank_deficient() {
        let a: Mat3<f64> = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 0.0]];
        let (u, s, v) = svd3(&a);
        assert!(s[1].abs() < 1e-12 && s[2].abs() < 1e-12);
        assert!((det(&u).abs() - 1.0).abs() < 1e-12);
        let r = reconstruct(&u, s, &v);
        for i in 0..3 {
            for j in 0..3 {
                assert!((r[i][j] - a[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pair_direction_antisymmetric_unit() {
        for (a, b) in [(0, 1), (5, 3), (17, 1000)] {
            let d: Vec3<f64> = pair_direction(a, b);
            let e: Vec3<f64> = pair_direction(b, a);
            assert!((norm(d) - 1.0).abs() < 1e-12);
            for k in 0..3 {
                assert_eq!(d[k], -e[k]);
            }
        }
    }
}
