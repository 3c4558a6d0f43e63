//! Dense symmetric eigensolver for the small pivot matrices of PivotMDS.

use crate::scalar::Real;

/// Eigen-decomposition of a symmetric `k x k` matrix (row-major) by cyclic Jacobi
/// rotations.
///
/// Returns eigenvalues in descending order and the matching unit eigenvectors,
/// `vectors[i]` belonging to `values[i]`.
pub fn symmetric_eigen<T: Real>(matrix: &[T], k: usize) -> (Vec<T>, Vec<Vec<T>>) {
    assert_eq!(matrix.len(), k * k, "matrix must be k x k");
    let mut a = matrix.to_vec();
    // v is row-major; column j holds eigenvector j.
    let mut v = vec![T::zero(); k * k];
    for i in 0..k {
        v[i * k + i] = T::one();
    }

    let total_sq: T = a.iter().map(|x| *x * *x).sum();
    let stop = T::epsilon() * T::epsilon() * total_sq;

    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..k {
            for q in (p + 1)..k {
                off += a[p * k + q] * a[p * k + q];
            }
        }
        if off <= stop || off == T::zero() {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[p * k + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * k + p];
                let aqq = a[q * k + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;

                for r in 0..k {
                    let arp = a[r * k + p];
                    let arq = a[r * k + q];
                    a[r * k + p] = c * arp - s * arq;
                    a[r * k + q] = s * arp + c * arq;
                }
                for r in 0..k {
                    let apr = a[p * k + r];
                    let aqr = a[q * k + r];
                    a[p * k + r] = c * apr - s * aqr;
                    a[q * k + r] = s * apr + c * aqr;
                }
                for r in 0..k {
                    let vrp = v[r * k + p];
                    let vrq = v[r * k + q];
                    v[r * k + p] = c * vrp - s * vrq;
                    v[r * k + q] = s * vrp + c * vrq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        a[j * k + j].partial_cmp(&a[i * k + i]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| a[i * k + i]).collect();
    let vectors = order.iter().map(|&j| (0..k).map(|r| v[r * k + j]).collect()).collect();
    (values, vectors)
}
