use crate::error::{Error, Result};
use crate::linalg::LaplacianSystem;
use crate::scalar::Real;

/// Result of one iterative solve.
#[derive(Debug, Clone)]
pub struct CgOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Final residual norm `|L x - b~|` for the projected right-hand side `b~`.
    pub residual: T,
    pub rhs_norm: T,
    pub converged: bool,
}

/// Backend for the Laplacian systems arising in each majorization step.
pub trait LaplacianSolver<T: Real>: Sync {
    fn solve(&self, system: &LaplacianSystem<T>, b: &[T], guess: &[T]) -> Result<CgOutcome<T>>;
}

/// Plain conjugate gradient on the component-projected system.
#[derive(Debug, Clone, Copy)]
pub struct ConjugateGradient<T> {
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> LaplacianSolver<T> for ConjugateGradient<T> {
    fn solve(&self, system: &LaplacianSystem<T>, b: &[T], guess: &[T]) -> Result<CgOutcome<T>> {
        solve_cg(system, b, self.tol, self.max_iter, guess)
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Solves `L x = b` in the least-squares sense.
///
/// `b` and the iterates are projected onto the complement of each component's
/// constant vector, so the returned solution has zero mean per component. Stops
/// once `|r| <= tol * |b~|` or after `max_iter` iterations.
pub fn solve_cg<T: Real>(
    system: &LaplacianSystem<T>,
    b: &[T],
    tol: T,
    max_iter: usize,
    guess: &[T],
) -> Result<CgOutcome<T>> {
    let n = system.n();
    if b.len() != n {
        return Err(Error::SizeMismatch { expected: n, actual: b.len() });
    }
    if !guess.is_empty() && guess.len() != n {
        return Err(Error::SizeMismatch { expected: n, actual: guess.len() });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite right-hand side".into()));
    }

    let mut rhs = b.to_vec();
    system.project(&mut rhs);
    let rhs_norm = dot(&rhs, &rhs).sqrt();
    if rhs_norm == T::zero() {
        return Ok(CgOutcome { x: vec![T::zero(); n], iterations: 0, residual: T::zero(), rhs_norm, converged: true });
    }

    let mut x = if guess.is_empty() || guess.iter().any(|v| !v.is_finite()) {
        vec![T::zero(); n]
    } else {
        guess.to_vec()
    };
    system.project(&mut x);

    let mut ap = vec![T::zero(); n];
    system.apply(&x, &mut ap);
    let mut r: Vec<T> = rhs.iter().zip(&ap).map(|(b, a)| *b - *a).collect();
    system.project(&mut r);
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    let target = tol * rhs_norm;

    let mut iterations = 0;
    while rs.sqrt() > target && iterations < max_iter {
        system.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            break;
        }
        let step = rs / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        // Keep rounding drift out of the nullspace.
        system.project(&mut r);
        let rs_new = dot(&r, &r);
        let beta = rs_new / rs;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs = rs_new;
        iterations += 1;
    }
    system.project(&mut x);

    // Report the true residual rather than the recursively updated one.
    system.apply(&x, &mut ap);
    let residual = rhs.iter().zip(&ap).map(|(b, a)| (*b - *a) * (*b - *a)).sum::<T>().sqrt();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("conjugate gradient produced a non-finite iterate".into()));
    }
    Ok(CgOutcome { x, iterations, residual, rhs_norm, converged: residual <= target })
}
