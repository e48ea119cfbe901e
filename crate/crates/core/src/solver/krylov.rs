//! Preconditioned Krylov solvers on flat real vectors.

use crate::linalg::{dot, norm};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct KrylovOutcome<T> {
    pub iterations: usize,
    pub residual: T,
    pub converged: bool,
}

/// Conjugate gradients for a symmetric positive definite `apply`, with
/// preconditioner `precond` (also SPD).
pub fn pcg<T: Real>(
    apply: impl Fn(&[T]) -> Vec<T>,
    precond: impl Fn(&[T]) -> Vec<T>,
    b: &[T],
    x: &mut [T],
    rtol: T,
    max_iter: usize,
) -> KrylovOutcome<T> {
    let bnorm = norm(b).max(T::min_positive_value());
    let ax = apply(x);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(a, c)| *a - *c).collect();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        let rn = norm(&r);
        if rn <= rtol * bnorm {
            return KrylovOutcome {
                iterations: it,
                residual: rn / bnorm,
                converged: true,
            };
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= T::zero() {
            return KrylovOutcome {
                iterations: it,
                residual: rn / bnorm,
                converged: false,
            };
        }
        let alpha = rz / pap;
        for i in 0..x.len() {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rn = norm(&r) / bnorm;
    KrylovOutcome {
        iterations: max_iter,
        residual: rn,
        converged: rn <= rtol,
    }
}

/// Right-preconditioned BiCGSTAB for general nonsymmetric systems.
pub fn bicgstab<T: Real>(
    apply: impl Fn(&[T]) -> Vec<T>,
    precond: impl Fn(&[T]) -> Vec<T>,
    b: &[T],
    x: &mut [T],
    rtol: T,
    max_iter: usize,
) -> KrylovOutcome<T> {
    let n = b.len();
    let bnorm = norm(b).max(T::min_positive_value());
    let ax = apply(x);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(a, c)| *a - *c).collect();
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (T::one(), T::one(), T::one());
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    for it in 0..max_iter {
        let rn = norm(&r);
        if rn <= rtol * bnorm {
            return KrylovOutcome {
                iterations: it,
                residual: rn / bnorm,
                converged: true,
            };
        }
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < T::min_positive_value() {
            return KrylovOutcome {
                iterations: it,
                residual: rn / bnorm,
                converged: false,
            };
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let phat = precond(&p);
        v = apply(&phat);
        alpha = rho / dot(&r0, &v);
        let s: Vec<T> = (0..n).map(|i| r[i] - alpha * v[i]).collect();
        if norm(&s) <= rtol * bnorm {
            for i in 0..n {
                x[i] = x[i] + alpha * phat[i];
            }
            return KrylovOutcome {
                iterations: it + 1,
                residual: norm(&s) / bnorm,
                converged: true,
            };
        }
        let shat = precond(&s);
        let t = apply(&shat);
        let tt = dot(&t, &t);
        omega = if tt > T::zero() {
            dot(&t, &s) / tt
        } else {
            T::zero()
        };
        for i in 0..n {
            x[i] = x[i] + alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        if omega == T::zero() {
            let rn = norm(&r) / bnorm;
            return KrylovOutcome {
                iterations: it + 1,
                residual: rn,
                converged: rn <= rtol,
            };
        }
    }
    let rn = norm(&r) / bnorm;
    KrylovOutcome {
        iterations: max_iter,
        residual: rn,
        converged: rn <= rtol,
    }
}
