//! Preconditioners for the Newton systems `(Delta - C) delta = -F`, where
//! `C` is a small `nu x nu` matrix per node.

use num_traits::Zero;

use crate::domain::calculus::{signed_freq, Operators};
use crate::domain::DomainChart;
use crate::linalg::{Lu, RMat};
use crate::scalar::{cplx, Real, C};

pub(crate) enum Precond<T: Real> {
    /// Fourier-diagonal inverse of `Delta - mean(C)`.
    Torus { inv: Vec<Vec<T>> },
    /// Per angular mode dense radial solves with ring-averaged `C`.
    Disc { lus: Vec<Lu<T>>, rings: usize },
    /// Pointwise inverse of the operator diagonal.
    Jacobi { inv_diag: Vec<T> },
}

fn inv_small<T: Real>(m: &[T], nu: usize) -> Vec<T> {
    match nu {
        1 => vec![T::one() / m[0]],
        2 => {
            let det = m[0] * m[3] - m[1] * m[2];
            vec![m[3] / det, -m[1] / det, -m[2] / det, m[0] / det]
        }
        _ => unreachable!("at most two independent unknowns"),
    }
}

impl<T: Real> Precond<T> {
    /// `cmat[node]` is the row-major `nu x nu` coupling at the node.
    pub fn build(chart: &DomainChart<T>, nu: usize, cmat: &[Vec<T>]) -> Self {
        let n = chart.len();
        let (n1, n2) = chart.resolution();
        match &chart.ops {
            Operators::Torus { .. } => {
                let mut mean = vec![T::zero(); nu * nu];
                for c in cmat {
                    for (m, v) in mean.iter_mut().zip(c) {
                        *m = *m + *v;
                    }
                }
                for m in mean.iter_mut() {
                    *m = *m / T::from_usize_(n);
                }
                let mut inv = Vec::with_capacity(n);
                for k1 in 0..n1 {
                    for k2 in 0..n2 {
                        let lam = chart.ops.torus_laplacian_symbol(k1, k2);
                        let mut a: Vec<T> = mean.iter().map(|&v| -v).collect();
                        for p in 0..nu {
                            a[p * nu + p] = a[p * nu + p] + lam;
                        }
                        let det = if nu == 1 {
                            a[0]
                        } else {
                            a[0] * a[3] - a[1] * a[2]
                        };
                        if det.abs() < T::lit(1e-14) {
                            // zero mode of a singular average; leave untouched
                            inv.push(vec![T::zero(); nu * nu]);
                        } else {
                            inv.push(inv_small(&a, nu));
                        }
                    }
                }
                Precond::Torus { inv }
            }
            Operators::Disc { .. } => {
                let (_, n1, n2, radial) = chart.ops.disc_radial().expect("disc chart");
                let rings = n1 - 1;
                let mut cbar = vec![vec![T::zero(); nu * nu]; rings];
                for (k, cb) in cbar.iter_mut().enumerate() {
                    for j in 0..n2 {
                        for (m, v) in cb.iter_mut().zip(&cmat[k * n2 + j]) {
                            *m = *m + *v;
                        }
                    }
                    for m in cb.iter_mut() {
                        *m = *m / T::from_usize_(n2);
                    }
                }
                let radii: Vec<T> = (0..rings)
                    .map(|k| chart.polar(chart.index(k, 0)).unwrap().0)
                    .collect();
                let mut lus = Vec::with_capacity(n2 / 2 + 1);
                for bin in 0..=n2 / 2 {
                    let m = T::lit(signed_freq(bin, n2) as f64);
                    let parity = if bin % 2 == 0 { T::one() } else { -T::one() };
                    let size = nu * rings;
                    let mut a = RMat::zeros(size, size);
                    for k in 0..rings {
                        let r = radii[k];
                        let st = &radial[k];
                        for (w, &o) in st.offsets.iter().enumerate() {
                            let ring = k as isize + o;
                            let (ring, sign) = if ring >= 0 {
                                (ring as usize, T::one())
                            } else {
                                ((-1 - ring) as usize, parity)
                            };
                            if ring >= rings {
                                continue; // Dirichlet ring, correction vanishes
                            }
                            let coef = (st.d2[w] + st.d1[w] / r) * sign;
                            for p in 0..nu {
                                a[(p * rings + k, p * rings + ring)] =
                                    a[(p * rings + k, p * rings + ring)] + coef;
                            }
                        }
                        for p in 0..nu {
                            a[(p * rings + k, p * rings + k)] =
                                a[(p * rings + k, p * rings + k)] - m * m / (r * r);
                            for q in 0..nu {
                                a[(p * rings + k, q * rings + k)] =
                                    a[(p * rings + k, q * rings + k)] - cbar[k][p * nu + q];
                            }
                        }
                    }
                    lus.push(a.lu().expect("radial mode operator is nonsingular"));
                }
                Precond::Disc { lus, rings }
            }
            Operators::Rectangle { .. } => {
                // diagonal of the 4th-order Laplacian at interior points
                let probe = {
                    let mut e = vec![C::zero(); n];
                    let mid = chart.index(n1 / 2, n2 / 2);
                    e[mid] = C::new(T::one(), T::zero());
                    chart.ops.laplacian(&e, chart.nodes())[mid].re
                };
                let mut inv_diag = vec![T::zero(); nu * n];
                for node in 0..n {
                    for p in 0..nu {
                        inv_diag[p * n + node] = T::one() / (probe - cmat[node][p * nu + p]);
                    }
                }
                Precond::Jacobi { inv_diag }
            }
        }
    }

    /// Applies the approximate inverse of `Delta - C`; boundary entries of the
    /// result are zeroed by the caller.
    pub fn apply(&self, chart: &DomainChart<T>, nu: usize, r: &[T]) -> Vec<T> {
        let n = chart.len();
        let n2 = chart.resolution().1;
        match self {
            Precond::Torus { inv } => {
                let specs: Vec<Vec<C<T>>> = (0..nu)
                    .map(|p| {
                        let c: Vec<C<T>> = r[p * n..(p + 1) * n]
                            .iter()
                            .map(|&x| cplx(x, T::zero()))
                            .collect();
                        chart.ops.torus_forward(&c)
                    })
                    .collect();
                let mut out = vec![T::zero(); nu * n];
                let mut solved = vec![vec![C::zero(); n]; nu];
                for bin in 0..n {
                    let m = &inv[bin];
                    for p in 0..nu {
                        let mut acc = C::zero();
                        for q in 0..nu {
                            acc = acc + specs[q][bin] * m[p * nu + q];
                        }
                        solved[p][bin] = acc;
                    }
                }
                for p in 0..nu {
                    let back = chart.ops.torus_inverse(&solved[p]);
                    for (o, v) in out[p * n..(p + 1) * n].iter_mut().zip(back) {
                        *o = v.re;
                    }
                }
                out
            }
            Precond::Disc { lus, rings } => {
                let (fwd, inv) = chart.ops.disc_fft().expect("disc chart");
                let rings = *rings;
                // spectra[p][k][bin]
                let mut spec = vec![C::zero(); nu * rings * n2];
                for p in 0..nu {
                    for k in 0..rings {
                        let row = &mut spec[(p * rings + k) * n2..(p * rings + k + 1) * n2];
                        for j in 0..n2 {
                            row[j] = cplx(r[p * n + k * n2 + j], T::zero());
                        }
                        fwd.process(row);
                    }
                }
                let size = nu * rings;
                for bin in 0..n2 {
                    let lu = &lus[bin.min(n2 - bin)];
                    let re: Vec<T> = (0..size).map(|i| spec[i * n2 + bin].re).collect();
                    let im: Vec<T> = (0..size).map(|i| spec[i * n2 + bin].im).collect();
                    let (xr, xi) = (lu.solve(&re), lu.solve(&im));
                    for i in 0..size {
                        spec[i * n2 + bin] = cplx(xr[i], xi[i]);
                    }
                }
                let mut out = vec![T::zero(); nu * n];
                let scale = T::one() / T::from_usize_(n2);
                for p in 0..nu {
                    for k in 0..rings {
                        let row = &mut spec[(p * rings + k) * n2..(p * rings + k + 1) * n2];
                        inv.process(row);
                        for j in 0..n2 {
                            out[p * n + k * n2 + j] = row[j].re * scale;
                        }
                    }
                }
                out
            }
            Precond::Jacobi { inv_diag } => r.iter().zip(inv_diag).map(|(a, b)| *a * *b).collect(),
        }
    }
}
