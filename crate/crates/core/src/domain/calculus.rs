//! Differential operators on chart samples.
//!
//! Torus: 2D discrete Fourier transform. Disc: spectral in the angle, fourth
//! order finite differences in the radius with reflection through the
//! origin. Rectangle: fourth order finite differences in both directions.

use std::sync::Arc;

use num_traits::Zero;
use rustfft::{Fft, FftPlanner};

use crate::domain::chart::ChartKind;
use crate::domain::stencil::{uniform_stencils, Stencil};
use crate::scalar::{cplx, creal, Real, C};

pub(crate) enum Operators<T: Real> {
    Torus {
        modulus: C<T>,
        n1: usize,
        n2: usize,
        f1: Arc<dyn Fft<T>>,
        i1: Arc<dyn Fft<T>>,
        f2: Arc<dyn Fft<T>>,
        i2: Arc<dyn Fft<T>>,
    },
    Disc {
        radius: T,
        n1: usize,
        n2: usize,
        fwd: Arc<dyn Fft<T>>,
        inv: Arc<dyn Fft<T>>,
        radial: Vec<Stencil<T>>,
    },
    Rectangle {
        n1: usize,
        n2: usize,
        sx: Vec<Stencil<T>>,
        sy: Vec<Stencil<T>>,
    },
}

/// Signed frequency of DFT bin `k` out of `n` (Nyquist reported as `+n/2`).
#[inline]
pub(crate) fn signed_freq(k: usize, n: usize) -> isize {
    if k <= n / 2 {
        k as isize
    } else {
        k as isize - n as isize
    }
}

#[inline]
fn is_nyquist(k: usize, n: usize) -> bool {
    n.is_multiple_of(2) && k == n / 2
}

impl<T: Real> Operators<T> {
    pub(crate) fn new(kind: &ChartKind<T>, n1: usize, n2: usize) -> Self {
        let mut planner = FftPlanner::<T>::new();
        match *kind {
            ChartKind::Torus { modulus } => Operators::Torus {
                modulus,
                n1,
                n2,
                f1: planner.plan_fft_forward(n1),
                i1: planner.plan_fft_inverse(n1),
                f2: planner.plan_fft_forward(n2),
                i2: planner.plan_fft_inverse(n2),
            },
            ChartKind::Disc { radius } => Operators::Disc {
                radius,
                n1,
                n2,
                fwd: planner.plan_fft_forward(n2),
                inv: planner.plan_fft_inverse(n2),
                radial: uniform_stencils(n1, radius / T::from_usize_(n1), true),
            },
            ChartKind::Rectangle { width, height } => Operators::Rectangle {
                n1,
                n2,
                sx: uniform_stencils(n1, width / T::from_usize_(n1 - 1), false),
                sy: uniform_stencils(n2, height / T::from_usize_(n2 - 1), false),
            },
        }
    }

    /// Forward 2D transform of torus samples (unnormalized).
    pub(crate) fn torus_forward(&self, f: &[C<T>]) -> Vec<C<T>> {
        let Operators::Torus { n1, n2, f1, f2, .. } = self else {
            unreachable!("torus transform on non-torus chart")
        };
        fft2(f, *n1, *n2, f1.as_ref(), f2.as_ref())
    }

    /// Inverse 2D transform including the `1/(n1 n2)` normalization.
    pub(crate) fn torus_inverse(&self, spec: &[C<T>]) -> Vec<C<T>> {
        let Operators::Torus { n1, n2, i1, i2, .. } = self else {
            unreachable!("torus transform on non-torus chart")
        };
        let mut out = fft2(spec, *n1, *n2, i1.as_ref(), i2.as_ref());
        let s = T::one() / T::from_usize_(n1 * n2);
        for v in out.iter_mut() {
            *v = *v * s;
        }
        out
    }

    /// Fourier symbol of the Laplacian `4 d_z d_zbar` at bin `(k1, k2)`.
    pub(crate) fn torus_laplacian_symbol(&self, k1: usize, k2: usize) -> T {
        let Operators::Torus {
            modulus, n1, n2, ..
        } = self
        else {
            unreachable!("torus symbol on non-torus chart")
        };
        let m1 = T::lit(signed_freq(k1, *n1) as f64);
        let m2 = T::lit(signed_freq(k2, *n2) as f64);
        let w = creal(m2) - *modulus * m1;
        -T::lit(4.0) * T::PI() * T::PI() * w.norm_sqr() / (modulus.im * modulus.im)
    }

    /// Returns `(d_z f, d_zbar f)`.
    pub(crate) fn partials(&self, f: &[C<T>], nodes: &[C<T>]) -> (Vec<C<T>>, Vec<C<T>>) {
        match self {
            Operators::Torus {
                modulus, n1, n2, ..
            } => {
                let spec = self.torus_forward(f);
                let tau = *modulus;
                let denom = tau.conj() - tau;
                let two_pi_i = cplx(T::zero(), T::TAU());
                let mut dz = vec![C::zero(); spec.len()];
                let mut dzb = vec![C::zero(); spec.len()];
                for k1 in 0..*n1 {
                    let s1 = if is_nyquist(k1, *n1) {
                        C::zero()
                    } else {
                        two_pi_i * T::lit(signed_freq(k1, *n1) as f64)
                    };
                    for k2 in 0..*n2 {
                        let s2 = if is_nyquist(k2, *n2) {
                            C::zero()
                        } else {
                            two_pi_i * T::lit(signed_freq(k2, *n2) as f64)
                        };
                        let idx = k1 * n2 + k2;
                        dz[idx] = spec[idx] * (tau.conj() * s1 - s2) / denom;
                        dzb[idx] = spec[idx] * (s2 - tau * s1) / denom;
                    }
                }
                (self.torus_inverse(&dz), self.torus_inverse(&dzb))
            }
            Operators::Disc { .. } => {
                let (fr, _, ft, _) = self.disc_parts(f, false);
                let mut dz = vec![C::zero(); f.len()];
                let mut dzb = vec![C::zero(); f.len()];
                let i = cplx(T::zero(), T::one());
                let half = T::lit(0.5);
                for idx in 0..f.len() {
                    let z = nodes[idx];
                    let r = z.norm();
                    let e = z / r; // e^{i theta}
                    let ang = i * ft[idx] / r;
                    dz[idx] = e.conj() * (fr[idx] - ang) * half;
                    dzb[idx] = e * (fr[idx] + ang) * half;
                }
                (dz, dzb)
            }
            Operators::Rectangle { .. } => {
                let (fx, fy, _, _) = self.rect_parts(f, false);
                let i = cplx(T::zero(), T::one());
                let half = T::lit(0.5);
                let dz = fx
                    .iter()
                    .zip(&fy)
                    .map(|(a, b)| (*a - i * *b) * half)
                    .collect();
                let dzb = fx
                    .iter()
                    .zip(&fy)
                    .map(|(a, b)| (*a + i * *b) * half)
                    .collect();
                (dz, dzb)
            }
        }
    }

    pub(crate) fn laplacian(&self, f: &[C<T>], nodes: &[C<T>]) -> Vec<C<T>> {
        match self {
            Operators::Torus { n1, n2, .. } => {
                let mut spec = self.torus_forward(f);
                for k1 in 0..*n1 {
                    for k2 in 0..*n2 {
                        spec[k1 * n2 + k2] =
                            spec[k1 * n2 + k2] * self.torus_laplacian_symbol(k1, k2);
                    }
                }
                self.torus_inverse(&spec)
            }
            Operators::Disc { .. } => {
                let (fr, frr, _, ftt) = self.disc_parts(f, true);
                (0..f.len())
                    .map(|idx| {
                        let r = nodes[idx].norm();
                        frr[idx] + fr[idx] / r + ftt[idx] / (r * r)
                    })
                    .collect()
            }
            Operators::Rectangle { .. } => {
                let (_, _, fxx, fyy) = self.rect_parts(f, true);
                fxx.iter().zip(&fyy).map(|(a, b)| *a + *b).collect()
            }
        }
    }

    /// Disc partials: `(f_r, f_rr, f_theta, f_thetatheta)`; second
    /// derivatives only when `second` is set (otherwise empty).
    fn disc_parts(&self, f: &[C<T>], second: bool) -> (Vec<C<T>>, Vec<C<T>>, Vec<C<T>>, Vec<C<T>>) {
        let Operators::Disc {
            n1,
            n2,
            fwd,
            inv,
            radial,
            ..
        } = self
        else {
            unreachable!()
        };
        let (n1, n2) = (*n1, *n2);
        let mut spec = f.to_vec();
        fwd.process(&mut spec);
        let norm = T::one() / T::from_usize_(n2);
        let mut ft = vec![C::zero(); f.len()];
        let mut ftt = if second {
            vec![C::zero(); f.len()]
        } else {
            Vec::new()
        };
        for k in 0..n1 {
            for j in 0..n2 {
                let m = T::lit(signed_freq(j, n2) as f64);
                let v = spec[k * n2 + j] * norm;
                if !is_nyquist(j, n2) {
                    ft[k * n2 + j] = v * cplx(T::zero(), m);
                }
                if second {
                    ftt[k * n2 + j] = v * (-m * m);
                }
            }
        }
        inv.process(&mut ft);
        if second {
            inv.process(&mut ftt);
        }
        let half = n2 / 2;
        let mut fr = vec![C::zero(); f.len()];
        let mut frr = if second {
            vec![C::zero(); f.len()]
        } else {
            Vec::new()
        };
        for (k, st) in radial.iter().enumerate() {
            for j in 0..n2 {
                let (mut a, mut b) = (C::zero(), C::zero());
                for (w, &o) in st.offsets.iter().enumerate() {
                    let ring = k as isize + o;
                    let v = if ring >= 0 {
                        f[ring as usize * n2 + j]
                    } else {
                        f[(-1 - ring) as usize * n2 + (j + half) % n2]
                    };
                    a = a + v * st.d1[w];
                    if second {
                        b = b + v * st.d2[w];
                    }
                }
                fr[k * n2 + j] = a;
                if second {
                    frr[k * n2 + j] = b;
                }
            }
        }
        (fr, frr, ft, ftt)
    }

    /// Rectangle partials `(f_x, f_y, f_xx, f_yy)`.
    fn rect_parts(&self, f: &[C<T>], second: bool) -> (Vec<C<T>>, Vec<C<T>>, Vec<C<T>>, Vec<C<T>>) {
        let Operators::Rectangle { n1, n2, sx, sy } = self else {
            unreachable!()
        };
        let (n1, n2) = (*n1, *n2);
        let len = f.len();
        let mut fx = vec![C::zero(); len];
        let mut fy = vec![C::zero(); len];
        let mut fxx = if second {
            vec![C::zero(); len]
        } else {
            Vec::new()
        };
        let mut fyy = if second {
            vec![C::zero(); len]
        } else {
            Vec::new()
        };
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let idx = i1 * n2 + i2;
                let st = &sx[i1];
                let (mut a, mut b) = (C::zero(), C::zero());
                for (w, &o) in st.offsets.iter().enumerate() {
                    let v = f[(i1 as isize + o) as usize * n2 + i2];
                    a = a + v * st.d1[w];
                    b = b + v * st.d2[w];
                }
                fx[idx] = a;
                let st = &sy[i2];
                let (mut c, mut d) = (C::zero(), C::zero());
                for (w, &o) in st.offsets.iter().enumerate() {
                    let v = f[i1 * n2 + (i2 as isize + o) as usize];
                    c = c + v * st.d1[w];
                    d = d + v * st.d2[w];
                }
                fy[idx] = c;
                if second {
                    fxx[idx] = b;
                    fyy[idx] = d;
                }
            }
        }
        (fx, fy, fxx, fyy)
    }

    /// Radial stencils and geometry of a disc chart.
    pub(crate) fn disc_radial(&self) -> Option<(T, usize, usize, &[Stencil<T>])> {
        match self {
            Operators::Disc {
                radius,
                n1,
                n2,
                radial,
                ..
            } => Some((*radius, *n1, *n2, radial)),
            _ => None,
        }
    }

    pub(crate) fn disc_fft(&self) -> Option<(&Arc<dyn Fft<T>>, &Arc<dyn Fft<T>>)> {
        match self {
            Operators::Disc { fwd, inv, .. } => Some((fwd, inv)),
            _ => None,
        }
    }
}

fn fft2<T: Real>(f: &[C<T>], n1: usize, n2: usize, a1: &dyn Fft<T>, a2: &dyn Fft<T>) -> Vec<C<T>> {
    let mut buf = f.to_vec();
    a2.process(&mut buf);
    let mut tr = vec![C::zero(); buf.len()];
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            tr[i2 * n1 + i1] = buf[i1 * n2 + i2];
        }
    }
    a1.process(&mut tr);
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            buf[i1 * n2 + i2] = tr[i2 * n1 + i1];
        }
    }
    buf
}
