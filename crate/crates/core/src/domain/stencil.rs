//! Finite-difference weights on arbitrary 1D node sets (Fornberg's recursion).

use crate::scalar::Real;

/// Weights `w[d][j]` such that `sum_j w[d][j] f(x_j)` approximates the
/// `d`-th derivative of `f` at `x0`, for `d = 0..=max_order`.
pub fn fornberg_weights<T: Real>(x0: T, xs: &[T], max_order: usize) -> Vec<Vec<T>> {
    let n = xs.len();
    let mut c = vec![vec![T::zero(); n]; max_order + 1];
    c[0][0] = T::one();
    let mut c1 = T::one();
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 = c2 * c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    let kk = T::from_usize_(k);
                    c[k][i] = c1 * (kk * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                let kk = T::from_usize_(k);
                c[k][j] = (c4 * c[k][j] - kk * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// A stencil row: node offsets (relative grid indices) with first and second
/// derivative weights already divided by the spacing powers.
#[derive(Clone, Debug)]
pub struct Stencil<T> {
    pub offsets: Vec<isize>,
    pub d1: Vec<T>,
    pub d2: Vec<T>,
}

/// Fourth-order stencils for every index of a uniform grid with `n` nodes and
/// spacing `h`. When `mirror_low` is set, indices below zero are allowed
/// (callers map them through a reflection), so the low end stays centered.
pub fn uniform_stencils<T: Real>(n: usize, h: T, mirror_low: bool) -> Vec<Stencil<T>> {
    (0..n)
        .map(|k| {
            let ki = k as isize;
            let last = n as isize - 1;
            let lo_ok = mirror_low || ki >= 2;
            let hi_ok = ki + 2 <= last;
            let (d1_off, d2_off): (Vec<isize>, Vec<isize>) = if lo_ok && hi_ok {
                ((-2..=2).collect(), (-2..=2).collect())
            } else if !hi_ok {
                // one-sided toward the low end
                let d1: Vec<isize> = (-4 + (last - ki)..=(last - ki)).collect();
                let d2: Vec<isize> = (-5 + (last - ki)..=(last - ki)).collect();
                (d1, d2)
            } else {
                let d1: Vec<isize> = (-ki..=4 - ki).collect();
                let d2: Vec<isize> = (-ki..=5 - ki).collect();
                (d1, d2)
            };
            merge(&d1_off, &d2_off, h)
        })
        .collect()
}

fn merge<T: Real>(d1_off: &[isize], d2_off: &[isize], h: T) -> Stencil<T> {
    let mut offsets: Vec<isize> = d1_off.iter().chain(d2_off).copied().collect();
    offsets.sort_unstable();
    offsets.dedup();
    let pos = |o: &isize| T::lit(*o as f64);
    let w1 = fornberg_weights(T::zero(), &d1_off.iter().map(pos).collect::<Vec<_>>(), 1);
    let w2 = fornberg_weights(T::zero(), &d2_off.iter().map(pos).collect::<Vec<_>>(), 2);
    let mut d1 = vec![T::zero(); offsets.len()];
    let mut d2 = vec![T::zero(); offsets.len()];
    for (j, o) in d1_off.iter().enumerate() {
        let i = offsets.binary_search(o).unwrap();
        d1[i] = w1[1][j] / h;
    }
    for (j, o) in d2_off.iter().enumerate() {
        let i = offsets.binary_search(o).unwrap();
        d2[i] = w2[2][j] / (h * h);
    }
    Stencil { offsets, d1, d2 }
}
