//! The diagonal reduction of Hitchin's equations.
//!
//! With `H = diag(e^{w_0}, ..., e^{w_{n-1}})` and `Delta = 4 d_z d_zbar`,
//! row `i` reads
//! `Delta w_i = 4 sum_j (|phi_ij|^2 e^{w_i - w_j} - |phi_ji|^2 e^{w_j - w_i})`.
//! The independent unknowns are `u_k = w_{n-1-k}` with `w_k = -u_k`; the
//! middle entry of an odd rank bundle is identically zero.

use crate::higgs::{BundleKind, HiggsBundleSpec};
use crate::scalar::Real;

/// Squared moduli `|phi_ij|^2` per node of every stored entry.
pub(crate) struct Couplings<T> {
    pub rank: usize,
    pub entries: Vec<(usize, usize, Vec<T>)>,
}

impl<T: Real> Couplings<T> {
    pub fn new(spec: &HiggsBundleSpec<T>) -> Self {
        let entries = spec
            .phi_entries()
            .iter()
            .filter(|(_, f)| !f.is_zero())
            .map(|(&(i, j), f)| (i, j, f.values().iter().map(|z| z.norm_sqr()).collect()))
            .collect();
        Self {
            rank: spec.rank(),
            entries,
        }
    }

    /// Right-hand sides `S_i(w)` at one node.
    pub fn source(&self, node: usize, w: &[T]) -> Vec<T> {
        let four = T::lit(4.0);
        let mut s = vec![T::zero(); self.rank];
        for (i, j, m) in &self.entries {
            let c = m[node] * (w[*i] - w[*j]).exp() * four;
            s[*i] = s[*i] + c;
            s[*j] = s[*j] - c;
        }
        s
    }

    /// `dS_i / dw_l` at one node, row-major `rank x rank`.
    pub fn source_jacobian(&self, node: usize, w: &[T]) -> Vec<T> {
        let n = self.rank;
        let four = T::lit(4.0);
        let mut jac = vec![T::zero(); n * n];
        for (i, j, m) in &self.entries {
            let c = m[node] * (w[*i] - w[*j]).exp() * four;
            // term +c in row i, -c in row j; dc/dw_i = c, dc/dw_j = -c
            jac[i * n + i] = jac[i * n + i] + c;
            jac[i * n + j] = jac[i * n + j] - c;
            jac[j * n + i] = jac[j * n + i] - c;
            jac[j * n + j] = jac[j * n + j] + c;
        }
        jac
    }
}

/// Number of independent unknowns of a directly solved kind.
pub(crate) fn unknown_count(kind: BundleKind) -> usize {
    match kind {
        BundleKind::SL2R | BundleKind::Cyclic3 => 1,
        BundleKind::Cyclic4 => 2,
        BundleKind::TensorSL2xSL2 => 2,
        BundleKind::SymmetricPower(_) => 1,
    }
}

/// Expands independent unknowns into the full exponent vector `w`.
pub(crate) fn expand<T: Real>(rank: usize, u: &[T]) -> Vec<T> {
    let mut w = vec![T::zero(); rank];
    for (k, &uk) in u.iter().enumerate() {
        w[rank - 1 - k] = uk;
        w[k] = -uk;
    }
    w
}
