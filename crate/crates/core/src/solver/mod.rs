//! Newton solver for the diagonal harmonic metric.

pub mod krylov;
mod precond;
pub(crate) mod toda;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{laplacian_real, ComplexField, DomainChart};
use crate::error::{Error, Result};
use crate::higgs::{check_stability, BundleKind, HiggsBundleSpec};
use crate::scalar::Real;

use self::krylov::{bicgstab, pcg};
use self::precond::Precond;
use self::toda::{expand, unknown_count, Couplings};

/// Dirichlet data for one independent diagonal entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryProfile {
    Constant(f64),
    /// `scale * (1 - |z|^2)^(-power)`.
    Poincare {
        scale: f64,
        power: f64,
    },
    /// One value per boundary node, in node order.
    Samples(Vec<f64>),
}

impl BoundaryProfile {
    pub fn eval<T: Real>(&self, chart: &DomainChart<T>, node: usize, slot: usize) -> T {
        match self {
            BoundaryProfile::Constant(c) => T::lit(*c),
            BoundaryProfile::Poincare { scale, power } => {
                let r2 = chart.node(node).norm_sqr();
                T::lit(*scale) * (T::one() - r2).powf(-T::lit(*power))
            }
            BoundaryProfile::Samples(v) => T::lit(v[slot]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Boundary {
    Periodic,
    /// One profile per independent entry. The profiles give the last
    /// diagonal entries `h_n, h_{n-1}, ...` (for SL(2,R), `h` in
    /// `H = diag(1/h, h)`); tensor products take one profile per factor.
    Dirichlet(Vec<BoundaryProfile>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialGuess<T> {
    Zero,
    /// Pointwise algebraic balance where the data is nowhere zero, else `Zero`.
    ConstantBalance,
    /// Logarithms `u_k` of the independent entries, one field per unknown.
    Provided(Vec<Vec<T>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub max_iterations: usize,
    /// Target for `max |F|`. When Newton stalls before reaching it, the
    /// iterate is still accepted if `max |F|` is below the tolerance times
    /// `max(1, sup |S|)`, the size of the source terms.
    pub residual_tolerance: T,
    pub damping: T,
    pub boundary: Boundary,
    pub initial_guess: InitialGuess<T>,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            residual_tolerance: T::lit(1e-10),
            damping: T::one(),
            boundary: Boundary::Periodic,
            initial_guess: InitialGuess::ConstantBalance,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn dirichlet(profiles: Vec<BoundaryProfile>) -> Self {
        Self {
            boundary: Boundary::Dirichlet(profiles),
            ..Self::default()
        }
    }
}

/// Diagonal harmonic metric `H = diag(h_1, ..., h_n)` with its certificate.
#[derive(Clone, Debug)]
pub struct HarmonicMetric<T: Real> {
    chart: Arc<DomainChart<T>>,
    kind: BundleKind,
    entries: Vec<Vec<T>>,
    /// Independent re-evaluation of the reduced equations, max over nodes.
    pub residual: T,
    /// Residual reported by the Newton loop.
    pub solver_residual: T,
    pub iterations: usize,
    pub converged: bool,
    factors: Vec<HarmonicMetric<T>>,
}

impl<T: Real> HarmonicMetric<T> {
    pub fn chart(&self) -> &Arc<DomainChart<T>> {
        &self.chart
    }

    pub fn kind(&self) -> BundleKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<T>] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &[T] {
        &self.entries[i]
    }

    /// Diagonal of `H` at a node.
    pub fn diag_at(&self, node: usize) -> Vec<T> {
        self.entries.iter().map(|e| e[node]).collect()
    }

    /// The scalar `h` of an SL(2,R) metric `diag(1/h, h)`.
    pub fn h(&self) -> &[T] {
        &self.entries[self.rank() - 1]
    }

    /// Metrics of the SL(2,R) factors of a tensor product or symmetric power.
    pub fn factors(&self) -> &[HarmonicMetric<T>] {
        &self.factors
    }

    /// Builds a metric from given diagonal entries (for checks on closed-form
    /// candidates); the residual is evaluated against `spec`.
    pub fn from_entries(spec: &HiggsBundleSpec<T>, entries: Vec<Vec<T>>) -> Result<Self> {
        assert_eq!(entries.len(), spec.rank());
        let mut m = Self {
            chart: spec.chart().clone(),
            kind: spec.kind(),
            entries,
            residual: T::zero(),
            solver_residual: T::zero(),
            iterations: 0,
            converged: true,
            factors: Vec::new(),
        };
        m.residual = max(&hitchin_residual(spec, &m)?);
        m.solver_residual = m.residual;
        Ok(m)
    }

    /// `max |prod h_i - 1|` over nodes.
    pub fn det_defect(&self) -> T {
        (0..self.chart.len())
            .map(|n| {
                (self
                    .entries
                    .iter()
                    .map(|e| e[n])
                    .fold(T::one(), |p, x| p * x)
                    - T::one())
                .abs()
            })
            .fold(T::zero(), T::max)
    }
}

fn max<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Per-node residual `max_i |Delta w_i - S_i(w)|` of the reduced equations at
/// `w_i = log h_i`, evaluated with the chart operators. Dirichlet nodes are
/// reported as zero.
pub fn hitchin_residual<T: Real>(
    spec: &HiggsBundleSpec<T>,
    metric: &HarmonicMetric<T>,
) -> Result<Vec<T>> {
    if **spec.chart() != *metric.chart {
        return Err(Error::ChartMismatch);
    }
    let chart = spec.chart();
    let n = chart.len();
    let logs: Vec<Vec<T>> = metric
        .entries
        .iter()
        .map(|e| e.iter().map(|x| x.ln()).collect())
        .collect();
    let laps: Vec<Vec<T>> = logs.iter().map(|w| laplacian_real(chart, w)).collect();
    let cpl = Couplings::new(spec);
    Ok((0..n)
        .map(|node| {
            if chart.is_boundary(node) {
                return T::zero();
            }
            let w: Vec<T> = logs.iter().map(|l| l[node]).collect();
            let s = cpl.source(node, &w);
            (0..spec.rank()).fold(T::zero(), |m, i| m.max((laps[i][node] - s[i]).abs()))
        })
        .collect())
}

/// `sup |h^{-2} conj(q2)|` for an SL(2,R) metric.
pub fn hitchin_bound<T: Real>(metric: &HarmonicMetric<T>, q2: &ComplexField<T>) -> T {
    metric
        .h()
        .iter()
        .zip(q2.values())
        .fold(T::zero(), |m, (h, q)| m.max(q.norm() / (*h * *h)))
}

/// Solves the reduced Hitchin equations for `spec` on `chart`.
pub fn solve_hitchin<T: Real>(
    spec: &HiggsBundleSpec<T>,
    chart: &Arc<DomainChart<T>>,
    config: &SolverConfig<T>,
) -> Result<HarmonicMetric<T>> {
    if **spec.chart() != **chart {
        return Err(Error::ChartMismatch);
    }
    if spec.kind() == BundleKind::SL2R {
        let st = check_stability(spec)?;
        if !st.is_polystable() {
            return Err(Error::UnstableInput(st.reasons.join("; ")));
        }
    }
    match spec.kind() {
        BundleKind::SL2R | BundleKind::Cyclic3 | BundleKind::Cyclic4 => solve_direct(spec, config),
        BundleKind::TensorSL2xSL2 => {
            let profiles = split_profiles(&config.boundary, 2)?;
            let mut fs = Vec::new();
            for (f, b) in spec.factors().iter().zip(profiles) {
                let cfg = SolverConfig {
                    boundary: b,
                    initial_guess: sub_guess(&config.initial_guess, fs.len()),
                    ..config.clone()
                };
                fs.push(solve_hitchin(f, chart, &cfg)?);
            }
            let (h1, h2) = (fs[0].h().to_vec(), fs[1].h().to_vec());
            let entries = vec![
                h1.iter()
                    .zip(&h2)
                    .map(|(a, b)| T::one() / (*a * *b))
                    .collect(),
                h1.iter().zip(&h2).map(|(a, b)| *b / *a).collect(),
                h1.iter().zip(&h2).map(|(a, b)| *a / *b).collect(),
                h1.iter().zip(&h2).map(|(a, b)| *a * *b).collect(),
            ];
            assemble(spec, entries, fs)
        }
        BundleKind::SymmetricPower(m) => {
            let base = solve_hitchin(&spec.factors()[0], chart, config)?;
            let gauge = spec.gauge_constants();
            let entries = (0..=m)
                .map(|k| {
                    let p = 2 * k as i32 - m as i32;
                    base.h().iter().map(|h| gauge[k] * h.powi(p)).collect()
                })
                .collect();
            assemble(spec, entries, vec![base])
        }
    }
}

fn sub_guess<T: Real>(g: &InitialGuess<T>, k: usize) -> InitialGuess<T> {
    match g {
        InitialGuess::Provided(v) => InitialGuess::Provided(vec![v[k].clone()]),
        other => other.clone(),
    }
}

fn split_profiles(b: &Boundary, count: usize) -> Result<Vec<Boundary>> {
    match b {
        Boundary::Periodic => Ok(vec![Boundary::Periodic; count]),
        Boundary::Dirichlet(p) if p.len() == count => Ok(p
            .iter()
            .map(|x| Boundary::Dirichlet(vec![x.clone()]))
            .collect()),
        Boundary::Dirichlet(p) => Err(Error::MissingBoundaryData {
            expected: count,
            found: p.len(),
        }),
    }
}

fn assemble<T: Real>(
    spec: &HiggsBundleSpec<T>,
    entries: Vec<Vec<T>>,
    factors: Vec<HarmonicMetric<T>>,
) -> Result<HarmonicMetric<T>> {
    let mut m = HarmonicMetric::from_entries(spec, entries)?;
    m.converged = factors.iter().all(|f| f.converged);
    m.iterations = factors.iter().map(|f| f.iterations).sum();
    m.solver_residual = factors
        .iter()
        .fold(T::zero(), |a, f| a.max(f.solver_residual));
    m.factors = factors;
    Ok(m)
}

struct Problem<'a, T: Real> {
    chart: &'a DomainChart<T>,
    cpl: Couplings<T>,
    rank: usize,
    nu: usize,
    fixed: Vec<bool>,
}

impl<T: Real> Problem<'_, T> {
    fn n(&self) -> usize {
        self.chart.len()
    }

    fn w_at(&self, u: &[T], node: usize) -> Vec<T> {
        let n = self.n();
        let uk: Vec<T> = (0..self.nu).map(|k| u[k * n + node]).collect();
        expand(self.rank, &uk)
    }

    /// `max(1, sup |S|)`, the scale against which the tolerance is applied.
    fn source_scale(&self, u: &[T]) -> T {
        (0..self.n())
            .filter(|&node| !self.fixed[node])
            .map(|node| max(&self.cpl.source(node, &self.w_at(u, node))))
            .fold(T::one(), T::max)
    }

    fn residual(&self, u: &[T]) -> Vec<T> {
        let n = self.n();
        let mut f = vec![T::zero(); self.nu * n];
        for k in 0..self.nu {
            let lap = laplacian_real(self.chart, &u[k * n..(k + 1) * n]);
            f[k * n..(k + 1) * n].copy_from_slice(&lap);
        }
        for node in 0..n {
            if self.fixed[node] {
                for k in 0..self.nu {
                    f[k * n + node] = T::zero();
                }
                continue;
            }
            let s = self.cpl.source(node, &self.w_at(u, node));
            for k in 0..self.nu {
                f[k * n + node] = f[k * n + node] - s[self.rank - 1 - k];
            }
        }
        f
    }

    /// Coupling matrices `C_kl = dS_{r_k}/du_l` per node.
    fn couplings(&self, u: &[T]) -> Vec<Vec<T>> {
        let (r, nu) = (self.rank, self.nu);
        (0..self.n())
            .map(|node| {
                let j = self.cpl.source_jacobian(node, &self.w_at(u, node));
                let mut c = vec![T::zero(); nu * nu];
                for k in 0..nu {
                    let row = r - 1 - k;
                    for l in 0..nu {
                        c[k * nu + l] = j[row * r + (r - 1 - l)] - j[row * r + l];
                    }
                }
                c
            })
            .collect()
    }

    fn apply_jacobian(&self, c: &[Vec<T>], x: &[T]) -> Vec<T> {
        let n = self.n();
        let nu = self.nu;
        let mut out = vec![T::zero(); nu * n];
        for k in 0..nu {
            let lap = laplacian_real(self.chart, &x[k * n..(k + 1) * n]);
            out[k * n..(k + 1) * n].copy_from_slice(&lap);
        }
        for node in 0..n {
            for k in 0..nu {
                if self.fixed[node] {
                    out[k * n + node] = x[k * n + node];
                    continue;
                }
                let mut acc = out[k * n + node];
                for l in 0..nu {
                    acc = acc - c[node][k * nu + l] * x[l * n + node];
                }
                out[k * n + node] = acc;
            }
        }
        out
    }
}

fn solve_direct<T: Real>(
    spec: &HiggsBundleSpec<T>,
    config: &SolverConfig<T>,
) -> Result<HarmonicMetric<T>> {
    let chart = spec.chart();
    let n = chart.len();
    let rank = spec.rank();
    let nu = unknown_count(spec.kind());
    let fixed: Vec<bool> = (0..n).map(|i| chart.is_boundary(i)).collect();
    let mut u = vec![T::zero(); nu * n];

    match (&config.boundary, chart.is_periodic()) {
        (Boundary::Periodic, true) => {}
        (Boundary::Periodic, false) => {
            return Err(Error::MissingBoundaryData {
                expected: nu,
                found: 0,
            });
        }
        (Boundary::Dirichlet(p), _) if p.len() != nu => {
            return Err(Error::MissingBoundaryData {
                expected: nu,
                found: p.len(),
            });
        }
        (Boundary::Dirichlet(p), _) => {
            let bnodes = chart.boundary_nodes();
            for (k, prof) in p.iter().enumerate() {
                if let BoundaryProfile::Samples(v) = prof {
                    if v.len() != bnodes.len() {
                        return Err(Error::MissingBoundaryData {
                            expected: bnodes.len(),
                            found: v.len(),
                        });
                    }
                }
                for (slot, &node) in bnodes.iter().enumerate() {
                    u[k * n + node] = prof.eval(chart, node, slot).ln();
                }
            }
        }
    }

    // a = b = 0: every constant solves, take h = 1 away from Dirichlet data
    if spec.is_zero() && chart.is_periodic() {
        let entries = vec![vec![T::one(); n]; rank];
        return HarmonicMetric::from_entries(spec, entries);
    }

    initial_guess(spec, config, &fixed, &mut u)?;
    let prob = Problem {
        chart,
        cpl: Couplings::new(spec),
        rank,
        nu,
        fixed,
    };

    let tol = config.residual_tolerance;
    let mut f = prob.residual(&u);
    let mut res = max(&f);
    let mut iterations = 0;
    let mut converged = res <= tol;
    while !converged && iterations < config.max_iterations {
        iterations += 1;
        let c = prob.couplings(&u);
        let pre = Precond::build(chart, nu, &c);
        let rhs: Vec<T> = f.iter().map(|x| -*x).collect();
        let mut delta = vec![T::zero(); nu * n];
        let zero_fixed = |mut v: Vec<T>| {
            for node in 0..n {
                if prob.fixed[node] {
                    for k in 0..nu {
                        v[k * n + node] = T::zero();
                    }
                }
            }
            v
        };
        let rtol = T::lit(1e-12).max(T::epsilon() * T::lit(100.0));
        if nu == 1 && chart.is_periodic() {
            // (C - Delta) is symmetric positive definite
            let neg = |x: &[T]| {
                prob.apply_jacobian(&c, x)
                    .into_iter()
                    .map(|v| -v)
                    .collect::<Vec<T>>()
            };
            let pneg = |x: &[T]| {
                pre.apply(chart, nu, x)
                    .into_iter()
                    .map(|v| -v)
                    .collect::<Vec<T>>()
            };
            pcg(neg, pneg, &f, &mut delta, rtol, 400);
        } else {
            bicgstab(
                |x| prob.apply_jacobian(&c, x),
                |x| zero_fixed(pre.apply(chart, nu, x)),
                &rhs,
                &mut delta,
                rtol,
                400,
            );
        }
        let delta = zero_fixed(delta);
        if delta.iter().any(|d| !d.is_finite()) {
            break;
        }
        let mut step = config.damping;
        let mut accepted = false;
        while step >= T::lit(1.0 / 1024.0) {
            let trial: Vec<T> = u.iter().zip(&delta).map(|(a, d)| *a + step * *d).collect();
            let ft = prob.residual(&trial);
            let rt = max(&ft);
            if rt.is_finite() && rt < res {
                u = trial;
                f = ft;
                res = rt;
                accepted = true;
                break;
            }
            step = step / T::lit(2.0);
        }
        if !accepted {
            break;
        }
        converged = res <= tol;
    }
    // a stalled iterate is accepted at the roundoff floor of large sources
    converged = converged || res <= config.residual_tolerance * prob.source_scale(&u);
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            residual: res.as_f64(),
        });
    }
    let entries: Vec<Vec<T>> = (0..rank)
        .map(|i| (0..n).map(|node| prob.w_at(&u, node)[i].exp()).collect())
        .collect();
    let mut m = HarmonicMetric::from_entries(spec, entries)?;
    m.iterations = iterations;
    m.solver_residual = res;
    m.converged = true;
    Ok(m)
}

fn initial_guess<T: Real>(
    spec: &HiggsBundleSpec<T>,
    config: &SolverConfig<T>,
    fixed: &[bool],
    u: &mut [T],
) -> Result<()> {
    let n = fixed.len();
    let nu = u.len() / n;
    match &config.initial_guess {
        InitialGuess::Zero => {}
        InitialGuess::Provided(fields) => {
            if fields.len() != nu || fields.iter().any(|f| f.len() != n) {
                return Err(Error::MissingBoundaryData {
                    expected: nu,
                    found: fields.len(),
                });
            }
            for k in 0..nu {
                for node in 0..n {
                    if !fixed[node] {
                        u[k * n + node] = fields[k][node];
                    }
                }
            }
        }
        InitialGuess::ConstantBalance => {
            let tiny = T::lit(1e-12);
            let lim = T::lit(10.0);
            let balance: Option<Vec<T>> = match spec.kind() {
                BundleKind::SL2R => {
                    let (a, b) = spec.sl2r_entries().unwrap();
                    (a.nowhere_zero(tiny) && b.nowhere_zero(tiny)).then(|| {
                        a.values()
                            .iter()
                            .zip(b.values())
                            .map(|(x, y)| (x.norm_sqr() / y.norm_sqr()).ln() / T::lit(4.0))
                            .collect()
                    })
                }
                BundleKind::Cyclic3 => {
                    let q = spec.phi_entry(0, 2).unwrap();
                    q.nowhere_zero(tiny).then(|| {
                        q.values()
                            .iter()
                            .map(|x| x.norm().ln() * T::lit(2.0 / 3.0))
                            .collect()
                    })
                }
                _ => None,
            };
            if let Some(b) = balance {
                for node in 0..n {
                    if !fixed[node] {
                        u[node] = b[node].max(-lim).min(lim);
                    }
                }
            }
        }
    }
    Ok(())
}
