//! Higgs bundle normal forms: SL(2,R), cyclic rank 3 and 4, tensor products
//! and odd symmetric powers, with the SL(2,R) stability checker.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::domain::{holomorphy_residual, ComplexField, DomainChart};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{cplx, creal, Real, C};

/// Relative tolerance on `max |d_zbar phi_ij|` accepted for input entries.
pub const HOLOMORPHY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BundleKind {
    SL2R,
    Cyclic3,
    Cyclic4,
    TensorSL2xSL2,
    SymmetricPower(usize),
}

impl fmt::Display for BundleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundleKind::SL2R => write!(f, "SL2R"),
            BundleKind::Cyclic3 => write!(f, "Cyclic3"),
            BundleKind::Cyclic4 => write!(f, "Cyclic4"),
            BundleKind::TensorSL2xSL2 => write!(f, "TensorSL2xSL2"),
            BundleKind::SymmetricPower(m) => write!(f, "SymmetricPower({m})"),
        }
    }
}

/// Constant bilinear forms carried by the bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingData<T: Real> {
    /// Orthogonal structure `Q` for which `phi` is `Q`-symmetric.
    pub q_matrix: CMat<T>,
    /// Volume data `omega` (for tensor products, `omega (x) omega`).
    pub omega_matrix: CMat<T>,
}

impl<T: Real> PairingData<T> {
    pub fn sl2r() -> Self {
        let (o, l) = (C::zero(), C::one());
        let s = T::one() / T::lit(2.0).sqrt();
        let i = cplx(T::zero(), s);
        Self {
            q_matrix: CMat::from_rows(&[vec![o, l], vec![l, o]]),
            omega_matrix: CMat::from_rows(&[vec![o, i], vec![-i, o]]),
        }
    }

    pub fn tensor(a: &Self, b: &Self) -> Self {
        Self {
            q_matrix: a.q_matrix.kron(&b.q_matrix),
            omega_matrix: a.omega_matrix.kron(&b.omega_matrix),
        }
    }

    /// Form whose positive cone is the anti-de Sitter region: `-omega (x) omega`,
    /// oriented so the real points of `L1 L2 + L1^{-1} L2^{-1}` are positive.
    pub fn ads_form(&self) -> CMat<T> {
        self.omega_matrix.scale_real(-T::one())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StabilityVerdict {
    Stable,
    StrictlyPolystable,
    Unstable,
    ViolatesMilnorWood,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityReport {
    pub verdict: StabilityVerdict,
    pub reasons: Vec<String>,
}

impl StabilityReport {
    pub fn is_polystable(&self) -> bool {
        matches!(
            self.verdict,
            StabilityVerdict::Stable | StabilityVerdict::StrictlyPolystable
        )
    }
}

#[derive(Clone, Debug)]
pub struct HiggsBundleSpec<T: Real> {
    kind: BundleKind,
    chart: Arc<DomainChart<T>>,
    weights: Vec<Rational64>,
    phi: BTreeMap<(usize, usize), ComplexField<T>>,
    deg: Vec<i64>,
    genus: u32,
    pairing: Option<PairingData<T>>,
    factors: Vec<HiggsBundleSpec<T>>,
    gauge: Vec<T>,
}

impl<T: Real> HiggsBundleSpec<T> {
    pub fn kind(&self) -> BundleKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn chart(&self) -> &Arc<DomainChart<T>> {
        &self.chart
    }

    pub fn weights(&self) -> &[Rational64] {
        &self.weights
    }

    pub fn phi_entries(&self) -> &BTreeMap<(usize, usize), ComplexField<T>> {
        &self.phi
    }

    pub fn phi_entry(&self, i: usize, j: usize) -> Option<&ComplexField<T>> {
        self.phi.get(&(i, j))
    }

    /// Degrees of the line bundles `L` of the SL(2,R) factors.
    pub fn degrees(&self) -> &[i64] {
        &self.deg
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn with_genus(mut self, genus: u32) -> Self {
        self.genus = genus;
        self
    }

    pub fn pairing(&self) -> Option<&PairingData<T>> {
        self.pairing.as_ref()
    }

    /// Underlying SL(2,R) bundles of a tensor product or symmetric power.
    pub fn factors(&self) -> &[HiggsBundleSpec<T>] {
        &self.factors
    }

    /// Constants `d_k` with `S(H) = diag(d_k h^{2k-m})` for symmetric powers.
    pub fn gauge_constants(&self) -> &[T] {
        &self.gauge
    }

    /// `(a, b)` of an SL(2,R) bundle.
    pub fn sl2r_entries(&self) -> Option<(&ComplexField<T>, &ComplexField<T>)> {
        match self.kind {
            BundleKind::SL2R => Some((&self.phi[&(0, 1)], &self.phi[&(1, 0)])),
            _ => None,
        }
    }

    /// The Higgs field matrix at a node.
    pub fn phi_at(&self, node: usize) -> CMat<T> {
        let mut m = CMat::zeros(self.rank(), self.rank());
        for (&(i, j), f) in &self.phi {
            m[(i, j)] = f.values()[node];
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.phi.values().all(|f| f.is_zero())
    }
}

fn check_holomorphic<T: Real>(name: &str, f: &ComplexField<T>) -> Result<()> {
    if !f.is_finite() {
        return Err(Error::NonHolomorphicEntry {
            entry: name.to_string(),
            residual: f64::NAN,
        });
    }
    let res = holomorphy_residual(f);
    let scale = T::one().max(f.max_abs());
    if res > T::lit(HOLOMORPHY_TOL) * scale {
        return Err(Error::NonHolomorphicEntry {
            entry: name.to_string(),
            residual: res.as_f64(),
        });
    }
    Ok(())
}

fn unit_field<T: Real>(chart: &Arc<DomainChart<T>>) -> ComplexField<T> {
    ComplexField::constant(chart, C::one(), 0)
}

/// `E = L + L^{-1}`, `phi = [[0, a], [b, 0]]`.
pub fn build_sl2r<T: Real>(
    a: ComplexField<T>,
    b: ComplexField<T>,
    deg_l: i64,
    genus: u32,
) -> Result<HiggsBundleSpec<T>> {
    if !a.same_chart(&b) {
        return Err(Error::ChartMismatch);
    }
    check_holomorphic("a", &a)?;
    check_holomorphic("b", &b)?;
    let g = i64::from(genus.max(2));
    let w = Rational64::new(deg_l, 2 * g - 2);
    let chart = a.chart().clone();
    let mut phi = BTreeMap::new();
    phi.insert((0, 1), a);
    phi.insert((1, 0), b);
    Ok(HiggsBundleSpec {
        kind: BundleKind::SL2R,
        chart,
        weights: vec![w, -w],
        phi,
        deg: vec![deg_l],
        genus,
        pairing: Some(PairingData::sl2r()),
        factors: Vec::new(),
        gauge: Vec::new(),
    })
}

/// The stability conditions for SL(2,R)-Higgs bundles and the
/// Milnor-Wood bound `|deg L| <= g - 1`.
pub fn check_stability<T: Real>(spec: &HiggsBundleSpec<T>) -> Result<StabilityReport> {
    let (a, b) = spec.sl2r_entries().ok_or_else(|| Error::WrongKind {
        expected: "SL2R",
        found: spec.kind().to_string(),
    })?;
    let d = spec.deg[0];
    let bound = i64::from(spec.genus) - 1;
    if d.abs() > bound {
        return Ok(StabilityReport {
            verdict: StabilityVerdict::ViolatesMilnorWood,
            reasons: vec![format!("|deg(L)| = {} exceeds g-1 = {bound}", d.abs())],
        });
    }
    let (az, bz) = (a.is_zero(), b.is_zero());
    let (verdict, reason) = match d.signum() {
        1 if bz => (StabilityVerdict::Unstable, Some("deg(L)>0 requires b≠0")),
        -1 if az => (StabilityVerdict::Unstable, Some("deg(L)<0 requires a≠0")),
        0 if az && bz => (StabilityVerdict::StrictlyPolystable, None),
        0 if az || bz => (
            StabilityVerdict::Unstable,
            Some("deg(L)=0 requires a,b≠0 or a=b=0"),
        ),
        _ => (StabilityVerdict::Stable, None),
    };
    Ok(StabilityReport {
        verdict,
        reasons: reason.into_iter().map(String::from).collect(),
    })
}

/// Cyclic bundles `K + O + K^{-1}` (n = 3, differentials `[q3]`) and
/// `K^{3/2} + K^{1/2} + K^{-1/2} + K^{-3/2}` (n = 4, `[q3, q4]`).
pub fn build_cyclic<T: Real>(
    n: usize,
    differentials: Vec<ComplexField<T>>,
) -> Result<HiggsBundleSpec<T>> {
    let expected = match n {
        3 => 1,
        4 => 2,
        _ => {
            return Err(Error::WrongKind {
                expected: "cyclic rank 3 or 4",
                found: format!("rank {n}"),
            })
        }
    };
    if differentials.len() != expected {
        return Err(Error::WrongDifferentialCount {
            rank: n,
            expected,
            found: differentials.len(),
        });
    }
    let chart = differentials[0].chart().clone();
    if differentials
        .iter()
        .any(|q| !q.same_chart(&differentials[0]))
    {
        return Err(Error::ChartMismatch);
    }
    for (k, q) in differentials.iter().enumerate() {
        check_holomorphic(&format!("q{}", k + 3), q)?;
    }
    let one = unit_field(&chart);
    let mut phi = BTreeMap::new();
    let (kind, weights) = if n == 3 {
        let q3 = differentials[0].clone();
        phi.insert((0, 2), q3);
        phi.insert((1, 0), one.clone());
        phi.insert((2, 1), one);
        (
            BundleKind::Cyclic3,
            vec![Rational64::one(), Rational64::zero(), -Rational64::one()],
        )
    } else {
        let (q3, q4) = (differentials[0].clone(), differentials[1].clone());
        if !q3.is_zero() && !q4.is_zero() {
            return Err(Error::UnsupportedCoupling);
        }
        phi.insert((0, 2), q3.clone());
        phi.insert((0, 3), q4);
        phi.insert((1, 3), q3);
        phi.insert((1, 0), one.clone());
        phi.insert((2, 1), one.clone());
        phi.insert((3, 2), one);
        let h = |x: i64| Rational64::new(x, 2);
        (BundleKind::Cyclic4, vec![h(3), h(1), h(-1), h(-3)])
    };
    Ok(HiggsBundleSpec {
        kind,
        chart,
        weights,
        phi,
        deg: Vec::new(),
        genus: 2,
        pairing: None,
        factors: Vec::new(),
        gauge: Vec::new(),
    })
}

/// `E1 (x) E2` with `phi = phi1 (x) I + I (x) phi2`; basis `e_i (x) f_j` at
/// index `2i + j`.
pub fn tensor_product<T: Real>(
    s1: &HiggsBundleSpec<T>,
    s2: &HiggsBundleSpec<T>,
) -> Result<HiggsBundleSpec<T>> {
    let wrong = |s: &HiggsBundleSpec<T>| Error::WrongKind {
        expected: "SL2R",
        found: s.kind().to_string(),
    };
    let (a1, b1) = s1.sl2r_entries().ok_or_else(|| wrong(s1))?;
    let (a2, b2) = s2.sl2r_entries().ok_or_else(|| wrong(s2))?;
    if !a1.same_chart(a2) {
        return Err(Error::ChartMismatch);
    }
    let mut phi = BTreeMap::new();
    phi.insert((0, 1), a2.clone());
    phi.insert((0, 2), a1.clone());
    phi.insert((1, 0), b2.clone());
    phi.insert((1, 3), a1.clone());
    phi.insert((2, 0), b1.clone());
    phi.insert((2, 3), a2.clone());
    phi.insert((3, 1), b1.clone());
    phi.insert((3, 2), b2.clone());
    let (w1, w2) = (s1.weights[0], s2.weights[0]);
    Ok(HiggsBundleSpec {
        kind: BundleKind::TensorSL2xSL2,
        chart: s1.chart.clone(),
        weights: vec![w1 + w2, w1 - w2, -w1 + w2, -w1 - w2],
        phi,
        deg: vec![s1.deg[0], s2.deg[0]],
        genus: s1.genus,
        pairing: Some(PairingData::tensor(
            &PairingData::sl2r(),
            &PairingData::sl2r(),
        )),
        factors: vec![s1.clone(), s2.clone()],
        gauge: Vec::new(),
    })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Rescaling `c_k = m!/(m-k)!` of the monomials `e1^{m-k} e2^k`.
pub fn sympow_basis_scale(m: usize, k: usize) -> f64 {
    factorial(m) / factorial(m - k)
}

/// Gauge constants `d_k = k!/(m-k)!` of `S(H)`.
pub fn sympow_gauge(m: usize) -> Vec<f64> {
    (0..=m).map(|k| factorial(k) / factorial(m - k)).collect()
}

/// `Symm^m E` of an SL(2,R) bundle in the basis `E_k = c_k e1^{m-k} e2^k`,
/// where `S(phi)` has subdiagonal `b` and superdiagonal `k(m-k+1) a`.
pub fn symmetric_power<T: Real>(spec: &HiggsBundleSpec<T>, m: usize) -> Result<HiggsBundleSpec<T>> {
    if m == 0 || m.is_multiple_of(2) {
        return Err(Error::EvenPower(m));
    }
    let (a, b) = spec.sl2r_entries().ok_or_else(|| Error::WrongKind {
        expected: "SL2R",
        found: spec.kind().to_string(),
    })?;
    if m == 1 {
        return Ok(spec.clone());
    }
    let mut phi = BTreeMap::new();
    for k in 1..=m {
        phi.insert((k, k - 1), b.clone());
        let c = T::lit((k * (m - k + 1)) as f64);
        phi.insert((k - 1, k), a.scale(creal(c)));
    }
    let w = spec.weights[0];
    let weights = (0..=m)
        .map(|k| w * Rational64::from_integer(m as i64 - 2 * k as i64))
        .collect();
    Ok(HiggsBundleSpec {
        kind: BundleKind::SymmetricPower(m),
        chart: spec.chart.clone(),
        weights,
        phi,
        deg: spec.deg.clone(),
        genus: spec.genus,
        pairing: None,
        factors: vec![spec.clone()],
        gauge: sympow_gauge(m).into_iter().map(T::lit).collect(),
    })
}

/// Action of a 2x2 matrix on `Symm^m C^2` in the rescaled basis `E_k`.
///
/// `M e1 = M00 e1 + M10 e2`, `M e2 = M01 e1 + M11 e2`; the coefficient of
/// `mu_j` in `(M e1)^{m-k} (M e2)^k` is collected by polynomial expansion.
pub fn sympow_matrix<T: Real>(mat: &CMat<T>, m: usize) -> CMat<T> {
    assert!(mat.rows() == 2 && mat.cols() == 2);
    let mut out = CMat::zeros(m + 1, m + 1);
    for k in 0..=m {
        // polynomial in the e2 exponent
        let p1 = poly_pow(&[mat[(0, 0)], mat[(1, 0)]], m - k);
        let p2 = poly_pow(&[mat[(0, 1)], mat[(1, 1)]], k);
        let prod = poly_mul(&p1, &p2);
        let ck = T::lit(sympow_basis_scale(m, k));
        for (j, coeff) in prod.iter().enumerate() {
            let cj = T::lit(sympow_basis_scale(m, j));
            out[(j, k)] = *coeff * (ck / cj);
        }
    }
    out
}

fn poly_mul<T: Real>(a: &[C<T>], b: &[C<T>]) -> Vec<C<T>> {
    let mut out = vec![C::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j] + *x * *y;
        }
    }
    out
}

fn poly_pow<T: Real>(p: &[C<T>], n: usize) -> Vec<C<T>> {
    (0..n).fold(vec![C::one()], |acc, _| poly_mul(&acc, p))
}
