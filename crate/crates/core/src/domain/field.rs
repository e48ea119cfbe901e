use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::chart::{ChartKind, DomainChart};
use crate::error::{Error, Result};
use crate::scalar::{cplx, Real, C};

/// Closed-form description of a coefficient function, as it appears in
/// configuration files.
///
/// JSON shapes: `{"constant": [re, im]}`, `{"polynomial": [[re, im], ...]}`
/// (coefficients of `1, z, z^2, ...`) and `{"fourier": [[m1, m2, re, im], ...]}`
/// (modes `exp(2 pi i (m1 s + m2 t))` with `z = s + t modulus`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSpec {
    Constant((f64, f64)),
    Polynomial(Vec<(f64, f64)>),
    Fourier(Vec<(i32, i32, f64, f64)>),
}

impl FieldSpec {
    pub fn constant(c: Complex64) -> Self {
        FieldSpec::Constant((c.re, c.im))
    }

    pub fn real(x: f64) -> Self {
        FieldSpec::Constant((x, 0.0))
    }

    pub fn zero() -> Self {
        FieldSpec::Constant((0.0, 0.0))
    }

    pub fn polynomial(coeffs: &[Complex64]) -> Self {
        FieldSpec::Polynomial(coeffs.iter().map(|c| (c.re, c.im)).collect())
    }

    /// `c * z^k`.
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut v = vec![(0.0, 0.0); k + 1];
        v[k] = (c.re, c.im);
        FieldSpec::Polynomial(v)
    }

    pub fn fourier(terms: &[(i32, i32, Complex64)]) -> Self {
        FieldSpec::Fourier(terms.iter().map(|&(a, b, c)| (a, b, c.re, c.im)).collect())
    }

    pub fn form_name(&self) -> &'static str {
        match self {
            FieldSpec::Constant(_) => "constant",
            FieldSpec::Polynomial(_) => "polynomial",
            FieldSpec::Fourier(_) => "fourier",
        }
    }

    /// Multiplies every coefficient by `s`.
    pub fn scaled(&self, s: Complex64) -> Self {
        let m = |re: f64, im: f64| {
            let z = Complex64::new(re, im) * s;
            (z.re, z.im)
        };
        match self {
            FieldSpec::Constant((re, im)) => FieldSpec::Constant(m(*re, *im)),
            FieldSpec::Polynomial(c) => {
                FieldSpec::Polynomial(c.iter().map(|&(re, im)| m(re, im)).collect())
            }
            FieldSpec::Fourier(c) => FieldSpec::Fourier(
                c.iter()
                    .map(|&(a, b, re, im)| {
                        let (x, y) = m(re, im);
                        (a, b, x, y)
                    })
                    .collect(),
            ),
        }
    }
}

/// One complex sample per chart node, tagged with the power of
/// `dz^{1/2}` it multiplies.
#[derive(Clone, Debug)]
pub struct ComplexField<T: Real> {
    chart: Arc<DomainChart<T>>,
    values: Vec<C<T>>,
    weight: i32,
}

impl<T: Real> PartialEq for ComplexField<T> {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart && self.weight == other.weight && self.values == other.values
    }
}

impl<T: Real> ComplexField<T> {
    /// # Panics
    /// If the sample count differs from the node count.
    pub fn new(chart: Arc<DomainChart<T>>, values: Vec<C<T>>, weight: i32) -> Self {
        assert_eq!(
            values.len(),
            chart.len(),
            "sample count must equal node count"
        );
        Self {
            chart,
            values,
            weight,
        }
    }

    pub fn from_fn(chart: &Arc<DomainChart<T>>, weight: i32, f: impl Fn(C<T>) -> C<T>) -> Self {
        let values = chart.nodes().iter().map(|&z| f(z)).collect();
        Self::new(chart.clone(), values, weight)
    }

    pub fn constant(chart: &Arc<DomainChart<T>>, c: C<T>, weight: i32) -> Self {
        Self::new(chart.clone(), vec![c; chart.len()], weight)
    }

    pub fn zeros(chart: &Arc<DomainChart<T>>, weight: i32) -> Self {
        Self::constant(chart, C::new(T::zero(), T::zero()), weight)
    }

    pub fn chart(&self) -> &Arc<DomainChart<T>> {
        &self.chart
    }

    pub fn values(&self) -> &[C<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C<T>> {
        self.values
    }

    pub fn weight(&self) -> i32 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Zero-field test used by the stability conditions.
    pub fn is_zero(&self) -> bool {
        self.max_abs() < T::lit(1e-12)
    }

    /// Nowhere-vanishing test (every sample above `tol`).
    pub fn nowhere_zero(&self, tol: T) -> bool {
        self.values.iter().all(|z| z.norm() > tol)
    }

    pub fn same_chart(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.chart, &other.chart) || *self.chart == *other.chart
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Self::new(
            self.chart.clone(),
            self.values.iter().map(|&z| f(z)).collect(),
            self.weight,
        )
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, s: C<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn with_weight(mut self, weight: i32) -> Self {
        self.weight = weight;
        self
    }

    /// Same samples on an equal chart object (used to rehome fields after
    /// deserializing or rebuilding a chart).
    pub fn rehome(&self, chart: &Arc<DomainChart<T>>) -> Result<Self> {
        if **chart != *self.chart {
            return Err(Error::ChartMismatch);
        }
        Ok(Self::new(chart.clone(), self.values.clone(), self.weight))
    }
}

/// Evaluates a specification at a single point of the given chart kind.
pub fn eval_spec<T: Real>(kind: &ChartKind<T>, spec: &FieldSpec, z: C<T>) -> C<T> {
    match spec {
        FieldSpec::Constant((re, im)) => cplx(T::lit(*re), T::lit(*im)),
        FieldSpec::Polynomial(coeffs) => coeffs
            .iter()
            .rev()
            .fold(cplx(T::zero(), T::zero()), |acc, &(re, im)| {
                acc * z + cplx(T::lit(re), T::lit(im))
            }),
        FieldSpec::Fourier(terms) => {
            let ChartKind::Torus { modulus } = *kind else {
                return cplx(T::nan(), T::nan());
            };
            let t = z.im / modulus.im;
            let s = z.re - t * modulus.re;
            terms
                .iter()
                .fold(cplx(T::zero(), T::zero()), |acc, &(m1, m2, re, im)| {
                    let phase = T::TAU() * (T::lit(m1 as f64) * s + T::lit(m2 as f64) * t);
                    acc + cplx(T::lit(re), T::lit(im)) * cplx(phase.cos(), phase.sin())
                })
        }
    }
}

pub fn check_spec_compatible<T: Real>(chart: &DomainChart<T>, spec: &FieldSpec) -> Result<()> {
    let torus = chart.is_periodic();
    let ok = match spec {
        FieldSpec::Constant(_) => true,
        FieldSpec::Fourier(_) => torus,
        FieldSpec::Polynomial(_) => !torus,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::IncompatibleSpec {
            spec: spec.form_name(),
            chart: chart.kind().name(),
        })
    }
}

pub fn sample_field<T: Real>(
    chart: &Arc<DomainChart<T>>,
    spec: &FieldSpec,
    weight: i32,
) -> Result<ComplexField<T>> {
    check_spec_compatible(chart, spec)?;
    let kind = *chart.kind();
    Ok(ComplexField::from_fn(chart, weight, |z| {
        eval_spec(&kind, spec, z)
    }))
}

pub fn d_z<T: Real>(field: &ComplexField<T>) -> ComplexField<T> {
    let chart = field.chart();
    let (dz, _) = chart.ops.partials(field.values(), chart.nodes());
    ComplexField::new(chart.clone(), dz, field.weight() + 2)
}

pub fn d_zbar<T: Real>(field: &ComplexField<T>) -> ComplexField<T> {
    let chart = field.chart();
    let (_, dzb) = chart.ops.partials(field.values(), chart.nodes());
    ComplexField::new(chart.clone(), dzb, field.weight())
}

/// Both partials from one transform.
pub fn partials<T: Real>(field: &ComplexField<T>) -> (ComplexField<T>, ComplexField<T>) {
    let chart = field.chart();
    let (dz, dzb) = chart.ops.partials(field.values(), chart.nodes());
    (
        ComplexField::new(chart.clone(), dz, field.weight() + 2),
        ComplexField::new(chart.clone(), dzb, field.weight()),
    )
}

/// Flat Laplacian `4 d_z d_zbar`.
pub fn laplacian<T: Real>(field: &ComplexField<T>) -> ComplexField<T> {
    let chart = field.chart();
    let v = chart.ops.laplacian(field.values(), chart.nodes());
    ComplexField::new(chart.clone(), v, field.weight())
}

/// Laplacian of real samples.
pub fn laplacian_real<T: Real>(chart: &DomainChart<T>, f: &[T]) -> Vec<T> {
    let c: Vec<C<T>> = f.iter().map(|&x| cplx(x, T::zero())).collect();
    chart
        .ops
        .laplacian(&c, chart.nodes())
        .into_iter()
        .map(|z| z.re)
        .collect()
}

/// `(d_z f, d_zbar f)` of real samples.
pub fn partials_real<T: Real>(chart: &DomainChart<T>, f: &[T]) -> (Vec<C<T>>, Vec<C<T>>) {
    let c: Vec<C<T>> = f.iter().map(|&x| cplx(x, T::zero())).collect();
    chart.ops.partials(&c, chart.nodes())
}

/// Maximum of `|d_zbar f|` over the nodes.
pub fn holomorphy_residual<T: Real>(field: &ComplexField<T>) -> T {
    d_zbar(field).max_abs()
}

/// Writes `index1,index2,re_z,im_z,re_f,im_f` rows.
pub fn write_field_csv<T: Real, W: Write>(field: &ComplexField<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["index1", "index2", "re_z", "im_z", "re_f", "im_f"])
        .map_err(io)?;
    let chart = field.chart();
    for (idx, v) in field.values().iter().enumerate() {
        let (i1, i2) = chart.coords(idx);
        let z = chart.node(idx);
        w.serialize((
            i1,
            i2,
            z.re.as_f64(),
            z.im.as_f64(),
            v.re.as_f64(),
            v.im.as_f64(),
        ))
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::chart::make_chart;

    fn disc(n1: usize, n2: usize) -> Arc<DomainChart<f64>> {
        make_chart(ChartKind::Disc { radius: 0.9 }, (n1, n2)).unwrap()
    }

    #[test]
    fn fourier_sample_at_quarter() {
        let c = make_chart::<f64>(
            ChartKind::Torus {
                modulus: cplx(0.0, 1.0),
            },
            (8, 8),
        )
        .unwrap();
        let f = sample_field(&c, &FieldSpec::Fourier(vec![(1, 0, 1.0, 0.0)]), 0).unwrap();
        let v = f.values()[c.index(2, 0)];
        assert!((v - cplx(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn incompatible_forms_are_rejected() {
        let t = make_chart::<f64>(
            ChartKind::Torus {
                modulus: cplx(0.0, 1.0),
            },
            (8, 8),
        )
        .unwrap();
        assert!(matches!(
            sample_field(&t, &FieldSpec::Polynomial(vec![(0.0, 0.0), (1.0, 0.0)]), 0),
            Err(Error::IncompatibleSpec { .. })
        ));
        assert!(sample_field(&disc(8, 8), &FieldSpec::Fourier(vec![]), 0).is_err());
    }

    #[test]
    fn z_squared_derivatives_on_disc() {
        let c = disc(64, 64);
        let f = ComplexField::from_fn(&c, 0, |z| z * z);
        assert!(holomorphy_residual(&f) < 1e-9);
        let (dz, _) = partials(&f);
        for (idx, z) in c.nodes().iter().enumerate() {
            assert!((dz.values()[idx] - *z * 2.0).norm() < 1e-9);
        }
    }

    #[test]
    fn conjugate_is_not_holomorphic() {
        let c = disc(32, 32);
        let f = ComplexField::from_fn(&c, 0, |z| z.conj());
        assert!((holomorphy_residual(&f) - 1.0).abs() < 1e-9);
        let k = ComplexField::constant(&c, cplx(5.0, 0.0), 0);
        assert!(holomorphy_residual(&k) < 1e-12);
    }

    #[test]
    fn csv_has_header_and_one_row_per_node() {
        let c = disc(8, 8);
        let f = ComplexField::from_fn(&c, 0, |z| z);
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 65);
        assert!(text.starts_with("index1,index2,re_z,im_z,re_f,im_f"));
    }
}
