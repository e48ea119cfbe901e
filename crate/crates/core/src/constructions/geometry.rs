use crate::connection::{DevelopingMapSample, SymmetricTensorField};
use crate::domain::{partials, ComplexField};
use crate::scalar::{cplx, Real, C};

/// Pulls back the curvature -1 metric of the component of `CP^1 - RP^1`
/// containing the developed image. With `w = v_0 / (H_1 v_1)` the real
/// locus is `|w| = 1` and the metric is `4 |dw|^2 / (1 - |w|^2)^2`; the
/// image avoids the circle, so `w` or `1/w` is bounded by one everywhere and
/// the bounded one is differentiated.
pub fn developed_hyperbolic_metric<T: Real>(
    sample: &DevelopingMapSample<T>,
) -> SymmetricTensorField<T> {
    let chart = sample.chart();
    let h1 = sample.base_weights[1];
    let base = sample.vector(0, sample.base);
    let inside = base[0].norm() < base[1].norm() * h1;
    let w: Vec<C<T>> = (0..chart.len())
        .map(|node| {
            let v = sample.vector(0, node);
            if inside {
                v[0] / (v[1] * h1)
            } else {
                v[1] * h1 / v[0]
            }
        })
        .collect();
    let field = ComplexField::new(chart.clone(), w.clone(), 0);
    let (dz, dzb) = partials(&field);
    let i = cplx(T::zero(), T::one());
    let four = T::lit(4.0);
    let vals: Vec<(T, T, T)> = (0..chart.len())
        .map(|node| {
            let (a, b) = (dz.values()[node], dzb.values()[node]);
            let wx = a + b;
            let wy = (a - b) * i;
            let d = T::one() - w[node].norm_sqr();
            let c = four / (d * d);
            (
                c * wx.norm_sqr(),
                c * (wx * wy.conj()).re,
                c * wy.norm_sqr(),
            )
        })
        .collect();
    let mut g = SymmetricTensorField::conformal(chart, &vec![T::zero(); chart.len()]);
    for (node, (xx, xy, yy)) in vals.into_iter().enumerate() {
        g.gxx[node] = xx;
        g.gxy[node] = xy;
        g.gyy[node] = yy;
    }
    g
}
