//! Tensor-product cubic Lagrange interpolation in grid coordinates.

use crate::domain::chart::{ChartKind, DomainChart};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

fn lagrange4<T: Real>(x: T) -> [T; 4] {
    // nodes at 0, 1, 2, 3
    let (a, b, c, d) = (x, x - T::one(), x - T::lit(2.0), x - T::lit(3.0));
    let six = T::lit(6.0);
    let two = T::lit(2.0);
    [
        -(b * c * d) / six,
        a * c * d / two,
        -(a * b * d) / two,
        a * b * c / six,
    ]
}

/// Node indices and weights reproducing cubics through the point `z`.
pub fn interp_weights<T: Real>(chart: &DomainChart<T>, z: C<T>) -> Result<Vec<(usize, T)>> {
    let (n1, n2) = chart.resolution();
    let (a, b) = chart
        .grid_coords(z)
        .ok_or_else(|| Error::PathOutsideChart(format!("{z}")))?;
    let mut out = Vec::with_capacity(16);
    match chart.kind() {
        ChartKind::Torus { .. } => {
            let (ba, wa) = periodic_base(a);
            let (bb, wb) = periodic_base(b);
            for (p, wp) in wa.iter().enumerate() {
                let i1 = (ba + p as isize).rem_euclid(n1 as isize) as usize;
                for (q, wq) in wb.iter().enumerate() {
                    let i2 = (bb + q as isize).rem_euclid(n2 as isize) as usize;
                    out.push((chart.index(i1, i2), *wp * *wq));
                }
            }
        }
        ChartKind::Disc { .. } => {
            let base = (a.floor().to_isize().unwrap() - 1).min(n1 as isize - 4);
            let wa = lagrange4(a - T::lit(base as f64));
            let (bb, wb) = periodic_base(b);
            for (p, wp) in wa.iter().enumerate() {
                let ring = base + p as isize;
                let (ring, shift) = if ring >= 0 {
                    (ring as usize, 0)
                } else {
                    ((-1 - ring) as usize, n2 / 2)
                };
                for (q, wq) in wb.iter().enumerate() {
                    let j = (bb + q as isize + shift as isize).rem_euclid(n2 as isize) as usize;
                    out.push((chart.index(ring, j), *wp * *wq));
                }
            }
        }
        ChartKind::Rectangle { .. } => {
            let clamp =
                |x: T, n: usize| (x.floor().to_isize().unwrap() - 1).clamp(0, n as isize - 4);
            let (ba, bb) = (clamp(a, n1), clamp(b, n2));
            let wa = lagrange4(a - T::lit(ba as f64));
            let wb = lagrange4(b - T::lit(bb as f64));
            for (p, wp) in wa.iter().enumerate() {
                for (q, wq) in wb.iter().enumerate() {
                    out.push((chart.index(ba as usize + p, bb as usize + q), *wp * *wq));
                }
            }
        }
    }
    Ok(out)
}

fn periodic_base<T: Real>(x: T) -> (isize, [T; 4]) {
    let base = x.floor().to_isize().unwrap() - 1;
    (base, lagrange4(x - T::lit(base as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::chart::make_chart;
    use crate::scalar::cplx;

    #[test]
    fn reproduces_low_degree_polynomials() {
        for kind in [
            ChartKind::Disc { radius: 0.9 },
            ChartKind::Rectangle {
                width: 1.0,
                height: 2.0,
            },
        ] {
            let c = make_chart::<f64>(kind, (16, 32)).unwrap();
            let f = |z: C<f64>| z * z + z.conj() * 0.5 + 1.0;
            let vals: Vec<_> = c.nodes().iter().map(|&z| f(z)).collect();
            for z in [cplx(0.01, 0.02), cplx(0.3, -0.2), cplx(-0.4, 0.1)] {
                let w = interp_weights(&c, z).unwrap();
                let v: C<f64> = w.iter().map(|&(i, x)| vals[i] * x).sum();
                // exact on a rectangle; angular direction is only cubic-accurate on a disc
                assert!((v - f(z)).norm() < 1e-3, "{kind:?} {z}");
            }
        }
    }

    #[test]
    fn outside_point_is_rejected() {
        let c = make_chart::<f64>(ChartKind::Disc { radius: 0.5 }, (8, 8)).unwrap();
        assert!(interp_weights(&c, cplx(0.6, 0.0)).is_err());
    }
}
