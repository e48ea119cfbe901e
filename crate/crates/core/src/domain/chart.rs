use std::fmt;
use std::sync::Arc;

use crate::domain::calculus::Operators;
use crate::error::{Error, Result};
use crate::scalar::{cplx, Real, C};

/// Shape of a coordinate patch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChartKind<T> {
    /// Flat torus `C / (Z + modulus Z)`.
    Torus { modulus: C<T> },
    /// Open disc `|z| < radius`, polar grid.
    Disc { radius: T },
    /// Axis-aligned rectangle centered at the origin.
    Rectangle { width: T, height: T },
}

impl<T> ChartKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ChartKind::Torus { .. } => "torus",
            ChartKind::Disc { .. } => "disc",
            ChartKind::Rectangle { .. } => "rectangle",
        }
    }
}

/// A discretized conformal chart with node coordinates and cached operators.
///
/// Nodes are stored row-major in `(i1, i2)`: for a torus `z = i1/n1 +
/// (i2/n2) modulus`; for a disc `i1` is the ring and `i2` the angle; for a
/// rectangle `i1` runs along `x` and `i2` along `y`.
pub struct DomainChart<T: Real> {
    kind: ChartKind<T>,
    n1: usize,
    n2: usize,
    nodes: Vec<C<T>>,
    pub(crate) ops: Operators<T>,
}

impl<T: Real> fmt::Debug for DomainChart<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainChart")
            .field("kind", &self.kind)
            .field("resolution", &(self.n1, self.n2))
            .finish()
    }
}

impl<T: Real> PartialEq for DomainChart<T> {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.n1 == other.n1 && self.n2 == other.n2
    }
}

pub fn make_chart<T: Real>(
    kind: ChartKind<T>,
    resolution: (usize, usize),
) -> Result<Arc<DomainChart<T>>> {
    let (n1, n2) = resolution;
    if n1 < 8 || n2 < 8 {
        return Err(Error::InvalidResolution(n1, n2));
    }
    match kind {
        ChartKind::Torus { modulus } => {
            if !(modulus.im > T::zero()) || !modulus.re.is_finite() {
                return Err(Error::InvalidModulus(format!("{}", modulus)));
            }
        }
        ChartKind::Disc { radius } => {
            if !(radius > T::zero() && radius < T::one()) {
                return Err(Error::InvalidRadius(radius.as_f64()));
            }
            if n2 % 2 != 0 {
                return Err(Error::InvalidResolution(n1, n2));
            }
        }
        ChartKind::Rectangle { width, height } => {
            if !(width > T::zero() && height > T::zero() && width.is_finite() && height.is_finite())
            {
                return Err(Error::InvalidRectangle(width.as_f64(), height.as_f64()));
            }
        }
    }
    let mut nodes = Vec::with_capacity(n1 * n2);
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            nodes.push(node_position(&kind, n1, n2, i1 as f64, i2 as f64));
        }
    }
    let ops = Operators::new(&kind, n1, n2);
    Ok(Arc::new(DomainChart {
        kind,
        n1,
        n2,
        nodes,
        ops,
    }))
}

/// Position of a (possibly fractional) grid coordinate.
fn node_position<T: Real>(kind: &ChartKind<T>, n1: usize, n2: usize, i1: f64, i2: f64) -> C<T> {
    let (a, b) = (T::lit(i1), T::lit(i2));
    let (n1, n2) = (T::from_usize_(n1), T::from_usize_(n2));
    match *kind {
        ChartKind::Torus { modulus } => cplx(a / n1, T::zero()) + modulus * (b / n2),
        ChartKind::Disc { radius } => {
            let r = (a + T::lit(0.5)) * radius / n1;
            let th = T::TAU() * b / n2;
            cplx(r * th.cos(), r * th.sin())
        }
        ChartKind::Rectangle { width, height } => {
            let x = -width / T::lit(2.0) + a * width / (n1 - T::one());
            let y = -height / T::lit(2.0) + b * height / (n2 - T::one());
            cplx(x, y)
        }
    }
}

impl<T: Real> DomainChart<T> {
    pub fn kind(&self) -> &ChartKind<T> {
        &self.kind
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[C<T>] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> C<T> {
        self.nodes[idx]
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.n2 + i2
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.n2, idx % self.n2)
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, ChartKind::Torus { .. })
    }

    /// Nodes where Dirichlet data is imposed: the outer disc ring or the
    /// rectangle's edges. Empty on a torus.
    pub fn is_boundary(&self, idx: usize) -> bool {
        let (i1, i2) = self.coords(idx);
        match self.kind {
            ChartKind::Torus { .. } => false,
            ChartKind::Disc { .. } => i1 == self.n1 - 1,
            ChartKind::Rectangle { .. } => {
                i1 == 0 || i2 == 0 || i1 == self.n1 - 1 || i2 == self.n2 - 1
            }
        }
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_boundary(i)).collect()
    }

    /// Nodes at least two grid lines away from any Dirichlet boundary, where
    /// one-sided stencils do not reach.
    pub fn is_deep_interior(&self, idx: usize) -> bool {
        let (i1, i2) = self.coords(idx);
        match self.kind {
            ChartKind::Torus { .. } => true,
            ChartKind::Disc { .. } => i1 + 3 < self.n1,
            ChartKind::Rectangle { .. } => {
                i1 >= 3 && i2 >= 3 && i1 + 3 < self.n1 && i2 + 3 < self.n2
            }
        }
    }

    /// Smallest distance between neighbouring nodes.
    pub fn min_spacing(&self) -> T {
        let (n1, n2) = (T::from_usize_(self.n1), T::from_usize_(self.n2));
        match self.kind {
            ChartKind::Torus { modulus } => (T::one() / n1).min(modulus.norm() / n2),
            ChartKind::Disc { radius } => {
                let dr = radius / n1;
                dr.min(dr / T::lit(2.0) * T::TAU() / n2)
            }
            ChartKind::Rectangle { width, height } => {
                (width / (n1 - T::one())).min(height / (n2 - T::one()))
            }
        }
    }

    /// Continuous grid coordinates of a point, or `None` outside the chart.
    /// Torus coordinates are reduced modulo the lattice.
    pub fn grid_coords(&self, z: C<T>) -> Option<(T, T)> {
        let (n1, n2) = (T::from_usize_(self.n1), T::from_usize_(self.n2));
        let slack = T::lit(1e-9);
        match self.kind {
            ChartKind::Torus { modulus } => {
                let t = z.im / modulus.im;
                let s = z.re - t * modulus.re;
                Some((s * n1, t * n2))
            }
            ChartKind::Disc { radius } => {
                let r = z.norm();
                let dr = radius / n1;
                let k = r / dr - T::lit(0.5);
                if k > n1 - T::one() + slack {
                    return None;
                }
                let mut th = z.im.atan2(z.re);
                if th < T::zero() {
                    th = th + T::TAU();
                }
                Some((k, th / T::TAU() * n2))
            }
            ChartKind::Rectangle { width, height } => {
                let a = (z.re + width / T::lit(2.0)) / width * (n1 - T::one());
                let b = (z.im + height / T::lit(2.0)) / height * (n2 - T::one());
                let lo = -slack;
                if a < lo || b < lo || a > n1 - T::one() + slack || b > n2 - T::one() + slack {
                    return None;
                }
                Some((a, b))
            }
        }
    }

    pub fn contains(&self, z: C<T>) -> bool {
        self.grid_coords(z).is_some()
    }

    /// Disc ring radius and node angle; `None` for other charts.
    pub fn polar(&self, idx: usize) -> Option<(T, T)> {
        match self.kind {
            ChartKind::Disc { radius } => {
                let (k, j) = self.coords(idx);
                let r = (T::from_usize_(k) + T::lit(0.5)) * radius / T::from_usize_(self.n1);
                let th = T::TAU() * T::from_usize_(j) / T::from_usize_(self.n2);
                Some((r, th))
            }
            _ => None,
        }
    }

    /// The same chart at a different resolution.
    pub fn with_resolution(&self, resolution: (usize, usize)) -> Result<Arc<DomainChart<T>>> {
        make_chart(self.kind, resolution)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_nodes_tile_unit_square() {
        let c = make_chart::<f64>(
            ChartKind::Torus {
                modulus: cplx(0.0, 1.0),
            },
            (64, 64),
        )
        .unwrap();
        assert_eq!(c.len(), 4096);
        let z = c.node(c.index(16, 32));
        assert!((z - cplx(0.25, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn disc_nodes_avoid_origin_and_boundary() {
        let c = make_chart::<f64>(ChartKind::Disc { radius: 0.9 }, (32, 64)).unwrap();
        let max = c.nodes().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let min = c.nodes().iter().map(|z| z.norm()).fold(1.0, f64::min);
        assert!(max < 0.9 && min > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            make_chart::<f64>(
                ChartKind::Torus {
                    modulus: cplx(0.0, 1.0)
                },
                (4, 4)
            )
            .unwrap_err(),
            Error::InvalidResolution(4, 4)
        );
        assert!(matches!(
            make_chart::<f64>(ChartKind::Disc { radius: 1.0 }, (8, 8)),
            Err(Error::InvalidRadius(_))
        ));
        assert!(matches!(
            make_chart::<f64>(
                ChartKind::Torus {
                    modulus: cplx(1.0, -1.0)
                },
                (8, 8)
            ),
            Err(Error::InvalidModulus(_))
        ));
    }

    #[test]
    fn grid_coords_invert_node_positions() {
        for kind in [
            ChartKind::Torus {
                modulus: cplx(0.3, 1.2),
            },
            ChartKind::Disc { radius: 0.8 },
            ChartKind::Rectangle {
                width: 2.0,
                height: 1.0,
            },
        ] {
            let c = make_chart::<f64>(kind, (12, 16)).unwrap();
            for idx in [0, 5, 37, 100, 191] {
                let (a, b) = c.grid_coords(c.node(idx)).unwrap();
                let (i1, i2) = c.coords(idx);
                assert!(
                    (a - i1 as f64).abs() < 1e-9 && (b - i2 as f64).abs() < 1e-9,
                    "{kind:?} {idx}"
                );
            }
        }
    }
}
