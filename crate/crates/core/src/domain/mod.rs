//! Discretized conformal charts, sampled fields and the differential
//! operators `d_z`, `d_zbar` and `4 d_z d_zbar`.

pub(crate) mod calculus;
pub mod chart;
pub mod field;
pub mod interp;
pub mod stencil;

pub use chart::{make_chart, ChartKind, DomainChart};
pub use field::{
    d_z, d_zbar, holomorphy_residual, laplacian, laplacian_real, partials, partials_real,
    sample_field, write_field_csv, ComplexField, FieldSpec,
};
pub use interp::interp_weights;
