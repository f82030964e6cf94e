//! Dimension theory toolkit for triangular Gatzouras–Lalley-type (TGL)
//! self-affine carpets.
//!
//! A TGL system is a finite family of planar affine contractions
//!
//! ```text
//! f_i(x, y) = (b_i x + tx_i,  d_i x + a_i y + ty_i),   0 < |a_i| < |b_i| < 1,
//! ```
//!
//! grouped into columns that share the horizontal contraction and offset.
//! The crate validates such systems ([`ifs`]), computes their Hausdorff,
//! box and affinity dimension quantities ([`dimension`]), checks the
//! separation and overlap conditions under which those quantities are the
//! true dimensions ([`conditions`]), renders attractors ([`render`]),
//! estimates dimensions empirically by box counting ([`boxcount`]), handles
//! three-dimensional uplifts ([`uplift`]) and ships a gallery of worked
//! examples with reference values ([`gallery`]).
//!
//! ```
//! use carpet_dim::{dimension, gallery};
//!
//! let built = gallery::build("fm_carpet", &[0.3]).unwrap();
//! let system = built.system.validate().unwrap();
//! let box_dim = dimension::box_dimension_upper(&system).unwrap();
//! assert!((box_dim.s - (1.0 - 2f64.ln() / 0.3f64.ln())).abs() < 1e-9);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boxcount;
pub mod conditions;
pub mod dimension;
pub mod error;
pub mod gallery;
pub mod geometry;
pub mod ifs;
pub mod json;
pub mod numerics;
pub mod render;
pub mod rng;
pub mod sample;
pub mod uplift;

pub use error::Error;
pub use ifs::{AffineMap2, ColumnPartition, Cylinder, SystemClass, SystemSpec, TglSystem};

/// Tolerance for geometric equality tests: (A1) containment, column
/// consistency and boundary contact between cylinders.
pub const EPS_GEOM: f64 = 1e-12;

/// Three-valued outcome for checks that cannot always be decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriState {
    Holds,
    Fails,
    Unknown,
}

impl TriState {
    pub fn from_bool(b: bool) -> Self {
        if b {
            TriState::Holds
        } else {
            TriState::Fails
        }
    }

    pub fn holds(self) -> bool {
        self == TriState::Holds
    }
}

impl std::fmt::Display for TriState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TriState::Holds => "holds",
            TriState::Fails => "fails",
            TriState::Unknown => "unknown",
        })
    }
}
