//! Definition, validation and composition of (shifted) TGL systems.
//!
//! Maps are stored with their signed entries. Every dimension formula in the
//! crate consumes `|a_i|` and `|b_i|`; signs only matter for geometry.

use std::fmt;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::EPS_GEOM;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IfsError {
    #[error("a system needs at least 2 maps, got {0}")]
    TooFewMaps(usize),
    #[error("invalid column partition: {0}")]
    BadPartition(String),
    #[error("map {index}: entry `{field}` is not finite")]
    NonFinite { index: usize, field: &'static str },
    #[error("domination axiom 0 < |a| < |b| < 1 fails for map {index} (a = {a}, b = {b})")]
    DominationViolation { index: usize, a: f64, b: f64 },
    #[error("column structure fails in column {column}: maps {first} and {second} have different {what}")]
    ColumnInconsistency {
        column: usize,
        first: usize,
        second: usize,
        what: &'static str,
    },
    #[error("column mass axiom fails in column {column}: sum of |a_j| = {mass} > 1")]
    ColumnMassViolation { column: usize, mass: f64 },
    #[error("non-overlapping column axiom fails for class tgl: column {left} overlaps {right}")]
    OverlapColumnsInTglClass { left: usize, right: usize },
    #[error("shifted class requires total column width <= 1, got {0}")]
    ColumnWidthExcess(f64),
    #[error("(A1) fails: image of the unit square under map {index} leaves [0,1]^2 ({detail})")]
    OutOfUnitSquare { index: usize, detail: String },
    #[error("map index {index} out of range for a system with {n} maps")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("malformed system spec: {0}")]
    Parse(String),
}

/// Planar lower-triangular affine map `(x, y) -> (b x + tx, d x + a y + ty)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineMap2 {
    pub b: f64,
    pub a: f64,
    pub d: f64,
    pub tx: f64,
    pub ty: f64,
}

impl AffineMap2 {
    pub fn new(b: f64, a: f64, d: f64, tx: f64, ty: f64) -> Self {
        Self { b, a, d, tx, ty }
    }

    #[inline]
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        [self.b * p[0] + self.tx, self.d * p[0] + self.a * p[1] + self.ty]
    }

    /// Images of `(0,0), (1,0), (1,1), (0,1)`, in that order.
    pub fn corners(&self) -> [[f64; 2]; 4] {
        [
            self.apply([0.0, 0.0]),
            self.apply([1.0, 0.0]),
            self.apply([1.0, 1.0]),
            self.apply([0.0, 1.0]),
        ]
    }

    /// Horizontal extent `[lo, hi]` of the image of the unit square.
    pub fn x_interval(&self) -> (f64, f64) {
        let end = self.tx + self.b;
        (self.tx.min(end), self.tx.max(end))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemClass {
    /// Columns are pairwise non-overlapping.
    Tgl,
    /// Columns may overlap; only the total width is bounded.
    Shifted,
}

impl fmt::Display for SystemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemClass::Tgl => "tgl",
            SystemClass::Shifted => "shifted",
        })
    }
}

/// Raw, unvalidated system description. This is the JSON file format:
///
/// ```json
/// { "class": "tgl",
///   "maps": [ {"b": 0.5, "a": 0.25, "d": 0.0, "tx": 0.0, "ty": 0.0}, ... ],
///   "columns": [2, 1] }
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub class: SystemClass,
    pub maps: Vec<AffineMap2>,
    pub columns: Vec<usize>,
}

impl SystemSpec {
    pub fn from_json(text: &str) -> Result<Self, IfsError> {
        serde_json::from_str(text).map_err(|e| IfsError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system spec serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, crate::Error> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| crate::Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Ok(Self::from_json(&text)?)
    }

    pub fn validate(&self) -> Result<TglSystem, IfsError> {
        validate_system(self)
    }
}

/// Contiguous partition of the map indices into columns, with the derived
/// per-column width `r` and left edge `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnPartition {
    sizes: Vec<usize>,
    starts: Vec<usize>,
    widths: Vec<f64>,
    offsets: Vec<f64>,
    column_of: Vec<usize>,
}

impl ColumnPartition {
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Unsigned column widths `r_î = |b_k|`, `k` in column `î`.
    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Left edges of the column intervals.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn range(&self, column: usize) -> Range<usize> {
        self.starts[column]..self.starts[column] + self.sizes[column]
    }

    /// Column index of map `i` (0-based on both sides).
    pub fn column_of(&self, i: usize) -> usize {
        self.column_of[i]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemFlags {
    pub diagonally_homogeneous: bool,
    pub uniform_vertical_fibres: bool,
    pub has_negative_entries: bool,
}

/// A validated TGL or shifted TGL system. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct TglSystem {
    maps: Vec<AffineMap2>,
    partition: ColumnPartition,
    class: SystemClass,
    flags: SystemFlags,
    warnings: Vec<String>,
}

impl TglSystem {
    pub fn maps(&self) -> &[AffineMap2] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn partition(&self) -> &ColumnPartition {
        &self.partition
    }

    pub fn columns(&self) -> usize {
        self.partition.len()
    }

    pub fn class(&self) -> SystemClass {
        self.class
    }

    pub fn flags(&self) -> SystemFlags {
        self.flags
    }

    /// Non-fatal findings, such as the column IFS not having its extreme
    /// fixed points at 0 and 1.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn abs_b(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.b.abs()).collect()
    }

    pub fn abs_a(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.a.abs()).collect()
    }

    pub fn to_spec(&self) -> SystemSpec {
        SystemSpec {
            class: self.class,
            maps: self.maps.clone(),
            columns: self.partition.sizes.clone(),
        }
    }

    /// The column IFS `{ r x + u }` acting on the horizontal axis, as
    /// `(ratio, image of 0)` pairs.
    ///
    /// For a column with negative `b` the map is `x -> b x + tx`, which
    /// reverses orientation; its image of 0 is `tx`.
    pub fn column_ifs(&self) -> Vec<(f64, f64)> {
        (0..self.columns())
            .map(|c| {
                let m = &self.maps[self.partition.starts[c]];
                (m.b, m.tx)
            })
            .collect()
    }
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= EPS_GEOM
}

/// Checks every structural axiom and builds a [`TglSystem`].
///
/// Indices in error diagnostics are 1-based, matching the usual way systems
/// are written down.
pub fn validate_system(spec: &SystemSpec) -> Result<TglSystem, IfsError> {
    let n = spec.maps.len();
    if n < 2 {
        return Err(IfsError::TooFewMaps(n));
    }
    if spec.columns.len() < 2 {
        return Err(IfsError::BadPartition(format!(
            "need at least 2 columns, got {}",
            spec.columns.len()
        )));
    }
    if let Some(pos) = spec.columns.iter().position(|&c| c == 0) {
        return Err(IfsError::BadPartition(format!("column {} is empty", pos + 1)));
    }
    let total: usize = spec.columns.iter().sum();
    if total != n {
        return Err(IfsError::BadPartition(format!(
            "column sizes sum to {total} but there are {n} maps"
        )));
    }

    for (i, m) in spec.maps.iter().enumerate() {
        for (field, v) in [("b", m.b), ("a", m.a), ("d", m.d), ("tx", m.tx), ("ty", m.ty)] {
            if !v.is_finite() {
                return Err(IfsError::NonFinite { index: i + 1, field });
            }
        }
        let (a, b) = (m.a.abs(), m.b.abs());
        if !(a > 0.0 && a < b && b < 1.0) {
            return Err(IfsError::DominationViolation { index: i + 1, a: m.a, b: m.b });
        }
    }

    let mut starts = Vec::with_capacity(spec.columns.len());
    let mut column_of = vec![0; n];
    let mut acc = 0;
    for (c, &size) in spec.columns.iter().enumerate() {
        starts.push(acc);
        for slot in &mut column_of[acc..acc + size] {
            *slot = c;
        }
        acc += size;
    }

    let mut widths = Vec::with_capacity(spec.columns.len());
    let mut offsets = Vec::with_capacity(spec.columns.len());
    for (c, &size) in spec.columns.iter().enumerate() {
        let range = starts[c]..starts[c] + size;
        let head = &spec.maps[range.start];
        let mut mass = 0.0;
        for k in range.clone() {
            let m = &spec.maps[k];
            if m.b.signum() != head.b.signum() {
                return Err(IfsError::ColumnInconsistency {
                    column: c + 1,
                    first: range.start + 1,
                    second: k + 1,
                    what: "signs of b",
                });
            }
            if !close(m.b, head.b) {
                return Err(IfsError::ColumnInconsistency {
                    column: c + 1,
                    first: range.start + 1,
                    second: k + 1,
                    what: "horizontal contractions b",
                });
            }
            if !close(m.tx, head.tx) {
                return Err(IfsError::ColumnInconsistency {
                    column: c + 1,
                    first: range.start + 1,
                    second: k + 1,
                    what: "horizontal translations tx",
                });
            }
            mass += m.a.abs();
        }
        if mass > 1.0 + EPS_GEOM {
            return Err(IfsError::ColumnMassViolation { column: c + 1, mass });
        }
        let (lo, _) = head.x_interval();
        widths.push(head.b.abs());
        offsets.push(lo);
    }

    match spec.class {
        SystemClass::Tgl => {
            for c in 0..widths.len() {
                let right = offsets[c] + widths[c];
                let limit = if c + 1 < widths.len() { offsets[c + 1] } else { 1.0 };
                if right > limit + EPS_GEOM {
                    return Err(IfsError::OverlapColumnsInTglClass {
                        left: c + 1,
                        right: if c + 1 < widths.len() { c + 2 } else { c + 1 },
                    });
                }
            }
        }
        SystemClass::Shifted => {
            let total: f64 = widths.iter().sum();
            if total > 1.0 + EPS_GEOM {
                return Err(IfsError::ColumnWidthExcess(total));
            }
        }
    }

    for (i, m) in spec.maps.iter().enumerate() {
        for (k, p) in m.corners().iter().enumerate() {
            let inside = p.iter().all(|&v| (-EPS_GEOM..=1.0 + EPS_GEOM).contains(&v));
            if !inside {
                return Err(IfsError::OutOfUnitSquare {
                    index: i + 1,
                    detail: format!("corner {} maps to ({}, {})", k + 1, p[0], p[1]),
                });
            }
        }
    }

    let mut warnings = Vec::new();
    // (A2): extreme fixed points of the column IFS at 0 and 1.
    let fixed: Vec<f64> = (0..widths.len())
        .map(|c| {
            let m = &spec.maps[starts[c]];
            m.tx / (1.0 - m.b)
        })
        .collect();
    let lo = fixed.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = fixed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo.abs() > 1e-9 || (hi - 1.0).abs() > 1e-9 {
        warnings.push(format!(
            "(A2) not normalized: fixed points of the column IFS span [{lo}, {hi}] instead of [0, 1]"
        ));
    }

    let abs_b: Vec<f64> = spec.maps.iter().map(|m| m.b.abs()).collect();
    let abs_a: Vec<f64> = spec.maps.iter().map(|m| m.a.abs()).collect();
    let diagonally_homogeneous = abs_b.iter().all(|&b| close(b, abs_b[0]))
        && abs_a.iter().all(|&a| close(a, abs_a[0]));
    let has_negative_entries = spec.maps.iter().any(|m| m.a < 0.0 || m.b < 0.0);

    let partition = ColumnPartition {
        sizes: spec.columns.clone(),
        starts,
        widths,
        offsets,
        column_of,
    };
    let uniform_vertical_fibres =
        crate::dimension::uniform_fibre_criterion(&abs_b, &abs_a, &partition);

    Ok(TglSystem {
        maps: spec.maps.clone(),
        partition,
        class: spec.class,
        flags: SystemFlags {
            diagonally_homogeneous,
            uniform_vertical_fibres,
            has_negative_entries,
        },
        warnings,
    })
}

/// The parallelogram `f_w([0,1]^2)` of a finite word `w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub word: Vec<usize>,
    pub b: f64,
    pub a: f64,
    pub d: f64,
    pub origin: [f64; 2],
}

impl Cylinder {
    pub fn identity() -> Self {
        Self { word: Vec::new(), b: 1.0, a: 1.0, d: 0.0, origin: [0.0, 0.0] }
    }

    /// `self ∘ f`, appending `index` to the word.
    pub fn then(&self, index: usize, f: &AffineMap2) -> Self {
        let mut word = Vec::with_capacity(self.word.len() + 1);
        word.extend_from_slice(&self.word);
        word.push(index);
        Self {
            word,
            b: self.b * f.b,
            a: self.a * f.a,
            d: self.d * f.b + self.a * f.d,
            origin: [
                self.origin[0] + self.b * f.tx,
                self.origin[1] + self.d * f.tx + self.a * f.ty,
            ],
        }
    }

    /// `self ∘ other` as affine maps; words concatenate.
    pub fn compose(&self, other: &Cylinder) -> Self {
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        Self {
            word,
            b: self.b * other.b,
            a: self.a * other.a,
            d: self.d * other.b + self.a * other.d,
            origin: [
                self.origin[0] + self.b * other.origin[0],
                self.origin[1] + self.d * other.origin[0] + self.a * other.origin[1],
            ],
        }
    }

    pub fn as_map(&self) -> AffineMap2 {
        AffineMap2::new(self.b, self.a, self.d, self.origin[0], self.origin[1])
    }

    pub fn corners(&self) -> [[f64; 2]; 4] {
        self.as_map().corners()
    }

    /// `tan γ_w = d_w / b_w`, the slope of the long sides.
    pub fn tan_angle(&self) -> f64 {
        self.d / self.b
    }
}

/// Composes `f_{w_1} ∘ … ∘ f_{w_n}` (0-based indices).
pub fn cylinder(system: &TglSystem, word: &[usize]) -> Result<Cylinder, IfsError> {
    cylinder_of_maps(system.maps(), word)
}

pub fn cylinder_of_maps(maps: &[AffineMap2], word: &[usize]) -> Result<Cylinder, IfsError> {
    let mut c = Cylinder::identity();
    for &i in word {
        let f = maps
            .get(i)
            .ok_or(IfsError::IndexOutOfRange { index: i, n: maps.len() })?;
        c = c.then(i, f);
    }
    Ok(c)
}

/// Uniform bound on `|d_w / b_w|` over all words:
/// `max_i(|d_i|/|b_i|) / (1 - max_i(|a_i|/|b_i|))`.
pub fn skewness_bound(system: &TglSystem) -> f64 {
    let maps = system.maps();
    let shear = maps.iter().map(|m| (m.d / m.b).abs()).fold(0.0, f64::max);
    let ratio = maps.iter().map(|m| (m.a / m.b).abs()).fold(0.0, f64::max);
    shear / (1.0 - ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    fn fm_carpet(a: f64) -> SystemSpec {
        gallery::build("fm_carpet", &[a]).unwrap().system
    }

    #[test]
    fn carpet_validates_with_flags() {
        let sys = fm_carpet(0.3).validate().unwrap();
        assert_eq!(sys.len(), 6);
        assert_eq!(sys.columns(), 3);
        assert_eq!(sys.class(), SystemClass::Tgl);
        assert!(sys.flags().diagonally_homogeneous);
        assert!(sys.flags().uniform_vertical_fibres);
        assert!(!sys.flags().has_negative_entries);
        assert!(sys.warnings().is_empty());
    }

    #[test]
    fn overlapping_carpet_is_valid_tgl() {
        let spec = gallery::build("fm_overlap", &[0.15]).unwrap().system;
        let sys = spec.validate().unwrap();
        assert_eq!(sys.class(), SystemClass::Tgl);
        assert!(sys.flags().uniform_vertical_fibres);
    }

    #[test]
    fn equal_diagonal_entries_rejected() {
        let mut spec = fm_carpet(0.3);
        spec.maps[2].a = spec.maps[2].b;
        match spec.validate() {
            Err(IfsError::DominationViolation { index, .. }) => assert_eq!(index, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn column_inconsistencies_rejected() {
        let mut spec = fm_carpet(0.3);
        spec.maps[1].tx += 0.01;
        assert!(matches!(
            spec.validate(),
            Err(IfsError::ColumnInconsistency { column: 1, what: "horizontal translations tx", .. })
        ));

        let spec = gallery::build("zipper", &[0.2]).unwrap().system;
        assert!(matches!(
            spec.validate(),
            Err(IfsError::ColumnInconsistency { what: "signs of b", .. })
        ));
    }

    #[test]
    fn column_mass_rejected() {
        let spec = SystemSpec {
            class: SystemClass::Tgl,
            maps: vec![
                AffineMap2::new(0.5, 0.45, 0.0, 0.0, 0.0),
                AffineMap2::new(0.5, 0.45, 0.0, 0.0, 0.5),
                AffineMap2::new(0.5, 0.45, 0.0, 0.0, 0.55),
                AffineMap2::new(0.5, 0.25, 0.0, 0.5, 0.0),
            ],
            columns: vec![3, 1],
        };
        assert!(matches!(spec.validate(), Err(IfsError::ColumnMassViolation { column: 1, .. })));
    }

    #[test]
    fn overlapping_columns_only_allowed_when_shifted() {
        let mut spec = SystemSpec {
            class: SystemClass::Tgl,
            maps: vec![
                AffineMap2::new(0.5, 0.25, 0.0, 0.0, 0.0),
                AffineMap2::new(0.4, 0.25, 0.0, 0.3, 0.5),
            ],
            columns: vec![1, 1],
        };
        assert!(matches!(
            spec.validate(),
            Err(IfsError::OverlapColumnsInTglClass { left: 1, right: 2 })
        ));
        spec.class = SystemClass::Shifted;
        assert!(spec.validate().is_ok());
        spec.maps[1].b = 0.6;
        spec.maps[1].tx = 0.4;
        assert!(matches!(spec.validate(), Err(IfsError::ColumnWidthExcess(_))));
    }

    #[test]
    fn out_of_square_rejected() {
        let mut spec = fm_carpet(0.3);
        spec.maps[0].ty = 0.8;
        assert!(matches!(spec.validate(), Err(IfsError::OutOfUnitSquare { index: 1, .. })));
    }

    #[test]
    fn partition_errors() {
        let mut spec = fm_carpet(0.3);
        spec.columns = vec![2, 2, 1];
        assert!(matches!(spec.validate(), Err(IfsError::BadPartition(_))));
        spec.columns = vec![6];
        assert!(matches!(spec.validate(), Err(IfsError::BadPartition(_))));
        spec.maps.truncate(1);
        assert!(matches!(spec.validate(), Err(IfsError::TooFewMaps(1))));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"class":"tgl","maps":[],"columns":[],"extra":1}"#;
        assert!(matches!(SystemSpec::from_json(text), Err(IfsError::Parse(_))));
        let text = r#"{"class":"tgl","maps":[{"b":0.5,"a":0.1,"d":0,"tx":0,"ty":0,"z":1}],"columns":[1]}"#;
        assert!(matches!(SystemSpec::from_json(text), Err(IfsError::Parse(_))));
    }

    #[test]
    fn a2_warning_only() {
        let spec = SystemSpec {
            class: SystemClass::Tgl,
            maps: vec![
                AffineMap2::new(0.25, 0.2, 0.0, 0.1, 0.0),
                AffineMap2::new(0.25, 0.2, 0.0, 0.5, 0.0),
            ],
            columns: vec![1, 1],
        };
        let sys = spec.validate().unwrap();
        assert_eq!(sys.warnings().len(), 1);
    }

    #[test]
    fn empty_word_is_identity() {
        let sys = fm_carpet(0.3).validate().unwrap();
        assert_eq!(cylinder(&sys, &[]).unwrap(), Cylinder::identity());
    }

    #[test]
    fn two_letter_shear() {
        // Column-contiguous order puts the crossing pair of the overlapping
        // carpet at indices 0 and 1 (d = +0.35 and d = -0.35 at a = 0.15).
        let sys = gallery::build("fm_overlap", &[0.15]).unwrap().system.validate().unwrap();
        let c = cylinder(&sys, &[0, 1]).unwrap();
        assert!((c.d - 0.0641666666666667).abs() < 1e-12);
        assert!((c.b - 1.0 / 9.0).abs() < 1e-15);
        assert!((c.a - 0.0225).abs() < 1e-15);
    }

    #[test]
    fn index_out_of_range() {
        let sys = fm_carpet(0.3).validate().unwrap();
        assert_eq!(cylinder(&sys, &[0, 6]), Err(IfsError::IndexOutOfRange { index: 6, n: 6 }));
    }

    #[test]
    fn skewness_bounds() {
        let sys = gallery::build("mcmullen", &[]).unwrap().system.validate().unwrap();
        assert_eq!(skewness_bound(&sys), 0.0);
        let sys = gallery::build("fm_overlap", &[0.15]).unwrap().system.validate().unwrap();
        assert!((skewness_bound(&sys) - 1.05 / 0.55).abs() < 1e-12);
        assert!((skewness_bound(&sys) - 1.909091).abs() < 1e-6);
        let sys = gallery::build("smiley", &[]).unwrap().system.validate().unwrap();
        assert!((skewness_bound(&sys) - 1.0 / 0.35).abs() < 1e-12);
        assert!((skewness_bound(&sys) - 2.857143).abs() < 1e-6);
    }

    #[test]
    fn column_ifs_reports_offsets() {
        let sys = fm_carpet(0.3).validate().unwrap();
        let h = sys.column_ifs();
        assert_eq!(h.len(), 3);
        for (c, (r, u)) in h.iter().enumerate() {
            assert!((r - 1.0 / 3.0).abs() < 1e-15);
            assert!((u - c as f64 / 3.0).abs() < 1e-15);
        }
    }
}
