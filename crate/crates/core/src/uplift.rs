//! Three-dimensional lower-triangular uplifts of planar systems.
//!
//! An uplift adds a third row `(u_i, v_i, λ_i)` and translation `tz_i` to
//! each planar map, with `0 < |λ_i| < |a_i|`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conditions::{overlap_pairs, SeparationCheck};
use crate::geometry::{parallelepipeds_disjoint, Parallelepiped};
use crate::ifs::{skewness_bound, AffineMap2, IfsError, SystemClass, SystemSpec, TglSystem};
use crate::{TriState, EPS_GEOM};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UpliftError {
    #[error("map {index}: |lambda| = {lambda} must satisfy 0 < |lambda| < |a| = {a}")]
    LambdaOrderViolation { index: usize, lambda: f64, a: f64 },
    #[error("map {index}: image of the unit cube leaves [0,1]^3 ({detail})")]
    OutOfUnitCube { index: usize, detail: String },
    #[error("theorem hypotheses not met: {0}")]
    TheoremHypothesisViolation(String),
    #[error("skew series diverges: {0}")]
    SeriesDiverges(String),
    #[error("expected {expected} entries in `{field}`, got {got}")]
    LengthMismatch { field: &'static str, expected: usize, got: usize },
    #[error("malformed uplift spec: {0}")]
    Parse(String),
    #[error(transparent)]
    Base(#[from] IfsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpliftMap {
    pub b: f64,
    pub a: f64,
    pub d: f64,
    pub tx: f64,
    pub ty: f64,
    pub u: f64,
    pub v: f64,
    pub lambda: f64,
    pub tz: f64,
}

impl UpliftMap {
    pub fn planar(&self) -> AffineMap2 {
        AffineMap2::new(self.b, self.a, self.d, self.tx, self.ty)
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        [
            self.b * p[0] + self.tx,
            self.d * p[0] + self.a * p[1] + self.ty,
            self.u * p[0] + self.v * p[1] + self.lambda * p[2] + self.tz,
        ]
    }

    pub fn image(&self) -> Parallelepiped {
        Parallelepiped {
            origin: [self.tx, self.ty, self.tz],
            edges: [[self.b, self.d, self.u], [0.0, self.a, self.v], [0.0, 0.0, self.lambda]],
        }
    }
}

/// JSON format: the planar system format with per-map `u, v, lambda, tz`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpliftSpec {
    pub class: SystemClass,
    pub maps: Vec<UpliftMap>,
    pub columns: Vec<usize>,
}

impl UpliftSpec {
    pub fn from_json(text: &str) -> Result<Self, UpliftError> {
        serde_json::from_str(text).map_err(|e| UpliftError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("uplift spec serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, crate::Error> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| crate::Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Ok(Self::from_json(&text)?)
    }

    /// The planar system obtained by discarding the third row.
    pub fn base_spec(&self) -> SystemSpec {
        SystemSpec {
            class: self.class,
            maps: self.maps.iter().map(UpliftMap::planar).collect(),
            columns: self.columns.clone(),
        }
    }

    pub fn validate(&self) -> Result<UpliftSystem, UpliftError> {
        let base = self.base_spec().validate()?;
        build(base, self.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpliftSystem {
    spec: UpliftSpec,
    base: TglSystem,
    rosc3d: SeparationCheck,
}

impl UpliftSystem {
    pub fn base(&self) -> &TglSystem {
        &self.base
    }

    pub fn maps(&self) -> &[UpliftMap] {
        &self.spec.maps
    }

    pub fn spec(&self) -> &UpliftSpec {
        &self.spec
    }

    /// Pairwise disjointness of the images of the open unit cube.
    pub fn rosc3d(&self) -> &SeparationCheck {
        &self.rosc3d
    }
}

/// Builds an uplift of a validated planar system from the third-row data.
pub fn validate_uplift(
    base: &TglSystem,
    u: &[f64],
    v: &[f64],
    lambda: &[f64],
    tz: &[f64],
) -> Result<UpliftSystem, UpliftError> {
    let n = base.len();
    for (field, xs) in [("u", u), ("v", v), ("lambda", lambda), ("tz", tz)] {
        if xs.len() != n {
            return Err(UpliftError::LengthMismatch { field, expected: n, got: xs.len() });
        }
    }
    let maps = base
        .maps()
        .iter()
        .enumerate()
        .map(|(i, m)| UpliftMap {
            b: m.b,
            a: m.a,
            d: m.d,
            tx: m.tx,
            ty: m.ty,
            u: u[i],
            v: v[i],
            lambda: lambda[i],
            tz: tz[i],
        })
        .collect();
    let spec = UpliftSpec { class: base.class(), maps, columns: base.partition().sizes().to_vec() };
    build(base.clone(), spec)
}

fn aabb(p: &Parallelepiped) -> ([f64; 3], [f64; 3]) {
    let v = p.vertices();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for x in v {
        for k in 0..3 {
            lo[k] = lo[k].min(x[k]);
            hi[k] = hi[k].max(x[k]);
        }
    }
    (lo, hi)
}

fn build(base: TglSystem, spec: UpliftSpec) -> Result<UpliftSystem, UpliftError> {
    for (i, m) in spec.maps.iter().enumerate() {
        if !m.u.is_finite() || !m.v.is_finite() || !m.lambda.is_finite() || !m.tz.is_finite() {
            return Err(UpliftError::Parse(format!("map {}: non-finite third row", i + 1)));
        }
        if !(m.lambda != 0.0 && m.lambda.abs() < m.a.abs()) {
            return Err(UpliftError::LambdaOrderViolation { index: i + 1, lambda: m.lambda, a: m.a });
        }
        let (lo, hi) = aabb(&m.image());
        if lo.iter().any(|&x| x < -EPS_GEOM) || hi.iter().any(|&x| x > 1.0 + EPS_GEOM) {
            return Err(UpliftError::OutOfUnitCube {
                index: i + 1,
                detail: format!("bounding box [{lo:?}, {hi:?}]"),
            });
        }
    }
    let images: Vec<Parallelepiped> = spec.maps.iter().map(UpliftMap::image).collect();
    let boxes: Vec<_> = images.iter().map(aabb).collect();
    let mut rosc3d = SeparationCheck { verdict: TriState::Holds, witness: None };
    'pairs: for i in 0..images.len() {
        for j in i + 1..images.len() {
            let (a, b) = (&boxes[i], &boxes[j]);
            let apart = (0..3).any(|k| a.1[k] <= b.0[k] + EPS_GEOM || b.1[k] <= a.0[k] + EPS_GEOM);
            if apart {
                continue;
            }
            match parallelepipeds_disjoint(&images[i], &images[j], EPS_GEOM) {
                TriState::Holds => {}
                TriState::Fails => {
                    rosc3d = SeparationCheck { verdict: TriState::Fails, witness: Some([i + 1, j + 1]) };
                    break 'pairs;
                }
                TriState::Unknown => {
                    if rosc3d.verdict == TriState::Holds {
                        rosc3d = SeparationCheck { verdict: TriState::Unknown, witness: Some([i + 1, j + 1]) };
                    }
                }
            }
        }
    }
    Ok(UpliftSystem { spec, base, rosc3d })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpliftDimension {
    /// `1 + log(N b) / (-log a)`.
    pub value: f64,
    pub conditions_met: bool,
    /// `b^{log N / log M}`.
    pub fibre_bound: f64,
    /// `b d_* / (2 + d_*)`, or `b` when no same-column cylinders overlap.
    pub transversality_bound: f64,
    pub d_star: Option<f64>,
    pub caveat: Option<String>,
}

/// Dimension of the uplift attractor for a diagonally homogeneous base with
/// uniform vertical fibres and full horizontal projection (`M b = 1`).
pub fn uplift_dimension(system: &UpliftSystem) -> Result<UpliftDimension, UpliftError> {
    let base = &system.base;
    if !base.flags().diagonally_homogeneous {
        return Err(UpliftError::TheoremHypothesisViolation("base is not diagonally homogeneous".into()));
    }
    let sizes = base.partition().sizes();
    if sizes.iter().any(|&n| n != sizes[0]) {
        return Err(UpliftError::TheoremHypothesisViolation(format!(
            "vertical fibres are not uniform: column sizes {sizes:?}"
        )));
    }
    let b = base.maps()[0].b.abs();
    let a = base.maps()[0].a.abs();
    let (n, m) = (base.len() as f64, base.columns() as f64);
    if (m * b - 1.0).abs() > 1e-9 {
        return Err(UpliftError::TheoremHypothesisViolation(format!(
            "projection is not the full interval: M b = {}",
            m * b
        )));
    }
    let maps = base.maps();
    let d_star = overlap_pairs(base)
        .into_iter()
        .flatten()
        .map(|(k, l)| (maps[k].d - maps[l].d).abs())
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |y| y.min(x))));
    let fibre_bound = b.powf(n.ln() / m.ln());
    let transversality_bound = d_star.map_or(b, |d| b * d / (2.0 + d));
    let conditions_met = a < fibre_bound && a < transversality_bound;
    let caveat = match (conditions_met, system.rosc3d.verdict) {
        (false, _) => Some("hypotheses unverified: a is not below the smallness bound".into()),
        (true, TriState::Holds) => None,
        (true, TriState::Fails) => Some("images of the unit cube overlap; ROSC in 3D fails".into()),
        (true, TriState::Unknown) => Some("ROSC in 3D could not be certified".into()),
    };
    Ok(UpliftDimension {
        value: 1.0 + (n * b).ln() / -a.ln(),
        conditions_met,
        fibre_bound,
        transversality_bound,
        d_star,
        caveat,
    })
}

/// Entrywise bounds on composed linear parts: for every word `w`,
/// `|A_w[1][0]| <= K_x |b_w|`, `|A_w[2][0]| <= K_y |b_w|` and
/// `|A_w[2][1]| <= K_z |b_w|`; moreover `|A_w[2][1]| <= c r^n |b_w|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewBounds {
    pub k_x: f64,
    pub k_y: f64,
    pub k_z: f64,
    pub c: f64,
    pub r: f64,
}

/// With `ρ = max|a/b|`, `μ = max|λ/b|`, `V = max|v/b|`, `U = max|u/b|` and
/// `D = max|d/b|`, the normalised entries obey
/// `z_{n+1} = z_n (a/b) + (λ_w/b_w)(v/b)` and
/// `y_{n+1} = y_n + z_n (d/b) + (λ_w/b_w)(u/b)`, so
/// `|z_n| <= V (ρ^n - μ^n)/(ρ - μ)` and summing the second recurrence gives
/// `K_y = U + D V/(ρ-μ) (ρ/(1-ρ) - μ/(1-μ)) + U μ/(1-μ)`.
pub fn uplift_skew_bounds(system: &UpliftSystem) -> Result<SkewBounds, UpliftError> {
    let maps = &system.spec.maps;
    let max = |f: &dyn Fn(&UpliftMap) -> f64| maps.iter().map(f).fold(0.0, f64::max);
    let rho = max(&|m| (m.a / m.b).abs());
    let mu = max(&|m| (m.lambda / m.b).abs());
    let vv = max(&|m| (m.v / m.b).abs());
    let uu = max(&|m| (m.u / m.b).abs());
    let dd = max(&|m| (m.d / m.b).abs());
    if !(rho < 1.0 && mu < 1.0) {
        return Err(UpliftError::SeriesDiverges(format!("max|a/b| = {rho}, max|lambda/b| = {mu}")));
    }
    if !(mu < rho) {
        return Err(UpliftError::SeriesDiverges(format!("max|lambda/b| = {mu} >= max|a/b| = {rho}")));
    }
    let c = vv / (rho - mu);
    let mut k_z: f64 = 0.0;
    let (mut rn, mut mn) = (1.0f64, 1.0f64);
    for _ in 0..100_000 {
        rn *= rho;
        mn *= mu;
        k_z = k_z.max(c * (rn - mn));
        if rn < 1e-300 {
            break;
        }
    }
    let k_y = uu + dd * c * (rho / (1.0 - rho) - mu / (1.0 - mu)) + uu * mu / (1.0 - mu);
    Ok(SkewBounds { k_x: skewness_bound(&system.base), k_y, k_z, c, r: rho })
}

/// Linear part and translation of `F_{w_1} ∘ … ∘ F_{w_n}` (0-based indices).
pub fn word_matrix(system: &UpliftSystem, word: &[usize]) -> Result<([[f64; 3]; 3], [f64; 3]), UpliftError> {
    let mut m = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut t = [0.0; 3];
    for &i in word {
        let f = system
            .spec
            .maps
            .get(i)
            .ok_or(IfsError::IndexOutOfRange { index: i, n: system.spec.maps.len() })?;
        let a = [[f.b, 0.0, 0.0], [f.d, f.a, 0.0], [f.u, f.v, f.lambda]];
        let ft = [f.tx, f.ty, f.tz];
        for r in 0..3 {
            t[r] += (0..3).map(|k| m[r][k] * ft[k]).sum::<f64>();
        }
        let mut next = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                next[r][c] = (0..3).map(|k| m[r][k] * a[k][c]).sum();
            }
        }
        m = next;
    }
    Ok((m, t))
}
