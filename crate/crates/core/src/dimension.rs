//! Hausdorff, box and affinity dimension quantities of TGL systems.
//!
//! All logarithms are natural. Every formula uses `|a_i|` and `|b_i|`.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conditions::{self, ConditionOptions};
use crate::ifs::{ColumnPartition, SystemClass, TglSystem};
use crate::numerics::{
    maximize_simplex, solve_monotone, NumericError, RootConfig, SimplexObjective, SimplexOptConfig,
};
use crate::TriState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DimensionError {
    #[error("length mismatch: expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("probability entry {0} is not strictly positive")]
    ZeroEntry(usize),
    #[error("not a probability vector: {0}")]
    InvalidProbVector(String),
    #[error("empty ratio list")]
    EmptyInput,
    #[error("ratio {0} outside (0, 1)")]
    RatioOutOfRange(f64),
    #[error("optimizer failure: {0}")]
    OptimizerFailure(NumericError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Nonnegative vector summing to one within `1e-12`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(p: Vec<f64>) -> Result<Self, DimensionError> {
        if p.is_empty() {
            return Err(DimensionError::InvalidProbVector("empty".into()));
        }
        if let Some(i) = p.iter().position(|x| !x.is_finite() || *x < 0.0) {
            return Err(DimensionError::InvalidProbVector(format!("entry {} is {}", i + 1, p[i])));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(DimensionError::InvalidProbVector(format!("entries sum to {s}")));
        }
        Ok(Self(p))
    }

    /// Rescales a nonnegative vector with positive sum.
    pub fn normalized(p: Vec<f64>) -> Result<Self, DimensionError> {
        let s: f64 = p.iter().sum();
        if !(s > 0.0) || !s.is_finite() {
            return Err(DimensionError::InvalidProbVector(format!("entries sum to {s}")));
        }
        Self::new(p.into_iter().map(|x| x / s).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ProbVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn check_len(system: &TglSystem, p: &[f64]) -> Result<(), DimensionError> {
    if p.len() != system.len() {
        return Err(DimensionError::LengthMismatch { expected: system.len(), got: p.len() });
    }
    Ok(())
}

fn check_positive(p: &[f64]) -> Result<(), DimensionError> {
    match p.iter().position(|&x| !(x > 0.0)) {
        Some(i) => Err(DimensionError::ZeroEntry(i)),
        None => Ok(()),
    }
}

fn marginal(partition: &ColumnPartition, p: &[f64]) -> Vec<f64> {
    (0..partition.len()).map(|c| partition.range(c).map(|k| p[k]).sum()).collect()
}

/// `q_î = Σ_{j in column î} p_j`.
pub fn column_marginal(system: &TglSystem, p: &[f64]) -> Result<Vec<f64>, DimensionError> {
    check_len(system, p)?;
    Ok(marginal(system.partition(), p))
}

/// `-Σ x log x` with `0 log 0 = 0`.
fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

/// Entropy `h = -Σ p log p` and Lyapunov exponents
/// `χ1 = -Σ p log|b|`, `χ2 = -Σ p log|a|` of the Bernoulli measure.
pub fn entropy_and_lyapunov(system: &TglSystem, p: &[f64]) -> Result<(f64, f64, f64), DimensionError> {
    check_len(system, p)?;
    check_positive(p)?;
    let chi1 = -p.iter().zip(system.maps()).map(|(p, m)| p * m.b.abs().ln()).sum::<f64>();
    let chi2 = -p.iter().zip(system.maps()).map(|(p, m)| p * m.a.abs().ln()).sum::<f64>();
    Ok((entropy(p), chi1, chi2))
}

/// The dimension expression maximised over Bernoulli measures,
/// `D(p) = h(q)/χ1 + (h(p) - h(q))/χ2`.
#[derive(Clone, Debug)]
pub struct DimObjective {
    beta: Vec<f64>,
    alpha: Vec<f64>,
    column_of: Vec<usize>,
    columns: usize,
}

impl DimObjective {
    pub fn new(system: &TglSystem) -> Self {
        Self {
            beta: system.maps().iter().map(|m| -m.b.abs().ln()).collect(),
            alpha: system.maps().iter().map(|m| -m.a.abs().ln()).collect(),
            column_of: (0..system.len()).map(|i| system.partition().column_of(i)).collect(),
            columns: system.columns(),
        }
    }

    fn q(&self, p: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.columns];
        for (i, &x) in p.iter().enumerate() {
            q[self.column_of[i]] += x;
        }
        q
    }
}

impl SimplexObjective for DimObjective {
    fn dim(&self) -> usize {
        self.beta.len()
    }

    fn value(&self, p: &[f64]) -> f64 {
        let hq = entropy(&self.q(p));
        let hp = entropy(p);
        let chi1: f64 = p.iter().zip(&self.beta).map(|(p, b)| p * b).sum();
        let chi2: f64 = p.iter().zip(&self.alpha).map(|(p, a)| p * a).sum();
        hq / chi1 + (hp - hq) / chi2
    }

    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let q = self.q(p);
        let hq = entropy(&q);
        let hp = entropy(p);
        let chi1: f64 = p.iter().zip(&self.beta).map(|(p, b)| p * b).sum();
        let chi2: f64 = p.iter().zip(&self.alpha).map(|(p, a)| p * a).sum();
        (0..p.len())
            .map(|i| {
                let dq = -q[self.column_of[i]].ln() - 1.0;
                let dp = -p[i].ln() - 1.0;
                dq / chi1 - hq * self.beta[i] / (chi1 * chi1) + (dp - dq) / chi2
                    - (hp - hq) * self.alpha[i] / (chi2 * chi2)
            })
            .collect()
    }
}

pub fn dim_formula_d(system: &TglSystem, p: &[f64]) -> Result<f64, DimensionError> {
    check_len(system, p)?;
    check_positive(p)?;
    Ok(DimObjective::new(system).value(p))
}

/// Unique `s >= 0` with `Σ r_i^s = 1`.
pub fn similarity_dimension(ratios: &[f64]) -> Result<f64, DimensionError> {
    if ratios.is_empty() {
        return Err(DimensionError::EmptyInput);
    }
    if let Some(&r) = ratios.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
        return Err(DimensionError::RatioOutOfRange(r));
    }
    let f = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let mut hi = 2.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    Ok(solve_monotone(f, 0.0, hi, &RootConfig::default())?)
}

/// Affinity dimension: `s̃ₓ` if below 1, else the root of
/// `Σ |b_i| |a_i|^{s-1} = 1`.
pub fn affinity_dimension(system: &TglSystem) -> Result<f64, DimensionError> {
    let sx = similarity_dimension(&system.abs_b())?;
    if sx < 1.0 {
        return Ok(sx);
    }
    let (b, a) = (system.abs_b(), system.abs_a());
    let f = |s: f64| b.iter().zip(&a).map(|(b, a)| b * a.powf(s - 1.0)).sum::<f64>() - 1.0;
    Ok(solve_monotone(f, 1.0, 2.0, &RootConfig::default())?)
}

/// Root of `Σ |b_i|^{s_H} |a_i|^{s - s_H} = 1`, which lies in `[s_H, 2]`.
fn box_root(b: &[f64], a: &[f64], s_h: f64) -> Result<f64, NumericError> {
    let f = |s: f64| b.iter().zip(a).map(|(b, a)| b.powf(s_h) * a.powf(s - s_h)).sum::<f64>() - 1.0;
    if f(s_h) <= 0.0 {
        return Ok(s_h);
    }
    solve_monotone(f, s_h, 2.0, &RootConfig::default())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDimension {
    pub s: f64,
    #[serde(rename = "s_H")]
    pub s_h: f64,
    pub s_x: f64,
    pub assumption: Option<String>,
}

pub const SHIFTED_ASSUMPTION: &str = "s_H taken as the similarity dimension of the column IFS (assumes no dimension drop)";

/// Upper box dimension `s` and the projection dimension `s_H` it uses.
pub fn box_dimension_upper(system: &TglSystem) -> Result<BoxDimension, DimensionError> {
    let s_x = similarity_dimension(system.partition().widths())?;
    let s = box_root(&system.abs_b(), &system.abs_a(), s_x)?;
    let assumption = match system.class() {
        SystemClass::Tgl => None,
        SystemClass::Shifted => Some(SHIFTED_ASSUMPTION.to_string()),
    };
    Ok(BoxDimension { s, s_h: s_x, s_x, assumption })
}

/// `Σ_{j in column} |a_j|^{s - s_H} = 1` for every column (within `1e-9`).
pub(crate) fn uniform_fibre_criterion(b: &[f64], a: &[f64], partition: &ColumnPartition) -> bool {
    let Ok(s_h) = similarity_dimension(partition.widths()) else { return false };
    let Ok(s) = box_root(b, a, s_h) else { return false };
    (0..partition.len()).all(|c| {
        let sum: f64 = partition.range(c).map(|k| a[k].powf(s - s_h)).sum();
        (sum - 1.0).abs() <= 1e-9
    })
}

/// Natural weights `p̃_i = |b_i|^{s_H} |a_i|^{s - s_H}` and their column sums.
pub fn natural_box_weights(system: &TglSystem) -> Result<(ProbVector, ProbVector), DimensionError> {
    let bd = box_dimension_upper(system)?;
    let raw: Vec<f64> = system
        .maps()
        .iter()
        .map(|m| m.b.abs().powf(bd.s_h) * m.a.abs().powf(bd.s - bd.s_h))
        .collect();
    let p = ProbVector::normalized(raw)?;
    let q = ProbVector::normalized(marginal(system.partition(), &p))?;
    Ok((p, q))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HausdorffMethod {
    ClosedForm,
    Optimizer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HausdorffDimension {
    pub alpha_star: f64,
    pub p_star: ProbVector,
    pub method: HausdorffMethod,
}

/// Closed-form maximiser for diagonally homogeneous systems:
/// with `x = log b / log a`, `p*_k = N_î^{x-1} / Σ_ĵ N_ĵ^x` and
/// `α* = log Σ N_ĵ^x / (-log b)`.
pub fn diag_homo_optimum(system: &TglSystem) -> Option<HausdorffDimension> {
    if !system.flags().diagonally_homogeneous {
        return None;
    }
    let b = system.maps()[0].b.abs();
    let a = system.maps()[0].a.abs();
    let x = b.ln() / a.ln();
    let sizes = system.partition().sizes();
    let total: f64 = sizes.iter().map(|&n| (n as f64).powf(x)).sum();
    let p: Vec<f64> = (0..system.len())
        .map(|k| {
            let n = sizes[system.partition().column_of(k)] as f64;
            n.powf(x - 1.0) / total
        })
        .collect();
    Some(HausdorffDimension {
        alpha_star: total.ln() / -b.ln(),
        p_star: ProbVector::normalized(p).ok()?,
        method: HausdorffMethod::ClosedForm,
    })
}

/// Numerical maximisation of `D(p)` over the simplex.
pub fn maximize_dim_formula(
    system: &TglSystem,
    cfg: &SimplexOptConfig,
) -> Result<HausdorffDimension, DimensionError> {
    let obj = DimObjective::new(system);
    let mut warm = vec![vec![1.0 / system.len() as f64; system.len()]];
    if let Ok((p, _)) = natural_box_weights(system) {
        warm.push(p.into_inner());
    }
    if let Some(h) = diag_homo_optimum(system) {
        warm.push(h.p_star.into_inner());
    }
    let opt = maximize_simplex(&obj, cfg, &warm).map_err(DimensionError::OptimizerFailure)?;
    Ok(HausdorffDimension {
        alpha_star: opt.value,
        p_star: ProbVector::normalized(opt.p)?,
        method: HausdorffMethod::Optimizer,
    })
}

/// `α* = max_p D(p)`: closed form when diagonally homogeneous, otherwise
/// the multi-start optimizer.
pub fn hausdorff_dimension_upper(system: &TglSystem) -> Result<HausdorffDimension, DimensionError> {
    match diag_homo_optimum(system) {
        Some(h) => Ok(h),
        None => maximize_dim_formula(system, &SimplexOptConfig::default()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equality {
    Equal,
    Strict,
    Unknown,
}

impl fmt::Display for Equality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Equality::Equal => "equal",
            Equality::Strict => "strict",
            Equality::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub alpha_star: f64,
    pub p_star: ProbVector,
    pub s: f64,
    #[serde(rename = "s_A")]
    pub s_a: f64,
    #[serde(rename = "s_H")]
    pub s_h: f64,
    pub s_x: f64,
    pub s_tilde_x: f64,
    pub h: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub p_tilde: ProbVector,
    pub q_tilde: ProbVector,
    pub uniform_vertical_fibres: bool,
    #[serde(rename = "equal_HB")]
    pub equal_hb: Equality,
    #[serde(rename = "equal_B_Aff")]
    pub equal_b_aff: Equality,
    pub assumptions: Vec<String>,
}

/// Every dimension quantity plus the equality diagnostics.
///
/// `equal_HB` is decided only when both `dim_B = s` and `dim_H = α*` are
/// certified by the checkable conditions (projection separation plus ROSC,
/// or transversality with the relevant overlap inequality); it is then
/// `equal` exactly when the system has uniform vertical fibres.
pub fn dimension_report(system: &TglSystem) -> Result<DimensionReport, crate::Error> {
    let haus = hausdorff_dimension_upper(system)?;
    let bd = box_dimension_upper(system)?;
    let s_a = affinity_dimension(system)?;
    let s_tilde_x = similarity_dimension(&system.abs_b())?;
    let (p_tilde, q_tilde) = natural_box_weights(system)?;
    let (h, chi1, chi2) = entropy_and_lyapunov(system, &haus.p_star)?;
    let cond = conditions::condition_report_with(system, &haus, &ConditionOptions::default())?;

    let mut assumptions = Vec::new();
    if let Some(a) = &bd.assumption {
        assumptions.push(a.clone());
    }
    let hesc = match system.class() {
        SystemClass::Tgl => TriState::Holds,
        SystemClass::Shifted => match &cond.exact_overlap {
            Some(scan) if scan.found.is_some() => {
                assumptions.push("exact overlap in the column IFS: the s_H assumption is violated".into());
                TriState::Fails
            }
            _ => TriState::Unknown,
        },
    };
    let col_rosc = cond.columnwise_rosc.verdict.holds();
    let trans = cond.transversality.holds;
    let box_ok = hesc.holds()
        && (col_rosc || (system.class() == SystemClass::Tgl && trans && cond.cond_box.holds));
    let haus_ok = hesc.holds() && (col_rosc || (trans && cond.cond_main.holds));
    if !haus_ok {
        assumptions.push("alpha_star is an upper bound for dim_H; equality not certified".into());
    }
    if !box_ok {
        assumptions.push("s is an upper bound for the upper box dimension; equality not certified".into());
    }
    let uniform = system.flags().uniform_vertical_fibres;
    let equal_hb = if box_ok && haus_ok {
        if uniform {
            Equality::Equal
        } else {
            Equality::Strict
        }
    } else {
        Equality::Unknown
    };
    let equal_b_aff = if (bd.s_h - s_tilde_x.min(1.0)).abs() <= 1e-9 {
        Equality::Equal
    } else {
        Equality::Strict
    };
    Ok(DimensionReport {
        alpha_star: haus.alpha_star,
        p_star: haus.p_star,
        s: bd.s,
        s_a,
        s_h: bd.s_h,
        s_x: bd.s_x,
        s_tilde_x,
        h,
        chi1,
        chi2,
        p_tilde,
        q_tilde,
        uniform_vertical_fibres: uniform,
        equal_hb,
        equal_b_aff,
        assumptions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use crate::numerics::grad_check;

    fn sys(name: &str, params: &[f64]) -> TglSystem {
        gallery::build(name, params).unwrap().system.validate().unwrap()
    }

    fn fm(a: f64) -> f64 {
        1.0 - 2f64.ln() / a.ln()
    }

    #[test]
    fn marginals() {
        let s = sys("fm_carpet", &[0.3]);
        let q = column_marginal(&s, &ProbVector::uniform(6)).unwrap();
        for x in q {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        let q = column_marginal(&s, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(q, vec![0.0, 1.0, 0.0]);
        assert!(matches!(column_marginal(&s, &[1.0]), Err(DimensionError::LengthMismatch { .. })));
        let x = sys("x_equiv_x", &[0.045]);
        let q = column_marginal(&x, &ProbVector::uniform(7)).unwrap();
        assert!((q[0] - 2.0 / 7.0).abs() < 1e-15 && (q[1] - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_and_exponents() {
        let s = sys("fm_carpet", &[0.3]);
        let (h, c1, c2) = entropy_and_lyapunov(&s, &ProbVector::uniform(6)).unwrap();
        assert!((h - 6f64.ln()).abs() < 1e-14);
        assert!((c1 - 1.098612).abs() < 1e-6);
        assert!((c2 - 1.203973).abs() < 1e-6);
        assert!(matches!(
            entropy_and_lyapunov(&s, &[0.5, 0.5, 0.0, 0.0, 0.0, 0.0]),
            Err(DimensionError::ZeroEntry(2))
        ));
        let x = sys("x_equiv_x", &[0.045]);
        let p = hausdorff_dimension_upper(&x).unwrap().p_star;
        let (_, c1, _) = entropy_and_lyapunov(&x, &p).unwrap();
        assert!((c1 - 1.272966).abs() < 1e-6);
    }

    #[test]
    fn d_formula_values() {
        let s = sys("fm_carpet", &[0.3]);
        let d = dim_formula_d(&s, &ProbVector::uniform(6)).unwrap();
        assert!((d - fm(0.3)).abs() < 1e-12);
        assert!((d - 1.575716).abs() < 1e-6);
    }

    #[test]
    fn d_formula_one_map_per_column() {
        let m = sys("mcmullen", &[]);
        let spec = crate::SystemSpec {
            class: SystemClass::Tgl,
            maps: vec![m.maps()[0], m.maps()[2]],
            columns: vec![1, 1],
        };
        let s = spec.validate().unwrap();
        let p = [0.3, 0.7];
        let hq = -(0.3f64 * 0.3f64.ln() + 0.7 * 0.7f64.ln());
        let expect = hq / 2f64.ln();
        assert!((dim_formula_d(&s, &p).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn analytic_gradient_matches() {
        let s = sys("smiley", &[]);
        let obj = DimObjective::new(&s);
        assert!(grad_check(&obj, &ProbVector::uniform(8), 1e-6) <= 1e-5);
        let p = [0.05, 0.1, 0.15, 0.2, 0.1, 0.1, 0.2, 0.1];
        assert!(grad_check(&obj, &p, 1e-6) <= 1e-5);
    }

    #[test]
    fn similarity_dimensions() {
        assert!((similarity_dimension(&[1.0 / 3.0; 3]).unwrap() - 1.0).abs() < 1e-12);
        assert!((similarity_dimension(&[0.5, 0.25]).unwrap() - 0.6942419136).abs() < 1e-9);
        assert!((similarity_dimension(&[0.2; 5]).unwrap() - 1.0).abs() < 1e-12);
        assert!((similarity_dimension(&[0.2; 8]).unwrap() - 1.2920296742).abs() < 1e-9);
        // Above the planar bracket.
        assert!((similarity_dimension(&[0.1; 1000]).unwrap() - 3.0).abs() < 1e-11);
        assert_eq!(similarity_dimension(&[0.5]).unwrap(), 0.0);
        assert_eq!(similarity_dimension(&[]), Err(DimensionError::EmptyInput));
        assert_eq!(similarity_dimension(&[1.0]), Err(DimensionError::RatioOutOfRange(1.0)));
    }

    #[test]
    fn affinity_dimensions() {
        assert!((affinity_dimension(&sys("smiley", &[])).unwrap() - 1.21340).abs() < 1e-5);
        let x = sys("x_equiv_x", &[0.045]);
        let expect = 1.0 + 0.67294 / -(0.045f64.ln());
        assert!((affinity_dimension(&x).unwrap() - expect).abs() < 1e-5);
        assert!((affinity_dimension(&x).unwrap() - 1.21700).abs() < 1e-5);
        let spec = crate::SystemSpec {
            class: SystemClass::Tgl,
            maps: vec![
                crate::AffineMap2::new(0.25, 0.1, 0.0, 0.0, 0.0),
                crate::AffineMap2::new(0.25, 0.2, 0.0, 0.75, 0.3),
            ],
            columns: vec![1, 1],
        };
        assert!((affinity_dimension(&spec.validate().unwrap()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn box_dimensions() {
        let b = box_dimension_upper(&sys("smiley", &[])).unwrap();
        assert!((b.s - 1.213398).abs() < 1e-6);
        assert!((b.s_h - 1.0).abs() < 1e-12);
        let b = box_dimension_upper(&sys("x_equiv_x", &[0.045])).unwrap();
        assert!((b.s - 1.13626).abs() < 1e-5);
        assert!((b.s_h - 3f64.ln() / -0.28f64.ln()).abs() < 1e-12);
        let b = box_dimension_upper(&sys("fm_carpet", &[0.3])).unwrap();
        assert!((b.s - fm(0.3)).abs() < 1e-11);
        assert!(b.assumption.is_none());
    }

    #[test]
    fn hausdorff_dimensions() {
        let h = hausdorff_dimension_upper(&sys("smiley", &[])).unwrap();
        assert_eq!(h.method, HausdorffMethod::Optimizer);
        assert!((h.alpha_star - 1.20665).abs() < 1e-4);
        let h = hausdorff_dimension_upper(&sys("x_equiv_x", &[0.045])).unwrap();
        assert!((h.alpha_star - 1.13259).abs() < 1e-3);
        let h = hausdorff_dimension_upper(&sys("mcmullen", &[])).unwrap();
        assert!((h.alpha_star - (1.0 + 2f64.sqrt()).ln() / 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn optimizer_reproduces_closed_form() {
        for s in [sys("x_equiv_x", &[0.045]), sys("mcmullen", &[]), sys("fm_overlap", &[0.1])] {
            let closed = diag_homo_optimum(&s).unwrap();
            let num = maximize_dim_formula(&s, &SimplexOptConfig::default()).unwrap();
            assert!((closed.alpha_star - num.alpha_star).abs() < 1e-8);
            let qc = column_marginal(&s, &closed.p_star).unwrap();
            let qn = column_marginal(&s, &num.p_star).unwrap();
            for (x, y) in qc.iter().zip(&qn) {
                assert!((x - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn natural_weights() {
        let (p, q) = natural_box_weights(&sys("x_equiv_x", &[0.045])).unwrap();
        for x in p.iter() {
            assert!((x - 1.0 / 7.0).abs() < 1e-10);
        }
        assert!((q[1] - 3.0 / 7.0).abs() < 1e-10);
        let s = sys("smiley", &[]);
        let bd = box_dimension_upper(&s).unwrap();
        let (p, _) = natural_box_weights(&s).unwrap();
        for (x, m) in p.iter().zip(s.maps()) {
            assert!((x - 0.2 * m.a.powf(bd.s - 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn ledrappier_young_identity() {
        for s in [sys("smiley", &[]), sys("x_equiv_x", &[0.045]), sys("mcmullen", &[])] {
            let bd = box_dimension_upper(&s).unwrap();
            let (p, _) = natural_box_weights(&s).unwrap();
            let (h, c1, c2) = entropy_and_lyapunov(&s, &p).unwrap();
            assert!((bd.s - (h / c2 + (1.0 - c1 / c2) * bd.s_h)).abs() < 1e-9);
        }
    }

    #[test]
    fn reports_and_flags() {
        let r = dimension_report(&sys("fm_carpet", &[0.3])).unwrap();
        assert_eq!(r.equal_hb, Equality::Equal);
        assert_eq!(r.equal_b_aff, Equality::Equal);
        assert!((r.alpha_star - r.s).abs() < 1e-12);

        let r = dimension_report(&sys("smiley", &[])).unwrap();
        assert_eq!(r.equal_hb, Equality::Strict);
        assert_eq!(r.equal_b_aff, Equality::Equal);

        let r = dimension_report(&sys("x_equiv_x", &[0.045])).unwrap();
        assert_eq!(r.equal_hb, Equality::Strict);
        assert_eq!(r.equal_b_aff, Equality::Strict);
        assert!(r.alpha_star <= r.s && r.s <= r.s_a);
    }

    #[test]
    fn report_json_field_names() {
        let r = dimension_report(&sys("mcmullen", &[])).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["alpha_star", "p_star", "s", "s_A", "s_H", "s_x", "s_tilde_x", "h", "chi1", "chi2", "equal_HB", "equal_B_Aff", "assumptions"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn prob_vector_checks() {
        assert!(ProbVector::new(vec![0.5, 0.5]).is_ok());
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![-0.5, 1.5]).is_err());
        assert!(ProbVector::normalized(vec![0.0, 0.0]).is_err());
    }
}
