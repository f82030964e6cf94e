//! Separation and overlap conditions with numeric margins.
//!
//! Every check that reports a margin follows the same convention: the
//! condition holds exactly when the margin is positive.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dimension::{self, DimensionError, HausdorffDimension};
use crate::geometry::convex_interiors_intersect;
use crate::ifs::{AffineMap2, SystemClass, TglSystem};
use crate::numerics::{solve_monotone, NumericError, RootConfig};
use crate::{TriState, EPS_GEOM};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConditionError {
    #[error("system is not diagonally homogeneous")]
    NotDiagHomo,
    #[error("every column holds a single map; the condition is vacuous")]
    AllColumnsSingleton,
    #[error("exact-overlap scan too large: {columns}^{n_max} words exceeds 10^6")]
    ScanTooLarge { columns: usize, n_max: usize },
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Largest number of words enumerated by [`exact_overlap_scan`].
pub const SCAN_LIMIT: f64 = 1e6;

fn intersect(f: &AffineMap2, g: &AffineMap2) -> bool {
    convex_interiors_intersect(&f.corners(), &g.corners(), EPS_GEOM)
}

/// Pairs `(k, l)`, `k < l`, of same-column maps whose level-1 parallelograms
/// have intersecting interiors, grouped by column (0-based indices).
pub fn overlap_pairs(system: &TglSystem) -> Vec<Vec<(usize, usize)>> {
    let maps = system.maps();
    (0..system.columns())
        .map(|c| {
            let r = system.partition().range(c);
            let mut pairs = Vec::new();
            for k in r.clone() {
                for l in k + 1..r.end {
                    if intersect(&maps[k], &maps[l]) {
                        pairs.push((k, l));
                    }
                }
            }
            pairs
        })
        .collect()
}

/// Outcome of an open-set style check; `witness` is the first offending
/// pair, 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationCheck {
    pub verdict: TriState,
    pub witness: Option<[usize; 2]>,
}

fn first_overlap(maps: &[AffineMap2], pairs: impl Iterator<Item = (usize, usize)>) -> SeparationCheck {
    for (k, l) in pairs {
        if intersect(&maps[k], &maps[l]) {
            return SeparationCheck { verdict: TriState::Fails, witness: Some([k + 1, l + 1]) };
        }
    }
    SeparationCheck { verdict: TriState::Holds, witness: None }
}

/// ROSC on an arbitrary list of maps: the images of the open unit square
/// are pairwise disjoint.
pub fn check_rosc_maps(maps: &[AffineMap2]) -> SeparationCheck {
    let n = maps.len();
    first_overlap(maps, (0..n).flat_map(|k| (k + 1..n).map(move |l| (k, l))))
}

pub fn check_rosc(system: &TglSystem) -> SeparationCheck {
    check_rosc_maps(system.maps())
}

/// ROSC restricted to pairs within the same column.
pub fn check_columnwise_rosc(system: &TglSystem) -> SeparationCheck {
    let p = system.partition();
    first_overlap(
        system.maps(),
        (0..p.len()).flat_map(|c| {
            let r = p.range(c);
            r.clone().flat_map(move |k| (k + 1..r.end).map(move |l| (k, l)))
        }),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransversalityCheck {
    pub holds: bool,
    /// `"holds"` or `"inconclusive"`; the criterion is only sufficient.
    pub verdict: String,
    pub s_star: Option<f64>,
    pub r_star: f64,
    pub b_min: f64,
    pub margin: Option<f64>,
}

/// Sufficient transversality criterion: with slopes `s_k = d_k / b_k`,
/// `r* = max |a_k / b_k|`, `b_min = min |b_k|` and `s_*` the smallest slope
/// difference over overlapping same-column pairs, transversality holds when
/// `s_* b_min / (2 + s_* b_min) > r*`. Vacuous without overlapping pairs.
pub fn transversality_sufficient(system: &TglSystem) -> TransversalityCheck {
    let maps = system.maps();
    let r_star = maps.iter().map(|m| (m.a / m.b).abs()).fold(0.0, f64::max);
    let b_min = maps.iter().map(|m| m.b.abs()).fold(f64::INFINITY, f64::min);
    let slope = |k: usize| maps[k].d / maps[k].b;
    let s_star = overlap_pairs(system)
        .into_iter()
        .flatten()
        .map(|(k, l)| (slope(k) - slope(l)).abs())
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))));
    let margin = s_star.map(|s| s * b_min / (2.0 + s * b_min) - r_star);
    let holds = margin.is_none_or(|m| m > 0.0);
    TransversalityCheck {
        holds,
        verdict: if holds { "holds" } else { "inconclusive" }.into(),
        s_star,
        r_star,
        b_min,
        margin,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

/// `log⟨a⟩_p / log⟨b⟩_p > 1 + log⟨N⟩_q / (-log⟨q⟩_q)` with margin
/// `lhs - rhs`.
pub fn check_cond_main(system: &TglSystem, p: &[f64]) -> Result<InequalityCheck, ConditionError> {
    let (_, chi1, chi2) = dimension::entropy_and_lyapunov(system, p)?;
    let q = dimension::column_marginal(system, p)?;
    let log_n: f64 = q
        .iter()
        .zip(system.partition().sizes())
        .map(|(q, &n)| q * (n as f64).ln())
        .sum();
    let lhs = chi2 / chi1;
    let rhs = 1.0 + log_n / entropy(&q);
    Ok(InequalityCheck { holds: lhs > rhs, lhs, rhs, margin: lhs - rhs })
}

/// `h(p̃) - h(q̃) < s_H (χ2(p̃) - χ1(p̃))` at the natural box weights, with
/// margin `rhs - lhs`.
pub fn check_cond_box(system: &TglSystem) -> Result<InequalityCheck, ConditionError> {
    let bd = dimension::box_dimension_upper(system)?;
    let (p, q) = dimension::natural_box_weights(system)?;
    let (hp, chi1, chi2) = dimension::entropy_and_lyapunov(system, &p)?;
    let lhs = hp - entropy(&q);
    let rhs = bd.s_h * (chi2 - chi1);
    Ok(InequalityCheck { holds: lhs < rhs, lhs, rhs, margin: rhs - lhs })
}

/// Unique `x0` in `(0, 1)` with `R(x0) = 1`, where
/// `R(x) = x + 1/(r(x) - 1)`, `r(x) = φ(Σ N^x) / Σ φ(N^x)`, `φ(y) = y log y`.
///
/// For diagonally homogeneous systems the main overlap condition at the
/// optimal vector is equivalent to `log b / log a < x0`.
pub fn diag_homo_threshold(system: &TglSystem) -> Result<f64, ConditionError> {
    if !system.flags().diagonally_homogeneous {
        return Err(ConditionError::NotDiagHomo);
    }
    threshold_for_counts(system.partition().sizes())
}

/// [`diag_homo_threshold`] from the column counts alone.
pub fn threshold_for_counts(sizes: &[usize]) -> Result<f64, ConditionError> {
    if sizes.iter().all(|&n| n <= 1) {
        return Err(ConditionError::AllColumnsSingleton);
    }
    let phi = |y: f64| y * y.ln();
    let f = |x: f64| {
        let sum: f64 = sizes.iter().map(|&n| (n as f64).powf(x)).sum();
        let den: f64 = sizes.iter().map(|&n| phi((n as f64).powf(x))).sum();
        x + 1.0 / (phi(sum) / den - 1.0) - 1.0
    };
    Ok(solve_monotone(f, 1e-9, 1.0, &RootConfig::default())?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactOverlap {
    pub n: usize,
    /// The two coinciding words, 1-based column indices.
    pub words: [Vec<usize>; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactOverlapScan {
    pub n_max: usize,
    /// `Δ_n` for `n = 1..=n_max`; `None` when no two words share a derivative.
    pub delta: Vec<Option<f64>>,
    pub found: Option<ExactOverlap>,
}

fn word_of(mut index: usize, n: usize, m: usize) -> Vec<usize> {
    let mut w = vec![0; n];
    for slot in w.iter_mut().rev() {
        *slot = index % m + 1;
        index /= m;
    }
    w
}

/// Exact-overlap scan of a one-dimensional IFS `{ r_j x + u_j }` given as
/// `(r_j, u_j)` pairs.
///
/// For each level `n`, words are grouped by derivative `r_w` (relative
/// tolerance `1e-12`) and `Δ_n` is the smallest gap between the values
/// `h_w(0)` inside a group. An exact overlap is reported at the first level
/// with `Δ_n <= 1e-12`.
pub fn exact_overlap_scan_ifs(h: &[(f64, f64)], n_max: usize) -> Result<ExactOverlapScan, ConditionError> {
    let m = h.len();
    if (m as f64).powi(n_max as i32) > SCAN_LIMIT {
        return Err(ConditionError::ScanTooLarge { columns: m, n_max });
    }
    let mut level: Vec<(f64, f64)> = vec![(1.0, 0.0)];
    let mut delta = Vec::with_capacity(n_max);
    let mut found = None;
    for n in 1..=n_max {
        level = level
            .iter()
            .flat_map(|&(r, u)| h.iter().map(move |&(rj, uj)| (r * rj, u + r * uj)))
            .collect();
        let mut order: Vec<usize> = (0..level.len()).collect();
        order.sort_by(|&i, &j| {
            level[i].0.total_cmp(&level[j].0).then(level[i].1.total_cmp(&level[j].1))
        });
        let mut best: Option<(f64, usize, usize)> = None;
        let mut start = 0;
        while start < order.len() {
            let r0 = level[order[start]].0;
            let mut end = start + 1;
            while end < order.len()
                && (level[order[end]].0 - r0).abs() <= 1e-12 * r0.abs().max(level[order[end]].0.abs())
            {
                end += 1;
            }
            let mut group: Vec<usize> = order[start..end].to_vec();
            group.sort_by(|&i, &j| level[i].1.total_cmp(&level[j].1));
            for w in group.windows(2) {
                let gap = level[w[1]].1 - level[w[0]].1;
                if best.is_none_or(|(g, _, _)| gap < g) {
                    best = Some((gap, w[0].min(w[1]), w[0].max(w[1])));
                }
            }
            start = end;
        }
        delta.push(best.map(|b| b.0));
        if found.is_none() {
            if let Some((gap, i, j)) = best {
                if gap <= 1e-12 {
                    found = Some(ExactOverlap { n, words: [word_of(i, n, m), word_of(j, n, m)] });
                }
            }
        }
    }
    Ok(ExactOverlapScan { n_max, delta, found })
}

/// [`exact_overlap_scan_ifs`] on the column IFS of `system`.
pub fn exact_overlap_scan(system: &TglSystem, n_max: usize) -> Result<ExactOverlapScan, ConditionError> {
    exact_overlap_scan_ifs(&system.column_ifs(), n_max)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConditionOptions {
    /// Depth of the exact-overlap scan. When `None`, shifted systems are
    /// scanned to the deepest level with at most `10^5` words and TGL
    /// systems are not scanned.
    pub overlap_scan: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub rosc: SeparationCheck,
    pub columnwise_rosc: SeparationCheck,
    pub transversality: TransversalityCheck,
    pub cond_main: InequalityCheck,
    pub cond_box: InequalityCheck,
    pub x0: Option<f64>,
    pub exact_overlap: Option<ExactOverlapScan>,
    /// Per column, 1-based pairs of maps with overlapping level-1 cylinders.
    pub overlap_pairs: Vec<Vec<[usize; 2]>>,
}

/// Every condition, with `cond_main` evaluated at `p*`.
pub fn condition_report(system: &TglSystem, opts: &ConditionOptions) -> Result<ConditionReport, crate::Error> {
    let haus = dimension::hausdorff_dimension_upper(system)?;
    condition_report_with(system, &haus, opts)
}

/// [`condition_report`] reusing an already computed `p*`.
pub fn condition_report_with(
    system: &TglSystem,
    haus: &HausdorffDimension,
    opts: &ConditionOptions,
) -> Result<ConditionReport, crate::Error> {
    let depth = match (opts.overlap_scan, system.class()) {
        (Some(n), _) => Some(n),
        (None, SystemClass::Shifted) => {
            let m = system.columns() as f64;
            Some((1..=8usize).take_while(|&n| m.powi(n as i32) <= 1e5).last().unwrap_or(1))
        }
        (None, SystemClass::Tgl) => None,
    };
    let exact_overlap = depth.map(|n| exact_overlap_scan(system, n)).transpose()?;
    let x0 = match diag_homo_threshold(system) {
        Ok(x) => Some(x),
        Err(ConditionError::NotDiagHomo | ConditionError::AllColumnsSingleton) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(ConditionReport {
        rosc: check_rosc(system),
        columnwise_rosc: check_columnwise_rosc(system),
        transversality: transversality_sufficient(system),
        cond_main: check_cond_main(system, &haus.p_star)?,
        cond_box: check_cond_box(system)?,
        x0,
        exact_overlap,
        overlap_pairs: overlap_pairs(system)
            .into_iter()
            .map(|c| c.into_iter().map(|(k, l)| [k + 1, l + 1]).collect())
            .collect(),
    })
}
