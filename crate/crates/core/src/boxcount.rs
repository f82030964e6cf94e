//! Empirical box-counting dimension, used as an independent check on the
//! closed-form values.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ifs::TglSystem;
use crate::numerics::{fit_line, NumericError};
use crate::render::{cell_span, check_resolution, point_cell, scan_parallelogram, visit_cover, RenderError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoxCountError {
    #[error("scale range must satisfy 3 <= k_min < k_max <= 12, got [{k_min}, {k_max}]")]
    InvalidRange { k_min: u32, k_max: u32 },
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("line fit failed: {0}")]
    Fit(#[from] NumericError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    /// Conservative rasterization of Moran cylinder covers.
    CylinderCover,
    /// Occupied cells of a chaos-game point cloud (lower fidelity).
    PointCloud,
    /// Interval covers of the column IFS.
    IntervalCover,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCountEstimate {
    pub k: Vec<u32>,
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub method: CountMethod,
}

impl BoxCountEstimate {
    /// `k,delta,count` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,delta,count\n");
        for ((k, d), n) in self.k.iter().zip(&self.scales).zip(&self.counts) {
            let _ = writeln!(out, "{k},{d:e},{n}");
        }
        out
    }
}

fn check_range(k_min: u32, k_max: u32) -> Result<(), BoxCountError> {
    if !(3 <= k_min && k_min < k_max && k_max <= 12) {
        return Err(BoxCountError::InvalidRange { k_min, k_max });
    }
    Ok(())
}

/// Fixed-size bitset of occupied cells.
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn count(&self) -> u64 {
        self.0.iter().map(|w| w.count_ones() as u64).sum()
    }
}

fn fit(ks: Vec<u32>, counts: Vec<u64>, method: CountMethod) -> Result<BoxCountEstimate, BoxCountError> {
    let x: Vec<f64> = ks.iter().map(|&k| k as f64 * std::f64::consts::LN_2).collect();
    let y: Vec<f64> = counts.iter().map(|&n| (n.max(1) as f64).ln()).collect();
    let f = fit_line(&x, &y)?;
    Ok(BoxCountEstimate {
        scales: ks.iter().map(|&k| 0.5f64.powi(k as i32)).collect(),
        k: ks,
        counts,
        slope: f.slope,
        intercept: f.intercept,
        r2: f.r2,
        method,
    })
}

/// For each `k`, covers the attractor by its Moran cylinders at
/// `delta = 2^-k`, rasterizes them conservatively at resolution `2^k` and
/// counts occupied cells; the slope of `log N` against `k log 2` is the
/// estimate.
pub fn empirical_box_dimension(
    system: &TglSystem,
    k_min: u32,
    k_max: u32,
) -> Result<BoxCountEstimate, BoxCountError> {
    check_range(k_min, k_max)?;
    let ks: Vec<u32> = (k_min..=k_max).collect();
    let counts = ks
        .par_iter()
        .map(|&k| {
            let res = 1usize << k;
            let mut bits = Bits::new(res * res);
            visit_cover(system.maps(), 0.5f64.powi(k as i32), |m| {
                scan_parallelogram(m, res, |ix, iy| bits.set(iy * res + ix));
            })?;
            Ok(bits.count())
        })
        .collect::<Result<Vec<u64>, RenderError>>()?;
    fit(ks, counts, CountMethod::CylinderCover)
}

/// Box counting on a point cloud: occupied cells at resolution `2^k`.
pub fn point_cloud_box_dimension(
    points: &[[f64; 2]],
    k_min: u32,
    k_max: u32,
) -> Result<BoxCountEstimate, BoxCountError> {
    check_range(k_min, k_max)?;
    let ks: Vec<u32> = (k_min..=k_max).collect();
    let counts = ks
        .par_iter()
        .map(|&k| {
            let res = 1usize << k;
            let mut bits = Bits::new(res * res);
            for p in points {
                bits.set(point_cell(p[1], res) * res + point_cell(p[0], res));
            }
            bits.count()
        })
        .collect();
    fit(ks, counts, CountMethod::PointCloud)
}

/// Box counting of the attractor of a one-dimensional IFS `{ r x + u }`,
/// given as `(r, u)` pairs, via interval covers at `2^-k`.
pub fn projection_box_dimension(
    h: &[(f64, f64)],
    k_min: u32,
    k_max: u32,
) -> Result<BoxCountEstimate, BoxCountError> {
    check_range(k_min, k_max)?;
    if h.is_empty() || h.iter().any(|&(r, _)| !(r.abs() > 0.0 && r.abs() < 1.0)) {
        return Err(RenderError::InvalidArgument("ratios must lie in (0, 1) in absolute value".into()).into());
    }
    let ks: Vec<u32> = (k_min..=k_max).collect();
    let counts = ks
        .par_iter()
        .map(|&k| {
            let res = 1usize << k;
            check_resolution(res)?;
            let cut = 0.5f64.powi(k as i32) * (1.0 + 1e-12);
            let mut bits = Bits::new(res);
            let mut stack = vec![(1.0f64, 0.0f64)];
            let mut n = 0usize;
            while let Some((r, u)) = stack.pop() {
                for &(rj, uj) in h {
                    let (rc, uc) = (r * rj, u + r * uj);
                    if rc.abs() <= cut {
                        n += 1;
                        if n > crate::render::COVER_LIMIT {
                            return Err(RenderError::CoverTooLarge { limit: crate::render::COVER_LIMIT });
                        }
                        let (lo, hi) = (uc.min(uc + rc), uc.max(uc + rc));
                        let (a, b) = cell_span(lo, hi, res);
                        for i in a..=b {
                            bits.set(i);
                        }
                    } else {
                        stack.push((rc, uc));
                    }
                }
            }
            Ok(bits.count())
        })
        .collect::<Result<Vec<u64>, RenderError>>()?;
    fit(ks, counts, CountMethod::IntervalCover)
}

/// [`projection_box_dimension`] on the column IFS of `system`, estimating
/// the dimension of its horizontal projection.
pub fn empirical_projection_dimension(
    system: &TglSystem,
    k_min: u32,
    k_max: u32,
) -> Result<BoxCountEstimate, BoxCountError> {
    projection_box_dimension(&system.column_ifs(), k_min, k_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{dimension, gallery, render};

    fn sys(name: &str, params: &[f64]) -> TglSystem {
        gallery::build(name, params).unwrap().system.validate().unwrap()
    }

    #[test]
    fn range_checks() {
        let s = sys("mcmullen", &[]);
        for (a, b) in [(2, 5), (5, 5), (6, 5), (4, 13)] {
            assert!(matches!(empirical_box_dimension(&s, a, b), Err(BoxCountError::InvalidRange { .. })));
        }
    }

    #[test]
    fn carpet_estimate() {
        let s = sys("fm_carpet", &[0.3]);
        let e = empirical_box_dimension(&s, 4, 10).unwrap();
        assert!((e.slope - 1.575716).abs() < 0.05, "{}", e.slope);
        assert!(e.r2 >= 0.995);
        assert!(e.counts.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn mcmullen_estimate() {
        let e = empirical_box_dimension(&sys("mcmullen", &[]), 4, 10).unwrap();
        assert!((e.slope - (3f64.ln() / 4f64.ln() + 0.5)).abs() < 0.05, "{}", e.slope);
    }

    #[test]
    fn projection_estimates() {
        let e = empirical_projection_dimension(&sys("fm_carpet", &[0.3]), 4, 10).unwrap();
        assert!((e.slope - 1.0).abs() < 0.02);
        let x = sys("x_equiv_x", &[0.045]);
        let e = empirical_projection_dimension(&x, 4, 12).unwrap();
        assert!((e.slope - 0.86303).abs() < 0.05, "{}", e.slope);
        let third = 1.0 / 3.0;
        let e = projection_box_dimension(&[(third, 0.0), (third, 2.0 * third)], 4, 12).unwrap();
        assert!((e.slope - 2f64.ln() / 3f64.ln()).abs() < 0.03, "{}", e.slope);
    }

    #[test]
    fn point_cloud_estimate_is_plausible() {
        let s = sys("fm_carpet", &[0.3]);
        let pc = render::chaos_game(&s, 400_000, 1, None).unwrap();
        let e = point_cloud_box_dimension(&pc.points, 3, 7).unwrap();
        let exact = dimension::box_dimension_upper(&s).unwrap().s;
        assert!((e.slope - exact).abs() < 0.15, "{}", e.slope);
        assert_eq!(e.method, CountMethod::PointCloud);
    }

    #[test]
    fn csv_layout() {
        let e = empirical_box_dimension(&sys("mcmullen", &[]), 3, 5).unwrap();
        let csv = e.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,delta,count");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("3,"));
    }
}
