//! Random valid systems for property tests and benchmarks.

use crate::ifs::{AffineMap2, SystemClass, SystemSpec};
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleOptions {
    pub max_columns: usize,
    pub max_per_column: usize,
    /// One `b` for all columns and one `a` for all maps.
    pub diagonally_homogeneous: bool,
    /// Columns may overlap horizontally (class `shifted`).
    pub shifted: bool,
    /// Non-zero off-diagonal entries.
    pub shear: bool,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { max_columns: 4, max_per_column: 3, diagonally_homogeneous: false, shifted: false, shear: true }
    }
}

/// Draws a system that passes validation: at least two non-empty columns
/// whose widths sum to at most one.
pub fn random_system(rng: &mut SplitMix64, opts: &SampleOptions) -> SystemSpec {
    let m = 2 + rng.below(opts.max_columns.max(2) - 1);
    let sizes: Vec<usize> = (0..m).map(|_| 1 + rng.below(opts.max_per_column.max(1))).collect();

    let widths: Vec<f64> = if opts.diagonally_homogeneous {
        let b = rng.uniform(0.3, 1.0) / m as f64;
        vec![b; m]
    } else {
        let raw: Vec<f64> = (0..m).map(|_| rng.uniform(0.2, 1.0)).collect();
        let scale = rng.uniform(0.6, 0.98) / raw.iter().sum::<f64>();
        raw.iter().map(|w| w * scale).collect()
    };
    // Vertical contractions: below the column width, with column mass < 1.
    let cap = |b: f64, n: usize| b.min(0.95 / n as f64);
    let a_common = if opts.diagonally_homogeneous {
        let hi = widths.iter().zip(&sizes).map(|(&b, &n)| cap(b, n)).fold(f64::INFINITY, f64::min);
        Some(rng.uniform(0.15, 0.95) * hi)
    } else {
        None
    };

    let offsets: Vec<f64> = if opts.shifted {
        widths.iter().map(|w| rng.uniform(0.0, 1.0 - w)).collect()
    } else {
        let gap_total = 1.0 - widths.iter().sum::<f64>();
        let cuts: Vec<f64> = (0..=m).map(|_| rng.next_f64()).collect();
        let total: f64 = cuts.iter().sum();
        let mut x = 0.0;
        widths
            .iter()
            .zip(&cuts)
            .map(|(w, c)| {
                x += gap_total * c / total;
                let o = x;
                x += w;
                o
            })
            .collect()
    };

    let mut maps = Vec::new();
    for c in 0..m {
        let b = widths[c];
        let n = sizes[c];
        let hi = cap(b, n);
        for _ in 0..n {
            let a = a_common.unwrap_or_else(|| rng.uniform(0.1, 0.95) * hi);
            let d = if opts.shear { rng.uniform(-1.0, 1.0) * (1.0 - a) * 0.9 } else { 0.0 };
            let lo = (-d).max(0.0);
            let top = 1.0 - a - d.max(0.0);
            let ty = rng.uniform(lo, top.max(lo));
            maps.push(AffineMap2::new(b, a, d, offsets[c], ty));
        }
    }
    let class = if opts.shifted { SystemClass::Shifted } else { SystemClass::Tgl };
    SystemSpec { class, maps, columns: sizes }
}
