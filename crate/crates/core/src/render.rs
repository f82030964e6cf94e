//! Attractor geometry: chaos-game point clouds, Moran cylinder covers,
//! rasterization and PGM/PPM output.

use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::dimension::{natural_box_weights, DimensionError, ProbVector};
use crate::ifs::{AffineMap2, Cylinder, TglSystem};
use crate::rng::{mix, SplitMix64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("resolution {0} must be a power of two in [2, 8192]")]
    ResolutionOutOfRange(usize),
    #[error("cover would exceed {limit} cylinders")]
    CoverTooLarge { limit: usize },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Largest cover enumerated by [`cylinder_cover`] and friends.
pub const COVER_LIMIT: usize = 10_000_000;
/// Steps discarded at the start of every chaos-game chunk.
pub const BURN_IN: usize = 100;
/// Default number of points per chaos-game chunk.
pub const DEFAULT_CHUNK: usize = 1 << 16;

/// How a chaos-game run is split into independently seeded chunks. Chunk
/// `i` uses the seed `mix(seed, i)`, so output depends on the plan but not
/// on the number of worker threads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChunkPlan {
    pub chunks: usize,
    pub chunk_size: usize,
}

impl ChunkPlan {
    /// Plan for `n_points` with chunks of at most `chunk_size` points.
    pub fn for_points(n_points: usize, chunk_size: usize) -> Self {
        let chunk_size = chunk_size.max(1);
        Self { chunks: n_points.div_ceil(chunk_size), chunk_size }
    }

    pub fn with_chunks(n_points: usize, chunks: usize) -> Self {
        let chunks = chunks.clamp(1, n_points.max(1));
        Self { chunks, chunk_size: n_points.div_ceil(chunks) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub points: Vec<[f64; 2]>,
    pub seed: u64,
    pub weights: ProbVector,
}

fn resolve_weights(system: &TglSystem, weights: Option<&[f64]>) -> Result<ProbVector, RenderError> {
    match weights {
        None => Ok(natural_box_weights(system)?.0),
        Some(w) => {
            if w.len() != system.len() {
                return Err(RenderError::InvalidWeights(format!(
                    "{} weights for {} maps",
                    w.len(),
                    system.len()
                )));
            }
            if w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(RenderError::InvalidWeights("weights must be positive".into()));
            }
            Ok(ProbVector::normalized(w.to_vec())?)
        }
    }
}

fn run_chunk(maps: &[AffineMap2], cdf: &[f64], seed: u64, n: usize) -> Vec<[f64; 2]> {
    let mut rng = SplitMix64::new(seed);
    let mut x = [0.5, 0.5];
    let pick = |rng: &mut SplitMix64| {
        let u = rng.next_f64();
        cdf.partition_point(|&c| c <= u).min(maps.len() - 1)
    };
    for _ in 0..BURN_IN {
        x = maps[pick(&mut rng)].apply(x);
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        x = maps[pick(&mut rng)].apply(x);
        out.push(x);
    }
    out
}

/// Chaos game with the default chunk plan.
pub fn chaos_game(
    system: &TglSystem,
    n_points: usize,
    seed: u64,
    weights: Option<&[f64]>,
) -> Result<PointCloud, RenderError> {
    chaos_game_chunked(system, n_points, seed, weights, ChunkPlan::for_points(n_points, DEFAULT_CHUNK))
}

/// Random iteration `x <- f_i(x)` from `(0.5, 0.5)`, with `i` drawn from
/// `weights` (default: natural box weights). Chunks run in parallel and are
/// concatenated in chunk order.
pub fn chaos_game_chunked(
    system: &TglSystem,
    n_points: usize,
    seed: u64,
    weights: Option<&[f64]>,
    plan: ChunkPlan,
) -> Result<PointCloud, RenderError> {
    if n_points == 0 {
        return Err(RenderError::InvalidArgument("n_points must be at least 1".into()));
    }
    if plan.chunks == 0 || plan.chunks.saturating_mul(plan.chunk_size) < n_points {
        return Err(RenderError::InvalidArgument(format!(
            "chunk plan {}x{} does not cover {n_points} points",
            plan.chunks, plan.chunk_size
        )));
    }
    let weights = resolve_weights(system, weights)?;
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    *cdf.last_mut().expect("nonempty") = 1.0;
    let maps = system.maps();
    let chunks: Vec<Vec<[f64; 2]>> = (0..plan.chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * plan.chunk_size;
            let n = plan.chunk_size.min(n_points.saturating_sub(start));
            run_chunk(maps, &cdf, mix(seed, c as u64), n)
        })
        .collect();
    Ok(PointCloud { points: chunks.concat(), seed, weights })
}

/// Visits the Moran cover at scale `delta`: words are extended until
/// `|b_w| <= delta`. Only the composed maps are produced, not the words.
pub(crate) fn visit_cover(
    maps: &[AffineMap2],
    delta: f64,
    mut f: impl FnMut(&AffineMap2),
) -> Result<usize, RenderError> {
    if !(delta > 0.0) {
        return Err(RenderError::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let cut = delta * (1.0 + 1e-12);
    let mut stack = vec![AffineMap2::new(1.0, 1.0, 0.0, 0.0, 0.0)];
    let mut count = 0;
    while let Some(w) = stack.pop() {
        for m in maps.iter().rev() {
            let c = compose(&w, m);
            if c.b.abs() <= cut {
                count += 1;
                if count > COVER_LIMIT {
                    return Err(RenderError::CoverTooLarge { limit: COVER_LIMIT });
                }
                f(&c);
            } else {
                stack.push(c);
            }
        }
    }
    Ok(count)
}

fn compose(w: &AffineMap2, m: &AffineMap2) -> AffineMap2 {
    AffineMap2::new(
        w.b * m.b,
        w.a * m.a,
        w.d * m.b + w.a * m.d,
        w.tx + w.b * m.tx,
        w.ty + w.d * m.tx + w.a * m.ty,
    )
}

/// Prefix-free Moran cover: every word `w` with `|b_w| <= delta` whose
/// parent is wider than `delta`, in lexicographic order.
pub fn cylinder_cover(system: &TglSystem, delta: f64) -> Result<Vec<Cylinder>, RenderError> {
    if !(delta > 0.0) {
        return Err(RenderError::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let cut = delta * (1.0 + 1e-12);
    let mut out = Vec::new();
    let mut stack = vec![Cylinder::identity()];
    while let Some(w) = stack.pop() {
        for (i, m) in system.maps().iter().enumerate().rev() {
            let c = w.then(i, m);
            if c.b.abs() <= cut {
                if out.len() >= COVER_LIMIT {
                    return Err(RenderError::CoverTooLarge { limit: COVER_LIMIT });
                }
                out.push(c);
            } else {
                stack.push(c);
            }
        }
    }
    out.sort_by(|x, y| x.word.cmp(&y.word));
    Ok(out)
}

/// All cylinders of words of length exactly `depth`.
pub fn cylinder_cover_depth(system: &TglSystem, depth: usize) -> Result<Vec<Cylinder>, RenderError> {
    if (system.len() as f64).powi(depth as i32) > COVER_LIMIT as f64 {
        return Err(RenderError::CoverTooLarge { limit: COVER_LIMIT });
    }
    let mut level = vec![Cylinder::identity()];
    for _ in 0..depth {
        level = level
            .iter()
            .flat_map(|w| system.maps().iter().enumerate().map(move |(i, m)| w.then(i, m)))
            .collect();
    }
    Ok(level)
}

/// Occupancy counts over `[0,1]^2`, row-major with row 0 at the bottom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RasterGrid {
    pub resolution: usize,
    pub counts: Vec<u32>,
}

impl RasterGrid {
    pub fn new(resolution: usize) -> Result<Self, RenderError> {
        check_resolution(resolution)?;
        Ok(Self { resolution, counts: vec![0; resolution * resolution] })
    }

    pub fn get(&self, ix: usize, iy: usize) -> u32 {
        self.counts[iy * self.resolution + ix]
    }

    fn bump(&mut self, ix: usize, iy: usize) {
        let c = &mut self.counts[iy * self.resolution + ix];
        *c = c.saturating_add(1);
    }

    pub fn occupied(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn max_count(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

pub fn check_resolution(resolution: usize) -> Result<(), RenderError> {
    if !(2..=8192).contains(&resolution) || !resolution.is_power_of_two() {
        return Err(RenderError::ResolutionOutOfRange(resolution));
    }
    Ok(())
}

pub enum RasterInput<'a> {
    Points(&'a [[f64; 2]]),
    Cylinders(&'a [Cylinder]),
}

/// Cell of a coordinate: `floor(res * v)`, with `v = 1` in the last cell.
#[inline]
pub fn point_cell(v: f64, res: usize) -> usize {
    ((v * res as f64).floor().max(0.0) as usize).min(res - 1)
}

/// Cells whose open interior meets `[lo, hi]` (at least one cell).
#[inline]
pub(crate) fn cell_span(lo: f64, hi: f64, res: usize) -> (usize, usize) {
    let r = res as f64;
    let last = (res - 1) as f64;
    let a = (lo * r + 1e-9).floor().clamp(0.0, last);
    let b = ((hi * r - 1e-9).ceil() - 1.0).clamp(0.0, last);
    (a as usize, b.max(a) as usize)
}

/// Calls `mark(ix, iy)` for every cell meeting the parallelogram
/// `f([0,1]^2)`. The vertical sides make the y-range over each cell column
/// an interval spanned by the lower and upper edges at the column ends.
pub(crate) fn scan_parallelogram(f: &AffineMap2, res: usize, mut mark: impl FnMut(usize, usize)) {
    let (x0, x1) = f.x_interval();
    let (ia, ib) = cell_span(x0, x1, res);
    let (alo, ahi) = (f.a.min(0.0), f.a.max(0.0));
    let shear = |x: f64| if f.b == 0.0 { 0.0 } else { f.d * (x - f.tx) / f.b };
    for ix in ia..=ib {
        let xa = (ix as f64 / res as f64).max(x0);
        let xb = ((ix + 1) as f64 / res as f64).min(x1);
        let (sa, sb) = (shear(xa), shear(xb));
        let ylo = f.ty + sa.min(sb) + alo;
        let yhi = f.ty + sa.max(sb) + ahi;
        let (ja, jb) = cell_span(ylo, yhi, res);
        for iy in ja..=jb {
            mark(ix, iy);
        }
    }
}

/// Point mode counts points per cell; cylinder mode adds one per
/// parallelogram to every cell it meets.
pub fn rasterize(input: RasterInput<'_>, resolution: usize) -> Result<RasterGrid, RenderError> {
    let mut grid = RasterGrid::new(resolution)?;
    match input {
        RasterInput::Points(points) => {
            for p in points {
                grid.bump(point_cell(p[0], resolution), point_cell(p[1], resolution));
            }
        }
        RasterInput::Cylinders(cyls) => {
            for c in cyls {
                scan_parallelogram(&c.as_map(), resolution, |ix, iy| grid.bump(ix, iy));
            }
        }
    }
    Ok(grid)
}

fn log_scale(grid: &RasterGrid) -> Vec<u8> {
    let max = grid.max_count();
    let denom = (1.0 + max as f64).ln();
    let res = grid.resolution;
    let mut out = Vec::with_capacity(res * res);
    for iy in (0..res).rev() {
        for ix in 0..res {
            let c = grid.get(ix, iy);
            let v = if max == 0 { 0.0 } else { 255.0 * (1.0 + c as f64).ln() / denom };
            out.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

/// Binary PGM bytes, top row first, grey level
/// `round(255 ln(1 + c) / ln(1 + c_max))`.
pub fn encode_pgm(grid: &RasterGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.resolution, grid.resolution).into_bytes();
    out.extend(log_scale(grid));
    out
}

const PALETTE_STOPS: [(usize, [u8; 3]); 5] = [
    (0, [0, 0, 0]),
    (64, [40, 0, 120]),
    (128, [200, 30, 70]),
    (192, [255, 160, 0]),
    (255, [255, 255, 230]),
];

/// Fixed 256-entry heat palette, linear between the stops in integer
/// arithmetic.
pub fn palette() -> [[u8; 3]; 256] {
    let mut out = [[0u8; 3]; 256];
    for w in PALETTE_STOPS.windows(2) {
        let ((i0, c0), (i1, c1)) = (w[0], w[1]);
        for (i, slot) in out.iter_mut().enumerate().take(i1 + 1).skip(i0) {
            for k in 0..3 {
                let (a, b) = (c0[k] as i32, c1[k] as i32);
                slot[k] = (a + (b - a) * (i - i0) as i32 / (i1 - i0) as i32) as u8;
            }
        }
    }
    out
}

/// Binary PPM bytes using [`palette`] on the log-scaled counts.
pub fn encode_ppm(grid: &RasterGrid) -> Vec<u8> {
    let pal = palette();
    let mut out = format!("P6\n{} {}\n255\n", grid.resolution, grid.resolution).into_bytes();
    for v in log_scale(grid) {
        out.extend_from_slice(&pal[v as usize]);
    }
    out
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), RenderError> {
    std::fs::write(path, bytes).map_err(|e| RenderError::Io(format!("{}: {e}", path.display())))
}

pub fn write_pgm(grid: &RasterGrid, path: impl AsRef<Path>) -> Result<(), RenderError> {
    write_bytes(path.as_ref(), &encode_pgm(grid))
}

pub fn write_ppm(grid: &RasterGrid, path: impl AsRef<Path>) -> Result<(), RenderError> {
    write_bytes(path.as_ref(), &encode_ppm(grid))
}

/// PPM for a `.ppm` extension, PGM otherwise.
pub fn write_image(grid: &RasterGrid, path: impl AsRef<Path>) -> Result<(), RenderError> {
    let path = path.as_ref();
    let ppm = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ppm"));
    if ppm {
        write_ppm(grid, path)
    } else {
        write_pgm(grid, path)
    }
}
