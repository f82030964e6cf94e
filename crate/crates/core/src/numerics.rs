//! Root finding, optimisation over the probability simplex and least-squares
//! line fits.

use thiserror::Error;

use crate::rng::SplitMix64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {flo}, f(hi) = {fhi}")]
    NoBracket { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("iteration limit of {0} reached without convergence")]
    IterationLimit(usize),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootConfig {
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-12, max_iter: 200 }
    }
}

/// Root of a continuous function with a sign change on `[lo, hi]`.
///
/// Bisection, so the only requirement is a bracket; the result is within
/// `abs_tol` of a root. An exact zero at either end is returned as is.
pub fn solve_monotone<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    cfg: &RootConfig,
) -> Result<f64, NumericError> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let fhi = f(hi);
    if !flo.is_finite() || !fhi.is_finite() {
        return Err(NumericError::NonFinite(format!("f({lo}) = {flo}, f({hi}) = {fhi}")));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(NumericError::NoBracket { lo, hi, flo, fhi });
    }
    for _ in 0..cfg.max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= cfg.abs_tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(NumericError::NonFinite(format!("f({mid}) = {fm}")));
        }
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(NumericError::IterationLimit(cfg.max_iter))
}

/// Smooth function on the open probability simplex of dimension `dim`.
pub trait SimplexObjective {
    fn dim(&self) -> usize;

    fn value(&self, p: &[f64]) -> f64;

    /// Partial derivatives with respect to each `p_i`, treating the
    /// coordinates as independent. The default is a central difference.
    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        central_difference(self, p, 1e-7)
    }
}

fn central_difference<O: SimplexObjective + ?Sized>(obj: &O, p: &[f64], h: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    (0..p.len())
        .map(|i| {
            let step = h.min(0.5 * p[i]).max(f64::MIN_POSITIVE);
            q[i] = p[i] + step;
            let up = obj.value(&q);
            q[i] = p[i] - step;
            let down = obj.value(&q);
            q[i] = p[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// Largest relative deviation between the analytic gradient and a central
/// difference with step `h`: `max_i |g_i - g~_i| / max(|g~_i|, 1e-8)`.
pub fn grad_check<O: SimplexObjective + ?Sized>(obj: &O, p: &[f64], h: f64) -> f64 {
    let analytic = obj.gradient(p);
    let numeric = central_difference(obj, p, h);
    analytic
        .iter()
        .zip(&numeric)
        .map(|(g, n)| (g - n).abs() / n.abs().max(1e-8))
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexOptConfig {
    /// Number of random starting points in addition to the uniform vector
    /// and any warm starts.
    pub starts: usize,
    pub step_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SimplexOptConfig {
    fn default() -> Self {
        Self { starts: 16, step_tol: 1e-10, max_iter: 10_000, seed: 0x5EED }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexOptimum {
    pub p: Vec<f64>,
    pub value: f64,
}

fn softmax(theta: &[f64]) -> Vec<f64> {
    let m = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = theta.iter().map(|t| (t - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn theta_of(p: &[f64]) -> Vec<f64> {
    p.iter().map(|&x| x.max(1e-300).ln()).collect()
}

/// Value and gradient of `theta -> obj(softmax(theta))`.
fn eval<O: SimplexObjective + ?Sized>(obj: &O, theta: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let p = softmax(theta);
    let v = obj.value(&p);
    let g = obj.gradient(&p);
    let mean: f64 = p.iter().zip(&g).map(|(p, g)| p * g).sum();
    let gt = p.iter().zip(&g).map(|(p, g)| p * (g - mean)).collect();
    (v, gt, p)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS ascent in softmax coordinates with Armijo backtracking.
fn ascend<O: SimplexObjective + ?Sized>(
    obj: &O,
    theta0: Vec<f64>,
    cfg: &SimplexOptConfig,
) -> Option<SimplexOptimum> {
    let n = theta0.len();
    let mut theta = theta0;
    let (mut v, mut g, mut p) = eval(obj, &theta);
    if !v.is_finite() {
        return None;
    }
    // Inverse Hessian approximation of the negated objective.
    let mut h = vec![vec![0.0; n]; n];
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..cfg.max_iter {
        let mut dir: Vec<f64> = h.iter().map(|row| dot(row, &g)).collect();
        let mut slope = dot(&dir, &g);
        if !(slope > 0.0) {
            for (i, row) in h.iter_mut().enumerate() {
                row.iter_mut().for_each(|x| *x = 0.0);
                row[i] = 1.0;
            }
            dir = g.clone();
            slope = dot(&g, &g);
        }
        if slope <= 1e-30 {
            break;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(&dir).map(|(x, d)| x + t * d).collect();
            let (cv, cg, cp) = eval(obj, &cand);
            if cv.is_finite() && cv >= v + 1e-4 * t * slope {
                accepted = Some((cand, cv, cg, cp));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, cv, cg, cp)) = accepted else { break };
        let s: Vec<f64> = cand.iter().zip(&theta).map(|(a, b)| a - b).collect();
        // Gradient of the negated objective changes by -(cg - g).
        let y: Vec<f64> = g.iter().zip(&cg).map(|(a, b)| a - b).collect();
        let step = p.iter().zip(&cp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        theta = cand;
        v = cv;
        g = cg;
        p = cp;
        if step <= cfg.step_tol {
            break;
        }
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            let hy: Vec<f64> = h.iter().map(|row| dot(row, &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += (1.0 + yhy * rho) * rho * s[i] * s[j]
                        - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
    }
    Some(SimplexOptimum { p, value: v })
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Maximises `obj` over the probability simplex.
///
/// Local ascents start from the uniform vector, every warm start and
/// `cfg.starts` seeded random points. Candidates whose values agree within
/// `1e-12` are tie-broken towards the lexicographically smallest vector, so
/// the result is reproducible for a fixed seed.
pub fn maximize_simplex<O: SimplexObjective + ?Sized>(
    obj: &O,
    cfg: &SimplexOptConfig,
    warm_starts: &[Vec<f64>],
) -> Result<SimplexOptimum, NumericError> {
    let n = obj.dim();
    if n == 0 {
        return Err(NumericError::DegenerateInput("empty simplex".into()));
    }
    if n == 1 {
        let v = obj.value(&[1.0]);
        return if v.is_finite() {
            Ok(SimplexOptimum { p: vec![1.0], value: v })
        } else {
            Err(NumericError::NonFinite(format!("objective at [1] = {v}")))
        };
    }
    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; n]];
    for w in warm_starts {
        if w.len() == n {
            starts.push(theta_of(w));
        }
    }
    let mut rng = SplitMix64::new(cfg.seed);
    for _ in 0..cfg.starts {
        starts.push((0..n).map(|_| rng.uniform(-2.0, 2.0)).collect());
    }
    let mut best: Option<SimplexOptimum> = None;
    for theta in starts {
        let Some(cand) = ascend(obj, theta, cfg) else { continue };
        best = Some(match best {
            None => cand,
            Some(b) => {
                if cand.value > b.value + 1e-12
                    || ((cand.value - b.value).abs() <= 1e-12 && lex_less(&cand.p, &b.p))
                {
                    cand
                } else {
                    b
                }
            }
        });
    }
    best.ok_or_else(|| NumericError::NonFinite("objective not finite at any start".into()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares fit of `y = slope x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit, NumericError> {
    if x.len() != y.len() {
        return Err(NumericError::DegenerateInput(format!(
            "{} abscissae but {} ordinates",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(NumericError::DegenerateInput("need at least two points".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(NumericError::NonFinite("non-finite sample".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(NumericError::DegenerateInput("all abscissae equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit { slope, intercept: my - slope * mx, r2 })
}
