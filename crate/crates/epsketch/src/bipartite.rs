//! Dimension reduction for bipartite inner products: given points
//! `a_i, b_j` in the unit ball of `R^dim`, produce `x_i, y_j` in `R^t`
//! with every cross inner product `<x_i, y_j>` within `eps` of
//! `<a_i, b_j>`, for `t = floor(C ln(2 + eps^2 n) / eps^2)`.
//!
//! Construction: draw a Haar orthogonal `U`, set `p_j` = first `t`
//! coordinates of `U^T b_j` and `y_j = sqrt(t) p_j`. Each `x_i` is found
//! by cyclic projection onto the slabs
//! `|<x, p_j> - sqrt(t) <a_i, b_j>| <= sqrt(t) C_scale eps`,
//! then scaled by `1/t`. By construction the only error source is the
//! slab residual: the discarded trailing coordinates of `U^T b_j` never
//! enter the product, so `<x_i, y_j> = <x_i, p_j> * sqrt(t) / t`.

use crate::error::{Error, Result};
use crate::rng::{stream_tag, RngStream};
use crate::vector::{PointSet, Vector};
use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct BipartiteInstance {
    pub a: PointSet,
    pub b: PointSet,
    pub eps: f64,
    pub c: f64,
    pub t: usize,
}

impl BipartiteInstance {
    pub fn new(a: PointSet, b: PointSet, eps: f64, c: f64) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
        }
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(Error::InvalidParameter(format!("need eps in (0, 0.5], got {eps}")));
        }
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("need positive C, got {c}")));
        }
        for set in [&a, &b] {
            if set.max_norm() > 1.0 + crate::vector::UNIT_BALL_SLACK {
                return Err(Error::InvalidParameter("bipartite inputs must lie in the unit ball".into()));
            }
        }
        let t = target_dimension(a.len().max(b.len()), eps, c).min(a.dim());
        Ok(Self { a, b, eps, c, t })
    }
}

/// `floor(C ln(2 + eps^2 n) / eps^2)`.
pub fn target_dimension(n: usize, eps: f64, c: f64) -> usize {
    (c * (2.0 + eps * eps * n as f64).ln() / (eps * eps)).floor() as usize
}

#[derive(Debug, Clone)]
pub struct OrthogonalMap {
    pub matrix: DMatrix<f64>,
    pub seed: u64,
}

/// Haar-distributed orthogonal matrix: QR of an i.i.d. Gaussian matrix
/// with the signs of `R`'s diagonal folded into `Q`.
pub fn sample_orthogonal(n: usize, stream: RngStream) -> OrthogonalMap {
    assert!(n >= 1);
    let mut s = stream.sampler();
    let g = DMatrix::from_fn(n, n, |_, _| s.standard_normal());
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    OrthogonalMap { matrix: q, seed: stream.seed }
}

fn rotate_and_truncate(u: &OrthogonalMap, v: &Vector, t: usize) -> Vec<f64> {
    // first t coordinates of U^T v
    let n = u.matrix.nrows();
    (0..t)
        .map(|row| (0..n).map(|i| u.matrix[(i, row)] * v.as_slice()[i]).sum())
        .collect()
}

/// `y_j = sqrt(t) *` first `t` coordinates of `U^T b_j`.
pub fn build_y(b: &PointSet, u: &OrthogonalMap, t: usize) -> Result<PointSet> {
    if t > b.dim() || t == 0 {
        return Err(Error::InvalidParameter(format!(
            "target dimension {t} outside 1..={}",
            b.dim()
        )));
    }
    let sqrt_t = (t as f64).sqrt();
    PointSet::new(
        b.iter()
            .map(|bj| {
                let coords = rotate_and_truncate(u, bj, t).iter().map(|z| z * sqrt_t).collect();
                Vector::new(coords)
            })
            .collect::<Result<Vec<_>>>()?,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub sweeps: usize,
    pub residual: f64,
}

const SLAB_TOLERANCE: f64 = 1e-9;
const MAX_SWEEPS: usize = 10_000;

/// Finds `x` in `R^t` with `|<x, p_j> - target_j| <= width` for all `j`
/// by cyclic projection onto the slabs, starting from `start`.
fn pocs(
    start: Vec<f64>,
    slabs: &[(Vec<f64>, f64)], // (direction p_j, center target_j)
    width: f64,
) -> std::result::Result<(Vec<f64>, SolveStats), (f64, usize)> {
    let mut x = start;
    for sweep in 1..=MAX_SWEEPS {
        let mut worst = 0.0f64;
        for (p, target) in slabs {
            let p_sq: f64 = p.iter().map(|v| v * v).sum();
            if p_sq < 1e-300 {
                continue; // zero direction constrains nothing
            }
            let value: f64 = x.iter().zip(p).map(|(a, b)| a * b).sum();
            let excess = value - target;
            let overshoot = excess.abs() - width;
            if overshoot > 0.0 {
                worst = worst.max(overshoot);
                let shift = overshoot * excess.signum() / p_sq;
                for (xi, pi) in x.iter_mut().zip(p) {
                    *xi -= shift * pi;
                }
            }
        }
        if worst <= SLAB_TOLERANCE {
            return Ok((x, SolveStats { sweeps: sweep, residual: worst }));
        }
    }
    // measure the true residual at exit
    let residual = slabs
        .iter()
        .map(|(p, target)| {
            let value: f64 = x.iter().zip(p).map(|(a, b)| a * b).sum();
            (value - target).abs() - width
        })
        .fold(0.0f64, f64::max);
    Err((residual, MAX_SWEEPS))
}

/// Solves for one `x_i` (already scaled by `1/t`) in the rotated frame.
pub fn solve_x(
    a_i: &Vector,
    b: &PointSet,
    p: &[Vec<f64>],
    u: &OrthogonalMap,
    t: usize,
    eps: f64,
    c_scale: f64,
) -> Result<(Vector, SolveStats)> {
    let sqrt_t = (t as f64).sqrt();
    let start = rotate_and_truncate(u, a_i, t).iter().map(|z| z * sqrt_t).collect();
    let slabs: Vec<(Vec<f64>, f64)> = p
        .iter()
        .zip(b.iter())
        .map(|(pj, bj)| (pj.clone(), sqrt_t * a_i.dot(bj)))
        .collect();
    let width = sqrt_t * c_scale * eps;
    match pocs(start, &slabs, width) {
        Ok((x, stats)) => {
            let scaled = Vector::new(x.iter().map(|v| v / t as f64).collect())?;
            Ok((scaled, stats))
        }
        Err((residual, sweeps)) => Err(Error::NonConvergence { residual, sweeps }),
    }
}

#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub x: PointSet,
    pub y: PointSet,
    pub t: usize,
    pub achieved_eps: f64,
    pub retries: usize,
    pub c_scale_used: f64,
    pub solver_stats: Vec<SolveStats>,
    /// Norms of the returned x_i, for inspection; nothing is asserted
    /// about their growth.
    pub x_norms: Vec<f64>,
}

const MAX_RETRIES: usize = 5;
const C_SCALE_LADDER: [f64; 3] = [1.0, 2.0, 4.0];

pub fn reduce(inst: &BipartiteInstance, seed: u64) -> Result<ReductionResult> {
    let dim = inst.a.dim();
    let t = inst.t.max(1);
    let mut best_eps = f64::INFINITY;
    for attempt in 0..MAX_RETRIES {
        let c_scale = C_SCALE_LADDER[attempt.min(C_SCALE_LADDER.len() - 1)];
        let u = sample_orthogonal(
            dim,
            RngStream::new(seed, stream_tag::ORTHOGONAL | attempt as u64),
        );
        let p: Vec<Vec<f64>> = inst.b.iter().map(|bj| rotate_and_truncate(&u, bj, t)).collect();

        let mut xs = Vec::with_capacity(inst.a.len());
        let mut stats = Vec::with_capacity(inst.a.len());
        let mut failed = false;
        for a_i in inst.a.iter() {
            match solve_x(a_i, &inst.b, &p, &u, t, inst.eps, c_scale) {
                Ok((x, st)) => {
                    xs.push(x);
                    stats.push(st);
                }
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            continue;
        }

        let x = PointSet::new(xs)?;
        let y = build_y(&inst.b, &u, t)?;
        let mut achieved = 0.0f64;
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                achieved = achieved.max((xi.dot(yj) - inst.a.point(i).dot(inst.b.point(j))).abs());
            }
        }
        best_eps = best_eps.min(achieved);
        if achieved <= inst.eps {
            let x_norms = x.iter().map(Vector::norm).collect();
            return Ok(ReductionResult {
                x,
                y,
                t,
                achieved_eps: achieved,
                retries: attempt,
                c_scale_used: c_scale,
                solver_stats: stats,
                x_norms,
            });
        }
    }
    Err(Error::ExhaustedRetries { retries: MAX_RETRIES, best: best_eps })
}
