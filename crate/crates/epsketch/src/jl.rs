//! Dense Gaussian random projection `R^k -> R^m` with entries
//! `N(0, 1/m)`, the companion shrink step, and a brute-force audit of how
//! well a projection preserved distances and norms.

use crate::error::{Error, Result};
use crate::rng::{stream_tag, RngStream};
use crate::vector::{PointSet, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionKind {
    DenseGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectionSpec {
    pub k_in: usize,
    pub m_out: usize,
    pub seed: u64,
    pub kind: ProjectionKind,
}

impl ProjectionSpec {
    pub fn new(k_in: usize, m_out: usize, seed: u64) -> Result<Self> {
        if k_in < 1 || m_out < 1 {
            return Err(Error::InvalidParameter(format!(
                "projection dimensions must be >= 1, got {k_in} -> {m_out}"
            )));
        }
        Ok(Self { k_in, m_out, seed, kind: ProjectionKind::DenseGaussian })
    }

    /// Row `r` of the projection matrix. Rows come from independent
    /// streams so parallel generation is output-identical to serial.
    fn row(&self, r: usize) -> Vec<f64> {
        let mut s = RngStream::new(self.seed, stream_tag::JL_ROW | r as u64).sampler();
        let scale = 1.0 / (self.m_out as f64).sqrt();
        (0..self.k_in).map(|_| s.standard_normal() * scale).collect()
    }
}

pub fn project(x: &PointSet, spec: &ProjectionSpec) -> Result<PointSet> {
    if x.dim() != spec.k_in {
        return Err(Error::DimensionMismatch { expected: spec.k_in, got: x.dim() });
    }
    let rows: Vec<Vec<f64>> = (0..spec.m_out).map(|r| spec.row(r)).collect();
    let projected = x
        .iter()
        .map(|p| {
            let coords = rows.iter().map(|row| crate::vector::dot(row, p.as_slice())).collect();
            Vector::new(coords)
        })
        .collect::<Result<Vec<_>>>()?;
    PointSet::new(projected)
}

/// Multiplies every coordinate by `1 - eps`.
pub fn shrink(x: &PointSet, eps: f64) -> Result<PointSet> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("shrink factor needs eps in [0, 1), got {eps}")));
    }
    PointSet::new(x.iter().map(|p| p.scaled(1.0 - eps)).collect())
}

/// Largest deviations between the pairwise geometry of two equally sized
/// point sets, computed by brute force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionReport {
    pub max_dist_sq_dev: f64,
    pub max_norm_sq_dev: f64,
    pub within_eps: bool,
}

pub fn verify_projection(x: &PointSet, y: &PointSet, eps: f64) -> Result<ProjectionReport> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch { left: x.len(), right: y.len() });
    }
    let mut max_dist = 0.0f64;
    let mut max_norm = 0.0f64;
    for i in 0..x.len() {
        max_norm = max_norm.max((x.point(i).norm_sq() - y.point(i).norm_sq()).abs());
        for j in i + 1..x.len() {
            let dx = x.point(i).dist_sq(x.point(j));
            let dy = y.point(i).dist_sq(y.point(j));
            max_dist = max_dist.max((dx - dy).abs());
        }
    }
    Ok(ProjectionReport {
        max_dist_sq_dev: max_dist,
        max_norm_sq_dev: max_norm,
        within_eps: max_dist <= eps && max_norm <= eps,
    })
}
