//! Dense real vectors, point sets and the pairwise Gram/distance helpers
//! the rest of the crate is built on.

use crate::error::{Error, Result};

/// Tolerance used when checking unit-ball membership. Rounding in upstream
/// pipelines routinely produces norms like `1.0000000000000002`.
pub const UNIT_BALL_SLACK: f64 = 1e-9;

/// A finite-dimensional real vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    coords: Vec<f64>,
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("vector dimension must be >= 1".into()));
        }
        for (i, c) in coords.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(Self { coords })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.coords, &other.coords)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.coords, &self.coords)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist_sq(&self, other: &Vector) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Vector {
        Vector { coords: self.coords.iter().map(|c| c * factor).collect() }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// An ordered list of vectors sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Vector>,
    dim: usize,
    unit_ball: bool,
}

impl PointSet {
    /// Builds a set without the unit-ball restriction.
    pub fn new(points: Vec<Vector>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("point set must be nonempty".into()));
        }
        let dim = points[0].dim();
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
        }
        Ok(Self { points, dim, unit_ball: false })
    }

    /// Builds a set and verifies every norm is at most `1 + UNIT_BALL_SLACK`.
    pub fn new_unit_ball(points: Vec<Vector>) -> Result<Self> {
        let mut set = Self::new(points)?;
        for (index, p) in set.points.iter().enumerate() {
            let norm = p.norm();
            if norm > 1.0 + UNIT_BALL_SLACK {
                return Err(Error::OutsideUnitBall { index, norm });
            }
        }
        set.unit_ball = true;
        Ok(set)
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(Vector::new).collect::<Result<_>>()?)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_unit_ball(&self) -> bool {
        self.unit_ball
    }

    pub fn point(&self, i: usize) -> &Vector {
        &self.points[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vector> {
        self.points.iter()
    }

    pub fn max_norm(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

/// Gram matrix `G[i][j] = <x_i, x_j>` together with squared distances
/// `D[i][j] = |x_i|^2 + |x_j|^2 - 2 G[i][j]`.
pub fn gram_and_distances(set: &PointSet) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = set.len();
    let mut gram = vec![vec![0.0; n]; n];
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let g = set.point(i).dot(set.point(j));
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                dist[i][j] = 0.0;
            } else {
                dist[i][j] = gram[i][i] + gram[j][j] - 2.0 * gram[i][j];
            }
        }
    }
    (gram, dist)
}
