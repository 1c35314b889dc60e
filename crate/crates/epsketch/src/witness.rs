//! Constructive lower-bound witnesses: delta-separated point sets in the
//! unit ball, a random distinguishing set `R`, and an exhaustive check
//! that every pair of net points is told apart by some member of `R`.
//! Any code that must map distinct net points to distinct outputs needs
//! at least `log2 |N|` bits, so the net size is a bit lower bound.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::vector::{PointSet, Vector};

/// Draws per candidate slot before giving up on growing the net.
const PATIENCE_FACTOR: usize = 200;

#[derive(Debug, Clone)]
pub struct SeparatedNet {
    pub points: PointSet,
    pub delta: f64,
}

impl SeparatedNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exhaustive certification of pairwise separation.
    pub fn verify_separation(&self) -> bool {
        let n = self.points.len();
        for i in 0..n {
            for j in i + 1..n {
                if self.points.point(i).dist_sq(self.points.point(j)) < self.delta * self.delta {
                    return false;
                }
            }
        }
        true
    }
}

/// Greedy rejection sampling: draw uniform ball points, keep each one
/// that is at least `delta` from everything kept so far.
pub fn build_separated_net(
    k: usize,
    delta: f64,
    target_size: usize,
    stream: RngStream,
) -> Result<SeparatedNet> {
    if k < 1 || target_size < 1 {
        return Err(Error::InvalidParameter("need k >= 1 and target_size >= 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("need delta in (0, 1), got {delta}")));
    }
    let mut sampler = stream.sampler();
    let mut kept: Vec<Vector> = Vec::with_capacity(target_size);
    let delta_sq = delta * delta;
    let patience = PATIENCE_FACTOR * target_size;
    let mut draws = 0;
    while kept.len() < target_size {
        if draws >= patience {
            return Err(Error::PatienceExhausted { achieved: kept.len(), target: target_size });
        }
        draws += 1;
        let candidate = sampler.unit_ball_point(k);
        if kept.iter().all(|p| p.dist_sq(&candidate) >= delta_sq) {
            kept.push(candidate);
        }
    }
    Ok(SeparatedNet { points: PointSet::new(kept)?, delta })
}

/// `count` i.i.d. uniform points of the unit ball.
pub fn draw_r(k: usize, count: usize, stream: RngStream) -> Result<PointSet> {
    if k < 1 || count < 1 {
        return Err(Error::InvalidParameter("need k >= 1 and count >= 1".into()));
    }
    let mut sampler = stream.sampler();
    PointSet::new((0..count).map(|_| sampler.unit_ball_point(k)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub distinguished: bool,
    /// The pair hardest to tell apart: (i, j, max over r of |<b - b', r>|).
    pub worst_pair: Option<(usize, usize, f64)>,
    /// `log2` of the net size: the pigeonhole bit lower bound.
    pub implied_bits: f64,
}

/// Exhaustively checks that every distinct pair of net points has some
/// `r` whose inner products with the two points differ by more than eps.
pub fn verify_distinguishing(net: &SeparatedNet, r: &PointSet, eps: f64) -> Result<WitnessReport> {
    if net.points.dim() != r.dim() {
        return Err(Error::DimensionMismatch { expected: net.points.dim(), got: r.dim() });
    }
    let n = net.len();
    let mut distinguished = true;
    let mut worst_pair: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        for j in i + 1..n {
            let bi = net.points.point(i);
            let bj = net.points.point(j);
            let best = r
                .iter()
                .map(|rv| (bi.dot(rv) - bj.dot(rv)).abs())
                .fold(0.0f64, f64::max);
            if best <= eps {
                distinguished = false;
            }
            if worst_pair.is_none_or(|(_, _, w)| best < w) {
                worst_pair = Some((i, j, best));
            }
        }
    }
    Ok(WitnessReport { distinguished, worst_pair, implied_bits: (n as f64).log2() })
}

/// The dimension at which a delta-separated net in `B^k` is expected to
/// defeat additive-eps sketches of `n` points: `k = delta^2 ln n / (200 eps^2)`.
/// Exposed to pick mutually consistent experiment parameters.
pub fn matched_dimension(n: usize, delta: f64, eps: f64) -> f64 {
    delta * delta * (n as f64).ln() / (200.0 * eps * eps)
}

/// Inverse of [`matched_dimension`]: the point count a net in `B^k` at
/// separation `delta` speaks to, `n = exp(200 k eps^2 / delta^2)`.
pub fn matched_point_count(k: usize, delta: f64, eps: f64) -> f64 {
    (200.0 * k as f64 * eps * eps / (delta * delta)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_dimensional_packing_limit() {
        // at most 5 points fit in [-1, 1] with spacing 1/2 when drawn from
        // the continuum; asking for 20 must exhaust patience
        let err = build_separated_net(1, 0.5, 20, RngStream::new(0, 0));
        match err {
            Err(Error::PatienceExhausted { achieved, target }) => {
                assert!(achieved <= 5);
                assert_eq!(target, 20);
            }
            other => panic!("expected PatienceExhausted, got {other:?}"),
        }
    }

    #[test]
    fn nets_are_separated() {
        for seed in 0..5 {
            let net = build_separated_net(4, 0.4, 30, RngStream::new(seed, 0)).unwrap();
            assert_eq!(net.len(), 30);
            assert!(net.verify_separation());
        }
    }

    #[test]
    fn half_separated_net_in_dim_8_reaches_256() {
        let net = build_separated_net(8, 0.5, 256, RngStream::new(3, 0)).unwrap();
        assert_eq!(net.len(), 256);
        assert!(net.verify_separation());
        let report = verify_distinguishing(&net, &draw_r(8, 64, RngStream::new(4, 1)).unwrap(), 0.1)
            .unwrap();
        assert_abs_diff_eq!(report.implied_bits, 8.0);
    }

    #[test]
    fn draw_r_stays_in_ball_and_is_deterministic() {
        let a = draw_r(3, 50, RngStream::new(9, 2)).unwrap();
        let b = draw_r(3, 50, RngStream::new(9, 2)).unwrap();
        assert_eq!(a, b);
        assert!(a.max_norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn aligned_witness_distinguishes() {
        // two points at distance delta > eps and an r along their difference
        let net = SeparatedNet {
            points: PointSet::from_rows(vec![vec![0.5, 0.0], vec![0.0, 0.0]]).unwrap(),
            delta: 0.5,
        };
        let r = PointSet::from_rows(vec![vec![1.0, 0.0]]).unwrap();
        let report = verify_distinguishing(&net, &r, 0.3).unwrap();
        assert!(report.distinguished);
        let (_, _, w) = report.worst_pair.unwrap();
        assert_abs_diff_eq!(w, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn zero_r_never_distinguishes() {
        let net = SeparatedNet {
            points: PointSet::from_rows(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap(),
            delta: 0.5,
        };
        let r = PointSet::from_rows(vec![vec![0.0, 0.0]]).unwrap();
        let report = verify_distinguishing(&net, &r, 0.1).unwrap();
        assert!(!report.distinguished);
    }

    #[test]
    fn implied_bits_monotone() {
        let mut prev = f64::NEG_INFINITY;
        for size in [2usize, 4, 16, 64] {
            let net = build_separated_net(6, 0.3, size, RngStream::new(1, 0)).unwrap();
            let r = draw_r(6, 4, RngStream::new(1, 1)).unwrap();
            let bits = verify_distinguishing(&net, &r, 0.1).unwrap().implied_bits;
            assert!(bits > prev);
            prev = bits;
        }
    }

    #[test]
    fn matched_parameter_helpers_invert() {
        let k = matched_dimension(100_000, 0.5, 0.1);
        let n = matched_point_count(k.round() as usize, 0.5, 0.1);
        assert!(n > 1.0);
        // closed-form check: k = 0.25 * ln(1e5) / 2 = 1.439...
        assert_abs_diff_eq!(k, 0.25 * (100_000f64).ln() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_separated_net(0, 0.5, 4, RngStream::new(0, 0)).is_err());
        assert!(build_separated_net(2, 1.5, 4, RngStream::new(0, 0)).is_err());
        assert!(draw_r(2, 0, RngStream::new(0, 0)).is_err());
    }
}
