//! Counter-based deterministic randomness.
//!
//! Every randomized routine in the crate draws from an [`RngStream`]: a
//! `(seed, stream_id)` pair mapped onto an independent ChaCha8 stream. The
//! same pair yields the same byte stream regardless of thread scheduling,
//! so per-point work parallelizes without changing output.

use crate::vector::Vector;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Tags namespacing `stream_id` so different subsystems never collide on
/// the same (seed, stream) pair even when both are indexed by small counters.
pub mod stream_tag {
    pub const JL_ROW: u64 = 1 << 56;
    pub const POINT_ROUND: u64 = 2 << 56;
    pub const ORTHOGONAL: u64 = 3 << 56;
    pub const BALL_SAMPLE: u64 = 4 << 56;
    pub const SOLVER: u64 = 5 << 56;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn sampler(self) -> Sampler {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        Sampler { rng }
    }
}

/// Stateful draw interface over one stream.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn uniform01(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via inverse-CDF. Chosen over Box-Muller/Ziggurat so
    /// the value is a fixed function of a single uniform draw: identical
    /// across platforms and immune to consumption-order surprises.
    pub fn standard_normal(&mut self) -> f64 {
        // Map to (0,1) strictly; u = 0 would send the quantile to -inf.
        let u = (self.uniform01() + 0.5 * (1.0 / (1u64 << 53) as f64)).min(1.0 - 1e-16);
        inverse_normal_cdf(u)
    }

    /// Uniform point of the closed unit ball in `R^k`: Gaussian direction
    /// scaled by U^(1/k).
    pub fn unit_ball_point(&mut self, k: usize) -> Vector {
        assert!(k >= 1);
        loop {
            let g: Vec<f64> = (0..k).map(|_| self.standard_normal()).collect();
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue; // astronomically rare; redraw rather than divide by ~0
            }
            let radius = self.uniform01().powf(1.0 / k as f64);
            let coords = g.iter().map(|x| x / norm * radius).collect();
            return Vector::new(coords).expect("finite by construction");
        }
    }
}

/// Acklam's rational approximation to the standard normal quantile,
/// relative error below 1.15e-9 over (0,1). Deterministic and
/// platform-independent, which is what the RngStream contract needs;
/// the tail accuracy is far beyond what any test here resolves.
fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}
