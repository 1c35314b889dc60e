//! The cubic grid net over the unit ball, unbiased stochastic rounding,
//! deterministic nearest rounding, and the quantized-norm side channel.

use crate::error::{Error, Result};
use crate::rng::Sampler;
use crate::vector::Vector;

/// Grid with coordinates at integer multiples of `delta / sqrt(dim)`.
/// Points of norm <= 1 rounded onto it have coordinate magnitudes at most
/// `(1 + 1/delta) * sqrt(dim)` grid steps, which bounds the codec cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    delta: f64,
    spacing: f64,
}

impl GridSpec {
    pub fn new(dim: usize, delta: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidParameter("grid dimension must be >= 1".into()));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter(format!("grid delta must be in (0, 1], got {delta}")));
        }
        Ok(Self { dim, delta, spacing: delta / (dim as f64).sqrt() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Upper bound on the sum of squared magnitudes of any point produced
    /// by rounding a unit-ball vector on this grid: each |x_i|/s can gain
    /// at most one step, so sum n_i^2 <= dim * (1 + 1/delta)^2.
    pub fn magnitude_sq_budget(&self) -> f64 {
        self.dim as f64 * (1.0 + 1.0 / self.delta) * (1.0 + 1.0 / self.delta)
    }
}

/// A net member: per-coordinate sign and non-negative step count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPoint {
    pub signs: Vec<bool>,
    pub magnitudes: Vec<u32>,
}

impl GridPoint {
    pub fn dim(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if self.signs.len() != grid.dim() || self.magnitudes.len() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), got: self.magnitudes.len() });
        }
        let sum_sq: f64 = self.magnitudes.iter().map(|&n| n as f64 * n as f64).sum();
        if sum_sq > grid.magnitude_sq_budget() + 1e-9 {
            return Err(Error::MagnitudeOverflow);
        }
        Ok(())
    }

    pub fn to_vector(&self, grid: &GridSpec) -> Vector {
        let s = grid.spacing();
        let coords = self
            .signs
            .iter()
            .zip(&self.magnitudes)
            .map(|(&neg, &n)| {
                let v = n as f64 * s;
                if neg {
                    -v
                } else {
                    v
                }
            })
            .collect();
        Vector::new(coords).expect("grid coordinates are finite")
    }
}

fn split_signed(q: f64) -> (bool, f64) {
    if q < 0.0 {
        (true, -q)
    } else {
        (false, q)
    }
}

/// Rounds each coordinate to the floor or ceiling grid multiple with the
/// probabilities that make the expectation exactly the input coordinate.
pub fn stochastic_round(x: &Vector, grid: &GridSpec, sampler: &mut Sampler) -> Result<GridPoint> {
    if x.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), got: x.dim() });
    }
    let s = grid.spacing();
    let mut signs = Vec::with_capacity(x.dim());
    let mut magnitudes = Vec::with_capacity(x.dim());
    for &c in x.as_slice() {
        let (neg, q) = split_signed(c / s);
        let lo = q.floor();
        let frac = q - lo;
        let up = frac > 0.0 && sampler.uniform01() < frac;
        let n = lo as u32 + u32::from(up);
        signs.push(neg && n > 0);
        magnitudes.push(n);
    }
    Ok(GridPoint { signs, magnitudes })
}

/// Deterministic nearest-multiple rounding, ties to the even multiple.
pub fn nearest_round(x: &Vector, grid: &GridSpec) -> Result<GridPoint> {
    if x.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), got: x.dim() });
    }
    let s = grid.spacing();
    let mut signs = Vec::with_capacity(x.dim());
    let mut magnitudes = Vec::with_capacity(x.dim());
    for &c in x.as_slice() {
        let (neg, q) = split_signed(c / s);
        let n = q.round_ties_even() as u32;
        signs.push(neg && n > 0);
        magnitudes.push(n);
    }
    Ok(GridPoint { signs, magnitudes })
}

/// Squared norm stored on a uniform ladder of step `eps/4`: the decoder's
/// distance formula consumes squared norms, and two of these quantization
/// errors (<= eps/8 each) fit comfortably inside the overall eps budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizedNorm {
    pub level: u32,
    pub step: f64,
}

impl QuantizedNorm {
    /// Bits needed to store any level for unit-ball inputs at this eps.
    pub fn bit_width(eps: f64) -> u32 {
        (8.0 / eps).log2().ceil() as u32 + 1
    }

    pub fn dequantize(&self) -> f64 {
        self.level as f64 * self.step
    }
}

pub fn quantize_norm(x: &Vector, eps: f64) -> Result<QuantizedNorm> {
    quantize_norm_sq(x.norm_sq(), eps)
}

pub fn quantize_norm_sq(norm_sq: f64, eps: f64) -> Result<QuantizedNorm> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParameter(format!("need eps in (0, 0.5], got {eps}")));
    }
    if !(0.0..=1.0 + 1e-9).contains(&norm_sq) {
        return Err(Error::InvalidParameter(format!("squared norm {norm_sq} outside [0, 1]")));
    }
    let step = eps / 4.0;
    let level = (norm_sq / step).round() as u32;
    Ok(QuantizedNorm { level, step })
}
