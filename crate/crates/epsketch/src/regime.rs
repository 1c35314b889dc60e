//! Regime classification for the sketch encoder.
//!
//! The per-point bit budget of an additive-error distance sketch changes
//! shape in three ranges of the ambient dimension `k` relative to `ln n`
//! and `ln n / eps^2` (natural logs throughout). Boundaries are assigned
//! to the larger regime.

use crate::error::{Error, Result};

/// Default multiplier in the projected-dimension and grid-scale formulas
/// (`m = ROUNDING_CONSTANT * ln n / eps^2`). Overridable for experiments
/// via [`classify_regime_with_constant`].
pub const ROUNDING_CONSTANT: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `k >= ln n / eps^2`: budget independent of `k`.
    Large,
    /// `ln n <= k < ln n / eps^2`: grid rounding at a `k`-dependent scale.
    Mid,
    /// `k < ln n`: plain epsilon-net rounding.
    Small,
}

impl Regime {
    pub fn tag(self) -> u8 {
        match self {
            Regime::Large => 0,
            Regime::Mid => 1,
            Regime::Small => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Regime::Large),
            1 => Ok(Regime::Mid),
            2 => Ok(Regime::Small),
            other => Err(Error::MalformedFile(format!("unknown regime tag {other}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Large => "LARGE",
            Regime::Mid => "MID",
            Regime::Small => "SMALL",
        }
    }
}

/// All derived quantities the encoder needs for a given `(n, k, eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeParams {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub regime: Regime,
    /// `ln(2 + eps^2 n) / eps^2`.
    pub t_threshold: f64,
    /// Projected dimension, LARGE regime only.
    pub m: Option<usize>,
    /// Grid scale `delta`, MID regime only.
    pub delta: Option<f64>,
    /// True when the delta formula exceeded 1/2 and was capped.
    pub delta_clamped: bool,
    /// The multiplier actually used (normally [`ROUNDING_CONSTANT`]).
    pub constant: f64,
    /// Set when `eps < n^-0.49`, outside the guarantee range. A warning,
    /// not an error: the encoder still runs.
    pub eps_below_guarantee: bool,
}

/// `t = ln(2 + eps^2 n) / eps^2`.
pub fn t_threshold(n: usize, eps: f64) -> f64 {
    (2.0 + eps * eps * n as f64).ln() / (eps * eps)
}

pub fn classify_regime(n: usize, k: usize, eps: f64) -> Result<RegimeParams> {
    classify_regime_with_constant(n, k, eps, ROUNDING_CONSTANT)
}

pub fn classify_regime_with_constant(
    n: usize,
    k: usize,
    eps: f64,
    constant: f64,
) -> Result<RegimeParams> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2 points, got {n}")));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParameter(format!("need eps in (0, 0.5], got {eps}")));
    }
    if !(constant > 0.0) {
        return Err(Error::InvalidParameter(format!("need positive constant, got {constant}")));
    }

    let ln_n = (n as f64).ln();
    let kf = k as f64;
    let (regime, m, delta, delta_clamped) = if kf >= ln_n / (eps * eps) {
        let m = (constant * ln_n / (eps * eps)).ceil() as usize;
        (Regime::Large, Some(m), None, false)
    } else if kf >= ln_n {
        // delta = sqrt(k eps^2 / (C ln n)), capped at 1/2. No lower clamp:
        // the spacing delta/sqrt(k) = eps/sqrt(C ln n) is what drives the
        // concentration exponent, and raising delta would weaken it.
        let raw = (kf * eps * eps / (constant * ln_n)).sqrt();
        let clamped = raw > 0.5;
        (Regime::Mid, None, Some(raw.min(0.5)), clamped)
    } else {
        (Regime::Small, None, None, false)
    };

    Ok(RegimeParams {
        n,
        k,
        eps,
        regime,
        t_threshold: t_threshold(n, eps),
        m,
        delta,
        delta_clamped,
        constant,
        eps_below_guarantee: eps < (n as f64).powf(-0.49),
    })
}
