//! End-to-end sketch encoder/decoder and the on-disk sketch format.
//!
//! Encoding pipeline per regime:
//! * SMALL (`k < ln n`): deterministic nearest rounding onto a grid with
//!   `delta = eps/4`. Worst-case coordinate error is half a step, which
//!   keeps the deterministic distance error strictly inside `eps`.
//! * MID: unbiased stochastic rounding at the regime's `delta`; the grid
//!   spacing `delta/sqrt(k) = eps/sqrt(40 ln n)` drives a Hoeffding tail
//!   of `2 n^-20` per pair.
//! * LARGE: same spacing, with the grid `delta` capped at 1/2. When the
//!   projected dimension `m` is smaller than `k`, the points are first
//!   projected to `R^m`, shrunk by `1 - eps/2` to restore unit-ball
//!   membership, and rounded at spacing `1/sqrt(m)`; the decoder undoes
//!   the shrink. When `m >= k` the projection would expand the data and
//!   is skipped.
//!
//! Every point also stores its original squared norm on the quantized
//! ladder; the decoder computes distances from those stored norms and the
//! grid inner product, never from the rounded vector's self inner product
//! (whose rounding noise does not cancel).

use crate::bits::{self, BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::grid::{self, GridSpec, QuantizedNorm};
use crate::jl::{self, ProjectionSpec};
use crate::regime::{classify_regime, Regime, RegimeParams};
use crate::rng::{stream_tag, RngStream};
use crate::vector::{PointSet, Vector};
use std::io::{Read, Write};

const MAGIC: [u8; 4] = *b"EPSK";
const VERSION: u8 = 0x01;

/// How the encoder will treat a parameter set: the working dimension,
/// the grid delta at that dimension, and whether a projection runs first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkingGrid {
    pub working_dim: usize,
    pub delta: f64,
    pub project: bool,
}

pub fn working_grid(params: &RegimeParams) -> WorkingGrid {
    let eps = params.eps;
    match params.regime {
        Regime::Small => WorkingGrid { working_dim: params.k, delta: eps / 4.0, project: false },
        Regime::Mid => WorkingGrid {
            working_dim: params.k,
            delta: params.delta.expect("MID regime carries delta"),
            project: false,
        },
        Regime::Large => {
            let m = params.m.expect("LARGE regime carries m");
            if m < params.k {
                // spacing 1/sqrt(m) = delta/sqrt(m) with delta = 1
                WorkingGrid { working_dim: m, delta: 1.0, project: true }
            } else {
                let ln_n = (params.n as f64).ln();
                let delta =
                    (eps * (params.k as f64 / (params.constant * ln_n)).sqrt()).min(0.5);
                WorkingGrid { working_dim: params.k, delta, project: false }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchFile {
    pub n: u32,
    pub k_original: u32,
    pub working_dim: u32,
    pub eps: f64,
    pub regime: Regime,
    pub delta: f64,
    pub seed: u64,
    /// Bit offset of each point's sketch within the payload.
    pub offsets: Vec<u64>,
    pub payload: Vec<u8>,
    pub payload_bit_length: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryResult {
    pub inner: f64,
    pub dist_sq: f64,
}

pub fn encode_set(x: &PointSet, eps: f64, seed: u64) -> Result<SketchFile> {
    let n = x.len();
    let k = x.dim();
    let params = classify_regime(n, k, eps)?;
    if !x.is_unit_ball() {
        // revalidate rather than trust the caller
        for (index, p) in x.iter().enumerate() {
            let norm = p.norm();
            if norm > 1.0 + crate::vector::UNIT_BALL_SLACK {
                return Err(Error::OutsideUnitBall { index, norm });
            }
        }
    }

    let wg = working_grid(&params);
    let grid = GridSpec::new(wg.working_dim, wg.delta)?;

    let working: PointSet = if wg.project {
        let spec = ProjectionSpec::new(k, wg.working_dim, seed)?;
        let projected = jl::project(x, &spec)?;
        let shrunk = jl::shrink(&projected, eps / 2.0)?;
        // The shrink restores unit-ball membership except for projection
        // outliers; clamp those few back onto the sphere.
        PointSet::new(
            shrunk
                .iter()
                .map(|p| {
                    let norm = p.norm();
                    if norm > 1.0 {
                        p.scaled(1.0 / norm)
                    } else {
                        p.clone()
                    }
                })
                .collect(),
        )?
    } else {
        x.clone()
    };

    let mut writer = BitWriter::new();
    let mut offsets = Vec::with_capacity(n);
    let norm_width = QuantizedNorm::bit_width(eps);
    for i in 0..n {
        offsets.push(writer.bit_length() as u64);
        // norms always come from the original vectors
        let qn = grid::quantize_norm(x.point(i), eps)?;
        writer.push_bits(qn.level as u64, norm_width);
        let gp = if params.regime == Regime::Small {
            grid::nearest_round(working.point(i), &grid)?
        } else {
            let mut sampler =
                RngStream::new(seed, stream_tag::POINT_ROUND | i as u64).sampler();
            grid::stochastic_round(working.point(i), &grid, &mut sampler)?
        };
        bits::encode_gridpoint_to(&gp, &mut writer);
    }
    let (payload, payload_bits) = writer.into_bytes();

    Ok(SketchFile {
        n: n as u32,
        k_original: k as u32,
        working_dim: wg.working_dim as u32,
        eps,
        regime: params.regime,
        delta: wg.delta,
        seed,
        offsets,
        payload,
        payload_bit_length: payload_bits as u64,
    })
}

impl SketchFile {
    fn decode_point(&self, i: usize) -> Result<(QuantizedNorm, Vector)> {
        let n = self.n as usize;
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        let mut reader = BitReader::new(&self.payload, self.payload_bit_length as usize);
        reader.seek(self.offsets[i] as usize);
        let norm_width = QuantizedNorm::bit_width(self.eps);
        let level = reader.read_bits(norm_width)? as u32;
        let qn = QuantizedNorm { level, step: self.eps / 4.0 };
        let grid = GridSpec::new(self.working_dim as usize, self.delta)?;
        let gp = bits::decode_gridpoint_from(&mut reader, self.working_dim as usize)?;
        let end = if i + 1 < n {
            self.offsets[i + 1] as usize
        } else {
            self.payload_bit_length as usize
        };
        if reader.position() != end {
            return Err(Error::MalformedFile(format!(
                "point {i}: sketch ends at bit {} but next offset is {end}",
                reader.position()
            )));
        }
        Ok((qn, gp.to_vector(&grid)))
    }

    pub fn decode_pair(&self, i: usize, j: usize) -> Result<QueryResult> {
        if i == j {
            return Err(Error::DiagonalQuery(i));
        }
        let (qn_i, gi) = self.decode_point(i)?;
        let (qn_j, gj) = self.decode_point(j)?;
        let mut inner = gi.dot(&gj);
        if (self.working_dim as usize) < self.k_original as usize {
            // undo the pre-rounding shrink by 1 - eps/2
            let f = 1.0 - self.eps / 2.0;
            inner /= f * f;
        }
        let dist_sq = qn_i.dequantize() + qn_j.dequantize() - 2.0 * inner;
        Ok(QueryResult { inner, dist_sq })
    }

    /// Mean stored bits per point, including norm bits.
    pub fn bits_per_point(&self) -> f64 {
        self.payload_bit_length as f64 / self.n as f64
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&[VERSION])?;
        w.write_all(&self.n.to_le_bytes())?;
        w.write_all(&self.k_original.to_le_bytes())?;
        w.write_all(&self.working_dim.to_le_bytes())?;
        w.write_all(&self.eps.to_le_bytes())?;
        w.write_all(&[self.regime.tag()])?;
        w.write_all(&self.delta.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.payload_bit_length.to_le_bytes())?;
        for off in &self.offsets {
            w.write_all(&off.to_le_bytes())?;
        }
        w.write_all(&self.payload)?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(Error::MalformedFile("bad magic bytes".into()));
        }
        let mut byte = [0u8; 1];
        r.read_exact(&mut byte)?;
        if byte[0] != VERSION {
            return Err(Error::MalformedFile(format!("unsupported version {}", byte[0])));
        }
        let mut u32buf = [0u8; 4];
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u32buf)?;
        let n = u32::from_le_bytes(u32buf);
        r.read_exact(&mut u32buf)?;
        let k_original = u32::from_le_bytes(u32buf);
        r.read_exact(&mut u32buf)?;
        let working_dim = u32::from_le_bytes(u32buf);
        r.read_exact(&mut u64buf)?;
        let eps = f64::from_le_bytes(u64buf);
        r.read_exact(&mut byte)?;
        let regime = Regime::from_tag(byte[0])?;
        r.read_exact(&mut u64buf)?;
        let delta = f64::from_le_bytes(u64buf);
        r.read_exact(&mut u64buf)?;
        let seed = u64::from_le_bytes(u64buf);
        r.read_exact(&mut u64buf)?;
        let payload_bit_length = u64::from_le_bytes(u64buf);
        if n == 0 {
            return Err(Error::MalformedFile("zero points".into()));
        }
        let mut offsets = Vec::with_capacity(n as usize);
        for _ in 0..n {
            r.read_exact(&mut u64buf)?;
            offsets.push(u64::from_le_bytes(u64buf));
        }
        for w in offsets.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::MalformedFile("offsets not strictly increasing".into()));
            }
        }
        if offsets[0] != 0 || *offsets.last().unwrap() >= payload_bit_length.max(1) {
            return Err(Error::MalformedFile("offsets inconsistent with payload length".into()));
        }
        let payload_len = payload_bit_length.div_ceil(8) as usize;
        let mut payload = vec![0u8; payload_len];
        r.read_exact(&mut payload)?;
        Ok(SketchFile {
            n,
            k_original,
            working_dim,
            eps,
            regime,
            delta,
            seed,
            offsets,
            payload,
            payload_bit_length,
        })
    }
}

/// Guaranteed per-point bit ceiling for the configuration: quantized-norm
/// bits plus a provable bound on the body. Each magnitude costs at most
/// `2 + log2(1 + n^2)` bits and every rounded unit-ball point satisfies
/// `sum n_i^2 <= d (1 + 1/delta)^2`, so by concavity the body is at most
/// `d * (3 + log2(1 + (1 + 1/delta)^2))` bits including signs.
pub fn sketch_bits_budget(params: &RegimeParams) -> usize {
    let wg = working_grid(params);
    let d = wg.working_dim as f64;
    let per_coord = 3.0 + (1.0 + (1.0 + 1.0 / wg.delta).powi(2)).log2();
    let norm_bits = QuantizedNorm::bit_width(params.eps) as usize;
    norm_bits + (d * per_coord).ceil() as usize
}

/// The asymptotic per-point bit shape with all constants set to 1,
/// used by benchmarks to compare the implementation against the
/// theoretical growth rate (natural logs).
pub fn theta_shape_bits(params: &RegimeParams) -> f64 {
    let n = params.n as f64;
    let k = params.k as f64;
    let eps = params.eps;
    match params.regime {
        Regime::Large => n.ln() / (eps * eps),
        Regime::Mid => k * (2.0 + n.ln() / (eps * eps * k)).ln(),
        Regime::Small => k * (1.0 / eps).ln(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::gram_and_distances;

    fn random_ball_set(n: usize, k: usize, seed: u64) -> PointSet {
        let mut s = RngStream::new(seed, stream_tag::BALL_SAMPLE).sampler();
        PointSet::new_unit_ball((0..n).map(|_| s.unit_ball_point(k)).collect()).unwrap()
    }

    #[test]
    fn working_grid_per_regime() {
        let small = classify_regime(1024, 3, 0.2).unwrap();
        let wg = working_grid(&small);
        assert_eq!((wg.working_dim, wg.project), (3, false));
        assert!((wg.delta - 0.05).abs() < 1e-15);

        let mid = classify_regime(1024, 60, 0.2).unwrap();
        let wg = working_grid(&mid);
        assert_eq!((wg.working_dim, wg.project), (60, false));
        assert_eq!(wg.delta, mid.delta.unwrap());

        // LARGE at desk scale: m = 6932 > k = 1024, no projection
        let large = classify_regime(1024, 1024, 0.2).unwrap();
        let wg = working_grid(&large);
        assert_eq!((wg.working_dim, wg.project), (1024, false));
        assert!(wg.delta <= 0.5);

        // forced projection: tiny eps-free path via a huge k
        let huge = classify_regime(20_000, 20_000, 0.25).unwrap();
        let wg = working_grid(&huge);
        assert!(wg.project);
        assert_eq!(wg.working_dim, huge.m.unwrap());
        assert_eq!(wg.delta, 1.0);
    }

    #[test]
    fn identical_points_decode_close() {
        let v = vec![0.3, -0.2];
        let set = PointSet::from_rows(vec![v.clone(), v]).unwrap();
        for seed in 0..10 {
            let f = encode_set(&set, 0.2, seed).unwrap();
            let q = f.decode_pair(0, 1).unwrap();
            assert!(q.dist_sq.abs() <= 0.2, "seed {seed}: dist_sq {}", q.dist_sq);
        }
    }

    #[test]
    fn small_regime_rounds_within_half_step() {
        // 16 points in the plane: 2 < ln 16, so deterministic rounding runs
        let mut rows = vec![vec![0.6, 0.8]];
        for i in 1..16 {
            rows.push(vec![i as f64 / 32.0, 0.0]);
        }
        let set = PointSet::from_rows(rows).unwrap();
        let f = encode_set(&set, 0.2, 1).unwrap();
        assert_eq!(f.regime, Regime::Small);
        let (_, g0) = f.decode_point(0).unwrap();
        for (a, b) in g0.as_slice().iter().zip([0.6, 0.8]) {
            assert!((a - b).abs() <= 0.1);
        }
    }

    #[test]
    fn orthonormal_pair_small_regime() {
        let mut rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        rows.extend((0..6).map(|_| vec![0.0, 0.0]));
        let set = PointSet::from_rows(rows).unwrap();
        let f = encode_set(&set, 0.2, 3).unwrap();
        assert_eq!(f.regime, Regime::Small);
        let q = f.decode_pair(0, 1).unwrap();
        assert!((1.8..=2.2).contains(&q.dist_sq), "dist_sq {}", q.dist_sq);
    }

    #[test]
    fn diagonal_and_range_errors() {
        let set = random_ball_set(4, 3, 0);
        let f = encode_set(&set, 0.25, 0).unwrap();
        assert!(matches!(f.decode_pair(1, 1), Err(Error::DiagonalQuery(1))));
        assert!(matches!(f.decode_pair(0, 9), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn decoder_is_pure() {
        let set = random_ball_set(6, 4, 5);
        let f = encode_set(&set, 0.25, 7).unwrap();
        let a = f.decode_pair(2, 4).unwrap();
        let b = f.decode_pair(2, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn encoding_is_deterministic_per_seed() {
        let set = random_ball_set(16, 10, 2);
        let a = encode_set(&set, 0.2, 11).unwrap();
        let b = encode_set(&set, 0.2, 11).unwrap();
        let c = encode_set(&set, 0.2, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.payload, c.payload);
    }

    #[test]
    fn mid_regime_all_pairs_within_eps() {
        let eps = 0.25;
        let set = random_ball_set(64, 16, 8); // ln 64 = 4.16 <= 16 < 66.5
        let (_, dist) = gram_and_distances(&set);
        let f = encode_set(&set, eps, 21).unwrap();
        assert_eq!(f.regime, Regime::Mid);
        for i in 0..64 {
            for j in i + 1..64 {
                let q = f.decode_pair(i, j).unwrap();
                assert!(
                    (q.dist_sq - dist[i][j]).abs() <= eps,
                    "pair ({i},{j}): got {} truth {}",
                    q.dist_sq,
                    dist[i][j]
                );
            }
        }
    }

    #[test]
    fn projection_path_stays_within_eps() {
        // the projection only triggers when m = ceil(40 ln n / eps^2) drops
        // below k; the smallest honest instance is k = n with eps at the top
        // of the accepted range
        let eps = 0.5;
        let n = 1500; // m = ceil(40 ln 1500 / 0.25) = 1171 < 1500
        let set = random_ball_set(n, n, 13);
        let params = classify_regime(n, n, eps).unwrap();
        assert!(params.m.unwrap() < n, "projection should trigger");
        let f = encode_set(&set, eps, 4).unwrap();
        assert!((f.working_dim as usize) < n);
        let (_, dist) = gram_and_distances(&set);
        let mut worst = 0.0f64;
        for i in 0..40 {
            for j in i + 1..40 {
                let q = f.decode_pair(i, j).unwrap();
                worst = worst.max((q.dist_sq - dist[i][j]).abs());
            }
        }
        assert!(worst <= eps, "worst pair error {worst}");
    }

    #[test]
    fn measured_bits_within_budget() {
        for (n, k, eps, seed) in [(64, 4, 0.2, 1u64), (64, 16, 0.25, 2), (256, 256, 0.25, 3)] {
            let set = random_ball_set(n, k, seed);
            let params = classify_regime(n, k, eps).unwrap();
            let f = encode_set(&set, eps, seed).unwrap();
            let budget = sketch_bits_budget(&params) as f64;
            let worst_point = (0..n)
                .map(|i| {
                    let end = if i + 1 < n {
                        f.offsets[i + 1]
                    } else {
                        f.payload_bit_length
                    };
                    (end - f.offsets[i]) as f64
                })
                .fold(0.0, f64::max);
            assert!(
                worst_point <= budget,
                "n={n} k={k} eps={eps}: point uses {worst_point} bits, budget {budget}"
            );
        }
    }

    #[test]
    fn budget_monotone_in_k_within_mid() {
        let mut prev = 0usize;
        for k in 8..170 {
            let params = classify_regime(1024, k, 0.2).unwrap();
            if params.regime != Regime::Mid {
                continue;
            }
            let b = sketch_bits_budget(&params);
            assert!(b >= prev, "budget dropped at k={k}");
            prev = b;
        }
    }

    #[test]
    fn file_roundtrip_is_byte_identical() {
        let set = random_ball_set(12, 9, 6);
        let f = encode_set(&set, 0.25, 17).unwrap();
        let mut bytes = Vec::new();
        f.write_to(&mut bytes).unwrap();
        let g = SketchFile::read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(f, g);
        let mut bytes2 = Vec::new();
        g.write_to(&mut bytes2).unwrap();
        assert_eq!(bytes, bytes2);
        // and decoded results agree
        assert_eq!(f.decode_pair(0, 5).unwrap(), g.decode_pair(0, 5).unwrap());
    }

    #[test]
    fn corrupted_file_rejected() {
        let set = random_ball_set(4, 3, 1);
        let f = encode_set(&set, 0.25, 1).unwrap();
        let mut bytes = Vec::new();
        f.write_to(&mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(SketchFile::read_from(&mut bad.as_slice()).is_err());
        let mut short = bytes.clone();
        short.truncate(short.len() - 2);
        assert!(SketchFile::read_from(&mut short.as_slice()).is_err());
        let mut wrong_version = bytes;
        wrong_version[4] = 0x7f;
        assert!(SketchFile::read_from(&mut wrong_version.as_slice()).is_err());
    }

    #[test]
    fn rejects_points_outside_ball() {
        let set = PointSet::from_rows(vec![vec![1.2, 0.0], vec![0.0, 0.1]]).unwrap();
        assert!(matches!(encode_set(&set, 0.2, 0), Err(Error::OutsideUnitBall { .. })));
    }

    #[test]
    fn theta_shape_is_positive_across_regimes() {
        for (n, k) in [(1024, 3), (1024, 60), (1024, 1024)] {
            let params = classify_regime(n, k, 0.2).unwrap();
            assert!(theta_shape_bits(&params) > 0.0);
        }
    }
}
