//! Randomized property checks across the library surface.

use epsketch::bits::{decode_gridpoint, encode_gridpoint};
use epsketch::grid::{nearest_round, stochastic_round, GridPoint, GridSpec};
use epsketch::jl::{project, ProjectionSpec};
use epsketch::regime::{classify_regime, Regime};
use epsketch::rng::RngStream;
use epsketch::{PointSet, Vector};
use proptest::prelude::*;

fn arb_gridpoint() -> impl Strategy<Value = GridPoint> {
    (1usize..12).prop_flat_map(|dim| {
        (
            proptest::collection::vec(any::<bool>(), dim),
            proptest::collection::vec(0u32..200, dim),
        )
            .prop_map(|(signs, magnitudes)| GridPoint { signs, magnitudes })
    })
}

proptest! {
    #[test]
    fn codec_roundtrip(g in arb_gridpoint()) {
        let e = encode_gridpoint(&g);
        let back = decode_gridpoint(&e, g.dim()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn rounding_perturbation_bounded(
        coords in proptest::collection::vec(-0.5f64..0.5, 1..10),
        delta in 0.05f64..1.0,
        seed in any::<u64>(),
    ) {
        let dim = coords.len();
        let x = Vector::new(coords).unwrap();
        let grid = GridSpec::new(dim, delta).unwrap();
        let mut s = RngStream::new(seed, 0).sampler();
        let stoch = stochastic_round(&x, &grid, &mut s).unwrap().to_vector(&grid);
        let near = nearest_round(&x, &grid).unwrap().to_vector(&grid);
        for ((a, b), c) in x.as_slice().iter().zip(stoch.as_slice()).zip(near.as_slice()) {
            prop_assert!((a - b).abs() < grid.spacing());
            prop_assert!((a - c).abs() <= grid.spacing() / 2.0 + 1e-12);
        }
    }

    #[test]
    fn regimes_partition_dimensions(n in 2usize..2000, eps_m in 1usize..50) {
        let eps = eps_m as f64 / 100.0;
        let ln_n = (n as f64).ln();
        for k in 1..=n.min(300) {
            let p = classify_regime(n, k, eps).unwrap();
            let expected = if (k as f64) >= ln_n / (eps * eps) {
                Regime::Large
            } else if (k as f64) >= ln_n {
                Regime::Mid
            } else {
                Regime::Small
            };
            prop_assert_eq!(p.regime, expected, "n={} k={} eps={}", n, k, eps);
        }
    }

    #[test]
    fn projection_linearity(
        u in proptest::collection::vec(-0.5f64..0.5, 4),
        v in proptest::collection::vec(-0.5f64..0.5, 4),
        alpha in -2.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let combo: Vec<f64> = u.iter().zip(&v).map(|(a, b)| alpha * a + b).collect();
        let set = PointSet::from_rows(vec![u, v, combo]).unwrap();
        let spec = ProjectionSpec::new(4, 6, seed).unwrap();
        let out = project(&set, &spec).unwrap();
        for i in 0..6 {
            let expect = alpha * out.point(0).as_slice()[i] + out.point(1).as_slice()[i];
            prop_assert!((out.point(2).as_slice()[i] - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn norm_quantization_error_within_half_step(nsq in 0.0f64..1.0, eps_m in 2usize..50) {
        let eps = eps_m as f64 / 100.0;
        let q = epsketch::grid::quantize_norm_sq(nsq, eps).unwrap();
        prop_assert!((q.dequantize() - nsq).abs() <= eps / 8.0 + 1e-12);
    }
}
