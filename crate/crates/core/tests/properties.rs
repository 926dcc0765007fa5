use onebit_rip::embedding::{augment_matrix, embed, embed_batch, embed_noisy, hamming, BitCode};
use onebit_rip::geometry::{distorted_distance, geodesic_distance, lift, sample_sparse_unit};
use onebit_rip::ripcheck::{sweep_m, PairSampler, SweepConfig};
use onebit_rip::vctool::{achievable, labeling_of, lambert_w_minus1, Dichotomy, PointSet, DEFAULT_TOL};
use onebit_rip::{Execution, Metric, NoiseModel, NoiseVector, RngStream, SensingMatrix};
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..24).prop_flat_map(|n| (Just(n), 1..=n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distorted_metric_axioms(seed in any::<u64>(), (n, s) in dims(), sigma in 0.0f64..4.0) {
        let noise = NoiseModel::new(sigma).unwrap();
        let mut st = RngStream::new(seed, 0);
        let x = sample_sparse_unit(&mut st, n, s).unwrap();
        let y = sample_sparse_unit(&mut st, n, s).unwrap();
        let z = sample_sparse_unit(&mut st, n, s).unwrap();
        let d = |a, b| distorted_distance(a, b, noise).unwrap();
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert!(d(&x, &y) <= geodesic_distance(&x, &y).unwrap() + 1e-15);
        if sigma >= 1.0 {
            // the lifted correlation is then non-negative
            prop_assert!(d(&x, &y) <= 0.5 + 1e-15);
        }
        let anti = geodesic_distance(&x.negated(), &y).unwrap();
        prop_assert!((anti - (1.0 - geodesic_distance(&x, &y).unwrap())).abs() <= 1e-12);
    }

    #[test]
    fn lifted_geodesic_is_distorted(seed in any::<u64>(), (n, s) in dims(), sigma in 0.0f64..4.0) {
        let noise = NoiseModel::new(sigma).unwrap();
        let mut st = RngStream::new(seed, 1);
        let x = sample_sparse_unit(&mut st, n, s).unwrap();
        let y = sample_sparse_unit(&mut st, n, s).unwrap();
        let lifted = geodesic_distance(&lift(&x, noise), &lift(&y, noise)).unwrap();
        prop_assert!((lifted - distorted_distance(&x, &y, noise).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn noisy_map_equals_augmented_map(seed in any::<u64>(), (n, s) in dims(), m in 1usize..200, sigma in 0.01f64..5.0) {
        let noise = NoiseModel::new(sigma).unwrap();
        let mut st = RngStream::new(seed, 2);
        let a = SensingMatrix::gaussian(&mut st, m, n).unwrap();
        let eta = NoiseVector::sample(&mut st, m, noise).unwrap();
        let x = sample_sparse_unit(&mut st, n, s).unwrap();
        let direct = embed_noisy(&a, &eta, &x).unwrap();
        let lifted = embed(&augment_matrix(&a, &eta, noise).unwrap(), &lift(&x, noise)).unwrap();
        prop_assert_eq!(direct, lifted);
    }

    #[test]
    fn batch_and_serialization_agree(seed in any::<u64>(), (n, s) in dims(), m in 1usize..300, count in 1usize..8) {
        let mut st = RngStream::new(seed, 3);
        let a = SensingMatrix::gaussian(&mut st, m, n).unwrap();
        let xs: Vec<_> = (0..count).map(|_| sample_sparse_unit(&mut st, n, s).unwrap()).collect();
        let par = embed_batch(&a, None, &xs, Execution::Parallel).unwrap();
        let seq = embed_batch(&a, None, &xs, Execution::Sequential).unwrap();
        prop_assert_eq!(&par, &seq);
        for (x, c) in xs.iter().zip(&par) {
            prop_assert_eq!(&embed(&a, x).unwrap(), c);
            let back = BitCode::read_from(c.to_bytes().as_slice()).unwrap();
            prop_assert_eq!(&back, c);
            prop_assert_eq!(hamming(c, &c.complement()).unwrap(), 1.0);
        }
    }

    #[test]
    fn achievable_directions_requantize(seed in any::<u64>(), k in 1usize..6, n in 2usize..6, mask in any::<u32>()) {
        let mut st = RngStream::new(seed, 4);
        let pts = PointSet::new((0..k).map(|_| sample_sparse_unit(&mut st, n, n).unwrap()).collect()).unwrap();
        let d = Dichotomy::new(mask & ((1 << k) - 1), k).unwrap();
        let support: Vec<usize> = (0..n).collect();
        if let Some(p) = achievable(&pts, d, &support, DEFAULT_TOL).unwrap() {
            prop_assert_eq!(labeling_of(&pts, &p).unwrap(), d);
            prop_assert!(p.iter().all(|v| v.abs() <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn lambert_inverts_and_respects_log_bound(u in 1e-9f64..1.0) {
        let x = -(-1.0f64).exp() * u;
        let w = lambert_w_minus1(x).unwrap();
        prop_assert!(w <= -1.0);
        prop_assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs());
        prop_assert!(w >= (x * x).ln());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sweep_output_is_independent_of_execution_mode(seed in any::<u64>(), sigma in prop_oneof![Just(0.0), Just(0.7)]) {
        let config = |exec| SweepConfig {
            noise: NoiseModel::new(sigma).unwrap(),
            m_grid: vec![64, 128, 256],
            trials: 3,
            sampler: PairSampler::mixed(16, 3, 40).unwrap(),
            metric: Metric::Distorted,
            seed,
            exec,
        };
        prop_assert_eq!(sweep_m(&config(Execution::Parallel)).unwrap(), sweep_m(&config(Execution::Sequential)).unwrap());
    }
}
