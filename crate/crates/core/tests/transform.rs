mod common;

use common::c;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use zerodensity::measure::*;
use zerodensity::transform::*;

fn seq(v: Vec<Complex64>) -> MomentSequence {
    MomentSequence::new(v).unwrap()
}

/// Noisy moments of a random measure whose weights share one phase, so
/// that the zeros of its Cauchy transform stay inside the node hull.
fn moment_like(rng: &mut ChaCha8Rng, n: usize) -> MomentSequence {
    let p = rng.random_range(1..=6);
    let m = common::random_positive_measure(rng, p);
    let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    let mut d = exact_moments(&m, n).unwrap().into_vec();
    for x in d.iter_mut() {
        *x = *x * phase + common::random_complex(rng, 1e-3);
    }
    seq(d)
}

fn involution_error(d: &MomentSequence) -> f64 {
    let back = phi(&phi(d).unwrap()).unwrap();
    let gap = back.values().iter().zip(d.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    gap / d.max_abs()
}

#[test]
fn examples() {
    let unit = seq(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    assert_eq!(phi(&unit).unwrap(), unit);
    let a = c(0.3, -0.7);
    let mut v = vec![c(0.0, 0.0); 12];
    v[0] = c(1.0, 0.0);
    v[1] = a;
    let out = phi(&seq(v)).unwrap();
    for k in 0..12 {
        assert!((out[k] - (-a).powu(k as u32)).norm() < 1e-14);
    }
}

#[test]
fn convolution_identity_on_iid_sequences() {
    let mut rng = common::rng(1);
    for _ in 0..20 {
        let mut v: Vec<Complex64> = (0..74).map(|_| common::random_in_disk(&mut rng, 1.0)).collect();
        v[0] = Complex64::from_polar(1.0, rng.random_range(0.0..6.28));
        let d = seq(v);
        let dt = phi(&d).unwrap();
        for k in 0..74 {
            let terms: Vec<Complex64> = (0..=k).map(|j| d[j] * dt[k - j]).collect();
            let sum: Complex64 = terms.iter().sum();
            let scale: f64 = terms.iter().map(|t| t.norm()).sum();
            let target = if k == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) };
            // residual measured against the size of the terms being cancelled
            assert!((sum - target).norm() <= 1e-10 * scale.max(1.0), "k = {k}");
        }
    }
}

#[test]
fn leading_entry_and_scaling_law() {
    let mut rng = common::rng(2);
    for _ in 0..20 {
        let d = moment_like(&mut rng, 40);
        let dt = phi(&d).unwrap();
        assert!((dt[0] - d[0].inv()).norm() <= 1e-15 * dt[0].norm());
        for lambda in [c(2.0, 0.0), c(-1.0, 1.0)] {
            let scaled = phi(&seq(d.values().iter().map(|x| x * lambda).collect())).unwrap();
            let gap = (0..40).map(|k| (scaled[k] - dt[k] / lambda).norm()).fold(0.0, f64::max);
            assert!(gap <= 1e-10 * dt.max_abs().max(1.0));
        }
    }
}

#[test]
fn involution_on_moment_like_sequences() {
    let mut rng = common::rng(4);
    for _ in 0..200 {
        let d = moment_like(&mut rng, 74);
        assert!(involution_error(&d) <= 1e-8);
    }
}

#[test]
fn determinant_entries_match_forward_substitution() {
    let mut rng = common::rng(5);
    for trial in 0..40 {
        let y = if trial % 2 == 0 {
            moment_like(&mut rng, 24)
        } else {
            let mut v: Vec<Complex64> = (0..24).map(|_| common::random_in_disk(&mut rng, 0.5)).collect();
            v[0] = c(1.0, 0.2);
            seq(v)
        };
        let forward = phi(&y).unwrap();
        let scale = forward.values()[..=20].iter().map(|z| z.norm()).fold(0.0, f64::max);
        for k in 0..=20 {
            let det = phi_inverse_entry(&y, k).unwrap();
            assert!((det - forward[k]).norm() <= 1e-9 * scale, "trial {trial}, k = {k}");
        }
    }
    let y = seq(vec![c(1.0, 0.0), c(0.4, 0.1), c(0.2, 0.0)]);
    assert!((phi_inverse_entry(&y, 0).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    assert!((phi_inverse_entry(&y, 1).unwrap() + c(0.4, 0.1)).norm() < 1e-15);
}

#[test]
fn transformed_moments_follow_the_zeros() {
    // beyond the first two entries Φ(d)_k = Σ c̃_j ζ_j^k over the zeros ζ_j
    let mut rng = common::rng(6);
    for _ in 0..20 {
        let p = 3;
        let m = common::random_measure(&mut rng, p);
        let zeros = zeros_oracle(&m).unwrap().roots;
        let dt = phi(&exact_moments(&m, 2 * p + 6).unwrap()).unwrap();
        let rows: Vec<usize> = (2..2 * p).collect();
        let a = DMatrix::from_fn(rows.len(), zeros.len(), |i, j| zeros[j].powu(rows[i] as u32));
        let b = DVector::from_fn(rows.len(), |i, _| dt[rows[i]]);
        let coeffs = a.svd(true, true).solve(&b, 1e-14).unwrap();
        for k in 2 * p..2 * p + 6 {
            let predicted: Complex64 = zeros.iter().zip(coeffs.iter()).map(|(z, w)| w * z.powu(k as u32)).sum();
            assert!((predicted - dt[k]).norm() <= 1e-7 * dt[k].norm().max(1e-12), "k = {k}");
        }
    }
}

#[test]
fn pushforward_peak_and_plug_in() {
    let m = AtomicMeasure::benchmark();
    let mu = exact_moments(&m, 6).unwrap();
    let sigma = 0.3;
    let g = PushforwardDensity::new(mu.clone(), sigma).unwrap();
    let center = seq(g.center().to_vec());
    let want = 6.0 * (mu[0].norm_sqr() / (std::f64::consts::PI * sigma * sigma)).ln();
    assert!((g.log_density(&center).unwrap() - want).abs() <= 1e-9 * want.abs());
    assert!((g.log_gaussian_approx(&center).unwrap() - want).abs() <= 1e-12 * want.abs());

    let unit = seq(vec![c(1.0, 0.0), c(0.0, 0.0)]);
    let g = PushforwardDensity::new(unit.clone(), 1.0).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((g.density(&unit).unwrap() - 1.0 / pi2).abs() < 1e-15);
}

#[test]
fn gaussian_approximation_is_first_order_exact_at_unit_center() {
    let mu = seq(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let w = [c(0.3, -0.5), c(1.1, 0.2), c(-0.4, 0.7), c(0.2, 0.1)];
    let mut gaps = Vec::new();
    for sigma in [1e-1, 1e-2, 1e-3] {
        let g = PushforwardDensity::new(mu.clone(), sigma).unwrap();
        let y = seq(g.center().iter().zip(&w).map(|(c0, wk)| c0 + wk * sigma).collect());
        gaps.push((g.log_density(&y).unwrap() - g.log_gaussian_approx(&y).unwrap()).abs());
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    assert!(gaps[2] <= 1e-2, "{gaps:?}");
}

#[test]
fn gaussian_approximation_integrates_to_one() {
    let mu = seq(vec![c(2.0, -1.0), c(0.5, 0.3)]);
    let sigma = 0.7;
    let g = PushforwardDensity::new(mu.clone(), sigma).unwrap();
    let sd = sigma / mu[0].norm() / 2f64.sqrt();
    let pts = 25;
    let half = 7.0 * sd;
    let h = 2.0 * half / (pts - 1) as f64;
    let axis: Vec<f64> = (0..pts).map(|i| -half + i as f64 * h).collect();
    let ctr = g.center().to_vec();
    let mut total = 0.0;
    for a in &axis {
        for b in &axis {
            for cc in &axis {
                for dd in &axis {
                    let y = seq(vec![ctr[0] + c(*a, *b), ctr[1] + c(*cc, *dd)]);
                    total += g.gaussian_approx(&y).unwrap();
                }
            }
        }
    }
    total *= h.powi(4);
    assert!((total - 1.0).abs() <= 1e-6, "{total}");
}

#[test]
fn transformed_noise_concentrates_on_the_center() {
    let m = AtomicMeasure::benchmark();
    let mu = exact_moments(&m, 74).unwrap();
    let center = phi(&mu).unwrap();
    let noise = NoiseModel::new(0.01, 21).unwrap();
    let samples: Vec<MomentSequence> = sample_realizations(&m, 74, &noise, 10_000)
        .unwrap()
        .iter()
        .map(|d| phi(d).unwrap())
        .collect();
    let count = samples.len() as f64;
    for k in 0..74 {
        let mean: Complex64 = samples.iter().map(|s| s[k]).sum::<Complex64>() / count;
        let var: f64 = samples.iter().map(|s| (s[k] - mean).norm_sqr()).sum::<f64>() / (count - 1.0);
        let se = (var / count).sqrt();
        assert!((mean - center[k]).norm() <= 3.0 * se, "k = {k}");
    }
}

#[test]
fn rejects_small_leading_entry() {
    let d = seq(vec![c(1e-14, 0.0), c(1.0, 0.0), c(0.5, 0.0)]);
    assert!(matches!(phi(&d), Err(zerodensity::Error::IllConditionedTransform { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn involution_property(seed in any::<u64>(), n in 2usize..80) {
        let mut rng = common::rng(seed);
        let d = moment_like(&mut rng, n);
        prop_assert!(involution_error(&d) <= 1e-8);
    }

    #[test]
    fn triangular_solve_inverts(seed in any::<u64>(), n in 1usize..30) {
        let mut rng = common::rng(seed);
        let mut col: Vec<Complex64> = (0..n).map(|_| common::random_in_disk(&mut rng, 0.3)).collect();
        col[0] = c(1.0, 0.0);
        let t = ToeplitzLowerTriangular::new(col).unwrap();
        let x = t.solve_e1();
        let e = t.mul_vec(&x);
        for (k, v) in e.iter().enumerate() {
            let target = if k == 0 { 1.0 } else { 0.0 };
            prop_assert!((v - c(target, 0.0)).norm() <= 1e-12);
        }
    }
}
