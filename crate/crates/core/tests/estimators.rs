#![allow(clippy::needless_range_loop)]

use lrd_core::estimators::{
    dfa_fluctuation, dfa_profile, hurst_dfa, hurst_rs, rs_statistic, BlockLadder, EstimatorError,
    HurstEstimate, Method,
};
use lrd_core::synth::{derive_seed, generate_fgn, generate_gaussian, powerlaw_fixture, FgnSpec};
use proptest::prelude::*;

/// Solves the (order+1)² normal equations by Gaussian elimination with
/// partial pivoting and returns the residual sum of squares of one window.
fn normal_equations_rss(seg: &[f64], order: usize) -> f64 {
    let m = seg.len();
    let k = order + 1;
    // index scaled to [-1, 1] to keep the system well conditioned
    let t: Vec<f64> = (0..m)
        .map(|i| 2.0 * i as f64 / (m - 1) as f64 - 1.0)
        .collect();
    let mut a = vec![vec![0.0; k + 1]; k];
    for (i, &ti) in t.iter().enumerate() {
        let pows: Vec<f64> = (0..k).map(|p| ti.powi(p as i32)).collect();
        for r in 0..k {
            for c in 0..k {
                a[r][c] += pows[r] * pows[c];
            }
            a[r][k] += pows[r] * seg[i];
        }
    }
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        for r in col + 1..k {
            let f = a[r][col] / a[col][col];
            for c in col..=k {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut coef = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| a[r][c] * coef[c]).sum();
        coef[r] = (a[r][k] - s) / a[r][r];
    }
    seg.iter()
        .zip(&t)
        .map(|(&y, &ti)| {
            let fit: f64 = coef
                .iter()
                .enumerate()
                .map(|(p, c)| c * ti.powi(p as i32))
                .sum();
            (y - fit).powi(2)
        })
        .sum()
}

fn oracle_fluctuation(profile: &[f64], m: usize, order: usize) -> f64 {
    let windows = profile.len() / m;
    let rss: f64 = (0..windows)
        .map(|w| normal_equations_rss(&profile[w * m..(w + 1) * m], order))
        .sum();
    (rss / (windows * m) as f64).sqrt()
}

#[test]
fn dfa_matches_normal_equations_for_higher_orders() {
    for (case, order) in [(0u64, 1usize), (1, 2), (2, 3), (3, 2)] {
        let y = generate_gaussian(400 + 37 * case as usize, 2.0, 70 + case).unwrap();
        let profile = dfa_profile(&y).unwrap();
        for m in [8, 16, 32, 64, 128] {
            let got = dfa_fluctuation(&profile, m, order).unwrap();
            let want = oracle_fluctuation(&profile, m, order);
            assert!(
                ((got - want) / want).abs() < 1e-9,
                "order {order} m {m}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn dfa_fluctuation_vanishes_on_exact_polynomial_profile() {
    // a profile that is exactly linear within each window has no residual
    let profile: Vec<f64> = (0..256).map(|i| 3.0 + 0.25 * i as f64).collect();
    assert_eq!(dfa_fluctuation(&profile, 16, 1).unwrap(), 0.0);
    let quad: Vec<f64> = (0..256).map(|i| (i as f64).powi(2)).collect();
    assert_eq!(dfa_fluctuation(&quad, 32, 2).unwrap(), 0.0);
    assert!(dfa_fluctuation(&quad, 32, 1).unwrap() > 0.0);
}

#[test]
fn dfa_block_too_small_for_order() {
    let profile = vec![1.0; 64];
    assert!(matches!(
        dfa_fluctuation(&profile, 4, 3),
        Err(EstimatorError::BlockTooSmall { .. })
    ));
}

#[test]
fn constant_series_has_no_estimate() {
    let x = vec![1.5; 512];
    let ladder = BlockLadder::default();
    assert!(hurst_dfa(&x, &ladder, 1).is_err());
    assert!(hurst_rs(&x, &ladder).is_err());
}

#[test]
fn ladder_must_fit_series() {
    let x = generate_gaussian(200, 1.0, 3).unwrap();
    assert!(matches!(
        hurst_dfa(&x, &BlockLadder::default(), 1),
        Err(EstimatorError::LadderTooLong { .. })
    ));
}

#[test]
fn ladder_validation() {
    assert!(BlockLadder::new(vec![4, 8]).is_err());
    assert!(BlockLadder::new(vec![2, 8, 16]).is_err());
    assert!(BlockLadder::new(vec![8, 4, 16]).is_err());
    assert!(BlockLadder::new(vec![4, 4, 16]).is_err());
    assert_eq!(BlockLadder::default().sizes(), &[4, 8, 16, 32, 64, 128]);
    assert_eq!(BlockLadder::dyadic(128).unwrap(), BlockLadder::default());
}

#[test]
fn rs_statistic_hand_value() {
    // deviations -1.5 -0.5 0.5 1.5, partial sums -1.5 -2 -1.5 0
    let r = rs_statistic(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    let s = 1.25f64.sqrt();
    assert!((r - 2.0 / s).abs() < 1e-14, "{r}");
}

#[test]
fn exact_power_laws_give_their_exponent() {
    let ladder = BlockLadder::default();
    for h in [0.5, 0.7] {
        for method in [Method::Dfa, Method::Rs] {
            let est = HurstEstimate::from_points(
                method,
                None,
                ladder.clone(),
                powerlaw_fixture(h, ladder.sizes()),
            )
            .unwrap();
            assert!((est.h - h).abs() < 1e-10);
            assert!((est.r_squared - 1.0).abs() < 1e-12);
        }
    }
}

/// Slope of `½ ln E[F²(m)]` on `ln m` for white noise under DFA-1, where
/// `E[F²(m)] = (m² − 4) / (15 m)` for unit variance.
fn white_noise_dfa1_slope(sizes: &[usize]) -> f64 {
    let xs: Vec<f64> = sizes.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = sizes
        .iter()
        .map(|&m| {
            let m = m as f64;
            0.5 * ((m * m - 4.0) / (15.0 * m)).ln()
        })
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn white_noise_oracle_matches_brute_force_projection() {
    // m·E[F²(m)] = tr(R Σ R) with Σ the profile covariance of one window
    // and R the projector onto residuals of a straight-line fit
    for m in [4usize, 8, 16] {
        let n = m;
        let mut sigma = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                // cumulative sums of mean-removed unit-variance draws
                sigma[i][j] = (i.min(j) + 1) as f64 - ((i + 1) * (j + 1)) as f64 / n as f64;
            }
        }
        let t: Vec<f64> = (0..n).map(|i| i as f64 - (n - 1) as f64 / 2.0).collect();
        let tt: f64 = t.iter().map(|v| v * v).sum();
        let proj = |i: usize, j: usize| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - 1.0 / n as f64 - t[i] * t[j] / tt
        };
        let mut trace = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut rs = 0.0;
                for k in 0..n {
                    rs += proj(i, k) * sigma[k][j];
                }
                trace += rs * proj(j, i);
            }
        }
        let mf = m as f64;
        let closed = (mf * mf - 4.0) / 15.0;
        assert!((trace - closed).abs() < 1e-9, "m {m}: {trace} vs {closed}");
    }
}

#[test]
fn dfa_on_white_noise_follows_the_analytic_slope() {
    let ladder = BlockLadder::default();
    let expected = white_noise_dfa1_slope(ladder.sizes());
    assert!((expected - 0.5338).abs() < 1e-3, "{expected}");
    let hs: Vec<f64> = (0..50)
        .map(|i| {
            let x = generate_gaussian(10_000, 1.0, derive_seed(31, i)).unwrap();
            hurst_dfa(&x, &ladder, 1).unwrap().h
        })
        .collect();
    let mean = hs.iter().sum::<f64>() / hs.len() as f64;
    assert!(
        (mean - expected).abs() < 0.01,
        "mean {mean}, analytic {expected}"
    );
}

#[test]
fn dfa_recovers_persistent_fgn() {
    let ladder = BlockLadder::default();
    let hs: Vec<f64> = (0..20)
        .map(|i| {
            let x =
                generate_fgn(&FgnSpec::new(0.7, 10_000, 1.0, derive_seed(32, i)).unwrap()).unwrap();
            hurst_dfa(&x, &ladder, 1).unwrap().h
        })
        .collect();
    let mean = hs.iter().sum::<f64>() / hs.len() as f64;
    assert!((0.65..=0.75).contains(&mean), "{mean}");
}

#[test]
fn rs_on_white_noise_shows_small_sample_bias() {
    let ladder = BlockLadder::new(vec![16, 32, 64, 128, 256]).unwrap();
    let hs: Vec<f64> = (0..50)
        .map(|i| {
            let x = generate_gaussian(10_000, 1.0, derive_seed(33, i)).unwrap();
            hurst_rs(&x, &ladder).unwrap().h
        })
        .collect();
    let mean = hs.iter().sum::<f64>() / hs.len() as f64;
    assert!((0.50..=0.62).contains(&mean), "{mean}");
}

#[test]
fn estimate_reports_its_inputs() {
    let x = generate_gaussian(1000, 1.0, 5).unwrap();
    let ladder = BlockLadder::default();
    let est = hurst_dfa(&x, &ladder, 2).unwrap();
    assert_eq!(est.method, Method::Dfa);
    assert_eq!(est.detrend_order, Some(2));
    assert_eq!(est.ladder, ladder);
    assert_eq!(est.points.len(), 6);
    let rs = hurst_rs(&x, &ladder).unwrap();
    assert_eq!(rs.method, Method::Rs);
    assert_eq!(rs.detrend_order, None);
    // the slope is the estimate refit from the reported points
    let refit = HurstEstimate::from_points(Method::Rs, None, ladder, rs.points.clone()).unwrap();
    assert!((refit.h - rs.h).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dfa_is_affine_invariant(seed in any::<u64>(), scale in 0.01f64..100.0, shift in -1e3f64..1e3) {
        let x = generate_gaussian(600, 1.0, seed).unwrap();
        let y: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        let ladder = BlockLadder::default();
        let a = hurst_dfa(&x, &ladder, 1).unwrap();
        let b = hurst_dfa(&y, &ladder, 1).unwrap();
        prop_assert!((a.h - b.h).abs() < 1e-9, "{} vs {}", a.h, b.h);
    }

    #[test]
    fn rs_is_affine_invariant(seed in any::<u64>(), scale in 0.01f64..100.0, shift in -1e3f64..1e3) {
        let x = generate_gaussian(600, 1.0, seed).unwrap();
        let y: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        let ladder = BlockLadder::default();
        let a = hurst_rs(&x, &ladder).unwrap();
        let b = hurst_rs(&y, &ladder).unwrap();
        prop_assert!((a.h - b.h).abs() < 1e-9, "{} vs {}", a.h, b.h);
    }

    #[test]
    fn fluctuation_is_nonnegative_and_scales(seed in any::<u64>(), scale in 0.1f64..10.0, m in 5usize..64) {
        let y = generate_gaussian(300, 1.0, seed).unwrap();
        let p = dfa_profile(&y).unwrap();
        let ps: Vec<f64> = p.iter().map(|v| v * scale).collect();
        let f = dfa_fluctuation(&p, m, 1).unwrap();
        let fs = dfa_fluctuation(&ps, m, 1).unwrap();
        prop_assert!(f >= 0.0);
        prop_assert!((fs - scale * f).abs() <= 1e-10 * fs.max(1.0));
    }

    #[test]
    fn power_law_slope_is_recovered(h in 0.0f64..1.0, c in 0.1f64..10.0) {
        let ladder = BlockLadder::default();
        let points = powerlaw_fixture(h, ladder.sizes())
            .into_iter()
            .map(|mut p| { p.value *= c; p })
            .collect();
        let est = HurstEstimate::from_points(Method::Dfa, Some(1), ladder, points).unwrap();
        prop_assert!((est.h - h).abs() < 1e-10);
        prop_assert!((est.intercept - c.ln()).abs() < 1e-10);
    }
}
