use chrono::NaiveDate;
use lrd_core::io::{integrate_returns, synth_start_date};
use lrd_core::series::{
    describe, jarque_bera, log_returns, DescriptiveStats, PricePoint, PriceSeries, ReturnPoint,
    ReturnSeries, SeriesError,
};
use proptest::prelude::*;

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).unwrap()
}

fn prices(values: &[f64]) -> PriceSeries {
    let pts = values
        .iter()
        .enumerate()
        .map(|(i, &price)| PricePoint {
            date: d(2005, 1, 3) + chrono::Days::new(i as u64),
            price,
        })
        .collect();
    PriceSeries::new("P", pts).unwrap()
}

#[test]
fn percent_log_returns() {
    let r = log_returns(&prices(&[100.0, 110.0, 99.0]));
    assert_eq!(r.len(), 2);
    assert!((r.values()[0] - 100.0 * 1.1f64.ln()).abs() < 1e-12);
    assert!((r.values()[1] - 100.0 * 0.9f64.ln()).abs() < 1e-12);
    // dated with the later price
    assert_eq!(r.dates(), vec![d(2005, 1, 4), d(2005, 1, 5)]);
    assert_eq!(r.id(), "P");
}

#[test]
fn price_validation() {
    let pt = |day, price| PricePoint {
        date: d(2005, 1, day),
        price,
    };
    assert!(matches!(
        PriceSeries::new("x", vec![pt(3, 1.0)]),
        Err(SeriesError::TooShort { .. })
    ));
    assert!(matches!(
        PriceSeries::new("x", vec![pt(3, 1.0), pt(4, 0.0)]),
        Err(SeriesError::BadPrice { .. })
    ));
    assert!(matches!(
        PriceSeries::new("x", vec![pt(3, 1.0), pt(4, f64::INFINITY)]),
        Err(SeriesError::BadPrice { .. })
    ));
    assert!(matches!(
        PriceSeries::new("x", vec![pt(4, 1.0), pt(3, 2.0)]),
        Err(SeriesError::DateOrder { .. })
    ));
    assert!(matches!(
        PriceSeries::new("x", vec![pt(4, 1.0), pt(4, 2.0)]),
        Err(SeriesError::DateOrder { .. })
    ));
    let r = ReturnPoint {
        date: d(2005, 1, 3),
        ret: f64::NAN,
    };
    assert!(ReturnSeries::new("x", vec![r]).is_err());
}

#[test]
fn extreme_price_ratios_stay_finite() {
    let r = log_returns(&prices(&[1e-300, 1e300]));
    assert!(r.values()[0].is_finite());
    assert!((r.values()[0] - 100.0 * (1e300f64.ln() - 1e-300f64.ln())).abs() < 1e-9);
}

#[test]
fn integrated_returns_come_back() {
    let x = [0.5, -1.25, 3.0, 0.0, -0.1];
    let p = integrate_returns(&x, synth_start_date());
    let r = log_returns(&PriceSeries::new("s", p).unwrap());
    for (a, b) in r.values().iter().zip(&x) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn describe_hand_values() {
    let s = DescriptiveStats::from_values(&[1.0, 2.0, 3.0, 4.0, 10.0]).unwrap();
    assert_eq!(s.n, 5);
    assert_eq!(s.mean, 4.0);
    assert_eq!(s.median, 3.0);
    assert_eq!((s.min, s.max), (1.0, 10.0));
    // deviations -3 -2 -1 0 6: m2 = 10, m3 = 180/5 = 36, m4 = (81+16+1+1296)/5
    let m2 = 10.0f64;
    assert!((s.std_dev - m2.sqrt()).abs() < 1e-12);
    assert!((s.skewness.unwrap() - 36.0 / m2.powf(1.5)).abs() < 1e-12);
    assert!((s.kurtosis.unwrap() - 278.8 / 100.0).abs() < 1e-12);
    let even = DescriptiveStats::from_values(&[4.0, 1.0, 3.0, 2.0]).unwrap();
    assert_eq!(even.median, 2.5);
}

#[test]
fn describe_constant_sample() {
    let s = DescriptiveStats::from_values(&[2.0; 6]).unwrap();
    assert_eq!(s.std_dev, 0.0);
    assert_eq!(s.skewness, None);
    assert_eq!(s.jarque_bera, None);
    assert!(DescriptiveStats::from_values(&[1.0, 2.0, 3.0]).is_err());
    assert_eq!(
        DescriptiveStats::from_values(&[1.0, 2.0, 3.0, f64::NAN]),
        Err(SeriesError::NonFinite)
    );
}

#[test]
fn jarque_bera_normal_moments_is_zero() {
    assert_eq!(jarque_bera(1000, 0.0, 3.0), 0.0);
    // n/6 · (S² + (K−3)²/4)
    assert!((jarque_bera(60, 1.0, 5.0) - 20.0).abs() < 1e-12);
}

fn price_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..2.0, 5..80).prop_map(|steps| {
        let mut level = 100.0;
        steps
            .into_iter()
            .map(|s| {
                level *= s;
                level
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn returns_ignore_price_scale(p in price_strategy(), c in 1e-3f64..1e3) {
        let scaled: Vec<f64> = p.iter().map(|v| v * c).collect();
        let a = log_returns(&prices(&p)).values();
        let b = log_returns(&prices(&scaled)).values();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn negation_flips_odd_moments(x in prop::collection::vec(-10.0f64..10.0, 4..100)) {
        let a = DescriptiveStats::from_values(&x).unwrap();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let b = DescriptiveStats::from_values(&neg).unwrap();
        prop_assert!((a.mean + b.mean).abs() < 1e-12);
        prop_assert!((a.median + b.median).abs() < 1e-12);
        prop_assert_eq!(a.min, -b.max);
        prop_assert!((a.std_dev - b.std_dev).abs() < 1e-9);
        if let (Some(sa), Some(sb)) = (a.skewness, b.skewness) {
            prop_assert!((sa + sb).abs() < 1e-8);
            prop_assert!((a.kurtosis.unwrap() - b.kurtosis.unwrap()).abs() < 1e-8);
            prop_assert!((a.jarque_bera.unwrap() - b.jarque_bera.unwrap()).abs() < 1e-6 * a.jarque_bera.unwrap().max(1.0));
        }
    }

    #[test]
    fn jarque_bera_matches_reported_moments(x in prop::collection::vec(-10.0f64..10.0, 4..100)) {
        let s = DescriptiveStats::from_values(&x).unwrap();
        if let (Some(sk), Some(ku), Some(jb)) = (s.skewness, s.kurtosis, s.jarque_bera) {
            prop_assert!((jarque_bera(s.n, sk, ku) - jb).abs() <= 1e-12 * jb.max(1.0));
            prop_assert!(ku >= 1.0 - 1e-12);
            prop_assert!(jb >= 0.0);
        }
    }

    #[test]
    fn describe_uses_return_values(p in price_strategy()) {
        let r = log_returns(&prices(&p));
        prop_assume!(r.len() >= 4);
        prop_assert_eq!(describe(&r).unwrap(), DescriptiveStats::from_values(&r.values()).unwrap());
    }
}
