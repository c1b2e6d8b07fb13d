use serde::{Deserialize, Serialize};

/// Ordinary least squares line `y = intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    /// Unweighted OLS over paired samples. Returns `None` with fewer than two
    /// points or when every `x` is identical.
    pub fn fit(xs: &[f64], ys: &[f64]) -> Option<Self> {
        assert_eq!(xs.len(), ys.len(), "paired samples");
        let n = xs.len();
        if n < 2 {
            return None;
        }
        let nf = n as f64;
        let x_mean = xs.iter().sum::<f64>() / nf;
        let y_mean = ys.iter().sum::<f64>() / nf;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        let mut syy = 0.0;
        for (&x, &y) in xs.iter().zip(ys) {
            let dx = x - x_mean;
            let dy = y - y_mean;
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
        if sxx == 0.0 {
            return None;
        }
        let slope = sxy / sxx;
        let intercept = y_mean - slope * x_mean;
        let ss_res: f64 = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let e = y - (intercept + slope * x);
                e * e
            })
            .sum();
        let r_squared = if syy == 0.0 {
            1.0
        } else {
            (1.0 - ss_res / syy).clamp(0.0, 1.0)
        };
        Some(Self {
            slope,
            intercept,
            r_squared,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.25 + 1.5 * x).collect();
        let fit = LinearFit::fit(&xs, &ys).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-14);
        assert!((fit.intercept - 0.25).abs() < 1e-14);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn shifted_regressor_keeps_slope() {
        // ln(τ) versus ln(τ/2): same slope, intercept moves by slope·ln 2
        let taus = [16.0_f64, 32.0, 64.0, 128.0, 256.0];
        let ys = [1.1, 1.52, 1.9, 2.31, 2.74];
        let a: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
        let b: Vec<f64> = taus.iter().map(|t| (t / 2.0).ln()).collect();
        let fa = LinearFit::fit(&a, &ys).unwrap();
        let fb = LinearFit::fit(&b, &ys).unwrap();
        assert!((fa.slope - fb.slope).abs() < 1e-12);
        assert!((fb.intercept - fa.intercept - fa.slope * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(LinearFit::fit(&[1.0], &[2.0]).is_none());
        assert!(LinearFit::fit(&[1.0, 1.0], &[2.0, 3.0]).is_none());
        let flat = LinearFit::fit(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(flat.slope, 0.0);
        assert_eq!(flat.r_squared, 1.0);
    }
}
