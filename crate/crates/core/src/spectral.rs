use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{LrdError, Result};
use crate::stats;

/// Periodogram at the Fourier frequencies `2 pi j / N`, `j = 1..=(N-1)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Periodogram {
    pub frequencies: Vec<f64>,
    pub ordinates: Vec<f64>,
    pub n: usize,
    /// Ordinate at pi when `N` is even; needed only for Parseval.
    pub nyquist: Option<f64>,
}

/// `I(l) = |sum_t (x(t) - mean) e^{-i t l}|^2 / (2 pi N)`.
pub fn periodogram(x: &[f64]) -> Result<Periodogram> {
    let n = x.len();
    if n < 8 {
        return Err(LrdError::Input(format!(
            "periodogram needs N >= 8, got {n}"
        )));
    }
    let m = stats::mean(x);
    let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(v - m, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let norm = 2.0 * PI * n as f64;
    let half = (n - 1) / 2;
    let frequencies = (1..=half).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
    let ordinates = (1..=half).map(|j| buf[j].norm_sqr() / norm).collect();
    let nyquist = n.is_multiple_of(2).then(|| buf[n / 2].norm_sqr() / norm);
    Ok(Periodogram {
        frequencies,
        ordinates,
        n,
        nyquist,
    })
}

impl Periodogram {
    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    /// Sample variance (divisor `N`) recovered from the ordinates:
    /// `(2 pi / N) (2 sum_j I_j + I_nyquist)`.
    pub fn parseval_variance(&self) -> f64 {
        let s: f64 = self.ordinates.iter().sum();
        2.0 * PI / self.n as f64 * (2.0 * s + self.nyquist.unwrap_or(0.0))
    }
}
