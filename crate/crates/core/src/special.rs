//! Scalar special functions and log-space accumulation helpers.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

/// `ln Γ(x)` for `x > 0` (Lanczos approximation, g = 607/128).
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma(x))
}

/// Unchecked `ln Γ(x)` for internal callers that already know `x > 0`.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    // exact small integers keep constants like Γ(1), Γ(2) free of rounding
    if x == x.floor() && x <= 30.0 {
        return ln_factorial(x as u64 - 1);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

fn ln_factorial(n: u64) -> f64 {
    let mut acc = 1.0f64;
    for k in 2..=n {
        acc *= k as f64;
    }
    acc.ln()
}

/// `ln B(a, b)` for positive arguments.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln (2m+1)!!`.
pub fn ln_double_factorial_odd(m: u32) -> f64 {
    (1..=m).map(|k| ((2 * k + 1) as f64).ln()).sum()
}

/// Sum of signed terms given as `(ln|t|, sign)`, evaluated relative to the
/// largest magnitude with Neumaier-compensated accumulation.
#[derive(Debug, Clone, Default)]
pub struct LogSum {
    terms: Vec<(f64, f64)>,
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `sign * exp(log_mag)`. Terms with `log_mag = -inf` are dropped.
    pub fn push(&mut self, log_mag: f64, sign: f64) {
        if sign != 0.0 && log_mag > f64::NEG_INFINITY {
            self.terms.push((log_mag, sign.signum()));
        }
    }

    pub fn value(&self) -> f64 {
        let Some(max) = self
            .terms
            .iter()
            .map(|t| t.0)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
        else {
            return 0.0;
        };
        let sum = neumaier_sum(self.terms.iter().map(|&(l, s)| s * (l - max).exp()));
        sum * max.exp()
    }
}

/// Compensated summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u64) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn log_gamma_closed_forms() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!((log_gamma(0.5).unwrap() - PI.sqrt().ln()).abs() < 1e-15);
        assert!((log_gamma(10.0).unwrap() - 362_880f64.ln()).abs() < 1e-14);
        assert!((log_gamma(10.0).unwrap() - 12.801_827_480_081_469_611).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_factorial_oracle() {
        for n in 2..=170u64 {
            let exact = factorial(n - 1).ln();
            let got = ln_gamma(n as f64);
            let err = (got - exact).abs() / exact.abs().max(1.0);
            assert!(err < 1e-14, "n={n} err={err}");
        }
    }

    #[test]
    fn log_gamma_half_integer_oracle() {
        // Γ(n + 1/2) = (2n)! √π / (4^n n!)
        for n in 0..=80u64 {
            let exact = factorial(2 * n).ln() + 0.5 * PI.ln()
                - (n as f64) * 4f64.ln()
                - factorial(n).ln();
            let got = ln_gamma(n as f64 + 0.5);
            let err = (got - exact).abs() / exact.abs().max(1.0);
            assert!(err < 1e-14, "n={n} err={err}");
        }
    }

    #[test]
    fn log_gamma_large_argument_recurrence() {
        // ln Γ(x+1) = ln x + ln Γ(x) across the whole range up to 1e4
        let mut x = 0.013;
        while x < 1e4 {
            let lhs = ln_gamma(x + 1.0);
            let rhs = x.ln() + ln_gamma(x);
            assert!((lhs - rhs).abs() <= 1e-14 * lhs.abs().max(1.0), "x={x}");
            x *= 1.37;
        }
    }

    #[test]
    fn log_gamma_rejects_non_positive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-2.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn logsum_handles_wide_range() {
        let mut s = LogSum::new();
        s.push(800.0, 1.0);
        s.push(800.0 + 2f64.ln(), -1.0);
        s.push(f64::NEG_INFINITY, 1.0);
        // e^800 - 2 e^800 overflows in linear space but not relative to the max
        let v = s.value();
        assert!(v.is_infinite() && v < 0.0);

        let mut s = LogSum::new();
        s.push(-700.0, 1.0);
        s.push(-700.0, 1.0);
        assert!((s.value() / (2.0 * (-700f64).exp()) - 1.0).abs() < 1e-14);
        assert_eq!(LogSum::new().value(), 0.0);
    }
}
