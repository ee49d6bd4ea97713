//! Modified Bessel functions of the first kind, `I_ν(z)` for `z ≥ 0` and
//! integer or half-integer order.

use crate::error::{Error, Result};
use crate::special::ln_gamma;
use std::f64::consts::PI;

/// `I_order(z)` for integer or half-integer `order` and `z ≥ 0`, by the
/// ascending power series.
pub fn bessel_i(order: f64, z: f64) -> Result<f64> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("bessel_i requires z >= 0, got {z}")));
    }
    let twice = 2.0 * order;
    if twice != twice.round() || !order.is_finite() {
        return Err(Error::unsupported(format!(
            "bessel_i supports integer and half-integer orders only, got {order}"
        )));
    }
    if order == order.round() {
        return Ok(bessel_i_int(order as i32, z));
    }
    Ok(series(order, z))
}

/// Integer-order `I_n(z)`; `I_{-n} = I_n`.
pub fn bessel_i_int(n: i32, z: f64) -> f64 {
    series(n.unsigned_abs() as f64, z)
}

/// Periodic trapezoid rule for `(1/π) ∫_0^π e^{z cos t} cos(nt) dt`.
///
/// The node count grows with `|n| + z`, beyond which the aliasing terms
/// `I_{K±n}(z)` are below double precision.
pub fn bessel_i_trapezoid(n: i32, z: f64) -> f64 {
    let n = n.unsigned_abs() as usize;
    let nodes = (2 * (n + z.ceil() as usize + 40)).max(64);
    let step = 2.0 * PI / nodes as f64;
    let sum: f64 = (0..nodes)
        .map(|j| {
            let t = j as f64 * step;
            (z * t.cos()).exp() * (n as f64 * t).cos()
        })
        .sum();
    sum / nodes as f64
}

fn gamma_signed(x: f64) -> (f64, f64) {
    if x > 0.0 {
        (ln_gamma(x), 1.0)
    } else {
        // Γ(x) = π / (sin(πx) Γ(1-x)) for non-integer x < 0
        let s = (PI * x).sin();
        (PI.ln() - s.abs().ln() - ln_gamma(1.0 - x), s.signum())
    }
}

fn series(order: f64, z: f64) -> f64 {
    if z == 0.0 {
        return if order == 0.0 {
            1.0
        } else if order > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let half = 0.5 * z;
    let (lg, sign) = gamma_signed(order + 1.0);
    let mut term = sign * (order * half.ln() - lg).exp();
    let q = half * half;
    let mut sum = term;
    let mut k = 0.0f64;
    loop {
        k += 1.0;
        term *= q / (k * (k + order));
        sum += term;
        if k > half && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        if k > 10_000.0 {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(3.0, 0.0).unwrap(), 0.0);
        // 30-term power series oracle (mpmath): I_1(1)
        assert!((bessel_i(1.0, 1.0).unwrap() - 0.565_159_103_992_485_027_2).abs() < 1e-15);
        assert!((bessel_i(0.0, 2.0).unwrap() - 2.279_585_302_336_067_267_4).abs() < 1e-14);
    }

    #[test]
    fn half_integer_closed_forms() {
        for z in [0.1, 1.0, 3.7, 12.0] {
            let pref = (2.0 / (PI * z)).sqrt();
            let rel = |a: f64, b: f64| (a / b - 1.0).abs();
            assert!(rel(bessel_i(-0.5, z).unwrap(), pref * z.cosh()) < 1e-13, "z={z}");
            assert!(rel(bessel_i(0.5, z).unwrap(), pref * z.sinh()) < 1e-13, "z={z}");
            let i32_ = pref * (z.cosh() - z.sinh() / z);
            assert!(rel(bessel_i(1.5, z).unwrap(), i32_) < 1e-12, "z={z}");
            let im32 = pref * (z.sinh() - z.cosh() / z);
            assert!(rel(bessel_i(-1.5, z).unwrap(), im32) < 1e-12, "z={z}");
        }
    }

    #[test]
    fn integer_symmetry() {
        for n in 0..6 {
            for z in [0.3, 2.0, 9.0] {
                assert_eq!(bessel_i(-(n as f64), z).unwrap(), bessel_i(n as f64, z).unwrap());
            }
        }
    }

    #[test]
    fn backends_agree() {
        for n in 0..=8 {
            for z in [0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0] {
                let a = bessel_i_int(n, z);
                let b = bessel_i_trapezoid(n, z);
                assert!((a - b).abs() <= 1e-11 * a.abs().max(1.0), "n={n} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn recurrence_holds() {
        // I_{n-1} - I_{n+1} = (2n/z) I_n
        for n in 1..10 {
            for z in [0.7, 4.0, 25.0, 40.0] {
                let lhs = bessel_i_int(n - 1, z) - bessel_i_int(n + 1, z);
                let rhs = 2.0 * n as f64 / z * bessel_i_int(n, z);
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs(), "n={n} z={z}");
            }
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(bessel_i(0.3, 1.0), Err(Error::Unsupported(_))));
        assert!(matches!(bessel_i(1.0, -1.0), Err(Error::Domain(_))));
    }
}
