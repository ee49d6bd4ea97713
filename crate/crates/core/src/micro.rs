//! Universal hard-edge limits of the smallest-eigenvalue distribution.
//!
//! `Q(y)` is the gap probability and `P(y) = -Q'(y)` its density in the
//! Wishart scaling `y = 4Nx` (or `4N³x` with fixed trace). The Dirac picture
//! uses `s = √y`, with `𝔓(s) = 2s P(s²)` and `𝔔(s) = Q(s²)`.

use crate::bessel::bessel_i_int;
use crate::edelman::wl_density;
use crate::ensemble::{Beta, EnsembleParams};
use crate::error::{Error, Result};
use crate::ftwl::ftwl_density_unit;
use crate::linalg::{determinant, pfaffian, SkewMatrix};
use crate::quad::{adaptive, QuadOptions};
use crate::special::{ln_double_factorial_odd, ln_gamma};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Below this `y` the β = 1 Pfaffian formulas return their `y → 0` limit.
const SMALL_Y: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Picture {
    /// Wishart variable `y`.
    Y,
    /// Dirac variable `s = √y`.
    S,
}

/// A supported `(β, ν)` pair together with the variable it is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroDist {
    pub beta: Beta,
    pub nu: u32,
    pub picture: Picture,
}

impl MicroDist {
    pub fn new(beta: Beta, nu: u32, picture: Picture) -> Result<Self> {
        check_supported(beta, nu)?;
        Ok(Self { beta, nu, picture })
    }

    /// Gap probability in this picture.
    pub fn q(&self, arg: f64) -> Result<f64> {
        match self.picture {
            Picture::Y => micro_q(self.beta, self.nu, arg),
            Picture::S => micro_q(self.beta, self.nu, arg * arg),
        }
    }

    /// Density in this picture.
    pub fn p(&self, arg: f64) -> Result<f64> {
        match self.picture {
            Picture::Y => micro_p(self.beta, self.nu, arg),
            Picture::S => {
                if arg == 0.0 {
                    return Ok(dirac_density_at_zero(self.beta, self.nu));
                }
                Ok(2.0 * arg * micro_p(self.beta, self.nu, arg * arg)?)
            }
        }
    }
}

/// Re-expresses a distribution in the Dirac picture.
pub fn dirac_map(dist: MicroDist) -> MicroDist {
    MicroDist {
        picture: Picture::S,
        ..dist
    }
}

fn dirac_density_at_zero(beta: Beta, nu: u32) -> f64 {
    // 2s P(s²) at s = 0: only ν = 0, β = 1 has P ~ y^{-1/2}
    match (beta, nu) {
        (Beta::One, 0) => 0.5,
        _ => 0.0,
    }
}

fn check_supported(beta: Beta, nu: u32) -> Result<()> {
    if beta == Beta::One && nu % 2 == 0 && nu > 2 {
        return Err(Error::unsupported(format!(
            "no closed hard-edge formula for beta = 1 with even nu = {nu}; \
             only nu = 0 and nu = 2 are known"
        )));
    }
    Ok(())
}

fn check_y(y: f64) -> Result<()> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::domain(format!("microscopic variable must be >= 0, got {y}")));
    }
    Ok(())
}

/// `det[I_{i-j+shift}(√y)]_{i,j=1..ν}`.
fn bessel_det(nu: u32, shift: i32, y: f64) -> Result<f64> {
    let s = y.sqrt();
    let n = nu as usize;
    let m = DMatrix::from_fn(n, n, |i, j| bessel_i_int(i as i32 - j as i32 + shift, s));
    determinant(&m)
}

/// Skew matrix `[(j-k) I_{shift+j+k}(√y)]` over the half-integer grid
/// `j, k ∈ {-m+1/2, …, m-1/2}` in ascending order.
pub fn bessel_skew_matrix(m: u32, shift: i32, y: f64) -> Result<SkewMatrix> {
    let s = y.sqrt();
    let order = 2 * m as usize;
    // index i stands for j = i - m + 1/2, so j + k = i1 + i2 - 2m + 1 and j - k = i1 - i2
    SkewMatrix::from_upper(order, |a, b| {
        let diff = a as f64 - b as f64;
        let total = a as i32 + b as i32 - 2 * m as i32 + 1;
        diff * bessel_i_int(shift + total, s)
    })
}

/// Sign that makes the ascending-order Pfaffian of the β = 1 gap
/// probability positive, so that `Q(0⁺) = 1`.
fn pfaffian_sign(m: u32) -> f64 {
    if m % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `Q_ν^{(β)}(y)`.
pub fn micro_q(beta: Beta, nu: u32, y: f64) -> Result<f64> {
    check_supported(beta, nu)?;
    check_y(y)?;
    match beta {
        Beta::Two => Ok(((-0.25 * y).exp() * bessel_det(nu, 0, y)?).clamp(0.0, 1.0)),
        Beta::One if nu % 2 == 1 => {
            let m = (nu - 1) / 2;
            if m == 0 {
                return Ok((-y / 8.0).exp());
            }
            if y < SMALL_Y {
                return Ok(1.0);
            }
            let pf = pfaffian(&bessel_skew_matrix(m, 1, y)?);
            let ln = m as f64 * (2f64.ln() - 0.5 * y.ln()) - y / 8.0;
            Ok((pfaffian_sign(m) * pf * ln.exp()).clamp(0.0, 1.0))
        }
        Beta::One => {
            let s = y.sqrt();
            let damp = (-y / 8.0 - 0.5 * s).exp();
            Ok(match nu {
                0 => damp,
                _ => ((bessel_i_int(0, s) + bessel_i_int(1, s)) * damp).min(1.0),
            })
        }
    }
}

/// `C_m = √π (2m+1)!! / (16 Γ(m+3/2))`.
pub fn pfaffian_density_constant(m: u32) -> f64 {
    (0.5 * std::f64::consts::PI.ln() + ln_double_factorial_odd(m) - 16f64.ln() - ln_gamma(m as f64 + 1.5)).exp()
}

/// `P_ν^{(β)}(y) = -Q'(y)`. For `β = 1, ν = 0` the density diverges like
/// `y^{-1/2}` and `y = 0` returns infinity.
pub fn micro_p(beta: Beta, nu: u32, y: f64) -> Result<f64> {
    check_supported(beta, nu)?;
    check_y(y)?;
    match beta {
        Beta::Two => Ok(0.25 * (-0.25 * y).exp() * bessel_det(nu, 2, y)?),
        Beta::One if nu % 2 == 1 => {
            let m = (nu - 1) / 2;
            let c = pfaffian_density_constant(m);
            if m == 0 {
                return Ok(c * (-y / 8.0).exp());
            }
            if y < SMALL_Y {
                return Ok(0.0);
            }
            let pf = pfaffian(&bessel_skew_matrix(m, 3, y)?);
            // for large m and tiny y the Pfaffian is at rounding level; keep the sign physical
            Ok((pfaffian_sign(m) * c * pf * (-0.5 * m as f64 * y.ln() - y / 8.0).exp()).max(0.0))
        }
        Beta::One => {
            if y == 0.0 {
                return Ok(if nu == 0 { f64::INFINITY } else { 0.0 });
            }
            let s = y.sqrt();
            let damp = (-y / 8.0 - 0.5 * s).exp();
            Ok(match nu {
                0 => 0.125 * (1.0 + 2.0 / s) * damp,
                _ => 0.125 * ((1.0 + 2.0 / s) * bessel_i_int(2, s) + bessel_i_int(3, s)) * damp,
            })
        }
    }
}

/// `Q` for `m = 1`, valid for `ν = 4/β - 1`:
/// `2^{-1+2/β} Γ(2/β) e^{-βy/8} y^{1/2-1/β} I_{2/β-1}(√y)`.
pub fn q_special_m1(beta: Beta, y: f64) -> Result<f64> {
    check_y(y)?;
    let b = beta.value();
    let order = 2.0 / b - 1.0;
    if y == 0.0 {
        return Ok(1.0);
    }
    let i = crate::bessel::bessel_i(order, y.sqrt())?;
    Ok(((2.0 / b - 1.0) * 2f64.ln() + ln_gamma(2.0 / b) - b * y / 8.0 + (0.5 - 1.0 / b) * y.ln()).exp() * i)
}

/// `Q_2^{(2)}(y) = e^{-y/4}(I_0(√y)² - I_1(√y)²)`.
pub fn q_special_beta2_nu2(y: f64) -> Result<f64> {
    check_y(y)?;
    let s = y.sqrt();
    let (i0, i1) = (bessel_i_int(0, s), bessel_i_int(1, s));
    Ok((-0.25 * y).exp() * (i0 * i0 - i1 * i1))
}

/// `κ_{ℓ,ν,β} = ∫_0^∞ s^{2ℓ} 𝔓(s) ds`, integrated up to the point where the
/// integrand has fallen below `1e-18` of its peak.
pub fn kappa(ell: u32, nu: u32, beta: Beta) -> Result<f64> {
    let dist = MicroDist::new(beta, nu, Picture::S)?;
    let f = |s: f64| -> f64 {
        if s == 0.0 {
            return if ell == 0 { dirac_density_at_zero(beta, nu) } else { 0.0 };
        }
        s.powi(2 * ell as i32) * dist.p(s).unwrap_or(f64::NAN)
    };
    let step = 0.25;
    let mut peak = 0.0f64;
    let mut s = step;
    let mut cutoff = None;
    while s < 400.0 {
        let v = f(s);
        if v.is_nan() {
            dist.p(s)?;
        }
        peak = peak.max(v.abs());
        if peak > 0.0 && v.abs() < 1e-18 * peak && s > 1.0 {
            cutoff = Some(s);
            break;
        }
        s += step;
    }
    let top = cutoff.ok_or_else(|| Error::Quadrature("kappa integrand does not decay".into()))?;
    let opts = QuadOptions::with_rel_tol(1e-13).with_abs_tol(0.0);
    adaptive(f, 0.0, top, &opts).require("kappa")
}

/// `κ_{ℓ,0,2} = 4^ℓ Γ(1+ℓ)`.
pub fn kappa_beta2_nu0(ell: u32) -> f64 {
    4f64.powi(ell as i32) * (ln_gamma(1.0 + ell as f64)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_dim: u32,
    /// `sup_y |p^{FT}(y/4N³)/(4N³) - P(y)|`.
    pub ft_gap: f64,
    /// `sup_y |p^{WL}(y/4N)/(4N) - P(y)|`.
    pub wl_gap: f64,
}

/// Sup-norm distance between the scaled finite-N densities (both ensembles)
/// and the `β = 1` hard-edge limit, for each `N` in `n_list`.
pub fn convergence_probe(nu: u32, n_list: &[u32], y_grid: &[f64]) -> Result<Vec<ConvergenceRow>> {
    if nu != 0 && nu != 2 {
        return Err(Error::unsupported("convergence probe covers beta = 1, nu in {0, 2}"));
    }
    if y_grid.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::domain("convergence probe needs y > 0"));
    }
    n_list
        .iter()
        .map(|&n| {
            let ft = EnsembleParams::ft(n, nu, Beta::One)?;
            let wl = EnsembleParams::wl(n, nu, Beta::One)?;
            let nf = n as f64;
            let gaps = y_grid
                .par_iter()
                .map(|&y| {
                    let limit = micro_p(Beta::One, nu, y)?;
                    let sf = 4.0 * nf * nf * nf;
                    let ft_scaled = ftwl_density_unit(&ft, y / sf)? / sf;
                    let wl_scaled = wl_density(&wl, y / (4.0 * nf))? / (4.0 * nf);
                    Ok(((ft_scaled - limit).abs(), (wl_scaled - limit).abs()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ConvergenceRow {
                n_dim: n,
                ft_gap: gaps.iter().map(|g| g.0).fold(0.0, f64::max),
                wl_gap: gaps.iter().map(|g| g.1).fold(0.0, f64::max),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::semi_infinite;

    fn supported() -> Vec<(Beta, u32)> {
        let mut v: Vec<(Beta, u32)> = (0..=5).map(|nu| (Beta::Two, nu)).collect();
        v.extend([0, 1, 2, 3, 5, 7, 9].map(|nu| (Beta::One, nu)));
        v
    }

    #[test]
    fn gap_probability_starts_at_one() {
        for (beta, nu) in supported() {
            assert_eq!(micro_q(beta, nu, 0.0).unwrap(), 1.0, "beta={beta:?} nu={nu}");
            let q = micro_q(beta, nu, 1e-12).unwrap();
            assert!(q <= 1.0 && q > 1.0 - 1e-5, "beta={beta:?} nu={nu}: {q}");
        }
    }

    #[test]
    fn pfaffian_sign_is_stable() {
        for m in 1..=6 {
            for y in [1e-6, 0.01, 1.0, 10.0, 40.0] {
                let q = pfaffian(&bessel_skew_matrix(m, 1, y).unwrap()) * pfaffian_sign(m);
                assert!(q > 0.0, "m={m} y={y}");
            }
            for y in [1.0, 10.0, 40.0] {
                let p = pfaffian(&bessel_skew_matrix(m, 3, y).unwrap()) * pfaffian_sign(m);
                assert!(p > 0.0, "m={m} y={y}");
            }
        }
    }

    #[test]
    fn skew_matrices_are_exactly_antisymmetric_and_square_to_det() {
        for m in 1..=4 {
            let s = bessel_skew_matrix(m, 1, 3.7).unwrap();
            let e = s.entries();
            assert!(SkewMatrix::new(e.clone()).is_ok());
            let pf = pfaffian(&s);
            let det = determinant(e).unwrap();
            assert!((pf * pf / det - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn reference_values() {
        // mpmath values
        let q = micro_q(Beta::Two, 2, 1.0).unwrap();
        assert!((q - 0.999_604_818_799_712_2).abs() < 1e-13, "{q}");
        assert!((micro_p(Beta::One, 0, 4.0).unwrap() - 0.25 * (-1.5f64).exp()).abs() < 1e-15);
        assert!((micro_p(Beta::One, 0, 4.0).unwrap() - 0.055_782_540_037_107_5).abs() < 1e-13);
        assert!((micro_q(Beta::One, 3, 4.0).unwrap() - 0.964_770_020_806_407).abs() < 1e-13);
        for (y, v) in [(1.0, 0.980_184_099_668_219), (4.0, 0.863_563_289_695_475), (9.0, 0.639_944_607_069_729)] {
            assert!((micro_q(Beta::One, 2, y).unwrap() - v).abs() < 1e-13);
        }
        assert!((pfaffian_density_constant(0) - 0.125).abs() < 1e-16);
        assert!((pfaffian_density_constant(1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn special_cases() {
        for y in [0.5, 1.0, 4.0, 16.0, 25.0] {
            let a = q_special_m1(Beta::Two, y).unwrap();
            assert!((a - micro_q(Beta::Two, 1, y).unwrap()).abs() < 1e-10);
            let b = q_special_m1(Beta::One, y).unwrap();
            assert!((b - micro_q(Beta::One, 3, y).unwrap()).abs() < 1e-10);
            let c = q_special_beta2_nu2(y).unwrap();
            assert!((c - micro_q(Beta::Two, 2, y).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn density_is_minus_derivative() {
        for (beta, nu) in supported() {
            let mut y = 0.5;
            while y <= 25.0 {
                let h = 1e-5;
                let d = -(micro_q(beta, nu, y + h).unwrap() - micro_q(beta, nu, y - h).unwrap()) / (2.0 * h);
                let p = micro_p(beta, nu, y).unwrap();
                assert!((d - p).abs() < 1e-6, "beta={beta:?} nu={nu} y={y}: {d} {p}");
                y += 0.5;
            }
        }
    }

    #[test]
    fn densities_normalised() {
        let opts = QuadOptions::with_rel_tol(1e-12);
        for (beta, nu) in supported() {
            let d = MicroDist::new(beta, nu, Picture::S).unwrap();
            let total = semi_infinite(|s| d.p(s).unwrap(), 0.0, &opts).value;
            assert!((total - 1.0).abs() < 1e-8, "beta={beta:?} nu={nu}: {total}");
        }
    }

    #[test]
    fn dirac_picture() {
        let d = dirac_map(MicroDist::new(Beta::One, 0, Picture::Y).unwrap());
        assert_eq!(d.picture, Picture::S);
        assert_eq!(d.p(0.0).unwrap(), 0.5);
        for s in [0.3f64, 1.0, 2.5, 6.0] {
            let e = (-s * s / 8.0 - s / 2.0).exp();
            assert!((d.p(s).unwrap() - 0.25 * (2.0 + s) * e).abs() < 1e-14);
            let d2 = MicroDist::new(Beta::One, 2, Picture::S).unwrap();
            let expected = 0.25 * ((2.0 + s) * bessel_i_int(2, s) + s * bessel_i_int(3, s)) * e;
            assert!((d2.p(s).unwrap() - expected).abs() < 1e-14);
            assert_eq!(d.q(s).unwrap(), micro_q(Beta::One, 0, s * s).unwrap());
        }
    }

    #[test]
    fn kappa_values() {
        assert!((kappa(1, 0, Beta::Two).unwrap() / 4.0 - 1.0).abs() < 1e-9);
        for ell in 1..=4 {
            let k = kappa(ell, 0, Beta::Two).unwrap();
            assert!((k / kappa_beta2_nu0(ell) - 1.0).abs() < 1e-10);
        }
        assert!((kappa(1, 0, Beta::One).unwrap() / 4.0 - 0.688_640_915_162_403).abs() < 1e-10);
        assert!((kappa(1, 1, Beta::One).unwrap() / 4.0 - 2.0).abs() < 1e-10);
        let e2 = std::f64::consts::E.powi(2) - 1.0;
        assert!((kappa(1, 3, Beta::One).unwrap() / 4.0 - e2).abs() < 1e-9);
        assert!((kappa(1, 2, Beta::One).unwrap() - 15.622_162_725_476_879).abs() < 1e-8);
    }

    #[test]
    fn unsupported_even_nu() {
        assert!(matches!(micro_q(Beta::One, 4, 1.0), Err(Error::Unsupported(_))));
        assert!(MicroDist::new(Beta::One, 6, Picture::Y).is_err());
        assert!(micro_q(Beta::Two, 1, -1.0).is_err());
    }
}
