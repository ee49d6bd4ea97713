//! Edelman's polynomial representation of the smallest-eigenvalue density of
//! real (`β = 1`) Wishart-Laguerre matrices.
//!
//! For odd `ν` the density is `x^{(ν-1)/2} e^{-Nx/2} h_{N,ν}(x)` up to a
//! constant; for even `ν` the polynomial is replaced by `f 𝒰₁ + g 𝒰₂` with
//! Tricomi functions `𝒰₁(x) = U((N-1)/2, -1/2, x/2)` and `𝒰₂ = 𝒰₁'`.

use crate::ensemble::{Beta, EnsembleKind, EnsembleParams};
use crate::error::{Error, Result};
use crate::quad::{adaptive, semi_infinite, QuadOptions};
use crate::rational::{Rational, RationalPoly};
use crate::special::{ln_gamma, LogSum};
use num_bigint::BigInt;
use std::f64::consts::{LN_2, PI};

/// Exact coefficients of `L_n^{(α)}(x)`, or of `L_n^{(α)}(-x)` when
/// `negate_arg` is set, from the three-term recurrence.
pub fn laguerre_poly(n: u32, alpha: i64, negate_arg: bool) -> RationalPoly {
    let mut prev = RationalPoly::from_integers(&[1]);
    if n > 0 {
        let mut cur = RationalPoly::from_integers(&[1 + alpha, -1]);
        for k in 1..n as i64 {
            // (k+1) L_{k+1} = (2k+1+α-x) L_k - (k+α) L_{k-1}
            let lin = cur
                .scale(&Rational::from_integer(2 * k + 1 + alpha))
                .add(&cur.shift_up().scale(&Rational::from_integer(-1)));
            let next = lin
                .add(&prev.scale(&Rational::from_integer(-(k + alpha))))
                .scale(&Rational::new(1, k + 1).expect("nonzero"));
            prev = cur;
            cur = next;
        }
        prev = cur;
    }
    if negate_arg {
        prev.negate_arg()
    } else {
        prev
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdelmanPolys {
    /// Odd `ν`: the single polynomial `h_{N,ν}`.
    OddH { h: RationalPoly },
    /// Even `ν`: the pair `f_{N,ν}`, `g_{N,ν}`.
    EvenFG { f: RationalPoly, g: RationalPoly },
}

/// Coefficient set for one `(N, ν)`. The polynomials are exact; an optional
/// real factor `scale_sign · e^{ln_scale}` multiplies all of them, for
/// providers whose prefactors are not rational.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub n_dim: u32,
    pub nu: u32,
    pub polys: EdelmanPolys,
    pub ln_scale: f64,
    pub scale_sign: f64,
}

impl CoefficientSet {
    pub fn odd(n_dim: u32, nu: u32, h: RationalPoly) -> Result<Self> {
        if nu % 2 == 0 {
            return Err(Error::InvalidParams(format!("h-polynomial needs odd nu, got {nu}")));
        }
        let bound = ((n_dim - 1) * (nu - 1) / 2) as usize;
        if h.degree().is_some_and(|d| d > bound) {
            return Err(Error::InvalidParams(format!("deg h exceeds {bound}")));
        }
        Ok(Self {
            n_dim,
            nu,
            polys: EdelmanPolys::OddH { h },
            ln_scale: 0.0,
            scale_sign: 1.0,
        })
    }

    pub fn even(n_dim: u32, nu: u32, f: RationalPoly, g: RationalPoly) -> Result<Self> {
        if nu % 2 == 1 {
            return Err(Error::InvalidParams(format!("f,g-polynomials need even nu, got {nu}")));
        }
        let bound = (nu * (n_dim - 1) / 2) as usize;
        if f.degree().is_some_and(|d| d > bound) || g.degree().is_some_and(|d| d > bound) {
            return Err(Error::InvalidParams(format!("deg f or deg g exceeds {bound}")));
        }
        Ok(Self {
            n_dim,
            nu,
            polys: EdelmanPolys::EvenFG { f, g },
            ln_scale: 0.0,
            scale_sign: 1.0,
        })
    }

    /// Attaches the real prefactor `sign · e^{ln_mag}`.
    pub fn with_scale(mut self, ln_mag: f64, sign: f64) -> Self {
        self.ln_scale = ln_mag;
        self.scale_sign = sign.signum();
        self
    }

    pub fn h(&self) -> Option<&RationalPoly> {
        match &self.polys {
            EdelmanPolys::OddH { h } => Some(h),
            EdelmanPolys::EvenFG { .. } => None,
        }
    }

    pub fn f(&self) -> Option<&RationalPoly> {
        match &self.polys {
            EdelmanPolys::EvenFG { f, .. } => Some(f),
            EdelmanPolys::OddH { .. } => None,
        }
    }

    pub fn g(&self) -> Option<&RationalPoly> {
        match &self.polys {
            EdelmanPolys::EvenFG { g, .. } => Some(g),
            EdelmanPolys::OddH { .. } => None,
        }
    }

    /// `(ln|c_k|, sign c_k)` for every coefficient of `poly`, with the set's
    /// scale folded in. Zero coefficients come back as `-inf`.
    pub fn scaled_terms(&self, poly: &RationalPoly) -> Vec<(f64, f64)> {
        poly.coeffs()
            .iter()
            .map(|c| (c.ln_abs() + self.ln_scale, c.signum() * self.scale_sign))
            .collect()
    }

    /// Evaluates `scale · poly(x)` for `x > 0` in log space.
    pub fn eval_scaled(&self, poly: &RationalPoly, x: f64) -> f64 {
        let lx = x.ln();
        let mut acc = LogSum::new();
        for (k, (lc, s)) in self.scaled_terms(poly).into_iter().enumerate() {
            acc.push(lc + k as f64 * lx, s);
        }
        acc.value()
    }
}

/// Source of Edelman coefficient sets. Closures `Fn(N, ν) -> Result<_>`
/// implement it, so a recursion for higher `ν` can be plugged in directly.
pub trait CoefficientProvider: Send + Sync {
    fn coefficients(&self, n_dim: u32, nu: u32) -> Result<CoefficientSet>;
}

impl<F> CoefficientProvider for F
where
    F: Fn(u32, u32) -> Result<CoefficientSet> + Send + Sync,
{
    fn coefficients(&self, n_dim: u32, nu: u32) -> Result<CoefficientSet> {
        self(n_dim, nu)
    }
}

/// Closed forms for `ν ∈ {0, 1, 2, 3}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedFormProvider;

impl CoefficientProvider for ClosedFormProvider {
    fn coefficients(&self, n_dim: u32, nu: u32) -> Result<CoefficientSet> {
        coefficients(n_dim, nu)
    }
}

fn factorial(n: u32) -> Rational {
    Rational::from_bigint((1..=n).fold(BigInt::from(1), |acc, k| acc * BigInt::from(k)))
}

/// Closed-form coefficient sets for `ν ≤ 3`. All Gamma-function prefactors
/// reduce to integers here:
///
/// * `h_{N,1} = 1`, `h_{N,3} = (N-1)! L_{N-1}^{(3)}(-x)`;
/// * `f_{N,0} = 1`, `g_{N,0} = 0`;
/// * `f_{N,2} = (N-1)! L_{N-1}^{(2)}(-x)`, `g_{N,2} = -2 (N-2)! x L_{N-2}^{(3)}(-x)`.
pub fn coefficients(n_dim: u32, nu: u32) -> Result<CoefficientSet> {
    if n_dim == 0 {
        return Err(Error::InvalidParams("N must be positive".into()));
    }
    let one = RationalPoly::from_integers(&[1]);
    match nu {
        0 => CoefficientSet::even(n_dim, 0, one, RationalPoly::zero()),
        1 => CoefficientSet::odd(n_dim, 1, one),
        2 => {
            let f = laguerre_poly(n_dim - 1, 2, true).scale(&factorial(n_dim - 1));
            let g = if n_dim == 1 {
                RationalPoly::zero()
            } else {
                laguerre_poly(n_dim - 2, 3, true)
                    .shift_up()
                    .scale(&(factorial(n_dim - 2) * Rational::from_integer(-2)))
            };
            CoefficientSet::even(n_dim, 2, f, g)
        }
        3 => {
            let h = laguerre_poly(n_dim - 1, 3, true).scale(&factorial(n_dim - 1));
            CoefficientSet::odd(n_dim, 3, h)
        }
        _ => Err(Error::unsupported(format!(
            "closed-form Edelman coefficients exist for nu <= 3 only (nu = {nu}); \
             supply higher orders through a CoefficientProvider"
        ))),
    }
}

/// `ln c_{N,ν}` with
/// `c = N 2^{-Nν/2} Γ((N+1)/2)/√π Π_{j=1}^{ν} Γ(j/2)/Γ((N+j)/2)`.
pub fn c_constant_log(n_dim: u32, nu: u32) -> f64 {
    let n = n_dim as f64;
    let mut acc = n.ln() - 0.5 * n * nu as f64 * LN_2 + ln_gamma(0.5 * (n + 1.0)) - 0.5 * PI.ln();
    for j in 1..=nu {
        let j = j as f64;
        acc += ln_gamma(0.5 * j) - ln_gamma(0.5 * (n + j));
    }
    acc
}

/// Tricomi `U(a, b, z) = Γ(a)^{-1} ∫_0^∞ e^{-zτ} τ^{a-1} (1+τ)^{b-a-1} dτ`
/// for `a > 0`, `z > 0`.
pub fn tricomi_u(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("tricomi_u requires z > 0, got {z}")));
    }
    if !(a > 0.0) {
        return Err(Error::domain(format!("tricomi_u requires a > 0, got {a}")));
    }
    let lg = ln_gamma(a);
    let log_integrand = |tau: f64| -z * tau + (a - 1.0) * tau.ln() + (b - a - 1.0) * tau.ln_1p() - lg;
    // τ = u/(1-u), and u = v² on top of that when τ^{a-1} is singular
    let square = a < 1.0;
    let f = |v: f64| {
        let (u, du) = if square { (v * v, 2.0 * v) } else { (v, 1.0) };
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - u;
        let tau = u / one_minus;
        let w = (log_integrand(tau)).exp() * du / (one_minus * one_minus);
        if w.is_finite() {
            w
        } else {
            0.0
        }
    };
    let opts = QuadOptions::with_rel_tol(1e-12).with_abs_tol(0.0);
    adaptive(f, 0.0, 1.0, &opts).require("tricomi_u")
}

/// `𝒰₁(x) = U((N-1)/2, -1/2, x/2)`; `U(0, b, z) = 1` covers `N = 1`.
pub fn tricomi_u1(n_dim: u32, x: f64) -> Result<f64> {
    if n_dim == 1 {
        return Ok(1.0);
    }
    tricomi_u(0.5 * (n_dim as f64 - 1.0), -0.5, 0.5 * x)
}

/// `𝒰₂(x) = -(N-1)/4 · U((N+1)/2, 1/2, x/2) = 𝒰₁'(x)`.
pub fn tricomi_u2(n_dim: u32, x: f64) -> Result<f64> {
    if n_dim == 1 {
        return Ok(0.0);
    }
    let n = n_dim as f64;
    Ok(-0.25 * (n - 1.0) * tricomi_u(0.5 * (n + 1.0), 0.5, 0.5 * x)?)
}

/// Smallest-eigenvalue density of the real Wishart-Laguerre ensemble with the
/// closed-form coefficient sets.
pub fn wl_density(p: &EnsembleParams, x: f64) -> Result<f64> {
    wl_density_with(&ClosedFormProvider, p, x)
}

pub fn wl_density_with(provider: &dyn CoefficientProvider, p: &EnsembleParams, x: f64) -> Result<f64> {
    check_wl_params(p)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("wl_density requires x > 0, got {x}")));
    }
    let set = provider.coefficients(p.n_dim, p.nu())?;
    let n = p.n_dim as f64;
    let nu = p.nu() as f64;
    let ln_front = c_constant_log(p.n_dim, p.nu()) + 0.5 * (nu - 1.0) * x.ln() - 0.5 * n * x;
    match &set.polys {
        EdelmanPolys::OddH { h } => {
            let poly = set.eval_scaled(h, x);
            Ok(poly * ((0.5 * n - 1.0) * LN_2 + ln_front).exp())
        }
        EdelmanPolys::EvenFG { f, g } => {
            let mut bracket = set.eval_scaled(f, x) * tricomi_u1(p.n_dim, x)?;
            if !g.is_zero() {
                bracket += set.eval_scaled(g, x) * tricomi_u2(p.n_dim, x)?;
            }
            Ok(bracket * (-0.5 * LN_2 + ln_front).exp())
        }
    }
}

/// Gap probability `Prob[λ_min > x]` of the real Wishart-Laguerre ensemble.
/// Small `x` integrates the density over `[0, x]` in `u = √x`; larger `x`
/// integrates the tail.
pub fn wl_gap_probability(p: &EnsembleParams, x: f64) -> Result<f64> {
    check_wl_params(p)?;
    if !(x >= 0.0) || x.is_nan() {
        return Err(Error::domain(format!("gap probability needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let f = |u: f64| if u == 0.0 { 0.0 } else { 2.0 * u * wl_density(p, u * u).unwrap_or(f64::NAN) };
    let opts = QuadOptions::with_rel_tol(1e-11).with_abs_tol(1e-15);
    let r = if p.n_dim as f64 * x < 1.0 {
        1.0 - adaptive(f, 0.0, x.sqrt(), &opts).require("wl gap head")?
    } else {
        semi_infinite(f, x.sqrt(), &opts).require("wl gap tail")?
    };
    if r.is_nan() {
        wl_density(p, x)?;
    }
    Ok(r.clamp(0.0, 1.0))
}

fn check_wl_params(p: &EnsembleParams) -> Result<()> {
    if p.beta != Beta::One {
        return Err(Error::unsupported("finite-N Wishart-Laguerre densities are implemented for beta = 1"));
    }
    if p.kind != EnsembleKind::Wl {
        return Err(Error::InvalidParams("wl_density expects the WL ensemble kind".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn laguerre_examples() {
        assert_eq!(laguerre_poly(1, 3, true), RationalPoly::from_integers(&[4, 1]));
        assert_eq!(laguerre_poly(0, 7, false), RationalPoly::from_integers(&[1]));
        assert_eq!(
            laguerre_poly(2, 0, false),
            RationalPoly::new(vec![r(1, 1), r(-2, 1), r(1, 2)])
        );
        // L_3^{(1)}(x) = 4 - 6x + 2x² - x³/6
        assert_eq!(
            laguerre_poly(3, 1, false),
            RationalPoly::new(vec![r(4, 1), r(-6, 1), r(2, 1), r(-1, 6)])
        );
    }

    #[test]
    fn negated_laguerre_has_positive_coefficients() {
        for n in 0..15 {
            for alpha in 0..5 {
                let p = laguerre_poly(n, alpha, true);
                assert_eq!(p.degree(), Some(n as usize));
                assert!(p.coeffs().iter().all(|c| c.signum() > 0.0));
            }
        }
    }

    #[test]
    fn closed_form_sets() {
        assert_eq!(coefficients(5, 1).unwrap().h(), Some(&RationalPoly::from_integers(&[1])));
        assert_eq!(coefficients(2, 3).unwrap().h(), Some(&RationalPoly::from_integers(&[4, 1])));
        let s0 = coefficients(4, 0).unwrap();
        assert_eq!(s0.f(), Some(&RationalPoly::from_integers(&[1])));
        assert!(s0.g().unwrap().is_zero());
        // N = 2, ν = 2: f = L_1^{(2)}(-x) = 3 + x, g = -2x
        let s2 = coefficients(2, 2).unwrap();
        assert_eq!(s2.f(), Some(&RationalPoly::from_integers(&[3, 1])));
        assert_eq!(s2.g(), Some(&RationalPoly::from_integers(&[0, -2])));
        assert!(coefficients(1, 2).unwrap().g().unwrap().is_zero());
        assert!(matches!(coefficients(3, 4), Err(Error::Unsupported(_))));
    }

    #[test]
    fn degree_bounds_hold() {
        for n in 1..=20 {
            for nu in 0..=3 {
                let s = coefficients(n, nu).unwrap();
                match &s.polys {
                    EdelmanPolys::OddH { h } => {
                        assert!(h.degree().unwrap_or(0) as u32 <= (n - 1) * (nu - 1) / 2);
                    }
                    EdelmanPolys::EvenFG { f, g } => {
                        let bound = nu * (n - 1) / 2;
                        assert!(f.degree().unwrap_or(0) as u32 <= bound);
                        assert!(g.degree().unwrap_or(0) as u32 <= bound);
                    }
                }
            }
        }
        let too_big = RationalPoly::from_integers(&[1, 1, 1]);
        assert!(CoefficientSet::odd(2, 3, too_big).is_err());
    }

    #[test]
    fn c_constant_examples() {
        assert!((c_constant_log(1, 1) + 0.5 * LN_2).abs() < 1e-15);
        assert!(c_constant_log(2, 0).abs() < 1e-15);
        for n in 1..40 {
            for nu in 0..6 {
                assert!(c_constant_log(n, nu).is_finite());
            }
        }
    }

    #[test]
    fn tricomi_values() {
        assert!((tricomi_u(1.0, 0.0, 1e-8).unwrap() - 1.0).abs() < 1e-6);
        // mpmath.hyperu(1, 1, 1)
        assert!((tricomi_u(1.0, 1.0, 1.0).unwrap() - 0.596_347_362_323_194).abs() < 1e-12);
        // U(a, a+1, z) = z^{-a}
        assert!((tricomi_u(0.5, 1.5, 2.0).unwrap() - 2f64.powf(-0.5)).abs() < 1e-12);
        assert!((tricomi_u(3.5, 4.5, 0.7).unwrap() / 0.7f64.powf(-3.5) - 1.0).abs() < 1e-11);
        assert!(tricomi_u(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn u2_is_derivative_of_u1() {
        for n in [2, 3, 6] {
            for x in [1.0, 4.0, 9.0] {
                let h = 1e-4;
                let fd = (tricomi_u1(n, x + h).unwrap() - tricomi_u1(n, x - h).unwrap()) / (2.0 * h);
                let u2 = tricomi_u2(n, x).unwrap();
                assert!((fd - u2).abs() < 1e-6, "N={n} x={x}: {fd} vs {u2}");
            }
        }
    }

    #[test]
    fn nu1_density_is_pure_exponential() {
        for n in [1, 3, 8] {
            let p = EnsembleParams::wl(n, 1, Beta::One).unwrap();
            let base = wl_density(&p, 0.3).unwrap() / (-0.15 * n as f64).exp();
            for x in [0.01, 1.0, 5.0, 20.0] {
                let ratio = wl_density(&p, x).unwrap() / (-0.5 * n as f64 * x).exp();
                assert!((ratio / base - 1.0).abs() < 1e-12);
            }
        }
        let p = EnsembleParams::wl(1, 1, Beta::One).unwrap();
        assert!((wl_density(&p, 2.0).unwrap() - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn wl_density_normalised() {
        let opts = QuadOptions::with_rel_tol(1e-11);
        for nu in 0..=3 {
            for n in [1, 2, 3, 5] {
                let p = EnsembleParams::wl(n, nu, Beta::One).unwrap();
                let total = semi_infinite(|v| 2.0 * v * wl_density(&p, v * v).unwrap_or(0.0), 0.0, &opts)
                    .value;
                assert!((total - 1.0).abs() < 1e-8, "N={n} nu={nu}: {total}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let p = EnsembleParams::wl(2, 1, Beta::One).unwrap();
        assert!(wl_density(&p, 0.0).is_err());
        assert!(wl_density(&p.with_kind(EnsembleKind::Ft), 0.1).is_err());
        let p2 = EnsembleParams::wl(2, 1, Beta::Two).unwrap();
        assert!(matches!(wl_density(&p2, 0.1), Err(Error::Unsupported(_))));
        let p4 = EnsembleParams::wl(2, 4, Beta::One).unwrap();
        assert!(matches!(wl_density(&p4, 0.1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn closure_provider_plugs_in() {
        let provider = |n: u32, nu: u32| coefficients(n, nu).map(|s| s.with_scale(2f64.ln(), 1.0));
        let p = EnsembleParams::wl(3, 3, Beta::One).unwrap();
        let a = wl_density_with(&provider, &p, 0.8).unwrap();
        let b = wl_density(&p, 0.8).unwrap();
        assert!((a / b - 2.0).abs() < 1e-14);
    }

    #[test]
    fn wl_gap_probability_is_complementary() {
        // N = 1: λ ~ chi-square with M degrees of freedom; M = 2 gives e^{-x/2}
        let p = EnsembleParams::wl(1, 1, Beta::One).unwrap();
        for x in [0.1, 1.0, 5.0] {
            assert!((wl_gap_probability(&p, x).unwrap() - (-0.5 * x).exp()).abs() < 1e-10);
        }
        let p = EnsembleParams::wl(3, 2, Beta::One).unwrap();
        let h = 1e-5;
        for x in [0.05, 0.3, 0.34, 1.2] {
            let d = -(wl_gap_probability(&p, x + h).unwrap() - wl_gap_probability(&p, x - h).unwrap()) / (2.0 * h);
            assert!((d - wl_density(&p, x).unwrap()).abs() < 1e-5);
        }
    }
}
