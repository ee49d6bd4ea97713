//! Finite-N smallest-eigenvalue statistics of the real fixed-trace
//! Wishart-Laguerre ensemble, obtained by inverting the Laplace transform
//! that links it to the unconstrained ensemble.
//!
//! Inverting `(2s)^{-a} e^{-Nsx}` term by term gives, for odd `ν`,
//!
//! ```text
//! p(x) = (C/K) 2^{N/2-1} c Σ_k q_k 2^{-a_k}/Γ(a_k) x^{k+(ν-1)/2} (1-Nx)^{a_k-1},
//! a_k  = (N(N+ν) - 2k - ν - 1)/2,
//! ```
//!
//! and for even `ν` the same structure with the Tricomi functions turned
//! into the bounded τ-integrals `Θ_k`, `Ξ_k`.

use crate::edelman::{c_constant_log, ClosedFormProvider, CoefficientProvider, CoefficientSet, EdelmanPolys};
use crate::ensemble::{log_norm_ft, log_norm_wl, Beta, EnsembleKind, EnsembleParams};
use crate::error::{Error, Result};
use crate::quad::{adaptive, semi_infinite, tanh_sinh, QuadOptions};
use crate::special::{ln_beta, ln_gamma, LogSum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

/// Relative accuracy target of the inner τ-integrals.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

fn check_ft(p: &EnsembleParams) -> Result<()> {
    if p.beta != Beta::One {
        return Err(Error::unsupported(
            "finite-N fixed-trace densities are implemented for beta = 1",
        ));
    }
    if p.kind != EnsembleKind::Ft {
        return Err(Error::InvalidParams("expected the FT ensemble kind".into()));
    }
    if p.n_dim < 2 {
        return Err(Error::InvalidParams(
            "N = 1 fixed-trace ensemble is a point mass at x = 1".into(),
        ));
    }
    Ok(())
}

fn check_unit_trace(p: &EnsembleParams) -> Result<()> {
    if p.trace != 1.0 {
        return Err(Error::InvalidParams(format!(
            "unit-trace evaluator called with t = {}; use density_at_t",
            p.trace
        )));
    }
    Ok(())
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("density requires x > 0, got {x}")));
    }
    Ok(())
}

/// `ln(C/K)` for the parameter set, both constants at unit trace.
pub fn log_ratio_ck(p: &EnsembleParams) -> f64 {
    log_norm_ft(p) - log_norm_wl(&p.with_kind(EnsembleKind::Wl))
}

/// `a_k = (N(N+ν) - 2k - ν - 1)/2`, the Gamma order produced by inverting
/// the `k`-th term.
pub fn inversion_order(p: &EnsembleParams, k: usize) -> f64 {
    let n = p.n_dim as f64;
    let nu = p.nu() as f64;
    0.5 * (n * (n + nu) - 2.0 * k as f64 - nu - 1.0)
}

/// Odd-`ν` density at unit trace from the general Laplace-inverted sum.
pub fn ftwl_density_odd(p: &EnsembleParams, x: f64) -> Result<f64> {
    ftwl_density_odd_with(&ClosedFormProvider, p, x)
}

pub fn ftwl_density_odd_with(provider: &dyn CoefficientProvider, p: &EnsembleParams, x: f64) -> Result<f64> {
    check_ft(p)?;
    check_unit_trace(p)?;
    if p.nu() % 2 == 0 {
        return Err(Error::InvalidParams("ftwl_density_odd needs odd nu".into()));
    }
    check_x(x)?;
    let n = p.n_dim as f64;
    if n * x >= 1.0 {
        return Ok(0.0);
    }
    let set = provider.coefficients(p.n_dim, p.nu())?;
    let h = set.h().ok_or_else(|| Error::InvalidParams("provider returned f,g for odd nu".into()))?;
    let nu = p.nu() as f64;
    let ln_pref = log_ratio_ck(p) + (0.5 * n - 1.0) * LN_2 + c_constant_log(p.n_dim, p.nu());
    let lx = x.ln();
    let l1 = (-n * x).ln_1p();
    let mut acc = LogSum::new();
    for (k, (lc, s)) in set.scaled_terms(h).into_iter().enumerate() {
        let a = inversion_order(p, k);
        let l = ln_pref + lc - a * LN_2 - ln_gamma(a) + (k as f64 + 0.5 * (nu - 1.0)) * lx + (a - 1.0) * l1;
        acc.push(l, s);
    }
    Ok(acc.value())
}

fn gamma_alpha(p: &EnsembleParams) -> f64 {
    0.5 * (p.n_dim as f64 - 1.0)
}

/// `∫_0^{1/x-N} τ^{α-1+extra} (1+τ)^{-N/2-1} (1-x(N+τ))^{a-1} dτ` with
/// `α = (N-1)/2`, through `τ = u²`.
fn tau_integral(p: &EnsembleParams, a: f64, extra: f64, x: f64, rel_tol: f64) -> Result<f64> {
    let n = p.n_dim as f64;
    let one_minus = 1.0 - n * x;
    if one_minus <= 0.0 {
        return Ok(0.0);
    }
    let top = (one_minus / x).sqrt();
    let power = 2.0 * (gamma_alpha(p) + extra) - 1.0;
    let f = |u: f64| {
        let rest = one_minus - x * u * u;
        if rest <= 0.0 {
            return 0.0;
        }
        let lu = if power == 0.0 { 0.0 } else { power * u.ln() };
        (LN_2 + lu - (0.5 * n + 1.0) * (u * u).ln_1p() + (a - 1.0) * rest.ln()).exp()
    };
    let opts = QuadOptions::with_rel_tol(rel_tol).with_abs_tol(0.0);
    adaptive(f, 0.0, top, &opts).require("tau integral")
}

/// `Θ_k(x)` from its τ-integral representation.
pub fn theta_integral(p: &EnsembleParams, k: usize, x: f64) -> Result<f64> {
    check_ft(p)?;
    check_x(x)?;
    let nu = p.nu() as f64;
    let a = inversion_order(p, k);
    let alpha = gamma_alpha(p);
    let integral = tau_integral(p, a, 0.0, x, DEFAULT_REL_TOL)?;
    Ok(integral * ((k as f64 + 0.5 * (nu - 1.0)) * x.ln() - ln_gamma(alpha)).exp())
}

/// `Ξ_k(x)` from its τ-integral representation.
pub fn xi_integral(p: &EnsembleParams, k: usize, x: f64) -> Result<f64> {
    check_ft(p)?;
    check_x(x)?;
    let n = p.n_dim as f64;
    let nu = p.nu() as f64;
    let a = inversion_order(p, k);
    let alpha = gamma_alpha(p);
    let integral = tau_integral(p, a, 1.0, x, DEFAULT_REL_TOL)?;
    Ok(0.25 * (n - 1.0) * integral * ((k as f64 + 0.5 * (nu - 1.0)) * x.ln() - ln_gamma(alpha + 1.0)).exp())
}

/// Even-`ν` density at unit trace. All `(f_k, g_k)` pairs are folded into a
/// single τ-integral; `Ξ_k`'s prefactor `(N-1)/(4Γ(α+1))` equals
/// `1/(2Γ(α))`, so the bracket is `f_k - g_k τ/2`.
pub fn ftwl_density_even(p: &EnsembleParams, x: f64) -> Result<f64> {
    ftwl_density_even_with(&ClosedFormProvider, p, x, DEFAULT_REL_TOL)
}

pub fn ftwl_density_even_with(
    provider: &dyn CoefficientProvider,
    p: &EnsembleParams,
    x: f64,
    rel_tol: f64,
) -> Result<f64> {
    check_ft(p)?;
    check_unit_trace(p)?;
    if p.nu() % 2 == 1 {
        return Err(Error::InvalidParams("ftwl_density_even needs even nu".into()));
    }
    check_x(x)?;
    let n = p.n_dim as f64;
    let one_minus = 1.0 - n * x;
    if one_minus <= 0.0 {
        return Ok(0.0);
    }
    let set = provider.coefficients(p.n_dim, p.nu())?;
    let terms = even_terms(p, &set, x)?;
    let power = n - 2.0;
    let f = |u: f64| {
        let u2 = u * u;
        let rest = one_minus - x * u2;
        if rest <= 0.0 {
            return 0.0;
        }
        let lu = if power == 0.0 { 0.0 } else { power * u.ln() };
        let common = lu - (0.5 * n + 1.0) * u2.ln_1p();
        let lrest = rest.ln();
        let lu2 = u2.ln();
        let mut acc = LogSum::new();
        for t in &terms {
            let base = common + t.ln_weight + (t.a - 1.0) * lrest;
            acc.push(base + t.ln_f, t.sign_f);
            // -g_k τ / 2
            acc.push(base + t.ln_g + lu2 - LN_2, -t.sign_g);
        }
        acc.value()
    };
    let top = (one_minus / x).sqrt();
    let opts = QuadOptions::with_rel_tol(rel_tol).with_abs_tol(0.0);
    adaptive(f, 0.0, top, &opts).require("even-nu density")
}

struct EvenTerm {
    ln_weight: f64,
    a: f64,
    ln_f: f64,
    sign_f: f64,
    ln_g: f64,
    sign_g: f64,
}

fn even_terms(p: &EnsembleParams, set: &CoefficientSet, x: f64) -> Result<Vec<EvenTerm>> {
    let EdelmanPolys::EvenFG { f, g } = &set.polys else {
        return Err(Error::InvalidParams("provider returned h for even nu".into()));
    };
    let nu = p.nu() as f64;
    // (C/K) 2^{-1/2} c · 2 (from dτ = 2u du) / Γ(α)
    let ln_pref = log_ratio_ck(p) - 0.5 * LN_2 + c_constant_log(p.n_dim, p.nu()) + LN_2
        - ln_gamma(gamma_alpha(p));
    let fs = set.scaled_terms(f);
    let gs = set.scaled_terms(g);
    let len = fs.len().max(gs.len());
    let lx = x.ln();
    Ok((0..len)
        .map(|k| {
            let a = inversion_order(p, k);
            let (ln_f, sign_f) = fs.get(k).copied().unwrap_or((f64::NEG_INFINITY, 0.0));
            let (ln_g, sign_g) = gs.get(k).copied().unwrap_or((f64::NEG_INFINITY, 0.0));
            EvenTerm {
                ln_weight: ln_pref - a * LN_2 - ln_gamma(a) + (k as f64 + 0.5 * (nu - 1.0)) * lx,
                a,
                ln_f,
                sign_f,
                ln_g,
                sign_g,
            }
        })
        .collect())
}

/// Density at unit trace from the general assembler, dispatched on parity.
pub fn ftwl_density_unit(p: &EnsembleParams, x: f64) -> Result<f64> {
    if p.nu() % 2 == 1 {
        ftwl_density_odd(p, x)
    } else {
        ftwl_density_even(p, x)
    }
}

/// Density at the trace stored in `p`.
pub fn ftwl_density(p: &EnsembleParams, x: f64) -> Result<f64> {
    density_at_t(p, x, p.trace)
}

/// Maps an abscissa at unit trace to trace `t`.
pub fn rescale_trace(x_at_t1: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParams(format!("trace must be positive, got {t}")));
    }
    Ok(x_at_t1 * t)
}

/// `p(x; t) = p(x/t; 1)/t`, the normalised density at trace `t`.
pub fn density_at_t(p: &EnsembleParams, x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParams(format!("trace must be positive, got {t}")));
    }
    let unit = EnsembleParams { trace: 1.0, ..*p };
    Ok(ftwl_density_unit(&unit, x / t)? / t)
}

/// Density at `x → 0⁺`: infinite for `ν = 0`, the constant `(1-Nx)` prefactor
/// value for `ν = 1`, and zero otherwise.
pub fn density_at_origin(p: &EnsembleParams) -> Result<f64> {
    check_ft(p)?;
    Ok(match p.nu() {
        0 => f64::INFINITY,
        1 => explicit_nu1(p, 0.0) / p.trace,
        _ => 0.0,
    })
}

// ---------------------------------------------------------------------------
// Explicit formulas and the 2F1 backend

/// `ln ₂F₁(a, b; c; z)` for `z ≤ 0`, with parameters that make every series
/// term positive after a Pfaff transformation to `w = z/(z-1) ∈ [0, 1)`.
/// The transformation is chosen so that the terms decay like
/// `n^{-1-|a-b|}` near `w = 1`.
pub fn ln_hyp2f1_negative(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(z <= 0.0) {
        return Err(Error::domain(format!("ln_hyp2f1_negative needs z <= 0, got {z}")));
    }
    let w = z / (z - 1.0);
    let (pre, big_a, big_b) = if b >= a {
        (-a * (-z).ln_1p(), a, c - b)
    } else {
        (-b * (-z).ln_1p(), c - a, b)
    };
    if big_a < 0.0 || big_b < 0.0 || c <= 0.0 {
        return Err(Error::unsupported(format!(
            "2F1 series with mixed-sign terms (a={a}, b={b}, c={c})"
        )));
    }
    let one_minus_w = 1.0 / (1.0 - z);
    if one_minus_w < 1e-3 && big_a > 0.0 && big_b > 0.0 && c > big_b {
        return Ok(pre + ln_hyp2f1_euler(big_a, big_b, c, one_minus_w)?);
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut n = 0.0f64;
    loop {
        let ratio = (big_a + n) * (big_b + n) / ((c + n) * (n + 1.0));
        term *= ratio * w;
        sum += term;
        n += 1.0;
        // once the ratio stays below one the tail is bounded geometrically
        let settled = (big_a + n) * (big_b + n) <= (c + n) * (n + 1.0);
        if term == 0.0 || (settled && term * w / (1.0 - w) <= 1e-17 * sum) {
            break;
        }
        if n > 5e7 {
            return Err(Error::Quadrature(format!("2F1 series did not converge at w = {w}")));
        }
    }
    Ok(pre + sum.ln())
}

/// `ln ₂F₁(A, B; c; w)` for `w` near one from the Euler integral
/// `Γ(c)/(Γ(B)Γ(c-B)) ∫_0^1 s^{c-B-1} (1-s)^{B-1} (1-w+ws)^{-A} ds`,
/// written in `s = 1 - t` so the endpoint singularity sits at the origin.
fn ln_hyp2f1_euler(big_a: f64, big_b: f64, c: f64, one_minus_w: f64) -> Result<f64> {
    let w = 1.0 - one_minus_w;
    let e = c - big_b;
    let f = |s: f64| {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        ((e - 1.0) * s.ln() + (big_b - 1.0) * (-s).ln_1p() - big_a * (one_minus_w + w * s).ln()).exp()
    };
    let r = tanh_sinh(f, 0.0, 1.0, 1e-13);
    let v = r.require("2F1 Euler integral")?;
    Ok(ln_gamma(c) - ln_gamma(big_b) - ln_gamma(e) + v.ln())
}

fn explicit_nu1(p: &EnsembleParams, x: f64) -> f64 {
    let n = p.n_dim as f64;
    let d = 0.5 * n * (n + 1.0);
    (n.ln() + log_ratio_ck(p) - d * LN_2 + (d - 2.0) * (-n * x).ln_1p() - ln_gamma(d - 1.0)).exp()
}

fn explicit_nu3(p: &EnsembleParams, x: f64) -> f64 {
    let n = p.n_dim as f64;
    let d = 0.5 * n * (n + 3.0);
    let pref = log_ratio_ck(p) + ln_gamma(3.0 + n) - LN_2 - (n + 1.0).ln() - ln_gamma(n);
    let lx = x.ln();
    let l1 = (-n * x).ln_1p();
    let mut acc = LogSum::new();
    for k in 0..p.n_dim as usize {
        let kf = k as f64;
        // (1-N)_k (-1)^k = (N-1)!/(N-1-k)!
        let poch = ln_gamma(n) - ln_gamma(n - kf);
        let l = pref + poch - ln_gamma(4.0 + kf) - ln_gamma(kf + 1.0) + (2.0 + kf - d) * LN_2
            - ln_gamma(d - 2.0 - kf)
            + (1.0 + kf) * lx
            + (d - 3.0 - kf) * l1;
        acc.push(l, 1.0);
    }
    acc.value()
}

fn explicit_nu0(p: &EnsembleParams, x: f64) -> Result<f64> {
    let n = p.n_dim as f64;
    let pref = n.ln() + ln_gamma(n) + ln_gamma(0.5 * n * n)
        - (n - 1.0) * LN_2
        - ln_gamma(0.5 * n)
        - ln_gamma(0.5 * (n * n + n - 2.0));
    let f = ln_hyp2f1_negative(0.5 * (n + 2.0), 0.5 * (n - 1.0), 0.5 * (n * n + n - 2.0), n - 1.0 / x)?;
    Ok((pref - 0.5 * n * x.ln() + 0.5 * (n * n + n - 4.0) * (-n * x).ln_1p() + f).exp())
}

fn explicit_nu2(p: &EnsembleParams, x: f64) -> Result<f64> {
    let n = p.n_dim as f64;
    let nn = p.n_dim as usize;
    let z = n - 1.0 / x;
    let l1 = (-n * x).ln_1p();
    let ratio = x.ln() - l1;
    let common = 0.5 * (3.0 - n * (n + 2.0)) * LN_2 + 0.5 * (1.0 - n) * x.ln()
        + (-3.0 + 1.5 * n + 0.5 * n * n) * l1;
    let ln_np1_fact = ln_gamma(n + 2.0);
    let mut acc = LogSum::new();
    for k in 0..nn {
        let kf = k as f64;
        let c = 0.5 * n * n + 1.5 * n - 2.0 - kf;
        // 1/Γ(c) is carried over from the Θ/Ξ closed forms
        let phi = ln_np1_fact + kf * LN_2 - ln_gamma(kf + 1.0) - ln_gamma(n - kf) - ln_gamma(kf + 3.0)
            - ln_gamma(c)
            + kf * ratio
            + ln_hyp2f1_negative(0.5 * (n - 1.0), 1.0 + 0.5 * n, c, z)?;
        acc.push(common + phi, 1.0);
        if k + 2 <= nn {
            let psi = ln_np1_fact + kf * LN_2 - ln_gamma(kf + 1.0) - ln_gamma(n - 1.0 - kf)
                - ln_gamma(kf + 4.0)
                - ln_gamma(c)
                + kf * ratio
                + ln_hyp2f1_negative(0.5 * (n + 1.0), 1.0 + 0.5 * n, c, z)?;
            acc.push(common + psi, 1.0);
        }
    }
    let pref = log_ratio_ck(p) + ln_gamma(0.5 * (n + 1.0)) - 0.5 * (2.0 * PI).ln() + 0.5 * x.ln();
    Ok(acc.value() * pref.exp())
}

/// Density at unit trace from the specialised closed forms for `ν ≤ 3`,
/// independent of the general assembler.
pub fn ftwl_density_explicit(p: &EnsembleParams, x: f64) -> Result<f64> {
    check_ft(p)?;
    check_unit_trace(p)?;
    check_x(x)?;
    if p.n_dim as f64 * x >= 1.0 {
        return Ok(0.0);
    }
    match p.nu() {
        0 => explicit_nu0(p, x),
        1 => Ok(explicit_nu1(p, x)),
        2 => explicit_nu2(p, x),
        3 => Ok(explicit_nu3(p, x)),
        nu => Err(Error::unsupported(format!("explicit formulas cover nu <= 3, got {nu}"))),
    }
}

/// `Θ_k` through its ₂F₁ closed form; a small-N cross-check of
/// [`theta_integral`].
pub fn theta_closed_form(p: &EnsembleParams, k: usize, x: f64) -> Result<f64> {
    check_ft(p)?;
    check_x(x)?;
    let n = p.n_dim as f64;
    let nu = p.nu() as f64;
    let kf = k as f64;
    if n * x >= 1.0 {
        return Ok(0.0);
    }
    let a = inversion_order(p, k);
    let c = 0.5 * (-2.0 * kf + (n - 1.0) * (n + nu + 2.0));
    let l = ln_gamma(a) - ln_gamma(0.5 * (n * (n + nu) + n - nu - 2.0 - 2.0 * kf))
        + (kf + 0.5 * (nu - n)) * x.ln()
        + 0.5 * (n * (n + nu) - nu + n - 4.0 - 2.0 * kf) * (-n * x).ln_1p()
        + ln_hyp2f1_negative(0.5 * (n - 1.0), 0.5 * n + 1.0, c, n - 1.0 / x)?;
    Ok(l.exp())
}

/// `Ξ_k` through its ₂F₁ closed form.
pub fn xi_closed_form(p: &EnsembleParams, k: usize, x: f64) -> Result<f64> {
    check_ft(p)?;
    check_x(x)?;
    let n = p.n_dim as f64;
    let nu = p.nu() as f64;
    let kf = k as f64;
    if n * x >= 1.0 {
        return Ok(0.0);
    }
    let a = inversion_order(p, k);
    let c = 0.5 * (-2.0 * kf - nu + n * (1.0 + n + nu));
    let l = ln_gamma(a) - ln_gamma(0.5 * (n * (n + nu) + n - nu - 2.0 * kf))
        + (kf - 1.0 + 0.5 * (nu - n)) * x.ln()
        + (-kf + 0.5 * (n - 1.0) * (n + nu + 2.0)) * (-n * x).ln_1p()
        + ln_hyp2f1_negative(0.5 * (n + 1.0), 0.5 * n + 1.0, c, n - 1.0 / x)?;
    Ok(0.25 * (n - 1.0) * l.exp())
}

// ---------------------------------------------------------------------------
// Cumulative distribution and moments

/// `∫_lo^hi p` at unit trace; the lower piece uses `x = u²` to absorb the
/// `x^{-1/2}` edge of `ν = 0`.
fn integrate_density(p: &EnsembleParams, lo: f64, hi: f64, weight: impl Fn(f64) -> f64) -> Result<f64> {
    let opts = QuadOptions::with_rel_tol(1e-11).with_abs_tol(1e-15);
    let f = |u: f64| {
        let x = u * u;
        if x <= 0.0 {
            return 0.0;
        }
        2.0 * u * weight(x) * ftwl_density_unit(p, x).unwrap_or(f64::NAN)
    };
    let r = adaptive(f, lo.sqrt(), hi.sqrt(), &opts);
    if r.value.is_nan() {
        // surface the underlying evaluation error
        ftwl_density_unit(p, 0.5 * (lo + hi))?;
    }
    r.require("density integral")
}

/// Gap probability `q(x) = Prob[λ_min > x]` at the trace stored in `p`.
pub fn ftwl_cdf(p: &EnsembleParams, x: f64) -> Result<f64> {
    check_ft(p)?;
    let t = p.trace;
    let unit = EnsembleParams { trace: 1.0, ..*p };
    let x = x / t;
    let end = 1.0 / p.n_dim as f64;
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x >= end {
        return Ok(0.0);
    }
    if x > 0.5 * end {
        integrate_density(&unit, x, end, |_| 1.0)
    } else {
        Ok(1.0 - integrate_density(&unit, 0.0, x, |_| 1.0)?)
    }
}

/// `⟨λ_min^ℓ⟩` at unit trace. Odd `ν` uses the Beta-function sum
/// `Σ_k w_k N^{-(ℓ+k+(ν+1)/2)} B(ℓ+k+(ν+1)/2, a_k)`; even `ν` integrates the
/// density.
pub fn ftwl_moment(p: &EnsembleParams, ell: u32) -> Result<f64> {
    check_ft(p)?;
    if ell == 0 {
        return Ok(1.0);
    }
    let unit = EnsembleParams { trace: 1.0, ..*p };
    if p.nu() % 2 == 1 {
        moment_closed(&unit, ell)
    } else {
        moment_quadrature(&unit, ell)
    }
}

fn moment_closed(p: &EnsembleParams, ell: u32) -> Result<f64> {
    let set = ClosedFormProvider.coefficients(p.n_dim, p.nu())?;
    let h = set.h().expect("odd nu");
    let n = p.n_dim as f64;
    let nu = p.nu() as f64;
    let ln_pref = log_ratio_ck(p) + (0.5 * n - 1.0) * LN_2 + c_constant_log(p.n_dim, p.nu());
    let mut acc = LogSum::new();
    for (k, (lc, s)) in set.scaled_terms(h).into_iter().enumerate() {
        let a = inversion_order(p, k);
        let omega = ell as f64 + k as f64 + 0.5 * (nu + 1.0);
        acc.push(ln_pref + lc - a * LN_2 - ln_gamma(a) - omega * n.ln() + ln_beta(omega, a), s);
    }
    Ok(acc.value())
}

/// `∫ x^ℓ p(x) dx` by quadrature; also available for odd `ν` as a check on
/// the closed form.
pub fn moment_quadrature(p: &EnsembleParams, ell: u32) -> Result<f64> {
    check_ft(p)?;
    let unit = EnsembleParams { trace: 1.0, ..*p };
    integrate_density(&unit, 0.0, 1.0 / p.n_dim as f64, |x| x.powi(ell as i32))
}

// ---------------------------------------------------------------------------
// Laplace relation

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
}

/// Compares `∫_0^∞ e^{-st} p(x; t) dt` with
/// `(C/K) (2s)^{1-βNM/2} p^{WL}(2sx)`.
///
/// The transform is taken over the family `p(x; t) = t^{D-2} p(x/t; 1)` with
/// `D = NM/2`, i.e. with the normalisation held at its unit-trace value for
/// every `t`, which is the convention under which the relation holds.
pub fn laplace_relation_check(p: &EnsembleParams, x: f64, s: f64) -> Result<LaplaceCheck> {
    check_ft(p)?;
    check_x(x)?;
    if !(s > 0.0) {
        return Err(Error::domain(format!("Laplace variable must be positive, got {s}")));
    }
    let unit = EnsembleParams { trace: 1.0, ..*p };
    let d = unit.degree();
    let start = unit.n_dim as f64 * x;
    let integrand = |tau: f64| {
        let t = start + tau;
        if tau <= 0.0 {
            return 0.0;
        }
        let dens = ftwl_density_unit(&unit, x / t).unwrap_or(f64::NAN);
        dens * (-s * t + (d - 2.0) * t.ln()).exp()
    };
    let opts = QuadOptions::with_rel_tol(1e-11).with_abs_tol(0.0);
    let lhs = semi_infinite(integrand, 0.0, &opts).require("Laplace transform")?;
    let wl = unit.with_kind(EnsembleKind::Wl);
    let rhs = crate::edelman::wl_density(&wl, 2.0 * s * x)?
        * (log_ratio_ck(&unit) + (1.0 - d) * (2.0 * s).ln()).exp();
    Ok(LaplaceCheck {
        lhs,
        rhs,
        abs_diff: (lhs - rhs).abs(),
    })
}

// ---------------------------------------------------------------------------
// Curves

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// General Laplace-inverted assembler with τ-integrals.
    General,
    /// Specialised closed forms with the ₂F₁ series.
    Explicit,
}

/// Tabulated density with the parameters and backend that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub abscissas: Vec<f64>,
    pub values: Vec<f64>,
    pub params: EnsembleParams,
    pub backend: Backend,
    pub formula: String,
}

impl DensityCurve {
    /// Evaluates the fixed-trace density on `grid` in parallel. Points at or
    /// beyond `t/N` are zero; `x = 0` takes the limiting value.
    pub fn fixed_trace(p: &EnsembleParams, grid: &[f64], backend: Backend) -> Result<Self> {
        check_ft(p)?;
        let t = p.trace;
        let unit = EnsembleParams { trace: 1.0, ..*p };
        let values = grid
            .par_iter()
            .map(|&x| {
                if x == 0.0 {
                    return density_at_origin(p);
                }
                match backend {
                    Backend::General => ftwl_density_unit(&unit, x / t).map(|v| v / t),
                    Backend::Explicit => ftwl_density_explicit(&unit, x / t).map(|v| v / t),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let formula = match (backend, p.nu() % 2) {
            (Backend::Explicit, _) => format!("explicit nu={}", p.nu()),
            (Backend::General, 1) => "laplace-inverted h-polynomial sum".to_string(),
            (Backend::General, _) => "laplace-inverted theta/xi integrals".to_string(),
        };
        Ok(Self {
            abscissas: grid.to_vec(),
            values,
            params: *p,
            backend,
            formula,
        })
    }
}
