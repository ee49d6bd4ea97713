//! Ensemble parameters and the Gamma-product normalisation constants of the
//! Wishart-Laguerre and fixed-trace eigenvalue densities.

use crate::error::{Error, Result};
use crate::special::ln_gamma;
use serde::{Deserialize, Serialize};

/// Dyson index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Beta {
    /// Real matrices.
    One,
    /// Complex matrices.
    Two,
}

impl Beta {
    pub fn from_int(b: u32) -> Result<Self> {
        match b {
            1 => Ok(Beta::One),
            2 => Ok(Beta::Two),
            other => Err(Error::InvalidParams(format!(
                "beta must be 1 or 2, got {other}"
            ))),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Beta::One => 1.0,
            Beta::Two => 2.0,
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            Beta::One => 1,
            Beta::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnsembleKind {
    /// Unconstrained Wishart-Laguerre.
    Wl,
    /// Fixed trace `Tr W = t`.
    Ft,
}

/// `N x N` Wishart matrices `W = X^† X` built from `M x N` Gaussian `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub n_dim: u32,
    pub m_dim: u32,
    pub beta: Beta,
    pub kind: EnsembleKind,
    pub trace: f64,
}

impl EnsembleParams {
    pub fn new(n_dim: u32, m_dim: u32, beta: Beta, kind: EnsembleKind) -> Result<Self> {
        if n_dim == 0 {
            return Err(Error::InvalidParams("N must be positive".into()));
        }
        if m_dim < n_dim {
            return Err(Error::InvalidParams(format!(
                "M must be at least N (N = {n_dim}, M = {m_dim})"
            )));
        }
        Ok(Self {
            n_dim,
            m_dim,
            beta,
            kind,
            trace: 1.0,
        })
    }

    pub fn wl(n_dim: u32, nu: u32, beta: Beta) -> Result<Self> {
        Self::new(n_dim, n_dim + nu, beta, EnsembleKind::Wl)
    }

    pub fn ft(n_dim: u32, nu: u32, beta: Beta) -> Result<Self> {
        Self::new(n_dim, n_dim + nu, beta, EnsembleKind::Ft)
    }

    pub fn with_trace(mut self, trace: f64) -> Result<Self> {
        if !(trace > 0.0) || !trace.is_finite() {
            return Err(Error::InvalidParams(format!("trace must be positive, got {trace}")));
        }
        self.trace = trace;
        Ok(self)
    }

    pub fn with_kind(mut self, kind: EnsembleKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn nu(&self) -> u32 {
        self.m_dim - self.n_dim
    }

    /// `(β/2)(ν+1) - 1`, possibly half-integer.
    pub fn m_index_value(&self) -> f64 {
        0.5 * self.beta.value() * (self.nu() as f64 + 1.0) - 1.0
    }

    /// The HFMA matrix size, when it is an integer (β = 2, or β = 1 with odd ν).
    pub fn m_index(&self) -> Option<u32> {
        match self.beta {
            Beta::Two => Some(self.nu()),
            Beta::One if self.nu() % 2 == 1 => Some((self.nu() - 1) / 2),
            Beta::One => None,
        }
    }

    /// Total homogeneity degree `βNM/2` of the fixed-trace weight in the
    /// eigenvalues (including the N-fold volume element).
    pub fn degree(&self) -> f64 {
        0.5 * self.beta.value() * self.n_dim as f64 * self.m_dim as f64
    }

    /// Exponent `(β/2)(ν+1) - 1` of each eigenvalue in the joint density.
    pub fn eigenvalue_exponent(&self) -> f64 {
        0.5 * self.beta.value() * (self.nu() as f64 + 1.0) - 1.0
    }
}

/// `ln K_{N,M}`: normalisation of the Wishart-Laguerre joint density
/// `K exp(-β/2 Σλ) Π λ^{(β/2)(ν+1)-1} |Δ(λ)|^β` over the unordered orthant.
pub fn log_norm_wl(p: &EnsembleParams) -> f64 {
    let b = 0.5 * p.beta.value();
    let n = p.n_dim as f64;
    let m = p.m_dim as f64;
    let nu = p.nu() as f64;
    let mut acc = b * n * m * b.ln();
    for j in 1..=p.n_dim {
        let j = j as f64;
        acc += ln_gamma(1.0 + b) - ln_gamma(1.0 + b * j) - ln_gamma(b * (nu + j));
    }
    acc
}

/// `ln C_{N,M}`: normalisation of the fixed-trace joint density at `t = 1`.
/// Other traces follow from homogeneity and are handled by the density
/// rescaling in [`crate::ftwl`].
pub fn log_norm_ft(p: &EnsembleParams) -> f64 {
    let b = 0.5 * p.beta.value();
    let n = p.n_dim as f64;
    let m = p.m_dim as f64;
    let mut acc = ln_gamma(b * m * n) + n * ln_gamma(1.0 + b);
    for j in 0..p.n_dim {
        let j = j as f64;
        acc -= ln_gamma((m - j) * b) + ln_gamma(1.0 + (n - j) * b);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{adaptive, semi_infinite, tanh_sinh, QuadOptions};
    use std::f64::consts::PI;

    #[test]
    fn validation() {
        assert!(EnsembleParams::new(0, 1, Beta::One, EnsembleKind::Wl).is_err());
        assert!(EnsembleParams::new(3, 2, Beta::One, EnsembleKind::Wl).is_err());
        assert!(Beta::from_int(4).is_err());
        let p = EnsembleParams::wl(3, 2, Beta::One).unwrap();
        assert_eq!(p.nu(), 2);
        assert!(p.with_trace(0.0).is_err());
        assert!(p.with_trace(-1.0).is_err());
        assert_eq!(p.with_trace(2.0).unwrap().trace, 2.0);
    }

    #[test]
    fn m_index_integrality() {
        let p = |nu, beta| EnsembleParams::wl(4, nu, beta).unwrap();
        assert_eq!(p(3, Beta::One).m_index(), Some(1));
        assert_eq!(p(1, Beta::One).m_index(), Some(0));
        assert_eq!(p(2, Beta::One).m_index(), None);
        assert_eq!(p(2, Beta::One).m_index_value(), 0.5);
        assert_eq!(p(2, Beta::Two).m_index(), Some(2));
        assert_eq!(p(0, Beta::Two).m_index(), Some(0));
    }

    #[test]
    fn wl_constant_one_dimensional() {
        let k = log_norm_wl(&EnsembleParams::wl(1, 0, Beta::One).unwrap());
        assert!((k - (1.0 / (2.0 * PI).sqrt()).ln()).abs() < 1e-14);
        assert!((k + 0.918_938_533_204_672_7).abs() < 1e-12);
        let k = log_norm_wl(&EnsembleParams::wl(1, 0, Beta::Two).unwrap());
        assert!(k.abs() < 1e-15);
    }

    #[test]
    fn wl_constant_matches_one_dimensional_integral_for_all_m() {
        for beta in [Beta::One, Beta::Two] {
            for m in 1..=12 {
                let p = EnsembleParams::new(1, m, beta, EnsembleKind::Wl).unwrap();
                let b = 0.5 * beta.value();
                let a = b * m as f64;
                // ∫ λ^{a-1} e^{-bλ} dλ = Γ(a) b^{-a}
                let integral = ln_gamma(a) - a * b.ln();
                assert!((log_norm_wl(&p) + integral).abs() < 1e-12, "beta={beta:?} m={m}");
            }
        }
    }

    #[test]
    fn wl_constant_two_dimensional_quadrature() {
        // N = 2, M = 3, β = 1: the eigenvalue exponent vanishes, K ∫∫ e^{-(a+b)/2} |a - b| = 1
        let p = EnsembleParams::new(2, 3, Beta::One, EnsembleKind::Wl).unwrap();
        let k = log_norm_wl(&p).exp();
        let opts = QuadOptions::with_rel_tol(1e-10);
        let inner = |a: f64| {
            semi_infinite(
                |b| (-(a + b) / 2.0).exp() * (a - b).abs(),
                0.0,
                &opts,
            )
            .value
        };
        let total = semi_infinite(inner, 0.0, &QuadOptions::with_rel_tol(1e-8)).value;
        assert!((k * total - 1.0).abs() < 1e-6, "{}", k * total);
    }

    #[test]
    fn ft_constant_point_mass() {
        for beta in [Beta::One, Beta::Two] {
            for m in 1..=8 {
                let p = EnsembleParams::new(1, m, beta, EnsembleKind::Ft).unwrap();
                assert!(log_norm_ft(&p).abs() < 1e-13, "beta={beta:?} m={m}");
            }
        }
    }

    #[test]
    fn ft_constant_two_dimensional() {
        // N = 2, M = 2, β = 1: C ∫_0^1 (λ(1-λ))^{-1/2} |1 - 2λ| dλ = 1
        let p = EnsembleParams::ft(2, 0, Beta::One).unwrap();
        let c = log_norm_ft(&p).exp();
        let half = tanh_sinh(|l| (1.0 - 2.0 * l) / (l * (1.0 - l)).sqrt(), 0.0, 0.5, 1e-13).value;
        assert!((c * 2.0 * half - 1.0).abs() < 1e-10);
        // N = 2, M = 3, β = 2: C ∫_0^1 λ(1-λ) (1-2λ)^2 dλ = 1
        let p = EnsembleParams::ft(2, 1, Beta::Two).unwrap();
        let c = log_norm_ft(&p).exp();
        let v = adaptive(
            |l| l * (1.0 - l) * (1.0 - 2.0 * l).powi(2),
            0.0,
            1.0,
            &QuadOptions::default(),
        )
        .value;
        assert!((c * v - 1.0).abs() < 1e-10);
    }
}
