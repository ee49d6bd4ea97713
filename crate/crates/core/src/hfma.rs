//! Hypergeometric functions of matrix argument at `x·I_m`, by an angular
//! integral over the torus and by the Jack-polynomial partition series.
//!
//! Superscripts follow the series convention: `₀F₁^{(α)}` uses the
//! Pochhammer symbol `∏(a - (i-1)/α + j - 1)` and Jack polynomials with
//! parameter `α`.

use crate::ensemble::Beta;
use crate::error::{Error, Result};
use crate::micro::{micro_p, micro_q};
use crate::special::ln_gamma;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Weakly decreasing list of positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self { parts }
    }

    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn weight(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Length of column `j` (1-based) of the Young diagram.
    pub fn conjugate_part(&self, j: u32) -> u32 {
        self.parts.iter().filter(|&&p| p >= j).count() as u32
    }

    /// Cells `(i, j)` of the Young diagram, 1-based.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| (1..=p).map(move |j| (i as u32 + 1, j)))
    }
}

/// All partitions of `k` with at most `max_parts` parts, in reverse
/// lexicographic order.
pub fn partitions_of(k: u32, max_parts: usize) -> Vec<Partition> {
    fn go(rest: u32, cap: u32, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition { parts: cur.clone() });
            return;
        }
        if slots == 0 {
            return;
        }
        for p in (1..=cap.min(rest)).rev() {
            cur.push(p);
            go(rest - p, p, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, k, max_parts, &mut Vec::new(), &mut out);
    out
}

/// `(a)_κ^{(α)} = ∏_{(i,j)∈κ} (a - (i-1)/α + j - 1)`.
pub fn gen_pochhammer(a: f64, kappa: &Partition, alpha: f64) -> f64 {
    kappa
        .cells()
        .map(|(i, j)| a - (i as f64 - 1.0) / alpha + j as f64 - 1.0)
        .product()
}

/// `C_κ^{(α)}(I_m) / |κ|!` in log form with sign, from
/// `C_κ(I_m) = α^k k! / j_κ · ∏(m - i + 1 + α(j-1))`.
fn ln_jack_identity_over_factorial(kappa: &Partition, alpha: f64, m: usize) -> Option<f64> {
    if kappa.len() > m {
        return None;
    }
    let k = kappa.weight() as f64;
    let mut ln = k * alpha.ln();
    for (i, j) in kappa.cells() {
        let (fi, fj) = (i as f64, j as f64);
        let row = kappa.parts()[i as usize - 1] as f64;
        let col = kappa.conjugate_part(j) as f64;
        let upper = col - fi + alpha * (row - fj + 1.0);
        let lower = col - fi + 1.0 + alpha * (row - fj);
        ln += (m as f64 - fi + 1.0 + alpha * (fj - 1.0)).ln() - upper.ln() - lower.ln();
    }
    Some(ln)
}

/// `C_κ^{(α)}(I_m)`.
pub fn jack_at_identity(kappa: &Partition, alpha: f64, m: usize) -> f64 {
    match ln_jack_identity_over_factorial(kappa, alpha, m) {
        Some(ln) => (ln + ln_gamma(kappa.weight() as f64 + 1.0)).exp(),
        None => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: f64,
    /// Magnitude of the last degree layer that was added.
    pub remainder: f64,
    /// Sum of each degree layer `k = 0, 1, …`.
    pub layers: Vec<f64>,
}

/// Relative size of a degree layer below which the series stops.
pub const SERIES_STOP: f64 = 1e-14;
/// Hard cap on the number of degree layers.
pub const SERIES_KMAX: u32 = 200;

/// Partial sum of `₀F₁^{(α)}(-; b; x·I_m)` over degrees `k <= kmax`,
/// stopping early once a layer falls below `1e-14` of the running sum.
pub fn hfma_0f1_series(alpha: f64, b: f64, x: f64, m: usize, kmax: u32) -> Result<SeriesResult> {
    if !(alpha > 0.0) {
        return Err(Error::domain("Jack parameter must be positive"));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("series argument must be >= 0, got {x}")));
    }
    if m == 0 || x == 0.0 {
        return Ok(SeriesResult {
            value: 1.0,
            remainder: 0.0,
            layers: vec![1.0],
        });
    }
    let kmax = kmax.min(SERIES_KMAX);
    let mut layers = vec![1.0];
    let mut sum = 1.0;
    let mut remainder = f64::INFINITY;
    for k in 1..=kmax {
        let layer: f64 = partitions_of(k, m)
            .par_iter()
            .map(|kappa| {
                let ln_c = ln_jack_identity_over_factorial(kappa, alpha, m).expect("bounded parts");
                let poch = gen_pochhammer(b, kappa, alpha);
                if poch == 0.0 {
                    return f64::NAN;
                }
                poch.signum() * (ln_c + k as f64 * x.ln() - poch.abs().ln()).exp()
            })
            .sum();
        if layer.is_nan() {
            return Err(Error::domain(format!("Pochhammer symbol vanishes for b = {b}")));
        }
        layers.push(layer);
        sum += layer;
        remainder = layer.abs();
        if remainder < SERIES_STOP * sum.abs() && k > 2 {
            break;
        }
    }
    Ok(SeriesResult {
        value: sum,
        remainder,
        layers,
    })
}

/// `B̂_m(c, λ) = ∏_j Γ(1+λ/2) Γ(c+λ(j-1)/2) / Γ(1+λj/2)`.
pub fn b_hat(m: usize, c: u32, lambda: u32) -> f64 {
    let (c, l) = (c as f64, lambda as f64);
    (1..=m)
        .map(|j| {
            let j = j as f64;
            ln_gamma(1.0 + l / 2.0) + ln_gamma(c + l * (j - 1.0) / 2.0) - ln_gamma(1.0 + l * j / 2.0)
        })
        .sum::<f64>()
        .exp()
}

/// Largest matrix size handled by the torus quadrature.
pub const QUADRATURE_MAX_M: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusRule {
    /// Real part of the normalised torus average.
    pub re: f64,
    /// Imaginary part, which vanishes by symmetry.
    pub im: f64,
    pub nodes: usize,
}

/// Trapezoid average over `[-π, π)^m` of
/// `e^{2√x Σcos θ} e^{i(c-1)Σθ} |Δ(e^{iθ})|^λ` with `nodes` points per axis.
pub fn torus_average(lambda: u32, c: u32, x: f64, m: usize, nodes: usize) -> TorusRule {
    let h = 2.0 * PI / nodes as f64;
    let theta: Vec<f64> = (0..nodes).map(|k| -PI + h * k as f64).collect();
    let two_sqrt_x = 2.0 * x.sqrt();
    let shift = c as f64 - 1.0;
    let point = |angles: &[f64]| -> (f64, f64) {
        let mut vdm = 1.0;
        for a in 0..angles.len() {
            for b in (a + 1)..angles.len() {
                vdm *= (2.0 * (0.5 * (angles[a] - angles[b])).sin()).abs();
            }
        }
        let weight = vdm.powi(lambda as i32) * (two_sqrt_x * angles.iter().map(|t| t.cos()).sum::<f64>()).exp();
        let phase = shift * angles.iter().sum::<f64>();
        (weight * phase.cos(), weight * phase.sin())
    };
    let (re, im) = (0..nodes)
        .into_par_iter()
        .map(|outer| {
            let mut angles = vec![theta[outer]; m];
            let mut acc = (0.0, 0.0);
            let inner = nodes.pow(m as u32 - 1);
            for idx in 0..inner {
                let mut r = idx;
                for slot in angles.iter_mut().skip(1) {
                    *slot = theta[r % nodes];
                    r /= nodes;
                }
                let (a, b) = point(&angles);
                acc.0 += a;
                acc.1 += b;
            }
            acc
        })
        .reduce(|| (0.0, 0.0), |u, v| (u.0 + v.0, u.1 + v.1));
    let count = (nodes as f64).powi(m as i32);
    TorusRule {
        re: re / count,
        im: im / count,
        nodes,
    }
}

/// `₀F₁^{(2/λ)}(-; c + (λ/2)(m-1); x·I_m)` from the torus integral,
/// doubling the nodes per axis from 16 until successive values agree to
/// `1e-10` (at most 2048).
pub fn hfma_0f1_quadrature(lambda: u32, c: u32, x: f64, m: usize) -> Result<f64> {
    if lambda == 0 || c == 0 {
        return Err(Error::domain("lambda and c must be positive integers"));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("quadrature argument must be >= 0, got {x}")));
    }
    if m > QUADRATURE_MAX_M {
        return Err(Error::unsupported(format!(
            "torus quadrature supports m <= {QUADRATURE_MAX_M}, got {m}; use hfma_0f1_series"
        )));
    }
    if m == 0 || x == 0.0 {
        return Ok(1.0);
    }
    let scale = b_hat(m, c, lambda) * x.powf(-((c as f64 - 1.0) * m as f64) / 2.0);
    let mut nodes = 16;
    let mut prev = torus_average(lambda, c, x, m, nodes);
    loop {
        nodes *= 2;
        let cur = torus_average(lambda, c, x, m, nodes);
        let value = scale * cur.re;
        if (scale * cur.im).abs() > 1e-10 * value.abs().max(1.0) {
            return Err(Error::Quadrature(format!(
                "torus integral has imaginary residue {:e}",
                scale * cur.im
            )));
        }
        if (value - scale * prev.re).abs() <= 1e-10 * value.abs().max(1.0) {
            return Ok(value);
        }
        if nodes >= 2048 {
            return Err(Error::Quadrature("torus quadrature did not settle by 2048 nodes".into()));
        }
        prev = cur;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Q,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HfmaBackend {
    Quadrature,
    Series,
}

/// HFMA matrix size `m = (β/2)(ν+1) - 1`; `β = 1` needs odd `ν`.
pub fn hfma_size(beta: Beta, nu: u32) -> Result<usize> {
    match beta {
        Beta::Two => Ok(nu as usize),
        Beta::One if nu % 2 == 1 => Ok(((nu - 1) / 2) as usize),
        Beta::One => Err(Error::unsupported(format!(
            "beta = 1 needs odd nu for an integer HFMA size, got nu = {nu}"
        ))),
    }
}

/// `A_{m,β} = (β/2)^{2m+1} Γ(β/2+1) / (4^{m+1} Γ(m+1) Γ(m+1+β/2))`.
pub fn a_constant(m: usize, beta: Beta) -> f64 {
    let b = beta.value();
    let m = m as f64;
    ((2.0 * m + 1.0) * (b / 2.0).ln() + ln_gamma(b / 2.0 + 1.0)
        - (m + 1.0) * 4f64.ln()
        - ln_gamma(m + 1.0)
        - ln_gamma(m + 1.0 + b / 2.0))
    .exp()
}

/// Microscopic `Q` or `P` through `₀F₁^{(β/2)}` at `(y/4)·I_m`.
pub fn micro_via_hfma(beta: Beta, nu: u32, y: f64, which: Which) -> Result<f64> {
    micro_via_hfma_with(HfmaBackend::Quadrature, beta, nu, y, which)
}

pub fn micro_via_hfma_with(backend: HfmaBackend, beta: Beta, nu: u32, y: f64, which: Which) -> Result<f64> {
    let m = hfma_size(beta, nu)?;
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::domain(format!("microscopic variable must be >= 0, got {y}")));
    }
    let b = beta.value();
    let lambda = match beta {
        Beta::Two => 2,
        Beta::One => 4,
    };
    let c = match which {
        Which::Q => lambda / 2,
        Which::P => 2 + lambda / 2,
    };
    let x = y / 4.0;
    let f = match backend {
        HfmaBackend::Quadrature => hfma_0f1_quadrature(lambda, c, x, m)?,
        HfmaBackend::Series => {
            let alpha = b / 2.0;
            let param = c as f64 + (lambda as f64 / 2.0) * (m as f64 - 1.0);
            hfma_0f1_series(alpha, param, x, m, SERIES_KMAX)?.value
        }
    };
    let damp = (-b * y / 8.0).exp();
    Ok(match which {
        Which::Q => damp * f,
        Which::P => a_constant(m, beta) * y.powi(m as i32) * damp * f,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub y: f64,
    pub q_hfma: f64,
    pub q_bessel: f64,
    pub p_hfma: f64,
    pub p_bessel: f64,
    pub q_diff: f64,
    pub p_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub beta: Beta,
    pub nu: u32,
    pub rows: Vec<EquivalenceRow>,
    pub max_diff: f64,
}

/// Evaluates `Q` and `P` through the HFMA quadrature and through the
/// Bessel determinant/Pfaffian formulas on each grid point.
pub fn equivalence_report(beta: Beta, nu: u32, y_grid: &[f64]) -> Result<EquivalenceReport> {
    let m = hfma_size(beta, nu)?;
    if m > QUADRATURE_MAX_M {
        return Err(Error::unsupported(format!(
            "equivalence check supports m <= {QUADRATURE_MAX_M}, got {m}"
        )));
    }
    let rows = y_grid
        .iter()
        .map(|&y| {
            let q_hfma = micro_via_hfma(beta, nu, y, Which::Q)?;
            let p_hfma = micro_via_hfma(beta, nu, y, Which::P)?;
            let q_bessel = micro_q(beta, nu, y)?;
            let p_bessel = micro_p(beta, nu, y)?;
            Ok(EquivalenceRow {
                y,
                q_hfma,
                q_bessel,
                p_hfma,
                p_bessel,
                q_diff: (q_hfma - q_bessel).abs(),
                p_diff: (p_hfma - p_bessel).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_diff = rows.iter().map(|r| r.q_diff.max(r.p_diff)).fold(0.0, f64::max);
    Ok(EquivalenceReport {
        beta,
        nu,
        rows,
        max_diff,
    })
}
