//! Sampling of smallest eigenvalues from Gaussian data matrices and
//! goodness-of-fit against analytic distribution functions.

use crate::edelman::wl_density;
use crate::ensemble::{Beta, EnsembleKind, EnsembleParams};
use crate::error::{Error, Result};
use crate::ftwl::ftwl_density_unit;
use crate::linalg::symmetric_eigenvalues;
use crate::quad::{adaptive, QuadOptions};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;

/// Draws per independent RNG stream.
pub const CHUNK: usize = 1024;

/// Pair of independent standard normals by the polar Box-Muller method.
pub fn polar_normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    loop {
        let u: f64 = rng.random_range(-1.0..1.0);
        let v: f64 = rng.random_range(-1.0..1.0);
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let f = (-2.0 * s.ln() / s).sqrt();
            return (u * f, v * f);
        }
    }
}

/// `M x N` Gaussian data matrix. Real entries are standard normal; complex
/// entries have real and imaginary parts of variance 1/2 each, so the
/// eigenvalue weight of `X^† X` is `e^{-(β/2)λ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMatrix {
    pub re: DMatrix<f64>,
    pub im: Option<DMatrix<f64>>,
}

pub fn gaussian_matrix<R: Rng + ?Sized>(p: &EnsembleParams, rng: &mut R) -> GaussianMatrix {
    let (rows, cols) = (p.m_dim as usize, p.n_dim as usize);
    let mut fill = |scale: f64| {
        let mut data = Vec::with_capacity(rows * cols + 1);
        while data.len() < rows * cols {
            let (a, b) = polar_normal_pair(rng);
            data.push(a * scale);
            data.push(b * scale);
        }
        data.truncate(rows * cols);
        DMatrix::from_vec(rows, cols, data)
    };
    match p.beta {
        Beta::One => GaussianMatrix { re: fill(1.0), im: None },
        Beta::Two => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let re = fill(s);
            let im = fill(s);
            GaussianMatrix { re, im: Some(im) }
        }
    }
}

impl GaussianMatrix {
    /// `W = X^† X` as a real symmetric matrix: `N x N` for real data, and the
    /// `2N x 2N` embedding `[[Re, -Im], [Im, Re]]` (each eigenvalue doubled)
    /// for complex data.
    pub fn wishart_embedding(&self) -> DMatrix<f64> {
        let a = &self.re;
        match &self.im {
            None => symmetrize(a.transpose() * a),
            Some(b) => {
                let re = a.transpose() * a + b.transpose() * b;
                let im = a.transpose() * b - b.transpose() * a;
                let n = re.nrows();
                let mut out = DMatrix::zeros(2 * n, 2 * n);
                out.view_mut((0, 0), (n, n)).copy_from(&re);
                out.view_mut((n, n), (n, n)).copy_from(&re);
                out.view_mut((n, 0), (n, n)).copy_from(&im);
                out.view_mut((0, n), (n, n)).copy_from(&(-im));
                symmetrize(out)
            }
        }
    }

    /// `Tr(X^† X)`, the sum of squared moduli of the entries.
    pub fn trace(&self) -> f64 {
        self.re.norm_squared() + self.im.as_ref().map_or(0.0, |b| b.norm_squared())
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Smallest eigenvalue of a symmetric matrix. Values within `1e-10·max(1, ‖W‖)`
/// below zero are clamped to zero.
pub fn smallest_eig(w: &DMatrix<f64>) -> Result<f64> {
    if !w.is_square() || w.nrows() == 0 {
        return Err(Error::Matrix("smallest_eig needs a non-empty square matrix".into()));
    }
    let lo = symmetric_eigenvalues(w)?[0];
    let tol = 1e-10 * w.norm().max(1.0);
    Ok(if lo < 0.0 && lo >= -tol { 0.0 } else { lo })
}

/// One draw: smallest eigenvalue of `W` and `Tr W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub lambda_min: f64,
    pub trace: f64,
}

impl Draw {
    /// Smallest eigenvalue after normalising the trace to `t`.
    pub fn fixed_trace_min(&self, t: f64) -> f64 {
        t * self.lambda_min / self.trace
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Draws `n` matrices; chunk `i` uses the ChaCha stream `i` of `seed`, so the
/// result does not depend on the worker count.
pub fn sample_draws(p: &EnsembleParams, n_samples: usize, seed: u64) -> Result<Vec<Draw>> {
    if n_samples == 0 {
        return Err(Error::InvalidParams("n_samples must be >= 1".into()));
    }
    let chunks = n_samples.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let count = CHUNK.min(n_samples - c * CHUNK);
            (0..count)
                .map(|_| {
                    let x = gaussian_matrix(p, &mut rng);
                    Ok(Draw {
                        lambda_min: smallest_eig(&x.wishart_embedding())?,
                        trace: x.trace(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub params: EnsembleParams,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `λ_min` for WL parameters, `μ₁ = t·λ_min / Tr W` for fixed trace.
pub fn sample_min(p: &EnsembleParams, n_samples: usize, seed: u64) -> Result<SampleBatch> {
    let draws = sample_draws(p, n_samples, seed)?;
    let values = match p.kind {
        EnsembleKind::Wl => draws.iter().map(|d| d.lambda_min).collect(),
        EnsembleKind::Ft => draws.iter().map(|d| d.fixed_trace_min(p.trace)).collect(),
    };
    Ok(SampleBatch {
        params: *p,
        seed,
        values,
    })
}

/// `sup |F_emp - F|` over the sorted sample, checking both sides of each step.
pub fn ks_statistic<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidParams("empty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted.iter().enumerate().fold(0.0, |d, (i, &v)| {
        let f = cdf(v);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    }))
}

pub fn ks_distance<F: Fn(f64) -> f64>(batch: &SampleBatch, cdf: F) -> Result<f64> {
    ks_statistic(&batch.values, cdf)
}

/// Distribution function tabulated on a grid that is uniform in `√x`, with
/// linear interpolation in `√x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCdf {
    roots: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedCdf {
    /// Accumulates `∫ density` over `cells` cells of `[0, upper]`.
    pub fn from_density<F: Fn(f64) -> Result<f64> + Sync>(density: F, upper: f64, cells: usize) -> Result<Self> {
        if !(upper > 0.0) || cells == 0 {
            return Err(Error::InvalidParams("tabulation needs upper > 0 and cells >= 1".into()));
        }
        let h = upper.sqrt() / cells as f64;
        let opts = QuadOptions::with_rel_tol(1e-12).with_abs_tol(1e-15);
        let pieces = (0..cells)
            .into_par_iter()
            .map(|i| {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                let failure = RefCell::new(None);
                let r = adaptive(
                    |u| match density(u * u) {
                        Ok(v) => 2.0 * u * v,
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            0.0
                        }
                    },
                    a,
                    b,
                    &opts,
                );
                match failure.into_inner() {
                    Some(e) => Err(e),
                    None => Ok(r.value),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut values = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for piece in pieces {
            acc += piece;
            values.push(acc);
        }
        let roots = (0..=cells).map(|i| i as f64 * h).collect();
        Ok(Self { roots, values })
    }

    /// Fixed-trace CDF at unit trace on `[0, 1/N]`.
    pub fn fixed_trace(p: &EnsembleParams, cells: usize) -> Result<Self> {
        let upper = 1.0 / p.n_dim as f64;
        Self::from_density(|x| if x == 0.0 { Ok(0.0) } else { ftwl_density_unit(p, x) }, upper, cells)
    }

    /// WL CDF on `[0, upper]`; mass beyond `upper` is not included.
    pub fn wishart(p: &EnsembleParams, upper: f64, cells: usize) -> Result<Self> {
        Self::from_density(|x| if x == 0.0 { Ok(0.0) } else { wl_density(p, x) }, upper, cells)
    }

    pub fn total(&self) -> f64 {
        *self.values.last().expect("non-empty table")
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let r = x.sqrt();
        let last = self.roots.len() - 1;
        if r >= self.roots[last] {
            return self.values[last];
        }
        let i = self.roots.partition_point(|&v| v <= r) - 1;
        let t = (r - self.roots[i]) / (self.roots[i + 1] - self.roots[i]);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::determinant;

    #[test]
    fn gaussian_moments() {
        for beta in [Beta::One, Beta::Two] {
            let p = EnsembleParams::wl(100, 0, beta).unwrap();
            let mut rng = chunk_rng(5, 0);
            let mut vals = Vec::new();
            for _ in 0..100 {
                let g = gaussian_matrix(&p, &mut rng);
                vals.extend(g.re.iter().copied());
                if let Some(im) = &g.im {
                    vals.extend(im.iter().copied());
                }
            }
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let target = if beta == Beta::One { 1.0 } else { 0.5 };
            assert!(mean.abs() < 0.005, "{mean}");
            assert!((var / target - 1.0).abs() < 0.01, "{var}");
        }
    }

    #[test]
    fn deterministic() {
        let p = EnsembleParams::ft(3, 2, Beta::Two).unwrap();
        let a = gaussian_matrix(&p, &mut chunk_rng(9, 3));
        let b = gaussian_matrix(&p, &mut chunk_rng(9, 3));
        assert_eq!(a, b);
        let s1 = sample_min(&p, 3000, 17).unwrap();
        let s2 = sample_min(&p, 3000, 17).unwrap();
        assert_eq!(s1, s2);
        assert_ne!(s1.values, sample_min(&p, 3000, 18).unwrap().values);
    }

    #[test]
    fn small_eigen_examples() {
        assert_eq!(smallest_eig(&DMatrix::identity(3, 3)).unwrap(), 1.0);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![5.0, 2.0, 9.0]));
        assert_eq!(smallest_eig(&d).unwrap(), 2.0);
        assert!(smallest_eig(&DMatrix::zeros(2, 3)).is_err());
    }

    /// Number of eigenvalues below `x` from the LDLᵀ pivots of `W - xI`.
    fn count_below(w: &DMatrix<f64>, x: f64) -> usize {
        let n = w.nrows();
        let mut a = w - DMatrix::identity(n, n) * x;
        let mut neg = 0;
        for k in 0..n {
            let d = a[(k, k)];
            if d < 0.0 {
                neg += 1;
            }
            for i in (k + 1)..n {
                let l = a[(i, k)] / d;
                for j in (k + 1)..n {
                    a[(i, j)] -= l * a[(k, j)];
                }
            }
        }
        neg
    }

    #[test]
    fn smallest_eig_matches_bisection() {
        let p = EnsembleParams::wl(6, 2, Beta::One).unwrap();
        let mut rng = chunk_rng(21, 0);
        for _ in 0..10 {
            let w = gaussian_matrix(&p, &mut rng).wishart_embedding();
            let (mut lo, mut hi) = (0.0, w.trace());
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(&w, mid) >= 1 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let e = smallest_eig(&w).unwrap();
            assert!((e - 0.5 * (lo + hi)).abs() < 1e-9, "{e} {lo}");
            assert!(determinant(&(&w - DMatrix::identity(6, 6) * e)).unwrap().abs() < 1e-6 * w.norm().powi(6));
        }
    }

    #[test]
    fn hermitian_embedding_doubles_spectrum() {
        let p = EnsembleParams::wl(3, 1, Beta::Two).unwrap();
        let w = gaussian_matrix(&p, &mut chunk_rng(2, 0)).wishart_embedding();
        let e = symmetric_eigenvalues(&w).unwrap();
        for k in 0..3 {
            assert!((e[2 * k] - e[2 * k + 1]).abs() < 1e-10);
        }
    }

    #[test]
    fn one_by_one() {
        let ft = EnsembleParams::new(1, 1, Beta::One, EnsembleKind::Ft).unwrap();
        assert!(sample_min(&ft, 5000, 1).unwrap().values.iter().all(|&v| v == 1.0));
        for beta in [Beta::One, Beta::Two] {
            let wl = EnsembleParams::wl(1, 0, beta).unwrap();
            let b = sample_min(&wl, 100_000, 3).unwrap();
            let sd = if beta == Beta::One { 2f64.sqrt() } else { 1.0 };
            assert!((b.mean() - 1.0).abs() < 3.0 * sd / (b.len() as f64).sqrt(), "{}", b.mean());
        }
    }

    #[test]
    fn fixed_trace_values_and_pairing() {
        let p = EnsembleParams::ft(4, 1, Beta::One).unwrap();
        let draws = sample_draws(&p, 2000, 8).unwrap();
        let batch = sample_min(&p, 2000, 8).unwrap();
        for (d, v) in draws.iter().zip(&batch.values) {
            assert_eq!(d.lambda_min / d.trace, *v);
            assert!(*v > 0.0 && *v <= 0.25);
        }
    }

    #[test]
    fn ks_baselines() {
        let exp_cdf = |x: f64| 1.0 - (-x).exp();
        let inverse = |n: usize, seed: u64| -> Vec<f64> {
            let mut rng = chunk_rng(seed, 0);
            (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect()
        };
        assert!(ks_statistic(&inverse(100_000, 4), exp_cdf).unwrap() < 0.01);
        let c = ks_statistic(&[0.7; 50], exp_cdf).unwrap();
        assert!((c - exp_cdf(0.7).max(1.0 - exp_cdf(0.7))).abs() < 1e-15);
        let median = |n: usize| {
            let mut v: Vec<f64> = (0..20).map(|s| ks_statistic(&inverse(n, 100 + s), exp_cdf).unwrap()).collect();
            v.sort_by(f64::total_cmp);
            0.5 * (v[9] + v[10])
        };
        let ratio = median(4000) / median(8000);
        assert!(ratio > 1.1 && ratio < 1.9, "{ratio}");
    }

    #[test]
    fn two_by_two_fixed_trace_fit() {
        let p = EnsembleParams::ft(2, 0, Beta::One).unwrap();
        let batch = sample_min(&p, 100_000, 42).unwrap();
        let cdf = |x: f64| 2.0 * (x * (1.0 - x)).sqrt();
        let table = TabulatedCdf::fixed_trace(&p, 400).unwrap();
        assert!((table.total() - 1.0).abs() < 1e-9);
        for x in [0.01, 0.1, 0.3, 0.49] {
            assert!((table.eval(x) - cdf(x)).abs() < 1e-5);
        }
        assert!(ks_distance(&batch, cdf).unwrap() < 0.01);
        assert!(ks_distance(&batch, |x| table.eval(x)).unwrap() < 0.01);
    }
}
