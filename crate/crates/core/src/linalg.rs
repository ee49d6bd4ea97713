//! Dense kernels for small matrices: Pfaffians, determinants and the cyclic
//! Jacobi eigenvalue iteration.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Real antisymmetric matrix of even order.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    entries: DMatrix<f64>,
}

impl SkewMatrix {
    /// Builds the matrix from its strict upper triangle; the lower triangle
    /// is filled with exact negatives and the diagonal with zeros.
    pub fn from_upper<F: FnMut(usize, usize) -> f64>(order: usize, mut upper: F) -> Result<Self> {
        if order % 2 == 1 {
            return Err(Error::Matrix(format!("Pfaffian needs even order, got {order}")));
        }
        let mut entries = DMatrix::zeros(order, order);
        for i in 0..order {
            for j in (i + 1)..order {
                let v = upper(i, j);
                entries[(i, j)] = v;
                entries[(j, i)] = -v;
            }
        }
        Ok(Self { entries })
    }

    /// Wraps a matrix after checking exact antisymmetry and even order.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Matrix("skew matrix must be square".into()));
        }
        let n = entries.nrows();
        if n % 2 == 1 {
            return Err(Error::Matrix(format!("Pfaffian needs even order, got {n}")));
        }
        for i in 0..n {
            for j in i..n {
                if entries[(i, j)] != -entries[(j, i)] {
                    return Err(Error::Matrix(format!("entry ({i},{j}) breaks antisymmetry")));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Pfaffian by Parlett-Reid elimination with partial pivoting: each step
/// pivots the largest entry of the leading row into position `(k, k+1)` and
/// clears the rest of that row by a unit-triangular congruence.
pub fn pfaffian(a: &SkewMatrix) -> f64 {
    let n = a.order();
    let mut m = a.entries.clone();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        let (pivot, _) = (k + 1..n)
            .map(|j| (j, m[(k, j)].abs()))
            .fold((k + 1, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if pivot != k + 1 {
            m.swap_rows(k + 1, pivot);
            m.swap_columns(k + 1, pivot);
            pf = -pf;
        }
        let head = m[(k, k + 1)];
        if head == 0.0 {
            return 0.0;
        }
        pf *= head;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| m[(k, j)] / head).collect();
            let row: Vec<f64> = (k + 2..n).map(|j| m[(k + 1, j)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    m[(i, j)] += tau[jj] * row[ii] - tau[ii] * row[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// Determinant by LU factorisation with partial pivoting. The empty matrix
/// has determinant one.
pub fn determinant(a: &DMatrix<f64>) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Matrix("determinant of a non-square matrix".into()));
    }
    if a.nrows() == 0 {
        return Ok(1.0);
    }
    Ok(a.clone().lu().determinant())
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, in
/// ascending order. Iterates until the off-diagonal Frobenius norm drops
/// below `1e-12 ‖A‖_F`.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::Matrix("eigenvalues of a non-square matrix".into()));
    }
    let n = a.nrows();
    let mut m = a.clone();
    let scale = m.norm();
    let tol = 1e-12 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                m[(p, p)] -= t * apq;
                m[(q, q)] += t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let g = m[(r, p)];
                    let h = m[(r, q)];
                    let rp = g - s * (h + g * tau);
                    let rq = h + s * (g - h * tau);
                    m[(r, p)] = rp;
                    m[(p, r)] = rp;
                    m[(r, q)] = rq;
                    m[(q, r)] = rq;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}
