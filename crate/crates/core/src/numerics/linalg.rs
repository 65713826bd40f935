//! Dense factorizations and ridge regression.
//!
//! The readout of every reservoir variant is fitted by Tikhonov-regularized least squares,
//! `W = Y Xᵀ (X Xᵀ + β I)⁻¹`. The inverse is never formed: the regularized Gram matrix is
//! factored with Cholesky and the normal equations are solved by substitution, with a
//! partially pivoted LU fallback when rounding makes the Cholesky pivots non-positive.

use super::matrix::{dot, gemm, Matrix};
use crate::error::{Error, Result};

/// Relative pivot size below which an unregularized system counts as singular.
const SINGULAR_RTOL: f64 = 1e-13;

/// In-place Cholesky factorization of a symmetric positive-definite matrix.
/// On success the lower triangle of the returned matrix holds `L` with `A = L Lᵀ`.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Dimension("cholesky of a non-square matrix".into()));
    }
    let n = a.rows();
    let mut l = a.clone();
    let max_diag = (0..n).fold(0.0f64, |m, i| m.max(a[(i, i)].abs()));
    let floor = max_diag * SINGULAR_RTOL;
    for j in 0..n {
        let row_j = l.row_mut(j);
        let d = row_j[j] - dot(&row_j[..j], &row_j[..j]);
        if !(d > floor) {
            return Err(Error::SingularSystem { row: j });
        }
        let d = d.sqrt();
        row_j[j] = d;
        for v in &mut row_j[j + 1..] {
            *v = 0.0;
        }
        let lj = l.row(j)[..j].to_vec();
        for i in j + 1..n {
            let row_i = l.row_mut(i);
            let s = row_i[j] - dot(&row_i[..j], &lj);
            row_i[j] = s / d;
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` for each column of `b` (given as rows of `rhs`, i.e. `rhs` is k×n).
fn cholesky_solve_rows(l: &Matrix, rhs: &mut Matrix) {
    let n = l.rows();
    for r in 0..rhs.rows() {
        let x = rhs.row_mut(r);
        for i in 0..n {
            let s = x[i] - dot(&l.row(i)[..i], &x[..i]);
            x[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= l[(k, i)] * x[k];
            }
            x[i] = s / l[(i, i)];
        }
    }
}

/// LU factorization with partial pivoting, `P A = L U`, packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    /// `singular_rtol` is the relative pivot size treated as zero; pass `0.0` to only reject
    /// exact zero pivots.
    pub fn factor(a: &Matrix, singular_rtol: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension("LU of a non-square matrix".into()));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 || pmax <= singular_rtol * scale {
                return Err(Error::SingularSystem { row: k });
            }
            if p != k {
                perm.swap(p, k);
                let data = lu.as_mut_slice();
                for j in 0..n {
                    data.swap(p * n + j, k * n + j);
                }
            }
            let pivot_row = lu.row(k)[k..].to_vec();
            for i in k + 1..n {
                let row = lu.row_mut(i);
                let f = row[k] / pivot_row[0];
                row[k] = f;
                if f != 0.0 {
                    for (dst, src) in row[k + 1..].iter_mut().zip(&pivot_row[1..]) {
                        *dst -= f * src;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = dot(&self.lu.row(i)[..i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s = dot(&self.lu.row(i)[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }
}

/// Solves `A X = B` for square `A`.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows() != b.rows() {
        return Err(Error::Dimension("right-hand side row count mismatch".into()));
    }
    let lu = Lu::factor(a, SINGULAR_RTOL)?;
    let bt = b.transpose();
    let mut out = Matrix::zeros(b.cols(), b.rows());
    for c in 0..b.cols() {
        out.row_mut(c).copy_from_slice(&lu.solve(bt.row(c)));
    }
    Ok(out.transpose())
}

/// Solves `W G = C` for symmetric `G` (returns W with the shape of `C`).
fn solve_symmetric_right(gram: &Matrix, cross: &Matrix, regularized: bool) -> Result<Matrix> {
    match cholesky(gram) {
        Ok(l) => {
            let mut w = cross.clone();
            cholesky_solve_rows(&l, &mut w);
            Ok(w)
        }
        Err(_) => {
            let lu = Lu::factor(gram, if regularized { 0.0 } else { SINGULAR_RTOL })?;
            let mut w = cross.clone();
            for r in 0..w.rows() {
                let sol = lu.solve(cross.row(r));
                w.row_mut(r).copy_from_slice(&sol);
            }
            Ok(w)
        }
    }
}

/// Ridge regression readout `W = Y Xᵀ (X Xᵀ + β I)⁻¹`.
///
/// `x` is F×L (one feature vector per column), `y` is D×L; the result is D×F.
pub fn ridge_solve(x: &Matrix, y: &Matrix, beta: f64) -> Result<Matrix> {
    if x.cols() != y.cols() || x.cols() == 0 {
        return Err(Error::Dimension(format!(
            "features have {} columns, targets {}",
            x.cols(),
            y.cols()
        )));
    }
    check_beta(beta)?;
    let mut gram = x.matmul_transposed(x)?;
    let cross = y.matmul_transposed(x)?;
    for i in 0..gram.rows() {
        gram[(i, i)] += beta;
    }
    solve_symmetric_right(&gram, &cross, beta > 0.0)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("regularization must be >= 0, got {beta}")));
    }
    Ok(())
}

/// Streaming accumulator for the ridge normal equations.
///
/// Samples are supplied row-wise (one feature vector per row), so very long training sets
/// can be folded in chunks without materializing the full F×L design matrix.
#[derive(Debug, Clone)]
pub struct RidgeAccumulator {
    features: usize,
    targets: usize,
    gram: Matrix,
    cross: Matrix,
    samples: usize,
}

impl RidgeAccumulator {
    pub fn new(features: usize, targets: usize) -> Self {
        Self {
            features,
            targets,
            gram: Matrix::zeros(features, features),
            cross: Matrix::zeros(targets, features),
            samples: 0,
        }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn features(&self) -> usize {
        self.features
    }

    /// Adds `count` samples; `feature_rows` is count×F and `target_rows` count×D, row-major.
    pub fn add_rows(&mut self, feature_rows: &[f64], target_rows: &[f64], count: usize) -> Result<()> {
        let (f, d) = (self.features, self.targets);
        if feature_rows.len() != count * f || target_rows.len() != count * d {
            return Err(Error::Dimension(format!(
                "expected {count} rows of {f} features and {d} targets"
            )));
        }
        if count == 0 {
            return Ok(());
        }
        // gram += Sᵀ S with S = count×F
        gemm(
            f,
            count,
            f,
            feature_rows,
            (1, f as isize),
            feature_rows,
            (f as isize, 1),
            self.gram.as_mut_slice(),
        );
        // cross += Tᵀ S with T = count×D
        gemm(
            d,
            count,
            f,
            target_rows,
            (1, d as isize),
            feature_rows,
            (f as isize, 1),
            self.cross.as_mut_slice(),
        );
        self.samples += count;
        Ok(())
    }

    pub fn merge(&mut self, other: &RidgeAccumulator) -> Result<()> {
        if other.features != self.features || other.targets != self.targets {
            return Err(Error::Dimension("accumulator shapes differ".into()));
        }
        for (a, b) in self.gram.as_mut_slice().iter_mut().zip(other.gram.as_slice()) {
            *a += b;
        }
        for (a, b) in self.cross.as_mut_slice().iter_mut().zip(other.cross.as_slice()) {
            *a += b;
        }
        self.samples += other.samples;
        Ok(())
    }

    /// Returns the D×F readout for regularization `beta`.
    pub fn solve(&self, beta: f64) -> Result<Matrix> {
        check_beta(beta)?;
        if self.samples == 0 {
            return Err(Error::DataTooShort { needed: 1, got: 0 });
        }
        let mut gram = self.gram.clone();
        for i in 0..self.features {
            gram[(i, i)] += beta;
        }
        solve_symmetric_right(&gram, &self.cross, beta > 0.0)
    }
}

/// Ridge sums kept as the triangular factor of the design matrix instead of its Gram matrix.
///
/// Each sample row is rotated into `R` with Givens rotations, so `Rᵀ R = Xᵀ X` holds without
/// squaring the conditioning of `X`. Directions the data barely excites stay near zero in the
/// readout even for tiny `β`, where the Gram path picks up rounding noise of order
/// `ε·‖X‖²/β`. Folding a row costs `O(F²)`, so this only suits small feature counts.
#[derive(Debug, Clone)]
pub struct QrRidgeAccumulator {
    features: usize,
    targets: usize,
    /// F×F upper triangle.
    r: Matrix,
    /// F×D, the rotated targets.
    z: Matrix,
    samples: usize,
}

impl QrRidgeAccumulator {
    pub fn new(features: usize, targets: usize) -> Self {
        Self {
            features,
            targets,
            r: Matrix::zeros(features, features),
            z: Matrix::zeros(features, targets),
            samples: 0,
        }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn add_rows(&mut self, feature_rows: &[f64], target_rows: &[f64], count: usize) -> Result<()> {
        let (f, d) = (self.features, self.targets);
        if feature_rows.len() != count * f || target_rows.len() != count * d {
            return Err(Error::Dimension(format!(
                "expected {count} rows of {f} features and {d} targets"
            )));
        }
        let mut x = vec![0.0; f];
        let mut y = vec![0.0; d];
        for k in 0..count {
            x.copy_from_slice(&feature_rows[k * f..(k + 1) * f]);
            y.copy_from_slice(&target_rows[k * d..(k + 1) * d]);
            givens_fold(&mut self.r, &mut self.z, &mut x, &mut y);
        }
        self.samples += count;
        Ok(())
    }

    pub fn merge(&mut self, other: &QrRidgeAccumulator) -> Result<()> {
        if other.features != self.features || other.targets != self.targets {
            return Err(Error::Dimension("accumulator shapes differ".into()));
        }
        for i in 0..self.features {
            let mut x = other.r.row(i).to_vec();
            let mut y = other.z.row(i).to_vec();
            givens_fold(&mut self.r, &mut self.z, &mut x, &mut y);
        }
        self.samples += other.samples;
        Ok(())
    }

    /// Least-squares solution of `[X; √β I] Wᵀ = [Y; 0]`, returned as D×F.
    pub fn solve(&self, beta: f64) -> Result<Matrix> {
        check_beta(beta)?;
        if self.samples == 0 {
            return Err(Error::DataTooShort { needed: 1, got: 0 });
        }
        let (f, d) = (self.features, self.targets);
        let mut r = self.r.clone();
        let mut z = self.z.clone();
        if beta > 0.0 {
            let root = beta.sqrt();
            let mut y = vec![0.0; d];
            for i in 0..f {
                let mut x = vec![0.0; f];
                x[i] = root;
                y.iter_mut().for_each(|v| *v = 0.0);
                givens_fold(&mut r, &mut z, &mut x, &mut y);
            }
        }
        let max_diag = (0..f).fold(0.0f64, |m, i| m.max(r[(i, i)].abs()));
        let mut w = Matrix::zeros(d, f);
        for i in (0..f).rev() {
            let p = r[(i, i)];
            if !(p.abs() > max_diag * SINGULAR_RTOL) {
                return Err(Error::SingularSystem { row: i });
            }
            for c in 0..d {
                let mut s = z[(i, c)];
                for j in i + 1..f {
                    s -= r[(i, j)] * w[(c, j)];
                }
                w[(c, i)] = s / p;
            }
        }
        Ok(w)
    }
}

/// Rotates the row `(x, y)` into the triangle `r` and the rotated targets `z`.
fn givens_fold(r: &mut Matrix, z: &mut Matrix, x: &mut [f64], y: &mut [f64]) {
    let f = x.len();
    for j in 0..f {
        if x[j] == 0.0 {
            continue;
        }
        let a = r[(j, j)];
        let h = a.hypot(x[j]);
        let (c, s) = (a / h, x[j] / h);
        let row = r.row_mut(j);
        for k in j..f {
            let (rk, xk) = (row[k], x[k]);
            row[k] = c * rk + s * xk;
            x[k] = c * xk - s * rk;
        }
        let zrow = z.row_mut(j);
        for (zk, yk) in zrow.iter_mut().zip(y.iter_mut()) {
            let (a, b) = (*zk, *yk);
            *zk = c * a + s * b;
            *yk = c * b - s * a;
        }
    }
}

/// Either ridge accumulator behind one interface.
#[derive(Debug, Clone)]
pub enum RidgeSums {
    Gram(RidgeAccumulator),
    Qr(QrRidgeAccumulator),
}

impl RidgeSums {
    /// Picks the triangular accumulator up to `qr_limit` features.
    pub fn new(features: usize, targets: usize, qr_limit: usize) -> Self {
        if features <= qr_limit {
            RidgeSums::Qr(QrRidgeAccumulator::new(features, targets))
        } else {
            RidgeSums::Gram(RidgeAccumulator::new(features, targets))
        }
    }

    pub fn add_rows(&mut self, feature_rows: &[f64], target_rows: &[f64], count: usize) -> Result<()> {
        match self {
            RidgeSums::Gram(a) => a.add_rows(feature_rows, target_rows, count),
            RidgeSums::Qr(a) => a.add_rows(feature_rows, target_rows, count),
        }
    }

    pub fn samples(&self) -> usize {
        match self {
            RidgeSums::Gram(a) => a.samples(),
            RidgeSums::Qr(a) => a.samples(),
        }
    }

    pub fn solve(&self, beta: f64) -> Result<Matrix> {
        match self {
            RidgeSums::Gram(a) => a.solve(beta),
            RidgeSums::Qr(a) => a.solve(beta),
        }
    }
}
