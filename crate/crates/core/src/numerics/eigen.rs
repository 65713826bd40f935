//! Eigenvalues of dense real matrices.
//!
//! Balancing, Householder reduction to upper Hessenberg form, then the Francis double-shift
//! QR iteration on the Hessenberg matrix. Only eigenvalues are computed.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::matrix::{dot, Matrix};
use crate::error::{Error, Result};

const MAX_ITERATIONS_PER_ROOT: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn norm(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn distance(&self, other: &Complex) -> f64 {
        (self.re - other.re).hypot(self.im - other.im)
    }
}

/// Eigenvalues sorted by descending magnitude (ties broken by real, then imaginary part).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpectrum {
    values: Vec<Complex>,
}

impl ComplexSpectrum {
    pub fn from_unsorted(mut values: Vec<Complex>) -> Self {
        values.sort_by(|a, b| {
            b.norm()
                .partial_cmp(&a.norm())
                .unwrap_or(Ordering::Equal)
                .then(b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal))
                .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
        });
        Self { values }
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(Complex::norm).collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.first().map_or(0.0, Complex::norm)
    }
}

pub fn eigenvalues(a: &Matrix) -> Result<ComplexSpectrum> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("eigenvalues of a {}x{} matrix", a.rows(), a.cols())));
    }
    if !a.is_finite() {
        return Err(Error::NumericalFailure("matrix has non-finite entries".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(ComplexSpectrum { values: vec![] });
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg_in_place(&mut h);
    let values = hessenberg_qr(&mut h)?;
    Ok(ComplexSpectrum::from_unsorted(values))
}

pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?.spectral_radius())
}

/// Rescales `a` so its spectral radius equals `rho`.
pub fn scale_to_spectral_radius(a: &Matrix, rho: f64) -> Result<Matrix> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!("target spectral radius must be > 0, got {rho}")));
    }
    let current = spectral_radius(a)?;
    if current <= f64::MIN_POSITIVE {
        return Err(Error::DegenerateMatrix("spectral radius is zero".into()));
    }
    Ok(a.scaled(rho / current))
}

/// Parlett-Reinsch balancing by powers of two (exact in floating point).
fn balance(a: &mut Matrix) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let n = a.rows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for v in a.row_mut(i) {
                    *v *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Orthogonal reduction to upper Hessenberg form with Householder reflectors.
pub fn hessenberg_in_place(a: &mut Matrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n - 2 {
        let m = n - k - 1;
        let col: Vec<f64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if col[0] >= 0.0 { -norm } else { norm };
        let v = &mut v[..m];
        v.copy_from_slice(&col);
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;

        // A <- H A on rows k+1..n, columns k..n
        let w = &mut w[..n - k];
        w.iter_mut().for_each(|x| *x = 0.0);
        for (idx, i) in (k + 1..n).enumerate() {
            let vi = v[idx];
            if vi != 0.0 {
                for (wj, aij) in w.iter_mut().zip(&a.row(i)[k..]) {
                    *wj += vi * aij;
                }
            }
        }
        for (idx, i) in (k + 1..n).enumerate() {
            let f = beta * v[idx];
            if f != 0.0 {
                for (aij, wj) in a.row_mut(i)[k..].iter_mut().zip(w.iter()) {
                    *aij -= f * wj;
                }
            }
        }
        // A <- A H on all rows, columns k+1..n
        for i in 0..n {
            let row = &mut a.row_mut(i)[k + 1..];
            let s = beta * dot(row, v);
            if s != 0.0 {
                for (aij, vj) in row.iter_mut().zip(v.iter()) {
                    *aij -= s * vj;
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

#[inline]
fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; destroys `h`.
fn hessenberg_qr(h: &mut Matrix) -> Result<Vec<Complex>> {
    let n = h.rows();
    let stride = n;
    let data = h.as_mut_slice();
    // 1-based accessor keeps the classical formulation readable.
    macro_rules! a {
        ($i:expr, $j:expr) => {
            data[($i - 1) * stride + ($j - 1)]
        };
    }
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];

    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a!(i, j).abs();
        }
    }

    // Subdiagonals below this are negligible relative to the whole matrix even when the local
    // diagonal is tiny (clusters of near-zero eigenvalues otherwise never deflate).
    let floor = f64::EPSILON * data.iter().map(|v| v * v).sum::<f64>().sqrt();

    let mut nn = n;
    let mut t = 0.0;
    let (mut p, mut q, mut r): (f64, f64, f64);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a!(l - 1, l - 1).abs() + a!(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a!(l, l - 1).abs() + s == s || a!(l, l - 1).abs() <= floor {
                    a!(l, l - 1) = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a!(nn, nn);
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
            } else {
                y = a!(nn - 1, nn - 1);
                w = a!(nn, nn - 1) * a!(nn - 1, nn);
                if l == nn - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != 0.0 {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = 0.0;
                        wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                } else {
                    if its >= MAX_ITERATIONS_PER_ROOT {
                        return Err(Error::NumericalFailure(format!(
                            "QR iteration did not converge: {its} iterations on the leading \
                             {nn}x{nn} block, subdiagonal {:e}",
                            a!(nn, nn - 1)
                        )));
                    }
                    if its > 0 && its % 10 == 0 {
                        t += x;
                        for i in 1..=nn {
                            a!(i, i) -= x;
                        }
                        let s = a!(nn, nn - 1).abs() + a!(nn - 1, nn - 2).abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    loop {
                        z = a!(m, m);
                        r = x - z;
                        let s0 = y - z;
                        p = (r * s0 - w) / a!(m + 1, m) + a!(m, m + 1);
                        q = a!(m + 1, m + 1) - z - r - s0;
                        r = a!(m + 2, m + 1);
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a!(m, m - 1).abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a!(m - 1, m - 1).abs() + z.abs() + a!(m + 1, m + 1).abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m + 2..=nn {
                        a!(i, i - 2) = 0.0;
                        if i != m + 2 {
                            a!(i, i - 3) = 0.0;
                        }
                    }
                    let mut k = m;
                    while k + 1 <= nn {
                        if k != m {
                            p = a!(k, k - 1);
                            q = a!(k + 1, k - 1);
                            r = 0.0;
                            if k != nn - 1 {
                                r = a!(k + 2, k - 1);
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a!(k, k - 1) = -a!(k, k - 1);
                                }
                            } else {
                                a!(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                p = a!(k, j) + q * a!(k + 1, j);
                                if k != nn - 1 {
                                    p += r * a!(k + 2, j);
                                    a!(k + 2, j) -= p * z;
                                }
                                a!(k + 1, j) -= p * y;
                                a!(k, j) -= p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a!(i, k) + y * a!(i, k + 1);
                                if k != nn - 1 {
                                    p += z * a!(i, k + 2);
                                    a!(i, k + 2) -= p * r;
                                }
                                a!(i, k + 1) -= p * q;
                                a!(i, k) -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    let out: Vec<Complex> = (1..=n).map(|i| Complex::new(wr[i], wi[i])).collect();
    if out.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NumericalFailure("QR iteration produced non-finite eigenvalues".into()));
    }
    Ok(out)
}
