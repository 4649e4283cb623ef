//! Dense real symmetric eigendecomposition.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! algorithm (the EISPACK `tred2`/`tql2` pair). Generic over [`Real`] so the
//! same code serves `f32` and `f64`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| *a * *b).sum())
            .collect()
    }

    /// Submatrix on the given rows/columns.
    pub fn select(&self, idx: &[usize]) -> Self {
        let mut m = Self::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m.set(a, b, self.get(i, j));
            }
        }
        m
    }
}

/// Eigenpairs sorted by ascending eigenvalue; `vectors[k]` is the unit
/// eigenvector for `values[k]`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
}

impl<T: Real> SymmetricEigen<T> {
    /// Decomposes the symmetric part of `a` (only the lower triangle is read).
    pub fn new(a: &SymMatrix<T>) -> Result<Self> {
        let n = a.dim();
        if n == 0 {
            return Ok(Self {
                values: Vec::new(),
                vectors: Vec::new(),
            });
        }
        let mut v: Vec<Vec<T>> = (0..n)
            .map(|i| (0..n).map(|j| if j <= i { a.get(i, j) } else { a.get(j, i) }).collect())
            .collect();
        let mut d = vec![T::zero(); n];
        let mut e = vec![T::zero(); n];
        tred2(&mut v, &mut d, &mut e);
        // tql2 rotates pairs of columns; work on the transpose so they are rows
        let mut w: Vec<Vec<T>> = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
        tql2(&mut w, &mut d, &mut e)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| d[x].partial_cmp(&d[y]).unwrap_or(std::cmp::Ordering::Equal));
        Ok(Self {
            values: order.iter().map(|&k| d[k]).collect(),
            vectors: order.into_iter().map(|k| std::mem::take(&mut w[k])).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Coefficients `⟨v_k, x⟩` of `x` in the eigenbasis.
    pub fn project(&self, x: &[T]) -> Vec<T> {
        self.vectors
            .iter()
            .map(|v| v.iter().zip(x).map(|(a, b)| *a * *b).sum())
            .collect()
    }

    /// `Σ_k f(λ_k)·c_k·v_k` for coefficients `c` from [`project`](Self::project).
    pub fn synthesize(&self, coeffs: &[T], f: impl Fn(T) -> T) -> Vec<T> {
        let n = self.dim();
        let mut out = vec![T::zero(); n];
        for ((lambda, c), v) in self.values.iter().zip(coeffs).zip(&self.vectors) {
            let w = f(*lambda) * *c;
            if w == T::zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(v) {
                *o = *o + w * *x;
            }
        }
        out
    }
}

fn tred2<T: Real>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in d.iter().take(i) {
            scale = scale + dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
                v[j][i] = T::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk = *dk / scale;
                h = h + *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g = g + v[k][j] * d[k];
                    e[k] = e[k] + v[k][j] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] = v[k][j] - (f * e[k] + g * d[k]);
                }
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] = v[k][j] - g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = T::zero();
    }
    v[n - 1][n - 1] = T::one();
    e[0] = T::zero();
}

/// `w` holds eigenvectors as rows (transpose of the `tred2` output).
fn tql2<T: Real>(w: &mut [Vec<T>], d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (e[l] + e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = w.split_at_mut(i + 1);
                    let wi = &mut lo[i];
                    let wi1 = &mut hi[0];
                    for (a, b) in wi.iter_mut().zip(wi1.iter_mut()) {
                        let hb = *b;
                        *b = s * *a + c * hb;
                        *a = c * *a - s * hb;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
    Ok(())
}
