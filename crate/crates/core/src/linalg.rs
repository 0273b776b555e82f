//! Small sparse linear algebra: triplet assembly, banded LU with partial
//! pivoting, banded Cholesky, Thomas solves and Jacobi-preconditioned
//! conjugate gradients.

use crate::error::{Error, Result};

/// Coordinate-format sparse matrix; duplicate entries are summed.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|&(i, j, v)| (j, i, v)).collect(),
        }
    }

    /// y = A x
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    /// Banded copy after renumbering rows/columns through `perm` (old -> new).
    pub fn to_banded(&self, perm: Option<&[usize]>) -> BandedMatrix {
        let map = |i: usize| perm.map_or(i, |p| p[i]);
        let (mut kl, mut ku) = (0usize, 0usize);
        for &(i, j, _) in &self.entries {
            let (i, j) = (map(i), map(j));
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let mut b = BandedMatrix::zeros(self.n, kl, ku);
        for &(i, j, v) in &self.entries {
            b.add(map(i), map(j), v);
        }
        b
    }

    /// Lower band of a symmetric matrix; entries above the diagonal are
    /// ignored.
    pub fn to_sym_banded(&self) -> SymBandMatrix {
        let bw = self
            .entries
            .iter()
            .filter(|e| e.0 >= e.1)
            .fold(0, |m, &(i, j, _)| m.max(i - j));
        let mut b = SymBandMatrix {
            n: self.n,
            bw,
            data: vec![0.0; self.n * (bw + 1)],
        };
        for &(i, j, v) in &self.entries {
            if i >= j {
                b.data[i * (bw + 1) + bw - (i - j)] += v;
            }
        }
        b
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut sorted = self.entries.clone();
        sorted.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols = Vec::with_capacity(sorted.len());
        let mut vals: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *vals.last_mut().expect("previous entry") += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n: self.n,
            row_ptr,
            cols,
            vals,
        }
    }
}

/// Square band matrix with room for the fill produced by row pivoting.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j + self.kl - i < self.width);
        i * self.width + (j + self.kl - i)
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.kl + self.ku {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Solves A x = b by Gaussian elimination with partial pivoting,
    /// consuming the matrix.
    pub fn solve(mut self, mut b: Vec<f64>) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::Shape {
                what: "right-hand side",
                expected: n,
                got: b.len(),
            });
        }
        let (kl, ku, w) = (self.kl, self.ku, self.width);
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut piv = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if !(best > scale * 1e-300) || best == 0.0 {
                return Err(Error::LinearSolver(format!("singular matrix at pivot {k}")));
            }
            if piv != k {
                for j in k..=last_col {
                    let a = self.idx(k, j);
                    let c = self.idx(piv, j);
                    self.data.swap(a, c);
                }
                b.swap(k, piv);
            }
            let d = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let l = self.data[ik] / d;
                if l == 0.0 {
                    continue;
                }
                self.data[ik] = 0.0;
                let row_k = k * w + kl - k;
                let row_i = i * w + kl - i;
                for j in k + 1..=last_col {
                    self.data[row_i + j] -= l * self.data[row_k + j];
                }
                b[i] -= l * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let last_col = (k + kl + ku).min(n - 1);
            let row = k * w + kl - k;
            let mut s = b[k];
            for j in k + 1..=last_col {
                s -= self.data[row + j] * x[j];
            }
            x[k] = s / self.data[row + k];
        }
        Ok(x)
    }
}

/// Symmetric band matrix, row i holding columns i - bw ..= i.
#[derive(Debug, Clone)]
pub struct SymBandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBandMatrix {
    /// Cholesky solve; fails if the matrix is not numerically positive definite.
    pub fn cholesky_solve(mut self, mut b: Vec<f64>) -> Result<Vec<f64>> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        if b.len() != n {
            return Err(Error::Shape {
                what: "right-hand side",
                expected: n,
                got: b.len(),
            });
        }
        let d = &mut self.data;
        for i in 0..n {
            let first = i.saturating_sub(bw);
            for j in first..=i {
                // L[i][j] = (A[i][j] - sum_k L[i][k] L[j][k]) / L[j][j]
                let k0 = first.max(j.saturating_sub(bw));
                let (ri, rj) = (i * w + bw - i, j * w + bw - j);
                let mut s = d[ri + j];
                for k in k0..j {
                    s -= d[ri + k] * d[rj + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::LinearSolver(format!(
                            "not positive definite at row {i}"
                        )));
                    }
                    d[ri + i] = s.sqrt();
                } else {
                    d[ri + j] = s / d[rj + j];
                }
            }
        }
        for i in 0..n {
            let ri = i * w + bw - i;
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= d[ri + k] * b[k];
            }
            b[i] = s / d[ri + i];
        }
        for i in (0..n).rev() {
            let ri = i * w + bw - i;
            b[i] /= d[ri + i];
            let bi = b[i];
            for k in i.saturating_sub(bw)..i {
                b[k] -= d[ri + k] * bi;
            }
        }
        Ok(b)
    }
}

/// Thomas algorithm for a tridiagonal system (`lower[0]` and `upper[n-1]`
/// are ignored). Intended for diagonally dominant matrices.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::LinearSolver(
            "tridiagonal operands differ in length".into(),
        ));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    for i in 0..n {
        if i > 0 {
            denom = diag[i] - lower[i] * c[i - 1];
        }
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::LinearSolver(format!("zero pivot in row {i}")));
        }
        c[i] = upper[i] / denom;
        d[i] = (rhs[i] - if i > 0 { lower[i] * d[i - 1] } else { 0.0 }) / denom;
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.cols[k] == i)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned CG for a symmetric positive definite system,
/// starting from `x`. Stops when ||r|| <= tol ||b||. Returns the iteration count.
pub fn pcg(a: &CsrMatrix, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<usize> {
    let n = a.n;
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let mut r = vec![0.0; n];
    a.mul(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    for it in 0..max_iter {
        if dot(&r, &r).sqrt() <= tol * bnorm {
            return Ok(it);
        }
        a.mul(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::LinearSolver(
                "matrix is not positive definite".into(),
            ));
        }
        let step = rz / pq;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * q[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if dot(&r, &r).sqrt() <= tol * bnorm {
        return Ok(max_iter);
    }
    Err(Error::LinearSolver(format!(
        "conjugate gradients did not reach tolerance {tol:e} in {max_iter} iterations"
    )))
}
