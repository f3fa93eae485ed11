//! Dense matrices over a [`Scalar`] backend.
//!
//! Row-major storage; `entries.len() == rows * cols` always holds. Kernel and
//! image bases come from Gauss-Jordan elimination, which is exact on the
//! exact backend. Rank queries on the floating backend go through an SVD with
//! the default tolerance and a singular-value gap check.

use nalgebra::DMatrix;
use num::complex::Complex64;

use crate::scalar::Scalar;

#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    entries: Vec<S>,
}

impl<S: std::fmt::Debug> std::fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> =
                (0..self.cols).map(|c| format!("{:?}", self.entries[r * self.cols + c])).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Result of Gauss-Jordan elimination.
pub struct Echelon<S> {
    pub reduced: Matrix<S>,
    /// Pivot column index per pivot row, in order.
    pub pivots: Vec<usize>,
}

impl<S: Scalar> Matrix<S> {
    pub fn new(rows: usize, cols: usize, entries: Vec<S>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        Self { rows, cols, entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![S::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { S::one() } else { S::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    /// Column vector.
    pub fn from_col(v: Vec<S>) -> Self {
        let r = v.len();
        Self::new(r, 1, v)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &S {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero_val())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix::new(self.rows, self.cols, self.entries.iter().map(f).collect())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.at(c, r).clone())
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.at(c, r).conjugate())
    }

    pub fn scale(&self, s: &S) -> Self {
        Self::new(
            self.rows,
            self.cols,
            self.entries.iter().map(|e| e.clone() * s.clone()).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::new(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::new(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(self.rows, self.cols, self.entries.iter().map(|e| -e.clone()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        Self::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = S::zero();
            for k in 0..self.cols {
                acc = acc + self.at(r, k).clone() * other.at(k, c).clone();
            }
            acc
        })
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Frobenius pairing `tr(self * other^dagger)`.
    pub fn frob_inner(&self, other: &Self) -> S {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut acc = S::zero();
        for (a, b) in self.entries.iter().zip(&other.entries) {
            acc = acc + a.clone() * b.conjugate();
        }
        acc
    }

    pub fn frob_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.magnitude().powi(2)).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> S {
        assert_eq!(self.rows, self.cols);
        let mut acc = S::zero();
        for k in 0..self.rows {
            acc = acc + self.at(k, k).clone();
        }
        acc
    }

    /// Horizontal concatenation.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.at(r, c).clone()
            } else {
                other.at(r, c - self.cols).clone()
            }
        })
    }

    pub fn column(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<S>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn from_cols(cols: Vec<Vec<S>>, rows: usize) -> Self {
        assert!(cols.iter().all(|c| c.len() == rows));
        Self::from_fn(rows, cols.len(), |r, c| cols[c][r].clone())
    }

    /// Largest entry magnitude; elimination thresholds are relative to it.
    fn max_magnitude(&self) -> f64 {
        self.entries.iter().map(|e| e.magnitude()).fold(0.0, f64::max)
    }

    fn treat_as_zero(e: &S, scale: f64) -> bool {
        if S::EXACT {
            e.is_zero_val()
        } else {
            e.magnitude() <= S::tol() * scale.max(1.0)
        }
    }

    /// Gauss-Jordan reduction with max-magnitude pivoting.
    pub fn rref(&self) -> Echelon<S> {
        let mut m = self.clone();
        let scale = m.max_magnitude();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row >= m.rows {
                break;
            }
            // best pivot in this column at or below `row`
            let mut best: Option<(usize, f64)> = None;
            for r in row..m.rows {
                let e = m.at(r, col);
                if !Self::treat_as_zero(e, scale) {
                    let mag = e.magnitude();
                    if best.map_or(true, |(_, bm)| mag > bm) {
                        best = Some((r, mag));
                    }
                }
            }
            let Some((prow, _)) = best else { continue };
            m.swap_rows(row, prow);
            let inv = m.at(row, col).invert().expect("pivot invertible");
            for c in 0..m.cols {
                let v = m.at(row, c).clone() * inv.clone();
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r != row && !m.at(r, col).is_zero_val() {
                    let factor = m.at(r, col).clone();
                    for c in 0..m.cols {
                        let v = m.at(r, c).clone() - factor.clone() * m.at(row, c).clone();
                        m.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { reduced: m, pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Rank. Exact backend: pivot count of the exact elimination. Floating
    /// backend: singular values above `tol * max(1, sigma_max)`, with the
    /// gap between the last kept and first dropped value required to exceed
    /// 1e6 (borderline spectra fall back to the elimination count).
    pub fn rank(&self) -> usize {
        if S::EXACT {
            return self.rref().pivots.len();
        }
        let svals = self.singular_values();
        if svals.is_empty() {
            return 0;
        }
        let cut = S::tol() * svals[0].max(1.0);
        let r = svals.iter().take_while(|&&s| s > cut).count();
        // confirm with the spectral gap when values were dropped
        if r > 0 && r < svals.len() && svals[r] > 0.0 && svals[r - 1] / svals[r] < 1e6 {
            // ambiguous spectrum; elimination at the same tolerance decides
            return self.rref().pivots.len();
        }
        r
    }

    /// Singular values in descending order (via `nalgebra`).
    pub fn singular_values(&self) -> Vec<f64> {
        if self.rows == 0 || self.cols == 0 {
            return Vec::new();
        }
        let m = self.to_nalgebra();
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.at(r, c).to_c64())
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }

    /// Basis of the kernel, as column vectors. Exact on the exact backend.
    pub fn kernel_basis(&self) -> Vec<Vec<S>> {
        let ech = self.rref();
        let pivot_set: Vec<usize> = ech.pivots.clone();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![S::zero(); self.cols];
            v[free] = S::one();
            for (prow, &pcol) in pivot_set.iter().enumerate() {
                v[pcol] = -ech.reduced.at(prow, free).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Columns of `self` spanning the image (pivot columns).
    pub fn image_basis(&self) -> Vec<Vec<S>> {
        let ech = self.rref();
        ech.pivots.iter().map(|&c| self.column(c)).collect()
    }

    /// Solve `self * x = rhs` for each column of `rhs`; `None` if inconsistent.
    pub fn solve(&self, rhs: &Matrix<S>) -> Option<Matrix<S>> {
        assert_eq!(self.rows, rhs.rows);
        let aug = self.hstack(rhs);
        let ech = aug.rref();
        // inconsistent if a pivot falls in the rhs block
        if ech.pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = Matrix::zeros(self.cols, rhs.cols);
        for (prow, &pcol) in ech.pivots.iter().enumerate() {
            for c in 0..rhs.cols {
                x.set(pcol, c, ech.reduced.at(prow, self.cols + c).clone());
            }
        }
        Some(x)
    }

    /// Inverse of a square matrix; `None` if singular.
    pub fn inverse(&self) -> Option<Matrix<S>> {
        assert_eq!(self.rows, self.cols);
        let x = self.solve(&Matrix::identity(self.rows))?;
        if self.mul(&x).sub(&Matrix::identity(self.rows)).max_magnitude() > 1e-8 && !S::EXACT {
            return None;
        }
        Some(x)
    }

    /// Orthogonal projector onto the column span of `basis` (standard
    /// Hermitian inner product): `B (B^dagger B)^-1 B^dagger`.
    pub fn projector_onto_columns(basis: &Matrix<S>) -> Matrix<S> {
        if basis.cols == 0 {
            return Matrix::zeros(basis.rows, basis.rows);
        }
        let gram = basis.dagger().mul(basis);
        let gram_inv = gram.inverse().expect("basis columns independent");
        basis.mul(&gram_inv).mul(&basis.dagger())
    }

    /// Coordinates of the orthogonal projection of `v` onto the column span
    /// of `basis`, i.e. the least-squares solution of `basis * c = v`.
    pub fn project_coords(basis: &Matrix<S>, v: &Matrix<S>) -> Matrix<S> {
        let gram = basis.dagger().mul(basis);
        let rhs = basis.dagger().mul(v);
        gram.solve(&rhs).expect("gram system consistent")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Exact, Float};
    use num::complex::Complex64;

    fn exact_from_ints(rows: usize, cols: usize, vals: &[i64]) -> Matrix<Exact> {
        Matrix::new(rows, cols, vals.iter().map(|&v| Exact::from_int(v)).collect())
    }

    #[test]
    fn kernel_of_zero_map_is_full() {
        let m = exact_from_ints(1, 1, &[0]);
        assert_eq!(m.kernel_basis().len(), 1);
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        for n in 1..4 {
            let m: Matrix<Exact> = Matrix::identity(n);
            assert!(m.kernel_basis().is_empty());
        }
    }

    #[test]
    fn kernel_of_row_1_1() {
        // [[1, 1]] -> kernel spanned by (1, -1) up to scale
        let m = exact_from_ints(1, 2, &[1, 1]);
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        let ratio = v[0].clone() * v[1].invert().unwrap();
        assert_eq!(ratio, Exact::from_int(-1));
    }

    #[test]
    fn rank_nullity_exact() {
        let m = exact_from_ints(3, 4, &[1, 2, 3, 4, 2, 4, 6, 8, 0, 1, 0, 1]);
        assert_eq!(m.rank() + m.kernel_basis().len(), m.cols());
        assert_eq!(m.rank(), 2);
        // every kernel vector is actually killed
        for v in m.kernel_basis() {
            let prod = m.mul(&Matrix::from_col(v));
            assert!(prod.is_zero());
        }
    }

    #[test]
    fn float_rank_uses_svd_tolerance() {
        let m: Matrix<Float> = Matrix::from_rows(vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(1e-13, 0.0)],
        ]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn solve_and_inverse() {
        let m = exact_from_ints(2, 2, &[1, 2, 3, 5]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(2));
        let rhs = exact_from_ints(2, 1, &[1, 0]);
        let x = m.solve(&rhs).unwrap();
        assert_eq!(m.mul(&x), rhs);
    }

    #[test]
    fn projector_is_idempotent() {
        let b = exact_from_ints(3, 1, &[1, 1, 0]);
        let p = Matrix::projector_onto_columns(&b);
        assert_eq!(p.mul(&p), p);
        assert_eq!(p.dagger(), p);
    }
}
