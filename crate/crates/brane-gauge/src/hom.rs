//! Bounded complexes of free modules and their Hom complexes.
//!
//! `Hom^m(A, B) = prod_p Hom(A^p, B^(p+m))` with differential
//! `(d_H g)^p = d_B g^p + (-1)^(m+1) g^(p+1) d_A`. Cohomology is computed by
//! flattening each `Hom^m` into one coordinate space and running kernel/image
//! linear algebra there; representatives are minimum-norm in their coset, so
//! bases are canonical.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum HomError {
    #[error("dimension mismatch at position {position}: block is {got_rows}x{got_cols}, expected {want_rows}x{want_cols}")]
    DimensionMismatch {
        position: i32,
        got_rows: usize,
        got_cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
}

/// A bounded complex of free modules with constant-matrix differentials.
/// `diff(p)` maps the term at `p` to the term at `p + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleComplex<S> {
    ranks: BTreeMap<i32, usize>,
    diffs: BTreeMap<i32, Matrix<S>>,
}

impl<S: Scalar> ModuleComplex<S> {
    pub fn new(ranks: BTreeMap<i32, usize>, diffs: BTreeMap<i32, Matrix<S>>) -> Self {
        let mut ranks = ranks;
        ranks.retain(|_, r| *r > 0);
        let c = Self { ranks, diffs };
        for v in c.validate() {
            panic!("invalid complex: {v}");
        }
        c
    }

    /// Single term of rank `r` at degree `deg`.
    pub fn single(deg: i32, r: usize) -> Self {
        let mut ranks = BTreeMap::new();
        ranks.insert(deg, r);
        Self::new(ranks, BTreeMap::new())
    }

    pub fn validate_raw(ranks: &BTreeMap<i32, usize>, diffs: &BTreeMap<i32, Matrix<S>>) -> Vec<String> {
        let rank = |p: i32| ranks.get(&p).copied().unwrap_or(0);
        let mut violations = Vec::new();
        for (&p, d) in diffs {
            if d.rows() != rank(p + 1) || d.cols() != rank(p) {
                violations.push(format!(
                    "differential at {p} is {}x{}, expected {}x{}",
                    d.rows(),
                    d.cols(),
                    rank(p + 1),
                    rank(p)
                ));
                continue;
            }
            if let Some(next) = diffs.get(&(p + 1)) {
                if next.cols() == d.rows() && !next.mul(d).is_zero() {
                    violations.push(format!("d^{} . d^{} != 0", p + 1, p));
                }
            }
        }
        violations
    }

    pub fn validate(&self) -> Vec<String> {
        Self::validate_raw(&self.ranks, &self.diffs)
    }

    pub fn ranks(&self) -> &BTreeMap<i32, usize> {
        &self.ranks
    }

    pub fn rank(&self, p: i32) -> usize {
        self.ranks.get(&p).copied().unwrap_or(0)
    }

    pub fn diff(&self, p: i32) -> Matrix<S> {
        match self.diffs.get(&p) {
            Some(d) => d.clone(),
            None => Matrix::zeros(self.rank(p + 1), self.rank(p)),
        }
    }

    pub fn diffs(&self) -> &BTreeMap<i32, Matrix<S>> {
        &self.diffs
    }

    pub fn degrees(&self) -> Vec<i32> {
        self.ranks.keys().copied().collect()
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.ranks.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i32> {
        self.ranks.keys().last().copied()
    }

    pub fn total_rank(&self) -> usize {
        self.ranks.values().sum()
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> ModuleComplex<T> {
        ModuleComplex {
            ranks: self.ranks.clone(),
            diffs: self.diffs.iter().map(|(p, d)| (*p, d.map(f))).collect(),
        }
    }
}

/// An element of `Hom^m(A, B)`, optionally with several parallel slots
/// (one per coframe element for 1-form valued elements; the differential
/// acts identically on each slot).
#[derive(Clone, Debug, PartialEq)]
pub struct HomElement<S> {
    pub degree: i32,
    pub slots: usize,
    pub comps: BTreeMap<i32, Vec<Matrix<S>>>,
}

impl<S: Scalar> HomElement<S> {
    pub fn zero(degree: i32, slots: usize, source: &ModuleComplex<S>, target: &ModuleComplex<S>) -> Self {
        let mut comps = BTreeMap::new();
        for &p in source.ranks.keys() {
            let rows = target.rank(p + degree);
            if rows > 0 {
                comps.insert(p, vec![Matrix::zeros(rows, source.rank(p)); slots]);
            }
        }
        Self { degree, slots, comps }
    }

    pub fn block(&self, p: i32, slot: usize) -> Option<&Matrix<S>> {
        self.comps.get(&p).map(|v| &v[slot])
    }

    pub fn is_zero(&self) -> bool {
        self.comps.values().all(|v| v.iter().all(|m| m.is_zero()))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree);
        assert_eq!(self.slots, other.slots);
        let mut out = self.clone();
        for (p, blocks) in &other.comps {
            match out.comps.get_mut(p) {
                Some(mine) => {
                    for (m, o) in mine.iter_mut().zip(blocks) {
                        *m = m.add(o);
                    }
                }
                None => {
                    out.comps.insert(*p, blocks.clone());
                }
            }
        }
        out
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = self.clone();
        for blocks in out.comps.values_mut() {
            for b in blocks.iter_mut() {
                *b = b.scale(s);
            }
        }
        out
    }

    fn check_shapes(&self, source: &ModuleComplex<S>, target: &ModuleComplex<S>) -> Result<(), HomError> {
        for (&p, blocks) in &self.comps {
            let want_rows = target.rank(p + self.degree);
            let want_cols = source.rank(p);
            for b in blocks {
                if b.rows() != want_rows || b.cols() != want_cols {
                    return Err(HomError::DimensionMismatch {
                        position: p,
                        got_rows: b.rows(),
                        got_cols: b.cols(),
                        want_rows,
                        want_cols,
                    });
                }
            }
        }
        Ok(())
    }
}

/// `(d_H g)^p = d_B g^p + (-1)^(m+1) g^(p+1) d_A`, applied per slot.
pub fn hom_differential<S: Scalar>(
    x: &HomElement<S>,
    source: &ModuleComplex<S>,
    target: &ModuleComplex<S>,
) -> Result<HomElement<S>, HomError> {
    x.check_shapes(source, target)?;
    let m = x.degree;
    let sign = if (m + 1).rem_euclid(2) == 0 { S::one() } else { -S::one() };
    let mut out = HomElement::zero(m + 1, x.slots, source, target);
    for &p in source.ranks.keys() {
        let rows = target.rank(p + m + 1);
        let cols = source.rank(p);
        if rows == 0 || cols == 0 {
            continue;
        }
        let mut blocks = Vec::with_capacity(x.slots);
        for slot in 0..x.slots {
            let mut acc = Matrix::zeros(rows, cols);
            if let Some(g_p) = x.block(p, slot) {
                // d_B^(p+m) g^p
                acc = acc.add(&target.diff(p + m).mul(g_p));
            }
            if let Some(g_next) = x.block(p + 1, slot) {
                // +- g^(p+1) d_A^p
                acc = acc.add(&g_next.mul(&source.diff(p)).scale(&sign));
            }
            blocks.push(acc);
        }
        out.comps.insert(p, blocks);
    }
    // drop all-zero shells so equality with `zero` is structural
    out.comps.retain(|_, blocks| blocks.iter().any(|b| b.rows() > 0 && b.cols() > 0));
    Ok(out)
}

/// Coordinate layout of a flattened `Hom^m(A, B)` (one slot).
pub struct HomLayout {
    /// `(position, rows, cols, offset)` per nonempty block, ordered by position.
    pub blocks: Vec<(i32, usize, usize, usize)>,
    pub dim: usize,
}

impl HomLayout {
    pub fn new<S: Scalar>(source: &ModuleComplex<S>, target: &ModuleComplex<S>, m: i32) -> Self {
        let mut blocks = Vec::new();
        let mut dim = 0;
        for &p in source.ranks.keys() {
            let rows = target.rank(p + m);
            let cols = source.rank(p);
            if rows > 0 && cols > 0 {
                blocks.push((p, rows, cols, dim));
                dim += rows * cols;
            }
        }
        Self { blocks, dim }
    }

    pub fn flatten<S: Scalar>(&self, x: &HomElement<S>, slot: usize) -> Vec<S> {
        let mut v = vec![S::zero(); self.dim];
        for &(p, rows, cols, off) in &self.blocks {
            if let Some(b) = x.block(p, slot) {
                for r in 0..rows {
                    for c in 0..cols {
                        v[off + r * cols + c] = b.at(r, c).clone();
                    }
                }
            }
        }
        v
    }

    pub fn unflatten<S: Scalar>(
        &self,
        v: &[S],
        degree: i32,
        slots: usize,
        source: &ModuleComplex<S>,
        target: &ModuleComplex<S>,
    ) -> HomElement<S> {
        assert_eq!(v.len(), self.dim);
        let mut out = HomElement::zero(degree, slots, source, target);
        for &(p, rows, cols, off) in &self.blocks {
            let m = Matrix::from_fn(rows, cols, |r, c| v[off + r * cols + c].clone());
            out.comps.insert(p, vec![m; slots]);
        }
        out
    }
}

/// The matrix of `d_H^m : Hom^m -> Hom^(m+1)` in the flattened coordinates.
pub fn hom_delta_matrix<S: Scalar>(
    source: &ModuleComplex<S>,
    target: &ModuleComplex<S>,
    m: i32,
) -> (Matrix<S>, HomLayout, HomLayout) {
    let dom = HomLayout::new(source, target, m);
    let cod = HomLayout::new(source, target, m + 1);
    let mut cols: Vec<Vec<S>> = Vec::with_capacity(dom.dim);
    for j in 0..dom.dim {
        let mut unit = vec![S::zero(); dom.dim];
        unit[j] = S::one();
        let x = dom.unflatten(&unit, m, 1, source, target);
        let dx = hom_differential(&x, source, target).expect("layout shapes valid");
        cols.push(cod.flatten(&dx, 0));
    }
    (Matrix::from_cols(cols, cod.dim), dom, cod)
}

/// Basis data for `H^m Hom(A, B)`.
pub struct HomCohomology<S> {
    pub dim: usize,
    pub cocycle_dim: usize,
    pub coboundary_rank: usize,
    /// Minimum-norm coset representatives (one slot each).
    pub representatives: Vec<HomElement<S>>,
}

/// Kernel of `d_H` at degree `m` modulo the image of `d_H` at `m - 1`.
pub fn hom_cohomology<S: Scalar>(
    source: &ModuleComplex<S>,
    target: &ModuleComplex<S>,
    m: i32,
) -> HomCohomology<S> {
    let (delta_m, dom, _) = hom_delta_matrix(source, target, m);
    let (delta_prev, _, cod_prev) = hom_delta_matrix(source, target, m - 1);
    debug_assert_eq!(cod_prev.dim, dom.dim);

    let cocycles = delta_m.kernel_basis();
    let boundary_cols = delta_prev.image_basis();
    let coboundary_rank = boundary_cols.len();

    // pick cocycles that extend the coboundary space
    let mut stacked = boundary_cols.clone();
    stacked.extend(cocycles.iter().cloned());
    let stacked_m = Matrix::from_cols(stacked, dom.dim);
    let picked: Vec<usize> = stacked_m
        .rref()
        .pivots
        .iter()
        .filter(|&&c| c >= coboundary_rank)
        .map(|&c| c - coboundary_rank)
        .collect();

    let boundary_m = Matrix::from_cols(boundary_cols, dom.dim);
    let mut representatives = Vec::new();
    for idx in picked {
        let raw = Matrix::from_col(cocycles[idx].clone());
        let rep = if coboundary_rank == 0 {
            raw
        } else {
            // minimum-norm coset representative: subtract the projection
            // onto the coboundary span
            let coords = Matrix::project_coords(&boundary_m, &raw);
            raw.sub(&boundary_m.mul(&coords))
        };
        representatives.push(dom.unflatten(&rep.column(0), m, 1, source, target));
    }

    HomCohomology {
        dim: representatives.len(),
        cocycle_dim: cocycles.len(),
        coboundary_rank,
        representatives,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn two_term_identity() -> ModuleComplex<Exact> {
        // [C --1--> C] at degrees 0, 1
        let mut ranks = BTreeMap::new();
        ranks.insert(0, 1);
        ranks.insert(1, 1);
        let mut diffs = BTreeMap::new();
        diffs.insert(0, Matrix::identity(1));
        ModuleComplex::new(ranks, diffs)
    }

    #[test]
    fn differential_of_zero_is_zero() {
        let c = two_term_identity();
        let x = HomElement::zero(0, 1, &c, &c);
        let dx = hom_differential(&x, &c, &c).unwrap();
        assert!(dx.is_zero());
    }

    #[test]
    fn zero_differentials_kill_everything() {
        let a = ModuleComplex::<Exact>::single(0, 2);
        let mut x = HomElement::zero(0, 1, &a, &a);
        x.comps.insert(
            0,
            vec![Matrix::from_fn(2, 2, |r, c| Exact::from_int((r + 2 * c) as i64))],
        );
        let dx = hom_differential(&x, &a, &a).unwrap();
        assert!(dx.is_zero());
    }

    #[test]
    fn single_term_endomorphisms() {
        // no differentials: H^0 is the full endomorphism space
        let a = ModuleComplex::<Exact>::single(0, 3);
        let h = hom_cohomology(&a, &a, 0);
        assert_eq!(h.dim, 9);
        assert_eq!(h.cocycle_dim, 9);
        assert_eq!(h.coboundary_rank, 0);
    }

    #[test]
    fn contractible_complex_has_no_homotopy_endomorphisms() {
        // cocycles {(a,a)} dim 1, coboundaries {(c,c)} dim 1, quotient 0:
        // the identity is null-homotopic
        let c = two_term_identity();
        let h = hom_cohomology(&c, &c, 0);
        assert_eq!(h.cocycle_dim, 1);
        assert_eq!(h.coboundary_rank, 1);
        assert_eq!(h.dim, 0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = ModuleComplex::<Exact>::single(0, 2);
        let b = ModuleComplex::<Exact>::single(0, 3);
        let mut x = HomElement::zero(0, 1, &a, &b);
        x.comps.insert(0, vec![Matrix::<Exact>::zeros(2, 2)]);
        assert!(hom_differential(&x, &a, &b).is_err());
    }
}
