//! Constant complexes on a flat torus `C^g / Lambda`.
//!
//! Terms are trivial sheaves `O^r`, differentials are constant matrices, and
//! a holomorphic connection is `del + sum_k A_k dz_k` with constant `A_k`.
//! The lattice is never stored: the coframe `dz_1..dz_g` is declared
//! orthonormal, the forms `dz_k ^ dz_l` (k < l) orthonormal, and the total
//! volume is 1, so curvature integrals reduce to finite-dimensional traces.
//! In this model `del A = 0`, so the curvature of a connection is the family
//! of commutators `[A_k, A_l]`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::hom::{hom_cohomology, hom_differential, HomElement, ModuleComplex};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Flat-torus conventions: complex dimension and the normalizations above.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusContext {
    pub g: usize,
}

impl TorusContext {
    pub fn new(g: usize) -> Self {
        assert!(g >= 1, "torus dimension must be >= 1");
        Self { g }
    }

    /// Index pairs (k, l) with k < l of the 2-form frame, in lex order.
    pub fn form_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for k in 0..self.g {
            for l in (k + 1)..self.g {
                out.push((k, l));
            }
        }
        out
    }
}

/// A bounded complex of trivial sheaves; alias of the free-module complex.
pub type ConstantComplex<S> = ModuleComplex<S>;

/// Per-degree tuples of `g` constant matrices: the `sum_k A_k dz_k` part of
/// a connection family compatible with the differentials.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionFamily<S> {
    pub mats: BTreeMap<i32, Vec<Matrix<S>>>,
}

impl<S: Scalar> ConnectionFamily<S> {
    pub fn zero(ctx: TorusContext, complex: &ConstantComplex<S>) -> Self {
        let mats = complex
            .ranks()
            .iter()
            .map(|(&p, &r)| (p, vec![Matrix::zeros(r, r); ctx.g]))
            .collect();
        Self { mats }
    }

    pub fn slot(&self, degree: i32, k: usize) -> Option<&Matrix<S>> {
        self.mats.get(&degree).map(|v| &v[k])
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> ConnectionFamily<T> {
        ConnectionFamily {
            mats: self
                .mats
                .iter()
                .map(|(p, v)| (*p, v.iter().map(|m| m.map(f)).collect()))
                .collect(),
        }
    }

    fn as_hom(&self, ctx: TorusContext, complex: &ConstantComplex<S>) -> HomElement<S> {
        let mut x = HomElement::zero(0, ctx.g, complex, complex);
        for (&p, mats) in &self.mats {
            x.comps.insert(p, mats.clone());
        }
        x
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, mats) in &other.mats {
            match out.mats.get_mut(p) {
                Some(mine) => {
                    for (m, o) in mine.iter_mut().zip(mats) {
                        *m = m.add(o);
                    }
                }
                None => {
                    out.mats.insert(*p, mats.clone());
                }
            }
        }
        out
    }

    pub fn scale(&self, s: &S) -> Self {
        ConnectionFamily {
            mats: self
                .mats
                .iter()
                .map(|(p, v)| (*p, v.iter().map(|m| m.scale(s)).collect()))
                .collect(),
        }
    }
}

/// Whether a variation is stored as a raw cocycle or as the canonical
/// (minimum-Frobenius-norm) representative of its homotopy coset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representative {
    Raw,
    Canonical,
}

/// A degree-0 variation of a gauge field: per-degree `g` matrices forming a
/// chain map in every coframe slot, considered modulo homotopies.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationClass<S> {
    pub mats: BTreeMap<i32, Vec<Matrix<S>>>,
    pub representative: Representative,
}

impl<S: Scalar> VariationClass<S> {
    pub fn as_connection(&self) -> ConnectionFamily<S> {
        ConnectionFamily { mats: self.mats.clone() }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> VariationClass<T> {
        VariationClass {
            mats: self
                .mats
                .iter()
                .map(|(p, v)| (*p, v.iter().map(|m| m.map(f)).collect()))
                .collect(),
            representative: self.representative,
        }
    }
}

/// Positive-definite Gram matrices on the cohomology spaces; absent degrees
/// mean the identity.
#[derive(Clone, Debug, Default)]
pub struct HermitianData<S> {
    pub grams: BTreeMap<i32, Matrix<S>>,
}

impl<S: Scalar> HermitianData<S> {
    pub fn identity() -> Self {
        Self { grams: BTreeMap::new() }
    }

    pub fn gram(&self, degree: i32, dim: usize) -> Matrix<S> {
        match self.grams.get(&degree) {
            Some(g) => {
                assert_eq!(g.rows(), dim);
                g.clone()
            }
            None => Matrix::identity(dim),
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        for (&p, g) in &self.grams {
            if g.rows() != g.cols() {
                violations.push(format!("gram at degree {p} is not square"));
                continue;
            }
            if g.sub(&g.dagger()).entries().iter().any(|e| e.magnitude() > 1e-9) {
                violations.push(format!("gram at degree {p} is not Hermitian"));
            }
            let evs = g.to_nalgebra().symmetric_eigenvalues();
            if evs.iter().any(|e| *e <= 0.0) {
                violations.push(format!("gram at degree {p} is not positive definite"));
            }
        }
        violations
    }
}

#[derive(Debug, Error)]
pub enum TorusError {
    #[error("connection is not compatible with the differentials: {0}")]
    IncompatibleConnection(String),
    #[error("chain map is not compatible: {0}")]
    IncompatibleChainMap(String),
}

/// Check `D^i A^i_k = A^(i+1)_k D^i` for every degree and coframe slot.
pub fn validate_connection<S: Scalar>(
    ctx: TorusContext,
    complex: &ConstantComplex<S>,
    conn: &ConnectionFamily<S>,
) -> Vec<String> {
    let mut violations = Vec::new();
    for (&p, mats) in &conn.mats {
        if mats.len() != ctx.g {
            violations.push(format!("degree {p}: expected {} coframe slots, got {}", ctx.g, mats.len()));
            continue;
        }
        let r = complex.rank(p);
        for (k, a) in mats.iter().enumerate() {
            if a.rows() != r || a.cols() != r {
                violations.push(format!("degree {p} slot {k}: matrix is {}x{}, expected {r}x{r}", a.rows(), a.cols()));
            }
        }
    }
    for &p in complex.ranks().keys() {
        if complex.rank(p + 1) == 0 {
            continue;
        }
        let d = complex.diff(p);
        for k in 0..ctx.g {
            let a_p = conn
                .slot(p, k)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(complex.rank(p), complex.rank(p)));
            let a_next = conn
                .slot(p + 1, k)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(complex.rank(p + 1), complex.rank(p + 1)));
            let lhs = d.mul(&a_p);
            let rhs = a_next.mul(&d);
            let gap = lhs.sub(&rhs);
            let bad = if S::EXACT {
                !gap.is_zero()
            } else {
                gap.entries().iter().any(|e| e.magnitude() > 1e-10)
            };
            if bad {
                violations.push(format!("degree {p} slot {k}: D A != A' D"));
            }
        }
    }
    violations
}

/// The harmonic decomposition `F^i = H_i (+) G_i` with
/// `H_i = ker D^i  intersect  (im D^(i-1))^perp`, orthogonality taken in the
/// inner product given by the per-term Gram matrices (identity by default).
#[derive(Clone, Debug)]
pub struct CohomologySplitting<S> {
    /// Columns span the harmonic subspace.
    pub harmonic: BTreeMap<i32, Matrix<S>>,
    /// Columns span the complement `im D^(i-1) (+) (ker D^i)^perp`.
    pub complement: BTreeMap<i32, Matrix<S>>,
    /// Per-term inner product used for the orthogonal choices.
    pub term_gram: BTreeMap<i32, Matrix<S>>,
}

impl<S: Scalar> CohomologySplitting<S> {
    pub fn harmonic_dim(&self, degree: i32) -> usize {
        self.harmonic.get(&degree).map_or(0, |h| h.cols())
    }

    pub fn dims(&self) -> BTreeMap<i32, usize> {
        self.harmonic.iter().map(|(&p, h)| (p, h.cols())).collect()
    }

    fn gram_for(&self, degree: i32, rows: usize) -> Matrix<S> {
        self.term_gram
            .get(&degree)
            .cloned()
            .unwrap_or_else(|| Matrix::identity(rows))
    }

    /// Projector onto the harmonic subspace along the complement.
    pub fn harmonic_projector(&self, degree: i32) -> Matrix<S> {
        let h = &self.harmonic[&degree];
        let g = self.gram_for(degree, h.rows());
        let gram = h.dagger().mul(&g).mul(h);
        let inv = gram.inverse().expect("harmonic basis independent");
        h.mul(&inv).mul(&h.dagger()).mul(&g)
    }

    /// Coordinates in the harmonic basis of the projection of `v`.
    fn harmonic_coords(&self, degree: i32, v: &Matrix<S>) -> Matrix<S> {
        let h = &self.harmonic[&degree];
        let g = self.gram_for(degree, h.rows());
        let gram = h.dagger().mul(&g).mul(h);
        let rhs = h.dagger().mul(&g).mul(v);
        gram.solve(&rhs).expect("gram invertible")
    }

    /// Matrix of `P_H X|_H` in the harmonic basis.
    pub fn compress(&self, degree: i32, x: &Matrix<S>) -> Matrix<S> {
        let h = &self.harmonic[&degree];
        self.harmonic_coords(degree, &x.mul(h))
    }

    /// Extend an operator `t` on the harmonic space to the term, acting as
    /// zero on the complement.
    pub fn extend(&self, degree: i32, t: &Matrix<S>) -> Matrix<S> {
        let h = &self.harmonic[&degree];
        let g = self.gram_for(degree, h.rows());
        let gram = h.dagger().mul(&g).mul(h);
        let inv = gram.inverse().expect("harmonic basis independent");
        h.mul(t).mul(&inv).mul(&h.dagger()).mul(&g)
    }

    /// Gram matrix induced on the harmonic basis by the term metric.
    pub fn induced_gram(&self, degree: i32) -> Matrix<S> {
        let h = &self.harmonic[&degree];
        let g = self.gram_for(degree, h.rows());
        h.dagger().mul(&g).mul(h)
    }
}

/// Compute the splitting with the standard inner product on each term.
pub fn cohomology_splitting<S: Scalar>(complex: &ConstantComplex<S>) -> CohomologySplitting<S> {
    cohomology_splitting_metric(complex, &BTreeMap::new())
}

/// Compute the splitting with per-term Gram matrices (missing degrees use
/// the identity). Exact backend: column-echelon bases, no orthonormalization
/// (norms are later computed through the induced Gram). Floating backend:
/// bases are orthonormalized.
pub fn cohomology_splitting_metric<S: Scalar>(
    complex: &ConstantComplex<S>,
    term_gram: &BTreeMap<i32, Matrix<S>>,
) -> CohomologySplitting<S> {
    let mut harmonic = BTreeMap::new();
    let mut complement = BTreeMap::new();
    for &p in complex.ranks().keys() {
        let r = complex.rank(p);
        let g = term_gram
            .get(&p)
            .cloned()
            .unwrap_or_else(|| Matrix::identity(r));
        let d = complex.diff(p);
        let kernel = Matrix::from_cols(d.kernel_basis(), r);
        let prev = complex.diff(p - 1);
        let image = Matrix::from_cols(prev.image_basis(), r);

        // harmonic: kernel vectors G-orthogonal to the image
        let h_basis = if kernel.cols() == 0 {
            Matrix::zeros(r, 0)
        } else if image.cols() == 0 {
            kernel.clone()
        } else {
            let constraint = image.dagger().mul(&g).mul(&kernel);
            let coeffs = Matrix::from_cols(constraint.kernel_basis(), kernel.cols());
            kernel.mul(&coeffs)
        };
        let h_basis = if S::EXACT { h_basis } else { gram_orthonormalize(&h_basis, &g) };

        // complement: image columns plus the G-orthocomplement of the kernel
        let ker_perp = if kernel.cols() == 0 {
            Matrix::identity(r)
        } else {
            Matrix::from_cols(kernel.dagger().mul(&g).kernel_basis(), r)
        };
        let comp = image.hstack(&ker_perp);
        debug_assert_eq!(h_basis.cols() + comp.cols(), r);

        harmonic.insert(p, h_basis);
        complement.insert(p, comp);
    }
    CohomologySplitting { harmonic, complement, term_gram: term_gram.clone() }
}

/// Modified Gram-Schmidt in the `g`-inner product, dropping columns below
/// 1e-12 in norm.
fn gram_orthonormalize<S: Scalar>(basis: &Matrix<S>, g: &Matrix<S>) -> Matrix<S> {
    let mut cols: Vec<Vec<S>> = Vec::new();
    for j in 0..basis.cols() {
        let mut v = Matrix::from_col(basis.column(j));
        for u in &cols {
            let u = Matrix::from_col(u.clone());
            let coeff = u.dagger().mul(g).mul(&v).at(0, 0).clone();
            v = v.sub(&u.scale(&coeff));
        }
        let norm2 = v.dagger().mul(g).mul(&v).at(0, 0).magnitude();
        if norm2.sqrt() <= 1e-12 {
            continue;
        }
        let inv_norm = S::from_c64(num::complex::Complex64::new(1.0 / norm2.sqrt(), 0.0));
        v = v.scale(&inv_norm);
        cols.push(v.column(0));
    }
    Matrix::from_cols(cols, basis.rows())
}

/// Connections induced on the cohomology spaces: `theta_k = P_H A_k |_H` in
/// the harmonic basis. Panics if the compatibility preservation invariants
/// fail (the connection must preserve `ker D` and `im D`).
pub fn induced_connection<S: Scalar>(
    ctx: TorusContext,
    complex: &ConstantComplex<S>,
    conn: &ConnectionFamily<S>,
    split: &CohomologySplitting<S>,
) -> BTreeMap<i32, Vec<Matrix<S>>> {
    let mut out = BTreeMap::new();
    for &p in complex.ranks().keys() {
        let h = &split.harmonic[&p];
        if h.cols() == 0 {
            continue;
        }
        let d = complex.diff(p);
        let prev = complex.diff(p - 1);
        let image = Matrix::from_cols(prev.image_basis(), complex.rank(p));
        let mut mats = Vec::with_capacity(ctx.g);
        for k in 0..ctx.g {
            let a = conn
                .slot(p, k)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(complex.rank(p), complex.rank(p)));
            // compatibility consequences: A preserves ker D and im D
            let on_kernel = d.mul(&a).mul(h);
            assert!(
                on_kernel.entries().iter().all(|e| e.magnitude() <= 1e-8),
                "connection does not preserve ker D at degree {p}"
            );
            if image.cols() > 0 {
                let moved = image.hstack(&a.mul(&image));
                assert_eq!(
                    moved.rank(),
                    image.rank(),
                    "connection does not preserve im D at degree {p}"
                );
            }
            mats.push(split.compress(p, &a));
        }
        out.insert(p, mats);
    }
    out
}

/// Per-degree curvature components `C_kl = [theta_k, theta_l]`, `k < l` in
/// lex order (antisymmetry is built in by storing `k < l` only).
pub fn curvature<S: Scalar>(
    ctx: TorusContext,
    theta: &BTreeMap<i32, Vec<Matrix<S>>>,
) -> BTreeMap<i32, Vec<Matrix<S>>> {
    let pairs = ctx.form_pairs();
    theta
        .iter()
        .map(|(&p, mats)| {
            let comps = pairs.iter().map(|&(k, l)| mats[k].commutator(&mats[l])).collect();
            (p, comps)
        })
        .collect()
}

/// `sum_(k<l) <C_kl, C_kl>_h` where `<X, Y>_h = tr(h X h^-1 Y^dagger)` is the
/// End-metric of the Gram matrix `h` (Frobenius pairing in an h-orthonormal
/// frame). Returns a scalar with vanishing imaginary part.
pub fn curvature_norm<S: Scalar>(components: &[Matrix<S>], h: &Matrix<S>) -> S {
    let h_inv = h.inverse().expect("gram invertible");
    let mut acc = S::zero();
    for c in components {
        let inner = h.mul(c).mul(&h_inv).mul(&c.dagger()).trace();
        acc = acc + inner;
    }
    acc
}

/// The bilinear trace form `sum_(k<l) tr(C_kl . C_kl)` (no conjugation, no
/// metric). For metric-compatible families it equals `-curvature_norm`.
pub fn phi_trace_form<S: Scalar>(components: &[Matrix<S>]) -> S {
    let mut acc = S::zero();
    for c in components {
        acc = acc + c.mul(c).trace();
    }
    acc
}

fn alternating_phi<S: Scalar>(
    ctx: TorusContext,
    mats: &BTreeMap<i32, Vec<Matrix<S>>>,
) -> S {
    let curv = curvature(ctx, mats);
    let mut acc = S::zero();
    for (&p, comps) in &curv {
        let phi = phi_trace_form(comps);
        let signed = if p.rem_euclid(2) == 0 { phi } else { -phi };
        acc = acc + signed;
    }
    acc
}

/// Euler-Poincare identity for the curvature trace form: the alternating sum
/// of term-wise `Phi` equals the alternating sum over the connections
/// induced on cohomology. Returns `(lhs, rhs, |lhs - rhs|)`.
pub fn euler_poincare_check<S: Scalar>(
    ctx: TorusContext,
    complex: &ConstantComplex<S>,
    conn: &ConnectionFamily<S>,
) -> (S, S, f64) {
    let term_mats: BTreeMap<i32, Vec<Matrix<S>>> = complex
        .ranks()
        .keys()
        .map(|&p| {
            let mats = (0..ctx.g)
                .map(|k| {
                    conn.slot(p, k)
                        .cloned()
                        .unwrap_or_else(|| Matrix::zeros(complex.rank(p), complex.rank(p)))
                })
                .collect();
            (p, mats)
        })
        .collect();
    let lhs = alternating_phi(ctx, &term_mats);
    let split = cohomology_splitting(complex);
    let theta = induced_connection(ctx, complex, conn, &split);
    let rhs = alternating_phi(ctx, &theta);
    let residual = (lhs.clone() - rhs.clone()).magnitude();
    (lhs, rhs, residual)
}

/// Value of the Yang-Mills functional of the brane: alternating sum of the
/// squared curvature norms of the induced connections, with the cohomology
/// metric inherited from the per-term Gram matrices.
pub fn brane_ym_value<S: Scalar>(
    ctx: TorusContext,
    complex: &ConstantComplex<S>,
    conn: &ConnectionFamily<S>,
    term_gram: &BTreeMap<i32, Matrix<S>>,
) -> S {
    let split = cohomology_splitting_metric(complex, term_gram);
    let theta = induced_connection(ctx, complex, conn, &split);
    let curv = curvature(ctx, &theta);
    let mut acc = S::zero();
    for (&p, comps) in &curv {
        let h = split.induced_gram(p);
        let n = curvature_norm(comps, &h);
        let signed = if p.rem_euclid(2) == 0 { n } else { -n };
        acc = acc + signed;
    }
    acc
}

/// A chain map between constant complexes, compatible with connections on
/// both sides (a morphism of the connection category).
#[derive(Clone, Debug)]
pub struct CompatibleMap<S> {
    pub blocks: BTreeMap<i32, Matrix<S>>,
}

impl<S: Scalar> CompatibleMap<S> {
    pub fn block(&self, p: i32, rows: usize, cols: usize) -> Matrix<S> {
        self.blocks
            .get(&p)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(rows, cols))
    }
}

fn check_tol<S: Scalar>(m: &Matrix<S>) -> bool {
    if S::EXACT {
        m.is_zero()
    } else {
        m.entries().iter().all(|e| e.magnitude() <= 1e-9)
    }
}

/// Mapping cone of a compatible chain map `f : (A, alpha) -> (B, beta)`:
/// `C^i = A^(i+1) (+) B^i`, `d_C(a, b) = (d a, (-1)^(deg a) f(a) + d b)`,
/// `nabla_C(a, b) = (alpha(a), beta(b))`, metrics combined blockwise.
pub fn mapping_cone<S: Scalar>(
    ctx: TorusContext,
    a: &ConstantComplex<S>,
    alpha: &ConnectionFamily<S>,
    b: &ConstantComplex<S>,
    beta: &ConnectionFamily<S>,
    f: &CompatibleMap<S>,
) -> Result<(ConstantComplex<S>, ConnectionFamily<S>), TorusError> {
    // chain map: f^(p+1) d_A^p = d_B^p f^p
    for &p in a.ranks().keys() {
        let lhs = f
            .block(p + 1, b.rank(p + 1), a.rank(p + 1))
            .mul(&a.diff(p));
        let rhs = b.diff(p).mul(&f.block(p, b.rank(p), a.rank(p)));
        if !check_tol(&lhs.sub(&rhs)) {
            return Err(TorusError::IncompatibleChainMap(format!("f d != d f at degree {p}")));
        }
    }
    // connection compatibility: f^p alpha^p_k = beta^p_k f^p
    for &p in a.ranks().keys() {
        let fp = f.block(p, b.rank(p), a.rank(p));
        for k in 0..ctx.g {
            let al = alpha
                .slot(p, k)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(a.rank(p), a.rank(p)));
            let be = beta
                .slot(p, k)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(b.rank(p), b.rank(p)));
            if !check_tol(&fp.mul(&al).sub(&be.mul(&fp))) {
                return Err(TorusError::IncompatibleChainMap(format!(
                    "f is not parallel at degree {p}, slot {k}"
                )));
            }
        }
    }

    let degrees: Vec<i32> = {
        let mut set: Vec<i32> = a.ranks().keys().map(|&p| p - 1).collect();
        set.extend(b.ranks().keys().copied());
        set.sort_unstable();
        set.dedup();
        set
    };

    let mut ranks = BTreeMap::new();
    for &p in &degrees {
        let r = a.rank(p + 1) + b.rank(p);
        if r > 0 {
            ranks.insert(p, r);
        }
    }
    let mut diffs = BTreeMap::new();
    for &p in &degrees {
        let rows = a.rank(p + 2) + b.rank(p + 1);
        let cols = a.rank(p + 1) + b.rank(p);
        if rows == 0 || cols == 0 {
            continue;
        }
        let da = a.diff(p + 1);
        let db = b.diff(p);
        let fp = f.block(p + 1, b.rank(p + 1), a.rank(p + 1));
        let sign = if (p + 1).rem_euclid(2) == 0 { S::one() } else { -S::one() };
        let m = Matrix::from_fn(rows, cols, |r, c| {
            let a_rows = a.rank(p + 2);
            let a_cols = a.rank(p + 1);
            if r < a_rows && c < a_cols {
                da.at(r, c).clone()
            } else if r >= a_rows && c < a_cols {
                sign.clone() * fp.at(r - a_rows, c).clone()
            } else if r >= a_rows && c >= a_cols {
                db.at(r - a_rows, c - a_cols).clone()
            } else {
                S::zero()
            }
        });
        if !m.is_zero() {
            diffs.insert(p, m);
        }
    }
    let cone = ModuleComplex::new(ranks, diffs);

    let mut conn_mats = BTreeMap::new();
    for &p in &cone.ranks().keys().copied().collect::<Vec<_>>() {
        let a_r = a.rank(p + 1);
        let b_r = b.rank(p);
        let mut mats = Vec::with_capacity(ctx.g);
        for k in 0..ctx.g {
            let al = alpha
                .slot(p + 1, k)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(a_r, a_r));
            let be = beta
                .slot(p, k)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(b_r, b_r));
            mats.push(Matrix::from_fn(a_r + b_r, a_r + b_r, |r, c| {
                if r < a_r && c < a_r {
                    al.at(r, c).clone()
                } else if r >= a_r && c >= a_r {
                    be.at(r - a_r, c - a_r).clone()
                } else {
                    S::zero()
                }
            }));
        }
        conn_mats.insert(p, mats);
    }
    let conn = ConnectionFamily { mats: conn_mats };
    let violations = validate_connection(ctx, &cone, &conn);
    debug_assert!(violations.is_empty(), "cone connection invalid: {violations:?}");
    Ok((cone, conn))
}

/// Block-diagonal term metrics of the cone of `f : (A, .) -> (B, .)`:
/// `<(a,b),(a',b')> = <a,a'> + <b,b'>`.
pub fn cone_term_gram<S: Scalar>(
    a: &ConstantComplex<S>,
    gram_a: &BTreeMap<i32, Matrix<S>>,
    b: &ConstantComplex<S>,
    gram_b: &BTreeMap<i32, Matrix<S>>,
) -> BTreeMap<i32, Matrix<S>> {
    let mut out = BTreeMap::new();
    let degrees: Vec<i32> = {
        let mut set: Vec<i32> = a.ranks().keys().map(|&p| p - 1).collect();
        set.extend(b.ranks().keys().copied());
        set.sort_unstable();
        set.dedup();
        set
    };
    for &p in &degrees {
        let a_r = a.rank(p + 1);
        let b_r = b.rank(p);
        if a_r + b_r == 0 {
            continue;
        }
        let ga = gram_a
            .get(&(p + 1))
            .cloned()
            .unwrap_or_else(|| Matrix::identity(a_r));
        let gb = gram_b.get(&p).cloned().unwrap_or_else(|| Matrix::identity(b_r));
        out.insert(
            p,
            Matrix::from_fn(a_r + b_r, a_r + b_r, |r, c| {
                if r < a_r && c < a_r {
                    ga.at(r, c).clone()
                } else if r >= a_r && c >= a_r {
                    gb.at(r - a_r, c - a_r).clone()
                } else {
                    S::zero()
                }
            }),
        );
    }
    out
}

/// Basis of the space of variation classes: `g` coframe slots times a basis
/// of `H^0 Hom(F, F)` in canonical (minimum-norm) representatives. The
/// dimension is `g * dim H^0 Hom(F, F)`.
pub fn gauge_space_basis<S: Scalar>(
    ctx: TorusContext,
    complex: &ConstantComplex<S>,
) -> Vec<VariationClass<S>> {
    let coh = hom_cohomology(complex, complex, 0);
    let mut basis = Vec::with_capacity(ctx.g * coh.dim);
    for k in 0..ctx.g {
        for rep in &coh.representatives {
            let mut mats = BTreeMap::new();
            for (&p, blocks) in &rep.comps {
                let r = complex.rank(p);
                let mut slots = vec![Matrix::zeros(r, r); ctx.g];
                slots[k] = blocks[0].clone();
                mats.insert(p, slots);
            }
            basis.push(VariationClass { mats, representative: Representative::Canonical });
        }
    }
    basis
}

/// `nabla + d_H(h)` for a homotopy `h` (degree -1, `g` slots). The shifted
/// family stays compatible and induces the same connections on cohomology.
pub fn homotopy_shift<S: Scalar>(
    ctx: TorusContext,
    complex: &ConstantComplex<S>,
    conn: &ConnectionFamily<S>,
    h: &HomElement<S>,
) -> ConnectionFamily<S> {
    assert_eq!(h.degree, -1);
    assert_eq!(h.slots, ctx.g);
    let dh = hom_differential(h, complex, complex).expect("homotopy shapes match");
    let mut out = conn.as_hom(ctx, complex).add(&dh);
    out.comps.retain(|p, _| complex.rank(*p) > 0);
    ConnectionFamily { mats: out.comps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Exact, Float};
    use num::complex::Complex64;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_term(d: &[i64], r0: usize, r1: usize) -> ConstantComplex<Exact> {
        let mut ranks = BTreeMap::new();
        ranks.insert(0, r0);
        ranks.insert(1, r1);
        let mut diffs = BTreeMap::new();
        diffs.insert(0, Matrix::new(r1, r0, d.iter().map(|&v| Exact::from_int(v)).collect()));
        ModuleComplex::new(ranks, diffs)
    }

    #[test]
    fn zero_connection_is_always_valid() {
        let ctx = TorusContext::new(2);
        let f = two_term(&[1, 0, 0, 0], 2, 2);
        let conn = ConnectionFamily::zero(ctx, &f);
        assert!(validate_connection(ctx, &f, &conn).is_empty());
    }

    #[test]
    fn single_term_any_connection_valid() {
        let ctx = TorusContext::new(1);
        let f = ConstantComplex::<Exact>::single(0, 2);
        let mut mats = BTreeMap::new();
        mats.insert(0, vec![Matrix::from_fn(2, 2, |r, c| Exact::from_int((r * 2 + c) as i64))]);
        let conn = ConnectionFamily { mats };
        assert!(validate_connection(ctx, &f, &conn).is_empty());
    }

    #[test]
    fn scalar_mismatch_is_invalid() {
        // [C -1-> C] with A^0 = 2, A^1 = 3
        let ctx = TorusContext::new(1);
        let f = two_term(&[1], 1, 1);
        let mut mats = BTreeMap::new();
        mats.insert(0, vec![Matrix::new(1, 1, vec![Exact::from_int(2)])]);
        mats.insert(1, vec![Matrix::new(1, 1, vec![Exact::from_int(3)])]);
        let conn = ConnectionFamily { mats };
        assert!(!validate_connection(ctx, &f, &conn).is_empty());
    }

    #[test]
    fn splitting_dims() {
        // zero differentials: everything is harmonic
        let f = ConstantComplex::<Exact>::single(0, 3);
        let s = cohomology_splitting(&f);
        assert_eq!(s.harmonic_dim(0), 3);

        // contractible: nothing is
        let f = two_term(&[1], 1, 1);
        let s = cohomology_splitting(&f);
        assert_eq!(s.harmonic_dim(0), 0);
        assert_eq!(s.harmonic_dim(1), 0);

        // rank-1 differential on C^2 -> C^2
        let f = two_term(&[1, 0, 0, 0], 2, 2);
        let s = cohomology_splitting(&f);
        assert_eq!(s.harmonic_dim(0), 1);
        assert_eq!(s.harmonic_dim(1), 1);
    }

    #[test]
    fn projector_identities() {
        let f = two_term(&[1, 0, 0, 0], 2, 2);
        let s = cohomology_splitting(&f);
        for p in [0, 1] {
            let ph = s.harmonic_projector(p);
            assert_eq!(ph.mul(&ph), ph);
            // complement columns are killed
            let comp = &s.complement[&p];
            assert!(ph.mul(comp).is_zero());
        }
    }

    #[test]
    fn commutator_curvature_example() {
        // g = 2, A_1 = e_12, A_2 = e_21 -> C_12 = diag(1, -1), norm^2 = 2
        let ctx = TorusContext::new(2);
        let a1 = Matrix::from_rows(vec![
            vec![Exact::from_int(0), Exact::from_int(1)],
            vec![Exact::from_int(0), Exact::from_int(0)],
        ]);
        let a2 = Matrix::from_rows(vec![
            vec![Exact::from_int(0), Exact::from_int(0)],
            vec![Exact::from_int(1), Exact::from_int(0)],
        ]);
        let mut theta = BTreeMap::new();
        theta.insert(0, vec![a1, a2]);
        let curv = curvature(ctx, &theta);
        let c12 = &curv[&0][0];
        assert_eq!(*c12.at(0, 0), Exact::from_int(1));
        assert_eq!(*c12.at(1, 1), Exact::from_int(-1));
        let n = curvature_norm(&curv[&0], &Matrix::identity(2));
        assert_eq!(n, Exact::from_int(2));
        // the trace form on this non-antihermitian family is +2
        assert_eq!(phi_trace_form(&curv[&0]), Exact::from_int(2));
    }

    #[test]
    fn g1_has_no_curvature() {
        let ctx = TorusContext::new(1);
        let mut theta = BTreeMap::new();
        theta.insert(0, vec![Matrix::<Exact>::identity(3)]);
        let curv = curvature(ctx, &theta);
        assert!(curv[&0].is_empty());
    }

    #[test]
    fn rank1_curvature_vanishes() {
        let ctx = TorusContext::new(3);
        let mut theta = BTreeMap::new();
        theta.insert(0, vec![Matrix::<Exact>::identity(1).scale(&Exact::from_int(2)),
                             Matrix::identity(1).scale(&Exact::from_int(5)),
                             Matrix::identity(1).scale(&Exact::from_int(-1))]);
        let curv = curvature(ctx, &theta);
        assert!(curv[&0].iter().all(|c| c.is_zero()));
    }

    #[test]
    fn antihermitian_phi_is_minus_norm() {
        // A_1 = [[0,1],[-1,0]], A_2 = [[i,0],[0,-i]]
        let ctx = TorusContext::new(2);
        let a1 = Matrix::from_rows(vec![
            vec![c64(0.0, 0.0), c64(1.0, 0.0)],
            vec![c64(-1.0, 0.0), c64(0.0, 0.0)],
        ]);
        let a2 = Matrix::from_rows(vec![
            vec![c64(0.0, 1.0), c64(0.0, 0.0)],
            vec![c64(0.0, 0.0), c64(0.0, -1.0)],
        ]);
        let mut theta: BTreeMap<i32, Vec<Matrix<Float>>> = BTreeMap::new();
        theta.insert(0, vec![a1, a2]);
        let curv = curvature(ctx, &theta);
        let phi = phi_trace_form(&curv[&0]);
        let norm = curvature_norm(&curv[&0], &Matrix::identity(2));
        assert!((phi + norm).norm() < 1e-12);
        assert!(norm.re > 0.0);
    }

    #[test]
    fn norm_is_gram_scale_invariant() {
        let ctx = TorusContext::new(2);
        let a1 = Matrix::from_rows(vec![
            vec![Exact::from_int(0), Exact::from_int(1)],
            vec![Exact::from_int(0), Exact::from_int(0)],
        ]);
        let a2 = Matrix::from_rows(vec![
            vec![Exact::from_int(0), Exact::from_int(0)],
            vec![Exact::from_int(1), Exact::from_int(0)],
        ]);
        let mut theta = BTreeMap::new();
        theta.insert(0, vec![a1, a2]);
        let curv = curvature(ctx, &theta);
        let h = Matrix::<Exact>::identity(2);
        let h3 = h.scale(&Exact::from_int(3));
        assert_eq!(curvature_norm(&curv[&0], &h), curvature_norm(&curv[&0], &h3));
    }

    #[test]
    fn gauge_space_dims() {
        let ctx = TorusContext::new(2);
        // single term rank 1: endomorphisms are scalars, m = g
        let f = ConstantComplex::<Exact>::single(0, 1);
        assert_eq!(gauge_space_basis(ctx, &f).len(), 2);
        // single term rank r: m = g r^2
        let f = ConstantComplex::<Exact>::single(0, 3);
        assert_eq!(gauge_space_basis(ctx, &f).len(), 2 * 9);
        // contractible complex: identity is null-homotopic, m = 0
        let ctx1 = TorusContext::new(1);
        let f = two_term(&[1], 1, 1);
        assert_eq!(gauge_space_basis(ctx1, &f).len(), 0);
    }

    #[test]
    fn induced_connection_on_zero_differentials_is_identity_compression() {
        let ctx = TorusContext::new(1);
        let f = ConstantComplex::<Exact>::single(0, 2);
        let mut mats = BTreeMap::new();
        let a = Matrix::from_fn(2, 2, |r, c| Exact::from_int((2 * r + c + 1) as i64));
        mats.insert(0, vec![a.clone()]);
        let conn = ConnectionFamily { mats };
        let split = cohomology_splitting(&f);
        let theta = induced_connection(ctx, &f, &conn, &split);
        assert_eq!(theta[&0][0], a);
    }

    #[test]
    fn cone_of_zero_map_is_direct_sum() {
        let ctx = TorusContext::new(1);
        let a = ConstantComplex::<Exact>::single(0, 1);
        let b = ConstantComplex::<Exact>::single(0, 2);
        let alpha = ConnectionFamily::zero(ctx, &a);
        let beta = ConnectionFamily::zero(ctx, &b);
        let f = CompatibleMap { blocks: BTreeMap::new() };
        let (cone, _) = mapping_cone(ctx, &a, &alpha, &b, &beta, &f).unwrap();
        assert_eq!(cone.rank(-1), 1);
        assert_eq!(cone.rank(0), 2);
        assert!(cone.diff(-1).is_zero());
    }

    #[test]
    fn cone_of_identity_is_contractible() {
        let ctx = TorusContext::new(1);
        let a = ConstantComplex::<Exact>::single(0, 2);
        let alpha = ConnectionFamily::zero(ctx, &a);
        let mut blocks = BTreeMap::new();
        blocks.insert(0, Matrix::<Exact>::identity(2));
        let f = CompatibleMap { blocks };
        let (cone, conn) = mapping_cone(ctx, &a, &alpha, &a, &alpha, &f).unwrap();
        let split = cohomology_splitting(&cone);
        assert!(split.dims().values().all(|&d| d == 0));
        assert!(validate_connection(ctx, &cone, &conn).is_empty());
    }

    #[test]
    fn incompatible_chain_map_rejected() {
        let ctx = TorusContext::new(1);
        let a = ConstantComplex::<Exact>::single(0, 1);
        let mut mats = BTreeMap::new();
        mats.insert(0, vec![Matrix::new(1, 1, vec![Exact::from_int(2)])]);
        let alpha = ConnectionFamily { mats };
        let beta = ConnectionFamily::zero(ctx, &a);
        let mut blocks = BTreeMap::new();
        blocks.insert(0, Matrix::<Exact>::identity(1));
        let f = CompatibleMap { blocks };
        assert!(mapping_cone(ctx, &a, &alpha, &a, &beta, &f).is_err());
    }
}
