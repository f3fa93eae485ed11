//! Sparse real and complex polynomials in a fixed number of real variables.
//!
//! Exponent-sparse storage: a map from exponent vectors to coefficients, no
//! zero coefficients kept. For the Yang-Mills functional the variables come
//! in pairs `(Re l_a, Im l_a)`.

use std::collections::BTreeMap;

use num::complex::Complex64;
use num::rational::BigRational;
use num::{BigInt, Zero};

use crate::scalar::rational_f64;

/// Real-coefficient polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct RealPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl RealPoly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, idx: usize) -> Self {
        assert!(idx < nvars);
        let mut exps = vec![0; nvars];
        exps[idx] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(exps, 1.0);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, f64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        assert_eq!(exps.len(), self.nvars);
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(exps.clone()).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&exps);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exps, ca * cb);
            }
        }
        out
    }

    /// Max total degree over stored terms; 0 for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars);
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut m = *c;
            for (x, &p) in point.iter().zip(e) {
                m *= x.powi(p as i32);
            }
            acc += m;
        }
        acc
    }

    /// Exact evaluation: each `f64` coefficient denotes a rational exactly.
    pub fn eval_exact(&self, point: &[BigRational]) -> BigRational {
        assert_eq!(point.len(), self.nvars);
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut m = BigRational::from_float(*c).expect("finite coefficient");
            for (x, &p) in point.iter().zip(e) {
                m *= num::pow::pow(x.clone(), p as usize);
            }
            acc += m;
        }
        acc
    }

    /// Partial derivative with respect to variable `idx`.
    pub fn derivative(&self, idx: usize) -> Self {
        assert!(idx < self.nvars);
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[idx] == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[idx] -= 1;
            out.add_term(exps, c * e[idx] as f64);
        }
        out
    }

    /// Full real gradient: partials with respect to every variable, in order.
    pub fn gradient(&self) -> Vec<RealPoly> {
        (0..self.nvars).map(|i| self.derivative(i)).collect()
    }
}

/// Complex-coefficient polynomial over the same real variables; conjugation
/// conjugates coefficients only (the variables are real).
#[derive(Clone, Debug, PartialEq)]
pub struct CPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

impl CPoly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The complex variable `x_idx + i * y_idx` for a pair of real variables.
    pub fn complex_var(nvars: usize, re_idx: usize, im_idx: usize) -> Self {
        let mut p = Self::zero(nvars);
        let mut e = vec![0; nvars];
        e[re_idx] = 1;
        p.add_term(e, Complex64::new(1.0, 0.0));
        let mut e = vec![0; nvars];
        e[im_idx] = 1;
        p.add_term(e, Complex64::new(0.0, 1.0));
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Complex64) {
        assert_eq!(exps.len(), self.nvars);
        if c == Complex64::ZERO {
            return;
        }
        let entry = self.terms.entry(exps.clone()).or_insert(Complex64::ZERO);
        *entry += c;
        if *entry == Complex64::ZERO {
            self.terms.remove(&exps);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -*c);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exps, ca * cb);
            }
        }
        out
    }

    pub fn conjugate(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.conj());
        }
        out
    }

    pub fn eval(&self, point: &[f64]) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (e, c) in &self.terms {
            let mut m = *c;
            for (x, &p) in point.iter().zip(e) {
                m *= Complex64::new(x.powi(p as i32), 0.0);
            }
            acc += m;
        }
        acc
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Real part as a `RealPoly`; the largest dropped imaginary coefficient
    /// is returned alongside so callers can assert it is noise.
    pub fn real_part(&self) -> (RealPoly, f64) {
        let mut out = RealPoly::zero(self.nvars);
        let mut max_im: f64 = 0.0;
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.re);
            max_im = max_im.max(c.im.abs());
        }
        (out, max_im)
    }
}

/// Central finite-difference gradient of `f` at `point` with step `h`.
pub fn finite_difference_gradient(
    f: impl Fn(&[f64]) -> f64,
    point: &[f64],
    h: f64,
) -> Vec<f64> {
    let mut grad = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        let mut up = point.to_vec();
        let mut dn = point.to_vec();
        up[i] += h;
        dn[i] -= h;
        grad.push((f(&up) - f(&dn)) / (2.0 * h));
    }
    grad
}

/// Integer-coordinate rational point, for exact evaluation in tests.
pub fn rational_point(ints: &[i64]) -> Vec<BigRational> {
    ints.iter().map(|&n| BigRational::from_integer(BigInt::from(n))).collect()
}

/// Nearest `f64` coordinates of a rational point.
pub fn float_point(point: &[BigRational]) -> Vec<f64> {
    point.iter().map(rational_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_and_gradient_of_bowl() {
        // (Re l)^2 + (Im l)^2
        let x = RealPoly::var(2, 0);
        let y = RealPoly::var(2, 1);
        let p = x.mul(&x).add(&y.mul(&y));
        assert_eq!(p.total_degree(), 2);
        let grad = p.gradient();
        assert_eq!(grad[0], x.scale(2.0));
        assert_eq!(grad[1], y.scale(2.0));
    }

    #[test]
    fn constant_has_zero_gradient() {
        let p = RealPoly::constant(3, 4.5);
        assert!(p.gradient().iter().all(|g| g.is_zero()));
    }

    #[test]
    fn no_zero_coefficients_stored() {
        let mut p = RealPoly::zero(1);
        p.add_term(vec![2], 1.0);
        p.add_term(vec![2], -1.0);
        assert!(p.is_zero());
    }

    #[test]
    fn exact_eval_matches_float_eval() {
        let mut p = RealPoly::zero(2);
        p.add_term(vec![3, 1], 0.125);
        p.add_term(vec![0, 2], -7.5);
        p.add_term(vec![1, 0], 1.0 / 3.0);
        let pt = rational_point(&[2, -3]);
        let exact = p.eval_exact(&pt);
        let float = p.eval(&float_point(&pt));
        assert!((rational_f64(&exact) - float).abs() < 1e-9);
    }

    #[test]
    fn cpoly_times_conjugate_is_real() {
        let l = CPoly::complex_var(2, 0, 1);
        let p = l.mul(&l).add(&CPoly::constant(2, Complex64::new(0.0, 2.0)));
        let sq = p.mul(&p.conjugate());
        let (re, max_im) = sq.real_part();
        assert_eq!(max_im, 0.0);
        // |l^2 + 2i|^2 at l = 1+i: l^2 = 2i, so |4i|^2 = 16
        assert!((re.eval(&[1.0, 1.0]) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn finite_differences_agree_with_derivative() {
        let x = RealPoly::var(2, 0);
        let y = RealPoly::var(2, 1);
        // x^3 y - 2 y^2
        let p = x.mul(&x).mul(&x).mul(&y).sub(&y.mul(&y).scale(2.0));
        let pt = [0.7, -1.3];
        let fd = finite_difference_gradient(|v| p.eval(v), &pt, 1e-5);
        let grad = p.gradient();
        for (g, f) in grad.iter().zip(fd) {
            let exact = g.eval(&pt);
            assert!((exact - f).abs() / exact.abs().max(1.0) < 1e-6);
        }
    }
}
