//! Deterministic random instances for tests and experiments.
//!
//! Everything is seeded and exact: complexes come out with (Gaussian-)integer
//! differentials, so converting to the floating backend loses nothing, and
//! constraint solves (compatible connections, chain maps) run over the
//! rationals with integer-rescaled kernels.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::{BigInt, Integer, One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hom::{HomElement, ModuleComplex};
use crate::matrix::Matrix;
use crate::scalar::{Exact, Scalar};
use crate::torus::{ConnectionFamily, ConstantComplex, TorusContext};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_int(rng: &mut ChaCha8Rng, bound: i64) -> i64 {
    rng.random_range(-bound..=bound)
}

fn gaussian_int(rng: &mut ChaCha8Rng, bound: i64, complex_entries: bool) -> Exact {
    let re = small_int(rng, bound);
    let im = if complex_entries { small_int(rng, bound) } else { 0 };
    Exact::from_int(re) + Exact::i_unit() * Exact::from_int(im)
}

/// Clear denominators of a rational vector and divide by the content, so
/// kernel bases stay small Gaussian-integer vectors.
pub fn integer_scaled(v: &[Exact]) -> Vec<Exact> {
    let mut lcm = BigInt::one();
    for z in v {
        lcm = lcm.lcm(z.re.denom());
        lcm = lcm.lcm(z.im.denom());
    }
    let scale = BigRational::from_integer(lcm);
    let scaled: Vec<Exact> = v
        .iter()
        .map(|z| Exact::from_rationals(&z.re * &scale, &z.im * &scale))
        .collect();
    let mut content = BigInt::zero();
    for z in &scaled {
        content = content.gcd(&z.re.numer().abs());
        content = content.gcd(&z.im.numer().abs());
    }
    if content.is_zero() || content.is_one() {
        return scaled;
    }
    let div = BigRational::from_integer(content);
    scaled
        .iter()
        .map(|z| Exact::from_rationals(&z.re / &div, &z.im / &div))
        .collect()
}

/// Random bounded complex with `d . d = 0` exactly. Ranks are at most
/// `max_rank` over at most `max_len` consecutive degrees; entries are
/// (Gaussian) integers.
pub fn random_complex(rng: &mut ChaCha8Rng, max_len: usize, max_rank: usize, complex_entries: bool) -> ConstantComplex<Exact> {
    let len = rng.random_range(1..=max_len);
    let base = rng.random_range(-1..=1);
    let mut ranks = BTreeMap::new();
    for i in 0..len {
        ranks.insert(base + i as i32, rng.random_range(1..=max_rank));
    }
    let rank = |p: i32| ranks.get(&p).copied().unwrap_or(0usize);

    let mut diffs: BTreeMap<i32, Matrix<Exact>> = BTreeMap::new();
    for i in 0..len.saturating_sub(1) {
        let p = base + i as i32;
        let rows = rank(p + 1);
        let cols = rank(p);
        let d = if let Some(prev) = diffs.get(&(p - 1)) {
            // rows of d^p must pair to zero with the columns of d^(p-1)
            let left_null = prev.transpose().kernel_basis();
            if left_null.is_empty() {
                Matrix::zeros(rows, cols)
            } else {
                let basis: Vec<Vec<Exact>> = left_null.iter().map(|v| integer_scaled(v)).collect();
                let b = Matrix::from_cols(basis, cols);
                let r = Matrix::from_fn(rows, b.cols(), |_, _| gaussian_int(rng, 1, complex_entries));
                r.mul(&b.transpose())
            }
        } else {
            Matrix::from_fn(rows, cols, |_, _| gaussian_int(rng, 2, complex_entries))
        };
        if !d.is_zero() {
            diffs.insert(p, d);
        }
    }
    ModuleComplex::new(ranks, diffs)
}

/// Basis (integer-rescaled) of the space of single-slot connection data
/// compatible with the differentials: solutions of `D^i A^i = A^(i+1) D^i`.
pub fn compatible_connection_basis(complex: &ConstantComplex<Exact>) -> Vec<BTreeMap<i32, Matrix<Exact>>> {
    let degrees: Vec<i32> = complex.degrees();
    // layout: unknowns are the entries of every A^i, row-major
    let mut offsets = BTreeMap::new();
    let mut total = 0usize;
    for &p in &degrees {
        offsets.insert(p, total);
        total += complex.rank(p) * complex.rank(p);
    }
    let mut rows: Vec<Vec<Exact>> = Vec::new();
    for &p in &degrees {
        let rn = complex.rank(p + 1);
        if rn == 0 {
            continue;
        }
        let r = complex.rank(p);
        let d = complex.diff(p);
        // (D A^p - A^(p+1) D)_{w,v} = 0
        for w in 0..rn {
            for v in 0..r {
                let mut row = vec![Exact::from_int(0); total];
                for u in 0..r {
                    // coefficient of A^p_{u,v}
                    row[offsets[&p] + u * r + v] = row[offsets[&p] + u * r + v].clone() + d.at(w, u).clone();
                }
                for u in 0..rn {
                    // coefficient of A^(p+1)_{w,u}
                    row[offsets[&(p + 1)] + w * rn + u] =
                        row[offsets[&(p + 1)] + w * rn + u].clone() - d.at(u, v).clone();
                }
                rows.push(row);
            }
        }
    }
    let kernel = if rows.is_empty() {
        // no constraints: unit vectors
        (0..total)
            .map(|j| {
                let mut v = vec![Exact::from_int(0); total];
                v[j] = Exact::from_int(1);
                v
            })
            .collect()
    } else {
        Matrix::from_rows(rows).kernel_basis()
    };
    kernel
        .iter()
        .map(|v| {
            let v = integer_scaled(v);
            let mut mats = BTreeMap::new();
            for &p in &degrees {
                let r = complex.rank(p);
                let off = offsets[&p];
                mats.insert(p, Matrix::from_fn(r, r, |a, b| v[off + a * r + b].clone()));
            }
            mats
        })
        .collect()
}

/// Random connection family compatible with the differentials.
pub fn random_compatible_connection(
    rng: &mut ChaCha8Rng,
    ctx: TorusContext,
    complex: &ConstantComplex<Exact>,
) -> ConnectionFamily<Exact> {
    let basis = compatible_connection_basis(complex);
    let mut mats: BTreeMap<i32, Vec<Matrix<Exact>>> = complex
        .ranks()
        .iter()
        .map(|(&p, &r)| (p, vec![Matrix::zeros(r, r); ctx.g]))
        .collect();
    for k in 0..ctx.g {
        for b in &basis {
            let c = Exact::from_int(small_int(rng, 2));
            if c.is_zero_val() {
                continue;
            }
            for (&p, m) in b {
                let slot = &mut mats.get_mut(&p).unwrap()[k];
                *slot = slot.add(&m.scale(&c));
            }
        }
    }
    ConnectionFamily { mats }
}

/// Random connection that is both compatible and antihermitian with respect
/// to positive diagonal per-term Gram matrices (`G A + A^dagger G = 0`).
/// Works on complexes with real differentials, where the constraint system
/// is real-linear in the real and imaginary parts separately.
pub fn random_metric_compatible_connection(
    rng: &mut ChaCha8Rng,
    ctx: TorusContext,
    complex: &ConstantComplex<Exact>,
    gram_diag: &BTreeMap<i32, Vec<BigRational>>,
) -> ConnectionFamily<Exact> {
    let degrees = complex.degrees();
    let mut offsets = BTreeMap::new();
    let mut total = 0usize;
    for &p in &degrees {
        offsets.insert(p, total);
        total += complex.rank(p) * complex.rank(p);
    }
    // unknowns: (x, y) with A = X + iY; constraints are real-linear
    let mut rows: Vec<Vec<Exact>> = Vec::new();
    let push_zero_row = |rows: &mut Vec<Vec<Exact>>| rows.push(vec![Exact::from_int(0); 2 * total]);
    // compatibility (real differentials): D X = X' D and D Y = Y' D
    for &p in &degrees {
        let rn = complex.rank(p + 1);
        if rn == 0 {
            continue;
        }
        let r = complex.rank(p);
        let d = complex.diff(p);
        debug_assert!(d.entries().iter().all(|e| e.im.is_zero()), "real differentials required");
        for part in 0..2 {
            let shift = part * total;
            for w in 0..rn {
                for v in 0..r {
                    push_zero_row(&mut rows);
                    let row = rows.last_mut().unwrap();
                    for u in 0..r {
                        row[shift + offsets[&p] + u * r + v] =
                            row[shift + offsets[&p] + u * r + v].clone() + d.at(w, u).clone();
                    }
                    for u in 0..rn {
                        row[shift + offsets[&(p + 1)] + w * rn + u] =
                            row[shift + offsets[&(p + 1)] + w * rn + u].clone() - d.at(u, v).clone();
                    }
                }
            }
        }
    }
    // antihermitian in the diagonal metric:
    // g_u X_{uv} + g_v X_{vu} = 0 and g_u Y_{uv} - g_v Y_{vu} = 0
    for &p in &degrees {
        let r = complex.rank(p);
        let diag = gram_diag
            .get(&p)
            .cloned()
            .unwrap_or_else(|| vec![BigRational::one(); r]);
        assert_eq!(diag.len(), r);
        let off = offsets[&p];
        for u in 0..r {
            for v in u..r {
                let gu = Exact::from_rationals(diag[u].clone(), BigRational::zero());
                let gv = Exact::from_rationals(diag[v].clone(), BigRational::zero());
                push_zero_row(&mut rows);
                let row = rows.last_mut().unwrap();
                row[off + u * r + v] = row[off + u * r + v].clone() + gu.clone();
                row[off + v * r + u] = row[off + v * r + u].clone() + gv.clone();
                push_zero_row(&mut rows);
                let row = rows.last_mut().unwrap();
                row[total + off + u * r + v] = row[total + off + u * r + v].clone() + gu;
                row[total + off + v * r + u] = row[total + off + v * r + u].clone() - gv;
            }
        }
    }
    let kernel = Matrix::from_rows(rows).kernel_basis();
    let mut mats: BTreeMap<i32, Vec<Matrix<Exact>>> = complex
        .ranks()
        .iter()
        .map(|(&p, &r)| (p, vec![Matrix::zeros(r, r); ctx.g]))
        .collect();
    for k in 0..ctx.g {
        for b in &kernel {
            let c = small_int(rng, 2);
            if c == 0 {
                continue;
            }
            let b = integer_scaled(b);
            let coeff = Exact::from_int(c);
            for (&p, off) in &offsets {
                let r = complex.rank(p);
                let m = Matrix::from_fn(r, r, |a, bcol| {
                    (b[off + a * r + bcol].clone() + Exact::i_unit() * b[total + off + a * r + bcol].clone())
                        * coeff.clone()
                });
                let slot = &mut mats.get_mut(&p).unwrap()[k];
                *slot = slot.add(&m);
            }
        }
    }
    ConnectionFamily { mats }
}

/// Random homotopy: a degree -1 Hom element with `g` independent slots.
pub fn random_homotopy(
    rng: &mut ChaCha8Rng,
    ctx: TorusContext,
    complex: &ConstantComplex<Exact>,
) -> HomElement<Exact> {
    let mut h = HomElement::zero(-1, ctx.g, complex, complex);
    let positions: Vec<i32> = h.comps.keys().copied().collect();
    for p in positions {
        let rows = complex.rank(p - 1);
        let cols = complex.rank(p);
        let blocks = (0..ctx.g)
            .map(|_| Matrix::from_fn(rows, cols, |_, _| gaussian_int(rng, 2, true)))
            .collect();
        h.comps.insert(p, blocks);
    }
    h
}

/// Random positive diagonal Gram data for every degree of the complex.
pub fn random_diagonal_gram(
    rng: &mut ChaCha8Rng,
    complex: &ConstantComplex<Exact>,
) -> BTreeMap<i32, Vec<BigRational>> {
    complex
        .ranks()
        .iter()
        .map(|(&p, &r)| {
            let diag = (0..r)
                .map(|_| BigRational::from_integer(BigInt::from(rng.random_range(1..=3))))
                .collect();
            (p, diag)
        })
        .collect()
}

/// Diagonal Gram data as matrices over any scalar backend.
pub fn gram_matrices<S: Scalar>(diag: &BTreeMap<i32, Vec<BigRational>>) -> BTreeMap<i32, Matrix<S>> {
    diag.iter()
        .map(|(&p, d)| {
            let m = Matrix::from_fn(d.len(), d.len(), |r, c| {
                if r == c {
                    S::from_rationals(d[r].clone(), BigRational::zero())
                } else {
                    S::zero()
                }
            });
            (p, m)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::validate_connection;

    #[test]
    fn random_complexes_are_valid() {
        let mut r = rng(7);
        for _ in 0..50 {
            let c = random_complex(&mut r, 4, 4, true);
            assert!(c.validate().is_empty());
        }
    }

    #[test]
    fn random_connections_are_compatible() {
        let mut r = rng(11);
        let ctx = TorusContext::new(2);
        for _ in 0..20 {
            let c = random_complex(&mut r, 3, 3, true);
            let conn = random_compatible_connection(&mut r, ctx, &c);
            assert!(validate_connection(ctx, &c, &conn).is_empty());
        }
    }

    #[test]
    fn metric_compatible_connections_are_antihermitian() {
        let mut r = rng(13);
        let ctx = TorusContext::new(2);
        for _ in 0..20 {
            let c = random_complex(&mut r, 3, 3, false);
            let diag = random_diagonal_gram(&mut r, &c);
            let conn = random_metric_compatible_connection(&mut r, ctx, &c, &diag);
            assert!(validate_connection(ctx, &c, &conn).is_empty());
            let grams = gram_matrices::<Exact>(&diag);
            for (&p, mats) in &conn.mats {
                let g = &grams[&p];
                for a in mats {
                    let anti = g.mul(a).add(&a.dagger().mul(g));
                    assert!(anti.is_zero(), "not antihermitian at degree {p}");
                }
            }
        }
    }

    #[test]
    fn integer_scaling_preserves_direction() {
        let v = vec![
            Exact::from_rationals(
                BigRational::new(BigInt::from(1), BigInt::from(3)),
                BigRational::zero(),
            ),
            Exact::from_rationals(
                BigRational::new(BigInt::from(-2), BigInt::from(9)),
                BigRational::zero(),
            ),
        ];
        let w = integer_scaled(&v);
        // 1/3 : -2/9 == 3 : -2
        assert_eq!(w[0], Exact::from_int(3));
        assert_eq!(w[1], Exact::from_int(-2));
    }
}
