//! Exact linear algebra over number fields: fraction-free determinants,
//! nullspaces, ranks, and integer normalization of rational vectors.
//!
//! Elimination works in any quotient ring `Q[z]/(m)`. When a pivot (or the
//! Bareiss divisor) turns out to be a zero divisor of a reducible modulus,
//! the nullspace/rank routines surface that as [`NumFieldError::ZeroDivisor`]
//! so callers can retry in a smaller field; the determinant falls back to a
//! division-free minor expansion instead.

use std::collections::HashMap;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::numfield::{FieldElement, NumFieldError};
use super::rational::Rational;

/// Minimal ring-element interface for the division-free determinant, which
/// must run over both field elements and polynomial matrices (Wronskians).
pub trait RingElem: Clone {
    /// The zero of the same parent structure as `self`.
    fn zero_like(&self) -> Self;
    fn is_zero_elem(&self) -> bool;
}

impl RingElem for FieldElement {
    fn zero_like(&self) -> Self {
        self.field().zero()
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
}

impl RingElem for super::poly::Poly {
    fn zero_like(&self) -> Self {
        super::poly::Poly::zero(self.field())
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
}

/// Determinant by memoized first-row minor expansion. Division-free, so it
/// is valid over any commutative ring; cost grows as 2^n, fine for the
/// small matrices (Wronskians, orbit minors) it serves.
pub fn det_division_free<T>(m: &[Vec<T>]) -> T
where
    T: RingElem,
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Mul<&'a T, Output = T>,
{
    let n = m.len();
    assert!(n > 0, "determinant of empty matrix");
    assert!(n <= 20, "minor expansion limited to 20x20");
    for row in m {
        assert_eq!(row.len(), n, "determinant of non-square matrix");
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut memo: HashMap<u32, T> = HashMap::new();
    det_minor(m, full, &mut memo)
}

/// Determinant of the submatrix using the last popcount(cols) rows and the
/// column set `cols`, expanding along its first row.
fn det_minor<T>(m: &[Vec<T>], cols: u32, memo: &mut HashMap<u32, T>) -> T
where
    T: RingElem,
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Mul<&'a T, Output = T>,
{
    let size = cols.count_ones() as usize;
    let row = m.len() - size;
    if size == 1 {
        let j = cols.trailing_zeros() as usize;
        return m[row][j].clone();
    }
    if let Some(d) = memo.get(&cols) {
        return d.clone();
    }
    let mut acc = m[0][0].zero_like();
    let mut sign_pos = true;
    for j in 0..m.len() {
        if cols & (1 << j) == 0 {
            continue;
        }
        let entry = &m[row][j];
        if !entry.is_zero_elem() {
            let sub = det_minor(m, cols & !(1 << j), memo);
            let term = entry * &sub;
            acc = if sign_pos { &acc + &term } else { &acc - &term };
        }
        sign_pos = !sign_pos;
    }
    memo.insert(cols, acc.clone());
    acc
}

/// Exact determinant of a square matrix of field elements.
///
/// Uses Bareiss fraction-free elimination (intermediate entries are minors,
/// which keeps coefficient growth polynomial); if a Bareiss divisor is not
/// invertible in a reducible quotient ring, falls back to the division-free
/// expansion, which always succeeds.
pub fn exact_det(m: &[Vec<FieldElement>]) -> FieldElement {
    let n = m.len();
    assert!(n > 0, "determinant of empty matrix");
    for row in m {
        assert_eq!(row.len(), n, "determinant of non-square matrix");
    }
    match bareiss_det(m) {
        Ok(d) => d,
        Err(_) => det_division_free(m),
    }
}

fn bareiss_det(m: &[Vec<FieldElement>]) -> Result<FieldElement, NumFieldError> {
    let n = m.len();
    let field = m[0][0].field().clone();
    let mut a: Vec<Vec<FieldElement>> = m.to_vec();
    let mut negate = false;
    let mut prev = field.one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return Ok(field.zero()),
            }
        }
        if k + 1 < n {
            let prev_inv = prev.inverse()?;
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                    a[i][j] = &num * &prev_inv;
                }
                a[i][k] = field.zero();
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    Ok(if negate { -&det } else { det })
}

/// Reduced row echelon form. Returns the reduced matrix and the list of
/// (pivot_row, pivot_col) pairs.
///
/// Pivots must be invertible; in a reducible quotient ring a column whose
/// remaining entries are all nonzero zero divisors raises the error from
/// the failed inversion.
fn rref(
    m: &[Vec<FieldElement>],
) -> Result<(Vec<Vec<FieldElement>>, Vec<(usize, usize)>), NumFieldError> {
    let rows = m.len();
    assert!(rows > 0, "elimination on empty matrix");
    let cols = m[0].len();
    for row in m {
        assert_eq!(row.len(), cols, "ragged matrix");
    }
    let mut a: Vec<Vec<FieldElement>> = m.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // First invertible entry in this column at or below row r.
        let mut chosen: Option<(usize, FieldElement)> = None;
        let mut pending: Option<NumFieldError> = None;
        for i in r..rows {
            if a[i][c].is_zero() {
                continue;
            }
            match a[i][c].inverse() {
                Ok(inv) => {
                    chosen = Some((i, inv));
                    break;
                }
                Err(e) => pending = Some(e),
            }
        }
        let (i, inv) = match (chosen, pending) {
            (Some(p), _) => p,
            (None, Some(e)) => return Err(e),
            (None, None) => continue, // column already clear below
        };
        a.swap(r, i);
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        for other in 0..rows {
            if other == r || a[other][c].is_zero() {
                continue;
            }
            let factor = a[other][c].clone();
            for j in 0..cols {
                let t = &a[other][j] - &(&factor * &a[r][j]);
                a[other][j] = t;
            }
        }
        pivots.push((r, c));
        r += 1;
    }
    Ok((a, pivots))
}

/// Rank of a matrix of field elements.
pub fn exact_rank(m: &[Vec<FieldElement>]) -> Result<usize, NumFieldError> {
    Ok(rref(m)?.1.len())
}

/// Basis of the right nullspace: every returned `v` satisfies `M v = 0`
/// exactly, and the basis has size `cols - rank`.
pub fn exact_nullspace(
    m: &[Vec<FieldElement>],
) -> Result<Vec<Vec<FieldElement>>, NumFieldError> {
    let (a, pivots) = rref(m)?;
    let cols = m[0].len();
    let field = m[0][0].field().clone();
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::new();
    for f in 0..cols {
        if pivot_cols.contains(&f) {
            continue;
        }
        let mut v = vec![field.zero(); cols];
        v[f] = field.one();
        for &(pr, pc) in &pivots {
            v[pc] = -&a[pr][f];
        }
        basis.push(v);
    }
    Ok(basis)
}

/// Rescales a vector of rational field elements to the unique primitive
/// integer representative with positive first nonzero entry. Returns `None`
/// if any entry fails to lie in `Q`.
pub fn q_integer_normalize(v: &[FieldElement]) -> Option<Vec<BigInt>> {
    let rats: Vec<Rational> = v.iter().map(FieldElement::to_rational).collect::<Option<_>>()?;
    let mut lcm = BigInt::one();
    for r in &rats {
        lcm = lcm.lcm(r.denom());
    }
    let mut ints: Vec<BigInt> = rats
        .iter()
        .map(|r| r.numer() * (&lcm / r.denom()))
        .collect();
    let mut gcd = BigInt::zero();
    for n in &ints {
        gcd = gcd.gcd(n);
    }
    if gcd.is_zero() {
        return Some(ints); // zero vector
    }
    let flip = ints.iter().find(|n| !n.is_zero()).unwrap().is_negative();
    for n in ints.iter_mut() {
        *n = &*n / &gcd;
        if flip {
            *n = -&*n;
        }
    }
    Some(ints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::NumberField;
    use rand::{Rng, SeedableRng};

    fn q_matrix(rows: &[&[i64]]) -> Vec<Vec<FieldElement>> {
        let q = NumberField::q();
        rows.iter()
            .map(|r| r.iter().map(|&n| q.from_int(n)).collect())
            .collect()
    }

    /// Plain recursive cofactor expansion, the independent oracle.
    fn cofactor_det(m: &[Vec<FieldElement>]) -> FieldElement {
        let n = m.len();
        if n == 1 {
            return m[0][0].clone();
        }
        let mut acc = m[0][0].field().zero();
        for j in 0..n {
            if m[0][j].is_zero() {
                continue;
            }
            let sub: Vec<Vec<FieldElement>> = (1..n)
                .map(|i| {
                    (0..n)
                        .filter(|&c| c != j)
                        .map(|c| m[i][c].clone())
                        .collect()
                })
                .collect();
            let term = &m[0][j] * &cofactor_det(&sub);
            acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }

    #[test]
    fn det_identity_and_swap() {
        let id = q_matrix(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert!(exact_det(&id).is_one());
        let sw = q_matrix(&[&[0, 1], &[1, 0]]);
        assert_eq!(exact_det(&sw), NumberField::q().from_int(-1));
    }

    #[test]
    fn det_matches_cofactor_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 1..=5 {
            for _ in 0..20 {
                let q = NumberField::q();
                let m: Vec<Vec<FieldElement>> = (0..n)
                    .map(|_| {
                        (0..n)
                            .map(|_| {
                                q.from_rational(Rational::new(
                                    rng.gen_range(-6..=6),
                                    rng.gen_range(1..=3),
                                ))
                            })
                            .collect()
                    })
                    .collect();
                let expected = cofactor_det(&m);
                assert_eq!(exact_det(&m), expected);
                assert_eq!(det_division_free(&m), expected);
            }
        }
    }

    #[test]
    fn det_over_extension_field() {
        // det [[z, 1], [1, z]] = z^2 - 1 = 2 in Q[z]/(z^2 - 3).
        let f = NumberField::quadratic(3);
        let m = vec![
            vec![f.gen(), f.one()],
            vec![f.one(), f.gen()],
        ];
        assert_eq!(exact_det(&m), f.from_int(2));
    }

    #[test]
    fn nullspace_of_quadratic_columns() {
        // Columns are the quadratics x^2-x, x^2-2x, x^2-2x+1, x^2-4x+4 listed
        // constant-term-first; the relation 2q1 + q2 - 4q3 + q4 = 0 must span
        // the nullspace.
        let m = q_matrix(&[&[0, 0, 1, 4], &[-1, -2, -2, -4], &[1, 1, 1, 1]]);
        let basis = exact_nullspace(&m).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(
            q_integer_normalize(&basis[0]).unwrap(),
            vec![
                BigInt::from(2),
                BigInt::from(1),
                BigInt::from(-4),
                BigInt::from(1)
            ]
        );
    }

    #[test]
    fn nullspace_trivial_cases() {
        let id = q_matrix(&[&[1, 0], &[0, 1]]);
        assert!(exact_nullspace(&id).unwrap().is_empty());
        let zero = q_matrix(&[&[0, 0, 0], &[0, 0, 0]]);
        assert_eq!(exact_nullspace(&zero).unwrap().len(), 3);
    }

    #[test]
    fn nullspace_annihilates_and_rank_nullity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let rows = rng.gen_range(1..=8);
            let cols = rng.gen_range(1..=8);
            let q = NumberField::q();
            // Small range forces frequent rank deficiency.
            let m: Vec<Vec<FieldElement>> = (0..rows)
                .map(|_| (0..cols).map(|_| q.from_int(rng.gen_range(-1..=1))).collect())
                .collect();
            let basis = exact_nullspace(&m).unwrap();
            let rank = exact_rank(&m).unwrap();
            assert_eq!(rank + basis.len(), cols);
            for v in &basis {
                for row in &m {
                    let mut s = q.zero();
                    for (a, b) in row.iter().zip(v) {
                        s = &s + &(a * b);
                    }
                    assert!(s.is_zero());
                }
            }
        }
    }

    #[test]
    fn zero_divisor_pivot_is_reported() {
        // In Q[z]/(z^2 - 1) the only nonzero entries of this matrix are zero
        // divisors, so elimination cannot proceed.
        let f = NumberField::quadratic(1);
        let zd = &f.gen() - &f.one();
        let m = vec![vec![zd.clone(), zd]];
        match exact_nullspace(&m) {
            Err(NumFieldError::ZeroDivisor(_)) => {}
            other => panic!("expected ZeroDivisor, got {other:?}"),
        }
    }

    #[test]
    fn det_falls_back_over_reducible_modulus() {
        // With pivot z-1 (a zero divisor of z^2-1) Bareiss must divide by it
        // at step 2 of a 3x3 elimination; the fallback minor expansion still
        // produces the exact ring determinant.
        let f = NumberField::quadratic(1);
        let zd = &f.gen() - &f.one(); // z - 1
        let m = vec![
            vec![zd.clone(), f.zero(), f.one()],
            vec![f.zero(), f.one(), f.zero()],
            vec![f.one(), f.zero(), zd.clone()],
        ];
        // (z-1)^2 - 1 = z^2 - 2z = 1 - 2z mod z^2-1.
        let expected = f.element(vec![Rational::one(), Rational::from_int(-2)]);
        assert_eq!(exact_det(&m), expected);
    }

    #[test]
    fn normalize_handles_fractions_and_sign() {
        let q = NumberField::q();
        let v = vec![
            q.from_rational(Rational::new(-2, 3)),
            q.from_rational(Rational::new(4, 3)),
            q.from_int(-2),
        ];
        assert_eq!(
            q_integer_normalize(&v).unwrap(),
            vec![BigInt::from(1), BigInt::from(-2), BigInt::from(3)]
        );
    }
}
