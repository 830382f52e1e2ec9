//! Number fields presented as quotient rings `Q[z]/(m(z))` and their
//! elements.
//!
//! `m` is not assumed irreducible: all arithmetic is valid in the quotient
//! ring, and inversion reports `ZeroDivisor` with a nontrivial factor of `m`
//! when the extended Euclid run discovers one.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

use super::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumFieldError {
    /// The modulus is reducible and the element lies in a proper ideal; the
    /// payload is a nontrivial monic divisor of the modulus
    /// (constant-term-first coefficients).
    #[error("zero divisor: modulus has nontrivial factor {0:?}")]
    ZeroDivisor(Vec<Rational>),
    /// Inversion of the zero residue class.
    #[error("inverse of zero")]
    ZeroElement,
}

/// A number field `Q[z]/(m(z))`.
///
/// `min_poly` is constant-term-first with nonzero leading coefficient and
/// length `degree + 1`; `Q` itself is the degenerate case `min_poly = [0, 1]`.
#[derive(Debug, PartialEq, Eq)]
pub struct NumberField {
    min_poly: Vec<Rational>,
}

impl NumberField {
    /// Builds a field from a constant-term-first modulus.
    /// Panics if the modulus has degree 0 or a zero leading coefficient.
    pub fn new(min_poly: Vec<Rational>) -> Arc<Self> {
        assert!(min_poly.len() >= 2, "modulus must have degree >= 1");
        assert!(
            !min_poly.last().unwrap().is_zero(),
            "modulus leading coefficient must be nonzero"
        );
        Arc::new(NumberField { min_poly })
    }

    /// The rationals, as the degenerate field `Q[z]/(z)`.
    pub fn q() -> Arc<Self> {
        NumberField::new(vec![Rational::zero(), Rational::one()])
    }

    /// `Q[z]/(z^2 - d)` for an integer `d`.
    pub fn quadratic(d: i64) -> Arc<Self> {
        NumberField::new(vec![
            Rational::from_int(-d),
            Rational::zero(),
            Rational::one(),
        ])
    }

    pub fn degree(&self) -> usize {
        self.min_poly.len() - 1
    }

    pub fn is_q(&self) -> bool {
        self.degree() == 1
    }

    pub fn min_poly(&self) -> &[Rational] {
        &self.min_poly
    }

    pub fn zero(self: &Arc<Self>) -> FieldElement {
        FieldElement {
            field: self.clone(),
            coeffs: vec![Rational::zero(); self.degree()],
        }
    }

    pub fn one(self: &Arc<Self>) -> FieldElement {
        self.from_rational(Rational::one())
    }

    pub fn from_rational(self: &Arc<Self>, r: Rational) -> FieldElement {
        let mut coeffs = vec![Rational::zero(); self.degree()];
        coeffs[0] = r;
        FieldElement {
            field: self.clone(),
            coeffs,
        }
    }

    pub fn from_int(self: &Arc<Self>, n: i64) -> FieldElement {
        self.from_rational(Rational::from_int(n))
    }

    /// The residue class of `z` (panics for `Q`, which has no generator).
    pub fn gen(self: &Arc<Self>) -> FieldElement {
        assert!(!self.is_q(), "Q has no generator");
        let mut coeffs = vec![Rational::zero(); self.degree()];
        coeffs[1] = Rational::one();
        FieldElement {
            field: self.clone(),
            coeffs,
        }
    }

    /// Element from a constant-term-first coefficient list of length
    /// <= degree (shorter lists are zero-padded).
    pub fn element(self: &Arc<Self>, coeffs: Vec<Rational>) -> FieldElement {
        assert!(coeffs.len() <= self.degree(), "coefficient list too long");
        let mut c = coeffs;
        c.resize(self.degree(), Rational::zero());
        FieldElement {
            field: self.clone(),
            coeffs: c,
        }
    }

    /// Reduces an arbitrary-degree coefficient list modulo `min_poly`.
    fn reduce(&self, mut c: Vec<Rational>) -> Vec<Rational> {
        let deg = self.degree();
        let lead = self.min_poly.last().unwrap();
        while c.len() > deg {
            let top = c.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            // c -= (top/lead) * z^(len-deg-1) * min_poly, cancelling the top term.
            let scale = &top / lead;
            let shift = c.len() - deg;
            for (i, m) in self.min_poly.iter().take(deg).enumerate() {
                let t = &c[shift + i] - &(m * &scale);
                c[shift + i] = t;
            }
        }
        c.resize(deg, Rational::zero());
        c
    }
}

/// Two fields are interchangeable iff their moduli coincide.
fn same_field(a: &Arc<NumberField>, b: &Arc<NumberField>) -> bool {
    Arc::ptr_eq(a, b) || a.min_poly == b.min_poly
}

/// An element of `Q[z]/(m(z))`: a residue-class representative with
/// `coeffs.len() == field.degree()`, constant-term-first.
#[derive(Clone)]
pub struct FieldElement {
    field: Arc<NumberField>,
    coeffs: Vec<Rational>,
}

impl FieldElement {
    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    /// True iff the element lies in the image of `Q`.
    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(Rational::is_zero)
    }

    /// The rational value for elements in the image of `Q`.
    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.coeffs[0].clone())
    }

    /// Lifts into `target` if `self` is rational; identity if fields match.
    /// Panics on a genuine cross-field mix (a programming error).
    fn coerce(&self, target: &Arc<NumberField>) -> FieldElement {
        if same_field(&self.field, target) {
            return self.clone();
        }
        match self.to_rational() {
            Some(r) => target.from_rational(r),
            None => panic!("mixed number fields in arithmetic"),
        }
    }

    /// Pairs operands into one common field (either equal fields, or one
    /// side a rational constant).
    fn align(&self, rhs: &FieldElement) -> (FieldElement, FieldElement) {
        if same_field(&self.field, &rhs.field) {
            (self.clone(), rhs.clone())
        } else if self.field.is_q() {
            (self.coerce(&rhs.field), rhs.clone())
        } else {
            (self.clone(), rhs.coerce(&self.field))
        }
    }

    pub fn pow(&self, e: u32) -> FieldElement {
        let mut acc = self.field.one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplicative inverse in the quotient ring.
    ///
    /// Runs extended Euclid on (x, m) over `Q[z]`. A nontrivial gcd means `m`
    /// is reducible and `x` is a zero divisor: the gcd is returned as the
    /// discovered factor.
    pub fn inverse(&self) -> Result<FieldElement, NumFieldError> {
        if self.is_zero() {
            return Err(NumFieldError::ZeroElement);
        }
        if self.field.is_q() {
            return Ok(self.field.from_rational(self.coeffs[0].inverse()));
        }
        // Extended Euclid: maintain r_i = s_i * x (mod m); stop at gcd.
        let mut r0 = trim(self.field.min_poly().to_vec());
        let mut r1 = trim(self.coeffs.clone());
        let mut s0: Vec<Rational> = vec![];
        let mut s1 = vec![Rational::one()];
        while !r1.is_empty() {
            let (q, rem) = poly_divrem(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = r1;
            s0 = s1;
            r1 = trim(rem);
            s1 = s2;
        }
        // r0 = gcd(x, m) up to scalar, s0 * x = r0 (mod m).
        if r0.len() == 1 {
            let scale = r0[0].inverse();
            let coeffs = self
                .field
                .reduce(s0.iter().map(|c| c * &scale).collect());
            let inv = FieldElement {
                field: self.field.clone(),
                coeffs,
            };
            debug_assert!((&inv * self).is_one());
            Ok(inv)
        } else if r0.len() > self.field.degree() {
            // gcd has full degree: x is a multiple of m, i.e. the zero class
            // (unreachable given the is_zero check, kept for safety).
            Err(NumFieldError::ZeroElement)
        } else {
            // Nontrivial factor of the modulus; report it monic.
            let lead = r0.last().unwrap().inverse();
            Err(NumFieldError::ZeroDivisor(
                r0.iter().map(|c| c * &lead).collect(),
            ))
        }
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Rational::is_zero)
    }
}

fn trim(mut v: Vec<Rational>) -> Vec<Rational> {
    while v.last().is_some_and(Rational::is_zero) {
        v.pop();
    }
    v
}

/// Quotient and remainder of dense constant-first polynomials over Q.
fn poly_divrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    assert!(!b.is_empty(), "polynomial division by zero");
    let mut rem = a.to_vec();
    if a.len() < b.len() {
        return (vec![], rem);
    }
    let mut quo = vec![Rational::zero(); a.len() - b.len() + 1];
    let lead = b.last().unwrap();
    for k in (0..quo.len()).rev() {
        let top = rem[k + b.len() - 1].clone();
        if top.is_zero() {
            continue;
        }
        let q = &top / lead;
        for (i, bc) in b.iter().enumerate() {
            let t = &rem[k + i] - &(bc * &q);
            rem[k + i] = t;
        }
        quo[k] = q;
    }
    rem.truncate(b.len() - 1);
    (quo, rem)
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            let t = &out[i + j] + &(ai * bj);
            out[i + j] = t;
        }
    }
    out
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let ai = a.get(i).cloned().unwrap_or_else(Rational::zero);
        let bi = b.get(i).cloned().unwrap_or_else(Rational::zero);
        out.push(ai - bi);
    }
    out
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        if same_field(&self.field, &other.field) {
            return self.coeffs == other.coeffs;
        }
        match (self.to_rational(), other.to_rational()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for FieldElement {}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.to_rational() {
            return write!(f, "{r}");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*z")?,
                _ => write!(f, "{c}*z^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        let (a, b) = self.align(rhs);
        FieldElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| x + y)
                .collect(),
            field: a.field,
        }
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        let (a, b) = self.align(rhs);
        FieldElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| x - y)
                .collect(),
            field: a.field,
        }
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        let (a, b) = self.align(rhs);
        let raw = poly_mul(&a.coeffs, &b.coeffs);
        FieldElement {
            coeffs: a.field.reduce(raw),
            field: a.field,
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: FieldElement) -> FieldElement {
        &self + &rhs
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: FieldElement) -> FieldElement {
        &self - &rhs
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: FieldElement) -> FieldElement {
        &self * &rhs
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q35() -> Arc<NumberField> {
        // 3z^8 - z^4 + 3, constant-term-first.
        let mut m = vec![Rational::zero(); 9];
        m[0] = Rational::from_int(3);
        m[4] = Rational::from_int(-1);
        m[8] = Rational::from_int(3);
        NumberField::new(m)
    }

    #[test]
    fn inverse_in_quadratic_field() {
        // In Q[z]/(z^2 - 3): inverse of z is z/3.
        let f = NumberField::quadratic(3);
        let z = f.gen();
        let inv = z.inverse().unwrap();
        assert_eq!(inv, f.element(vec![Rational::zero(), Rational::new(1, 3)]));
        assert!((&z * &inv).is_one());
    }

    #[test]
    fn inverse_of_one() {
        let f = NumberField::quadratic(3);
        assert_eq!(f.one().inverse().unwrap(), f.one());
    }

    #[test]
    fn inverse_in_degree_eight_ring() {
        // z * e = 1 must hold exactly in Q[z]/(3z^8 - z^4 + 3); from the
        // modulus, e = z^3/3 - z^7.
        let f = q35();
        let z = f.gen();
        let inv = z.inverse().unwrap();
        assert!((&z * &inv).is_one());
        let mut expected = vec![Rational::zero(); 8];
        expected[3] = Rational::new(1, 3);
        expected[7] = Rational::from_int(-1);
        assert_eq!(inv, f.element(expected));
    }

    #[test]
    fn zero_divisor_reported_with_factor() {
        // z - 1 is a zero divisor in Q[z]/(z^2 - 1); the reported factor must
        // divide the modulus nontrivially.
        let f = NumberField::quadratic(1);
        let x = &f.gen() - &f.one();
        match x.inverse() {
            Err(NumFieldError::ZeroDivisor(factor)) => {
                assert_eq!(factor.len(), 2);
                // factor is z - 1 up to normalization: some root of z^2 - 1.
                let (c0, c1) = (&factor[0], &factor[1]);
                assert!(c1.is_one());
                assert!((c0 * c0).is_one());
            }
            other => panic!("expected ZeroDivisor, got {other:?}"),
        }
    }

    #[test]
    fn zero_inverse_rejected() {
        let f = NumberField::quadratic(3);
        assert_eq!(f.zero().inverse(), Err(NumFieldError::ZeroElement));
    }

    #[test]
    fn rational_fast_path() {
        let q = NumberField::q();
        let x = q.from_rational(Rational::new(-3, 7));
        assert_eq!(
            x.inverse().unwrap(),
            q.from_rational(Rational::new(-7, 3))
        );
    }

    #[test]
    fn q_constants_coerce_into_any_field() {
        let f = NumberField::quadratic(3);
        let q = NumberField::q();
        let half = q.from_rational(Rational::new(1, 2));
        let z = f.gen();
        let s = &z + &half;
        assert_eq!(
            s,
            f.element(vec![Rational::new(1, 2), Rational::one()])
        );
    }

    #[test]
    fn field_axioms_spot_check() {
        // (x+y)+z = x+(y+z), x(y+z) = xy+xz, x * x^-1 = 1 over random triples.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for field in [NumberField::q(), NumberField::quadratic(3), q35()] {
            for _ in 0..500 {
                let mut rand_elt = || {
                    let coeffs: Vec<Rational> = (0..field.degree())
                        .map(|_| Rational::new(rng.gen_range(-9..=9), rng.gen_range(1..=4)))
                        .collect();
                    field.element(coeffs)
                };
                let (x, y, z) = (rand_elt(), rand_elt(), rand_elt());
                assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
                assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
                if !x.is_zero() {
                    // All three moduli are irreducible, so inversion succeeds.
                    assert!((&x * &x.inverse().unwrap()).is_one());
                }
            }
        }
    }
}
