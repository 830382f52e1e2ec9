//! Dense univariate polynomials over a number field, constant-term-first.
//!
//! These carry the Wronskian computations, where entries of a matrix are
//! polynomials in one variable and determinants must stay exact.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::numfield::{FieldElement, NumberField};
use super::rational::Rational;

/// Polynomial with coefficients in one fixed field; `coeffs[i]` multiplies
/// `x^i` and the representation is trimmed (no zero leading coefficient,
/// empty = zero polynomial).
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    field: Arc<NumberField>,
    coeffs: Vec<FieldElement>,
}

impl Poly {
    pub fn new(field: &Arc<NumberField>, coeffs: Vec<FieldElement>) -> Poly {
        let mut p = Poly {
            field: field.clone(),
            coeffs,
        };
        p.trim();
        p
    }

    pub fn zero(field: &Arc<NumberField>) -> Poly {
        Poly {
            field: field.clone(),
            coeffs: vec![],
        }
    }

    pub fn constant(c: FieldElement) -> Poly {
        let field = c.field().clone();
        Poly::new(&field, vec![c])
    }

    /// The monomial `c * x^k`.
    pub fn monomial(c: FieldElement, k: usize) -> Poly {
        let field = c.field().clone();
        let mut coeffs = vec![field.zero(); k + 1];
        coeffs[k] = c;
        Poly::new(&field, coeffs)
    }

    /// `x - a` over the field of `a`.
    pub fn linear_root(a: &FieldElement) -> Poly {
        let field = a.field().clone();
        Poly::new(&field, vec![-a, field.one()])
    }

    /// Polynomial over Q from integer coefficients, constant-term-first.
    pub fn from_ints(field: &Arc<NumberField>, ints: &[i64]) -> Poly {
        Poly::new(
            field,
            ints.iter().map(|&n| field.from_int(n)).collect(),
        )
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the stored length).
    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the trimmed polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(FieldElement::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero(&self.field);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| &self.field.from_rational(Rational::from_int(i as i64)) * c)
            .collect();
        Poly::new(&self.field, coeffs)
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        let mut acc = self.field.zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::constant(self.field.one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Scales by a field element.
    pub fn scale(&self, c: &FieldElement) -> Poly {
        Poly::new(
            &self.field,
            self.coeffs.iter().map(|a| a * c).collect(),
        )
    }
}

macro_rules! fmt_poly_body {
    () => {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if self.is_zero() {
                return write!(f, "0");
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
                    0 => write!(f, "({c})")?,
                    1 => write!(f, "({c})*x")?,
                    _ => write!(f, "({c})*x^{i}")?,
                }
            }
            Ok(())
        }
    };
}

impl fmt::Debug for Poly {
    fmt_poly_body!();
}

impl fmt::Display for Poly {
    fmt_poly_body!();
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| &self.coeff(i) + &rhs.coeff(i))
            .collect();
        Poly::new(&self.field, coeffs)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| &self.coeff(i) - &rhs.coeff(i))
            .collect();
        Poly::new(&self.field, coeffs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero(&self.field);
        }
        let mut coeffs = vec![self.field.zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let t = &coeffs[i + j] + &(a * b);
                coeffs[i + j] = t;
            }
        }
        Poly::new(&self.field, coeffs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}
