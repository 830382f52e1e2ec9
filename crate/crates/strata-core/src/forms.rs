//! Binary forms of degree `d` over a number field: factored representation,
//! expansion to coefficient vectors, radicals, GCDs, and Wronskians.
//!
//! Forms are carried in factored representation whenever stratum membership
//! matters: membership of `S_mu` is a statement about root multiplicities,
//! and this crate never root-finds an expanded form. Expansion is derived
//! data used to check linear relations on coefficient vectors.

use std::fmt;
use std::sync::Arc;

use crate::exactalg::{det_division_free, FieldElement, NumFieldError, NumberField, Poly};

/// A point `(alpha : beta)` of the projective line, canonicalized to
/// `beta = 1` for finite points and `(1 : 0)` for the point at infinity.
/// The associated linear factor is `beta*x - alpha*y`.
#[derive(Clone, PartialEq, Eq)]
pub struct ProjRoot {
    alpha: FieldElement,
    beta: FieldElement,
}

impl ProjRoot {
    /// Canonicalizes `(alpha : beta)`. Errors if `beta` is a nonzero zero
    /// divisor of a reducible modulus (no canonical affine representative).
    pub fn new(alpha: FieldElement, beta: FieldElement) -> Result<ProjRoot, NumFieldError> {
        assert!(
            !(alpha.is_zero() && beta.is_zero()),
            "(0:0) is not a projective point"
        );
        if beta.is_zero() {
            return Ok(ProjRoot::infinity(alpha.field()));
        }
        let inv = beta.inverse()?;
        Ok(ProjRoot {
            alpha: &alpha * &inv,
            beta: beta.field().one(),
        })
    }

    /// The finite point `(a : 1)`, with root factor `x - a*y`.
    pub fn finite(a: FieldElement) -> ProjRoot {
        let one = a.field().one();
        ProjRoot { alpha: a, beta: one }
    }

    pub fn finite_int(field: &Arc<NumberField>, n: i64) -> ProjRoot {
        ProjRoot::finite(field.from_int(n))
    }

    /// The point at infinity `(1 : 0)`, with root factor `-y`.
    pub fn infinity(field: &Arc<NumberField>) -> ProjRoot {
        ProjRoot {
            alpha: field.one(),
            beta: field.zero(),
        }
    }

    pub fn alpha(&self) -> &FieldElement {
        &self.alpha
    }

    pub fn beta(&self) -> &FieldElement {
        &self.beta
    }

    pub fn is_infinity(&self) -> bool {
        self.beta.is_zero()
    }

    pub fn field(&self) -> &Arc<NumberField> {
        self.alpha.field()
    }

    /// Coefficient vector `[-alpha, beta]` of the linear factor
    /// `beta*x - alpha*y`, indexed by x-degree.
    fn factor_coeffs(&self) -> [FieldElement; 2] {
        [-&self.alpha, self.beta.clone()]
    }
}

impl fmt::Debug for ProjRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinity() {
            write!(f, "(1:0)")
        } else {
            write!(f, "({}:1)", self.alpha)
        }
    }
}

/// A nonzero binary form in factored shape: `scalar * prod (beta_i x -
/// alpha_i y)^{m_i}` with pairwise distinct canonical roots.
#[derive(Clone, PartialEq, Eq)]
pub struct FactoredForm {
    scalar: FieldElement,
    factors: Vec<(ProjRoot, u32)>,
}

impl FactoredForm {
    /// Builds a form, merging repeated roots and dropping zero
    /// multiplicities. Panics on a zero scalar.
    pub fn new(scalar: FieldElement, factors: Vec<(ProjRoot, u32)>) -> FactoredForm {
        assert!(!scalar.is_zero(), "factored form must be nonzero");
        let mut merged: Vec<(ProjRoot, u32)> = Vec::new();
        for (root, mult) in factors {
            if mult == 0 {
                continue;
            }
            match merged.iter_mut().find(|(r, _)| *r == root) {
                Some((_, m)) => *m += mult,
                None => merged.push((root, mult)),
            }
        }
        FactoredForm {
            scalar,
            factors: merged,
        }
    }

    /// The constant form `scalar` (degree 0).
    pub fn constant(scalar: FieldElement) -> FactoredForm {
        FactoredForm::new(scalar, vec![])
    }

    /// Convenience: monic form with the given integer roots/multiplicities
    /// over `field`; a root of `None` means the point at infinity.
    pub fn from_int_roots(
        field: &Arc<NumberField>,
        roots: &[(Option<i64>, u32)],
    ) -> FactoredForm {
        let factors = roots
            .iter()
            .map(|&(r, m)| {
                let root = match r {
                    Some(n) => ProjRoot::finite_int(field, n),
                    None => ProjRoot::infinity(field),
                };
                (root, m)
            })
            .collect();
        FactoredForm::new(field.one(), factors)
    }

    pub fn scalar(&self) -> &FieldElement {
        &self.scalar
    }

    pub fn factors(&self) -> &[(ProjRoot, u32)] {
        &self.factors
    }

    pub fn field(&self) -> &Arc<NumberField> {
        self.scalar.field()
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|&(_, m)| m).sum()
    }

    /// Root multiplicities sorted weakly decreasing (the stratum pattern).
    pub fn multiplicity_pattern(&self) -> Vec<u32> {
        let mut mults: Vec<u32> = self.factors.iter().map(|&(_, m)| m).collect();
        mults.sort_unstable_by(|a, b| b.cmp(a));
        mults
    }

    pub fn multiplicity_of(&self, root: &ProjRoot) -> u32 {
        self.factors
            .iter()
            .find(|(r, _)| r == root)
            .map_or(0, |&(_, m)| m)
    }

    pub fn scale(&self, c: &FieldElement) -> FactoredForm {
        FactoredForm::new(&self.scalar * c, self.factors.clone())
    }

    /// The form raised to the `e`-th power (`e >= 1`).
    pub fn pow(&self, e: u32) -> FactoredForm {
        assert!(e >= 1, "zeroth power of a form is a bare scalar");
        FactoredForm::new(
            self.scalar.pow(e),
            self.factors
                .iter()
                .map(|(r, m)| (r.clone(), m * e))
                .collect(),
        )
    }

    /// Expanded coefficient vector.
    pub fn expand(&self) -> BinaryForm {
        let field = self.field();
        let mut coeffs = vec![self.scalar.clone()];
        for (root, mult) in &self.factors {
            let lin = root.factor_coeffs();
            for _ in 0..*mult {
                let mut next = vec![field.zero(); coeffs.len() + 1];
                for (i, c) in coeffs.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    for (j, l) in lin.iter().enumerate() {
                        let t = &next[i + j] + &(c * l);
                        next[i + j] = t;
                    }
                }
                coeffs = next;
            }
        }
        BinaryForm { coeffs }
    }

    /// Product of all distinct linear factors, with scalar 1.
    pub fn radical(&self) -> FactoredForm {
        FactoredForm::new(
            self.field().one(),
            self.factors.iter().map(|(r, _)| (r.clone(), 1)).collect(),
        )
    }

    /// True iff every root of `g` appears in `self` with at least the same
    /// multiplicity (so `g` divides `self` as a form, up to scalar).
    pub fn divisible_by(&self, g: &FactoredForm) -> bool {
        g.factors
            .iter()
            .all(|(r, m)| self.multiplicity_of(r) >= *m)
    }

    /// Exact quotient by a divisor; panics if `g` does not divide `self`.
    /// The quotient keeps `self`'s scalar (divisors are treated as monic).
    pub fn div_exact(&self, g: &FactoredForm) -> FactoredForm {
        assert!(self.divisible_by(g), "form division is not exact");
        let factors = self
            .factors
            .iter()
            .map(|(r, m)| (r.clone(), m - g.multiplicity_of(r)))
            .collect();
        FactoredForm::new(self.scalar.clone(), factors)
    }

    /// Dehomogenization `f(t, 1)` as a univariate polynomial in `t`.
    pub fn dehomogenize(&self) -> Poly {
        let field = self.field();
        let mut p = Poly::constant(self.scalar.clone());
        for (root, mult) in &self.factors {
            // beta*t - alpha
            let lin = Poly::new(field, vec![-root.alpha(), root.beta().clone()]);
            p = &p * &lin.pow(*mult);
        }
        p
    }
}

impl std::ops::Mul for &FactoredForm {
    type Output = FactoredForm;
    fn mul(self, rhs: &FactoredForm) -> FactoredForm {
        let mut factors = self.factors.clone();
        factors.extend(rhs.factors.iter().cloned());
        FactoredForm::new(&self.scalar * &rhs.scalar, factors)
    }
}

impl fmt::Debug for FactoredForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.scalar)?;
        for (root, mult) in &self.factors {
            write!(f, " * {root:?}^{mult}")?;
        }
        Ok(())
    }
}

/// Greatest common divisor of a nonempty list of forms: for each root, the
/// minimum multiplicity across the list; scalar 1.
pub fn gcd_forms(fs: &[FactoredForm]) -> FactoredForm {
    assert!(!fs.is_empty(), "gcd of empty form list");
    let field = fs[0].field();
    let factors = fs[0]
        .factors
        .iter()
        .filter_map(|(root, m0)| {
            let m = fs
                .iter()
                .map(|f| f.multiplicity_of(root))
                .min()
                .unwrap_or(0)
                .min(*m0);
            (m > 0).then(|| (root.clone(), m))
        })
        .collect();
    FactoredForm::new(field.one(), factors)
}

/// A binary form by coefficients: `coeffs[k]` multiplies `x^k y^{d-k}`,
/// length `d + 1`. The zero form of degree `d` is all-zero of that length.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryForm {
    coeffs: Vec<FieldElement>,
}

impl BinaryForm {
    pub fn new(coeffs: Vec<FieldElement>) -> BinaryForm {
        assert!(!coeffs.is_empty(), "binary form needs degree >= 0");
        BinaryForm { coeffs }
    }

    pub fn zero(field: &Arc<NumberField>, degree: u32) -> BinaryForm {
        BinaryForm {
            coeffs: vec![field.zero(); degree as usize + 1],
        }
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn degree(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(FieldElement::is_zero)
    }

    pub fn scale(&self, c: &FieldElement) -> BinaryForm {
        BinaryForm {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }
}

impl std::ops::Add for &BinaryForm {
    type Output = BinaryForm;
    fn add(self, rhs: &BinaryForm) -> BinaryForm {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len(), "degree mismatch");
        BinaryForm {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl std::ops::Sub for &BinaryForm {
    type Output = BinaryForm;
    fn sub(self, rhs: &BinaryForm) -> BinaryForm {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len(), "degree mismatch");
        BinaryForm {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl std::ops::Mul for &BinaryForm {
    type Output = BinaryForm;
    fn mul(self, rhs: &BinaryForm) -> BinaryForm {
        let field = self.coeffs[0].field();
        let mut coeffs = vec![field.zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let t = &coeffs[i + j] + &(a * b);
                coeffs[i + j] = t;
            }
        }
        BinaryForm { coeffs }
    }
}

impl fmt::Debug for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree() as usize;
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            if k > 0 {
                write!(f, "*x^{k}")?;
            }
            if d - k > 0 {
                write!(f, "*y^{}", d - k)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Wronskian of `k >= 1` dehomogenized forms: the exact determinant of the
/// k x k matrix whose `(i, j)` entry is the i-th derivative of `fs[j]`.
pub fn wronskian(fs: &[Poly]) -> Poly {
    assert!(!fs.is_empty(), "Wronskian of empty list");
    let k = fs.len();
    let mut matrix: Vec<Vec<Poly>> = vec![fs.to_vec()];
    for i in 1..k {
        let next: Vec<Poly> = matrix[i - 1].iter().map(Poly::derivative).collect();
        matrix.push(next);
    }
    det_division_free(&matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{exact_nullspace, Rational};
    use rand::{Rng, SeedableRng};

    #[test]
    fn expand_square_of_x_minus_y() {
        let q = NumberField::q();
        let f = FactoredForm::from_int_roots(&q, &[(Some(1), 2)]);
        let e = f.expand();
        assert_eq!(
            e.coeffs(),
            &[q.from_int(1), q.from_int(-2), q.from_int(1)]
        );
    }

    #[test]
    fn expand_x2y2_middle_entry() {
        let q = NumberField::q();
        let f = FactoredForm::from_int_roots(&q, &[(Some(0), 2), (None, 2)]);
        let e = f.expand();
        let expect: Vec<FieldElement> =
            [0, 0, 1, 0, 0].iter().map(|&n| q.from_int(n)).collect();
        assert_eq!(e.coeffs(), &expect[..]);
    }

    #[test]
    fn expand_cube_over_quadratic_field_matches_binomial() {
        // (x + c y)^3 with c = (3 - sqrt 3)/6: coefficient of x^k y^(3-k)
        // must equal C(3,k) * c^(3-k).
        let f = NumberField::quadratic(3);
        let c = &(&f.from_int(3) - &f.gen()) * &f.from_rational(Rational::new(1, 6));
        let root = ProjRoot::finite(-&c); // factor x - (-c) y = x + c y
        let form = FactoredForm::new(f.one(), vec![(root, 3)]);
        let e = form.expand();
        let binom = [1i64, 3, 3, 1];
        for k in 0..=3usize {
            let expect = &f.from_int(binom[k]) * &c.pow((3 - k) as u32);
            assert_eq!(e.coeffs()[k], expect, "coefficient of x^{k}");
        }
    }

    #[test]
    fn expand_is_multiplicative() {
        let q = NumberField::q();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let mut rand_form = || {
                let n_roots = rng.gen_range(1..=3);
                let factors: Vec<(Option<i64>, u32)> = (0..n_roots)
                    .map(|_| {
                        let root = if rng.gen_bool(0.15) {
                            None
                        } else {
                            Some(rng.gen_range(-4..=4))
                        };
                        (root, rng.gen_range(1..=3))
                    })
                    .collect();
                let mut f = FactoredForm::from_int_roots(&q, &factors);
                f = f.scale(&q.from_int(rng.gen_range(1..=5)));
                f
            };
            let (f, g) = (rand_form(), rand_form());
            let lhs = (&f * &g).expand();
            let rhs = &f.expand() * &g.expand();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn radical_examples() {
        let q = NumberField::q();
        // x^3 y^2 -> xy (up to the canonical -y factor sign).
        let f = FactoredForm::from_int_roots(&q, &[(Some(0), 3), (None, 2)]);
        let rad = f.radical();
        assert_eq!(rad.multiplicity_pattern(), vec![1, 1]);
        assert_eq!(rad.degree(), 2);
        assert!(f.divisible_by(&rad));
        assert_eq!(rad.radical(), rad);
    }

    #[test]
    fn radical_of_three_square_relation_product() {
        // f1 = 4 x^2 y^2, f2 = (x^2-y^2)^2, f3 = (x^2+y^2)^2 over Q(i):
        // the radical of the product has the six roots {0, inf, 1, -1, i, -i}.
        let f = NumberField::quadratic(-1);
        let i = f.gen();
        let f1 = FactoredForm::from_int_roots(&f, &[(Some(0), 2), (None, 2)])
            .scale(&f.from_int(4));
        let f2 = FactoredForm::from_int_roots(&f, &[(Some(1), 2), (Some(-1), 2)]);
        let f3 = FactoredForm::new(
            f.one(),
            vec![
                (ProjRoot::finite(i.clone()), 2),
                (ProjRoot::finite(-&i), 2),
            ],
        );
        // The relation itself must hold on expanded coefficients.
        let sum = &(&f1.expand() + &f2.expand()) - &f3.expand();
        assert!(sum.is_zero());
        let rad = (&(&f1 * &f2) * &f3).radical();
        assert_eq!(rad.degree(), 6);
        assert_eq!(rad.factors().len(), 6);
        for root in [
            ProjRoot::finite_int(&f, 0),
            ProjRoot::infinity(&f),
            ProjRoot::finite_int(&f, 1),
            ProjRoot::finite_int(&f, -1),
            ProjRoot::finite(i.clone()),
            ProjRoot::finite(-&i),
        ] {
            assert_eq!(rad.multiplicity_of(&root), 1);
        }
        // GCD of the three relation forms is 1: disjoint root sets.
        assert_eq!(gcd_forms(&[f1, f2, f3]).degree(), 0);
    }

    #[test]
    fn gcd_examples_and_division() {
        let q = NumberField::q();
        let f = FactoredForm::from_int_roots(&q, &[(Some(0), 2), (None, 1)]); // x^2 y
        let g = FactoredForm::from_int_roots(&q, &[(Some(0), 1), (None, 2)]); // x y^2
        let gcd = gcd_forms(&[f.clone(), g.clone()]);
        assert_eq!(gcd.multiplicity_pattern(), vec![1, 1]); // xy
        assert!(f.divisible_by(&gcd) && g.divisible_by(&gcd));
        let (fq, gq) = (f.div_exact(&gcd), g.div_exact(&gcd));
        assert_eq!(gcd_forms(&[fq, gq]).degree(), 0);
    }

    #[test]
    fn wronskian_small_cases() {
        let q = NumberField::q();
        let one = Poly::from_ints(&q, &[1]);
        let t = Poly::from_ints(&q, &[0, 1]);
        let t2 = Poly::from_ints(&q, &[0, 0, 1]);
        assert_eq!(wronskian(&[one.clone(), t.clone()]), Poly::from_ints(&q, &[1]));
        assert_eq!(wronskian(&[t.clone(), t2.clone()]), t2);
        // Linearly dependent list.
        let dep = &t + &(&t + &t); // 3t
        assert!(wronskian(&[t.clone(), dep]).is_zero());
    }

    #[test]
    fn wronskian_antisymmetry_and_dependence() {
        let q = NumberField::q();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..60 {
            let k = rng.gen_range(2..=4);
            let polys: Vec<Poly> = (0..k)
                .map(|_| {
                    let deg = rng.gen_range(0..=6);
                    let coeffs: Vec<i64> =
                        (0..=deg).map(|_| rng.gen_range(-2..=2)).collect();
                    Poly::from_ints(&q, &coeffs)
                })
                .collect();
            // Sign flip under swapping the first two inputs.
            let w = wronskian(&polys);
            let mut swapped = polys.clone();
            swapped.swap(0, 1);
            assert_eq!(wronskian(&swapped), -&w);
            // Vanishing iff the coefficient matrix has a nontrivial nullspace.
            let max_len = polys
                .iter()
                .map(|p| p.coeffs().len())
                .max()
                .unwrap()
                .max(1);
            let matrix: Vec<Vec<FieldElement>> = (0..max_len)
                .map(|i| polys.iter().map(|p| p.coeff(i)).collect())
                .collect();
            let dependent = !exact_nullspace(&matrix).unwrap().is_empty();
            assert_eq!(w.is_zero(), dependent);
        }
    }
}
