//! Secant degeneracy relations: the data model, exact verification, the
//! explicit unit-jump constructions, the subpartition and radical-power
//! lifts, the two algebraic-number identities for two-part strata, and the
//! built-in certificate library.
//!
//! A relation is `Σ cᵢ·fᵢ = 0` with at least three pairwise non-proportional
//! forms from one stratum; everything here is verified by exact expansion,
//! never trusted from construction.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::exactalg::{
    exact_nullspace, q_integer_normalize, FieldElement, NumFieldError, NumberField, Rational,
};
use crate::forms::{BinaryForm, FactoredForm, ProjRoot};
use crate::partitions::Partition;

/// An exact linear relation among forms of one stratum `S_mu`.
#[derive(Clone, PartialEq, Eq)]
pub struct SecantRelation {
    field: Arc<NumberField>,
    mu: Partition,
    terms: Vec<(FieldElement, FactoredForm)>,
}

impl SecantRelation {
    /// Assembles a relation without validating it; run [`verify_relation`].
    pub fn new(mu: Partition, terms: Vec<(FieldElement, FactoredForm)>) -> SecantRelation {
        assert!(!terms.is_empty(), "relation needs terms");
        let field = terms[0].1.field().clone();
        SecantRelation { field, mu, terms }
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn mu(&self) -> &Partition {
        &self.mu
    }

    pub fn terms(&self) -> &[(FieldElement, FactoredForm)] {
        &self.terms
    }

    /// Relation length `ℓ` (number of terms).
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `Σ cᵢ·expand(fᵢ)`; the zero vector iff the relation holds. All terms
    /// must have equal degree (guaranteed once stratum membership holds).
    pub fn sum_expanded(&self) -> BinaryForm {
        let mut acc: Option<BinaryForm> = None;
        for (c, f) in &self.terms {
            let t = f.expand().scale(c);
            acc = Some(match acc {
                Some(s) => &s + &t,
                None => t,
            });
        }
        acc.unwrap()
    }
}

impl fmt::Debug for SecantRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SecantRelation(mu = {}, length {}, field degree {})",
            self.mu,
            self.len(),
            self.field.degree()
        )
    }
}

/// First failed verification check of a [`SecantRelation`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationDefect {
    #[error("too few terms: a relation needs at least 3, got {len}")]
    TooFewTerms { len: usize },
    #[error("zero coefficient at term {index}")]
    ZeroCoefficient { index: usize },
    #[error("stratum membership: term {index} has multiplicity pattern {found:?}, expected mu")]
    StratumMembership { index: usize, found: Vec<u32> },
    #[error("proportional terms at indices {i} and {j}")]
    ProportionalTerms { i: usize, j: usize },
    #[error("nonzero sum: the terms do not cancel")]
    NonzeroSum,
}

/// Exact verification: term count, nonzero coefficients, stratum membership
/// of every factored term, pairwise non-proportionality, zero sum.
pub fn verify_relation(rel: &SecantRelation) -> Result<(), RelationDefect> {
    let terms = rel.terms();
    if terms.len() < 3 {
        return Err(RelationDefect::TooFewTerms { len: terms.len() });
    }
    if let Some(index) = terms.iter().position(|(c, _)| c.is_zero()) {
        return Err(RelationDefect::ZeroCoefficient { index });
    }
    let expected: Vec<u64> = rel.mu().parts().to_vec();
    for (index, (_, f)) in terms.iter().enumerate() {
        let found = f.multiplicity_pattern();
        let found64: Vec<u64> = found.iter().map(|&m| m as u64).collect();
        if found64 != expected {
            return Err(RelationDefect::StratumMembership { index, found });
        }
    }
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            if proportional(&terms[i].1, &terms[j].1) {
                return Err(RelationDefect::ProportionalTerms { i, j });
            }
        }
    }
    if !rel.sum_expanded().is_zero() {
        return Err(RelationDefect::NonzeroSum);
    }
    Ok(())
}

/// Two factored forms are proportional iff they have the same roots with
/// the same multiplicities (scalars absorb the ratio).
fn proportional(f: &FactoredForm, g: &FactoredForm) -> bool {
    f.factors().len() == g.factors().len()
        && f.factors()
            .iter()
            .all(|(root, m)| g.multiplicity_of(root) == *m)
}

#[derive(Debug, Error)]
pub enum RelationError {
    #[error("construction roots must be pairwise distinct")]
    DegenerateRoots,
    #[error("{0} is not a subpartition of {1}")]
    NotSubpartition(Partition, Partition),
    #[error("certificate {provenance:?} failed verification: {defect}")]
    InvalidCertificate {
        provenance: String,
        defect: RelationDefect,
    },
    #[error(transparent)]
    Field(#[from] NumFieldError),
}

/// Common field of a list of elements (coercing rational constants).
fn common_field(elts: &[&FieldElement]) -> Arc<NumberField> {
    let mut field = elts[0].field().clone();
    for e in elts {
        if field.is_q() {
            field = e.field().clone();
        }
    }
    field
}

fn align(x: &FieldElement, field: &Arc<NumberField>) -> FieldElement {
    &field.one() * x
}

/// Solves the 3-row linear system spanned by four monic quadratics
/// `(x-a)(x-b)` given as root pairs, returning the unique (up to scale)
/// dependence, normalized to primitive integers when rational.
fn quadratic_dependence(
    pairs: &[(FieldElement, FieldElement); 4],
) -> Result<Vec<FieldElement>, RelationError> {
    let field = pairs[0].0.field().clone();
    // Row i = coefficient of x^i, column j = quadratic j.
    let mut matrix = vec![vec![field.zero(); 4]; 3];
    for (j, (a, b)) in pairs.iter().enumerate() {
        matrix[0][j] = a * b;
        matrix[1][j] = -&(a + b);
        matrix[2][j] = field.one();
    }
    let basis = exact_nullspace(&matrix)?;
    assert_eq!(
        basis.len(),
        1,
        "four quadratics on distinct roots must have a one-dimensional dependence"
    );
    let v = basis.into_iter().next().unwrap();
    Ok(match q_integer_normalize(&v) {
        Some(ints) => ints
            .into_iter()
            .map(|n| field.from_rational(Rational::from_bigint(n)))
            .collect(),
        None => v,
    })
}

/// Four-term relation for `ν = (k+2, k+1, k)` at three distinct roots:
/// the common factor is `(x-p)^{k+1}(x-q)^k(x-r)^k` and the dependence is
/// carried by the quadratics `(x-p)(x-q)`, `(x-p)(x-r)`, `(x-q)²`, `(x-r)²`.
pub fn construct_adjacent_unit_jumps(
    k: u32,
    p: &FieldElement,
    q: &FieldElement,
    r: &FieldElement,
) -> Result<SecantRelation, RelationError> {
    assert!(k >= 1, "smallest part k must be positive");
    let field = common_field(&[p, q, r]);
    let (p, q, r) = (align(p, &field), align(q, &field), align(r, &field));
    if p == q || p == r || q == r {
        return Err(RelationError::DegenerateRoots);
    }
    let coeffs = quadratic_dependence(&[
        (p.clone(), q.clone()),
        (p.clone(), r.clone()),
        (q.clone(), q.clone()),
        (r.clone(), r.clone()),
    ])?;
    let roots = [
        ProjRoot::finite(p),
        ProjRoot::finite(q),
        ProjRoot::finite(r),
    ];
    // Multiplicity assignments of (p, q, r) for g1..g4.
    let mults: [[u32; 3]; 4] = [
        [k + 2, k + 1, k],
        [k + 2, k, k + 1],
        [k + 1, k + 2, k],
        [k + 1, k, k + 2],
    ];
    let terms = coeffs
        .into_iter()
        .zip(mults)
        .map(|(c, ms)| {
            let factors = roots.iter().cloned().zip(ms).collect();
            (c, FactoredForm::new(field.one(), factors))
        })
        .collect();
    let rel = SecantRelation::new(Partition::new(vec![(k + 2) as u64, (k + 1) as u64, k as u64]), terms);
    verify_relation(&rel).expect("adjacent-unit-jump construction must verify");
    Ok(rel)
}

/// Four-term relation for `ν` sorted from `(k1+1, k1, k2+1, k2)` at four
/// distinct roots: common factor `(x-p)^{k1}(x-q)^{k1}(x-r)^{k2}(x-s)^{k2}`,
/// dependence carried by `(x-p)(x-r)`, `(x-q)(x-r)`, `(x-p)(x-s)`,
/// `(x-q)(x-s)`.
pub fn construct_separated_unit_jumps(
    k1: u32,
    k2: u32,
    p: &FieldElement,
    q: &FieldElement,
    r: &FieldElement,
    s: &FieldElement,
) -> Result<SecantRelation, RelationError> {
    assert!(k2 >= 1 && k1 >= k2, "need k1 >= k2 >= 1");
    let field = common_field(&[p, q, r, s]);
    let (p, q, r, s) = (
        align(p, &field),
        align(q, &field),
        align(r, &field),
        align(s, &field),
    );
    let all = [&p, &q, &r, &s];
    for i in 0..4 {
        for j in i + 1..4 {
            if all[i] == all[j] {
                return Err(RelationError::DegenerateRoots);
            }
        }
    }
    let coeffs = quadratic_dependence(&[
        (p.clone(), r.clone()),
        (q.clone(), r.clone()),
        (p.clone(), s.clone()),
        (q.clone(), s.clone()),
    ])?;
    let roots = [
        ProjRoot::finite(p),
        ProjRoot::finite(q),
        ProjRoot::finite(r),
        ProjRoot::finite(s),
    ];
    // Multiplicity assignments of (p, q, r, s) for g1..g4.
    let mults: [[u32; 4]; 4] = [
        [k1 + 1, k1, k2 + 1, k2],
        [k1, k1 + 1, k2 + 1, k2],
        [k1 + 1, k1, k2, k2 + 1],
        [k1, k1 + 1, k2, k2 + 1],
    ];
    let terms = coeffs
        .into_iter()
        .zip(mults)
        .map(|(c, ms)| {
            let factors = roots.iter().cloned().zip(ms).collect();
            (c, FactoredForm::new(field.one(), factors))
        })
        .collect();
    let mu = Partition::new(vec![
        (k1 + 1) as u64,
        k1 as u64,
        (k2 + 1) as u64,
        k2 as u64,
    ]);
    let rel = SecantRelation::new(mu, terms);
    verify_relation(&rel).expect("separated-unit-jump construction must verify");
    Ok(rel)
}

/// Smallest nonnegative-integer roots avoiding `used` (updated in place).
fn fresh_integer_roots(
    field: &Arc<NumberField>,
    used: &mut Vec<ProjRoot>,
    count: usize,
) -> Vec<ProjRoot> {
    let mut out = Vec::with_capacity(count);
    let mut candidate: i64 = 0;
    while out.len() < count {
        let root = ProjRoot::finite_int(field, candidate);
        if !used.contains(&root) {
            used.push(root.clone());
            out.push(root);
        }
        candidate += 1;
    }
    out
}

/// All roots occurring in any term of the relation.
fn occupied_roots(rel: &SecantRelation) -> Vec<ProjRoot> {
    let mut roots: Vec<ProjRoot> = Vec::new();
    for (_, f) in rel.terms() {
        for (root, _) in f.factors() {
            if !roots.contains(root) {
                roots.push(root.clone());
            }
        }
    }
    roots
}

/// Lifts a relation for `ν` to `μ ⊇ ν` by multiplying every term by
/// `Π (x - a_j y)^{μ̂_j}`, where `μ̂ = μ∖ν` and the `a_j` are the smallest
/// unused nonnegative integers. Term count and coefficients are unchanged.
pub fn lift_subpartition(
    rel: &SecantRelation,
    mu: &Partition,
) -> Result<SecantRelation, RelationError> {
    if !mu.contains_submultiset(rel.mu()) {
        return Err(RelationError::NotSubpartition(rel.mu().clone(), mu.clone()));
    }
    let Some(hat) = mu.minus(rel.mu()) else {
        return Ok(rel.clone()); // ν = μ
    };
    let field = rel.field().clone();
    let mut used = occupied_roots(rel);
    let fresh = fresh_integer_roots(&field, &mut used, hat.len());
    let multiplier = FactoredForm::new(
        field.one(),
        fresh
            .into_iter()
            .zip(hat.parts())
            .map(|(root, &m)| (root, m as u32))
            .collect(),
    );
    let terms = rel
        .terms()
        .iter()
        .map(|(c, f)| (c.clone(), f * &multiplier))
        .collect();
    let lifted = SecantRelation::new(mu.clone(), terms);
    verify_relation(&lifted).expect("subpartition lift must verify");
    Ok(lifted)
}

/// Lifts a relation for `μ` to `μ′ = (μ₁+i, …, μ_r+i, i^{r(ℓ−1)})` by
/// multiplying every term by `(g′)^i`, where `g′` extends the combined
/// radical of all terms to degree `r·ℓ` with fresh integer roots.
pub fn lift_radical_power(rel: &SecantRelation, i: u32) -> SecantRelation {
    assert!(i >= 1, "radical power must be positive");
    let r = rel.mu().len();
    let ell = rel.len();
    for (_, f) in rel.terms() {
        assert_eq!(
            f.factors().len(),
            r,
            "radical-power lift needs terms with exactly r distinct roots"
        );
    }
    let field = rel.field().clone();
    let mut union = occupied_roots(rel);
    let target = r * ell;
    assert!(union.len() <= target, "combined radical exceeds r*l roots");
    let deficit = target - union.len();
    let mut factors: Vec<(ProjRoot, u32)> = union.iter().map(|r| (r.clone(), 1)).collect();
    factors.extend(
        fresh_integer_roots(&field, &mut union, deficit)
            .into_iter()
            .map(|r| (r, 1)),
    );
    let g_prime = FactoredForm::new(field.one(), factors);
    let multiplier = g_prime.pow(i);
    let mut parts: Vec<u64> = rel
        .mu()
        .parts()
        .iter()
        .map(|&p| p + i as u64)
        .collect();
    parts.extend(std::iter::repeat(i as u64).take(r * (ell - 1)));
    let terms = rel
        .terms()
        .iter()
        .map(|(c, f)| (c.clone(), f * &multiplier))
        .collect();
    let lifted = SecantRelation::new(Partition::new(parts), terms);
    verify_relation(&lifted).expect("radical-power lift must verify");
    lifted
}

/// The classical three-square identity `4x²y² + (x²−y²)² − (x²+y²)² = 0`
/// as a verified length-3 relation for `(2,2)` over `Q(i)`.
pub fn classical_two_two() -> SecantRelation {
    let f = NumberField::quadratic(-1);
    let i = f.gen();
    let f1 = FactoredForm::from_int_roots(&f, &[(Some(0), 2), (None, 2)]); // x^2 y^2
    let f2 = FactoredForm::from_int_roots(&f, &[(Some(1), 2), (Some(-1), 2)]); // (x^2-y^2)^2
    let f3 = FactoredForm::new(
        f.one(),
        vec![(ProjRoot::finite(i.clone()), 2), (ProjRoot::finite(-&i), 2)],
    ); // (x^2+y^2)^2
    let rel = SecantRelation::new(
        Partition::new(vec![2, 2]),
        vec![
            (f.from_int(4), f1),
            (f.from_int(1), f2),
            (f.from_int(-1), f3),
        ],
    );
    verify_relation(&rel).expect("classical (2,2) identity must verify");
    rel
}

/// Builds the four homogeneous `(4,3)` terms `y³(x+y)⁴`, `y³x⁴`,
/// `y⁴(x+ay)³`, `y⁴(x+by)³` as canonical factored forms (the canonical
/// factor for the root at infinity is `-y`, so odd powers of `y` flip the
/// sign of the expanded form; coefficients are chosen against the canonical
/// expansion).
fn quartic_cubic_terms(
    field: &Arc<NumberField>,
    a: &FieldElement,
    b: &FieldElement,
) -> [FactoredForm; 4] {
    let inf = ProjRoot::infinity(field);
    let f1 = FactoredForm::new(
        field.one(),
        vec![(ProjRoot::finite_int(field, -1), 4), (inf.clone(), 3)],
    );
    let f2 = FactoredForm::new(
        field.one(),
        vec![(ProjRoot::finite_int(field, 0), 4), (inf.clone(), 3)],
    );
    let f3 = FactoredForm::new(
        field.one(),
        vec![(ProjRoot::finite(-a), 3), (inf.clone(), 4)],
    );
    let f4 = FactoredForm::new(field.one(), vec![(ProjRoot::finite(-b), 3), (inf, 4)]);
    [f1, f2, f3, f4]
}

/// Solves `(x+1)⁴ − x⁴ = α(x+a)³ + β(x+b)³` exactly and returns the
/// verified 4-term relation for `(4,3)` over `Q(√3)`.
///
/// Matching coefficients gives the moment sequence `m₀=4, m₁=2, m₂=4/3,
/// m₃=1` for the weights `(α, β)` on the nodes `(a, b)`. The Newton-identity
/// elimination `m₂ = e₁m₁ − e₂m₀`, `m₃ = e₁m₂ − e₂m₁` yields `e₁ = a+b = 1`,
/// `e₂ = ab = 1/6`, so `a, b = (3∓√3)/6`, and the Vandermonde solve gives
/// `α = β = 2`.
pub fn solve_two_part_quartic_cubic() -> SecantRelation {
    let q = NumberField::q();
    let m = [
        q.from_int(4),
        q.from_int(2),
        q.from_rational(Rational::new(4, 3)),
        q.from_int(1),
    ];
    // Solve the 2x2 system m2 = e1 m1 - e2 m0; m3 = e1 m2 - e2 m1.
    let det = &(&m[1] * &m[1]) - &(&m[2] * &m[0]);
    let det_inv = det.inverse().expect("moment matrix is invertible");
    let e1 = &(&(&m[2] * &m[1]) - &(&m[3] * &m[0])) * &det_inv;
    let e2 = &(&(&m[2] * &m[2]) - &(&m[3] * &m[1])) * &det_inv;
    assert_eq!(e1, q.from_int(1));
    assert_eq!(e2, q.from_rational(Rational::new(1, 6)));
    // Consistency: the recurrence must also reproduce m3.
    assert_eq!(&(&e1 * &m[2]) - &(&e2 * &m[1]), m[3]);

    // Nodes a, b are the roots of t² − e1 t + e2 over Q(√3):
    // disc = e1² − 4e2 = 1/3, sqrt(1/3) = z/3 in Q[z]/(z²−3).
    let f = NumberField::quadratic(3);
    let disc = &(&e1 * &e1) - &(&q.from_int(4) * &e2);
    let sqrt_disc = &f.gen() * &f.from_rational(Rational::new(1, 3));
    assert_eq!(&sqrt_disc * &sqrt_disc, align(&disc, &f));
    let half = f.from_rational(Rational::new(1, 2));
    let a = &(&align(&e1, &f) - &sqrt_disc) * &half;
    let b = &(&align(&e1, &f) + &sqrt_disc) * &half;
    // Weights: alpha + beta = m0, alpha a + beta b = m1.
    let ab_diff_inv = (&a - &b).inverse().expect("a != b");
    let alpha = &(&align(&m[1], &f) - &(&align(&m[0], &f) * &b)) * &ab_diff_inv;
    let beta = &align(&m[0], &f) - &alpha;
    assert_eq!(alpha, f.from_int(2));
    assert_eq!(beta, f.from_int(2));

    let [f1, f2, f3, f4] = quartic_cubic_terms(&f, &a, &b);
    // With canonical factors, F1 = -(x+y)^4 y^3 and F2 = -x^4 y^3, so the
    // identity reads F1 - F2 + alpha F3 + beta F4 = 0.
    let rel = SecantRelation::new(
        Partition::new(vec![4, 3]),
        vec![
            (f.from_int(1), f1),
            (f.from_int(-1), f2),
            (alpha, f3),
            (beta, f4),
        ],
    );
    verify_relation(&rel).expect("re-solved quartic-cubic identity must verify");
    rel
}

/// The `(4,3)` identity as printed with `a = 3−√3`, `b = 3+√3`,
/// `L = (9−5√3)/18`, assembled verbatim for cross-checking. This relation
/// does NOT verify (the cubic terms cannot reach the quartic's leading
/// coefficient); callers should expect `NonzeroSum`.
pub fn printed_two_part_quartic_cubic() -> SecantRelation {
    let f = NumberField::quadratic(3);
    let a = &f.from_int(3) - &f.gen();
    let b = &f.from_int(3) + &f.gen();
    // L = (9 - 5z)/18
    let l = &(&f.from_int(9) - &(&f.from_int(5) * &f.gen()))
        * &f.from_rational(Rational::new(1, 18));
    let one_minus_l = &f.one() - &l;
    let [f1, f2, f3, f4] = quartic_cubic_terms(&f, &a, &b);
    SecantRelation::new(
        Partition::new(vec![4, 3]),
        vec![
            (f.from_int(1), f1),
            (f.from_int(-1), f2),
            (l, f3),
            (one_minus_l, f4),
        ],
    )
}

/// Outcome of the exact check of the printed `(5,3)` identity.
#[derive(Debug)]
pub struct Paper53Report {
    /// `3u² − u + 3 = 0` for `u = (1+w)/6` in `Q[w]/(w²+35)`: the stated
    /// quartic-root constant satisfies the degree-8 modulus.
    pub derivation_check: bool,
    /// Whether `f₁ + f₂ − f₃ − f₄` expanded to exactly zero.
    pub residual_zero: bool,
    /// The expanded coefficients of the sum (all zero on success).
    pub residual_coeffs: Vec<FieldElement>,
    /// The verified length-4 relation for `(5,3)` when the residual is zero.
    pub relation: Option<SecantRelation>,
    /// Which ring(s) the computation ran in.
    pub notes: Vec<String>,
}

/// The four `(5,3)` forms for a given invertible `c` in a quotient ring:
/// `f₁ = (x+c⁵y)³(x+c⁻³y)⁵` and its sign/inverse siblings.
fn paper53_terms(c: &FieldElement) -> Result<[FactoredForm; 4], NumFieldError> {
    let field = c.field().clone();
    let c_inv = c.inverse()?;
    let build = |u: &FieldElement, v: &FieldElement| {
        // (x + u^5 y)^3 (x + u^{-3} y)^5 with v = u^{-1}.
        FactoredForm::new(
            field.one(),
            vec![
                (ProjRoot::finite(-&u.pow(5)), 3),
                (ProjRoot::finite(-&v.pow(3)), 5),
            ],
        )
    };
    let c1 = c.clone();
    let c2 = -c;
    let c1_inv = c_inv.clone();
    let c2_inv = -&c_inv;
    Ok([
        build(&c1, &c1_inv),
        build(&c2, &c2_inv),
        build(&c1_inv, &c1),
        build(&c2_inv, &c2),
    ])
}

/// Sum `f₁+f₂−f₃−f₄` in the given ring with `c` the class of `z`.
fn paper53_residual(
    field: &Arc<NumberField>,
) -> Result<(Vec<FieldElement>, [FactoredForm; 4]), NumFieldError> {
    let [f1, f2, f3, f4] = paper53_terms(&field.gen())?;
    let sum = &(&f1.expand() + &f2.expand()) - &(&f3.expand() + &f4.expand());
    Ok((sum.coeffs().to_vec(), [f1, f2, f3, f4]))
}

/// Quotient of exact division of rational polynomials (constant-first);
/// `None` if the division is not exact.
fn exact_poly_quotient(num: &[Rational], den: &[Rational]) -> Option<Vec<Rational>> {
    let mut rem: Vec<Rational> = num.to_vec();
    while rem.last().is_some_and(Rational::is_zero) {
        rem.pop();
    }
    let deg_d = den.len() - 1;
    if rem.len() < den.len() {
        return None;
    }
    let mut quo = vec![Rational::zero(); rem.len() - deg_d];
    let lead = den.last().unwrap();
    for k in (0..quo.len()).rev() {
        let top = rem[k + deg_d].clone();
        if top.is_zero() {
            continue;
        }
        let c = &top / lead;
        for (i, d) in den.iter().enumerate() {
            let t = &rem[k + i] - &(d * &c);
            rem[k + i] = t;
        }
        quo[k] = c;
    }
    rem.iter().all(Rational::is_zero).then_some(quo)
}

/// Exact check of the printed length-4 identity for `(5,3)`.
///
/// The printed constant is `c = ((1+i√35)/6)^{1/4}`; from `c⁴ = (1+i√35)/6`
/// it follows that `3c⁸ − c⁴ + 3 = 0`, so the whole computation runs in the
/// quotient ring `Q[z]/(3z⁸−z⁴+3)` with `c₁ = z`, `c₂ = −z`. An identity in
/// the full quotient ring holds for every root of the modulus, so
/// irreducibility is never needed. If a zero divisor were encountered, the
/// check retries modulo each discovered factor and reports per-factor
/// outcomes.
pub fn verify_paper_53() -> Paper53Report {
    // Derivation check in Q[w]/(w² + 35) (so w plays i√35): u = (1+w)/6
    // must satisfy 3u² − u + 3 = 0.
    let w_field = NumberField::quadratic(-35);
    let u = &(&w_field.one() + &w_field.gen()) * &w_field.from_rational(Rational::new(1, 6));
    let derivation =
        &(&(&w_field.from_int(3) * &(&u * &u)) - &u) + &w_field.from_int(3);
    let derivation_check = derivation.is_zero();

    // Modulus 3z^8 - z^4 + 3, constant-term-first.
    let mut modulus = vec![Rational::zero(); 9];
    modulus[0] = Rational::from_int(3);
    modulus[4] = Rational::from_int(-1);
    modulus[8] = Rational::from_int(3);
    let ring = NumberField::new(modulus.clone());

    let mut notes = Vec::new();
    match paper53_residual(&ring) {
        Ok((residual_coeffs, [f1, f2, f3, f4])) => {
            let residual_zero = residual_coeffs.iter().all(FieldElement::is_zero);
            notes.push(format!(
                "computed in the full quotient ring of degree {}",
                ring.degree()
            ));
            let relation = residual_zero.then(|| {
                let rel = SecantRelation::new(
                    Partition::new(vec![5, 3]),
                    vec![
                        (ring.from_int(1), f1),
                        (ring.from_int(1), f2),
                        (ring.from_int(-1), f3),
                        (ring.from_int(-1), f4),
                    ],
                );
                verify_relation(&rel).expect("zero residual must yield a valid relation");
                rel
            });
            Paper53Report {
                derivation_check,
                residual_zero,
                residual_coeffs,
                relation,
                notes,
            }
        }
        Err(NumFieldError::ZeroDivisor(factor)) => {
            // Reducible modulus discovered: retry in each factor ring.
            notes.push("modulus factored during inversion; retrying per factor".into());
            let mut all_zero = true;
            let mut last_residual = Vec::new();
            let mut moduli = vec![factor.clone()];
            if let Some(complement) = exact_poly_quotient(&modulus, &factor) {
                moduli.push(complement);
            }
            for m in moduli {
                if m.len() < 2 {
                    continue;
                }
                let sub = NumberField::new(m);
                match paper53_residual(&sub) {
                    Ok((res, _)) => {
                        let zero = res.iter().all(FieldElement::is_zero);
                        notes.push(format!(
                            "factor ring of degree {}: residual {}",
                            sub.degree(),
                            if zero { "zero" } else { "nonzero" }
                        ));
                        all_zero &= zero;
                        last_residual = res;
                    }
                    Err(e) => {
                        notes.push(format!("factor ring of degree {}: {e}", sub.degree()));
                        all_zero = false;
                    }
                }
            }
            Paper53Report {
                derivation_check,
                residual_zero: all_zero,
                residual_coeffs: last_residual,
                relation: None,
                notes,
            }
        }
        Err(e) => {
            notes.push(format!("unexpected failure: {e}"));
            Paper53Report {
                derivation_check,
                residual_zero: false,
                residual_coeffs: vec![],
                relation: None,
                notes,
            }
        }
    }
}

/// A verified relation together with a human-readable origin string.
#[derive(Clone)]
pub struct CertificateEntry {
    pub provenance: String,
    pub relation: SecantRelation,
}

/// In-memory store of verified relations, queried by stratum. Monotonicity
/// (a relation for a subpartition bounds the full partition) is applied at
/// lookup time.
#[derive(Clone, Default)]
pub struct CertificateLibrary {
    entries: Vec<CertificateEntry>,
}

impl CertificateLibrary {
    pub fn empty() -> CertificateLibrary {
        CertificateLibrary::default()
    }

    /// The built-in certificates: the classical `(2,2)` identity, the
    /// re-solved `(4,3)` identity over `Q(√3)`, and the `(5,3)` identity in
    /// `Q[z]/(3z⁸−z⁴+3)` (included only if its exact residual is zero).
    pub fn builtin() -> CertificateLibrary {
        let mut lib = CertificateLibrary::empty();
        lib.add(
            "built-in: classical identity 4x^2y^2 + (x^2-y^2)^2 - (x^2+y^2)^2 = 0".into(),
            classical_two_two(),
        )
        .expect("built-in (2,2) certificate");
        lib.add(
            "built-in: quartic-cubic identity over Q(sqrt(3)), re-solved constants".into(),
            solve_two_part_quartic_cubic(),
        )
        .expect("built-in (4,3) certificate");
        let p53 = verify_paper_53();
        if let Some(rel) = p53.relation {
            lib.add(
                "built-in: length-4 identity for (5,3) in Q[z]/(3z^8-z^4+3)".into(),
                rel,
            )
            .expect("built-in (5,3) certificate");
        }
        lib
    }

    /// Verifies and stores a relation.
    pub fn add(&mut self, provenance: String, relation: SecantRelation) -> Result<(), RelationError> {
        if let Err(defect) = verify_relation(&relation) {
            return Err(RelationError::InvalidCertificate { provenance, defect });
        }
        self.entries.push(CertificateEntry {
            provenance,
            relation,
        });
        Ok(())
    }

    pub fn entries(&self) -> &[CertificateEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries whose stratum is exactly `mu`.
    pub fn for_partition(&self, mu: &Partition) -> Vec<&CertificateEntry> {
        self.entries.iter().filter(|e| e.relation.mu() == mu).collect()
    }

    /// Best (smallest-length) certificate applicable to `mu`: any stored
    /// relation for `mu` itself or for a subpartition of `mu` bounds
    /// `ℓ_mu` by its length.
    pub fn best_upper_for(&self, mu: &Partition) -> Option<(usize, &CertificateEntry)> {
        self.entries
            .iter()
            .filter(|e| mu.contains_submultiset(e.relation.mu()))
            .map(|e| (e.relation.len(), e))
            .min_by_key(|&(len, _)| len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_relation_verifies_and_perturbations_fail() {
        let rel = classical_two_two();
        assert_eq!(verify_relation(&rel), Ok(()));
        assert_eq!(rel.len(), 3);
        // Perturb one coefficient: 4 -> 2 must break the sum.
        let field = rel.field().clone();
        let mut terms = rel.terms().to_vec();
        terms[0].0 = field.from_int(2);
        let bad = SecantRelation::new(rel.mu().clone(), terms);
        assert_eq!(verify_relation(&bad), Err(RelationDefect::NonzeroSum));
        // Duplicate a term: proportional pair detected before the sum check.
        let mut dup = rel.terms().to_vec();
        dup[1].1 = dup[0].1.clone();
        let bad2 = SecantRelation::new(rel.mu().clone(), dup);
        assert_eq!(
            verify_relation(&bad2),
            Err(RelationDefect::ProportionalTerms { i: 0, j: 1 })
        );
    }

    #[test]
    fn verify_reports_membership_and_arity() {
        let rel = classical_two_two();
        let field = rel.field().clone();
        let mut terms = rel.terms().to_vec();
        terms.truncate(2);
        assert_eq!(
            verify_relation(&SecantRelation::new(rel.mu().clone(), terms.clone())),
            Err(RelationDefect::TooFewTerms { len: 2 })
        );
        let mut wrong = rel.terms().to_vec();
        wrong[2].1 = FactoredForm::from_int_roots(&field, &[(Some(5), 3), (Some(6), 1)]);
        assert_eq!(
            verify_relation(&SecantRelation::new(rel.mu().clone(), wrong)),
            Err(RelationDefect::StratumMembership {
                index: 2,
                found: vec![3, 1]
            })
        );
    }

    #[test]
    fn adjacent_unit_jumps_k1_reference_coefficients() {
        let q = NumberField::q();
        let rel = construct_adjacent_unit_jumps(
            1,
            &q.from_int(0),
            &q.from_int(1),
            &q.from_int(2),
        )
        .unwrap();
        assert_eq!(verify_relation(&rel), Ok(()));
        assert_eq!(rel.mu(), &Partition::new(vec![3, 2, 1]));
        let coeffs: Vec<FieldElement> = rel.terms().iter().map(|(c, _)| c.clone()).collect();
        let expected: Vec<FieldElement> =
            [2, 1, -4, 1].iter().map(|&n| q.from_int(n)).collect();
        assert_eq!(coeffs, expected);
    }

    #[test]
    fn adjacent_unit_jumps_same_coefficients_for_any_k() {
        let q = NumberField::q();
        for k in [1u32, 2, 3, 5] {
            let rel = construct_adjacent_unit_jumps(
                k,
                &q.from_int(0),
                &q.from_int(1),
                &q.from_int(2),
            )
            .unwrap();
            let coeffs: Vec<FieldElement> =
                rel.terms().iter().map(|(c, _)| c.clone()).collect();
            let expected: Vec<FieldElement> =
                [2, 1, -4, 1].iter().map(|&n| q.from_int(n)).collect();
            assert_eq!(coeffs, expected, "k = {k}");
            assert_eq!(verify_relation(&rel), Ok(()));
        }
    }

    #[test]
    fn adjacent_unit_jumps_random_roots_verify() {
        use rand::{Rng, SeedableRng};
        let q = NumberField::q();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(53);
        let mut done = 0;
        while done < 100 {
            let mut roots: Vec<i64> = (0..3).map(|_| rng.gen_range(-20..=20)).collect();
            roots.dedup();
            roots.sort_unstable();
            roots.dedup();
            if roots.len() < 3 {
                continue;
            }
            let k = rng.gen_range(1..=3);
            let rel = construct_adjacent_unit_jumps(
                k,
                &q.from_int(roots[0]),
                &q.from_int(roots[1]),
                &q.from_int(roots[2]),
            )
            .unwrap();
            assert_eq!(verify_relation(&rel), Ok(()));
            done += 1;
        }
        // Degenerate roots are rejected.
        assert!(matches!(
            construct_adjacent_unit_jumps(1, &q.from_int(0), &q.from_int(0), &q.from_int(1)),
            Err(RelationError::DegenerateRoots)
        ));
    }

    #[test]
    fn adjacent_gcd_quotient_matches_quadratic_system() {
        // Dividing the four terms by their GCD must leave the bare
        // quadratics, whose nullspace is the relation's coefficient vector.
        let q = NumberField::q();
        let rel =
            construct_adjacent_unit_jumps(2, &q.from_int(0), &q.from_int(1), &q.from_int(2))
                .unwrap();
        let forms: Vec<FactoredForm> = rel.terms().iter().map(|(_, f)| f.clone()).collect();
        let gcd = crate::forms::gcd_forms(&forms);
        assert_eq!(gcd.degree(), rel.mu().degree() as u32 - 2);
        let quadratics: Vec<FactoredForm> = forms.iter().map(|f| f.div_exact(&gcd)).collect();
        // Coefficient matrix of the quadratics, rows = monomial index.
        let matrix: Vec<Vec<FieldElement>> = (0..3)
            .map(|i| {
                quadratics
                    .iter()
                    .map(|f| f.expand().coeffs()[i].clone())
                    .collect()
            })
            .collect();
        let basis = exact_nullspace(&matrix).unwrap();
        assert_eq!(basis.len(), 1);
        let normalized = q_integer_normalize(&basis[0]).unwrap();
        let rel_coeffs = q_integer_normalize(
            &rel.terms().iter().map(|(c, _)| c.clone()).collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(normalized, rel_coeffs);
    }

    #[test]
    fn separated_unit_jumps_reference_coefficients() {
        let q = NumberField::q();
        let rel = construct_separated_unit_jumps(
            2,
            1,
            &q.from_int(0),
            &q.from_int(1),
            &q.from_int(2),
            &q.from_int(3),
        )
        .unwrap();
        assert_eq!(verify_relation(&rel), Ok(()));
        assert_eq!(rel.mu(), &Partition::new(vec![3, 2, 2, 1]));
        let coeffs: Vec<FieldElement> = rel.terms().iter().map(|(c, _)| c.clone()).collect();
        let expected: Vec<FieldElement> =
            [2, -3, -1, 2].iter().map(|&n| q.from_int(n)).collect();
        assert_eq!(coeffs, expected);
    }

    #[test]
    fn separated_unit_jumps_random_parameters_verify() {
        use rand::{Rng, SeedableRng};
        let q = NumberField::q();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(59);
        let mut done = 0;
        while done < 100 {
            let mut roots: Vec<i64> = (0..4).map(|_| rng.gen_range(-25..=25)).collect();
            roots.sort_unstable();
            roots.dedup();
            if roots.len() < 4 {
                continue;
            }
            let k2 = rng.gen_range(1..=3);
            let k1 = k2 + rng.gen_range(0..=2);
            let rel = construct_separated_unit_jumps(
                k1,
                k2,
                &q.from_int(roots[0]),
                &q.from_int(roots[1]),
                &q.from_int(roots[2]),
                &q.from_int(roots[3]),
            )
            .unwrap();
            assert_eq!(verify_relation(&rel), Ok(()));
            done += 1;
        }
    }

    #[test]
    fn lift_subpartition_examples() {
        // (3,2,2) minus (2,2) leaves the multiset {3}: the lift multiplies
        // every term of the classical relation by one fresh cube (x - a y)^3.
        let rel = classical_two_two();
        let mu = Partition::new(vec![3, 2, 2]);
        let lifted = lift_subpartition(&rel, &mu).unwrap();
        assert_eq!(verify_relation(&lifted), Ok(()));
        assert_eq!(lifted.mu(), &mu);
        assert_eq!(lifted.len(), 3);
        // Identity lift.
        let same = lift_subpartition(&rel, &Partition::new(vec![2, 2])).unwrap();
        assert_eq!(&same, &rel);
        // Not a subpartition.
        assert!(matches!(
            lift_subpartition(&rel, &Partition::new(vec![3, 2])),
            Err(RelationError::NotSubpartition(_, _))
        ));
    }

    #[test]
    fn lift_subpartition_from_unit_jump_construction() {
        // Lift the k=1 adjacent relation for (3,2,1) to (3,3,2,1): the
        // difference is {3}, and the fresh cube must avoid roots 0, 1, 2.
        let q = NumberField::q();
        let rel =
            construct_adjacent_unit_jumps(1, &q.from_int(0), &q.from_int(1), &q.from_int(2))
                .unwrap();
        let mu = Partition::new(vec![3, 3, 2, 1]);
        let lifted = lift_subpartition(&rel, &mu).unwrap();
        assert_eq!(verify_relation(&lifted), Ok(()));
        assert_eq!(lifted.len(), rel.len());
        // The fresh root must avoid the existing roots 0, 1, 2: it is 3.
        for (_, f) in lifted.terms() {
            assert_eq!(f.multiplicity_of(&ProjRoot::finite_int(&q, 3)), 3);
        }
    }

    #[test]
    fn lift_radical_power_examples() {
        let rel = classical_two_two();
        // r = 2, l = 3, combined radical degree 6 = r*l: g' is the radical
        // itself; i = 1 gives (3,3,1,1,1,1).
        let lifted = lift_radical_power(&rel, 1);
        assert_eq!(
            lifted.mu(),
            &Partition::new(vec![3, 3, 1, 1, 1, 1])
        );
        assert_eq!(verify_relation(&lifted), Ok(()));
        assert_eq!(lifted.len(), 3);
        let lifted2 = lift_radical_power(&rel, 2);
        assert_eq!(
            lifted2.mu(),
            &Partition::new(vec![4, 4, 2, 2, 2, 2])
        );
        assert_eq!(verify_relation(&lifted2), Ok(()));
    }

    #[test]
    fn lift_radical_power_appends_fresh_roots() {
        // A 4-term relation whose combined radical has degree < r*l: the
        // adjacent-unit-jump relation has r = 3, l = 4, but only 3 distinct
        // roots in total, so 9 fresh roots are appended.
        let q = NumberField::q();
        let rel =
            construct_adjacent_unit_jumps(1, &q.from_int(0), &q.from_int(1), &q.from_int(2))
                .unwrap();
        let lifted = lift_radical_power(&rel, 1);
        let mut parts = vec![4u64, 3, 2];
        parts.extend(std::iter::repeat(1).take(9));
        assert_eq!(lifted.mu(), &Partition::new(parts));
        assert_eq!(verify_relation(&lifted), Ok(()));
        assert_eq!(lifted.len(), 4);
    }

    #[test]
    fn quartic_cubic_solved_constants() {
        let rel = solve_two_part_quartic_cubic();
        assert_eq!(verify_relation(&rel), Ok(()));
        assert_eq!(rel.mu(), &Partition::new(vec![4, 3]));
        assert_eq!(rel.len(), 4);
        // Roots -a, -b of the cubic terms: a+b = 1 and ab = 1/6.
        let f = rel.field().clone();
        let minus_a = rel.terms()[2].1.factors()[0].0.alpha();
        let minus_b = rel.terms()[3].1.factors()[0].0.alpha();
        let a = -minus_a;
        let b = -minus_b;
        assert_eq!(&a + &b, f.one());
        assert_eq!(&a * &b, f.from_rational(Rational::new(1, 6)));
    }

    #[test]
    fn quartic_cubic_printed_constants_fail() {
        let rel = printed_two_part_quartic_cubic();
        assert_eq!(verify_relation(&rel), Err(RelationDefect::NonzeroSum));
    }

    #[test]
    fn paper53_residual_is_zero() {
        let report = verify_paper_53();
        assert!(report.derivation_check, "3u^2 - u + 3 must vanish");
        assert!(report.residual_zero, "residual: {:?}", report.residual_coeffs);
        let rel = report.relation.expect("verified relation");
        assert_eq!(rel.mu(), &Partition::new(vec![5, 3]));
        assert_eq!(rel.len(), 4);
        assert_eq!(verify_relation(&rel), Ok(()));
    }

    #[test]
    fn paper53_inverse_symmetry() {
        // c <-> 1/c maps f1 <-> f3 and f2 <-> f4.
        let mut modulus = vec![Rational::zero(); 9];
        modulus[0] = Rational::from_int(3);
        modulus[4] = Rational::from_int(-1);
        modulus[8] = Rational::from_int(3);
        let ring = NumberField::new(modulus);
        let c = ring.gen();
        let [f1, f2, f3, f4] = paper53_terms(&c).unwrap();
        let c_inv = c.inverse().unwrap();
        let [g1, g2, g3, g4] = paper53_terms(&c_inv).unwrap();
        assert_eq!(g1, f3);
        assert_eq!(g3, f1);
        assert_eq!(g2, f4);
        assert_eq!(g4, f2);
    }

    #[test]
    fn library_builtin_and_lookup() {
        let lib = CertificateLibrary::builtin();
        assert_eq!(lib.len(), 3, "all three built-ins must verify");
        // Exact lookups.
        assert_eq!(lib.for_partition(&Partition::new(vec![2, 2])).len(), 1);
        assert_eq!(lib.for_partition(&Partition::new(vec![4, 3])).len(), 1);
        assert_eq!(lib.for_partition(&Partition::new(vec![5, 3])).len(), 1);
        // Monotone lookup: (5,3) certificate applies to (5,3,...) supersets.
        let (len, entry) = lib
            .best_upper_for(&Partition::new(vec![5, 3, 1]))
            .expect("subpartition certificate applies");
        assert_eq!(len, 4);
        assert_eq!(entry.relation.mu(), &Partition::new(vec![5, 3]));
        // (2,2): the classical relation gives 3.
        let (len, _) = lib.best_upper_for(&Partition::new(vec![2, 2])).unwrap();
        assert_eq!(len, 3);
        // No certificate matches (3,1).
        assert!(lib.best_upper_for(&Partition::new(vec![3, 1])).is_none());
        // Invalid certificates are rejected.
        let mut lib2 = CertificateLibrary::empty();
        let err = lib2.add("bad".into(), printed_two_part_quartic_cubic());
        assert!(matches!(
            err,
            Err(RelationError::InvalidCertificate { .. })
        ));
        assert!(lib2.is_empty());
    }
}
