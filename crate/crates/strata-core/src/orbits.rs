//! `Sym_r`-orbit machinery.
//!
//! A form with `r` distinct roots and multiplicity pattern μ is determined by
//! assigning the parts of μ to the roots. Permuting the assignment produces
//! the orbit of the form under the symmetric group; linear dependences inside
//! one orbit are exactly the common-radical relations, and those drive both
//! the growing/stabilising classification and the parking-style upper bounds.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{
    exact_nullspace, exact_rank, q_integer_normalize, FieldElement, NumFieldError, NumberField,
    Rational,
};
use crate::forms::{FactoredForm, ProjRoot};
use crate::partitions::{jump_data, Partition};
use crate::relations::{verify_relation, SecantRelation};

/// Largest orbit (arrangement count) the budget search will materialise.
const ORBIT_ROW_CAP: u128 = 720;
/// Longest circuit the budget search will try to extract.
const MAX_CIRCUIT_LEN: usize = 8;

/// Errors from orbit-matrix construction.
#[derive(Debug, Error)]
pub enum OrbitError {
    /// The supplied roots are not pairwise distinct.
    #[error("orbit roots must be pairwise distinct")]
    DuplicateRoots,
    /// The number of roots does not match the number of parts of μ.
    #[error("expected {expected} roots (one per part of the partition), found {found}")]
    RootCountMismatch { expected: usize, found: usize },
    /// Exact arithmetic hit a zero divisor in a reducible quotient ring.
    #[error(transparent)]
    Field(#[from] NumFieldError),
}

/// All distinct arrangements of the entries of `values` (as a multiset), in
/// descending lexicographic order.
pub fn multiset_permutations(values: &[u64]) -> Vec<Vec<u64>> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|x, y| y.cmp(x));
    let mut pool: Vec<(u64, usize)> = Vec::new();
    for v in sorted {
        match pool.last_mut() {
            Some((w, c)) if *w == v => *c += 1,
            _ => pool.push((v, 1)),
        }
    }
    fn rec(pool: &mut Vec<(u64, usize)>, cur: &mut Vec<u64>, len: usize, out: &mut Vec<Vec<u64>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in 0..pool.len() {
            if pool[i].1 == 0 {
                continue;
            }
            pool[i].1 -= 1;
            cur.push(pool[i].0);
            rec(pool, cur, len, out);
            cur.pop();
            pool[i].1 += 1;
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(values.len());
    rec(&mut pool, &mut cur, values.len(), &mut out);
    out
}

/// The number of distinct arrangements of μ's parts, r!/(m₁!·…·m_s!),
/// saturating at `u128::MAX` on overflow.
pub fn multinomial(mu: &Partition) -> u128 {
    let mut placed: u128 = 0;
    let mut result: u128 = 1;
    for value in mu.distinct_parts() {
        for k in 1..=mu.count_of(value) as u128 {
            placed += 1;
            result = match result.checked_mul(placed) {
                Some(x) => x / k,
                None => return u128::MAX,
            };
        }
    }
    result
}

/// The expanded coefficient matrix of the `Sym_r`-orbit of a form with
/// multiplicity pattern μ at a fixed tuple of distinct roots: one row per
/// arrangement, one column per coefficient of the degree-d expansion.
#[derive(Debug, Clone)]
pub struct OrbitMatrix {
    mu: Partition,
    roots: Vec<ProjRoot>,
    field: Arc<NumberField>,
    arrangements: Vec<Vec<u64>>,
    matrix: Vec<Vec<FieldElement>>,
}

impl OrbitMatrix {
    pub fn mu(&self) -> &Partition {
        &self.mu
    }

    pub fn roots(&self) -> &[ProjRoot] {
        &self.roots
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    /// Multiplicity assignments, one per orbit element, in descending
    /// lexicographic order.
    pub fn arrangements(&self) -> &[Vec<u64>] {
        &self.arrangements
    }

    /// N × (d+1) matrix of expanded coefficients, rows parallel to
    /// `arrangements`.
    pub fn matrix(&self) -> &[Vec<FieldElement>] {
        &self.matrix
    }

    /// The factored (monic) form realising arrangement `i`.
    pub fn form(&self, i: usize) -> FactoredForm {
        let factors = self
            .roots
            .iter()
            .zip(&self.arrangements[i])
            .map(|(root, &m)| {
                (
                    root.clone(),
                    u32::try_from(m).expect("part too large for a form multiplicity"),
                )
            })
            .collect();
        FactoredForm::new(self.field.one(), factors)
    }
}

fn ambient_field(roots: &[ProjRoot]) -> Arc<NumberField> {
    roots
        .iter()
        .map(|r| r.field())
        .find(|f| !f.is_q())
        .cloned()
        .unwrap_or_else(NumberField::q)
}

/// Builds the orbit matrix of μ at the given roots (one root per part).
pub fn orbit_matrix(mu: &Partition, roots: &[ProjRoot]) -> Result<OrbitMatrix, OrbitError> {
    if roots.len() != mu.len() {
        return Err(OrbitError::RootCountMismatch {
            expected: mu.len(),
            found: roots.len(),
        });
    }
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if roots[i] == roots[j] {
                return Err(OrbitError::DuplicateRoots);
            }
        }
    }
    let mut om = OrbitMatrix {
        mu: mu.clone(),
        roots: roots.to_vec(),
        field: ambient_field(roots),
        arrangements: multiset_permutations(mu.parts()),
        matrix: Vec::new(),
    };
    om.matrix = (0..om.arrangements.len())
        .map(|i| om.form(i).expand().coeffs().to_vec())
        .collect();
    Ok(om)
}

/// Exact rank of the orbit matrix over its field.
pub fn orbit_rank(om: &OrbitMatrix) -> Result<usize, NumFieldError> {
    exact_rank(om.matrix())
}

/// Searches the orbit of μ at `roots` for a minimally dependent subset (a
/// circuit) of at most `max_len` forms and returns it as a verified relation.
///
/// All orbit forms share the radical Π(βx−αy) by construction, so any
/// returned relation is a common-radical relation.
pub fn find_common_radical_relation(
    mu: &Partition,
    roots: &[ProjRoot],
    max_len: usize,
) -> Result<Option<SecantRelation>, OrbitError> {
    let om = orbit_matrix(mu, roots)?;
    let n = om.arrangements().len();
    if n < 3 || max_len < 3 {
        return Ok(None);
    }

    // Dependences among the forms are nullspace vectors of the transposed
    // matrix (forms as columns).
    let cols = om.matrix()[0].len();
    let transposed: Vec<Vec<FieldElement>> = (0..cols)
        .map(|c| (0..n).map(|r| om.matrix()[r][c].clone()).collect())
        .collect();
    let basis = exact_nullspace(&transposed).map_err(OrbitError::from)?;
    if basis.is_empty() {
        return Ok(None);
    }

    // Every circuit's dependence vector is a combination of the basis, so its
    // support lies in the union of the basis supports; enumerating subsets of
    // that union by increasing cardinality finds a minimal circuit first.
    let candidates: Vec<usize> = (0..n)
        .filter(|&i| basis.iter().any(|v| !v[i].is_zero()))
        .collect();
    let m = candidates.len();
    for size in 3..=max_len.min(m) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let subset: Vec<usize> = idx.iter().map(|&i| candidates[i]).collect();
            if let Some(rel) = try_circuit(&om, &subset)? {
                return Ok(Some(rel));
            }
            let mut advanced = false;
            let mut pos = size;
            while pos > 0 {
                pos -= 1;
                if idx[pos] != pos + m - size {
                    idx[pos] += 1;
                    for j in pos + 1..size {
                        idx[j] = idx[j - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    Ok(None)
}

fn try_circuit(om: &OrbitMatrix, subset: &[usize]) -> Result<Option<SecantRelation>, NumFieldError> {
    let cols = om.matrix()[0].len();
    let restricted: Vec<Vec<FieldElement>> = (0..cols)
        .map(|c| subset.iter().map(|&i| om.matrix()[i][c].clone()).collect())
        .collect();
    let null = exact_nullspace(&restricted)?;
    // A circuit has nullity exactly one with full support.
    if null.len() != 1 || null[0].iter().any(|x| x.is_zero()) {
        return Ok(None);
    }
    let coeffs = normalize_coeffs(&null[0], om.field());
    let terms: Vec<(FieldElement, FactoredForm)> = subset
        .iter()
        .zip(coeffs)
        .map(|(&i, c)| (c, om.form(i)))
        .collect();
    let rel = SecantRelation::new(om.mu().clone(), terms);
    debug_assert!(verify_relation(&rel).is_ok());
    Ok(Some(rel))
}

pub(crate) fn normalize_coeffs(v: &[FieldElement], field: &Arc<NumberField>) -> Vec<FieldElement> {
    match q_integer_normalize(v) {
        Some(ints) => ints
            .into_iter()
            .map(|n| field.from_rational(Rational::from_bigint(n)))
            .collect(),
        None => v.to_vec(),
    }
}

/// Verdict of the growing/stabilising decision procedure.
#[derive(Debug, Clone)]
pub enum Classification {
    /// Certified growing, with the name of the rule that fired.
    Growing { rule: String },
    /// Certified stabilising, with a verified common-radical relation.
    Stabilising { relation: Box<SecantRelation> },
    /// Neither certificate found within budget.
    Unknown { report: SearchReport },
}

impl Classification {
    pub fn is_growing(&self) -> bool {
        matches!(self, Classification::Growing { .. })
    }

    pub fn is_stabilising(&self) -> bool {
        matches!(self, Classification::Stabilising { .. })
    }
}

/// What the budget search tried before giving up.
#[derive(Debug, Clone, Default)]
pub struct SearchReport {
    /// Number of root-set trials allowed.
    pub budget: u64,
    /// Number of root-set trials performed.
    pub trials: u64,
    /// Root sets whose orbit matrix had full rank. Evidence for growing, not
    /// a certificate: growth requires full rank at *every* root set.
    pub full_rank_witnesses: Vec<String>,
    /// Trials skipped or abandoned for structural reasons (zero divisors in a
    /// quotient ring, size caps).
    pub notes: Vec<String>,
}

fn factorial_squared(r: usize) -> Option<u128> {
    let f = (1..=r as u128).try_fold(1u128, |acc, k| acc.checked_mul(k))?;
    f.checked_mul(f)
}

fn partition_seed(mu: &Partition) -> u64 {
    // FNV-1a over the parts: deterministic across runs and platforms.
    let mut seed = 0xcbf2_9ce4_8422_2325u64;
    for &p in mu.parts() {
        seed ^= p;
        seed = seed.wrapping_mul(0x0000_0100_0000_01b3);
    }
    seed
}

fn trial_root_set(r: usize, trial: u64, rng: &mut ChaCha8Rng) -> (String, Vec<ProjRoot>) {
    let q = NumberField::q();
    match trial {
        0 => {
            // 0, 1, -1, 2, -2, ...
            let values: Vec<i64> = (0..r as i64)
                .map(|k| if k % 2 == 1 { k / 2 + 1 } else { -(k / 2) })
                .collect();
            let roots = values
                .iter()
                .map(|&v| ProjRoot::finite_int(&q, v))
                .collect();
            (format!("symmetric integers {values:?}"), roots)
        }
        1 => {
            // 1, z, ..., z^{r-1} with z^r = 1, z ≠ 1, in Q[z]/(1+z+…+z^{r-1}).
            let field = NumberField::new(vec![Rational::one(); r]);
            let roots = (0..r)
                .map(|k| ProjRoot::finite(field.gen().pow(k as u32)))
                .collect();
            (format!("roots of unity of order {r}"), roots)
        }
        2 | 3 | 4 => {
            let (start, step) = [(0i64, 1i64), (1, 2), (0, 3)][trial as usize - 2];
            let values: Vec<i64> = (0..r as i64).map(|k| start + k * step).collect();
            let roots = values
                .iter()
                .map(|&v| ProjRoot::finite_int(&q, v))
                .collect();
            (
                format!("arithmetic progression start {start} step {step}"),
                roots,
            )
        }
        _ => {
            let span = 4 * r as i64;
            let pool: Vec<i64> = (-span..=span).collect();
            let values: Vec<i64> = pool.choose_multiple(rng, r).copied().collect();
            let roots = values
                .iter()
                .map(|&v| ProjRoot::finite_int(&q, v))
                .collect();
            (format!("random integers {values:?}"), roots)
        }
    }
}

/// Decides (or bounds the search for) the growing/stabilising dichotomy.
///
/// Stages, in order: (a) one or two parts are always growing (at most r! ≤ 2
/// arrangements exist, but a common-radical relation needs three pairwise
/// non-proportional forms); (b) if every jump is at least (r!)², growing;
/// (c) three parts are decided exactly by the orbit Wronskian; (d) otherwise
/// a budget search over root sets looks for a rank-deficient orbit, which
/// certifies stabilising. Full-rank witnesses never certify growing, so the
/// last stage otherwise returns `Unknown` with its search report.
pub fn classify_index(mu: &Partition, budget: u64) -> Classification {
    let r = mu.len();
    if r <= 2 {
        return Classification::Growing {
            rule: "two-part rule".into(),
        };
    }
    if let Some(threshold) = factorial_squared(r) {
        if jump_data(mu).jumps.iter().all(|&j| u128::from(j) >= threshold) {
            return Classification::Growing {
                rule: "factorial-jump rule".into(),
            };
        }
    }
    if r == 3 {
        let parts = mu.parts();
        if strongly_stabilising_3parts(parts[2], parts[1], parts[0]) {
            let q = NumberField::q();
            let roots: Vec<ProjRoot> = [0, 1, -1]
                .iter()
                .map(|&v| ProjRoot::finite_int(&q, v))
                .collect();
            let relation = find_common_radical_relation(mu, &roots, 6)
                .expect("exact arithmetic over Q cannot hit zero divisors")
                .expect("a vanishing orbit Wronskian forces a dependence at any distinct roots");
            return Classification::Stabilising {
                relation: Box::new(relation),
            };
        }
        return Classification::Growing {
            rule: "3-part Wronskian rule".into(),
        };
    }

    let mut report = SearchReport {
        budget,
        ..Default::default()
    };
    let n = multinomial(mu);
    if n > ORBIT_ROW_CAP {
        report.notes.push(format!(
            "orbit has {n} arrangements, above the search cap of {ORBIT_ROW_CAP}"
        ));
        return Classification::Unknown { report };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(partition_seed(mu));
    for trial in 0..budget {
        let (desc, roots) = trial_root_set(r, trial, &mut rng);
        report.trials += 1;
        let om = match orbit_matrix(mu, &roots) {
            Ok(om) => om,
            Err(e) => {
                report.notes.push(format!("{desc}: {e}"));
                continue;
            }
        };
        let n = om.arrangements().len();
        match orbit_rank(&om) {
            Err(e) => report.notes.push(format!("{desc}: {e}")),
            Ok(rank) if rank == n => report.full_rank_witnesses.push(desc),
            Ok(rank) => {
                let cap = (rank + 1).min(MAX_CIRCUIT_LEN);
                match find_common_radical_relation(mu, &roots, cap) {
                    Ok(Some(relation)) => {
                        return Classification::Stabilising {
                            relation: Box::new(relation),
                        }
                    }
                    Ok(None) => report.notes.push(format!(
                        "{desc}: rank {rank} of {n} is deficient, but no circuit of length <= {cap}"
                    )),
                    Err(e) => report.notes.push(format!("{desc}: {e}")),
                }
            }
        }
    }
    Classification::Unknown { report }
}

/// First `len` coefficients (ascending in t) of Π (t − root)^mult over the
/// integers.
fn truncated_expansion(factors: &[(i64, u64)], len: usize) -> Vec<BigInt> {
    let mut acc = vec![BigInt::zero(); len];
    acc[0] = BigInt::one();
    for &(root, mult) in factors {
        let root = BigInt::from(root);
        for _ in 0..mult {
            for i in (0..len).rev() {
                let lower = if i > 0 {
                    acc[i - 1].clone()
                } else {
                    BigInt::zero()
                };
                acc[i] = lower - &root * &acc[i];
            }
        }
    }
    acc
}

/// Fraction-free (Bareiss) determinant over the integers.
fn det_bigint(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = t / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m.pop().unwrap().pop().unwrap();
    if sign < 0 {
        -det
    } else {
        det
    }
}

fn factorials(k: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(k);
    let mut acc = BigInt::one();
    for i in 0..k {
        if i > 0 {
            acc *= i as u64;
        }
        out.push(acc.clone());
    }
    out
}

/// Decides whether the three-part partition (a ≤ b ≤ c) admits a strongly
/// common radical solution, by testing whether the Wronskian in t of the full
/// orbit of (t−x₁)^a(t−x₂)^b(t−x₃)^c vanishes identically in (t,x₁,x₂,x₃).
///
/// The test is deterministic, not probabilistic. Dividing every orbit
/// function by the common factor g = Π(t−x_i)^a multiplies the Wronskian by
/// the nowhere-zero g^k (W(g·h₁,…,g·h_k) = g^k·W(h₁,…,h_k)), so the residual
/// multiplicities (0, b−a, c−a) suffice. Translation invariance removes t:
/// W(t,x) = V(x₁−t, x₂−t, x₃−t) for V = W(0,·), and V ≡ 0 is decided by
/// evaluating its dehomogenization at an integer grid exceeding its degree in
/// each variable (the degree in x_i is at most the total multiplicity the
/// arrangements assign to x_i).
pub fn strongly_stabilising_3parts(a: u64, b: u64, c: u64) -> bool {
    assert!(
        a >= 1 && a <= b && b <= c,
        "parts must be positive and sorted ascending"
    );
    if a == c {
        // All parts equal: the orbit is a single form, so no relation exists.
        return false;
    }
    let arrs = multiset_permutations(&[0, b - a, c - a]);
    let k = arrs.len();
    let d1: u64 = arrs.iter().map(|arr| arr[0]).sum();
    let d2: u64 = arrs.iter().map(|arr| arr[1]).sum();
    let fact = factorials(k);
    for v1 in 0..=d1 as i64 {
        for v2 in 0..=d2 as i64 {
            let mut m = vec![vec![BigInt::zero(); k]; k];
            for (j, arr) in arrs.iter().enumerate() {
                // Row i of the Wronskian holds i-th derivatives at t = 0,
                // i.e. i!·[tⁱ] of each orbit function.
                let coeffs = truncated_expansion(&[(v1, arr[0]), (v2, arr[1]), (1, arr[2])], k);
                for (i, row) in m.iter_mut().enumerate() {
                    row[j] = &fact[i] * &coeffs[i];
                }
            }
            if !det_bigint(m).is_zero() {
                return false;
            }
        }
    }
    true
}

/// Number of distinct arrangements π of μ's parts with π_i ≥ a_i for all i,
/// computed by dynamic programming over the residual multiplicity vector of
/// distinct part values (the position is determined by the residual).
pub fn count_permutations_geq(mu: &Partition, a: &[u64]) -> u128 {
    assert_eq!(
        a.len(),
        mu.len(),
        "constraint vector must have one entry per part"
    );
    let values = mu.distinct_parts();
    let mut residual: Vec<u32> = values.iter().map(|&v| mu.count_of(v) as u32).collect();
    let mut memo: HashMap<Vec<u32>, u128> = HashMap::new();
    count_rec(&values, a, &mut residual, a.len(), &mut memo)
}

fn count_rec(
    values: &[u64],
    a: &[u64],
    residual: &mut Vec<u32>,
    remaining: usize,
    memo: &mut HashMap<Vec<u32>, u128>,
) -> u128 {
    if remaining == 0 {
        return 1;
    }
    if let Some(&v) = memo.get(residual.as_slice()) {
        return v;
    }
    let pos = a.len() - remaining;
    let mut total = 0u128;
    for idx in 0..values.len() {
        if residual[idx] > 0 && values[idx] >= a[pos] {
            residual[idx] -= 1;
            total += count_rec(values, a, residual, remaining - 1, memo);
            residual[idx] += 1;
        }
    }
    memo.insert(residual.clone(), total);
    total
}

/// Whether `a` certifies a strongly common radical solution for μ:
/// count_permutations_geq(μ, a) ≥ |μ| − Σa + 2.
pub fn parking_condition(mu: &Partition, a: &[u64]) -> bool {
    assert!(
        a.iter().all(|&x| x >= 1),
        "parking constraints must be positive"
    );
    let sum: u64 = a.iter().sum();
    let target = i128::from(mu.degree()) - i128::from(sum) + 2;
    if target <= 0 {
        return true;
    }
    count_permutations_geq(mu, a) >= target as u128
}

/// A verified parking tuple: `count_permutations_geq(μ, a) ≥ bound` with
/// `bound = |μ| − Σa + 2 ≥ 3`, certifying a common-radical relation of that
/// length at any distinct roots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParkingCertificate {
    pub a: Vec<u64>,
    pub bound: u64,
}

fn consider(best: &mut Option<ParkingCertificate>, cand: ParkingCertificate) {
    let better = match best {
        None => true,
        Some(b) => cand.bound < b.bound || (cand.bound == b.bound && cand.a < b.a),
    };
    if better {
        *best = Some(cand);
    }
}

/// Candidates from the constructive small-jumps schedule: pick a size cutoff
/// d′, take every second internal jump of size ≤ d′ (so selected positions
/// are never adjacent), and set a_i = μ_{i+1} on the selected positions and
/// a_i = μ_i elsewhere. Admissible whenever at least 2(log₂d′+log₂log₂d′+2)
/// qualifying jumps exist (binary logs); every emitted candidate re-verifies
/// parking_condition.
fn schedule_candidates(mu: &Partition) -> Vec<ParkingCertificate> {
    let parts = mu.parts();
    let d = mu.degree();
    let mut out = Vec::new();
    let jumps: Vec<(usize, u64)> = (0..parts.len().saturating_sub(1))
        .filter_map(|i| {
            let size = parts[i] - parts[i + 1];
            (size > 0).then_some((i, size))
        })
        .collect();
    if jumps.is_empty() {
        return out;
    }
    let mut cutoffs: Vec<u64> = jumps.iter().map(|&(_, s)| s).filter(|&s| s >= 2).collect();
    cutoffs.push(2);
    cutoffs.sort_unstable();
    cutoffs.dedup();
    for dp in cutoffs {
        let qualifying: Vec<usize> = jumps
            .iter()
            .filter(|&&(_, s)| s <= dp)
            .map(|&(i, _)| i)
            .collect();
        let x = (dp as f64).log2();
        if (qualifying.len() as f64) < 2.0 * (x + x.log2() + 2.0) {
            continue;
        }
        let t = (x + x.log2() + 2.0).floor() as usize;
        let selected: Vec<usize> = qualifying.iter().copied().step_by(2).take(t).collect();
        if selected.len() < t {
            continue;
        }
        let mut a: Vec<u64> = parts.to_vec();
        for &i in &selected {
            a[i] = parts[i + 1];
        }
        let sum: u64 = a.iter().sum();
        if sum + 1 > d || !parking_condition(mu, &a) {
            continue;
        }
        a.sort_unstable_by(|x, y| y.cmp(x));
        out.push(ParkingCertificate { a, bound: d - sum + 2 });
    }
    out
}

fn first_satisfying_tuple(
    mu: &Partition,
    prefix: &mut Vec<u64>,
    rem: u64,
    max_part: u64,
    tested: &mut u64,
    budget: u64,
) -> Option<Vec<u64>> {
    let left = (mu.len() - prefix.len()) as u64;
    if left == 0 {
        debug_assert_eq!(rem, 0);
        if *tested >= budget {
            return None;
        }
        *tested += 1;
        if parking_condition(mu, prefix) {
            return Some(prefix.clone());
        }
        return None;
    }
    let lo = rem.div_ceil(left).max(1);
    let hi = max_part.min(rem.saturating_sub(left - 1));
    for v in lo..=hi {
        if *tested >= budget {
            return None;
        }
        prefix.push(v);
        let hit = first_satisfying_tuple(mu, prefix, rem - v, v, tested, budget);
        prefix.pop();
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// Searches for a parking tuple minimizing the certified bound |μ|−Σa+2.
///
/// The exhaustive stage enumerates weakly decreasing tuples 1 ≤ a_i ≤ μ₁ by
/// descending Σa (ascending bound) and lexicographically within a sum, so the
/// first satisfying tuple realises the minimal bound with the
/// lexicographically smallest a; weak monotonicity loses nothing because both
/// the count and the bound are invariant under permuting a. `budget` caps the
/// number of tuples tested; the constructive small-jumps schedule runs first
/// and serves as a fallback when the budget is exhausted.
pub fn parking_search(mu: &Partition, budget: u64) -> Option<ParkingCertificate> {
    let r = mu.len() as u64;
    let d = mu.degree();
    let mut best: Option<ParkingCertificate> = None;
    for cand in schedule_candidates(mu) {
        consider(&mut best, cand);
    }
    let mut tested = 0u64;
    for s in (r..=d.saturating_sub(1)).rev() {
        let bound = d - s + 2;
        if let Some(b) = &best {
            if b.bound < bound {
                break;
            }
        }
        let mut prefix = Vec::with_capacity(mu.len());
        if let Some(a) = first_satisfying_tuple(mu, &mut prefix, s, mu.largest(), &mut tested, budget)
        {
            consider(&mut best, ParkingCertificate { a, bound });
            break;
        }
        if tested >= budget {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn p(parts: &[u64]) -> Partition {
        Partition::new(parts.to_vec())
    }

    fn int_roots(values: &[i64]) -> Vec<ProjRoot> {
        let q = NumberField::q();
        values
            .iter()
            .map(|&v| ProjRoot::finite_int(&q, v))
            .collect()
    }

    fn rational(x: &FieldElement) -> Rational {
        x.to_rational().expect("rational coefficient expected")
    }

    #[test]
    fn multiset_permutations_descending_lex() {
        assert_eq!(
            multiset_permutations(&[2, 1, 1]),
            vec![vec![2, 1, 1], vec![1, 2, 1], vec![1, 1, 2]]
        );
        assert_eq!(multiset_permutations(&[3, 3]), vec![vec![3, 3]]);
        assert_eq!(multiset_permutations(&[1, 2, 3]).len(), 6);
    }

    #[test]
    fn multinomial_counts_arrangements() {
        assert_eq!(multinomial(&p(&[2, 1, 1])), 3);
        assert_eq!(multinomial(&p(&[1, 1])), 1);
        assert_eq!(multinomial(&p(&[4, 3, 2, 1])), 24);
        assert_eq!(multinomial(&p(&[2, 2, 1, 1])), 6);
        for r in 1..=8u64 {
            let staircase: Vec<u64> = (1..=r).rev().collect();
            let expected: u128 = (1..=r as u128).product();
            assert_eq!(multinomial(&p(&staircase)), expected);
        }
    }

    #[test]
    fn orbit_matrix_two_one_matches_hand_expansion() {
        let om = orbit_matrix(&p(&[2, 1]), &int_roots(&[0, 1])).unwrap();
        assert_eq!(om.arrangements(), &[vec![2, 1], vec![1, 2]]);
        // x²(x−y) = x³ − x²y and x(x−y)² = x³ − 2x²y + xy², coefficients
        // listed ascending in the power of x.
        let expect = [[0i64, 0, -1, 1], [0, 1, -2, 1]];
        for (row, want) in om.matrix().iter().zip(expect) {
            let got: Vec<Rational> = row.iter().map(rational).collect();
            let want: Vec<Rational> = want.iter().map(|&n| Rational::from_int(n)).collect();
            assert_eq!(got, want);
        }
        assert_eq!(orbit_rank(&om).unwrap(), 2);
    }

    #[test]
    fn orbit_matrix_equal_parts_single_row() {
        let om = orbit_matrix(&p(&[1, 1]), &int_roots(&[0, 1])).unwrap();
        assert_eq!(om.arrangements().len(), 1);
        assert_eq!(orbit_rank(&om).unwrap(), 1);
    }

    #[test]
    fn orbit_matrix_rejects_duplicate_roots() {
        let err = orbit_matrix(&p(&[2, 1]), &int_roots(&[3, 3])).unwrap_err();
        assert!(matches!(err, OrbitError::DuplicateRoots));
        let err = orbit_matrix(&p(&[2, 1]), &int_roots(&[3])).unwrap_err();
        assert!(matches!(
            err,
            OrbitError::RootCountMismatch {
                expected: 2,
                found: 1
            }
        ));
    }

    #[test]
    fn orbit_two_one_one_is_deficient_with_circuit() {
        let mu = p(&[2, 1, 1]);
        let roots = int_roots(&[0, 1, -1]);
        let om = orbit_matrix(&mu, &roots).unwrap();
        assert_eq!(om.arrangements().len(), 3);
        assert_eq!(orbit_rank(&om).unwrap(), 2);

        let rel = find_common_radical_relation(&mu, &roots, 3)
            .unwrap()
            .expect("deficient orbit must contain a circuit");
        assert_eq!(rel.len(), 3);
        assert!(verify_relation(&rel).is_ok());
        // With forms f₁ = G·x, f₂ = G·(x−y), f₃ = G·(x+y) for the common
        // factor G = x(x−y)(x+y), the unique dependence is f₂+f₃−2f₁ = 0, so
        // the coefficients are proportional to (−2, 1, 1).
        let c: Vec<Rational> = rel.terms().iter().map(|(c, _)| rational(c)).collect();
        assert_eq!(&c[0] * &Rational::from_int(1), &c[1] * &Rational::from_int(-2));
        assert_eq!(c[1], c[2]);
        // All terms share one radical.
        let radicals: Vec<FactoredForm> =
            rel.terms().iter().map(|(_, f)| f.radical()).collect();
        assert!(radicals.iter().all(|g| *g == radicals[0]));
    }

    #[test]
    fn full_rank_orbit_has_no_relation() {
        let found = find_common_radical_relation(&p(&[2, 1]), &int_roots(&[0, 1]), 3).unwrap();
        assert!(found.is_none());
    }

    #[test]
    fn three_two_two_has_length_three_circuit() {
        let mu = p(&[3, 2, 2]);
        let rel = find_common_radical_relation(&mu, &int_roots(&[0, 1, -1]), 3)
            .unwrap()
            .expect("residual linear forms are dependent");
        assert_eq!(rel.len(), 3);
        assert!(verify_relation(&rel).is_ok());
        assert_eq!(rel.mu(), &mu);
    }

    #[test]
    fn strongly_stabilising_known_triples() {
        assert!(strongly_stabilising_3parts(2, 2, 3));
        assert!(strongly_stabilising_3parts(1, 2, 3));
        assert!(!strongly_stabilising_3parts(1, 2, 5));
        assert!(strongly_stabilising_3parts(1, 2, 4));
        assert!(!strongly_stabilising_3parts(1, 1, 1));
        assert!(!strongly_stabilising_3parts(2, 3, 3));
        // Large parts stay cheap: only the residual multiplicities matter.
        assert!(strongly_stabilising_3parts(100, 100, 101));
        assert!(strongly_stabilising_3parts(99, 100, 102));
        assert!(!strongly_stabilising_3parts(100, 100, 103));
    }

    #[test]
    fn three_part_scan_matches_families_and_orbit_rank() {
        let roots = int_roots(&[0, 1, -1]);
        for a in 1..=6u64 {
            for b in a..=6 {
                for c in b..=6 {
                    let wronskian = strongly_stabilising_3parts(a, b, c);
                    let families = (a == b && c == a + 1)
                        || (b == a + 1 && c == a + 2)
                        || (b == a + 1 && c == a + 3);
                    assert_eq!(
                        wronskian, families,
                        "families mismatch at ({a},{b},{c})"
                    );
                    let om = orbit_matrix(&p(&[c, b, a]), &roots).unwrap();
                    let deficient =
                        orbit_rank(&om).unwrap() < om.arrangements().len();
                    assert_eq!(
                        wronskian, deficient,
                        "rank cross-check mismatch at ({a},{b},{c})"
                    );
                }
            }
        }
    }

    #[test]
    fn count_permutations_agrees_with_examples() {
        assert_eq!(count_permutations_geq(&p(&[3, 2, 2]), &[2, 2, 2]), 3);
        assert_eq!(count_permutations_geq(&p(&[3, 1]), &[1, 1]), 2);
        let mu = p(&[4, 4, 2, 1]);
        assert_eq!(
            count_permutations_geq(&mu, &[1, 1, 1, 1]),
            multinomial(&mu)
        );
    }

    #[test]
    fn count_permutations_matches_naive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let r = rng.gen_range(1..=6);
            let parts: Vec<u64> = (0..r).map(|_| rng.gen_range(1..=5)).collect();
            let mu = p(&parts);
            let a: Vec<u64> = (0..r).map(|_| rng.gen_range(1..=5)).collect();
            let naive = multiset_permutations(mu.parts())
                .iter()
                .filter(|arr| arr.iter().zip(&a).all(|(p, a)| p >= a))
                .count() as u128;
            assert_eq!(count_permutations_geq(&mu, &a), naive, "μ={mu} a={a:?}");
        }
    }

    #[test]
    fn parking_condition_examples() {
        assert!(parking_condition(&p(&[3, 2, 2]), &[2, 2, 2]));
        assert!(!parking_condition(&p(&[3, 1]), &[1, 1]));
        for t in 1..=5u64 {
            for i in 1..=5u64 {
                let mut parts = vec![t; i as usize + 1];
                parts.insert(0, t + i);
                let a = vec![t; i as usize + 2];
                assert!(parking_condition(&p(&parts), &a), "t={t} i={i}");
            }
        }
    }

    #[test]
    fn parking_search_examples() {
        let found = parking_search(&p(&[3, 2, 2]), 1_000_000).unwrap();
        assert_eq!(
            found,
            ParkingCertificate {
                a: vec![2, 2, 2],
                bound: 3
            }
        );
        assert!(parking_search(&p(&[3, 1]), 1_000_000).is_none());
    }

    #[test]
    fn parking_search_t_i_grid_matches_corollary() {
        for t in 1..=5u64 {
            for i in 1..=5u64 {
                let mut parts = vec![t; i as usize + 1];
                parts.insert(0, t + i);
                let found = parking_search(&p(&parts), 10_000_000)
                    .unwrap_or_else(|| panic!("no tuple found for t={t} i={i}"));
                assert_eq!(found.bound, i + 2, "t={t} i={i} a={:?}", found.a);
            }
        }
    }

    #[test]
    fn schedule_covers_staircase_without_enumeration() {
        // 19 unit jumps: the d′=2 schedule selects every second one and
        // certifies a bound without any enumerated tuples (budget 0).
        let staircase: Vec<u64> = (1..=20).rev().collect();
        let mu = p(&staircase);
        let found = parking_search(&mu, 0).expect("schedule hypothesis holds");
        assert_eq!(found.bound, 5);
        assert!(parking_condition(&mu, &found.a));
    }

    #[test]
    fn parking_tuples_yield_relations_at_random_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (mu, a) in [
            (p(&[3, 2, 2]), vec![2u64, 2, 2]),
            (p(&[2, 1, 1]), vec![1u64, 1, 1]),
        ] {
            assert!(parking_condition(&mu, &a));
            let bound = (mu.degree() - a.iter().sum::<u64>() + 2) as usize;
            for _ in 0..20 {
                let pool: Vec<i64> = (-30..=30).collect();
                let values: Vec<i64> =
                    pool.choose_multiple(&mut rng, mu.len()).copied().collect();
                let rel = find_common_radical_relation(&mu, &int_roots(&values), bound)
                    .unwrap()
                    .unwrap_or_else(|| panic!("no relation for μ={mu} at {values:?}"));
                assert!(rel.len() <= bound);
                assert!(verify_relation(&rel).is_ok());
            }
        }
    }

    #[test]
    fn classify_certified_rules() {
        assert!(matches!(
            classify_index(&p(&[5, 3]), 10),
            Classification::Growing { rule } if rule.contains("two-part")
        ));
        assert!(matches!(
            classify_index(&p(&[150, 100, 50]), 10),
            Classification::Growing { rule } if rule.contains("factorial-jump")
        ));
        assert!(matches!(
            classify_index(&p(&[5, 2, 1]), 10),
            Classification::Growing { rule } if rule.contains("Wronskian")
        ));
        match classify_index(&p(&[3, 2, 2]), 10) {
            Classification::Stabilising { relation } => {
                assert_eq!(relation.len(), 3);
                assert_eq!(relation.mu(), &p(&[3, 2, 2]));
                assert!(verify_relation(&relation).is_ok());
            }
            other => panic!("expected stabilising, got {other:?}"),
        }
    }

    #[test]
    fn classify_budget_search_finds_four_part_certificate() {
        // (2,2,1,1): after dividing out the common radical, the orbit forms
        // are the six products of two distinct linear forms, which span only
        // the quadratics; the first structured root set already certifies.
        match classify_index(&p(&[2, 2, 1, 1]), 10) {
            Classification::Stabilising { relation } => {
                assert_eq!(relation.len(), 3);
                assert!(verify_relation(&relation).is_ok());
            }
            other => panic!("expected stabilising, got {other:?}"),
        }
    }

    #[test]
    fn classify_budget_zero_reports_unknown() {
        match classify_index(&p(&[7, 5, 3, 1]), 0) {
            Classification::Unknown { report } => {
                assert_eq!(report.trials, 0);
                assert_eq!(report.budget, 0);
            }
            other => panic!("expected unknown, got {other:?}"),
        }
    }

    #[test]
    fn moebius_change_of_roots_preserves_rank() {
        let q = NumberField::q();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut checked = 0;
        while checked < 50 {
            let parts: Vec<u64> = (0..3).map(|_| rng.gen_range(1..=4)).collect();
            let mu = p(&parts);
            let roots = int_roots(&[0, 1, -1]);
            let (a, b, c, d) = (
                rng.gen_range(-3i64..=3),
                rng.gen_range(-3i64..=3),
                rng.gen_range(-3i64..=3),
                rng.gen_range(-3i64..=3),
            );
            if a * d - b * c == 0 {
                continue;
            }
            let transformed: Vec<ProjRoot> = roots
                .iter()
                .map(|root| {
                    let alpha = &(&q.from_int(a) * root.alpha()) + &(&q.from_int(b) * root.beta());
                    let beta = &(&q.from_int(c) * root.alpha()) + &(&q.from_int(d) * root.beta());
                    ProjRoot::new(alpha, beta).unwrap()
                })
                .collect();
            let om = orbit_matrix(&mu, &roots).unwrap();
            let om_t = orbit_matrix(&mu, &transformed).unwrap();
            let rank = orbit_rank(&om).unwrap();
            let rank_t = orbit_rank(&om_t).unwrap();
            assert_eq!(rank, rank_t, "μ={mu} map=({a},{b};{c},{d})");
            let n = om.arrangements().len();
            let cols = om.matrix()[0].len();
            assert!(rank <= n.min(cols));
            checked += 1;
        }
    }
}
