//! Floating-point evidence search for secant degeneracy relations.
//!
//! [`search_relation`] hunts for a numerical relation `sum_j c_j f_j = 0`
//! among `length` forms on the stratum of a partition `mu`.  Each restart
//! seeds the `length * r` complex roots at random and refines them by a
//! damped Levenberg-Marquardt iteration; at every step the coefficient
//! vector is re-solved exactly as the smallest singular direction of the
//! column matrix of expanded, sup-normalised forms, so the outer iteration
//! only ever moves roots.  Restarts draw from per-restart ChaCha streams,
//! which makes the whole search deterministic in `(seed, budget)` while
//! still running restarts in parallel.
//!
//! A converged configuration only counts as evidence if it stays away from
//! the degenerate loci: roots inside a term must remain separated, no two
//! terms may collapse onto the same root multiset, and no coefficient may
//! dwindle away (which would really be a shorter relation).  These floors
//! are checked in a canonical frame (root centroid 0, root RMS 1) so they
//! mean the same thing for every candidate.
//!
//! [`exactify`] promotes a high-precision candidate to exact arithmetic: it
//! anchors the three largest root clusters at `infinity, 0, 1` by a Möbius
//! map, snaps the remaining coordinates to rationals or quadratic
//! irrationals, re-solves the coefficients exactly, and verifies the result.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exactalg::{exact_nullspace, NumberField, Rational};
use crate::forms::{FactoredForm, ProjRoot};
use crate::orbits::normalize_coeffs;
use crate::partitions::Partition;
use crate::relations::{verify_relation, SecantRelation};

/// Default residual threshold below which a candidate is accepted.
pub const DEFAULT_ACCEPT_TOL: f64 = 1e-10;

/// Minimal pairwise distance between roots of one term (canonical frame).
const WITHIN_TERM_FLOOR: f64 = 1e-4;
/// Minimal multiplicity-matched distance between two term root multisets.
/// Near-collapses of two terms onto one form produce arbitrarily small
/// residuals (the "relation" is the difference of two copies), and the root
/// smear of such a pair shrinks only like a fractional power of the
/// residual, so the floor has to be macroscopic in the canonical frame;
/// genuine relations keep their terms O(1) apart.
const BETWEEN_TERM_FLOOR: f64 = 1e-1;
/// Minimal ratio between the smallest and largest coefficient modulus.
const COEFF_RATIO_FLOOR: f64 = 1e-2;

const RAW_ITERS: usize = 80;
const POLISH_ITERS: usize = 15;
const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MIN: f64 = 1e-14;
const LAMBDA_MAX: f64 = 1e12;
const CHUNK: u64 = 64;

/// Modulus beyond which a Möbius image is treated as the point at infinity.
const INFINITY_SNAP: f64 = 1e8;
/// Largest denominator considered when snapping to a rational.
const SNAP_DEN_CAP: i128 = 10_000;
/// Relative tolerance for direct rational snapping.  Deliberately strict:
/// almost every real number has a denominator-10^4 rational within 1e-7, so
/// a loose tolerance would "snap" anything.  Only fully converged
/// coordinates pass; the rest go to the exact-hypothesis stage.
const SNAP_REL_TOL: f64 = 1e-9;
/// Caps for the integer quadratic min-poly enumeration `A w^2 + B w + C`.
const QUAD_A_CAP: i64 = 50;
const QUAD_B_CAP: i64 = 2000;
const QUAD_RESID: f64 = 1e-9;
/// Search ball and height caps for the exact-hypothesis enumeration used on
/// coordinates that refuse to snap directly (numerically flat directions).
const COMBO_RADIUS: f64 = 2e-2;
const COMBO_DEN_CAP: i64 = 24;
const COMBO_QUAD_CAP: i64 = 12;
/// Most exact assemblies attempted per clustering hypothesis.  Tuples whose
/// quadratic snaps disagree on the discriminant core are rejected before any
/// field arithmetic, so the bound is rarely felt in full.
const COMBO_CAP: usize = 4000;
/// Clustering radius for guessing which root slots share a point.  A root
/// shared between terms smears like a fractional power of the residual
/// (about 1e-2 at residual 1e-8 for multiplicity four), while genuinely
/// distinct points of the accepted configurations stay macroscopically
/// apart, so the radius sits between the two scales.
const CLUSTER_EPS: f64 = 2.5e-2;

/// A numerical relation candidate produced by [`search_relation`].
///
/// Roots are stored per term, paired positionally with the parts of `mu`
/// (so `roots[j][k]` carries multiplicity `mu.parts()[k]`), in the
/// canonical frame (centroid 0, RMS 1).  `residual` is the max-norm of the
/// summed coefficient vector of `sum_j c_j f_j` with sup-normalised
/// columns and a unit-norm coefficient vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub mu: Partition,
    pub length: usize,
    #[serde(with = "serde_complex_mat")]
    pub roots: Vec<Vec<Complex64>>,
    #[serde(with = "serde_complex_vec")]
    pub coeffs: Vec<Complex64>,
    pub residual: f64,
    pub seed: u64,
    pub restart: u64,
    pub iterations: u64,
}

/// Full report of one search run, accepted or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub mu: Partition,
    pub length: usize,
    pub budget: u64,
    pub seed: u64,
    pub accept_tol: f64,
    /// Restarts actually executed (the search stops early once a chunk
    /// contains an accepted candidate).
    pub restarts_run: u64,
    /// Best valid candidate with residual below `accept_tol`, if any.
    pub accepted: Option<Candidate>,
    /// Best valid candidate seen at all, accepted or not.
    pub best_valid: Option<Candidate>,
}

mod serde_complex_mat {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<Vec<[f64; 2]>> = v
            .iter()
            .map(|t| t.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Complex64>>, D::Error> {
        let raw = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|t| t.into_iter().map(|p| Complex64::new(p[0], p[1])).collect())
            .collect())
    }
}

mod serde_complex_vec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|p| Complex64::new(p[0], p[1])).collect())
    }
}

/// Expand `prod_k (x - z_k)^{m_k}` into coefficients by ascending power of x.
fn expand_roots(roots: &[Complex64], mults: &[u64]) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(1.0, 0.0)];
    for (z, &m) in roots.iter().zip(mults) {
        for _ in 0..m {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (i, &a) in acc.iter().enumerate() {
                next[i] -= z * a;
                next[i + 1] += a;
            }
            acc = next;
        }
    }
    acc
}

/// Expanded, sup-normalised column per term, plus the normalisers used.
fn build_columns(roots: &[Vec<Complex64>], parts: &[u64]) -> (Vec<Vec<Complex64>>, Vec<f64>) {
    roots
        .iter()
        .map(|term| {
            let raw = expand_roots(term, parts);
            let nrm = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let nrm = if nrm.is_finite() && nrm > 0.0 { nrm } else { 1.0 };
            (raw.iter().map(|z| z / nrm).collect::<Vec<_>>(), nrm)
        })
        .unzip()
}

struct InnerSolve {
    c: Vec<Complex64>,
    rvec: Vec<Complex64>,
    r2: f64,
    rinf: f64,
}

/// Smallest singular direction of the column matrix, via the realified
/// Hermitian Gram matrix.  The returned coefficients have unit 2-norm and a
/// canonical phase (largest-modulus entry real positive).
fn inner_solve(cols: &[Vec<Complex64>]) -> InnerSolve {
    let m = cols.len();
    let n = cols[0].len();
    let mut g = vec![vec![Complex64::new(0.0, 0.0); m]; m];
    for i in 0..m {
        for j in i..m {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += cols[i][k].conj() * cols[j][k];
            }
            g[i][j] = s;
            g[j][i] = s.conj();
        }
    }
    // c = u + iv turns c^H G c into a real quadratic form on [u; v] with the
    // symmetric matrix [[Re G, -Im G], [Im G, Re G]].
    let gr = DMatrix::from_fn(2 * m, 2 * m, |r, c| {
        let v = g[r % m][c % m];
        match (r < m, c < m) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    });
    let eig = SymmetricEigen::new(gr);
    let mut best = 0;
    for i in 1..2 * m {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    let v = eig.eigenvectors.column(best);
    let mut c: Vec<Complex64> = (0..m).map(|j| Complex64::new(v[j], v[j + m])).collect();
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in &mut c {
            *z /= norm;
        }
    }
    let jmax = (0..m).fold(0, |acc, j| if c[j].norm() > c[acc].norm() { j } else { acc });
    if c[jmax].norm() > 0.0 {
        let phase = c[jmax] / c[jmax].norm();
        let rot = phase.conj();
        for z in &mut c {
            *z *= rot;
        }
    }
    let mut rvec = vec![Complex64::new(0.0, 0.0); n];
    for (j, col) in cols.iter().enumerate() {
        for k in 0..n {
            rvec[k] += c[j] * col[k];
        }
    }
    let r2 = rvec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let rinf = rvec.iter().map(|z| z.norm()).fold(0.0, f64::max);
    InnerSolve { c, rvec, r2, rinf }
}

/// Translate the root cloud to centroid 0 and scale it to RMS 1.  An exact
/// relation is invariant: the substitution multiplies every term by the same
/// power of the scale, which the sup-normalisation absorbs.
fn canonicalize(roots: &mut [Vec<Complex64>]) {
    let total: usize = roots.iter().map(|t| t.len()).sum();
    if total == 0 {
        return;
    }
    let mean = roots.iter().flatten().copied().sum::<Complex64>() / total as f64;
    let rms = (roots
        .iter()
        .flatten()
        .map(|z| (z - mean).norm_sqr())
        .sum::<f64>()
        / total as f64)
        .sqrt();
    let scale = if rms.is_finite() && rms > 1e-12 { rms } else { 1.0 };
    for term in roots.iter_mut() {
        for z in term.iter_mut() {
            *z = (*z - mean) / scale;
        }
    }
}

/// Damped Levenberg-Marquardt over a set of free root variables, with the
/// coefficients re-solved at every trial point.  `assign[j][k]` names the
/// variable carried by slot `k` of term `j`; several slots may share one
/// variable, which pins those roots together (used by [`exactify`] to kill
/// the flat directions that a root shared between terms otherwise has).
/// The Jacobian is analytic: differentiating one root drops its
/// multiplicity by one and multiplies by `-mult`, and slots sharing a
/// variable add up; the per-term sup-normalisers are frozen while the step
/// is formed.  Returns the number of iterations performed.
fn lm_loop_assigned(
    vars: &mut Vec<Complex64>,
    assign: &[Vec<usize>],
    parts: &[u64],
    max_iters: usize,
    lambda: &mut f64,
) -> u64 {
    let m = assign.len();
    let r = parts.len();
    let q = vars.len();
    let roots_of = |vars: &[Complex64]| -> Vec<Vec<Complex64>> {
        assign
            .iter()
            .map(|term| term.iter().map(|&v| vars[v]).collect())
            .collect()
    };
    let mut roots = roots_of(vars);
    let (cols, mut norms) = build_columns(&roots, parts);
    let mut cur = inner_solve(&cols);
    let mut iters = 0u64;
    for _ in 0..max_iters {
        if !cur.r2.is_finite() || cur.r2 < 1e-16 {
            break;
        }
        iters += 1;
        let n = cur.rvec.len();
        let mut jc = vec![vec![Complex64::new(0.0, 0.0); q]; n];
        for j in 0..m {
            for k in 0..r {
                let mut mults = parts.to_vec();
                mults[k] -= 1;
                let dcol = expand_roots(&roots[j], &mults);
                let factor = cur.c[j] * (-(parts[k] as f64)) / norms[j];
                let v = assign[j][k];
                for (row, val) in dcol.iter().enumerate() {
                    jc[row][v] += factor * val;
                }
            }
        }
        let jr = DMatrix::from_fn(2 * n, 2 * q, |rr, cc| {
            let v = jc[rr % n][cc % q];
            match (rr < n, cc < q) {
                (true, true) | (false, false) => v.re,
                (true, false) => -v.im,
                (false, true) => v.im,
            }
        });
        let rr_vec = DVector::from_fn(2 * n, |i, _| {
            if i < n {
                cur.rvec[i].re
            } else {
                cur.rvec[i - n].im
            }
        });
        let jtj = jr.transpose() * &jr;
        let jtr = jr.transpose() * &rr_vec;
        let mut stepped = false;
        loop {
            let mut damped = jtj.clone();
            for i in 0..2 * q {
                damped[(i, i)] += *lambda;
            }
            let delta = damped
                .clone()
                .cholesky()
                .map(|ch| ch.solve(&jtr))
                .or_else(|| damped.lu().solve(&jtr));
            if let Some(delta) = delta {
                let mut trial = vars.clone();
                for (idx, t) in trial.iter_mut().enumerate() {
                    *t -= Complex64::new(delta[idx], delta[q + idx]);
                }
                let troots = roots_of(&trial);
                let (tcols, tnorms) = build_columns(&troots, parts);
                let tsol = inner_solve(&tcols);
                if tsol.r2.is_finite() && tsol.r2 < cur.r2 {
                    *vars = trial;
                    roots = troots;
                    cur = tsol;
                    norms = tnorms;
                    *lambda = (*lambda * 0.3).max(LAMBDA_MIN);
                    stepped = true;
                    break;
                }
            }
            if *lambda >= LAMBDA_MAX {
                break;
            }
            *lambda = (*lambda * 10.0).min(LAMBDA_MAX);
        }
        if !stepped {
            break;
        }
    }
    iters
}

/// [`lm_loop_assigned`] with every slot its own variable.
fn lm_loop(roots: &mut Vec<Vec<Complex64>>, parts: &[u64], max_iters: usize, lambda: &mut f64) -> u64 {
    let r = parts.len();
    let assign: Vec<Vec<usize>> = (0..roots.len())
        .map(|j| (0..r).map(|k| j * r + k).collect())
        .collect();
    let mut vars: Vec<Complex64> = roots.iter().flatten().copied().collect();
    let iters = lm_loop_assigned(&mut vars, &assign, parts, max_iters, lambda);
    for (j, term) in roots.iter_mut().enumerate() {
        for (k, z) in term.iter_mut().enumerate() {
            *z = vars[j * r + k];
        }
    }
    iters
}

/// Smallest pairwise distance between roots within any single term.
fn within_term_min_sep(roots: &[Vec<Complex64>]) -> f64 {
    let mut best = f64::INFINITY;
    for term in roots {
        for i in 0..term.len() {
            for j in i + 1..term.len() {
                best = best.min((term[i] - term[j]).norm());
            }
        }
    }
    best
}

/// Greedy multiplicity-matched distance between two term root tuples: each
/// root is matched to the nearest unused root of equal multiplicity in the
/// other term and the distances are summed.
fn matched_distance(a: &[Complex64], b: &[Complex64], parts: &[u64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut total = 0.0;
    for i in 0..a.len() {
        let mut pick: Option<(usize, f64)> = None;
        for j in 0..b.len() {
            if used[j] || parts[j] != parts[i] {
                continue;
            }
            let d = (a[i] - b[j]).norm();
            if pick.map_or(true, |(_, pd)| d < pd) {
                pick = Some((j, d));
            }
        }
        let (j, d) = pick.expect("equal multiplicity patterns always match");
        used[j] = true;
        total += d;
    }
    total
}

fn between_term_min_dist(roots: &[Vec<Complex64>], parts: &[u64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            best = best.min(matched_distance(&roots[i], &roots[j], parts));
        }
    }
    best
}

/// One full restart: random start, raw LM, canonicalise, polish, validate.
/// Returns `None` when the endpoint violates a validity floor.
fn run_restart(mu: &Partition, parts: &[u64], length: usize, seed: u64, restart: u64) -> Option<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart);
    let r = parts.len();
    let mut roots: Vec<Vec<Complex64>> = (0..length)
        .map(|_| {
            (0..r)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    let mut lambda = LAMBDA_INIT;
    let mut iterations = lm_loop(&mut roots, parts, RAW_ITERS, &mut lambda);
    canonicalize(&mut roots);
    iterations += lm_loop(&mut roots, parts, POLISH_ITERS, &mut lambda);
    canonicalize(&mut roots);
    let (cols, _) = build_columns(&roots, parts);
    let sol = inner_solve(&cols);
    if !sol.rinf.is_finite() {
        return None;
    }
    if within_term_min_sep(&roots) < WITHIN_TERM_FLOOR {
        return None;
    }
    if between_term_min_dist(&roots, parts) < BETWEEN_TERM_FLOOR {
        return None;
    }
    let cmax = sol.c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cmin = sol.c.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if !(cmin / cmax >= COEFF_RATIO_FLOOR) {
        return None;
    }
    Some(Candidate {
        mu: mu.clone(),
        length,
        roots,
        coeffs: sol.c,
        residual: sol.rinf,
        seed,
        restart,
        iterations,
    })
}

fn cmp_candidates(a: &Candidate, b: &Candidate) -> Ordering {
    a.residual
        .total_cmp(&b.residual)
        .then(a.restart.cmp(&b.restart))
}

/// Run up to `budget` restarts and keep the best valid candidate, preferring
/// smaller residual and breaking ties by restart index.  Restarts execute in
/// fixed-size chunks (parallel inside a chunk); the search stops at the end
/// of the first chunk whose running best clears `accept_tol`.  The outcome
/// depends only on `(mu, length, budget, seed, accept_tol)`.
pub fn search_relation_with(
    mu: &Partition,
    length: usize,
    budget: u64,
    seed: u64,
    accept_tol: f64,
) -> SearchOutcome {
    assert!(length >= 3, "a secant degeneracy relation needs at least three terms");
    let parts: Vec<u64> = mu.parts().to_vec();
    let mut best: Option<Candidate> = None;
    let mut done = 0u64;
    while done < budget {
        let hi = (done + CHUNK).min(budget);
        let chunk_best = (done..hi)
            .into_par_iter()
            .filter_map(|restart| run_restart(mu, &parts, length, seed, restart))
            .min_by(|a, b| cmp_candidates(a, b));
        if let Some(cb) = chunk_best {
            if best
                .as_ref()
                .map_or(true, |b| cmp_candidates(&cb, b) == Ordering::Less)
            {
                best = Some(cb);
            }
        }
        done = hi;
        if best.as_ref().map_or(false, |b| b.residual < accept_tol) {
            break;
        }
    }
    let accepted = best.clone().filter(|b| b.residual < accept_tol);
    SearchOutcome {
        mu: mu.clone(),
        length,
        budget,
        seed,
        accept_tol,
        restarts_run: done,
        accepted,
        best_valid: best,
    }
}

/// [`search_relation_with`] at the default acceptance tolerance, returning
/// only the accepted candidate.
pub fn search_relation(mu: &Partition, length: usize, budget: u64, seed: u64) -> Option<Candidate> {
    search_relation_with(mu, length, budget, seed, DEFAULT_ACCEPT_TOL).accepted
}

// ---------------------------------------------------------------------------
// Exactification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum SnappedRoot {
    Infinity,
    Rational(Rational),
    /// `a + b * sqrt(core)` with `core` a squarefree integer.
    Quadratic { a: Rational, b: Rational, core: i64 },
}

/// Greedily cluster the root slots: each slot joins the nearest existing
/// cluster within `eps` (never one already used by the same term, since
/// roots within a term are genuinely distinct) or opens a new one.  Returns
/// the slot-to-cluster assignment, the cluster centres, and the populations.
/// `eps = 0` makes every slot its own cluster.
fn cluster_assign(roots: &[Vec<Complex64>], eps: f64) -> (Vec<Vec<usize>>, Vec<Complex64>, Vec<usize>) {
    let mut centers: Vec<Complex64> = Vec::new();
    let mut sums: Vec<Complex64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut assign: Vec<Vec<usize>> = Vec::with_capacity(roots.len());
    for term in roots {
        let mut used: Vec<usize> = Vec::new();
        let mut ids: Vec<usize> = Vec::with_capacity(term.len());
        for &p in term {
            let mut pick: Option<(usize, f64)> = None;
            for i in 0..centers.len() {
                if used.contains(&i) {
                    continue;
                }
                let d = (p - centers[i]).norm();
                if d < eps && pick.map_or(true, |(_, pd)| d < pd) {
                    pick = Some((i, d));
                }
            }
            let id = match pick {
                Some((i, _)) => {
                    sums[i] += p;
                    counts[i] += 1;
                    centers[i] = sums[i] / counts[i] as f64;
                    i
                }
                None => {
                    centers.push(p);
                    sums.push(p);
                    counts.push(1);
                    centers.len() - 1
                }
            };
            used.push(id);
            ids.push(id);
        }
        assign.push(ids);
    }
    (assign, centers, counts)
}

/// Best rational approximation by continued fractions, with a denominator
/// cap and a relative tolerance.
fn snap_rational(x: f64, max_den: i128, rel_tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let scale = x.abs().max(1.0);
    let mut a = x.floor();
    let (mut p0, mut q0) = (1i128, 0i128);
    let (mut p1, mut q1) = (a as i128, 1i128);
    let mut frac = x - a;
    loop {
        if (p1 as f64 / q1 as f64 - x).abs() <= rel_tol * scale {
            return Some(Rational::new(i64::try_from(p1).ok()?, i64::try_from(q1).ok()?));
        }
        if frac.abs() < 1e-15 {
            return None;
        }
        let inv = 1.0 / frac;
        a = inv.floor();
        frac = inv - a;
        let p2 = (a as i128).checked_mul(p1)?.checked_add(p0)?;
        let q2 = (a as i128).checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den || p2.abs() > (1i128 << 62) {
            return None;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
}

/// Write `n = s^2 * core` with `core` squarefree carrying the sign of `n`.
fn squarefree_decompose_int(n: i128) -> (i128, i128) {
    let sign = if n < 0 { -1 } else { 1 };
    let mut m = n.abs();
    let mut core = 1i128;
    let mut s = 1i128;
    let mut p = 2i128;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0u32;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            if e % 2 == 1 {
                core *= p;
            }
            s *= p.pow(e / 2);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    core *= m;
    (core * sign, s)
}

/// Write a nonzero rational `d = t^2 * core` with `core` a squarefree
/// integer of the same sign and `t` a positive rational.
fn squarefree_decompose(d: &Rational) -> Option<(i64, Rational)> {
    let u: i128 = d.numer().try_into().ok()?;
    let v: i128 = d.denom().try_into().ok()?;
    if u == 0 {
        return None;
    }
    let (core, s) = squarefree_decompose_int(u.checked_mul(v)?);
    let core_i64: i64 = core.try_into().ok()?;
    // sqrt(u/v) = sqrt(u v)/v = (s/v) * sqrt(core)
    let t = Rational::new(i64::try_from(s).ok()?, i64::try_from(v).ok()?);
    Some((core_i64, t))
}

/// Find a primitive integer quadratic `A w^2 + B w + C ~ 0` with small
/// coefficients and a positive non-square discriminant.
fn snap_quadratic_real(w: f64) -> Option<(i64, i64, i64)> {
    for a in 1..=QUAD_A_CAP {
        let aw2 = a as f64 * w * w;
        for babs in 0..=QUAD_B_CAP {
            for b in if babs == 0 { vec![0] } else { vec![babs, -babs] } {
                let t = aw2 + b as f64 * w;
                if !t.is_finite() || t.abs() > 4.0e15 {
                    continue;
                }
                let c = -t.round();
                if (t + c).abs() < QUAD_RESID {
                    let (a, b, c) = (a, b, c as i64);
                    let disc = (b as i128) * (b as i128) - 4 * (a as i128) * (c as i128);
                    if disc <= 0 {
                        continue;
                    }
                    let (core, _) = squarefree_decompose_int(disc);
                    if core == 1 {
                        // Rational roots; the rational snap should have
                        // caught this, so the fit is spurious.
                        continue;
                    }
                    let g = gcd3(a.unsigned_abs(), b.unsigned_abs(), c.unsigned_abs());
                    return Some((a / g as i64, b / g as i64, c / g as i64));
                }
            }
        }
    }
    None
}

fn gcd3(a: u64, b: u64, c: u64) -> u64 {
    use num_integer::Integer;
    a.gcd(&b).gcd(&c).max(1)
}

fn rational_to_f64(r: &Rational) -> f64 {
    let n: f64 = r.numer().to_string().parse().unwrap_or(f64::NAN);
    let d: f64 = r.denom().to_string().parse().unwrap_or(f64::NAN);
    n / d
}

fn snapped_value(s: &SnappedRoot) -> Complex64 {
    match s {
        SnappedRoot::Infinity => Complex64::new(f64::INFINITY, 0.0),
        SnappedRoot::Rational(r) => Complex64::new(rational_to_f64(r), 0.0),
        SnappedRoot::Quadratic { a, b, core } => {
            let av = rational_to_f64(a);
            let bv = rational_to_f64(b);
            if *core >= 0 {
                Complex64::new(av + bv * (*core as f64).sqrt(), 0.0)
            } else {
                Complex64::new(av, bv * (-*core as f64).sqrt())
            }
        }
    }
}

/// Snap one Möbius-transformed root to an exact algebraic number.
fn snap_root(w: Complex64) -> Option<SnappedRoot> {
    if !w.re.is_finite() || !w.im.is_finite() || w.norm() > INFINITY_SNAP {
        return Some(SnappedRoot::Infinity);
    }
    let scale = w.norm().max(1.0);
    let snapped = if w.im.abs() < SNAP_REL_TOL * scale {
        if let Some(r) = snap_rational(w.re, SNAP_DEN_CAP, SNAP_REL_TOL) {
            Some(SnappedRoot::Rational(r))
        } else {
            let (a, b, c) = snap_quadratic_real(w.re)?;
            let disc = Rational::from_int(b * b - 4 * a * c);
            let (core, t) = squarefree_decompose(&disc)?;
            let half = Rational::new(-b, 2 * a);
            let spread = &t * &Rational::new(1, 2 * a);
            // Choose the sign that matches the floating value.
            let plus = SnappedRoot::Quadratic { a: half.clone(), b: spread.clone(), core };
            let minus = SnappedRoot::Quadratic { a: half, b: -&spread, core };
            let dp = (snapped_value(&plus) - w).norm();
            let dm = (snapped_value(&minus) - w).norm();
            Some(if dp <= dm { plus } else { minus })
        }
    } else {
        // Conjugate pair: snap trace and norm, then split.
        let s = snap_rational(2.0 * w.re, SNAP_DEN_CAP, SNAP_REL_TOL)?;
        let p = snap_rational(w.norm_sqr(), SNAP_DEN_CAP, SNAP_REL_TOL)?;
        let four = Rational::from_int(4);
        let disc = &(&s * &s) - &(&four * &p);
        let (core, t) = squarefree_decompose(&disc)?;
        if core >= 0 {
            return None;
        }
        let half = Rational::new(1, 2);
        let a = &s * &half;
        let spread = &t * &half;
        let b = if w.im >= 0.0 { spread } else { -&spread };
        Some(SnappedRoot::Quadratic { a, b, core })
    }?;
    // Guard against a wrong snap: the exact value must reproduce the float.
    let v = snapped_value(&snapped);
    if !matches!(snapped, SnappedRoot::Infinity) && (v - w).norm() > 1e-4 * scale {
        return None;
    }
    Some(snapped)
}

/// Promote a numerical candidate to a verified exact relation.
///
/// A root shared by several terms is only determined to a fractional power
/// of the residual when each term carries its own copy (the smear is a flat
/// direction of the residual), so snapping raw root values is hopeless for
/// such configurations.  Instead the pipeline first guesses the incidence
/// structure by clustering, pins each cluster to a single shared variable,
/// and re-runs the Levenberg-Marquardt iteration on the reduced variables;
/// with the flat directions gone the cluster centres converge to full
/// precision.  The three most-shared clusters are then sent to
/// `infinity, 0, 1` by a Möbius map (which acts on strata and preserves
/// relations), the remaining centres are snapped to rationals or quadratic
/// irrationals over one shared squarefree discriminant, and the
/// coefficients are re-solved exactly.  The whole pipeline is retried with
/// trivial clustering (every slot its own variable) in case the structure
/// guess was wrong.  Returns `None` whenever every attempt fails; a
/// returned relation has been verified exactly.
pub fn exactify(cand: &Candidate) -> Option<SecantRelation> {
    for eps in [CLUSTER_EPS, 0.0] {
        if let Some(rel) = exactify_with_eps(cand, eps) {
            return Some(rel);
        }
    }
    None
}

/// Residual the structural refit must reach before snapping is attempted; a
/// wrong incidence guess stalls orders of magnitude above this.
const REFIT_GATE: f64 = 1e-9;

fn exactify_with_eps(cand: &Candidate, eps: f64) -> Option<SecantRelation> {
    let parts: Vec<u64> = cand.mu.parts().to_vec();
    // Light pre-polish in the raw parameterization sharpens the clusters.
    let mut roots = cand.roots.clone();
    let mut lambda = 1e-8;
    lm_loop(&mut roots, &parts, 40, &mut lambda);
    let (assign, mut vars, counts) = cluster_assign(&roots, eps);
    if vars.len() < 3 {
        return None;
    }
    let mut lambda = 1e-8;
    lm_loop_assigned(&mut vars, &assign, &parts, 120, &mut lambda);
    let refit_roots: Vec<Vec<Complex64>> = assign
        .iter()
        .map(|term| term.iter().map(|&v| vars[v]).collect())
        .collect();
    let (cols, _) = build_columns(&refit_roots, &parts);
    let sol = inner_solve(&cols);
    if !(sol.rinf < REFIT_GATE) {
        return None;
    }
    // Anchor the three most-shared clusters at infinity, 0, 1.
    let mut order: Vec<usize> = (0..vars.len()).collect();
    order.sort_by(|&i, &j| {
        counts[j]
            .cmp(&counts[i])
            .then(vars[i].re.total_cmp(&vars[j].re))
            .then(vars[i].im.total_cmp(&vars[j].im))
    });
    let (ai, a0, a1) = (order[0], order[1], order[2]);
    let (zi, z0, z1) = (vars[ai], vars[a0], vars[a1]);
    let moebius = |z: Complex64| (z - z0) * (z1 - zi) / ((z - zi) * (z1 - z0));
    // Direct snaps; coordinates that fail live on flat directions of the
    // residual and get exact small-height hypotheses instead.
    let mut snapped: Vec<Option<SnappedRoot>> = Vec::with_capacity(vars.len());
    let mut flats: Vec<usize> = Vec::new();
    for (v, &z) in vars.iter().enumerate() {
        let s = if v == ai {
            Some(SnappedRoot::Infinity)
        } else if v == a0 {
            Some(SnappedRoot::Rational(Rational::zero()))
        } else if v == a1 {
            Some(SnappedRoot::Rational(Rational::one()))
        } else {
            snap_root(moebius(z))
        };
        if s.is_none() {
            flats.push(v);
        }
        snapped.push(s);
    }
    if flats.len() > 3 {
        return None;
    }
    let lists: Vec<Vec<(SnappedRoot, u32)>> = flats
        .iter()
        .map(|&v| small_height_candidates(moebius(vars[v]), COMBO_RADIUS))
        .collect();
    if lists.iter().any(|l| l.is_empty()) {
        return None;
    }
    // Try hypothesis tuples in order of total height.
    let per_list_cap = if flats.len() >= 3 { 24 } else { 60 };
    let capped: Vec<&[(SnappedRoot, u32)]> =
        lists.iter().map(|l| &l[..l.len().min(per_list_cap)]).collect();
    let mut tuples: Vec<(u32, Vec<usize>)> = vec![(0, Vec::new())];
    for list in &capped {
        tuples = tuples
            .into_iter()
            .flat_map(|(h, idxs)| {
                list.iter().enumerate().map(move |(i, (_, hi))| {
                    let mut next = idxs.clone();
                    next.push(i);
                    (h + hi, next)
                })
            })
            .collect();
    }
    tuples.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    for (_, idxs) in tuples.into_iter().take(COMBO_CAP) {
        let mut full: Vec<SnappedRoot> = Vec::with_capacity(vars.len());
        let mut ok = true;
        for (v, s) in snapped.iter().enumerate() {
            match s {
                Some(s) => full.push(s.clone()),
                None => match flats.iter().position(|&f| f == v) {
                    Some(j) => full.push(capped[j][idxs[j]].0.clone()),
                    None => {
                        ok = false;
                        break;
                    }
                },
            }
        }
        if !ok {
            continue;
        }
        if let Some(rel) = assemble_relation(&cand.mu, &parts, &assign, &full) {
            return Some(rel);
        }
    }
    None
}

/// Build the exact forms for one complete snapping hypothesis, re-solve the
/// coefficients, and verify.  Returns `None` if the quadratic snaps do not
/// share one discriminant core, a term degenerates, the matrix has no
/// full-support nullvector, or verification fails.
fn assemble_relation(
    mu: &Partition,
    parts: &[u64],
    assign: &[Vec<usize>],
    snapped: &[SnappedRoot],
) -> Option<SecantRelation> {
    let mut core: Option<i64> = None;
    for s in snapped {
        if let SnappedRoot::Quadratic { core: c, .. } = s {
            match core {
                None => core = Some(*c),
                Some(existing) if existing == *c => {}
                Some(_) => return None,
            }
        }
    }
    let field = match core {
        Some(d) => NumberField::quadratic(d),
        None => NumberField::q(),
    };
    let exact_vars: Vec<ProjRoot> = snapped
        .iter()
        .map(|s| match s {
            SnappedRoot::Infinity => ProjRoot::infinity(&field),
            SnappedRoot::Rational(r) => ProjRoot::finite(field.from_rational(r.clone())),
            SnappedRoot::Quadratic { a, b, .. } => ProjRoot::finite(
                &field.from_rational(a.clone()) + &(&field.gen() * &field.from_rational(b.clone())),
            ),
        })
        .collect();
    let mut forms: Vec<FactoredForm> = Vec::with_capacity(assign.len());
    for term in assign {
        let roots: Vec<ProjRoot> = term.iter().map(|&v| exact_vars[v].clone()).collect();
        // Distinct parts of mu must stay on distinct points, or the term
        // would live on a different stratum.
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                if roots[i] == roots[j] {
                    return None;
                }
            }
        }
        let factors: Vec<(ProjRoot, u32)> = roots
            .into_iter()
            .zip(parts.iter())
            .map(|(root, &m)| (root, m as u32))
            .collect();
        forms.push(FactoredForm::new(field.one(), factors));
    }
    let expanded: Vec<_> = forms.iter().map(|f| f.expand()).collect();
    let ncoeffs = expanded[0].coeffs().len();
    let rows: Vec<Vec<_>> = (0..ncoeffs)
        .map(|k| expanded.iter().map(|f| f.coeffs()[k].clone()).collect())
        .collect();
    let null = exact_nullspace(&rows).ok()?;
    let vec = null.iter().find(|v| v.iter().all(|x| !x.is_zero()))?;
    let coeffs = normalize_coeffs(vec, &field);
    let rel = SecantRelation::new(mu.clone(), coeffs.into_iter().zip(forms).collect());
    verify_relation(&rel).ok()?;
    Some(rel)
}

/// Exact values of small height within `radius` of `w`: rationals with a
/// small denominator and quadratic irrationals `(A, B, C)` with small
/// coefficients, each tagged with its height for ordering.
fn small_height_candidates(w: Complex64, radius: f64) -> Vec<(SnappedRoot, u32)> {
    use num_integer::Integer;
    let mut out: Vec<(SnappedRoot, u32)> = Vec::new();
    if w.im.abs() <= radius {
        for q in 1..=COMBO_DEN_CAP {
            let p0 = (w.re * q as f64).round() as i64;
            for p in [p0 - 1, p0, p0 + 1] {
                if p.unsigned_abs().gcd(&(q as u64)) != 1 {
                    continue;
                }
                if (p as f64 / q as f64 - w.re).abs() <= radius {
                    out.push((
                        SnappedRoot::Rational(Rational::new(p, q)),
                        (p.unsigned_abs() + q as u64) as u32,
                    ));
                }
            }
        }
    }
    for a in 1..=COMBO_QUAD_CAP {
        for b in -COMBO_QUAD_CAP..=COMBO_QUAD_CAP {
            for c in -COMBO_QUAD_CAP..=COMBO_QUAD_CAP {
                if gcd3(a.unsigned_abs(), b.unsigned_abs(), c.unsigned_abs()) != 1 {
                    continue;
                }
                let disc = b * b - 4 * a * c;
                if disc == 0 {
                    continue;
                }
                let (core128, s128) = squarefree_decompose_int(disc as i128);
                if core128 == 1 {
                    // Perfect square: rational roots, already covered.
                    continue;
                }
                let core = core128 as i64;
                let height = (a + b.abs() + c.abs()) as u32;
                let half = Rational::new(-b, 2 * a);
                let spread = Rational::new(s128 as i64, 2 * a);
                if disc > 0 {
                    if w.im.abs() > radius {
                        continue;
                    }
                    let sq = (disc as f64).sqrt();
                    for (sgn, sp) in [(1.0, spread.clone()), (-1.0, -&spread)] {
                        let val = (-b as f64 + sgn * sq) / (2.0 * a as f64);
                        if (val - w.re).abs() <= radius {
                            out.push((
                                SnappedRoot::Quadratic { a: half.clone(), b: sp, core },
                                height,
                            ));
                        }
                    }
                } else {
                    let sq = ((-disc) as f64).sqrt();
                    for (sgn, sp) in [(1.0, spread.clone()), (-1.0, -&spread)] {
                        let val = Complex64::new(-b as f64 / (2.0 * a as f64), sgn * sq / (2.0 * a as f64));
                        if (val - w).norm() <= radius {
                            out.push((
                                SnappedRoot::Quadratic { a: half.clone(), b: sp, core },
                                height,
                            ));
                        }
                    }
                }
            }
        }
    }
    out.sort_by(|x, y| x.1.cmp(&y.1));
    out
}
