//! JSON wire formats for relations and certificate files.
//!
//! Exact data crosses the process boundary as decimal strings: a rational is
//! `"p"` or `"p/q"`, a field element is its constant-term-first coefficient
//! list, and a field is its modulus. Nothing passes through floating point,
//! so serialize/parse round trips are bit-exact.

use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{FieldElement, NumFieldError, NumberField, Rational};
use crate::forms::{FactoredForm, ProjRoot};
use crate::partitions::Partition;
use crate::relations::{CertificateLibrary, RelationError, SecantRelation};

#[derive(Debug, Error)]
pub enum WireError {
    #[error("cannot parse {0:?} as a rational")]
    BadRational(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("modulus must have degree >= 1 and a nonzero leading coefficient")]
    BadModulus,
    #[error("element has {got} coefficients but the field has degree {degree}")]
    BadElement { got: usize, degree: usize },
    #[error("a factor with alpha = beta = 0 is not a projective point")]
    BadRoot,
    #[error("a term has a zero scalar or a zero coefficient")]
    ZeroTerm,
    #[error("relation has no terms")]
    Empty,
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Field(#[from] NumFieldError),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

/// A relation file: the ambient field, the stratum, and the terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireRelation {
    pub field: WireField,
    pub mu: Vec<u64>,
    pub terms: Vec<WireTerm>,
}

/// `Q[z]/(m(z))` as the constant-term-first coefficients of `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireField {
    pub min_poly: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireTerm {
    pub coeff: Vec<String>,
    pub form: WireForm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireForm {
    pub scalar: Vec<String>,
    pub factors: Vec<WireFactor>,
}

/// A projective root `(alpha : beta)` with its multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireFactor {
    pub alpha: Vec<String>,
    pub beta: Vec<String>,
    pub mult: u32,
}

/// A stored certificate: a verified relation plus its origin string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireCertificate {
    pub provenance: String,
    pub relation: WireRelation,
}

/// A certificate library file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireLibrary {
    pub certificates: Vec<WireCertificate>,
}

fn rational_to_string(r: &Rational) -> String {
    r.to_string()
}

fn rational_from_string(s: &str) -> Result<Rational, WireError> {
    let bad = || WireError::BadRational(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let n = BigInt::from_str(num.trim()).map_err(|_| bad())?;
    let n = Rational::from_bigint(n);
    match den {
        None => Ok(n),
        Some(d) => {
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d == BigInt::from(0) {
                return Err(WireError::ZeroDenominator(s.to_string()));
            }
            Ok(&n / &Rational::from_bigint(d))
        }
    }
}

fn element_to_wire(x: &FieldElement) -> Vec<String> {
    x.coeffs().iter().map(rational_to_string).collect()
}

fn element_from_wire(
    field: &Arc<NumberField>,
    coeffs: &[String],
) -> Result<FieldElement, WireError> {
    if coeffs.len() > field.degree() {
        return Err(WireError::BadElement {
            got: coeffs.len(),
            degree: field.degree(),
        });
    }
    let parsed = coeffs
        .iter()
        .map(|s| rational_from_string(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(field.element(parsed))
}

fn form_to_wire(f: &FactoredForm) -> WireForm {
    WireForm {
        scalar: element_to_wire(f.scalar()),
        factors: f
            .factors()
            .iter()
            .map(|(root, mult)| WireFactor {
                alpha: element_to_wire(root.alpha()),
                beta: element_to_wire(root.beta()),
                mult: *mult,
            })
            .collect(),
    }
}

fn form_from_wire(field: &Arc<NumberField>, w: &WireForm) -> Result<FactoredForm, WireError> {
    let scalar = element_from_wire(field, &w.scalar)?;
    if scalar.is_zero() {
        return Err(WireError::ZeroTerm);
    }
    let mut factors = Vec::with_capacity(w.factors.len());
    for f in &w.factors {
        let alpha = element_from_wire(field, &f.alpha)?;
        let beta = element_from_wire(field, &f.beta)?;
        if alpha.is_zero() && beta.is_zero() {
            return Err(WireError::BadRoot);
        }
        factors.push((ProjRoot::new(alpha, beta)?, f.mult));
    }
    Ok(FactoredForm::new(scalar, factors))
}

pub fn relation_to_wire(rel: &SecantRelation) -> WireRelation {
    WireRelation {
        field: WireField {
            min_poly: rel.field().min_poly().iter().map(rational_to_string).collect(),
        },
        mu: rel.mu().parts().to_vec(),
        terms: rel
            .terms()
            .iter()
            .map(|(c, f)| WireTerm {
                coeff: element_to_wire(c),
                form: form_to_wire(f),
            })
            .collect(),
    }
}

/// Rebuilds the relation; structural validity (field consistency, nonzero
/// scalars, projective points) is enforced here, while the vanishing-sum and
/// stratum checks stay with `verify_relation`.
pub fn relation_from_wire(w: &WireRelation) -> Result<SecantRelation, WireError> {
    let min_poly = w
        .field
        .min_poly
        .iter()
        .map(|s| rational_from_string(s))
        .collect::<Result<Vec<_>, _>>()?;
    if min_poly.len() < 2 || min_poly.last().unwrap().is_zero() {
        return Err(WireError::BadModulus);
    }
    let field = NumberField::new(min_poly);
    if w.terms.is_empty() {
        return Err(WireError::Empty);
    }
    let mut terms = Vec::with_capacity(w.terms.len());
    for t in &w.terms {
        let coeff = element_from_wire(&field, &t.coeff)?;
        if coeff.is_zero() {
            return Err(WireError::ZeroTerm);
        }
        terms.push((coeff, form_from_wire(&field, &t.form)?));
    }
    Ok(SecantRelation::new(Partition::new(w.mu.clone()), terms))
}

pub fn relation_to_json(rel: &SecantRelation) -> String {
    serde_json::to_string_pretty(&relation_to_wire(rel)).expect("wire structs always serialize")
}

pub fn relation_from_json(s: &str) -> Result<SecantRelation, WireError> {
    relation_from_wire(&serde_json::from_str(s)?)
}

pub fn library_to_wire(lib: &CertificateLibrary) -> WireLibrary {
    WireLibrary {
        certificates: lib
            .entries()
            .iter()
            .map(|e| WireCertificate {
                provenance: e.provenance.clone(),
                relation: relation_to_wire(&e.relation),
            })
            .collect(),
    }
}

/// Rebuilds a library; every certificate is re-verified on insertion, so a
/// tampered file is rejected.
pub fn library_from_wire(w: &WireLibrary) -> Result<CertificateLibrary, WireError> {
    let mut lib = CertificateLibrary::empty();
    for cert in &w.certificates {
        let rel = relation_from_wire(&cert.relation)?;
        lib.add(cert.provenance.clone(), rel)?;
    }
    Ok(lib)
}

pub fn library_to_json(lib: &CertificateLibrary) -> String {
    serde_json::to_string_pretty(&library_to_wire(lib)).expect("wire structs always serialize")
}

pub fn library_from_json(s: &str) -> Result<CertificateLibrary, WireError> {
    library_from_wire(&serde_json::from_str(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::{classical_two_two, solve_two_part_quartic_cubic, verify_relation};

    #[test]
    fn rational_strings_round_trip() {
        for s in ["0", "-7", "2/3", "-355/113", "1000000000000000000000000003/7"] {
            let r = rational_from_string(s).unwrap();
            assert_eq!(rational_to_string(&r), s);
        }
        // Non-canonical input normalizes but parses.
        assert_eq!(
            rational_from_string("4/6").unwrap(),
            Rational::new(2, 3)
        );
        assert!(matches!(
            rational_from_string("1/0"),
            Err(WireError::ZeroDenominator(_))
        ));
        assert!(matches!(
            rational_from_string("a/2"),
            Err(WireError::BadRational(_))
        ));
    }

    #[test]
    fn relation_round_trip_is_bit_exact() {
        for rel in [classical_two_two(), solve_two_part_quartic_cubic()] {
            let w1 = relation_to_wire(&rel);
            let back = relation_from_wire(&w1).unwrap();
            assert_eq!(back, rel);
            assert_eq!(relation_to_wire(&back), w1);
            assert_eq!(verify_relation(&back), Ok(()));
            let json = relation_to_json(&rel);
            assert_eq!(relation_from_json(&json).unwrap(), rel);
        }
    }

    #[test]
    fn library_round_trip_preserves_every_entry() {
        let lib = CertificateLibrary::builtin();
        let json = library_to_json(&lib);
        let back = library_from_json(&json).unwrap();
        assert_eq!(back.len(), lib.len());
        for (a, b) in lib.entries().iter().zip(back.entries()) {
            assert_eq!(a.provenance, b.provenance);
            assert_eq!(a.relation, b.relation);
        }
        assert_eq!(library_to_json(&back), json);
    }

    #[test]
    fn tampered_certificates_are_rejected() {
        let mut lib = CertificateLibrary::empty();
        lib.add("test".into(), classical_two_two()).unwrap();
        let mut w = library_to_wire(&lib);
        // Corrupt one coefficient: 4 -> 5.
        w.certificates[0].relation.terms[0].coeff[0] = "5".into();
        assert!(matches!(
            library_from_wire(&w),
            Err(WireError::Relation(RelationError::InvalidCertificate { .. }))
        ));
    }

    #[test]
    fn structural_defects_are_reported() {
        let rel = classical_two_two();
        let mut w = relation_to_wire(&rel);
        w.field.min_poly = vec!["1".into()];
        assert!(matches!(relation_from_wire(&w), Err(WireError::BadModulus)));

        let mut w = relation_to_wire(&rel);
        w.terms[0].form.factors[0].alpha = vec!["0".into(), "0".into()];
        w.terms[0].form.factors[0].beta = vec!["0".into(), "0".into()];
        assert!(matches!(relation_from_wire(&w), Err(WireError::BadRoot)));

        let mut w = relation_to_wire(&rel);
        w.terms[0].coeff = vec!["0".into()];
        assert!(matches!(relation_from_wire(&w), Err(WireError::ZeroTerm)));

        let mut w = relation_to_wire(&rel);
        w.terms[0].coeff = vec!["1".into(), "2".into(), "3".into()];
        assert!(matches!(
            relation_from_wire(&w),
            Err(WireError::BadElement { got: 3, degree: 2 })
        ));
    }
}
