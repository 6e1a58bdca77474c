//! JSON eigenform documents.
//!
//! ```json
//! {"name": "ups20", "weight": 20,
//!  "terms": [{"coeff": ["-1"], "expo": [2, 0, 0, 1]}, ...]}
//! ```
//!
//! A number field is given as `"field": {"poly": [c0, c1, ...], "root":
//! {"re": [lo, hi], "im": [lo, hi]}}` with the constant term first; term
//! coefficients are then in the power basis of that root. Rationals are
//! strings `"n/d"` (plain integers are accepted too).

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use siegel_core::eigenform::{CoefficientField, EigenformSpec, RootBox, Term};

use crate::cache::parse_rational;

#[derive(Debug, thiserror::Error)]
pub enum FormError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error(transparent)]
    Invalid(#[from] siegel_core::Error),
}

/// An integer or rational written as a JSON number or string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Text(String),
}

impl Num {
    fn rational(&self) -> Result<BigRational, FormError> {
        match self {
            Num::Int(n) => Ok(BigRational::from_integer(BigInt::from(*n))),
            Num::Text(s) => parse_rational(s).ok_or_else(|| FormError::Malformed(format!("`{s}` is not a rational"))),
        }
    }

    fn integer(&self) -> Result<BigInt, FormError> {
        let r = self.rational()?;
        if !r.is_integer() {
            return Err(FormError::Malformed(format!("`{r}` is not an integer")));
        }
        Ok(r.to_integer())
    }

    fn of_rational(r: &BigRational) -> Num {
        Num::Text(format!("{}/{}", r.numer(), r.denom()))
    }

    fn of_integer(n: &BigInt) -> Num {
        match i64::try_from(n) {
            Ok(x) => Num::Int(x),
            Err(_) => Num::Text(n.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootDoc {
    pub re: [Num; 2],
    pub im: [Num; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDoc {
    pub poly: Vec<Num>,
    pub root: RootDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub coeff: Vec<Num>,
    pub expo: [u32; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormDoc {
    pub name: String,
    pub weight: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldDoc>,
    pub terms: Vec<TermDoc>,
}

impl FormDoc {
    pub fn to_spec(&self) -> Result<EigenformSpec, FormError> {
        let field = match &self.field {
            None => CoefficientField::Rational,
            Some(f) => CoefficientField::NumberField {
                poly: f.poly.iter().map(Num::integer).collect::<Result<_, _>>()?,
                root: RootBox {
                    re: (f.root.re[0].rational()?, f.root.re[1].rational()?),
                    im: (f.root.im[0].rational()?, f.root.im[1].rational()?),
                },
            },
        };
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(Term {
                    coeff: t.coeff.iter().map(Num::rational).collect::<Result<_, FormError>>()?,
                    expo: t.expo,
                })
            })
            .collect::<Result<_, FormError>>()?;
        Ok(EigenformSpec::new(&self.name, self.weight, field, terms)?)
    }

    pub fn from_spec(spec: &EigenformSpec) -> FormDoc {
        let field = match &spec.field {
            CoefficientField::Rational => None,
            CoefficientField::NumberField { poly, root } => Some(FieldDoc {
                poly: poly.iter().map(Num::of_integer).collect(),
                root: RootDoc {
                    re: [Num::of_rational(&root.re.0), Num::of_rational(&root.re.1)],
                    im: [Num::of_rational(&root.im.0), Num::of_rational(&root.im.1)],
                },
            }),
        };
        FormDoc {
            name: spec.name.clone(),
            weight: spec.weight,
            field,
            terms: spec
                .terms
                .iter()
                .map(|t| TermDoc {
                    coeff: t.coeff.iter().map(Num::of_rational).collect(),
                    expo: t.expo,
                })
                .collect(),
        }
    }
}

/// Parses and validates an eigenform document.
pub fn parse_eigenform(json: &str) -> Result<EigenformSpec, FormError> {
    let doc: FormDoc = serde_json::from_str(json).map_err(|e| FormError::Malformed(e.to_string()))?;
    doc.to_spec()
}

pub fn serialize_eigenform(spec: &EigenformSpec) -> String {
    serde_json::to_string_pretty(&FormDoc::from_spec(spec)).expect("document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use siegel_core::eigenform::builtin_catalog;
    use siegel_core::Error;

    #[test]
    fn catalog_round_trips() {
        for spec in builtin_catalog() {
            let text = serialize_eigenform(&spec);
            assert_eq!(parse_eigenform(&text).unwrap(), spec, "{text}");
        }
    }

    #[test]
    fn ups20_document() {
        let doc = r#"{"name": "ups20", "weight": 20, "terms": [
            {"coeff": ["-1"], "expo": [2, 0, 0, 1]},
            {"coeff": [-1], "expo": [1, 1, 1, 0]},
            {"coeff": ["1785600/1"], "expo": [0, 0, 2, 0]}]}"#;
        let spec = parse_eigenform(doc).unwrap();
        assert_eq!(spec.terms.len(), 3);
        assert_eq!(spec.weight, 20);
        assert_eq!(spec, siegel_core::eigenform::builtin("ups20").unwrap());
    }

    #[test]
    fn document_errors() {
        let inhomogeneous = r#"{"name": "x", "weight": 20, "terms": [
            {"coeff": ["1"], "expo": [2, 0, 0, 1]}, {"coeff": ["1"], "expo": [1, 0, 1, 0]}]}"#;
        assert!(matches!(
            parse_eigenform(inhomogeneous),
            Err(FormError::Invalid(Error::NonHomogeneous { term: 1, found: 14, expected: 20 }))
        ));
        let two_roots = r#"{"name": "x", "weight": 4,
            "field": {"poly": [1, -3, 0, 1], "root": {"re": ["0", "2"], "im": ["-1/10", "1/10"]}},
            "terms": [{"coeff": ["0", "1"], "expo": [1, 0, 0, 0]}]}"#;
        assert!(matches!(parse_eigenform(two_roots), Err(FormError::Invalid(Error::RootIsolation(2)))));
        assert!(matches!(parse_eigenform("{\"name\": 1}"), Err(FormError::Malformed(_))));
        let bad_rational = r#"{"name": "x", "weight": 4, "terms": [{"coeff": ["1/0"], "expo": [1, 0, 0, 0]}]}"#;
        assert!(matches!(parse_eigenform(bad_rational), Err(FormError::Malformed(_))));
    }

    fn arb_rational() -> impl Strategy<Value = BigRational> {
        (-10_i64.pow(12)..10_i64.pow(12), 1i64..1000)
            .prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    fn weight_24_monomials() -> Vec<[u32; 4]> {
        let mut out = Vec::new();
        for i in 0..=6 {
            for j in 0..=4 {
                for l in 0..=2 {
                    for m in 0..=2 {
                        if 4 * i + 6 * j + 10 * l + 12 * m == 24 {
                            out.push([i, j, l, m]);
                        }
                    }
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn serialization_round_trips(
            picks in proptest::collection::btree_map(0usize..100, (arb_rational(), arb_rational()), 1..5),
            number_field in any::<bool>(),
        ) {
            let monomials = weight_24_monomials();
            let mut terms: Vec<Term> = Vec::new();
            for (pick, (a, b)) in picks {
                let expo = monomials[pick % monomials.len()];
                if terms.iter().any(|t| t.expo == expo) {
                    continue;
                }
                let coeff = if number_field { vec![a, b] } else { vec![a] };
                terms.push(Term { coeff, expo });
            }
            let field = if number_field {
                // x^2 - 5 with the positive root
                let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
                CoefficientField::NumberField {
                    poly: vec![BigInt::from(-5), BigInt::from(0), BigInt::from(1)],
                    root: RootBox { re: (r(2, 1), r(5, 2)), im: (r(-1, 10), r(1, 10)) },
                }
            } else {
                CoefficientField::Rational
            };
            let spec = EigenformSpec::new("random", 24, field, terms).unwrap();
            let text = serialize_eigenform(&spec);
            let back = parse_eigenform(&text).unwrap();
            prop_assert_eq!(&back, &spec);
            prop_assert_eq!(serialize_eigenform(&back), text);
        }
    }
}
