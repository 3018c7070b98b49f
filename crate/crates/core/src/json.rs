//! JSON wire formats. Rationals are written as integers when they are whole
//! and fit in 64 bits, otherwise as `"p/q"` strings; permutations are
//! 1-indexed image arrays; big integer coefficients are decimal strings.

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::decomposition::{AlphaMatrix, Decomposition, DecompositionTerm, ExponentMatrix, ThetaProductWord};
use crate::error::{Error, Result};
use crate::lifting::BlockPermutation;
use crate::matrix::{format_rational, parse_rational, Matrix, Permutation, Rational};
use crate::symbolic::PermPolynomial;

/// Parses JSON text, reporting line and column on failure.
pub fn from_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("wire types always serialize")
}

pub fn to_string_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("wire types always serialize")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryWire {
    Int(i64),
    Text(String),
}

impl From<&Rational> for EntryWire {
    fn from(r: &Rational) -> Self {
        match r.is_integer().then(|| r.numer().to_i64()).flatten() {
            Some(n) => EntryWire::Int(n),
            None => EntryWire::Text(format_rational(r)),
        }
    }
}

impl TryFrom<EntryWire> for Rational {
    type Error = Error;

    fn try_from(e: EntryWire) -> Result<Rational> {
        match e {
            EntryWire::Int(n) => Ok(Rational::from_integer(BigInt::from(n))),
            EntryWire::Text(s) => parse_rational(&s),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixWire {
    pub n: usize,
    pub entries: Vec<Vec<EntryWire>>,
}

impl From<Matrix> for MatrixWire {
    fn from(m: Matrix) -> Self {
        MatrixWire {
            n: m.n(),
            entries: m.rows().map(|r| r.iter().map(EntryWire::from).collect()).collect(),
        }
    }
}

impl TryFrom<MatrixWire> for Matrix {
    type Error = Error;

    fn try_from(w: MatrixWire) -> Result<Matrix> {
        if w.entries.len() != w.n {
            return Err(Error::DimensionMismatch {
                expected: w.n,
                found: w.entries.len(),
            });
        }
        let rows = w
            .entries
            .into_iter()
            .map(|r| r.into_iter().map(Rational::try_from).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Matrix::new(rows)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Permutation> {
        Permutation::from_one_based(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.one_based()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockPermutationWire {
    pub m: usize,
    #[serde(rename = "M")]
    pub degree: usize,
    pub blocks: Vec<Vec<Permutation>>,
}

impl From<BlockPermutation> for BlockPermutationWire {
    fn from(b: BlockPermutation) -> Self {
        BlockPermutationWire {
            m: b.m(),
            degree: b.degree(),
            blocks: b.blocks().map(<[Permutation]>::to_vec).collect(),
        }
    }
}

impl TryFrom<BlockPermutationWire> for BlockPermutation {
    type Error = Error;

    fn try_from(w: BlockPermutationWire) -> Result<BlockPermutation> {
        let b = BlockPermutation::new(w.blocks)?;
        if b.m() != w.m {
            return Err(Error::DimensionMismatch {
                expected: w.m,
                found: b.m(),
            });
        }
        if b.degree() != w.degree {
            return Err(Error::DimensionMismatch {
                expected: w.degree,
                found: b.degree(),
            });
        }
        Ok(b)
    }
}

impl TryFrom<Vec<Vec<u32>>> for ExponentMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<u32>>) -> Result<ExponentMatrix> {
        ExponentMatrix::new(rows)
    }
}

impl From<ExponentMatrix> for Vec<Vec<u32>> {
    fn from(r: ExponentMatrix) -> Self {
        r.rows()
    }
}

impl TryFrom<Vec<Vec<Vec<usize>>>> for AlphaMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<Vec<usize>>>) -> Result<AlphaMatrix> {
        AlphaMatrix::new(rows)
    }
}

impl From<AlphaMatrix> for Vec<Vec<Vec<usize>>> {
    fn from(a: AlphaMatrix) -> Self {
        a.rows()
    }
}

impl From<Decomposition> for Vec<DecompositionTerm> {
    fn from(d: Decomposition) -> Self {
        d.terms().to_vec()
    }
}

impl TryFrom<Vec<DecompositionTerm>> for Decomposition {
    type Error = Error;

    fn try_from(terms: Vec<DecompositionTerm>) -> Result<Decomposition> {
        if let Some(t) = terms.iter().find(|t| t.t == 0) {
            return Err(Error::Parse(format!(
                "zero multiplicity for sigma {:?}",
                t.sigma.one_based()
            )));
        }
        if let Some(first) = terms.first() {
            if let Some(t) = terms.iter().find(|t| t.sigma.len() != first.sigma.len()) {
                return Err(Error::DimensionMismatch {
                    expected: first.sigma.len(),
                    found: t.sigma.len(),
                });
            }
        }
        Ok(Decomposition::new(terms.into_iter().map(|t| (t.sigma, t.t))))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WordEntry {
    pub k: usize,
    pub sigma: Permutation,
}

impl From<ThetaProductWord> for Vec<WordEntry> {
    fn from(w: ThetaProductWord) -> Self {
        w.sigmas()
            .iter()
            .enumerate()
            .map(|(i, s)| WordEntry {
                k: i + 1,
                sigma: s.clone(),
            })
            .collect()
    }
}

impl TryFrom<Vec<WordEntry>> for ThetaProductWord {
    type Error = Error;

    fn try_from(mut entries: Vec<WordEntry>) -> Result<ThetaProductWord> {
        entries.sort_by_key(|e| e.k);
        if let Some((i, e)) = entries.iter().enumerate().find(|(i, e)| e.k != i + 1) {
            return Err(Error::Parse(format!(
                "word indices must be 1..{}, found k = {} at position {}",
                entries.len(),
                e.k,
                i + 1
            )));
        }
        ThetaProductWord::new(entries.into_iter().map(|e| e.sigma).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialTerm {
    #[serde(rename = "R")]
    pub r: ExponentMatrix,
    #[serde(with = "biguint_string")]
    pub coeff: BigUint,
}

impl From<PermPolynomial> for Vec<PolynomialTerm> {
    fn from(p: PermPolynomial) -> Self {
        p.terms()
            .iter()
            .map(|(r, c)| PolynomialTerm {
                r: r.clone(),
                coeff: c.clone(),
            })
            .collect()
    }
}

impl TryFrom<Vec<PolynomialTerm>> for PermPolynomial {
    type Error = Error;

    fn try_from(terms: Vec<PolynomialTerm>) -> Result<PermPolynomial> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Parse("polynomial has no terms".into()))?;
        let (m, degree) = (first.r.m(), first.r.degree());
        if let Some(t) = terms.iter().find(|t| t.coeff == BigUint::default()) {
            return Err(Error::Parse(format!("zero coefficient stored at {:?}", t.r.rows())));
        }
        PermPolynomial::new(m, degree, terms.into_iter().map(|t| (t.r, t.coeff)))
    }
}

/// Big unsigned integers as decimal strings.
pub mod biguint_string {
    use num_bigint::BigUint;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        text.parse()
            .map_err(|_| D::Error::custom(format!("invalid decimal integer `{text}`")))
    }
}

/// Rationals as `"p"` or `"p/q"` strings.
pub mod rational_string {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use crate::matrix::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }
}
