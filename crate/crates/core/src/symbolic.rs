//! Lift permanents as polynomials in the entries of θ, keyed by exponent
//! matrix, and the coefficientwise comparison with perm(θ)^M.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::decomposition::{all_decompositions, ExponentMatrix};
use crate::error::{check_cap, Error, Result};
use crate::lifting::{for_each_support_choice, support_prefixes, BlockPermutation};
use crate::matrix::{factorial_u64, Matrix, Permutation, Rational};

pub use crate::decomposition::multinomial;

/// Sparse polynomial `Σ c_R Π θ_jl^{R_jl}` with positive integer
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    try_from = "Vec<crate::json::PolynomialTerm>",
    into = "Vec<crate::json::PolynomialTerm>"
)]
pub struct PermPolynomial {
    m: usize,
    degree: usize,
    terms: BTreeMap<ExponentMatrix, BigUint>,
}

impl PermPolynomial {
    /// Builds a polynomial, dropping zero coefficients. Every key must have
    /// side `m` and degree `degree`.
    pub fn new(m: usize, degree: usize, terms: impl IntoIterator<Item = (ExponentMatrix, BigUint)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (r, c) in terms {
            if r.m() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: r.m(),
                });
            }
            if r.degree() != degree {
                return Err(Error::InvalidExponentMatrix(format!(
                    "key has degree {}, expected {degree}",
                    r.degree()
                )));
            }
            if !c.is_zero() {
                *map.entry(r).or_insert_with(BigUint::zero) += c;
            }
        }
        Ok(PermPolynomial { m, degree, terms: map })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<ExponentMatrix, BigUint> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient at `r`, zero when absent.
    pub fn coefficient(&self, r: &ExponentMatrix) -> BigUint {
        self.terms.get(r).cloned().unwrap_or_default()
    }

    /// Sum of all coefficients, i.e. the value at the all-ones matrix.
    pub fn total(&self) -> BigUint {
        self.terms.values().sum()
    }

    /// Substitutes the entries of `theta`.
    pub fn evaluate(&self, theta: &Matrix) -> Result<Rational> {
        if theta.n() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: theta.n(),
            });
        }
        // Powers of each entry up to M, shared by all monomials.
        let powers: Vec<Vec<Rational>> = (0..self.m * self.m)
            .map(|c| {
                let x = theta.get(c / self.m, c % self.m);
                let mut p = vec![Rational::one()];
                for e in 1..=self.degree {
                    p.push(&p[e - 1] * x);
                }
                p
            })
            .collect();
        let mut sum = Rational::zero();
        for (r, coeff) in &self.terms {
            let mut term = Rational::from_integer(coeff.clone().into());
            for (c, &e) in r.cells().iter().enumerate() {
                if e > 0 {
                    term *= &powers[c][e as usize];
                }
            }
            sum += term;
        }
        Ok(sum)
    }
}

/// Exponent matrix of every support permutation of the lift, counted.
pub fn lift_permanent_polynomial(spec: &BlockPermutation, caps: &Caps) -> Result<PermPolynomial> {
    let (m, degree) = (spec.m(), spec.degree());
    check_cap("lift-poly", (m * degree) as u64, caps.lift_poly as u64)?;
    let partials = crate::par::map_vec(support_prefixes(spec, 2), |prefix| {
        let mut local: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        let mut cells = vec![0u32; m * m];
        for_each_support_choice(spec, &prefix, &mut |choice| {
            cells.iter_mut().for_each(|c| *c = 0);
            for (i, &l) in choice.iter().enumerate() {
                cells[(i / degree) * m + l] += 1;
            }
            *local.entry(cells.clone()).or_default() += 1;
        });
        local
    });
    let mut merged: BTreeMap<Vec<u32>, BigUint> = BTreeMap::new();
    for part in partials {
        for (k, v) in part {
            *merged.entry(k).or_insert_with(BigUint::zero) += v;
        }
    }
    let terms = merged.into_iter().map(|(cells, c)| {
        let rows = cells.chunks(m).map(<[u32]>::to_vec).collect();
        (
            ExponentMatrix::with_degree(rows, degree).expect("support choices have line sums M"),
            c,
        )
    });
    PermPolynomial::new(m, degree, terms)
}

/// `C(n, k)` as u64, saturating.
fn binomial_u64(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out * (n - i) as u128 / (i + 1) as u128;
        if out > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    out as u64
}

/// `perm(θ)^M` expanded by the multinomial theorem over the `m!` base
/// permanent-products: one term per composition of `M` into `m!` parts.
pub fn theta_power_polynomial(m: usize, degree: usize, caps: &Caps) -> Result<PermPolynomial> {
    if m == 0 {
        return Err(Error::EmptyMatrix);
    }
    if degree == 0 {
        return Err(Error::InvalidExponentMatrix("degree must be at least 1".into()));
    }
    check_cap("birkhoff", m as u64, caps.birkhoff as u64)?;
    let nperm = factorial_u64(m);
    let count = binomial_u64(degree as u64 + nperm - 1, nperm - 1);
    check_cap("power-terms", count, caps.power_terms)?;

    let perms: Vec<Permutation> = Permutation::all(m).collect();
    let mut terms: BTreeMap<Vec<u32>, BigUint> = BTreeMap::new();
    let mut parts = vec![0u32; perms.len()];
    compositions(&mut parts, 0, degree as u32, &mut |t| {
        let mut cells = vec![0u32; m * m];
        for (s, &k) in perms.iter().zip(t) {
            if k > 0 {
                for (j, &l) in s.as_zero_based().iter().enumerate() {
                    cells[j * m + l] += k;
                }
            }
        }
        *terms.entry(cells).or_insert_with(BigUint::zero) += multinomial(t);
    });
    let terms = terms.into_iter().map(|(cells, c)| {
        let rows = cells.chunks(m).map(<[u32]>::to_vec).collect();
        (
            ExponentMatrix::with_degree(rows, degree).expect("sum of M permutation matrices"),
            c,
        )
    });
    PermPolynomial::new(m, degree, terms)
}

fn compositions(parts: &mut [u32], idx: usize, left: u32, visit: &mut impl FnMut(&[u32])) {
    if idx + 1 == parts.len() {
        parts[idx] = left;
        visit(parts);
        parts[idx] = 0;
        return;
    }
    for k in 0..=left {
        parts[idx] = k;
        compositions(parts, idx + 1, left - k, visit);
    }
    parts[idx] = 0;
}

/// Sum of multinomials over every decomposition of `r`: the number of
/// ordered words of base permanent-products with exponent matrix `r`.
pub fn coefficient_upper_bound(r: &ExponentMatrix, caps: &Caps) -> Result<BigUint> {
    Ok(all_decompositions(r, caps)?.iter().map(|d| d.arrangements()).sum())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceViolation {
    #[serde(rename = "R")]
    pub r: ExponentMatrix,
    #[serde(with = "crate::json::biguint_string")]
    pub lift_coeff: BigUint,
    #[serde(with = "crate::json::biguint_string")]
    pub bound_coeff: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub ok: bool,
    /// Keys of the lift polynomial compared.
    pub checked: usize,
    /// Keys where the lift coefficient meets the bound exactly.
    pub tight: usize,
    pub violations: Vec<DominanceViolation>,
}

/// Compares every coefficient of the lift polynomial with the matching
/// coefficient of `perm(θ)^M`.
pub fn verify_dominance(spec: &BlockPermutation, caps: &Caps) -> Result<DominanceReport> {
    let lift = lift_permanent_polynomial(spec, caps)?;
    let power = theta_power_polynomial(spec.m(), spec.degree(), caps)?;
    let mut violations = Vec::new();
    let mut tight = 0;
    for (r, c) in lift.terms() {
        let bound = power.coefficient(r);
        if *c > bound {
            violations.push(DominanceViolation {
                r: r.clone(),
                lift_coeff: c.clone(),
                bound_coeff: bound,
            });
        } else if *c == bound {
            tight += 1;
        }
    }
    Ok(DominanceReport {
        ok: violations.is_empty(),
        checked: lift.len(),
        tight,
        violations,
    })
}

/// `(m!)^M`, the value of `perm(J_m)^M`.
pub fn all_ones_power(m: usize, degree: usize) -> BigUint {
    BigUint::from(factorial_u64(m)).pow(degree as u32)
}
