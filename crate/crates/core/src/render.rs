//! Plain-text rendering in letter notation: entry `(j, l)` of an `m × m`
//! base matrix is the `(j·m + l)`-th lowercase letter, so `a..i` for `m = 3`.
//! Letters run out past `m = 5`; larger sizes fall back to `x[j,l]`.

use num_bigint::BigUint;

use crate::decomposition::{Decomposition, ExponentMatrix, ThetaProductWord};
use crate::error::{Error, Result};
use crate::matrix::Permutation;
use crate::symbolic::PermPolynomial;

pub const MAX_LETTER_SIDE: usize = 5;

/// Name of 0-based entry `(j, l)`.
pub fn entry_name(m: usize, j: usize, l: usize) -> String {
    if m <= MAX_LETTER_SIDE {
        char::from(b'a' + (j * m + l) as u8).to_string()
    } else {
        format!("x[{},{}]", j + 1, l + 1)
    }
}

/// `a^2 b d f^2 h^2 i` style monomial.
pub fn monomial(r: &ExponentMatrix) -> String {
    let m = r.m();
    let mut parts = Vec::new();
    for j in 0..m {
        for l in 0..m {
            match r.get(j, l) {
                0 => {}
                1 => parts.push(entry_name(m, j, l)),
                e => parts.push(format!("{}^{e}", entry_name(m, j, l))),
            }
        }
    }
    parts.join(" ")
}

/// One coefficient and monomial per line, largest exponent matrix first so
/// that `a`-heavy monomials lead.
pub fn polynomial(p: &PermPolynomial) -> String {
    p.terms()
        .iter()
        .rev()
        .map(|(r, c)| format!("{c} {}\n", monomial(r)))
        .collect()
}

/// Letters of a base permanent-product, e.g. `aei`.
pub fn product_letters(sigma: &[usize]) -> String {
    let m = sigma.len();
    sigma.iter().enumerate().map(|(j, &l)| entry_name(m, j, l)).collect()
}

/// `(aei)^3 (bfg)^2 ...`.
pub fn decomposition(d: &Decomposition) -> String {
    d.terms()
        .iter()
        .map(|t| {
            let letters = product_letters(t.sigma.as_zero_based());
            if t.t == 1 {
                format!("({letters})")
            } else {
                format!("({letters})^{}", t.t)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// `(a1f1h1)(a2e2i2)`: the entry in block column 1 first within each factor,
/// then the remaining rows in order, each tagged with its local index.
pub fn word(w: &ThetaProductWord) -> String {
    let mut out = String::new();
    for (k, s) in w.sigmas().iter().enumerate() {
        let cols = s.as_zero_based();
        let m = cols.len();
        let anchor = cols.iter().position(|&l| l == 0).unwrap_or(0);
        let order = std::iter::once(anchor).chain((0..m).filter(|&j| j != anchor));
        let names: Vec<String> = order
            .map(|j| format!("{}{}", entry_name(m, j, cols[j]), k + 1))
            .collect();
        let sep = if m <= MAX_LETTER_SIDE { "" } else { " " };
        out.push('(');
        out.push_str(&names.join(sep));
        out.push(')');
    }
    out
}

fn letter_cell(m: usize, c: char) -> Result<(usize, usize)> {
    let idx = (c as u32).wrapping_sub('a' as u32) as usize;
    if m > MAX_LETTER_SIDE || idx >= m * m {
        return Err(Error::Parse(format!("`{c}` is not an entry letter for m = {m}")));
    }
    Ok((idx / m, idx % m))
}

/// Inverse of [`monomial`]: whitespace-separated `x` or `x^e` factors,
/// repeated letters adding up. The line sums must all equal `degree`.
pub fn parse_monomial(m: usize, degree: usize, text: &str) -> Result<ExponentMatrix> {
    let mut rows = vec![vec![0u32; m]; m];
    for factor in text.split_whitespace() {
        let (name, exp) = factor.split_once('^').unwrap_or((factor, "1"));
        let mut chars = name.chars();
        let (Some(c), None) = (chars.next(), chars.next()) else {
            return Err(Error::Parse(format!("bad factor `{factor}`")));
        };
        let (j, l) = letter_cell(m, c)?;
        rows[j][l] += exp
            .parse::<u32>()
            .map_err(|_| Error::Parse(format!("bad exponent in `{factor}`")))?;
    }
    ExponentMatrix::with_degree(rows, degree)
}

/// Reads `coefficient monomial` lines; blank lines and `#` comments are
/// skipped.
pub fn parse_polynomial(m: usize, degree: usize, text: &str) -> Result<PermPolynomial> {
    let mut terms = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (coeff, mono) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::Parse(format!("bad term `{line}`")))?;
        let coeff: BigUint = coeff
            .parse()
            .map_err(|_| Error::Parse(format!("bad coefficient in `{line}`")))?;
        terms.push((parse_monomial(m, degree, mono)?, coeff));
    }
    PermPolynomial::new(m, degree, terms)
}

/// Inverse of [`word`] for `m ≤ 5`: factors `(a1e1i1)(a2f2h2)`, one per
/// local index in increasing order, each naming one entry per row.
pub fn parse_word(m: usize, text: &str) -> Result<ThetaProductWord> {
    let bad = |why: &str| Error::Parse(format!("{why} in word `{text}`"));
    let mut sigmas = Vec::new();
    for group in text.split('(').map(str::trim).filter(|g| !g.is_empty()) {
        let body = group.strip_suffix(')').ok_or_else(|| bad("unclosed factor"))?;
        let mut image = vec![usize::MAX; m];
        let mut chars = body.chars().filter(|c| !c.is_whitespace()).peekable();
        while let Some(c) = chars.next() {
            let (j, l) = letter_cell(m, c)?;
            let mut digits = String::new();
            while let Some(d) = chars.next_if(char::is_ascii_digit) {
                digits.push(d);
            }
            if digits.parse::<usize>().ok() != Some(sigmas.len() + 1) {
                return Err(bad("local index out of order"));
            }
            if image[j] != usize::MAX {
                return Err(bad("repeated row"));
            }
            image[j] = l;
        }
        sigmas.push(Permutation::from_zero_based(image).map_err(|_| bad("factor is not a permanent-product"))?);
    }
    ThetaProductWord::new(sigmas)
}
