//! Exact rational matrices, permutations, and permanents.
//!
//! Matrix entries are indexed from 0 through [`Matrix::get`] like any Rust
//! container. Permutations, which appear in every file format and in the
//! mathematical model, are 1-indexed at their public boundary
//! ([`Permutation::apply`], [`Permutation::one_based`]).

use std::fmt;
use std::ops::Range;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{check_cap, Error, Result};
use crate::par;

/// Exact rational number, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Parses `"p"` or `"p/q"` into a rational in lowest terms.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    match s.split_once('/') {
        None => Ok(Rational::from_integer(s.parse::<BigInt>().map_err(|_| bad())?)),
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(Rational::new(p, q))
        }
    }
}

/// Formats as `"p"` for integers and `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Best-effort conversion to `f64`, robust to numerators and denominators
/// beyond the `f64` range.
pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    if let Some(x) = r.to_f64() {
        if x.is_finite() && (x != 0.0 || r.is_zero()) {
            return x;
        }
    }
    let ln = ln_bigint(r.numer()) - ln_bigint(r.denom());
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * ln.exp()
}

/// Natural logarithm of |x| for x ≠ 0.
pub(crate) fn ln_bigint(x: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    let bits = x.bits();
    if bits < 1000 {
        return x.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x.abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// A bijection on `[n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    // 0-based images; ordering on this vector is the lexicographic order
    // of the 1-based image arrays as well.
    image: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n).collect(),
        }
    }

    /// The cyclic shift `i ↦ i + 1 (mod n)`.
    pub fn cycle(n: usize) -> Self {
        Permutation {
            image: (0..n).map(|i| (i + 1) % n).collect(),
        }
    }

    pub fn from_one_based(image: Vec<usize>) -> Result<Self> {
        if image.contains(&0) {
            return Err(Error::InvalidPermutation(format!(
                "{image:?} contains 0; images are 1-indexed"
            )));
        }
        Self::from_zero_based(image.into_iter().map(|x| x - 1).collect())
    }

    pub fn from_zero_based(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &x in &image {
            if x >= n || seen[x] {
                return Err(Error::InvalidPermutation(format!(
                    "{:?} is not a bijection on [{n}]",
                    image.iter().map(|x| x + 1).collect::<Vec<_>>()
                )));
            }
            seen[x] = true;
        }
        Ok(Permutation { image })
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// Image of the 1-based point `i`, 1-based.
    pub fn apply(&self, i: usize) -> usize {
        self.image[i - 1] + 1
    }

    /// Image array in 0-based form.
    pub fn as_zero_based(&self) -> &[usize] {
        &self.image
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.image.iter().map(|x| x + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &x) in self.image.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { image: inv }
    }

    /// Left-to-right composition: `self.then(other)` maps `i` to
    /// `other(self(i))`. As permutation matrices this is the product
    /// `self · other`.
    pub fn then(&self, other: &Permutation) -> Self {
        assert_eq!(self.len(), other.len(), "composing permutations of different sizes");
        Permutation {
            image: self.image.iter().map(|&x| other.image[x]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// Advances to the next permutation in lexicographic order. Returns
    /// `false` (leaving `self` unchanged) at the last one.
    pub fn next_lex(&mut self) -> bool {
        let v = &mut self.image;
        let n = v.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && v[i - 1] >= v[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while v[j] <= v[i - 1] {
            j -= 1;
        }
        v.swap(i - 1, j);
        v[i..].reverse();
        true
    }

    /// All permutations of `[n]` in lexicographic order.
    pub fn all(n: usize) -> LexPermutations {
        LexPermutations {
            next: Some(Permutation::identity(n)),
        }
    }

    /// The permutation of rank `rank` (0-based) in lexicographic order.
    pub fn unrank(n: usize, mut rank: u64) -> Self {
        let mut pool: Vec<usize> = (0..n).collect();
        let mut image = Vec::with_capacity(n);
        for i in (0..n).rev() {
            let f = factorial_u64(i);
            let idx = (rank / f) as usize;
            rank %= f;
            image.push(pool.remove(idx));
        }
        Permutation { image }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.image.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", x + 1)?;
        }
        write!(f, ")")
    }
}

pub struct LexPermutations {
    next: Option<Permutation>,
}

impl Iterator for LexPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        if succ.next_lex() {
            self.next = Some(succ);
        }
        Some(cur)
    }
}

/// n! saturating at `u64::MAX`.
pub fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64)
        .try_fold(1u64, |acc, k| acc.checked_mul(k))
        .unwrap_or(u64::MAX)
}

/// Dense square matrix of exact non-negative rationals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "crate::json::MatrixWire", into = "crate::json::MatrixWire")]
pub struct Matrix {
    n: usize,
    entries: Vec<Rational>,
}

impl Matrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    row: i + 1,
                    len: row.len(),
                    expected: n,
                });
            }
            for (j, x) in row.into_iter().enumerate() {
                if x.is_negative() {
                    return Err(Error::NegativeEntry { row: i + 1, col: j + 1 });
                }
                entries.push(x);
            }
        }
        Ok(Matrix { n, entries })
    }

    pub fn from_integers<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&x| rational(x)).collect())
                .collect(),
        )
    }

    /// Builds an `n × n` matrix from a function of 0-based `(row, col)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Result<Self> {
        Self::new((0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            entries: vec![Rational::zero(); n * n],
        }
    }

    pub fn ones(n: usize) -> Self {
        Matrix {
            n,
            entries: vec![Rational::one(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = Rational::one();
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at 0-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.entries[row * self.n + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: Rational) {
        self.entries[row * self.n + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Rational] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.entries.chunks(self.n)
    }

    /// Reorders rows and columns: the result has `self[rows(i), cols(j)]`
    /// at `(i, j)`.
    pub fn permuted(&self, rows: &Permutation, cols: &Permutation) -> Matrix {
        let (r, c) = (rows.as_zero_based(), cols.as_zero_based());
        Self::from_fn(self.n, |i, j| self.get(r[i], c[j]).clone()).expect("same size")
    }
}

/// Permanent as the sum of all n! permanent-products, skipping branches at
/// zero entries.
pub fn permanent_naive(mat: &Matrix, caps: &Caps) -> Result<Rational> {
    let n = mat.n();
    check_cap("naive", n as u64, caps.naive.min(63) as u64)?;
    let first: Vec<usize> = (0..n).filter(|&j| !mat.get(0, j).is_zero()).collect();
    let parts = par::map_vec(first, |j| {
        let mut acc = Rational::zero();
        naive_rec(mat, 1, 1u64 << j, mat.get(0, j).clone(), &mut acc);
        acc
    });
    Ok(parts.into_iter().fold(Rational::zero(), |a, b| a + b))
}

fn naive_rec(mat: &Matrix, row: usize, used: u64, prod: Rational, acc: &mut Rational) {
    let n = mat.n();
    if row == n {
        *acc += prod;
        return;
    }
    for j in 0..n {
        if used & (1 << j) != 0 {
            continue;
        }
        let x = mat.get(row, j);
        if x.is_zero() {
            continue;
        }
        naive_rec(mat, row + 1, used | (1 << j), &prod * x, acc);
    }
}

/// Permanent by Ryser's inclusion–exclusion formula over column subsets,
/// visited in Gray-code order so that each step updates the row sums by a
/// single column.
pub fn permanent_ryser(mat: &Matrix, caps: &Caps) -> Result<Rational> {
    let n = mat.n();
    check_cap("ryser", n as u64, caps.ryser.min(62) as u64)?;

    // Scale every row to integers; the permanent scales by the product of
    // the row multipliers.
    let mut scale = BigInt::one();
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for row in mat.rows() {
        let l = row.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        rows.push(row.iter().map(|x| x.numer() * (&l / x.denom())).collect());
        scale *= l;
    }
    // Column-major copy for the Gray-code updates.
    let cols: Vec<Vec<BigInt>> = (0..n).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect();

    let total = 1u64 << n;
    let ranges = par::chunk_ranges(total, par::default_chunks());
    let parts = par::map_vec(ranges, |range| ryser_chunk(&cols, range));
    let mut sum = parts.into_iter().fold(BigInt::zero(), |a, b| a + b);
    if n % 2 == 1 {
        sum = -sum;
    }
    Ok(Rational::new(sum, scale))
}

fn ryser_chunk(cols: &[Vec<BigInt>], range: Range<u64>) -> BigInt {
    let n = cols.len();
    let gray = |k: u64| k ^ (k >> 1);
    let mut sums = vec![BigInt::zero(); n];
    let g0 = gray(range.start);
    for (j, col) in cols.iter().enumerate() {
        if g0 & (1 << j) != 0 {
            for (s, x) in sums.iter_mut().zip(col) {
                *s += x;
            }
        }
    }
    let mut acc = BigInt::zero();
    let add_term = |sums: &[BigInt], g: u64, acc: &mut BigInt| {
        if g == 0 || sums.iter().any(|s| s.is_zero()) {
            return;
        }
        let prod = sums.iter().fold(BigInt::one(), |p, s| p * s);
        if g.count_ones() % 2 == 1 {
            *acc -= prod;
        } else {
            *acc += prod;
        }
    };
    add_term(&sums, g0, &mut acc);
    for k in range.start + 1..range.end {
        let bit = k.trailing_zeros() as usize;
        let g = gray(k);
        if g & (1 << bit) != 0 {
            for (s, x) in sums.iter_mut().zip(&cols[bit]) {
                *s += x;
            }
        } else {
            for (s, x) in sums.iter_mut().zip(&cols[bit]) {
                *s -= x;
            }
        }
        add_term(&sums, g, &mut acc);
    }
    acc
}

/// Exact permanent by the fastest exact route available.
pub fn permanent(mat: &Matrix, caps: &Caps) -> Result<Rational> {
    permanent_ryser(mat, caps)
}

/// perm(mat)^degree.
pub fn permanent_power(mat: &Matrix, degree: usize, caps: &Caps) -> Result<Rational> {
    let p = permanent(mat, caps)?;
    Ok(num_traits::pow(p, degree))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn small_permanents() {
        let m = Matrix::from_integers(&[[5]]).unwrap();
        assert_eq!(permanent_naive(&m, &caps()).unwrap(), rational(5));
        assert_eq!(permanent_ryser(&m, &caps()).unwrap(), rational(5));
        let j2 = Matrix::ones(2);
        assert_eq!(permanent_naive(&j2, &caps()).unwrap(), rational(2));
        assert_eq!(permanent_ryser(&Matrix::identity(4), &caps()).unwrap(), rational(1));
        assert_eq!(permanent_ryser(&Matrix::ones(3), &caps()).unwrap(), rational(6));
    }

    #[test]
    fn powers() {
        let m = Matrix::from_integers(&[[2]]).unwrap();
        assert_eq!(permanent_power(&m, 3, &caps()).unwrap(), rational(8));
        assert_eq!(permanent_power(&Matrix::ones(2), 2, &caps()).unwrap(), rational(4));
    }

    #[test]
    fn caps_are_enforced() {
        let c = Caps {
            naive: 3,
            ryser: 3,
            ..Caps::default()
        };
        let m = Matrix::ones(4);
        assert!(matches!(
            permanent_naive(&m, &c),
            Err(Error::SizeCapExceeded { cap: "naive", .. })
        ));
        assert!(matches!(
            permanent_ryser(&m, &c),
            Err(Error::SizeCapExceeded { cap: "ryser", .. })
        ));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            Matrix::from_integers(&[[1, -1], [0, 1]]),
            Err(Error::NegativeEntry { row: 1, col: 2 })
        ));
        assert!(matches!(
            Matrix::new(vec![vec![rational(1)], vec![]]),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(Matrix::new(vec![]), Err(Error::EmptyMatrix)));
    }

    #[test]
    fn zero_row_gives_zero() {
        let m = Matrix::from_integers(&[[1, 2, 3], [0, 0, 0], [4, 5, 6]]).unwrap();
        assert!(permanent_naive(&m, &caps()).unwrap().is_zero());
        assert!(permanent_ryser(&m, &caps()).unwrap().is_zero());
    }

    #[test]
    fn rational_entries() {
        let half = parse_rational("1/2").unwrap();
        let m = Matrix::new(vec![
            vec![half.clone(), parse_rational("2/3").unwrap()],
            vec![parse_rational("3/4").unwrap(), half],
        ])
        .unwrap();
        // 1/4 + 1/2
        assert_eq!(permanent_ryser(&m, &caps()).unwrap(), parse_rational("3/4").unwrap());
        assert_eq!(permanent_naive(&m, &caps()).unwrap(), parse_rational("3/4").unwrap());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("6/4").unwrap(), Rational::new(3.into(), 2.into()));
        assert_eq!(format_rational(&parse_rational("6/4").unwrap()), "3/2");
        assert_eq!(format_rational(&parse_rational(" 7 ").unwrap()), "7");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn permutation_basics() {
        let q = Permutation::from_one_based(vec![3, 1, 2]).unwrap();
        assert_eq!(q.apply(1), 3);
        assert_eq!(q.then(&q.inverse()), Permutation::identity(3));
        assert_eq!(Permutation::cycle(3).one_based(), vec![2, 3, 1]);
        assert!(Permutation::from_one_based(vec![1, 1]).is_err());
        assert!(Permutation::from_one_based(vec![0, 1]).is_err());
        let all: Vec<_> = Permutation::all(3).map(|p| p.one_based()).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![1, 2, 3]);
        assert_eq!(all[1], vec![1, 3, 2]);
        assert_eq!(all[5], vec![3, 2, 1]);
        for (r, p) in Permutation::all(4).enumerate() {
            assert_eq!(Permutation::unrank(4, r as u64), p);
        }
    }

    #[test]
    fn huge_rationals_convert_to_float() {
        let big = Rational::from_integer(BigInt::from(10).pow(400));
        let x = rational_to_f64(&(big.clone() / (big * rational(4))));
        assert!((x - 0.25).abs() < 1e-12);
    }
}
