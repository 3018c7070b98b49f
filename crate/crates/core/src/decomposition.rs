//! Exponent matrices of permanent-products, their decompositions into sums
//! of permutation matrices, and the standard mapping from permanent-products
//! of a reduced lift to words of `M` base permanent-products.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{check_cap, Error, Result};
use crate::lifting::{support_choices, BlockPermutation, Lift};
use crate::matrix::Permutation;

/// Non-negative integer `m × m` matrix with every row and column summing to
/// the same degree `M ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u32>>", into = "Vec<Vec<u32>>")]
pub struct ExponentMatrix {
    m: usize,
    degree: usize,
    cells: Vec<u32>,
}

impl ExponentMatrix {
    /// Validates the line sums; the degree is read off the first row.
    pub fn new(rows: Vec<Vec<u32>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::EmptyMatrix);
        }
        let degree: u64 = rows[0].iter().map(|&x| x as u64).sum();
        Self::with_degree(rows, degree as usize)
    }

    pub fn with_degree(rows: Vec<Vec<u32>>, degree: usize) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::EmptyMatrix);
        }
        if degree == 0 {
            return Err(Error::InvalidExponentMatrix("degree must be at least 1".into()));
        }
        let mut cells = Vec::with_capacity(m * m);
        let mut col_sums = vec![0u64; m];
        for (j, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::NotSquare {
                    row: j + 1,
                    len: row.len(),
                    expected: m,
                });
            }
            let sum: u64 = row.iter().map(|&x| x as u64).sum();
            if sum != degree as u64 {
                return Err(Error::InvalidExponentMatrix(format!(
                    "row {} sums to {sum}, expected {degree}",
                    j + 1
                )));
            }
            for (l, x) in row.into_iter().enumerate() {
                col_sums[l] += x as u64;
                cells.push(x);
            }
        }
        if let Some(l) = col_sums.iter().position(|&s| s != degree as u64) {
            return Err(Error::InvalidExponentMatrix(format!(
                "column {} sums to {}, expected {degree}",
                l + 1,
                col_sums[l]
            )));
        }
        Ok(ExponentMatrix { m, degree, cells })
    }

    /// `Σ t_σ P_σ` over the given terms.
    pub fn from_terms<'a>(m: usize, terms: impl IntoIterator<Item = (&'a Permutation, u32)>) -> Result<Self> {
        let mut rows = vec![vec![0u32; m]; m];
        let mut degree = 0usize;
        for (sigma, t) in terms {
            if sigma.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: sigma.len(),
                });
            }
            for (j, &l) in sigma.as_zero_based().iter().enumerate() {
                rows[j][l] += t;
            }
            degree += t as usize;
        }
        Self::with_degree(rows, degree)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Exponent at 0-based `(j, l)`.
    pub fn get(&self, j: usize, l: usize) -> u32 {
        self.cells[j * self.m + l]
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.cells.chunks(self.m).map(<[u32]>::to_vec).collect()
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    /// Whether `σ` stays on the nonzero cells.
    pub fn covers(&self, sigma: &Permutation) -> bool {
        sigma
            .as_zero_based()
            .iter()
            .enumerate()
            .all(|(j, &l)| self.get(j, l) > 0)
    }
}

impl fmt::Display for ExponentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.cells.chunks(self.m) {
            let parts: Vec<String> = row.iter().map(u32::to_string).collect();
            writeln!(f, "{}", parts.join(" "))?;
        }
        Ok(())
    }
}

/// The index sets behind an exponent matrix: cell `(j, l)` lists the local
/// rows `k ∈ [M]` (1-based, ascending) of block row `j` routed to block
/// column `l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Vec<usize>>>", into = "Vec<Vec<Vec<usize>>>")]
pub struct AlphaMatrix {
    m: usize,
    degree: usize,
    cells: Vec<Vec<usize>>,
}

impl AlphaMatrix {
    /// Each block row's cells must partition `[M]`, with cells listed in
    /// ascending order, and each block column must receive `M` indices.
    pub fn new(rows: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::EmptyMatrix);
        }
        let degree: usize = rows[0].iter().map(Vec::len).sum();
        let mut cells = Vec::with_capacity(m * m);
        for (j, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::NotSquare {
                    row: j + 1,
                    len: row.len(),
                    expected: m,
                });
            }
            let mut seen = vec![false; degree];
            for cell in row {
                if cell.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidExponentMatrix(format!(
                        "index sets in block row {} must be strictly increasing",
                        j + 1
                    )));
                }
                for &k in &cell {
                    if k == 0 || k > degree || std::mem::replace(&mut seen[k - 1], true) {
                        return Err(Error::InvalidExponentMatrix(format!(
                            "block row {} does not partition 1..{degree}",
                            j + 1
                        )));
                    }
                }
                cells.push(cell);
            }
            if seen.iter().any(|&s| !s) {
                return Err(Error::InvalidExponentMatrix(format!(
                    "block row {} does not partition 1..{degree}",
                    j + 1
                )));
            }
        }
        let alpha = AlphaMatrix { m, degree, cells };
        let sizes = alpha
            .cells
            .chunks(m)
            .map(|r| r.iter().map(|c| c.len() as u32).collect())
            .collect();
        ExponentMatrix::with_degree(sizes, degree)?;
        Ok(alpha)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn cell(&self, j: usize, l: usize) -> &[usize] {
        &self.cells[j * self.m + l]
    }

    pub fn rows(&self) -> Vec<Vec<Vec<usize>>> {
        self.cells.chunks(self.m).map(<[Vec<usize>]>::to_vec).collect()
    }

    /// Cardinalities, which form the exponent matrix.
    pub fn exponent_matrix(&self) -> ExponentMatrix {
        let rows = self
            .cells
            .chunks(self.m)
            .map(|r| r.iter().map(|c| c.len() as u32).collect())
            .collect();
        ExponentMatrix::with_degree(rows, self.degree).expect("cells partition each row and column")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DecompositionTerm {
    pub sigma: Permutation,
    pub t: u32,
}

/// `R = Σ t_σ P_σ` with positive multiplicities, terms sorted by `σ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<DecompositionTerm>", into = "Vec<DecompositionTerm>")]
pub struct Decomposition {
    terms: Vec<DecompositionTerm>,
}

impl Decomposition {
    /// Sorts the terms, merges repeated permutations and drops zero terms.
    pub fn new(terms: impl IntoIterator<Item = (Permutation, u32)>) -> Self {
        let mut merged: BTreeMap<Permutation, u32> = BTreeMap::new();
        for (sigma, t) in terms {
            *merged.entry(sigma).or_default() += t;
        }
        Decomposition {
            terms: merged
                .into_iter()
                .filter(|&(_, t)| t > 0)
                .map(|(sigma, t)| DecompositionTerm { sigma, t })
                .collect(),
        }
    }

    pub fn terms(&self) -> &[DecompositionTerm] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.t as usize).sum()
    }

    pub fn to_exponent_matrix(&self, m: usize) -> Result<ExponentMatrix> {
        ExponentMatrix::from_terms(m, self.terms.iter().map(|t| (&t.sigma, t.t)))
    }

    /// Number of ordered words of length `M` using each `σ` exactly `t_σ`
    /// times: `M! / Π t_σ!`.
    pub fn arrangements(&self) -> BigUint {
        let ts: Vec<u32> = self.terms.iter().map(|t| t.t).collect();
        multinomial(&ts)
    }
}

/// `(Σ k_i)! / Π k_i!`.
pub fn multinomial(parts: &[u32]) -> BigUint {
    let mut out = BigUint::one();
    let mut total = 0u64;
    for &k in parts {
        // Multiply by C(total + k, k) one factor at a time; each prefix
        // quotient is itself a binomial coefficient, so division is exact.
        for i in 1..=k as u64 {
            total += 1;
            out = out * BigUint::from(total) / BigUint::from(i);
        }
    }
    out
}

/// Block column chosen by each flat row of `τ`, or the 1-based first row
/// that leaves the support.
fn block_choice(lift: &Lift, tau: &Permutation) -> Result<Vec<usize>> {
    if tau.len() != lift.size() {
        return Err(Error::DimensionMismatch {
            expected: lift.size(),
            found: tau.len(),
        });
    }
    let d = lift.degree();
    tau.as_zero_based()
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if lift.is_structural(i, c) {
                Ok(c / d)
            } else {
                Err(Error::TriviallyZero { index: i + 1 })
            }
        })
        .collect()
}

fn alpha_from_choice(m: usize, degree: usize, choice: &[usize]) -> AlphaMatrix {
    let mut cells = vec![Vec::new(); m * m];
    for (i, &l) in choice.iter().enumerate() {
        cells[(i / degree) * m + l].push(i % degree + 1);
    }
    AlphaMatrix { m, degree, cells }
}

fn exponent_from_choice(m: usize, degree: usize, choice: &[usize]) -> ExponentMatrix {
    let mut cells = vec![0u32; m * m];
    for (i, &l) in choice.iter().enumerate() {
        cells[(i / degree) * m + l] += 1;
    }
    ExponentMatrix { m, degree, cells }
}

/// The exponent matrix of the permanent-product of `τ` in the lift.
pub fn exponent_matrix(lift: &Lift, tau: &Permutation) -> Result<ExponentMatrix> {
    let choice = block_choice(lift, tau)?;
    Ok(exponent_from_choice(lift.m(), lift.degree(), &choice))
}

pub fn alpha_matrix(lift: &Lift, tau: &Permutation) -> Result<AlphaMatrix> {
    let choice = block_choice(lift, tau)?;
    Ok(alpha_from_choice(lift.m(), lift.degree(), &choice))
}

/// One pass over `S_m` in lexicographic order, subtracting from the residual
/// as many copies of each permutation as its support allows.
pub fn birkhoff_pass(r: &ExponentMatrix, caps: &Caps) -> Result<Decomposition> {
    check_cap("birkhoff", r.m as u64, caps.birkhoff as u64)?;
    let m = r.m;
    let mut residual = r.cells.clone();
    let mut terms = Vec::new();
    for sigma in Permutation::all(m) {
        let t = sigma
            .as_zero_based()
            .iter()
            .enumerate()
            .map(|(j, &l)| residual[j * m + l])
            .min()
            .unwrap_or(0);
        if t > 0 {
            for (j, &l) in sigma.as_zero_based().iter().enumerate() {
                residual[j * m + l] -= t;
            }
            terms.push((sigma, t));
        }
    }
    if residual.iter().any(|&x| x != 0) {
        return Err(Error::InternalNonzeroResidual);
    }
    Ok(Decomposition::new(terms))
}

/// Every decomposition of `R` into permutation matrices with positive
/// integer multiplicities, sorted.
pub fn all_decompositions(r: &ExponentMatrix, caps: &Caps) -> Result<Vec<Decomposition>> {
    check_cap("alldecomp-m", r.m as u64, caps.alldecomp_m as u64)?;
    check_cap("alldecomp-degree", r.degree as u64, caps.alldecomp_degree as u64)?;
    let m = r.m;
    let perms: Vec<Permutation> = Permutation::all(m).filter(|s| r.covers(s)).collect();
    // last_cover[cell] = last index in `perms` touching the cell, so a
    // residual left in a cell past that index can never be cleared.
    let mut last_cover = vec![None; m * m];
    for (idx, s) in perms.iter().enumerate() {
        for (j, &l) in s.as_zero_based().iter().enumerate() {
            last_cover[j * m + l] = Some(idx);
        }
    }
    let mut search = DecompSearch {
        m,
        perms: &perms,
        last_cover: &last_cover,
        residual: r.cells.clone(),
        stack: Vec::new(),
        out: Vec::new(),
    };
    search.run(0, r.degree as u32);
    let mut out = search.out;
    out.sort();
    Ok(out)
}

struct DecompSearch<'a> {
    m: usize,
    perms: &'a [Permutation],
    last_cover: &'a [Option<usize>],
    residual: Vec<u32>,
    stack: Vec<(Permutation, u32)>,
    out: Vec<Decomposition>,
}

impl DecompSearch<'_> {
    fn run(&mut self, idx: usize, remaining: u32) {
        if remaining == 0 {
            self.out.push(Decomposition::new(self.stack.iter().cloned()));
            return;
        }
        if idx == self.perms.len() {
            return;
        }
        let stuck = self
            .residual
            .iter()
            .zip(self.last_cover)
            .any(|(&x, lc)| x > 0 && lc.is_none_or(|c| c < idx));
        if stuck {
            return;
        }
        let m = self.m;
        let sigma = &self.perms[idx];
        let cells: Vec<usize> = sigma
            .as_zero_based()
            .iter()
            .enumerate()
            .map(|(j, &l)| j * m + l)
            .collect();
        let tmax = cells.iter().map(|&c| self.residual[c]).min().unwrap_or(0);
        for t in (0..=tmax).rev() {
            for &c in &cells {
                self.residual[c] -= t;
            }
            if t > 0 {
                self.stack.push((sigma.clone(), t));
            }
            self.run(idx + 1, remaining - t);
            if t > 0 {
                self.stack.pop();
            }
            for &c in &cells {
                self.residual[c] += t;
            }
        }
    }
}

/// The entries `(j, k)`, `j ∈ [m]`, of a permanent-product sharing the local
/// row index `k`, with the block column each one uses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SameIndexProduct {
    /// Local row index, 1-based.
    #[serde(rename = "k")]
    pub index: usize,
    /// Block column picked by each block row, 1-based.
    pub col_of: Vec<usize>,
    /// Whether `col_of` is a permutation, i.e. the product is a base
    /// permanent-product.
    pub legal: bool,
}

impl SameIndexProduct {
    /// The 1-based block row whose entry lies in block column 1.
    pub fn anchor(&self) -> usize {
        self.col_of.iter().position(|&l| l == 1).map(|j| j + 1).unwrap_or(0)
    }

    pub fn sigma(&self) -> Option<Permutation> {
        if self.legal {
            Permutation::from_one_based(self.col_of.clone()).ok()
        } else {
            None
        }
    }
}

fn same_index_from_choice(m: usize, degree: usize, choice: &[usize]) -> Vec<SameIndexProduct> {
    (0..degree)
        .map(|k| {
            let col_of: Vec<usize> = (0..m).map(|j| choice[j * degree + k] + 1).collect();
            let mut seen = vec![false; m];
            let legal = col_of.iter().all(|&l| !std::mem::replace(&mut seen[l - 1], true));
            SameIndexProduct {
                index: k + 1,
                col_of,
                legal,
            }
        })
        .collect()
}

/// Splits the permanent-product of `τ` into the `M` products of entries with
/// equal local row index. Requires a reduced lift.
pub fn same_index_decompose(lift: &Lift, tau: &Permutation) -> Result<Vec<SameIndexProduct>> {
    if !lift.spec().is_reduced() {
        return Err(Error::NotReduced);
    }
    let choice = block_choice(lift, tau)?;
    Ok(same_index_from_choice(lift.m(), lift.degree(), &choice))
}

/// An ordered word of `M` base permanent-products, one per local index `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<crate::json::WordEntry>", into = "Vec<crate::json::WordEntry>")]
pub struct ThetaProductWord {
    sigmas: Vec<Permutation>,
}

impl ThetaProductWord {
    /// `sigmas[k-1]` is the product used at local index `k`.
    pub fn new(sigmas: Vec<Permutation>) -> Result<Self> {
        let m = sigmas.first().map(Permutation::len).ok_or(Error::EmptyMatrix)?;
        if let Some(s) = sigmas.iter().find(|s| s.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: s.len(),
            });
        }
        Ok(ThetaProductWord { sigmas })
    }

    pub fn sigmas(&self) -> &[Permutation] {
        &self.sigmas
    }

    pub fn m(&self) -> usize {
        self.sigmas[0].len()
    }

    pub fn degree(&self) -> usize {
        self.sigmas.len()
    }

    pub fn exponent_matrix(&self) -> ExponentMatrix {
        ExponentMatrix::from_terms(self.m(), self.sigmas.iter().map(|s| (s, 1)))
            .expect("a word of permutations has constant line sums")
    }

    /// Block columns in canonical entry order: for each `k`, the entry in
    /// block column 1 first, then the remaining rows ascending.
    fn entry_sequence(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.m() * self.degree());
        for s in &self.sigmas {
            push_entries(&mut out, s.as_zero_based());
        }
        out
    }

    /// Whether the word is the image of some permanent-product of the lift:
    /// the flat columns `(σ_k(j), P_{j σ_k(j)}(k))` must be pairwise distinct.
    pub fn is_realizable(&self, spec: &BlockPermutation) -> bool {
        let mut seen = BTreeSet::new();
        self.sigmas.iter().enumerate().all(|(k, s)| {
            s.as_zero_based()
                .iter()
                .enumerate()
                .all(|(j, &l)| seen.insert(spec.column(j, k, l)))
        })
    }
}

fn push_entries(out: &mut Vec<usize>, col_of: &[usize]) {
    let anchor = col_of.iter().position(|&l| l == 0).unwrap_or(0);
    out.push(col_of[anchor]);
    out.extend(col_of.iter().enumerate().filter(|&(j, _)| j != anchor).map(|(_, &l)| l));
}

/// The candidate list and chosen image behind one application of the
/// standard mapping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingTrace {
    pub same_index: Vec<SameIndexProduct>,
    /// All words with the same exponent matrix whose product at each `k`
    /// puts the same block row in block column 1, in canonical order.
    pub candidates: Vec<ThetaProductWord>,
    pub target: ThetaProductWord,
}

/// Maps a permanent-product of a reduced lift to a word of `M` base
/// permanent-products with the same exponent matrix.
pub fn standard_mapping(lift: &Lift, tau: &Permutation, caps: &Caps) -> Result<ThetaProductWord> {
    Ok(standard_mapping_trace(lift, tau, caps)?.target)
}

pub fn standard_mapping_trace(lift: &Lift, tau: &Permutation, caps: &Caps) -> Result<MappingTrace> {
    if !lift.spec().is_reduced() {
        return Err(Error::NotReduced);
    }
    let choice = block_choice(lift, tau)?;
    let mut cache = BTreeMap::new();
    map_choice(lift.m(), lift.degree(), &choice, caps, &mut cache)
}

type DecompCache = BTreeMap<ExponentMatrix, Vec<Decomposition>>;

fn map_choice(m: usize, degree: usize, choice: &[usize], caps: &Caps, cache: &mut DecompCache) -> Result<MappingTrace> {
    let same_index = same_index_from_choice(m, degree, choice);
    let r = exponent_from_choice(m, degree, choice);
    let anchors: Vec<usize> = same_index.iter().map(|p| p.anchor() - 1).collect();
    if !cache.contains_key(&r) {
        let decomps = all_decompositions(&r, caps)?;
        cache.insert(r.clone(), decomps);
    }
    let mut words = BTreeSet::new();
    for d in &cache[&r] {
        let mut counts: Vec<u32> = d.terms.iter().map(|t| t.t).collect();
        let mut slots = Vec::with_capacity(degree);
        fill_slots(d, &anchors, &mut counts, &mut slots, &mut words);
    }

    // Canonical order: compare block columns position by position.
    let mut keyed: Vec<(Vec<usize>, ThetaProductWord)> = words
        .into_iter()
        .map(|sigmas| {
            let w = ThetaProductWord { sigmas };
            (w.entry_sequence(), w)
        })
        .collect();
    keyed.sort();
    if keyed.is_empty() {
        return Err(Error::EmptyCandidateList);
    }

    let mut own = Vec::with_capacity(m * degree);
    for p in &same_index {
        let cols: Vec<usize> = p.col_of.iter().map(|&l| l - 1).collect();
        push_entries(&mut own, &cols);
    }

    // Narrow to the candidates agreeing with the product at each position,
    // skipping positions where none or all of the survivors agree.
    let mut live: Vec<usize> = (0..keyed.len()).collect();
    for (pos, &want) in own.iter().enumerate() {
        if live.len() == 1 {
            break;
        }
        let agree: Vec<usize> = live.iter().copied().filter(|&c| keyed[c].0[pos] == want).collect();
        if !agree.is_empty() && agree.len() < live.len() {
            live = agree;
        }
    }
    let target = keyed[live[0]].1.clone();
    Ok(MappingTrace {
        same_index,
        candidates: keyed.into_iter().map(|(_, w)| w).collect(),
        target,
    })
}

/// Distributes the multiset of a decomposition over the `M` slots so that
/// the product at slot `k` sends its anchor row to block column 1.
fn fill_slots(
    d: &Decomposition,
    anchors: &[usize],
    counts: &mut [u32],
    slots: &mut Vec<Permutation>,
    out: &mut BTreeSet<Vec<Permutation>>,
) {
    let k = slots.len();
    if k == anchors.len() {
        out.insert(slots.clone());
        return;
    }
    for (i, term) in d.terms.iter().enumerate() {
        if counts[i] == 0 || term.sigma.as_zero_based()[anchors[k]] != 0 {
            continue;
        }
        counts[i] -= 1;
        slots.push(term.sigma.clone());
        fill_slots(d, anchors, counts, slots, out);
        slots.pop();
        counts[i] += 1;
    }
}

/// Two or more permanent-products mapped to the same word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collision {
    pub target: ThetaProductWord,
    pub sources: Vec<Permutation>,
}

/// A permanent-product that is itself a word of base products (every
/// same-index product legal) yet is the image of some other product.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IllegalTarget {
    pub target: ThetaProductWord,
    pub sources: Vec<Permutation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub total_products: usize,
    pub mapped_targets: usize,
    pub collisions: Vec<Collision>,
    /// Realizable all-legal words hit by a product with an illegal factor.
    pub illegal_targets_that_are_products: Vec<IllegalTarget>,
}

impl InjectivityReport {
    pub fn is_injective(&self) -> bool {
        self.collisions.is_empty() && self.illegal_targets_that_are_products.is_empty()
    }
}

/// Applies the standard mapping to every permanent-product of the reduced
/// lift and reports collisions.
pub fn verify_injectivity(lift: &Lift, caps: &Caps) -> Result<InjectivityReport> {
    let spec = lift.spec();
    if !spec.is_reduced() {
        return Err(Error::NotReduced);
    }
    let (m, degree) = (spec.m(), spec.degree());
    check_cap("inject", (m * degree) as u64, caps.inject as u64)?;
    let choices = support_choices(spec);
    let mapped = crate::par::map_vec(choices, |choice| {
        let mut cache = BTreeMap::new();
        map_choice(m, degree, &choice, caps, &mut cache).map(|t| {
            let all_legal = t.same_index.iter().all(|p| p.legal);
            (spec.permutation_from_choice(&choice), t.target, all_legal)
        })
    });

    let mut by_target: BTreeMap<ThetaProductWord, Vec<Permutation>> = BTreeMap::new();
    let mut legal_words = BTreeSet::new();
    let total = mapped.len();
    for item in mapped {
        let (tau, target, all_legal) = item?;
        if all_legal {
            legal_words.insert(target.clone());
        }
        by_target.entry(target).or_default().push(tau);
    }

    let mut collisions = Vec::new();
    let mut illegal = Vec::new();
    for (target, sources) in &by_target {
        if sources.len() > 1 {
            collisions.push(Collision {
                target: target.clone(),
                sources: sources.clone(),
            });
        } else if legal_words.contains(target) {
            continue;
        } else if target.is_realizable(spec) {
            // An all-legal product maps to its own word, so a realizable
            // word reached only from an illegal product shadows a product.
            illegal.push(IllegalTarget {
                target: target.clone(),
                sources: sources.clone(),
            });
        }
    }
    Ok(InjectivityReport {
        total_products: total,
        mapped_targets: by_target.len(),
        collisions,
        illegal_targets_that_are_products: illegal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::{build_lift, enumerate_reduced};
    use crate::matrix::Matrix;

    fn p(v: &[usize]) -> Permutation {
        Permutation::from_one_based(v.to_vec()).unwrap()
    }

    fn em(rows: &[&[u32]]) -> ExponentMatrix {
        ExponentMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn lift_from_blocks(blocks: Vec<Vec<Vec<usize>>>) -> Lift {
        let m = blocks.len();
        let spec = BlockPermutation::new(
            blocks
                .into_iter()
                .map(|r| r.into_iter().map(|b| p(&b)).collect())
                .collect(),
        )
        .unwrap();
        build_lift(&Matrix::ones(m), &spec).unwrap()
    }

    /// Flat permutation from 0-based block columns per flat row.
    fn tau_from_choice(lift: &Lift, choice: &[usize]) -> Permutation {
        lift.spec().permutation_from_choice(choice)
    }

    #[test]
    fn exponent_matrix_validation() {
        assert!(ExponentMatrix::new(vec![vec![1, 0], vec![0, 2]]).is_err());
        assert!(ExponentMatrix::new(vec![vec![2, 0], vec![1, 1]]).is_err());
        assert!(ExponentMatrix::new(vec![vec![0, 0], vec![0, 0]]).is_err());
        assert_eq!(em(&[&[1, 2], &[2, 1]]).degree(), 3);
    }

    #[test]
    fn multinomials() {
        assert_eq!(multinomial(&[3, 2, 2]), BigUint::from(210u32));
        assert_eq!(multinomial(&[2, 1, 2, 2]), BigUint::from(630u32));
        assert_eq!(multinomial(&[1, 2, 1, 1, 1, 1]), BigUint::from(2520u32));
        assert_eq!(multinomial(&[]), BigUint::one());
    }

    #[test]
    fn single_pass_unique_decomposition() {
        let r = em(&[&[3, 2, 2], &[0, 3, 4], &[4, 2, 1]]);
        let d = birkhoff_pass(&r, &Caps::default()).unwrap();
        let want = Decomposition::new([
            (p(&[1, 2, 3]), 1),
            (p(&[2, 3, 1]), 2),
            (p(&[3, 2, 1]), 2),
            (p(&[1, 3, 2]), 2),
        ]);
        assert_eq!(d, want);
        assert_eq!(all_decompositions(&r, &Caps::default()).unwrap(), vec![want]);
    }

    #[test]
    fn three_decompositions() {
        let r = em(&[&[3, 2, 2], &[2, 3, 2], &[2, 2, 3]]);
        let (aei, afh, bdi, bfg, cdh, ceg) = (
            p(&[1, 2, 3]),
            p(&[1, 3, 2]),
            p(&[2, 1, 3]),
            p(&[2, 3, 1]),
            p(&[3, 1, 2]),
            p(&[3, 2, 1]),
        );
        let mut want = vec![
            Decomposition::new([(aei.clone(), 3), (bfg.clone(), 2), (cdh.clone(), 2)]),
            Decomposition::new([(afh.clone(), 2), (aei.clone(), 1), (ceg.clone(), 2), (bdi.clone(), 2)]),
            Decomposition::new([(afh, 1), (aei, 2), (ceg, 1), (bdi, 1), (bfg, 1), (cdh, 1)]),
        ];
        want.sort();
        let got = all_decompositions(&r, &Caps::default()).unwrap();
        assert_eq!(got, want);
        let total: BigUint = got.iter().map(Decomposition::arrangements).sum();
        assert_eq!(total, BigUint::from(3360u32));
        assert!(got.contains(&birkhoff_pass(&r, &Caps::default()).unwrap()));
    }

    #[test]
    fn caps_enforced() {
        let r = ExponentMatrix::from_terms(8, [(&Permutation::identity(8), 1)]).unwrap();
        let err = birkhoff_pass(&r, &Caps::default()).unwrap_err();
        assert!(matches!(err, Error::SizeCapExceeded { cap: "birkhoff", .. }));
        let r = ExponentMatrix::from_terms(2, [(&Permutation::identity(2), 13)]).unwrap();
        let err = all_decompositions(&r, &Caps::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::SizeCapExceeded {
                cap: "alldecomp-degree",
                ..
            }
        ));
    }

    fn example4() -> Lift {
        let (i, q, q2) = (vec![1, 2, 3], vec![3, 1, 2], vec![2, 3, 1]);
        lift_from_blocks(vec![
            vec![i.clone(), i.clone(), i.clone()],
            vec![i.clone(), q.clone(), q2.clone()],
            vec![i.clone(), i, q2],
        ])
    }

    #[test]
    fn exponent_and_alpha_of_a_lift_product() {
        let lift = example4();
        let tau = tau_from_choice(&lift, &[0, 1, 0, 2, 0, 2, 1, 2, 1]);
        assert_eq!(
            exponent_matrix(&lift, &tau).unwrap(),
            em(&[&[2, 1, 0], &[1, 0, 2], &[0, 2, 1]])
        );
        let alpha = alpha_matrix(&lift, &tau).unwrap();
        let want: Vec<Vec<Vec<usize>>> = vec![
            vec![vec![1, 3], vec![2], vec![]],
            vec![vec![2], vec![], vec![1, 3]],
            vec![vec![], vec![1, 3], vec![2]],
        ];
        assert_eq!(alpha.rows(), want);
        assert_eq!(alpha.exponent_matrix(), exponent_matrix(&lift, &tau).unwrap());
    }

    #[test]
    fn off_support_is_trivially_zero() {
        let lift = example4();
        // Row 2 (0-based 1) of block row 1 sits at column 2 of block (1,1);
        // sending it to column 1 leaves the support.
        let mut image: Vec<usize> = (0..9).collect();
        image.swap(0, 1);
        let tau = Permutation::from_zero_based(image).unwrap();
        assert_eq!(
            exponent_matrix(&lift, &tau).unwrap_err(),
            Error::TriviallyZero { index: 1 }
        );
    }

    #[test]
    fn same_index_requires_reduced() {
        let lift = lift_from_blocks(vec![vec![vec![2, 1], vec![1, 2]], vec![vec![1, 2], vec![1, 2]]]);
        let tau = Permutation::identity(4);
        assert_eq!(same_index_decompose(&lift, &tau).unwrap_err(), Error::NotReduced);
    }

    #[test]
    fn legal_products_map_to_themselves() {
        let lift = example4();
        let caps = Caps::default();
        for choice in support_choices(lift.spec()) {
            let tau = tau_from_choice(&lift, &choice);
            let parts = same_index_decompose(&lift, &tau).unwrap();
            let target = standard_mapping(&lift, &tau, &caps).unwrap();
            assert_eq!(target.exponent_matrix(), exponent_matrix(&lift, &tau).unwrap());
            if parts.iter().all(|p| p.legal) {
                let own: Vec<Permutation> = parts.iter().map(|p| p.sigma().unwrap()).collect();
                assert_eq!(target.sigmas(), own.as_slice());
                assert!(target.is_realizable(lift.spec()));
            }
        }
    }

    #[test]
    fn anchors_are_unique_in_reduced_lifts() {
        let lift = example4();
        for choice in support_choices(lift.spec()) {
            let tau = tau_from_choice(&lift, &choice);
            for part in same_index_decompose(&lift, &tau).unwrap() {
                assert_eq!(part.col_of.iter().filter(|&&l| l == 1).count(), 1);
            }
        }
    }

    #[test]
    fn small_reduced_lifts_are_injective() {
        let caps = Caps::default();
        let lift = example4();
        let report = verify_injectivity(&lift, &caps).unwrap();
        assert_eq!(report.total_products, 54);
        assert!(report.is_injective());
        for spec in enumerate_reduced(3, 2, &caps).unwrap().iter() {
            assert!(verify_injectivity(&build_lift(&Matrix::ones(3), &spec).unwrap(), &caps)
                .unwrap()
                .is_injective());
        }
    }

    #[test]
    fn mapping_can_collide_at_three_by_three() {
        // A reduced 3×3 lift of degree 3 where an illegal product is sent to
        // the word of a legal one.
        let i = vec![1, 2, 3];
        let lift = lift_from_blocks(vec![
            vec![i.clone(), i.clone(), i.clone()],
            vec![i.clone(), vec![2, 1, 3], vec![2, 1, 3]],
            vec![i, vec![2, 3, 1], vec![1, 3, 2]],
        ]);
        let caps = Caps::default();
        let illegal = tau_from_choice(&lift, &[1, 2, 2, 0, 2, 1, 1, 0, 0]);
        let legal = tau_from_choice(&lift, &[2, 2, 1, 0, 1, 2, 1, 0, 0]);
        assert!(same_index_decompose(&lift, &legal).unwrap().iter().all(|p| p.legal));
        assert!(!same_index_decompose(&lift, &illegal).unwrap().iter().all(|p| p.legal));
        assert_eq!(
            standard_mapping(&lift, &illegal, &caps).unwrap(),
            standard_mapping(&lift, &legal, &caps).unwrap()
        );
        assert!(!verify_injectivity(&lift, &caps).unwrap().is_injective());
    }
}
