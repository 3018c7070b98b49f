//! P-liftings of a base matrix: the `mM × mM` matrix whose `(j, l)` block is
//! `θ_jl` times the permutation matrix `P_jl`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{check_cap, Error, Result};
use crate::matrix::{factorial_u64, Matrix, Permutation};

/// An `m × m` array of permutations of `[M]`. Block `(j, l)` maps local row
/// `r` to local column `P_jl(r)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(
    try_from = "crate::json::BlockPermutationWire",
    into = "crate::json::BlockPermutationWire"
)]
pub struct BlockPermutation {
    m: usize,
    degree: usize,
    blocks: Vec<Permutation>,
}

impl BlockPermutation {
    pub fn new(blocks: Vec<Vec<Permutation>>) -> Result<Self> {
        let m = blocks.len();
        if m == 0 {
            return Err(Error::EmptyMatrix);
        }
        let degree = blocks[0].first().map(Permutation::len).unwrap_or(0);
        if degree == 0 {
            return Err(Error::InvalidPermutation("blocks must have size at least 1".into()));
        }
        let mut flat = Vec::with_capacity(m * m);
        for row in blocks {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: row.len(),
                });
            }
            for p in row {
                if p.len() != degree {
                    return Err(Error::DimensionMismatch {
                        expected: degree,
                        found: p.len(),
                    });
                }
                flat.push(p);
            }
        }
        Ok(BlockPermutation {
            m,
            degree,
            blocks: flat,
        })
    }

    /// Every block equal to `q`.
    pub fn uniform(m: usize, q: Permutation) -> Self {
        BlockPermutation {
            m,
            degree: q.len(),
            blocks: vec![q; m * m],
        }
    }

    pub fn identity(m: usize, degree: usize) -> Self {
        Self::uniform(m, Permutation::identity(degree))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The lift degree `M`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Block at 0-based block position `(j, l)`.
    pub fn block(&self, j: usize, l: usize) -> &Permutation {
        &self.blocks[j * self.m + l]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[Permutation]> {
        self.blocks.chunks(self.m)
    }

    /// First block row and first block column are identities.
    pub fn is_reduced(&self) -> bool {
        (0..self.m).all(|i| self.block(0, i).is_identity() && self.block(i, 0).is_identity())
    }

    /// 0-based flat column hit by flat row `(j, r)` inside block column `l`.
    pub(crate) fn column(&self, j: usize, r: usize, l: usize) -> usize {
        l * self.degree + self.block(j, l).as_zero_based()[r]
    }
}

/// Returns the reduced block permutation `P'_ij = P_i1⁻¹ · P_ij · P_1j⁻¹ · P_11`.
///
/// The map only relabels rows within each block row and columns within each
/// block column of the lift, so the lift permanent is unchanged.
pub fn reduce(spec: &BlockPermutation) -> BlockPermutation {
    let m = spec.m;
    let p11 = spec.block(0, 0);
    let mut blocks = Vec::with_capacity(m * m);
    for i in 0..m {
        let left = spec.block(i, 0).inverse();
        for j in 0..m {
            let right = spec.block(0, j).inverse().then(p11);
            blocks.push(left.then(spec.block(i, j)).then(&right));
        }
    }
    BlockPermutation {
        m,
        degree: spec.degree,
        blocks,
    }
}

/// A base matrix, a block permutation, and the resulting flat lift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lift {
    base: Matrix,
    spec: BlockPermutation,
    flat: Matrix,
}

impl Lift {
    pub fn base(&self) -> &Matrix {
        &self.base
    }

    pub fn spec(&self) -> &BlockPermutation {
        &self.spec
    }

    pub fn flat(&self) -> &Matrix {
        &self.flat
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    pub fn degree(&self) -> usize {
        self.spec.degree
    }

    /// `mM`.
    pub fn size(&self) -> usize {
        self.spec.m * self.spec.degree
    }

    /// Whether 0-based `(row, col)` lies on the permutation support of its
    /// block, i.e. holds `θ_jl` rather than a structural zero.
    pub fn is_structural(&self, row: usize, col: usize) -> bool {
        let d = self.spec.degree;
        let (j, r) = (row / d, row % d);
        let l = col / d;
        self.spec.column(j, r, l) == col
    }

    /// Consumes the lift, returning its flat matrix.
    pub fn into_flat(self) -> Matrix {
        self.flat
    }
}

pub fn build_lift(base: &Matrix, spec: &BlockPermutation) -> Result<Lift> {
    if spec.m != base.n() {
        return Err(Error::DimensionMismatch {
            expected: base.n(),
            found: spec.m,
        });
    }
    let (m, d) = (spec.m, spec.degree);
    let mut flat = Matrix::zeros(m * d);
    for j in 0..m {
        for l in 0..m {
            let theta = base.get(j, l);
            for r in 0..d {
                flat.set(j * d + r, spec.column(j, r, l), theta.clone());
            }
        }
    }
    Ok(Lift {
        base: base.clone(),
        spec: spec.clone(),
        flat,
    })
}

/// The lift with every block equal to `q`.
pub fn kron_lift(base: &Matrix, q: &Permutation) -> Lift {
    build_lift(base, &BlockPermutation::uniform(base.n(), q.clone())).expect("uniform spec matches the base size")
}

/// Block permutation with i.i.d. uniform blocks, drawn from the stream
/// `index` of a ChaCha generator seeded with `seed`. With `reduced`, the
/// first block row and column are identities and only the `(m-1)²` free
/// blocks are sampled.
pub fn random_block_perm_indexed(m: usize, degree: usize, seed: u64, index: u64, reduced: bool) -> BlockPermutation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut blocks = Vec::with_capacity(m * m);
    for j in 0..m {
        for l in 0..m {
            let mut image: Vec<usize> = (0..degree).collect();
            if !(reduced && (j == 0 || l == 0)) {
                image.shuffle(&mut rng);
            }
            blocks.push(Permutation::from_zero_based(image).expect("shuffled identity"));
        }
    }
    BlockPermutation { m, degree, blocks }
}

pub fn random_block_perm(m: usize, degree: usize, seed: u64, reduced: bool) -> BlockPermutation {
    random_block_perm_indexed(m, degree, seed, 0, reduced)
}

/// Visits every permutation `τ` of `[mM]` that stays on the support of the
/// lift, as the vector of block columns chosen by each flat row. Rows are
/// filled in order and block columns tried in increasing order, so visits
/// are in lexicographic order of the choice vectors.
pub(crate) fn for_each_support_choice(spec: &BlockPermutation, prefix: &[usize], visit: &mut impl FnMut(&[usize])) {
    let n = spec.m * spec.degree;
    let mut used = vec![false; n];
    let mut choice = Vec::with_capacity(n);
    for (i, &l) in prefix.iter().enumerate() {
        let c = spec.column(i / spec.degree, i % spec.degree, l);
        if used[c] {
            return;
        }
        used[c] = true;
        choice.push(l);
    }
    support_rec(spec, &mut used, &mut choice, visit);
}

fn support_rec(spec: &BlockPermutation, used: &mut [bool], choice: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    let i = choice.len();
    if i == used.len() {
        visit(choice);
        return;
    }
    let (j, r) = (i / spec.degree, i % spec.degree);
    for l in 0..spec.m {
        let c = spec.column(j, r, l);
        if used[c] {
            continue;
        }
        used[c] = true;
        choice.push(l);
        support_rec(spec, used, choice, visit);
        choice.pop();
        used[c] = false;
    }
}

/// Valid support prefixes covering the first `depth` flat rows, in
/// lexicographic order; used to split support enumeration into
/// independent pieces.
pub(crate) fn support_prefixes(spec: &BlockPermutation, depth: usize) -> Vec<Vec<usize>> {
    let depth = depth.min(spec.m * spec.degree);
    let mut out = vec![vec![]];
    for i in 0..depth {
        let (j, r) = (i / spec.degree, i % spec.degree);
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..spec.m).filter_map(move |l| {
                    let c = spec.column(j, r, l);
                    let clash = p
                        .iter()
                        .enumerate()
                        .any(|(i2, &l2)| spec.column(i2 / spec.degree, i2 % spec.degree, l2) == c);
                    (!clash).then(|| {
                        let mut q = p.clone();
                        q.push(l);
                        q
                    })
                })
            })
            .collect();
    }
    out
}

/// Block-column choices of all permutations on the lift support, in
/// lexicographic order.
pub(crate) fn support_choices(spec: &BlockPermutation) -> Vec<Vec<usize>> {
    let prefixes = support_prefixes(spec, 2);
    crate::par::map_vec(prefixes, |p| {
        let mut out = Vec::new();
        for_each_support_choice(spec, &p, &mut |c| out.push(c.to_vec()));
        out
    })
    .into_iter()
    .flatten()
    .collect()
}

impl BlockPermutation {
    /// The flat permutation `τ` taking row `(j, r)` to the support column of
    /// block `(j, choice[jM + r])`.
    pub(crate) fn permutation_from_choice(&self, choice: &[usize]) -> Permutation {
        let image = choice
            .iter()
            .enumerate()
            .map(|(i, &l)| self.column(i / self.degree, i % self.degree, l))
            .collect();
        Permutation::from_zero_based(image).expect("support choice is a permutation")
    }
}

impl BlockPermutation {
    /// The permutation of `[mM]` sending flat row `(j, r)` into block column
    /// `cols[jM + r]` (0-based) along the support of that block.
    pub fn tau_from_block_columns(&self, cols: &[usize]) -> Result<Permutation> {
        let n = self.m * self.degree;
        if cols.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: cols.len(),
            });
        }
        if let Some(&l) = cols.iter().find(|&&l| l >= self.m) {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: l + 1,
            });
        }
        let image = cols
            .iter()
            .enumerate()
            .map(|(i, &l)| self.column(i / self.degree, i % self.degree, l))
            .collect();
        Permutation::from_zero_based(image)
    }
}

/// Every permutation of `[mM]` whose permanent-product is not trivially
/// zero, in lexicographic order of block-column choices.
pub fn support_permutations(spec: &BlockPermutation) -> Vec<Permutation> {
    support_choices(spec)
        .iter()
        .map(|c| spec.permutation_from_choice(c))
        .collect()
}

/// `base^exp`, or `None` on overflow.
fn checked_count(base: u64, exp: usize) -> Option<u64> {
    (0..exp).try_fold(1u64, |acc, _| acc.checked_mul(base))
}

/// Lexicographically ordered enumeration of block permutations whose
/// `free` block positions range over all of S_M and whose other blocks are
/// identities. Indexable, so disjoint index ranges can be processed
/// independently.
#[derive(Debug, Clone)]
pub struct SpecEnumeration {
    m: usize,
    degree: usize,
    free: Vec<(usize, usize)>,
    count: u64,
}

impl SpecEnumeration {
    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// The spec at position `index` (0-based).
    pub fn get(&self, index: u64) -> BlockPermutation {
        assert!(index < self.count, "spec index out of range");
        let radix = factorial_u64(self.degree);
        let mut blocks = vec![Permutation::identity(self.degree); self.m * self.m];
        let mut rest = index;
        for &(j, l) in self.free.iter().rev() {
            blocks[j * self.m + l] = Permutation::unrank(self.degree, rest % radix);
            rest /= radix;
        }
        BlockPermutation {
            m: self.m,
            degree: self.degree,
            blocks,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = BlockPermutation> + '_ {
        (0..self.count).map(move |i| self.get(i))
    }
}

/// All reduced block permutations, each exactly once, in lexicographic order
/// of the free blocks' image arrays (row-major over the free blocks).
pub fn enumerate_reduced(m: usize, degree: usize, caps: &Caps) -> Result<SpecEnumeration> {
    let free: Vec<_> = (1..m).flat_map(|j| (1..m).map(move |l| (j, l))).collect();
    enumeration(m, degree, free, "reduced-specs", caps.reduced_specs)
}

/// All `(M!)^(m²)` block permutations.
pub fn enumerate_all(m: usize, degree: usize, caps: &Caps) -> Result<SpecEnumeration> {
    let free: Vec<_> = (0..m).flat_map(|j| (0..m).map(move |l| (j, l))).collect();
    enumeration(m, degree, free, "full-specs", caps.full_specs)
}

fn enumeration(
    m: usize,
    degree: usize,
    free: Vec<(usize, usize)>,
    cap: &'static str,
    limit: u64,
) -> Result<SpecEnumeration> {
    let count = checked_count(factorial_u64(degree), free.len()).unwrap_or(u64::MAX);
    check_cap(cap, count, limit)?;
    Ok(SpecEnumeration { m, degree, free, count })
}
