//! Degree-M Bethe permanent: the average lift permanent over block
//! permutations, by exact enumeration of reduced specs or by seeded sampling.

use std::ops::Range;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{check_cap, Result};
use crate::lifting::{build_lift, enumerate_all, enumerate_reduced, random_block_perm_indexed, BlockPermutation};
use crate::matrix::{ln_bigint, permanent, permanent_power, rational_to_f64, Matrix, Rational};
use crate::par::{chunk_ranges, default_chunks, map_vec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetheMode {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheReport {
    pub m: usize,
    #[serde(rename = "M")]
    pub degree: usize,
    pub mode: BetheMode,
    /// Exact mean of the lift permanents.
    #[serde(with = "crate::json::rational_string")]
    pub mean_perm: Rational,
    #[serde(with = "crate::json::rational_string")]
    pub perm_theta: Rational,
    #[serde(rename = "perm_theta_pow_M", with = "crate::json::rational_string")]
    pub perm_theta_pow_m: Rational,
    /// `mean_perm^(1/M)`, for display only.
    pub bethe_value: f64,
    /// `mean_perm ≤ perm(θ)^M`, decided exactly.
    pub bound_holds: bool,
    pub samples: u64,
    pub seed: Option<u64>,
    /// Sample standard deviation of the lift permanents.
    pub std_dev: String,
    #[serde(with = "crate::json::rational_string")]
    pub max_perm: Rational,
    /// Lifts whose permanent exceeds `perm(θ)^M`.
    pub lifts_over_bound: u64,
}

/// Running totals over a range of lifts, exact.
#[derive(Debug, Clone)]
struct Stats {
    n: u64,
    sum: Rational,
    sum_sq: Rational,
    max: Rational,
    over: u64,
}

impl Stats {
    fn empty() -> Self {
        Stats {
            n: 0,
            sum: Rational::zero(),
            sum_sq: Rational::zero(),
            max: Rational::zero(),
            over: 0,
        }
    }

    fn push(&mut self, x: Rational, bound: &Rational) {
        self.n += 1;
        if &x > bound {
            self.over += 1;
        }
        self.sum_sq += &x * &x;
        self.sum += &x;
        if x > self.max {
            self.max = x;
        }
    }

    fn merge(mut self, other: Stats) -> Stats {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.over += other.over;
        if other.max > self.max {
            self.max = other.max;
        }
        self
    }
}

fn collect_stats(
    theta: &Matrix,
    count: u64,
    bound: &Rational,
    caps: &Caps,
    spec_at: impl Fn(u64) -> BlockPermutation + Sync + Send,
) -> Result<Stats> {
    let ranges: Vec<Range<u64>> = chunk_ranges(count, default_chunks());
    let parts = map_vec(ranges, |range| -> Result<Stats> {
        let mut stats = Stats::empty();
        for i in range {
            let lift = build_lift(theta, &spec_at(i))?;
            stats.push(permanent(lift.flat(), caps)?, bound);
        }
        Ok(stats)
    });
    parts.into_iter().try_fold(Stats::empty(), |acc, s| Ok(acc.merge(s?)))
}

fn root_display(mean: &Rational, degree: usize) -> f64 {
    if mean.is_zero() {
        return 0.0;
    }
    let ln = ln_bigint(mean.numer()) - ln_bigint(mean.denom());
    (ln / degree as f64).exp()
}

fn std_dev_string(stats: &Stats) -> String {
    if stats.n < 2 {
        return "0".into();
    }
    let n = Rational::from_integer(stats.n.into());
    let var = (&stats.sum_sq - &stats.sum * &stats.sum / &n) / (n - Rational::from_integer(1.into()));
    let var = if var.is_negative() { Rational::zero() } else { var };
    format!("{}", rational_to_f64(&var).sqrt())
}

fn report(
    theta: &Matrix,
    degree: usize,
    mode: BetheMode,
    seed: Option<u64>,
    perm_theta: Rational,
    bound: Rational,
    stats: Stats,
) -> BetheReport {
    let mean = if stats.n == 0 {
        Rational::zero()
    } else {
        &stats.sum / Rational::from_integer(stats.n.into())
    };
    BetheReport {
        m: theta.n(),
        degree,
        mode,
        bethe_value: root_display(&mean, degree),
        bound_holds: mean <= bound,
        std_dev: std_dev_string(&stats),
        mean_perm: mean,
        perm_theta,
        perm_theta_pow_m: bound,
        samples: stats.n,
        seed,
        max_perm: stats.max,
        lifts_over_bound: stats.over,
    }
}

fn base_and_bound(theta: &Matrix, degree: usize, caps: &Caps) -> Result<(Rational, Rational)> {
    check_cap("ryser", (theta.n() * degree) as u64, caps.ryser as u64)?;
    let p = permanent(theta, caps)?;
    let bound = permanent_power(theta, degree, caps)?;
    Ok((p, bound))
}

/// Average over every reduced block permutation. Each reduced spec stands
/// for an equal-size class of unreduced specs with the same permanent, so
/// this is the average over all block permutations.
pub fn bethe_degree_exact(theta: &Matrix, degree: usize, caps: &Caps) -> Result<BetheReport> {
    let specs = enumerate_reduced(theta.n(), degree, caps)?;
    let (p, bound) = base_and_bound(theta, degree, caps)?;
    let stats = collect_stats(theta, specs.len(), &bound, caps, |i| specs.get(i))?;
    Ok(report(theta, degree, BetheMode::Exact, None, p, bound, stats))
}

/// Average over every block permutation, without reduction.
pub fn bethe_degree_full(theta: &Matrix, degree: usize, caps: &Caps) -> Result<BetheReport> {
    let specs = enumerate_all(theta.n(), degree, caps)?;
    let (p, bound) = base_and_bound(theta, degree, caps)?;
    let stats = collect_stats(theta, specs.len(), &bound, caps, |i| specs.get(i))?;
    Ok(report(theta, degree, BetheMode::Exact, None, p, bound, stats))
}

/// Mean over `samples` random reduced specs. Sample `i` is drawn from
/// stream `i` of the seeded generator, so the result does not depend on how
/// the work is split.
pub fn bethe_degree_mc(theta: &Matrix, degree: usize, samples: u64, seed: u64, caps: &Caps) -> Result<BetheReport> {
    let (p, bound) = base_and_bound(theta, degree, caps)?;
    let m = theta.n();
    let stats = collect_stats(theta, samples, &bound, caps, |i| {
        random_block_perm_indexed(m, degree, seed, i, true)
    })?;
    Ok(report(
        theta,
        degree,
        BetheMode::MonteCarlo,
        Some(seed),
        p,
        bound,
        stats,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheChainReport {
    pub bethe: BetheReport,
    /// Every enumerated lift has permanent at most `perm(θ)^M`.
    pub every_lift_bounded: bool,
    /// The largest lift permanent equals `perm(θ)^M`; the identity spec
    /// always attains it.
    pub max_attains_bound: bool,
}

impl BetheChainReport {
    pub fn holds(&self) -> bool {
        self.bethe.bound_holds && self.every_lift_bounded && self.max_attains_bound
    }
}

/// Checks `mean ≤ perm(θ)^M` and the same bound lift by lift.
pub fn verify_bethe_chain(theta: &Matrix, degree: usize, caps: &Caps) -> Result<BetheChainReport> {
    let bethe = bethe_degree_exact(theta, degree, caps)?;
    Ok(BetheChainReport {
        every_lift_bounded: bethe.lifts_over_bound == 0,
        max_attains_bound: bethe.max_perm == bethe.perm_theta_pow_m,
        bethe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{permanent_naive, rational};

    fn mat(rows: &[&[i64]]) -> Matrix {
        Matrix::from_integers(rows).unwrap()
    }

    #[test]
    fn one_by_one_is_exact() {
        let caps = Caps::default();
        let r = bethe_degree_exact(&mat(&[&[3]]), 4, &caps).unwrap();
        assert_eq!(r.mean_perm, rational(81));
        assert!(r.bound_holds);
        assert!((r.bethe_value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn all_ones_two_by_two() {
        let caps = Caps::default();
        let swap_lift = mat(&[&[1, 0, 1, 0], &[0, 1, 0, 1], &[0, 1, 1, 0], &[1, 0, 0, 1]]);
        let swap = permanent_naive(&swap_lift, &caps).unwrap();
        let r = bethe_degree_exact(&Matrix::ones(2), 2, &caps).unwrap();
        assert_eq!(r.samples, 2);
        assert_eq!(r.mean_perm, (rational(4) + swap) / rational(2));
        assert_eq!(r.perm_theta_pow_m, rational(4));
        assert!(r.bound_holds);
    }

    #[test]
    fn full_and_reduced_averages_agree() {
        let caps = Caps::default();
        let theta = mat(&[&[1, 2], &[3, 5]]);
        let full = bethe_degree_full(&theta, 2, &caps).unwrap();
        let reduced = bethe_degree_exact(&theta, 2, &caps).unwrap();
        assert_eq!(full.samples, 16);
        assert_eq!(reduced.samples, 2);
        assert_eq!(full.mean_perm, reduced.mean_perm);
    }

    #[test]
    fn zero_row_collapses_the_chain() {
        let caps = Caps::default();
        let chain = verify_bethe_chain(&mat(&[&[0, 0], &[1, 2]]), 3, &caps).unwrap();
        assert!(chain.holds());
        assert!(chain.bethe.mean_perm.is_zero());
        assert!(chain.bethe.max_perm.is_zero());
    }

    #[test]
    fn all_ones_three_by_three_chain() {
        let caps = Caps::default();
        let chain = verify_bethe_chain(&Matrix::ones(3), 2, &caps).unwrap();
        assert_eq!(chain.bethe.samples, 16);
        assert_eq!(chain.bethe.perm_theta_pow_m, rational(36));
        assert!(chain.holds());
    }

    #[test]
    fn sampling_is_deterministic_and_bounded() {
        let caps = Caps::default();
        let theta = mat(&[&[1, 2, 0], &[1, 1, 3], &[2, 0, 1]]);
        let a = bethe_degree_mc(&theta, 2, 40, 7, &caps).unwrap();
        let b = bethe_degree_mc(&theta, 2, 40, 7, &caps).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lifts_over_bound, 0);
        assert!(a.bound_holds);
        let small = bethe_degree_mc(&Matrix::ones(2), 2, 30, 1, &caps).unwrap();
        let swap = rational(2);
        assert!(small.mean_perm >= swap && small.mean_perm <= rational(4));
    }
}
