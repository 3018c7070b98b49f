//! Acceptance suite. Each criterion runs under its time limit and prints one
//! PASS/FAIL line; the process exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use permlift::bethe::{bethe_degree_exact, bethe_degree_full};
use permlift::decomposition::{
    all_decompositions, birkhoff_pass, standard_mapping, verify_injectivity, ExponentMatrix,
};
use permlift::fixtures;
use permlift::lifting::{build_lift, kron_lift, reduce};
use permlift::matrix::{permanent_naive, permanent_power, permanent_ryser};
use permlift::render;
use permlift::symbolic::{
    coefficient_upper_bound, lift_permanent_polynomial, theta_power_polynomial, verify_dominance,
};
use permlift::{BlockPermutation, Caps, Matrix, Permutation, Rational};

type Check = Result<String, String>;
type Criterion = (&'static str, u64, fn(&Caps) -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------------------------------------------------------------------------
// Independent oracles

/// Expansion along the first row, skipping zeros. Shares nothing with the
/// library's permanent routines.
fn oracle_perm(a: &[Vec<Rational>]) -> Rational {
    fn go(a: &[Vec<Rational>], row: usize, used: &mut [bool]) -> Rational {
        if row == a.len() {
            return Rational::one();
        }
        let mut sum = Rational::zero();
        for col in 0..a.len() {
            if !used[col] && !a[row][col].is_zero() {
                used[col] = true;
                sum += &a[row][col] * go(a, row + 1, used);
                used[col] = false;
            }
        }
        sum
    }
    go(a, 0, &mut vec![false; a.len()])
}

fn dense(mat: &Matrix) -> Vec<Vec<Rational>> {
    mat.rows().map(<[_]>::to_vec).collect()
}

/// The lift written out entry by entry from the block permutations.
fn oracle_lift(theta: &Matrix, spec: &BlockPermutation) -> Vec<Vec<Rational>> {
    let (m, d) = (spec.m(), spec.degree());
    let mut out = vec![vec![Rational::zero(); m * d]; m * d];
    for j in 0..m {
        for l in 0..m {
            let p = spec.block(j, l).as_zero_based();
            for r in 0..d {
                out[j * d + r][l * d + p[r]] = theta.get(j, l).clone();
            }
        }
    }
    out
}

fn pow(x: &Rational, k: usize) -> Rational {
    (0..k).fold(Rational::one(), |acc, _| acc * x)
}

// ---------------------------------------------------------------------------
// Random inputs

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let p: i64 = if rng.random_bool(0.2) {
        0
    } else {
        rng.random_range(1..20)
    };
    Rational::new(BigInt::from(p), BigInt::from(rng.random_range(1i64..7)))
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    Matrix::from_fn(n, |_, _| random_rational(rng)).unwrap()
}

fn random_perm(rng: &mut ChaCha8Rng, n: usize) -> Permutation {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    Permutation::from_zero_based(v).unwrap()
}

fn random_spec(rng: &mut ChaCha8Rng, m: usize, degree: usize) -> BlockPermutation {
    let blocks = (0..m)
        .map(|_| (0..m).map(|_| random_perm(rng, degree)).collect())
        .collect();
    BlockPermutation::new(blocks).unwrap()
}

fn random_exponents(rng: &mut ChaCha8Rng, m: usize, degree: usize) -> ExponentMatrix {
    let perms: Vec<_> = (0..degree).map(|_| random_perm(rng, m)).collect();
    ExponentMatrix::from_terms(m, perms.iter().map(|p| (p, 1))).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Criteria

fn kronecker_tightness(caps: &Caps) -> Check {
    let mut rng = rng(1);
    let mut thetas = vec![fixtures::example1_theta()];
    thetas.extend((0..50).map(|_| random_matrix(&mut rng, 3)));
    for theta in &thetas {
        let base = oracle_perm(&dense(theta));
        let want = &base * &base;
        let doubled: Vec<Vec<Rational>> = (0..6)
            .map(|i| {
                (0..6)
                    .map(|j| {
                        if i % 2 == j % 2 {
                            theta.get(i / 2, j / 2).clone()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        ensure!(oracle_perm(&doubled) == want, "oracle disagrees with itself");
        let lift = kron_lift(theta, &Permutation::identity(2));
        ensure!(
            dense(lift.flat()) == doubled,
            "lift layout is not the Kronecker product"
        );
        let got = permanent_ryser(lift.flat(), caps).map_err(|e| e.to_string())?;
        ensure!(got == want, "perm(lift) = {got}, perm(theta)^2 = {want}");
    }
    Ok(format!("{} matrices", thetas.len()))
}

fn golden_lift_polynomial(caps: &Caps) -> Check {
    let spec = fixtures::example4_spec();
    let got = lift_permanent_polynomial(&spec, caps).map_err(|e| e.to_string())?;
    let golden = fixtures::appendix_b_polynomial();
    ensure!(got.len() == 21, "{} monomials", got.len());
    ensure!(got == golden, "lift polynomial differs from the golden text");
    for (text, coeff) in [
        ("a^3 e^3 i^3", 1u32),
        ("a^2 b d f^2 h^2 i", 3),
        ("a b^2 d f^2 g h i", 6),
    ] {
        let key = render::parse_monomial(3, 3, text).map_err(|e| e.to_string())?;
        ensure!(got.coefficient(&key) == BigUint::from(coeff), "coefficient of {text}");
    }
    let report = verify_dominance(&spec, caps).map_err(|e| e.to_string())?;
    ensure!(
        report.ok && report.violations.is_empty(),
        "{} violations",
        report.violations.len()
    );
    Ok(format!("21 monomials, {} keys dominated", report.checked))
}

fn decomposition_counts(caps: &Caps) -> Check {
    let two = all_decompositions(&fixtures::example2_exponents(), caps).map_err(|e| e.to_string())?;
    ensure!(
        two == vec![fixtures::example2_decomposition()],
        "unique case gave {} decompositions",
        two.len()
    );
    let three = all_decompositions(&fixtures::example3_exponents(), caps).map_err(|e| e.to_string())?;
    ensure!(
        three == fixtures::example3_decompositions(),
        "three-way case gave {} decompositions",
        three.len()
    );
    Ok("1 and 3".into())
}

fn coefficient_bounds(caps: &Caps) -> Check {
    let skewed = ExponentMatrix::new(vec![vec![2, 1, 0], vec![1, 0, 2], vec![0, 2, 1]]).map_err(|e| e.to_string())?;
    let ones = ExponentMatrix::new(vec![vec![1; 3]; 3]).map_err(|e| e.to_string())?;
    let b1 = coefficient_upper_bound(&skewed, caps).map_err(|e| e.to_string())?;
    let b2 = coefficient_upper_bound(&ones, caps).map_err(|e| e.to_string())?;
    ensure!(b1 == BigUint::from(3u32), "bound {b1} for a^2 b d f^2 h^2 i");
    ensure!(b2 == BigUint::from(12u32), "bound {b2} for the all-ones key");
    let lift = lift_permanent_polynomial(&fixtures::example4_spec(), caps).map_err(|e| e.to_string())?;
    ensure!(
        lift.coefficient(&ones).is_zero(),
        "all-ones key present in the lift polynomial"
    );
    Ok("3, 12, lift coefficient 0".into())
}

fn standard_mappings(caps: &Caps) -> Check {
    let mut done = 0;
    let small = fixtures::appendix_a_3x2_spec();
    let lift = build_lift(&Matrix::ones(3), &small).map_err(|e| e.to_string())?;
    for (name, cols, target) in fixtures::APPENDIX_A_3X2 {
        let tau = small.tau_from_block_columns(&cols).map_err(|e| e.to_string())?;
        let got = render::word(&standard_mapping(&lift, &tau, caps).map_err(|e| e.to_string())?);
        ensure!(got == target, "{name}: {got} instead of {target}");
        done += 1;
    }
    let big = fixtures::appendix_a_5x3_spec();
    let lift = build_lift(&Matrix::ones(5), &big).map_err(|e| e.to_string())?;
    for (name, cols, target, _) in fixtures::APPENDIX_A_5X3 {
        let zero_based: Vec<usize> = cols.iter().map(|c| c - 1).collect();
        let tau = big.tau_from_block_columns(&zero_based).map_err(|e| e.to_string())?;
        let got = render::word(&standard_mapping(&lift, &tau, caps).map_err(|e| e.to_string())?);
        ensure!(got == target, "{name}: {got} instead of {target}");
        done += 1;
    }
    Ok(format!("{done} mappings"))
}

fn injectivity(caps: &Caps) -> Check {
    let mut rng = rng(6);
    let mut specs = vec![fixtures::example4_spec(), fixtures::appendix_a_3x2_spec()];
    specs.extend((0..10).map(|_| reduce(&random_spec(&mut rng, 3, 2))));
    specs.extend((0..3).map(|_| reduce(&random_spec(&mut rng, 2, 4))));
    let mut products = 0;
    for spec in &specs {
        let lift = build_lift(&Matrix::ones(spec.m()), spec).map_err(|e| e.to_string())?;
        let report = verify_injectivity(&lift, caps).map_err(|e| e.to_string())?;
        ensure!(
            report.collisions.is_empty() && report.illegal_targets_that_are_products.is_empty(),
            "{} collisions, {} illegal targets for {}",
            report.collisions.len(),
            report.illegal_targets_that_are_products.len(),
            permlift::json::to_string(spec)
        );
        products += report.total_products;
    }
    Ok(format!("{} lifts, {products} products", specs.len()))
}

fn lift_bound(caps: &Caps) -> Check {
    let mut rng = rng(7);
    let mut pairs = Vec::new();
    for _ in 0..200 {
        let (m, d) = (rng.random_range(1..=3), rng.random_range(1..=3));
        pairs.push((random_matrix(&mut rng, m), random_spec(&mut rng, m, d)));
    }
    for _ in 0..20 {
        pairs.push((random_matrix(&mut rng, 2), random_spec(&mut rng, 2, 5)));
    }
    for (theta, spec) in &pairs {
        let lift = build_lift(theta, spec).map_err(|e| e.to_string())?;
        let got = permanent_ryser(lift.flat(), caps).map_err(|e| e.to_string())?;
        let oracle = oracle_perm(&oracle_lift(theta, spec));
        ensure!(got == oracle, "ryser {got} vs oracle {oracle}");
        let bound = pow(&oracle_perm(&dense(theta)), spec.degree());
        ensure!(oracle <= bound, "perm(lift) = {oracle} exceeds {bound}");
    }
    Ok(format!("{} pairs", pairs.len()))
}

fn bethe_exact(caps: &Caps) -> Check {
    let mut rng = rng(8);
    let cases = [
        (random_matrix(&mut rng, 2), 2),
        (random_matrix(&mut rng, 2), 3),
        (fixtures::example1_theta(), 2),
    ];
    for (theta, d) in &cases {
        let r = bethe_degree_exact(theta, *d, caps).map_err(|e| e.to_string())?;
        ensure!(r.bound_holds, "bound fails for m={} M={d}", theta.n());
        ensure!(r.mean_perm <= r.perm_theta_pow_m, "mean above perm^M");
    }
    let theta = random_matrix(&mut rng, 2);
    let full = bethe_degree_full(&theta, 2, caps).map_err(|e| e.to_string())?;
    let reduced = bethe_degree_exact(&theta, 2, caps).map_err(|e| e.to_string())?;
    ensure!(
        full.samples == 16 && reduced.samples == 2,
        "{} full, {} reduced",
        full.samples,
        reduced.samples
    );
    ensure!(
        full.mean_perm == reduced.mean_perm,
        "full {} vs reduced {}",
        full.mean_perm,
        reduced.mean_perm
    );

    let identity = Permutation::identity(2);
    let swap = Permutation::from_zero_based(vec![1, 0]).unwrap();
    let mut sum = Rational::zero();
    for bits in 0u32..16 {
        let pick = |k: u32| {
            if bits >> k & 1 == 1 {
                swap.clone()
            } else {
                identity.clone()
            }
        };
        let spec = BlockPermutation::new(vec![vec![pick(0), pick(1)], vec![pick(2), pick(3)]]).unwrap();
        sum += oracle_perm(&oracle_lift(&theta, &spec));
    }
    let mean = sum / Rational::from_integer(16.into());
    ensure!(mean == full.mean_perm, "oracle mean {mean} vs {}", full.mean_perm);
    Ok("3 exact averages, 16 vs 2 agree".into())
}

fn oracle_equivalence(caps: &Caps) -> Check {
    let mut rng = rng(9);
    for _ in 0..100 {
        let n = rng.random_range(1..=8);
        let mat = random_matrix(&mut rng, n);
        let ryser = permanent_ryser(&mat, caps).map_err(|e| e.to_string())?;
        let naive = permanent_naive(&mat, caps).map_err(|e| e.to_string())?;
        ensure!(ryser == naive, "n={n}: ryser {ryser} vs naive {naive}");
    }
    for _ in 0..200 {
        let (m, d) = (rng.random_range(1..=4), rng.random_range(1..=10));
        let r = random_exponents(&mut rng, m, d);
        let split = birkhoff_pass(&r, caps).map_err(|e| e.to_string())?;
        let back = split.to_exponent_matrix(m).map_err(|e| e.to_string())?;
        ensure!(back == r && split.degree() == d, "residual left for {r}");
    }
    Ok("100 permanents, 200 passes".into())
}

fn substitution(caps: &Caps) -> Check {
    let mut rng = rng(10);
    for k in 0..30 {
        let d = 2 + k % 2;
        let theta = random_matrix(&mut rng, 3);
        let spec = random_spec(&mut rng, 3, d);
        let lift = build_lift(&theta, &spec).map_err(|e| e.to_string())?;
        let poly = lift_permanent_polynomial(&spec, caps).map_err(|e| e.to_string())?;
        let direct = permanent_naive(lift.flat(), caps).map_err(|e| e.to_string())?;
        ensure!(
            poly.evaluate(&theta).map_err(|e| e.to_string())? == direct,
            "lift polynomial at M={d}"
        );
        let power = theta_power_polynomial(3, d, caps).map_err(|e| e.to_string())?;
        let want = permanent_power(&theta, d, caps).map_err(|e| e.to_string())?;
        ensure!(
            power.evaluate(&theta).map_err(|e| e.to_string())? == want,
            "power polynomial at M={d}"
        );
    }
    Ok("30 matrices".into())
}

fn main() {
    let caps = Caps::default();
    let criteria: [Criterion; 10] = [
        ("Kronecker lifts are tight", 1, kronecker_tightness),
        ("golden lift polynomial and dominance", 10, golden_lift_polynomial),
        ("decomposition counts", 1, decomposition_counts),
        ("coefficient bounds", 1, coefficient_bounds),
        ("standard-mapping fixtures", 5, standard_mappings),
        ("standard mapping is injective", 60, injectivity),
        ("lift permanent bounded by perm^M", 60, lift_bound),
        ("exact degree-M averages", 30, bethe_exact),
        ("permanent and decomposition oracles", 30, oracle_equivalence),
        ("substitution consistency", 30, substitution),
    ];
    let mut failed = 0;
    for (index, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| run(&caps))).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > Duration::from_secs(*limit) => Err(format!("took {elapsed:.2?}, limit {limit} s")),
            other => other,
        };
        let (tag, detail) = match outcome {
            Ok(detail) => ("PASS", detail),
            Err(detail) => {
                failed += 1;
                ("FAIL", detail)
            }
        };
        println!("{tag} criterion {}: {name}: {detail} ({elapsed:.2?})", index + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
