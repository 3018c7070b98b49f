//! Worked examples shipped with the crate, and suites that recompute them.
//!
//! Block permutations are written with 1-based images; permanent-products of
//! a lift are written as the 0-based block column chosen by each flat row.
//! Words and monomials use the letter notation of [`crate::render`].

use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::decomposition::{
    all_decompositions, alpha_matrix, birkhoff_pass, exponent_matrix, same_index_decompose, standard_mapping_trace,
    verify_injectivity, Decomposition, ExponentMatrix, ThetaProductWord,
};
use crate::error::Result;
use crate::lifting::{build_lift, kron_lift, BlockPermutation, Lift};
use crate::matrix::{permanent_naive, permanent_ryser, Matrix, Permutation};
use crate::render;
use crate::symbolic::{coefficient_upper_bound, lift_permanent_polynomial, verify_dominance, PermPolynomial};

pub const SUITES: &[&str] = &[
    "example1",
    "example2",
    "example3",
    "example4",
    "example6",
    "example7",
    "appendixA-3x2",
    "appendixA-5x3",
    "appendixB",
];

const APPENDIX_B_LIFT: &str = include_str!("../fixtures/appendix_b_lift.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Checks(Vec<CheckResult>);

impl Checks {
    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, name: &str, got: T, want: T) {
        let passed = got == want;
        let detail = if passed {
            format!("{got:?}")
        } else {
            format!("got {got:?}, expected {want:?}")
        };
        self.0.push(CheckResult {
            name: name.into(),
            passed,
            detail,
        });
    }

    /// Compares rendered text, printed without quotes.
    fn text(&mut self, name: &str, got: String, want: String) {
        let passed = got == want;
        let detail = if passed {
            got
        } else {
            format!("got {got}, expected {want}")
        };
        self.truth(name, passed, detail);
    }

    fn truth(&mut self, name: &str, passed: bool, detail: String) {
        self.0.push(CheckResult {
            name: name.into(),
            passed,
            detail,
        });
    }
}

/// Decompositions in letter notation, joined with ` | `.
fn letters(all: &[Decomposition]) -> String {
    all.iter().map(render::decomposition).collect::<Vec<_>>().join(" | ")
}

fn perm(image: &[usize]) -> Permutation {
    Permutation::from_one_based(image.to_vec()).expect("fixture permutation")
}

fn spec(blocks: &[&[&[usize]]]) -> BlockPermutation {
    BlockPermutation::new(blocks.iter().map(|r| r.iter().map(|b| perm(b)).collect()).collect())
        .expect("fixture block permutation")
}

fn exp(rows: &[&[u32]]) -> ExponentMatrix {
    ExponentMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).expect("fixture exponent matrix")
}

/// Base permanent-products of a 3×3 matrix by their letters.
fn product(letters: &str) -> Permutation {
    let cols: Vec<usize> = letters.bytes().map(|b| (b - b'a') as usize % 3 + 1).collect();
    perm(&cols)
}

fn decomposition(terms: &[(&str, u32)]) -> Decomposition {
    Decomposition::new(terms.iter().map(|&(l, t)| (product(l), t)))
}

/// The 3×3 matrix with `a..i = 1..9`.
pub fn example1_theta() -> Matrix {
    Matrix::from_integers(&[[1, 2, 3], [4, 5, 6], [7, 8, 9]]).expect("fixture matrix")
}

pub fn example2_exponents() -> ExponentMatrix {
    exp(&[&[3, 2, 2], &[0, 3, 4], &[4, 2, 1]])
}

/// `(aei)(bfg)²(ceg)²(afh)²`.
pub fn example2_decomposition() -> Decomposition {
    decomposition(&[("aei", 1), ("bfg", 2), ("ceg", 2), ("afh", 2)])
}

pub fn example3_exponents() -> ExponentMatrix {
    exp(&[&[3, 2, 2], &[2, 3, 2], &[2, 2, 3]])
}

pub fn example3_decompositions() -> Vec<Decomposition> {
    let mut out = vec![
        decomposition(&[("aei", 3), ("bfg", 2), ("cdh", 2)]),
        decomposition(&[("afh", 2), ("aei", 1), ("ceg", 2), ("bdi", 2)]),
        decomposition(&[("afh", 1), ("aei", 2), ("ceg", 1), ("bdi", 1), ("bfg", 1), ("cdh", 1)]),
    ];
    out.sort();
    out
}

/// `P = [[I, I, I], [I, Q, Q²], [I, I, Q²]]` with `Q = [3, 1, 2]`.
pub fn example4_spec() -> BlockPermutation {
    let (i, q, q2): (&[usize], &[usize], &[usize]) = (&[1, 2, 3], &[3, 1, 2], &[2, 3, 1]);
    spec(&[&[i, i, i], &[i, q, q2], &[i, i, q2]])
}

pub const EXAMPLE4_TAU: [usize; 9] = [0, 1, 0, 2, 0, 2, 1, 2, 1];

pub fn example6_spec() -> BlockPermutation {
    let i: &[usize] = &[1, 2, 3, 4, 5, 6];
    spec(&[
        &[i, i, i],
        &[i, &[3, 6, 5, 4, 1, 2], &[1, 2, 3, 5, 4, 6]],
        &[i, &[3, 1, 5, 6, 4, 2], &[1, 2, 5, 6, 3, 4]],
    ])
}

pub const EXAMPLE6_TAU: [usize; 18] = [0, 2, 2, 0, 0, 1, 2, 0, 1, 2, 2, 1, 1, 1, 0, 2, 1, 0];

/// The mapping printed for Example 6 next to the one the prefix rule picks.
pub const EXAMPLE6_PRINTED: &str = "(a1f1h1)(d2c2h2)(g3c3e3)(a4e4i4)(a5f5h5)(g6b6f6)";
pub const EXAMPLE6_PREFIX_RULE: &str = "(a1f1h1)(d2c2h2)(g3c3e3)(a4f4h4)(a5e5i5)(g6b6f6)";

pub fn appendix_a_3x2_spec() -> BlockPermutation {
    let (i, s): (&[usize], &[usize]) = (&[1, 2], &[2, 1]);
    spec(&[&[i, i, i], &[i, i, i], &[i, s, s]])
}

/// `(τ, κ)` with their printed targets.
pub const APPENDIX_A_3X2: [(&str, [usize; 6], &str); 2] = [
    ("tau", [0, 0, 1, 2, 1, 2], "(a1e1i1)(a2f2h2)"),
    ("kappa", [0, 0, 2, 1, 2, 1], "(a1f1h1)(a2e2i2)"),
];

pub fn appendix_a_5x3_spec() -> BlockPermutation {
    let i: &[usize] = &[1, 2, 3];
    let (c, c2, t, s): (&[usize], &[usize], &[usize], &[usize]) = (&[3, 1, 2], &[2, 3, 1], &[3, 2, 1], &[2, 1, 3]);
    spec(&[
        &[i, i, i, i, i],
        &[i, c, t, i, s],
        &[i, c, c2, i, c2],
        &[i, c, i, i, c],
        &[i, c, c, c, c],
    ])
}

/// Name, 1-based block column per flat row, printed target, and the
/// number of candidate words listed for it.
pub const APPENDIX_A_5X3: [(&str, [usize; 15], &str, usize); 4] = [
    (
        "tau",
        [4, 1, 1, 3, 5, 4, 2, 2, 2, 1, 3, 5, 5, 3, 4],
        "(p1d1h1l1y1)(a2j2l2r2x2)(a3i3l3t3w3)",
        4,
    ),
    (
        "gamma",
        [1, 4, 1, 3, 5, 4, 2, 2, 2, 3, 1, 5, 5, 4, 3],
        "(a1h1l1t1x1)(p2d2j2l2w2)(a3i3l3r3y3)",
        4,
    ),
    (
        "kappa",
        [5, 1, 4, 2, 2, 3, 5, 4, 2, 1, 3, 3, 5, 4, 1],
        "(p1e1h1l1x1)(a2g2n2r2y2)(u3d3g3o3r3)",
        2,
    ),
    (
        "nu",
        [4, 1, 5, 2, 2, 3, 5, 4, 2, 1, 3, 3, 4, 5, 1],
        "(p1d1h1l1y1)(a2g2o2r2x2)(u3e3g3n3r3)",
        2,
    ),
];

/// The lift polynomial of Example 4's spec as printed.
pub fn appendix_b_polynomial() -> PermPolynomial {
    render::parse_polynomial(3, 3, APPENDIX_B_LIFT).expect("embedded golden polynomial")
}

fn ones_lift(spec: &BlockPermutation) -> Lift {
    build_lift(&Matrix::ones(spec.m()), spec).expect("spec matches its own size")
}

fn word(m: usize, text: &str) -> ThetaProductWord {
    render::parse_word(m, text).expect("fixture word")
}

/// Runs one suite, or returns `None` for an unknown name.
pub fn run_suite(name: &str, caps: &Caps) -> Option<Result<SuiteReport>> {
    let run = match name {
        "example1" => example1,
        "example2" => example2,
        "example3" => example3,
        "example4" => example4,
        "example6" => example6,
        "example7" => example7,
        "appendixA-3x2" => appendix_a_3x2,
        "appendixA-5x3" => appendix_a_5x3,
        "appendixB" => appendix_b,
        _ => return None,
    };
    let mut checks = Checks(Vec::new());
    Some(run(&mut checks, caps).map(|()| SuiteReport {
        suite: name.into(),
        checks: checks.0,
    }))
}

fn example1(c: &mut Checks, caps: &Caps) -> Result<()> {
    let theta = example1_theta();
    let lift = kron_lift(&theta, &Permutation::identity(2));
    let p = permanent_naive(&theta, caps)?;
    c.text("perm(theta) = 450", p.to_string(), "450".to_string());
    let lp = permanent_naive(lift.flat(), caps)?;
    c.text(
        "perm(theta (x) I2) = perm(theta)^2",
        lp.to_string(),
        (&p * &p).to_string(),
    );
    c.text(
        "ryser agrees on the lift",
        permanent_ryser(lift.flat(), caps)?.to_string(),
        lp.to_string(),
    );
    Ok(())
}

fn example2(c: &mut Checks, caps: &Caps) -> Result<()> {
    let r = example2_exponents();
    c.text(
        "single pass",
        letters(&[birkhoff_pass(&r, caps)?]),
        letters(&[example2_decomposition()]),
    );
    c.text(
        "unique decomposition",
        letters(&all_decompositions(&r, caps)?),
        letters(&[example2_decomposition()]),
    );
    Ok(())
}

fn example3(c: &mut Checks, caps: &Caps) -> Result<()> {
    let r = example3_exponents();
    let all = all_decompositions(&r, caps)?;
    c.text(
        "three decompositions",
        letters(&all),
        letters(&example3_decompositions()),
    );
    c.truth(
        "single pass finds one of them",
        all.contains(&birkhoff_pass(&r, caps)?),
        "pass result is listed".into(),
    );
    c.eq("coefficient bound", coefficient_upper_bound(&r, caps)?, 3360u32.into());
    Ok(())
}

fn example4(c: &mut Checks, caps: &Caps) -> Result<()> {
    let spec = example4_spec();
    let lift = ones_lift(&spec);
    let tau = spec.tau_from_block_columns(&EXAMPLE4_TAU)?;
    c.eq(
        "exponent matrix",
        exponent_matrix(&lift, &tau)?.rows(),
        exp(&[&[2, 1, 0], &[1, 0, 2], &[0, 2, 1]]).rows(),
    );
    let want: Vec<Vec<Vec<usize>>> = vec![
        vec![vec![1, 3], vec![2], vec![]],
        vec![vec![2], vec![], vec![1, 3]],
        vec![vec![], vec![1, 3], vec![2]],
    ];
    c.eq("index sets", alpha_matrix(&lift, &tau)?.rows(), want);
    c.eq("reduced", spec.is_reduced(), true);
    c.eq(
        "permanent-products",
        lift_permanent_polynomial(&spec, caps)?.total(),
        54u32.into(),
    );
    Ok(())
}

fn example6(c: &mut Checks, caps: &Caps) -> Result<()> {
    let spec = example6_spec();
    let lift = ones_lift(&spec);
    let tau = spec.tau_from_block_columns(&EXAMPLE6_TAU)?;
    c.eq(
        "exponent matrix",
        exponent_matrix(&lift, &tau)?.rows(),
        exp(&[&[3, 1, 2], &[1, 2, 3], &[2, 3, 1]]).rows(),
    );
    let parts = same_index_decompose(&lift, &tau)?;
    let illegal: Vec<usize> = parts.iter().filter(|p| !p.legal).map(|p| p.index).collect();
    c.eq("illegal local indices", illegal, vec![4, 6]);
    let trace = standard_mapping_trace(&lift, &tau, caps)?;
    c.eq("candidate count", trace.candidates.len(), 7);
    c.truth(
        "printed mapping is a candidate",
        trace.candidates.contains(&word(3, EXAMPLE6_PRINTED)),
        EXAMPLE6_PRINTED.into(),
    );
    c.text(
        "prefix-rule mapping",
        render::word(&trace.target),
        EXAMPLE6_PREFIX_RULE.to_string(),
    );
    Ok(())
}

fn example7(c: &mut Checks, caps: &Caps) -> Result<()> {
    let a2bdf2h2i = exp(&[&[2, 1, 0], &[1, 0, 2], &[0, 2, 1]]);
    c.eq(
        "bound for a^2 b d f^2 h^2 i",
        coefficient_upper_bound(&a2bdf2h2i, caps)?,
        3u32.into(),
    );
    let ones = exp(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]);
    c.eq(
        "bound for a b c d e f g h i",
        coefficient_upper_bound(&ones, caps)?,
        12u32.into(),
    );
    let lift = lift_permanent_polynomial(&example4_spec(), caps)?;
    c.eq(
        "lift coefficient of a b c d e f g h i",
        lift.coefficient(&ones),
        0u32.into(),
    );
    c.eq(
        "lift coefficient of a^2 b d f^2 h^2 i",
        lift.coefficient(&a2bdf2h2i),
        3u32.into(),
    );
    Ok(())
}

fn appendix_a_3x2(c: &mut Checks, caps: &Caps) -> Result<()> {
    let spec = appendix_a_3x2_spec();
    let lift = ones_lift(&spec);
    for (name, cols, target) in APPENDIX_A_3X2 {
        let tau = spec.tau_from_block_columns(&cols)?;
        let got = standard_mapping_trace(&lift, &tau, caps)?.target;
        c.text(
            &format!("{name} maps to {target}"),
            render::word(&got),
            target.to_string(),
        );
    }
    let key = exp(&[&[2, 0, 0], &[0, 1, 1], &[0, 1, 1]]);
    c.eq(
        "coefficient of a^2 e f h i",
        lift_permanent_polynomial(&spec, caps)?.coefficient(&key),
        2u32.into(),
    );
    c.eq("injective", verify_injectivity(&lift, caps)?.is_injective(), true);
    Ok(())
}

fn appendix_a_5x3(c: &mut Checks, caps: &Caps) -> Result<()> {
    let spec = appendix_a_5x3_spec();
    let lift = ones_lift(&spec);
    for (name, cols, target, count) in APPENDIX_A_5X3 {
        let zero_based: Vec<usize> = cols.iter().map(|&l| l - 1).collect();
        let tau = spec.tau_from_block_columns(&zero_based)?;
        let trace = standard_mapping_trace(&lift, &tau, caps)?;
        c.eq(&format!("{name}: candidates"), trace.candidates.len(), count);
        c.text(
            &format!("{name} maps to {target}"),
            render::word(&trace.target),
            target.to_string(),
        );
    }
    Ok(())
}

fn appendix_b(c: &mut Checks, caps: &Caps) -> Result<()> {
    let spec = example4_spec();
    let got = lift_permanent_polynomial(&spec, caps)?;
    let want = appendix_b_polynomial();
    c.eq("21 monomials", got.len(), 21);
    let diff: Vec<String> = want
        .terms()
        .iter()
        .filter(|(r, coeff)| got.coefficient(r) != **coeff)
        .chain(got.terms().iter().filter(|(r, _)| !want.terms().contains_key(r)))
        .map(|(r, _)| render::monomial(r))
        .collect();
    c.truth(
        "matches the printed polynomial",
        diff.is_empty(),
        if diff.is_empty() {
            "all terms equal".into()
        } else {
            format!("differs at {}", diff.join(", "))
        },
    );
    let dom = verify_dominance(&spec, caps)?;
    c.truth(
        "dominated by perm(theta)^3",
        dom.ok,
        format!("{} keys, {} violations", dom.checked, dom.violations.len()),
    );
    Ok(())
}
