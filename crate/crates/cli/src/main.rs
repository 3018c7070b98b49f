//! `permlift` command-line front end.
//!
//! Every verb prints one JSON document on stdout (or a plain-text rendering
//! with `--pretty`). Exit status: 0 on success, 1 on bad input or an
//! exceeded size cap, 2 when a checked inequality or fixture fails.

mod input;

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use permlift::bethe::{bethe_degree_exact, bethe_degree_mc, verify_bethe_chain, BetheMode, BetheReport};
use permlift::decomposition::{
    all_decompositions, alpha_matrix, birkhoff_pass, exponent_matrix, same_index_decompose, standard_mapping_trace,
    verify_injectivity, ExponentMatrix,
};
use permlift::fixtures::{run_suite, SuiteReport, SUITES};
use permlift::lifting::{build_lift, random_block_perm, reduce};
use permlift::matrix::{format_rational, permanent_naive, permanent_ryser};
use permlift::symbolic::{
    coefficient_upper_bound, lift_permanent_polynomial, theta_power_polynomial, verify_dominance,
};
use permlift::{json, render, BlockPermutation, Caps, Matrix, Permutation};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "permlift", version, about = "Exact permanents of matrix lifts")]
struct Cli {
    /// Plain-text output instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,

    #[command(flatten)]
    caps: CapArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CapArgs {
    /// Largest n for the n! permanent (default 10).
    #[arg(long = "cap-naive", global = true, value_name = "N")]
    naive: Option<usize>,
    /// Largest n for Ryser's formula (default 30).
    #[arg(long = "cap-ryser", global = true, value_name = "N")]
    ryser: Option<usize>,
    /// Largest m for decomposition passes (default 7).
    #[arg(long = "cap-birkhoff", global = true, value_name = "M")]
    birkhoff: Option<usize>,
    /// Largest m when enumerating every decomposition (default 5).
    #[arg(long = "cap-alldecomp-m", global = true, value_name = "M")]
    alldecomp_m: Option<usize>,
    /// Largest M when enumerating every decomposition (default 12).
    #[arg(long = "cap-alldecomp-degree", global = true, value_name = "M")]
    alldecomp_degree: Option<usize>,
    /// Most reduced block permutations to enumerate (default 1000000).
    #[arg(long = "cap-reduced-specs", global = true, value_name = "COUNT")]
    reduced_specs: Option<u64>,
    /// Most block permutations to enumerate without reduction (default 1000000).
    #[arg(long = "cap-full-specs", global = true, value_name = "COUNT")]
    full_specs: Option<u64>,
    /// Largest lift size mM for lift polynomials (default 12).
    #[arg(long = "cap-lift-poly", global = true, value_name = "MM")]
    lift_poly: Option<usize>,
    /// Largest lift size mM for the injectivity check (default 10).
    #[arg(long = "cap-inject", global = true, value_name = "MM")]
    inject: Option<usize>,
    /// Most terms in a perm(theta)^M expansion (default 1000000).
    #[arg(long = "cap-power-terms", global = true, value_name = "COUNT")]
    power_terms: Option<u64>,
}

impl CapArgs {
    fn caps(&self) -> Caps {
        let d = Caps::default();
        Caps {
            naive: self.naive.unwrap_or(d.naive),
            ryser: self.ryser.unwrap_or(d.ryser),
            birkhoff: self.birkhoff.unwrap_or(d.birkhoff),
            alldecomp_m: self.alldecomp_m.unwrap_or(d.alldecomp_m),
            alldecomp_degree: self.alldecomp_degree.unwrap_or(d.alldecomp_degree),
            reduced_specs: self.reduced_specs.unwrap_or(d.reduced_specs),
            full_specs: self.full_specs.unwrap_or(d.full_specs),
            lift_poly: self.lift_poly.unwrap_or(d.lift_poly),
            inject: self.inject.unwrap_or(d.inject),
            power_terms: self.power_terms.unwrap_or(d.power_terms),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Permanent of a matrix.
    Perm {
        /// Matrix JSON (inline, path, or `-`; stdin when omitted).
        #[arg(long = "in")]
        input: Option<String>,
        #[arg(long, value_enum, default_value = "ryser")]
        method: Method,
    },
    /// Flat lift of a base matrix by a block permutation.
    Lift {
        #[arg(long = "in")]
        input: Option<String>,
        /// Block permutation JSON; omit to draw one with --seed and --M.
        #[arg(long)]
        spec: Option<String>,
        #[arg(long = "M")]
        degree: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Draw a reduced block permutation.
        #[arg(long)]
        reduced: bool,
        /// Also report the lift permanent.
        #[arg(long)]
        perm: bool,
    },
    /// Reduced form of a block permutation.
    Reduce {
        #[arg(long)]
        spec: Option<String>,
    },
    /// Exponent and index matrices of a lift permanent-product.
    Expmat(TauArgs),
    /// Single lexicographic decomposition pass over an exponent matrix.
    Decompose {
        #[arg(long = "R")]
        r: Option<String>,
    },
    /// Every decomposition of an exponent matrix.
    Alldecomp {
        #[arg(long = "R")]
        r: Option<String>,
        /// Expected degree; rejected if the line sums differ.
        #[arg(long = "M")]
        degree: Option<usize>,
    },
    /// Same-index products of a lift permanent-product.
    Sameindex(TauArgs),
    /// Standard mapping of a lift permanent-product.
    Map(TauArgs),
    /// Exhaustive injectivity check of the standard mapping.
    Inject {
        #[arg(long)]
        spec: Option<String>,
    },
    /// Lift permanent polynomial, or perm(theta)^M with --power.
    Poly {
        #[arg(long)]
        spec: Option<String>,
        /// Expand perm(theta)^M instead; needs --m and --M.
        #[arg(long)]
        power: bool,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "M")]
        degree: Option<usize>,
    },
    /// Upper bound on a lift coefficient from the decompositions of R.
    Bound {
        #[arg(long = "R")]
        r: Option<String>,
    },
    /// Coefficientwise comparison of a lift polynomial with perm(theta)^M.
    Dominate {
        #[arg(long)]
        spec: Option<String>,
    },
    /// Degree-M Bethe permanent, exact or sampled.
    Bethe {
        #[arg(long = "in")]
        input: Option<String>,
        #[arg(long = "M")]
        degree: usize,
        /// Sample this many reduced block permutations (needs --seed).
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also check every lift against perm(theta)^M (exact mode only).
        #[arg(long)]
        chain: bool,
    },
    /// Recompute embedded worked examples; lists suites without --suite.
    Fixtures {
        /// Suite name, or `all`.
        #[arg(long)]
        suite: Option<String>,
    },
}

#[derive(Args)]
struct TauArgs {
    #[arg(long)]
    spec: Option<String>,
    /// Flat permutation of [mM] as a 1-based image array.
    #[arg(long)]
    tau: Option<String>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Method {
    Ryser,
    Naive,
    Both,
}

/// A finished command: what to print and whether a checked claim failed.
struct Output {
    json: String,
    text: String,
    violated: bool,
}

impl Output {
    fn new<T: Serialize>(value: &T, text: String) -> Self {
        Output {
            json: json::to_string(value),
            text,
            violated: false,
        }
    }

    fn violated(mut self, v: bool) -> Self {
        self.violated = v;
        self
    }
}

fn lib<T>(r: permlift::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn matrix_text(m: &Matrix) -> String {
    m.rows()
        .map(|r| r.iter().map(format_rational).collect::<Vec<_>>().join(" ") + "\n")
        .collect()
}

fn spec_text(s: &BlockPermutation) -> String {
    s.blocks()
        .map(|row| {
            row.iter()
                .map(|p| format!("{:?}", p.one_based()))
                .collect::<Vec<_>>()
                .join(" ")
                + "\n"
        })
        .collect()
}

fn bethe_text(r: &BetheReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "mode: {}",
        match r.mode {
            BetheMode::Exact => "exact",
            BetheMode::MonteCarlo => "monte_carlo",
        }
    );
    let _ = writeln!(s, "lifts: {}", r.samples);
    let _ = writeln!(s, "mean perm: {}", format_rational(&r.mean_perm));
    let _ = writeln!(s, "perm(theta): {}", format_rational(&r.perm_theta));
    let _ = writeln!(s, "perm(theta)^{}: {}", r.degree, format_rational(&r.perm_theta_pow_m));
    let _ = writeln!(s, "bethe value: {}", r.bethe_value);
    let _ = writeln!(s, "bound holds: {}", r.bound_holds);
    let _ = writeln!(s, "max perm: {}", format_rational(&r.max_perm));
    let _ = writeln!(s, "lifts over bound: {}", r.lifts_over_bound);
    let _ = writeln!(s, "std dev: {}", r.std_dev);
    s
}

fn suite_text(r: &SuiteReport) -> String {
    let mut s = String::new();
    for c in &r.checks {
        let _ = writeln!(
            s,
            "{} {}: {} ({})",
            if c.passed { "PASS" } else { "FAIL" },
            r.suite,
            c.name,
            c.detail
        );
    }
    s
}

fn run(cli: &Cli) -> Result<Output, String> {
    let caps = cli.caps.caps();
    let out = match &cli.command {
        Command::Perm { input, method } => {
            let m: Matrix = input::load("in", input.as_deref())?;
            let (value, agree) = match method {
                Method::Ryser => (lib(permanent_ryser(&m, &caps))?, true),
                Method::Naive => (lib(permanent_naive(&m, &caps))?, true),
                Method::Both => {
                    let a = lib(permanent_ryser(&m, &caps))?;
                    let b = lib(permanent_naive(&m, &caps))?;
                    let agree = a == b;
                    (a, agree)
                }
            };
            let v = format_rational(&value);
            let mut doc = json!({ "n": m.n(), "perm": v });
            if matches!(method, Method::Both) {
                doc["methods_agree"] = json!(agree);
            }
            Output::new(&doc, format!("perm = {v}\n")).violated(!agree)
        }
        Command::Lift {
            input,
            spec,
            degree,
            seed,
            reduced,
            perm,
        } => {
            let base: Matrix = input::load("in", input.as_deref())?;
            let spec = match (spec, seed, degree) {
                (Some(s), _, _) => input::require("spec", Some(s))?,
                (None, Some(seed), Some(d)) => random_block_perm(base.n(), *d, *seed, *reduced),
                _ => return Err("give --spec, or --seed with --M to draw one".into()),
            };
            let lift = lib(build_lift(&base, &spec))?;
            let mut text = matrix_text(lift.flat());
            let doc = if *perm {
                let p = format_rational(&lib(permanent_ryser(lift.flat(), &caps))?);
                let _ = writeln!(text, "perm = {p}");
                json!({ "spec": spec, "lift": lift.flat(), "perm": p })
            } else {
                json!({ "spec": spec, "lift": lift.flat() })
            };
            Output::new(&doc, text)
        }
        Command::Reduce { spec } => {
            let spec: BlockPermutation = input::load("spec", spec.as_deref())?;
            let r = reduce(&spec);
            Output::new(&r, spec_text(&r))
        }
        Command::Expmat(t) => {
            let (spec, tau) = tau_args(t)?;
            let lift = ones_lift(&spec)?;
            let r = lib(exponent_matrix(&lift, &tau))?;
            let alpha = lib(alpha_matrix(&lift, &tau))?;
            let text = format!("{r}monomial: {}\n", render::monomial(&r));
            Output::new(&json!({ "R": r, "alpha": alpha }), text)
        }
        Command::Decompose { r } => {
            let r: ExponentMatrix = input::require("R", r.as_deref())?;
            let d = lib(birkhoff_pass(&r, &caps))?;
            Output::new(&d, render::decomposition(&d) + "\n")
        }
        Command::Alldecomp { r, degree } => {
            let r: ExponentMatrix = input::require("R", r.as_deref())?;
            if let Some(d) = degree {
                if *d != r.degree() {
                    return Err(format!("R has line sums {}, not --M {d}", r.degree()));
                }
            }
            let all = lib(all_decompositions(&r, &caps))?;
            let text = all.iter().map(|d| render::decomposition(d) + "\n").collect();
            Output::new(&all, text)
        }
        Command::Sameindex(t) => {
            let (spec, tau) = tau_args(t)?;
            let parts = lib(same_index_decompose(&ones_lift(&spec)?, &tau))?;
            let text = parts
                .iter()
                .map(|p| {
                    format!(
                        "k={} cols {:?} {}\n",
                        p.index,
                        p.col_of,
                        if p.legal { "legal" } else { "illegal" }
                    )
                })
                .collect();
            Output::new(&parts, text)
        }
        Command::Map(t) => {
            let (spec, tau) = tau_args(t)?;
            let trace = lib(standard_mapping_trace(&ones_lift(&spec)?, &tau, &caps))?;
            let mut text = format!("target: {}\ncandidates:\n", render::word(&trace.target));
            for c in &trace.candidates {
                let _ = writeln!(text, "  {}", render::word(c));
            }
            Output::new(&trace, text)
        }
        Command::Inject { spec } => {
            let spec: BlockPermutation = input::load("spec", spec.as_deref())?;
            let report = lib(verify_injectivity(&ones_lift(&spec)?, &caps))?;
            let text = format!(
                "products: {}\ntargets: {}\ncollisions: {}\nillegal targets that are products: {}\n",
                report.total_products,
                report.mapped_targets,
                report.collisions.len(),
                report.illegal_targets_that_are_products.len()
            );
            let bad = !report.is_injective();
            Output::new(&report, text).violated(bad)
        }
        Command::Poly { spec, power, m, degree } => {
            let poly = if *power {
                let (Some(m), Some(d)) = (m, degree) else {
                    return Err("--power needs --m and --M".into());
                };
                lib(theta_power_polynomial(*m, *d, &caps))?
            } else {
                let spec: BlockPermutation = input::load("spec", spec.as_deref())?;
                lib(lift_permanent_polynomial(&spec, &caps))?
            };
            Output::new(&poly, render::polynomial(&poly))
        }
        Command::Bound { r } => {
            let r: ExponentMatrix = input::require("R", r.as_deref())?;
            let count = lib(all_decompositions(&r, &caps))?.len();
            let b = lib(coefficient_upper_bound(&r, &caps))?.to_string();
            let text = format!("{}: bound {b} from {count} decompositions\n", render::monomial(&r));
            Output::new(&json!({ "R": r, "bound": b, "decompositions": count }), text)
        }
        Command::Dominate { spec } => {
            let spec: BlockPermutation = input::load("spec", spec.as_deref())?;
            let report = lib(verify_dominance(&spec, &caps))?;
            let mut text = format!("ok: {}\nkeys: {}\ntight: {}\n", report.ok, report.checked, report.tight);
            for v in &report.violations {
                let _ = writeln!(
                    text,
                    "violation: {} lift {} > bound {}",
                    render::monomial(&v.r),
                    v.lift_coeff,
                    v.bound_coeff
                );
            }
            let bad = !report.ok;
            Output::new(&report, text).violated(bad)
        }
        Command::Bethe {
            input,
            degree,
            samples,
            seed,
            chain,
        } => {
            let theta: Matrix = input::load("in", input.as_deref())?;
            match (samples, seed, chain) {
                (Some(_), _, true) => {
                    return Err("--chain checks every lift; it cannot be combined with --samples".into())
                }
                (Some(n), Some(s), false) => {
                    let r = lib(bethe_degree_mc(&theta, *degree, *n, *s, &caps))?;
                    let bad = !r.bound_holds || r.lifts_over_bound > 0;
                    Output::new(&r, bethe_text(&r)).violated(bad)
                }
                (Some(_), None, _) => return Err("sampling needs an explicit --seed".into()),
                (None, _, true) => {
                    let c = lib(verify_bethe_chain(&theta, *degree, &caps))?;
                    let text = bethe_text(&c.bethe)
                        + &format!(
                            "every lift bounded: {}\nmax attains bound: {}\n",
                            c.every_lift_bounded, c.max_attains_bound
                        );
                    let bad = !c.holds();
                    Output::new(&c, text).violated(bad)
                }
                (None, _, false) => {
                    let r = lib(bethe_degree_exact(&theta, *degree, &caps))?;
                    let bad = !r.bound_holds || r.lifts_over_bound > 0;
                    Output::new(&r, bethe_text(&r)).violated(bad)
                }
            }
        }
        Command::Fixtures { suite } => match suite.as_deref() {
            None | Some("") => Output::new(&SUITES, SUITES.iter().map(|s| format!("{s}\n")).collect()),
            Some("all") => {
                let reports = SUITES
                    .iter()
                    .map(|s| lib(run_suite(s, &caps).expect("listed suite")))
                    .collect::<Result<Vec<_>, _>>()?;
                let bad = reports.iter().any(|r| !r.passed());
                let text = reports.iter().map(suite_text).collect();
                Output::new(&reports, text).violated(bad)
            }
            Some(name) => {
                let report = run_suite(name, &caps)
                    .ok_or_else(|| format!("unknown suite `{name}`; available: {}", SUITES.join(", ")))?;
                let report = lib(report)?;
                let bad = !report.passed();
                Output::new(&report, suite_text(&report)).violated(bad)
            }
        },
    };
    Ok(out)
}

fn tau_args(t: &TauArgs) -> Result<(BlockPermutation, Permutation), String> {
    let spec: BlockPermutation = input::require("spec", t.spec.as_deref())?;
    let tau: Permutation = input::require("tau", t.tau.as_deref())?;
    Ok((spec, tau))
}

/// Structure-only lift: the operations on permanent-products ignore the
/// base entries.
fn ones_lift(spec: &BlockPermutation) -> Result<permlift::Lift, String> {
    lib(build_lift(&Matrix::ones(spec.m()), spec))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.pretty {
                print!("{}", out.text);
            } else {
                println!("{}", out.json);
            }
            if out.violated {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
