//! Command surface over the proof-term library: typing, diagrams, proof
//! equality, generality, normalisation passes, diversification, and the
//! batch checks (axiom soundness, adjunction laws, random-walk fuzzing).
//!
//! Every invocation writes one document to stdout.  With `--format json`
//! (the default) it is a JSON value; diagrams may instead be rendered as
//! DOT or ASCII.  Verdict commands speak through the exit code: 0 for a
//! positive answer, 1 for a negative one.  Failures exit with 2 for a
//! typing error, 3 for a parse error, 4 for a violated precondition and
//! 5 for an exhausted step budget, after printing an error document.

use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use lineq::analysis::{
    check_adjunction, check_star, decide_equal, diversify, same_generality, AdjunctionContext,
    AnalysisError,
};
use lineq::diagram::eval;
use lineq::proofterm::{random_term, Path, Theory, TypeError};
use lineq::rewrite::{
    applicable_steps, apply_equation, delta_sigma_purge, develop, r_normal, s_normal, sample_lhs,
    schemas, Derivation, Direction, PassError, SampleMode,
};
use lineq::syntax::{Formula, Term, Variable};
use lineq::text::{parse_arrow, ParseError};

#[derive(Parser)]
#[command(
    name = "lineq",
    about = "Proof terms for linear equality: typing, diagrams, equality and normal forms"
)]
struct Cli {
    /// Proof theory to work in: m-leq, s-leq, m-equiv, s-equiv, sdot-leq
    /// or sdot-equiv.
    #[arg(long, global = true)]
    theory: Option<String>,

    /// Output format for diagrams.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Seed for commands that sample random arrows.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Size budget for sampled arrows.
    #[arg(long, global = true, default_value_t = 10)]
    size: usize,

    /// Move budget override for the normalisation passes.
    #[arg(long, global = true)]
    budget: Option<u64>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Ascii,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Pass {
    /// Factorize into single-generator factors.
    Develop,
    /// Float reflexivities out and split them off.
    R,
    /// Purge unit introductions and eliminations.
    Ds,
    /// Cancel paired inversions.
    S,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the type of an arrow.
    Type { arrow: String },
    /// Print the diagram of an arrow.
    Diagram { arrow: String },
    /// Exit 0 when the two arrows denote the same proof, 1 otherwise.
    Eq { left: String, right: String },
    /// Exit 0 when two arrows of one type have the same generality.
    Generality { left: String, right: String },
    /// Run one normalisation pass, printing the result and its derivation.
    Normalize {
        #[arg(long, value_enum)]
        pass: Pass,
        arrow: String,
    },
    /// Relabel an arrow so its type uses every variable exactly twice.
    Diversify { arrow: String },
    /// Check every equation of the theory on sampled instances.
    Axioms,
    /// Check the variable-extension adjunction for a pair of variables.
    Adjoint {
        #[arg(long)]
        y: String,
        #[arg(long)]
        z: String,
    },
    /// Rewrite sampled arrows at random and verify their diagrams never
    /// move; reports the most loops any evaluation discarded.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        n: u64,
    },
    /// Exit 0 when every maximal sequence of the arrow's source meets both
    /// sides of each target atom or neither.
    Star { arrow: String },
}

enum Failure {
    Parse(ParseError),
    Type(TypeError),
    Precondition(String),
    Budget { budget: u64, used: u64 },
    Usage(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Type(_) | Failure::Usage(_) => 2,
            Failure::Parse(_) => 3,
            Failure::Precondition(_) => 4,
            Failure::Budget { .. } => 5,
        }
    }

    fn to_json(&self) -> Value {
        let (kind, message) = match self {
            Failure::Parse(e) => ("parse", e.to_string()),
            Failure::Type(e) => ("type", e.to_string()),
            Failure::Precondition(m) => ("precondition", m.clone()),
            Failure::Budget { budget, used } => (
                "budget",
                format!("step budget exhausted: {used} steps charged against {budget}"),
            ),
            Failure::Usage(m) => ("usage", m.clone()),
        };
        json!({ "error": { "kind": kind, "message": message } })
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Failure {
        Failure::Parse(e)
    }
}

impl From<TypeError> for Failure {
    fn from(e: TypeError) -> Failure {
        Failure::Type(e)
    }
}

impl From<PassError> for Failure {
    fn from(e: PassError) -> Failure {
        match e {
            PassError::Type(t) => Failure::Type(t),
            PassError::BudgetExceeded { budget, used } => Failure::Budget { budget, used },
            other => Failure::Precondition(other.to_string()),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Failure {
        match e {
            AnalysisError::Type(t) => Failure::Type(t),
            other => Failure::Precondition(other.to_string()),
        }
    }
}

enum Rendered {
    Json(Value),
    Raw(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((rendered, code)) => {
            match rendered {
                Rendered::Json(v) => {
                    println!("{}", serde_json::to_string_pretty(&v).expect("serialisable"))
                }
                Rendered::Raw(s) => print!("{s}"),
            }
            ExitCode::from(code)
        }
        Err(failure) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&failure.to_json()).expect("serialisable")
            );
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(Rendered, u8), Failure> {
    let theory = cli
        .theory
        .as_deref()
        .ok_or_else(|| Failure::Usage("--theory is required".into()))
        .and_then(|s| Theory::from_str(s).map_err(Failure::Usage))?;
    match &cli.command {
        Cmd::Type { arrow } => {
            let f = parse_arrow(arrow)?;
            let ty = f.infer_type(theory)?;
            let value = json!({
                "source": ty.source.to_string(),
                "target": ty.target.to_string(),
            });
            Ok((Rendered::Json(value), 0))
        }
        Cmd::Diagram { arrow } => {
            let f = parse_arrow(arrow)?;
            let d = eval(&f, theory)?;
            let rendered = match cli.format {
                Format::Json => Rendered::Json(d.to_json()),
                Format::Dot => Rendered::Raw(d.to_dot()),
                Format::Ascii => Rendered::Raw(d.to_ascii()),
            };
            Ok((rendered, 0))
        }
        Cmd::Eq { left, right } => {
            let f = parse_arrow(left)?;
            let g = parse_arrow(right)?;
            let equal = decide_equal(&f, &g, theory)?;
            let value = json!({ "equal": equal });
            Ok((Rendered::Json(value), u8::from(!equal)))
        }
        Cmd::Generality { left, right } => {
            let f = parse_arrow(left)?;
            let g = parse_arrow(right)?;
            let same = same_generality(&f, &g, theory)?;
            let value = json!({ "same_generality": same });
            Ok((Rendered::Json(value), u8::from(!same)))
        }
        Cmd::Normalize { pass, arrow } => {
            let f = parse_arrow(arrow)?;
            let value = match pass {
                Pass::Develop => {
                    let (result, d) = develop(&f, theory, cli.budget)?;
                    json!({
                        "pass": "develop",
                        "result": result.to_string(),
                        "derivation": derivation_json(&d),
                    })
                }
                Pass::R => {
                    let (reflexive, rest, d) = r_normal(&f, theory, cli.budget)?;
                    json!({
                        "pass": "r",
                        "reflexive_part": reflexive.to_string(),
                        "rest": rest.to_string(),
                        "derivation": derivation_json(&d),
                    })
                }
                Pass::Ds => {
                    let (result, d) = delta_sigma_purge(&f, theory, cli.budget)?;
                    json!({
                        "pass": "ds",
                        "result": result.to_string(),
                        "derivation": derivation_json(&d),
                    })
                }
                Pass::S => {
                    let (result, d) = s_normal(&f, theory, cli.budget)?;
                    json!({
                        "pass": "s",
                        "result": result.to_string(),
                        "derivation": derivation_json(&d),
                    })
                }
            };
            Ok((Rendered::Json(value), 0))
        }
        Cmd::Diversify { arrow } => {
            let f = parse_arrow(arrow)?;
            let (g, back) = diversify(&f, theory)?;
            let renaming: serde_json::Map<String, Value> = back
                .iter()
                .map(|(fresh, original)| (fresh.name().to_string(), json!(original.name())))
                .collect();
            let value = json!({ "arrow": g.to_string(), "renaming": renaming });
            Ok((Rendered::Json(value), 0))
        }
        Cmd::Axioms => {
            let mut rows = Vec::new();
            let mut all_ok = true;
            for schema in schemas(theory) {
                let mut ok = true;
                let modes = [SampleMode::Distinct, SampleMode::Collapsed, SampleMode::Mixed];
                for mode in modes {
                    let lhs = sample_lhs(schema, theory, mode);
                    let sound = match apply_equation(
                        &lhs,
                        theory,
                        schema.name,
                        &Path::root(),
                        Direction::L2R,
                    ) {
                        Ok(rhs) => decide_equal(&lhs, &rhs, theory)?,
                        Err(_) => false,
                    };
                    ok &= sound;
                }
                all_ok &= ok;
                rows.push(json!({ "name": schema.name, "samples": modes.len(), "ok": ok }));
            }
            let value = json!({ "theory": theory.name(), "axioms": rows, "all_ok": all_ok });
            Ok((Rendered::Json(value), u8::from(!all_ok)))
        }
        Cmd::Adjoint { y, z } => {
            let ctx = AdjunctionContext::new(Variable::new(y), Variable::new(z), theory)?;
            let report = check_adjunction(&ctx, &adjoint_samples(&ctx))?;
            let all = report.all_hold();
            Ok((Rendered::Json(report.to_json()), u8::from(!all)))
        }
        Cmd::Fuzz { n } => {
            let vars = [Variable::new("x"), Variable::new("u"), Variable::new("w")];
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut max_loops = 0u64;
            let mut failures = 0u64;
            for i in 0..*n {
                let start = random_term(theory, cli.size, cli.seed.wrapping_add(i), &vars);
                let ty = start.infer_type(theory)?;
                let reference = eval(&start, theory)?;
                max_loops = max_loops.max(reference.loops_discarded());
                let mut current = start;
                for _ in 0..4 {
                    let steps = applicable_steps(&current, theory);
                    if steps.is_empty() {
                        break;
                    }
                    let (name, path, dir) = steps[rng.gen_range(0..steps.len())].clone();
                    current = apply_equation(&current, theory, name, &path, dir)
                        .expect("enumerated steps apply");
                    let d = eval(&current, theory)?;
                    max_loops = max_loops.max(d.loops_discarded());
                    if current.infer_type(theory)? != ty || !d.same_matching(&reference) {
                        failures += 1;
                        break;
                    }
                }
            }
            let value = json!({
                "n": n,
                "seed": cli.seed,
                "size": cli.size,
                "max_loops_discarded": max_loops,
                "soundness_failures": failures,
            });
            Ok((Rendered::Json(value), u8::from(failures != 0)))
        }
        Cmd::Star { arrow } => {
            let f = parse_arrow(arrow)?;
            let ok = check_star(&f, theory)?;
            Ok((Rendered::Json(json!({ "star": ok })), u8::from(!ok)))
        }
    }
}

fn derivation_json(d: &Derivation) -> Value {
    let steps: Vec<Value> = d
        .steps
        .iter()
        .map(|s| {
            let dir = match s.direction {
                Direction::L2R => "L2R",
                Direction::R2L => "R2L",
            };
            json!({
                "equation": s.equation,
                "path": s.path.to_string(),
                "dir": dir,
                "result": s.result.to_string(),
            })
        })
        .collect();
    json!({ "start": d.start.to_string(), "steps": steps, "length": d.len() })
}

/// A small object sample for the adjunction checks, over variables other
/// than the two context variables.
fn adjoint_samples(ctx: &AdjunctionContext) -> Vec<Formula> {
    let rel = ctx.theory().relation();
    let pool: Vec<Variable> = ["x", "u", "w", "p", "q"]
        .iter()
        .map(|n| Variable::new(n))
        .filter(|v| v != ctx.y() && v != ctx.z())
        .take(3)
        .collect();
    let atom = |a: &Variable, b: &Variable| {
        Formula::atom(rel, Term::Var(a.clone()), Term::Var(b.clone()))
    };
    vec![
        Formula::Top,
        atom(&pool[0], &pool[0]),
        Formula::conj(atom(&pool[0], &pool[1]), Formula::Top),
        Formula::conj(atom(&pool[0], &pool[1]), atom(&pool[1], &pool[2])),
    ]
}
