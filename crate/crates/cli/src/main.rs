//! `courant-lift`: evaluate Dorfman brackets, their lifts to the total space,
//! and run the seeded checkers.
//!
//! Exit status: 0 when the check holds, 1 when it fails (the report carries a
//! witness), 2 on malformed input.

mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use courant_core::brackets::diagnostics::jacobi_diagnostics;
use courant_core::brackets::{BracketSpec, CATALOG};
use courant_core::bundle::{Bracket, BundleContext};
use courant_core::json::{
    context_to_json, generalized_to_json, kform_decomp_to_json, linear_decomp_to_json, section_to_json, sorted,
};
use courant_core::lift::{build_lift, check_main2, check_natural, check_symmetry, check_twist, LiftReport};
use courant_core::sampling::SamplePlan;
use courant_core::scalar::{FourierPoly, Rational};
use courant_core::torus::{is_local_witness, nonlocal_bracket, torus_jacobi_search, TorusSection};
use courant_core::total_space::{decompose_linear, decompose_linear_kform};
use courant_core::Error;

use input::ContextFlags;

const SEED_ENV: &str = "COURANT_LIFT_SEED";

#[derive(Parser, Debug)]
#[command(name = "courant-lift", version, about = "Dorfman brackets, their lifts and the checkers")]
struct Cli {
    /// Emit the JSON report (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    json: bool,
    /// Emit a human-readable summary instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ContextArgs {
    /// Dimension of the base ℝⁿ.
    #[arg(long)]
    n: Option<usize>,
    /// Fibre rank, for a generic fibre.
    #[arg(long)]
    r: Option<usize>,
    /// generic, e7 or wedge:k1,k2,…
    #[arg(long = "fiber-model")]
    fiber_model: Option<String>,
}

impl ContextArgs {
    fn flags(&self) -> ContextFlags {
        ContextFlags {
            n: self.n,
            r: self.r,
            fiber: self.fiber_model.clone(),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct BracketArgs {
    /// Catalog name: courant-dorfman, forms:k, mixed:k,j, e7, lie-only.
    #[arg(long)]
    bracket: String,
    /// E*-valued 2-form files added to the bracket as twists.
    #[arg(long = "twist")]
    twists: Vec<PathBuf>,
    #[command(flatten)]
    context: ContextArgs,
}

impl BracketArgs {
    fn resolve(&self) -> Result<BracketSpec> {
        input::bracket(&self.bracket, &self.context.flags(), &self.twists)
    }
}

#[derive(Args, Debug, Clone)]
struct PlanArgs {
    /// Overridden by the COURANT_LIFT_SEED environment variable when set.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long = "max-degree", default_value_t = 2)]
    max_degree: u32,
    /// Skip the pass over degree ≤ 1 monomial generators.
    #[arg(long = "random-only")]
    random_only: bool,
}

impl PlanArgs {
    fn plan(&self) -> Result<SamplePlan> {
        Ok(SamplePlan {
            seed: resolve_seed(self.seed)?,
            trials: self.trials,
            max_degree: self.max_degree,
            exhaustive: !self.random_only,
        })
    }
}

fn resolve_seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) if !v.trim().is_empty() => v.trim().parse().with_context(|| format!("{SEED_ENV}={v:?}")),
        _ => Ok(flag),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the catalog brackets and their fibres.
    Catalog,
    /// Evaluate ⟦s1, s2⟧.
    BracketEval {
        #[command(flatten)]
        bracket: BracketArgs,
        s1: PathBuf,
        s2: PathBuf,
    },
    /// Leibniz, anchor and Jacobi diagnostics.
    JacobiCheck {
        #[command(flatten)]
        bracket: BracketArgs,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// The lift of a section to the total space of E.
    Lift {
        #[command(flatten)]
        bracket: BracketArgs,
        #[arg(long)]
        section: PathBuf,
    },
    /// Run a lift checker.
    Check {
        #[arg(value_enum)]
        which: CheckKind,
        #[command(flatten)]
        bracket: BracketArgs,
        #[command(flatten)]
        plan: PlanArgs,
        /// E*-valued 2-form, for `check twist`.
        #[arg(long)]
        mu: Option<PathBuf>,
        /// E*-valued 1-form, for `check symmetry`.
        #[arg(long)]
        beta: Option<PathBuf>,
    },
    /// Jacobiator and locality checks for the non-local bracket on T².
    TorusCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long = "max-frequency", default_value_t = 3)]
        max_frequency: i64,
    },
    /// Split a linear section of TE ⊕ T*E into (d, ε, φ).
    DecomposeLinear {
        #[command(flatten)]
        context: ContextArgs,
        section: PathBuf,
    },
    /// Split a linear form on E into dΛ_μ + Λ_ω.
    DecomposeKform {
        #[command(flatten)]
        context: ContextArgs,
        form: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum CheckKind {
    Natural,
    Main2,
    Twist,
    Symmetry,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Output {
    Json,
    Pretty,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Serialize)]
struct RunConfig {
    command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    context: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bracket: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_degree: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exhaustive: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_frequency: Option<i64>,
    inputs: Vec<String>,
    output: Output,
}

impl RunConfig {
    fn new(command: &str, output: Output) -> Self {
        RunConfig {
            command: command.into(),
            context: None,
            bracket: None,
            seed: None,
            trials: None,
            max_degree: None,
            exhaustive: None,
            max_frequency: None,
            inputs: Vec::new(),
            output,
        }
    }

    fn with_bracket(mut self, br: &BracketSpec, args: &BracketArgs) -> Self {
        self.context = Some(context_to_json(br.context()));
        self.bracket = Some(json!({
            "name": args.bracket,
            "twists": args.twists.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        }));
        self
    }

    fn with_plan(mut self, plan: &SamplePlan) -> Self {
        self.seed = Some(plan.seed);
        self.trials = Some(plan.trials);
        self.max_degree = Some(plan.max_degree);
        self.exhaustive = Some(plan.exhaustive);
        self
    }

    fn with_inputs<'a>(mut self, paths: impl IntoIterator<Item = &'a PathBuf>) -> Self {
        self.inputs.extend(paths.into_iter().map(|p| p.display().to_string()));
        self
    }
}

/// A finished run: the JSON report, a pretty rendering and the verdict.
struct Outcome {
    config: RunConfig,
    holds: Option<bool>,
    result: Value,
    pretty: String,
}

impl Outcome {
    fn exit_code(&self) -> u8 {
        match self.holds {
            Some(false) => 1,
            _ => 0,
        }
    }

    fn report(&self) -> Value {
        let mut report = json!({
            "config": serde_json::to_value(&self.config).expect("config serializes"),
            "result": self.result,
        });
        if let Some(h) = self.holds {
            report["holds"] = json!(h);
        }
        sorted(report)
    }
}

fn verdict_line(holds: bool) -> &'static str {
    if holds {
        "holds"
    } else {
        "FAILS"
    }
}

fn pretty_json(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

fn lift_outcome(config: RunConfig, title: String, report: &LiftReport) -> Outcome {
    let result = serde_json::to_value(report).expect("report serializes");
    let mut pretty = format!("{title}: {}\n", verdict_line(report.holds));
    let c = &report.coverage;
    pretty += &format!("  random trials {}, coefficient degree ≤ {}", c.random_trials, c.max_degree);
    if let Some(status) = c.generator_status {
        pretty += &format!(", {} generator pairs ({status})", c.generator_pairs);
    }
    pretty.push('\n');
    for (name, v) in &report.checks {
        pretty += &format!("  {name}: {}\n", verdict_line(v.holds()));
    }
    if let Some(w) = &report.witness {
        pretty += &format!("witness:\n{}\n", pretty_json(w));
    }
    Outcome {
        config,
        holds: Some(report.holds),
        result,
        pretty,
    }
}

fn describe(br: &BracketSpec) -> String {
    let ctx = br.context();
    format!("{} over ℝ^{} (fibre {}, rank {})", br.name(), ctx.n(), ctx.fiber(), ctx.r())
}

fn run(cli: &Cli) -> Result<Outcome> {
    let output = if cli.pretty { Output::Pretty } else { Output::Json };
    match &cli.command {
        Command::Catalog => {
            let fibres = ["∧¹TM", "∧ᵏTM", "∧ᵏTM ⊕ ∧ʲTM ⊕ ∧ᵏ⁺ʲ⁺¹TM", "∧²TM ⊕ ∧⁵TM ⊕ (∧⁷TM ⊗ TM)", "∧¹TM"];
            let entries: Vec<Value> = CATALOG
                .iter()
                .zip(fibres)
                .map(|(name, fibre)| json!({"name": name, "fiber": fibre}))
                .collect();
            let pretty = entries
                .iter()
                .map(|e| format!("{:<16} E = {}\n", e["name"].as_str().unwrap(), e["fiber"].as_str().unwrap()))
                .collect();
            Ok(Outcome {
                config: RunConfig::new("catalog", output),
                holds: None,
                result: json!(entries),
                pretty,
            })
        }
        Command::BracketEval { bracket, s1, s2 } => {
            let br = bracket.resolve()?;
            let ctx = br.context();
            let (a, b) = (input::section(ctx, s1)?, input::section(ctx, s2)?);
            let out = br.try_eval(&a, &b)?;
            Ok(Outcome {
                config: RunConfig::new("bracket-eval", output).with_bracket(&br, bracket).with_inputs([s1, s2]),
                holds: None,
                result: section_to_json(&out),
                pretty: format!("{}\n", out.render(ctx)),
            })
        }
        Command::JacobiCheck { bracket, plan } => {
            let br = bracket.resolve()?;
            let plan = plan.plan()?;
            let report = jacobi_diagnostics(&br, &plan);
            let holds = report.holds();
            let result = serde_json::to_value(&report).expect("report serializes");
            let mut pretty = format!("Jacobi identity for {}: {}\n", describe(&br), verdict_line(holds));
            for key in ["leibniz2", "anchor", "jacobi", "diag1", "diag2"] {
                let ok = result[key] == json!("pass");
                pretty += &format!("  {key}: {}\n", verdict_line(ok));
                if !ok {
                    pretty += &format!("{}\n", pretty_json(&result[key]));
                }
            }
            Ok(Outcome {
                config: RunConfig::new("jacobi-check", output).with_bracket(&br, bracket).with_plan(&plan),
                holds: Some(holds),
                result,
                pretty,
            })
        }
        Command::Lift { bracket, section } => {
            let br = bracket.resolve()?;
            let ctx = br.context();
            let nu = input::section(ctx, section)?;
            let xi = build_lift(&br, &nu);
            let dec = decompose_linear(ctx, &xi)?;
            Ok(Outcome {
                config: RunConfig::new("lift", output).with_bracket(&br, bracket).with_inputs([section]),
                holds: None,
                result: json!({"lift": generalized_to_json(&xi), "decomposition": linear_decomp_to_json(&dec)}),
                pretty: format!("Ξ{} = {}\n", nu.render(ctx), xi.render(ctx)),
            })
        }
        Command::Check {
            which,
            bracket,
            plan,
            mu,
            beta,
        } => {
            let br = bracket.resolve()?;
            let plan = plan.plan()?;
            let name = serde_json::to_value(which).expect("kind serializes");
            let mut config = RunConfig::new(&format!("check {}", name.as_str().unwrap()), output)
                .with_bracket(&br, bracket)
                .with_plan(&plan);
            let title = format!("{} for {}", name.as_str().unwrap(), describe(&br));
            let report = match which {
                CheckKind::Natural => check_natural(&br, &plan),
                CheckKind::Main2 => check_main2(&br, &plan),
                CheckKind::Twist => {
                    let path = mu.as_ref().context("check twist needs --mu")?;
                    config = config.with_inputs([path]);
                    let mu = input::vvf(&br, path, 2)?;
                    match check_twist(&br, &mu, &plan) {
                        Err(Error::NotDorfman(w)) => return Ok(not_dorfman(config, &title, w)),
                        r => r?,
                    }
                }
                CheckKind::Symmetry => {
                    let path = beta.as_ref().context("check symmetry needs --beta")?;
                    config = config.with_inputs([path]);
                    let beta = input::vvf(&br, path, 1)?;
                    match check_symmetry(&br, &beta, &plan) {
                        Err(Error::NotDorfman(w)) => return Ok(not_dorfman(config, &title, w)),
                        r => r?,
                    }
                }
            };
            Ok(lift_outcome(config, title, &report))
        }
        Command::TorusCheck {
            seed,
            trials,
            max_frequency,
        } => {
            let seed = resolve_seed(*seed)?;
            let mut config = RunConfig::new("torus-check", output);
            config.seed = Some(seed);
            config.trials = Some(*trials);
            config.max_frequency = Some(*max_frequency);
            Ok(torus_outcome(config, seed, *trials, *max_frequency))
        }
        Command::DecomposeLinear { context, section } => {
            let ctx = context.flags().standalone()?;
            let chi = input::generalized(&ctx, section)?;
            let config = RunConfig::new("decompose-linear", output).with_inputs([section]);
            Ok(decomposition(config, &ctx, decompose_linear(&ctx, &chi).map(|d| linear_decomp_to_json(&d))))
        }
        Command::DecomposeKform { context, form } => {
            let ctx = context.flags().standalone()?;
            let h = input::total_form(&ctx, form)?;
            let config = RunConfig::new("decompose-kform", output).with_inputs([form]);
            Ok(decomposition(config, &ctx, decompose_linear_kform(&ctx, &h).map(|d| kform_decomp_to_json(&d))))
        }
    }
}

fn not_dorfman(config: RunConfig, title: &str, witness: String) -> Outcome {
    Outcome {
        config,
        holds: Some(false),
        result: json!({"error": "bracket is not a Dorfman bracket", "witness": witness}),
        pretty: format!("{title}: FAILS\n  the bracket itself is not a Dorfman bracket\n  witness: {witness}\n"),
    }
}

/// Non-linear inputs are a failed check, not an input error.
fn decomposition(mut config: RunConfig, ctx: &BundleContext, res: courant_core::Result<Value>) -> Outcome {
    config.context = Some(context_to_json(ctx));
    match res {
        Ok(v) => Outcome {
            config,
            holds: Some(true),
            pretty: format!("linear\n{}\n", pretty_json(&v)),
            result: v,
        },
        Err(e) => Outcome {
            config,
            holds: Some(false),
            result: json!({"reason": e.to_string()}),
            pretty: format!("not linear: {e}\n"),
        },
    }
}

fn torus_outcome(config: RunConfig, seed: u64, trials: u64, max_frequency: i64) -> Outcome {
    let jacobi = torus_jacobi_search(seed, trials, max_frequency.max(0));
    let one = FourierPoly::constant(Rational::ONE);
    let f = FourierPoly::cos(1, 0, Rational::ONE);
    let ex = TorusSection::from_coeffs(one.clone(), FourierPoly::zero(), FourierPoly::zero());
    let vol = TorusSection::from_coeffs(FourierPoly::zero(), FourierPoly::zero(), one);
    let defect = nonlocal_bracket(&ex.mul_fn(&f), &vol).sub(&nonlocal_bracket(&ex, &vol).mul_fn(&f));
    let witness = is_local_witness(max_frequency);
    let holds = jacobi.is_none() && !defect.is_zero();
    let jacobi_json = match &jacobi {
        None => json!("pass"),
        Some((t, s, j)) => json!({
            "witness": {
                "trial": t,
                "sections": s.iter().map(TorusSection::to_json).collect::<Vec<_>>(),
                "jacobiator": j.to_json(),
            }
        }),
    };
    let result = json!({
        "jacobi": jacobi_json,
        "first_slot_defect": defect.to_json(),
        "first_slot_linear": defect.is_zero(),
        "locality_witness": witness.as_ref().map_or(json!("none found"), |w| w.to_json()),
    });
    let mut pretty = format!("torus Jacobiator over {trials} trials: {}\n", verdict_line(jacobi.is_none()));
    pretty += &format!("  first slot C^∞-linear: {}\n", defect.is_zero());
    pretty += &match &witness {
        Some(w) => format!(
            "  locality witness: jets agree to order {}, bracket values {} vs {}\n",
            w.jet_order, w.values.0, w.values.1
        ),
        None => format!("  locality witness: none found at frequency ≤ {max_frequency}\n"),
    };
    Outcome {
        config,
        holds: Some(holds),
        result,
        pretty,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if cli.pretty {
                print!("{}", outcome.pretty);
            } else {
                println!("{}", serde_json::to_string(&outcome.report()).expect("report serializes"));
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
