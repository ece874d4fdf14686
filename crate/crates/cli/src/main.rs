//! Command-line surface over the overtake library: load and validate
//! instances, emit curves and reports, certify dominance horizons, run the
//! worked-example claims, and sample seeded generic instances.
//!
//! Exit status: 0 on success, 1 on validation or input failure, 2 on usage
//! errors. All output is deterministic for fixed inputs and seeds.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use overtake::blackwell::{blackwell_optimal, to_average_mdp};
use overtake::casebook::{check_claims, claims_to_json};
use overtake::evaluate::{compare, reach_curve_plan, ReachCurve};
use overtake::horizon::certified_horizon;
use overtake::mdp::sample_generic;
use overtake::spectral::{best_pure_stationary, genericity_check};
use overtake::strategy::{MarkovPlan, StationaryStrategy};
use overtake::{Mdp, Objective};

#[derive(Parser)]
#[command(
    name = "overtake",
    about = "Reach/safety curve analysis of finite MDPs under overtaking optimality",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArg {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ObjectiveArg {
    /// Override the objective stored in the instance (reach or safety).
    #[arg(long)]
    objective: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file and print its validation report.
    Validate {
        mdp: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Reach curve of a strategy or plan from one initial state, as CSV.
    Curve {
        mdp: PathBuf,
        /// Strategy or plan JSON (objects with "rows" are plans).
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        horizon: usize,
        #[command(flatten)]
        objective: ObjectiveArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Overtaking verdict between two strategies on a window, as JSON.
    Compare {
        mdp: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        from: String,
        /// Comparison window T0:T1 (1-based, inclusive).
        #[arg(long)]
        window: String,
        #[arg(long, default_value_t = 1e-10)]
        eq_tol: f64,
        #[command(flatten)]
        objective: ObjectiveArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Per-pure-strategy spectral report, as CSV.
    Spectral {
        mdp: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        gap_tol: f64,
        #[command(flatten)]
        objective: ObjectiveArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Spectrally selected pure stationary strategy, as JSON.
    Best {
        mdp: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        gap_tol: f64,
        #[command(flatten)]
        objective: ObjectiveArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Certified dominance horizon for a pair of strategies, as JSON.
    Horizon {
        mdp: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        objective: ObjectiveArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Blackwell-optimal strategy of a deterministic instance, as JSON.
    Blackwell {
        mdp: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Re-derive the worked-example claims, as a JSON report.
    Casebook {
        #[arg(long, default_value_t = 300)]
        horizon: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Sample a seeded generic instance, as JSON.
    Sample {
        #[arg(long)]
        states: usize,
        #[arg(long)]
        actions: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        concentration: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

struct Failure(String);

impl From<overtake::Error> for Failure {
    fn from(e: overtake::Error) -> Failure {
        Failure(e.to_string())
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))
}

fn load_mdp(path: &Path, objective: &ObjectiveArg) -> Result<Mdp, Failure> {
    let text = read_file(path)?;
    let mdp = Mdp::from_json_str(&text)
        .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    Ok(match objective.objective.as_deref() {
        None => mdp,
        Some("reach") => mdp.with_objective(Objective::Reach),
        Some("safety") => mdp.with_objective(Objective::Safety),
        Some(other) => {
            return Err(Failure(format!(
                "unknown objective override {other}; expected reach or safety"
            )))
        }
    })
}

fn load_plan(path: &Path, mdp: &Mdp) -> Result<MarkovPlan, Failure> {
    let text = read_file(path)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure(format!("{}: not valid JSON: {e}", path.display())))?;
    let plan = if value.get("rows").is_some() {
        MarkovPlan::from_json(mdp, &value)
    } else {
        StationaryStrategy::from_json(mdp, &value).map(MarkovPlan::stationary)
    };
    plan.map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_strategy(path: &Path, mdp: &Mdp) -> Result<StationaryStrategy, Failure> {
    let text = read_file(path)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure(format!("{}: not valid JSON: {e}", path.display())))?;
    StationaryStrategy::from_json(mdp, &value)
        .map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn emit(out: &OutArg, content: &str) -> Result<(), Failure> {
    match &out.out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => fs::write(path, content)
            .map_err(|e| Failure(format!("cannot write {}: {e}", path.display()))),
    }
}

fn parse_window(text: &str) -> Result<(usize, usize), Failure> {
    let (t0, t1) = text
        .split_once(':')
        .ok_or_else(|| Failure(format!("window {text} is not of the form T0:T1")))?;
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Failure(format!("window bound {s} is not a period")))
    };
    Ok((parse(t0)?, parse(t1)?))
}

fn curve_from(
    mdp: &Mdp,
    plan: &MarkovPlan,
    from: &str,
    horizon: usize,
) -> Result<ReachCurve, Failure> {
    let s0 = mdp.state_index(from)?;
    Ok(reach_curve_plan(mdp, plan, s0, horizon)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { mdp, out } => {
            let text = read_file(&mdp)?;
            let instance = Mdp::from_json_str(&text)
                .map_err(|e| Failure(format!("{}: {e}", mdp.display())))?;
            let report = instance.validate();
            let mut rendered = String::new();
            let _ = writeln!(
                rendered,
                "{}",
                json!({
                    "ok": report.ok,
                    "issues": report.issues,
                    "determinism": report.determinism,
                    "positivity": report.positivity,
                })
            );
            emit(&out, &rendered)?;
            if !report.ok {
                let (state, issue) = &report.issues[0];
                return Err(Failure(format!(
                    "{}: invalid instance: state {state}: {issue}",
                    mdp.display()
                )));
            }
            Ok(())
        }
        Command::Curve {
            mdp,
            strategy,
            from,
            horizon,
            objective,
            out,
        } => {
            let instance = load_mdp(&mdp, &objective)?;
            let plan = load_plan(&strategy, &instance)?;
            let curve = curve_from(&instance, &plan, &from, horizon)?;
            emit(&out, &curve.to_csv())
        }
        Command::Compare {
            mdp,
            a,
            b,
            from,
            window,
            eq_tol,
            objective,
            out,
        } => {
            let instance = load_mdp(&mdp, &objective)?;
            let window = parse_window(&window)?;
            let plan_a = load_plan(&a, &instance)?;
            let plan_b = load_plan(&b, &instance)?;
            let curve_a = curve_from(&instance, &plan_a, &from, window.1)?;
            let curve_b = curve_from(&instance, &plan_b, &from, window.1)?;
            let verdict = compare(&curve_a, &curve_b, window, instance.objective(), eq_tol)?;
            emit(&out, &format!("{}\n", verdict.to_json()))
        }
        Command::Spectral {
            mdp,
            gap_tol,
            objective,
            out,
        } => {
            let instance = load_mdp(&mdp, &objective)?;
            let report = genericity_check(&instance, gap_tol)?;
            emit(&out, &report.to_csv())
        }
        Command::Best {
            mdp,
            gap_tol,
            objective,
            out,
        } => {
            let instance = load_mdp(&mdp, &objective)?;
            let (sigma, report) = best_pure_stationary(&instance, gap_tol)?;
            let rendered = json!({
                "strategy": sigma.to_json(&instance),
                "lambda2": report.rows[report.selected].lambda2,
                "selected": report.selected,
                "generic": report.generic,
            });
            emit(&out, &format!("{rendered}\n"))
        }
        Command::Horizon {
            mdp,
            a,
            b,
            objective,
            out,
        } => {
            let instance = load_mdp(&mdp, &objective)?;
            let sigma = load_strategy(&a, &instance)?;
            let sigma2 = load_strategy(&b, &instance)?;
            let certificate = certified_horizon(&instance, &sigma, &sigma2)?;
            emit(&out, &format!("{}\n", certificate.to_json()))
        }
        Command::Blackwell { mdp, out } => {
            let instance = load_mdp(&mdp, &ObjectiveArg { objective: None })?;
            let avg = to_average_mdp(&instance)?;
            let sigma = blackwell_optimal(&avg)?;
            emit(&out, &format!("{}\n", sigma.to_json(&instance)))
        }
        Command::Casebook { horizon, out } => {
            let claims = check_claims(horizon);
            emit(&out, &format!("{}\n", claims_to_json(&claims)))
        }
        Command::Sample {
            states,
            actions,
            seed,
            concentration,
            out,
        } => {
            let mdp = sample_generic(states, actions, seed, concentration)?;
            emit(&out, &format!("{}\n", mdp.to_json()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
