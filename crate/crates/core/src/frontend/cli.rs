use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::battery::{self, PolyShape, DEFAULT_SEED};
use crate::diffpoly::DiffPoly;
use crate::error::Result;
use crate::frontend::parse::{parse_equation, parse_operator, parse_series};
use crate::frontend::report::{ErrorClass, Report, Status};
use crate::laurent::Verdict;
use crate::linops::{self, LinOp, Space};
use crate::loopspace::{self, Window};
use crate::varcalc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    Disc,
    Punctured,
}

#[derive(Debug, Parser)]
#[command(
    name = "varcheck",
    version,
    about = "Variational tests for differential equations over Q((z))"
)]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Read inputs from a file, one per line; `#` starts a comment.
    #[arg(long, global = true)]
    pub file: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Variational derivative.
    Delta {
        #[arg(allow_hyphen_values = true)]
        equation: Option<String>,
    },
    /// Helmholtz integrability conditions.
    Helmholtz {
        #[arg(allow_hyphen_values = true)]
        equation: Option<String>,
    },
    /// Vainberg-Tonti Lagrangian.
    Lagrangian {
        #[arg(allow_hyphen_values = true)]
        equation: Option<String>,
        /// Print the candidate even when it does not reproduce the equation.
        #[arg(long)]
        force: bool,
    },
    /// Whether the input is a total z-derivative.
    TotalDerivative {
        #[arg(allow_hyphen_values = true)]
        equation: Option<String>,
    },
    /// Linearisation at a series.
    Linearize {
        #[arg(allow_hyphen_values = true)]
        equation: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Formal adjoint of an operator `a0; a1; ...`.
    Adjoint {
        #[arg(long, allow_hyphen_values = true)]
        op: Option<String>,
    },
    /// Whether an operator equals its formal adjoint.
    SelfAdjoint {
        #[arg(long, allow_hyphen_values = true)]
        op: Option<String>,
    },
    /// Tangent cohomology dimensions of the linearisation.
    Tangent {
        #[arg(allow_hyphen_values = true)]
        equation: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, value_enum, default_value_t = SpaceArg::Disc)]
        space: SpaceArg,
        #[arg(long, default_value_t = 16)]
        window: i64,
    },
    /// Loop-space coefficients D_n.
    Expand {
        #[arg(allow_hyphen_values = true)]
        equation: Option<String>,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_window)]
        window: (i64, i64),
        #[arg(long, allow_hyphen_values = true)]
        coeff: Option<i64>,
    },
    /// Coefficient-symmetry (closedness) check.
    Symplectic {
        #[arg(allow_hyphen_values = true)]
        equation: Option<String>,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_window)]
        window: (i64, i64),
    },
    /// Euler-Lagrange coefficient identity.
    ElCheck {
        #[arg(allow_hyphen_values = true)]
        equation: Option<String>,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_window)]
        window: (i64, i64),
    },
    /// Residue of a Laurent series.
    Residue {
        #[arg(allow_hyphen_values = true)]
        series: Option<String>,
    },
    /// Quadratic action (1/2) Σ a_i y y^(i) of an operator.
    Action {
        #[arg(long, allow_hyphen_values = true)]
        op: Option<String>,
    },
    /// Randomized identity checks (δ∘∂_z = 0, adjointness) driven by --seed.
    Selfcheck {
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
}

fn parse_window(s: &str) -> std::result::Result<(i64, i64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected <low>:<high>, got {s:?}"))?;
    let low = a
        .trim()
        .parse::<i64>()
        .map_err(|e| format!("bad low bound: {e}"))?;
    let high = b
        .trim()
        .parse::<i64>()
        .map_err(|e| format!("bad high bound: {e}"))?;
    Ok((low, high))
}

/// Everything a caller needs after a CLI invocation.
#[derive(Debug)]
pub struct Outcome {
    pub reports: Vec<Report>,
    pub exit_code: i32,
    pub rendered: String,
}

pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            return Outcome {
                reports: Vec::new(),
                exit_code: code,
                rendered: e.render().to_string(),
            };
        }
    };
    let reports = match inputs(&cli) {
        Ok(inputs) => inputs
            .iter()
            .map(|input| run_one(&cli, input.as_deref()))
            .collect(),
        Err(message) => vec![Report::usage_error(
            command_name(&cli.command),
            None,
            &message,
            ErrorClass::Usage,
        )],
    };
    let exit_code = combine_exit_codes(reports.iter().map(Report::exit_code));
    let rendered = render(&reports, cli.format, cli.file.is_some());
    Outcome {
        reports,
        exit_code,
        rendered,
    }
}

fn combine_exit_codes<I: Iterator<Item = i32>>(codes: I) -> i32 {
    // Usage errors dominate, then window problems, then failures.
    codes
        .max_by_key(|&c| match c {
            2 => 3,
            3 => 2,
            1 => 1,
            _ => 0,
        })
        .unwrap_or(0)
}

fn render(reports: &[Report], format: Format, many: bool) -> String {
    match format {
        Format::Json => {
            let value = if many {
                Value::Array(reports.iter().map(Report::to_json).collect())
            } else {
                reports.first().map(Report::to_json).unwrap_or(Value::Null)
            };
            format!("{}\n", serde_json::to_string_pretty(&value).expect("json"))
        }
        Format::Text => reports.iter().map(Report::to_text).collect(),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Delta { .. } => "delta",
        Command::Helmholtz { .. } => "helmholtz",
        Command::Lagrangian { .. } => "lagrangian",
        Command::TotalDerivative { .. } => "total-derivative",
        Command::Linearize { .. } => "linearize",
        Command::Adjoint { .. } => "adjoint",
        Command::SelfAdjoint { .. } => "self-adjoint",
        Command::Tangent { .. } => "tangent",
        Command::Expand { .. } => "expand",
        Command::Symplectic { .. } => "symplectic",
        Command::ElCheck { .. } => "el-check",
        Command::Residue { .. } => "residue",
        Command::Action { .. } => "action",
        Command::Selfcheck { .. } => "selfcheck",
    }
}

fn primary_input(c: &Command) -> Option<&String> {
    match c {
        Command::Delta { equation }
        | Command::Helmholtz { equation }
        | Command::Lagrangian { equation, .. }
        | Command::TotalDerivative { equation }
        | Command::Linearize { equation, .. }
        | Command::Tangent { equation, .. }
        | Command::Expand { equation, .. }
        | Command::Symplectic { equation, .. }
        | Command::ElCheck { equation, .. } => equation.as_ref(),
        Command::Adjoint { op } | Command::SelfAdjoint { op } | Command::Action { op } => {
            op.as_ref()
        }
        Command::Residue { series } => series.as_ref(),
        Command::Selfcheck { .. } => None,
    }
}

/// The list of inputs to run: the single argument, or the lines of `--file`.
fn inputs(cli: &Cli) -> std::result::Result<Vec<Option<String>>, String> {
    if matches!(cli.command, Command::Selfcheck { .. }) {
        return Ok(vec![None]);
    }
    match (&cli.file, primary_input(&cli.command)) {
        (Some(_), Some(_)) => Err("give either an inline input or --file, not both".into()),
        (None, None) => Err("missing input".into()),
        (None, Some(s)) => Ok(vec![Some(s.clone())]),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            Ok(read_input_lines(&text).into_iter().map(Some).collect())
        }
    }
}

/// Non-empty lines with `#` comments stripped.
pub fn read_input_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

fn run_one(cli: &Cli, input: Option<&str>) -> Report {
    let name = command_name(&cli.command);
    match execute(cli, input.unwrap_or_default()) {
        Ok((status, payload)) => Report::new(name, input, status, payload),
        Err(e) => Report::error(name, input, &e),
    }
}

fn status_of(pass: bool) -> Status {
    if pass {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn op_json(l: &LinOp) -> Value {
    json!({ "coeffs": l.coeffs().iter().map(ToString::to_string).collect::<Vec<_>>() })
}

fn equation(text: &str) -> Result<DiffPoly> {
    Ok(parse_equation(text)?.poly)
}

fn loop_window(bounds: (i64, i64)) -> Result<Window> {
    Window::new(bounds.0, bounds.1)
}

fn execute(cli: &Cli, input: &str) -> Result<(Status, Value)> {
    match &cli.command {
        Command::Delta { .. } => {
            let d = equation(input)?;
            Ok((
                Status::Pass,
                json!({ "delta": d.variational_derivative().to_string() }),
            ))
        }
        Command::Helmholtz { .. } => {
            let report = varcalc::helmholtz_check(&equation(input)?);
            Ok((status_of(report.passed), report.to_json()))
        }
        Command::Lagrangian { force, .. } => {
            let d = equation(input)?;
            let verdict = varcalc::is_variational(&d)?;
            if verdict.variational {
                return Ok((Status::Pass, verdict.reconstruction.to_json()));
            }
            let (level, residual) = verdict
                .helmholtz
                .first_failure()
                .map(|(l, r)| (l, r.to_string()))
                .unwrap_or((0, String::new()));
            let mut payload = json!({
                "verified": false,
                "diagnostic": format!("Helmholtz condition {level} fails with residual {residual}"),
            });
            if *force {
                payload["lagrangian"] = json!(verdict.reconstruction.lagrangian.to_string());
            }
            Ok((Status::Fail, payload))
        }
        Command::TotalDerivative { .. } => {
            let d = equation(input)?;
            let total = varcalc::is_total_derivative(&d);
            Ok((
                status_of(total),
                json!({
                    "total_derivative": total,
                    "delta": d.variational_derivative().to_string(),
                    "residue": d.x_free_part().residue()?.to_string(),
                }),
            ))
        }
        Command::Linearize { at, .. } => {
            let d = equation(input)?;
            let gamma = parse_series(at)?;
            let lin = linops::linearize_at(&d, &gamma)?;
            let mut payload = json!({
                "operator": op_json(&lin.operator),
                "at_solution": lin.at_solution,
            });
            if lin.at_solution != Verdict::Holds {
                payload["warning"] =
                    json!("the series does not solve the equation on its known window");
            }
            Ok((Status::Pass, payload))
        }
        Command::Adjoint { .. } => {
            let l = parse_operator(input)?;
            Ok((Status::Pass, json!({ "adjoint": op_json(&l.adjoint()) })))
        }
        Command::SelfAdjoint { .. } => {
            let l = parse_operator(input)?;
            let verdict = l.self_adjoint_verdict();
            let status = match verdict {
                Verdict::Holds => Status::Pass,
                Verdict::Fails => Status::Fail,
                Verdict::Indeterminate => Status::Indeterminate,
            };
            Ok((
                status,
                json!({ "self_adjoint": verdict, "adjoint": op_json(&l.adjoint()) }),
            ))
        }
        Command::Tangent {
            at, space, window, ..
        } => {
            let d = equation(input)?;
            let gamma = parse_series(at)?;
            let lin = linops::linearize_at(&d, &gamma)?;
            let space = match space {
                SpaceArg::Disc => Space::Disc,
                SpaceArg::Punctured => Space::Punctured,
            };
            let dims = linops::tangent_cohomology_dims(&lin.operator, space, *window)?;
            let status = if dims.stabilized {
                Status::Pass
            } else {
                Status::Indeterminate
            };
            Ok((
                status,
                json!({
                    "operator": op_json(&lin.operator),
                    "at_solution": lin.at_solution,
                    "space": space,
                    "h0": dims.h0,
                    "h1": dims.h1,
                    "stabilized": dims.stabilized,
                    "window": dims.window_used,
                }),
            ))
        }
        Command::Expand { window, coeff, .. } => {
            let d = equation(input)?;
            let expansion = loopspace::expand_on_loops(&d, &loop_window(*window)?)?;
            let coefficients: Vec<Value> = match coeff {
                Some(n) => vec![json!({ "n": n, "poly": expansion.coeff(*n)?.to_string() })],
                None => expansion
                    .nonzero()
                    .map(|(n, p)| json!({ "n": n, "poly": p.to_string() }))
                    .collect(),
            };
            Ok((
                Status::Pass,
                json!({ "window": expansion.window, "coefficients": coefficients }),
            ))
        }
        Command::Symplectic { window, .. } => {
            let d = equation(input)?;
            let report = loopspace::symplectic_closedness_check(&d, &loop_window(*window)?)?;
            Ok((
                status_of(report.pass),
                serde_json::to_value(&report).expect("json"),
            ))
        }
        Command::ElCheck { window, .. } => {
            let d = equation(input)?;
            let report = loopspace::euler_lagrange_identity_check(&d, &loop_window(*window)?)?;
            Ok((
                status_of(report.pass),
                serde_json::to_value(&report).expect("json"),
            ))
        }
        Command::Residue { .. } => {
            let s = parse_series(input)?;
            Ok((Status::Pass, json!({ "residue": s.residue()?.to_string() })))
        }
        Command::Action { .. } => {
            let l = parse_operator(input)?;
            let action = varcalc::quadratic_action(&l)?;
            Ok((
                Status::Pass,
                json!({ "action": action.to_string(), "self_adjoint": l.is_self_adjoint() }),
            ))
        }
        Command::Selfcheck { count } => Ok(selfcheck(cli.seed, *count)),
    }
}

fn selfcheck(seed: u64, count: usize) -> (Status, Value) {
    let mut rng = battery::rng(seed);
    let shape = PolyShape::default();
    let mut delta_failures = Vec::new();
    for k in 0..count {
        let e = battery::random_diffpoly(&mut rng, shape);
        if !e.total_derivative().variational_derivative().is_zero() {
            delta_failures.push(json!({ "case": k, "poly": e.to_string() }));
        }
    }
    let mut adjoint_failures = Vec::new();
    for k in 0..count {
        let l = battery::random_linop(&mut rng, 4, (-3, 3));
        let f = battery::random_laurent(&mut rng, (-4, 4), 4);
        let g = battery::random_laurent(&mut rng, (-4, 4), 4);
        let lhs = l.apply(&f).and_then(|lf| linops::residue_pairing(&lf, &g));
        let rhs = l
            .adjoint()
            .apply(&g)
            .and_then(|ag| linops::residue_pairing(&f, &ag));
        let ok = matches!((&lhs, &rhs), (Ok(a), Ok(b)) if a == b);
        if !ok {
            adjoint_failures.push(json!({ "case": k, "operator": l.to_string() }));
        }
    }
    let pass = delta_failures.is_empty() && adjoint_failures.is_empty();
    (
        status_of(pass),
        json!({
            "seed": seed,
            "cases": count,
            "delta_of_total_derivative_failures": delta_failures,
            "adjointness_failures": adjoint_failures,
        }),
    )
}
