use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use qceq::format::{format_circuit, format_matrix, parse_any, parse_matrix};
use qceq::report::{Entry, Report};
use qceq::rewrite::{apply_step, replay_file, replay_shipped, Step};
use qceq::rules::{self, RuleSummary};
use qceq::semantics::{choi, circuit_deviation, eval_cptp_with, eval_natural, EvalOptions, DEFAULT_MAX_QUBITS};
use qceq::solvers::{euler_xzx, euler_zxz, solve_kstar, solve_kstar_old};
use qceq::synth::{synth_isometry, synth_unitary};
use qceq::{Circuit, Error, Theory};

#[derive(Parser)]
#[command(name = "qceq", version, about = "Quantum circuit equational theories toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// qc | qciso | qcancilla | qcground
    #[arg(long, global = true)]
    theory: Option<String>,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 20)]
    trials: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Dimension cap for dense evaluation (QCEQ_MAX_QUBITS is used when absent).
    #[arg(long, global = true)]
    max_qubits: Option<usize>,
    /// Print the JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the semantics of a circuit.
    Eval {
        file: PathBuf,
        /// Print the Choi matrix of the CPTP semantics.
        #[arg(long)]
        choi: bool,
    },
    /// Check the soundness of every axiom of a theory on random instances.
    CheckRules {
        /// Also check the retired rules.
        #[arg(long)]
        retired: bool,
    },
    /// Check the derived identities available in a theory.
    Identities,
    /// Apply one rule at a position.
    Apply {
        file: PathBuf,
        #[arg(long)]
        rule: String,
        /// Rewrite right-to-left.
        #[arg(long)]
        r2l: bool,
        #[arg(long, default_value_t = 0)]
        anchor: usize,
        /// Circuit wires of the rule's interface, e.g. `1,0`.
        #[arg(long, value_delimiter = ',')]
        wires: Option<Vec<usize>>,
        /// Parameter hints, e.g. `p=pi/2,t=0.3`.
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a derivation script (all shipped scripts when none is given).
    Replay { script: Option<PathBuf> },
    /// Canonical right-hand side angles of K* for given left-hand angles.
    SolveKstar {
        /// Four comma-separated angles, e.g. `0,0,0,2*pi`.
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        /// Use the retired nine-angle form.
        #[arg(long)]
        old: bool,
    },
    /// Canonical Euler angles of a 2×2 unitary.
    Euler {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value_t = Form::Zxz)]
        form: Form,
    },
    /// Synthesize a circuit from a unitary or isometry matrix.
    Synth {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Unitary)]
        kind: Kind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Semantic equivalence of two circuits.
    Equiv { a: PathBuf, b: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Zxz,
    Xzx,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Unitary,
    Isometry,
}

/// Outcome before rendering: a report, or an error with its exit code.
enum Failure {
    Usage(String),
    Semantic(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::StepFailed { .. } | Error::StaleMatch(_) | Error::SolveFailure(_) => Failure::Semantic(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(Report, Option<String>), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_circuit(path: &Path) -> Result<Circuit, Failure> {
    parse_any(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn theory(g: &Global, default: Theory) -> Result<Theory, Failure> {
    match &g.theory {
        None => Ok(default),
        Some(t) => Theory::parse(t).ok_or_else(|| Failure::Usage(format!("unknown theory `{t}`"))),
    }
}

fn eval_options(g: &Global) -> Result<EvalOptions, Failure> {
    let max_qubits = match (g.max_qubits, std::env::var("QCEQ_MAX_QUBITS")) {
        (Some(m), _) => m,
        (None, Ok(v)) => v.trim().parse().map_err(|_| Failure::Usage(format!("bad QCEQ_MAX_QUBITS `{v}`")))?,
        (None, Err(_)) => DEFAULT_MAX_QUBITS,
    };
    Ok(EvalOptions { max_qubits })
}

fn summaries(report: &mut Report, rows: Vec<RuleSummary>) {
    for s in rows {
        let detail = s.error.clone().unwrap_or_else(|| format!("{} {} ×{}", s.theory, json_name(&s.kind), s.trials));
        report.push(Entry::new(&s.rule, s.pass, Some(s.max_deviation)).with_detail(detail));
    }
}

fn json_name(v: &impl serde::Serialize) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<Option<String>, Failure> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            Ok(None)
        }
        None => Ok(Some(text.to_string())),
    }
}

fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    let opts = eval_options(g)?;
    match &cli.cmd {
        Cmd::Eval { file, choi: want_choi } => {
            let c = read_circuit(file)?;
            let mut r = Report::new("eval", vec![file.display().to_string()], None);
            let (kind, m) = if *want_choi {
                (qceq::semantics::SemanticsKind::Cptp, choi(&eval_cptp_with(&c, opts)?))
            } else {
                eval_natural(&c, opts)?
            };
            let text = format_matrix(&m);
            r.push(Entry::new(json_name(&kind), true, None).with_detail(&text));
            Ok((r, Some(text)))
        }
        Cmd::CheckRules { retired } => {
            let t = theory(g, Theory::Qc)?;
            let mut r = Report::new("check-rules", vec![t.to_string()], Some(g.seed));
            summaries(&mut r, rules::axiom_suite(t, g.trials, g.seed, opts, g.tol));
            if *retired {
                summaries(&mut r, rules::retired_suite(g.trials, g.seed, opts, g.tol));
            }
            Ok((r, None))
        }
        Cmd::Identities => {
            let t = theory(g, Theory::QcAncilla)?;
            let mut r = Report::new("identities", vec![t.to_string()], Some(g.seed));
            summaries(&mut r, rules::derived_identity_suite(t, g.trials, g.seed, opts, g.tol));
            Ok((r, None))
        }
        Cmd::Apply { file, rule, r2l, anchor, wires, params, out } => {
            let c = read_circuit(file)?;
            let mut hints = vec![];
            if let Some(ps) = params {
                for item in ps.split(',') {
                    let (n, v) = item.split_once('=').ok_or_else(|| Failure::Usage(format!("bad param `{item}`")))?;
                    let v = qceq::angle::parse_angle(v).map_err(Failure::Usage)?;
                    hints.push((n.to_string(), v));
                }
            }
            let step = Step {
                rule: rule.clone(),
                reversed: *r2l,
                anchor: *anchor,
                hints: vec![],
                wires: wires.clone(),
                params: hints,
                line: 0,
            };
            let (next, at) = apply_step(&c, &step)?;
            let mut r = Report::new("apply", vec![file.display().to_string()], None);
            let (_, dev) = circuit_deviation(&c, &next, opts)?;
            let text = format_circuit(&next);
            r.push(
                Entry::new(format!("{rule} {} @{at}", if *r2l { "R2L" } else { "L2R" }), dev <= g.tol, Some(dev))
                    .with_detail(&text),
            );
            let shown = write_or_print(out, &text)?;
            Ok((r, shown))
        }
        Cmd::Replay { script } => {
            let mut r = Report::new("replay", script.iter().map(|p| p.display().to_string()).collect(), None);
            let runs = match script {
                Some(p) => vec![(p.display().to_string(), replay_file(p, opts))],
                None => replay_shipped(opts),
            };
            for (name, res) in runs {
                match res {
                    Ok(rep) => {
                        for s in &rep.steps {
                            let label = format!("{} step {} {} {} @{}", rep.name, s.index, s.rule, s.direction, s.anchor);
                            r.push(Entry::new(label, true, s.deviation));
                        }
                        r.push(Entry::new(format!("{} end", rep.name), true, Some(rep.max_deviation)));
                    }
                    Err(e @ Error::StepFailed { .. }) => r.push(Entry::new(name, false, None).with_detail(e.to_string())),
                    Err(e) if script.is_some() => return Err(e.into()),
                    Err(e) => r.push(Entry::new(name, false, None).with_detail(e.to_string())),
                }
            }
            Ok((r, None))
        }
        Cmd::SolveKstar { gamma, old } => {
            let vals = gamma
                .split(',')
                .map(qceq::angle::parse_angle)
                .collect::<Result<Vec<_>, _>>()
                .map_err(Failure::Usage)?;
            if vals.len() != 4 {
                return Err(Failure::Usage(format!("--gamma needs 4 angles, got {}", vals.len())));
            }
            let gm = [vals[0], vals[1], vals[2], vals[3]];
            let mut r = Report::new("solve-kstar", vec![gamma.clone()], None);
            let delta: Vec<f64> = if *old { solve_kstar_old(gm)?.delta.to_vec() } else { solve_kstar(gm)?.delta.to_vec() };
            let text = delta.iter().enumerate().map(|(i, d)| format!("d{} = {d:?}\n", i + 1)).collect::<String>();
            r.push(Entry::new(if *old { "kstar-old" } else { "kstar" }, true, None).with_detail(&delta));
            Ok((r, Some(text)))
        }
        Cmd::Euler { matrix, form } => {
            let m = parse_matrix(&read(matrix)?)?;
            if m.shape() != (2, 2) {
                return Err(Failure::Usage(format!("expected a 2×2 matrix, got {}×{}", m.nrows(), m.ncols())));
            }
            let e = match form {
                Form::Zxz => euler_zxz(&m)?,
                Form::Xzx => euler_xzx(&m)?,
            };
            let a = e.as_array();
            let text = format!("b0 = {:?}\nb1 = {:?}\nb2 = {:?}\nb3 = {:?}\n", a[0], a[1], a[2], a[3]);
            let mut r = Report::new("euler", vec![matrix.display().to_string()], None);
            r.push(Entry::new(json_name_form(*form), true, None).with_detail(a));
            Ok((r, Some(text)))
        }
        Cmd::Synth { matrix, kind, out } => {
            let m = parse_matrix(&read(matrix)?)?;
            let c = match kind {
                Kind::Unitary => synth_unitary(&m)?,
                Kind::Isometry => synth_isometry(&m)?,
            };
            let (_, got) = eval_natural(&c, opts)?;
            let dev = qceq::semantics::max_deviation(&got, &m)?;
            let text = format_circuit(&c);
            let mut r = Report::new("synth", vec![matrix.display().to_string()], None);
            r.push(Entry::new(format!("{} gates", c.len()), dev <= 1e-8, Some(dev)));
            let shown = write_or_print(out, &text)?;
            Ok((r, shown))
        }
        Cmd::Equiv { a, b } => {
            let ca = read_circuit(a)?;
            let cb = read_circuit(b)?;
            if !ca.theory.embeds_in(cb.theory) && !cb.theory.embeds_in(ca.theory) {
                return Err(Error::TheoryMismatch(ca.theory.to_string(), cb.theory.to_string()).into());
            }
            let (kind, dev) = circuit_deviation(&ca, &cb, opts)?;
            let mut r = Report::new("equiv", vec![a.display().to_string(), b.display().to_string()], None);
            r.push(Entry::new("semantics", dev <= g.tol, Some(dev)).with_detail(json_name(&kind)));
            Ok((r, None))
        }
    }
}

fn json_name_form(f: Form) -> &'static str {
    match f {
        Form::Zxz => "zxz",
        Form::Xzx => "xzx",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, payload)) => {
            if cli.global.json {
                println!("{}", report.to_json());
            } else {
                if let Some(p) = payload {
                    print!("{p}");
                }
                print!("{}", report.render_text());
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Semantic(msg)) => {
            eprintln!("failure: {msg}");
            ExitCode::from(1)
        }
    }
}
