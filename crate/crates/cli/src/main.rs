use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mucheck::checker::{
    induced_system, mpm_check, naive_semantics, verify_mpm, McProblem, MpmState,
};
use mucheck::coalgebra::Coalgebra;
use mucheck::eqsys::{synthesize_optimal_pm, verify_progress_measure, EquationalSystem, ProgressMeasure};
use mucheck::lintime::{decide_existential, verify_ltmc, LassoOracle, LinearProblem, LtmcWitness, NondetCoalgebra};
use mucheck::logic::{parse_formula, Formula};
use mucheck::parity::{brute_force_winners, game_to_eqsys, parse_pgsolver, solve_parity, verify_parity_pm, ParityGame, ParityPm};
use mucheck::Error;

#[derive(Parser)]
#[command(name = "mucheck", version, about = "Progress-measure model checking for fixed-point modal logics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a formula on a coalgebra.
    Check {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        formula: FormulaArg,
        #[arg(long, value_enum, default_value_t = Engine::Mpm)]
        engine: Engine,
        /// Write the matrix progress measure here.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Write the optimal progress measure of the induced system here.
        #[arg(long)]
        pm_certificate: Option<PathBuf>,
    },
    /// Solve a parity game in PGSolver format.
    Parity {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Cross-check against brute-force strategy enumeration.
        #[arg(long)]
        oracle: bool,
    },
    /// Existential linear-time check on a nondeterministic stream system.
    Linear {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        formula: FormulaArg,
        #[arg(long)]
        state: String,
        /// Counter bound for the witness search; defaults to |X|·m.
        #[arg(long)]
        alpha: Option<u32>,
        /// Cross-check with a lasso search, given as STEM,LOOP bounds.
        #[arg(long, value_parser = parse_bounds)]
        oracle: Option<(usize, usize)>,
        /// Write the witness here when the answer is tt.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Verify a certificate against its problem.
    Verify {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Coalgebra (pm, mpm) or nondeterministic stream system (ltmc).
        #[arg(long)]
        system: Option<PathBuf>,
        #[command(flatten)]
        formula: OptFormulaArg,
        /// Parity game (paritypm, or pm for the game's equational system).
        #[arg(long)]
        game: Option<PathBuf>,
        #[arg(long)]
        certificate: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct FormulaArg {
    #[arg(long)]
    formula: Option<String>,
    #[arg(long)]
    formula_file: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct OptFormulaArg {
    #[arg(long)]
    formula: Option<String>,
    #[arg(long)]
    formula_file: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Mpm,
    Naive,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Pm,
    Mpm,
    Ltmc,
    Paritypm,
}

fn parse_bounds(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected STEM,LOOP")?;
    let a: usize = a.trim().parse().map_err(|_| "bad stem bound")?;
    let b: usize = b.trim().parse().map_err(|_| "bad loop bound")?;
    if a < 1 || b < 1 {
        return Err("bounds must be at least 1".into());
    }
    Ok((a, b))
}

/// Failures mapped onto the exit-code contract.
enum Fail {
    Usage(String),
    Input(String),
    Rejected(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        match e {
            Error::Mismatch(m) => Fail::Rejected(format!("engine mismatch: {m}")),
            other => Fail::Input(other.to_string()),
        }
    }
}

type Run<T> = Result<T, Fail>;

fn read(path: &Path) -> Run<String> {
    fs::read_to_string(path).map_err(|e| Fail::Input(format!("cannot read {}: {e}", path.display())))
}

fn read_json(path: &Path) -> Run<Value> {
    serde_json::from_str(&read(path)?).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, v: &Value) -> Run<()> {
    let text = serde_json::to_string_pretty(v).expect("serializable") + "\n";
    fs::write(path, text).map_err(|e| Fail::Input(format!("cannot write {}: {e}", path.display())))
}

fn formula_text(formula: &Option<String>, file: &Option<PathBuf>) -> Run<Option<String>> {
    match (formula, file) {
        (Some(f), _) => Ok(Some(f.clone())),
        (None, Some(p)) => Ok(Some(read(p)?)),
        (None, None) => Ok(None),
    }
}

fn load_game(path: &Path) -> Run<ParityGame> {
    Ok(parse_pgsolver(&read(path)?)?)
}

fn names(states: &[String], set: &fixedbitset::FixedBitSet) -> Vec<String> {
    set.ones().map(|x| states[x].clone()).collect()
}

fn mc_problem(system: &Path, text: &str) -> Run<McProblem> {
    let c = Coalgebra::from_json(&read_json(system)?)?;
    let phi: Formula = parse_formula(text, &c.functor)?;
    Ok(McProblem::from_formula(c, &phi)?)
}

fn linear_problem(system: &Path, text: &str) -> Run<(NondetCoalgebra, LinearProblem)> {
    let c = NondetCoalgebra::from_json(&read_json(system)?)?;
    let phi = parse_formula(text, &c.functor)?;
    let p = LinearProblem::from_formula(c.functor.clone(), &phi)?;
    Ok((c, p))
}

fn run(cmd: Command) -> Run<(Value, Value, Option<String>)> {
    match cmd {
        Command::Check { system, formula, engine, certificate, pm_certificate } => {
            let text = formula_text(&formula.formula, &formula.formula_file)?.expect("required by clap");
            let p = mc_problem(&system, &text)?;
            let states = &p.system.states;
            let mut result = json!({});
            let mut stats = json!({"states": p.n(), "equations": p.m(), "counters": p.k()});
            let mut cert = None;
            let mpm = matches!(engine, Engine::Mpm | Engine::Both).then(|| mpm_check(&p));
            let naive = match engine {
                Engine::Naive | Engine::Both => Some(naive_semantics(&p)?),
                Engine::Mpm => None,
            };
            if let Some(run) = &mpm {
                result["satisfying_states"] = json!(names(states, &run.satisfying));
                result["iterations"] = json!(run.iterations);
                stats["iterations"] = json!(run.iterations);
                if let Some(out) = &certificate {
                    write_json(out, &run.certificate.to_json(&p.system))?;
                    cert = Some(out.display().to_string());
                }
            }
            if let Some(sem) = &naive {
                let last = &sem[p.m() - 1];
                if let Some(run) = &mpm {
                    if &run.satisfying != last {
                        return Err(Fail::Rejected(format!(
                            "engine mismatch: mpm {:?}, naive {:?}",
                            names(states, &run.satisfying),
                            names(states, last)
                        )));
                    }
                } else {
                    result["satisfying_states"] = json!(names(states, last));
                }
            }
            if let Some(out) = &pm_certificate {
                let sys = induced_system(&p);
                write_json(out, &synthesize_optimal_pm(&sys).to_json(&sys.lattice))?;
            }
            Ok((result, stats, cert))
        }
        Command::Parity { input, certificate, oracle } => {
            let g = load_game(&input)?;
            let (won, pm) = solve_parity(&g);
            let ids: Vec<u64> = won.ones().map(|x| g.ids[x]).collect();
            if oracle {
                let brute = brute_force_winners(&g);
                if brute != won {
                    let b: Vec<u64> = brute.ones().map(|x| g.ids[x]).collect();
                    return Err(Fail::Rejected(format!("oracle mismatch: lifting {ids:?}, brute force {b:?}")));
                }
            }
            let mut cert = None;
            if let Some(out) = &certificate {
                write_json(out, &pm.to_json(&g))?;
                cert = Some(out.display().to_string());
            }
            Ok((json!({"winning_even": ids, "oracle": oracle}), json!({"positions": g.n(), "max_priority": g.d}), cert))
        }
        Command::Linear { system, formula, state, alpha, oracle, witness } => {
            let text = formula_text(&formula.formula, &formula.formula_file)?.expect("required by clap");
            let (c, p) = linear_problem(&system, &text)?;
            let x0 = c.state_index(&state).ok_or_else(|| Fail::Input(format!("unknown state {state:?}")))?;
            let alpha = alpha.unwrap_or((c.n() * p.m()) as u32);
            if alpha < 1 {
                return Err(Fail::Usage("alpha must be at least 1".into()));
            }
            let run = decide_existential(&p, &c, x0, alpha);
            let mut result = json!({"result": if run.holds { "tt" } else { "ff" }, "alpha": alpha});
            if let Some((s, l)) = oracle {
                let lasso = LassoOracle::new(&p).search(&c, x0, s, l);
                if lasso.is_some() != run.holds {
                    return Err(Fail::Rejected(format!("lasso oracle disagrees: decision {}, lassos {}", run.holds, lasso.is_some())));
                }
                result["oracle"] = json!({"stem": s, "loop": l, "agrees": true});
            }
            let mut cert = None;
            if let (Some(w), Some(out)) = (&run.witness, &witness) {
                write_json(out, &w.to_json(&c))?;
                cert = Some(out.display().to_string());
            }
            let stats = json!({"candidates": run.candidates, "survivors": run.survivors,
                "witness_states": run.witness.as_ref().map_or(0, |w| w.ys.len())});
            Ok((result, stats, cert))
        }
        Command::Verify { kind, system, formula, game, certificate } => {
            let text = formula_text(&formula.formula, &formula.formula_file)?;
            let cert = read_json(&certificate)?;
            let need = |what: &str| Fail::Input(format!("{} verification needs {what}", kind_name(kind)));
            let verdict: Result<(), String> = match kind {
                Kind::Mpm => {
                    let p = mc_problem(&system.ok_or_else(|| need("--system"))?, &text.ok_or_else(|| need("a formula"))?)?;
                    let r = MpmState::from_json(&cert, &p)?;
                    verify_mpm(&p, &r).map_err(|v| v.to_string())
                }
                Kind::Pm => {
                    let sys: EquationalSystem = match (&game, &system) {
                        (Some(g), _) => game_to_eqsys(&load_game(g)?),
                        (None, Some(s)) => induced_system(&mc_problem(s, &text.ok_or_else(|| need("a formula"))?)?),
                        (None, None) => return Err(need("--game or --system")),
                    };
                    let pm = ProgressMeasure::from_json(&cert, &sys)?;
                    verify_progress_measure(&sys, &pm, true).map_err(|v| v.to_string())
                }
                Kind::Ltmc => {
                    let (c, p) = linear_problem(&system.ok_or_else(|| need("--system"))?, &text.ok_or_else(|| need("a formula"))?)?;
                    let w = LtmcWitness::from_json(&cert, &c, p.k())?;
                    verify_ltmc(&p, &c, &w).map_err(|v| v.to_string())
                }
                Kind::Paritypm => {
                    let g = load_game(&game.ok_or_else(|| need("--game"))?)?;
                    let pm = ParityPm::from_json(&cert, &g)?;
                    verify_parity_pm(&g, &pm).map_err(|v| v.to_string())
                }
            };
            match verdict {
                Ok(()) => Ok((json!({"accepted": true, "kind": kind_name(kind)}), json!({}), Some(certificate.display().to_string()))),
                Err(v) => Err(Fail::Rejected(format!("rejected: {v}"))),
            }
        }
    }
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Pm => "pm",
        Kind::Mpm => "mpm",
        Kind::Ltmc => "ltmc",
        Kind::Paritypm => "paritypm",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let start = Instant::now();
    match run(cli.command) {
        Ok((result, stats, certificate)) => {
            let report = json!({
                "schema": 1,
                "command": echo,
                "result": result,
                "certificate": certificate,
                "stats": stats,
                "wall_time_ms": start.elapsed().as_secs_f64() * 1000.0,
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            ExitCode::SUCCESS
        }
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Fail::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Rejected(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
