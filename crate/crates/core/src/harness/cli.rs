//! `mdimlab` subcommands. Exit codes: 0 success or PASS, 1 FAIL, 2 usage or
//! config error, 3 precondition abort. Errors go to stderr as JSON.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::bound::BoundSpec;
use crate::functional::{default_budget, load, run, yield_of, Oracle, TuringFunctional};
use crate::infoproxy::{default_corpus, proxy_by_name, proxy_diagnostics, SlackModel};
use crate::mdim::{convergence_report, estimate, gnuplot_script, profile, DimensionProfile, Schedule, DEFAULT_WINDOW};
use crate::reduction::{invert_uyb, invert_uyb_fast, verify_bt, verify_uyb, Mode, ReductionWitness};
use crate::seq::{write_sequence, Alphabet, GenSpec, SequenceGen, Str};

use super::{
    recompute_verdict, run_experiment, ExperimentConfig, HarnessError, DEFAULT_UYB_CAP, EXIT_FAIL, EXIT_OK,
    EXIT_USAGE,
};

#[derive(Parser, Debug)]
#[command(name = "mdimlab", version, about = "Bounded reductions and mutual-dimension experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a prefix of a generated sequence.
    Gen {
        #[arg(long)]
        spec: GenSpec,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run Φ^S(n) and print the instrumented outcome as JSON.
    Run(RunArgs),
    /// Print use(n), or `diverge`.
    Use(RunArgs),
    /// Print yield(n).
    Yield {
        #[command(flatten)]
        run: RunArgs,
        /// Search cap for register programs.
        #[arg(long, default_value_t = 4096)]
        max_m: usize,
    },
    /// Verify a use-bounded reduction Z = Φ^X up to a horizon.
    CheckReduction(ReductionArgs),
    /// Verify a yield-bounded reduction via a uniquely yielding Φ.
    CheckUyb {
        #[command(flatten)]
        red: ReductionArgs,
        /// Oracle length enumerated by the uniquely-yielding check.
        #[arg(long, default_value_t = DEFAULT_UYB_CAP)]
        cap: usize,
    },
    /// Recover X↾n from a target Z = Φ^X.
    Invert {
        #[arg(long)]
        functional: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        bound: BoundSpec,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Longest candidate; defaults to the bound at n.
        #[arg(long)]
        max_len: Option<usize>,
        /// Use the VM search instead of the transducer fast path.
        #[arg(long)]
        brute: bool,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Compute a mutual-dimension profile and write it as CSV.
    Profile {
        #[arg(long)]
        x: GenSpec,
        #[arg(long)]
        y: GenSpec,
        #[arg(long)]
        horizon: usize,
        #[arg(long, default_value = "linear")]
        schedule: Schedule,
        #[arg(long, default_value = "ctx")]
        proxy: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a gnuplot script for the CSV (needs --out).
        #[arg(long)]
        emit_plot: Option<PathBuf>,
    },
    /// Estimate mdim/Mdim from a profile CSV.
    Estimate {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: f64,
    },
    /// Run an experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Directory for report.json and the profile CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write plot.gp next to the CSVs (needs --out).
        #[arg(long)]
        emit_plot: bool,
    },
    /// Check how well a proxy respects the information lemmas.
    DiagnoseProxy {
        #[arg(long, default_value = "ctx")]
        proxy: String,
        #[arg(long, default_value_t = 4.0)]
        slack_a: f64,
        #[arg(long, default_value_t = 64.0)]
        slack_b: f64,
        /// Exit 1 if any lemma's pass rate falls below this.
        #[arg(long)]
        gate: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    functional: String,
    /// A `gen:` spec or a literal string of symbols.
    #[arg(long)]
    oracle: String,
    #[arg(long)]
    n: usize,
    /// Alphabet size for literal oracles.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args, Debug)]
struct ReductionArgs {
    #[arg(long)]
    functional: String,
    /// Generator spec of X.
    #[arg(long)]
    from: GenSpec,
    #[arg(long)]
    bound: BoundSpec,
    #[arg(long)]
    horizon: u64,
    #[arg(long)]
    budget: Option<u64>,
    /// Write per-n rows as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum OracleArg {
    Str(Str),
    Seq(SequenceGen),
}

impl OracleArg {
    fn parse(text: &str, k: usize) -> Result<Self, HarnessError> {
        if text.starts_with("gen:") {
            Ok(OracleArg::Seq(text.parse::<GenSpec>()?.build()?))
        } else {
            Ok(OracleArg::Str(Str::parse(text, Alphabet::new(k)?)?))
        }
    }

    fn oracle(&self) -> Oracle<'_> {
        match self {
            OracleArg::Str(s) => Oracle::Str(s),
            OracleArg::Seq(g) => Oracle::Seq(g),
        }
    }
}

fn load_for(args: &RunArgs) -> Result<(TuringFunctional, OracleArg, u64), HarnessError> {
    let oracle = OracleArg::parse(&args.oracle, args.k)?;
    let phi = load(&args.functional, oracle.oracle().alphabet())?;
    Ok((phi, oracle, args.budget.unwrap_or_else(default_budget)))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, HarnessError> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn check_reduction(args: &ReductionArgs, mode: Mode, cap: usize, out: &mut dyn Write) -> Result<i32, HarnessError> {
    let x = args.from.build()?;
    let phi = load(&args.functional, x.alphabet())?;
    let budget = args.budget.unwrap_or_else(default_budget);
    let w = ReductionWitness::derived(phi.into(), x, args.bound.clone(), mode, budget)?;
    let report = match mode {
        Mode::UseBounded => verify_bt(&w, args.horizon, budget)?,
        Mode::YieldBounded => verify_uyb(&w, args.horizon, cap, budget)?,
    };
    if let Some(path) = &args.out {
        let mut f = create(path)?;
        report.write_csv(&mut f)?;
        f.flush()?;
    }
    writeln!(out, "{}", to_json(&report.summary())?)?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAIL })
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, HarnessError> {
    match cmd {
        Command::Gen { spec, n, seed, out: path } => {
            let spec = seed.map_or(spec.clone(), |s| spec.with_seed(s));
            let s = spec.build()?.try_prefix(n)?;
            match path {
                Some(p) => {
                    let mut f = create(&p)?;
                    write_sequence(&mut f, &s)?;
                    f.flush()?;
                }
                None => write_sequence(&mut *out, &s)?,
            }
        }
        Command::Run(args) => {
            let (phi, oracle, budget) = load_for(&args)?;
            let r = run(&phi, oracle.oracle(), args.n, budget)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&r.to_json())?)?;
            return Ok(if r.halted() { EXIT_OK } else { EXIT_FAIL });
        }
        Command::Use(args) => {
            let (phi, oracle, budget) = load_for(&args)?;
            match run(&phi, oracle.oracle(), args.n, budget)?.use_value() {
                Some(u) => writeln!(out, "{u}")?,
                None => {
                    writeln!(out, "diverge")?;
                    return Ok(EXIT_FAIL);
                }
            }
        }
        Command::Yield { run: args, max_m } => {
            let (phi, oracle, budget) = load_for(&args)?;
            let y = yield_of(&phi, oracle.oracle(), args.n, max_m, budget)?;
            writeln!(out, "{}", y.value)?;
        }
        Command::CheckReduction(args) => return check_reduction(&args, Mode::UseBounded, 0, out),
        Command::CheckUyb { red, cap } => return check_reduction(&red, Mode::YieldBounded, cap, out),
        Command::Invert {
            functional,
            target,
            n,
            bound,
            k,
            max_len,
            brute,
            budget,
        } => {
            let alphabet = Alphabet::new(k)?;
            let phi = load(&functional, alphabet)?;
            let target = Str::parse(&target, alphabet)?;
            let max_len = max_len.unwrap_or(bound.eval(n as u64) as usize).max(n);
            let x = if brute || phi.transducer().is_none() {
                invert_uyb(&phi, &target, n, &bound, max_len, budget.unwrap_or_else(default_budget))?
            } else {
                invert_uyb_fast(&phi, &target, n, &bound, max_len)?
            };
            writeln!(out, "{x}")?;
        }
        Command::Profile {
            x,
            y,
            horizon,
            schedule,
            proxy,
            out: path,
            emit_plot,
        } => {
            let proxy = proxy_by_name(&proxy)?;
            let p = profile(&x.build()?, &y.build()?, horizon, &schedule, proxy.as_ref())?;
            match &path {
                Some(path) => {
                    let mut f = create(path)?;
                    p.write_csv(&mut f)?;
                    f.flush()?;
                    let e = estimate(&p, DEFAULT_WINDOW).ok();
                    writeln!(out, "{}", to_json(&json!({ "csv": path, "estimate": e }))?)?;
                }
                None => p.write_csv(&mut *out)?,
            }
            if let Some(plot) = emit_plot {
                let csv = path.ok_or_else(|| HarnessError::Config("--emit-plot needs --out".into()))?;
                let title = format!("{x} : {y}");
                fs::write(&plot, gnuplot_script(&[(title, csv.display().to_string())]))?;
            }
        }
        Command::Estimate { profile, window } => {
            let p = DimensionProfile::read_csv(File::open(&profile)?)?;
            let e = estimate(&p, window)?;
            let c = convergence_report(&p, window).ok();
            writeln!(out, "{}", to_json(&json!({ "estimate": e, "convergence": c }))?)?;
        }
        Command::Experiment {
            config,
            out: dir,
            emit_plot,
        } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let run = run_experiment(&cfg)?;
            debug_assert_eq!(recompute_verdict(&run.report), run.report.verdict);
            let text = to_json(&run.report)?;
            match &dir {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    fs::write(dir.join("report.json"), format!("{text}\n"))?;
                    let mut series = Vec::new();
                    for (seed, xy, zy) in &run.profiles {
                        for (tag, p) in [("xy", xy), ("zy", zy)] {
                            let name = format!("seed{seed}-{tag}.csv");
                            let mut f = create(&dir.join(&name))?;
                            p.write_csv(&mut f)?;
                            f.flush()?;
                            series.push((format!("seed {seed} {tag}"), name));
                        }
                    }
                    if emit_plot {
                        fs::write(dir.join("plot.gp"), gnuplot_script(&series))?;
                    }
                    writeln!(
                        out,
                        "{}",
                        json!({
                            "verdict": run.report.verdict,
                            "seeds_passed": run.report.seeds_passed,
                            "seeds_required": run.report.seeds_required,
                            "report": dir.join("report.json"),
                        })
                    )?;
                }
                None if emit_plot => return Err(HarnessError::Config("--emit-plot needs --out".into())),
                None => writeln!(out, "{text}")?,
            }
            return Ok(if run.report.verdict.passed() { EXIT_OK } else { EXIT_FAIL });
        }
        Command::DiagnoseProxy {
            proxy,
            slack_a,
            slack_b,
            gate,
            out: path,
        } => {
            let proxy = proxy_by_name(&proxy)?;
            let slack = SlackModel { a: slack_a, b: slack_b };
            let report = proxy_diagnostics(proxy.as_ref(), &default_corpus(), slack)?;
            let text = to_json(&report)?;
            match path {
                Some(p) => fs::write(p, format!("{text}\n"))?,
                None => writeln!(out, "{text}")?,
            }
            if gate.is_some_and(|g| report.lemmas.iter().any(|l| l.pass_rate < g)) {
                return Ok(EXIT_FAIL);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let v = json!({
                "error": "usage",
                "message": e.to_string().trim_end(),
                "exit_code": EXIT_USAGE,
            });
            let _ = writeln!(err, "{v}");
            return EXIT_USAGE;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json());
            e.exit_code()
        }
    }
}
