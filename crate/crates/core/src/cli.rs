//! Command-line front end. [`run`] takes the arguments and output streams so
//! the binary stays a thin wrapper and tests can drive it in-process.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    available_expressions, build_cfg, div_zero_check, live_variables, may_uninitialized,
    reachable_statements, render_facts, Cfg, DataflowResult, NodeKind,
};
use crate::error::{Error, Pos};
use crate::featexp::Configuration;
use crate::lang::{
    family_to_string, is_family_text, parse_family, parse_single, stmt_to_string, FamilyProgram,
    Stmt,
};
use crate::rewriter::{check_outcome_preservation_with, default_stores, reconfigure, Verdict};
use crate::semantics::{project, semantics_over, Store, DEFAULT_FUEL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MALFORMED: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "reconf", version, about = "Reconfigure #if program families into single programs")]
struct Cli {
    /// Emit a JSON record instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct RunOpts {
    /// Initial store such as `x=1,y=2`; repeat for several stores.
    #[arg(long = "init", value_name = "STORE")]
    init: Vec<String>,
    /// Step budget per path.
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a family or program and print it canonically.
    Parse { file: PathBuf },
    /// List the valid configurations.
    Configs { file: PathBuf },
    /// Print the variant selected by a configuration.
    Project {
        file: PathBuf,
        #[arg(long, value_name = "LITERALS")]
        config: String,
    },
    /// Print the single program simulating all valid variants.
    Reconfigure {
        file: PathBuf,
        /// Skip merging of adjacent exclusive `#if`s.
        #[arg(long)]
        no_optimize: bool,
        #[arg(short = 'o', long = "output", value_name = "OUT")]
        output: Option<PathBuf>,
    },
    /// Run one variant and print its outcomes.
    Run {
        file: PathBuf,
        #[arg(long, value_name = "LITERALS")]
        config: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a program, or the reconfigured family, and print its outcomes.
    Outcomes {
        file: PathBuf,
        #[arg(long)]
        no_optimize: bool,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Compare the reconfigured program against all variants.
    CheckEquiv {
        file: PathBuf,
        #[arg(long)]
        no_optimize: bool,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Analyze the reconfigured program or one variant.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum)]
        analysis: AnalysisKind,
        /// Analyze this variant instead of the reconfigured program.
        #[arg(long, value_name = "LITERALS")]
        variant: Option<String>,
        #[arg(long)]
        no_optimize: bool,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AnalysisKind {
    Divzero,
    Live,
    Avail,
    Uninit,
    Reach,
}

struct Failure {
    code: i32,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_MALFORMED,
            msg: e.to_string(),
        }
    }
}

type Outcome = std::result::Result<(String, i32), Failure>;

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(&cli) {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            if !text.is_empty() && !text.ends_with('\n') {
                let _ = out.write_all(b"\n");
            }
            code
        }
        Err(f) => {
            let _ = writeln!(err, "reconf: {}", f.msg);
            f.code
        }
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_MALFORMED,
        msg: format!("cannot read {}: {e}", path.display()),
    })
}

fn load_family(path: &Path) -> std::result::Result<FamilyProgram, Failure> {
    Ok(parse_family(&read(path)?)?)
}

fn valid_config(p: &FamilyProgram, literals: &str) -> std::result::Result<Configuration, Failure> {
    let k = Configuration::parse_literals(literals, &p.universe)?;
    if !p.config_space()?.contains(&k) {
        return Err(Error::malformed(format!("configuration `{k}` is not valid for this family")).into());
    }
    Ok(k)
}

fn stores_or(opts: &RunOpts, default: Vec<Store>) -> std::result::Result<Vec<Store>, Failure> {
    if opts.init.is_empty() {
        return Ok(default);
    }
    Ok(opts
        .init
        .iter()
        .map(|s| Store::parse(s))
        .collect::<crate::Result<Vec<_>>>()?)
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

/// The program a command runs: a single program as is, or a family after
/// reconfiguration.
fn program_of(text: &str, optimize: bool) -> std::result::Result<Stmt, Failure> {
    if is_family_text(text) {
        Ok(reconfigure(&parse_family(text)?, optimize)?.program)
    } else {
        Ok(parse_single(text)?)
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let json = cli.json;
    match &cli.command {
        Command::Parse { file } => {
            let text = read(file)?;
            let (kind, canonical) = if is_family_text(&text) {
                ("family", family_to_string(&parse_family(&text)?))
            } else {
                ("program", stmt_to_string(&parse_single(&text)?) + "\n")
            };
            if json {
                return Ok((to_json(&json!({ "kind": kind, "text": canonical })), EXIT_OK));
            }
            Ok((canonical, EXIT_OK))
        }
        Command::Configs { file } => {
            let p = load_family(file)?;
            let configs: Vec<String> = p.config_space()?.configs().iter().map(|k| k.to_string()).collect();
            if json {
                return Ok((to_json(&configs), EXIT_OK));
            }
            Ok((lines(configs), EXIT_OK))
        }
        Command::Project { file, config } => {
            let p = load_family(file)?;
            let k = valid_config(&p, config)?;
            let variant = stmt_to_string(&project(&p.body, &k)?);
            if json {
                return Ok((to_json(&json!({ "config": k.to_string(), "program": variant })), EXIT_OK));
            }
            Ok((variant, EXIT_OK))
        }
        Command::Reconfigure {
            file,
            no_optimize,
            output,
        } => {
            let p = load_family(file)?;
            let r = reconfigure(&p, !no_optimize)?;
            let program = stmt_to_string(&r.program) + "\n";
            let text = if json {
                to_json(&json!({ "program": program, "trace": r.trace }))
            } else {
                program
            };
            match output {
                Some(path) => {
                    fs::write(path, &text).map_err(|e| Failure {
                        code: EXIT_MALFORMED,
                        msg: format!("cannot write {}: {e}", path.display()),
                    })?;
                    Ok((String::new(), EXIT_OK))
                }
                None => Ok((text, EXIT_OK)),
            }
        }
        Command::Run { file, config, opts } => {
            let p = load_family(file)?;
            let k = valid_config(&p, config)?;
            let variant = project(&p.body, &k)?;
            let stores = stores_or(opts, default_stores(&p))?;
            let out = semantics_over(&variant, &stores, opts.fuel);
            Ok((if json { to_json(&out) } else { out.to_string() }, EXIT_OK))
        }
        Command::Outcomes {
            file,
            no_optimize,
            opts,
        } => {
            let program = program_of(&read(file)?, !no_optimize)?;
            let stores = stores_or(opts, vec![Store::zeroed(&program.free_vars())])?;
            let out = semantics_over(&program, &stores, opts.fuel);
            Ok((if json { to_json(&out) } else { out.to_string() }, EXIT_OK))
        }
        Command::CheckEquiv {
            file,
            no_optimize,
            opts,
        } => {
            let p = load_family(file)?;
            let stores = stores_or(opts, default_stores(&p))?;
            let report = check_outcome_preservation_with(&p, &stores, opts.fuel, !no_optimize)?;
            let code = match report.verdict {
                Verdict::Pass => EXIT_OK,
                Verdict::Fail => EXIT_VIOLATION,
                Verdict::Inconclusive => EXIT_INCONCLUSIVE,
            };
            Ok((if json { to_json(&report) } else { report.to_string() }, code))
        }
        Command::Analyze {
            file,
            analysis,
            variant,
            no_optimize,
            opts,
        } => {
            let text = read(file)?;
            let program = match variant {
                Some(literals) => {
                    let p = parse_family(&text)?;
                    project(&p.body, &valid_config(&p, literals)?)?
                }
                None => program_of(&text, !no_optimize)?,
            };
            analyze(&program, *analysis, opts, json)
        }
    }
}

fn lines(items: impl IntoIterator<Item = impl ToString>) -> String {
    items.into_iter().map(|s| s.to_string() + "\n").collect()
}

#[derive(Serialize)]
struct FactRow {
    pos: Pos,
    node: String,
    before: Vec<String>,
    after: Vec<String>,
}

fn fact_rows<T: Ord + ToString>(cfg: &Cfg, r: &DataflowResult<T>) -> Vec<FactRow> {
    cfg.nodes()
        .filter(|(_, n)| !matches!(n.kind, NodeKind::Entry | NodeKind::Exit))
        .map(|(id, n)| FactRow {
            pos: n.pos,
            node: n.label(),
            before: r.before[id].iter().map(ToString::to_string).collect(),
            after: r.after[id].iter().map(ToString::to_string).collect(),
        })
        .collect()
}

fn analyze(program: &Stmt, kind: AnalysisKind, opts: &RunOpts, json: bool) -> Outcome {
    let default_store = || vec![Store::zeroed(&program.free_vars())];
    match kind {
        AnalysisKind::Divzero => {
            let stores = stores_or(opts, default_store())?;
            let report = div_zero_check(program, &stores, opts.fuel);
            let code = if !report.witnesses.is_empty() {
                EXIT_VIOLATION
            } else if report.fuel_exhausted {
                EXIT_INCONCLUSIVE
            } else {
                EXIT_OK
            };
            Ok((if json { to_json(&report) } else { report.to_string() }, code))
        }
        AnalysisKind::Live => {
            let cfg = build_cfg(program)?;
            let r = live_variables(&cfg);
            Ok((if json { to_json(&fact_rows(&cfg, &r)) } else { render_facts(&cfg, &r) }, EXIT_OK))
        }
        AnalysisKind::Avail => {
            let cfg = build_cfg(program)?;
            let r = available_expressions(&cfg);
            Ok((if json { to_json(&fact_rows(&cfg, &r)) } else { render_facts(&cfg, &r) }, EXIT_OK))
        }
        AnalysisKind::Uninit => {
            let inputs: BTreeSet<String> = stores_or(opts, Vec::new())?
                .iter()
                .flat_map(Store::vars)
                .collect();
            let warnings = may_uninitialized(program, &inputs)?;
            Ok((if json { to_json(&warnings) } else { lines(&warnings) }, EXIT_OK))
        }
        AnalysisKind::Reach => {
            let stores = stores_or(opts, default_store())?;
            let reached = reachable_statements(program, &stores, opts.fuel);
            let all: BTreeSet<Pos> = program.positions().into_iter().filter(|p| !p.is_synthetic()).collect();
            if json {
                let rows: Vec<_> = all
                    .iter()
                    .map(|p| json!({ "pos": p, "reachable": reached.contains(p) }))
                    .collect();
                return Ok((to_json(&rows), EXIT_OK));
            }
            let text = lines(all.iter().map(|p| {
                let status = if reached.contains(p) { "reachable" } else { "unreachable" };
                format!("{p} {status}")
            }));
            Ok((text, EXIT_OK))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["reconf"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&[]).0, EXIT_USAGE);
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["analyze", "x.fam", "--analysis", "nope"]).0, EXIT_USAGE);
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("check-equiv"));
    }

    #[test]
    fn missing_file_is_malformed_input() {
        let (code, _, err) = call(&["parse", "/nonexistent/file.fam"]);
        assert_eq!(code, EXIT_MALFORMED);
        assert!(err.contains("cannot read"));
    }
}
