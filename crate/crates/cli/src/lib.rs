//! `mwc` command-line front end.
//!
//! [`execute`] runs one invocation and returns its exit code:
//!
//! | code | meaning |
//! |---|---|
//! | 0 | success, or no finding at or above the fail-on severity |
//! | 1 | findings at or above fail-on, or an imperfect corpus evaluation |
//! | 2 | parse or semantic errors in the input |
//! | 3 | usage or configuration error |

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use mwc_core::corpus::CorpusError;
use mwc_core::report::ScanInfo;
use mwc_core::{
    build_report_with, evaluate_corpus, load_corpus, parse_source, render, resolve, Config, Engine, Format, FrameCode,
    MwcId, ParsedFile, Registry, Severity, Strategy,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "mwc", version, about = "Static analyzer for the MoveEVM weakness catalog")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analyze `.move` files and directories and print a report.
    Scan {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// JSON config file.
        #[arg(long, env = "MWC_CONFIG")]
        config: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
        /// Comma-separated rule ids to run instead of the configured set.
        #[arg(long, value_delimiter = ',')]
        rules: Option<Vec<MwcId>>,
        #[arg(long)]
        fail_on: Option<Severity>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List catalog entries.
    Rules {
        #[arg(long)]
        frame: Option<FrameCode>,
        #[arg(long)]
        strategy: Option<Strategy>,
    },
    /// Describe one catalog entry.
    Explain { id: String },
    /// Show the SWC crosswalk, optionally restricted to one entry.
    Map { id: Option<String> },
    /// Evaluate detectors against a labeled fixture corpus.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, env = "MWC_CONFIG")]
        config: Option<PathBuf>,
    },
    /// Print the default config as JSON.
    InitConfig,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn input(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

/// Runs `argv` (including the program name) against the process streams.
pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    execute_with(argv, &mut io::stdout().lock(), &mut io::stderr().lock())
}

/// Like [`execute`], writing to the given streams.
pub fn execute_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut diagnostics = String::new();
    let result = run(cli.command, &mut diagnostics);
    let _ = err.write_all(diagnostics.as_bytes());
    match result {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            let _ = out.flush();
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn run(command: Command, diagnostics: &mut String) -> Result<(String, i32), Failure> {
    match command {
        Command::Scan { paths, config, format, rules, fail_on, jobs } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(ids) = rules {
                cfg.enabled_rules = Some(ids);
                cfg.validate(Registry::builtin()).map_err(|e| Failure::usage(e.to_string()))?;
            }
            if let Some(s) = fail_on {
                cfg.fail_on = s;
            }
            if let Some(f) = format {
                cfg.format = f;
            }
            let pool = thread_pool(jobs)?;
            pool.install(|| scan(&paths, &cfg, diagnostics))
        }
        Command::Rules { frame, strategy } => Ok((list_rules(frame, strategy), EXIT_OK)),
        Command::Explain { id } => explain(&id).map(|t| (t, EXIT_OK)),
        Command::Map { id } => map(id.as_deref()).map(|t| (t, EXIT_OK)),
        Command::Eval { corpus, config } => {
            let cfg = load_config(config.as_deref())?;
            eval(&corpus, &cfg)
        }
        Command::InitConfig => Ok((Config::default().to_json(), EXIT_OK)),
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    match path {
        Some(p) => Config::load(p).map_err(|e| Failure::usage(e.to_string())),
        None => Ok(Config::default()),
    }
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    if jobs == Some(0) {
        return Err(Failure::usage("--jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::usage(format!("cannot start worker pool: {e}")))
}

fn is_hidden(path: &Path) -> bool {
    path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.'))
}

fn collect_dir(dir: &Path, out: &mut Vec<PathBuf>) -> io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            if !is_hidden(&path) {
                collect_dir(&path, out)?;
            }
        } else if path.extension().is_some_and(|e| e == "move") {
            out.push(path);
        }
    }
    Ok(())
}

/// Explicit files are taken as given; directories contribute their `.move`
/// files, skipping hidden directories. The result is sorted and deduplicated.
pub fn discover(paths: &[PathBuf]) -> Result<Vec<PathBuf>, String> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            collect_dir(p, &mut out).map_err(|e| format!("cannot read `{}`: {e}", p.display()))?;
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            return Err(format!("no such file or directory: `{}`", p.display()));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn scan(paths: &[PathBuf], cfg: &Config, diagnostics: &mut String) -> Result<(String, i32), Failure> {
    let files = discover(paths).map_err(Failure::usage)?;
    let parsed: Vec<Result<ParsedFile, String>> = files
        .par_iter()
        .map(|p| {
            let name = p.display().to_string();
            let src = std::fs::read_to_string(p).map_err(|e| format!("cannot read `{name}`: {e}"))?;
            parse_source(&name, &src).map_err(|errs| errs.iter().map(|e| format!("{e}\n")).collect())
        })
        .collect();

    let mut ok = Vec::new();
    let mut parse_errors = 0;
    for r in parsed {
        match r {
            Ok(f) => ok.push(f),
            Err(text) => {
                parse_errors += text.lines().count();
                diagnostics.push_str(&text);
            }
        }
    }

    let model = resolve(ok, &cfg.call_patterns).map_err(|errs| {
        Failure::input(errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))
    })?;
    let findings = Engine::default().run_all(&model, cfg);
    let info = ScanInfo { paths: paths.iter().map(|p| p.display().to_string()).collect(), parse_errors };
    let report = build_report_with(&findings, &model, cfg, &info);
    let code = if parse_errors > 0 {
        EXIT_INPUT
    } else if report.verdict == mwc_core::Verdict::Failed {
        EXIT_FINDINGS
    } else {
        EXIT_OK
    };
    Ok((render(&report, cfg.format), code))
}

fn list_rules(frame: Option<FrameCode>, strategy: Option<Strategy>) -> String {
    let mut out = String::new();
    for r in Registry::builtin().categories() {
        if frame.is_some_and(|f| f != r.frame) || strategy.is_some_and(|s| s != r.strategy) {
            continue;
        }
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", r.id, r.frame, r.strategy.as_str(), r.severity_default, r.box_title);
    }
    out
}

fn explain(id: &str) -> Result<String, Failure> {
    let registry = Registry::builtin();
    let found = registry.lookup(id).map_err(|e| Failure::usage(e.to_string()))?;
    let r = found.record;
    let frame = registry.frame(r.frame).map(|f| f.name.as_str()).unwrap_or("");
    let mut out = String::new();
    let _ = writeln!(out, "{}: {}", r.id, r.box_title);
    if let Some(note) = &found.note {
        let _ = writeln!(out, "note: {note}");
    }
    let _ = writeln!(out, "taxonomy title: {}", r.title_taxonomy);
    if let Some(t) = &r.title_frame {
        let _ = writeln!(out, "frame title: {t}");
    }
    let _ = writeln!(out, "frame: {} ({frame})", r.frame);
    let _ = writeln!(out, "analysis: {}", r.analysis_hint);
    let _ = writeln!(out, "strategy: {}", r.strategy.as_str());
    let _ = writeln!(out, "default severity: {}", r.severity_default);
    let _ = writeln!(out, "fix: {}", r.fix_hint);
    if !r.aliases.is_empty() {
        let _ = writeln!(out, "aliases: {}", r.aliases.join(", "));
    }
    Ok(out)
}

fn map(id: Option<&str>) -> Result<String, Failure> {
    let rows = Registry::builtin().swc_crosswalk(id).map_err(|e| Failure::usage(e.to_string()))?;
    let mut out = String::new();
    for row in rows {
        let _ = writeln!(out, "{}", row.aspect);
        let _ = writeln!(out, "  SWC: {}", row.swc_side);
        let _ = writeln!(out, "  MWC: {}", row.mwc_side);
        for (swc, mwc) in row.pairs() {
            let _ = writeln!(out, "  pair: {swc} <-> {mwc}");
        }
    }
    Ok(out)
}

fn eval(dir: &Path, cfg: &Config) -> Result<(String, i32), Failure> {
    let fixtures = load_corpus(dir).map_err(|e| match e {
        CorpusError::Analysis { .. } => Failure::input(e.to_string()),
        _ => Failure::usage(e.to_string()),
    })?;
    let metrics = evaluate_corpus(&fixtures, &Engine::default(), cfg).map_err(|e| Failure::input(e.to_string()))?;
    let mut out = String::new();
    let _ = writeln!(out, "rule\ttp\tfn\tfixed_fp\trecall");
    for (id, m) in &metrics.per_rule {
        let recall = m.recall().map_or("-".to_string(), |r| format!("{r:.3}"));
        let _ = writeln!(out, "{id}\t{}\t{}\t{}\t{recall}", m.true_positives, m.false_negatives, m.false_positives_on_fixed);
    }
    let _ = writeln!(
        out,
        "total\t{}\t{}\t{}\t{:.3}",
        metrics.true_positives(),
        metrics.false_negatives(),
        metrics.fixed_false_positives(),
        metrics.recall()
    );
    let _ = writeln!(
        out,
        "fixtures: {} vulnerable, {} fixed",
        metrics.vulnerable_fixtures, metrics.fixed_fixtures
    );
    let perfect = metrics.false_negatives() == 0 && metrics.fixed_false_positives() == 0;
    Ok((out, if perfect { EXIT_OK } else { EXIT_FINDINGS }))
}
