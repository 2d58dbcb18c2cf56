//! `polyterm`: proves LD-termination of a definite logic program for the
//! query patterns given in its `%% query:` annotations.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use polyterm::driver::{prove, report, Config, Format, Outcome, Report, ShapeChoice, Verdict};
use polyterm::frontend::{parse_query_spec, parse_source};
use polyterm::polyalg::Shape;

const EXIT_YES: u8 = 0;
const EXIT_MAYBE: u8 = 1;
const EXIT_TIMEOUT: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "polyterm", version, about = "Termination prover for definite logic programs")]
struct Cli {
    /// Program file, or a directory of `.pl` files for batch mode.
    input: PathBuf,

    /// Query pattern such as `div(g,g,a)`; replaces the file's `%% query:` lines.
    #[arg(long)]
    query: Option<String>,

    /// Largest value of an unknown coefficient.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=63))]
    coeff_max: u64,

    /// Time limit per program, in seconds.
    #[arg(long, default_value_t = 60.0, value_parser = positive_seconds)]
    timeout: f64,

    /// Witness check covers variable values 0..=B.
    #[arg(long, default_value_t = 5)]
    verify_bound: u64,

    #[arg(long, value_enum, default_value_t = ShapeArg::Auto)]
    shape: ShapeArg,

    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ShapeArg {
    Linear,
    SimpleMixed,
    Auto,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

fn positive_seconds(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err("timeout must be positive".into())
    }
}

impl Cli {
    fn config(&self) -> Config {
        Config {
            coeff_max: self.coeff_max,
            timeout: Duration::from_secs_f64(self.timeout),
            verify_bound: self.verify_bound,
            shape: match self.shape {
                ShapeArg::Auto => ShapeChoice::Auto,
                ShapeArg::Linear => ShapeChoice::Only(Shape::Linear),
                ShapeArg::SimpleMixed => ShapeChoice::Only(Shape::SimpleMixed),
            },
            ..Config::default()
        }
    }

    fn format(&self) -> Format {
        match self.format {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
        }
    }
}

fn exit_code(v: &Verdict) -> u8 {
    match v.outcome {
        Outcome::Yes(_) => EXIT_YES,
        Outcome::Maybe(_) => EXIT_MAYBE,
        Outcome::Timeout => EXIT_TIMEOUT,
    }
}

/// Reads, parses and proves one file. Errors are input errors.
fn analyze(path: &Path, cli: &Cli) -> Result<Verdict, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let source = parse_source(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut annotations = source.annotations;
    if let Some(q) = &cli.query {
        annotations.retain(|a| !a.trim_start_matches('%').trim_start().starts_with("query:"));
        annotations.push(format!("query: {q}"));
    }
    let spec = parse_query_spec(&annotations, &source.program)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    if spec.patterns.is_empty() {
        return Err(format!("{}: no query pattern (add `%% query:` or pass --query)", path.display()));
    }
    Ok(prove(&source.program, &spec, &cli.config()))
}

fn run_single(cli: &Cli) -> u8 {
    match analyze(&cli.input, cli) {
        Ok(v) => {
            print!("{}", report(&v, cli.format()));
            exit_code(&v)
        }
        Err(e) => {
            eprintln!("polyterm: {e}");
            EXIT_INPUT
        }
    }
}

#[derive(Serialize)]
struct BatchEntry {
    file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<Report>,
}

/// Analyzes every `.pl` file in the directory on all cores; output is
/// ordered by file name and the exit status is the worst one seen.
fn run_batch(cli: &Cli) -> u8 {
    let mut files: Vec<PathBuf> = match fs::read_dir(&cli.input) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "pl"))
            .collect(),
        Err(e) => {
            eprintln!("polyterm: {}: {e}", cli.input.display());
            return EXIT_INPUT;
        }
    };
    files.sort();

    let results: Vec<Mutex<Option<Result<Verdict, String>>>> =
        files.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(files.len().max(1));
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(f) = files.get(k) else { break };
                let r = analyze(f, cli);
                *results[k].lock().expect("no poisoned slot") = Some(r);
            });
        }
    });

    let mut worst = EXIT_YES;
    let mut entries = Vec::new();
    let mut out = io::stdout().lock();
    for (f, slot) in files.iter().zip(results) {
        let name = f.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        let r = slot.into_inner().expect("no poisoned slot").expect("every file analyzed");
        let code = r.as_ref().map_or(EXIT_INPUT, exit_code);
        worst = worst.max(code);
        match (cli.format, r) {
            (FormatArg::Text, Ok(v)) => {
                let secs: f64 = v.stages.iter().map(|s| s.elapsed.as_secs_f64()).sum();
                let _ = writeln!(out, "{name}: {} ({secs:.2} s)", v.outcome.label());
            }
            (FormatArg::Text, Err(e)) => {
                eprintln!("polyterm: {e}");
                let _ = writeln!(out, "{name}: ERROR");
            }
            (FormatArg::Json, r) => entries.push(match r {
                Ok(v) => BatchEntry { file: name, error: None, report: Some(Report::new(&v)) },
                Err(e) => BatchEntry { file: name, error: Some(e), report: None },
            }),
        }
    }
    if matches!(cli.format, FormatArg::Json) {
        let json = serde_json::to_string_pretty(&entries).expect("report serializes");
        let _ = writeln!(out, "{json}");
    }
    worst
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let code = if cli.input.is_dir() { run_batch(&cli) } else { run_single(&cli) };
    ExitCode::from(code)
}
