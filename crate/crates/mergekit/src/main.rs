//! `mergekit` binary: a per-file three-way merge driver, a conflict
//! fixup pass, and a batch evaluation harness.
//!
//! Exit codes: 0 = all output conflict-free, 1 = conflicts remain,
//! 2 = usage or internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mergekit::corpus::{evaluate, import_golden_suite, load_corpus, write_report, EvalConfig};
use mergekit::evalharness::{default_k_grid, CompareMode, Fixup};
use mergekit::mergecore::{parse_conflicts, render, ConflictStyle, StyleKind, MIN_MARKER_LEN};
use mergekit::strategies::{run_tool, ToolSpec};
use mergekit::textmodel::{Document, WhitespaceMode};
use mergekit::Error;

/// Environment override for the conflict marker length, for files that
/// legitimately contain seven-character marker-like lines.
const MARKER_LEN_VAR: &str = "MERGEKIT_MARKER_LEN";

#[derive(Parser)]
#[command(name = "mergekit", version, about = "Three-way merge tools and evaluation harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Merge one file from its base and two parent revisions.
    Merge(MergeArgs),
    /// Resolve import/version conflicts in an already-merged file.
    Fixup(FixupArgs),
    /// Evaluate merge tools over a scenario corpus.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StyleArg {
    Merge,
    Diff3,
    Zdiff3,
}

impl From<StyleArg> for StyleKind {
    fn from(s: StyleArg) -> StyleKind {
        match s {
            StyleArg::Merge => StyleKind::Merge,
            StyleArg::Diff3 => StyleKind::Diff3,
            StyleArg::Zdiff3 => StyleKind::Zdiff3,
        }
    }
}

#[derive(Args)]
struct MergeArgs {
    base: PathBuf,
    left: PathBuf,
    right: PathBuf,
    /// Merge tool to run.
    #[arg(long, default_value = "gitline")]
    tool: String,
    /// Output path; defaults to rewriting the left (current) file, the
    /// convention for a VCS merge driver.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "diff3")]
    conflict_style: StyleArg,
    /// Compare lines ignoring whitespace-run and trailing-space changes.
    #[arg(long)]
    ignore_space_change: bool,
    /// Conflict labels: LEFT BASE RIGHT.
    #[arg(long, num_args = 3)]
    labels: Option<Vec<String>>,
}

#[derive(Args)]
struct FixupArgs {
    /// File containing diff3-style conflict fences, rewritten in place.
    file: PathBuf,
    #[arg(long, default_value = "ivn")]
    tool: String,
    /// Optional merge context; without it, deleted-import reintroduction
    /// is skipped.
    #[arg(long)]
    base: Option<PathBuf>,
    #[arg(long)]
    left: Option<PathBuf>,
    #[arg(long)]
    right: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Corpus directory containing manifest.toml.
    #[arg(long, conflicts_with = "golden", required_unless_present = "golden")]
    corpus: Option<PathBuf>,
    /// Use the built-in golden scenario suite.
    #[arg(long)]
    golden: bool,
    /// Comma-separated tool names, or "all".
    #[arg(long, default_value = "all")]
    tools: String,
    /// Cost-factor grid: "lo:hi[:n]" (log-spaced) or "k1,k2,...".
    #[arg(long)]
    k_grid: Option<String>,
    #[arg(long, default_value = "exact")]
    compare: String,
    /// Fixup used during classification: identity, imports,
    /// version-numbers, or ivn.
    #[arg(long, default_value = "ivn")]
    fixup: String,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Directory for report.jsonl and report.csv.
    #[arg(long, default_value = "report")]
    report: PathBuf,
    /// Run each cell 3 times and record the median time (makes reports
    /// non-deterministic).
    #[arg(long)]
    time: bool,
}

fn read_doc(path: &Path) -> Result<Document, Error> {
    let bytes = std::fs::read(path).map_err(|source| Error::ReadFile {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Document::from_bytes(&bytes))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    std::fs::write(path, bytes).map_err(|source| Error::WriteFile {
        path: path.to_path_buf(),
        source,
    })
}

fn marker_len_from_env() -> Result<usize, Error> {
    match std::env::var(MARKER_LEN_VAR) {
        Ok(v) => {
            let len: usize = v.parse().map_err(|_| {
                Error::UndefinedMetric(format!("{MARKER_LEN_VAR} must be an integer, got {v:?}"))
            })?;
            if len < MIN_MARKER_LEN {
                return Err(Error::UndefinedMetric(format!(
                    "{MARKER_LEN_VAR} must be at least {MIN_MARKER_LEN}, got {len}"
                )));
            }
            Ok(len)
        }
        Err(_) => Ok(MIN_MARKER_LEN),
    }
}

fn style_for(kind: StyleKind, labels: &Option<Vec<String>>) -> Result<ConflictStyle, Error> {
    let mut style = ConflictStyle::new(kind, marker_len_from_env()?);
    if let Some(labels) = labels {
        style = style.with_labels(&labels[0], &labels[1], &labels[2]);
    }
    Ok(style)
}

fn cmd_merge(args: &MergeArgs) -> Result<u8, Error> {
    let base = read_doc(&args.base)?;
    let left = read_doc(&args.left)?;
    let right = read_doc(&args.right)?;
    let mut tool = ToolSpec::by_name(&args.tool)?;
    if args.ignore_space_change {
        tool.ws = WhitespaceMode::IgnoreSpaceChange;
    }
    let (result, _elapsed) = run_tool(&tool, &base, &left, &right);
    let style = style_for(args.conflict_style.into(), &args.labels)?;
    let out_path = args.out.as_deref().unwrap_or(&args.left);
    write_bytes(out_path, &render(&result, &style))?;
    Ok(if result.clean() { 0 } else { 1 })
}

fn cmd_fixup(args: &FixupArgs) -> Result<u8, Error> {
    let fixup = match args.tool.as_str() {
        "imports" | "version-numbers" | "ivn" => Fixup::parse(&args.tool)?,
        other => {
            return Err(Error::UnknownTool {
                name: other.to_string(),
                valid: "imports, version-numbers, ivn".into(),
            })
        }
    };
    let style = style_for(StyleKind::Diff3, &None)?;
    let text = std::fs::read(&args.file).map_err(|source| Error::ReadFile {
        path: args.file.clone(),
        source,
    })?;
    let parsed = parse_conflicts(&text, &style)?;
    let context = |p: &Option<PathBuf>| -> Result<Document, Error> {
        p.as_deref().map(read_doc).unwrap_or(Ok(Document::empty()))
    };
    let file = mergekit::evalharness::ScenarioFile {
        path: args.file.to_string_lossy().into_owned(),
        base: context(&args.base)?,
        left: context(&args.left)?,
        right: context(&args.right)?,
    };
    let fixed = fixup.apply(&parsed, &file);
    write_bytes(&args.file, &render(&fixed, &style))?;
    Ok(if fixed.clean() { 0 } else { 1 })
}

fn parse_k_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let bad = |why: &str| Error::UndefinedMetric(format!("bad --k-grid {spec:?}: {why}"));
    let grid = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(bad("expected lo:hi[:n]"));
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad("lo is not a number"))?;
        let hi: f64 = parts[1].parse().map_err(|_| bad("hi is not a number"))?;
        let n: usize = match parts.get(2) {
            Some(p) => p.parse().map_err(|_| bad("n is not an integer"))?,
            None => 20,
        };
        if lo <= 0.0 || hi < lo || n == 0 {
            return Err(bad("need 0 < lo <= hi and n >= 1"));
        }
        if lo == hi || n == 1 {
            vec![lo]
        } else {
            (0..n)
                .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
                .collect()
        }
    } else {
        spec.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad("not a number list")))
            .collect::<Result<Vec<f64>, Error>>()?
    };
    if grid.iter().any(|&k| k <= 0.0 || !k.is_finite()) {
        return Err(bad("cost factors must be positive and finite"));
    }
    Ok(grid)
}

fn cmd_eval(args: &EvalArgs) -> Result<u8, Error> {
    let scenarios = if args.golden {
        import_golden_suite()
    } else {
        load_corpus(args.corpus.as_deref().expect("clap enforces --corpus or --golden"))?
    };
    if scenarios.is_empty() {
        return Err(Error::CorpusValidation("corpus contains no scenarios".into()));
    }
    let tools = if args.tools == "all" {
        ToolSpec::all()
    } else {
        args.tools
            .split(',')
            .map(|n| ToolSpec::by_name(n.trim()))
            .collect::<Result<Vec<ToolSpec>, Error>>()?
    };
    let config = EvalConfig {
        tools,
        compare: CompareMode::parse(&args.compare)?,
        fixup: Fixup::parse(&args.fixup)?,
        k_grid: match &args.k_grid {
            Some(spec) => parse_k_grid(spec)?,
            None => default_k_grid(),
        },
        jobs: args.jobs.max(1),
        timed: args.time,
    };
    let report = evaluate(&scenarios, &config)?;
    let (jsonl, csv) = write_report(&report, &args.report)?;
    for (tool, tally) in &report.summary.tallies {
        println!(
            "{tool}: {} merges, {} correct, {} incorrect, {} unhandled",
            tally.num_merges, tally.num_correct, tally.num_incorrect, tally.num_unhandled
        );
    }
    println!("report written to {} and {}", jsonl.display(), csv.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Merge(args) => cmd_merge(args),
        Cmd::Fixup(args) => cmd_fixup(args),
        Cmd::Eval(args) => cmd_eval(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("mergekit: {e}");
            ExitCode::from(2)
        }
    }
}
