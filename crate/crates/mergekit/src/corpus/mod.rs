//! Scenario corpora on disk, the built-in golden suite, evaluation
//! orchestration, and report persistence.
//!
//! A corpus is a directory holding `manifest.toml` plus one directory per
//! scenario with `base/`, `left/`, `right/`, and `expected/` subtrees:
//!
//! ```toml
//! schema_version = 1
//!
//! [[scenario]]
//! id = "example"
//! dir = "example"
//! tags = ["source=main"]
//! notes = "optional free text"
//! ```
//!
//! Reports are written as a JSON-lines summary (header record followed by
//! one record per (tool, scenario) cell) and a flat CSV table for
//! plotting. Both carry a schema version.

mod golden;

pub use golden::{import_golden_suite, RACE_PRONE_SPLICE_5184};

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalharness::{
    breakdown_by_tag, classify, er_curve, pairwise_distinct, runtime_stats, CompareMode,
    ErPoint, Fixup, MergeScenario, Outcome, RuntimeStats, ScenarioFile, Tally,
};
use crate::mergecore::MergeResult;
use crate::strategies::{run_tool, ToolSpec};
use crate::textmodel::Document;

pub const CORPUS_SCHEMA_VERSION: u32 = 1;
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
struct ManifestFile {
    #[allow(dead_code)]
    schema_version: Option<u32>,
    #[serde(default)]
    scenario: Vec<ManifestEntry>,
}

#[derive(Debug, Deserialize)]
struct ManifestEntry {
    id: String,
    dir: String,
    #[serde(default)]
    tags: Vec<String>,
    #[serde(default)]
    #[allow(dead_code)]
    notes: Option<String>,
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::ReadFile { path: path.to_path_buf(), source })
}

/// Relative paths of all regular files under `dir` (empty when the tree
/// is absent).
fn tree_paths(dir: &Path) -> Result<BTreeSet<String>> {
    let mut paths = BTreeSet::new();
    if !dir.exists() {
        return Ok(paths);
    }
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            Error::CorpusValidation(format!("walking {}: {e}", dir.display()))
        })?;
        if entry.file_type().is_file() {
            let rel = entry
                .path()
                .strip_prefix(dir)
                .expect("walkdir yields children of its root");
            paths.insert(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(paths)
}

fn read_side(dir: &Path, rel: &str) -> Result<Document> {
    let path = dir.join(rel);
    if path.exists() {
        Ok(Document::from_bytes(&read_bytes(&path)?))
    } else {
        Ok(Document::empty())
    }
}

fn parse_tags(tags: &[String]) -> Vec<(String, String)> {
    tags.iter()
        .map(|t| match t.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => (t.to_string(), String::new()),
        })
        .collect()
}

/// Load one scenario directory. A path absent from a side tree becomes an
/// empty document on that side; every path present on any side must have
/// an expected file.
fn load_scenario(corpus_root: &Path, entry: &ManifestEntry) -> Result<MergeScenario> {
    let dir = corpus_root.join(&entry.dir);
    if !dir.is_dir() {
        return Err(Error::CorpusValidation(format!(
            "scenario {}: directory {} does not exist",
            entry.id,
            dir.display()
        )));
    }
    let base_dir = dir.join("base");
    let left_dir = dir.join("left");
    let right_dir = dir.join("right");
    let expected_dir = dir.join("expected");

    let mut all_paths = BTreeSet::new();
    all_paths.extend(tree_paths(&base_dir)?);
    all_paths.extend(tree_paths(&left_dir)?);
    all_paths.extend(tree_paths(&right_dir)?);
    let expected_paths = tree_paths(&expected_dir)?;

    for path in &all_paths {
        if !expected_paths.contains(path) {
            return Err(Error::CorpusValidation(format!(
                "scenario {}: no expected output for {path}",
                entry.id
            )));
        }
    }
    for path in &expected_paths {
        if !all_paths.contains(path) {
            return Err(Error::CorpusValidation(format!(
                "scenario {}: expected file {path} has no corresponding input",
                entry.id
            )));
        }
    }

    let mut files = Vec::new();
    let mut expected = Vec::new();
    for path in &all_paths {
        files.push(ScenarioFile {
            path: path.clone(),
            base: read_side(&base_dir, path)?,
            left: read_side(&left_dir, path)?,
            right: read_side(&right_dir, path)?,
        });
        expected.push((path.clone(), read_side(&expected_dir, path)?));
    }
    Ok(MergeScenario {
        id: entry.id.clone(),
        files,
        expected,
        tags: parse_tags(&entry.tags),
    })
}

/// Load a corpus directory: parse `manifest.toml`, validate ids, and load
/// every scenario.
pub fn load_corpus(root: &Path) -> Result<Vec<MergeScenario>> {
    let manifest_path = root.join("manifest.toml");
    let text = read_bytes(&manifest_path)?;
    let text = String::from_utf8(text).map_err(|e| Error::ParseFile {
        path: manifest_path.clone(),
        reason: format!("not UTF-8: {e}"),
    })?;
    let manifest: ManifestFile = toml::from_str(&text).map_err(|e| Error::ParseFile {
        path: manifest_path.clone(),
        reason: e.to_string(),
    })?;
    let mut seen = BTreeSet::new();
    for entry in &manifest.scenario {
        if !seen.insert(&entry.id) {
            return Err(Error::CorpusValidation(format!(
                "duplicate scenario id {}",
                entry.id
            )));
        }
    }
    manifest
        .scenario
        .iter()
        .map(|entry| load_scenario(root, entry))
        .collect()
}

/// Evaluation configuration, echoed into every report.
#[derive(Clone, Debug)]
pub struct EvalConfig {
    pub tools: Vec<ToolSpec>,
    pub compare: CompareMode,
    pub fixup: Fixup,
    pub k_grid: Vec<f64>,
    pub jobs: usize,
    /// When true, every cell is merged three times and the median time is
    /// recorded. Off by default: timing data is inherently
    /// non-deterministic and would break byte-identical reports.
    pub timed: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            tools: ToolSpec::all(),
            compare: CompareMode::Exact,
            fixup: Fixup::Ivn,
            k_grid: crate::evalharness::default_k_grid(),
            jobs: 1,
            timed: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub tools: Vec<String>,
    pub compare: String,
    pub fixup: String,
    pub k_grid: Vec<f64>,
    /// Correctness is judged against stored expected outputs rather than
    /// by running each project's test suite.
    pub oracle: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub tool: String,
    pub scenario: String,
    pub outcome: Outcome,
    pub elapsed_s: Option<f64>,
}

/// Everything in a report except the per-cell records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub tallies: BTreeMap<String, Tally>,
    pub er_curves: BTreeMap<String, Vec<ErPoint>>,
    pub pairwise_tools: Vec<String>,
    pub pairwise: Vec<Vec<u64>>,
    /// tag key → tool → tag value → tally.
    pub breakdowns: BTreeMap<String, BTreeMap<String, BTreeMap<String, Tally>>>,
    /// Present only for timed runs.
    pub runtime: BTreeMap<String, RuntimeStats>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub summary: ReportSummary,
    pub cells: Vec<ReportCell>,
}

struct CellComputation {
    tool: String,
    scenario_index: usize,
    outcome: Outcome,
    elapsed_s: Option<f64>,
    /// (scenario/path, result) for the pairwise matrix.
    file_results: Vec<(String, MergeResult)>,
}

fn compute_cell(tool: &ToolSpec, scenario: &MergeScenario, config: &EvalConfig) -> CellComputation {
    let runs = if config.timed { 3 } else { 1 };
    let mut times = Vec::with_capacity(runs);
    let mut results: Vec<MergeResult> = Vec::new();
    for _ in 0..runs {
        let mut total = 0.0f64;
        results = scenario
            .files
            .iter()
            .map(|f| {
                let (r, t) = run_tool(tool, &f.base, &f.left, &f.right);
                total += t.as_secs_f64();
                r
            })
            .collect();
        times.push(total);
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    let elapsed_s = config.timed.then(|| times[times.len() / 2]);

    // A fixup tool must not certify its own output: tools that already
    // apply the default fixup are classified with the identity fixup.
    let fixup = if config.fixup == Fixup::Ivn && tool.name().starts_with("ivn") {
        Fixup::Identity
    } else {
        config.fixup
    };
    let outcome = classify(scenario, &results, fixup, config.compare);
    let file_results = scenario
        .files
        .iter()
        .zip(&results)
        .map(|(f, r)| (format!("{}/{}", scenario.id, f.path), r.clone()))
        .collect();
    CellComputation {
        tool: tool.name().to_string(),
        scenario_index: 0, // overwritten by the caller
        outcome,
        elapsed_s,
        file_results,
    }
}

/// Run every tool over every scenario and assemble a report. Cells run in
/// parallel on a pool of `jobs` workers; the reduction is sorted, so the
/// report is identical for any worker count.
pub fn evaluate(scenarios: &[MergeScenario], config: &EvalConfig) -> Result<Report> {
    let mut ids = BTreeSet::new();
    for s in scenarios {
        if !ids.insert(&s.id) {
            return Err(Error::CorpusValidation(format!("duplicate scenario id {}", s.id)));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| Error::UndefinedMetric(format!("worker pool: {e}")))?;

    let cells_in: Vec<(usize, usize)> = (0..config.tools.len())
        .flat_map(|t| (0..scenarios.len()).map(move |s| (t, s)))
        .collect();
    let mut computed: Vec<CellComputation> = pool.install(|| {
        cells_in
            .par_iter()
            .map(|&(t, s)| {
                let mut cell = compute_cell(&config.tools[t], &scenarios[s], config);
                cell.scenario_index = s;
                cell
            })
            .collect()
    });
    computed.sort_by(|a, b| {
        (&a.tool, &scenarios[a.scenario_index].id)
            .cmp(&(&b.tool, &scenarios[b.scenario_index].id))
    });

    let mut cells = Vec::new();
    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    let mut per_tool_results: BTreeMap<String, BTreeMap<String, MergeResult>> = BTreeMap::new();
    let mut per_tool_outcomes: BTreeMap<String, Vec<(usize, crate::evalharness::OutcomeLabel)>> =
        BTreeMap::new();
    let mut per_tool_times: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for cell in &computed {
        let scenario = &scenarios[cell.scenario_index];
        tallies
            .entry(cell.tool.clone())
            .or_default()
            .add(cell.outcome.label);
        per_tool_outcomes
            .entry(cell.tool.clone())
            .or_default()
            .push((cell.scenario_index, cell.outcome.label));
        per_tool_results
            .entry(cell.tool.clone())
            .or_default()
            .extend(cell.file_results.iter().cloned());
        if let Some(t) = cell.elapsed_s {
            per_tool_times.entry(cell.tool.clone()).or_default().push(t);
        }
        cells.push(ReportCell {
            tool: cell.tool.clone(),
            scenario: scenario.id.clone(),
            outcome: cell.outcome.clone(),
            elapsed_s: cell.elapsed_s,
        });
    }
    // Tools with no scenarios still appear with empty tallies.
    for tool in &config.tools {
        tallies.entry(tool.name().to_string()).or_default();
    }

    let mut er_curves = BTreeMap::new();
    for (tool, tally) in &tallies {
        let curve = if tally.num_merges == 0 {
            Vec::new()
        } else {
            er_curve(tally, &config.k_grid)?
        };
        er_curves.insert(tool.clone(), curve);
    }

    let (pairwise_tools, pairwise) = if per_tool_results.is_empty() {
        (
            config.tools.iter().map(|t| t.name().to_string()).collect(),
            vec![vec![0u64; config.tools.len()]; config.tools.len()],
        )
    } else {
        pairwise_distinct(&per_tool_results, config.compare)?
    };

    let tag_keys: BTreeSet<String> = scenarios
        .iter()
        .flat_map(|s| s.tags.iter().map(|(k, _)| k.clone()))
        .collect();
    let mut breakdowns = BTreeMap::new();
    for key in tag_keys {
        let mut per_tool = BTreeMap::new();
        for (tool, outcomes) in &per_tool_outcomes {
            let labelled: Vec<(&MergeScenario, crate::evalharness::OutcomeLabel)> = outcomes
                .iter()
                .map(|&(si, label)| (&scenarios[si], label))
                .collect();
            per_tool.insert(tool.clone(), breakdown_by_tag(&labelled, &key));
        }
        breakdowns.insert(key, per_tool);
    }

    let mut runtime = BTreeMap::new();
    for (tool, times) in &per_tool_times {
        runtime.insert(tool.clone(), runtime_stats(times)?);
    }

    Ok(Report {
        summary: ReportSummary {
            schema_version: REPORT_SCHEMA_VERSION,
            config: ConfigEcho {
                tools: config.tools.iter().map(|t| t.name().to_string()).collect(),
                compare: config.compare.as_str().to_string(),
                fixup: config.fixup.as_str().to_string(),
                k_grid: config.k_grid.clone(),
                oracle: "expected-output comparison (stands in for test-suite execution)"
                    .to_string(),
            },
            tallies,
            er_curves,
            pairwise_tools,
            pairwise,
            breakdowns,
            runtime,
        },
        cells,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::WriteFile {
        path: path.to_path_buf(),
        source,
    })
}

/// Write `report.jsonl` (header record, then one record per cell) and
/// `report.csv` (flat per-cell table) into `dir`.
pub fn write_report(report: &Report, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|source| Error::WriteFile {
        path: dir.to_path_buf(),
        source,
    })?;
    let jsonl_path = dir.join("report.jsonl");
    let mut out: Vec<u8> = Vec::new();
    let header = serde_json::to_string(&report.summary).expect("report serializes");
    writeln!(out, "{header}").expect("in-memory write");
    for cell in &report.cells {
        let line = serde_json::to_string(cell).expect("cell serializes");
        writeln!(out, "{line}").expect("in-memory write");
    }
    write_file(&jsonl_path, &out)?;

    let csv_path = dir.join("report.csv");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "schema_version",
        "tool",
        "scenario",
        "label",
        "reclassified",
        "elapsed_s",
    ])
    .expect("csv header");
    for cell in &report.cells {
        let label = match cell.outcome.label {
            crate::evalharness::OutcomeLabel::Correct => "correct",
            crate::evalharness::OutcomeLabel::Incorrect => "incorrect",
            crate::evalharness::OutcomeLabel::Unhandled => "unhandled",
        };
        w.write_record([
            REPORT_SCHEMA_VERSION.to_string(),
            cell.tool.clone(),
            cell.scenario.clone(),
            label.to_string(),
            cell.outcome.reclassified.to_string(),
            cell.elapsed_s.map(|t| t.to_string()).unwrap_or_default(),
        ])
        .expect("csv row");
    }
    let csv_bytes = w.into_inner().expect("csv flush");
    write_file(&csv_path, &csv_bytes)?;
    Ok((jsonl_path, csv_path))
}

/// Read a report back from its JSON-lines summary.
pub fn read_report(dir: &Path) -> Result<Report> {
    let path = dir.join("report.jsonl");
    let bytes = read_bytes(&path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::ParseFile {
        path: path.clone(),
        reason: format!("not UTF-8: {e}"),
    })?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::ParseFile {
        path: path.clone(),
        reason: "empty report".into(),
    })?;
    let summary: ReportSummary = serde_json::from_str(header).map_err(|e| Error::ParseFile {
        path: path.clone(),
        reason: format!("header record: {e}"),
    })?;
    let mut cells = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cell: ReportCell = serde_json::from_str(line).map_err(|e| Error::ParseFile {
            path: path.clone(),
            reason: format!("cell record {}: {e}", i + 2),
        })?;
        cells.push(cell);
    }
    Ok(Report { summary, cells })
}
