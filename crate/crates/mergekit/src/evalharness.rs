//! Outcome classification, the effort-reduction cost model, and
//! cross-tool comparison — the measurement side of the toolkit.
//!
//! A merge outcome is `correct` (clean and matching the expected output),
//! `incorrect` (clean but different), or `unhandled` (conflicts remain).
//! A conflicted merge is additionally run through a fixup tool: if the
//! fixup completes it but the completed text is wrong, the original merge
//! must have mis-merged a hunk and the outcome is reclassified as
//! incorrect.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mergecore::{contains_conflict_fence, MergeResult, MIN_MARKER_LEN};
use crate::strategies::{fix_imports, fix_versions};
use crate::textmodel::{line_key, Document, WhitespaceMode};

/// One file of a merge scenario. An absent side (file added or deleted on
/// a branch) is an empty document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioFile {
    pub path: String,
    pub base: Document,
    pub left: Document,
    pub right: Document,
}

/// A complete merge scenario: the file triples, the expected merged
/// output for every path, and free-form `key=value` tags.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MergeScenario {
    pub id: String,
    pub files: Vec<ScenarioFile>,
    pub expected: Vec<(String, Document)>,
    pub tags: Vec<(String, String)>,
}

impl MergeScenario {
    pub fn expected_for(&self, path: &str) -> Option<&Document> {
        self.expected
            .iter()
            .find(|(p, _)| p == path)
            .map(|(_, d)| d)
    }

    pub fn tag(&self, key: &str) -> Option<&str> {
        self.tags
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeLabel {
    Correct,
    Incorrect,
    Unhandled,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDetail {
    pub path: String,
    pub clean: bool,
    pub matches_expected: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub label: OutcomeLabel,
    /// True when a conflicted merge was completed by the fixup tool and
    /// the completed text failed the oracle. Implies `label == Incorrect`.
    pub reclassified: bool,
    pub files: Vec<FileDetail>,
}

/// How tool output is compared against the expected output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompareMode {
    #[default]
    Exact,
    IgnoreSpace,
}

impl CompareMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CompareMode::Exact => "exact",
            CompareMode::IgnoreSpace => "ignore-space",
        }
    }

    pub fn parse(s: &str) -> Result<CompareMode> {
        match s {
            "exact" => Ok(CompareMode::Exact),
            "ignore-space" => Ok(CompareMode::IgnoreSpace),
            other => Err(Error::UndefinedMetric(format!(
                "unknown compare mode {other:?} (expected exact or ignore-space)"
            ))),
        }
    }
}

pub fn documents_match(a: &Document, b: &Document, compare: CompareMode) -> bool {
    match compare {
        CompareMode::Exact => a.to_bytes() == b.to_bytes(),
        CompareMode::IgnoreSpace => {
            a.line_count() == b.line_count()
                && a.lines.iter().zip(&b.lines).all(|(x, y)| {
                    line_key(x, WhitespaceMode::IgnoreSpaceChange)
                        == line_key(y, WhitespaceMode::IgnoreSpaceChange)
                })
        }
    }
}

/// Conflict-consuming post-processor used during classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Fixup {
    Identity,
    Imports,
    VersionNumbers,
    #[default]
    Ivn,
}

impl Fixup {
    pub fn as_str(self) -> &'static str {
        match self {
            Fixup::Identity => "identity",
            Fixup::Imports => "imports",
            Fixup::VersionNumbers => "version-numbers",
            Fixup::Ivn => "ivn",
        }
    }

    pub fn parse(s: &str) -> Result<Fixup> {
        match s {
            "identity" => Ok(Fixup::Identity),
            "imports" => Ok(Fixup::Imports),
            "version-numbers" => Ok(Fixup::VersionNumbers),
            "ivn" => Ok(Fixup::Ivn),
            other => Err(Error::UnknownTool {
                name: other.to_string(),
                valid: "identity, imports, version-numbers, ivn".into(),
            }),
        }
    }

    pub fn apply(self, r: &MergeResult, file: &ScenarioFile) -> MergeResult {
        match self {
            Fixup::Identity => r.clone(),
            Fixup::Imports => fix_imports(r, &file.base, &file.left, &file.right),
            Fixup::VersionNumbers => fix_versions(r),
            Fixup::Ivn => {
                fix_versions(&fix_imports(r, &file.base, &file.left, &file.right))
            }
        }
    }
}

/// Classify one tool's results on one scenario, `results` parallel to
/// `scenario.files`. A clean file whose content nevertheless contains a
/// conflict fence counts as conflicted, so a fenced file can never be
/// labeled correct.
pub fn classify(
    scenario: &MergeScenario,
    results: &[MergeResult],
    fixup: Fixup,
    compare: CompareMode,
) -> Outcome {
    assert_eq!(results.len(), scenario.files.len(), "one result per file");
    let mut files = Vec::new();
    let mut all_clean = true;
    let mut all_match = true;
    for (file, result) in scenario.files.iter().zip(results) {
        let doc = result.into_document();
        let clean = match &doc {
            Some(d) => !contains_conflict_fence(&d.to_bytes(), MIN_MARKER_LEN),
            None => false,
        };
        let matches = clean
            && scenario
                .expected_for(&file.path)
                .map(|exp| documents_match(doc.as_ref().unwrap(), exp, compare))
                .unwrap_or(false);
        all_clean &= clean;
        all_match &= matches;
        files.push(FileDetail { path: file.path.clone(), clean, matches_expected: matches });
    }

    if all_clean {
        let label = if all_match {
            OutcomeLabel::Correct
        } else {
            OutcomeLabel::Incorrect
        };
        return Outcome { label, reclassified: false, files };
    }

    // Conflicted: let the fixup try to complete it. A completed-but-wrong
    // result proves an earlier hunk was merged incorrectly.
    let mut completed = true;
    let mut completed_match = true;
    for (file, result) in scenario.files.iter().zip(results) {
        let fixed = if result.clean() {
            result.clone()
        } else {
            fixup.apply(result, file)
        };
        match fixed.into_document() {
            Some(doc) if !contains_conflict_fence(&doc.to_bytes(), MIN_MARKER_LEN) => {
                completed_match &= scenario
                    .expected_for(&file.path)
                    .map(|exp| documents_match(&doc, exp, compare))
                    .unwrap_or(false);
            }
            _ => {
                completed = false;
                break;
            }
        }
    }
    if completed && !completed_match {
        Outcome { label: OutcomeLabel::Incorrect, reclassified: true, files }
    } else {
        Outcome { label: OutcomeLabel::Unhandled, reclassified: false, files }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub num_merges: u64,
    pub num_correct: u64,
    pub num_incorrect: u64,
    pub num_unhandled: u64,
}

impl Tally {
    pub fn new(num_correct: u64, num_incorrect: u64, num_unhandled: u64) -> Tally {
        Tally {
            num_merges: num_correct + num_incorrect + num_unhandled,
            num_correct,
            num_incorrect,
            num_unhandled,
        }
    }

    pub fn add(&mut self, label: OutcomeLabel) {
        self.num_merges += 1;
        match label {
            OutcomeLabel::Correct => self.num_correct += 1,
            OutcomeLabel::Incorrect => self.num_incorrect += 1,
            OutcomeLabel::Unhandled => self.num_unhandled += 1,
        }
    }
}

/// Cost factor: how much more expensive an incorrect merge is to a
/// developer than an unhandled one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub k: f64,
}

/// `1 − (numUnhandled + numIncorrect·k) / numMerges`. 1 means every merge
/// was correct; 0 means no better than merging everything by hand; may go
/// negative for tools that mis-merge a lot.
pub fn effort_reduction(t: &Tally, k: f64) -> Result<f64> {
    if t.num_merges == 0 {
        return Err(Error::UndefinedMetric(
            "effort reduction over zero merges".into(),
        ));
    }
    if k <= 0.0 {
        return Err(Error::UndefinedMetric(format!(
            "cost factor must be positive, got {k}"
        )));
    }
    let n = t.num_merges as f64;
    Ok(1.0 - (t.num_unhandled as f64 + t.num_incorrect as f64 * k) / n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErPoint {
    pub k: f64,
    pub er: f64,
}

pub fn er_curve(t: &Tally, k_grid: &[f64]) -> Result<Vec<ErPoint>> {
    k_grid
        .iter()
        .map(|&k| effort_reduction(t, k).map(|er| ErPoint { k, er }))
        .collect()
}

/// The k at which two tools' effort-reduction lines cross, if any:
/// (U₂−U₁)/(I₁−I₂) in proportions of each tally.
pub fn crossover_k(a: &Tally, b: &Tally) -> Option<f64> {
    if a.num_merges == 0 || b.num_merges == 0 {
        return None;
    }
    let (na, nb) = (a.num_merges as f64, b.num_merges as f64);
    let di = a.num_incorrect as f64 / na - b.num_incorrect as f64 / nb;
    if di == 0.0 {
        return None;
    }
    let du = b.num_unhandled as f64 / nb - a.num_unhandled as f64 / na;
    Some(du / di)
}

/// Default evaluation grid: 20 points log-spaced over [0.25, 16].
pub fn default_k_grid() -> Vec<f64> {
    let (lo, hi, n) = (0.25f64, 16.0f64, 20);
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Entry (i, j): how many keys have both tools clean but with different
/// output under `compare`. Symmetric, zero diagonal. All tools must cover
/// the same key set.
pub fn pairwise_distinct(
    results: &BTreeMap<String, BTreeMap<String, MergeResult>>,
    compare: CompareMode,
) -> Result<(Vec<String>, Vec<Vec<u64>>)> {
    let tools: Vec<String> = results.keys().cloned().collect();
    let mut key_sets = results.values().map(|m| m.keys().collect::<BTreeSet<_>>());
    if let Some(first) = key_sets.next() {
        for (tool, other) in tools.iter().skip(1).zip(key_sets) {
            if other != first {
                return Err(Error::InputMismatch(format!(
                    "tool {tool} covers a different scenario set"
                )));
            }
        }
    }
    let mut matrix = vec![vec![0u64; tools.len()]; tools.len()];
    for (i, ti) in tools.iter().enumerate() {
        for (j, tj) in tools.iter().enumerate().skip(i + 1) {
            let mut count = 0;
            for (key, ri) in &results[ti] {
                let rj = &results[tj][key];
                if let (Some(di), Some(dj)) = (ri.into_document(), rj.into_document()) {
                    if !documents_match(&di, &dj, compare) {
                        count += 1;
                    }
                }
            }
            matrix[i][j] = count;
            matrix[j][i] = count;
        }
    }
    Ok((tools, matrix))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeStats {
    pub mean_s: f64,
    pub median_s: f64,
    pub max_s: f64,
}

/// Aggregate per-scenario times (each already the median of its repeated
/// runs) into mean/median/max.
pub fn runtime_stats(samples: &[f64]) -> Result<RuntimeStats> {
    if samples.is_empty() {
        return Err(Error::UndefinedMetric("runtime stats of no samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    let n = sorted.len();
    let median_s = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    Ok(RuntimeStats {
        mean_s: sorted.iter().sum::<f64>() / n as f64,
        median_s,
        max_s: sorted[n - 1],
    })
}

/// Group outcomes by a tag's value ("untagged" when the tag is absent)
/// and tally each group.
pub fn breakdown_by_tag(
    outcomes: &[(&MergeScenario, OutcomeLabel)],
    tag_key: &str,
) -> BTreeMap<String, Tally> {
    let mut map: BTreeMap<String, Tally> = BTreeMap::new();
    for (scenario, label) in outcomes {
        let value = scenario.tag(tag_key).unwrap_or("untagged").to_string();
        map.entry(value).or_default().add(*label);
    }
    map
}
