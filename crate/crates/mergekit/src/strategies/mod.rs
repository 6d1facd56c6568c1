//! Merge strategies beyond the plain line-level core, and the named
//! registry the CLI and evaluation harness dispatch through.

mod imports;
mod versions;

pub use imports::{fix_imports, parse_import, ImportStmt};
pub use versions::{find_version, fix_versions, VersionToken};

use std::time::{Duration, Instant};

use crate::align::{chunk3, refine_chunk3, ChunkKind};
use crate::error::{Error, Result};
use crate::mergecore::{merge_lines, resolve_changed, MergeResult, Segment};
use crate::textmodel::{explode_chars, implode_chars, Document, WhitespaceMode};

/// Default refinement cutoff for the adjacent strategy: conflict regions
/// longer than this (in lines, on any side) are left as conflicts.
pub const DEFAULT_ADJACENT_CUTOFF: usize = 200;

/// Character-level merge: run the line merge first, then retry each
/// remaining conflict with every character on its own line. A conflict is
/// replaced only when the character-level pass is clean; when the line
/// merge is already clean the output is identical to it.
pub fn merge_hires(
    base: &Document,
    left: &Document,
    right: &Document,
    ws: WhitespaceMode,
) -> MergeResult {
    let line_result = merge_lines(base, left, right, ws);
    if line_result.clean() {
        return line_result;
    }
    let mut out = MergeResult::default();
    for seg in line_result.segments {
        match seg {
            Segment::Resolved(lines) => out.push_resolved(lines),
            Segment::Conflict { base: b, left: l, right: r } => {
                let eb = explode_chars(&Document::from_lines(b.clone()));
                let el = explode_chars(&Document::from_lines(l.clone()));
                let er = explode_chars(&Document::from_lines(r.clone()));
                let char_result = merge_lines(&eb, &el, &er, ws);
                let imploded = char_result
                    .resolved_lines()
                    .and_then(|lines| implode_chars(&Document::from_lines(lines)).ok());
                match imploded {
                    Some(doc) => out.push_resolved(doc.lines),
                    None => out.push_conflict(b, l, r),
                }
            }
        }
    }
    out
}

/// Resolve non-overlapping edits on adjacent lines: refine each conflict
/// at single-line granularity and splice the resolution iff every refined
/// piece passes the four-case rule. Oversized regions and genuinely
/// overlapping edits keep the conflict.
pub fn merge_adjacent(
    base: &Document,
    left: &Document,
    right: &Document,
    cutoff: usize,
) -> MergeResult {
    let ws = WhitespaceMode::Exact;
    let chunks = chunk3(base, left, right, ws);
    let mut out = MergeResult::default();
    for chunk in &chunks {
        let bb = &base.lines[chunk.base.clone()];
        let lb = &left.lines[chunk.left.clone()];
        let rb = &right.lines[chunk.right.clone()];
        match chunk.kind {
            ChunkKind::Stable => {
                let lines = lb
                    .iter()
                    .zip(rb)
                    .zip(bb)
                    .map(|((l, r), b)| if l != b { l.clone() } else { r.clone() })
                    .collect();
                out.push_resolved(lines);
            }
            ChunkKind::Changed => {
                if let Some(lines) = resolve_changed(bb, lb, rb, ws) {
                    out.push_resolved(lines.to_vec());
                    continue;
                }
                let refined = match refine_chunk3(chunk, base, left, right, ws, cutoff) {
                    Ok(refined) => refined,
                    Err(_) => {
                        out.push_conflict(bb.to_vec(), lb.to_vec(), rb.to_vec());
                        continue;
                    }
                };
                let mut spliced = Vec::new();
                let mut all_resolved = true;
                for rc in &refined {
                    let rl = &left.lines[rc.left.clone()];
                    match rc.kind {
                        ChunkKind::Stable => spliced.extend_from_slice(rl),
                        ChunkKind::Changed => {
                            let rbse = &base.lines[rc.base.clone()];
                            let rr = &right.lines[rc.right.clone()];
                            match resolve_changed(rbse, rl, rr, ws) {
                                Some(lines) => spliced.extend_from_slice(lines),
                                None => {
                                    all_resolved = false;
                                    break;
                                }
                            }
                        }
                    }
                }
                if all_resolved {
                    out.push_resolved(spliced);
                } else {
                    out.push_conflict(bb.to_vec(), lb.to_vec(), rb.to_vec());
                }
            }
        }
    }
    out
}

/// Imports-then-version-numbers fixups composed over the line merge.
pub fn merge_ivn(
    base: &Document,
    left: &Document,
    right: &Document,
    ws: WhitespaceMode,
) -> MergeResult {
    let line_result = merge_lines(base, left, right, ws);
    fix_versions(&fix_imports(&line_result, base, left, right))
}

/// Stable public tool names, in registry order.
pub const TOOL_NAMES: [&str; 8] = [
    "gitline",
    "gitline-ignorespace",
    "hires",
    "adjacent",
    "imports",
    "version-numbers",
    "ivn",
    "ivn-ignorespace",
];

/// A named, fully configured merge tool.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToolSpec {
    name: &'static str,
    pub ws: WhitespaceMode,
    pub cutoff: usize,
}

impl ToolSpec {
    pub fn by_name(name: &str) -> Result<ToolSpec> {
        let canonical = TOOL_NAMES
            .iter()
            .find(|&&n| n == name)
            .ok_or_else(|| Error::UnknownTool {
                name: name.to_string(),
                valid: TOOL_NAMES.join(", "),
            })?;
        let ws = if name.ends_with("-ignorespace") {
            WhitespaceMode::IgnoreSpaceChange
        } else {
            WhitespaceMode::Exact
        };
        Ok(ToolSpec { name: canonical, ws, cutoff: DEFAULT_ADJACENT_CUTOFF })
    }

    pub fn all() -> Vec<ToolSpec> {
        TOOL_NAMES
            .iter()
            .map(|n| ToolSpec::by_name(n).expect("registry names are valid"))
            .collect()
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn merge(&self, base: &Document, left: &Document, right: &Document) -> MergeResult {
        match self.name {
            "gitline" | "gitline-ignorespace" => merge_lines(base, left, right, self.ws),
            "hires" => merge_hires(base, left, right, self.ws),
            "adjacent" => merge_adjacent(base, left, right, self.cutoff),
            "imports" => {
                let r = merge_lines(base, left, right, self.ws);
                fix_imports(&r, base, left, right)
            }
            "version-numbers" => fix_versions(&merge_lines(base, left, right, self.ws)),
            "ivn" | "ivn-ignorespace" => merge_ivn(base, left, right, self.ws),
            other => unreachable!("unregistered tool {other}"),
        }
    }
}

/// Run a tool and report its wall-clock time.
pub fn run_tool(
    spec: &ToolSpec,
    base: &Document,
    left: &Document,
    right: &Document,
) -> (MergeResult, Duration) {
    let start = Instant::now();
    let result = spec.merge(base, left, right);
    (result, start.elapsed())
}
