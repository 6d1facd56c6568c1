//! Conflict fixup for version-number bumps.
//!
//! A single-line conflict whose three lines are identical except for one
//! version token, where both parents raised the version above the base,
//! resolves to the larger of the two parent versions.

use std::cmp::Ordering;
use std::ops::Range;
use std::sync::OnceLock;

use regex::Regex;

use crate::mergecore::{MergeResult, Segment};
use crate::textmodel::Line;

/// A dotted version number found inside a line, e.g. `2.3.1-SNAPSHOT`.
/// At least one period is required, so plain integers never match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VersionToken {
    pub components: Vec<u64>,
    pub suffix: String,
    pub span: Range<usize>,
}

impl VersionToken {
    /// Reconstruct the exact matched text.
    pub fn render(&self) -> String {
        let nums: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        format!("{}{}", nums.join("."), self.suffix)
    }

    /// Component-wise numeric comparison, the shorter side padded with
    /// zeros; suffixes are ignored here.
    pub fn cmp_numeric(&self, other: &VersionToken) -> Ordering {
        let len = self.components.len().max(other.components.len());
        for i in 0..len {
            let a = self.components.get(i).copied().unwrap_or(0);
            let b = other.components.get(i).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

fn version_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(\d+(?:\.\d+)+)([-A-Za-z0-9._]+)?").expect("version pattern compiles")
    })
}

/// The first version token in the line, or None. Components that
/// overflow u64 do not match.
pub fn find_version(line: &Line) -> Option<VersionToken> {
    let text = line.content_str()?;
    let caps = version_re().captures(text)?;
    let whole = caps.get(0)?;
    let components: Option<Vec<u64>> = caps[1].split('.').map(|c| c.parse().ok()).collect();
    Some(VersionToken {
        components: components?,
        suffix: caps.get(2).map(|m| m.as_str().to_string()).unwrap_or_default(),
        span: whole.range(),
    })
}

/// The line text with the version token blanked out, for checking that
/// lines differ only in the token.
fn context_of(line: &Line, tok: &VersionToken) -> (Vec<u8>, Vec<u8>) {
    (
        line.content[..tok.span.start].to_vec(),
        line.content[tok.span.end..].to_vec(),
    )
}

fn resolve_version_conflict(base: &[Line], left: &[Line], right: &[Line]) -> Option<Line> {
    let ([b], [l], [r]) = (base, left, right) else {
        return None;
    };
    let vb = find_version(b)?;
    let vl = find_version(l)?;
    let vr = find_version(r)?;
    let ctx = context_of(b, &vb);
    if context_of(l, &vl) != ctx || context_of(r, &vr) != ctx {
        return None;
    }
    if vl.cmp_numeric(&vb) != Ordering::Greater || vr.cmp_numeric(&vb) != Ordering::Greater {
        return None;
    }
    match vl.cmp_numeric(&vr) {
        Ordering::Greater => Some(l.clone()),
        Ordering::Less => Some(r.clone()),
        // Same number but different suffixes is a policy question, not a
        // mergeable difference.
        Ordering::Equal if vl.suffix == vr.suffix => Some(l.clone()),
        Ordering::Equal => None,
    }
}

/// Resolve qualifying single-line version conflicts; everything else is
/// passed through untouched.
pub fn fix_versions(r: &MergeResult) -> MergeResult {
    let mut out = MergeResult::default();
    for seg in &r.segments {
        match seg {
            Segment::Resolved(lines) => out.push_resolved(lines.clone()),
            Segment::Conflict { base, left, right } => {
                match resolve_version_conflict(base, left, right) {
                    Some(line) => out.push_resolved(vec![line]),
                    None => out.push_conflict(base.clone(), left.clone(), right.clone()),
                }
            }
        }
    }
    out
}
