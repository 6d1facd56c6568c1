//! Chunk resolution and conflict representation.
//!
//! `resolve` applies the classic four-case rule to each changed chunk:
//! take the text both parents agree on, take the one-sided change, or
//! report a conflict. `render`/`parse_conflicts` convert between
//! [`MergeResult`] and marker-fenced text in merge, diff3, and zdiff3
//! styles.

use crate::align::{chunk3, Chunk3, ChunkKind};
use crate::error::{Error, Result};
use crate::textmodel::{line_key, Document, Line, Terminator, WhitespaceMode};

/// One region of merge output: either resolved text or an unresolved
/// conflict carrying all three bodies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Segment {
    Resolved(Vec<Line>),
    Conflict {
        base: Vec<Line>,
        left: Vec<Line>,
        right: Vec<Line>,
    },
}

/// Ordered merge output. Adjacent `Resolved` segments are coalesced, so
/// the result is clean iff `segments` contains no `Conflict`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MergeResult {
    pub segments: Vec<Segment>,
}

impl MergeResult {
    pub fn clean(&self) -> bool {
        self.conflict_count() == 0
    }

    pub fn conflict_count(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| matches!(s, Segment::Conflict { .. }))
            .count()
    }

    /// Append resolved lines, merging into a trailing `Resolved` segment.
    pub fn push_resolved(&mut self, lines: Vec<Line>) {
        if lines.is_empty() {
            return;
        }
        if let Some(Segment::Resolved(existing)) = self.segments.last_mut() {
            existing.extend(lines);
        } else {
            self.segments.push(Segment::Resolved(lines));
        }
    }

    pub fn push_conflict(&mut self, base: Vec<Line>, left: Vec<Line>, right: Vec<Line>) {
        self.segments.push(Segment::Conflict { base, left, right });
    }

    /// Resolved lines exactly as stored, if the result is clean — no
    /// newline normalization, for callers working in exploded character
    /// form where terminators are deliberately absent.
    pub fn resolved_lines(&self) -> Option<Vec<Line>> {
        let mut lines = Vec::new();
        for seg in &self.segments {
            match seg {
                Segment::Resolved(ls) => lines.extend(ls.iter().cloned()),
                Segment::Conflict { .. } => return None,
            }
        }
        Some(lines)
    }

    /// The merged document, if the result is clean. A line missing its
    /// final newline can end up mid-document when a parent's last line is
    /// followed by the other parent's insertion; terminate it so lines
    /// never run together.
    pub fn into_document(&self) -> Option<Document> {
        let mut lines = self.resolved_lines()?;
        let last = lines.len().wrapping_sub(1);
        for (i, line) in lines.iter_mut().enumerate() {
            if i != last && line.terminator == Terminator::None {
                line.terminator = Terminator::Lf;
            }
        }
        Some(Document::from_lines(lines))
    }
}

/// Conflict rendering style family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StyleKind {
    Merge,
    #[default]
    Diff3,
    Zdiff3,
}

/// How conflicts are fenced. `marker_len` is clamped to the conventional
/// minimum of 7 so output stays recognizable to other merge tooling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictStyle {
    pub style: StyleKind,
    pub marker_len: usize,
    pub left_label: String,
    pub base_label: String,
    pub right_label: String,
}

pub const MIN_MARKER_LEN: usize = 7;

impl Default for ConflictStyle {
    fn default() -> Self {
        ConflictStyle::new(StyleKind::Diff3, MIN_MARKER_LEN)
    }
}

impl ConflictStyle {
    pub fn new(style: StyleKind, marker_len: usize) -> Self {
        ConflictStyle {
            style,
            marker_len: marker_len.max(MIN_MARKER_LEN),
            left_label: "LEFT".into(),
            base_label: "BASE".into(),
            right_label: "RIGHT".into(),
        }
    }

    pub fn with_labels(mut self, left: &str, base: &str, right: &str) -> Self {
        self.left_label = left.into();
        self.base_label = base.into();
        self.right_label = right.into();
        self
    }
}

fn keys_equal(a: &[Line], b: &[Line], ws: WhitespaceMode) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| line_key(x, ws) == line_key(y, ws))
}

/// The four-case rule for one changed chunk. Returns the lines to emit,
/// or `None` for a conflict. When both sides agree only up to whitespace,
/// the left parent's bytes win.
pub(crate) fn resolve_changed<'a>(
    base: &'a [Line],
    left: &'a [Line],
    right: &'a [Line],
    ws: WhitespaceMode,
) -> Option<&'a [Line]> {
    if keys_equal(left, right, ws) {
        Some(left)
    } else if keys_equal(left, base, ws) {
        Some(right)
    } else if keys_equal(right, base, ws) {
        Some(left)
    } else {
        None
    }
}

/// Resolve a chunk partition into a merge result. Within stable chunks
/// each line takes the left parent's bytes if they differ from the base
/// (a whitespace or line-ending change under ignore-space-change), else
/// the right parent's — so a byte-level change from either side survives.
pub fn resolve(
    chunks: &[Chunk3],
    base: &Document,
    left: &Document,
    right: &Document,
    ws: WhitespaceMode,
) -> MergeResult {
    let mut result = MergeResult::default();
    for chunk in chunks {
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
                result.push_resolved(lines);
            }
            ChunkKind::Changed => match resolve_changed(bb, lb, rb, ws) {
                Some(lines) => result.push_resolved(lines.to_vec()),
                None => result.push_conflict(bb.to_vec(), lb.to_vec(), rb.to_vec()),
            },
        }
    }
    result
}

/// Line-level three-way merge: chunk, then resolve.
pub fn merge_lines(
    base: &Document,
    left: &Document,
    right: &Document,
    ws: WhitespaceMode,
) -> MergeResult {
    resolve(&chunk3(base, left, right, ws), base, left, right, ws)
}

/// Start a fresh output line: if the buffer ends with an unterminated
/// line (a parent's final line emitted mid-document), close it first so
/// content and fence markers never run together.
fn ensure_newline(out: &mut Vec<u8>) {
    if !out.is_empty() && out.last() != Some(&b'\n') {
        out.push(b'\n');
    }
}

fn push_line(out: &mut Vec<u8>, line: &Line) {
    ensure_newline(out);
    out.extend_from_slice(&line.content);
    out.extend_from_slice(line.terminator.as_bytes());
}

/// Conflict-body lines always end in a newline in rendered form so the
/// following fence marker starts a fresh line.
fn push_body(out: &mut Vec<u8>, lines: &[Line]) {
    for line in lines {
        ensure_newline(out);
        out.extend_from_slice(&line.content);
        match line.terminator {
            Terminator::None => out.push(b'\n'),
            t => out.extend_from_slice(t.as_bytes()),
        }
    }
}

fn push_marker(out: &mut Vec<u8>, ch: u8, len: usize, label: Option<&str>) {
    ensure_newline(out);
    out.extend(std::iter::repeat(ch).take(len));
    if let Some(label) = label {
        if !label.is_empty() {
            out.push(b' ');
            out.extend_from_slice(label.as_bytes());
        }
    }
    out.push(b'\n');
}

/// Longest common prefix/suffix (byte-exact lines) of the two parent
/// bodies; the suffix never overlaps the prefix.
fn common_affixes(left: &[Line], right: &[Line]) -> (usize, usize) {
    let limit = left.len().min(right.len());
    let mut prefix = 0;
    while prefix < limit && left[prefix] == right[prefix] {
        prefix += 1;
    }
    let mut suffix = 0;
    while suffix < limit - prefix
        && left[left.len() - 1 - suffix] == right[right.len() - 1 - suffix]
    {
        suffix += 1;
    }
    (prefix, suffix)
}

/// Serialize a merge result. Conflicts become marker fences; in zdiff3
/// style, lines common to both parents are hoisted outside the fence and
/// the base body is trimmed by the same counts (bounded by its length) —
/// an approximation that can misrepresent the base, faithfully mirroring
/// the style's known weakness.
pub fn render(result: &MergeResult, style: &ConflictStyle) -> Vec<u8> {
    let mut out = Vec::new();
    for seg in &result.segments {
        match seg {
            Segment::Resolved(lines) => {
                for line in lines {
                    push_line(&mut out, line);
                }
            }
            Segment::Conflict { base, left, right } => {
                let (prefix, suffix) = match style.style {
                    StyleKind::Zdiff3 => common_affixes(left, right),
                    _ => (0, 0),
                };
                push_body(&mut out, &left[..prefix]);
                let base_lo = prefix.min(base.len());
                let base_hi = base.len() - suffix.min(base.len() - base_lo);
                push_marker(&mut out, b'<', style.marker_len, Some(&style.left_label));
                push_body(&mut out, &left[prefix..left.len() - suffix]);
                if style.style != StyleKind::Merge {
                    push_marker(&mut out, b'|', style.marker_len, Some(&style.base_label));
                    push_body(&mut out, &base[base_lo..base_hi]);
                }
                push_marker(&mut out, b'=', style.marker_len, None);
                push_body(&mut out, &right[prefix..right.len() - suffix]);
                push_marker(&mut out, b'>', style.marker_len, Some(&style.right_label));
                push_body(&mut out, &left[left.len() - suffix..]);
            }
        }
    }
    out
}

fn is_marker(line: &Line, ch: u8, len: usize) -> bool {
    line.content.len() >= len
        && line.content[..len].iter().all(|&b| b == ch)
        && (line.content.len() == len || line.content[len] == b' ')
}

/// Does the text contain a conflict fence opener of the given length?
pub fn contains_conflict_fence(text: &[u8], marker_len: usize) -> bool {
    Document::from_bytes(text)
        .lines
        .iter()
        .any(|l| is_marker(l, b'<', marker_len))
}

/// Parse fenced text back into segments — the inverse of [`render`] for
/// diff3 style. Merge-style fences yield conflicts with empty base
/// bodies. Stray `=======`/`>>>>>>>` lines outside a fence are content;
/// an unclosed or misordered fence is an error.
pub fn parse_conflicts(text: &[u8], style: &ConflictStyle) -> Result<MergeResult> {
    let doc = Document::from_bytes(text);
    let len = style.marker_len;
    let mut result = MergeResult::default();
    let mut pending: Vec<Line> = Vec::new();
    let mut i = 0;
    let lines = &doc.lines;
    while i < lines.len() {
        if !is_marker(&lines[i], b'<', len) {
            pending.push(lines[i].clone());
            i += 1;
            continue;
        }
        result.push_resolved(std::mem::take(&mut pending));
        let open_line = i + 1;
        i += 1;
        let mut left = Vec::new();
        let mut base = Vec::new();
        let mut right = Vec::new();
        // 0 = left body, 1 = base body, 2 = right body.
        let mut section = 0;
        loop {
            if i >= lines.len() {
                return Err(Error::MalformedConflict {
                    line: open_line,
                    reason: "conflict start without matching end marker".into(),
                });
            }
            let line = &lines[i];
            if is_marker(line, b'<', len) {
                return Err(Error::MalformedConflict {
                    line: i + 1,
                    reason: "conflict start inside an open conflict".into(),
                });
            } else if is_marker(line, b'|', len) && style.style != StyleKind::Merge {
                if section != 0 {
                    return Err(Error::MalformedConflict {
                        line: i + 1,
                        reason: "base divider after the body divider".into(),
                    });
                }
                section = 1;
            } else if is_marker(line, b'=', len) {
                if section == 2 {
                    return Err(Error::MalformedConflict {
                        line: i + 1,
                        reason: "duplicate body divider".into(),
                    });
                }
                section = 2;
            } else if is_marker(line, b'>', len) {
                if section != 2 {
                    return Err(Error::MalformedConflict {
                        line: i + 1,
                        reason: "conflict end before the body divider".into(),
                    });
                }
                i += 1;
                break;
            } else {
                match section {
                    0 => left.push(line.clone()),
                    1 => base.push(line.clone()),
                    _ => right.push(line.clone()),
                }
            }
            i += 1;
        }
        result.push_conflict(base, left, right);
    }
    result.push_resolved(pending);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(lines: &[&str]) -> Document {
        let mut text = String::new();
        for l in lines {
            text.push_str(l);
            text.push('\n');
        }
        Document::from_str(&text)
    }

    const WS: WhitespaceMode = WhitespaceMode::Exact;

    #[test]
    fn one_sided_change_is_clean() {
        let x = doc(&["a", "b"]);
        let y = doc(&["a", "c"]);
        let r = merge_lines(&x, &x, &y, WS);
        assert!(r.clean());
        assert_eq!(r.into_document().unwrap(), y);
        let r = merge_lines(&x, &y, &x, WS);
        assert_eq!(r.into_document().unwrap(), y);
    }

    #[test]
    fn same_region_edits_conflict() {
        // Both parents touch the aligned middle region.
        let base = doc(&["def main():", "    n = 128", "    print(n)"]);
        let left = doc(&["def main():", "    n_people = 128", "    print(n_people)"]);
        let right = doc(&["def main():", "    n = 64", "    print(n)"]);
        let r = merge_lines(&base, &left, &right, WS);
        assert_eq!(r.conflict_count(), 1);
        match &r.segments[1] {
            Segment::Conflict { base: b, left: l, right: rr } => {
                assert_eq!(b.len(), 2);
                assert_eq!(l.len(), 2);
                assert_eq!(rr.len(), 2);
            }
            other => panic!("expected conflict, got {other:?}"),
        }
    }

    #[test]
    fn distant_edits_merge_cleanly_even_when_wrong() {
        // A rename on line 1 and a new call site on line 4 merge without
        // conflict; the output contains both edits, which breaks the
        // program — clean does not imply correct.
        let base = doc(&[
            "def mult(a, b):",
            "    return a * b",
            "def main():",
            "    a = 3 * 5",
            "    print(a)",
        ]);
        let left = doc(&[
            "def multiply(a, b):",
            "    return a * b",
            "def main():",
            "    a = 3 * 5",
            "    print(a)",
        ]);
        let right = doc(&[
            "def mult(a, b):",
            "    return a * b",
            "def main():",
            "    a = mult(3, 5)",
            "    print(a)",
        ]);
        let merged = doc(&[
            "def multiply(a, b):",
            "    return a * b",
            "def main():",
            "    a = mult(3, 5)",
            "    print(a)",
        ]);
        let r = merge_lines(&base, &left, &right, WS);
        assert!(r.clean());
        assert_eq!(r.into_document().unwrap(), merged);
    }

    #[test]
    fn agreement_emits_left_bytes() {
        let base = doc(&["x = 1"]);
        let left = doc(&["x  =  2"]);
        let right = doc(&["x = 2"]);
        let r = merge_lines(&base, &left, &right, WhitespaceMode::IgnoreSpaceChange);
        assert!(r.clean());
        assert_eq!(r.into_document().unwrap().to_bytes(), b"x  =  2\n");
    }

    #[test]
    fn render_diff3_layout() {
        let base = doc(&["m"]);
        let left = doc(&["l"]);
        let right = doc(&["r"]);
        let r = merge_lines(&base, &left, &right, WS);
        let text = render(&r, &ConflictStyle::default());
        assert_eq!(
            String::from_utf8(text).unwrap(),
            "<<<<<<< LEFT\nl\n||||||| BASE\nm\n=======\nr\n>>>>>>> RIGHT\n"
        );
    }

    #[test]
    fn render_merge_style_omits_base() {
        let r = merge_lines(&doc(&["m"]), &doc(&["l"]), &doc(&["r"]), WS);
        let text = render(&r, &ConflictStyle::new(StyleKind::Merge, 7));
        assert_eq!(
            String::from_utf8(text).unwrap(),
            "<<<<<<< LEFT\nl\n=======\nr\n>>>>>>> RIGHT\n"
        );
    }

    #[test]
    fn render_zdiff3_hoists_common_lines() {
        let mut r = MergeResult::default();
        r.push_conflict(
            doc(&["p", "m"]).lines,
            doc(&["p", "x"]).lines,
            doc(&["p", "y"]).lines,
        );
        let text = render(&r, &ConflictStyle::new(StyleKind::Zdiff3, 7));
        assert_eq!(
            String::from_utf8(text).unwrap(),
            "p\n<<<<<<< LEFT\nx\n||||||| BASE\nm\n=======\ny\n>>>>>>> RIGHT\n"
        );
    }

    #[test]
    fn render_clean_is_verbatim() {
        let x = doc(&["a", "b"]);
        let r = merge_lines(&x, &x, &x, WS);
        assert_eq!(render(&r, &ConflictStyle::default()), b"a\nb\n");
    }

    #[test]
    fn parse_round_trip() {
        let base = doc(&["keep", "m", "tail"]);
        let left = doc(&["keep", "l1", "l2", "tail"]);
        let right = doc(&["keep", "r", "tail"]);
        let r = merge_lines(&base, &left, &right, WS);
        assert_eq!(r.conflict_count(), 1);
        let style = ConflictStyle::default();
        let parsed = parse_conflicts(&render(&r, &style), &style).unwrap();
        assert_eq!(parsed, r);
    }

    #[test]
    fn parse_no_markers_is_clean() {
        let style = ConflictStyle::default();
        let r = parse_conflicts(b"plain\ntext\n", &style).unwrap();
        assert!(r.clean());
        assert_eq!(r.segments.len(), 1);
    }

    #[test]
    fn parse_merge_style_has_empty_base() {
        let style = ConflictStyle::new(StyleKind::Merge, 7);
        let r = parse_conflicts(b"<<<<<<< LEFT\nl\n=======\nr\n>>>>>>> RIGHT\n", &style)
            .unwrap();
        match &r.segments[0] {
            Segment::Conflict { base, .. } => assert!(base.is_empty()),
            other => panic!("expected conflict, got {other:?}"),
        }
    }

    #[test]
    fn parse_unclosed_fence_errors() {
        let style = ConflictStyle::default();
        let err = parse_conflicts(b"a\n<<<<<<< LEFT\nl\n", &style);
        match err {
            Err(Error::MalformedConflict { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed-conflict error, got {other:?}"),
        }
    }

    #[test]
    fn parse_stray_closers_are_content() {
        let style = ConflictStyle::default();
        let r = parse_conflicts(b"=======\n>>>>>>> x\n", &style).unwrap();
        assert!(r.clean());
    }

    #[test]
    fn fence_scan() {
        assert!(contains_conflict_fence(b"a\n<<<<<<< LEFT\n", 7));
        assert!(!contains_conflict_fence(b"a\n<<<<<<not a marker\n", 7));
        assert!(!contains_conflict_fence(b"plain\n", 7));
    }

    #[test]
    fn whole_document_identities() {
        let b = doc(&["a", "b"]);
        let x = doc(&["a", "c", "d"]);
        for (bb, l, r, want) in [
            (&b, &b, &b, &b),
            (&b, &x, &b, &x),
            (&b, &b, &x, &x),
            (&b, &x, &x, &x),
        ] {
            let m = merge_lines(bb, l, r, WS);
            assert!(m.clean());
            assert_eq!(&m.into_document().unwrap(), want);
        }
    }

    #[test]
    fn parent_swap_preserves_conflict_count() {
        let base = doc(&["a", "b", "c"]);
        let left = doc(&["a", "x", "c"]);
        let right = doc(&["a", "y", "c"]);
        let fwd = merge_lines(&base, &left, &right, WS);
        let rev = merge_lines(&base, &right, &left, WS);
        assert_eq!(fwd.conflict_count(), rev.conflict_count());
    }
}
