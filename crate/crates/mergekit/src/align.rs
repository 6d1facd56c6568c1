//! Pairwise diff and three-way chunking.
//!
//! `diff2` is a Myers greedy diff over line comparison keys. `chunk3`
//! intersects the base→left and base→right diffs to partition the three
//! documents into stable and changed regions; everything between two
//! stable runs is a single changed chunk, which is exactly why edits on
//! adjacent lines conflict at this level. `refine_chunk3` re-partitions a
//! changed chunk at single-line granularity so that non-overlapping
//! adjacent edits can be resolved separately.

use std::collections::HashMap;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::textmodel::{line_key, Document, LineKey, WhitespaceMode};

/// One span of an edit script transforming sequence A into sequence B.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EditOp {
    /// The next `n` lines of A are kept (they match the next `n` of B).
    Keep(usize),
    /// The next `n` lines of A are removed.
    Delete(usize),
    /// `n` lines of B are inserted at this point.
    Insert(usize),
}

/// A coalesced edit script. Within a changed run the script is
/// canonicalized to deletions followed by insertions.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
}

impl EditScript {
    /// Number of deleted plus inserted lines.
    pub fn cost(&self) -> usize {
        self.ops
            .iter()
            .map(|op| match op {
                EditOp::Keep(_) => 0,
                EditOp::Delete(n) | EditOp::Insert(n) => *n,
            })
            .sum()
    }

    /// Apply the script to `a`, pulling inserted lines from `b`. Kept
    /// lines are taken from `a`, so in exact mode the result equals `b`
    /// byte for byte.
    pub fn apply(&self, a: &Document, b: &Document) -> Document {
        let mut out = Vec::new();
        let (mut ai, mut bi) = (0usize, 0usize);
        for op in &self.ops {
            match *op {
                EditOp::Keep(n) => {
                    out.extend_from_slice(&a.lines[ai..ai + n]);
                    ai += n;
                    bi += n;
                }
                EditOp::Delete(n) => ai += n,
                EditOp::Insert(n) => {
                    out.extend_from_slice(&b.lines[bi..bi + n]);
                    bi += n;
                }
            }
        }
        Document::from_lines(out)
    }
}

#[derive(Default)]
struct Interner {
    map: HashMap<LineKey, u32>,
}

impl Interner {
    fn ids(&mut self, doc: &Document, ws: WhitespaceMode) -> Vec<u32> {
        doc.lines
            .iter()
            .map(|line| {
                let key = line_key(line, ws);
                let next = self.map.len() as u32;
                *self.map.entry(key).or_insert(next)
            })
            .collect()
    }
}

/// Myers greedy diff over interned line keys.
pub fn diff2(a: &Document, b: &Document, ws: WhitespaceMode) -> EditScript {
    let mut interner = Interner::default();
    let ida = interner.ids(a, ws);
    let idb = interner.ids(b, ws);
    EditScript { ops: coalesce(myers_steps(&ida, &idb)) }
}

/// Single-step ops from the classic O((N+M)D) greedy algorithm.
fn myers_steps(a: &[u32], b: &[u32]) -> Vec<EditOp> {
    let n = a.len() as isize;
    let m = b.len() as isize;
    let max = n + m;
    if max == 0 {
        return Vec::new();
    }
    let offset = max;
    let mut v = vec![0isize; (2 * max + 1) as usize];
    let mut trace: Vec<Vec<isize>> = Vec::new();
    let mut found_d = None;
    'outer: for d in 0..=max {
        trace.push(v.clone());
        let mut k = -d;
        while k <= d {
            let idx = (k + offset) as usize;
            let mut x = if k == -d || (k != d && v[idx - 1] < v[idx + 1]) {
                v[idx + 1]
            } else {
                v[idx - 1] + 1
            };
            let mut y = x - k;
            while x < n && y < m && a[x as usize] == b[y as usize] {
                x += 1;
                y += 1;
            }
            v[idx] = x;
            if x >= n && y >= m {
                found_d = Some(d);
                break 'outer;
            }
            k += 2;
        }
    }
    let d_final = found_d.expect("search space exhausted without reaching the end");

    let mut rev = Vec::new();
    let mut x = n;
    let mut y = m;
    for d in (0..=d_final).rev() {
        let vd = &trace[d as usize];
        let k = x - y;
        let idx = (k + offset) as usize;
        let prev_k = if k == -d || (k != d && vd[idx - 1] < vd[idx + 1]) {
            k + 1
        } else {
            k - 1
        };
        let prev_x = vd[(prev_k + offset) as usize];
        let prev_y = prev_x - prev_k;
        while x > prev_x && y > prev_y {
            rev.push(EditOp::Keep(1));
            x -= 1;
            y -= 1;
        }
        if d > 0 {
            if x == prev_x {
                rev.push(EditOp::Insert(1));
                y -= 1;
            } else {
                rev.push(EditOp::Delete(1));
                x -= 1;
            }
        }
    }
    rev.reverse();
    rev
}

/// Merge runs of single-step ops; each maximal non-Keep run becomes
/// Delete-then-Insert.
fn coalesce(steps: Vec<EditOp>) -> Vec<EditOp> {
    let mut ops = Vec::new();
    let mut keeps = 0usize;
    let mut dels = 0usize;
    let mut inss = 0usize;
    let flush_changed = |ops: &mut Vec<EditOp>, dels: &mut usize, inss: &mut usize| {
        if *dels > 0 {
            ops.push(EditOp::Delete(*dels));
            *dels = 0;
        }
        if *inss > 0 {
            ops.push(EditOp::Insert(*inss));
            *inss = 0;
        }
    };
    for step in steps {
        match step {
            EditOp::Keep(n) => {
                flush_changed(&mut ops, &mut dels, &mut inss);
                keeps += n;
            }
            EditOp::Delete(n) => {
                if keeps > 0 {
                    ops.push(EditOp::Keep(keeps));
                    keeps = 0;
                }
                dels += n;
            }
            EditOp::Insert(n) => {
                if keeps > 0 {
                    ops.push(EditOp::Keep(keeps));
                    keeps = 0;
                }
                inss += n;
            }
        }
    }
    if keeps > 0 {
        ops.push(EditOp::Keep(keeps));
    }
    flush_changed(&mut ops, &mut dels, &mut inss);
    ops
}

/// For each index of A, the index of B it is kept at, or None if deleted.
pub fn kept_map(script: &EditScript, a_len: usize) -> Vec<Option<usize>> {
    let mut map = vec![None; a_len];
    let (mut ai, mut bi) = (0usize, 0usize);
    for op in &script.ops {
        match *op {
            EditOp::Keep(n) => {
                for i in 0..n {
                    map[ai + i] = Some(bi + i);
                }
                ai += n;
                bi += n;
            }
            EditOp::Delete(n) => ai += n,
            EditOp::Insert(n) => bi += n,
        }
    }
    map
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChunkKind {
    Stable,
    Changed,
}

/// One aligned region of the three documents. For stable chunks the three
/// ranges have equal length and pairwise-equal line keys; the ranges of
/// consecutive chunks tile each document without gaps or overlaps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chunk3 {
    pub kind: ChunkKind,
    pub base: Range<usize>,
    pub left: Range<usize>,
    pub right: Range<usize>,
}

/// Partition (base, left, right) into stable and changed chunks. A base
/// line is stable iff it is kept by both pairwise diffs at compatible
/// positions; insertions break a stable run, so same-point insertions by
/// both parents end up in one changed chunk.
pub fn chunk3(
    base: &Document,
    left: &Document,
    right: &Document,
    ws: WhitespaceMode,
) -> Vec<Chunk3> {
    let script_l = diff2(base, left, ws);
    let script_r = diff2(base, right, ws);
    let nb = base.line_count();
    let nl = left.line_count();
    let nr = right.line_count();
    let ml = kept_map(&script_l, nb);
    let mr = kept_map(&script_r, nb);

    let mut chunks = Vec::new();
    let (mut b, mut l, mut r) = (0usize, 0usize, 0usize);
    while b < nb || l < nl || r < nr {
        let mut i = b;
        while i < nb {
            let k = i - b;
            if ml[i] == Some(l + k) && mr[i] == Some(r + k) {
                i += 1;
            } else {
                break;
            }
        }
        if i > b {
            let len = i - b;
            chunks.push(Chunk3 {
                kind: ChunkKind::Stable,
                base: b..i,
                left: l..l + len,
                right: r..r + len,
            });
            b = i;
            l += len;
            r += len;
            continue;
        }
        let mut j = b;
        while j < nb && !(ml[j].is_some() && mr[j].is_some()) {
            j += 1;
        }
        let (le, re) = if j < nb {
            (ml[j].unwrap(), mr[j].unwrap())
        } else {
            (nl, nr)
        };
        chunks.push(Chunk3 { kind: ChunkKind::Changed, base: b..j, left: l..le, right: r..re });
        b = j;
        l = le;
        r = re;
    }
    chunks
}

/// A contiguous changed region of a pairwise diff: the replaced base
/// range and its replacement range in the other document.
#[derive(Clone, Debug, PartialEq, Eq)]
struct RawHunk {
    base: Range<usize>,
    repl: Range<usize>,
}

fn script_hunks(script: &EditScript) -> Vec<RawHunk> {
    let mut hunks = Vec::new();
    let (mut ai, mut bi) = (0usize, 0usize);
    let mut current: Option<RawHunk> = None;
    for op in &script.ops {
        match *op {
            EditOp::Keep(n) => {
                if let Some(h) = current.take() {
                    hunks.push(h);
                }
                ai += n;
                bi += n;
            }
            EditOp::Delete(n) => {
                let h = current.get_or_insert(RawHunk { base: ai..ai, repl: bi..bi });
                h.base.end += n;
                ai += n;
            }
            EditOp::Insert(n) => {
                let h = current.get_or_insert(RawHunk { base: ai..ai, repl: bi..bi });
                h.repl.end += n;
                bi += n;
            }
        }
    }
    if let Some(h) = current.take() {
        hunks.push(h);
    }
    hunks
}

/// Do two base ranges collide? Touching ranges do not (that is the whole
/// point of adjacent-line refinement), but two insertions at the same
/// point do, as does an insertion strictly inside a replaced range.
fn base_ranges_collide(a: &Range<usize>, b: &Range<usize>) -> bool {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => a.start == b.start,
        (true, false) => b.start < a.start && a.start < b.end,
        (false, true) => a.start < b.start && b.start < a.end,
        (false, false) => a.start < b.end && b.start < a.end,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

struct HunkGroup {
    hull: Range<usize>,
    members: Vec<(Side, RawHunk)>,
}

/// Re-partition a changed chunk at single-line granularity. The pairwise
/// diffs of the chunk's bodies are recomputed; each maximal set of
/// colliding hunks becomes one changed sub-chunk and the base lines kept
/// by both sides become stable sub-chunks. Regions larger than `cutoff`
/// lines on any side are refused.
pub fn refine_chunk3(
    chunk: &Chunk3,
    base: &Document,
    left: &Document,
    right: &Document,
    ws: WhitespaceMode,
    cutoff: usize,
) -> Result<Vec<Chunk3>> {
    debug_assert_eq!(chunk.kind, ChunkKind::Changed);
    let longest = chunk
        .base
        .len()
        .max(chunk.left.len())
        .max(chunk.right.len());
    if longest > cutoff {
        return Err(Error::RefinementRefused { lines: longest, cutoff });
    }

    let sub = |doc: &Document, range: &Range<usize>| {
        Document::from_lines(doc.lines[range.clone()].to_vec())
    };
    let base_sub = sub(base, &chunk.base);
    let left_sub = sub(left, &chunk.left);
    let right_sub = sub(right, &chunk.right);
    let nb = base_sub.line_count();

    let script_l = diff2(&base_sub, &left_sub, ws);
    let script_r = diff2(&base_sub, &right_sub, ws);

    let mut all: Vec<(Side, RawHunk)> = script_hunks(&script_l)
        .into_iter()
        .map(|h| (Side::Left, h))
        .chain(script_hunks(&script_r).into_iter().map(|h| (Side::Right, h)))
        .collect();
    all.sort_by_key(|(side, h)| (h.base.start, h.base.end, matches!(side, Side::Right)));

    // Transitive closure of the collision relation.
    let mut groups: Vec<HunkGroup> = Vec::new();
    for (side, hunk) in all {
        let joined = groups.iter_mut().find(|g| {
            g.members
                .iter()
                .any(|(_, m)| base_ranges_collide(&m.base, &hunk.base))
        });
        match joined {
            Some(g) => {
                g.hull = g.hull.start.min(hunk.base.start)..g.hull.end.max(hunk.base.end);
                g.members.push((side, hunk));
            }
            None => groups.push(HunkGroup { hull: hunk.base.clone(), members: vec![(side, hunk)] }),
        }
    }
    groups.sort_by_key(|g| (g.hull.start, g.hull.end));

    let covered = |groups: &[HunkGroup], side: Side, i: usize| {
        groups.iter().any(|g| {
            g.members
                .iter()
                .any(|(s, h)| *s == side && h.base.contains(&i))
        })
    };

    let mut chunks = Vec::new();
    let (mut b, mut l, mut r) = (0usize, 0usize, 0usize);
    let emit_stable = |chunks: &mut Vec<Chunk3>, b: &mut usize, l: &mut usize, r: &mut usize, upto: usize| {
        if upto > *b {
            let len = upto - *b;
            chunks.push(Chunk3 {
                kind: ChunkKind::Stable,
                base: *b..upto,
                left: *l..*l + len,
                right: *r..*r + len,
            });
            *b = upto;
            *l += len;
            *r += len;
        }
    };
    for g in &groups {
        emit_stable(&mut chunks, &mut b, &mut l, &mut r, g.hull.start);
        let side_len = |side: Side| {
            let replaced: usize = g
                .members
                .iter()
                .filter(|(s, _)| *s == side)
                .map(|(_, h)| h.repl.len())
                .sum();
            let kept = (g.hull.clone())
                .filter(|&i| !covered(&groups, side, i))
                .count();
            replaced + kept
        };
        let llen = side_len(Side::Left);
        let rlen = side_len(Side::Right);
        chunks.push(Chunk3 {
            kind: ChunkKind::Changed,
            base: g.hull.clone(),
            left: l..l + llen,
            right: r..r + rlen,
        });
        b = g.hull.end;
        l += llen;
        r += rlen;
    }
    emit_stable(&mut chunks, &mut b, &mut l, &mut r, nb);
    debug_assert_eq!(l, left_sub.line_count());
    debug_assert_eq!(r, right_sub.line_count());

    // Shift from chunk-relative to absolute coordinates.
    for c in &mut chunks {
        c.base = c.base.start + chunk.base.start..c.base.end + chunk.base.start;
        c.left = c.left.start + chunk.left.start..c.left.end + chunk.left.start;
        c.right = c.right.start + chunk.right.start..c.right.end + chunk.right.start;
    }
    Ok(chunks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textmodel::WhitespaceMode::Exact;

    fn doc(lines: &[&str]) -> Document {
        let mut text = String::new();
        for l in lines {
            text.push_str(l);
            text.push('\n');
        }
        Document::from_str(&text)
    }

    #[test]
    fn diff2_single_line_replace() {
        let s = diff2(&doc(&["n = 128"]), &doc(&["n_people = 128"]), Exact);
        assert_eq!(s.ops, vec![EditOp::Delete(1), EditOp::Insert(1)]);
    }

    #[test]
    fn diff2_identity() {
        let x = doc(&["a", "b", "c"]);
        assert_eq!(diff2(&x, &x, Exact).ops, vec![EditOp::Keep(3)]);
    }

    #[test]
    fn diff2_middle_delete() {
        let s = diff2(&doc(&["a", "b", "c"]), &doc(&["a", "c"]), Exact);
        assert_eq!(s.ops, vec![EditOp::Keep(1), EditOp::Delete(1), EditOp::Keep(1)]);
    }

    #[test]
    fn diff2_empty_sides() {
        assert_eq!(diff2(&doc(&[]), &doc(&[]), Exact).ops, vec![]);
        assert_eq!(diff2(&doc(&["a"]), &doc(&[]), Exact).ops, vec![EditOp::Delete(1)]);
        assert_eq!(diff2(&doc(&[]), &doc(&["a"]), Exact).ops, vec![EditOp::Insert(1)]);
    }

    #[test]
    fn diff2_apply_reconstructs() {
        let a = doc(&["a", "b", "c", "d", "e"]);
        let b = doc(&["b", "x", "c", "e", "f"]);
        let s = diff2(&a, &b, Exact);
        assert_eq!(s.apply(&a, &b), b);
    }

    #[test]
    fn chunk3_fig1_bodies() {
        // Both parents touch the aligned middle region: one stable line
        // then one changed chunk over lines 2-3 of all three documents.
        let base = doc(&["def main():", "    n = 128", "    print(n)"]);
        let left = doc(&["def main():", "    n_people = 128", "    print(n_people)"]);
        let right = doc(&["def main():", "    n = 64", "    print(n)"]);
        let chunks = chunk3(&base, &left, &right, Exact);
        assert_eq!(
            chunks,
            vec![
                Chunk3 { kind: ChunkKind::Stable, base: 0..1, left: 0..1, right: 0..1 },
                Chunk3 { kind: ChunkKind::Changed, base: 1..3, left: 1..3, right: 1..3 },
            ]
        );
    }

    #[test]
    fn chunk3_identity() {
        let x = doc(&["a", "b", "c"]);
        let chunks = chunk3(&x, &x, &x, Exact);
        assert_eq!(
            chunks,
            vec![Chunk3 { kind: ChunkKind::Stable, base: 0..3, left: 0..3, right: 0..3 }]
        );
    }

    #[test]
    fn chunk3_separated_edits() {
        let base = doc(&["one", "two", "three"]);
        let left = doc(&["ONE", "two", "three"]);
        let right = doc(&["one", "two", "THREE"]);
        let kinds: Vec<ChunkKind> = chunk3(&base, &left, &right, Exact)
            .iter()
            .map(|c| c.kind)
            .collect();
        assert_eq!(kinds, vec![ChunkKind::Changed, ChunkKind::Stable, ChunkKind::Changed]);
    }

    #[test]
    fn chunk3_tiling() {
        let base = doc(&["a", "b", "c", "d"]);
        let left = doc(&["a", "x", "c", "d", "e"]);
        let right = doc(&["b", "c", "y", "d"]);
        let chunks = chunk3(&base, &left, &right, Exact);
        let mut b = 0;
        let mut l = 0;
        let mut r = 0;
        for c in &chunks {
            assert_eq!(c.base.start, b);
            assert_eq!(c.left.start, l);
            assert_eq!(c.right.start, r);
            b = c.base.end;
            l = c.left.end;
            r = c.right.end;
        }
        assert_eq!((b, l, r), (4, 5, 4));
    }

    #[test]
    fn refine_adjacent_single_lines() {
        // Left edits base line 0, right edits base line 1.
        let base = doc(&["alpha", "beta"]);
        let left = doc(&["ALPHA", "beta"]);
        let right = doc(&["alpha", "BETA"]);
        let coarse = Chunk3 { kind: ChunkKind::Changed, base: 0..2, left: 0..2, right: 0..2 };
        let refined = refine_chunk3(&coarse, &base, &left, &right, Exact, 200).unwrap();
        assert_eq!(
            refined,
            vec![
                Chunk3 { kind: ChunkKind::Changed, base: 0..1, left: 0..1, right: 0..1 },
                Chunk3 { kind: ChunkKind::Changed, base: 1..2, left: 1..2, right: 1..2 },
            ]
        );
    }

    #[test]
    fn refine_one_sided_deletion() {
        let base = doc(&["a", "b"]);
        let left = doc(&[]);
        let right = doc(&["a", "b"]);
        let coarse = Chunk3 { kind: ChunkKind::Changed, base: 0..2, left: 0..0, right: 0..2 };
        let refined = refine_chunk3(&coarse, &base, &left, &right, Exact, 200).unwrap();
        assert_eq!(
            refined,
            vec![Chunk3 { kind: ChunkKind::Changed, base: 0..2, left: 0..0, right: 0..2 }]
        );
    }

    #[test]
    fn refine_cutoff_refused() {
        let base = doc(&["a", "b", "c"]);
        let coarse = Chunk3 { kind: ChunkKind::Changed, base: 0..3, left: 0..3, right: 0..3 };
        let err = refine_chunk3(&coarse, &base, &base, &base, Exact, 2);
        assert!(matches!(err, Err(Error::RefinementRefused { .. })));
    }

    #[test]
    fn refine_same_point_insertions_collide() {
        let base = doc(&["a", "b"]);
        let left = doc(&["a", "x", "b"]);
        let right = doc(&["a", "y", "b"]);
        // At the coarse level this is already one changed chunk between
        // the stable a and b.
        let chunks = chunk3(&base, &left, &right, Exact);
        let changed: Vec<_> = chunks.iter().filter(|c| c.kind == ChunkKind::Changed).collect();
        assert_eq!(changed.len(), 1);
        let refined =
            refine_chunk3(changed[0], &base, &left, &right, Exact, 200).unwrap();
        let refined_changed: Vec<_> =
            refined.iter().filter(|c| c.kind == ChunkKind::Changed).collect();
        assert_eq!(refined_changed.len(), 1);
        assert!(!refined_changed[0].left.is_empty());
        assert!(!refined_changed[0].right.is_empty());
    }

    /// Brute-force LCS length for cross-checking diff2 minimality.
    fn lcs_len(a: &[&str], b: &[&str]) -> usize {
        let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for i in (0..a.len()).rev() {
            for j in (0..b.len()).rev() {
                dp[i][j] = if a[i] == b[j] {
                    dp[i + 1][j + 1] + 1
                } else {
                    dp[i + 1][j].max(dp[i][j + 1])
                };
            }
        }
        dp[0][0]
    }

    #[test]
    fn diff2_minimal_on_small_inputs() {
        // All pairs of line sequences of length <= 4 over {a, b}.
        let seqs: Vec<Vec<&str>> = {
            let mut all = vec![vec![]];
            for _ in 0..4 {
                let mut next = all.clone();
                for s in &all {
                    for sym in ["a", "b"] {
                        let mut t = s.clone();
                        t.push(sym);
                        next.push(t);
                    }
                }
                all = next;
                all.sort();
                all.dedup();
            }
            all
        };
        for sa in &seqs {
            for sb in &seqs {
                let da = doc(sa);
                let db = doc(sb);
                let script = diff2(&da, &db, Exact);
                let expected = sa.len() + sb.len() - 2 * lcs_len(sa, sb);
                assert_eq!(script.cost(), expected, "cost of {sa:?} -> {sb:?}");
                assert_eq!(script.apply(&da, &db), db, "apply of {sa:?} -> {sb:?}");
            }
        }
    }
}
