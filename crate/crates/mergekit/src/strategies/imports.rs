//! Conflict fixup for Java import statements.
//!
//! Conflicts whose bodies contain nothing but import statements (and
//! blank lines) are replaced by an ordered union of the two parents'
//! imports, filtered by whether each imported name is actually used in
//! the merged code. Imports deleted by one parent but still used are
//! re-introduced.

use std::collections::HashSet;
use std::sync::OnceLock;

use regex::Regex;

use crate::mergecore::{MergeResult, Segment};
use crate::textmodel::{Document, Line, Terminator};

/// A parsed Java import line. `raw` preserves the original line bytes so
/// emission never reformats.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImportStmt {
    pub raw: Line,
    pub is_static: bool,
    pub path: String,
    pub is_wildcard: bool,
}

impl ImportStmt {
    /// Last path segment; absent for wildcard imports.
    pub fn simple_name(&self) -> Option<&str> {
        if self.is_wildcard {
            None
        } else {
            self.path.rsplit('.').next()
        }
    }

    /// Identity for union/deduplication purposes.
    fn key(&self) -> (bool, &str, bool) {
        (self.is_static, self.path.as_str(), self.is_wildcard)
    }
}

fn import_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^\s*import\s+(static\s+)?([A-Za-z_$][A-Za-z0-9_$]*(?:\.[A-Za-z_$][A-Za-z0-9_$]*)*)(\.\*)?\s*;\s*(//.*)?$",
        )
        .expect("import pattern compiles")
    })
}

/// Parse one line as a Java import statement, or return None.
pub fn parse_import(line: &Line) -> Option<ImportStmt> {
    let text = line.content_str()?;
    let caps = import_re().captures(text)?;
    Some(ImportStmt {
        raw: line.clone(),
        is_static: caps.get(1).is_some(),
        path: caps[2].to_string(),
        is_wildcard: caps.get(3).is_some(),
    })
}

fn is_blank(line: &Line) -> bool {
    line.content.iter().all(|&b| b == b' ' || b == b'\t')
}

fn import_only(lines: &[Line]) -> bool {
    lines.iter().all(|l| is_blank(l) || parse_import(l).is_some())
}

/// Remove //, /* */, "..." and '...' spans so identifier scanning does
/// not see names that appear only in comments or literals.
fn strip_comments_and_strings(text: &str) -> String {
    #[derive(PartialEq)]
    enum S {
        Code,
        LineComment,
        BlockComment,
        Str,
        Chr,
    }
    let mut state = S::Code;
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match state {
            S::Code => match c {
                '/' if chars.peek() == Some(&'/') => {
                    chars.next();
                    state = S::LineComment;
                }
                '/' if chars.peek() == Some(&'*') => {
                    chars.next();
                    state = S::BlockComment;
                }
                '"' => {
                    state = S::Str;
                    out.push(' ');
                }
                '\'' => {
                    state = S::Chr;
                    out.push(' ');
                }
                _ => out.push(c),
            },
            S::LineComment => {
                if c == '\n' {
                    out.push('\n');
                    state = S::Code;
                }
            }
            S::BlockComment => {
                if c == '*' && chars.peek() == Some(&'/') {
                    chars.next();
                    state = S::Code;
                    out.push(' ');
                } else if c == '\n' {
                    out.push('\n');
                }
            }
            S::Str => match c {
                '\\' => {
                    chars.next();
                }
                '"' => state = S::Code,
                '\n' => {
                    out.push('\n');
                    state = S::Code;
                }
                _ => {}
            },
            S::Chr => match c {
                '\\' => {
                    chars.next();
                }
                '\'' => state = S::Code,
                '\n' => {
                    out.push('\n');
                    state = S::Code;
                }
                _ => {}
            },
        }
    }
    out
}

fn identifier_tokens(text: &str) -> HashSet<String> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE
        .get_or_init(|| Regex::new(r"[A-Za-z_$][A-Za-z0-9_$]*").expect("identifier pattern"));
    re.find_iter(text).map(|m| m.as_str().to_string()).collect()
}

/// All identifier tokens in the merged non-import text. Unresolved
/// non-import conflicts contribute both parent bodies, so a name used on
/// either side counts as used.
fn merged_body_identifiers(r: &MergeResult) -> HashSet<String> {
    let mut text = String::new();
    let mut add_lines = |lines: &[Line]| {
        for line in lines {
            if parse_import(line).is_none() {
                if let Some(s) = line.content_str() {
                    text.push_str(s);
                }
                text.push('\n');
            }
        }
    };
    for seg in &r.segments {
        match seg {
            Segment::Resolved(lines) => add_lines(lines),
            Segment::Conflict { left, right, .. } => {
                add_lines(left);
                add_lines(right);
            }
        }
    }
    identifier_tokens(&strip_comments_and_strings(&text))
}

fn imports_of(lines: &[Line]) -> Vec<ImportStmt> {
    lines.iter().filter_map(parse_import).collect()
}

/// Ensure the emitted line ends in a newline so following text stays on
/// its own line.
fn terminated(mut line: Line) -> Line {
    if line.terminator == Terminator::None {
        line.terminator = Terminator::Lf;
    }
    line
}

/// Resolve import-only conflicts and re-introduce deleted-but-used
/// imports. See the module docs for the full rule set; non-import
/// conflicts and resolved non-import text are never touched.
pub fn fix_imports(
    r: &MergeResult,
    base: &Document,
    _left: &Document,
    _right: &Document,
) -> MergeResult {
    let used = merged_body_identifiers(r);
    let keep = |imp: &ImportStmt| match imp.simple_name() {
        Some(name) => used.contains(name),
        None => true, // wildcard imports from either parent always survive
    };

    let mut out = MergeResult::default();
    for seg in &r.segments {
        match seg {
            Segment::Resolved(lines) => out.push_resolved(lines.clone()),
            Segment::Conflict { base: b, left: l, right: rr } => {
                if !(import_only(b) && import_only(l) && import_only(rr)) {
                    out.push_conflict(b.clone(), l.clone(), rr.clone());
                    continue;
                }
                // Ordered union: left parent's imports in left order,
                // then right-only imports in right order.
                let left_imports = imports_of(l);
                let mut union = left_imports.clone();
                for imp in imports_of(rr) {
                    if !union.iter().any(|u| u.key() == imp.key()) {
                        union.push(imp);
                    }
                }
                let lines: Vec<Line> = union
                    .into_iter()
                    .filter(keep)
                    .map(|imp| terminated(imp.raw))
                    .collect();
                out.push_resolved(lines);
            }
        }
    }

    // Re-introduce base imports whose names the merged body still uses.
    let mut present: HashSet<(bool, String, bool)> = HashSet::new();
    for seg in &out.segments {
        let lines = match seg {
            Segment::Resolved(lines) => lines.as_slice(),
            Segment::Conflict { left, .. } => left.as_slice(),
        };
        for imp in imports_of(lines) {
            present.insert((imp.is_static, imp.path.clone(), imp.is_wildcard));
        }
        if let Segment::Conflict { right, .. } = seg {
            for imp in imports_of(right) {
                present.insert((imp.is_static, imp.path.clone(), imp.is_wildcard));
            }
        }
    }
    let missing: Vec<Line> = imports_of(&base.lines)
        .into_iter()
        .filter(|imp| {
            let k = (imp.is_static, imp.path.clone(), imp.is_wildcard);
            !present.contains(&k)
                && imp
                    .simple_name()
                    .map(|n| used.contains(n))
                    .unwrap_or(false)
        })
        .map(|imp| terminated(imp.raw))
        .collect();
    if missing.is_empty() {
        return out;
    }

    // Insert after the last import line in resolved text; with no
    // imports at all, prepend to the file.
    let mut insert_at: Option<(usize, usize)> = None;
    for (si, seg) in out.segments.iter().enumerate() {
        if let Segment::Resolved(lines) = seg {
            for (li, line) in lines.iter().enumerate() {
                if parse_import(line).is_some() {
                    insert_at = Some((si, li + 1));
                }
            }
        }
    }
    match insert_at {
        Some((si, li)) => {
            if let Segment::Resolved(lines) = &mut out.segments[si] {
                lines.splice(li..li, missing);
            }
        }
        None => {
            let mut segments = vec![Segment::Resolved(missing)];
            segments.append(&mut out.segments);
            out = MergeResult { segments };
            // Re-establish coalescing if the file began with resolved text.
            let mut coalesced = MergeResult::default();
            for seg in out.segments {
                match seg {
                    Segment::Resolved(lines) => coalesced.push_resolved(lines),
                    Segment::Conflict { base, left, right } => {
                        coalesced.push_conflict(base, left, right)
                    }
                }
            }
            out = coalesced;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mergecore::merge_lines;
    use crate::textmodel::WhitespaceMode;

    fn doc(lines: &[&str]) -> Document {
        let mut text = String::new();
        for l in lines {
            text.push_str(l);
            text.push('\n');
        }
        Document::from_str(&text)
    }

    fn line(s: &str) -> Line {
        Line::new(s, Terminator::Lf)
    }

    #[test]
    fn parse_simple_import() {
        let imp = parse_import(&line("import a.b.C;")).unwrap();
        assert!(!imp.is_static);
        assert!(!imp.is_wildcard);
        assert_eq!(imp.path, "a.b.C");
        assert_eq!(imp.simple_name(), Some("C"));
    }

    #[test]
    fn parse_wildcard_and_static() {
        let imp = parse_import(&line("import de.hochschuletrier.gdw.ss14.ecs.components.*;"))
            .unwrap();
        assert!(imp.is_wildcard);
        assert_eq!(imp.simple_name(), None);
        let imp = parse_import(&line("  import static java.lang.Math.max; // keep")).unwrap();
        assert!(imp.is_static);
        assert_eq!(imp.simple_name(), Some("max"));
    }

    #[test]
    fn parse_rejects_non_imports() {
        assert!(parse_import(&line("int x;")).is_none());
        assert!(parse_import(&line("important();")).is_none());
        assert!(parse_import(&line("import a.b.C")).is_none());
    }

    #[test]
    fn union_keeps_both_used_imports_left_first() {
        let base = doc(&["import a.A;", "class T { A a; B b; C c; }"]);
        let left = doc(&["import a.A;", "import b.B;", "class T { A a; B b; C c; }"]);
        let right = doc(&["import a.A;", "import c.C;", "class T { A a; B b; C c; }"]);
        let r = merge_lines(&base, &left, &right, WhitespaceMode::Exact);
        assert_eq!(r.conflict_count(), 1);
        let fixed = fix_imports(&r, &base, &left, &right);
        assert!(fixed.clean());
        assert_eq!(
            fixed.into_document().unwrap(),
            doc(&["import a.A;", "import b.B;", "import c.C;", "class T { A a; B b; C c; }"])
        );
    }

    #[test]
    fn unused_imports_dropped_wildcards_kept() {
        let base = doc(&["import a.A;", "class T { }"]);
        let left = doc(&["import a.A;", "import b.Unused;", "class T { }"]);
        let right = doc(&["import a.A;", "import c.*;", "class T { }"]);
        let r = merge_lines(&base, &left, &right, WhitespaceMode::Exact);
        let fixed = fix_imports(&r, &base, &left, &right);
        assert!(fixed.clean());
        assert_eq!(
            fixed.into_document().unwrap(),
            doc(&["import a.A;", "import c.*;", "class T { }"])
        );
    }

    #[test]
    fn deleted_but_used_import_reintroduced() {
        // Left cleanly deletes the import; right's body change still uses
        // the name, so the import comes back after the remaining imports.
        let base = doc(&["import x.X;", "import y.Y;", "class T { Y y; }"]);
        let left = doc(&["import y.Y;", "class T { Y y; }"]);
        let right = doc(&["import x.X;", "import y.Y;", "class T { Y y; X x; }"]);
        let r = merge_lines(&base, &left, &right, WhitespaceMode::Exact);
        assert!(r.clean());
        let fixed = fix_imports(&r, &base, &left, &right);
        assert!(fixed.clean());
        assert_eq!(
            fixed.into_document().unwrap(),
            doc(&["import y.Y;", "import x.X;", "class T { Y y; X x; }"])
        );
    }

    #[test]
    fn clean_result_without_import_issues_unchanged() {
        let base = doc(&["import a.A;", "class T { A a; }"]);
        let r = merge_lines(&base, &base, &base, WhitespaceMode::Exact);
        assert_eq!(fix_imports(&r, &base, &base, &base), r);
    }

    #[test]
    fn non_import_conflicts_untouched() {
        let base = doc(&["int x = 1;"]);
        let left = doc(&["int x = 2;"]);
        let right = doc(&["int x = 3;"]);
        let r = merge_lines(&base, &left, &right, WhitespaceMode::Exact);
        assert_eq!(fix_imports(&r, &base, &left, &right), r);
    }

    #[test]
    fn usage_in_comments_and_strings_does_not_count() {
        let body = "class T { /* B */ String s = \"C\"; }";
        let base = doc(&["import a.A;", body]);
        let left = doc(&["import a.A;", "import b.B;", body]);
        let right = doc(&["import a.A;", "import c.C;", body]);
        let r = merge_lines(&base, &left, &right, WhitespaceMode::Exact);
        let fixed = fix_imports(&r, &base, &left, &right);
        assert!(fixed.clean());
        // A is unused too, so only the merged body text survives.
        let text = fixed.into_document().unwrap().to_string_lossy();
        assert!(!text.contains("import b.B;"));
        assert!(!text.contains("import c.C;"));
    }

    #[test]
    fn idempotent() {
        let base = doc(&["import a.A;", "class T { A a; B b; C c; }"]);
        let left = doc(&["import a.A;", "import b.B;", "class T { A a; B b; C c; }"]);
        let right = doc(&["import a.A;", "import c.C;", "class T { A a; B b; C c; }"]);
        let r = merge_lines(&base, &left, &right, WhitespaceMode::Exact);
        let once = fix_imports(&r, &base, &left, &right);
        let twice = fix_imports(&once, &base, &left, &right);
        assert_eq!(once, twice);
    }

    #[test]
    fn strip_lexer_cases() {
        let s = strip_comments_and_strings("a // b\nc /* d */ e \"f\" 'g' h");
        let ids = identifier_tokens(&s);
        for present in ["a", "c", "e", "h"] {
            assert!(ids.contains(present), "{present} should remain");
        }
        for absent in ["b", "d", "f", "g"] {
            assert!(!ids.contains(absent), "{absent} should be stripped");
        }
    }
}
