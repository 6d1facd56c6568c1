//! The built-in golden corpus: small, hand-transcribed merge scenarios
//! with known-good expected outputs and documented tool behaviors
//! (including the cases where a tool is confidently wrong). These pin
//! down end-to-end behavior byte for byte.

use crate::evalharness::{MergeScenario, ScenarioFile};
use crate::textmodel::Document;

fn scenario(
    id: &str,
    source: &str,
    files: Vec<(&str, &str, &str, &str, &str)>,
) -> MergeScenario {
    let mut scenario_files = Vec::new();
    let mut expected = Vec::new();
    for (path, base, left, right, exp) in files {
        scenario_files.push(ScenarioFile {
            path: path.to_string(),
            base: Document::from_str(base),
            left: Document::from_str(left),
            right: Document::from_str(right),
        });
        expected.push((path.to_string(), Document::from_str(exp)));
    }
    MergeScenario {
        id: id.to_string(),
        files: scenario_files,
        expected,
        tags: vec![("source".to_string(), source.to_string())],
    }
}

/// The clean but race-prone text the adjacent strategy produces on
/// scenario 5184-31: the removal result is read outside the synchronized
/// block that one parent introduced.
pub const RACE_PRONE_SPLICE_5184: &str = "\
boolean result = false;
synchronized (cacheMap) {
    List<DNSEntry> entryList = cacheMap.get(dnsEntry.getKey());
    if (entryList != null) {
        result = entryList.remove(dnsEntry);
    }
}
/* Remove from DNS cache when no records remain with this key */
if (result && entryList.isEmpty()) {
    this.remove(dnsEntry.getKey());
}
";

const SUFFIX_5184: &str = "    }\n}\n/* Remove from DNS cache when no records remain with this key */\nif (result && entryList.isEmpty()) {\n    this.remove(dnsEntry.getKey());\n}\n";

fn imports_8323(extra: bool) -> String {
    // 22 component imports shared by base and left; left additionally
    // imports the two ExitMap components its new code uses.
    let shared = [
        "AnimationComponent",
        "CameraComponent",
        "CatPhysicsComponent",
        "CatPropertyComponent",
        "ConePhysicsComponent",
        "ConePropertyComponent",
        "DogPhysicsComponent",
        "DogPropertyComponent",
        "DoorComponent",
        "EnemyComponent",
        "InputComponent",
        "JumpDataComponent",
        "LaserPointerComponent",
        "LightComponent",
        "MovementComponent",
        "ParticleEmitterComponent",
        "PlayerComponent",
        "PositionComponent",
        "RenderComponent",
        "ShadowComponent",
        "SoundEmitterComponent",
        "WaterPuddleComponent",
    ];
    let extras = ["ExitMapPhysicsComponent", "ExitMapPropertyComponent"];
    let mut out = String::new();
    for name in shared.iter().take(10) {
        out.push_str(&format!(
            "import de.hochschuletrier.gdw.ss14.ecs.components.{name};\n"
        ));
    }
    if extra {
        for name in extras {
            out.push_str(&format!(
                "import de.hochschuletrier.gdw.ss14.ecs.components.{name};\n"
            ));
        }
    }
    for name in shared.iter().skip(10) {
        out.push_str(&format!(
            "import de.hochschuletrier.gdw.ss14.ecs.components.{name};\n"
        ));
    }
    out
}

/// The bundled corpus of transcribed merge scenarios.
pub fn import_golden_suite() -> Vec<MergeScenario> {
    let mut scenarios = Vec::new();

    // A variable rename and a value change on the same two lines: the
    // line merge conflicts, the character merge combines both edits.
    scenarios.push(scenario(
        "fig1",
        "main",
        vec![(
            "main.py",
            "def main():\n    n = 128\n    print(n)\n",
            "def main():\n    n_people = 128\n    print(n_people)\n",
            "def main():\n    n = 64\n    print(n)\n",
            "def main():\n    n_people = 64\n    print(n_people)\n",
        )],
    ));

    // A function rename far from a new call site of the old name: the
    // line merge is clean but combines into a broken program.
    scenarios.push(scenario(
        "fig2",
        "main",
        vec![(
            "prog.py",
            "def mult(a, b):\n    return a * b\ndef main():\n    a = 3 * 5\n    print(a)\n",
            "def multiply(a, b):\n    return a * b\ndef main():\n    a = 3 * 5\n    print(a)\n",
            "def mult(a, b):\n    return a * b\ndef main():\n    a = mult(3, 5)\n    print(a)\n",
            "def multiply(a, b):\n    return a * b\ndef main():\n    a = multiply(3, 5)\n    print(a)\n",
        )],
    ));

    // Non-overlapping character edits to the head and tail of one line.
    scenarios.push(scenario(
        "3183-11",
        "main",
        vec![(
            "Cache.java",
            "HashSet<Range> ranges = new HashSet<Range>();\n",
            "HashSet<Range> ranges = new HashSet<>();\n",
            "Set<Range> ranges = new HashSet<Range>();\n",
            "Set<Range> ranges = new HashSet<>();\n",
        )],
    ));

    // Both parents bumped the version differently; the character merge
    // invents 23.7.1, the version rule picks the larger bump 23.7.0 — the
    // programmer's choice.
    scenarios.push(scenario(
        "25267-730",
        "main",
        vec![(
            "pom.xml",
            "<version>23.6.0</version>\n",
            "<version>23.7.0</version>\n",
            "<version>23.6.1</version>\n",
            "<version>23.7.0</version>\n",
        )],
    ));

    // Suffixed snapshot versions: both larger than base, keep the larger.
    scenarios.push(scenario(
        "18228-77",
        "main",
        vec![(
            "pom.xml",
            "<version>2.3.1-SNAPSHOT</version>\n",
            "<version>2.4.1-SNAPSHOT</version>\n",
            "<version>2.4.3-SNAPSHOT</version>\n",
            "<version>2.4.3-SNAPSHOT</version>\n",
        )],
    ));

    // Independent refactorings of two adjacent lines; splicing them is
    // exactly what the programmer did.
    scenarios.push(scenario(
        "1215-3280",
        "other",
        vec![(
            "Parser.java",
            "String comments = SourcesHelper.readerToString(reader);\nCompilationUnit cu = new InstanceJavaParser(comments).parse();\n",
            "String comments = SourcesHelper.readerToString(reader);\nCompilationUnit cu = new JavaParser().setSource(comments).parse();\n",
            "String comments = readerToString(reader);\nCompilationUnit cu = new InstanceJavaParser(comments).parse();\n",
            "String comments = readerToString(reader);\nCompilationUnit cu = new JavaParser().setSource(comments).parse();\n",
        )],
    ));

    // One parent wrapped the lookup in a lock, the other captured the
    // removal result. Adjacent-line splicing yields clean code that reads
    // the result outside the lock; the programmer instead moved the check
    // inside. A clean merge that is semantically wrong.
    scenarios.push(scenario(
        "5184-31",
        "other",
        vec![(
            "DNSCache.java",
            &format!(
                "boolean result = false;\nList<DNSEntry> entryList = this.get(dnsEntry.getKey());\nif (entryList != null) {{\n    synchronized (entryList) {{\n        entryList.remove(dnsEntry);\n{SUFFIX_5184}"
            ),
            &format!(
                "boolean result = false;\nsynchronized (cacheMap) {{\n    List<DNSEntry> entryList = cacheMap.get(dnsEntry.getKey());\n    if (entryList != null) {{\n        entryList.remove(dnsEntry);\n{SUFFIX_5184}"
            ),
            &format!(
                "boolean result = false;\nList<DNSEntry> entryList = this.get(dnsEntry.getKey());\nif (entryList != null) {{\n    synchronized (entryList) {{\n        result = entryList.remove(dnsEntry);\n{SUFFIX_5184}"
            ),
            "boolean result = false;\nsynchronized (cacheMap) {\n    List<DNSEntry> entryList = cacheMap.get(dnsEntry.getKey());\n    if (entryList != null) {\n        result = entryList.remove(dnsEntry);\n        if (result && entryList.isEmpty()) {\n            cacheMap.remove(dnsEntry.getKey());\n        }\n    }\n}\n",
        )],
    ));

    // A trailing-space-only difference between base and one parent: exact
    // comparison conflicts, ignore-space-change resolves to the real edit.
    scenarios.push(scenario(
        "2955-73",
        "other",
        vec![("Doc.java", " * \n", " * </p>\n", " *\n", " * </p>\n")],
    ));

    // One parent added two imports, the other collapsed the block to a
    // wildcard. The import union keeps the two used names plus the
    // wildcard and drops the rest.
    let header = "package de.hochschuletrier.gdw.ss14.ecs.systems;\n\n";
    let wildcard = "import de.hochschuletrier.gdw.ss14.ecs.components.*;\n";
    let body = "\npublic class ExitMapSystem {\n    private ExitMapPhysicsComponent physics;\n    private ExitMapPropertyComponent property;\n}\n";
    scenarios.push(scenario(
        "8323-1022",
        "main",
        vec![(
            "ExitMapSystem.java",
            &format!("{header}{}{body}", imports_8323(false)),
            &format!("{header}{}{body}", imports_8323(true)),
            &format!("{header}{wildcard}{body}"),
            &format!(
                "{header}import de.hochschuletrier.gdw.ss14.ecs.components.ExitMapPhysicsComponent;\nimport de.hochschuletrier.gdw.ss14.ecs.components.ExitMapPropertyComponent;\n{wildcard}{body}"
            ),
        )],
    ));

    // A file added identically on both branches: empty base, equal
    // parents, must merge cleanly for every tool.
    let added = "public class MapLoader {\n    void load() {\n    }\n}\n";
    scenarios.push(scenario(
        "4807-44",
        "other",
        vec![("MapLoader.java", "", added, added, added)],
    ));

    // One wrong clean hunk (x = 2, expected 3) plus an import conflict:
    // the fixup completes the merge, the completed text fails the oracle,
    // and the outcome is reclassified as incorrect.
    let reclass_body = "\nclass Main {\n    A a;\n    B b;\n    C c;\n";
    scenarios.push(scenario(
        "reclass",
        "other",
        vec![
            (
                "Main.java",
                &format!("import a.A;\n{reclass_body}    int x = 1;\n}}\n"),
                &format!("import a.A;\nimport b.B;\n{reclass_body}    int x = 2;\n}}\n"),
                &format!("import a.A;\nimport c.C;\n{reclass_body}    int x = 1;\n}}\n"),
                &format!(
                    "import a.A;\nimport b.B;\nimport c.C;\n{reclass_body}    int x = 3;\n}}\n"
                ),
            ),
            ("Other.java", "// helper\n", "// helper\n", "// helper\n", "// helper\n"),
        ],
    ));

    scenarios
}
