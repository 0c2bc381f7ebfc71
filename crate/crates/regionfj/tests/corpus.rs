//! Whole-corpus checks: every program under `tests/corpus/` parses,
//! analyzes within default caps, passes the declarative checker, survives a
//! pretty-print round trip, and analyzes deterministically.

use std::path::PathBuf;

use regionfj::inference::analyze;
use regionfj::syntax::{parse_program, pretty_print};

fn corpus_files() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .expect("corpus directory exists")
        .map(|entry| entry.expect("readable entry").path())
        .filter(|path| path.extension().is_some_and(|ext| ext == "fj"))
        .collect();
    files.sort();
    files
}

fn read(path: &PathBuf) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn corpus_has_at_least_ten_programs() {
    assert!(corpus_files().len() >= 10, "corpus holds {} programs", corpus_files().len());
}

#[test]
fn every_corpus_program_parses_analyzes_and_checks_clean() {
    for path in corpus_files() {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let program = parse_program(&read(&path))
            .unwrap_or_else(|diags| panic!("{name}: {diags:?}"));
        let analysis = analyze(&program).unwrap_or_else(|e| panic!("{name}: {e}"));
        let findings = analysis.check();
        assert!(
            findings.is_empty(),
            "{name}: checker found {} inconsistencies, first: {}",
            findings.len(),
            findings[0]
        );
    }
}

#[test]
fn corpus_programs_round_trip_through_the_pretty_printer() {
    for path in corpus_files() {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let program = parse_program(&read(&path))
            .unwrap_or_else(|diags| panic!("{name}: {diags:?}"));
        let printed = pretty_print(&program);
        let reparsed = parse_program(&printed)
            .unwrap_or_else(|diags| panic!("{name} (after printing): {diags:?}\n{printed}"));
        assert_eq!(program, reparsed, "{name}: round trip changed the program");
    }
}

#[test]
fn analysis_results_are_deterministic() {
    for path in corpus_files() {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let program = parse_program(&read(&path))
            .unwrap_or_else(|diags| panic!("{name}: {diags:?}"));
        let first = analyze(&program).unwrap_or_else(|e| panic!("{name}: {e}"));
        let second = analyze(&program).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(first, second, "{name}: two runs disagreed");
    }
}
