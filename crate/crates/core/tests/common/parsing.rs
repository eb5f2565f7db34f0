use std::path::{Path, PathBuf};

use biasscan::classifier::{align_findings, parse_model_response, RawFinding, RepairKind};
use biasscan::segmentation::segment;
use biasscan::taxonomy::{all_types, bias_type_from_name};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Expected {
    Unparseable { unparseable: bool },
    Parsed { findings: Vec<RawFinding>, notes: Vec<RepairKind> },
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/model_outputs")
}

/// Every committed model output must parse to its documented findings and
/// repair notes. Returns the number of fixtures checked.
pub fn check_model_output_fixtures() -> Result<usize, String> {
    let mut raws: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    raws.sort();
    let mut failures = Vec::new();
    for raw_path in &raws {
        let name = raw_path.file_stem().unwrap().to_string_lossy().to_string();
        let raw = std::fs::read_to_string(raw_path).map_err(|e| e.to_string())?;
        let expected_text = std::fs::read_to_string(raw_path.with_extension("expected.json"))
            .map_err(|e| format!("{name}: {e}"))?;
        let expected: Expected = serde_json::from_str(&expected_text).map_err(|e| format!("{name}: {e}"))?;
        let got = parse_model_response(&raw);
        match (expected, got) {
            (Expected::Unparseable { unparseable: true }, Err(_)) => {}
            (Expected::Parsed { findings, notes }, Ok(parsed)) => {
                let kinds: Vec<RepairKind> = parsed.notes.iter().map(|n| n.kind).collect();
                if parsed.findings != findings || kinds != notes {
                    failures.push(format!(
                        "{name}: expected {findings:?} / {notes:?}, got {:?} / {kinds:?}",
                        parsed.findings
                    ));
                }
            }
            (e, g) => failures.push(format!("{name}: expected {e:?}, got {g:?}")),
        }
    }
    if raws.len() < 12 {
        failures.push(format!("only {} fixtures found", raws.len()));
    }
    if failures.is_empty() {
        Ok(raws.len())
    } else {
        Err(failures.join("\n"))
    }
}

fn json_fragment() -> impl Strategy<Value = String> {
    let key = prop_oneof![
        (0usize..12).prop_map(|i| format!("\"{i}\"")),
        (0usize..12).prop_map(|i| format!("'{i}'")),
        "[a-z ]{0,12}".prop_map(|s| format!("\"{s}\"")),
        Just("\"99999999999999999999\"".to_string()),
        Just("\"-1\"".to_string()),
    ];
    let ty = prop_oneof![
        prop::sample::select(all_types().to_vec()).prop_map(|t| format!("\"{}\"", t.slug())),
        prop::sample::select(all_types().to_vec()).prop_map(|t| format!("\"{}\"", t.canonical_name())),
        "[a-z_]{0,20}".prop_map(|s| format!("\"{s}\"")),
        Just("null".to_string()),
        Just("7".to_string()),
    ];
    let strength = prop_oneof![
        any::<f64>().prop_map(|f| format!("{f}")),
        (-5.0f64..15.0).prop_map(|f| format!("{f}")),
        Just("\"0.7\"".to_string()),
        Just("\"high\"".to_string()),
        Just("1e400".to_string()),
        Just("-1e400".to_string()),
        Just("NaN".to_string()),
        Just("null".to_string()),
        Just("[]".to_string()),
    ];
    let explanation = prop_oneof![
        "[ -~]{0,30}".prop_map(|s| serde_json::to_string(&s).unwrap()),
        Just("\"\"".to_string()),
        Just("\"   \"".to_string()),
        Just("null".to_string()),
        Just("{}".to_string()),
    ];
    let entry = (key, ty, strength, explanation, any::<bool>()).prop_map(|(k, t, s, e, comma)| {
        let trailing = if comma { "," } else { "" };
        format!("{k}: {{\"bias_type\": {t}, \"strength\": {s}, \"explanation\": {e}{trailing}}}")
    });
    (prop::collection::vec(entry, 0..6), "[ -~\n]{0,20}", "[ -~\n]{0,20}", 0u8..4).prop_map(
        |(entries, before, after, wrap)| {
            let body = format!("{{{}}}", entries.join(", "));
            match wrap {
                0 => body,
                1 => format!("```json\n{body}\n```"),
                2 => format!("{before}{body}{after}"),
                _ => {
                    let cut = body.len() / 2;
                    let cut = (0..=cut).rev().find(|i| body.is_char_boundary(*i)).unwrap_or(0);
                    body[..cut].to_string()
                }
            }
        },
    )
}

fn model_text() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => any::<String>(),
        2 => "[{}\\[\\]\":,'`0-9a-z \n.-]{0,80}",
        5 => json_fragment(),
    ]
}

fn check_one(raw: &str) -> Result<(), TestCaseError> {
    let Ok(parsed) = parse_model_response(raw) else {
        return Ok(());
    };
    for f in &parsed.findings {
        prop_assert!(f.strength_raw.is_finite() && (0.0..=1.0).contains(&f.strength_raw), "strength {f:?}");
        prop_assert!(bias_type_from_name(&f.bias_type_name).is_ok(), "type {f:?}");
        prop_assert!(!f.explanation.trim().is_empty(), "explanation {f:?}");
    }
    let sentences = segment("One claim was made. A second claim was made. A third claim was made.");
    let (aligned, _) = align_findings(&parsed.findings, &sentences);
    let mut seen = std::collections::HashSet::new();
    for f in &aligned {
        prop_assert!(f.sentence_index < sentences.len());
        prop_assert!((0.0..=1.0).contains(&f.strength));
        prop_assert!(!f.explanation.trim().is_empty());
        prop_assert!(seen.insert(f.sentence_index), "duplicate index {}", f.sentence_index);
    }
    Ok(())
}

/// Feed `cases` generated strings through parsing and alignment. A panic
/// inside the parser fails the run as well.
pub fn fuzz_parse(cases: u32) -> Result<u32, String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&model_text(), |raw| check_one(&raw)).map_err(|e| e.to_string())?;
    Ok(cases)
}
