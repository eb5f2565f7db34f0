use biasscan::classifier::{AlignmentMethod, SentenceFinding};
use biasscan::scoring::article_score;
use biasscan::segmentation::{segment, Sentence};
use biasscan::taxonomy::all_types;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

pub fn finding(index: usize, strength: f64) -> SentenceFinding {
    SentenceFinding {
        sentence_index: index,
        bias_type: all_types()[index % all_types().len()],
        strength,
        explanation: "x".into(),
        alignment_method: AlignmentMethod::Index,
    }
}

/// Independent oracle: the formula evaluated directly.
pub fn score_oracle(strengths: &[f64], total: usize) -> f64 {
    if strengths.is_empty() {
        return 0.0;
    }
    let ratio = strengths.len() as f64 / total as f64;
    let mean = strengths.iter().sum::<f64>() / strengths.len() as f64;
    (ratio + mean) / 2.0
}

pub fn findings_strategy() -> impl Strategy<Value = (Vec<SentenceFinding>, usize)> {
    (1usize..80).prop_flat_map(|total| {
        (
            prop::sample::subsequence((0..total).collect::<Vec<_>>(), 0..=total),
            Just(total),
            prop::collection::vec(0.0f64..=1.0, total),
        )
            .prop_map(|(idx, total, strengths)| (idx.into_iter().map(|i| finding(i, strengths[i])).collect(), total))
    })
}

fn shuffled(f: &[SentenceFinding], seed: u64) -> Vec<SentenceFinding> {
    let mut out = f.to_vec();
    let mut state = seed | 1;
    for i in (1..out.len()).rev() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        out.swap(i, (state % (i as u64 + 1)) as usize);
    }
    out
}

/// Bounds, agreement with the oracle, permutation invariance and both
/// monotonicity properties over random finding sets.
pub fn scoring_properties(cases: u32) -> Result<(), String> {
    let strategy = (findings_strategy(), any::<u64>(), 0.0f64..=1.0, any::<prop::sample::Index>(), 0.0f64..=1.0);
    runner(cases)
        .run(&strategy, |((f, total), seed, extra, pick, bump)| {
            let s = article_score(&f, total).unwrap();
            for v in [s.score, s.biased_ratio, s.mean_strength] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let strengths: Vec<f64> = f.iter().map(|x| x.strength).collect();
            prop_assert!((s.score - score_oracle(&strengths, total)).abs() < 1e-12);
            prop_assert_eq!(s.biased_ratio, f.len() as f64 / total as f64);

            prop_assert_eq!(&article_score(&shuffled(&f, seed), total).unwrap(), &s);

            if let Some(free) = (0..total).find(|i| f.iter().all(|x| x.sentence_index != *i)) {
                let mut more = f.clone();
                more.push(finding(free, extra));
                prop_assert!(article_score(&more, total).unwrap().biased_ratio >= s.biased_ratio);
            }
            if !f.is_empty() {
                let mut raised = f.clone();
                let i = pick.index(raised.len());
                raised[i].strength = (raised[i].strength + bump).min(1.0);
                prop_assert!(article_score(&raised, total).unwrap().score >= s.score);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn slice(text: &str, s: &Sentence) -> String {
    text.chars().skip(s.start).take(s.end - s.start).collect()
}

pub fn abbreviation_cases() -> Vec<(String, Vec<String>)> {
    include_str!("../fixtures/abbreviations.tsv")
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (input, expected) = l.split_once('\t').expect("tab-separated case");
            (input.replace("\\n", "\n"), expected.split(" | ").map(str::to_string).collect())
        })
        .collect()
}

/// Returns the number of cases; every mismatch is listed on failure.
pub fn check_abbreviation_suite() -> Result<usize, String> {
    let cases = abbreviation_cases();
    let failures: Vec<String> = cases
        .iter()
        .filter_map(|(input, expected)| {
            let got: Vec<String> = segment(input).into_iter().map(|s| s.text).collect();
            (&got != expected).then(|| format!("{input:?}: expected {expected:?}, got {got:?}"))
        })
        .collect();
    if cases.len() < 20 {
        return Err(format!("only {} abbreviation cases", cases.len()));
    }
    if failures.is_empty() {
        Ok(cases.len())
    } else {
        Err(failures.join("\n"))
    }
}

fn word() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => "[a-z]{1,8}",
        2 => "[A-Z][a-z]{0,7}",
        1 => "[0-9]{1,3}(\\.[0-9]{1,2})?",
        1 => prop::sample::select(vec![
            "Dr.", "Mr.", "U.S.", "e.g.", "i.e.", "vs.", "No.", "Jan.", "St.", "\"Hi.\"", "(see",
            "it)", "...", "…", "é", "日本", "?!", "!", "1.", "'", "\u{201c}", "\u{201d}",
        ]).prop_map(str::to_string),
    ]
}

fn separator() -> impl Strategy<Value = String> {
    prop::sample::select(vec![" ", " ", " ", " ", " ", " ", ". ", "? ", "\n", "  \t", "\r\n", ".\n\n"])
        .prop_map(str::to_string)
}

pub fn body() -> impl Strategy<Value = String> {
    prop::collection::vec((word(), separator()), 0..60).prop_map(|parts| parts.into_iter().map(|(w, s)| w + &s).collect())
}

pub fn check_segmentation(text: &str) -> Result<(), TestCaseError> {
    let sentences = segment(text);
    let n = text.chars().count();
    let mut rebuilt = String::new();
    let mut cursor = 0;
    for (i, s) in sentences.iter().enumerate() {
        prop_assert_eq!(s.index, i);
        prop_assert!(s.start >= cursor && s.start < s.end && s.end <= n, "order/bounds {:?}", s);
        prop_assert_eq!(&slice(text, s), &s.text);
        prop_assert!(!s.text.trim().is_empty());
        let gap: String = text.chars().skip(cursor).take(s.start - cursor).collect();
        prop_assert!(gap.chars().all(|c| !c.is_alphanumeric()), "text lost in gap {:?}", gap);
        rebuilt.push_str(&gap);
        rebuilt.push_str(&s.text);
        cursor = s.end;
    }
    let tail: String = text.chars().skip(cursor).collect();
    prop_assert!(tail.trim().is_empty(), "unsegmented tail {:?}", tail);
    rebuilt.push_str(&tail);
    prop_assert_eq!(rebuilt, text);
    prop_assert_eq!(segment(text), sentences);
    Ok(())
}

/// Coverage, ordering, substring and non-emptiness over generated prose
/// and arbitrary Unicode.
pub fn segmentation_properties(cases: u32) -> Result<(), String> {
    runner(cases).run(&body(), |t| check_segmentation(&t)).map_err(|e| e.to_string())?;
    runner(cases).run(&"\\PC{0,200}", |t| check_segmentation(&t)).map_err(|e| e.to_string())
}
