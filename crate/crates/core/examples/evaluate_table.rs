//! Confusion-matrix metrics for a few classifiers on a labeled sample.

use biasscan::evaluation::{evaluate, format_table, random_baseline, ConfusionMatrix, EvaluationRow, Label, LabeledSentence};

fn main() {
    let data: Vec<LabeledSentence> = [
        ("The regime slammed its critics.", Label::Biased),
        ("Everyone knows the plan will fail.", Label::Biased),
        ("A shocking, disastrous decision.", Label::Biased),
        ("The meeting started at noon.", Label::NonBiased),
        ("Rates were unchanged.", Label::NonBiased),
        ("The bridge reopens in May.", Label::NonBiased),
    ]
    .into_iter()
    .map(|(text, label)| LabeledSentence { text: text.into(), label })
    .collect();

    let coin = random_baseline(42);
    let random = evaluate(&data, |t| Ok::<_, ()>(coin(t))).unwrap();
    let always = evaluate(&data, |_| Ok::<_, ()>(true)).unwrap();
    let rows = [
        EvaluationRow::new("random (seed 42)", random),
        EvaluationRow::new("always biased", always),
        EvaluationRow::new("published counts", ConfusionMatrix::new(576, 214, 154, 524)),
    ];
    print!("{}", format_table(&rows));
}
