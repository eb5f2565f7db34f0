use biasscan::evaluation::{evaluate, metrics, random_baseline, ConfusionMatrix, Label, LabeledSentence, Metrics};

/// A published evaluation row: counts and the four reported metrics.
pub struct PublishedRow {
    pub model: &'static str,
    pub counts: (u64, u64, u64, u64),
    /// F1, recall, precision, accuracy.
    pub reported: [f64; 4],
}

pub const PUBLISHED: [PublishedRow; 4] = [
    PublishedRow { model: "fine-tuned GPT-3.5", counts: (576, 214, 154, 524), reported: [0.758, 0.790, 0.729, 0.749] },
    PublishedRow { model: "GPT-3.5", counts: (384, 205, 346, 533), reported: [0.582, 0.526, 0.651, 0.624] },
    PublishedRow { model: "GPT-4", counts: (393, 69, 337, 669), reported: [0.659, 0.538, 0.850, 0.723] },
    PublishedRow { model: "Random", counts: (362, 374, 368, 364), reported: [0.494, 0.496, 0.492, 0.495] },
];

pub const TABLE_TOLERANCE: f64 = 0.0005;

/// Independent oracle: the textbook definitions, written out separately
/// from the library.
pub fn oracle(tp: u64, fp: u64, fn_: u64, tn: u64) -> [f64; 4] {
    let (tp, fp, fn_, tn) = (tp as f64, fp as f64, fn_ as f64, tn as f64);
    let precision = tp / (tp + fp);
    let recall = tp / (tp + fn_);
    let f1 = 2.0 * tp / (2.0 * tp + fp + fn_);
    let accuracy = (tp + tn) / (tp + fp + fn_ + tn);
    [f1, recall, precision, accuracy]
}

fn as_array(m: &Metrics) -> [f64; 4] {
    [m.f1, m.recall, m.precision, m.accuracy]
}

/// Compare `metrics()` on each published row with the published numbers.
/// Returns one line per cell outside the tolerance.
pub fn table_mismatches() -> Vec<String> {
    const NAMES: [&str; 4] = ["F1", "recall", "precision", "accuracy"];
    let mut out = Vec::new();
    for row in &PUBLISHED {
        let (tp, fp, fn_, tn) = row.counts;
        let computed = as_array(&metrics(&ConfusionMatrix::new(tp, fp, fn_, tn)));
        let independent = oracle(tp, fp, fn_, tn);
        for k in 0..4 {
            assert!((computed[k] - independent[k]).abs() < 1e-12, "library disagrees with oracle");
            if (computed[k] - row.reported[k]).abs() > TABLE_TOLERANCE {
                out.push(format!(
                    "{} {}: computed {:.5}, published {:.3} (off by {:.5})",
                    row.model,
                    NAMES[k],
                    computed[k],
                    row.reported[k],
                    (computed[k] - row.reported[k]).abs()
                ));
            }
        }
    }
    out
}

/// Balanced synthetic dataset of `n` distinct sentences.
pub fn synthetic_dataset(n: usize) -> Vec<LabeledSentence> {
    (0..n)
        .map(|i| LabeledSentence {
            text: format!("Synthetic sentence {i} reports on topic {} in region {}.", i % 17, i % 5),
            label: if i % 2 == 0 { Label::Biased } else { Label::NonBiased },
        })
        .collect()
}

pub fn random_accuracy(dataset: &[LabeledSentence], seed: u64) -> f64 {
    let coin = random_baseline(seed);
    let cm = evaluate(dataset, |t| Ok::<_, std::convert::Infallible>(coin(t))).unwrap();
    metrics(&cm).accuracy
}
