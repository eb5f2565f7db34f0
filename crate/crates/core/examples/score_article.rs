//! Article score from sentence findings.

use biasscan::article_score;
use biasscan::classifier::{AlignmentMethod, SentenceFinding};
use biasscan::taxonomy::bias_type_from_name;

fn main() {
    let ty = bias_type_from_name("word_choice_bias").unwrap();
    let findings: Vec<SentenceFinding> = [(1, 0.5), (4, 0.7), (8, 0.9)]
        .into_iter()
        .map(|(i, s)| SentenceFinding {
            sentence_index: i,
            bias_type: ty,
            strength: s,
            explanation: "loaded wording".into(),
            alignment_method: AlignmentMethod::Index,
        })
        .collect();
    let score = article_score(&findings, 10).unwrap();
    println!(
        "{} of {} sentences biased, ratio {:.2}, mean strength {:.2}, score {:.2}",
        score.biased_count, score.total_sentences, score.biased_ratio, score.mean_strength, score.score
    );
}
