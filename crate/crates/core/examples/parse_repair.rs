//! Recover findings from messy model output and show the repair notes.

use biasscan::classifier::parse_model_response;

fn main() {
    let raw = "Sure! Here is the analysis:\n```json\n{'1': {\"bias_type\": \"Word Choice Bias\", \
               \"strength\": 8, \"explanation\": \"'Slammed' is loaded.\"},\n\
               \"2\": {\"bias_type\": \"quantum_bias\", \"strength\": 0.4, \"explanation\": \"?\"},}\n```\nHope this helps.";
    match parse_model_response(raw) {
        Ok(parsed) => {
            for f in &parsed.findings {
                println!("finding: {:?} {} {:.2} {}", f.sentence_ref, f.bias_type_name, f.strength_raw, f.explanation);
            }
            for n in &parsed.notes {
                println!("repair:  {:?} ({})", n.kind, n.detail);
            }
        }
        Err(e) => println!("{e}"),
    }
}
