//! Split text into sentences with char offsets.

use biasscan::segment;

fn main() {
    let text = "Dr. Smith met the U.S. delegation on Jan. 5. Talks lasted 2.5 hours.\n\
                \"Was it worth it?\" she asked. Nobody answered.";
    for s in segment(text) {
        let quote = if s.contains_quotation { " (quotation)" } else { "" };
        println!("{:>2} [{:>3}..{:>3}] {}{quote}", s.index, s.start, s.end, s.text);
    }
}
