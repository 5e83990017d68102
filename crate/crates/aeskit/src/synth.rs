//! Synthetic essays whose score is a clipped step function of length.

use aeskit_core::corpus::{Corpus, EssayRecord};
use aeskit_core::rng::{stage, StageRng};
use aeskit_core::Result;

const WORDS: [&str; 24] = [
    "the", "student", "argues", "that", "school", "policy", "should", "change", "because", "evidence", "shows",
    "clear", "benefits", "for", "everyone", "involved", "however", "some", "people", "disagree", "with", "this",
    "important", "idea",
];

/// Words at which each score starts; shorter essays score 1.
pub const SCORE_STEP_WORDS: usize = 50;
pub const MIN_WORDS: usize = 40;

/// Score of an essay with `n_words` words: one step per 50 words above 40, clipped to 1..=6.
pub fn score_for_length(n_words: usize) -> u8 {
    (1 + n_words.saturating_sub(MIN_WORDS) / SCORE_STEP_WORDS).min(6) as u8
}

fn essay(rng: &mut StageRng, n_words: usize) -> String {
    let mut text = String::new();
    let mut left = n_words;
    while left > 0 {
        if !text.is_empty() {
            text.push_str("\n\n");
        }
        let sentences = 2 + rng.below(3) as usize;
        for s in 0..sentences {
            if left == 0 {
                break;
            }
            let len = (5 + rng.below(11) as usize).min(left);
            left -= len;
            if s > 0 {
                text.push(' ');
            }
            for w in 0..len {
                let word = WORDS[rng.below(WORDS.len() as u64) as usize];
                if w == 0 {
                    let mut c = word.chars();
                    text.extend(c.next().map(|f| f.to_ascii_uppercase()));
                    text.push_str(c.as_str());
                } else {
                    text.push(' ');
                    text.push_str(word);
                }
            }
            text.push('.');
        }
    }
    text
}

/// `n` essays with lengths uniform in [40, 340) words.
pub fn synth_corpus(n: usize, seed: u64) -> Result<Corpus> {
    let mut rng = StageRng::with_sub(seed, stage::SYNTH, 1);
    let records = (0..n)
        .map(|i| {
            let n_words = MIN_WORDS + rng.below(6 * SCORE_STEP_WORDS as u64) as usize;
            EssayRecord { essay_id: format!("s{i:05}"), text: essay(&mut rng, n_words), score: Some(score_for_length(n_words)) }
        })
        .collect();
    Corpus::new(records)
}
