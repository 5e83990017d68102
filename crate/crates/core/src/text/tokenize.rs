//! Word, sentence and paragraph segmentation.
//!
//! * word: maximal run of alphanumerics, with apostrophes allowed only between
//!   two alphanumerics ("don't", "students'" yields "students");
//! * sentence: text up to a `.`, `!` or `?` that is followed by whitespace or
//!   the end of its paragraph; segments without words are dropped;
//! * paragraph: group of non-blank lines separated by one or more blank lines.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizationRules {
    /// Lowercase words for vocabulary and dictionary lookups.
    pub casefold: bool,
    /// Words with at least this many characters count as long.
    pub long_word_len: usize,
}

impl Default for TokenizationRules {
    fn default() -> Self {
        Self { casefold: true, long_word_len: 7 }
    }
}

impl TokenizationRules {
    pub fn normalize(&self, word: &str) -> String {
        if self.casefold {
            word.to_lowercase()
        } else {
            String::from(word)
        }
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Iterator over word tokens as subslices of `text`.
pub fn words(text: &str) -> Words<'_> {
    Words { text, pos: 0 }
}

pub struct Words<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Iterator for Words<'a> {
    type Item = &'a str;

    fn next(&mut self) -> Option<&'a str> {
        let rest = &self.text[self.pos..];
        let (off, _) = rest.char_indices().find(|(_, c)| c.is_alphanumeric())?;
        let start = self.pos + off;
        let mut end = start;
        let mut chars = self.text[start..].char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            if c.is_alphanumeric() {
                end = start + i + c.len_utf8();
            } else if is_apostrophe(c) && chars.peek().is_some_and(|(_, n)| n.is_alphanumeric()) {
                continue;
            } else {
                break;
            }
        }
        self.pos = end;
        Some(&self.text[start..end])
    }
}

/// Paragraphs as trimmed subslices of `text`.
pub fn paragraphs(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut end = 0;
    let mut offset = 0;
    for line in text.split('\n') {
        let blank = line.trim().is_empty();
        if blank {
            if let Some(s) = start.take() {
                out.push(text[s..end].trim());
            }
        } else {
            if start.is_none() {
                start = Some(offset);
            }
            end = offset + line.len();
        }
        offset += line.len() + 1;
    }
    if let Some(s) = start {
        out.push(text[s..end].trim());
    }
    out
}

/// Sentences of one paragraph, trimmed, each containing at least one word.
pub fn sentences(paragraph: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = paragraph.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            let boundary = match chars.peek() {
                None => true,
                Some((_, n)) => n.is_whitespace(),
            };
            if boundary {
                let end = i + c.len_utf8();
                push_sentence(&mut out, &paragraph[start..end]);
                start = end;
            }
        }
    }
    push_sentence(&mut out, &paragraph[start..]);
    out
}

fn push_sentence<'a>(out: &mut Vec<&'a str>, segment: &'a str) {
    let s = segment.trim();
    if words(s).next().is_some() {
        out.push(s);
    }
}
