//! Lexicon-plus-position verb detection for learning-outcome text.

use crate::wordnet::{resolve_lemma, VerbTaxonomy};

pub const DEFAULT_STOP_VERBS: &[&str] = &["be", "have", "do", "use"];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Word(String),
    Punct(char),
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_alphabetic() {
            word.extend(c.to_lowercase());
            continue;
        }
        if !word.is_empty() {
            out.push(Token::Word(std::mem::take(&mut word)));
        }
        if matches!(c, '.' | ';' | ':' | '!' | '?' | ',') {
            out.push(Token::Punct(c));
        }
    }
    if !word.is_empty() {
        out.push(Token::Word(word));
    }
    out
}

fn opens_clause(prev: Option<&Token>) -> bool {
    match prev {
        None => true,
        Some(Token::Punct(_)) => true,
        Some(Token::Word(w)) => w == "to" || w == "and",
    }
}

/// Verbs of `text` in order of first appearance, as taxonomy lemmas.
///
/// A word counts when it opens a clause (start of text, after `. ; : ! ? ,`,
/// or after "to"/"and"), resolves to a verb lemma, and that lemma is not a
/// stop verb. Returns `None` for blank text.
pub fn detect_verbs(text: &str, tax: &VerbTaxonomy, stop_verbs: &[String]) -> Option<Vec<String>> {
    if text.trim().is_empty() {
        return None;
    }
    let tokens = tokenize(text);
    let mut out: Vec<String> = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        let Token::Word(w) = tok else { continue };
        let prev = if i == 0 { None } else { tokens.get(i - 1) };
        if !opens_clause(prev) {
            continue;
        }
        let Some(lemma) = resolve_lemma(tax, w) else { continue };
        if stop_verbs.iter().any(|s| *s == lemma) || out.contains(&lemma) {
            continue;
        }
        out.push(lemma);
    }
    Some(out)
}
