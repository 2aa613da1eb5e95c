//! Small suffix-stripping lemmatizer for verb forms.

use super::VerbTaxonomy;

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

/// Candidate base forms for an inflected verb, most literal first.
///
/// Handles `-s`, `-es`, `-ies`, `-ed` and `-ing` with e-restoration
/// (`making` -> `make`) and consonant undoubling (`planned` -> `plan`).
pub fn lemma_candidates(word: &str) -> Vec<String> {
    let w = word.trim().to_lowercase();
    let mut out = vec![w.clone()];
    let mut push = |s: String| {
        if s.len() >= 2 && !out.contains(&s) {
            out.push(s);
        }
    };
    if let Some(stem) = w.strip_suffix("ies") {
        push(format!("{}y", stem));
    }
    if let Some(stem) = w.strip_suffix("es") {
        push(stem.to_string());
    }
    if let Some(stem) = w.strip_suffix('s') {
        if !w.ends_with("ss") {
            push(stem.to_string());
        }
    }
    for suffix in ["ed", "ing"] {
        if let Some(stem) = w.strip_suffix(suffix) {
            if suffix == "ed" {
                if let Some(s) = stem.strip_suffix('i') {
                    // studied -> study
                    push(format!("{}y", s));
                }
            }
            push(stem.to_string());
            push(format!("{}e", stem));
            let b = stem.as_bytes();
            if b.len() >= 3 && b[b.len() - 1] == b[b.len() - 2] && !is_vowel(b[b.len() - 1]) {
                push(stem[..stem.len() - 1].to_string());
            }
        }
    }
    out
}

/// First candidate base form that the taxonomy knows as a verb.
pub fn resolve_lemma(tax: &VerbTaxonomy, word: &str) -> Option<String> {
    lemma_candidates(word)
        .into_iter()
        .find(|c| tax.contains_lemma(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidates_cover_common_inflections() {
        let has = |w: &str, base: &str| lemma_candidates(w).iter().any(|c| c == base);
        assert!(has("defines", "define"));
        assert!(has("analyzes", "analyze"));
        assert!(has("classifies", "classify"));
        assert!(has("passes", "pass"));
        assert!(has("implemented", "implement"));
        assert!(has("used", "use"));
        assert!(has("planned", "plan"));
        assert!(has("making", "make"));
        assert!(has("running", "run"));
        assert!(has("studied", "study"));
        assert_eq!(lemma_candidates("Analyze")[0], "analyze");
    }

    #[test]
    fn literal_form_comes_first() {
        assert_eq!(lemma_candidates("process")[0], "process");
        assert!(!lemma_candidates("process").contains(&"proces".to_string()));
    }
}
