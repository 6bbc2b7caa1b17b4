//! Whitespace tokenizer with punctuation splitting.

const PUNCTUATION: [char; 8] = ['.', ',', '!', '?', ';', ':', '\'', '"'];

fn is_punct(c: char) -> bool {
    PUNCTUATION.contains(&c)
}

/// Lowercases `text`, splits on whitespace, and detaches every maximal run of
/// punctuation characters as its own token.
///
/// The mapping is lossy on case and on spacing around punctuation, so cover
/// texts are defined over this function's output space.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let lower = chunk.to_lowercase();
        let mut current = String::new();
        let mut current_punct = false;
        for c in lower.chars() {
            let p = is_punct(c);
            if !current.is_empty() && p != current_punct {
                out.push(std::mem::take(&mut current));
            }
            current_punct = p;
            current.push(c);
        }
        if !current.is_empty() {
            out.push(current);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn splits_and_lowercases() {
        assert_eq!(toks("I do ."), ["i", "do", "."]);
    }

    #[test]
    fn detaches_apostrophe_and_period() {
        assert_eq!(toks("Don't stop."), ["don", "'", "t", "stop", "."]);
    }

    #[test]
    fn empty_input() {
        assert!(toks("").is_empty());
        assert!(toks(" \t\n").is_empty());
    }

    #[test]
    fn punctuation_runs_stay_together() {
        assert_eq!(toks("Wait...what?!"), ["wait", "...", "what", "?!"]);
        assert_eq!(toks("\"Hi,\" she said"), ["\"", "hi", ",\"", "she", "said"]);
    }

    #[test]
    fn non_ascii_lowercase() {
        assert_eq!(toks("ÉTÉ Ünd"), ["été", "ünd"]);
    }
}
