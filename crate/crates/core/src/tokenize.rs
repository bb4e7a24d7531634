//! Word-level tokenization shared by the indexer and the query parser:
//! split on any non-alphanumeric codepoint, lowercase, drop empties and
//! tokens longer than 64 codepoints.

const MAX_TOKEN_LEN: usize = 64;

pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .filter(|t| t.chars().count() <= MAX_TOKEN_LEN)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::tokenize;

    #[test]
    fn splits_on_punctuation_and_lowercases() {
        assert_eq!(tokenize("The (quick) fox!"), vec!["the", "quick", "fox"]);
    }

    #[test]
    fn empty_input_yields_no_tokens() {
        assert_eq!(tokenize(""), Vec::<String>::new());
        assert_eq!(tokenize("  ,;!  "), Vec::<String>::new());
    }

    #[test]
    fn hyphens_and_digits() {
        assert_eq!(
            tokenize("state-of-the-art 2022"),
            vec!["state", "of", "the", "art", "2022"]
        );
    }

    #[test]
    fn drops_overlong_tokens() {
        let long = "x".repeat(65);
        let ok = "y".repeat(64);
        assert_eq!(tokenize(&format!("{long} {ok}")), vec![ok]);
    }

    #[test]
    fn unicode_terms_survive() {
        assert_eq!(tokenize("Crème brûlée!"), vec!["crème", "brûlée"]);
    }
}
