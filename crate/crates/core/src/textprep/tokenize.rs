use std::sync::OnceLock;

use regex::Regex;

fn delimiters() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // Unicode whitespace, Unicode punctuation (category P) and the ASCII
    // punctuation set, which also contains symbols such as `$`, `+` and `|`.
    RE.get_or_init(|| Regex::new(r"[\s\p{P}[[:punct:]]]+").expect("static regex"))
}

/// Lowercase `text` and split it on whitespace and punctuation.
///
/// Empty pieces are dropped and digits are kept, so `"neWYOrk,21"` becomes
/// `["newyork", "21"]`.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    delimiters()
        .split(&lowered)
        .filter(|piece| !piece.is_empty())
        .map(str::to_owned)
        .collect()
}
