//! Coin words over {0,1}, stored one letter per byte.

pub type CoinWord = Vec<u8>;

/// Renders a word, with `ε` for the empty word.
pub fn show(w: &[u8]) -> String {
    if w.is_empty() {
        "ε".to_string()
    } else {
        raw(w)
    }
}

/// Renders a word with no marker for the empty word.
pub fn raw(w: &[u8]) -> String {
    w.iter().map(|&c| if c == 0 { '0' } else { '1' }).collect()
}

/// Parses a string of `0`/`1`; `ε` and the empty string give the empty word.
pub fn parse(s: &str) -> Option<CoinWord> {
    if s == "ε" {
        return Some(Vec::new());
    }
    s.chars()
        .map(|c| match c {
            '0' => Some(0),
            '1' => Some(1),
            _ => None,
        })
        .collect()
}

/// All words of length `n` in lexicographic order.
pub fn all_of_length(n: usize) -> impl Iterator<Item = CoinWord> {
    (0u64..(1u64 << n)).map(move |bits| (0..n).map(|i| ((bits >> (n - 1 - i)) & 1) as u8).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        assert_eq!(parse("0110"), Some(vec![0, 1, 1, 0]));
        assert_eq!(show(&[]), "ε");
        assert_eq!(parse("ε"), Some(vec![]));
        assert_eq!(parse("012"), None);
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let w: Vec<String> = all_of_length(2).map(|w| raw(&w)).collect();
        assert_eq!(w, ["00", "01", "10", "11"]);
    }
}
