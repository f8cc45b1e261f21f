//! Spoilers: words that are an infix of none of the given periodic words.

use crate::words::{self, CoinWord};

/// Is `w` an infix of `u^ω`?
pub fn is_infix_of_power(w: &[u8], u: &[u8]) -> bool {
    assert!(!u.is_empty(), "loop words are nonempty");
    if w.is_empty() {
        return true;
    }
    let reps = w.len().div_ceil(u.len()) + 1;
    let hay: Vec<u8> = u.iter().copied().cycle().take(reps * u.len()).collect();
    hay.windows(w.len()).any(|x| x == w)
}

fn spoils(w: &[u8], loops: &[CoinWord]) -> bool {
    loops.iter().all(|u| !is_infix_of_power(w, u))
}

/// Shortest extension of `base` that spoils every loop; ties go to the
/// lexicographically least.
pub fn spoiler_shortest(base: &[u8], loops: &[CoinWord]) -> CoinWord {
    for extra in 0.. {
        for suffix in words::all_of_length(extra) {
            let mut w = base.to_vec();
            w.extend_from_slice(&suffix);
            if spoils(&w, loops) {
                return w;
            }
        }
    }
    unreachable!()
}

/// Halving construction: repeatedly append the letter leaving the fewest
/// suffixes of the `u^ω` alive (ties toward 0); the appended part alone
/// spoils every loop.
pub fn spoiler_greedy(base: &[u8], loops: &[CoinWord]) -> CoinWord {
    // every suffix of some u^ω is a rotation of u, read periodically
    let mut alive: Vec<(&[u8], usize)> =
        loops.iter().flat_map(|u| (0..u.len()).map(move |r| (u.as_slice(), r))).collect();
    let mut w = Vec::new();
    while !alive.is_empty() {
        let at = w.len();
        let letter_of = |(u, r): &(&[u8], usize)| u[(r + at) % u.len()];
        let zeros = alive.iter().filter(|s| letter_of(s) == 0).count();
        let ones = alive.len() - zeros;
        let c = if zeros <= ones { 0 } else { 1 };
        alive.retain(|s| letter_of(s) == c);
        w.push(c);
    }
    let mut out = base.to_vec();
    out.extend(w);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> CoinWord {
        words::parse(s).unwrap()
    }

    #[test]
    fn infix_examples() {
        assert!(is_infix_of_power(&w("010"), &w("01")));
        assert!(!is_infix_of_power(&w("011"), &w("01")));
        assert!(is_infix_of_power(&[], &w("1")));
    }

    #[test]
    fn shortest_examples() {
        assert_eq!(spoiler_shortest(&[], &[w("0")]), w("1"));
        assert_eq!(spoiler_shortest(&[], &[w("0"), w("1")]), w("01"));
        assert_eq!(spoiler_shortest(&w("01"), &[w("01")]), w("011"));
        assert_eq!(spoiler_shortest(&[], &[]), w(""));
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(spoiler_greedy(&[], &[w("0")]), w("1"));
        assert_eq!(spoiler_greedy(&[], &[w("01")]).len(), 2);
        let g = spoiler_greedy(&[], &[w("0"), w("1")]);
        assert!(g == w("01") || g == w("10"));
    }
}
