use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A generator of the free monoid. `A` is the fundamental representation,
/// `B` its conjugate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Letter {
    A,
    B,
}

impl Letter {
    pub fn conj(self) -> Letter {
        match self {
            Letter::A => Letter::B,
            Letter::B => Letter::A,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::B => 'b',
        }
    }
}

/// An element of the free monoid on two letters. The empty word is the unit
/// and is written `e`.
///
/// Words are ordered shortlex (length first, then letters with `a < b`), so
/// sorted output groups atoms by length.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Reverse the word and swap every letter: the anti-automorphism with
    /// `a -> b`, `b -> a`.
    pub fn involute(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.conj()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.0.pop()
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n].to_vec())
    }

    pub fn suffix(&self, n: usize) -> Word {
        Word(self.0[self.len() - n..].to_vec())
    }

    pub fn ends_with(&self, suffix: &Word) -> bool {
        self.0.ends_with(&suffix.0)
    }

    /// Length of the longest common suffix.
    pub fn common_tail(&self, other: &Word) -> usize {
        self.0
            .iter()
            .rev()
            .zip(other.0.iter().rev())
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// All words of length exactly `n`, in shortlex order.
    pub fn all_of_length(n: usize) -> impl Iterator<Item = Word> {
        assert!(n < 64, "enumeration limited to length < 64");
        (0u64..(1u64 << n)).map(move |bits| {
            Word(
                (0..n)
                    .map(|i| {
                        if bits >> (n - 1 - i) & 1 == 0 {
                            Letter::A
                        } else {
                            Letter::B
                        }
                    })
                    .collect(),
            )
        })
    }

    /// All words of length at most `n`, in shortlex order.
    pub fn all_up_to(n: usize) -> impl Iterator<Item = Word> {
        (0..=n).flat_map(Word::all_of_length)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for l in &self.0 {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "e" {
            return Ok(Word::empty());
        }
        if s.is_empty() {
            return Err(Error::InvalidWord(s.to_string()));
        }
        s.chars()
            .map(|c| match c {
                'a' => Ok(Letter::A),
                'b' => Ok(Letter::B),
                _ => Err(Error::InvalidWord(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn involute_examples() {
        assert_eq!(w("e").involute(), w("e"));
        assert_eq!(w("a").involute(), w("b"));
        assert_eq!(w("aa").involute(), w("bb"));
        assert_eq!(w("aab").involute(), w("abb"));
    }

    #[test]
    fn involute_is_an_involutive_anti_automorphism() {
        let words: Vec<Word> = Word::all_up_to(5).collect();
        for x in &words {
            assert_eq!(x.involute().involute(), *x);
            assert_eq!(x.involute().len(), x.len());
        }
        for x in Word::all_up_to(3) {
            for y in Word::all_up_to(2) {
                assert_eq!(x.concat(&y).involute(), y.involute().concat(&x.involute()));
            }
        }
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(w("e").to_string(), "e");
        assert_eq!(w("abba").to_string(), "abba");
        assert!("abc".parse::<Word>().is_err());
        assert!("".parse::<Word>().is_err());
        assert!("ea".parse::<Word>().is_err());
    }

    #[test]
    fn shortlex_order() {
        let mut v = vec![w("b"), w("aa"), w("e"), w("a"), w("ab")];
        v.sort();
        let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["e", "a", "b", "aa", "ab"]);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(Word::all_up_to(3).count(), 1 + 2 + 4 + 8);
        assert_eq!(Word::all_of_length(0).next(), Some(Word::empty()));
    }

    #[test]
    fn common_tail_counts_matching_suffix() {
        assert_eq!(w("abab").common_tail(&w("bab")), 3);
        assert_eq!(w("ab").common_tail(&w("aa")), 0);
        assert_eq!(w("e").common_tail(&w("aa")), 0);
    }
}
