//! Words in the generators of a finitely generated group.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A generator or its inverse, encoded as a nonzero signed 1-based index:
/// `3` is the third generator, `-3` its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct Letter(i32);

impl Letter {
    /// Generator with 0-based index `index`.
    pub fn generator(index: usize) -> Self {
        Letter(index as i32 + 1)
    }

    pub fn generator_inverse(index: usize) -> Self {
        Letter(-(index as i32 + 1))
    }

    pub fn index(self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    pub fn signed(self) -> i32 {
        self.0
    }

    /// All `2k` letters over `k` generators, in enumeration order
    /// (`g1, g1⁻¹, g2, g2⁻¹, ...`).
    pub fn alphabet(generators: usize) -> Vec<Letter> {
        (0..generators)
            .flat_map(|i| [Letter::generator(i), Letter::generator_inverse(i)])
            .collect()
    }

    fn sort_key(self) -> (usize, bool) {
        (self.index(), self.is_inverse())
    }
}

impl TryFrom<i32> for Letter {
    type Error = String;

    fn try_from(value: i32) -> Result<Self, Self::Error> {
        if value == 0 {
            Err("generator index 0 is not a valid letter (indices are 1-based)".into())
        } else {
            Ok(Letter(value))
        }
    }
}

impl From<Letter> for i32 {
    fn from(letter: Letter) -> i32 {
        letter.0
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A word in the generators. The empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn single(letter: Letter) -> Self {
        Word(vec![letter])
    }

    /// Builds a word and freely reduces it.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut w = Word::empty();
        for letter in letters {
            w.push_reduced(letter);
        }
        w
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

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Appends `letter`, cancelling against the last letter if they are
    /// mutually inverse.
    pub fn push_reduced(&mut self, letter: Letter) {
        if self.0.last() == Some(&letter.inverse()) {
            self.0.pop();
        } else {
            self.0.push(letter);
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &letter in &other.0 {
            w.push_reduced(letter);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Enumeration order: shorter words first, then lexicographic.
    pub fn enumeration_cmp(&self, other: &Word) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, letter) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if letter.is_inverse() {
                write!(f, "g{}^-1", letter.index() + 1)?;
            } else {
                write!(f, "g{}", letter.index() + 1)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_reduction_cancels_adjacent_inverses() {
        let g = Letter::generator(0);
        let h = Letter::generator(1);
        let w = Word::from_letters([g, h, h.inverse(), g]);
        assert_eq!(w.letters(), &[g, g]);
        assert!(w.concat(&w.inverse()).is_empty());
    }

    #[test]
    fn alphabet_order_puts_inverse_after_generator() {
        let a = Letter::alphabet(2);
        assert_eq!(
            a.iter().map(|l| l.signed()).collect::<Vec<_>>(),
            vec![1, -1, 2, -2]
        );
        let mut sorted = a.clone();
        sorted.sort();
        assert_eq!(sorted, a);
    }

    #[test]
    fn json_encoding_is_signed_indices() {
        let w = Word::from_letters([Letter::generator(0), Letter::generator_inverse(1)]);
        assert_eq!(serde_json::to_string(&w).unwrap(), "[1,-2]");
        let back: Word = serde_json::from_str("[1,-2]").unwrap();
        assert_eq!(back, w);
        assert!(serde_json::from_str::<Word>("[0]").is_err());
        assert_eq!(w.to_string(), "g1 g2^-1");
    }
}
