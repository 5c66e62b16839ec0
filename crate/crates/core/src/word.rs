use std::fmt;

use serde::{Deserialize, Serialize};

/// A letter of an input, terminal or stack alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(String);

impl Symbol {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Self(s)
    }
}

impl From<char> for Symbol {
    fn from(c: char) -> Self {
        Self(c.to_string())
    }
}

/// A finite (possibly empty) sequence of symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn new(symbols: Vec<Symbol>) -> Self {
        Self(symbols)
    }

    /// One symbol per character: `Word::from_chars("abba")`.
    pub fn from_chars(s: &str) -> Self {
        Self(s.chars().map(Symbol::from).collect())
    }

    /// Split on `sep`, dropping empty pieces.
    pub fn parse(s: &str, sep: Option<&str>) -> Self {
        match sep {
            Some(sep) if !sep.is_empty() => Self(
                s.split(sep)
                    .filter(|p| !p.is_empty())
                    .map(Symbol::from)
                    .collect(),
            ),
            _ => Self::from_chars(s),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Symbol> {
        self.0.iter()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn repeat(&self, times: usize) -> Word {
        Word((0..times).flat_map(|_| self.0.iter().cloned()).collect())
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    pub fn count(&self, s: &str) -> usize {
        self.0.iter().filter(|x| x.as_str() == s).count()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let single = self.0.iter().all(|s| s.as_str().chars().count() == 1);
        let sep = if single { "" } else { " " };
        let parts: Vec<&str> = self.0.iter().map(Symbol::as_str).collect();
        f.write_str(&parts.join(sep))
    }
}

impl FromIterator<Symbol> for Word {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Word {
    type Item = &'a Symbol;
    type IntoIter = std::slice::Iter<'a, Symbol>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Every word over `alphabet` of length exactly `len`, in lexicographic order
/// of alphabet positions.
pub fn words_of_length(alphabet: &[Symbol], len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                alphabet.iter().map(move |a| {
                    let mut next = w.clone();
                    next.push(a.clone());
                    next
                })
            })
            .collect();
    }
    out
}

/// Every word over `alphabet` of length at most `max_len`, shortest first.
pub fn words_up_to(alphabet: &[Symbol], max_len: usize) -> Vec<Word> {
    (0..=max_len)
        .flat_map(|n| words_of_length(alphabet, n))
        .collect()
}

pub fn alphabet(names: &[&str]) -> Vec<Symbol> {
    names.iter().map(|&s| Symbol::from(s)).collect()
}
