use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

/// Ordered, duplicate-free list of monitored API identities.
///
/// Entry `i` defines feature `i` of every vector built from this vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiVocabulary {
    entries: Vec<String>,
    index: HashMap<String, usize>,
}

impl ApiVocabulary {
    /// Builds a vocabulary from identities, keeping the first occurrence of duplicates.
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = Vec::new();
        let mut index = HashMap::new();
        for entry in entries {
            let entry = entry.into();
            if entry.is_empty() || index.contains_key(&entry) {
                continue;
            }
            index.insert(entry.clone(), out.len());
            out.push(entry);
        }
        if out.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        Ok(Self {
            entries: out,
            index,
        })
    }

    /// Reads one identity per line. Blank lines and `#` comments are skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            lines.push(trimmed.to_string());
        }
        Self::new(lines)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    /// Generic `x1..xd` names, used for synthetic data.
    pub fn generic(d: usize) -> Result<Self> {
        Self::new((1..=d).map(|i| format!("x{i}")))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn position(&self, identity: &str) -> Option<usize> {
        self.index.get(identity).copied()
    }

    pub fn write_to<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for e in &self.entries {
            writeln!(w, "{e}")?;
        }
        Ok(())
    }
}
