//! Line-oriented `key=value` files with `#` comments.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KvError {
    #[error("line {line}: expected key=value, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: duplicate key {key:?}")]
    Duplicate { line: usize, key: String },
    #[error("unknown key {key:?} (known keys: {known})")]
    UnknownKey { key: String, known: String },
    #[error("missing required key {0:?}")]
    Missing(String),
    #[error("key {key:?}: cannot parse {value:?}")]
    Value { key: String, value: String },
}

/// Parsed key/value pairs, keys kept in sorted order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvMap {
    entries: BTreeMap<String, String>,
}

impl KvMap {
    pub fn parse(text: &str) -> Result<Self, KvError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(KvError::Syntax {
                    line: i + 1,
                    text: raw.to_owned(),
                });
            };
            let key = k.trim().to_owned();
            if key.is_empty() {
                return Err(KvError::Syntax {
                    line: i + 1,
                    text: raw.to_owned(),
                });
            }
            if entries.insert(key.clone(), v.trim().to_owned()).is_some() {
                return Err(KvError::Duplicate { line: i + 1, key });
            }
        }
        Ok(Self { entries })
    }

    /// Rejects any key outside `known`.
    pub fn check_keys(&self, known: &[&str]) -> Result<(), KvError> {
        for key in self.entries.keys() {
            if !known.contains(&key.as_str()) {
                return Err(KvError::UnknownKey {
                    key: key.clone(),
                    known: known.join(", "),
                });
            }
        }
        Ok(())
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_owned(), value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, KvError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| KvError::Value {
                key: key.to_owned(),
                value: v.clone(),
            }),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, KvError> {
        self.get(key)?.ok_or_else(|| KvError::Missing(key.to_owned()))
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, KvError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Renders back to `key=value` lines in key order.
    pub fn render(&self) -> String {
        self.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
