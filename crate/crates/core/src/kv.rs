//! Plain-text `key = value` blocks with `#` comments.
//!
//! Used for critical specs, cached equilibrium measures and CLI config
//! files. Keys are case-sensitive; later duplicates are an error so that a
//! typo cannot silently override a value.

use std::collections::BTreeMap;

use crate::scalar::Real;
use crate::Error;

/// A parsed block remembering the line each key came from.
#[derive(Clone, Debug, Default)]
pub struct KvBlock {
    entries: BTreeMap<String, (usize, String)>,
}

impl KvBlock {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected `key = value`, found `{line}`"),
                });
            };
            let key = k.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "empty key".into(),
                });
            }
            if let Some((prev, _)) = entries.get(key) {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("duplicate key `{key}` (first set on line {prev})"),
                });
            }
            entries.insert(key.to_string(), (line_no, v.trim().to_string()));
        }
        Ok(KvBlock { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map(|(l, _)| *l).unwrap_or(0)
    }

    fn missing(key: &str) -> Error {
        Error::Parse {
            line: 0,
            msg: format!("missing key `{key}`"),
        }
    }

    pub fn require(&self, key: &str) -> Result<&str, Error> {
        self.get(key).ok_or_else(|| Self::missing(key))
    }

    pub fn real<T: Real>(&self, key: &str) -> Result<T, Error> {
        let v = self.require(key)?;
        T::parse_decimal(v).ok_or_else(|| Error::Parse {
            line: self.line_of(key),
            msg: format!("`{key}`: cannot parse `{v}` as a number"),
        })
    }

    pub fn integer(&self, key: &str) -> Result<i64, Error> {
        let v = self.require(key)?;
        v.parse().map_err(|_| Error::Parse {
            line: self.line_of(key),
            msg: format!("`{key}`: cannot parse `{v}` as an integer"),
        })
    }

    /// Whitespace- or comma-separated list of numbers.
    pub fn reals<T: Real>(&self, key: &str) -> Result<Vec<T>, Error> {
        let v = self.require(key)?;
        v.split(|ch: char| ch.is_whitespace() || ch == ',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                T::parse_decimal(s).ok_or_else(|| Error::Parse {
                    line: self.line_of(key),
                    msg: format!("`{key}`: cannot parse `{s}` as a number"),
                })
            })
            .collect()
    }
}

/// Incremental writer for the same format.
#[derive(Clone, Debug, Default)]
pub struct KvWriter {
    out: String,
}

impl KvWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comment(&mut self, text: &str) -> &mut Self {
        for line in text.lines() {
            self.out.push_str("# ");
            self.out.push_str(line);
            self.out.push('\n');
        }
        self
    }

    pub fn raw(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.out.push_str(&format!("{key} = {value}\n"));
        self
    }

    pub fn real<T: Real>(&mut self, key: &str, value: T) -> &mut Self {
        self.raw(key, value.to_sci(T::digits()))
    }

    pub fn reals<T: Real>(&mut self, key: &str, values: &[T]) -> &mut Self {
        let joined: Vec<String> = values.iter().map(|v| v.to_sci(T::digits())).collect();
        self.raw(key, joined.join(" "))
    }

    pub fn finish(&self) -> String {
        self.out.clone()
    }
}
