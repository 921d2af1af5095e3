//! Line-oriented `key = value` documents with `[section]` headers.
//!
//! Shared by experiment configs, fuzzy definitions and gain files. `#` starts
//! a comment; keys are unique within a section; keys before the first header
//! belong to the unnamed root section.

use std::collections::BTreeSet;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key).ok_or_else(|| Error::Parse {
            line: self.line,
            msg: format!("section [{}] is missing key '{key}'", self.name),
        })
    }

    /// Parses an optional value, reporting the entry's line on failure.
    pub fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key).map(|e| e.parse()).transpose()
    }

    /// Fails on the first key not present in `allowed`.
    pub fn deny_unknown(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.iter().find(|e| !allowed.contains(&e.key.as_str())) {
            Some(e) => Err(Error::Parse {
                line: e.line,
                msg: format!("unknown key '{}' in section [{}]", e.key, self.name),
            }),
            None => Ok(()),
        }
    }
}

impl Entry {
    pub fn parse<T: FromStr>(&self) -> Result<T> {
        self.value.parse().map_err(|_| self.error(format!("cannot parse '{}'", self.value)))
    }

    /// Splits on whitespace and parses exactly `n` values.
    pub fn parse_list<T: FromStr>(&self, n: usize) -> Result<Vec<T>> {
        let items: Vec<&str> = self.value.split_whitespace().collect();
        if items.len() != n {
            return Err(self.error(format!("expected {n} values, found {}", items.len())));
        }
        items
            .iter()
            .map(|s| s.parse().map_err(|_| self.error(format!("cannot parse '{s}'"))))
            .collect()
    }

    pub fn error(&self, msg: String) -> Error {
        Error::Parse {
            line: self.line,
            msg: format!("{}: {msg}", self.key),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections = vec![Section {
            name: String::new(),
            line: 0,
            entries: Vec::new(),
        }];
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("malformed section header '{content}'"),
                })?;
                let name = name.split_whitespace().collect::<Vec<_>>().join(" ");
                if name.is_empty() || !seen.insert(name.clone()) {
                    return Err(Error::Parse {
                        line,
                        msg: format!("empty or duplicate section '[{name}]'"),
                    });
                }
                sections.push(Section {
                    name,
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected 'key = value', found '{content}'"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: "empty key".into(),
                });
            }
            let section = sections.last_mut().expect("root section");
            if section.get(key).is_some() {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key '{key}'"),
                });
            }
            section.entries.push(Entry {
                key: key.to_string(),
                value: value.trim().to_string(),
                line,
            });
        }
        Ok(Self { sections })
    }

    pub fn root(&self) -> &Section {
        &self.sections[0]
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().skip(1).find(|s| s.name == name)
    }

    pub fn require_section(&self, name: &str) -> Result<&Section> {
        self.section(name).ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("missing section [{name}]"),
        })
    }
}
