//! Line-oriented `key = value` text with optional `[section]` headers.
//!
//! Used for ensemble configs, run configs and experiment reports. Blank
//! lines and lines starting with `#` are ignored. Floats are written with
//! 17 significant digits so every value reads back bit-exactly.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Section {
    /// Empty for the implicit top-level section.
    pub name: String,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key).ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing key `{key}` in section [{}]", self.name),
        })
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<T> {
        let e = self.require(key)?;
        e.parse()
    }

    pub fn parse_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let e = self.require(key)?;
        e.parse_list()
    }
}

impl Entry {
    pub fn parse<T: FromStr>(&self) -> Result<T> {
        self.value.trim().parse().map_err(|_| Error::Parse {
            line: self.line,
            message: format!("bad value `{}` for `{}`", self.value, self.key),
        })
    }

    pub fn parse_list<T: FromStr>(&self) -> Result<Vec<T>> {
        parse_list(&self.value).map_err(|_| Error::Parse {
            line: self.line,
            message: format!("bad list `{}` for `{}`", self.value, self.key),
        })
    }
}

/// Parses a comma-separated list; the empty string is the empty list.
pub fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, T::Err> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|p| p.trim().parse()).collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections = vec![Section::default()];
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                    line,
                    message: format!("unterminated section header `{s}`"),
                })?;
                let name = name.trim();
                if name.is_empty() || sections.iter().any(|sec| sec.name == name) {
                    return Err(Error::Parse {
                        line,
                        message: format!("empty or duplicate section `{name}`"),
                    });
                }
                sections.push(Section {
                    name: name.to_string(),
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = s.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, got `{s}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "empty key".into(),
                });
            }
            let current = sections.last_mut().expect("top-level section always present");
            if current.get(key).is_some() {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            current.entries.push(Entry {
                key: key.to_string(),
                value: value.trim().to_string(),
                line,
            });
        }
        Ok(Self { sections })
    }

    pub fn top(&self) -> &Section {
        &self.sections[0]
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

/// Float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_f64_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(",")
}

pub fn fmt_list<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Accumulates `key = value` lines.
#[derive(Debug, Default)]
pub struct Writer {
    buf: String,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn section(&mut self, name: &str) -> &mut Self {
        if !self.buf.is_empty() {
            self.buf.push('\n');
        }
        let _ = writeln!(self.buf, "[{name}]");
        self
    }

    pub fn kv(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.buf, "{key} = {value}");
        self
    }

    pub fn float(&mut self, key: &str, value: f64) -> &mut Self {
        self.kv(key, fmt_f64(value))
    }

    pub fn floats(&mut self, key: &str, values: &[f64]) -> &mut Self {
        self.kv(key, fmt_f64_list(values))
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_reports_lines() {
        let doc = Document::parse("# c\na = 1\n\n[payload]\nb = 2, 3\n").unwrap();
        assert_eq!(doc.top().parse_value::<i32>("a").unwrap(), 1);
        let p = doc.section("payload").unwrap();
        assert_eq!(p.parse_list::<i32>("b").unwrap(), vec![2, 3]);
        assert_eq!(p.get("b").unwrap().line, 5);

        match Document::parse("a = 1\nnonsense\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Document::parse("a = 1\na = 2\n").is_err());
    }

    #[test]
    fn floats_round_trip_bit_exactly() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, f64::INFINITY, 16.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }
}
