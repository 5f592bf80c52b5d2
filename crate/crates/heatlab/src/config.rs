//! Plain-text run configuration: `[section]` headers over `key = value`
//! lines.
//!
//! The format is deliberately primitive — trimmed lines, `#` comments,
//! one `=` per entry — so any language (or a shell one-liner) can write a
//! config without a serializer. Repeated keys are kept in order, which is
//! how lists of structured things (spikes, table points) are spelled;
//! repeated `[section]` headers merge into one section. Numbers use plain
//! `f64` syntax; list values are whitespace- or comma-separated.

use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing [{0}] section")]
    MissingSection(String),
    #[error("[{section}]: missing key `{key}`")]
    MissingKey { section: String, key: String },
    #[error("[{section}] {key} = {value}: expected {want}")]
    BadValue {
        section: String,
        key: String,
        value: String,
        want: String,
    },
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

/// One `[name]` block: entries in file order, repeated keys allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub name: String,
    entries: Vec<(String, String)>,
}

impl Section {
    /// Last value for `key` — later lines override earlier ones, so a
    /// config can be extended by appending.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError::MissingKey {
            section: self.name.clone(),
            key: key.to_string(),
        })
    }

    /// Every value bound to `key`, in file order (for list-like keys).
    pub fn all(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    fn bad(&self, key: &str, value: &str, want: &str) -> ConfigError {
        ConfigError::BadValue {
            section: self.name.clone(),
            key: key.to_string(),
            value: value.to_string(),
            want: want.to_string(),
        }
    }

    fn parse_with<T, F>(&self, key: &str, want: &str, f: F) -> Result<Option<T>, ConfigError>
    where
        F: Fn(&str) -> Option<T>,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => f(v).map(Some).ok_or_else(|| self.bad(key, v, want)),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.parse_with(key, "a finite number", |v| {
            v.parse::<f64>().ok().filter(|x| x.is_finite())
        })
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.require(key)?;
        Ok(self.f64(key)?.expect("key present"))
    }

    pub fn u32(&self, key: &str) -> Result<Option<u32>, ConfigError> {
        self.parse_with(key, "a nonnegative integer", |v| v.parse::<u32>().ok())
    }

    pub fn require_u32(&self, key: &str) -> Result<u32, ConfigError> {
        self.require(key)?;
        Ok(self.u32(key)?.expect("key present"))
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.parse_with(key, "a nonnegative integer", |v| v.parse::<usize>().ok())
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.parse_with(key, "true or false", |v| match v {
            "true" | "yes" | "1" => Some(true),
            "false" | "no" | "0" => Some(false),
            _ => None,
        })
    }

    /// Whitespace- or comma-separated list of numbers.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.parse_with(key, "a list of finite numbers", |v| {
            let xs: Vec<f64> = v
                .split([',', ' ', '\t'])
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect::<Option<_>>()?;
            (!xs.is_empty()).then_some(xs)
        })
    }

    pub fn require_f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.require(key)?;
        Ok(self.f64_list(key)?.expect("key present"))
    }
}

/// A parsed configuration file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    sections: Vec<Section>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut sections: Vec<Section> = Vec::new();
        let mut current: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let s = stripped.trim();
            if s.is_empty() {
                continue;
            }
            if let Some(name) = s.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    msg: format!("unterminated section header `{s}`"),
                })?;
                let name = name.trim();
                if name.is_empty() {
                    return Err(ConfigError::Syntax {
                        line,
                        msg: "empty section name".to_string(),
                    });
                }
                // Repeated headers reopen the same section.
                current = Some(match sections.iter().position(|sec| sec.name == name) {
                    Some(i) => i,
                    None => {
                        sections.push(Section {
                            name: name.to_string(),
                            entries: Vec::new(),
                        });
                        sections.len() - 1
                    }
                });
                continue;
            }
            let (key, value) = s.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                msg: format!("expected `key = value` or `[section]`, got `{s}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    msg: "empty key".to_string(),
                });
            }
            let Some(at) = current else {
                return Err(ConfigError::Syntax {
                    line,
                    msg: format!("`{key}` appears before any [section] header"),
                });
            };
            sections[at]
                .entries
                .push((key.to_string(), value.trim().to_string()));
        }
        Ok(Config { sections })
    }

    pub fn from_file(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Config::parse(&text)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn require_section(&self, name: &str) -> Result<&Section, ConfigError> {
        self.section(name)
            .ok_or_else(|| ConfigError::MissingSection(name.to_string()))
    }

    pub fn sections(&self) -> impl Iterator<Item = &Section> {
        self.sections.iter()
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for sec in &self.sections {
            writeln!(f, "[{}]", sec.name)?;
            for (k, v) in &sec.entries {
                writeln!(f, "{k} = {v}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_keys_and_comments_parse() {
        let cfg = Config::parse(
            "# run setup\n\
             [osgood]\n\
             family = power   # quadratic\n\
             c = 1\n\
             beta = 2\n\
             \n\
             [schedule]\n\
             tau0 = 1.0\n",
        )
        .unwrap();
        let os = cfg.section("osgood").unwrap();
        assert_eq!(os.get("family"), Some("power"));
        assert_eq!(os.require_f64("beta").unwrap(), 2.0);
        assert_eq!(cfg.section("schedule").unwrap().require_f64("tau0").unwrap(), 1.0);
        assert!(cfg.section("missing").is_none());
    }

    #[test]
    fn repeated_keys_accumulate_and_last_wins_for_get() {
        let cfg = Config::parse(
            "[data]\n\
             spike = 1.5 0.35 0.44 1\n\
             spike = 2.5 0.02 0.03 8\n\
             dim = 2\n\
             dim = 3\n",
        )
        .unwrap();
        let d = cfg.section("data").unwrap();
        assert_eq!(d.all("spike").len(), 2);
        assert_eq!(d.all("spike")[1], "2.5 0.02 0.03 8");
        // Appending `dim = 3` later overrides the earlier value.
        assert_eq!(d.u32("dim").unwrap(), Some(3));
    }

    #[test]
    fn repeated_section_headers_merge() {
        let cfg = Config::parse("[a]\nx = 1\n[b]\ny = 2\n[a]\nz = 3\n").unwrap();
        let a = cfg.section("a").unwrap();
        assert_eq!(a.get("x"), Some("1"));
        assert_eq!(a.get("z"), Some("3"));
        assert_eq!(cfg.sections().count(), 2);
    }

    #[test]
    fn lists_split_on_commas_and_spaces() {
        let cfg = Config::parse("[e]\nradii = 1.5, 2.5 3.5\n").unwrap();
        let radii = cfg.section("e").unwrap().require_f64_list("radii").unwrap();
        assert_eq!(radii, vec![1.5, 2.5, 3.5]);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = Config::parse("[a]\ngood = 1\nnonsense\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::Syntax {
                line: 3,
                msg: "expected `key = value` or `[section]`, got `nonsense`".to_string()
            }
        );
        let err = Config::parse("x = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));
        let err = Config::parse("[broken\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));
    }

    #[test]
    fn typed_getters_reject_garbage_with_context() {
        let cfg = Config::parse("[s]\nbeta = banana\nflag = maybe\n").unwrap();
        let s = cfg.section("s").unwrap();
        let err = s.require_f64("beta").unwrap_err();
        assert_eq!(
            err.to_string(),
            "[s] beta = banana: expected a finite number"
        );
        assert!(s.bool("flag").is_err());
        assert!(matches!(
            s.require("absent"),
            Err(ConfigError::MissingKey { .. })
        ));
    }

    #[test]
    fn display_round_trips_through_parse() {
        let cfg = Config::parse("[a]\nx = 1\nspike = 1 2 3\n[b]\ny = hello world\n").unwrap();
        let again = Config::parse(&cfg.to_string()).unwrap();
        assert_eq!(cfg, again);
    }
}
