//! Frozen empirical constants in a flat `key = value` file.
//!
//! A key missing from the file is recorded from the first observation and
//! written back; later runs compare against it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::{Error, Result};

/// Environment variable that overrides the regression file location.
pub const REGRESSION_ENV: &str = "GCDSUM_REGRESSION_FILE";

static WRITE_LOCK: Mutex<()> = Mutex::new(());

/// `$GCDSUM_REGRESSION_FILE`, else `regression.txt` at the workspace root.
pub fn default_path() -> PathBuf {
    match std::env::var_os(REGRESSION_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../regression.txt"),
    }
}

/// Parsed contents; comments and blank lines are dropped on rewrite.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Regression {
    values: BTreeMap<String, String>,
}

impl Regression {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Regression {
                path: path.to_path_buf(),
                message: format!("line {}: expected `key = value`", i + 1),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(Error::Regression {
                    path: path.to_path_buf(),
                    message: format!("line {}: bad key `{k}`", i + 1),
                });
            }
            values.insert(k.to_string(), v.to_string());
        }
        Ok(Self { values })
    }

    /// Reads `path`; a missing file is an empty set.
    pub fn load(path: &Path) -> Result<Self> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::parse(&text, path),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(source) => Err(Error::Io {
                path: path.to_path_buf(),
                source,
            }),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str, path: &Path) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| Error::Regression {
                    path: path.to_path_buf(),
                    message: format!("`{key}` is not a number: `{v}`"),
                })
            })
            .transpose()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# frozen empirical constants (key = value)\n");
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

/// How a check against a frozen constant went.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// Key was absent and has now been written.
    Frozen { value: f64 },
    Pass { observed: f64, frozen: f64 },
    Fail { observed: f64, frozen: f64 },
}

impl Outcome {
    pub fn passed(&self) -> bool {
        !matches!(self, Outcome::Fail { .. })
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Frozen { value } => write!(f, "frozen {value:.9e}"),
            Outcome::Pass { observed, frozen } => write!(f, "observed {observed:.9e} vs frozen {frozen:.9e}"),
            Outcome::Fail { observed, frozen } => write!(f, "observed {observed:.9e} breaks frozen {frozen:.9e}"),
        }
    }
}

/// The comparison applied once a value is frozen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Check {
    /// `observed <= frozen * (1 + slack)`
    AtMost { slack: f64 },
    /// `|observed - frozen| <= tol * max(1, |frozen|)`
    Near { tol: f64 },
    /// `|observed| <= |frozen| * (1 + slack)`: a band around zero
    Band { slack: f64 },
}

impl Check {
    fn accepts(self, observed: f64, frozen: f64) -> bool {
        match self {
            Check::AtMost { slack } => observed <= frozen * (1.0 + slack),
            Check::Near { tol } => (observed - frozen).abs() <= tol * frozen.abs().max(1.0),
            Check::Band { slack } => observed.abs() <= frozen.abs() * (1.0 + slack),
        }
    }
}

/// A regression file bound to its path.
#[derive(Debug, Clone)]
pub struct RegressionFile {
    path: PathBuf,
}

impl RegressionFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn from_env() -> Self {
        Self::new(default_path())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn read(&self) -> Result<Regression> {
        Regression::load(&self.path)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.read()?.get_f64(key, &self.path)
    }

    /// Compares `observed` with the frozen value of `key`, freezing it if
    /// the key is new. NaN never passes and is never frozen.
    pub fn check(&self, key: &str, observed: f64, check: Check) -> Result<Outcome> {
        let _guard = WRITE_LOCK.lock().unwrap_or_else(|e| e.into_inner());
        let mut current = self.read()?;
        if let Some(frozen) = current.get_f64(key, &self.path)? {
            let ok = observed.is_finite() && check.accepts(observed, frozen);
            return Ok(if ok {
                Outcome::Pass { observed, frozen }
            } else {
                Outcome::Fail { observed, frozen }
            });
        }
        if !observed.is_finite() {
            return Ok(Outcome::Fail {
                observed,
                frozen: f64::NAN,
            });
        }
        current.values.insert(key.to_string(), format!("{observed:.12e}"));
        std::fs::write(&self.path, current.render()).map_err(|source| Error::Io {
            path: self.path.clone(),
            source,
        })?;
        // the check runs against the value as written
        let frozen = current.get_f64(key, &self.path)?.expect("just inserted");
        Ok(if check.accepts(observed, frozen) {
            Outcome::Frozen { value: frozen }
        } else {
            Outcome::Fail { observed, frozen }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn freeze_then_check() {
        let dir = tempfile::tempdir().unwrap();
        let f = RegressionFile::new(dir.path().join("r.txt"));
        assert!(f.read().unwrap().is_empty());
        let first = f.check("a.max", 1.5, Check::AtMost { slack: 0.01 }).unwrap();
        assert!(matches!(first, Outcome::Frozen { .. }));
        assert!(f.check("a.max", 1.51, Check::AtMost { slack: 0.01 }).unwrap().passed());
        assert!(!f.check("a.max", 1.6, Check::AtMost { slack: 0.01 }).unwrap().passed());
        f.check("b", -2.0, Check::Near { tol: 1e-6 }).unwrap();
        assert!(!f.check("b", -2.1, Check::Near { tol: 1e-6 }).unwrap().passed());
        assert!(!f.check("c", f64::NAN, Check::Near { tol: 1.0 }).unwrap().passed());
        let text = std::fs::read_to_string(f.path()).unwrap();
        assert!(text.contains("a.max = 1.5"));
        assert_eq!(f.read().unwrap().len(), 2);
    }

    #[test]
    fn band_is_symmetric() {
        assert!(Check::Band { slack: 0.0 }.accepts(-0.3, 0.5));
        assert!(!Check::Band { slack: 0.0 }.accepts(0.6, -0.5));
    }

    #[test]
    fn malformed_lines() {
        let p = Path::new("x");
        assert!(Regression::parse("a = 1\n# c\n\nb=2", p).is_ok());
        assert!(Regression::parse("novalue", p).is_err());
        assert!(Regression::parse("two words = 1", p).is_err());
        let r = Regression::parse("k = abc", p).unwrap();
        assert!(r.get_f64("k", p).is_err());
    }
}
