//! Runtime settings. Precedence is flags, then `CRMCAT_*` variables, then
//! the key-value config file, then built-in defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crmcat_core::model::DEFAULT_BASE;
use crmcat_core::{Iri, Profile};
use thiserror::Error;

pub const DEFAULT_STORE: &str = "catalog.tlog";
pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub store: PathBuf,
    pub base: String,
    pub profile: Profile,
    pub listen: String,
    pub operator: Option<Iri>,
    /// Mint ids from a counter starting at this epoch instead of the clock.
    pub id_epoch: Option<u64>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            store: PathBuf::from(DEFAULT_STORE),
            base: DEFAULT_BASE.to_string(),
            profile: Profile::Paper,
            listen: DEFAULT_LISTEN.to_string(),
            operator: None,
            id_epoch: None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {message}")]
    Read { path: String, message: String },
    #[error("config file {path}, line {line}: expected `key = value`")]
    Syntax { path: String, line: usize },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value for {key}: {value:?}")]
    Value { key: String, value: String },
}

/// Values supplied by one layer; `None` means "not set here".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Layer {
    pub store: Option<String>,
    pub base: Option<String>,
    pub profile: Option<String>,
    pub listen: Option<String>,
    pub operator: Option<String>,
    pub id_epoch: Option<String>,
}

impl Layer {
    fn set(&mut self, key: &str, value: String) -> Result<(), ConfigError> {
        let slot = match key {
            "store" => &mut self.store,
            "base" => &mut self.base,
            "profile" => &mut self.profile,
            "listen" => &mut self.listen,
            "operator" => &mut self.operator,
            "id_epoch" => &mut self.id_epoch,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        };
        *slot = Some(value);
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, path: &str) -> Result<Layer, ConfigError> {
        let mut layer = Layer::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax {
                path: path.to_string(),
                line: n + 1,
            })?;
            layer.set(key.trim(), value.trim().to_string())?;
        }
        Ok(layer)
    }

    pub fn from_file(path: &Path) -> Result<Layer, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Layer::parse(&text, &path.display().to_string())
    }

    /// Reads `CRMCAT_STORE`, `CRMCAT_BASE` and so on through `lookup`.
    pub fn from_env(lookup: impl Fn(&str) -> Option<String>) -> Layer {
        let get = |key: &str| lookup(&format!("CRMCAT_{}", key.to_ascii_uppercase())).filter(|v| !v.is_empty());
        Layer {
            store: get("store"),
            base: get("base"),
            profile: get("profile"),
            listen: get("listen"),
            operator: get("operator"),
            id_epoch: get("id_epoch"),
        }
    }

    /// Fills the unset values of `self` from `lower`.
    pub fn over(self, lower: Layer) -> Layer {
        Layer {
            store: self.store.or(lower.store),
            base: self.base.or(lower.base),
            profile: self.profile.or(lower.profile),
            listen: self.listen.or(lower.listen),
            operator: self.operator.or(lower.operator),
            id_epoch: self.id_epoch.or(lower.id_epoch),
        }
    }

    pub fn resolve(self) -> Result<Config, ConfigError> {
        let defaults = Config::default();
        let bad = |key: &str, value: &str| ConfigError::Value {
            key: key.to_string(),
            value: value.to_string(),
        };
        let profile = match self.profile {
            Some(p) => Profile::from_str(&p).map_err(|_| bad("profile", &p))?,
            None => defaults.profile,
        };
        let id_epoch = match self.id_epoch {
            Some(e) => Some(e.parse().map_err(|_| bad("id_epoch", &e))?),
            None => None,
        };
        Ok(Config {
            store: self.store.map(PathBuf::from).unwrap_or(defaults.store),
            base: self.base.unwrap_or(defaults.base),
            profile,
            listen: self.listen.unwrap_or(defaults.listen),
            operator: self.operator.map(Iri::new),
            id_epoch,
        })
    }
}

/// The config file named by a flag or `CRMCAT_CONFIG`, if any.
pub fn config_path(flag: Option<&Path>, lookup: impl Fn(&str) -> Option<String>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| lookup("CRMCAT_CONFIG").filter(|v| !v.is_empty()).map(PathBuf::from))
}
