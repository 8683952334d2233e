//! Optional JSON config file whose keys mirror the long flag names.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        match serde_json::from_str(&text) {
            Ok(Value::Object(values)) => Ok(ConfigFile { values }),
            Ok(_) => Err(CliError::Usage(format!(
                "config {} must hold a JSON object",
                path.display()
            ))),
            Err(e) => Err(CliError::Usage(format!("config {}: {e}", path.display()))),
        }
    }

    /// The flag when given, else the config entry, else `None`.
    pub fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key:?}: {e}"))),
        }
    }

    pub fn get<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// String-valued option parsed with `FromStr`, so that config files may
    /// hold exponents such as `"1/2"` or `"inf"` as well as plain numbers.
    pub fn parsed<T>(&self, flag: Option<String>, key: &str, default: &str) -> Result<T, CliError>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        let raw = match flag {
            Some(s) => s,
            None => match self.values.get(key) {
                None | Some(Value::Null) => default.to_string(),
                Some(Value::String(s)) => s.clone(),
                Some(v) => v.to_string(),
            },
        };
        raw.parse()
            .map_err(|e| CliError::Usage(format!("--{key} {raw:?}: {e}")))
    }
}

/// `"4..8"`, `"4..=8"` or `"4,5,6"`.
pub fn parse_levels(s: &str) -> Result<Vec<u32>, CliError> {
    let bad = || CliError::Usage(format!("cannot parse levels {s:?}; use 4..8 or 4,5,6"));
    let range = s.split_once("..=").or_else(|| s.split_once(".."));
    let levels: Vec<u32> = if let Some((a, b)) = range {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if levels.is_empty() {
        return Err(bad());
    }
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_config() {
        let config = ConfigFile {
            values: serde_json::from_str(r#"{"jmax": 5, "p": "1/2", "q": 2}"#).unwrap(),
        };
        assert_eq!(config.get(Some(7u32), "jmax", 1).unwrap(), 7);
        assert_eq!(config.get(None, "jmax", 1u32).unwrap(), 5);
        assert_eq!(config.get(None, "seed", 42u64).unwrap(), 42);
        let p: lpcalc::rational::Exponent = config.parsed(None, "p", "2").unwrap();
        assert_eq!(p, lpcalc::rational::Exponent::ratio(1, 2));
        let q: f64 = config.parsed(None, "q", "1").unwrap();
        assert_eq!(q, 2.0);
        assert!(config.get::<String>(None, "jmax", String::new()).is_err());
    }

    #[test]
    fn level_lists() {
        assert_eq!(parse_levels("4..7").unwrap(), vec![4, 5, 6, 7]);
        assert_eq!(parse_levels("4..=5").unwrap(), vec![4, 5]);
        assert_eq!(parse_levels("3, 6").unwrap(), vec![3, 6]);
        assert!(parse_levels("x").is_err());
    }
}
