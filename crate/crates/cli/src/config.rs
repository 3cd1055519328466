//! Plain-text `key=value` configuration with `#` comments. Command-line
//! flags always win over file values.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "config line {} is not key=value: {line:?}",
                    lineno + 1
                ))
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                CliError::Usage(format!("config key {key}={raw:?} is invalid: {e}"))
            }),
        }
    }

    /// Comma-separated list value.
    pub fn get_list(&self, key: &str) -> Option<Vec<String>> {
        self.values.get(key).map(|raw| {
            raw.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        })
    }
}

/// Flag beats config beats default.
pub fn resolve<T>(flag: Option<T>, config: Result<Option<T>, CliError>, default: T) -> Result<T, CliError> {
    Ok(flag.or(config?).unwrap_or(default))
}

/// Flag beats config; the value is required from one of them.
pub fn resolve_required<T>(
    flag: Option<T>,
    config: Result<Option<T>, CliError>,
    what: &str,
) -> Result<T, CliError> {
    flag.or(config?)
        .ok_or_else(|| CliError::Usage(format!("{what} must be given as a flag or config key")))
}
