//! Optional `key=value` config files; explicit flags override file entries.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Parse `key=value` lines; `#` starts a comment, blank lines ignored.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "config line {} is not key=value: {raw:?}",
                    lineno + 1
                ));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| format!("config key {key}: cannot parse {raw:?}")),
        }
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }
}

/// CLI value if given, else config value, else the default.
pub fn resolve<T: FromStr>(
    cli: Option<T>,
    cfg: &FileConfig,
    key: &str,
    default: T,
) -> Result<T, String> {
    match cli {
        Some(v) => Ok(v),
        None => Ok(cfg.get(key)?.unwrap_or(default)),
    }
}

/// CLI value if given, else config value (no default).
pub fn resolve_opt<T: FromStr>(
    cli: Option<T>,
    cfg: &FileConfig,
    key: &str,
) -> Result<Option<T>, String> {
    match cli {
        Some(v) => Ok(Some(v)),
        None => cfg.get(key),
    }
}
