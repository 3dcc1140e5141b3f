//! Settings shared by every subcommand.
//!
//! Precedence: command-line flags, then `FN_*` environment variables, then
//! the TOML config file (`--config` or `FN_CONFIG`), then defaults.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_LOG_LEVEL: &str = "warn";

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub store: Option<PathBuf>,
    pub taxonomy: Option<String>,
    pub bind: Option<String>,
    pub token: Option<String>,
    pub log_level: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::validation(format!("config {}: {e}", path.display())).field("config"))
    }
}

/// Values given on the command line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Flags {
    pub config: Option<PathBuf>,
    pub store: Option<PathBuf>,
    pub taxonomy: Option<String>,
    pub bind: Option<String>,
    pub token: Option<String>,
    pub log_level: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings {
    pub store: Option<PathBuf>,
    pub taxonomy: Option<String>,
    pub bind: String,
    pub token: Option<String>,
    pub log_level: String,
}

impl Settings {
    pub fn resolve(flags: &Flags, env: &HashMap<String, String>) -> Result<Self, CliError> {
        let var = |k: &str| env.get(k).filter(|v| !v.trim().is_empty()).cloned();
        let file = match flags.config.clone().or_else(|| var("FN_CONFIG").map(PathBuf::from)) {
            Some(p) => FileConfig::load(&p)?,
            None => FileConfig::default(),
        };
        Ok(Self {
            store: flags.store.clone().or_else(|| var("FN_STORE").map(PathBuf::from)).or(file.store),
            taxonomy: flags.taxonomy.clone().or_else(|| var("FN_TAXONOMY")).or(file.taxonomy),
            bind: flags
                .bind
                .clone()
                .or_else(|| var("FN_BIND"))
                .or(file.bind)
                .unwrap_or_else(|| seacat_api::DEFAULT_BIND.to_string()),
            token: flags.token.clone().or_else(|| var("FN_TOKEN")).or(file.token),
            log_level: flags
                .log_level
                .clone()
                .or_else(|| var("FN_LOG"))
                .or(file.log_level)
                .unwrap_or_else(|| DEFAULT_LOG_LEVEL.to_string()),
        })
    }

    pub fn taxonomy(&self) -> Result<&str, CliError> {
        self.taxonomy
            .as_deref()
            .ok_or_else(|| CliError::validation("no taxonomy configured (--taxonomy or FN_TAXONOMY)").field("taxonomy"))
    }

    pub fn store(&self) -> Result<&Path, CliError> {
        self.store
            .as_deref()
            .ok_or_else(|| CliError::validation("no store configured (--store or FN_STORE)").field("store"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> HashMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn precedence_is_flags_env_file_default() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("fn.toml");
        std::fs::write(&cfg, "store = \"file.jsonl\"\ntaxonomy = \"file.tsv\"\nbind = \"0.0.0.0:1\"\nlog_level = \"debug\"\n")
            .unwrap();
        let flags = Flags { config: Some(cfg.clone()), store: Some("flag.jsonl".into()), ..Default::default() };
        let e = env(&[("FN_STORE", "env.jsonl"), ("FN_TAXONOMY", "env.tsv")]);
        let s = Settings::resolve(&flags, &e).unwrap();
        assert_eq!(s.store, Some(PathBuf::from("flag.jsonl")));
        assert_eq!(s.taxonomy.as_deref(), Some("env.tsv"));
        assert_eq!(s.bind, "0.0.0.0:1");
        assert_eq!(s.log_level, "debug");
        assert_eq!(s.token, None);

        let e = env(&[("FN_CONFIG", cfg.to_str().unwrap())]);
        let s = Settings::resolve(&Flags::default(), &e).unwrap();
        assert_eq!(s.store, Some(PathBuf::from("file.jsonl")));

        let s = Settings::resolve(&Flags::default(), &HashMap::new()).unwrap();
        assert_eq!((s.bind.as_str(), s.log_level.as_str()), (seacat_api::DEFAULT_BIND, DEFAULT_LOG_LEVEL));
        assert!(s.store().is_err() && s.taxonomy().is_err());
    }

    #[test]
    fn bad_config_files() {
        let dir = tempfile::tempdir().unwrap();
        let missing = Flags { config: Some(dir.path().join("nope.toml")), ..Default::default() };
        assert_eq!(Settings::resolve(&missing, &HashMap::new()).unwrap_err().exit_code(), 2);
        let bad = dir.path().join("bad.toml");
        std::fs::write(&bad, "colour = \"red\"\n").unwrap();
        let flags = Flags { config: Some(bad), ..Default::default() };
        assert_eq!(Settings::resolve(&flags, &HashMap::new()).unwrap_err().exit_code(), 1);
    }
}
