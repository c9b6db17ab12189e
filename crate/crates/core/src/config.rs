//! Analyzer configuration: rule selection, severities, naming conventions
//! and call-classification patterns. Loaded from JSON; every field is optional.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::id::MwcId;
use crate::registry::{CategoryRecord, Registry, Severity};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config `{field}` names unknown rule {id}")]
    UnknownRule { field: &'static str, id: MwcId },
    #[error("convention list `{0}` is empty")]
    EmptyConvention(&'static str),
    #[error("call pattern `{pattern}` is not a valid regex: {message}")]
    BadPattern { pattern: String, message: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Sarif,
    #[serde(alias = "markdown")]
    Md,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "sarif" => Ok(Format::Sarif),
            "md" | "markdown" => Ok(Format::Md),
            other => Err(format!("unknown format `{other}` (expected json, sarif or md)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Sarif => "sarif",
            Format::Md => "md",
        })
    }
}

fn words(ws: &[&str]) -> Vec<String> {
    ws.iter().map(|s| s.to_string()).collect()
}

/// Identifier words that mark a role in the heuristics. Identifiers are split
/// into lowercase words on `_` and case changes before matching.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Conventions {
    pub freeze: Vec<String>,
    pub supply: Vec<String>,
    pub nonce: Vec<String>,
    pub domain: Vec<String>,
    pub payload: Vec<String>,
    pub wrap: Vec<String>,
    pub commit: Vec<String>,
    pub callback: Vec<String>,
    pub capability: Vec<String>,
    pub store: Vec<String>,
    pub sender: Vec<String>,
    pub role: Vec<String>,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            freeze: words(&["frozen"]),
            supply: words(&["supply", "total"]),
            nonce: words(&["nonce"]),
            domain: words(&["domain", "context", "chain_id"]),
            payload: words(&["payload"]),
            wrap: words(&["wrap"]),
            commit: words(&["commit", "commitment", "reveal"]),
            callback: words(&["callback"]),
            capability: words(&["cap", "capability"]),
            store: words(&["store"]),
            sender: words(&["sender"]),
            role: words(&["role", "roles", "authorized", "authorised", "permission", "permissions"]),
        }
    }
}

impl Conventions {
    fn lists(&self) -> [(&'static str, &Vec<String>); 12] {
        [
            ("freeze", &self.freeze),
            ("supply", &self.supply),
            ("nonce", &self.nonce),
            ("domain", &self.domain),
            ("payload", &self.payload),
            ("wrap", &self.wrap),
            ("commit", &self.commit),
            ("callback", &self.callback),
            ("capability", &self.capability),
            ("store", &self.store),
            ("sender", &self.sender),
            ("role", &self.role),
        ]
    }
}

/// Splits an identifier into lowercase words: `evmCallback_v2` → `evm`, `callback`, `v2`.
pub fn identifier_words(ident: &str) -> Vec<String> {
    let mut out = Vec::new();
    for part in ident.split('_').filter(|p| !p.is_empty()) {
        let mut cur = String::new();
        let chars: Vec<char> = part.chars().collect();
        for (i, &c) in chars.iter().enumerate() {
            let boundary = c.is_uppercase()
                && i > 0
                && (chars[i - 1].is_lowercase() || chars.get(i + 1).is_some_and(|n| n.is_lowercase()));
            if boundary && !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            cur.extend(c.to_lowercase());
        }
        if !cur.is_empty() {
            out.push(cur);
        }
    }
    out
}

/// True if the identifier, or any run of its words, equals a convention entry.
/// Multi-word entries such as `chain_id` match consecutive words.
pub fn matches_convention(ident: &str, list: &[String]) -> bool {
    let ws = identifier_words(ident);
    list.iter().any(|entry| {
        let ew = identifier_words(entry);
        !ew.is_empty() && ws.windows(ew.len()).any(|w| w == ew.as_slice())
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CallClassKind {
    Internal,
    External,
    Crypto,
    Oracle,
    Bridge,
    Evm,
    Lock,
    StoragePrimitive,
    Unknown,
}

impl CallClassKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CallClassKind::Internal => "internal",
            CallClassKind::External => "external",
            CallClassKind::Crypto => "crypto",
            CallClassKind::Oracle => "oracle",
            CallClassKind::Bridge => "bridge",
            CallClassKind::Evm => "evm",
            CallClassKind::Lock => "lock",
            CallClassKind::StoragePrimitive => "storage-primitive",
            CallClassKind::Unknown => "unknown",
        }
    }
}

/// One classification rule. `qualifier` matches any module segment of the
/// callee path exactly; `name` is a regex over the last segment. A pattern
/// with both set requires both.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CallPattern {
    pub class: CallClassKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualifier: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl CallPattern {
    fn qualifier(class: CallClassKind, q: &str) -> Self {
        CallPattern { class, qualifier: Some(q.into()), name: None }
    }

    fn name(class: CallClassKind, n: &str) -> Self {
        CallPattern { class, qualifier: None, name: Some(n.into()) }
    }
}

impl fmt::Display for CallPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.class.as_str())?;
        if let Some(q) = &self.qualifier {
            write!(f, " qualifier={q}")?;
        }
        if let Some(n) = &self.name {
            write!(f, " name=/{n}/")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CallPatterns {
    /// Ordered; the first match decides the class.
    pub classes: Vec<CallPattern>,
    /// Calls that also carry the EVM flag, whatever their class.
    pub evm: Vec<CallPattern>,
    /// Hash functions, checked for domain separation.
    pub hash: Vec<CallPattern>,
    /// Regexes over the callee name marking calls that mutate global state.
    pub mutators: Vec<String>,
    /// Module qualifiers of ABI decoding helpers.
    pub abi: Vec<String>,
}

impl Default for CallPatterns {
    fn default() -> Self {
        use CallClassKind::*;
        CallPatterns {
            classes: vec![
                CallPattern::qualifier(External, "External"),
                CallPattern::qualifier(External, "EVM"),
                CallPattern::qualifier(External, "callback"),
                CallPattern::qualifier(Crypto, "crypto"),
                CallPattern::qualifier(Crypto, "hash"),
                CallPattern::name(Crypto, "^verify$"),
                CallPattern::qualifier(Oracle, "Oracle"),
                CallPattern::qualifier(Bridge, "Bridge"),
                CallPattern::name(Lock, "^lock_.*"),
            ],
            evm: vec![CallPattern::qualifier(Evm, "EVM"), CallPattern::name(Evm, "(?i)evm")],
            hash: vec![CallPattern::qualifier(Crypto, "hash")],
            mutators: vec!["^(update|set|write|withdraw|deposit|transfer|mint|burn)(_.*)?$".into()],
            abi: vec!["abi".into()],
        }
    }
}

impl CallPatterns {
    fn validate(&self) -> Result<(), ConfigError> {
        let regexes = self
            .classes
            .iter()
            .chain(&self.evm)
            .chain(&self.hash)
            .filter_map(|p| p.name.as_ref())
            .chain(&self.mutators);
        for r in regexes {
            Regex::new(r).map_err(|e| ConfigError::BadPattern { pattern: r.clone(), message: e.to_string() })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// `None` enables every rule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enabled_rules: Option<Vec<MwcId>>,
    pub disabled_rules: Vec<MwcId>,
    pub severity_overrides: BTreeMap<MwcId, Severity>,
    pub conventions: Conventions,
    pub call_patterns: CallPatterns,
    /// Event name → expected field names.
    pub event_schemas: BTreeMap<String, Vec<String>>,
    /// Abort codes that reveal nothing about the failing check.
    pub generic_error_codes: Vec<u64>,
    pub fail_on: Severity,
    pub format: Format,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            enabled_rules: None,
            disabled_rules: Vec::new(),
            severity_overrides: BTreeMap::new(),
            conventions: Conventions::default(),
            call_patterns: CallPatterns::default(),
            event_schemas: BTreeMap::new(),
            generic_error_codes: vec![0, 1],
            fail_on: Severity::High,
            format: Format::Json,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config, ConfigError> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.validate(Registry::builtin())?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Config::from_json(&text)
    }

    pub fn validate(&self, registry: &Registry) -> Result<(), ConfigError> {
        let check = |field: &'static str, id: &MwcId| {
            if registry.contains(*id) {
                Ok(())
            } else {
                Err(ConfigError::UnknownRule { field, id: *id })
            }
        };
        for id in self.enabled_rules.iter().flatten() {
            check("enabled_rules", id)?;
        }
        for id in &self.disabled_rules {
            check("disabled_rules", id)?;
        }
        for id in self.severity_overrides.keys() {
            check("severity_overrides", id)?;
        }
        for (name, list) in self.conventions.lists() {
            if list.is_empty() {
                return Err(ConfigError::EmptyConvention(name));
            }
        }
        self.call_patterns.validate()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn is_enabled(&self, id: MwcId) -> bool {
        self.enabled_rules.as_ref().is_none_or(|ids| ids.contains(&id)) && !self.disabled_rules.contains(&id)
    }

    pub fn severity_for(&self, record: &CategoryRecord) -> Severity {
        self.severity_overrides.get(&record.id).copied().unwrap_or(record.severity_default)
    }

    /// Copy with `id` added to the disabled list.
    pub fn without_rule(&self, id: MwcId) -> Config {
        let mut c = self.clone();
        if !c.disabled_rules.contains(&id) {
            c.disabled_rules.push(id);
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::mwc;

    #[test]
    fn words_split_on_case_and_underscore() {
        assert_eq!(identifier_words("evm_callback"), ["evm", "callback"]);
        assert_eq!(identifier_words("totalSupply"), ["total", "supply"]);
        assert_eq!(identifier_words("HTTPServer"), ["http", "server"]);
        assert_eq!(identifier_words("cap"), ["cap"]);
    }

    #[test]
    fn convention_matching_is_word_based() {
        let c = Conventions::default();
        assert!(matches_convention("total", &c.supply));
        assert!(matches_convention("total_supply", &c.supply));
        assert!(!matches_convention("subtotals", &c.supply));
        assert!(matches_convention("my_chain_id", &c.domain));
        assert!(!matches_convention("chain", &c.domain));
        assert!(!matches_convention("capture", &c.capability));
    }

    #[test]
    fn empty_object_gives_defaults() {
        let c = Config::from_json("{}").unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.fail_on, Severity::High);
    }

    #[test]
    fn default_roundtrips_through_json() {
        let c = Config::default();
        assert_eq!(Config::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unknown_rule_is_rejected() {
        let err = Config::from_json(r#"{"disabled_rules": ["MWC-999"]}"#).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownRule { .. }));
        assert!(Config::from_json(r#"{"enabled_rules": ["bogus"]}"#).is_err());
    }

    #[test]
    fn empty_convention_is_rejected() {
        let err = Config::from_json(r#"{"conventions": {"supply": []}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::EmptyConvention("supply")));
    }

    #[test]
    fn partial_conventions_keep_other_defaults() {
        let c = Config::from_json(r#"{"conventions": {"supply": ["minted"]}}"#).unwrap();
        assert_eq!(c.conventions.supply, ["minted"]);
        assert_eq!(c.conventions.nonce, ["nonce"]);
    }

    #[test]
    fn bad_regex_is_rejected() {
        let err = Config::from_json(r#"{"call_patterns": {"mutators": ["("]}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::BadPattern { .. }));
    }

    #[test]
    fn enable_and_disable() {
        let c = Config::default().without_rule(mwc("MWC-101"));
        assert!(!c.is_enabled(mwc("MWC-101")));
        assert!(c.is_enabled(mwc("MWC-102")));
        let only = Config { enabled_rules: Some(vec![mwc("MWC-117")]), ..Config::default() };
        assert!(only.is_enabled(mwc("MWC-117")));
        assert!(!only.is_enabled(mwc("MWC-101")));
    }
}
