//! The machine-readable weakness catalog.
//!
//! The catalog is compiled in from `data/registry.json`: one record per
//! category, the frame table that partitions them, and the SWC comparison
//! rows. [`Registry::builtin`] validates it once and hands out a shared,
//! immutable instance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::id::{MalformedId, MwcId};

const REGISTRY_JSON: &str = include_str!("../data/registry.json");

pub const FIRST_NUMBER: u16 = 100;
pub const LAST_NUMBER: u16 = 136;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FrameCode {
    #[serde(rename = "BMI")]
    Bmi,
    #[serde(rename = "IMI")]
    Imi,
    #[serde(rename = "SRS")]
    Srs,
    #[serde(rename = "MTS")]
    Mts,
    #[serde(rename = "GSM")]
    Gsm,
    #[serde(rename = "FLA")]
    Fla,
    #[serde(rename = "SUPP-FORMAL")]
    SuppFormal,
    #[serde(rename = "SUPP-TOOLING")]
    SuppTooling,
    #[serde(rename = "SUPP-HYBRID")]
    SuppHybrid,
    #[serde(rename = "SUPP-CRYPTO")]
    SuppCrypto,
    #[serde(rename = "SUPP-SIDEFX")]
    SuppSidefx,
    #[serde(rename = "SUPP-BRIDGE")]
    SuppBridge,
}

impl FrameCode {
    pub const ALL: [FrameCode; 12] = [
        FrameCode::Bmi,
        FrameCode::Imi,
        FrameCode::Srs,
        FrameCode::Mts,
        FrameCode::Gsm,
        FrameCode::Fla,
        FrameCode::SuppFormal,
        FrameCode::SuppTooling,
        FrameCode::SuppHybrid,
        FrameCode::SuppCrypto,
        FrameCode::SuppSidefx,
        FrameCode::SuppBridge,
    ];

    pub const PRIMARY: [FrameCode; 6] = [
        FrameCode::Bmi,
        FrameCode::Imi,
        FrameCode::Srs,
        FrameCode::Mts,
        FrameCode::Gsm,
        FrameCode::Fla,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FrameCode::Bmi => "BMI",
            FrameCode::Imi => "IMI",
            FrameCode::Srs => "SRS",
            FrameCode::Mts => "MTS",
            FrameCode::Gsm => "GSM",
            FrameCode::Fla => "FLA",
            FrameCode::SuppFormal => "SUPP-FORMAL",
            FrameCode::SuppTooling => "SUPP-TOOLING",
            FrameCode::SuppHybrid => "SUPP-HYBRID",
            FrameCode::SuppCrypto => "SUPP-CRYPTO",
            FrameCode::SuppSidefx => "SUPP-SIDEFX",
            FrameCode::SuppBridge => "SUPP-BRIDGE",
        }
    }

    pub fn is_primary(self) -> bool {
        Self::PRIMARY.contains(&self)
    }
}

impl fmt::Display for FrameCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrameCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FrameCode::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown frame code `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Syntactic,
    Flow,
    Advisory,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Syntactic => "syntactic",
            Strategy::Flow => "flow",
            Strategy::Advisory => "advisory",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "syntactic" => Ok(Strategy::Syntactic),
            "flow" => Ok(Strategy::Flow),
            "advisory" => Ok(Strategy::Advisory),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Low,
    Medium,
    High,
    Critical,
}

impl Severity {
    pub const ALL: [Severity; 4] = [Severity::Low, Severity::Medium, Severity::High, Severity::Critical];

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Low => "low",
            Severity::Medium => "medium",
            Severity::High => "high",
            Severity::Critical => "critical",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Severity::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown severity `{s}` (expected low, medium, high or critical)"))
    }
}

/// One catalog entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryRecord {
    pub id: MwcId,
    /// Wording from the flat taxonomy listing.
    pub title_taxonomy: String,
    /// Wording from the frame listing; absent where a number only exists in one listing.
    pub title_frame: Option<String>,
    /// Title of the worked example; detector semantics follow this one.
    pub box_title: String,
    pub frame: FrameCode,
    pub analysis_hint: String,
    pub strategy: Strategy,
    pub severity_default: Severity,
    pub fix_hint: String,
    #[serde(default)]
    pub aliases: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub code: FrameCode,
    pub name: String,
    pub member_ids: Vec<MwcId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwcCrosswalkEntry {
    pub aspect: String,
    pub swc_side: String,
    pub mwc_side: String,
    pub direct_id_pairs: Option<Vec<(String, MwcId)>>,
}

impl SwcCrosswalkEntry {
    /// Catalog numbers named in `mwc_side`, with ranges such as
    /// `MWC-106 to MWC-109` or `MWC-103–105` expanded.
    pub fn mentioned_numbers(&self) -> BTreeSet<u16> {
        static MENTION: OnceLock<Regex> = OnceLock::new();
        let re = MENTION.get_or_init(|| {
            Regex::new(r"MWC-(\d{3})[ab]?(?:\s*(?:–|-|to)\s*(?:MWC-)?(\d{3}))?").expect("valid regex")
        });
        let mut out = BTreeSet::new();
        for cap in re.captures_iter(&self.mwc_side) {
            let lo: u16 = cap[1].parse().unwrap_or(0);
            let hi: u16 = cap.get(2).and_then(|m| m.as_str().parse().ok()).unwrap_or(lo);
            out.extend(lo.min(hi)..=hi.max(lo));
        }
        out
    }

    pub fn pairs(&self) -> &[(String, MwcId)] {
        self.direct_id_pairs.as_deref().unwrap_or(&[])
    }
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("registry data is not valid JSON: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("duplicate category id {0}")]
    DuplicateId(MwcId),
    #[error("{id}: unknown frame `{frame}`")]
    UnknownFrame { id: String, frame: String },
    #[error("{id}: {message}")]
    BadField { id: String, message: String },
    #[error("{0}: record has no example title and is not advisory")]
    MissingBoxTitle(MwcId),
    #[error("{id}: listed in frame {listed} but record says {declared}")]
    FrameMismatch { id: MwcId, listed: FrameCode, declared: FrameCode },
    #[error("{id}: member of frame {frame} has no category record")]
    UnknownMember { id: MwcId, frame: FrameCode },
    #[error("{0}: record is not a member of any frame")]
    Unframed(MwcId),
    #[error("{0}: appears in more than one frame")]
    MultiFramed(MwcId),
    #[error("frame {0} is listed twice")]
    DuplicateFrame(FrameCode),
    #[error("MWC-{0:03} is missing: numbers must cover {FIRST_NUMBER}..={LAST_NUMBER} without gaps")]
    Gap(u16),
    #[error("{0}: number outside {FIRST_NUMBER}..={LAST_NUMBER}")]
    OutOfRange(MwcId),
    #[error("crosswalk row `{0}`: direct pair names an unknown category")]
    UnknownCrosswalkId(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LookupError {
    #[error(transparent)]
    Malformed(#[from] MalformedId),
    #[error("{id} is not in the catalog; nearest valid ids: {}", nearest.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))]
    NotFound { id: String, nearest: Vec<MwcId> },
}

/// Result of [`Registry::lookup`]: the record plus a note when the query was ambiguous.
#[derive(Clone, Debug)]
pub struct Lookup<'a> {
    pub record: &'a CategoryRecord,
    pub note: Option<String>,
}

// Raw shapes so that an unknown frame code can be reported against its record id.
#[derive(Deserialize)]
struct RawRegistry {
    categories: Vec<RawCategory>,
    frames: Vec<RawFrame>,
    crosswalk: Vec<SwcCrosswalkEntry>,
}

#[derive(Deserialize)]
struct RawCategory {
    id: String,
    title_taxonomy: String,
    title_frame: Option<String>,
    box_title: String,
    frame: String,
    analysis_hint: String,
    strategy: String,
    severity_default: String,
    fix_hint: String,
    #[serde(default)]
    aliases: Vec<String>,
}

#[derive(Deserialize)]
struct RawFrame {
    code: String,
    name: String,
    member_ids: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Registry {
    categories: Vec<CategoryRecord>,
    frames: Vec<Frame>,
    crosswalk: Vec<SwcCrosswalkEntry>,
    index: BTreeMap<MwcId, usize>,
}

/// Loads and validates the compiled-in catalog.
pub fn load_registry() -> Result<Registry, RegistryError> {
    Registry::from_json(REGISTRY_JSON)
}

impl Registry {
    /// Shared instance of the compiled-in catalog.
    ///
    /// Panics if the checked-in data file fails validation, which the test
    /// suite guards against.
    pub fn builtin() -> &'static Registry {
        static BUILTIN: OnceLock<Registry> = OnceLock::new();
        BUILTIN.get_or_init(|| load_registry().unwrap_or_else(|e| panic!("built-in registry is corrupt: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Registry, RegistryError> {
        let raw: RawRegistry = serde_json::from_str(text)?;

        let mut categories = Vec::with_capacity(raw.categories.len());
        for rc in raw.categories {
            let bad = |message: String| RegistryError::BadField { id: rc.id.clone(), message };
            let id: MwcId = rc.id.parse().map_err(|e: MalformedId| bad(e.to_string()))?;
            let frame = rc
                .frame
                .parse::<FrameCode>()
                .map_err(|_| RegistryError::UnknownFrame { id: rc.id.clone(), frame: rc.frame.clone() })?;
            let strategy = rc.strategy.parse::<Strategy>().map_err(bad)?;
            let severity_default = rc.severity_default.parse::<Severity>().map_err(bad)?;
            categories.push(CategoryRecord {
                id,
                title_taxonomy: rc.title_taxonomy,
                title_frame: rc.title_frame,
                box_title: rc.box_title,
                frame,
                analysis_hint: rc.analysis_hint,
                strategy,
                severity_default,
                fix_hint: rc.fix_hint,
                aliases: rc.aliases,
            });
        }
        categories.sort_by_key(|c| c.id);

        let mut index = BTreeMap::new();
        for (i, c) in categories.iter().enumerate() {
            if index.insert(c.id, i).is_some() {
                return Err(RegistryError::DuplicateId(c.id));
            }
            if !(FIRST_NUMBER..=LAST_NUMBER).contains(&c.id.number()) {
                return Err(RegistryError::OutOfRange(c.id));
            }
            if c.box_title.trim().is_empty() && c.strategy != Strategy::Advisory {
                return Err(RegistryError::MissingBoxTitle(c.id));
            }
        }
        let numbers: BTreeSet<u16> = categories.iter().map(|c| c.id.number()).collect();
        if let Some(missing) = (FIRST_NUMBER..=LAST_NUMBER).find(|n| !numbers.contains(n)) {
            return Err(RegistryError::Gap(missing));
        }

        let mut frames = Vec::with_capacity(raw.frames.len());
        let mut seen_frames = BTreeSet::new();
        let mut owner: BTreeMap<MwcId, FrameCode> = BTreeMap::new();
        for rf in raw.frames {
            let code = rf
                .code
                .parse::<FrameCode>()
                .map_err(|_| RegistryError::UnknownFrame { id: format!("frame {}", rf.code), frame: rf.code.clone() })?;
            if !seen_frames.insert(code) {
                return Err(RegistryError::DuplicateFrame(code));
            }
            let mut member_ids = Vec::with_capacity(rf.member_ids.len());
            for m in &rf.member_ids {
                let id: MwcId = m
                    .parse()
                    .map_err(|e: MalformedId| RegistryError::BadField { id: m.clone(), message: e.to_string() })?;
                let Some(&i) = index.get(&id) else {
                    return Err(RegistryError::UnknownMember { id, frame: code });
                };
                if categories[i].frame != code {
                    return Err(RegistryError::FrameMismatch { id, listed: code, declared: categories[i].frame });
                }
                if owner.insert(id, code).is_some() {
                    return Err(RegistryError::MultiFramed(id));
                }
                member_ids.push(id);
            }
            frames.push(Frame { code, name: rf.name, member_ids });
        }
        if let Some(c) = categories.iter().find(|c| !owner.contains_key(&c.id)) {
            return Err(RegistryError::Unframed(c.id));
        }
        frames.sort_by_key(|f| f.code);

        for row in &raw.crosswalk {
            if row.pairs().iter().any(|(_, id)| !index.contains_key(id)) {
                return Err(RegistryError::UnknownCrosswalkId(row.aspect.clone()));
            }
        }

        Ok(Registry { categories, frames, crosswalk: raw.crosswalk, index })
    }

    /// All records, ordered by id.
    pub fn categories(&self) -> &[CategoryRecord] {
        &self.categories
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, code: FrameCode) -> Option<&Frame> {
        self.frames.iter().find(|f| f.code == code)
    }

    pub fn get(&self, id: MwcId) -> Option<&CategoryRecord> {
        self.index.get(&id).map(|&i| &self.categories[i])
    }

    pub fn contains(&self, id: MwcId) -> bool {
        self.index.contains_key(&id)
    }

    /// Resolves an identifier string. A bare `MWC-120` resolves to `MWC-120a`
    /// with a note, since two worked examples share that number.
    pub fn lookup(&self, id: &str) -> Result<Lookup<'_>, LookupError> {
        let parsed: MwcId = id.parse()?;
        self.resolve(parsed).ok_or_else(|| LookupError::NotFound { id: id.to_string(), nearest: self.nearest(parsed) })
    }

    /// Like [`lookup`](Self::lookup) for an already-parsed id.
    pub fn resolve(&self, id: MwcId) -> Option<Lookup<'_>> {
        if let Some(record) = self.get(id) {
            return Some(Lookup { record, note: None });
        }
        if id.suffix().is_none() {
            let variants: Vec<&CategoryRecord> =
                self.categories.iter().filter(|c| c.id.number() == id.number()).collect();
            if let Some(first) = variants.first() {
                let names: Vec<String> = variants.iter().map(|c| format!("{} ({})", c.id, c.box_title)).collect();
                return Some(Lookup {
                    record: first,
                    note: Some(format!("{id} is ambiguous; resolved to {}. Candidates: {}", first.id, names.join(", "))),
                });
            }
        }
        None
    }

    fn nearest(&self, id: MwcId) -> Vec<MwcId> {
        let mut ids: Vec<MwcId> = self.categories.iter().map(|c| c.id).collect();
        ids.sort_by_key(|c| (c.number().abs_diff(id.number()), *c));
        ids.truncate(3);
        ids
    }

    /// Comparison rows. With an id, only rows that mention it (directly or in
    /// a range) or pair it with an SWC identifier.
    pub fn swc_crosswalk(&self, mwc_id: Option<&str>) -> Result<Vec<&SwcCrosswalkEntry>, LookupError> {
        let Some(query) = mwc_id else {
            return Ok(self.crosswalk.iter().collect());
        };
        let record = self.lookup(query)?.record;
        let number = record.id.number();
        Ok(self
            .crosswalk
            .iter()
            .filter(|row| {
                row.mentioned_numbers().contains(&number) || row.pairs().iter().any(|(_, m)| m.number() == number)
            })
            .collect())
    }

    pub fn crosswalk(&self) -> &[SwcCrosswalkEntry] {
        &self.crosswalk
    }

    pub fn non_advisory_ids(&self) -> Vec<MwcId> {
        self.categories.iter().filter(|c| c.strategy != Strategy::Advisory).map(|c| c.id).collect()
    }
}
