//! Static analysis for the MoveEVM weakness catalog (MWC).
//!
//! The pipeline is: [`frontend`] parses source into an [`Ast`],
//! [`semantics`] resolves names and builds control-flow graphs, [`detectors`]
//! run the rule catalog, and [`report`] renders the results. The [`registry`]
//! holds the catalog itself and [`corpus`] evaluates detectors against
//! labeled fixtures.

pub mod id;
pub mod registry;
pub mod frontend;
pub mod config;
pub mod semantics;
pub mod detectors;
pub mod corpus;
pub mod report;

pub use config::{Config, Format};
pub use corpus::{evaluate_corpus, load_corpus, Fixture, Metrics};
pub use detectors::{run_all, run_rule, Confidence, Engine, Finding};
pub use frontend::{parse_source, ParsedFile, Span};
pub use id::MwcId;
pub use registry::{FrameCode, Registry, Severity, Strategy};
pub use report::{build_report, build_report_with, render, Report, Verdict};
pub use semantics::{resolve, SemanticModel};
