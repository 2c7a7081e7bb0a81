//! Two-chain binary actin automata.
//!
//! Rule codec and stepping ([`rule`], [`step`]), integral measures of
//! space-time configurations ([`metrics`]), seed scans for localizations
//! ([`localization`]), rule-space statistics ([`analysis`]), resumable
//! exhaustive sweeps ([`sweep`]) and PGM rendering ([`render`]).

pub mod analysis;
pub mod error;
pub mod localization;
pub mod metrics;
pub mod render;
pub mod rule;
pub mod state;
pub mod step;
pub mod sweep;

pub use error::{Error, Result};
pub use localization::{ClassifierParams, LocalizationKind, LocalizationVerdict, RuleLocalizationCounts, Seed};
pub use metrics::{MeasureSource, MetricsRecord, PatternFold};
pub use rule::Rule;
pub use state::{AutomatonState, Chain, ChainState, InitSpec, SpaceTimeRecord};
