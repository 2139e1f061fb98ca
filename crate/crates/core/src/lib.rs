//! Top-K statistical dependency rule mining with detection of specious
//! rules: dependencies that vanish or reverse once conditioned on a better
//! rule's antecedent.
//!
//! The pipeline is [`dataset`] → [`miner`] → [`specdetect`], with
//! [`synthgen`] providing planted fixtures and brute-force oracles and
//! [`report`] handling the rule/verdict files and run summaries.

pub mod bitset;
pub mod dataset;
pub mod measures;
pub mod miner;
pub mod report;
pub mod specdetect;
pub mod synthgen;

pub use dataset::{Attr, AttributeSet, Dataset, DatasetError, Polarity};
pub use measures::{ConditionalStats, MeasureKind, PairCounts};
pub use miner::{mine_top_k, MinerConfig, PolarityMode, Rule, TopKList};
pub use specdetect::{spec_detect, DetectConfig, Verdict, VerdictKind};
