//! Rule and verdict files (tab-separated) and the JSON run summary.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{AttributeSet, Dataset, DatasetError, Polarity};
use crate::miner::Rule;
use crate::specdetect::{Detection, VerdictKind};

pub const RULE_COLUMNS: [&str; 9] = [
    "rank",
    "antecedent",
    "consequent",
    "polarity",
    "n_q",
    "n_c",
    "n_qc",
    "M",
    "leverage",
];

pub const VERDICT_COLUMNS: [&str; 7] = [
    "verdict",
    "mediator_rank",
    "delta1",
    "delta2",
    "mi_s",
    "p_b",
    "equivalence_form",
];

const ANTECEDENT_SEP: &str = "&";
const MISSING: &str = "-";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error("line {line}: {detail}")]
    Mismatch { line: usize, detail: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// `%.6g`-style formatting: six significant digits, trailing zeros trimmed.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}"))
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn antecedent_names(d: &Dataset, s: &AttributeSet) -> String {
    s.members()
        .iter()
        .map(|&a| d.name(a))
        .collect::<Vec<_>>()
        .join(ANTECEDENT_SEP)
}

fn rule_fields(d: &Dataset, rank: usize, r: &Rule) -> Vec<String> {
    vec![
        (rank + 1).to_string(),
        antecedent_names(d, &r.antecedent),
        d.name(r.consequent).to_string(),
        r.polarity.as_u8().to_string(),
        r.n_q.to_string(),
        r.n_c.to_string(),
        r.n_qc.to_string(),
        format_sig6(r.goodness),
        format_sig6(r.leverage),
    ]
}

pub fn write_rules<W: Write>(mut w: W, d: &Dataset, rules: &[Rule]) -> io::Result<()> {
    writeln!(w, "{}", RULE_COLUMNS.join("\t"))?;
    for (i, r) in rules.iter().enumerate() {
        writeln!(w, "{}", rule_fields(d, i, r).join("\t"))?;
    }
    w.flush()
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| MISSING.to_string(), format_sig6)
}

pub fn write_report<W: Write>(mut w: W, d: &Dataset, det: &Detection) -> io::Result<()> {
    writeln!(w, "{}\t{}", RULE_COLUMNS.join("\t"), VERDICT_COLUMNS.join("\t"))?;
    for (i, j) in det.judgements.iter().enumerate() {
        let v = &j.verdict;
        let e = v.evidence;
        let mut fields = rule_fields(d, i, &j.rule);
        fields.extend([
            v.kind.label().to_string(),
            v.mediator.map_or_else(|| MISSING.to_string(), |m| (m + 1).to_string()),
            opt(e.map(|e| e.delta1)),
            opt(e.map(|e| e.delta2)),
            opt(e.map(|e| e.mi_s)),
            opt(e.and_then(|e| e.p_b)),
            v.equivalence_form.map_or(MISSING, |f| f.label()).to_string(),
        ]);
        writeln!(w, "{}", fields.join("\t"))?;
    }
    w.flush()
}

/// Reads a rule file and rebuilds each rule from `d`, failing when the stored
/// counts disagree with the data.
pub fn read_rules<R: BufRead>(r: R, d: &Dataset) -> Result<Vec<Rule>, ReportError> {
    let mut rules = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if idx == 0 {
            if fields.len() < RULE_COLUMNS.len() || fields[..RULE_COLUMNS.len()] != RULE_COLUMNS {
                return Err(ReportError::Parse {
                    line: 1,
                    detail: format!("expected header {}", RULE_COLUMNS.join(" ")),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        if fields.len() < RULE_COLUMNS.len() {
            return Err(ReportError::Parse {
                line: lineno,
                detail: format!("expected {} fields, found {}", RULE_COLUMNS.len(), fields.len()),
            });
        }
        let parse_u64 = |s: &str, what: &str| {
            s.parse::<u64>().map_err(|_| ReportError::Parse {
                line: lineno,
                detail: format!("bad {what} {s:?}"),
            })
        };
        let rank = parse_u64(fields[0], "rank")?;
        if rank != rules.len() as u64 + 1 {
            return Err(ReportError::Parse {
                line: lineno,
                detail: format!("rank {rank} out of sequence"),
            });
        }
        let names: Vec<&str> = fields[1].split(ANTECEDENT_SEP).collect();
        let antecedent = d.attr_set(&names)?;
        let consequent = d.attr(fields[2])?;
        let polarity = fields[3]
            .parse::<u8>()
            .ok()
            .and_then(Polarity::from_u8)
            .ok_or_else(|| ReportError::Parse {
                line: lineno,
                detail: format!("bad polarity {:?}", fields[3]),
            })?;
        let stored = (
            parse_u64(fields[4], "n_q")?,
            parse_u64(fields[5], "n_c")?,
            parse_u64(fields[6], "n_qc")?,
        );
        let counts = d.rule_counts(&antecedent, consequent, polarity)?;
        if counts != stored {
            return Err(ReportError::Mismatch {
                line: lineno,
                detail: format!("file has (n_q, n_c, n_qc) = {stored:?}, dataset gives {counts:?}"),
            });
        }
        let rule = Rule::from_counts(
            d.n() as u64,
            antecedent,
            consequent,
            polarity,
            counts.0,
            counts.1,
            counts.2,
        );
        if !rule.is_positive(d.n() as u64) {
            return Err(ReportError::Mismatch {
                line: lineno,
                detail: "rule has non-positive leverage on this dataset".into(),
            });
        }
        rules.push(rule);
    }
    Ok(rules)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n: usize,
    pub k: usize,
    /// Mean number of attributes present per row.
    pub mean_transaction_length: f64,
}

impl DatasetStats {
    pub fn of(d: &Dataset) -> DatasetStats {
        DatasetStats {
            n: d.n(),
            k: d.n_attrs(),
            mean_transaction_length: d.mean_transaction_length(),
        }
    }
}

/// Means of rule statistics over a group of rules; `None` for an empty group.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub mean_m: Option<f64>,
    /// Mean relative frequency `P(Q, C)`.
    pub mean_frequency: Option<f64>,
    /// Mean `P(C | Q)`.
    pub mean_confidence: Option<f64>,
    /// Mean `P(not C | not Q)` over rules with `n_q < n`.
    pub mean_negative_confidence: Option<f64>,
    pub mean_leverage: Option<f64>,
    pub mean_antecedent_len: Option<f64>,
}

fn mean<I: IntoIterator<Item = f64>>(it: I) -> Option<f64> {
    let (sum, count) = it.into_iter().fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

impl Aggregate {
    pub fn of<'a, I: IntoIterator<Item = &'a Rule> + Clone>(n: u64, rules: I) -> Aggregate {
        let nf = n as f64;
        let count = rules.clone().into_iter().count();
        let it = || rules.clone().into_iter();
        Aggregate {
            count,
            mean_m: mean(it().map(|r| r.goodness)),
            mean_frequency: mean(it().map(|r| r.n_qc as f64 / nf)),
            mean_confidence: mean(it().map(|r| r.n_qc as f64 / r.n_q as f64)),
            mean_negative_confidence: mean(
                it().filter(|r| r.n_q < n)
                    .map(|r| (n - r.n_q - r.n_c + r.n_qc) as f64 / (n - r.n_q) as f64),
            ),
            mean_leverage: mean(it().map(|r| r.leverage)),
            mean_antecedent_len: mean(it().map(|r| r.antecedent.len() as f64)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvidenceSummary {
    pub mean_p_b: Option<f64>,
    pub min_p_b: Option<f64>,
    pub mean_delta1: Option<f64>,
    pub mean_delta2: Option<f64>,
    pub mean_mi_s: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub load_seconds: f64,
    pub mine_seconds: f64,
    pub detect_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub dataset: DatasetStats,
    pub config: BTreeMap<String, serde_json::Value>,
    pub rules: usize,
    pub counts: BTreeMap<String, usize>,
    pub proportions: BTreeMap<String, f64>,
    /// Share of rules with any specious verdict, equivalences included.
    pub specious_proportion: f64,
    /// Specious rules other than equivalences.
    pub specious: Aggregate,
    pub non_specious: Aggregate,
    /// Conditional evidence over specious rules other than equivalences.
    pub evidence: EvidenceSummary,
    /// Ranks (1-based) of type-3 verdicts with `p_b < alpha`.
    pub significant_type3: Vec<usize>,
    pub passes: usize,
    pub timings: Timings,
}

impl RunSummary {
    pub fn build(
        d: &Dataset,
        det: &Detection,
        alpha: f64,
        config: BTreeMap<String, serde_json::Value>,
        timings: Timings,
    ) -> RunSummary {
        let n = d.n() as u64;
        let total = det.judgements.len();
        let counts: BTreeMap<String, usize> = VerdictKind::ALL
            .iter()
            .map(|&k| (k.label().to_string(), det.count(k)))
            .collect();
        let proportions = counts
            .iter()
            .map(|(k, &c)| {
                let p = if total == 0 { 0.0 } else { c as f64 / total as f64 };
                (k.clone(), p)
            })
            .collect();
        let specious_count = det.judgements.iter().filter(|j| j.verdict.kind.is_specious()).count();
        let nonequiv: Vec<_> = det
            .judgements
            .iter()
            .filter(|j| j.verdict.kind.is_specious() && j.verdict.kind != VerdictKind::Type0Equivalent)
            .collect();
        let clean: Vec<_> = det
            .judgements
            .iter()
            .filter(|j| !j.verdict.kind.is_specious())
            .map(|j| &j.rule)
            .collect();
        let ev: Vec<_> = nonequiv.iter().filter_map(|j| j.verdict.evidence).collect();
        let evidence = EvidenceSummary {
            mean_p_b: mean(ev.iter().filter_map(|e| e.p_b)),
            min_p_b: ev.iter().filter_map(|e| e.p_b).reduce(f64::min),
            mean_delta1: mean(ev.iter().map(|e| e.delta1)),
            mean_delta2: mean(ev.iter().map(|e| e.delta2)),
            mean_mi_s: mean(ev.iter().map(|e| e.mi_s)),
        };
        RunSummary {
            dataset: DatasetStats::of(d),
            config,
            rules: total,
            counts,
            proportions,
            specious_proportion: if total == 0 {
                0.0
            } else {
                specious_count as f64 / total as f64
            },
            specious: Aggregate::of(n, nonequiv.iter().map(|j| &j.rule)),
            non_specious: Aggregate::of(n, clean.iter().copied()),
            evidence,
            significant_type3: det.significant_type3(alpha).into_iter().map(|i| i + 1).collect(),
            passes: det.passes,
            timings,
        }
    }
}
