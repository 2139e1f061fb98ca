//! Detection of specious rules among a ranked top-K list.
//!
//! Each rule `Q -> C = c` is compared against every better rule, best first.
//! A better rule `X -> C = a` sharing the consequent attribute (possibly after
//! reversing a single-attribute side) can explain it away in four ways:
//! equivalent antecedents, a superfluous generalisation, a Yule-Simpson
//! reversal within both strata of `X`, or an insignificant partial dependency.

use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitVec;
use crate::dataset::{Attr, AttributeSet, Dataset, Polarity};
use crate::measures::{
    conditional_leverages, delta1_sign, delta2_sign, leverage_numerator, signed_conditional_mi, ConditionalStats,
    LogFactorials, PairCounts,
};
use crate::miner::{Rule, TopKList};

/// Cap on survivor-set refinement passes for the pathological case.
const MAX_FIXPOINT_PASSES: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("rules at ranks {0} and {1} are out of order")]
    Unordered(usize, usize),
    #[error("theta must be finite, got {0}")]
    BadTheta(f64),
    #[error("alpha must lie in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("rule at rank {rank} does not match the dataset: {detail}")]
    Mismatch { rank: usize, detail: String },
    #[error("p_x must lie strictly between 0 and 1, got {0}")]
    BadPrevalence(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    /// Largest signed conditional MI (count-scaled, nats) still deemed negligible.
    pub theta: f64,
    /// Significance level used only for the report's sanity check.
    pub alpha: f64,
    pub parallel: bool,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            theta: 0.5,
            alpha: 0.05,
            parallel: true,
        }
    }
}

impl DetectConfig {
    pub fn validate(&self) -> Result<(), DetectError> {
        if !self.theta.is_finite() {
            return Err(DetectError::BadTheta(self.theta));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(DetectError::BadAlpha(self.alpha));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    NonSpecious,
    Type0Equivalent,
    Type1SuperfluousGeneralization,
    Type2YuleSimpson,
    Type3InsignificantPartial,
}

impl VerdictKind {
    pub const ALL: [VerdictKind; 5] = [
        VerdictKind::NonSpecious,
        VerdictKind::Type0Equivalent,
        VerdictKind::Type1SuperfluousGeneralization,
        VerdictKind::Type2YuleSimpson,
        VerdictKind::Type3InsignificantPartial,
    ];

    pub fn label(self) -> &'static str {
        match self {
            VerdictKind::NonSpecious => "non-specious",
            VerdictKind::Type0Equivalent => "type0",
            VerdictKind::Type1SuperfluousGeneralization => "type1",
            VerdictKind::Type2YuleSimpson => "type2",
            VerdictKind::Type3InsignificantPartial => "type3",
        }
    }

    pub fn from_label(s: &str) -> Option<VerdictKind> {
        VerdictKind::ALL.into_iter().find(|k| k.label() == s)
    }

    pub fn is_specious(self) -> bool {
        self != VerdictKind::NonSpecious
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquivalenceForm {
    /// `cov(X) = cov(Q)`.
    Direct,
    /// `cov(X) = cov(not Q)`.
    Complement,
}

impl EquivalenceForm {
    pub fn label(self) -> &'static str {
        match self {
            EquivalenceForm::Direct => "direct",
            EquivalenceForm::Complement => "complement",
        }
    }
}

/// A rule written as `antecedent -> consequent = polarity`, possibly the
/// reversal of a mined rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Oriented {
    pub antecedent: AttributeSet,
    pub consequent: Attr,
    pub polarity: Polarity,
}

impl Oriented {
    fn of(r: &Rule) -> Oriented {
        Oriented {
            antecedent: r.antecedent.clone(),
            consequent: r.consequent,
            polarity: r.polarity,
        }
    }

    /// `{A} -> B = b` read as `{B} -> A = b`; the sign of the dependency is
    /// kept. `None` unless the antecedent is a single attribute.
    fn reversed(&self) -> Option<Oriented> {
        let a = self.antecedent.as_single()?;
        Some(Oriented {
            antecedent: AttributeSet::singleton(self.consequent),
            consequent: a,
            polarity: self.polarity,
        })
    }
}

/// The judged rule `Q' -> C' = c` and the mediator `X' -> C' = a` oriented
/// toward a shared consequent attribute.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedPair {
    pub judged: Oriented,
    pub mediator: Oriented,
    pub judged_reversed: bool,
    pub mediator_reversed: bool,
}

/// Orients `judged` (`Q -> C`) and `mediator` (`X -> A`) to share a
/// consequent attribute, reversing single-attribute sides as needed.
pub fn align_pair(judged: &Rule, mediator: &Rule) -> Option<AlignedPair> {
    let ri = Oriented::of(judged);
    let rj = Oriented::of(mediator);
    let c = ri.consequent;
    let a = rj.consequent;
    let (ji, mj, rev_i, rev_j) = if c == a {
        (ri, rj, false, false)
    } else if rj.antecedent.as_single() == Some(c) {
        let rj = rj.reversed()?;
        (ri, rj, false, true)
    } else if ri.antecedent.as_single() == Some(a) {
        let ri = ri.reversed()?;
        (ri, rj, true, false)
    } else if ri.antecedent.as_single().is_some() && ri.antecedent == rj.antecedent {
        let (ri, rj) = (ri.reversed()?, rj.reversed()?);
        (ri, rj, true, true)
    } else {
        return None;
    };
    if ji.antecedent == mj.antecedent || ji.antecedent.contains(ji.consequent) || mj.antecedent.contains(mj.consequent)
    {
        return None;
    }
    Some(AlignedPair {
        judged: ji,
        mediator: mj,
        judged_reversed: rev_i,
        mediator_reversed: rev_j,
    })
}

/// `false` (skip) when the consequent polarities differ while `X'` and `Q'`
/// are positively dependent.
pub fn orientation_filter(pair: &AlignedPair, pc: &PairCounts) -> bool {
    pair.judged.polarity == pair.mediator.polarity || leverage_numerator(pc.n, pc.n_x, pc.n_q, pc.n_xq) <= 0
}

pub fn check_equivalence(pc: &PairCounts) -> Option<EquivalenceForm> {
    if pc.n_x == pc.n_q && pc.n_q == pc.n_xq {
        Some(EquivalenceForm::Direct)
    } else if pc.n_xq == 0 && pc.n_x + pc.n_q == pc.n {
        Some(EquivalenceForm::Complement)
    } else {
        None
    }
}

/// Necessary condition for a Yule-Simpson reversal through `X`:
/// `delta(Q,C) <= delta(X,Q) delta(X,C) / (p_x (1 - p_x))`.
pub fn ys_bound_check(delta_qc: f64, delta_xq: f64, delta_xc: f64, p_x: f64) -> Result<bool, DetectError> {
    if !(p_x > 0.0 && p_x < 1.0) {
        return Err(DetectError::BadPrevalence(p_x));
    }
    Ok(delta_qc <= delta_xq * delta_xc / (p_x * (1.0 - p_x)))
}

/// Whether `X'` covers exactly the rows with `C' = a`. Every rule toward
/// either value of `C'` then has zero conditional leverage in both strata,
/// whichever of the two values the judged rule predicts.
pub fn mediator_is_consequent(pair: &AlignedPair, pc: &PairCounts) -> bool {
    if pair.judged.polarity == pair.mediator.polarity {
        pc.n_x == pc.n_xc && pc.n_xc == pc.n_c
    } else {
        pc.n_xc == 0 && pc.n_x + pc.n_c == pc.n
    }
}

/// The outcome of judging one rule against one better rule.
#[derive(Clone, Debug, PartialEq)]
pub enum PairOutcome {
    /// The pair decides the verdict.
    Specious {
        kind: VerdictKind,
        equivalence: Option<EquivalenceForm>,
    },
    /// Mediator `X'` coincides with its consequent value; the judged rule is
    /// pruned only if a surviving rule already links `X'` and `Q'`.
    Pathological,
    Pass,
}

/// Classifies an aligned, kept pair in case order: equivalence,
/// superfluous generalisation, Yule-Simpson, insignificant partial.
pub fn classify_pair(pair: &AlignedPair, pc: &PairCounts, theta: f64) -> PairOutcome {
    if let Some(form) = check_equivalence(pc) {
        return PairOutcome::Specious {
            kind: VerdictKind::Type0Equivalent,
            equivalence: Some(form),
        };
    }
    let mi_s = signed_conditional_mi(pc);
    if pair.judged.antecedent.is_proper_subset(&pair.mediator.antecedent)
        && pair.judged.polarity == pair.mediator.polarity
        && mi_s <= theta
    {
        return PairOutcome::Specious {
            kind: VerdictKind::Type1SuperfluousGeneralization,
            equivalence: None,
        };
    }
    if delta1_sign(pc) != Ordering::Greater && delta2_sign(pc) != Ordering::Greater {
        if mediator_is_consequent(pair, pc) {
            return PairOutcome::Pathological;
        }
        return PairOutcome::Specious {
            kind: VerdictKind::Type2YuleSimpson,
            equivalence: None,
        };
    }
    if mi_s < theta {
        return PairOutcome::Specious {
            kind: VerdictKind::Type3InsignificantPartial,
            equivalence: None,
        };
    }
    PairOutcome::Pass
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// 0-based rank of the better rule that made this one specious.
    pub mediator: Option<usize>,
    pub evidence: Option<ConditionalStats>,
    pub equivalence_form: Option<EquivalenceForm>,
    pub pair: Option<AlignedPair>,
}

impl Verdict {
    pub fn non_specious() -> Verdict {
        Verdict {
            kind: VerdictKind::NonSpecious,
            mediator: None,
            evidence: None,
            equivalence_form: None,
            pair: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Judgement {
    pub rule: Rule,
    pub verdict: Verdict,
}

/// Judged list plus bookkeeping from the survivor refinement.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub judgements: Vec<Judgement>,
    /// Number of survivor-set passes run; 1 when no pathological case arose.
    pub passes: usize,
}

impl Detection {
    pub fn count(&self, kind: VerdictKind) -> usize {
        self.judgements.iter().filter(|j| j.verdict.kind == kind).count()
    }

    /// Type-3 verdicts whose Birch p-value falls below `alpha`.
    pub fn significant_type3(&self, alpha: f64) -> Vec<usize> {
        self.judgements
            .iter()
            .enumerate()
            .filter(|(_, j)| {
                j.verdict.kind == VerdictKind::Type3InsignificantPartial
                    && j.verdict.evidence.and_then(|e| e.p_b).is_some_and(|p| p < alpha)
            })
            .map(|(i, _)| i)
            .collect()
    }
}

/// Identifies a dependency between two attribute sets regardless of
/// direction: used to ask whether a surviving rule links `X'` and `Q'`.
type Link = (AttributeSet, AttributeSet);

fn links_of(r: &Rule) -> Vec<Link> {
    let c = AttributeSet::singleton(r.consequent);
    let mut out = vec![(r.antecedent.clone(), c.clone())];
    if r.antecedent.len() == 1 {
        out.push((c, r.antecedent.clone()));
    }
    out
}

struct Context<'a> {
    d: &'a Dataset,
    rules: &'a [Rule],
    covers: Vec<BitVec>,
    lf: LogFactorials,
    theta: f64,
}

impl Context<'_> {
    fn cover_of(&self, s: &AttributeSet, rank: usize, own: &AttributeSet) -> BitVec {
        if s == own {
            self.covers[rank].clone()
        } else {
            self.d.cover(s)
        }
    }

    fn pair_counts(&self, pair: &AlignedPair, i: usize, j: usize) -> PairCounts {
        let cq = self.cover_of(&pair.judged.antecedent, i, &self.rules[i].antecedent);
        let cx = self.cover_of(&pair.mediator.antecedent, j, &self.rules[j].antecedent);
        let n = self.d.n() as u64;
        let c = pair.judged.consequent;
        let pol = pair.judged.polarity;
        let cxq = cx.and(&cq);
        let n_x = cx.count_ones();
        let n_q = cq.count_ones();
        let n_xq = cxq.count_ones();
        PairCounts {
            n,
            n_x,
            n_q,
            n_c: pol.count(self.d.attr_support(c), n),
            n_xq,
            n_xc: self.d.count_with(&cx, n_x, c, pol),
            n_qc: self.d.count_with(&cq, n_q, c, pol),
            n_xqc: self.d.count_with(&cxq, n_xq, c, pol),
            polarity_q: pol,
            polarity_x: pair.mediator.polarity,
        }
    }

    fn evidence(&self, pc: &PairCounts, kind: VerdictKind) -> ConditionalStats {
        let (delta1, delta2) = conditional_leverages(pc);
        let p_b = if kind == VerdictKind::Type1SuperfluousGeneralization {
            self.lf
                .birch_p_nested_sub(pc.n, pc.n_c, pc.n_x, pc.n_xc, pc.n_q - pc.n_xq, pc.n_qc - pc.n_xqc)
        } else {
            self.lf.birch_p(pc)
        };
        ConditionalStats {
            delta1,
            delta2,
            mi_s: signed_conditional_mi(pc),
            p_b: Some(p_b.expect("counts come from the dataset")),
        }
    }

    /// Verdict for rule `i`, plus whether a pathological pair was met.
    fn judge(&self, i: usize, survivors: &HashSet<Link>) -> (Verdict, bool) {
        let mut met = false;
        for j in 0..i {
            let Some(pair) = align_pair(&self.rules[i], &self.rules[j]) else {
                continue;
            };
            let pc = self.pair_counts(&pair, i, j);
            if !orientation_filter(&pair, &pc) {
                continue;
            }
            let (kind, equivalence) = match classify_pair(&pair, &pc, self.theta) {
                PairOutcome::Pass => continue,
                PairOutcome::Pathological => {
                    met = true;
                    let x = pair.mediator.antecedent.clone();
                    let q = pair.judged.antecedent.clone();
                    if !survivors.contains(&(x.clone(), q.clone())) && !survivors.contains(&(q, x)) {
                        continue;
                    }
                    (VerdictKind::Type2YuleSimpson, None)
                }
                PairOutcome::Specious { kind, equivalence } => (kind, equivalence),
            };
            let verdict = Verdict {
                kind,
                mediator: Some(j),
                evidence: Some(self.evidence(&pc, kind)),
                equivalence_form: equivalence,
                pair: Some(pair),
            };
            return (verdict, met);
        }
        (Verdict::non_specious(), met)
    }

    fn pass(&self, survivors: &HashSet<Link>, parallel: bool) -> Vec<(Verdict, bool)> {
        if parallel {
            (0..self.rules.len())
                .into_par_iter()
                .map(|i| self.judge(i, survivors))
                .collect()
        } else {
            (0..self.rules.len()).map(|i| self.judge(i, survivors)).collect()
        }
    }

    fn survivors(&self, verdicts: &[(Verdict, bool)]) -> HashSet<Link> {
        verdicts
            .iter()
            .zip(self.rules)
            .filter(|((v, _), _)| v.kind == VerdictKind::NonSpecious)
            .flat_map(|(_, r)| links_of(r))
            .collect()
    }
}

/// Checks that `rules` is strictly ordered by rank.
pub fn check_order(rules: &[Rule]) -> Result<(), DetectError> {
    for (i, w) in rules.windows(2).enumerate() {
        if w[0].rank_cmp(&w[1]) != Ordering::Less {
            return Err(DetectError::Unordered(i, i + 1));
        }
    }
    Ok(())
}

/// Judges every rule of a ranked list against all better rules.
///
/// The pathological Yule-Simpson case depends on which rules survive, so the
/// list is judged repeatedly: first as if no such rule survived, then against
/// the survivors of the previous pass until the verdicts stop changing. A
/// two-pass oscillation resolves to the pass with more survivors.
pub fn spec_detect(rules: &TopKList, d: &Dataset, cfg: &DetectConfig) -> Result<Detection, DetectError> {
    detect_rules(&rules.rules, d, cfg)
}

pub fn detect_rules(rules: &[Rule], d: &Dataset, cfg: &DetectConfig) -> Result<Detection, DetectError> {
    cfg.validate()?;
    check_order(rules)?;
    let ctx = Context {
        d,
        rules,
        covers: rules.iter().map(|r| d.cover(&r.antecedent)).collect(),
        lf: LogFactorials::new(d.n() as u64),
        theta: cfg.theta,
    };
    let mut survivors = HashSet::new();
    let mut current = ctx.pass(&survivors, cfg.parallel);
    let mut previous: Option<Vec<(Verdict, bool)>> = None;
    let mut passes = 1;
    while current.iter().any(|(_, met)| *met) && passes < MAX_FIXPOINT_PASSES {
        survivors = ctx.survivors(&current);
        let next = ctx.pass(&survivors, cfg.parallel);
        passes += 1;
        if same_kinds(&next, &current) {
            break;
        }
        if previous.as_ref().is_some_and(|p| same_kinds(p, &next)) {
            // two-cycle: keep whichever pass pruned less
            let alive = |v: &[(Verdict, bool)]| v.iter().filter(|(v, _)| !v.kind.is_specious()).count();
            if alive(&next) > alive(&current) {
                current = next;
            }
            break;
        }
        previous = Some(std::mem::replace(&mut current, next));
    }
    let judgements = rules
        .iter()
        .zip(current)
        .map(|(r, (verdict, _))| Judgement {
            rule: r.clone(),
            verdict,
        })
        .collect::<Vec<_>>();
    debug_assert!(judgements
        .iter()
        .enumerate()
        .all(|(i, j)| j.verdict.mediator.is_none_or(|m| m < i)));
    Ok(Detection { judgements, passes })
}

fn same_kinds(a: &[(Verdict, bool)], b: &[(Verdict, bool)]) -> bool {
    a.iter().zip(b).all(|((x, _), (y, _))| x == y)
}
