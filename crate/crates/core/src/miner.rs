//! Exact top-K mining of non-redundant dependency rules under mutual
//! information.
//!
//! The search walks the set-enumeration tree of antecedents (children extend
//! a node with attributes greater than its maximum). Every node carries the
//! consequent targets `(C, c)` that can still produce a useful rule below
//! it, together with the best goodness seen on the path from the root. A
//! target is dropped when its admissible bound falls below the running
//! threshold `tau` or cannot beat the best generalisation already seen, in
//! which case every specialisation would be redundant.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitVec;
use crate::dataset::{Attr, AttributeSet, Dataset, Polarity};
use crate::measures::{leverage_numerator, leverage_unchecked, mi_counts, mi_upper_bound};

#[derive(Debug, Error, PartialEq)]
pub enum MinerError {
    #[error("dataset is unusable for mining: {0}")]
    Degenerate(String),
    #[error("top-k must be at least 1")]
    InvalidK,
    #[error("max antecedent size must be at least 1")]
    InvalidCap,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarityMode {
    #[default]
    Both,
    Positive,
}

impl PolarityMode {
    pub fn polarities(self) -> &'static [Polarity] {
        match self {
            PolarityMode::Both => &Polarity::BOTH,
            PolarityMode::Positive => &[Polarity::One],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinerConfig {
    pub k: usize,
    pub max_antecedent: Option<usize>,
    /// `None` permits every attribute as a consequent.
    pub consequents: Option<Vec<Attr>>,
    pub polarity_mode: PolarityMode,
    /// Bound-based pruning; turning it off only costs time.
    pub prune: bool,
    /// Evaluate top-level branches concurrently on the current rayon pool.
    pub parallel: bool,
}

impl MinerConfig {
    pub fn top(k: usize) -> Self {
        MinerConfig {
            k,
            max_antecedent: None,
            consequents: None,
            polarity_mode: PolarityMode::Both,
            prune: true,
            parallel: true,
        }
    }

    pub fn validate(&self) -> Result<(), MinerError> {
        if self.k < 1 {
            return Err(MinerError::InvalidK);
        }
        if self.max_antecedent == Some(0) {
            return Err(MinerError::InvalidCap);
        }
        Ok(())
    }

    /// Non-degenerate attributes allowed as consequents.
    pub fn permitted_consequents(&self, d: &Dataset) -> Vec<bool> {
        let mut permitted = vec![self.consequents.is_none(); d.n_attrs()];
        if let Some(list) = &self.consequents {
            for a in list {
                if a.index() < permitted.len() {
                    permitted[a.index()] = true;
                }
            }
        }
        for a in d.attrs() {
            if d.is_degenerate(a) {
                permitted[a.index()] = false;
            }
        }
        permitted
    }
}

/// A dependency rule `antecedent -> consequent = polarity` with positive
/// leverage toward the stated polarity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub antecedent: AttributeSet,
    pub consequent: Attr,
    pub polarity: Polarity,
    pub n_q: u64,
    /// Rows with the consequent at `polarity`.
    pub n_c: u64,
    pub n_qc: u64,
    pub goodness: f64,
    pub leverage: f64,
}

impl Rule {
    pub fn from_counts(
        n: u64,
        antecedent: AttributeSet,
        consequent: Attr,
        polarity: Polarity,
        n_q: u64,
        n_c: u64,
        n_qc: u64,
    ) -> Rule {
        Rule {
            antecedent,
            consequent,
            polarity,
            n_q,
            n_c,
            n_qc,
            goodness: mi_counts(n, n_q, n_c, n_qc),
            leverage: leverage_unchecked(n, n_q, n_c, n_qc),
        }
    }

    /// Recomputes the rule from the dataset.
    pub fn evaluate(d: &Dataset, antecedent: AttributeSet, consequent: Attr, polarity: Polarity) -> Rule {
        let (n_q, n_c, n_qc) = d
            .rule_counts(&antecedent, consequent, polarity)
            .expect("rule attributes belong to the dataset");
        Rule::from_counts(d.n() as u64, antecedent, consequent, polarity, n_q, n_c, n_qc)
    }

    pub fn is_positive(&self, n: u64) -> bool {
        leverage_numerator(n, self.n_q, self.n_c, self.n_qc) > 0
    }

    pub fn rank_key(&self) -> RankKey<'_> {
        RankKey {
            goodness: self.goodness,
            n_q: self.n_q,
            antecedent: self.antecedent.members(),
            consequent: self.consequent,
            polarity: self.polarity,
        }
    }

    /// `Less` when `self` ranks strictly better than `other`.
    pub fn rank_cmp(&self, other: &Rule) -> Ordering {
        self.rank_key().cmp(&other.rank_key())
    }
}

/// Total order on rules: goodness descending, then antecedent frequency
/// descending, antecedent size ascending, antecedent lexicographic, consequent,
/// polarity (0 before 1). Smaller keys rank better.
#[derive(Clone, Copy, Debug)]
pub struct RankKey<'a> {
    goodness: f64,
    n_q: u64,
    antecedent: &'a [Attr],
    consequent: Attr,
    polarity: Polarity,
}

impl Ord for RankKey<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .goodness
            .total_cmp(&self.goodness)
            .then_with(|| other.n_q.cmp(&self.n_q))
            .then_with(|| self.antecedent.len().cmp(&other.antecedent.len()))
            .then_with(|| self.antecedent.cmp(other.antecedent))
            .then_with(|| self.consequent.cmp(&other.consequent))
            .then_with(|| self.polarity.cmp(&other.polarity))
    }
}

impl PartialOrd for RankKey<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for RankKey<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for RankKey<'_> {}

/// Rules in rank order, at most `k` of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopKList {
    pub k: usize,
    pub rules: Vec<Rule>,
    /// The k-th and (k+1)-th best rules had equal goodness and were separated
    /// only by the tie-break.
    pub boundary_tie: bool,
}

impl TopKList {
    /// Sorts `rules` by rank and keeps the best `k`.
    pub fn from_rules(k: usize, mut rules: Vec<Rule>) -> TopKList {
        rules.sort_by(Rule::rank_cmp);
        let boundary_tie = rules.len() > k && rules[k - 1].goodness == rules[k].goodness;
        rules.truncate(k);
        TopKList { k, rules, boundary_tie }
    }

    /// Goodness of the k-th rule, `-inf` while fewer than `k` are held.
    pub fn tau(&self) -> f64 {
        if self.rules.len() < self.k {
            f64::NEG_INFINITY
        } else {
            self.rules[self.k - 1].goodness
        }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn is_ordered(&self) -> bool {
        self.rules.windows(2).all(|w| w[0].rank_cmp(&w[1]) == Ordering::Less)
    }
}

/// Bounded sorted buffer used during search. Holds `k + 1` rules so a tie at
/// the boundary can be reported.
struct Collector {
    cap: usize,
    rules: Vec<Rule>,
}

impl Collector {
    fn insert(&mut self, rule: Rule) -> f64 {
        let pos = self.rules.binary_search_by(|r| r.rank_cmp(&rule)).unwrap_or_else(|p| p);
        if pos < self.cap {
            self.rules.insert(pos, rule);
            self.rules.truncate(self.cap);
        }
        self.threshold()
    }

    fn threshold(&self) -> f64 {
        if self.rules.len() < self.cap {
            f64::NEG_INFINITY
        } else {
            self.rules[self.cap - 1].goodness
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Target {
    attr: Attr,
    polarity: Polarity,
    n_c: u64,
}

#[derive(Clone, Copy, Debug)]
struct Active {
    target: u32,
    /// Best goodness among positive rules for this target on the root path.
    best: f64,
}

/// Entries above this skip the pair table (8 bytes each).
const PAIR_TABLE_LIMIT: usize = 1 << 24;

struct Search<'a> {
    d: &'a Dataset,
    cfg: &'a MinerConfig,
    n: u64,
    items: Vec<Attr>,
    targets: Vec<Target>,
    permitted: Vec<bool>,
    cap: usize,
    /// Goodness of `{items[i]} -> target`, or 0 when not a positive rule.
    singles: Vec<f64>,
    /// Goodness of `{items[i], items[j]} -> target` for `i < j`; empty when
    /// the table would be too large.
    pairs: Vec<f64>,
    top: Mutex<Collector>,
    tau_bits: AtomicU64,
}

impl<'a> Search<'a> {
    fn new(d: &'a Dataset, cfg: &'a MinerConfig) -> Self {
        let n = d.n() as u64;
        let permitted = cfg.permitted_consequents(d);
        let mut targets = Vec::new();
        for a in d.attrs().filter(|a| permitted[a.index()]) {
            for &p in cfg.polarity_mode.polarities() {
                targets.push(Target {
                    attr: a,
                    polarity: p,
                    n_c: p.count(d.attr_support(a), n),
                });
            }
        }
        Search {
            d,
            cfg,
            n,
            items: d.non_degenerate(),
            targets,
            permitted,
            cap: cfg.k + 1,
            singles: Vec::new(),
            pairs: Vec::new(),
            top: Mutex::new(Collector {
                cap: cfg.k + 1,
                rules: Vec::with_capacity(cfg.k + 2),
            }),
            tau_bits: AtomicU64::new(f64::NEG_INFINITY.to_bits()),
        }
    }

    fn tau(&self) -> f64 {
        if !self.cfg.prune {
            return f64::NEG_INFINITY;
        }
        f64::from_bits(self.tau_bits.load(AtomicOrdering::Acquire))
    }

    fn depth_cap(&self) -> usize {
        self.cfg.max_antecedent.unwrap_or(usize::MAX)
    }

    fn root_active(&self) -> Vec<Active> {
        (0..self.targets.len() as u32)
            .map(|t| Active { target: t, best: 0.0 })
            .collect()
    }

    /// A single-attribute dependency `{a} -> C` is the same dependency as
    /// `{C} -> a`; only the orientation with the larger consequent is kept
    /// when both attributes are permitted consequents.
    fn canonical(&self, antecedent: &[Attr], c: Attr) -> bool {
        match antecedent {
            [a] => !(self.permitted[a.index()] && *a > c),
            _ => true,
        }
    }

    fn run(&mut self) {
        self.tabulate();
        self.seed_singletons();
        let root = self.root_active();
        let this = &*self;
        let branch = |ii: usize| this.child(&[], None, this.n, &root, ii);
        if self.cfg.parallel {
            (0..self.items.len()).into_par_iter().for_each(branch);
        } else {
            (0..self.items.len()).for_each(branch);
        }
    }

    fn goodness_toward(&self, cover: &BitVec, support: u64, t: &Target) -> f64 {
        let n_qc = self.d.count_with(cover, support, t.attr, t.polarity);
        if leverage_numerator(self.n, support, t.n_c, n_qc) > 0 {
            mi_counts(self.n, support, t.n_c, n_qc)
        } else {
            0.0
        }
    }

    /// Precomputes the goodness of every one- and two-attribute antecedent
    /// toward every target. Any of these that sits inside a node is a
    /// generalisation of everything below it, which tightens the redundancy
    /// prune well beyond the root path alone.
    fn tabulate(&mut self) {
        let m = self.items.len();
        let nt = self.targets.len();
        let this = &*self;
        let singles: Vec<f64> = (0..m)
            .into_par_iter()
            .flat_map_iter(|i| {
                let a = this.items[i];
                let col = this.d.column(a);
                let support = this.d.attr_support(a);
                this.targets.iter().map(move |t| {
                    if t.attr == a {
                        0.0
                    } else {
                        this.goodness_toward(col, support, t)
                    }
                })
            })
            .collect();
        let pairs: Vec<f64> = if m * m * nt <= PAIR_TABLE_LIMIT {
            (0..m * m)
                .into_par_iter()
                .flat_map_iter(|ij| {
                    let (i, j) = (ij / m, ij % m);
                    let (a, b) = (this.items[i], this.items[j]);
                    let pair = (i < j).then(|| {
                        let cover = this.d.column(a).and(this.d.column(b));
                        let support = cover.count_ones();
                        (cover, support)
                    });
                    this.targets.iter().map(move |t| match &pair {
                        Some((cover, support)) if *support > 0 && t.attr != a && t.attr != b => {
                            this.goodness_toward(cover, *support, t)
                        }
                        _ => 0.0,
                    })
                })
                .collect()
        } else {
            Vec::new()
        };
        self.singles = singles;
        self.pairs = pairs;
    }

    /// The best goodness toward target `t` among the tabulated proper
    /// subsets of `node ∪ {items[ii]}` that contain `items[ii]`.
    fn tabulated_best(&self, node: &[usize], ii: usize, t: usize) -> f64 {
        let nt = self.targets.len();
        let mut best = 0.0f64;
        if !node.is_empty() {
            best = self.singles[ii * nt + t];
        }
        if node.len() >= 2 && !self.pairs.is_empty() {
            let m = self.items.len();
            for &z in node {
                best = best.max(self.pairs[(z * m + ii) * nt + t]);
            }
        }
        best
    }

    /// Single-attribute rules are never redundant, so they are offered up
    /// front to raise `tau` before the deeper search starts.
    fn seed_singletons(&self) {
        for &a in &self.items {
            let support = self.d.attr_support(a);
            for t in &self.targets {
                if t.attr == a || !self.canonical(&[a], t.attr) {
                    continue;
                }
                let n_qc = self.d.count_with(self.d.column(a), support, t.attr, t.polarity);
                if leverage_numerator(self.n, support, t.n_c, n_qc) <= 0 {
                    continue;
                }
                self.offer(Rule::from_counts(
                    self.n,
                    AttributeSet::singleton(a),
                    t.attr,
                    t.polarity,
                    support,
                    t.n_c,
                    n_qc,
                ));
            }
        }
    }

    /// Evaluates `node ∪ {items[ii]}` and recurses into its subtree. `node`
    /// holds item indices in increasing order.
    fn child(&self, node: &[usize], cover: Option<&BitVec>, parent_support: u64, active: &[Active], ii: usize) {
        let a = self.items[ii];
        let col = self.d.column(a);
        let cover = match cover {
            Some(c) => c.and(col),
            None => col.clone(),
        };
        let support = cover.count_ones();
        if support == 0 {
            return;
        }
        // `a` holds wherever `node` does: every antecedent in this subtree has
        // the cover of the same set without `a`, so all its rules are redundant
        if self.cfg.prune && !node.is_empty() && support == parent_support {
            return;
        }
        let mut path = node.to_vec();
        path.push(ii);
        let attrs: Vec<Attr> = path.iter().map(|&i| self.items[i]).collect();
        let depth = attrs.len();
        let expand = depth < self.depth_cap();

        let mut next = Vec::with_capacity(active.len());
        let mut cached: Option<(Attr, u64)> = None;
        for act in active {
            let t = self.targets[act.target as usize];
            if t.attr == a {
                continue;
            }
            let ones = match cached {
                Some((attr, ones)) if attr == t.attr => ones,
                _ => {
                    let ones = cover.count_and(self.d.column(t.attr));
                    cached = Some((t.attr, ones));
                    ones
                }
            };
            let n_qc = t.polarity.count(ones, support);
            if n_qc == 0 && self.cfg.prune {
                continue;
            }
            let mut best = act.best;
            if self.cfg.prune {
                best = best.max(self.tabulated_best(node, ii, act.target as usize));
            }
            if leverage_numerator(self.n, support, t.n_c, n_qc) > 0 {
                let m = mi_counts(self.n, support, t.n_c, n_qc);
                if depth > 1
                    && m > best
                    && m >= self.tau()
                    && self.canonical(&attrs, t.attr)
                    && !self.redundant(&attrs, t, m)
                {
                    self.offer(Rule {
                        antecedent: AttributeSet::new(attrs.iter().copied()),
                        consequent: t.attr,
                        polarity: t.polarity,
                        n_q: support,
                        n_c: t.n_c,
                        n_qc,
                        goodness: m,
                        leverage: leverage_unchecked(self.n, support, t.n_c, n_qc),
                    });
                }
                best = best.max(m);
            }
            if expand && self.keep(n_qc, t.n_c, best) {
                next.push(Active {
                    target: act.target,
                    best,
                });
            }
        }
        if next.is_empty() || !expand {
            return;
        }
        for jj in ii + 1..self.items.len() {
            self.child(&path, Some(&cover), support, &next, jj);
        }
    }

    /// Whether a target can still yield a top-K, non-redundant rule in a
    /// subtree whose consequent count is at most `n_qc`.
    fn keep(&self, n_qc: u64, n_c: u64, best: f64) -> bool {
        if !self.cfg.prune {
            return true;
        }
        let ub = mi_upper_bound(n_qc, n_c, self.n);
        ub > best && ub >= self.tau()
    }

    /// True iff some proper non-empty subset of `attrs` gives a positive rule
    /// toward the same target with goodness at least `m`.
    fn redundant(&self, attrs: &[Attr], t: Target, m: f64) -> bool {
        if attrs.len() < 2 {
            return false;
        }
        let full = attrs.len();
        self.subsets_dominate(attrs, 0, None, 0, full, t, m)
    }

    #[allow(clippy::too_many_arguments)]
    fn subsets_dominate(
        &self,
        attrs: &[Attr],
        from: usize,
        cover: Option<&BitVec>,
        size: usize,
        full: usize,
        t: Target,
        m: f64,
    ) -> bool {
        for i in from..attrs.len() {
            let col = self.d.column(attrs[i]);
            let c = match cover {
                Some(c) => c.and(col),
                None => col.clone(),
            };
            if size + 1 < full {
                let s = c.count_ones();
                let n_qc = self.d.count_with(&c, s, t.attr, t.polarity);
                if leverage_numerator(self.n, s, t.n_c, n_qc) > 0 && mi_counts(self.n, s, t.n_c, n_qc) >= m {
                    return true;
                }
            }
            if size + 2 < full && self.subsets_dominate(attrs, i + 1, Some(&c), size + 1, full, t, m) {
                return true;
            }
        }
        false
    }

    fn offer(&self, rule: Rule) {
        let mut top = self.top.lock().expect("collector lock");
        let tau = top.insert(rule);
        self.tau_bits.store(tau.to_bits(), AtomicOrdering::Release);
    }

    fn finish(self) -> TopKList {
        let k = self.cfg.k;
        let rules = self.top.into_inner().expect("collector lock").rules;
        debug_assert!(rules.len() <= self.cap);
        TopKList::from_rules(k, rules)
    }
}

/// The K globally best non-redundant rules under the rank order.
pub fn mine_top_k(d: &Dataset, cfg: &MinerConfig) -> Result<TopKList, MinerError> {
    cfg.validate()?;
    if !d.is_usable() {
        return Err(MinerError::Degenerate(format!(
            "n={}, non-constant attributes={}",
            d.n(),
            d.non_degenerate().len()
        )));
    }
    let mut search = Search::new(d, cfg);
    search.run();
    Ok(search.finish())
}

/// Whether `candidate` fails to improve on one of `parents` (rules with a
/// proper subset antecedent and the same consequent and polarity).
pub fn is_redundant(candidate: &Rule, parents: &[Rule]) -> bool {
    parents.iter().any(|p| {
        p.consequent == candidate.consequent
            && p.polarity == candidate.polarity
            && p.antecedent.is_proper_subset(&candidate.antecedent)
            && p.goodness >= candidate.goodness
    })
}

/// All positive-leverage rules whose antecedent is a proper non-empty subset
/// of `candidate`'s, with the same consequent and polarity.
pub fn parents_of(d: &Dataset, candidate: &Rule) -> Vec<Rule> {
    let members = candidate.antecedent.members();
    let m = members.len();
    let n = d.n() as u64;
    (1u64..(1 << m) - 1)
        .map(|mask| {
            let sub = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| members[i]);
            Rule::evaluate(d, AttributeSet::new(sub), candidate.consequent, candidate.polarity)
        })
        .filter(|r| r.is_positive(n))
        .collect()
}

/// One bounded expansion step: the extensions `node ∪ {a}`, `a > max(node)`,
/// with non-zero support whose bound reaches `tau` for at least one permitted
/// consequent target.
pub fn expand_frontier(d: &Dataset, node: &AttributeSet, tau: f64, cfg: &MinerConfig) -> Vec<AttributeSet> {
    let n = d.n() as u64;
    let permitted = cfg.permitted_consequents(d);
    let base = d.cover(node);
    d.non_degenerate()
        .into_iter()
        .filter(|&a| node.max().is_none_or(|m| a > m))
        .filter_map(|a| {
            let cover = base.and(d.column(a));
            let support = cover.count_ones();
            if support == 0 {
                return None;
            }
            let child = node.with(a);
            let reachable = d
                .attrs()
                .filter(|c| permitted[c.index()] && !child.contains(*c))
                .any(|c| {
                    let ones = cover.count_and(d.column(c));
                    cfg.polarity_mode.polarities().iter().any(|&p| {
                        let n_c = p.count(d.attr_support(c), n);
                        mi_upper_bound(p.count(ones, support), n_c, n) >= tau
                    })
                });
            reachable.then_some(child)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule(good: f64, n_q: u64, ante: &[u32], c: u32, p: Polarity) -> Rule {
        Rule {
            antecedent: AttributeSet::new(ante.iter().map(|&a| Attr(a))),
            consequent: Attr(c),
            polarity: p,
            n_q,
            n_c: 1,
            n_qc: 1,
            goodness: good,
            leverage: 0.1,
        }
    }

    #[test]
    fn rank_order_tie_breaks() {
        let a = rule(5.0, 10, &[1], 2, Polarity::One);
        let b = rule(5.0, 12, &[3], 2, Polarity::One);
        assert_eq!(b.rank_cmp(&a), Ordering::Less);
        let c = rule(5.0, 10, &[0, 1], 2, Polarity::One);
        assert_eq!(a.rank_cmp(&c), Ordering::Less);
        let d = rule(5.0, 10, &[1], 2, Polarity::Zero);
        assert_eq!(d.rank_cmp(&a), Ordering::Less);
        assert_ne!(a.rank_cmp(&d), Ordering::Equal);
        let e = rule(6.0, 1, &[7], 8, Polarity::One);
        assert_eq!(e.rank_cmp(&a), Ordering::Less);
    }

    #[test]
    fn redundancy_examples() {
        let d = Dataset::parse_csv("x,z,c\n1,1,1\n1,1,1\n1,1,0\n0,0,0\n0,1,0\n0,0,1\n").unwrap();
        let x = d.attr("x").unwrap();
        let z = d.attr("z").unwrap();
        let c = d.attr("c").unwrap();
        // cover(x) ⊆ cover(z): xz has the same counts as x
        let xz = Rule::evaluate(&d, AttributeSet::new([x, z]), c, Polarity::One);
        let parents = parents_of(&d, &xz);
        assert!(is_redundant(&xz, &parents));

        let strong = rule(9.0, 3, &[0, 1], 2, Polarity::One);
        let weak = vec![
            rule(1.0, 4, &[0], 2, Polarity::One),
            rule(2.0, 4, &[1], 2, Polarity::One),
        ];
        assert!(!is_redundant(&strong, &weak));
    }

    #[test]
    fn rejects_bad_config_and_data() {
        let d = Dataset::parse_fimi("1 2\n2 3\n1 2 3\n").unwrap();
        assert_eq!(mine_top_k(&d, &MinerConfig::top(0)), Err(MinerError::InvalidK));
        let mut cfg = MinerConfig::top(3);
        cfg.max_antecedent = Some(0);
        assert_eq!(mine_top_k(&d, &cfg), Err(MinerError::InvalidCap));
        let single = Dataset::parse_fimi("1\n\n1\n").unwrap();
        assert!(matches!(
            mine_top_k(&single, &MinerConfig::top(3)),
            Err(MinerError::Degenerate(_))
        ));
    }

    #[test]
    fn frontier_without_threshold_lists_all_extensions() {
        let d = Dataset::parse_fimi("1 2 3\n1 2\n2 3\n1 3\n3\n").unwrap();
        let cfg = MinerConfig::top(5);
        let root = expand_frontier(&d, &AttributeSet::empty(), f64::NEG_INFINITY, &cfg);
        assert_eq!(root.len(), 3);
        let one = d.attr_set(&["1"]).unwrap();
        let kids = expand_frontier(&d, &one, f64::NEG_INFINITY, &cfg);
        assert_eq!(kids.len(), 2);
        // zero-support extension is dropped
        let d = Dataset::parse_fimi("1\n2\n1 3\n2 3\n").unwrap();
        let kids = expand_frontier(&d, &d.attr_set(&["1"]).unwrap(), f64::NEG_INFINITY, &cfg);
        assert_eq!(kids, vec![d.attr_set(&["1", "3"]).unwrap()]);
        // an unreachable threshold prunes everything
        assert!(expand_frontier(&d, &AttributeSet::empty(), 1e9, &cfg).is_empty());
    }

    #[test]
    fn fixture_rules_are_positive_and_capped() {
        let d = Dataset::parse_fimi("1 2\n2 3\n1 2 3\n1\n3\n").unwrap();
        let mut cfg = MinerConfig::top(5);
        cfg.max_antecedent = Some(1);
        let top = mine_top_k(&d, &cfg).unwrap();
        assert!(top.len() <= 5);
        assert!(top.is_ordered());
        for r in &top.rules {
            assert_eq!(r.antecedent.len(), 1);
            assert!(r.is_positive(d.n() as u64));
        }
    }
}
