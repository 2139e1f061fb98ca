//! Synthetic datasets with planted structure, plus brute-force oracles for
//! Birch's test, top-K mining and speciousness detection.
//!
//! The oracles deliberately avoid the fast paths they check: tables are
//! counted by scanning rows, probabilities are summed as exact rationals,
//! and rule sets are enumerated exhaustively.

use std::cmp::Ordering;
use std::collections::HashSet;

use num::bigint::BigUint;
use num::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitVec;
use crate::dataset::{natural_name_cmp, Attr, AttributeSet, Dataset, Polarity};
use crate::measures::{leverage_numerator, mi_counts, signed_conditional_mi, PairCounts};
use crate::miner::{MinerConfig, Rule, TopKList};
use crate::specdetect::{DetectConfig, EquivalenceForm, VerdictKind};

pub const BIRCH_ORACLE_MAX_N: u64 = 200;
pub const TOP_K_ORACLE_MAX_ATTRS: usize = 12;

/// Attribute names used by planted datasets.
pub const CONFOUNDER: &str = "1";
pub const ANTECEDENT: &str = "2";
pub const CONSEQUENT: &str = "3";

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid plant: {0}")]
    InvalidSpec(String),
    #[error("no integer realisation satisfies {0}")]
    Unrealizable(String),
    #[error("oracle guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("unknown attribute {0}")]
    UnknownAttribute(String),
    #[error(transparent)]
    Dataset(#[from] crate::dataset::DatasetError),
}

/// A Simpson-type plant: `Q -> C` is a positive marginal dependency that is
/// non-positive within both strata of the confounder `X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub n: u64,
    pub p_x: f64,
    pub q_given_x: f64,
    pub q_given_not_x: f64,
    pub c_given_x: f64,
    pub c_given_not_x: f64,
    /// Target conditional leverage of `Q -> C` within `X`.
    pub delta1: f64,
    /// Target conditional leverage within `not X`.
    pub delta2: f64,
    pub noise_attrs: usize,
    pub noise_density: f64,
    pub seed: u64,
}

impl PlantSpec {
    /// 75%/25% strata with a small negative within-stratum leverage.
    pub fn classic(n: u64, noise_attrs: usize, seed: u64) -> PlantSpec {
        PlantSpec {
            n,
            p_x: 0.5,
            q_given_x: 0.75,
            q_given_not_x: 0.25,
            c_given_x: 0.75,
            c_given_not_x: 0.25,
            delta1: -0.00625,
            delta2: -0.00625,
            noise_attrs,
            noise_density: 0.3,
            seed,
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let probs = [
            ("p_x", self.p_x),
            ("P(Q|X)", self.q_given_x),
            ("P(Q|not X)", self.q_given_not_x),
            ("P(C|X)", self.c_given_x),
            ("P(C|not X)", self.c_given_not_x),
            ("noise density", self.noise_density),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::InvalidSpec(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.n < 2 {
            return Err(SynthError::InvalidSpec("need at least two rows".into()));
        }
        if self.delta1 > 0.0 || self.delta2 > 0.0 {
            return Err(SynthError::InvalidSpec("within-stratum leverages must be <= 0".into()));
        }
        if self.q_given_x == self.q_given_not_x || self.c_given_x == self.c_given_not_x {
            return Err(SynthError::InvalidSpec(
                "X independent of Q or C: no reversal is possible".into(),
            ));
        }
        Ok(())
    }
}

/// Ground truth written next to a generated dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub kind: String,
    pub seed: Option<u64>,
    pub n: u64,
    pub confounder: Option<String>,
    pub antecedent: Option<String>,
    pub consequent: Option<String>,
    /// `n, n_x, n_q, n_c, n_xq, n_xc, n_qc, n_xqc`.
    pub counts: Option<[u64; 8]>,
    pub delta_qc: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub source: Option<String>,
    pub equivalent: Option<String>,
    pub equivalence_form: Option<EquivalenceForm>,
}

#[derive(Clone, Debug)]
pub struct Planted {
    pub dataset: Dataset,
    pub counts: PairCounts,
    pub truth: GroundTruth,
}

fn simpson_holds(pc: &PairCounts) -> Result<(), &'static str> {
    if !pc.is_consistent() {
        return Err("non-negative cell counts");
    }
    if leverage_numerator(pc.n, pc.n_q, pc.n_c, pc.n_qc) <= 0 {
        return Err("delta(Q,C) > 0");
    }
    let c = pc.cells();
    let d1 = pc.n_x as i128 * pc.n_xqc as i128 - pc.n_xq as i128 * pc.n_xc as i128;
    if d1 > 0 {
        return Err("delta1 <= 0");
    }
    let nnx = pc.n_not_x() as i128;
    let d2 = nnx * c.nxqc as i128 - (c.nxqc + c.nxq_nc) as i128 * (c.nxqc + c.nx_nqc) as i128;
    if d2 > 0 {
        return Err("delta2 <= 0");
    }
    if leverage_numerator(pc.n, pc.n_x, pc.n_q, pc.n_xq) == 0 {
        return Err("delta(X,Q) != 0");
    }
    Ok(())
}

/// Integer cell counts for a plant, searching a small neighbourhood of the
/// rounded targets when rounding breaks one of the conditions.
pub fn plant_counts(spec: &PlantSpec) -> Result<PairCounts, SynthError> {
    spec.validate()?;
    let n = spec.n;
    let nf = n as f64;
    let n_x = (nf * spec.p_x).round() as u64;
    let n_nx = n - n_x;
    if n_x == 0 || n_nx == 0 {
        return Err(SynthError::InvalidSpec("both strata must be non-empty".into()));
    }
    let round = |p: f64, size: u64| (p * size as f64).round() as u64;
    let n_xq = round(spec.q_given_x, n_x);
    let n_xc = round(spec.c_given_x, n_x);
    let n_nxq = round(spec.q_given_not_x, n_nx);
    let n_nxc = round(spec.c_given_not_x, n_nx);
    let target =
        |m_q: u64, m_c: u64, size: u64, delta: f64| (m_q as f64 * m_c as f64 / size as f64 + nf * delta).round() as i64;
    let t1 = target(n_xq, n_xc, n_x, spec.delta1);
    let t2 = target(n_nxq, n_nxc, n_nx, spec.delta2);
    let build = |a: i64, b: i64| -> Option<PairCounts> {
        if a < 0 || b < 0 {
            return None;
        }
        let (a, b) = (a as u64, b as u64);
        if a > n_xq.min(n_xc) || b > n_nxq.min(n_nxc) {
            return None;
        }
        Some(PairCounts::new(
            n,
            n_x,
            n_xq + n_nxq,
            n_xc + n_nxc,
            n_xq,
            n_xc,
            a + b,
            a,
        ))
    };
    let first_failure = match build(t1, t2) {
        Some(pc) => match simpson_holds(&pc) {
            Ok(()) => return Ok(pc),
            Err(e) => e,
        },
        None => "non-negative cell counts",
    };
    if leverage_numerator(n, n_x, n_xq + n_nxq, n_xq) == 0 {
        return Err(SynthError::Unrealizable("delta(X,Q) != 0".into()));
    }
    const RADIUS: i64 = 3;
    let mut offsets: Vec<(i64, i64)> = (-RADIUS..=RADIUS)
        .flat_map(|a| (-RADIUS..=RADIUS).map(move |b| (a, b)))
        .collect();
    offsets.sort_by_key(|&(a, b)| (a.abs() + b.abs(), a, b));
    offsets
        .into_iter()
        .filter_map(|(a, b)| build(t1 + a, t2 + b))
        .find(|pc| simpson_holds(pc).is_ok())
        .ok_or_else(|| SynthError::Unrealizable(first_failure.into()))
}

/// Materialises the plant as rows (shuffled) with independent noise columns.
pub fn plant_simpson(spec: &PlantSpec) -> Result<Planted, SynthError> {
    let pc = plant_counts(spec)?;
    let n = spec.n as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let cells = pc.cells().as_array();
    // cell order: x q c bits as (1,1,1), (1,1,0), (1,0,1), (1,0,0), (0,1,1), ...
    let mut rows: Vec<[bool; 3]> = Vec::with_capacity(n);
    for (i, &count) in cells.iter().enumerate() {
        let bits = [i < 4, i % 4 < 2, i % 2 == 0];
        rows.extend(std::iter::repeat_n(bits, count as usize));
    }
    rows.shuffle(&mut rng);
    let mut named: Vec<(String, BitVec)> = [CONFOUNDER, ANTECEDENT, CONSEQUENT]
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let bits: Vec<bool> = rows.iter().map(|r| r[k]).collect();
            (name.to_string(), BitVec::from_bools(&bits))
        })
        .collect();
    for j in 0..spec.noise_attrs {
        let bits: Vec<bool> = (0..n).map(|_| rng.gen_bool(spec.noise_density)).collect();
        named.push(((j + 4).to_string(), BitVec::from_bools(&bits)));
    }
    let dataset = Dataset::from_columns(n, named)?;
    let (delta1, delta2) = crate::measures::conditional_leverages(&pc);
    let truth = GroundTruth {
        kind: "simpson".into(),
        seed: Some(spec.seed),
        n: spec.n,
        confounder: Some(CONFOUNDER.into()),
        antecedent: Some(ANTECEDENT.into()),
        consequent: Some(CONSEQUENT.into()),
        counts: Some([pc.n, pc.n_x, pc.n_q, pc.n_c, pc.n_xq, pc.n_xc, pc.n_qc, pc.n_xqc]),
        delta_qc: Some(leverage_numerator(pc.n, pc.n_q, pc.n_c, pc.n_qc) as f64 / (pc.n as f64).powi(2)),
        delta1: Some(delta1),
        delta2: Some(delta2),
        source: None,
        equivalent: None,
        equivalence_form: None,
    };
    Ok(Planted {
        dataset,
        counts: pc,
        truth,
    })
}

/// Appends an exact copy or complement of `source`. The new column gets the
/// next free integer name when all names are integers, else a suffix.
pub fn plant_equivalent(
    d: &Dataset,
    source: &str,
    form: EquivalenceForm,
) -> Result<(Dataset, GroundTruth), SynthError> {
    let a = d
        .attr(source)
        .map_err(|_| SynthError::UnknownAttribute(source.to_string()))?;
    let col = match form {
        EquivalenceForm::Direct => d.column(a).clone(),
        EquivalenceForm::Complement => d.column(a).not(),
    };
    let numeric: Option<Vec<u64>> = d.names().iter().map(|s| s.parse::<u64>().ok()).collect();
    let name = match numeric {
        Some(ids) => (ids.into_iter().max().unwrap_or(0) + 1).to_string(),
        None => {
            let base = match form {
                EquivalenceForm::Direct => format!("{source}_copy"),
                EquivalenceForm::Complement => format!("{source}_not"),
            };
            let mut name = base.clone();
            let mut k = 2;
            while d.attr(&name).is_ok() {
                name = format!("{base}{k}");
                k += 1;
            }
            name
        }
    };
    let mut named: Vec<(String, BitVec)> = d
        .attrs()
        .map(|x| (d.name(x).to_string(), d.column(x).clone()))
        .collect();
    named.push((name.clone(), col));
    let out = Dataset::from_columns(d.n(), named)?;
    let truth = GroundTruth {
        kind: "equivalent".into(),
        seed: None,
        n: d.n() as u64,
        confounder: None,
        antecedent: None,
        consequent: None,
        counts: None,
        delta_qc: None,
        delta1: None,
        delta2: None,
        source: Some(source.to_string()),
        equivalent: Some(name),
        equivalence_form: Some(form),
    };
    Ok((out, truth))
}

/// Independent Bernoulli columns named `1..=k`.
pub fn random_dataset(n: usize, k: usize, density: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let named = (0..k)
        .map(|j| {
            let bits: Vec<bool> = (0..n).map(|_| rng.gen_bool(density)).collect();
            ((j + 1).to_string(), BitVec::from_bools(&bits))
        })
        .collect();
    Dataset::from_columns(n, named).expect("distinct names, equal lengths")
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `num / den` rounded to the nearest `f64`.
fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let scaled = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    scaled.to_f64().expect("finite") * 2f64.powi(-(shift as i32))
}

/// Feasible `(i, j)` tables with their exact probability numerators.
type BirchTables = Vec<(u64, u64, BigUint)>;

/// Exact joint probability numerators of every feasible `(i, j)` table,
/// over the common denominator `C(n_x, n_xc) C(n - n_x, n_¬xc)`.
fn birch_tables(pc: &PairCounts) -> Result<(BirchTables, BigUint), SynthError> {
    if pc.n > BIRCH_ORACLE_MAX_N {
        return Err(SynthError::GuardExceeded(format!(
            "n = {} > {BIRCH_ORACLE_MAX_N}",
            pc.n
        )));
    }
    if !pc.is_consistent() || pc.n == 0 {
        return Err(SynthError::InvalidSpec(format!("inconsistent counts {pc:?}")));
    }
    let c = pc.cells();
    let nnx = pc.n - pc.n_x;
    let m_q = (c.nxqc + c.nxq_nc) as u64;
    let m_c = (c.nxqc + c.nx_nqc) as u64;
    let mut tables = Vec::new();
    for i in 0..=pc.n_xq.min(pc.n_xc) {
        let a = binomial(pc.n_xq, i) * binomial(pc.n_x - pc.n_xq, pc.n_xc - i);
        if a.is_zero() {
            continue;
        }
        for j in 0..=m_q.min(m_c) {
            let b = binomial(m_q, j) * binomial(nnx - m_q, m_c - j);
            if !b.is_zero() {
                tables.push((i, j, &a * b));
            }
        }
    }
    let den = binomial(pc.n_x, pc.n_xc) * binomial(nnx, m_c);
    Ok((tables, den))
}

/// `P(i + j >= n_qc)` by exhaustive enumeration in exact rationals.
pub fn brute_force_birch(pc: &PairCounts) -> Result<f64, SynthError> {
    let (tables, den) = birch_tables(pc)?;
    let num: BigUint = tables
        .into_iter()
        .filter(|(i, j, _)| i + j >= pc.n_qc)
        .map(|(_, _, w)| w)
        .sum();
    Ok(ratio_to_f64(&num, &den))
}

/// Total probability over all feasible tables; exactly one.
pub fn brute_force_birch_mass(pc: &PairCounts) -> Result<f64, SynthError> {
    let (tables, den) = birch_tables(pc)?;
    let num: BigUint = tables.into_iter().map(|(_, _, w)| w).sum();
    Ok(ratio_to_f64(&num, &den))
}

/// Row-major copy of a dataset for the scanning oracles.
struct Rows {
    n: u64,
    k: usize,
    rows: Vec<Vec<bool>>,
}

impl Rows {
    fn of(d: &Dataset) -> Rows {
        let rows = (0..d.n())
            .map(|r| d.attrs().map(|a| d.column(a).get(r)).collect())
            .collect();
        Rows {
            n: d.n() as u64,
            k: d.n_attrs(),
            rows,
        }
    }

    fn has_all(row: &[bool], s: &AttributeSet) -> bool {
        s.members().iter().all(|a| row[a.index()])
    }

    fn counts(&self, q: &AttributeSet, c: Attr, p: Polarity) -> (u64, u64, u64) {
        let want = p == Polarity::One;
        let (mut n_q, mut n_c, mut n_qc) = (0, 0, 0);
        for row in &self.rows {
            let in_q = Rows::has_all(row, q);
            let in_c = row[c.index()] == want;
            n_q += in_q as u64;
            n_c += in_c as u64;
            n_qc += (in_q && in_c) as u64;
        }
        (n_q, n_c, n_qc)
    }

    fn pair(&self, x: &AttributeSet, q: &AttributeSet, c: Attr, p: Polarity) -> PairCounts {
        let want = p == Polarity::One;
        let mut t = [0u64; 8];
        for row in &self.rows {
            let bx = Rows::has_all(row, x);
            let bq = Rows::has_all(row, q);
            let bc = row[c.index()] == want;
            let idx = (!bx as usize) * 4 + (!bq as usize) * 2 + (!bc as usize);
            t[idx] += 1;
        }
        PairCounts::from_cells(t)
    }
}

fn subsets(members: &[Attr]) -> impl Iterator<Item = AttributeSet> + '_ {
    let m = members.len();
    (1u64..(1 << m)).map(move |mask| AttributeSet::new((0..m).filter(|i| mask & (1 << i) != 0).map(|i| members[i])))
}

/// Every positive, non-redundant rule, ranked and cut to `k`, found by
/// enumerating all antecedents and counting by row scans.
pub fn brute_force_top_k(d: &Dataset, cfg: &MinerConfig) -> Result<TopKList, SynthError> {
    if d.n_attrs() > TOP_K_ORACLE_MAX_ATTRS {
        return Err(SynthError::GuardExceeded(format!(
            "{} attributes > {TOP_K_ORACLE_MAX_ATTRS}",
            d.n_attrs()
        )));
    }
    let rows = Rows::of(d);
    let all: Vec<Attr> = d.attrs().collect();
    let permitted = |a: Attr| cfg.consequents.as_ref().is_none_or(|l| l.contains(&a));
    let cap = cfg.max_antecedent.unwrap_or(usize::MAX);
    let positive = |q: &AttributeSet, c: Attr, p: Polarity| -> Option<f64> {
        let (n_q, n_c, n_qc) = rows.counts(q, c, p);
        (leverage_numerator(rows.n, n_q, n_c, n_qc) > 0).then(|| mi_counts(rows.n, n_q, n_c, n_qc))
    };
    let mut found = Vec::new();
    for q in subsets(&all) {
        if q.len() > cap {
            continue;
        }
        for c in all.iter().copied().filter(|&c| permitted(c) && !q.contains(c)) {
            if let Some(a) = q.as_single() {
                if permitted(a) && a > c {
                    continue;
                }
            }
            for &p in cfg.polarity_mode.polarities() {
                let Some(m) = positive(&q, c, p) else {
                    continue;
                };
                let redundant = subsets(q.members())
                    .filter(|y| y.len() < q.len())
                    .any(|y| positive(&y, c, p).is_some_and(|g| g >= m));
                if !redundant {
                    let (n_q, n_c, n_qc) = rows.counts(&q, c, p);
                    found.push(Rule::from_counts(rows.n, q.clone(), c, p, n_q, n_c, n_qc));
                }
            }
        }
    }
    debug_assert!(rows.k == all.len());
    Ok(TopKList::from_rules(cfg.k, found))
}

/// Verdict of the exhaustive detector: kind and mediator rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleVerdict {
    pub kind: VerdictKind,
    pub mediator: Option<usize>,
}

struct Side {
    ante: AttributeSet,
    cons: Attr,
    pol: Polarity,
}

fn orientations(r: &Rule) -> Vec<(Side, bool)> {
    let mut out = vec![(
        Side {
            ante: r.antecedent.clone(),
            cons: r.consequent,
            pol: r.polarity,
        },
        false,
    )];
    if let Some(a) = r.antecedent.as_single() {
        out.push((
            Side {
                ante: AttributeSet::singleton(r.consequent),
                cons: a,
                pol: r.polarity,
            },
            true,
        ));
    }
    out
}

enum Step {
    Decided(VerdictKind),
    Pathological(AttributeSet, AttributeSet),
    Pass,
}

fn oracle_pair(rows: &Rows, ri: &Rule, rj: &Rule, theta: f64) -> Step {
    // preference: neither reversed, mediator reversed, judged reversed, both
    let oi = orientations(ri);
    let oj = orientations(rj);
    let mut combos = Vec::new();
    for (q, rev_i) in &oi {
        for (x, rev_j) in &oj {
            if q.cons == x.cons {
                combos.push(((*rev_i as u8) * 2 + *rev_j as u8, q, x));
            }
        }
    }
    combos.sort_by_key(|c| c.0);
    let Some(&(_, q, x)) = combos.first() else {
        return Step::Pass;
    };
    if q.ante == x.ante {
        return Step::Pass;
    }
    let pc = rows.pair(&x.ante, &q.ante, q.cons, q.pol);
    let n = pc.n as i128;
    let dxq = n * pc.n_xq as i128 - pc.n_x as i128 * pc.n_q as i128;
    if q.pol != x.pol && dxq > 0 {
        return Step::Pass;
    }
    if (pc.n_x == pc.n_q && pc.n_xq == pc.n_q) || (pc.n_xq == 0 && pc.n_x + pc.n_q == pc.n) {
        return Step::Decided(VerdictKind::Type0Equivalent);
    }
    let mi_s = signed_conditional_mi(&pc);
    if q.ante.is_proper_subset(&x.ante) && q.pol == x.pol && mi_s <= theta {
        return Step::Decided(VerdictKind::Type1SuperfluousGeneralization);
    }
    let t = pc.cells().as_array();
    let (xqc, xq, xc, xs) = (t[0], t[0] + t[1], t[0] + t[2], t[0] + t[1] + t[2] + t[3]);
    let (yqc, yq, yc, ys) = (t[4], t[4] + t[5], t[4] + t[6], t[4] + t[5] + t[6] + t[7]);
    let d1 = xs as i128 * xqc as i128 - xq as i128 * xc as i128;
    let d2 = ys as i128 * yqc as i128 - yq as i128 * yc as i128;
    if d1 <= 0 && d2 <= 0 {
        // X' coincides with its own consequent value C' = a
        let coincides = if q.pol == x.pol {
            pc.n_x == pc.n_xc && pc.n_xc == pc.n_c
        } else {
            pc.n_xc == 0 && pc.n_x + pc.n_c == pc.n
        };
        if coincides {
            return Step::Pathological(x.ante.clone(), q.ante.clone());
        }
        return Step::Decided(VerdictKind::Type2YuleSimpson);
    }
    if mi_s < theta {
        return Step::Decided(VerdictKind::Type3InsignificantPartial);
    }
    Step::Pass
}

/// Tests every ordered pair of rules directly from rows, with the same
/// survivor refinement for the pathological case.
pub fn brute_force_detect(d: &Dataset, rules: &[Rule], cfg: &DetectConfig) -> Vec<OracleVerdict> {
    let rows = Rows::of(d);
    let steps: Vec<Vec<Step>> = (0..rules.len())
        .map(|i| {
            (0..i)
                .map(|j| oracle_pair(&rows, &rules[i], &rules[j], cfg.theta))
                .collect()
        })
        .collect();
    let judge = |alive: &HashSet<(AttributeSet, AttributeSet)>| -> Vec<OracleVerdict> {
        steps
            .iter()
            .map(|row| {
                for (j, s) in row.iter().enumerate() {
                    let kind = match s {
                        Step::Decided(k) => *k,
                        Step::Pathological(x, q) => {
                            if alive.contains(&(x.clone(), q.clone())) || alive.contains(&(q.clone(), x.clone())) {
                                VerdictKind::Type2YuleSimpson
                            } else {
                                continue;
                            }
                        }
                        Step::Pass => continue,
                    };
                    return OracleVerdict {
                        kind,
                        mediator: Some(j),
                    };
                }
                OracleVerdict {
                    kind: VerdictKind::NonSpecious,
                    mediator: None,
                }
            })
            .collect()
    };
    let links = |v: &[OracleVerdict]| -> HashSet<(AttributeSet, AttributeSet)> {
        let mut s = HashSet::new();
        for (r, v) in rules.iter().zip(v) {
            if v.kind == VerdictKind::NonSpecious {
                let c = AttributeSet::singleton(r.consequent);
                s.insert((r.antecedent.clone(), c.clone()));
                if r.antecedent.len() == 1 {
                    s.insert((c, r.antecedent.clone()));
                }
            }
        }
        s
    };
    let any_pathological = steps.iter().flatten().any(|s| matches!(s, Step::Pathological(..)));
    let mut current = judge(&HashSet::new());
    if !any_pathological {
        return current;
    }
    let mut previous: Option<Vec<OracleVerdict>> = None;
    for _ in 1..64 {
        let next = judge(&links(&current));
        if next == current {
            break;
        }
        if previous.as_ref() == Some(&next) {
            let alive = |v: &[OracleVerdict]| v.iter().filter(|o| o.kind == VerdictKind::NonSpecious).count();
            if alive(&next) > alive(&current) {
                current = next;
            }
            break;
        }
        previous = Some(std::mem::replace(&mut current, next));
    }
    current
}

/// Sorts attribute names the way datasets order them.
pub fn sorted_names(mut names: Vec<String>) -> Vec<String> {
    names.sort_by(|a, b| natural_name_cmp(a, b));
    names
}

/// Compares two rule lists field by field, returning the first difference.
pub fn first_difference(a: &[Rule], b: &[Rule]) -> Option<String> {
    if a.len() != b.len() {
        return Some(format!("lengths {} vs {}", a.len(), b.len()));
    }
    a.iter().zip(b).enumerate().find_map(|(i, (x, y))| {
        (x.rank_cmp(y) != Ordering::Equal || x != y).then(|| format!("rank {i}: {x:?} vs {y:?}"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::birch_p;
    use crate::specdetect::check_equivalence;

    #[test]
    fn f1_plant_counts() {
        let pc = plant_counts(&PlantSpec::classic(40, 0, 1)).unwrap();
        assert_eq!((pc.n_xq, pc.n_xc, pc.n_qc, pc.n_xqc), (15, 15, 12, 11));
        let pc = plant_counts(&PlantSpec::classic(1000, 0, 1)).unwrap();
        assert_eq!((pc.n_xqc, pc.n_qc - pc.n_xqc), (275, 25));
    }

    #[test]
    fn independent_confounder_is_rejected() {
        let mut spec = PlantSpec::classic(100, 0, 1);
        spec.q_given_not_x = spec.q_given_x;
        assert!(matches!(plant_counts(&spec), Err(SynthError::InvalidSpec(_))));
    }

    #[test]
    fn plant_is_deterministic_and_exact() {
        let a = plant_simpson(&PlantSpec::classic(200, 3, 9)).unwrap();
        let b = plant_simpson(&PlantSpec::classic(200, 3, 9)).unwrap();
        let mut wa = Vec::new();
        let mut wb = Vec::new();
        a.dataset.write_fimi(&mut wa).unwrap();
        b.dataset.write_fimi(&mut wb).unwrap();
        assert_eq!(wa, wb);
        let d = &a.dataset;
        let x = d.attr_set(&[CONFOUNDER]).unwrap();
        let q = d.attr_set(&[ANTECEDENT]).unwrap();
        let pc = d
            .pair_counts(&x, &q, d.attr(CONSEQUENT).unwrap(), Polarity::One)
            .unwrap();
        assert_eq!(pc, a.counts);
        assert!(simpson_holds(&pc).is_ok());
    }

    #[test]
    fn equivalent_columns() {
        let d = random_dataset(30, 3, 0.4, 5);
        for form in [EquivalenceForm::Direct, EquivalenceForm::Complement] {
            let (e, truth) = plant_equivalent(&d, "2", form).unwrap();
            assert_eq!(truth.equivalent.as_deref(), Some("4"));
            let x = e.attr_set(&["2"]).unwrap();
            let q = e.attr_set(&["4"]).unwrap();
            let pc = e.pair_counts(&x, &q, e.attr("1").unwrap(), Polarity::One).unwrap();
            assert_eq!(check_equivalence(&pc), Some(form));
        }
    }

    #[test]
    fn birch_oracle_small_cases() {
        let pc = PairCounts::new(4, 2, 2, 2, 1, 1, 2, 1);
        assert!((brute_force_birch(&pc).unwrap() - 0.25).abs() < 1e-15);
        let pc = PairCounts::new(30, 12, 14, 11, 6, 5, 7, 3);
        assert!((brute_force_birch_mass(&pc).unwrap() - 1.0).abs() < 1e-15);
        let exact = brute_force_birch(&pc).unwrap();
        assert!((exact - birch_p(&pc).unwrap()).abs() <= 1e-12 * exact);
        let big = PairCounts::new(201, 100, 100, 100, 50, 50, 50, 25);
        assert!(matches!(brute_force_birch(&big), Err(SynthError::GuardExceeded(_))));
    }

    #[test]
    fn ratio_conversion() {
        let third = ratio_to_f64(&BigUint::from(1u32), &BigUint::from(3u32));
        assert_eq!(third, 1.0 / 3.0);
        assert_eq!(ratio_to_f64(&BigUint::from(7u32), &BigUint::from(7u32)), 1.0);
    }

    #[test]
    fn top_k_oracle_edge_cases() {
        let single = Dataset::parse_fimi("1\n\n1\n").unwrap();
        assert!(brute_force_top_k(&single, &MinerConfig::top(5)).unwrap().is_empty());
        // two copies of one column: no antecedent holds both copies
        let d = Dataset::parse_csv("a,b,c\n1,1,1\n1,1,0\n0,0,1\n0,0,0\n1,1,1\n").unwrap();
        let top = brute_force_top_k(&d, &MinerConfig::top(20)).unwrap();
        assert!(top.rules.iter().all(|r| r.antecedent.len() == 1));
    }
}
