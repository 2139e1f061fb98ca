//! Binary transactional data held as one packed bit-vector per attribute.
//!
//! All frequency counts used by the measures, the miner and the detector are
//! answered here by AND-ing columns and counting set bits.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitVec;
use crate::measures::PairCounts;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: token {token:?} is not a non-negative integer item id")]
    BadToken { line: usize, token: String },
    #[error("line {line}: expected {expected} cells, found {found}")]
    Ragged { line: usize, expected: usize, found: usize },
    #[error("line {line}, column {column}: cell {value:?} is not 0 or 1")]
    BadCell { line: usize, column: String, value: String },
    #[error("duplicate attribute name {0:?}")]
    DuplicateName(String),
    #[error("unknown attribute {0}")]
    UnknownAttribute(String),
    #[error("consequent {0} also appears in an antecedent")]
    ConsequentInAntecedent(String),
    #[error("column {name:?} has {found} bits, expected {expected}")]
    ColumnLength {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Dense attribute identifier; indexes the dataset's columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Attr(pub u32);

impl Attr {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Attr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Value of a binary consequent a rule points at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Zero,
    One,
}

impl Polarity {
    pub const BOTH: [Polarity; 2] = [Polarity::One, Polarity::Zero];

    pub fn as_u8(self) -> u8 {
        match self {
            Polarity::Zero => 0,
            Polarity::One => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Polarity> {
        match v {
            0 => Some(Polarity::Zero),
            1 => Some(Polarity::One),
            _ => None,
        }
    }

    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Zero => Polarity::One,
            Polarity::One => Polarity::Zero,
        }
    }

    /// Count of rows with the attribute at this value, given the count of ones.
    #[inline]
    pub fn count(self, ones: u64, total: u64) -> u64 {
        match self {
            Polarity::One => ones,
            Polarity::Zero => total - ones,
        }
    }
}

/// Strictly sorted set of attributes. Sorted order is the canonical form, so
/// set equality is representation equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AttributeSet(Vec<Attr>);

impl AttributeSet {
    pub fn empty() -> Self {
        AttributeSet(Vec::new())
    }

    pub fn singleton(a: Attr) -> Self {
        AttributeSet(vec![a])
    }

    pub fn new<I: IntoIterator<Item = Attr>>(attrs: I) -> Self {
        let mut v: Vec<Attr> = attrs.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        AttributeSet(v)
    }

    pub fn members(&self) -> &[Attr] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, a: Attr) -> bool {
        self.0.binary_search(&a).is_ok()
    }

    pub fn max(&self) -> Option<Attr> {
        self.0.last().copied()
    }

    /// The single member, if this set has exactly one.
    pub fn as_single(&self) -> Option<Attr> {
        match self.0.as_slice() {
            [a] => Some(*a),
            _ => None,
        }
    }

    pub fn with(&self, a: Attr) -> Self {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&a) {
            v.insert(pos, a);
        }
        AttributeSet(v)
    }

    pub fn is_subset(&self, other: &AttributeSet) -> bool {
        self.0.iter().all(|a| other.contains(*a))
    }

    pub fn is_proper_subset(&self, other: &AttributeSet) -> bool {
        self.len() < other.len() && self.is_subset(other)
    }
}

impl FromIterator<Attr> for AttributeSet {
    fn from_iter<I: IntoIterator<Item = Attr>>(iter: I) -> Self {
        AttributeSet::new(iter)
    }
}

/// Orders attribute names numerically when both are integers, numbers first,
/// otherwise by string.
pub fn natural_name_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// Immutable binary matrix: `n` rows, one column per attribute.
///
/// Attributes are stored in natural name order regardless of the order they
/// were first seen in the input, so identifiers and every derived ordering are
/// independent of input layout.
#[derive(Clone, Debug)]
pub struct Dataset {
    n: usize,
    names: Vec<String>,
    columns: Vec<BitVec>,
    supports: Vec<u64>,
    index: HashMap<String, Attr>,
}

impl Dataset {
    pub fn from_columns(n: usize, named: Vec<(String, BitVec)>) -> Result<Dataset, DatasetError> {
        let mut named = named;
        let mut seen = BTreeSet::new();
        for (name, col) in &named {
            if !seen.insert(name.clone()) {
                return Err(DatasetError::DuplicateName(name.clone()));
            }
            if col.len() != n {
                return Err(DatasetError::ColumnLength {
                    name: name.clone(),
                    expected: n,
                    found: col.len(),
                });
            }
        }
        named.sort_by(|a, b| natural_name_cmp(&a.0, &b.0));
        let (names, columns): (Vec<String>, Vec<BitVec>) = named.into_iter().unzip();
        let supports = columns.iter().map(BitVec::count_ones).collect();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), Attr(i as u32)))
            .collect();
        Ok(Dataset {
            n,
            names,
            columns,
            supports,
            index,
        })
    }

    /// Builds a dataset from rows of attribute names (each row a transaction).
    pub fn from_transactions<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Dataset, DatasetError> {
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut order: Vec<&str> = Vec::new();
        for row in rows {
            for item in row {
                let s = item.as_ref();
                if !ids.contains_key(s) {
                    ids.insert(s, order.len());
                    order.push(s);
                }
            }
        }
        let n = rows.len();
        let mut cols = vec![BitVec::zeros(n); order.len()];
        for (r, row) in rows.iter().enumerate() {
            for item in row {
                cols[ids[item.as_ref()]].set(r);
            }
        }
        let named = order.into_iter().map(str::to_string).zip(cols).collect();
        Dataset::from_columns(n, named)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_attrs(&self) -> usize {
        self.names.len()
    }

    pub fn attrs(&self) -> impl Iterator<Item = Attr> + '_ {
        (0..self.names.len() as u32).map(Attr)
    }

    pub fn name(&self, a: Attr) -> &str {
        &self.names[a.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn attr(&self, name: &str) -> Result<Attr, DatasetError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| DatasetError::UnknownAttribute(name.to_string()))
    }

    pub fn attr_set<S: AsRef<str>>(&self, names: &[S]) -> Result<AttributeSet, DatasetError> {
        names.iter().map(|s| self.attr(s.as_ref())).collect()
    }

    pub fn column(&self, a: Attr) -> &BitVec {
        &self.columns[a.index()]
    }

    pub fn attr_support(&self, a: Attr) -> u64 {
        self.supports[a.index()]
    }

    /// Constant attributes (support 0 or n) carry no dependency and are never
    /// used as rule components.
    pub fn is_degenerate(&self, a: Attr) -> bool {
        let s = self.attr_support(a);
        s == 0 || s == self.n as u64
    }

    pub fn non_degenerate(&self) -> Vec<Attr> {
        self.attrs().filter(|&a| !self.is_degenerate(a)).collect()
    }

    /// Whether mining can run: at least two rows and two non-constant attributes.
    pub fn is_usable(&self) -> bool {
        self.n >= 2 && self.non_degenerate().len() >= 2
    }

    /// Mean number of distinct items per row.
    pub fn mean_transaction_length(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.supports.iter().sum::<u64>() as f64 / self.n as f64
    }

    fn check(&self, s: &AttributeSet) -> Result<(), DatasetError> {
        match s.members().iter().find(|a| a.index() >= self.names.len()) {
            Some(a) => Err(DatasetError::UnknownAttribute(a.to_string())),
            None => Ok(()),
        }
    }

    /// Rows where every member of `s` is 1. The empty set covers every row.
    pub fn cover(&self, s: &AttributeSet) -> BitVec {
        let mut it = s.members().iter();
        match it.next() {
            None => BitVec::ones(self.n),
            Some(&first) => {
                let mut acc = self.columns[first.index()].clone();
                for &a in it {
                    acc.and_assign(&self.columns[a.index()]);
                }
                acc
            }
        }
    }

    pub fn support(&self, s: &AttributeSet) -> Result<u64, DatasetError> {
        self.check(s)?;
        Ok(match s.members() {
            [] => self.n as u64,
            [a] => self.attr_support(*a),
            [a, b] => self.column(*a).count_and(self.column(*b)),
            _ => self.cover(s).count_ones(),
        })
    }

    /// Rows covered by `cover` that have consequent `c` at `polarity`.
    pub fn count_with(&self, cover: &BitVec, support: u64, c: Attr, polarity: Polarity) -> u64 {
        polarity.count(cover.count_and(self.column(c)), support)
    }

    /// `(n_q, n_c, n_qc)` for the rule `q -> c = polarity`.
    pub fn rule_counts(&self, q: &AttributeSet, c: Attr, polarity: Polarity) -> Result<(u64, u64, u64), DatasetError> {
        self.check(q)?;
        self.check(&AttributeSet::singleton(c))?;
        if q.contains(c) {
            return Err(DatasetError::ConsequentInAntecedent(self.name(c).to_string()));
        }
        let cover = self.cover(q);
        let n_q = cover.count_ones();
        let n_c = polarity.count(self.attr_support(c), self.n as u64);
        let n_qc = self.count_with(&cover, n_q, c, polarity);
        Ok((n_q, n_c, n_qc))
    }

    /// The aligned joint frequency table of rules `x -> c` and `q -> c`, with
    /// every count involving the consequent taken at `polarity`.
    pub fn pair_counts(
        &self,
        x: &AttributeSet,
        q: &AttributeSet,
        c: Attr,
        polarity: Polarity,
    ) -> Result<PairCounts, DatasetError> {
        self.check(x)?;
        self.check(q)?;
        self.check(&AttributeSet::singleton(c))?;
        if x.contains(c) || q.contains(c) {
            return Err(DatasetError::ConsequentInAntecedent(self.name(c).to_string()));
        }
        let n = self.n as u64;
        let cx = self.cover(x);
        let cq = self.cover(q);
        let cxq = cx.and(&cq);
        let n_x = cx.count_ones();
        let n_q = cq.count_ones();
        let n_xq = cxq.count_ones();
        let pc = PairCounts {
            n,
            n_x,
            n_q,
            n_c: polarity.count(self.attr_support(c), n),
            n_xq,
            n_xc: self.count_with(&cx, n_x, c, polarity),
            n_qc: self.count_with(&cq, n_q, c, polarity),
            n_xqc: self.count_with(&cxq, n_xq, c, polarity),
            polarity_q: polarity,
            polarity_x: polarity,
        };
        assert!(pc.is_consistent(), "inconsistent pair counts {pc:?}");
        Ok(pc)
    }

    pub fn load_fimi(path: &Path) -> Result<Dataset, DatasetError> {
        let text = read(path)?;
        Dataset::parse_fimi(&text)
    }

    /// One transaction per line of whitespace-separated integer item ids.
    /// Every line, including blank ones, is a row; a single trailing newline
    /// does not add a row.
    pub fn parse_fimi(text: &str) -> Result<Dataset, DatasetError> {
        let mut rows: Vec<Vec<u64>> = Vec::new();
        let mut items = BTreeSet::new();
        let body = text.strip_suffix('\n').unwrap_or(text);
        if !body.is_empty() || text.len() > body.len() {
            for (i, line) in body.split('\n').enumerate() {
                let mut row = Vec::new();
                for tok in line.split_whitespace() {
                    let id: u64 = tok.parse().map_err(|_| DatasetError::BadToken {
                        line: i + 1,
                        token: tok.to_string(),
                    })?;
                    row.push(id);
                    items.insert(id);
                }
                rows.push(row);
            }
        }
        let n = rows.len();
        let dense: HashMap<u64, usize> = items.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut cols = vec![BitVec::zeros(n); items.len()];
        for (r, row) in rows.iter().enumerate() {
            for id in row {
                cols[dense[id]].set(r);
            }
        }
        let named = items.iter().map(u64::to_string).zip(cols).collect();
        Dataset::from_columns(n, named)
    }

    pub fn load_csv(path: &Path) -> Result<Dataset, DatasetError> {
        let text = read(path)?;
        Dataset::parse_csv(&text)
    }

    /// Header row of attribute names, body cells exactly `0` or `1`.
    pub fn parse_csv(text: &str) -> Result<Dataset, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(text.as_bytes());
        let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        let k = header.len();
        let mut bits: Vec<Vec<bool>> = vec![Vec::new(); k];
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = r + 2;
            if rec.len() != k {
                return Err(DatasetError::Ragged {
                    line,
                    expected: k,
                    found: rec.len(),
                });
            }
            for (j, cell) in rec.iter().enumerate() {
                let v = match cell.trim() {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(DatasetError::BadCell {
                            line,
                            column: header[j].clone(),
                            value: other.to_string(),
                        })
                    }
                };
                bits[j].push(v);
            }
        }
        let n = bits.first().map_or(0, Vec::len);
        let named = header
            .into_iter()
            .zip(bits.iter().map(|b| BitVec::from_bools(b)))
            .collect();
        Dataset::from_columns(n, named)
    }

    /// Writes rows as FIMI transactions using attribute names as item ids.
    pub fn write_fimi<W: Write>(&self, mut w: W) -> io::Result<()> {
        for r in 0..self.n {
            let items: Vec<&str> = self
                .attrs()
                .filter(|&a| self.column(a).get(r))
                .map(|a| self.name(a))
                .collect();
            writeln!(w, "{}", items.join(" "))?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.names.join(","))?;
        for r in 0..self.n {
            let cells: Vec<&str> = self.columns.iter().map(|c| if c.get(r) { "1" } else { "0" }).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Dataset {
        Dataset::parse_fimi("1 2\n2 3\n1 2 3\n").unwrap()
    }

    #[test]
    fn fimi_fixture_counts() {
        let d = fixture();
        assert_eq!(d.n(), 3);
        assert_eq!(d.n_attrs(), 3);
        assert_eq!(d.support(&d.attr_set(&["2"]).unwrap()).unwrap(), 3);
        assert_eq!(d.support(&d.attr_set(&["1"]).unwrap()).unwrap(), 2);
        assert_eq!(d.support(&d.attr_set(&["1", "2"]).unwrap()).unwrap(), 2);
        assert_eq!(d.support(&AttributeSet::empty()).unwrap(), 3);
    }

    #[test]
    fn fimi_empty_and_blank_lines() {
        let d = Dataset::parse_fimi("").unwrap();
        assert_eq!((d.n(), d.n_attrs()), (0, 0));
        assert!(!d.is_usable());

        // blank rows are transactions too
        let d = Dataset::parse_fimi("1 2\n\n2\r\n").unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.attr_support(d.attr("2").unwrap()), 2);
    }

    #[test]
    fn fimi_duplicates_collapse_and_ids_remap() {
        let d = Dataset::parse_fimi("7 7 100\n100 3  \n").unwrap();
        assert_eq!(d.names(), &["3", "7", "100"]);
        assert_eq!(d.attr_support(d.attr("7").unwrap()), 1);
        assert!((d.mean_transaction_length() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn fimi_bad_token_reports_line() {
        match Dataset::parse_fimi("1 2\n3 x\n") {
            Err(DatasetError::BadToken { line, token }) => {
                assert_eq!(line, 2);
                assert_eq!(token, "x");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(Dataset::parse_fimi("1 -2\n").is_err());
    }

    #[test]
    fn csv_identity_and_errors() {
        let d = Dataset::parse_csv("a,b\n1,0\n0,1\n").unwrap();
        assert_eq!((d.n(), d.n_attrs()), (2, 2));
        assert_eq!(d.attr_support(d.attr("a").unwrap()), 1);

        let d = Dataset::parse_csv("a,b\n").unwrap();
        assert_eq!(d.n(), 0);
        assert!(!d.is_usable());

        assert!(matches!(
            Dataset::parse_csv("a,b\n1,0\n1\n"),
            Err(DatasetError::Ragged { line: 3, .. })
        ));
        assert!(matches!(
            Dataset::parse_csv("a,b\n1,2\n"),
            Err(DatasetError::BadCell { .. })
        ));
        assert!(matches!(
            Dataset::parse_csv("a,a\n1,0\n"),
            Err(DatasetError::DuplicateName(_))
        ));
    }

    #[test]
    fn csv_matches_fimi_on_fixture() {
        let f = fixture();
        let c = Dataset::parse_csv("1,2,3\n1,1,0\n0,1,1\n1,1,1\n").unwrap();
        for mask in 0u32..8 {
            let names: Vec<String> = (0..3)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| (i + 1).to_string())
                .collect();
            assert_eq!(
                f.support(&f.attr_set(&names).unwrap()).unwrap(),
                c.support(&c.attr_set(&names).unwrap()).unwrap()
            );
        }
    }

    #[test]
    fn unknown_attribute_is_an_error() {
        let d = fixture();
        assert!(d.attr("9").is_err());
        assert!(d.support(&AttributeSet::singleton(Attr(17))).is_err());
    }

    #[test]
    fn pair_counts_identical_sets() {
        let d = fixture();
        let x = d.attr_set(&["1"]).unwrap();
        let c = d.attr("3").unwrap();
        let pc = d.pair_counts(&x, &x, c, Polarity::One).unwrap();
        assert_eq!(pc.n_x, pc.n_q);
        assert_eq!(pc.n_x, pc.n_xq);
        assert_eq!(pc.n_xc, pc.n_qc);
        assert_eq!(pc.n_xc, pc.n_xqc);
        assert!(d.pair_counts(&x, &x, d.attr("1").unwrap(), Polarity::One).is_err());
    }

    #[test]
    fn pair_counts_complement_cover() {
        let d = Dataset::parse_csv("x,q,c\n1,0,1\n1,0,0\n0,1,1\n0,1,1\n").unwrap();
        let pc = d
            .pair_counts(
                &d.attr_set(&["x"]).unwrap(),
                &d.attr_set(&["q"]).unwrap(),
                d.attr("c").unwrap(),
                Polarity::One,
            )
            .unwrap();
        assert_eq!(pc.n_xq, 0);
        assert_eq!(pc.n_x + pc.n_q, pc.n);
    }

    #[test]
    fn attribute_order_is_input_independent() {
        let a = Dataset::parse_csv("b,a,10,9\n1,0,1,0\n0,1,1,1\n").unwrap();
        let b = Dataset::parse_csv("9,a,b,10\n0,0,1,1\n1,1,0,1\n").unwrap();
        assert_eq!(a.names(), b.names());
        assert_eq!(a.names(), &["9", "10", "a", "b"]);
        for x in a.attrs() {
            assert_eq!(a.column(x), b.column(x));
        }
    }
}
