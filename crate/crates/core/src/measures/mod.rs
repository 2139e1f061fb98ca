//! Dependency measures for rules `Q -> C=c` and for pairs of rules sharing a
//! consequent: leverage, conditional leverage, (signed conditional) mutual
//! information and Birch's exact test.
//!
//! Mutual information is count-scaled, `n * I(Q;C)` in nats, so that values
//! are comparable with log-likelihood ratio statistics (`2 n I`).

mod birch;
mod info;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Polarity;

pub use birch::{birch_p, birch_p_nested_sub, birch_p_nested_super, log_hypergeom_point, LogFactorials};
pub use info::{conditional_mi, mi_counts, mi_upper_bound, rule_mi, signed_conditional_mi, unit_scale};

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("zero rows")]
    NoRows,
    #[error("inconsistent counts: {0}")]
    Inconsistent(String),
    #[error("degenerate marginal: an attribute is constant")]
    Degenerate,
    #[error("infeasible margins: {0}")]
    Infeasible(String),
}

/// Joint frequencies of a rule pair `X -> C` and `Q -> C` sharing the
/// consequent attribute. Counts involving `C` are taken at `polarity_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PairCounts {
    pub n: u64,
    pub n_x: u64,
    pub n_q: u64,
    pub n_c: u64,
    pub n_xq: u64,
    pub n_xc: u64,
    pub n_qc: u64,
    pub n_xqc: u64,
    pub polarity_q: Polarity,
    pub polarity_x: Polarity,
}

/// The eight cells of the `X x Q x C` cube (`n` prefix = negated).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cells {
    pub xqc: i64,
    pub xq_nc: i64,
    pub x_nqc: i64,
    pub x_nq_nc: i64,
    pub nxqc: i64,
    pub nxq_nc: i64,
    pub nx_nqc: i64,
    pub nx_nq_nc: i64,
}

impl Cells {
    pub fn as_array(&self) -> [i64; 8] {
        [
            self.xqc,
            self.xq_nc,
            self.x_nqc,
            self.x_nq_nc,
            self.nxqc,
            self.nxq_nc,
            self.nx_nqc,
            self.nx_nq_nc,
        ]
    }
}

impl PairCounts {
    /// Convenience constructor with both polarities set to one.
    #[allow(clippy::too_many_arguments)]
    pub fn new(n: u64, n_x: u64, n_q: u64, n_c: u64, n_xq: u64, n_xc: u64, n_qc: u64, n_xqc: u64) -> Self {
        PairCounts {
            n,
            n_x,
            n_q,
            n_c,
            n_xq,
            n_xc,
            n_qc,
            n_xqc,
            polarity_q: Polarity::One,
            polarity_x: Polarity::One,
        }
    }

    pub fn with_mediator_polarity(mut self, p: Polarity) -> Self {
        self.polarity_x = p;
        self
    }

    /// Builds the table from its eight cells, in `Cells` field order.
    pub fn from_cells(c: [u64; 8]) -> Self {
        let [xqc, xq_nc, x_nqc, x_nq_nc, nxqc, nxq_nc, nx_nqc, _] = c;
        PairCounts::new(
            c.iter().sum(),
            xqc + xq_nc + x_nqc + x_nq_nc,
            xqc + xq_nc + nxqc + nxq_nc,
            xqc + x_nqc + nxqc + nx_nqc,
            xqc + xq_nc,
            xqc + x_nqc,
            xqc + nxqc,
            xqc,
        )
    }

    pub fn cells(&self) -> Cells {
        let [n, n_x, n_q, n_c, n_xq, n_xc, n_qc, n_xqc] = [
            self.n, self.n_x, self.n_q, self.n_c, self.n_xq, self.n_xc, self.n_qc, self.n_xqc,
        ]
        .map(|v| v as i64);
        Cells {
            xqc: n_xqc,
            xq_nc: n_xq - n_xqc,
            x_nqc: n_xc - n_xqc,
            x_nq_nc: n_x - n_xq - n_xc + n_xqc,
            nxqc: n_qc - n_xqc,
            nxq_nc: n_q - n_xq - n_qc + n_xqc,
            nx_nqc: n_c - n_xc - n_qc + n_xqc,
            nx_nq_nc: n - n_x - n_q - n_c + n_xq + n_xc + n_qc - n_xqc,
        }
    }

    /// All eight implied cells are non-negative.
    pub fn is_consistent(&self) -> bool {
        self.cells().as_array().iter().all(|&v| v >= 0)
    }

    pub fn validate(&self) -> Result<(), MeasureError> {
        if self.n == 0 {
            return Err(MeasureError::NoRows);
        }
        if !self.is_consistent() {
            return Err(MeasureError::Inconsistent(format!("{self:?}")));
        }
        Ok(())
    }

    /// The same table with the roles of `X` and `Q` exchanged.
    pub fn swapped(&self) -> PairCounts {
        PairCounts {
            n_x: self.n_q,
            n_q: self.n_x,
            n_xc: self.n_qc,
            n_qc: self.n_xc,
            polarity_q: self.polarity_x,
            polarity_x: self.polarity_q,
            ..*self
        }
    }

    pub fn n_not_x(&self) -> u64 {
        self.n - self.n_x
    }

    pub fn p(&self, count: u64) -> f64 {
        count as f64 / self.n as f64
    }
}

/// Conditional evidence of one rule given another.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalStats {
    pub delta1: f64,
    pub delta2: f64,
    pub mi_s: f64,
    pub p_b: Option<f64>,
}

/// The registered goodness measure: mutual information with its signed
/// conditional counterpart. Both increase with goodness.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    #[default]
    SignedMutualInformation,
}

impl MeasureKind {
    pub fn increasing_by_goodness(self) -> bool {
        true
    }

    pub fn marginal(self, n: u64, n_q: u64, n_c: u64, n_qc: u64) -> f64 {
        mi_counts(n, n_q, n_c, n_qc)
    }

    /// Unsigned conditional value of `Q -> C` given `X -> C`.
    pub fn conditional(self, pc: &PairCounts) -> f64 {
        let (a, b) = conditional_mi(pc);
        a + b
    }

    /// Signed conditional value used against the speciousness threshold.
    pub fn signed_conditional(self, pc: &PairCounts) -> f64 {
        signed_conditional_mi(pc)
    }
}

fn check_margins(n: u64, n_q: u64, n_c: u64, n_qc: u64) -> Result<(), MeasureError> {
    if n == 0 {
        return Err(MeasureError::NoRows);
    }
    if n_q > n || n_c > n || n_qc > n_q.min(n_c) || n_q + n_c > n + n_qc {
        return Err(MeasureError::Inconsistent(format!(
            "n={n} n_q={n_q} n_c={n_c} n_qc={n_qc}"
        )));
    }
    Ok(())
}

/// `n * n_qc - n_q * n_c`, the numerator of leverage scaled by `n^2`.
#[inline]
pub fn leverage_numerator(n: u64, n_q: u64, n_c: u64, n_qc: u64) -> i128 {
    n as i128 * n_qc as i128 - n_q as i128 * n_c as i128
}

pub(crate) fn leverage_unchecked(n: u64, n_q: u64, n_c: u64, n_qc: u64) -> f64 {
    leverage_numerator(n, n_q, n_c, n_qc) as f64 / (n as f64 * n as f64)
}

/// `P(Q,C) - P(Q)P(C)`.
pub fn leverage(n: u64, n_q: u64, n_c: u64, n_qc: u64) -> Result<f64, MeasureError> {
    check_margins(n, n_q, n_c, n_qc)?;
    Ok(leverage_unchecked(n, n_q, n_c, n_qc))
}

/// Exact sign of the conditional leverage of `Q -> C` in the stratum `X`.
pub fn delta1_sign(pc: &PairCounts) -> Ordering {
    if pc.n_x == 0 {
        return Ordering::Equal;
    }
    (pc.n_x as u128 * pc.n_xqc as u128).cmp(&(pc.n_xq as u128 * pc.n_xc as u128))
}

/// Exact sign of the conditional leverage of `Q -> C` in the stratum `not X`.
pub fn delta2_sign(pc: &PairCounts) -> Ordering {
    let c = pc.cells();
    let nx = pc.n_not_x() as i128;
    if nx == 0 {
        return Ordering::Equal;
    }
    let nxq = (c.nxqc + c.nxq_nc) as i128;
    let nxc = (c.nxqc + c.nx_nqc) as i128;
    (nx * c.nxqc as i128).cmp(&(nxq * nxc))
}

/// Conditional leverages `(delta1, delta2)` of `Q -> C` given `X` and given
/// `not X`. An empty stratum has conditional leverage zero.
pub fn conditional_leverages(pc: &PairCounts) -> (f64, f64) {
    let c = pc.cells();
    let n = pc.n as f64;
    let d1 = if pc.n_x == 0 {
        0.0
    } else {
        let num = pc.n_x as i128 * pc.n_xqc as i128 - pc.n_xq as i128 * pc.n_xc as i128;
        num as f64 / (n * pc.n_x as f64)
    };
    let nnx = pc.n_not_x();
    let d2 = if nnx == 0 {
        0.0
    } else {
        let nxq = (c.nxqc + c.nxq_nc) as i128;
        let nxc = (c.nxqc + c.nx_nqc) as i128;
        let num = nnx as i128 * c.nxqc as i128 - nxq * nxc;
        num as f64 / (n * nnx as f64)
    };
    (d1, d2)
}

/// Conditional leverages, signed MI and (optionally) Birch's p-value.
pub fn conditional_stats(pc: &PairCounts, lf: Option<&LogFactorials>) -> ConditionalStats {
    let (delta1, delta2) = conditional_leverages(pc);
    ConditionalStats {
        delta1,
        delta2,
        mi_s: signed_conditional_mi(pc),
        p_b: lf.map(|lf| lf.birch_p(pc).expect("consistent pair counts")),
    }
}
