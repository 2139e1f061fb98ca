//! Birch's exact test of conditional independence of `Q` and `C` given `X`.
//!
//! With `n, n_x, n_xc, n_xq, n_q, n_c` fixed, the counts `i = N_xqc` and
//! `j = N_¬xqc` are independent hypergeometric variables, one per stratum.
//! The p-value is `P(i + j >= n_qc)`. Everything runs in log space.

use super::{MeasureError, PairCounts};

/// `ln k!` for `k = 0..=n`, built once and shared read-only.
#[derive(Clone, Debug)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(n: u64) -> Self {
        let mut table = Vec::with_capacity(n as usize + 1);
        table.push(0.0);
        // compensated summation keeps the table accurate for large n
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for k in 1..=n {
            let y = (k as f64).ln() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            table.push(sum);
        }
        LogFactorials { table }
    }

    pub fn max_n(&self) -> u64 {
        self.table.len() as u64 - 1
    }

    #[inline]
    pub fn ln_fact(&self, k: u64) -> f64 {
        self.table[k as usize]
    }

    /// `ln C(n, k)`, `-inf` when `k > n`.
    #[inline]
    pub fn ln_choose(&self, n: u64, k: u64) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.ln_fact(n) - self.ln_fact(k) - self.ln_fact(n - k)
    }

    fn ensure(&self, n: u64) -> Result<(), MeasureError> {
        if n > self.max_n() {
            return Err(MeasureError::Infeasible(format!(
                "table built for n <= {}, got {n}",
                self.max_n()
            )));
        }
        Ok(())
    }

    pub fn log_hypergeom_point(&self, pc: &PairCounts, i: u64, j: u64) -> Result<f64, MeasureError> {
        pc.validate()?;
        self.ensure(pc.n)?;
        let (sx, snx) = strata(pc);
        Ok(sx.ln_pmf(self, i) + snx.ln_pmf(self, j))
    }

    /// `ln P(N_qc >= n_qc)` under conditional independence given `X`.
    pub fn log_birch_p(&self, pc: &PairCounts) -> Result<f64, MeasureError> {
        pc.validate()?;
        self.ensure(pc.n)?;
        let (sx, snx) = strata(pc);
        let (lo1, hi1) = sx.range();
        let (lo2, hi2) = snx.range();
        if pc.n_qc <= lo1 + lo2 {
            return Ok(0.0);
        }
        // tail[t - lo2] = ln P(J >= t)
        let width = (hi2 - lo2 + 1) as usize;
        let mut tail = vec![f64::NEG_INFINITY; width];
        let mut acc = f64::NEG_INFINITY;
        for t in (lo2..=hi2).rev() {
            acc = log_add_exp(acc, snx.ln_pmf(self, t));
            tail[(t - lo2) as usize] = acc;
        }
        let mut total = f64::NEG_INFINITY;
        for i in lo1..=hi1 {
            let need = pc.n_qc.saturating_sub(i);
            if need > hi2 {
                continue;
            }
            let ln_tail = if need <= lo2 { 0.0 } else { tail[(need - lo2) as usize] };
            total = log_add_exp(total, sx.ln_pmf(self, i) + ln_tail);
        }
        Ok(total.min(0.0))
    }

    pub fn birch_p(&self, pc: &PairCounts) -> Result<f64, MeasureError> {
        self.log_birch_p(pc).map(f64::exp)
    }

    /// Single-stratum right tail: `P(I >= n_xzc)` for `I` hypergeometric with
    /// `n_xz` marked rows among `n_x`, `n_xc` drawn.
    pub fn birch_p_nested_super(&self, n_x: u64, n_xc: u64, n_xz: u64, n_xzc: u64) -> Result<f64, MeasureError> {
        let s = Stratum::new(n_x, n_xz, n_xc)?;
        self.ensure(n_x)?;
        let (lo, hi) = s.range();
        if n_xzc < lo || n_xzc > hi {
            return Err(MeasureError::Infeasible(format!("n_xzc={n_xzc} outside [{lo}, {hi}]")));
        }
        Ok(s.ln_upper_tail(self, n_xzc).exp())
    }

    /// Reduced test for `Q -> C` given its specialisation `QZ -> C`: the `QZ`
    /// stratum is fixed, only `j = N_q¬zc` varies in the `¬(QZ)` stratum.
    pub fn birch_p_nested_sub(
        &self,
        n: u64,
        n_c: u64,
        n_qz: u64,
        n_qzc: u64,
        n_q_notz: u64,
        n_q_notzc: u64,
    ) -> Result<f64, MeasureError> {
        if n_qzc > n_qz || n_qz > n || n_qzc > n_c || n_c - n_qzc > n - n_qz {
            return Err(MeasureError::Infeasible(format!(
                "n={n} n_c={n_c} n_qz={n_qz} n_qzc={n_qzc}"
            )));
        }
        self.ensure(n)?;
        let s = Stratum::new(n - n_qz, n_q_notz, n_c - n_qzc)?;
        let (lo, hi) = s.range();
        if n_q_notzc < lo || n_q_notzc > hi {
            return Err(MeasureError::Infeasible(format!(
                "n_q_notzc={n_q_notzc} outside [{lo}, {hi}]"
            )));
        }
        Ok(s.ln_upper_tail(self, n_q_notzc).exp())
    }
}

/// One stratum's hypergeometric: `marked` of `size` rows carry `Q`, `drawn`
/// carry `C`; the variable is the overlap.
#[derive(Clone, Copy, Debug)]
struct Stratum {
    size: u64,
    marked: u64,
    drawn: u64,
}

impl Stratum {
    fn new(size: u64, marked: u64, drawn: u64) -> Result<Self, MeasureError> {
        if marked > size || drawn > size {
            return Err(MeasureError::Infeasible(format!(
                "stratum size {size}, marked {marked}, drawn {drawn}"
            )));
        }
        Ok(Stratum { size, marked, drawn })
    }

    fn range(&self) -> (u64, u64) {
        let lo = (self.drawn + self.marked).saturating_sub(self.size);
        (lo, self.marked.min(self.drawn))
    }

    fn ln_pmf(&self, lf: &LogFactorials, k: u64) -> f64 {
        let (lo, hi) = self.range();
        if k < lo || k > hi {
            return f64::NEG_INFINITY;
        }
        lf.ln_choose(self.marked, k) + lf.ln_choose(self.size - self.marked, self.drawn - k)
            - lf.ln_choose(self.size, self.drawn)
    }

    fn ln_upper_tail(&self, lf: &LogFactorials, from: u64) -> f64 {
        let (lo, hi) = self.range();
        if from <= lo {
            return 0.0;
        }
        let mut acc = f64::NEG_INFINITY;
        for k in from..=hi {
            acc = log_add_exp(acc, self.ln_pmf(lf, k));
        }
        acc.min(0.0)
    }
}

fn strata(pc: &PairCounts) -> (Stratum, Stratum) {
    let c = pc.cells();
    let nnx = pc.n - pc.n_x;
    let sx = Stratum {
        size: pc.n_x,
        marked: pc.n_xq,
        drawn: pc.n_xc,
    };
    let snx = Stratum {
        size: nnx,
        marked: (c.nxqc + c.nxq_nc) as u64,
        drawn: (c.nxqc + c.nx_nqc) as u64,
    };
    (sx, snx)
}

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Birch's p-value with a table sized for this one call.
pub fn birch_p(pc: &PairCounts) -> Result<f64, MeasureError> {
    LogFactorials::new(pc.n).birch_p(pc)
}

pub fn birch_p_nested_super(n_x: u64, n_xc: u64, n_xz: u64, n_xzc: u64) -> Result<f64, MeasureError> {
    LogFactorials::new(n_x).birch_p_nested_super(n_x, n_xc, n_xz, n_xzc)
}

pub fn birch_p_nested_sub(
    n: u64,
    n_c: u64,
    n_qz: u64,
    n_qzc: u64,
    n_q_notz: u64,
    n_q_notzc: u64,
) -> Result<f64, MeasureError> {
    LogFactorials::new(n).birch_p_nested_sub(n, n_c, n_qz, n_qzc, n_q_notz, n_q_notzc)
}

/// `ln` of the point probability of the table `(i, j)`; `-inf` if infeasible.
pub fn log_hypergeom_point(pc: &PairCounts, i: u64, j: u64) -> Result<f64, MeasureError> {
    LogFactorials::new(pc.n).log_hypergeom_point(pc, i, j)
}
