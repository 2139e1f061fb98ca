use std::cmp::Ordering;

use super::{check_margins, delta1_sign, delta2_sign, MeasureError, PairCounts};

/// `cell * ln(total * cell / (row * col))`, zero for an empty cell.
#[inline]
fn term(cell: i64, row: i64, col: i64, total: i64) -> f64 {
    if cell <= 0 {
        return 0.0;
    }
    let cell = cell as f64;
    cell * ((total as f64 * cell) / (row as f64 * col as f64)).ln()
}

/// Count-scaled MI of a 2x2 table given by its four cells
/// `[qc, q¬c, ¬qc, ¬q¬c]`.
fn mi_table(a: i64, b: i64, c: i64, d: i64) -> f64 {
    let total = a + b + c + d;
    if total == 0 {
        return 0.0;
    }
    let (r1, r2) = (a + b, c + d);
    let (c1, c2) = (a + c, b + d);
    term(a, r1, c1, total) + term(b, r1, c2, total) + term(c, r2, c1, total) + term(d, r2, c2, total)
}

/// `n * I(Q;C)` in nats without validation. Degenerate margins give 0.
#[inline]
pub fn mi_counts(n: u64, n_q: u64, n_c: u64, n_qc: u64) -> f64 {
    let (n, n_q, n_c, n_qc) = (n as i64, n_q as i64, n_c as i64, n_qc as i64);
    mi_table(n_qc, n_q - n_qc, n_c - n_qc, n - n_q - n_c + n_qc)
}

/// Count-scaled mutual information `n * I(Q;C)` of a rule, in nats.
pub fn rule_mi(n: u64, n_q: u64, n_c: u64, n_qc: u64) -> Result<f64, MeasureError> {
    check_margins(n, n_q, n_c, n_qc)?;
    if n_q == 0 || n_q == n || n_c == 0 || n_c == n {
        return Err(MeasureError::Degenerate);
    }
    Ok(mi_counts(n, n_q, n_c, n_qc))
}

/// Converts a count-scaled value to per-row nats.
pub fn unit_scale(mi: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        mi / n as f64
    }
}

/// The two strata terms `(n * P(X) I(Q;C|X), n * P(¬X) I(Q;C|¬X))`.
pub fn conditional_mi(pc: &PairCounts) -> (f64, f64) {
    let c = pc.cells();
    (
        mi_table(c.xqc, c.xq_nc, c.x_nqc, c.x_nq_nc),
        mi_table(c.nxqc, c.nxq_nc, c.nx_nqc, c.nx_nq_nc),
    )
}

/// Conditional MI with each stratum term negated when that stratum's
/// conditional leverage is negative.
pub fn signed_conditional_mi(pc: &PairCounts) -> f64 {
    let (a, b) = conditional_mi(pc);
    let sign = |o: Ordering, v: f64| if o == Ordering::Less { -v } else { v };
    sign(delta1_sign(pc), a) + sign(delta2_sign(pc), b)
}

/// Largest MI any rule `Q' -> C` with `n_q'c <= n_q` can reach against a
/// consequent count `n_c`, where the rule expresses positive dependence.
///
/// The maximum over `s <= min(n_q, n_c)` of the perfect-inclusion table
/// `(n, s, n_c, s)` is attained at the largest `s`: that MI is increasing in
/// `s`, since the derivative of the `¬Q` stratum entropy is
/// `ln((n_c - s) / (n - s)) <= 0`.
pub fn mi_upper_bound(n_q: u64, n_c: u64, n: u64) -> f64 {
    let s = n_q.min(n_c);
    if s == 0 {
        return 0.0;
    }
    mi_counts(n, s, n_c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_mi_examples() {
        assert_eq!(rule_mi(100, 50, 40, 20).unwrap(), 0.0);
        let v = rule_mi(100, 50, 50, 50).unwrap();
        assert!((v - 100.0 * 2f64.ln()).abs() < 1e-12);
        // 30 ln 1.5 + 20 ln(2/3) + 10 ln 0.5 + 40 ln(4/3)
        let hand = 30.0 * 1.5f64.ln() + 20.0 * (2.0f64 / 3.0).ln() + 10.0 * 0.5f64.ln() + 40.0 * (4.0f64 / 3.0).ln();
        let v = rule_mi(100, 50, 40, 30).unwrap();
        assert!((v - hand).abs() < 1e-12);
        assert!((v - 8.6305).abs() < 1e-4);
        assert_eq!(rule_mi(100, 0, 40, 0), Err(MeasureError::Degenerate));
        assert_eq!(rule_mi(100, 50, 100, 50), Err(MeasureError::Degenerate));
    }

    #[test]
    fn polarity_does_not_change_mi() {
        let a = rule_mi(100, 50, 40, 30).unwrap();
        let b = rule_mi(100, 50, 60, 20).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn signed_mi_on_f1() {
        let pc = PairCounts::new(40, 20, 20, 20, 15, 15, 12, 11);
        let (a, b) = conditional_mi(&pc);
        assert!(a > 0.0 && b > 0.0);
        assert!((signed_conditional_mi(&pc) + a + b).abs() < 1e-15);
    }

    #[test]
    fn signed_mi_positive_branch_and_null() {
        // both strata positively dependent
        let pc = PairCounts::from_cells([8, 2, 2, 8, 6, 4, 4, 6]);
        let (a, b) = conditional_mi(&pc);
        assert!(a > 0.0 && b > 0.0);
        assert_eq!(signed_conditional_mi(&pc), a + b);
        // both strata conditionally independent
        let pc = PairCounts::from_cells([4, 4, 4, 4, 2, 6, 2, 6]);
        assert_eq!(conditional_mi(&pc), (0.0, 0.0));
        assert_eq!(signed_conditional_mi(&pc), 0.0);
    }

    #[test]
    fn upper_bound_examples() {
        assert_eq!(mi_upper_bound(0, 30, 100), 0.0);
        let v = mi_upper_bound(50, 50, 100);
        assert!((v - 100.0 * 2f64.ln()).abs() < 1e-12);
        // equals the explicit maximum over s
        for (nq, nc, n) in [(7u64, 20u64, 50u64), (40, 13, 90), (5, 5, 6), (60, 61, 120)] {
            let brute = (0..=nq.min(nc))
                .map(|s| mi_counts(n, s, nc, s))
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(mi_upper_bound(nq, nc, n), brute);
        }
    }
}
