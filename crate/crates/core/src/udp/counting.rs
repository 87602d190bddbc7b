//! Integer bookkeeping for unknowns and equations of the phase system.

/// `C(x, 2)`.
pub fn binomial2(x: i128) -> i128 {
    x * (x - 1) / 2
}

/// Number of complex pair variables for Schmidt rank `r`.
pub fn complex_unknowns(r: usize) -> usize {
    r * r.saturating_sub(1) / 2
}

/// `C(dA,2)(dC^2 - 1) + C(dB,2)(dD^2 - 1)`.
pub fn predicted_equation_count(da: usize, db: usize, dc: usize, dd: usize) -> usize {
    let term = |x: usize, y: usize| x * x.saturating_sub(1) / 2 * (y * y - 1);
    term(da, dc) + term(db, dd)
}

fn pow(d: i128, e: u32) -> i128 {
    d.pow(e)
}

/// Equations minus unknowns when both halves hold `n` qudits and `|A| = a`,
/// `|B| = |C| = n - a`, `|D| = a`.
pub(crate) fn surplus_at(n: u32, d: i128, a: u32) -> i128 {
    let equations = binomial2(pow(d, a)) * (pow(d, 2 * (n - a)) - 1)
        + binomial2(pow(d, n - a)) * (pow(d, 2 * a) - 1);
    equations - binomial2(pow(d, n))
}

/// Minimum surplus over `1 <= |A| <= n - 1`, counted directly.
pub fn worst_case_surplus_direct(n: u32, d: i128) -> i128 {
    (1..n).map(|a| surplus_at(n, d, a)).min().expect("n >= 2")
}

/// `(d^2n - d^(2n-1) - d^(2n-2) - d^(n+1) + d^n + d^(n-1) - d^2 + d) / 2`.
pub fn worst_case_surplus_closed_form(n: u32, d: i128) -> i128 {
    let twice = pow(d, 2 * n) - pow(d, 2 * n - 1) - pow(d, 2 * n - 2) - pow(d, n + 1)
        + pow(d, n)
        + pow(d, n - 1)
        - d * d
        + d;
    twice / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_qubit_counts() {
        assert_eq!(complex_unknowns(8), 28);
        assert_eq!(predicted_equation_count(4, 2, 2, 4), 33);
        assert_eq!(surplus_at(3, 2, 2), 5);
        assert_eq!(surplus_at(3, 2, 1), 5);
    }

    #[test]
    fn two_qubit_halves_have_zero_surplus() {
        assert_eq!(worst_case_surplus_closed_form(2, 2), 0);
        assert_eq!(worst_case_surplus_direct(2, 2), 0);
    }

    #[test]
    fn closed_form_matches_direct() {
        for n in 2..=8 {
            for d in 2..=6 {
                assert_eq!(
                    worst_case_surplus_closed_form(n, d),
                    worst_case_surplus_direct(n, d),
                    "n={n} d={d}"
                );
            }
        }
    }

    #[test]
    fn rank_below_two_has_no_unknowns() {
        assert_eq!(complex_unknowns(0), 0);
        assert_eq!(complex_unknowns(1), 0);
    }
}
