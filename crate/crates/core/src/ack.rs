//! The fast-growing family `f_0(n) = n + 1`, `f_{k+1}(n) = f_k^{n+1}(n)`,
//! and its diagonal `f_A(n) = f_n(n)`, evaluated by literal unfolding.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

/// Default number of `f_0` applications allowed per evaluation.
pub const DEFAULT_WORK_BUDGET: u64 = 10_000_000;

/// Deepest level `k` that is unfolded before giving up.
pub const MAX_LEVEL: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AckError {
    #[error("budget exceeded (more than {0} successor applications)")]
    BudgetExceeded(u64),
    #[error("level {0} exceeds the maximum unfolding depth {MAX_LEVEL}")]
    TooDeep(u64),
}

/// `f_k(n)` with at most `budget` applications of `f_0`.
pub fn fast_growing(k: u64, n: &BigUint, budget: u64) -> Result<BigUint, AckError> {
    if k > MAX_LEVEL {
        return Err(AckError::TooDeep(k));
    }
    let mut left = budget;
    unfold(k, n.clone(), &mut left).ok_or(AckError::BudgetExceeded(budget))
}

fn unfold(k: u64, n: BigUint, left: &mut u64) -> Option<BigUint> {
    if k == 0 {
        *left = left.checked_sub(1)?;
        return Some(n + 1u32);
    }
    // Every application of f_{k-1} costs at least one f_0 application.
    let times = (&n + BigUint::one()).to_u64().filter(|t| t <= left)?;
    let mut v = n;
    for _ in 0..times {
        v = unfold(k - 1, v, left)?;
    }
    Some(v)
}

/// `f_k(n)` with the default budget.
pub fn ackermann(k: u64, n: u64) -> Result<BigUint, AckError> {
    fast_growing(k, &BigUint::from(n), DEFAULT_WORK_BUDGET)
}

/// `f_A(n) = f_n(n)` with the default budget.
pub fn ackermann_diagonal(n: u64) -> Result<BigUint, AckError> {
    ackermann(n, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(ackermann(0, 5).unwrap(), BigUint::from(6u32));
        assert_eq!(ackermann_diagonal(0).unwrap(), BigUint::from(1u32));
        assert_eq!(ackermann_diagonal(1).unwrap(), BigUint::from(3u32));
        assert_eq!(ackermann_diagonal(2).unwrap(), BigUint::from(23u32));
    }

    #[test]
    fn diagonal_three_is_infeasible() {
        assert_eq!(ackermann_diagonal(3), Err(AckError::BudgetExceeded(DEFAULT_WORK_BUDGET)));
    }

    #[test]
    fn level_one_closed_form() {
        for n in 0..=20u64 {
            assert_eq!(ackermann(1, n).unwrap(), BigUint::from(2 * n + 1));
        }
    }

    #[test]
    fn level_two_closed_form() {
        // f_2(n) = 2^(n+1) (n+1) - 1
        for n in 0..=10u64 {
            assert_eq!(ackermann(2, n).unwrap(), BigUint::from((1u64 << (n + 1)) * (n + 1) - 1));
        }
    }

    #[test]
    fn strictly_monotone() {
        for k in 0..3u64 {
            for n in 0..6u64 {
                assert!(ackermann(k, n).unwrap() < ackermann(k, n + 1).unwrap());
            }
            // f_k(0) = 1 for every k, so growth in k is strict from n = 1 on
            assert_eq!(ackermann(k, 0).unwrap(), BigUint::from(1u32));
            for n in 1..6u64 {
                if let Ok(up) = ackermann(k + 1, n) {
                    assert!(ackermann(k, n).unwrap() < up);
                }
            }
        }
    }

    #[test]
    fn tight_budget_and_depth() {
        assert_eq!(fast_growing(0, &BigUint::from(4u32), 1).unwrap(), BigUint::from(5u32));
        assert!(fast_growing(0, &BigUint::from(4u32), 0).is_err());
        assert_eq!(fast_growing(1, &BigUint::from(2u32), 3).unwrap(), BigUint::from(5u32));
        assert!(fast_growing(1, &BigUint::from(2u32), 2).is_err());
        assert_eq!(fast_growing(MAX_LEVEL + 1, &BigUint::from(0u32), 10), Err(AckError::TooDeep(MAX_LEVEL + 1)));
        assert_eq!(fast_growing(500, &BigUint::from(0u32), 10).unwrap(), BigUint::from(1u32));
    }
}
