//! Reference series: geometric, Koebe, and the totient Lambert series, with
//! exact partial sums and a certified tail bound. These serve as independent
//! checks for the tongue-measure computations.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::numberkit::real::Real;

/// Euler totient by trial division.
pub fn totient(n: u64) -> u64 {
    assert!(n >= 1);
    let mut r = n;
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            r -= r / p;
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        r -= r / m;
    }
    r
}

#[derive(Debug, Clone)]
pub struct ReferenceSums {
    /// `s / (1 - s)`
    pub geometric: Real,
    /// `s / (1 - s)^2`
    pub koebe: Real,
    /// Partial sum of `phi(n) s^n / (1 - s^n)` for `n <= n_max`.
    pub lambert_partial: Real,
    /// Certified bound on the omitted tail (the full series equals the
    /// Koebe sum).
    pub lambert_tail_bound: Real,
    pub n_max: u64,
}

/// Closed-form tail of `sum_{n > N} n x^n` for `0 < x < 1`:
/// `x^{N+1} ((N+1)(1-x) + x) / (1-x)^2`.
pub fn koebe_tail(x: &Real, n: u64) -> Real {
    let one = Real::one();
    let omx = &one - x;
    let np1 = Real::from_bigint(BigInt::from(n + 1));
    x.pow_i64((n + 1) as i64) * (&(&np1 * &omx) + x) / (&omx * &omx)
}

pub fn reference_sums(s: &Real, n_max: u64) -> Result<ReferenceSums> {
    let one = Real::one();
    if s.try_cmp(&Real::zero())? != std::cmp::Ordering::Greater
        || s.try_cmp(&one)? != std::cmp::Ordering::Less
    {
        return Err(Error::Domain("reference sums require 0 < s < 1".into()));
    }
    let oms = &one - s;
    let geometric = s / &oms;
    let koebe = s / &(&oms * &oms);

    let mut partial = Real::zero();
    let mut s_pow = one.clone();
    for n in 1..=n_max {
        s_pow = &s_pow * s;
        let phi = Real::from_bigint(BigInt::from(totient(n)));
        partial = &partial + &(&(&phi * &s_pow) / &(&one - &s_pow));
    }
    // phi(n) s^n/(1-s^n) <= n s^n / (1-s), so the tail is bounded by the
    // Koebe tail divided by (1-s).
    let tail = &koebe_tail(s, n_max) / &oms;
    Ok(ReferenceSums {
        geometric,
        koebe,
        lambert_partial: partial,
        lambert_tail_bound: tail,
        n_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Real {
        Real::ratio(p, q)
    }

    #[test]
    fn totient_small_table() {
        let expect = [1u64, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(totient(i as u64 + 1), *e);
        }
    }

    #[test]
    fn closed_forms_at_one_half() {
        let sums = reference_sums(&r(1, 2), 4).unwrap();
        assert_eq!(sums.geometric, Real::one());
        assert_eq!(sums.koebe, r(2, 1));
    }

    #[test]
    fn single_term_is_geometric() {
        for s in [r(1, 3), r(1, 2), r(7, 9)] {
            let sums = reference_sums(&s, 1).unwrap();
            assert_eq!(sums.lambert_partial, sums.geometric);
        }
    }

    #[test]
    fn lambert_partial_converges_to_koebe() {
        let sums = reference_sums(&r(1, 2), 40).unwrap();
        let gap = (&sums.koebe - &sums.lambert_partial).to_f64();
        assert!(gap > 0.0, "partial sums stay below the limit");
        assert!(gap < 1e-9, "gap was {gap}");
        // and the certified bound really covers the gap
        assert!(gap <= sums.lambert_tail_bound.to_f64());
    }
}
