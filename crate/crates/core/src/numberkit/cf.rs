//! Continued fractions: expansion (terminating, periodic, or certified),
//! convergents, intermediate fractions, shifted-expansion identities and
//! near approaches of `{jx}` to the ends of the unit interval.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numberkit::real::Real;

/// Simple continued fraction `[a0; a1, a2, ...]`.
///
/// `quotients` holds the partial quotients after `a0`. When `period` is
/// `Some(start)`, the tail `quotients[start..]` repeats forever (quadratic
/// irrationals); otherwise the expansion is exactly the finite list.
/// Finite canonical expansions never end in 1, except `[a0;]` itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub a0: BigInt,
    pub quotients: Vec<BigInt>,
    pub period: Option<usize>,
    pub source: Option<Real>,
}

/// Convergent `P_i / Q_i` of some expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub i: usize,
    pub p: BigInt,
    pub q: BigInt,
}

impl ContinuedFraction {
    pub fn is_finite(&self) -> bool {
        self.period.is_none()
    }

    /// Partial quotient `a_i` (`i >= 1`), unfolding the period as needed.
    /// `None` when a finite expansion is exhausted.
    pub fn quotient(&self, i: usize) -> Option<BigInt> {
        assert!(i >= 1);
        let idx = i - 1;
        if idx < self.quotients.len() {
            return Some(self.quotients[idx].clone());
        }
        let start = self.period?;
        let plen = self.quotients.len() - start;
        Some(self.quotients[start + (idx - start) % plen].clone())
    }

    /// Number of available quotients after `a0`; `None` means unbounded.
    pub fn len(&self) -> Option<usize> {
        if self.period.is_some() {
            None
        } else {
            Some(self.quotients.len())
        }
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty() && self.period.is_none()
    }

    /// Exact value of a finite expansion.
    pub fn fold(&self) -> Result<Real> {
        if !self.is_finite() {
            return Err(Error::Domain("cannot fold a periodic expansion".into()));
        }
        let mut acc: Option<BigRational> = None;
        for q in self.quotients.iter().rev() {
            let q = BigRational::from_integer(q.clone());
            acc = Some(match acc {
                None => q,
                Some(prev) => q + prev.recip(),
            });
        }
        let v = match acc {
            None => BigRational::from_integer(self.a0.clone()),
            Some(tail) => BigRational::from_integer(self.a0.clone()) + tail.recip(),
        };
        Ok(Real::from_rational(v))
    }
}

/// Expand `x` to at most `max_terms` partial quotients after `a0`.
///
/// Rationals terminate (canonical form, never ending in 1); quadratic surds
/// stop as soon as the period is detected; interval scalars emit only
/// quotients their error bound certifies.
pub fn cf_expand(x: &Real, max_terms: usize) -> Result<ContinuedFraction> {
    match x {
        Real::Rational(r) => expand_rational(r, x),
        Real::Surd(_) => expand_surd(x, max_terms),
        Real::Approx(_) => expand_interval(x, max_terms),
    }
}

fn expand_rational(r: &BigRational, source: &Real) -> Result<ContinuedFraction> {
    let a0 = r.floor().to_integer();
    let mut quotients = Vec::new();
    let mut rem = r - BigRational::from_integer(a0.clone());
    while !rem.is_zero() {
        let inv = rem.recip();
        let a = inv.floor().to_integer();
        quotients.push(a.clone());
        rem = inv - BigRational::from_integer(a);
    }
    debug_assert!(quotients.last().map(|a| !a.is_one()).unwrap_or(true));
    Ok(ContinuedFraction {
        a0,
        quotients,
        period: None,
        source: Some(source.clone()),
    })
}

fn expand_surd(x: &Real, max_terms: usize) -> Result<ContinuedFraction> {
    let s = match x {
        Real::Surd(s) => s,
        _ => unreachable!(),
    };
    // Write x = (P + sqrt(D)) / Q with Q | D - P^2.
    let denom_lcm = s.a.denom().lcm(s.b.denom());
    let a_int = s.a.numer() * (&denom_lcm / s.a.denom());
    let b_int = s.b.numer() * (&denom_lcm / s.b.denom());
    let (mut p, mut q) = if b_int.is_positive() {
        (a_int, denom_lcm)
    } else {
        (-a_int, -denom_lcm)
    };
    let mut d = &b_int * &b_int * BigInt::from(s.d);
    if !((&d - &p * &p) % &q).is_zero() {
        let qa = q.abs();
        p *= &qa;
        d *= &qa * &qa;
        q *= qa;
    }

    let value = |p: &BigInt, q: &BigInt, d_sqfree: u64, scale: &BigRational| -> Real {
        // (p + sqrt(D))/q where sqrt(D) = scale * sqrt(d_sqfree)
        let a = BigRational::new(p.clone(), q.clone());
        let b = scale / BigRational::from_integer(q.clone());
        &Real::from_rational(a)
            + &(&Real::from_rational(b)
                * &Real::sqrt_u64(d_sqfree).expect("small radicand"))
    };
    // sqrt(D) = |b_int| * adjust * sqrt(s.d); recompute the rational scale.
    // D may have been multiplied by q^2 above, so derive scale = sqrt(D / s.d).
    let scale_sq = &d / BigInt::from(s.d);
    let scale_int = {
        use num_integer::Roots;
        scale_sq.sqrt()
    };
    debug_assert_eq!(&scale_int * &scale_int, scale_sq);
    let scale = BigRational::from_integer(scale_int);

    let v0 = value(&p, &q, s.d, &scale);
    let a0 = v0.floor()?;
    let mut quotients = Vec::new();
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut pp = &a0 * &q - &p;
    let mut qq = (&d - &pp * &pp) / &q;
    let mut period = None;
    while quotients.len() < max_terms {
        if let Some(&start) = seen.get(&(pp.clone(), qq.clone())) {
            period = Some(start);
            break;
        }
        seen.insert((pp.clone(), qq.clone()), quotients.len());
        let v = value(&pp, &qq, s.d, &scale);
        let a = v.floor()?;
        quotients.push(a.clone());
        let p_next = &a * &qq - &pp;
        let q_next = (&d - &p_next * &p_next) / &qq;
        pp = p_next;
        qq = q_next;
    }
    Ok(ContinuedFraction {
        a0,
        quotients,
        period,
        source: Some(x.clone()),
    })
}

fn expand_interval(x: &Real, max_terms: usize) -> Result<ContinuedFraction> {
    let (mut lo, mut hi) = x.rational_bounds();
    let a0 = {
        let fl = lo.floor().to_integer();
        let fh = hi.floor().to_integer();
        if fl != fh {
            return Err(Error::PrecisionExhausted(
                "leading quotient not certified".into(),
            ));
        }
        fl
    };
    lo -= BigRational::from_integer(a0.clone());
    hi -= BigRational::from_integer(a0.clone());
    let mut quotients = Vec::new();
    while quotients.len() < max_terms {
        if lo.is_zero() && hi.is_zero() {
            break;
        }
        if !lo.is_positive() {
            return Err(Error::PrecisionExhausted(format!(
                "quotient {} not certified from the error bound",
                quotients.len() + 1
            )));
        }
        // invert: 1/[lo, hi] = [1/hi, 1/lo]
        let new_lo = hi.recip();
        let new_hi = lo.recip();
        let fl = new_lo.floor().to_integer();
        let fh = new_hi.floor().to_integer();
        if fl != fh || new_hi == BigRational::from_integer(fh.clone()) {
            return Err(Error::PrecisionExhausted(format!(
                "quotient {} not certified from the error bound",
                quotients.len() + 1
            )));
        }
        quotients.push(fl.clone());
        lo = new_lo - BigRational::from_integer(fl.clone());
        hi = new_hi - BigRational::from_integer(fl);
    }
    Ok(ContinuedFraction {
        a0,
        quotients,
        period: None,
        source: Some(x.clone()),
    })
}

/// Convergents `P_0/Q_0 ... P_upto/Q_upto` via the standard recurrences.
pub fn convergents(cf: &ContinuedFraction, upto: usize) -> Result<Vec<Convergent>> {
    if let Some(len) = cf.len() {
        if upto > len {
            return Err(Error::Domain(format!(
                "only {len} quotients available, requested index {upto}"
            )));
        }
    }
    let mut out = Vec::with_capacity(upto + 1);
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p, mut q) = (cf.a0.clone(), BigInt::one());
    out.push(Convergent {
        i: 0,
        p: p.clone(),
        q: q.clone(),
    });
    for i in 1..=upto {
        let a = cf
            .quotient(i)
            .ok_or_else(|| Error::Domain(format!("quotient {i} unavailable")))?;
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        out.push(Convergent {
            i,
            p: p.clone(),
            q: q.clone(),
        });
    }
    Ok(out)
}

/// One row of [`shifted_convergent_relations`]: the four identities tying the
/// convergents of `1/(x+1)` and `x/(x+1)` to those of `x`.
#[derive(Debug, Clone)]
pub struct ShiftRelationRow {
    pub i: usize,
    pub p_shift_matches: bool,
    pub q_shift_matches: bool,
    pub p_scale_matches: bool,
    pub q_scale_matches: bool,
}

impl ShiftRelationRow {
    pub fn all_pass(&self) -> bool {
        self.p_shift_matches
            && self.q_shift_matches
            && self.p_scale_matches
            && self.q_scale_matches
    }
}

/// For `0 < x < 1`, check `P'_i = Q_{i-1}`, `Q'_i = P_{i-1} + Q_{i-1}`,
/// `P''_i = P_i`, `Q''_i = P_i + Q_i` for `0 <= i <= upto`, where primes mark
/// the convergents of `1/(x+1)` and double primes those of `x/(x+1)`.
pub fn shifted_convergent_relations(x: &Real, upto: usize) -> Result<Vec<ShiftRelationRow>> {
    let zero = Real::zero();
    let one = Real::one();
    if x.try_cmp(&zero)? != Ordering::Greater || x.try_cmp(&one)? != Ordering::Less {
        return Err(Error::Domain("shift relations require 0 < x < 1".into()));
    }
    let budget = upto + 2;
    let cf = cf_expand(x, budget)?;
    let shifted = cf_expand(&(&one / &(x + &one)), budget)?;
    let scaled = cf_expand(&(&(x / &(x + &one))), budget)?;

    let base = convergents(&cf, upto.max(1))?;
    let prime = convergents(&shifted, upto)?;
    let dprime = convergents(&scaled, upto)?;

    let mut rows = Vec::new();
    for i in 0..=upto {
        // P_{-1} = 1, Q_{-1} = 0 precede the stored table.
        let (p_im1, q_im1) = if i == 0 {
            (BigInt::one(), BigInt::zero())
        } else {
            (base[i - 1].p.clone(), base[i - 1].q.clone())
        };
        let (p_i, q_i) = (base[i].p.clone(), base[i].q.clone());
        rows.push(ShiftRelationRow {
            i,
            p_shift_matches: prime[i].p == q_im1,
            q_shift_matches: prime[i].q == &p_im1 + &q_im1,
            p_scale_matches: dprime[i].p == p_i,
            q_scale_matches: dprime[i].q == &p_i + &q_i,
        });
    }
    Ok(rows)
}

/// Indices where `{jx}` sets a new record toward 0 or toward 1.
#[derive(Debug, Clone)]
pub struct NearApproaches {
    pub to_zero: Vec<(u64, Real)>,
    pub to_one: Vec<(u64, Real)>,
}

/// Brute-force record scan of `{jx}` for `j <= j_max`, cross-checked against
/// the intermediate-fraction rule (records toward 0 occur at
/// `j = Q_{i-2} + alpha Q_{i-1}` for even `i`, toward 1 for odd `i`).
pub fn near_approaches(x: &Real, j_max: u64) -> Result<NearApproaches> {
    if x.try_sign()? != Ordering::Greater {
        return Err(Error::Domain("near approaches require x > 0".into()));
    }
    let mut to_zero = Vec::new();
    let mut to_one = Vec::new();
    let mut best_low: Option<Real> = None;
    let mut best_high: Option<Real> = None;
    let mut jx = Real::zero();
    for j in 1..=j_max {
        jx = &jx + x;
        let f = jx.fract()?;
        let low_rec = match &best_low {
            None => true,
            Some(b) => f.try_cmp(b)? == Ordering::Less,
        };
        if low_rec {
            best_low = Some(f.clone());
            to_zero.push((j, f.clone()));
        }
        let high_rec = match &best_high {
            None => true,
            Some(b) => f.try_cmp(b)? == Ordering::Greater,
        };
        if high_rec {
            best_high = Some(f.clone());
            to_one.push((j, f.clone()));
        }
    }

    if x.is_exact() {
        let frac = x.fract()?;
        if !frac.is_zero_exact() {
            cross_check_near_approaches(&frac, j_max, &to_zero, &to_one)?;
        }
    }
    Ok(NearApproaches { to_zero, to_one })
}

/// Predicted record indices from the continued fraction of `{x}`.
fn cross_check_near_approaches(
    frac: &Real,
    j_max: u64,
    to_zero: &[(u64, Real)],
    to_one: &[(u64, Real)],
) -> Result<()> {
    let cf = cf_expand(frac, 64)?;
    let max_i = cf.len().unwrap_or(64).min(64);
    let convs = convergents(&cf, max_i)?;
    let q = |i: i64| -> BigInt {
        if i < 0 {
            BigInt::zero()
        } else {
            convs[i as usize].q.clone()
        }
    };
    let mut pred_zero = vec![1u64];
    let mut pred_one = vec![1u64];
    let finite_len = cf.len();
    for i in 1..=max_i {
        let Some(a_i) = cf.quotient(i) else { break };
        let a_i: u64 = match num_traits::ToPrimitive::to_u64(&a_i) {
            Some(v) => v,
            None => break,
        };
        for alpha in 1..=a_i {
            let j = q(i as i64 - 2) + BigInt::from(alpha) * q(i as i64 - 1);
            let Some(j) = num_traits::ToPrimitive::to_u64(&j) else {
                continue;
            };
            if j == 0 || j > j_max {
                continue;
            }
            // For rational x the very last index hits {jx} = 0 exactly, which
            // is a record toward 0 irrespective of the parity of i.
            let exact_hit = finite_len == Some(i) && alpha == a_i;
            if i % 2 == 0 || exact_hit {
                pred_zero.push(j);
            } else {
                pred_one.push(j);
            }
        }
    }
    pred_zero.sort_unstable();
    pred_zero.dedup();
    pred_one.sort_unstable();
    pred_one.dedup();
    // For rationals, record indices past the exact hit {qx} = 0 do not exist;
    // the predicted sets may not extend past j_max either. Compare as sets.
    let got_zero: Vec<u64> = to_zero.iter().map(|(j, _)| *j).collect();
    let got_one: Vec<u64> = to_one.iter().map(|(j, _)| *j).collect();
    if got_zero != pred_zero || got_one != pred_one {
        return Err(Error::CrossingAssertion {
            j: 0,
            detail: format!(
                "near-approach cross-check failed: got {:?}/{:?}, predicted {:?}/{:?}",
                got_zero, got_one, pred_zero, pred_one
            ),
        });
    }
    Ok(())
}

/// Floor inequality diagnostics for positive rationals `a, b, c`:
/// `floor(a/b) - floor(c) <= floor(a/b - floor(bc)/b) + 1`,
/// strict when `{a/b} + {bc}/b >= {c}` (with equality of the fractional
/// combination forcing equality without the `+1`).
#[derive(Debug, Clone, Copy)]
pub struct FloorInequality {
    pub holds: bool,
    pub strict: bool,
    pub fractional_equality_case: bool,
}

pub fn floor_inequality(a: &BigRational, b: &BigRational, c: &BigRational) -> FloorInequality {
    let frac = |r: &BigRational| r - r.floor();
    let ab = a / b;
    let bc = b * c;
    let lhs = ab.floor() - c.floor();
    let mid = &ab - bc.floor() / b;
    let rhs = mid.floor();
    let combo = frac(&ab) + frac(&bc) / b - frac(c);
    FloorInequality {
        holds: lhs <= &rhs + BigRational::one(),
        strict: if combo >= BigRational::zero() {
            lhs <= rhs
        } else {
            true // no claim made below the threshold
        },
        fractional_equality_case: if combo.is_zero() { lhs == rhs } else { true },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Real {
        Real::ratio(p, q)
    }

    fn quots(cf: &ContinuedFraction) -> Vec<i64> {
        cf.quotients
            .iter()
            .map(|q| num_traits::ToPrimitive::to_i64(q).unwrap())
            .collect()
    }

    #[test]
    fn expansion_of_two_fifths() {
        // long-division oracle: 2/5 = 0 + 1/(5/2) = 0 + 1/(2 + 1/2)
        let cf = cf_expand(&r(2, 5), 16).unwrap();
        assert_eq!(cf.a0, BigInt::from(0));
        assert_eq!(quots(&cf), vec![2, 2]);
        assert!(cf.is_finite());
    }

    #[test]
    fn expansion_of_an_integer_is_bare() {
        let cf = cf_expand(&Real::one(), 16).unwrap();
        assert_eq!(cf.a0, BigInt::from(1));
        assert!(cf.quotients.is_empty());
    }

    #[test]
    fn golden_conjugate_has_period_one() {
        let golden = (&Real::sqrt_u64(5).unwrap() - &Real::one()) / &r(2, 1);
        let cf = cf_expand(&golden, 24).unwrap();
        assert_eq!(cf.a0, BigInt::from(0));
        assert!(quots(&cf).iter().all(|&a| a == 1));
        // detected period: the repeating block is a single 1
        let start = cf.period.expect("period detected");
        assert_eq!(cf.quotients.len() - start, 1);
    }

    #[test]
    fn root_two_period() {
        let cf = cf_expand(&Real::sqrt_u64(2).unwrap(), 24).unwrap();
        assert_eq!(cf.a0, BigInt::from(1));
        assert!(quots(&cf).iter().all(|&a| a == 2));
        assert!(cf.period.is_some());
    }

    #[test]
    fn convergents_by_hand() {
        // 2/5 = [0;2,2]: 0/1, 1/2, 2/5
        let cf = cf_expand(&r(2, 5), 8).unwrap();
        let cs = convergents(&cf, 2).unwrap();
        let as_pairs: Vec<(i64, i64)> = cs
            .iter()
            .map(|c| {
                (
                    num_traits::ToPrimitive::to_i64(&c.p).unwrap(),
                    num_traits::ToPrimitive::to_i64(&c.q).unwrap(),
                )
            })
            .collect();
        assert_eq!(as_pairs, vec![(0, 1), (1, 2), (2, 5)]);

        // 5/7 = [0;1,2,2]: 0/1, 1/1, 2/3, 5/7
        let cf = cf_expand(&r(5, 7), 8).unwrap();
        let cs = convergents(&cf, 3).unwrap();
        let as_pairs: Vec<(i64, i64)> = cs
            .iter()
            .map(|c| {
                (
                    num_traits::ToPrimitive::to_i64(&c.p).unwrap(),
                    num_traits::ToPrimitive::to_i64(&c.q).unwrap(),
                )
            })
            .collect();
        assert_eq!(as_pairs, vec![(0, 1), (1, 1), (2, 3), (5, 7)]);

        // integer n: single convergent n/1
        let cf = cf_expand(&r(9, 1), 8).unwrap();
        let cs = convergents(&cf, 0).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].p, BigInt::from(9));
        assert_eq!(cs[0].q, BigInt::from(1));
    }

    #[test]
    fn shifted_relations_match_by_hand_tables() {
        // x = 2/5: convergents of 5/7 relate to those of 2/5
        let rows = shifted_convergent_relations(&r(2, 5), 2).unwrap();
        assert!(rows.iter().all(|row| row.all_pass()));

        // x = 1/2: 1/(x+1) = 2/3 = [0;1,2]
        let rows = shifted_convergent_relations(&r(1, 2), 1).unwrap();
        assert!(rows.iter().all(|row| row.all_pass()));

        // golden conjugate to depth 8
        let golden = (&Real::sqrt_u64(5).unwrap() - &Real::one()) / &r(2, 1);
        let rows = shifted_convergent_relations(&golden, 8).unwrap();
        assert!(rows.iter().all(|row| row.all_pass()));
    }

    #[test]
    fn shifted_relations_reject_out_of_range() {
        assert!(shifted_convergent_relations(&r(3, 2), 2).is_err());
    }

    #[test]
    fn near_approaches_brute_force_examples() {
        // x = 2/5, j <= 5: remainders .4 .8 .2 .6 0
        let na = near_approaches(&r(2, 5), 5).unwrap();
        let zeros: Vec<u64> = na.to_zero.iter().map(|(j, _)| *j).collect();
        let ones: Vec<u64> = na.to_one.iter().map(|(j, _)| *j).collect();
        assert_eq!(zeros, vec![1, 3, 5]);
        assert_eq!(ones, vec![1, 2]);
        assert!(na.to_zero.last().unwrap().1.is_zero_exact());

        // integer x: both records are just j = 1
        let na = near_approaches(&Real::one(), 6).unwrap();
        assert_eq!(na.to_zero.len(), 1);
        assert_eq!(na.to_one.len(), 1);

        // golden conjugate: records toward zero at Fibonacci indices
        let golden = (&Real::sqrt_u64(5).unwrap() - &Real::one()) / &r(2, 1);
        let na = near_approaches(&golden, 13).unwrap();
        let zeros: Vec<u64> = na.to_zero.iter().map(|(j, _)| *j).collect();
        assert_eq!(zeros, vec![1, 2, 5, 13]);
    }

    #[test]
    fn interval_expansion_certifies() {
        use num_rational::BigRational;
        let v = BigRational::new(BigInt::from(2), BigInt::from(5));
        let e = BigRational::new(BigInt::from(1), BigInt::from(1_000_000_000i64));
        let x = Real::approx(v, e);
        let cf = cf_expand(&x, 2).unwrap();
        assert_eq!(quots(&cf), vec![2, 2]);
        // asking for more terms than the bound certifies must fail
        assert!(cf_expand(&x, 10).is_err());
    }

    #[test]
    fn fold_round_trips() {
        let x = r(355, 113);
        let cf = cf_expand(&x, 32).unwrap();
        assert_eq!(cf.fold().unwrap(), x);
    }
}
