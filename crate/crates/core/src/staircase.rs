//! The increasing step functions that parametrize slope behavior, and the
//! tongues (open slope intervals) attached to rationals.
//!
//! For a contraction factor `s` in (0,1) the two functions are
//!
//! ```text
//! lower(x) = ((1-s)/s)^2 * sum_{j>=1} s^j ceil(jx)
//! upper(x) = (1-s)/s + ((1-s)/s)^2 * sum_{j>=1} s^j floor(jx)
//! ```
//!
//! They agree at irrationals and jump at every rational; the gap at a reduced
//! `k/n` has width `s^{n-2} (1-s)^2 / (1-s^n)`. Rational arguments evaluate
//! through three redundant closed forms that are cross-checked against each
//! other on every call; irrational arguments go through a truncated series
//! with a certified tail.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numberkit::{parse_decimal, totient, Real};

/// Which of the two step functions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

/// Evaluation context: the contraction factor and the target absolute error
/// for certified (non-exact) outputs.
#[derive(Debug, Clone)]
pub struct StaircaseParams {
    pub s: Real,
    pub precision: BigRational,
    pub term_cap: usize,
}

impl StaircaseParams {
    pub fn new(s: Real) -> Result<Self> {
        Self::with_precision(s, parse_decimal("1e-12").unwrap())
    }

    pub fn with_precision(s: Real, precision: BigRational) -> Result<Self> {
        if s.try_cmp(&Real::zero())? != Ordering::Greater
            || s.try_cmp(&Real::one())? != Ordering::Less
        {
            return Err(Error::Domain("contraction factor must satisfy 0 < s < 1".into()));
        }
        if !precision.is_positive() {
            return Err(Error::Domain("precision must be positive".into()));
        }
        Ok(StaircaseParams {
            s,
            precision,
            term_cap: 1_000_000,
        })
    }
}

/// The open slope interval attached to a reduced rational `k/n`.
#[derive(Debug, Clone, Serialize)]
pub struct Tongue {
    pub k: i64,
    pub n: u64,
    pub lower: Real,
    pub upper: Real,
    pub width: Real,
}

/// Evaluate the staircase function at `x`.
pub fn delta(params: &StaircaseParams, x: &Real, side: Side) -> Result<Real> {
    let t = x.floor()?;
    let frac = x - &Real::from_bigint(t.clone());
    let shift = &Real::from_bigint(t) / &params.s;
    let base = match &frac {
        f if f.is_zero_exact() => match side {
            Side::Minus => Real::zero(),
            Side::Plus => &(&Real::one() - &params.s) / &params.s,
        },
        Real::Rational(r) => {
            let (k, n) = reduced(r);
            delta_rational_unit(params, k, n, side)?
        }
        f => delta_irrational_unit(params, f)?,
    };
    Ok(&base + &shift)
}

fn reduced(r: &BigRational) -> (BigInt, BigInt) {
    (r.numer().clone(), r.denom().clone())
}

/// Closed-form evaluation for reduced `k/n` with `0 < k < n`, cross-checking
/// the three equivalent formulas whenever everything is exact.
fn delta_rational_unit(
    params: &StaircaseParams,
    k: BigInt,
    n: BigInt,
    side: Side,
) -> Result<Real> {
    let s = &params.s;
    let one = Real::one();
    let n_u = n
        .to_u64()
        .ok_or_else(|| Error::Domain("denominator too large".into()))?;
    let k_u = k
        .to_u64()
        .ok_or_else(|| Error::Domain("numerator out of range".into()))?;
    debug_assert!(k_u >= 1 && k_u < n_u);

    let oms = &one - s;
    let s_pow_n = s.pow_i64(n_u as i64);
    let one_minus_sn = &one - &s_pow_n;
    let width = &(&s.pow_i64(n_u as i64 - 2) * &(&oms * &oms)) / &one_minus_sn;

    // Route 1: the finite sum over residues r = 1..n-1 with ceil(rk/n).
    let mut ceil_sum = Real::zero();
    for r in 1..n_u {
        let ceil_rk_n = BigInt::from(r) * &k;
        let ceil_v = ceil_rk_n.div_ceil(&n);
        ceil_sum = &ceil_sum
            + &(&s.pow_i64(r as i64 - 2) * &Real::from_bigint(ceil_v));
    }
    let k_real = Real::from_bigint(k.clone());
    let lower_a = &(&(&k_real * &s.pow_i64(n_u as i64 - 2)) * &oms) / &one_minus_sn
        + &(&(&(&oms * &oms) / &one_minus_sn) * &ceil_sum);
    let upper_a = &lower_a + &width;

    if s.is_exact() {
        // Route 2: fold the floor(l n / k) series one period.
        let mut folded = Real::zero();
        for l in 0..k_u {
            let e = (BigInt::from(l) * &n).div_floor(&k);
            folded = &folded + &s.pow_i64(e.to_i64().expect("small exponent"));
        }
        let lower_b = &(&oms * &folded) / &(s * &one_minus_sn);
        assert!(
            (&lower_a - &lower_b).is_zero_exact(),
            "closed forms disagree at {k}/{n}"
        );

        // Route 3: the reciprocal-power sum over l = 1..k.
        let mut recip_sum = Real::zero();
        for l in 1..=k_u {
            let e = (BigInt::from(l - 1) * &n).div_floor(&k);
            recip_sum = &recip_sum + &s.pow_i64(-e.to_i64().expect("small exponent"));
        }
        let s2 = s * s;
        let lower_c = &(&(&(s - &s_pow_n) * &oms) / &(&s2 * &one_minus_sn))
            + &(&(&(&s_pow_n * &oms) / &(&s2 * &one_minus_sn)) * &recip_sum);
        let upper_c = &(&oms / s) + &(&(&(&s_pow_n * &oms) / &(&s2 * &one_minus_sn)) * &recip_sum);
        assert!(
            (&lower_a - &lower_c).is_zero_exact(),
            "closed forms disagree at {k}/{n}"
        );
        assert!(
            (&upper_a - &upper_c).is_zero_exact(),
            "closed forms disagree at {k}/{n}"
        );
    }

    Ok(match side {
        Side::Minus => lower_a,
        Side::Plus => upper_a,
    })
}

/// Series evaluation for irrational (or interval) `x` in (0,1): both sides
/// agree there, and the sum telescopes over exponents `floor(l/x)`.
fn delta_irrational_unit(params: &StaircaseParams, x: &Real) -> Result<Real> {
    let s = &params.s;
    let one = Real::one();
    // Tail over exponents >= t is bounded by s^{t-1}; find the cut-off.
    let threshold = Real::from_rational(params.precision.clone());
    let mut t: i64 = 1;
    let mut pw = one.clone();
    while pw.try_cmp(&threshold)? == Ordering::Greater {
        pw = &pw * s;
        t += 1;
        if t as usize > params.term_cap {
            return Err(Error::PrecisionExhausted(
                "series cut-off exceeds the term cap".into(),
            ));
        }
    }
    // Now s^{t-1} <= precision; sum terms with exponent < t.
    let mut acc = Real::zero();
    let mut l = 0u64;
    loop {
        let e = if l == 0 {
            BigInt::zero()
        } else {
            (&Real::from_bigint(BigInt::from(l)) / x).floor()?
        };
        let e = e.to_i64().ok_or_else(|| {
            Error::PrecisionExhausted("series exponent overflowed".into())
        })?;
        if e >= t {
            break;
        }
        acc = &acc + &s.pow_i64(e);
        l += 1;
        if l as usize > params.term_cap {
            return Err(Error::PrecisionExhausted("term cap exceeded".into()));
        }
    }
    let total = &(&(&one - s) / s) * &acc;
    let tail = s.pow_i64(t - 1);
    let ap = total.to_approx();
    let (_, tail_hi) = tail.rational_bounds();
    Ok(Real::approx(ap.value, ap.err + tail_hi))
}

/// Direct evaluation of the defining series (the `j`-sum with `ceil(jx)` /
/// `floor(jx)`), truncated with its own certified tail. Used as an
/// independent route against [`delta`].
pub fn delta_defining_series(params: &StaircaseParams, x: &Real, side: Side) -> Result<Real> {
    let s = &params.s;
    let one = Real::one();
    let ratio = &(&one - s) / s;
    let ratio2 = &ratio * &ratio;
    let abs_x_hi = {
        let (lo, hi) = x.rational_bounds();
        Real::from_rational(lo.abs().max(hi.abs()))
    };
    let threshold = Real::from_rational(params.precision.clone());

    // tail(N) = ((1-s)/s)^2 * sum_{j>N} s^j (j|x| + 1), in closed form
    let tail = |n: i64| -> Real {
        let oms = &one - s;
        let sn1 = s.pow_i64(n + 1);
        let jterm = &sn1
            * &(&(&Real::from_bigint(BigInt::from(n + 1)) * &oms) + s)
            / &(&oms * &oms);
        let cterm = &sn1 / &oms;
        &ratio2 * &(&(&abs_x_hi * &jterm) + &cterm)
    };

    let mut n: i64 = 1;
    while tail(n).try_cmp(&threshold)? == Ordering::Greater {
        n += 1;
        if n as usize > params.term_cap {
            return Err(Error::PrecisionExhausted("term cap exceeded".into()));
        }
    }

    let mut acc = Real::zero();
    let mut s_pow = one.clone();
    let mut jx = Real::zero();
    for _ in 1..=n {
        s_pow = &s_pow * s;
        jx = &jx + x;
        let v = match side {
            Side::Minus => jx.ceil()?,
            Side::Plus => jx.floor()?,
        };
        acc = &acc + &(&s_pow * &Real::from_bigint(v));
    }
    let mut total = &ratio2 * &acc;
    if side == Side::Plus {
        total = &total + &ratio;
    }
    let ap = total.to_approx();
    let (_, tail_hi) = tail(n).rational_bounds();
    Ok(Real::approx(ap.value, ap.err + tail_hi))
}

/// Tongue of a reduced rational `k/n`, with the width identity asserted.
pub fn tongue(params: &StaircaseParams, k: i64, n: u64) -> Result<Tongue> {
    if n == 0 {
        return Err(Error::Domain("denominator must be positive".into()));
    }
    if BigInt::from(k).gcd(&BigInt::from(n)) != BigInt::from(1) {
        return Err(Error::NonReducedFraction(k, n));
    }
    let x = Real::from_rational(BigRational::new(BigInt::from(k), BigInt::from(n)));
    let lower = delta(params, &x, Side::Minus)?;
    let upper = delta(params, &x, Side::Plus)?;
    let width = &upper - &lower;
    let s = &params.s;
    let one = Real::one();
    let oms = &one - s;
    let closed_width = &(&s.pow_i64(n as i64 - 2) * &(&oms * &oms)) / &(&one - &s.pow_i64(n as i64));
    if s.is_exact() {
        assert!(
            (&width - &closed_width).is_zero_exact(),
            "tongue width disagrees with the gap law at {k}/{n}"
        );
    }
    Ok(Tongue {
        k,
        n,
        lower,
        upper,
        width,
    })
}

/// Result of sweeping all tongues with denominator at most `n_max`:
/// those meeting the window, plus the exact width sum over one period.
#[derive(Debug, Clone, Serialize)]
pub struct TongueSweep {
    pub tongues: Vec<Tongue>,
    /// `sum_{n <= n_max} phi(n) * width(n)`, the measure covered by tongues
    /// in one period `[0, 1/s)`.
    pub period_width_sum: Real,
    /// `1/s - period_width_sum`; shrinks to zero as `n_max` grows.
    pub period_defect: Real,
}

pub fn tongue_sweep(
    params: &StaircaseParams,
    n_max: u64,
    window: (&Real, &Real),
) -> Result<TongueSweep> {
    let (w_lo, w_hi) = window;
    let s = &params.s;
    let mut tongues = Vec::new();
    for n in 1..=n_max {
        // Conservative numerator range from the translation structure:
        // the function maps [x, x+1) forward by 1/s per unit step.
        let x_lo = &(s * w_lo) - &Real::integer(2);
        let x_hi = &(s * w_hi) + &Real::integer(2);
        let k_lo = (&x_lo * &Real::integer(n as i64)).floor()?;
        let k_hi = (&x_hi * &Real::integer(n as i64)).ceil()?;
        let k_lo = k_lo.to_i64().ok_or_else(|| Error::Domain("window too wide".into()))?;
        let k_hi = k_hi.to_i64().ok_or_else(|| Error::Domain("window too wide".into()))?;
        for k in k_lo..=k_hi {
            if BigInt::from(k).gcd(&BigInt::from(n)) != BigInt::from(1) {
                continue;
            }
            let t = tongue(params, k, n)?;
            let misses = t.lower.try_cmp(w_hi)? == Ordering::Greater
                || t.upper.try_cmp(w_lo)? == Ordering::Less;
            if !misses {
                tongues.push(t);
            }
        }
    }
    tongues.sort_by(|a, b| a.lower.cmp_exact(&b.lower));

    let one = Real::one();
    let oms = &one - s;
    let mut sum = Real::zero();
    for n in 1..=n_max {
        let w = &(&s.pow_i64(n as i64 - 2) * &(&oms * &oms)) / &(&one - &s.pow_i64(n as i64));
        sum = &sum + &(&Real::from_bigint(BigInt::from(totient(n))) * &w);
    }
    let defect = &(&one / s) - &sum;
    Ok(TongueSweep {
        tongues,
        period_width_sum: sum,
        period_defect: defect,
    })
}

/// Pointwise evaluations for plotting.
pub fn staircase_samples(
    params: &StaircaseParams,
    grid: &[Real],
    side: Side,
) -> Result<Vec<(Real, Real)>> {
    grid.iter()
        .map(|x| Ok((x.clone(), delta(params, x, side)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Real {
        Real::ratio(p, q)
    }

    fn params(p: i64, q: i64) -> StaircaseParams {
        StaircaseParams::new(r(p, q)).unwrap()
    }

    #[test]
    fn values_at_zero() {
        let p = params(1, 2);
        assert_eq!(delta(&p, &Real::zero(), Side::Minus).unwrap(), Real::zero());
        assert_eq!(delta(&p, &Real::zero(), Side::Plus).unwrap(), Real::one());
    }

    #[test]
    fn values_at_one_half() {
        let p = params(1, 2);
        assert_eq!(delta(&p, &r(1, 2), Side::Minus).unwrap(), r(4, 3));
        assert_eq!(delta(&p, &r(1, 2), Side::Plus).unwrap(), r(5, 3));
    }

    #[test]
    fn translation_by_one_adds_reciprocal_s() {
        let p = params(1, 2);
        assert_eq!(delta(&p, &Real::one(), Side::Minus).unwrap(), r(2, 1));
        assert_eq!(delta(&p, &Real::one(), Side::Plus).unwrap(), r(3, 1));
        // and for a generic point, exactly
        let at = delta(&p, &r(7, 5), Side::Minus).unwrap();
        let base = delta(&p, &r(2, 5), Side::Minus).unwrap();
        assert_eq!(at, &base + &r(2, 1));
        // negative arguments translate the same way
        let neg = delta(&p, &r(-3, 5), Side::Plus).unwrap();
        let pos = delta(&p, &r(2, 5), Side::Plus).unwrap();
        assert_eq!(neg, &pos - &r(2, 1));
    }

    #[test]
    fn tongue_examples() {
        let p = params(1, 2);
        let t = tongue(&p, 1, 2).unwrap();
        assert_eq!(t.lower, r(4, 3));
        assert_eq!(t.upper, r(5, 3));
        assert_eq!(t.width, r(1, 3));

        let t = tongue(&p, 2, 3).unwrap();
        assert_eq!(t.lower, r(12, 7));
        assert_eq!(t.upper, r(13, 7));
        assert_eq!(t.width, r(1, 7));

        let t = tongue(&p, 0, 1).unwrap();
        assert_eq!(t.lower, Real::zero());
        assert_eq!(t.upper, Real::one());
        assert_eq!(t.width, Real::one());
    }

    #[test]
    fn tongue_rejects_non_reduced() {
        let p = params(1, 2);
        assert!(matches!(
            tongue(&p, 2, 4),
            Err(Error::NonReducedFraction(2, 4))
        ));
    }

    #[test]
    fn sweep_finds_window_tongues() {
        let p = params(1, 2);
        let zero = Real::zero();
        let two = r(2, 1);
        let sweep = tongue_sweep(&p, 2, (&zero, &two)).unwrap();
        let labels: Vec<(i64, u64)> = sweep.tongues.iter().map(|t| (t.k, t.n)).collect();
        assert_eq!(labels, vec![(0, 1), (1, 2), (1, 1)]);
    }

    #[test]
    fn sweep_period_sum_single_tongue() {
        let p = params(1, 2);
        let zero = Real::zero();
        let one = Real::one();
        let sweep = tongue_sweep(&p, 1, (&zero, &one)).unwrap();
        assert_eq!(sweep.period_width_sum, Real::one());
        assert_eq!(sweep.period_defect, Real::one());
    }

    #[test]
    fn sweep_period_sum_converges() {
        let p = params(1, 2);
        let zero = Real::zero();
        let sweep = tongue_sweep(&p, 40, (&zero, &zero)).unwrap();
        let defect = sweep.period_defect.to_f64();
        assert!(defect > 0.0 && defect < 1e-9, "defect {defect}");
    }

    #[test]
    fn series_route_matches_closed_forms_on_surds() {
        let p = params(1, 2);
        let golden = (&Real::sqrt_u64(5).unwrap() - &Real::one()) / &r(2, 1);
        let a = delta(&p, &golden, Side::Minus).unwrap();
        let b = delta_defining_series(&p, &golden, Side::Minus).unwrap();
        let c = delta_defining_series(&p, &golden, Side::Plus).unwrap();
        let gap_ab = (&a - &b).abs().to_f64();
        let gap_ac = (&a - &c).abs().to_f64();
        assert!(gap_ab < 2e-12, "gap {gap_ab}");
        assert!(gap_ac < 2e-12, "gap {gap_ac}");
    }

    #[test]
    fn samples_are_monotone() {
        let p = params(1, 2);
        let grid = vec![r(1, 2), r(2, 3)];
        let samples = staircase_samples(&p, &grid, Side::Minus).unwrap();
        assert_eq!(samples[0].1, r(4, 3));
        assert_eq!(samples[1].1, r(12, 7));
    }

    #[test]
    fn closeness_to_identity_improves_with_s() {
        let x = r(1, 2);
        let mut last = f64::INFINITY;
        for (p, q) in [(1i64, 2i64), (9, 10), (99, 100), (999, 1000)] {
            let pr = params(p, q);
            let v = delta(&pr, &x, Side::Minus).unwrap();
            let dist = (&v - &x).abs().to_f64();
            assert!(dist < last, "s={p}/{q} dist={dist} last={last}");
            last = dist;
        }
    }
}
