use std::cell::Cell;
use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Similarity {
    #[default]
    Jaccard,
    Cosine,
}

impl std::str::FromStr for Similarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jaccard" => Ok(Similarity::Jaccard),
            "cosine" => Ok(Similarity::Cosine),
            other => Err(format!(
                "unknown similarity {other:?} (expected jaccard or cosine)"
            )),
        }
    }
}

/// Size of the intersection of two sorted sets.
pub fn intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Sorted union of two sorted sets.
pub fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Similarity of two binary patterns given as sorted index sets.
///
/// Jaccard is `|A ∩ B| / |A ∪ B|`; cosine on binary vectors is
/// `|A ∩ B| / sqrt(|A| |B|)`. Two empty sets have similarity 1.
pub fn similarity(a: &[usize], b: &[usize], kind: Similarity) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = intersection_len(a, b) as f64;
    match kind {
        Similarity::Jaccard => inter / (a.len() as f64 + b.len() as f64 - inter),
        Similarity::Cosine => {
            if a.is_empty() || b.is_empty() {
                0.0
            } else {
                inter / (a.len() as f64 * b.len() as f64).sqrt()
            }
        }
    }
}

/// Exact comparison of the rational `num / den` against the threshold `t`.
///
/// `t` is read as the simplest rational whose nearest double is `t` (so
/// `0.8` means `4/5`, not the binary value slightly above it), and the
/// comparison is done in integers. `den` must be positive and `t` finite and
/// non-negative.
pub(crate) fn cmp_ratio(num: u64, den: u64, t: f64) -> Ordering {
    debug_assert!(den > 0);
    debug_assert!(t.is_finite() && t >= 0.0);
    match rational_of(t) {
        Some((p, q)) => (num as u128 * q as u128).cmp(&(p as u128 * den as u128)),
        None => cmp_dyadic(num, den, t),
    }
}

thread_local! {
    static LAST_RATIONAL: Cell<(u64, Option<(u64, u64)>)> = const { Cell::new((u64::MAX, None)) };
}

fn rational_of(t: f64) -> Option<(u64, u64)> {
    let bits = t.to_bits();
    LAST_RATIONAL.with(|cache| {
        let (key, value) = cache.get();
        if key == bits {
            return value;
        }
        let value = simplest_rational(t);
        cache.set((bits, value));
        value
    })
}

/// First continued-fraction convergent `p/q` of `t` with `p / q` rounding to
/// `t`, or `None` if none exists with `p, q < 2^53`.
pub(crate) fn simplest_rational(t: f64) -> Option<(u64, u64)> {
    const LIMIT: u128 = 1 << 53;
    let (mant, exp) = decompose(t);
    if mant == 0 {
        return Some((0, 1));
    }
    if exp >= 0 {
        let shift = exp as u32;
        let v = (mant as u128)
            .checked_shl(shift)
            .filter(|v| *v < LIMIT && shift < 64)?;
        return Some((v as u64, 1));
    }
    let shift = (-exp) as u32;
    if shift > 126 {
        return None;
    }
    let (mut n, mut d) = (mant as u128, 1u128 << shift);
    let (mut h1, mut h2, mut k1, mut k2) = (1u128, 0u128, 0u128, 1u128);
    loop {
        let a = n / d;
        let h = a.checked_mul(h1)?.checked_add(h2)?;
        let k = a.checked_mul(k1)?.checked_add(k2)?;
        if h >= LIMIT || k >= LIMIT {
            return None;
        }
        if h as f64 / k as f64 == t {
            return Some((h as u64, k as u64));
        }
        let r = n - a * d;
        if r == 0 {
            return None;
        }
        (n, d) = (d, r);
        (h2, h1, k2, k1) = (h1, h, k1, k);
    }
}

/// `t = mant * 2^exp` with `mant` odd (or zero).
fn decompose(t: f64) -> (u64, i32) {
    let bits = t.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut exp) = if biased == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), biased - 1075)
    };
    if mant != 0 {
        let tz = mant.trailing_zeros();
        mant >>= tz;
        exp += tz as i32;
    }
    (mant, exp)
}

/// Exact comparison against the binary value of `t`.
fn cmp_dyadic(num: u64, den: u64, t: f64) -> Ordering {
    let (mant, exp) = decompose(t);
    if mant == 0 {
        return (num as u128).cmp(&0);
    }
    // t = mant * 2^exp; compare num * 2^-exp with mant * den.
    let rhs = mant as u128 * den as u128;
    if exp >= 0 {
        let shift = exp as u32;
        if shift > rhs.leading_zeros() {
            return Ordering::Less;
        }
        (num as u128).cmp(&(rhs << shift))
    } else {
        let shift = (-exp) as u32;
        if num == 0 {
            return Ordering::Less;
        }
        let bits = 128 - (num as u128).leading_zeros();
        if bits + shift > 128 {
            return Ordering::Greater;
        }
        ((num as u128) << shift).cmp(&rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jaccard_and_cosine() {
        assert!((similarity(&[0, 1], &[1, 2], Similarity::Jaccard) - 1.0 / 3.0).abs() < 1e-15);
        assert!((similarity(&[0, 1], &[1, 2], Similarity::Cosine) - 0.5).abs() < 1e-15);
        for kind in [Similarity::Jaccard, Similarity::Cosine] {
            assert_eq!(similarity(&[3, 4, 9], &[3, 4, 9], kind), 1.0);
            assert_eq!(similarity(&[], &[], kind), 1.0);
            assert_eq!(similarity(&[], &[1], kind), 0.0);
            assert_eq!(similarity(&[0], &[1], kind), 0.0);
        }
    }

    #[test]
    fn set_helpers() {
        assert_eq!(intersection_len(&[0, 2, 4, 6], &[1, 2, 3, 6]), 2);
        assert_eq!(union(&[0, 2, 4], &[1, 2, 7]), vec![0, 1, 2, 4, 7]);
        assert_eq!(union(&[], &[5]), vec![5]);
    }

    #[test]
    fn exact_ratio_comparison() {
        assert_eq!(cmp_ratio(4, 5, 0.8), Ordering::Equal);
        assert_eq!(cmp_ratio(1, 2, 0.5), Ordering::Equal);
        assert_eq!(cmp_ratio(1, 4, 0.5), Ordering::Less);
        assert_eq!(cmp_ratio(3, 3, 1.0), Ordering::Equal);
        assert_eq!(cmp_ratio(0, 3, 0.0), Ordering::Equal);
        assert_eq!(cmp_ratio(1, 3, 0.0), Ordering::Greater);
        assert_eq!(cmp_ratio(0, 3, 0.1), Ordering::Less);
        assert_eq!(cmp_ratio(7, 2, 3.5), Ordering::Equal);
        assert_eq!(cmp_ratio(1, 3, 1.0 / 3.0), Ordering::Equal);
        assert_eq!(cmp_ratio(7, 10, 0.7), Ordering::Equal);
        assert_eq!(cmp_ratio(69, 100, 0.7), Ordering::Less);
        assert_eq!(cmp_ratio(1, 1 << 40, f64::MIN_POSITIVE), Ordering::Greater);
        assert_eq!(cmp_ratio(u64::MAX, 1, 1e300), Ordering::Less);
    }

    #[test]
    fn simplest_rationals() {
        assert_eq!(simplest_rational(0.8), Some((4, 5)));
        assert_eq!(simplest_rational(0.35), Some((7, 20)));
        assert_eq!(simplest_rational(0.1), Some((1, 10)));
        assert_eq!(simplest_rational(2.0 / 3.0), Some((2, 3)));
        assert_eq!(simplest_rational(0.0), Some((0, 1)));
        assert_eq!(simplest_rational(1.0), Some((1, 1)));
        assert_eq!(simplest_rational(1e-300), None);
        for k in 0..=1000u64 {
            let t = k as f64 / 1000.0;
            let (p, q) = simplest_rational(t).unwrap();
            assert_eq!(p as f64 / q as f64, t);
            assert!(q <= 1000, "{t} -> {p}/{q}");
        }
    }

    #[test]
    fn exact_ratio_agrees_with_f64_off_ties() {
        for num in 0..40u64 {
            for den in 1..40u64 {
                for k in 0..=20 {
                    let t = k as f64 / 20.0;
                    let approx = num as f64 / den as f64;
                    if (approx - t).abs() > 1e-12 {
                        assert_eq!(cmp_ratio(num, den, t), approx.partial_cmp(&t).unwrap());
                    }
                }
            }
        }
    }
}
