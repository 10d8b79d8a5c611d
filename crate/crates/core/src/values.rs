//! The exact value group `(Q/Z)^d x K`.
//!
//! Torus coordinates are reduced rationals stored in `[0, 1)`; `K` is a
//! finite abelian product of cyclic groups.  Because the torus factor is a
//! dense divisible subgroup of the circle, every comparison a checker makes
//! is an exact decision, while averaging and distance computations still
//! behave like their circle counterparts as long as they stay inside a small
//! window.

use crate::cube::AbelianCarrier;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// The ambient group `(Q/Z)^d x (Z/m_1 x ... x Z/m_r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueGroup {
    pub torus_rank: usize,
    pub finite_moduli: Vec<u64>,
}

impl ValueGroup {
    pub fn new(torus_rank: usize, finite_moduli: Vec<u64>) -> Result<ValueGroup> {
        if finite_moduli.iter().any(|&m| m == 0) {
            return Err(Error::NotAGroup("zero modulus in finite part".into()));
        }
        Ok(ValueGroup {
            torus_rank,
            finite_moduli,
        })
    }

    pub fn torus_only(d: usize) -> ValueGroup {
        ValueGroup {
            torus_rank: d,
            finite_moduli: Vec::new(),
        }
    }

    pub fn zero(&self) -> ValuePoint {
        ValuePoint {
            torus: vec![BigRational::zero(); self.torus_rank],
            finite: vec![0; self.finite_moduli.len()],
        }
    }

    pub fn contains(&self, p: &ValuePoint) -> bool {
        p.torus.len() == self.torus_rank
            && p.finite.len() == self.finite_moduli.len()
            && p.finite.iter().zip(&self.finite_moduli).all(|(x, m)| x < m)
            && p.torus
                .iter()
                .all(|x| !x.is_negative() && x < &BigRational::one())
    }

    pub fn add(&self, a: &ValuePoint, b: &ValuePoint) -> ValuePoint {
        debug_assert!(self.contains(a) && self.contains(b));
        ValuePoint {
            torus: a
                .torus
                .iter()
                .zip(&b.torus)
                .map(|(x, y)| frac(&(x + y)))
                .collect(),
            finite: a
                .finite
                .iter()
                .zip(&b.finite)
                .zip(&self.finite_moduli)
                .map(|((x, y), m)| (x + y) % m)
                .collect(),
        }
    }

    pub fn neg(&self, a: &ValuePoint) -> ValuePoint {
        ValuePoint {
            torus: a.torus.iter().map(|x| frac(&(-x))).collect(),
            finite: a
                .finite
                .iter()
                .zip(&self.finite_moduli)
                .map(|(x, m)| (m - x) % m)
                .collect(),
        }
    }

    pub fn sub(&self, a: &ValuePoint, b: &ValuePoint) -> ValuePoint {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, k: i64, a: &ValuePoint) -> ValuePoint {
        let kk = BigRational::from(BigInt::from(k));
        ValuePoint {
            torus: a.torus.iter().map(|x| frac(&(x * &kk))).collect(),
            finite: a
                .finite
                .iter()
                .zip(&self.finite_moduli)
                .map(|(x, m)| {
                    let m = *m as i128;
                    (((*x as i128 * k as i128) % m + m) % m) as u64
                })
                .collect(),
        }
    }
}

/// An element of a [`ValueGroup`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValuePoint {
    /// Reduced rationals in `[0, 1)`.
    pub torus: Vec<BigRational>,
    /// Residues, one per finite modulus.
    pub finite: Vec<u64>,
}

impl ValuePoint {
    pub fn from_rationals(torus: Vec<BigRational>) -> ValuePoint {
        ValuePoint {
            torus: torus.iter().map(frac).collect(),
            finite: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.torus.iter().all(|x| x.is_zero()) && self.finite.iter().all(|&x| x == 0)
    }

    /// Render as `p/q[,p/q...][;k[,k...]]`.
    pub fn render(&self) -> String {
        let torus = self
            .torus
            .iter()
            .map(|x| format!("{}/{}", x.numer(), x.denom()))
            .collect::<Vec<_>>()
            .join(",");
        if self.finite.is_empty() {
            torus
        } else {
            let fin = self
                .finite
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(",");
            format!("{torus};{fin}")
        }
    }

    /// Parse the [`ValuePoint::render`] format against a declared group.
    pub fn parse(s: &str, group: &ValueGroup) -> Result<ValuePoint> {
        let (torus_part, finite_part) = match s.split_once(';') {
            Some((t, f)) => (t, Some(f)),
            None => (s, None),
        };
        let mut torus = Vec::new();
        if !torus_part.is_empty() {
            for piece in torus_part.split(',') {
                let (num, den) = piece
                    .split_once('/')
                    .ok_or_else(|| Error::Parse(format!("expected p/q, got {piece:?}")))?;
                let num: BigInt = num
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad numerator {num:?}")))?;
                let den: BigInt = den
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad denominator {den:?}")))?;
                if den.is_zero() {
                    return Err(Error::Parse("zero denominator".into()));
                }
                torus.push(frac(&BigRational::new(num, den)));
            }
        }
        let mut finite = Vec::new();
        if let Some(f) = finite_part {
            for (piece, &m) in f.split(',').zip(&group.finite_moduli) {
                let k: u64 = piece
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad residue {piece:?}")))?;
                finite.push(k % m);
            }
        }
        let p = ValuePoint { torus, finite };
        if !group.contains(&p) {
            return Err(Error::Parse(format!(
                "value {s:?} does not match group with torus rank {} and {} finite components",
                group.torus_rank,
                group.finite_moduli.len()
            )));
        }
        Ok(p)
    }
}

impl AbelianCarrier for ValuePoint {
    fn zero_like(&self) -> Self {
        ValuePoint {
            torus: vec![BigRational::zero(); self.torus.len()],
            finite: vec![0; self.finite.len()],
        }
    }
    fn add(&self, other: &Self) -> Self {
        // Component moduli are only needed for the finite part; alternating
        // sums over the finite part are taken by the owning ValueGroup, so
        // plain carriers are torus-only.
        debug_assert!(self.finite.is_empty() && other.finite.is_empty());
        ValuePoint {
            torus: self
                .torus
                .iter()
                .zip(&other.torus)
                .map(|(x, y)| frac(&(x + y)))
                .collect(),
            finite: Vec::new(),
        }
    }
    fn neg(&self) -> Self {
        debug_assert!(self.finite.is_empty());
        ValuePoint {
            torus: self.torus.iter().map(|x| frac(&(-x))).collect(),
            finite: Vec::new(),
        }
    }
}

/// Fractional part, normalized into `[0, 1)`.
pub fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

/// Squared-distance surrogate for the metric on the value group: the
/// indicator of distinct finite parts plus, per torus coordinate, the square
/// of the shorter arc between the two angles.
pub fn metric(group: &ValueGroup, a: &ValuePoint, b: &ValuePoint) -> BigRational {
    debug_assert!(group.contains(a) && group.contains(b));
    let mut total = if a.finite == b.finite {
        BigRational::zero()
    } else {
        BigRational::one()
    };
    for (x, y) in a.torus.iter().zip(&b.torus) {
        let d = frac(&(x - y));
        let alt = BigRational::one() - &d;
        let arc = if d <= alt { d } else { alt };
        total += &arc * &arc;
    }
    total
}

/// Default window: averages are taken over sets of diameter at most `1/10`.
pub fn default_window() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(10))
}

/// Average a non-empty family of value points inside a window.
///
/// All points must share their finite component; each torus coordinate is
/// lifted to the real representative nearest the first point's coordinate,
/// and the lifted values must span at most `window`.  The average of the
/// lifts, projected back to `[0, 1)`, is returned.  Averaging is finitely
/// additive wherever these preconditions hold.
pub fn window_average(
    group: &ValueGroup,
    points: &[ValuePoint],
    window: &BigRational,
) -> Result<ValuePoint> {
    if points.is_empty() {
        return Err(Error::WindowViolation("empty average".into()));
    }
    let anchor = &points[0];
    if points.iter().any(|p| p.finite != anchor.finite) {
        return Err(Error::WindowViolation(
            "mismatched finite components".into(),
        ));
    }
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let n = BigRational::from(BigInt::from(points.len() as i64));
    let mut torus = Vec::with_capacity(group.torus_rank);
    for i in 0..group.torus_rank {
        let a = &anchor.torus[i];
        let mut lifts = Vec::with_capacity(points.len());
        for p in points {
            // Representative of p in (a - 1/2, a + 1/2].
            let mut l = p.torus[i].clone();
            if &l - a > half {
                l -= BigRational::one();
            } else if a - &l >= half {
                l += BigRational::one();
            }
            lifts.push(l);
        }
        let lo = lifts.iter().min().unwrap();
        let hi = lifts.iter().max().unwrap();
        if &(hi - lo) > window {
            return Err(Error::WindowViolation(format!(
                "coordinate {i}: spread {} exceeds window {}",
                hi - lo,
                window
            )));
        }
        let sum: BigRational = lifts.iter().sum();
        torus.push(frac(&(sum / &n)));
    }
    Ok(ValuePoint {
        torus,
        finite: anchor.finite.clone(),
    })
}

/// Largest per-coordinate spread of a family of points after lifting around
/// the first point; used to track the smallness budget of the averaging
/// solver.  Returns `None` when any pair has mismatched finite parts.
pub fn lifted_diameter(points: &[ValuePoint]) -> Option<BigRational> {
    let anchor = points.first()?;
    if points.iter().any(|p| p.finite != anchor.finite) {
        return None;
    }
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let mut worst = BigRational::zero();
    for i in 0..anchor.torus.len() {
        let a = &anchor.torus[i];
        let mut lo: Option<BigRational> = None;
        let mut hi: Option<BigRational> = None;
        for p in points {
            let mut l = p.torus[i].clone();
            if &l - a > half {
                l -= BigRational::one();
            } else if a - &l >= half {
                l += BigRational::one();
            }
            if lo.as_ref().is_none_or(|x| &l < x) {
                lo = Some(l.clone());
            }
            if hi.as_ref().is_none_or(|x| &l > x) {
                hi = Some(l);
            }
        }
        let spread = hi.unwrap() - lo.unwrap();
        if spread > worst {
            worst = spread;
        }
    }
    Some(worst)
}

/// Embed `Z/m_1 x ... x Z/m_r` into `(Q/Z)^r` by sending the `i`-th unit to
/// `1/m_i`.  The embedding is an injective homomorphism onto the subgroup of
/// points whose `i`-th coordinate is a multiple of `1/m_i`.
pub fn embed_in_value_group(moduli: &[u64], coords: &[u64]) -> Result<ValuePoint> {
    if coords.len() != moduli.len() {
        return Err(Error::GroupMismatch(format!(
            "{} coordinates for {} moduli",
            coords.len(),
            moduli.len()
        )));
    }
    Ok(ValuePoint {
        torus: moduli
            .iter()
            .zip(coords)
            .map(|(&m, &c)| BigRational::new(BigInt::from(c % m), BigInt::from(m)))
            .collect(),
        finite: Vec::new(),
    })
}

/// Inverse of [`embed_in_value_group`] where defined: read a torus point as
/// an element of `Z/m_1 x ... x Z/m_r`.
pub fn read_from_value_group(moduli: &[u64], p: &ValuePoint) -> Result<Vec<u64>> {
    if p.torus.len() != moduli.len() || !p.finite.is_empty() {
        return Err(Error::GroupMismatch(format!(
            "point with {} torus and {} finite components against {} moduli",
            p.torus.len(),
            p.finite.len(),
            moduli.len()
        )));
    }
    let mut out = Vec::with_capacity(moduli.len());
    for (x, &m) in p.torus.iter().zip(moduli) {
        let scaled = x * BigRational::from(BigInt::from(m));
        if !scaled.is_integer() {
            return Err(Error::GroupMismatch(format!(
                "{x} is not a multiple of 1/{m}"
            )));
        }
        let k: BigInt = scaled.to_integer();
        let m_big = BigInt::from(m);
        let k = ((k % &m_big) + &m_big) % &m_big;
        out.push(u64::try_from(k).expect("residue fits"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn tp(coords: &[(i64, i64)]) -> ValuePoint {
        ValuePoint::from_rationals(coords.iter().map(|&(p, q)| rat(p, q)).collect())
    }

    #[test]
    fn metric_wraps_around_the_circle() {
        let g = ValueGroup::torus_only(1);
        // Shorter arc between 1/10 and 9/10 has length 1/5, squared 1/25.
        assert_eq!(metric(&g, &tp(&[(1, 10)]), &tp(&[(9, 10)])), rat(1, 25));
        assert_eq!(metric(&g, &tp(&[(1, 10)]), &tp(&[(1, 10)])), rat(0, 1));
    }

    #[test]
    fn metric_separates_finite_components() {
        let g = ValueGroup::new(1, vec![2]).unwrap();
        let a = ValuePoint {
            torus: vec![rat(0, 1)],
            finite: vec![0],
        };
        let b = ValuePoint {
            torus: vec![rat(0, 1)],
            finite: vec![1],
        };
        assert_eq!(metric(&g, &a, &b), rat(1, 1));
    }

    #[test]
    fn window_average_lifts_across_zero() {
        let g = ValueGroup::torus_only(1);
        let avg = window_average(&g, &[tp(&[(99, 100)]), tp(&[(1, 100)])], &default_window())
            .unwrap();
        assert_eq!(avg, tp(&[(0, 1)]));
    }

    #[test]
    fn window_average_rejects_wide_spreads() {
        let g = ValueGroup::torus_only(1);
        let err = window_average(&g, &[tp(&[(0, 1)]), tp(&[(1, 4)])], &default_window());
        assert!(matches!(err, Err(Error::WindowViolation(_))));
        // The same points are fine under a wider window.
        let avg = window_average(&g, &[tp(&[(0, 1)]), tp(&[(1, 4)])], &rat(1, 2)).unwrap();
        assert_eq!(avg, tp(&[(1, 8)]));
    }

    #[test]
    fn window_average_rejects_mixed_finite_parts() {
        let g = ValueGroup::new(0, vec![3]).unwrap();
        let a = ValuePoint {
            torus: vec![],
            finite: vec![0],
        };
        let b = ValuePoint {
            torus: vec![],
            finite: vec![1],
        };
        assert!(matches!(
            window_average(&g, &[a, b], &default_window()),
            Err(Error::WindowViolation(_))
        ));
    }

    #[test]
    fn embedding_is_a_homomorphism() {
        let moduli = [4u64, 6];
        for a0 in 0..4u64 {
            for a1 in 0..6u64 {
                for b0 in 0..4u64 {
                    for b1 in 0..6u64 {
                        let g = ValueGroup::torus_only(2);
                        let ea = embed_in_value_group(&moduli, &[a0, a1]).unwrap();
                        let eb = embed_in_value_group(&moduli, &[b0, b1]).unwrap();
                        let sum =
                            embed_in_value_group(&moduli, &[(a0 + b0) % 4, (a1 + b1) % 6]).unwrap();
                        assert_eq!(g.add(&ea, &eb), sum);
                    }
                }
            }
        }
        // Round trip back to coordinates.
        let p = embed_in_value_group(&moduli, &[3, 5]).unwrap();
        assert_eq!(read_from_value_group(&moduli, &p).unwrap(), vec![3, 5]);
    }

    #[test]
    fn averaging_is_translation_equivariant() {
        let g = ValueGroup::torus_only(1);
        let pts = [tp(&[(1, 100)]), tp(&[(3, 100)]), tp(&[(2, 100)])];
        let shift = tp(&[(9, 10)]);
        let shifted: Vec<ValuePoint> = pts.iter().map(|p| g.add(p, &shift)).collect();
        let a = window_average(&g, &pts, &default_window()).unwrap();
        let b = window_average(&g, &shifted, &default_window()).unwrap();
        assert_eq!(g.add(&a, &shift), b);
    }
}
