//! The delta surface of exceptional bundles and the existence criterion for
//! semistable sheaves.
//!
//! For an exceptional bundle `E` and a slope `mu`, `delta_E(mu)` is the value of
//! the orthogonal surface of `E^*` (when `mu` lies just below `E`) or of `E^*(K)`
//! (when `mu` lies just above `E`), and zero otherwise.  "Below" and "above" refer
//! to the lexicographic order on `(mu11, mu12)`.  The delta surface is the
//! supremum of these functions; a character with positive rank is realized by a
//! semistable sheaf exactly when its discriminant lies on or above the surface and
//! the integrality conditions hold.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::chern::{hilbert_p, Chern, Slope, Q};
use crate::error::{Error, Result};
use crate::exceptional::{ExceptionalBundle, ExceptionalDb};

/// Which piece of the definition of `delta_E` applies at a slope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaBranch {
    /// `mu` lies below `E`: the value comes from the surface of `E^*`.
    ChiEMu,
    /// `mu` lies above `E`: the value comes from the surface of `E^*(K)`.
    ChiMuE,
    Zero,
}

/// Selects the branch of `delta_E` at `mu`.
pub fn delta_branch(e: &ExceptionalBundle, mu: &Slope) -> DeltaBranch {
    let es = e.slope();
    let (ge, gm) = (es.gamma_bar(), mu.gamma_bar());
    let four = Q::from_integer(4.into());
    if e.mu11() - &four < mu.mu11() && gm < ge {
        DeltaBranch::ChiEMu
    } else if mu.mu11() < e.mu11() + &four && ge < gm {
        DeltaBranch::ChiMuE
    } else {
        DeltaBranch::Zero
    }
}

/// `delta_E(mu)`.
pub fn delta_e(e: &ExceptionalBundle, mu: &Slope) -> Q {
    let es = e.slope();
    match delta_branch(e, mu) {
        DeltaBranch::ChiEMu => {
            let d = mu.sub(&es);
            hilbert_p(&d.mu1, &d.mu2) - e.discriminant()
        }
        DeltaBranch::ChiMuE => {
            let d = es.sub(mu);
            hilbert_p(&d.mu1, &d.mu2) - e.discriminant()
        }
        DeltaBranch::Zero => Q::zero(),
    }
}

/// Value of the delta surface at a slope with the bundles attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaValue {
    pub value: Q,
    /// Bundles with `delta_E(mu) = delta(mu) > 0`.  Empty when the surface is zero.
    pub attainers: Vec<ExceptionalBundle>,
}

impl DeltaValue {
    /// Largest rank among the attainers.
    pub fn max_rank(&self) -> i64 {
        self.attainers.iter().map(|e| e.rank).max().unwrap_or(0)
    }
}

/// Cells of the slope plane that can contain a bundle with `delta_E(mu) > 0`.
///
/// A positive value forces `|mu_i - e_i| < 3` in both coordinates.
pub const DELTA_REACH: i64 = 3;

/// A slope coordinate as `p / d` with `d > 0`.
struct Coord {
    p: BigInt,
    d: BigInt,
    small: Option<(i128, i128)>,
}

impl Coord {
    fn new(x: &Q) -> Self {
        let p = x.numer().clone();
        let d = x.denom().clone();
        let small = match (p.to_i64(), d.to_i64()) {
            (Some(a), Some(b)) => Some((a as i128, b as i128)),
            _ => None,
        };
        Coord { p, d, small }
    }
}

/// Cheap exact rejection: true when `E` certainly has `delta_E(mu) <= 0`.
///
/// With `x = mu1 - e1` and `y = mu2 - e2`, a positive value needs `x` and `y`
/// both in `(-1, 1)`, both in `(-3, -1)` or both in `(1, 3)`.
fn quick_reject(c1: &Coord, c2: &Coord, e: &ExceptionalBundle) -> bool {
    let (Some((p1, d1)), Some((p2, d2))) = (c1.small, c2.small) else {
        return false;
    };
    let r = e.rank as i128;
    let zone = |p: i128, d: i128, a: i128| -> Option<i8> {
        // Position of (p/d - a/r) = X/(d r) relative to -3, -1, 1, 3.
        let x = p.checked_mul(r)?.checked_sub(a.checked_mul(d)?)?;
        let u = d.checked_mul(r)?;
        let z = if x <= -3 * u || x >= 3 * u {
            0
        } else if x < -u {
            -1
        } else if x == -u || x == u {
            0
        } else if x < u {
            2
        } else {
            1
        };
        Some(z)
    };
    match (zone(p1, d1, e.c1a as i128), zone(p2, d2, e.c1b as i128)) {
        (Some(zx), Some(zy)) => zx == 0 || zx != zy,
        _ => false,
    }
}

/// `delta_E(mu)` scaled by the positive factor `2 d1 d2 r^2`, evaluated in integers.
fn scaled_delta_e(c1: &Coord, c2: &Coord, e: &ExceptionalBundle) -> Option<BigInt> {
    let r = BigInt::from(e.rank);
    let x = &c1.p * &r - BigInt::from(e.c1a) * &c1.d;
    let y = &c2.p * &r - BigInt::from(e.c1b) * &c2.d;
    // x / (d1 r) and y / (d2 r) are the coordinate differences mu - e.
    let s = &x * &c2.d + &y * &c1.d;
    let t = &x * &c2.d + BigInt::from(2) * &y * &c1.d;
    let bound = BigInt::from(4) * &c1.d * &c2.d * &r;
    let below = s.sign() == Sign::Minus || (s.is_zero() && t.sign() == Sign::Minus);
    let above = s.sign() == Sign::Plus || (s.is_zero() && t.sign() == Sign::Plus);
    let (u, v) = if below && s > -&bound {
        (&x + &c1.d * &r, &y + &c2.d * &r)
    } else if above && s < bound {
        (&c1.d * &r - &x, &c2.d * &r - &y)
    } else {
        return None;
    };
    let r2 = BigInt::from(e.rank * e.rank - 1);
    Some(BigInt::from(2) * u * v - r2 * &c1.d * &c2.d)
}

/// The delta surface at `mu`, computed as a maximum over database bundles near
/// `mu`, with the attaining bundles.
pub fn delta_surface(mu: &Slope, db: &ExceptionalDb) -> Result<DeltaValue> {
    let i0 = floor_i64(&mu.mu1)?;
    let j0 = floor_i64(&mu.mu2)?;
    for di in [-DELTA_REACH, DELTA_REACH] {
        for dj in [-DELTA_REACH, DELTA_REACH] {
            db.require_cell(i0 + di, j0 + dj)?;
        }
    }
    let c1 = Coord::new(&mu.mu1);
    let c2 = Coord::new(&mu.mu2);
    // Best value so far as the fraction num / r^2 (common factor 2 d1 d2 dropped).
    let mut best: Option<(BigInt, i64)> = None;
    let mut att: Vec<ExceptionalBundle> = Vec::new();
    for di in -DELTA_REACH..=DELTA_REACH {
        for dj in -DELTA_REACH..=DELTA_REACH {
            for e in db.cell(i0 + di, j0 + dj) {
                if quick_reject(&c1, &c2, &e) {
                    continue;
                }
                let Some(num) = scaled_delta_e(&c1, &c2, &e) else {
                    continue;
                };
                if num.sign() != Sign::Plus {
                    continue;
                }
                let r2 = e.rank * e.rank;
                let ord = match &best {
                    None => Ordering::Greater,
                    Some((bn, br2)) => (&num * BigInt::from(*br2)).cmp(&(bn * BigInt::from(r2))),
                };
                match ord {
                    Ordering::Greater => {
                        best = Some((num, r2));
                        att.clear();
                        att.push(e);
                    }
                    Ordering::Equal => att.push(e),
                    Ordering::Less => {}
                }
            }
        }
    }
    let value = match &best {
        None => Q::zero(),
        Some((num, r2)) => {
            let den = BigInt::from(2) * &c1.d * &c2.d * BigInt::from(*r2);
            Q::new(num.clone(), den)
        }
    };
    att.sort();
    Ok(DeltaValue {
        value,
        attainers: att,
    })
}

fn floor_i64(x: &Q) -> Result<i64> {
    x.floor()
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::Coverage(format!("slope coordinate {x} is out of range")))
}

/// Existence of semistable sheaves of character `xi` (positive rank): `r mu11`
/// and `chi` are integers and `Delta >= delta(mu)`.
pub fn moduli_nonempty(xi: &Chern, db: &ExceptionalDb) -> Result<bool> {
    if !xi.rank.is_positive() {
        return Err(Error::RankZero);
    }
    let mu = xi.slope()?;
    let c11 = &xi.rank * mu.mu11();
    if !c11.is_integer() || !xi.euler_chi().is_integer() {
        return Ok(false);
    }
    let d = delta_surface(&mu, db)?;
    Ok(xi.discriminant()? >= d.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chern::{q, qi};
    use crate::exceptional::{generate_database, Window};

    fn db() -> ExceptionalDb {
        generate_database(13, Window::square(20), 10_000).unwrap()
    }

    #[test]
    fn zero_branch_on_gamma_tie() {
        let o = ExceptionalBundle::line(0, 0);
        assert_eq!(delta_branch(&o, &Slope::ints(0, 0)), DeltaBranch::Zero);
        assert_eq!(delta_e(&o, &Slope::ints(-2, -2)), qi(0));
    }

    #[test]
    fn branch_values_by_substitution() {
        let o = ExceptionalBundle::line(0, 0);
        let mu = Slope::new(q(-1, 2), q(-1, 2));
        assert_eq!(delta_branch(&o, &mu), DeltaBranch::ChiEMu);
        // Q_{O}(mu) = P(mu) = 1/4.
        assert_eq!(delta_e(&o, &mu), q(1, 4));
        let mu = Slope::new(q(1, 2), q(1, 3));
        assert_eq!(delta_branch(&o, &mu), DeltaBranch::ChiMuE);
        // Q_{O(-2,-2)}(mu) = P(mu - (2,2)) = (1/2)(2/3).
        assert_eq!(delta_e(&o, &mu), q(1, 3));
    }

    #[test]
    fn surface_matches_direct_maximum() {
        let db = db();
        for mu in [
            Slope::new(q(12, 5), q(6, 5)),
            Slope::new(q(1, 7), q(-3, 4)),
            Slope::new(q(5, 3), q(5, 3)),
        ] {
            let d = delta_surface(&mu, &db).unwrap();
            let mut best = qi(0);
            for e in db.near(&mu, 3) {
                let v = delta_e(&e, &mu);
                if v > best {
                    best = v;
                }
            }
            assert_eq!(d.value, best);
            for e in &d.attainers {
                assert_eq!(delta_e(e, &mu), best);
            }
        }
    }

    #[test]
    fn hilbert_characters_are_realized() {
        let db = db();
        for n in 1..=16 {
            assert!(moduli_nonempty(&Chern::hilbert_scheme(n), &db).unwrap());
        }
        assert!(!moduli_nonempty(&Chern::new(qi(1), qi(0), qi(0), q(1, 2)), &db).unwrap());
        assert!(moduli_nonempty(&Chern::ints(2, 1, 0, -4), &db).unwrap());
    }

    #[test]
    fn orthogonal_character_for_seven_points_is_stable() {
        let mu = Slope::new(q(12, 5), q(6, 5));
        let d = delta_surface(&mu, &db()).unwrap();
        assert!(q(12, 25) >= d.value);
    }
}
