//! Exact Chern-character arithmetic on P1 x P1.
//!
//! A character is stored as `(rank, c1a, c1b, ch2)` where `(c1a, c1b)` are the
//! coefficients of the first Chern class in the basis of the two rulings.  All
//! quantities are arbitrary-precision rationals.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// The rational field used throughout the crate.
pub type Q = BigRational;

/// Builds the rational `n / d`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer `n` as a rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Formats a rational as `p` or `p/q`.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p` or `p/q` into a rational.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Q::from_integer(n))
        }
    }
}

/// The Hilbert polynomial of `O`, written in slope coordinates: `P(x, y) = (x + 1)(y + 1)`.
pub fn hilbert_p(x: &Q, y: &Q) -> Q {
    (x + Q::one()) * (y + Q::one())
}

/// A slope `(mu1, mu2)` in the slope plane.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slope {
    pub mu1: Q,
    pub mu2: Q,
}

impl Slope {
    pub fn new(mu1: Q, mu2: Q) -> Self {
        Slope { mu1, mu2 }
    }

    pub fn ints(a: i64, b: i64) -> Self {
        Slope::new(qi(a), qi(b))
    }

    /// Pairing with the ample class `O(1,1)`.
    pub fn mu11(&self) -> Q {
        &self.mu1 + &self.mu2
    }

    /// Pairing with the ample class `O(1,2)`.
    pub fn mu12(&self) -> Q {
        &self.mu1 + &self.mu2 * qi(2)
    }

    /// The key used to order slopes in the branch conditions of the delta surface:
    /// lexicographic on `(mu11, mu12)`.
    pub fn gamma_bar(&self) -> (Q, Q) {
        (self.mu11(), self.mu12())
    }

    pub fn add(&self, o: &Slope) -> Slope {
        Slope::new(&self.mu1 + &o.mu1, &self.mu2 + &o.mu2)
    }

    pub fn sub(&self, o: &Slope) -> Slope {
        Slope::new(&self.mu1 - &o.mu1, &self.mu2 - &o.mu2)
    }

    /// Swaps the two coordinates.
    pub fn mirror(&self) -> Slope {
        Slope::new(self.mu2.clone(), self.mu1.clone())
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_q(&self.mu1), fmt_q(&self.mu2))
    }
}

/// A Chern character `(rank, c1, ch2)` with exact rational entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chern {
    pub rank: Q,
    pub c1a: Q,
    pub c1b: Q,
    pub ch2: Q,
}

impl Chern {
    pub fn new(rank: Q, c1a: Q, c1b: Q, ch2: Q) -> Self {
        Chern {
            rank,
            c1a,
            c1b,
            ch2,
        }
    }

    /// Character with integer entries.
    pub fn ints(rank: i64, c1a: i64, c1b: i64, ch2: i64) -> Self {
        Chern::new(qi(rank), qi(c1a), qi(c1b), qi(ch2))
    }

    /// The line bundle `O(a, b)`, whose character is `(1, (a, b), ab)`.
    pub fn line(a: i64, b: i64) -> Self {
        Chern::ints(1, a, b, a * b)
    }

    /// The structure sheaf.
    pub fn structure_sheaf() -> Self {
        Chern::line(0, 0)
    }

    /// The canonical bundle `K = O(-2, -2)`.
    pub fn canonical() -> Self {
        Chern::line(-2, -2)
    }

    /// The ideal sheaf of `n` points: `(1, (0, 0), -n)`.
    pub fn hilbert_scheme(n: i64) -> Self {
        Chern::ints(1, 0, 0, -n)
    }

    /// Builds the character with the given rank, slope and discriminant.
    pub fn from_slope_delta(rank: Q, mu: &Slope, delta: &Q) -> Result<Self> {
        if rank.is_zero() {
            return Err(Error::RankZero);
        }
        let ch2 = &rank * (&mu.mu1 * &mu.mu2 - delta);
        Ok(Chern::new(
            rank.clone(),
            &rank * &mu.mu1,
            &rank * &mu.mu2,
            ch2,
        ))
    }

    pub fn zero() -> Self {
        Chern::new(Q::zero(), Q::zero(), Q::zero(), Q::zero())
    }

    pub fn add(&self, o: &Chern) -> Chern {
        Chern::new(
            &self.rank + &o.rank,
            &self.c1a + &o.c1a,
            &self.c1b + &o.c1b,
            &self.ch2 + &o.ch2,
        )
    }

    pub fn sub(&self, o: &Chern) -> Chern {
        Chern::new(
            &self.rank - &o.rank,
            &self.c1a - &o.c1a,
            &self.c1b - &o.c1b,
            &self.ch2 - &o.ch2,
        )
    }

    pub fn scale(&self, k: &Q) -> Chern {
        Chern::new(&self.rank * k, &self.c1a * k, &self.c1b * k, &self.ch2 * k)
    }

    pub fn is_integral(&self) -> bool {
        self.rank.is_integer()
            && self.c1a.is_integer()
            && self.c1b.is_integer()
            && self.ch2.is_integer()
    }

    /// True for the character of a line bundle: rank one and discriminant zero.
    pub fn is_line_bundle(&self) -> bool {
        self.rank.is_one()
            && self.c1a.is_integer()
            && self.c1b.is_integer()
            && self.ch2 == &self.c1a * &self.c1b
    }

    pub fn slope(&self) -> Result<Slope> {
        if self.rank.is_zero() {
            return Err(Error::RankZero);
        }
        Ok(Slope::new(&self.c1a / &self.rank, &self.c1b / &self.rank))
    }

    /// `Delta = mu1 mu2 - ch2 / r`.
    pub fn discriminant(&self) -> Result<Q> {
        let mu = self.slope()?;
        Ok(&mu.mu1 * &mu.mu2 - &self.ch2 / &self.rank)
    }

    /// Euler characteristic by Riemann-Roch.  Valid for every rank, including zero:
    /// `chi = ch2 + c1a + c1b + rank`.
    pub fn euler_chi(&self) -> Q {
        &self.ch2 + &self.c1a + &self.c1b + &self.rank
    }

    pub fn dual(&self) -> Chern {
        Chern::new(self.rank.clone(), -&self.c1a, -&self.c1b, self.ch2.clone())
    }

    /// Tensor with `O(x, y)`.
    pub fn twist(&self, x: &Q, y: &Q) -> Chern {
        Chern::new(
            self.rank.clone(),
            &self.c1a + &self.rank * x,
            &self.c1b + &self.rank * y,
            &self.ch2 + &self.c1a * y + &self.c1b * x + &self.rank * x * y,
        )
    }

    pub fn twist_ints(&self, x: i64, y: i64) -> Chern {
        self.twist(&qi(x), &qi(y))
    }

    /// Tensor with a line-bundle character.
    pub fn twist_by(&self, l: &Chern) -> Result<Chern> {
        if !l.is_line_bundle() {
            return Err(Error::NotLineBundle);
        }
        Ok(self.twist(&l.c1a, &l.c1b))
    }

    /// Tensor with the canonical bundle.
    pub fn k(&self) -> Chern {
        self.twist_ints(-2, -2)
    }

    /// Tensor with the anticanonical bundle.
    pub fn minus_k(&self) -> Chern {
        self.twist_ints(2, 2)
    }

    /// Swaps the two rulings.
    pub fn mirror(&self) -> Chern {
        Chern::new(
            self.rank.clone(),
            self.c1b.clone(),
            self.c1a.clone(),
            self.ch2.clone(),
        )
    }

    /// Primitive integral representative of the ray through this character
    /// (positive rank assumed for the sign).
    pub fn primitive(&self) -> Chern {
        let entries = [&self.rank, &self.c1a, &self.c1b, &self.ch2];
        let mut l = BigInt::one();
        for e in entries {
            l = l.lcm(e.denom());
        }
        let ints: Vec<BigInt> = entries
            .iter()
            .map(|e| (*e * Q::from_integer(l.clone())).to_integer())
            .collect();
        let mut g = BigInt::zero();
        for v in &ints {
            g = g.gcd(v);
        }
        if g.is_zero() {
            return self.clone();
        }
        if ints[0].is_negative() {
            g = -g;
        }
        let v: Vec<Q> = ints.into_iter().map(|x| Q::from_integer(x / &g)).collect();
        Chern::new(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone())
    }
}

impl fmt::Display for Chern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, ({}, {}), {})",
            fmt_q(&self.rank),
            fmt_q(&self.c1a),
            fmt_q(&self.c1b),
            fmt_q(&self.ch2)
        )
    }
}

/// Relative Euler characteristic `chi(E, F) = sum (-1)^i ext^i(E, F)`.
///
/// Computed by Riemann-Roch on `ch(E)^* ch(F) td`; for nonzero ranks this equals
/// `r(E) r(F) (P(mu(F) - mu(E)) - Delta(E) - Delta(F))`.
pub fn rel_chi(e: &Chern, f: &Chern) -> Q {
    // ch(E^*) ch(F): rank rE rF, c1 = rE c1(F) - rF c1(E),
    // ch2 = rE ch2(F) + rF ch2(E) - c1(E).c1(F), with (a,b).(a',b') = ab' + ba'.
    let r = &e.rank * &f.rank;
    let c1a = &e.rank * &f.c1a - &f.rank * &e.c1a;
    let c1b = &e.rank * &f.c1b - &f.rank * &e.c1b;
    let ch2 = &e.rank * &f.ch2 + &f.rank * &e.ch2 - (&e.c1a * &f.c1b + &e.c1b * &f.c1a);
    ch2 + c1a + c1b + r
}

/// The symmetric pairing `(E, F) = chi(E^*, F)`.
pub fn sym_pairing(e: &Chern, f: &Chern) -> Q {
    rel_chi(&e.dual(), f)
}

/// Slope and discriminant of a tensor product: both are additive.
pub fn tensor_slope_delta(e: &Chern, f: &Chern) -> Result<(Slope, Q)> {
    let me = e.slope()?;
    let mf = f.slope()?;
    Ok((me.add(&mf), e.discriminant()? + f.discriminant()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hilbert_polynomial_values() {
        assert_eq!(hilbert_p(&qi(0), &qi(0)), qi(1));
        assert_eq!(hilbert_p(&qi(-1), &q(7, 3)), qi(0));
        assert_eq!(hilbert_p(&qi(4), &qi(1)), qi(10));
    }

    #[test]
    fn euler_characteristics() {
        assert_eq!(Chern::structure_sheaf().euler_chi(), qi(1));
        assert_eq!(Chern::hilbert_scheme(7).euler_chi(), qi(-6));
        assert_eq!(Chern::line(1, 0).euler_chi(), qi(2));
    }

    #[test]
    fn relative_euler_characteristic_examples() {
        let i11 = Chern::hilbert_scheme(11);
        assert_eq!(rel_chi(&Chern::line(-4, -1), &i11), qi(-1));
        assert_eq!(rel_chi(&Chern::line(-3, -2), &i11), qi(1));
    }

    #[test]
    fn rel_chi_matches_slope_formula() {
        let e = Chern::ints(3, 2, 1, -1);
        let f = Chern::ints(2, -1, 3, 4);
        let (me, mf) = (e.slope().unwrap(), f.slope().unwrap());
        let d = mf.sub(&me);
        let expect = &e.rank
            * &f.rank
            * (hilbert_p(&d.mu1, &d.mu2) - e.discriminant().unwrap() - f.discriminant().unwrap());
        assert_eq!(rel_chi(&e, &f), expect);
    }

    #[test]
    fn twists_and_duals() {
        assert_eq!(
            Chern::line(-2, -1).twist_by(&Chern::canonical()).unwrap(),
            Chern::line(-4, -3)
        );
        assert_eq!(Chern::line(3, -5).dual(), Chern::line(-3, 5));
        assert!(Chern::ints(2, 1, 0, 0)
            .twist_by(&Chern::ints(2, 0, 0, 0))
            .is_err());
        let (mu, _) = tensor_slope_delta(&Chern::line(2, 1), &Chern::line(1, 0)).unwrap();
        assert_eq!(mu, Slope::ints(3, 1));
    }

    #[test]
    fn line_bundles_have_zero_discriminant() {
        for a in -10..=10 {
            for b in -10..=10 {
                let l = Chern::line(a, b);
                assert!(l.discriminant().unwrap().is_zero());
                assert_eq!(l.euler_chi(), qi((a + 1) * (b + 1)));
            }
        }
    }

    #[test]
    fn slope_delta_round_trip() {
        let mu = Slope::new(q(12, 5), q(6, 5));
        let c = Chern::from_slope_delta(qi(5), &mu, &q(12, 25)).unwrap();
        assert_eq!(c, Chern::ints(5, 12, 6, 12));
        assert_eq!(c.slope().unwrap(), mu);
        assert_eq!(c.discriminant().unwrap(), q(12, 25));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_q("-12/8").unwrap(), q(-3, 2));
        assert_eq!(parse_q("7").unwrap(), qi(7));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }
}
