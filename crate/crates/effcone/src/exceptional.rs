//! Exceptional bundles, pairs, coils and their mutations.
//!
//! Exceptional bundles are rigid, so each one is determined by its integral
//! character `(r, (a, b), ch2)`.  All mutation arithmetic happens on characters
//! and never touches sheaves.  The database of exceptional bundles is stored as
//! twist classes: every exceptional bundle is a line-bundle twist of a unique
//! representative whose slope lies in the unit square `[0, 1)^2`.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::chern::{fmt_q, q, qi, Chern, Slope, Q};
use crate::error::{Error, Result};

/// An exceptional bundle, stored by its integral Chern character.
///
/// The derived ordering compares `(rank, c1a, c1b, ch2)`, which for a fixed rank is
/// the same as comparing `(rank, mu1, mu2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExceptionalBundle {
    pub rank: i64,
    pub c1a: i64,
    pub c1b: i64,
    pub ch2: i64,
}

impl ExceptionalBundle {
    /// Builds a bundle from raw integers without checking exceptionality.
    pub const fn from_ints(rank: i64, c1a: i64, c1b: i64, ch2: i64) -> Self {
        ExceptionalBundle {
            rank,
            c1a,
            c1b,
            ch2,
        }
    }

    /// The line bundle `O(a, b)`.
    pub const fn line(a: i64, b: i64) -> Self {
        ExceptionalBundle::from_ints(1, a, b, a * b)
    }

    pub fn chern(&self) -> Chern {
        Chern::ints(self.rank, self.c1a, self.c1b, self.ch2)
    }

    pub fn slope(&self) -> Slope {
        Slope::new(q(self.c1a, self.rank), q(self.c1b, self.rank))
    }

    pub fn mu11(&self) -> Q {
        q(self.c1a + self.c1b, self.rank)
    }

    /// `Delta = 1/2 (1 - 1/r^2)` for an exceptional bundle.
    pub fn discriminant(&self) -> Q {
        q(self.rank * self.rank - 1, 2 * self.rank * self.rank)
    }

    pub fn is_line_bundle(&self) -> bool {
        self.rank == 1
    }

    pub fn dual(&self) -> Self {
        ExceptionalBundle::from_ints(self.rank, -self.c1a, -self.c1b, self.ch2)
    }

    /// Tensor with `O(x, y)`.
    pub fn twist(&self, x: i64, y: i64) -> Self {
        ExceptionalBundle::from_ints(
            self.rank,
            self.c1a + self.rank * x,
            self.c1b + self.rank * y,
            self.ch2 + self.c1a * y + self.c1b * x + self.rank * x * y,
        )
    }

    /// Tensor with the canonical bundle `O(-2, -2)`.
    pub fn k(&self) -> Self {
        self.twist(-2, -2)
    }

    /// Tensor with the anticanonical bundle.
    pub fn minus_k(&self) -> Self {
        self.twist(2, 2)
    }

    /// Swaps the two rulings.
    pub fn mirror(&self) -> Self {
        ExceptionalBundle::from_ints(self.rank, self.c1b, self.c1a, self.ch2)
    }

    /// Integer parts of the slope.
    pub fn floor_slope(&self) -> (i64, i64) {
        (
            Integer::div_floor(&self.c1a, &self.rank),
            Integer::div_floor(&self.c1b, &self.rank),
        )
    }

    /// The twist class representative with slope in `[0, 1)^2`, together with the
    /// twist that recovers `self` from it.
    pub fn canonical_class(&self) -> (Self, (i64, i64)) {
        let (x, y) = self.floor_slope();
        (self.twist(-x, -y), (x, y))
    }

    /// Checks every numerical invariant of an exceptional bundle: positive rank
    /// equal to the denominator of `mu11`, first Chern class coprime with the rank,
    /// `Delta = 1/2 (1 - 1/r^2)` and `chi(E, E) = 1`.
    pub fn satisfies_invariants(&self) -> bool {
        let r = self.rank;
        if r <= 0 {
            return false;
        }
        if (self.c1a + self.c1b).gcd(&r) != 1 || self.c1a.gcd(&r) != 1 || self.c1b.gcd(&r) != 1 {
            return false;
        }
        let disc = self.chern().discriminant().expect("positive rank");
        disc == self.discriminant() && chi(self, self) == 1
    }
}

impl fmt::Display for ExceptionalBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rank == 1 {
            write!(f, "O({},{})", self.c1a, self.c1b)
        } else {
            let s = self.slope();
            write!(f, "E_{{{},{}}}", fmt_q(&s.mu1), fmt_q(&s.mu2))
        }
    }
}

/// Relative Euler characteristic of two integral characters.
///
/// Riemann-Roch for `ch(E)^* ch(F) td` expanded in integers.  Panics when the
/// value does not fit in `i64`; see [`checked_chi`].
pub fn chi(e: &ExceptionalBundle, f: &ExceptionalBundle) -> i64 {
    checked_chi(e, f).expect("Euler characteristic overflows i64")
}

/// [`chi`] with overflow reported as a resource error.
pub fn checked_chi(e: &ExceptionalBundle, f: &ExceptionalBundle) -> Result<i64> {
    let (re, ae, be, ce) = (e.rank as i128, e.c1a as i128, e.c1b as i128, e.ch2 as i128);
    let (rf, af, bf, cf) = (f.rank as i128, f.c1a as i128, f.c1b as i128, f.ch2 as i128);
    let v = re * cf + rf * ce - ae * bf - be * af + re * (af + bf) - rf * (ae + be) + re * rf;
    i64::try_from(v).map_err(|_| overflow())
}

fn overflow() -> Error {
    Error::Resource("exceptional character exceeds 64-bit range".into())
}

/// The exceptional bundle with the given slope.
///
/// The rank is the denominator of `mu11`, and `ch2` is recovered from the
/// exceptional discriminant.  Fails when the induced first Chern class or `ch2` is
/// not integral, which happens for slopes that are not exceptional.
pub fn exceptional_from_slope(mu: &Slope) -> Result<ExceptionalBundle> {
    let bad = || Error::NotExceptionalSlope(mu.to_string());
    let r = mu.mu11().denom().clone();
    let rq = Q::from_integer(r.clone());
    let a = &mu.mu1 * &rq;
    let b = &mu.mu2 * &rq;
    if !a.is_integer() || !b.is_integer() {
        return Err(bad());
    }
    let delta = (Q::from_integer(1.into()) - Q::from_integer(1.into()) / (&rq * &rq))
        / Q::from_integer(2.into());
    let ch2 = &rq * (&mu.mu1 * &mu.mu2 - delta);
    if !ch2.is_integer() {
        return Err(bad());
    }
    let conv = |x: &Q| -> Result<i64> { i64::try_from(x.to_integer()).map_err(|_| bad()) };
    let e = ExceptionalBundle::from_ints(conv(&rq)?, conv(&a)?, conv(&b)?, conv(&ch2)?);
    if !e.satisfies_invariants() {
        return Err(bad());
    }
    Ok(e)
}

/// The three shapes a mutation can take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MutationKind {
    Regular,
    Rebound,
    Extension,
}

impl MutationKind {
    pub fn is_regular(self) -> bool {
        self == MutationKind::Regular
    }
}

/// Kind of the left mutation of `(e0, e1)`, chosen by rank positivity.
fn left_kind(e0: &ExceptionalBundle, e1: &ExceptionalBundle) -> Result<(MutationKind, i64)> {
    let x = checked_chi(e0, e1)?;
    let (x0, r0, r1) = (x as i128, e0.rank as i128, e1.rank as i128);
    if x <= 0 {
        Ok((MutationKind::Extension, x))
    } else if x0 * r0 - r1 > 0 {
        Ok((MutationKind::Regular, x))
    } else if r1 - x0 * r0 > 0 {
        Ok((MutationKind::Rebound, x))
    } else {
        Err(Error::MalformedPair(format!(
            "({e0}, {e1}) mutates to rank zero"
        )))
    }
}

/// Kind of the right mutation of `(e0, e1)`.
fn right_kind(e0: &ExceptionalBundle, e1: &ExceptionalBundle) -> Result<(MutationKind, i64)> {
    let x = checked_chi(e0, e1)?;
    let (x0, r0, r1) = (x as i128, e0.rank as i128, e1.rank as i128);
    if x <= 0 {
        Ok((MutationKind::Extension, x))
    } else if x0 * r1 - r0 > 0 {
        Ok((MutationKind::Regular, x))
    } else if r0 - x0 * r1 > 0 {
        Ok((MutationKind::Rebound, x))
    } else {
        Err(Error::MalformedPair(format!(
            "({e0}, {e1}) mutates to rank zero"
        )))
    }
}

fn comb(s: i64, u: &ExceptionalBundle, t: i64, v: &ExceptionalBundle) -> Result<ExceptionalBundle> {
    let f = |a: i64, b: i64| -> Result<i64> {
        let w = s as i128 * a as i128 + t as i128 * b as i128;
        i64::try_from(w).map_err(|_| overflow())
    };
    Ok(ExceptionalBundle::from_ints(
        f(u.rank, v.rank)?,
        f(u.c1a, v.c1a)?,
        f(u.c1b, v.c1b)?,
        f(u.ch2, v.ch2)?,
    ))
}

/// The bundle `L_{e0} e1` and the kind of the mutation producing it.
pub fn left_mutate(
    e0: &ExceptionalBundle,
    e1: &ExceptionalBundle,
) -> Result<(ExceptionalBundle, MutationKind)> {
    let (kind, x) = left_kind(e0, e1)?;
    let out = match kind {
        MutationKind::Extension => comb(1, e1, -x, e0)?,
        MutationKind::Regular => comb(x, e0, -1, e1)?,
        MutationKind::Rebound => comb(1, e1, -x, e0)?,
    };
    Ok((out, kind))
}

/// The bundle `R_{e1} e0` and the kind of the mutation producing it.
pub fn right_mutate(
    e0: &ExceptionalBundle,
    e1: &ExceptionalBundle,
) -> Result<(ExceptionalBundle, MutationKind)> {
    let (kind, x) = right_kind(e0, e1)?;
    let out = match kind {
        MutationKind::Extension => comb(1, e0, -x, e1)?,
        MutationKind::Regular => comb(x, e1, -1, e0)?,
        MutationKind::Rebound => comb(1, e0, -x, e1)?,
    };
    Ok((out, kind))
}

/// An exceptional pair `(first, second)`: numerically `chi(second, first) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExceptionalPair {
    pub first: ExceptionalBundle,
    pub second: ExceptionalBundle,
}

impl ExceptionalPair {
    pub fn new(first: ExceptionalBundle, second: ExceptionalBundle) -> Result<Self> {
        if first == second || chi(&second, &first) != 0 {
            return Err(Error::MalformedPair(format!(
                "({first}, {second}) is not an exceptional pair"
            )));
        }
        Ok(ExceptionalPair { first, second })
    }

    pub fn mirror(&self) -> Self {
        ExceptionalPair {
            first: self.first.mirror(),
            second: self.second.mirror(),
        }
    }
}

impl fmt::Display for ExceptionalPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.first, self.second)
    }
}

/// Kind of the left mutation of a pair.  A pair with `chi = 0` is an extension of
/// degenerate shape: its left mutation just swaps the two bundles.
pub fn classify_mutation(pair: &ExceptionalPair) -> Result<MutationKind> {
    Ok(left_kind(&pair.first, &pair.second)?.0)
}

/// `L(E0, E1) = (L_{E0} E1, E0)`.
pub fn left_mutation(pair: &ExceptionalPair) -> Result<ExceptionalPair> {
    let (l, _) = left_mutate(&pair.first, &pair.second)?;
    Ok(ExceptionalPair {
        first: l,
        second: pair.first,
    })
}

/// `R(E0, E1) = (E1, R_{E1} E0)`.
pub fn right_mutation(pair: &ExceptionalPair) -> Result<ExceptionalPair> {
    let (r, _) = right_mutate(&pair.first, &pair.second)?;
    Ok(ExceptionalPair {
        first: pair.second,
        second: r,
    })
}

/// A maximal exceptional collection of four bundles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coil {
    pub terms: [ExceptionalBundle; 4],
}

impl Coil {
    /// Builds a coil after checking that every later term is numerically
    /// orthogonal to every earlier one.
    pub fn new(terms: [ExceptionalBundle; 4]) -> Result<Self> {
        let c = Coil { terms };
        if !c.is_orthogonal() {
            return Err(Error::MalformedPair(format!(
                "{c} is not an exceptional collection"
            )));
        }
        Ok(c)
    }

    /// The six vanishings `chi(terms[j], terms[i]) = 0` for `i < j`.
    pub fn is_orthogonal(&self) -> bool {
        (0..4).all(|i| (i + 1..4).all(|j| chi(&self.terms[j], &self.terms[i]) == 0))
    }

    pub fn standard() -> Self {
        Coil {
            terms: [
                ExceptionalBundle::line(0, 0),
                ExceptionalBundle::line(1, 0),
                ExceptionalBundle::line(0, 1),
                ExceptionalBundle::line(1, 1),
            ],
        }
    }
}

impl fmt::Display for Coil {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.terms;
        write!(f, "{{{}, {}, {}, {}}}", t[0], t[1], t[2], t[3])
    }
}

/// Left mutation of a coil: `(L0 L1 L2 A3, L0 L1 A2, L0 A1, A0)`.
pub fn mutate_coil_left(c: &Coil) -> Result<Coil> {
    Ok(Coil {
        terms: left_mutation_string(c)?.0,
    })
}

/// The left-mutated coil together with the number of non-regular mutations in the
/// string carrying `A_p` to its image, for `p = 0..3`.
pub fn left_mutation_string(c: &Coil) -> Result<([ExceptionalBundle; 4], [u32; 4])> {
    let a = &c.terms;
    let mut out = [a[0]; 4];
    let mut counts = [0u32; 4];
    for p in 1..4 {
        let mut x = a[p];
        for qi in (0..p).rev() {
            let (y, kind) = left_mutate(&a[qi], &x)?;
            if !kind.is_regular() {
                counts[p] += 1;
            }
            x = y;
        }
        out[3 - p] = x;
    }
    out[3] = a[0];
    Ok((out, counts))
}

/// Right mutation of a coil: `(A3, R3 A2, R3 R2 A1, R3 R2 R1 A0)`.
pub fn mutate_coil_right(c: &Coil) -> Result<Coil> {
    let a = &c.terms;
    let mut out = [a[3]; 4];
    for p in 0..3 {
        let mut x = a[p];
        for qi in p + 1..4 {
            x = right_mutate(&x, &a[qi])?.0;
        }
        out[3 - p] = x;
    }
    Ok(Coil { terms: out })
}

/// A system of exceptional bundles `{E_i}` generated by a pair, with
/// `E_{i+1} = R_{E_i} E_{i-1}` and `E_{i-1} = L_{E_i} E_{i+1}`, materialized for
/// indices `-radius..=radius`.
///
/// Ranks grow quickly away from a minimal pair; terms whose characters leave the
/// 64-bit range are not materialized.
#[derive(Clone, Debug)]
pub struct ExceptionalSystem {
    radius: i64,
    terms: Vec<Option<ExceptionalBundle>>,
}

impl ExceptionalSystem {
    pub fn generate(seed: &ExceptionalPair, radius: i64) -> Result<Self> {
        let n = (2 * radius + 1) as usize;
        let mut terms: Vec<Option<ExceptionalBundle>> = vec![None; n];
        let idx = |i: i64| (i + radius) as usize;
        terms[idx(0)] = Some(seed.first);
        terms[idx(1)] = Some(seed.second);
        for i in 1..radius {
            let (Some(a), Some(b)) = (terms[idx(i - 1)], terms[idx(i)]) else {
                break;
            };
            match right_mutate(&a, &b) {
                Ok((e, _)) => terms[idx(i + 1)] = Some(e),
                Err(Error::Resource(_)) => break,
                Err(e) => return Err(e),
            }
        }
        for i in (-radius + 1..=0).rev() {
            let (Some(a), Some(b)) = (terms[idx(i)], terms[idx(i + 1)]) else {
                break;
            };
            match left_mutate(&a, &b) {
                Ok((e, _)) => terms[idx(i - 1)] = Some(e),
                Err(Error::Resource(_)) => break,
                Err(e) => return Err(e),
            }
        }
        Ok(ExceptionalSystem { radius, terms })
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    /// The term `E_i`, when it was materialized.
    pub fn get(&self, i: i64) -> Option<&ExceptionalBundle> {
        if i.abs() > self.radius {
            return None;
        }
        self.terms[(i + self.radius) as usize].as_ref()
    }

    /// True when every term near the seed is a line bundle.
    pub fn is_line_system(&self) -> bool {
        (-3..=3).all(|i| self.get(i).is_some_and(|e| e.rank == 1))
    }
}

/// A rectangle `[lo1, hi1] x [lo2, hi2]` in the slope plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo1: i64,
    pub hi1: i64,
    pub lo2: i64,
    pub hi2: i64,
}

impl Window {
    pub fn new(lo1: i64, hi1: i64, lo2: i64, hi2: i64) -> Self {
        Window { lo1, hi1, lo2, hi2 }
    }

    /// The square `[-s, s]^2`.
    pub fn square(s: i64) -> Self {
        Window::new(-s, s, -s, s)
    }

    /// Enlarges the window by `pad` on every side.
    pub fn padded(&self, pad: i64) -> Self {
        Window::new(
            self.lo1 - pad,
            self.hi1 + pad,
            self.lo2 - pad,
            self.hi2 + pad,
        )
    }

    pub fn contains(&self, mu: &Slope) -> bool {
        let (lo1, hi1, lo2, hi2) = (qi(self.lo1), qi(self.hi1), qi(self.lo2), qi(self.hi2));
        lo1 <= mu.mu1 && mu.mu1 <= hi1 && lo2 <= mu.mu2 && mu.mu2 <= hi2
    }

    /// True when the whole unit cell `[i, i+1) x [j, j+1)` lies inside.
    pub fn contains_cell(&self, i: i64, j: i64) -> bool {
        self.lo1 <= i && i < self.hi1 && self.lo2 <= j && j < self.hi2
    }
}

/// The database of exceptional bundles of rank at most `rank_bound` inside a
/// slope window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExceptionalDb {
    rank_bound: i64,
    window: Window,
    classes: Vec<ExceptionalBundle>,
}

/// Largest twist used when searching for mutation partners of a class.  Two
/// bundles can only form an exceptional pair in either order when their slopes
/// differ by less than this in each coordinate.
const PARTNER_REACH: i64 = 3;

/// Computes the twist classes of exceptional bundles of rank at most `rank_bound`
/// by closing `{O}` under pair mutations.
///
/// Since twisting commutes with mutation, it suffices to mutate a representative
/// of the frontier against all twists of known representatives.  Fails when the
/// number of classes exceeds `cap`.
pub fn exceptional_classes(rank_bound: i64, cap: usize) -> Result<Vec<ExceptionalBundle>> {
    let mut classes: BTreeSet<ExceptionalBundle> = BTreeSet::new();
    let o = ExceptionalBundle::line(0, 0);
    classes.insert(o);
    let mut frontier = vec![o];
    while !frontier.is_empty() {
        let known: Vec<ExceptionalBundle> = classes.iter().copied().collect();
        let mut next = Vec::new();
        for a in &frontier {
            for b in &known {
                for dx in -PARTNER_REACH..=PARTNER_REACH {
                    for dy in -PARTNER_REACH..=PARTNER_REACH {
                        let bt = b.twist(dx, dy);
                        for (e0, e1) in [(*a, bt), (bt, *a)] {
                            if e0 == e1 || chi(&e1, &e0) != 0 {
                                continue;
                            }
                            for x in [left_mutate(&e0, &e1)?.0, right_mutate(&e0, &e1)?.0] {
                                if x.rank > rank_bound {
                                    continue;
                                }
                                let (c, _) = x.canonical_class();
                                if classes.insert(c) {
                                    if classes.len() > cap {
                                        return Err(Error::Resource(format!(
                                            "exceptional database exceeds {cap} classes"
                                        )));
                                    }
                                    next.push(c);
                                }
                            }
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(classes.into_iter().collect())
}

/// Generates the exceptional database for a rank bound and slope window.
pub fn generate_database(rank_bound: i64, window: Window, cap: usize) -> Result<ExceptionalDb> {
    if rank_bound < 1 {
        return Err(Error::Resource("rank bound must be positive".into()));
    }
    let classes = exceptional_classes(rank_bound, cap)?;
    Ok(ExceptionalDb {
        rank_bound,
        window,
        classes,
    })
}

impl ExceptionalDb {
    /// Rebuilds a database from stored class representatives.
    pub fn from_classes(
        rank_bound: i64,
        window: Window,
        mut classes: Vec<ExceptionalBundle>,
    ) -> Result<Self> {
        classes.sort();
        classes.dedup();
        for c in &classes {
            let (canon, _) = c.canonical_class();
            if canon != *c || !c.satisfies_invariants() || c.rank > rank_bound {
                return Err(Error::Io(format!(
                    "stored class {c} is not a valid representative"
                )));
            }
        }
        Ok(ExceptionalDb {
            rank_bound,
            window,
            classes,
        })
    }

    pub fn rank_bound(&self) -> i64 {
        self.rank_bound
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Same classes, different window.
    pub fn with_window(&self, window: Window) -> Self {
        ExceptionalDb {
            rank_bound: self.rank_bound,
            window,
            classes: self.classes.clone(),
        }
    }

    /// The same classes with the window enlarged to cover every cell within
    /// `reach` of the cell containing `mu`.  Twist classes are closed under all
    /// twists, so enlarging the window never needs new classes.
    pub fn covering(&self, mu: &Slope, reach: i64) -> Self {
        let i = mu.mu1.floor().to_integer();
        let j = mu.mu2.floor().to_integer();
        let (i, j) = (i64::try_from(i).unwrap_or(0), i64::try_from(j).unwrap_or(0));
        let w = self.window;
        let window = Window::new(
            w.lo1.min(i - reach),
            w.hi1.max(i + reach + 1),
            w.lo2.min(j - reach),
            w.hi2.max(j + reach + 1),
        );
        self.with_window(window)
    }

    /// Class representatives with slope in `[0, 1)^2`, in canonical order.
    pub fn classes(&self) -> &[ExceptionalBundle] {
        &self.classes
    }

    /// Bundles whose slope lies in the cell `[i, i+1) x [j, j+1)`.
    pub fn cell(&self, i: i64, j: i64) -> impl Iterator<Item = ExceptionalBundle> + '_ {
        self.classes.iter().map(move |c| c.twist(i, j))
    }

    /// Fails unless the cell lies inside the window.
    pub fn require_cell(&self, i: i64, j: i64) -> Result<()> {
        if self.window.contains_cell(i, j) {
            Ok(())
        } else {
            Err(Error::Coverage(format!(
                "slope cell ({i}, {j}) lies outside the database window"
            )))
        }
    }

    /// All members in the window, in canonical `(rank, mu1, mu2)` order.
    pub fn members(&self) -> Vec<ExceptionalBundle> {
        let w = self.window;
        let mut out: Vec<ExceptionalBundle> = Vec::new();
        for i in w.lo1..=w.hi1 {
            for j in w.lo2..=w.hi2 {
                out.extend(self.cell(i, j).filter(|e| w.contains(&e.slope())));
            }
        }
        out.sort();
        out
    }

    /// True when `e` is a database member (ignoring the window).
    pub fn contains(&self, e: &ExceptionalBundle) -> bool {
        let (c, _) = e.canonical_class();
        e.rank <= self.rank_bound && self.classes.binary_search(&c).is_ok()
    }

    /// Members within `reach` cells of the cell containing `mu`.
    pub fn near(&self, mu: &Slope, reach: i64) -> Vec<ExceptionalBundle> {
        let i = mu.mu1.floor().to_integer();
        let j = mu.mu2.floor().to_integer();
        let (i, j) = (i64::try_from(i).unwrap_or(0), i64::try_from(j).unwrap_or(0));
        let mut out = Vec::new();
        for di in -reach..=reach {
            for dj in -reach..=reach {
                out.extend(self.cell(i + di, j + dj));
            }
        }
        out
    }

    /// All completion pairs `(F0, F1)` making `(first, second, F0, F1)` a coil,
    /// searched among members near the pair.
    pub fn completion_pairs(&self, pair: &ExceptionalPair) -> Vec<ExceptionalPair> {
        let (a, b) = (pair.first, pair.second);
        let cands: Vec<ExceptionalBundle> = self
            .near(&a.slope(), PARTNER_REACH)
            .into_iter()
            .filter(|x| *x != a && *x != b && chi(x, &a) == 0 && chi(x, &b) == 0)
            .collect();
        let mut out = Vec::new();
        for g0 in &cands {
            for g1 in &cands {
                if g0 != g1 && chi(g1, g0) == 0 {
                    out.push(ExceptionalPair {
                        first: *g0,
                        second: *g1,
                    });
                }
            }
        }
        out
    }

    /// The minimally ranked completion pair, ties broken by lexicographic slope.
    pub fn minimal_completion(&self, pair: &ExceptionalPair) -> Result<ExceptionalPair> {
        self.completion_pairs(pair)
            .into_iter()
            .min_by(|x, y| {
                let kx = (
                    x.first.rank + x.second.rank,
                    x.first.slope(),
                    x.second.slope(),
                );
                let ky = (
                    y.first.rank + y.second.rank,
                    y.first.slope(),
                    y.second.slope(),
                );
                kx.cmp(&ky)
            })
            .ok_or_else(|| Error::CompletionNotFound(pair.to_string()))
    }
}

/// Completes a pair to the coil `(E_alpha, E_beta, F_i, F_{i+1})` using the
/// minimally ranked completion pair.
pub fn complete_pair_to_coil(pair: &ExceptionalPair, db: &ExceptionalDb) -> Result<Coil> {
    let g = db.minimal_completion(pair)?;
    Coil::new([pair.first, pair.second, g.first, g.second])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(a: i64, b: i64) -> ExceptionalBundle {
        ExceptionalBundle::line(a, b)
    }

    #[test]
    fn from_slope_examples() {
        let e = exceptional_from_slope(&Slope::ints(0, 0)).unwrap();
        assert_eq!(e, o(0, 0));
        let e = exceptional_from_slope(&Slope::new(q(-11, 3), q(-5, 3))).unwrap();
        assert_eq!(e.rank, 3);
        assert_eq!(e.discriminant(), q(4, 9));
        assert_eq!(e.chern().discriminant().unwrap(), q(4, 9));
        // mu11 = 1 forces rank one, where the first Chern class is not integral.
        assert!(exceptional_from_slope(&Slope::new(q(1, 2), q(1, 2))).is_err());
    }

    #[test]
    fn integer_chi_matches_rational_chi() {
        let e = exceptional_from_slope(&Slope::new(q(-11, 3), q(-5, 3))).unwrap();
        for f in [o(0, 0), o(-4, -2), o(3, -7), e.twist(1, 2)] {
            assert_eq!(
                qi(chi(&e, &f)),
                crate::chern::rel_chi(&e.chern(), &f.chern())
            );
            assert_eq!(
                qi(chi(&f, &e)),
                crate::chern::rel_chi(&f.chern(), &e.chern())
            );
        }
    }

    #[test]
    fn mutation_kinds() {
        let p = ExceptionalPair::new(o(0, 0), o(1, 0)).unwrap();
        assert_eq!(classify_mutation(&p).unwrap(), MutationKind::Regular);
        let p = ExceptionalPair::new(o(0, 0), o(1, 1)).unwrap();
        assert_eq!(classify_mutation(&p).unwrap(), MutationKind::Regular);
        assert_eq!(left_mutation(&p).unwrap().first.rank, 3);
        let p = ExceptionalPair::new(o(0, 1), o(1, 0)).unwrap();
        assert_eq!(classify_mutation(&p).unwrap(), MutationKind::Extension);
        assert_eq!(
            left_mutation(&p).unwrap(),
            ExceptionalPair {
                first: o(1, 0),
                second: o(0, 1)
            }
        );
    }

    #[test]
    fn pair_mutations() {
        let p = ExceptionalPair::new(o(0, 0), o(1, 0)).unwrap();
        let l = left_mutation(&p).unwrap();
        assert_eq!(
            l,
            ExceptionalPair {
                first: o(-1, 0),
                second: o(0, 0)
            }
        );
        assert_eq!(right_mutation(&l).unwrap(), p);
        assert_eq!(
            right_mutation(&ExceptionalPair::new(o(-1, 0), o(0, 0)).unwrap()).unwrap(),
            p
        );
        assert!(ExceptionalPair::new(o(1, 0), o(0, 0)).is_err());
    }

    #[test]
    fn standard_coil_mutations() {
        let c = Coil::standard();
        let [e0, e1, f0, f1] = c.terms;
        // Closed forms: E_{-1} = L_{E0} E1 and F2 = R_{F1} F0.
        let e_m1 = left_mutate(&e0, &e1).unwrap().0;
        let f2 = right_mutate(&f0, &f1).unwrap().0;
        let l = mutate_coil_left(&c).unwrap();
        assert_eq!(l.terms, [f1.k(), f2.k(), e_m1, e0]);
        assert_eq!(l.terms, [o(-1, -1), o(0, -1), o(-1, 0), o(0, 0)]);
        assert!(l.is_orthogonal());
        assert_eq!(mutate_coil_right(&l).unwrap(), c);
        let r = mutate_coil_right(&c).unwrap();
        assert_eq!(r.terms, [f1, f2, e_m1.minus_k(), e0.minus_k()]);
        assert!(r.is_orthogonal());
        assert_eq!(mutate_coil_left(&r).unwrap(), c);
    }

    #[test]
    fn delta_p_endpoints_on_standard_coil() {
        let (_, d) = left_mutation_string(&Coil::standard()).unwrap();
        assert_eq!(d[0], 0);
        assert_eq!(d[3], 1);
        assert!(d[1] <= 1 && d[2] <= 1);
    }

    #[test]
    fn systems_invert() {
        let seed = ExceptionalPair::new(o(0, 0), o(1, 1)).unwrap();
        let s = ExceptionalSystem::generate(&seed, 5).unwrap();
        for i in -4..4 {
            assert_eq!(
                right_mutate(s.get(i - 1).unwrap(), s.get(i).unwrap())
                    .unwrap()
                    .0,
                *s.get(i + 1).unwrap()
            );
            assert_eq!(
                left_mutate(s.get(i).unwrap(), s.get(i + 1).unwrap())
                    .unwrap()
                    .0,
                *s.get(i - 1).unwrap()
            );
        }
        assert!(!s.is_line_system());
        let s = ExceptionalSystem::generate(&ExceptionalPair::new(o(0, 2), o(1, 2)).unwrap(), 5)
            .unwrap();
        assert!(s.is_line_system());
        assert_eq!(*s.get(3).unwrap(), o(3, 2));
    }

    #[test]
    fn rank_one_database_is_line_bundles() {
        let db = generate_database(1, Window::square(8), 1000).unwrap();
        assert_eq!(db.classes(), &[o(0, 0)]);
        assert_eq!(db.members().len(), 17 * 17);
    }

    #[test]
    fn small_database_contents() {
        let db = generate_database(5, Window::square(8), 1000).unwrap();
        let e = exceptional_from_slope(&Slope::new(q(-11, 3), q(-5, 3))).unwrap();
        assert!(db.contains(&e));
        assert!(db.contains(&exceptional_from_slope(&Slope::new(q(1, 5), q(27, 5))).unwrap()));
        assert!(db.classes().iter().all(|c| c.satisfies_invariants()));
        let db2 = generate_database(5, Window::square(8), 1000).unwrap();
        assert_eq!(db, db2);
    }

    #[test]
    fn element_cap_is_enforced() {
        assert!(matches!(
            exceptional_classes(50, 10),
            Err(Error::Resource(_))
        ));
    }
}
