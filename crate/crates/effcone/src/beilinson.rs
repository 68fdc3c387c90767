//! Resolutions of the general sheaf from a resolving coil.
//!
//! An extremal pair `(E_alpha, E_beta)` is completed to a coil, dualized and
//! twisted into one of three shapes according to the signs of
//! `chi(E_alpha^*, U)` and `chi(E_beta^*, U)`.  The generalized Beilinson spectral
//! sequence attached to that coil degenerates to a two-term resolution whose
//! multiplicities are Euler characteristics against the right-mutated coil.

use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::chern::{rel_chi, Chern, Q};
use crate::error::{Error, Result};
use crate::exceptional::{
    chi, left_mutation_string, mutate_coil_right, Coil, ExceptionalBundle, ExceptionalDb,
    ExceptionalPair, ExceptionalSystem,
};

/// The three shapes of resolving coil.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseTag {
    /// `chi(E_alpha^*, U) >= 0` and `chi(E_beta^*, U) >= 0`.
    Positive,
    /// `chi(E_alpha^*, U) <= 0 <= chi(E_beta^*, U)`.
    Mixed,
    /// `chi(E_alpha^*, U) <= 0` and `chi(E_beta^*, U) <= 0`.
    Negative,
}

impl CaseTag {
    /// Which terms of the resolving coil sit on the left (kernel) side.
    fn left_side(self) -> [bool; 4] {
        match self {
            CaseTag::Positive => [true, false, false, false],
            CaseTag::Mixed => [true, true, false, false],
            CaseTag::Negative => [true, true, true, false],
        }
    }

    /// Pairs of coil positions whose Hom sheaves must be globally generated.
    fn generated_homs(self) -> &'static [(usize, usize)] {
        match self {
            CaseTag::Positive => &[(0, 1), (0, 2), (0, 3)],
            CaseTag::Mixed => &[(0, 2), (0, 3), (1, 2), (1, 3)],
            CaseTag::Negative => &[(0, 3), (1, 3), (2, 3)],
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseTag::Positive => "positive",
            CaseTag::Mixed => "mixed",
            CaseTag::Negative => "negative",
        };
        f.write_str(s)
    }
}

/// How to read the sign condition on the second interior term in the mixed case.
///
/// As printed, both alternatives of that condition ask for a nonnegative Euler
/// characteristic; the mirrored reading asks for a nonpositive one when no
/// non-regular mutation occurs, matching the companion condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SignReading {
    AsPrinted,
    #[default]
    Mirrored,
}

/// Euler characteristics `chi(E_alpha^*, U)` and `chi(E_beta^*, U)`.
pub fn pair_signs(xi: &Chern, pair: &ExceptionalPair) -> (Q, Q) {
    (
        rel_chi(&pair.first.dual().chern(), xi),
        rel_chi(&pair.second.dual().chern(), xi),
    )
}

/// Cases compatible with the signs, in the order positive, mixed, negative.
pub fn compatible_cases(xi: &Chern, pair: &ExceptionalPair) -> Vec<CaseTag> {
    let (sa, sb) = pair_signs(xi, pair);
    let mut out = Vec::new();
    if !sa.is_negative() && !sb.is_negative() {
        out.push(CaseTag::Positive);
    }
    if !sa.is_positive() && !sb.is_negative() {
        out.push(CaseTag::Mixed);
    }
    if !sa.is_positive() && !sb.is_positive() {
        out.push(CaseTag::Negative);
    }
    out
}

/// The case given by the signs; zero signs go to the first compatible case.
pub fn select_case(xi: &Chern, pair: &ExceptionalPair) -> Option<CaseTag> {
    compatible_cases(xi, pair).into_iter().next()
}

/// The resolving coil for a pair and a completion pair `(F_{-1}, F_0)`.
pub fn resolving_coil(
    pair: &ExceptionalPair,
    case: CaseTag,
    completion: &ExceptionalPair,
) -> Result<Coil> {
    let (a, b) = (pair.first.dual(), pair.second.dual());
    let (g1, g2) = (completion.first.dual(), completion.second.dual());
    let terms = match case {
        CaseTag::Positive => [g2, g1, b, a],
        CaseTag::Mixed => [a.k(), g2, g1, b],
        CaseTag::Negative => [b.k(), a.k(), g2, g1],
    };
    Coil::new(terms)
}

/// Number of non-regular mutations carrying each term of the right-mutated coil
/// back to the resolving coil.
pub fn delta_p_counts(mutated: &Coil) -> Result<[u32; 4]> {
    let (_, d) = left_mutation_string(mutated)?;
    if d[0] != 0 || d[3] != 1 || d[1] > 1 || d[2] > 1 {
        return Err(Error::Bookkeeping(format!(
            "unexpected non-regular mutation counts {d:?} for {mutated}"
        )));
    }
    Ok(d)
}

/// Kronecker module data extracted from a resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KroneckerData {
    pub n: i64,
    pub a: i64,
    pub b: i64,
    pub edim: i64,
}

impl KroneckerData {
    pub fn new(n: i64, a: i64, b: i64) -> Self {
        KroneckerData {
            n,
            a,
            b,
            edim: n * a * b - a * a - b * b + 1,
        }
    }
}

/// A two-term resolution `0 -> left -> right -> U -> 0` read off a resolving coil.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub case: CaseTag,
    pub pair: ExceptionalPair,
    /// The completion pair `(F_{-1}, F_0)` used to build the coil.
    pub completion: ExceptionalPair,
    /// Resolving coil `(B_{-3}, B_{-2}, B_{-1}, B_0)`.
    pub coil: Coil,
    /// Right mutation of the resolving coil, `(A_0, A_1, A_2, A_3)`.
    pub mutated: Coil,
    pub delta_p: [u32; 4],
    /// Multiplicity of each coil term, so `mults[0] = m_3` and `mults[3] = m_0`.
    pub mults: [i64; 4],
    /// Whether each coil term sits on the left side of the resolution.
    pub left_side: [bool; 4],
}

impl Resolution {
    /// Nonzero terms on the left side with their multiplicities.
    pub fn left_terms(&self) -> Vec<(ExceptionalBundle, i64)> {
        (0..4)
            .filter(|&j| self.left_side[j] && self.mults[j] != 0)
            .map(|j| (self.coil.terms[j], self.mults[j]))
            .collect()
    }

    /// Nonzero terms on the right side with their multiplicities.
    pub fn right_terms(&self) -> Vec<(ExceptionalBundle, i64)> {
        (0..4)
            .filter(|&j| !self.left_side[j] && self.mults[j] != 0)
            .map(|j| (self.coil.terms[j], self.mults[j]))
            .collect()
    }

    /// The nonzero multiplicities in coil order, as `(m_3, m_2, m_1, m_0)` with zeros dropped.
    pub fn nonzero_mults(&self) -> Vec<i64> {
        self.mults.iter().copied().filter(|m| *m != 0).collect()
    }

    /// Alternating sum of the terms: right side minus left side.
    pub fn character(&self) -> Chern {
        let mut total = Chern::zero();
        for j in 0..4 {
            let t = self.coil.terms[j]
                .chern()
                .scale(&Q::from_integer(self.mults[j].into()));
            total = if self.left_side[j] {
                total.sub(&t)
            } else {
                total.add(&t)
            };
        }
        total
    }

    /// Kronecker module data: the map between the two completion terms when no
    /// multiplicity vanishes, the map between the surviving terms when exactly two
    /// vanish, and nothing otherwise.
    pub fn kronecker(&self) -> Option<KroneckerData> {
        let zeros = self.mults.iter().filter(|m| **m == 0).count();
        let t = &self.coil.terms;
        match zeros {
            0 => {
                let (f0, f1) = (self.completion.second.dual(), self.completion.first.dual());
                let j0 = (0..4).find(|&j| t[j] == f0)?;
                let j1 = (0..4).find(|&j| t[j] == f1)?;
                Some(KroneckerData::new(
                    chi(&f0, &f1),
                    self.mults[j0],
                    self.mults[j1],
                ))
            }
            2 => {
                let live: Vec<usize> = (0..4).filter(|&j| self.mults[j] != 0).collect();
                let (i, j) = (live[0], live[1]);
                Some(KroneckerData::new(
                    chi(&t[i], &t[j]),
                    self.mults[i],
                    self.mults[j],
                ))
            }
            _ => None,
        }
    }

    /// The resolution in arrow notation.
    pub fn arrow_text(&self, target: &str) -> String {
        let side = |terms: Vec<(ExceptionalBundle, i64)>| -> String {
            terms
                .iter()
                .map(|(e, m)| {
                    if *m == 1 {
                        e.to_string()
                    } else {
                        format!("{e}^{m}")
                    }
                })
                .collect::<Vec<_>>()
                .join(" + ")
        };
        format!(
            "0 -> {} -> {} -> {} -> 0",
            side(self.left_terms()),
            side(self.right_terms()),
            target
        )
    }
}

/// Why a candidate resolution was rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rejection {
    NotACoil,
    /// A term of the mutated coil contributes in a degree other than 0 or 1.
    Degree(usize),
    /// A multiplicity has the wrong sign for the degree it sits in.
    Sign(usize),
    /// A term of the mutated coil is too far below `U` in `mu11`.
    SlopeWindow(usize),
    Bookkeeping,
    /// One side of the resolution is empty, so `U` would be a sum of exceptionals
    /// or a shifted one.
    EmptySide,
    /// A Hom sheaf between resolution terms has negative degree.
    NotGenerated(usize, usize),
}

/// Tries to resolve `xi` with a given case and completion pair.
pub fn resolve_with(
    xi: &Chern,
    pair: &ExceptionalPair,
    case: CaseTag,
    completion: &ExceptionalPair,
    reading: SignReading,
) -> Result<std::result::Result<Resolution, Vec<Rejection>>> {
    let coil = match resolving_coil(pair, case, completion) {
        Ok(c) => c,
        Err(_) => return Ok(Err(vec![Rejection::NotACoil])),
    };
    let mutated = mutate_coil_right(&coil)?;
    let (back, d) = left_mutation_string(&mutated)?;
    if back != coil.terms {
        return Err(Error::Bookkeeping(format!(
            "left mutation of {mutated} does not return {coil}"
        )));
    }
    let left_side = case.left_side();
    let mu_u = xi.slope()?.mu11();
    let four = Q::from_integer(4.into());
    let mut why = Vec::new();
    let mut mults = [0i64; 4];
    for i in 0..4 {
        let c = rel_chi(&mutated.terms[i].chern(), xi);
        if !c.is_integer() {
            return Err(Error::Bookkeeping(format!(
                "non-integral Euler characteristic {c}"
            )));
        }
        let c = c
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::Resource("multiplicity overflow".into()))?;
        // The term paired with A_i is B_{-i}, stored at position 3 - i.
        let j = 3 - i;
        let side = if left_side[j] { -1 } else { 0 };
        let e = side + i as i64 - d[i] as i64;
        mults[j] = c.abs();
        if c != 0 {
            let lenient =
                reading == SignReading::AsPrinted && case == CaseTag::Mixed && i == 1 && d[1] == 0;
            if e != 0 && e != 1 {
                why.push(Rejection::Degree(i));
            } else if !lenient && ((e == 0 && c < 0) || (e == 1 && c > 0)) {
                why.push(Rejection::Sign(i));
            }
        }
        if mutated.terms[i].mu11() - &four >= mu_u {
            why.push(Rejection::SlopeWindow(i));
        }
    }
    let res = Resolution {
        case,
        pair: *pair,
        completion: *completion,
        coil,
        mutated,
        delta_p: d,
        mults,
        left_side,
    };
    if res.character() != *xi {
        why.push(Rejection::Bookkeeping);
    }
    if res.left_terms().is_empty() || res.right_terms().is_empty() {
        why.push(Rejection::EmptySide);
    }
    for &(i, j) in case.generated_homs() {
        let (x, y) = (coil.terms[i].slope(), coil.terms[j].slope());
        if y.mu1 < x.mu1 || y.mu2 < x.mu2 {
            why.push(Rejection::NotGenerated(i, j));
        }
    }
    Ok(if why.is_empty() { Ok(res) } else { Err(why) })
}

/// Index range searched along a completion system.
const SYSTEM_RADIUS: i64 = 8;
const SEARCH_WINDOW: std::ops::RangeInclusive<i64> = -7..=6;

/// The completion system of a pair, seeded at its minimally ranked completion pair.
pub fn completion_system(pair: &ExceptionalPair, db: &ExceptionalDb) -> Result<ExceptionalSystem> {
    let seed = db.minimal_completion(pair)?;
    ExceptionalSystem::generate(&seed, SYSTEM_RADIUS)
}

/// All admissible resolutions of `xi` for a pair and case, in the order they are
/// preferred.
///
/// For a system containing higher-rank bundles only the minimally ranked
/// completion pair is tried (shifted one step to the left in the mixed case).  A
/// system of line bundles has no minimal pair, so every admissible completion
/// pair along it is returned in system order.
pub fn resolution_options(
    xi: &Chern,
    pair: &ExceptionalPair,
    case: CaseTag,
    system: &ExceptionalSystem,
    reading: SignReading,
) -> Result<Vec<Resolution>> {
    let pick = |i: i64| -> Option<ExceptionalPair> {
        Some(ExceptionalPair {
            first: *system.get(i)?,
            second: *system.get(i + 1)?,
        })
    };
    let attempt = |i: i64| -> Result<Option<Resolution>> {
        let Some(completion) = pick(i) else {
            return Ok(None);
        };
        match resolve_with(xi, pair, case, &completion, reading) {
            Ok(Ok(r)) => Ok(Some(r)),
            Ok(Err(_)) | Err(Error::Resource(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let mut out = Vec::new();
    if system.is_line_system() {
        for i in SEARCH_WINDOW {
            out.extend(attempt(i)?);
        }
        return Ok(out);
    }
    let m = SEARCH_WINDOW
        .filter_map(|i| pick(i).map(|c| (c.first.rank as i128 + c.second.rank as i128, i)))
        .min()
        .map(|(_, i)| i)
        .ok_or_else(|| Error::CompletionNotFound(pair.to_string()))?;
    let p = if case == CaseTag::Mixed { m - 1 } else { m };
    out.extend(attempt(p)?);
    Ok(out)
}

/// The preferred resolution of `xi` by a pair, in the case selected by the signs.
pub fn resolution(
    xi: &Chern,
    pair: &ExceptionalPair,
    db: &ExceptionalDb,
    reading: SignReading,
) -> Result<Resolution> {
    let case = select_case(xi, pair).ok_or_else(|| Error::Bookkeeping("no case applies".into()))?;
    let system = completion_system(pair, db)?;
    resolution_options(xi, pair, case, &system, reading)?
        .into_iter()
        .next()
        .ok_or_else(|| {
            Error::Bookkeeping(format!(
                "no admissible resolution for {pair} in the {case} case"
            ))
        })
}

/// `1 - chi(xi, xi)`, the dimension of the moduli space when it is nonempty and
/// of expected dimension.
pub fn expected_moduli_dimension(xi: &Chern) -> Q {
    Q::from_integer(1.into()) - rel_chi(xi, xi)
}

/// True when the rational is zero.
pub fn is_zero(q: &Q) -> bool {
    q.is_zero()
}
