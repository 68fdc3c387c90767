//! Néron–Severi rays and the polyhedral cone they span.
//!
//! Divisor classes on the Hilbert scheme are written `D = a H1 + b H2 - (c/2) B`,
//! so the Brill–Noether ray of an orthogonal character of slope `(i, j)` is
//! `X_{i,j} = (i, j, 1)` and the locus of nonreduced schemes is `B = (0, 0, -2)`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::beilinson::SignReading;
use crate::chern::{fmt_q, qi, rel_chi, Chern, Q};
use crate::error::{Error, Result};
use crate::exceptional::{ExceptionalDb, ExceptionalPair};
use crate::extremal::{analyze, ExtremalAnalysis, ScanConfig};

/// A vector `(a, b, c)` in the Néron–Severi space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NsVector {
    pub a: Q,
    pub b: Q,
    pub c: Q,
}

impl NsVector {
    pub fn new(a: Q, b: Q, c: Q) -> Self {
        NsVector { a, b, c }
    }

    pub fn ints(a: i64, b: i64, c: i64) -> Self {
        NsVector::new(qi(a), qi(b), qi(c))
    }

    /// `X_{i,j} = i H1 + j H2 - B/2`.
    pub fn x(i: Q, j: Q) -> Self {
        NsVector::new(i, j, Q::one())
    }

    /// The class `B` of the locus of nonreduced schemes.
    pub fn b_ray() -> Self {
        NsVector::ints(0, 0, -2)
    }

    pub fn dot(&self, o: &NsVector) -> Q {
        &self.a * &o.a + &self.b * &o.b + &self.c * &o.c
    }

    pub fn cross(&self, o: &NsVector) -> NsVector {
        NsVector::new(
            &self.b * &o.c - &self.c * &o.b,
            &self.c * &o.a - &self.a * &o.c,
            &self.a * &o.b - &self.b * &o.a,
        )
    }

    pub fn add(&self, o: &NsVector) -> NsVector {
        NsVector::new(&self.a + &o.a, &self.b + &o.b, &self.c + &o.c)
    }

    pub fn neg(&self) -> NsVector {
        NsVector::new(-&self.a, -&self.b, -&self.c)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    /// Swaps the two rulings.
    pub fn mirror(&self) -> NsVector {
        NsVector::new(self.b.clone(), self.a.clone(), self.c.clone())
    }

    /// The integral vector of gcd one on the same ray (a positive multiple).
    pub fn primitive(&self) -> NsVector {
        if self.is_zero() {
            return self.clone();
        }
        let mut l = BigInt::one();
        for x in [&self.a, &self.b, &self.c] {
            l = l.lcm(x.denom());
        }
        let ints: Vec<BigInt> = [&self.a, &self.b, &self.c]
            .iter()
            .map(|x| (*x * Q::from_integer(l.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
        let v: Vec<Q> = ints.into_iter().map(|x| Q::from_integer(x / &g)).collect();
        NsVector::new(v[0].clone(), v[1].clone(), v[2].clone())
    }

    /// Name in the usual notation: `B`, `X_{i,j}` when `c > 0`, `Y_{a,b}` when `c = 0`.
    pub fn name(&self) -> String {
        let p = self.primitive();
        if p == NsVector::b_ray().primitive() {
            return "B".into();
        }
        if p.c.is_positive() {
            return format!("X_{{{},{}}}", fmt_q(&(&p.a / &p.c)), fmt_q(&(&p.b / &p.c)));
        }
        if p.c.is_zero() {
            return format!("Y_{{{},{}}}", fmt_q(&p.a), fmt_q(&p.b));
        }
        format!("({}, {}, {})", fmt_q(&p.a), fmt_q(&p.b), fmt_q(&p.c))
    }

    /// The facet inequality `a x + b y + c >= 0` of a normal, rendered at `c = 1`
    /// with integer coefficients as `p a + q b >= r`.
    pub fn inequality_text(&self) -> String {
        let p = self.primitive();
        let term = |k: &Q, v: &str| -> String {
            if k.is_one() {
                v.to_string()
            } else if *k == -Q::one() {
                format!("-{v}")
            } else {
                format!("{}{v}", fmt_q(k))
            }
        };
        let mut lhs = Vec::new();
        if !p.a.is_zero() {
            lhs.push(term(&p.a, "a"));
        }
        if !p.b.is_zero() {
            lhs.push(term(&p.b, "b"));
        }
        let lhs = if lhs.is_empty() {
            "0".to_string()
        } else {
            lhs.join(" + ").replace("+ -", "- ")
        };
        format!("{lhs} >= {}", fmt_q(&-&p.c))
    }
}

impl fmt::Display for NsVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            fmt_q(&self.a),
            fmt_q(&self.b),
            fmt_q(&self.c)
        )
    }
}

/// A facet of a three-dimensional cone with the two extremal rays spanning it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    /// Primitive inward normal: nonnegative on every ray.
    pub normal: NsVector,
    pub rays: [NsVector; 2],
}

/// Extremal rays in cyclic order and the facets between consecutive ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssembledCone {
    pub rays: Vec<NsVector>,
    pub facets: Vec<Facet>,
    /// Input rays that turned out not to be extremal.
    pub interior: Vec<NsVector>,
}

/// Computes the extremal rays and facets of the cone spanned by `rays`.
///
/// Every pair of rays spanning a supporting plane gives a facet; on each facet
/// the two outermost rays are the extremal ones.  Fails when the rays do not
/// span a salient three-dimensional cone.
pub fn assemble_cone(rays: &[NsVector]) -> Result<AssembledCone> {
    let input: BTreeSet<NsVector> = rays
        .iter()
        .filter(|r| !r.is_zero())
        .map(|r| r.primitive())
        .collect();
    let v: Vec<NsVector> = input.into_iter().collect();
    if v.iter().any(|r| v.contains(&r.neg())) {
        return Err(Error::NonSalient);
    }
    let mut normals: BTreeSet<NsVector> = BTreeSet::new();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let n = v[i].cross(&v[j]);
            if n.is_zero() {
                continue;
            }
            let signs: Vec<Q> = v.iter().map(|r| n.dot(r)).collect();
            if signs.iter().all(|s| !s.is_negative()) {
                normals.insert(n.primitive());
            } else if signs.iter().all(|s| !s.is_positive()) {
                normals.insert(n.neg().primitive());
            }
        }
    }
    let sum = v.iter().fold(NsVector::ints(0, 0, 0), |s, r| s.add(r));
    if normals.len() < 3 || normals.iter().any(|n| !n.dot(&sum).is_positive()) {
        return Err(Error::NonSalient);
    }
    let mut facets = Vec::new();
    let mut extremal: BTreeSet<NsVector> = BTreeSet::new();
    for n in &normals {
        let on: Vec<&NsVector> = v.iter().filter(|r| n.dot(r).is_zero()).collect();
        // Within the facet plane, a ray is outermost when every other ray lies on
        // one side of it.
        let outer: Vec<NsVector> = on
            .iter()
            .filter(|r| {
                let s: Vec<Q> = on.iter().map(|o| r.cross(o).dot(n)).collect();
                s.iter().all(|x| !x.is_negative()) || s.iter().all(|x| !x.is_positive())
            })
            .map(|r| (*r).clone())
            .collect();
        if outer.len() != 2 {
            return Err(Error::NonSalient);
        }
        extremal.extend(outer.iter().cloned());
        facets.push(Facet {
            normal: n.clone(),
            rays: [outer[0].clone(), outer[1].clone()],
        });
    }
    let (rays, facets) = cyclic_order(&facets)?;
    let interior = v.into_iter().filter(|r| !extremal.contains(r)).collect();
    Ok(AssembledCone {
        rays,
        facets,
        interior,
    })
}

/// Orders facets so that consecutive ones share a ray, starting from the
/// smallest ray.
fn cyclic_order(facets: &[Facet]) -> Result<(Vec<NsVector>, Vec<Facet>)> {
    let start = facets
        .iter()
        .flat_map(|f| f.rays.iter())
        .min()
        .cloned()
        .ok_or(Error::NonSalient)?;
    let mut rays = vec![start.clone()];
    let mut ordered: Vec<Facet> = Vec::new();
    let mut used = vec![false; facets.len()];
    let mut cur = start.clone();
    // Walk in the direction that makes the first step go to the smaller neighbour.
    let first = facets
        .iter()
        .enumerate()
        .filter(|(_, f)| f.rays.contains(&cur))
        .min_by_key(|(_, f)| other(f, &cur).clone())
        .map(|(i, _)| i)
        .ok_or(Error::NonSalient)?;
    let mut next_idx = Some(first);
    while let Some(i) = next_idx {
        used[i] = true;
        let f = &facets[i];
        let nxt = other(f, &cur).clone();
        ordered.push(Facet {
            normal: f.normal.clone(),
            rays: [cur.clone(), nxt.clone()],
        });
        if nxt == start {
            break;
        }
        rays.push(nxt.clone());
        cur = nxt;
        next_idx = (0..facets.len()).find(|&j| !used[j] && facets[j].rays.contains(&cur));
    }
    if ordered.len() != facets.len() || ordered.last().map(|f| &f.rays[1]) != Some(&start) {
        return Err(Error::NonSalient);
    }
    Ok((rays, ordered))
}

impl AssembledCone {
    /// The facet whose relative interior contains a non-extremal ray, if any.
    pub fn facet_containing(&self, r: &NsVector) -> Option<&Facet> {
        let r = r.primitive();
        self.facets
            .iter()
            .find(|f| f.normal.dot(&r).is_zero() && !f.rays.contains(&r))
    }
}

fn other<'a>(f: &'a Facet, r: &NsVector) -> &'a NsVector {
    if f.rays[0] == *r {
        &f.rays[1]
    } else {
        &f.rays[0]
    }
}

/// The characters `zeta_0`, `zeta_a`, `zeta_b` spanning the orthogonal complement
/// of `xi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NsBasisCharacters {
    pub zeta_0: Chern,
    pub zeta_a: Chern,
    pub zeta_b: Chern,
}

/// The basis of `xi^perp` used to identify it with the Néron–Severi space.
///
/// The `ch2` entry of `zeta_a` pairs the `H1` direction with the `H2` component
/// of `c1(xi)` (and symmetrically for `zeta_b`), which is what orthogonality to
/// `xi` requires.
pub fn ns_basis(xi: &Chern) -> Result<NsBasisCharacters> {
    if !xi.rank.is_positive() {
        return Err(Error::RankZero);
    }
    let r = &xi.rank;
    let z = Q::zero();
    Ok(NsBasisCharacters {
        zeta_0: Chern::new(r.clone(), z.clone(), z.clone(), -xi.euler_chi()),
        zeta_a: Chern::new(z.clone(), r.clone(), z.clone(), -r - &xi.c1b),
        zeta_b: Chern::new(z.clone(), z, r.clone(), -r - &xi.c1a),
    })
}

/// Coordinates of an orthogonal character in the basis `(zeta_a, zeta_b, zeta_0)`.
///
/// For the Hilbert scheme this is the ray `X_{mu1, mu2}` in `(H1, H2, -B/2)`
/// coordinates.
pub fn ray_of_character(xi_plus: &Chern, xi: &Chern) -> Result<NsVector> {
    let perp = rel_chi(&xi_plus.dual(), xi);
    if !perp.is_zero() {
        return Err(Error::DegeneratePair(format!(
            "{xi_plus} is not orthogonal to {xi}"
        )));
    }
    let r = &xi.rank;
    Ok(NsVector::new(&xi_plus.c1a / r, &xi_plus.c1b / r, &xi_plus.rank / r).primitive())
}

/// Where a ray of the cone came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RaySource {
    /// The secondary ray `B`, added from geometry rather than computed.
    Secondary,
    /// Brill–Noether rays of orthogonal characters of extremal pairs.
    Orthogonal {
        character: Chern,
        pairs: Vec<ExceptionalPair>,
    },
}

/// A ray of the cone with its provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeRay {
    pub vec: NsVector,
    pub source: RaySource,
}

/// The result of the full pipeline for one character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeComputation {
    pub analysis: ExtremalAnalysis,
    /// Candidate rays with provenance (primary rays and, for Hilbert schemes, `B`).
    pub rays: Vec<ConeRay>,
    pub cone: Option<AssembledCone>,
    /// Informational remarks, such as computed rays lying inside a facet.
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
}

impl ConeComputation {
    /// Extremal rays in cyclic order, or the candidate rays when no cone was assembled.
    pub fn extremal_rays(&self) -> Vec<NsVector> {
        match &self.cone {
            Some(c) => c.rays.clone(),
            None => self.rays.iter().map(|r| r.vec.clone()).collect(),
        }
    }

    /// True when some computed ray lies strictly inside the cone or the cone could
    /// not be assembled.
    pub fn incomplete(&self) -> bool {
        !self.warnings.is_empty()
    }
}

/// True for `(1, (0, 0), -n)`.
pub fn is_hilbert_character(xi: &Chern) -> bool {
    xi.rank.is_one() && xi.c1a.is_zero() && xi.c1b.is_zero()
}

/// Runs the pipeline and assembles the cone.
///
/// For Hilbert schemes the primary rays are closed under the mirror symmetry and
/// `B` is added.  For other characters the primary rays are emitted in the
/// `zeta` basis and no secondary ray is added.
pub fn effective_cone(
    xi: &Chern,
    db: &ExceptionalDb,
    cfg: &ScanConfig,
    reading: SignReading,
) -> Result<ConeComputation> {
    let analysis = analyze(xi, db, cfg, reading)?;
    let hilbert = is_hilbert_character(xi);
    let mut rays: Vec<ConeRay> = Vec::new();
    let mut warnings = Vec::new();
    let mut notes = Vec::new();
    let mut push = |vec: NsVector, character: &Chern, pair: Option<ExceptionalPair>| {
        if let Some(r) = rays.iter_mut().find(|r| r.vec == vec) {
            if let (RaySource::Orthogonal { pairs, .. }, Some(p)) = (&mut r.source, pair) {
                if !pairs.contains(&p) {
                    pairs.push(p);
                }
            }
            return;
        }
        let pairs = pair.into_iter().collect();
        rays.push(ConeRay {
            vec,
            source: RaySource::Orthogonal {
                character: character.clone(),
                pairs,
            },
        });
    };
    for p in &analysis.pairs {
        let v = ray_of_character(&p.character, xi)?;
        push(v.clone(), &p.character, Some(p.pair));
        if hilbert {
            push(v.mirror(), &p.character.mirror(), None);
        }
    }
    if hilbert {
        rays.push(ConeRay {
            vec: NsVector::b_ray().primitive(),
            source: RaySource::Secondary,
        });
    } else {
        warnings.push(
            "coordinates are in the basis (zeta_a, zeta_b, zeta_0) of the orthogonal complement; secondary rays are not computed"
                .to_string(),
        );
    }
    let vecs: Vec<NsVector> = rays.iter().map(|r| r.vec.clone()).collect();
    let cone = match assemble_cone(&vecs) {
        Ok(c) => {
            for r in &c.interior {
                match c.facet_containing(r) {
                    Some(f) => notes.push(format!(
                        "computed ray {} lies on the edge between {} and {}",
                        r.name(),
                        f.rays[0].name(),
                        f.rays[1].name()
                    )),
                    None => warnings.push(format!("computed ray {} is not extremal", r.name())),
                }
            }
            Some(c)
        }
        Err(Error::NonSalient) if !hilbert => None,
        Err(Error::NonSalient) => {
            warnings
                .push("the computed rays do not span a salient three-dimensional cone".to_string());
            None
        }
        Err(e) => return Err(e),
    };
    Ok(ConeComputation {
        analysis,
        rays,
        cone,
        notes,
        warnings,
    })
}

/// The Hilbert scheme of `n` points.
pub fn effective_cone_hilbert(
    n: i64,
    db: &ExceptionalDb,
    cfg: &ScanConfig,
    reading: SignReading,
) -> Result<ConeComputation> {
    effective_cone(&Chern::hilbert_scheme(n), db, cfg, reading)
}

/// The point where the boundary of the slice `c = 1` meets the diagonal `a = b`,
/// away from `B`.
pub fn symmetric_value(cone: &AssembledCone) -> Option<Q> {
    let b = NsVector::b_ray().primitive();
    cone.facets
        .iter()
        .filter(|f| !f.rays.contains(&b))
        .find_map(|f| {
            let [r, s] = &f.rays;
            let (dr, ds) = (&r.a - &r.b, &s.a - &s.b);
            if dr.is_positive() && ds.is_positive() || dr.is_negative() && ds.is_negative() {
                return None;
            }
            let n = &f.normal;
            let den = &n.a + &n.b;
            if den.is_zero() {
                return None;
            }
            Some(-&n.c / den)
        })
}

/// True when the two rays span a facet of the cone.
pub fn adjacent(cone: &AssembledCone, x: &NsVector, y: &NsVector) -> bool {
    let (x, y) = (x.primitive(), y.primitive());
    cone.facets
        .iter()
        .any(|f| f.rays.contains(&x) && f.rays.contains(&y))
}
