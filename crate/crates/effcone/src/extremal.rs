//! Orthogonal surfaces, controlling exceptional bundles and extremal pairs.
//!
//! For a character `xi` the surface `Q_xi(nu) = P(mu(xi) + nu) - Delta(xi)` cuts
//! out the characters orthogonal to `xi`.  Exceptional bundles attaining the delta
//! surface along the curve `Q_xi = 1/2` control which orthogonal characters are
//! stable; pairs of them give candidate extremal rays of the effective cone.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::beilinson::{
    compatible_cases, completion_system, resolution_options, select_case, CaseTag, Resolution,
    SignReading,
};
use crate::chern::{hilbert_p, q, qi, rel_chi, Chern, Slope, Q};
use crate::error::{Error, Result};
use crate::exceptional::{chi, ExceptionalBundle, ExceptionalDb, ExceptionalPair, Window};
use crate::stability::{delta_surface, DELTA_REACH};

/// `Q_xi(mu) = P(mu(xi) + mu) - Delta(xi)`.
pub fn q_eval(xi: &Chern, mu: &Slope) -> Result<Q> {
    let m = xi.slope()?;
    Ok(hilbert_p(&(&m.mu1 + &mu.mu1), &(&m.mu2 + &mu.mu2)) - xi.discriminant()?)
}

/// An orthogonal surface written as `a nu1 nu2 + b nu1 + c nu2 + d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSurface {
    pub a: Q,
    pub b: Q,
    pub c: Q,
    pub d: Q,
}

impl QSurface {
    /// The surface orthogonal to a character of positive rank.
    pub fn of(base: &Chern) -> Result<Self> {
        let m = base.slope()?;
        let one = Q::one();
        Ok(QSurface {
            a: one.clone(),
            b: &m.mu2 + &one,
            c: &m.mu1 + &one,
            d: hilbert_p(&m.mu1, &m.mu2) - base.discriminant()?,
        })
    }

    pub fn eval(&self, nu: &Slope) -> Q {
        &self.a * &nu.mu1 * &nu.mu2 + &self.b * &nu.mu1 + &self.c * &nu.mu2 + &self.d
    }
}

/// Which twist of `E^*` supplies the corresponding surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceVariant {
    Dual,
    DualCanonical,
}

/// The surface corresponding to an exceptional bundle: that of `E^*` when
/// `chi(E^*, xi) > 0`, that of `E^*(K)` when it is negative, and none when zero.
pub fn corresponding_surface(
    e: &ExceptionalBundle,
    xi: &Chern,
) -> Result<Option<(SurfaceVariant, QSurface)>> {
    let s = rel_chi(&e.dual().chern(), xi);
    if s.is_positive() {
        Ok(Some((
            SurfaceVariant::Dual,
            QSurface::of(&e.dual().chern())?,
        )))
    } else if s.is_negative() {
        Ok(Some((
            SurfaceVariant::DualCanonical,
            QSurface::of(&e.dual().k().chern())?,
        )))
    } else {
        Ok(None)
    }
}

/// An exceptional bundle attaining the delta surface somewhere on `Q_xi = 1/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControllingBundle {
    pub bundle: ExceptionalBundle,
    /// A point of the curve where the bundle attains the delta surface.
    pub witness: Slope,
}

/// Parameters of the curve scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanConfig {
    pub step: Q,
    /// Bisection depth used where consecutive samples have different attainers.
    pub depth: u32,
    /// Cells added around the curve's bounding box when sizing the database window.
    pub padding: i64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            step: q(1, 64),
            depth: 24,
            padding: 4,
        }
    }
}

/// The scanned branch of the curve `Q_xi = 1/2`.
///
/// Writing `u = mu1(xi) + nu1 + 1` and `w = mu2(xi) + nu2 + 1`, the curve is the
/// hyperbola `u w = k` with `k = 1/2 + Delta(xi)`; the scan covers the symmetric
/// arc `1/2 <= u, w <= 2k`.
struct Curve {
    m1: Q,
    m2: Q,
    k: Q,
    t0: Q,
    t1: Q,
}

impl Curve {
    fn new(xi: &Chern) -> Result<Self> {
        let m = xi.slope()?;
        let k = q(1, 2) + xi.discriminant()?;
        if k <= q(1, 4) {
            return Err(Error::Coverage(format!(
                "the curve Q = 1/2 of {xi} has no scanned branch"
            )));
        }
        let one = Q::one();
        let t0 = q(1, 2) - &m.mu1 - &one;
        let t1 = qi(2) * &k - &m.mu1 - &one;
        Ok(Curve {
            m1: m.mu1,
            m2: m.mu2,
            k,
            t0,
            t1,
        })
    }

    fn point(&self, t: &Q) -> Slope {
        let one = Q::one();
        let u = &self.m1 + t + &one;
        Slope::new(t.clone(), &self.k / u - &self.m2 - &one)
    }

    /// Integer bounding box of the arc.
    fn bounds(&self) -> (i64, i64, i64, i64) {
        let lo = self.point(&self.t1).mu2;
        let hi = self.point(&self.t0).mu2;
        (floor(&self.t0), ceil(&self.t1), floor(&lo), ceil(&hi))
    }
}

fn floor(x: &Q) -> i64 {
    x.floor()
        .to_integer()
        .to_i64()
        .expect("slope coordinate fits in i64")
}

fn ceil(x: &Q) -> i64 {
    x.ceil()
        .to_integer()
        .to_i64()
        .expect("slope coordinate fits in i64")
}

/// Database window needed to scan the curve of `xi`.
pub fn scan_window(xi: &Chern, cfg: &ScanConfig) -> Result<Window> {
    let (a, b, c, d) = Curve::new(xi)?.bounds();
    Ok(Window::new(a, b, c, d).padded(cfg.padding))
}

/// Dyadic brackets `[s, s + 2^-26]` around `sqrt(x)` for `x >= 0`.
fn sqrt_bracket(x: &Q) -> [Q; 2] {
    const BITS: u32 = 26;
    let scale = BigInt::one() << (2 * BITS);
    let n = (x.numer() * &scale) / x.denom();
    let s = n.sqrt();
    let den = BigInt::one() << BITS;
    [Q::new(s.clone(), den.clone()), Q::new(s + 1, den)]
}

/// Curve parameters near the points where the lexicographic order of `E` and the
/// curve point flips, which is where the branch of `delta_E` changes.
fn crossing_samples(curve: &Curve, db: &ExceptionalDb) -> Result<Vec<Q>> {
    let mut out = Vec::new();
    let (i_lo, i_hi) = (floor(&curve.t0) - 1, floor(&curve.t1) + 1);
    let two = qi(2);
    for i in i_lo..=i_hi {
        let a = std::cmp::max(curve.t0.clone(), qi(i - 1));
        let b = std::cmp::min(curve.t1.clone(), qi(i + 2));
        if a > b {
            continue;
        }
        let (hi, lo) = (curve.point(&a).mu2, curve.point(&b).mu2);
        for j in floor(&lo) - 1..=floor(&hi) + 1 {
            db.require_cell(i, j)?;
            for e in db.cell(i, j) {
                let es = e.slope();
                let c = es.mu11() + &curve.m1 + &curve.m2 + &two;
                let disc = &c * &c - qi(4) * &curve.k;
                if disc.is_negative() {
                    continue;
                }
                let reach = q(1, e.rank);
                for s in sqrt_bracket(&disc) {
                    for u in [(&c + &s) / &two, (&c - &s) / &two] {
                        if !u.is_positive() {
                            continue;
                        }
                        let nu1 = &u - &curve.m1 - Q::one();
                        if (&nu1 - &es.mu1).abs() <= reach && curve.t0 <= nu1 && nu1 <= curve.t1 {
                            out.push(nu1);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Scans the curve `Q_xi = 1/2` and returns every bundle attaining the delta
/// surface along it, sorted by slope.
///
/// Samples are taken on a grid of the configured step together with points
/// bracketing every branch change of a nearby bundle; between consecutive samples
/// with different attainers the curve is bisected.
pub fn controlling_exceptionals(
    xi: &Chern,
    db: &ExceptionalDb,
    cfg: &ScanConfig,
) -> Result<Vec<ControllingBundle>> {
    let curve = Curve::new(xi)?;
    let mut ts: BTreeSet<Q> = BTreeSet::new();
    let mut t = curve.t0.clone();
    while t < curve.t1 {
        ts.insert(t.clone());
        t += &cfg.step;
    }
    ts.insert(curve.t1.clone());
    ts.extend(crossing_samples(&curve, db)?);

    let mut memo: BTreeMap<Q, Vec<ExceptionalBundle>> = BTreeMap::new();
    let samples: Vec<Q> = ts.into_iter().collect();
    for t in &samples {
        attainers_at(&curve, t, db, &mut memo)?;
    }
    for w in samples.windows(2) {
        refine(&curve, &w[0], &w[1], cfg.depth, db, &mut memo)?;
    }

    let mut found: BTreeMap<ExceptionalBundle, Slope> = BTreeMap::new();
    for (t, att) in &memo {
        for e in att {
            found.entry(*e).or_insert_with(|| curve.point(t));
        }
    }
    let mut out: Vec<ControllingBundle> = found
        .into_iter()
        .map(|(bundle, witness)| ControllingBundle { bundle, witness })
        .collect();
    out.sort_by(|x, y| (x.bundle.slope(), x.bundle).cmp(&(y.bundle.slope(), y.bundle)));
    Ok(out)
}

fn attainers_at<'m>(
    curve: &Curve,
    t: &Q,
    db: &ExceptionalDb,
    memo: &'m mut BTreeMap<Q, Vec<ExceptionalBundle>>,
) -> Result<&'m Vec<ExceptionalBundle>> {
    if !memo.contains_key(t) {
        let nu = curve.point(t);
        let d = delta_surface(&nu, db)?;
        let att: BTreeSet<ExceptionalBundle> = d
            .attainers
            .iter()
            .filter_map(|e| canonical_attainer(e, &nu))
            .collect();
        memo.insert(t.clone(), att.into_iter().collect());
    }
    Ok(&memo[t])
}

/// Normalizes an attainer by twisting with a multiple of `K` so that
/// `mu11(E) - mu11(nu)` lies in `(-2, 2]`.  Both twists give the same delta value,
/// and the representative nearest the curve is the one that controls it.
fn canonical_attainer(e: &ExceptionalBundle, nu: &Slope) -> Option<ExceptionalBundle> {
    let d = e.mu11() - nu.mu11();
    let two = qi(2);
    if d > two {
        Some(e.k())
    } else if d <= -&two {
        if d == -two {
            None
        } else {
            Some(e.minus_k())
        }
    } else {
        Some(*e)
    }
}

fn refine(
    curve: &Curve,
    a: &Q,
    b: &Q,
    depth: u32,
    db: &ExceptionalDb,
    memo: &mut BTreeMap<Q, Vec<ExceptionalBundle>>,
) -> Result<()> {
    let left = attainers_at(curve, a, db, memo)?.clone();
    if depth == 0 || left == *attainers_at(curve, b, db, memo)? {
        return Ok(());
    }
    let c = (a + b) / qi(2);
    refine(curve, a, &c, depth - 1, db, memo)?;
    refine(curve, &c, b, depth - 1, db, memo)
}

/// How the orthogonal point of a pair was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointKind {
    /// Intersection of `Q_xi` with both corresponding surfaces.
    TripleIntersection,
    /// `chi(E_alpha^*, xi) = 0`: the point is `E_alpha` itself.
    AlphaPoint,
    /// `chi(E_beta^*, xi) = 0`: the point is `E_beta` itself.
    BetaPoint,
}

/// The corresponding orthogonal point `(mu+, Delta+)` of a pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalPoint {
    pub mu_plus: Slope,
    pub delta_plus: Q,
    pub kind: PointKind,
}

/// The orthogonal point of a pair of controlling bundles.
pub fn orthogonal_point(
    xi: &Chern,
    alpha: &ExceptionalBundle,
    beta: &ExceptionalBundle,
) -> Result<OrthogonalPoint> {
    let sa = rel_chi(&alpha.dual().chern(), xi);
    let sb = rel_chi(&beta.dual().chern(), xi);
    let degenerate = || Error::DegeneratePair(format!("{{{alpha}, {beta}}} for {xi}"));
    if sa.is_zero() && sb.is_zero() {
        return Err(degenerate());
    }
    if sa.is_zero() {
        return Ok(OrthogonalPoint {
            mu_plus: alpha.slope(),
            delta_plus: alpha.discriminant(),
            kind: PointKind::AlphaPoint,
        });
    }
    if sb.is_zero() {
        return Ok(OrthogonalPoint {
            mu_plus: beta.slope(),
            delta_plus: beta.discriminant(),
            kind: PointKind::BetaPoint,
        });
    }
    let qx = QSurface::of(xi)?;
    let qa = corresponding_surface(alpha, xi)?.ok_or_else(degenerate)?.1;
    let qb = corresponding_surface(beta, xi)?.ok_or_else(degenerate)?.1;
    // All surfaces share the quadratic term, so differences are linear.
    let (b1, c1, d1) = (&qx.b - &qa.b, &qx.c - &qa.c, &qx.d - &qa.d);
    let (b2, c2, d2) = (&qx.b - &qb.b, &qx.c - &qb.c, &qx.d - &qb.d);
    let det = &b1 * &c2 - &c1 * &b2;
    if det.is_zero() {
        return Err(degenerate());
    }
    let x = (-&d1 * &c2 + &d2 * &c1) / &det;
    let y = (-&b1 * &d2 + &b2 * &d1) / &det;
    let mu_plus = Slope::new(x, y);
    let delta_plus = qx.eval(&mu_plus);
    Ok(OrthogonalPoint {
        mu_plus,
        delta_plus,
        kind: PointKind::TripleIntersection,
    })
}

/// Bound on the rank searched for an orthogonal character.
const MAX_ORTHOGONAL_RANK: i64 = 1 << 20;

/// The character of least positive rank with the given slope and discriminant and
/// integral `c1` and `chi`.
pub fn orthogonal_character(point: &OrthogonalPoint) -> Result<Chern> {
    let mu = &point.mu_plus;
    let step = mu.mu1.denom().lcm(mu.mu2.denom());
    let step = step
        .to_i64()
        .ok_or_else(|| Error::Resource("slope denominator too large".into()))?;
    let mut r = step;
    while r <= MAX_ORTHOGONAL_RANK {
        let v = Chern::from_slope_delta(qi(r), mu, &point.delta_plus)?;
        if v.euler_chi().is_integer() {
            return Ok(v);
        }
        r += step;
    }
    Err(Error::Resource(format!(
        "no orthogonal character of rank at most {MAX_ORTHOGONAL_RANK}"
    )))
}

/// The ray of a character in slope coordinates `(mu1, mu2)`.
pub fn ray_slope(ch: &Chern) -> Result<Slope> {
    ch.slope()
}

/// A stable pair of controlling bundles with its orthogonal point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControllingPair {
    pub pair: ExceptionalPair,
    pub point: OrthogonalPoint,
}

/// Ordered exceptional pairs of controlling bundles whose orthogonal point is
/// stable.  Pairs whose point is one of the members are kept without a stability
/// test, since their point is an exceptional bundle.
pub fn controlling_pairs(
    xi: &Chern,
    controlling: &[ControllingBundle],
    db: &ExceptionalDb,
) -> Result<Vec<ControllingPair>> {
    let mut out = Vec::new();
    for a in controlling {
        for b in controlling {
            let (a, b) = (a.bundle, b.bundle);
            if a == b || chi(&b, &a) != 0 {
                continue;
            }
            let Ok(point) = orthogonal_point(xi, &a, &b) else {
                continue;
            };
            if point.kind == PointKind::TripleIntersection {
                let d = delta_surface(&point.mu_plus, &db.covering(&point.mu_plus, DELTA_REACH))?;
                if point.delta_plus < d.value {
                    continue;
                }
            }
            out.push(ControllingPair {
                pair: ExceptionalPair::new(a, b)?,
                point,
            });
        }
    }
    Ok(out)
}

/// True when the orthogonal point lies on or above every corresponding surface.
pub fn dominates(
    xi: &Chern,
    point: &OrthogonalPoint,
    controlling: &[ControllingBundle],
) -> Result<bool> {
    for g in controlling {
        if let Some((_, s)) = corresponding_surface(&g.bundle, xi)? {
            if point.delta_plus < s.eval(&point.mu_plus) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True when the two slopes differ by at most one in each coordinate.
pub fn within_unit(pair: &ExceptionalPair) -> bool {
    let d = pair.first.slope().sub(&pair.second.slope());
    d.mu1.abs() <= Q::one() && d.mu2.abs() <= Q::one()
}

/// Conditions of the extremal-pair definitions that are assumed rather than checked.
pub const ASSUMED_CONDITIONS: [u8; 2] = [5, 6];

/// An extremal pair with its orthogonal data and the resolution it induces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtremalPair {
    pub pair: ExceptionalPair,
    pub point: OrthogonalPoint,
    pub character: Chern,
    pub case: CaseTag,
    pub resolution: Resolution,
    pub assumed: Vec<u8>,
}

/// Everything computed for one character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtremalAnalysis {
    pub xi: Chern,
    pub controlling: Vec<ControllingBundle>,
    pub pairs: Vec<ExtremalPair>,
}

/// A controlling pair that passes the numeric extremality tests, with its case
/// and every admissible resolution.
struct Candidate {
    cp: ControllingPair,
    case: CaseTag,
    options: Vec<Resolution>,
}

/// Finds the extremal pairs of `xi`.
///
/// A pair with a triple-intersection point must dominate every corresponding
/// surface, have slopes within a unit of each other and admit a resolution in the
/// case selected by the signs of `chi(E_alpha^*, xi)` and `chi(E_beta^*, xi)`.  A
/// pair whose point is `E_alpha` only needs the resolution, and is dropped when
/// its ray is already produced by a triple-intersection pair.  Pairs whose point
/// is `E_beta` are never extremal: the same ray arises from a pair with the roles
/// exchanged.
///
/// Along a system of line bundles several completion pairs may resolve the same
/// character.  Pairs are assigned resolutions in order of their ray (the half
/// with `mu1 >= mu2` first for mirror-symmetric characters, whose other half is
/// mirrored), skipping resolutions already used by an earlier pair.
pub fn extremal_pairs(
    xi: &Chern,
    controlling: &[ControllingBundle],
    db: &ExceptionalDb,
    reading: SignReading,
) -> Result<Vec<ExtremalPair>> {
    let mut cands: Vec<Candidate> = Vec::new();
    for cp in controlling_pairs(xi, controlling, db)? {
        let triple = match cp.point.kind {
            PointKind::BetaPoint => continue,
            PointKind::TripleIntersection => true,
            PointKind::AlphaPoint => false,
        };
        if triple && (!dominates(xi, &cp.point, controlling)? || !within_unit(&cp.pair)) {
            continue;
        }
        let Some(case) = select_case(xi, &cp.pair) else {
            continue;
        };
        let system = match completion_system(&cp.pair, db) {
            Ok(s) => s,
            Err(Error::CompletionNotFound(_)) => continue,
            Err(e) => return Err(e),
        };
        let options = resolution_options(xi, &cp.pair, case, &system, reading)?;
        if options.is_empty() {
            continue;
        }
        cands.push(Candidate { cp, case, options });
    }
    let triple_rays: BTreeSet<Slope> = cands
        .iter()
        .filter(|c| c.cp.point.kind == PointKind::TripleIntersection)
        .map(|c| c.cp.point.mu_plus.clone())
        .collect();
    cands.retain(|c| {
        c.cp.point.kind == PointKind::TripleIntersection
            || !triple_rays.contains(&c.cp.point.mu_plus)
    });

    let symmetric = *xi == xi.mirror();
    let key = |c: &Candidate| (c.cp.point.mu_plus.clone(), c.cp.pair);
    let leads = |c: &Candidate| {
        let m = &c.cp.point.mu_plus;
        !symmetric || m.mu1 > m.mu2 || (m.mu1 == m.mu2 && c.cp.pair <= c.cp.pair.mirror())
    };
    let mut order: Vec<usize> = (0..cands.len()).filter(|&i| leads(&cands[i])).collect();
    order.sort_by(|&i, &j| key(&cands[i]).cmp(&key(&cands[j])));

    let mut claimed: BTreeSet<(Vec<(ExceptionalBundle, i64)>, Vec<(ExceptionalBundle, i64)>)> =
        BTreeSet::new();
    let mut chosen: BTreeMap<ExceptionalPair, Resolution> = BTreeMap::new();
    for i in order {
        let c = &cands[i];
        let pick = c
            .options
            .iter()
            .find(|r| !claimed.contains(&resolution_terms(r)))
            .unwrap_or(&c.options[0])
            .clone();
        claimed.insert(resolution_terms(&pick));
        if symmetric {
            claimed.insert(resolution_terms(&mirror_resolution(&pick)));
        }
        chosen.insert(c.cp.pair, pick);
    }

    let mut out = Vec::new();
    for c in &cands {
        let resolution = match chosen.get(&c.cp.pair) {
            Some(r) => r.clone(),
            None => {
                let m = chosen.get(&c.cp.pair.mirror()).map(mirror_resolution);
                m.unwrap_or_else(|| c.options[0].clone())
            }
        };
        let character = orthogonal_character(&c.cp.point)?;
        out.push(ExtremalPair {
            pair: c.cp.pair,
            point: c.cp.point.clone(),
            character,
            case: c.case,
            resolution,
            assumed: ASSUMED_CONDITIONS.to_vec(),
        });
    }
    out.sort_by(|x, y| (&x.point.mu_plus, x.pair).cmp(&(&y.point.mu_plus, y.pair)));
    Ok(out)
}

fn resolution_terms(
    r: &Resolution,
) -> (Vec<(ExceptionalBundle, i64)>, Vec<(ExceptionalBundle, i64)>) {
    let mut l = r.left_terms();
    let mut rt = r.right_terms();
    l.sort();
    rt.sort();
    (l, rt)
}

/// The resolution obtained by exchanging the two rulings.
pub fn mirror_resolution(r: &Resolution) -> Resolution {
    let mut out = r.clone();
    out.pair = r.pair.mirror();
    out.completion = r.completion.mirror();
    out.coil.terms = r.coil.terms.map(|e| e.mirror());
    out.mutated.terms = r.mutated.terms.map(|e| e.mirror());
    out
}

/// Runs the full search for one character: the curve scan, the controlling pairs
/// and the extremal filter.
pub fn analyze(
    xi: &Chern,
    db: &ExceptionalDb,
    cfg: &ScanConfig,
    reading: SignReading,
) -> Result<ExtremalAnalysis> {
    let controlling = controlling_exceptionals(xi, db, cfg)?;
    let pairs = extremal_pairs(xi, &controlling, db, reading)?;
    Ok(ExtremalAnalysis {
        xi: xi.clone(),
        controlling,
        pairs,
    })
}

/// Cases compatible with the signs of a pair, for diagnostics.
pub fn pair_cases(xi: &Chern, pair: &ExceptionalPair) -> Vec<CaseTag> {
    compatible_cases(xi, pair)
}
