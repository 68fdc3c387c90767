//! Serializable reports and their text, JSON and TeX renderings.

use std::fmt::Write as _;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::beilinson::{CaseTag, KroneckerData, Resolution};
use crate::chern::{fmt_q, Chern};
use crate::cone::{is_hilbert_character, ConeComputation, NsVector, RaySource};
use crate::exceptional::{exceptional_from_slope, ExceptionalPair};
use crate::extremal::{ExtremalPair, PointKind};
use crate::golden::RowCheck;

/// A character as four exact rationals `(rank, c1a, c1b, ch2)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterRecord {
    pub rank: String,
    pub c1a: String,
    pub c1b: String,
    pub ch2: String,
}

impl From<&Chern> for CharacterRecord {
    fn from(c: &Chern) -> Self {
        CharacterRecord {
            rank: fmt_q(&c.rank),
            c1a: fmt_q(&c.c1a),
            c1b: fmt_q(&c.c1b),
            ch2: fmt_q(&c.ch2),
        }
    }
}

/// A resolution `0 -> left -> right -> U -> 0` with its coil data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionRecord {
    pub case: CaseTag,
    pub arrows: String,
    /// Resolving coil in order.
    pub coil: Vec<String>,
    /// Multiplicity of each coil term.
    pub multiplicities: [i64; 4],
    pub left_side: [bool; 4],
    pub completion: [String; 2],
    pub delta_p: [u32; 4],
    pub kronecker: Option<KroneckerData>,
}

impl ResolutionRecord {
    pub fn new(r: &Resolution, target: &str) -> Self {
        ResolutionRecord {
            case: r.case,
            arrows: r.arrow_text(target),
            coil: r.coil.terms.iter().map(|e| e.to_string()).collect(),
            multiplicities: r.mults,
            left_side: r.left_side,
            completion: [
                r.completion.first.to_string(),
                r.completion.second.to_string(),
            ],
            delta_p: r.delta_p,
            kronecker: r.kronecker(),
        }
    }
}

/// An extremal pair with everything derived from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub pair: [String; 2],
    pub point_kind: PointKind,
    pub mu_plus: [String; 2],
    pub delta_plus: String,
    pub character: CharacterRecord,
    /// The Brill–Noether divisor, `D_V` for an exceptional `V` and `D_{xi+}` otherwise.
    pub divisor: String,
    pub resolution: ResolutionRecord,
    /// Conditions of the extremal-pair definition that are assumed, not checked.
    pub assumed: Vec<u8>,
}

/// A ray of the cone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayRecord {
    pub name: String,
    pub vector: [String; 3],
    /// `"secondary"` for `B`; otherwise the generating pairs, or `"mirror"` for
    /// rays obtained by symmetry only.
    pub source: Vec<String>,
    pub extremal: bool,
}

/// A facet with its two spanning rays and inequality at `c = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetRecord {
    pub rays: [String; 2],
    pub normal: [String; 3],
    pub inequality: String,
}

/// The full result for one character.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeReport {
    pub input: CharacterRecord,
    pub hilbert_points: Option<i64>,
    pub rank_bound: i64,
    pub controlling: Vec<String>,
    pub pairs: Vec<PairRecord>,
    pub rays: Vec<RayRecord>,
    pub facets: Vec<FacetRecord>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
}

fn vec3(v: &NsVector) -> [String; 3] {
    [fmt_q(&v.a), fmt_q(&v.b), fmt_q(&v.c)]
}

fn pair_names(p: &ExceptionalPair) -> [String; 2] {
    [p.first.to_string(), p.second.to_string()]
}

/// `D_V` for an orthogonal character that is exceptional.
pub fn divisor_name(ch: &Chern) -> String {
    let exceptional = ch
        .slope()
        .ok()
        .and_then(|mu| exceptional_from_slope(&mu).ok())
        .filter(|e| e.chern() == *ch);
    match exceptional {
        Some(e) => format!("D_{{{e}}}"),
        None => format!("D_{{{ch}}}"),
    }
}

impl PairRecord {
    pub fn new(p: &ExtremalPair, target: &str) -> Self {
        PairRecord {
            pair: pair_names(&p.pair),
            point_kind: p.point.kind,
            mu_plus: [fmt_q(&p.point.mu_plus.mu1), fmt_q(&p.point.mu_plus.mu2)],
            delta_plus: fmt_q(&p.point.delta_plus),
            character: (&p.character).into(),
            divisor: divisor_name(&p.character),
            resolution: ResolutionRecord::new(&p.resolution, target),
            assumed: p.assumed.clone(),
        }
    }
}

impl ConeReport {
    pub fn new(comp: &ConeComputation, rank_bound: i64) -> Self {
        let xi = &comp.analysis.xi;
        let hilbert_points = is_hilbert_character(xi)
            .then(|| (-&xi.ch2).to_integer().to_i64())
            .flatten();
        let target = if hilbert_points.is_some() { "I_Z" } else { "U" };
        let extremal: Vec<NsVector> = comp
            .cone
            .as_ref()
            .map(|c| c.rays.clone())
            .unwrap_or_default();
        let mut rays: Vec<RayRecord> = comp
            .rays
            .iter()
            .map(|r| RayRecord {
                name: r.vec.name(),
                vector: vec3(&r.vec),
                source: match &r.source {
                    RaySource::Secondary => vec!["secondary".into()],
                    RaySource::Orthogonal { pairs, .. } if pairs.is_empty() => {
                        vec!["mirror".into()]
                    }
                    RaySource::Orthogonal { pairs, .. } => {
                        pairs.iter().map(|p| p.to_string()).collect()
                    }
                },
                extremal: comp.cone.is_none() || extremal.contains(&r.vec),
            })
            .collect();
        // Cyclic order when a cone was assembled, with non-extremal rays last.
        rays.sort_by_key(|r| {
            let pos = extremal
                .iter()
                .position(|e| e.name() == r.name)
                .unwrap_or(usize::MAX);
            (pos, r.name.clone())
        });
        let facets = comp
            .cone
            .iter()
            .flat_map(|c| c.facets.iter())
            .map(|f| FacetRecord {
                rays: [f.rays[0].name(), f.rays[1].name()],
                normal: vec3(&f.normal),
                inequality: f.normal.inequality_text(),
            })
            .collect();
        ConeReport {
            input: xi.into(),
            hilbert_points,
            rank_bound,
            controlling: comp
                .analysis
                .controlling
                .iter()
                .map(|c| c.bundle.to_string())
                .collect(),
            pairs: comp
                .analysis
                .pairs
                .iter()
                .map(|p| PairRecord::new(p, target))
                .collect(),
            rays,
            facets,
            notes: comp.notes.clone(),
            warnings: comp.warnings.clone(),
        }
    }

    /// Names of the extremal rays in order.
    pub fn extremal_names(&self) -> Vec<String> {
        self.rays
            .iter()
            .filter(|r| r.extremal)
            .map(|r| r.name.clone())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> crate::Result<Self> {
        serde_json::from_str(s).map_err(|e| crate::Error::Parse(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let i = &self.input;
        let _ = writeln!(
            s,
            "character ({}, ({}, {}), {})",
            i.rank, i.c1a, i.c1b, i.ch2
        );
        if let Some(n) = self.hilbert_points {
            let _ = writeln!(s, "hilbert scheme of {n} points");
        }
        let _ = writeln!(s, "rank bound {}", self.rank_bound);
        let _ = writeln!(s, "controlling bundles: {}", self.controlling.join(", "));
        let _ = writeln!(s, "extremal pairs:");
        for p in &self.pairs {
            let c = &p.character;
            let _ = writeln!(
                s,
                "  {{{}, {}}} [{}]",
                p.pair[0],
                p.pair[1],
                kind_text(p.point_kind)
            );
            let _ = writeln!(
                s,
                "    point mu+ = ({}, {}), Delta+ = {}",
                p.mu_plus[0], p.mu_plus[1], p.delta_plus
            );
            let _ = writeln!(
                s,
                "    character ({}, ({}, {}), {}), divisor {}",
                c.rank, c.c1a, c.c1b, c.ch2, p.divisor
            );
            let _ = writeln!(s, "    {} case: {}", p.resolution.case, p.resolution.arrows);
            if let Some(k) = &p.resolution.kronecker {
                let _ = writeln!(
                    s,
                    "    Kronecker N = {}, dims ({}, {}), expected dimension {}",
                    k.n, k.a, k.b, k.edim
                );
            }
            let assumed: Vec<String> = p.assumed.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(s, "    assumed conditions: {}", assumed.join(", "));
        }
        let _ = writeln!(s, "rays:");
        for r in &self.rays {
            let tag = if r.extremal { "" } else { " (not extremal)" };
            let _ = writeln!(
                s,
                "  {} = ({}, {}, {}){tag}  from {}",
                r.name,
                r.vector[0],
                r.vector[1],
                r.vector[2],
                r.source.join("; ")
            );
        }
        if !self.facets.is_empty() {
            let _ = writeln!(s, "facets:");
            for f in &self.facets {
                let _ = writeln!(
                    s,
                    "  {}  between {} and {}",
                    f.inequality, f.rays[0], f.rays[1]
                );
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }

    /// A one-row TeX table in the layout of the published table.
    pub fn to_tex(&self) -> String {
        let label = match self.hilbert_points {
            Some(n) => n.to_string(),
            None => format!(
                "({}, ({}, {}), {})",
                self.input.rank, self.input.c1a, self.input.c1b, self.input.ch2
            ),
        };
        tex_table(&[(label, self.extremal_names())])
    }
}

fn kind_text(k: PointKind) -> &'static str {
    match k {
        PointKind::TripleIntersection => "triple intersection",
        PointKind::AlphaPoint => "alpha point",
        PointKind::BetaPoint => "beta point",
    }
}

/// A ray name in TeX, with fractions as `\frac`.
pub fn tex_ray(name: &str) -> String {
    let Some(inner) = name.strip_prefix("X_{").and_then(|s| s.strip_suffix('}')) else {
        return format!("${name}$");
    };
    let frac = |t: &str| match t.split_once('/') {
        Some((p, q)) => format!("\\frac{{{p}}}{{{q}}}"),
        None => t.to_string(),
    };
    let (a, b) = inner.split_once(',').unwrap_or((inner, ""));
    format!("$X_{{{},{}}}$", frac(a), frac(b))
}

/// Rows `(label, ray names)` as a TeX tabular.
pub fn tex_table(rows: &[(String, Vec<String>)]) -> String {
    let mut s =
        String::from("\\begin{tabular}{|c|c|}\n \\hline\n n & Extremal Rays  \\\\ \n \\hline\n");
    for (label, rays) in rows {
        let mut parts: Vec<String> = rays.iter().map(|r| tex_ray(r)).collect();
        if parts.len() > 1 {
            let last = parts.pop().expect("nonempty");
            parts.push(format!("and {last}"));
        }
        let sep = if parts.len() > 2 { ", " } else { " " };
        let _ = writeln!(s, " {label} & {} \\\\ \n \\hline", parts.join(sep));
    }
    s.push_str("\\end{tabular}\n");
    s
}

/// Orders extremal rays like the published table: `B`, then the primary rays by
/// decreasing `mu1`.
pub fn table_order(rays: &[NsVector]) -> Vec<NsVector> {
    let b = NsVector::b_ray().primitive();
    let mut prim: Vec<NsVector> = rays.iter().filter(|r| **r != b).cloned().collect();
    prim.sort_by(|x, y| {
        let kx = &x.a / &x.c;
        let ky = &y.a / &y.c;
        ky.cmp(&kx)
    });
    let mut out = Vec::new();
    if rays.contains(&b) {
        out.push(b);
    }
    out.extend(prim);
    out
}

/// One row of `table --check`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: i64,
    pub rays: Vec<String>,
    pub check: Option<CheckRecord>,
    pub warnings: Vec<String>,
}

/// Golden comparison of a row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub passed: bool,
    pub missing: Vec<String>,
    pub extra: Vec<String>,
}

impl From<&RowCheck> for CheckRecord {
    fn from(c: &RowCheck) -> Self {
        CheckRecord {
            passed: c.passed(),
            missing: c.missing.iter().map(|r| r.name()).collect(),
            extra: c.extra.iter().map(|r| r.name()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chern::qi;

    #[test]
    fn tex_rendering() {
        assert_eq!(tex_ray("X_{12/5,6/5}"), "$X_{\\frac{12}{5},\\frac{6}{5}}$");
        assert_eq!(tex_ray("B"), "$B$");
        let t = tex_table(&[(
            "2".into(),
            vec!["B".into(), "X_{1,0}".into(), "X_{0,1}".into()],
        )]);
        assert!(t.contains(" 2 & $B$, $X_{1,0}$, and $X_{0,1}$ \\\\"));
        let t = tex_table(&[("1".into(), vec!["B".into(), "X_{0,0}".into()])]);
        assert!(t.contains("$B$ and $X_{0,0}$"));
    }

    #[test]
    fn table_order_puts_b_first() {
        let rays = vec![
            NsVector::x(qi(0), qi(1)),
            NsVector::b_ray().primitive(),
            NsVector::x(qi(1), qi(0)),
        ];
        let names: Vec<String> = table_order(&rays).iter().map(|r| r.name()).collect();
        assert_eq!(names, ["B", "X_{1,0}", "X_{0,1}"]);
    }

    #[test]
    fn divisor_names() {
        assert_eq!(divisor_name(&Chern::ints(1, -1, 3, -3)), "D_{O(-1,3)}");
        assert_eq!(divisor_name(&Chern::ints(2, 4, 3, 5)), "D_{(2, (4, 3), 5)}");
    }
}
