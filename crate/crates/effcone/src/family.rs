//! Checks of the infinite families of rays, edges and symmetric values of
//! effective cones of Hilbert schemes of points.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chern::{fmt_q, q, qi, Q};
use crate::cone::{adjacent, symmetric_value, ConeComputation, NsVector};
use crate::engine::Engine;
use crate::error::{Error, Result};

/// A family of statements indexed by `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `n = 2k`: `X_{2k-1,0}` and `X_{k-1,1}` span an edge.
    EvenEdge,
    /// `n = 2k+1`: `X_{2k,0}` and `X_{2k(k-1)/(2k-1), 2k/(2k-1)}` span an edge.
    OddEdge,
    /// `n = k`: `B` and `X_{n-1,0}` span the edge `b >= 0`.
    AllNEdge,
    /// `n = 3k+1`: `X_{k-1/2,2}` is an extremal ray.
    ThreeKPlusOneRay,
    /// The four closed forms of the symmetric value.
    SymmetricValues,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::EvenEdge,
        Family::OddEdge,
        Family::AllNEdge,
        Family::ThreeKPlusOneRay,
        Family::SymmetricValues,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Family::EvenEdge => "even-edge",
            Family::OddEdge => "odd-edge",
            Family::AllNEdge => "all-n-edge",
            Family::ThreeKPlusOneRay => "3k+1-ray",
            Family::SymmetricValues => "symmetric-values",
        }
    }

    /// The range of `k` checked by default.
    pub fn default_range(self) -> std::ops::RangeInclusive<i64> {
        match self {
            Family::EvenEdge | Family::OddEdge => 2..=10,
            Family::AllNEdge => 2..=16,
            Family::ThreeKPlusOneRay => 2..=5,
            Family::SymmetricValues => 1..=4,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::Parse(format!("unknown family {s:?}")))
    }
}

/// The outcome of one statement at one `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCheck {
    pub family: Family,
    pub k: i64,
    pub n: i64,
    pub statement: String,
    pub passed: bool,
    pub detail: String,
}

/// Which symmetric-value form applies to `n = f(k)`.
#[derive(Clone, Copy)]
struct SymmetricForm {
    label: &'static str,
    min_k: i64,
    n: fn(i64) -> Vec<i64>,
    value: fn(i64) -> Q,
}

const SYMMETRIC_FORMS: [SymmetricForm; 4] = [
    SymmetricForm {
        label: "I",
        min_k: 2,
        n: |k| vec![k * k - 2],
        value: |k| qi(k - 1) - q(1, 2 * k - 2),
    },
    SymmetricForm {
        label: "II",
        min_k: 2,
        n: |k| vec![k * k - 1, k * k],
        value: |k| qi(k - 1),
    },
    SymmetricForm {
        label: "III",
        min_k: 2,
        n: |k| vec![k * k + 1],
        value: |k| qi(k - 1) + q(1, k + 1),
    },
    SymmetricForm {
        label: "IV",
        min_k: 1,
        n: |k| vec![k * k + k],
        value: |k| qi(k) - q(1, 2),
    },
];

/// Runs family checks, computing each Hilbert scheme at most once.
pub struct FamilyRunner<'a> {
    engine: &'a Engine,
    cones: BTreeMap<i64, ConeComputation>,
}

impl<'a> FamilyRunner<'a> {
    pub fn new(engine: &'a Engine) -> Self {
        FamilyRunner {
            engine,
            cones: BTreeMap::new(),
        }
    }

    /// The cone of `n` points, computed on first use.
    pub fn cone(&mut self, n: i64) -> Result<&ConeComputation> {
        if !self.cones.contains_key(&n) {
            let c = self.engine.hilbert(n)?;
            self.cones.insert(n, c);
        }
        Ok(&self.cones[&n])
    }

    /// Checks `family` at every `k` in `ks`.  Values of `k` outside the family's
    /// domain are skipped.
    pub fn run(
        &mut self,
        family: Family,
        ks: impl IntoIterator<Item = i64>,
    ) -> Result<Vec<FamilyCheck>> {
        let mut out = Vec::new();
        for k in ks {
            match family {
                Family::EvenEdge if k >= 2 => {
                    let x = NsVector::x(qi(2 * k - 1), qi(0));
                    let y = NsVector::x(qi(k - 1), qi(1));
                    out.push(self.edge(family, k, 2 * k, &x, &y)?);
                }
                Family::OddEdge if k >= 2 => {
                    let x = NsVector::x(qi(2 * k), qi(0));
                    let y = NsVector::x(q(2 * k * (k - 1), 2 * k - 1), q(2 * k, 2 * k - 1));
                    out.push(self.edge(family, k, 2 * k + 1, &x, &y)?);
                }
                Family::AllNEdge if k >= 2 => {
                    let x = NsVector::b_ray();
                    let y = NsVector::x(qi(k - 1), qi(0));
                    let mut check = self.edge(family, k, k, &x, &y)?;
                    if check.passed {
                        let cone = self
                            .cone(k)?
                            .cone
                            .as_ref()
                            .expect("adjacency implies an assembled cone");
                        let (x, y) = (x.primitive(), y.primitive());
                        let f = cone
                            .facets
                            .iter()
                            .find(|f| f.rays.contains(&x) && f.rays.contains(&y))
                            .expect("facet exists");
                        let text = f.normal.inequality_text();
                        check.passed = text == "b >= 0";
                        check.detail = format!("facet {text}");
                    }
                    out.push(check);
                }
                Family::ThreeKPlusOneRay if k >= 2 => {
                    let n = 3 * k + 1;
                    let x = NsVector::x(qi(k) - q(1, 2), qi(2)).primitive();
                    let rays = self.rays(n)?;
                    let passed = rays.contains(&x);
                    out.push(FamilyCheck {
                        family,
                        k,
                        n,
                        statement: format!("{} is an extremal ray", x.name()),
                        passed,
                        detail: self.ray_detail(n)?,
                    });
                }
                Family::SymmetricValues => {
                    for form in SYMMETRIC_FORMS {
                        if k < form.min_k {
                            continue;
                        }
                        let expected = (form.value)(k);
                        for n in (form.n)(k) {
                            let got = self.cone(n)?.cone.as_ref().and_then(symmetric_value);
                            out.push(FamilyCheck {
                                family,
                                k,
                                n,
                                statement: format!(
                                    "({}) symmetric value {}",
                                    form.label,
                                    fmt_q(&expected)
                                ),
                                passed: got.as_ref() == Some(&expected),
                                detail: match got {
                                    Some(v) => format!("computed {}", fmt_q(&v)),
                                    None => "no facet crosses the diagonal".into(),
                                },
                            });
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(out)
    }

    fn rays(&mut self, n: i64) -> Result<Vec<NsVector>> {
        Ok(self.cone(n)?.extremal_rays())
    }

    fn ray_detail(&mut self, n: i64) -> Result<String> {
        let names: Vec<String> = self.rays(n)?.iter().map(|r| r.name()).collect();
        Ok(format!("rays {}", names.join(", ")))
    }

    fn edge(
        &mut self,
        family: Family,
        k: i64,
        n: i64,
        x: &NsVector,
        y: &NsVector,
    ) -> Result<FamilyCheck> {
        let comp = self.cone(n)?;
        let passed = comp.cone.as_ref().is_some_and(|c| adjacent(c, x, y));
        let detail = self.ray_detail(n)?;
        Ok(FamilyCheck {
            family,
            k,
            n,
            statement: format!("{} and {} span an edge", x.name(), y.name()),
            passed,
            detail,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_ids_parse() {
        for f in Family::ALL {
            assert_eq!(f.id().parse::<Family>().unwrap(), f);
        }
        assert!("odd".parse::<Family>().is_err());
    }

    #[test]
    fn symmetric_forms_at_small_k() {
        let v: Vec<(Vec<i64>, Q)> = SYMMETRIC_FORMS
            .iter()
            .map(|f| ((f.n)(3), (f.value)(3)))
            .collect();
        assert_eq!(v[0], (vec![7], q(7, 4)));
        assert_eq!(v[1], (vec![8, 9], qi(2)));
        assert_eq!(v[2], (vec![10], q(9, 4)));
        assert_eq!(v[3], (vec![12], q(5, 2)));
    }
}
