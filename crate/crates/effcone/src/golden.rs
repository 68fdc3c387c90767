//! The published table of extremal rays of the effective cones of Hilbert schemes
//! of `n <= 16` points on P1 x P1, embedded for self-contained checking.

use std::collections::BTreeSet;

use crate::chern::parse_q;
use crate::cone::NsVector;
use crate::error::Result;

/// Rows `(n, rays)`; each ray is `"B"` or the slope `"i j"` of `X_{i,j}`.
const TABLE: &[(i64, &[&str])] = &[
    (2, &["B", "1 0", "0 1"]),
    (3, &["B", "2 0", "0 2"]),
    (4, &["B", "3 0", "1 1", "0 3"]),
    (5, &["B", "4 0", "4/3 4/3", "0 4"]),
    (6, &["B", "5 0", "2 1", "1 2", "0 5"]),
    (
        7,
        &["B", "6 0", "12/5 6/5", "2 3/2", "3/2 2", "6/5 12/5", "0 6"],
    ),
    (8, &["B", "7 0", "3 1", "1 3", "0 7"]),
    (9, &["B", "8 0", "24/7 8/7", "2 2", "8/7 24/7", "0 8"]),
    (10, &["B", "9 0", "4 1", "5/2 2", "2 5/2", "1 4", "0 9"]),
    (
        11,
        &[
            "B",
            "10 0",
            "40/9 10/9",
            "4 4/3",
            "12/5 12/5",
            "4/3 4",
            "10/9 40/9",
            "0 10",
        ],
    ),
    (12, &["B", "11 0", "5 1", "3 2", "2 3", "1 5", "0 11"]),
    (
        13,
        &[
            "B",
            "12 0",
            "60/11 12/11",
            "9/2 3/2",
            "7/2 2",
            "8/3 8/3",
            "2 7/2",
            "3/2 9/2",
            "12/11 60/11",
            "0 12",
        ],
    ),
    (
        14,
        &["B", "13 0", "6 1", "10/3 7/3", "7/3 10/3", "1 6", "0 13"],
    ),
    (
        15,
        &[
            "B",
            "14 0",
            "84/13 14/13",
            "4 2",
            "2 4",
            "14/13 84/13",
            "0 14",
        ],
    ),
    (
        16,
        &["B", "15 0", "7 1", "9/2 2", "3 3", "2 9/2", "1 7", "0 15"],
    ),
];

/// Range of `n` covered by the table.
pub const GOLDEN_RANGE: std::ops::RangeInclusive<i64> = 2..=16;

fn parse_ray(s: &str) -> Result<NsVector> {
    if s == "B" {
        return Ok(NsVector::b_ray().primitive());
    }
    let mut it = s.split_whitespace();
    let a = parse_q(it.next().unwrap_or(""))?;
    let b = parse_q(it.next().unwrap_or(""))?;
    Ok(NsVector::x(a, b).primitive())
}

/// The primitive rays of row `n`, in the order printed.
pub fn golden_rays(n: i64) -> Option<Vec<NsVector>> {
    let (_, row) = TABLE.iter().find(|(m, _)| *m == n)?;
    Some(
        row.iter()
            .map(|s| parse_ray(s).expect("embedded table parses"))
            .collect(),
    )
}

/// Per-row comparison against the table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowCheck {
    pub n: i64,
    pub missing: Vec<NsVector>,
    pub extra: Vec<NsVector>,
}

impl RowCheck {
    pub fn passed(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty()
    }
}

/// Compares computed extremal rays with row `n`; `None` when `n` is not tabulated.
pub fn check_row(n: i64, computed: &[NsVector]) -> Option<RowCheck> {
    let expected: BTreeSet<NsVector> = golden_rays(n)?.into_iter().collect();
    let got: BTreeSet<NsVector> = computed.iter().map(|r| r.primitive()).collect();
    Some(RowCheck {
        n,
        missing: expected.difference(&got).cloned().collect(),
        extra: got.difference(&expected).cloned().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chern::qi;
    use crate::cone::assemble_cone;

    #[test]
    fn rows_are_mirror_symmetric_cones() {
        for n in GOLDEN_RANGE {
            let rays = golden_rays(n).unwrap();
            let set: BTreeSet<NsVector> = rays.iter().cloned().collect();
            for r in &rays {
                assert!(set.contains(&r.mirror()), "row {n} not symmetric");
            }
            let c = assemble_cone(&rays).unwrap();
            assert_eq!(c.rays.len(), rays.len(), "row {n} has a non-extremal ray");
            assert!(set.contains(&NsVector::x(qi(n - 1), qi(0))));
        }
    }
}
