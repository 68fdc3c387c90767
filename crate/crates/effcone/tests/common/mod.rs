//! Generators shared by the property and acceptance tests.

// Each test binary uses a different subset of these helpers.
#![allow(dead_code)]

use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use proptest::prelude::*;

use effcone::beilinson::{CaseTag, Resolution};
use effcone::chern::{q, qi, Chern, Q};
use effcone::exceptional::{
    chi, exceptional_classes, left_mutation, mutate_coil_right, Coil, ExceptionalBundle,
    ExceptionalPair,
};

pub fn classes() -> &'static [ExceptionalBundle] {
    static C: OnceLock<Vec<ExceptionalBundle>> = OnceLock::new();
    C.get_or_init(|| exceptional_classes(50, 200_000).unwrap())
}

/// Exceptional pairs among twists of the default classes near the origin.
pub fn pairs() -> &'static [ExceptionalPair] {
    static P: OnceLock<Vec<ExceptionalPair>> = OnceLock::new();
    P.get_or_init(|| {
        let mut bundles = Vec::new();
        for c in classes().iter().filter(|c| c.rank <= 13) {
            for dx in -1..=1 {
                for dy in -1..=1 {
                    bundles.push(c.twist(dx, dy));
                }
            }
        }
        let mut out = Vec::new();
        for a in &bundles {
            for b in &bundles {
                let d = b.slope().sub(&a.slope());
                if a != b && d.mu1.abs() < qi(3) && d.mu2.abs() < qi(3) && chi(b, a) == 0 {
                    if let Ok(p) = ExceptionalPair::new(*a, *b) {
                        out.push(p);
                    }
                }
            }
        }
        out
    })
}

pub fn rational() -> impl Strategy<Value = Q> {
    (-40i64..=40, 1i64..=6).prop_map(|(n, d)| q(n, d))
}

pub fn character() -> impl Strategy<Value = Chern> {
    (rational(), rational(), rational(), rational())
        .prop_filter("nonzero rank", |(r, ..)| !r.is_zero())
        .prop_map(|(r, a, b, c)| Chern::new(r, a, b, c))
}

/// Applies a sequence of adjacent-pair left mutations to the standard coil.
pub fn coil_from(steps: &[usize]) -> Option<Coil> {
    let mut c = Coil::standard();
    for &i in steps {
        let p = ExceptionalPair {
            first: c.terms[i],
            second: c.terms[i + 1],
        };
        let m = left_mutation(&p).ok()?;
        if m.first.rank > 10_000 {
            return None;
        }
        c.terms[i] = m.first;
        c.terms[i + 1] = m.second;
    }
    Some(c)
}

/// A resolution built from `coil` whose only nonzero multiplicities are `a` on
/// the left at position `i` and `b` on the right at position `j`.
pub fn two_term_resolution(coil: Coil, i: usize, j: usize, a: i64, b: i64) -> Resolution {
    let mut mults = [0i64; 4];
    mults[i] = a;
    mults[j] = b;
    let mut left_side = [false; 4];
    left_side[i] = true;
    let pair = ExceptionalPair {
        first: coil.terms[i],
        second: coil.terms[j],
    };
    Resolution {
        case: CaseTag::Positive,
        pair,
        completion: pair,
        coil,
        mutated: mutate_coil_right(&coil).unwrap(),
        delta_p: [0, 0, 0, 1],
        mults,
        left_side,
    }
}
