//! Closed instances of every axiom.

use super::{AxiomTag, Instantiation};
use crate::syntax::{parse_with, Abbreviations, PureContext, Term};

#[derive(Clone, Debug)]
pub struct Fixture {
    pub tag: AxiomTag,
    pub instantiation: Instantiation,
    pub lhs: Term,
    pub rhs: Term,
    /// Whether the two sides should be bisimilar. Only `S-elim` with a
    /// value body is expected to fail: a stuck term is not a value.
    pub bisimilar: bool,
}

/// Three or more closed instances per axiom.
pub fn fixtures() -> Vec<Fixture> {
    let a = Abbreviations::standard();
    let t = |s: &str| Some(parse_with(s, &a).expect("fixture term"));
    let e = |s: &str| Some(PureContext::parse_with(s, &a).expect("fixture context"));
    let none = Instantiation::default;

    let table: Vec<(AxiomTag, Instantiation)> = vec![
        (AxiomTag::BetaV, Instantiation { t: t("x x"), v: t("i"), ..none() }),
        (AxiomTag::BetaV, Instantiation { t: t("x"), v: t("w"), ..none() }),
        (AxiomTag::BetaV, Instantiation { t: t("<x (S k. k x)>"), v: t("i"), ..none() }),
        (AxiomTag::BetaV, Instantiation { t: t("\\y.x y"), v: t("\\z.S k.k z"), ..none() }),
        (AxiomTag::EtaV, Instantiation { v: t("i"), ..none() }),
        (AxiomTag::EtaV, Instantiation { v: t("w"), ..none() }),
        (AxiomTag::EtaV, Instantiation { v: t("\\y.S k. k y"), ..none() }),
        (AxiomTag::BetaOmega, Instantiation { context: e("@"), t: t("i i"), ..none() }),
        (AxiomTag::BetaOmega, Instantiation { context: e("@ w"), t: t("S k. k i"), ..none() }),
        (AxiomTag::BetaOmega, Instantiation { context: e("i (@ i)"), t: t("omega"), ..none() }),
        (AxiomTag::BetaOmega, Instantiation { context: e("w @"), t: t("S k. i"), ..none() }),
        (AxiomTag::ResetValue, Instantiation { v: t("i"), ..none() }),
        (AxiomTag::ResetValue, Instantiation { v: t("w"), ..none() }),
        (AxiomTag::ResetValue, Instantiation { v: t("\\y.S k. k y"), ..none() }),
        (AxiomTag::ResetShift, Instantiation { context: e("@"), t: t("k i"), ..none() }),
        (AxiomTag::ResetShift, Instantiation { context: e("@ w"), t: t("k i"), ..none() }),
        (AxiomTag::ResetShift, Instantiation { context: e("i @"), t: t("k (k w)"), ..none() }),
        (AxiomTag::ResetShift, Instantiation { context: e("@ (w w)"), t: t("i"), ..none() }),
        (AxiomTag::ResetLift, Instantiation { t0: t("x"), t1: t("i"), ..none() }),
        (AxiomTag::ResetLift, Instantiation { t0: t("x x"), t1: t("S k. k w"), ..none() }),
        (AxiomTag::ResetLift, Instantiation { t0: t("S k. x"), t1: t("w i"), ..none() }),
        (AxiomTag::ShiftReset, Instantiation { t: t("k i"), ..none() }),
        (AxiomTag::ShiftReset, Instantiation { t: t("i"), ..none() }),
        (AxiomTag::ShiftReset, Instantiation { t: t("k (k w)"), ..none() }),
        (AxiomTag::ShiftElim, Instantiation { t: t("i"), ..none() }),
        (AxiomTag::ShiftElim, Instantiation { t: t("w"), ..none() }),
        (AxiomTag::ShiftElim, Instantiation { t: t("\\x.omega"), ..none() }),
    ];
    table
        .into_iter()
        .map(|(tag, instantiation)| {
            let (lhs, rhs) = instantiation.sides(tag).expect("fixture satisfies side conditions");
            debug_assert!(lhs.is_closed() && rhs.is_closed());
            Fixture { tag, instantiation, lhs, rhs, bisimilar: tag != AxiomTag::ShiftElim }
        })
        .collect()
}
