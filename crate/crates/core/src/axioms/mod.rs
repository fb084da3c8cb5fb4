//! The equational theory of shift and reset, used as a rewrite system in
//! both directions, with a bounded proof search.
//!
//! Variables count as values throughout, and rewrites apply under binders.

mod fixtures;
mod search;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::syntax::{Frame, Hint, PureContext, Term, Var};

pub use fixtures::{fixtures, Fixture};
pub use search::{
    cross_check, prove_equal, prove_equal_with, replay, CrossCheck, ProofStep, ProofTrace, SearchConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AxiomTag {
    /// `(λx.t) v = t[x := v]`
    #[serde(rename = "beta-v")]
    BetaV,
    /// `λx.v x = v` if `x ∉ fv(v)`
    #[serde(rename = "eta-v")]
    EtaV,
    /// `(λx.E[x]) t = E[t]` if `x ∉ fv(E)`
    #[serde(rename = "beta-omega")]
    BetaOmega,
    /// `⟨v⟩ = v`
    #[serde(rename = "reset-value")]
    ResetValue,
    /// `⟨E[S k.t]⟩ = ⟨t[k := λx.⟨E[x]⟩]⟩`
    #[serde(rename = "reset-shift")]
    ResetShift,
    /// `⟨(λx.t0) ⟨t1⟩⟩ = (λx.⟨t0⟩) ⟨t1⟩`
    #[serde(rename = "reset-lift")]
    ResetLift,
    /// `S k.⟨t⟩ = S k.t`
    #[serde(rename = "S-reset")]
    ShiftReset,
    /// `S k.k t = t` if `k ∉ fv(t)`
    #[serde(rename = "S-elim")]
    ShiftElim,
}

impl AxiomTag {
    pub const ALL: [AxiomTag; 8] = [
        AxiomTag::BetaV,
        AxiomTag::EtaV,
        AxiomTag::BetaOmega,
        AxiomTag::ResetValue,
        AxiomTag::ResetShift,
        AxiomTag::ResetLift,
        AxiomTag::ShiftReset,
        AxiomTag::ShiftElim,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomTag::BetaV => "beta-v",
            AxiomTag::EtaV => "eta-v",
            AxiomTag::BetaOmega => "beta-omega",
            AxiomTag::ResetValue => "reset-value",
            AxiomTag::ResetShift => "reset-shift",
            AxiomTag::ResetLift => "reset-lift",
            AxiomTag::ShiftReset => "S-reset",
            AxiomTag::ShiftElim => "S-elim",
        }
    }
}

impl fmt::Display for AxiomTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AxiomTag {
    type Err = String;

    fn from_str(s: &str) -> Result<AxiomTag, String> {
        AxiomTag::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown axiom `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Direction {
    #[serde(rename = "L->R")]
    LeftToRight,
    #[serde(rename = "R->L")]
    RightToLeft,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::LeftToRight => Direction::RightToLeft,
            Direction::RightToLeft => Direction::LeftToRight,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::LeftToRight => "L->R",
            Direction::RightToLeft => "R->L",
        })
    }
}

/// A path of child indices from the root. Application has children 0
/// (function) and 1 (argument); binders and reset have child 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<u8>);

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u8::to_string).collect();
        write!(f, "({})", parts.join("."))
    }
}

/// The subterm at `pos`, if the path exists.
pub fn subterm_at<'a>(t: &'a Term, pos: &[u8]) -> Option<&'a Term> {
    let Some((&first, rest)) = pos.split_first() else { return Some(t) };
    let child = match (t, first) {
        (Term::Lam(_, b) | Term::Shift(_, b) | Term::Reset(b), 0) => b,
        (Term::App(f, _), 0) => f,
        (Term::App(_, a), 1) => a,
        _ => return None,
    };
    subterm_at(child, rest)
}

/// `t` with the subterm at `pos` replaced by `new`.
pub fn replace_at(t: &Term, pos: &[u8], new: Term) -> Option<Term> {
    let Some((&first, rest)) = pos.split_first() else { return Some(new) };
    Some(match (t, first) {
        (Term::Lam(h, b), 0) => Term::Lam(h.clone(), Arc::new(replace_at(b, rest, new)?)),
        (Term::Shift(h, b), 0) => Term::Shift(h.clone(), Arc::new(replace_at(b, rest, new)?)),
        (Term::Reset(b), 0) => Term::Reset(Arc::new(replace_at(b, rest, new)?)),
        (Term::App(f, a), 0) => Term::App(Arc::new(replace_at(f, rest, new)?), a.clone()),
        (Term::App(f, a), 1) => Term::App(f.clone(), Arc::new(replace_at(a, rest, new)?)),
        _ => return None,
    })
}

/// A single rewrite of one subterm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rewrite {
    pub position: Position,
    pub axiom: AxiomTag,
    pub direction: Direction,
    /// The subterm before and after; indices dangling out of it refer to
    /// binders above `position`.
    pub from: Term,
    pub to: Term,
    /// The whole term after the rewrite.
    pub result: Term,
}

/// How many frames the context of `beta-omega` may have when the axiom is
/// used right to left.
pub const DEFAULT_FRAME_BOUND: usize = 2;

/// Every single-step rewrite of `t`, at every position, in both directions.
pub fn axiom_matches(t: &Term) -> Vec<Rewrite> {
    axiom_matches_with(t, DEFAULT_FRAME_BOUND)
}

pub(crate) fn axiom_matches_with(t: &Term, frame_bound: usize) -> Vec<Rewrite> {
    let mut positions = Vec::new();
    collect_positions(t, &mut Vec::new(), &mut positions);
    let mut out = Vec::new();
    for (path, sub) in positions {
        for (axiom, direction, to) in root_rewrites(sub, frame_bound) {
            let result = replace_at(t, &path, to.clone()).expect("collected path exists");
            out.push(Rewrite {
                position: Position(path.clone()),
                axiom,
                direction,
                from: sub.clone(),
                to,
                result,
            });
        }
    }
    out
}

fn collect_positions<'a>(t: &'a Term, path: &mut Vec<u8>, out: &mut Vec<(Vec<u8>, &'a Term)>) {
    out.push((path.clone(), t));
    match t {
        Term::Lam(_, b) | Term::Shift(_, b) | Term::Reset(b) => {
            path.push(0);
            collect_positions(b, path, out);
            path.pop();
        }
        Term::App(f, a) => {
            path.push(0);
            collect_positions(f, path, out);
            path.pop();
            path.push(1);
            collect_positions(a, path, out);
            path.pop();
        }
        Term::Bound(_) | Term::Free(_) => {}
    }
}

fn root_rewrites(t: &Term, frame_bound: usize) -> Vec<(AxiomTag, Direction, Term)> {
    let mut out = Vec::new();
    for tag in AxiomTag::ALL {
        for r in left_to_right(tag, t) {
            out.push((tag, Direction::LeftToRight, r));
        }
        for r in right_to_left(tag, t, frame_bound) {
            out.push((tag, Direction::RightToLeft, r));
        }
    }
    out
}

/// Does `lhs = rhs` instantiate `tag` read left to right, at the root?
pub(crate) fn is_instance(tag: AxiomTag, lhs: &Term, rhs: &Term) -> bool {
    left_to_right(tag, lhs).iter().any(|r| r == rhs)
}

/// `λx.⟨E[x]⟩` for a context whose terms may have dangling indices.
fn reified(e: &PureContext) -> Term {
    let body = e.shifted(1, 0).plug(Term::Bound(0));
    Term::Lam(Hint::new("x"), Arc::new(Term::reset(body)))
}

/// Ways to read `t` as `E[s]` with `E` pure, innermost frame first in `E`,
/// hole positions listed from the root downwards.
fn pure_splits(t: &Term, max_frames: usize) -> Vec<(PureContext, Term)> {
    let mut out = Vec::new();
    let mut outer_first = Vec::new();
    split_rec(t, max_frames, &mut outer_first, &mut out);
    out
}

fn split_rec(t: &Term, budget: usize, outer_first: &mut Vec<Frame>, out: &mut Vec<(PureContext, Term)>) {
    let mut frames = outer_first.clone();
    frames.reverse();
    out.push((PureContext::from_frames_unchecked(frames), t.clone()));
    if budget == 0 {
        return;
    }
    if let Term::App(f, a) = t {
        outer_first.push(Frame::PendingArg((**a).clone()));
        split_rec(f, budget - 1, outer_first, out);
        outer_first.pop();
        if f.is_value_or_var() {
            outer_first.push(Frame::AppliedValue((**f).clone()));
            split_rec(a, budget - 1, outer_first, out);
            outer_first.pop();
        }
    }
}

fn left_to_right(tag: AxiomTag, t: &Term) -> Vec<Term> {
    match tag {
        AxiomTag::BetaV => match t {
            Term::App(f, a) if a.is_value_or_var() => match &**f {
                Term::Lam(_, body) => vec![body.open_with(a)],
                _ => vec![],
            },
            _ => vec![],
        },
        AxiomTag::EtaV => match t {
            Term::Lam(_, b) => match &**b {
                Term::App(f, a) if **a == Term::Bound(0) && f.is_value_or_var() && !f.has_loose(0) => {
                    vec![f.shifted(-1, 0)]
                }
                _ => vec![],
            },
            _ => vec![],
        },
        AxiomTag::BetaOmega => match t {
            Term::App(f, arg) => match &**f {
                Term::Lam(_, body) => pure_splits(body, usize::MAX)
                    .into_iter()
                    .filter(|(e, hole)| *hole == Term::Bound(0) && !e.has_loose(0))
                    .map(|(e, _)| e.shifted(-1, 0).plug((**arg).clone()))
                    .collect(),
                _ => vec![],
            },
            _ => vec![],
        },
        AxiomTag::ResetValue => match t {
            Term::Reset(b) if b.is_value_or_var() => vec![(**b).clone()],
            _ => vec![],
        },
        AxiomTag::ResetShift => match t {
            Term::Reset(b) => pure_splits(b, usize::MAX)
                .into_iter()
                .filter_map(|(e, hole)| match hole {
                    Term::Shift(_, body) => Some(Term::reset(body.open_with(&reified(&e)))),
                    _ => None,
                })
                .collect(),
            _ => vec![],
        },
        AxiomTag::ResetLift => match t {
            Term::Reset(b) => match &**b {
                Term::App(f, a) => match (&**f, &**a) {
                    (Term::Lam(h, t0), Term::Reset(_)) => vec![Term::App(
                        Arc::new(Term::Lam(h.clone(), Arc::new(Term::Reset(t0.clone())))),
                        a.clone(),
                    )],
                    _ => vec![],
                },
                _ => vec![],
            },
            _ => vec![],
        },
        AxiomTag::ShiftReset => match t {
            Term::Shift(h, b) => match &**b {
                Term::Reset(inner) => vec![Term::Shift(h.clone(), inner.clone())],
                _ => vec![],
            },
            _ => vec![],
        },
        AxiomTag::ShiftElim => match t {
            Term::Shift(_, b) => match &**b {
                Term::App(k, arg) if **k == Term::Bound(0) && !arg.has_loose(0) => {
                    vec![arg.shifted(-1, 0)]
                }
                _ => vec![],
            },
            _ => vec![],
        },
    }
}

/// Right-to-left rewrites. `beta-v` and `reset-shift` are not used in this
/// direction: their right-hand sides are results of substitution, and
/// inverting substitution has no finite enumeration.
fn right_to_left(tag: AxiomTag, t: &Term, frame_bound: usize) -> Vec<Term> {
    match tag {
        AxiomTag::BetaV | AxiomTag::ResetShift => vec![],
        AxiomTag::EtaV if t.is_value_or_var() => {
            let body = Term::App(Arc::new(t.shifted(1, 0)), Arc::new(Term::Bound(0)));
            vec![Term::Lam(Hint::new("x"), Arc::new(body))]
        }
        AxiomTag::BetaOmega => pure_splits(t, frame_bound)
            .into_iter()
            .map(|(e, s)| {
                let body = e.shifted(1, 0).plug(Term::Bound(0));
                Term::app(Term::Lam(Hint::new("x"), Arc::new(body)), s)
            })
            .collect(),
        AxiomTag::ResetValue if t.is_value_or_var() => vec![Term::reset(t.clone())],
        AxiomTag::ResetLift => match t {
            Term::App(f, a) => match (&**f, &**a) {
                (Term::Lam(h, b), Term::Reset(_)) => match &**b {
                    Term::Reset(t0) => {
                        vec![Term::reset(Term::App(Arc::new(Term::Lam(h.clone(), t0.clone())), a.clone()))]
                    }
                    _ => vec![],
                },
                _ => vec![],
            },
            _ => vec![],
        },
        AxiomTag::ShiftReset => match t {
            Term::Shift(h, b) => vec![Term::Shift(h.clone(), Arc::new(Term::Reset(b.clone())))],
            _ => vec![],
        },
        AxiomTag::ShiftElim => {
            let body = Term::App(Arc::new(Term::Bound(0)), Arc::new(t.shifted(1, 0)));
            vec![Term::Shift(Hint::new("k"), Arc::new(body))]
        }
        AxiomTag::EtaV | AxiomTag::ResetValue => vec![],
    }
}

/// Named metavariables for building both sides of an axiom.
///
/// Terms may mention `x` and `k` freely; the builder binds them.
#[derive(Clone, Debug, Default)]
pub struct Instantiation {
    pub x: Option<Var>,
    pub k: Option<Var>,
    pub t: Option<Term>,
    pub t0: Option<Term>,
    pub t1: Option<Term>,
    pub v: Option<Term>,
    pub context: Option<PureContext>,
}

impl Instantiation {
    /// The left- and right-hand side of `tag` under this instantiation.
    pub fn sides(&self, tag: AxiomTag) -> Result<(Term, Term)> {
        let x = self.x.clone().unwrap_or_else(|| Var::raw("x"));
        let k = self.k.clone().unwrap_or_else(|| Var::raw("k"));
        let need = |slot: &Option<Term>, name: &str| {
            slot.clone()
                .ok_or_else(|| Error::MissingMetavariable { axiom: tag.name().into(), name: name.into() })
        };
        let context = || {
            self.context
                .clone()
                .ok_or_else(|| Error::MissingMetavariable { axiom: tag.name().into(), name: "E".into() })
        };
        let violated = |detail: String| Error::SideCondition { axiom: tag.name().into(), detail };
        let value = |v: Term| {
            if v.is_value_or_var() {
                Ok(v)
            } else {
                Err(violated(format!("`{v}` is not a value")))
            }
        };
        let lam = |body: Term| Term::lam(x.as_str(), body);
        Ok(match tag {
            AxiomTag::BetaV => {
                let (t, v) = (need(&self.t, "t")?, value(need(&self.v, "v")?)?);
                (Term::app(lam(t.clone()), v.clone()), t.substitute(&x, &v))
            }
            AxiomTag::EtaV => {
                let v = value(need(&self.v, "v")?)?;
                if v.free_vars().contains(&x) {
                    return Err(violated(format!("`{x}` occurs free in `{v}`")));
                }
                (lam(Term::app(v.clone(), Term::Free(x.clone()))), v)
            }
            AxiomTag::BetaOmega => {
                let (e, t) = (context()?, need(&self.t, "t")?);
                if e.free_vars().contains(&x) {
                    return Err(violated(format!("`{x}` occurs free in `{e}`")));
                }
                (Term::app(lam(e.plug(Term::Free(x.clone()))), t.clone()), e.plug(t))
            }
            AxiomTag::ResetValue => {
                let v = value(need(&self.v, "v")?)?;
                (Term::reset(v.clone()), v)
            }
            AxiomTag::ResetShift => {
                let (e, t) = (context()?, need(&self.t, "t")?);
                let lhs = Term::reset(e.plug(Term::shift(k.as_str(), t.clone())));
                let hole = Var::raw(crate::syntax::fresh_name(x.as_str(), |c| {
                    e.free_vars().iter().any(|v| v.as_str() == c)
                }));
                let kont = Term::lam(hole.as_str(), Term::reset(e.plug(Term::Free(hole.clone()))));
                (lhs, Term::reset(t.substitute(&k, &kont)))
            }
            AxiomTag::ResetLift => {
                let (t0, t1) = (need(&self.t0, "t0")?, need(&self.t1, "t1")?);
                let arg = Term::reset(t1);
                (Term::reset(Term::app(lam(t0.clone()), arg.clone())), Term::app(lam(Term::reset(t0)), arg))
            }
            AxiomTag::ShiftReset => {
                let t = need(&self.t, "t")?;
                (Term::shift(k.as_str(), Term::reset(t.clone())), Term::shift(k.as_str(), t))
            }
            AxiomTag::ShiftElim => {
                let t = need(&self.t, "t")?;
                if t.free_vars().contains(&k) {
                    return Err(violated(format!("`{k}` occurs free in `{t}`")));
                }
                (Term::shift(k.as_str(), Term::app(Term::Free(k.clone()), t.clone())), t)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_with, Abbreviations};

    fn p(s: &str) -> Term {
        parse_with(s, &Abbreviations::standard()).unwrap()
    }

    fn has(t: &str, pos: &[u8], tag: AxiomTag, dir: Direction, result: &str) -> bool {
        let r = p(result);
        axiom_matches(&p(t))
            .iter()
            .any(|m| m.position.0 == pos && m.axiom == tag && m.direction == dir && m.result == r)
    }

    #[test]
    fn matches_at_root() {
        assert!(has("(\\x.x) y", &[], AxiomTag::BetaV, Direction::LeftToRight, "y"));
        assert!(has("<i>", &[], AxiomTag::ResetValue, Direction::LeftToRight, "i"));
        assert!(has("S k. k x", &[], AxiomTag::ShiftElim, Direction::LeftToRight, "x"));
        assert!(!has("S k. k k", &[], AxiomTag::ShiftElim, Direction::LeftToRight, "k"));
        assert!(has("\\x.f x", &[], AxiomTag::EtaV, Direction::LeftToRight, "f"));
        assert!(has("(\\x. f (x a)) t", &[], AxiomTag::BetaOmega, Direction::LeftToRight, "f (t a)"));
        assert!(has("<(S k. k i) w>", &[], AxiomTag::ResetShift, Direction::LeftToRight, "<(\\x.<x w>) i>"));
        assert!(has("<(\\x.x) <y>>", &[], AxiomTag::ResetLift, Direction::LeftToRight, "(\\x.<x>) <y>"));
        assert!(has("S k.<k>", &[], AxiomTag::ShiftReset, Direction::LeftToRight, "S k.k"));
    }

    #[test]
    fn side_conditions_block_matches() {
        // x occurs in the context
        assert!(!has("(\\x. x (x a)) t", &[], AxiomTag::BetaOmega, Direction::LeftToRight, "t (t a)"));
        // \x. x x is not an eta redex
        assert!(axiom_matches(&p("\\x.x x"))
            .iter()
            .all(|m| m.axiom != AxiomTag::EtaV || m.direction == Direction::RightToLeft));
        // a non-value argument blocks beta-v
        assert!(!has("(\\x.y) (f a)", &[], AxiomTag::BetaV, Direction::LeftToRight, "y"));
    }

    #[test]
    fn matches_under_binders() {
        assert!(has("\\y. (\\x.x) y", &[0], AxiomTag::BetaV, Direction::LeftToRight, "\\y.y"));
        assert!(has("\\y. <y>", &[0], AxiomTag::ResetValue, Direction::LeftToRight, "\\y.y"));
    }

    #[test]
    fn right_to_left_rewrites() {
        assert!(has("i", &[], AxiomTag::ResetValue, Direction::RightToLeft, "<i>"));
        assert!(has("a", &[], AxiomTag::ShiftElim, Direction::RightToLeft, "S k.k a"));
        assert!(has("f (g a)", &[], AxiomTag::BetaOmega, Direction::RightToLeft, "(\\x.f (x a)) g"));
        for m in axiom_matches(&p("f (g a)")) {
            let (l, r) = match m.direction {
                Direction::LeftToRight => (&m.from, &m.to),
                Direction::RightToLeft => (&m.to, &m.from),
            };
            assert!(is_instance(m.axiom, l, r), "{} {} {:?}", m.axiom, m.direction, m.to);
        }
    }

    #[test]
    fn instantiation_builds_sides() {
        let inst = Instantiation { t: Some(parse("x x").unwrap()), v: Some(p("i")), ..Default::default() };
        let (l, r) = inst.sides(AxiomTag::BetaV).unwrap();
        assert_eq!((l, r), (p("(\\x.x x) i"), p("i i")));

        let inst = Instantiation { t: Some(p("i")), ..Default::default() };
        let (l, r) = inst.sides(AxiomTag::ShiftElim).unwrap();
        assert_eq!((l, r), (p("S k.k i"), p("i")));

        let inst = Instantiation { t: Some(parse("k").unwrap()), ..Default::default() };
        assert!(matches!(inst.sides(AxiomTag::ShiftElim), Err(Error::SideCondition { .. })));
        let inst = Instantiation { v: Some(parse("x").unwrap()), ..Default::default() };
        assert!(matches!(inst.sides(AxiomTag::EtaV), Err(Error::SideCondition { .. })));
        assert!(matches!(
            Instantiation::default().sides(AxiomTag::ResetLift),
            Err(Error::MissingMetavariable { .. })
        ));

        let inst = Instantiation {
            t: Some(p("k i")),
            context: Some(PureContext::parse_with("@ w", &Abbreviations::standard()).unwrap()),
            ..Default::default()
        };
        let (l, r) = inst.sides(AxiomTag::ResetShift).unwrap();
        assert_eq!((l, r), (p("<(S k. k i) w>"), p("<(\\x.<x w>) i>")));
    }

    #[test]
    fn every_instance_side_pair_is_a_root_instance() {
        for f in fixtures() {
            assert!(is_instance(f.tag, &f.lhs, &f.rhs), "{} {} = {}", f.tag, f.lhs, f.rhs);
        }
    }

    #[test]
    fn positions_print() {
        assert_eq!(Position::default().to_string(), "()");
        assert_eq!(Position(vec![0, 1]).to_string(), "(0.1)");
    }
}
