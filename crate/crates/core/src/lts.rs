//! The labelled transition system: internal steps, value probes, and
//! context probes, plus a rule-by-rule derivation builder.
//!
//! [`tau_step`] follows the compositional rules directly and uses the
//! closed form of context capture (`capture`) for `LTScaptreset`. The
//! derivation builder ([`derive`]) instead rebuilds the captured context
//! one `LTScaptl`/`LTScaptr` at a time, and serves as an independent
//! oracle for the closed form.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::reduction::{captured, require_closed, Observable};
use crate::syntax::{Frame, PureContext, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Tau,
    ValueProbe(Term),
    ContextProbe(PureContext),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tau => f.write_str("tau"),
            Label::ValueProbe(v) => write!(f, "value {v}"),
            Label::ContextProbe(e) => write!(f, "context {e}"),
        }
    }
}

impl Label {
    /// `{"kind": "tau" | "value" | "context", "probe": text}`
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Label::Tau => serde_json::json!({ "kind": "tau" }),
            Label::ValueProbe(v) => serde_json::json!({ "kind": "value", "probe": v.to_string() }),
            Label::ContextProbe(e) => serde_json::json!({ "kind": "context", "probe": e.to_string() }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub source: Term,
    pub label: Label,
    pub target: Term,
}

/// The ten rules of the transition system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LtsRule {
    #[serde(rename = "LTSbeta")]
    Beta,
    #[serde(rename = "LTSreset")]
    Reset,
    #[serde(rename = "LTScompl")]
    CompL,
    #[serde(rename = "LTScompr")]
    CompR,
    #[serde(rename = "LTScompreset")]
    CompReset,
    #[serde(rename = "LTScaptreset")]
    CaptReset,
    #[serde(rename = "LTSval")]
    Val,
    #[serde(rename = "LTSshift")]
    Shift,
    #[serde(rename = "LTScaptl")]
    CaptL,
    #[serde(rename = "LTScaptr")]
    CaptR,
}

impl LtsRule {
    pub const ALL: [LtsRule; 10] = [
        LtsRule::Beta,
        LtsRule::Reset,
        LtsRule::CompL,
        LtsRule::CompR,
        LtsRule::CompReset,
        LtsRule::CaptReset,
        LtsRule::Val,
        LtsRule::Shift,
        LtsRule::CaptL,
        LtsRule::CaptR,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LtsRule::Beta => "LTSbeta",
            LtsRule::Reset => "LTSreset",
            LtsRule::CompL => "LTScompl",
            LtsRule::CompR => "LTScompr",
            LtsRule::CompReset => "LTScompreset",
            LtsRule::CaptReset => "LTScaptreset",
            LtsRule::Val => "LTSval",
            LtsRule::Shift => "LTSshift",
            LtsRule::CaptL => "LTScaptl",
            LtsRule::CaptR => "LTScaptr",
        }
    }
}

impl fmt::Display for LtsRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The internal-action successor, if any.
pub fn tau_step(t: &Term) -> Result<Option<Term>> {
    require_closed(t)?;
    Ok(tau_closed(t))
}

pub(crate) fn tau_closed(t: &Term) -> Option<Term> {
    match t {
        Term::App(f, a) => {
            if let Term::Lam(_, body) = &**f {
                if a.is_value() {
                    // LTSbeta
                    return Some(body.open_with(a));
                }
                // LTScompr
                tau_closed(a).map(|a2| Term::App(f.clone(), Arc::new(a2)))
            } else {
                // LTScompl
                tau_closed(f).map(|f2| Term::App(Arc::new(f2), a.clone()))
            }
        }
        Term::Reset(b) => {
            if b.is_value() {
                // LTSreset
                return Some((**b).clone());
            }
            match tau_closed(b) {
                // LTScompreset
                Some(b2) => Some(Term::Reset(Arc::new(b2))),
                // LTScaptreset
                None => capture(b, &PureContext::empty()),
            }
        }
        Term::Lam(..) | Term::Shift(..) | Term::Bound(_) | Term::Free(_) => None,
    }
}

/// Splits a stuck term as `E'[S k.s]`, returning `E'` and the shift node.
pub(crate) fn stuck_split(t: &Term) -> Option<(PureContext, Term)> {
    let mut outer_first = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Term::Shift(..) => {
                outer_first.reverse();
                return Some((PureContext::from_frames_unchecked(outer_first), cur.clone()));
            }
            Term::App(f, a) if f.is_value() => {
                outer_first.push(Frame::AppliedValue((**f).clone()));
                cur = a;
            }
            Term::App(f, a) => {
                outer_first.push(Frame::PendingArg((**a).clone()));
                cur = f;
            }
            _ => return None,
        }
    }
}

/// Closed form of `t −E→`: for `t = E'[S k.s]`, `⟨s[k := λx.⟨E[E'[x]]⟩]⟩`.
fn capture(t: &Term, e: &PureContext) -> Option<Term> {
    let (inner, shift) = stuck_split(t)?;
    let Term::Shift(_, body) = shift else { unreachable!() };
    let k = captured(&inner.then(e));
    Some(Term::reset(body.open_with(&k)))
}

/// `λx.t −v→ t[x := v]`; defined only on abstractions.
pub fn probe_value(t: &Term, v: &Term) -> Result<Option<Term>> {
    require_closed(t)?;
    require_closed(v)?;
    Ok(probe_value_closed(t, v))
}

pub(crate) fn probe_value_closed(t: &Term, v: &Term) -> Option<Term> {
    match t {
        Term::Lam(_, body) if v.is_value() => Some(body.open_with(v)),
        _ => None,
    }
}

/// `t −E→ t'`; defined only on stuck terms.
pub fn probe_context(t: &Term, e: &PureContext) -> Result<Option<Term>> {
    require_closed(t)?;
    if !e.is_closed() {
        return Err(crate::Error::OpenTerm { free: e.free_vars().into_iter().collect() });
    }
    Ok(capture(t, e))
}

pub(crate) fn probe_context_closed(t: &Term, e: &PureContext) -> Option<Term> {
    capture(t, e)
}

/// Runs internal steps to quiescence: a value, a stuck term, or out of fuel.
pub fn observables(t: &Term, fuel: u64) -> Result<Observable> {
    require_closed(t)?;
    Ok(observe_closed(t, fuel))
}

pub(crate) fn observe_closed(t: &Term, fuel: u64) -> Observable {
    let mut cur = t.clone();
    let mut used = 0;
    loop {
        if cur.is_value() {
            return Observable::Value(cur);
        }
        if used == fuel {
            // distinguish "stuck" from "out of fuel" even at the boundary
            return match tau_closed(&cur) {
                None => Observable::Stuck(cur),
                Some(_) => Observable::Timeout { remaining: cur, steps_used: used },
            };
        }
        match tau_closed(&cur) {
            Some(next) => {
                cur = next;
                used += 1;
            }
            None => return Observable::Stuck(cur),
        }
    }
}

/// A derivation tree in the transition system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: LtsRule,
    pub conclusion: Transition,
    pub premise: Option<Box<Derivation>>,
}

impl Derivation {
    /// Rule names from the conclusion up to the axiom at the top.
    pub fn rules(&self) -> Vec<LtsRule> {
        let mut out = vec![self.rule];
        let mut cur = &self.premise;
        while let Some(d) = cur {
            out.push(d.rule);
            cur = &d.premise;
        }
        out
    }

    pub fn target(&self) -> &Term {
        &self.conclusion.target
    }

    fn node(
        rule: LtsRule,
        source: &Term,
        label: Label,
        target: Term,
        premise: Option<Derivation>,
    ) -> Derivation {
        Derivation {
            rule,
            conclusion: Transition { source: source.clone(), label, target },
            premise: premise.map(Box::new),
        }
    }
}

/// Builds the derivation of `t −label→ _`, if one exists.
pub fn derive(t: &Term, label: &Label) -> Result<Option<Derivation>> {
    require_closed(t)?;
    Ok(match label {
        Label::Tau => derive_tau(t),
        Label::ValueProbe(v) => {
            require_closed(v)?;
            derive_value(t, v)
        }
        Label::ContextProbe(e) => derive_context(t, e),
    })
}

pub(crate) fn derive_tau(t: &Term) -> Option<Derivation> {
    match t {
        Term::App(f, a) => {
            if let (Term::Lam(_, body), true) = (&**f, a.is_value()) {
                let target = body.open_with(a);
                return Some(Derivation::node(LtsRule::Beta, t, Label::Tau, target, None));
            }
            if let Some(d) = derive_tau(f) {
                let target = Term::App(Arc::new(d.target().clone()), a.clone());
                return Some(Derivation::node(LtsRule::CompL, t, Label::Tau, target, Some(d)));
            }
            if f.is_value() {
                if let Some(d) = derive_tau(a) {
                    let target = Term::App(f.clone(), Arc::new(d.target().clone()));
                    return Some(Derivation::node(LtsRule::CompR, t, Label::Tau, target, Some(d)));
                }
            }
            None
        }
        Term::Reset(b) => {
            if b.is_value() {
                return Some(Derivation::node(LtsRule::Reset, t, Label::Tau, (**b).clone(), None));
            }
            if let Some(d) = derive_tau(b) {
                let target = Term::reset(d.target().clone());
                return Some(Derivation::node(LtsRule::CompReset, t, Label::Tau, target, Some(d)));
            }
            let d = derive_context(b, &PureContext::empty())?;
            let target = d.target().clone();
            Some(Derivation::node(LtsRule::CaptReset, t, Label::Tau, target, Some(d)))
        }
        _ => None,
    }
}

fn derive_value(t: &Term, v: &Term) -> Option<Derivation> {
    let target = probe_value_closed(t, v)?;
    Some(Derivation::node(LtsRule::Val, t, Label::ValueProbe(v.clone()), target, None))
}

fn derive_context(t: &Term, e: &PureContext) -> Option<Derivation> {
    let label = Label::ContextProbe(e.clone());
    match t {
        Term::Shift(_, body) => {
            let target = Term::reset(body.open_with(&captured(e)));
            Some(Derivation::node(LtsRule::Shift, t, label, target, None))
        }
        Term::App(f, a) => {
            if let Some(d) = derive_context(f, &e.with_inner(Frame::PendingArg((**a).clone()))) {
                let target = d.target().clone();
                return Some(Derivation::node(LtsRule::CaptL, t, label, target, Some(d)));
            }
            if f.is_value() {
                let d = derive_context(a, &e.with_inner(Frame::AppliedValue((**f).clone())))?;
                let target = d.target().clone();
                return Some(Derivation::node(LtsRule::CaptR, t, label, target, Some(d)));
            }
            None
        }
        _ => None,
    }
}
