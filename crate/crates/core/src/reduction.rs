//! Call-by-value reduction: decomposition into context and redex, one-step
//! reduction, evaluation with fuel, and traces.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::syntax::{EvalContext, EvalFrame, Frame, Hint, PureContext, Term};

/// Reduction rule that fired.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rule {
    Rbeta,
    Rshift,
    Rreset,
}

impl Rule {
    pub const ALL: [Rule; 3] = [Rule::Rbeta, Rule::Rshift, Rule::Rreset];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Rbeta => "Rbeta",
            Rule::Rshift => "Rshift",
            Rule::Rreset => "Rreset",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Redex {
    /// `(λx.t) v`
    Beta { fun: Term, arg: Term },
    /// `⟨E[S k.t]⟩`; `body` refers to `k` as index 0.
    Capture { context: PureContext, bound: Hint, body: Arc<Term> },
    /// `⟨v⟩`
    ResetValue(Term),
}

impl Redex {
    pub fn term(&self) -> Term {
        match self {
            Redex::Beta { fun, arg } => Term::app(fun.clone(), arg.clone()),
            Redex::Capture { context, bound, body } => {
                Term::reset(context.plug(Term::Shift(bound.clone(), body.clone())))
            }
            Redex::ResetValue(v) => Term::reset(v.clone()),
        }
    }

    pub fn rule(&self) -> Rule {
        match self {
            Redex::Beta { .. } => Rule::Rbeta,
            Redex::Capture { .. } => Rule::Rshift,
            Redex::ResetValue(_) => Rule::Rreset,
        }
    }

    /// The contractum.
    pub fn contract(&self) -> Term {
        match self {
            Redex::Beta { fun: Term::Lam(_, body), arg } => body.open_with(arg),
            Redex::Beta { fun, .. } => panic!("beta redex with non-abstraction {fun}"),
            Redex::Capture { context, body, .. } => Term::reset(body.open_with(&captured(context))),
            Redex::ResetValue(v) => v.clone(),
        }
    }
}

/// `λx.⟨E[x]⟩` for a closed pure context `E`.
pub(crate) fn captured(context: &PureContext) -> Term {
    Term::Lam(Hint::new("x"), Arc::new(Term::reset(context.plug(Term::Bound(0)))))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposition {
    IsValue(Term),
    /// `E[S k.t]` with no enclosing reset.
    IsStuck {
        context: PureContext,
        bound: Hint,
        body: Arc<Term>,
    },
    Decomposed {
        context: EvalContext,
        redex: Redex,
    },
}

impl Decomposition {
    /// Plugs the pieces back together.
    pub fn recompose(&self) -> Term {
        match self {
            Decomposition::IsValue(v) => v.clone(),
            Decomposition::IsStuck { context, bound, body } => {
                context.plug(Term::Shift(bound.clone(), body.clone()))
            }
            Decomposition::Decomposed { context, redex } => context.plug(redex.term()),
        }
    }
}

/// Outcome of running a closed term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Observable {
    Value(Term),
    Stuck(Term),
    Timeout { remaining: Term, steps_used: u64 },
}

impl Observable {
    pub fn term(&self) -> &Term {
        match self {
            Observable::Value(t) | Observable::Stuck(t) => t,
            Observable::Timeout { remaining, .. } => remaining,
        }
    }

    pub fn class(&self) -> ObservableClass {
        match self {
            Observable::Value(_) => ObservableClass::Value,
            Observable::Stuck(_) => ObservableClass::Stuck,
            Observable::Timeout { .. } => ObservableClass::Timeout,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableClass {
    Value,
    Stuck,
    Timeout,
}

impl fmt::Display for ObservableClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObservableClass::Value => "value",
            ObservableClass::Stuck => "stuck",
            ObservableClass::Timeout => "timeout",
        })
    }
}

pub(crate) fn require_closed(t: &Term) -> Result<()> {
    if t.is_closed() {
        Ok(())
    } else {
        Err(Error::OpenTerm { free: t.free_vars().into_iter().collect() })
    }
}

/// Splits a closed term into value, stuck term, or evaluation context and redex.
pub fn decompose(t: &Term) -> Result<Decomposition> {
    require_closed(t)?;
    Ok(decompose_closed(t))
}

enum Mode {
    Eval(Term),
    Continue(Term),
}

/// Refocusing over an explicit stack; `stack` holds frames outermost first.
pub(crate) fn decompose_closed(t: &Term) -> Decomposition {
    let mut stack: Vec<EvalFrame> = Vec::new();
    let mut mode = Mode::Eval(t.clone());
    loop {
        mode = match mode {
            Mode::Eval(t) => match t {
                Term::Lam(..) => Mode::Continue(t),
                Term::App(f, a) => {
                    stack.push(EvalFrame::Pure(Frame::PendingArg((*a).clone())));
                    Mode::Eval((*f).clone())
                }
                Term::Reset(b) => {
                    stack.push(EvalFrame::Reset);
                    Mode::Eval((*b).clone())
                }
                Term::Shift(bound, body) => {
                    let delimiter = stack.iter().rposition(|f| matches!(f, EvalFrame::Reset));
                    let inner_start = delimiter.map_or(0, |i| i + 1);
                    let pure: Vec<Frame> = stack[inner_start..]
                        .iter()
                        .rev()
                        .map(|f| match f {
                            EvalFrame::Pure(p) => p.clone(),
                            EvalFrame::Reset => unreachable!(),
                        })
                        .collect();
                    let context = PureContext::from_frames_unchecked(pure);
                    return match delimiter {
                        None => Decomposition::IsStuck { context, bound, body },
                        Some(i) => {
                            stack.truncate(i);
                            Decomposition::Decomposed {
                                context: outer_context(stack),
                                redex: Redex::Capture { context, bound, body },
                            }
                        }
                    };
                }
                Term::Bound(_) | Term::Free(_) => panic!("decomposing an open term"),
            },
            Mode::Continue(v) => match stack.pop() {
                None => return Decomposition::IsValue(v),
                Some(EvalFrame::Pure(Frame::PendingArg(a))) => {
                    stack.push(EvalFrame::Pure(Frame::AppliedValue(v)));
                    Mode::Eval(a)
                }
                Some(EvalFrame::Pure(Frame::AppliedValue(f))) => {
                    return Decomposition::Decomposed {
                        context: outer_context(stack),
                        redex: Redex::Beta { fun: f, arg: v },
                    }
                }
                Some(EvalFrame::Reset) => {
                    return Decomposition::Decomposed {
                        context: outer_context(stack),
                        redex: Redex::ResetValue(v),
                    }
                }
            },
        }
    }
}

fn outer_context(mut stack: Vec<EvalFrame>) -> EvalContext {
    stack.reverse();
    EvalContext::from_frames_unchecked(stack)
}

pub(crate) fn step_closed(t: &Term) -> Option<(Term, Rule)> {
    match decompose_closed(t) {
        Decomposition::Decomposed { context, redex } => Some((context.plug(redex.contract()), redex.rule())),
        Decomposition::IsValue(_) | Decomposition::IsStuck { .. } => None,
    }
}

/// One `→v` step, or `None` for values and stuck terms.
pub fn step(t: &Term) -> Result<Option<Term>> {
    require_closed(t)?;
    Ok(step_closed(t).map(|(t, _)| t))
}

/// One `→v` step with the rule that fired.
pub fn step_tagged(t: &Term) -> Result<Option<(Term, Rule)>> {
    require_closed(t)?;
    Ok(step_closed(t))
}

/// Reduces until a value, a stuck term, or `fuel` steps.
pub fn evaluate(t: &Term, fuel: u64) -> Result<Observable> {
    require_closed(t)?;
    Ok(evaluate_closed(t, fuel))
}

pub(crate) fn evaluate_closed(t: &Term, fuel: u64) -> Observable {
    let mut cur = t.clone();
    let mut used = 0;
    loop {
        match decompose_closed(&cur) {
            Decomposition::IsValue(v) => return Observable::Value(v),
            Decomposition::IsStuck { .. } => return Observable::Stuck(cur),
            Decomposition::Decomposed { context, redex } => {
                if used == fuel {
                    return Observable::Timeout { remaining: cur, steps_used: used };
                }
                cur = context.plug(redex.contract());
                used += 1;
            }
        }
    }
}

/// One entry of a reduction trace: the term reached and the rule used to reach it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub term: Term,
    pub rule: Rule,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub outcome: Observable,
}

impl Trace {
    pub fn rules(&self) -> Vec<Rule> {
        self.steps.iter().map(|s| s.rule).collect()
    }

    /// `[{"term", "rule"}..., {"result", "term", "steps"}]`
    pub fn to_json(&self) -> serde_json::Value {
        let mut out: Vec<serde_json::Value> = self
            .steps
            .iter()
            .map(|s| serde_json::json!({ "term": s.term.to_string(), "rule": s.rule.name() }))
            .collect();
        out.push(serde_json::json!({
            "result": self.outcome.class(),
            "term": self.outcome.term().to_string(),
            "steps": self.steps.len(),
        }));
        serde_json::Value::Array(out)
    }
}

/// The `→v` sequence from `t`, each step tagged with its rule.
pub fn trace(t: &Term, fuel: u64) -> Result<Trace> {
    require_closed(t)?;
    let mut steps = Vec::new();
    let mut cur = t.clone();
    loop {
        match decompose_closed(&cur) {
            Decomposition::IsValue(v) => return Ok(Trace { steps, outcome: Observable::Value(v) }),
            Decomposition::IsStuck { .. } => return Ok(Trace { steps, outcome: Observable::Stuck(cur) }),
            Decomposition::Decomposed { context, redex } => {
                if steps.len() as u64 == fuel {
                    let steps_used = fuel;
                    return Ok(Trace { steps, outcome: Observable::Timeout { remaining: cur, steps_used } });
                }
                cur = context.plug(redex.contract());
                steps.push(TraceStep { term: cur.clone(), rule: redex.rule() });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{identity, parse_with, small_omega, Abbreviations};

    fn p(s: &str) -> Term {
        parse_with(s, &Abbreviations::standard()).unwrap()
    }

    const TWO_SHIFTS: &str = "<(S k1. i (k1 i)) (S k2. w) (w w)>";

    #[test]
    fn beta_redex_at_top() {
        let t = p("(\\x.x) i");
        assert_eq!(
            decompose(&t).unwrap(),
            Decomposition::Decomposed {
                context: EvalContext::empty(),
                redex: Redex::Beta { fun: identity(), arg: identity() }
            }
        );
    }

    #[test]
    fn stuck_under_applied_value() {
        let t = p("i (S k. w)");
        match decompose(&t).unwrap() {
            Decomposition::IsStuck { context, body, .. } => {
                assert_eq!(context.frames(), &[Frame::AppliedValue(identity())]);
                assert_eq!(*body, small_omega());
            }
            other => panic!("expected stuck, got {other:?}"),
        }
    }

    #[test]
    fn two_shift_capture_decomposition() {
        let t = p(TWO_SHIFTS);
        let d = decompose(&t).unwrap();
        match &d {
            Decomposition::Decomposed { context, redex: Redex::Capture { context: e, body, .. } } => {
                assert!(context.is_empty());
                assert_eq!(e.frames(), &[Frame::PendingArg(p("S k2. w")), Frame::PendingArg(p("w w"))]);
                assert_eq!(Term::Shift(Hint::new("k1"), body.clone()), p("S k1. i (k1 i)"));
            }
            other => panic!("unexpected decomposition {other:?}"),
        }
        assert_eq!(d.recompose(), t);
    }

    #[test]
    fn two_shift_first_step() {
        let next = step(&p(TWO_SHIFTS)).unwrap().unwrap();
        assert_eq!(next, p("<i ((\\x.<x (S k2.w) (w w)>) i)>"));
        assert_eq!(step(&p("<i <w>>")).unwrap().unwrap(), p("<i w>"));
    }

    #[test]
    fn omega_steps_to_itself() {
        let o = p("omega");
        assert_eq!(step(&o).unwrap().unwrap(), o);
        assert!(matches!(evaluate(&o, 1000).unwrap(), Observable::Timeout { steps_used: 1000, .. }));
    }

    #[test]
    fn two_shift_trace() {
        let tr = trace(&p(TWO_SHIFTS), 100).unwrap();
        use Rule::*;
        assert_eq!(tr.rules(), vec![Rshift, Rbeta, Rshift, Rreset, Rbeta, Rreset]);
        assert_eq!(tr.outcome, Observable::Value(small_omega()));
        assert_eq!(evaluate(&p(TWO_SHIFTS), 100).unwrap(), Observable::Value(small_omega()));
        assert_eq!(evaluate(&p(TWO_SHIFTS), 5).unwrap().class(), ObservableClass::Timeout);
    }

    #[test]
    fn stuck_and_value_results() {
        let t = p("S k. k i");
        assert_eq!(evaluate(&t, 0).unwrap(), Observable::Stuck(t.clone()));
        assert_eq!(evaluate(&t, 50).unwrap(), Observable::Stuck(t));
        assert!(trace(&identity(), 10).unwrap().steps.is_empty());
        let tr = trace(&p("<\\x.x>"), 10).unwrap();
        assert_eq!(tr.rules(), vec![Rule::Rreset]);
    }

    #[test]
    fn open_terms_are_rejected() {
        assert!(matches!(step(&p("x")), Err(Error::OpenTerm { .. })));
        assert!(matches!(decompose(&p("i y")), Err(Error::OpenTerm { .. })));
        assert!(evaluate(&p("\\x.y"), 3).is_err());
    }

    #[test]
    fn trace_json_shape() {
        let j = trace(&p("<i>"), 10).unwrap().to_json();
        assert_eq!(
            j,
            serde_json::json!([
                {"term": "\\x.x", "rule": "Rreset"},
                {"result": "value", "term": "\\x.x", "steps": 1}
            ])
        );
    }
}
