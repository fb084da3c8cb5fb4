//! Translation into continuation-passing style and bounded βη-normalization.
//!
//! Translated terms take two continuations: `k1` up to the nearest reset and
//! `k2` beyond it. Two terms are CPS equivalent when their translations are
//! βη-convertible; here that is decided only when both translations reach a
//! normal form within the fuel.

use std::fmt;
use std::sync::Arc;

use crate::syntax::{Hint, Term, Var};

/// A term with no shift and no reset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PureLambdaTerm(Term);

impl PureLambdaTerm {
    pub fn new(t: Term) -> Option<PureLambdaTerm> {
        (!t.has_control()).then_some(PureLambdaTerm(t))
    }

    pub fn term(&self) -> &Term {
        &self.0
    }

    pub fn into_term(self) -> Term {
        self.0
    }
}

impl fmt::Display for PureLambdaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for PureLambdaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.0, f)
    }
}

/// Supplies internal names that cannot clash with user identifiers.
struct Names(u32);

impl Names {
    fn fresh(&mut self, base: &str) -> Var {
        self.0 += 1;
        Var::raw(format!("{base}#{}", self.0))
    }
}

fn v(x: &Var) -> Term {
    Term::Free(x.clone())
}

fn lam(x: &Var, body: Term) -> Term {
    Term::Lam(Hint::from(x), Arc::new(body.close(x)))
}

/// `λx.λk2.k2 x`, the initial continuation installed by a reset.
fn initial_continuation(names: &mut Names) -> Term {
    let x = names.fresh("x");
    let k2 = names.fresh("k2");
    lam(&x, lam(&k2, Term::app(v(&k2), v(&x))))
}

/// The CPS image of `t`. Free variables of `t` stay free.
pub fn cps_translate(t: &Term) -> PureLambdaTerm {
    let out = translate(t, &mut Names(0));
    PureLambdaTerm::new(out).expect("translation produced a control operator")
}

fn translate(t: &Term, names: &mut Names) -> Term {
    let k1 = names.fresh("k1");
    let k2 = names.fresh("k2");
    let body = match t {
        Term::Bound(_) => panic!("translating a term with a dangling index"),
        Term::Free(_) => Term::apps(v(&k1), [t.clone(), v(&k2)]),
        Term::Lam(h, b) => {
            let x = names.fresh(h.as_str());
            let inner = translate(&b.open_with(&v(&x)), names);
            Term::apps(v(&k1), [lam(&x, inner), v(&k2)])
        }
        Term::App(f, a) => {
            let x0 = names.fresh("x0");
            let x1 = names.fresh("x1");
            let k2a = names.fresh("k2");
            let k2b = names.fresh("k2");
            let call = Term::apps(v(&x0), [v(&x1), v(&k1), v(&k2b)]);
            let arg_cont = lam(&x1, lam(&k2b, call));
            let arg_part = Term::apps(translate(a, names), [arg_cont, v(&k2a)]);
            let fun_cont = lam(&x0, lam(&k2a, arg_part));
            Term::apps(translate(f, names), [fun_cont, v(&k2)])
        }
        Term::Reset(b) => {
            let x = names.fresh("x");
            let outer = lam(&x, Term::apps(v(&k1), [v(&x), v(&k2)]));
            let init = initial_continuation(names);
            Term::apps(translate(b, names), [init, outer])
        }
        Term::Shift(h, b) => {
            let k = names.fresh(h.as_str());
            let inner = translate(&b.open_with(&v(&k)), names);
            // λx1 k1' k2'. k1 x1 (λx2. k1' x2 k2')
            let x1 = names.fresh("x1");
            let x2 = names.fresh("x2");
            let k1p = names.fresh("k1");
            let k2p = names.fresh("k2");
            let resume = lam(&x2, Term::apps(v(&k1p), [v(&x2), v(&k2p)]));
            let reified = lam(&x1, lam(&k1p, lam(&k2p, Term::apps(v(&k1), [v(&x1), resume]))));
            let init = initial_continuation(names);
            Term::apps(inner.substitute(&k, &reified), [init, v(&k2)])
        }
    };
    lam(&k1, lam(&k2, body))
}

/// Normalization ran out of fuel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("normalization ran out of fuel")]
pub struct FuelExhausted;

/// Redexes whose contraction yields a head larger than this many nodes end
/// the normalization as if the fuel had run out.
pub const SIZE_LIMIT: usize = 10_000;

/// Normal-order β-normalization within `fuel` β-steps, then η-contraction
/// to a fixpoint.
pub fn normalize_beta_eta(t: &PureLambdaTerm, fuel: u64) -> Result<PureLambdaTerm, FuelExhausted> {
    let mut fuel = fuel;
    let nf = beta_normal(&t.0, &mut fuel)?;
    let out = eta_reduce(&nf);
    debug_assert!(!has_beta_redex(&out) && !has_eta_redex(&out));
    assert!(!has_beta_redex(&out), "η-contraction created a β-redex");
    Ok(PureLambdaTerm(out))
}

fn beta_normal(t: &Term, fuel: &mut u64) -> Result<Term, FuelExhausted> {
    match t {
        Term::Lam(h, b) => Ok(Term::Lam(h.clone(), Arc::new(beta_normal(b, fuel)?))),
        Term::App(..) => {
            // unwind the spine, contracting head redexes first
            let mut head = t.clone();
            let mut args: Vec<Arc<Term>> = Vec::new();
            loop {
                match head {
                    Term::App(f, a) => {
                        args.push(a);
                        head = (*f).clone();
                    }
                    Term::Lam(_, ref b) if !args.is_empty() => {
                        if *fuel == 0 {
                            return Err(FuelExhausted);
                        }
                        *fuel -= 1;
                        let a = args.pop().expect("non-empty");
                        head = b.open_with(&a);
                        if head.size() > SIZE_LIMIT {
                            return Err(FuelExhausted);
                        }
                    }
                    _ => break,
                }
            }
            let mut out = beta_normal(&head, fuel)?;
            while let Some(a) = args.pop() {
                out = Term::App(Arc::new(out), Arc::new(beta_normal(&a, fuel)?));
            }
            Ok(out)
        }
        Term::Bound(_) | Term::Free(_) => Ok(t.clone()),
        Term::Shift(..) | Term::Reset(_) => unreachable!("control operator in a pure λ-term"),
    }
}

fn eta_reduce(t: &Term) -> Term {
    match t {
        Term::Lam(h, b) => {
            let b = eta_reduce(b);
            if let Term::App(f, a) = &b {
                if **a == Term::Bound(0) && !f.has_loose(0) {
                    return f.shifted(-1, 0);
                }
            }
            Term::Lam(h.clone(), Arc::new(b))
        }
        Term::App(f, a) => Term::App(Arc::new(eta_reduce(f)), Arc::new(eta_reduce(a))),
        _ => t.clone(),
    }
}

fn has_beta_redex(t: &Term) -> bool {
    match t {
        Term::App(f, a) => matches!(**f, Term::Lam(..)) || has_beta_redex(f) || has_beta_redex(a),
        Term::Lam(_, b) => has_beta_redex(b),
        _ => false,
    }
}

fn has_eta_redex(t: &Term) -> bool {
    match t {
        Term::Lam(_, b) => {
            matches!(&**b, Term::App(f, a) if **a == Term::Bound(0) && !f.has_loose(0)) || has_eta_redex(b)
        }
        Term::App(f, a) => has_eta_redex(f) || has_eta_redex(a),
        _ => false,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivVerdict {
    /// Both translations share this normal form.
    Equivalent(PureLambdaTerm),
    /// The translations have these distinct normal forms.
    NotEquivalent(PureLambdaTerm, PureLambdaTerm),
    /// At least one side did not normalize within the fuel.
    Unknown { left_timed_out: bool, right_timed_out: bool },
}

impl EquivVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            EquivVerdict::Equivalent(_) => "equivalent",
            EquivVerdict::NotEquivalent(..) => "not-equivalent",
            EquivVerdict::Unknown { .. } => "unknown",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            EquivVerdict::Equivalent(nf) => {
                serde_json::json!({ "verdict": self.name(), "normal_form": nf.to_string() })
            }
            EquivVerdict::NotEquivalent(a, b) => serde_json::json!({
                "verdict": self.name(),
                "left_normal_form": a.to_string(),
                "right_normal_form": b.to_string(),
            }),
            EquivVerdict::Unknown { left_timed_out, right_timed_out } => serde_json::json!({
                "verdict": self.name(),
                "left_timed_out": left_timed_out,
                "right_timed_out": right_timed_out,
            }),
        }
    }
}

/// Compares the βη-normal forms of both translations.
pub fn cps_equiv(t0: &Term, t1: &Term, fuel: u64) -> EquivVerdict {
    let n0 = normalize_beta_eta(&cps_translate(t0), fuel);
    let n1 = normalize_beta_eta(&cps_translate(t1), fuel);
    match (n0, n1) {
        (Ok(a), Ok(b)) if a == b => EquivVerdict::Equivalent(a),
        (Ok(a), Ok(b)) => EquivVerdict::NotEquivalent(a, b),
        (a, b) => EquivVerdict::Unknown { left_timed_out: a.is_err(), right_timed_out: b.is_err() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_with, Abbreviations};

    fn p(s: &str) -> Term {
        parse_with(s, &Abbreviations::standard()).unwrap()
    }

    fn pure(s: &str) -> PureLambdaTerm {
        PureLambdaTerm::new(parse(s).unwrap()).unwrap()
    }

    #[test]
    fn translation_clauses() {
        assert_eq!(*cps_translate(&p("x")).term(), parse("\\k1.\\k2.k1 x k2").unwrap());
        assert_eq!(*cps_translate(&p("\\x.x")).term(), parse("\\k1.\\k2.k1 (\\x.\\a.\\b.a x b) k2").unwrap());
        let body = cps_translate(&p("y")).into_term();
        let expected = Term::lam(
            "k1",
            Term::lam(
                "k2",
                Term::apps(body, [parse("\\x.\\k2.k2 x").unwrap(), parse("\\x.k1 x k2").unwrap()]),
            ),
        );
        assert_eq!(*cps_translate(&p("<y>")).term(), expected);
        assert_eq!(cps_translate(&p("x")).to_string(), "\\k1.\\k2.k1 x k2");
    }

    #[test]
    fn translation_keeps_free_variables() {
        for s in ["x", "\\x.y x", "<f (S k. k a)>", "S k. g"] {
            let t = p(s);
            let c = cps_translate(&t);
            assert_eq!(c.term().free_vars(), t.free_vars(), "{s}");
            assert!(!c.term().has_control());
        }
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_beta_eta(&pure("(\\x.x) y"), 10).unwrap(), pure("y"));
        assert_eq!(normalize_beta_eta(&pure("\\x.f x"), 10).unwrap(), pure("f"));
        assert_eq!(normalize_beta_eta(&pure("\\x.\\y.f x y"), 10).unwrap(), pure("f"));
        assert_eq!(normalize_beta_eta(&pure("\\x.x x"), 10).unwrap(), pure("\\x.x x"));
        let omega = PureLambdaTerm::new(p("omega")).unwrap();
        assert_eq!(normalize_beta_eta(&omega, 1000), Err(FuelExhausted));
        // normal order finds the normal form under a diverging argument
        assert_eq!(
            normalize_beta_eta(&PureLambdaTerm::new(p("(\\x.i) omega")).unwrap(), 10).unwrap(),
            PureLambdaTerm::new(p("i")).unwrap()
        );
    }

    #[test]
    fn equivalence_examples() {
        assert!(matches!(cps_equiv(&p("<i>"), &p("i"), 5000), EquivVerdict::Equivalent(_)));
        assert!(matches!(cps_equiv(&p("S k. k i"), &p("i"), 5000), EquivVerdict::Equivalent(_)));
        assert!(matches!(
            cps_equiv(&p("omega"), &p("omega omega"), 2000),
            EquivVerdict::Unknown { left_timed_out: true, right_timed_out: true }
        ));
        assert!(matches!(cps_equiv(&p("i"), &p("w"), 5000), EquivVerdict::NotEquivalent(..)));
    }

    #[test]
    fn two_shift_steps_are_cps_equivalent() {
        let t = p("<(S k1. i (k1 i)) (S k2. w) (w w)>");
        let tr = crate::reduction::trace(&t, 50).unwrap();
        let mut prev = t;
        for s in tr.steps {
            assert!(matches!(cps_equiv(&prev, &s.term, 5000), EquivVerdict::Equivalent(_)));
            prev = s.term;
        }
    }
}
