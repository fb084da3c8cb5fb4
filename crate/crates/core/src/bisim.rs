//! A bounded applicative-bisimulation game.
//!
//! Both terms are run to quiescence. A value must be matched by a value and
//! a stuck term by a stuck term; matched pairs are then probed with every
//! value (for values) or every context (for stuck terms) in a finite pool,
//! down to a fixed depth. Two divergent terms match.

use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::axioms::{AxiomTag, Instantiation};
use crate::error::{Error, Result};
use crate::lts::{observe_closed, probe_context_closed, probe_value_closed, Label};
use crate::reduction::{require_closed, Observable, ObservableClass};
use crate::syntax::{Abbreviations, Frame, GeneralContext, PureContext, Term};

/// Probes used to approximate "for every value" and "for every context".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbePool {
    pub values: Vec<Term>,
    pub contexts: Vec<PureContext>,
    pub depth: u32,
    pub fuel: u64,
}

impl ProbePool {
    pub fn validate(&self) -> Result<()> {
        if self.fuel == 0 {
            return Err(Error::InvalidPool("fuel must be at least 1".into()));
        }
        for v in &self.values {
            if !v.is_value() || !v.is_closed() {
                return Err(Error::InvalidPool(format!("`{v}` is not a closed value")));
            }
        }
        for e in &self.contexts {
            if !e.is_closed() {
                return Err(Error::InvalidPool(format!("context `{e}` is not closed")));
            }
        }
        Ok(())
    }

    /// Short hex digest of the pool contents, depth and fuel.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.values {
            h.update(b"v:");
            h.update(v.to_string().as_bytes());
            h.update(b"\n");
        }
        for e in &self.contexts {
            h.update(b"c:");
            h.update(e.to_string().as_bytes());
            h.update(b"\n");
        }
        h.update(format!("depth:{}\nfuel:{}\n", self.depth, self.fuel).as_bytes());
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Reads `{"values": [...], "contexts": [...]}`; contexts mark the hole with `@`.
    pub fn from_json(text: &str, abbrevs: &Abbreviations, depth: u32, fuel: u64) -> Result<ProbePool> {
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            #[serde(default)]
            values: Vec<String>,
            #[serde(default)]
            contexts: Vec<String>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::InvalidPool(e.to_string()))?;
        let values = raw
            .values
            .iter()
            .map(|s| crate::syntax::parse_with(s, abbrevs).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        let contexts =
            raw.contexts.iter().map(|s| PureContext::parse_with(s, abbrevs)).collect::<Result<Vec<_>>>()?;
        let pool = ProbePool { values, contexts, depth, fuel };
        pool.validate()?;
        Ok(pool)
    }
}

/// Values `i, w, \x.omega, \x.\y.x, \x.S k.k x`; contexts `@, i @, @ i,
/// (\x.omega) @`; depth 4; fuel 500.
pub fn default_pool() -> ProbePool {
    let a = Abbreviations::standard();
    let p = |s: &str| crate::syntax::parse_with(s, &a).expect("default pool term");
    let values = ["i", "w", "\\x.omega", "\\x.\\y.x", "\\x.S k.k x"].map(p).to_vec();
    let contexts = vec![
        PureContext::empty(),
        PureContext::from_frames_unchecked(vec![Frame::AppliedValue(p("i"))]),
        PureContext::from_frames_unchecked(vec![Frame::PendingArg(p("i"))]),
        PureContext::from_frames_unchecked(vec![Frame::AppliedValue(p("\\x.omega"))]),
    ];
    ProbePool { values, contexts, depth: 4, fuel: 500 }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// A concrete experiment that separates the two terms.
    Distinguished { trace: Vec<Label>, reason: String },
    /// No difference found within the pool and depth.
    BisimilarUpTo { depth: u32, pool_fingerprint: String },
}

impl Verdict {
    pub fn is_distinguished(&self) -> bool {
        matches!(self, Verdict::Distinguished { .. })
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Verdict::Distinguished { trace, reason } => serde_json::json!({
                "verdict": "distinguished",
                "trace": trace.iter().map(Label::to_json).collect::<Vec<_>>(),
                "reason": reason,
            }),
            Verdict::BisimilarUpTo { depth, pool_fingerprint } => serde_json::json!({
                "verdict": "bisimilar-up-to",
                "depth": depth,
                "pool": pool_fingerprint,
            }),
        }
    }
}

/// Runs both terms. When exactly one side runs out of fuel, that side gets
/// three more budgets before the difference is believed.
fn observe_pair(a: &Term, b: &Term, fuel: u64) -> (Observable, Observable) {
    let extend = |o: Observable| match o {
        Observable::Timeout { remaining, steps_used } => match observe_closed(&remaining, fuel * 3) {
            Observable::Timeout { remaining, steps_used: more } => {
                Observable::Timeout { remaining, steps_used: steps_used + more }
            }
            done => done,
        },
        done => done,
    };
    let oa = observe_closed(a, fuel);
    let ob = observe_closed(b, fuel);
    match (oa.class(), ob.class()) {
        (ObservableClass::Timeout, ObservableClass::Timeout) => (oa, ob),
        (ObservableClass::Timeout, _) => (extend(oa), ob),
        (_, ObservableClass::Timeout) => (oa, extend(ob)),
        _ => (oa, ob),
    }
}

struct Game<'a> {
    pool: &'a ProbePool,
    /// Pairs already entered, with the depth they were entered at.
    seen: HashMap<(Term, Term), u32>,
    trace: Vec<Label>,
}

impl Game<'_> {
    /// Returns the reason if the pair is told apart; `self.trace` then holds the experiment.
    fn play(&mut self, a: &Term, b: &Term, depth: u32) -> Option<String> {
        if a == b {
            return None;
        }
        match self.seen.get(&(a.clone(), b.clone())) {
            Some(&d) if d >= depth => return None,
            _ => {}
        }
        self.seen.insert((a.clone(), b.clone()), depth);

        let (oa, ob) = observe_pair(a, b, self.pool.fuel);
        let (ca, cb) = (oa.class(), ob.class());
        if ca != cb {
            self.trace.push(self.witness_label(ca, cb));
            return Some(format!("{ca} vs {cb}"));
        }
        if ca == ObservableClass::Timeout || depth == 0 || oa.term() == ob.term() {
            return None;
        }
        let (ta, tb) = (oa.term(), ob.term());
        if ca == ObservableClass::Value {
            for v in &self.pool.values {
                let na = probe_value_closed(ta, v).expect("value accepts value probes");
                let nb = probe_value_closed(tb, v).expect("value accepts value probes");
                self.trace.push(Label::ValueProbe(v.clone()));
                if let Some(r) = self.play(&na, &nb, depth - 1) {
                    return Some(r);
                }
                self.trace.pop();
            }
        } else {
            for e in &self.pool.contexts {
                let na = probe_context_closed(ta, e).expect("stuck term accepts context probes");
                let nb = probe_context_closed(tb, e).expect("stuck term accepts context probes");
                self.trace.push(Label::ContextProbe(e.clone()));
                if let Some(r) = self.play(&na, &nb, depth - 1) {
                    return Some(r);
                }
                self.trace.pop();
            }
        }
        None
    }

    /// A label the non-divergent side can perform and the other cannot.
    fn witness_label(&self, ca: ObservableClass, cb: ObservableClass) -> Label {
        if ca == ObservableClass::Stuck || cb == ObservableClass::Stuck {
            Label::ContextProbe(self.pool.contexts.first().cloned().unwrap_or_default())
        } else {
            let v = self.pool.values.first().cloned().unwrap_or_else(crate::syntax::identity);
            Label::ValueProbe(v)
        }
    }
}

/// Plays the bounded game on two closed terms.
pub fn check(t0: &Term, t1: &Term, pool: &ProbePool) -> Result<Verdict> {
    require_closed(t0)?;
    require_closed(t1)?;
    pool.validate()?;
    let mut game = Game { pool, seen: HashMap::new(), trace: Vec::new() };
    match game.play(t0, t1, pool.depth) {
        Some(reason) => {
            let trace = game.trace;
            assert!(replay(t0, t1, &trace, pool.fuel), "distinguishing trace failed to replay");
            Ok(Verdict::Distinguished { trace, reason })
        }
        None => Ok(Verdict::BisimilarUpTo { depth: pool.depth, pool_fingerprint: pool.fingerprint() }),
    }
}

/// Replays a distinguishing trace: every label but the last is applied to
/// both sides, and the two sides must then differ in observable class.
pub fn replay(t0: &Term, t1: &Term, trace: &[Label], fuel: u64) -> bool {
    let Some((last, probes)) = trace.split_last() else { return false };
    let (mut a, mut b) = (t0.clone(), t1.clone());
    for label in probes {
        let (oa, ob) = observe_pair(&a, &b, fuel);
        let next = match label {
            Label::ValueProbe(v) => probe_value_closed(oa.term(), v).zip(probe_value_closed(ob.term(), v)),
            Label::ContextProbe(e) => {
                probe_context_closed(oa.term(), e).zip(probe_context_closed(ob.term(), e))
            }
            Label::Tau => None,
        };
        match next {
            Some((na, nb)) => (a, b) = (na, nb),
            None => return false,
        }
    }
    let (oa, ob) = observe_pair(&a, &b, fuel);
    if oa.class() == ob.class() {
        return false;
    }
    // the final label must be one that exactly one side can perform
    let can = |o: &Observable| match last {
        Label::ValueProbe(_) => o.class() == ObservableClass::Value,
        Label::ContextProbe(_) => o.class() == ObservableClass::Stuck,
        Label::Tau => false,
    };
    can(&oa) != can(&ob)
}

/// Builds both sides of an axiom instance and checks them with the default pool.
pub fn check_axiom_instance(tag: AxiomTag, inst: &Instantiation) -> Result<Verdict> {
    let (lhs, rhs) = inst.sides(tag)?;
    check(&lhs, &rhs, &default_pool())
}

/// Checks `C[t0]` against `C[t1]` for each context `C`.
pub fn congruence_sample(
    t0: &Term,
    t1: &Term,
    contexts: &[GeneralContext],
    pool: &ProbePool,
) -> Result<Vec<(GeneralContext, Verdict)>> {
    contexts
        .iter()
        .map(|c| {
            let v = check(&c.plug(t0), &c.plug(t1), pool)?;
            Ok((c.clone(), v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_with;

    fn p(s: &str) -> Term {
        parse_with(s, &Abbreviations::standard()).unwrap()
    }

    fn bisimilar(a: &str, b: &str) -> bool {
        !check(&p(a), &p(b), &default_pool()).unwrap().is_distinguished()
    }

    #[test]
    fn shift_applied_to_value_is_not_the_value() {
        let v = check(&p("S k. k i"), &p("i"), &default_pool()).unwrap();
        match v {
            Verdict::Distinguished { trace, reason } => {
                assert_eq!(trace, vec![Label::ContextProbe(PureContext::empty())]);
                assert_eq!(reason, "stuck vs value");
            }
            other => panic!("expected a distinction, got {other:?}"),
        }
    }

    #[test]
    fn known_bisimilar_pairs() {
        assert!(bisimilar("<i>", "i"));
        assert!(bisimilar("omega", "omega omega"));
        assert!(bisimilar("\\x.(\\y.y) x", "\\y.y"));
        assert!(bisimilar("(\\x.x x) i", "i i"));
        assert!(bisimilar("<(\\x.x) <i>>", "(\\x.<x>) <i>"));
    }

    #[test]
    fn known_distinct_pairs() {
        assert!(!bisimilar("i", "w"));
        assert!(!bisimilar("omega", "i"));
        assert!(!bisimilar("\\x.\\y.x", "\\x.\\y.y"));
    }

    #[test]
    fn symmetric_verdicts() {
        for (a, b) in [("S k. k i", "i"), ("i", "w"), ("<i>", "i"), ("omega", "S k.k")] {
            let x = check(&p(a), &p(b), &default_pool()).unwrap().is_distinguished();
            let y = check(&p(b), &p(a), &default_pool()).unwrap().is_distinguished();
            assert_eq!(x, y, "{a} vs {b}");
        }
    }

    #[test]
    fn congruence_examples() {
        let c = GeneralContext::parse_with("<@ w>", &Abbreviations::standard()).unwrap();
        let out = congruence_sample(&p("<i>"), &p("i"), &[c], &default_pool()).unwrap();
        assert!(!out[0].1.is_distinguished());
        let out =
            congruence_sample(&p("S k.k i"), &p("i"), &[GeneralContext::hole()], &default_pool()).unwrap();
        assert!(out[0].1.is_distinguished());
    }

    #[test]
    fn pool_json_and_fingerprint() {
        let a = Abbreviations::standard();
        let pool =
            ProbePool::from_json(r#"{"values": ["i"], "contexts": ["i @", "@ (w w)"]}"#, &a, 2, 50).unwrap();
        assert_eq!(pool.contexts.len(), 2);
        assert_ne!(pool.fingerprint(), default_pool().fingerprint());
        assert_eq!(default_pool().fingerprint(), default_pool().fingerprint());
        assert!(ProbePool::from_json(r#"{"values": ["i i"]}"#, &a, 2, 50).is_err());
        assert!(ProbePool::from_json(r#"{"values": ["x"]}"#, &a, 2, 50).is_err());
        assert!(ProbePool::from_json("[", &a, 2, 50).is_err());
    }

    #[test]
    fn open_terms_are_rejected() {
        assert!(check(&p("x"), &p("i"), &default_pool()).is_err());
    }
}
