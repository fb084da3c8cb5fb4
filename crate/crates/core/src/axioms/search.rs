//! Bidirectional breadth-first proof search over axiom rewrites.

use std::collections::HashMap;

use super::{
    axiom_matches_with, is_instance, replace_at, subterm_at, AxiomTag, Direction, Position, Rewrite,
    DEFAULT_FRAME_BOUND,
};
use crate::cps::{cps_equiv, EquivVerdict};
use crate::syntax::Term;

/// One equational step: the subterm at `position` goes from `from` to `to`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofStep {
    pub position: Position,
    pub axiom: AxiomTag,
    pub direction: Direction,
    pub from: Term,
    pub to: Term,
}

impl ProofStep {
    fn inverse(&self) -> ProofStep {
        ProofStep {
            position: self.position.clone(),
            axiom: self.axiom,
            direction: self.direction.flip(),
            from: self.to.clone(),
            to: self.from.clone(),
        }
    }
}

impl From<&Rewrite> for ProofStep {
    fn from(r: &Rewrite) -> ProofStep {
        ProofStep {
            position: r.position.clone(),
            axiom: r.axiom,
            direction: r.direction,
            from: r.from.clone(),
            to: r.to.clone(),
        }
    }
}

/// A chain of axiom steps from `start` to `end`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTrace {
    pub start: Term,
    pub end: Term,
    pub steps: Vec<ProofStep>,
}

impl ProofTrace {
    /// Numbered lines `1. (<path>) <axiom> <dir>`.
    pub fn lines(&self) -> Vec<String> {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{}. {} {} {}", i + 1, s.position, s.axiom, s.direction))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let steps: Vec<_> = self
            .steps
            .iter()
            .map(|s| {
                serde_json::json!({
                    "position": s.position.0,
                    "axiom": s.axiom,
                    "direction": s.direction,
                    "from": s.from.to_string(),
                    "to": s.to.to_string(),
                })
            })
            .collect();
        serde_json::json!({
            "start": self.start.to_string(),
            "end": self.end.to_string(),
            "steps": steps,
        })
    }
}

/// Applies every step, checking each against its axiom; the final term
/// must be `trace.end`.
pub fn replay(trace: &ProofTrace) -> bool {
    let mut cur = trace.start.clone();
    for s in &trace.steps {
        if subterm_at(&cur, &s.position.0) != Some(&s.from) {
            return false;
        }
        let (l, r) = match s.direction {
            Direction::LeftToRight => (&s.from, &s.to),
            Direction::RightToLeft => (&s.to, &s.from),
        };
        if !is_instance(s.axiom, l, r) {
            return false;
        }
        cur = replace_at(&cur, &s.position.0, s.to.clone()).expect("position checked above");
    }
    cur == trace.end
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Maximum number of expanded nodes, over both directions.
    pub budget: usize,
    /// Frame bound for right-to-left `beta-omega`.
    pub frame_bound: usize,
    /// Terms larger than the larger endpoint by more than this are dropped.
    pub size_slack: usize,
}

impl SearchConfig {
    pub fn with_budget(budget: usize) -> SearchConfig {
        SearchConfig { budget, frame_bound: DEFAULT_FRAME_BOUND, size_slack: 8 }
    }
}

type Parents = HashMap<Term, Option<(Term, ProofStep)>>;

/// Searches for an equational proof of `t0 = t1`.
pub fn prove_equal(t0: &Term, t1: &Term, budget: usize) -> Option<ProofTrace> {
    prove_equal_with(t0, t1, &SearchConfig::with_budget(budget))
}

pub fn prove_equal_with(t0: &Term, t1: &Term, cfg: &SearchConfig) -> Option<ProofTrace> {
    let trace = search(t0, t1, cfg)?;
    assert!(replay(&trace), "proof search produced a trace that does not replay");
    Some(trace)
}

fn search(t0: &Term, t1: &Term, cfg: &SearchConfig) -> Option<ProofTrace> {
    let start = ProofTrace { start: t0.clone(), end: t1.clone(), steps: Vec::new() };
    if t0 == t1 {
        return Some(start);
    }
    let max_size = t0.size().max(t1.size()) + cfg.size_slack;
    let mut fwd: Parents = HashMap::from([(t0.clone(), None)]);
    let mut bwd: Parents = HashMap::from([(t1.clone(), None)]);
    let mut fwd_frontier = vec![t0.clone()];
    let mut bwd_frontier = vec![t1.clone()];
    let mut expanded = 0;
    loop {
        if fwd_frontier.is_empty() && bwd_frontier.is_empty() {
            return None;
        }
        // grow the smaller non-empty side by one whole level
        let forward =
            !fwd_frontier.is_empty() && (bwd_frontier.is_empty() || fwd_frontier.len() <= bwd_frontier.len());
        let (frontier, mine, theirs) =
            if forward { (&mut fwd_frontier, &mut fwd, &bwd) } else { (&mut bwd_frontier, &mut bwd, &fwd) };
        let mut next = Vec::new();
        for node in std::mem::take(frontier) {
            if expanded == cfg.budget {
                return None;
            }
            expanded += 1;
            for r in axiom_matches_with(&node, cfg.frame_bound) {
                if r.result.size() > max_size || mine.contains_key(&r.result) {
                    continue;
                }
                mine.insert(r.result.clone(), Some((node.clone(), ProofStep::from(&r))));
                if theirs.contains_key(&r.result) {
                    let meet = r.result;
                    let (f, b) = if forward { (&*mine, theirs) } else { (theirs, &*mine) };
                    return Some(ProofTrace { steps: join(f, b, &meet), ..start });
                }
                next.push(r.result);
            }
        }
        *frontier = next;
    }
}

/// Steps from the forward root to `meet`, then back along the backward tree.
fn join(fwd: &Parents, bwd: &Parents, meet: &Term) -> Vec<ProofStep> {
    let mut steps = Vec::new();
    let mut cur = meet;
    while let Some(Some((parent, step))) = fwd.get(cur) {
        steps.push(step.clone());
        cur = parent;
    }
    steps.reverse();
    let mut cur = meet;
    while let Some(Some((parent, step))) = bwd.get(cur) {
        steps.push(step.inverse());
        cur = parent;
    }
    steps
}

/// The outcome of proving and normalizing the same pair.
#[derive(Clone, Debug)]
pub struct CrossCheck {
    pub proof: Option<ProofTrace>,
    pub cps: EquivVerdict,
    /// A proof exists but the translations have distinct normal forms.
    pub contradiction: bool,
}

/// Runs the proof search and the CPS comparison on the same pair. A
/// contradiction means one of the two is wrong.
pub fn cross_check(t0: &Term, t1: &Term, budget: usize, fuel: u64) -> CrossCheck {
    let proof = prove_equal(t0, t1, budget);
    let cps = cps_equiv(t0, t1, fuel);
    let contradiction = proof.is_some() && matches!(cps, EquivVerdict::NotEquivalent(..));
    CrossCheck { proof, cps, contradiction }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_with, Abbreviations};

    fn p(s: &str) -> Term {
        parse_with(s, &Abbreviations::standard()).unwrap()
    }

    #[test]
    fn one_step_and_reflexive_proofs() {
        let tr = prove_equal(&p("S k. k i"), &p("i"), 100).unwrap();
        assert_eq!(tr.steps.len(), 1);
        assert_eq!(tr.steps[0].axiom, AxiomTag::ShiftElim);
        assert_eq!(tr.lines(), vec!["1. () S-elim L->R"]);
        assert!(prove_equal(&p("i"), &p("i"), 0).unwrap().steps.is_empty());
    }

    #[test]
    fn multi_step_proof_replays() {
        let tr = prove_equal(&p("<S k. k i>"), &p("i"), 10_000).unwrap();
        assert!(tr.steps.len() >= 2);
        assert!(replay(&tr));
        let mut broken = tr.clone();
        broken.end = p("w");
        assert!(!replay(&broken));
    }

    #[test]
    fn backward_steps_are_inverted() {
        // only reachable by expanding from the right-hand side
        let tr = prove_equal(&p("i"), &p("<<i>>"), 1000).unwrap();
        assert!(replay(&tr));
        assert!(tr.steps.iter().all(|s| s.direction == Direction::RightToLeft));
    }

    #[test]
    fn cross_check_examples() {
        let c = cross_check(&p("<i>"), &p("i"), 1000, 5000);
        assert!(c.proof.is_some() && matches!(c.cps, EquivVerdict::Equivalent(_)));
        let c = cross_check(&p("i"), &p("w"), 200, 5000);
        assert!(c.proof.is_none() && matches!(c.cps, EquivVerdict::NotEquivalent(..)));
        assert!(!c.contradiction);
        let c = cross_check(&p("omega"), &p("omega omega"), 200, 1000);
        assert!(c.proof.is_none() && matches!(c.cps, EquivVerdict::Unknown { .. }));
    }
}
