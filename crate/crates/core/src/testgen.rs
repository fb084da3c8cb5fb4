//! Random closed terms and differential checks of the reduction semantics
//! against the transition system, the stuck-term characterization and the
//! CPS translation.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cps::{cps_equiv, EquivVerdict};
use crate::error::{Error, Result};
use crate::lts::{self, Derivation, Label, LtsRule};
use crate::reduction::{self, Decomposition, Observable, Redex, Rule};
use crate::syntax::{identity, EvalContext, EvalFrame, Frame, Hint, PureContext, Term, Var};

/// Relative weights of the constructors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Weights {
    pub var: f64,
    pub lam: f64,
    pub app: f64,
    pub shift: f64,
    pub reset: f64,
}

impl Default for Weights {
    fn default() -> Weights {
        Weights { var: 1.0, lam: 3.0, app: 4.0, shift: 1.5, reset: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GenConfig {
    /// Upper bound on the node count.
    pub max_size: usize,
    pub seed: u64,
    pub weights: Weights,
    pub closed: bool,
    /// Chance of wrapping a shift-containing subterm in a reset.
    pub reset_bias: f64,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig { max_size: 20, seed: 0, weights: Weights::default(), closed: true, reset_bias: 0.5 }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let w = self.weights;
        let all = [w.var, w.lam, w.app, w.shift, w.reset];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidConfig("weights must be finite and non-negative".into()));
        }
        if all.iter().all(|x| *x == 0.0) {
            return Err(Error::InvalidConfig("at least one weight must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.reset_bias) {
            return Err(Error::InvalidConfig("reset_bias must lie in [0, 1]".into()));
        }
        let smallest = if self.closed { 2 } else { 1 };
        if self.max_size < smallest {
            return Err(Error::InvalidConfig(format!("max_size must be at least {smallest}")));
        }
        Ok(())
    }
}

const FREE_NAMES: [&str; 3] = ["a", "b", "c"];

struct Gen<'a> {
    cfg: &'a GenConfig,
    rng: ChaCha8Rng,
}

impl Gen<'_> {
    fn min_size(&self, depth: u32) -> usize {
        if depth == 0 && self.cfg.closed {
            2
        } else {
            1
        }
    }

    /// A term of exactly `n` nodes under `depth` binders, or `None` when
    /// the weights rule out every constructor that fits.
    fn exact(&mut self, n: usize, depth: u32) -> Option<Term> {
        let w = self.cfg.weights;
        let min = self.min_size(depth);
        let unary = n > min;
        let binary = n > 2 * min;
        let var_ok = n == 1 && (depth > 0 || !self.cfg.closed);
        let choices = [(var_ok, w.var), (unary, w.lam), (binary, w.app), (n >= 2, w.shift), (unary, w.reset)];
        let total: f64 = choices.iter().filter(|c| c.0).map(|c| c.1).sum();
        if total <= 0.0 {
            // fall back to any constructor that fits
            return self.fallback(n, depth);
        }
        let mut pick = self.rng.gen_range(0.0..total);
        let mut which = 0;
        for (i, (ok, weight)) in choices.iter().enumerate() {
            if !ok {
                continue;
            }
            which = i;
            if pick < *weight {
                break;
            }
            pick -= weight;
        }
        Some(match which {
            0 => self.variable(depth),
            1 => Term::Lam(self.hint("x", depth), Arc::new(self.exact(n - 1, depth + 1)?)),
            2 => {
                // a capture needs a reset somewhere above the shift
                if n - 1 > 2 * min && self.rng.gen_bool(self.cfg.reset_bias) {
                    let t = self.application(n - 1, depth)?;
                    if t.has_shift() {
                        return Some(Term::reset(t));
                    }
                }
                self.application(n, depth)?
            }
            3 => Term::Shift(self.hint("k", depth), Arc::new(self.exact(n - 1, depth + 1)?)),
            _ => Term::reset(self.exact(n - 1, depth)?),
        })
    }

    fn application(&mut self, n: usize, depth: u32) -> Option<Term> {
        let min = self.min_size(depth);
        let left = self.rng.gen_range(min..=n - 1 - min);
        let f = self.exact(left, depth)?;
        let a = self.exact(n - 1 - left, depth)?;
        Some(Term::app(f, a))
    }

    fn fallback(&mut self, n: usize, depth: u32) -> Option<Term> {
        if n == 1 && (depth > 0 || !self.cfg.closed) {
            return Some(self.variable(depth));
        }
        if n >= 2 {
            let body = self.fallback(n - 1, depth + 1)?;
            return Some(Term::Lam(self.hint("x", depth), Arc::new(body)));
        }
        None
    }

    fn variable(&mut self, depth: u32) -> Term {
        if depth == 0 || (!self.cfg.closed && self.rng.gen_bool(0.25)) {
            let name = FREE_NAMES[self.rng.gen_range(0..FREE_NAMES.len())];
            return Term::Free(Var::new(name).expect("valid name"));
        }
        Term::Bound(self.rng.gen_range(0..depth))
    }

    fn hint(&self, base: &str, depth: u32) -> Hint {
        Hint::new(&format!("{base}{depth}"))
    }
}

/// A random term. Deterministic in `cfg`; closed when `cfg.closed`.
pub fn gen_term(cfg: &GenConfig) -> Term {
    gen_indexed(cfg, 0)
}

/// The `index`-th term of the stream seeded by `cfg.seed`.
pub fn gen_indexed(cfg: &GenConfig, index: u64) -> Term {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let mut g = Gen { cfg, rng };
    let min = g.min_size(0);
    if cfg.max_size < min {
        return identity();
    }
    let n = g.rng.gen_range(min..=cfg.max_size);
    g.exact(n, 0).unwrap_or_else(identity)
}

/// `n` terms, the `i`-th from stream `i`.
pub fn corpus(n: usize, cfg: &GenConfig) -> Vec<Term> {
    (0..n as u64).into_par_iter().map(|i| gen_indexed(cfg, i)).collect()
}

/// Every way of reading a closed `t` as value, stuck term or context plus
/// redex, found by exhaustive search over the context grammar.
pub fn all_decompositions(t: &Term) -> Vec<Decomposition> {
    let mut out = Vec::new();
    if t.is_value() {
        out.push(Decomposition::IsValue(t.clone()));
    }
    for (e, hole) in pure_splits(t) {
        if let Term::Shift(bound, body) = hole {
            out.push(Decomposition::IsStuck { context: e, bound, body });
        }
    }
    for (f, hole) in eval_splits(t) {
        for redex in redexes_at(&hole) {
            out.push(Decomposition::Decomposed { context: f.clone(), redex });
        }
    }
    out
}

fn pure_splits(t: &Term) -> Vec<(PureContext, Term)> {
    eval_splits(t)
        .into_iter()
        .filter(|(f, _)| !f.frames().contains(&EvalFrame::Reset))
        .map(|(f, h)| (f.erase_resets(), h))
        .collect()
}

/// All `(F, s)` with `t = F[s]`, `F` an evaluation context.
fn eval_splits(t: &Term) -> Vec<(EvalContext, Term)> {
    fn go(t: &Term, outer_first: &mut Vec<EvalFrame>, out: &mut Vec<(EvalContext, Term)>) {
        let mut frames = outer_first.clone();
        frames.reverse();
        out.push((EvalContext::from_frames_unchecked(frames), t.clone()));
        match t {
            Term::App(f, a) => {
                outer_first.push(EvalFrame::Pure(Frame::PendingArg((**a).clone())));
                go(f, outer_first, out);
                outer_first.pop();
                if f.is_value() {
                    outer_first.push(EvalFrame::Pure(Frame::AppliedValue((**f).clone())));
                    go(a, outer_first, out);
                    outer_first.pop();
                }
            }
            Term::Reset(b) => {
                outer_first.push(EvalFrame::Reset);
                go(b, outer_first, out);
                outer_first.pop();
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

fn redexes_at(s: &Term) -> Vec<Redex> {
    let mut out = Vec::new();
    match s {
        Term::App(f, a) if f.is_value() && a.is_value() => {
            out.push(Redex::Beta { fun: (**f).clone(), arg: (**a).clone() });
        }
        Term::Reset(b) => {
            if b.is_value() {
                out.push(Redex::ResetValue((**b).clone()));
            }
            for (e, hole) in pure_splits(b) {
                if let Term::Shift(bound, body) = hole {
                    out.push(Redex::Capture { context: e, bound, body });
                }
            }
        }
        _ => {}
    }
    out
}

/// One failed check, with the offending term printed in full.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub check: String,
    pub term: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub checked: usize,
    pub failures: Vec<Failure>,
    /// How often each reduction rule and each transition rule was used.
    pub rule_coverage: BTreeMap<String, usize>,
    /// Pairs left undecided (CPS check only).
    pub unknown: usize,
}

impl FuzzReport {
    pub fn merge(mut self, other: FuzzReport) -> FuzzReport {
        self.checked += other.checked;
        self.failures.extend(other.failures);
        for (k, v) in other.rule_coverage {
            *self.rule_coverage.entry(k).or_default() += v;
        }
        self.unknown += other.unknown;
        self
    }

    pub fn covered(&self, rule: &str) -> bool {
        self.rule_coverage.get(rule).is_some_and(|&n| n > 0)
    }

    fn fail(&mut self, check: &str, t: &Term, detail: impl Into<String>) {
        self.failures.push(Failure { check: check.into(), term: t.to_string(), detail: detail.into() });
    }

    fn count(&mut self, rule: &str) {
        *self.rule_coverage.entry(rule.to_owned()).or_default() += 1;
    }

    fn count_derivation(&mut self, d: &Derivation) {
        for r in d.rules() {
            self.count(r.name());
        }
    }
}

fn run_all(n: usize, cfg: &GenConfig, job: impl Fn(&Term) -> FuzzReport + Sync) -> FuzzReport {
    let reports: Vec<FuzzReport> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = job(&gen_indexed(cfg, i));
            r.checked = 1;
            r
        })
        .collect();
    reports.into_iter().fold(FuzzReport::default(), FuzzReport::merge)
}

/// Contexts used to probe stuck terms during the differential checks.
fn probe_contexts() -> Vec<PureContext> {
    let i = identity();
    vec![
        PureContext::empty(),
        PureContext::from_frames_unchecked(vec![Frame::AppliedValue(i.clone())]),
        PureContext::from_frames_unchecked(vec![Frame::PendingArg(i.clone()), Frame::AppliedValue(i)]),
    ]
}

/// Follows each trace for up to `fuel` steps and compares the internal
/// transition with the reduction step at every term; also checks the
/// value and context probes at the end of the trace.
pub fn diff_lts_reduction(n: usize, cfg: &GenConfig, fuel: u64) -> FuzzReport {
    diff_lts_reduction_with(n, cfg, fuel, lts::tau_closed)
}

/// [`diff_lts_reduction`] against a supplied internal-step function, so the
/// harness can be tried on a broken transition system.
pub fn diff_lts_reduction_with(
    n: usize,
    cfg: &GenConfig,
    fuel: u64,
    tau: impl Fn(&Term) -> Option<Term> + Sync,
) -> FuzzReport {
    run_all(n, cfg, |t| check_lts_trace(t, fuel, &tau))
}

pub fn check_lts_trace(t: &Term, fuel: u64, tau: &dyn Fn(&Term) -> Option<Term>) -> FuzzReport {
    let mut rep = FuzzReport::default();
    let mut cur = t.clone();
    for _ in 0..=fuel {
        let by_reduction = reduction::step_closed(&cur);
        let by_lts = tau(&cur);
        let by_derivation = lts::derive_tau(&cur);
        if let Some(d) = &by_derivation {
            rep.count_derivation(d);
        }
        let reduced = by_reduction.as_ref().map(|(s, _)| s);
        if reduced != by_lts.as_ref() {
            rep.fail(
                "lts",
                t,
                format!("at `{cur}`: reduction gives {reduced:?}, transition gives {by_lts:?}"),
            );
            return rep;
        }
        if reduced != by_derivation.as_ref().map(Derivation::target) {
            rep.fail("lts", t, format!("at `{cur}`: derivation oracle disagrees"));
            return rep;
        }
        match by_reduction {
            Some((next, rule)) => {
                rep.count(rule.name());
                cur = next;
            }
            None => break,
        }
    }
    if cur.is_value() {
        check_value_probe(t, &cur, &mut rep);
    } else if reduction::step_closed(&cur).is_none() {
        for e in probe_contexts() {
            check_context_probe(t, &cur, &e, &mut rep);
        }
    }
    rep
}

fn check_value_probe(origin: &Term, v: &Term, rep: &mut FuzzReport) {
    let arg = identity();
    let probed = lts::probe_value_closed(v, &arg);
    let applied = lts::tau_closed(&Term::app(v.clone(), arg.clone()));
    if probed.is_none() || probed != applied {
        rep.fail("lts", origin, format!("value probe of `{v}` differs from applying it"));
    }
    if let Ok(Some(d)) = lts::derive(v, &Label::ValueProbe(arg)) {
        rep.count_derivation(&d);
    }
}

fn check_context_probe(origin: &Term, s: &Term, e: &PureContext, rep: &mut FuzzReport) {
    let probed = lts::probe_context_closed(s, e);
    let plugged = lts::tau_closed(&Term::reset(e.plug(s.clone())));
    if probed.is_none() || probed != plugged {
        rep.fail("lts", origin, format!("context probe `{e}` of `{s}` differs from capture under reset"));
    }
    match lts::derive(s, &Label::ContextProbe(e.clone())) {
        Ok(Some(d)) if Some(d.target()) == probed.as_ref() => rep.count_derivation(&d),
        _ => rep.fail("lts", origin, format!("no matching derivation for context probe `{e}` of `{s}`")),
    }
}

/// Along each trace, every term must have exactly one decomposition, it
/// must recompose to the term, and stuck results must have the shape
/// `E[S k.t]`.
pub fn diff_stuck_law(n: usize, cfg: &GenConfig, fuel: u64) -> FuzzReport {
    run_all(n, cfg, |t| check_decompositions(t, fuel))
}

pub fn check_decompositions(t: &Term, fuel: u64) -> FuzzReport {
    let mut rep = FuzzReport::default();
    let mut cur = t.clone();
    for _ in 0..=fuel {
        let d = reduction::decompose_closed(&cur);
        if d.recompose() != cur {
            rep.fail("stuck", t, format!("decomposition of `{cur}` does not recompose"));
            return rep;
        }
        let all = all_decompositions(&cur);
        if all.len() != 1 || all[0] != d {
            rep.fail("stuck", t, format!("`{cur}` has {} decompositions", all.len()));
            return rep;
        }
        match d {
            Decomposition::IsValue(_) => {
                rep.count("value");
                break;
            }
            Decomposition::IsStuck { .. } => {
                rep.count("stuck");
                if lts::stuck_split(&cur).is_none() || lts::tau_closed(&cur).is_some() {
                    rep.fail("stuck", t, format!("stuck `{cur}` does not have the shape E[S k.t]"));
                }
                break;
            }
            Decomposition::Decomposed { context, redex } => {
                rep.count(redex.rule().name());
                cur = context.plug(redex.contract());
            }
        }
    }
    if let Observable::Stuck(s) = reduction::evaluate_closed(t, fuel) {
        if !matches!(reduction::decompose_closed(&s), Decomposition::IsStuck { .. }) {
            rep.fail("stuck", t, "evaluation reported stuck on a non-stuck term");
        }
    }
    rep
}

/// For `n` generated terms that can take a step, compares the CPS images of
/// the term and its reduct. Terms that cannot step are skipped and do not
/// count towards `n`; generation stops after `20 * n` attempts.
pub fn diff_cps_sound(n: usize, cfg: &GenConfig, fuel: u64) -> FuzzReport {
    let mut pairs = Vec::with_capacity(n);
    let mut index = 0u64;
    while pairs.len() < n && index < 20 * n as u64 {
        let t = gen_indexed(cfg, index);
        index += 1;
        if let Some((next, rule)) = reduction::step_closed(&t) {
            pairs.push((t, next, rule));
        }
    }
    let reports: Vec<FuzzReport> = pairs
        .par_iter()
        .map(|(t, next, rule)| {
            let mut rep = FuzzReport { checked: 1, ..FuzzReport::default() };
            rep.count(rule.name());
            match cps_equiv(t, next, fuel) {
                EquivVerdict::Equivalent(_) => {}
                EquivVerdict::Unknown { .. } => rep.unknown += 1,
                EquivVerdict::NotEquivalent(a, b) => {
                    rep.fail("cps-sound", t, format!("reduct `{next}`: normal forms `{a}` and `{b}`"))
                }
            }
            rep
        })
        .collect();
    reports.into_iter().fold(FuzzReport::default(), FuzzReport::merge)
}

/// Names of all rules the coverage check expects to see.
pub fn expected_rules() -> Vec<&'static str> {
    Rule::ALL.iter().map(|r| r.name()).chain(LtsRule::ALL.iter().map(|r| r.name())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, print};

    #[test]
    fn generation_is_deterministic_and_closed() {
        let cfg = GenConfig { seed: 7, ..GenConfig::default() };
        assert_eq!(gen_term(&cfg), gen_term(&cfg));
        for t in corpus(200, &cfg) {
            assert!(t.is_closed());
            assert!(t.size() <= cfg.max_size);
            assert_eq!(parse(&print(&t)).unwrap(), t);
        }
    }

    #[test]
    fn tiny_sizes_give_the_identity() {
        for max_size in [0, 1] {
            let cfg = GenConfig { max_size, ..GenConfig::default() };
            assert_eq!(gen_term(&cfg), identity());
        }
    }

    #[test]
    fn zero_control_weights_give_plain_terms() {
        let weights = Weights { shift: 0.0, reset: 0.0, ..Weights::default() };
        let cfg = GenConfig { weights, ..GenConfig::default() };
        assert!(corpus(200, &cfg).iter().all(|t| !t.has_control()));
    }

    #[test]
    fn open_generation_uses_free_names() {
        let cfg = GenConfig { closed: false, ..GenConfig::default() };
        assert!(corpus(100, &cfg).iter().any(|t| !t.is_closed()));
    }

    #[test]
    fn bad_configs_are_rejected() {
        let weights = Weights { var: 0.0, lam: 0.0, app: 0.0, shift: 0.0, reset: 0.0 };
        assert!(GenConfig { weights, ..GenConfig::default() }.validate().is_err());
        assert!(GenConfig { reset_bias: 2.0, ..GenConfig::default() }.validate().is_err());
        assert!(GenConfig::default().validate().is_ok());
        assert!(GenConfig { max_size: 1, ..GenConfig::default() }.validate().is_err());
        assert!(GenConfig { max_size: 1, closed: false, ..GenConfig::default() }.validate().is_ok());
    }

    #[test]
    fn two_shift_term_passes_the_harness() {
        let t = crate::parse_with("<(S k1. i (k1 i)) (S k2. w) (w w)>", &crate::Abbreviations::standard())
            .unwrap();
        assert!(check_lts_trace(&t, 50, &lts::tau_closed).failures.is_empty());
        assert!(check_decompositions(&t, 50).failures.is_empty());
    }

    #[test]
    fn harness_catches_a_missing_capture_rule() {
        let mutant = |t: &Term| {
            lts::derive_tau(t)
                .filter(|d| !d.rules().contains(&LtsRule::CaptReset))
                .map(|d| d.target().clone())
        };
        let rep = diff_lts_reduction_with(300, &GenConfig::default(), 200, mutant);
        assert!(!rep.failures.is_empty());
    }

    #[test]
    fn stuck_examples() {
        let stuck = parse("S k.k").unwrap();
        assert!(matches!(
            all_decompositions(&stuck).as_slice(),
            [Decomposition::IsStuck { context, .. }] if context.is_empty()
        ));
        let under_reset = Term::reset(stuck);
        assert!(reduction::step(&under_reset).unwrap().is_some());
    }

    #[test]
    fn small_run_is_clean() {
        let cfg = GenConfig::default();
        let rep = diff_lts_reduction(200, &cfg, 200);
        assert_eq!(rep.checked, 200);
        assert!(rep.failures.is_empty(), "{:?}", rep.failures);
        let rep = diff_stuck_law(200, &cfg, 200);
        assert!(rep.failures.is_empty(), "{:?}", rep.failures);
    }
}
