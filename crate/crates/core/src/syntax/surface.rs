//! Named syntax trees: what the parser produces and the printer consumes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::term::{fresh_name, Hint, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Surface {
    Var(String),
    Lam(String, Box<Surface>),
    App(Box<Surface>, Box<Surface>),
    Shift(String, Box<Surface>),
    Reset(Box<Surface>),
    Hole,
}

impl Surface {
    pub(crate) fn holes(&self) -> usize {
        match self {
            Surface::Hole => 1,
            Surface::Var(_) => 0,
            Surface::Lam(_, b) | Surface::Shift(_, b) | Surface::Reset(b) => b.holes(),
            Surface::App(f, a) => f.holes() + a.holes(),
        }
    }

    /// Replaces the hole by `filler`. Binders of `self` may capture names of `filler`.
    pub(crate) fn fill(&self, filler: &Surface) -> Surface {
        match self {
            Surface::Hole => filler.clone(),
            Surface::Var(_) => self.clone(),
            Surface::Lam(x, b) => Surface::Lam(x.clone(), Box::new(b.fill(filler))),
            Surface::Shift(k, b) => Surface::Shift(k.clone(), Box::new(b.fill(filler))),
            Surface::Reset(b) => Surface::Reset(Box::new(b.fill(filler))),
            Surface::App(f, a) => Surface::App(Box::new(f.fill(filler)), Box::new(a.fill(filler))),
        }
    }

    /// Resolves names into a locally nameless term. Unbound names found in
    /// `abbrevs` are expanded, others stay free. Holes are rejected by the
    /// caller beforehand.
    pub(crate) fn resolve(&self, abbrevs: &BTreeMap<String, Term>) -> Term {
        let mut scope = Vec::new();
        self.resolve_in(&mut scope, abbrevs)
    }

    fn resolve_in(&self, scope: &mut Vec<String>, abbrevs: &BTreeMap<String, Term>) -> Term {
        match self {
            Surface::Var(x) => match scope.iter().rev().position(|y| y == x) {
                Some(i) => Term::Bound(i as u32),
                None => match abbrevs.get(x) {
                    Some(t) => t.clone(),
                    None => Term::Free(Var::raw(x.as_str())),
                },
            },
            Surface::Lam(x, b) | Surface::Shift(x, b) => {
                scope.push(x.clone());
                let body = Arc::new(b.resolve_in(scope, abbrevs));
                scope.pop();
                if matches!(self, Surface::Lam(..)) {
                    Term::Lam(Hint::new(x), body)
                } else {
                    Term::Shift(Hint::new(x), body)
                }
            }
            Surface::App(f, a) => {
                Term::App(Arc::new(f.resolve_in(scope, abbrevs)), Arc::new(a.resolve_in(scope, abbrevs)))
            }
            Surface::Reset(b) => Term::Reset(Arc::new(b.resolve_in(scope, abbrevs))),
            Surface::Hole => panic!("hole left in a term"),
        }
    }

    /// Names the binders of `t`. Binder names avoid every free name of
    /// `t`, every name in `extra_avoid`, and every enclosing binder name.
    pub(crate) fn from_term(t: &Term, extra_avoid: &BTreeSet<String>) -> Surface {
        let mut avoid: BTreeSet<String> = t.free_vars().into_iter().map(|v| v.as_str().to_owned()).collect();
        avoid.extend(extra_avoid.iter().cloned());
        let mut scope = Vec::new();
        name_term(t, &avoid, &mut scope)
    }
}

fn name_term(t: &Term, avoid: &BTreeSet<String>, scope: &mut Vec<String>) -> Surface {
    match t {
        Term::Bound(i) => {
            let i = *i as usize;
            match scope.len().checked_sub(i + 1) {
                Some(pos) => Surface::Var(scope[pos].clone()),
                // dangling index: only reachable when printing open subterms
                None => Surface::Var(format!("#{}", i - scope.len())),
            }
        }
        Term::Free(x) => Surface::Var(x.as_str().to_owned()),
        Term::Lam(h, b) | Term::Shift(h, b) => {
            let name = fresh_name(h.as_str(), |c| avoid.contains(c) || scope.iter().any(|s| s == c));
            scope.push(name.clone());
            let body = Box::new(name_term(b, avoid, scope));
            scope.pop();
            if matches!(t, Term::Lam(..)) {
                Surface::Lam(name, body)
            } else {
                Surface::Shift(name, body)
            }
        }
        Term::App(f, a) => {
            Surface::App(Box::new(name_term(f, avoid, scope)), Box::new(name_term(a, avoid, scope)))
        }
        Term::Reset(b) => Surface::Reset(Box::new(name_term(b, avoid, scope))),
    }
}

/// Concrete syntax with left-associative application and minimal parentheses.
impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Surface::Var(x) => f.write_str(x),
            Surface::Hole => f.write_str("@"),
            Surface::Lam(x, b) => write!(f, "\\{x}.{b}"),
            Surface::Shift(k, b) => write!(f, "S {k}.{b}"),
            Surface::Reset(b) => write!(f, "<{b}>"),
            Surface::App(fun, arg) => {
                match **fun {
                    Surface::Lam(..) | Surface::Shift(..) => write!(f, "({fun})")?,
                    _ => write!(f, "{fun}")?,
                }
                match **arg {
                    Surface::Lam(..) | Surface::Shift(..) | Surface::App(..) => write!(f, " ({arg})"),
                    _ => write!(f, " {arg}"),
                }
            }
        }
    }
}
