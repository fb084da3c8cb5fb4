//! Locally nameless terms.
//!
//! Bound variables are de Bruijn indices, free variables keep their names.
//! Binders carry a [`Hint`] used only for printing, so the derived
//! `PartialEq`/`Hash` on [`Term`] is α-equivalence.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// A variable name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    /// Builds a variable, checking it against the lexical grammar.
    pub fn new(name: &str) -> Option<Var> {
        is_identifier(name).then(|| Var(name.into()))
    }

    /// Builds a variable without checking the lexical grammar. Used for
    /// internal names that must never clash with user identifiers.
    pub(crate) fn raw(name: impl Into<Arc<str>>) -> Var {
        Var(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// `[A-Za-z_][A-Za-z0-9_']*`, excluding the keywords `S` and `shift`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'') && !is_keyword(s)
}

pub(crate) fn is_keyword(s: &str) -> bool {
    s == "S" || s == "shift"
}

/// Printing hint carried by a binder. Every hint compares equal to every
/// other and hashes to nothing.
#[derive(Clone)]
pub struct Hint(Arc<str>);

impl Hint {
    pub fn new(name: &str) -> Hint {
        Hint(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PartialEq for Hint {
    fn eq(&self, _: &Hint) -> bool {
        true
    }
}

impl Eq for Hint {}

impl Hash for Hint {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl fmt::Debug for Hint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&Var> for Hint {
    fn from(v: &Var) -> Hint {
        Hint(v.0.clone())
    }
}

/// A λS term: variable, abstraction, application, shift, or reset.
///
/// Equality is α-equivalence.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// De Bruijn index of an enclosing `Lam` or `Shift`.
    Bound(u32),
    Free(Var),
    Lam(Hint, Arc<Term>),
    App(Arc<Term>, Arc<Term>),
    /// `S k.t`; the body refers to `k` as index 0.
    Shift(Hint, Arc<Term>),
    Reset(Arc<Term>),
}

impl Term {
    pub fn var(name: impl AsRef<str>) -> Term {
        Term::Free(Var::raw(name.as_ref()))
    }

    /// `λx.body`, binding the free occurrences of `x` in `body`.
    pub fn lam(x: impl AsRef<str>, body: Term) -> Term {
        let x = Var::raw(x.as_ref());
        Term::Lam(Hint::from(&x), Arc::new(body.close(&x)))
    }

    /// `S k.body`, binding the free occurrences of `k` in `body`.
    pub fn shift(k: impl AsRef<str>, body: Term) -> Term {
        let k = Var::raw(k.as_ref());
        Term::Shift(Hint::from(&k), Arc::new(body.close(&k)))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Arc::new(f), Arc::new(a))
    }

    /// Left-nested application `f a1 ... an`.
    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn reset(body: Term) -> Term {
        Term::Reset(Arc::new(body))
    }

    /// Closed values are exactly the abstractions.
    pub fn is_value(&self) -> bool {
        matches!(self, Term::Lam(..))
    }

    /// Abstraction or variable; the equational theory treats variables as values.
    pub fn is_value_or_var(&self) -> bool {
        matches!(self, Term::Lam(..) | Term::Bound(_) | Term::Free(_))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Bound(_) => {}
            Term::Free(x) => {
                out.insert(x.clone());
            }
            Term::Lam(_, b) | Term::Shift(_, b) | Term::Reset(b) => b.collect_free(out),
            Term::App(f, a) => {
                f.collect_free(out);
                a.collect_free(out);
            }
        }
    }

    /// No free names and no dangling indices.
    pub fn is_closed(&self) -> bool {
        self.is_closed_at(0)
    }

    fn is_closed_at(&self, depth: u32) -> bool {
        match self {
            Term::Bound(i) => *i < depth,
            Term::Free(_) => false,
            Term::Lam(_, b) | Term::Shift(_, b) => b.is_closed_at(depth + 1),
            Term::Reset(b) => b.is_closed_at(depth),
            Term::App(f, a) => f.is_closed_at(depth) && a.is_closed_at(depth),
        }
    }

    /// No dangling indices (free names allowed).
    pub fn is_locally_closed(&self) -> bool {
        !self.has_loose_at_or_above(0)
    }

    fn has_loose_at_or_above(&self, depth: u32) -> bool {
        match self {
            Term::Bound(i) => *i >= depth,
            Term::Free(_) => false,
            Term::Lam(_, b) | Term::Shift(_, b) => b.has_loose_at_or_above(depth + 1),
            Term::Reset(b) => b.has_loose_at_or_above(depth),
            Term::App(f, a) => f.has_loose_at_or_above(depth) || a.has_loose_at_or_above(depth),
        }
    }

    /// Does the dangling index `i` occur?
    pub fn has_loose(&self, i: u32) -> bool {
        match self {
            Term::Bound(j) => *j == i,
            Term::Free(_) => false,
            Term::Lam(_, b) | Term::Shift(_, b) => b.has_loose(i + 1),
            Term::Reset(b) => b.has_loose(i),
            Term::App(f, a) => f.has_loose(i) || a.has_loose(i),
        }
    }

    /// Adds `d` to every index `>= cutoff`.
    pub fn shifted(&self, d: i64, cutoff: u32) -> Term {
        if d == 0 || !self.has_loose_at_or_above(cutoff) {
            return self.clone();
        }
        self.shift_unchecked(d, cutoff)
    }

    fn shift_unchecked(&self, d: i64, cutoff: u32) -> Term {
        match self {
            Term::Bound(i) if *i >= cutoff => {
                let j = i64::from(*i) + d;
                debug_assert!(j >= 0, "negative de Bruijn index");
                Term::Bound(j as u32)
            }
            Term::Bound(_) | Term::Free(_) => self.clone(),
            Term::Lam(h, b) => Term::Lam(h.clone(), Arc::new(b.shifted(d, cutoff + 1))),
            Term::Shift(h, b) => Term::Shift(h.clone(), Arc::new(b.shifted(d, cutoff + 1))),
            Term::Reset(b) => Term::Reset(Arc::new(b.shifted(d, cutoff))),
            Term::App(f, a) => Term::App(Arc::new(f.shifted(d, cutoff)), Arc::new(a.shifted(d, cutoff))),
        }
    }

    /// Substitutes `arg` for index 0 of a binder body and lowers the other
    /// dangling indices by one. `arg` lives in the scope outside the binder.
    pub fn open_with(&self, arg: &Term) -> Term {
        let arg_closed = arg.is_locally_closed();
        self.subst_at(0, arg, arg_closed)
    }

    fn subst_at(&self, depth: u32, arg: &Term, arg_closed: bool) -> Term {
        match self {
            Term::Bound(i) if *i == depth => {
                if arg_closed {
                    arg.clone()
                } else {
                    arg.shifted(i64::from(depth), 0)
                }
            }
            Term::Bound(i) if *i > depth => Term::Bound(i - 1),
            Term::Bound(_) | Term::Free(_) => self.clone(),
            Term::Lam(h, b) => Term::Lam(h.clone(), Arc::new(b.subst_at(depth + 1, arg, arg_closed))),
            Term::Shift(h, b) => Term::Shift(h.clone(), Arc::new(b.subst_at(depth + 1, arg, arg_closed))),
            Term::Reset(b) => Term::Reset(Arc::new(b.subst_at(depth, arg, arg_closed))),
            Term::App(f, a) => Term::App(
                Arc::new(f.subst_at(depth, arg, arg_closed)),
                Arc::new(a.subst_at(depth, arg, arg_closed)),
            ),
        }
    }

    /// Turns the free occurrences of `x` into index 0 of a new enclosing
    /// binder, raising existing dangling indices by one.
    pub fn close(&self, x: &Var) -> Term {
        self.close_at(x, 0)
    }

    fn close_at(&self, x: &Var, depth: u32) -> Term {
        match self {
            Term::Free(y) if y == x => Term::Bound(depth),
            Term::Bound(i) if *i >= depth => Term::Bound(i + 1),
            Term::Bound(_) | Term::Free(_) => self.clone(),
            Term::Lam(h, b) => Term::Lam(h.clone(), Arc::new(b.close_at(x, depth + 1))),
            Term::Shift(h, b) => Term::Shift(h.clone(), Arc::new(b.close_at(x, depth + 1))),
            Term::Reset(b) => Term::Reset(Arc::new(b.close_at(x, depth))),
            Term::App(f, a) => Term::App(Arc::new(f.close_at(x, depth)), Arc::new(a.close_at(x, depth))),
        }
    }

    /// Capture-avoiding substitution `self[x := s]`.
    ///
    /// Binders are nameless, so no renaming is ever needed.
    pub fn substitute(&self, x: &Var, s: &Term) -> Term {
        let s_closed = s.is_locally_closed();
        self.substitute_at(x, s, s_closed, 0)
    }

    fn substitute_at(&self, x: &Var, s: &Term, s_closed: bool, depth: u32) -> Term {
        match self {
            Term::Free(y) if y == x => {
                if s_closed {
                    s.clone()
                } else {
                    s.shifted(i64::from(depth), 0)
                }
            }
            Term::Bound(_) | Term::Free(_) => self.clone(),
            Term::Lam(h, b) => Term::Lam(h.clone(), Arc::new(b.substitute_at(x, s, s_closed, depth + 1))),
            Term::Shift(h, b) => Term::Shift(h.clone(), Arc::new(b.substitute_at(x, s, s_closed, depth + 1))),
            Term::Reset(b) => Term::Reset(Arc::new(b.substitute_at(x, s, s_closed, depth))),
            Term::App(f, a) => Term::App(
                Arc::new(f.substitute_at(x, s, s_closed, depth)),
                Arc::new(a.substitute_at(x, s, s_closed, depth)),
            ),
        }
    }

    /// For a `Lam` or `Shift`, instantiates the bound variable with a name
    /// fresh for the body and returns it with the opened body.
    pub fn open_binder(&self) -> Option<(Var, Term)> {
        let (hint, body) = match self {
            Term::Lam(h, b) | Term::Shift(h, b) => (h, b),
            _ => return None,
        };
        let avoid: BTreeSet<String> = body.free_vars().into_iter().map(|v| v.as_str().to_owned()).collect();
        let name = Var::raw(fresh_name(hint.as_str(), |c| avoid.contains(c)));
        let opened = body.open_with(&Term::Free(name.clone()));
        Some((name, opened))
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Bound(_) | Term::Free(_) => 1,
            Term::Lam(_, b) | Term::Shift(_, b) | Term::Reset(b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
        }
    }

    /// Does the term contain `Shift` or `Reset` anywhere?
    pub fn has_control(&self) -> bool {
        match self {
            Term::Shift(..) | Term::Reset(_) => true,
            Term::Bound(_) | Term::Free(_) => false,
            Term::Lam(_, b) => b.has_control(),
            Term::App(f, a) => f.has_control() || a.has_control(),
        }
    }

    /// Does a `Shift` node occur anywhere?
    pub fn has_shift(&self) -> bool {
        match self {
            Term::Shift(..) => true,
            Term::Bound(_) | Term::Free(_) => false,
            Term::Lam(_, b) | Term::Reset(b) => b.has_shift(),
            Term::App(f, a) => f.has_shift() || a.has_shift(),
        }
    }
}

/// α-equivalence.
pub fn alpha_eq(t0: &Term, t1: &Term) -> bool {
    t0 == t1
}

/// Picks `base`, `base'`, `base''`, ... until `taken` rejects none.
///
/// Internal names of the form `k1#3` contribute only the part before `#`.
pub(crate) fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    let stem = base.split('#').next().unwrap_or("");
    let mut candidate =
        if stem.is_empty() || !is_identifier_prefix(stem) { "x".to_owned() } else { stem.to_owned() };
    while is_keyword(&candidate) || taken(&candidate) {
        candidate.push('\'');
    }
    candidate
}

fn is_identifier_prefix(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Term {
        Term::var("x")
    }

    #[test]
    fn lam_binds_by_name() {
        let id = Term::lam("x", x());
        assert_eq!(id, Term::Lam(Hint::new("x"), Arc::new(Term::Bound(0))));
        assert_eq!(id, Term::lam("y", Term::var("y")));
        assert_ne!(id, Term::lam("x", Term::app(x(), x())));
    }

    #[test]
    fn shift_binder_is_alpha_invariant() {
        assert_eq!(Term::shift("k", Term::var("k")), Term::shift("j", Term::var("j")));
    }

    #[test]
    fn free_vars_examples() {
        assert!(Term::lam("x", x()).free_vars().is_empty());
        let s = Term::shift("k", Term::app(Term::var("k"), x()));
        assert_eq!(s.free_vars().into_iter().collect::<Vec<_>>(), vec![Var::raw("x")]);
        let r = Term::reset(Term::app(x(), Term::var("y")));
        assert_eq!(r.free_vars().len(), 2);
    }

    #[test]
    fn substitution_examples() {
        let id_y = Term::lam("y", Term::var("y"));
        let xx = Term::app(x(), x());
        assert_eq!(xx.substitute(&Var::raw("x"), &id_y), Term::app(id_y.clone(), id_y.clone()));

        let z = Term::lam("z", Term::var("z"));
        assert_eq!(Term::lam("y", x()).substitute(&Var::raw("x"), &z), Term::lam("y", z.clone()));

        // (\y.x y)[x := \z.y] must not capture y
        let t = Term::lam("y", Term::app(x(), Term::var("y")));
        let s = Term::lam("z", Term::var("y"));
        let got = t.substitute(&Var::raw("x"), &s);
        let expected = Term::lam("y2", Term::app(s.clone(), Term::var("y2")));
        assert_eq!(got, expected);
        assert!(got.free_vars().contains(&Var::raw("y")));
    }

    #[test]
    fn substitution_of_absent_variable_is_identity() {
        let t = Term::lam("y", Term::app(Term::var("y"), Term::var("z")));
        assert_eq!(t.substitute(&Var::raw("x"), &Term::var("q")), t);
    }

    #[test]
    fn open_with_shifts_open_arguments() {
        // body of \a.\b.a applied to a dangling index 5
        let body = Term::Lam(Hint::new("b"), Arc::new(Term::Bound(1)));
        let got = body.open_with(&Term::Bound(5));
        assert_eq!(got, Term::Lam(Hint::new("b"), Arc::new(Term::Bound(6))));
    }

    #[test]
    fn open_binder_picks_fresh_names() {
        let t = Term::lam("y", Term::app(Term::var("y"), Term::var("y")));
        let (name, body) = t.open_binder().unwrap();
        assert_eq!(name.as_str(), "y");
        assert_eq!(body, Term::app(Term::var("y"), Term::var("y")));

        let t = Term::Lam(Hint::new("y"), Arc::new(Term::app(Term::Bound(0), Term::var("y"))));
        let (name, _) = t.open_binder().unwrap();
        assert_eq!(name.as_str(), "y'");
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("k1'"));
        assert!(is_identifier("_x"));
        assert!(!is_identifier("S"));
        assert!(!is_identifier("shift"));
        assert!(is_identifier("Sk"));
        assert!(!is_identifier("1x"));
        assert!(!is_identifier(""));
    }
}
