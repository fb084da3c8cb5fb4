//! Terms, contexts, substitution, parsing and printing.

mod context;
mod parse;
mod surface;
mod term;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use context::{EvalContext, EvalFrame, Frame, GeneralContext, PureContext};
pub use parse::ParseError;
pub use term::{alpha_eq, is_identifier, Hint, Term, Var};

pub(crate) use parse::parse_surface;
use surface::Surface;
pub(crate) use term::fresh_name;

/// Named terms that unbound identifiers expand to while parsing.
#[derive(Clone, Debug, Default)]
pub struct Abbreviations {
    map: BTreeMap<String, Term>,
}

impl Abbreviations {
    pub fn none() -> Abbreviations {
        Abbreviations::default()
    }

    /// `i = \x.x`, `w = \x.x x`, `omega = (\x.x x)(\x.x x)`.
    pub fn standard() -> Abbreviations {
        let mut a = Abbreviations::none();
        a.define("i", identity());
        a.define("w", small_omega());
        a.define("omega", big_omega());
        a
    }

    pub fn define(&mut self, name: &str, t: Term) {
        self.map.insert(name.to_owned(), t);
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.map.get(name)
    }
}

/// `i = λx.x`
pub fn identity() -> Term {
    Term::lam("x", Term::var("x"))
}

/// `ω = λx.x x`
pub fn small_omega() -> Term {
    Term::lam("x", Term::app(Term::var("x"), Term::var("x")))
}

/// `Ω = ω ω`
pub fn big_omega() -> Term {
    Term::app(small_omega(), small_omega())
}

/// Turing's fixed-point combinator `θ θ` with `θ = λx y.y (λz.x x y z)`.
pub fn turing_fixed_point() -> Term {
    let theta = parse("\\x.\\y.y (\\z.x x y z)").expect("fixed text");
    Term::app(theta.clone(), theta)
}

/// The call-by-value Curry combinator `λx.δ δ` with `δ = λy.x (λz.y y z)`.
pub fn curry_fixed_point() -> Term {
    parse("\\x.(\\y.x (\\z.y y z)) (\\y.x (\\z.y y z))").expect("fixed text")
}

/// Parses a term. Unbound names stay free.
pub fn parse(src: &str) -> Result<Term, ParseError> {
    parse_with(src, &Abbreviations::none())
}

/// Parses a term, expanding unbound names found in `abbrevs`.
pub fn parse_with(src: &str, abbrevs: &Abbreviations) -> Result<Term, ParseError> {
    let s = parse_surface(src, false)?;
    Ok(s.resolve(&abbrevs.map))
}

/// Concrete syntax for `t`. Binder names come from the binder hints, primed
/// as needed to stay distinct from free names and enclosing binders.
pub fn print(t: &Term) -> String {
    Surface::from_term(t, &BTreeSet::new()).to_string()
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", print(self))
    }
}
