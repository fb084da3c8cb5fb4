//! Contexts, stored inside-out: `frames[0]` is the frame around the hole.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::surface::Surface;
use super::term::Term;
use super::{parse_surface, Abbreviations};
use crate::error::{Error, Result};

/// One layer of a pure evaluation context.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Frame {
    /// `v □`
    AppliedValue(Term),
    /// `□ t`
    PendingArg(Term),
}

impl Frame {
    pub fn plug(&self, t: Term) -> Term {
        match self {
            Frame::AppliedValue(v) => Term::App(Arc::new(v.clone()), Arc::new(t)),
            Frame::PendingArg(a) => Term::App(Arc::new(t), Arc::new(a.clone())),
        }
    }

    pub fn term(&self) -> &Term {
        match self {
            Frame::AppliedValue(t) | Frame::PendingArg(t) => t,
        }
    }

    fn map(&self, f: impl FnOnce(&Term) -> Term) -> Frame {
        match self {
            Frame::AppliedValue(v) => Frame::AppliedValue(f(v)),
            Frame::PendingArg(a) => Frame::PendingArg(f(a)),
        }
    }
}

/// A pure evaluation context `E`: no reset between the hole and the top.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PureContext {
    frames: Vec<Frame>,
}

impl PureContext {
    pub fn empty() -> PureContext {
        PureContext::default()
    }

    /// Frames innermost first. Applied-value frames must hold values
    /// (variables count, for open contexts).
    pub fn new(frames: Vec<Frame>) -> Result<PureContext> {
        for f in &frames {
            if let Frame::AppliedValue(v) = f {
                if !v.is_value_or_var() {
                    return Err(Error::NonValueFrame(v.to_string()));
                }
            }
        }
        Ok(PureContext { frames })
    }

    pub(crate) fn from_frames_unchecked(frames: Vec<Frame>) -> PureContext {
        PureContext { frames }
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    /// `self` composed inside `outer`: `outer[self[□]]`.
    pub fn then(&self, outer: &PureContext) -> PureContext {
        let mut frames = self.frames.clone();
        frames.extend(outer.frames.iter().cloned());
        PureContext { frames }
    }

    /// `self[f[□]]`: adds `f` around the hole.
    pub fn with_inner(&self, f: Frame) -> PureContext {
        let mut frames = Vec::with_capacity(self.frames.len() + 1);
        frames.push(f);
        frames.extend(self.frames.iter().cloned());
        PureContext { frames }
    }

    pub fn plug(&self, t: Term) -> Term {
        self.frames.iter().fold(t, |acc, f| f.plug(acc))
    }

    pub fn is_closed(&self) -> bool {
        self.frames.iter().all(|f| f.term().is_closed())
    }

    pub fn has_loose(&self, i: u32) -> bool {
        self.frames.iter().any(|f| f.term().has_loose(i))
    }

    pub fn shifted(&self, d: i64, cutoff: u32) -> PureContext {
        PureContext { frames: self.frames.iter().map(|f| f.map(|t| t.shifted(d, cutoff))).collect() }
    }

    pub fn free_vars(&self) -> BTreeSet<super::Var> {
        self.frames.iter().flat_map(|f| f.term().free_vars()).collect()
    }

    /// Parses a context written with `@` for the hole, e.g. `i @` or `@ (w w)`.
    pub fn parse(src: &str) -> Result<PureContext> {
        PureContext::parse_with(src, &Abbreviations::none())
    }

    pub fn parse_with(src: &str, abbrevs: &Abbreviations) -> Result<PureContext> {
        GeneralContext::parse_with(src, abbrevs)?.to_pure(abbrevs)
    }
}

impl fmt::Display for PureContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hole = Term::var("@");
        let s = self.plug(hole).to_string();
        f.write_str(&s)
    }
}

/// One layer of an evaluation context.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EvalFrame {
    Pure(Frame),
    /// `⟨□⟩`
    Reset,
}

impl EvalFrame {
    pub fn plug(&self, t: Term) -> Term {
        match self {
            EvalFrame::Pure(f) => f.plug(t),
            EvalFrame::Reset => Term::Reset(Arc::new(t)),
        }
    }
}

/// A call-by-value evaluation context `F`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EvalContext {
    frames: Vec<EvalFrame>,
}

impl EvalContext {
    pub fn empty() -> EvalContext {
        EvalContext::default()
    }

    pub fn new(frames: Vec<EvalFrame>) -> Result<EvalContext> {
        for f in &frames {
            if let EvalFrame::Pure(Frame::AppliedValue(v)) = f {
                if !v.is_value_or_var() {
                    return Err(Error::NonValueFrame(v.to_string()));
                }
            }
        }
        Ok(EvalContext { frames })
    }

    pub(crate) fn from_frames_unchecked(frames: Vec<EvalFrame>) -> EvalContext {
        EvalContext { frames }
    }

    pub fn frames(&self) -> &[EvalFrame] {
        &self.frames
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn plug(&self, t: Term) -> Term {
        self.frames.iter().fold(t, |acc, f| f.plug(acc))
    }

    /// The pure frames with every reset frame erased.
    pub fn erase_resets(&self) -> PureContext {
        PureContext {
            frames: self
                .frames
                .iter()
                .filter_map(|f| match f {
                    EvalFrame::Pure(p) => Some(p.clone()),
                    EvalFrame::Reset => None,
                })
                .collect(),
        }
    }
}

impl From<PureContext> for EvalContext {
    fn from(e: PureContext) -> EvalContext {
        EvalContext { frames: e.frames.into_iter().map(EvalFrame::Pure).collect() }
    }
}

/// A term with exactly one hole, which may sit under binders.
///
/// Plugging may capture free variables of the filler.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralContext {
    shape: Surface,
}

impl GeneralContext {
    pub fn hole() -> GeneralContext {
        GeneralContext { shape: Surface::Hole }
    }

    pub fn parse(src: &str) -> Result<GeneralContext> {
        GeneralContext::parse_with(src, &Abbreviations::none())
    }

    /// Parses text with `@` marking the hole.
    pub fn parse_with(src: &str, abbrevs: &Abbreviations) -> Result<GeneralContext> {
        let shape = parse_surface(src, true)?;
        let n = shape.holes();
        if n != 1 {
            return Err(Error::Parse(super::ParseError {
                line: 1,
                column: 1,
                message: format!("a context needs exactly one `@`, found {n}"),
            }));
        }
        // expand abbreviations now, leaving the hole and binders untouched
        Ok(GeneralContext { shape: expand_abbrevs(&shape, abbrevs, &mut Vec::new()) })
    }

    pub fn plug(&self, t: &Term) -> Term {
        let filler = Surface::from_term(t, &self.binder_names());
        self.shape.fill(&filler).resolve(&Default::default())
    }

    fn binder_names(&self) -> BTreeSet<String> {
        fn go(s: &Surface, out: &mut BTreeSet<String>) {
            match s {
                Surface::Lam(x, b) | Surface::Shift(x, b) => {
                    out.insert(x.clone());
                    go(b, out);
                }
                Surface::Reset(b) => go(b, out),
                Surface::App(f, a) => {
                    go(f, out);
                    go(a, out);
                }
                Surface::Var(_) | Surface::Hole => {}
            }
        }
        let mut out = BTreeSet::new();
        go(&self.shape, &mut out);
        out
    }

    /// Reads the context as a pure evaluation context, if it is one.
    pub fn to_pure(&self, abbrevs: &Abbreviations) -> Result<PureContext> {
        let mut outer_first = Vec::new();
        let mut cur = &self.shape;
        loop {
            match cur {
                Surface::Hole => break,
                Surface::App(f, a) if f.holes() == 1 => {
                    outer_first.push(Frame::PendingArg(a.resolve(&abbrevs.map)));
                    cur = f;
                }
                Surface::App(f, a) => {
                    outer_first.push(Frame::AppliedValue(f.resolve(&abbrevs.map)));
                    cur = a;
                }
                _ => return Err(Error::NotPureContext(self.to_string())),
            }
        }
        outer_first.reverse();
        PureContext::new(outer_first)
    }
}

fn expand_abbrevs(s: &Surface, abbrevs: &Abbreviations, scope: &mut Vec<String>) -> Surface {
    match s {
        Surface::Var(x) if !scope.contains(x) => match abbrevs.map.get(x) {
            Some(t) => Surface::from_term(t, &BTreeSet::new()),
            None => s.clone(),
        },
        Surface::Var(_) | Surface::Hole => s.clone(),
        Surface::Lam(x, b) | Surface::Shift(x, b) => {
            scope.push(x.clone());
            let body = Box::new(expand_abbrevs(b, abbrevs, scope));
            scope.pop();
            if matches!(s, Surface::Lam(..)) {
                Surface::Lam(x.clone(), body)
            } else {
                Surface::Shift(x.clone(), body)
            }
        }
        Surface::App(f, a) => Surface::App(
            Box::new(expand_abbrevs(f, abbrevs, scope)),
            Box::new(expand_abbrevs(a, abbrevs, scope)),
        ),
        Surface::Reset(b) => Surface::Reset(Box::new(expand_abbrevs(b, abbrevs, scope))),
    }
}

impl fmt::Display for GeneralContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.shape)
    }
}
