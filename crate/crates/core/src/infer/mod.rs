//! Backward permission inference.
//!
//! [`Analyzer::wpp`] computes a sufficient permission precondition and
//! [`Analyzer::delta`] the relative permission difference of a statement.
//! Loops are summarised with pointwise maxima over the integer variables
//! they modify; [`infer_method`] then eliminates the maxima.

mod floordiv;
mod rules;
mod soundness;

pub use floordiv::eliminate_floor_div;
pub use rules::Analyzer;

use crate::expr::{BoolExpr, IntExpr, PermExpr};
use crate::frontend::{Method, SourceSpan, Stmt, StmtKind, WhileLoop};
use crate::invariants::{forward_intervals, resolve_invariants};
use crate::maxelim::{eliminate, ElimConfig, MaxElimError};
use crate::oracle::{OracleError, ValidityConfig};
use crate::simplify::simplify_perm;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum InferError {
    #[error("{span}: division outside a comparison: {expr}")]
    FloorDiv { span: SourceSpan, expr: String },
    #[error("{span}: unsupported: {what}")]
    Unsupported { span: SourceSpan, what: String },
    #[error("loop is not part of the analysed statement")]
    UnknownLoop,
    #[error(transparent)]
    MaxElim(#[from] MaxElimError),
    #[error("soundness check failed: {0}")]
    Check(OracleError),
}

/// What the analysis needs to know about one loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopMeta {
    /// Integer variables assigned in the body, sorted.
    pub modified: Vec<String>,
    /// Over-approximate invariant `I⁺`.
    pub over_inv: BoolExpr,
    /// Under-approximate invariant `I⁻`; `false` when none is known.
    pub under_inv: BoolExpr,
    pub exhale_free: bool,
}

impl LoopMeta {
    /// `I⁺` is the annotated invariants conjoined with `inferred`; `I⁻` the
    /// annotated under-invariants, or `false` without any.
    pub fn from_annotations(w: &WhileLoop, inferred: Option<BoolExpr>) -> LoopMeta {
        let mut over: Vec<BoolExpr> = inferred.into_iter().collect();
        over.extend(w.over_inv.iter().cloned());
        let under = if w.under_inv.is_empty() { BoolExpr::False } else { BoolExpr::and(w.under_inv.clone()) };
        LoopMeta {
            modified: w.body.modified_int_vars().into_iter().collect(),
            over_inv: BoolExpr::and(over),
            under_inv: under,
            exhale_free: !w.body.contains_exhale(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SoundnessCheck {
    /// Enumerate the condition over a bounded window.
    Bounded(ValidityConfig),
    /// Do not check; the condition is only reported.
    Export,
}

#[derive(Clone, Debug)]
pub struct InferConfig {
    pub elim: ElimConfig,
    pub soundness: SoundnessCheck,
    /// Strengthen `I⁺` with the forward interval analysis.
    pub intervals: bool,
}

impl Default for InferConfig {
    fn default() -> Self {
        InferConfig {
            elim: ElimConfig::default(),
            soundness: SoundnessCheck::Bounded(ValidityConfig::default()),
            intervals: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Soundness {
    /// No exhale in the body; no condition is needed.
    ExhaleFree,
    BoundedPass {
        checked: u64,
    },
    /// The condition fails; the loop gets an unsatisfiable precondition.
    BoundedCounterexample {
        detail: String,
    },
    /// Not checked here; the condition must be discharged externally.
    Exported {
        reason: String,
    },
}

impl Soundness {
    pub fn mode(&self) -> &'static str {
        match self {
            Soundness::ExhaleFree => "exhale-free",
            Soundness::BoundedPass { .. } => "bounded-pass",
            Soundness::BoundedCounterexample { .. } => "bounded-counterexample",
            Soundness::Exported { .. } => "exported",
        }
    }

    pub fn detail(&self) -> String {
        match self {
            Soundness::ExhaleFree => String::new(),
            Soundness::BoundedPass { checked } => format!("{checked} states checked"),
            Soundness::BoundedCounterexample { detail } => detail.clone(),
            Soundness::Exported { reason } => reason.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopReport {
    pub span: SourceSpan,
    pub modified: Vec<String>,
    pub over_inv: BoolExpr,
    pub under_inv: BoolExpr,
    pub exhale_free: bool,
    /// Whether an iteration counter was added because the body modifies
    /// no integer variable.
    pub counter_added: bool,
    /// The soundness condition after maximum elimination.
    pub condition: Option<BoolExpr>,
    pub soundness: Soundness,
    /// `max_{x̄ | I⁺ ∧ b}(⌈wpp(s, 0)⌉)` after elimination.
    pub loop_pre: PermExpr,
    /// The loop's gained-minus-lost term after elimination.
    pub loop_delta: PermExpr,
}

/// Inferred specification of one method.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodSpec {
    pub name: String,
    pub precondition: PermExpr,
    pub postcondition: PermExpr,
    pub loops: Vec<LoopReport>,
    /// Some loop failed its soundness condition.
    pub unsatisfiable: bool,
    /// Bodies of maxima not structurally known to be non-negative.
    pub unverified: Vec<PermExpr>,
    /// Constructs handled beyond the core rules, e.g. array assignment.
    pub extensions: Vec<String>,
}

/// Infer the precondition `wpp(body, 0)` and the postcondition
/// `wpp(body, 0) + Δ(body, 0)` of `m`, both free of maxima.
pub fn infer_method(m: &Method, cfg: &InferConfig) -> Result<MethodSpec, InferError> {
    let inferred = if cfg.intervals { forward_intervals(m) } else { vec![BoolExpr::True; m.body.loops().len()] };
    let body = prepare(&m.body)?;
    let metas = body
        .loops()
        .into_iter()
        .zip(inferred)
        .map(|((span, w), inv)| {
            let meta = resolve_invariants(w, Some(inv));
            Ok(LoopMeta {
                over_inv: eliminate_floor_div(&meta.over_inv).map_err(|expr| floor(span, expr))?,
                under_inv: eliminate_floor_div(&meta.under_inv).map_err(|expr| floor(span, expr))?,
                ..meta
            })
        })
        .collect::<Result<Vec<_>, InferError>>()?;

    let mut an = Analyzer::new(&body, metas, cfg.clone());
    let pre = an.wpp(&body, &PermExpr::zero())?;
    let diff = an.delta(&body, &PermExpr::zero())?;
    let pre = eliminate(&pre, &cfg.elim)?;
    let post = eliminate(&diff, &cfg.elim)?;
    let loops = an.loop_reports();

    let mut unverified = pre.unverified;
    unverified.extend(post.unverified);
    let mut extensions = Vec::new();
    body.visit(&mut |s| {
        if let StmtKind::AssignArrayVar(a1, a2) = &s.kind {
            extensions.push(format!("{}: array assignment `{a1} := {a2}` handled by substitution", s.span));
        }
    });
    Ok(MethodSpec {
        name: m.name.clone(),
        postcondition: simplify_perm(&(pre.expr.clone() + post.expr)),
        precondition: pre.expr,
        unsatisfiable: loops.iter().any(|l| matches!(l.soundness, Soundness::BoundedCounterexample { .. })),
        loops,
        unverified,
        extensions,
    })
}

fn floor(span: &SourceSpan, expr: String) -> InferError {
    InferError::FloorDiv { span: span.clone(), expr }
}

/// Remove floor divisions from conditions and reject the constructs the
/// rules cannot handle.
pub fn prepare(s: &Stmt) -> Result<Stmt, InferError> {
    let mut err = None;
    s.visit(&mut |t| {
        if err.is_some() {
            return;
        }
        let span = || t.span.clone();
        let ints: Vec<&IntExpr> = match &t.kind {
            StmtKind::AssignVar(_, e) | StmtKind::LoadElem(_, _, e) => vec![e],
            StmtKind::StoreElem(_, e, x) => vec![e, x],
            StmtKind::Inhale(_, e, _) | StmtKind::Exhale(_, e, _) => vec![e],
            StmtKind::While(w) if !w.body.modified_array_vars().is_empty() => {
                err = Some(InferError::Unsupported { span: span(), what: "array assignment inside a loop".into() });
                vec![]
            }
            _ => vec![],
        };
        if let Some(e) = ints.into_iter().find(|e| e.has_floor_div()) {
            err = Some(InferError::FloorDiv { span: span(), expr: e.to_string() });
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    rewrite_conditions(s)
}

fn rewrite_conditions(s: &Stmt) -> Result<Stmt, InferError> {
    let kind = match &s.kind {
        StmtKind::Seq(a, b) => StmtKind::Seq(Box::new(rewrite_conditions(a)?), Box::new(rewrite_conditions(b)?)),
        StmtKind::If(c, a, b) => StmtKind::If(
            eliminate_floor_div(c).map_err(|e| floor(&s.span, e))?,
            Box::new(rewrite_conditions(a)?),
            Box::new(rewrite_conditions(b)?),
        ),
        StmtKind::While(w) => {
            let f = |b: &BoolExpr| eliminate_floor_div(b).map_err(|e| floor(&s.span, e));
            StmtKind::While(WhileLoop {
                cond: f(&w.cond)?,
                over_inv: w.over_inv.iter().map(f).collect::<Result<_, _>>()?,
                under_inv: w.under_inv.iter().map(f).collect::<Result<_, _>>()?,
                body: Box::new(rewrite_conditions(&w.body)?),
            })
        }
        k => k.clone(),
    };
    Ok(Stmt::new(kind, s.span.clone()))
}

/// `wpp(s, p)` with loop invariants taken from the annotations.
pub fn wpp(s: &Stmt, p: &PermExpr) -> Result<PermExpr, InferError> {
    let s = prepare(s)?;
    Analyzer::from_annotations(&s, InferConfig::default()).wpp(&s, p)
}

/// `Δ(s, p)` with loop invariants taken from the annotations.
pub fn delta(s: &Stmt, p: &PermExpr) -> Result<PermExpr, InferError> {
    let s = prepare(s)?;
    Analyzer::from_annotations(&s, InferConfig::default()).delta(&s, p)
}
