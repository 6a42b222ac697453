//! The `wpp` and `Δ` rules.

use super::soundness::{check, condition};
use super::{InferConfig, InferError, LoopMeta, LoopReport, Soundness};
use crate::approx::{havoc_over, havoc_under, over_bool, over_perm, under_bool, under_perm};
use crate::expr::{ArrayVars, BoolExpr, FreeVars, IntExpr, PermExpr};
use crate::frontend::{Stmt, StmtKind, WhileLoop};
use crate::maxelim::eliminate;
use crate::simplify::simplify_perm;
use std::collections::{BTreeSet, HashMap};

/// Everything about a loop that does not depend on the postcondition.
#[derive(Clone, Debug)]
struct LoopFacts {
    /// `max_{x̄ | I⁺ ∧ b}(⌈wpp(s, 0)⌉)`
    pre: PermExpr,
    /// Permissions definitely gained minus possibly lost over all iterations.
    d: PermExpr,
    sound: bool,
    report: LoopReport,
}

/// Backward analysis of one statement tree whose loops carry [`LoopMeta`].
///
/// Loop summaries are computed once and reused, so the analysis of a
/// loop body is not repeated for every postcondition it is asked about.
pub struct Analyzer<'s> {
    cfg: InferConfig,
    index: HashMap<*const WhileLoop, usize>,
    metas: Vec<LoopMeta>,
    facts: Vec<Option<LoopFacts>>,
    /// Every name in the analysed statement, for fresh-name generation.
    names: BTreeSet<String>,
    _body: std::marker::PhantomData<&'s Stmt>,
}

impl<'s> Analyzer<'s> {
    /// `metas` lists the loops of `body` in pre-order.
    pub fn new(body: &'s Stmt, metas: Vec<LoopMeta>, cfg: InferConfig) -> Self {
        let loops = body.loops();
        assert_eq!(loops.len(), metas.len(), "one LoopMeta per loop");
        let index = loops.iter().enumerate().map(|(i, (_, w))| (*w as *const WhileLoop, i)).collect();
        let mut names = BTreeSet::new();
        body.visit(&mut |s| collect_names(s, &mut names));
        Analyzer { cfg, index, facts: vec![None; metas.len()], metas, names, _body: std::marker::PhantomData }
    }

    /// Loop metadata taken from the annotations alone.
    pub fn from_annotations(body: &'s Stmt, cfg: InferConfig) -> Self {
        let metas = body.loops().into_iter().map(|(_, w)| LoopMeta::from_annotations(w, None)).collect();
        Analyzer::new(body, metas, cfg)
    }

    /// `wpp(s, p)`: permissions sufficient to run `s` and hold `p` after it.
    pub fn wpp(&mut self, s: &'s Stmt, p: &PermExpr) -> Result<PermExpr, InferError> {
        let out = match &s.kind {
            StmtKind::Skip => p.clone(),
            StmtKind::Seq(a, b) => {
                let q = self.wpp(b, p)?;
                self.wpp(a, &q)?
            }
            StmtKind::AssignVar(x, e) => p.subst(x, e),
            StmtKind::AssignArrayVar(a1, a2) => p.subst_array(a1, a2),
            StmtKind::LoadElem(x, a, e) => {
                PermExpr::max(p.subst(x, &IntExpr::lookup(a, e.clone())), PermExpr::perm(a, e.clone(), PermExpr::Rd))
            }
            StmtKind::StoreElem(a, e, x) => {
                PermExpr::max(store(p, a, e, x), PermExpr::perm(a, e.clone(), PermExpr::one()))
            }
            StmtKind::Exhale(a, e, q) => p.clone() + PermExpr::perm(a, e.clone(), q.clone()),
            StmtKind::Inhale(a, e, q) => {
                PermExpr::max(PermExpr::zero(), havoc_over(p, a, e) - PermExpr::perm(a, e.clone(), q.clone()))
            }
            StmtKind::If(b, s1, s2) => PermExpr::ite(b.clone(), self.wpp(s1, p)?, self.wpp(s2, p)?),
            StmtKind::While(w) => {
                let facts = self.loop_facts(s, w)?;
                let meta = self.meta(w)?;
                if !facts.sound {
                    // Two full permissions are never held: unsatisfiable.
                    PermExpr::ite(w.cond.clone(), PermExpr::frac(2, 1), p.clone())
                } else {
                    let after = maximum(&meta.modified, &over_bool(&exit(meta.over_inv.clone(), w)), over_perm(p));
                    PermExpr::ite(w.cond.clone(), PermExpr::max(facts.pre, after - facts.d), p.clone())
                }
            }
        };
        Ok(simplify_perm(&out))
    }

    /// `Δ(s, p)`: the change in held permissions caused by `s`, plus `p`.
    pub fn delta(&mut self, s: &'s Stmt, p: &PermExpr) -> Result<PermExpr, InferError> {
        let out = match &s.kind {
            StmtKind::Skip => p.clone(),
            StmtKind::Seq(a, b) => {
                let q = self.delta(b, p)?;
                self.delta(a, &q)?
            }
            StmtKind::AssignVar(x, e) => p.subst(x, e),
            StmtKind::AssignArrayVar(a1, a2) => p.subst_array(a1, a2),
            StmtKind::LoadElem(x, a, e) => p.subst(x, &IntExpr::lookup(a, e.clone())),
            StmtKind::StoreElem(a, e, x) => store(p, a, e, x),
            StmtKind::Exhale(a, e, q) => p.clone() - PermExpr::perm(a, e.clone(), q.clone()),
            StmtKind::Inhale(a, e, q) => havoc_under(p, a, e) + PermExpr::perm(a, e.clone(), q.clone()),
            StmtKind::If(b, s1, s2) => PermExpr::ite(b.clone(), self.delta(s1, p)?, self.delta(s2, p)?),
            StmtKind::While(w) => {
                let facts = self.loop_facts(s, w)?;
                let meta = self.meta(w)?;
                let carried =
                    gained_minus_lost(meta, &exit(meta.under_inv.clone(), w), &exit(meta.over_inv.clone(), w), p);
                PermExpr::ite(w.cond.clone(), facts.d + carried, p.clone())
            }
        };
        Ok(simplify_perm(&out))
    }

    /// Reports for the loops summarised so far, in pre-order.
    pub fn loop_reports(&self) -> Vec<LoopReport> {
        self.facts.iter().flatten().map(|f| f.report.clone()).collect()
    }

    fn meta(&self, w: &WhileLoop) -> Result<&LoopMeta, InferError> {
        let i = self.index.get(&(w as *const WhileLoop)).ok_or(InferError::UnknownLoop)?;
        Ok(&self.metas[*i])
    }

    fn loop_facts(&mut self, s: &'s Stmt, w: &'s WhileLoop) -> Result<LoopFacts, InferError> {
        let i = *self.index.get(&(w as *const WhileLoop)).ok_or(InferError::UnknownLoop)?;
        if let Some(f) = &self.facts[i] {
            return Ok(f.clone());
        }
        let meta = self.metas[i].clone();
        let body: &'s Stmt = &w.body;
        let step = over_perm(&self.wpp(body, &PermExpr::zero())?);
        let diff = self.delta(body, &PermExpr::zero())?;

        let pre = maximum(&meta.modified, &over_bool(&enter(meta.over_inv.clone(), w)), step.clone());
        let d = gained_minus_lost(&meta, &enter(meta.under_inv.clone(), w), &enter(meta.over_inv.clone(), w), &diff);

        let (cond, counter_added) = if meta.exhale_free {
            (None, false)
        } else {
            let (c, added) = condition(self, body, &meta, &w.cond, &step)?;
            (Some(c), added)
        };
        let (soundness, cond) = match cond {
            None => (Soundness::ExhaleFree, None),
            Some(c) => {
                let c = eliminate_bool_checked(&c, &self.cfg)?;
                (check(&c, &self.cfg)?, Some(c))
            }
        };
        let sound = !matches!(soundness, Soundness::BoundedCounterexample { .. });
        let elim = |p: &PermExpr| eliminate(p, &self.cfg.elim).map(|e| e.expr);
        let report = LoopReport {
            span: s.span.clone(),
            modified: meta.modified.clone(),
            over_inv: meta.over_inv.clone(),
            under_inv: meta.under_inv.clone(),
            exhale_free: meta.exhale_free,
            counter_added,
            condition: cond,
            soundness,
            loop_pre: elim(&pre)?,
            loop_delta: simplify_perm(&elim(&d)?),
        };
        let facts = LoopFacts { pre, d, sound, report };
        self.facts[i] = Some(facts.clone());
        Ok(facts)
    }

    pub(super) fn fresh(&mut self, base: &str) -> String {
        let n = crate::expr::fresh_name(base, &self.names);
        self.names.insert(n.clone());
        n
    }
}

fn eliminate_bool_checked(c: &BoolExpr, cfg: &InferConfig) -> Result<BoolExpr, InferError> {
    Ok(crate::maxelim::eliminate_bool(c, &cfg.elim)?.expr)
}

/// `I ∧ b`
fn enter(inv: BoolExpr, w: &WhileLoop) -> BoolExpr {
    BoolExpr::and2(inv, w.cond.clone())
}

/// `I ∧ ¬b`
fn exit(inv: BoolExpr, w: &WhileLoop) -> BoolExpr {
    BoolExpr::and2(inv, BoolExpr::not(w.cond.clone()))
}

/// `max_{x̄ | I⁻}(⌊max(0, p)⌋) − max_{x̄ | I⁺}(⌈max(0, −p)⌉)`, where the
/// guards are approximated in the same direction as the bodies.
fn gained_minus_lost(meta: &LoopMeta, under_g: &BoolExpr, over_g: &BoolExpr, p: &PermExpr) -> PermExpr {
    if p.is_zero() {
        return PermExpr::zero();
    }
    let zero = PermExpr::zero;
    let gained = maximum(&meta.modified, &under_bool(under_g), under_perm(&PermExpr::max(zero(), p.clone())));
    let lost = maximum(&meta.modified, &over_bool(over_g), over_perm(&PermExpr::max(zero(), zero() - p.clone())));
    simplify_perm(&(gained - lost))
}

/// `max_{x̄ | g}(p)`, simplified; an empty vector gives `ite(g, p, 0)`.
fn maximum(xs: &[String], g: &BoolExpr, p: PermExpr) -> PermExpr {
    let m =
        if xs.is_empty() { PermExpr::leaf(g.clone(), p) } else { PermExpr::pointwise_max(xs.to_vec(), g.clone(), p) };
    simplify_perm(&m)
}

/// The store rule's rewriting of every lookup `a'[e']` in `p` to
/// `ite(e = e' ∧ a = a', x, a'[e'])`.
fn store(p: &PermExpr, a: &str, e: &IntExpr, x: &IntExpr) -> PermExpr {
    let builder = |a2: &str, e2: &IntExpr| {
        IntExpr::ite(
            BoolExpr::and2(e.clone().eq(e2.clone()), BoolExpr::arr_eq(a, a2)),
            x.clone(),
            IntExpr::lookup(a2, e2.clone()),
        )
    };
    let mut avoid = e.free_vars();
    avoid.extend(x.free_vars());
    p.map_lookups_avoiding(&builder, &avoid)
}

fn collect_names(s: &Stmt, out: &mut BTreeSet<String>) {
    let mut ints = |e: &IntExpr| {
        out.extend(e.free_vars());
        out.extend(e.array_vars());
    };
    match &s.kind {
        StmtKind::AssignVar(x, e) => {
            ints(&IntExpr::var(x));
            ints(e);
        }
        StmtKind::AssignArrayVar(a, b) => {
            out.insert(a.clone());
            out.insert(b.clone());
        }
        StmtKind::LoadElem(x, a, e) => {
            ints(&IntExpr::var(x));
            ints(&IntExpr::lookup(a, e.clone()));
        }
        StmtKind::StoreElem(a, e, x) => {
            ints(&IntExpr::lookup(a, e.clone()));
            ints(x);
        }
        StmtKind::Inhale(a, e, q) | StmtKind::Exhale(a, e, q) => {
            ints(&IntExpr::lookup(a, e.clone()));
            out.extend(q.free_vars());
        }
        StmtKind::If(b, _, _) => {
            out.extend(b.free_vars());
            out.extend(b.array_vars());
        }
        StmtKind::While(w) => {
            for b in std::iter::once(&w.cond).chain(&w.over_inv).chain(&w.under_inv) {
                out.extend(b.free_vars());
                out.extend(b.array_vars());
            }
        }
        StmtKind::Skip | StmtKind::Seq(..) => {}
    }
    out.insert(crate::expr::QA.to_string());
    out.insert(crate::expr::QI.to_string());
}
