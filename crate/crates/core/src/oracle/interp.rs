use super::exact::eval_perm_exact;
use super::OracleError;
use crate::expr::{eval_bool, eval_int, eval_perm, ArrayId, BoolExpr, Env, EvalError, Heap, IntExpr, PermValue};
use crate::frontend::{SourceSpan, Stmt, StmtKind, WhileLoop};
use std::collections::BTreeMap;

pub const DEFAULT_FUEL: u64 = 100_000;

/// Heap, permission map and environment of a running program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProgramState {
    pub heap: Heap,
    /// Held permission per location; absent entries are 0.
    pub perms: BTreeMap<(ArrayId, i64), PermValue>,
    pub env: Env,
}

impl ProgramState {
    pub fn new(env: Env, heap: Heap) -> Self {
        ProgramState { heap, perms: BTreeMap::new(), env }
    }

    pub fn perm(&self, a: ArrayId, i: i64) -> PermValue {
        self.perms.get(&(a, i)).cloned().unwrap_or_else(PermValue::zero)
    }

    pub fn set_perm(&mut self, a: ArrayId, i: i64, v: PermValue) {
        if v.is_zero() {
            self.perms.remove(&(a, i));
        } else {
            self.perms.insert((a, i), v);
        }
    }

    /// Every in-bounds location of the heap.
    pub fn locations(&self) -> Vec<(ArrayId, i64)> {
        self.heap.arrays.iter().flat_map(|(&id, v)| (0..v.len() as i64).map(move |i| (id, i))).collect()
    }

    /// Hold exactly `p` evaluated at `qa ↦ a, qi ↦ i` for every in-bounds
    /// location. Negative amounts are clamped to 0.
    pub fn seed(&mut self, p: &crate::expr::PermExpr) -> Result<(), OracleError> {
        for (a, i) in self.locations() {
            let v = eval_perm_exact(p, &self.env.at_location(a, i), &self.heap)?;
            self.set_perm(a, i, v.max(PermValue::zero()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Normal(ProgramState),
    PermFail(SourceSpan),
    /// Out-of-bounds access, failed evaluation, or an inhale that would
    /// exceed full permission.
    Stuck(SourceSpan),
    FuelExhausted,
}

impl RunOutcome {
    pub fn is_perm_fail(&self) -> bool {
        matches!(self, RunOutcome::PermFail(_))
    }
}

enum Halt {
    PermFail,
    Stuck,
}

impl From<EvalError> for Halt {
    fn from(_: EvalError) -> Self {
        Halt::Stuck
    }
}

/// What [`interpret_observed`] reports, before the statement takes effect.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event<'a> {
    /// The loop condition is about to be evaluated.
    LoopHead(&'a WhileLoop),
    Access(Access, ArrayId, i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Access {
    Read,
    Write,
    Inhale,
    Exhale,
}

/// Run `s` from `st`, executing at most `fuel` statements.
pub fn interpret(s: &Stmt, st: ProgramState, fuel: u64) -> RunOutcome {
    interpret_observed(s, st, fuel, &mut |_, _| {})
}

/// [`interpret`], calling `obs` at every loop head and heap access.
pub fn interpret_observed<'a>(
    s: &'a Stmt,
    st: ProgramState,
    fuel: u64,
    obs: &mut dyn FnMut(Event<'a>, &ProgramState),
) -> RunOutcome {
    let mut st = st;
    let mut stack: Vec<&Stmt> = vec![s];
    let mut steps = 0u64;
    while let Some(cur) = stack.pop() {
        if let StmtKind::Seq(a, b) = &cur.kind {
            stack.push(b);
            stack.push(a);
            continue;
        }
        steps += 1;
        if steps > fuel {
            return RunOutcome::FuelExhausted;
        }
        match step(cur, &mut st, &mut stack, obs) {
            Ok(()) => {}
            Err(Halt::PermFail) => return RunOutcome::PermFail(cur.span.clone()),
            Err(Halt::Stuck) => return RunOutcome::Stuck(cur.span.clone()),
        }
    }
    RunOutcome::Normal(st)
}

fn step<'a>(
    s: &'a Stmt,
    st: &mut ProgramState,
    stack: &mut Vec<&'a Stmt>,
    obs: &mut dyn FnMut(Event<'a>, &ProgramState),
) -> Result<(), Halt> {
    match &s.kind {
        StmtKind::Skip | StmtKind::Seq(..) => {}
        StmtKind::AssignVar(x, e) => {
            let v = int(e, st)?;
            st.env.ints.insert(x.clone(), v);
        }
        StmtKind::AssignArrayVar(a, b) => {
            let id = st.env.array(b)?;
            st.env.arrays.insert(a.clone(), id);
        }
        StmtKind::LoadElem(x, a, e) => {
            let (id, i) = location(a, e, st)?;
            obs(Event::Access(Access::Read, id, i), st);
            if !st.perm(id, i).is_positive() {
                return Err(Halt::PermFail);
            }
            let v = st.heap.get(id, i).ok_or(Halt::Stuck)?;
            st.env.ints.insert(x.clone(), v);
        }
        StmtKind::StoreElem(a, e, rhs) => {
            let (id, i) = location(a, e, st)?;
            obs(Event::Access(Access::Write, id, i), st);
            let v = int(rhs, st)?;
            if st.perm(id, i) < PermValue::one() {
                return Err(Halt::PermFail);
            }
            st.heap.set(id, i, v).ok_or(Halt::Stuck)?;
        }
        StmtKind::Inhale(a, e, p) => {
            let (id, i) = location(a, e, st)?;
            obs(Event::Access(Access::Inhale, id, i), st);
            let held = st.perm(id, i) + eval_perm(p, &st.env, &st.heap)?;
            if held > PermValue::one() {
                return Err(Halt::Stuck);
            }
            st.set_perm(id, i, held);
        }
        StmtKind::Exhale(a, e, p) => {
            let (id, i) = location(a, e, st)?;
            obs(Event::Access(Access::Exhale, id, i), st);
            let want = eval_perm(p, &st.env, &st.heap)?;
            let held = st.perm(id, i);
            if held < want {
                return Err(Halt::PermFail);
            }
            st.set_perm(id, i, held - want);
        }
        StmtKind::If(c, a, b) => stack.push(if cond(c, st)? { a } else { b }),
        StmtKind::While(w) => {
            obs(Event::LoopHead(w), st);
            if cond(&w.cond, st)? {
                stack.push(s);
                stack.push(&w.body);
            }
        }
    }
    Ok(())
}

/// Array id and in-bounds index denoted by `a[e]`.
fn location(a: &str, e: &IntExpr, st: &ProgramState) -> Result<(ArrayId, i64), Halt> {
    let id = st.env.array(a)?;
    let i = int(e, st)?;
    if i < 0 || i >= st.heap.len(id) {
        return Err(Halt::Stuck);
    }
    Ok((id, i))
}

/// Reads inside expressions need some permission, like loads.
fn check_reads(lookups: Vec<(String, IntExpr)>, st: &ProgramState) -> Result<(), Halt> {
    for (a, e) in lookups.into_iter().rev() {
        let (id, i) = location(&a, &e, st)?;
        if !st.perm(id, i).is_positive() {
            return Err(Halt::PermFail);
        }
    }
    Ok(())
}

fn int(e: &IntExpr, st: &ProgramState) -> Result<i64, Halt> {
    let mut reads = Vec::new();
    e.collect_lookups(&mut reads);
    check_reads(reads, st)?;
    Ok(eval_int(e, &st.env, &st.heap)?)
}

fn cond(b: &BoolExpr, st: &ProgramState) -> Result<bool, Halt> {
    let mut reads = Vec::new();
    b.collect_lookups(&mut reads);
    check_reads(reads, st)?;
    Ok(eval_bool(b, &st.env, &st.heap)?)
}
