use super::exact::eval_bool_exact;
use super::OracleError;
use crate::expr::{ArrayVars, BoolExpr, Env, EvalError, FreeVars, Heap, QA};
use std::ops::ControlFlow;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityConfig {
    pub lo: i64,
    pub hi: i64,
    /// Largest number of states to enumerate.
    pub budget: u64,
}

impl Default for ValidityConfig {
    fn default() -> Self {
        ValidityConfig { lo: -4, hi: 8, budget: 20_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    /// No counterexample among `checked` states; bounded evidence only.
    Pass {
        checked: u64,
    },
    Counterexample {
        env: Env,
        heap: Heap,
    },
}

impl Validity {
    pub fn is_pass(&self) -> bool {
        matches!(self, Validity::Pass { .. })
    }
}

/// Search for a state falsifying `b`.
///
/// Integer variables (including `qi`) range over `[lo, hi]`. Program arrays
/// are assigned ids in every aliasing pattern, each id gets a length in
/// `[0, hi]`, and `qa` ranges over those ids plus one fresh array. When `b`
/// reads arrays, contents are taken from a fixed family of fillings. States
/// where evaluation is stuck on an out-of-bounds read are skipped.
pub fn bounded_validity(b: &BoolExpr, cfg: &ValidityConfig) -> Result<Validity, OracleError> {
    let ints: Vec<String> = b.free_vars().into_iter().collect();
    let arrays: Vec<String> = b.array_vars().into_iter().filter(|a| a != QA).collect();
    let n = arrays.len() as i64;
    let fillings: &[Filling] = if b.has_lookup() { &[Filling::Zero, Filling::Index] } else { &[Filling::Zero] };

    let width = (cfg.hi - cfg.lo + 1).max(0) as u64;
    let required = (width.saturating_pow(ints.len() as u32))
        .saturating_mul((n as u64).saturating_pow(n as u32))
        .saturating_mul(((cfg.hi + 1).max(1) as u64).saturating_pow(n as u32))
        .saturating_mul(n as u64 + 1)
        .saturating_mul(fillings.len() as u64);
    if required > cfg.budget {
        return Err(OracleError::Budget { required, budget: cfg.budget });
    }

    let mut checked = 0u64;
    let mut found = None;
    let _ = odometer(&vec![(0, (n - 1).max(0)); arrays.len()], &mut |ids| {
        // Lengths only for ids that some array variable denotes.
        let mut used: Vec<i64> = ids.to_vec();
        used.sort_unstable();
        used.dedup();
        odometer(&vec![(0, cfg.hi.max(0)); used.len()], &mut |lens| {
            for fill in fillings {
                let mut heap = Heap::new();
                for (id, len) in used.iter().zip(lens) {
                    heap = heap.with_array(*id as u32, fill.contents(*len));
                }
                heap = heap.with_array(n as u32, fill.contents(cfg.hi + 1));
                let mut base = Env::new();
                for (a, id) in arrays.iter().zip(ids) {
                    base = base.with_array(a, *id as u32);
                }
                let qa_ids: Vec<u32> = used.iter().map(|&i| i as u32).chain([n as u32]).collect();
                for qa in qa_ids {
                    let env0 = base.clone().with_array(QA, qa);
                    let flow = odometer(&vec![(cfg.lo, cfg.hi); ints.len()], &mut |vals| {
                        let mut env = env0.clone();
                        for (x, v) in ints.iter().zip(vals) {
                            env = env.with_int(x, *v);
                        }
                        checked += 1;
                        match eval_bool_exact(b, &env, &heap) {
                            Ok(true) | Err(OracleError::Eval(EvalError::OutOfBounds { .. })) => {
                                ControlFlow::Continue(())
                            }
                            Ok(false) => {
                                found = Some(Ok(Validity::Counterexample { env, heap: heap.clone() }));
                                ControlFlow::Break(())
                            }
                            Err(e) => {
                                found = Some(Err(e));
                                ControlFlow::Break(())
                            }
                        }
                    });
                    flow?;
                }
            }
            ControlFlow::Continue(())
        })
    });
    found.unwrap_or(Ok(Validity::Pass { checked }))
}

#[derive(Clone, Copy)]
enum Filling {
    Zero,
    Index,
}

impl Filling {
    fn contents(self, len: i64) -> Vec<i64> {
        match self {
            Filling::Zero => vec![0; len as usize],
            Filling::Index => (0..len).collect(),
        }
    }
}

/// Call `f` on every point of the box `ranges` (inclusive bounds).
fn odometer(ranges: &[(i64, i64)], f: &mut dyn FnMut(&[i64]) -> ControlFlow<()>) -> ControlFlow<()> {
    if ranges.iter().any(|(l, h)| l > h) {
        return ControlFlow::Continue(());
    }
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&cur)?;
        let mut k = 0;
        loop {
            if k == cur.len() {
                return ControlFlow::Continue(());
            }
            if cur[k] < ranges[k].1 {
                cur[k] += 1;
                break;
            }
            cur[k] = ranges[k].0;
            k += 1;
        }
    }
}
