//! Random loop-free programs and initial states for the soundness suites.

use permax::expr::{Env, Heap, PermExpr, PermValue};
use permax::frontend::{parse_program, parse_program_file, Method};
use permax::oracle::{eval_perm_exact, ProgramState};
use rand::Rng;

const PERMS: &[&str] = &["1", "1/2", "1/3", "rd"];

/// Source of `method m(a: Int[], b: Int[], x: Int, y: Int)` with a random
/// loop-free body. `exhales` controls whether exhale statements occur.
pub fn loop_free_source(rng: &mut impl Rng, exhales: bool) -> String {
    let mut g = Gen { exhales, budget: 8 };
    let body = g.block(rng, 3);
    format!("method m(a: Int[], b: Int[], x: Int, y: Int) {{\n    var v: Int;\n    {body}\n}}")
}

pub fn loop_free(rng: &mut impl Rng, exhales: bool) -> Method {
    let src = loop_free_source(rng, exhales);
    let prog = parse_program(&src).unwrap_or_else(|e| panic!("{e}\n{src}"));
    prog.methods.into_iter().next().unwrap()
}

struct Gen {
    exhales: bool,
    budget: u32,
}

impl Gen {
    fn block(&mut self, rng: &mut impl Rng, depth: u32) -> String {
        let n = rng.gen_range(1..=4);
        (0..n).map(|_| self.stmt(rng, depth)).collect::<Vec<_>>().join(";\n    ")
    }

    fn array(&self, rng: &mut impl Rng) -> &'static str {
        ["a", "b"][rng.gen_range(0..2)]
    }

    fn int_var(&self, rng: &mut impl Rng) -> &'static str {
        ["x", "y", "v"][rng.gen_range(0..3)]
    }

    fn index(&self, rng: &mut impl Rng) -> String {
        match rng.gen_range(0..6) {
            0 => "0".into(),
            1 => "1".into(),
            2 => format!("{} + 1", self.int_var(rng)),
            3 => format!("length({}) - 1", self.array(rng)),
            _ => self.int_var(rng).into(),
        }
    }

    fn int_expr(&self, rng: &mut impl Rng) -> String {
        match rng.gen_range(0..5) {
            0 => rng.gen_range(-2..=3).to_string(),
            1 => format!("{} + {}", self.int_var(rng), rng.gen_range(-1..=2)),
            2 => format!("{} - {}", self.int_var(rng), self.int_var(rng)),
            3 => format!("length({})", self.array(rng)),
            _ => self.int_var(rng).into(),
        }
    }

    fn cond(&self, rng: &mut impl Rng) -> String {
        let ops = ["<", "<=", "==", "!=", ">", ">="];
        let c = format!("{} {} {}", self.int_var(rng), ops[rng.gen_range(0..6)], self.int_expr(rng));
        if rng.gen_bool(0.2) {
            format!("{c} && {} % 2 == 0", self.int_var(rng))
        } else {
            c
        }
    }

    fn stmt(&mut self, rng: &mut impl Rng, depth: u32) -> String {
        if self.budget == 0 {
            return "skip".into();
        }
        self.budget -= 1;
        let perm = PERMS[rng.gen_range(0..PERMS.len())];
        match rng.gen_range(0..if depth > 0 { 10 } else { 9 }) {
            0 => format!("{} := {}", self.int_var(rng), self.int_expr(rng)),
            1 | 2 => format!("{} := {}[{}]", self.int_var(rng), self.array(rng), self.index(rng)),
            3 => format!("{}[{}] := {}", self.array(rng), self.index(rng), self.int_var(rng)),
            4 | 5 => format!("inhale({}, {}, {perm})", self.array(rng), self.index(rng)),
            6 | 7 if self.exhales => format!("exhale({}, {}, {perm})", self.array(rng), self.index(rng)),
            8 if rng.gen_bool(0.3) => "a := b".into(),
            9 => format!(
                "if ({}) {{\n    {}\n    }} else {{\n    {}\n    }}",
                self.cond(rng),
                self.block(rng, depth - 1),
                self.block(rng, depth - 1)
            ),
            _ => format!("{} := {}[{}]", self.int_var(rng), self.array(rng), self.index(rng)),
        }
    }
}

/// Arrays `a` and `b` (aliased a third of the time) with lengths in
/// `0..=3`, and `x`, `y` in `-1..=3`.
pub fn initial_state(rng: &mut impl Rng) -> ProgramState {
    let alias = rng.gen_bool(0.33);
    let mut heap = Heap::new();
    for id in 0..2u32 {
        let len = rng.gen_range(0..=3);
        heap = heap.with_array(id, (0..len).map(|_| rng.gen_range(-1..=3)).collect());
    }
    let env = Env::new()
        .with_array("a", 0)
        .with_array("b", if alias { 0 } else { 1 })
        .with_int("x", rng.gen_range(-1..=3))
        .with_int("y", rng.gen_range(-1..=3));
    ProgramState::new(env, heap)
}

/// `p` at every location of `st`, evaluated in `st`; `None` if `p` reads
/// the heap out of bounds.
pub fn values_at(p: &PermExpr, st: &ProgramState) -> Option<Vec<((u32, i64), PermValue)>> {
    st.locations()
        .into_iter()
        .map(|(a, i)| eval_perm_exact(p, &st.env.at_location(a, i), &st.heap).ok().map(|v| ((a, i), v)))
        .collect()
}

/// Exhaustive comparison of two permission expressions over `qa` (each of
/// `arrays` plus one fresh object), `qi ∈ [-3, 10]`, `length ∈ [0, 8]` for
/// the arrays, and each of `ints` over its range. Returns the first
/// difference.
pub fn first_difference(p: &PermExpr, q: &PermExpr, arrays: &[&str], ints: &[(&str, i64, i64)]) -> Option<String> {
    let fresh = arrays.len() as u32;
    let mut lens = vec![0i64; arrays.len()];
    loop {
        let mut heap = Heap::new();
        for (id, &len) in lens.iter().enumerate() {
            heap = heap.with_array(id as u32, vec![0; len as usize]);
        }
        heap = heap.with_array(fresh, vec![0; 11]);
        let mut env = Env::new();
        for (id, a) in arrays.iter().enumerate() {
            env = env.with_array(a, id as u32);
        }
        let mut vals: Vec<i64> = ints.iter().map(|&(_, lo, _)| lo).collect();
        loop {
            let mut e = env.clone();
            for ((x, _, _), v) in ints.iter().zip(&vals) {
                e = e.with_int(x, *v);
            }
            for qa in 0..=fresh {
                for qi in -3..=10 {
                    let e = e.clone().with_array(permax::expr::QA, qa).with_int(permax::expr::QI, qi);
                    let a = eval_perm_exact(p, &e, &heap).unwrap();
                    let b = eval_perm_exact(q, &e, &heap).unwrap();
                    if a != b {
                        return Some(format!("{a} != {b} at {e:?}, lengths {lens:?}"));
                    }
                }
            }
            if !bump(&mut vals, ints.iter().map(|&(_, lo, hi)| (lo, hi))) {
                break;
            }
        }
        if !bump(&mut lens, arrays.iter().map(|_| (0, 8))) {
            return None;
        }
    }
}

/// Odometer increment; false once every digit has wrapped.
fn bump(digits: &mut [i64], ranges: impl Iterator<Item = (i64, i64)>) -> bool {
    for (d, (lo, hi)) in digits.iter_mut().zip(ranges) {
        if *d < hi {
            *d += 1;
            return true;
        }
        *d = lo;
    }
    false
}

/// Distinct arrays of length `0..=8` with random contents, and integer
/// parameters in `-1..=8`.
pub fn corpus_state(m: &Method, r: &mut impl Rng) -> ProgramState {
    let mut env = Env::new();
    let mut heap = Heap::new();
    for (id, a) in m.array_params().enumerate() {
        env = env.with_array(a, id as u32);
        let len = r.gen_range(0..=8);
        heap = heap.with_array(id as u32, (0..len).map(|_| r.gen_range(-3..=3)).collect());
    }
    for x in m.int_params() {
        env = env.with_int(x, r.gen_range(-1..=8));
    }
    ProgramState::new(env, heap)
}

/// Every corpus method, with its file name.
pub fn corpus_methods() -> Vec<(String, Method)> {
    let dir = format!("{}/../../corpus", env!("CARGO_MANIFEST_DIR"));
    let mut files: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let mut out = Vec::new();
    for path in files {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(&path).unwrap();
        let prog = parse_program_file(&name, &text).unwrap_or_else(|e| panic!("{e}"));
        out.extend(prog.methods.into_iter().map(|m| (name.clone(), m)));
    }
    out
}
