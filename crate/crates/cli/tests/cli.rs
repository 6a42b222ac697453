use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use permax::expr::{ArrayVars, BoolExpr, CmpOp, Env, FreeVars, Heap, PermExpr, PermValue};
use permax::frontend::{parse_perm_expr, parse_program_file};
use permax::infer::{infer_method, InferConfig};
use permax::oracle::eval_bool_exact;
use permax_cli::{analyze_source, bench, emit_smtlib, parse_rd, report::FileReport, Options, SmtError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus_files() -> Vec<PathBuf> {
    let mut v: Vec<_> = std::fs::read_dir(root().join("corpus")).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn permax(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_permax")).current_dir(root()).args(args).output().unwrap()
}

#[test]
fn corpus_matches_golden_output() {
    for path in corpus_files() {
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        let text = std::fs::read_to_string(&path).unwrap();
        let out = analyze_source(&format!("corpus/{stem}.arr"), &text, &Options::default());
        assert!(!out.failed(), "{stem}: {:?}", out.report.errors);
        let golden =
            std::fs::read_to_string(format!("{}/tests/golden/{stem}.out", env!("CARGO_MANIFEST_DIR"))).unwrap();
        assert_eq!(out.annotated.unwrap(), golden, "{stem}");
    }
}

#[test]
fn binary_output_is_deterministic() {
    let first = permax(&["analyze", "corpus/copyEven.arr", "corpus/parCopyEven.arr", "corpus/matrixmult.arr"]);
    assert_eq!(first.status.code(), Some(0));
    for jobs in ["1", "4"] {
        let again = permax(&[
            "analyze",
            "--jobs",
            jobs,
            "corpus/copyEven.arr",
            "corpus/parCopyEven.arr",
            "corpus/matrixmult.arr",
        ]);
        assert_eq!(String::from_utf8_lossy(&first.stdout), String::from_utf8_lossy(&again.stdout));
    }
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.starts_with("// corpus/copyEven.arr\n"));
    let golden =
        std::fs::read_to_string(format!("{}/tests/golden/parCopyEven.out", env!("CARGO_MANIFEST_DIR"))).unwrap();
    assert!(text.contains(&format!("// corpus/parCopyEven.arr\n{golden}")));
}

#[test]
fn exit_codes() {
    assert_eq!(permax(&["analyze", "corpus/copyEven.arr"]).status.code(), Some(0));
    let dbl = fixture("doubleExhale.arr");
    assert_eq!(permax(&["analyze", dbl.to_str().unwrap()]).status.code(), Some(2));
    let broken = permax(&["analyze", fixture("broken.arr").to_str().unwrap()]);
    assert_eq!(broken.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&broken.stderr).contains("broken.arr:3:1"));
    assert_eq!(permax(&["analyze", "--rd", "3/2", "corpus/copyEven.arr"]).status.code(), Some(1));
    assert_eq!(permax(&["analyze", "--rd", "zero", "corpus/copyEven.arr"]).status.code(), Some(1));
    assert_eq!(permax(&["analyze", "missing.arr"]).status.code(), Some(1));
    assert_eq!(permax(&["--help"]).status.code(), Some(0));
}

#[test]
fn rd_is_parsed_as_a_fraction_in_the_unit_interval() {
    assert_eq!(parse_rd("1/100").unwrap(), PermValue::frac(1, 100));
    assert_eq!(parse_rd("1").unwrap(), PermValue::one());
    assert!(parse_rd("0").is_err());
    assert!(parse_rd("-1/2").is_err());
    assert!(parse_rd("rd").is_err());
}

#[test]
fn concrete_rd_is_substituted_in_the_output() {
    let out = permax(&["analyze", "--rd", "1/100", "corpus/copyEven.arr"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("ensures ite(a == qa && qi < length(a) && qi >= 0, ite(qi % 2 == 0, 1/100, 1), 0)"),
        "{text}"
    );
    assert!(!text.contains("rd"));
}

#[test]
fn empty_method_needs_nothing() {
    let out = permax(&["analyze", fixture("empty.arr").to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("    requires 0\n    ensures 0\n"), "{text}");
}

#[test]
fn json_report_validates_and_records_soundness_modes() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let out = permax(&[
        "analyze",
        "--emit-json",
        json.to_str().unwrap(),
        "corpus/copyEven.arr",
        "corpus/parCopyEven.arr",
        fixture("broken.arr").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = std::fs::read_to_string(&json).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let schema: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(format!("{}/report.schema.json", env!("CARGO_MANIFEST_DIR"))).unwrap(),
    )
    .unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");

    let reports: Vec<FileReport> = serde_json::from_value(value).unwrap();
    assert_eq!(reports.len(), 3);
    let copy = &reports[0].methods[0];
    assert!(copy.loops[0].exhale_free);
    assert_eq!(copy.loops[0].soundness.mode, "exhale-free");
    let par = &reports[1].methods[0];
    assert!(!par.loops[0].exhale_free);
    assert_eq!(par.loops[0].soundness.mode, "bounded-pass");
    assert_eq!(par.post, "0");
    assert!(reports.iter().flat_map(|r| &r.methods).all(|m| m.timings_ms >= 0.0));
    assert_eq!(reports[2].errors.len(), 1);
}

#[test]
fn schema_rejects_malformed_reports() {
    let schema: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(format!("{}/report.schema.json", env!("CARGO_MANIFEST_DIR"))).unwrap(),
    )
    .unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let good =
        serde_json::to_value(&analyze_source("x.arr", "method m(a: Int[]) { skip }", &Options::default()).report)
            .unwrap();
    assert!(validator.is_valid(&serde_json::Value::Array(vec![good.clone()])));
    assert!(!validator.is_valid(&good));
    let mut bad = good;
    bad["methods"][0]["timings_ms"] = (-1.0).into();
    assert!(!validator.is_valid(&serde_json::Value::Array(vec![bad])));
}

#[test]
fn smt_scripts_are_written_per_loop() {
    let dir = tempfile::tempdir().unwrap();
    let smt = dir.path().join("smt");
    let dbl = fixture("doubleExhale.arr");
    let out =
        permax(&["analyze", "--emit-smt", smt.to_str().unwrap(), "corpus/parCopyEven.arr", dbl.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let mut names: Vec<_> =
        std::fs::read_dir(&smt).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    assert_eq!(names, ["doubleExhale.doubleExhale.loop0.smt2", "parCopyEven.parCopyEven.loop0.smt2"]);
    let script = std::fs::read_to_string(smt.join(&names[1])).unwrap();
    assert!(script.starts_with("; "));
    assert!(script.contains("(set-logic QF_UFLIRA)"));
    assert!(script.trim_end().ends_with("(check-sat)"));
}

#[test]
fn smt_export_edge_cases() {
    let s = emit_smtlib(&BoolExpr::True, &[]).unwrap();
    assert!(s.contains("(assert (not true))"), "{s}");
    let pm = PermExpr::PointwiseMax(vec!["x".into()], Box::new(BoolExpr::True), Box::new(PermExpr::one()));
    let c = BoolExpr::perm_cmp(pm, CmpOp::Ge, PermExpr::zero());
    assert!(matches!(emit_smtlib(&c, &[]), Err(SmtError::PointwiseMax(_))));
}

#[test]
fn bench_covers_every_method_with_stable_sizes() {
    let dir = root().join("corpus");
    let a = bench(&dir, 0, 1, &Options::default()).unwrap();
    let b = bench(&dir, 0, 3, &Options::default()).unwrap();
    let methods: usize = corpus_files()
        .iter()
        .map(|p| parse_program_file("f", &std::fs::read_to_string(p).unwrap()).unwrap().methods.len())
        .sum();
    assert_eq!(a.len(), methods);
    assert_eq!(
        a.iter().map(|r| (&r.program, &r.method, r.nodes)).collect::<Vec<_>>(),
        b.iter().map(|r| (&r.program, &r.method, r.nodes)).collect::<Vec<_>>()
    );
    assert!(a.iter().all(|r| r.time_ms >= 0.0 && r.nodes > 0));

    let out = permax(&["bench", "corpus", "--warmup", "0", "--runs", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), methods + 1);
}

// An evaluator for the fragment of SMT-LIB the exporter produces, so that
// the encoding can be checked against the exact oracle.

#[derive(Clone, Debug)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexps(text: &str) -> Vec<Sexp> {
    let mut tokens = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with(';')) {
        let spaced = line.replace('(', " ( ").replace(')', " ) ");
        tokens.extend(spaced.split_whitespace().map(str::to_string));
    }
    let mut pos = 0;
    let mut out = Vec::new();
    while pos < tokens.len() {
        out.push(parse_one(&tokens, &mut pos));
    }
    out
}

fn parse_one(t: &[String], pos: &mut usize) -> Sexp {
    let tok = &t[*pos];
    *pos += 1;
    if tok != "(" {
        return Sexp::Atom(tok.clone());
    }
    let mut items = Vec::new();
    while t[*pos] != ")" {
        items.push(parse_one(t, pos));
    }
    *pos += 1;
    Sexp::List(items)
}

#[derive(Clone, Debug, PartialEq)]
enum Val {
    Bool(bool),
    Num(BigRational),
    Arr(u32),
}

struct Model<'a> {
    consts: HashMap<String, Val>,
    heap: &'a Heap,
}

impl Model<'_> {
    fn num(&self, s: &Sexp) -> BigRational {
        match self.eval(s) {
            Val::Num(n) => n,
            v => panic!("expected number, got {v:?}"),
        }
    }

    fn boolean(&self, s: &Sexp) -> bool {
        match self.eval(s) {
            Val::Bool(b) => b,
            v => panic!("expected bool, got {v:?}"),
        }
    }

    fn eval(&self, s: &Sexp) -> Val {
        let items = match s {
            Sexp::Atom(a) => {
                return match a.as_str() {
                    "true" => Val::Bool(true),
                    "false" => Val::Bool(false),
                    _ => match self.consts.get(a) {
                        Some(v) => v.clone(),
                        None => Val::Num(decimal(a)),
                    },
                }
            }
            Sexp::List(items) => items,
        };
        let Sexp::Atom(head) = &items[0] else { panic!("bad head in {s:?}") };
        let args = &items[1..];
        let nums = || args.iter().map(|a| self.num(a)).collect::<Vec<_>>();
        match head.as_str() {
            "+" => Val::Num(nums().into_iter().fold(BigRational::zero(), |a, b| a + b)),
            "*" => Val::Num(nums().into_iter().fold(BigRational::one(), |a, b| a * b)),
            "-" if args.len() == 1 => Val::Num(-self.num(&args[0])),
            "-" => Val::Num(self.num(&args[0]) - self.num(&args[1])),
            "/" => Val::Num(self.num(&args[0]) / self.num(&args[1])),
            "div" | "mod" => {
                let (a, b) = (self.num(&args[0]), self.num(&args[1]));
                assert!(b.is_positive());
                let q = (a.clone() / b.clone()).floor();
                Val::Num(if head == "div" { q } else { a - b * q })
            }
            "ite" => {
                if self.boolean(&args[0]) {
                    self.eval(&args[1])
                } else {
                    self.eval(&args[2])
                }
            }
            "and" => Val::Bool(args.iter().all(|a| self.boolean(a))),
            "or" => Val::Bool(args.iter().any(|a| self.boolean(a))),
            "not" => Val::Bool(!self.boolean(&args[0])),
            "=" => Val::Bool(self.eval(&args[0]) == self.eval(&args[1])),
            "<" => Val::Bool(self.num(&args[0]) < self.num(&args[1])),
            "<=" => Val::Bool(self.num(&args[0]) <= self.num(&args[1])),
            ">" => Val::Bool(self.num(&args[0]) > self.num(&args[1])),
            ">=" => Val::Bool(self.num(&args[0]) >= self.num(&args[1])),
            "len" => {
                let Val::Arr(id) = self.eval(&args[0]) else { panic!() };
                Val::Num(int(self.heap.len(id)))
            }
            "heap" => {
                let Val::Arr(id) = self.eval(&args[0]) else { panic!() };
                let i = self.num(&args[1]);
                let i: i64 = i.to_integer().try_into().unwrap();
                // Outside the bounds the solver may pick anything; states
                // reading there are filtered out before evaluation.
                Val::Num(int(self.heap.get(id, i).expect("in bounds")))
            }
            _ => panic!("unknown operator {head}"),
        }
    }
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn decimal(s: &str) -> BigRational {
    match s.split_once('.') {
        Some((w, f)) => {
            let scale = BigInt::from(10).pow(f.len() as u32);
            BigRational::new(w.parse::<BigInt>().unwrap() * &scale + f.parse::<BigInt>().unwrap(), scale)
        }
        None => BigRational::from_integer(s.parse().unwrap_or_else(|_| panic!("unbound constant {s}"))),
    }
}

/// Runs `script` in the model given by `env` and `heap`: binds the declared
/// constants, evaluates the definitions in order, and returns the value of
/// the body of the final negated assertion.
fn run_script(script: &str, env: &Env, heap: &Heap) -> bool {
    let mut m = Model { consts: HashMap::new(), heap };
    let cmds = parse_sexps(script);
    let mut body = None;
    for c in &cmds {
        let Sexp::List(items) = c else { panic!() };
        let Sexp::Atom(cmd) = &items[0] else { panic!() };
        match cmd.as_str() {
            "declare-const" => {
                let Sexp::Atom(name) = &items[1] else { panic!() };
                let Sexp::Atom(sort) = &items[2] else { panic!() };
                if sort == "Arr" {
                    m.consts.insert(name.clone(), Val::Arr(env.array(&name[2..]).unwrap()));
                } else if let Some(x) = name.strip_prefix("i_") {
                    m.consts.insert(name.clone(), Val::Num(int(env.int(x).unwrap())));
                }
            }
            "assert" => {
                let f = &items[1];
                if let Sexp::List(inner) = f {
                    match &inner[0] {
                        Sexp::Atom(op) if op == "=" => {
                            if let Sexp::Atom(lhs) = &inner[1] {
                                if !m.consts.contains_key(lhs) {
                                    let v = m.eval(&inner[2]);
                                    m.consts.insert(lhs.clone(), v);
                                    continue;
                                }
                            }
                        }
                        Sexp::Atom(op) if op == "not" => {
                            body = Some(inner[1].clone());
                            continue;
                        }
                        _ => {}
                    }
                }
                assert!(m.boolean(f), "side condition fails: {f:?}");
            }
            _ => {}
        }
    }
    m.boolean(&body.expect("negated assertion"))
}

fn random_model(c: &BoolExpr, r: &mut impl Rng) -> (Env, Heap) {
    let mut env = Env::new();
    let mut heap = Heap::new();
    for id in 0..3u32 {
        let len = r.gen_range(0..=4);
        heap = heap.with_array(id, (0..len).map(|_| r.gen_range(-2..=4)).collect());
    }
    for a in c.array_vars() {
        env = env.with_array(&a, r.gen_range(0..3));
    }
    for x in c.free_vars() {
        env = env.with_int(&x, r.gen_range(-2..=6));
    }
    (env, heap)
}

/// Compares the script's verdict with the exact evaluator on random models
/// where the condition is defined; returns how many models were compared.
fn agree(c: &BoolExpr, models: usize, r: &mut impl Rng) -> usize {
    let script = emit_smtlib(c, &["test".into()]).unwrap();
    let mut compared = 0;
    for _ in 0..models {
        let (env, heap) = random_model(c, r);
        let Ok(expected) = eval_bool_exact(c, &env, &heap) else { continue };
        assert_eq!(run_script(&script, &env, &heap), expected, "{c}\n{env:?}\n{script}");
        compared += 1;
    }
    compared
}

#[test]
fn smt_encoding_agrees_with_exact_evaluation_on_soundness_conditions() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let mut files = corpus_files();
    files.push(fixture("doubleExhale.arr"));
    let mut conditions = 0;
    for path in files {
        let prog = parse_program_file("f", &std::fs::read_to_string(&path).unwrap()).unwrap();
        for m in &prog.methods {
            let spec = infer_method(m, &InferConfig::default()).unwrap();
            for c in spec.loops.iter().filter_map(|l| l.condition.as_ref()) {
                conditions += 1;
                assert!(agree(c, 60, &mut r) > 0, "{c}");
            }
        }
    }
    assert!(conditions >= 2);
}

#[test]
fn smt_encoding_agrees_with_exact_evaluation_on_random_comparisons() {
    const PERMS: &[&str] = &[
        "rd",
        "1/2",
        "1 - rd",
        "1/3 + rd",
        "ite(x > y, rd, 1/3)",
        "max(rd, 1/4)",
        "min(1/2 - rd, rd + rd)",
        "max(ite(a == b, 1, 0), min(rd, 2/3))",
        "ite(a[0] > x, 1, rd) - rd",
        "0",
        "max(max(rd, 0), ite(length(a) > x, 1/2, 0))",
        "-1/5",
    ];
    let ops = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let mut compared = 0;
    for _ in 0..300 {
        let p = |r: &mut ChaCha8Rng| parse_perm_expr(PERMS[r.gen_range(0..PERMS.len())], &["a", "b"]).unwrap();
        let (lhs, rhs) = (p(&mut r), p(&mut r));
        let c = BoolExpr::perm_cmp(lhs, ops[r.gen_range(0..6)], rhs);
        compared += agree(&c, 5, &mut r);
    }
    assert!(compared > 1000, "{compared}");
}
