//! Batch driver for the permission inference: annotated sources, JSON
//! reports, SMT-LIB obligations and corpus timings.

pub mod report;
pub mod smt;

use permax::expr::{PermExpr, PermValue};
use permax::frontend::{parse_perm_expr, parse_program_file, Program};
use permax::infer::{infer_method, InferConfig, MethodSpec, SoundnessCheck};
use permax::maxelim::ElimConfig;
use permax::oracle::ValidityConfig;
use report::{FileReport, LoopJson, MethodReport, SoundnessJson};
use std::path::Path;
use std::time::{Duration, Instant};

pub use smt::{emit_smtlib, SmtError};

/// Everything an `analyze` run can be configured with.
#[derive(Clone, Debug)]
pub struct Options {
    /// Concrete value substituted for `rd` in the printed specifications.
    pub rd: Option<PermValue>,
    pub window: (i64, i64),
    pub filter_budget: usize,
    pub intervals: bool,
}

impl Default for Options {
    fn default() -> Self {
        let v = ValidityConfig::default();
        Options { rd: None, window: (v.lo, v.hi), filter_budget: ElimConfig::default().filter_budget, intervals: true }
    }
}

impl Options {
    pub fn infer_config(&self) -> InferConfig {
        let (lo, hi) = self.window;
        InferConfig {
            elim: ElimConfig { filter_budget: self.filter_budget, ..ElimConfig::default() },
            soundness: SoundnessCheck::Bounded(ValidityConfig { lo, hi, ..ValidityConfig::default() }),
            intervals: self.intervals,
        }
    }

    fn show(&self, p: &PermExpr) -> PermExpr {
        match &self.rd {
            Some(v) => p.concretize_rd(&v.c),
            None => p.clone(),
        }
    }
}

/// Parse a concrete read amount such as `1/100`; it must lie in `(0, 1]`.
pub fn parse_rd(s: &str) -> Result<PermValue, String> {
    let v = parse_perm_expr(s, &[])
        .ok()
        .and_then(|p| p.const_value())
        .filter(|v| v.k == 0)
        .ok_or_else(|| format!("`{s}` is not a rational number"))?;
    if !v.is_positive() || v > PermValue::one() {
        return Err(format!("`{s}` is not in (0, 1]"));
    }
    Ok(v)
}

/// The result of analysing one source file.
#[derive(Clone, Debug)]
pub struct FileOutcome {
    pub report: FileReport,
    /// The program with `requires` / `ensures` clauses, if it parsed.
    pub annotated: Option<String>,
    /// `(file name, script)` per exported soundness condition.
    pub smt: Vec<(String, String)>,
}

impl FileOutcome {
    pub fn failed(&self) -> bool {
        !self.report.errors.is_empty()
    }

    pub fn unsatisfiable(&self) -> bool {
        self.report.methods.iter().any(|m| m.unsatisfiable)
    }
}

pub fn analyze_source(file: &str, text: &str, opts: &Options) -> FileOutcome {
    let mut report = FileReport { file: file.to_string(), methods: Vec::new(), errors: Vec::new() };
    let mut prog: Program = match parse_program_file(file, text) {
        Ok(p) => p,
        Err(e) => {
            report.errors.push(e.to_string());
            return FileOutcome { report, annotated: None, smt: Vec::new() };
        }
    };
    let cfg = opts.infer_config();
    let stem = Path::new(file).file_stem().map_or("program".into(), |s| s.to_string_lossy().into_owned());
    let mut smt = Vec::new();
    for m in &mut prog.methods {
        let t = Instant::now();
        let spec = match infer_method(m, &cfg) {
            Ok(s) => s,
            Err(e) => {
                report.errors.push(format!("{}: {e}", m.name));
                continue;
            }
        };
        let elapsed = t.elapsed();
        for (k, l) in spec.loops.iter().enumerate() {
            let Some(c) = &l.condition else { continue };
            let header = vec![
                format!("{file}: method {}, loop at {}", m.name, l.span),
                "unsat means the condition is valid".into(),
            ];
            match emit_smtlib(c, &header) {
                Ok(s) => smt.push((format!("{stem}.{}.loop{k}.smt2", m.name), s)),
                Err(e) => report.errors.push(format!("{}: {e}", m.name)),
            }
        }
        m.requires = Some(opts.show(&spec.precondition));
        m.ensures = Some(opts.show(&spec.postcondition));
        report.methods.push(method_report(&spec, opts, elapsed));
    }
    FileOutcome { report, annotated: Some(prog.to_string()), smt }
}

pub fn analyze_file(path: &Path, opts: &Options) -> FileOutcome {
    let file = path.display().to_string();
    match std::fs::read_to_string(path) {
        Ok(text) => analyze_source(&file, &text, opts),
        Err(e) => FileOutcome {
            report: FileReport { file: file.clone(), methods: Vec::new(), errors: vec![format!("{file}: {e}")] },
            annotated: None,
            smt: Vec::new(),
        },
    }
}

fn method_report(spec: &MethodSpec, opts: &Options, elapsed: Duration) -> MethodReport {
    MethodReport {
        name: spec.name.clone(),
        pre: opts.show(&spec.precondition).to_string(),
        post: opts.show(&spec.postcondition).to_string(),
        loops: spec
            .loops
            .iter()
            .map(|l| LoopJson {
                span: l.span.to_string(),
                invariant_used: l.over_inv.to_string(),
                under_invariant_used: l.under_inv.to_string(),
                exhale_free: l.exhale_free,
                counter_added: l.counter_added,
                soundness: SoundnessJson { mode: l.soundness.mode().into(), detail: l.soundness.detail() },
            })
            .collect(),
        timings_ms: elapsed.as_secs_f64() * 1e3,
        unsatisfiable: spec.unsatisfiable,
        unverified: spec.unverified.iter().map(|p| p.to_string()).collect(),
        extensions: spec.extensions.clone(),
    }
}

/// One row of the `bench` table.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub program: String,
    pub method: String,
    /// Median over the timed runs.
    pub time_ms: f64,
    /// Size of the precondition plus the postcondition.
    pub nodes: usize,
}

/// Time every method of every `.arr` file in `dir`, sorted by name, after
/// `warmup` untimed runs of each.
pub fn bench(dir: &Path, warmup: usize, runs: usize, opts: &Options) -> Result<Vec<BenchRow>, String> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "arr"))
        .collect();
    files.sort();
    let cfg = opts.infer_config();
    let mut rows = Vec::new();
    for path in files {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{name}: {e}"))?;
        let prog = parse_program_file(&name, &text).map_err(|e| e.to_string())?;
        for m in &prog.methods {
            let run = || infer_method(m, &cfg).map_err(|e| format!("{name}: {}: {e}", m.name));
            for _ in 0..warmup {
                run()?;
            }
            let mut times = Vec::with_capacity(runs.max(1));
            let mut nodes = 0;
            for _ in 0..runs.max(1) {
                let t = Instant::now();
                let spec = run()?;
                times.push(t.elapsed().as_secs_f64() * 1e3);
                nodes = spec.precondition.size() + spec.postcondition.size();
            }
            times.sort_by(f64::total_cmp);
            rows.push(BenchRow {
                program: name.clone(),
                method: m.name.clone(),
                time_ms: times[times.len() / 2],
                nodes,
            });
        }
    }
    Ok(rows)
}

pub fn bench_table(rows: &[BenchRow]) -> String {
    let mut out = format!("{:<22} {:<16} {:>10} {:>7}\n", "program", "method", "time_ms", "nodes");
    for r in rows {
        out.push_str(&format!("{:<22} {:<16} {:>10.3} {:>7}\n", r.program, r.method, r.time_ms, r.nodes));
    }
    out
}
