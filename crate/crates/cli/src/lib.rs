//! Command implementations for the `eqthink` binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use eqthink::admissibility::{AdmissibilityReport, Verdict};
use eqthink::circuits::{
    check_adder, exhaustive_equiv, formula_to_circuit, formulas_to_circuit, ripple_carry, simulate, to_basis, Basis,
    Equivalence, Netlist,
};
use eqthink::cost::{check_bound, measure_steps, BoundVerdict, Growth, InputKind, DEFAULT_WINDOW};
use eqthink::mapreduce::{
    invert_links, job_grep, job_wordcount, jobs_env, json_to_value, pagerank, pairs_from_json, pairs_to_json,
    parse_damping, value_to_json,
};
use eqthink::prover::ProofOutcome;
use eqthink::syntax::{parse_term, Term};
use eqthink::workbench::{Item, Workbench};
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value as Json};

#[derive(Debug, Parser)]
#[command(name = "eqthink", version, about = "Equational reasoning workbench")]
pub struct Cli {
    /// Print a JSON run report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check admissibility of every definition in a file.
    Check { file: PathBuf },
    /// Evaluate a ground expression.
    Eval {
        file: Option<PathBuf>,
        #[arg(short = 'e', long = "expr")]
        expr: String,
    },
    /// Run the properties in a file.
    Test {
        file: PathBuf,
        #[arg(long, env = "EQTHINK_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trials: Option<u32>,
    },
    /// Check the proofs in a file.
    Prove { file: PathBuf },
    /// Count evaluation steps of a one-argument list operator.
    Steps {
        op: String,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Use reverse-sorted inputs instead of random ones.
        #[arg(long)]
        worst_case: bool,
        #[arg(long, default_value = "corpus/defs/sorting.lx")]
        file: PathBuf,
        /// n, nlogn or n2; all three when omitted.
        #[arg(long)]
        candidate: Option<String>,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: f64,
        #[arg(long, env = "EQTHINK_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Boolean circuits.
    #[command(subcommand)]
    Circuit(CircuitCmd),
    /// Run a MapReduce job over a JSON array of [key, value] pairs.
    Mr {
        job: MrJob,
        input: PathBuf,
        #[arg(long, default_value_t = 50)]
        iterations: u32,
        #[arg(long, default_value = "0.85")]
        damping: String,
        /// Word to search for (grep only).
        #[arg(long)]
        pattern: Option<String>,
    },
    /// Check a corpus directory against its golden reports.
    Ci {
        dir: PathBuf,
        #[arg(long, env = "EQTHINK_SEED", default_value_t = 0)]
        seed: u64,
        /// Rewrite the golden reports instead of comparing.
        #[arg(long)]
        bless: bool,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum CircuitCmd {
    /// Compile a Boolean formula to a netlist.
    Build {
        formula: String,
        #[arg(long)]
        dot: bool,
    },
    /// Simulate a netlist on one assignment, given as name=0|1.
    Sim {
        circuit: String,
        #[arg(value_parser = parse_assignment)]
        assign: Vec<(String, bool)>,
    },
    /// Compare two circuits on every assignment.
    Equiv { a: String, b: String },
    /// Rewrite a circuit into a single-connective basis.
    Basis {
        circuit: String,
        #[arg(long, value_enum)]
        to: BasisArg,
        #[arg(long)]
        dot: bool,
    },
    /// Emit an n-bit ripple-carry adder.
    Adder {
        width: usize,
        /// Check it against integer addition on every input.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        dot: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BasisArg {
    Nand,
    Impl,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MrJob {
    Wordcount,
    Grep,
    InvertLinks,
    Pagerank,
}

fn parse_assignment(s: &str) -> Result<(String, bool), String> {
    let (name, v) = s.split_once('=').ok_or("expected name=0 or name=1")?;
    let v = match v {
        "0" | "nil" | "false" => false,
        "1" | "t" | "true" => true,
        _ => return Err(format!("bad value `{v}`")),
    };
    Ok((name.to_string(), v))
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportItem {
    pub name: String,
    pub kind: String,
    pub ok: bool,
    pub detail: Json,
    #[serde(skip)]
    pub line: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub inputs: Vec<String>,
    pub seed: Option<u64>,
    pub items: Vec<ReportItem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub exit_code: i32,
}

/// What a command produced: a report plus any text printed before the
/// item lines (netlists, CSV, values).
#[derive(Debug, Clone)]
pub struct Output {
    pub report: RunReport,
    pub body: String,
    pub summary: String,
}

impl Output {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
            s.push('\n');
            return s;
        }
        let mut s = self.body.clone();
        for it in &self.report.items {
            if !it.line.is_empty() {
                s.push_str(&it.line);
                s.push('\n');
            }
        }
        if let Some(e) = &self.report.error {
            s.push_str(&format!("error: {e}\n"));
        }
        if !self.summary.is_empty() {
            s.push_str(&self.summary);
            s.push('\n');
        }
        s
    }
}

/// A usage or input error: exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type Res<T> = Result<T, UsageError>;

struct Builder {
    command: String,
    inputs: Vec<String>,
    seed: Option<u64>,
    items: Vec<ReportItem>,
    body: String,
    summary: String,
}

impl Builder {
    fn new(command: &str, inputs: Vec<String>, seed: Option<u64>) -> Self {
        Builder {
            command: command.into(),
            inputs,
            seed,
            items: Vec::new(),
            body: String::new(),
            summary: String::new(),
        }
    }

    fn item(&mut self, name: &str, kind: &str, ok: bool, detail: Json, line: String) {
        self.items.push(ReportItem { name: name.into(), kind: kind.into(), ok, detail, line });
    }

    fn finish(self) -> Output {
        let code = if self.items.iter().all(|i| i.ok) { 0 } else { 1 };
        Output {
            report: RunReport {
                schema: 1,
                command: self.command,
                inputs: self.inputs,
                seed: self.seed,
                items: self.items,
                error: None,
                exit_code: code,
            },
            body: self.body,
            summary: self.summary,
        }
    }
}

/// Runs a parsed command. Input and parse errors come back as an output
/// with exit code 2.
pub fn run(cli: &Cli) -> Output {
    let (name, inputs, seed) = describe(&cli.command);
    match dispatch(&cli.command) {
        Ok(out) => out,
        Err(UsageError(e)) => Output {
            report: RunReport {
                schema: 1,
                command: name.into(),
                inputs,
                seed,
                items: Vec::new(),
                error: Some(e),
                exit_code: 2,
            },
            body: String::new(),
            summary: String::new(),
        },
    }
}

fn show(p: &Path) -> String {
    p.display().to_string()
}

fn describe(c: &Command) -> (&'static str, Vec<String>, Option<u64>) {
    match c {
        Command::Check { file } => ("check", vec![show(file)], None),
        Command::Eval { file, expr } => ("eval", file.iter().map(|f| show(f)).chain([expr.clone()]).collect(), None),
        Command::Test { file, seed, .. } => ("test", vec![show(file)], Some(*seed)),
        Command::Prove { file } => ("prove", vec![show(file)], None),
        Command::Steps { op, file, seed, .. } => ("steps", vec![op.clone(), show(file)], Some(*seed)),
        Command::Circuit(c) => match c {
            CircuitCmd::Build { formula, .. } => ("circuit build", vec![formula.clone()], None),
            CircuitCmd::Sim { circuit, .. } => ("circuit sim", vec![circuit.clone()], None),
            CircuitCmd::Equiv { a, b } => ("circuit equiv", vec![a.clone(), b.clone()], None),
            CircuitCmd::Basis { circuit, .. } => ("circuit basis", vec![circuit.clone()], None),
            CircuitCmd::Adder { width, .. } => ("circuit adder", vec![width.to_string()], None),
        },
        Command::Mr { input, .. } => ("mr", vec![show(input)], None),
        Command::Ci { dir, seed, .. } => ("ci", vec![show(dir)], Some(*seed)),
    }
}

fn dispatch(c: &Command) -> Res<Output> {
    match c {
        Command::Check { file } => check(file),
        Command::Eval { file, expr } => eval(file.as_deref(), expr),
        Command::Test { file, seed, trials } => test(file, *seed, *trials),
        Command::Prove { file } => prove(file),
        Command::Steps { op, sizes, worst_case, file, candidate, window, seed } => {
            steps(op, sizes, *worst_case, file, candidate.as_deref(), *window, *seed)
        }
        Command::Circuit(cmd) => circuit(cmd),
        Command::Mr { job, input, iterations, damping, pattern } => {
            mr(*job, input, *iterations, damping, pattern.as_deref())
        }
        Command::Ci { dir, seed, bless } => ci(dir, *seed, *bless),
    }
}

fn load(file: &Path) -> Res<Workbench> {
    let mut w = Workbench::new();
    w.load_file(file)?;
    Ok(w)
}

fn verdicts(r: &AdmissibilityReport) -> String {
    let v = |v: Verdict| match v {
        Verdict::Proved => "proved",
        Verdict::TestedOnly => "tested",
        Verdict::Failed => "FAILED",
    };
    format!("consistent {}, comprehensive {}, constructive {}", v(r.consistent), v(r.comprehensive), v(r.constructive))
}

fn witness_text<V: std::fmt::Display>(w: &BTreeMap<String, V>) -> String {
    w.iter().map(|(k, v)| format!("{k} = {v}")).collect::<Vec<_>>().join(", ")
}

fn outcome_text(o: &ProofOutcome) -> String {
    match o {
        ProofOutcome::Accepted => "Accepted".into(),
        ProofOutcome::RejectedAt { case, step, reason } => format!("Rejected in {case} at step {step}: {reason}"),
    }
}

fn item_line(it: &Item) -> String {
    match it {
        Item::Definition { report, .. } => {
            let mut s =
                format!("{} {}: {}", if report.admitted() { "ok  " } else { "FAIL" }, report.name, verdicts(report));
            for d in &report.diagnostics {
                s.push_str(&format!("\n       {} {}: {}", d.check, d.subject, d.message));
                if let Some(w) = &d.witness {
                    s.push_str(&format!("\n       witness: {}", witness_text(w)));
                }
            }
            s
        }
        Item::Defun { name, error, .. } => match error {
            None => format!("ok   {name}: trusted"),
            Some(e) => format!("FAIL {name}: {e}"),
        },
        Item::Property { name, .. } => format!("     {name}: property"),
        Item::Proof { name, outcome, .. } => {
            format!("{} {name}: {}", if outcome.accepted() { "ok  " } else { "FAIL" }, outcome_text(outcome))
        }
    }
}

fn kind(it: &Item) -> &'static str {
    match it {
        Item::Definition { .. } => "definition",
        Item::Defun { .. } => "defun",
        Item::Property { .. } => "property",
        Item::Proof { .. } => "proof",
    }
}

fn push_items(b: &mut Builder, w: &Workbench, keep: impl Fn(&Item) -> bool) {
    for it in w.items.iter().filter(|i| keep(i)) {
        let detail = serde_json::to_value(it).expect("item serializes");
        b.item(it.name(), kind(it), it.ok(), detail, item_line(it));
    }
}

fn check(file: &Path) -> Res<Output> {
    let w = load(file)?;
    let mut b = Builder::new("check", vec![show(file)], None);
    push_items(&mut b, &w, |i| matches!(i, Item::Definition { .. } | Item::Defun { .. }));
    let bad = b.items.iter().filter(|i| !i.ok).count();
    b.summary = match bad {
        0 => format!("{} definitions admitted", b.items.len()),
        n => format!("{n} of {} definitions rejected", b.items.len()),
    };
    Ok(b.finish())
}

fn eval(file: Option<&Path>, expr: &str) -> Res<Output> {
    let w = match file {
        Some(f) => load(f)?,
        None => Workbench::new(),
    };
    let t = parse_term(expr)?;
    let mut b = Builder::new("eval", file.iter().map(|f| show(f)).chain([expr.to_string()]).collect(), None);
    match eqthink::eval::eval_ground(&t, &w.env) {
        Ok(v) => b.item(expr, "value", true, json!({ "value": v.to_string() }), v.to_string()),
        Err(e) => b.item(expr, "value", false, json!({ "error": e.to_string() }), format!("error: {e}")),
    }
    Ok(b.finish())
}

fn test(file: &Path, seed: u64, trials: Option<u32>) -> Res<Output> {
    let w = load(file)?;
    let mut b = Builder::new("test", vec![show(file)], Some(seed));
    for (name, r) in w.run_properties(seed, trials) {
        match r {
            Ok(o) => {
                let line = match &o {
                    eqthink::testing::TestOutcome::Pass { trials, vacuous } => {
                        format!("ok   {name}: {trials} trials ({vacuous} vacuous)")
                    }
                    eqthink::testing::TestOutcome::Counterexample { bindings, trial_index, .. } => {
                        format!("FAIL {name}: counterexample at trial {trial_index}: {}", witness_text(bindings))
                    }
                };
                let detail = serde_json::to_value(&o).expect("outcome serializes");
                b.item(&name, "property", o.passed(), detail, line);
            }
            Err(e) => {
                let detail = json!({ "error": e.error.to_string(), "trial_index": e.trial_index,
                    "bindings": serde_json::to_value(&e.bindings).expect("bindings serialize") });
                b.item(&name, "property", false, detail, format!("FAIL {name}: {e}"));
            }
        }
    }
    let bad = b.items.iter().filter(|i| !i.ok).count();
    b.summary = match bad {
        0 => format!("{} properties passed", b.items.len()),
        n => format!("{n} of {} properties failed", b.items.len()),
    };
    Ok(b.finish())
}

fn prove(file: &Path) -> Res<Output> {
    let w = load(file)?;
    let mut b = Builder::new("prove", vec![show(file)], None);
    push_items(&mut b, &w, |i| matches!(i, Item::Proof { .. }));
    let bad = b.items.iter().filter(|i| !i.ok).count();
    b.summary = match bad {
        0 => format!("{} proofs accepted", b.items.len()),
        n => format!("{n} of {} proofs rejected", b.items.len()),
    };
    Ok(b.finish())
}

fn steps(
    op: &str,
    sizes: &[usize],
    worst_case: bool,
    file: &Path,
    candidate: Option<&str>,
    window: f64,
    seed: u64,
) -> Res<Output> {
    let w = load(file)?;
    if w.env.arity(op) != Some(1) {
        return Err(UsageError(format!("`{op}` is not a defined one-argument operator")));
    }
    let candidates = match candidate {
        Some(c) => {
            vec![(c.to_string(), Growth::parse(c).ok_or_else(|| UsageError(format!("unknown candidate `{c}`")))?)]
        }
        None => vec![("n".into(), Growth::Linear), ("nlogn".into(), Growth::NLogN), ("n2".into(), Growth::Quadratic)],
    };
    let kind = if worst_case { InputKind::ReverseSorted } else { InputKind::Random };
    let counts = measure_steps(&w.env, op, kind, sizes, seed).map_err(|e| UsageError(e.to_string()))?;
    let m: Vec<(usize, u64)> = counts.iter().map(|(&n, c)| (n, c.total)).collect();
    let mut b = Builder::new("steps", vec![op.to_string(), show(file)], Some(seed));
    b.body.push_str("size,steps,candidate,c\n");
    let mut verdicts = Vec::new();
    for (name, g) in &candidates {
        let r = check_bound(&m, name, |n| g.eval(n), window)?;
        for (i, (&n, &s)) in r.sizes.iter().zip(&r.steps).enumerate() {
            b.body.push_str(&format!("{n},{s},{name},{:.6}\n", r.ratios[i]));
        }
        let v = match r.verdict {
            BoundVerdict::Consistent => "consistent",
            BoundVerdict::Inconsistent => "inconsistent",
        };
        verdicts.push(format!("verdict {name}: {v} (c in [{:.4}, {:.4}], window {window})", r.c_lo, r.c_hi));
        // Only a bound the user asked about can fail the run.
        let ok = candidate.is_none() || r.verdict == BoundVerdict::Consistent;
        b.item(name, "bound", ok, serde_json::to_value(&r).expect("bound serializes"), String::new());
    }
    b.summary = verdicts.join("\n");
    Ok(b.finish())
}

enum CircuitArg {
    Netlist(Netlist),
    Formula(Term),
}

/// A circuit argument is a netlist JSON file when such a file exists,
/// otherwise a formula.
fn read_arg(arg: &str) -> Res<CircuitArg> {
    let p = Path::new(arg);
    if p.is_file() {
        let text = std::fs::read_to_string(p)?;
        return Ok(CircuitArg::Netlist(Netlist::from_json(&text)?));
    }
    Ok(CircuitArg::Formula(parse_term(arg)?))
}

fn read_circuit(arg: &str) -> Res<Netlist> {
    match read_arg(arg)? {
        CircuitArg::Netlist(n) => Ok(n),
        CircuitArg::Formula(f) => Ok(formula_to_circuit(&f)?),
    }
}

/// Formulas are compiled over the other side's ports, or over the union of
/// both formulas' variables.
fn read_pair(a: &str, b: &str) -> Res<(Netlist, Netlist)> {
    let one = |inputs: &[String], f: &Term| formulas_to_circuit(inputs.to_vec(), &[("out".into(), f.clone())]);
    Ok(match (read_arg(a)?, read_arg(b)?) {
        (CircuitArg::Netlist(x), CircuitArg::Netlist(y)) => (x, y),
        (CircuitArg::Netlist(x), CircuitArg::Formula(f)) => {
            let y = one(&x.inputs, &f)?;
            (x, y)
        }
        (CircuitArg::Formula(f), CircuitArg::Netlist(y)) => (one(&y.inputs, &f)?, y),
        (CircuitArg::Formula(f), CircuitArg::Formula(g)) => {
            let vars: Vec<String> = f.free_vars().union(&g.free_vars()).cloned().collect();
            (one(&vars, &f)?, one(&vars, &g)?)
        }
    })
}

fn emit_netlist(b: &mut Builder, n: &Netlist, dot: bool) {
    b.body.push_str(&if dot { n.to_dot() } else { n.to_json() });
    if !b.body.ends_with('\n') {
        b.body.push('\n');
    }
}

fn circuit(cmd: &CircuitCmd) -> Res<Output> {
    let (name, inputs, _) = describe(&Command::Circuit(cmd.clone()));
    let mut b = Builder::new(name, inputs, None);
    match cmd {
        CircuitCmd::Build { formula, dot } => {
            let n = formula_to_circuit(&parse_term(formula)?)?;
            emit_netlist(&mut b, &n, *dot);
            b.item("netlist", "circuit", true, serde_json::to_value(&n)?, String::new());
        }
        CircuitCmd::Sim { circuit, assign } => {
            let n = read_circuit(circuit)?;
            let a: BTreeMap<String, bool> = assign.iter().cloned().collect();
            let outs = simulate(&n, &a)?;
            for ((name, _), v) in n.outputs.iter().zip(outs) {
                b.item(name, "output", true, json!({ "value": v }), format!("{name} = {}", v as u8));
            }
        }
        CircuitCmd::Equiv { a, b: other } => {
            let (x, y) = read_pair(a, other)?;
            let e = exhaustive_equiv(&x, &y)?;
            let line = match &e {
                Equivalence::Equivalent => "Equivalent".to_string(),
                Equivalence::Differ(w) => format!(
                    "Differ at {}",
                    w.iter().map(|(k, v)| format!("{k} = {}", *v as u8)).collect::<Vec<_>>().join(", ")
                ),
            };
            b.item("equiv", "equivalence", e == Equivalence::Equivalent, serde_json::to_value(&e)?, line);
        }
        CircuitCmd::Basis { circuit, to, dot } => {
            let n = read_circuit(circuit)?;
            let basis = match to {
                BasisArg::Nand => Basis::Nand,
                BasisArg::Impl => Basis::Impl,
            };
            let m = to_basis(&n, basis);
            emit_netlist(&mut b, &m, *dot);
            let pure = m.gates.iter().all(|g| basis.allows(g.kind));
            let same = exhaustive_equiv(&n, &m)? == Equivalence::Equivalent;
            b.item(
                "basis",
                "circuit",
                pure && same,
                json!({ "netlist": m, "gates": m.gate_count(), "equivalent": same, "pure": pure }),
                String::new(),
            );
        }
        CircuitCmd::Adder { width, verify, dot } => {
            let n = ripple_carry(*width)?;
            if *verify {
                let r = check_adder(*width)?;
                let line = match r {
                    None => format!("adder({width}) agrees with addition on all {} inputs", 1u64 << (2 * width + 1)),
                    Some((x, y, c)) => format!("adder({width}) is wrong at x = {x}, y = {y}, cin = {}", c as u8),
                };
                let detail = json!({ "width": width, "counterexample": r.map(|(x, y, c)| json!([x, y, c])) });
                b.item("adder", "verification", r.is_none(), detail, line);
            } else {
                emit_netlist(&mut b, &n, *dot);
                b.item("adder", "circuit", true, serde_json::to_value(&n)?, String::new());
            }
        }
    }
    Ok(b.finish())
}

fn mr(job: MrJob, input: &Path, iterations: u32, damping: &str, pattern: Option<&str>) -> Res<Output> {
    let text = std::fs::read_to_string(input).map_err(|e| UsageError(format!("{}: {e}", show(input))))?;
    let j: Json = serde_json::from_str(&text)?;
    let pairs = pairs_from_json(&j)?;
    let env = jobs_env();
    let mut b = Builder::new("mr", vec![show(input)], None);
    let out = match job {
        MrJob::Wordcount => pairs_to_json(&job_wordcount(&pairs, &env)?),
        MrJob::Grep => {
            let p = pattern.ok_or_else(|| UsageError("grep needs --pattern".into()))?;
            pairs_to_json(&job_grep(&json_to_value(&Json::String(p.into()))?, &pairs, &env)?)
        }
        MrJob::InvertLinks => pairs_to_json(&invert_links(&pairs, &env)?),
        MrJob::Pagerank => {
            let d = parse_damping(damping)?;
            let graph = pairs
                .into_iter()
                .map(|(k, v)| {
                    v.to_vec()
                        .map(|ts| (k.clone(), ts))
                        .ok_or_else(|| UsageError(format!("targets of {k} are not a list")))
                })
                .collect::<Res<Vec<_>>>()?;
            let ranks = pagerank(&graph, iterations, &d)?;
            Json::Array(
                ranks
                    .iter()
                    .map(|(k, r)| json!([value_to_json(k), { "exact": r.to_string(), "approx": r.to_f64() }]))
                    .collect(),
            )
        }
    };
    b.body = serde_json::to_string(&out)?;
    b.body.push('\n');
    b.item("result", "mapreduce", true, out, String::new());
    Ok(b.finish())
}

/// Corpus files in a fixed order, skipping the golden directory.
fn corpus_files(dir: &Path) -> Res<Vec<PathBuf>> {
    let mut out = Vec::new();
    for e in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let e = e?;
        let p = e.path();
        if p.strip_prefix(dir).is_ok_and(|r| r.starts_with("golden")) {
            continue;
        }
        if e.file_type().is_file() && p.extension().is_some_and(|x| x == "lx") {
            out.push(p.to_path_buf());
        }
    }
    Ok(out)
}

fn golden_path(dir: &Path, rel: &Path) -> PathBuf {
    let stem = rel.with_extension("").to_string_lossy().replace(['/', '\\'], "__");
    dir.join("golden").join(format!("{stem}.json"))
}

/// The reproducible part of checking one corpus file.
pub fn file_report(dir: &Path, file: &Path, seed: u64) -> Json {
    let mut w = Workbench::new().with_root(dir);
    let rel = file.strip_prefix(dir).unwrap_or(file);
    if let Err(e) = w.load_file(file) {
        return json!({ "file": show(rel), "seed": seed, "load_error": e.to_string() });
    }
    let props: Vec<Json> = w
        .run_properties(seed, None)
        .into_iter()
        .map(|(name, r)| match r {
            Ok(o) => json!({ "name": name, "result": o }),
            Err(e) => json!({ "name": name, "error": e.to_string() }),
        })
        .collect();
    json!({ "file": show(rel), "seed": seed, "items": w.items, "properties": props })
}

fn ci(dir: &Path, seed: u64, bless: bool) -> Res<Output> {
    if !dir.is_dir() {
        return Err(UsageError(format!("{} is not a directory", show(dir))));
    }
    let mut b = Builder::new("ci", vec![show(dir)], Some(seed));
    let files = corpus_files(dir)?;
    if bless {
        std::fs::create_dir_all(dir.join("golden"))?;
    }
    for f in &files {
        let rel = f.strip_prefix(dir).unwrap_or(f).to_path_buf();
        let report = file_report(dir, f, seed);
        let gp = golden_path(dir, &rel);
        let (ok, status) = if bless {
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            std::fs::write(&gp, text)?;
            (true, "blessed")
        } else {
            match std::fs::read_to_string(&gp) {
                Err(_) => (false, "no golden report"),
                Ok(text) => match serde_json::from_str::<Json>(&text) {
                    Ok(g) if g == report => (true, "matches golden"),
                    Ok(_) => (false, "differs from golden"),
                    Err(_) => (false, "golden report is not valid JSON"),
                },
            }
        };
        let line = format!("{} {}: {status}", if ok { "ok  " } else { "FAIL" }, show(&rel));
        b.item(&show(&rel), "file", ok, json!({ "status": status, "report": report }), line);
    }
    let bad = b.items.iter().filter(|i| !i.ok).count();
    b.summary = format!("{} files, {} mismatched", files.len(), bad);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignments() {
        assert_eq!(parse_assignment("x=1").unwrap(), ("x".to_string(), true));
        assert_eq!(parse_assignment("cin=nil").unwrap(), ("cin".to_string(), false));
        assert!(parse_assignment("x").is_err());
        assert!(parse_assignment("x=2").is_err());
    }

    #[test]
    fn golden_names_flatten_directories() {
        let p = golden_path(Path::new("c"), Path::new("defs/append.lx"));
        assert_eq!(p, Path::new("c/golden/defs__append.json"));
    }

    #[test]
    fn errors_exit_two() {
        let cli = Cli::try_parse_from(["eqthink", "eval", "-e", "(car"]).unwrap();
        let out = run(&cli);
        assert_eq!(out.exit_code(), 2);
        assert!(out.render(false).starts_with("error:"));
        let cli = Cli::try_parse_from(["eqthink", "eval", "-e", "(car 5)"]).unwrap();
        assert_eq!(run(&cli).exit_code(), 1);
    }
}
