//! Command dispatch. Every command returns an [`Outcome`]; printing and the
//! process exit code are left to the binary.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use suspend_core::flow::{apply_flow, apply_flow_float, FlowError, FlowPoint};
use suspend_core::ktheory::{homology, suspension_k, toeplitz_k, Status};
use suspend_core::quiver::{
    fibre_graph, fibre_paths, normalize_pair, openness_report, reduce_parameter, Time,
};
use suspend_core::scalar::RatDisplay;
use suspend_core::transform::{delay, higher_dual, higher_power, opposite, Construction};
use suspend_core::{Graph, Rat, Report};

use crate::format::{parse_fraction, parse_graph, parse_path, parse_rat, write_graph, FormatError};
use crate::suites::{self, Params, Suite, SuiteError};

#[derive(Parser, Debug)]
#[command(
    name = "suspend",
    version,
    about = "Suspension quivers of directed graphs"
)]
pub struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Apply a graph construction and write the resulting graph file.
    Transform {
        input: PathBuf,
        /// opposite | delay:n | dual:p,q | power:m
        #[arg(long)]
        op: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// K-theory of the suspension at the parameter l = m/n.
    Ktheory {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        l: String,
    },
    /// Run a verification suite on truncated path-space representations.
    Verify {
        input: PathBuf,
        /// tck | jmath | limits | eta | kappa | morita | flow | all
        #[arg(long)]
        suite: String,
        /// Truncation length.
        #[arg(long = "L", default_value_t = 4)]
        cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        n: Option<u32>,
    },
    /// Evolve a point of the suspension flow.
    Flow {
        input: PathBuf,
        /// Comma-separated edge ids of a finite prefix, range end first.
        #[arg(long)]
        prefix: String,
        #[arg(long, default_value = "0")]
        t: String,
        /// Flow time, rational (m/n) or decimal.
        #[arg(long)]
        l: String,
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
    /// Describe the fibre of the suspension quiver at l = m/n over time t.
    Quiver {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        l: String,
        #[arg(long, default_value = "0")]
        t: String,
        /// Comma-separated edge ids of a word to normalise at offset --s.
        #[arg(long)]
        word: Option<String>,
        #[arg(long, default_value = "0")]
        s: String,
        /// Longest fibre path listed.
        #[arg(long, default_value_t = 1)]
        len: usize,
    },
}

/// Text, its JSON mirror and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub code: i32,
}

impl Outcome {
    pub fn render(&self, json: bool) -> String {
        if json {
            let mut s = serde_json::to_string_pretty(&self.json).expect("report serialises");
            s.push('\n');
            s
        } else {
            self.text.clone()
        }
    }
}

/// Exit 1 for malformed input, 2 for unmet preconditions or hypotheses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Parse(String),
    Precondition(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Precondition(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(s) | Failure::Precondition(s) => s,
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        if e.is_precondition() {
            Failure::Precondition(e.to_string())
        } else {
            Failure::Parse(e.to_string())
        }
    }
}

impl From<FlowError> for Failure {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::Graph(_) => Failure::Parse(e.to_string()),
            other => Failure::Precondition(other.to_string()),
        }
    }
}

fn failure_outcome(command: &str, f: Failure, prefix: &str) -> Outcome {
    let kind = match f {
        Failure::Parse(_) => "error",
        Failure::Precondition(_) => "precondition",
    };
    Outcome {
        text: format!("{prefix}{kind}: {}\n", f.message()),
        json: json!({ "command": command, "status": kind, "message": f.message(), "exit_code": f.code() }),
        code: f.code(),
    }
}

fn load(path: &PathBuf) -> Result<Graph, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Parse(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_graph(&text)?)
}

fn echo(cmd: &Command) -> String {
    match cmd {
        Command::Transform { input, op, output } => {
            let out = output
                .as_ref()
                .map_or_else(String::new, |o| format!(" --output {}", o.display()));
            format!("suspend transform --op {op}{out} {}", input.display())
        }
        Command::Ktheory { input, l } => format!("suspend ktheory --l {l} {}", input.display()),
        Command::Verify {
            input,
            suite,
            cap,
            seed,
            m,
            n,
        } => {
            let mut s = format!("suspend verify --suite {suite} --L {cap} --seed {seed}");
            if let Some(m) = m {
                let _ = write!(s, " --m {m}");
            }
            if let Some(n) = n {
                let _ = write!(s, " --n {n}");
            }
            format!("{s} {}", input.display())
        }
        Command::Flow {
            input,
            prefix,
            t,
            l,
            steps,
        } => {
            format!(
                "suspend flow --prefix {prefix} --t {t} --l {l} --steps {steps} {}",
                input.display()
            )
        }
        Command::Quiver {
            input,
            l,
            t,
            word,
            s,
            len,
        } => {
            let w = word
                .as_ref()
                .map_or_else(String::new, |w| format!(" --word {w} --s {s}"));
            format!(
                "suspend quiver --l {l} --t {t}{w} --len {len} {}",
                input.display()
            )
        }
    }
}

/// Runs one command. `max_l` is the truncation cap from the environment.
pub fn run(cli: &Cli, max_l: Option<usize>) -> Outcome {
    let command = echo(&cli.command);
    let result = match &cli.command {
        Command::Transform { input, op, output } => {
            cmd_transform(&command, input, op, output.as_ref())
        }
        Command::Ktheory { input, l } => cmd_ktheory(&command, input, l),
        Command::Verify {
            input,
            suite,
            cap,
            seed,
            m,
            n,
        } => cmd_verify(&command, input, suite, *cap, *seed, *m, *n, max_l),
        Command::Flow {
            input,
            prefix,
            t,
            l,
            steps,
        } => cmd_flow(&command, input, prefix, t, l, *steps),
        Command::Quiver {
            input,
            l,
            t,
            word,
            s,
            len,
        } => cmd_quiver(&command, input, l, t, word.as_deref(), s, *len),
    };
    result.unwrap_or_else(|f| failure_outcome(&command, f, &format!("{command}\n")))
}

/// Parses and runs an argument vector; clap's own errors map to exit 1.
pub fn run_args<I, S>(args: I, max_l: Option<usize>) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => {
            let out = run(&cli, max_l);
            if cli.json {
                Outcome {
                    text: out.render(true),
                    ..out
                }
            } else {
                out
            }
        }
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            Outcome {
                text: e.to_string(),
                json: json!({ "status": "error", "exit_code": code }),
                code,
            }
        }
    }
}

fn cmd_transform(
    command: &str,
    input: &PathBuf,
    op: &str,
    output: Option<&PathBuf>,
) -> Result<Outcome, Failure> {
    let g = load(input)?;
    let bad = || {
        Failure::Parse(format!(
            "cannot parse transform {op:?}; expected opposite|delay:n|dual:p,q|power:m"
        ))
    };
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let (name, arg) = op.split_once(':').map_or((op, None), |(a, b)| (a, Some(b)));
    let labeled = match (name, arg) {
        ("opposite", None) => opposite(&g),
        ("delay", Some(n)) => {
            delay(&g, num(n)?).map_err(|e| Failure::Precondition(e.to_string()))?
        }
        ("power", Some(m)) => {
            higher_power(&g, num(m)?).map_err(|e| Failure::Precondition(e.to_string()))?
        }
        ("dual", Some(pq)) => {
            let (p, q) = pq.split_once(',').ok_or_else(bad)?;
            higher_dual(&g, num(p)?, num(q)?).map_err(|e| Failure::Precondition(e.to_string()))?
        }
        _ => return Err(bad()),
    };
    let construction = match labeled.construction {
        Construction::Opposite => String::from("opposite"),
        Construction::Delay(n) => format!("delay {n}"),
        Construction::Dual { p, q } => format!("dual {p},{q}"),
        Construction::Loops { .. } => String::from("loops"),
    };
    let body = write_graph(&labeled.graph);
    let summary = format!(
        "{construction}: {} vertices, {} edges",
        labeled.graph.vertex_count(),
        labeled.graph.edge_count()
    );
    let text = match output {
        Some(path) => {
            std::fs::write(path, &body)
                .map_err(|e| Failure::Parse(format!("cannot write {}: {e}", path.display())))?;
            format!("{command}\n{summary}\nwrote {}\n", path.display())
        }
        None => body.clone(),
    };
    let graph: Value = serde_json::from_str(&body).expect("graph file is JSON");
    Ok(Outcome {
        text,
        json: json!({ "command": command, "status": "ok", "summary": summary, "graph": graph, "exit_code": 0 }),
        code: 0,
    })
}

fn cmd_ktheory(command: &str, input: &PathBuf, l: &str) -> Result<Outcome, Failure> {
    let g = load(input)?;
    let (m, n) = parse_fraction(l)?;
    let k = suspension_k(&g, m, n).map_err(|e| Failure::Precondition(e.to_string()))?;
    let lr = Rat::new(m, n as i64);
    let mut text = format!(
        "{command}\nl = {} (m = {m}, n = {n})\nroute: {}\n",
        RatDisplay(&lr),
        k.route
    );
    let mut out = json!({ "command": command, "l": RatDisplay(&lr).to_string(), "m": m, "n": n, "route": k.route });
    if let Some(h) = &k.hypothesis {
        let work_is_op = m < 0;
        let _ = writeln!(text, "hypothesis (m = {}):", h.m);
        let _ = writeln!(text, "  vertex\treach\tclosure");
        let mut rows = Vec::new();
        for v in g.vertices() {
            let yn = |b: bool| if b { "yes" } else { "no" };
            let _ = writeln!(
                text,
                "  {}\t{}\t{}",
                g.vertex_name(v),
                yn(h.per_vertex[v.0]),
                yn(h.closure[v.0])
            );
            rows.push(json!({ "vertex": g.vertex_name(v), "reach": h.per_vertex[v.0], "closure": h.closure[v.0] }));
        }
        out["hypothesis"] = Value::Array(rows);
        out["opposite_graph"] = Value::Bool(work_is_op);
    }
    if let Some(d) = k.delay_hypothesis {
        let _ = writeln!(
            text,
            "delayed graph hypothesis: {}",
            if d { "yes" } else { "no" }
        );
        out["delay_hypothesis"] = Value::Bool(d);
    }
    if m == 0 {
        let (h0, h1) = homology(&g);
        let _ = writeln!(text, "H0 = {h0}\nH1 = {h1}");
        out["H0"] = Value::String(h0.to_string());
        out["H1"] = Value::String(h1.to_string());
    }
    if let Some((k0, k1)) = &k.groups {
        let _ = writeln!(text, "K0 = {k0}\nK1 = {k1}");
        out["K0"] = Value::String(k0.to_string());
        out["K1"] = Value::String(k1.to_string());
    }
    if m != 0 {
        if let Ok(Some((t0, t1))) = toeplitz_k(&g, m) {
            let _ = writeln!(text, "Toeplitz extension: K0 = {t0}, K1 = {t1}");
            out["toeplitz"] = json!({ "K0": t0.to_string(), "K1": t1.to_string() });
        }
    }
    let (status, note, code) = match &k.status {
        Status::Proven => ("proven", None, 0),
        Status::HypothesesUnmet(why) => {
            let mut why = why.clone();
            if g.is_simple_cycle() {
                why.push_str("; a simple cycle has no branching vertex, so this is the rotation-algebra regime");
            }
            ("hypotheses_unmet", Some(why), 2)
        }
        Status::OutsideProvenScope(why) => ("outside_proven_scope", Some(why.clone()), 2),
    };
    let _ = writeln!(text, "status: {status}");
    if let Some(why) = &note {
        let _ = writeln!(text, "note: {why}");
        out["note"] = Value::String(why.clone());
    }
    out["status"] = Value::String(status.to_string());
    out["exit_code"] = Value::from(code);
    Ok(Outcome {
        text,
        json: out,
        code,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    command: &str,
    input: &PathBuf,
    suite: &str,
    cap: usize,
    seed: u64,
    m: Option<u32>,
    n: Option<u32>,
    max_l: Option<usize>,
) -> Result<Outcome, Failure> {
    let suite: Suite = suite.parse().map_err(Failure::Parse)?;
    let g = load(input)?;
    let mut text = format!("{command}\n");
    let mut effective = cap;
    if let Some(limit) = max_l {
        if cap > limit {
            effective = limit;
            let _ = writeln!(
                text,
                "note: L clamped from {cap} to {limit} by SUSPEND_MAX_L"
            );
        }
    }
    let params = Params {
        cap: effective,
        seed,
        m,
        n,
    };
    let report = match suites::run(&g, suite, &params) {
        Ok(r) => r,
        Err(SuiteError::Precondition(s)) => return Err(Failure::Precondition(s)),
        Err(SuiteError::Structural(s)) => return Err(Failure::Parse(s)),
    };
    let code = if report.all_passed() { 0 } else { 1 };
    text.push_str(&report.to_string());
    let failed = report.failures().count();
    let _ = writeln!(
        text,
        "RESULT {} ({} checks, {failed} failed)",
        if code == 0 { "PASS" } else { "FAIL" },
        report.checks.len()
    );
    Ok(Outcome {
        text,
        json: json!({
            "command": command,
            "suite": suite.name(),
            "L": effective,
            "seed": seed,
            "checks": checks_json(&report),
            "status": if code == 0 { "pass" } else { "fail" },
            "exit_code": code,
        }),
        code,
    })
}

fn checks_json(r: &Report) -> Value {
    Value::Array(
        r.checks
            .iter()
            .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
            .collect(),
    )
}

fn cmd_flow(
    command: &str,
    input: &PathBuf,
    prefix: &str,
    t: &str,
    l: &str,
    steps: usize,
) -> Result<Outcome, Failure> {
    let g = load(input)?;
    let x = parse_path(&g, prefix)?;
    let t = parse_rat(t)?;
    let mut p = FlowPoint::new(&g, x, t)?;
    let mut text = format!("{command}\nt\tprefix\n");
    let mut rows = Vec::new();
    let mut line = |t: String, prefix: String, inexact: bool| {
        let _ = writeln!(
            text,
            "{t}\t{prefix}{}",
            if inexact { "\tinexact" } else { "" }
        );
        rows.push(json!({ "t": t, "prefix": prefix, "inexact": inexact }));
    };
    line(
        RatDisplay(&p.t().value()).to_string(),
        p.prefix().display(&g).to_string(),
        false,
    );
    if l.contains('.') || l.contains('e') {
        let lf: f64 = l
            .trim()
            .parse()
            .map_err(|_| Failure::Parse(format!("cannot parse flow time {l:?}")))?;
        let mut total = 0.0;
        for _ in 0..steps {
            total += lf;
            let q = apply_flow_float(&g, &p, total)?;
            line(
                format!("{:.12}", q.t),
                q.prefix.display(&g).to_string(),
                q.inexact,
            );
        }
    } else {
        let lr = parse_rat(l)?;
        for _ in 0..steps {
            p = apply_flow(&g, &p, lr)?;
            line(
                RatDisplay(&p.t().value()).to_string(),
                p.prefix().display(&g).to_string(),
                false,
            );
        }
    }
    Ok(Outcome {
        text,
        json: json!({ "command": command, "status": "ok", "trajectory": rows, "exit_code": 0 }),
        code: 0,
    })
}

fn cmd_quiver(
    command: &str,
    input: &PathBuf,
    l: &str,
    t: &str,
    word: Option<&str>,
    s: &str,
    len: usize,
) -> Result<Outcome, Failure> {
    let g = load(input)?;
    let (m, n) = parse_fraction(l)?;
    let t = parse_rat(t)?;
    let time = Time::new(t).map_err(|e| Failure::Precondition(e.to_string()))?;
    let pre = |e: suspend_core::quiver::QuiverError| Failure::Precondition(e.to_string());
    let n32 = u32::try_from(n)
        .map_err(|_| Failure::Precondition(String::from("denominator too large")))?;
    let red = reduce_parameter(&g, m, n32).map_err(pre)?;
    let d = &red.delay.graph;
    let k = red.delay_param();
    let lr = Rat::new(m, n as i64);
    let mut text = format!("{command}\n");
    let _ = writeln!(
        text,
        "l = {} reduces to parameter {k} on D_{n}({}): {} vertices, {} edges",
        RatDisplay(&lr),
        if m < 0 { "E^op" } else { "E" },
        d.vertex_count(),
        d.edge_count()
    );
    let t_img = Time::frac_of(t * Rat::from_integer(n as i64));
    let fibre = fibre_graph(d, k, t_img).map_err(pre)?;
    let kind = match (k, t_img.is_zero()) {
        (0, _) => String::from("loop graph"),
        (_, false) => format!("D(1,{})", k + 1),
        (_, true) => format!("D(0,{k})"),
    };
    let _ = writeln!(
        text,
        "fibre over {} in the reduced quiver: {kind}, {} vertices, {} edges",
        RatDisplay(&t_img.value()),
        fibre.graph.vertex_count(),
        fibre.graph.edge_count()
    );
    let mut paths_json = Vec::new();
    for j in 0..=len {
        let ps = fibre_paths(d, k, t_img, j);
        let shown: Vec<String> = ps.iter().take(12).map(|p| p.display(d)).collect();
        let more = if ps.len() > 12 {
            format!(" (+{} more)", ps.len() - 12)
        } else {
            String::new()
        };
        let _ = writeln!(
            text,
            "  length {j}: {} paths: {}{more}",
            ps.len(),
            shown.join(" ")
        );
        paths_json.push(json!({ "length": j, "count": ps.len() }));
    }
    let mut out = json!({
        "command": command,
        "l": RatDisplay(&lr).to_string(),
        "reduced_parameter": k,
        "delay_vertices": d.vertex_count(),
        "delay_edges": d.edge_count(),
        "fibre_time": RatDisplay(&t_img.value()).to_string(),
        "fibre_kind": kind,
        "fibre_paths": paths_json,
    });
    if m >= 0 {
        let (count, ok) = red.fibre_bijection(&g, time).map_err(pre)?;
        let _ = writeln!(
            text,
            "fibre map at t = {}: {count} edges, bijective onto image fibre: {ok}",
            RatDisplay(&t)
        );
        out["fibre_bijection"] = json!({ "edges": count, "ok": ok });
    }
    if let Some(w) = word {
        let mu = parse_path(&g, w)?;
        let s = parse_rat(s)?;
        if m >= 0 {
            let a = normalize_pair(&g, &mu, s, lr).map_err(pre)?;
            let _ = writeln!(
                text,
                "pair ({}, {}) has normal form {}",
                mu.display(&g),
                RatDisplay(&s),
                a.display(&g)
            );
            out["normal_form"] = Value::String(a.display(&g));
        }
        let img = red.map_pair(&g, &mu, s).map_err(pre)?;
        let ok = red.intertwines(&g, &mu, s).map_err(pre)?;
        let _ = writeln!(
            text,
            "reduced image {} (range and source intertwined: {ok})",
            img.display(d)
        );
        out["reduced_image"] = Value::String(img.display(d));
        out["intertwines"] = Value::Bool(ok);
    }
    let _ = writeln!(text, "openness at interior points:\n  edge\tsource\trange");
    let mut open = Vec::new();
    for o in openness_report(&g) {
        let yn = |b: bool| if b { "open" } else { "not open" };
        let _ = writeln!(
            text,
            "  {}\t{}\t{}",
            g.edge_name(o.edge),
            yn(o.source_open),
            yn(o.range_open)
        );
        open.push(json!({ "edge": g.edge_name(o.edge), "source_open": o.source_open, "range_open": o.range_open }));
    }
    out["openness"] = Value::Array(open);
    out["status"] = Value::String(String::from("ok"));
    out["exit_code"] = Value::from(0);
    Ok(Outcome {
        text,
        json: out,
        code: 0,
    })
}
