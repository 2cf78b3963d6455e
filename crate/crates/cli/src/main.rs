//! `clr-magcount`: eigenvalue counts, functionals, kernels and bound checks
//! from the command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use magcount::birman_schwinger::{bs_trace, check_positive_definite_seeded, BsOperator};
use magcount::bound_suite::{
    assemble_case, comparison_inequality, constants_table, estimate_constants, sweep_case, verify_strong_coupling,
    verify_weak_coupling, Theorem, DEFAULT_A, DEFAULT_P, STABILITY_TOL,
};
use magcount::field_models::{build_ground_state, INTEGER_ALPHA_TOL};
use magcount::functionals::{functional_report, DIVERGENCE_CAP};
use magcount::hardy_toolkit::{channel_case, operator_hardy_check, verify_hardy_seeded, HardyCase};
use magcount::radial_spectra::CountOptions;
use magcount::{
    AngularAverage, Counter, Error, FieldModel, FieldProfile, GridSpec, KernelSpec, OperatorKind, PotentialModel, DEFAULT_SEED,
};

#[derive(Parser, Debug)]
#[command(name = "clr-magcount", version, about = "Eigenvalue counting for 2D Pauli and magnetic Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// JSON run configuration; flags on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (standard output when omitted).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "CLR_MAGCOUNT_THREADS")]
    threads: Option<usize>,
    /// Stamp the provenance header with the wall-clock time.
    #[arg(long, global = true)]
    timestamps: bool,
    /// Also write a gnuplot data file of the main table.
    #[arg(long, global = true)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Name {
    Count,
    Sweep,
    Functionals,
    Kernels,
    Verify,
    Hardy,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// N(H − λV) at one or more couplings, per channel.
    Count(Opts),
    /// Totals over a geometric λ range.
    Sweep(Opts),
    /// The right-hand-side functionals of a potential.
    Functionals(Opts),
    /// Trace, positivity and Nyström counts of a Birman–Schwinger kernel.
    Kernels(Opts),
    /// A bound, weak/strong coupling or the comparison inequality over a λ range.
    Verify(Opts),
    /// Weighted Hardy constants and their verification.
    Hardy(Opts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Csv,
    Json,
}

/// Every option of every subcommand; the config file uses the same keys.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Opts {
    /// Field: inline (`gaussian:alpha=0.3`), JSON, or a JSON file.
    #[arg(long)]
    field: Option<String>,
    /// Potential: inline (`disk:r=1`), JSON, or a JSON file.
    #[arg(long)]
    potential: Option<String>,
    /// pauli, h_plus, h_minus or schrodinger.
    #[arg(long)]
    operator: Option<String>,
    /// Comma-separated couplings (count).
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Number of geometric λ points.
    #[arg(long)]
    points: Option<usize>,
    /// `min,max,points` in one flag.
    #[arg(long)]
    lambda_range: Option<String>,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    stretch: Option<f64>,
    /// Recount on the doubled grid and report the change.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    grid_check: Option<bool>,
    /// Mixed-norm exponent.
    #[arg(long)]
    p: Option<f64>,
    /// Long-range exponent.
    #[arg(long)]
    a: Option<f64>,
    /// Kernel: `min_power:alpha=1`, `resolvent:m=0,alpha=1,kappa=0.01`, ...
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    /// verify: a theorem name, `weak_coupling`, `strong_coupling` or `comparison`;
    /// hardy: `classical` or `channel`.
    #[arg(long)]
    case: Option<String>,
    /// Decades of λ used for exponent fits.
    #[arg(long)]
    fit_decades: Option<f64>,
    /// Markdown summary destination for verify (standard error when omitted).
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Channel index for `hardy --case channel`.
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Use the outer split interval for `hardy --case channel`.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    outer: Option<bool>,
    /// Also run the operator-level Hardy check with this many elements.
    #[arg(long)]
    elements: Option<usize>,
}

/// The config-file form: the subcommand plus every option.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    subcommand: Option<Name>,
    output: Option<PathBuf>,
    format: Option<Format>,
    seed: Option<u64>,
    threads: Option<usize>,
    plot: Option<PathBuf>,
    #[serde(flatten)]
    opts: Opts,
}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    Error::Config(msg.into()).into()
}

macro_rules! merge {
    ($dst:expr, $src:expr, $($f:ident),*) => { $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )* };
}

impl Opts {
    fn merge(&mut self, o: &Opts) {
        merge!(
            self, o, field, potential, operator, lambda, lambda_min, lambda_max, points, lambda_range, grid_n, r_min, r_max, stretch,
            grid_check, p, a, kernel, nodes, samples, case, fit_decades, summary, trials, m, alpha, outer, elements
        );
    }

    fn field(&self) -> anyhow::Result<FieldModel> {
        let spec = self.field.as_deref().unwrap_or("zero");
        let profile: FieldProfile = match json_doc(spec)? {
            Some(v) => serde_json::from_value(v).map_err(|e| config_err(format!("field JSON: {e}")))?,
            None => FieldProfile::parse_inline(spec)?,
        };
        FieldModel::new(profile).map_err(|e| config_err(e.to_string()))
    }

    fn potential(&self) -> anyhow::Result<PotentialModel> {
        let spec = self.potential.as_deref().ok_or_else(|| config_err("--potential is required"))?;
        match json_doc(spec)? {
            Some(v) => {
                let m: PotentialModel = serde_json::from_value(v).map_err(|e| config_err(format!("potential JSON: {e}")))?;
                m.validate().map_err(|e| config_err(e.to_string()))?;
                Ok(m)
            }
            None => Ok(PotentialModel::parse_inline(spec)?),
        }
    }

    fn operator(&self) -> anyhow::Result<OperatorKind> {
        Ok(OperatorKind::parse(self.operator.as_deref().unwrap_or("pauli"))?)
    }

    fn grid(&self) -> anyhow::Result<GridSpec> {
        let d = GridSpec::default();
        let g = GridSpec {
            n: self.grid_n.unwrap_or(d.n),
            r_min: self.r_min.unwrap_or(d.r_min),
            r_max: self.r_max.unwrap_or(d.r_max),
            stretch: self.stretch.unwrap_or(d.stretch),
        };
        g.build().map_err(|e| config_err(e.to_string()))?;
        Ok(g)
    }

    fn lambda_list(&self) -> anyhow::Result<Vec<f64>> {
        let raw = self.lambda.as_deref().ok_or_else(|| config_err("--lambda is required"))?;
        let list: Vec<f64> = raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| config_err(format!("`{s}` is not a number"))))
            .collect::<anyhow::Result<_>>()?;
        if list.is_empty() {
            return Err(config_err("empty lambda list"));
        }
        if list.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(config_err("couplings must be finite and nonnegative"));
        }
        Ok(list)
    }

    fn lambda_grid(&self) -> anyhow::Result<Vec<f64>> {
        let (lo, hi, n) = match &self.lambda_range {
            Some(r) => {
                let parts: Vec<&str> = r.split(',').map(str::trim).collect();
                let [lo, hi, n] = parts[..] else {
                    return Err(config_err(format!("--lambda-range wants min,max,points, got `{r}`")));
                };
                let num = |s: &str| s.parse::<f64>().map_err(|_| config_err(format!("`{s}` is not a number")));
                let n = n.parse::<usize>().map_err(|_| config_err(format!("`{n}` is not a point count")))?;
                (num(lo)?, num(hi)?, n)
            }
            None => (
                self.lambda_min.ok_or_else(|| config_err("--lambda-min or --lambda-range is required"))?,
                self.lambda_max.ok_or_else(|| config_err("--lambda-max or --lambda-range is required"))?,
                self.points.unwrap_or(10),
            ),
        };
        if n == 0 {
            return Err(config_err("points must be at least 1"));
        }
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(config_err(format!("need 0 < lambda_min ≤ lambda_max, got [{lo}, {hi}]")));
        }
        Ok(if n == 1 {
            vec![lo]
        } else {
            (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
        })
    }
}

/// JSON documents are given inline (starting with `{`) or as a path to a file.
fn json_doc(spec: &str) -> anyhow::Result<Option<Value>> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else if Path::new(spec).is_file() {
        fs::read_to_string(spec).with_context(|| format!("reading {spec}")).map_err(|e| config_err(format!("{e:#}")))?
    } else {
        return Ok(None);
    };
    Ok(Some(serde_json::from_str(&text).map_err(|e| config_err(format!("invalid JSON in `{spec}`: {e}")))?))
}

/// Floats in tables carry 17 significant digits.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// A result: a table for CSV and plots, plus a JSON document.
struct Output {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    /// Extra `# key: value` lines after the provenance.
    notes: Vec<(String, String)>,
    json: Value,
    summary: Option<String>,
}

struct Run {
    name: Name,
    opts: Opts,
    format: Format,
    seed: u64,
    timestamps: bool,
    output: Option<PathBuf>,
    plot: Option<PathBuf>,
}

impl Run {
    /// The effective options, unset ones omitted.
    fn config_echo(&self) -> Value {
        let mut v = serde_json::to_value(&self.opts).unwrap_or(Value::Null);
        if let Some(map) = v.as_object_mut() {
            map.retain(|_, x| !x.is_null());
        }
        v
    }

    fn provenance(&self) -> Value {
        let mut p = json!({
            "tool": "clr-magcount",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.name,
            "config": self.config_echo(),
            "seed": self.seed,
            "grid": self.opts.grid().ok(),
            "tolerances": {
                "integer_alpha": INTEGER_ALPHA_TOL,
                "divergence_cap": DIVERGENCE_CAP,
                "stability": STABILITY_TOL,
            },
        });
        if self.timestamps {
            p["timestamp"] = json!(chrono::Utc::now().to_rfc3339());
        }
        p
    }

    fn execute(&self) -> anyhow::Result<Output> {
        match self.name {
            Name::Count => count(&self.opts),
            Name::Sweep => sweep(&self.opts),
            Name::Functionals => functionals(&self.opts),
            Name::Kernels => kernels(&self.opts, self.seed),
            Name::Verify => verify(&self.opts),
            Name::Hardy => hardy(&self.opts, self.seed),
        }
    }

    fn write(&self, out: &Output) -> anyhow::Result<()> {
        let body = match self.format {
            Format::Json => {
                let doc = json!({ "provenance": self.provenance(), "result": out.json });
                serde_json::to_string_pretty(&doc)? + "\n"
            }
            Format::Csv => {
                let mut s = String::new();
                let prov = self.provenance();
                for (k, v) in prov.as_object().unwrap() {
                    s.push_str(&format!("# {k}: {v}\n"));
                }
                for (k, v) in &out.notes {
                    s.push_str(&format!("# {k}: {v}\n"));
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&out.columns)?;
                for r in &out.rows {
                    w.write_record(r)?;
                }
                s.push_str(std::str::from_utf8(&w.into_inner()?)?);
                s
            }
        };
        match &self.output {
            Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout().lock().write_all(body.as_bytes())?,
        }
        if let Some(path) = &self.plot {
            let mut s = format!("# {}\n", out.columns.join(" "));
            for r in &out.rows {
                s.push_str(&r.join(" "));
                s.push('\n');
            }
            fs::write(path, s).with_context(|| format!("writing {}", path.display()))?;
        }
        if let Some(md) = &out.summary {
            match &self.opts.summary {
                Some(path) => fs::write(path, md).with_context(|| format!("writing {}", path.display()))?,
                None => eprint!("{md}"),
            }
        }
        Ok(())
    }
}

fn count(o: &Opts) -> anyhow::Result<Output> {
    let field = o.field()?;
    let v = o.potential()?;
    let op = o.operator()?;
    let lambdas = o.lambda_list()?;
    let gs = build_ground_state(&field)?;
    let options = CountOptions { grid_check: o.grid_check.unwrap_or(false), ..CountOptions::default() };
    let counter = Counter::new(&gs, &v, o.grid()?.build()?).with_options(options);
    let reports = counter.sweep(&lambdas, op)?;
    let mut rows = Vec::new();
    let mut notes = vec![("alpha".to_string(), num(field.alpha))];
    for r in &reports {
        notes.push((format!("total(lambda={})", num(r.lambda)), r.total.to_string()));
        for c in &r.per_channel {
            rows.push(vec![num(r.lambda), format!("{:?}", c.spin).to_lowercase(), c.m.to_string(), c.count.to_string(), c.near_zero.to_string()]);
        }
    }
    Ok(Output {
        columns: vec!["lambda", "spin", "m", "count", "near_zero"],
        rows,
        notes,
        json: json!({ "alpha": field.alpha, "reports": reports }),
        summary: None,
    })
}

fn sweep(o: &Opts) -> anyhow::Result<Output> {
    let field = o.field()?;
    let v = o.potential()?;
    let op = o.operator()?;
    let lambdas = o.lambda_grid()?;
    let gs = build_ground_state(&field)?;
    let options = CountOptions { grid_check: o.grid_check.unwrap_or(false), ..CountOptions::default() };
    let reports = Counter::new(&gs, &v, o.grid()?.build()?).with_options(options).sweep(&lambdas, op)?;
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                num(r.lambda),
                r.total.to_string(),
                r.m_max_used.to_string(),
                r.near_zero.to_string(),
                r.grid_delta.map_or(String::new(), |d| d.to_string()),
            ]
        })
        .collect();
    Ok(Output {
        columns: vec!["lambda", "total", "m_max_used", "near_zero", "grid_delta"],
        rows,
        notes: vec![("alpha".into(), num(field.alpha))],
        json: json!({ "alpha": field.alpha, "reports": reports }),
        summary: None,
    })
}

fn functionals(o: &Opts) -> anyhow::Result<Output> {
    let v = o.potential()?;
    let f = functional_report(&v, o.p.unwrap_or(DEFAULT_P), o.a.unwrap_or(DEFAULT_A))?;
    let entries = [
        ("mixed_norm", f.mixed_norm),
        ("log_local", f.log_local),
        ("log_global", f.log_global),
        ("bracket_a", f.bracket_a),
        ("l1_norm", f.l1_norm),
        ("ball1_l1", f.ball1_l1),
        ("weyl", f.weyl),
    ];
    let rows = entries.iter().map(|(n, e)| vec![n.to_string(), num(e.value), num(e.error), e.divergent.to_string()]).collect();
    Ok(Output { columns: vec!["functional", "value", "error", "divergent"], rows, notes: vec![], json: json!(f), summary: None })
}

fn kernels(o: &Opts, seed: u64) -> anyhow::Result<Output> {
    let spec = KernelSpec::parse_inline(o.kernel.as_deref().ok_or_else(|| config_err("--kernel is required"))?)?;
    let avg = AngularAverage { model: o.potential.as_ref().map(|_| o.potential()).transpose()?.unwrap_or(PotentialModel::disk(1.0)) };
    let trace = bs_trace(&spec, &avg)?;
    let psd = check_positive_definite_seeded(&spec, &avg, o.samples.unwrap_or(256), seed)?;
    let mut rows = vec![
        vec!["trace".into(), String::new(), num(trace.value)],
        vec!["trace_divergent".into(), String::new(), trace.divergent.to_string()],
        vec!["psd_min_eigenvalue".into(), String::new(), num(psd.min_eigenvalue)],
        vec!["psd_max_diagonal".into(), String::new(), num(psd.max_diagonal)],
        vec!["psd_pass".into(), String::new(), psd.pass.to_string()],
    ];
    let mut counts = Vec::new();
    if o.lambda.is_some() {
        let op = BsOperator::build(&spec, &avg, o.nodes.unwrap_or(256))?;
        for l in o.lambda_list()? {
            let n = op.count(l);
            rows.push(vec!["count".into(), num(l), n.to_string()]);
            counts.push(json!({ "lambda": l, "count": n }));
        }
    }
    Ok(Output {
        columns: vec!["quantity", "lambda", "value"],
        rows,
        notes: vec![],
        json: json!({ "kernel": spec, "trace": trace, "positive_definite": psd, "counts": counts }),
        summary: None,
    })
}

fn markdown(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = format!("| {} |\n|{}\n", header.join(" | "), "---|".repeat(header.len()));
    for r in rows {
        s.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    s
}

fn verify(o: &Opts) -> anyhow::Result<Output> {
    let field = o.field()?;
    let v = o.potential()?;
    let lambdas = o.lambda_grid()?;
    let gs = build_ground_state(&field)?;
    let grid = o.grid()?.build()?;
    let fit = o.fit_decades.unwrap_or(1.0);
    let case = o.case.as_deref().ok_or_else(|| config_err("--case is required"))?;
    match case {
        "weak_coupling" => {
            let w = verify_weak_coupling(&gs, &v, grid, &lambdas)?;
            let rows: Vec<Vec<String>> = w.rows.iter().map(|r| vec![num(r.lambda), r.pauli.to_string(), r.schrodinger.to_string()]).collect();
            let summary = markdown(
                &["alpha", "m(alpha)", "pauli = m(alpha)", "schrodinger = 0", "grid stable"],
                &[vec![num(w.alpha), w.m_alpha.to_string(), w.pauli_matches.to_string(), w.schrodinger_zero.to_string(), w.grid_stable.to_string()]],
            );
            Ok(Output { columns: vec!["lambda", "pauli", "schrodinger"], rows, notes: vec![], json: json!(w), summary: Some(summary) })
        }
        "strong_coupling" => {
            let s = verify_strong_coupling(&gs, &v, grid, o.operator()?, &lambdas, fit)?;
            let rows: Vec<Vec<String>> = s.lambdas.iter().zip(&s.counts).map(|(l, n)| vec![num(*l), n.to_string()]).collect();
            let summary = markdown(
                &["fitted exponent", "expected", "prefactor", "reference"],
                &[vec![num(s.fitted_exponent), num(s.expected_exponent), num(s.prefactor), s.reference_prefactor.map_or("-".into(), num)]],
            );
            Ok(Output { columns: vec!["lambda", "count"], rows, notes: vec![], json: json!(s), summary: Some(summary) })
        }
        "comparison" => {
            let c = comparison_inequality(&gs, &v, grid, &lambdas)?;
            let rows: Vec<Vec<String>> = c
                .rows
                .iter()
                .map(|r| vec![num(r.lambda), r.schrodinger.to_string(), r.h_plus_doubled.to_string(), r.channelwise.to_string()])
                .collect();
            let summary = markdown(&["comparison holds"], &[vec![c.holds.to_string()]]);
            Ok(Output { columns: vec!["lambda", "schrodinger", "h_plus_doubled", "channelwise"], rows, notes: vec![], json: json!(c), summary: Some(summary) })
        }
        name => {
            let theorem = Theorem::parse(name)?;
            let bc = assemble_case(field.alpha, field.is_integer_alpha, &v, theorem, o.p.unwrap_or(DEFAULT_P), o.a.unwrap_or(DEFAULT_A))?;
            if let Some(why) = &bc.inapplicable {
                return Err(config_err(format!("{theorem} is inapplicable: {why}")));
            }
            let s = sweep_case(&bc, &gs, &v, grid, &lambdas, fit)?;
            let rows: Vec<Vec<String>> = s
                .lambdas
                .iter()
                .zip(s.counts.iter().zip(&s.rhs_shape))
                .map(|(l, (n, r))| vec![num(*l), n.to_string(), num(*r)])
                .collect();
            let table = estimate_constants(std::slice::from_ref(&s));
            let summary = markdown(
                &["theorem", "m term", "empirical constant", "lambda at sup", "fitted exponent", "reported only"],
                &[vec![
                    theorem.to_string(),
                    bc.m_alpha_term.to_string(),
                    num(s.empirical_constant),
                    num(s.lambda_at_sup),
                    num(s.fitted_exponent),
                    s.reported_only.to_string(),
                ]],
            );
            Ok(Output {
                columns: vec!["lambda", "count", "rhs_shape"],
                rows,
                notes: vec![("empirical_constant".into(), num(s.empirical_constant))],
                json: json!({ "case": bc, "sweep": s, "constants": table, "proof_constants": constants_table(field.alpha, 4) }),
                summary: Some(summary),
            })
        }
    }
}

fn hardy(o: &Opts, seed: u64) -> anyhow::Result<Output> {
    let case = match o.case.as_deref().unwrap_or("classical") {
        "classical" => HardyCase::classical(),
        "channel" => {
            let alpha = o.alpha.ok_or_else(|| config_err("--alpha is required for a channel case"))?;
            channel_case(o.m.unwrap_or(0), alpha, o.outer.unwrap_or(false))
        }
        other => return Err(config_err(format!("unknown hardy case `{other}`"))),
    };
    let v = verify_hardy_seeded(&case, o.trials.unwrap_or(100), seed)?;
    let mut rows = vec![
        vec!["constant".into(), num(v.constant.value.value)],
        vec!["integrable".into(), v.constant.integrable.to_string()],
        vec!["trials".into(), v.trials.to_string()],
        vec!["max_ratio".into(), num(v.max_ratio)],
        vec!["pass".into(), v.pass.to_string()],
    ];
    let mut operator = Vec::new();
    if let (Some(n), Some(alpha)) = (o.elements, o.alpha) {
        operator = operator_hardy_check(alpha, n)?;
        for r in &operator {
            rows.push(vec![format!("negative(m={},{})", r.m, r.side), r.negative.to_string()]);
        }
    }
    Ok(Output { columns: vec!["quantity", "value"], rows, notes: vec![], json: json!({ "verification": v, "operator_check": operator }), summary: None })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg: RunConfig = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| config_err(format!("reading {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| config_err(format!("config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    let (name, mut opts) = match cli.command {
        Some(Command::Count(o)) => (Name::Count, o),
        Some(Command::Sweep(o)) => (Name::Sweep, o),
        Some(Command::Functionals(o)) => (Name::Functionals, o),
        Some(Command::Kernels(o)) => (Name::Kernels, o),
        Some(Command::Verify(o)) => (Name::Verify, o),
        Some(Command::Hardy(o)) => (Name::Hardy, o),
        None => (cfg.subcommand.ok_or_else(|| config_err("no subcommand given"))?, Opts::default()),
    };
    opts.merge(&cfg.opts);
    if let Some(n) = cli.threads.or(cfg.threads) {
        if n == 0 {
            return Err(config_err("threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| anyhow!(e))?;
    }
    let r = Run {
        name,
        opts,
        format: cli.format.or(cfg.format).unwrap_or(Format::Csv),
        seed: cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
        timestamps: cli.timestamps,
        output: cli.output.or(cfg.output),
        plot: cli.plot.or(cfg.plot),
    };
    let out = r.execute()?;
    r.write(&out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e.downcast_ref::<Error>().is_some_and(Error::is_numerical);
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}
