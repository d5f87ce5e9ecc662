//! Command-line front end: argument parsing, config overrides, command
//! dispatch and JSON/CSV emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::badset::{
    bad_set_d, bad_set_s_from, eps_sweep_field, modulus_field, theta_profile, verify_prop_61, verify_prop_62,
    verify_prop_63,
};
use crate::ball_average::{
    approx_error, approx_error_slope, comparability_bounds, decay_slope, log_grid, m_ell, m_ell_closed,
    positivity_report,
};
use crate::config::RunConfig;
use crate::distance::{distance_proxies, distance_upper_oracle, threshold_projection, wavelet_truncation};
use crate::error::Error;
use crate::heat::{heat_deriv_field, semigroup_apply};
use crate::hyperbolic::{carleson_m, mu_measure, SpaceTimeSet};
use crate::kernel::{kernel_decay_probe, kernel_values};
use crate::lipschitz::{compare_norms, lambda_s_norm_diff, lambda_s_seminorm_diff};
use crate::selftest::{self, SelftestOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VIOLATIONS: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "fracheat", version, about = "Fractional heat semigroup experiments on periodic grids")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; JSON goes to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Override a config key, e.g. `--set heat.alpha=1.5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Sets `heat.alpha` and `kernel.alpha`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Sets `grid.dim` and `kernel.n`.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub s: Option<f64>,
    #[arg(long, global = true)]
    pub r: Option<u32>,
    /// Sets `grid.size`.
    #[arg(long, global = true)]
    pub size: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel values and decay slopes.
    Kernel,
    /// Semigroup snapshots of the configured function.
    Semigroup,
    /// Heat and difference Lambda_s seminorms.
    Lipnorm,
    /// Ball-average multiplier table and comparability checks.
    Ballavg,
    /// Bad-set statistics.
    Badset,
    /// Epsilon curves per lattice.
    Sweep,
    /// Set-inclusion verification.
    Verify {
        #[arg(long)]
        inject_violation: bool,
    },
    /// Distance proxies and the upper oracle.
    Distance,
    /// The acceptance suite.
    Selftest {
        #[arg(long)]
        inject_violation: bool,
        /// Comma-separated criterion ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Kernel => "kernel",
            Command::Semigroup => "semigroup",
            Command::Lipnorm => "lipnorm",
            Command::Ballavg => "ballavg",
            Command::Badset => "badset",
            Command::Sweep => "sweep",
            Command::Verify { .. } => "verify",
            Command::Distance => "distance",
            Command::Selftest { .. } => "selftest",
        }
    }
}

/// A failed run: an exit code and a message for the error record.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure { code: EXIT_VALIDATION, kind: "validation", message: message.into() }
    }

    fn io(message: impl Into<String>) -> Self {
        Failure { code: EXIT_IO, kind: "io", message: message.into() }
    }

    /// The JSON line written to stderr.
    pub fn record(&self) -> String {
        json!({ "error": { "kind": self.kind, "exit_code": self.code, "message": self.message } }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match e {
            Error::InvalidParameter(_) | Error::GridMismatch(_) | Error::GridTooSmall(_) => {
                (EXIT_VALIDATION, "validation")
            }
            Error::NonHermitian(_) | Error::Quadrature { .. } | Error::Numerical(_) => (EXIT_NUMERICAL, "numerical"),
        };
        Failure { code, kind, message: e.to_string() }
    }
}

/// Files produced by a command, written only once everything succeeded.
pub struct Artifacts {
    /// The JSON document.
    pub document: Value,
    /// `(file name, contents)` CSV tables.
    pub tables: Vec<(String, String)>,
    /// Lines printed to stdout in addition to (or instead of) the document.
    pub console: Vec<String>,
    pub exit_code: i32,
}

/// JSON formatter writing every float with 17 significant digits.
struct Precise;

impl serde_json::ser::Formatter for Precise {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

pub fn to_json(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise);
    v.serialize(&mut ser).expect("serializing a Value");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

struct Table {
    text: String,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table { text: header.join(",") + "\n" }
    }

    fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }
}

fn f(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn set_key(table: &mut toml::Table, key: &str, raw: &str) -> Result<(), Failure> {
    let parsed = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Failure::validation(format!("bad override key {key:?}")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Failure::validation(format!("override {key:?}: {p} is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

/// Config file, then `--set` overrides, then the shorthand flags.
pub fn load_config(common: &Common) -> Result<(RunConfig, PathBuf), Failure> {
    let (mut table, base) = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::validation(format!("cannot read config {}: {e}", path.display())))?;
            let table: toml::Table =
                toml::from_str(&text).map_err(|e| Failure::validation(format!("config: {e}")))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (table, base)
        }
        None => (toml::Table::new(), PathBuf::from(".")),
    };
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::validation(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        set_key(&mut table, k.trim(), v.trim())?;
    }
    let mut cfg: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Failure::validation(format!("config: {e}")))?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(a) = common.alpha {
        cfg.heat.alpha = a;
        cfg.kernel.alpha = a;
    }
    if let Some(n) = common.n {
        cfg.grid.dim = n;
        cfg.kernel.n = n;
    }
    if let Some(s) = common.s {
        cfg.heat.s = s;
    }
    if let Some(r) = common.r {
        cfg.heat.r = r;
    }
    if let Some(size) = common.size {
        cfg.grid.size = size;
    }
    cfg.validate()?;
    Ok((cfg, base))
}

fn document(command: &str, cfg: &RunConfig, results: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "config": value(cfg),
        "results": results,
    })
}

fn done(command: &str, cfg: &RunConfig, results: Value, tables: Vec<(String, String)>) -> Artifacts {
    Artifacts { document: document(command, cfg, results), tables, console: Vec::new(), exit_code: EXIT_OK }
}

fn cmd_kernel(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let k = &cfg.kernel;
    let vals = kernel_values(k.alpha, k.n, &k.radii)?;
    let mut t = Table::new(&["x", "value", "error"]);
    for v in &vals {
        t.row(&[f(v.x), f(v.value), f(v.error)]);
    }
    let mut fits = Vec::new();
    let mut d = Table::new(&["k", "x", "value", "error"]);
    for &order in &k.decay_orders {
        match kernel_decay_probe(k.alpha, k.n, order, k.decay_min, k.decay_max, k.decay_points) {
            Ok(fit) => {
                for s in &fit.samples {
                    d.row(&[order.to_string(), f(s.x), f(s.value), f(s.error)]);
                }
                fits.push(json!({ "k": order, "slope": fit.slope, "intercept": fit.intercept,
                    "points_used": fit.points_used, "predicted": -(k.n as f64 + k.alpha + order as f64) }));
            }
            Err(Error::Numerical(msg)) => fits.push(json!({ "k": order, "error": msg })),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(done(
        "kernel",
        cfg,
        json!({ "alpha": k.alpha, "n": k.n, "values": value(&vals), "decay": fits }),
        vec![("kernel_values.csv".into(), t.text), ("kernel_decay.csv".into(), d.text)],
    ))
}

fn cmd_semigroup(cfg: &RunConfig, base: &Path) -> Result<Artifacts, Failure> {
    let grid = cfg.grid()?;
    let fun = cfg.function.build(grid, base)?;
    let alpha = cfg.heat.alpha;
    let snaps = cfg
        .semigroup
        .times
        .iter()
        .map(|&t| semigroup_apply(&fun, alpha, t))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut header = vec!["index".to_string()];
    header.extend(cfg.semigroup.times.iter().map(|t| format!("t={}", f(*t))));
    let mut table = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for i in 0..grid.len() {
        let mut row = vec![i.to_string()];
        row.extend(snaps.iter().map(|s| f(s.values()[i])));
        table.row(&row);
    }
    let stats: Vec<Value> = cfg
        .semigroup
        .times
        .iter()
        .zip(&snaps)
        .map(|(&t, s)| json!({ "t": t, "sup": s.sup_norm(), "l2": s.l2_norm(), "mean": s.mean() }))
        .collect();
    Ok(done(
        "semigroup",
        cfg,
        json!({ "alpha": alpha, "snapshots": stats }),
        vec![("semigroup.csv".into(), table.text)],
    ))
}

fn cmd_lipnorm(cfg: &RunConfig, base: &Path) -> Result<Artifacts, Failure> {
    let fun = cfg.function.build(cfg.grid()?, base)?;
    let params = cfg.params()?;
    let cmp = compare_norms(&fun, params, cfg.times()?)?;
    let r1 = params.s.floor() as u32 + 1;
    Ok(done(
        "lipnorm",
        cfg,
        json!({ "heat_seminorm": cmp.heat, "diff_seminorm": cmp.diff, "ratio": cmp.ratio,
            "diff_norm": lambda_s_norm_diff(&fun, params.s, r1)?, "difference_order": r1 }),
        Vec::new(),
    ))
}

fn cmd_ballavg(cfg: &RunConfig, base: &Path) -> Result<Artifacts, Failure> {
    let b = &cfg.ballavg;
    let xis = log_grid(b.xi_min, b.xi_max, b.xi_points);
    let mut table = Table::new(&["ell", "n", "xi", "m_quadrature", "error", "m_closed"]);
    let mut checks = Vec::new();
    for &ell in &b.ell {
        for &n in &b.n {
            for &xi in &xis {
                let q = m_ell(xi, ell, n)?;
                table.row(&[ell.to_string(), n.to_string(), f(xi), f(q.value), f(q.error), f(m_ell_closed(xi, ell, n))]);
            }
            checks.push(json!({
                "ell": ell, "n": n,
                "comparability": value(&comparability_bounds(ell, n, &xis)?),
                "positivity": value(&positivity_report(ell, n, &xis)?),
                "decay_slope": decay_slope(ell, n, 2, 8)?,
                "predicted_decay": -((n as f64 + 1.0) / 2.0),
            }));
        }
    }
    let fun = cfg.function.build(cfg.grid()?, base)?;
    let ts = log_grid(b.t_min, b.t_max, b.t_points);
    let mut approx = Vec::new();
    for &ell in &b.ell {
        let errs = ts.iter().map(|&t| approx_error(&fun, ell, t)).collect::<crate::Result<Vec<_>>>()?;
        approx.push(json!({ "ell": ell, "t": ts, "error": errs, "slope": approx_error_slope(&fun, ell, &ts)? }));
    }
    Ok(done(
        "ballavg",
        cfg,
        json!({ "multiplier_checks": checks, "approximation": approx }),
        vec![("ballavg.csv".into(), table.text)],
    ))
}

fn set_stats(a: &SpaceTimeSet) -> Value {
    let theta: Vec<f64> = theta_profile(a).iter().map(|g| g.iter().sum::<f64>() / g.len().max(1) as f64).collect();
    json!({ "points": a.count(), "mu": mu_measure(a), "carleson": carleson_m(a),
        "octave_counts": a.octave_counts(), "mean_theta": theta })
}

fn cmd_badset(cfg: &RunConfig, base: &Path) -> Result<Artifacts, Failure> {
    let fun = cfg.function.build(cfg.grid()?, base)?;
    let params = cfg.params()?;
    let times = cfg.times()?;
    let w = heat_deriv_field(&fun, params, times);
    let lam = w.envelope();
    let r1 = cfg.badset.r1.unwrap_or(params.s.floor() as u32 + 1);
    let m = modulus_field(&fun, r1, times)?;
    let lam_s = m.envelope(params.s);
    let mut rows = Vec::new();
    for &c in &cfg.badset.eps_fractions {
        let d = bad_set_d(&w, params.s, c * lam)?;
        let s_set = bad_set_s_from(&m, params.s, c * lam_s)?;
        rows.push(json!({ "fraction": c, "eps_d": c * lam, "d": set_stats(&d),
            "eps_s": c * lam_s, "s": set_stats(&s_set) }));
    }
    Ok(done(
        "badset",
        cfg,
        json!({ "envelope_d": lam, "envelope_s": lam_s, "difference_order": r1, "sets": rows }),
        Vec::new(),
    ))
}

fn cmd_sweep(cfg: &RunConfig, base: &Path) -> Result<Artifacts, Failure> {
    let fun = cfg.function.build(cfg.grid()?, base)?;
    let sys = cfg.wavelets()?;
    let w = heat_deriv_field(&fun, cfg.params()?, cfg.times()?);
    let mut table = Table::new(&["lattice", "eps", "norm", "norm_v0", "mu", "carleson"]);
    let mut out = Vec::new();
    for spec in &cfg.sweep.lattices {
        let sw = eps_sweep_field(&fun, &w, &sys, spec, cfg.sweep.points)?;
        for i in 0..sw.eps.len() {
            table.row(&[
                spec.kind.name().to_string(),
                f(sw.eps[i]),
                f(sw.norm[i]),
                f(sw.norm_v0[i]),
                f(sw.mu[i]),
                f(sw.carleson[i]),
            ]);
        }
        out.push(json!({ "lattice": value(spec), "sweep": value(&sw) }));
    }
    Ok(done("sweep", cfg, json!({ "sweeps": out }), vec![("sweep.csv".into(), table.text)]))
}

fn cmd_verify(cfg: &RunConfig, base: &Path, inject: bool) -> Result<Artifacts, Failure> {
    let fun = cfg.function.build(cfg.grid()?, base)?;
    let params = cfg.params()?;
    params.require_inclusion_range()?;
    let times = cfg.times()?;
    let v = &cfg.verify;
    let inject = inject || v.inject_violation;
    let w = heat_deriv_field(&fun, params, times);
    let lam = w.envelope();
    let p61 = verify_prop_61(&w, params.s, v.eps_fraction * lam, v.eps1_fraction * lam, &v.deltas, inject)?;
    let eps_s = v.eps_fraction * modulus_field(&fun, v.r1, times)?.envelope(params.s);
    let p62 = verify_prop_62(&fun, params, times, v.r1, eps_s, &v.r_grid, &v.c_grid)?;
    let p63 = verify_prop_63(&fun, params, times, v.ell, v.eps_fraction * lam, &v.r_grid, &v.c_grid)?;
    let clean = p61.best_delta.is_some() && p62.best.is_some() && p63.best.is_some();
    let mut art = done(
        "verify",
        cfg,
        json!({ "violations_found": !clean, "prop_6_1": value(&p61), "prop_6_2": value(&p62), "prop_6_3": value(&p63) }),
        Vec::new(),
    );
    if !clean {
        art.exit_code = EXIT_VIOLATIONS;
    }
    Ok(art)
}

fn cmd_distance(cfg: &RunConfig, base: &Path) -> Result<Artifacts, Failure> {
    let grid = cfg.grid()?;
    let fun = cfg.function.build(grid, base)?;
    let params = cfg.params()?;
    let times = cfg.times()?;
    let sys = cfg.wavelets()?;
    let d = &cfg.distance;
    let rep = distance_proxies(&fun, params, times, &sys, &d.spaces, d.tail_octaves)?;
    let r1 = params.s.floor() as u32 + 1;
    let g = match &d.smooth_part {
        Some(src) => src.build(grid, base)?,
        None => crate::grid::SampledFunction::constant(grid, 0.0),
    };
    let rest = fun.sub(&g)?;
    let max_level = d.max_level.unwrap_or(times.octaves().saturating_sub(3));
    let mut labels = vec!["smooth part".to_string()];
    let mut cands = vec![g.clone()];
    for l in 0..=max_level {
        labels.push(format!("truncation level {l}"));
        cands.push(g.add(&wavelet_truncation(&rest, &sys, l)?)?);
    }
    for &th in &d.thresholds {
        labels.push(format!("threshold {}", f(th)));
        cands.push(g.add(&threshold_projection(&rest, &sys, th)?)?);
    }
    let oracle = distance_upper_oracle(&fun, params.s, r1, &cands)?;
    let mut table = Table::new(&["space", "eps", "value", "tail"]);
    for p in &rep.proxies {
        for i in 0..rep.eps.len() {
            table.row(&[p.name.clone(), f(rep.eps[i]), f(p.values[i]), f(p.tail[i])]);
        }
    }
    Ok(done(
        "distance",
        cfg,
        json!({
            "proxies": value(&rep),
            "oracle": { "value": oracle.value, "best": labels[oracle.best], "difference_order": r1,
                "candidates": labels.iter().zip(&oracle.per_candidate)
                    .map(|(l, v)| json!({ "candidate": l, "norm": v })).collect::<Vec<_>>() },
            "seminorm": lambda_s_seminorm_diff(&fun, params.s, r1)?,
        }),
        vec![("distance.csv".into(), table.text)],
    ))
}

fn cmd_selftest(cfg: &RunConfig, inject: bool, only: &[u8]) -> Result<Artifacts, Failure> {
    let mut ids = only.to_vec();
    if ids.is_empty() {
        ids = cfg.selftest.only.clone();
    }
    if let Some(bad) = ids.iter().find(|i| !(1..=12).contains(*i)) {
        return Err(Failure::validation(format!("no criterion {bad}")));
    }
    let opts = SelftestOptions { inject_violation: inject, only: ids, seed: cfg.seed };
    let outcomes = selftest::run(&opts);
    let mut console: Vec<String> = outcomes.iter().map(|o| o.line()).collect();
    let passed = outcomes.iter().filter(|o| o.passed).count();
    console.push(format!("selftest: {passed} of {} criteria passed", outcomes.len()));
    let results: Vec<Value> = outcomes
        .iter()
        .map(|o| json!({ "id": o.id, "title": o.title, "passed": o.passed, "summary": o.summary,
            "violations": o.violations, "data": o.data }))
        .collect();
    let exit_code = if passed == outcomes.len() { EXIT_OK } else { EXIT_VIOLATIONS };
    Ok(Artifacts { document: document("selftest", cfg, json!({ "criteria": results })), tables: Vec::new(), console, exit_code })
}

/// Run a parsed command line and return its artifacts.
pub fn execute(cli: &Cli) -> Result<Artifacts, Failure> {
    let (cfg, base) = load_config(&cli.common)?;
    dispatch(&cli.command, &cfg, &base)
}

fn dispatch(command: &Command, cfg: &RunConfig, base: &Path) -> Result<Artifacts, Failure> {
    match command {
        Command::Kernel => cmd_kernel(cfg),
        Command::Semigroup => cmd_semigroup(cfg, base),
        Command::Lipnorm => cmd_lipnorm(cfg, base),
        Command::Ballavg => cmd_ballavg(cfg, base),
        Command::Badset => cmd_badset(cfg, base),
        Command::Sweep => cmd_sweep(cfg, base),
        Command::Verify { inject_violation } => cmd_verify(cfg, base, *inject_violation),
        Command::Distance => cmd_distance(cfg, base),
        Command::Selftest { inject_violation, only } => cmd_selftest(cfg, *inject_violation, only),
    }
}

/// Run a command by name on a TOML config held in memory; relative CSV
/// paths resolve against the working directory.
pub fn run_toml(command: &str, config: &str) -> Result<Artifacts, Failure> {
    let cmd = match command {
        "kernel" => Command::Kernel,
        "semigroup" => Command::Semigroup,
        "lipnorm" => Command::Lipnorm,
        "ballavg" => Command::Ballavg,
        "badset" => Command::Badset,
        "sweep" => Command::Sweep,
        "verify" => Command::Verify { inject_violation: false },
        "distance" => Command::Distance,
        "selftest" => Command::Selftest { inject_violation: false, only: Vec::new() },
        other => return Err(Failure::validation(format!("unknown command {other:?}"))),
    };
    let cfg = RunConfig::from_toml_str(config)?;
    cfg.validate()?;
    dispatch(&cmd, &cfg, Path::new("."))
}

/// Write all files through temporaries so a failure leaves no partial output.
fn write_outputs(dir: &Path, name: &str, art: &Artifacts) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::io(format!("cannot create {}: {e}", dir.display())))?;
    let mut files = vec![(format!("{name}.json"), to_json(&art.document))];
    files.extend(art.tables.iter().cloned());
    let mut staged = Vec::new();
    for (file, text) in &files {
        let tmp = dir.join(format!(".{file}.tmp"));
        if let Err(e) = std::fs::write(&tmp, text) {
            for (t, _) in &staged {
                let _ = std::fs::remove_file(t);
            }
            let _ = std::fs::remove_file(&tmp);
            return Err(Failure::io(format!("cannot write {}: {e}", tmp.display())));
        }
        staged.push((tmp, dir.join(file)));
    }
    for (tmp, dst) in &staged {
        std::fs::rename(tmp, dst).map_err(|e| Failure::io(format!("cannot write {}: {e}", dst.display())))?;
    }
    Ok(())
}

/// Run the CLI and return the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    if let Some(n) = cli.common.threads {
        if n == 0 {
            eprintln!("{}", Failure::validation("--threads must be positive").record());
            return EXIT_VALIDATION;
        }
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let name = cli.command.name();
    let art = match execute(&cli) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{}", e.record());
            return e.code;
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for line in &art.console {
        let _ = writeln!(out, "{line}");
    }
    match &cli.common.out {
        Some(dir) => {
            if let Err(e) = write_outputs(dir, name, &art) {
                eprintln!("{}", e.record());
                return e.code;
            }
        }
        None if art.console.is_empty() => {
            let _ = out.write_all(to_json(&art.document).as_bytes());
        }
        None => {}
    }
    art.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("fracheat").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(f64::NAN), "null");
        let text = to_json(&json!({ "x": 1.0 / 3.0, "n": 3 }));
        assert_eq!(text, "{\"n\":3,\"x\":3.3333333333333331e-1}\n");
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn overrides_apply_in_order() {
        let cli = parse(&["--set", "heat.alpha=1.5", "--set", "grid.size=512", "--s", "0.25", "lipnorm"]);
        let (cfg, _) = load_config(&cli.common).unwrap();
        assert_eq!(cfg.heat.alpha, 1.5);
        assert_eq!(cfg.heat.s, 0.25);
        assert_eq!(cfg.grid.size, 512);
        let cli = parse(&["--set", "heat.alpha=1.5", "--alpha", "0.5", "kernel"]);
        let (cfg, _) = load_config(&cli.common).unwrap();
        assert_eq!(cfg.heat.alpha, 0.5);
        assert_eq!(cfg.kernel.alpha, 0.5);
    }

    #[test]
    fn invalid_overrides_are_validation_errors() {
        for args in [&["--set", "grid.size=100", "kernel"][..], &["--set", "nokey", "kernel"], &["--alpha", "-1", "kernel"]] {
            let e = load_config(&parse(args).common).unwrap_err();
            assert_eq!(e.code, EXIT_VALIDATION, "{args:?}");
        }
    }

    #[test]
    fn kernel_poisson_row() {
        let cli = parse(&["--alpha", "1", "--n", "1", "--set", "kernel.radii=[0.0]", "--set", "kernel.decay_orders=[]", "kernel"]);
        let art = execute(&cli).unwrap();
        let k0 = art.document["results"]["values"][0]["value"].as_f64().unwrap();
        assert!((k0 - 1.0 / std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn numerical_errors_map_to_exit_three() {
        let f: Failure = Error::Numerical("x".into()).into();
        assert_eq!(f.code, EXIT_NUMERICAL);
        let f: Failure = Error::GridMismatch("x".into()).into();
        assert_eq!(f.code, EXIT_VALIDATION);
    }
}
