use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use elliptika::asymp::error_law;
use elliptika::charsum::{kl_bound, kl_bruteforce, kl_factor, CharSumParams};
use elliptika::elliptic::{
    envelope_grid, make_theta, scan, scan_csv, sigma_xi, spread_primes, EnvelopeKind, Method, Term5Sign,
    TruncationPolicy, CSV_SCHEMA,
};
use elliptika::oscint::{fourier_singular, FourierJob, Region};
use elliptika::specfun::{MellinFunction, F, H0, H1};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_AUDIT: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "elliptika", version, about = "Character sums, smoothing functions, oscillatory integrals and the elliptic-term scan")]
struct Cli {
    /// worker threads (default: available parallelism)
    #[arg(long, global = true, env = "ELLIPTIKA_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// write the artifact here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// exit 0 even when the truncation audit fails
    #[arg(long, global = true)]
    allow_dirty: bool,
    /// re-run the config echoed in a previous JSON artifact
    #[arg(long)]
    replay: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
enum Command {
    /// one generalised Kloosterman sum
    Klsum(KlsumArgs),
    /// factor vs brute force over a box of parameters
    Klgrid(KlgridArgs),
    /// F, H0 or H1 at the given points
    Specfn(SpecfnArgs),
    /// one singular oscillatory integral of the test profile
    Fourier(FourierArgs),
    /// error of the truncated expansion along D at fixed C²D
    ExpansionCheck(ExpansionArgs),
    /// oracle Fourier factors against a region envelope
    Envelope(EnvelopeArgs),
    /// Σ(□) and Σ(ξ≠0) at one prime
    Sigma(SigmaArgs),
    /// Σ over spread primes with the log-log slope
    Scan(ScanArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KlMethod {
    Brute,
    Factor,
    Both,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct KlsumArgs {
    #[arg(long)]
    l: u64,
    #[arg(long)]
    f: u64,
    #[arg(long, allow_hyphen_values = true)]
    xi: i64,
    #[arg(long, allow_hyphen_values = true)]
    n: i64,
    #[arg(long, value_enum, default_value_t = KlMethod::Both)]
    method: KlMethod,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct KlgridArgs {
    #[arg(long, default_value_t = 12)]
    l_max: u64,
    #[arg(long, default_value_t = 12)]
    f_max: u64,
    #[arg(long, default_value_t = 8)]
    xi_max: i64,
    #[arg(long, default_value_t = 10)]
    n_max: i64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
enum PhiName {
    #[value(name = "F")]
    F,
    #[value(name = "H0")]
    H0,
    #[value(name = "H1")]
    H1,
}

impl PhiName {
    fn get(self) -> &'static dyn MellinFunction {
        match self {
            PhiName::F => &F,
            PhiName::H0 => &H0,
            PhiName::H1 => &H1,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct SpecfnArgs {
    #[arg(long = "fn", value_enum)]
    #[serde(rename = "fn")]
    func: PhiName,
    /// comma-separated points
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RegionName {
    Inside,
    Outside,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct FourierArgs {
    #[arg(long)]
    c: f64,
    #[arg(long, allow_hyphen_values = true)]
    d: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, value_enum, default_value_t = RegionName::Inside)]
    region: RegionName,
    #[arg(long, value_enum, default_value_t = PhiName::F)]
    phi: PhiName,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct ExpansionArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, default_value_t = 0)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    c2d: f64,
    #[arg(long, value_enum, default_value_t = RegionName::Inside)]
    region: RegionName,
    #[arg(long, value_delimiter = ',', default_values_t = vec![8.0, 16.0, 32.0, 64.0, 128.0])]
    d: Vec<f64>,
    #[arg(long, value_enum, default_value_t = PhiName::F)]
    phi: PhiName,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum EnvelopeName {
    Small,
    Large,
    Smooth,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct EnvelopeArgs {
    #[arg(long, default_value_t = 10007)]
    p: u64,
    #[arg(long, value_enum, default_value_t = EnvelopeName::Small)]
    kind: EnvelopeName,
    /// decay order N of the large-region envelope
    #[arg(long = "order", default_value_t = 2)]
    order: u32,
    /// M and N1 of the θ^{neg} envelope
    #[arg(long, default_value_t = 2)]
    m: u32,
    #[arg(long, default_value_t = 0)]
    n1: u32,
    #[arg(long)]
    refine: bool,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MethodName {
    Oracle,
    Expansion,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct PolicyArgs {
    #[arg(long, value_enum, default_value_t = MethodName::Oracle)]
    method: MethodName,
    /// expansion order M for --method expansion
    #[arg(long, default_value_t = 2)]
    m_order: usize,
    /// smallest |D| handed to the expansion
    #[arg(long, default_value_t = 4.0)]
    min_d: f64,
    #[arg(long, value_enum, default_value_t = Term5Name::Literal)]
    term5: Term5Name,
    #[arg(long, default_value_t = TruncationPolicy::default().lambda)]
    lambda: f64,
    #[arg(long, default_value_t = TruncationPolicy::default().phi)]
    phi: f64,
    #[arg(long, default_value_t = TruncationPolicy::default().chi0)]
    chi0: f64,
    #[arg(long, default_value_t = TruncationPolicy::default().chi)]
    chi: f64,
    #[arg(long, default_value_t = TruncationPolicy::default().region_split)]
    region_split: f64,
    #[arg(long, default_value_t = TruncationPolicy::default().tail_tol)]
    tail_tol: f64,
    #[arg(long, default_value_t = TruncationPolicy::default().quad_tol)]
    quad_tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Term5Name {
    Literal,
    Matched,
}

impl PolicyArgs {
    fn policy(&self) -> TruncationPolicy {
        TruncationPolicy {
            lambda: self.lambda,
            phi: self.phi,
            chi0: self.chi0,
            chi: self.chi,
            region_split: self.region_split,
            tail_tol: self.tail_tol,
            quad_tol: self.quad_tol,
        }
    }

    fn method(&self) -> Method {
        match self.method {
            MethodName::Oracle => Method::Oracle,
            MethodName::Expansion => Method::Expansion { m_order: self.m_order, min_d: self.min_d },
        }
    }

    fn term5(&self) -> Term5Sign {
        match self.term5 {
            Term5Name::Literal => Term5Sign::Literal,
            Term5Name::Matched => Term5Sign::Matched,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct SigmaArgs {
    #[arg(long)]
    p: u64,
    #[command(flatten)]
    #[serde(flatten)]
    policy: PolicyArgs,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct ScanArgs {
    /// prime range a..b
    #[arg(long, default_value = "100..2000")]
    primes: String,
    /// number of log-spread primes taken from the range
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[command(flatten)]
    #[serde(flatten)]
    policy: PolicyArgs,
}

/// The resolved run: what every artifact echoes and `--replay` reads back.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    command: String,
    params: Value,
    output_path: Option<PathBuf>,
    format: Format,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, kind: "config", message: msg.into() }
    }
}

impl From<elliptika::Error> for Failure {
    fn from(e: elliptika::Error) -> Self {
        if e.is_config() {
            Failure { code: EXIT_CONFIG, kind: "config", message: e.to_string() }
        } else {
            Failure { code: EXIT_NUMERIC, kind: "numeric", message: e.to_string() }
        }
    }
}

struct Artifact {
    json: Value,
    /// header line and rows, without the schema/config comments
    csv: String,
    /// exit code after a successful write (0 or the audit code)
    code: u8,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return fail(Failure::config(e.to_string().trim().to_string()));
        }
    };
    match real_main(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    let err = json!({ "error": { "kind": f.kind, "message": f.message, "exit_code": f.code } });
    eprintln!("{err}");
    ExitCode::from(f.code)
}

fn real_main(cli: Cli) -> Result<u8, Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
    }
    let config = match (&cli.replay, &cli.command) {
        (Some(path), None) => replay_config(path)?,
        (None, Some(cmd)) => {
            let tagged = serde_json::to_value(cmd).map_err(|e| Failure::config(e.to_string()))?;
            RunConfig {
                command: tagged["command"].as_str().unwrap_or_default().to_string(),
                params: tagged["params"].clone(),
                output_path: cli.output.clone(),
                format: cli.format,
            }
        }
        (Some(_), Some(_)) => return Err(Failure::config("--replay takes no subcommand")),
        (None, None) => return Err(Failure::config("no command given (try --help)")),
    };
    let cmd = resolve(&config)?;
    let art = run(&cmd, cli.allow_dirty)?;
    let text = render(&config, &art);
    match &config.output_path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::config(format!("cannot write {}: {e}", p.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::config(e.to_string()))?;
        }
    }
    if art.code == EXIT_AUDIT {
        eprintln!("{}", json!({ "error": { "kind": "audit", "message": "truncation audit failed", "exit_code": EXIT_AUDIT } }));
    }
    Ok(art.code)
}

fn replay_config(path: &PathBuf) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Failure::config(format!("replay file is not JSON: {e}")))?;
    let cfg = v.get("config").cloned().unwrap_or(v);
    serde_json::from_value(cfg).map_err(|e| Failure::config(format!("bad config: {e}")))
}

/// Parses the params of a config, rejecting keys the command does not know.
fn resolve(config: &RunConfig) -> Result<Command, Failure> {
    let tagged = json!({ "command": config.command, "params": config.params });
    let cmd: Command = serde_json::from_value(tagged).map_err(|e| Failure::config(format!("bad config: {e}")))?;
    let back = serde_json::to_value(&cmd).map_err(|e| Failure::config(e.to_string()))?;
    if let (Some(given), Some(known)) = (config.params.as_object(), back["params"].as_object()) {
        if let Some(k) = given.keys().find(|k| !known.contains_key(*k)) {
            return Err(Failure::config(format!("unknown key '{k}' for command {}", config.command)));
        }
    }
    Ok(cmd)
}

fn render(config: &RunConfig, art: &Artifact) -> String {
    let cfg = serde_json::to_value(config).expect("config serialises");
    match config.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json!({
                "schema": CSV_SCHEMA.trim_start_matches("# "),
                "config": cfg,
                "result": art.json,
            }))
            .expect("json");
            s.push('\n');
            s
        }
        Format::Csv => format!("{CSV_SCHEMA}\n# config: {cfg}\n{}", art.csv),
    }
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
}

fn run(cmd: &Command, allow_dirty: bool) -> Result<Artifact, Failure> {
    match cmd {
        Command::Klsum(a) => klsum(a),
        Command::Klgrid(a) => klgrid(a),
        Command::Specfn(a) => specfn(a),
        Command::Fourier(a) => fourier(a),
        Command::ExpansionCheck(a) => expansion_check(a),
        Command::Envelope(a) => envelope(a),
        Command::Sigma(a) => sigma(a, allow_dirty),
        Command::Scan(a) => scan_cmd(a, allow_dirty),
    }
}

fn klsum(a: &KlsumArgs) -> Result<Artifact, Failure> {
    let params = CharSumParams::new(a.l, a.f, a.xi, a.n)?;
    let mut out = serde_json::Map::new();
    let mut rows = Vec::new();
    let mut vals = Vec::new();
    if matches!(a.method, KlMethod::Factor | KlMethod::Both) {
        let v = kl_factor(&params)?;
        out.insert("factor".into(), json!([v.re, v.im]));
        rows.push(vec!["factor".to_string(), v.re.to_string(), v.im.to_string()]);
        vals.push(v);
    }
    if matches!(a.method, KlMethod::Brute | KlMethod::Both) {
        let v = kl_bruteforce(&params)?;
        out.insert("brute".into(), json!([v.re, v.im]));
        rows.push(vec!["brute".to_string(), v.re.to_string(), v.im.to_string()]);
        vals.push(v);
    }
    if vals.len() == 2 {
        out.insert("diff".into(), json!((vals[0] - vals[1]).norm()));
    }
    out.insert("bound".into(), json!(kl_bound(&params)));
    Ok(Artifact { json: Value::Object(out), csv: csv_table(&["method", "re", "im"], &rows), code: 0 })
}

fn klgrid(a: &KlgridArgs) -> Result<Artifact, Failure> {
    if a.l_max == 0 || a.f_max == 0 || a.xi_max < 0 || a.n_max < 1 {
        return Err(Failure::config("klgrid needs l_max, f_max, n_max ≥ 1 and xi_max ≥ 0"));
    }
    let mut cases = 0u64;
    let mut max_diff: f64 = 0.0;
    let mut bound_violations = 0u64;
    let mut rows = Vec::new();
    for l in 1..=a.l_max {
        for f in 1..=a.f_max {
            let mut worst: f64 = 0.0;
            for xi in -a.xi_max..=a.xi_max {
                for n in (-a.n_max..=a.n_max).filter(|&n| n != 0) {
                    let p = CharSumParams::new(l, f, xi, n)?;
                    let fa = kl_factor(&p)?;
                    let br = kl_bruteforce(&p)?;
                    let d = (fa - br).norm();
                    worst = worst.max(d);
                    if br.norm() > kl_bound(&p) + 1e-9 {
                        bound_violations += 1;
                    }
                    cases += 1;
                }
            }
            max_diff = max_diff.max(worst);
            rows.push(vec![l.to_string(), f.to_string(), format!("{worst:e}")]);
        }
    }
    let ok = max_diff < a.tol && bound_violations == 0;
    let json = json!({ "cases": cases, "max_diff": max_diff, "bound_violations": bound_violations, "passed": ok });
    Ok(Artifact { json, csv: csv_table(&["l", "f", "max_diff"], &rows), code: if ok { 0 } else { EXIT_NUMERIC } })
}

fn specfn(a: &SpecfnArgs) -> Result<Artifact, Failure> {
    let phi = a.func.get();
    let mut vals = Vec::new();
    for &x in &a.x {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Failure::config(format!("x must be finite and ≥ 0, got {x}")));
        }
        vals.push((x, phi.eval(x)));
    }
    let rows: Vec<Vec<String>> = vals.iter().map(|(x, v)| vec![x.to_string(), v.to_string()]).collect();
    let json = json!({ "fn": phi.name(), "values": vals.iter().map(|(x, v)| json!({"x": x, "value": v})).collect::<Vec<_>>() });
    Ok(Artifact { json, csv: csv_table(&["x", "value"], &rows), code: 0 })
}

fn fourier(a: &FourierArgs) -> Result<Artifact, Failure> {
    let outside = a.region == RegionName::Outside;
    let h = elliptika::asymp::law_profile(a.a, outside);
    let region = if outside { Region::Outside } else { Region::Inside };
    let job = FourierJob { c: a.c, d: a.d, a: a.a, region, h: &h, phi: a.phi.get(), tol: a.tol, radius: 3.0 };
    let v = fourier_singular(&job)?;
    let json = json!({ "re": v.value.re, "im": v.value.im, "err_estimate": v.err_estimate });
    let rows = vec![vec![v.value.re.to_string(), v.value.im.to_string(), v.err_estimate.to_string()]];
    Ok(Artifact { json, csv: csv_table(&["re", "im", "err_estimate"], &rows), code: 0 })
}

fn expansion_check(a: &ExpansionArgs) -> Result<Artifact, Failure> {
    let r = error_law(a.a, a.m, a.c2d, a.region == RegionName::Outside, &a.d, a.phi.get(), a.tol)?;
    let rows: Vec<Vec<String>> =
        r.rows.iter().map(|w| vec![w.d.to_string(), w.c.to_string(), w.error.to_string()]).collect();
    let mut csv = csv_table(&["d", "c", "error"], &rows);
    csv.push_str(&format!(
        "# slope={} expected={}\n",
        r.slope.map_or("none".to_string(), |s| format!("{s:.6}")),
        r.expected
    ));
    Ok(Artifact { json: serde_json::to_value(&r).expect("json"), csv, code: 0 })
}

fn envelope(a: &EnvelopeArgs) -> Result<Artifact, Failure> {
    let kind = match a.kind {
        EnvelopeName::Small => EnvelopeKind::SmallRegion,
        EnvelopeName::Large => EnvelopeKind::LargeRegion { n: a.order },
        EnvelopeName::Smooth => EnvelopeKind::Smooth { m: a.m, n1: a.n1 },
    };
    let grid = envelope_grid(a.p, kind, a.refine)?;
    let r = elliptika::elliptic::envelope_check(a.p, &make_theta(), &grid, kind, a.tol)?;
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|w| {
            vec![
                w.l.to_string(),
                w.f.to_string(),
                w.xi.to_string(),
                w.row.to_string(),
                format!("{:e}", w.value),
                format!("{:e}", w.envelope),
                format!("{:e}", w.ratio),
            ]
        })
        .collect();
    let csv = csv_table(&["l", "f", "xi", "row", "value", "envelope", "ratio"], &rows);
    Ok(Artifact { json: serde_json::to_value(&r).expect("json"), csv, code: 0 })
}

fn sigma(a: &SigmaArgs, allow_dirty: bool) -> Result<Artifact, Failure> {
    let r = sigma_xi(a.p, &make_theta(), &a.policy.policy(), a.policy.method(), a.policy.term5())?;
    let code = if r.truncation_audit.passed || allow_dirty { 0 } else { EXIT_AUDIT };
    let csv = format!("{}\n{}", elliptika::elliptic::CSV_COLUMNS, elliptika::elliptic::csv_rows(std::slice::from_ref(&r)));
    Ok(Artifact { json: serde_json::to_value(&r).expect("json"), csv, code })
}

fn parse_range(s: &str) -> Result<(u64, u64), Failure> {
    let (a, b) = s.split_once("..").ok_or_else(|| Failure::config(format!("--primes wants a..b, got {s}")))?;
    let lo: u64 = a.trim().parse().map_err(|_| Failure::config(format!("bad range start {a}")))?;
    let hi: u64 = b.trim().parse().map_err(|_| Failure::config(format!("bad range end {b}")))?;
    if lo >= hi {
        return Err(Failure::config("empty prime range"));
    }
    Ok((lo, hi))
}

fn scan_cmd(a: &ScanArgs, allow_dirty: bool) -> Result<Artifact, Failure> {
    let (lo, hi) = parse_range(&a.primes)?;
    let primes = spread_primes(lo, hi, a.count);
    let r = scan(&primes, &make_theta(), &a.policy.policy(), a.policy.method())?;
    let code = if r.audit_failures.is_empty() || allow_dirty { 0 } else { EXIT_AUDIT };
    // drop the schema and config lines; render() writes the full config
    let csv: String = scan_csv(&r, "").lines().skip(2).map(|l| format!("{l}\n")).collect();
    Ok(Artifact { json: serde_json::to_value(&r).expect("json"), csv, code })
}
