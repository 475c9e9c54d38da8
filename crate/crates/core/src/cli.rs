//! The `dp-laplace` command line. [`run`] is the whole program minus process
//! exit, so it can be driven from tests.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::composition::{
    composed_point_profile, eps_for_delta, homogeneous_profile, pld_kernel_from_profile,
    compose_profile_with_kernel, PointGuarantee, DEFAULT_BOOK_CAP,
};
use crate::core::{profile_from_pld, reverse_profile, rho_from_e, Pld, PrivacyProfile};
use crate::laplace::{profile_from_renyi_detailed, renyi_from_profile, BromwichConfig};
use crate::oracle::{convolve_plds, discretize_pld, grid_accountant};
use crate::spec::{CompositionSpec, Descriptor};
use crate::subsampling::{poisson_subsample_profile, SubsampleParams};
use crate::verify::{render, run_suite, Level};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_SPEC: i32 = 2;
pub const EXIT_METHOD: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;
pub const EXIT_EMPTY_ROC: i32 = 5;

#[derive(Parser)]
#[command(name = "dp-laplace", version, about = "Privacy profiles, Renyi curves and tight composition")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Grid {
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    eps_min: f64,
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    eps_max: f64,
    #[arg(long, default_value_t = 81)]
    steps: usize,
}

#[derive(Args, Clone)]
struct Bromwich {
    /// Real part of the inversion contour in the transform variable.
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    gamma: f64,
    /// Starting truncation of the contour; doubled until the tail settles.
    #[arg(long, default_value_t = 64.0)]
    omega_max: f64,
    #[arg(long, default_value_t = 1e-8)]
    quad_tol: f64,
}

#[derive(Args, Clone)]
struct SpecArg {
    /// Path to a JSON spec, an inline JSON document, or '-' for standard input.
    spec: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Recursion,
    Kernel,
    ClosedForm,
    Oracle,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Recursion => "recursion",
            Method::Kernel => "kernel",
            Method::ClosedForm => "closed-form",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Notion {
    Profile,
    Renyi,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    Remove,
    Add,
    Max,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the privacy profile of one mechanism.
    Profile {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        grid: Grid,
    },
    /// Tabulate the profile of a composition.
    Compose {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_enum, default_value_t = Method::Recursion)]
        method: Method,
        /// Lattice step for the oracle; atoms are rounded up onto it.
        #[arg(long)]
        grid_step: Option<f64>,
    },
    /// Smallest ε meeting a δ budget for k-fold repetition of the mechanisms.
    Calibrate {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        delta_budget: f64,
        /// Inclusive range such as 1..40, or a single k.
        #[arg(long, default_value = "1..10")]
        k_range: String,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long)]
        grid_step: Option<f64>,
    },
    /// Convert between privacy profiles and Renyi curves.
    Convert {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, value_enum)]
        from: Notion,
        #[arg(long, value_enum)]
        to: Notion,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
        q_min: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        q_max: f64,
        /// Emit E along the order line Re(q) = value instead of real orders.
        #[arg(long, allow_negative_numbers = true)]
        complex_line: Option<f64>,
        #[command(flatten)]
        bromwich: Bromwich,
    },
    /// Profile of a Poisson-subsampled mechanism.
    Subsample {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = Direction::Remove)]
        direction: Direction,
        #[command(flatten)]
        grid: Grid,
    },
    /// Run the invariant suites.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    msg: String,
}

impl Failure {
    fn new(code: i32, msg: impl Into<String>) -> Self {
        Self { code, msg: msg.into() }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidDistribution(_) | Error::InvalidParameter(_) | Error::DegenerateKappa(_) => EXIT_SPEC,
        Error::EmptyRoc => EXIT_EMPTY_ROC,
        Error::BookOverflow { .. } | Error::SupportOverflow { .. } => EXIT_RESOURCE,
        Error::GridMismatch(_) | Error::Reconstruction(_) => EXIT_METHOD,
        _ => EXIT_VERIFY,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), msg: e.to_string() }
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

/// Formats a float with 17 significant digits; non-finite values as inf/-inf/nan.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(command: &str) -> Self {
        Self { text: format!("# dp-laplace {command}\n") }
    }

    fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.text.push_str(&format!("# {key}: {value}\n"));
    }

    fn header(&mut self, cols: &[&str]) {
        self.text.push_str(&cols.join(","));
        self.text.push('\n');
    }

    fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }
}

fn read_spec(arg: &SpecArg) -> CmdResult<CompositionSpec> {
    let text = match arg.spec.as_deref() {
        None | Some("-") => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::new(EXIT_SPEC, format!("reading standard input: {e}")))?;
            s
        }
        Some(s) if s.trim_start().starts_with('{') => s.to_string(),
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Failure::new(EXIT_SPEC, format!("reading {path}: {e}")))?,
    };
    CompositionSpec::parse(&text).map_err(|e| Failure::new(EXIT_SPEC, e.to_string()))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
}

fn eps_grid(g: &Grid) -> CmdResult<Vec<f64>> {
    if !(g.eps_min < g.eps_max) || g.steps < 2 || !g.eps_min.is_finite() || !g.eps_max.is_finite() {
        return Err(Failure::new(EXIT_SPEC, "need eps-min < eps-max and steps >= 2"));
    }
    Ok(linspace(g.eps_min, g.eps_max, g.steps))
}

fn profile_csv(csv: &mut Csv, eps: &[f64], f: impl Fn(f64) -> f64) {
    csv.header(&["epsilon", "delta"]);
    for &e in eps {
        csv.row(&[fmt_f64(e), fmt_f64(f(e))]);
    }
}

/// A composed curve from any of the methods.
struct Composed {
    eval: Box<dyn Fn(f64) -> f64>,
    upper: f64,
    notes: Vec<(String, String)>,
}

impl Composed {
    fn from_profile(p: PrivacyProfile) -> Self {
        let upper = p.window().1;
        Composed { eval: Box::new(move |e| p.eval(e)), upper, notes: vec![] }
    }
}

fn point_guarantees(ds: &[Descriptor], method: Method) -> CmdResult<Vec<PointGuarantee>> {
    ds.iter()
        .map(|d| d.point_guarantee())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Failure::new(EXIT_METHOD, format!("method {} needs point guarantees only", method.name())))
}

fn compose(spec: &CompositionSpec, reps: u32, method: Method, grid_step: Option<f64>) -> CmdResult<Composed> {
    let block = spec.expanded();
    let ds: Vec<Descriptor> = (0..reps).flat_map(|_| block.iter().cloned()).collect();
    match method {
        Method::Recursion => {
            let gs = point_guarantees(&ds, method)?;
            Ok(Composed::from_profile(composed_point_profile(&gs, DEFAULT_BOOK_CAP)?))
        }
        Method::ClosedForm => {
            let gs = point_guarantees(&ds, method)?;
            if gs.iter().any(|g| *g != gs[0]) {
                return Err(Failure::new(EXIT_METHOD, "closed-form needs identical point guarantees"));
            }
            Ok(Composed::from_profile(homogeneous_profile(gs[0].eps, gs[0].delta, gs.len() as u32)?))
        }
        Method::Kernel => {
            let first = ds[0].profile()?;
            let mut cache: Vec<(Descriptor, Pld)> = Vec::new();
            let mut acc: Option<Pld> = None;
            for d in &ds[1..] {
                let kernel = match cache.iter().find(|c| c.0 == *d) {
                    Some(c) => c.1.clone(),
                    None => {
                        let k = pld_kernel_from_profile(&d.profile()?).map_err(|e| {
                            Failure::new(EXIT_METHOD, format!("kernel discretization unusable: {e}"))
                        })?;
                        cache.push((d.clone(), k.clone()));
                        k
                    }
                };
                acc = Some(match acc {
                    None => kernel,
                    Some(a) => convolve_plds(&a, &kernel)?,
                });
            }
            Ok(Composed::from_profile(match acc {
                None => first,
                Some(k) => compose_profile_with_kernel(&first, &k),
            }))
        }
        Method::Oracle => {
            let default_step = 1e-3;
            let step = grid_step.unwrap_or(default_step);
            let entries: Vec<(Descriptor, u32)> =
                spec.mechanisms.iter().map(|e| (e.descriptor.clone(), e.count() * reps)).collect();
            let mut kernels: Vec<Pld> = entries
                .iter()
                .map(|(d, _)| d.oracle_pld(step))
                .collect::<crate::Result<_>>()
                .map_err(|e| Failure::new(EXIT_METHOD, format!("oracle unavailable: {e}")))?;
            if grid_step.is_some() || kernels.iter().any(|k| k.grid().is_some()) {
                kernels = kernels.iter().map(|k| discretize_pld(k, step)).collect::<crate::Result<_>>()?;
            }
            let mut total = Pld::point_mass(0.0);
            let mut bound = 0.0;
            let mut mass_error = 0.0;
            for (k, (_, n)) in kernels.iter().zip(&entries) {
                let rep = grid_accountant(k, *n, &[], None)?;
                bound += rep.error_bound + *n as f64 * if k.grid().is_some() || grid_step.is_some() { step } else { 0.0 };
                mass_error += rep.mass_error;
                total = convolve_plds(&total, &rep.pld)?;
            }
            let upper = total.support().map_or(0.0, |s| s.1);
            let notes = vec![
                ("grid_step".to_string(), if kernels.iter().any(|k| k.grid().is_some()) || grid_step.is_some() {
                    fmt_f64(step)
                } else {
                    "exact".to_string()
                }),
                ("error_heuristic".to_string(), fmt_f64(bound)),
                ("mass_error".to_string(), fmt_f64(mass_error)),
            ];
            Ok(Composed { eval: Box::new(move |e| profile_from_pld(&total, e)), upper, notes })
        }
    }
}

fn parse_k_range(s: &str) -> CmdResult<(u32, u32)> {
    let bad = || Failure::new(EXIT_SPEC, format!("bad k-range '{s}'"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (s, s),
    };
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn default_method(spec: &CompositionSpec) -> Method {
    let ds = spec.expanded();
    match ds.iter().map(|d| d.point_guarantee()).collect::<Option<Vec<_>>>() {
        Some(gs) if gs.iter().all(|g| *g == gs[0]) => Method::ClosedForm,
        Some(_) => Method::Recursion,
        None => Method::Kernel,
    }
}

fn cmd_calibrate(
    spec: &CompositionSpec,
    budget: f64,
    k_range: &str,
    method: Option<Method>,
    grid_step: Option<f64>,
) -> CmdResult<Csv> {
    if !(budget > 0.0 && budget < 1.0) {
        return Err(Failure::new(EXIT_SPEC, "delta-budget must lie in (0, 1)"));
    }
    let (k0, k1) = parse_k_range(k_range)?;
    let method = method.unwrap_or_else(|| default_method(spec));
    let mut csv = Csv::new("calibrate");
    csv.meta("spec", spec.to_json());
    csv.meta("method", method.name());
    csv.meta("delta_budget", fmt_f64(budget));
    csv.header(&["k", "epsilon"]);
    let lo = (-budget).ln_1p() - 1.0;
    for k in k0..=k1 {
        let c = compose(spec, k, method, grid_step)?;
        let hi = c.upper.max(0.0) + 1.0;
        let eps = match eps_for_delta(&c.eval, budget, (lo, hi)) {
            Ok(e) => fmt_f64(e),
            Err(Error::NoCrossing { .. }) => "inf".into(),
            Err(e) => return Err(e.into()),
        };
        csv.row(&[k.to_string(), eps]);
    }
    Ok(csv)
}

fn cmd_convert(
    spec: &CompositionSpec,
    from: Notion,
    to: Notion,
    grid: &Grid,
    q_range: (f64, f64),
    complex_line: Option<f64>,
    b: &Bromwich,
) -> CmdResult<Csv> {
    let d = spec.single()?;
    let mut csv = Csv::new("convert");
    csv.meta("spec", spec.to_json());
    match (from, to) {
        (Notion::Profile, Notion::Renyi) => {
            let prof = d.profile()?;
            if crate::laplace::estimate_roc(&prof).is_empty() {
                return Err(Error::EmptyRoc.into());
            }
            csv.meta("route", "numeric transform of the profile");
            if let Some(re) = complex_line {
                csv.meta("order_line", format!("Re(q) = {}", fmt_f64(re)));
                csv.header(&["omega", "re_E", "im_E"]);
                for w in linspace(0.0, b.omega_max, grid.steps.max(2)) {
                    let e = renyi_from_profile(&prof, Complex64::new(re, w));
                    let (x, y) = match e {
                        Ok(z) => (z.re, z.im),
                        Err(Error::Divergence(_)) => (f64::INFINITY, f64::NAN),
                        Err(_) => (f64::NAN, f64::NAN),
                    };
                    csv.row(&[fmt_f64(w), fmt_f64(x), fmt_f64(y)]);
                }
                return Ok(csv);
            }
            let (q0, q1) = q_range;
            if !(q0 < q1) || grid.steps < 2 {
                return Err(Failure::new(EXIT_SPEC, "need q-min < q-max and steps >= 2"));
            }
            csv.header(&["q", "rho"]);
            for q in linspace(q0, q1, grid.steps) {
                let qc = Complex64::new(q, 0.0);
                let rho = match renyi_from_profile(&prof, qc).and_then(|e| rho_from_e(e, qc)) {
                    Ok(r) => r.re,
                    Err(Error::Divergence(_)) => f64::INFINITY,
                    Err(_) => f64::NAN,
                };
                csv.row(&[fmt_f64(q), fmt_f64(rho)]);
            }
            Ok(csv)
        }
        (Notion::Renyi, Notion::Profile) => {
            let curve = d.renyi()?;
            let cfg = BromwichConfig { gamma: b.gamma, omega_max: b.omega_max, quad_tol: b.quad_tol };
            cfg.validate()?;
            csv.meta("gamma", fmt_f64(cfg.gamma));
            csv.meta("omega_max", fmt_f64(cfg.omega_max));
            csv.meta("quad_tol", fmt_f64(cfg.quad_tol));
            let eps = eps_grid(grid)?;
            csv.header(&["epsilon", "delta"]);
            for e in eps {
                let r = profile_from_renyi_detailed(&curve, e, &cfg)?;
                csv.row(&[fmt_f64(e), fmt_f64(r.delta)]);
            }
            Ok(csv)
        }
        _ => Err(Failure::new(EXIT_SPEC, "--from and --to must differ")),
    }
}

fn dispatch(cmd: Cmd, out: &mut dyn Write) -> CmdResult<i32> {
    let (csv, output) = match cmd {
        Cmd::Profile { spec, grid } => {
            let s = read_spec(&spec)?;
            let d = s.single()?;
            let prof = d.profile()?;
            let eps = eps_grid(&grid)?;
            let mut csv = Csv::new("profile");
            csv.meta("spec", s.to_json());
            profile_csv(&mut csv, &eps, |e| prof.eval(e));
            (csv, spec.output)
        }
        Cmd::Compose { spec, grid, method, grid_step } => {
            let s = read_spec(&spec)?;
            let eps = eps_grid(&grid)?;
            let c = compose(&s, 1, method, grid_step)?;
            let mut csv = Csv::new("compose");
            csv.meta("spec", s.to_json());
            csv.meta("method", method.name());
            for (k, v) in &c.notes {
                csv.meta(k, v);
            }
            profile_csv(&mut csv, &eps, &c.eval);
            (csv, spec.output)
        }
        Cmd::Calibrate { spec, delta_budget, k_range, method, grid_step } => {
            let s = read_spec(&spec)?;
            (cmd_calibrate(&s, delta_budget, &k_range, method, grid_step)?, spec.output)
        }
        Cmd::Convert { spec, from, to, grid, q_min, q_max, complex_line, bromwich } => {
            let s = read_spec(&spec)?;
            (cmd_convert(&s, from, to, &grid, (q_min, q_max), complex_line, &bromwich)?, spec.output)
        }
        Cmd::Subsample { spec, lambda, direction, grid } => {
            let s = read_spec(&spec)?;
            let inner = s.single()?.profile()?;
            let params = SubsampleParams::new(lambda)?;
            let fwd = poisson_subsample_profile(&inner, params)?;
            let rev = reverse_profile(&fwd);
            let eps = eps_grid(&grid)?;
            let mut csv = Csv::new("subsample");
            csv.meta("spec", s.to_json());
            csv.meta("lambda", fmt_f64(lambda));
            let dir = match direction {
                Direction::Remove => "remove",
                Direction::Add => "add",
                Direction::Max => "max",
            };
            csv.meta("direction", dir);
            profile_csv(&mut csv, &eps, |e| match direction {
                Direction::Remove => fwd.eval(e),
                Direction::Add => rev.eval(e),
                Direction::Max => fwd.eval(e).max(rev.eval(e)),
            });
            (csv, spec.output)
        }
        Cmd::Verify { seed, level } => {
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            let checks = run_suite(level, seed);
            out.write_all(render(&checks).as_bytes()).map_err(|e| Failure::new(EXIT_VERIFY, e.to_string()))?;
            return Ok(if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_VERIFY });
        }
    };
    match output {
        Some(path) => std::fs::write(&path, csv.text)
            .map_err(|e| Failure::new(EXIT_VERIFY, format!("writing {}: {e}", path.display())))?,
        None => out.write_all(csv.text.as_bytes()).map_err(|e| Failure::new(EXIT_VERIFY, e.to_string()))?,
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. CSV and reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SPEC } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match dispatch(cli.cmd, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.msg);
            f.code
        }
    }
}
