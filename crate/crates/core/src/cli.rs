//! Batch front end: job configs, dispatch to the engines and versioned JSON
//! reports.
//!
//! Exit codes: 0 finite or pass, 2 divergent or fail, 3 inconclusive, 1 usage.

use crate::error::{set_budget_override, Error, Result};
use crate::geometry::{DiskPoint, Space, SpaceParams};
use crate::operators::{
    fock_product_criterion, invertibility_criterion, product_invertibility_evidence, sarason_fock_classifier,
    weighted_opnorm, CriterionOptions, CriterionVerdict, ProjectionKind,
};
use crate::quad::Convergence;
use crate::reverse_holder::{rh_certificate, theorem51_samples, verify_theorem51};
use crate::symbols::Symbol;
use crate::transforms::{berezin, heat_tilde, poisson_hat, twisted_berezin, QuadratureGrid};
use crate::weight_classes::{
    bmo_diagnostics, characteristic, power_weight_oracle, ClassKind, ClassSpec, EngineOptions, PlaneFn, PowerVariant,
    Verdict,
};
use crate::C64;
use clap::Parser;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::Path;

pub const REPORT_SCHEMA: &str = "weightlab.report/1";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Transform,
    #[default]
    Characteristic,
    ClassifyPower,
    Criterion,
    FockSarason,
    Opnorm,
    RhCertificate,
    #[serde(rename = "verify-51")]
    Verify51,
    Bmo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceName {
    #[default]
    Bergman,
    Hardy,
    Fock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformKind {
    #[default]
    Berezin,
    Twisted,
    Poisson,
    Heat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassName {
    ApArcs,
    #[default]
    Bpgamma,
    Apr,
    ApInvariant,
    BpgammaInvariant,
    BerezinBpgamma,
    PoissonAp,
    Heat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpKind {
    FockP,
    #[default]
    FockH,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BmoFunction {
    #[default]
    Re,
    LogAbs,
}

/// One job. Every field has a default, so `{}` is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobConfig {
    pub command: Command,
    pub space: SpaceName,
    pub n: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub p: f64,
    pub class: ClassName,
    pub r: f64,
    pub heat_alpha: f64,
    pub heat_beta: f64,
    pub weight: String,
    pub f: String,
    pub g: String,
    pub transform: TransformKind,
    /// Evaluation point: `[re, im]` on the disk, real coordinates on ℂⁿ.
    pub z: Vec<f64>,
    pub s: f64,
    pub t: f64,
    pub zeta: f64,
    pub variant: PowerVariant,
    pub refinements: u32,
    pub level: usize,
    pub depth: u32,
    pub max_level: usize,
    pub iters: usize,
    pub levels: u32,
    pub directions: usize,
    pub kind: OpKind,
    pub function: BmoFunction,
    pub epsilon1: Option<f64>,
    pub epsilon2: Option<f64>,
    pub matrix_sizes: Vec<usize>,
    pub out: Option<String>,
    pub trace_csv: Option<String>,
    pub emit_squares: Option<String>,
    pub seed: u64,
    pub budget: Option<usize>,
}

impl Default for JobConfig {
    fn default() -> Self {
        Self {
            command: Command::default(),
            space: SpaceName::default(),
            n: 1,
            gamma: 0.0,
            alpha: 1.0,
            p: 2.0,
            class: ClassName::default(),
            r: 1.0,
            heat_alpha: 1.0,
            heat_beta: 1.0,
            weight: "const:c=1".into(),
            f: "const:c=1".into(),
            g: "const:c=1".into(),
            transform: TransformKind::default(),
            z: vec![0.0, 0.0],
            s: 0.0,
            t: 1.0,
            zeta: 0.0,
            variant: PowerVariant::Plain,
            refinements: 5,
            level: 6,
            depth: 8,
            max_level: 4,
            iters: 200,
            levels: 12,
            directions: 16,
            kind: OpKind::default(),
            function: BmoFunction::default(),
            epsilon1: None,
            epsilon2: None,
            matrix_sizes: Vec::new(),
            out: None,
            trace_csv: None,
            emit_squares: None,
            seed: 0,
            budget: None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "weightlab", version, about = "Weight classes, transforms and Toeplitz criteria")]
pub struct Cli {
    /// transform | characteristic | classify-power | criterion | fock-sarason | opnorm | rh-certificate | verify-51 | bmo
    pub command: Option<String>,
    /// JSON job config; flags given on the command line override it.
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub heat_alpha: Option<f64>,
    #[arg(long)]
    pub heat_beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub weight: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
    #[arg(long)]
    pub transform: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: Option<f64>,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub refinements: Option<u32>,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long)]
    pub max_level: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub levels: Option<u32>,
    #[arg(long)]
    pub directions: Option<usize>,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub function: Option<String>,
    #[arg(long)]
    pub epsilon1: Option<f64>,
    #[arg(long)]
    pub epsilon2: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub matrix_sizes: Option<Vec<usize>>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub trace_csv: Option<String>,
    #[arg(long)]
    pub emit_squares: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub budget: Option<usize>,
}

/// Reads a kebab-case enum name; `_` is accepted for `-`.
fn parse_name<T: DeserializeOwned>(field: &str, s: &str) -> Result<T> {
    let v = Value::String(s.trim().replace('_', "-"));
    serde_json::from_value(v.clone())
        .or_else(|_| serde_json::from_value(Value::String(s.trim().replace('-', "_"))))
        .map_err(|_| Error::Parse {
            input: s.into(),
            reason: format!("unknown value for `{field}`"),
        })
}

impl Cli {
    /// The job described by the config file (if any) with flags applied on top.
    pub fn to_config(&self) -> Result<JobConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str(&text).map_err(|e| Error::Parse {
                    input: path.clone(),
                    reason: e.to_string(),
                })?
            }
            None => JobConfig::default(),
        };
        if let Some(v) = &self.command {
            c.command = parse_name("command", v)?;
        } else if self.config.is_none() {
            return Err(Error::Parse {
                input: String::new(),
                reason: "missing `command`".into(),
            });
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { c.$f = v.clone(); } )* };
        }
        macro_rules! set_named {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { c.$f = parse_name(stringify!($f), v)?; } )* };
        }
        set!(n, gamma, alpha, p, r, heat_alpha, heat_beta, weight, f, g, z, s, t, zeta, refinements, level, depth);
        set!(max_level, iters, levels, directions, matrix_sizes, seed);
        set_named!(space, class, transform, variant, kind, function);
        for (dst, src) in [
            (&mut c.epsilon1, self.epsilon1),
            (&mut c.epsilon2, self.epsilon2),
        ] {
            if src.is_some() {
                *dst = src;
            }
        }
        for (dst, src) in [
            (&mut c.out, &self.out),
            (&mut c.trace_csv, &self.trace_csv),
            (&mut c.emit_squares, &self.emit_squares),
        ] {
            if src.is_some() {
                *dst = src.clone();
            }
        }
        if self.budget.is_some() {
            c.budget = self.budget;
        }
        Ok(c)
    }
}

/// Exit code and report of a finished job.
#[derive(Debug, Clone, PartialEq)]
pub struct JobOutput {
    pub exit_code: i32,
    pub report: Value,
}

impl JobOutput {
    pub fn report_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).unwrap_or_default();
        s.push('\n');
        s
    }
}

fn symbol(field: &str, s: &str) -> Result<Symbol> {
    s.parse().map_err(|e: Error| match e {
        Error::Parse { input, reason } => Error::Parse {
            input,
            reason: format!("{field}: {reason}"),
        },
        other => other,
    })
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Finite => EXIT_PASS,
        Verdict::Divergent => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn convergence_code(c: Convergence) -> i32 {
    match c {
        Convergence::Convergent => EXIT_PASS,
        Convergence::Divergent => EXIT_FAIL,
        Convergence::Unresolved => EXIT_INCONCLUSIVE,
    }
}

fn bool_code(b: bool) -> i32 {
    if b {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn disk_point(z: &[f64]) -> Result<DiskPoint> {
    match z {
        [re, im] => Ok(DiskPoint::from_complex(C64::new(*re, *im))),
        _ => Err(Error::Parse {
            input: format!("{z:?}"),
            reason: "z: disk points take two coordinates `re,im`".into(),
        }),
    }
}

fn write_file(path: &str, text: &str) -> Result<()> {
    if let Some(dir) = Path::new(path).parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn space_params(c: &JobConfig) -> Result<SpaceParams> {
    match c.space {
        SpaceName::Bergman => SpaceParams::new(Space::BergmanDisk, c.n, c.gamma, c.alpha, c.p),
        SpaceName::Hardy => SpaceParams::hardy(c.p),
        SpaceName::Fock => SpaceParams::fock(c.n, c.alpha, c.p),
    }
}

fn class_spec(c: &JobConfig) -> Result<ClassSpec> {
    let (kind, space) = match c.class {
        ClassName::ApArcs => (ClassKind::ApArcs, SpaceName::Hardy),
        ClassName::Bpgamma => (ClassKind::BpGammaBalls, SpaceName::Bergman),
        ClassName::Apr => (ClassKind::AprCubes { r: c.r }, SpaceName::Fock),
        ClassName::ApInvariant => (ClassKind::ApInvariant, SpaceName::Hardy),
        ClassName::BpgammaInvariant => (ClassKind::BpGammaInvariant, SpaceName::Bergman),
        ClassName::BerezinBpgamma => (ClassKind::BerezinBpGamma, SpaceName::Bergman),
        ClassName::PoissonAp => (ClassKind::PoissonAp, SpaceName::Hardy),
        ClassName::Heat => (
            ClassKind::HeatChar {
                alpha: c.heat_alpha,
                beta: c.heat_beta,
            },
            SpaceName::Fock,
        ),
    };
    let params = space_params(&JobConfig { space, ..c.clone() })?;
    ClassSpec::new(kind, params)
}

/// Checks everything a job needs before any engine runs.
fn validate(c: &JobConfig) -> Result<()> {
    match c.command {
        Command::Characteristic => {
            class_spec(c)?;
            symbol("weight", &c.weight)?;
        }
        Command::ClassifyPower => {
            power_weight_oracle(c.zeta, c.p, c.gamma, c.n, c.variant)?;
        }
        Command::Transform | Command::Opnorm | Command::Bmo => {
            space_params(c)?;
            symbol("weight", &c.weight)?;
        }
        Command::Criterion | Command::FockSarason => {
            space_params(c)?;
            symbol("f", &c.f)?;
            symbol("g", &c.g)?;
        }
        Command::RhCertificate | Command::Verify51 => {
            SpaceParams::bergman_disk(c.gamma, c.p)?;
            symbol("f", &c.f)?;
        }
    }
    Ok(())
}

fn dispatch(c: &JobConfig) -> Result<(i32, Value)> {
    let opts = EngineOptions::default();
    match c.command {
        Command::Transform => {
            let w = symbol("weight", &c.weight)?;
            let params = space_params(c)?;
            match (c.space, c.transform) {
                (SpaceName::Bergman, TransformKind::Berezin | TransformKind::Twisted) => {
                    let grid = QuadratureGrid::disk(&params, c.level)?;
                    let z = disk_point(&c.z)?;
                    let e = if c.transform == TransformKind::Berezin {
                        berezin(&w, z, &grid)?
                    } else {
                        twisted_berezin(&w, z, c.s, c.t, &grid)?
                    };
                    Ok((convergence_code(e.status), json!({ "estimate": e })))
                }
                (SpaceName::Hardy, TransformKind::Poisson) => {
                    let grid = QuadratureGrid::circle(&params, c.level)?;
                    let e = poisson_hat(&w, disk_point(&c.z)?, &grid)?;
                    let code = match (e.re.status, e.im.status) {
                        (Convergence::Divergent, _) | (_, Convergence::Divergent) => EXIT_FAIL,
                        (Convergence::Convergent, Convergence::Convergent) => EXIT_PASS,
                        _ => EXIT_INCONCLUSIVE,
                    };
                    Ok((code, json!({ "estimate": e })))
                }
                (SpaceName::Fock, TransformKind::Heat) => {
                    if c.z.len() != 2 * c.n {
                        return Err(Error::Parse {
                            input: format!("{:?}", c.z),
                            reason: format!("z: heat transforms on ℂ^{} take {} real coordinates", c.n, 2 * c.n),
                        });
                    }
                    let e = heat_tilde(&w, &c.z, c.alpha)?;
                    Ok((convergence_code(e.status), json!({ "estimate": e })))
                }
                (s, t) => Err(Error::Parse {
                    input: format!("{t:?} on {s:?}"),
                    reason: "transform: berezin/twisted need bergman, poisson needs hardy, heat needs fock".into(),
                }),
            }
        }
        Command::Characteristic => {
            let w = symbol("weight", &c.weight)?;
            let spec = class_spec(c)?;
            let rep = characteristic(&w, spec, c.refinements, &opts)?;
            if let Some(path) = &c.trace_csv {
                write_file(path, &rep.trace_csv())?;
            }
            Ok((verdict_code(rep.verdict), serde_json::to_value(&rep)?))
        }
        Command::ClassifyPower => {
            let member = power_weight_oracle(c.zeta, c.p, c.gamma, c.n, c.variant)?;
            Ok((bool_code(member), json!({ "member": member })))
        }
        Command::Criterion => {
            let f = symbol("f", &c.f)?;
            let g = symbol("g", &c.g)?;
            let params = space_params(c)?;
            let (rep, points) = match c.space {
                SpaceName::Fock => {
                    let fc = fock_product_criterion(&f, &g, c.p, c.alpha, c.n, c.levels)?;
                    (fc.report, Some(fc.points))
                }
                space => {
                    let grid = if space == SpaceName::Hardy {
                        QuadratureGrid::circle(&params, c.level)?
                    } else {
                        QuadratureGrid::disk(&params, c.level)?
                    };
                    let copts = CriterionOptions {
                        levels: c.levels,
                        directions: c.directions,
                    };
                    let mut rep = invertibility_criterion(&params, &f, &g, &grid, &copts)?;
                    if !c.matrix_sizes.is_empty() {
                        rep.matrix_evidence = Some(product_invertibility_evidence(&params, &f, &g, &c.matrix_sizes)?);
                    }
                    (rep, None)
                }
            };
            let code = match rep.verdict {
                CriterionVerdict::BoundedInvertible => EXIT_PASS,
                CriterionVerdict::NotInvertible | CriterionVerdict::Unbounded => EXIT_FAIL,
                CriterionVerdict::Inconclusive => EXIT_INCONCLUSIVE,
            };
            // Characteristic-shaped head, criterion fields under `criterion`.
            let result = json!({
                "estimate": rep.sup_product,
                "verdict": rep.sup_verdict,
                "criterion": rep,
                "points": points,
            });
            Ok((code, result))
        }
        Command::FockSarason => {
            let f = symbol("f", &c.f)?;
            let g = symbol("g", &c.g)?;
            let r = sarason_fock_classifier(&f, &g, 1e-9)?;
            Ok((bool_code(r.is_pair), serde_json::to_value(&r)?))
        }
        Command::Opnorm => {
            let w = symbol("weight", &c.weight)?;
            let params = SpaceParams::fock(c.n, c.alpha, c.p)?;
            let kind = match c.kind {
                OpKind::FockP => ProjectionKind::FockP,
                OpKind::FockH => ProjectionKind::FockH,
            };
            let rep = weighted_opnorm(kind, &w, c.p, &params, c.max_level, c.iters)?;
            Ok((verdict_code(rep.verdict), serde_json::to_value(&rep)?))
        }
        Command::RhCertificate => {
            let f = symbol("f", &c.f)?;
            let params = SpaceParams::bergman_disk(c.gamma, c.p)?;
            let grid = QuadratureGrid::disk(&params, c.level)?;
            let cert = rh_certificate(&f, c.p, c.gamma, c.depth, &grid)?;
            if let Some(path) = &c.emit_squares {
                write_file(path, &cert.squares_csv())?;
            }
            if let Some(path) = &c.trace_csv {
                let mut s = String::from("level,regions_evaluated,running_sup\n");
                for t in &cert.c1_trace {
                    s.push_str(&format!("{},{},{:e}\n", t.level, t.regions_evaluated, t.running_sup));
                }
                write_file(path, &s)?;
            }
            Ok((bool_code(cert.pass), serde_json::to_value(&cert)?))
        }
        Command::Verify51 => {
            let f = symbol("f", &c.f)?;
            let params = SpaceParams::bergman_disk(c.gamma, c.p)?;
            let grid = QuadratureGrid::disk(&params, c.level)?;
            let (e1, e2, cert) = match (c.epsilon1, c.epsilon2) {
                (Some(a), Some(b)) => (a, b, Value::Null),
                _ => {
                    let cert = rh_certificate(&f, c.p, c.gamma, c.depth, &grid)?;
                    (cert.epsilon1, cert.epsilon2, serde_json::to_value(&cert)?)
                }
            };
            let samples = theorem51_samples(&f, c.levels, c.directions);
            let rep = verify_theorem51(&f, c.p, e1, e2, &samples, &grid)?;
            if let Some(path) = &c.trace_csv {
                let mut s = String::from("level,t,theta,value,status\n");
                for pt in &rep.points {
                    s.push_str(&format!("{},{:e},{},{:e},{:?}\n", pt.level, pt.z.t, pt.z.theta, pt.value, pt.status));
                }
                write_file(path, &s)?;
            }
            Ok((verdict_code(rep.verdict), json!({ "certificate": cert, "theorem51": rep })))
        }
        Command::Bmo => {
            let w = symbol("weight", &c.weight)?;
            let f = match c.function {
                BmoFunction::Re => PlaneFn::Re(w),
                BmoFunction::LogAbs => PlaneFn::LogAbs(w),
            };
            let rep = bmo_diagnostics(&f, c.r, c.p, c.n, c.levels)?;
            Ok((verdict_code(rep.bmo_seminorm.verdict), serde_json::to_value(&rep)?))
        }
    }
}

fn verdict_word(code: i32) -> &'static str {
    match code {
        EXIT_PASS => "pass",
        EXIT_FAIL => "fail",
        EXIT_INCONCLUSIVE => "inconclusive",
        _ => "usage_error",
    }
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Runs one job and writes its report. Invalid configs are usage errors;
/// anything that fails inside an engine is reported as inconclusive.
pub fn run(config: &JobConfig) -> JobOutput {
    set_budget_override(config.budget);
    let outcome = match validate(config) {
        Err(e) => Err((EXIT_USAGE, e.to_string())),
        Ok(()) => match std::panic::catch_unwind(|| dispatch(config)) {
            Ok(Ok(r)) => Ok(r),
            Ok(Err(e @ Error::Parse { .. })) => Err((EXIT_USAGE, e.to_string())),
            Ok(Err(e)) => Err((EXIT_INCONCLUSIVE, e.to_string())),
            Err(_) => Err((EXIT_INCONCLUSIVE, "engine panicked".into())),
        },
    };
    let (exit_code, result, error) = match outcome {
        Ok((code, v)) => (code, v, None),
        Err((code, msg)) => (code, Value::Null, Some(msg)),
    };
    let report = json!({
        "schema": REPORT_SCHEMA,
        "timestamp": timestamp(),
        "config": config,
        "outcome": verdict_word(exit_code),
        "exit_code": exit_code,
        "error": error,
        "result": result,
    });
    let mut out = JobOutput { exit_code, report };
    if let Some(path) = &config.out {
        if let Err(e) = write_file(path, &out.report_string()) {
            out.exit_code = EXIT_USAGE;
            out.report["error"] = Value::String(format!("out: {e}"));
        }
    }
    out
}

/// [`run`] on a JSON config; malformed JSON is a usage error.
pub fn run_json(config: &str) -> JobOutput {
    match serde_json::from_str::<JobConfig>(config) {
        Ok(c) => run(&c),
        Err(e) => JobOutput {
            exit_code: EXIT_USAGE,
            report: json!({
                "schema": REPORT_SCHEMA,
                "timestamp": timestamp(),
                "config": Value::Null,
                "outcome": verdict_word(EXIT_USAGE),
                "exit_code": EXIT_USAGE,
                "error": format!("config: {e}"),
                "result": Value::Null,
            }),
        },
    }
}

/// Entry point of the binary: parses arguments, runs, prints and returns the
/// exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let config = match cli.to_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("weightlab: {e}");
            return EXIT_USAGE;
        }
    };
    let out = run(&config);
    if let Some(err) = out.report["error"].as_str() {
        eprintln!("weightlab: {err}");
    }
    if config.out.is_none() {
        print!("{}", out.report_string());
    }
    out.exit_code
}
