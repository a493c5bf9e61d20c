//! The `dgforge` command line. Every command reads object files, runs one
//! library operation and maps the result to an exit code:
//! 0 verified, 1 refuted, 2 unknown or unsupported ring, 3 invalid input,
//! 4 internal error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::complexes::{cohomology, ChainMap, CohomologyReport};
use crate::descent::{
    descend_homotopy, descend_idempotent_and_split, descend_morphism, descend_properness, descend_quasi_iso,
    ring_of_definition, Descendable, DescentResult, Tower, DEFAULT_MAX_PRIMES,
};
use crate::dga::check_proper;
use crate::error::Error;
use crate::format::{encode_ring, parse_ring_name, Certificate, Descended, Object, ObjectFile};
use crate::karoubi::{telescope_split, verify_idempotent};
use crate::rings::RingMap;
use crate::smooth::{check_smooth, SmoothOutcome};

#[derive(Parser, Debug)]
#[command(name = "dgforge", version, about = "Exact homological algebra with checkable certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Format of the run report printed after the command.
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse an object file and check the invariants of its kind.
    Validate { path: PathBuf },
    /// Split a homotopy idempotent, or descend and split the idempotent of a retract witness.
    SplitIdempotent {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        weight: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_PRIMES)]
        max_primes: usize,
    },
    /// The least stage Z[1/S] over which a rational object is defined.
    RingOfDefinition {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Descend a rational quasi-isomorphism to a stage where its cone is acyclic.
    DescendQis {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_PRIMES)]
        max_primes: usize,
    },
    /// Descend a chain map, or a homotopy together with its two maps.
    DescendMorphism {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_PRIMES)]
        max_primes: usize,
    },
    /// Search for a finite bimodule resolution, or a periodic syzygy.
    CheckSmooth {
        path: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Properness certificate, with the stage where cohomology agrees with Q.
    CheckProper {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_PRIMES)]
        max_primes: usize,
    },
    /// Push an object along a ring map.
    BaseChange {
        path: PathBuf,
        #[arg(long)]
        to: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cohomology of a complex, or of the underlying complex of an algebra or module.
    Cohomology { path: PathBuf },
    /// Re-check a certificate or descent result.
    Verify { path: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::SplitIdempotent { .. } => "split-idempotent",
            Command::RingOfDefinition { .. } => "ring-of-definition",
            Command::DescendQis { .. } => "descend-qis",
            Command::DescendMorphism { .. } => "descend-morphism",
            Command::CheckSmooth { .. } => "check-smooth",
            Command::CheckProper { .. } => "check-proper",
            Command::BaseChange { .. } => "base-change",
            Command::Cohomology { .. } => "cohomology",
            Command::Verify { .. } => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Verified,
    Refuted,
    Unknown,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<FileRef>,
    pub outcome: Outcome,
    pub exit_code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    pub outputs: Vec<FileRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
    pub wall_time_ms: u128,
}

impl RunReport {
    fn new(command: &str) -> Self {
        RunReport {
            command: command.into(),
            inputs: Vec::new(),
            outcome: Outcome::Error,
            exit_code: 4,
            message: String::new(),
            stage: None,
            certificate: None,
            outputs: Vec::new(),
            details: None,
            wall_time_ms: 0,
        }
    }

    fn finish(&mut self, code: i32, message: impl Into<String>) {
        self.exit_code = code;
        self.outcome = match code {
            0 => Outcome::Verified,
            1 => Outcome::Refuted,
            2 => Outcome::Unknown,
            _ => Outcome::Error,
        };
        self.message = message.into();
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => serde_json::to_string_pretty(self).expect("report serializes"),
            ReportFormat::Text => {
                let mut s = format!("{}: {:?} (exit {})", self.command, self.outcome, self.exit_code).to_lowercase();
                if !self.message.is_empty() {
                    s += &format!("\n  {}", self.message);
                }
                if let Some(st) = &self.stage {
                    s += &format!("\n  stage: {st}");
                }
                for o in &self.outputs {
                    s += &format!("\n  wrote {} (sha256 {})", o.path, &o.sha256[..16]);
                }
                s
            }
        }
    }
}

/// Maps a library error to an exit code.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::UnsupportedRing { .. }
        | Error::StageJoinOverflow { .. }
        | Error::Overflow(_)
        | Error::UnsupportedAlgebra(_) => 2,
        Error::NoSplitFound(_) | Error::NotAQuasiIso(_) => 1,
        Error::InvalidCertificate(_) => 4,
        _ => 3,
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code_for(&e), message: e.to_string() }
    }
}

fn fail<T>(code: i32, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure { code, message: message.into() })
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads and decodes an input; a present but wrong seal is invalid input.
fn load(path: &Path, report: &mut RunReport) -> Result<(ObjectFile, Object), Failure> {
    let (file, seal_ok) = load_file(path, report)?;
    if !seal_ok {
        return fail(3, "seal does not match the file contents");
    }
    let obj = file.decode()?;
    Ok((file, obj))
}

fn load_file(path: &Path, report: &mut RunReport) -> Result<(ObjectFile, bool), Failure> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => return fail(3, format!("cannot read {}: {e}", path.display())),
    };
    report.inputs.push(FileRef { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
    let text = String::from_utf8(bytes).map_err(|_| Failure { code: 3, message: "file is not UTF-8".into() })?;
    let file = ObjectFile::parse(&text)?;
    let seal_ok = file.seal.is_empty() || file.seal_ok();
    Ok((file, seal_ok))
}

fn emit(obj: &Object, out: &Option<PathBuf>, report: &mut RunReport) -> Result<(), Failure> {
    let text = ObjectFile::from_object(obj).to_text();
    if let Object::Certificate(c) = obj {
        report.certificate = Some(c.name().into());
    }
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                return fail(4, format!("cannot write {}: {e}", p.display()));
            }
            report.outputs.push(FileRef { path: p.display().to_string(), sha256: sha256_hex(text.as_bytes()) });
        }
        None => {
            print!("{text}");
            report.outputs.push(FileRef { path: "-".into(), sha256: sha256_hex(text.as_bytes()) });
        }
    }
    Ok(())
}

fn wrong_kind<T>(obj: &Object, wanted: &str) -> Result<T, Failure> {
    fail(3, format!("expected {wanted}, found {}", obj.kind()))
}

fn descend_any(obj: Object) -> Result<Descended, Failure> {
    fn go<T: Descendable>(x: &T, wrap: fn(DescentResult<T>) -> Descended) -> Result<Descended, Failure> {
        Ok(wrap(ring_of_definition(x)?))
    }
    match obj {
        Object::Complex(x) => go(&x, Descended::Complex),
        Object::ChainMap(x) => go(&x, Descended::ChainMap),
        Object::Homotopy(x) => go(&x, Descended::Homotopy),
        Object::DgAlgebra(x) => go(&x, Descended::DgAlgebra),
        Object::DgModule(x) => go(&x, Descended::DgModule),
        Object::CellPresentation(x) => go(&x, Descended::CellPresentation),
        Object::RetractWitness(x) => go(&x, Descended::RetractWitness),
        Object::HomotopyIdempotent(x) => go(&x, Descended::HomotopyIdempotent),
        other => wrong_kind(&other, "a plain object"),
    }
}

fn descend_map(f: &ChainMap, tower: &Tower) -> Result<DescentResult<ChainMap>, Failure> {
    let src = ring_of_definition(f.src())?;
    let dst = ring_of_definition(f.dst())?;
    Ok(descend_morphism(f, &src, &dst, tower)?)
}

fn report_json(r: &CohomologyReport) -> Value {
    serde_json::json!({
        "ring": encode_ring(&r.ring),
        "betti": r.betti_numbers(),
        "torsion_primes": r.torsion_primes(),
        "text": r.to_string(),
    })
}

fn execute(cmd: &Command, report: &mut RunReport) -> Result<(i32, String), Failure> {
    match cmd {
        Command::Validate { path } => {
            let (_, obj) = load(path, report)?;
            match obj.validate() {
                Ok(()) => Ok((0, format!("valid {}", obj.kind()))),
                Err(e) => fail(3, e.to_string()),
            }
        }
        Command::SplitIdempotent { path, out, weight, max_primes } => {
            let (_, obj) = load(path, report)?;
            match obj {
                Object::HomotopyIdempotent(p) => {
                    if !verify_idempotent(&p)? {
                        return fail(3, "input is not idempotent up to the given homotopy: e∘e - e ≠ dh + hd");
                    }
                    let cert = telescope_split(&p)?;
                    let rank: usize = cert.a.ranks().iter().sum();
                    emit(&Object::Certificate(Certificate::Splitting(cert)), out, report)?;
                    Ok((0, format!("split through a complex of total rank {rank}")))
                }
                Object::RetractWitness(w) => {
                    let d = descend_idempotent_and_split(&w, *weight, &Tower::new(*max_primes))?;
                    report.stage = Some(encode_ring(&d.stage));
                    let msg = format!("split at stage {} on the weight-{} truncation", d.stage, d.weight);
                    emit(&Object::Certificate(Certificate::SplitDescent(d)), out, report)?;
                    Ok((0, msg))
                }
                other => wrong_kind(&other, "a homotopy_idempotent or retract_witness"),
            }
        }
        Command::RingOfDefinition { path, out } => {
            let (_, obj) = load(path, report)?;
            let d = descend_any(obj)?;
            report.stage = Some(encode_ring(d.stage()));
            let msg = format!("defined over {}", d.stage());
            emit(&Object::Descent(d), out, report)?;
            Ok((0, msg))
        }
        Command::DescendQis { path, out, max_primes } => {
            let (_, obj) = load(path, report)?;
            let Object::ChainMap(f) = obj else { return wrong_kind(&obj, "a chain_map") };
            f.check()?;
            let src = ring_of_definition(f.src())?;
            let dst = ring_of_definition(f.dst())?;
            let d = descend_quasi_iso(&f, &src, &dst, &Tower::new(*max_primes))?;
            report.stage = Some(encode_ring(d.stage()));
            let msg = format!("cone acyclic over {}", d.stage());
            emit(&Object::Certificate(Certificate::QuasiIsoDescent(d)), out, report)?;
            Ok((0, msg))
        }
        Command::DescendMorphism { path, out, max_primes } => {
            let (_, obj) = load(path, report)?;
            let tower = Tower::new(*max_primes);
            let d = match obj {
                Object::ChainMap(f) => Descended::ChainMap(descend_map(&f, &tower)?),
                Object::Homotopy(h) => {
                    let f = descend_map(h.from(), &tower)?;
                    let g = descend_map(h.to(), &tower)?;
                    Descended::Homotopy(descend_homotopy(&h, &f, &g, &tower)?)
                }
                other => return wrong_kind(&other, "a chain_map or homotopy"),
            };
            report.stage = Some(encode_ring(d.stage()));
            let msg = format!("{} verified over {}", d.object_kind(), d.stage());
            emit(&Object::Descent(d), out, report)?;
            Ok((0, msg))
        }
        Command::CheckSmooth { path, depth, out } => {
            let (_, obj) = load(path, report)?;
            let Object::DgAlgebra(a) = obj else { return wrong_kind(&obj, "a dg_algebra") };
            match check_smooth(&a, *depth)? {
                SmoothOutcome::Smooth(c) => {
                    let msg = format!("smooth: bimodule resolution of length {}", c.length);
                    emit(&Object::Certificate(Certificate::Smooth(c)), out, report)?;
                    Ok((0, msg))
                }
                SmoothOutcome::NotSmooth(c) => {
                    let msg = format!("not smooth: syzygies {} and {} are isomorphic", c.period.0, c.period.1);
                    emit(&Object::Certificate(Certificate::NotSmooth(c)), out, report)?;
                    Ok((1, msg))
                }
                SmoothOutcome::Unknown { depth_exhausted } => {
                    Ok((2, format!("no split syzygy or period up to depth {depth_exhausted}")))
                }
            }
        }
        Command::CheckProper { path, out, max_primes } => {
            let (_, obj) = load(path, report)?;
            let Object::DgAlgebra(a) = obj else { return wrong_kind(&obj, "a dg_algebra") };
            let cert = check_proper(&a)?;
            let mut msg = format!("proper; cohomology {}", cert.report);
            if a.ring() == &crate::rings::CoefficientRing::Rationals {
                let p = descend_properness(&ring_of_definition(&a)?, &Tower::new(*max_primes))?;
                report.stage = Some(encode_ring(&p.agreeing_stage));
                report.details = Some(serde_json::json!({
                    "torsion_primes": p.torsion_primes,
                    "stages": p.stages.iter().map(|s| serde_json::json!({
                        "stage": encode_ring(&s.stage),
                        "agrees": s.agrees,
                        "cohomology": report_json(&s.report),
                    })).collect::<Vec<_>>(),
                }));
                msg += &format!("; agrees with Q over {}", p.agreeing_stage);
            }
            emit(&Object::Certificate(Certificate::Proper(cert)), out, report)?;
            Ok((0, msg))
        }
        Command::BaseChange { path, to, out } => {
            let (_, obj) = load(path, report)?;
            let target = parse_ring_name(to)?;
            let m = RingMap::new(obj.ring().clone(), target)?;
            let moved = obj.base_change(&m)?;
            let msg = format!("{} moved from {} to {}", obj.kind(), m.source(), m.target());
            emit(&moved, out, report)?;
            Ok((0, msg))
        }
        Command::Cohomology { path } => {
            let (_, obj) = load(path, report)?;
            let c = match &obj {
                Object::Complex(c) => c.clone(),
                Object::DgAlgebra(a) => a.underlying().clone(),
                Object::DgModule(m) => m.underlying().clone(),
                other => return wrong_kind(other, "a complex, dg_algebra or dg_module"),
            };
            c.check()?;
            let r = cohomology(&c)?;
            report.details = Some(report_json(&r));
            Ok((0, r.to_string()))
        }
        Command::Verify { path } => {
            let (file, seal_ok) = load_file(path, report)?;
            if file.kind != "certificate" && file.kind != "descent_result" {
                return fail(3, format!("verify expects a certificate or descent_result, found {}", file.kind));
            }
            if !seal_ok {
                return Ok((1, "seal does not match the file contents".into()));
            }
            let obj = file.decode()?;
            if let Object::Certificate(c) = &obj {
                report.certificate = Some(c.name().into());
            }
            match obj.validate() {
                Ok(()) => Ok((0, "certificate verified".into())),
                Err(e) => Ok((1, format!("rejected: {e}"))),
            }
        }
    }
}

/// Runs a command line (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (code, text) = run_captured(args);
    if !text.is_empty() {
        if code == 0 {
            println!("{text}");
        } else {
            eprintln!("{text}");
        }
    }
    code
}

/// Like [`run`] but returns the rendered report instead of printing it.
/// Objects written without `--out` still go to stdout.
pub fn run_captured<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            return (code, e.to_string());
        }
    };
    let started = Instant::now();
    let mut report = RunReport::new(cli.command.name());
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        let mut inner = RunReport::new(cli.command.name());
        let r = execute(&cli.command, &mut inner);
        (r, inner)
    }));
    match result {
        Ok((r, inner)) => {
            report = inner;
            match r {
                Ok((code, msg)) => report.finish(code, msg),
                Err(f) => report.finish(f.code, f.message),
            }
        }
        Err(p) => {
            let why = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            report.finish(4, format!("internal error: {why}"));
        }
    }
    report.wall_time_ms = started.elapsed().as_millis();
    (report.exit_code, report.render(cli.report))
}
