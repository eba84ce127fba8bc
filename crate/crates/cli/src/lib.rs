//! Command line front end: reads one input document, dispatches to the
//! checkers or searches, and writes a text or JSON report.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use smoothability::examples_search::{
    build_example, find_characteristic, find_orthogonal_square2_system, FixtureError, Params,
    SearchError, SearchMode,
};
use smoothability::invariant_subspace::SubspaceOptions;
use smoothability::isometry::{ActionSpec, GroupAction};
use smoothability::lattice::{Lattice, LatticeSpec, Vector};
use smoothability::obstruction::{check, CheckError, CheckOptions, Conclusion, ManifoldData, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "smoothability", version, about = "Lattice obstructions to smooth finite group actions on 4-manifolds")]
pub struct Cli {
    /// Output format; overrides `options.format` in the input document.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the checker matching the action's shape and print the verdict.
    Check(FileArg),
    /// Print the total Stiefel-Whitney class and its top component.
    SwClass(FileArg),
    /// Enumerate characteristic vectors in a coefficient box.
    SearchCharacteristic {
        file: PathBuf,
        #[arg(long)]
        bound: i64,
        /// Inclusive range of squares, e.g. `-8..0`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
        square: (i64, i64),
    },
    /// Enumerate orthogonal systems of square-2 vectors orthogonal to `c`.
    SearchOrthogonal {
        file: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        bound: i64,
        /// Report every system rather than the first one.
        #[arg(long)]
        all: bool,
        /// Stop after this many systems (implies `--all`).
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Build a named example, run the checker and compare with the expected conclusion.
    Reproduce {
        id: String,
        /// Fixture parameter as `name=value`; may be repeated.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, i64)>,
    },
}

#[derive(Debug, Args)]
pub struct FileArg {
    pub file: PathBuf,
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected LO..HI, got {s:?}"))?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("bad lower end {lo:?}: {e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("bad upper end {hi:?}: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn parse_param(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let v: i64 = v.trim().parse().map_err(|e| format!("bad value for {k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocOptions {
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub all_splits: Option<bool>,
}

/// One input file: the form, optionally an action and a characteristic
/// vector, and report options.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub action: Option<ActionSpec>,
    #[serde(default)]
    pub characteristic: Option<Vector>,
    #[serde(default)]
    pub options: DocOptions,
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INTERNAL, message: message.into() }
    }
}

pub fn parse_document(text: &str) -> Result<InputDocument, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let at = if path == "." { "document".to_string() } else { path };
        Failure::input(format!("{at}: {}", e.inner()))
    })
}

struct Loaded {
    doc: InputDocument,
    lattice: Lattice,
}

fn load(path: &PathBuf) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let doc = parse_document(&text)?;
    let lattice = doc.lattice.build().map_err(|e| Failure::input(format!("lattice: {e}")))?;
    Ok(Loaded { doc, lattice })
}

impl Loaded {
    fn action(&self) -> Result<GroupAction, Failure> {
        let spec = self.doc.action.as_ref().ok_or_else(|| Failure::input("action: missing"))?;
        spec.build(&self.lattice).map_err(|(idx, e)| match idx {
            Some(i) => Failure::input(format!("action.generators[{i}]: {e}")),
            None => Failure::input(format!("action: {e}")),
        })
    }

    fn characteristic(&self) -> Result<Vector, Failure> {
        let c = self.doc.characteristic.clone().ok_or_else(|| Failure::input("characteristic: missing"))?;
        if c.len() != self.lattice.rank() {
            return Err(Failure::input(format!(
                "characteristic: length {} but the lattice has rank {}",
                c.len(),
                self.lattice.rank()
            )));
        }
        Ok(c)
    }

    fn check_options(&self) -> CheckOptions {
        CheckOptions {
            all_splits: self.doc.options.all_splits.unwrap_or(true),
            subspace: SubspaceOptions::default(),
        }
    }

    fn verdict(&self) -> Result<Verdict, Failure> {
        let action = self.action()?;
        let c = self.characteristic()?;
        run_check(&self.lattice, &action, &c, &self.check_options())
    }
}

fn run_check(l: &Lattice, action: &GroupAction, c: &[i64], opts: &CheckOptions) -> Result<Verdict, Failure> {
    check(&ManifoldData::new(l.clone()), action, c, opts).map_err(|e| match e {
        CheckError::DimensionMismatch { .. } => Failure::input(format!("characteristic: {e}")),
        other => Failure::internal(other.to_string()),
    })
}

fn search_failure(e: SearchError) -> Failure {
    Failure::input(format!("search: {e}"))
}

fn json_line<T: Serialize>(out: &mut dyn Write, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)
}

fn json_pretty<T: Serialize>(out: &mut dyn Write, value: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

#[derive(Serialize)]
struct SwReport<'a> {
    conclusion: Conclusion,
    base: Option<&'a str>,
    sw_class: Option<&'a [String]>,
    w_top: Option<u8>,
    top_term: Option<&'a str>,
}

#[derive(Serialize)]
struct VectorLine<'a> {
    vector: &'a [i64],
    square: i64,
}

#[derive(Serialize)]
struct SystemLine<'a> {
    system: &'a [Vector],
}

#[derive(Serialize)]
struct ReproduceReport<'a> {
    id: &'a str,
    params: &'a Params,
    provenance: &'a str,
    expected: Conclusion,
    matches: bool,
    verdict: &'a Verdict,
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| Failure::internal(format!("write failed: {e}"));
    match &cli.command {
        Command::Check(FileArg { file }) => {
            let loaded = load(file)?;
            let format = cli.format.or(loaded.doc.options.format).unwrap_or_default();
            let verdict = loaded.verdict()?;
            match format {
                Format::Json => json_pretty(out, &verdict).map_err(io)?,
                Format::Text => write!(out, "{}", verdict.certificate).map_err(io)?,
            }
            Ok(EXIT_OK)
        }
        Command::SwClass(FileArg { file }) => {
            let loaded = load(file)?;
            let format = cli.format.or(loaded.doc.options.format).unwrap_or_default();
            let verdict = loaded.verdict()?;
            let inv = &verdict.invariants;
            let top_term = match (inv.w_top, inv.sw_class.as_ref()) {
                (Some(1), Some(terms)) => terms.last().map(String::as_str),
                _ => None,
            };
            let report = SwReport {
                conclusion: verdict.conclusion,
                base: inv.base.as_deref(),
                sw_class: inv.sw_class.as_deref(),
                w_top: inv.w_top,
                top_term,
            };
            match format {
                Format::Json => json_pretty(out, &report).map_err(io)?,
                Format::Text => match (&report.sw_class, report.w_top) {
                    (Some(terms), Some(top)) => {
                        writeln!(out, "base: {}", report.base.unwrap_or("?")).map_err(io)?;
                        writeln!(out, "w = {}", terms.join(" + ")).map_err(io)?;
                        writeln!(out, "w_top = {top}{}", top_term.map(|t| format!(" ({t})")).unwrap_or_default())
                            .map_err(io)?;
                    }
                    _ => {
                        let failed: Vec<&str> = verdict
                            .hypotheses
                            .iter()
                            .filter(|h| !h.passed())
                            .map(|h| h.name.as_str())
                            .collect();
                        writeln!(out, "no class computed (failed hypotheses: {})", failed.join(", "))
                            .map_err(io)?;
                    }
                },
            }
            Ok(EXIT_OK)
        }
        Command::SearchCharacteristic { file, bound, square } => {
            let loaded = load(file)?;
            let format = cli.format.or(loaded.doc.options.format).unwrap_or_default();
            let l = &loaded.lattice;
            let found = find_characteristic(l, *bound, *square).map_err(search_failure)?;
            for v in &found {
                let sq = l.square(v).map_err(|e| Failure::internal(e.to_string()))?;
                match format {
                    Format::Json => json_line(out, &VectorLine { vector: v, square: sq }).map_err(io)?,
                    Format::Text => writeln!(out, "{v:?}  square {sq}").map_err(io)?,
                }
            }
            if format == Format::Text {
                writeln!(out, "{} vector(s)", found.len()).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::SearchOrthogonal { file, count, bound, all, limit } => {
            let loaded = load(file)?;
            let format = cli.format.or(loaded.doc.options.format).unwrap_or_default();
            let c = loaded.characteristic()?;
            let mode = if *all || limit.is_some() { SearchMode::All { limit: *limit } } else { SearchMode::First };
            let systems = find_orthogonal_square2_system(&loaded.lattice, &c, *count, *bound, mode)
                .map_err(search_failure)?;
            for s in &systems {
                match format {
                    Format::Json => json_line(out, &SystemLine { system: s }).map_err(io)?,
                    Format::Text => writeln!(out, "{s:?}").map_err(io)?,
                }
            }
            if format == Format::Text {
                writeln!(out, "{} system(s)", systems.len()).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Reproduce { id, params } => {
            let given: Params = params.iter().cloned().collect();
            let fx = build_example(id, &given).map_err(|e| match e {
                FixtureError::Build(_) => Failure::internal(e.to_string()),
                _ => Failure::input(e.to_string()),
            })?;
            let verdict = run_check(&fx.lattice, &fx.action, &fx.c, &CheckOptions::default())?;
            let matches = verdict.conclusion == fx.expected;
            let report = ReproduceReport {
                id,
                params: &fx.params,
                provenance: &fx.provenance,
                expected: fx.expected,
                matches,
                verdict: &verdict,
            };
            match cli.format.unwrap_or_default() {
                Format::Json => json_pretty(out, &report).map_err(io)?,
                Format::Text => {
                    let shown: Vec<String> = fx.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    writeln!(out, "example {id} [{}]", shown.join(", ")).map_err(io)?;
                    writeln!(out, "{}", fx.provenance).map_err(io)?;
                    write!(out, "{}", verdict.certificate).map_err(io)?;
                    let tag = if matches { "match" } else { "MISMATCH" };
                    writeln!(out, "expected {:?}, got {:?}: {tag}", fx.expected, verdict.conclusion)
                        .map_err(io)?;
                }
            }
            Ok(if matches { EXIT_OK } else { EXIT_INTERNAL })
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
