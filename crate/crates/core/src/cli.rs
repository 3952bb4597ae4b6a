//! The `litweave` command line.
//!
//! Each subcommand wraps one library operation. Exit status is 0 on
//! success, 1 when the operation reports diagnostics or fails, and 2 on a
//! usage error; `test` mirrors the interpreter's exit status.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::diag::{has_errors, Diagnostic};
use crate::error::Error;
use crate::export::{self, Scope};
use crate::indexes;
use crate::markup::{self, Parsed, SourceFile};
use crate::model::Document;
use crate::projections::{self, IndexKind, Projection};
use crate::testrun::{self, InterpreterConfig, TestReport};
use crate::versions;

/// Environment variable holding the default interpreter command template.
pub const INTERP_ENV: &str = "LITWEAVE_INTERP";

#[derive(Debug, Parser)]
#[command(name = "litweave", version, about = "Literate programming for constraint logic programs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Ascii,
    Latex,
    Html,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IndexFormat {
    Json,
    Ascii,
    Latex,
    Html,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProjectFormat {
    Ascii,
    Latex,
    Html,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IndexArg {
    Crossref,
    Versions,
    Words,
}

impl From<IndexArg> for IndexKind {
    fn from(a: IndexArg) -> Self {
        match a {
            IndexArg::Crossref => IndexKind::Crossref,
            IndexArg::Versions => IndexKind::Versions,
            IndexArg::Words => IndexKind::Words,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Report syntax and structure diagnostics.
    Check { file: PathBuf },
    /// Name a version rooted at a relation and record it in the file.
    NameVersion {
        name: String,
        #[arg(long)]
        start: String,
        file: PathBuf,
    },
    /// Remove a named version from the file.
    DeleteVersion { name: String, file: PathBuf },
    /// List the named versions and their bindings.
    ListVersions { file: PathBuf },
    /// Compare a version's bindings with the current document.
    Audit { version: String, file: PathBuf },
    /// Print the program text of a version.
    Tangle {
        version: String,
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build an index.
    Index {
        #[arg(value_enum)]
        kind: IndexArg,
        file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: IndexFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Show a filtered view of the document.
    Project {
        #[command(subcommand)]
        how: ProjectCmd,
    },
    /// Weave the document, or part of it.
    Export {
        #[arg(value_enum)]
        format: Format,
        file: PathBuf,
        /// whole, version:NAME, packet:ID or index:KIND.
        #[arg(long, default_value = "whole")]
        scope: String,
        /// Output file; a directory for html.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run code under an external interpreter.
    Test {
        #[command(subcommand)]
        mode: TestCmd,
    },
}

#[derive(Debug, clap::Args)]
struct ProjectOut {
    #[arg(long, value_enum, default_value = "ascii")]
    format: ProjectFormat,
    /// Output file; a directory for html.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum ProjectCmd {
    /// Paragraphs and relations enclosing the given element ids.
    Manual {
        #[arg(long = "id", required = true)]
        ids: Vec<String>,
        file: PathBuf,
        #[command(flatten)]
        out: ProjectOut,
    },
    /// Paragraphs and packets matching a regular expression.
    Regex {
        pattern: String,
        file: PathBuf,
        #[command(flatten)]
        out: ProjectOut,
    },
    /// Packets on the reference chains of relations.
    Recursive {
        #[arg(long = "rel", required = true)]
        relations: Vec<String>,
        file: PathBuf,
        #[command(flatten)]
        out: ProjectOut,
    },
    /// Packets of a named version.
    Version {
        name: String,
        file: PathBuf,
        #[command(flatten)]
        out: ProjectOut,
    },
    /// Blocks an index entry points at.
    Index {
        #[arg(value_enum)]
        kind: IndexArg,
        key: String,
        file: PathBuf,
        #[command(flatten)]
        out: ProjectOut,
    },
}

#[derive(Debug, clap::Args)]
struct Interp {
    /// Command template with {file}; defaults to $LITWEAVE_INTERP.
    #[arg(long)]
    interp: Option<String>,
    /// Goal to run after loading.
    #[arg(long)]
    goal: Option<String>,
    /// Template with {goal} that passes the goal to the interpreter.
    #[arg(long)]
    goal_flag: Option<String>,
    /// Seconds before the interpreter is killed.
    #[arg(long, default_value_t = 10.0)]
    timeout: f64,
    /// Print the report as JSON instead of the interpreter's streams.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum TestCmd {
    /// Load a named version.
    Version {
        name: String,
        file: PathBuf,
        #[command(flatten)]
        interp: Interp,
    },
    /// Load one packet, or a relation's current predicate definition.
    Packet {
        id: String,
        file: PathBuf,
        #[command(flatten)]
        interp: Interp,
    },
    /// Load the reference chain from a relation.
    Recursive {
        relation: String,
        file: PathBuf,
        #[command(flatten)]
        interp: Interp,
    },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

/// Failure modes of a subcommand.
enum Fail {
    /// Already reported; exit 1.
    Reported,
    Usage(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::Lib(Error::Io(e))
    }
}

type Outcome = std::result::Result<i32, Fail>;

/// Runs the command line `args` (including the program name) and returns
/// the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let mut io = Io {
        out: stdout,
        err: stderr,
    };
    match dispatch(cli.command, &mut io) {
        Ok(code) => code,
        Err(Fail::Reported) => 1,
        Err(Fail::Usage(m)) => {
            let _ = writeln!(io.err, "litweave: {m}");
            2
        }
        Err(Fail::Lib(Error::Invalid(diags))) => {
            for d in &diags {
                let _ = writeln!(io.err, "{d}");
            }
            1
        }
        Err(Fail::Lib(e)) => {
            let _ = writeln!(io.err, "error[{}]: {e}", e.code());
            1
        }
    }
}

fn print_diags(w: &mut dyn Write, path: &Path, diags: &[Diagnostic]) -> std::io::Result<()> {
    for d in diags {
        writeln!(w, "{}:{d}", path.display())?;
    }
    Ok(())
}

fn open(io: &mut Io<'_>, path: &Path) -> std::result::Result<(SourceFile, Parsed), Fail> {
    let src = SourceFile::read(path)?;
    match markup::parse(&src.text) {
        Ok(p) => Ok((src, p)),
        Err(diags) => {
            print_diags(io.err, path, &diags)?;
            Err(Fail::Reported)
        }
    }
}

/// Replaces `path` with `text` via a temporary file in the same directory.
fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.flush()?;
    if let Ok(meta) = fs::metadata(path) {
        let _ = fs::set_permissions(tmp.path(), meta.permissions());
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(io: &mut Io<'_>, output: Option<&Path>, text: &str) -> Outcome {
    match output {
        Some(p) => fs::write(p, text)?,
        None => io.out.write_all(text.as_bytes())?,
    }
    Ok(0)
}

fn weave(io: &mut Io<'_>, doc: &Document, format: Format, scope: &Scope, output: Option<&Path>) -> Outcome {
    match format {
        Format::Ascii => emit(io, output, &export::export_ascii(doc, scope)?),
        Format::Latex => emit(io, output, &export::export_latex(doc, scope)?),
        Format::Html => {
            let Some(dir) = output else {
                return Err(Fail::Usage("html output needs --output DIR".into()));
            };
            let site = export::export_html(doc, scope)?;
            site.write_to(dir)?;
            Ok(0)
        }
    }
}

fn project_out(io: &mut Io<'_>, doc: &Document, p: Projection, out: &ProjectOut) -> Outcome {
    let format = match out.format {
        ProjectFormat::Json => {
            let text = serde_json::to_string_pretty(&p).expect("projections serialize") + "\n";
            return emit(io, out.output.as_deref(), &text);
        }
        ProjectFormat::Ascii => Format::Ascii,
        ProjectFormat::Latex => Format::Latex,
        ProjectFormat::Html => Format::Html,
    };
    weave(io, doc, format, &Scope::Projection(p), out.output.as_deref())
}

fn config(i: &Interp) -> std::result::Result<InterpreterConfig, Fail> {
    let template = match &i.interp {
        Some(t) => t.clone(),
        None => std::env::var(INTERP_ENV)
            .map_err(|_| Fail::Usage(format!("no interpreter: pass --interp or set {INTERP_ENV}")))?,
    };
    if !(i.timeout.is_finite() && i.timeout > 0.0) {
        return Err(Fail::Usage("--timeout must be a positive number of seconds".into()));
    }
    let mut cfg = InterpreterConfig::new(template)?.with_timeout(Duration::from_secs_f64(i.timeout));
    if let Some(g) = &i.goal_flag {
        cfg = cfg.with_goal_flag(g.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(io: &mut Io<'_>, r: &TestReport, json: bool) -> Outcome {
    if json {
        writeln!(io.out, "{}", serde_json::to_string_pretty(r).expect("reports serialize"))?;
    } else {
        io.out.write_all(r.stdout.as_bytes())?;
        io.err.write_all(r.stderr.as_bytes())?;
        for u in &r.unresolved {
            writeln!(io.err, "litweave: {u}")?;
        }
    }
    if r.timed_out {
        writeln!(io.err, "error[TIMEOUT]: interpreter did not finish within {:.1}s", r.duration.as_secs_f64())?;
        return Ok(1);
    }
    Ok(r.exit_code)
}

fn dispatch(cmd: Cmd, io: &mut Io<'_>) -> Outcome {
    match cmd {
        Cmd::Check { file } => {
            let src = SourceFile::read(&file)?;
            let diags = markup::check(&src.text);
            print_diags(io.out, &file, &diags)?;
            Ok(if has_errors(&diags) { 1 } else { 0 })
        }
        Cmd::NameVersion { name, start, file } => {
            let (src, p) = open(io, &file)?;
            let doc = versions::name_version(&p.document, &name, &start)?;
            write_atomic(&file, &markup::rewrite_versions(&src.text, &doc))?;
            let n = doc.version(&name).map_or(0, |v| v.bindings.len());
            writeln!(io.out, "named version {name}: {n} relations")?;
            Ok(0)
        }
        Cmd::DeleteVersion { name, file } => {
            let (src, p) = open(io, &file)?;
            let doc = versions::delete_version(&p.document, &name)?;
            write_atomic(&file, &markup::rewrite_versions(&src.text, &doc))?;
            writeln!(io.out, "deleted version {name}")?;
            Ok(0)
        }
        Cmd::ListVersions { file } => {
            let (_, p) = open(io, &file)?;
            for v in &p.document.version_table {
                let line = markup::render_version(v);
                writeln!(io.out, "{}", line.trim_start_matches("@version "))?;
            }
            Ok(0)
        }
        Cmd::Audit { version, file } => {
            let (_, p) = open(io, &file)?;
            let diags = versions::audit_version(&p.document, &version)?;
            let diags: Vec<_> = diags
                .into_iter()
                .map(|mut d| {
                    d.position = Some(p.source_map.position(&p.document, &d));
                    d
                })
                .collect();
            print_diags(io.out, &file, &diags)?;
            Ok(if diags.is_empty() { 0 } else { 1 })
        }
        Cmd::Tangle { version, file, output } => {
            let (_, p) = open(io, &file)?;
            emit(io, output.as_deref(), &versions::tangle(&p.document, &version)?)
        }
        Cmd::Index {
            kind,
            file,
            format,
            output,
        } => {
            let (_, p) = open(io, &file)?;
            let doc = &p.document;
            let kind = IndexKind::from(kind);
            let format = match format {
                IndexFormat::Json => {
                    let text = match kind {
                        IndexKind::Crossref => indexes::to_json_lines(&indexes::cross_reference_index(doc)),
                        IndexKind::Versions => indexes::to_json_lines(&indexes::versions_index(doc)),
                        IndexKind::Words => indexes::to_json_lines(&indexes::word_index(doc)),
                    };
                    return emit(io, output.as_deref(), &text);
                }
                IndexFormat::Ascii => Format::Ascii,
                IndexFormat::Latex => Format::Latex,
                IndexFormat::Html => Format::Html,
            };
            weave(io, doc, format, &Scope::Index(kind), output.as_deref())
        }
        Cmd::Project { how } => match how {
            ProjectCmd::Manual { ids, file, out } => {
                let (_, p) = open(io, &file)?;
                let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
                let proj = projections::project_manual(&p.document, &ids)?;
                project_out(io, &p.document, proj, &out)
            }
            ProjectCmd::Regex { pattern, file, out } => {
                let (_, p) = open(io, &file)?;
                let proj = projections::project_regex(&p.document, &pattern)?;
                project_out(io, &p.document, proj, &out)
            }
            ProjectCmd::Recursive { relations, file, out } => {
                let (_, p) = open(io, &file)?;
                let rels: Vec<&str> = relations.iter().map(String::as_str).collect();
                let proj = projections::project_recursive(&p.document, &rels)?;
                project_out(io, &p.document, proj, &out)
            }
            ProjectCmd::Version { name, file, out } => {
                let (_, p) = open(io, &file)?;
                let proj = projections::project_version(&p.document, &name)?;
                project_out(io, &p.document, proj, &out)
            }
            ProjectCmd::Index { kind, key, file, out } => {
                let (_, p) = open(io, &file)?;
                let proj = projections::project_index(&p.document, kind.into(), &key)?;
                project_out(io, &p.document, proj, &out)
            }
        },
        Cmd::Export {
            format,
            file,
            scope,
            output,
        } => {
            let scope: Scope = scope.parse().map_err(|e: Error| Fail::Usage(e.to_string()))?;
            let (_, p) = open(io, &file)?;
            weave(io, &p.document, format, &scope, output.as_deref())
        }
        Cmd::Test { mode } => {
            let (target, file, interp) = match &mode {
                TestCmd::Version { name, file, interp } => (name, file, interp),
                TestCmd::Packet { id, file, interp } => (id, file, interp),
                TestCmd::Recursive { relation, file, interp } => (relation, file, interp),
            };
            let cfg = config(interp)?;
            let (_, p) = open(io, file)?;
            let doc = &p.document;
            let goal = interp.goal.as_deref();
            let r = match &mode {
                TestCmd::Version { .. } => testrun::test_version(doc, target, &cfg, goal)?,
                TestCmd::Packet { .. } => testrun::test_packet(doc, target, &cfg, goal)?,
                TestCmd::Recursive { .. } => testrun::test_recursive(doc, target, &cfg, goal)?,
            };
            report(io, &r, interp.json)
        }
    }
}
