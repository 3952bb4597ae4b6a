//! Running extracted code under an external interpreter.
//!
//! All three test modes tangle some packets into a temporary Prolog file
//! and hand it to the configured interpreter; they differ only in what is
//! loaded. A version loads its bound chain, a packet loads itself (a
//! relation loads its current predicate definition), and the recursive mode
//! follows the reference chain from a relation without naming a version.

use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;
use wait_timeout::ChildExt;

use crate::error::{Error, Result};
use crate::model::{ClausePacket, Document, RelId};
use crate::projections::{unresolved_in, Unresolved};
use crate::versions;

/// How to invoke an interpreter.
///
/// `command_template` is split like a shell command line and holds `{file}`
/// exactly once. When a goal is given, `goal_flag_template` (which holds
/// `{goal}`) is split the same way; its words replace a `{goal}` word of
/// the command template, or are appended after it.
///
/// ```
/// use litweave::testrun::InterpreterConfig;
/// let swipl = InterpreterConfig::new("swipl -q {goal} {file}")
///     .unwrap()
///     .with_goal_flag("-g {goal} -t halt");
/// assert_eq!(
///     swipl.argv("/tmp/p.pl", Some("main")).unwrap(),
///     ["swipl", "-q", "-g", "main", "-t", "halt", "/tmp/p.pl"]
/// );
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterpreterConfig {
    pub command_template: String,
    pub goal_flag_template: Option<String>,
    pub timeout: Duration,
    /// Working directory of the child; the current one when `None`.
    pub work_dir: Option<PathBuf>,
}

impl InterpreterConfig {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

    pub fn new(command_template: impl Into<String>) -> Result<Self> {
        let cfg = InterpreterConfig {
            command_template: command_template.into(),
            goal_flag_template: None,
            timeout: Self::DEFAULT_TIMEOUT,
            work_dir: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_goal_flag(mut self, template: impl Into<String>) -> Self {
        self.goal_flag_template = Some(template.into());
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.command_template.matches("{file}").count() != 1 {
            return bad("the command template must contain {file} exactly once");
        }
        if self.timeout.is_zero() {
            return bad("the timeout must be positive");
        }
        if let Some(g) = &self.goal_flag_template {
            if !g.contains("{goal}") {
                return bad("the goal flag template must contain {goal}");
            }
        }
        let words = split(&self.command_template)?;
        if words.first().map_or(true, |w| w.contains("{file}")) {
            return bad("the command template must start with a program name");
        }
        Ok(())
    }

    /// The argument vector for running `file`, with `goal` if any.
    pub fn argv(&self, file: &str, goal: Option<&str>) -> Result<Vec<String>> {
        self.validate()?;
        let goal_words = match (goal, &self.goal_flag_template) {
            (None, _) => Vec::new(),
            (Some(_), None) => {
                return Err(Error::InvalidConfig(
                    "a goal was given but no goal flag template is configured".into(),
                ))
            }
            (Some(g), Some(t)) => split(t)?
                .into_iter()
                .map(|w| w.replace("{goal}", g))
                .collect(),
        };
        let mut out = Vec::new();
        let mut placed = false;
        for w in split(&self.command_template)? {
            if w == "{goal}" {
                out.extend(goal_words.iter().cloned());
                placed = true;
            } else {
                out.push(w.replace("{file}", file));
            }
        }
        if !placed {
            out.extend(goal_words);
        }
        Ok(out)
    }
}

fn split(template: &str) -> Result<Vec<String>> {
    shell_words::split(template).map_err(|e| Error::InvalidConfig(format!("cannot split `{template}`: {e}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", content = "target", rename_all = "lowercase")]
pub enum Mode {
    Version(String),
    Packet(String),
    Recursive(RelId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TestReport {
    pub mode: Mode,
    pub loaded_code: String,
    /// The interpreter's exit status; -1 when it was killed or ended by a
    /// signal.
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
    pub duration: Duration,
    pub timed_out: bool,
    /// Loaded goals with no definition reference, other than direct
    /// recursive calls.
    pub unresolved: Vec<Unresolved>,
}

/// Kills the child's whole process group, so grandchildren holding the
/// output pipes go too.
fn kill_group(child: &std::process::Child) {
    #[cfg(unix)]
    if let Ok(pid) = i32::try_from(child.id()) {
        // SAFETY: plain syscall; the group was created for this child alone.
        unsafe {
            libc::kill(-pid, libc::SIGKILL);
        }
    }
    #[cfg(not(unix))]
    let _ = child;
}

fn drain(mut r: impl Read + Send + 'static) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    })
}

/// Runs `code` under the interpreter. The program file is removed before
/// this returns, whatever the outcome.
pub fn run_code(
    mode: Mode,
    code: String,
    unresolved: Vec<Unresolved>,
    cfg: &InterpreterConfig,
    goal: Option<&str>,
) -> Result<TestReport> {
    cfg.validate()?;
    let mut file = tempfile::Builder::new()
        .prefix("litweave-")
        .suffix(".pl")
        .tempfile()?;
    file.write_all(code.as_bytes())?;
    file.flush()?;
    let path = file.path().to_string_lossy().into_owned();
    let argv = cfg.argv(&path, goal)?;

    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if let Some(d) = &cfg.work_dir {
        cmd.current_dir(d);
    }
    #[cfg(unix)]
    std::os::unix::process::CommandExt::process_group(&mut cmd, 0);
    let start = Instant::now();
    let mut child = cmd.spawn().map_err(|e| match e.kind() {
        io::ErrorKind::NotFound | io::ErrorKind::PermissionDenied => {
            Error::InterpreterNotFound(format!("{}: {e}", argv[0]))
        }
        _ => Error::Io(e),
    })?;
    let out = drain(child.stdout.take().expect("piped stdout"));
    let err = drain(child.stderr.take().expect("piped stderr"));

    let (status, timed_out) = match child.wait_timeout(cfg.timeout)? {
        Some(s) => (Some(s), false),
        None => {
            kill_group(&child);
            let _ = child.kill();
            let _ = child.wait();
            (None, true)
        }
    };
    let duration = start.elapsed();
    let stdout = out.join().unwrap_or_default();
    let stderr = err.join().unwrap_or_default();
    file.close()?;

    Ok(TestReport {
        mode,
        loaded_code: code,
        exit_code: status.and_then(|s| s.code()).unwrap_or(-1),
        stdout,
        stderr,
        duration,
        timed_out,
        unresolved,
    })
}

fn load(doc: &Document, pairs: &[(RelId, &ClausePacket)]) -> (String, Vec<Unresolved>) {
    let code = versions::program_text(pairs.iter().map(|(_, p)| *p));
    let unresolved = pairs
        .iter()
        .flat_map(|(r, p)| unresolved_in(doc, r, &p.id))
        .collect();
    (code, unresolved)
}

/// Tests a named version: its tangled program, in chain order.
pub fn test_version(doc: &Document, name: &str, cfg: &InterpreterConfig, goal: Option<&str>) -> Result<TestReport> {
    cfg.validate()?;
    let pairs: Vec<_> = versions::resolve(doc, name)?
        .into_iter()
        .map(|(r, p)| (r.id.clone(), p))
        .collect();
    let (code, unresolved) = load(doc, &pairs);
    run_code(Mode::Version(name.to_owned()), code, unresolved, cfg, goal)
}

/// Tests one packet, or the current predicate definition of a relation.
pub fn test_packet(doc: &Document, id: &str, cfg: &InterpreterConfig, goal: Option<&str>) -> Result<TestReport> {
    cfg.validate()?;
    let pair = if let Some((r, p)) = doc.packet(id) {
        (r.id.clone(), p)
    } else if let Some(r) = doc.relation(id) {
        let p = r.cpd().ok_or_else(|| Error::ForeignPacket {
            relation: r.id.to_string(),
            packet: r.cpr.to_string(),
        })?;
        (r.id.clone(), p)
    } else {
        return Err(Error::UnknownElement(id.to_owned()));
    };
    let (code, unresolved) = load(doc, &[pair]);
    run_code(Mode::Packet(id.to_owned()), code, unresolved, cfg, goal)
}

/// Tests the reference chain starting at `relation`.
pub fn test_recursive(doc: &Document, relation: &str, cfg: &InterpreterConfig, goal: Option<&str>) -> Result<TestReport> {
    cfg.validate()?;
    let steps = versions::chain(doc, relation, None)?;
    let pairs: Vec<_> = steps
        .iter()
        .map(|s| {
            let (_, p) = doc.packet(s.packet.as_str()).expect("chain selects existing packets");
            (s.relation.clone(), p)
        })
        .collect();
    let (code, unresolved) = load(doc, &pairs);
    run_code(Mode::Recursive(RelId::from(relation)), code, unresolved, cfg, goal)
}
