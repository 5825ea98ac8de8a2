use serde_json::Value;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    Core(symflow::Error),
    /// Malformed invocation or unreadable input.
    Input { name: &'static str, message: String },
    /// A well-formed request whose result fails its own checks.
    Domain { name: &'static str, message: String },
}

impl CliError {
    pub fn usage(message: String) -> Self {
        CliError::Input { name: "usage", message }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input { name: "invalid_input", message: message.into() }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.name(),
            CliError::Input { name, .. } | CliError::Domain { name, .. } => name,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Input { message, .. } | CliError::Domain { message, .. } => message.clone(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_domain() => 2,
            CliError::Domain { .. } => 2,
            _ => 1,
        }
    }
}

impl From<symflow::Error> for CliError {
    fn from(e: symflow::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Where results go, plus the provenance embedded in JSON outputs.
pub struct Sink {
    pub out: Option<PathBuf>,
    pub config_sha256: String,
}

impl Sink {
    pub fn meta(&self) -> Value {
        serde_json::json!({
            "tool": "symflow",
            "version": env!("CARGO_PKG_VERSION"),
            "config_sha256": self.config_sha256,
        })
    }

    /// JSON document with a `meta` block.
    pub fn json(&self, mut v: Value) -> CliResult<()> {
        v["meta"] = self.meta();
        self.text(&symflow::io::json_string(&v))
    }

    pub fn text(&self, s: &str) -> CliResult<()> {
        match &self.out {
            Some(p) => write_atomic(p, s.as_bytes()),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(s.as_bytes()).map_err(|e| CliError::input(format!("stdout: {e}")))
            }
        }
    }

    /// JSON to an explicit side path.
    pub fn json_to(&self, path: &Path, mut v: Value) -> CliResult<()> {
        v["meta"] = self.meta();
        write_atomic(path, symflow::io::json_string(&v).as_bytes())
    }
}

/// Temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| CliError::input(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// CSV text from a header and rows of preformatted fields.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}
