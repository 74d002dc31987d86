use std::fmt;
use std::process::ExitCode;

/// Why a command stopped, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or malformed input (exit 2).
    Input(String),
    /// The command ran but produced an all-zero estimate (exit 3).
    Degenerate(String),
    /// The numerical routines failed (exit 4).
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Input(_) => 2,
            Failure::Degenerate(_) => 3,
            Failure::Numerical(_) => 4,
        })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Degenerate(m) => write!(f, "degenerate result: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<clr_spca::Error> for Failure {
    fn from(e: clr_spca::Error) -> Self {
        match e {
            clr_spca::Error::Numerical(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

pub type CmdResult<T> = Result<T, Failure>;

/// Attaches the offending path to an error.
pub fn at(path: &std::path::Path) -> impl FnOnce(clr_spca::Error) -> Failure + '_ {
    move |e| match Failure::from(e) {
        Failure::Input(m) if !m.contains(&*path.to_string_lossy()) => {
            Failure::Input(format!("{}: {m}", path.display()))
        }
        other => other,
    }
}
