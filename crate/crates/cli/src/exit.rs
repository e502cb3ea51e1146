//! Process exit codes by error category.

use std::fmt;

use momcomp::Error;

/// Malformed or inconsistent configuration.
#[derive(Debug)]
pub struct UsageError(String);

impl UsageError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub const OTHER: u8 = 1;
pub const USAGE: u8 = 2;
pub const INPUT: u8 = 3;
pub const HYPOTHESIS: u8 = 4;
pub const UNSUPPORTED: u8 = 5;
pub const TARGET: u8 = 6;

pub fn category(err: &anyhow::Error) -> (u8, &'static str) {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return (USAGE, "usage");
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return (INPUT, "input");
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Parse { .. } | Error::Empty(_) | Error::Io { .. } | Error::Csv(_) => {
                    (INPUT, "input")
                }
                Error::InvalidArgument(_) | Error::OutOfRange { .. } => (USAGE, "usage"),
                Error::Hypothesis(_) | Error::ScheduleViolation { .. } => {
                    (HYPOTHESIS, "hypothesis")
                }
                Error::Unsupported(_) => (UNSUPPORTED, "unsupported"),
                Error::TargetUnreached { .. } => (TARGET, "target"),
            };
        }
    }
    (OTHER, "error")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_through_context() {
        let e = anyhow::Error::from(Error::Hypothesis("tau".into())).context("building run");
        assert_eq!(category(&e).0, HYPOTHESIS);
        let e = anyhow::Error::from(UsageError::new("bad"));
        assert_eq!(category(&e).0, USAGE);
        assert_eq!(category(&anyhow::anyhow!("plain")).0, OTHER);
    }
}
