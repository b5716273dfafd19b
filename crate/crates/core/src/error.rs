use std::sync::atomic::{AtomicUsize, Ordering};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("budget exceeded: {needed} > {budget} ({what})")]
    Budget {
        what: &'static str,
        needed: usize,
        budget: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error in `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

static BUDGET_OVERRIDE: AtomicUsize = AtomicUsize::new(0);

/// Process-wide cap taking precedence over `WEIGHTLAB_BUDGET`; `None` clears it.
pub fn set_budget_override(cap: Option<usize>) {
    BUDGET_OVERRIDE.store(cap.unwrap_or(0), Ordering::Relaxed);
}

/// Region and node count cap, overridable with `WEIGHTLAB_BUDGET`.
pub fn budget() -> usize {
    let o = BUDGET_OVERRIDE.load(Ordering::Relaxed);
    if o > 0 {
        return o;
    }
    std::env::var("WEIGHTLAB_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(4_000_000)
}

pub(crate) fn check_budget(what: &'static str, needed: usize) -> Result<()> {
    let budget = budget();
    if needed > budget {
        return Err(Error::Budget { what, needed, budget });
    }
    Ok(())
}
