use thiserror::Error;

/// Errors raised by the model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A quantity was outside the range where the model is defined.
    #[error("{quantity} out of domain: {detail}")]
    Domain {
        quantity: &'static str,
        detail: String,
    },
    /// More channel pairs were requested than fit into the spectral span.
    #[error("channel plan with {requested} pairs exceeds the spectral span; at most {max_feasible} pairs fit")]
    PlanTooWide { requested: usize, max_feasible: usize },
    /// A ratio with zero numerator and zero denominator.
    #[error("{0} is undefined (0/0)")]
    Undefined(&'static str),
    /// Time tags were expected in nondecreasing order.
    #[error("event stream {0} is not sorted by timestamp")]
    Unsorted(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(quantity: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        quantity,
        detail: detail.into(),
    }
}
