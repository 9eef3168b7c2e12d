use thiserror::Error;

/// Errors raised by the model, estimators and sweeps.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value violated the domain of an operation (e.g. a non-positive gain).
    #[error("{name} = {value}: {rule}")]
    Domain {
        name: &'static str,
        value: f64,
        rule: &'static str,
    },

    /// The total gain is at or above one, so the pressures have no finite limit.
    #[error("no finite cumulative limit: total gain q = {gain} >= 1")]
    Divergent { gain: f64 },

    /// A statistical or growth estimate could not be formed from the data.
    #[error("estimation failed: {0}")]
    Estimation(String),

    /// An inconsistent combination of options.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            rule: "must be finite",
        })
    }
}
