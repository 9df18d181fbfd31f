use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("denominator must be at least 1")]
    ZeroDenominator,
    #[error("{p} and {q} are not coprime")]
    NotCoprime { p: u64, q: u64 },
    #[error("{name} = {value} is outside {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),
    #[error("modular reduction exceeded {0} steps (floating precision exhausted)")]
    ReductionCap(usize),
    #[error("regression needs at least 3 distinct abscissae, got {0}")]
    DegenerateRegressor(usize),
}

pub type Result<T> = core::result::Result<T, Error>;

/// Range check helper: `Err(OutOfRange)` unless `ok`.
pub(crate) fn ensure(ok: bool, name: &'static str, value: f64, expected: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, expected })
    }
}
