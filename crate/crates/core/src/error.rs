use thiserror::Error;

/// Errors raised by the circuit, synthesis, heralding and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input violated its documented domain.
    #[error("invalid {field} = {value:e}: {reason}")]
    Domain {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The parallel optomechanical legs of a two-ring device sum to a non-positive resistance.
    #[error("degenerate two-ring loading: R_OM + R_OO+ - R_OO- = {total:e} ohm")]
    DegenerateLoading { total: f64 },

    /// The matching synthesis (or parasitic subtraction) demanded a negative capacitance.
    #[error(
        "unphysical matching capacitance C_T = {c_t:e} F at g_OM = {g_om:e} Hz \
         (efficiency-maximizing synthesis has no physical solution at this pump strength)"
    )]
    UnphysicalCapacitance { c_t: f64, g_om: f64 },

    /// A subtraction of parasitic inductance left a non-positive physical inductor.
    #[error("unphysical matching inductance L = {l:e} H after parasitic subtraction")]
    UnphysicalInductance { l: f64 },

    #[error("self-consistent matching did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    /// A Monte Carlo run produced no heralding events.
    #[error("insufficient statistics: no heralds in {trials} trials")]
    InsufficientStatistics { trials: u64 },

    /// An intermediate probability left [0, 1] by more than round-off.
    #[error("internal consistency violation: {what} = {value:e} is outside [0, 1]")]
    Consistency { what: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            field,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

pub(crate) fn require_non_negative(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            field,
            value,
            reason: "must be finite and non-negative",
        })
    }
}

pub(crate) fn require_probability(field: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain {
            field,
            value,
            reason: "must lie in [0, 1]",
        })
    }
}
