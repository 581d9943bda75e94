//! Closed-form solution of the scalar resonant equation u_t + c u_x =
//! lambda u^2, used as a validation oracle for the solver and as the witness
//! that resonant quadratic self-interaction blows up in finite time.

use crate::error::{Error, Result};
use crate::fields::InitialDatum;

/// Along the characteristic through (x, t) the equation reduces to the
/// Riccati ODE du/ds = lambda u^2 with u(0) = phi(x - ct), whose solution is
/// phi / (1 - lambda t phi). A denominator within 1e-12 of zero is the
/// blow-up set and is reported as an error rather than a huge number.
pub fn riccati_oracle(datum: &InitialDatum, c: f64, lambda: f64, x: f64, t: f64) -> Result<f64> {
    if !(c.is_finite() && lambda.is_finite() && x.is_finite() && t.is_finite()) {
        return Err(Error::NonFinite { what: "oracle arguments" });
    }
    let phi = datum.eval(x - c * t);
    let denom = 1.0 - lambda * t * phi;
    if denom.abs() < 1e-12 {
        return Err(Error::BlowUpPoint { t });
    }
    Ok(phi / denom)
}
