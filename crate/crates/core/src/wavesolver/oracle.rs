use super::signal::{BoundarySignal, Face};
use crate::error::{Error, Result};

/// Exact 1D solution for data on the left endpoint, valid until the wave
/// reflected at the right endpoint returns to `x`: the rightward travelling
/// wave f(t - (x - x_left)/a).
pub fn dalembert_oracle_1d(
    a: f64,
    f: &BoundarySignal,
    x_left: f64,
    x_right: f64,
    x: f64,
    t: f64,
) -> Result<f64> {
    if f.faces.iter().any(|&face| face != Face::Left) {
        return Err(Error::PreconditionViolated(
            "the travelling-wave oracle only supports a left-endpoint signal".into(),
        ));
    }
    let span = x_right - x_left;
    let reflection_arrival = f.t_on + (span + (x_right - x)) / a;
    if !f.is_silent() && t >= reflection_arrival {
        return Err(Error::OracleDomainExceeded { x, t });
    }
    if f.faces.is_empty() {
        return Ok(0.0);
    }
    Ok(f.waveform(t - (x - x_left) / a))
}
