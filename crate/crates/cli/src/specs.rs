//! Parsing of `--state` and `--channel` arguments for the report command.

use std::path::Path;

use cohdist::channels::{
    amplitude_damping, bit_flip, bit_phase_flip, depolarizing, identity, phase_flip,
    projective_measurement, weak_measurement,
};
use cohdist::complementarity::MatrixPayload;
use cohdist::states::schmidt_pair_state;
use cohdist::{Basis, DensityMatrix, KrausChannel};

#[derive(Debug)]
pub enum SpecError {
    Usage(String),
    Io(String),
    Format(String),
}

pub struct StateSpec {
    pub state: DensityMatrix,
    /// The frame the state was specified in; Schmidt states default to {|+⟩, |−⟩}.
    pub natural_basis: Basis,
    pub description: String,
}

pub fn parse_state(spec: &str) -> Result<StateSpec, SpecError> {
    if let Some(rest) = spec.strip_prefix("schmidt:") {
        let l0: f64 = rest
            .parse()
            .map_err(|_| SpecError::Usage(format!("cannot read λ₀ from `{spec}`")))?;
        if !(0.0..=1.0).contains(&l0) {
            return Err(SpecError::Usage(format!("λ₀ must lie in [0, 1], got {l0}")));
        }
        let state = schmidt_pair_state(l0, 1.0 - l0)
            .map_err(|e| SpecError::Usage(e.to_string()))?
            .reduced_system();
        return Ok(StateSpec {
            state,
            natural_basis: Basis::plus_minus(),
            description: spec.to_string(),
        });
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path).map_err(|e| SpecError::Io(format!("{spec}: {e}")))?;
    let payload: MatrixPayload =
        serde_json::from_str(&text).map_err(|e| SpecError::Format(format!("{spec}: {e}")))?;
    let matrix = payload
        .to_matrix()
        .map_err(|e| SpecError::Format(format!("{spec}: {e}")))?;
    let state =
        DensityMatrix::new(matrix).map_err(|e| SpecError::Format(format!("{spec}: {e}")))?;
    let d = state.dim();
    Ok(StateSpec {
        state,
        natural_basis: Basis::computational(d),
        description: spec.to_string(),
    })
}

pub fn parse_channel(spec: &str, dim: usize) -> Result<KrausChannel, SpecError> {
    let (name, param) = match spec.split_once(':') {
        Some((n, p)) => {
            let v: f64 = p
                .parse()
                .map_err(|_| SpecError::Usage(format!("cannot read the parameter of `{spec}`")))?;
            (n, Some(v))
        }
        None => (spec, None),
    };
    let need = || {
        param.ok_or_else(|| {
            SpecError::Usage(format!(
                "channel `{name}` needs a parameter, e.g. `{name}:0.5`"
            ))
        })
    };
    let qubit = || {
        if dim == 2 {
            Ok(())
        } else {
            Err(SpecError::Usage(format!(
                "channel `{name}` acts on qubits, state has d = {dim}"
            )))
        }
    };
    let built = match name {
        "identity" => Ok(identity(dim)),
        "projective" => Ok(projective_measurement(&Basis::computational(dim))),
        "depolarizing" => depolarizing(need()?, dim),
        "weak" => {
            qubit()?;
            weak_measurement(need()?)
        }
        "amplitude-damping" => {
            qubit()?;
            amplitude_damping(need()?)
        }
        "bit-flip" => {
            qubit()?;
            bit_flip(need()?)
        }
        "phase-flip" => {
            qubit()?;
            phase_flip(need()?)
        }
        "bit-phase-flip" => {
            qubit()?;
            bit_phase_flip(need()?)
        }
        _ => return Err(SpecError::Usage(format!("unknown channel `{name}`"))),
    };
    built.map_err(|e| SpecError::Usage(e.to_string()))
}
