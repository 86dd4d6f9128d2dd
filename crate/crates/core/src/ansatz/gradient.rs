use rayon::prelude::*;

use super::prepare;
use crate::error::{Error, Result};
use crate::loss::ObservableSpec;
use crate::qsim::{ChannelMode, Circuit, StateVector};

/// Jacobian of a vector-valued expectation function by parameter shifts.
///
/// `f(params, eval_id)` must return the same number of outputs on every call
/// and be linear in the circuit's output state (an expectation value), which
/// is what makes the shift rules exact. `eval_id` is distinct for every
/// shifted evaluation so shot-based callers can derive independent streams.
/// Row `i` of the result is ∇fᵢ.
pub fn parameter_shift_jacobian<F>(circuit: &Circuit, params: &[f64], f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64], u64) -> Result<Vec<f64>> + Sync,
{
    let rules = circuit.slot_shift_rules()?;
    if params.len() != rules.len() {
        return Err(Error::DimensionMismatch {
            expected: rules.len(),
            got: params.len(),
        });
    }
    let columns: Vec<Vec<f64>> = rules
        .par_iter()
        .enumerate()
        .map(|(slot, rule)| {
            let mut shifted = params.to_vec();
            let mut column: Option<Vec<f64>> = None;
            for (t, &(shift, coeff)) in rule.terms().iter().enumerate() {
                let id = (slot as u64) * 4 + 2 * t as u64;
                shifted[slot] = params[slot] + shift;
                let plus = f(&shifted, id)?;
                shifted[slot] = params[slot] - shift;
                let minus = f(&shifted, id + 1)?;
                shifted[slot] = params[slot];
                let col = column.get_or_insert_with(|| vec![0.0; plus.len()]);
                for ((c, p), m) in col.iter_mut().zip(&plus).zip(&minus) {
                    *c += coeff * (p - m);
                }
            }
            Ok(column.unwrap_or_default())
        })
        .collect::<Result<_>>()?;
    let outputs = columns.first().map_or(0, Vec::len);
    Ok((0..outputs)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect())
}

/// ∇⟨O⟩ of the circuit output on `input`.
pub fn grad_parameter_shift(
    circuit: &Circuit,
    params: &[f64],
    observable: &ObservableSpec,
    channel: &ChannelMode,
    input: &StateVector,
    seed: u64,
) -> Result<Vec<f64>> {
    observable.check_register(circuit.n_qubits())?;
    let mut jac = parameter_shift_jacobian(circuit, params, |p, id| {
        let out = prepare(circuit, input, p, channel)?;
        Ok(vec![out.measure(observable, channel, crate::seed::derive(seed, &[id]))?])
    })?;
    Ok(jac.pop().unwrap_or_else(|| vec![0.0; params.len()]))
}

/// ∂⟨O⟩/∂θ_slot on the ideal statevector, evaluating only that slot's
/// shifts.
pub fn partial_parameter_shift(
    circuit: &Circuit,
    params: &[f64],
    slot: usize,
    observable: &ObservableSpec,
    input: &StateVector,
) -> Result<f64> {
    let rules = circuit.slot_shift_rules()?;
    if params.len() != rules.len() {
        return Err(Error::DimensionMismatch {
            expected: rules.len(),
            got: params.len(),
        });
    }
    let rule = rules.get(slot).ok_or(Error::ParamSlotOutOfRange {
        slot,
        len: rules.len(),
    })?;
    let mut shifted = params.to_vec();
    let mut total = 0.0;
    for &(shift, coeff) in rule.terms() {
        shifted[slot] = params[slot] + shift;
        let plus = observable.expectation(&circuit.run(input, &shifted)?)?;
        shifted[slot] = params[slot] - shift;
        let minus = observable.expectation(&circuit.run(input, &shifted)?)?;
        total += coeff * (plus - minus);
    }
    Ok(total)
}
