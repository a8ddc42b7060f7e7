//! Two-mode squeezed vacuum summed directly over its Schmidt basis,
//!
//!   |psi> = sum_n tanh^n r / cosh r |n, n>,
//!
//! as a reference for the Wick routine.

use std::collections::BTreeMap;

use super::{Op, OracleError};

/// Dropped tail weight of the Schmidt series, including a polynomial
/// allowance for fourth-moment matrix elements.
const TAIL: f64 = 1e-14;
const MAX_LEVELS: usize = 100_000;
const MAX_SQUEEZE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TmsObservable {
    MeanNa,
    MeanNb,
    /// <n_a n_b>.
    NaNb,
    /// <(n_a - n_b)^2>.
    NumberDifferenceSquared,
    /// Expectation of an operator product over modes 0 (a) and 1 (b),
    /// leftmost operator first.
    Product(Vec<Op>),
}

/// Smallest n_max with tanh^{2 n} r (n + 2)^4 < TAIL for every n > n_max.
fn truncation(r: f64) -> Result<usize, OracleError> {
    let t2 = r.tanh().powi(2);
    if t2 == 0.0 {
        return Ok(4);
    }
    let log_t2 = t2.ln();
    let mut n = 4usize;
    while (n as f64) * log_t2 + 4.0 * ((n + 2) as f64).ln() >= TAIL.ln() {
        n += 1;
        if n > MAX_LEVELS {
            return Err(OracleError::Truncation {
                r,
                limit: MAX_LEVELS,
            });
        }
    }
    Ok(n)
}

type Ket = BTreeMap<(usize, usize), f64>;

fn apply(op: Op, ket: &Ket) -> Ket {
    let mut out = Ket::new();
    for (&(na, nb), &amp) in ket {
        let level = if op.mode == 0 { na } else { nb };
        let (factor, shifted) = if op.dagger {
            (((level + 1) as f64).sqrt(), level + 1)
        } else if level == 0 {
            continue;
        } else {
            ((level as f64).sqrt(), level - 1)
        };
        let key = if op.mode == 0 {
            (shifted, nb)
        } else {
            (na, shifted)
        };
        *out.entry(key).or_insert(0.0) += factor * amp;
    }
    out
}

/// Expectation value of `observable` in the two-mode squeezed vacuum.
pub fn tms_fock_reference(r: f64, observable: &TmsObservable) -> Result<f64, OracleError> {
    if !(0.0..=MAX_SQUEEZE).contains(&r) {
        return Err(OracleError::Domain(format!(
            "squeeze parameter must lie in [0, {MAX_SQUEEZE}], got {r}"
        )));
    }
    let n_max = truncation(r)?;
    let (t, c) = (r.tanh(), 1.0 / r.cosh());
    let coeff = |n: usize| c * t.powi(n as i32);

    match observable {
        TmsObservable::MeanNa | TmsObservable::MeanNb => {
            Ok((0..=n_max).map(|n| n as f64 * coeff(n).powi(2)).sum())
        }
        TmsObservable::NaNb => Ok((0..=n_max).map(|n| (n * n) as f64 * coeff(n).powi(2)).sum()),
        // n_a - n_b vanishes on every |n, n>.
        TmsObservable::NumberDifferenceSquared => Ok(0.0),
        TmsObservable::Product(ops) => {
            if let Some(&op) = ops.iter().find(|op| op.mode > 1) {
                return Err(OracleError::UnknownOperator { op, modes: 2 });
            }
            let psi: Ket = (0..=n_max).map(|n| ((n, n), coeff(n))).collect();
            let mut ket = psi.clone();
            for &op in ops.iter().rev() {
                ket = apply(op, &ket);
            }
            Ok(ket
                .iter()
                .filter_map(|(k, amp)| psi.get(k).map(|p| p * amp))
                .sum())
        }
    }
}
