//! Independent checks of the physics pipeline.
//!
//! * [`bath`]: a finite set of bath modes coupled to one decaying mode,
//!   diagonalised exactly, so exponential decay at the golden-rule rate can
//!   be observed rather than assumed.
//! * [`gaussian`]: fourth moments of zero-mean Gaussian states by Wick
//!   pairing.
//! * [`fock`]: the same moments for a two-mode squeezed vacuum summed
//!   directly in Fock space.

pub mod bath;
pub mod fock;
pub mod gaussian;

use thiserror::Error;

pub use bath::{BathProfile, BathSpec, BathTrajectory, DecayFit};
pub use fock::{tms_fock_reference, TmsObservable};
pub use gaussian::{GaussianSecondMoments, Op};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{0}")]
    Domain(String),
    #[error("operator {op:?} refers to mode {} but the table has {modes} modes", .op.mode)]
    UnknownOperator { op: Op, modes: usize },
    #[error("moment table is not a valid state: {0}")]
    InvalidState(String),
    #[error("Fock truncation for r = {r} needs more than {limit} levels")]
    Truncation { r: f64, limit: usize },
}

use serde::Serialize;

/// Outcome of one oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub expected: f64,
    /// `None` when the oracle itself failed.
    pub observed: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl Verdict {
    fn compare(
        name: impl Into<String>,
        expected: f64,
        observed: f64,
        tolerance: f64,
        relative: bool,
    ) -> Self {
        let dev = (observed - expected).abs();
        let dev = if relative { dev / expected.abs() } else { dev };
        Self {
            name: name.into(),
            expected,
            observed: Some(observed),
            tolerance,
            pass: dev <= tolerance,
        }
    }

    fn failed(name: impl Into<String>, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            expected,
            observed: None,
            tolerance,
            pass: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Suite {
    Markov,
    Wick,
    #[default]
    All,
}

/// Flat bath with spacing gamma_GR / 25: 2000 modes over 5 s^-1,
/// kappa = 0.005 s^-1, so 2 pi kappa^2 rho = 0.0628 s^-1.
pub fn reference_markov_bath() -> BathSpec {
    BathSpec::flat(2000, 5.0, 0.005).expect("reference bath is valid")
}

/// Baths at fixed rho kappa^2 = 0.01 approaching the continuum: spacing
/// halves while the band doubles.
pub fn continuum_refinement_sequence() -> Vec<BathSpec> {
    [(125, 1.25), (500, 2.5), (2000, 5.0)]
        .into_iter()
        .map(|(n, bw)| BathSpec::flat(n, bw, (0.01 * bw / n as f64).sqrt()).expect("valid bath"))
        .collect()
}

const MARKOV_SAMPLES: usize = 400;
const MARKOV_TOLERANCE: f64 = 0.1;
const WICK_TOLERANCE: f64 = 1e-10;

/// Largest |Wick - Fock| over every ordered product of four operators
/// drawn from {a, a^dag, b, b^dag} in the two-mode squeezed vacuum.
pub fn wick_fock_max_deviation(r: f64) -> Result<f64, OracleError> {
    let g = GaussianSecondMoments::two_mode_squeezed(r);
    let ops = [Op::a(0), Op::ad(0), Op::a(1), Op::ad(1)];
    let mut worst = 0.0f64;
    for idx in 0..256usize {
        let quad = [0, 1, 2, 3].map(|k| ops[(idx >> (2 * k)) & 3]);
        let wick = g.wick_fourth_moment(quad)?;
        let fock = tms_fock_reference(r, &TmsObservable::Product(quad.to_vec()))?;
        worst = worst.max((wick - fock).norm());
    }
    Ok(worst)
}

fn markov_verdicts() -> Vec<Verdict> {
    let mut out = Vec::new();
    let bath = reference_markov_bath();
    let gr = bath.golden_rule_rate();
    out.push(match bath::markov_check(&bath, MARKOV_SAMPLES) {
        Ok(c) => Verdict::compare(
            "markov_golden_rule_rate",
            gr,
            c.fitted,
            MARKOV_TOLERANCE,
            true,
        ),
        Err(_) => Verdict::failed("markov_golden_rule_rate", gr, MARKOV_TOLERANCE),
    });

    // 1.0 when every refinement step moves the fit closer to the golden rule.
    let devs: Result<Vec<f64>, _> = continuum_refinement_sequence()
        .iter()
        .map(|b| bath::markov_check(b, MARKOV_SAMPLES).map(|c| c.relative_deviation))
        .collect();
    out.push(match devs {
        Ok(d) => {
            let monotone = d.windows(2).all(|w| w[1] < w[0]);
            Verdict::compare(
                "markov_refinement_monotone",
                1.0,
                f64::from(u8::from(monotone)),
                0.0,
                false,
            )
        }
        Err(_) => Verdict::failed("markov_refinement_monotone", 1.0, 0.0),
    });

    let past_revival = 1.01 * bath.revival_time();
    out.push(
        match bath::integrate_discrete_bath(&bath, past_revival, 2) {
            Ok(t) => Verdict::compare(
                "markov_revival_warning",
                1.0,
                f64::from(u8::from(t.revival_warning)),
                0.0,
                false,
            ),
            Err(_) => Verdict::failed("markov_revival_warning", 1.0, 0.0),
        },
    );
    out
}

fn wick_verdicts() -> Vec<Verdict> {
    [0.1, 0.5, 1.0]
        .into_iter()
        .map(|r| {
            let name = format!("wick_vs_fock_r{r}");
            match wick_fock_max_deviation(r) {
                Ok(dev) => Verdict::compare(name, 0.0, dev, WICK_TOLERANCE, false),
                Err(_) => Verdict::failed(name, 0.0, WICK_TOLERANCE),
            }
        })
        .collect()
}

pub fn run_suite(suite: Suite) -> Vec<Verdict> {
    match suite {
        Suite::Markov => markov_verdicts(),
        Suite::Wick => wick_verdicts(),
        Suite::All => {
            let mut v = markov_verdicts();
            v.extend(wick_verdicts());
            v
        }
    }
}
