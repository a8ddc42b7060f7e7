//! Damped atom-photon pair creation by a Bragg drive, in second moments.
//!
//! A condensate atom scatters a pump photon into the signal mode `a` and
//! recoils into the quasiparticle mode `beta` at momentum `q`; the pair is
//! created coherently at the effective Rabi rate while `beta` decays into
//! the quasiparticle continuum at rate `gamma`. In the interaction picture
//! the closed moment equations are, with X1 = x1 - n0, X2 = x2 + n0 and
//! c = <a beta>,
//!
//!   dX1/dt   = -gamma X1 - 2 Omega Im c
//!   dX2/dt   = -2 Omega Im c
//!   dIm c/dt = -Omega (X1 + X2) - (gamma/2) Im c
//!   dRe c/dt = -(gamma/2) Re c
//!
//! The photon moment x2 = <a a^dag> is kept antinormally ordered because
//! the bath noise enters the moment equations in that ordering; the
//! occupation is recovered as n_a = x2 - 1. The partner mode beta at -q
//! is not driven and only relaxes.

use nalgebra::{Matrix3, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{BogoliubovMode, ModelError, PhysicalParams};
use crate::ode::{self, OdeError, OdeOptions};
use crate::oracle::{GaussianSecondMoments, Op, OracleError};
use crate::rates::{self, Channel, RateError, RateQuery};

/// Squeezing parameters with a smaller denominator are reported undefined.
const DEGENERATE_DENOMINATOR: f64 = 1e-30;

/// Fraction of N0 in the recoil modes beyond which the undepleted-pump
/// approximation is flagged.
const DEPLETION_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    /// Collective two-photon Rabi frequency (s^-1).
    pub rabi_effective: f64,
    /// Recoil momentum in units of k0.
    pub qbar_recoil: f64,
    /// Damping rate to use instead of the computed Beliaev width (s^-1).
    #[serde(default)]
    pub gamma_override: Option<f64>,
    /// Simulated span (s).
    pub t_max: f64,
    /// Output spacing (s).
    pub dt_output: f64,
}

impl DriveConfig {
    /// Drive used to reproduce the pair-creation figures: Omega_eff = 1e3
    /// s^-1 at the recoil momentum qbar = 5, sampled every 10 us to 6 ms.
    pub fn sodium_paper() -> Self {
        Self {
            rabi_effective: 1e3,
            qbar_recoil: 5.0,
            gamma_override: None,
            t_max: 6e-3,
            dt_output: 1e-5,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let check = |name: &'static str, value: f64, ok: bool, reason: &'static str| {
            if value.is_finite() && ok {
                Ok(())
            } else {
                Err(DynamicsError::Domain {
                    name,
                    value,
                    reason,
                })
            }
        };
        check(
            "rabi_effective",
            self.rabi_effective,
            self.rabi_effective >= 0.0,
            "must be non-negative",
        )?;
        check(
            "qbar_recoil",
            self.qbar_recoil,
            self.qbar_recoil > 0.0,
            "must be positive",
        )?;
        check("t_max", self.t_max, self.t_max > 0.0, "must be positive")?;
        check(
            "dt_output",
            self.dt_output,
            self.dt_output > 0.0,
            "must be positive",
        )?;
        if let Some(g) = self.gamma_override {
            check("gamma_override", g, g >= 0.0, "must be non-negative")?;
        }
        Ok(())
    }

    /// Output times 0, dt, 2 dt, ... up to t_max (inclusive within round-off).
    pub fn output_times(&self) -> Vec<f64> {
        let n = (self.t_max / self.dt_output * (1.0 + 1e-12)).floor() as usize;
        (0..=n).map(|i| i as f64 * self.dt_output).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentState {
    /// Time (s).
    pub t: f64,
    /// <beta^dag_q beta_q>.
    pub x1: f64,
    /// <beta^dag_-q beta_-q>.
    pub x1m: f64,
    /// <a a^dag>.
    pub x2: f64,
    /// <a beta_q>.
    pub c: Complex64,
}

impl MomentState {
    /// Quasiparticle and photon vacuum at t = 0.
    pub fn vacuum() -> Self {
        Self {
            t: 0.0,
            x1: 0.0,
            x1m: 0.0,
            x2: 1.0,
            c: Complex64::new(0.0, 0.0),
        }
    }

    fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x1m.is_finite() && self.x2.is_finite() && self.c.is_finite()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("{name} = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("moment integration failed at t = {} s: {reason}", .last.t)]
    Integration { reason: String, last: MomentState },
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

fn check_rates(rabi: f64, gamma: f64) -> Result<(), DynamicsError> {
    if !(rabi.is_finite() && rabi >= 0.0) {
        return Err(DynamicsError::Domain {
            name: "rabi",
            value: rabi,
            reason: "must be finite and non-negative",
        });
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(DynamicsError::Domain {
            name: "gamma",
            value: gamma,
            reason: "must be finite and non-negative",
        });
    }
    Ok(())
}

/// Generator acting on (x1 - n0, x2 + n0, <a beta> - c.c.).
#[rustfmt::skip]
pub fn drift_matrix(rabi: f64, gamma: f64) -> Result<Matrix3<Complex64>, DynamicsError> {
    check_rates(rabi, gamma)?;
    let i = Complex64::i();
    let z = Complex64::new(0.0, 0.0);
    let r = |x: f64| Complex64::new(x, 0.0);
    Ok(Matrix3::new(
        r(-gamma), z, i * rabi,
        z, z, i * rabi,
        -2.0 * i * rabi, -2.0 * i * rabi, r(-0.5 * gamma),
    ))
}

/// Real generator on (X1, X2, Im c, Re c).
#[rustfmt::skip]
fn real_generator(rabi: f64, gamma: f64) -> Matrix4<f64> {
    Matrix4::new(
        -gamma, 0.0, -2.0 * rabi, 0.0,
        0.0, 0.0, -2.0 * rabi, 0.0,
        -rabi, -rabi, -0.5 * gamma, 0.0,
        0.0, 0.0, 0.0, -0.5 * gamma,
    )
}

/// Amplitude growth rate of the driven pair, the positive root of
/// lambda^2 + (gamma/2) lambda - Omega^2 = 0. Second moments grow at twice
/// this rate.
pub fn pair_growth_rate(rabi: f64, gamma: f64) -> f64 {
    0.5 * (-0.5 * gamma + (0.25 * gamma * gamma + 4.0 * rabi * rabi).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Propagator {
    /// exp(M t) applied to the initial state at each output time.
    #[default]
    MatrixExponential,
    /// Adaptive Dormand-Prince stepping of the same equations.
    Adaptive,
}

fn to_vector(s: &MomentState, n0_eq: f64) -> Vector4<f64> {
    Vector4::new(s.x1 - n0_eq, s.x2 + n0_eq, s.c.im, s.c.re)
}

fn from_vector(t: f64, v: &[f64], x1m: f64, n0_eq: f64) -> MomentState {
    MomentState {
        t,
        x1: v[0] + n0_eq,
        x1m,
        x2: v[1] - n0_eq,
        c: Complex64::new(v[3], v[2]),
    }
}

/// Evolves `initial` to each output time `initial.t + k dt_output` of `drive`.
pub fn evolve_moments(
    initial: &MomentState,
    drive: &DriveConfig,
    gamma: f64,
    n0_eq: f64,
    propagator: Propagator,
) -> Result<Vec<MomentState>, DynamicsError> {
    drive.validate()?;
    check_rates(drive.rabi_effective, gamma)?;
    if !(n0_eq.is_finite() && n0_eq >= 0.0) {
        return Err(DynamicsError::Domain {
            name: "n0_eq",
            value: n0_eq,
            reason: "must be finite and non-negative",
        });
    }
    let offsets = drive.output_times();
    let x1m_at = |dt: f64| n0_eq + (-gamma * dt).exp() * (initial.x1m - n0_eq);
    let z0 = to_vector(initial, n0_eq);
    let rabi = drive.rabi_effective;

    let mut out = Vec::with_capacity(offsets.len());
    match propagator {
        Propagator::MatrixExponential => {
            let m = real_generator(rabi, gamma);
            for &dt in &offsets {
                let state = if dt == 0.0 {
                    *initial
                } else {
                    let z = (m * dt).exp() * z0;
                    from_vector(initial.t + dt, z.as_slice(), x1m_at(dt), n0_eq)
                };
                if !state.is_finite() {
                    return Err(DynamicsError::Integration {
                        reason: "non-finite state".into(),
                        last: out.last().copied().unwrap_or(*initial),
                    });
                }
                out.push(state);
            }
        }
        Propagator::Adaptive => {
            let m = real_generator(rabi, gamma);
            let mut y0 = z0.as_slice().to_vec();
            y0.push(initial.x1m - n0_eq);
            let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
                let z = m * Vector4::new(y[0], y[1], y[2], y[3]);
                dy[..4].copy_from_slice(z.as_slice());
                dy[4] = -gamma * y[4];
            };
            let opts = OdeOptions::default();
            let ys = ode::solve(rhs, 0.0, &y0, &offsets, &opts).map_err(|e| {
                let (t, last) = match &e {
                    OdeError::StepUnderflow { t, last, .. }
                    | OdeError::NonFinite { t, last }
                    | OdeError::TooManySteps { t, last } => (*t, last.clone()),
                    OdeError::BadOutputGrid => (0.0, y0.clone()),
                };
                DynamicsError::Integration {
                    reason: e.to_string(),
                    last: from_vector(initial.t + t, &last, last[4] + n0_eq, n0_eq),
                }
            })?;
            for (&dt, y) in offsets.iter().zip(ys) {
                out.push(from_vector(initial.t + dt, &y, y[4] + n0_eq, n0_eq));
            }
        }
    }
    Ok(out)
}

/// (n_a, n_b(+q), n_b(-q)) in particle language.
pub fn occupations(state: &MomentState, mode: &BogoliubovMode) -> (f64, f64, f64) {
    let (u2, v2) = (mode.u * mode.u, mode.v * mode.v);
    (
        state.x2 - 1.0,
        u2 * state.x1 + v2 * (state.x1m + 1.0),
        u2 * state.x1m + v2 * (state.x1 + 1.0),
    )
}

/// Relative number variance Var(n_a - n_b) / <n_a + n_b>; one for
/// uncorrelated coherent light and matter, zero for perfect pairing.
pub fn squeezing_xi3(state: &MomentState, mode: &BogoliubovMode) -> Option<f64> {
    let (na, nb, _) = occupations(state, mode);
    let denom = na + nb;
    if denom < DEGENERATE_DENOMINATOR {
        return None;
    }
    let cross = mode.u * mode.u * state.c.norm_sqr();
    Some((na * (na + 1.0) + nb * (nb + 1.0) - 2.0 * cross) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseSqueezing {
    pub xi1: Option<f64>,
    pub xi2: Option<f64>,
    pub mean_j1: f64,
    pub mean_j2: f64,
}

/// Gaussian moment table over (a, b_q) with b_q = u beta_q + v beta^dag_-q.
pub fn particle_moments(
    state: &MomentState,
    mode: &BogoliubovMode,
) -> Result<GaussianSecondMoments, OracleError> {
    use nalgebra::DMatrix;
    let (na, nb, _) = occupations(state, mode);
    let z = Complex64::new(0.0, 0.0);
    // beta_-q is uncorrelated with a, so only the u beta_q part pairs.
    let ab = state.c * mode.u;
    GaussianSecondMoments::new(
        DMatrix::from_row_slice(2, 2, &[na.into(), z, z, nb.into()]),
        DMatrix::from_row_slice(2, 2, &[z, ab, ab, z]),
    )
}

/// Schwinger-spin variances of J1 = (a^dag b + b^dag a)/2 and
/// J2 = (a^dag b - b^dag a)/2i normalised by J/2 = (n_a + n_b)/4.
pub fn squeezing_xi12(
    state: &MomentState,
    mode: &BogoliubovMode,
) -> Result<TransverseSqueezing, OracleError> {
    let g = particle_moments(state, mode)?;
    let (a, ad, b, bd) = (Op::a(0), Op::ad(0), Op::a(1), Op::ad(1));
    let ab_ = g.pair(ad, b)?;
    let ba_ = g.pair(bd, a)?;
    let mean_j1 = (0.5 * (ab_ + ba_)).re;
    let mean_j2 = (0.5 * (ab_ - ba_) / Complex64::i()).re;
    let w = |ops| g.wick_fourth_moment(ops);
    let (abab, abba, baab, baba) = (
        w([ad, b, ad, b])?,
        w([ad, b, bd, a])?,
        w([bd, a, ad, b])?,
        w([bd, a, bd, a])?,
    );
    let j1_sq = 0.25 * (abab + abba + baab + baba).re;
    let j2_sq = -0.25 * (abab - abba - baab + baba).re;
    let (na, nb, _) = occupations(state, mode);
    let half_j = 0.25 * (na + nb);
    let ratio = |var: f64| (na + nb >= DEGENERATE_DENOMINATOR).then(|| var / half_j);
    Ok(TransverseSqueezing {
        xi1: ratio(j1_sq - mean_j1 * mean_j1),
        xi2: ratio(j2_sq - mean_j2 * mean_j2),
        mean_j1,
        mean_j2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezingPoint {
    pub t: f64,
    pub n_a: f64,
    pub n_b_plus: f64,
    pub n_b_minus: f64,
    pub xi1: Option<f64>,
    pub xi2: Option<f64>,
    pub xi3: Option<f64>,
    /// Recoil populations still below a tenth of the condensate.
    pub depletion_valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingRun {
    /// Damping rate used (s^-1).
    pub gamma: f64,
    pub points: Vec<SqueezingPoint>,
}

/// Pairs the drive with the computed Beliaev width at the recoil momentum
/// (T = 0) and evolves from the vacuum.
pub fn run_squeezing(
    params: &PhysicalParams,
    drive: &DriveConfig,
) -> Result<SqueezingRun, DynamicsError> {
    drive.validate()?;
    params.validate()?;
    let gamma = match drive.gamma_override {
        Some(g) => g,
        None => {
            let query =
                RateQuery::new(drive.qbar_recoil, 0.0, Channel::SingleLevel, params.clone());
            rates::beliaev_rate_single(&query)?.rate
        }
    };
    run_squeezing_with_gamma(params, drive, gamma)
}

pub fn run_squeezing_with_gamma(
    params: &PhysicalParams,
    drive: &DriveConfig,
    gamma: f64,
) -> Result<SqueezingRun, DynamicsError> {
    let mode = crate::model::bogoliubov_mode(drive.qbar_recoil)?;
    let states = evolve_moments(
        &MomentState::vacuum(),
        drive,
        gamma,
        0.0,
        Propagator::MatrixExponential,
    )?;
    let limit = DEPLETION_FRACTION * params.atom_count;
    let points = states
        .iter()
        .map(|s| {
            let (n_a, n_b_plus, n_b_minus) = occupations(s, &mode);
            let t12 = squeezing_xi12(s, &mode)?;
            Ok(SqueezingPoint {
                t: s.t,
                n_a,
                n_b_plus,
                n_b_minus,
                xi1: t12.xi1,
                xi2: t12.xi2,
                xi3: squeezing_xi3(s, &mode),
                depletion_valid: n_b_plus + n_b_minus < limit,
            })
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    Ok(SqueezingRun { gamma, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezingSummary {
    pub xi3_min: Option<f64>,
    pub t_at_xi3_min_s: Option<f64>,
    /// First time with n_a >= n_b(+q).
    pub crossing_time_s: Option<f64>,
}

impl SqueezingSummary {
    /// Extremes over the depletion-valid part of a trajectory.
    pub fn from_points(points: &[SqueezingPoint]) -> Self {
        let valid = || points.iter().filter(|p| p.depletion_valid);
        let min = valid()
            .filter_map(|p| p.xi3.map(|x| (p.t, x)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        Self {
            xi3_min: min.map(|m| m.1),
            t_at_xi3_min_s: min.map(|m| m.0),
            crossing_time_s: valid().find(|p| p.n_a >= p.n_b_plus).map(|p| p.t),
        }
    }
}
