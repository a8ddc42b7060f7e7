//! Beliaev and Landau decay widths of a quasiparticle in a homogeneous
//! condensate.
//!
//! The mode sums over momentum-conserving pairs carry an energy delta
//! distribution. For plane waves the polar angle is removed analytically
//! against the delta; what remains is a one-dimensional integral. We
//! integrate over the energy `w = omega_k` of one decay product rather than
//! over `k`, because
//!
//!   d^3k delta(...) = (2 pi / q) (k / omega'(k)) (p / omega'(p)) dw
//!
//! is symmetric under exchange of the two products and free of the
//! square-root edges the k-parametrisation has at the phonon end.
//!
//! Rates are returned in s^-1 as population decay rates: a mode occupation
//! relaxes as exp(-gamma t), its amplitude as exp(-gamma t / 2).
//!
//! Couplings use the physical sign of the Bogoliubov amplitudes for a
//! repulsive gas (b_k = u beta_k - v beta^dag_{-k} with u, v > 0); with that
//! sign the single-level Beliaev width reduces to 3 hbar q^5 / (320 pi m n0)
//! as q -> 0 and to n0 (8 pi a^2) hbar q / m as q -> infinity.

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    self, bose_factor, dispersion, group_velocity, kbar_of_omega, ModelError, PhysicalParams,
    UnitSystem, HBAR,
};
use crate::quadrature::{self, QuadError, QuadOptions};

use std::f64::consts::PI;

/// The Landau integral is truncated where exp(-hbar omega / k_B T) falls
/// below this fraction of its value at omega = 0.
const LANDAU_TAIL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    /// Excited atoms share the internal state of the condensate.
    SingleLevel,
    /// Excited atoms occupy a second internal level `c`.
    TwoLevel,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Channel::SingleLevel => "single-level",
            Channel::TwoLevel => "two-level",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateQuery {
    /// Momentum of the decaying mode in units of k0.
    pub qbar: f64,
    /// Temperature (K); overrides `params.temperature`.
    pub temperature: f64,
    pub channel: Channel,
    pub params: PhysicalParams,
}

impl RateQuery {
    pub fn new(qbar: f64, temperature: f64, channel: Channel, params: PhysicalParams) -> Self {
        Self {
            qbar,
            temperature,
            channel,
            params,
        }
    }
}

/// Rate of one process with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelRate {
    /// Population decay rate (s^-1).
    pub rate: f64,
    /// Quadrature error estimate (s^-1).
    pub error_estimate: f64,
    /// Integration support in units of k0 for the momentum of the
    /// quasiparticle emitted (Beliaev) or absorbed (Landau); `None` when
    /// the process is kinematically closed or trivially zero.
    pub window: Option<(f64, f64)>,
}

impl ChannelRate {
    fn zero() -> Self {
        Self {
            rate: 0.0,
            error_estimate: 0.0,
            window: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateResult {
    pub gamma_beliaev: f64,
    pub gamma_landau: f64,
    pub gamma_total: f64,
    pub quadrature_error_estimate: f64,
    /// Beliaev integration support (units of k0).
    pub kinematic_window: Option<(f64, f64)>,
    /// Landau integration support after tail truncation (units of k0).
    pub landau_window: Option<(f64, f64)>,
    /// Frequency of the decaying mode (s^-1).
    pub omega_q: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("query momentum qbar must be finite and positive, got {0}")]
    Momentum(f64),
    #[error("{op} requires the {expected} channel")]
    WrongChannel { op: &'static str, expected: Channel },
    #[error("{process} quadrature did not converge: partial rate {partial_rate} s^-1 (error estimate {error_estimate} s^-1)")]
    NoConvergence {
        process: &'static str,
        partial_rate: f64,
        error_estimate: f64,
    },
    #[error("{process} integrand is not finite at w = {w}")]
    NonFinite { process: &'static str, w: f64 },
    #[error(
        "{process} rate came out negative ({rate} s^-1): population factor has the wrong sign"
    )]
    NegativeRate { process: &'static str, rate: f64 },
}

/// Tolerances for the rate integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateOptions {
    pub quad: QuadOptions,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self {
            quad: QuadOptions {
                // Rates at small q sit many decades below omega0, so only a
                // relative criterion is meaningful.
                abs_tol: 0.0,
                rel_tol: 1e-8,
                max_subdivisions: 2000,
            },
        }
    }
}

/// Everything the integrands need, in natural units.
#[derive(Debug, Clone, Copy)]
struct Kinematics {
    q: f64,
    /// k_B T / (hbar omega0); zero at T = 0.
    theta: f64,
    /// omega0 k0^3 / n0 (s^-1): converts the reduced integral to a rate.
    scale: f64,
    /// (a_bc / a)^2, the two-level coupling relative to g^2.
    coupling_ratio: f64,
    omega0: f64,
}

impl Kinematics {
    fn new(query: &RateQuery) -> Result<Self, RateError> {
        if !(query.qbar.is_finite() && query.qbar > 0.0) {
            return Err(RateError::Momentum(query.qbar));
        }
        let params = query.params.clone().with_temperature(query.temperature);
        let units = model::derive_units(&params)?;
        let a_ratio = params.a_bc() / params.scattering_length;
        Ok(Self {
            q: query.qbar,
            theta: model::reduced_temperature(&params, &units),
            scale: scale_rate(&params, &units),
            coupling_ratio: a_ratio * a_ratio,
            omega0: units.omega0,
        })
    }

    /// Bose occupation at reduced frequency `w`.
    fn occupation(&self, w: f64) -> f64 {
        if self.theta == 0.0 {
            0.0
        } else {
            bose_factor(w / self.theta)
        }
    }

    /// Frequency above which the Bose weight is negligible.
    fn thermal_cutoff(&self) -> f64 {
        self.theta * (1.0 / LANDAU_TAIL).ln()
    }
}

fn scale_rate(params: &PhysicalParams, units: &UnitSystem) -> f64 {
    units.omega0 * units.k0.powi(3) / params.condensate_density
}

/// Single-level Beliaev amplitude for q -> k + p, divided by sqrt(n0 / V).
///
/// Written in terms of d = u - v so that the large u^3 terms, which cancel
/// for phonons, never appear.
pub fn beliaev_amplitude(q: f64, k: f64, p: f64) -> f64 {
    let (dq2, dk2, dp2) = (
        density_vertex_sq(q),
        density_vertex_sq(k),
        density_vertex_sq(p),
    );
    (3.0 * dq2 * dk2 * dp2 + dk2 + dp2 - dq2) / (4.0 * (dq2 * dk2 * dp2).sqrt())
}

/// Single-level Landau amplitude for q + k -> p, divided by sqrt(n0 / V).
///
/// Equal to the Beliaev amplitude of p decaying into q and k.
pub fn landau_amplitude(q: f64, k: f64, p: f64) -> f64 {
    beliaev_amplitude(p, q, k)
}

/// (u_k - v_k)^2 = kbar / sqrt(2 + kbar^2): the density-vertex weight of a
/// b-quasiparticle emitted or absorbed by a c-atom.
#[inline]
fn density_vertex_sq(k: f64) -> f64 {
    k / (2.0 + k * k).sqrt()
}

/// k / omega'(k) as a function of w = omega(k).
#[inline]
fn phase_space(k: f64) -> f64 {
    k / group_velocity(k)
}

fn integrate_process<F: FnMut(f64) -> f64>(
    process: &'static str,
    f: F,
    lo: f64,
    hi: f64,
    prefactor: f64,
    opts: &RateOptions,
) -> Result<(f64, f64), RateError> {
    match quadrature::integrate(f, lo, hi, &opts.quad) {
        Ok(r) => Ok((prefactor * r.value, prefactor * r.abs_error)),
        Err(QuadError::NoConvergence { partial }) => Err(RateError::NoConvergence {
            process,
            partial_rate: prefactor * partial.value,
            error_estimate: prefactor * partial.abs_error,
        }),
        Err(QuadError::NonFinite { x }) => Err(RateError::NonFinite { process, w: x }),
    }
}

fn check_positive(process: &'static str, rate: ChannelRate) -> Result<ChannelRate, RateError> {
    if rate.rate < 0.0 {
        Err(RateError::NegativeRate {
            process,
            rate: rate.rate,
        })
    } else {
        Ok(rate)
    }
}

fn require_channel(
    query: &RateQuery,
    op: &'static str,
    expected: Channel,
) -> Result<(), RateError> {
    if query.channel == expected {
        Ok(())
    } else {
        Err(RateError::WrongChannel { op, expected })
    }
}

/// Single-level Beliaev integral over `w` in `[lo, hi]` (a subrange of
/// `[0, omega_q]`), already scaled to s^-1.
fn beliaev_single_between(
    kin: &Kinematics,
    lo: f64,
    hi: f64,
    opts: &RateOptions,
) -> Result<(f64, f64), RateError> {
    let q = kin.q;
    let wq = dispersion(q);
    let integrand = |w: f64| {
        let wp = wq - w;
        let k = kbar_of_omega(w);
        let p = kbar_of_omega(wp);
        let b = beliaev_amplitude(q, k, p);
        phase_space(k) * phase_space(p) * b * b * (1.0 + kin.occupation(w) + kin.occupation(wp))
    };
    // gamma_B = 4 pi (g/hbar)^2 sum |B|^2 (1 + n + n) delta, reduced.
    integrate_process(
        "single-level Beliaev",
        integrand,
        lo,
        hi,
        kin.scale / (PI * q),
        opts,
    )
}

pub fn beliaev_rate_single(query: &RateQuery) -> Result<ChannelRate, RateError> {
    beliaev_rate_single_with(query, &RateOptions::default())
}

pub fn beliaev_rate_single_with(
    query: &RateQuery,
    opts: &RateOptions,
) -> Result<ChannelRate, RateError> {
    require_channel(query, "beliaev_rate_single", Channel::SingleLevel)?;
    let kin = Kinematics::new(query)?;
    // Bogoliubov dispersion is superadditive, so every k in (0, q) is allowed.
    let (rate, err) = beliaev_single_between(&kin, 0.0, dispersion(kin.q), opts)?;
    check_positive(
        "single-level Beliaev",
        ChannelRate {
            rate,
            error_estimate: err,
            window: Some((0.0, kin.q)),
        },
    )
}

/// Beliaev width from the half window `w < omega_q / 2`, doubled. Equal to
/// the full integral by the exchange symmetry of the decay products.
pub fn beliaev_rate_single_half_window(query: &RateQuery) -> Result<f64, RateError> {
    require_channel(
        query,
        "beliaev_rate_single_half_window",
        Channel::SingleLevel,
    )?;
    let kin = Kinematics::new(query)?;
    let (rate, _) =
        beliaev_single_between(&kin, 0.0, 0.5 * dispersion(kin.q), &RateOptions::default())?;
    Ok(2.0 * rate)
}

pub fn landau_rate_single(query: &RateQuery) -> Result<ChannelRate, RateError> {
    landau_rate_single_with(query, &RateOptions::default())
}

pub fn landau_rate_single_with(
    query: &RateQuery,
    opts: &RateOptions,
) -> Result<ChannelRate, RateError> {
    require_channel(query, "landau_rate_single", Channel::SingleLevel)?;
    landau_single_kin(&Kinematics::new(query)?, opts)
}

fn landau_single_kin(kin: &Kinematics, opts: &RateOptions) -> Result<ChannelRate, RateError> {
    if kin.theta == 0.0 {
        return Ok(ChannelRate::zero());
    }
    let q = kin.q;
    let wq = dispersion(q);
    let w_cut = kin.thermal_cutoff();
    let integrand = |w: f64| {
        let wp = wq + w;
        let k = kbar_of_omega(w);
        let p = kbar_of_omega(wp);
        let a = landau_amplitude(q, k, p);
        phase_space(k) * phase_space(p) * a * a * (kin.occupation(w) - kin.occupation(wp))
    };
    // gamma_L = 8 pi (g/hbar)^2 sum |A|^2 (n_i - n_j) delta, reduced.
    let (rate, err) = integrate_process(
        "single-level Landau",
        integrand,
        0.0,
        w_cut,
        2.0 * kin.scale / (PI * q),
        opts,
    )?;
    check_positive(
        "single-level Landau",
        ChannelRate {
            rate,
            error_estimate: err,
            window: Some((0.0, kbar_of_omega(w_cut))),
        },
    )
}

/// Largest emitted b-quasiparticle momentum for which a free c-atom of
/// momentum q can decay; `None` below the Landau critical momentum 1/sqrt(2).
fn two_level_beliaev_kmax(q: f64) -> Option<f64> {
    let k = (2.0 * q * q - 1.0) / (2.0 * q);
    (k > 0.0).then_some(k)
}

/// Smallest absorbable b-quasiparticle momentum for a free c-atom of momentum q.
fn two_level_landau_kmin(q: f64) -> f64 {
    ((1.0 - 2.0 * q * q) / (2.0 * q)).max(0.0)
}

pub fn beliaev_rate_two_level(query: &RateQuery) -> Result<ChannelRate, RateError> {
    beliaev_rate_two_level_with(query, &RateOptions::default())
}

pub fn beliaev_rate_two_level_with(
    query: &RateQuery,
    opts: &RateOptions,
) -> Result<ChannelRate, RateError> {
    require_channel(query, "beliaev_rate_two_level", Channel::TwoLevel)?;
    let kin = Kinematics::new(query)?;
    let q = kin.q;
    let Some(k_max) = two_level_beliaev_kmax(q) else {
        return Ok(ChannelRate::zero());
    };
    // c-atoms have free dispersion omega_c = kbar^2; constant shifts cancel
    // between the initial and final c-mode.
    let wq = q * q;
    let integrand = |w: f64| {
        let k = kbar_of_omega(w);
        0.5 * phase_space(k)
            * density_vertex_sq(k)
            * (1.0 + kin.occupation(w) + kin.occupation(wq - w))
    };
    // gamma_B = 2 pi (g_bc/hbar)^2 sum |B^bc|^2 (1 + n + n) delta, reduced.
    let (rate, err) = integrate_process(
        "two-level Beliaev",
        integrand,
        0.0,
        dispersion(k_max),
        kin.scale * kin.coupling_ratio / (2.0 * PI * q),
        opts,
    )?;
    check_positive(
        "two-level Beliaev",
        ChannelRate {
            rate,
            error_estimate: err,
            window: Some((0.0, k_max)),
        },
    )
}

/// Which population is subtracted in the two-level Landau factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PopulationOrder {
    /// n_b(absorbed) - n_c(final).
    Physical,
    /// n_c(final) - n_b(absorbed).
    #[cfg_attr(not(test), allow(dead_code))]
    Swapped,
}

pub fn landau_rate_two_level(query: &RateQuery) -> Result<ChannelRate, RateError> {
    landau_two_level_impl(query, &RateOptions::default(), PopulationOrder::Physical)
}

pub fn landau_rate_two_level_with(
    query: &RateQuery,
    opts: &RateOptions,
) -> Result<ChannelRate, RateError> {
    landau_two_level_impl(query, opts, PopulationOrder::Physical)
}

pub(crate) fn landau_two_level_impl(
    query: &RateQuery,
    opts: &RateOptions,
    order: PopulationOrder,
) -> Result<ChannelRate, RateError> {
    require_channel(query, "landau_rate_two_level", Channel::TwoLevel)?;
    let kin = Kinematics::new(query)?;
    if kin.theta == 0.0 {
        return Ok(ChannelRate::zero());
    }
    let q = kin.q;
    let k_min = two_level_landau_kmin(q);
    let w_lo = dispersion(k_min);
    let w_cut = kin.thermal_cutoff();
    if w_cut <= w_lo {
        return Ok(ChannelRate::zero());
    }
    let wq = q * q;
    let sign = match order {
        PopulationOrder::Physical => 1.0,
        PopulationOrder::Swapped => -1.0,
    };
    let integrand = |w: f64| {
        let k = kbar_of_omega(w);
        0.5 * phase_space(k)
            * density_vertex_sq(k)
            * sign
            * (kin.occupation(w) - kin.occupation(wq + w))
    };
    let (rate, err) = integrate_process(
        "two-level Landau",
        integrand,
        w_lo,
        w_cut,
        kin.scale * kin.coupling_ratio / (2.0 * PI * q),
        opts,
    )?;
    check_positive(
        "two-level Landau",
        ChannelRate {
            rate,
            error_estimate: err,
            window: Some((k_min, kbar_of_omega(w_cut))),
        },
    )
}

/// Small-q Beliaev width at T = 0: 3 hbar q^5 / (320 pi m n0) for a single
/// level, hbar q^5 / (96 pi m n0) for two levels with a_bc = a (scaled by
/// (a_bc/a)^2 otherwise).
pub fn beliaev_asymptote(
    qbar: f64,
    channel: Channel,
    params: &PhysicalParams,
) -> Result<f64, RateError> {
    if !(qbar.is_finite() && qbar > 0.0) {
        return Err(RateError::Momentum(qbar));
    }
    let units = model::derive_units(params)?;
    let q = units.momentum(qbar);
    let base = HBAR * q.powi(5) / (PI * params.atomic_mass * params.condensate_density);
    Ok(match channel {
        Channel::SingleLevel => 3.0 * base / 320.0,
        Channel::TwoLevel => {
            let r = params.a_bc() / params.scattering_length;
            r * r * base / 96.0
        }
    })
}

/// Both widths of the query's channel.
pub fn decay_rates(query: &RateQuery) -> Result<RateResult, RateError> {
    decay_rates_with(query, &RateOptions::default())
}

pub fn decay_rates_with(query: &RateQuery, opts: &RateOptions) -> Result<RateResult, RateError> {
    let (beliaev, landau, omega_bar) = match query.channel {
        Channel::SingleLevel => (
            beliaev_rate_single_with(query, opts)?,
            landau_rate_single_with(query, opts)?,
            dispersion(query.qbar),
        ),
        Channel::TwoLevel => (
            beliaev_rate_two_level_with(query, opts)?,
            landau_rate_two_level_with(query, opts)?,
            query.qbar * query.qbar,
        ),
    };
    let units = model::derive_units(&query.params)?;
    Ok(RateResult {
        gamma_beliaev: beliaev.rate,
        gamma_landau: landau.rate,
        gamma_total: beliaev.rate + landau.rate,
        quadrature_error_estimate: beliaev.error_estimate + landau.error_estimate,
        kinematic_window: beliaev.window,
        landau_window: landau.window,
        omega_q: units.frequency(omega_bar),
    })
}

#[doc(hidden)]
pub fn omega0_of(query: &RateQuery) -> Result<f64, RateError> {
    Ok(Kinematics::new(query)?.omega0)
}
