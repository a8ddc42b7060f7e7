//! Physical parameters, natural units and the homogeneous Bogoliubov spectrum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Mass of a ²³Na atom (kg).
pub const SODIUM_23_MASS_KG: f64 = 3.8175e-26;

const ATOM_COUNT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("parameter `{name}` out of domain: {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error(
        "atom count {atom_count} inconsistent with density x volume = {expected} (relative tolerance 1e-9)"
    )]
    AtomCount { atom_count: f64, expected: f64 },
}

fn require_positive(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::Domain {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

/// Second internal level `c` of a two-level atom; the condensate sits in `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevel {
    /// Inter-species scattering length a_bc (m).
    pub a_bc: f64,
}

/// Condensate and atomic constants, in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// s-wave scattering length a (m).
    pub scattering_length: f64,
    /// Atomic mass m (kg).
    pub atomic_mass: f64,
    /// Condensate density n0 (m^-3).
    pub condensate_density: f64,
    /// Quantisation volume V (m^3).
    pub volume: f64,
    /// Condensate atom number N0 = n0 V.
    pub atom_count: f64,
    /// Temperature (K).
    pub temperature: f64,
    pub two_level: Option<TwoLevel>,
}

impl PhysicalParams {
    /// Builds and validates a parameter set; the atom count is derived from
    /// density and volume.
    pub fn new(
        scattering_length: f64,
        atomic_mass: f64,
        condensate_density: f64,
        volume: f64,
        temperature: f64,
    ) -> Result<Self, ModelError> {
        let params = Self {
            scattering_length,
            atomic_mass,
            condensate_density,
            volume,
            atom_count: condensate_density * volume,
            temperature,
            two_level: None,
        };
        params.validate()?;
        Ok(params)
    }

    /// ²³Na at n0 = 1e14 cm^-3 in V = 1e-8 cm^3 (N0 = 1e6), a = 2.8 nm, T = 0.
    pub fn sodium_paper() -> Self {
        Self {
            scattering_length: 2.8e-9,
            atomic_mass: SODIUM_23_MASS_KG,
            condensate_density: 1e20,
            volume: 1e-14,
            atom_count: 1e6,
            temperature: 0.0,
            two_level: None,
        }
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_two_level(mut self, a_bc: f64) -> Self {
        self.two_level = Some(TwoLevel { a_bc });
        self
    }

    /// Inter-species scattering length, defaulting to a_bc = a_bb.
    pub fn a_bc(&self) -> f64 {
        self.two_level
            .map(|t| t.a_bc)
            .unwrap_or(self.scattering_length)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        require_positive("scattering_length", self.scattering_length)?;
        require_positive("atomic_mass", self.atomic_mass)?;
        require_positive("condensate_density", self.condensate_density)?;
        require_positive("volume", self.volume)?;
        require_positive("atom_count", self.atom_count)?;
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(ModelError::Domain {
                name: "temperature",
                value: self.temperature,
                reason: "must be finite and non-negative",
            });
        }
        if let Some(t) = self.two_level {
            require_positive("a_bc", t.a_bc)?;
        }
        let expected = self.condensate_density * self.volume;
        if ((self.atom_count - expected) / expected).abs() > ATOM_COUNT_REL_TOL {
            return Err(ModelError::AtomCount {
                atom_count: self.atom_count,
                expected,
            });
        }
        Ok(())
    }
}

/// Natural unit system of the homogeneous condensate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitSystem {
    /// k0 = sqrt(8 pi a n0) (m^-1).
    pub k0: f64,
    /// omega0 = hbar k0^2 / 2m (s^-1). Equals g n0 / hbar.
    pub omega0: f64,
    /// g = 4 pi hbar^2 a / m (J m^3).
    pub g_coupling: f64,
}

impl UnitSystem {
    /// Momentum in m^-1 for a dimensionless kbar.
    pub fn momentum(&self, kbar: f64) -> f64 {
        kbar * self.k0
    }

    /// Angular frequency in s^-1 for a dimensionless omega_bar.
    pub fn frequency(&self, omega_bar: f64) -> f64 {
        omega_bar * self.omega0
    }
}

pub fn derive_units(params: &PhysicalParams) -> Result<UnitSystem, ModelError> {
    params.validate()?;
    let a = params.scattering_length;
    let m = params.atomic_mass;
    let k0 = (8.0 * std::f64::consts::PI * a * params.condensate_density).sqrt();
    Ok(UnitSystem {
        k0,
        omega0: HBAR * k0 * k0 / (2.0 * m),
        g_coupling: 4.0 * std::f64::consts::PI * HBAR * HBAR * a / m,
    })
}

/// Bogoliubov coefficients of one momentum mode, in the convention
/// b_k = u beta_k + v beta^dag_{-k} with v = alpha u >= 0.
///
/// For repulsive interactions the physical particle amplitude of beta^dag_{-k}
/// is negative; the rate couplings in [`crate::rates`] apply that sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BogoliubovMode {
    pub kbar: f64,
    pub alpha: f64,
    pub u: f64,
    pub v: f64,
    pub omega_bar: f64,
}

/// omega_bar(kbar) = kbar sqrt(2 + kbar^2).
#[inline]
pub fn dispersion(kbar: f64) -> f64 {
    kbar * (2.0 + kbar * kbar).sqrt()
}

/// d omega_bar / d kbar = 2 (1 + kbar^2) / sqrt(2 + kbar^2).
#[inline]
pub fn group_velocity(kbar: f64) -> f64 {
    2.0 * (1.0 + kbar * kbar) / (2.0 + kbar * kbar).sqrt()
}

/// Inverse of [`dispersion`] without domain checks.
///
/// Uses sqrt(1 + w^2) - 1 = w^2 / (sqrt(1 + w^2) + 1) to stay accurate in the
/// phonon regime.
#[inline]
pub fn kbar_of_omega(omega_bar: f64) -> f64 {
    let w2 = omega_bar * omega_bar;
    (w2 / ((1.0 + w2).sqrt() + 1.0)).sqrt()
}

/// alpha = v/u without cancellation: 1 + k^2 - k sqrt(2+k^2) = 1/(1 + k^2 + k sqrt(2+k^2)).
#[inline]
fn alpha_of(kbar: f64) -> f64 {
    let root = kbar * (2.0 + kbar * kbar).sqrt();
    if kbar <= 1.0 {
        1.0 + kbar * kbar - root
    } else {
        1.0 / (1.0 + kbar * kbar + root)
    }
}

/// Coefficients (u, v) for kbar > 0 without domain checks.
#[inline]
pub fn uv(kbar: f64) -> (f64, f64) {
    let alpha = alpha_of(kbar);
    let u = 1.0 / ((1.0 - alpha) * (1.0 + alpha)).sqrt();
    (u, alpha * u)
}

pub fn bogoliubov_mode(kbar: f64) -> Result<BogoliubovMode, ModelError> {
    if !(kbar.is_finite() && kbar > 0.0) {
        return Err(ModelError::Domain {
            name: "kbar",
            value: kbar,
            reason: "the k = 0 mode is the condensate",
        });
    }
    let alpha = alpha_of(kbar);
    let u = 1.0 / ((1.0 - alpha) * (1.0 + alpha)).sqrt();
    Ok(BogoliubovMode {
        kbar,
        alpha,
        u,
        v: alpha * u,
        omega_bar: dispersion(kbar),
    })
}

pub fn inverse_dispersion(omega_bar: f64) -> Result<f64, ModelError> {
    if !(omega_bar.is_finite() && omega_bar > 0.0) {
        return Err(ModelError::Domain {
            name: "omega_bar",
            value: omega_bar,
            reason: "must be finite and strictly positive",
        });
    }
    Ok(kbar_of_omega(omega_bar))
}

/// Planck occupation [exp(hbar omega / k_B T) - 1]^-1; exactly 0 at T = 0.
pub fn thermal_population(omega: f64, temperature: f64) -> Result<f64, ModelError> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(ModelError::Domain {
            name: "omega",
            value: omega,
            reason: "must be finite and strictly positive",
        });
    }
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(ModelError::Domain {
            name: "temperature",
            value: temperature,
            reason: "must be finite and non-negative",
        });
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(bose_factor(HBAR * omega / (K_B * temperature)))
}

/// 1 / (e^x - 1) for x = hbar omega / k_B T > 0; infinite x gives 0.
#[inline]
pub fn bose_factor(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x.exp_m1()
    }
}

/// Temperature in natural units, k_B T / (hbar omega0).
pub fn reduced_temperature(params: &PhysicalParams, units: &UnitSystem) -> f64 {
    K_B * params.temperature / (HBAR * units.omega0)
}
