//! One mode coupled to a finite set of bath modes,
//!
//!   db/dt   = -i sum_m kappa_m g_m,
//!   dg_m/dt = -i Delta_m g_m - i kappa_m b,
//!
//! started from b = 1, g = 0. The generator is an arrowhead matrix whose
//! eigenvalues are the roots of the secular equation
//!
//!   E = sum_m kappa_m^2 / (E - Delta_m),
//!
//! one in each gap between consecutive detunings plus one on either side.
//! With the eigenpairs in hand b(t) = sum_j w_j exp(-i E_j t) is exact at any
//! t, so no time stepping error competes with the Markov deviation we want
//! to measure.

use num_complex::Complex64;
use serde::Serialize;

use super::OracleError;

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BathProfile {
    /// Equal couplings across the band.
    Flat,
    /// Equal couplings in the middle of the band, tapered to zero by a
    /// sine-squared ramp over the outer tenth on each side.
    WindowedSmooth,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BathSpec {
    /// Detunings from the decaying mode (s^-1), strictly increasing.
    pub detunings: Vec<f64>,
    /// Coupling amplitudes kappa_m (s^-1), non-negative.
    pub couplings: Vec<f64>,
    pub profile: BathProfile,
}

const TAPER_FRACTION: f64 = 0.1;

impl BathSpec {
    pub fn new(
        detunings: Vec<f64>,
        couplings: Vec<f64>,
        profile: BathProfile,
    ) -> Result<Self, OracleError> {
        if detunings.is_empty() || detunings.len() != couplings.len() {
            return Err(OracleError::Domain(format!(
                "bath needs matching, non-empty detuning and coupling lists (got {} and {})",
                detunings.len(),
                couplings.len()
            )));
        }
        if detunings.iter().any(|d| !d.is_finite()) || detunings.windows(2).any(|w| w[1] <= w[0]) {
            return Err(OracleError::Domain(
                "bath detunings must be finite and strictly increasing".into(),
            ));
        }
        if couplings.iter().any(|&k| !(k.is_finite() && k >= 0.0)) {
            return Err(OracleError::Domain(
                "bath couplings must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            detunings,
            couplings,
            profile,
        })
    }

    /// `mode_count` modes evenly filling `bandwidth` centred on resonance.
    pub fn flat(mode_count: usize, bandwidth: f64, kappa: f64) -> Result<Self, OracleError> {
        Self::banded(mode_count, bandwidth, kappa, BathProfile::Flat)
    }

    pub fn windowed_smooth(
        mode_count: usize,
        bandwidth: f64,
        kappa: f64,
    ) -> Result<Self, OracleError> {
        Self::banded(mode_count, bandwidth, kappa, BathProfile::WindowedSmooth)
    }

    fn banded(
        mode_count: usize,
        bandwidth: f64,
        kappa: f64,
        profile: BathProfile,
    ) -> Result<Self, OracleError> {
        if mode_count == 0 || !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(OracleError::Domain(format!(
                "bath needs at least one mode and a positive bandwidth (got {mode_count}, {bandwidth})"
            )));
        }
        let spacing = bandwidth / mode_count as f64;
        let half = 0.5 * bandwidth;
        let detunings: Vec<f64> = (0..mode_count)
            .map(|m| -half + (m as f64 + 0.5) * spacing)
            .collect();
        let couplings = detunings
            .iter()
            .map(|&d| match profile {
                BathProfile::Flat => kappa,
                BathProfile::WindowedSmooth => {
                    let edge = half - d.abs();
                    let ramp = TAPER_FRACTION * bandwidth;
                    if edge >= ramp {
                        kappa
                    } else {
                        kappa * (0.5 * PI * edge / ramp).sin().powi(2)
                    }
                }
            })
            .collect();
        Self::new(detunings, couplings, profile)
    }

    pub fn mode_count(&self) -> usize {
        self.detunings.len()
    }

    /// Smallest gap between adjacent detunings (infinite for one mode).
    pub fn spacing(&self) -> f64 {
        self.detunings
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// 2 pi / spacing: the time after which a discrete bath rephases.
    pub fn revival_time(&self) -> f64 {
        2.0 * PI / self.spacing()
    }

    /// 2 pi kappa^2 rho evaluated at resonance, from the mode nearest zero
    /// detuning and its local spacing.
    pub fn golden_rule_rate(&self) -> f64 {
        let m = self
            .detunings
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .expect("bath is non-empty");
        let d = &self.detunings;
        let local = match (m.checked_sub(1), d.get(m + 1)) {
            (Some(l), Some(r)) => 0.5 * (r - d[l]),
            (Some(l), None) => d[m] - d[l],
            (None, Some(r)) => r - d[m],
            (None, None) => return 0.0,
        };
        2.0 * PI * self.couplings[m].powi(2) / local
    }
}

/// Exact eigen-decomposition of the bath generator projected on b.
#[derive(Debug, Clone)]
struct Spectrum {
    energies: Vec<f64>,
    weights: Vec<f64>,
}

impl Spectrum {
    fn amplitude(&self, t: f64) -> Complex64 {
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(&e, &w)| w * Complex64::from_polar(1.0, -e * t))
            .sum()
    }
}

/// f(E) = E - sum z / (E - d) and f'(E), with E = d[base] + x so that
/// distances to the bracketing poles keep full precision.
fn secular(d: &[f64], z: &[f64], base: usize, x: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut dsum = 0.0;
    for (&dn, &zn) in d.iter().zip(z) {
        let gap = (d[base] - dn) + x;
        let inv = 1.0 / gap;
        sum += zn * inv;
        dsum += zn * inv * inv;
    }
    (d[base] + x - sum, 1.0 + dsum)
}

/// Root of the increasing function f on the bracket (lo, hi) in offset x.
fn bracketed_root(d: &[f64], z: &[f64], base: usize, mut lo: f64, mut hi: f64) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (f, df) = secular(d, z, base, x);
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / df;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
            || hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs())
        {
            return next;
        }
        x = next;
    }
    x
}

fn diagonalise(bath: &BathSpec) -> Spectrum {
    // Uncoupled modes never exchange amplitude with b.
    let (d, z): (Vec<f64>, Vec<f64>) = bath
        .detunings
        .iter()
        .zip(&bath.couplings)
        .filter(|(_, &k)| k > 0.0)
        .map(|(&d, &k)| (d, k * k))
        .unzip();
    if d.is_empty() {
        return Spectrum {
            energies: vec![0.0],
            weights: vec![1.0],
        };
    }
    let n = d.len();
    let reach = z.iter().sum::<f64>().sqrt() + d[0].abs().max(d[n - 1].abs()) + 1.0;
    let mut energies = Vec::with_capacity(n + 1);
    let mut weights = Vec::with_capacity(n + 1);
    let mut push = |base: usize, x: f64| {
        let (_, df) = secular(&d, &z, base, x);
        energies.push(d[base] + x);
        weights.push(1.0 / df);
    };
    push(0, bracketed_root(&d, &z, 0, -2.0 * reach, 0.0));
    for i in 0..n - 1 {
        push(i, bracketed_root(&d, &z, i, 0.0, d[i + 1] - d[i]));
    }
    push(n - 1, bracketed_root(&d, &z, n - 1, 0.0, 2.0 * reach));
    Spectrum { energies, weights }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BathTrajectory {
    pub times: Vec<f64>,
    /// |b(t)|.
    pub amplitude: Vec<f64>,
    /// Set when the sampled span reaches the revival time 2 pi / spacing.
    pub revival_warning: bool,
}

/// Samples |b(t)| at `samples` evenly spaced times on [0, t_max].
pub fn integrate_discrete_bath(
    bath: &BathSpec,
    t_max: f64,
    samples: usize,
) -> Result<BathTrajectory, OracleError> {
    if !(t_max.is_finite() && t_max > 0.0) || samples < 2 {
        return Err(OracleError::Domain(format!(
            "need t_max > 0 and at least two samples (got {t_max}, {samples})"
        )));
    }
    let spectrum = diagonalise(bath);
    let last = samples - 1;
    let times: Vec<f64> = (0..samples)
        .map(|i| {
            if i == last {
                t_max
            } else {
                t_max * i as f64 / last as f64
            }
        })
        .collect();
    let amplitude = times
        .iter()
        .map(|&t| spectrum.amplitude(t).norm())
        .collect();
    Ok(BathTrajectory {
        times,
        amplitude,
        revival_warning: t_max > bath.revival_time(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Minus the slope of ln |b|^2.
    pub gamma: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares fit of ln |b|^2 against t over `window`.
pub fn fit_decay_rate(
    times: &[f64],
    amplitude: &[f64],
    window: (f64, f64),
) -> Result<DecayFit, OracleError> {
    let (w0, w1) = window;
    let (Some(&first), Some(&last)) = (times.first(), times.last()) else {
        return Err(OracleError::Domain("empty series".into()));
    };
    if times.len() != amplitude.len() || !(w0 < w1) || w0 < first || w1 > last {
        return Err(OracleError::Domain(format!(
            "fit window [{w0}, {w1}] must lie inside the series span [{first}, {last}]"
        )));
    }
    let mut pts = Vec::new();
    for (&t, &a) in times.iter().zip(amplitude) {
        if t < w0 || t > w1 {
            continue;
        }
        if !(a > 0.0) {
            return Err(OracleError::Domain(format!(
                "amplitude must be positive inside the fit window (t = {t})"
            )));
        }
        pts.push((t, 2.0 * a.ln()));
    }
    if pts.len() < 2 {
        return Err(OracleError::Domain(
            "fit window holds fewer than two samples".into(),
        ));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let slope = sxy / sxx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - (my + slope * (p.0 - mt))).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        gamma: -slope,
        residual,
        points: pts.len(),
    })
}

/// Fit window for the Markov comparison: three e-foldings of |b|^2 at the
/// golden-rule rate or half the revival time, whichever ends first.
pub fn markov_fit_window(bath: &BathSpec) -> (f64, f64) {
    let gamma = bath.golden_rule_rate();
    (0.0, (3.0 / gamma).min(0.5 * bath.revival_time()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkovCheck {
    pub golden_rule: f64,
    pub fitted: f64,
    pub relative_deviation: f64,
    pub residual: f64,
}

/// Fits the decay of `bath` over [`markov_fit_window`] and compares with
/// the golden-rule rate.
pub fn markov_check(bath: &BathSpec, samples: usize) -> Result<MarkovCheck, OracleError> {
    let golden_rule = bath.golden_rule_rate();
    if !(golden_rule > 0.0) {
        return Err(OracleError::Domain(
            "bath has no coupling at resonance".into(),
        ));
    }
    let window = markov_fit_window(bath);
    let traj = integrate_discrete_bath(bath, window.1, samples)?;
    let fit = fit_decay_rate(&traj.times, &traj.amplitude, window)?;
    Ok(MarkovCheck {
        golden_rule,
        fitted: fit.gamma,
        relative_deviation: (fit.gamma - golden_rule).abs() / golden_rule,
        residual: fit.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one_and_roots_interlace() {
        let bath = BathSpec::windowed_smooth(300, 3.0, 0.02).unwrap();
        let s = diagonalise(&bath);
        let total: f64 = s.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-12, "{total}");
        assert!(s.energies.windows(2).all(|w| w[1] > w[0]));
        assert!((s.amplitude(0.0) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn matches_direct_eigensolver() {
        let bath = BathSpec::new(
            vec![-1.0, -0.2, 0.3, 1.1],
            vec![0.3, 0.0, 0.5, 0.2],
            BathProfile::Flat,
        )
        .unwrap();
        let s = diagonalise(&bath);
        let n = bath.mode_count() + 1;
        let h = nalgebra::DMatrix::from_fn(n, n, |i, j| match (i, j) {
            (0, 0) => 0.0,
            (0, j) => bath.couplings[j - 1],
            (i, 0) => bath.couplings[i - 1],
            (i, j) if i == j => bath.detunings[i - 1],
            _ => 0.0,
        });
        let eig = h.symmetric_eigen();
        for t in [0.5, 3.0, 17.0] {
            let direct: Complex64 = (0..n)
                .map(|j| {
                    eig.eigenvectors[(0, j)].powi(2)
                        * Complex64::from_polar(1.0, -eig.eigenvalues[j] * t)
                })
                .sum();
            assert!((direct - s.amplitude(t)).norm() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn single_resonant_mode_oscillates() {
        let bath = BathSpec::new(vec![0.0], vec![0.7], BathProfile::Flat).unwrap();
        let tr = integrate_discrete_bath(&bath, 20.0, 101).unwrap();
        for (t, a) in tr.times.iter().zip(&tr.amplitude) {
            assert!((a - (0.7 * t).cos().abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn uncoupled_bath_leaves_mode_alone() {
        let bath = BathSpec::flat(50, 1.0, 0.0).unwrap();
        let tr = integrate_discrete_bath(&bath, 100.0, 11).unwrap();
        assert!(tr.amplitude.iter().all(|&a| (a - 1.0).abs() < 1e-15));
    }

    #[test]
    fn golden_rule_decay_for_reference_bath() {
        // rho = 100 s over 10 s^-1, kappa = 0.01 s^-1.
        let bath = BathSpec::flat(1000, 10.0, 0.01).unwrap();
        let gr = bath.golden_rule_rate();
        assert!((gr - 2.0 * PI * 1e-4 * 100.0).abs() < 1e-12);
        let check = markov_check(&bath, 400).unwrap();
        assert!(check.relative_deviation < 0.1, "{check:?}");
    }

    #[test]
    fn refinement_approaches_golden_rule_monotonically() {
        // Halving the spacing at fixed band converges to a finite-band limit
        // whose offset scales as 1/bandwidth; the continuum limit needs the
        // band to widen as well.
        let mut last = f64::INFINITY;
        for (n, bandwidth) in [(125, 1.25), (500, 2.5), (2000, 5.0)] {
            let spacing = bandwidth / n as f64;
            let bath = BathSpec::flat(n, bandwidth, (0.01 * spacing).sqrt()).unwrap();
            let dev = markov_check(&bath, 400).unwrap().relative_deviation;
            assert!(dev < last, "n = {n}: {dev} after {last}");
            last = dev;
        }
        assert!(last < 0.1);
    }

    #[test]
    fn fixed_band_refinement_saturates() {
        let dev = |n: usize| {
            let spacing = 5.0 / n as f64;
            let bath = BathSpec::flat(n, 5.0, (0.01 * spacing).sqrt()).unwrap();
            markov_check(&bath, 400).unwrap().relative_deviation
        };
        let (coarse, fine) = (dev(200), dev(800));
        assert!((coarse - fine).abs() < 1e-3 * fine);
        assert!(fine > 5e-3);
    }

    #[test]
    fn revival_after_recurrence_time_only() {
        let bath = BathSpec::flat(500, 5.0, 0.1f64.sqrt() * 0.1).unwrap();
        let gamma = bath.golden_rule_rate();
        let t_rev = bath.revival_time();
        let tr = integrate_discrete_bath(&bath, t_rev + 4.0 / gamma, 8000).unwrap();
        assert!(tr.revival_warning);
        let max_in = |lo: f64, hi: f64| {
            tr.times
                .iter()
                .zip(&tr.amplitude)
                .filter(|(t, _)| **t >= lo && **t <= hi)
                .map(|(_, a)| *a)
                .fold(0.0, f64::max)
        };
        assert!(max_in(5.0 / gamma, 0.9 * t_rev) < 0.5);
        assert!(max_in(t_rev, t_rev + 4.0 / gamma) > 0.5);
        let short = integrate_discrete_bath(&bath, 0.5 * t_rev, 10).unwrap();
        assert!(!short.revival_warning);
    }

    #[test]
    fn fit_recovers_exact_exponential_and_flat_series() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.05).collect();
        let a: Vec<f64> = t.iter().map(|t| (-t / 2.0).exp()).collect();
        let fit = fit_decay_rate(&t, &a, (0.0, 4.0)).unwrap();
        assert!((fit.gamma - 1.0).abs() < 1e-12 && fit.residual < 1e-12);
        let flat = vec![1.0; t.len()];
        assert_eq!(fit_decay_rate(&t, &flat, (1.0, 2.0)).unwrap().gamma, 0.0);
        assert!(fit_decay_rate(&t, &a, (-1.0, 2.0)).is_err());
        assert!(fit_decay_rate(&t, &a, (2.0, 9.0)).is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(BathSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], BathProfile::Flat).is_err());
        assert!(BathSpec::new(vec![0.0], vec![-1.0], BathProfile::Flat).is_err());
        assert!(BathSpec::new(vec![0.0], vec![], BathProfile::Flat).is_err());
        assert!(BathSpec::flat(0, 1.0, 0.1).is_err());
    }
}
