//! Interferogram synthesis, sinusoid fitting, the phase-versus-`dchi` sweep
//! and the visibility-coefficient fit.
//!
//! The detector intensity is `I(eta) = A (1 + V cos(eta - Phi))`; the phase
//! `Phi` follows the damped two-beam model
//! `arg[sqrt(T1) e^{-i s1 dchi} + C sqrt(T2) e^{i s2 dchi}]` where `C` in
//! [0, 1] subsumes visibility losses (partial beam overlap, inhomogeneous
//! phase and transmission). Fits use the exact linear reparameterization
//! `A + P cos(eta) + Q sin(eta)`, so no iterative solver is involved.
//!
//! Everything here is pure given the seed: the Poisson stream is derived
//! per-interferogram from (seed, parameters), so grids may be evaluated in
//! any order, or in parallel, with identical results.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::angle::{principal_arg, wrap_principal};
use crate::bloch::{build_evolution_path, signed_solid_angle, DEFAULT_SEGMENTS};
use crate::error::{Error, Result};
use crate::state::{compensated_shifts, phase_decomposition, ORTHOGONALITY_TOL};

/// Noise model for synthesized counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// Exact expected counts.
    None,
    /// Independent Poisson draws with the expected counts as means.
    Poisson,
}

/// Generating parameters attached to a synthesized interferogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferogramMeta {
    pub t1: f64,
    pub t2: f64,
    pub s1: f64,
    pub s2: f64,
    pub dchi: f64,
    pub c: f64,
    pub mean_counts: f64,
    pub seed: u64,
    pub noise: NoiseModel,
}

/// Reference-phase settings with measured or synthesized counts.
#[derive(Debug, Clone)]
pub struct Interferogram {
    pub eta_values: Vec<f64>,
    pub counts: Vec<f64>,
    pub meta: Option<InterferogramMeta>,
}

impl Interferogram {
    /// Validate grid shape: strictly increasing eta, matching lengths,
    /// at least five points, nonnegative counts.
    pub fn new(eta_values: Vec<f64>, counts: Vec<f64>, meta: Option<InterferogramMeta>) -> Result<Self> {
        if eta_values.len() != counts.len() {
            return Err(Error::InvalidGrid("eta and counts lengths differ".into()));
        }
        if eta_values.len() < 5 {
            return Err(Error::InvalidGrid(
                "need at least 5 points for a 3-parameter fit".into(),
            ));
        }
        for &e in &eta_values {
            if !e.is_finite() {
                return Err(Error::InvalidGrid("eta values must be finite".into()));
            }
        }
        for w in eta_values.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidGrid("eta values must be strictly increasing".into()));
            }
        }
        for &c in &counts {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidGrid("counts must be finite and nonnegative".into()));
            }
        }
        Ok(Self { eta_values, counts, meta })
    }
}

/// Result of a sinusoid fit `counts ~ offset + amplitude cos(eta - phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit {
    pub offset: f64,
    pub amplitude: f64,
    /// Principal value in (−π, π].
    pub phase: f64,
    pub phase_stderr: f64,
    pub converged: bool,
}

/// One row of the phase sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub dchi: f64,
    /// Unwrapped model phase at full visibility (C = 1).
    pub phi_ideal: f64,
    /// Unwrapped model phase at the configured C.
    pub phi_damped: f64,
    /// Residual dynamical phase from the exponent/transmission mismatch.
    pub phi_dyn_residual: f64,
    /// Geometric phase of the compensated evolution at T = T2/T1.
    pub phi_geometric: f64,
    /// Signed solid angle of the corresponding Bloch-sphere path.
    pub omega: f64,
    /// Model fringe amplitude at the configured C.
    pub amplitude: f64,
}

fn check_model_params(t1: f64, t2: f64, s1: f64, s2: f64, c: f64) -> Result<()> {
    if !t1.is_finite() || t1 <= 0.0 || t1 > 1.0 {
        return Err(Error::TransmissivityOutOfRange(t1));
    }
    if !t2.is_finite() || t2 <= 0.0 || t2 > 1.0 {
        return Err(Error::TransmissivityOutOfRange(t2));
    }
    if (s1 + s2 - 1.0).abs() > 1e-9 || !s1.is_finite() || !s2.is_finite() {
        return Err(Error::ExponentSumInvalid { s1, s2 });
    }
    if !(0.0..=1.0).contains(&c) || !c.is_finite() {
        return Err(Error::DampingOutOfRange(c));
    }
    Ok(())
}

/// Phase and amplitude of the damped two-beam model
/// `sqrt(T1) e^{-i s1 dchi} + C sqrt(T2) e^{i s2 dchi}`.
pub fn damped_phase_model(
    t1: f64,
    t2: f64,
    s1: f64,
    s2: f64,
    c: f64,
    dchi: f64,
) -> Result<(f64, f64)> {
    check_model_params(t1, t2, s1, s2, c)?;
    let z = Complex64::from_polar(t1.sqrt(), -s1 * dchi)
        + Complex64::from_polar(c * t2.sqrt(), s2 * dchi);
    let amplitude = z.norm();
    if amplitude < ORTHOGONALITY_TOL {
        return Err(Error::OrthogonalStates);
    }
    Ok((principal_arg(z), amplitude))
}

/// Dynamical phase left over when the transmission ratio does not exactly
/// match the phase-shifter exponents: `(chi1 + T chi2)/(1 + T)` with
/// `chi1 = -s1 dchi`, `chi2 = s2 dchi`.
pub fn residual_dynamical_phase(t_ratio: f64, s1: f64, s2: f64, dchi: f64) -> Result<f64> {
    if !t_ratio.is_finite() || t_ratio <= 0.0 || t_ratio > 1.0 {
        return Err(Error::TransmissivityOutOfRange(t_ratio));
    }
    if (s1 + s2 - 1.0).abs() > 1e-9 {
        return Err(Error::ExponentSumInvalid { s1, s2 });
    }
    let (chi1, chi2) = (-s1 * dchi, s2 * dchi);
    Ok((chi1 + t_ratio * chi2) / (1.0 + t_ratio))
}

/// Fringe visibility for a model amplitude, `2 a / (T1 + C^2 T2 + 1)` with
/// the constant 1 the reference-beam intensity share, clamped into [0, 1]
/// so the aligned ideal case reads as full visibility and expected counts
/// stay nonnegative. Affects synthesized contrast only, never phases.
pub fn visibility(t1: f64, t2: f64, c: f64, amplitude: f64) -> f64 {
    (2.0 * amplitude / (t1 + c * c * t2 + 1.0)).min(1.0)
}

/// FNV-1a, used to derive one RNG stream per (seed, parameters) so parallel
/// synthesis over a grid is order-independent.
fn fnv1a64(data: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &word in data {
        for byte in word.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Synthesize an interferogram: expected counts
/// `mean_counts (1 + V cos(eta - Phi))` on a uniform eta grid over two full
/// periods `[0, 4 pi)`, optionally with Poisson noise from a deterministic
/// per-interferogram stream.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_interferogram(
    t1: f64,
    t2: f64,
    s1: f64,
    s2: f64,
    c: f64,
    dchi: f64,
    mean_counts: f64,
    n_points: usize,
    noise: NoiseModel,
    seed: u64,
) -> Result<Interferogram> {
    if n_points < 5 {
        return Err(Error::InvalidGrid("need at least 5 eta points".into()));
    }
    if !mean_counts.is_finite() || mean_counts <= 0.0 {
        return Err(Error::InvalidGrid("mean_counts must be positive".into()));
    }
    let (phase, amplitude) = damped_phase_model(t1, t2, s1, s2, c, dchi)?;
    let vis = visibility(t1, t2, c, amplitude);
    let eta: Vec<f64> = (0..n_points)
        .map(|j| 4.0 * std::f64::consts::PI * j as f64 / n_points as f64)
        .collect();
    let expected: Vec<f64> = eta
        .iter()
        .map(|&e| mean_counts * (1.0 + vis * (e - phase).cos()))
        .collect();
    let counts = match noise {
        NoiseModel::None => expected,
        NoiseModel::Poisson => {
            let stream = fnv1a64(&[
                seed,
                t1.to_bits(),
                t2.to_bits(),
                s1.to_bits(),
                s2.to_bits(),
                c.to_bits(),
                dchi.to_bits(),
                mean_counts.to_bits(),
                n_points as u64,
            ]);
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            expected
                .iter()
                .map(|&mu| {
                    if mu < 1e-12 {
                        0.0
                    } else {
                        Poisson::new(mu).expect("positive mean").sample(&mut rng)
                    }
                })
                .collect()
        }
    };
    let meta = InterferogramMeta {
        t1,
        t2,
        s1,
        s2,
        dchi,
        c,
        mean_counts,
        seed,
        noise,
    };
    Interferogram::new(eta, counts, Some(meta))
}

/// Invert a symmetric 3x3 matrix; `None` when (near-)singular.
#[allow(clippy::needless_range_loop)] // adjugate transpose writes inv[c][r]
fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let scale = (m[0][0].abs() + m[1][1].abs() + m[2][2].abs()) / 3.0;
    if !det.is_finite() || det.abs() <= 1e-12 * scale.powi(3).max(f64::MIN_POSITIVE) {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let (r1, r2) = match r {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (c1, c2) = match c {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let minor = m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
            let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
            inv[c][r] = sign * minor / det; // adjugate transpose
        }
    }
    Some(inv)
}

/// Least-squares fit of `counts ~ A + B cos(eta - Phi)` through the linear
/// form `A + P cos(eta) + Q sin(eta)` with counts-based weights (Poisson
/// variance estimate `max(counts, 1)`).
///
/// Singular normal equations yield `converged: false`; a vanishing fitted
/// amplitude is [`Error::PhaseUndefined`].
pub fn fit_fringe(data: &Interferogram) -> Result<FringeFit> {
    let n = data.eta_values.len();
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for j in 0..n {
        let w = 1.0 / data.counts[j].max(1.0);
        let x = [1.0, data.eta_values[j].cos(), data.eta_values[j].sin()];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += w * x[r] * x[c];
            }
            rhs[r] += w * x[r] * data.counts[j];
        }
    }
    let Some(cov) = invert3(&m) else {
        return Ok(FringeFit {
            offset: 0.0,
            amplitude: 0.0,
            phase: 0.0,
            phase_stderr: 0.0,
            converged: false,
        });
    };
    let mut beta = [0.0f64; 3];
    for r in 0..3 {
        for c in 0..3 {
            beta[r] += cov[r][c] * rhs[c];
        }
    }
    let (a, p, q) = (beta[0], beta[1], beta[2]);
    let b = p.hypot(q);
    if b < ORTHOGONALITY_TOL {
        return Err(Error::PhaseUndefined);
    }
    let phase = wrap_principal(q.atan2(p));
    // Delta method: d phase / d(P, Q) = (-Q, P) / B^2.
    let g = [0.0, -q / (b * b), p / (b * b)];
    let mut var = 0.0;
    for r in 0..3 {
        for c in 0..3 {
            var += g[r] * cov[r][c] * g[c];
        }
    }
    Ok(FringeFit {
        offset: a,
        amplitude: b,
        phase,
        phase_stderr: var.max(0.0).sqrt(),
        converged: true,
    })
}

/// Nearest-branch continuation: shift each phase by the 2π multiple that
/// keeps consecutive values within π of each other.
pub fn unwrap_phases(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    for &p in phases {
        match out.last() {
            None => out.push(p),
            Some(&prev) => out.push(prev + wrap_principal(p - prev)),
        }
    }
    out
}

/// Evaluate the sweep over a `dchi` grid: ideal (C = 1) and damped model
/// phases (both unwrapped along the grid), the residual dynamical phase, and
/// the geometric phase and solid angle of the compensated evolution at
/// `T = T2/T1`.
pub fn phase_sweep(
    t1: f64,
    t2: f64,
    s1: f64,
    s2: f64,
    c: f64,
    grid: &[f64],
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty dchi grid".into()));
    }
    let t_ratio = t2 / t1;
    let mut ideal = Vec::with_capacity(grid.len());
    let mut damped = Vec::with_capacity(grid.len());
    let mut amps = Vec::with_capacity(grid.len());
    for &dchi in grid {
        let (pi_, _) = damped_phase_model(t1, t2, s1, s2, 1.0, dchi)?;
        let (pd, amp) = damped_phase_model(t1, t2, s1, s2, c, dchi)?;
        ideal.push(pi_);
        damped.push(pd);
        amps.push(amp);
    }
    let ideal = unwrap_phases(&ideal);
    let damped = unwrap_phases(&damped);

    let mut rows = Vec::with_capacity(grid.len());
    for (i, &dchi) in grid.iter().enumerate() {
        let (chi1, chi2) = compensated_shifts(t_ratio, dchi)?;
        let geo = phase_decomposition(t_ratio, chi1, chi2)?.geometric;
        let path = build_evolution_path(t_ratio, dchi, DEFAULT_SEGMENTS)?;
        let omega = signed_solid_angle(&path)?;
        rows.push(SweepRow {
            dchi,
            phi_ideal: ideal[i],
            phi_damped: damped[i],
            phi_dyn_residual: residual_dynamical_phase(t_ratio, s1, s2, dchi)?,
            phi_geometric: geo,
            omega,
            amplitude: amps[i],
        });
    }
    Ok(rows)
}

/// Golden-section search for the minimum of `f` on `[a, b]`.
fn golden_section_minimize(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Fit the visibility coefficient `C` to (dchi, phase) points by bounded
/// scalar minimization of the squared wrapped residuals against
/// [`damped_phase_model`], to tolerance 1e-6 on C.
///
/// Returns `(C, stderr)` with the standard error from the quadratic shape of
/// the objective at the minimum. Errors with [`Error::CUnidentifiable`] when
/// the objective carries no information on C (e.g. all `dchi` multiples of
/// 2π, where the model phase is C-independent).
pub fn fit_visibility_c(
    points: &[(f64, f64)],
    t1: f64,
    t2: f64,
    s1: f64,
    s2: f64,
) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::InvalidGrid("need at least 3 (dchi, phase) points".into()));
    }
    check_model_params(t1, t2, s1, s2, 0.5)?;
    let sse = |c: f64| -> f64 {
        points
            .iter()
            .map(|&(dchi, phase)| match damped_phase_model(t1, t2, s1, s2, c, dchi) {
                Ok((model, _)) => wrap_principal(phase - model).powi(2),
                Err(_) => f64::INFINITY,
            })
            .sum()
    };
    let probes: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|&c| sse(c)).collect();
    let lo = probes.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = probes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || hi - lo < 1e-12 * (1.0 + lo) {
        return Err(Error::CUnidentifiable);
    }
    let c_hat = golden_section_minimize(sse, 0.0, 1.0, 1e-6);
    // Quadratic approximation at the minimum; one-sided stencil at the bounds.
    let h = 1e-4;
    let c0 = c_hat.clamp(h, 1.0 - h);
    let curvature = (sse(c0 - h) - 2.0 * sse(c0) + sse(c0 + h)) / (h * h);
    if !curvature.is_finite() || curvature <= 0.0 {
        return Err(Error::CUnidentifiable);
    }
    let sigma2 = sse(c_hat) / (points.len() as f64 - 1.0);
    Ok((c_hat, (2.0 * sigma2 / curvature).sqrt()))
}

/// Model fringe amplitude versus `dchi`.
pub fn fringe_contrast_curve(
    t1: f64,
    t2: f64,
    s1: f64,
    s2: f64,
    c: f64,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty dchi grid".into()));
    }
    grid.iter()
        .map(|&dchi| damped_phase_model(t1, t2, s1, s2, c, dchi).map(|(_, a)| (dchi, a)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const S1: f64 = 0.5 / 4.6;
    const S2: f64 = 4.1 / 4.6;

    #[test]
    fn damped_model_alignment_at_two_pi() {
        // Both phasors share the phase -2 pi s1 at dchi = 2 pi since s1 + s2 = 1.
        let (phase, amp) = damped_phase_model(1.0, 0.122, S1, S2, 1.0, 2.0 * PI).unwrap();
        assert!((phase - (-2.0 * PI * S1)).abs() < 1e-12, "phase = {phase}");
        assert!((amp - (1.0 + 0.122f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn damped_model_zero_shift() {
        let (phase, _) = damped_phase_model(0.7, 0.3, 0.4, 0.6, 0.8, 0.0).unwrap();
        assert_eq!(phase, 0.0);
    }

    #[test]
    fn damping_flattens_the_curve() {
        // The C < 1 curve is flatter than the ideal one at intermediate dchi;
        // at dchi = pi and 2 pi the phasors (anti-)align and the phase is
        // C-independent.
        for &dchi in &[PI / 2.0, 1.5 * PI] {
            let p_damped = damped_phase_model(1.0, 0.122, S1, S2, 0.57, dchi).unwrap().0;
            let p_ideal = damped_phase_model(1.0, 0.122, S1, S2, 1.0, dchi).unwrap().0;
            assert!(
                p_damped.abs() < p_ideal.abs(),
                "dchi = {dchi}: {p_damped} vs {p_ideal}"
            );
        }
        let at_pi_damped = damped_phase_model(1.0, 0.122, S1, S2, 0.57, PI).unwrap().0;
        let at_pi_ideal = damped_phase_model(1.0, 0.122, S1, S2, 1.0, PI).unwrap().0;
        assert!((at_pi_damped - at_pi_ideal).abs() < 1e-12);
    }

    #[test]
    fn model_parameter_validation() {
        assert!(matches!(
            damped_phase_model(0.0, 0.5, 0.5, 0.5, 1.0, 0.0),
            Err(Error::TransmissivityOutOfRange(_))
        ));
        assert!(matches!(
            damped_phase_model(1.0, 0.5, 0.3, 0.6, 1.0, 0.0),
            Err(Error::ExponentSumInvalid { .. })
        ));
        assert!(matches!(
            damped_phase_model(1.0, 0.5, 0.5, 0.5, 1.4, 0.0),
            Err(Error::DampingOutOfRange(_))
        ));
    }

    #[test]
    fn residual_dynamical_phase_values() {
        // Exact compensation at T = s1/s2.
        let r = residual_dynamical_phase(S1 / S2, S1, S2, 5.0).unwrap();
        assert!(r.abs() < 1e-15);
        // Measured transmission ratio 0.120 against the thickness exponents.
        let r = residual_dynamical_phase(0.120, S1, S2, 2.0 * PI).unwrap();
        assert!((r - (-0.009_756_498_924_191_991)).abs() < 1e-12);
        // Linear in dchi.
        let r_pi = residual_dynamical_phase(0.120, S1, S2, PI).unwrap();
        assert!((r_pi - r / 2.0).abs() < 1e-15);
        assert!((r_pi - (-0.004_878_249_462_095_995)).abs() < 1e-12);
    }

    #[test]
    fn synthesis_noiseless_round_trip() {
        let ig = synthesize_interferogram(
            1.0, 0.122, S1, S2, 0.57, 1.3, 850.0, 32, NoiseModel::None, 0,
        )
        .unwrap();
        let (phase, _) = damped_phase_model(1.0, 0.122, S1, S2, 0.57, 1.3).unwrap();
        let fit = fit_fringe(&ig).unwrap();
        assert!(fit.converged);
        assert!((fit.phase - phase).abs() < 1e-9, "{} vs {phase}", fit.phase);
        assert!((fit.offset - 850.0).abs() < 1e-6);
    }

    #[test]
    fn synthesis_is_deterministic_per_seed_and_params() {
        let a = synthesize_interferogram(
            1.0, 0.122, S1, S2, 0.57, 2.0, 1000.0, 16, NoiseModel::Poisson, 42,
        )
        .unwrap();
        let b = synthesize_interferogram(
            1.0, 0.122, S1, S2, 0.57, 2.0, 1000.0, 16, NoiseModel::Poisson, 42,
        )
        .unwrap();
        assert_eq!(a.counts, b.counts);
        let c = synthesize_interferogram(
            1.0, 0.122, S1, S2, 0.57, 2.1, 1000.0, 16, NoiseModel::Poisson, 42,
        )
        .unwrap();
        assert_ne!(a.counts, c.counts);
        let d = synthesize_interferogram(
            1.0, 0.122, S1, S2, 0.57, 2.0, 1000.0, 16, NoiseModel::Poisson, 43,
        )
        .unwrap();
        assert_ne!(a.counts, d.counts);
    }

    #[test]
    fn zero_damping_still_produces_fringes() {
        // C = 0 leaves only the reference-side term: phase -s1 dchi.
        let dchi = 1.7;
        let ig = synthesize_interferogram(
            1.0, 0.122, S1, S2, 0.0, dchi, 500.0, 24, NoiseModel::None, 0,
        )
        .unwrap();
        let fit = fit_fringe(&ig).unwrap();
        assert!((fit.phase - (-S1 * dchi)).abs() < 1e-9);
        assert!(fit.amplitude > 1.0);
    }

    #[test]
    fn fit_exact_cosine() {
        let eta: Vec<f64> = (0..40).map(|j| 4.0 * PI * j as f64 / 40.0).collect();
        let counts: Vec<f64> = eta.iter().map(|&e| 100.0 + 50.0 * (e - 1.0).cos()).collect();
        let ig = Interferogram::new(eta, counts, None).unwrap();
        let fit = fit_fringe(&ig).unwrap();
        assert!((fit.offset - 100.0).abs() < 1e-9);
        assert!((fit.amplitude - 50.0).abs() < 1e-9);
        assert!((fit.phase - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fit_constant_counts_is_phase_undefined() {
        let eta: Vec<f64> = (0..8).map(|j| j as f64).collect();
        let ig = Interferogram::new(eta, vec![7.0; 8], None).unwrap();
        assert!(matches!(fit_fringe(&ig), Err(Error::PhaseUndefined)));
    }

    #[test]
    fn interferogram_validation() {
        assert!(Interferogram::new(vec![0.0, 1.0], vec![1.0, 1.0], None).is_err());
        assert!(Interferogram::new(
            vec![0.0, 1.0, 1.0, 2.0, 3.0],
            vec![1.0; 5],
            None
        )
        .is_err());
        assert!(Interferogram::new(
            vec![0.0, 1.0, 2.0, 3.0, 4.0],
            vec![1.0, 1.0, -2.0, 1.0, 1.0],
            None
        )
        .is_err());
    }

    #[test]
    fn unwrap_tracks_continuous_branches() {
        let truth: Vec<f64> = (0..100).map(|i| 0.09 * i as f64).collect();
        let wrapped: Vec<f64> = truth.iter().map(|&x| wrap_principal(x)).collect();
        let un = unwrap_phases(&wrapped);
        for (u, t) in un.iter().zip(&truth) {
            assert!((u - t).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_single_points() {
        let rows = phase_sweep(1.0, 0.122, S1, S2, 1.0, &[2.0 * PI]).unwrap();
        assert!((rows[0].phi_ideal - (-0.683)).abs() < 1e-3);
        let rows = phase_sweep(1.0, 0.122, S1, S2, 0.57, &[0.0]).unwrap();
        assert!(rows[0].phi_ideal.abs() < 1e-12);
        assert!(rows[0].phi_damped.abs() < 1e-12);
        assert!(rows[0].phi_dyn_residual.abs() < 1e-12);
        assert!(rows[0].phi_geometric.abs() < 1e-12);
        assert!(rows[0].omega.abs() < 1e-9);
    }

    #[test]
    fn sweep_ideal_equals_damped_at_full_visibility() {
        let grid: Vec<f64> = (0..40).map(|i| -0.2 * PI + i as f64 * 0.08 * PI).collect();
        let rows = phase_sweep(1.0, 0.120, S1, S2, 1.0, &grid).unwrap();
        for row in &rows {
            assert!((row.phi_ideal - row.phi_damped).abs() < 1e-10);
        }
    }

    #[test]
    fn sweep_ideal_column_matches_state_engine_when_ratio_is_exact() {
        // s1/s2 = T2/T1 exactly: the C = 1 model is the compensated evolution.
        let (t1, t2) = (1.0, S1 / S2);
        let grid: Vec<f64> = (0..60).map(|i| -0.2 * PI + i as f64 * 0.05 * PI).collect();
        let rows = phase_sweep(t1, t2, S1, S2, 1.0, &grid).unwrap();
        for row in &rows {
            assert!(
                (row.phi_ideal - row.phi_geometric).abs() < 1e-9,
                "dchi = {}: {} vs {}",
                row.dchi,
                row.phi_ideal,
                row.phi_geometric
            );
        }
    }

    #[test]
    fn visibility_fit_round_trips() {
        let grid: Vec<f64> = (0..30).map(|i| -0.2 * PI + i as f64 * 3.2 * PI / 30.0).collect();
        for &c_true in &[0.57, 1.0] {
            let pts: Vec<(f64, f64)> = grid
                .iter()
                .map(|&d| (d, damped_phase_model(1.0, 0.122, S1, S2, c_true, d).unwrap().0))
                .collect();
            let (c_hat, stderr) = fit_visibility_c(&pts, 1.0, 0.122, S1, S2).unwrap();
            assert!((c_hat - c_true).abs() < 1e-4, "c_hat = {c_hat}");
            assert!(stderr < 1e-4, "stderr = {stderr}");
        }
    }

    #[test]
    fn visibility_fit_unidentifiable_on_pinned_points() {
        // At dchi in {0, 2 pi} the model phase does not depend on C.
        let pts: Vec<(f64, f64)> = [0.0, 2.0 * PI, 4.0 * PI]
            .iter()
            .map(|&d| (d, damped_phase_model(1.0, 0.122, S1, S2, 0.57, d).unwrap().0))
            .collect();
        assert!(matches!(
            fit_visibility_c(&pts, 1.0, 0.122, S1, S2),
            Err(Error::CUnidentifiable)
        ));
    }

    #[test]
    fn contrast_extremes() {
        let grid: Vec<f64> = (0..161).map(|i| -0.2 * PI + i as f64 * PI / 50.0).collect();
        let curve = fringe_contrast_curve(1.0, 0.122, S1, S2, 1.0, &grid).unwrap();
        let at = |d: f64| {
            curve
                .iter()
                .min_by(|a, b| (a.0 - d).abs().partial_cmp(&(b.0 - d).abs()).unwrap())
                .unwrap()
                .1
        };
        assert!((at(0.0) - (1.0 + 0.122f64.sqrt())).abs() < 1e-12);
        assert!((at(PI) - (1.0 - 0.122f64.sqrt())).abs() < 1e-12);
        let max = curve.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let min = curve.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        assert!((max - at(0.0)).abs() < 1e-12);
        assert!((min - at(PI)).abs() < 1e-12);
        // Reference absorption ratio with C = 0.57: variation below half.
        let curve = fringe_contrast_curve(1.0, 0.122, S1, S2, 0.57, &grid).unwrap();
        let max = curve.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let min = curve.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        assert!((max - min) / max < 0.5, "variation = {}", (max - min) / max);
    }
}
