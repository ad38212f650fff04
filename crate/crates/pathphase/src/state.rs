//! Exact complex-amplitude evolution of the two-path state and the
//! closed-form decomposition of the measured relative phase into
//! Pancharatnam, dynamical and geometric parts.
//!
//! The two-dimensional Hilbert space is spanned by the interferometer paths:
//! `|p_perp>` (reflected) and `|p>` (transmitted). The second loop acts on a
//! state with a 50:50 split onto `|q> = (|p_perp> + |p>)/sqrt(2)`, an
//! absorber of transmissivity `T` on `|p>`, a phase shifter applying
//! `chi1`/`chi2` to the two paths, and a projective recombination back onto
//! `|q>`. The relative phase of the result against an undisturbed reference
//! beam is read off as a fringe shift.

use num_complex::Complex64;

use crate::angle::principal_arg;
use crate::error::{Error, Result};

/// Inner-product modulus below which a relative phase is undefined.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Two complex amplitudes over the path basis `{|p_perp>, |p>}`.
///
/// States may be subnormalized after absorption or projection; no element
/// ever increases the squared norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    /// Amplitude of the reflected path `|p_perp>`.
    pub a_perp: Complex64,
    /// Amplitude of the transmitted path `|p>`.
    pub a_p: Complex64,
}

impl PathState {
    pub fn new(a_perp: Complex64, a_p: Complex64) -> Self {
        Self { a_perp, a_p }
    }

    /// The transmitted-path basis state `|p>`.
    pub fn p() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    /// The reflected-path basis state `|p_perp>`.
    pub fn p_perp() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// The equal superposition `|q> = (|p_perp> + |p>)/sqrt(2)`.
    pub fn q() -> Self {
        Self::new(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        )
    }

    /// Squared norm `|a_perp|^2 + |a_p|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.a_perp.norm_sqr() + self.a_p.norm_sqr()
    }

    /// Inner product `<self|other>` (conjugate-linear in `self`).
    pub fn inner(&self, other: &PathState) -> Complex64 {
        self.a_perp.conj() * other.a_perp + self.a_p.conj() * other.a_p
    }

    pub fn is_finite(&self) -> bool {
        self.a_perp.re.is_finite()
            && self.a_perp.im.is_finite()
            && self.a_p.re.is_finite()
            && self.a_p.im.is_finite()
    }
}

/// One interferometer component acting as a 2x2 operator on a [`PathState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    /// 50:50 splitter onto `|q>`, scaled so `|p>` maps exactly to `|q>`
    /// (`sqrt(2) * |q><q|`).
    SplitToQ,
    /// Absorber multiplying the `|p>` amplitude by `sqrt(T)`.
    Attenuate { transmissivity: f64 },
    /// Phase shifter applying `e^{i chi1}` to `|p_perp>` and `e^{i chi2}` to `|p>`.
    PhaseShift { chi1: f64, chi2: f64 },
    /// Projective recombination `|q><q|` (exact projector, no rescale).
    RecombineQ,
}

/// Relative phase split into its parts, plus the fringe amplitude factor.
///
/// `geometric = pancharatnam - dynamical` holds exactly by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDecomposition {
    /// Principal value of `arg <psi_r'|psi_t'>` in (−π, π].
    pub pancharatnam: f64,
    /// `(chi1 + T*chi2)/(1 + T)`, in radians.
    pub dynamical: f64,
    /// `pancharatnam - dynamical`, in radians.
    pub geometric: f64,
    /// Fringe amplitude `|<q|psi_t>| / ... = |e^{i chi1} + sqrt(T) e^{i chi2}| / 2`.
    pub amplitude: f64,
}

fn check_transmissivity(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) || !t.is_finite() {
        return Err(Error::TransmissivityOutOfRange(t));
    }
    Ok(())
}

/// Apply one element to a state.
pub fn apply_element(state: &PathState, element: &Element) -> Result<PathState> {
    if !state.is_finite() {
        return Err(Error::NonFiniteAmplitude);
    }
    let out = match *element {
        Element::SplitToQ => {
            // sqrt(2) <q|psi> |q>: each component becomes (a_perp + a_p)/sqrt(2).
            let c = (state.a_perp + state.a_p) * FRAC_1_SQRT_2;
            PathState::new(c, c)
        }
        Element::Attenuate { transmissivity } => {
            check_transmissivity(transmissivity)?;
            PathState::new(state.a_perp, state.a_p * transmissivity.sqrt())
        }
        Element::PhaseShift { chi1, chi2 } => {
            if !chi1.is_finite() || !chi2.is_finite() {
                return Err(Error::NonFiniteAmplitude);
            }
            PathState::new(
                state.a_perp * Complex64::from_polar(1.0, chi1),
                state.a_p * Complex64::from_polar(1.0, chi2),
            )
        }
        Element::RecombineQ => {
            // |q><q| psi: each component becomes (a_perp + a_p)/2.
            let c = (state.a_perp + state.a_p) * 0.5;
            PathState::new(c, c)
        }
    };
    if !out.is_finite() {
        return Err(Error::NonFiniteAmplitude);
    }
    Ok(out)
}

/// Evolve `|p>` through the full second loop: split, attenuate, phase shift.
///
/// Returns `(e^{i chi1}/sqrt(2), sqrt(T) e^{i chi2}/sqrt(2))`; the squared
/// norm equals `(1 + T)/2`.
pub fn evolve_second_loop(transmissivity: f64, chi1: f64, chi2: f64) -> Result<PathState> {
    check_transmissivity(transmissivity)?;
    if !chi1.is_finite() || !chi2.is_finite() {
        return Err(Error::NonFiniteAmplitude);
    }
    Ok(PathState::new(
        Complex64::from_polar(FRAC_1_SQRT_2, chi1),
        Complex64::from_polar(transmissivity.sqrt() * FRAC_1_SQRT_2, chi2),
    ))
}

/// Pancharatnam relative phase `arg <r|t>` in (−π, π].
///
/// Errors with [`Error::OrthogonalStates`] when the inner-product modulus is
/// below [`ORTHOGONALITY_TOL`].
pub fn pancharatnam_phase(t: &PathState, r: &PathState) -> Result<f64> {
    if !t.is_finite() || !r.is_finite() {
        return Err(Error::NonFiniteAmplitude);
    }
    let z = r.inner(t);
    if z.norm() < ORTHOGONALITY_TOL {
        return Err(Error::OrthogonalStates);
    }
    Ok(principal_arg(z))
}

/// Closed-form phase decomposition of the second-loop evolution.
///
/// The Pancharatnam phase is computed as the complex argument of
/// `e^{i chi1} + sqrt(T) e^{i chi2}` rather than through the arctan form,
/// which has poles at `dchi = pi`.
pub fn phase_decomposition(
    transmissivity: f64,
    chi1: f64,
    chi2: f64,
) -> Result<PhaseDecomposition> {
    check_transmissivity(transmissivity)?;
    if !chi1.is_finite() || !chi2.is_finite() {
        return Err(Error::NonFiniteAmplitude);
    }
    let z = Complex64::from_polar(1.0, chi1)
        + Complex64::from_polar(transmissivity.sqrt(), chi2);
    let amplitude = 0.5 * z.norm();
    if amplitude < ORTHOGONALITY_TOL {
        return Err(Error::OrthogonalStates);
    }
    let pancharatnam = principal_arg(z);
    let dynamical = (chi1 + transmissivity * chi2) / (1.0 + transmissivity);
    Ok(PhaseDecomposition {
        pancharatnam,
        dynamical,
        geometric: pancharatnam - dynamical,
        amplitude,
    })
}

/// Phase-shifter settings that cancel the dynamical phase for a given total
/// shift `dchi = chi2 - chi1`.
///
/// Returns `(chi1, chi2) = (-T dchi/(1+T), dchi/(1+T))`, the unique pair with
/// `chi2 - chi1 = dchi` and `chi1 + T chi2 = 0`.
pub fn compensated_shifts(transmissivity: f64, dchi: f64) -> Result<(f64, f64)> {
    check_transmissivity(transmissivity)?;
    if !dchi.is_finite() {
        return Err(Error::NonFiniteAmplitude);
    }
    let denom = 1.0 + transmissivity;
    Ok((-transmissivity * dchi / denom, dchi / denom))
}

/// Geometric phase of the cyclic (`dchi = 2*pi`) compensated evolution,
/// `-2*pi*T/(1+T)`, equal to `-pi*(1 - cos(theta))` with
/// `cos(theta) = (1-T)/(1+T)`.
pub fn cyclic_geometric_phase(transmissivity: f64) -> f64 {
    -2.0 * std::f64::consts::PI * transmissivity / (1.0 + transmissivity)
}
