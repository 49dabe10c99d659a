//! Two-photon time-bin states and measurement operators.
//!
//! Basis conventions, fixed across the crate: a single photon lives in the
//! span of |S> (short / early bin) and |L> (long / late bin), in that order.
//! Pair operators use the product basis |SS>, |SL>, |LS>, |LL> with Alice's
//! slot as the left factor. Probabilities are Born-rule traces, so every
//! result here is convention-free at the operator level.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

/// Detector outcome label at one analysis station, +1 or -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    /// 0 for +1, 1 for -1; used for array indexing and channel ids.
    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn from_index(i: usize) -> Outcome {
        if i == 0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

/// Measurement arrangement at the analysis stations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Unbalanced interferometer, statistics conditioned on the central slot.
    PassivePostselected,
    /// Same optics, but every detection counts (no postselection).
    PassiveFull,
    /// Balanced-interferometer switch in front of the analyzer; with an
    /// ideal switch this recovers the postselected statistics for free.
    ActiveSwitch,
}

/// Two-photon state with tunable interference visibility:
/// rho = V |phi+><phi+| + (1 - V) (|SS><SS| + |LL><LL|) / 2.
///
/// The V < 1 part is pure dephasing in the pair basis: populations stay at
/// 1/2 while the SS-LL coherence scales as V/2.
#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    density: Mat4,
    visibility: f64,
}

impl PairState {
    pub fn density(&self) -> &Mat4 {
        &self.density
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }
}

/// Build the dephased pair state for a given visibility in [0, 1].
pub fn bell_state(visibility: f64) -> Result<PairState> {
    if !(0.0..=1.0).contains(&visibility) || !visibility.is_finite() {
        return Err(Error::Domain(format!(
            "visibility must lie in [0, 1], got {visibility}"
        )));
    }
    let half = C64::new(0.5, 0.0);
    let coh = C64::new(0.5 * visibility, 0.0);
    let z = C64::new(0.0, 0.0);
    let density = Mat4::new(
        half, z, z, coh, //
        z, z, z, z, //
        z, z, z, z, //
        coh, z, z, half,
    );
    Ok(PairState {
        density,
        visibility,
    })
}

/// Projector onto |psi_a> = (|S> + a e^{i phi} |L>) / sqrt(2), the state
/// analyzed by detector a behind an unbalanced interferometer with phase phi.
pub fn projector_psi(a: Outcome, phi: f64) -> Mat2 {
    let half = C64::new(0.5, 0.0);
    let off = 0.5 * a.sign() * C64::new(0.0, -phi).exp();
    Mat2::new(half, off, off.conj(), half)
}

/// Full-statistics element for the passive scheme:
/// Gamma_a = 1/4 + P_a / 2. The identity part collects the lateral slots,
/// which carry no phase information.
pub fn povm_gamma(a: Outcome, phi: f64) -> Mat2 {
    let quarter = Mat2::from_diagonal_element(C64::new(0.25, 0.0));
    quarter + projector_psi(a, phi).scale(0.5)
}

/// Element for the active scheme with switch phases (phi_s, phi_l) applied
/// to the short and long bins:
///
///   Pi_a = (cos^2(phi_s/2) |S><S| + sin^2(phi_l/2) |L><L|) / 2
///          + |chi_a><chi_a|,
///   |chi_a> = (i e^{-i phi_s/2} sin(phi_s/2) |S>
///              + a e^{i(phi - phi_l/2)} cos(phi_l/2) |L>) / sqrt(2).
///
/// The diagonal part is the photons the switch leaves in the lateral slots;
/// chi_a is the interfering central-slot component.
pub fn povm_pi(a: Outcome, phi: f64, phi_s: f64, phi_l: f64) -> Mat2 {
    let z = C64::new(0.0, 0.0);
    let diag = Mat2::new(
        C64::new(0.5 * (0.5 * phi_s).cos().powi(2), 0.0),
        z,
        z,
        C64::new(0.5 * (0.5 * phi_l).sin().powi(2), 0.0),
    );
    let chi_s = C64::i() * C64::new(0.0, -0.5 * phi_s).exp() * (0.5 * phi_s).sin() / SQRT_2;
    let chi_l =
        a.sign() * C64::new(0.0, phi - 0.5 * phi_l).exp() * (0.5 * phi_l).cos() / SQRT_2;
    let outer = Mat2::new(
        chi_s * chi_s.conj(),
        chi_s * chi_l.conj(),
        chi_l * chi_s.conj(),
        chi_l * chi_l.conj(),
    );
    diag + outer
}

/// Phases of one analysis station, together with the scheme that decides
/// which operator family `povm_element` produces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub scheme: Scheme,
    /// Analyzer phase phi in the long arm of the unbalanced interferometer.
    pub analyzer_phase: f64,
    /// Switch phase seen by the short bin (active scheme only).
    pub switch_phase: f64,
    /// Switch phase seen by the long bin. Defaults to switch_phase - pi,
    /// which makes the two bins interfere at the central slot.
    pub long_bin_phase: f64,
}

impl MeasurementSetting {
    pub fn passive_postselected(analyzer_phase: f64) -> Self {
        MeasurementSetting {
            scheme: Scheme::PassivePostselected,
            analyzer_phase,
            switch_phase: PI,
            long_bin_phase: 0.0,
        }
    }

    pub fn passive_full(analyzer_phase: f64) -> Self {
        MeasurementSetting {
            scheme: Scheme::PassiveFull,
            ..Self::passive_postselected(analyzer_phase)
        }
    }

    /// Active station with an ideal switch (phi_s = pi).
    pub fn active(analyzer_phase: f64) -> Self {
        Self::active_with_switch(analyzer_phase, PI)
    }

    /// Active station with an arbitrary switch phase; the long bin gets
    /// phi_s - pi so the switch drives both bins toward the central slot.
    pub fn active_with_switch(analyzer_phase: f64, switch_phase: f64) -> Self {
        MeasurementSetting {
            scheme: Scheme::ActiveSwitch,
            analyzer_phase,
            switch_phase,
            long_bin_phase: switch_phase - PI,
        }
    }

    pub fn with_long_bin_phase(mut self, phi_l: f64) -> Self {
        self.long_bin_phase = phi_l;
        self
    }

    pub fn for_scheme(scheme: Scheme, analyzer_phase: f64) -> Self {
        match scheme {
            Scheme::PassivePostselected => Self::passive_postselected(analyzer_phase),
            Scheme::PassiveFull => Self::passive_full(analyzer_phase),
            Scheme::ActiveSwitch => Self::active(analyzer_phase),
        }
    }

    /// Measurement operator for outcome a under this setting.
    pub fn povm_element(&self, a: Outcome) -> Mat2 {
        match self.scheme {
            Scheme::PassivePostselected => projector_psi(a, self.analyzer_phase),
            Scheme::PassiveFull => povm_gamma(a, self.analyzer_phase),
            Scheme::ActiveSwitch => povm_pi(
                a,
                self.analyzer_phase,
                self.switch_phase,
                self.long_bin_phase,
            ),
        }
    }
}

pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    a.kronecker(b)
}

/// Largest entry-wise deviation from hermiticity, max |M - M^dagger|.
pub fn hermitian_deviation(m: &Mat2) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a hermitian 2x2 matrix, ascending.
pub fn eigenvalues2(m: &Mat2) -> (f64, f64) {
    let tr = (m[(0, 0)] + m[(1, 1)]).re;
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    (0.5 * (tr - disc), 0.5 * (tr + disc))
}

fn check_povm_element(m: &Mat2, who: &str) -> Result<()> {
    if hermitian_deviation(m) > tol::OPERATOR {
        return Err(Error::Domain(format!("{who} operator is not hermitian")));
    }
    let (lo, hi) = eigenvalues2(m);
    if lo < -tol::OPERATOR || hi > 1.0 + tol::OPERATOR {
        return Err(Error::Domain(format!(
            "{who} operator has eigenvalues outside [0, 1]: {lo}, {hi}"
        )));
    }
    Ok(())
}

/// Born-rule joint probability tr(rho (E_A x E_B)). Both effects must be
/// hermitian with spectrum inside [0, 1].
pub fn joint_probability(state: &PairState, e_alice: &Mat2, e_bob: &Mat2) -> Result<f64> {
    check_povm_element(e_alice, "Alice")?;
    check_povm_element(e_bob, "Bob")?;
    Ok((state.density() * kron(e_alice, e_bob)).trace().re)
}

/// Correlation coefficient E = sum_ab a b P(a, b) for a pair of stations.
pub fn correlation(
    state: &PairState,
    alice: &MeasurementSetting,
    bob: &MeasurementSetting,
) -> f64 {
    let mut e = 0.0;
    for a in Outcome::BOTH {
        for b in Outcome::BOTH {
            let p = (state.density() * kron(&alice.povm_element(a), &bob.povm_element(b)))
                .trace()
                .re;
            e += a.sign() * b.sign() * p;
        }
    }
    e
}

/// CHSH combination S = E(a, b) + E(a', b) + E(a, b') - E(a', b') with all
/// four stations operated under `scheme` (ideal switch for the active case).
pub fn chsh(
    state: &PairState,
    phi_a: f64,
    phi_a_prime: f64,
    phi_b: f64,
    phi_b_prime: f64,
    scheme: Scheme,
) -> f64 {
    let sa = MeasurementSetting::for_scheme(scheme, phi_a);
    let sa2 = MeasurementSetting::for_scheme(scheme, phi_a_prime);
    let sb = MeasurementSetting::for_scheme(scheme, phi_b);
    let sb2 = MeasurementSetting::for_scheme(scheme, phi_b_prime);
    correlation(state, &sa, &sb) + correlation(state, &sa2, &sb)
        + correlation(state, &sa, &sb2)
        - correlation(state, &sa2, &sb2)
}

/// Analyzer phases (phi_a, phi_a', phi_b, phi_b') that maximize S for the
/// postselected scheme; S = 2 sqrt(2) V there.
pub const CHSH_ANGLES: [f64; 4] = [-FRAC_PI_4, FRAC_PI_4, 0.0, FRAC_PI_2];
