//! Ideal gates of the two-path scheme and their pulse-sequence realizations.
//!
//! Sequences quoted in pulse notation use the opposite rotating-frame sign
//! convention from the rotation operators here, so their axis labels pass
//! through [`Axis::flipped`] — one translation, applied uniformly. The U(φ)
//! decomposition is specified directly as an operator product
//! exp(−iI_xθ₁)·exp(−iI_yθ₂)·exp(−iI_xθ₁) and needs no translation.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    distance_up_to_diagonal_phase, kron, Operator2, Operator4,
};
use crate::error::Result;
use crate::pulse::{
    compile_unitary, rotation2, Axis, PulseEvent, PulseSequence, SpinSystem, Targets,
};

/// Superposition parameters of the beam-splitter stage.
#[derive(Clone, Copy, Debug)]
pub struct GateParams {
    pub theta: f64,
}

impl GateParams {
    pub fn new(theta: f64) -> Self {
        GateParams { theta }
    }

    /// α(θ) = cos(θ/2).
    pub fn alpha(&self) -> f64 {
        (self.theta / 2.0).cos()
    }

    /// β(θ) = sin(θ/2).
    pub fn beta(&self) -> f64 {
        (self.theta / 2.0).sin()
    }

    /// |α|²/|β|², the population ratio of the two intermediate paths.
    pub fn population_ratio(&self) -> f64 {
        self.alpha().powi(2) / self.beta().powi(2)
    }
}

/// Flip angles realizing U(φ) as three consecutive pulses on spin b.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UPulseAngles {
    pub theta1: f64,
    pub theta2: f64,
}

/// R₁ᵇ(θ) = [[α, −β], [β, α]] on spin b, identity on the marker:
/// takes |00⟩ to (α|0⟩_b + β|1⟩_b)|0⟩_a.
pub fn r1_gate(theta: f64) -> Operator4 {
    kron(&rotation2(Axis::PlusY, theta), &Operator2::identity())
}

/// The single RF event realizing R₁ᵇ(θ) (its propagator equals the gate
/// exactly).
pub fn r1_pulse_sequence(theta: f64) -> PulseSequence {
    PulseSequence::new(vec![PulseEvent::Rf {
        targets: Targets::B,
        axis: Axis::PlusY,
        flip_angle: theta,
    }])
    .expect("finite angle")
}

/// CN_ba: control b, target a; flips the marker iff b is |1⟩.
pub fn cnot_ideal() -> Operator4 {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    Operator4::new([
        [l, o, o, o],
        [o, l, o, o],
        [o, o, o, l],
        [o, o, l, o],
    ])
    .expect("permutation matrix")
}

/// The five-event hard-pulse realization of CN_ba:
/// (π/2) on a, free evolution for 1/(2J), simultaneous (π/2) pulses, and a
/// closing (π/2) on b, with notation axis labels translated by the sign flip.
pub fn cnot_pulse_sequence(system: &SpinSystem) -> PulseSequence {
    let half = std::f64::consts::FRAC_PI_2;
    PulseSequence::new(vec![
        PulseEvent::Rf {
            targets: Targets::A,
            axis: Axis::MinusY.flipped(),
            flip_angle: half,
        },
        PulseEvent::Delay {
            duration: 1.0 / (2.0 * system.j_coupling_hz),
        },
        PulseEvent::Rf {
            targets: Targets::Both,
            axis: Axis::PlusY.flipped(),
            flip_angle: half,
        },
        PulseEvent::Rf {
            targets: Targets::Both,
            axis: Axis::MinusX.flipped(),
            flip_angle: half,
        },
        PulseEvent::Rf {
            targets: Targets::B,
            axis: Axis::MinusY.flipped(),
            flip_angle: half,
        },
    ])
    .expect("finite angles")
}

/// Residual of the compiled CNOT sequence against CN_ba up to diagonal
/// phases, with the realized phases reported rather than hidden.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CnotPhaseReport {
    pub distance: f64,
    pub phases_rad: [f64; 4],
}

pub fn cnot_phase_report(system: &SpinSystem) -> Result<CnotPhaseReport> {
    let compiled = compile_unitary(&cnot_pulse_sequence(system), system)?;
    let (distance, phases_rad) = distance_up_to_diagonal_phase(&compiled, &cnot_ideal())?;
    Ok(CnotPhaseReport {
        distance,
        phases_rad,
    })
}

/// diag(e^{−iφ₀}, …, e^{−iφ₃}) — undoes a recorded diagonal-phase report when
/// applied before the compiled sequence.
pub fn diagonal_phase_inverse(phases_rad: &[f64; 4]) -> Operator4 {
    Operator4::from_diagonal([
        C64::from_polar(1.0, -phases_rad[0]),
        C64::from_polar(1.0, -phases_rad[1]),
        C64::from_polar(1.0, -phases_rad[2]),
        C64::from_polar(1.0, -phases_rad[3]),
    ])
    .expect("unit-modulus diagonal")
}

/// R₂ᵇᵃ(θ) = CN_ba · R₁ᵇ(θ): splits and marks in one step, |00⟩ ↦ α|00⟩ + β|11⟩.
pub fn r2_gate(theta: f64) -> Operator4 {
    cnot_ideal() * r1_gate(theta)
}

/// U^b(φ) = (1/√2)[[1, e^{iφ}], [−e^{−iφ}, 1]] on spin b.
pub fn u_gate_ideal(phi: f64) -> Operator4 {
    let q = 1.0 / 2.0_f64.sqrt();
    let block = Operator2::new([
        [C64::new(q, 0.0), C64::from_polar(q, phi)],
        [-C64::from_polar(q, -phi), C64::new(q, 0.0)],
    ])
    .expect("finite entries");
    kron(&block, &Operator2::identity())
}

/// θ₁ = tan⁻¹(−sin φ), θ₂ = 2 sin⁻¹(−cos φ/√2), principal branches.
pub fn u_pulse_angles(phi: f64) -> UPulseAngles {
    UPulseAngles {
        theta1: (-phi.sin()).atan(),
        theta2: 2.0 * (-phi.cos() / 2.0_f64.sqrt()).asin(),
    }
}

/// Three-pulse realization of U(φ): (θ₁) about x, (θ₂) about y, (θ₁) about x
/// on spin b, equal to U(φ) up to a global phase for every φ.
pub fn u_pulse_sequence(phi: f64) -> PulseSequence {
    let angles = u_pulse_angles(phi);
    PulseSequence::new(vec![
        PulseEvent::Rf {
            targets: Targets::B,
            axis: Axis::PlusX,
            flip_angle: angles.theta1,
        },
        PulseEvent::Rf {
            targets: Targets::B,
            axis: Axis::PlusY,
            flip_angle: angles.theta2,
        },
        PulseEvent::Rf {
            targets: Targets::B,
            axis: Axis::PlusX,
            flip_angle: angles.theta1,
        },
    ])
    .expect("finite angles")
}

/// Read-out pulses: (π/2) on the marker, then (π/2) on the observed spin,
/// notation labels translated as usual.
pub fn readout_sequence() -> PulseSequence {
    let half = std::f64::consts::FRAC_PI_2;
    PulseSequence::new(vec![
        PulseEvent::Rf {
            targets: Targets::A,
            axis: Axis::PlusY.flipped(),
            flip_angle: half,
        },
        PulseEvent::Rf {
            targets: Targets::B,
            axis: Axis::PlusY.flipped(),
            flip_angle: half,
        },
    ])
    .expect("finite angles")
}
