//! Pulse-level events and their propagators.
//!
//! A hard pulse of flip angle θ about axis n̂ acts as exp(−iθ(I·n̂)) on each
//! targeted spin. During delays only the weak scalar coupling evolves
//! (H = 2πJ·I_z⊗I_z in the doubly rotating frame); chemical-shift offsets
//! re-enter only as line positions in the spectra layer. A gradient crusher is
//! the fully idealized dephaser: every off-diagonal element is set to zero.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{apply_unitary, kron, DensityMatrix4, Operator2, Operator4};
use crate::error::{Error, Result};

/// The two-spin system constants of the chloroform sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinSystem {
    /// Scalar coupling J_ab in Hz.
    pub j_coupling_hz: f64,
    /// ¹³C resonance frequency in MHz (spin b, observed).
    pub freq_b_mhz: f64,
    /// ¹H resonance frequency in MHz (spin a, marker).
    pub freq_a_mhz: f64,
}

impl Default for SpinSystem {
    fn default() -> Self {
        SpinSystem {
            j_coupling_hz: 215.0,
            freq_b_mhz: 125.0,
            freq_a_mhz: 500.0,
        }
    }
}

impl SpinSystem {
    pub fn validate(&self) -> Result<()> {
        if self.j_coupling_hz > 0.0 && self.freq_b_mhz > 0.0 && self.freq_a_mhz > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "spin system requires positive coupling and frequencies".into(),
            ))
        }
    }
}

/// Rotation axis in the transverse plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    PlusX,
    MinusX,
    PlusY,
    MinusY,
}

impl Axis {
    pub fn token(&self) -> &'static str {
        match self {
            Axis::PlusX => "+x",
            Axis::MinusX => "-x",
            Axis::PlusY => "+y",
            Axis::MinusY => "-y",
        }
    }

    pub fn parse(tok: &str) -> Result<Axis> {
        match tok {
            "+x" => Ok(Axis::PlusX),
            "-x" => Ok(Axis::MinusX),
            "+y" => Ok(Axis::PlusY),
            "-y" => Ok(Axis::MinusY),
            other => Err(Error::Parse(format!("unknown axis token `{other}`"))),
        }
    }

    /// The opposite axis; used to translate pulse-notation labels written in
    /// the opposite rotating-frame sign convention.
    pub fn flipped(&self) -> Axis {
        match self {
            Axis::PlusX => Axis::MinusX,
            Axis::MinusX => Axis::PlusX,
            Axis::PlusY => Axis::MinusY,
            Axis::MinusY => Axis::PlusY,
        }
    }
}

/// Which spins an RF pulse addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Targets {
    A,
    B,
    Both,
}

impl Targets {
    pub fn includes_a(&self) -> bool {
        matches!(self, Targets::A | Targets::Both)
    }

    pub fn includes_b(&self) -> bool {
        matches!(self, Targets::B | Targets::Both)
    }

    pub fn token(&self) -> &'static str {
        match self {
            Targets::A => "a",
            Targets::B => "b",
            Targets::Both => "ab",
        }
    }

    pub fn parse(tok: &str) -> Result<Targets> {
        match tok {
            "a" => Ok(Targets::A),
            "b" => Ok(Targets::B),
            "ab" => Ok(Targets::Both),
            other => Err(Error::Parse(format!("unknown target token `{other}`"))),
        }
    }
}

/// One chronological event of a pulse sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PulseEvent {
    Rf {
        targets: Targets,
        axis: Axis,
        flip_angle: f64,
    },
    Delay {
        duration: f64,
    },
    GradientCrusher,
    /// Line-selective rotation confined to the two-level subspace spanned by
    /// the named basis states.
    Transition {
        pair: (usize, usize),
        axis: Axis,
        flip_angle: f64,
    },
}

impl PulseEvent {
    pub fn validate(&self) -> Result<()> {
        match self {
            PulseEvent::Rf { flip_angle, .. } => {
                if flip_angle.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidSequence("non-finite flip angle".into()))
                }
            }
            PulseEvent::Delay { duration } => {
                if duration.is_finite() && *duration >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidSequence(format!(
                        "delay duration {duration} must be finite and non-negative"
                    )))
                }
            }
            PulseEvent::GradientCrusher => Ok(()),
            PulseEvent::Transition {
                pair, flip_angle, ..
            } => {
                if !flip_angle.is_finite() {
                    return Err(Error::InvalidSequence("non-finite flip angle".into()));
                }
                if pair.0 == pair.1 || pair.0 > 3 || pair.1 > 3 {
                    return Err(Error::InvalidSequence(format!(
                        "transition pair ({}, {}) must name two distinct basis states",
                        pair.0, pair.1
                    )));
                }
                Ok(())
            }
        }
    }
}

/// A chronologically ordered pulse sequence (first event applied first).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    events: Vec<PulseEvent>,
}

impl PulseSequence {
    pub fn new(events: Vec<PulseEvent>) -> Result<Self> {
        for e in &events {
            e.validate()?;
        }
        Ok(PulseSequence { events })
    }

    pub fn events(&self) -> &[PulseEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Copy with every RF and transition flip angle multiplied by `g`;
    /// models a miscalibrated or inhomogeneous B₁ field.
    pub fn scale_flip_angles(&self, g: f64) -> PulseSequence {
        let events = self
            .events
            .iter()
            .map(|e| match e {
                PulseEvent::Rf {
                    targets,
                    axis,
                    flip_angle,
                } => PulseEvent::Rf {
                    targets: *targets,
                    axis: *axis,
                    flip_angle: g * flip_angle,
                },
                PulseEvent::Transition {
                    pair,
                    axis,
                    flip_angle,
                } => PulseEvent::Transition {
                    pair: *pair,
                    axis: *axis,
                    flip_angle: g * flip_angle,
                },
                other => other.clone(),
            })
            .collect();
        PulseSequence { events }
    }

    /// Line-oriented text form, one event per line:
    /// `rf <a|b|ab> <axis> <radians>`, `delay <seconds>`, `crush`,
    /// `tsel <i> <j> <axis> <radians>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            match e {
                PulseEvent::Rf {
                    targets,
                    axis,
                    flip_angle,
                } => {
                    out.push_str(&format!(
                        "rf {} {} {}\n",
                        targets.token(),
                        axis.token(),
                        flip_angle
                    ));
                }
                PulseEvent::Delay { duration } => out.push_str(&format!("delay {duration}\n")),
                PulseEvent::GradientCrusher => out.push_str("crush\n"),
                PulseEvent::Transition {
                    pair,
                    axis,
                    flip_angle,
                } => {
                    out.push_str(&format!(
                        "tsel {} {} {} {}\n",
                        pair.0,
                        pair.1,
                        axis.token(),
                        flip_angle
                    ));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PulseSequence> {
        let mut events = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| bad(&format!("bad number `{s}`")))
            };
            let event = match toks[0] {
                "rf" if toks.len() == 4 => PulseEvent::Rf {
                    targets: Targets::parse(toks[1])?,
                    axis: Axis::parse(toks[2])?,
                    flip_angle: num(toks[3])?,
                },
                "delay" if toks.len() == 2 => PulseEvent::Delay {
                    duration: num(toks[1])?,
                },
                "crush" if toks.len() == 1 => PulseEvent::GradientCrusher,
                "tsel" if toks.len() == 5 => PulseEvent::Transition {
                    pair: (
                        toks[1].parse().map_err(|_| bad("bad basis index"))?,
                        toks[2].parse().map_err(|_| bad("bad basis index"))?,
                    ),
                    axis: Axis::parse(toks[3])?,
                    flip_angle: num(toks[4])?,
                },
                _ => return Err(bad(&format!("unrecognized event `{line}`"))),
            };
            event.validate().map_err(|e| bad(&e.to_string()))?;
            events.push(event);
        }
        Ok(PulseSequence { events })
    }
}

/// 2×2 rotation exp(−iθ(I·n̂)) = cos(θ/2)·I − i·sin(θ/2)·σ_n̂.
pub fn rotation2(axis: Axis, flip_angle: f64) -> Operator2 {
    let c = (flip_angle / 2.0).cos();
    let s = (flip_angle / 2.0).sin();
    let z = C64::new(0.0, 0.0);
    let cc = C64::new(c, 0.0);
    let m = match axis {
        Axis::PlusX => [[cc, C64::new(0.0, -s)], [C64::new(0.0, -s), cc]],
        Axis::MinusX => [[cc, C64::new(0.0, s)], [C64::new(0.0, s), cc]],
        Axis::PlusY => [[cc, C64::new(-s, 0.0)], [C64::new(s, 0.0), cc]],
        Axis::MinusY => [[cc, C64::new(s, 0.0)], [C64::new(-s, 0.0), cc]],
    };
    let _ = z;
    Operator2::new(m).expect("rotation entries are finite")
}

/// Hard-pulse propagator: the same rotation on every targeted spin, identity
/// elsewhere.
pub fn rf_propagator(targets: Targets, axis: Axis, flip_angle: f64) -> Operator4 {
    let r = rotation2(axis, flip_angle);
    let e = Operator2::identity();
    let left_b = if targets.includes_b() { r } else { e };
    let right_a = if targets.includes_a() { r } else { e };
    kron(&left_b, &right_a)
}

/// Free-evolution propagator exp(−i·2πJt·I_z⊗I_z): a diagonal unitary with
/// phase pattern (+,−,−,+) on (¼)·2πJt.
pub fn j_propagator(duration: f64, system: &SpinSystem) -> Operator4 {
    debug_assert!(duration >= 0.0);
    let w = 2.0 * std::f64::consts::PI * system.j_coupling_hz * duration;
    let plus = C64::from_polar(1.0, -w / 4.0);
    let minus = C64::from_polar(1.0, w / 4.0);
    Operator4::from_diagonal([plus, minus, minus, plus]).expect("finite diagonal")
}

/// Idealized gradient crusher: zeroes every off-diagonal element, leaving the
/// populations untouched.
pub fn crusher(rho: &DensityMatrix4) -> DensityMatrix4 {
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(rho.elem(i, i).re, 0.0);
    }
    DensityMatrix4::new(m).expect("diagonal of a valid state is a valid state")
}

/// Rotation acting only inside the two-dimensional subspace spanned by the
/// named basis states; identity outside.
pub fn transition_propagator(pair: (usize, usize), axis: Axis, flip_angle: f64) -> Result<Operator4> {
    PulseEvent::Transition {
        pair,
        axis,
        flip_angle,
    }
    .validate()?;
    let (lo, hi) = if pair.0 < pair.1 {
        (pair.0, pair.1)
    } else {
        (pair.1, pair.0)
    };
    let r = rotation2(axis, flip_angle);
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    m[lo][lo] = r.elem(0, 0);
    m[lo][hi] = r.elem(0, 1);
    m[hi][lo] = r.elem(1, 0);
    m[hi][hi] = r.elem(1, 1);
    Operator4::new(m)
}

/// Propagator of a single event, or `None` for a gradient crusher.
pub fn event_propagator(event: &PulseEvent, system: &SpinSystem) -> Result<Option<Operator4>> {
    event.validate()?;
    Ok(match event {
        PulseEvent::Rf {
            targets,
            axis,
            flip_angle,
        } => Some(rf_propagator(*targets, *axis, *flip_angle)),
        PulseEvent::Delay { duration } => Some(j_propagator(*duration, system)),
        PulseEvent::GradientCrusher => None,
        PulseEvent::Transition {
            pair,
            axis,
            flip_angle,
        } => Some(transition_propagator(*pair, *axis, *flip_angle)?),
    })
}

/// Applies the events of `seq` to `rho0` in chronological order.
pub fn run_sequence(
    seq: &PulseSequence,
    rho0: &DensityMatrix4,
    system: &SpinSystem,
) -> Result<DensityMatrix4> {
    let mut rho = *rho0;
    for event in seq.events() {
        rho = match event_propagator(event, system)? {
            Some(u) => apply_unitary(&u, &rho)?,
            None => crusher(&rho),
        };
    }
    Ok(rho)
}

/// Reverse-order product of the event propagators of a crusher-free sequence.
pub fn compile_unitary(seq: &PulseSequence, system: &SpinSystem) -> Result<Operator4> {
    if seq.is_empty() {
        return Err(Error::InvalidSequence("cannot compile an empty sequence".into()));
    }
    let mut u = Operator4::identity();
    for event in seq.events() {
        match event_propagator(event, system)? {
            Some(p) => u = p * u,
            None => return Err(Error::NonUnitarySequence),
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PureState4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_rho(rng: &mut ChaCha8Rng) -> DensityMatrix4 {
        // random pure state through a handful of pulses
        let sys = SpinSystem::default();
        let mut rho = PureState4::basis(0).density();
        for _ in 0..5 {
            let axis = [Axis::PlusX, Axis::MinusX, Axis::PlusY, Axis::MinusY]
                [rng.gen_range(0..4)];
            let tgt = [Targets::A, Targets::B, Targets::Both][rng.gen_range(0..3)];
            let u = rf_propagator(tgt, axis, rng.gen_range(-3.0..3.0));
            rho = apply_unitary(&u, &rho).unwrap();
            let d = j_propagator(rng.gen_range(0.0..0.01), &sys);
            rho = apply_unitary(&d, &rho).unwrap();
        }
        rho
    }

    #[test]
    fn half_pulse_block_matches_closed_form() {
        let r = rotation2(Axis::PlusY, FRAC_PI_2);
        let q = 1.0 / 2.0_f64.sqrt();
        let want = [[c(q, 0.0), c(-q, 0.0)], [c(q, 0.0), c(q, 0.0)]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((r.elem(i, j) - want[i][j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_angle_pulse_is_identity() {
        for axis in [Axis::PlusX, Axis::MinusX, Axis::PlusY, Axis::MinusY] {
            let u = rf_propagator(Targets::B, axis, 0.0);
            assert!(u.max_abs_diff(&Operator4::identity()) < 1e-15);
        }
    }

    #[test]
    fn both_target_pulse_is_tensor_square() {
        let u = rf_propagator(Targets::Both, Axis::PlusY, FRAC_PI_2);
        let r = rotation2(Axis::PlusY, FRAC_PI_2);
        let want = kron(&r, &r);
        assert!(u.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn j_propagator_examples() {
        let sys = SpinSystem::default();
        assert!(j_propagator(0.0, &sys).max_abs_diff(&Operator4::identity()) < 1e-15);

        let half = j_propagator(1.0 / (2.0 * sys.j_coupling_hz), &sys);
        let q = std::f64::consts::FRAC_PI_4;
        let want = [
            C64::from_polar(1.0, -q),
            C64::from_polar(1.0, q),
            C64::from_polar(1.0, q),
            C64::from_polar(1.0, -q),
        ];
        for (i, w) in want.iter().enumerate() {
            assert!((half.elem(i, i) - w).norm() < 1e-15);
        }

        // t = 2/J leaves only a global phase: diag(−1,−1,−1,−1)
        let full = j_propagator(2.0 / sys.j_coupling_hz, &sys);
        for i in 0..4 {
            assert!((full.elem(i, i) - c(-1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn j_propagator_semigroup() {
        let sys = SpinSystem::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let t1: f64 = rng.gen_range(0.0..0.02);
            let t2: f64 = rng.gen_range(0.0..0.02);
            let lhs = j_propagator(t1, &sys) * j_propagator(t2, &sys);
            let rhs = j_propagator(t1 + t2, &sys);
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn crusher_zeroes_offdiagonals_preserves_trace() {
        let q = 1.0 / 2.0_f64.sqrt();
        let psi = PureState4::new([c(q, 0.0), c(0.0, 0.0), c(q, 0.0), c(0.0, 0.0)]).unwrap();
        let out = crusher(&psi.density());
        let d = out.diagonal();
        for (got, want) in d.iter().zip([0.5, 0.0, 0.5, 0.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(out.elem(i, j), c(0.0, 0.0));
                }
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10 {
            let rho = random_rho(&mut rng);
            let out = crusher(&rho);
            assert!((out.trace().re - 1.0).abs() < 1e-12);
            // diagonal rho passes through unchanged
            let again = crusher(&out);
            assert!(again.max_abs_diff(&out) == 0.0);
        }
    }

    #[test]
    fn transition_pulse_pi_swaps_pair_populations() {
        let u = transition_propagator((2, 3), Axis::PlusY, PI).unwrap();
        let rho = PureState4::basis(2).density();
        let out = apply_unitary(&u, &rho).unwrap();
        let d = out.diagonal();
        assert!((d[3] - 1.0).abs() < 1e-14 && d[2].abs() < 1e-14);
        assert!(
            transition_propagator((1, 3), Axis::PlusY, 0.0)
                .unwrap()
                .max_abs_diff(&Operator4::identity())
                < 1e-15
        );
    }

    #[test]
    fn transition_pulse_population_transfer_matches_oracle() {
        // p1 → p1·cos²(θ/2) + p3·sin²(θ/2) on diagonal input
        let diag = [0.4, 0.3, 0.2, 0.1];
        let mut m = [[c(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            m[i][i] = c(diag[i], 0.0);
        }
        let rho = DensityMatrix4::new(m).unwrap();
        for theta in [0.3, 1.1, 2.5] {
            let u = transition_propagator((1, 3), Axis::PlusY, theta).unwrap();
            let out = apply_unitary(&u, &rho).unwrap();
            let x = (theta / 2.0).sin().powi(2);
            let want1 = diag[1] * (1.0 - x) + diag[3] * x;
            let want3 = diag[1] * x + diag[3] * (1.0 - x);
            let d = out.diagonal();
            assert!((d[1] - want1).abs() < 1e-13);
            assert!((d[3] - want3).abs() < 1e-13);
        }
    }

    #[test]
    fn transition_pulse_rejects_equal_indices() {
        assert!(transition_propagator((2, 2), Axis::PlusY, 1.0).is_err());
    }

    #[test]
    fn run_sequence_matches_compiled_product() {
        let sys = SpinSystem::default();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let mut events = Vec::new();
            for _ in 0..rng.gen_range(1..6) {
                if rng.gen_bool(0.3) {
                    events.push(PulseEvent::Delay {
                        duration: rng.gen_range(0.0..0.01),
                    });
                } else {
                    events.push(PulseEvent::Rf {
                        targets: [Targets::A, Targets::B, Targets::Both][rng.gen_range(0..3)],
                        axis: [Axis::PlusX, Axis::MinusX, Axis::PlusY, Axis::MinusY]
                            [rng.gen_range(0..4)],
                        flip_angle: rng.gen_range(-3.0..3.0),
                    });
                }
            }
            let seq = PulseSequence::new(events).unwrap();
            let rho = random_rho(&mut rng);
            let direct = run_sequence(&seq, &rho, &sys).unwrap();
            let u = compile_unitary(&seq, &sys).unwrap();
            assert!(u.unitary_defect() < 1e-12);
            let via_product = apply_unitary(&u, &rho).unwrap();
            assert!(direct.max_abs_diff(&via_product) < 1e-12);
        }
    }

    #[test]
    fn single_event_sequence_equals_apply_unitary() {
        let sys = SpinSystem::default();
        let seq = PulseSequence::new(vec![PulseEvent::Rf {
            targets: Targets::B,
            axis: Axis::PlusY,
            flip_angle: FRAC_PI_2,
        }])
        .unwrap();
        let rho = PureState4::basis(0).density();
        let direct = run_sequence(&seq, &rho, &sys).unwrap();
        let u = rf_propagator(Targets::B, Axis::PlusY, FRAC_PI_2);
        assert!(direct.max_abs_diff(&apply_unitary(&u, &rho).unwrap()) < 1e-14);
    }

    #[test]
    fn crusher_in_sequence_is_idempotent_and_blocks_compilation() {
        let sys = SpinSystem::default();
        let seq = PulseSequence::new(vec![
            PulseEvent::Rf {
                targets: Targets::Both,
                axis: Axis::PlusY,
                flip_angle: 1.2,
            },
            PulseEvent::GradientCrusher,
        ])
        .unwrap();
        let rho = PureState4::basis(0).density();
        let once = run_sequence(&seq, &rho, &sys).unwrap();
        let crush_only = PulseSequence::new(vec![PulseEvent::GradientCrusher]).unwrap();
        let twice = run_sequence(&crush_only, &once, &sys).unwrap();
        assert!(once.max_abs_diff(&twice) == 0.0);
        assert!(matches!(
            compile_unitary(&seq, &sys),
            Err(Error::NonUnitarySequence)
        ));
    }

    #[test]
    fn empty_sequence_does_not_compile() {
        let sys = SpinSystem::default();
        assert!(compile_unitary(&PulseSequence::default(), &sys).is_err());
    }

    #[test]
    fn text_form_round_trips() {
        let seq = PulseSequence::new(vec![
            PulseEvent::Rf {
                targets: Targets::B,
                axis: Axis::PlusY,
                flip_angle: FRAC_PI_2,
            },
            PulseEvent::Delay {
                duration: 1.0 / 430.0,
            },
            PulseEvent::GradientCrusher,
            PulseEvent::Transition {
                pair: (2, 3),
                axis: Axis::PlusY,
                flip_angle: PI,
            },
        ])
        .unwrap();
        let text = seq.to_text();
        assert!(text.starts_with("rf b +y "));
        assert!(text.contains("\ncrush\n"));
        let back = PulseSequence::from_text(&text).unwrap();
        assert_eq!(seq, back);
    }

    #[test]
    fn text_parser_rejects_garbage() {
        assert!(PulseSequence::from_text("rf b +q 1.0").is_err());
        assert!(PulseSequence::from_text("warp 9").is_err());
        assert!(PulseSequence::from_text("tsel 2 2 +y 1.0").is_err());
        assert!(PulseSequence::from_text("delay -0.1").is_err());
    }
}
