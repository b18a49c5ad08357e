//! Observables: populations, marginals, signed coherences, and the complex
//! line amplitudes seen after the read-out pulses.
//!
//! Each observed spin's spectrum is modeled from its own read-out pulse: the
//! supplied read-out sequence is split by target, so a pulse on one spin never
//! feeds the other channel's lines. With a (π/2) read-out about −y the line
//! amplitude of spin s with partner state m comes out as
//! `A = −Δp + 2i·Im(ρ_pre[lo][hi])`: population difference in the real part,
//! the transition's pre-read-out coherence in the imaginary part. The
//! [`QuadratureTable`] records the signs that invert this relation.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{apply_unitary, DensityMatrix4};
use crate::error::Result;
use crate::pulse::{crusher, event_propagator, PulseEvent, PulseSequence, SpinSystem};

/// Basis-ordered populations (p00, p01, p10, p11).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationVector {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
}

impl PopulationVector {
    pub fn as_array(&self) -> [f64; 4] {
        [self.p00, self.p01, self.p10, self.p11]
    }

    pub fn from_array(p: [f64; 4]) -> Self {
        PopulationVector {
            p00: p[0],
            p01: p[1],
            p10: p[2],
            p11: p[3],
        }
    }
}

/// Signed coherences of the (|00⟩,|01⟩) and (|10⟩,|11⟩) pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherencePair {
    pub c0: f64,
    pub c1: f64,
}

/// Which spin's spectrum a line belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservedSpin {
    B,
    A,
}

/// Complex amplitudes of the four resolved lines, indexed by observed spin
/// and partner state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineAmplitudeSet {
    /// Spin-b (¹³C) lines for partner states a = 0, 1.
    pub b: [C64; 2],
    /// Spin-a (¹H) lines for partner states b = 0, 1.
    pub a: [C64; 2],
}

impl LineAmplitudeSet {
    pub fn of(&self, spin: ObservedSpin) -> [C64; 2] {
        match spin {
            ObservedSpin::B => self.b,
            ObservedSpin::A => self.a,
        }
    }
}

/// Sign conventions tying line quadratures back to state observables.
/// `pop_sign` maps real parts to population differences, `coh_sign` maps the
/// spin-a imaginary parts to the signed coherences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureTable {
    pub pop_sign: f64,
    pub coh_sign: f64,
}

impl Default for QuadratureTable {
    fn default() -> Self {
        QuadratureTable {
            pop_sign: -1.0,
            coh_sign: -1.0,
        }
    }
}

impl QuadratureTable {
    /// Alternative receiver convention with the coherence quadrature negated.
    pub fn flipped(&self) -> QuadratureTable {
        QuadratureTable {
            pop_sign: self.pop_sign,
            coh_sign: -self.coh_sign,
        }
    }
}

/// Diagonal of ρ in basis order.
pub fn populations(rho: &DensityMatrix4) -> PopulationVector {
    let d = rho.diagonal();
    PopulationVector::from_array(d)
}

/// Marginal populations of the observed spin: (p00+p01, p10+p11).
pub fn marginal_b(pops: &PopulationVector) -> (f64, f64) {
    (pops.p00 + pops.p01, pops.p10 + pops.p11)
}

/// C = −2·Im of the upper-triangular element of each pair; this normalization
/// makes the marked-scheme pipeline read ±(1/2)·sinθ·sinφ directly.
pub fn coherences(rho: &DensityMatrix4) -> CoherencePair {
    CoherencePair {
        c0: -2.0 * rho.elem(0, 1).im,
        c1: -2.0 * rho.elem(2, 3).im,
    }
}

fn event_touches(event: &PulseEvent, spin: ObservedSpin) -> bool {
    match event {
        PulseEvent::Rf { targets, .. } => match spin {
            ObservedSpin::B => targets.includes_b(),
            ObservedSpin::A => targets.includes_a(),
        },
        // delays, crushers, and line-selective pulses act on the full system
        _ => true,
    }
}

fn apply_for_spin(
    rho: &DensityMatrix4,
    readout: &PulseSequence,
    spin: ObservedSpin,
    system: &SpinSystem,
) -> Result<DensityMatrix4> {
    let mut out = *rho;
    for event in readout.events() {
        if !event_touches(event, spin) {
            continue;
        }
        out = match event_propagator(event, system)? {
            Some(u) => apply_unitary(&u, &out)?,
            None => crusher(&out),
        };
    }
    Ok(out)
}

/// Applies the read-out (split per observed spin) and returns twice the
/// single-quantum element of every resolved transition.
pub fn line_amplitudes(
    rho: &DensityMatrix4,
    readout: &PulseSequence,
    system: &SpinSystem,
) -> Result<LineAmplitudeSet> {
    let rho_b = apply_for_spin(rho, readout, ObservedSpin::B, system)?;
    let rho_a = apply_for_spin(rho, readout, ObservedSpin::A, system)?;
    Ok(LineAmplitudeSet {
        // spin-b transition with partner m joins |0m⟩ and |1m⟩
        b: [2.0 * rho_b.elem(0, 2), 2.0 * rho_b.elem(1, 3)],
        // spin-a transition with partner m joins |m0⟩ and |m1⟩
        a: [2.0 * rho_a.elem(0, 1), 2.0 * rho_a.elem(2, 3)],
    })
}

/// Recovers populations from the real parts of the four lines: the four
/// transition differences plus unit total, solved in the least-squares sense.
pub fn populations_from_lines(
    lines: &LineAmplitudeSet,
    table: &QuadratureTable,
) -> PopulationVector {
    let d_b0 = table.pop_sign * lines.b[0].re;
    let d_b1 = table.pop_sign * lines.b[1].re;
    let d_a0 = table.pop_sign * lines.a[0].re;
    let d_a1 = table.pop_sign * lines.a[1].re;
    // rows: p0−p2, p1−p3, p0−p1, p2−p3, p0+p1+p2+p3
    let rows: [[f64; 4]; 5] = [
        [1.0, 0.0, -1.0, 0.0],
        [0.0, 1.0, 0.0, -1.0],
        [1.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, -1.0],
        [1.0, 1.0, 1.0, 1.0],
    ];
    let rhs = [d_b0, d_b1, d_a0, d_a1, 1.0];
    // normal equations of the 5×4 system
    let mut g = [[0.0f64; 4]; 4];
    let mut y = [0.0f64; 4];
    for (row, &r) in rows.iter().zip(rhs.iter()) {
        for i in 0..4 {
            y[i] += row[i] * r;
            for j in 0..4 {
                g[i][j] += row[i] * row[j];
            }
        }
    }
    let p = solve4(g, y);
    PopulationVector::from_array(p)
}

/// Recovers the signed coherences from the spin-a line imaginary parts.
pub fn coherences_from_lines(lines: &LineAmplitudeSet, table: &QuadratureTable) -> CoherencePair {
    CoherencePair {
        c0: table.coh_sign * lines.a[0].im,
        c1: table.coh_sign * lines.a[1].im,
    }
}

/// Gaussian elimination with partial pivoting for the 4×4 normal system.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> [f64; 4] {
    for col in 0..4 {
        let mut piv = col;
        for r in col + 1..4 {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        debug_assert!(d.abs() > 1e-300);
        for r in 0..4 {
            if r == col {
                continue;
            }
            let f = a[r][col] / d;
            for c in col..4 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 4];
    for i in 0..4 {
        x[i] = b[i] / a[i][i];
    }
    x
}
