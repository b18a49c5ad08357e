//! Initial-state construction: thermal equilibrium, the effective pure state
//! A·E + B·|00⟩⟨00|, and the line-selective preparation that turns one into
//! the other.
//!
//! Preparation model: a rotation on the (|10⟩,|11⟩) transition, a rotation on
//! the (|01⟩,|11⟩) transition, then a gradient crusher. The two ideal
//! transition propagators share only the |11⟩ level, so applying them
//! sequentially (marker transition first) realizes the same population
//! contract as simultaneous pulses; the contract — equal populations in the
//! three non-|00⟩ levels — is what the solver targets.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::DensityMatrix4;
use crate::error::{Error, Result};
use crate::pulse::{crusher, run_sequence, Axis, PulseEvent, PulseSequence, SpinSystem};

/// High-temperature polarizations of the two spins. The default ratio
/// eps_a/eps_b = 3.977 follows the ¹H/¹³C gyromagnetic ratio; the overall
/// scale is cosmetic because the whole pipeline is linear in eps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    pub eps_b: f64,
    pub eps_a: f64,
}

impl Default for ThermalParams {
    fn default() -> Self {
        ThermalParams {
            eps_b: 0.01,
            eps_a: 0.03977,
        }
    }
}

impl ThermalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_a.is_finite() && self.eps_b.is_finite()) {
            return Err(Error::InvalidConfig("non-finite polarization".into()));
        }
        if self.eps_a.abs() + self.eps_b.abs() >= 1.0 {
            return Err(Error::InvalidConfig(
                "|eps_a| + |eps_b| must stay below 1".into(),
            ));
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> ThermalParams {
        ThermalParams {
            eps_b: factor * self.eps_b,
            eps_a: factor * self.eps_a,
        }
    }
}

/// Weights of ρ = A·E + B·|00⟩⟨00| with 4A + B = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectivePureParams {
    pub a: f64,
    pub b: f64,
}

impl EffectivePureParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if (4.0 * a + b - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "4A + B = {} must equal 1",
                4.0 * a + b
            )));
        }
        if a < 0.0 || b < 0.0 {
            return Err(Error::InvalidConfig("A and B must be non-negative".into()));
        }
        Ok(EffectivePureParams { a, b })
    }
}

/// ρ = A·E + B·|00⟩⟨00|, diagonal (A+B, A, A, A).
pub fn effective_pure(params: &EffectivePureParams) -> Result<DensityMatrix4> {
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    m[0][0] = C64::new(params.a + params.b, 0.0);
    for i in 1..4 {
        m[i][i] = C64::new(params.a, 0.0);
    }
    DensityMatrix4::new(m)
}

/// High-temperature thermal state E/4 + eps_b·I_z^b + eps_a·I_z^a.
pub fn thermal_state(params: &ThermalParams) -> Result<DensityMatrix4> {
    params.validate()?;
    let (eb, ea) = (params.eps_b, params.eps_a);
    let diag = [
        0.25 + 0.5 * (eb + ea),
        0.25 + 0.5 * (eb - ea),
        0.25 + 0.5 * (-eb + ea),
        0.25 + 0.5 * (-eb - ea),
    ];
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(diag[i], 0.0);
    }
    DensityMatrix4::new(m)
}

/// Flip angles of the two preparation pulses: `marker_pair` acts on the
/// (|10⟩,|11⟩) transition, `observed_pair` on (|01⟩,|11⟩).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrepAngles {
    pub marker_pair: f64,
    pub observed_pair: f64,
}

/// Solver output: the angles, the achieved population residual, and the
/// resulting effective-pure weights.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PrepSolution {
    pub angles: PrepAngles,
    pub residual: f64,
    pub a: f64,
    pub b: f64,
}

impl PrepSolution {
    /// Two-line human-readable report.
    pub fn report(&self) -> String {
        format!(
            "prep angles [rad]: pair(2,3) = {:.12}, pair(1,3) = {:.12} (residual {:.3e})\n\
             effective pure state: A = {:.12}, B = {:.12}\n",
            self.angles.marker_pair, self.angles.observed_pair, self.residual, self.a, self.b
        )
    }
}

/// Post-crush populations after the two transition rotations, for diagonal
/// input. Rotations move only the populations of their own pair, so the map
/// closes over the diagonal.
fn post_crush_diag(thermal: &[f64; 4], marker_angle: f64, observed_angle: f64) -> [f64; 4] {
    let x = (marker_angle / 2.0).sin().powi(2);
    let y = (observed_angle / 2.0).sin().powi(2);
    let p2 = thermal[2] * (1.0 - x) + thermal[3] * x;
    let p3 = thermal[2] * x + thermal[3] * (1.0 - x);
    let p1 = thermal[1] * (1.0 - y) + p3 * y;
    let p3 = thermal[1] * y + p3 * (1.0 - y);
    [thermal[0], p1, p2, p3]
}

fn equalization_residual(d: &[f64; 4]) -> f64 {
    (d[1] - d[3]).abs().max((d[2] - d[3]).abs())
}

const RESIDUAL_GATE: f64 = 1e-9;

/// Finds flip angles that leave the three non-|00⟩ populations equal after
/// the crusher: coarse grid over [0, π]², then alternating bisection on the
/// two one-dimensional equalization conditions. Deterministic.
pub fn solve_prep_angles(thermal: &ThermalParams) -> Result<PrepSolution> {
    thermal.validate()?;
    if thermal.eps_a == 0.0 && thermal.eps_b == 0.0 {
        return Err(Error::DegenerateInput(
            "zero polarizations leave nothing to equalize (B would be 0)".into(),
        ));
    }
    if !(thermal.eps_a > thermal.eps_b && thermal.eps_b > 0.0) {
        return Err(Error::DegenerateInput(format!(
            "solver requires eps_a > eps_b > 0, got eps_a = {}, eps_b = {}",
            thermal.eps_a, thermal.eps_b
        )));
    }
    let diag = thermal_state(thermal)?.diagonal();

    // coarse grid seed
    let n = 64usize;
    let step = std::f64::consts::PI / (n - 1) as f64;
    let mut best = (f64::INFINITY, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (i as f64 * step, j as f64 * step);
            let r = equalization_residual(&post_crush_diag(&diag, u, v));
            if r < best.0 {
                best = (r, u, v);
            }
        }
    }
    let (mut u, mut v) = (best.1, best.2);

    // alternate the two scalar conditions, each solved by bisection
    let bisect = |f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| -> Option<f64> {
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            return Some(lo);
        }
        if fhi == 0.0 {
            return Some(hi);
        }
        if flo.signum() == fhi.signum() {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm == 0.0 || hi - lo < 1e-15 {
                return Some(mid);
            }
            if fm.signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    };
    for _ in 0..50 {
        let uu = u;
        let g_v = move |vv: f64| {
            let d = post_crush_diag(&diag, uu, vv);
            d[1] - d[3]
        };
        if let Some(root) = bisect(&|vv| g_v(vv), 0.0, std::f64::consts::PI) {
            v = root;
        }
        let vv = v;
        let g_u = move |uu2: f64| {
            let d = post_crush_diag(&diag, uu2, vv);
            d[2] - d[3]
        };
        if let Some(root) = bisect(&|uu2| g_u(uu2), 0.0, std::f64::consts::PI) {
            u = root;
        }
        if equalization_residual(&post_crush_diag(&diag, u, v)) < 1e-13 {
            break;
        }
    }

    let d = post_crush_diag(&diag, u, v);
    let residual = equalization_residual(&d);
    if residual > RESIDUAL_GATE {
        return Err(Error::NoSolution { residual });
    }
    let a = d[3];
    let b = d[0] - d[3];
    if b <= 0.0 {
        return Err(Error::NoSolution { residual });
    }
    Ok(PrepSolution {
        angles: PrepAngles {
            marker_pair: u,
            observed_pair: v,
        },
        residual,
        a,
        b,
    })
}

/// The preparation as actual pulse events: the two transition rotations
/// followed by the crusher. Output is always diagonal.
pub fn prepare(
    thermal: &ThermalParams,
    angles: &PrepAngles,
    system: &SpinSystem,
) -> Result<DensityMatrix4> {
    let rho = thermal_state(thermal)?;
    let seq = PulseSequence::new(vec![
        PulseEvent::Transition {
            pair: (2, 3),
            axis: Axis::PlusY,
            flip_angle: angles.marker_pair,
        },
        PulseEvent::Transition {
            pair: (1, 3),
            axis: Axis::PlusY,
            flip_angle: angles.observed_pair,
        },
        PulseEvent::GradientCrusher,
    ])?;
    let out = run_sequence(&seq, &rho, system)?;
    // the crusher contract makes this a no-op; keep the output form explicit
    Ok(crusher(&out))
}
