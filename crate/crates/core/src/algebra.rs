//! Dense complex kernel for the two-spin Hilbert space.
//!
//! Basis convention: product states are ordered |00⟩, |01⟩, |10⟩, |11⟩ where
//! the first label is spin b (the observed ¹³C) and the second is spin a (the
//! ¹H marker), i.e. index = 2·b + a. Spin-b operators occupy the left tensor
//! slot of [`kron`].
//!
//! All values are immutable after construction and every operation is a pure
//! function, so everything here is safe to share across threads.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Max-norm tolerance for ‖U†U − E‖ when classifying operators as unitary.
pub const UNITARY_TOL: f64 = 1e-12;
/// Tolerance for Hermiticity and trace checks on density matrices.
pub const STATE_TOL: f64 = 1e-12;
/// Lower bound accepted for the smallest density-matrix eigenvalue.
pub const PSD_TOL: f64 = -1e-10;
/// Entries of V†U below this magnitude carry no usable phase information.
const PHASE_FLOOR: f64 = 1e-14;

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// A 2×2 complex operator acting on a single spin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Operator2 {
    m: [[C64; 2]; 2],
    unitary: bool,
}

impl Operator2 {
    pub fn new(m: [[C64; 2]; 2]) -> Result<Self> {
        if !m.iter().flatten().all(|&z| finite(z)) {
            return Err(Error::InvalidState("non-finite operator entry".into()));
        }
        let mut op = Operator2 { m, unitary: false };
        op.unitary = op.unitary_defect() < UNITARY_TOL;
        Ok(op)
    }

    pub fn identity() -> Self {
        let mut m = [[C64::new(0.0, 0.0); 2]; 2];
        m[0][0] = C64::new(1.0, 0.0);
        m[1][1] = C64::new(1.0, 0.0);
        Operator2 { m, unitary: true }
    }

    pub fn elem(&self, i: usize, j: usize) -> C64 {
        self.m[i][j]
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// Max-norm of U†U − I.
    pub fn unitary_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..2 {
                    s += self.m[k][i].conj() * self.m[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Operator2) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }
}

/// A 4×4 complex operator on the two-spin space.
///
/// The unitary flag is measured at construction (defect against [`UNITARY_TOL`])
/// rather than trusted from the caller.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Operator4 {
    m: [[C64; 4]; 4],
    unitary: bool,
}

impl Operator4 {
    pub fn new(m: [[C64; 4]; 4]) -> Result<Self> {
        if !m.iter().flatten().all(|&z| finite(z)) {
            return Err(Error::InvalidState("non-finite operator entry".into()));
        }
        let mut op = Operator4 { m, unitary: false };
        op.unitary = op.unitary_defect() < UNITARY_TOL;
        Ok(op)
    }

    pub fn identity() -> Self {
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = C64::new(1.0, 0.0);
        }
        Operator4 { m, unitary: true }
    }

    pub fn from_diagonal(d: [C64; 4]) -> Result<Self> {
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = d[i];
        }
        Operator4::new(m)
    }

    pub fn elem(&self, i: usize, j: usize) -> C64 {
        self.m[i][j]
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn unitary_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..4 {
                    s += self.m[k][i].conj() * self.m[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    pub fn adjoint(&self) -> Operator4 {
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = self.m[j][i].conj();
            }
        }
        Operator4 {
            m,
            unitary: self.unitary,
        }
    }

    pub fn max_abs_diff(&self, other: &Operator4) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }

    pub fn apply_state(&self, psi: &PureState4) -> Result<PureState4> {
        let mut amp = [C64::new(0.0, 0.0); 4];
        for (i, out) in amp.iter_mut().enumerate() {
            for j in 0..4 {
                *out += self.m[i][j] * psi.amp[j];
            }
        }
        PureState4::new(amp)
    }
}

impl std::ops::Mul for Operator4 {
    type Output = Operator4;

    fn mul(self, rhs: Operator4) -> Operator4 {
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..4 {
                    s += self.m[i][k] * rhs.m[k][j];
                }
                m[i][j] = s;
            }
        }
        let mut op = Operator4 { m, unitary: false };
        // products of unitaries stay within tolerance at this size
        op.unitary = if self.unitary && rhs.unitary {
            op.unitary_defect() < UNITARY_TOL
        } else {
            false
        };
        op
    }
}

/// Tensor product with spin b on the left slot:
/// `(A⊗B)[2i+k][2j+l] = A[i][j]·B[k][l]`.
pub fn kron(left_b: &Operator2, right_a: &Operator2) -> Operator4 {
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[2 * i + k][2 * j + l] = left_b.m[i][j] * right_a.m[k][l];
                }
            }
        }
    }
    let mut op = Operator4 { m, unitary: false };
    op.unitary = if left_b.unitary && right_a.unitary {
        op.unitary_defect() < UNITARY_TOL
    } else {
        false
    };
    op
}

/// A normalized two-spin state vector in the |ba⟩ basis.
#[derive(Clone, Copy, Debug)]
pub struct PureState4 {
    amp: [C64; 4],
}

impl PureState4 {
    pub fn new(amp: [C64; 4]) -> Result<Self> {
        if !amp.iter().all(|&z| finite(z)) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm2: f64 = amp.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "state norm² = {norm2} is not 1"
            )));
        }
        Ok(PureState4 { amp })
    }

    /// Basis state |i⟩ with i = 2·b + a.
    pub fn basis(i: usize) -> Self {
        let mut amp = [C64::new(0.0, 0.0); 4];
        amp[i] = C64::new(1.0, 0.0);
        PureState4 { amp }
    }

    pub fn amp(&self, i: usize) -> C64 {
        self.amp[i]
    }

    pub fn density(&self) -> DensityMatrix4 {
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = self.amp[i] * self.amp[j].conj();
            }
        }
        DensityMatrix4 { m }
    }
}

/// Hermitian, trace-one, positive-semidefinite 4×4 ensemble state.
///
/// Validity (Hermiticity within 1e-12, trace within 1e-12 of one, smallest
/// eigenvalue ≥ −1e-10) is enforced at construction.
#[derive(Clone, Copy, Debug)]
pub struct DensityMatrix4 {
    m: [[C64; 4]; 4],
}

impl DensityMatrix4 {
    pub fn new(m: [[C64; 4]; 4]) -> Result<Self> {
        if !m.iter().flatten().all(|&z| finite(z)) {
            return Err(Error::InvalidState("non-finite density entry".into()));
        }
        let mut herm = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                herm = herm.max((m[i][j] - m[j][i].conj()).norm());
            }
        }
        if herm > 2.0 * STATE_TOL {
            return Err(Error::InvalidState(format!(
                "Hermiticity defect {herm:.3e}"
            )));
        }
        let tr: C64 = (0..4).map(|i| m[i][i]).sum();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace = {tr} is not 1")));
        }
        let rho = DensityMatrix4 { m };
        let lambda_min = rho.eigenvalues()[0];
        if lambda_min < PSD_TOL {
            return Err(Error::InvalidState(format!(
                "smallest eigenvalue {lambda_min:.3e} below {PSD_TOL:.1e}"
            )));
        }
        Ok(rho)
    }

    pub fn elem(&self, i: usize, j: usize) -> C64 {
        self.m[i][j]
    }

    /// Diagonal (populations) as real numbers.
    pub fn diagonal(&self) -> [f64; 4] {
        [
            self.m[0][0].re,
            self.m[1][1].re,
            self.m[2][2].re,
            self.m[3][3].re,
        ]
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|i| self.m[i][i]).sum()
    }

    /// Eigenvalues sorted ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let a: Vec<Vec<C64>> = (0..4).map(|i| self.m[i].to_vec()).collect();
        let v = hermitian_eigenvalues(a);
        [v[0], v[1], v[2], v[3]]
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.m[i][j] - self.m[j][i].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix4) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }
}

/// Conjugation ρ → UρU† by a verified unitary.
pub fn apply_unitary(u: &Operator4, rho: &DensityMatrix4) -> Result<DensityMatrix4> {
    if !u.is_unitary() {
        return Err(Error::NonUnitary {
            defect: u.unitary_defect(),
        });
    }
    let mut tmp = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..4 {
                s += u.m[i][k] * rho.m[k][j];
            }
            tmp[i][j] = s;
        }
    }
    let mut out = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..4 {
                s += tmp[i][k] * u.m[j][k].conj();
            }
            out[i][j] = s;
        }
    }
    DensityMatrix4::new(out)
}

/// min over unit-modulus λ of ‖U − λV‖_max, with λ read off the
/// largest-magnitude entry of V†U.
pub fn distance_up_to_global_phase(u: &Operator4, v: &Operator4) -> Result<f64> {
    for op in [u, v] {
        if !op.is_unitary() {
            return Err(Error::NonUnitary {
                defect: op.unitary_defect(),
            });
        }
    }
    let m = v.adjoint() * *u;
    let mut best = C64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            if m.m[i][j].norm() > best.norm() {
                best = m.m[i][j];
            }
        }
    }
    if best.norm() < PHASE_FLOOR {
        return Err(Error::Incomparable);
    }
    let lambda = best / best.norm();
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((u.m[i][j] - lambda * v.m[i][j]).norm());
        }
    }
    Ok(worst)
}

/// Distance up to a diagonal of unit-modulus phases, column-wise: phase j is
/// taken from the dominant entry of column j of V†U and the residual is
/// ‖U − V·D‖_max. Returns the distance and the four phases used.
pub fn distance_up_to_diagonal_phase(u: &Operator4, v: &Operator4) -> Result<(f64, [f64; 4])> {
    for op in [u, v] {
        if !op.is_unitary() {
            return Err(Error::NonUnitary {
                defect: op.unitary_defect(),
            });
        }
    }
    let m = v.adjoint() * *u;
    let mut phases = [0.0f64; 4];
    for j in 0..4 {
        let mut best = C64::new(0.0, 0.0);
        for i in 0..4 {
            if m.m[i][j].norm() > best.norm() {
                best = m.m[i][j];
            }
        }
        if best.norm() < PHASE_FLOOR {
            return Err(Error::Incomparable);
        }
        phases[j] = best.arg();
    }
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let d = C64::from_polar(1.0, phases[j]);
            worst = worst.max((u.m[i][j] - v.m[i][j] * d).norm());
        }
    }
    Ok((worst, phases))
}

/// Eigenvalues of a small Hermitian matrix by cyclic Jacobi rotations,
/// returned sorted ascending. Each pivot is phased real and annihilated with
/// a classical 2×2 rotation.
pub fn hermitian_eigenvalues(mut a: Vec<Vec<C64>>) -> Vec<f64> {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    if n == 1 {
        return vec![a[0][0].re];
    }
    let scale: f64 = a
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(1.0);
    for _ in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p][q].norm());
            }
        }
        if off < 1e-15 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p][q];
                let r = apq.norm();
                if r < 1e-300 {
                    continue;
                }
                // phase the pivot real, then rotate it away
                let u = apq / r;
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // columns of the combined unitary J = D·G restricted to (p,q):
                //   J[:,p] = c·e_p − s·ū·e_q,  J[:,q] = s·e_p + c·ū·e_q
                let jp = (C64::new(c, 0.0), -u.conj() * s);
                let jq = (C64::new(s, 0.0), u.conj() * c);
                // A ← J† A J applied as row/col updates
                let mut rows_p = vec![C64::new(0.0, 0.0); n];
                let mut rows_q = vec![C64::new(0.0, 0.0); n];
                for k in 0..n {
                    rows_p[k] = jp.0.conj() * a[p][k] + jp.1.conj() * a[q][k];
                    rows_q[k] = jq.0.conj() * a[p][k] + jq.1.conj() * a[q][k];
                }
                for k in 0..n {
                    a[p][k] = rows_p[k];
                    a[q][k] = rows_q[k];
                }
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = akp * jp.0 + akq * jp.1;
                    a[k][q] = akp * jq.0 + akq * jq.1;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i].re).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}
