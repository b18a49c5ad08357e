//! End-to-end orchestration of the two interferometry schemes: φ sweeps,
//! analytic reference curves, fringe visibility, and residual reports.
//!
//! Rows are independent; every stochastic quantity of row k, shot j derives
//! from [`shot_rng`]`(seed, k, j)`, so results do not depend on evaluation
//! order and identical configurations reproduce byte-identical datasets.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::algebra::{apply_unitary, DensityMatrix4, Operator4, PureState4};
use crate::error::{Error, Result};
use crate::gates::{
    cnot_phase_report, cnot_pulse_sequence, diagonal_phase_inverse, r1_gate, r1_pulse_sequence,
    r2_gate, readout_sequence, u_gate_ideal, u_pulse_sequence, CnotPhaseReport,
};
use crate::measure::{
    coherences, coherences_from_lines, line_amplitudes, marginal_b, populations,
    populations_from_lines, CoherencePair, LineAmplitudeSet, ObservedSpin, PopulationVector,
    QuadratureTable,
};
use crate::prep::{effective_pure, prepare, solve_prep_angles, EffectivePureParams, ThermalParams};
use crate::pulse::{run_sequence, PulseSequence, SpinSystem};
use crate::spectra::{acquire, fmt_sig, line_frequencies, ErrorModel, FidParams};

/// Which of the two schemes to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeId {
    /// Split with R₁ᵇ(θ) and leave the marker untouched.
    Unmarked,
    /// Split and mark with R₂ᵇᵃ(θ) = CN_ba·R₁ᵇ(θ).
    Marked,
}

/// Gate realization level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateLevel {
    Ideal,
    Pulse,
}

/// Initial ensemble state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialState {
    Pure,
    EffectivePure { a: f64, b: f64 },
    Thermal { eps_b: f64, eps_a: f64 },
}

/// Full description of one sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub scheme: SchemeId,
    /// Beam-splitter angle θ in radians.
    pub theta: f64,
    /// Interferometer phases, each in [0, 2π).
    pub phi_grid: Vec<f64>,
    pub gate_level: GateLevel,
    pub initial: InitialState,
    /// When set, runs the stochastic acquisition pipeline per grid point.
    pub error: Option<ErrorModel>,
    pub fid: FidParams,
    pub quadrature_flip: bool,
    pub system: SpinSystem,
}

impl SweepConfig {
    pub fn new(scheme: SchemeId, theta: f64, phi_steps: usize) -> Self {
        SweepConfig {
            scheme,
            theta,
            phi_grid: default_phi_grid(phi_steps),
            gate_level: GateLevel::Ideal,
            initial: InitialState::Pure,
            error: None,
            fid: FidParams::default(),
            quadrature_flip: false,
            system: SpinSystem::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() {
            return Err(Error::InvalidConfig("theta must be finite".into()));
        }
        if self.phi_grid.is_empty() {
            return Err(Error::InvalidConfig("phi grid must be nonempty".into()));
        }
        let tau = 2.0 * std::f64::consts::PI;
        if self
            .phi_grid
            .iter()
            .any(|p| !p.is_finite() || *p < 0.0 || *p >= tau)
        {
            return Err(Error::InvalidConfig(
                "phi values must lie in [0, 2*pi)".into(),
            ));
        }
        self.system.validate()?;
        self.fid.validate()?;
        if let Some(err) = &self.error {
            err.validate()?;
            if err.rf_scale_sigma > 0.0 && self.gate_level != GateLevel::Pulse {
                return Err(Error::InvalidConfig(
                    "an RF flip-angle spread requires pulse-level gates".into(),
                ));
            }
        }
        if let InitialState::EffectivePure { a, b } = self.initial {
            let p = EffectivePureParams::new(a, b)?;
            if p.b <= 0.0 {
                return Err(Error::InvalidConfig(
                    "effective-pure B must be positive so observables can be normalized".into(),
                ));
            }
        }
        Ok(())
    }

    fn table(&self) -> QuadratureTable {
        if self.quadrature_flip {
            QuadratureTable::default().flipped()
        } else {
            QuadratureTable::default()
        }
    }
}

/// Uniform grid of n points over [0, 2π).
pub fn default_phi_grid(n: usize) -> Vec<f64> {
    let tau = 2.0 * std::f64::consts::PI;
    (0..n).map(|k| tau * k as f64 / n.max(1) as f64).collect()
}

/// Per-observable standard errors of a noisy row (std of the mean).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowStdErr {
    pub p: [f64; 4],
    pub marginal: [f64; 2],
    pub c: [f64; 2],
}

/// One grid point of a sweep: normalized observables (and their standard
/// errors when the row was estimated from noisy acquisitions).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub phi: f64,
    pub pops: PopulationVector,
    pub marginal: (f64, f64),
    pub coh: CoherencePair,
    pub se: Option<RowStdErr>,
    /// Observed per-shot standard deviation (dispersion of a single shot),
    /// present for noisy rows.
    pub shot_std: Option<RowStdErr>,
}

/// Sweep output: one row per grid point plus the configuration it came from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepDataset {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    /// Diagonal-phase report of the compiled CNOT when pulse-level gates ran.
    pub cnot: Option<CnotPhaseReport>,
}

/// Deterministic RNG stream of (row, shot); independent of evaluation order.
pub fn shot_rng(seed: u64, row: usize, shot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((row as u64) << 32) | shot as u64);
    rng
}

enum Stage {
    Gate(Operator4),
    Seq(PulseSequence),
    /// Fixed bookkeeping rotation (recorded CNOT phase correction); not
    /// subject to the RF scale.
    Fixup(Operator4),
}

fn scheme_stages(config: &SweepConfig, phi: f64) -> Result<(Vec<Stage>, Option<CnotPhaseReport>)> {
    match config.gate_level {
        GateLevel::Ideal => {
            let split = match config.scheme {
                SchemeId::Unmarked => r1_gate(config.theta),
                SchemeId::Marked => r2_gate(config.theta),
            };
            Ok((
                vec![Stage::Gate(split), Stage::Gate(u_gate_ideal(phi))],
                None,
            ))
        }
        GateLevel::Pulse => {
            let mut stages = vec![Stage::Seq(r1_pulse_sequence(config.theta))];
            let mut report = None;
            if config.scheme == SchemeId::Marked {
                let rep = cnot_phase_report(&config.system)?;
                stages.push(Stage::Fixup(diagonal_phase_inverse(&rep.phases_rad)));
                stages.push(Stage::Seq(cnot_pulse_sequence(&config.system)));
                report = Some(rep);
            }
            stages.push(Stage::Seq(u_pulse_sequence(phi)));
            Ok((stages, report))
        }
    }
}

fn apply_stages(
    stages: &[Stage],
    rho0: &DensityMatrix4,
    system: &SpinSystem,
    rf_scale: f64,
) -> Result<DensityMatrix4> {
    let mut rho = *rho0;
    for stage in stages {
        rho = match stage {
            Stage::Gate(u) | Stage::Fixup(u) => apply_unitary(u, &rho)?,
            Stage::Seq(seq) => {
                if rf_scale == 1.0 {
                    run_sequence(seq, &rho, system)?
                } else {
                    run_sequence(&seq.scale_flip_angles(rf_scale), &rho, system)?
                }
            }
        };
    }
    Ok(rho)
}

/// Initial state together with the (A, B) weights used to normalize
/// observables back to the pure-state scale.
fn initial_state(config: &SweepConfig) -> Result<(DensityMatrix4, f64, f64)> {
    match config.initial {
        InitialState::Pure => Ok((PureState4::basis(0).density(), 0.0, 1.0)),
        InitialState::EffectivePure { a, b } => {
            let p = EffectivePureParams::new(a, b)?;
            Ok((effective_pure(&p)?, a, b))
        }
        InitialState::Thermal { eps_b, eps_a } => {
            let thermal = ThermalParams { eps_b, eps_a };
            let sol = solve_prep_angles(&thermal)?;
            let rho = prepare(&thermal, &sol.angles, &config.system)?;
            Ok((rho, sol.a, sol.b))
        }
    }
}

struct Normalizer {
    a: f64,
    b: f64,
}

impl Normalizer {
    fn pops(&self, p: &PopulationVector) -> PopulationVector {
        let arr = p.as_array().map(|x| (x - self.a) / self.b);
        PopulationVector::from_array(arr)
    }

    fn marginal(&self, m: (f64, f64)) -> (f64, f64) {
        (
            (m.0 - 2.0 * self.a) / self.b,
            (m.1 - 2.0 * self.a) / self.b,
        )
    }

    fn coh(&self, c: &CoherencePair) -> CoherencePair {
        CoherencePair {
            c0: c.c0 / self.b,
            c1: c.c1 / self.b,
        }
    }
}

fn deterministic_row(
    config: &SweepConfig,
    stages: &[Stage],
    rho0: &DensityMatrix4,
    norm: &Normalizer,
    phi: f64,
) -> Result<SweepRow> {
    let rho = apply_stages(stages, rho0, &config.system, 1.0)?;
    let pops = populations(&rho);
    Ok(SweepRow {
        phi,
        pops: norm.pops(&pops),
        marginal: norm.marginal(marginal_b(&pops)),
        coh: norm.coh(&coherences(&rho)),
        se: None,
        shot_std: None,
    })
}

fn noisy_row(
    config: &SweepConfig,
    stages: &[Stage],
    rho0: &DensityMatrix4,
    norm: &Normalizer,
    phi: f64,
    row_index: usize,
    model: &ErrorModel,
) -> Result<SweepRow> {
    let table = config.table();
    let n = model.n_shots;
    let mut samples: Vec<[f64; 8]> = Vec::with_capacity(n);
    for shot in 0..n {
        let mut rng = shot_rng(model.seed, row_index, shot);
        let g = if model.rf_scale_sigma > 0.0 {
            let dist = Normal::new(1.0, model.rf_scale_sigma)
                .map_err(|e| Error::InvalidConfig(format!("rf scale model: {e}")))?;
            dist.sample(&mut rng)
        } else {
            1.0
        };
        let rho = apply_stages(stages, rho0, &config.system, g)?;
        let readout = readout_sequence().scale_flip_angles(g);
        let true_lines = line_amplitudes(&rho, &readout, &config.system)?;
        let mut fitted = LineAmplitudeSet {
            b: [C64::new(0.0, 0.0); 2],
            a: [C64::new(0.0, 0.0); 2],
        };
        for spin in [ObservedSpin::B, ObservedSpin::A] {
            let freqs = line_frequencies(&config.system, &config.fid, spin);
            let amps = true_lines.of(spin);
            let rec = acquire(&amps, &freqs, &config.fid, model.noise_sigma, &mut rng)?;
            match spin {
                ObservedSpin::B => fitted.b = [rec[0], rec[1]],
                ObservedSpin::A => fitted.a = [rec[0], rec[1]],
            }
        }
        let raw_pops = populations_from_lines(&fitted, &table);
        let pops = norm.pops(&raw_pops);
        let marg = norm.marginal(marginal_b(&raw_pops));
        let coh = norm.coh(&coherences_from_lines(&fitted, &table));
        samples.push([
            pops.p00, pops.p01, pops.p10, pops.p11, marg.0, marg.1, coh.c0, coh.c1,
        ]);
    }

    let mut mean = [0.0f64; 8];
    for s in &samples {
        for (m, x) in mean.iter_mut().zip(s) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut std = [0.0f64; 8];
    if n > 1 {
        for s in &samples {
            for (v, (x, m)) in std.iter_mut().zip(s.iter().zip(mean.iter())) {
                *v += (x - m) * (x - m);
            }
        }
        for v in std.iter_mut() {
            *v = (*v / (n - 1) as f64).sqrt();
        }
    }
    let se: Vec<f64> = std.iter().map(|s| s / (n as f64).sqrt()).collect();

    Ok(SweepRow {
        phi,
        pops: PopulationVector::from_array([mean[0], mean[1], mean[2], mean[3]]),
        marginal: (mean[4], mean[5]),
        coh: CoherencePair {
            c0: mean[6],
            c1: mean[7],
        },
        se: Some(RowStdErr {
            p: [se[0], se[1], se[2], se[3]],
            marginal: [se[4], se[5]],
            c: [se[6], se[7]],
        }),
        shot_std: Some(RowStdErr {
            p: [std[0], std[1], std[2], std[3]],
            marginal: [std[4], std[5]],
            c: [std[6], std[7]],
        }),
    })
}

/// Runs a single grid point (as row 0 of the seeding scheme).
pub fn run_point(config: &SweepConfig, phi: f64) -> Result<SweepRow> {
    run_point_at(config, phi, 0)
}

fn run_point_at(config: &SweepConfig, phi: f64, row_index: usize) -> Result<SweepRow> {
    config.validate()?;
    let (rho0, a, b) = initial_state(config)?;
    let norm = Normalizer { a, b };
    let (stages, _) = scheme_stages(config, phi)?;
    match &config.error {
        None => deterministic_row(config, &stages, &rho0, &norm, phi),
        Some(model) => noisy_row(config, &stages, &rho0, &norm, phi, row_index, model),
    }
}

/// Runs the whole φ grid in row order.
pub fn sweep(config: &SweepConfig) -> Result<SweepDataset> {
    config.validate()?;
    let (rho0, a, b) = initial_state(config)?;
    let norm = Normalizer { a, b };
    let mut rows = Vec::with_capacity(config.phi_grid.len());
    let mut cnot = None;
    for (k, &phi) in config.phi_grid.iter().enumerate() {
        let (stages, report) = scheme_stages(config, phi)?;
        if cnot.is_none() {
            cnot = report;
        }
        let row = match &config.error {
            None => deterministic_row(config, &stages, &rho0, &norm, phi)?,
            Some(model) => noisy_row(config, &stages, &rho0, &norm, phi, k, model)?,
        };
        rows.push(row);
    }
    Ok(SweepDataset {
        config: config.clone(),
        rows,
        cnot,
    })
}

/// The observables a dataset row carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    P00,
    P01,
    P10,
    P11,
    MarginalB0,
    MarginalB1,
    C0,
    C1,
}

impl Observable {
    pub fn of_row(&self, row: &SweepRow) -> f64 {
        match self {
            Observable::P00 => row.pops.p00,
            Observable::P01 => row.pops.p01,
            Observable::P10 => row.pops.p10,
            Observable::P11 => row.pops.p11,
            Observable::MarginalB0 => row.marginal.0,
            Observable::MarginalB1 => row.marginal.1,
            Observable::C0 => row.coh.c0,
            Observable::C1 => row.coh.c1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Observable::P00 => "p00",
            Observable::P01 => "p01",
            Observable::P10 => "p10",
            Observable::P11 => "p11",
            Observable::MarginalB0 => "p0b",
            Observable::MarginalB1 => "p1b",
            Observable::C0 => "c0",
            Observable::C1 => "c1",
        }
    }
}

/// The three reference figures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
}

/// Which analytic form of a figure's reference curves to evaluate. The two
/// fringe forms differ by a quarter period: `Derived` follows from the gate
/// matrices (cos φ), `Caption` is the sin-φ variant. Both are kept and
/// labeled, never reconciled silently.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoryForm {
    Caption,
    Derived,
}

/// Observables each figure plots.
pub fn figure_observables(figure: Figure) -> &'static [Observable] {
    match figure {
        Figure::Fig2 => &[Observable::P00, Observable::P10],
        Figure::Fig3 => &[
            Observable::P00,
            Observable::P01,
            Observable::P10,
            Observable::P11,
            Observable::MarginalB0,
            Observable::MarginalB1,
        ],
        Figure::Fig4 => &[Observable::C0, Observable::C1],
    }
}

/// Analytic reference value of one observable at (θ, φ).
pub fn theory_value(
    figure: Figure,
    form: TheoryForm,
    obs: Observable,
    theta: f64,
    phi: f64,
) -> Option<f64> {
    let s = theta.sin();
    match figure {
        Figure::Fig2 => {
            let osc = match form {
                TheoryForm::Derived => phi.cos(),
                TheoryForm::Caption => phi.sin(),
            };
            match obs {
                Observable::P00 => Some(0.5 * (1.0 + s * osc)),
                Observable::P10 => Some(0.5 * (1.0 - s * osc)),
                _ => None,
            }
        }
        Figure::Fig3 => {
            let half_cos2 = 0.5 * (theta / 2.0).cos().powi(2);
            let half_sin2 = 0.5 * (theta / 2.0).sin().powi(2);
            match obs {
                Observable::P00 | Observable::P10 => Some(half_cos2),
                Observable::P01 | Observable::P11 => Some(half_sin2),
                Observable::MarginalB0 | Observable::MarginalB1 => Some(0.5),
                _ => None,
            }
        }
        Figure::Fig4 => match obs {
            Observable::C0 => Some(0.5 * s * phi.sin()),
            Observable::C1 => Some(-0.5 * s * phi.sin()),
            _ => None,
        },
    }
}

/// Fringe contrast (max − min)/(max + min) of one observable over the grid.
pub fn visibility(dataset: &SweepDataset, obs: Observable) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for row in &dataset.rows {
        let v = obs.of_row(row);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi + lo < 1e-12 {
        return Err(Error::DegenerateSignal);
    }
    Ok((hi - lo) / (hi + lo))
}

fn first_harmonic(dataset: &SweepDataset, values: &[f64]) -> (f64, f64) {
    let n = dataset.rows.len() as f64;
    let mut ac = 0.0;
    let mut as_ = 0.0;
    for (row, v) in dataset.rows.iter().zip(values) {
        ac += v * row.phi.cos();
        as_ += v * row.phi.sin();
    }
    (2.0 * ac / n, 2.0 * as_ / n)
}

/// Peak amplitude A of the first φ harmonic of one observable, i.e. the A in
/// d(φ) ≈ mean + A·cos(φ − ψ).
pub fn first_harmonic_amplitude(dataset: &SweepDataset, obs: Observable) -> f64 {
    let values: Vec<f64> = dataset.rows.iter().map(|r| obs.of_row(r)).collect();
    let (ac, as_) = first_harmonic(dataset, &values);
    (ac * ac + as_ * as_).sqrt()
}

/// Residuals of one observable against a theory curve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub observable: String,
    pub theory: String,
    pub phi_offset_rad: f64,
    pub max_abs: f64,
    pub rms: f64,
}

/// Compares a dataset against a figure's curves. With `fit_offset` the model
/// is evaluated at φ + δ where δ aligns the first-harmonic phases (how the
/// caption's sin-form curves are matched to the cos-form data).
pub fn compare(
    dataset: &SweepDataset,
    figure: Figure,
    form: TheoryForm,
    fit_offset: bool,
) -> Result<Vec<ResidualEntry>> {
    if dataset.rows.is_empty() {
        return Err(Error::InvalidConfig("empty dataset".into()));
    }
    let theta = dataset.config.theta;
    let mut entries = Vec::new();
    for &obs in figure_observables(figure) {
        let data: Vec<f64> = dataset.rows.iter().map(|r| obs.of_row(r)).collect();
        let delta = if fit_offset {
            let model: Vec<f64> = dataset
                .rows
                .iter()
                .map(|r| theory_value(figure, form, obs, theta, r.phi).unwrap())
                .collect();
            let (dc, ds) = first_harmonic(dataset, &data);
            let (mc, ms) = first_harmonic(dataset, &model);
            let amp_d = (dc * dc + ds * ds).sqrt();
            let amp_m = (mc * mc + ms * ms).sqrt();
            if amp_d < 1e-12 || amp_m < 1e-12 {
                0.0
            } else {
                let tau = 2.0 * std::f64::consts::PI;
                (ms.atan2(mc) - ds.atan2(dc)).rem_euclid(tau)
            }
        } else {
            0.0
        };
        let mut max_abs = 0.0f64;
        let mut sq = 0.0f64;
        for (row, d) in dataset.rows.iter().zip(&data) {
            let m = theory_value(figure, form, obs, theta, row.phi + delta).unwrap();
            let r = d - m;
            max_abs = max_abs.max(r.abs());
            sq += r * r;
        }
        entries.push(ResidualEntry {
            observable: obs.name().to_string(),
            theory: format!(
                "{:?}-{}",
                figure,
                match form {
                    TheoryForm::Caption => "caption",
                    TheoryForm::Derived => "derived",
                }
            )
            .to_lowercase(),
            phi_offset_rad: delta,
            max_abs,
            rms: (sq / data.len() as f64).sqrt(),
        });
    }
    Ok(entries)
}

impl SweepDataset {
    /// CSV with header `phi_rad,p00,p01,p10,p11,p0b,p1b,c0,c1` and, for noisy
    /// datasets, the matching `se_*` columns. 12 significant digits.
    pub fn to_csv(&self) -> String {
        let noisy = self.rows.iter().any(|r| r.se.is_some());
        let mut out = String::from("phi_rad,p00,p01,p10,p11,p0b,p1b,c0,c1");
        if noisy {
            out.push_str(",se_p00,se_p01,se_p10,se_p11,se_p0b,se_p1b,se_c0,se_c1");
        }
        out.push('\n');
        for row in &self.rows {
            let mut cols = vec![
                fmt_sig(row.phi),
                fmt_sig(row.pops.p00),
                fmt_sig(row.pops.p01),
                fmt_sig(row.pops.p10),
                fmt_sig(row.pops.p11),
                fmt_sig(row.marginal.0),
                fmt_sig(row.marginal.1),
                fmt_sig(row.coh.c0),
                fmt_sig(row.coh.c1),
            ];
            if noisy {
                let se = row.se.unwrap_or(RowStdErr {
                    p: [0.0; 4],
                    marginal: [0.0; 2],
                    c: [0.0; 2],
                });
                cols.extend([
                    fmt_sig(se.p[0]),
                    fmt_sig(se.p[1]),
                    fmt_sig(se.p[2]),
                    fmt_sig(se.p[3]),
                    fmt_sig(se.marginal[0]),
                    fmt_sig(se.marginal[1]),
                    fmt_sig(se.c[0]),
                    fmt_sig(se.c[1]),
                ]);
            }
            out.push_str(&cols.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses rows back from the CSV form.
    pub fn rows_from_csv(text: &str) -> Result<Vec<SweepRow>> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty CSV".into()))?;
        let plain = "phi_rad,p00,p01,p10,p11,p0b,p1b,c0,c1";
        let noisy = header.trim_end() != plain;
        if noisy
            && header.trim_end()
                != format!("{plain},se_p00,se_p01,se_p10,se_p11,se_p0b,se_p1b,se_c0,se_c1")
        {
            return Err(Error::Parse(format!("unexpected CSV header `{header}`")));
        }
        let want = if noisy { 17 } else { 9 };
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("row {}: bad number `{t}`", k + 1)))
                })
                .collect::<Result<_>>()?;
            if vals.len() != want {
                return Err(Error::Parse(format!(
                    "row {}: expected {want} columns, found {}",
                    k + 1,
                    vals.len()
                )));
            }
            let (se, shot_std) = if noisy {
                (
                    Some(RowStdErr {
                        p: [vals[9], vals[10], vals[11], vals[12]],
                        marginal: [vals[13], vals[14]],
                        c: [vals[15], vals[16]],
                    }),
                    None,
                )
            } else {
                (None, None)
            };
            rows.push(SweepRow {
                phi: vals[0],
                pops: PopulationVector::from_array([vals[1], vals[2], vals[3], vals[4]]),
                marginal: (vals[5], vals[6]),
                coh: CoherencePair {
                    c0: vals[7],
                    c1: vals[8],
                },
                se,
                shot_std,
            });
        }
        Ok(rows)
    }

    /// JSON sidecar with the configuration, CNOT phase report, residual
    /// entries, and free-form notes; key order is stable.
    pub fn sidecar_json(&self, residuals: &[ResidualEntry], notes: &[String]) -> String {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            config: &'a SweepConfig,
            cnot: &'a Option<CnotPhaseReport>,
            residuals: &'a [ResidualEntry],
            notes: &'a [String],
        }
        serde_json::to_string_pretty(&Sidecar {
            config: &self.config,
            cnot: &self.cnot,
            residuals,
            notes,
        })
        .expect("serializable sidecar")
        + "\n"
    }
}
