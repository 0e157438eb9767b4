//! Truncated number-basis quantization of the cavity modes.
//!
//! Each mode lives in span{|0⟩, …, |N⟩}. On that space `[a, a†]` is the
//! identity except for the top diagonal entry, which is `-N`; every exact
//! identity is therefore checked on the block with occupations `≤ N - 1`.
//! Several modes are combined by explicit Kronecker products, mode 0 being
//! the most significant factor.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::cavity::{cos_pi, sin_pi, Mode, ModeSet, ModeState};
use crate::error::FockError;
use crate::grid::{GridSpec, AXIS_Z};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const DEFAULT_DIMENSION_CAP: usize = 4096;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub mass: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockSpec {
    n_max: usize,
    hbar: f64,
    modes: Vec<OscillatorParams>,
    dimension_cap: usize,
}

impl FockSpec {
    pub fn new(n_max: usize, hbar: f64, modes: Vec<OscillatorParams>) -> Result<Self, FockError> {
        if n_max < 1 {
            return Err(FockError::Truncation(n_max));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(FockError::InvalidParameter { name: "hbar", value: hbar });
        }
        for m in &modes {
            for (name, value) in [("mass", m.mass), ("omega", m.omega)] {
                if !(value.is_finite() && value > 0.0) {
                    return Err(FockError::InvalidParameter { name, value });
                }
            }
        }
        Ok(Self { n_max, hbar, modes, dimension_cap: DEFAULT_DIMENSION_CAP })
    }

    /// One oscillator per cavity mode, `ħ = 1`.
    pub fn from_mode_set(set: &ModeSet, n_max: usize) -> Result<Self, FockError> {
        let params = set.modes().iter().map(|m| OscillatorParams { mass: m.mass, omega: m.omega }).collect();
        Self::new(n_max, 1.0, params)
    }

    pub fn with_dimension_cap(mut self, cap: usize) -> Self {
        self.dimension_cap = cap;
        self
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn modes(&self) -> &[OscillatorParams] {
        &self.modes
    }

    pub fn dimension_cap(&self) -> usize {
        self.dimension_cap
    }

    /// Single-mode basis dimension `N + 1`.
    pub fn mode_dimension(&self) -> usize {
        self.n_max + 1
    }

    /// `(N + 1)^modes`, checked against the cap.
    pub fn tensor_dimension(&self, modes: usize) -> Result<usize, FockError> {
        let dimension =
            u32::try_from(modes).ok().and_then(|m| self.mode_dimension().checked_pow(m)).unwrap_or(usize::MAX);
        if dimension > self.dimension_cap {
            return Err(FockError::DimensionCap { dimension, cap: self.dimension_cap });
        }
        Ok(dimension)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderPair {
    pub a: CMatrix,
    pub a_dag: CMatrix,
}

/// `a|n⟩ = √n |n-1⟩` on the truncated basis, `a†` its adjoint.
pub fn build_ladder(spec: &FockSpec) -> Result<LadderPair, FockError> {
    if spec.n_max < 1 {
        return Err(FockError::Truncation(spec.n_max));
    }
    let d = spec.mode_dimension();
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = real((n as f64).sqrt());
    }
    let a_dag = a.adjoint();
    Ok(LadderPair { a, a_dag })
}

/// `q = √(ħ/2mω)(a† + a)`, `p = i√(ħmω/2)(a† - a)` for mode `alpha` (0-based).
pub fn position_momentum_ops(
    ladder: &LadderPair,
    spec: &FockSpec,
    alpha: usize,
) -> Result<(CMatrix, CMatrix), FockError> {
    let m = spec.modes.get(alpha).ok_or(FockError::ModeIndex { index: alpha, count: spec.modes.len() })?;
    let q_scale = (spec.hbar / (2.0 * m.mass * m.omega)).sqrt();
    let p_scale = (spec.hbar * m.mass * m.omega / 2.0).sqrt();
    let q = (&ladder.a_dag + &ladder.a) * real(q_scale);
    let p = (&ladder.a_dag - &ladder.a) * (I * p_scale);
    Ok((q, p))
}

/// `a(t) = e^{-iωt} a(0)`, `a†(t) = e^{iωt} a†(0)`.
pub fn heisenberg_evolve(ladder: &LadderPair, omega: f64, t: f64) -> LadderPair {
    let phase = Complex64::from_polar(1.0, omega * t);
    LadderPair { a: &ladder.a * phase.conj(), a_dag: &ladder.a_dag * phase }
}

pub fn commutator(x: &CMatrix, y: &CMatrix) -> CMatrix {
    x * y - y * x
}

/// `ħω(a†a + 1/2)`.
pub fn number_hamiltonian(ladder: &LadderPair, omega: f64, hbar: f64) -> CMatrix {
    let d = ladder.a.nrows();
    (&ladder.a_dag * &ladder.a + CMatrix::identity(d, d) * real(0.5)) * real(hbar * omega)
}

/// Basis indices whose every mode occupation is at most `N - 1`.
pub fn faithful_indices(n_max: usize, modes: usize) -> Vec<usize> {
    let d = n_max + 1;
    let total = d.pow(modes as u32);
    (0..total)
        .filter(|&idx| {
            let mut rest = idx;
            (0..modes).all(|_| {
                let occ = rest % d;
                rest /= d;
                occ < n_max
            })
        })
        .collect()
}

/// Sub-matrix on the given basis indices.
pub fn restrict(m: &CMatrix, indices: &[usize]) -> CMatrix {
    CMatrix::from_fn(indices.len(), indices.len(), |r, c| m[(indices[r], indices[c])])
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` in slot `slot` of `modes` factors.
pub fn embed(op: &CMatrix, slot: usize, modes: usize) -> CMatrix {
    let d = op.nrows();
    let identity = CMatrix::identity(d, d);
    let mut out = CMatrix::identity(1, 1);
    for s in 0..modes {
        out = out.kronecker(if s == slot { op } else { &identity });
    }
    out
}

/// Heisenberg ladder operators of every mode, embedded in the tensor space.
fn embedded_ladders(modes: &ModeSet, spec: &FockSpec, t: f64) -> Result<Vec<(Mode, LadderPair)>, FockError> {
    spec.tensor_dimension(modes.len())?;
    let base = build_ladder(spec)?;
    Ok(modes
        .modes()
        .iter()
        .enumerate()
        .map(|(slot, mode)| {
            let evolved = heisenberg_evolve(&base, mode.omega, t);
            let pair =
                LadderPair { a: embed(&evolved.a, slot, modes.len()), a_dag: embed(&evolved.a_dag, slot, modes.len()) };
            (*mode, pair)
        })
        .collect())
}

fn check_position(modes: &ModeSet, z: f64) -> Result<f64, FockError> {
    let length = modes.spec().length;
    if !(0.0..=length).contains(&z) {
        return Err(FockError::Position { z, length });
    }
    Ok(z / length)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldOperators {
    /// x component of Û1.
    pub u1: CMatrix,
    /// y component of Û2.
    pub u2: CMatrix,
}

fn field_operators_at(ladders: &[(Mode, LadderPair)], volume: f64, hbar: f64, fraction: f64) -> FieldOperators {
    let d = ladders[0].1.a.nrows();
    let mut u1 = CMatrix::zeros(d, d);
    let mut u2 = CMatrix::zeros(d, d);
    for (mode, l) in ladders {
        let c = (hbar * mode.omega / volume).sqrt();
        let x = mode.index as f64 * fraction;
        u1 += (&l.a_dag + &l.a) * real(c * sin_pi(x));
        u2 += (&l.a_dag - &l.a) * (I * c * cos_pi(x));
    }
    FieldOperators { u1, u2 }
}

/// `Û1 = Σ √(ħω/V)(a† + a) sin(kz)`, `Û2 = i Σ √(ħω/V)(a† - a) cos(kz)` at `(z, t)`.
pub fn field_operators(modes: &ModeSet, spec: &FockSpec, z: f64, t: f64) -> Result<FieldOperators, FockError> {
    let fraction = check_position(modes, z)?;
    let ladders = embedded_ladders(modes, spec, t)?;
    Ok(field_operators_at(&ladders, modes.spec().volume, spec.hbar, fraction))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorResidual {
    /// max over z of ‖∇×Û1 + ∂Û2/∂t‖_F on the faithful block.
    pub curl_u1: f64,
    /// max over z of ‖∇×Û2 - ∂Û1/∂t‖_F on the faithful block.
    pub curl_u2: f64,
}

/// Field-equation residual of the operator fields, with analytic spatial
/// derivatives of the mode functions and time derivatives from the Heisenberg phases.
pub fn operator_field_equation_residual(
    modes: &ModeSet,
    spec: &FockSpec,
    grid: &GridSpec,
    t: f64,
) -> Result<OperatorResidual, FockError> {
    let length = modes.spec().length;
    let e = grid.extents();
    if grid.is_active(0) || grid.is_active(1) || (e[AXIS_Z] - length).abs() > 1e-12 * length {
        return Err(FockError::Position { z: e[AXIS_Z], length });
    }
    let ladders = embedded_ladders(modes, spec, t)?;
    let faithful = faithful_indices(spec.n_max, modes.len());
    let volume = modes.spec().volume;
    let d = ladders[0].1.a.nrows();

    let mut worst = OperatorResidual { curl_u1: 0.0, curl_u2: 0.0 };
    for i in 0..grid.points()[AXIS_Z] {
        let s = grid.fraction(AXIS_Z, i);
        let mut eq1 = CMatrix::zeros(d, d);
        let mut eq2 = CMatrix::zeros(d, d);
        for (mode, l) in &ladders {
            let c = (spec.hbar * mode.omega / volume).sqrt();
            let x = mode.index as f64 * s;
            let (sin, cos) = (sin_pi(x), cos_pi(x));
            let sum = &l.a_dag + &l.a;
            let diff = &l.a_dag - &l.a;
            // d/dt a† = iω a†, d/dt a = -iω a
            let d_sum = (&l.a_dag - &l.a) * (I * mode.omega);
            let d_diff = (&l.a_dag + &l.a) * (I * mode.omega);
            // (∇×Û1)_y = ∂z Û1x ; (∇×Û2)_x = -∂z Û2y
            let curl1 = &sum * real(c * mode.k * cos);
            let curl2 = &diff * (I * c * mode.k * sin);
            let du1 = d_sum * real(c * sin);
            let du2 = d_diff * (I * c * cos);
            eq1 += curl1 + du2;
            eq2 += curl2 - du1;
        }
        worst.curl_u1 = worst.curl_u1.max(restrict(&eq1, &faithful).norm());
        worst.curl_u2 = worst.curl_u2.max(restrict(&eq2, &faithful).norm());
    }
    Ok(worst)
}

/// Truncated coherent state `Σ γⁿ/√n! |n⟩`, renormalized on the truncated basis.
pub fn coherent_state(gamma: Complex64, n_max: usize) -> CVector {
    let mut v = CVector::zeros(n_max + 1);
    v[0] = real(1.0);
    for n in 1..=n_max {
        v[n] = v[n - 1] * gamma / (n as f64).sqrt();
    }
    let norm = v.norm();
    v / real(norm)
}

pub fn expectation(state: &CVector, op: &CMatrix) -> Complex64 {
    state.dotc(&(op * state))
}

/// Classical state whose first-solution field equals `⟨γ|Û|γ⟩` at `t = 0`:
/// `q = √(2ħ/mω) Re γ`, `p = √(2ħmω) Im γ`.
pub fn coherent_classical_state(gamma: Complex64, mode: &Mode, hbar: f64) -> ModeState {
    let q = (2.0 * hbar / (mode.mass * mode.omega)).sqrt() * gamma.re;
    let p = (2.0 * hbar * mode.mass * mode.omega).sqrt() * gamma.im;
    ModeState::from_canonical(q, p, mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectationSample {
    pub z: f64,
    pub t: f64,
    pub u1: f64,
    pub u2: f64,
}

/// `⟨ψ|Û1|ψ⟩`, `⟨ψ|Û2|ψ⟩` over every `(z, t)` pair, z-major.
pub fn expectation_scan(
    modes: &ModeSet,
    spec: &FockSpec,
    state: &CVector,
    zs: &[f64],
    ts: &[f64],
) -> Result<Vec<ExpectationSample>, FockError> {
    let mut out = Vec::with_capacity(zs.len() * ts.len());
    let fractions = zs.iter().map(|&z| check_position(modes, z)).collect::<Result<Vec<_>, _>>()?;
    let per_time = ts.iter().map(|&t| embedded_ladders(modes, spec, t)).collect::<Result<Vec<_>, _>>()?;
    for (&z, &s) in zs.iter().zip(&fractions) {
        for (&t, ladders) in ts.iter().zip(&per_time) {
            let ops = field_operators_at(ladders, modes.spec().volume, spec.hbar, s);
            out.push(ExpectationSample {
                z,
                t,
                u1: expectation(state, &ops.u1).re,
                u2: expectation(state, &ops.u2).re,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorLabel {
    pub operator: String,
    pub mode: usize,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSnapshot {
    pub matrix: CMatrix,
    pub label: OperatorLabel,
}

#[derive(Serialize)]
struct SnapshotJson<'a> {
    label: &'a OperatorLabel,
    dimension: usize,
    /// Row-major `[re, im]` pairs.
    data: Vec<[f64; 2]>,
}

impl OperatorSnapshot {
    pub fn to_json(&self) -> serde_json::Value {
        let n = self.matrix.nrows();
        let data = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| {
                let z = self.matrix[(r, c)];
                [z.re, z.im]
            })
            .collect();
        serde_json::to_value(SnapshotJson { label: &self.label, dimension: n, data }).expect("snapshot serializes")
    }
}
