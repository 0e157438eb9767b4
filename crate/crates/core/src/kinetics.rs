//! Golden-rule electron-phonon rates, quasi-momentum matching with
//! reciprocal vectors `b = 2πn` (lattice constant 1), and the search for
//! momentum- and energy-conserving channels between a lattice k-grid and a
//! phonon (lattice or cavity) k-grid.
//!
//! Exact grids carry k/π as [`Surd`] values so commensurability is decided
//! without rounding.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::cavity::CavitySpec;
use crate::error::KineticsError;
use crate::pairing::BandModel;
use crate::surd::{Rational, Surd};

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const DEFAULT_TUPLE_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaKind {
    Gaussian,
    Lorentzian,
}

impl FromStr for DeltaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Self::Gaussian),
            "lorentzian" => Ok(Self::Lorentzian),
            other => Err(format!("unknown broadening {other:?}")),
        }
    }
}

/// Unit-weight regularization of δ(E).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BroadenedDelta {
    kind: DeltaKind,
    width: f64,
}

impl BroadenedDelta {
    pub fn new(kind: DeltaKind, width: f64) -> Result<Self, KineticsError> {
        if !(width.is_finite() && width > 0.0) {
            return Err(KineticsError::Width(width));
        }
        Ok(Self { kind, width })
    }

    /// Gaussian with σ = 0.01·max ħω.
    pub fn default_for(max_hbar_omega: f64) -> Result<Self, KineticsError> {
        Self::new(DeltaKind::Gaussian, 0.01 * max_hbar_omega)
    }

    pub fn kind(&self) -> DeltaKind {
        self.kind
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = self.width;
        match self.kind {
            DeltaKind::Gaussian => (-0.5 * (x / s).powi(2)).exp() / (s * TAU.sqrt()),
            DeltaKind::Lorentzian => s / (PI * (x * x + s * s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OccupationModel {
    Fixed(f64),
    /// Bose-Einstein at temperature T (k_B = 1).
    Thermal(f64),
}

impl OccupationModel {
    pub fn occupation(&self, hbar_omega: f64) -> Result<f64, KineticsError> {
        match *self {
            Self::Fixed(n) if n.is_finite() && n >= 0.0 => Ok(n),
            Self::Fixed(n) => Err(KineticsError::Occupation(n)),
            Self::Thermal(t) => {
                if !(t.is_finite() && t > 0.0) {
                    return Err(KineticsError::InvalidParameter { name: "temperature", value: t });
                }
                if !(hbar_omega.is_finite() && hbar_omega > 0.0) {
                    return Err(KineticsError::InvalidParameter { name: "hbar_omega", value: hbar_omega });
                }
                Ok(1.0 / (hbar_omega / t).exp_m1())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Emission,
    Absorption,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Emission, Branch::Absorption];

    /// Upper sign (+1) for emission.
    pub fn sign(self) -> f64 {
        match self {
            Self::Emission => 1.0,
            Self::Absorption => -1.0,
        }
    }

    /// `N + 1` for emission, `N` for absorption.
    pub fn occupation_factor(self, n: f64) -> f64 {
        match self {
            Self::Emission => n + 1.0,
            Self::Absorption => n,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Emission => "emission",
            Self::Absorption => "absorption",
        })
    }
}

/// One electron transition `k_l → k_m` with a phonon of energy ħω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub e_l: f64,
    pub e_m: f64,
    pub hbar_omega: f64,
    pub occupation: f64,
    pub branch: Branch,
}

/// `W = (2π/ħ)|M|² δ_σ(E_l − E_m ∓ ħω)·(N + ½ ± ½)`.
pub fn scattering_rate(tr: &Transition, m2: f64, hbar: f64, delta: &BroadenedDelta) -> Result<f64, KineticsError> {
    if !(tr.occupation.is_finite() && tr.occupation >= 0.0) {
        return Err(KineticsError::Occupation(tr.occupation));
    }
    if !(m2.is_finite() && m2 >= 0.0) {
        return Err(KineticsError::InvalidParameter { name: "m2", value: m2 });
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(KineticsError::InvalidParameter { name: "hbar", value: hbar });
    }
    let detuning = tr.e_l - tr.e_m - tr.branch.sign() * tr.hbar_omega;
    Ok(TAU / hbar * m2 * delta.eval(detuning) * tr.branch.occupation_factor(tr.occupation))
}

/// Phonon ω(q).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhononDispersion {
    Constant(f64),
    /// `c|q|`
    Linear {
        speed: f64,
    },
    /// `2√(α/m)|sin(q/2)|`
    Chain {
        spring: f64,
        mass: f64,
    },
}

impl PhononDispersion {
    pub fn omega(&self, q: f64) -> f64 {
        match *self {
            Self::Constant(w) => w,
            Self::Linear { speed } => speed * q.abs(),
            Self::Chain { spring, mass } => 2.0 * (spring / mass).sqrt() * (q / 2.0).sin().abs(),
        }
    }
}

/// Parses `constant:w=0.5`, `linear:c=0.1` or `chain:alpha=1,m=1`.
impl FromStr for PhononDispersion {
    type Err = KineticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = KineticsError::Dispersion;
        let (kind, params) = s.split_once(':').unwrap_or((s, ""));
        let mut get = std::collections::BTreeMap::new();
        for pair in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {pair:?}")))?;
            let v: f64 = v.trim().parse().map_err(|_| bad(format!("bad number in {pair:?}")))?;
            get.insert(k.trim().to_ascii_lowercase(), v);
        }
        let positive = |name: &'static str, default: f64| -> Result<f64, KineticsError> {
            let v = get.get(name).copied().unwrap_or(default);
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(KineticsError::InvalidParameter { name, value: v })
            }
        };
        let (dispersion, keys): (Self, &[&str]) = match kind.trim().to_ascii_lowercase().as_str() {
            "constant" => (Self::Constant(positive("w", 0.0)?), &["w"]),
            "linear" => (Self::Linear { speed: positive("c", 1.0)? }, &["c"]),
            "chain" => {
                let mass = positive("m", 1.0)?;
                if mass == 0.0 {
                    return Err(KineticsError::InvalidParameter { name: "m", value: mass });
                }
                (Self::Chain { spring: positive("alpha", 1.0)?, mass }, &["alpha", "m"])
            }
            other => return Err(bad(format!("unknown kind {other:?}"))),
        };
        if let Some(key) = get.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(bad(format!("unknown key {key:?}")));
        }
        Ok(dispersion)
    }
}

/// k values in inverse lattice units, optionally with exact k/π.
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    values: Vec<f64>,
    exact: Option<Vec<Surd>>,
}

impl KGrid {
    pub fn float(values: Vec<f64>) -> Self {
        Self { values, exact: None }
    }

    /// From exact k/π values.
    pub fn exact(over_pi: Vec<Surd>) -> Self {
        Self { values: over_pi.iter().map(|s| s.to_f64() * PI).collect(), exact: Some(over_pi) }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exact_values(&self) -> Option<&[Surd]> {
        self.exact.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `k_n = 2πn/N'`, `n = 1..=N'`, exact.
pub fn lattice_kgrid_exact(atoms: usize) -> KGrid {
    KGrid::exact((1..=atoms).map(|n| Surd::from_rational(Rational::new(2 * n as i128, atoms as i128))).collect())
}

/// `k_α = απa/L`, `α = 1..=M`.
pub fn cavity_kgrid(spec: &CavitySpec, modes: usize, lattice_constant: f64) -> Result<Vec<f64>, KineticsError> {
    if !(lattice_constant.is_finite() && lattice_constant > 0.0) {
        return Err(KineticsError::InvalidParameter { name: "lattice_constant", value: lattice_constant });
    }
    if !(spec.length.is_finite() && spec.length > 0.0) {
        return Err(KineticsError::InvalidParameter { name: "length", value: spec.length });
    }
    Ok((1..=modes).map(|a| a as f64 * PI * lattice_constant / spec.length).collect())
}

/// Exact cavity grid from `L/a`.
pub fn cavity_kgrid_exact(length_over_a: &Surd, modes: usize) -> Result<KGrid, KineticsError> {
    if length_over_a.signum() != std::cmp::Ordering::Greater {
        return Err(KineticsError::Exact(format!("L/a = {length_over_a} must be positive")));
    }
    let inv = length_over_a.checked_recip().ok_or_else(|| KineticsError::Exact("overflow in a/L".into()))?;
    let values = (1..=modes)
        .map(|a| {
            inv.checked_scale(Rational::from_integer(a as i128)).ok_or_else(|| KineticsError::Exact("overflow".into()))
        })
        .collect::<Result<_, _>>()?;
    Ok(KGrid::exact(values))
}

/// Search parameters shared by every tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSearch {
    pub band: BandModel,
    pub dispersion: PhononDispersion,
    pub delta: BroadenedDelta,
    pub occupation: OccupationModel,
    pub m2: f64,
    pub hbar: f64,
    pub b_max: u32,
    pub energy_tol: f64,
    /// Used only when either grid lacks exact values.
    pub momentum_tol: f64,
    pub tuple_cap: u128,
}

impl ChannelSearch {
    pub fn new(band: BandModel, dispersion: PhononDispersion, delta: BroadenedDelta) -> Self {
        Self {
            band,
            dispersion,
            delta,
            occupation: OccupationModel::Fixed(0.0),
            m2: 1.0,
            hbar: 1.0,
            b_max: 1,
            energy_tol: 3.0 * delta.width(),
            momentum_tol: 1e-9,
            tuple_cap: DEFAULT_TUPLE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringChannel {
    pub l: usize,
    pub m: usize,
    pub j: usize,
    pub k_l: f64,
    pub k_m: f64,
    pub q: f64,
    /// b / 2π
    pub b_index: i64,
    pub b: f64,
    pub branch: Branch,
    pub e_l: f64,
    pub e_m: f64,
    pub hbar_omega: f64,
    pub rate: f64,
}

/// Size of the brute-force tuple space `(l, m, j, b, branch)`.
pub fn tuple_count(lattice: usize, phonon: usize, b_max: u32) -> u128 {
    lattice as u128 * lattice as u128 * phonon as u128 * (2 * b_max as u128 + 1) * 2
}

/// Brute force over `(l, m, j, b, branch)`. A channel is kept when
/// `k_l − k_m ∓ q_j = b` (exactly when both grids are exact, within
/// `momentum_tol` otherwise) and `|E_l − E_m ∓ ħω| ≤ energy_tol`.
/// Output is ordered by `(l, m, j, b, branch)`.
pub fn enumerate_channels(
    lattice: &KGrid,
    phonon: &KGrid,
    search: &ChannelSearch,
) -> Result<Vec<ScatteringChannel>, KineticsError> {
    let tuples = tuple_count(lattice.len(), phonon.len(), search.b_max);
    if tuples > search.tuple_cap {
        return Err(KineticsError::TupleCap { tuples, cap: search.tuple_cap });
    }
    if !(search.energy_tol.is_finite() && search.energy_tol >= 0.0) {
        return Err(KineticsError::InvalidParameter { name: "energy_tol", value: search.energy_tol });
    }
    if !(search.momentum_tol.is_finite() && search.momentum_tol >= 0.0) {
        return Err(KineticsError::InvalidParameter { name: "momentum_tol", value: search.momentum_tol });
    }
    if lattice.is_empty() || phonon.is_empty() {
        return Ok(Vec::new());
    }
    let energies: Vec<f64> = lattice.values.iter().map(|&k| search.band.energy(k)).collect::<Result<_, _>>()?;
    let phonon_data: Vec<(f64, f64)> = phonon
        .values
        .iter()
        .map(|&q| {
            let hw = search.hbar * search.dispersion.omega(q);
            search.occupation.occupation(hw).map(|n| (hw, n))
        })
        .collect::<Result<_, _>>()?;
    let exact = lattice.exact.as_deref().zip(phonon.exact.as_deref());
    let b_max = search.b_max as i64;

    let per_l: Vec<Vec<ScatteringChannel>> = (0..lattice.len())
        .into_par_iter()
        .map(|l| {
            let mut out = Vec::new();
            for m in 0..lattice.len() {
                for j in 0..phonon.len() {
                    let (hbar_omega, occupation) = phonon_data[j];
                    for b_index in -b_max..=b_max {
                        for branch in Branch::BOTH {
                            let matched = match exact {
                                Some((lk, pk)) => exact_match(&lk[l], &lk[m], &pk[j], branch, b_index)?,
                                None => {
                                    let b = TAU * b_index as f64;
                                    let mismatch =
                                        lattice.values[l] - lattice.values[m] - branch.sign() * phonon.values[j] - b;
                                    mismatch.abs() <= search.momentum_tol
                                }
                            };
                            if !matched {
                                continue;
                            }
                            let (e_l, e_m) = (energies[l], energies[m]);
                            if (e_l - e_m - branch.sign() * hbar_omega).abs() > search.energy_tol {
                                continue;
                            }
                            let tr = Transition { e_l, e_m, hbar_omega, occupation, branch };
                            out.push(ScatteringChannel {
                                l,
                                m,
                                j,
                                k_l: lattice.values[l],
                                k_m: lattice.values[m],
                                q: phonon.values[j],
                                b_index,
                                b: TAU * b_index as f64,
                                branch,
                                e_l,
                                e_m,
                                hbar_omega,
                                rate: scattering_rate(&tr, search.m2, search.hbar, &search.delta)?,
                            });
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_, KineticsError>>()?;
    Ok(per_l.into_iter().flatten().collect())
}

/// `k_l/π − k_m/π ∓ q/π − 2b == 0` in exact arithmetic.
fn exact_match(kl: &Surd, km: &Surd, q: &Surd, branch: Branch, b_index: i64) -> Result<bool, KineticsError> {
    let overflow = || KineticsError::Exact("overflow in momentum balance".into());
    let diff = kl.checked_sub(km).ok_or_else(overflow)?;
    let diff = match branch {
        Branch::Emission => diff.checked_sub(q),
        Branch::Absorption => diff.checked_add(q),
    };
    // mismatched radicands cannot cancel
    let Some(diff) = diff else { return Ok(false) };
    let b = Surd::integer(2 * b_index as i128);
    Ok(diff.checked_sub(&b).ok_or_else(overflow)?.is_zero())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSummary {
    pub tuples: u128,
    pub channels: usize,
    pub emission: usize,
    pub absorption: usize,
    /// b = 0
    pub normal: usize,
    /// b ≠ 0
    pub umklapp: usize,
    pub total_rate: f64,
}

pub fn summarize(channels: &[ScatteringChannel], tuples: u128) -> ChannelSummary {
    let emission = channels.iter().filter(|c| c.branch == Branch::Emission).count();
    let normal = channels.iter().filter(|c| c.b_index == 0).count();
    ChannelSummary {
        tuples,
        channels: channels.len(),
        emission,
        absorption: channels.len() - emission,
        normal,
        umklapp: channels.len() - normal,
        total_rate: channels.iter().map(|c| c.rate).fold(0.0, |acc, r| acc + r),
    }
}

/// Photons per second carried by `power` watts at `frequency` hertz.
pub fn photon_flux(power: f64, frequency: f64) -> Result<f64, KineticsError> {
    if !(power.is_finite() && power > 0.0) {
        return Err(KineticsError::InvalidParameter { name: "power", value: power });
    }
    if !(frequency.is_finite() && frequency > 0.0) {
        return Err(KineticsError::InvalidParameter { name: "frequency", value: frequency });
    }
    Ok(power / (PLANCK * frequency))
}
