//! Phonon-exchange effective electron-electron coupling
//! `V = ħω|M|² / [(ε_k − ε_{k+q})² − (ħω)²]` over toy bands, and the window
//! `|Δε| < ħω` where it is attractive.

use std::f64::consts::TAU;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::PairingError;

pub const DEFAULT_POLE_GUARD: f64 = 1e-6;
/// Absolute tolerance for table lookups.
pub const TABLE_TOLERANCE: f64 = 1e-12;

/// Electron band measured from the Fermi level.
#[derive(Debug, Clone, PartialEq)]
pub enum BandModel {
    /// `-2t cos k - μ`
    TightBinding { hopping: f64, mu: f64 },
    /// `k²/2m* - μ`
    Parabolic { mass: f64, mu: f64 },
    /// Exact lookup on tabulated `(k, ε)` pairs; k compared modulo 2π.
    Table { k: Vec<f64>, energy: Vec<f64> },
}

/// Maps k into `(0, 2π]`, the range of the lattice k-grid.
pub fn wrap_k(k: f64) -> f64 {
    let w = k.rem_euclid(TAU);
    if w <= TABLE_TOLERANCE {
        TAU
    } else {
        w
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

impl BandModel {
    pub fn tight_binding(hopping: f64, mu: f64) -> Result<Self, PairingError> {
        check_finite("t", hopping)?;
        check_finite("mu", mu)?;
        Ok(Self::TightBinding { hopping, mu })
    }

    pub fn parabolic(mass: f64, mu: f64) -> Result<Self, PairingError> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(PairingError::InvalidParameter { name: "m", value: mass });
        }
        check_finite("mu", mu)?;
        Ok(Self::Parabolic { mass, mu })
    }

    pub fn table(k: Vec<f64>, energy: Vec<f64>) -> Result<Self, PairingError> {
        if k.is_empty() {
            return Err(PairingError::EmptyGrid("band table"));
        }
        if k.len() != energy.len() {
            return Err(PairingError::BandSpec(format!("{} k values but {} energies", k.len(), energy.len())));
        }
        if let Some(bad) = k.iter().chain(&energy).find(|v| !v.is_finite()) {
            return Err(PairingError::BandSpec(format!("non-finite table entry {bad}")));
        }
        Ok(Self::Table { k, energy })
    }

    /// Reads headerless `k,energy` rows.
    pub fn read_table_csv<R: Read>(reader: R) -> Result<Self, PairingError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let (mut ks, mut es) = (Vec::new(), Vec::new());
        for record in rdr.records() {
            let record = record.map_err(|e| PairingError::BandSpec(e.to_string()))?;
            if record.len() != 2 {
                return Err(PairingError::BandSpec(format!("expected 2 columns, found {}", record.len())));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| PairingError::BandSpec(format!("{s:?}: {e}")));
            ks.push(parse(&record[0])?);
            es.push(parse(&record[1])?);
        }
        Self::table(ks, es)
    }

    pub fn energy(&self, k: f64) -> Result<f64, PairingError> {
        match self {
            Self::TightBinding { hopping, mu } => Ok(-2.0 * hopping * k.cos() - mu),
            Self::Parabolic { mass, mu } => Ok(k * k / (2.0 * mass) - mu),
            Self::Table { k: ks, energy } => ks
                .iter()
                .position(|&t| circular_distance(t, k) <= TABLE_TOLERANCE)
                .map(|i| energy[i])
                .ok_or(PairingError::OffGrid(k)),
        }
    }
}

fn check_finite(name: &'static str, value: f64) -> Result<(), PairingError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(PairingError::InvalidParameter { name, value })
    }
}

/// Parses `tightbinding:t=1,mu=0` or `parabolic:m=1,mu=0`. Omitted keys
/// default to `t = 1`, `m = 1`, `mu = 0`.
impl FromStr for BandModel {
    type Err = PairingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, params) = s.split_once(':').unwrap_or((s, ""));
        let mut values = std::collections::BTreeMap::new();
        for pair in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| PairingError::BandSpec(format!("expected key=value, got {pair:?}")))?;
            let value: f64 =
                value.trim().parse().map_err(|_| PairingError::BandSpec(format!("bad number in {pair:?}")))?;
            values.insert(key.trim().to_ascii_lowercase(), value);
        }
        let allowed: &[&str] = match kind.trim().to_ascii_lowercase().as_str() {
            "tightbinding" | "tight-binding" | "tb" => &["t", "mu"],
            "parabolic" => &["m", "mu"],
            other => return Err(PairingError::BandSpec(format!("unknown band kind {other:?}"))),
        };
        if let Some(key) = values.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(PairingError::BandSpec(format!("unknown key {key:?}")));
        }
        let mu = values.get("mu").copied().unwrap_or(0.0);
        if allowed[0] == "t" {
            Self::tight_binding(values.get("t").copied().unwrap_or(1.0), mu)
        } else {
            Self::parabolic(values.get("m").copied().unwrap_or(1.0), mu)
        }
    }
}

impl fmt::Display for BandModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TightBinding { hopping, mu } => write!(f, "tightbinding:t={hopping},mu={mu}"),
            Self::Parabolic { mass, mu } => write!(f, "parabolic:m={mass},mu={mu}"),
            Self::Table { k, .. } => write!(f, "table:{} points", k.len()),
        }
    }
}

pub fn band_energy(k: f64, band: &BandModel) -> Result<f64, PairingError> {
    band.energy(k)
}

/// Effective coupling for one `(k, q)` pair. Errors with the offending tuple
/// when `|(Δε)² − (ħω)²| < pole_guard·(ħω)²`.
pub fn effective_interaction(
    eps_k: f64,
    eps_kq: f64,
    hbar_omega: f64,
    m2: f64,
    pole_guard: f64,
) -> Result<f64, PairingError> {
    if !(hbar_omega.is_finite() && hbar_omega > 0.0) {
        return Err(PairingError::InvalidParameter { name: "hbar_omega", value: hbar_omega });
    }
    if !(m2.is_finite() && m2 >= 0.0) {
        return Err(PairingError::InvalidParameter { name: "m2", value: m2 });
    }
    if !(pole_guard.is_finite() && pole_guard >= 0.0) {
        return Err(PairingError::InvalidParameter { name: "pole_guard", value: pole_guard });
    }
    let delta = eps_k - eps_kq;
    let hw2 = hbar_omega * hbar_omega;
    let denom = delta * delta - hw2;
    if denom.abs() < pole_guard * hw2 || denom == 0.0 {
        return Err(PairingError::Pole { eps_k, eps_kq, hbar_omega });
    }
    Ok(hbar_omega * m2 / denom)
}

/// One phonon wavevector with its energy and coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononSample {
    pub q: f64,
    pub hbar_omega: f64,
    pub m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionEntry {
    pub k: f64,
    /// `k + q` folded into `(0, 2π]`; the band is evaluated here.
    pub kprime: f64,
    pub q: f64,
    pub delta_eps: f64,
    /// `None` inside the pole guard.
    pub v_eff: Option<f64>,
    pub attractive: bool,
    pub pole_flag: bool,
}

/// Every `(k, q)` pair, in k-major order.
pub fn interaction_scan(
    band: &BandModel,
    kgrid: &[f64],
    phonons: &[PhononSample],
    pole_guard: f64,
) -> Result<Vec<InteractionEntry>, PairingError> {
    if kgrid.is_empty() {
        return Err(PairingError::EmptyGrid("k-grid"));
    }
    if phonons.is_empty() {
        return Err(PairingError::EmptyGrid("q-grid"));
    }
    let rows: Vec<Vec<InteractionEntry>> = kgrid
        .par_iter()
        .map(|&k| {
            let eps_k = band.energy(k)?;
            phonons
                .iter()
                .map(|ph| {
                    let kprime = wrap_k(k + ph.q);
                    let eps_kq = band.energy(kprime)?;
                    let delta_eps = eps_k - eps_kq;
                    let (v_eff, pole_flag) =
                        match effective_interaction(eps_k, eps_kq, ph.hbar_omega, ph.m2, pole_guard) {
                            Ok(v) => (Some(v), false),
                            Err(PairingError::Pole { .. }) => (None, true),
                            Err(e) => return Err(e),
                        };
                    Ok(InteractionEntry {
                        k,
                        kprime,
                        q: ph.q,
                        delta_eps,
                        v_eff,
                        attractive: v_eff.is_some_and(|v| v < 0.0),
                        pole_flag,
                    })
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(rows.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingSummary {
    pub scanned: usize,
    pub kept: usize,
    pub attractive: usize,
    pub pole_hits: usize,
    pub attractive_fraction: f64,
    pub min_v_eff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingReport {
    /// Entries with `|Δε| ≤ ρ·ħω`, most attractive first.
    pub entries: Vec<InteractionEntry>,
    pub summary: PairingSummary,
}

/// Scans all pairs and keeps the strongly attractive ones, `|Δε| ≤ ρ·ħω`.
pub fn attractive_channels(
    band: &BandModel,
    kgrid: &[f64],
    phonons: &[PhononSample],
    rho: f64,
    pole_guard: f64,
) -> Result<PairingReport, PairingError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(PairingError::Ratio(rho));
    }
    let scan = interaction_scan(band, kgrid, phonons, pole_guard)?;
    let scanned = scan.len();
    let attractive = scan.iter().filter(|e| e.attractive).count();
    let pole_hits = scan.iter().filter(|e| e.pole_flag).count();
    let mut entries: Vec<InteractionEntry> = scan
        .into_iter()
        .enumerate()
        .filter(|(i, e)| e.delta_eps.abs() <= rho * phonons[i % phonons.len()].hbar_omega)
        .map(|(_, e)| e)
        .collect();
    entries.sort_by(|a, b| {
        let va = a.v_eff.unwrap_or(f64::INFINITY);
        let vb = b.v_eff.unwrap_or(f64::INFINITY);
        va.total_cmp(&vb).then(a.k.total_cmp(&b.k)).then(a.q.total_cmp(&b.q))
    });
    let min_v_eff = entries.first().and_then(|e| e.v_eff);
    Ok(PairingReport {
        summary: PairingSummary {
            scanned,
            kept: entries.len(),
            attractive,
            pole_hits,
            attractive_fraction: attractive as f64 / scanned as f64,
            min_v_eff,
        },
        entries,
    })
}
