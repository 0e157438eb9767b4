//! Self-check suite: every invariant the toolkit promises, evaluated against
//! independent oracles with fixed tolerances. Output is a pure function of
//! the seed and the `quick` flag, so reports are byte-reproducible.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cavity::{
    field_energy, integrated_coordinates, modal_energy, mode_spectrum, oscillator_evolve, synthesize_first_solution,
    unit_mass_spectrum, CavitySpec, ModeSet, ModeState,
};
use crate::duality::{complex_invariant, dual_rotate, energy_density, DualAngle};
use crate::error::ExportError;
use crate::field_kernel::maxwell_form_residual;
use crate::fock::{
    build_ladder, coherent_classical_state, coherent_state, commutator, expectation_scan, faithful_indices,
    heisenberg_evolve, number_hamiltonian, operator_field_equation_residual, restrict, CMatrix, FockSpec,
    OscillatorParams,
};
use crate::grid::{GridSpec, VectorField, VectorFieldPair};
use crate::kinetics::{
    cavity_kgrid_exact, enumerate_channels, lattice_kgrid_exact, photon_flux, scattering_rate, Branch, BroadenedDelta,
    ChannelSearch, DeltaKind, PhononDispersion, Transition,
};
use crate::lattice::{normal_modes, ChainSpec};
use crate::pairing::{attractive_channels, interaction_scan, BandModel, PhononSample, DEFAULT_POLE_GUARD};
use crate::surd::Surd;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub quick: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn at_most(check: &str, value: f64, tolerance: f64) -> Self {
        Self { check: check.into(), passed: value <= tolerance, value, tolerance, detail: "value <= tolerance".into() }
    }

    fn within(check: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            check: check.into(),
            passed: (lo..=hi).contains(&value),
            value,
            tolerance: hi,
            detail: format!("value in [{lo}, {hi}]"),
        }
    }

    fn equal(check: &str, value: usize, expected: usize) -> Self {
        Self {
            check: check.into(),
            passed: value == expected,
            value: value as f64,
            tolerance: 0.0,
            detail: format!("count {value}, oracle {expected}"),
        }
    }

    fn failed(check: &str, error: impl std::fmt::Display) -> Self {
        Self { check: check.into(), passed: false, value: f64::NAN, tolerance: f64::NAN, detail: error.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub quick: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ExportError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["check", "status", "value", "tolerance", "detail"])?;
        for c in &self.checks {
            w.write_record([
                c.check.as_str(),
                if c.passed { "pass" } else { "fail" },
                &format!("{:.6e}", c.value),
                &format!("{:.3e}", c.tolerance),
                &c.detail,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Fixed-width pass/fail table.
    pub fn write_table<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let width = self.checks.iter().map(|c| c.check.len()).max().unwrap_or(5).max(5);
        writeln!(w, "{:<width$}  {:<6}  {:>13}  {:>10}", "check", "status", "value", "tolerance")?;
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            writeln!(w, "{:<width$}  {:<6}  {:>13.6e}  {:>10.3e}", c.check, status, c.value, c.tolerance)?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        writeln!(w, "{} checks, {} failed", self.checks.len(), failed)
    }
}

pub fn run_suite(config: VerifyConfig) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut checks = Vec::new();
    checks.extend(flux_checks());
    checks.extend(maxwell_checks(&mut rng));
    checks.extend(energy_checks(&mut rng));
    checks.extend(duality_checks(&mut rng, if config.quick { 20 } else { 100 }));
    checks.extend(second_solution_checks(&mut rng));
    checks.extend(fock_checks());
    checks.extend(operator_checks());
    checks.extend(lattice_checks(if config.quick { &[16][..] } else { &[16, 64][..] }));
    checks.extend(commensurability_checks());
    checks.extend(scattering_checks());
    checks.extend(pairing_checks());
    VerifyReport { seed: config.seed, quick: config.quick, checks }
}

fn random_states(rng: &mut ChaCha8Rng, set: &ModeSet) -> Vec<ModeState> {
    set.modes()
        .iter()
        .map(|m| ModeState::from_canonical(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), m))
        .collect()
}

fn pi_cavity(modes: usize) -> ModeSet {
    unit_mass_spectrum(&CavitySpec::new(PI, 2.0, 1.0, modes).expect("valid cavity")).expect("valid spectrum")
}

fn flux_checks() -> Vec<CheckResult> {
    match photon_flux(0.1, 1e10) {
        Ok(flux) => vec![
            CheckResult::at_most(
                "flux.planck_relative_error",
                (flux * 6.626_070_15e-34 * 1e10 / 0.1 - 1.0).abs(),
                1e-12,
            ),
            CheckResult::within("flux.over_1e22", flux / 1e22, 0.5, 2.0),
        ],
        Err(e) => vec![CheckResult::failed("flux", e)],
    }
}

fn maxwell_checks(rng: &mut ChaCha8Rng) -> Vec<CheckResult> {
    let set = pi_cavity(3);
    let states = random_states(rng, &set);
    let residual = |n: usize| -> Result<(f64, f64), String> {
        let grid = GridSpec::line(PI, n).map_err(|e| e.to_string())?;
        let syn = synthesize_first_solution(&set, &states, &grid, 0.37).map_err(|e| e.to_string())?;
        let r = maxwell_form_residual(&syn.fields, &syn.du1_dt, &syn.du2_dt).map_err(|e| e.to_string())?;
        Ok((r.r1_norm, r.r2_norm))
    };
    match (residual(1001), residual(2001)) {
        (Ok(c), Ok(f)) => vec![
            CheckResult::within("maxwell.ratio_r1", c.0 / f.0, 3.5, 4.5),
            CheckResult::within("maxwell.ratio_r2", c.1 / f.1, 3.5, 4.5),
            CheckResult::at_most("maxwell.residual_1e3", c.0.max(c.1), 1e-4),
        ],
        (Err(e), _) | (_, Err(e)) => vec![CheckResult::failed("maxwell", e)],
    }
}

fn energy_checks(rng: &mut ChaCha8Rng) -> Vec<CheckResult> {
    let set = pi_cavity(3);
    let states = random_states(rng, &set);
    let e0 = modal_energy(&states, &set).expect("matching states");
    let horizon = 100.0 * TAU / set.modes()[0].omega;
    let drift = (0..=2000)
        .map(|i| {
            let t = horizon * i as f64 / 2000.0;
            let now: Vec<ModeState> = states.iter().zip(set.modes()).map(|(s, m)| oscillator_evolve(s, m, t)).collect();
            (modal_energy(&now, &set).expect("matching states") - e0).abs() / e0
        })
        .fold(0.0, f64::max);
    let mut out = vec![CheckResult::at_most("energy.modal_drift", drift, 1e-12)];
    let field = GridSpec::line(PI, 10_000)
        .map_err(|e| e.to_string())
        .and_then(|g| synthesize_first_solution(&set, &states, &g, 1.3).map_err(|e| e.to_string()))
        .and_then(|syn| field_energy(&syn.fields, &set).map_err(|e| e.to_string()));
    out.push(match field {
        Ok(f) => CheckResult::at_most("energy.field_vs_modal", (f.energy - e0).abs() / e0, 1e-6),
        Err(e) => CheckResult::failed("energy.field_vs_modal", e),
    });
    out
}

fn duality_checks(rng: &mut ChaCha8Rng, pairs: usize) -> Vec<CheckResult> {
    let grid = GridSpec::line(1.0, 16).expect("valid grid");
    let mut phase_err: f64 = 0.0;
    let mut energy_err: f64 = 0.0;
    for _ in 0..pairs {
        let mut random_field = || {
            let values = (0..grid.len())
                .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            VectorField::new(grid, values).expect("matching shape")
        };
        let pair = VectorFieldPair::new(random_field(), random_field(), 0.0).expect("finite fields");
        let theta = rng.random_range(0.0..TAU);
        let rotated = dual_rotate(&pair, DualAngle::new(theta)).expect("rotation");
        let phase = Complex64::from_polar(1.0, 2.0 * theta);
        for (c0, c1) in complex_invariant(&pair).iter().zip(complex_invariant(&rotated)) {
            phase_err = phase_err.max((phase * c1 - c0).norm());
        }
        for (e0, e1) in energy_density(&pair).iter().zip(energy_density(&rotated)) {
            energy_err = energy_err.max((e0 - e1).abs());
        }
    }
    vec![
        CheckResult::at_most("duality.phase_law", phase_err, 1e-12),
        CheckResult::at_most("duality.energy_density", energy_err, 1e-12),
    ]
}

fn second_solution_checks(rng: &mut ChaCha8Rng) -> Vec<CheckResult> {
    let length = rng.random_range(1.0..5.0);
    let masses: Vec<f64> = (0..20).map(|_| rng.random_range(0.5..2.0)).collect();
    let set = CavitySpec::new(length, 1.0, 1.0, 20).and_then(|s| mode_spectrum(&s, &masses));
    let set = match set {
        Ok(s) => s,
        Err(e) => return vec![CheckResult::failed("second.q2_plus_q", e)],
    };
    let mut worst: f64 = 0.0;
    for mode in set.modes() {
        let state = ModeState::from_amplitude_phase(rng.random_range(-1.0..1.0), 0.0, mode);
        let period = TAU / mode.omega;
        let sum = |t: f64| integrated_coordinates(&state, mode, t).1 + oscillator_evolve(&state, mode, t).q;
        let s0 = sum(0.0);
        for i in 1..=200 {
            worst = worst.max((sum(period * i as f64 / 200.0) - s0).abs());
        }
    }
    vec![CheckResult::at_most("second.q2_plus_q_constant", worst, 1e-12)]
}

fn fock_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut worst: f64 = 0.0;
    for n_max in [2, 8, 32] {
        let spec = FockSpec::new(n_max, 1.0, vec![OscillatorParams { mass: 1.0, omega: 1.0 }]).expect("valid");
        let l = build_ladder(&spec).expect("ladder");
        let block = restrict(&commutator(&l.a, &l.a_dag), &faithful_indices(n_max, 1));
        let id = CMatrix::identity(n_max, n_max);
        worst = worst.max((block - id).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    out.push(CheckResult::at_most("fock.commutator_identity", worst, 1e-12));

    let n_max = 8;
    let spec = FockSpec::new(n_max, 1.0, vec![OscillatorParams { mass: 1.0, omega: 1.3 }]).expect("valid");
    let l = build_ladder(&spec).expect("ladder");
    let h = number_hamiltonian(&l, 1.3, 1.0);
    let i = Complex64::i();
    let mut err: f64 = 0.0;
    for t in [0.4, 1.7, 5.9] {
        let oracle = (&h * (i * t)).exp() * &l.a * (&h * (-i * t)).exp();
        let evolved = heisenberg_evolve(&l, 1.3, t);
        err = err.max(restrict(&(oracle - evolved.a), &faithful_indices(n_max, 1)).norm());
    }
    out.push(CheckResult::at_most("fock.heisenberg_vs_expm", err, 1e-8));
    out
}

fn operator_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut worst: f64 = 0.0;
    for modes in [1, 2] {
        let set = pi_cavity(modes);
        let spec = FockSpec::from_mode_set(&set, 6).expect("valid");
        let grid = GridSpec::line(PI, 33).expect("valid");
        for t in [0.0, 0.8, 2.9] {
            match operator_field_equation_residual(&set, &spec, &grid, t) {
                Ok(r) => worst = worst.max(r.curl_u1).max(r.curl_u2),
                Err(e) => return vec![CheckResult::failed("operator.residual", e)],
            }
        }
    }
    out.push(CheckResult::at_most("operator.residual", worst, 1e-12));

    let set = pi_cavity(1);
    let n_max = 32;
    let spec = FockSpec::from_mode_set(&set, n_max).expect("valid");
    let grid = GridSpec::line(PI, 17).expect("valid");
    let zs: Vec<f64> = (0..grid.len()).map(|i| grid.position(i)[2]).collect();
    let ts = [0.0, 0.7, 1.9, 4.0];
    let mut rel: f64 = 0.0;
    for gamma in [Complex64::from_polar(1.0, 0.3), Complex64::from_polar(8f64.sqrt(), 2.2)] {
        let psi = coherent_state(gamma, n_max);
        let classical = coherent_classical_state(gamma, &set.modes()[0], 1.0);
        let scan = expectation_scan(&set, &spec, &psi, &zs, &ts).expect("scan");
        for (ti, &t) in ts.iter().enumerate() {
            let syn = synthesize_first_solution(&set, &[classical], &grid, t).expect("synthesis");
            let scale = syn
                .fields
                .u1
                .values()
                .iter()
                .zip(syn.fields.u2.values())
                .map(|(a, b)| a[0].abs().max(b[1].abs()))
                .fold(0.0, f64::max);
            for zi in 0..zs.len() {
                let s = scan[zi * ts.len() + ti];
                let du1 = (s.u1 - syn.fields.u1.values()[zi][0]).abs();
                let du2 = (s.u2 - syn.fields.u2.values()[zi][1]).abs();
                rel = rel.max(du1.max(du2) / scale);
            }
        }
    }
    out.push(CheckResult::at_most("operator.coherent_vs_classical", rel, 1e-6));
    out
}

fn lattice_checks(sizes: &[usize]) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for &n in sizes {
        let spec = ChainSpec::new(n, 1.0, 1.0, true).expect("valid chain");
        let modes = match normal_modes(&spec) {
            Ok(m) => m,
            Err(e) => return vec![CheckResult::failed("lattice", e)],
        };
        let by_index = |j: usize| {
            let k = TAU * j as f64 / n as f64;
            modes.iter().find(|m| (m.k - k).abs() < 1e-12).map(|m| m.omega).unwrap_or(f64::NAN)
        };
        let analytic =
            (1..=n).map(|j| (by_index(j) - 2.0 * (PI * j as f64 / n as f64).sin().abs()).abs()).fold(0.0, f64::max);
        let symmetry = (1..n).map(|j| (by_index(j) - by_index(n - j)).abs()).fold(0.0, f64::max);
        out.push(CheckResult::at_most(&format!("lattice.n{n}.analytic"), analytic, 1e-9));
        out.push(CheckResult::at_most(&format!("lattice.n{n}.zero_mode"), by_index(n), 1e-9));
        out.push(CheckResult::at_most(&format!("lattice.n{n}.symmetry"), symmetry, 1e-9));
    }
    out
}

/// Integer oracle: `n_l − n_m ∓ α ≡ 0 (mod N')` with `|b| ≤ b_max`.
fn matched_grid_oracle(n: i64, cavity_modes: i64, b_max: i64) -> usize {
    let mut count = 0;
    for nl in 1..=n {
        for nm in 1..=n {
            for alpha in 1..=cavity_modes {
                for sign in [1, -1] {
                    for b in -b_max..=b_max {
                        count += usize::from(nl - nm - sign * alpha == n * b);
                    }
                }
            }
        }
    }
    count
}

fn commensurability_checks() -> Vec<CheckResult> {
    let delta = BroadenedDelta::new(DeltaKind::Gaussian, 0.01).expect("positive width");
    let mut search =
        ChannelSearch::new(BandModel::TightBinding { hopping: 0.0, mu: 0.0 }, PhononDispersion::Constant(0.0), delta);
    search.energy_tol = 1e-9;
    search.b_max = 1;
    let lattice = lattice_kgrid_exact(8);
    let run = |length: &str| -> Result<usize, String> {
        let l: Surd = length.parse().map_err(|e: crate::surd::ParseSurdError| e.to_string())?;
        let cavity = cavity_kgrid_exact(&l, 8).map_err(|e| e.to_string())?;
        enumerate_channels(&lattice, &cavity, &search).map(|c| c.len()).map_err(|e| e.to_string())
    };
    let mut out = Vec::new();
    match run("4") {
        Ok(count) => {
            out.push(CheckResult::equal("commensurate.matched_vs_oracle", count, matched_grid_oracle(8, 8, 1)))
        }
        Err(e) => out.push(CheckResult::failed("commensurate.matched_vs_oracle", e)),
    }
    match run("4*sqrt(2)") {
        Ok(count) => out.push(CheckResult::equal("commensurate.irrational_zero", count, 0)),
        Err(e) => out.push(CheckResult::failed("commensurate.irrational_zero", e)),
    }
    out
}

fn scattering_checks() -> Vec<CheckResult> {
    let delta = BroadenedDelta::new(DeltaKind::Gaussian, 0.05).expect("positive width");
    let rate = |branch: Branch, n: f64| {
        let e_m = 0.4 - branch.sign() * 0.25;
        let tr = Transition { e_l: 0.4, e_m, hbar_omega: 0.25, occupation: n, branch };
        scattering_rate(&tr, 0.8, 1.0, &delta).expect("valid rate")
    };
    let mut out = vec![CheckResult::at_most("scattering.absorption_at_zero", rate(Branch::Absorption, 0.0), 0.0)];
    let worst = [0.1, 1.0, 10.0]
        .iter()
        .map(|&n| {
            let expected = (n + 1.0) / n;
            ((rate(Branch::Emission, n) / rate(Branch::Absorption, n) - expected) / expected).abs() / f64::EPSILON
        })
        .fold(0.0, f64::max);
    out.push(CheckResult::at_most("scattering.ratio_ulps", worst, 4.0));
    out
}

fn pairing_checks() -> Vec<CheckResult> {
    let band = BandModel::TightBinding { hopping: 1.0, mu: 0.0 };
    let n = 64;
    let kgrid: Vec<f64> = (1..=n).map(|j| TAU * j as f64 / n as f64).collect();
    let hbar_omega = 0.5;
    let phonons: Vec<PhononSample> = kgrid.iter().map(|&q| PhononSample { q, hbar_omega, m2: 1.0 }).collect();
    let scan = match interaction_scan(&band, &kgrid, &phonons, DEFAULT_POLE_GUARD) {
        Ok(s) => s,
        Err(e) => return vec![CheckResult::failed("pairing", e)],
    };
    let misclassified =
        scan.iter().filter(|e| !e.pole_flag && e.attractive != (e.delta_eps.abs() < hbar_omega)).count();
    let mut oracle = 0;
    for &k in &kgrid {
        for &q in &kgrid {
            let d = -2.0 * k.cos() + 2.0 * (k + q).cos();
            oracle += usize::from(d.abs() <= 0.5 * hbar_omega);
        }
    }
    let kept = attractive_channels(&band, &kgrid, &phonons, 0.5, DEFAULT_POLE_GUARD).map(|r| r.summary.kept);
    vec![
        CheckResult::equal("pairing.sign_law_misclassified", misclassified, 0),
        match kept {
            Ok(k) => CheckResult::equal("pairing.kept_vs_oracle", k, oracle),
            Err(e) => CheckResult::failed("pairing.kept_vs_oracle", e),
        },
    ]
}
