//! Acceptance suite. Each criterion is checked against an oracle built in
//! this file, timed, and reported on one PASS/FAIL line. Runs without the
//! libtest harness so the lines are always printed.

use std::f64::consts::{PI, TAU};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phonoscope::cavity::{
    field_energy, integrated_coordinates, modal_energy, mode_spectrum, oscillator_evolve, synthesize_first_solution,
    unit_mass_spectrum, CavitySpec, Mode, ModeSet, ModeState,
};
use phonoscope::duality::{dual_rotate, DualAngle};
use phonoscope::field_kernel::maxwell_form_residual;
use phonoscope::fock::{
    build_ladder, coherent_state, expectation_scan, faithful_indices, field_operators, heisenberg_evolve,
    operator_field_equation_residual, restrict, FockSpec, OscillatorParams,
};
use phonoscope::kinetics::{
    cavity_kgrid_exact, enumerate_channels, lattice_kgrid_exact, photon_flux, scattering_rate, Branch, BroadenedDelta,
    ChannelSearch, DeltaKind, PhononDispersion, Transition,
};
use phonoscope::lattice::{normal_modes, ChainSpec};
use phonoscope::pairing::{attractive_channels, BandModel, PhononSample, DEFAULT_POLE_GUARD};
use phonoscope::surd::Surd;
use phonoscope::{GridSpec, VectorField, VectorFieldPair};

const PLANCK_H: f64 = 6.626_070_15e-34;
const SEED: u64 = 20_240_611;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail }
    }
}

fn run(number: usize, name: &str, budget: Duration, check: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let passed = outcome.passed && in_time;
    println!(
        "{} criterion {number}: {name} ({}; {:.3} ms, budget {:.1} ms)",
        if passed { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed.as_secs_f64() * 1e3,
        budget.as_secs_f64() * 1e3,
    );
    passed
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn random_states(rng: &mut ChaCha8Rng, set: &ModeSet) -> Vec<ModeState> {
    set.modes()
        .iter()
        .map(|m| ModeState::from_canonical(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), m))
        .collect()
}

fn pi_cavity(modes: usize, volume: f64) -> ModeSet {
    unit_mass_spectrum(&CavitySpec::new(PI, volume, 1.0, modes).unwrap()).unwrap()
}

/// `q(t) = q0 cos ωt + (p0/mω) sin ωt`, `p(t) = p0 cos ωt − mω q0 sin ωt`.
fn closed_form(q0: f64, p0: f64, mode: &Mode, t: f64) -> (f64, f64) {
    let (s, c) = (mode.omega * t).sin_cos();
    let mw = mode.mass * mode.omega;
    (q0 * c + p0 / mw * s, p0 * c - mw * q0 * s)
}

fn criterion_1() -> Outcome {
    let flux = photon_flux(0.1, 1e10).unwrap();
    let oracle = 0.1 / (PLANCK_H * 1e10);
    let rel = (flux / oracle - 1.0).abs();
    let round = flux / 1e22;
    Outcome::new(
        rel <= 1e-12 && (0.5..=2.0).contains(&round),
        format!("flux {flux:.3e}, relative error {rel:.1e}, flux/1e22 = {round:.3}"),
    )
}

/// RMS over interior points of `∇×U1 + ∂U2/∂t` and `∇×U2 − ∂U1/∂t` for
/// z-only fields, `∇×F = (−∂z Fy, ∂z Fx, 0)`, by central differences.
fn residual_oracle(u1: &[[f64; 3]], u2: &[[f64; 3]], d1: &[[f64; 3]], d2: &[[f64; 3]], h: f64) -> (f64, f64) {
    let n = u1.len();
    let (mut s1, mut s2) = (0.0, 0.0);
    for i in 1..n - 1 {
        let dz = |f: &[[f64; 3]], c: usize| (f[i + 1][c] - f[i - 1][c]) / (2.0 * h);
        let curl1 = [-dz(u1, 1), dz(u1, 0), 0.0];
        let curl2 = [-dz(u2, 1), dz(u2, 0), 0.0];
        s1 += (0..3).map(|c| (curl1[c] + d2[i][c]).powi(2)).sum::<f64>();
        s2 += (0..3).map(|c| (curl2[c] - d1[i][c]).powi(2)).sum::<f64>();
    }
    let count = (n - 2) as f64;
    ((s1 / count).sqrt(), (s2 / count).sqrt())
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let set = pi_cavity(3, 2.0);
    let states = random_states(&mut rng, &set);
    let t = 0.37;
    let residuals = |n: usize| {
        let grid = GridSpec::line(PI, n).unwrap();
        let syn = synthesize_first_solution(&set, &states, &grid, t).unwrap();
        let h = grid.spacing()[2];
        let oracle = residual_oracle(
            syn.fields.u1.values(),
            syn.fields.u2.values(),
            syn.du1_dt.values(),
            syn.du2_dt.values(),
            h,
        );
        let lib = maxwell_form_residual(&syn.fields, &syn.du1_dt, &syn.du2_dt).unwrap();
        (oracle, (lib.r1_norm, lib.r2_norm))
    };
    let (coarse, coarse_lib) = residuals(1001);
    let (fine, _) = residuals(2001);
    let agree = ((coarse.0 - coarse_lib.0).abs() <= 1e-12 * coarse.0.max(1e-300))
        && ((coarse.1 - coarse_lib.1).abs() <= 1e-12 * coarse.1.max(1e-300));
    let (r1, r2) = (coarse.0 / fine.0, coarse.1 / fine.1);
    let worst = coarse.0.max(coarse.1);
    Outcome::new(
        agree && (3.5..=4.5).contains(&r1) && (3.5..=4.5).contains(&r2) && worst <= 1e-4,
        format!("ratios {r1:.4}, {r2:.4}; residual at 1001 points {worst:.2e}; kernel agrees {agree}"),
    )
}

/// Composite Simpson rule on an odd number of samples.
fn simpson(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    assert!(n % 2 == 1);
    let inner: f64 =
        samples[1..n - 1].iter().enumerate().map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v }).sum();
    h / 3.0 * (samples[0] + inner + samples[n - 1])
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let volume = 2.0;
    let set = pi_cavity(3, volume);
    let states = random_states(&mut rng, &set);
    let oracle_energy = |t: f64| -> f64 {
        states
            .iter()
            .zip(set.modes())
            .map(|(s, m)| {
                let (q, p) = closed_form(s.q, s.p, m, t);
                0.5 * (m.mass * m.omega * m.omega * q * q + p * p / m.mass)
            })
            .sum()
    };
    let e0 = oracle_energy(0.0);
    let horizon = 100.0 * TAU / set.modes()[0].omega;
    let mut drift: f64 = 0.0;
    for i in 0..=1000 {
        let t = horizon * i as f64 / 1000.0;
        let now: Vec<ModeState> = states.iter().zip(set.modes()).map(|(s, m)| oscillator_evolve(s, m, t)).collect();
        drift = drift.max((modal_energy(&now, &set).unwrap() - e0).abs() / e0);
        drift = drift.max((oracle_energy(t) - e0).abs() / e0);
    }

    let n = 10_001;
    let grid = GridSpec::line(PI, n).unwrap();
    let syn = synthesize_first_solution(&set, &states, &grid, 1.3).unwrap();
    let density: Vec<f64> = syn
        .fields
        .u1
        .values()
        .iter()
        .zip(syn.fields.u2.values())
        .map(|(a, b)| a.iter().chain(b).map(|x| x * x).sum())
        .collect();
    let simpson_energy = 0.5 * (volume / PI) * simpson(&density, grid.spacing()[2]);
    let lib_energy = field_energy(&syn.fields, &set).unwrap().energy;
    let field_err = ((simpson_energy - e0).abs() / e0).max((lib_energy - e0).abs() / e0);
    Outcome::new(
        drift <= 1e-12 && field_err <= 1e-6,
        format!("modal drift {drift:.1e} over 100 periods; field vs modal {field_err:.1e} at {n} points"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let grid = GridSpec::line(1.0, 16).unwrap();
    let complex_inv = |a: &[f64; 3], b: &[f64; 3]| {
        let sq = |v: &[f64; 3]| v.iter().map(|x| x * x).sum::<f64>();
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        (Complex64::new(sq(a) - sq(b), 2.0 * dot), sq(a) + sq(b))
    };
    let (mut phase_err, mut energy_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let mut field = || {
            let values = (0..grid.len())
                .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            VectorField::new(grid, values).unwrap()
        };
        let pair = VectorFieldPair::new(field(), field(), 0.0).unwrap();
        let theta = rng.random_range(0.0..TAU);
        let rotated = dual_rotate(&pair, DualAngle::new(theta)).unwrap();
        let phase = Complex64::from_polar(1.0, 2.0 * theta);
        for i in 0..grid.len() {
            let (c0, e0) = complex_inv(&pair.u1.values()[i], &pair.u2.values()[i]);
            let (c1, e1) = complex_inv(&rotated.u1.values()[i], &rotated.u2.values()[i]);
            phase_err = phase_err.max((phase * c1 - c0).norm());
            energy_err = energy_err.max((e1 - e0).abs());
        }
    }
    Outcome::new(
        phase_err <= 1e-12 && energy_err <= 1e-12,
        format!("100 pairs, max |e^(2iθ)C' − C| = {phase_err:.1e}, max energy change {energy_err:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let length = rng.random_range(1.0..5.0);
    let masses: Vec<f64> = (0..20).map(|_| rng.random_range(0.5..2.0)).collect();
    let set = mode_spectrum(&CavitySpec::new(length, 1.0, 1.0, 20).unwrap(), &masses).unwrap();
    let mut worst: f64 = 0.0;
    for mode in set.modes() {
        let b = rng.random_range(-1.0..1.0);
        let state = ModeState::from_amplitude_phase(b, 0.0, mode);
        let period = TAU / mode.omega;
        for i in 0..=400 {
            let t = period * i as f64 / 400.0;
            let q2 = integrated_coordinates(&state, mode, t).1;
            let q = oscillator_evolve(&state, mode, t).q;
            // q = B cos ωt, q'' = B(1 − cos ωt): the sum is B
            worst = worst.max((q2 + q - b).abs());
        }
    }
    Outcome::new(worst <= 1e-12, format!("20 modes, max |q'' + q − B| = {worst:.1e}"))
}

fn oracle_lowering(d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(
        d,
        d,
        |r, c| if c == r + 1 { Complex64::new((c as f64).sqrt(), 0.0) } else { Complex64::new(0.0, 0.0) },
    )
}

fn criterion_6() -> Outcome {
    let mut comm_err: f64 = 0.0;
    let mut ladder_err: f64 = 0.0;
    for n_max in [2, 8, 32] {
        let spec = FockSpec::new(n_max, 1.0, vec![OscillatorParams { mass: 1.0, omega: 1.0 }]).unwrap();
        let lib = build_ladder(&spec).unwrap();
        let a = oracle_lowering(n_max + 1);
        let ad = a.adjoint();
        ladder_err = ladder_err.max((&lib.a - &a).norm()).max((&lib.a_dag - &ad).norm());
        let comm = &lib.a * &lib.a_dag - &lib.a_dag * &lib.a;
        let block: Vec<usize> = (0..n_max).collect();
        let id = DMatrix::<Complex64>::identity(n_max, n_max);
        comm_err = comm_err.max(max_abs((restrict(&comm, &block) - id).iter().map(|z| z.norm())));
    }

    let (n_max, omega) = (8, 1.3);
    let spec = FockSpec::new(n_max, 1.0, vec![OscillatorParams { mass: 1.0, omega }]).unwrap();
    let lib = build_ladder(&spec).unwrap();
    let a = oracle_lowering(n_max + 1);
    let mut h = a.adjoint() * &a;
    for i in 0..=n_max {
        h[(i, i)] += Complex64::new(0.5, 0.0);
    }
    h *= Complex64::new(omega, 0.0);
    let i = Complex64::i();
    let block = faithful_indices(n_max, 1);
    let mut heis_err: f64 = 0.0;
    for t in [0.4, 1.7, 5.9, 12.0] {
        let expected = (&h * (i * t)).exp() * &a * (&h * (-i * t)).exp();
        let evolved = heisenberg_evolve(&lib, omega, t);
        heis_err = heis_err.max(restrict(&(expected - evolved.a), &block).norm());
    }
    Outcome::new(
        comm_err <= 1e-12 && ladder_err == 0.0 && heis_err <= 1e-8,
        format!("commutator block error {comm_err:.1e} for N in {{2, 8, 32}}; Heisenberg vs expm {heis_err:.1e} (Frobenius)"),
    )
}

fn criterion_7() -> Outcome {
    let mut residual: f64 = 0.0;
    for modes in [1, 2] {
        let set = pi_cavity(modes, 2.0);
        let spec = FockSpec::from_mode_set(&set, 6).unwrap();
        let grid = GridSpec::line(PI, 33).unwrap();
        for t in [0.0, 0.8, 2.9] {
            let r = operator_field_equation_residual(&set, &spec, &grid, t).unwrap();
            residual = residual.max(r.curl_u1).max(r.curl_u2);
        }
    }

    // finite-difference cross-check of the same equations on the field operators
    let set = pi_cavity(2, 2.0);
    let spec = FockSpec::from_mode_set(&set, 4).unwrap();
    let block = faithful_indices(4, 2);
    let h = 1e-4;
    let (z, t) = (1.1, 0.6);
    let at = |z: f64, t: f64| field_operators(&set, &spec, z, t).unwrap();
    let scale = restrict(&at(z, t).u1, &block).norm();
    let dz_u1 = (at(z + h, t).u1 - at(z - h, t).u1) / Complex64::new(2.0 * h, 0.0);
    let dz_u2 = (at(z + h, t).u2 - at(z - h, t).u2) / Complex64::new(2.0 * h, 0.0);
    let dt_u1 = (at(z, t + h).u1 - at(z, t - h).u1) / Complex64::new(2.0 * h, 0.0);
    let dt_u2 = (at(z, t + h).u2 - at(z, t - h).u2) / Complex64::new(2.0 * h, 0.0);
    // (∇×Û1)_y = ∂z Û1x balances −∂t Û2y; (∇×Û2)_x = −∂z Û2y balances ∂t Û1x
    let fd = (restrict(&(dz_u1 + dt_u2), &block).norm()).max(restrict(&(dz_u2 + dt_u1), &block).norm()) / scale;

    let set = pi_cavity(1, 2.0);
    let mode = set.modes()[0];
    let n_max = 32;
    let spec = FockSpec::from_mode_set(&set, n_max).unwrap();
    let grid = GridSpec::line(PI, 17).unwrap();
    let zs: Vec<f64> = (0..grid.len()).map(|i| grid.position(i)[2]).collect();
    let ts = [0.0, 0.7, 1.9, 4.0];
    let mut coherent: f64 = 0.0;
    for gamma in [Complex64::from_polar(1.0, 0.3), Complex64::from_polar(8f64.sqrt(), 2.2)] {
        let q0 = (2.0 / (mode.mass * mode.omega)).sqrt() * gamma.re;
        let p0 = (2.0 * mode.mass * mode.omega).sqrt() * gamma.im;
        let scan = expectation_scan(&set, &spec, &coherent_state(gamma, n_max), &zs, &ts).unwrap();
        for (ti, &t) in ts.iter().enumerate() {
            let (q, p) = closed_form(q0, p0, &mode, t);
            let u1 = |z: f64| mode.amplitude * q * (mode.k * z).sin();
            let u2 = |z: f64| mode.amplitude / mode.k * (p / mode.mass) * (mode.k * z).cos();
            let scale = zs.iter().map(|&z| u1(z).abs().max(u2(z).abs())).fold(0.0, f64::max);
            for (zi, &z) in zs.iter().enumerate() {
                let s = scan[zi * ts.len() + ti];
                coherent = coherent.max((s.u1 - u1(z)).abs().max((s.u2 - u2(z)).abs()) / scale);
            }
        }
    }
    Outcome::new(
        residual <= 1e-12 && fd <= 1e-6 && coherent <= 1e-6,
        format!(
            "operator residual {residual:.1e} (1 and 2 modes), finite-difference check {fd:.1e}, coherent vs classical {coherent:.1e} at N = 32, |γ|² ≤ 8"
        ),
    )
}

fn criterion_8() -> Outcome {
    let n = 16;
    let (mass, spring) = (1.0, 1.0);
    let modes = normal_modes(&ChainSpec::new(n, mass, spring, true).unwrap()).unwrap();
    let omega_at = |j: usize| {
        let k = TAU * j as f64 / n as f64;
        modes.iter().find(|m| (m.k - k).abs() < 1e-12).map(|m| m.omega).unwrap_or(f64::NAN)
    };
    let analytic = |j: usize| 2.0 * (spring / mass).sqrt() * (PI * j as f64 / n as f64).sin().abs();
    let dispersion = max_abs((1..=n).map(|j| omega_at(j) - analytic(j)));
    let zero = omega_at(n);
    let symmetry = max_abs((1..n).map(|j| omega_at(j) - omega_at(n - j)));

    // independent eigenvalues of the ring dynamical matrix
    let d = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            2.0 * spring / mass
        } else if (r + 1) % n == c || (c + 1) % n == r {
            -spring / mass
        } else {
            0.0
        }
    });
    let mut eig: Vec<f64> = d.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let mut lib: Vec<f64> = modes.iter().map(|m| m.omega * m.omega).collect();
    lib.sort_by(f64::total_cmp);
    let eig_err = max_abs(eig.iter().zip(&lib).map(|(a, b)| a - b));
    Outcome::new(
        modes.len() == n && dispersion <= 1e-9 && zero <= 1e-9 && symmetry <= 1e-9 && eig_err <= 1e-9,
        format!("N' = 16: dispersion error {dispersion:.1e}, zero mode {zero:.1e}, asymmetry {symmetry:.1e}, ω² vs eigenvalues {eig_err:.1e}"),
    )
}

/// `n_l − n_m ∓ α = N'b` over lattice indices and cavity indices on matched grids.
fn integer_channel_oracle(
    n: i64,
    cavity_modes: i64,
    b_max: i64,
    energy_ok: impl Fn(i64, i64, i64, i64) -> bool,
) -> usize {
    let mut count = 0;
    for nl in 1..=n {
        for nm in 1..=n {
            for alpha in 1..=cavity_modes {
                for sign in [1, -1] {
                    for b in -b_max..=b_max {
                        if nl - nm - sign * alpha == n * b && energy_ok(nl, nm, alpha, sign) {
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    count
}

fn criterion_9() -> Outcome {
    let n = 8usize;
    let lattice = lattice_kgrid_exact(n);
    let matched: Surd = "4".parse().unwrap();
    let cavity = cavity_kgrid_exact(&matched, n).unwrap();
    let delta = BroadenedDelta::new(DeltaKind::Gaussian, 0.05).unwrap();

    // flat band, zero-energy phonons: only momentum decides
    let mut flat =
        ChannelSearch::new(BandModel::tight_binding(0.0, 0.0).unwrap(), PhononDispersion::Constant(0.0), delta);
    flat.b_max = 1;
    let flat_count = enumerate_channels(&lattice, &cavity, &flat).unwrap().len();
    let flat_oracle = integer_channel_oracle(n as i64, n as i64, 1, |_, _, _, _| true);

    // tight-binding band with ħω = 0.5 and a 3σ energy window
    let mut tb =
        ChannelSearch::new(BandModel::tight_binding(1.0, 0.0).unwrap(), PhononDispersion::Constant(0.5), delta);
    tb.b_max = 1;
    tb.energy_tol = 0.15;
    let tb_count = enumerate_channels(&lattice, &cavity, &tb).unwrap().len();
    let eps = |j: i64| -2.0 * (TAU * j as f64 / n as f64).cos();
    let tb_oracle =
        integer_channel_oracle(n as i64, n as i64, 1, |l, m, _, s| (eps(l) - eps(m) - s as f64 * 0.5).abs() <= 0.15);

    // L/a = 4√2: no cavity wavevector is a rational multiple of π
    let irrational: Surd = "4*sqrt(2)".parse().unwrap();
    let modes = (2.0 * irrational.to_f64()).floor() as usize;
    let irr_cavity = cavity_kgrid_exact(&irrational, modes).unwrap();
    let irr_count = enumerate_channels(&lattice, &irr_cavity, &flat).unwrap().len();
    let tuples = n * n * modes * 3 * 2;

    Outcome::new(
        flat_count == flat_oracle && tb_count == tb_oracle && tb_count > 0 && irr_count == 0 && tuples <= 10_000,
        format!(
            "matched grids: {flat_count} channels (oracle {flat_oracle}), tight-binding {tb_count} (oracle {tb_oracle}); L/a = 4√2: {irr_count} channels over {tuples} tuples"
        ),
    )
}

fn criterion_10() -> Outcome {
    let delta = BroadenedDelta::new(DeltaKind::Gaussian, 0.05).unwrap();
    let (m2, hbar, hw) = (0.8, 1.0, 0.25);
    let gauss = |x: f64| (-0.5 * (x / 0.05f64).powi(2)).exp() / (0.05 * TAU.sqrt());
    let rate = |branch: Branch, n: f64| {
        let e_m = 0.4 - branch.sign() * hw + 0.01;
        let tr = Transition { e_l: 0.4, e_m, hbar_omega: hw, occupation: n, branch };
        let lib = scattering_rate(&tr, m2, hbar, &delta).unwrap();
        let factor = if branch == Branch::Emission { n + 1.0 } else { n };
        let oracle = TAU / hbar * m2 * gauss(0.4 - e_m - branch.sign() * hw) * factor;
        (lib, oracle)
    };
    let (abs0, abs0_oracle) = rate(Branch::Absorption, 0.0);
    let mut formula_err: f64 = 0.0;
    let mut ratio_err: f64 = 0.0;
    for n in [0.1, 1.0, 10.0] {
        let (em, em_o) = rate(Branch::Emission, n);
        let (ab, ab_o) = rate(Branch::Absorption, n);
        formula_err = formula_err.max((em / em_o - 1.0).abs()).max((ab / ab_o - 1.0).abs());
        let expected = (n + 1.0) / n;
        ratio_err = ratio_err.max(((em / ab) - expected).abs() / expected / f64::EPSILON);
    }
    Outcome::new(
        abs0 == 0.0 && abs0_oracle == 0.0 && formula_err <= 1e-14 && ratio_err <= 4.0,
        format!("absorption at N = 0: {abs0}; ratio error {ratio_err:.2} ulp; rate vs formula {formula_err:.1e}"),
    )
}

fn criterion_11() -> Outcome {
    let nk = 64;
    let (t, hw, m2, rho) = (1.0, 0.5, 1.0, 0.5);
    let band = BandModel::tight_binding(t, 0.0).unwrap();
    let kgrid: Vec<f64> = (1..=nk).map(|n| TAU * n as f64 / nk as f64).collect();
    let phonons: Vec<PhononSample> = kgrid.iter().map(|&q| PhononSample { q, hbar_omega: hw, m2 }).collect();
    let report = attractive_channels(&band, &kgrid, &phonons, rho, DEFAULT_POLE_GUARD).unwrap();

    let mut attractive = 0;
    let mut kept = 0;
    let mut poles = 0;
    let mut misclassified = 0;
    for &k in &kgrid {
        for &q in &kgrid {
            let kp = (k + q) % TAU;
            let de = -2.0 * t * k.cos() + 2.0 * t * kp.cos();
            let denom = de * de - hw * hw;
            if denom.abs() < DEFAULT_POLE_GUARD * hw * hw {
                poles += 1;
                continue;
            }
            let v = hw * m2 / denom;
            if (v < 0.0) != (de.abs() < hw) {
                misclassified += 1;
            }
            attractive += usize::from(v < 0.0);
            kept += usize::from(de.abs() <= rho * hw);
        }
    }
    let lib_misclassified =
        report.entries.iter().filter(|e| !e.pole_flag && e.attractive != (e.delta_eps.abs() < hw)).count();
    let s = &report.summary;
    Outcome::new(
        misclassified == 0
            && lib_misclassified == 0
            && s.attractive == attractive
            && s.kept == kept
            && s.pole_hits == poles
            && s.scanned == nk * nk,
        format!(
            "{} pairs: attractive {} (oracle {attractive}), kept at ρ = 0.5 {} (oracle {kept}), misclassified 0 = {}",
            s.scanned,
            s.attractive,
            s.kept,
            misclassified + lib_misclassified == 0
        ),
    )
}

fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["first.csv", "second.csv"] {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_phonoscope"))
            .args(["verify", "--quick", "--seed", "7", "--out"])
            .arg(&path)
            .output()
            .unwrap()
            .status;
        outputs.push((status.code(), std::fs::read(&path).unwrap_or_default()));
    }
    let identical = outputs[0].1 == outputs[1].1 && !outputs[0].1.is_empty();
    Outcome::new(
        identical && outputs.iter().all(|(code, _)| *code == Some(0)),
        format!("two runs with seed 7: {} bytes each, identical {identical}", outputs[0].1.len()),
    )
}

fn main() {
    let ms = Duration::from_millis;
    let results = [
        run(1, "photon flux", ms(1), criterion_1),
        run(2, "field-equation convergence", ms(1000), criterion_2),
        run(3, "energy conservation", ms(1000), criterion_3),
        run(4, "duality rotation", ms(1000), criterion_4),
        run(5, "second solution", ms(100), criterion_5),
        run(6, "Fock algebra", ms(1000), criterion_6),
        run(7, "operator field equations", ms(5000), criterion_7),
        run(8, "lattice dispersion", ms(100), criterion_8),
        run(9, "commensurability", ms(10_000), criterion_9),
        run(10, "scattering factors", ms(100), criterion_10),
        run(11, "pairing sign law", ms(1000), criterion_11),
        run(12, "determinism", ms(60_000), criterion_12),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    println!("acceptance: {} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
