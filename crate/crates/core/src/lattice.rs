//! Monatomic nearest-neighbour chain: dynamical matrix, normal modes, and the
//! discrete lattice k-grid `k_n = 2πn/N'`, `n = 1..N'`.
//!
//! Sign convention: `m ü_n = -Σ Φ_{nn'} u_{n'}` with Φ positive semidefinite,
//! so `D = Φ/m` has eigenvalues `ω² ≥ 0`. Lattice constant is 1.

use std::f64::consts::{PI, TAU};
use std::io::Read;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::LatticeError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    pub atoms: usize,
    pub mass: f64,
    /// Nearest-neighbour force constant.
    pub spring: f64,
    /// Ring when true, free ends otherwise.
    pub periodic: bool,
}

impl ChainSpec {
    pub fn new(atoms: usize, mass: f64, spring: f64, periodic: bool) -> Result<Self, LatticeError> {
        let spec = Self { atoms, mass, spring, periodic };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), LatticeError> {
        if self.atoms < 3 {
            return Err(LatticeError::TooFewAtoms(self.atoms));
        }
        for (name, value) in [("mass", self.mass), ("spring", self.spring)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(LatticeError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// `2√(α/m)|sin(k/2)|`.
    pub fn analytic_frequency(&self, k: f64) -> f64 {
        2.0 * (self.spring / self.mass).sqrt() * (k / 2.0).sin().abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalMode {
    /// Wavevector in units of the inverse lattice constant.
    pub k: f64,
    pub omega: f64,
    /// Unit-norm polarization over the sites.
    pub eigenvector: DVector<Complex64>,
}

/// Unlabelled eigenpair of a dynamical matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenMode {
    pub omega_sq: f64,
    pub omega: f64,
    pub vector: DVector<f64>,
}

/// Force-constant matrix Φ for the nearest-neighbour chain.
pub fn force_constants(spec: &ChainSpec) -> Result<DMatrix<f64>, LatticeError> {
    spec.validate()?;
    let n = spec.atoms;
    let a = spec.spring;
    let mut phi = DMatrix::zeros(n, n);
    for i in 0..n {
        if spec.periodic {
            phi[(i, i)] = 2.0 * a;
            phi[(i, (i + 1) % n)] = -a;
            phi[(i, (i + n - 1) % n)] = -a;
        } else {
            if i > 0 {
                phi[(i, i - 1)] = -a;
                phi[(i, i)] += a;
            }
            if i + 1 < n {
                phi[(i, i + 1)] = -a;
                phi[(i, i)] += a;
            }
        }
    }
    Ok(phi)
}

pub fn dynamical_matrix(spec: &ChainSpec) -> Result<DMatrix<f64>, LatticeError> {
    dynamical_matrix_from_force_constants(&force_constants(spec)?, spec.mass)
}

/// `D = Φ / m` for a user-supplied symmetric Φ.
pub fn dynamical_matrix_from_force_constants(phi: &DMatrix<f64>, mass: f64) -> Result<DMatrix<f64>, LatticeError> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(LatticeError::InvalidParameter { name: "mass", value: mass });
    }
    if phi.nrows() != phi.ncols() || phi.nrows() == 0 {
        return Err(LatticeError::ForceConstants(format!("shape {}x{}", phi.nrows(), phi.ncols())));
    }
    let scale = phi.amax().max(f64::MIN_POSITIVE);
    if (phi - phi.transpose()).amax() > 1e-12 * scale {
        return Err(LatticeError::ForceConstants("matrix is not symmetric".into()));
    }
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(LatticeError::ForceConstants("non-finite entry".into()));
    }
    Ok(phi / mass)
}

/// Reads a square force-constant matrix from headerless CSV rows.
pub fn read_force_constants_csv<R: Read>(reader: R) -> Result<DMatrix<f64>, LatticeError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| LatticeError::ForceConstants(e.to_string()))?;
        let row = record
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| LatticeError::ForceConstants(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(LatticeError::ForceConstants("rows do not form a square matrix".into()));
    }
    Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

/// `k_n = 2πn/N'` for `n = 1..=N'`.
pub fn lattice_kgrid(atoms: usize) -> Vec<f64> {
    (1..=atoms).map(|n| TAU * n as f64 / atoms as f64).collect()
}

fn rayleigh(d: &DMatrix<f64>, v: &DVector<Complex64>) -> f64 {
    let re = v.map(|z| z.re);
    let im = v.map(|z| z.im);
    let num = re.dot(&(d * &re)) + im.dot(&(d * &im));
    num / v.norm_squared()
}

fn omega_from(omega_sq: f64) -> f64 {
    omega_sq.max(0.0).sqrt()
}

/// Eigenpairs of any symmetric dynamical matrix, ascending in ω².
pub fn dynamical_eigenmodes(d: &DMatrix<f64>) -> Vec<EigenMode> {
    let eig = d.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .map(|i| {
            let vector = eig.eigenvectors.column(i).into_owned();
            let omega_sq = vector.dot(&(d * &vector));
            EigenMode { omega_sq, omega: omega_from(omega_sq), vector }
        })
        .collect()
}

/// Eigen-decomposition with plane-wave (ring) or standing-wave (free ends) labels.
///
/// For a ring each degenerate eigenspace is projected onto the plane waves
/// `exp(i k_n r)` it contains; ω is then refined by the Rayleigh quotient of
/// the projected vector. Modes are sorted by ω, ties by k.
pub fn normal_modes(spec: &ChainSpec) -> Result<Vec<NormalMode>, LatticeError> {
    let d = dynamical_matrix(spec)?;
    let n = spec.atoms;
    let eig = d.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    if !spec.periodic {
        // standing waves: ω_j = 2√(α/m) sin(πj/2N'), j = 0..N'-1
        return Ok(order
            .iter()
            .enumerate()
            .map(|(j, &col)| {
                let v = eig.eigenvectors.column(col).map(|x| Complex64::new(x, 0.0));
                let omega = omega_from(rayleigh(&d, &v));
                NormalMode { k: PI * j as f64 / n as f64, omega, eigenvector: v }
            })
            .collect());
    }

    let scale = eig.eigenvalues.amax().max(1.0);
    let tol = 1e-9 * scale;
    let kgrid = lattice_kgrid(n);
    let norm = 1.0 / (n as f64).sqrt();
    let plane_waves: Vec<DVector<Complex64>> =
        kgrid.iter().map(|&k| DVector::from_fn(n, |j, _| Complex64::from_polar(norm, k * j as f64))).collect();

    let mut modes = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.eigenvalues[order[end]] - eig.eigenvalues[order[start]] <= tol {
            end += 1;
        }
        let basis =
            DMatrix::from_columns(&order[start..end].iter().map(|&c| eig.eigenvectors.column(c)).collect::<Vec<_>>());
        let mut cluster = Vec::new();
        for (k, wave) in kgrid.iter().zip(&plane_waves) {
            let re = basis.transpose() * wave.map(|z| z.re);
            let im = basis.transpose() * wave.map(|z| z.im);
            if re.norm_squared() + im.norm_squared() > 0.5 {
                let re = &basis * re;
                let im = &basis * im;
                let mut v = DVector::from_fn(n, |j, _| Complex64::new(re[j], im[j]));
                let len = v.norm();
                v /= Complex64::new(len, 0.0);
                let omega = omega_from(rayleigh(&d, &v));
                cluster.push(NormalMode { k: *k, omega, eigenvector: v });
            }
        }
        if cluster.len() != end - start {
            return Err(LatticeError::Eigensolver(format!(
                "eigenspace of dimension {} matched {} plane waves",
                end - start,
                cluster.len()
            )));
        }
        modes.extend(cluster);
        start = end;
    }
    modes.sort_by(|a, b| a.omega.total_cmp(&b.omega).then(a.k.total_cmp(&b.k)));
    Ok(modes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> ChainSpec {
        ChainSpec::new(n, 1.0, 1.0, true).unwrap()
    }

    #[test]
    fn three_atom_ring_matrix() {
        let d = dynamical_matrix(&ChainSpec::new(3, 2.0, 3.0, true).unwrap()).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let expected = if r == c { 3.0 } else { -1.5 };
                assert_eq!(d[(r, c)], expected);
            }
        }
    }

    #[test]
    fn rows_sum_to_zero_and_translation_is_zero_mode() {
        for periodic in [true, false] {
            let d = dynamical_matrix(&ChainSpec::new(7, 1.3, 0.7, periodic).unwrap()).unwrap();
            for r in 0..7 {
                assert_eq!(d.row(r).sum(), 0.0);
            }
            let ones = DVector::from_element(7, 1.0);
            assert!((&d * ones).amax() < 1e-15);
        }
    }

    #[test]
    fn rejects_invalid_chains() {
        assert_eq!(ChainSpec::new(2, 1.0, 1.0, true), Err(LatticeError::TooFewAtoms(2)));
        assert!(ChainSpec::new(4, 0.0, 1.0, true).is_err());
        assert!(ChainSpec::new(4, 1.0, -1.0, true).is_err());
    }

    #[test]
    fn kgrid_examples() {
        let k = lattice_kgrid(4);
        assert_eq!(k, vec![PI / 2.0, PI, 1.5 * PI, TAU]);
        assert_eq!(lattice_kgrid(1), vec![TAU]);
        let k = lattice_kgrid(9);
        for w in k.windows(2) {
            assert!((w[1] - w[0] - TAU / 9.0).abs() < 1e-14);
        }
    }

    #[test]
    fn ring_dispersion_matches_closed_form() {
        let spec = ring(16);
        let modes = normal_modes(&spec).unwrap();
        assert_eq!(modes.len(), 16);
        let mut ks: Vec<f64> = modes.iter().map(|m| m.k).collect();
        ks.sort_by(f64::total_cmp);
        assert_eq!(ks, lattice_kgrid(16));
        for m in &modes {
            assert!((m.omega - spec.analytic_frequency(m.k)).abs() < 1e-9, "{} {}", m.k, m.omega);
        }
        assert_eq!(modes[0].k, TAU);
        assert!(modes[0].omega <= 1e-10);
    }

    #[test]
    fn plane_waves_diagonalize_ring() {
        let spec = ChainSpec::new(12, 0.8, 1.9, true).unwrap();
        let d = dynamical_matrix(&spec).unwrap().map(|x| Complex64::new(x, 0.0));
        for m in normal_modes(&spec).unwrap() {
            let resid = &d * &m.eigenvector - &m.eigenvector * Complex64::new(m.omega * m.omega, 0.0);
            assert!(resid.norm() < 1e-10);
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let modes = normal_modes(&ring(10)).unwrap();
        for (i, a) in modes.iter().enumerate() {
            for (j, b) in modes.iter().enumerate() {
                let overlap = a.eigenvector.dotc(&b.eigenvector).norm();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((overlap - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn spectrum_is_symmetric_and_nonnegative() {
        let spec = ring(15);
        let modes = normal_modes(&spec).unwrap();
        let omega_at = |k: f64| {
            modes.iter().find(|m| (m.k - k).abs() < 1e-12 || (m.k - k - TAU).abs() < 1e-12).map(|m| m.omega).unwrap()
        };
        for m in &modes {
            assert!((m.omega - omega_at(TAU - m.k)).abs() < 1e-10);
        }
        for e in dynamical_eigenmodes(&dynamical_matrix(&spec).unwrap()) {
            assert!(e.omega_sq >= -1e-10);
        }
    }

    #[test]
    fn free_chain_standing_waves() {
        let spec = ChainSpec::new(9, 1.0, 2.0, false).unwrap();
        for m in normal_modes(&spec).unwrap() {
            assert!((m.omega - spec.analytic_frequency(m.k)).abs() < 1e-9);
        }
    }

    #[test]
    fn force_constants_from_csv() {
        let text = "2,-1,-1\n-1,2,-1\n-1,-1,2\n";
        let phi = read_force_constants_csv(text.as_bytes()).unwrap();
        let d = dynamical_matrix_from_force_constants(&phi, 1.0).unwrap();
        assert_eq!(d, dynamical_matrix(&ring(3)).unwrap());
        assert!(read_force_constants_csv("1,2\n3".as_bytes()).is_err());
        let asym = read_force_constants_csv("1,2\n3,4".as_bytes()).unwrap();
        assert!(dynamical_matrix_from_force_constants(&asym, 1.0).is_err());
    }
}
