//! Density matrices, bipartite pure states, purification and random sampling.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    hermitian_eig, partial_trace, tensor, ComplexMatrix, HermitianEigenSystem, ZERO,
};
use crate::tol::{TOL_HERM, TOL_NORM, TOL_PSD, TOL_TRACE};

/// A positive semidefinite, unit-trace Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState(format!(
                "{}x{} matrix is not square",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let herm = matrix.max_abs_diff(&matrix.adjoint());
        if herm > TOL_HERM {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let matrix = matrix.hermitian_part();
        let min = hermitian_eig(&matrix)?
            .values
            .last()
            .copied()
            .unwrap_or(0.0);
        if min < -TOL_PSD {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix })
    }

    /// Wraps the output of a trace-preserving, positive map without re-validating.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    /// |ψ⟩⟨ψ| for a unit vector ψ.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(Error::InvalidArgument(format!(
                "state vector has squared norm {norm}"
            )));
        }
        Ok(Self::from_trusted(ComplexMatrix::projector(psi)))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
        }
    }

    /// Diagonal state with the given probabilities in the computational basis.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::diag_real(probs))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn eigen(&self) -> HermitianEigenSystem {
        hermitian_eig(&self.matrix).expect("density matrices are Hermitian by construction")
    }

    /// Eigenvalues sorted descending, clamped to [0, 1].
    pub fn spectrum(&self) -> Vec<f64> {
        self.eigen()
            .values
            .into_iter()
            .map(|v| v.clamp(0.0, 1.0))
            .collect()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Reduced state on the subsystems listed in `keep`.
    pub fn reduce(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        Ok(Self::from_trusted(partial_trace(&self.matrix, dims, keep)?))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_trusted(tensor(&self.matrix, &other.matrix))
    }

    /// U ρ U†.
    pub fn transform(&self, u: &ComplexMatrix) -> Self {
        Self::from_trusted(u.conjugate(&self.matrix))
    }
}

/// A unit vector on C^{d_S} ⊗ C^{d_R}, stored row-major (system index major).
#[derive(Clone, Debug, PartialEq)]
pub struct PureBipartiteState {
    dims: (usize, usize),
    amplitudes: Vec<Complex64>,
}

impl PureBipartiteState {
    pub fn new(dims: (usize, usize), amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims {dims:?}",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(Error::InvalidArgument(format!(
                "squared norm {norm} differs from 1"
            )));
        }
        Ok(Self { dims, amplitudes })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(ComplexMatrix::projector(&self.amplitudes))
    }

    /// Tr_R |Ψ⟩⟨Ψ|.
    pub fn reduced_system(&self) -> DensityMatrix {
        self.density()
            .reduce(&[self.dims.0, self.dims.1], &[0])
            .expect("dims match by construction")
    }

    /// Applies a unitary to the reference factor, giving another purification of the same state.
    pub fn rotate_reference(&self, u: &ComplexMatrix) -> Result<Self> {
        if !u.is_square() || u.rows() != self.dims.1 {
            return Err(Error::DimensionMismatch(format!(
                "reference unitary is {}x{}, reference dimension {}",
                u.rows(),
                u.cols(),
                self.dims.1
            )));
        }
        let full = tensor(&ComplexMatrix::identity(self.dims.0), u);
        Ok(Self {
            dims: self.dims,
            amplitudes: full.matvec(&self.amplitudes),
        })
    }
}

/// Purification Σ_i √λ_i |v_i⟩_S |i⟩_R built from the eigensystem of ρ, with d_R = d_S.
pub fn purify(rho: &DensityMatrix) -> PureBipartiteState {
    let d = rho.dim();
    let eig = rho.eigen();
    let mut amplitudes = vec![ZERO; d * d];
    for (i, &lambda) in eig.values.iter().enumerate() {
        let w = lambda.max(0.0).sqrt();
        if w == 0.0 {
            continue;
        }
        for s in 0..d {
            amplitudes[s * d + i] = eig.vectors[(s, i)] * w;
        }
    }
    // Renormalize away the clamp of tiny negative eigenvalues.
    let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amplitudes {
        *a /= norm;
    }
    PureBipartiteState {
        dims: (d, d),
        amplitudes,
    }
}

fn check_schmidt_pair(lambda0: f64, lambda1: f64) -> Result<()> {
    if !(lambda0 >= 0.0 && lambda1 >= 0.0) || (lambda0 + lambda1 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "Schmidt weights ({lambda0}, {lambda1}) must be nonnegative and sum to 1"
        )));
    }
    Ok(())
}

/// √λ₀|00⟩ + √λ₁|11⟩.
pub fn schmidt_pair_state(lambda0: f64, lambda1: f64) -> Result<PureBipartiteState> {
    check_schmidt_pair(lambda0, lambda1)?;
    let amps = vec![
        Complex64::new(lambda0.sqrt(), 0.0),
        ZERO,
        ZERO,
        Complex64::new(lambda1.sqrt(), 0.0),
    ];
    Ok(PureBipartiteState {
        dims: (2, 2),
        amplitudes: amps,
    })
}

/// The reduced state of [`schmidt_pair_state`] written in the {|+⟩, |−⟩} frame:
/// ½[[1, λ₀−λ₁], [λ₀−λ₁, 1]].
pub fn system_state_plus_minus_basis(lambda0: f64, lambda1: f64) -> Result<DensityMatrix> {
    check_schmidt_pair(lambda0, lambda1)?;
    let c = 0.5 * (lambda0 - lambda1);
    Ok(DensityMatrix::from_trusted(ComplexMatrix::from_real_rows(
        &[[0.5, c], [c, 0.5]],
    )))
}

/// A reproducible random stream: the same `(seed, stream_index)` always yields the same samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector in C^d.
pub fn random_pure_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// Haar-random pure state |ψ⟩⟨ψ|.
pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::from_trusted(ComplexMatrix::projector(&random_pure_vector(d, rng)))
}

/// ρ = G G† / Tr(G G†) with G a d×rank complex Ginibre matrix.
///
/// At `rank == d` this samples the Hilbert–Schmidt measure.
pub fn random_mixed<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if rank == 0 || rank > d {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} outside 1..={d}"
        )));
    }
    let g = ComplexMatrix::from_vec(
        d,
        rank,
        (0..d * rank).map(|_| complex_gaussian(rng)).collect(),
    )?;
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    Ok(DensityMatrix::from_trusted(w.scale_real(1.0 / tr)))
}

/// Haar-random isometry with `cols` orthonormal columns in C^rows (Gram–Schmidt on a Ginibre matrix).
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(cols <= rows, "isometry needs cols <= rows");
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    while columns.len() < cols {
        let mut v: Vec<Complex64> = (0..rows).map(|_| complex_gaussian(rng)).collect();
        // Two passes of modified Gram–Schmidt.
        for _ in 0..2 {
            for u in &columns {
                let overlap: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= overlap * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        for z in &mut v {
            *z /= norm;
        }
        columns.push(v);
    }
    let mut m = ComplexMatrix::zeros(rows, cols);
    for (j, col) in columns.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            m[(i, j)] = *z;
        }
    }
    m
}

/// Haar-random unitary.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    random_isometry(d, d, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ONE;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let not_unit = ComplexMatrix::diag_real(&[0.5, 0.4]);
        assert!(DensityMatrix::new(not_unit).is_err());
        let negative = ComplexMatrix::diag_real(&[1.2, -0.2]);
        assert!(DensityMatrix::new(negative).is_err());
        let non_herm = ComplexMatrix::from_real_rows(&[[0.5, 0.3], [0.1, 0.5]]);
        assert!(DensityMatrix::new(non_herm).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn purify_pure_state_is_product() {
        let rho = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let psi = purify(&rho);
        assert_eq!(psi.dims(), (2, 2));
        assert!((psi.amplitudes()[0] - ONE).norm() < 1e-15);
        assert!(psi.amplitudes()[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn purify_maximally_mixed_is_maximally_entangled() {
        let psi = purify(&DensityMatrix::maximally_mixed(2));
        let reduced = psi.reduced_system();
        assert!(reduced
            .matrix()
            .approx_eq(DensityMatrix::maximally_mixed(2).matrix(), 1e-14));
        // Schmidt coefficients: both 1/√2.
        let r = psi.density().reduce(&[2, 2], &[1]).unwrap();
        let s = r.spectrum();
        assert!((s[0] - 0.5).abs() < 1e-14 && (s[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn purify_diagonal_state() {
        let psi = purify(&DensityMatrix::diagonal(&[0.9, 0.1]).unwrap());
        let expected = [c(0.9f64.sqrt()), ZERO, ZERO, c(0.1f64.sqrt())];
        for (a, b) in psi.amplitudes().iter().zip(expected) {
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn schmidt_pair_examples() {
        let s = schmidt_pair_state(1.0, 0.0).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = schmidt_pair_state(0.5, 0.5).unwrap();
        assert!(
            (s.amplitudes()[0].re - h).abs() < 1e-15 && (s.amplitudes()[3].re - h).abs() < 1e-15
        );
        let s = schmidt_pair_state(0.9, 0.1).unwrap();
        assert!((s.amplitudes()[0].re - 0.948_683_298_050_513_8).abs() < 1e-15);
        assert!((s.amplitudes()[3].re - 0.316_227_766_016_837_94).abs() < 1e-15);
        assert!(schmidt_pair_state(0.6, 0.6).is_err());
        assert!(schmidt_pair_state(1.1, -0.1).is_err());
    }

    #[test]
    fn plus_minus_frame_state() {
        let rho = system_state_plus_minus_basis(0.5, 0.5).unwrap();
        assert!(rho
            .matrix()
            .approx_eq(DensityMatrix::maximally_mixed(2).matrix(), 0.0));
        let rho = system_state_plus_minus_basis(1.0, 0.0).unwrap();
        assert!(rho.matrix().approx_eq(
            &ComplexMatrix::from_real_rows(&[[0.5, 0.5], [0.5, 0.5]]),
            0.0
        ));
        let rho = system_state_plus_minus_basis(0.9, 0.1).unwrap();
        assert!(rho.matrix().approx_eq(
            &ComplexMatrix::from_real_rows(&[[0.5, 0.4], [0.4, 0.5]]),
            1e-15
        ));
    }

    #[test]
    fn schmidt_reduced_state_rotates_to_plus_minus_frame() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let hadamard = ComplexMatrix::from_real_rows(&[[h, h], [h, -h]]);
        for l0 in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let reduced = schmidt_pair_state(l0, 1.0 - l0).unwrap().reduced_system();
            assert!(reduced
                .matrix()
                .approx_eq(&ComplexMatrix::diag_real(&[l0, 1.0 - l0]), 1e-15));
            let rotated = reduced.transform(&hadamard);
            let expected = system_state_plus_minus_basis(l0, 1.0 - l0).unwrap();
            assert!(rotated.matrix().approx_eq(expected.matrix(), 1e-15));
        }
    }

    #[test]
    fn random_pure_is_pure_and_deterministic() {
        let stream = RngStream::new(42, 0);
        let a = random_pure(2, &mut stream.generator());
        let b = random_pure(2, &mut stream.generator());
        assert_eq!(a, b);
        assert!((a.purity() - 1.0).abs() < 1e-10);
        let other = random_pure(2, &mut RngStream::new(42, 1).generator());
        assert_ne!(a, other);
    }

    #[test]
    fn random_pure_haar_first_moment() {
        // Haar average of ⟨0|ρ|0⟩ is 1/d.
        let mut rng = RngStream::new(11, 0).generator();
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| random_pure(2, &mut rng).matrix()[(0, 0)].re)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn random_mixed_properties() {
        let mut rng = RngStream::new(5, 0).generator();
        let pure = random_mixed(3, 1, &mut rng).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-10);
        for _ in 0..50 {
            let rho = random_mixed(3, 3, &mut rng).unwrap();
            assert!(*rho.eigen().values.last().unwrap() >= -TOL_PSD);
            assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
        }
        assert!(random_mixed(2, 0, &mut rng).is_err());
        assert!(random_mixed(2, 3, &mut rng).is_err());
    }

    #[test]
    fn hilbert_schmidt_mean_purity() {
        // Monte-Carlo oracle against the induced-measure moment 2d/(d²+1) = 0.8 at d = 2.
        let mut rng = RngStream::new(2024, 0).generator();
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| random_mixed(2, 2, &mut rng).unwrap().purity())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.8).abs() < 0.02, "mean purity {mean}");
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = RngStream::new(9, 3).generator();
        for d in 1..=6 {
            assert!(random_unitary(d, &mut rng).is_unitary(1e-12));
        }
        assert!(random_isometry(6, 2, &mut rng).is_isometry(1e-12));
    }

    #[test]
    fn rotated_reference_keeps_reduced_state() {
        let mut rng = RngStream::new(1, 1).generator();
        let rho = random_mixed(3, 3, &mut rng).unwrap();
        let psi = purify(&rho);
        let u = random_unitary(3, &mut rng);
        let rotated = psi.rotate_reference(&u).unwrap();
        assert!(rotated
            .reduced_system()
            .matrix()
            .approx_eq(rho.matrix(), 1e-12));
    }
}
