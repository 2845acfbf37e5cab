//! Entropies, relative entropy, dephasing and coherence measures. All results are in bits.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{tensor, ComplexMatrix};
use crate::states::DensityMatrix;
use crate::tol::{TOL_PSD, TOL_SUPPORT_RHO, TOL_SUPPORT_SIGMA};

/// Values measured in bits (base-2 logarithms).
pub type Bits = f64;

/// An orthonormal reference frame; column `i` is the ket |i⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    frame: ComplexMatrix,
}

impl Basis {
    pub fn new(frame: ComplexMatrix) -> Result<Self> {
        if !frame.is_unitary(1e-10) {
            return Err(Error::InvalidArgument("basis frame is not unitary".into()));
        }
        Ok(Self { frame })
    }

    pub fn computational(d: usize) -> Self {
        Self {
            frame: ComplexMatrix::identity(d),
        }
    }

    /// {|+⟩, |−⟩}.
    pub fn plus_minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            frame: ComplexMatrix::from_real_rows(&[[h, h], [h, -h]]),
        }
    }

    /// The product frame {|i⟩ ⊗ |μ⟩}.
    pub fn product(a: &Basis, b: &Basis) -> Self {
        Self {
            frame: tensor(&a.frame, &b.frame),
        }
    }

    pub fn dim(&self) -> usize {
        self.frame.rows()
    }

    pub fn frame(&self) -> &ComplexMatrix {
        &self.frame
    }

    pub fn ket(&self, i: usize) -> Vec<Complex64> {
        self.frame.col(i)
    }

    /// |i⟩⟨i|.
    pub fn projector(&self, i: usize) -> ComplexMatrix {
        ComplexMatrix::projector(&self.ket(i))
    }

    /// Matrix elements ⟨i|M|j⟩ of `m` expressed in this frame.
    pub fn express(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &(&self.frame.adjoint() * m) * &self.frame
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "basis of dimension {} used with a {d}-dimensional state",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// −Σ p log₂ p over a probability vector, with 0·log 0 = 0.
pub fn shannon_entropy(probs: &[f64]) -> Bits {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Binary entropy h(p).
pub fn binary_entropy(p: f64) -> Bits {
    shannon_entropy(&[p, 1.0 - p])
}

fn clamp_spectrum(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            debug_assert!(v >= -TOL_PSD * 10.0, "eigenvalue {v} below PSD tolerance");
            v.clamp(0.0, 1.0)
        })
        .collect()
}

/// S(ρ) = −Tr ρ log₂ ρ.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Bits {
    shannon_entropy(&clamp_spectrum(&rho.eigen().values))
}

/// S(ρ‖σ) = Tr ρ (log₂ ρ − log₂ σ), evaluated in the eigenbasis of σ.
///
/// Returns `f64::INFINITY` when the support of ρ is not contained in the support of σ.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Bits> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "relative entropy of {}- and {}-dimensional states",
            rho.dim(),
            sigma.dim()
        )));
    }
    let eig = sigma.eigen();
    let mut cross = 0.0;
    for (k, &s) in eig.values.iter().enumerate() {
        let v = eig.vector(k);
        let weight = rho.matrix().sandwich(&v, &v).re;
        if s < TOL_SUPPORT_SIGMA {
            if weight > TOL_SUPPORT_RHO {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross -= weight * s.log2();
    }
    Ok((cross - von_neumann_entropy(rho)).max(0.0))
}

/// Deletes off-diagonal elements in the given frame: Σ_i |i⟩⟨i|ρ|i⟩⟨i|.
pub fn dephase(rho: &DensityMatrix, basis: &Basis) -> Result<DensityMatrix> {
    basis.check_dim(rho.dim())?;
    let d = rho.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        let ket = basis.ket(i);
        let p = rho.matrix().sandwich(&ket, &ket).re;
        out = &out + &ComplexMatrix::projector(&ket).scale_real(p);
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Populations ⟨i|ρ|i⟩ in the given frame.
pub fn populations(rho: &DensityMatrix, basis: &Basis) -> Result<Vec<f64>> {
    basis.check_dim(rho.dim())?;
    Ok((0..rho.dim())
        .map(|i| {
            let ket = basis.ket(i);
            rho.matrix().sandwich(&ket, &ket).re.max(0.0)
        })
        .collect())
}

/// Relative entropy of coherence C_r(ρ) = S(ρ^D) − S(ρ).
pub fn coherence_relative_entropy(rho: &DensityMatrix, basis: &Basis) -> Result<Bits> {
    let diag = populations(rho, basis)?;
    Ok((shannon_entropy(&diag) - von_neumann_entropy(rho)).max(0.0))
}

/// l1-norm coherence Σ_{i≠j} |ρ_ij|.
pub fn coherence_l1(rho: &DensityMatrix, basis: &Basis) -> Result<f64> {
    basis.check_dim(rho.dim())?;
    let m = basis.express(rho.matrix());
    let d = rho.dim();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                total += m[(i, j)].norm();
            }
        }
    }
    Ok(total)
}
