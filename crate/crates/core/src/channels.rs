//! Quantum channels in Kraus form.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{partial_trace, pauli, tensor, ComplexMatrix, ONE, ZERO};
use crate::measures::Basis;
use crate::states::{random_isometry, DensityMatrix, PureBipartiteState};

/// Which family a channel was built from. Measurement channels are the ones
/// whose environment dimension bounds C + D.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelKind {
    Identity,
    Unitary,
    WeakMeasurement,
    ProjectiveMeasurement,
    Depolarizing,
    AmplitudeDamping,
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
    Composite,
    Custom,
}

impl ChannelKind {
    pub fn is_measurement(self) -> bool {
        matches!(self, Self::WeakMeasurement | Self::ProjectiveMeasurement)
    }
}

#[derive(Clone, Debug)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    label: String,
    param: Option<f64>,
    kind: ChannelKind,
}

/// Stinespring isometry V = Σ_k K_k ⊗ |k⟩_E together with d_E.
#[derive(Clone, Debug)]
pub struct Dilation {
    pub isometry: ComplexMatrix,
    pub env_dim: usize,
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(format!(
            "{name} = {v} outside [0, 1]"
        )));
    }
    Ok(())
}

impl KrausChannel {
    /// Builds a channel from Kraus operators of equal shape. Trace preservation is not
    /// enforced here; see [`is_cptp`].
    pub fn new(kraus: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| {
            Error::InvalidArgument("a channel needs at least one Kraus operator".into())
        })?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if kraus
            .iter()
            .any(|k| k.rows() != dim_out || k.cols() != dim_in)
        {
            return Err(Error::DimensionMismatch(
                "Kraus operators differ in shape".into(),
            ));
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
            label: label.into(),
            param: None,
            kind: ChannelKind::Custom,
        })
    }

    fn built(
        kraus: Vec<ComplexMatrix>,
        label: &str,
        param: Option<f64>,
        kind: ChannelKind,
    ) -> Self {
        let mut ch = Self::new(kraus, label).expect("constructor produces consistent shapes");
        ch.param = param;
        ch.kind = kind;
        ch
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn param(&self) -> Option<f64> {
        self.param
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn is_measurement(&self) -> bool {
        self.kind.is_measurement()
    }

    pub fn with_label(mut self, label: impl Into<String>, param: Option<f64>) -> Self {
        self.label = label.into();
        self.param = param;
        self
    }

    /// Σ_j K_j ρ K_j†.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel `{}` takes dimension {}, state has {}",
                self.label,
                self.dim_in,
                rho.dim()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = &out + &k.conjugate(rho.matrix());
        }
        Ok(DensityMatrix::from_trusted(out))
    }

    /// (ℰ ⊗ I)(|Ψ⟩⟨Ψ|) with the channel acting on the first factor.
    pub fn apply_extended(&self, psi: &PureBipartiteState) -> Result<DensityMatrix> {
        let (ds, dr) = psi.dims();
        if ds != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel `{}` takes dimension {}, system factor has {ds}",
                self.label, self.dim_in
            )));
        }
        let n = self.dim_out * dr;
        let mut out = ComplexMatrix::zeros(n, n);
        let id = ComplexMatrix::identity(dr);
        for k in &self.kraus {
            let v = tensor(k, &id).matvec(psi.amplitudes());
            out = &out + &ComplexMatrix::projector(&v);
        }
        Ok(DensityMatrix::from_trusted(out))
    }

    /// Stinespring isometry V: C^{d_in} → C^{d_out} ⊗ C^{d_E}.
    pub fn dilation_isometry(&self) -> Dilation {
        let m = self.kraus.len();
        let mut v = ComplexMatrix::zeros(self.dim_out * m, self.dim_in);
        for (k, op) in self.kraus.iter().enumerate() {
            for o in 0..self.dim_out {
                for i in 0..self.dim_in {
                    v[(o * m + k, i)] = op[(o, i)];
                }
            }
        }
        Dilation {
            isometry: v,
            env_dim: m,
        }
    }

    /// Environment state W_jk = Tr(K_j ρ K_k†). Its entropy equals that of the extended output.
    pub fn environment_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel `{}` takes dimension {}, state has {}",
                self.label,
                self.dim_in,
                rho.dim()
            )));
        }
        let m = self.kraus.len();
        let images: Vec<ComplexMatrix> = self.kraus.iter().map(|k| k * rho.matrix()).collect();
        let mut w = ComplexMatrix::zeros(m, m);
        for j in 0..m {
            for k in 0..m {
                w[(j, k)] = (&images[j] * &self.kraus[k].adjoint()).trace();
            }
        }
        Ok(DensityMatrix::from_trusted(w))
    }

    /// ℰ₂ ∘ ℰ₁ (this channel applied first).
    pub fn then(&self, second: &KrausChannel) -> Result<KrausChannel> {
        if second.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose `{}` (out {}) with `{}` (in {})",
                self.label, self.dim_out, second.label, second.dim_in
            )));
        }
        let kraus = second
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .collect();
        Ok(Self::built(
            kraus,
            &format!("{}∘{}", second.label, self.label),
            None,
            ChannelKind::Composite,
        ))
    }

    /// ℰ_A ⊗ ℰ_B.
    pub fn product(&self, other: &KrausChannel) -> KrausChannel {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| tensor(a, b)))
            .collect();
        let kind = if self.kind == ChannelKind::Identity && other.kind == ChannelKind::Identity {
            ChannelKind::Identity
        } else {
            ChannelKind::Composite
        };
        Self::built(
            kraus,
            &format!("{}⊗{}", self.label, other.label),
            self.param.or(other.param),
            kind,
        )
    }

    /// The same channel written with the Kraus set {Σ_i u_ji K_i} for a unitary u.
    pub fn remix(&self, u: &ComplexMatrix) -> Result<KrausChannel> {
        let m = self.kraus.len();
        if u.rows() != m || u.cols() != m {
            return Err(Error::DimensionMismatch(format!(
                "remixing unitary is {}x{}, channel has {m} Kraus operators",
                u.rows(),
                u.cols()
            )));
        }
        let kraus = (0..m)
            .map(|j| {
                (0..m).fold(ComplexMatrix::zeros(self.dim_out, self.dim_in), |acc, i| {
                    &acc + &self.kraus[i].scale(u[(j, i)])
                })
            })
            .collect();
        Ok(Self::built(kraus, &self.label, self.param, self.kind))
    }
}

/// Σ K†K = I within `tol` in max-entry norm.
pub fn is_cptp(ch: &KrausChannel, tol: f64) -> bool {
    let mut sum = ComplexMatrix::zeros(ch.dim_in, ch.dim_in);
    for k in &ch.kraus {
        sum = &sum + &(&k.adjoint() * k);
    }
    sum.approx_eq(&ComplexMatrix::identity(ch.dim_in), tol)
}

/// Convenience wrapper for [`KrausChannel::apply`].
pub fn apply(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    ch.apply(rho)
}

pub fn apply_extended(ch: &KrausChannel, psi: &PureBipartiteState) -> Result<DensityMatrix> {
    ch.apply_extended(psi)
}

pub fn dilation_isometry(ch: &KrausChannel) -> Dilation {
    ch.dilation_isometry()
}

/// Applies a dilation and traces out the environment.
pub fn apply_via_dilation(dilation: &Dilation, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let joint = dilation.isometry.conjugate(rho.matrix());
    let d_out = joint.rows() / dilation.env_dim;
    Ok(DensityMatrix::from_trusted(partial_trace(
        &joint,
        &[d_out, dilation.env_dim],
        &[0],
    )?))
}

pub fn identity(d: usize) -> KrausChannel {
    KrausChannel::built(
        vec![ComplexMatrix::identity(d)],
        "identity",
        None,
        ChannelKind::Identity,
    )
}

pub fn unitary(u: ComplexMatrix) -> Result<KrausChannel> {
    if !u.is_unitary(1e-10) {
        return Err(Error::InvalidArgument(
            "unitary channel needs a unitary matrix".into(),
        ));
    }
    Ok(KrausChannel::built(
        vec![u],
        "unitary",
        None,
        ChannelKind::Unitary,
    ))
}

/// K(±x) = √((1∓x)/2) Π₀ + √((1±x)/2) Π₁ in the computational basis.
pub fn weak_measurement(x: f64) -> Result<KrausChannel> {
    check_unit_interval("measurement strength x", x)?;
    let lo = ((1.0 - x) / 2.0).sqrt();
    let hi = ((1.0 + x) / 2.0).sqrt();
    Ok(KrausChannel::built(
        vec![
            ComplexMatrix::diag_real(&[lo, hi]),
            ComplexMatrix::diag_real(&[hi, lo]),
        ],
        "weak",
        Some(x),
        ChannelKind::WeakMeasurement,
    ))
}

/// Rank-one projectors onto the frame kets.
pub fn projective_measurement(basis: &Basis) -> KrausChannel {
    let kraus = (0..basis.dim()).map(|i| basis.projector(i)).collect();
    KrausChannel::built(
        kraus,
        "projective",
        None,
        ChannelKind::ProjectiveMeasurement,
    )
}

/// ρ ↦ (1−p)ρ + p I/d.
///
/// For qubits the Kraus set is {√(1−3p/4) I, √(p/4) σ_x, √(p/4) σ_y, √(p/4) σ_z}; for d > 2
/// the identity weight is √(1−p+p/d²) and the remaining d²−1 Heisenberg–Weyl
/// displacements X^a Z^b carry √(p/d²).
pub fn depolarizing(p: f64, d: usize) -> Result<KrausChannel> {
    check_unit_interval("depolarizing probability p", p)?;
    if d < 2 {
        return Err(Error::UnsupportedDimension(format!(
            "depolarizing needs d >= 2, got {d}"
        )));
    }
    let kraus = if d == 2 {
        let w = (p / 4.0).sqrt();
        vec![
            ComplexMatrix::identity(2).scale_real((1.0 - 0.75 * p).sqrt()),
            pauli::x().scale_real(w),
            pauli::y().scale_real(w),
            pauli::z().scale_real(w),
        ]
    } else {
        let dd = (d * d) as f64;
        let mut ops = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let w = if a == 0 && b == 0 {
                    (1.0 - p + p / dd).sqrt()
                } else {
                    (p / dd).sqrt()
                };
                ops.push(weyl(d, a, b).scale_real(w));
            }
        }
        ops
    };
    Ok(KrausChannel::built(
        kraus,
        "depolarizing",
        Some(p),
        ChannelKind::Depolarizing,
    ))
}

/// Heisenberg–Weyl displacement X^a Z^b with X|j⟩ = |j+1⟩ and Z|j⟩ = ω^j|j⟩.
fn weyl(d: usize, a: usize, b: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        let angle = 2.0 * std::f64::consts::PI * (b * j) as f64 / d as f64;
        m[((j + a) % d, j)] = Complex64::from_polar(1.0, angle);
    }
    m
}

/// K₁ = √q |0⟩⟨1|, K₂ = |0⟩⟨0| + √(1−q) |1⟩⟨1|.
pub fn amplitude_damping(q: f64) -> Result<KrausChannel> {
    check_unit_interval("damping q", q)?;
    let k1 = ComplexMatrix::from_rows(&[[ZERO, Complex64::new(q.sqrt(), 0.0)], [ZERO, ZERO]]);
    let k2 =
        ComplexMatrix::from_rows(&[[ONE, ZERO], [ZERO, Complex64::new((1.0 - q).sqrt(), 0.0)]]);
    Ok(KrausChannel::built(
        vec![k1, k2],
        "amplitude-damping",
        Some(q),
        ChannelKind::AmplitudeDamping,
    ))
}

fn pauli_flip(
    p: f64,
    sigma: ComplexMatrix,
    label: &str,
    kind: ChannelKind,
) -> Result<KrausChannel> {
    check_unit_interval("flip probability p", p)?;
    Ok(KrausChannel::built(
        vec![
            ComplexMatrix::identity(2).scale_real((1.0 - p).sqrt()),
            sigma.scale_real(p.sqrt()),
        ],
        label,
        Some(p),
        kind,
    ))
}

pub fn bit_flip(p: f64) -> Result<KrausChannel> {
    pauli_flip(p, pauli::x(), "bit-flip", ChannelKind::BitFlip)
}

pub fn phase_flip(p: f64) -> Result<KrausChannel> {
    pauli_flip(p, pauli::z(), "phase-flip", ChannelKind::PhaseFlip)
}

pub fn bit_phase_flip(p: f64) -> Result<KrausChannel> {
    pauli_flip(p, pauli::y(), "bit-phase-flip", ChannelKind::BitPhaseFlip)
}

/// `ch` on subsystem `site` of a multipartite system, identity on the rest.
pub fn local(ch: &KrausChannel, dims: &[usize], site: usize) -> Result<KrausChannel> {
    if site >= dims.len() || dims[site] != ch.dim_in || ch.dim_in != ch.dim_out {
        return Err(Error::DimensionMismatch(format!(
            "cannot place `{}` on site {site} of {dims:?}",
            ch.label
        )));
    }
    let kraus = ch
        .kraus
        .iter()
        .map(|k| ComplexMatrix::embed(k, dims, site))
        .collect();
    let kind = if ch.kind == ChannelKind::Identity {
        ChannelKind::Identity
    } else {
        ChannelKind::Composite
    };
    Ok(KrausChannel::built(
        kraus,
        &format!("local-{}", ch.label),
        ch.param,
        kind,
    ))
}

/// A random channel on C^d with `m` Kraus operators, from a Haar-random isometry C^d → C^d ⊗ C^m.
pub fn random_channel<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> KrausChannel {
    let v = random_isometry(d * m, d, rng);
    let kraus = (0..m)
        .map(|k| {
            let mut op = ComplexMatrix::zeros(d, d);
            for o in 0..d {
                for i in 0..d {
                    op[(o, i)] = v[(o * m + k, i)];
                }
            }
            op
        })
        .collect();
    KrausChannel::built(kraus, "random", None, ChannelKind::Custom)
}
