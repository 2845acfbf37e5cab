//! Coherence–disturbance trade-off relations, closed-form oracles for the
//! Schmidt-family examples, and the seeded Monte-Carlo sweep.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{
    amplitude_damping, bit_flip, bit_phase_flip, depolarizing, identity, local, phase_flip,
    projective_measurement, weak_measurement, KrausChannel,
};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::measures::{coherence_relative_entropy, von_neumann_entropy, Basis, Bits};
use crate::quantities::{
    disturbance, disturbance_bipartite, er_upper_bound_product, quantum_discord,
    relative_entropy_entanglement,
};
use crate::states::{
    random_mixed, schmidt_pair_state, system_state_plus_minus_basis, DensityMatrix, RngStream,
};
use crate::tol::TOL_RESIDUAL;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// 2C + D ≤ 2 log₂ d.
    Single,
    /// C + D ≤ log₂ d_E for measurement channels.
    Measurement,
    /// C + E_R + D ≤ 2 log₂ d_AB.
    BipartiteEntanglement,
    /// C + Q_D + D ≤ 2 log₂ d_AB.
    BipartiteDiscord,
}

impl Relation {
    pub const ALL: [Relation; 4] = [
        Relation::Single,
        Relation::Measurement,
        Relation::BipartiteEntanglement,
        Relation::BipartiteDiscord,
    ];

    pub fn coherence_weight(self) -> f64 {
        match self {
            Relation::Single => 2.0,
            _ => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Relation::Single => "single",
            Relation::Measurement => "measurement",
            Relation::BipartiteEntanglement => "bipartite-entanglement",
            Relation::BipartiteDiscord => "bipartite-discord",
        }
    }

    pub fn is_bipartite(self) -> bool {
        matches!(
            self,
            Relation::BipartiteEntanglement | Relation::BipartiteDiscord
        )
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Relation::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown relation `{s}`")))
    }
}

/// How the entanglement term of the bipartite relation is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErMode {
    /// S(ρ_AB ‖ ρ_A⊗ρ_B) = I(A:B), an upper bound on E_R.
    #[default]
    Certified,
    /// The variational estimate of E_R.
    Variational,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub relation: Relation,
    pub lhs: Bits,
    pub bound: Bits,
    /// bound − lhs.
    pub residual: Bits,
    pub satisfied: bool,
    /// Terms exactly as they enter the left-hand side (the coherence term carries its weight).
    pub components: BTreeMap<String, Bits>,
}

impl InequalityReport {
    fn new(relation: Relation, bound: Bits, terms: &[(&str, Bits)]) -> Self {
        let components: BTreeMap<String, Bits> =
            terms.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let lhs = terms.iter().map(|(_, v)| v).sum::<f64>();
        let residual = bound - lhs;
        Self {
            relation,
            lhs,
            bound,
            residual,
            satisfied: residual >= -TOL_RESIDUAL,
            components,
        }
    }
}

fn coherence_key(relation: Relation) -> &'static str {
    if relation.coherence_weight() == 2.0 {
        "2C"
    } else {
        "C"
    }
}

pub fn check_single(
    rho: &DensityMatrix,
    ch: &KrausChannel,
    basis: &Basis,
) -> Result<InequalityReport> {
    let c = coherence_relative_entropy(rho, basis)?;
    let d = disturbance(rho, ch)?;
    let bound = 2.0 * (rho.dim() as f64).log2();
    Ok(InequalityReport::new(
        Relation::Single,
        bound,
        &[(coherence_key(Relation::Single), 2.0 * c), ("D", d)],
    ))
}

/// The environment of a measurement channel has one level per Kraus operator.
pub fn check_measurement_channel(
    rho: &DensityMatrix,
    ch: &KrausChannel,
    basis: &Basis,
) -> Result<InequalityReport> {
    if !ch.is_measurement() {
        return Err(Error::NotMeasurementChannel(ch.label().to_string()));
    }
    let c = coherence_relative_entropy(rho, basis)?;
    let d = disturbance(rho, ch)?;
    let bound = (ch.dilation_isometry().env_dim as f64).log2();
    Ok(InequalityReport::new(
        Relation::Measurement,
        bound,
        &[("C", c), ("D", d)],
    ))
}

pub fn check_bipartite_entanglement(
    rho_ab: &DensityMatrix,
    dims: (usize, usize),
    ch: &KrausChannel,
    basis: &Basis,
    mode: ErMode,
) -> Result<InequalityReport> {
    let c = coherence_relative_entropy(rho_ab, basis)?;
    let (key, e) = match mode {
        ErMode::Certified => ("I_AB", er_upper_bound_product(rho_ab, dims)?),
        ErMode::Variational => ("E_R", relative_entropy_entanglement(rho_ab, dims)?.value),
    };
    let d = disturbance_bipartite(rho_ab, dims, ch)?;
    let bound = 2.0 * ((dims.0 * dims.1) as f64).log2();
    Ok(InequalityReport::new(
        Relation::BipartiteEntanglement,
        bound,
        &[("C", c), (key, e), ("D", d)],
    ))
}

pub fn check_bipartite_discord(
    rho_ab: &DensityMatrix,
    dims: (usize, usize),
    ch: &KrausChannel,
    basis: &Basis,
) -> Result<InequalityReport> {
    let c = coherence_relative_entropy(rho_ab, basis)?;
    let q = quantum_discord(rho_ab, dims)?.value;
    let d = disturbance_bipartite(rho_ab, dims, ch)?;
    let bound = 2.0 * ((dims.0 * dims.1) as f64).log2();
    Ok(InequalityReport::new(
        Relation::BipartiteDiscord,
        bound,
        &[("C", c), ("Q_D", q), ("D", d)],
    ))
}

// ---------------------------------------------------------------------------
// Closed forms for the Schmidt family √λ₀|00⟩ + √λ₁|11⟩

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

fn clamped_sqrt(v: f64) -> f64 {
    v.max(0.0).sqrt()
}

/// Coherence of the system state in the {|+⟩, |−⟩} frame.
pub fn coherence_closed_form(lambda0: f64, lambda1: f64) -> Bits {
    let c = lambda0 - lambda1;
    1.0 + xlog2x(0.5 * (1.0 + c)) + xlog2x(0.5 * (1.0 - c))
}

pub fn disturbance_weak_closed_form(lambda0: f64, lambda1: f64, x: f64) -> Bits {
    let c = lambda0 - lambda1;
    let s = clamped_sqrt(1.0 - x * x);
    let r = clamped_sqrt(1.0 - 4.0 * lambda0 * lambda1 * x * x);
    -xlog2x(0.5 * (1.0 + c)) - xlog2x(0.5 * (1.0 - c))
        + xlog2x(0.5 - 0.5 * c * s)
        + xlog2x(0.5 + 0.5 * c * s)
        - xlog2x(0.5 * (1.0 - r))
        - xlog2x(0.5 * (1.0 + r))
}

pub fn disturbance_depolarizing_closed_form(lambda0: f64, lambda1: f64, p: f64) -> Bits {
    let c = lambda0 - lambda1;
    let u = 1.0 - 0.5 * p;
    let r = clamped_sqrt(u * u - 4.0 * lambda0 * lambda1 * (p - 0.75 * p * p));
    -xlog2x(0.5 * (1.0 + c)) - xlog2x(0.5 * (1.0 - c))
        + xlog2x(0.5 - 0.5 * c * (1.0 - p))
        + xlog2x(0.5 + 0.5 * c * (1.0 - p))
        - xlog2x(0.5 * p * lambda0)
        - xlog2x(0.5 * p * lambda1)
        - xlog2x(0.5 * (u + r))
        - xlog2x(0.5 * (u - r))
}

/// Both readings of the amplitude-damping expression: as printed, the last logarithm
/// takes (1 + √·); the corrected reading takes ½(1 + √·) like its partner term.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AmplitudeDampingClosedForm {
    pub printed: Bits,
    pub corrected: Bits,
}

pub fn disturbance_ad_closed_form(
    lambda0: f64,
    lambda1: f64,
    q: f64,
) -> AmplitudeDampingClosedForm {
    let c = lambda0 - lambda1;
    let r = clamped_sqrt(q * q + c * c * (1.0 - q));
    let common = -xlog2x(0.5 * (1.0 + c))
        - xlog2x(0.5 * (1.0 - c))
        - xlog2x(1.0 - q * lambda1)
        - xlog2x(q * lambda1)
        + xlog2x(0.5 * (1.0 - r));
    let plus = 0.5 * (1.0 + r);
    let printed_tail = if plus > 0.0 {
        plus * (1.0 + r).log2()
    } else {
        0.0
    };
    AmplitudeDampingClosedForm {
        printed: common + printed_tail,
        corrected: common + xlog2x(plus),
    }
}

/// Which 2×2 matrix the general definition is evaluated on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchmidtReading {
    /// The physical reduced state diag(λ₀, λ₁); Kraus operators in the computational
    /// frame, coherence in the {|+⟩, |−⟩} frame.
    Physical,
    /// ½[[1, λ₀−λ₁], [λ₀−λ₁, 1]] taken as computational-basis coordinates.
    PlusMinusCoordinates,
    /// Channel output from the ± coordinates, extended state from the physical
    /// Schmidt vector. Not a consistent definition; kept to explain the printed formulas.
    MixedFrame,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedFormFamily {
    Weak,
    Depolarizing,
    AmplitudeDamping,
}

impl ClosedFormFamily {
    fn channel(self, param: f64) -> Result<KrausChannel> {
        match self {
            ClosedFormFamily::Weak => weak_measurement(param),
            ClosedFormFamily::Depolarizing => depolarizing(param, 2),
            ClosedFormFamily::AmplitudeDamping => amplitude_damping(param),
        }
    }
}

/// The general-definition disturbance for a Schmidt-family state under one reading.
pub fn schmidt_family_disturbance(
    family: ClosedFormFamily,
    lambda0: f64,
    lambda1: f64,
    param: f64,
    reading: SchmidtReading,
) -> Result<Bits> {
    let ch = family.channel(param)?;
    let physical = schmidt_pair_state(lambda0, lambda1)?.reduced_system();
    let coords = system_state_plus_minus_basis(lambda0, lambda1)?;
    match reading {
        SchmidtReading::Physical => disturbance(&physical, &ch),
        SchmidtReading::PlusMinusCoordinates => disturbance(&coords, &ch),
        SchmidtReading::MixedFrame => {
            let out = ch.apply(&coords)?;
            let env = ch.environment_state(&physical)?;
            Ok(von_neumann_entropy(&physical) - von_neumann_entropy(&out)
                + von_neumann_entropy(&env))
        }
    }
}

/// The general-definition coherence in the {|+⟩, |−⟩} frame for the physical state.
pub fn schmidt_family_coherence(lambda0: f64, lambda1: f64) -> Result<Bits> {
    let physical = schmidt_pair_state(lambda0, lambda1)?.reduced_system();
    coherence_relative_entropy(&physical, &Basis::plus_minus())
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormCheck {
    pub name: String,
    /// Max |closed form − general definition| over the grid, per reading.
    pub max_deviation_physical: f64,
    pub max_deviation_plus_minus: f64,
    pub max_deviation_mixed_frame: f64,
    /// Grid point (λ₀, param) of the worst deviation against the physical reading.
    pub worst_point: (f64, f64),
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormReport {
    pub grid: usize,
    pub tolerance: f64,
    pub checks: Vec<ClosedFormCheck>,
    /// Which amplitude-damping variant agrees with the general definition, if any.
    pub amplitude_damping_variant: Option<String>,
    pub passed: bool,
}

pub const CLOSED_FORM_TOL: f64 = 1e-8;

/// Compares every closed form against the general definitions on the
/// (grid+1)×(grid+1) lattice λ₀, param ∈ {0, 1/grid, …, 1}.
pub fn verify_closed_forms(grid: usize) -> Result<ClosedFormReport> {
    if grid == 0 {
        return Err(Error::InvalidArgument(
            "closed-form grid must be at least 1".into(),
        ));
    }
    let points: Vec<f64> = (0..=grid).map(|i| i as f64 / grid as f64).collect();
    type Formula = Box<dyn Fn(f64, f64, f64) -> f64>;
    let cases: Vec<(&str, Option<ClosedFormFamily>, Formula)> = vec![
        (
            "coherence",
            None,
            Box::new(|l0, l1, _| coherence_closed_form(l0, l1)),
        ),
        (
            "weak",
            Some(ClosedFormFamily::Weak),
            Box::new(disturbance_weak_closed_form),
        ),
        (
            "depolarizing",
            Some(ClosedFormFamily::Depolarizing),
            Box::new(disturbance_depolarizing_closed_form),
        ),
        (
            "amplitude-damping (printed)",
            Some(ClosedFormFamily::AmplitudeDamping),
            Box::new(|l0, l1, q| disturbance_ad_closed_form(l0, l1, q).printed),
        ),
        (
            "amplitude-damping (corrected)",
            Some(ClosedFormFamily::AmplitudeDamping),
            Box::new(|l0, l1, q| disturbance_ad_closed_form(l0, l1, q).corrected),
        ),
    ];

    let mut checks = Vec::new();
    for (name, family, formula) in &cases {
        let mut dev = [0.0f64; 3];
        let mut worst_point = (0.0, 0.0);
        for &l0 in &points {
            let l1 = 1.0 - l0;
            let params: &[f64] = if family.is_some() {
                &points
            } else {
                &points[..1]
            };
            for &param in params {
                let closed = formula(l0, l1, param);
                let general = match family {
                    None => {
                        let g = schmidt_family_coherence(l0, l1)?;
                        [g, g, g]
                    }
                    Some(fam) => [
                        schmidt_family_disturbance(*fam, l0, l1, param, SchmidtReading::Physical)?,
                        schmidt_family_disturbance(
                            *fam,
                            l0,
                            l1,
                            param,
                            SchmidtReading::PlusMinusCoordinates,
                        )?,
                        schmidt_family_disturbance(
                            *fam,
                            l0,
                            l1,
                            param,
                            SchmidtReading::MixedFrame,
                        )?,
                    ],
                };
                for (k, g) in general.iter().enumerate() {
                    let delta = (closed - g).abs();
                    if k == 0 && delta > dev[0] {
                        worst_point = (l0, param);
                    }
                    dev[k] = dev[k].max(delta);
                }
            }
        }
        checks.push(ClosedFormCheck {
            name: name.to_string(),
            max_deviation_physical: dev[0],
            max_deviation_plus_minus: dev[1],
            max_deviation_mixed_frame: dev[2],
            worst_point,
            matches: dev[0] < CLOSED_FORM_TOL,
        });
    }

    let amplitude_damping_variant = checks
        .iter()
        .filter(|c| c.name.starts_with("amplitude-damping") && c.matches)
        .map(|c| c.name.clone())
        .next();
    let passed = checks
        .iter()
        .filter(|c| !c.name.starts_with("amplitude-damping"))
        .all(|c| c.matches)
        && amplitude_damping_variant.is_some();
    Ok(ClosedFormReport {
        grid,
        tolerance: CLOSED_FORM_TOL,
        checks,
        amplitude_damping_variant,
        passed,
    })
}

// ---------------------------------------------------------------------------
// Sweeps

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelFamily {
    Identity,
    Weak,
    Projective,
    Depolarizing,
    AmplitudeDamping,
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
    /// Qubit depolarizing on A only.
    LocalDepolarizing,
    /// Depolarizing on the whole of A⊗B.
    GlobalDepolarizing,
    /// Independent depolarizing on A and on B.
    ProductDepolarizing,
}

impl ChannelFamily {
    pub const ALL: [ChannelFamily; 11] = [
        ChannelFamily::Identity,
        ChannelFamily::Weak,
        ChannelFamily::Projective,
        ChannelFamily::Depolarizing,
        ChannelFamily::AmplitudeDamping,
        ChannelFamily::BitFlip,
        ChannelFamily::PhaseFlip,
        ChannelFamily::BitPhaseFlip,
        ChannelFamily::LocalDepolarizing,
        ChannelFamily::GlobalDepolarizing,
        ChannelFamily::ProductDepolarizing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelFamily::Identity => "identity",
            ChannelFamily::Weak => "weak",
            ChannelFamily::Projective => "projective",
            ChannelFamily::Depolarizing => "depolarizing",
            ChannelFamily::AmplitudeDamping => "amplitude-damping",
            ChannelFamily::BitFlip => "bit-flip",
            ChannelFamily::PhaseFlip => "phase-flip",
            ChannelFamily::BitPhaseFlip => "bit-phase-flip",
            ChannelFamily::LocalDepolarizing => "local-depolarizing",
            ChannelFamily::GlobalDepolarizing => "global-depolarizing",
            ChannelFamily::ProductDepolarizing => "product-depolarizing",
        }
    }

    fn qubit_only(self) -> bool {
        matches!(
            self,
            ChannelFamily::Weak
                | ChannelFamily::AmplitudeDamping
                | ChannelFamily::BitFlip
                | ChannelFamily::PhaseFlip
                | ChannelFamily::BitPhaseFlip
        )
    }

    fn qubit_channel(self, param: f64) -> Result<KrausChannel> {
        match self {
            ChannelFamily::Weak => weak_measurement(param),
            ChannelFamily::AmplitudeDamping => amplitude_damping(param),
            ChannelFamily::BitFlip => bit_flip(param),
            ChannelFamily::PhaseFlip => phase_flip(param),
            ChannelFamily::BitPhaseFlip => bit_phase_flip(param),
            ChannelFamily::Depolarizing | ChannelFamily::LocalDepolarizing => {
                depolarizing(param, 2)
            }
            _ => unreachable!("not a qubit family"),
        }
    }

    /// The channel at `param` for a single system of dimension `dim`.
    pub fn single(self, param: f64, dim: usize) -> Result<KrausChannel> {
        match self {
            ChannelFamily::Identity => Ok(identity(dim)),
            ChannelFamily::Projective => Ok(projective_measurement(&Basis::computational(dim))),
            ChannelFamily::Depolarizing => depolarizing(param, dim),
            f if f.qubit_only() => {
                if dim != 2 {
                    return Err(Error::UnsupportedDimension(format!(
                        "{} acts on qubits, got d = {dim}",
                        f.name()
                    )));
                }
                f.qubit_channel(param)
            }
            f => Err(Error::InvalidArgument(format!(
                "{} needs a bipartite system",
                f.name()
            ))),
        }
    }

    /// The channel at `param` acting on A⊗B. Qubit families act on A alone.
    pub fn bipartite(self, param: f64, dims: (usize, usize)) -> Result<KrausChannel> {
        let d = dims.0 * dims.1;
        match self {
            ChannelFamily::Identity => Ok(identity(d)),
            ChannelFamily::Projective => Ok(projective_measurement(&Basis::computational(d))),
            ChannelFamily::Depolarizing | ChannelFamily::GlobalDepolarizing => {
                depolarizing(param, d)
            }
            ChannelFamily::ProductDepolarizing => {
                Ok(depolarizing(param, dims.0)?.product(&depolarizing(param, dims.1)?))
            }
            f => {
                if dims.0 != 2 {
                    return Err(Error::UnsupportedDimension(format!(
                        "{} acts on a qubit A, got d_A = {}",
                        f.name(),
                        dims.0
                    )));
                }
                local(&f.qubit_channel(param)?, &[dims.0, dims.1], 0)
            }
        }
    }
}

impl fmt::Display for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChannelFamily::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown channel family `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisChoice {
    /// Random HS states, coherence in the computational frame.
    #[default]
    Computational,
    /// Random HS states, coherence in the {|+⟩, |−⟩} frame (on each qubit).
    PlusMinus,
    /// States diag(λ₀, 1−λ₀) on an even λ₀ grid, coherence in the {|+⟩, |−⟩} frame.
    SchmidtFamily,
}

impl BasisChoice {
    pub const ALL: [BasisChoice; 3] = [
        BasisChoice::Computational,
        BasisChoice::PlusMinus,
        BasisChoice::SchmidtFamily,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisChoice::Computational => "computational",
            BasisChoice::PlusMinus => "plus-minus",
            BasisChoice::SchmidtFamily => "schmidt-family",
        }
    }
}

impl FromStr for BasisChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BasisChoice::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown basis `{s}`")))
    }
}

/// `steps` evenly spaced points from `start` to `stop` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl ParamGrid {
    pub fn new(start: f64, stop: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidArgument(
                "parameter grid needs at least one step".into(),
            ));
        }
        if !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidArgument(
                "parameter grid bounds must be finite".into(),
            ));
        }
        Ok(Self { start, stop, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|j| {
                if j + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * j as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub relation: Relation,
    pub channel: ChannelFamily,
    pub grid: ParamGrid,
    /// Total Hilbert-space dimension; 4 means 2×2 for bipartite relations.
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub basis: BasisChoice,
    pub er_mode: ErMode,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        ParamGrid::new(self.grid.start, self.grid.stop, self.grid.steps)?;
        if self.samples == 0 {
            return Err(Error::InvalidArgument(
                "sample count must be at least 1".into(),
            ));
        }
        if self.relation.is_bipartite() {
            if self.dim != 4 {
                return Err(Error::UnsupportedDimension(format!(
                    "bipartite relations run on 2×2 systems (dim 4), got {}",
                    self.dim
                )));
            }
        } else if !(self.dim == 2 || self.dim == 3) {
            return Err(Error::UnsupportedDimension(format!(
                "single-system relations run on d ∈ {{2, 3}}, got {}",
                self.dim
            )));
        }
        if self.relation == Relation::Measurement
            && !matches!(
                self.channel,
                ChannelFamily::Weak | ChannelFamily::Projective
            )
        {
            return Err(Error::NotMeasurementChannel(
                self.channel.name().to_string(),
            ));
        }
        if self.basis != BasisChoice::Computational && self.dim == 3 {
            return Err(Error::UnsupportedDimension(
                "the ± frame is defined for qubits".into(),
            ));
        }
        if self.basis == BasisChoice::SchmidtFamily && self.dim != 2 {
            return Err(Error::UnsupportedDimension(
                "the Schmidt family lives on a qubit".into(),
            ));
        }
        // Build one channel up front so family/dimension mismatches fail before sampling.
        self.channel_at(self.grid.start)?;
        Ok(())
    }

    fn dims(&self) -> (usize, usize) {
        (2, self.dim / 2)
    }

    pub fn channel_at(&self, param: f64) -> Result<KrausChannel> {
        if self.relation.is_bipartite() {
            self.channel.bipartite(param, self.dims())
        } else {
            self.channel.single(param, self.dim)
        }
    }

    fn coherence_basis(&self) -> Basis {
        match (self.basis, self.dim) {
            (BasisChoice::Computational, d) => Basis::computational(d),
            (_, 4) => Basis::product(&Basis::plus_minus(), &Basis::plus_minus()),
            _ => Basis::plus_minus(),
        }
    }

    /// The state for a sample index; random draws use stream `sample_id` of `seed`.
    pub fn state(&self, sample_id: usize) -> Result<DensityMatrix> {
        match self.basis {
            BasisChoice::SchmidtFamily => {
                let l0 = if self.samples == 1 {
                    0.5
                } else {
                    sample_id as f64 / (self.samples - 1) as f64
                };
                schmidt_pair_state(l0, 1.0 - l0).map(|s| s.reduced_system())
            }
            _ => {
                let mut rng = RngStream::new(self.seed, sample_id as u64).generator();
                random_mixed(self.dim, self.dim, &mut rng)
            }
        }
    }

    /// Evaluates the configured relation for one state and channel.
    pub fn evaluate(&self, rho: &DensityMatrix, ch: &KrausChannel) -> Result<InequalityReport> {
        let terms = self.state_terms(rho)?;
        self.evaluate_with(rho, ch, &terms)
    }

    /// The channel-independent terms of the left-hand side.
    fn state_terms(&self, rho: &DensityMatrix) -> Result<Vec<(&'static str, Bits)>> {
        let c = coherence_relative_entropy(rho, &self.coherence_basis())?;
        let mut terms = vec![(
            coherence_key(self.relation),
            self.relation.coherence_weight() * c,
        )];
        match (self.relation, self.er_mode) {
            (Relation::BipartiteEntanglement, ErMode::Certified) => {
                terms.push(("I_AB", er_upper_bound_product(rho, self.dims())?))
            }
            (Relation::BipartiteEntanglement, ErMode::Variational) => terms.push((
                "E_R",
                relative_entropy_entanglement(rho, self.dims())?.value,
            )),
            (Relation::BipartiteDiscord, _) => {
                terms.push(("Q_D", quantum_discord(rho, self.dims())?.value))
            }
            _ => {}
        }
        Ok(terms)
    }

    fn evaluate_with(
        &self,
        rho: &DensityMatrix,
        ch: &KrausChannel,
        state_terms: &[(&'static str, Bits)],
    ) -> Result<InequalityReport> {
        let (d, bound) = match self.relation {
            Relation::Single => (disturbance(rho, ch)?, 2.0 * (self.dim as f64).log2()),
            Relation::Measurement => {
                if !ch.is_measurement() {
                    return Err(Error::NotMeasurementChannel(ch.label().to_string()));
                }
                (
                    disturbance(rho, ch)?,
                    (ch.dilation_isometry().env_dim as f64).log2(),
                )
            }
            _ => (
                disturbance_bipartite(rho, self.dims(), ch)?,
                2.0 * (self.dim as f64).log2(),
            ),
        };
        let mut terms = state_terms.to_vec();
        terms.push(("D", d));
        Ok(InequalityReport::new(self.relation, bound, &terms))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub sample_id: usize,
    pub d: usize,
    pub channel_label: String,
    pub channel_param: f64,
    /// Unweighted coherence.
    pub coherence: Bits,
    pub disturbance: Bits,
    /// "bound", "coherence_weight" and any relation-specific terms.
    pub extra_terms: BTreeMap<String, f64>,
    pub residual: Bits,
    pub seed: u64,
}

impl SweepRecord {
    /// bound − (w·C + D + other terms), recomputed from the stored values.
    pub fn recomputed_residual(&self) -> f64 {
        let weight = self
            .extra_terms
            .get("coherence_weight")
            .copied()
            .unwrap_or(1.0);
        let bound = self.extra_terms.get("bound").copied().unwrap_or(f64::NAN);
        let others: f64 = self
            .extra_terms
            .iter()
            .filter(|(k, _)| *k != "bound" && *k != "coherence_weight")
            .map(|(_, v)| v)
            .sum();
        bound - (weight * self.coherence + self.disturbance + others)
    }
}

/// Row-major complex entries as [re, im] pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixPayload {
    pub dim: usize,
    #[serde(alias = "state")]
    pub entries: Vec<[f64; 2]>,
}

impl MatrixPayload {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            dim: m.rows(),
            entries: m.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let data = self
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        ComplexMatrix::from_vec(self.dim, self.dim, data)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelPayload {
    pub label: String,
    pub param: Option<f64>,
    pub kraus: Vec<KrausPayload>,
}

/// A d_out × d_in Kraus operator, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausPayload {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl ChannelPayload {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            label: ch.label().to_string(),
            param: ch.param(),
            kraus: ch
                .kraus()
                .iter()
                .map(|k| KrausPayload {
                    rows: k.rows(),
                    cols: k.cols(),
                    entries: k.as_slice().iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
        }
    }

    pub fn to_channel(&self) -> Result<KrausChannel> {
        let kraus = self
            .kraus
            .iter()
            .map(|k| {
                let data = k
                    .entries
                    .iter()
                    .map(|[re, im]| Complex64::new(*re, *im))
                    .collect();
                ComplexMatrix::from_vec(k.rows, k.cols, data)
            })
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::new(kraus, self.label.clone())
    }
}

/// Everything needed to replay a violated inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub state: MatrixPayload,
    pub channel: ChannelPayload,
    pub relation: Relation,
    pub lhs: Bits,
    pub bound: Bits,
    pub sample_id: usize,
    pub seed: u64,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} relation fails for sample {} (seed {}) under `{}`: lhs {:.12} > bound {:.12}",
            self.relation, self.sample_id, self.seed, self.channel.label, self.lhs, self.bound
        )
    }
}

fn record(
    config: &SweepConfig,
    sample_id: usize,
    ch: &KrausChannel,
    param: f64,
    report: &InequalityReport,
) -> SweepRecord {
    let weight = config.relation.coherence_weight();
    let coherence = report.components[coherence_key(config.relation)] / weight;
    let disturbance = report.components["D"];
    let mut extra_terms: BTreeMap<String, f64> = report
        .components
        .iter()
        .filter(|(k, _)| !matches!(k.as_str(), "C" | "2C" | "D"))
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    extra_terms.insert("bound".into(), report.bound);
    extra_terms.insert("coherence_weight".into(), weight);
    SweepRecord {
        sample_id,
        d: config.dim,
        channel_label: ch.label().to_string(),
        channel_param: param,
        coherence,
        disturbance,
        extra_terms,
        residual: report.residual,
        seed: config.seed,
    }
}

/// Evaluates every (sample, parameter) cell; records come back ordered by sample id,
/// then parameter. The first violation in that order aborts the sweep with a
/// [`Counterexample`].
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let params = config.grid.values();
    let channels = params
        .iter()
        .map(|&p| config.channel_at(p))
        .collect::<Result<Vec<_>>>()?;

    let per_sample: Vec<Vec<(SweepRecord, InequalityReport)>> = (0..config.samples)
        .into_par_iter()
        .map(|sample_id| {
            let rho = config.state(sample_id)?;
            let terms = config.state_terms(&rho)?;
            params
                .iter()
                .zip(&channels)
                .map(|(&p, ch)| {
                    let report = config.evaluate_with(&rho, ch, &terms)?;
                    Ok((record(config, sample_id, ch, p, &report), report))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::with_capacity(config.samples * params.len());
    for (sample_id, row) in per_sample.into_iter().enumerate() {
        for (j, (rec, report)) in row.into_iter().enumerate() {
            if !report.satisfied {
                let rho = config.state(sample_id)?;
                return Err(Error::Counterexample(Box::new(Counterexample {
                    state: MatrixPayload::from_matrix(rho.matrix()),
                    channel: ChannelPayload::from_channel(&channels[j]),
                    relation: config.relation,
                    lhs: report.lhs,
                    bound: report.bound,
                    sample_id,
                    seed: config.seed,
                })));
            }
            records.push(rec);
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::unitary;
    use crate::states::random_unitary;

    fn half() -> DensityMatrix {
        DensityMatrix::maximally_mixed(2)
    }

    fn bell() -> DensityMatrix {
        schmidt_pair_state(0.5, 0.5).unwrap().density()
    }

    fn lhs_matches_components(r: &InequalityReport) {
        let sum: f64 = r.components.values().sum();
        assert!((sum - r.lhs).abs() < 1e-10);
        assert!((r.bound - r.lhs - r.residual).abs() < 1e-15);
    }

    #[test]
    fn single_relation_is_tight_at_full_strength() {
        let comp = Basis::computational(2);
        for ch in [
            depolarizing(1.0, 2).unwrap(),
            amplitude_damping(1.0).unwrap(),
        ] {
            let r = check_single(&half(), &ch, &comp).unwrap();
            lhs_matches_components(&r);
            assert!((r.lhs - 2.0).abs() < 1e-10);
            assert!(r.residual.abs() < 1e-9 && r.satisfied);
        }
    }

    #[test]
    fn single_relation_unitary_has_no_disturbance() {
        let mut rng = RngStream::new(21, 0).generator();
        let rho = random_mixed(3, 3, &mut rng).unwrap();
        let u = unitary(random_unitary(3, &mut rng)).unwrap();
        let r = check_single(&rho, &u, &Basis::computational(3)).unwrap();
        assert!(r.components["D"].abs() < 1e-9);
        assert!(r.satisfied);
    }

    #[test]
    fn measurement_relation() {
        let pm = projective_measurement(&Basis::computational(2));
        let r = check_measurement_channel(&half(), &pm, &Basis::computational(2)).unwrap();
        lhs_matches_components(&r);
        assert!((r.lhs - 1.0).abs() < 1e-10 && (r.bound - 1.0).abs() < 1e-15);
        let mut rng = RngStream::new(22, 0).generator();
        let rho = random_mixed(2, 2, &mut rng).unwrap();
        let r = check_measurement_channel(
            &rho,
            &weak_measurement(0.0).unwrap(),
            &Basis::computational(2),
        )
        .unwrap();
        assert!(r.components["D"].abs() < 1e-9 && r.lhs <= 1.0);
        assert!(matches!(
            check_measurement_channel(
                &rho,
                &depolarizing(0.2, 2).unwrap(),
                &Basis::computational(2)
            ),
            Err(Error::NotMeasurementChannel(_))
        ));
    }

    #[test]
    fn bipartite_relations_on_bell() {
        let basis = Basis::computational(4);
        let r =
            check_bipartite_entanglement(&bell(), (2, 2), &identity(4), &basis, ErMode::Certified)
                .unwrap();
        lhs_matches_components(&r);
        assert!((r.components["C"] - 1.0).abs() < 1e-10);
        assert!((r.components["I_AB"] - 2.0).abs() < 1e-10);
        assert!((r.lhs - 3.0).abs() < 1e-9 && (r.bound - 4.0).abs() < 1e-12);
        let r = check_bipartite_discord(&bell(), (2, 2), &identity(4), &basis).unwrap();
        lhs_matches_components(&r);
        assert!((r.lhs - 2.0).abs() < 3e-3);
        let mixed = DensityMatrix::maximally_mixed(4);
        let r = check_bipartite_entanglement(
            &mixed,
            (2, 2),
            &depolarizing(1.0, 4).unwrap(),
            &basis,
            ErMode::Variational,
        )
        .unwrap();
        assert!(r.components["C"].abs() < 1e-10 && r.components["E_R"] < 1e-6);
        assert!(r.lhs <= 4.0 + 1e-8);
    }

    #[test]
    fn closed_form_spot_values() {
        assert!(coherence_closed_form(0.5, 0.5).abs() < 1e-15);
        assert!((coherence_closed_form(1.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((coherence_closed_form(0.9, 0.1) - 0.5310044064107188).abs() < 1e-12);
        assert!(disturbance_weak_closed_form(0.9, 0.1, 0.0).abs() < 1e-12);
        assert!((disturbance_weak_closed_form(0.5, 0.5, 1.0) - 1.0).abs() < 1e-12);
        assert!(disturbance_depolarizing_closed_form(0.7, 0.3, 0.0).abs() < 1e-12);
        assert!((disturbance_depolarizing_closed_form(0.5, 0.5, 1.0) - 2.0).abs() < 1e-12);
        let ad = disturbance_ad_closed_form(0.7, 0.3, 0.0);
        assert!(ad.corrected.abs() < 1e-12);
        // Frozen values from an independent evaluation of the printed expressions.
        assert!((disturbance_weak_closed_form(0.9, 0.1, 0.5) - 0.008377).abs() < 1e-6);
    }

    #[test]
    fn coherence_closed_form_matches_general_definition() {
        for i in 0..=20 {
            let l0 = i as f64 / 20.0;
            let g = schmidt_family_coherence(l0, 1.0 - l0).unwrap();
            assert!((coherence_closed_form(l0, 1.0 - l0) - g).abs() < 1e-10);
        }
    }

    #[test]
    fn depolarizing_closed_form_matches_both_readings() {
        for i in 0..=10 {
            for j in 0..=10 {
                let (l0, p) = (i as f64 / 10.0, j as f64 / 10.0);
                let closed = disturbance_depolarizing_closed_form(l0, 1.0 - l0, p);
                for reading in [
                    SchmidtReading::Physical,
                    SchmidtReading::PlusMinusCoordinates,
                ] {
                    let g = schmidt_family_disturbance(
                        ClosedFormFamily::Depolarizing,
                        l0,
                        1.0 - l0,
                        p,
                        reading,
                    )
                    .unwrap();
                    assert!(
                        (closed - g).abs() < 1e-9,
                        "({l0}, {p}) {reading:?}: {closed} vs {g}"
                    );
                }
            }
        }
    }

    #[test]
    fn printed_weak_and_corrected_ad_forms_follow_the_mixed_frame() {
        for i in 1..10 {
            for j in 0..=10 {
                let (l0, x) = (i as f64 / 10.0, j as f64 / 10.0);
                let w = schmidt_family_disturbance(
                    ClosedFormFamily::Weak,
                    l0,
                    1.0 - l0,
                    x,
                    SchmidtReading::MixedFrame,
                )
                .unwrap();
                assert!((disturbance_weak_closed_form(l0, 1.0 - l0, x) - w).abs() < 1e-9);
                let a = schmidt_family_disturbance(
                    ClosedFormFamily::AmplitudeDamping,
                    l0,
                    1.0 - l0,
                    x,
                    SchmidtReading::MixedFrame,
                )
                .unwrap();
                assert!((disturbance_ad_closed_form(l0, 1.0 - l0, x).corrected - a).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn general_definition_frozen_values() {
        let phys = schmidt_family_disturbance(
            ClosedFormFamily::Weak,
            0.9,
            0.1,
            0.5,
            SchmidtReading::Physical,
        )
        .unwrap();
        let coords = schmidt_family_disturbance(
            ClosedFormFamily::Weak,
            0.9,
            0.1,
            0.5,
            SchmidtReading::PlusMinusCoordinates,
        )
        .unwrap();
        assert!((phys - 0.158133).abs() < 1e-6, "{phys}");
        assert!((coords - 0.204823).abs() < 1e-6, "{coords}");
    }

    #[test]
    fn verify_report_shape() {
        let report = verify_closed_forms(4).unwrap();
        assert_eq!(report.checks.len(), 5);
        let by_name = |n: &str| report.checks.iter().find(|c| c.name == n).unwrap();
        assert!(by_name("coherence").matches);
        assert!(by_name("depolarizing").matches);
        assert!(!by_name("weak").matches);
        assert!(by_name("weak").max_deviation_mixed_frame < 1e-9);
        assert!(!report.passed);
        assert!(verify_closed_forms(0).is_err());
    }

    #[test]
    fn param_grid_values() {
        assert_eq!(ParamGrid::new(0.0, 1.0, 1).unwrap().values(), vec![0.0]);
        let v = ParamGrid::new(0.0, 1.0, 11).unwrap().values();
        assert_eq!(v.len(), 11);
        assert_eq!(v[10], 1.0);
        assert!((v[3] - 0.3).abs() < 1e-15);
        assert!(ParamGrid::new(0.0, 1.0, 0).is_err());
    }

    fn config(
        relation: Relation,
        channel: ChannelFamily,
        dim: usize,
        samples: usize,
    ) -> SweepConfig {
        SweepConfig {
            relation,
            channel,
            grid: ParamGrid::new(0.0, 1.0, 5).unwrap(),
            dim,
            samples,
            seed: 7,
            basis: BasisChoice::Computational,
            er_mode: ErMode::Certified,
        }
    }

    #[test]
    fn sweep_is_ordered_and_reproducible() {
        let cfg = config(Relation::Single, ChannelFamily::Depolarizing, 2, 40);
        let a = sweep(&cfg).unwrap();
        let b = sweep(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 200);
        for (n, r) in a.iter().enumerate() {
            assert_eq!(r.sample_id, n / 5);
            assert!((r.recomputed_residual() - r.residual).abs() < 1e-10);
            assert!(r.residual >= -1e-8);
        }
    }

    #[test]
    fn sweep_relations_hold() {
        for (rel, fam, dim) in [
            (Relation::Measurement, ChannelFamily::Weak, 2),
            (Relation::Single, ChannelFamily::Depolarizing, 3),
            (Relation::Single, ChannelFamily::AmplitudeDamping, 2),
            (
                Relation::BipartiteEntanglement,
                ChannelFamily::LocalDepolarizing,
                4,
            ),
            (
                Relation::BipartiteDiscord,
                ChannelFamily::ProductDepolarizing,
                4,
            ),
        ] {
            let recs = sweep(&config(rel, fam, dim, 10)).unwrap();
            assert!(recs.iter().all(|r| r.residual >= -1e-8), "{rel} {fam}");
        }
    }

    #[test]
    fn sweep_records_agree_with_the_checkers() {
        let cfg = config(
            Relation::BipartiteDiscord,
            ChannelFamily::LocalDepolarizing,
            4,
            3,
        );
        let recs = sweep(&cfg).unwrap();
        let basis = Basis::computational(4);
        for r in &recs {
            let rho = cfg.state(r.sample_id).unwrap();
            let ch = cfg.channel_at(r.channel_param).unwrap();
            let direct = check_bipartite_discord(&rho, (2, 2), &ch, &basis).unwrap();
            assert!((direct.residual - r.residual).abs() < 1e-12);
        }
        let cfg = config(Relation::Single, ChannelFamily::BitFlip, 2, 3);
        for r in &sweep(&cfg).unwrap() {
            let rho = cfg.state(r.sample_id).unwrap();
            let ch = cfg.channel_at(r.channel_param).unwrap();
            let direct = check_single(&rho, &ch, &Basis::computational(2)).unwrap();
            assert!((direct.residual - r.residual).abs() < 1e-12);
        }
    }

    #[test]
    fn schmidt_family_sweep_reaches_the_weak_bound() {
        let mut cfg = config(Relation::Measurement, ChannelFamily::Weak, 2, 11);
        cfg.basis = BasisChoice::SchmidtFamily;
        let recs = sweep(&cfg).unwrap();
        let best = recs
            .iter()
            .map(|r| r.coherence + r.disturbance)
            .fold(0.0, f64::max);
        assert!((best - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sweep_rejects_bad_configs() {
        assert!(sweep(&config(
            Relation::Measurement,
            ChannelFamily::Depolarizing,
            2,
            5
        ))
        .is_err());
        assert!(sweep(&config(
            Relation::Single,
            ChannelFamily::AmplitudeDamping,
            3,
            5
        ))
        .is_err());
        assert!(sweep(&config(
            Relation::BipartiteDiscord,
            ChannelFamily::Identity,
            2,
            5
        ))
        .is_err());
        assert!(sweep(&config(Relation::Single, ChannelFamily::Depolarizing, 2, 0)).is_err());
    }

    #[test]
    fn counterexample_payload_round_trips() {
        let mut rng = RngStream::new(23, 0).generator();
        let rho = random_mixed(2, 2, &mut rng).unwrap();
        let ch = amplitude_damping(0.3).unwrap();
        let cx = Counterexample {
            state: MatrixPayload::from_matrix(rho.matrix()),
            channel: ChannelPayload::from_channel(&ch),
            relation: Relation::Single,
            lhs: 2.5,
            bound: 2.0,
            sample_id: 3,
            seed: 9,
        };
        let json = serde_json::to_string(&cx).unwrap();
        let back: Counterexample = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cx);
        assert!(back.state.to_matrix().unwrap().approx_eq(rho.matrix(), 0.0));
        let replay = back.channel.to_channel().unwrap();
        assert!(replay
            .apply(&rho)
            .unwrap()
            .matrix()
            .approx_eq(ch.apply(&rho).unwrap().matrix(), 1e-15));
    }
}
