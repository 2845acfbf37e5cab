//! Coherent information, disturbance, mutual information, discord and the
//! relative entropy of entanglement.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::matrix::{hermitian_eig, tensor, tensor_vec, ComplexMatrix, ZERO};
use crate::measures::{relative_entropy, shannon_entropy, von_neumann_entropy, Bits};
use crate::optimize::{nelder_mead, NelderMeadConfig};
use crate::states::{purify, DensityMatrix, RngStream};
use crate::tol::TOL_CLAMP;

/// Largest d_A·d_B accepted by the entanglement solver.
pub const ER_DIMENSION_CAP: usize = 16;

/// Sets values in [−TOL_CLAMP, 0) to zero; anything more negative is left visible.
pub fn clamp_nonnegative(v: f64) -> f64 {
    if (-TOL_CLAMP..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

/// I_c = S(ℰ(ρ)) − S((ℰ⊗I)|Ψ⟩⟨Ψ|) with |Ψ⟩ a purification of ρ.
pub fn coherent_information(rho: &DensityMatrix, ch: &KrausChannel) -> Result<Bits> {
    let out = ch.apply(rho)?;
    let extended = ch.apply_extended(&purify(rho))?;
    Ok(von_neumann_entropy(&out) - von_neumann_entropy(&extended))
}

/// D(ρ, ℰ) = S(ρ) − I_c(ρ, ℰ).
pub fn disturbance(rho: &DensityMatrix, ch: &KrausChannel) -> Result<Bits> {
    let ic = coherent_information(rho, ch)?;
    Ok(clamp_nonnegative(von_neumann_entropy(rho) - ic))
}

/// Disturbance of a channel acting on the whole of A⊗B; the reference purifies ρ_AB.
pub fn disturbance_bipartite(
    rho_ab: &DensityMatrix,
    dims: (usize, usize),
    ch: &KrausChannel,
) -> Result<Bits> {
    check_bipartite(rho_ab, dims)?;
    if ch.dim_in() != dims.0 * dims.1 {
        return Err(Error::DimensionMismatch(format!(
            "channel `{}` acts on dimension {}, bipartite system has {}",
            ch.label(),
            ch.dim_in(),
            dims.0 * dims.1
        )));
    }
    disturbance(rho_ab, ch)
}

fn check_bipartite(rho_ab: &DensityMatrix, dims: (usize, usize)) -> Result<()> {
    if dims.0 * dims.1 != rho_ab.dim() {
        return Err(Error::DimensionMismatch(format!(
            "dims {dims:?} do not fit a {}-dimensional state",
            rho_ab.dim()
        )));
    }
    Ok(())
}

fn marginals(
    rho_ab: &DensityMatrix,
    dims: (usize, usize),
) -> Result<(DensityMatrix, DensityMatrix)> {
    check_bipartite(rho_ab, dims)?;
    let d = [dims.0, dims.1];
    Ok((rho_ab.reduce(&d, &[0])?, rho_ab.reduce(&d, &[1])?))
}

/// I(A:B) = S(ρ_A) + S(ρ_B) − S(ρ_AB).
pub fn mutual_information(rho_ab: &DensityMatrix, dims: (usize, usize)) -> Result<Bits> {
    let (a, b) = marginals(rho_ab, dims)?;
    Ok((von_neumann_entropy(&a) + von_neumann_entropy(&b) - von_neumann_entropy(rho_ab)).max(0.0))
}

/// S(ρ_AB ‖ ρ_A ⊗ ρ_B), an upper bound on the relative entropy of entanglement.
pub fn er_upper_bound_product(rho_ab: &DensityMatrix, dims: (usize, usize)) -> Result<Bits> {
    let (a, b) = marginals(rho_ab, dims)?;
    relative_entropy(rho_ab, &a.tensor(&b))
}

// ---------------------------------------------------------------------------
// Discord

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DiscordConfig {
    /// Points per angle in the seeding grid.
    pub grid: usize,
    /// Parameter tolerance of the simplex refinement.
    pub xtol: f64,
}

impl Default for DiscordConfig {
    fn default() -> Self {
        Self {
            grid: 32,
            xtol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscordSolution {
    pub value: Bits,
    /// Bloch angles (θ, φ) of the optimal measurement direction on B.
    pub measurement_angles: (f64, f64),
    pub refinement_iterations: usize,
}

/// Measurement kets on a qubit for Bloch angles (θ, φ).
fn qubit_measurement(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    [
        [Complex64::new(c, 0.0), e * s],
        [-e.conj() * s, Complex64::new(c, 0.0)],
    ]
}

/// S(A | {Π_i^B}) = Σ_i p_i S(ρ_{A|i}) for a projective measurement on the qubit B.
pub fn conditional_entropy_after_measurement(
    rho_ab: &DensityMatrix,
    d_a: usize,
    theta: f64,
    phi: f64,
) -> Bits {
    let m = rho_ab.matrix();
    let mut total = 0.0;
    for ket in qubit_measurement(theta, phi) {
        let mut cond = ComplexMatrix::zeros(d_a, d_a);
        for a in 0..d_a {
            for a2 in 0..d_a {
                let mut acc = ZERO;
                for (b, kb) in ket.iter().enumerate() {
                    for (b2, kb2) in ket.iter().enumerate() {
                        acc += kb.conj() * m[(a * 2 + b, a2 * 2 + b2)] * kb2;
                    }
                }
                cond[(a, a2)] = acc;
            }
        }
        let p = cond.trace().re;
        if p <= 1e-14 {
            continue;
        }
        let eig = hermitian_eig(&cond.hermitian_part().scale_real(1.0 / p))
            .expect("Hermitian by construction");
        let spectrum: Vec<f64> = eig.values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        total += p * shannon_entropy(&spectrum);
    }
    total
}

/// Quantum discord with projective measurements on a qubit B.
pub fn quantum_discord(rho_ab: &DensityMatrix, dims: (usize, usize)) -> Result<DiscordSolution> {
    quantum_discord_with(rho_ab, dims, &DiscordConfig::default())
}

pub fn quantum_discord_with(
    rho_ab: &DensityMatrix,
    dims: (usize, usize),
    config: &DiscordConfig,
) -> Result<DiscordSolution> {
    check_bipartite(rho_ab, dims)?;
    if dims.1 != 2 {
        return Err(Error::UnsupportedDimension(format!(
            "discord needs a qubit B, got d_B = {}",
            dims.1
        )));
    }
    let (_, rho_b) = marginals(rho_ab, dims)?;
    let base = von_neumann_entropy(&rho_b) - von_neumann_entropy(rho_ab);
    let cond =
        |theta: f64, phi: f64| conditional_entropy_after_measurement(rho_ab, dims.0, theta, phi);

    let n = config.grid.max(2);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..n {
        let theta = PI * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let phi = 2.0 * PI * j as f64 / n as f64;
            let v = cond(theta, phi);
            if v < best.0 {
                best = (v, theta, phi);
            }
        }
    }
    let nm = NelderMeadConfig {
        initial_step: PI / (n - 1) as f64 / 2.0,
        xtol: config.xtol,
        max_iterations: 2_000,
    };
    let refined = nelder_mead(|x| cond(x[0], x[1]), &[best.1, best.2], &nm);
    let (cond_min, angles) = if refined.value < best.0 {
        (refined.value, (refined.x[0], refined.x[1]))
    } else {
        (best.0, (best.1, best.2))
    };
    Ok(DiscordSolution {
        value: clamp_nonnegative(base + cond_min).max(0.0),
        measurement_angles: angles,
        refinement_iterations: refined.iterations,
    })
}

// ---------------------------------------------------------------------------
// Relative entropy of entanglement

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ErConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop a restart once the gradient norm falls below this.
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for ErConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iterations: 4_000,
            grad_tol: 1e-9,
            seed: 0x0E5A_5EED,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ERSolution {
    pub value: Bits,
    /// Explicit convex mixture of product states attaining `value`.
    pub closest_separable: DensityMatrix,
    pub mixture_size: usize,
    pub restarts_used: usize,
}

/// Mixture Σ_m softmax(z)_m |a_m⟩⟨a_m| ⊗ |b_m⟩⟨b_m| with unnormalized complex a_m, b_m.
#[derive(Clone, Debug)]
struct SeparableParams {
    logits: Vec<f64>,
    a: Vec<Vec<Complex64>>,
    b: Vec<Vec<Complex64>>,
}

impl SeparableParams {
    fn weights(&self) -> Vec<f64> {
        let max = self
            .logits
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = self.logits.iter().map(|z| (z - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / total).collect()
    }

    fn components(&self) -> Vec<Vec<Complex64>> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| tensor_vec(&normalized(a), &normalized(b)))
            .collect()
    }

    fn sigma(&self) -> ComplexMatrix {
        let n = self.a[0].len() * self.b[0].len();
        self.weights()
            .iter()
            .zip(self.components())
            .fold(ComplexMatrix::zeros(n, n), |acc, (p, psi)| {
                &acc + &ComplexMatrix::projector(&psi).scale_real(*p)
            })
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = self.logits.clone();
        for v in self.a.iter().chain(&self.b) {
            for z in v {
                out.push(z.re);
                out.push(z.im);
            }
        }
        out
    }

    fn unflatten(&self, flat: &[f64]) -> Self {
        let k = self.logits.len();
        let mut it = flat[k..]
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]));
        let mut take = |len: usize| -> Vec<Complex64> { (&mut it).take(len).collect() };
        let a = self.a.iter().map(|v| take(v.len())).collect();
        let b = self.b.iter().map(|v| take(v.len())).collect();
        Self {
            logits: flat[..k].to_vec(),
            a,
            b,
        }
    }
}

fn normalized(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter().map(|z| z / n).collect()
}

/// −Tr ρ log₂ σ and its gradient with respect to the flattened parameters.
struct CrossEntropy<'a> {
    rho: &'a ComplexMatrix,
    dims: (usize, usize),
}

impl CrossEntropy<'_> {
    fn value(&self, params: &SeparableParams) -> f64 {
        let sigma = params.sigma();
        let eig = hermitian_eig(&sigma.hermitian_part()).expect("Hermitian");
        let mut acc = 0.0;
        for (k, &s) in eig.values.iter().enumerate() {
            let v = eig.vector(k);
            let w = self.rho.sandwich(&v, &v).re;
            if w <= 1e-15 {
                continue;
            }
            if s <= 1e-300 {
                return f64::INFINITY;
            }
            acc -= w * s.log2();
        }
        acc
    }

    fn value_and_gradient(&self, params: &SeparableParams) -> (f64, Vec<f64>) {
        let (da, db) = self.dims;
        let n = da * db;
        let sigma = params.sigma();
        let eig = hermitian_eig(&sigma.hermitian_part()).expect("Hermitian");
        let s: Vec<f64> = eig.values.iter().map(|&v| v.max(1e-300)).collect();
        // ρ in σ's eigenbasis.
        let r = &(&eig.vectors.adjoint() * self.rho) * &eig.vectors;
        let mut value = 0.0;
        for k in 0..n {
            let w = r[(k, k)].re;
            if w > 1e-15 {
                value -= w * s[k].log2();
            }
        }
        // G = −(1/ln 2) Σ_kl r_kl f'(s_k, s_l) |k⟩⟨l|, the derivative of −Tr ρ log σ.
        let mut g_eig = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            for l in 0..n {
                let div = if (s[k] - s[l]).abs() <= 1e-12 * s[k].max(s[l]) {
                    2.0 / (s[k] + s[l])
                } else {
                    (s[k].ln() - s[l].ln()) / (s[k] - s[l])
                };
                g_eig[(k, l)] = r[(k, l)] * (-div / LN_2);
            }
        }
        let g = eig.vectors.conjugate(&g_eig);

        let weights = params.weights();
        let kcount = weights.len();
        let mut grad = vec![0.0; params.flatten().len()];
        let mut gm = vec![0.0; kcount];
        let mut vec_grads_a = Vec::with_capacity(kcount);
        let mut vec_grads_b = Vec::with_capacity(kcount);
        for m in 0..kcount {
            let a_hat = normalized(&params.a[m]);
            let b_hat = normalized(&params.b[m]);
            let psi = tensor_vec(&a_hat, &b_hat);
            let g_psi = g.matvec(&psi);
            gm[m] = psi
                .iter()
                .zip(&g_psi)
                .map(|(x, y)| x.conj() * y)
                .sum::<Complex64>()
                .re;
            // Partial contractions: G_A â = (I⊗⟨b̂|) G ψ, G_B b̂ = (⟨â|⊗I) G ψ.
            let mut ga = vec![ZERO; da];
            let mut gb = vec![ZERO; db];
            for i in 0..da {
                for j in 0..db {
                    let entry = g_psi[i * db + j];
                    ga[i] += b_hat[j].conj() * entry;
                    gb[j] += a_hat[i].conj() * entry;
                }
            }
            let na = params.a[m].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let nb = params.b[m].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let pa: Vec<Complex64> = ga
                .iter()
                .zip(&a_hat)
                .map(|(x, y)| (x - y * gm[m]) * (2.0 * weights[m] / na))
                .collect();
            let pb: Vec<Complex64> = gb
                .iter()
                .zip(&b_hat)
                .map(|(x, y)| (x - y * gm[m]) * (2.0 * weights[m] / nb))
                .collect();
            vec_grads_a.push(pa);
            vec_grads_b.push(pb);
        }
        let mean: f64 = weights.iter().zip(&gm).map(|(p, g)| p * g).sum();
        for m in 0..kcount {
            grad[m] = weights[m] * (gm[m] - mean);
        }
        let mut pos = kcount;
        for v in vec_grads_a.iter().chain(&vec_grads_b) {
            for z in v {
                grad[pos] = z.re;
                grad[pos + 1] = z.im;
                pos += 2;
            }
        }
        (value, grad)
    }
}

fn descend(
    objective: &CrossEntropy<'_>,
    start: SeparableParams,
    config: &ErConfig,
) -> (f64, SeparableParams) {
    let mut params = start;
    let mut x = params.flatten();
    let (mut fx, mut grad) = objective.value_and_gradient(&params);
    let mut step = 1.0;
    for _ in 0..config.max_iterations {
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2.sqrt() < config.grad_tol || !fx.is_finite() {
            break;
        }
        let mut accepted = false;
        while step > 1e-14 {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - step * gi).collect();
            let cand = params.unflatten(&trial);
            let f_trial = objective.value(&cand);
            if f_trial <= fx - 1e-4 * step * gnorm2 {
                x = trial;
                params = cand;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let (f_new, g_new) = objective.value_and_gradient(&params);
        let improvement = fx - f_new;
        fx = f_new;
        grad = g_new;
        step *= 2.0;
        if improvement.abs() < 1e-15 * fx.abs().max(1.0) {
            break;
        }
    }
    (fx, params)
}

fn random_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    (0..d)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Variational upper bound on min_σ S(ρ‖σ) over separable σ.
///
/// σ is a mixture of (d_A·d_B)² product pure states. Every restart contains the
/// eigen-decomposition of ρ_A ⊗ ρ_B among its components; the product of marginals
/// itself is also kept as a candidate, so the result never exceeds I(A:B).
pub fn relative_entropy_entanglement(
    rho_ab: &DensityMatrix,
    dims: (usize, usize),
) -> Result<ERSolution> {
    relative_entropy_entanglement_with(rho_ab, dims, &ErConfig::default())
}

pub fn relative_entropy_entanglement_with(
    rho_ab: &DensityMatrix,
    dims: (usize, usize),
    config: &ErConfig,
) -> Result<ERSolution> {
    check_bipartite(rho_ab, dims)?;
    let n = dims.0 * dims.1;
    if n > ER_DIMENSION_CAP {
        return Err(Error::DimensionCap(format!(
            "d_A·d_B = {n} exceeds {ER_DIMENSION_CAP}"
        )));
    }
    let k = n * n;
    let (rho_a, rho_b) = marginals(rho_ab, dims)?;
    let product = rho_a.tensor(&rho_b);
    let mut best_value = relative_entropy(rho_ab, &product)?;
    let mut best_sigma = product;

    let ea = rho_a.eigen();
    let eb = rho_b.eigen();
    let objective = CrossEntropy {
        rho: rho_ab.matrix(),
        dims,
    };
    let entropy = von_neumann_entropy(rho_ab);

    for restart in 0..config.restarts {
        let mut rng = RngStream::new(config.seed, restart as u64).generator();
        let mut logits = Vec::with_capacity(k);
        let mut a = Vec::with_capacity(k);
        let mut b = Vec::with_capacity(k);
        for i in 0..dims.0 {
            for j in 0..dims.1 {
                let w = (ea.values[i] * eb.values[j]).max(1e-12);
                logits.push(w.ln());
                a.push(ea.vector(i));
                b.push(eb.vector(j));
            }
        }
        for _ in n..k {
            let z: f64 = rng.sample(StandardNormal);
            logits.push(if restart == 0 {
                -30.0
            } else {
                z - (n as f64).ln()
            });
            a.push(random_vector(dims.0, &mut rng));
            b.push(random_vector(dims.1, &mut rng));
        }
        let start = SeparableParams { logits, a, b };
        let (_, params) = descend(&objective, start, config);
        let sigma = DensityMatrix::from_trusted(params.sigma());
        let value = relative_entropy(rho_ab, &sigma)?;
        debug_assert!(
            value.is_infinite() || (value - (objective.value(&params) - entropy)).abs() < 1e-6
        );
        if value < best_value {
            best_value = value;
            best_sigma = sigma;
        }
    }

    Ok(ERSolution {
        value: clamp_nonnegative(best_value).max(0.0),
        closest_separable: best_sigma,
        mixture_size: k,
        restarts_used: config.restarts,
    })
}

/// Product of the two reduced states, a separable state always available as a witness.
pub fn product_of_marginals(rho_ab: &DensityMatrix, dims: (usize, usize)) -> Result<DensityMatrix> {
    let (a, b) = marginals(rho_ab, dims)?;
    Ok(DensityMatrix::from_trusted(tensor(a.matrix(), b.matrix())))
}
