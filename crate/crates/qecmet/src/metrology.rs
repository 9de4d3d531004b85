//! Closed-form Fisher-information quantities: mixed-state QFI, coherence
//! envelopes for unitary couplings, analytic outcome probabilities for
//! diagonal interactions, and the classical information of binomial mixtures.

use crate::model::HmmModel;
use crate::numkit::{herm_eig, hs_inner};
use crate::qec::MetrologyCode;
use crate::spans::env_block;
use crate::{C64, CMat, Error, Result};
use statrs::function::gamma::ln_gamma;

/// Eigenvalue-pair inclusion floor for the mixed-state QFI sum.
const QFI_PAIR_FLOOR: f64 = 1e-12;

/// Quantum Fisher information of a mixed state from its eigendecomposition:
/// 2 Σ |<γ_i|∂ρ|γ_j>|² / (γ_i + γ_j) over pairs with γ_i + γ_j > 0.
pub fn qfi_mixed(rho: &CMat, drho: &CMat) -> Result<f64> {
    if !drho.is_hermitian(1e-9) {
        return Err(Error::NotHermitian { deviation: drho.hermiticity_deviation() });
    }
    if rho.rows() != drho.rows() {
        return Err(Error::DimensionMismatch("state and derivative sizes differ".into()));
    }
    let es = herm_eig(rho)?;
    let v = &es.eigenvectors;
    let m = &(&v.dagger() * drho) * v;
    let n = rho.rows();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let denom = es.eigenvalues[i] + es.eigenvalues[j];
            if denom > QFI_PAIR_FLOOR {
                total += 2.0 * m[(i, j)].norm_sqr() / denom;
            }
        }
    }
    Ok(total)
}

/// Logical coherence envelope α(t) = Σ_m c̄_m e^{-i t φ_m} of a unitary
/// coupling, a finite almost periodic Fourier series.
#[derive(Clone, Debug)]
pub struct EnvelopeSeries {
    pub coefficients: Vec<C64>,
    pub frequencies: Vec<f64>,
}

impl EnvelopeSeries {
    pub fn alpha(&self, t: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (c, &f) in self.coefficients.iter().zip(&self.frequencies) {
            acc += c * C64::new(0.0, -f * t).exp();
        }
        acc
    }

    pub fn abs_alpha(&self, t: f64) -> f64 {
        self.alpha(t).norm()
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.len() != self.frequencies.len() {
            return Err(Error::DimensionMismatch("envelope term lists differ in length".into()));
        }
        let sum: C64 = self.coefficients.iter().sum();
        if sum.norm() > 0.5 + 1e-10 {
            return Err(Error::NumericalFault(format!("α(0) = {} exceeds 1/2", sum.norm())));
        }
        Ok(())
    }
}

/// Envelope of the corrected unitary protocol: eigenphases of the coupling
/// restricted to each codeword against the given environment state.
///
/// Requires a unitary model (no jump operators) with no environment signal.
pub fn envelope_alpha(
    model: &HmmModel,
    code: &MetrologyCode,
    env_state: &CMat,
) -> Result<EnvelopeSeries> {
    if !model.jumps.is_empty() {
        return Err(Error::InvalidInput("envelope requires a model without jump operators".into()));
    }
    if model.h_e.frob_norm() > 1e-12 {
        return Err(Error::InvalidInput("envelope requires no signal on the environment".into()));
    }
    if env_state.rows() != model.d_e || env_state.cols() != 1 {
        return Err(Error::DimensionMismatch("environment state shape".into()));
    }
    let d_e = model.d_e;
    let d_pa = code.d_p * code.d_a;
    let id_a = CMat::identity(code.d_a);
    let lifted = model.h_ep.kron(&id_a); // on E⊗(P⊗A)

    // environment-side blocks of the coupling restricted to each codeword
    let mut h_env = [CMat::zeros(d_e, d_e), CMat::zeros(d_e, d_e)];
    let basis: Vec<CMat> = (0..d_e).map(|i| CMat::ket(d_e, i)).collect();
    for n in 0..d_e {
        for m in 0..d_e {
            let block = env_block(&lifted, &basis[n], &basis[m], d_pa);
            for (idx, cw) in [&code.c0, &code.c1].into_iter().enumerate() {
                h_env[idx][(n, m)] = hs_inner(cw, &(&block * cw))?;
            }
        }
    }
    let es0 = herm_eig(&h_env[0])?;
    let es1 = herm_eig(&h_env[1])?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c0: Vec<C64> =
        (0..d_e).map(|k| hs_inner(&es0.eigenvector(k), env_state).unwrap() * r).collect();
    let c1: Vec<C64> =
        (0..d_e).map(|l| hs_inner(&es1.eigenvector(l), env_state).unwrap() * r).collect();

    let mut coefficients = Vec::with_capacity(d_e * d_e);
    let mut frequencies = Vec::with_capacity(d_e * d_e);
    for k in 0..d_e {
        for l in 0..d_e {
            let overlap = hs_inner(&es1.eigenvector(l), &es0.eigenvector(k))?;
            coefficients.push(c0[k] * c1[l].conj() * overlap);
            frequencies.push(es0.eigenvalues[k] - es1.eigenvalues[l]);
        }
    }
    let series = EnvelopeSeries { coefficients, frequencies };
    series.validate()?;
    Ok(series)
}

/// QFI of the enveloped protocol: 4 t² (Δλ)² |α(t)|².
pub fn qfi_envelope(series: &EnvelopeSeries, delta_lambda: f64, t: f64) -> f64 {
    let a = series.abs_alpha(t);
    4.0 * t * t * delta_lambda * delta_lambda * a * a
}

/// Grid times where |α| reaches the threshold, each refined by local
/// maximization of |α|. An empty result is a valid return.
pub fn find_revivals(
    series: &EnvelopeSeries,
    threshold: f64,
    window: (f64, f64),
    grid: usize,
) -> Result<Vec<f64>> {
    if grid < 2 {
        return Err(Error::InvalidInput("revival grid needs at least two points".into()));
    }
    if !(0.0 < threshold && threshold < 0.5) {
        return Err(Error::InvalidInput("revival threshold must lie in (0, 1/2)".into()));
    }
    let (t_min, t_max) = window;
    if t_max <= t_min {
        return Err(Error::InvalidInput("empty revival window".into()));
    }
    let step = (t_max - t_min) / (grid - 1) as f64;
    let mut out = Vec::new();
    for i in 0..grid {
        let t = t_min + step * i as f64;
        if series.abs_alpha(t) >= threshold {
            let lo = (t - step).max(t_min);
            let hi = (t + step).min(t_max);
            out.push(golden_max(|x| series.abs_alpha(x), lo, hi));
        }
    }
    Ok(out)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Analytic outcome probability of the corrected diagonal-interaction
/// protocol and its ω-derivative:
/// p = 1/2 + 1/2 e^{-Re(Γ)t} sin((Im(Γ) + ωΔλ)t).
pub fn diagonal_probability(gamma: C64, delta_lambda: f64, omega: f64, t: f64) -> (f64, f64) {
    let damp = (-gamma.re * t).exp();
    let phase = (gamma.im + omega * delta_lambda) * t;
    let p = 0.5 + 0.5 * damp * phase.sin();
    let dp = 0.5 * damp * delta_lambda * t * phase.cos();
    debug_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
    (p, dp)
}

/// Kraus pair of the logical dephasing channel accumulated over time t, in
/// the {|C0>, |C1>} basis.
pub fn logical_dephasing_kraus(gamma: C64, t: f64) -> (CMat, CMat) {
    let damp = (-gamma.re * t).exp();
    let w0 = ((1.0 + damp) / 2.0).sqrt();
    let w1 = ((1.0 - damp) / 2.0).sqrt();
    let half_phase = 0.5 * gamma.im * t;
    let rot = CMat::from_diag(&[
        C64::new(0.0, -half_phase).exp(),
        C64::new(0.0, half_phase).exp(),
    ]);
    let zbar = CMat::pauli_z();
    let a0 = rot.scale_re(w0);
    let a1 = (&zbar * &rot).scale_re(w1);
    (a0, a1)
}

/// Per-environment-branch logical rates Γ_i of the corrected
/// diagonal-interaction protocol: Γ_i = i(h₀ - h₁) + a_i with h_a the
/// codeword expectations of the coupling block and a_i the dephasing rate of
/// the jump blocks.
pub fn logical_noise_rates(
    model: &HmmModel,
    code: &MetrologyCode,
    env_basis: &[CMat],
) -> Result<Vec<C64>> {
    if env_basis.len() != model.d_e {
        return Err(Error::DimensionMismatch("environment basis size".into()));
    }
    let id_a = CMat::identity(code.d_a);
    let expect = |op_p: &CMat, cw: &CMat| -> Result<C64> {
        let lifted = op_p.kron(&id_a);
        hs_inner(cw, &(&lifted * cw))
    };
    let mut rates = Vec::with_capacity(model.d_e);
    for i in 0..model.d_e {
        let phi = &env_basis[i];
        let h_block = env_block(&model.h_ep, phi, phi, model.d_p);
        let h0 = expect(&h_block, &code.c0)?.re;
        let h1 = expect(&h_block, &code.c1)?.re;
        let mut a = C64::new(0.0, 0.0);
        for l in &model.jumps {
            let l_block = env_block(l, phi, phi, model.d_p);
            let ldl_block = &l_block.dagger() * &l_block;
            let n0 = expect(&ldl_block, &code.c0)?.re;
            let n1 = expect(&ldl_block, &code.c1)?.re;
            let l0 = expect(&l_block, &code.c0)?;
            let l1 = expect(&l_block, &code.c1)?;
            a += C64::new(0.5 * (n0 + n1), 0.0) - l0 * l1.conj();
        }
        rates.push(a + C64::new(0.0, h0 - h1));
    }
    Ok(rates)
}

/// A mixture Σ_i α_i Binom(N, p_i) of binomial outcome distributions with
/// per-component sensitivities ∂_ω p_i.
#[derive(Clone, Debug)]
pub struct BinomialMixture {
    weights: Vec<f64>,
    probs: Vec<f64>,
    dprobs: Vec<f64>,
}

impl BinomialMixture {
    /// Build from (weight, p, ∂_ω p) triples. Weights must be non-negative
    /// and sum to one; components with |p_i - p_j| < 1e-10 are merged.
    pub fn new(components: &[(f64, f64, f64)]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("empty mixture".into()));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        if components.iter().any(|c| c.0 < -1e-12) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("mixture weights must be a distribution".into()));
        }
        let mut weights: Vec<f64> = Vec::new();
        let mut probs: Vec<f64> = Vec::new();
        let mut dprobs: Vec<f64> = Vec::new();
        for &(w, p, dp) in components {
            if w <= 0.0 {
                continue;
            }
            if let Some(j) = probs.iter().position(|&q| (q - p).abs() < 1e-10) {
                // merged component: weights add, sensitivities average
                dprobs[j] = (weights[j] * dprobs[j] + w * dp) / (weights[j] + w);
                weights[j] += w;
            } else {
                weights.push(w);
                probs.push(p);
                dprobs.push(dp);
            }
        }
        Ok(Self { weights, probs, dprobs })
    }

    pub fn components(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.weights
            .iter()
            .zip(&self.probs)
            .zip(&self.dprobs)
            .map(|((&w, &p), &dp)| (w, p, dp))
    }

    /// Component with the largest success probability.
    pub fn dominant(&self) -> (f64, f64, f64) {
        let mut best = 0;
        for i in 1..self.probs.len() {
            if self.probs[i] > self.probs[best] {
                best = i;
            }
        }
        (self.weights[best], self.probs[best], self.dprobs[best])
    }
}

/// Exact Fisher information of a binomial mixture over n trials, summed over
/// all success counts with log-space probability evaluation.
pub fn binomial_mixture_fi(mix: &BinomialMixture, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    if mix.probs.iter().any(|&p| p <= 0.0 || p >= 1.0) {
        return Err(Error::InvalidInput("success probabilities must lie strictly in (0,1)".into()));
    }
    let nf = n as f64;
    let ln_binom = |k: f64| ln_gamma(nf + 1.0) - ln_gamma(k + 1.0) - ln_gamma(nf - k + 1.0);
    let mut total = 0.0;
    for n1 in 0..=n {
        let k = n1 as f64;
        let lb = ln_binom(k);
        // per-component log pmf weights
        let mut max_log = f64::NEG_INFINITY;
        let logs: Vec<f64> = mix
            .weights
            .iter()
            .zip(&mix.probs)
            .map(|(&w, &p)| {
                let l = w.ln() + lb + k * p.ln() + (nf - k) * (1.0 - p).ln();
                max_log = max_log.max(l);
                l
            })
            .collect();
        if max_log < -700.0 {
            continue; // tail beyond double-precision support
        }
        let mut prob = 0.0;
        let mut dprob = 0.0;
        for ((l, &p), &dp) in logs.iter().zip(&mix.probs).zip(&mix.dprobs) {
            let v = (l - max_log).exp();
            prob += v;
            dprob += v * dp * (k - nf * p) / (p * (1.0 - p));
        }
        if prob <= 0.0 {
            continue;
        }
        total += max_log.exp() * dprob * dprob / prob;
    }
    Ok(total)
}

/// Per-probe QFI of the commuting two-qubit dephasing model at dwell time t:
/// the probe state is a damped rotation of |+> mixed with identity.
pub fn dephasing_closed_form(t: f64) -> Result<f64> {
    let damp = (-2.0 * t).exp();
    let plus = CMat::col_vec(vec![
        C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    ]);
    let z = CMat::pauli_z();
    // rotation by the coupling at ω = 0 (QFI is ω-independent)
    let u = CMat::from_diag(&[C64::new(0.0, -t).exp(), C64::new(0.0, t).exp()]);
    let rotated = &u * &plus;
    let pure = CMat::outer(&rotated, &rotated);
    let rho = &pure.scale_re(damp) + &CMat::identity(2).scale_re((1.0 - damp) / 2.0);
    // ∂_ω ρ = -it e^{-2t} [Z, U|+><+|U†]
    let comm = &(&z * &pure) - &(&pure * &z);
    let drho = comm.scale(C64::new(0.0, -t * damp));
    qfi_mixed(&rho, &drho)
}
