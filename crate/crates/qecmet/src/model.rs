//! The hidden-Markov master-equation model and its exact propagation.
//!
//! States live on environment ⊗ probe ⊗ auxiliary. The generator is built as
//! a dense superoperator acting on column-stacked vectorizations (ket index
//! fastest), in which A·ρ·B† becomes (B̄ ⊗ A)·vec(ρ). Propagation
//! exponentiates the block-triangular augmented generator
//! [[L, 0], [∂_ω L, L]], so parameter sensitivities are exact rather than
//! finite-differenced.

use crate::numkit::{expm, herm_eig};
use crate::{C64, CMat, Error, Result};

/// Master-equation specification: signal ω·G on the probe, optional signal
/// ω·H_E on the environment, coupling H_EP and jump operators on
/// environment ⊗ probe. The auxiliary register of dimension `d_a` is acted on
/// trivially by all of them.
#[derive(Clone, Debug)]
pub struct HmmModel {
    pub d_e: usize,
    pub d_p: usize,
    pub d_a: usize,
    /// Hermitian coupling on E⊗P.
    pub h_ep: CMat,
    /// Hermitian signal generator on P; must not be proportional to identity.
    pub g: CMat,
    /// Hermitian environment signal generator on E (may be zero).
    pub h_e: CMat,
    /// Jump operators on E⊗P.
    pub jumps: Vec<CMat>,
    /// Value of the estimated parameter.
    pub omega: f64,
}

const HERM_TOL: f64 = 1e-10;

impl HmmModel {
    pub fn new(
        d_e: usize,
        d_p: usize,
        h_ep: CMat,
        g: CMat,
        h_e: CMat,
        jumps: Vec<CMat>,
        omega: f64,
    ) -> Result<Self> {
        let m = Self { d_e, d_p, d_a: 1, h_ep, g, h_e, jumps, omega };
        m.validate()?;
        Ok(m)
    }

    /// Same model carrying an auxiliary register of dimension `d_a`.
    pub fn with_aux(mut self, d_a: usize) -> Self {
        self.d_a = d_a.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_e == 0 || self.d_p == 0 || self.d_a == 0 {
            return Err(Error::InvalidInput("zero subsystem dimension".into()));
        }
        let dep = self.d_e * self.d_p;
        for (name, op, side) in [
            ("H_EP", &self.h_ep, dep),
            ("G", &self.g, self.d_p),
            ("H_E", &self.h_e, self.d_e),
        ] {
            if op.rows() != side || op.cols() != side {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {side}x{side}",
                    op.rows(),
                    op.cols()
                )));
            }
            if !op.is_hermitian(HERM_TOL) {
                return Err(Error::NotHermitian { deviation: op.hermiticity_deviation() });
            }
        }
        for (k, l) in self.jumps.iter().enumerate() {
            if l.rows() != dep || l.cols() != dep {
                return Err(Error::DimensionMismatch(format!("jump {k} has wrong dimensions")));
            }
            if !l.is_finite() {
                return Err(Error::InvalidInput(format!("jump {k} has non-finite entries")));
            }
        }
        // G must act non-trivially
        let avg = self.g.trace() / self.d_p as f64;
        let centered = &self.g - &CMat::identity(self.d_p).scale(avg);
        if centered.frob_norm() <= HERM_TOL {
            return Err(Error::InvalidInput("signal generator G is proportional to identity".into()));
        }
        Ok(())
    }

    /// Side of the joint density matrix on E⊗P⊗A.
    pub fn joint_dim(&self) -> usize {
        self.d_e * self.d_p * self.d_a
    }

    /// Lift an operator on E⊗P to E⊗P⊗A.
    pub fn lift_ep(&self, op: &CMat) -> CMat {
        if self.d_a == 1 {
            op.clone()
        } else {
            op.kron(&CMat::identity(self.d_a))
        }
    }

    /// Lift an operator on P to E⊗P⊗A.
    pub fn lift_p(&self, op: &CMat) -> CMat {
        self.lift_ep(&CMat::identity(self.d_e).kron(op))
    }

    /// Lift an operator on E to E⊗P⊗A.
    pub fn lift_e(&self, op: &CMat) -> CMat {
        self.lift_ep(&op.kron(&CMat::identity(self.d_p)))
    }

    /// ω-portion of the Hamiltonian before scaling: G̃ + H̃_E on E⊗P⊗A.
    pub fn signal_generator(&self) -> CMat {
        &self.lift_p(&self.g) + &self.lift_e(&self.h_e)
    }

    /// Full Hamiltonian H_EP + ω(G̃ + H̃_E) on E⊗P⊗A.
    pub fn total_hamiltonian(&self) -> CMat {
        &self.lift_ep(&self.h_ep) + &self.signal_generator().scale_re(self.omega)
    }

    /// Right-hand side of the master equation applied directly to ρ.
    pub fn master_rhs(&self, rho: &CMat) -> CMat {
        let h = self.total_hamiltonian();
        let i = C64::new(0.0, 1.0);
        let mut out = (&(&h * rho) - &(rho * &h)).scale(-i);
        for l in &self.jumps {
            let l = self.lift_ep(l);
            let ldl = &l.dagger() * &l;
            let hop = &(&l * rho) * &l.dagger();
            let anti = &(&ldl * rho) + &(rho * &ldl);
            out = &out + &(&hop - &anti.scale_re(0.5));
        }
        out
    }
}

/// vec(A·X) = (I ⊗ A)·vec(X) for column-stacked vec.
fn sup_left(a: &CMat) -> CMat {
    CMat::identity(a.rows()).kron(a)
}

/// vec(X·B) = (Bᵀ ⊗ I)·vec(X).
fn sup_right(b: &CMat) -> CMat {
    b.transpose().kron(&CMat::identity(b.rows()))
}

/// vec(L·X·L†) = (L̄ ⊗ L)·vec(X).
fn sup_sandwich(l: &CMat) -> CMat {
    l.conj().kron(l)
}

/// Superoperator of the channel ρ ↦ Σ K ρ K†.
pub fn channel_superop(kraus: &[CMat]) -> CMat {
    assert!(!kraus.is_empty());
    let n = kraus[0].rows();
    let mut s = CMat::zeros(n * n, n * n);
    for k in kraus {
        s = &s + &sup_sandwich(k);
    }
    s
}

/// Commutator superoperator −i[h, ·].
fn sup_comm(h: &CMat) -> CMat {
    (&sup_left(h) - &sup_right(h)).scale(C64::new(0.0, -1.0))
}

/// Vectorized generator of the master equation together with its
/// ω-derivative block.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    /// Side of the density matrix the generator acts on.
    pub dim: usize,
    pub generator: CMat,
    /// ∂_ω of the generator: −i[ad of (G̃ + H̃_E)], independent of ω.
    pub d_omega: CMat,
}

pub fn build_liouvillian(model: &HmmModel) -> Result<Liouvillian> {
    model.validate()?;
    let dim = model.joint_dim();
    let mut gen = sup_comm(&model.total_hamiltonian());
    for l in &model.jumps {
        let l = model.lift_ep(l);
        let ldl = &l.dagger() * &l;
        let anti = (&sup_left(&ldl) + &sup_right(&ldl)).scale_re(0.5);
        gen = &gen + &(&sup_sandwich(&l) - &anti);
    }
    let d_omega = sup_comm(&model.signal_generator());
    Ok(Liouvillian { dim, generator: gen, d_omega })
}

impl Liouvillian {
    /// Block-triangular generator [[L, 0], [∂_ω L, L]] on stacked
    /// [vec ρ; vec ∂_ω ρ].
    pub fn augmented(&self) -> CMat {
        let n2 = self.dim * self.dim;
        let mut m = CMat::zeros(2 * n2, 2 * n2);
        for r in 0..n2 {
            for c in 0..n2 {
                m[(r, c)] = self.generator[(r, c)];
                m[(n2 + r, n2 + c)] = self.generator[(r, c)];
                m[(n2 + r, c)] = self.d_omega[(r, c)];
            }
        }
        m
    }

    /// e^{t·augmented generator}.
    pub fn augmented_propagator(&self, t: f64) -> Result<CMat> {
        if t < 0.0 {
            return Err(Error::InvalidInput("negative evolution time".into()));
        }
        expm(&self.augmented().scale_re(t))
    }

    /// e^{t·generator} without the sensitivity block.
    pub fn propagator(&self, t: f64) -> Result<CMat> {
        if t < 0.0 {
            return Err(Error::InvalidInput("negative evolution time".into()));
        }
        expm(&self.generator.scale_re(t))
    }
}

/// A density matrix together with its exact derivative with respect to the
/// estimated parameter.
#[derive(Clone, Debug)]
pub struct StatePair {
    pub rho: CMat,
    pub drho: CMat,
}

impl StatePair {
    pub fn new(rho: CMat, drho: CMat) -> Result<Self> {
        let s = Self { rho, drho };
        s.validate()?;
        Ok(s)
    }

    /// Pure state with zero sensitivity.
    pub fn from_pure(psi: &CMat) -> Self {
        let rho = CMat::outer(psi, psi);
        let n = rho.rows();
        Self { rho, drho: CMat::zeros(n, n) }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rho.is_square() || self.rho.rows() != self.drho.rows() || !self.drho.is_square() {
            return Err(Error::DimensionMismatch("state pair blocks disagree".into()));
        }
        if !self.rho.is_hermitian(1e-9) {
            return Err(Error::NotHermitian { deviation: self.rho.hermiticity_deviation() });
        }
        if (self.rho.trace().re - 1.0).abs() > 1e-10 || self.rho.trace().im.abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "state trace {} is not 1",
                self.rho.trace().re
            )));
        }
        if !self.drho.is_hermitian(1e-9) {
            return Err(Error::NotHermitian { deviation: self.drho.hermiticity_deviation() });
        }
        if self.drho.trace().norm() > 1e-10 {
            return Err(Error::InvalidInput("sensitivity block is not traceless".into()));
        }
        let eig = herm_eig(&self.rho)?;
        if eig.eigenvalues[0] < -1e-9 {
            return Err(Error::NumericalFault(format!(
                "state has negative eigenvalue {}",
                eig.eigenvalues[0]
            )));
        }
        Ok(())
    }

    /// Apply an augmented superoperator to the stacked pair.
    pub fn apply_augmented(&self, aug: &CMat) -> Self {
        let n = self.rho.rows();
        let n2 = n * n;
        let mut v = self.rho.vectorize();
        v.extend(self.drho.vectorize());
        let mut out = vec![C64::new(0.0, 0.0); 2 * n2];
        aug.mul_slice(&v, &mut out);
        Self {
            rho: CMat::unvectorize(&out[..n2], n),
            drho: CMat::unvectorize(&out[n2..], n),
        }
    }
}

/// Advance (ρ, ∂_ω ρ) by time `t` under the model's master equation.
pub fn propagate(model: &HmmModel, state: &StatePair, t: f64) -> Result<StatePair> {
    if t < 0.0 {
        return Err(Error::InvalidInput("negative evolution time".into()));
    }
    if state.rho.rows() != model.joint_dim() {
        return Err(Error::DimensionMismatch(format!(
            "state side {} does not match joint dimension {}",
            state.rho.rows(),
            model.joint_dim()
        )));
    }
    let liouv = build_liouvillian(model)?;
    let prop = liouv.augmented_propagator(t)?;
    Ok(state.apply_augmented(&prop))
}

/// One explicit Euler step: ρ + (master-equation RHS)·dt.
pub fn first_order_step(model: &HmmModel, rho: &CMat, dt: f64) -> CMat {
    rho + &model.master_rhs(rho).scale_re(dt)
}

/// Completely dephase the environment factor of a joint state in the given
/// orthonormal environment basis.
pub fn dephase_env(model: &HmmModel, env_basis: &[CMat], rho: &CMat) -> CMat {
    let n = rho.rows();
    let mut out = CMat::zeros(n, n);
    for phi in env_basis {
        let proj = model.lift_e(&CMat::outer(phi, phi));
        out = &out + &(&(&proj * rho) * &proj);
    }
    out
}

/// Frobenius distance between Tr_E Φ_t(ρ) and Tr_E Φ_t((D_E ⊗ 1)(ρ)).
///
/// For models with diagonal interactions in `env_basis` the distance must
/// vanish; the deviation is returned for the caller to assert.
pub fn check_dephasing_lemma(
    model: &HmmModel,
    env_basis: &[CMat],
    rho: &CMat,
    t: f64,
) -> Result<f64> {
    let liouv = build_liouvillian(model)?;
    let prop = liouv.propagator(t)?;
    let evolve = |r: &CMat| -> Result<CMat> {
        let mut out = vec![C64::new(0.0, 0.0); r.rows() * r.rows()];
        prop.mul_slice(&r.vectorize(), &mut out);
        let full = CMat::unvectorize(&out, r.rows());
        full.partial_trace(&[model.d_e, model.d_p * model.d_a], &[1])
    };
    let direct = evolve(rho)?;
    let dephased = evolve(&dephase_env(model, env_basis, rho))?;
    Ok((&direct - &dephased).frob_norm())
}
