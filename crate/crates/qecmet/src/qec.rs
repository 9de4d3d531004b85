//! Metrology codes, generalized Knill-Laflamme verification, recovery
//! channels, and projected (Zeno) evolution.
//!
//! Codewords are purifications of the positive and negative spectral parts of
//! the out-of-span signal component, with disjoint auxiliary supports. Error
//! sets on environment ⊗ probe reduce to standard correctable sets through
//! their environment blocks.

use crate::model::{build_liouvillian, channel_superop, HmmModel, Liouvillian, StatePair};
use crate::numkit::{herm_eig, hs_inner};
use crate::spans::{computational_env_basis, env_block};
use crate::{C64, CMat, Error, Result};

/// Default Frobenius tolerance for the Knill-Laflamme residuals.
pub const KL_TOL: f64 = 1e-8;

/// A two-codeword metrology code on probe ⊗ auxiliary.
#[derive(Clone, Debug)]
pub struct MetrologyCode {
    /// Codeword column vectors on P⊗A.
    pub c0: CMat,
    pub c1: CMat,
    /// |C0><C0| + |C1><C1|.
    pub projector: CMat,
    /// Logical signal eigenvalues <C_i|(G⊗1)|C_i>.
    pub lambda0: f64,
    pub lambda1: f64,
    pub d_p: usize,
    pub d_a: usize,
    /// Projectors on A marking the auxiliary supports of the two codewords.
    pub marker0: CMat,
    pub marker1: CMat,
}

impl MetrologyCode {
    pub fn delta_lambda(&self) -> f64 {
        self.lambda0 - self.lambda1
    }

    /// Logical Z operator |C0><C0| - |C1><C1| on P⊗A.
    pub fn logical_z(&self) -> CMat {
        &CMat::outer(&self.c0, &self.c0) - &CMat::outer(&self.c1, &self.c1)
    }

    /// Equal superposition (|C0> + |C1>)/√2, the protocol input state.
    pub fn plus_state(&self) -> CMat {
        (&self.c0 + &self.c1).scale_re(std::f64::consts::FRAC_1_SQRT_2)
    }

    /// Measurement vectors (|C0> ± i|C1>)/√2 for the two-outcome protocol.
    pub fn measurement_pair(&self) -> (CMat, CMat) {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let i = C64::new(0.0, 1.0);
        let plus = (&self.c0 + &self.c1.scale(i)).scale_re(r);
        let minus = (&self.c0 - &self.c1.scale(i)).scale_re(r);
        (plus, minus)
    }

    pub fn validate(&self) -> Result<()> {
        let ip = hs_inner(&self.c0, &self.c1)?;
        if ip.norm() > 1e-10 {
            return Err(Error::NumericalFault(format!("codewords overlap: {ip}")));
        }
        let p = &CMat::outer(&self.c0, &self.c0) + &CMat::outer(&self.c1, &self.c1);
        if (&p - &self.projector).frob_norm() > 1e-10 {
            return Err(Error::NumericalFault("projector does not match codewords".into()));
        }
        if (self.lambda0 - self.lambda1).abs() < 1e-12 {
            return Err(Error::NumericalFault("degenerate logical eigenvalues".into()));
        }
        Ok(())
    }
}

/// Build the metrology code from the out-of-span signal component.
///
/// `g_perp` must be Hermitian, traceless, and nonzero on the probe; `g_full`
/// is the complete signal generator used for the logical eigenvalues.
/// Eigenvalues of `g_perp` at zero are assigned to the positive part.
pub fn build_code_from_gperp(g_perp: &CMat, g_full: &CMat) -> Result<MetrologyCode> {
    if g_perp.trace().norm() > 1e-9 * g_perp.frob_norm().max(1.0) {
        return Err(Error::InvalidInput("signal component is not traceless".into()));
    }
    let d_p = g_perp.rows();
    if g_full.rows() != d_p {
        return Err(Error::DimensionMismatch("signal generators disagree in size".into()));
    }
    let es = herm_eig(g_perp)?;
    let total_abs: f64 = es.eigenvalues.iter().map(|l| l.abs()).sum();
    if total_abs < 1e-9 {
        return Err(Error::InvalidInput(
            "signal component vanishes; no code exists along this route".into(),
        ));
    }
    let weight = 0.5 * total_abs; // ½ Tr|G⊥|

    // descending order so the positive part occupies the leading auxiliary kets
    let order: Vec<usize> = (0..d_p).rev().collect();
    let d_a = d_p;
    let mut c0 = CMat::zeros(d_p * d_a, 1);
    let mut c1 = CMat::zeros(d_p * d_a, 1);
    let mut marker0 = CMat::zeros(d_a, d_a);
    let mut marker1 = CMat::zeros(d_a, d_a);
    for (aux, &src) in order.iter().enumerate() {
        let lambda = es.eigenvalues[src];
        let vec = es.eigenvector(src);
        let target = if lambda >= -1e-12 { &mut c0 } else { &mut c1 };
        let amp = C64::new((lambda.abs() / weight).sqrt(), 0.0);
        for p in 0..d_p {
            target[(p * d_a + aux, 0)] += amp * vec[(p, 0)];
        }
        if lambda >= -1e-12 {
            marker0[(aux, aux)] = C64::new(1.0, 0.0);
        } else {
            marker1[(aux, aux)] = C64::new(1.0, 0.0);
        }
    }
    let n0 = c0.frob_norm();
    let n1 = c1.frob_norm();
    if n0 < 1e-9 || n1 < 1e-9 {
        return Err(Error::InvalidInput(
            "signal component is semidefinite; both spectral parts are required".into(),
        ));
    }
    let c0 = c0.scale_re(1.0 / n0);
    let c1 = c1.scale_re(1.0 / n1);
    let projector = &CMat::outer(&c0, &c0) + &CMat::outer(&c1, &c1);
    let lifted = g_full.kron(&CMat::identity(d_a));
    let lambda0 = hs_inner(&c0, &(&lifted * &c0))?.re;
    let lambda1 = hs_inner(&c1, &(&lifted * &c1))?.re;
    let code = MetrologyCode { c0, c1, projector, lambda0, lambda1, d_p, d_a, marker0, marker1 };
    code.validate()?;
    Ok(code)
}

/// One environment block of a source error, tagged with its indices.
#[derive(Clone, Debug)]
pub struct ExtendedError {
    /// Index of the generating error in the source list.
    pub source: usize,
    /// Environment bra index n of <n|E|k>.
    pub bra: usize,
    /// Environment ket index k.
    pub ket: usize,
    pub op: CMat,
}

/// All environment blocks of a set of errors on E⊗(P⊗A).
#[derive(Clone, Debug)]
pub struct ExtendedErrorSet {
    pub d_e: usize,
    pub errors: Vec<ExtendedError>,
}

impl ExtendedErrorSet {
    pub fn ops(&self) -> Vec<&CMat> {
        self.errors.iter().map(|e| &e.op).collect()
    }
}

/// Decompose each error into its d_E² environment blocks <n|E|k>.
pub fn extended_errors(errors: &[CMat], env_basis: &[CMat]) -> Result<ExtendedErrorSet> {
    let d_e = env_basis.len();
    if d_e == 0 {
        return Err(Error::InvalidInput("empty environment basis".into()));
    }
    let mut out = Vec::new();
    for (idx, e) in errors.iter().enumerate() {
        if !e.is_square() || e.rows() % d_e != 0 {
            return Err(Error::DimensionMismatch(format!(
                "error {idx} of side {} is incompatible with environment dimension {d_e}",
                e.rows()
            )));
        }
        let d_pa = e.rows() / d_e;
        for n in 0..d_e {
            for k in 0..d_e {
                out.push(ExtendedError {
                    source: idx,
                    bra: n,
                    ket: k,
                    op: env_block(e, &env_basis[n], &env_basis[k], d_pa),
                });
            }
        }
    }
    Ok(ExtendedErrorSet { d_e, errors: out })
}

/// Outcome of a Knill-Laflamme verification.
#[derive(Clone, Debug)]
pub struct KlReport {
    pub satisfied: bool,
    pub max_residual: f64,
    /// Coefficients c_ab = Tr(P Ẽ_a† Ẽ_b P)/Tr(P) over error pairs.
    pub c_matrix: CMat,
    pub tolerance: f64,
}

/// Check P Ẽ_a† Ẽ_b P = c_ab P for every pair of extended errors.
pub fn kl_check(projector: &CMat, errs: &ExtendedErrorSet, tol: f64) -> Result<KlReport> {
    if !projector.is_hermitian(1e-10) {
        return Err(Error::NotHermitian { deviation: projector.hermiticity_deviation() });
    }
    if (&(projector * projector) - projector).frob_norm() > 1e-10 {
        return Err(Error::InvalidInput("input is not idempotent".into()));
    }
    let rank = projector.trace().re;
    if rank < 0.5 {
        return Err(Error::InvalidInput("projector has vanishing rank".into()));
    }
    let k = errs.errors.len();
    let mut c = CMat::zeros(k, k);
    let mut max_residual: f64 = 0.0;
    for a in 0..k {
        let ea = &errs.errors[a].op;
        if ea.rows() != projector.rows() {
            return Err(Error::DimensionMismatch(
                "extended error does not act on the projector space".into(),
            ));
        }
        let pa = ea * projector; // E_a P
        for b in 0..k {
            let eb = &errs.errors[b].op;
            let sandwich = &(projector * &pa.dagger()) * &(eb * projector);
            let coeff = sandwich.trace() / rank;
            c[(a, b)] = coeff;
            let residual = (&sandwich - &projector.scale(coeff)).frob_norm();
            max_residual = max_residual.max(residual);
        }
    }
    Ok(KlReport { satisfied: max_residual <= tol, max_residual, c_matrix: c, tolerance: tol })
}

/// Orthonormal basis of the range of a projector.
fn codespace_basis(projector: &CMat) -> Result<Vec<CMat>> {
    let es = herm_eig(projector)?;
    let mut basis = Vec::new();
    for (i, &l) in es.eigenvalues.iter().enumerate() {
        if l > 0.5 {
            basis.push(es.eigenvector(i));
        }
    }
    Ok(basis)
}

/// Apply ρ ↦ Σ K ρ K†.
pub fn apply_channel(kraus: &[CMat], rho: &CMat) -> CMat {
    let mut out = CMat::zeros(rho.rows(), rho.cols());
    for k in kraus {
        out = &out + &(&(k * rho) * &k.dagger());
    }
    out
}

/// Build the recovery channel of a correctable error set.
///
/// The coefficient matrix is diagonalized to orthogonalize the errors, the
/// images of the codewords under each orthogonalized error form the syndrome
/// subspaces, and the channel is completed to trace preservation on the
/// remaining directions. Fails with the residual report when the error set is
/// not correctable.
pub fn recovery_channel(projector: &CMat, errs: &ExtendedErrorSet) -> Result<Vec<CMat>> {
    let report = kl_check(projector, errs, KL_TOL)?;
    if !report.satisfied {
        return Err(Error::KlViolated { residual: report.max_residual });
    }
    let dim = projector.rows();
    let codewords = codespace_basis(projector)?;
    let es = herm_eig(&report.c_matrix)?;
    let d_max = es.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    if d_max <= 0.0 {
        return Err(Error::NumericalFault("error coefficient matrix vanishes".into()));
    }

    let mut kraus = Vec::new();
    let mut syndrome_vectors: Vec<CMat> = Vec::new();
    for (a, &d_a) in es.eigenvalues.iter().enumerate() {
        if d_a <= 1e-12 * d_max {
            continue;
        }
        let w = es.eigenvector(a);
        // orthogonalized error F_a = Σ_i W_ia Ẽ_i
        let mut f = CMat::zeros(dim, dim);
        for (i, err) in errs.errors.iter().enumerate() {
            f = &f + &err.op.scale(w[(i, 0)]);
        }
        let scale = 1.0 / d_a.sqrt();
        let mut r = CMat::zeros(dim, dim);
        for cw in &codewords {
            let u = (&f * cw).scale_re(scale);
            r = &r + &CMat::outer(cw, &u);
            syndrome_vectors.push(u);
        }
        kraus.push(r);
    }

    // complete to a CPTP map: anything outside the syndrome subspaces is sent
    // onto the first codeword
    let mut collected = orthonormalize(&syndrome_vectors, dim);
    for j in 0..dim {
        let cand = CMat::ket(dim, j);
        if let Some(w) = orthogonal_residual(&cand, &collected) {
            kraus.push(CMat::outer(&codewords[0], &w));
            collected.push(w);
        }
    }

    // Kraus closure
    let mut closure = CMat::zeros(dim, dim);
    for k in &kraus {
        closure = &closure + &(&k.dagger() * k);
    }
    if (&closure - &CMat::identity(dim)).frob_norm() > 1e-9 {
        return Err(Error::NumericalFault("recovery channel fails to close".into()));
    }
    Ok(kraus)
}

fn orthonormalize(vectors: &[CMat], dim: usize) -> Vec<CMat> {
    let mut out: Vec<CMat> = Vec::new();
    for v in vectors {
        if let Some(w) = orthogonal_residual(v, &out) {
            out.push(w);
        }
    }
    let _ = dim;
    out
}

/// Twice-iterated Gram-Schmidt residual, or None when the vector lies in the
/// span.
fn orthogonal_residual(v: &CMat, basis: &[CMat]) -> Option<CMat> {
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis {
            let coeff = hs_inner(b, &w).ok()?;
            w = &w - &b.scale(coeff);
        }
    }
    let norm = w.frob_norm();
    if norm > 1e-8 {
        Some(w.scale_re(1.0 / norm))
    } else {
        None
    }
}

/// The two-outcome recovery that collapses back onto the codewords using the
/// auxiliary marker subspaces.
pub fn dephasing_recovery(code: &MetrologyCode) -> Result<Vec<CMat>> {
    let cross = (&code.marker0 * &code.marker1).frob_norm();
    if cross > 1e-10 {
        return Err(Error::InvalidInput("auxiliary marker subspaces overlap".into()));
    }
    let complete = (&(&code.marker0 + &code.marker1) - &CMat::identity(code.d_a)).frob_norm();
    if complete > 1e-10 {
        return Err(Error::InvalidInput("auxiliary markers do not resolve the identity".into()));
    }
    let mut kraus = Vec::new();
    for (cw, marker) in [(&code.c0, &code.marker0), (&code.c1, &code.marker1)] {
        for a in 0..code.d_a {
            if marker[(a, a)].re < 0.5 {
                continue;
            }
            for p in 0..code.d_p {
                let bra = CMat::ket(code.d_p, p).kron(&CMat::ket(code.d_a, a));
                kraus.push(CMat::outer(cw, &bra));
            }
        }
    }
    Ok(kraus)
}

/// Which correction is interleaved with the evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZenoStrategy {
    /// Measure the codespace projector without recovery (unitary protocol).
    ProjectOnly,
    /// Full recovery built from the extended first-order errors of the
    /// model's jump operators.
    Recover,
    /// Two-outcome marker recovery (diagonal-interaction protocol).
    DephasingRecovery,
}

/// Kraus operators on P⊗A of one correction round.
fn qec_kraus(model: &HmmModel, code: &MetrologyCode, strategy: ZenoStrategy) -> Result<Vec<CMat>> {
    let p = &code.projector;
    let p_perp = &CMat::identity(p.rows()) - p;
    match strategy {
        ZenoStrategy::ProjectOnly => Ok(vec![p.clone(), p_perp]),
        ZenoStrategy::DephasingRecovery => {
            let mut kraus = vec![p.clone()];
            for k in dephasing_recovery(code)? {
                kraus.push(&k * &p_perp);
            }
            Ok(kraus)
        }
        ZenoStrategy::Recover => {
            let id_a = CMat::identity(code.d_a);
            let mut sources = vec![CMat::identity(model.d_e * code.d_p * code.d_a)];
            for l in &model.jumps {
                sources.push(l.kron(&id_a));
            }
            let ext = extended_errors(&sources, &computational_env_basis(model.d_e))?;
            let recovery = recovery_channel(p, &ext)?;
            let mut kraus = vec![p.clone()];
            for k in recovery {
                kraus.push(&k * &p_perp);
            }
            Ok(kraus)
        }
    }
}

fn check_code_dims(model: &HmmModel, code: &MetrologyCode) -> Result<()> {
    if model.d_p != code.d_p || model.d_a != code.d_a {
        return Err(Error::DimensionMismatch(format!(
            "model carries P⊗A of {}x{}, code was built for {}x{}",
            model.d_p, model.d_a, code.d_p, code.d_a
        )));
    }
    Ok(())
}

/// Generator of the continuous-correction (Zeno) limit: the correction
/// channel composed with the master-equation generator.
pub fn projected_liouvillian(
    model: &HmmModel,
    code: &MetrologyCode,
    strategy: ZenoStrategy,
) -> Result<Liouvillian> {
    check_code_dims(model, code)?;
    let liouv = build_liouvillian(model)?;
    let id_e = CMat::identity(model.d_e);
    let kraus_full: Vec<CMat> =
        qec_kraus(model, code, strategy)?.iter().map(|k| id_e.kron(k)).collect();
    let c = channel_superop(&kraus_full);
    Ok(Liouvillian {
        dim: liouv.dim,
        generator: &c * &liouv.generator,
        d_omega: &c * &liouv.d_omega,
    })
}

fn initial_pair(model: &HmmModel, code: &MetrologyCode, env_state: &CMat) -> Result<StatePair> {
    if env_state.rows() != model.d_e || env_state.cols() != 1 {
        return Err(Error::DimensionMismatch("environment state shape".into()));
    }
    let psi = env_state.kron(&code.plus_state());
    Ok(StatePair::from_pure(&psi))
}

/// Discretized protocol: alternate free evolution for t/steps with one
/// correction round, `steps` times. Converges to the projected-generator
/// evolution as steps grows.
pub fn zeno_project_evolution(
    model: &HmmModel,
    code: &MetrologyCode,
    env_state: &CMat,
    t: f64,
    steps: usize,
    strategy: ZenoStrategy,
) -> Result<StatePair> {
    if steps == 0 {
        return Err(Error::InvalidInput("at least one step is required".into()));
    }
    check_code_dims(model, code)?;
    let liouv = build_liouvillian(model)?;
    let prop = liouv.augmented_propagator(t / steps as f64)?;
    let id_e = CMat::identity(model.d_e);
    let kraus_full: Vec<CMat> =
        qec_kraus(model, code, strategy)?.iter().map(|k| id_e.kron(k)).collect();
    let c = channel_superop(&kraus_full);

    // one fused step on the stacked pair
    let n2 = liouv.dim * liouv.dim;
    let mut fused = CMat::zeros(2 * n2, 2 * n2);
    for r in 0..n2 {
        for cc in 0..n2 {
            fused[(r, cc)] = c[(r, cc)];
            fused[(n2 + r, n2 + cc)] = c[(r, cc)];
        }
    }
    let step = &fused * &prop;

    let mut state = initial_pair(model, code, env_state)?;
    // start inside the codespace; apply the fused step repeatedly
    let mut v = state.rho.vectorize();
    v.extend(state.drho.vectorize());
    let mut scratch = vec![C64::new(0.0, 0.0); 2 * n2];
    for _ in 0..steps {
        step.mul_slice(&v, &mut scratch);
        std::mem::swap(&mut v, &mut scratch);
    }
    state.rho = CMat::unvectorize(&v[..n2], liouv.dim);
    state.drho = CMat::unvectorize(&v[n2..], liouv.dim);
    Ok(state)
}

/// Exact evolution under the projected generator, the steps → ∞ limit of
/// [`zeno_project_evolution`].
pub fn zeno_limit_evolution(
    model: &HmmModel,
    code: &MetrologyCode,
    env_state: &CMat,
    t: f64,
    strategy: ZenoStrategy,
) -> Result<StatePair> {
    let liouv = projected_liouvillian(model, code, strategy)?;
    let prop = liouv.augmented_propagator(t)?;
    Ok(initial_pair(model, code, env_state)?.apply_augmented(&prop))
}
