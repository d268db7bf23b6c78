//! Corepresentation blocks of non-tracial compact quantum groups.
//!
//! A block is the span of the coefficients `u_ij` of one irreducible unitary
//! corepresentation together with their adjoints `u_ij*`, carrying the
//! positive matrix `F` of the Haar state:
//!
//! * `h(u_kl* u_ij) = δ_jl F_ki / tr F`,
//! * `σ_z(u) = F^{iz} u F^{iz}`, `τ_z(u) = F^{iz} u F^{-iz}`,
//! * `S(u_ij) = u_ji*`, so `S²(u) = F u F⁻¹`, and `R = S∘τ_{i/2}`.
//!
//! Elements are pairs `(X, Y)` of coefficient matrices for
//! `Σ X_ij u_ij + Σ Y_ij u_ij*`, flattened row-major into a vector of length
//! `2d²`. Linear maps on the block are `2d² × 2d²` matrices.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conv_ops;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{cr, CMat, Real, C};

/// One irreducible corepresentation block.
#[derive(Debug, Clone)]
pub struct CorepBlock<T: Real> {
    label: String,
    f: CMat<T>,
    q: Option<f64>,
    spin: Option<f64>,
}

fn check_hpd<T: Real>(f: &CMat<T>) -> Result<()> {
    if !f.is_square() || f.nrows() == 0 {
        return Err(Error::Structure(format!("F must be square and nonempty, got {}×{}", f.nrows(), f.ncols())));
    }
    let scale = T::one() + linalg::frob(f);
    if linalg::frob(&(f - f.adjoint())) > T::epsilon().sqrt() * scale {
        return Err(Error::Structure("F is not Hermitian".into()));
    }
    let (vals, _) = linalg::hermitian_eigen(f);
    if vals[0] <= T::zero() {
        return Err(Error::Structure(format!("F is not positive definite (min eigenvalue {})", vals[0])));
    }
    Ok(())
}

impl<T: Real> CorepBlock<T> {
    /// Requires `F` Hermitian positive definite with `tr F = tr F⁻¹`.
    pub fn new(label: impl Into<String>, f: CMat<T>) -> Result<Self> {
        let b = Self::new_unchecked(label, f)?;
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(100.0)) * (T::one() + b.quantum_dimension());
        let r = b.normalization_residual();
        if r > tol {
            return Err(Error::Structure(format!(
                "F is not normalized: |tr F − tr F⁻¹| = {r:e}"
            )));
        }
        Ok(b)
    }

    /// Only requires `F` Hermitian positive definite; a normalization defect
    /// shows up in [`verify_commutation_relations`].
    pub fn new_unchecked(label: impl Into<String>, f: CMat<T>) -> Result<Self> {
        check_hpd(&f)?;
        let f = (&f + f.adjoint()) * cr(T::lit(0.5));
        Ok(Self {
            label: label.into(),
            f,
            q: None,
            spin: None,
        })
    }

    /// Rescales `F` so that `tr F = tr F⁻¹`.
    pub fn normalized(label: impl Into<String>, f: CMat<T>) -> Result<Self> {
        check_hpd(&f)?;
        let inv = linalg::inverse(&f).expect("positive definite");
        let c = (inv.trace().re / f.trace().re).sqrt();
        Self::new(label, f * cr(c))
    }

    pub fn with_params(mut self, q: f64, spin: f64) -> Self {
        self.q = Some(q);
        self.spin = Some(spin);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn dim(&self) -> usize {
        self.f.nrows()
    }
    pub fn f(&self) -> &CMat<T> {
        &self.f
    }
    pub fn q(&self) -> Option<f64> {
        self.q
    }
    pub fn spin(&self) -> Option<f64> {
        self.spin
    }

    /// `tr F`.
    pub fn quantum_dimension(&self) -> T {
        self.f.trace().re
    }

    /// `|tr F − tr F⁻¹|`.
    pub fn normalization_residual(&self) -> T {
        let inv = linalg::inverse(&self.f).expect("positive definite");
        (self.f.trace().re - inv.trace().re).abs()
    }

    /// `F^z` by functional calculus.
    pub fn f_power(&self, z: C<T>) -> CMat<T> {
        linalg::hpd_power(&self.f, z)
    }
}

/// `[n]_q = (q^n − q^{-n}) / (q − q^{-1})`, with `[n]_1 = n`.
pub fn q_integer(q: f64, n: usize) -> f64 {
    let m = n as f64 - 1.0;
    (0..n).map(|k| q.powf(m - 2.0 * k as f64)).sum()
}

/// Blocks of `SU_q(2)` for spins `0, 1/2, …, l_max`:
/// `F_ℓ = diag(q^{-2m})`, `m = ℓ, ℓ−1, …, −ℓ`.
pub fn su_q2_blocks<T: Real>(q: T, l_max: T) -> Result<Vec<CorepBlock<T>>> {
    if !(q > T::zero() && q <= T::one()) {
        return Err(Error::InvalidDeformation(q.as_f64()));
    }
    let twice = l_max.as_f64() * 2.0;
    if !(twice >= 0.0) || twice.fract() != 0.0 {
        return Err(Error::InvalidSpin(l_max.as_f64()));
    }
    let mut out = Vec::new();
    for two_l in 0..=(twice as usize) {
        let d = two_l + 1;
        let l = two_l as f64 / 2.0;
        let diag = CMat::<T>::from_fn(d, d, |a, b| {
            if a == b {
                let m = T::lit(l - a as f64);
                cr(q.powf(T::lit(-2.0) * m))
            } else {
                cr(T::zero())
            }
        });
        let label = if two_l % 2 == 0 {
            format!("spin-{}", two_l / 2)
        } else {
            format!("spin-{two_l}/2")
        };
        out.push(CorepBlock::new(label, diag)?.with_params(q.as_f64(), l));
    }
    Ok(out)
}

/// Matrix of `X ↦ Xᵀ` on row-major `vec X`.
fn transpose_perm<T: Real>(d: usize) -> CMat<T> {
    let mut p = CMat::<T>::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            p[(j * d + i, i * d + j)] = cr(T::one());
        }
    }
    p
}

/// Matrix on `vec X` of the map induced by `u ↦ B u C`.
fn sandwich<T: Real>(b: &CMat<T>, c: &CMat<T>) -> CMat<T> {
    linalg::kron(&b.transpose(), c)
}

fn block_diag<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let n = a.nrows();
    let mut m = CMat::<T>::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((n, n), (n, n)).copy_from(b);
    m
}

/// `u ↦ F^{ia z} u F^{ib z}`, extended to `u*` by `α(u*) = α̃(u)*` where `α̃`
/// is the same map at `z̄` (this makes `α` a `*`-map for real `z`).
fn modular_pair<T: Real>(block: &CorepBlock<T>, z: C<T>, a: T, b: T) -> CMat<T> {
    let i = C::new(T::zero(), T::one());
    let left = block.f_power(i * z * cr(a));
    let right = block.f_power(i * z * cr(b));
    let zb = z.conj();
    let left_b = block.f_power(i * zb * cr(a));
    let right_b = block.f_power(i * zb * cr(b));
    block_diag(
        &sandwich(&left, &right),
        &sandwich(&left_b.map(|x| x.conj()), &right_b.map(|x| x.conj())),
    )
}

/// `σ_z` on `(X, Y)` coordinates.
pub fn sigma_at<T: Real>(block: &CorepBlock<T>, z: C<T>) -> CMat<T> {
    modular_pair(block, z, T::one(), T::one())
}

/// `τ_z` on `(X, Y)` coordinates.
pub fn tau_at<T: Real>(block: &CorepBlock<T>, z: C<T>) -> CMat<T> {
    modular_pair(block, z, T::one(), -T::one())
}

#[derive(Debug, Clone)]
pub struct ModularMaps<T: Real> {
    pub sigma: CMat<T>,
    pub tau: CMat<T>,
}

/// `σ_t` and `τ_t` at real `t`.
pub fn modular_maps<T: Real>(block: &CorepBlock<T>, t: T) -> ModularMaps<T> {
    ModularMaps {
        sigma: sigma_at(block, cr(t)),
        tau: tau_at(block, cr(t)),
    }
}

#[derive(Debug, Clone)]
pub struct AntipodeMaps<T: Real> {
    /// `S`: `(X, Y) ↦ ((F⁻¹ Y F)ᵀ, Xᵀ)`.
    pub s: CMat<T>,
    /// `R = S∘τ_{i/2}`.
    pub r: CMat<T>,
}

pub fn antipode_block<T: Real>(block: &CorepBlock<T>) -> AntipodeMaps<T> {
    let d = block.dim();
    let n = d * d;
    let p = transpose_perm::<T>(d);
    let finv = linalg::inverse(block.f()).expect("positive definite");
    let mut s = CMat::<T>::zeros(2 * n, 2 * n);
    let from_y = &p * linalg::kron(&finv, &block.f().transpose());
    s.view_mut((0, n), (n, n)).copy_from(&from_y);
    s.view_mut((n, 0), (n, n)).copy_from(&p);
    let r = &s * tau_at(block, C::new(T::zero(), T::lit(0.5)));
    AntipodeMaps { s, r }
}

/// `Δ` on the `u` (or, identically, the `u*`) coefficients, as a `d⁴ × d²`
/// matrix: `u_ij ↦ Σ_k u_ik ⊗ u_kj`.
pub fn coproduct_matrix<T: Real>(d: usize) -> CMat<T> {
    let n = d * d;
    let mut m = CMat::<T>::zeros(n * n, n);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                m[((i * d + k) * n + (k * d + j), i * d + j)] = cr(T::one());
            }
        }
    }
    m
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationRow {
    pub relation: String,
    pub q: Option<f64>,
    pub l: Option<f64>,
    pub t: Option<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutationReport {
    pub label: String,
    pub tol: f64,
    pub rows: Vec<RelationRow>,
    pub passed: bool,
}

impl CommutationReport {
    pub fn failures(&self) -> impl Iterator<Item = &RelationRow> {
        self.rows.iter().filter(move |r| !(r.residual <= self.tol))
    }

    pub fn max_residual(&self, relation: &str) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.relation == relation)
            .fold(0.0, |a, r| a.max(r.residual))
    }
}

fn halves<T: Real>(m: &CMat<T>, n: usize) -> [CMat<T>; 2] {
    [
        m.view((0, 0), (n, n)).into_owned(),
        m.view((n, n), (n, n)).into_owned(),
    ]
}

/// Residuals of the modular relations on a time grid:
///
/// * `eq1_left`: `(τ_t ⊗ σ_t)Δ = Δ∘σ_t`; `eq1_right`: `(σ_t ⊗ τ_{−t})Δ = Δ∘σ_t`,
/// * `eq2`: `(τ_t ⊗ τ_t)Δ = Δ∘τ_t`,
/// * `eq3`: `R∘τ_t = τ_t∘R`,
/// * group laws `σ_tσ_t = σ_{2t}`, `τ_tτ_t = τ_{2t}`,
///
/// plus the time-independent rows `normalization` (`|tr F − tr F⁻¹|`),
/// `antipode_square` (`S²(u) = F u F⁻¹`) and `r_involutive` (`R² = id`).
pub fn verify_commutation_relations<T: Real>(block: &CorepBlock<T>, t_grid: &[T], tol: f64) -> CommutationReport {
    let d = block.dim();
    let n = d * d;
    let (q, l) = (block.q, block.spin);
    let mut rows = Vec::new();
    let mut push = |relation: &str, t: Option<f64>, residual: T| {
        rows.push(RelationRow {
            relation: relation.into(),
            q,
            l,
            t,
            residual: residual.as_f64(),
        })
    };
    push("normalization", None, block.normalization_residual());
    let ap = antipode_block(block);
    let finv = linalg::inverse(block.f()).expect("positive definite");
    // S²(u*) = (S⁻²(u))* with S⁻²(u) = F⁻¹ u F.
    let conj_f = block_diag(
        &sandwich(block.f(), &finv),
        &sandwich(&finv.map(|x| x.conj()), &block.f().map(|x| x.conj())),
    );
    push("antipode_square", None, linalg::frob(&(&ap.s * &ap.s - conj_f)));
    let id = linalg::identity::<T>(2 * n);
    push("r_involutive", None, linalg::frob(&(&ap.r * &ap.r - id)));

    let delta = coproduct_matrix::<T>(d);
    for &t in t_grid {
        let tf = Some(t.as_f64());
        let m = modular_maps(block, t);
        let tau_neg = tau_at(block, cr(-t));
        let two = modular_maps(block, t + t);
        let (sig, tau, tneg) = (halves(&m.sigma, n), halves(&m.tau, n), halves(&tau_neg, n));
        let mut e1l = T::zero();
        let mut e1r = T::zero();
        let mut e2 = T::zero();
        for h in 0..2 {
            let ds = &delta * &sig[h];
            let dt = &delta * &tau[h];
            e1l = e1l.max(linalg::frob(&(linalg::kron(&tau[h], &sig[h]) * &delta - &ds)));
            e1r = e1r.max(linalg::frob(&(linalg::kron(&sig[h], &tneg[h]) * &delta - &ds)));
            e2 = e2.max(linalg::frob(&(linalg::kron(&tau[h], &tau[h]) * &delta - dt)));
        }
        push("eq1_left", tf, e1l);
        push("eq1_right", tf, e1r);
        push("eq2", tf, e2);
        push("eq3", tf, linalg::frob(&(&ap.r * &m.tau - &m.tau * &ap.r)));
        push("sigma_group_law", tf, linalg::frob(&(&m.sigma * &m.sigma - two.sigma)));
        push("tau_group_law", tf, linalg::frob(&(&m.tau * &m.tau - two.tau)));
    }
    let passed = rows.iter().all(|r| r.residual <= tol);
    CommutationReport {
        label: block.label.clone(),
        tol,
        rows,
        passed,
    }
}

/// A functional on the block: `Phi_kj = ω(u_kj)`, `Psi_kj = ω(u_kj*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFunctional<T: Real> {
    pub phi: CMat<T>,
    pub psi: CMat<T>,
}

impl<T: Real> BlockFunctional<T> {
    pub fn new(phi: CMat<T>, psi: CMat<T>) -> Result<Self> {
        if phi.shape() != psi.shape() || !phi.is_square() {
            return Err(Error::DimensionMismatch {
                what: "block functional",
                expected: phi.nrows(),
                found: psi.nrows(),
            });
        }
        Ok(Self { phi, psi })
    }

    /// Hermitian functional with `ω(u_kj) = Phi_kj`: `Psi = conj(Phi)`.
    pub fn hermitian(phi: CMat<T>) -> Self {
        let psi = phi.map(|z| z.conj());
        Self { phi, psi }
    }

    /// `ε(u_ij) = ε(u_ij*) = δ_ij`.
    pub fn counit(d: usize) -> Self {
        Self::hermitian(linalg::identity(d))
    }

    /// Restriction of the Haar state: zero unless the block is trivial.
    pub fn haar(d: usize) -> Self {
        if d == 1 {
            Self::counit(1)
        } else {
            Self::hermitian(CMat::zeros(d, d))
        }
    }

    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }

    /// `ω*(x) = conj(ω(S(x)*))`: `Phi* = Phiᴴ`, `Psi* = conj(F⁻¹ Psiᵀ F)`.
    pub fn sharp(&self, block: &CorepBlock<T>) -> Self {
        let finv = linalg::inverse(block.f()).expect("positive definite");
        let psi = (finv * self.psi.transpose() * block.f()).map(|z| z.conj());
        Self {
            phi: self.phi.adjoint(),
            psi,
        }
    }

    /// Block convolution: `Phi = Phi₁ Phi₂`, `Psi = Psi₁ Psi₂`.
    pub fn convolve(&self, other: &Self) -> Self {
        Self {
            phi: &self.phi * &other.phi,
            psi: &self.psi * &other.psi,
        }
    }

    /// `‖Psi − conj(Phi)‖`, zero for hermitian `ω`.
    pub fn hermitian_residual(&self) -> T {
        linalg::frob(&(&self.psi - self.phi.map(|z| z.conj())))
    }

    /// `‖(ω*)* − ω‖`; the `Psi` part goes through `S²(u) = F u F⁻¹`.
    pub fn involution_consistency(&self, block: &CorepBlock<T>) -> T {
        let back = self.sharp(block).sharp(block);
        linalg::frob(&(&back.phi - &self.phi)) + linalg::frob(&(&back.psi - &self.psi))
    }
}

/// `T_ω` on the `u` coefficients: `u ↦ u·Phi`, i.e. `X ↦ X Phiᵀ`.
pub fn block_conv_operator<T: Real>(block: &CorepBlock<T>, omega: &BlockFunctional<T>) -> CMat<T> {
    let d = block.dim();
    linalg::kron(&linalg::identity(d), &omega.phi)
}

/// `T_ω` on `(X, Y)` coordinates.
pub fn block_conv_operator_pairs<T: Real>(block: &CorepBlock<T>, omega: &BlockFunctional<T>) -> CMat<T> {
    let d = block.dim();
    let id = linalg::identity(d);
    block_diag(&linalg::kron(&id, &omega.phi), &linalg::kron(&id, &omega.psi))
}

/// `M_n(T_ω)` on the block, via the Cesàro mean of `Phi`.
pub fn block_cesaro_mean<T: Real>(block: &CorepBlock<T>, omega: &BlockFunctional<T>, n: usize) -> CMat<T> {
    let d = block.dim();
    linalg::kron(&linalg::identity(d), &conv_ops::cesaro_mean(&omega.phi, n))
}

/// `K` with `⟨x, y⟩ = h(y* x) = vec(Y)ᴴ K vec(X)`:
/// `K = (F ⊗ I) / tr F`.
pub fn l2_gram_block<T: Real>(block: &CorepBlock<T>) -> CMat<T> {
    let d = block.dim();
    linalg::kron(block.f(), &linalg::identity(d)) / cr(block.quantum_dimension())
}

/// Gram of the symmetric embedding `x ↦ h^{1/4} x h^{1/4}`:
/// `W ᴴ K W` with `W = σ_{−i/4}`, i.e. `u ↦ F^{1/4} u F^{1/4}`.
pub fn symmetric_gram_block<T: Real>(block: &CorepBlock<T>) -> CMat<T> {
    let a = block.f_power(cr(T::lit(0.25)));
    let w = sandwich(&a, &a);
    w.adjoint() * l2_gram_block(block) * w
}

/// `‖[Phi, F]‖ + ‖[Psi, F̄]‖`; `ω∘τ_t = ω` for all `t` iff it vanishes. For
/// real `F` (e.g. diagonal) `F̄ = F`.
pub fn tau_commutator<T: Real>(block: &CorepBlock<T>, omega: &BlockFunctional<T>) -> T {
    let f = block.f();
    let fb = f.map(|z| z.conj());
    linalg::frob(&(&omega.phi * f - f * &omega.phi)) + linalg::frob(&(&omega.psi * &fb - &fb * &omega.psi))
}

pub fn is_tau_invariant<T: Real>(block: &CorepBlock<T>, omega: &BlockFunctional<T>, tol: T) -> bool {
    tau_commutator(block, omega) < tol
}

#[derive(Debug, Clone, Serialize)]
pub struct AdjointReport {
    /// `‖K⁻¹ Tᴴ K − T_{ω*}‖` under the GNS Gram.
    pub gns_residual: f64,
    /// Same under the symmetric Gram.
    pub symmetric_residual: f64,
    pub tau_commutator: f64,
    pub involution_consistency: f64,
    pub passed: bool,
}

fn gram_adjoint<T: Real>(k: &CMat<T>, t: &CMat<T>) -> CMat<T> {
    let ki = linalg::inverse(k).expect("Gram is positive definite");
    ki * t.adjoint() * k
}

/// `(T_ω)† = T_{ω*}` on `L²(h)` restricted to the block, for `τ`-invariant `ω`.
pub fn verify_l2_adjoint<T: Real>(block: &CorepBlock<T>, omega: &BlockFunctional<T>, tol: T) -> Result<AdjointReport> {
    if omega.dim() != block.dim() {
        return Err(Error::DimensionMismatch {
            what: "block functional",
            expected: block.dim(),
            found: omega.dim(),
        });
    }
    let comm = tau_commutator(block, omega);
    if comm >= tol {
        return Err(Error::NotTauInvariant {
            commutator: comm.as_f64(),
        });
    }
    let t = block_conv_operator(block, omega);
    let ts = block_conv_operator(block, &omega.sharp(block));
    let gns = linalg::frob(&(gram_adjoint(&l2_gram_block(block), &t) - &ts));
    let sym = linalg::frob(&(gram_adjoint(&symmetric_gram_block(block), &t) - &ts));
    let cons = omega.involution_consistency(block);
    Ok(AdjointReport {
        gns_residual: gns.as_f64(),
        symmetric_residual: sym.as_f64(),
        tau_commutator: comm.as_f64(),
        involution_consistency: cons.as_f64(),
        passed: gns < tol && sym < tol && cons < tol,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct BlockJson {
    label: String,
    dim: usize,
    #[serde(rename = "F")]
    f: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(BlockJson),
    Many(Vec<BlockJson>),
}

/// Parses `{"label", "dim", "F": [[re, im], ...]}` (row-major `F`) or an
/// array of such objects. Normalization is not enforced here so that a
/// defective `F` can be reported by [`verify_commutation_relations`].
pub fn blocks_from_json<T: Real>(text: &str) -> Result<Vec<CorepBlock<T>>> {
    let raw = match serde_json::from_str::<OneOrMany>(text)? {
        OneOrMany::One(b) => vec![b],
        OneOrMany::Many(v) => v,
    };
    raw.into_iter()
        .map(|b| {
            if b.f.len() != b.dim * b.dim {
                return Err(Error::Parse(format!(
                    "block `{}`: F has {} entries, expected {}",
                    b.label,
                    b.f.len(),
                    b.dim * b.dim
                )));
            }
            let f = CMat::<T>::from_fn(b.dim, b.dim, |i, j| {
                let [re, im] = b.f[i * b.dim + j];
                C::new(T::lit(re), T::lit(im))
            });
            CorepBlock::new_unchecked(b.label, f)
        })
        .collect()
}

pub fn load_blocks<T: Real>(path: impl AsRef<Path>) -> Result<Vec<CorepBlock<T>>> {
    blocks_from_json(&std::fs::read_to_string(path)?)
}

pub fn block_to_json<T: Real>(block: &CorepBlock<T>) -> String {
    let d = block.dim();
    let raw = BlockJson {
        label: block.label.clone(),
        dim: d,
        f: (0..d * d)
            .map(|k| {
                let z = block.f[(k / d, k % d)];
                [z.re.as_f64(), z.im.as_f64()]
            })
            .collect(),
    };
    serde_json::to_string(&raw).expect("block serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duals::{involution_sharp, Functional};
    use crate::group_table::GroupTable;
    use crate::hopf::build_function_algebra;
    use crate::scalar::c;

    fn half_block(q: f64) -> CorepBlock<f64> {
        su_q2_blocks(q, 0.5).unwrap().pop().unwrap()
    }

    fn diag(v: &[f64]) -> CMat<f64> {
        CMat::from_fn(v.len(), v.len(), |i, j| if i == j { c(v[i], 0.0) } else { c(0.0, 0.0) })
    }

    #[test]
    fn su_q2_normalization() {
        for b in su_q2_blocks(1.0, 2.0).unwrap() {
            assert!(linalg::frob(&(b.f() - linalg::identity(b.dim()))) < 1e-15);
            assert!((b.quantum_dimension() - b.dim() as f64).abs() < 1e-14);
        }
        let blocks = su_q2_blocks(0.5, 1.0).unwrap();
        assert_eq!(blocks.len(), 3);
        assert!(linalg::frob(&(blocks[1].f() - diag(&[2.0, 0.5]))) < 1e-15);
        assert!((blocks[1].quantum_dimension() - 2.5).abs() < 1e-14);
        assert!((blocks[2].quantum_dimension() - 5.25).abs() < 1e-14);
        assert!((blocks[2].quantum_dimension() - q_integer(0.5, 3)).abs() < 1e-14);
        assert!(su_q2_blocks(0.0, 1.0).is_err());
        assert!(su_q2_blocks(1.5, 1.0).is_err());
        assert!(su_q2_blocks(0.5, 0.3).is_err());
        assert!(CorepBlock::new("bad", diag(&[2.0, 1.0])).is_err());
        let fixed = CorepBlock::normalized("fixed", diag(&[2.0, 1.0])).unwrap();
        assert!(fixed.normalization_residual() < 1e-14);
    }

    #[test]
    fn modular_maps_examples() {
        let b = half_block(0.5);
        let id = linalg::identity::<f64>(8);
        let m0 = modular_maps(&b, 0.0);
        assert!(linalg::frob(&(&m0.sigma - &id)) < 1e-15 && linalg::frob(&(&m0.tau - &id)) < 1e-15);
        let m1 = modular_maps(&b, 1.0);
        let m2 = modular_maps(&b, 2.0);
        assert!(linalg::frob(&(&m1.sigma * &m1.sigma - m2.sigma)) < 1e-12);
        let kac = su_q2_blocks(1.0, 1.0).unwrap().pop().unwrap();
        let mk = modular_maps(&kac, 0.7);
        let id = linalg::identity::<f64>(18);
        assert!(linalg::frob(&(mk.sigma - &id)) < 1e-14 && linalg::frob(&(mk.tau - &id)) < 1e-14);
    }

    #[test]
    fn antipode_examples() {
        let kac = su_q2_blocks(1.0, 0.5).unwrap().pop().unwrap();
        let ap = antipode_block(&kac);
        assert!(linalg::frob(&(&ap.s - &ap.r)) < 1e-14);
        let b = su_q2_blocks(0.5, 1.0).unwrap().pop().unwrap();
        let rep = verify_commutation_relations(&b, &[-1.0, 0.37, 2.0], 1e-12);
        assert!(rep.max_residual("antipode_square") < 1e-12);
        assert!(rep.max_residual("eq3") < 1e-12);
        assert!(rep.max_residual("r_involutive") < 1e-12);
    }

    #[test]
    fn commutation_relations() {
        let ts = [0.5, 1.0, std::f64::consts::PI];
        for q in [1.0, 0.8, 0.5] {
            for b in su_q2_blocks(q, 2.0).unwrap() {
                let rep = verify_commutation_relations(&b, &ts, 1e-10);
                assert!(rep.passed, "{q} {}: {:?}", b.label(), rep.failures().collect::<Vec<_>>());
                if q == 1.0 {
                    assert!(rep.rows.iter().all(|r| r.residual < 1e-13));
                }
            }
        }
        let corrupted = CorepBlock::new_unchecked("corrupted", diag(&[2.0, 1.0])).unwrap();
        let rep = verify_commutation_relations(&corrupted, &ts, 1e-10);
        assert!(!rep.passed);
        assert!(rep.max_residual("normalization") > 1e-3);
    }

    #[test]
    fn conv_operator_examples() {
        let b = half_block(0.5);
        let t = block_conv_operator(&b, &BlockFunctional::counit(2));
        assert!(linalg::frob(&(t - linalg::identity(4))) < 1e-15);
        let t = block_conv_operator(&b, &BlockFunctional::haar(2));
        assert_eq!(linalg::frob(&t), 0.0);
        let phi = b.f() / c(b.quantum_dimension(), 0.0);
        let omega = BlockFunctional::hermitian(phi.clone());
        let t = block_conv_operator(&b, &omega);
        assert!(linalg::spectral_radius(&t) < 1.0);
        let mut p = linalg::identity::<f64>(4);
        for _ in 0..200 {
            p = &t * p;
        }
        assert!(linalg::frob(&p) < 1e-12);
        let m = block_cesaro_mean(&b, &omega, 50);
        assert!(linalg::frob(&(m - conv_ops::cesaro_mean(&t, 50))) < 1e-14);
        let w = omega.convolve(&omega);
        assert!(linalg::frob(&(block_conv_operator(&b, &w) - &t * &t)) < 1e-15);
    }

    #[test]
    fn gram_examples() {
        let kac = su_q2_blocks(1.0, 0.5).unwrap().pop().unwrap();
        assert!(linalg::frob(&(l2_gram_block(&kac) - linalg::identity::<f64>(4) * c(0.5, 0.0))) < 1e-15);
        let b = half_block(0.5);
        let (vals, _) = linalg::hermitian_eigen(&l2_gram_block(&b));
        let want = [0.2, 0.2, 0.8, 0.8];
        for (v, w) in vals.iter().zip(want) {
            assert!((v - w).abs() < 1e-14);
        }
        let big = su_q2_blocks(0.5, 2.0).unwrap().pop().unwrap();
        for k in [l2_gram_block(&big), symmetric_gram_block(&big)] {
            assert!(linalg::hermitian_eigen(&k).0[0] > 0.0);
        }
    }

    #[test]
    fn adjoint_examples() {
        let b = half_block(0.5);
        let omega = BlockFunctional::hermitian(diag(&[0.3, -0.2]));
        let rep = verify_l2_adjoint(&b, &omega, 1e-10).unwrap();
        assert!(rep.passed && rep.gns_residual < 1e-10 && rep.symmetric_residual < 1e-10);
        let cplx = BlockFunctional::new(
            CMat::from_row_slice(2, 2, &[c(0.3, 0.1), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.2)]),
            CMat::from_row_slice(2, 2, &[c(0.1, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.4, -0.3)]),
        )
        .unwrap();
        assert!(verify_l2_adjoint(&b, &cplx, 1e-10).unwrap().passed);

        let off = BlockFunctional::hermitian(CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
        match verify_l2_adjoint(&b, &off, 1e-10) {
            Err(Error::NotTauInvariant { commutator }) => assert!(commutator > 0.1),
            other => panic!("expected NotTauInvariant, got {other:?}"),
        }
        // The symmetric Gram genuinely needs τ-invariance.
        let t = block_conv_operator(&b, &off);
        let ts = block_conv_operator(&b, &off.sharp(&b));
        let sym = linalg::frob(&(gram_adjoint(&symmetric_gram_block(&b), &t) - &ts));
        let gns = linalg::frob(&(gram_adjoint(&l2_gram_block(&b), &t) - &ts));
        assert!(sym > 0.1 && gns < 1e-12);
    }

    #[test]
    fn tau_invariance_closed_under_convolution() {
        let b = su_q2_blocks(0.5, 1.0).unwrap().pop().unwrap();
        let a = BlockFunctional::hermitian(diag(&[0.3, 0.1, -0.4]));
        let bb = BlockFunctional::hermitian(diag(&[0.7, 0.2, 0.5]));
        assert!(is_tau_invariant(&b, &a, 1e-12) && is_tau_invariant(&b, &bb, 1e-12));
        assert!(is_tau_invariant(&b, &a.convolve(&bb), 1e-12));
    }

    /// 2-dimensional irreducible representation of S3 on the sum-zero plane.
    fn s3_rho() -> Vec<[[f64; 2]; 2]> {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let s2 = 2f64.sqrt();
        let s6 = 6f64.sqrt();
        let v = [[1.0 / s2, 1.0 / s6], [-1.0 / s2, 1.0 / s6], [0.0, -2.0 / s6]];
        perms
            .iter()
            .map(|p| {
                let mut r = [[0.0; 2]; 2];
                for a in 0..2 {
                    for b in 0..2 {
                        // ρ = Vᵀ P V with P e_i = e_{p(i)}.
                        r[a][b] = (0..3).map(|i| v[p[i]][a] * v[i][b]).sum();
                    }
                }
                r
            })
            .collect()
    }

    #[test]
    fn kac_degeneration_on_s3() {
        let g = build_function_algebra::<f64>(&GroupTable::symmetric3()).with_solved_haar().unwrap();
        let rho = s3_rho();
        // Coordinates of u_ij in C(S3), columns indexed by i*2+j.
        let u = CMat::<f64>::from_fn(6, 4, |g_, col| c(rho[g_][col / 2][col % 2], 0.0));
        let block = CorepBlock::new("s3-standard", linalg::identity(2)).unwrap();
        let vals = [0.1, 0.3, 0.05, 0.25, 0.2, 0.1];
        let phi = Functional::new(crate::scalar::CVec::from_fn(6, |i, _| c(vals[i], 0.0)));
        let big = conv_ops::right_conv_operator(&g, &phi).unwrap().matrix;
        let phi_block = CMat::<f64>::from_fn(2, 2, |k, j| phi.eval(&u.column(k * 2 + j).into_owned()));
        let omega = BlockFunctional::hermitian(phi_block);
        let t = block_conv_operator(&block, &omega);
        assert!(linalg::frob(&(&big * &u - &u * &t)) < 1e-12);

        let gram_big = u.adjoint() * g.gram().unwrap() * &u;
        assert!(linalg::frob(&(gram_big.transpose() - l2_gram_block(&block))) < 1e-12);

        let sharp = involution_sharp(&g, &phi).unwrap();
        let sharp_block = CMat::<f64>::from_fn(2, 2, |k, j| sharp.eval(&u.column(k * 2 + j).into_owned()));
        assert!(linalg::frob(&(omega.sharp(&block).phi - sharp_block)) < 1e-12);
        assert!(verify_l2_adjoint(&block, &omega, 1e-12).unwrap().passed);
    }

    #[test]
    fn json_roundtrip() {
        let b = half_block(0.5);
        let text = block_to_json(&b);
        let back: Vec<CorepBlock<f64>> = blocks_from_json(&text).unwrap();
        assert_eq!(back[0].f(), b.f());
        let two = format!("[{text}, {text}]");
        assert_eq!(blocks_from_json::<f64>(&two).unwrap().len(), 2);
        assert!(blocks_from_json::<f64>(r#"{"label":"x","dim":2,"F":[[1,0]]}"#).is_err());
    }
}
