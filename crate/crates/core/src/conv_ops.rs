//! Convolution operators `T_φ = (id⊗φ)Δ`, `L_φ = (φ⊗id)Δ`, their Cesàro
//! means, fixed-point projections and convergence certificates.

use nalgebra::ComplexField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::duals::{self, check_state, Functional};
use crate::error::{Error, Result};
use crate::hopf::{self, FiniteQuantumGroup, StructureConstants, Tensor3};
use crate::linalg::{self, ProjectorFailure};
use crate::scalar::{cr, one, CMat, CVec, Real, C};

/// Threshold for the eigenvalue-1 cluster of a kernel.
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `T_φ = (id⊗φ)Δ`
    Right,
    /// `L_φ = (φ⊗id)Δ`
    Left,
}

/// Matrix of a convolution operator on basis coordinates, so that
/// `T(e_i) = Σ_j M_{ji} e_j`.
#[derive(Debug, Clone)]
pub struct ConvOperator<T: Real> {
    pub matrix: CMat<T>,
    pub side: Side,
    pub source: Functional<T>,
    pub group: String,
}

impl<T: Real> ConvOperator<T> {
    pub fn apply(&self, x: &CVec<T>) -> CVec<T> {
        &self.matrix * x
    }

    /// Operator norm on `L²(h)`.
    pub fn l2_norm(&self, g: &FiniteQuantumGroup<T>) -> Result<T> {
        let (gh, ghi) = linalg::hpd_sqrt_pair(&g.gram()?);
        Ok(linalg::gram_op_norm(&self.matrix, &gh, &ghi))
    }
}

fn check_dim<T: Real>(g: &FiniteQuantumGroup<T>, phi: &Functional<T>) -> Result<()> {
    if phi.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            what: "functional",
            expected: g.dim(),
            found: phi.dim(),
        });
    }
    Ok(())
}

/// `T_φ`: `M_{ji} = Σ_k c[i][j][k] φ_k`.
pub fn right_conv_operator<T: Real>(g: &FiniteQuantumGroup<T>, phi: &Functional<T>) -> Result<ConvOperator<T>> {
    check_dim(g, phi)?;
    let n = g.dim();
    let mut m = CMat::<T>::zeros(n, n);
    for (i, j, k, v) in g.coproduct().iter_nonzero() {
        m[(j, i)] += v * phi.values()[k];
    }
    Ok(ConvOperator {
        matrix: m,
        side: Side::Right,
        source: phi.clone(),
        group: g.name().to_string(),
    })
}

/// `L_φ`: `M_{ki} = Σ_j c[i][j][k] φ_j`.
pub fn left_conv_operator<T: Real>(g: &FiniteQuantumGroup<T>, phi: &Functional<T>) -> Result<ConvOperator<T>> {
    check_dim(g, phi)?;
    let n = g.dim();
    let mut m = CMat::<T>::zeros(n, n);
    for (i, j, k, v) in g.coproduct().iter_nonzero() {
        m[(k, i)] += v * phi.values()[j];
    }
    Ok(ConvOperator {
        matrix: m,
        side: Side::Left,
        source: phi.clone(),
        group: g.name().to_string(),
    })
}

/// Functional `ψ` with `T_ψ = M`, read off as `ε∘M`. Only meaningful when `M`
/// is a right convolution operator.
pub fn functional_of_operator<T: Real>(g: &FiniteQuantumGroup<T>, m: &CMat<T>) -> Functional<T> {
    Functional::new(m.transpose() * g.counit())
}

/// `M_n(T) = (1/n) Σ_{k=1}^n T^k`, accumulated with one product per step.
pub fn cesaro_mean<T: Real>(t: &CMat<T>, n: usize) -> CMat<T> {
    assert!(n >= 1, "Cesàro mean needs n >= 1");
    let mut power = t.clone();
    let mut sum = t.clone();
    for _ in 1..n {
        power = &power * t;
        sum += &power;
    }
    sum / cr(T::lit(n as f64))
}

/// Cesàro means at several (increasing) lengths from one running sum.
pub fn cesaro_means<T: Real>(t: &CMat<T>, ns: &[usize]) -> Vec<CMat<T>> {
    let mut out = Vec::with_capacity(ns.len());
    let mut power = t.clone();
    let mut sum = t.clone();
    let mut k = 1;
    for &n in ns {
        assert!(n >= k, "lengths must be increasing");
        while k < n {
            power = &power * t;
            sum += &power;
            k += 1;
        }
        out.push(&sum / cr(T::lit(n as f64)));
    }
    out
}

/// Spectral projection onto `ker(T − I)` along `ran(T − I)`.
///
/// Rejects operators with spectral radius above `1 + tol` and operators whose
/// eigenvalue 1 is not semisimple, neither of which can be a kernel.
pub fn fixed_point_projection<T: Real>(t: &CMat<T>, tol: T) -> Result<CMat<T>> {
    let n = t.nrows();
    let radius = linalg::spectral_radius(t);
    let slack = tol.max(T::lit(1e-9));
    if radius > T::one() + slack {
        return Err(Error::NotAKernel {
            reason: format!("spectral radius {:e} exceeds 1", radius.as_f64()),
        });
    }
    let a = t - linalg::identity::<T>(n);
    match linalg::kernel_projector(&a, T::lit(CLUSTER_TOL)) {
        Ok((f, _)) => Ok(f),
        Err(ProjectorFailure::DimensionMismatch { right, left }) => Err(Error::NotAKernel {
            reason: format!("fixed space has dimension {right} but the dual fixed space {left}"),
        }),
        Err(ProjectorFailure::Defective { pairing_min_sv }) => Err(Error::NotAKernel {
            reason: format!("eigenvalue 1 is not semisimple (pairing σ_min {pairing_min_sv:e})"),
        }),
    }
}

/// Outcome of [`check_ergodicity`].
#[derive(Debug, Clone)]
pub struct Ergodicity<T: Real> {
    pub ergodic: bool,
    /// `dim ker(T_φ − I)`.
    pub fixed_dim: usize,
    pub projection: CMat<T>,
}

fn require_state<T: Real>(g: &FiniteQuantumGroup<T>, phi: &Functional<T>, tol: T) -> Result<()> {
    let rep = check_state(g, phi, tol);
    if !rep.state {
        return Err(Error::NotAState {
            min_eig: rep.min_eig,
            unit_value: rep.unit_value.0,
        });
    }
    Ok(())
}

/// `T_φ` is ergodic when its fixed points are the scalars.
pub fn check_ergodicity<T: Real>(g: &FiniteQuantumGroup<T>, phi: &Functional<T>, tol: T) -> Result<Ergodicity<T>> {
    require_state(g, phi, tol)?;
    let t = right_conv_operator(g, phi)?.matrix;
    let f = fixed_point_projection(&t, tol)?;
    let fixed_dim = f.trace().re.round().to_usize().unwrap_or(0);
    Ok(Ergodicity {
        ergodic: fixed_dim == 1,
        fixed_dim,
        projection: f,
    })
}

/// `‖M_n − F‖` on `L²(h)` and the a priori bound `C/n` it must obey.
#[derive(Debug, Clone, Serialize)]
pub struct CesaroCheck {
    pub n: usize,
    pub residual: f64,
    /// `2‖(T − I)^{-1}(I − F)‖`, valid for `L²`-contractions.
    pub constant: f64,
}

/// Compares the Cesàro mean at `n` with the spectral projection.
pub fn cesaro_check<T: Real>(g: &FiniteQuantumGroup<T>, t: &CMat<T>, f: &CMat<T>, n: usize) -> Result<CesaroCheck> {
    let (gh, ghi) = linalg::hpd_sqrt_pair(&g.gram()?);
    let k = t.nrows();
    let id = linalg::identity::<T>(k);
    let reduced = linalg::inverse(&(t - &id + f))
        .ok_or_else(|| Error::NotAKernel {
            reason: "T − I is singular off its fixed space".into(),
        })?
        * (&id - f);
    let constant = T::lit(2.0) * linalg::gram_op_norm(&reduced, &gh, &ghi);
    let residual = linalg::gram_op_norm(&(cesaro_mean(t, n) - f), &gh, &ghi);
    Ok(CesaroCheck {
        n,
        residual: residual.as_f64(),
        constant: constant.as_f64(),
    })
}

/// Limit `ρ = lim φ_n` together with the diagnostics used to accept it.
#[derive(Debug, Clone)]
pub struct CesaroLimit<T: Real> {
    pub rho: Functional<T>,
    pub projection: CMat<T>,
    /// `‖ρ⋆ρ − ρ‖_∞`.
    pub idempotency: f64,
    /// `‖T_ρ − F‖_F`.
    pub operator_residual: f64,
    pub cesaro: CesaroCheck,
}

/// `ρ = ε∘F` with `F` the fixed-point projection of `T_φ`; the Cesàro mean at
/// `n_max` must respect its `C/n` bound.
pub fn cesaro_limit_functional<T: Real>(
    g: &FiniteQuantumGroup<T>,
    phi: &Functional<T>,
    tol: T,
    n_max: usize,
) -> Result<CesaroLimit<T>> {
    require_state(g, phi, tol)?;
    let t = right_conv_operator(g, phi)?.matrix;
    let f = fixed_point_projection(&t, tol)?;
    let rho = functional_of_operator(g, &f);
    let t_rho = right_conv_operator(g, &rho)?.matrix;
    let idempotency = duals::convolve(g, &rho, &rho)?.distance(&rho);
    let cesaro = cesaro_check(g, &t, &f, n_max.max(1))?;
    let allowed = cesaro.constant / n_max.max(1) as f64 * 1.01 + tol.as_f64().sqrt();
    if cesaro.residual > allowed {
        return Err(Error::CesaroNonConvergence {
            n_max,
            residual: cesaro.residual,
        });
    }
    Ok(CesaroLimit {
        rho,
        operator_residual: linalg::frob(&(t_rho - &f)).as_f64(),
        idempotency: idempotency.as_f64(),
        projection: f,
        cesaro,
    })
}

/// `[T x, T² x, …, T^{n_max} x]`.
pub fn iterate_orbit<T: Real>(t: &CMat<T>, x: &CVec<T>, n_max: usize) -> Vec<CVec<T>> {
    let mut out = Vec::with_capacity(n_max);
    let mut cur = x.clone();
    for _ in 0..n_max {
        cur = t * cur;
        out.push(cur.clone());
    }
    out
}

/// One row of a convergence report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Operator norm of `M_n − F` on `L²(h)`.
    pub residual_op: f64,
    /// Hilbert–Schmidt norm of `M_n − F` on `L²(h)`.
    pub residual_l2: f64,
    /// Local log-log slope against the previous row; `None` on the first.
    pub rate_estimate: Option<f64>,
}

/// Residuals of Cesàro means against `F` at the given lengths.
pub fn cesaro_convergence<T: Real>(
    g: &FiniteQuantumGroup<T>,
    t: &CMat<T>,
    f: &CMat<T>,
    ns: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    let (gh, ghi) = linalg::hpd_sqrt_pair(&g.gram()?);
    let means = cesaro_means(t, ns);
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ns.len());
    for (&n, m) in ns.iter().zip(&means) {
        let d = &gh * (m - f) * &ghi;
        let residual_op = linalg::spectral_norm(&d).as_f64();
        let rate_estimate = rows.last().map(|prev| {
            (residual_op / prev.residual_op).ln() / (n as f64 / prev.n as f64).ln()
        });
        rows.push(ConvergenceRow {
            n,
            residual_op,
            residual_l2: linalg::frob(&d).as_f64(),
            rate_estimate,
        });
    }
    Ok(rows)
}

/// Least-squares fit `r ≈ C·n^a` on log-log scale; returns `(C, a)`.
pub fn fit_power_law(ns: &[f64], rs: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(rs)
        .filter(|(_, &r)| r > 0.0)
        .map(|(&n, &r)| (n.ln(), r.ln()))
        .collect();
    let k = pts.len() as f64;
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let a = sxy / sxx;
    ((my - a * mx).exp(), a)
}

/// Even iterates `T^{2n} x` and their limit.
#[derive(Debug, Clone)]
pub struct SteinReport<T: Real> {
    pub limit: CVec<T>,
    /// `‖T^{2n}x − F₂x‖₂` for `n = 1..=n_max` (`F₂` projects onto `ker(T² − I)`).
    pub residuals: Vec<f64>,
    /// Largest `|λ|` of `T²` off the eigenvalue-1 cluster.
    pub rate: f64,
    /// Per-step decay factor fitted to the residuals.
    pub observed_rate: f64,
    pub projection: CMat<T>,
}

/// Even iterates of `T_φ` for a symmetric state `φ = φ*`.
pub fn stein_even_iterates<T: Real>(
    g: &FiniteQuantumGroup<T>,
    phi: &Functional<T>,
    x: &CVec<T>,
    n_max: usize,
    tol: T,
) -> Result<SteinReport<T>> {
    require_state(g, phi, tol)?;
    let asym = duals::symmetry_residual(g, phi)?;
    if asym > tol {
        return Err(Error::NotSymmetric {
            residual: asym.as_f64(),
        });
    }
    let t = right_conv_operator(g, phi)?.matrix;
    let t2 = &t * &t;
    let f2 = fixed_point_projection(&t2, tol)?;
    let limit = &f2 * x;
    let gram = g.gram()?;
    let mut residuals = Vec::with_capacity(n_max);
    let mut cur = x.clone();
    for _ in 0..n_max {
        cur = &t2 * cur;
        residuals.push(linalg::gram_norm(&gram, &(&cur - &limit)).as_f64());
    }
    let rate = linalg::eigenvalues(&t2)
        .into_iter()
        .filter(|l| (l - one::<T>()).modulus() > T::lit(CLUSTER_TOL))
        .map(|l| l.modulus().as_f64())
        .fold(0.0, f64::max);
    Ok(SteinReport {
        limit,
        observed_rate: observed_decay(&residuals),
        residuals,
        rate,
        projection: f2,
    })
}

/// Geometric decay factor fitted on the part of a sequence above round-off.
pub fn observed_decay(rs: &[f64]) -> f64 {
    let Some(&r0) = rs.first() else { return 0.0 };
    if r0 == 0.0 {
        return 0.0;
    }
    let floor = r0 * 1e-9;
    let pts: Vec<(f64, f64)> = rs
        .iter()
        .enumerate()
        .take_while(|(_, &r)| r > floor)
        .map(|(k, &r)| (k as f64, r.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    // Skip the transient: fit the second half.
    let tail = &pts[pts.len() / 2..];
    let tail = if tail.len() < 2 { &pts[..] } else { tail };
    let k = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / k;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxy / sxx).exp()
}

/// Witness data for almost uniform (or almost sure) convergence.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub epsilon: f64,
    /// Exponent of the `L^p` space for a.s. certificates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Coordinates of the projection `e` as `(re, im)` pairs.
    pub projection: Vec<(f64, f64)>,
    pub projection_rank: usize,
    /// `h(1 − e)`.
    pub h_complement: f64,
    /// `sup_{m≥n} ‖(x_m − x)e‖` in the GNS representation.
    pub tails: Vec<f64>,
    /// `sup_{m≥n} ‖e(x_m − x)e‖`.
    pub bilateral_tails: Vec<f64>,
    /// Whether `e = 1` was enough, i.e. the sequence converges in norm.
    pub norm_convergent: bool,
    pub note: String,
}

pub(crate) const DEGENERACY_NOTE: &str = "finite dimension with faithful Haar state: \
almost uniform, bilateral and almost sure convergence all coincide with norm convergence, \
so e = 1 is returned whenever the tails vanish";

struct Gns<T: Real> {
    g_half: CMat<T>,
    g_half_inv: CMat<T>,
}

impl<T: Real> Gns<T> {
    fn new(g: &FiniteQuantumGroup<T>) -> Result<Self> {
        let gram = g.gram()?;
        let (vals, _) = linalg::hermitian_eigen(&gram);
        let min = vals.first().copied().unwrap_or_else(T::zero);
        if min <= T::zero() {
            return Err(Error::NonFaithfulHaar { min_eig: min.as_f64() });
        }
        let (g_half, g_half_inv) = linalg::hpd_sqrt_pair(&gram);
        Ok(Self { g_half, g_half_inv })
    }

    /// `λ(x)` conjugated to an orthonormal frame of `L²(h)`.
    fn rep(&self, g: &FiniteQuantumGroup<T>, x: &CVec<T>) -> CMat<T> {
        &self.g_half * g.left_mult(x) * &self.g_half_inv
    }

    fn pull_back(&self, g: &FiniteQuantumGroup<T>, m: &CMat<T>) -> CVec<T> {
        &self.g_half_inv * m * &self.g_half * g.unit()
    }
}

fn suffix_sup(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    for k in (0..out.len().saturating_sub(1)).rev() {
        out[k] = out[k].max(out[k + 1]);
    }
    out
}

pub(crate) fn certificate<T: Real>(
    g: &FiniteQuantumGroup<T>,
    seq: &[CVec<T>],
    target: &CVec<T>,
    epsilon: f64,
    tol: T,
    p: Option<f64>,
) -> Result<Certificate> {
    let gns = Gns::new(g)?;
    let h = g.haar()?;
    let n = g.dim();
    let reps: Vec<CMat<T>> = seq.iter().map(|x| gns.rep(g, &(x - target))).collect();
    let tails_for = |e: &CMat<T>| -> (Vec<f64>, Vec<f64>) {
        let right: Vec<f64> = reps.iter().map(|d| linalg::spectral_norm(&(d * e)).as_f64()).collect();
        let both: Vec<f64> = reps.iter().map(|d| linalg::spectral_norm(&(e * d * e)).as_f64()).collect();
        (suffix_sup(&right), suffix_sup(&both))
    };
    let last = |v: &[f64]| v.last().copied().unwrap_or(0.0);
    let id = linalg::identity::<T>(n);
    let (tails, bilateral) = tails_for(&id);
    let tol_f = tol.as_f64();
    if last(&tails) <= tol_f {
        let unit = g.unit();
        return Ok(Certificate {
            epsilon,
            p,
            projection: unit.iter().map(|z| (z.re.as_f64(), z.im.as_f64())).collect(),
            projection_rank: n,
            h_complement: 0.0,
            tails,
            bilateral_tails: bilateral,
            norm_convergent: true,
            note: DEGENERACY_NOTE.into(),
        });
    }
    // Projection onto the directions where the tail of the sequence is small.
    let half = reps.len() / 2;
    let tail = &reps[half..];
    let mut a = CMat::<T>::zeros(n, n);
    for d in tail {
        a += d.adjoint() * d;
    }
    a /= cr(T::lit(tail.len().max(1) as f64));
    let cut = tol * tol;
    let e = linalg::hermitian_map(&a, |l| if l <= cut { one() } else { cr(T::zero()) });
    let rank = e.trace().re.round().to_usize().unwrap_or(0);
    let e_elem = gns.pull_back(g, &e);
    let h_complement = (T::one() - h.eval(&e_elem).re).as_f64();
    let (tails, bilateral) = tails_for(&e);
    if h_complement >= epsilon || last(&tails) > tol_f {
        return Err(Error::CertificateFailed {
            epsilon,
            tail: last(&tails).max(h_complement),
        });
    }
    Ok(Certificate {
        epsilon,
        p,
        projection: e_elem.iter().map(|z| (z.re.as_f64(), z.im.as_f64())).collect(),
        projection_rank: rank,
        h_complement,
        tails,
        bilateral_tails: bilateral,
        norm_convergent: false,
        note: DEGENERACY_NOTE.into(),
    })
}

/// Almost uniform convergence certificate for `seq → target`: a projection
/// `e` with `h(1 − e) < ε` along which the tails fall below `tol`.
pub fn au_certificate<T: Real>(
    g: &FiniteQuantumGroup<T>,
    seq: &[CVec<T>],
    target: &CVec<T>,
    epsilon: f64,
    tol: T,
) -> Result<Certificate> {
    certificate(g, seq, target, epsilon, tol, None)
}

/// A quantum subgroup realized as a Hopf *-quotient onto a union of blocks.
#[derive(Debug, Clone)]
pub struct QuantumSubgroup<T: Real> {
    /// Indices into [`FiniteQuantumGroup::basis_blocks`].
    pub blocks: Vec<usize>,
    /// Basis indices kept by the quotient map.
    pub basis: Vec<usize>,
    pub quotient: FiniteQuantumGroup<T>,
    /// Haar state of the quotient composed with the quotient map.
    pub haar_lift: Functional<T>,
}

/// Quotients onto unions of simple blocks that inherit a Hopf *-structure.
///
/// A union `I` of blocks qualifies when the block projection kills `ker π` in
/// the coproduct, counit and antipode; the quotient is then rebuilt, checked
/// against the full axiom suite and given its Haar state.
pub fn quantum_subgroups<T: Real>(g: &FiniteQuantumGroup<T>, tol: T) -> Result<Vec<QuantumSubgroup<T>>> {
    let blocks = g.basis_blocks();
    let nb = blocks.len();
    if nb > 20 {
        return Err(Error::Structure(format!("{nb} blocks is too many to enumerate subsets")));
    }
    let n = g.dim();
    let small = |z: C<T>| z.modulus() <= tol;
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << nb) {
        let chosen: Vec<usize> = (0..nb).filter(|b| mask & (1 << b) != 0).collect();
        let mut inside = vec![false; n];
        for &b in &chosen {
            for &i in &blocks[b] {
                inside[i] = true;
            }
        }
        let kept: Vec<usize> = (0..n).filter(|&i| inside[i]).collect();
        let killed: Vec<usize> = (0..n).filter(|&i| !inside[i]).collect();
        let ok_counit = killed.iter().all(|&i| small(g.counit()[i]));
        let ok_star = killed
            .iter()
            .all(|&i| kept.iter().all(|&k| small(g.involution()[(i, k)])));
        let ok_antipode = killed
            .iter()
            .all(|&i| kept.iter().all(|&k| small(g.antipode()[(i, k)])));
        let ok_coproduct = killed.iter().all(|&i| {
            kept.iter()
                .all(|&j| kept.iter().all(|&k| small(g.coproduct().get(i, j, k))))
        });
        if !(ok_counit && ok_star && ok_antipode && ok_coproduct) {
            continue;
        }
        let m = kept.len();
        let restrict_t = |t: &Tensor3<T>| {
            let mut r = Tensor3::zeros(m);
            for (a, &i) in kept.iter().enumerate() {
                for (b, &j) in kept.iter().enumerate() {
                    for (c, &k) in kept.iter().enumerate() {
                        r.set(a, b, c, t.get(i, j, k));
                    }
                }
            }
            r
        };
        let restrict_m = |x: &CMat<T>| CMat::<T>::from_fn(m, m, |a, b| x[(kept[a], kept[b])]);
        let label = format!("{}/{{{}}}", g.name(), chosen.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(","));
        let parts = StructureConstants {
            name: label,
            dim: m,
            unit_index: None,
            mult: restrict_t(g.mult()),
            coproduct: restrict_t(g.coproduct()),
            counit: CVec::<T>::from_fn(m, |a, _| g.counit()[kept[a]]),
            involution: restrict_m(g.involution()),
            antipode: restrict_m(g.antipode()),
        };
        let Ok(q) = FiniteQuantumGroup::new(parts) else { continue };
        if !hopf::verify_axioms(&q, T::lit(1e-10)).passed() {
            continue;
        }
        let Ok(q) = q.with_solved_haar() else { continue };
        let hq = q.haar_values().expect("solved");
        let mut lift = CVec::<T>::zeros(n);
        for (a, &i) in kept.iter().enumerate() {
            lift[i] = hq[a];
        }
        out.push(QuantumSubgroup {
            blocks: chosen,
            basis: kept,
            quotient: q,
            haar_lift: Functional::new(lift),
        });
    }
    Ok(out)
}

/// One distinct idempotent found by [`idempotent_scan`].
#[derive(Debug, Clone)]
pub struct IdempotentRecord<T: Real> {
    pub rho: Functional<T>,
    /// `‖ρ⋆ρ − ρ‖_∞`.
    pub idempotency: f64,
    /// Index into the subgroup list when `ρ` is the Haar state of one.
    pub subgroup: Option<usize>,
    /// Supports (as basis indices) of the inputs that produced `ρ`.
    pub sources: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct IdempotentScan<T: Real> {
    pub subgroups: Vec<QuantumSubgroup<T>>,
    pub idempotents: Vec<IdempotentRecord<T>>,
}

impl<T: Real> IdempotentScan<T> {
    /// Idempotent states that are not Haar states of quantum subgroups.
    pub fn atypical(&self) -> impl Iterator<Item = &IdempotentRecord<T>> {
        self.idempotents.iter().filter(|r| r.subgroup.is_none())
    }
}

/// Basis elements that are minimal self-adjoint idempotents with a positive
/// coordinate functional; convex combinations of their coordinate functionals
/// are states.
pub fn diagonal_support<T: Real>(g: &FiniteQuantumGroup<T>, tol: T) -> Vec<usize> {
    (0..g.dim())
        .filter(|&i| {
            let e = g.basis(i);
            let idem = linalg::vnorm(&(g.product(&e, &e) - &e)) <= tol;
            let sa = linalg::vnorm(&(g.star(&e) - &e)) <= tol;
            idem && sa && check_state(g, &Functional::coordinate(g.dim(), i), tol).positive
        })
        .collect()
}

/// Cesàro limits of states supported on subsets of the diagonal basis
/// projections, each with `draws` random weightings, deduplicated and matched
/// against the Haar states of quantum subgroups.
pub fn idempotent_scan<T: Real>(
    g: &FiniteQuantumGroup<T>,
    draws: usize,
    seed: u64,
    tol: T,
) -> Result<IdempotentScan<T>> {
    let subgroups = quantum_subgroups(g, T::lit(1e-12))?;
    let support = diagonal_support(g, T::lit(1e-12));
    if support.len() > 16 {
        return Err(Error::Structure("too many diagonal idempotents to scan".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<IdempotentRecord<T>> = Vec::new();
    let n = g.dim();
    for mask in 1u32..(1u32 << support.len()) {
        let chosen: Vec<usize> = (0..support.len())
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| support[b])
            .collect();
        for _ in 0..draws.max(1) {
            let mut v = CVec::<T>::zeros(n);
            let mut total = T::zero();
            for &i in &chosen {
                let w = T::lit(rng.random_range(0.05..1.0));
                v[i] = cr(w);
                total += w;
            }
            let phi = Functional::new(v / cr(total));
            let limit = cesaro_limit_functional(g, &phi, tol, 10_000)?;
            let rho = limit.rho;
            match found.iter_mut().find(|r| r.rho.distance(&rho) < T::lit(1e-8)) {
                Some(rec) => {
                    if !rec.sources.contains(&chosen) {
                        rec.sources.push(chosen.clone());
                    }
                }
                None => {
                    let subgroup = subgroups
                        .iter()
                        .position(|s| s.haar_lift.distance(&rho) < T::lit(1e-8));
                    found.push(IdempotentRecord {
                        idempotency: limit.idempotency,
                        rho,
                        subgroup,
                        sources: vec![chosen.clone()],
                    });
                }
            }
        }
    }
    Ok(IdempotentScan {
        subgroups,
        idempotents: found,
    })
}

/// Sample of random states mixing faithful, singular and diagonal ones.
pub fn random_states<T: Real, R: Rng>(g: &FiniteQuantumGroup<T>, count: usize, rng: &mut R) -> Result<Vec<Functional<T>>> {
    let support = diagonal_support(g, T::lit(1e-12));
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let phi = match k % 3 {
            0 => duals::random_faithful_state(g, rng)?,
            1 => duals::random_singular_state(g, rng)?,
            _ if !support.is_empty() => {
                let mut v = CVec::<T>::zeros(g.dim());
                let mut total = T::zero();
                while total == T::zero() {
                    for &i in &support {
                        if rng.random_bool(0.4) {
                            let w = T::lit(rng.random_range(0.05..1.0));
                            v[i] = cr(w);
                            total += w;
                        }
                    }
                }
                Functional::new(v / cr(total))
            }
            _ => duals::random_singular_state(g, rng)?,
        };
        out.push(phi);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duals::{convolve, involution_sharp, random_element, random_faithful_state};
    use crate::group_table::GroupTable;
    use crate::hopf::{build_function_algebra, build_group_algebra, build_kac_paljutkin};
    use crate::scalar::c;

    fn kp() -> FiniteQuantumGroup<f64> {
        build_kac_paljutkin().with_solved_haar().unwrap()
    }

    fn cz(n: usize) -> FiniteQuantumGroup<f64> {
        build_function_algebra(&GroupTable::cyclic(n).unwrap())
            .with_solved_haar()
            .unwrap()
    }

    fn cs3() -> FiniteQuantumGroup<f64> {
        build_function_algebra(&GroupTable::symmetric3()).with_solved_haar().unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(5)
    }

    fn rank_one_haar(g: &FiniteQuantumGroup<f64>) -> CMat<f64> {
        g.unit() * g.haar_values().unwrap().transpose()
    }

    #[test]
    fn counit_and_haar_operators() {
        let g = kp();
        let t = right_conv_operator(&g, &g.counit_functional()).unwrap();
        assert!(linalg::frob(&(t.matrix - linalg::identity::<f64>(8))) < 1e-15);
        let l = left_conv_operator(&g, &g.counit_functional()).unwrap();
        assert!(linalg::frob(&(l.matrix - linalg::identity::<f64>(8))) < 1e-15);
        let th = right_conv_operator(&g, &g.haar().unwrap()).unwrap();
        assert!(linalg::frob(&(th.matrix - rank_one_haar(&g))) < 1e-12);
    }

    #[test]
    fn classical_walk_matrix() {
        let g = cz(4);
        let p = [0.1, 0.2, 0.3, 0.4];
        let phi = Functional::new(CVec::from_iterator(4, p.iter().map(|&x| c(x, 0.0))));
        let t = right_conv_operator(&g, &phi).unwrap().matrix;
        // (T f)(a) = Σ_b p_b f(a b)
        for a in 0..4 {
            for b in 0..4 {
                let want = p[(b + 4 - a) % 4];
                assert!((t[(a, b)] - c(want, 0.0)).modulus() < 1e-15);
            }
        }
    }

    #[test]
    fn homomorphism_and_anti_homomorphism() {
        let g = kp();
        let mut r = rng();
        for _ in 0..10 {
            let phi = Functional::new(random_element(8, &mut r));
            let psi = Functional::new(random_element(8, &mut r));
            let conv = convolve(&g, &phi, &psi).unwrap();
            let t = |f: &Functional<f64>| right_conv_operator(&g, f).unwrap().matrix;
            let l = |f: &Functional<f64>| left_conv_operator(&g, f).unwrap().matrix;
            let scale = 1.0 + linalg::frob(&(t(&phi) * t(&psi)));
            assert!(linalg::frob(&(t(&conv) - t(&phi) * t(&psi))) < 1e-12 * scale);
            assert!(linalg::frob(&(l(&conv) - l(&psi) * l(&phi))) < 1e-12 * scale);
            let comm = t(&phi) * l(&psi) - l(&psi) * t(&phi);
            assert!(linalg::frob(&comm) < 1e-12 * scale);
        }
    }

    #[test]
    fn haar_invariance_of_operators() {
        let g = kp();
        let h = g.haar_values().unwrap();
        let mut r = rng();
        let phi = Functional::new(random_element(8, &mut r));
        let t = right_conv_operator(&g, &phi).unwrap().matrix;
        let lhs = t.transpose() * h;
        let rhs = h * phi.eval(g.unit());
        assert!(linalg::vnorm(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn cesaro_basics() {
        let g = cz(2);
        let flip = right_conv_operator(&g, &Functional::coordinate(2, 1)).unwrap().matrix;
        assert_eq!(cesaro_mean(&flip, 1), flip);
        let m2 = cesaro_mean(&flip, 2);
        let half = CMat::<f64>::from_element(2, 2, c(0.5, 0.0));
        assert!(linalg::frob(&(m2 - half)) < 1e-15);
        let id = linalg::identity::<f64>(3);
        assert!(linalg::frob(&(cesaro_mean(&id, 17) - &id)) < 1e-14);
    }

    #[test]
    fn projection_of_haar_and_identity() {
        let g = kp();
        let th = right_conv_operator(&g, &g.haar().unwrap()).unwrap().matrix;
        let f = fixed_point_projection(&th, 1e-10).unwrap();
        assert!(linalg::frob(&(&f - &th)) < 1e-10);
        let id = linalg::identity::<f64>(8);
        assert!(linalg::frob(&(fixed_point_projection(&id, 1e-10).unwrap() - &id)) < 1e-12);
    }

    #[test]
    fn projection_rejects_expanding_operator() {
        let t = linalg::identity::<f64>(3) * c(1.5, 0.0);
        assert!(matches!(fixed_point_projection(&t, 1e-10), Err(Error::NotAKernel { .. })));
    }

    #[test]
    fn faithful_state_projects_onto_haar() {
        let g = kp();
        let phi = random_faithful_state(&g, &mut rng()).unwrap();
        let t = right_conv_operator(&g, &phi).unwrap().matrix;
        let f = fixed_point_projection(&t, 1e-10).unwrap();
        assert!(linalg::frob(&(&f - rank_one_haar(&g))) < 1e-10);
        let m = cesaro_mean(&t, 10_000);
        assert!(linalg::frob(&(m - &f)) < 1e-3);
    }

    #[test]
    fn ergodicity_examples() {
        let g = cz(5);
        let lazy = Functional::new(CVec::from_vec(vec![c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
        let e = check_ergodicity(&g, &lazy, 1e-10).unwrap();
        assert!(e.ergodic);
        assert!(linalg::frob(&(e.projection - rank_one_haar(&g))) < 1e-10);

        let g4 = cz(4);
        let e = check_ergodicity(&g4, &Functional::coordinate(4, 1), 1e-10).unwrap();
        assert!(e.ergodic);

        // Transposition (0 2 1 ordering) generates a subgroup of index 3.
        let s3 = cs3();
        let e = check_ergodicity(&s3, &Functional::coordinate(6, 1), 1e-10).unwrap();
        assert!(!e.ergodic);
        assert_eq!(e.fixed_dim, 3);
    }

    #[test]
    fn ergodicity_rejects_non_states() {
        let g = cz(3);
        let phi = Functional::new(CVec::from_element(3, c(1.0, 0.0)));
        assert!(matches!(check_ergodicity(&g, &phi, 1e-10), Err(Error::NotAState { .. })));
    }

    #[test]
    fn limits_are_subgroup_measures() {
        let s3 = cs3();
        let table = GroupTable::symmetric3();
        let lim = cesaro_limit_functional(&s3, &Functional::coordinate(6, 3), 1e-10, 10_000).unwrap();
        let sub = table.generated_subgroup(&[3]);
        for i in 0..6 {
            let want = if sub.contains(&i) { 1.0 / sub.len() as f64 } else { 0.0 };
            assert!((lim.rho.values()[i] - c(want, 0.0)).modulus() < 1e-10);
        }
        assert!(lim.idempotency < 1e-8 && lim.operator_residual < 1e-6);
        let g = kp();
        let phi = random_faithful_state(&g, &mut rng()).unwrap();
        let lim = cesaro_limit_functional(&g, &phi, 1e-10, 1_000).unwrap();
        assert!(lim.rho.distance(&g.haar().unwrap()) < 1e-10);
    }

    #[test]
    fn orbits() {
        let g = cz(2);
        let flip = right_conv_operator(&g, &Functional::coordinate(2, 1)).unwrap().matrix;
        let x = CVec::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]);
        let orbit = iterate_orbit(&flip, &x, 4);
        assert_eq!(orbit[0], -&x);
        assert_eq!(orbit[1], x);

        let k = kp();
        let th = right_conv_operator(&k, &k.haar().unwrap()).unwrap().matrix;
        let y = random_element(8, &mut rng());
        let hy = k.haar().unwrap().eval(&y);
        for z in iterate_orbit(&th, &y, 3) {
            assert!(linalg::vnorm(&(z - k.unit() * hy)) < 1e-12);
        }

        let g5 = cz(5);
        let p = [0.4, 0.3, 0.0, 0.0, 0.3];
        let sym = Functional::new(CVec::from_iterator(5, p.iter().map(|&x| c(x, 0.0))));
        let t = right_conv_operator(&g5, &sym).unwrap().matrix;
        let y = random_element(5, &mut rng());
        let last = iterate_orbit(&t, &y, 200).pop().unwrap();
        let hy = g5.haar().unwrap().eval(&y);
        assert!(linalg::vnorm(&(last - g5.unit() * hy)) < 1e-10);
    }

    #[test]
    fn stein_examples() {
        let g2 = cz(2);
        let phi = Functional::coordinate(2, 1);
        let x = CVec::from_vec(vec![c(0.3, 0.0), c(-1.0, 0.2)]);
        let rep = stein_even_iterates(&g2, &phi, &x, 10, 1e-10).unwrap();
        assert!(linalg::vnorm(&(rep.limit - &x)) < 1e-14);

        let g4 = cz(4);
        let walk = Functional::new(CVec::from_vec(vec![c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0)]));
        let rep = stein_even_iterates(&g4, &walk, &random_element(4, &mut rng()), 60, 1e-10).unwrap();
        assert!((rep.projection.trace().re - 2.0).abs() < 1e-10);
        assert!(*rep.residuals.last().unwrap() < 1e-12);

        let k = kp();
        let phi = duals::symmetrize(&k, &random_faithful_state(&k, &mut rng()).unwrap()).unwrap();
        let x = random_element(8, &mut rng());
        let rep = stein_even_iterates(&k, &phi, &x, 40, 1e-10).unwrap();
        let hx = k.haar().unwrap().eval(&x);
        assert!(linalg::vnorm(&(&rep.limit - k.unit() * hx)) < 1e-10);
        assert!((rep.observed_rate - rep.rate).abs() <= 0.1 * rep.rate, "{} vs {}", rep.observed_rate, rep.rate);
    }

    #[test]
    fn stein_rejects_asymmetric_state() {
        let g = cz(3);
        let x = random_element(3, &mut rng());
        let err = stein_even_iterates(&g, &Functional::coordinate(3, 1), &x, 5, 1e-10).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }));
        let _ = involution_sharp(&g, &Functional::coordinate(3, 1)).unwrap();
    }

    #[test]
    fn certificates() {
        let g = kp();
        let phi = random_faithful_state(&g, &mut rng()).unwrap();
        let t = right_conv_operator(&g, &phi).unwrap().matrix;
        let x = random_element(8, &mut rng());
        let target = g.unit() * g.haar().unwrap().eval(&x);
        let ns: Vec<usize> = (1..=20).map(|k| k * 500).collect();
        let seq: Vec<CVec<f64>> = cesaro_means(&t, &ns).iter().map(|m| m * &x).collect();
        // Cesàro residuals decay like C/n, so 1e-3 is the attainable level at n = 10⁴.
        let cert = au_certificate(&g, &seq, &target, 0.1, 1e-3).unwrap();
        assert!(cert.norm_convergent && cert.h_complement == 0.0);

        let constant = vec![target.clone(); 5];
        let cert = au_certificate(&g, &constant, &target, 0.1, 1e-12).unwrap();
        assert!(cert.tails.iter().all(|&t| t == 0.0));

        let g2 = cz(2);
        let y = CVec::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]);
        let alt: Vec<CVec<f64>> = (0..20).map(|k| if k % 2 == 0 { y.clone() } else { -&y }).collect();
        let zero = CVec::<f64>::zeros(2);
        let err = au_certificate(&g2, &alt, &zero, 0.4, 1e-6).unwrap_err();
        assert!(matches!(err, Error::CertificateFailed { .. }));
    }

    #[test]
    fn certificate_with_proper_projection() {
        // Converges on δ_0, oscillates on δ_1: e = δ_0 works once ε > 1/2.
        let g = cz(2);
        let seq: Vec<CVec<f64>> = (0..20)
            .map(|k| CVec::from_vec(vec![c(0.0, 0.0), c(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)]))
            .collect();
        let zero = CVec::<f64>::zeros(2);
        let cert = au_certificate(&g, &seq, &zero, 0.6, 1e-6).unwrap();
        assert!(!cert.norm_convergent);
        assert_eq!(cert.projection_rank, 1);
        assert!((cert.h_complement - 0.5).abs() < 1e-12);
        assert!(au_certificate(&g, &seq, &zero, 0.4, 1e-6).is_err());
    }

    #[test]
    fn subgroups_of_s3_match_brute_force() {
        let g = cs3();
        let subs = quantum_subgroups(&g, 1e-12).unwrap();
        let mut got: Vec<Vec<usize>> = subs.iter().map(|s| s.basis.clone()).collect();
        got.sort();
        let mut want = GroupTable::symmetric3().subgroups();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn dual_group_subgroups_are_quotient_groups() {
        // Quotients of ℂ[Z_4] by blocks: ℂ[Z_4] is commutative with non-diagonal basis,
        // so the basis has a single block and only the trivial quotient appears.
        let g = build_group_algebra::<f64>(&GroupTable::cyclic(4).unwrap()).with_solved_haar().unwrap();
        let subs = quantum_subgroups(&g, 1e-12).unwrap();
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].basis.len(), 4);
    }

    #[test]
    fn kac_paljutkin_scan_finds_atypical_idempotent() {
        let g = kp();
        let scan = idempotent_scan(&g, 1, 3, 1e-10).unwrap();
        assert!(scan.idempotents.iter().all(|r| r.idempotency < 1e-8));
        let atypical: Vec<_> = scan.atypical().collect();
        assert!(!atypical.is_empty());
        let pal = [0.25, 0.0, 0.0, 0.25, 0.5, 0.0, 0.0, 0.0];
        assert!(atypical.iter().any(|r| r
            .rho
            .values()
            .iter()
            .zip(pal)
            .all(|(v, p)| (v - c(p, 0.0)).modulus() < 1e-10)));
    }

    #[test]
    fn power_law_fit() {
        let ns = [10.0, 100.0, 1000.0];
        let rs = [0.3, 0.03, 0.003];
        let (cst, a) = fit_power_law(&ns, &rs);
        assert!((a + 1.0).abs() < 1e-12 && (cst - 3.0).abs() < 1e-10);
    }
}
