//! Tracial `L^p(M, h)` over a finite quantum group.
//!
//! Finite quantum groups are of Kac type, so the Haar state is a trace and
//! the density of `h` is `D = 1`: `‖x‖_p = h(|x|^p)^{1/p}` computed in the GNS
//! representation `λ` on `L²(h)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::ComplexField;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conv_ops::{self, Certificate};
use crate::duals::{self, check_state, Functional};
use crate::error::{Error, Result};
use crate::hopf::{self, FiniteQuantumGroup};
use crate::linalg;
use crate::scalar::{cr, zero, CMat, CVec, Real, C};

/// An exponent `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent<T: Real> {
    Finite(T),
    Inf,
}

impl<T: Real> Exponent<T> {
    pub fn new(p: T) -> Result<Self> {
        if !(p >= T::one()) {
            return Err(Error::InvalidExponent(format!("{p}: p must be at least 1")));
        }
        Ok(Self::Finite(p))
    }

    /// `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(self) -> Self {
        match self {
            Self::Inf => Self::Finite(T::one()),
            Self::Finite(p) if p == T::one() => Self::Inf,
            Self::Finite(p) => Self::Finite(p / (p - T::one())),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Self::Finite(p) => p.as_f64(),
            Self::Inf => f64::INFINITY,
        }
    }
}

impl<T: Real> fmt::Display for Exponent<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Inf => write!(f, "inf"),
        }
    }
}

impl<T: Real> FromStr for Exponent<T> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Self::Inf),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidExponent(format!("`{other}` is not a number")))?;
                if p.is_infinite() && p > 0.0 {
                    return Ok(Self::Inf);
                }
                Self::new(T::lit(p))
            }
        }
    }
}

/// GNS data of the Haar state together with an exponent.
#[derive(Debug, Clone)]
pub struct LpContext<T: Real> {
    group: FiniteQuantumGroup<T>,
    p: Exponent<T>,
    gram: CMat<T>,
    g_half: CMat<T>,
    g_half_inv: CMat<T>,
    /// `λ(e_i)` on basis coordinates.
    rep: Vec<CMat<T>>,
    /// Density of `h` with respect to the trace; the unit here.
    density: CVec<T>,
}

/// Builds the tracial `L^p` context; requires a faithful tracial Haar state.
pub fn make_context<T: Real>(g: &FiniteQuantumGroup<T>, p: Exponent<T>) -> Result<LpContext<T>> {
    if let Exponent::Finite(x) = p {
        Exponent::new(x)?;
    }
    let h = g.haar_values().ok_or_else(|| Error::HaarMissing(g.name().into()))?;
    let trace_res = hopf::traciality_residual(g, h);
    if trace_res > T::lit(1e-10) {
        return Err(Error::NonTracialHaar {
            residual: trace_res.as_f64(),
        });
    }
    let gram = g.gram()?;
    let (vals, _) = linalg::hermitian_eigen(&gram);
    let min = vals.first().copied().unwrap_or_else(T::zero);
    if min <= T::lit(1e-12) {
        return Err(Error::NonFaithfulHaar { min_eig: min.as_f64() });
    }
    let (g_half, g_half_inv) = linalg::hpd_sqrt_pair(&gram);
    let n = g.dim();
    let rep: Vec<CMat<T>> = (0..n).map(|i| g.left_mult(&g.basis(i))).collect();
    // x ↦ λ(x) is injective because λ(x)1̂ = x.
    Ok(LpContext {
        group: g.clone(),
        p,
        gram,
        g_half,
        g_half_inv,
        rep,
        density: g.unit().clone(),
    })
}

impl<T: Real> LpContext<T> {
    pub fn group(&self) -> &FiniteQuantumGroup<T> {
        &self.group
    }
    pub fn p(&self) -> Exponent<T> {
        self.p
    }
    pub fn gram(&self) -> &CMat<T> {
        &self.gram
    }
    pub fn density(&self) -> &CVec<T> {
        &self.density
    }
    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    /// Same context with another exponent.
    pub fn with_p(&self, p: Exponent<T>) -> Result<Self> {
        if let Exponent::Finite(x) = p {
            Exponent::new(x)?;
        }
        let mut out = self.clone();
        out.p = p;
        Ok(out)
    }

    /// `λ(x)` on basis coordinates.
    pub fn rep(&self, x: &CVec<T>) -> CMat<T> {
        let n = self.dim();
        let mut out = CMat::<T>::zeros(n, n);
        for (i, m) in self.rep.iter().enumerate() {
            if x[i] != zero() {
                out += m * x[i];
            }
        }
        out
    }

    /// `λ(x)` in an orthonormal frame of `L²(h)`.
    pub fn rep_orthonormal(&self, x: &CVec<T>) -> CMat<T> {
        &self.g_half * self.rep(x) * &self.g_half_inv
    }

    /// `max ‖λ(e_i e_j) − λ(e_i)λ(e_j)‖`, `max ‖λ(e_i*) − λ(e_i)^†‖` and
    /// `max |h(e_i) − ⟨1̂, λ(e_i)1̂⟩|`.
    pub fn representation_residuals(&self) -> (T, T, T) {
        let g = &self.group;
        let n = self.dim();
        let gi = linalg::inverse(&self.gram).expect("faithful Gram");
        let h = g.haar_values().expect("context has Haar");
        let mut mult = T::zero();
        let mut star = T::zero();
        let mut haar = T::zero();
        for i in 0..n {
            let ei = g.basis(i);
            let adj = &gi * self.rep[i].adjoint() * &self.gram;
            star = star.max(linalg::frob(&(self.rep(&g.star(&ei)) - adj)));
            let v = linalg::form(&self.gram, g.unit(), &(&self.rep[i] * g.unit()));
            haar = haar.max((v - h[i]).modulus());
            for j in 0..n {
                let prod = g.product(&ei, &g.basis(j));
                mult = mult.max(linalg::frob(&(self.rep(&prod) - &self.rep[i] * &self.rep[j])));
            }
        }
        (mult, star, haar)
    }

    /// `‖x‖_p` at the context's exponent.
    pub fn norm(&self, x: &CVec<T>) -> T {
        self.norm_at(self.p, x)
    }

    /// `‖x‖_q` for any exponent `q`.
    pub fn norm_at(&self, q: Exponent<T>, x: &CVec<T>) -> T {
        let a = self.rep_orthonormal(x);
        match q {
            Exponent::Inf => linalg::spectral_norm(&a),
            Exponent::Finite(p) => {
                // h(|x|^p) = ⟨u, f(A*A) u⟩ with u = G^{1/2} 1̂.
                let u = &self.g_half * self.group.unit();
                let aa = a.adjoint() * &a;
                let (mu, vecs) = linalg::hermitian_eigen(&aa);
                let coeff = vecs.adjoint() * u;
                let half = p / T::lit(2.0);
                let mut acc = T::zero();
                for (k, &m) in mu.iter().enumerate() {
                    let m = m.max(T::zero());
                    if m > T::zero() {
                        acc += coeff[k].norm_sqr() * m.powf(half);
                    }
                }
                acc.powf(T::one() / p)
            }
        }
    }

    /// `⟨x, y⟩ = h(x* y)`.
    pub fn inner(&self, x: &CVec<T>, y: &CVec<T>) -> C<T> {
        linalg::form(&self.gram, x, y)
    }
}

/// `‖x‖_p` in the context.
pub fn lp_norm<T: Real>(ctx: &LpContext<T>, x: &CVec<T>) -> T {
    ctx.norm(x)
}

/// `ψ = ψ₊ − ψ₋` for a hermitian functional, with orthogonally supported
/// positive parts obtained from the spectral decomposition of its density.
#[derive(Debug, Clone)]
pub struct JordanParts<T: Real> {
    pub positive: Functional<T>,
    pub negative: Functional<T>,
}

impl<T: Real> JordanParts<T> {
    /// `‖ψ‖ = ψ₊(1) + ψ₋(1)`.
    pub fn total_mass(&self, g: &FiniteQuantumGroup<T>) -> T {
        self.positive.eval(g.unit()).re + self.negative.eval(g.unit()).re
    }
}

/// Density `d` with `ψ(x) = h(d x)`.
pub fn density_of<T: Real>(ctx: &LpContext<T>, psi: &Functional<T>) -> Result<CVec<T>> {
    let g = &ctx.group;
    let n = g.dim();
    let h = g.haar()?;
    // W_ij = h(e_i e_j); ψ_j = Σ_i d_i W_ij.
    let w = CMat::<T>::from_fn(n, n, |i, j| h.eval(&g.product(&g.basis(i), &g.basis(j))));
    let inv = linalg::inverse(&w.transpose()).ok_or(Error::NonFaithfulHaar { min_eig: 0.0 })?;
    Ok(inv * psi.values())
}

/// Jordan decomposition of a hermitian functional.
pub fn jordan_decomposition<T: Real>(ctx: &LpContext<T>, psi: &Functional<T>) -> Result<JordanParts<T>> {
    let g = &ctx.group;
    let d = density_of(ctx, psi)?;
    let a = ctx.rep_orthonormal(&d);
    let pos = linalg::hermitian_map(&a, |l| cr(l.max(T::zero())));
    let neg = linalg::hermitian_map(&a, |l| cr((-l).max(T::zero())));
    let back = |m: &CMat<T>| &ctx.g_half_inv * m * &ctx.g_half * g.unit();
    Ok(JordanParts {
        positive: duals::state_from_density(g, &back(&pos))?,
        negative: duals::state_from_density(g, &back(&neg))?,
    })
}

/// `φ = (φ₁ − φ₂) + i(φ₃ − φ₄)` with each `φ_k` positive.
#[derive(Debug, Clone)]
pub struct FourKernels<T: Real> {
    pub parts: [Functional<T>; 4],
    /// `‖φ‖_{M_*}`, the trace norm of the density.
    pub norm: T,
}

pub fn four_kernel_decomposition<T: Real>(ctx: &LpContext<T>, phi: &Functional<T>) -> Result<FourKernels<T>> {
    let g = &ctx.group;
    // φ^†(x) = conj(φ(x*))
    let dagger = Functional::new(CVec::<T>::from_fn(g.dim(), |i, _| {
        phi.eval(&g.star(&g.basis(i))).conj()
    }));
    let re = &(phi + &dagger) * T::lit(0.5);
    let im = (phi - &dagger).scale(C::new(T::zero(), -T::lit(0.5)));
    let jr = jordan_decomposition(ctx, &re)?;
    let ji = jordan_decomposition(ctx, &im)?;
    // ‖φ‖ = h(|d|) = ‖d‖₁.
    let d = density_of(ctx, phi)?;
    let norm = ctx.norm_at(Exponent::Finite(T::one()), &d);
    Ok(FourKernels {
        parts: [jr.positive, jr.negative, ji.positive, ji.negative],
        norm,
    })
}

/// `T_φ` viewed on `L^p`, with its norm data.
#[derive(Debug, Clone)]
pub struct LpOperator<T: Real> {
    pub matrix: CMat<T>,
    pub p: Exponent<T>,
    /// `‖φ‖_{M_*}`; equals `‖T_φ‖_{∞→∞} = ‖T_φ‖_{1→1}` and bounds every
    /// `‖T_φ‖_{p→p}` by interpolation.
    pub interpolation_bound: T,
    /// `Σ_k φ_k(1)` over the four positive parts; at most `4‖φ‖`.
    pub four_kernel_bound: T,
    pub kernels: FourKernels<T>,
}

pub fn conv_operator_lp<T: Real>(ctx: &LpContext<T>, phi: &Functional<T>) -> Result<LpOperator<T>> {
    let g = &ctx.group;
    let t = conv_ops::right_conv_operator(g, phi)?.matrix;
    let kernels = four_kernel_decomposition(ctx, phi)?;
    let four = kernels
        .parts
        .iter()
        .fold(T::zero(), |acc, k| acc + k.eval(g.unit()).re);
    Ok(LpOperator {
        matrix: t,
        p: ctx.p,
        interpolation_bound: kernels.norm,
        four_kernel_bound: four,
        kernels,
    })
}

/// Largest `‖Tx‖_p / ‖x‖_p` over `samples` seeded random directions.
pub fn sampled_operator_norm<T: Real>(ctx: &LpContext<T>, t: &CMat<T>, samples: usize, seed: u64) -> T {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = T::zero();
    for _ in 0..samples {
        let x = duals::random_element::<T, _>(ctx.dim(), &mut rng);
        let nx = ctx.norm(&x);
        if nx > T::zero() {
            best = best.max(ctx.norm(&(t * &x)) / nx);
        }
    }
    best
}

/// Adjoint on `L²(h)`: `T^† = G⁻¹ Tᴴ G`.
pub fn l2_adjoint<T: Real>(ctx: &LpContext<T>, t: &CMat<T>) -> Result<CMat<T>> {
    match ctx.p {
        Exponent::Finite(p) if (p - T::lit(2.0)).abs() < T::epsilon() => {}
        other => {
            return Err(Error::InvalidExponent(format!(
                "the L² adjoint needs p = 2, context has p = {other}"
            )))
        }
    }
    let gi = linalg::inverse(&ctx.gram).ok_or(Error::NonFaithfulHaar { min_eig: 0.0 })?;
    Ok(gi * t.adjoint() * &ctx.gram)
}

/// How [`fixed_point_projection_lp`] obtained its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    /// `F^{(p)}(x) = τ(D^{1/p'} x) D^{1/p} = h(x) 1`.
    Formula,
    /// Spectral projection of `T_φ` (the closed formula needs faithful `φ`).
    Spectral,
}

#[derive(Debug, Clone)]
pub struct FixedPointLp<T: Real> {
    pub value: CVec<T>,
    pub method: ProjectionMethod,
}

/// Projection of `x` onto the fixed points of `T_φ^{(p)}`.
pub fn fixed_point_projection_lp<T: Real>(
    ctx: &LpContext<T>,
    phi: &Functional<T>,
    x: &CVec<T>,
    tol: T,
) -> Result<FixedPointLp<T>> {
    let g = &ctx.group;
    let rep = check_state(g, phi, tol);
    if !rep.state {
        return Err(Error::NotAState {
            min_eig: rep.min_eig,
            unit_value: rep.unit_value.0,
        });
    }
    if rep.faithful {
        let h = g.haar()?;
        // τ = h and D = 1, so both density powers drop out.
        let hx = h.eval(&g.product(&ctx.density, x));
        return Ok(FixedPointLp {
            value: &ctx.density * hx,
            method: ProjectionMethod::Formula,
        });
    }
    let t = conv_ops::right_conv_operator(g, phi)?.matrix;
    let f = conv_ops::fixed_point_projection(&t, tol)?;
    Ok(FixedPointLp {
        value: f * x,
        method: ProjectionMethod::Spectral,
    })
}

/// `‖M_n(T)x − y‖_p` at each length in `ns` (increasing).
pub fn cesaro_lp_residuals<T: Real>(ctx: &LpContext<T>, t: &CMat<T>, x: &CVec<T>, y: &CVec<T>, ns: &[usize]) -> Vec<T> {
    let mut out = Vec::with_capacity(ns.len());
    let mut cur = x.clone();
    let mut sum = CVec::<T>::zeros(x.len());
    let mut k = 0;
    for &n in ns {
        while k < n {
            cur = t * cur;
            sum += &cur;
            k += 1;
        }
        let mean = &sum / cr(T::lit(n as f64));
        out.push(ctx.norm(&(mean - y)));
    }
    out
}

/// `‖T^{2n}x − F₂x‖_p` for `n = 1..=n_max`, `F₂` the projection onto the
/// fixed points of `T_φ²`; requires `φ = φ*`.
pub fn stein_lp_residuals<T: Real>(
    ctx: &LpContext<T>,
    phi: &Functional<T>,
    x: &CVec<T>,
    n_max: usize,
    tol: T,
) -> Result<Vec<T>> {
    let g = &ctx.group;
    let rep = conv_ops::stein_even_iterates(g, phi, x, 0, tol)?;
    let t = conv_ops::right_conv_operator(g, phi)?.matrix;
    let t2 = &t * &t;
    let mut cur = x.clone();
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        cur = &t2 * cur;
        out.push(ctx.norm(&(&cur - &rep.limit)));
    }
    Ok(out)
}

/// Almost sure (and bilateral almost sure) convergence certificate in
/// `L^p`, using the single-term family `a_{n,1} = (x_n − x) D^{-1/p}` with
/// `D = 1`.
pub fn as_certificate<T: Real>(
    ctx: &LpContext<T>,
    seq: &[CVec<T>],
    target: &CVec<T>,
    epsilon: f64,
    tol: T,
) -> Result<Certificate> {
    conv_ops::certificate(&ctx.group, seq, target, epsilon, tol, Some(ctx.p.as_f64()))
}

/// `|h(xy)|` and `‖x‖_p ‖y‖_{p'}` for a Hölder spot check.
pub fn holder_pair<T: Real>(ctx: &LpContext<T>, x: &CVec<T>, y: &CVec<T>) -> (T, T) {
    let g = &ctx.group;
    let h = g.haar().expect("context has Haar");
    let lhs = h.eval(&g.product(x, y)).modulus();
    let rhs = ctx.norm(x) * ctx.norm_at(ctx.p.conjugate(), y);
    (lhs, rhs)
}
