//! Convolution semigroups `φ_t = exp_⋆(tL)` of states and their time averages
//! `M_t(x) = (1/t) ∫₀ᵗ T_{φ_s}(x) ds`.
//!
//! Generators are hermitian, conditionally positive functionals with
//! `L(1) = 0`. Since `φ ↦ T_φ` is multiplicative, `T_{φ_t} = exp(t T_L)` and
//! `φ_t = ε∘exp(t T_L)`.

use serde::Serialize;

use crate::conv_ops::{self, Certificate};
use crate::duals::{self, check_state, Functional};
use crate::error::{Error, Result};
use crate::hopf::FiniteQuantumGroup;
use crate::linalg;
use crate::lp::{self, Exponent};
use crate::scalar::{cr, CMat, CVec, Real};

/// Eigenvalue cluster of `T_L` treated as the kernel.
pub const KERNEL_TOL: f64 = 1e-10;

/// A generating functional `L`, stored by its basis values `L(e_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingFunctional<T: Real> {
    pub functional: Functional<T>,
}

impl<T: Real> GeneratingFunctional<T> {
    pub fn new(values: CVec<T>) -> Self {
        Self {
            functional: Functional::new(values),
        }
    }

    /// Poisson generator `ψ − ε`.
    pub fn poisson(g: &FiniteQuantumGroup<T>, psi: &Functional<T>) -> Self {
        Self {
            functional: psi - &g.counit_functional(),
        }
    }

    pub fn values(&self) -> &CVec<T> {
        self.functional.values()
    }

    pub fn dim(&self) -> usize {
        self.functional.dim()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorReport {
    pub valid: bool,
    /// `|L(1)|`.
    pub unit_value: f64,
    /// `max_i |L(e_i*) − conj(L(e_i))|`.
    pub hermitian_residual: f64,
    /// Smallest eigenvalue of `K_ij = L(f_i* f_j)` on a basis of `ker ε`.
    pub conditional_min_eig: f64,
}

/// Checks `L(1) = 0`, hermiticity and conditional positivity.
pub fn validate_generator<T: Real>(g: &FiniteQuantumGroup<T>, l: &GeneratingFunctional<T>, tol: T) -> GeneratorReport {
    let n = g.dim();
    if l.dim() != n {
        return GeneratorReport {
            valid: false,
            unit_value: f64::NAN,
            hermitian_residual: f64::NAN,
            conditional_min_eig: f64::NAN,
        };
    }
    let f = &l.functional;
    let unit_value = f.eval(g.unit()).norm_sqr().sqrt();
    let herm = (0..n).fold(T::zero(), |acc, i| {
        let e = g.basis(i);
        acc.max((f.eval(&g.star(&e)) - f.eval(&e).conj()).norm_sqr().sqrt())
    });
    // ker ε as the null space of the counit row.
    let row = CMat::<T>::from_fn(1, n, |_, j| g.counit()[j]);
    let (basis, _) = linalg::null_space(&row, T::lit(1e-12));
    let form = g.sesquilinear_form(f.values());
    let k = basis.adjoint() * form * &basis;
    let k = (&k + k.adjoint()) * cr(T::lit(0.5));
    let (vals, _) = linalg::hermitian_eigen(&k);
    let min_eig = vals.first().copied().unwrap_or_else(T::zero);
    let scale = T::one() + vals.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let slack = tol * scale;
    GeneratorReport {
        valid: unit_value <= slack && herm <= slack && min_eig >= -slack,
        unit_value: unit_value.as_f64(),
        hermitian_residual: herm.as_f64(),
        conditional_min_eig: min_eig.as_f64(),
    }
}

fn require_valid<T: Real>(g: &FiniteQuantumGroup<T>, l: &GeneratingFunctional<T>) -> Result<()> {
    let tol = T::epsilon().sqrt() * T::lit(1e-2);
    let r = validate_generator(g, l, tol);
    if r.valid {
        return Ok(());
    }
    Err(Error::InvalidGenerator(format!(
        "|L(1)| = {:e}, hermitian residual {:e}, conditional min eigenvalue {:e}",
        r.unit_value, r.hermitian_residual, r.conditional_min_eig
    )))
}

/// `G_L = T_L`, the generator of `t ↦ T_{φ_t}`.
pub fn generator_matrix<T: Real>(g: &FiniteQuantumGroup<T>, l: &GeneratingFunctional<T>) -> Result<CMat<T>> {
    Ok(conv_ops::right_conv_operator(g, &l.functional)?.matrix)
}

/// `T_{φ_t} = exp(t G_L)`.
pub fn semigroup_operator<T: Real>(g: &FiniteQuantumGroup<T>, l: &GeneratingFunctional<T>, t: T) -> Result<CMat<T>> {
    require_valid(g, l)?;
    if !(t >= T::zero()) {
        return Err(Error::InvalidTime(t.as_f64()));
    }
    Ok(linalg::expm(&(generator_matrix(g, l)? * cr(t))))
}

/// `φ_t = ε∘exp(t G_L)`.
pub fn semigroup_state<T: Real>(g: &FiniteQuantumGroup<T>, l: &GeneratingFunctional<T>, t: T) -> Result<Functional<T>> {
    let e = semigroup_operator(g, l, t)?;
    Ok(conv_ops::functional_of_operator(g, &e))
}

/// Projector onto `ker G_L` along its complement.
pub fn kernel_projection<T: Real>(gl: &CMat<T>) -> Result<CMat<T>> {
    linalg::kernel_projector(gl, T::lit(KERNEL_TOL))
        .map(|(p, _)| p)
        .map_err(|e| Error::InvalidGenerator(format!("zero is not a semisimple eigenvalue of T_L: {e:?}")))
}

/// `(1/t) V(t)` with `V(t) = ∫₀ᵗ exp(s G_L) ds`, as a matrix.
///
/// `V(t) = (G_L + P)⁻¹ (e^{tG_L} − I)(I − P) + t P` with `P` the kernel
/// projector: `G_L + P` is invertible and acts as `G_L` on the complement.
pub fn time_average_operator<T: Real>(g: &FiniteQuantumGroup<T>, l: &GeneratingFunctional<T>, t: T) -> Result<CMat<T>> {
    require_valid(g, l)?;
    if !(t > T::zero()) {
        return Err(Error::InvalidTime(t.as_f64()));
    }
    let gl = generator_matrix(g, l)?;
    let n = g.dim();
    let id = linalg::identity::<T>(n);
    let p = kernel_projection(&gl)?;
    let inv = linalg::inverse(&(&gl + &p))
        .ok_or_else(|| Error::InvalidGenerator("T_L + P is singular".into()))?;
    let e = linalg::expm(&(&gl * cr(t)));
    let v = inv * (e - &id) * (&id - &p) + &p * cr(t);
    Ok(v / cr(t))
}

/// `M_t(x)`.
pub fn time_average<T: Real>(g: &FiniteQuantumGroup<T>, l: &GeneratingFunctional<T>, t: T, x: &CVec<T>) -> Result<CVec<T>> {
    Ok(time_average_operator(g, l, t)? * x)
}

/// `M_t(x)` by composite Gauss–Legendre quadrature with `panels` panels of
/// `order` nodes each.
pub fn time_average_quadrature<T: Real>(
    g: &FiniteQuantumGroup<T>,
    l: &GeneratingFunctional<T>,
    t: T,
    x: &CVec<T>,
    panels: usize,
    order: usize,
) -> Result<CVec<T>> {
    require_valid(g, l)?;
    if !(t > T::zero()) {
        return Err(Error::InvalidTime(t.as_f64()));
    }
    let gl = generator_matrix(g, l)?;
    let h = t / T::lit(panels as f64);
    let half = h / T::lit(2.0);
    let (nodes, weights) = linalg::gauss_legendre::<T>(order);
    // exp(sG) at the node offsets inside one panel, reused for every panel.
    let local: Vec<CVec<T>> = nodes
        .iter()
        .map(|&s| linalg::expm(&(&gl * cr(half * (s + T::one())))) * x)
        .collect();
    let step = linalg::expm(&(&gl * cr(h)));
    let mut start = linalg::identity::<T>(g.dim());
    let mut acc = CVec::<T>::zeros(g.dim());
    for _ in 0..panels {
        for (v, &w) in local.iter().zip(&weights) {
            acc += (&start * v) * cr(w * half);
        }
        start = &step * start;
    }
    Ok(acc / cr(t))
}

/// Richardson-extrapolated `lim_{t→0} (φ_t − ε)/t` minus `L`, from
/// `t0, t0/2, t0/4`.
pub fn generator_consistency<T: Real>(g: &FiniteQuantumGroup<T>, l: &GeneratingFunctional<T>, t0: T) -> Result<T> {
    let eps = g.counit_functional();
    let d = |t: T| -> Result<Functional<T>> { Ok(&(&semigroup_state(g, l, t)? - &eps) * (T::one() / t)) };
    let (d1, d2, d4) = (d(t0)?, d(t0 / T::lit(2.0))?, d(t0 / T::lit(4.0))?);
    // Two Richardson steps for an error expansion in t, t², ...
    let r1 = &(&d2 * T::lit(2.0)) - &d1;
    let r2 = &(&d4 * T::lit(2.0)) - &d2;
    let r = &(&(&r2 * T::lit(4.0)) - &r1) * (T::one() / T::lit(3.0));
    Ok(r.distance(&l.functional))
}

/// One `(t, p)` row of [`semigroup_limits`].
#[derive(Debug, Clone, Serialize)]
pub struct SemigroupRow {
    pub t: f64,
    pub p: f64,
    /// `‖M_t(x) − F(x)‖_p`.
    pub residual_avg: f64,
    /// `‖T_{φ_t}(x) − F(x)‖_p`; only for symmetric semigroups.
    pub residual_direct: Option<f64>,
    /// Smallest eigenvalue of the Gram form of `φ_t`.
    pub is_state_min_eig: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PCertificate {
    pub p: f64,
    pub certificate: Option<Certificate>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SemigroupReport {
    pub generator: GeneratorReport,
    /// `φ_t = φ_t*` for all `t`, i.e. `L = L*`.
    pub symmetric: bool,
    pub rows: Vec<SemigroupRow>,
    /// a.s. certificates for the averaged sequence `M_t(x)` along the grid.
    pub certificates: Vec<PCertificate>,
}

/// Residuals of averaged (and, for symmetric generators, direct) semigroup
/// iterates against the projection onto `ker G_L`, over a time grid and a set
/// of exponents.
pub fn semigroup_limits<T: Real>(
    g: &FiniteQuantumGroup<T>,
    l: &GeneratingFunctional<T>,
    ps: &[Exponent<T>],
    t_grid: &[T],
    x: &CVec<T>,
    tol: T,
) -> Result<SemigroupReport> {
    require_valid(g, l)?;
    let generator = validate_generator(g, l, tol.max(T::epsilon().sqrt() * T::lit(1e-2)));
    let symmetric = duals::symmetry_residual(g, &l.functional)? <= tol.max(T::lit(1e-12));
    let base = lp::make_context(g, Exponent::Finite(T::lit(2.0)))?;
    let gl = generator_matrix(g, l)?;
    let f = kernel_projection(&gl)?;
    let fx = &f * x;
    let mut avg = Vec::with_capacity(t_grid.len());
    let mut direct = Vec::with_capacity(t_grid.len());
    let mut min_eigs = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        avg.push(time_average(g, l, t, x)?);
        let e = semigroup_operator(g, l, t)?;
        min_eigs.push(check_state(g, &conv_ops::functional_of_operator(g, &e), tol).min_eig);
        direct.push(e * x);
    }
    let mut rows = Vec::new();
    let mut certificates = Vec::new();
    for &p in ps {
        let ctx = base.with_p(p)?;
        for (k, &t) in t_grid.iter().enumerate() {
            rows.push(SemigroupRow {
                t: t.as_f64(),
                p: p.as_f64(),
                residual_avg: ctx.norm(&(&avg[k] - &fx)).as_f64(),
                residual_direct: symmetric.then(|| ctx.norm(&(&direct[k] - &fx)).as_f64()),
                is_state_min_eig: min_eigs[k],
            });
        }
        let cert = lp::as_certificate(&ctx, &avg, &fx, 0.1, tol.max(T::lit(1e-3)));
        certificates.push(match cert {
            Ok(c) => PCertificate {
                p: p.as_f64(),
                certificate: Some(c),
                failure: None,
            },
            Err(e) => PCertificate {
                p: p.as_f64(),
                certificate: None,
                failure: Some(e.to_string()),
            },
        });
    }
    Ok(SemigroupReport {
        generator,
        symmetric,
        rows,
        certificates,
    })
}
