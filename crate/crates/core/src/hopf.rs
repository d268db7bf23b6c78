//! Finite quantum groups given by structure constants.
//!
//! A [`FiniteQuantumGroup`] is a finite-dimensional Hopf *-algebra written in
//! a fixed basis `e_0, …, e_{n-1}`:
//!
//! * `e_i · e_j = Σ_k m[i][j][k] e_k`
//! * `Δ(e_i) = Σ_{j,k} c[i][j][k] e_j ⊗ e_k`
//! * `(e_i)* = Σ_k J[i][k] e_k`, extended conjugate-linearly
//! * `S(e_i) = Σ_k S[i][k] e_k`
//!
//! Elements are coordinate vectors in this basis and functionals are the
//! vectors of their values on basis elements.

use std::fmt;

use nalgebra::ComplexField;
use serde::{Deserialize, Serialize};

use crate::duals::Functional;
use crate::error::{Error, Result};
use crate::group_table::GroupTable;
use crate::linalg;
use crate::scalar::{c, cr, one, zero, CMat, CVec, Real, C};

/// Dense cubic array of complex structure constants.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3<T: Real> {
    n: usize,
    data: Vec<C<T>>,
}

impl<T: Real> Tensor3<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![zero(); n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> C<T> {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: C<T>) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, k: usize, v: C<T>) {
        let o = self.offset(i, j, k);
        self.data[o] += v;
    }

    /// Slice `[i][·][·]` as an `n × n` matrix.
    pub fn slice(&self, i: usize) -> CMat<T> {
        CMat::<T>::from_fn(self.n, self.n, |j, k| self.get(i, j, k))
    }

    /// Tensor with the last two legs exchanged.
    pub fn flipped(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..self.n {
                    out.set(i, k, j, self.get(i, j, k));
                }
            }
        }
        out
    }

    /// Tensor with the first two legs exchanged.
    pub fn swapped_inputs(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..self.n {
                    out.set(j, i, k, self.get(i, j, k));
                }
            }
        }
        out
    }

    pub fn frob_distance(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc + (a - b).norm_sqr())
            .sqrt()
    }

    pub fn iter_nonzero(&self) -> impl Iterator<Item = (usize, usize, usize, C<T>)> + '_ {
        let n = self.n;
        self.data.iter().enumerate().filter_map(move |(o, v)| {
            (v.re != T::zero() || v.im != T::zero()).then(|| (o / (n * n), (o / n) % n, o % n, *v))
        })
    }
}

/// Raw structure constants, before validation.
#[derive(Clone, Debug)]
pub struct StructureConstants<T: Real> {
    pub name: String,
    pub dim: usize,
    /// Basis index of the unit, when the unit is a basis element.
    pub unit_index: Option<usize>,
    pub mult: Tensor3<T>,
    pub coproduct: Tensor3<T>,
    pub counit: CVec<T>,
    pub involution: CMat<T>,
    pub antipode: CMat<T>,
}

/// A finite-dimensional Hopf *-algebra with (optionally) its Haar state.
///
/// Immutable once built; [`FiniteQuantumGroup::with_solved_haar`] returns an
/// updated copy.
#[derive(Clone, Debug)]
pub struct FiniteQuantumGroup<T: Real> {
    name: String,
    dim: usize,
    unit_index: Option<usize>,
    unit: CVec<T>,
    mult: Tensor3<T>,
    coproduct: Tensor3<T>,
    counit: CVec<T>,
    involution: CMat<T>,
    antipode: CMat<T>,
    haar: Option<CVec<T>>,
}

impl<T: Real> FiniteQuantumGroup<T> {
    /// Checks shapes, locates the unit and the counit normalization.
    ///
    /// When `unit_index` is absent the unit is solved from the multiplication
    /// constants as the two-sided identity.
    pub fn new(parts: StructureConstants<T>) -> Result<Self> {
        let n = parts.dim;
        if n == 0 {
            return Err(Error::Structure("dimension must be positive".into()));
        }
        let check = |what: &'static str, found: usize| {
            if found != n {
                Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    found,
                })
            } else {
                Ok(())
            }
        };
        check("mult", parts.mult.dim())?;
        check("coproduct", parts.coproduct.dim())?;
        check("counit", parts.counit.len())?;
        check("involution rows", parts.involution.nrows())?;
        check("involution cols", parts.involution.ncols())?;
        check("antipode rows", parts.antipode.nrows())?;
        check("antipode cols", parts.antipode.ncols())?;
        let unit = match parts.unit_index {
            Some(i) if i >= n => {
                return Err(Error::Structure(format!("unit_index {i} out of range 0..{n}")))
            }
            Some(i) => basis_vector(n, i),
            None => solve_unit(&parts.mult)?,
        };
        let eps_one = parts.counit.dot(&unit);
        if (eps_one - one::<T>()).modulus() > T::epsilon().sqrt() {
            return Err(Error::CounitNormalization {
                value: eps_one.re.as_f64(),
            });
        }
        Ok(Self {
            name: parts.name,
            dim: n,
            unit_index: parts.unit_index,
            unit,
            mult: parts.mult,
            coproduct: parts.coproduct,
            counit: parts.counit,
            involution: parts.involution,
            antipode: parts.antipode,
            haar: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn unit_index(&self) -> Option<usize> {
        self.unit_index
    }
    /// Coordinates of the unit `1`.
    pub fn unit(&self) -> &CVec<T> {
        &self.unit
    }
    pub fn mult(&self) -> &Tensor3<T> {
        &self.mult
    }
    pub fn coproduct(&self) -> &Tensor3<T> {
        &self.coproduct
    }
    pub fn counit(&self) -> &CVec<T> {
        &self.counit
    }
    pub fn involution(&self) -> &CMat<T> {
        &self.involution
    }
    pub fn antipode(&self) -> &CMat<T> {
        &self.antipode
    }

    /// Haar state values, if solved.
    pub fn haar_values(&self) -> Option<&CVec<T>> {
        self.haar.as_ref()
    }

    pub fn haar(&self) -> Result<Functional<T>> {
        self.haar
            .as_ref()
            .map(|h| Functional::new(h.clone()))
            .ok_or_else(|| Error::HaarMissing(self.name.clone()))
    }

    pub fn counit_functional(&self) -> Functional<T> {
        Functional::new(self.counit.clone())
    }

    /// Copy with the Haar state solved and stored.
    pub fn with_solved_haar(&self) -> Result<Self> {
        let h = solve_haar(self)?;
        Ok(self.with_haar_values(h.values().clone()))
    }

    pub(crate) fn with_haar_values(&self, h: CVec<T>) -> Self {
        let mut out = self.clone();
        out.haar = Some(h);
        out
    }

    /// Copy with a replaced label.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        let mut out = self.clone();
        out.name = name.into();
        out
    }

    pub fn basis(&self, i: usize) -> CVec<T> {
        basis_vector(self.dim, i)
    }

    /// Algebra product of two coordinate vectors.
    pub fn product(&self, x: &CVec<T>, y: &CVec<T>) -> CVec<T> {
        let n = self.dim;
        let mut out = CVec::<T>::zeros(n);
        for (i, j, k, v) in self.mult.iter_nonzero() {
            out[k] += x[i] * y[j] * v;
        }
        out
    }

    /// `x*`, conjugate-linear.
    pub fn star(&self, x: &CVec<T>) -> CVec<T> {
        self.involution.transpose() * x.map(|z| z.conj())
    }

    /// `S(x)`.
    pub fn apply_antipode(&self, x: &CVec<T>) -> CVec<T> {
        self.antipode.transpose() * x
    }

    /// `Δ(x)` as the coefficient matrix `X` with `Δ(x) = Σ X_{jk} e_j ⊗ e_k`.
    pub fn apply_coproduct(&self, x: &CVec<T>) -> CMat<T> {
        let n = self.dim;
        let mut out = CMat::<T>::zeros(n, n);
        for (i, j, k, v) in self.coproduct.iter_nonzero() {
            out[(j, k)] += x[i] * v;
        }
        out
    }

    /// Matrix of left multiplication `y ↦ x y`.
    pub fn left_mult(&self, x: &CVec<T>) -> CMat<T> {
        let n = self.dim;
        let mut out = CMat::<T>::zeros(n, n);
        for (i, j, k, v) in self.mult.iter_nonzero() {
            out[(k, j)] += x[i] * v;
        }
        out
    }

    /// Matrix of right multiplication `y ↦ y x`.
    pub fn right_mult(&self, x: &CVec<T>) -> CMat<T> {
        let n = self.dim;
        let mut out = CMat::<T>::zeros(n, n);
        for (i, j, k, v) in self.mult.iter_nonzero() {
            out[(k, i)] += x[j] * v;
        }
        out
    }

    /// `P_{ij} = φ(e_i* e_j)`; `φ(x* y) = xᴴ P y`.
    pub fn sesquilinear_form(&self, phi: &CVec<T>) -> CMat<T> {
        let n = self.dim;
        // w[k][j] = φ(e_k e_j)
        let mut w = CMat::<T>::zeros(n, n);
        for (k, j, r, v) in self.mult.iter_nonzero() {
            w[(k, j)] += v * phi[r];
        }
        &self.involution * w
    }

    /// Gram matrix `G_{ij} = h(e_i* e_j)` of the Haar state.
    pub fn gram(&self) -> Result<CMat<T>> {
        let h = self.haar_values().ok_or_else(|| Error::HaarMissing(self.name.clone()))?;
        Ok(self.sesquilinear_form(h))
    }

    /// Connected components of the basis under multiplication.
    ///
    /// For a basis adapted to the block decomposition (matrix units of each
    /// simple summand) these are exactly the simple blocks.
    pub fn basis_blocks(&self) -> Vec<Vec<usize>> {
        let n = self.dim;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for (i, j, k, _) in self.mult.iter_nonzero() {
            for (a, b) in [(i, j), (i, k)] {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut root_of: Vec<Option<usize>> = vec![None; n];
        for x in 0..n {
            let r = find(&mut parent, x);
            match root_of[r] {
                Some(g) => groups[g].push(x),
                None => {
                    root_of[r] = Some(groups.len());
                    groups.push(vec![x]);
                }
            }
        }
        groups
    }

    /// Value `φ(1_B)` of a functional on the unit of each basis block.
    pub fn block_weights(&self, phi: &CVec<T>) -> Vec<T> {
        self.basis_blocks()
            .iter()
            .map(|b| b.iter().fold(T::zero(), |acc, &i| acc + (self.unit[i] * phi[i]).re))
            .collect()
    }

    /// `‖m − m∘flip‖`; zero iff the algebra is commutative.
    pub fn commutativity_residual(&self) -> T {
        self.mult.frob_distance(&self.mult.swapped_inputs())
    }

    /// `‖Δ − flip∘Δ‖`; zero iff the coproduct is cocommutative.
    pub fn cocommutativity_residual(&self) -> T {
        self.coproduct.frob_distance(&self.coproduct.flipped())
    }

    /// Structure constants for export.
    pub fn structure(&self) -> StructureConstants<T> {
        StructureConstants {
            name: self.name.clone(),
            dim: self.dim,
            unit_index: self.unit_index,
            mult: self.mult.clone(),
            coproduct: self.coproduct.clone(),
            counit: self.counit.clone(),
            involution: self.involution.clone(),
            antipode: self.antipode.clone(),
        }
    }
}

pub(crate) fn basis_vector<T: Real>(n: usize, i: usize) -> CVec<T> {
    let mut v = CVec::<T>::zeros(n);
    v[i] = one();
    v
}

fn solve_unit<T: Real>(mult: &Tensor3<T>) -> Result<CVec<T>> {
    let n = mult.dim();
    // Σ_i u_i m[i][j][k] = δ_jk and Σ_i u_i m[j][i][k] = δ_jk.
    let mut a = CMat::<T>::zeros(2 * n * n, n);
    let mut b = CVec::<T>::zeros(2 * n * n);
    for j in 0..n {
        for k in 0..n {
            let r = j * n + k;
            for i in 0..n {
                a[(r, i)] = mult.get(i, j, k);
                a[(n * n + r, i)] = mult.get(j, i, k);
            }
            if j == k {
                b[r] = one();
                b[n * n + r] = one();
            }
        }
    }
    let u = linalg::pinv(&a, T::epsilon() * T::lit(100.0)) * &b;
    let res = linalg::vnorm(&(&a * &u - &b));
    if res > T::epsilon().sqrt() {
        return Err(Error::Structure(format!(
            "multiplication has no two-sided unit (least-squares residual {:e})",
            res.as_f64()
        )));
    }
    Ok(u)
}

/// How an axiom check is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `value` is a residual norm; passes when `value ≤ tol`.
    Residual,
    /// `value` is `σ_min/σ_max` of a linear map; passes when `value > tol`.
    Invertibility,
    /// `value` is a minimal eigenvalue; passes when `value > tol`.
    PositiveDefinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_number: Option<f64>,
}

/// Outcome of [`verify_axioms`], one entry per axiom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub group: String,
    pub tol: f64,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    /// Largest value among residual-type checks.
    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.kind == CheckKind::Residual)
            .map(|c| c.value)
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "axioms for {} (tol {:e})", self.group, self.tol)?;
        for c in &self.checks {
            writeln!(
                f,
                "  {:<32} {:>12.3e}  {}",
                c.name,
                c.value,
                if c.passed { "ok" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

struct Builder<T: Real> {
    tol: T,
    checks: Vec<AxiomCheck>,
}

impl<T: Real> Builder<T> {
    fn residual(&mut self, name: &str, value: T) {
        self.checks.push(AxiomCheck {
            name: name.into(),
            kind: CheckKind::Residual,
            value: value.as_f64(),
            passed: value <= self.tol,
            condition_number: None,
        });
    }

    fn invertible(&mut self, name: &str, sigma: &[T]) {
        let max = sigma.first().copied().unwrap_or_else(T::zero);
        let min = sigma.last().copied().unwrap_or_else(T::zero);
        let ratio = if max > T::zero() { min / max } else { T::zero() };
        self.checks.push(AxiomCheck {
            name: name.into(),
            kind: CheckKind::Invertibility,
            value: ratio.as_f64(),
            passed: ratio > self.tol,
            condition_number: Some(if ratio > T::zero() {
                (T::one() / ratio).as_f64()
            } else {
                f64::INFINITY
            }),
        });
    }

    fn positive(&mut self, name: &str, min_eig: T) {
        self.checks.push(AxiomCheck {
            name: name.into(),
            kind: CheckKind::PositiveDefinite,
            value: min_eig.as_f64(),
            passed: min_eig > self.tol,
            condition_number: None,
        });
    }
}

fn sq<T: Real>(z: C<T>) -> T {
    z.norm_sqr()
}

/// Evaluates every Hopf *-algebra axiom, the Kac conditions, Galois-map
/// invertibility and, when the Haar state is present, its invariance,
/// faithfulness, traciality and unimodularity.
pub fn verify_axioms<T: Real>(g: &FiniteQuantumGroup<T>, tol: T) -> AxiomReport {
    let n = g.dim;
    let m = &g.mult;
    let cp = &g.coproduct;
    let u = &g.unit;
    let eps = &g.counit;
    let j = &g.involution;
    let s = &g.antipode;
    let mut b = Builder {
        tol,
        checks: Vec::new(),
    };

    // Left multiplication matrices λ(e_i).
    let lam: Vec<CMat<T>> = (0..n).map(|i| g.left_mult(&g.basis(i))).collect();

    // associativity: λ(e_i e_j) = λ(e_i) λ(e_j)
    let mut acc = T::zero();
    for i in 0..n {
        for jj in 0..n {
            let mut lhs = CMat::<T>::zeros(n, n);
            for k in 0..n {
                let v = m.get(i, jj, k);
                if v != zero() {
                    lhs += &lam[k] * v;
                }
            }
            acc += (lhs - &lam[i] * &lam[jj]).norm_squared();
        }
    }
    b.residual("associativity", acc.sqrt());

    // unit law
    let mut acc = T::zero();
    for jj in 0..n {
        for k in 0..n {
            let delta = if jj == k { one() } else { zero() };
            let mut l = zero::<T>();
            let mut r = zero::<T>();
            for i in 0..n {
                l += u[i] * m.get(i, jj, k);
                r += u[i] * m.get(jj, i, k);
            }
            acc += sq(l - delta) + sq(r - delta);
        }
    }
    b.residual("unit_law", acc.sqrt());

    // involution: x** = x and (xy)* = y* x*
    let conj_j = j.map(|z| z.conj());
    b.residual(
        "involution_involutive",
        linalg::frob(&(&conj_j * j - linalg::identity::<T>(n))),
    );
    let mut acc = T::zero();
    for a in 0..n {
        for bb in 0..n {
            let ea = g.basis(a);
            let eb = g.basis(bb);
            let lhs = g.star(&g.product(&ea, &eb));
            let rhs = g.product(&g.star(&eb), &g.star(&ea));
            acc += (lhs - rhs).norm_squared();
        }
    }
    b.residual("involution_antimultiplicative", acc.sqrt());

    // coassociativity
    let mut acc = T::zero();
    for i in 0..n {
        for a in 0..n {
            for bb in 0..n {
                for k in 0..n {
                    let mut l = zero::<T>();
                    let mut r = zero::<T>();
                    for p in 0..n {
                        l += cp.get(i, p, k) * cp.get(p, a, bb);
                        r += cp.get(i, a, p) * cp.get(p, bb, k);
                    }
                    acc += sq(l - r);
                }
            }
        }
    }
    b.residual("coassociativity", acc.sqrt());

    // counit law
    let mut acc = T::zero();
    for i in 0..n {
        for k in 0..n {
            let delta = if i == k { one() } else { zero() };
            let mut l = zero::<T>();
            let mut r = zero::<T>();
            for p in 0..n {
                l += eps[p] * cp.get(i, p, k);
                r += eps[p] * cp.get(i, k, p);
            }
            acc += sq(l - delta) + sq(r - delta);
        }
    }
    b.residual("counit_law", acc.sqrt());
    b.residual("counit_normalization", (eps.dot(u) - one::<T>()).modulus());
    let mut acc = T::zero();
    for a in 0..n {
        for bb in 0..n {
            let prod = g.product(&g.basis(a), &g.basis(bb));
            acc += sq(eps.dot(&prod) - eps[a] * eps[bb]);
        }
    }
    b.residual("counit_multiplicative", acc.sqrt());

    // Δ multiplicative, *-preserving, unital.
    let deltas: Vec<CMat<T>> = (0..n).map(|i| cp.slice(i)).collect();
    let tensor_product = |x: &CMat<T>, y: &CMat<T>| -> CMat<T> {
        let mut out = CMat::<T>::zeros(n, n);
        for p in 0..n {
            for q in 0..n {
                let xv = x[(p, q)];
                if xv == zero() {
                    continue;
                }
                for r in 0..n {
                    for s2 in 0..n {
                        let yv = y[(r, s2)];
                        if yv == zero() {
                            continue;
                        }
                        let w = xv * yv;
                        for a in 0..n {
                            let ma = m.get(p, r, a);
                            if ma == zero() {
                                continue;
                            }
                            for bb in 0..n {
                                let mb = m.get(q, s2, bb);
                                if mb != zero() {
                                    out[(a, bb)] += w * ma * mb;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    };
    let mut acc = T::zero();
    for a in 0..n {
        for bb in 0..n {
            let prod = g.product(&g.basis(a), &g.basis(bb));
            let lhs = g.apply_coproduct(&prod);
            let rhs = tensor_product(&deltas[a], &deltas[bb]);
            acc += (lhs - rhs).norm_squared();
        }
    }
    b.residual("coproduct_multiplicative", acc.sqrt());

    let mut acc = T::zero();
    for i in 0..n {
        let lhs = g.apply_coproduct(&g.star(&g.basis(i)));
        // Δ(e_i)^{*⊗*} = Σ conj(c_ijk) e_j* ⊗ e_k*
        let rhs = j.transpose() * deltas[i].map(|z| z.conj()) * j;
        acc += (lhs - rhs).norm_squared();
    }
    b.residual("coproduct_star", acc.sqrt());
    let lhs = g.apply_coproduct(u);
    let rhs = u * u.transpose();
    b.residual("coproduct_unital", linalg::frob(&(lhs - rhs)));

    // antipode law
    let mut acc = T::zero();
    for i in 0..n {
        let d = &deltas[i];
        let mut l = CVec::<T>::zeros(n);
        let mut r = CVec::<T>::zeros(n);
        for p in 0..n {
            for q in 0..n {
                let v = d[(p, q)];
                if v == zero() {
                    continue;
                }
                let ep = g.basis(p);
                let eq = g.basis(q);
                l += g.product(&g.apply_antipode(&ep), &eq) * v;
                r += g.product(&ep, &g.apply_antipode(&eq)) * v;
            }
        }
        let target = u * eps[i];
        acc += (l - &target).norm_squared() + (r - &target).norm_squared();
    }
    b.residual("antipode_law", acc.sqrt());

    // Kac conditions
    b.residual(
        "kac_antipode_involutive",
        linalg::frob(&(s * s - linalg::identity::<T>(n))),
    );
    let s_conj = s.map(|z| z.conj());
    b.residual("kac_antipode_star", linalg::frob(&(j * s - s_conj * j)));

    // Galois maps a⊗b ↦ Δ(a)(1⊗b) and a⊗b ↦ (a⊗1)Δ(b)
    let nn = n * n;
    let mut left = CMat::<T>::zeros(nn, nn);
    let mut right = CMat::<T>::zeros(nn, nn);
    for a in 0..n {
        for bb in 0..n {
            let col = a * n + bb;
            for p in 0..n {
                for q in 0..n {
                    let v = cp.get(a, p, q);
                    if v != zero() {
                        for r in 0..n {
                            let w = m.get(q, bb, r);
                            if w != zero() {
                                left[(p * n + r, col)] += v * w;
                            }
                        }
                    }
                    let v = cp.get(bb, p, q);
                    if v != zero() {
                        for r in 0..n {
                            let w = m.get(a, p, r);
                            if w != zero() {
                                right[(r * n + q, col)] += v * w;
                            }
                        }
                    }
                }
            }
        }
    }
    b.invertible("cancellation_left", &linalg::svd(&left).sigma);
    b.invertible("cancellation_right", &linalg::svd(&right).sigma);

    if let Some(h) = &g.haar {
        let mut rres = T::zero();
        let mut lres = T::zero();
        for i in 0..n {
            let d = &deltas[i];
            // (id⊗h)Δ(e_i) and (h⊗id)Δ(e_i)
            let r = d * h;
            let l = d.transpose() * h;
            let t = u * h[i];
            rres += (r - &t).norm_squared();
            lres += (l - &t).norm_squared();
        }
        b.residual("haar_right_invariance", rres.sqrt());
        b.residual("haar_left_invariance", lres.sqrt());
        b.residual("haar_normalization", (h.dot(u) - one::<T>()).modulus());
        let gram = g.sesquilinear_form(h);
        let (vals, _) = linalg::hermitian_eigen(&gram);
        b.residual("haar_gram_hermitian", linalg::frob(&(&gram - gram.adjoint())));
        b.positive("haar_faithfulness", vals.first().copied().unwrap_or_else(T::zero));
        b.residual("haar_traciality", traciality_residual(g, h));
        b.residual(
            "haar_unimodularity",
            linalg::vnorm(&(s * h - h)),
        );
    }

    AxiomReport {
        group: g.name.clone(),
        tol: tol.as_f64(),
        checks: b.checks,
    }
}

/// `max_{i,j} |h(e_i e_j) − h(e_j e_i)|`.
pub fn traciality_residual<T: Real>(g: &FiniteQuantumGroup<T>, h: &CVec<T>) -> T {
    let n = g.dim;
    let mut w = CMat::<T>::zeros(n, n);
    for (i, j, k, v) in g.mult.iter_nonzero() {
        w[(i, j)] += v * h[k];
    }
    crate::scalar::max_abs((&w - w.transpose()).iter())
}

/// Solves for the unique right-invariant functional normalized at `1`.
///
/// The invariance system `(id⊗h)Δ(e_i) = h(e_i) 1` is stacked into an
/// `n² × n` matrix whose null space is read off an SVD; uniqueness requires
/// a one-dimensional null space separated from the rest of the spectrum.
/// Left invariance and positivity are checked afterwards.
pub fn solve_haar<T: Real>(g: &FiniteQuantumGroup<T>) -> Result<Functional<T>> {
    let n = g.dim;
    let cp = &g.coproduct;
    let u = &g.unit;
    let mut a = CMat::<T>::zeros(n * n, n);
    for i in 0..n {
        for jj in 0..n {
            let row = i * n + jj;
            for k in 0..n {
                a[(row, k)] += cp.get(i, jj, k);
            }
            a[(row, i)] -= u[jj];
        }
    }
    let null_tol = T::epsilon().sqrt() * T::lit(0.1);
    let gap_min = T::lit(1e-8).max(null_tol * T::lit(10.0));
    let (basis, sigma) = linalg::null_space(&a, null_tol);
    let scale = sigma.first().copied().unwrap_or_else(T::one).max(T::one());
    let nullity = basis.ncols();
    let gap = if nullity < sigma.len() {
        sigma[sigma.len() - 1 - nullity] / scale
    } else {
        // Every direction is null: nothing to separate from.
        T::max_value().unwrap_or_else(T::one)
    };
    if nullity != 1 || gap <= gap_min {
        return Err(Error::NonUniqueHaar {
            nullity,
            gap: gap.as_f64(),
        });
    }
    let v = basis.column(0).into_owned();
    let at_unit = v.dot(u);
    if at_unit.modulus() < T::lit(1e-10) {
        return Err(Error::NonUniqueHaar { nullity, gap: 0.0 });
    }
    let h = v / at_unit;
    let h = h.map(|z| {
        // Snap round-off on exactly representable constants.
        let snap = |x: T| if x.abs() < T::epsilon() * T::lit(64.0) { T::zero() } else { x };
        C::<T>::new(snap(z.re), snap(z.im))
    });

    let mut lres = T::zero();
    for i in 0..n {
        let l = cp.slice(i).transpose() * &h;
        lres += (l - u * h[i]).norm_squared();
    }
    if lres.sqrt() > T::lit(1e-6) {
        return Err(Error::NonUniqueHaar { nullity: 0, gap: gap.as_f64() });
    }
    let gram = g.sesquilinear_form(&h);
    let (vals, _) = linalg::hermitian_eigen(&gram);
    let min_eig = vals.first().copied().unwrap_or_else(T::zero);
    let scale = vals.last().copied().unwrap_or_else(T::one).abs().max(T::one());
    if min_eig < -T::lit(1e-10) * scale {
        return Err(Error::NotAState {
            min_eig: min_eig.as_f64(),
            unit_value: 1.0,
        });
    }
    Ok(Functional::new(h))
}

/// `C(G)`: functions on a finite group in the basis of point indicators.
pub fn build_function_algebra<T: Real>(table: &GroupTable) -> FiniteQuantumGroup<T> {
    let n = table.order();
    let mut mult = Tensor3::zeros(n);
    let mut coproduct = Tensor3::zeros(n);
    let mut counit = CVec::<T>::zeros(n);
    let involution = linalg::identity::<T>(n);
    let mut antipode = CMat::<T>::zeros(n, n);
    for g in 0..n {
        mult.set(g, g, g, one());
        antipode[(g, table.inv(g))] = one();
        for a in 0..n {
            // Δ(δ_g) = Σ_{ab = g} δ_a ⊗ δ_b
            let bb = table.mul(table.inv(a), g);
            coproduct.set(g, a, bb, one());
        }
    }
    counit[table.identity()] = one();
    FiniteQuantumGroup::new(StructureConstants {
        name: format!("c:{}", table.name()),
        dim: n,
        unit_index: None,
        mult,
        coproduct,
        counit,
        involution,
        antipode,
    })
    .expect("classical function algebra is well formed")
}

/// `ℂ[G]`: the group algebra with its cocommutative coproduct.
pub fn build_group_algebra<T: Real>(table: &GroupTable) -> FiniteQuantumGroup<T> {
    let n = table.order();
    let mut mult = Tensor3::zeros(n);
    let mut coproduct = Tensor3::zeros(n);
    let counit = CVec::<T>::from_element(n, one());
    let mut involution = CMat::<T>::zeros(n, n);
    let mut antipode = CMat::<T>::zeros(n, n);
    for g in 0..n {
        for h in 0..n {
            mult.set(g, h, table.mul(g, h), one());
        }
        coproduct.set(g, g, g, one());
        involution[(g, table.inv(g))] = one();
        antipode[(g, table.inv(g))] = one();
    }
    FiniteQuantumGroup::new(StructureConstants {
        name: format!("group-algebra:{}", table.name()),
        dim: n,
        unit_index: Some(table.identity()),
        mult,
        coproduct,
        counit,
        involution,
        antipode,
    })
    .expect("group algebra is well formed")
}

/// Basis labels of [`build_kac_paljutkin`].
pub const KAC_PALJUTKIN_BASIS: [&str; 8] = ["e1", "e2", "e3", "e4", "a11", "a12", "a21", "a22"];

/// The eight-dimensional Kac–Paljutkin quantum group `ℂ⁴ ⊕ M₂(ℂ)`.
///
/// Basis: minimal projections `e1..e4` of the commutative part followed by
/// the matrix units `a11, a12, a21, a22`. The counit is evaluation at `e1`,
/// the antipode transposes the matrix block.
pub fn build_kac_paljutkin<T: Real>() -> FiniteQuantumGroup<T> {
    let n = 8;
    let (e1, e2, e3, e4) = (0, 1, 2, 3);
    let (a11, a12, a21, a22) = (4, 5, 6, 7);
    let unit_ix = |r: usize, s: usize| [[a11, a12], [a21, a22]][r][s];

    let mut mult = Tensor3::zeros(n);
    for e in [e1, e2, e3, e4] {
        mult.set(e, e, e, one());
    }
    for p in 0..2 {
        for q in 0..2 {
            for r in 0..2 {
                mult.set(unit_ix(p, q), unit_ix(q, r), unit_ix(p, r), one());
            }
        }
    }

    let mut cp = Tensor3::zeros(n);
    let half = c::<T>(0.5, 0.0);
    let i_half = c::<T>(0.0, 0.5);
    let mut put = |i: usize, terms: &[(C<T>, usize, usize)]| {
        for &(v, a, b) in terms {
            cp.add(i, a, b, v);
        }
    };
    let o = one::<T>();
    let im = c::<T>(0.0, 1.0);
    put(e1, &[(o, e1, e1), (o, e2, e2), (o, e3, e3), (o, e4, e4)]);
    put(e1, &[(half, a11, a11), (half, a12, a12), (half, a21, a21), (half, a22, a22)]);
    put(e2, &[(o, e1, e2), (o, e2, e1), (o, e3, e4), (o, e4, e3)]);
    put(e2, &[(half, a11, a22), (half, a22, a11), (i_half, a21, a12), (-i_half, a12, a21)]);
    put(e3, &[(o, e1, e3), (o, e3, e1), (o, e2, e4), (o, e4, e2)]);
    put(e3, &[(half, a11, a22), (half, a22, a11), (-i_half, a21, a12), (i_half, a12, a21)]);
    put(e4, &[(o, e1, e4), (o, e4, e1), (o, e2, e3), (o, e3, e2)]);
    put(e4, &[(half, a11, a11), (half, a22, a22), (-half, a12, a12), (-half, a21, a21)]);
    put(a11, &[(o, e1, a11), (o, e2, a22), (o, e3, a22), (o, e4, a11)]);
    put(a11, &[(o, a11, e1), (o, a11, e4), (o, a22, e2), (o, a22, e3)]);
    put(a12, &[(o, e1, a12), (im, e2, a21), (-im, e3, a21), (-o, e4, a12)]);
    put(a12, &[(o, a12, e1), (-o, a12, e4), (-im, a21, e2), (im, a21, e3)]);
    put(a21, &[(o, e1, a21), (-im, e2, a12), (im, e3, a12), (-o, e4, a21)]);
    put(a21, &[(o, a21, e1), (-o, a21, e4), (im, a12, e2), (-im, a12, e3)]);
    put(a22, &[(o, e1, a22), (o, e2, a11), (o, e3, a11), (o, e4, a22)]);
    put(a22, &[(o, a22, e1), (o, a22, e4), (o, a11, e2), (o, a11, e3)]);

    let mut counit = CVec::<T>::zeros(n);
    counit[e1] = one();
    let mut involution = linalg::identity::<T>(n);
    involution[(a12, a12)] = zero();
    involution[(a21, a21)] = zero();
    involution[(a12, a21)] = one();
    involution[(a21, a12)] = one();
    let antipode = involution.clone();

    FiniteQuantumGroup::new(StructureConstants {
        name: "kac-paljutkin".into(),
        dim: n,
        unit_index: None,
        mult,
        coproduct: cp,
        counit,
        involution,
        antipode,
    })
    .expect("Kac–Paljutkin constants are well formed")
}

/// Normalized trace of the left regular representation, `x ↦ Tr λ(x) / n`.
///
/// For a finite quantum group this coincides with the Haar state, which makes
/// it an independent check on [`solve_haar`].
pub fn regular_trace<T: Real>(g: &FiniteQuantumGroup<T>) -> CVec<T> {
    let n = g.dim;
    let nf = cr(T::lit(n as f64));
    CVec::<T>::from_fn(n, |i, _| g.left_mult(&g.basis(i)).trace() / nf)
}
