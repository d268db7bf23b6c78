//! The convolution algebra of functionals on a finite quantum group.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use nalgebra::ComplexField;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hopf::FiniteQuantumGroup;
use crate::linalg;
use crate::scalar::{cr, one, CMat, CVec, Real, C};

/// A linear functional, stored as its values `φ_i = φ(e_i)` on the basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional<T: Real> {
    values: CVec<T>,
}

impl<T: Real> Functional<T> {
    pub fn new(values: CVec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(CVec::<T>::zeros(n))
    }

    /// Dual basis functional `e_i ↦ 1`, other basis elements to 0.
    pub fn coordinate(n: usize, i: usize) -> Self {
        Self::new(crate::hopf::basis_vector(n, i))
    }

    pub fn values(&self) -> &CVec<T> {
        &self.values
    }

    pub fn into_values(self) -> CVec<T> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `φ(x)` for a coordinate vector `x`.
    pub fn eval(&self, x: &CVec<T>) -> C<T> {
        self.values.dot(x)
    }

    /// Largest absolute difference of values.
    pub fn distance(&self, other: &Self) -> T {
        crate::scalar::max_abs((&self.values - &other.values).iter())
    }

    pub fn scale(&self, z: C<T>) -> Self {
        Self::new(&self.values * z)
    }

    fn check_dim(&self, g: &FiniteQuantumGroup<T>) -> Result<()> {
        if self.dim() != g.dim() {
            return Err(Error::DimensionMismatch {
                what: "functional",
                expected: g.dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl<T: Real> Add for &Functional<T> {
    type Output = Functional<T>;
    fn add(self, rhs: Self) -> Functional<T> {
        Functional::new(&self.values + &rhs.values)
    }
}

impl<T: Real> Sub for &Functional<T> {
    type Output = Functional<T>;
    fn sub(self, rhs: Self) -> Functional<T> {
        Functional::new(&self.values - &rhs.values)
    }
}

impl<T: Real> Mul<T> for &Functional<T> {
    type Output = Functional<T>;
    fn mul(self, rhs: T) -> Functional<T> {
        Functional::new(&self.values * cr(rhs))
    }
}

/// `(φ⋆ψ)(e_i) = Σ_{j,k} c[i][j][k] φ_j ψ_k`.
pub fn convolve<T: Real>(
    g: &FiniteQuantumGroup<T>,
    phi: &Functional<T>,
    psi: &Functional<T>,
) -> Result<Functional<T>> {
    phi.check_dim(g)?;
    psi.check_dim(g)?;
    let mut out = CVec::<T>::zeros(g.dim());
    for (i, j, k, v) in g.coproduct().iter_nonzero() {
        out[i] += v * phi.values[j] * psi.values[k];
    }
    Ok(Functional::new(out))
}

/// `φ^{⋆k}` for `k ≥ 1`; `k = 0` gives the counit.
pub fn convolution_power<T: Real>(
    g: &FiniteQuantumGroup<T>,
    phi: &Functional<T>,
    k: usize,
) -> Result<Functional<T>> {
    let mut acc = g.counit_functional();
    for _ in 0..k {
        acc = convolve(g, &acc, phi)?;
    }
    Ok(acc)
}

/// `ω*(x) = conj(ω(S(x)*))`.
///
/// With this definition `(T_ω)† = T_{ω*}` in `L²(h)`, and `ω ↦ ω*` is a
/// conjugate-linear anti-multiplicative involution of the convolution algebra.
/// On commutative algebras with self-adjoint basis it reduces to
/// `conj(ω(S(x)))`.
pub fn involution_sharp<T: Real>(
    g: &FiniteQuantumGroup<T>,
    omega: &Functional<T>,
) -> Result<Functional<T>> {
    omega.check_dim(g)?;
    let n = g.dim();
    let values = CVec::<T>::from_fn(n, |i, _| {
        let x = g.star(&g.apply_antipode(&g.basis(i)));
        omega.eval(&x).conj()
    });
    Ok(Functional::new(values))
}

/// `(φ + φ*)/2`, the symmetric part of `φ`.
pub fn symmetrize<T: Real>(g: &FiniteQuantumGroup<T>, phi: &Functional<T>) -> Result<Functional<T>> {
    let sharp = involution_sharp(g, phi)?;
    Ok(&(phi + &sharp) * T::lit(0.5))
}

/// `‖φ − φ*‖_∞` over basis values.
pub fn symmetry_residual<T: Real>(g: &FiniteQuantumGroup<T>, phi: &Functional<T>) -> Result<T> {
    Ok(phi.distance(&involution_sharp(g, phi)?))
}

/// Positivity flags of a functional together with their witnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub positive: bool,
    pub state: bool,
    pub faithful: bool,
    pub hermitian: bool,
    /// Smallest eigenvalue of `P_ij = φ(e_i* e_j)`.
    pub min_eig: f64,
    /// Eigenvector for `min_eig` as `(re, im)` pairs, present when not positive.
    pub witness: Option<Vec<(f64, f64)>>,
    pub unit_value: (f64, f64),
    pub hermitian_residual: f64,
}

/// Classifies `φ` by the spectrum of its sesquilinear form.
///
/// Eigenvalues `≥ −tol·(1 + ‖P‖)` count as nonnegative and
/// `> tol·(1 + ‖P‖)` as strictly positive.
pub fn check_state<T: Real>(g: &FiniteQuantumGroup<T>, phi: &Functional<T>, tol: T) -> StateReport {
    let p = g.sesquilinear_form(&phi.values);
    let herm_form = linalg::frob(&(&p - p.adjoint()));
    let (vals, vecs) = linalg::hermitian_eigen(&p);
    let min_eig = vals.first().copied().unwrap_or_else(T::zero);
    let norm = vals
        .iter()
        .fold(T::zero(), |a, &b| a.max(b.abs()));
    let slack = tol * (T::one() + norm);
    let hermitian_residual = {
        let lhs = g.involution() * &phi.values;
        crate::scalar::max_abs((lhs - phi.values.map(|z| z.conj())).iter())
    };
    let hermitian = hermitian_residual <= slack;
    let positive = hermitian && herm_form <= slack && min_eig >= -slack;
    let unit_value = phi.eval(g.unit());
    let state = positive && (unit_value - one::<T>()).modulus() <= slack;
    let faithful = positive && min_eig > slack;
    let witness = (!positive).then(|| {
        vecs.column(0)
            .iter()
            .map(|z| (z.re.as_f64(), z.im.as_f64()))
            .collect()
    });
    StateReport {
        positive,
        state,
        faithful,
        hermitian,
        min_eig: min_eig.as_f64(),
        witness,
        unit_value: (unit_value.re.as_f64(), unit_value.im.as_f64()),
        hermitian_residual: hermitian_residual.as_f64(),
    }
}

/// Invariance under the scaling group. Finite quantum groups are of Kac type,
/// so `τ_t = id` and every functional qualifies; see
/// [`crate::blocks::is_tau_invariant`] for the nontrivial version.
pub fn is_tau_invariant<T: Real>(_g: &FiniteQuantumGroup<T>, _phi: &Functional<T>) -> bool {
    true
}

/// `φ_n = (1/n) Σ_{k=1}^n φ^{⋆k}`.
pub fn averaged_state<T: Real>(
    g: &FiniteQuantumGroup<T>,
    phi: &Functional<T>,
    n: usize,
    tol: T,
) -> Result<Functional<T>> {
    let report = check_state(g, phi, tol);
    if !report.positive {
        return Err(Error::NonPositive {
            min_eig: report.min_eig,
        });
    }
    if n == 0 {
        return Err(Error::Parse("averaging length must be at least 1".into()));
    }
    let mut power = phi.clone();
    let mut sum = phi.clone();
    for _ in 1..n {
        power = convolve(g, &power, phi)?;
        sum = &sum + &power;
    }
    Ok(&sum * (T::one() / T::lit(n as f64)))
}

/// Norm of `φ` as a functional on `L²(h)`: `sup |φ(x)| / ‖x‖₂`.
pub fn dual_norm<T: Real>(g: &FiniteQuantumGroup<T>, phi: &Functional<T>) -> Result<T> {
    phi.check_dim(g)?;
    let gram = g.gram()?;
    let inv = linalg::inverse(&gram).ok_or(Error::NonFaithfulHaar { min_eig: 0.0 })?;
    // φ(x) = fᵀ x = ⟨G⁻¹ conj(f), x⟩, so ‖φ‖² = fᵀ G⁻¹ conj(f).
    let f = &phi.values;
    let v = f.transpose() * inv * f.map(|z| z.conj());
    Ok(v[(0, 0)].re.max(T::zero()).sqrt())
}

/// State `x ↦ h(d x)` with density `d`.
pub fn state_from_density<T: Real>(g: &FiniteQuantumGroup<T>, d: &CVec<T>) -> Result<Functional<T>> {
    let h = g.haar()?;
    let n = g.dim();
    let mut vals = CVec::<T>::zeros(n);
    for j in 0..n {
        let prod = g.product(d, &g.basis(j));
        vals[j] = h.eval(&prod);
    }
    Ok(Functional::new(vals))
}

fn normalized<T: Real>(g: &FiniteQuantumGroup<T>, phi: Functional<T>) -> Functional<T> {
    let at_one = phi.eval(g.unit());
    phi.scale(one::<T>() / at_one)
}

/// Random element with independent standard Gaussian coordinates.
pub fn random_element<T: Real, R: Rng>(n: usize, rng: &mut R) -> CVec<T> {
    CVec::<T>::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C::<T>::new(T::lit(re), T::lit(im))
    })
}

/// Random faithful state `x ↦ h(a*a x)/h(a*a)` with Gaussian `a`.
pub fn random_faithful_state<T: Real, R: Rng>(
    g: &FiniteQuantumGroup<T>,
    rng: &mut R,
) -> Result<Functional<T>> {
    let a = random_element::<T, _>(g.dim(), rng);
    let d = g.product(&g.star(&a), &a);
    Ok(normalized(g, state_from_density(g, &d)?))
}

/// Random self-adjoint projection `e ≠ 1`: the spectral projection of a
/// random self-adjoint element onto all but its top eigenvalue.
///
/// Computed in the GNS representation and pulled back through `e = λ(e)1̂`.
pub fn random_projection<T: Real, R: Rng>(
    g: &FiniteQuantumGroup<T>,
    rng: &mut R,
) -> Result<CVec<T>> {
    let n = g.dim();
    let gram = g.gram()?;
    let (g_half, g_half_inv) = linalg::hpd_sqrt_pair(&gram);
    let a = random_element::<T, _>(n, rng);
    let y = &a + g.star(&a);
    let sym = &g_half * g.left_mult(&y) * &g_half_inv;
    let (vals, _) = linalg::hermitian_eigen(&sym);
    let top = vals.last().copied().unwrap_or_else(T::zero);
    let cut = top - (top - vals[0]) * T::lit(1e-6);
    let chi = linalg::hermitian_map(&sym, |l| if l < cut { one() } else { cr(T::zero()) });
    Ok(&g_half_inv * chi * &g_half * g.unit())
}

/// Random state `x ↦ h(a* e a x)/h(a* e a)` with Gaussian `a` and a random
/// projection `e ≠ 1`; never faithful.
pub fn random_singular_state<T: Real, R: Rng>(
    g: &FiniteQuantumGroup<T>,
    rng: &mut R,
) -> Result<Functional<T>> {
    if g.dim() == 1 {
        return g.haar();
    }
    let e = random_projection(g, rng)?;
    let a = random_element::<T, _>(g.dim(), rng);
    let ea = g.product(&e, &a);
    let d = g.product(&g.star(&ea), &ea);
    Ok(normalized(g, state_from_density(g, &d)?))
}

/// State descriptors accepted on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Haar,
    Counit,
    /// Point evaluation at a group element (function algebras only).
    Ev(usize),
    /// Normalized trace of the left regular representation.
    Uniform,
    /// Random faithful state from a seeded generator.
    Random(u64),
    /// Explicit values `φ(e_i)`.
    Vector(Vec<(f64, f64)>),
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |why: &str| Error::Parse(format!("state `{s}`: {why}"));
        match s {
            "haar" => return Ok(Self::Haar),
            "counit" => return Ok(Self::Counit),
            "uniform" => return Ok(Self::Uniform),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("ev:") {
            return rest.parse().map(Self::Ev).map_err(|_| bad("expected element index"));
        }
        if let Some(rest) = s.strip_prefix("random:") {
            return rest.parse().map(Self::Random).map_err(|_| bad("expected integer seed"));
        }
        if let Some(rest) = s.strip_prefix("vector:") {
            let body = rest
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| bad("expected vector:[re,im;re,im;...]"))?;
            let mut out = Vec::new();
            for entry in body.split(';').filter(|e| !e.trim().is_empty()) {
                let mut parts = entry.split(',').map(str::trim);
                let re = parts.next().and_then(|x| x.parse().ok());
                let im = parts.next().map_or(Some(0.0), |x| x.parse().ok());
                match (re, im, parts.next()) {
                    (Some(re), Some(im), None) => out.push((re, im)),
                    _ => return Err(bad("malformed entry")),
                }
            }
            return Ok(Self::Vector(out));
        }
        Err(bad("expected haar | counit | ev:<i> | uniform | random:<seed> | vector:[...]"))
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Haar => write!(f, "haar"),
            Self::Counit => write!(f, "counit"),
            Self::Ev(i) => write!(f, "ev:{i}"),
            Self::Uniform => write!(f, "uniform"),
            Self::Random(s) => write!(f, "random:{s}"),
            Self::Vector(v) => {
                let body: Vec<String> = v.iter().map(|(re, im)| format!("{re},{im}")).collect();
                write!(f, "vector:[{}]", body.join(";"))
            }
        }
    }
}

impl StateSpec {
    /// Builds the functional on `g` (which must carry its Haar state for
    /// `haar` and `random`).
    pub fn resolve<T: Real>(&self, g: &FiniteQuantumGroup<T>) -> Result<Functional<T>> {
        let n = g.dim();
        match self {
            Self::Haar => g.haar(),
            Self::Counit => Ok(g.counit_functional()),
            Self::Ev(i) => {
                let commutative = g.commutativity_residual() == T::zero();
                let classical = commutative
                    && linalg::frob(&(g.involution() - linalg::identity::<T>(n))) == T::zero();
                if !classical {
                    return Err(Error::Parse(format!(
                        "ev:{i} requires a function algebra C(G); `{}` is not one",
                        g.name()
                    )));
                }
                if *i >= n {
                    return Err(Error::Parse(format!("ev:{i} out of range 0..{n}")));
                }
                Ok(Functional::coordinate(n, *i))
            }
            Self::Uniform => Ok(Functional::new(crate::hopf::regular_trace(g))),
            Self::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                random_faithful_state(g, &mut rng)
            }
            Self::Vector(v) => {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        what: "state vector",
                        expected: n,
                        found: v.len(),
                    });
                }
                Ok(Functional::new(CVec::<T>::from_iterator(
                    n,
                    v.iter().map(|&(re, im)| C::<T>::new(T::lit(re), T::lit(im))),
                )))
            }
        }
    }
}

/// Matrix whose columns are the values of the given functionals.
pub fn stack<T: Real>(fs: &[Functional<T>]) -> CMat<T> {
    let n = fs.first().map_or(0, Functional::dim);
    CMat::<T>::from_fn(n, fs.len(), |i, k| fs[k].values[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_table::GroupTable;
    use crate::hopf::{build_function_algebra, build_group_algebra, build_kac_paljutkin};
    use crate::scalar::c;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    fn kp() -> FiniteQuantumGroup<f64> {
        build_kac_paljutkin().with_solved_haar().unwrap()
    }

    fn cz(n: usize) -> FiniteQuantumGroup<f64> {
        build_function_algebra(&GroupTable::cyclic(n).unwrap())
            .with_solved_haar()
            .unwrap()
    }

    #[test]
    fn counit_is_convolution_unit() {
        let g = kp();
        let mut r = rng();
        let phi = Functional::new(random_element(8, &mut r));
        let eps = g.counit_functional();
        assert!(convolve(&g, &eps, &phi).unwrap().distance(&phi) < 1e-14);
        assert!(convolve(&g, &phi, &eps).unwrap().distance(&phi) < 1e-14);
    }

    #[test]
    fn point_masses_convolve_by_group_law() {
        let g = cz(3);
        for a in 0..3 {
            for b in 0..3 {
                let lhs = convolve(&g, &Functional::coordinate(3, a), &Functional::coordinate(3, b)).unwrap();
                assert_eq!(lhs, Functional::coordinate(3, (a + b) % 3));
            }
        }
    }

    #[test]
    fn haar_absorbs() {
        let g = kp();
        let h = g.haar().unwrap();
        let mut r = rng();
        for _ in 0..5 {
            let phi = Functional::new(random_element(8, &mut r));
            let want = h.scale(phi.eval(g.unit()));
            assert!(convolve(&g, &h, &phi).unwrap().distance(&want) < 1e-12);
            assert!(convolve(&g, &phi, &h).unwrap().distance(&want) < 1e-12);
        }
    }

    #[test]
    fn sharp_fixes_counit_and_haar() {
        for g in [kp(), cz(4)] {
            let eps = g.counit_functional();
            assert!(involution_sharp(&g, &eps).unwrap().distance(&eps) < 1e-15);
            let h = g.haar().unwrap();
            assert!(involution_sharp(&g, &h).unwrap().distance(&h) < 1e-12);
        }
    }

    #[test]
    fn sharp_of_point_mass_is_inverse_point() {
        let g = cz(5);
        for a in 0..5 {
            let s = involution_sharp(&g, &Functional::coordinate(5, a)).unwrap();
            assert_eq!(s, Functional::coordinate(5, (5 - a) % 5));
        }
    }

    #[test]
    fn sharp_is_involutive_and_antimultiplicative() {
        let g = kp();
        let mut r = rng();
        let phi = Functional::new(random_element(8, &mut r));
        let psi = Functional::new(random_element(8, &mut r));
        let twice = involution_sharp(&g, &involution_sharp(&g, &phi).unwrap()).unwrap();
        assert!(twice.distance(&phi) < 1e-12);
        let lhs = involution_sharp(&g, &convolve(&g, &phi, &psi).unwrap()).unwrap();
        let rhs = convolve(
            &g,
            &involution_sharp(&g, &psi).unwrap(),
            &involution_sharp(&g, &phi).unwrap(),
        )
        .unwrap();
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn haar_is_faithful_state() {
        for g in [kp(), cz(3), build_group_algebra(&GroupTable::symmetric3()).with_solved_haar().unwrap()] {
            let r = check_state(&g, &g.haar().unwrap(), 1e-10);
            assert!(r.state && r.faithful, "{}: {r:?}", g.name());
        }
    }

    #[test]
    fn perturbed_counit_is_not_positive() {
        let g = kp();
        let mut v = g.counit().clone();
        v[5] = c(0.0, 0.3);
        let r = check_state(&g, &Functional::new(v), 1e-10);
        assert!(!r.positive);
        assert!(r.witness.is_some());
    }

    #[test]
    fn two_point_mixture_is_not_faithful() {
        let g = build_function_algebra::<f64>(&GroupTable::symmetric3()).with_solved_haar().unwrap();
        let phi = &(&Functional::coordinate(6, 0) + &Functional::coordinate(6, 3)) * 0.5;
        let r = check_state(&g, &phi, 1e-10);
        assert!(r.state && !r.faithful);
        let p = g.sesquilinear_form(phi.values());
        let (vals, _) = linalg::hermitian_eigen(&p);
        assert_eq!(vals.iter().filter(|&&l| l > 1e-12).count(), 2);
    }

    #[test]
    fn tau_invariance_is_trivial_here() {
        let g = kp();
        assert!(is_tau_invariant(&g, &Functional::new(random_element(8, &mut rng()))));
    }

    #[test]
    fn averages_of_idempotents() {
        let g = kp();
        let eps = g.counit_functional();
        assert!(averaged_state(&g, &eps, 7, 1e-10).unwrap().distance(&eps) < 1e-15);
        let h = g.haar().unwrap();
        assert!(averaged_state(&g, &h, 5, 1e-10).unwrap().distance(&h) < 1e-12);
        let z2 = cz(2);
        let avg = averaged_state(&z2, &Functional::coordinate(2, 1), 2, 1e-10).unwrap();
        assert!(avg.distance(&Functional::new(CVec::from_element(2, c(0.5, 0.0)))) < 1e-15);
    }

    #[test]
    fn averaging_rejects_non_positive() {
        let g = cz(2);
        let phi = Functional::new(CVec::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        assert!(matches!(averaged_state(&g, &phi, 3, 1e-10), Err(Error::NonPositive { .. })));
    }

    #[test]
    fn random_states_are_states() {
        let g = kp();
        let mut r = rng();
        for _ in 0..10 {
            let f = random_faithful_state(&g, &mut r).unwrap();
            let rep = check_state(&g, &f, 1e-10);
            assert!(rep.state && rep.faithful);
            let s = random_singular_state(&g, &mut r).unwrap();
            let rep = check_state(&g, &s, 1e-10);
            assert!(rep.state && !rep.faithful, "{rep:?}");
        }
    }

    #[test]
    fn state_spec_roundtrip() {
        for s in ["haar", "counit", "ev:3", "uniform", "random:42", "vector:[1,0;0.5,-1]"] {
            let spec: StateSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("ev:x".parse::<StateSpec>().is_err());
        assert!("dirac".parse::<StateSpec>().is_err());
    }

    #[test]
    fn ev_spec_requires_function_algebra() {
        let g = kp();
        assert!(StateSpec::Ev(1).resolve(&g).is_err());
        assert!(StateSpec::Ev(1).resolve(&cz(3)).is_ok());
        let u = StateSpec::Uniform.resolve(&g).unwrap();
        assert!(u.distance(&g.haar().unwrap()) < 1e-12);
    }

    #[test]
    fn dual_norm_of_haar_is_one() {
        let g = kp();
        let n = dual_norm(&g, &g.haar().unwrap()).unwrap();
        assert!((n - 1.0).abs() < 1e-12);
    }
}
