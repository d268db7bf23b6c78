//! Dense linear-algebra helpers over `Complex<T>`.
//!
//! Thin wrappers around nalgebra's decompositions with the conventions used
//! throughout the crate: singular values sorted descending, Hermitian spectra
//! sorted ascending, null spaces returned as orthonormal column blocks.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen, SVD};

use crate::scalar::{cr, zero, CMat, CVec, Real, C};

/// Frobenius norm.
pub fn frob<T: Real>(m: &CMat<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.norm_sqr())
        .sqrt()
}

/// Euclidean norm of a coordinate vector.
pub fn vnorm<T: Real>(v: &CVec<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::<T>::identity(n, n)
}

/// Singular value decomposition with singular values sorted descending.
pub struct SortedSvd<T: Real> {
    pub u: CMat<T>,
    pub sigma: Vec<T>,
    /// Rows are right singular vectors (conjugated), as in `A = U Σ Vᴴ`.
    pub v_h: CMat<T>,
}

pub fn svd<T: Real>(a: &CMat<T>) -> SortedSvd<T> {
    let svd = SVD::new(a.clone(), true, true);
    let u = svd.u.expect("u requested");
    let v_h = svd.v_t.expect("v requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = CMat::<T>::from_fn(u.nrows(), order.len(), |r, k| u[(r, order[k])]);
    let v_h = CMat::<T>::from_fn(order.len(), v_h.ncols(), |k, c| v_h[(order[k], c)]);
    SortedSvd { u, sigma, v_h }
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(a: &CMat<T>) -> T {
    if a.is_empty() {
        return T::zero();
    }
    svd(a).sigma.first().copied().unwrap_or_else(T::zero)
}

/// Orthonormal basis of `{v : a v = 0}` together with the full list of
/// singular values (length = number of columns).
///
/// A singular direction counts as null when `σ <= tol * max(1, σ_max)`.
pub fn null_space<T: Real>(a: &CMat<T>, tol: T) -> (CMat<T>, Vec<T>) {
    let cols = a.ncols();
    // Thin SVD only exposes min(rows, cols) right vectors; pad short matrices.
    let padded;
    let a = if a.nrows() < cols {
        padded = {
            let mut p = CMat::<T>::zeros(cols, cols);
            p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
            p
        };
        &padded
    } else {
        a
    };
    let d = svd(a);
    let scale = d.sigma.first().copied().unwrap_or_else(T::one).max(T::one());
    let null: Vec<usize> = (0..cols).filter(|&k| d.sigma[k] <= tol * scale).collect();
    let basis = CMat::<T>::from_fn(cols, null.len(), |r, k| d.v_h[(null[k], r)].conj());
    (basis, d.sigma)
}

/// Ascending spectrum and orthonormal eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let h = (m + m.adjoint()) * cr(T::lit(0.5));
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::<T>::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (vals, vecs)
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_map<T: Real>(m: &CMat<T>, f: impl Fn(T) -> C<T>) -> CMat<T> {
    let (vals, vecs) = hermitian_eigen(m);
    let diag = CMat::<T>::from_diagonal(&CVec::<T>::from_iterator(
        vals.len(),
        vals.iter().map(|&l| f(l)),
    ));
    &vecs * diag * vecs.adjoint()
}

/// Complex power `m^z` of a Hermitian positive-definite matrix.
pub fn hpd_power<T: Real>(m: &CMat<T>, z: C<T>) -> CMat<T> {
    hermitian_map(m, |l| cr(l).powc(z))
}

/// Square root and inverse square root of a Hermitian positive-definite matrix.
pub fn hpd_sqrt_pair<T: Real>(m: &CMat<T>) -> (CMat<T>, CMat<T>) {
    let (vals, vecs) = hermitian_eigen(m);
    let n = vals.len();
    let s = CVec::<T>::from_iterator(n, vals.iter().map(|&l| cr(l.sqrt())));
    let si = CVec::<T>::from_iterator(n, vals.iter().map(|&l| cr(T::one() / l.sqrt())));
    (
        &vecs * CMat::<T>::from_diagonal(&s) * vecs.adjoint(),
        &vecs * CMat::<T>::from_diagonal(&si) * vecs.adjoint(),
    )
}

/// Inverse via LU; `None` when singular.
pub fn inverse<T: Real>(m: &CMat<T>) -> Option<CMat<T>> {
    m.clone().try_inverse()
}

/// Moore–Penrose pseudo-inverse with relative cut-off.
pub fn pinv<T: Real>(m: &CMat<T>, rel_tol: T) -> CMat<T> {
    let d = svd(m);
    let cut = rel_tol * d.sigma.first().copied().unwrap_or_else(T::zero);
    let k = d.sigma.len();
    let mut out = CMat::<T>::zeros(m.ncols(), m.nrows());
    for i in 0..k {
        if d.sigma[i] > cut && d.sigma[i] > T::zero() {
            let inv = cr(T::one() / d.sigma[i]);
            for r in 0..m.ncols() {
                for c in 0..m.nrows() {
                    out[(r, c)] += d.v_h[(i, r)].conj() * inv * d.u[(c, i)].conj();
                }
            }
        }
    }
    out
}

/// Eigenvalues of a general complex square matrix (complex Schur form).
pub fn eigenvalues<T: Real>(m: &CMat<T>) -> Vec<C<T>> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let eps = T::epsilon() * T::lit(4.0);
    if let Some(schur) = nalgebra::Schur::try_new(m.clone(), eps, 10_000) {
        return schur_diagonal(schur);
    }
    // QR iterations can stall on permutation-like matrices; a random unitary
    // similarity breaks the symmetry without changing the spectrum.
    for seed in 0..8u64 {
        let q = random_unitary::<T>(n, seed);
        let conj = q.adjoint() * m * &q;
        if let Some(schur) = nalgebra::Schur::try_new(conj, eps * T::lit(16.0), 100_000) {
            return schur_diagonal(schur);
        }
    }
    panic!("complex Schur decomposition failed to converge");
}

fn schur_diagonal<T: Real>(schur: nalgebra::Schur<C<T>, nalgebra::Dyn>) -> Vec<C<T>> {
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

fn random_unitary<T: Real>(n: usize, seed: u64) -> CMat<T> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed ^ seed);
    let a = CMat::<T>::from_fn(n, n, |_, _| {
        C::new(T::lit(rng.random_range(-1.0..1.0)), T::lit(rng.random_range(-1.0..1.0)))
    });
    a.qr().q()
}

/// Spectral radius from the complex Schur form.
pub fn spectral_radius<T: Real>(m: &CMat<T>) -> T {
    eigenvalues(m)
        .iter()
        .map(|z| z.modulus())
        .fold(T::zero(), |a, b| a.max(b))
}

/// Why a kernel projector could not be formed.
#[derive(Debug, Clone, PartialEq)]
pub enum ProjectorFailure {
    /// Left and right null spaces have different dimensions.
    DimensionMismatch { right: usize, left: usize },
    /// The eigenvalue is not semisimple: the pairing `Wᴴ V` is singular.
    Defective { pairing_min_sv: f64 },
}

/// Spectral projector onto `ker a` along `ran a`.
///
/// Assumes 0 is a semisimple eigenvalue of `a`. Built from orthonormal right
/// and left null bases `V`, `W` as `V (Wᴴ V)⁻¹ Wᴴ`.
pub fn kernel_projector<T: Real>(a: &CMat<T>, tol: T) -> Result<(CMat<T>, usize), ProjectorFailure> {
    let n = a.nrows();
    let (v, _) = null_space(a, tol);
    let (w, _) = null_space(&a.adjoint(), tol);
    if v.ncols() != w.ncols() {
        return Err(ProjectorFailure::DimensionMismatch {
            right: v.ncols(),
            left: w.ncols(),
        });
    }
    let k = v.ncols();
    if k == 0 {
        return Ok((CMat::<T>::zeros(n, n), 0));
    }
    let pairing = w.adjoint() * &v;
    let d = svd(&pairing);
    let min_sv = d.sigma.last().copied().unwrap_or_else(T::zero);
    if min_sv < tol.sqrt() {
        return Err(ProjectorFailure::Defective {
            pairing_min_sv: min_sv.as_f64(),
        });
    }
    let inv = inverse(&pairing).ok_or(ProjectorFailure::Defective {
        pairing_min_sv: min_sv.as_f64(),
    })?;
    Ok((&v * inv * w.adjoint(), k))
}

/// Matrix exponential (Padé-13 scaling and squaring).
pub fn expm<T: Real>(m: &CMat<T>) -> CMat<T> {
    m.exp()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let pi = T::pi();
    let nf = T::lit(n as f64);
    for i in 0..n.div_ceil(2) {
        let mut x = ((pi * (T::lit(i as f64) + T::lit(0.75))) / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != T::zero() { d } else { dp };
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 2..=n {
        let kf = T::lit(k as f64);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::lit(n as f64);
    let dp = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

/// `a ⊗ b` (Kronecker product, row-major block layout).
pub fn kron<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

/// Zero matrix helper keeping call sites short.
pub fn zeros<T: Real>(r: usize, c: usize) -> CMat<T> {
    DMatrix::from_element(r, c, zero())
}

/// Hermitian form `xᴴ g y`.
pub fn form<T: Real>(g: &CMat<T>, x: &CVec<T>, y: &CVec<T>) -> C<T> {
    (x.adjoint() * g * y)[(0, 0)]
}

/// Norm induced by a positive-definite Gram matrix.
pub fn gram_norm<T: Real>(g: &CMat<T>, x: &CVec<T>) -> T {
    form(g, x, x).re.max(T::zero()).sqrt()
}

/// Operator norm of `a` on coordinates equipped with the Gram inner product
/// `⟨x, y⟩ = xᴴ g y`, given `g^{±1/2}`.
pub fn gram_op_norm<T: Real>(a: &CMat<T>, g_half: &CMat<T>, g_half_inv: &CMat<T>) -> T {
    spectral_norm(&(g_half * a * g_half_inv))
}

/// Modulus helper for reporting.
pub fn modulus<T: Real>(z: C<T>) -> T {
    ComplexField::modulus(z)
}
