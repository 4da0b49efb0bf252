//! Closed-form inner products, Gram matrices of truncated systems,
//! Gershgorin certification, extreme eigenvalues, Rayleigh quotients and
//! `L₂` projection.
//!
//! Inner products are exact rationals:
//!
//! * the constant is orthogonal to every `C(α·x)` and `S(α·x)`;
//! * `⟨C(α·x), S(β·x)⟩ = 0`;
//! * `⟨C(α·x), C(β·x)⟩ = 1 / (3 p² q²)` when `α = (p/q) β` with `p, q` odd
//!   and coprime, and `0` otherwise;
//! * `⟨S(α·x), S(β·x)⟩` is the same up to the sign `(-1)^((p-1)/2 + (q-1)/2)`.
//!
//! A `GramMatrix` stores one dense block per kind (constant, `C`, `S`): the
//! cross-kind entries vanish exactly and are never materialized.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_rational::Ratio;

use crate::basis::{enumerate_indices, BasisFunction, RidgeIndex, Shape};
use crate::error::{Error, Result};
use crate::numtheory::{gcd, odd_ratio};
use crate::oracle::{l2_distance, project_oracle, CompensatedSum, QuadratureSpec};

pub type Rational = Ratio<i128>;

/// Components up to this size go to the dense symmetric eigensolver.
pub const DENSE_EIGEN_LIMIT: usize = 4096;

/// Largest supported Gram dimension for spectra.
pub const MAX_SPECTRUM_N: usize = 1 << 14;

fn sign_from_ratio(p: u64, q: u64) -> i128 {
    if ((p - 1) / 2 + (q - 1) / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Univariate kernel for `C_i, C_j` (or `S_i, S_j` with `sin = true`).
fn kernel_1d(i: u64, j: u64, sin: bool) -> Rational {
    let g = gcd(i, j);
    let (p, q) = (i / g, j / g);
    if p % 2 == 0 || q % 2 == 0 {
        return Rational::from_integer(0);
    }
    let sign = if sin { sign_from_ratio(p, q) } else { 1 };
    let (p, q) = (p as i128, q as i128);
    Rational::new_raw(sign, 3 * p * p * q * q)
}

/// Exact raw (unnormalized) inner product `⟨f, g⟩` on `[0,1]^d`.
pub fn inner_product_analytic(f: &BasisFunction, g: &BasisFunction) -> Result<Rational> {
    if let (Some(a), Some(b)) = (f.dim(), g.dim()) {
        if a != b {
            return Err(Error::DimensionMismatch {
                expected: a,
                got: b,
            });
        }
    }
    let zero = Rational::from_integer(0);
    let (alpha, beta, sin) = match (&f.shape, &g.shape) {
        (Shape::Constant, Shape::Constant) => return Ok(Rational::from_integer(1)),
        (Shape::Constant, _) | (_, Shape::Constant) => return Ok(zero),
        (Shape::CosLike(a), Shape::CosLike(b)) => (a, b, false),
        (Shape::SinLike(a), Shape::SinLike(b)) => (a, b, true),
        _ => return Ok(zero),
    };
    if alpha.dim() == 1 {
        return Ok(kernel_1d(
            alpha.as_slice()[0] as u64,
            beta.as_slice()[0] as u64,
            sin,
        ));
    }
    Ok(match odd_ratio(alpha.as_slice(), beta.as_slice())? {
        None => zero,
        Some(r) => {
            let sign = if sin {
                sign_from_ratio(r.p_num, r.q_den)
            } else {
                1
            };
            let (p, q) = (r.p_num as i128, r.q_den as i128);
            Rational::new_raw(sign, 3 * p * p * q * q)
        }
    })
}

/// `⟨f, g⟩` including the normalization factors of both functions.
pub fn inner_product_value(f: &BasisFunction, g: &BasisFunction) -> Result<f64> {
    let raw = inner_product_analytic(f, g)?;
    Ok(scaled_entry(
        raw,
        f.normalized && !f.is_constant(),
        g.normalized && !g.is_constant(),
    ))
}

fn scaled_entry(raw: Rational, f_norm: bool, g_norm: bool) -> f64 {
    let r = match (f_norm, g_norm) {
        (true, true) => raw * 3,
        _ => raw,
    };
    let v = *r.numer() as f64 / *r.denom() as f64;
    if f_norm != g_norm {
        v * crate::basis::SQRT3
    } else {
        v
    }
}

/// The canonical truncated system: the constant, then every `C(α·x)`, then
/// every `S(α·x)`. For `d = 1` the frequencies are `1..=truncation`; for
/// `d > 1` they are the indices with `‖α‖_∞ <= truncation`.
pub fn canonical_system(d: usize, truncation: u32, normalized: bool) -> Vec<BasisFunction> {
    let indices: Vec<RidgeIndex> = if truncation == 0 {
        Vec::new()
    } else if d == 1 {
        (1..=truncation as i64)
            .map(|k| RidgeIndex::univariate(k).expect("positive"))
            .collect()
    } else {
        enumerate_indices(d, truncation)
    };
    let flag = |f: BasisFunction| if normalized { f.normalized() } else { f.raw() };
    let mut out = Vec::with_capacity(1 + 2 * indices.len());
    out.push(BasisFunction::constant());
    out.extend(indices.iter().cloned().map(BasisFunction::cos).map(flag));
    out.extend(indices.into_iter().map(BasisFunction::sin).map(flag));
    out
}

/// The raw cosine block `(⟨C_i, C_j⟩)_{i,j=1..n}`.
pub fn raw_cos_system(n: u32) -> Vec<BasisFunction> {
    (1..=n as i64)
        .map(|k| BasisFunction::c(k).expect("positive"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Constant,
    Cos,
    Sin,
}

fn kind_of(f: &BasisFunction) -> Kind {
    match f.shape {
        Shape::Constant => Kind::Constant,
        Shape::CosLike(_) => Kind::Cos,
        Shape::SinLike(_) => Kind::Sin,
    }
}

#[derive(Debug, Clone)]
struct KindBlock {
    /// Positions in the ordering, increasing.
    positions: Vec<usize>,
    entries: DMatrix<f64>,
}

/// Gram matrix of an ordered system with its ordering manifest.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    ordering: Vec<BasisFunction>,
    normalized: bool,
    /// `(block, offset within block)` for each position.
    locate: Vec<(usize, usize)>,
    blocks: Vec<KindBlock>,
}

impl GramMatrix {
    pub fn ordering(&self) -> &[BasisFunction] {
        &self.ordering
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn size(&self) -> usize {
        self.ordering.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (bi, oi) = self.locate[i];
        let (bj, oj) = self.locate[j];
        if bi != bj {
            0.0
        } else {
            self.blocks[bi].entries[(oi, oj)]
        }
    }

    /// Full dense matrix in ordering order.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for b in &self.blocks {
            for (a, &i) in b.positions.iter().enumerate() {
                for (c, &j) in b.positions.iter().enumerate() {
                    m[(i, j)] = b.entries[(a, c)];
                }
            }
        }
        m
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.size()];
        for b in &self.blocks {
            let xb = DVector::from_iterator(b.positions.len(), b.positions.iter().map(|&j| x[j]));
            let yb = &b.entries * xb;
            for (&i, v) in b.positions.iter().zip(yb.iter()) {
                y[i] = *v;
            }
        }
        y
    }

    /// Rows of a single kind block: `(positions, dense block)`. Kinds appear
    /// in the order constant, `C`, `S`.
    pub fn kind_blocks(&self) -> impl Iterator<Item = (&[usize], &DMatrix<f64>)> {
        self.blocks
            .iter()
            .map(|b| (b.positions.as_slice(), &b.entries))
    }
}

fn common_dim(system: &[BasisFunction]) -> Result<Option<usize>> {
    let mut dim = None;
    for f in system {
        if let Some(d) = f.dim() {
            match dim {
                None => dim = Some(d),
                Some(e) if e != d => {
                    return Err(Error::DimensionMismatch {
                        expected: e,
                        got: d,
                    })
                }
                _ => {}
            }
        }
    }
    Ok(dim)
}

/// Gram matrix of `system` with every function's normalization set to `normalized`.
pub fn assemble_gram(system: &[BasisFunction], normalized: bool) -> Result<GramMatrix> {
    let ordering: Vec<BasisFunction> = system
        .iter()
        .cloned()
        .map(|f| if normalized { f.normalized() } else { f.raw() })
        .collect();
    build(ordering, normalized)
}

/// Gram matrix honoring each function's own normalization flag.
pub fn gram_of(system: &[BasisFunction]) -> Result<GramMatrix> {
    let normalized = system.iter().all(|f| f.normalized || f.is_constant());
    build(system.to_vec(), normalized)
}

fn build(ordering: Vec<BasisFunction>, normalized: bool) -> Result<GramMatrix> {
    common_dim(&ordering)?;
    let mut groups: Vec<(Kind, Vec<usize>)> = Vec::new();
    for (i, f) in ordering.iter().enumerate() {
        let k = kind_of(f);
        match groups.iter_mut().find(|(gk, _)| *gk == k) {
            Some((_, v)) => v.push(i),
            None => groups.push((k, vec![i])),
        }
    }
    groups.sort_by_key(|(k, _)| *k);
    let mut locate = vec![(0, 0); ordering.len()];
    let mut blocks = Vec::with_capacity(groups.len());
    for (bi, (_, positions)) in groups.into_iter().enumerate() {
        let n = positions.len();
        let mut entries = DMatrix::zeros(n, n);
        for a in 0..n {
            let f = &ordering[positions[a]];
            locate[positions[a]] = (bi, a);
            for c in a..n {
                let g = &ordering[positions[c]];
                let raw = inner_product_analytic(f, g)?;
                let v = scaled_entry(
                    raw,
                    f.normalized && !f.is_constant(),
                    g.normalized && !g.is_constant(),
                );
                entries[(a, c)] = v;
                entries[(c, a)] = v;
            }
        }
        blocks.push(KindBlock { positions, entries });
    }
    Ok(GramMatrix {
        ordering,
        normalized,
        locate,
        blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    GershgorinCertified,
    EigensolverMeasured,
}

/// Riesz constants `A <= B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszBounds {
    pub lower_a: f64,
    pub upper_b: f64,
    pub provenance: Provenance,
}

impl RieszBounds {
    pub fn new(lower_a: f64, upper_b: f64, provenance: Provenance) -> Result<Self> {
        if !(lower_a > 0.0 && lower_a <= upper_b) {
            return Err(Error::InvalidArgument(format!(
                "Riesz bounds need 0 < A <= B, got A = {lower_a}, B = {upper_b}"
            )));
        }
        Ok(RieszBounds {
            lower_a,
            upper_b,
            provenance,
        })
    }

    pub fn contains(&self, value: f64, tol: f64) -> bool {
        value >= self.lower_a - tol && value <= self.upper_b + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: f64,
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub struct GershgorinReport {
    pub discs: Vec<Disc>,
    /// Smallest interval containing every disc.
    pub hull: (f64, f64),
}

impl GershgorinReport {
    pub fn max_radius(&self) -> f64 {
        self.discs.iter().map(|d| d.radius).fold(0.0, f64::max)
    }

    pub fn bounds(&self) -> Result<RieszBounds> {
        RieszBounds::new(self.hull.0, self.hull.1, Provenance::GershgorinCertified)
    }
}

/// Per-row centers and off-diagonal absolute row sums.
pub fn gershgorin_radii(g: &GramMatrix) -> GershgorinReport {
    let mut discs = vec![
        Disc {
            center: 0.0,
            radius: 0.0
        };
        g.size()
    ];
    for b in &g.blocks {
        for (a, &i) in b.positions.iter().enumerate() {
            let mut acc = CompensatedSum::default();
            for c in 0..b.positions.len() {
                if c != a {
                    acc.add(b.entries[(a, c)].abs());
                }
            }
            discs[i] = Disc {
                center: b.entries[(a, a)],
                radius: acc.value(),
            };
        }
    }
    let lo = discs
        .iter()
        .map(|d| d.center - d.radius)
        .fold(f64::INFINITY, f64::min);
    let hi = discs
        .iter()
        .map(|d| d.center + d.radius)
        .fold(f64::NEG_INFINITY, f64::max);
    GershgorinReport {
        discs,
        hull: (lo, hi),
    }
}

/// Extreme eigenvalues with their eigen-residuals `‖Gv - λv‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub n: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Residuals of the minimal and the maximal pair, in that order.
    pub residual_norms: Vec<f64>,
}

impl SpectralSummary {
    pub fn bounds(&self) -> Result<RieszBounds> {
        RieszBounds::new(
            self.lambda_min,
            self.lambda_max,
            Provenance::EigensolverMeasured,
        )
    }
}

/// Connected components of the nonzero pattern of a symmetric matrix.
fn components(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if m[(i, j)] != 0.0 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

struct ExtremePairs {
    min: (f64, DVector<f64>),
    max: (f64, DVector<f64>),
}

fn residual(m: &DMatrix<f64>, lambda: f64, v: &DVector<f64>) -> f64 {
    (m * v - v * lambda).norm()
}

fn dense_extremes(m: DMatrix<f64>) -> ExtremePairs {
    let eig = SymmetricEigen::new(m);
    let (mut imin, mut imax) = (0, 0);
    for (k, &v) in eig.eigenvalues.iter().enumerate() {
        if v < eig.eigenvalues[imin] {
            imin = k;
        }
        if v > eig.eigenvalues[imax] {
            imax = k;
        }
    }
    ExtremePairs {
        min: (
            eig.eigenvalues[imin],
            eig.eigenvectors.column(imin).into_owned(),
        ),
        max: (
            eig.eigenvalues[imax],
            eig.eigenvectors.column(imax).into_owned(),
        ),
    }
}

/// Outcome of the Lanczos extreme-pair iteration.
#[derive(Debug, Clone)]
pub struct LanczosResult {
    pub lambda_min: f64,
    pub vector_min: DVector<f64>,
    pub lambda_max: f64,
    pub vector_max: DVector<f64>,
    pub iterations: usize,
}

/// Lanczos with full reorthogonalization for both ends of the spectrum of a
/// symmetric matrix. The start vector is all-ones; on breakdown the next
/// coordinate vector, orthogonalized against the basis, continues the run.
pub fn lanczos_extremes(
    m: &DMatrix<f64>,
    tolerance: f64,
    max_iterations: usize,
) -> Result<LanczosResult> {
    let n = m.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let max_iterations = max_iterations.min(n).max(1);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut q = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut restart_coordinate = 0usize;
    let mut last_residual = f64::INFINITY;
    for k in 0..max_iterations {
        let mut w = m * &q;
        let alpha = q.dot(&w);
        w.axpy(-alpha, &q, 1.0);
        if let Some(prev) = basis.last() {
            w.axpy(-betas[k - 1], prev, 1.0);
        }
        basis.push(q.clone());
        alphas.push(alpha);
        // two passes of classical Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = v.dot(&w);
                w.axpy(-c, v, 1.0);
            }
        }
        let mut beta = w.norm();
        let breakdown = beta <= 1e-12 * alpha.abs().max(1.0);
        let done = k + 1 == max_iterations;
        if (k + 1) % 8 == 0 || breakdown || done {
            let t = tridiagonal(&alphas, &betas);
            let eig = SymmetricEigen::new(t);
            let (imin, imax) = argminmax(eig.eigenvalues.as_slice());
            let last = alphas.len() - 1;
            let est_min = beta * eig.eigenvectors[(last, imin)].abs();
            let est_max = beta * eig.eigenvectors[(last, imax)].abs();
            last_residual = est_min.max(est_max);
            if last_residual <= 0.5 * tolerance || done || (breakdown && basis.len() == n) {
                let ritz = |i: usize| -> DVector<f64> {
                    let mut v = DVector::zeros(n);
                    for (j, b) in basis.iter().enumerate() {
                        v.axpy(eig.eigenvectors[(j, i)], b, 1.0);
                    }
                    let norm = v.norm();
                    v / norm
                };
                let (vmin, vmax) = (ritz(imin), ritz(imax));
                let (lmin, lmax) = (eig.eigenvalues[imin], eig.eigenvalues[imax]);
                let (rmin, rmax) = (residual(m, lmin, &vmin), residual(m, lmax, &vmax));
                if rmin.max(rmax) <= tolerance {
                    return Ok(LanczosResult {
                        lambda_min: lmin,
                        vector_min: vmin,
                        lambda_max: lmax,
                        vector_max: vmax,
                        iterations: k + 1,
                    });
                }
                last_residual = rmin.max(rmax);
                if done || basis.len() == n {
                    break;
                }
            }
        }
        if breakdown {
            // continue with a fresh direction orthogonal to the Krylov space
            let mut fresh = None;
            while restart_coordinate < n {
                let mut e = DVector::zeros(n);
                e[restart_coordinate] = 1.0;
                restart_coordinate += 1;
                for _ in 0..2 {
                    for v in &basis {
                        let c = v.dot(&e);
                        e.axpy(-c, v, 1.0);
                    }
                }
                if e.norm() > 1e-8 {
                    fresh = Some(e);
                    break;
                }
            }
            match fresh {
                Some(e) => {
                    w = e;
                    beta = 0.0;
                }
                None => break,
            }
            let norm = w.norm();
            betas.push(beta);
            q = w / norm;
        } else {
            betas.push(beta);
            q = w / beta;
        }
    }
    Err(Error::NoConvergence {
        iterations: basis.len(),
        residual: last_residual,
    })
}

fn tridiagonal(alphas: &[f64], betas: &[f64]) -> DMatrix<f64> {
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    t
}

fn argminmax(values: &[f64]) -> (usize, usize) {
    let (mut imin, mut imax) = (0, 0);
    for (k, &v) in values.iter().enumerate() {
        if v < values[imin] {
            imin = k;
        }
        if v > values[imax] {
            imax = k;
        }
    }
    (imin, imax)
}

/// Polishes an approximate eigenpair until `‖Mv - λv‖ <= target`: a short
/// Krylov space seeded with `v` first, inverse iteration if that stalls.
fn refine_pair(m: &DMatrix<f64>, pair: (f64, DVector<f64>), target: f64) -> (f64, DVector<f64>) {
    let (lambda, v) = pair;
    if residual(m, lambda, &v) <= target {
        return (lambda, v);
    }
    let (lambda, v) = krylov_polish(m, lambda, v, target);
    if residual(m, lambda, &v) <= target {
        return (lambda, v);
    }
    inverse_iteration(m, lambda, v, target)
}

fn krylov_polish(
    m: &DMatrix<f64>,
    lambda: f64,
    v: DVector<f64>,
    target: f64,
) -> (f64, DVector<f64>) {
    let n = m.nrows();
    let steps = n.min(48);
    let mut basis = vec![v.clone()];
    let mut best = (lambda, v);
    let mut best_residual = residual(m, best.0, &best.1);
    while basis.len() < steps {
        let mut w = m * basis.last().unwrap();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&w);
                w.axpy(-c, b, 1.0);
            }
        }
        let norm = w.norm();
        if norm <= 1e-14 {
            break;
        }
        basis.push(w / norm);
        if basis.len() % 6 != 0 && basis.len() < steps {
            continue;
        }
        let k = basis.len();
        let images: Vec<DVector<f64>> = basis.iter().map(|b| m * b).collect();
        let h = DMatrix::from_fn(k, k, |i, j| basis[i].dot(&images[j]));
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let i = (0..k)
            .min_by(|&a, &b| {
                (eig.eigenvalues[a] - lambda)
                    .abs()
                    .total_cmp(&(eig.eigenvalues[b] - lambda).abs())
            })
            .unwrap();
        let mut u = DVector::zeros(n);
        for (j, b) in basis.iter().enumerate() {
            u.axpy(eig.eigenvectors[(j, i)], b, 1.0);
        }
        let u = &u / u.norm();
        let mu = u.dot(&(m * &u));
        let r = residual(m, mu, &u);
        if r < best_residual {
            best = (mu, u);
            best_residual = r;
        }
        if best_residual <= target {
            break;
        }
    }
    best
}

fn inverse_iteration(
    m: &DMatrix<f64>,
    lambda: f64,
    v: DVector<f64>,
    target: f64,
) -> (f64, DVector<f64>) {
    let (mut lambda, mut v) = (lambda, v);
    let n = m.nrows();
    let shift = lambda * (1.0 + 4.0 * f64::EPSILON);
    let lu = (m - DMatrix::identity(n, n) * shift).lu();
    for _ in 0..4 {
        let Some(y) = lu.solve(&v) else { break };
        let norm = y.norm();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        v = y / norm;
        lambda = v.dot(&(m * &v));
        if residual(m, lambda, &v) <= target {
            break;
        }
    }
    (lambda, v)
}

fn extremes_of(m: DMatrix<f64>, tolerance: f64) -> Result<(ExtremePairs, DMatrix<f64>)> {
    if m.nrows() <= DENSE_EIGEN_LIMIT {
        let pairs = dense_extremes(m.clone());
        let target = 0.1 * tolerance;
        let pairs = ExtremePairs {
            min: refine_pair(&m, pairs.min, target),
            max: refine_pair(&m, pairs.max, target),
        };
        Ok((pairs, m))
    } else {
        let r = lanczos_extremes(&m, tolerance, 3000)?;
        Ok((
            ExtremePairs {
                min: (r.lambda_min, r.vector_min),
                max: (r.lambda_max, r.vector_max),
            },
            m,
        ))
    }
}

/// Smallest and largest eigenvalue of `g`. The matrix is split along its
/// exact zero pattern (kind blocks, then connected components); components
/// up to `DENSE_EIGEN_LIMIT` are solved densely, larger ones by Lanczos.
/// `tolerance` bounds the eigen-residual of both reported pairs; dense pairs
/// are polished by inverse iteration when the dense solver alone misses it.
pub fn extreme_eigenvalues(g: &GramMatrix, tolerance: f64) -> Result<SpectralSummary> {
    if g.size() == 0 {
        return Err(Error::InvalidArgument("empty Gram matrix".into()));
    }
    if g.size() > 2 * MAX_SPECTRUM_N + 1 {
        return Err(Error::InvalidArgument(format!(
            "matrix size {} above the supported limit",
            g.size()
        )));
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let mut best_min = (f64::INFINITY, 0.0);
    let mut best_max = (f64::NEG_INFINITY, 0.0);
    for b in &g.blocks {
        for comp in components(&b.entries) {
            let sub =
                DMatrix::from_fn(comp.len(), comp.len(), |a, c| b.entries[(comp[a], comp[c])]);
            let (pairs, sub) = extremes_of(sub, tolerance)?;
            if pairs.min.0 < best_min.0 {
                best_min = (pairs.min.0, residual(&sub, pairs.min.0, &pairs.min.1));
            }
            if pairs.max.0 > best_max.0 {
                best_max = (pairs.max.0, residual(&sub, pairs.max.0, &pairs.max.1));
            }
        }
    }
    let worst = best_min.1.max(best_max.1);
    if worst > tolerance {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: worst,
        });
    }
    Ok(SpectralSummary {
        n: g.size(),
        lambda_min: best_min.0,
        lambda_max: best_max.0,
        residual_norms: vec![best_min.1, best_max.1],
    })
}

/// Rayleigh quotient `cᵀ G c / cᵀ c`.
pub fn riesz_quadratic_form(g: &GramMatrix, coefficients: &[f64]) -> Result<f64> {
    if coefficients.len() != g.size() {
        return Err(Error::DimensionMismatch {
            expected: g.size(),
            got: coefficients.len(),
        });
    }
    let norm2: f64 = coefficients.iter().map(|c| c * c).sum();
    if norm2 == 0.0 {
        return Err(Error::InvalidArgument("zero coefficient vector".into()));
    }
    let gc = g.matvec(coefficients);
    let form: f64 = gc.iter().zip(coefficients).map(|(a, b)| a * b).sum();
    Ok(form / norm2)
}

/// `Σ_{p,q < terms} (2p+1)⁻²(2q+1)⁻² - 1`, the row-sum bound obtained without
/// the prime factorization argument; tends to `π⁴/64 - 1`.
pub fn crude_row_sum_bound(terms: u64) -> f64 {
    let mut acc = CompensatedSum::default();
    for p in (0..terms).rev() {
        let odd = (2 * p + 1) as f64;
        acc.add(1.0 / (odd * odd));
    }
    let s = acc.value();
    s * s - 1.0
}

/// Riesz constants `2 - π⁴/64` and `π⁴/64` from the crude row-sum bound.
pub fn crude_bounds() -> RieszBounds {
    let b = std::f64::consts::PI.powi(4) / 64.0;
    RieszBounds {
        lower_a: 2.0 - b,
        upper_b: b,
        provenance: Provenance::GershgorinCertified,
    }
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub coefficients: Vec<f64>,
    pub l2_error: f64,
}

/// Least-squares coefficients of `target` in the span of `system`, and the
/// residual `L₂` error, both by quadrature under `spec`.
pub fn project_l2(
    target: &dyn Fn(&[f64]) -> f64,
    system: &[BasisFunction],
    spec: &QuadratureSpec,
) -> Result<Projection> {
    if system.is_empty() {
        return Err(Error::InvalidArgument("empty system".into()));
    }
    if let Some(d) = common_dim(system)? {
        if d != spec.dimension {
            return Err(Error::DimensionMismatch {
                expected: spec.dimension,
                got: d,
            });
        }
    }
    let gram = gram_of(system)?.to_dense();
    let mut rhs = DVector::zeros(system.len());
    for (i, f) in system.iter().enumerate() {
        rhs[i] = project_oracle(target, f, spec)?;
    }
    let chol = gram.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let c = chol.solve(&rhs);
    let coefficients: Vec<f64> = c.iter().copied().collect();
    let combination: Vec<(f64, BasisFunction)> = coefficients
        .iter()
        .copied()
        .zip(system.iter().cloned())
        .collect();
    let l2_error = l2_distance(target, &combination, spec)?;
    Ok(Projection {
        coefficients,
        l2_error,
    })
}

/// Decimal with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV of `(N, lambda_min, lambda_max)` rows with a leading comment line.
pub fn spectrum_csv(comment: &str, rows: &[(u64, SpectralSummary)]) -> String {
    let mut out = format!("# {comment}\nN,lambda_min,lambda_max\n");
    for (n, s) in rows {
        out.push_str(&format!(
            "{n},{},{}\n",
            fmt17(s.lambda_min),
            fmt17(s.lambda_max)
        ));
    }
    out
}

/// Row-major CSV of the full matrix; the header names the ordering.
pub fn matrix_csv(comment: &str, g: &GramMatrix) -> String {
    let mut out = format!("# {comment}\n");
    let names: Vec<String> = g.ordering().iter().map(|f| f.to_string()).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    let n = g.size();
    let mut row = Vec::with_capacity(n);
    for i in 0..n {
        row.clear();
        row.extend((0..n).map(|j| fmt17(g.entry(i, j))));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    /// Direct gcd/parity form of the univariate inner products.
    fn univariate_reference(i: u64, j: u64, sin: bool) -> Rational {
        let g = gcd(i, j);
        if (i / g).is_multiple_of(2) || (j / g).is_multiple_of(2) {
            return r(0, 1);
        }
        let g4 = (g as i128).pow(4);
        let mag = r(g4, 3 * (i as i128).pow(2) * (j as i128).pow(2));
        if sin && ((i + j) / (2 * g)).is_multiple_of(2) {
            -mag
        } else {
            mag
        }
    }

    #[test]
    fn analytic_examples() {
        let c = |k| BasisFunction::c(k).unwrap();
        let s = |k| BasisFunction::s(k).unwrap();
        assert_eq!(inner_product_analytic(&c(1), &c(2)).unwrap(), r(0, 1));
        assert_eq!(inner_product_analytic(&c(1), &c(3)).unwrap(), r(1, 27));
        assert_eq!(inner_product_analytic(&s(1), &s(3)).unwrap(), r(-1, 27));
        let s12 = BasisFunction::sin(RidgeIndex::new(vec![1, 2]).unwrap());
        let s36 = BasisFunction::sin(RidgeIndex::new(vec![3, 6]).unwrap());
        assert_eq!(inner_product_analytic(&s12, &s36).unwrap(), r(-1, 27));
        assert_eq!(inner_product_analytic(&c(4), &s(4)).unwrap(), r(0, 1));
        let one = BasisFunction::constant();
        assert_eq!(inner_product_analytic(&one, &one).unwrap(), r(1, 1));
        assert_eq!(inner_product_analytic(&one, &c(1)).unwrap(), r(0, 1));
        assert!(matches!(
            inner_product_analytic(&c(1), &s12),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn odd_ratio_dispatch_matches_gcd_form() {
        for i in 1..=256u64 {
            for j in 1..=256u64 {
                for sin in [false, true] {
                    let reference = univariate_reference(i, j, sin);
                    // through the general multivariate path
                    let a = RidgeIndex::new(vec![i as i64, 0]).unwrap();
                    let b = RidgeIndex::new(vec![j as i64, 0]).unwrap();
                    let (f, g) = if sin {
                        (BasisFunction::sin(a), BasisFunction::sin(b))
                    } else {
                        (BasisFunction::cos(a), BasisFunction::cos(b))
                    };
                    assert_eq!(inner_product_analytic(&f, &g).unwrap(), reference);
                    assert_eq!(kernel_1d(i, j, sin), reference);
                }
            }
        }
    }

    #[test]
    fn sign_rule_exhaustive() {
        for i in 1..=128u64 {
            for j in 1..=128u64 {
                let g = gcd(i, j);
                let cc = kernel_1d(i, j, false);
                let ss = kernel_1d(i, j, true);
                let negative = ss < r(0, 1);
                let expected = cc != r(0, 1) && ((i + j) / (2 * g)).is_multiple_of(2);
                assert_eq!(negative, expected, "i={i} j={j}");
                assert_eq!(ss.abs(), cc);
            }
        }
    }

    #[test]
    fn diagonal_and_block_structure() {
        let g = assemble_gram(&canonical_system(1, 12, true), true).unwrap();
        let n = g.size();
        assert_eq!(n, 25);
        for i in 0..n {
            assert_eq!(g.entry(i, i), 1.0);
            for j in 0..n {
                assert_eq!(g.entry(i, j).to_bits(), g.entry(j, i).to_bits());
            }
        }
        for i in 1..=12 {
            for j in 13..=24 {
                assert_eq!(g.entry(i, j), 0.0);
            }
            assert_eq!(g.entry(0, i), 0.0);
        }
        assert!((g.entry(1, 3) - 1.0 / 9.0).abs() < 1e-16);
        let raw = assemble_gram(&canonical_system(1, 3, false), false).unwrap();
        assert_eq!(raw.entry(0, 0), 1.0);
        assert!((raw.entry(1, 1) - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn small_systems() {
        let g = assemble_gram(&canonical_system(1, 1, true), true).unwrap();
        assert_eq!(g.to_dense(), DMatrix::identity(3, 3));
        let rep = gershgorin_radii(&g);
        assert!(rep.discs.iter().all(|d| d.radius == 0.0));
        let g0 = assemble_gram(&canonical_system(1, 0, true), true).unwrap();
        assert_eq!(g0.to_dense(), DMatrix::from_element(1, 1, 1.0));
        let s = extreme_eigenvalues(&g0, 1e-9).unwrap();
        assert_eq!((s.lambda_min, s.lambda_max), (1.0, 1.0));
    }

    #[test]
    fn raw_cos_block_single() {
        let g = assemble_gram(&raw_cos_system(1), false).unwrap();
        let s = extreme_eigenvalues(&g, 1e-12).unwrap();
        assert!((s.lambda_min - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.lambda_max - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gershgorin_rows_within_half() {
        for n in [16u32, 256] {
            let g = assemble_gram(&canonical_system(1, n, true), true).unwrap();
            let rep = gershgorin_radii(&g);
            assert_eq!(rep.discs[0].radius, 0.0);
            assert!(rep.max_radius() <= 0.5 + 1e-12);
            let b = rep.bounds().unwrap();
            assert!(b.lower_a >= 0.5 - 1e-12 && b.upper_b <= 1.5 + 1e-12);
        }
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let sys = vec![
            BasisFunction::c(1).unwrap(),
            BasisFunction::cos(RidgeIndex::new(vec![1, 1]).unwrap()),
        ];
        assert!(matches!(
            assemble_gram(&sys, true),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lanczos_matches_dense() {
        let g = assemble_gram(&raw_cos_system(600), false).unwrap();
        let (_, block) = g.kind_blocks().next().unwrap();
        // odd indices form one component
        let odd: Vec<usize> = (0..600).step_by(2).collect();
        let sub = DMatrix::from_fn(odd.len(), odd.len(), |a, c| block[(odd[a], odd[c])]);
        let dense = dense_extremes(sub.clone());
        let lz = lanczos_extremes(&sub, 1e-10, 300).unwrap();
        assert!((lz.lambda_min - dense.min.0).abs() < 1e-10);
        assert!((lz.lambda_max - dense.max.0).abs() < 1e-10);
        // a block-diagonal matrix forces the breakdown path
        let mut bd = DMatrix::zeros(6, 6);
        for i in 0..6 {
            bd[(i, i)] = [1.0, 1.0, 2.0, 2.0, 3.0, 5.0][i];
        }
        let lz = lanczos_extremes(&bd, 1e-12, 50).unwrap();
        assert!((lz.lambda_min - 1.0).abs() < 1e-12);
        assert!((lz.lambda_max - 5.0).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_quotients() {
        let g = assemble_gram(&canonical_system(1, 64, true), true).unwrap();
        let mut e = vec![0.0; g.size()];
        e[5] = 1.0;
        assert!((riesz_quadratic_form(&g, &e).unwrap() - 1.0).abs() < 1e-15);
        assert!(riesz_quadratic_form(&g, &vec![0.0; g.size()]).is_err());
        assert!(riesz_quadratic_form(&g, &[1.0]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let c: Vec<f64> = (0..g.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let q = riesz_quadratic_form(&g, &c).unwrap();
            assert!((0.5..=1.5).contains(&q));
        }
        // Rayleigh identity at the top eigenvector
        let dense = g.to_dense();
        let pairs = dense_extremes(dense);
        let v: Vec<f64> = pairs.max.1.iter().copied().collect();
        assert!((riesz_quadratic_form(&g, &v).unwrap() - pairs.max.0).abs() < 1e-12);
    }

    #[test]
    fn crude_bound_tends_to_pi4_over_64() {
        let target = std::f64::consts::PI.powi(4) / 64.0 - 1.0;
        assert!((crude_row_sum_bound(4_000_000) - target).abs() < 1e-6);
        let b = crude_bounds();
        assert!((b.upper_b - 1.522_017_047_406_287_7).abs() < 1e-12);
    }

    #[test]
    fn projection_of_member_and_constant() {
        let system = canonical_system(1, 8, true);
        let member = BasisFunction::c(5).unwrap().normalized();
        let spec = QuadratureSpec::for_projection(1, 8)
            .unwrap()
            .with_target_kinks(crate::basis::breakpoints(&member).unwrap());
        let p = project_l2(&|x| member.value_at(x), &system, &spec).unwrap();
        for (f, c) in system.iter().zip(&p.coefficients) {
            let expected = if *f == member { 1.0 } else { 0.0 };
            assert!((c - expected).abs() < 1e-9, "{f}: {c}");
        }
        assert!(p.l2_error <= 1e-6);
        let p = project_l2(&|_| 1.0, &system, &spec).unwrap();
        assert!((p.coefficients[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_formats() {
        let g = assemble_gram(&canonical_system(1, 1, true), true).unwrap();
        let csv = matrix_csv("test", &g);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# test");
        assert_eq!(lines[1], "const,sqrt3*C:1,sqrt3*S:1");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("1.0000000000000000e0,0.0000000000000000e0"));
        let s = extreme_eigenvalues(&g, 1e-9).unwrap();
        let csv = spectrum_csv("c", &[(1, s)]);
        assert_eq!(csv.lines().nth(1), Some("N,lambda_min,lambda_max"));
    }
}
