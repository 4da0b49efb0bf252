//! Quadrature oracle for inner products on `[0,1]^d`.
//!
//! Only point evaluations of the basis functions are used here; nothing in
//! this module knows the closed-form inner products, so it can be used to
//! check them.
//!
//! * `d = 1`: the breakpoint lists of both factors are merged; on every
//!   piece the integrand is a quadratic and Simpson's rule is exact.
//! * `d = 2`: along one axis the integrand is piecewise quadratic with
//!   computable breakpoints, so that line integral is exact; as a function of
//!   the second coordinate it is a piecewise cubic whose breakpoints are also
//!   computable, and Simpson's rule is exact there too.
//! * `d = 3`: the exact `d = 2` slice integral on the first two axes, and
//!   composite 4-point Gauss–Legendre along the third.

use crate::basis::{breakpoints, BasisFunction, Shape};
use crate::error::{Error, Result};

/// Largest `‖α‖₁` the composite rule is calibrated for.
pub const MAX_ORACLE_L1: u64 = 32;

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_8,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_8,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Breakpoint-exact integration (`d = 1, 2`).
    ExactPiecewise,
    /// Composite Gauss–Legendre (order 4 per cell).
    CompositeGauss,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub dimension: usize,
    /// Cells per axis of the Gauss–Legendre mesh.
    pub points_per_axis: usize,
    pub rule: QuadratureRule,
    /// A priori bound on the absolute error of an inner product of two
    /// basis functions under this spec.
    pub reported_error_bound: f64,
    /// Known kinks of a univariate target; the 1D mesh is split there.
    pub target_kinks: Vec<f64>,
}

impl QuadratureSpec {
    pub fn exact_1d() -> Self {
        QuadratureSpec {
            dimension: 1,
            points_per_axis: 0,
            rule: QuadratureRule::ExactPiecewise,
            reported_error_bound: 1e-13,
            target_kinks: Vec::new(),
        }
    }

    /// Default mesh for a pair of ridge functions with `max(‖α‖₁, ‖β‖₁) = max_l1`.
    pub fn for_pair(dimension: usize, max_l1: u64) -> Result<Self> {
        if dimension == 1 {
            return Ok(QuadratureSpec::exact_1d());
        }
        if !(2..=3).contains(&dimension) {
            return Err(Error::UnsupportedDimension(dimension));
        }
        if max_l1 > MAX_ORACLE_L1 {
            return Err(Error::ToleranceUnreachable(format!(
                "frequency l1-norm {max_l1} exceeds {MAX_ORACLE_L1}"
            )));
        }
        Ok(if dimension == 2 {
            QuadratureSpec {
                dimension,
                points_per_axis: 0,
                rule: QuadratureRule::ExactPiecewise,
                reported_error_bound: 1e-12,
                target_kinks: Vec::new(),
            }
        } else {
            QuadratureSpec {
                dimension,
                points_per_axis: 2 * max_l1.max(1) as usize,
                rule: QuadratureRule::CompositeGauss,
                reported_error_bound: 1e-7,
                target_kinks: Vec::new(),
            }
        })
    }

    /// Mesh for projecting smooth targets onto functions of frequency up to `max_l1`.
    pub fn for_projection(dimension: usize, max_l1: u64) -> Result<Self> {
        let points_per_axis = match dimension {
            1 => 4096.max(64 * max_l1 as usize),
            2 => 64 * max_l1.max(1) as usize,
            3 => 16 * max_l1.max(1) as usize,
            d => return Err(Error::UnsupportedDimension(d)),
        };
        if dimension > 1 && points_per_axis > 4096 {
            return Err(Error::ToleranceUnreachable(format!(
                "{points_per_axis} cells per axis needed in dimension {dimension}"
            )));
        }
        Ok(QuadratureSpec {
            dimension,
            points_per_axis,
            rule: QuadratureRule::CompositeGauss,
            reported_error_bound: if dimension == 1 { 1e-10 } else { 1e-5 },
            target_kinks: Vec::new(),
        })
    }

    pub fn with_points(mut self, points_per_axis: usize) -> Self {
        self.points_per_axis = points_per_axis;
        self
    }

    pub fn with_target_kinks(mut self, kinks: Vec<f64>) -> Self {
        self.target_kinks = kinks;
        self
    }
}

/// Neumaier-compensated accumulator; summation order is the caller's.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn sorted_pair<'a>(
    f: &'a BasisFunction,
    g: &'a BasisFunction,
) -> (&'a BasisFunction, &'a BasisFunction) {
    if f <= g {
        (f, g)
    } else {
        (g, f)
    }
}

fn merge_points(mut points: Vec<f64>) -> Vec<f64> {
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

/// Exact `∫₀¹ f g` for univariate basis functions.
pub fn inner_product_oracle_1d(f: &BasisFunction, g: &BasisFunction) -> Result<f64> {
    for h in [f, g] {
        if let Some(d) = h.dim() {
            if d != 1 {
                return Err(Error::UnsupportedDimension(d));
            }
        }
    }
    let (f, g) = sorted_pair(f, g);
    let mut points = breakpoints(f)?;
    points.extend(breakpoints(g)?);
    let points = merge_points(points);
    let mut acc = CompensatedSum::default();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = 0.5 * (a + b);
        let fa = f.value_at_1d(a) * g.value_at_1d(a);
        let fm = f.value_at_1d(m) * g.value_at_1d(m);
        let fb = f.value_at_1d(b) * g.value_at_1d(b);
        acc.add((b - a) / 6.0 * (fa + 4.0 * fm + fb));
    }
    Ok(acc.value())
}

/// Values of `t ∈ (0, 1)` where `h` restricted to the line `x(t)` has a kink;
/// `offset` is `α·x` at `t = 0` and `slope` is the coefficient of the line axis.
fn line_breakpoints(shape: &Shape, offset: f64, slope: i64, out: &mut Vec<f64>) {
    let shift = match shape {
        Shape::Constant => return,
        Shape::CosLike(_) => 0.0,
        Shape::SinLike(_) => 0.25,
    };
    if slope == 0 {
        return;
    }
    let s = slope as f64;
    let (lo, hi) = if s > 0.0 {
        (offset, offset + s)
    } else {
        (offset + s, offset)
    };
    // kinks at u = shift + n/2
    let n_lo = (2.0 * (lo - shift)).ceil() as i64;
    let n_hi = (2.0 * (hi - shift)).floor() as i64;
    for n in n_lo..=n_hi {
        let t = (shift + 0.5 * n as f64 - offset) / s;
        if t > 0.0 && t < 1.0 {
            out.push(t);
        }
    }
}

fn coefficient(f: &BasisFunction, axis: usize) -> i64 {
    f.index().map_or(0, |a| a.as_slice()[axis])
}

fn choose_line_axis(f: &BasisFunction, g: &BasisFunction, d: usize) -> usize {
    (0..d)
        .max_by_key(|&j| {
            let (a, b) = (
                coefficient(f, j).unsigned_abs(),
                coefficient(g, j).unsigned_abs(),
            );
            (a.min(b), a + b, std::cmp::Reverse(j))
        })
        .unwrap_or(0)
}

/// Exact `∫₀¹ f(x) g(x) dx_axis` with the other coordinates of `x` fixed.
fn line_integral(
    f: &BasisFunction,
    g: &BasisFunction,
    x: &mut [f64],
    axis: usize,
    scratch: &mut Vec<f64>,
) -> f64 {
    x[axis] = 0.0;
    scratch.clear();
    scratch.push(0.0);
    scratch.push(1.0);
    for h in [f, g] {
        if let Some(a) = h.index() {
            line_breakpoints(&h.shape, a.dot(x), a.as_slice()[axis], scratch);
        }
    }
    scratch.sort_by(f64::total_cmp);
    let mut acc = 0.0;
    let eval = |t: f64, x: &mut [f64]| {
        x[axis] = t;
        f.value_at(x) * g.value_at(x)
    };
    for w in scratch.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let fa = eval(a, x);
        let fm = eval(0.5 * (a + b), x);
        let fb = eval(b, x);
        acc += (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    }
    acc
}

/// Nodes and weights of the composite 4-point rule with `cells` cells on `[0, 1]`.
fn composite_nodes(cells: usize) -> Vec<(f64, f64)> {
    let h = 1.0 / cells as f64;
    let mut out = Vec::with_capacity(4 * cells);
    for c in 0..cells {
        let mid = (c as f64 + 0.5) * h;
        for (node, weight) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
            out.push((mid + 0.5 * h * node, 0.5 * h * weight));
        }
    }
    out
}

fn common_dimension(f: &BasisFunction, g: &BasisFunction) -> Result<Option<usize>> {
    match (f.dim(), g.dim()) {
        (Some(a), Some(b)) if a != b => Err(Error::DimensionMismatch {
            expected: a,
            got: b,
        }),
        (a, b) => Ok(a.or(b)),
    }
}

/// Approximates `∫_{[0,1]^d} f g` for `d ∈ {2, 3}`.
pub fn inner_product_oracle_nd(
    f: &BasisFunction,
    g: &BasisFunction,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let d = common_dimension(f, g)?.unwrap_or(spec.dimension);
    if d != spec.dimension {
        return Err(Error::DimensionMismatch {
            expected: spec.dimension,
            got: d,
        });
    }
    if d == 1 {
        return inner_product_oracle_1d(f, g);
    }
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let max_l1 = [f, g]
        .iter()
        .filter_map(|h| h.index().map(|a| a.l1_norm()))
        .max()
        .unwrap_or(0);
    if max_l1 > MAX_ORACLE_L1 {
        return Err(Error::ToleranceUnreachable(format!(
            "frequency l1-norm {max_l1} exceeds {MAX_ORACLE_L1}"
        )));
    }
    if d == 3 && spec.points_per_axis == 0 {
        return Err(Error::InvalidArgument("empty quadrature mesh".into()));
    }
    let (f, g) = sorted_pair(f, g);
    let axis = choose_line_axis(f, g, d);
    let others: Vec<usize> = (0..d).filter(|&j| j != axis).collect();
    let mut x = vec![0.0; d];
    let mut scratch = Scratch::default();
    match others.as_slice() {
        [y] => Ok(slice_integral(f, g, &mut x, axis, *y, &mut scratch)),
        [y, z] => {
            let mut acc = CompensatedSum::default();
            for (t, w) in composite_nodes(spec.points_per_axis) {
                x[*z] = t;
                acc.add(w * slice_integral(f, g, &mut x, axis, *y, &mut scratch));
            }
            Ok(acc.value())
        }
        _ => unreachable!("dimension checked above"),
    }
}

#[derive(Default)]
struct Scratch {
    line: Vec<f64>,
    slice: Vec<f64>,
}

fn kink_shift(shape: &Shape) -> Option<f64> {
    match shape {
        Shape::Constant => None,
        Shape::CosLike(_) => Some(0.0),
        Shape::SinLike(_) => Some(0.25),
    }
}

/// Kink levels `shift + n/2` inside `[lo, hi]`.
fn kink_levels(shift: f64, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    let n_lo = (2.0 * (lo - shift)).ceil() as i64;
    let n_hi = (2.0 * (hi - shift)).floor() as i64;
    (n_lo..=n_hi).map(move |n| shift + 0.5 * n as f64)
}

/// Exact `∫∫ f g dx_axis dx_y` over the unit square with the remaining
/// coordinates of `x` fixed. The line integral along `axis` is a cubic in
/// `x_y` between the values where a kink line of `f` or `g` meets the square
/// boundary or where a kink line of `f` crosses one of `g`; Simpson's rule
/// is exact on each such piece.
fn slice_integral(
    f: &BasisFunction,
    g: &BasisFunction,
    x: &mut [f64],
    axis: usize,
    y: usize,
    scratch: &mut Scratch,
) -> f64 {
    let mut bps = std::mem::take(&mut scratch.slice);
    bps.clear();
    bps.push(0.0);
    bps.push(1.0);
    x[axis] = 0.0;
    x[y] = 0.0;
    let mut lines = Vec::with_capacity(2);
    for h in [f, g] {
        if let (Some(a), Some(shift)) = (h.index(), kink_shift(&h.shape)) {
            let (ca, cy) = (a.as_slice()[axis], a.as_slice()[y]);
            let rest = a.dot(x);
            for e in [0, 1] {
                line_breakpoints(&h.shape, rest + (ca * e) as f64, cy, &mut bps);
            }
            lines.push((ca as f64, cy as f64, rest, shift));
        }
    }
    if let [(fa, fy, fc, fs), (ga, gy, gc, gs)] = lines[..] {
        let det = fa * gy - fy * ga;
        if det != 0.0 {
            let range =
                |a: f64, b: f64, c: f64| (c + a.min(0.0) + b.min(0.0), c + a.max(0.0) + b.max(0.0));
            let (flo, fhi) = range(fa, fy, fc);
            let (glo, ghi) = range(ga, gy, gc);
            for k1 in kink_levels(fs, flo, fhi) {
                let r1 = k1 - fc;
                for k2 in kink_levels(gs, glo, ghi) {
                    let r2 = k2 - gc;
                    let xa = (r1 * gy - fy * r2) / det;
                    let xy = (fa * r2 - ga * r1) / det;
                    if xa > 0.0 && xa < 1.0 && xy > 0.0 && xy < 1.0 {
                        bps.push(xy);
                    }
                }
            }
        }
    }
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let mut acc = CompensatedSum::default();
    let mut line = |t: f64, x: &mut [f64]| {
        x[y] = t;
        line_integral(f, g, x, axis, &mut scratch.line)
    };
    let mut left = line(0.0, x);
    for w in bps.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = line(0.5 * (a + b), x);
        let right = line(b, x);
        acc.add((b - a) / 6.0 * (left + 4.0 * mid + right));
        left = right;
    }
    scratch.slice = bps;
    acc.value()
}

/// Inner product by whichever rule fits the dimension.
pub fn inner_product_oracle(f: &BasisFunction, g: &BasisFunction) -> Result<f64> {
    let d = common_dimension(f, g)?.unwrap_or(1);
    if d == 1 {
        return inner_product_oracle_1d(f, g);
    }
    let max_l1 = [f, g]
        .iter()
        .filter_map(|h| h.index().map(|a| a.l1_norm()))
        .max()
        .unwrap_or(1);
    inner_product_oracle_nd(f, g, &QuadratureSpec::for_pair(d, max_l1)?)
}

/// Composite Gauss–Legendre nodes on `[0, 1]` refined at the given kinks.
fn nodes_with_kinks(cells: usize, kinks: &[f64]) -> Vec<(f64, f64)> {
    let h = 1.0 / cells as f64;
    let mut edges: Vec<f64> = (0..=cells).map(|c| c as f64 * h).collect();
    edges.extend_from_slice(kinks);
    let edges = merge_points(edges);
    let mut out = Vec::with_capacity(4 * edges.len());
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (node, weight) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
            out.push((mid + half * node, half * weight));
        }
    }
    out
}

fn univariate_kinks(functions: &[&BasisFunction]) -> Result<Vec<f64>> {
    let mut all = Vec::new();
    for f in functions {
        all.extend(breakpoints(f)?);
    }
    Ok(merge_points(all))
}

/// Integrates `integrand` over `[0,1]^d` with the composite rule of `spec`,
/// refining at `kinks` when `d = 1`.
fn integrate(
    spec: &QuadratureSpec,
    kinks: &[f64],
    integrand: &mut dyn FnMut(&[f64]) -> f64,
) -> Result<f64> {
    let cells = spec.points_per_axis.max(1);
    let mut acc = CompensatedSum::default();
    match spec.dimension {
        1 => {
            let mut all = kinks.to_vec();
            all.extend(
                spec.target_kinks
                    .iter()
                    .copied()
                    .filter(|t| (0.0..=1.0).contains(t)),
            );
            for (t, w) in nodes_with_kinks(cells, &all) {
                acc.add(w * integrand(&[t]));
            }
        }
        2 => {
            let nodes = composite_nodes(cells);
            let mut x = [0.0; 2];
            for &(s, ws) in &nodes {
                x[0] = s;
                let mut row = 0.0;
                for &(t, wt) in &nodes {
                    x[1] = t;
                    row += wt * integrand(&x);
                }
                acc.add(ws * row);
            }
        }
        3 => {
            let nodes = composite_nodes(cells);
            let mut x = [0.0; 3];
            for &(r, wr) in &nodes {
                x[0] = r;
                let mut plane = 0.0;
                for &(s, ws) in &nodes {
                    x[1] = s;
                    let mut row = 0.0;
                    for &(t, wt) in &nodes {
                        x[2] = t;
                        row += wt * integrand(&x);
                    }
                    plane += ws * row;
                }
                acc.add(wr * plane);
            }
        }
        d => return Err(Error::UnsupportedDimension(d)),
    }
    Ok(acc.value())
}

/// Approximates `⟨target, g⟩` for a pointwise-evaluable target on `[0,1]^d`.
pub fn project_oracle(
    target: &dyn Fn(&[f64]) -> f64,
    g: &BasisFunction,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if let Some(d) = g.dim() {
        if d != spec.dimension {
            return Err(Error::DimensionMismatch {
                expected: spec.dimension,
                got: d,
            });
        }
    }
    let kinks = if spec.dimension == 1 {
        univariate_kinks(&[g])?
    } else {
        Vec::new()
    };
    integrate(spec, &kinks, &mut |x| target(x) * g.value_at(x))
}

/// `‖target - Σ cᵢ φᵢ‖₂` on `[0,1]^d` by quadrature.
pub fn l2_distance(
    target: &dyn Fn(&[f64]) -> f64,
    combination: &[(f64, BasisFunction)],
    spec: &QuadratureSpec,
) -> Result<f64> {
    for (_, f) in combination {
        if let Some(d) = f.dim() {
            if d != spec.dimension {
                return Err(Error::DimensionMismatch {
                    expected: spec.dimension,
                    got: d,
                });
            }
        }
    }
    let kinks = if spec.dimension == 1 {
        let fs: Vec<&BasisFunction> = combination.iter().map(|(_, f)| f).collect();
        univariate_kinks(&fs)?
    } else {
        Vec::new()
    };
    let sq = integrate(spec, &kinks, &mut |x| {
        let approx: f64 = combination.iter().map(|(c, f)| c * f.value_at(x)).sum();
        let r = target(x) - approx;
        r * r
    })?;
    Ok(sq.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::RidgeIndex;

    fn ridge_c(a: &[i64]) -> BasisFunction {
        BasisFunction::cos(RidgeIndex::new(a.to_vec()).unwrap())
    }

    fn ridge_s(a: &[i64]) -> BasisFunction {
        BasisFunction::sin(RidgeIndex::new(a.to_vec()).unwrap())
    }

    #[test]
    fn exact_1d_examples() {
        let c1 = BasisFunction::c(1).unwrap();
        let s1 = BasisFunction::s(1).unwrap();
        assert!((inner_product_oracle_1d(&c1, &c1).unwrap() - 1.0 / 3.0).abs() < 1e-13);
        assert!(inner_product_oracle_1d(&c1, &s1).unwrap().abs() < 1e-13);
        let one = BasisFunction::constant();
        assert_eq!(inner_product_oracle_1d(&one, &one).unwrap(), 1.0);
        assert!(matches!(
            inner_product_oracle_1d(&ridge_c(&[1, 1]), &c1),
            Err(Error::UnsupportedDimension(2))
        ));
    }

    #[test]
    fn oracle_is_symmetric_bitwise() {
        for i in 1..=12 {
            for j in 1..=12 {
                let f = BasisFunction::c(i).unwrap();
                let g = BasisFunction::s(j).unwrap().normalized();
                assert_eq!(
                    inner_product_oracle_1d(&f, &g).unwrap().to_bits(),
                    inner_product_oracle_1d(&g, &f).unwrap().to_bits()
                );
            }
        }
    }

    #[test]
    fn nd_examples() {
        let spec = QuadratureSpec::for_pair(2, 9).unwrap();
        let v = inner_product_oracle_nd(&ridge_c(&[1, 2]), &ridge_c(&[3, 6]), &spec).unwrap();
        assert!((v - 1.0 / 27.0).abs() < 1e-5, "{v}");
        let spec = QuadratureSpec::for_pair(2, 1).unwrap();
        let v = inner_product_oracle_nd(&ridge_c(&[1, 0]), &ridge_c(&[0, 1]), &spec).unwrap();
        assert!(v.abs() < 1e-5);
        let spec = QuadratureSpec::for_pair(2, 2).unwrap();
        let v = inner_product_oracle_nd(&ridge_s(&[1, 1]), &ridge_s(&[1, 1]), &spec).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn nd_rejects_bad_requests() {
        let spec = QuadratureSpec::for_pair(2, 4).unwrap();
        assert!(matches!(
            inner_product_oracle_nd(&ridge_c(&[1, 1]), &ridge_c(&[1, 1, 1]), &spec),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            QuadratureSpec::for_pair(4, 1),
            Err(Error::UnsupportedDimension(4))
        ));
        assert!(matches!(
            inner_product_oracle_nd(&ridge_c(&[30, 3]), &ridge_c(&[1, 1]), &spec),
            Err(Error::ToleranceUnreachable(_))
        ));
    }

    #[test]
    fn exact_on_handcrafted_affine_products() {
        // ∫₀¹ (1-4x)(4x) on [0,1/4] etc: C_1 * S_1 restricted pieces sum to 0,
        // and C_1 * const integrates to 0; check against hand-derived values.
        let c2 = BasisFunction::c(2).unwrap();
        let c1 = BasisFunction::c(1).unwrap();
        // C_1 C_2: different power of two, zero
        assert!(inner_product_oracle_1d(&c1, &c2).unwrap().abs() < 1e-15);
        // ∫ C_1² = 2 ∫₀^{1/2} (1-4x)² dx = 2 * (1/12) * 2 = 1/3
        assert!((inner_product_oracle_1d(&c1, &c1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // ∫ S_3 S_3 = 1/3
        let s3 = BasisFunction::s(3).unwrap();
        assert!((inner_product_oracle_1d(&s3, &s3).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn embedding_reproduces_1d_values() {
        for (k, j) in [(1, 3), (2, 6), (3, 5), (1, 1), (4, 4)] {
            let one_d = inner_product_oracle_1d(
                &BasisFunction::c(k).unwrap(),
                &BasisFunction::c(j).unwrap(),
            )
            .unwrap();
            let spec = QuadratureSpec::for_pair(2, k.max(j) as u64).unwrap();
            let two_d =
                inner_product_oracle_nd(&ridge_c(&[k, 0]), &ridge_c(&[j, 0]), &spec).unwrap();
            assert!((one_d - two_d).abs() < 1e-5);
            let one_d = inner_product_oracle_1d(
                &BasisFunction::s(k).unwrap(),
                &BasisFunction::s(j).unwrap(),
            )
            .unwrap();
            let two_d =
                inner_product_oracle_nd(&ridge_s(&[k, 0]), &ridge_s(&[j, 0]), &spec).unwrap();
            assert!((one_d - two_d).abs() < 1e-5);
        }
    }

    #[test]
    fn projection_examples() {
        let spec = QuadratureSpec::for_projection(1, 1).unwrap();
        let mu = 96f64.sqrt() / (std::f64::consts::PI * std::f64::consts::PI);
        let c1 = |x: &[f64]| 2f64.sqrt() * (2.0 * std::f64::consts::PI * x[0]).cos();
        let v = project_oracle(&c1, &BasisFunction::c(1).unwrap().normalized(), &spec).unwrap();
        assert!((v - mu).abs() < 1e-8, "{v} vs {mu}");
        for k in 1..=16 {
            let v = project_oracle(&|_| 1.0, &BasisFunction::c(k).unwrap(), &spec).unwrap();
            assert!(v.abs() < 1e-13);
        }
        let s3 = BasisFunction::s(3).unwrap();
        let v = project_oracle(&|x| s3.value_at(x), &s3, &spec).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn l2_distance_of_member_is_zero() {
        let spec = QuadratureSpec::for_projection(1, 5).unwrap();
        let f = BasisFunction::c(5).unwrap().normalized();
        let target = |x: &[f64]| f.value_at(x);
        let d = l2_distance(&target, &[(1.0, f.clone())], &spec).unwrap();
        assert!(d < 1e-12);
        let spec = spec.with_target_kinks(crate::basis::breakpoints(&f).unwrap());
        let d = l2_distance(&target, &[], &spec).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }
}
