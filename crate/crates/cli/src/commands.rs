use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rieszpl::basis::breakpoints;
use rieszpl::gram::{fmt17, matrix_csv, spectrum_csv};
use rieszpl::oracle::l2_distance;
use rieszpl::{
    assemble_gram, bound_report, build_c_univariate, build_s_univariate, canonical_system,
    decomposition_coefficients, deserialize, euler_product_partial, extreme_eigenvalues,
    gershgorin_radii, inner_product_analytic, inner_product_oracle, project_l2,
    riesz_quadratic_form, serialize, stack_combination, AffineLayer, BasisFunction, Parity,
    QuadratureSpec, Rational, ReluNetwork, Shape,
};

use crate::spec::{parse_function, parse_index, parse_point, parse_terms, Terms};

const MAX_N: u32 = 1 << 14;

/// Why a command did not succeed; the variant fixes the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Exit code 1.
    Verification(String),
    /// Exit code 2.
    Usage(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Usage(m) => m,
        }
    }
}

impl From<rieszpl::Error> for Failure {
    fn from(e: rieszpl::Error) -> Self {
        use rieszpl::Error::*;
        match e {
            ToleranceUnreachable(_) | NoConvergence { .. } | NotPositiveDefinite => {
                Failure::Verification(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(message.into())
}

pub type Outcome = Result<(), Failure>;

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn check_dim(d: usize) -> Outcome {
    if d == 0 {
        return Err(usage("--dim must be at least 1"));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Outcome {
    if tol.is_nan() || tol <= 0.0 || tol.is_infinite() {
        return Err(usage("--tol must be positive"));
    }
    Ok(())
}

/// The truncation parameter: `--n` in one dimension, `--max-norm` above.
fn truncation(d: usize, n: u32, max_norm: u32) -> Result<u32, Failure> {
    let t = if d == 1 { n } else { max_norm };
    if t == 0 {
        return Err(usage("truncation must be at least 1"));
    }
    let size = (2 * t as u64 + 1).checked_pow(d as u32).unwrap_or(u64::MAX);
    if t > MAX_N || size > 2 * MAX_N as u64 + 1 {
        return Err(usage(format!(
            "system of dimension {d} and truncation {t} is above the dense limit (N <= {MAX_N})"
        )));
    }
    Ok(t)
}

/// Normalized canonical system, or the raw cosine-like block.
fn system(d: usize, t: u32, raw: bool) -> Vec<BasisFunction> {
    let all = canonical_system(d, t, !raw);
    if raw {
        all.into_iter()
            .filter(|f| matches!(f.shape, Shape::CosLike(_)))
            .collect()
    } else {
        all
    }
}

pub struct SpectrumConfig {
    pub dim: usize,
    pub n: u32,
    pub max_norm: u32,
    pub raw: bool,
    pub tol: f64,
    pub rayleigh: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub matrix: Option<PathBuf>,
}

pub fn gram_spectrum(c: &SpectrumConfig) -> Outcome {
    check_dim(c.dim)?;
    check_tol(c.tol)?;
    let top = truncation(c.dim, c.n, c.max_norm)?;
    let ladder: Vec<u32> = if c.dim == 1 {
        let mut l: Vec<u32> = (0..).map(|k| 1u32 << k).take_while(|&v| v < top).collect();
        l.push(top);
        l
    } else {
        (1..=top).collect()
    };
    let (lo, hi) = if c.raw { (1.0 / 6.0, 0.5) } else { (0.5, 1.5) };
    let variant = if c.raw { "raw-cos-block" } else { "normalized" };
    let mut rows = Vec::with_capacity(ladder.len());
    let mut violations = Vec::new();
    let mut last = None;
    for &t in &ladder {
        let g = assemble_gram(&system(c.dim, t, c.raw), !c.raw)?;
        let s = extreme_eigenvalues(&g, c.tol)?;
        if s.lambda_min < lo - 1e-8 || s.lambda_max > hi + 1e-8 {
            violations.push(format!("N={t}: [{}, {}]", s.lambda_min, s.lambda_max));
        }
        rows.push((t as u64, s));
        last = Some(g);
    }
    let g = last.expect("non-empty ladder");
    let comment = format!(
        "rieszpl gram-spectrum dim={} {}={top} variant={variant} tol={:e}",
        c.dim,
        if c.dim == 1 { "n" } else { "max-norm" },
        c.tol
    );
    emit(c.out.as_deref(), &spectrum_csv(&comment, &rows))?;
    if let Some(path) = &c.matrix {
        emit(Some(path), &matrix_csv(&comment, &g))?;
    }
    if c.rayleigh > 0 {
        let s = &rows.last().expect("non-empty").1;
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        let (mut qmin, mut qmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..c.rayleigh {
            let v: Vec<f64> = (0..g.size()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let q = riesz_quadratic_form(&g, &v)?;
            qmin = qmin.min(q);
            qmax = qmax.max(q);
        }
        eprintln!(
            "rayleigh: {} quotients in [{}, {}] (seed {})",
            c.rayleigh,
            fmt17(qmin),
            fmt17(qmax),
            c.seed
        );
        let slack = 1e-12;
        if qmin < s.lambda_min - slack || qmax > s.lambda_max + slack {
            violations.push(format!(
                "Rayleigh quotients [{qmin}, {qmax}] leave [{}, {}]",
                s.lambda_min, s.lambda_max
            ));
        }
    }
    if !violations.is_empty() {
        return Err(Failure::Verification(format!(
            "spectrum outside [{lo}, {hi}]: {}",
            violations.join("; ")
        )));
    }
    Ok(())
}

fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn inner_product(f: &str, g: &str, normalized: bool) -> Outcome {
    let (mut f, mut g) = (
        parse_function(f).map_err(usage)?,
        parse_function(g).map_err(usage)?,
    );
    if normalized {
        f = f.normalized();
        g = g.normalized();
    }
    let mut exact = inner_product_analytic(&f, &g)?;
    if normalized && !f.is_constant() && !g.is_constant() {
        exact *= Rational::from_integer(3);
    }
    let analytic = rational_to_f64(&exact);
    println!("f: {f}");
    println!("g: {g}");
    println!("analytic: {exact}");
    println!("analytic_decimal: {}", fmt17(analytic));
    let oracle = inner_product_oracle(&f, &g)?;
    println!("oracle: {}", fmt17(oracle));
    println!("delta: {:.3e}", (oracle - analytic).abs());
    Ok(())
}

pub fn gershgorin(dim: usize, n: u32, max_norm: u32, out: Option<&Path>) -> Outcome {
    check_dim(dim)?;
    let t = truncation(dim, n, max_norm)?;
    let sys = canonical_system(dim, t, true);
    let g = assemble_gram(&sys, true)?;
    let report = gershgorin_radii(&g);
    let key = if dim == 1 { "n" } else { "max-norm" };
    let comment = format!("rieszpl gershgorin dim={dim} {key}={t}");
    if let Some(path) = out {
        let mut csv = format!("# {comment}\nrow,function,center,radius\n");
        for (i, (f, disc)) in sys.iter().zip(&report.discs).enumerate() {
            let _ = writeln!(csv, "{i},{f},{},{}", fmt17(disc.center), fmt17(disc.radius));
        }
        emit(Some(path), &csv)?;
    }
    let max_radius = report.max_radius();
    let limit = 0.5 + 1e-12;
    let pass = max_radius <= limit;
    println!("# {comment}");
    println!("size: {}", g.size());
    println!("max_radius: {}", fmt17(max_radius));
    println!("hull: [{}, {}]", fmt17(report.hull.0), fmt17(report.hull.1));
    println!("certified: {}", if pass { "yes" } else { "no" });
    if !pass {
        return Err(Failure::Verification(format!(
            "max radius {max_radius} above 1/2 + 1e-12"
        )));
    }
    Ok(())
}

/// A single univariate term compiles to its own network, whose depth is
/// smaller than the stacked formula; anything else goes through the stack.
fn compile(terms: &Terms) -> rieszpl::Result<ReluNetwork> {
    if terms.len() == 1 && terms.dim() == 1 {
        let (coef, net) = match (terms.cos.first(), terms.sin.first()) {
            (Some((a, alpha)), _) => (*a, build_c_univariate(alpha.as_slice()[0] as u64)?),
            (_, Some((b, beta))) => (*b, build_s_univariate(beta.as_slice()[0] as u64)?),
            _ => unreachable!("one term"),
        };
        return scale_output(&net, coef);
    }
    stack_combination(&terms.cos, &terms.sin)
}

fn scale_output(net: &ReluNetwork, coef: f64) -> rieszpl::Result<ReluNetwork> {
    let mut layers = net.layers().to_vec();
    let last = layers.pop().expect("output layer");
    layers.push(AffineLayer::new(
        last.rows(),
        last.cols(),
        last.weights().iter().map(|w| coef * w).collect(),
        last.bias().iter().map(|b| coef * b).collect(),
    )?);
    ReluNetwork::new(net.input_dim(), net.width(), layers)
}

fn ceil_log2(n: u64) -> usize {
    (64 - (n - 1).leading_zeros()) as usize
}

fn expected_depth(terms: &Terms) -> usize {
    let univariate = terms.len() == 1 && terms.dim() == 1;
    let c = terms
        .cos
        .iter()
        .map(|(_, a)| ceil_log2(a.l1_norm()) + if univariate { 1 } else { 2 });
    let s = terms
        .sin
        .iter()
        .map(|(_, b)| ceil_log2(b.l1_norm()) + if univariate { 2 } else { 3 });
    c.chain(s).max().unwrap_or(0)
}

fn weight_bound(terms: &Terms) -> f64 {
    terms
        .cos
        .iter()
        .chain(&terms.sin)
        .map(|(c, _)| 8.0 * c.abs())
        .fold(8.0, f64::max)
}

pub fn net_build(terms: &[String], out: Option<&Path>) -> Outcome {
    let terms = parse_terms(terms).map_err(usage)?;
    let net = compile(&terms)?;
    emit(out, &serialize(&net))?;
    let r = bound_report(&net);
    eprintln!(
        "built network: input_dim={} width={} depth={} max|weight|={} max|bias|={}",
        net.input_dim(),
        r.width,
        r.depth,
        r.max_abs_weight,
        r.max_abs_bias
    );
    Ok(())
}

fn load_network(path: &Path) -> Result<ReluNetwork, Failure> {
    deserialize(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn net_eval(path: &Path, points: &[String]) -> Outcome {
    let net = load_network(path)?;
    let d = net.input_dim();
    let mut out = String::new();
    let header: Vec<String> = (1..=d)
        .map(|i| format!("x{i}"))
        .chain(["value".into()])
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for p in points {
        let x = parse_point(p).map_err(usage)?;
        let y = net.evaluate(&x)?;
        let cols: Vec<String> = x.iter().map(|v| v.to_string()).chain([fmt17(y)]).collect();
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    emit(None, &out)
}

pub struct CheckConfig {
    pub grid: usize,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

pub fn net_check(path: &Path, terms: &[String], c: &CheckConfig) -> Outcome {
    check_tol(c.tol)?;
    let net = load_network(path)?;
    let terms = parse_terms(terms).map_err(usage)?;
    let d = terms.dim();
    if net.input_dim() != d {
        return Err(Failure::Verification(format!(
            "input dimension {} but the terms live in dimension {d}",
            net.input_dim()
        )));
    }
    let r = bound_report(&net);
    let mut failures = Vec::new();
    let mut line = |name: &str, ok: bool, detail: String| {
        println!("{name}: {detail} {}", if ok { "ok" } else { "FAIL" });
        if !ok {
            failures.push(name.to_string());
        }
    };
    let width = 2 * terms.len();
    line(
        "width",
        r.width == width,
        format!("{} (expected {width})", r.width),
    );
    let depth = expected_depth(&terms);
    line(
        "depth",
        r.depth == depth,
        format!("{} (expected {depth})", r.depth),
    );
    let bound = weight_bound(&terms);
    line(
        "max_abs_weight",
        r.max_abs_weight <= bound,
        format!("{} (bound {bound})", r.max_abs_weight),
    );
    let bias_bound = bound.max(
        terms
            .cos
            .iter()
            .chain(&terms.sin)
            .map(|(c, _)| c.abs())
            .sum(),
    );
    line(
        "max_abs_bias",
        r.max_abs_bias <= bias_bound,
        format!("{} (bound {bias_bound})", r.max_abs_bias),
    );

    let points: Vec<Vec<f64>> = if d == 1 {
        let n = c.grid.max(2);
        (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        (0..c.samples.max(1))
            .map(|_| (0..d).map(|_| rng.gen_range(0.0..=1.0)).collect())
            .collect()
    };
    let mut worst = 0.0f64;
    let mut first_bad = None;
    for x in &points {
        let dev = (net.evaluate(x)? - terms.evaluate(x)).abs();
        if (dev.is_nan() || dev > c.tol) && first_bad.is_none() {
            first_bad = Some((x.clone(), dev));
        }
        worst = if dev.is_nan() {
            f64::NAN
        } else {
            worst.max(dev)
        };
    }
    line(
        "agreement",
        first_bad.is_none(),
        format!(
            "{} points, max deviation {worst:.3e} (tol {:e})",
            points.len(),
            c.tol
        ),
    );
    if let Some((x, dev)) = &first_bad {
        println!("first offending point: {x:?} deviation {dev:.3e}");
    }
    if failures.is_empty() {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        Err(Failure::Verification(format!(
            "check failed: {} (max deviation {worst:.3e})",
            failures.join(", ")
        )))
    }
}

pub fn decomp(target: Parity, truncations: &[u64], out: Option<&Path>) -> Outcome {
    if truncations.is_empty() || truncations.contains(&0) {
        return Err(usage("truncations must be positive"));
    }
    let (name, f): (&str, fn(f64) -> f64) = match target {
        Parity::CosLike => ("cos", f64::cos),
        Parity::SinLike => ("sin", f64::sin),
    };
    let tau = 2.0 * std::f64::consts::PI;
    let exact = move |x: &[f64]| std::f64::consts::SQRT_2 * f(tau * x[0]);
    let list: Vec<String> = truncations.iter().map(u64::to_string).collect();
    let mut csv = format!(
        "# rieszpl decomp target={name} truncations={}\nL,terms,l2_error\n",
        list.join(",")
    );
    for &l in truncations {
        let series = decomposition_coefficients(target, l)?;
        let combination = series.combination();
        let spec = QuadratureSpec::for_projection(1, l)?;
        let err = l2_distance(&exact, &combination, &spec)?;
        let _ = writeln!(csv, "{l},{},{}", combination.len(), fmt17(err));
    }
    emit(out, &csv)
}

pub fn euler(bound: u64, out: Option<&Path>) -> Outcome {
    if !(2..=1_000_000_000).contains(&bound) {
        return Err(usage("prime bound must lie in [2, 10^9]"));
    }
    let mut ladder: Vec<u64> = (1..)
        .map(|k| 10u64.pow(k))
        .take_while(|&b| b < bound)
        .collect();
    ladder.push(bound);
    let mut csv = format!(
        "# rieszpl euler n={bound}\nprime_bound,primes,all_primes,distance_to_5/2,odd_primes,distance_to_3/2\n"
    );
    for b in ladder {
        let all = euler_product_partial(b, true)?;
        let odd = euler_product_partial(b, false)?;
        let _ = writeln!(
            csv,
            "{b},{},{},{},{},{}",
            all.primes_used,
            fmt17(all.value),
            fmt17((all.value - 2.5) + all.correction),
            fmt17(odd.value),
            fmt17((odd.value - 1.5) + odd.correction)
        );
    }
    emit(out, &csv)
}

type Pointwise = Box<dyn Fn(&[f64]) -> f64>;

/// Target of a projection together with its kinks (one dimension only).
struct Target {
    eval: Pointwise,
    kinks: Vec<f64>,
    max_l1: u64,
    dim: Option<usize>,
}

fn parse_target(text: &str) -> Result<Target, Failure> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| usage(format!("bad target {text:?}")))?;
    let tau = 2.0 * std::f64::consts::PI;
    match kind {
        "cos" | "sin" => {
            let k = parse_index(rest).map_err(usage)?;
            let trig: fn(f64) -> f64 = if kind == "cos" { f64::cos } else { f64::sin };
            let (l1, dim) = (k.l1_norm(), k.dim());
            Ok(Target {
                eval: Box::new(move |x| std::f64::consts::SQRT_2 * trig(tau * k.dot(x))),
                kinks: Vec::new(),
                max_l1: l1,
                dim: Some(dim),
            })
        }
        "member" => {
            let f = parse_function(rest).map_err(usage)?.normalized();
            let kinks = if f.dim() == Some(1) {
                breakpoints(&f)?
            } else {
                Vec::new()
            };
            let (l1, dim) = (f.index().map_or(0, |a| a.l1_norm()), f.dim());
            let basis = f.clone();
            Ok(Target {
                eval: Box::new(move |x| rieszpl::eval_ridge(&basis, x).unwrap_or(f64::NAN)),
                kinks,
                max_l1: l1,
                dim,
            })
        }
        "samples" => {
            let samples = read_samples(Path::new(rest))?;
            let kinks: Vec<f64> = samples.iter().map(|s| s.0).collect();
            Ok(Target {
                eval: Box::new(move |x| interpolate(&samples, x[0])),
                kinks,
                max_l1: 0,
                dim: Some(1),
            })
        }
        _ => Err(usage(format!(
            "unknown target kind {kind:?} (expected cos, sin, member or samples)"
        ))),
    }
}

/// `x value` pairs, one per line; `#` starts a comment.
fn read_samples(path: &Path) -> Result<Vec<(f64, f64)>, Failure> {
    let text = read(path)?;
    let mut samples = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let parsed: Option<(f64, f64)> = match fields.as_slice() {
            [x, y] => x.parse().ok().zip(y.parse().ok()),
            _ => None,
        };
        match parsed {
            Some((x, y)) if x.is_finite() && y.is_finite() && (0.0..=1.0).contains(&x) => {
                samples.push((x, y))
            }
            _ => {
                return Err(usage(format!(
                    "{}:{}: expected `x value` with x in [0, 1]",
                    path.display(),
                    n + 1
                )))
            }
        }
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    if samples.len() < 2 || samples.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(usage(format!(
            "{}: need at least two samples with distinct x",
            path.display()
        )));
    }
    Ok(samples)
}

/// Piecewise-linear interpolation, constant beyond the end samples.
fn interpolate(samples: &[(f64, f64)], x: f64) -> f64 {
    let i = samples.partition_point(|s| s.0 <= x);
    if i == 0 {
        return samples[0].1;
    }
    if i == samples.len() {
        return samples[i - 1].1;
    }
    let ((x0, y0), (x1, y1)) = (samples[i - 1], samples[i]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

pub fn project(target: &str, dim: usize, n: u32, max_norm: u32, out: Option<&Path>) -> Outcome {
    check_dim(dim)?;
    let t = truncation(dim, n, max_norm)?;
    let target_spec = target;
    let target = parse_target(target)?;
    if let Some(td) = target.dim {
        if td != dim {
            return Err(usage(format!("target has dimension {td}, --dim is {dim}")));
        }
    }
    let system = canonical_system(dim, t, true);
    let max_l1 = system
        .iter()
        .filter_map(|f| f.index().map(|a| a.l1_norm()))
        .max()
        .unwrap_or(1)
        .max(target.max_l1);
    let spec = QuadratureSpec::for_projection(dim, max_l1)?.with_target_kinks(target.kinks);
    let p = project_l2(&*target.eval, &system, &spec)?;
    let key = if dim == 1 { "n" } else { "max-norm" };
    let comment = format!("rieszpl project target={target_spec} dim={dim} {key}={t}");
    if let Some(path) = out {
        let mut csv = format!("# {comment}\nfunction,coefficient\n");
        for (f, c) in system.iter().zip(&p.coefficients) {
            let _ = writeln!(csv, "{f},{}", fmt17(*c));
        }
        emit(Some(path), &csv)?;
    }
    let mut order: Vec<usize> = (0..system.len()).collect();
    order.sort_by(|&a, &b| p.coefficients[b].abs().total_cmp(&p.coefficients[a].abs()));
    println!("# {comment}");
    println!("size: {}", system.len());
    println!("l2_error: {}", fmt17(p.l2_error));
    println!("largest coefficients:");
    for &i in order.iter().take(8) {
        println!("  {},{}", system[i], fmt17(p.coefficients[i]));
    }
    Ok(())
}
