//! Feed-forward ReLU networks and exact constructions of the system.
//!
//! A network of depth `L` is `L + 1` affine layers; ReLU follows every layer
//! except the last. Layer 0 maps `ℝ^d → ℝ^W`, the middle layers `ℝ^W → ℝ^W`
//! and the last `ℝ^W → ℝ`.
//!
//! The constructions rest on the hat `H(x) = 2 ReLU(x) - 4 ReLU(x - 1/2)`,
//! whose `m`-fold composition is a sawtooth on `[0,1]`, and on
//! `C(H^{∘m}(x)) = C(2^m x)` with `C = 1 - 2H`.

use std::fmt::Write as _;

use crate::basis::RidgeIndex;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AffineLayer {
    rows: usize,
    cols: usize,
    /// Row-major, `rows × cols`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl AffineLayer {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("empty affine layer".into()));
        }
        if weights.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: weights.len(),
            });
        }
        if bias.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: bias.len(),
            });
        }
        if let Some(&v) = weights.iter().chain(&bias).find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(v));
        }
        Ok(AffineLayer {
            rows,
            cols,
            weights,
            bias,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            weights[i * n + i] = 1.0;
        }
        AffineLayer {
            rows: n,
            cols: n,
            weights,
            bias: vec![0.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weight(&self, r: usize, c: usize) -> f64 {
        self.weights[r * self.cols + c]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for r in 0..self.rows {
            let row = &self.weights[r * self.cols..(r + 1) * self.cols];
            let mut acc = self.bias[r];
            for (w, v) in row.iter().zip(x) {
                acc += w * v;
            }
            out.push(acc);
        }
    }

    /// `self ∘ other`.
    fn after(&self, other: &AffineLayer) -> AffineLayer {
        let (rows, inner, cols) = (self.rows, self.cols, other.cols);
        let mut weights = vec![0.0; rows * cols];
        let mut bias = self.bias.clone();
        for r in 0..rows {
            for k in 0..inner {
                let a = self.weight(r, k);
                for c in 0..cols {
                    weights[r * cols + c] += a * other.weight(k, c);
                }
                bias[r] += a * other.bias[k];
            }
        }
        AffineLayer {
            rows,
            cols,
            weights,
            bias,
        }
    }

    fn scaled(&self, factor: f64, shift: f64) -> AffineLayer {
        AffineLayer {
            rows: self.rows,
            cols: self.cols,
            weights: self.weights.iter().map(|w| w * factor).collect(),
            bias: self.bias.iter().map(|b| b * factor + shift).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReluNetwork {
    input_dim: usize,
    width: usize,
    layers: Vec<AffineLayer>,
}

impl ReluNetwork {
    /// Checks the layer shapes against input dimension `input_dim` and width `width`.
    pub fn new(input_dim: usize, width: usize, layers: Vec<AffineLayer>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidArgument(
                "a network needs at least two affine layers".into(),
            ));
        }
        let last = layers.len() - 1;
        for (i, layer) in layers.iter().enumerate() {
            let cols = if i == 0 { input_dim } else { width };
            let rows = if i == last { 1 } else { width };
            if layer.cols != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: layer.cols,
                });
            }
            if layer.rows != rows {
                return Err(Error::WidthMismatch(rows, layer.rows));
            }
        }
        Ok(ReluNetwork {
            input_dim,
            width,
            layers,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layers(&self) -> &[AffineLayer] {
        &self.layers
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let mut cur = x.to_vec();
        let mut next = Vec::with_capacity(self.width);
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.apply(&cur, &mut next);
            if i != last {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur[0])
    }
}

fn layer(rows: usize, cols: usize, weights: &[f64], bias: &[f64]) -> AffineLayer {
    AffineLayer::new(rows, cols, weights.to_vec(), bias.to_vec()).expect("static shape")
}

/// `H(x) = [2 -4] ReLU([1; 1] x + [0; -1/2])`.
pub fn hat_network() -> ReluNetwork {
    ReluNetwork {
        input_dim: 1,
        width: 2,
        layers: vec![
            layer(2, 1, &[1.0, 1.0], &[0.0, -0.5]),
            layer(1, 2, &[2.0, -4.0], &[0.0]),
        ],
    }
}

/// `id(x) = [1 -1] ReLU([1; -1] x)`.
pub fn identity_network() -> ReluNetwork {
    ReluNetwork {
        input_dim: 1,
        width: 2,
        layers: vec![
            layer(2, 1, &[1.0, -1.0], &[0.0, 0.0]),
            layer(1, 2, &[1.0, -1.0], &[0.0]),
        ],
    }
}

/// `nets[k-1] ∘ … ∘ nets[0]`; each junction merges two affine maps, so the
/// depths add up.
pub fn compose(nets: &[ReluNetwork]) -> Result<ReluNetwork> {
    let first = nets
        .first()
        .ok_or_else(|| Error::InvalidArgument("nothing to compose".into()))?;
    let width = first.width;
    let mut layers = first.layers.clone();
    for net in &nets[1..] {
        if net.width != width {
            return Err(Error::WidthMismatch(width, net.width));
        }
        if net.input_dim != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: net.input_dim,
            });
        }
        let tail = layers.pop().expect("non-empty");
        layers.push(net.layers[0].after(&tail));
        layers.extend(net.layers[1..].iter().cloned());
    }
    ReluNetwork::new(first.input_dim, width, layers)
}

/// Same function, depth exactly `target_depth`: identity layers are inserted
/// before the output layer, where activations are already nonnegative.
pub fn pad_depth(net: &ReluNetwork, target_depth: usize) -> Result<ReluNetwork> {
    if target_depth < net.depth() {
        return Err(Error::InvalidArgument(format!(
            "cannot pad depth {} down to {target_depth}",
            net.depth()
        )));
    }
    let mut layers = net.layers.clone();
    let output = layers.pop().expect("non-empty");
    for _ in net.depth()..target_depth {
        layers.push(AffineLayer::identity(net.width));
    }
    layers.push(output);
    ReluNetwork::new(net.input_dim, net.width, layers)
}

fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// `C_{2^hats/2}(w·x + c)` for an affine pre-map `w·x + c` taking the domain
/// into `[0,1]`: `hats` compositions of `H` with `1 - 2H` fused into the output.
fn sawtooth_cos(input: &[f64], shift: f64, hats: u32) -> ReluNetwork {
    let hat = hat_network();
    let mut chain = vec![hat.clone(); hats as usize];
    let d = input.len();
    let mut weights = Vec::with_capacity(2 * d);
    weights.extend_from_slice(input);
    weights.extend_from_slice(input);
    chain[0].input_dim = d;
    chain[0].layers[0] = AffineLayer {
        rows: 2,
        cols: d,
        weights,
        bias: vec![shift, shift - 0.5],
    };
    let mut net = compose(&chain).expect("uniform width");
    let out = net.layers.pop().expect("non-empty");
    net.layers.push(out.scaled(-2.0, 1.0));
    net
}

fn nonzero(j: u64) -> Result<()> {
    if j == 0 {
        Err(Error::ZeroVector)
    } else {
        Ok(())
    }
}

/// `C_j` on `[0,1]`: width 2, depth `⌈log₂ j⌉ + 1`.
pub fn build_c_univariate(j: u64) -> Result<ReluNetwork> {
    nonzero(j)?;
    let m = ceil_log2(j);
    Ok(sawtooth_cos(&[j as f64 / (1u64 << m) as f64], 0.0, m + 1))
}

/// `S_j(x) = C_{2^{m+1}}(j 2^{-m-1} x + 3·2^{-m-3})` on `[0,1]`: width 2,
/// depth `⌈log₂ j⌉ + 2`.
pub fn build_s_univariate(j: u64) -> Result<ReluNetwork> {
    nonzero(j)?;
    let m = ceil_log2(j);
    let scale = (1u64 << (m + 1)) as f64;
    Ok(sawtooth_cos(
        &[j as f64 / scale],
        3.0 / (4.0 * scale),
        m + 2,
    ))
}

/// `C(α·x) = C_{2^{m+1}}((2^{-m} α·x + 1)/2)` on `[0,1]^d` with
/// `m = ⌈log₂‖α‖₁⌉`: width 2, depth `m + 2`.
pub fn build_c_ridge(alpha: &RidgeIndex) -> Result<ReluNetwork> {
    let m = ceil_log2(alpha.l1_norm());
    let scale = (1u64 << (m + 1)) as f64;
    let w: Vec<f64> = alpha.as_slice().iter().map(|&a| a as f64 / scale).collect();
    Ok(sawtooth_cos(&w, 0.5, m + 2))
}

/// `S(α·x) = C_{2^{m+2}}((α·x + 2^m + 3/4) / 2^{m+2})`: width 2, depth `m + 3`.
pub fn build_s_ridge(alpha: &RidgeIndex) -> Result<ReluNetwork> {
    let m = ceil_log2(alpha.l1_norm());
    let scale = (1u64 << (m + 2)) as f64;
    let w: Vec<f64> = alpha.as_slice().iter().map(|&a| a as f64 / scale).collect();
    let shift = ((1u64 << m) as f64 + 0.75) / scale;
    Ok(sawtooth_cos(&w, shift, m + 3))
}

/// `Σ aᵢ C(αᵢ·x) + Σ bⱼ S(βⱼ·x)` as one network of width `2(k+l)` and depth
/// `max(⌈log₂‖αᵢ‖₁⌉ + 2, ⌈log₂‖βⱼ‖₁⌉ + 3)`.
pub fn stack_combination(
    c_terms: &[(f64, RidgeIndex)],
    s_terms: &[(f64, RidgeIndex)],
) -> Result<ReluNetwork> {
    let all = c_terms.iter().chain(s_terms);
    let d = all
        .clone()
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty combination".into()))?
        .1
        .dim();
    for (coef, alpha) in all {
        if alpha.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: alpha.dim(),
            });
        }
        if !coef.is_finite() {
            return Err(Error::NonFinite(*coef));
        }
    }
    let depth_c = c_terms
        .iter()
        .map(|(_, a)| ceil_log2(a.l1_norm()) as usize + 2);
    let depth_s = s_terms
        .iter()
        .map(|(_, b)| ceil_log2(b.l1_norm()) as usize + 3);
    let depth = depth_c.chain(depth_s).max().expect("non-empty");

    let mut blocks = Vec::with_capacity(c_terms.len() + s_terms.len());
    for (a, alpha) in c_terms {
        let net = if d == 1 {
            build_c_univariate(alpha.as_slice()[0] as u64)?
        } else {
            build_c_ridge(alpha)?
        };
        blocks.push((*a, pad_depth(&net, depth)?));
    }
    for (b, beta) in s_terms {
        let net = if d == 1 {
            build_s_univariate(beta.as_slice()[0] as u64)?
        } else {
            build_s_ridge(beta)?
        };
        blocks.push((*b, pad_depth(&net, depth)?));
    }

    let width = 2 * blocks.len();
    let mut layers = Vec::with_capacity(depth + 1);
    let mut first = Vec::with_capacity(width * d);
    let mut first_bias = Vec::with_capacity(width);
    for (_, net) in &blocks {
        first.extend_from_slice(&net.layers[0].weights);
        first_bias.extend_from_slice(&net.layers[0].bias);
    }
    layers.push(AffineLayer::new(width, d, first, first_bias)?);
    for l in 1..depth {
        let mut weights = vec![0.0; width * width];
        let mut bias = Vec::with_capacity(width);
        for (b, (_, net)) in blocks.iter().enumerate() {
            let src = &net.layers[l];
            for r in 0..2 {
                for c in 0..2 {
                    weights[(2 * b + r) * width + 2 * b + c] = src.weight(r, c);
                }
            }
            bias.extend_from_slice(&src.bias);
        }
        layers.push(AffineLayer::new(width, width, weights, bias)?);
    }
    let mut output = Vec::with_capacity(width);
    let mut output_bias = 0.0;
    for (coef, net) in &blocks {
        let src = &net.layers[depth];
        output.extend(src.weights.iter().map(|w| coef * w));
        output_bias += coef * src.bias[0];
    }
    layers.push(AffineLayer::new(1, width, output, vec![output_bias])?);
    ReluNetwork::new(d, width, layers)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub width: usize,
    pub depth: usize,
    pub max_abs_weight: f64,
    pub max_abs_bias: f64,
}

pub fn bound_report(net: &ReluNetwork) -> BoundReport {
    let max_abs = |it: &mut dyn Iterator<Item = &f64>| it.fold(0.0f64, |m, v| m.max(v.abs()));
    BoundReport {
        width: net.width,
        depth: net.depth(),
        max_abs_weight: max_abs(&mut net.layers.iter().flat_map(|l| l.weights.iter())),
        max_abs_bias: max_abs(&mut net.layers.iter().flat_map(|l| l.bias.iter())),
    }
}

/// `max{8|aᵢ|, 8|bⱼ|, 8}`. Bounds every weight of the stacked network; the
/// output bias `Σ aᵢ + Σ bⱼ` stays below it while `k + l <= 8`.
pub fn stack_weight_bound(c_terms: &[(f64, RidgeIndex)], s_terms: &[(f64, RidgeIndex)]) -> f64 {
    c_terms
        .iter()
        .chain(s_terms)
        .map(|(c, _)| 8.0 * c.abs())
        .fold(8.0, f64::max)
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Text form: header, then per layer `layer <i> rows=<r> cols=<c>`, `r` lines
/// of weights and a `bias:` line, blocks separated by blank lines.
pub fn serialize(net: &ReluNetwork) -> String {
    let mut out = format!(
        "relunet v1 input_dim={} width={} depth={}\n",
        net.input_dim,
        net.width,
        net.depth()
    );
    for (i, l) in net.layers.iter().enumerate() {
        let _ = write!(out, "\nlayer {i} rows={} cols={}\n", l.rows, l.cols);
        for r in 0..l.rows {
            let row: Vec<String> = l.weights[r * l.cols..(r + 1) * l.cols]
                .iter()
                .map(|&v| fmt_value(v))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        let bias: Vec<String> = l.bias.iter().map(|&v| fmt_value(v)).collect();
        let _ = writeln!(out, "bias: {}", bias.join(" "));
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate().peekable(),
            last_line: 0,
        }
    }

    /// Next non-blank line with its 1-based number.
    fn next_content(&mut self, what: &str) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last_line = i + 1;
            if !line.trim().is_empty() {
                return Ok((i + 1, line));
            }
        }
        Err(Error::Parse {
            line: self.last_line + 1,
            column: 1,
            message: format!("unexpected end of input: missing {what}"),
        })
    }

    fn has_more(&mut self) -> bool {
        while let Some((_, line)) = self.inner.peek() {
            if line.trim().is_empty() {
                self.inner.next();
            } else {
                return true;
            }
        }
        false
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Tokens of a line with their 1-based start columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn key_value(tok: (usize, &str), key: &str, line: usize) -> Result<usize> {
    let (col, text) = tok;
    let value = text
        .strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| parse_err(line, col, format!("expected `{key}=<n>`, found `{text}`")))?;
    value.parse().map_err(|_| {
        parse_err(
            line,
            col + key.len() + 1,
            format!("invalid integer `{value}` for {key}"),
        )
    })
}

fn numbers(toks: &[(usize, &str)], expected: usize, line: usize, what: &str) -> Result<Vec<f64>> {
    if toks.len() != expected {
        let col = toks
            .get(expected)
            .map_or_else(|| toks.last().map_or(1, |t| t.0 + t.1.len()), |t| t.0);
        return Err(parse_err(
            line,
            col,
            format!("{what}: expected {expected} values, found {}", toks.len()),
        ));
    }
    toks.iter()
        .map(|&(col, t)| {
            let v: f64 = t
                .parse()
                .map_err(|_| parse_err(line, col, format!("invalid number `{t}`")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(line, col, format!("non-finite value `{t}`")))
            }
        })
        .collect()
}

pub fn deserialize(text: &str) -> Result<ReluNetwork> {
    let mut lines = Lines::new(text);
    let (hl, header) = lines.next_content("header")?;
    let toks = tokens(header);
    if toks.len() != 5 || toks[0].1 != "relunet" || toks[1].1 != "v1" {
        return Err(parse_err(
            hl,
            1,
            "expected header `relunet v1 input_dim=<d> width=<W> depth=<L>`",
        ));
    }
    let input_dim = key_value(toks[2], "input_dim", hl)?;
    let width = key_value(toks[3], "width", hl)?;
    let depth = key_value(toks[4], "depth", hl)?;
    if input_dim == 0 || width == 0 || depth == 0 {
        return Err(parse_err(
            hl,
            1,
            "input_dim, width and depth must be positive",
        ));
    }
    let mut layers = Vec::with_capacity(depth + 1);
    for i in 0..=depth {
        let what = format!("layer {i}");
        let (ll, line) = lines.next_content(&what)?;
        let toks = tokens(line);
        if toks.len() != 4 || toks[0].1 != "layer" {
            return Err(parse_err(
                ll,
                1,
                format!("expected `layer {i} rows=<r> cols=<c>`"),
            ));
        }
        if toks[1].1.parse::<usize>().ok() != Some(i) {
            return Err(parse_err(
                ll,
                toks[1].0,
                format!("expected layer index {i}, found `{}`", toks[1].1),
            ));
        }
        let rows = key_value(toks[2], "rows", ll)?;
        let cols = key_value(toks[3], "cols", ll)?;
        let want_rows = if i == depth { 1 } else { width };
        let want_cols = if i == 0 { input_dim } else { width };
        if rows != want_rows {
            return Err(parse_err(
                ll,
                toks[2].0,
                format!("layer {i}: expected rows={want_rows}, found {rows}"),
            ));
        }
        if cols != want_cols {
            return Err(parse_err(
                ll,
                toks[3].0,
                format!("layer {i}: expected cols={want_cols}, found {cols}"),
            ));
        }
        let mut weights = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (wl, wline) = lines.next_content(&format!("row {r} of layer {i}"))?;
            let toks = tokens(wline);
            if toks.first().is_some_and(|t| t.1 == "bias:") {
                return Err(parse_err(
                    wl,
                    1,
                    format!("layer {i}: expected {rows} weight rows, found {r}"),
                ));
            }
            weights.extend(numbers(&toks, cols, wl, &format!("layer {i} row {r}"))?);
        }
        let (bl, bline) = lines.next_content(&format!("bias of layer {i}"))?;
        let toks = tokens(bline);
        if toks.first().map(|t| t.1) != Some("bias:") {
            return Err(parse_err(
                bl,
                1,
                format!("layer {i}: expected `bias:` line"),
            ));
        }
        let bias = numbers(&toks[1..], rows, bl, &format!("layer {i} bias"))?;
        layers.push(
            AffineLayer::new(rows, cols, weights, bias)
                .map_err(|e| parse_err(bl, 1, e.to_string()))?,
        );
    }
    if lines.has_more() {
        let (l, _) = lines.next_content("trailing")?;
        return Err(parse_err(l, 1, "unexpected content after the last layer"));
    }
    ReluNetwork::new(input_dim, width, layers)
}
