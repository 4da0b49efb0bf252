//! The command-line mini-grammar: `const`, `C:3`, `S:1,-2,3`, `2.5*C:3`.

use rieszpl::{BasisFunction, RidgeIndex, Shape};

pub fn parse_index(text: &str) -> Result<RidgeIndex, String> {
    let alpha = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| format!("bad frequency entry {t:?} in {text:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    RidgeIndex::new(alpha).map_err(|e| e.to_string())
}

pub fn parse_function(text: &str) -> Result<BasisFunction, String> {
    let text = text.trim();
    if text == "const" {
        return Ok(BasisFunction::constant());
    }
    match text.split_once(':') {
        Some(("C", rest)) => Ok(BasisFunction::cos(parse_index(rest)?)),
        Some(("S", rest)) => Ok(BasisFunction::sin(parse_index(rest)?)),
        _ => Err(format!(
            "expected const, C:<index> or S:<index>, got {text:?}"
        )),
    }
}

/// A network term list, split into cosine-like and sine-like parts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Terms {
    pub cos: Vec<(f64, RidgeIndex)>,
    pub sin: Vec<(f64, RidgeIndex)>,
}

impl Terms {
    pub fn len(&self) -> usize {
        self.cos.len() + self.sin.len()
    }

    pub fn dim(&self) -> usize {
        self.cos
            .iter()
            .chain(&self.sin)
            .next()
            .map_or(0, |(_, a)| a.dim())
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let c: f64 = self
            .cos
            .iter()
            .map(|(a, al)| a * rieszpl::basis::cos_like(al.dot(x)))
            .sum();
        let s: f64 = self
            .sin
            .iter()
            .map(|(b, be)| b * rieszpl::basis::sin_like(be.dot(x)))
            .sum();
        c + s
    }
}

/// Items separated by `|` or whitespace; each is `[coef*]C:α` or `[coef*]S:β`.
pub fn parse_terms(items: &[String]) -> Result<Terms, String> {
    let joined = items.join(" ");
    let mut terms = Terms::default();
    for item in joined.split(|c: char| c == '|' || c.is_whitespace()) {
        if item.is_empty() {
            continue;
        }
        let (coef, function) = match item.split_once('*') {
            Some((c, f)) => (
                c.parse::<f64>()
                    .map_err(|_| format!("bad coefficient {c:?} in {item:?}"))?,
                f,
            ),
            None => (1.0, item),
        };
        if !coef.is_finite() {
            return Err(format!("non-finite coefficient in {item:?}"));
        }
        match parse_function(function)?.shape {
            Shape::CosLike(a) => terms.cos.push((coef, a)),
            Shape::SinLike(b) => terms.sin.push((coef, b)),
            Shape::Constant => return Err("the constant is not a network term".into()),
        }
    }
    if terms.len() == 0 {
        return Err("empty term list".into());
    }
    let d = terms.dim();
    if let Some((_, a)) = terms
        .cos
        .iter()
        .chain(&terms.sin)
        .find(|(_, a)| a.dim() != d)
    {
        return Err(format!("mixed dimensions: {d} and {}", a.dim()));
    }
    Ok(terms)
}

pub fn parse_point(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|t| {
            let v = t
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("bad coordinate {t:?}"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("non-finite coordinate {t:?}"))
            }
        })
        .collect()
}
