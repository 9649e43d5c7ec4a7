//! Fock space truncations and point evaluation of tensor-algebra
//! polynomials.
//!
//! A word `e₁e₂⋯eₙ` stands for the elementary tensor `e₁⊗e₂⊗⋯⊗eₙ`, which is
//! nonzero iff adjacent edges compose: `s(e_i) = r(e_{i+1})`. Evaluation at a
//! disc point sends the creation operator of `e` to
//! `L_e: h ↦ η*(e⊗h)`, the operator on `H` whose `(r(e), s(e))` block is the
//! `e`-column block of `η*`, and an algebra element `a` to `σ(a)`.
//!
//! Polynomials parse from text such as `a{v1:1,v2:0} + (2+0i)*e1.e1.e2`:
//! terms are separated by `+`; an algebra term lists `vertex:coefficient`
//! pairs (missing vertices are 0); a word term is an optional `coefficient*`
//! followed by dot-separated edge names. Coefficients are real numbers or
//! parenthesised complex numbers `(x+yi)`, `(x-yi)`, `(yi)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;

use crate::correspondence::{AlgebraElement, CorrespondenceContext};
use crate::error::{Error, Result};
use crate::intertwiners::Intertwiner;
use crate::linalg::{c64, identity, zeros, CMatrix};

/// Element of the tensor algebra: `φ_∞(a) + Σ_w c_w T_w`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorPolynomial {
    algebra: Vec<Complex64>,
    terms: BTreeMap<Vec<usize>, Complex64>,
}

fn composable(ctx: &CorrespondenceContext, word: &[usize]) -> bool {
    let edges = ctx.graph().edges();
    word.windows(2)
        .all(|w| edges[w[0]].source == edges[w[1]].range)
}

impl TensorPolynomial {
    pub fn zero(ctx: &CorrespondenceContext) -> Self {
        TensorPolynomial {
            algebra: vec![c64(0.0, 0.0); ctx.num_vertices()],
            terms: BTreeMap::new(),
        }
    }

    /// `φ_∞(a)`.
    pub fn algebra(ctx: &CorrespondenceContext, a: &AlgebraElement) -> Self {
        let mut p = Self::zero(ctx);
        p.algebra = a.0.clone();
        p
    }

    /// `c · T_{e₁}⋯T_{eₙ}`; zero when the word does not compose.
    pub fn word(ctx: &CorrespondenceContext, coefficient: Complex64, word: &[usize]) -> Self {
        let mut p = Self::zero(ctx);
        if word.is_empty() {
            p.algebra = vec![coefficient; ctx.num_vertices()];
        } else if composable(ctx, word) && coefficient != c64(0.0, 0.0) {
            p.terms.insert(word.to_vec(), coefficient);
        }
        p
    }

    pub fn algebra_part(&self) -> &[Complex64] {
        &self.algebra
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, Complex64> {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.algebra.iter_mut().zip(&other.algebra) {
            *a += b;
        }
        for (w, c) in &other.terms {
            *out.terms.entry(w.clone()).or_insert(c64(0.0, 0.0)) += c;
        }
        out.terms.retain(|_, c| *c != c64(0.0, 0.0));
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        TensorPolynomial {
            algebra: self.algebra.iter().map(|a| a * s).collect(),
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), c * s))
                .filter(|(_, c)| *c != c64(0.0, 0.0))
                .collect(),
        }
    }

    /// Product in the tensor algebra: `a·b` pointwise, `a·w = a(r(w₁))w`,
    /// `w·a = a(s(wₙ))w`, and concatenation of words (zero unless the joint
    /// composes).
    pub fn mul(&self, other: &Self, ctx: &CorrespondenceContext) -> Self {
        let edges = ctx.graph().edges();
        let mut out = Self::zero(ctx);
        for (o, (a, b)) in out.algebra.iter_mut().zip(self.algebra.iter().zip(&other.algebra)) {
            *o = a * b;
        }
        let mut add = |w: Vec<usize>, c: Complex64| {
            if c != c64(0.0, 0.0) {
                *out.terms.entry(w).or_insert(c64(0.0, 0.0)) += c;
            }
        };
        for (w, c) in &other.terms {
            add(w.clone(), self.algebra[edges[w[0]].range] * c);
        }
        for (w, c) in &self.terms {
            add(w.clone(), c * other.algebra[edges[w[w.len() - 1]].source]);
        }
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                if edges[w1[w1.len() - 1]].source == edges[w2[0]].range {
                    let mut w = w1.clone();
                    w.extend_from_slice(w2);
                    add(w, c1 * c2);
                }
            }
        }
        out.terms.retain(|_, c| *c != c64(0.0, 0.0));
        out
    }

    /// Parses the text grammar described in the module documentation.
    pub fn parse(ctx: &CorrespondenceContext, text: &str) -> Result<Self> {
        let mut out = Self::zero(ctx);
        for term in split_top_level(text, '+')? {
            let term = term.trim();
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in `{text}`")));
            }
            if let Some(body) = term.strip_prefix("a{") {
                let body = body
                    .strip_suffix('}')
                    .ok_or_else(|| Error::Parse(format!("unterminated algebra term `{term}`")))?;
                let mut a = vec![c64(0.0, 0.0); ctx.num_vertices()];
                for entry in split_top_level(body, ',')? {
                    let entry = entry.trim();
                    if entry.is_empty() {
                        continue;
                    }
                    let (name, value) = entry
                        .split_once(':')
                        .ok_or_else(|| Error::Parse(format!("expected `vertex:value`, found `{entry}`")))?;
                    let v = ctx
                        .graph()
                        .vertex_index(name.trim())
                        .ok_or_else(|| Error::UnknownVertex(name.trim().into()))?;
                    a[v] += parse_complex(value.trim())?;
                }
                out = out.add(&Self::algebra(ctx, &AlgebraElement(a)));
            } else {
                let (coef, word) = match split_top_level(term, '*')?.as_slice() {
                    [w] => (c64(1.0, 0.0), *w),
                    [c, w] => (parse_complex(c.trim())?, *w),
                    _ => return Err(Error::Parse(format!("malformed term `{term}`"))),
                };
                let word = word
                    .trim()
                    .split('.')
                    .map(|name| {
                        ctx.graph()
                            .edge_index(name.trim())
                            .ok_or_else(|| Error::UnknownEdge(name.trim().into()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                out = out.add(&Self::word(ctx, coef, &word));
            }
        }
        Ok(out)
    }

    pub fn display<'a>(&'a self, ctx: &'a CorrespondenceContext) -> PolynomialDisplay<'a> {
        PolynomialDisplay { poly: self, ctx }
    }
}

pub struct PolynomialDisplay<'a> {
    poly: &'a TensorPolynomial,
    ctx: &'a CorrespondenceContext,
}

impl fmt::Display for PolynomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.ctx.graph();
        let entries: Vec<String> = self
            .poly
            .algebra
            .iter()
            .enumerate()
            .map(|(v, z)| format!("{}:({}{:+}i)", g.vertices()[v], z.re, z.im))
            .collect();
        write!(f, "a{{{}}}", entries.join(","))?;
        for (w, c) in &self.poly.terms {
            let names: Vec<&str> = w.iter().map(|&e| g.edges()[e].name.as_str()).collect();
            write!(f, " + ({}{:+}i)*{}", c.re, c.im, names.join("."))?;
        }
        Ok(())
    }
}

fn split_top_level(s: &str, sep: char) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '{' => depth += 1,
            ')' | '}' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Parse(format!("unbalanced brackets in `{s}`")));
                }
            }
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced brackets in `{s}`")));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

/// Parses `x`, `(x)`, `(yi)`, `(x+yi)`, `(x-yi)`, `i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let err = || Error::Parse(format!("invalid coefficient `{s}`"));
    let inner = s
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .unwrap_or(s)
        .trim();
    let real = |t: &str| t.trim().parse::<f64>().map_err(|_| err());
    let Some(body) = inner.strip_suffix('i') else {
        return Ok(c64(real(inner)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| match t.trim() {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        t => real(t),
    };
    match split {
        Some(k) => Ok(c64(real(&body[..k])?, imag(&body[k..])?)),
        None => Ok(c64(0.0, imag(body)?)),
    }
}

/// `L_e = η* J_e` where `J_e: H → E⊗H` embeds `H_{s(e)}` as the `e`-block.
pub fn creation_image(ctx: &CorrespondenceContext, eta: &CMatrix, e: usize) -> CMatrix {
    let mut l = zeros(ctx.dim_h(), ctx.dim_h());
    let src = ctx.h_range(ctx.graph().edges()[e].source);
    let cols = ctx.eh_range(e);
    l.view_mut((0, src.start), (ctx.dim_h(), src.len()))
        .copy_from(&eta.view((0, cols.start), (ctx.dim_h(), cols.len())));
    l
}

/// `σ × η*` applied to a polynomial.
pub fn evaluate(ctx: &CorrespondenceContext, poly: &TensorPolynomial, eta: &Intertwiner) -> CMatrix {
    let ls: Vec<CMatrix> = (0..ctx.num_edges())
        .map(|e| creation_image(ctx, eta.matrix(), e))
        .collect();
    let mut out = ctx.sigma_op(&AlgebraElement(poly.algebra.clone()));
    for (w, c) in &poly.terms {
        let mut prod = identity(ctx.dim_h());
        for &e in w {
            prod *= &ls[e];
        }
        out += prod * *c;
    }
    out
}

/// `⊕_{n ≤ N} E^{⊗n} ⊗ H` with the basis of composable edge paths.
///
/// Level 0 is `H` itself; a path `e₁⋯eₙ` at level `n ≥ 1` carries a copy of
/// `H_{s(eₙ)}`.
#[derive(Clone, Debug)]
pub struct FockTruncation {
    ctx: CorrespondenceContext,
    order: usize,
    /// Per level: `(path, end vertex, offset)`; level 0 uses empty paths.
    levels: Vec<Vec<(Vec<usize>, usize, usize)>>,
    index: Vec<HashMap<(Vec<usize>, usize), usize>>,
    dim: usize,
}

impl FockTruncation {
    pub fn new(ctx: &CorrespondenceContext, order: usize) -> Self {
        let g = ctx.graph();
        let mut levels: Vec<Vec<(Vec<usize>, usize)>> = Vec::new();
        levels.push((0..g.num_vertices()).map(|v| (Vec::new(), v)).collect());
        let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
        for n in 1..=order {
            let mut next = Vec::new();
            for p in &frontier {
                for e in 0..g.num_edges() {
                    if n == 1 || g.edges()[p[p.len() - 1]].source == g.edges()[e].range {
                        let mut q = p.clone();
                        q.push(e);
                        next.push(q);
                    }
                }
            }
            levels.push(
                next.iter()
                    .map(|p| (p.clone(), g.edges()[p[p.len() - 1]].source))
                    .collect(),
            );
            frontier = next;
        }
        let mut dim = 0;
        let mut with_offsets = Vec::new();
        let mut index = Vec::new();
        for level in levels {
            let mut l = Vec::new();
            let mut idx = HashMap::new();
            for (p, v) in level {
                idx.insert((p.clone(), v), l.len());
                l.push((p, v, dim));
                dim += ctx.multiplicity(v);
            }
            with_offsets.push(l);
            index.push(idx);
        }
        FockTruncation {
            ctx: ctx.clone(),
            order,
            levels: with_offsets,
            index,
            dim,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis paths at level `n` (level 0 counts vertices).
    pub fn paths_at(&self, n: usize) -> usize {
        self.levels[n].len()
    }

    fn range_vertex(&self, path: &[usize], end: usize) -> usize {
        match path.first() {
            Some(&e) => self.ctx.graph().edges()[e].range,
            None => end,
        }
    }

    /// `T_ξ`: `η ↦ ξ⊗η` from level `n` to level `n + 1`; the top level maps
    /// to zero.
    pub fn creation_matrix(&self, xi: &[Complex64]) -> CMatrix {
        let edges = self.ctx.graph().edges();
        let mut t = zeros(self.dim, self.dim);
        for n in 0..self.order {
            for (path, end, off) in &self.levels[n] {
                let front = self.range_vertex(path, *end);
                for (e, &x) in xi.iter().enumerate() {
                    if x == c64(0.0, 0.0) || edges[e].source != front {
                        continue;
                    }
                    let mut q = vec![e];
                    q.extend_from_slice(path);
                    let target = self.index[n + 1][&(q, *end)];
                    let toff = self.levels[n + 1][target].2;
                    for j in 0..self.ctx.multiplicity(*end) {
                        t[(toff + j, off + j)] = x;
                    }
                }
            }
        }
        t
    }

    /// `φ_∞(a)`: `a(r(e₁))` on the path `e₁⋯eₙ`, `a(v)` on `H_v` at level 0.
    pub fn phi_infinity(&self, a: &AlgebraElement) -> CMatrix {
        let mut m = zeros(self.dim, self.dim);
        for level in &self.levels {
            for (path, end, off) in level {
                let value = a.0[self.range_vertex(path, *end)];
                for j in 0..self.ctx.multiplicity(*end) {
                    m[(off + j, off + j)] = value;
                }
            }
        }
        m
    }

    /// `φ(a)ξ`: `(φ(a)ξ)_e = a(r(e)) ξ_e`.
    pub fn left_on_edges(&self, a: &AlgebraElement, xi: &[Complex64]) -> Vec<Complex64> {
        self.ctx
            .graph()
            .edges()
            .iter()
            .zip(xi)
            .map(|(e, x)| a.0[e.range] * x)
            .collect()
    }

    /// `ξ·a`: `(ξ·a)_e = ξ_e a(s(e))`.
    pub fn right_on_edges(&self, a: &AlgebraElement, xi: &[Complex64]) -> Vec<Complex64> {
        self.ctx
            .graph()
            .edges()
            .iter()
            .zip(xi)
            .map(|(e, x)| x * a.0[e.source])
            .collect()
    }

    /// `max_w sqrt(Σ_{s(e)=w} |ξ_e|²)`: the norm of `ξ` in `E`, which bounds
    /// `‖T_ξ‖`.
    pub fn module_norm(&self, xi: &[Complex64]) -> f64 {
        let g = self.ctx.graph();
        (0..g.num_vertices())
            .map(|w| {
                g.edges()
                    .iter()
                    .zip(xi)
                    .filter(|(e, _)| e.source == w)
                    .map(|(_, x)| x.norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::intertwiners::sample_disc;
    use crate::linalg::{distance, operator_norm};

    #[test]
    fn parse_examples() {
        let ctx = fixtures::two_vertex();
        let p = TensorPolynomial::parse(&ctx, "a{v1:1,v2:0} + (2+0i)*e1.e1.e2").unwrap();
        assert_eq!(p.algebra_part(), &[c64(1.0, 0.0), c64(0.0, 0.0)]);
        // e1.e1.e2 is not composable: s(e1)=v1=r(e1), but s(e1)=v1 ≠ r(e2)=v2.
        assert!(p.terms().is_empty());
        let q = TensorPolynomial::parse(&ctx, "e2.e1 + (0.5-1.5i)*e1 + -2*e2").unwrap();
        assert_eq!(q.terms().len(), 3);
        assert_eq!(q.terms()[&vec![0]], c64(0.5, -1.5));
        assert_eq!(q.degree(), 2);
        assert!(TensorPolynomial::parse(&ctx, "a{v9:1}").is_err());
        assert!(TensorPolynomial::parse(&ctx, "e7").is_err());
        assert!(TensorPolynomial::parse(&ctx, "(1+2i*e1").is_err());
        let shown = q.display(&ctx).to_string();
        let back = TensorPolynomial::parse(&ctx, &shown).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("2").unwrap(), c64(2.0, 0.0));
        assert_eq!(parse_complex("(1e-3-2i)").unwrap(), c64(1e-3, -2.0));
        assert_eq!(parse_complex("(-i)").unwrap(), c64(0.0, -1.0));
        assert_eq!(parse_complex("(2.5i)").unwrap(), c64(0.0, 2.5));
        assert_eq!(parse_complex("(1e+2+1e-1i)").unwrap(), c64(100.0, 0.1));
        assert!(parse_complex("(x)").is_err());
    }

    #[test]
    fn evaluation_examples() {
        let ctx = fixtures::two_vertex();
        let eta = sample_disc(&ctx, 5, 0.8);
        let a = AlgebraElement(vec![c64(0.3, 1.0), c64(-2.0, 0.0)]);
        let p = TensorPolynomial::algebra(&ctx, &a);
        assert!(distance(&evaluate(&ctx, &p, &eta), &ctx.sigma_op(&a)) < 1e-15);
        let t = TensorPolynomial::word(&ctx, c64(1.0, 0.0), &[1]);
        assert_eq!(operator_norm(&evaluate(&ctx, &t, &Intertwiner::zero(&ctx))), 0.0);

        let s = fixtures::scalar_case();
        let z = c64(0.3, -0.4);
        let eta = Intertwiner::from_matrix_unchecked(CMatrix::from_element(1, 1, z));
        let t = TensorPolynomial::word(&s, c64(1.0, 0.0), &[0]);
        assert_eq!(evaluate(&s, &t, &eta)[(0, 0)], z);
    }

    #[test]
    fn scalar_fock_shift() {
        let s = fixtures::scalar_case();
        let ft = FockTruncation::new(&s, 2);
        assert_eq!(ft.dim(), 3);
        let t = ft.creation_matrix(&[c64(1.0, 0.0)]);
        let mut expected = zeros(3, 3);
        expected[(1, 0)] = c64(1.0, 0.0);
        expected[(2, 1)] = c64(1.0, 0.0);
        assert_eq!(t, expected);
        assert_eq!(operator_norm(&ft.creation_matrix(&[c64(0.0, 0.0)])), 0.0);
    }

    #[test]
    fn fock_dimensions() {
        let ctx = fixtures::two_vertex();
        let ft = FockTruncation::new(&ctx, 3);
        // Composable paths: level 1 {e1, e2}; level 2 {e1e1, e2e1}; level 3
        // {e1e1e1, e2e1e1}. Every path ends at s = v1 (multiplicity 2).
        assert_eq!(ft.paths_at(1), 2);
        assert_eq!(ft.paths_at(2), 2);
        assert_eq!(ft.dim(), 3 + 2 * 2 * 3);
        // Creating e2 in front of e2 never composes: s(e2)=v1 ≠ r(e2)=v2.
        let t = ft.creation_matrix(&[c64(0.0, 0.0), c64(1.0, 0.0)]);
        let t2 = &t * &t;
        assert_eq!(operator_norm(&t2), 0.0);
    }
}
