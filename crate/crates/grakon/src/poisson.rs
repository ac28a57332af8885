//! Analytic oracle: evaluate Kontsevich graph sums as polydifferential
//! operators on polynomial data in finite dimension D, with exact rational
//! coefficients. Left edge of vertex α carries ∂/∂x^{i_α}, right edge
//! ∂/∂x^{j_α}; the value is the sum over all index assignments of the
//! product of differentiated vertex contents.

use crate::error::{Error, Result};
use crate::kgraph::{KGraph, KSum, SignedKGraph};
use crate::rat::{self, rat, Rat};
use num::{One, Zero};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};

/// Polynomial in D variables over the rationals, keyed by exponent vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly {
    dim: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl MultiPoly {
    pub fn zero(dim: usize) -> Self {
        MultiPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Rat) -> Self {
        let mut p = Self::zero(dim);
        p.insert(vec![0; dim], c);
        p
    }

    /// The coordinate x^{i+1} (0-based index).
    pub fn var(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut e = vec![0; dim];
        e[i] = 1;
        let mut p = Self::zero(dim);
        p.insert(e, rat(1));
        p
    }

    pub fn monomial(dim: usize, exps: Vec<u32>, c: Rat) -> Self {
        assert_eq!(exps.len(), dim);
        let mut p = Self::zero(dim);
        p.insert(exps, c);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    fn insert(&mut self, e: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.dim, other.dim);
        for (e, c) in &other.terms {
            self.insert(e.clone(), c.clone());
        }
    }

    pub fn scaled(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        MultiPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scaled(&rat(-1))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::zero(self.dim);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert(e, c1 * c2);
            }
        }
        out
    }

    /// ∂/∂x^{i+1} (0-based index).
    pub fn partial(&self, i: usize) -> Self {
        assert!(i < self.dim);
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.insert(d, c * rat(e[i] as i64));
        }
        out
    }

    /// Total degree of the highest term, None for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }
}

/// Antisymmetric bivector with polynomial components; P^{ij} stored for
/// i < j (0-based), the rest implied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyBivector {
    dim: usize,
    comp: BTreeMap<(usize, usize), MultiPoly>,
}

impl PolyBivector {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        PolyBivector {
            dim,
            comp: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set(&mut self, i: usize, j: usize, p: MultiPoly) -> Result<()> {
        if i == j || i >= self.dim || j >= self.dim {
            return Err(Error::Dimension(format!(
                "bad component indices ({i},{j}) in dimension {}",
                self.dim
            )));
        }
        if p.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "component dimension {} does not match bivector dimension {}",
                p.dim(),
                self.dim
            )));
        }
        let (key, val) = if i < j { ((i, j), p) } else { ((j, i), p.neg()) };
        if val.is_zero() {
            self.comp.remove(&key);
        } else {
            self.comp.insert(key, val);
        }
        Ok(())
    }

    /// P^{ij} as a polynomial (sign-correct for any index order).
    pub fn component(&self, i: usize, j: usize) -> MultiPoly {
        if i == j {
            return MultiPoly::zero(self.dim);
        }
        let (key, flip) = if i < j { ((i, j), false) } else { ((j, i), true) };
        match self.comp.get(&key) {
            None => MultiPoly::zero(self.dim),
            Some(p) => {
                if flip {
                    p.neg()
                } else {
                    p.clone()
                }
            }
        }
    }
}

/// The linear bivector P¹² = x³, P¹³ = −x², P²³ = x¹ in D = 3 (the
/// Lie–Poisson structure of sl(2)-type used as the Poisson sample).
pub fn sl2_bivector() -> PolyBivector {
    let mut p = PolyBivector::new(3);
    p.set(0, 1, MultiPoly::var(3, 2)).unwrap();
    p.set(0, 2, MultiPoly::var(3, 1).neg()).unwrap();
    p.set(1, 2, MultiPoly::var(3, 0)).unwrap();
    p
}

// content of a vertex: either an argument (sink) or a bivector component
type ContentKey = (u8, u8, u8); // (0, s, _) = sink s; (1, i, j) = P^{ij}

fn content_base(key: ContentKey, p: &PolyBivector, args: &[MultiPoly]) -> MultiPoly {
    match key.0 {
        0 => args[key.1 as usize].clone(),
        _ => p.component(key.1 as usize, key.2 as usize),
    }
}

fn eval_graph_unchecked(g: &KGraph, p: &PolyBivector, args: &[MultiPoly]) -> MultiPoly {
    let d = p.dim();
    let n = g.n as usize;
    let k = g.k as usize;
    let mut acc = MultiPoly::zero(d);
    if k == 0 {
        // no internal vertices: the product of undifferentiated arguments
        let mut prod = MultiPoly::constant(d, rat(1));
        for a in args {
            prod = prod.mul(a);
        }
        return prod;
    }
    // memoized derivatives: (content, sorted derivative indices) -> value
    let mut memo: HashMap<(ContentKey, Vec<u8>), MultiPoly> = HashMap::new();
    let mut assign = vec![0u8; 2 * k]; // slots (i_0, j_0, i_1, j_1, ...)
    loop {
        // derivative indices collected per vertex
        let mut derivs: Vec<Vec<u8>> = vec![Vec::new(); n + k];
        for (a, &(l, r)) in g.targets.iter().enumerate() {
            derivs[l as usize].push(assign[2 * a]);
            derivs[r as usize].push(assign[2 * a + 1]);
        }
        let mut prod: Option<MultiPoly> = None;
        for v in 0..n + k {
            let key: ContentKey = if v < n {
                (0, v as u8, 0)
            } else {
                let a = v - n;
                (1, assign[2 * a], assign[2 * a + 1])
            };
            let mut dv = std::mem::take(&mut derivs[v]);
            dv.sort_unstable();
            let entry = memo.entry((key, dv.clone())).or_insert_with(|| {
                let mut f = content_base(key, p, args);
                for &i in &dv {
                    f = f.partial(i as usize);
                    if f.is_zero() {
                        break;
                    }
                }
                f
            });
            if entry.is_zero() {
                prod = None;
                break;
            }
            prod = Some(match prod {
                None => entry.clone(),
                Some(acc) => acc.mul(entry),
            });
        }
        if let Some(prod) = prod {
            acc.add_assign(&prod);
        }
        // next assignment (mixed radix base D)
        let mut pos = 0;
        loop {
            if pos == 2 * k {
                return acc;
            }
            assign[pos] += 1;
            if (assign[pos] as usize) < d {
                break;
            }
            assign[pos] = 0;
            pos += 1;
        }
    }
}

fn check_eval_inputs(n: u8, p: &PolyBivector, args: &[MultiPoly]) -> Result<()> {
    if args.len() != n as usize {
        return Err(Error::Dimension(format!(
            "graph with {} sinks applied to {} arguments",
            n,
            args.len()
        )));
    }
    for a in args {
        if a.dim() != p.dim() {
            return Err(Error::Dimension(format!(
                "argument dimension {} does not match bivector dimension {}",
                a.dim(),
                p.dim()
            )));
        }
    }
    Ok(())
}

/// Value of one signed graph as a polydifferential operator.
pub fn eval_graph(sg: &SignedKGraph, p: &PolyBivector, args: &[MultiPoly]) -> Result<MultiPoly> {
    sg.graph.validate()?;
    check_eval_inputs(sg.graph.n, p, args)?;
    if sg.sign == 0 {
        return Ok(MultiPoly::zero(p.dim()));
    }
    let v = eval_graph_unchecked(&sg.graph, p, args);
    Ok(if sg.sign < 0 { v.neg() } else { v })
}

/// Linear extension of eval_graph over a reduced sum.
pub fn eval_sum(s: &KSum, p: &PolyBivector, args: &[MultiPoly]) -> Result<MultiPoly> {
    if let Some((n, _)) = s.homogeneous_type()? {
        check_eval_inputs(n, p, args)?;
    }
    let terms: Vec<(&KGraph, &Rat)> = s.terms().collect();
    let parts: Vec<MultiPoly> = terms
        .par_iter()
        .map(|(g, c)| eval_graph_unchecked(g, p, args).scaled(c))
        .collect();
    let mut acc = MultiPoly::zero(p.dim());
    for part in &parts {
        acc.add_assign(part);
    }
    Ok(acc)
}

/// Analytic Jacobiator component Σ_s (P^{sa}∂_s P^{bc} + P^{sb}∂_s P^{ca} +
/// P^{sc}∂_s P^{ab}); the graph-encoded Jacobiator evaluated at
/// (x^{a+1}, x^{b+1}, x^{c+1}) equals exactly this polynomial.
pub fn jacobiator_component(p: &PolyBivector, a: usize, b: usize, c: usize) -> MultiPoly {
    let d = p.dim();
    let mut acc = MultiPoly::zero(d);
    for s in 0..d {
        acc.add_assign(&p.component(s, a).mul(&p.component(b, c).partial(s)));
        acc.add_assign(&p.component(s, b).mul(&p.component(c, a).partial(s)));
        acc.add_assign(&p.component(s, c).mul(&p.component(a, b).partial(s)));
    }
    acc
}

/// All exponent vectors of total degree ≤ deg in dim variables.
pub fn monomials_up_to(dim: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut e = vec![0u32; dim];
    fn rec(i: usize, left: u32, e: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == e.len() {
            out.push(e.clone());
            return;
        }
        for v in 0..=left {
            e[i] = v;
            rec(i + 1, left - v, e, out);
        }
        e[i] = 0;
    }
    rec(0, deg, &mut e, &mut out);
    out
}

/// Jacobi identity check: the graph-encoded Jacobiator vanishes on every
/// triple of monomials up to the given degree. By total skew-symmetry it
/// suffices to sweep strictly increasing triples.
pub fn jacobi_check_deg(p: &PolyBivector, deg: u32) -> bool {
    let jac = crate::multivec::jacobiator().into_sum();
    let monos = monomials_up_to(p.dim(), deg);
    let m = monos.len();
    let mut triples = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                triples.push((a, b, c));
            }
        }
    }
    !triples.par_iter().any(|&(a, b, c)| {
        let args = [
            MultiPoly::monomial(p.dim(), monos[a].clone(), rat(1)),
            MultiPoly::monomial(p.dim(), monos[b].clone(), rat(1)),
            MultiPoly::monomial(p.dim(), monos[c].clone(), rat(1)),
        ];
        !eval_sum(&jac, p, &args).unwrap().is_zero()
    })
}

/// jacobi_check with the default spanning-family degree 3.
pub fn jacobi_check(p: &PolyBivector) -> bool {
    jacobi_check_deg(p, 3)
}

// ---- text codec -----------------------------------------------------------
//
// Polynomials: terms like `2 x1^2 x2 - 1/2 x3 + 1`; variables are 1-based
// in text. Bivector files: first line `dim D`, then `i j <polynomial>`
// lines with 1 <= i < j <= D; `#` starts a comment.

pub fn parse_poly(dim: usize, s: &str) -> Result<MultiPoly> {
    let spaced = s.replace('+', " + ").replace('-', " - ");
    let toks: Vec<&str> = spaced.split_whitespace().collect();
    let mut out = MultiPoly::zero(dim);
    let mut i = 0;
    let mut first = true;
    while i < toks.len() {
        let mut sign = Rat::one();
        while i < toks.len() && (toks[i] == "+" || toks[i] == "-") {
            if toks[i] == "-" {
                sign = -sign;
            }
            i += 1;
            first = false;
        }
        if i == toks.len() {
            if first {
                break; // empty input => zero polynomial
            }
            return Err(Error::Parse(format!("dangling sign in `{s}`")));
        }
        first = false;
        let mut coeff = sign;
        let mut exps = vec![0u32; dim];
        let mut factors = 0;
        while i < toks.len() && toks[i] != "+" && toks[i] != "-" {
            let t = toks[i];
            if let Some(rest) = t.strip_prefix('x') {
                let (vs, es) = match rest.split_once('^') {
                    Some((v, e)) => (v, Some(e)),
                    None => (rest, None),
                };
                let vi: usize = vs
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad variable `{t}`")))?;
                if vi < 1 || vi > dim {
                    return Err(Error::Parse(format!(
                        "variable `{t}` out of range for dimension {dim}"
                    )));
                }
                let e: u32 = match es {
                    None => 1,
                    Some(e) => e
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent `{t}`")))?,
                };
                exps[vi - 1] += e;
            } else {
                coeff *= rat::parse_rat(t)?;
            }
            factors += 1;
            i += 1;
        }
        if factors == 0 {
            return Err(Error::Parse(format!("empty term in `{s}`")));
        }
        out.insert(exps, coeff);
    }
    Ok(out)
}

pub fn format_poly(p: &MultiPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (e, c) in p.terms() {
        let neg = crate::rat::signum(c) < 0;
        let mag = if neg { -c.clone() } else { c.clone() };
        if out.is_empty() {
            if neg {
                out.push_str("- ");
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut parts = Vec::new();
        if !mag.is_one() || e.iter().all(|&x| x == 0) {
            parts.push(rat::format_rat(&mag));
        }
        for (i, &x) in e.iter().enumerate() {
            match x {
                0 => {}
                1 => parts.push(format!("x{}", i + 1)),
                _ => parts.push(format!("x{}^{}", i + 1, x)),
            }
        }
        out.push_str(&parts.join(" "));
    }
    out
}

pub fn parse_bivector(text: &str) -> Result<PolyBivector> {
    let mut lines = text.lines().filter_map(|raw| {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let t = line.trim();
        if t.is_empty() {
            None
        } else {
            Some(t)
        }
    });
    let head = lines
        .next()
        .ok_or_else(|| Error::Parse("empty bivector file".into()))?;
    let dim: usize = match head.split_whitespace().collect::<Vec<_>>()[..] {
        ["dim", d] => d
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension `{d}`")))?,
        _ => return Err(Error::Parse(format!("expected `dim D`, got `{head}`"))),
    };
    if dim == 0 {
        return Err(Error::Parse("dimension must be >= 1".into()));
    }
    let mut p = PolyBivector::new(dim);
    for line in lines {
        let mut it = line.splitn(3, char::is_whitespace);
        let (i, j, poly) = match (it.next(), it.next(), it.next()) {
            (Some(i), Some(j), Some(rest)) => (i, j, rest),
            _ => return Err(Error::Parse(format!("short component line `{line}`"))),
        };
        let i: usize = i
            .parse()
            .map_err(|_| Error::Parse(format!("bad index `{i}`")))?;
        let j: usize = j
            .parse()
            .map_err(|_| Error::Parse(format!("bad index `{j}`")))?;
        if i < 1 || j < 1 || i >= j || j > dim {
            return Err(Error::Parse(format!(
                "component indices must satisfy 1 <= i < j <= {dim}: `{line}`"
            )));
        }
        p.set(i - 1, j - 1, parse_poly(dim, poly)?)?;
    }
    Ok(p)
}

pub fn format_bivector(p: &PolyBivector) -> String {
    let mut out = format!("dim {}\n", p.dim);
    for (&(i, j), poly) in &p.comp {
        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, format_poly(poly)));
    }
    out
}
