//! Oriented Kontsevich graphs of type (n,k): encoding, normal form with
//! sign, zero detection, and the sink alternation Alt.

use crate::error::{Error, Result};
use crate::rat::{self, Rat};
use itertools::Itertools;
use num::Zero;
use std::collections::{BTreeMap, HashMap};

/// Oriented graph on sinks `0..n` and internal vertices `n..n+k`; the pair
/// at index `i` holds the ordered targets (Left, Right) of vertex `n+i`.
/// Tadpoles are forbidden, 2-cycles ("eyes") and equal L = R targets are
/// allowed structurally (the latter make the graph zero).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct KGraph {
    pub n: u8,
    pub k: u8,
    pub targets: Vec<(u8, u8)>,
}

/// Graph together with a sign in `{-1, 0, +1}`; 0 marks a zero graph.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SignedKGraph {
    pub graph: KGraph,
    pub sign: i8,
}

impl KGraph {
    pub fn new(n: u8, k: u8, targets: Vec<(u8, u8)>) -> Result<Self> {
        let g = KGraph { n, k, targets };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidGraph("sink count must be >= 1".into()));
        }
        let total = self.n as usize + self.k as usize;
        if total > 255 {
            return Err(Error::InvalidGraph("vertex count exceeds 255".into()));
        }
        if self.targets.len() != self.k as usize {
            return Err(Error::InvalidGraph(format!(
                "expected {} target pairs, got {}",
                self.k,
                self.targets.len()
            )));
        }
        for (i, &(a, b)) in self.targets.iter().enumerate() {
            let v = self.n + i as u8;
            if a == v || b == v {
                return Err(Error::InvalidGraph(format!("tadpole at vertex {v}")));
            }
            if a as usize >= total || b as usize >= total {
                return Err(Error::InvalidGraph(format!(
                    "target out of range at vertex {v}"
                )));
            }
        }
        Ok(())
    }

    /// In-degree of every vertex (sinks included).
    pub fn in_degrees(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.n as usize + self.k as usize];
        for &(a, b) in &self.targets {
            d[a as usize] += 1;
            d[b as usize] += 1;
        }
        d
    }

    /// Replace every sink target `t` by `perm[t]`, keeping internal targets.
    pub fn retarget_sinks(&self, perm: &[u8]) -> KGraph {
        let map = |t: u8| if t < self.n { perm[t as usize] } else { t };
        KGraph {
            n: self.n,
            k: self.k,
            targets: self.targets.iter().map(|&(a, b)| (map(a), map(b))).collect(),
        }
    }
}

pub(crate) fn nf_unchecked(g: &KGraph, sign_in: i8) -> SignedKGraph {
    let k = g.k as usize;
    let n = g.n as usize;
    if k == 0 {
        return SignedKGraph {
            graph: g.clone(),
            sign: sign_in,
        };
    }
    let mut best: Option<Vec<(u8, u8)>> = None;
    let mut parities = 0u8; // bit 0: even swap count reaches best, bit 1: odd
    for sigma in (0..k).permutations(k) {
        // sigma[i] = new index of old internal vertex n+i
        let map = |t: u8| {
            if (t as usize) < n {
                t
            } else {
                (n + sigma[t as usize - n]) as u8
            }
        };
        let mut pairs = vec![(0u8, 0u8); k];
        let mut swaps = 0u32;
        let mut has_eq = false;
        for (i, &(a, b)) in g.targets.iter().enumerate() {
            let (ma, mb) = (map(a), map(b));
            if ma == mb {
                has_eq = true;
                pairs[sigma[i]] = (ma, mb);
            } else if ma < mb {
                pairs[sigma[i]] = (ma, mb);
            } else {
                pairs[sigma[i]] = (mb, ma);
                swaps += 1;
            }
        }
        let bits = if has_eq {
            0b11
        } else if swaps % 2 == 0 {
            0b01
        } else {
            0b10
        };
        match &best {
            None => {
                best = Some(pairs);
                parities = bits;
            }
            Some(b) => match pairs.cmp(b) {
                std::cmp::Ordering::Less => {
                    best = Some(pairs);
                    parities = bits;
                }
                std::cmp::Ordering::Equal => parities |= bits,
                std::cmp::Ordering::Greater => {}
            },
        }
    }
    let graph = KGraph {
        n: g.n,
        k: g.k,
        targets: best.unwrap(),
    };
    let sign = match parities {
        _ if sign_in == 0 => 0,
        0b01 => sign_in,
        0b10 => -sign_in,
        _ => 0,
    };
    SignedKGraph { graph, sign }
}

/// Normal form: the internal relabeling and L/R orientation whose target
/// list, read as a 2k-digit base-(n+k) integer, is minimal. Each L/R swap
/// contributes a factor −1; internal relabelings are signless. Sign 0 when
/// the minimum is reachable with both swap parities (zero graph).
pub fn normal_form(sg: &SignedKGraph) -> Result<SignedKGraph> {
    sg.graph.validate()?;
    Ok(nf_unchecked(&sg.graph, sg.sign))
}

/// Normal form together with the transport of a marked internal edge
/// (w, v): among all relabelings achieving the minimal target list, the
/// lexicographically least image of the pair is returned, making the
/// result orbit-invariant. The last component collects the sign parities
/// of the relabelings reaching exactly that minimal (graph, edge) pair:
/// bit 0 for even swap count, bit 1 for odd (both bits when some pair has
/// equal targets).
pub(crate) fn nf_transport_signed(g: &KGraph, w: u8, v: u8) -> (KGraph, u8, u8, u8) {
    let k = g.k as usize;
    let n = g.n as usize;
    let mut best: Option<Vec<(u8, u8)>> = None;
    let mut edge: (u8, u8) = (w, v);
    let mut bits = 0u8;
    for sigma in (0..k).permutations(k) {
        let map = |t: u8| {
            if (t as usize) < n {
                t
            } else {
                (n + sigma[t as usize - n]) as u8
            }
        };
        let mut pairs = vec![(0u8, 0u8); k];
        let mut swaps = 0u32;
        let mut has_eq = false;
        for (i, &(a, b)) in g.targets.iter().enumerate() {
            let (ma, mb) = (map(a), map(b));
            has_eq |= ma == mb;
            if ma > mb {
                swaps += 1;
            }
            pairs[sigma[i]] = if ma <= mb { (ma, mb) } else { (mb, ma) };
        }
        let cand_bits = if has_eq {
            0b11
        } else if swaps % 2 == 0 {
            0b01
        } else {
            0b10
        };
        let cand_edge = (map(w), map(v));
        let replace = match &best {
            None => true,
            Some(b) => match pairs.cmp(b) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => continue,
                std::cmp::Ordering::Equal => match cand_edge.cmp(&edge) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => continue,
                    std::cmp::Ordering::Equal => {
                        bits |= cand_bits;
                        continue;
                    }
                },
            },
        };
        if replace {
            best = Some(pairs);
            edge = cand_edge;
            bits = cand_bits;
        }
    }
    let graph = KGraph {
        n: g.n,
        k: g.k,
        targets: best.unwrap(),
    };
    (graph, edge.0, edge.1, bits)
}


/// True when `g` is its own normal-form key (all pairs ascending and no
/// internal relabeling gives a smaller target list).
fn is_nf_key(g: &KGraph) -> bool {
    let k = g.k as usize;
    let n = g.n as usize;
    if g.targets.iter().any(|&(a, b)| a > b) {
        return false;
    }
    for sigma in (0..k).permutations(k) {
        let map = |t: u8| {
            if (t as usize) < n {
                t
            } else {
                (n + sigma[t as usize - n]) as u8
            }
        };
        let mut pairs = vec![(0u8, 0u8); k];
        for (i, &(a, b)) in g.targets.iter().enumerate() {
            let (ma, mb) = (map(a), map(b));
            pairs[sigma[i]] = if ma <= mb { (ma, mb) } else { (mb, ma) };
        }
        if pairs < g.targets {
            return false;
        }
    }
    true
}

/// All normal-form classes of (n,k) graphs (tadpole-free; equal-target
/// pairs and eyes included), enumerated canonically: vertices receive
/// ascending pairs depth-first, branches beaten by an adjacent internal
/// transposition are pruned, and leaves are kept iff they equal their own
/// normal-form key. With `multivector_only` every sink must end with
/// in-degree exactly 1.
pub fn enumerate_classes(n: u8, k: u8, multivector_only: bool) -> Vec<KGraph> {
    let total = (n + k) as usize;
    let mut out = Vec::new();
    let mut targets: Vec<(u8, u8)> = Vec::with_capacity(k as usize);
    let mut sink_deg = vec![0u32; n as usize];

    fn transposition_beats(targets: &[(u8, u8)], n: usize, m: usize) -> bool {
        // swap internal labels n+m and n+m+1 (both assigned), re-sort, compare
        let a = (n + m) as u8;
        let b = (n + m + 1) as u8;
        let map = |t: u8| {
            if t == a {
                b
            } else if t == b {
                a
            } else {
                t
            }
        };
        let mut alt: Vec<(u8, u8)> = targets.to_vec();
        for (i, &(l, r)) in targets.iter().enumerate() {
            let (ml, mr) = (map(l), map(r));
            let pair = if ml <= mr { (ml, mr) } else { (mr, ml) };
            let pos = if i == m {
                m + 1
            } else if i == m + 1 {
                m
            } else {
                i
            };
            alt[pos] = pair;
        }
        alt < targets.to_vec()
    }

    fn rec(
        j: usize,
        k: usize,
        n: u8,
        total: usize,
        multivector_only: bool,
        targets: &mut Vec<(u8, u8)>,
        sink_deg: &mut Vec<u32>,
        out: &mut Vec<KGraph>,
    ) {
        if j == k {
            if multivector_only && sink_deg.iter().any(|&d| d != 1) {
                return;
            }
            let g = KGraph {
                n,
                k: k as u8,
                targets: targets.clone(),
            };
            if is_nf_key(&g) {
                out.push(g);
            }
            return;
        }
        let owner = n as usize + j;
        for l in 0..total as u8 {
            if l as usize == owner {
                continue;
            }
            for r in l..total as u8 {
                if r as usize == owner {
                    continue;
                }
                let mut bump = 0;
                if (l as usize) < n as usize {
                    sink_deg[l as usize] += 1;
                    bump += 1;
                }
                if (r as usize) < n as usize {
                    sink_deg[r as usize] += 1;
                    bump += 2;
                }
                let sink_ok = !multivector_only
                    || ((l as usize) >= n as usize || sink_deg[l as usize] <= 1)
                        && ((r as usize) >= n as usize || sink_deg[r as usize] <= 1);
                if sink_ok {
                    targets.push((l, r));
                    let pruned = j > 0 && transposition_beats(targets, n as usize, j - 1);
                    if !pruned {
                        rec(j + 1, k, n, total, multivector_only, targets, sink_deg, out);
                    }
                    targets.pop();
                }
                if bump & 1 != 0 {
                    sink_deg[l as usize] -= 1;
                }
                if bump & 2 != 0 {
                    sink_deg[r as usize] -= 1;
                }
            }
        }
    }

    rec(
        0,
        k as usize,
        n,
        total,
        multivector_only,
        &mut targets,
        &mut sink_deg,
        &mut out,
    );
    out.sort();
    out
}

/// Per-run memo for normal forms of sign-+1 inputs; callers fold their own
/// signs into coefficients.
#[derive(Default)]
pub struct NfCache {
    map: HashMap<KGraph, SignedKGraph>,
}

impl NfCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nf(&mut self, g: &KGraph) -> SignedKGraph {
        if let Some(hit) = self.map.get(g) {
            return hit.clone();
        }
        let v = nf_unchecked(g, 1);
        self.map.insert(g.clone(), v.clone());
        v
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Formal rational combination keyed by normal-form Kontsevich graphs.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct KSum {
    terms: BTreeMap<KGraph, Rat>,
}

impl KSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, g: &KGraph, c: Rat) {
        if c.is_zero() {
            return;
        }
        let nf = nf_unchecked(g, 1);
        self.add_signed_nf(nf, c);
    }

    pub fn add_cached(&mut self, cache: &mut NfCache, g: &KGraph, c: Rat) {
        if c.is_zero() {
            return;
        }
        let nf = cache.nf(g);
        self.add_signed_nf(nf, c);
    }

    fn add_signed_nf(&mut self, nf: SignedKGraph, c: Rat) {
        if nf.sign == 0 {
            return;
        }
        let c = if nf.sign < 0 { -c } else { c };
        let entry = self.terms.entry(nf.graph).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    /// Add `c · g` where `g` is already a normal-form key.
    pub(crate) fn add_nf_key(&mut self, g: KGraph, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(g).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add_sum(&mut self, other: &KSum) {
        for (g, c) in &other.terms {
            self.add_nf_key(g.clone(), c.clone());
        }
    }

    pub fn scaled(&self, c: &Rat) -> KSum {
        if c.is_zero() {
            return KSum::new();
        }
        KSum {
            terms: self.terms.iter().map(|(g, v)| (g.clone(), v * c)).collect(),
        }
    }

    pub fn coeff(&self, g: &KGraph) -> Option<&Rat> {
        self.terms.get(g)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&KGraph, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(n, k)` shared by all terms; error when mixed, None when empty.
    pub fn homogeneous_type(&self) -> Result<Option<(u8, u8)>> {
        let mut t: Option<(u8, u8)> = None;
        for (g, _) in &self.terms {
            match t {
                None => t = Some((g.n, g.k)),
                Some(prev) if prev == (g.n, g.k) => {}
                Some(prev) => {
                    return Err(Error::Inhomogeneous(format!(
                        "sum mixes types ({},{}) and ({},{})",
                        prev.0, prev.1, g.n, g.k
                    )))
                }
            }
        }
        Ok(t)
    }

    /// If `other == r · self` for one rational `r`, return `r`.
    pub fn proportionality(&self, other: &KSum) -> Option<Rat> {
        if self.is_empty() && other.is_empty() {
            return Some(Rat::from_integer(1.into()));
        }
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let mut ratio: Option<Rat> = None;
        for (g, c) in &self.terms {
            let oc = other.terms.get(g)?;
            let r = oc / c;
            match &ratio {
                None => ratio = Some(r),
                Some(prev) if *prev == r => {}
                _ => return None,
            }
        }
        ratio
    }
}

/// Sink alternation (sum over all n! sink permutations with parity signs).
/// Satisfies alt(alt(s)) = n!·alt(s).
pub fn alt(s: &KSum) -> Result<KSum> {
    let (n, _) = match s.homogeneous_type()? {
        Some(t) => t,
        None => return Ok(KSum::new()),
    };
    let mut out = KSum::new();
    let mut cache = NfCache::new();
    for perm in (0..n).permutations(n as usize) {
        // parity of the permutation via inversion count
        let mut inv = 0;
        for i in 0..perm.len() {
            for j in i + 1..perm.len() {
                if perm[i] > perm[j] {
                    inv += 1;
                }
            }
        }
        let sign = if inv % 2 == 1 {
            -Rat::from_integer(1.into())
        } else {
            Rat::from_integer(1.into())
        };
        for (g, c) in s.terms() {
            out.add_cached(&mut cache, &g.retarget_sinks(&perm), c * &sign);
        }
    }
    Ok(out)
}

// ---- text codec -----------------------------------------------------------
//
// One graph per line: `n k s  t1 t2 ... t_{2k}` with an optional trailing
// rational coefficient in sum files; `#` starts a comment.

/// Parse `n k s  targets...` (no coefficient).
pub fn decode(line: &str) -> Result<SignedKGraph> {
    let (sg, c, extra) = parse_prefix(line)?;
    if c.is_some() || extra {
        return Err(Error::Parse(format!(
            "expected exactly {} tokens on `{line}`",
            3 + 2 * sg.graph.k as usize
        )));
    }
    Ok(sg)
}

fn parse_prefix(line: &str) -> Result<(SignedKGraph, Option<Rat>, bool)> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() < 3 {
        return Err(Error::Parse(format!("short graph line `{line}`")));
    }
    let n: u8 = toks[0]
        .parse()
        .map_err(|_| Error::Parse(format!("bad sink count `{}`", toks[0])))?;
    let k: u8 = toks[1]
        .parse()
        .map_err(|_| Error::Parse(format!("bad internal count `{}`", toks[1])))?;
    let sign: i8 = match toks[2] {
        "1" | "+1" => 1,
        "-1" => -1,
        "0" => 0,
        t => return Err(Error::Parse(format!("bad sign token `{t}`"))),
    };
    let need = 2 * k as usize;
    if toks.len() < 3 + need {
        return Err(Error::Parse(format!(
            "expected {} target tokens, got {}",
            need,
            toks.len() - 3
        )));
    }
    let mut targets = Vec::with_capacity(k as usize);
    for i in 0..k as usize {
        let a: u8 = toks[3 + 2 * i]
            .parse()
            .map_err(|_| Error::Parse(format!("bad target `{}`", toks[3 + 2 * i])))?;
        let b: u8 = toks[4 + 2 * i]
            .parse()
            .map_err(|_| Error::Parse(format!("bad target `{}`", toks[4 + 2 * i])))?;
        targets.push((a, b));
    }
    let graph = KGraph::new(n, k, targets)?;
    let rest = &toks[3 + need..];
    let (coeff, extra) = match rest.len() {
        0 => (None, false),
        1 => (Some(rat::parse_rat(rest[0])?), false),
        _ => (None, true),
    };
    Ok((SignedKGraph { graph, sign }, coeff, extra))
}

pub fn encode(sg: &SignedKGraph) -> String {
    let mut out = format!("{} {} {} ", sg.graph.n, sg.graph.k, sg.sign);
    for &(a, b) in &sg.graph.targets {
        out.push_str(&format!(" {a} {b}"));
    }
    out
}

/// Parse one `n k s  targets  [coeff]` line into a graph and coefficient
/// (default 1); the sign is folded into the coefficient by the caller.
pub fn parse_kgraph_line(line: &str) -> Result<(SignedKGraph, Rat)> {
    let (sg, c, extra) = parse_prefix(line)?;
    if extra {
        return Err(Error::Parse(format!("trailing tokens on `{line}`")));
    }
    Ok((sg, c.unwrap_or_else(|| Rat::from_integer(1.into()))))
}

/// Parse a whole sum document into reduced normal form.
pub fn parse_ksum(text: &str) -> Result<KSum> {
    let mut s = KSum::new();
    for raw in text.lines() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let (sg, c) = parse_kgraph_line(line)?;
        if sg.sign == 0 {
            continue;
        }
        let c = if sg.sign < 0 { -c } else { c };
        s.add(&sg.graph, c);
    }
    Ok(s)
}

pub fn format_ksum(s: &KSum) -> String {
    let mut out = String::new();
    for (g, c) in s.terms() {
        out.push_str(&encode(&SignedKGraph {
            graph: g.clone(),
            sign: 1,
        }));
        out.push_str(&format!("  {}\n", rat::format_rat(c)));
    }
    out
}
