//! Leibniz graphs: Kontsevich graphs carrying one marked internal edge
//! w→v whose endpoints jointly act as a Jacobiator vertex. Expansion,
//! normal forms, exhaustive generation, and the iterative layer search
//! that feeds the factorization solver.

use crate::error::{Error, Result};
use crate::kgraph::{self, alt, KGraph, KSum};
use crate::rat::{rat, Rat};
use itertools::Itertools;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

/// A Kontsevich graph with a marked internal edge w→v. The pair (w, v)
/// stands for one Jacobiator vertex whose three outgoing arrows are v's
/// two targets plus w's remaining target; those three heads must be
/// distinct and must avoid {w, v}. Storage invariant: every edge falling
/// on the Jacobiator points at v, so w has in-degree 0.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct LeibnizGraph {
    pub base: KGraph,
    pub w: u8,
    pub v: u8,
}

impl LeibnizGraph {
    pub fn new(base: KGraph, w: u8, v: u8) -> Result<Self> {
        let l = LeibnizGraph { base, w, v };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let n = self.base.n;
        let total = n + self.base.k;
        for x in [self.w, self.v] {
            if x < n || x >= total {
                return Err(Error::InvalidGraph(format!(
                    "marked edge endpoint {x} is not an internal vertex"
                )));
            }
        }
        if self.w == self.v {
            return Err(Error::InvalidGraph("marked edge is a tadpole".into()));
        }
        let (x, y) = self.base.targets[(self.w - n) as usize];
        if x != self.v && y != self.v {
            return Err(Error::InvalidGraph(format!(
                "marked edge {}->{} is absent from the graph",
                self.w, self.v
            )));
        }
        let (a, b, c) = self.heads();
        if a == b || a == c || b == c || [a, b, c].contains(&self.w) || [a, b, c].contains(&self.v)
        {
            return Err(Error::InvalidGraph(
                "the three Jacobiator targets must be distinct vertices outside the marked pair"
                    .into(),
            ));
        }
        for (i, &(l, r)) in self.base.targets.iter().enumerate() {
            if (l == self.w || r == self.w) && n + i as u8 != self.w {
                return Err(Error::InvalidGraph(
                    "edges falling on the Jacobiator must point at v, not w".into(),
                ));
            }
        }
        Ok(())
    }

    /// The three outgoing targets of the Jacobiator: v's pair followed by
    /// w's non-marked target.
    pub fn heads(&self) -> (u8, u8, u8) {
        let n = self.base.n;
        let (a, b) = self.base.targets[(self.v - n) as usize];
        let (x, y) = self.base.targets[(self.w - n) as usize];
        let c = if x == self.v { y } else { x };
        (a, b, c)
    }

    /// Slots of edges falling on the Jacobiator (pointing at v), excluding
    /// the marked edge itself: (vertex index, right slot?). Skipping all of
    /// w is exact — its only v-slot is the marked edge.
    fn incoming(&self) -> Vec<(usize, bool)> {
        let n = self.base.n;
        let w_idx = (self.w - n) as usize;
        let mut slots = Vec::new();
        for (i, &(l, r)) in self.base.targets.iter().enumerate() {
            if i == w_idx {
                continue;
            }
            if l == self.v {
                slots.push((i, false));
            }
            if r == self.v {
                slots.push((i, true));
            }
        }
        slots
    }
}

/// Unreduced expansion: three cyclic attachments of the heads (a,b,c) to
/// the marked pair, with signs (+,−,−) matching the Jacobiator's three
/// terms, times every distribution of the m Jacobiator-incoming edges over
/// {w, v} — exactly 3·2^m graphs.
pub(crate) fn expand_raw(l: &LeibnizGraph) -> Vec<(KGraph, Rat)> {
    let n = l.base.n;
    let v_idx = (l.v - n) as usize;
    let w_idx = (l.w - n) as usize;
    let (a, b, c) = l.heads();
    let (x, _) = l.base.targets[w_idx];
    let eps: i64 = if x == l.v { 1 } else { -1 };
    let incoming = l.incoming();
    let m = incoming.len();
    let templates = [
        ((a, b), (l.v, c), eps),
        ((a, c), (l.v, b), -eps),
        ((b, c), (a, l.v), -eps),
    ];
    let mut out = Vec::with_capacity(3 << m);
    for (vp, wp, s) in templates {
        for mask in 0u32..1 << m {
            let mut targets = l.base.targets.clone();
            targets[v_idx] = vp;
            targets[w_idx] = wp;
            for (j, &(ui, right)) in incoming.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    let slot = &mut targets[ui];
                    if right {
                        slot.1 = l.w;
                    } else {
                        slot.0 = l.w;
                    }
                }
            }
            out.push((
                KGraph {
                    n,
                    k: l.base.k,
                    targets,
                },
                rat(s),
            ));
        }
    }
    out
}

/// Reduced Kontsevich-graph sum of the Jacobiator expansion.
pub fn expand(l: &LeibnizGraph) -> Result<KSum> {
    l.validate()?;
    let mut s = KSum::new();
    let mut cache = kgraph::NfCache::new();
    for (g, c) in expand_raw(l) {
        s.add_cached(&mut cache, &g, c);
    }
    Ok(s)
}

/// Alternated expansion: the value of the skew Leibniz graph obtained by
/// summing the expansion over all signed sink permutations.
pub fn expand_alt(l: &LeibnizGraph) -> Result<KSum> {
    alt(&expand(l)?)
}

/// Orbit key of a Leibniz graph: the minimal Kontsevich normal form among
/// the three attachment graphs (all Jacobiator-incoming edges kept on v),
/// with the marked edge transported through the minimizing relabeling.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct LeibnizNf {
    pub graph: KGraph,
    pub w: u8,
    pub v: u8,
}

impl LeibnizNf {
    /// The stored representative as a working Leibniz graph.
    pub fn representative(&self) -> LeibnizGraph {
        LeibnizGraph {
            base: self.graph.clone(),
            w: self.w,
            v: self.v,
        }
    }
}

pub fn leibniz_normal_form(l: &LeibnizGraph) -> Result<LeibnizNf> {
    l.validate()?;
    Ok(nf_unvalidated(l))
}

fn nf_unvalidated(l: &LeibnizGraph) -> LeibnizNf {
    nf9_signed(l).0
}

/// Plain normal form plus the sign relating the expansion of `l` to the
/// expansion of the returned representative, 0 when the class is a zero
/// Leibniz graph whose expansion cancels identically. Every single L/R
/// slot swap flips the expansion, so the sign is the slot-swap parity of
/// the minimizing relabeling times the value sign (+, −, +) of the chosen
/// splitting, times the marked-slot sign of `l` itself.
fn nf9_signed(l: &LeibnizGraph) -> (LeibnizNf, i8) {
    let n = l.base.n;
    let v_idx = (l.v - n) as usize;
    let w_idx = (l.w - n) as usize;
    let (a, b, c) = l.heads();
    let eps: i8 = if l.base.targets[w_idx].0 == l.v { 1 } else { -1 };
    let splittings = [
        ((a, b), (l.v, c), 1i8),
        ((a, c), (l.v, b), -1i8),
        ((b, c), (l.v, a), 1i8),
    ];
    let mut best: Option<LeibnizNf> = None;
    // bit 0: the representative carries +1 times the value of l, bit 1: −1
    let mut bits = 0u8;
    for &(vp, wp, s) in &splittings {
        let mut targets = l.base.targets.clone();
        targets[v_idx] = vp;
        targets[w_idx] = wp;
        let g = KGraph {
            n,
            k: l.base.k,
            targets,
        };
        let (graph, w, v, carrier) = kgraph::nf_transport_signed(&g, l.w, l.v);
        let key = LeibnizNf { graph, w, v };
        let cand = if eps * s > 0 {
            carrier
        } else {
            (carrier >> 1 | carrier << 1) & 0b11
        };
        match &best {
            None => {
                best = Some(key);
                bits = cand;
            }
            Some(bk) => match key.cmp(bk) {
                std::cmp::Ordering::Less => {
                    best = Some(key);
                    bits = cand;
                }
                std::cmp::Ordering::Equal => bits |= cand,
                std::cmp::Ordering::Greater => {}
            },
        }
    }
    let sign = match bits {
        0b01 => 1,
        0b10 => -1,
        _ => 0,
    };
    (best.expect("three splittings"), sign)
}

/// Skew orbit key: the minimum of the plain normal forms over all
/// permutations of the sink content, graphs compared before marked edges.
pub fn skew_normal_form(l: &LeibnizGraph) -> Result<LeibnizNf> {
    l.validate()?;
    Ok(skew_nf_and_zero(l).0)
}

/// Skew orbit key together with pointwise vanishing: the class counts as
/// zero when every plain graph in its sink orbit is a zero Leibniz graph,
/// equal to minus itself under the splitting and relabeling
/// identifications. Cancellations happening only across the alternated
/// orbit are deliberately not folded: such a class still occupies a table
/// row even though its expansion contributes nothing.
fn skew_nf_and_zero(l: &LeibnizGraph) -> (LeibnizNf, bool) {
    let n = l.base.n as usize;
    let mut best: Option<LeibnizNf> = None;
    let mut zero = true;
    for perm in (0..n as u8).permutations(n) {
        let (key, s) = nf9_signed(&LeibnizGraph {
            base: l.base.retarget_sinks(&perm),
            w: l.w,
            v: l.v,
        });
        zero &= s == 0;
        match &best {
            None => best = Some(key),
            Some(b) if key < *b => best = Some(key),
            _ => {}
        }
    }
    (best.expect("at least the identity permutation"), zero)
}

/// All Leibniz graphs with k contracted internal vertices (k−1 ordinary
/// plus the Jacobiator) on n sinks, deduplicated by normal form. Built by
/// proclaiming each internal vertex of each (n,k) Kontsevich graph the
/// Jacobiator and attaching its third arrow to every vertex ℓ below the
/// smaller of its two targets — the ℓ < i bound kills the triple count of
/// each unordered head set. With `multivector_only`, only per-sink
/// in-degree-one graphs are kept and ℓ skips the sinks.
pub fn gen_leibniz(k: u8, n: u8, multivector_only: bool) -> Vec<LeibnizNf> {
    assert!(k >= 1 && n >= 1);
    let step1 = kgraph::enumerate_classes(n, k, multivector_only);
    let start = if multivector_only { n } else { 0 };
    let keys: BTreeSet<LeibnizNf> = step1
        .par_iter()
        .map(|g| {
            let mut local = Vec::new();
            for sel in 0..k as usize {
                let (t0, t1) = g.targets[sel];
                if t0 == t1 {
                    continue;
                }
                // relabel so the chosen vertex is the last internal one
                let map = |t: u8| {
                    if t < n {
                        t
                    } else {
                        let m = (t - n) as usize;
                        let m2 = if m == sel {
                            k as usize - 1
                        } else if m > sel {
                            m - 1
                        } else {
                            m
                        };
                        n + m2 as u8
                    }
                };
                let mut targets = vec![(0u8, 0u8); k as usize + 1];
                for (i, &(l, r)) in g.targets.iter().enumerate() {
                    let pos = if i == sel {
                        k as usize - 1
                    } else if i > sel {
                        i - 1
                    } else {
                        i
                    };
                    targets[pos] = (map(l), map(r));
                }
                let v_label = n + k - 1;
                let w_label = n + k;
                let i_min = targets[k as usize - 1].0.min(targets[k as usize - 1].1);
                for ell in start..i_min {
                    let mut t = targets.clone();
                    t[k as usize] = (v_label, ell);
                    let lg = LeibnizGraph::new(
                        KGraph {
                            n,
                            k: k + 1,
                            targets: t,
                        },
                        w_label,
                        v_label,
                    )
                    .expect("generator output is a valid Leibniz graph");
                    local.push(nf_unvalidated(&lg));
                }
            }
            local
        })
        .flatten()
        .collect();
    keys.into_iter().collect()
}

/// Affine expression a₀ + Σᵢ aᵢ·cᵢ over the unknown coefficients of a
/// Leibniz table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affine {
    pub constant: Rat,
    pub lin: BTreeMap<usize, Rat>,
}

impl Affine {
    pub fn zero() -> Self {
        Affine {
            constant: rat(0),
            lin: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rat) -> Self {
        Affine {
            constant: c,
            lin: BTreeMap::new(),
        }
    }

    pub fn add_constant(&mut self, c: &Rat) {
        self.constant += c;
    }

    pub fn add_term(&mut self, idx: usize, c: &Rat) {
        use num::Zero;
        let entry = self.lin.entry(idx).or_insert_with(|| rat(0));
        *entry += c;
        if entry.is_zero() {
            self.lin.remove(&idx);
        }
    }

    pub fn is_zero(&self) -> bool {
        use num::Zero;
        self.constant.is_zero() && self.lin.is_empty()
    }

    /// Value under an assignment of the unknowns; missing indices count
    /// as zero.
    pub fn eval(&self, assignment: &BTreeMap<usize, Rat>) -> Rat {
        let mut acc = self.constant.clone();
        for (idx, c) in &self.lin {
            if let Some(x) = assignment.get(idx) {
                acc += c * x;
            }
        }
        acc
    }
}

/// State of the iterative layer search: the ordered table of skew Leibniz
/// graphs (row i owns unknown cᵢ and its alternated expansion), the
/// running sum S_total = S₀ − Σ cᵢ·expansionᵢ reduced per graph, the
/// cumulative table size after each iteration, and whether a full
/// iteration produced nothing new.
#[derive(Debug)]
pub struct LeibnizLayerState {
    pub table: Vec<(LeibnizNf, KSum)>,
    pub s_total: BTreeMap<KGraph, Affine>,
    pub layer_sizes: Vec<usize>,
    pub stabilized: bool,
}

/// Marked-edge candidates hiding inside a Kontsevich graph: every internal
/// edge w→v with no reverse edge, no second parallel copy, and distinct
/// head triple gives a Leibniz graph after redirecting all remaining
/// in-edges of w to v.
fn contractions(g: &KGraph) -> Vec<LeibnizGraph> {
    let n = g.n;
    let mut out = Vec::new();
    for w_idx in 0..g.k as usize {
        let w_label = n + w_idx as u8;
        let (x, y) = g.targets[w_idx];
        for (v_label, c) in [(x, y), (y, x)] {
            if v_label < n || v_label == c {
                continue; // not an internal edge, or a parallel pair w⇉v
            }
            let v_idx = (v_label - n) as usize;
            let (a, b) = g.targets[v_idx];
            if a == w_label || b == w_label {
                continue; // reverse edge v→w
            }
            if a == b || a == c || b == c || c == w_label {
                continue; // degenerate head triple
            }
            let mut targets = g.targets.clone();
            for (i, slot) in targets.iter_mut().enumerate() {
                if n + i as u8 == w_label {
                    continue;
                }
                if slot.0 == w_label {
                    slot.0 = v_label;
                }
                if slot.1 == w_label {
                    slot.1 = v_label;
                }
            }
            out.push(LeibnizGraph {
                base: KGraph {
                    n,
                    k: g.k,
                    targets,
                },
                w: w_label,
                v: v_label,
            });
        }
    }
    out
}

/// Iterative search for the skew Leibniz graphs underlying a skew sum S₀:
/// each iteration contracts marked edges in the graphs added by the
/// previous one, rows enter the table in sorted order with fresh unknowns,
/// their alternated expansions are subtracted from S_total, and the search
/// stops once an iteration discovers nothing new (or after `max_iter`
/// iterations, reported as unstabilized). Formally zero skew classes are
/// remembered but never occupy a table row.
pub fn iterative_layers(s0: &KSum, max_iter: usize) -> Result<LeibnizLayerState> {
    let mut state = LeibnizLayerState {
        table: Vec::new(),
        s_total: BTreeMap::new(),
        layer_sizes: Vec::new(),
        stabilized: false,
    };
    let (n, _) = match s0.homogeneous_type()? {
        None => {
            state.stabilized = true;
            return Ok(state);
        }
        Some(t) => t,
    };
    if alt(s0)? != s0.scaled(&crate::rat::factorial(n as usize)) {
        return Err(Error::InvalidGraph(
            "iterative layer search requires a skew input sum".into(),
        ));
    }
    for (g, c) in s0.terms() {
        state.s_total.insert(g.clone(), Affine::constant(c.clone()));
    }
    let mut seen: BTreeSet<LeibnizNf> = BTreeSet::new();
    let mut scan: Vec<KGraph> = s0.terms().map(|(g, _)| g.clone()).collect();
    for _ in 0..max_iter {
        let found: Vec<(LeibnizNf, bool)> = scan
            .par_iter()
            .map(|g| {
                contractions(g)
                    .iter()
                    .map(skew_nf_and_zero)
                    .collect::<Vec<_>>()
            })
            .flatten()
            .collect();
        let mut fresh: BTreeMap<LeibnizNf, bool> = BTreeMap::new();
        for (key, zero) in found {
            if !seen.contains(&key) {
                fresh.insert(key, zero);
            }
        }
        if fresh.is_empty() {
            state.stabilized = true;
            state.layer_sizes.push(state.table.len());
            break;
        }
        let rows: Vec<(LeibnizNf, KSum)> = fresh
            .iter()
            .filter(|&(_, zero)| !zero)
            .map(|(key, _)| key.clone())
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|key| {
                let exp = expand_alt(&key.representative()).expect("representative is valid");
                (key, exp)
            })
            .collect();
        seen.extend(fresh.into_keys());
        let mut next_scan: BTreeSet<KGraph> = BTreeSet::new();
        for (key, exp) in rows {
            let idx = state.table.len();
            for (g, c) in exp.terms() {
                next_scan.insert(g.clone());
                state
                    .s_total
                    .entry(g.clone())
                    .or_insert_with(Affine::zero)
                    .add_term(idx, &-c.clone());
            }
            state.table.push((key, exp));
        }
        state.s_total.retain(|_, aff| !aff.is_zero());
        state.layer_sizes.push(state.table.len());
        scan = next_scan.into_iter().collect();
    }
    Ok(state)
}

/// Parse "n k s  t1 … t_2k [coeff] @ w v"; the sign folds into the
/// returned coefficient.
pub fn parse_leibniz_line(line: &str) -> Result<(LeibnizGraph, Rat)> {
    let (left, right) = line
        .split_once('@')
        .ok_or_else(|| Error::Parse("missing '@ w v' marked-edge suffix".into()))?;
    let (sg, coeff) = kgraph::parse_kgraph_line(left.trim())?;
    let marks: Vec<&str> = right.split_whitespace().collect();
    if marks.len() != 2 {
        return Err(Error::Parse(format!(
            "expected two marked-edge labels after '@', got {}",
            marks.len()
        )));
    }
    let w: u8 = marks[0]
        .parse()
        .map_err(|_| Error::Parse(format!("bad vertex label '{}'", marks[0])))?;
    let v: u8 = marks[1]
        .parse()
        .map_err(|_| Error::Parse(format!("bad vertex label '{}'", marks[1])))?;
    let l = LeibnizGraph::new(sg.graph, w, v)?;
    Ok((l, coeff * rat(sg.sign as i64)))
}

pub fn format_leibniz(l: &LeibnizGraph) -> String {
    let sg = kgraph::SignedKGraph {
        graph: l.base.clone(),
        sign: 1,
    };
    format!("{} @ {} {}", kgraph::encode(&sg), l.w, l.v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgraph::{decode, format_ksum, parse_ksum};
    use crate::multivec::{jacobiator, schouten_bracket, tetrahedral_flow, wedge};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn bare_jacobiator() -> LeibnizGraph {
        let base = decode("3 2 1  0 1 3 2").unwrap().graph;
        LeibnizGraph::new(base, 4, 3).unwrap()
    }

    #[test]
    fn bare_jacobiator_expands_to_the_three_jacobiator_terms() {
        let l = bare_jacobiator();
        assert_eq!(expand_raw(&l).len(), 3);
        let e = expand(&l).unwrap();
        assert_eq!(&e, jacobiator().sum());
        // alternation gives 3! copies of the already-skew sum
        let ea = expand_alt(&l).unwrap();
        assert_eq!(e.proportionality(&ea), Some(rat(6)));
    }

    #[test]
    fn expansion_counts_three_times_two_to_the_m() {
        // one extra vertex aiming both arrows at the Jacobiator: m = 2
        let base = decode("3 3 1  0 1 3 2 3 3").unwrap().graph;
        let l = LeibnizGraph::new(base, 4, 3).unwrap();
        assert_eq!(expand_raw(&l).len(), 12);
        // one arrow at the Jacobiator, one at a sink: m = 1
        let base = decode("3 3 1  0 1 3 2 0 3").unwrap().graph;
        let l = LeibnizGraph::new(base, 4, 3).unwrap();
        assert_eq!(expand_raw(&l).len(), 6);
        let e = expand(&l).unwrap();
        assert!(!e.is_empty());
    }

    #[test]
    fn validation_rejects_malformed_marked_edges() {
        let base = decode("3 2 1  0 1 3 2").unwrap().graph;
        // marked edge absent
        assert!(LeibnizGraph::new(base.clone(), 3, 4).is_err());
        // endpoint is a sink
        assert!(LeibnizGraph::new(base.clone(), 4, 0).is_err());
        // heads collide: v targets (0,1), w = (v, 1)
        let collide = decode("3 2 1  0 1 3 1").unwrap().graph;
        assert!(LeibnizGraph::new(collide, 4, 3).is_err());
        // an edge falls on w instead of v
        let onto_w = decode("3 3 1  0 1 3 2 4 0").unwrap().graph;
        assert!(LeibnizGraph::new(onto_w, 4, 3).is_err());
    }

    fn random_storage_graph(rng: &mut ChaCha8Rng) -> LeibnizGraph {
        // (3,4): ordinary internals 3,4 with free pairs avoiding w=6,
        // Jacobiator pair v=5, w=6 with heads below 5
        let mut heads: Vec<u8> = (0..5).collect();
        heads.shuffle(rng);
        let (a, b, c) = (heads[0], heads[1], heads[2]);
        let mut targets = Vec::new();
        for owner in 3u8..5 {
            let mut pick = || loop {
                let t = rng.gen_range(0..6u8);
                if t != owner {
                    return t;
                }
            };
            let pair = (pick(), pick());
            targets.push(pair);
        }
        targets.push((a, b));
        targets.push((5, c));
        let base = KGraph {
            n: 3,
            k: 4,
            targets,
        };
        LeibnizGraph::new(base, 6, 5).expect("construction satisfies the storage invariants")
    }

    #[test]
    fn normal_form_is_invariant_under_relabeling_and_sink_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..40 {
            let l = random_storage_graph(&mut rng);
            let nf = leibniz_normal_form(&l).unwrap();
            let snf = skew_normal_form(&l).unwrap();

            // random internal relabeling + L/R swaps of the storage graph
            let mut sigma: Vec<u8> = (0..4).collect();
            sigma.shuffle(&mut rng);
            let map = |t: u8| if t < 3 { t } else { 3 + sigma[(t - 3) as usize] };
            let mut targets = vec![(0u8, 0u8); 4];
            for (i, &(a, b)) in l.base.targets.iter().enumerate() {
                let pair = if rng.gen() { (map(a), map(b)) } else { (map(b), map(a)) };
                targets[sigma[i] as usize] = pair;
            }
            let relabeled = LeibnizGraph::new(
                KGraph {
                    n: 3,
                    k: 4,
                    targets,
                },
                map(6),
                map(5),
            )
            .unwrap();
            assert_eq!(leibniz_normal_form(&relabeled).unwrap(), nf);
            assert_eq!(skew_normal_form(&relabeled).unwrap(), snf);

            // sink permutations may move the plain normal form but fix the skew one
            let mut perm: Vec<u8> = (0..3).collect();
            perm.shuffle(&mut rng);
            let permuted = LeibnizGraph::new(l.base.retarget_sinks(&perm), 6, 5).unwrap();
            assert_eq!(skew_normal_form(&permuted).unwrap(), snf);
        }
    }

    #[test]
    fn skew_representative_expansion_matches_original_up_to_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let mut seen_nonzero = 0;
        for _ in 0..30 {
            let l = random_storage_graph(&mut rng);
            let mine = expand_alt(&l).unwrap();
            let reps = expand_alt(&skew_normal_form(&l).unwrap().representative()).unwrap();
            if mine.is_empty() {
                assert!(reps.is_empty());
                continue;
            }
            seen_nonzero += 1;
            let ratio = reps.proportionality(&mine).expect("proportional");
            assert!(ratio == rat(1) || ratio == rat(-1));
        }
        assert!(seen_nonzero > 5);
    }

    #[test]
    fn generator_yields_exactly_the_bare_jacobiator_at_k1() {
        let got = gen_leibniz(1, 3, false);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0], leibniz_normal_form(&bare_jacobiator()).unwrap());
        // a multivector-only sweep cannot reach it: the third arrow must
        // fall on a sink
        assert!(gen_leibniz(1, 3, true).is_empty());
    }

    /// Exhaustive storage-form sweep with the marked pair pinned to the two
    /// highest labels, which every class contains by relabeling invariance.
    fn brute_leibniz_classes(multivector_only: bool) -> BTreeSet<LeibnizNf> {
        let mut out = BTreeSet::new();
        // labels: sinks 0..3, ordinary internals 3,4, v=5, w=6
        for a in 0..5u8 {
            for b in 0..5u8 {
                for c in 0..5u8 {
                    if a == b || a == c || b == c {
                        continue;
                    }
                    for t30 in 0..6u8 {
                        for t31 in 0..6u8 {
                            if t30 == 3 || t31 == 3 {
                                continue;
                            }
                            for t40 in 0..6u8 {
                                for t41 in 0..6u8 {
                                    if t40 == 4 || t41 == 4 {
                                        continue;
                                    }
                                    let base = KGraph {
                                        n: 3,
                                        k: 4,
                                        targets: vec![(t30, t31), (t40, t41), (a, b), (5, c)],
                                    };
                                    // the restricted sweep only reaches
                                    // classes whose least head is internal
                                    if multivector_only
                                        && (base.in_degrees()[..3].iter().any(|&d| d != 1)
                                            || a.min(b).min(c) < 3)
                                    {
                                        continue;
                                    }
                                    if let Ok(l) = LeibnizGraph::new(base, 6, 5) {
                                        out.insert(leibniz_normal_form(&l).unwrap());
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn generator_matches_brute_force_at_k3_n3() {
        for multivector_only in [false, true] {
            let gen: BTreeSet<LeibnizNf> =
                gen_leibniz(3, 3, multivector_only).into_iter().collect();
            let brute = brute_leibniz_classes(multivector_only);
            assert_eq!(gen, brute, "multivector_only={multivector_only}");
        }
        // two ordinary internal labels cannot host three distinct internal
        // heads, so the restricted sweep is empty here but not at k=4
        assert!(gen_leibniz(3, 3, true).is_empty());
        assert!(!gen_leibniz(3, 3, false).is_empty());
    }

    #[test]
    fn restricted_generator_is_a_subset_with_internal_heads() {
        let complete: BTreeSet<LeibnizNf> = gen_leibniz(4, 3, false).into_iter().collect();
        let restricted = gen_leibniz(4, 3, true);
        assert!(!restricted.is_empty());
        for key in &restricted {
            assert!(complete.contains(key));
            let rep = key.representative();
            let (a, b, c) = rep.heads();
            assert!(a.min(b).min(c) >= 3);
            assert!(rep.base.in_degrees()[..3].iter().all(|&d| d == 1));
        }
    }

    #[test]
    fn layers_on_the_jacobiator_find_one_leibniz_graph() {
        let state = iterative_layers(jacobiator().sum(), 5).unwrap();
        assert!(state.stabilized);
        assert_eq!(state.table.len(), 1);
        assert_eq!(state.layer_sizes, vec![1, 1]);
        assert_eq!(
            state.table[0].0,
            skew_normal_form(&bare_jacobiator()).unwrap()
        );
        // S_total vanishes under a single consistent value of the unknown
        let aff0 = state.s_total.values().next().unwrap();
        let x = -aff0.constant.clone() / aff0.lin[&0].clone();
        let assignment: BTreeMap<usize, Rat> = [(0, x)].into();
        for aff in state.s_total.values() {
            assert_eq!(aff.eval(&assignment), rat(0));
        }
    }

    #[test]
    fn layers_on_the_tetrahedral_bracket_grow_eleven_then_sixtyone() {
        let s0 = schouten_bracket(&wedge(), &tetrahedral_flow())
            .unwrap()
            .into_sum();
        let state = iterative_layers(&s0, 2).unwrap();
        assert_eq!(state.layer_sizes, vec![11, 61]);
    }

    #[test]
    fn signed_normal_form_tracks_the_expansion_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut nonzero = 0;
        for _ in 0..40 {
            let l = random_storage_graph(&mut rng);
            let (key, sign) = nf9_signed(&l);
            assert_eq!(key, leibniz_normal_form(&l).unwrap());
            let mine = expand(&l).unwrap();
            if sign == 0 {
                assert!(mine.is_empty(), "a zero Leibniz graph must expand to zero");
                continue;
            }
            nonzero += 1;
            let reps = expand(&key.representative()).unwrap();
            assert_eq!(mine, reps.scaled(&rat(sign as i64)));
        }
        assert!(nonzero > 5);
    }

    #[test]
    fn layer_search_rejects_non_skew_input() {
        let s = parse_ksum("3 2 1  0 1 3 2").unwrap();
        assert!(iterative_layers(&s, 3).is_err());
    }

    #[test]
    fn leibniz_codec_round_trips() {
        let l = bare_jacobiator();
        let line = format_leibniz(&l);
        let (back, coeff) = parse_leibniz_line(&line).unwrap();
        assert_eq!(back, l);
        assert_eq!(coeff, rat(1));
        let with_coeff = "3 2 1  0 1 3 2 -7/2 @ 4 3";
        let (back, coeff) = parse_leibniz_line(with_coeff).unwrap();
        assert_eq!(back, l);
        assert_eq!(coeff, crate::rat::ratio(-7, 2));
        assert!(parse_leibniz_line("3 2 1  0 1 3 2").is_err());
        assert!(parse_leibniz_line("3 2 1  0 1 3 2 @ 4").is_err());
        assert!(parse_leibniz_line("3 2 1  0 1 3 2 @ 3 4").is_err());
        let _ = format_ksum(&expand(&l).unwrap());
    }
}
