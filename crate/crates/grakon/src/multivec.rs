//! Multivectors encoded by Kontsevich graphs: exactly one arrow into each
//! sink, totally skew in the sink contents. Provides the wedge P, the
//! Jacobiator, the Schouten bracket, and generators of 1-, 2-, 3-vectors.

use crate::error::{Error, Result};
use crate::kgraph::{self, alt, KGraph, KSum, NfCache};
use crate::rat::{factorial, rat, Rat};
use std::collections::BTreeSet;

/// Kontsevich-graph sum with per-sink in-degree exactly 1 in every term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multivector {
    sum: KSum,
}

impl Multivector {
    pub fn new(sum: KSum) -> Result<Self> {
        for (g, _) in sum.terms() {
            let d = g.in_degrees();
            for s in 0..g.n as usize {
                if d[s] != 1 {
                    return Err(Error::NotMultivector(format!(
                        "sink {s} has in-degree {} in {}",
                        d[s],
                        kgraph::encode(&kgraph::SignedKGraph {
                            graph: g.clone(),
                            sign: 1
                        })
                    )));
                }
            }
        }
        Ok(Multivector { sum })
    }

    pub fn empty() -> Self {
        Multivector { sum: KSum::new() }
    }

    pub fn sum(&self) -> &KSum {
        &self.sum
    }

    pub fn into_sum(self) -> KSum {
        self.sum
    }

    /// `(n, k)` of the terms, None when empty.
    pub fn arity(&self) -> Result<Option<(u8, u8)>> {
        self.sum.homogeneous_type()
    }

    pub fn is_empty(&self) -> bool {
        self.sum.is_empty()
    }

    pub fn scaled(&self, c: &Rat) -> Multivector {
        Multivector {
            sum: self.sum.scaled(c),
        }
    }

    pub fn add(&mut self, other: &Multivector) {
        self.sum.add_sum(&other.sum);
    }

    /// Total skew-symmetry: alt(s) = n!·s.
    pub fn is_skew(&self) -> Result<bool> {
        let n = match self.arity()? {
            Some((n, _)) => n,
            None => return Ok(true),
        };
        Ok(alt(&self.sum)? == self.sum.scaled(&factorial(n as usize)))
    }
}

/// The wedge: the unique (2,1) multivector graph, P = x ∧ y.
pub fn wedge() -> Multivector {
    let g = KGraph::new(2, 1, vec![(0, 1)]).unwrap();
    let mut s = KSum::new();
    s.add(&g, rat(1));
    Multivector::new(s).unwrap()
}

/// Left-hand side of the Jacobi identity as a skew (3,2) graph sum.
pub fn jacobiator() -> Multivector {
    let mut s = KSum::new();
    for (line, c) in [
        ("3 2 1  0 1 3 2", 1),
        ("3 2 1  0 2 3 1", -1),
        ("3 2 1  1 2 0 3", -1),
    ] {
        let sg = kgraph::decode(line).unwrap();
        s.add(&sg.graph, rat(c));
    }
    Multivector::new(s).unwrap()
}

/// The flow obtained by orienting the tetrahedron: the three-term (2,4)
/// bi-vector with coefficients (1, -3, -3).
pub fn tetrahedral_flow() -> Multivector {
    let mut s = KSum::new();
    for (line, c) in [
        ("2 4 1  0 1 2 4 2 5 2 3", 1),
        ("2 4 1  0 3 1 4 2 5 2 3", -3),
        ("2 4 1  0 3 4 5 1 2 2 4", -3),
    ] {
        let sg = kgraph::decode(line).unwrap();
        s.add(&sg.graph, rat(c));
    }
    Multivector::new(s).unwrap()
}

/// Insert every term of `b` into sink 0 of every term of `a`, redirecting
/// the unique in-edge of that sink across all of b's vertices (Leibniz
/// rule). Sinks of the composite: b's sinks first, then a's remaining ones.
fn compose(a: &KSum, b: &KSum, pa: u8, qb: u8) -> KSum {
    let mut out = KSum::new();
    let mut cache = NfCache::new();
    let n_res = pa + qb - 1;
    for (ga, ca) in a.terms() {
        let ka = ga.k;
        // position of the unique arrow into a's sink 0
        let (host, slot) = ga
            .targets
            .iter()
            .enumerate()
            .find_map(|(i, &(l, r))| {
                if l == 0 {
                    Some((i, 0))
                } else if r == 0 {
                    Some((i, 1))
                } else {
                    None
                }
            })
            .expect("multivector invariant: sink 0 has one in-edge");
        for (gb, cb) in b.terms() {
            let kb = gb.k;
            let map_b = |t: u8| if t < qb { t } else { n_res + (t - qb) };
            let map_a = |t: u8| {
                if t < pa {
                    // t == 0 is redirected separately
                    qb - 1 + t
                } else {
                    n_res + kb + (t - pa)
                }
            };
            let mut targets = Vec::with_capacity((ka + kb) as usize);
            for &(l, r) in &gb.targets {
                targets.push((map_b(l), map_b(r)));
            }
            for &(l, r) in &ga.targets {
                targets.push((map_a(l), map_a(r)));
            }
            let c = ca * cb;
            // redirect across b's sinks and internal vertices
            for w in (0..qb).chain(n_res..n_res + kb) {
                let mut t = targets.clone();
                let idx = kb as usize + host;
                if slot == 0 {
                    t[idx].0 = w;
                } else {
                    t[idx].1 = w;
                }
                let g = KGraph {
                    n: n_res,
                    k: ka + kb,
                    targets: t,
                };
                debug_assert!(g.validate().is_ok());
                out.add_cached(&mut cache, &g, c.clone());
            }
        }
    }
    out
}

/// Graded Schouten bracket of a p-vector and a q-vector, a (p+q−1)-vector.
/// Normalized so that ⟦P, P⟧ = 2·jacobiator; graded antisymmetry
/// ⟦A,B⟧ = −(−1)^{(p−1)(q−1)}⟦B,A⟧ holds by construction.
pub fn schouten_bracket(a: &Multivector, b: &Multivector) -> Result<Multivector> {
    let (pa, _) = match a.arity()? {
        Some(t) => t,
        None => return Ok(Multivector::empty()),
    };
    let (qb, _) = match b.arity()? {
        Some(t) => t,
        None => return Ok(Multivector::empty()),
    };
    let p = pa as usize;
    let q = qb as usize;
    let ab = alt(&compose(a.sum(), b.sum(), pa, qb))?;
    let ba = alt(&compose(b.sum(), a.sum(), qb, pa))?;
    let c1 = factorial(q) * factorial(p - 1);
    let c2 = factorial(p) * factorial(q - 1);
    let sign = if (p - 1) * (q - 1) % 2 == 1 {
        rat(1)
    } else {
        rat(-1)
    };
    let mut s = ab.scaled(&(rat(1) / c1));
    s.add_sum(&ba.scaled(&(sign / c2)));
    Multivector::new(s)
}

/// All normal-form classes of (n,k) Kontsevich graphs (eyes allowed,
/// tadpoles excluded, no in-degree restriction), one representative per
/// class including zero graphs.
fn all_kgraphs(n: u8, k: u8) -> Vec<KGraph> {
    kgraph::enumerate_classes(n, k, false)
}

/// Scale so the least graph in the support has coefficient 1; canonical
/// representative of a skew sum up to proportionality.
fn normalize_leading(s: &KSum) -> KSum {
    match s.terms().next() {
        None => KSum::new(),
        Some((_, c)) => s.scaled(&(rat(1) / c.clone())),
    }
}

fn push_unique(out: &mut Vec<Multivector>, seen: &mut BTreeSet<String>, s: KSum) {
    if s.is_empty() {
        return;
    }
    let norm = normalize_leading(&s);
    let key = kgraph::format_ksum(&norm);
    if seen.insert(key) {
        out.push(Multivector::new(norm).expect("generator output is a multivector"));
    }
}

/// All (1,k) multivector graphs: every sink in-degree 1 class, normal-form
/// keyed and duplicate-free. Built by promoting the sink of every (1,k−1)
/// graph to an internal vertex aiming at a fresh sink.
pub fn gen_one_vectors(k: u8) -> Vec<Multivector> {
    assert!(k >= 1);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for g in all_kgraphs(1, k - 1) {
        // relabel: new sink 0; old sink becomes vertex 1; old internals +1
        let shifted: Vec<(u8, u8)> = g.targets.iter().map(|&(l, r)| (l + 1, r + 1)).collect();
        for w in 2..=k {
            // old sink's pair: fresh sink first, then an old internal vertex
            let mut targets = vec![(0u8, w)];
            targets.extend_from_slice(&shifted);
            let cand = KGraph {
                n: 1,
                k,
                targets,
            };
            debug_assert!(cand.validate().is_ok());
            let mut s = KSum::new();
            s.add(&cand, rat(1));
            push_unique(&mut out, &mut seen, s);
        }
    }
    out
}

/// All skew (2,k) multivector sums: Variant 1 promotes a single sink to an
/// internal vertex targeting both fresh sinks (already skew); Variant 2
/// promotes two sinks, one fresh sink each, alternated afterwards.
pub fn gen_bi_vectors(k: u8) -> Vec<Multivector> {
    assert!(k >= 1);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    // Variant 1
    for g in all_kgraphs(1, k - 1) {
        let shifted: Vec<(u8, u8)> = g.targets.iter().map(|&(l, r)| (l + 2, r + 2)).collect();
        let mut targets = vec![(0u8, 1u8)];
        targets.extend_from_slice(&shifted);
        let cand = KGraph {
            n: 2,
            k,
            targets,
        };
        let mut s = KSum::new();
        s.add(&cand, rat(1));
        push_unique(&mut out, &mut seen, s);
    }
    // Variant 2
    if k >= 2 {
        for g in all_kgraphs(2, k - 2) {
            // old sinks 0,1 become internal vertices 2,3; old internals +2
            let map = |t: u8| t + 2;
            let shifted: Vec<(u8, u8)> = g
                .targets
                .iter()
                .map(|&(l, r)| (map(l), map(r)))
                .collect();
            for w0 in 2..k + 2 {
                if w0 == 2 {
                    continue;
                }
                for w1 in 2..k + 2 {
                    if w1 == 3 {
                        continue;
                    }
                    let mut targets = vec![(0u8, w0), (1u8, w1)];
                    targets.extend_from_slice(&shifted);
                    let cand = KGraph {
                        n: 2,
                        k,
                        targets,
                    };
                    debug_assert!(cand.validate().is_ok());
                    let mut s = KSum::new();
                    s.add(&cand, rat(1));
                    match alt(&s) {
                        Ok(a) => push_unique(&mut out, &mut seen, a),
                        Err(_) => unreachable!(),
                    }
                }
            }
        }
    }
    out
}

/// All skew (3,k) multivector sums; empty for k = 1.
pub fn gen_tri_vectors(k: u8) -> Vec<Multivector> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    if k < 2 {
        return out;
    }
    // Variant 1: one vertex feeds two sinks, another feeds the third
    for g in all_kgraphs(2, k - 2) {
        let map = |t: u8| t + 3;
        let shifted: Vec<(u8, u8)> = g.targets.iter().map(|&(l, r)| (map(l), map(r))).collect();
        for w in 3..k + 3 {
            if w == 4 {
                continue;
            }
            let mut targets = vec![(0u8, 1u8), (2u8, w)];
            targets.extend_from_slice(&shifted);
            let cand = KGraph {
                n: 3,
                k,
                targets,
            };
            debug_assert!(cand.validate().is_ok());
            let mut s = KSum::new();
            s.add(&cand, rat(1));
            push_unique(&mut out, &mut seen, alt(&s).unwrap());
        }
    }
    // Variant 2: three vertices feed one sink each
    if k >= 3 {
        for g in all_kgraphs(3, k - 3) {
            let map = |t: u8| t + 3;
            let shifted: Vec<(u8, u8)> =
                g.targets.iter().map(|&(l, r)| (map(l), map(r))).collect();
            for w0 in 3..k + 3 {
                if w0 == 3 {
                    continue;
                }
                for w1 in 3..k + 3 {
                    if w1 == 4 {
                        continue;
                    }
                    for w2 in 3..k + 3 {
                        if w2 == 5 {
                            continue;
                        }
                        let mut targets = vec![(0u8, w0), (1u8, w1), (2u8, w2)];
                        targets.extend_from_slice(&shifted);
                        let cand = KGraph {
                            n: 3,
                            k,
                            targets,
                        };
                        debug_assert!(cand.validate().is_ok());
                        let mut s = KSum::new();
                        s.add(&cand, rat(1));
                        push_unique(&mut out, &mut seen, alt(&s).unwrap());
                    }
                }
            }
        }
    }
    out
}

/// Brute-force set of skew n-vector classes on k internal vertices:
/// alternate every multivector graph and collect normalized sums.
#[cfg(test)]
fn brute_skew_classes(n: u8, k: u8) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    for g in all_kgraphs(n, k) {
        let d = g.in_degrees();
        if (0..n as usize).any(|s| d[s] != 1) {
            continue;
        }
        let mut s = KSum::new();
        s.add(&g, rat(1));
        if s.is_empty() {
            continue;
        }
        let a = alt(&s).unwrap();
        if a.is_empty() {
            continue;
        }
        seen.insert(kgraph::format_ksum(&normalize_leading(&a)));
    }
    seen
}
