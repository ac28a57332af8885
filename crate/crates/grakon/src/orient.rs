//! Orientation of non-oriented graphs into Kontsevich graphs on two sinks:
//! pick a base pair a ≤ b sending one edge to each sink, then direct the
//! remaining edges so that every internal vertex ends with out-degree
//! exactly 2 — forced moves first, branching where nothing is forced.
//! L/R slots inherit the wedge order of E(γ).

use crate::error::Result;
use crate::kgraph::{self, KGraph, KSum, SignedKGraph};
use crate::linalg::Rref;
use crate::rat::{rat, Rat};
use crate::undirected::{GraphSum, UGraph};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Partial orientation of γ extended by the two sink edges. Per vertex,
/// `hdeg` counts the arrowheads issued from it (sink edges included) and
/// `fdeg` its still non-oriented edges, so H/T/F of the draft are implicit;
/// `touched` records attachment to at least one oriented edge.
#[derive(Clone)]
struct OrientationState {
    /// per edge of E(γ): 0 undecided, 1 directed lo→hi, 2 directed hi→lo
    dir: Vec<u8>,
    hdeg: Vec<u8>,
    fdeg: Vec<u8>,
    touched: Vec<bool>,
    undecided: usize,
}

/// Direct edge `e` away from `tail`; false when that lifts the tail above
/// out-degree 2.
fn direct_edge(g: &UGraph, st: &mut OrientationState, e: usize, tail: u8) -> bool {
    let (lo, hi) = g.edges[e];
    debug_assert_eq!(st.dir[e], 0);
    st.dir[e] = if tail == lo { 1 } else { 2 };
    st.fdeg[lo as usize] -= 1;
    st.fdeg[hi as usize] -= 1;
    st.touched[lo as usize] = true;
    st.touched[hi as usize] = true;
    st.undecided -= 1;
    st.hdeg[tail as usize] += 1;
    st.hdeg[tail as usize] <= 2
}

/// Forced-move closure: a vertex with two arrowheads pulls every remaining
/// edge inward; a vertex whose missing arrowheads equal its non-oriented
/// edges pushes them all outward. Repeats until nothing changes. False =
/// contradiction (out-degree 2 is no longer reachable at some vertex).
fn propagate(g: &UGraph, adj: &[Vec<usize>], st: &mut OrientationState) -> bool {
    loop {
        let mut changed = false;
        for v in 1..=g.k {
            let vi = v as usize;
            if st.hdeg[vi] + st.fdeg[vi] < 2 {
                return false;
            }
            if st.fdeg[vi] == 0 {
                continue;
            }
            if st.hdeg[vi] == 2 {
                for &e in &adj[vi] {
                    if st.dir[e] == 0 {
                        let (lo, hi) = g.edges[e];
                        let w = if lo == v { hi } else { lo };
                        if !direct_edge(g, st, e, w) {
                            return false;
                        }
                    }
                }
                changed = true;
            } else if st.hdeg[vi] + st.fdeg[vi] == 2 {
                for &e in &adj[vi] {
                    if st.dir[e] == 0 && !direct_edge(g, st, e, v) {
                        return false;
                    }
                }
                changed = true;
            }
        }
        if !changed {
            return true;
        }
    }
}

/// Read off the Kontsevich encoding of a fully oriented draft: vertex v of
/// γ becomes internal vertex v+1; its (L,R) targets are the heads of its
/// outgoing edges in E(γ)-order, sink targets (0 before 1) filling the
/// slots left free.
fn emit(g: &UGraph, adj: &[Vec<usize>], st: &OrientationState, a: u8, b: u8) -> KGraph {
    let mut targets = Vec::with_capacity(g.k as usize);
    for v in 1..=g.k {
        let mut outs: Vec<u8> = Vec::with_capacity(2);
        for &e in &adj[v as usize] {
            let (lo, hi) = g.edges[e];
            let head = match st.dir[e] {
                1 if lo == v => hi,
                2 if hi == v => lo,
                _ => continue,
            };
            outs.push(head + 1);
        }
        if v == a {
            outs.push(0);
        }
        if v == b {
            outs.push(1);
        }
        debug_assert_eq!(outs.len(), 2);
        targets.push((outs[0], outs[1]));
    }
    KGraph {
        n: 2,
        k: g.k,
        targets,
    }
}

/// All fully oriented drafts for one base pair, in deterministic DFS order.
fn drafts_for_base(g: &UGraph, adj: &[Vec<usize>], a: u8, b: u8) -> Vec<KGraph> {
    let mut st = OrientationState {
        dir: vec![0; g.edges.len()],
        hdeg: vec![0; g.k as usize + 1],
        fdeg: g.degrees().iter().map(|&d| d as u8).collect(),
        touched: vec![false; g.k as usize + 1],
        undecided: g.edges.len(),
    };
    st.hdeg[a as usize] += 1;
    st.hdeg[b as usize] += 1;
    st.touched[a as usize] = true;
    st.touched[b as usize] = true;
    let mut out = Vec::new();
    dfs(g, adj, st, a, b, &mut out);
    out
}

fn dfs(
    g: &UGraph,
    adj: &[Vec<usize>],
    mut st: OrientationState,
    a: u8,
    b: u8,
    out: &mut Vec<KGraph>,
) {
    if !propagate(g, adj, &mut st) {
        return;
    }
    if st.undecided == 0 {
        out.push(emit(g, adj, &st, a, b));
        return;
    }
    // Branch at the smallest vertex that still has non-oriented edges,
    // preferring one already attached to an oriented edge (a connected
    // graph always offers such a vertex; the fallback keeps disconnected
    // inputs complete instead of silently dropping branches).
    let v = (1..=g.k)
        .filter(|&v| st.fdeg[v as usize] > 0)
        .min_by_key(|&v| (!st.touched[v as usize], v))
        .expect("undecided edges have endpoints");
    let vi = v as usize;
    let free: Vec<usize> = adj[vi].iter().copied().filter(|&e| st.dir[e] == 0).collect();
    if st.hdeg[vi] == 1 {
        // exactly one more arrow must leave v: try every non-oriented edge
        for &e in &free {
            let mut child = st.clone();
            if direct_edge(g, &mut child, e, v) {
                dfs(g, adj, child, a, b, out);
            }
        }
    } else {
        // no arrow leaves v yet: every ordered pair of distinct
        // non-oriented edges becomes the two heads; both orders give the
        // same draft and collapse in the normal-form dedup
        for &e1 in &free {
            for &e2 in &free {
                if e1 == e2 {
                    continue;
                }
                let mut child = st.clone();
                if direct_edge(g, &mut child, e1, v) && direct_edge(g, &mut child, e2, v) {
                    dfs(g, adj, child, a, b, out);
                }
            }
        }
    }
}

/// All admissible orientations of `γ` as Kontsevich graphs on two sinks:
/// one entry per normal-form class over every base pair a ≤ b, sorted;
/// sign 1 marks a usable class, sign 0 a zero graph. Vertex v of γ becomes
/// internal vertex v+1.
pub fn orient(g: &UGraph) -> Result<Vec<SignedKGraph>> {
    g.validate()?;
    // out-degrees sum to 2k while the sinks absorb 2 of them, so only
    // graphs with exactly 2k−2 own edges orient at all
    if g.edge_count() + 2 != 2 * g.k as usize {
        return Ok(Vec::new());
    }
    let mut adj = vec![Vec::new(); g.k as usize + 1];
    for (i, &(lo, hi)) in g.edges.iter().enumerate() {
        adj[lo as usize].push(i);
        adj[hi as usize].push(i);
    }
    let bases: Vec<(u8, u8)> = (1..=g.k)
        .flat_map(|a| (a..=g.k).map(move |b| (a, b)))
        .collect();
    let per_base: Vec<Vec<SignedKGraph>> = bases
        .par_iter()
        .map(|&(a, b)| {
            drafts_for_base(g, &adj, a, b)
                .into_iter()
                .map(|enc| {
                    let nf = kgraph::nf_unchecked(&enc, 1);
                    SignedKGraph {
                        graph: nf.graph,
                        sign: i8::from(nf.sign != 0),
                    }
                })
                .collect()
        })
        .collect();
    let mut classes: BTreeMap<KGraph, i8> = BTreeMap::new();
    for list in per_base {
        for sg in list {
            classes.entry(sg.graph).or_insert(sg.sign);
        }
    }
    Ok(classes
        .into_iter()
        .map(|(graph, sign)| SignedKGraph { graph, sign })
        .collect())
}

/// Union of `orient` over the support of a sum, one entry per class. The
/// input coefficients play no role: downstream only the span matters, and
/// the factorization solve fixes all weights.
pub fn orient_sum(s: &GraphSum) -> Result<Vec<SignedKGraph>> {
    let mut classes: BTreeMap<KGraph, i8> = BTreeMap::new();
    for (g, _) in s.terms() {
        for sg in orient(g)? {
            classes.entry(sg.graph).or_insert(sg.sign);
        }
    }
    Ok(classes
        .into_iter()
        .map(|(graph, sign)| SignedKGraph { graph, sign })
        .collect())
}

/// Independent alternated sums spanning Alt of the given orientation
/// classes: nonzero classes are alternated in normal-form order and
/// echelon-filtered, so the length of the result is the skew span
/// dimension.
pub fn skew_span(classes: &[SignedKGraph]) -> Result<Vec<KSum>> {
    let mut cols: BTreeMap<KGraph, usize> = BTreeMap::new();
    let mut rref = Rref::new();
    let mut basis = Vec::new();
    for sg in classes {
        if sg.sign == 0 {
            continue;
        }
        let mut s = KSum::new();
        s.add(&sg.graph, rat(1));
        let alted = kgraph::alt(&s)?;
        if alted.is_empty() {
            continue;
        }
        let mut row: Vec<(usize, Rat)> = alted
            .terms()
            .map(|(g, c)| {
                let next = cols.len();
                (*cols.entry(g.clone()).or_insert(next), c.clone())
            })
            .collect();
        row.sort_by_key(|&(c, _)| c);
        if rref.push_row(row) {
            basis.push(alted);
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{pentagon_wheel_cocycle, single_vertex, stick, tetrahedron};
    use crate::kgraph::{decode, normal_form};
    use crate::multivec::tetrahedral_flow;
    use crate::undirected::enumerate_undirected;

    fn tetra_graph() -> UGraph {
        tetrahedron().terms().next().unwrap().0.clone()
    }

    #[test]
    fn the_single_vertex_orients_to_the_wedge() {
        let out = orient(&single_vertex()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].graph, KGraph::new(2, 1, vec![(0, 1)]).unwrap());
        assert_eq!(out[0].sign, 1);
        assert_eq!(skew_span(&out).unwrap().len(), 1);
    }

    #[test]
    fn the_stick_admits_no_orientation() {
        // one own edge plus two sink edges cannot feed 2·2 arrow tails
        assert!(orient(&stick()).unwrap().is_empty());
    }

    #[test]
    fn tetrahedron_orientations_contain_the_flow_graphs() {
        let out = orient(&tetra_graph()).unwrap();
        for line in [
            "2 4 1  0 1 2 4 2 5 2 3",
            "2 4 1  0 3 1 4 2 5 2 3",
            "2 4 1  0 3 4 5 1 2 2 4",
        ] {
            let nf = normal_form(&decode(line).unwrap()).unwrap();
            let found = out.iter().find(|c| c.graph == nf.graph);
            assert!(found.is_some(), "missing {line}");
            assert_ne!(found.unwrap().sign, 0, "flow graph flagged zero: {line}");
        }
    }

    #[test]
    fn output_graphs_are_kontsevich_type() {
        let out = orient(&tetra_graph()).unwrap();
        assert!(!out.is_empty());
        for sg in &out {
            sg.graph.validate().unwrap();
            let indeg = sg.graph.in_degrees();
            assert!(indeg[0] >= 1 && indeg[1] >= 1);
        }
    }

    #[test]
    fn pentagon_wheel_cocycle_orientations_have_skew_rank_ninety_one() {
        // the wheel contributes 24 classes of skew rank 15, its partner 89
        // of skew rank 76; alternation only reshuffles sinks, the internal
        // skeleton still tells the two source graphs apart, so the spans
        // meet in 0 and the union has rank 15 + 76 = 91
        let fix = pentagon_wheel_cocycle();
        let mut per_graph = Vec::new();
        for (g, _) in fix.terms() {
            let classes = orient(g).unwrap();
            per_graph.push((classes.len(), skew_span(&classes).unwrap().len()));
        }
        per_graph.sort_unstable();
        assert_eq!(per_graph, [(24, 15), (89, 76)]);
        let classes = orient_sum(&fix).unwrap();
        assert_eq!(classes.len(), 113);
        assert!(classes.iter().all(|c| c.sign != 0));
        assert_eq!(skew_span(&classes).unwrap().len(), 91);
    }

    /// Sign of the permutation taking the reference edge order
    /// [E(γ), a→0, b→1] to the draft's slot order (v1.L, v1.R, …, vk.R).
    fn slot_permutation_sign(g: &UGraph, draft: &KGraph) -> i8 {
        let ne = g.edges.len();
        let mut perm = Vec::with_capacity(ne + 2);
        for v in 1..=g.k {
            let (t0, t1) = draft.targets[v as usize - 1];
            for t in [t0, t1] {
                perm.push(match t {
                    0 => ne,
                    1 => ne + 1,
                    h => {
                        let w = h - 1;
                        let e = (v.min(w), v.max(w));
                        g.edges.iter().position(|&p| p == e).unwrap()
                    }
                });
            }
        }
        let mut sign = 1i8;
        for i in 0..perm.len() {
            for j in i + 1..perm.len() {
                if perm[i] > perm[j] {
                    sign = -sign;
                }
            }
        }
        sign
    }

    #[test]
    fn wedge_position_weights_assemble_the_tetrahedral_flow() {
        // summing the drafts of every ordered base pair with slot-permutation
        // signs (times normal-form transport) needs no solve: the tetrahedron
        // lands right on its flow
        let g = tetra_graph();
        let mut adj = vec![Vec::new(); g.k as usize + 1];
        for (i, &(lo, hi)) in g.edges.iter().enumerate() {
            adj[lo as usize].push(i);
            adj[hi as usize].push(i);
        }
        let mut sum = KSum::new();
        for a in 1..=g.k {
            for b in 1..=g.k {
                for draft in drafts_for_base(&g, &adj, a, b) {
                    let nf = kgraph::nf_unchecked(&draft, slot_permutation_sign(&g, &draft));
                    if nf.sign != 0 {
                        sum.add(&nf.graph, rat(nf.sign as i64));
                    }
                }
            }
        }
        assert_eq!(sum.terms().count(), 3);
        let ratio = tetrahedral_flow()
            .into_sum()
            .proportionality(&sum)
            .expect("orientation sum is not proportional to the flow");
        assert_ne!(ratio, rat(0));
    }

    /// Every direction assignment of E(γ) for every base pair, kept when
    /// all out-degrees land on 2, reduced to flagged normal-form classes.
    fn brute_orient(g: &UGraph) -> Vec<SignedKGraph> {
        let e = g.edge_count();
        let mut classes: BTreeMap<KGraph, i8> = BTreeMap::new();
        for a in 1..=g.k {
            for b in a..=g.k {
                for mask in 0u32..1 << e {
                    let mut outs: Vec<Vec<u8>> = vec![Vec::new(); g.k as usize + 1];
                    for (i, &(lo, hi)) in g.edges.iter().enumerate() {
                        if mask >> i & 1 == 0 {
                            outs[lo as usize].push(hi + 1);
                        } else {
                            outs[hi as usize].push(lo + 1);
                        }
                    }
                    outs[a as usize].push(0);
                    outs[b as usize].push(1);
                    if (1..=g.k).any(|v| outs[v as usize].len() != 2) {
                        continue;
                    }
                    let enc = KGraph {
                        n: 2,
                        k: g.k,
                        targets: (1..=g.k)
                            .map(|v| (outs[v as usize][0], outs[v as usize][1]))
                            .collect(),
                    };
                    let nf = kgraph::nf_unchecked(&enc, 1);
                    classes
                        .entry(nf.graph)
                        .or_insert(i8::from(nf.sign != 0));
                }
            }
        }
        classes
            .into_iter()
            .map(|(graph, sign)| SignedKGraph { graph, sign })
            .collect()
    }

    #[test]
    fn brute_force_direction_assignments_agree_up_to_four_vertices() {
        for k in 1..=4u8 {
            let max_e = k as usize * (k as usize - 1) / 2;
            for e in 0..=max_e {
                for sg in enumerate_undirected(k, e, 0, false) {
                    let g = &sg.graph;
                    assert_eq!(orient(g).unwrap(), brute_orient(g), "k={k} e={e}");
                }
            }
        }
    }

    #[test]
    fn emitted_orientations_survive_re_propagation() {
        for src in [tetrahedron(), pentagon_wheel_cocycle()] {
            for (g, _) in src.terms() {
                let mut adj = vec![Vec::new(); g.k as usize + 1];
                for (i, &(lo, hi)) in g.edges.iter().enumerate() {
                    adj[lo as usize].push(i);
                    adj[hi as usize].push(i);
                }
                for a in 1..=g.k {
                    for b in a..=g.k {
                        for draft in drafts_for_base(g, &adj, a, b) {
                            let mut st = OrientationState {
                                dir: vec![0; g.edges.len()],
                                hdeg: vec![0; g.k as usize + 1],
                                fdeg: g.degrees().iter().map(|&d| d as u8).collect(),
                                touched: vec![false; g.k as usize + 1],
                                undecided: g.edges.len(),
                            };
                            st.hdeg[a as usize] += 1;
                            st.hdeg[b as usize] += 1;
                            for (i, &(lo, hi)) in g.edges.iter().enumerate() {
                                let lo_outs = draft.targets[lo as usize - 1];
                                let tail = if lo_outs.0 == hi + 1 || lo_outs.1 == hi + 1 {
                                    lo
                                } else {
                                    hi
                                };
                                assert!(direct_edge(g, &mut st, i, tail));
                            }
                            assert!(propagate(g, &adj, &mut st));
                            assert_eq!(emit(g, &adj, &st, a, b), draft);
                        }
                    }
                }
            }
        }
    }
}
