//! The non-oriented graph complex as a differential graded Lie algebra:
//! vertex insertion, the Lie bracket, the differential d = [•–•, ·],
//! cocycle search on (k, 2k−2), and exactness testing.

use crate::error::{Error, Result};
use crate::linalg::{solve_affine, AffineSolution, RatMatrix};
use crate::rat::Rat;
use crate::undirected::{enumerate_undirected, GraphSum, UGraph};
use num::{One, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// The single edge •–• on two vertices.
pub fn stick() -> UGraph {
    UGraph {
        k: 2,
        edges: vec![(1, 2)],
    }
}

/// The one-vertex, zero-edge graph.
pub fn single_vertex() -> UGraph {
    UGraph { k: 1, edges: vec![] }
}

/// The tetrahedron cocycle: the full graph on 4 vertices, coefficient 1.
pub fn tetrahedron() -> GraphSum {
    let mut s = GraphSum::new();
    s.add(
        &UGraph {
            k: 4,
            edges: vec![(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)],
        },
        Rat::one(),
    );
    s
}

/// The pentagon-wheel cocycle on (6,10): the 5-wheel plus 5/2 times its
/// partner graph.
pub fn pentagon_wheel_cocycle() -> GraphSum {
    let wheel = UGraph {
        k: 6,
        edges: vec![
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 1),
            (1, 6),
            (2, 6),
            (3, 6),
            (4, 6),
            (5, 6),
        ],
    };
    let partner = UGraph {
        k: 6,
        edges: vec![
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 1),
            (4, 5),
            (1, 5),
            (5, 6),
            (3, 6),
            (2, 6),
            (1, 3),
        ],
    };
    let mut s = GraphSum::new();
    s.add(&wheel, Rat::one());
    s.add(&partner, crate::rat::ratio(5, 2));
    s
}

#[inline]
fn norm_pair(a: u8, b: u8) -> (u8, u8) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// All labeled terms of the insertion of `g1` into `g2`, before reduction:
/// for every vertex v of `g2`, replace v by the whole of `g1` and re-attach
/// the edge ends that touched v to vertices of `g1` in all possible ways.
/// Vertex labels run through `g2` until v, then through `g1`, then resume;
/// the edge order of every term is E(g1) followed by E(g2).
pub(crate) fn insert_raw(g1: &UGraph, g2: &UGraph) -> Vec<UGraph> {
    let k1 = g1.k;
    let k = k1 + g2.k - 1;
    let mut out = Vec::new();
    for v in 1..=g2.k {
        let map2 = |w: u8| if w < v { w } else { w + k1 - 1 };
        let map1 = |u: u8| u + v - 1;
        // position of the v-end in each edge touching v (simple graph: one end)
        let touch: Vec<Option<bool>> = g2
            .edges
            .iter()
            .map(|&(a, b)| {
                if a == v {
                    Some(true)
                } else if b == v {
                    Some(false)
                } else {
                    None
                }
            })
            .collect();
        let deg = touch.iter().filter(|t| t.is_some()).count();
        let mut attach = vec![1u8; deg];
        loop {
            let mut edges = Vec::with_capacity(g1.edges.len() + g2.edges.len());
            for &(a, b) in &g1.edges {
                edges.push(norm_pair(map1(a), map1(b)));
            }
            let mut slot = 0;
            for (i, &(a, b)) in g2.edges.iter().enumerate() {
                match touch[i] {
                    Some(v_is_first) => {
                        let other = if v_is_first { b } else { a };
                        edges.push(norm_pair(map1(attach[slot]), map2(other)));
                        slot += 1;
                    }
                    None => edges.push(norm_pair(map2(a), map2(b))),
                }
            }
            out.push(UGraph { k, edges });
            // next attachment map (mixed-radix counter over 1..=k1)
            let mut pos = 0;
            while pos < deg {
                if attach[pos] < k1 {
                    attach[pos] += 1;
                    break;
                }
                attach[pos] = 1;
                pos += 1;
            }
            if pos == deg {
                break;
            }
        }
    }
    out
}

/// Insertion `g1 ∘ g2` of the whole graph `g1` into every vertex of `g2`,
/// reduced to canonical form. `g1` must be connected.
pub fn insert(g1: &UGraph, g2: &UGraph) -> Result<GraphSum> {
    g1.validate()?;
    g2.validate()?;
    if !g1.is_connected() {
        return Err(Error::InvalidGraph(
            "insertion source must be connected".into(),
        ));
    }
    let mut s = GraphSum::new();
    for t in insert_raw(g1, g2) {
        s.add(&t, Rat::one());
    }
    Ok(s)
}

/// Edge count shared by all terms, or an error naming `what` when mixed.
fn homogeneous_edge_count(s: &GraphSum, what: &str) -> Result<Option<usize>> {
    let mut e: Option<usize> = None;
    for (g, _) in s.terms() {
        match e {
            None => e = Some(g.edge_count()),
            Some(prev) if prev == g.edge_count() => {}
            Some(prev) => {
                return Err(Error::Inhomogeneous(format!(
                    "{what} mixes edge counts {prev} and {}",
                    g.edge_count()
                )))
            }
        }
    }
    Ok(e)
}

fn check_connected_terms(s: &GraphSum, what: &str) -> Result<()> {
    for (g, _) in s.terms() {
        if !g.is_connected() {
            return Err(Error::InvalidGraph(format!(
                "{what} must consist of connected graphs"
            )));
        }
    }
    Ok(())
}

/// The graph Lie bracket `[a, b] = a∘b − (−1)^{#E(a)·#E(b)} b∘a`, extended
/// bilinearly. Each argument must be homogeneous in edge count and consist
/// of connected graphs.
pub fn lie_bracket(a: &GraphSum, b: &GraphSum) -> Result<GraphSum> {
    let e1 = homogeneous_edge_count(a, "left bracket argument")?;
    let e2 = homogeneous_edge_count(b, "right bracket argument")?;
    check_connected_terms(a, "left bracket argument")?;
    check_connected_terms(b, "right bracket argument")?;
    let mut out = GraphSum::new();
    let (e1, e2) = match (e1, e2) {
        (Some(x), Some(y)) => (x, y),
        _ => return Ok(out), // bracket with the zero vector
    };
    let swap_sign = if (e1 * e2) % 2 == 1 {
        -Rat::one()
    } else {
        Rat::one()
    };
    for (ga, ca) in a.terms() {
        for (gb, cb) in b.terms() {
            let c = ca * cb;
            for t in insert_raw(ga, gb) {
                out.add(&t, c.clone());
            }
            let c = -(&c * &swap_sign);
            for t in insert_raw(gb, ga) {
                out.add(&t, c.clone());
            }
        }
    }
    Ok(out)
}

/// The graph-complex differential d(γ) = [•–•, γ], applied per homogeneous
/// component; every term gains one vertex and one edge.
pub fn differential(g: &GraphSum) -> Result<GraphSum> {
    let mut stick_sum = GraphSum::new();
    stick_sum.add(&stick(), Rat::one());
    // group by edge count so inhomogeneous sums are differentiated termwise
    let mut groups: BTreeMap<usize, GraphSum> = BTreeMap::new();
    for (gr, c) in g.terms() {
        groups
            .entry(gr.edge_count())
            .or_default()
            .add(gr, c.clone());
    }
    let mut out = GraphSum::new();
    for group in groups.values() {
        out.add_sum(&lie_bracket(&stick_sum, group)?);
    }
    Ok(out)
}

fn unit_sum(g: &UGraph) -> GraphSum {
    let mut s = GraphSum::new();
    s.add(g, Rat::one());
    s
}

/// Basis of ker d inside the span of connected, min-degree-2, nonzero
/// canonical graphs on (k, 2k−2); d lands in the unrestricted target space,
/// so membership in the kernel is genuine.
pub fn cocycle_space(k: u8) -> Result<Vec<GraphSum>> {
    if k < 4 {
        return Err(Error::Dimension(format!(
            "cocycle search needs k >= 4, got {k}"
        )));
    }
    let e = 2 * k as usize - 2;
    let basis: Vec<UGraph> = enumerate_undirected(k, e, 2, true)
        .into_iter()
        .filter(|s| s.sign != 0)
        .map(|s| s.graph)
        .collect();
    if basis.is_empty() {
        return Ok(vec![]);
    }
    let images: Vec<GraphSum> = basis
        .par_iter()
        .map(|g| differential(&unit_sum(g)).expect("basis graphs are connected"))
        .collect();
    let mut rows: BTreeMap<UGraph, Vec<(usize, Rat)>> = BTreeMap::new();
    for (col, image) in images.iter().enumerate() {
        for (target, c) in image.terms() {
            rows.entry(target.clone()).or_default().push((col, c.clone()));
        }
    }
    let mut m = RatMatrix::new(basis.len());
    for row in rows.into_values() {
        m.push_row(row)?;
    }
    let mut out = Vec::new();
    for vec in m.kernel_basis() {
        let mut s = GraphSum::new();
        for (g, c) in basis.iter().zip(vec) {
            s.add(g, c);
        }
        debug_assert!(differential(&s)?.is_empty());
        out.push(s);
    }
    Ok(out)
}

/// True when every edge of `g` lies in at least one triangle. The blow-up
/// performed by d always leaves the freshly inserted edge outside every
/// triangle, so no reduced image of d can touch such a graph.
fn all_edges_in_triangles(g: &UGraph) -> bool {
    let mut adj = vec![0u32; g.k as usize + 1];
    for &(a, b) in &g.edges {
        adj[a as usize] |= 1 << b;
        adj[b as usize] |= 1 << a;
    }
    g.edges
        .iter()
        .all(|&(a, b)| adj[a as usize] & adj[b as usize] != 0)
}

fn is_exact_impl(g: &GraphSum, use_fast_path: bool) -> Result<(bool, Option<GraphSum>)> {
    if g.is_empty() {
        return Ok((true, Some(GraphSum::new())));
    }
    let mut kv: Option<u8> = None;
    for (gr, _) in g.terms() {
        match kv {
            None => kv = Some(gr.k),
            Some(prev) if prev == gr.k => {}
            Some(prev) => {
                return Err(Error::Inhomogeneous(format!(
                    "exactness input mixes vertex counts {prev} and {}",
                    gr.k
                )))
            }
        }
    }
    let k = kv.unwrap();
    let e = homogeneous_edge_count(g, "exactness input")?.unwrap();
    if !differential(g)?.is_empty() {
        return Err(Error::NotCocycle(
            "exactness is only defined for d-cocycles".into(),
        ));
    }
    if use_fast_path && g.terms().any(|(gr, _)| all_edges_in_triangles(gr)) {
        return Ok((false, None));
    }
    if k < 2 || e == 0 {
        return Ok((false, None));
    }
    let witnesses: Vec<UGraph> = enumerate_undirected(k - 1, e - 1, 0, true)
        .into_iter()
        .filter(|s| s.sign != 0)
        .map(|s| s.graph)
        .collect();
    if witnesses.is_empty() {
        return Ok((false, None));
    }
    let images: Vec<GraphSum> = witnesses
        .par_iter()
        .map(|w| differential(&unit_sum(w)).expect("witness graphs are connected"))
        .collect();
    let mut rows: BTreeMap<UGraph, (Vec<(usize, Rat)>, Rat)> = BTreeMap::new();
    for (col, image) in images.iter().enumerate() {
        for (target, c) in image.terms() {
            rows.entry(target.clone())
                .or_insert_with(|| (vec![], Rat::zero()))
                .0
                .push((col, c.clone()));
        }
    }
    for (target, c) in g.terms() {
        rows.entry(target.clone())
            .or_insert_with(|| (vec![], Rat::zero()))
            .1 = c.clone();
    }
    let mut m = RatMatrix::new(witnesses.len());
    let mut b = Vec::new();
    for (coeffs, rhs) in rows.into_values() {
        m.push_row(coeffs)?;
        b.push(rhs);
    }
    match solve_affine(&m, &b)? {
        AffineSolution::Inconsistent => Ok((false, None)),
        AffineSolution::Solution { particular, .. } => {
            let mut witness = GraphSum::new();
            for (w, c) in witnesses.iter().zip(particular) {
                witness.add(w, c);
            }
            Ok((true, Some(witness)))
        }
    }
}

/// Does the cocycle γ lie in the image of d over the full connected
/// simple-graph span on (k−1, e−1)? Returns a witness γ′ with d(γ′) = γ when
/// it does. Input must be a homogeneous d-cocycle.
pub fn is_exact(g: &GraphSum) -> Result<(bool, Option<GraphSum>)> {
    is_exact_impl(g, true)
}

/// Exactness by the full linear solve, bypassing the triangle fast path;
/// used to cross-check the fast path.
pub fn is_exact_full(g: &GraphSum) -> Result<(bool, Option<GraphSum>)> {
    is_exact_impl(g, false)
}
