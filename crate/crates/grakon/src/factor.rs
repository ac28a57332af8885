//! Factorization of bivector flows through Leibniz graphs: pose
//! ⟦P, Q⟧ = Σᵢ cᵢ·Lᵢ as an exact linear system over a table of skew
//! Leibniz graphs (each row vanishes on every Poisson structure) and
//! solve it, or classify all flows of a given size at once by the kernel
//! of the joint system.

use std::collections::BTreeMap;

use num::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kgraph::{KGraph, KSum};
use crate::leibniz::{expand_alt, gen_leibniz, iterative_layers, LeibnizNf};
use crate::linalg::{solve_affine, AffineSolution, RatMatrix, Rref, SparseVec};
use crate::multivec::{gen_bi_vectors, gen_one_vectors, schouten_bracket, wedge, Multivector};
use crate::rat::{rat, Rat};

/// Iteration cap for the layer search; every worked example stabilizes
/// well below it.
const MAX_LAYERS: usize = 32;

/// Where the Leibniz table for ⟦P, Q⟧ = Σᵢ cᵢ·Lᵢ comes from.
#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum LeibnizSource {
    /// Contract marked edges starting from the bracket's own graphs and
    /// iterate to a fixpoint; requires a skew bracket but scales far
    /// better than the complete table.
    Iterative,
    /// Every skew Leibniz class of matching size whose expansion is a
    /// multivector; complete, so inconsistency here is a proof.
    Full,
}

/// One posed-and-solved factorization: the reduced bracket ⟦P, Q⟧, the
/// ordered Leibniz table (row i owns unknown cᵢ and stores its alternated
/// expansion), the affine space of solutions, and the cumulative table
/// size per iteration (empty for the complete source).
#[derive(Debug)]
pub struct FactorSolution {
    pub lhs: KSum,
    pub table: Vec<(LeibnizNf, KSum)>,
    pub solution: AffineSolution,
    pub layers: Vec<usize>,
}

impl FactorSolution {
    pub fn is_consistent(&self) -> bool {
        !matches!(self.solution, AffineSolution::Inconsistent)
    }

    /// Σᵢ coeffsᵢ·expansionᵢ over the table.
    pub fn diamond(&self, coeffs: &[Rat]) -> Result<KSum> {
        if coeffs.len() != self.table.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for a table of {} rows",
                coeffs.len(),
                self.table.len()
            )));
        }
        let mut out = KSum::new();
        for ((_, exp), c) in self.table.iter().zip(coeffs) {
            if !c.is_zero() {
                out.add_sum(&exp.scaled(c));
            }
        }
        Ok(out)
    }

    /// lhs − ◇(coeffs); empty exactly when the assignment factors the
    /// bracket.
    pub fn residual(&self, coeffs: &[Rat]) -> Result<KSum> {
        let mut out = self.diamond(coeffs)?.scaled(&rat(-1));
        out.add_sum(&self.lhs);
        Ok(out)
    }

    /// A deterministic low-support solution: sweep the unknowns in reverse
    /// table order, pin each to zero while the affine family stays
    /// nonempty, and return the particular point of what is left. Later
    /// rows come from later discovery layers, so pinning them first
    /// concentrates the support on the early layers; the result is
    /// inclusion-minimal along the sweep.
    pub fn sparse_solution(&self) -> Option<Vec<Rat>> {
        let (particular, kernel) = match &self.solution {
            AffineSolution::Inconsistent => return None,
            AffineSolution::Solution { particular, kernel } => (particular, kernel),
        };
        // constraints live on the kernel coordinates λ: pinning unknown i
        // appends the augmented row Σⱼ kernelⱼ[i]·λⱼ = −particular[i]
        let m = kernel.len();
        let aug = m;
        let mut pins = Rref::new();
        for i in (0..particular.len()).rev() {
            let mut row: SparseVec = (0..m)
                .filter(|&j| !kernel[j][i].is_zero())
                .map(|j| (j, kernel[j][i].clone()))
                .collect();
            if !particular[i].is_zero() {
                row.push((aug, -particular[i].clone()));
            }
            let reduced = pins.reduce(row);
            match reduced.first() {
                None => {}                            // already pinned
                Some(&(lead, _)) if lead == aug => {} // unpinnable: 0 = 1
                Some(_) => {
                    pins.push_row(reduced);
                }
            }
        }
        let mut lambda = vec![Rat::zero(); m];
        for lead in pins.leading_cols().collect::<Vec<_>>() {
            if let Some(row) = pins.row(lead) {
                if let Ok(pos) = row.binary_search_by_key(&aug, |e| e.0) {
                    lambda[lead] = row[pos].1.clone();
                }
            }
        }
        let mut x = particular.clone();
        for (j, l) in lambda.iter().enumerate() {
            if l.is_zero() {
                continue;
            }
            for (xi, kj) in x.iter_mut().zip(&kernel[j]) {
                *xi += l * kj;
            }
        }
        Some(x)
    }
}

/// Pose ⟦P, Q⟧ = Σᵢ cᵢ·Lᵢ for a bivector flow Q and solve it exactly.
/// The whole affine solution space is kept; an unsatisfiable system comes
/// back as `AffineSolution::Inconsistent`, not as an error.
pub fn solve_factorization(q: &Multivector, source: LeibnizSource) -> Result<FactorSolution> {
    let k = match q.arity()? {
        None => {
            return Ok(FactorSolution {
                lhs: KSum::new(),
                table: Vec::new(),
                solution: AffineSolution::Solution {
                    particular: Vec::new(),
                    kernel: Vec::new(),
                },
                layers: Vec::new(),
            })
        }
        Some((2, k)) => k,
        Some((n, _)) => {
            return Err(Error::Dimension(format!(
                "factorization expects a bivector flow, got a {n}-vector"
            )))
        }
    };
    let lhs = schouten_bracket(&wedge(), q)?.into_sum();
    match source {
        LeibnizSource::Iterative => {
            let state = iterative_layers(&lhs, MAX_LAYERS)?;
            if !state.stabilized {
                return Err(Error::Dimension(format!(
                    "Leibniz layer search still growing after {MAX_LAYERS} iterations"
                )));
            }
            solve_ansatz(lhs, state.table, state.layer_sizes)
        }
        LeibnizSource::Full => solve_ansatz(lhs, leibniz_mv_table(k, 3)?, Vec::new()),
    }
}

/// Complete table of skew Leibniz classes with k contracted internal
/// vertices on n sinks whose expansions are multivectors, paired with the
/// alternated expansions; formally zero classes are dropped.
fn leibniz_mv_table(k: u8, n: u8) -> Result<Vec<(LeibnizNf, KSum)>> {
    let rows: Vec<Option<(LeibnizNf, KSum)>> = gen_leibniz(k, n, false)
        .into_par_iter()
        .filter(|l| l.graph.in_degrees()[..n as usize].iter().all(|&d| d == 1))
        .map(|l| {
            let exp = expand_alt(&l.representative())?;
            Ok(if exp.is_empty() { None } else { Some((l, exp)) })
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Equate coefficients graph by graph and solve; one matrix row per
/// normal-form graph appearing in the expansions or the bracket.
fn solve_ansatz(
    lhs: KSum,
    table: Vec<(LeibnizNf, KSum)>,
    layers: Vec<usize>,
) -> Result<FactorSolution> {
    let mut rows: BTreeMap<KGraph, SparseVec> = BTreeMap::new();
    for (j, (_, exp)) in table.iter().enumerate() {
        for (g, c) in exp.terms() {
            rows.entry(g.clone()).or_default().push((j, c.clone()));
        }
    }
    for (g, _) in lhs.terms() {
        rows.entry(g.clone()).or_default();
    }
    let mut m = RatMatrix::new(table.len());
    let mut b = Vec::with_capacity(rows.len());
    for (g, row) in rows {
        m.push_row(row)?;
        b.push(lhs.coeff(&g).cloned().unwrap_or_else(Rat::zero));
    }
    let solution = solve_affine(&m, &b)?;
    Ok(FactorSolution {
        lhs,
        table,
        solution,
        layers,
    })
}

/// Exact classification of the bivector flows with k internal vertices.
/// All subspace bases are echelonized coordinate vectors over `ansatz`;
/// `proper` lists solution flows extending trivial + improper to a basis
/// of the whole solution space.
#[derive(Debug)]
pub struct FlowClassification {
    pub ansatz: Vec<Multivector>,
    /// flows Q with ⟦P, Q⟧ = Σ cᵢ·Lᵢ solvable
    pub all: Vec<Vec<Rat>>,
    /// flows of the form ⟦P, X⟧ for a one-vector X
    pub trivial: Vec<Vec<Rat>>,
    /// flows that are themselves sums of Leibniz bivector graphs
    pub improper: Vec<Vec<Rat>>,
    /// dim(trivial + improper)
    pub mixed_dim: usize,
    pub proper: Vec<Vec<Rat>>,
}

impl FlowClassification {
    /// dim(trivial ∩ improper), exact by inclusion–exclusion.
    pub fn overlap_dim(&self) -> usize {
        self.trivial.len() + self.improper.len() - self.mixed_dim
    }

    /// Assemble the flow with the given coordinates.
    pub fn flow(&self, coords: &[Rat]) -> Result<Multivector> {
        combine(&self.ansatz, coords)
    }
}

/// Classify every flow with k internal vertices: solve the joint
/// homogeneous system ⟦P, Σᵢ qᵢ·Bᵢ⟧ = Σⱼ cⱼ·Lⱼ over the complete skew
/// bivector ansatz {Bᵢ} and Leibniz table {Lⱼ}, eliminating the cⱼ first
/// so the flow constraints appear as the echelon rows supported on the
/// q-block alone.
pub fn classify_flows(k: u8) -> Result<FlowClassification> {
    let ansatz = gen_bi_vectors(k);
    let nb = ansatz.len();
    let brackets: Vec<KSum> = ansatz
        .par_iter()
        .map(|b| schouten_bracket(&wedge(), b).map(Multivector::into_sum))
        .collect::<Result<_>>()?;
    let table = leibniz_mv_table(k, 3)?;
    let nl = table.len();
    let mut rows: BTreeMap<KGraph, SparseVec> = BTreeMap::new();
    for (j, (_, exp)) in table.iter().enumerate() {
        for (g, c) in exp.terms() {
            rows.entry(g.clone()).or_default().push((j, -c.clone()));
        }
    }
    for (i, s) in brackets.iter().enumerate() {
        for (g, c) in s.terms() {
            rows.entry(g.clone()).or_default().push((nl + i, c.clone()));
        }
    }
    let mut joint = Rref::new();
    for (_, row) in rows {
        joint.push_row(row);
    }
    let mut constraints = RatMatrix::new(nb);
    for lead in joint.leading_cols().collect::<Vec<_>>() {
        if lead >= nl {
            let row = joint.row(lead).expect("leading column has a row").clone();
            constraints.push_row(row.into_iter().map(|(c, v)| (c - nl, v)))?;
        }
    }
    let all = echelon(constraints.kernel_basis().iter(), nb);

    let mut trivial_raw = Vec::new();
    if k >= 2 {
        for x in gen_one_vectors(k - 1) {
            let t = schouten_bracket(&wedge(), &x)?;
            trivial_raw.push(express(&ansatz, t.sum())?);
        }
    }
    let trivial = echelon(trivial_raw.iter(), nb);

    let mut improper_raw = Vec::new();
    if k >= 2 {
        for (_, exp) in leibniz_mv_table(k - 1, 2)? {
            improper_raw.push(express(&ansatz, &exp)?);
        }
    }
    let improper = echelon(improper_raw.iter(), nb);

    let mut span = Rref::new();
    for v in trivial.iter().chain(&improper) {
        span.push_row(to_sparse(v));
    }
    let mixed_dim = span.rank();
    let mut proper = Vec::new();
    for v in &all {
        if span.push_row(to_sparse(v)) {
            proper.push(v.clone());
        }
    }
    Ok(FlowClassification {
        ansatz,
        all,
        trivial,
        improper,
        mixed_dim,
        proper,
    })
}

/// Σᵢ coordsᵢ·ansatzᵢ.
fn combine(ansatz: &[Multivector], coords: &[Rat]) -> Result<Multivector> {
    if coords.len() != ansatz.len() {
        return Err(Error::Dimension(format!(
            "{} coordinates over an ansatz of {}",
            coords.len(),
            ansatz.len()
        )));
    }
    let mut out = Multivector::empty();
    for (b, c) in ansatz.iter().zip(coords) {
        if !c.is_zero() {
            out.add(&b.scaled(c));
        }
    }
    Ok(out)
}

/// Coordinates of a skew sum over the disjoint-support ansatz: read each
/// coordinate off the basis element's leading graph, then demand exact
/// reconstruction.
fn express(ansatz: &[Multivector], s: &KSum) -> Result<Vec<Rat>> {
    let mut coords = Vec::with_capacity(ansatz.len());
    let mut recon = KSum::new();
    for b in ansatz {
        let (g0, c0) = b
            .sum()
            .terms()
            .next()
            .expect("ansatz elements are nonzero");
        let c = match s.coeff(g0) {
            Some(c) => c / c0,
            None => Rat::zero(),
        };
        if !c.is_zero() {
            recon.add_sum(&b.sum().scaled(&c));
        }
        coords.push(c);
    }
    let mut diff = recon.scaled(&rat(-1));
    diff.add_sum(s);
    if diff.is_empty() {
        Ok(coords)
    } else {
        Err(Error::Dimension(
            "sum lies outside the span of the bivector ansatz".into(),
        ))
    }
}

fn to_sparse(v: &[Rat]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, c.clone()))
        .collect()
}

/// Echelonized basis of the span of the given coordinate vectors.
fn echelon<'a>(vectors: impl Iterator<Item = &'a Vec<Rat>>, cols: usize) -> Vec<Vec<Rat>> {
    let mut r = Rref::new();
    for v in vectors {
        r.push_row(to_sparse(v));
    }
    r.leading_cols()
        .collect::<Vec<_>>()
        .into_iter()
        .map(|lead| {
            let mut x = vec![Rat::zero(); cols];
            for (c, v) in r.row(lead).expect("leading column has a row") {
                x[*c] = v.clone();
            }
            x
        })
        .collect()
}
