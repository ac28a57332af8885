//! Exact rational sparse linear algebra: kernels, ranks, and affine-system
//! solving.
//!
//! Everything is built on an incrementally maintained reduced row echelon
//! basis. The RREF of a row space is unique, so results do not depend on the
//! order rows are fed in.

use crate::error::{Error, Result};
use crate::rat::Rat;
use num::{One, Zero};
use std::collections::BTreeMap;

/// Sparse vector: `(col, value)` pairs sorted by column, no zero values.
pub type SparseVec = Vec<(usize, Rat)>;

/// `u + c·v`, both inputs sorted; zeros are dropped.
fn axpy(u: &SparseVec, c: &Rat, v: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(u.len() + v.len());
    let (mut i, mut j) = (0, 0);
    while i < u.len() || j < v.len() {
        let take_u = j >= v.len() || (i < u.len() && u[i].0 < v[j].0);
        let take_v = i >= u.len() || (j < v.len() && v[j].0 < u[i].0);
        if take_u {
            out.push(u[i].clone());
            i += 1;
        } else if take_v {
            let val = c * &v[j].1;
            if !val.is_zero() {
                out.push((v[j].0, val));
            }
            j += 1;
        } else {
            let val = &u[i].1 + c * &v[j].1;
            if !val.is_zero() {
                out.push((u[i].0, val));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Reduced row echelon basis, keyed by leading column; every stored row has
/// leading coefficient 1 and zeros in all other rows' leading columns.
#[derive(Clone, Default, Debug)]
pub struct Rref {
    rows: BTreeMap<usize, SparseVec>,
}

impl Rref {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reduce `row` against the basis; the remainder has no entries in any
    /// current leading column.
    pub fn reduce(&self, mut row: SparseVec) -> SparseVec {
        let mut i = 0;
        while i < row.len() {
            let (c, v) = (row[i].0, row[i].1.clone());
            match self.rows.get(&c) {
                Some(b) => {
                    let coeff = -v;
                    row = axpy(&row, &coeff, b);
                    // column c vanished; entries before i are untouched
                }
                None => i += 1,
            }
        }
        row
    }

    /// Insert a row, returning true when it enlarges the row space.
    pub fn push_row(&mut self, row: SparseVec) -> bool {
        let mut row = self.reduce(row);
        if row.is_empty() {
            return false;
        }
        let lead = row[0].0;
        let inv = {
            let l = row[0].1.clone();
            Rat::one() / l
        };
        for (_, v) in row.iter_mut() {
            *v *= &inv;
        }
        // restore reducedness of the existing rows
        let others: Vec<usize> = self.rows.keys().cloned().collect();
        for key in others {
            let b = &self.rows[&key];
            if let Ok(pos) = b.binary_search_by_key(&lead, |e| e.0) {
                let coeff = -b[pos].1.clone();
                let nb = axpy(b, &coeff, &row);
                self.rows.insert(key, nb);
            }
        }
        self.rows.insert(lead, row);
        true
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn leading_cols(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().cloned()
    }

    pub fn row(&self, lead: usize) -> Option<&SparseVec> {
        self.rows.get(&lead)
    }

    /// Kernel of the row space seen as a matrix with `cols` columns: one
    /// vector per non-pivot column with that free coordinate set to 1 (it is
    /// always the vector's last nonzero entry), ordered by free column.
    pub fn kernel_basis(&self, cols: usize) -> Vec<Vec<Rat>> {
        let mut out = Vec::new();
        for f in 0..cols {
            if self.rows.contains_key(&f) {
                continue;
            }
            let mut x = vec![Rat::zero(); cols];
            x[f] = Rat::one();
            for (&p, row) in &self.rows {
                if let Ok(pos) = row.binary_search_by_key(&f, |e| e.0) {
                    x[p] = -row[pos].1.clone();
                }
            }
            out.push(x);
        }
        out
    }
}

/// Sparse rational matrix; rows hold sorted `(col, value)` pairs with no
/// stored zeros.
#[derive(Clone, Debug, Default)]
pub struct RatMatrix {
    pub cols: usize,
    rows: Vec<SparseVec>,
}

impl RatMatrix {
    pub fn new(cols: usize) -> Self {
        RatMatrix { cols, rows: Vec::new() }
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    /// Append a row given as (col, value) pairs in any order; duplicate
    /// columns are summed, zeros dropped.
    pub fn push_row<I>(&mut self, entries: I) -> Result<()>
    where
        I: IntoIterator<Item = (usize, Rat)>,
    {
        let mut m: BTreeMap<usize, Rat> = BTreeMap::new();
        for (c, v) in entries {
            if c >= self.cols {
                return Err(Error::Dimension(format!(
                    "column {c} out of range 0..{}",
                    self.cols
                )));
            }
            let e = m.entry(c).or_insert_with(Rat::zero);
            *e += v;
        }
        self.rows
            .push(m.into_iter().filter(|(_, v)| !v.is_zero()).collect());
        Ok(())
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &SparseVec> {
        self.rows.iter()
    }

    fn to_rref(&self) -> Rref {
        let mut r = Rref::new();
        for row in &self.rows {
            r.push_row(row.clone());
        }
        r
    }

    pub fn rank(&self) -> usize {
        self.to_rref().rank()
    }

    /// Basis of `{x : Mx = 0}`, echelon-normalized and deterministic.
    pub fn kernel_basis(&self) -> Vec<Vec<Rat>> {
        self.to_rref().kernel_basis(self.cols)
    }

    /// Debug dump, one `row col p/q` line per entry.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                out.push_str(&format!("{i} {c} {}\n", crate::rat::format_rat(v)));
            }
        }
        out
    }
}

/// Result of an affine solve: inconsistency is a value, not an error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AffineSolution {
    Inconsistent,
    Solution {
        particular: Vec<Rat>,
        kernel: Vec<Vec<Rat>>,
    },
}

/// Solve `M x = b` exactly: a particular solution (free variables set to 0)
/// plus the kernel of `M`.
pub fn solve_affine(m: &RatMatrix, b: &[Rat]) -> Result<AffineSolution> {
    if b.len() != m.rows() {
        return Err(Error::Dimension(format!(
            "rhs length {} != row count {}",
            b.len(),
            m.rows()
        )));
    }
    let aug = m.cols; // augmented column index
    let mut r = Rref::new();
    for (row, bi) in m.rows.iter().zip(b) {
        let mut v = row.clone();
        if !bi.is_zero() {
            v.push((aug, bi.clone()));
        }
        r.push_row(v);
    }
    if r.row(aug).is_some() {
        return Ok(AffineSolution::Inconsistent);
    }
    let mut particular = vec![Rat::zero(); m.cols];
    for (&p, row) in &r.rows {
        if let Ok(pos) = row.binary_search_by_key(&aug, |e| e.0) {
            particular[p] = row[pos].1.clone();
        }
    }
    // kernel of the coefficient part: strip the augmented column
    let mut plain = Rref::new();
    for row in r.rows.values() {
        let stripped: SparseVec = row.iter().filter(|e| e.0 != aug).cloned().collect();
        plain.push_row(stripped);
    }
    Ok(AffineSolution::Solution {
        particular,
        kernel: plain.kernel_basis(m.cols),
    })
}
