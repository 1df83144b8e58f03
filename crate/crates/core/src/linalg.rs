//! Exact propagation `exp(-iHt)` for Hermitian generators.
//!
//! The generator is split into the connected components of its sparsity
//! graph (excitation-number sectors for the models in this crate); each
//! component is diagonalized on first use and cached.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::C64;

/// Max-norm of `H - H^dagger`.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Relative Hermiticity check `||H - H^dagger||_max <= tol * ||H||_max`.
pub fn check_hermitian(m: &DMatrix<C64>, rel_tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotHermitian(f64::INFINITY));
    }
    let defect = hermiticity_defect(m);
    if defect > rel_tol * max_abs(m) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Hermitian matrix in coordinate form; both triangles are stored.
#[derive(Clone, Debug, Default)]
pub struct SparseHermitian {
    dim: usize,
    entries: BTreeMap<(usize, usize), C64>,
}

impl SparseHermitian {
    pub fn new(dim: usize) -> Self {
        SparseHermitian { dim, entries: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Accumulate a diagonal term.
    pub fn add_diagonal(&mut self, i: usize, value: f64) {
        if value != 0.0 {
            *self.entries.entry((i, i)).or_default() += C64::new(value, 0.0);
        }
    }

    /// Accumulate `value` at (i, j) and its conjugate at (j, i).
    pub fn add_pair(&mut self, i: usize, j: usize, value: C64) {
        assert_ne!(i, j, "use add_diagonal for diagonal terms");
        if value.norm() == 0.0 {
            return;
        }
        *self.entries.entry((i, j)).or_default() += value;
        *self.entries.entry((j, i)).or_default() += value.conj();
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries.get(&(i, j)).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.iter().map(|(i, j, v)| (v - self.get(j, i).conj()).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }
}

/// Connected components of the graph with an edge wherever `(i, j)` is nonzero.
fn components(dim: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..dim {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

struct Eigen {
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

struct Block {
    indices: Vec<usize>,
    matrix: DMatrix<C64>,
    eigen: OnceLock<Eigen>,
}

impl Block {
    fn eigen(&self) -> &Eigen {
        self.eigen.get_or_init(|| {
            let dec = SymmetricEigen::new(self.matrix.clone());
            Eigen { values: dec.eigenvalues.iter().copied().collect(), vectors: dec.eigenvectors }
        })
    }
}

/// Reusable propagator for a fixed Hermitian generator.
pub struct Propagator {
    dim: usize,
    blocks: Vec<Block>,
}

impl Propagator {
    pub fn from_dense(h: &DMatrix<C64>) -> Self {
        let dim = h.nrows();
        let edges = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && h[(i, j)].norm() != 0.0)
            .collect::<Vec<_>>();
        let groups = components(dim, edges.into_iter());
        let blocks = groups
            .into_iter()
            .map(|indices| {
                let m = DMatrix::from_fn(indices.len(), indices.len(), |a, b| h[(indices[a], indices[b])]);
                Block { indices, matrix: m, eigen: OnceLock::new() }
            })
            .collect();
        Propagator { dim, blocks }
    }

    pub fn from_sparse(h: &SparseHermitian) -> Self {
        let dim = h.dim();
        let groups = components(dim, h.iter().filter(|(i, j, _)| i != j).map(|(i, j, _)| (i, j)));
        let mut position = vec![(0usize, 0usize); dim];
        for (b, g) in groups.iter().enumerate() {
            for (k, &i) in g.iter().enumerate() {
                position[i] = (b, k);
            }
        }
        let mut mats: Vec<DMatrix<C64>> = groups.iter().map(|g| DMatrix::zeros(g.len(), g.len())).collect();
        for (i, j, v) in h.iter() {
            let (bi, ki) = position[i];
            let (bj, kj) = position[j];
            debug_assert_eq!(bi, bj);
            mats[bi][(ki, kj)] = v;
        }
        let blocks = groups
            .into_iter()
            .zip(mats)
            .map(|(indices, matrix)| Block { indices, matrix, eigen: OnceLock::new() })
            .collect();
        Propagator { dim, blocks }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index sets of the decoupled sectors.
    pub fn sectors(&self) -> impl Iterator<Item = &[usize]> {
        self.blocks.iter().map(|b| b.indices.as_slice())
    }

    /// Spectrum of the sector containing basis index `i`.
    pub fn sector_spectrum(&self, i: usize) -> Vec<f64> {
        self.blocks.iter().find(|b| b.indices.contains(&i)).map(|b| b.eigen().values.clone()).unwrap_or_default()
    }

    /// `exp(-iHt) psi`. Sectors in which `psi` has no weight are skipped and
    /// never diagonalized.
    pub fn evolve(&self, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        assert_eq!(psi.len(), self.dim, "state dimension does not match generator");
        let mut out = DVector::zeros(self.dim);
        for block in &self.blocks {
            let local: DVector<C64> =
                DVector::from_iterator(block.indices.len(), block.indices.iter().map(|&i| psi[i]));
            if local.iter().all(|z| z.norm() == 0.0) {
                continue;
            }
            let eig = block.eigen();
            let mut coeffs = eig.vectors.ad_mul(&local);
            for (c, &lambda) in coeffs.iter_mut().zip(&eig.values) {
                *c *= C64::from_polar(1.0, -lambda * t);
            }
            let back = &eig.vectors * coeffs;
            for (k, &i) in block.indices.iter().enumerate() {
                out[i] = back[k];
            }
        }
        out
    }
}
