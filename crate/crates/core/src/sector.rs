//! Fixed-magnetization sectors of an `n`-qubit register.
//!
//! The XX0 eigenvectors each live in a single sector (fixed number `m` of
//! flipped spins), so heavy linear algebra on many eigenvectors is done on
//! sector coordinates of length `C(n, m)` instead of `2^n`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::pauli::{LocalOperator, PauliString, StateVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Basis indices grouped by popcount, with the inverse rank table.
#[derive(Clone, Debug)]
pub struct SectorTable {
    n: usize,
    rank: Vec<u32>,
    configs: Vec<Vec<u32>>,
}

impl SectorTable {
    pub fn new(n: usize) -> Self {
        let dim = 1usize << n;
        let mut configs = vec![Vec::new(); n + 1];
        let mut rank = vec![0u32; dim];
        for (index, slot) in rank.iter_mut().enumerate() {
            let m = index.count_ones() as usize;
            *slot = configs[m].len() as u32;
            configs[m].push(index as u32);
        }
        Self { n, rank, configs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self, m: usize) -> usize {
        self.configs[m].len()
    }

    /// Basis indices with `m` set bits, ascending.
    pub fn configs(&self, m: usize) -> &[u32] {
        &self.configs[m]
    }

    #[inline]
    pub fn rank(&self, index: usize) -> usize {
        self.rank[index] as usize
    }

    /// Scatters sector coordinates into a full register vector.
    pub fn embed(&self, m: usize, coords: &[Complex64]) -> StateVector {
        let mut amps = vec![ZERO; 1 << self.n];
        for (&index, &a) in self.configs[m].iter().zip(coords) {
            amps[index as usize] = a;
        }
        StateVector::from_amplitudes(self.n, amps).expect("register size fixed by table")
    }

    /// `<u|O|v>` for vectors `u` in sector `mu` and `v` in sector `mv`, both
    /// given by sector coordinates.
    pub fn matrix_element(
        &self,
        op: &LocalOperator,
        mu: usize,
        u: &[Complex64],
        mv: usize,
        v: &[Complex64],
    ) -> Complex64 {
        let mut acc = ZERO;
        for term in op.terms() {
            for (&index, &amp) in self.configs[mv].iter().zip(v) {
                if amp == ZERO {
                    continue;
                }
                if let Some((target, phase)) = term.act_on_index(self.n, index as usize) {
                    if target.count_ones() as usize == mu {
                        acc += u[self.rank(target)].conj() * phase * amp;
                    }
                }
            }
        }
        acc
    }
}

/// Orthonormal family of vectors, each supported in one sector, stored as
/// one dense column block per sector.
#[derive(Clone, Debug)]
pub struct BlockedBasis {
    table: SectorTable,
    blocks: Vec<Option<DMatrix<Complex64>>>,
    /// `(sector, column)` of each member in input order.
    placement: Vec<(usize, usize)>,
    /// member indices per sector, in column order
    members_of: Vec<Vec<usize>>,
}

impl BlockedBasis {
    /// `members[k] = (m, coords)` with `coords.len() == C(n, m)`.
    pub fn new(table: SectorTable, members: Vec<(usize, Vec<Complex64>)>) -> Self {
        let n = table.n();
        let mut members_of: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        let mut placement = Vec::with_capacity(members.len());
        for (k, (m, _)) in members.iter().enumerate() {
            placement.push((*m, members_of[*m].len()));
            members_of[*m].push(k);
        }
        let mut blocks: Vec<Option<DMatrix<Complex64>>> = vec![None; n + 1];
        for m in 0..=n {
            if members_of[m].is_empty() {
                continue;
            }
            let dim = table.dim(m);
            let mut block = DMatrix::from_element(dim, members_of[m].len(), ZERO);
            for (col, &k) in members_of[m].iter().enumerate() {
                block.column_mut(col).copy_from_slice(&members[k].1);
            }
            blocks[m] = Some(block);
        }
        Self {
            table,
            blocks,
            placement,
            members_of,
        }
    }

    pub fn table(&self) -> &SectorTable {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.placement.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placement.is_empty()
    }

    pub fn sector_of(&self, member: usize) -> usize {
        self.placement[member].0
    }

    pub fn coords(&self, member: usize) -> Vec<Complex64> {
        let (m, col) = self.placement[member];
        self.blocks[m]
            .as_ref()
            .expect("placement points at an existing block")
            .column(col)
            .iter()
            .copied()
            .collect()
    }

    pub fn vector(&self, member: usize) -> StateVector {
        let m = self.placement[member].0;
        self.table.embed(m, &self.coords(member))
    }

    /// Full-register vector `sum_k c[k] psi_k`.
    pub fn combination(&self, coeffs: &[Complex64]) -> StateVector {
        let n = self.table.n();
        let mut amps = vec![ZERO; 1 << n];
        for (m, block) in self.blocks.iter().enumerate() {
            let Some(block) = block else { continue };
            for (col, &k) in self.members_of[m].iter().enumerate() {
                let c = coeffs[k];
                if c == ZERO {
                    continue;
                }
                for (&index, a) in self.table.configs(m).iter().zip(block.column(col).iter()) {
                    amps[index as usize] += c * a;
                }
            }
        }
        StateVector::from_amplitudes(n, amps).expect("register size fixed by table")
    }

    /// `<psi_j|O|psi_k>` for every pair of members.
    pub fn gram(&self, op: &LocalOperator) -> DMatrix<Complex64> {
        let l = self.len();
        let mut gram = DMatrix::from_element(l, l, ZERO);
        for term in op.terms() {
            self.accumulate_term(term, &mut gram);
        }
        gram
    }

    fn accumulate_term(&self, term: &PauliString, gram: &mut DMatrix<Complex64>) {
        let n = self.table.n();
        for (source, block) in self.blocks.iter().enumerate() {
            let Some(block) = block else { continue };
            // images of the source block, split by target sector
            let mut images: Vec<Option<DMatrix<Complex64>>> = vec![None; n + 1];
            let mut hits: Vec<(usize, usize, usize, Complex64)> = Vec::new();
            for (row, &index) in self.table.configs(source).iter().enumerate() {
                if let Some((target, phase)) = term.act_on_index(n, index as usize) {
                    let ts = target.count_ones() as usize;
                    if self.blocks[ts].is_some() {
                        hits.push((row, ts, self.table.rank(target), phase));
                    }
                }
            }
            for &(_, ts, _, _) in &hits {
                if images[ts].is_none() {
                    images[ts] = Some(DMatrix::from_element(self.table.dim(ts), block.ncols(), ZERO));
                }
            }
            for col in 0..block.ncols() {
                let src = block.column(col);
                for &(row, ts, trow, phase) in &hits {
                    if let Some(image) = images[ts].as_mut() {
                        image[(trow, col)] += phase * src[row];
                    }
                }
            }
            for (ts, image) in images.into_iter().enumerate() {
                let Some(image) = image else { continue };
                let target_block = self.blocks[ts].as_ref().expect("checked above");
                let partial = target_block.ad_mul(&image);
                for (r, &j) in self.members_of[ts].iter().enumerate() {
                    for (c, &k) in self.members_of[source].iter().enumerate() {
                        gram[(j, k)] += partial[(r, c)];
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Axis;

    #[test]
    fn ranks_invert_configs() {
        let t = SectorTable::new(5);
        for m in 0..=5 {
            for (r, &idx) in t.configs(m).iter().enumerate() {
                assert_eq!(t.rank(idx as usize), r);
            }
        }
        assert_eq!(t.dim(2), 10);
    }

    #[test]
    fn gram_matches_full_vectors() {
        let n = 4;
        let table = SectorTable::new(n);
        // a few unit vectors with deterministic pseudo-random entries
        let mut members = Vec::new();
        for (k, m) in [1usize, 2, 2, 3].into_iter().enumerate() {
            let dim = table.dim(m);
            let mut coords: Vec<Complex64> = (0..dim)
                .map(|i| Complex64::new(((i + 3 * k) as f64).sin(), ((i * k + 1) as f64).cos()))
                .collect();
            let norm: f64 = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            coords.iter_mut().for_each(|c| *c /= norm);
            members.push((m, coords));
        }
        let basis = BlockedBasis::new(table, members);
        let op = LocalOperator::from_terms(vec![
            PauliString::new(Complex64::new(0.3, 0.1), vec![(1, Axis::X), (3, Axis::Y)]).unwrap(),
            PauliString::new(Complex64::new(1.0, 0.0), vec![(2, Axis::Z)]).unwrap(),
            PauliString::new(Complex64::new(0.0, 1.0), vec![(4, Axis::Minus)]).unwrap(),
        ]);
        let gram = basis.gram(&op);
        for j in 0..basis.len() {
            for k in 0..basis.len() {
                let expected = basis.vector(j).inner(&op.apply(&basis.vector(k)).unwrap()).unwrap();
                assert!((gram[(j, k)] - expected).norm() < 1e-13);
            }
        }
    }
}
