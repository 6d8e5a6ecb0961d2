use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Full-rank sublattice of `Z^r` in Hermite normal form.
///
/// Generator `i` is zero before coordinate `i`, has a positive pivot at `i`,
/// and every earlier generator's coordinate `i` lies in `[0, pivot_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    rows: Vec<Vec<i128>>,
}

impl Lattice {
    /// HNF of the lattice spanned by `gens` (each of length `rank`).
    pub fn from_generators(rank: usize, gens: &[Vec<i128>]) -> Result<Self> {
        if rank == 0 {
            return Err(Error::invalid("rank must be at least 1"));
        }
        if gens.iter().any(|g| g.len() != rank) {
            return Err(Error::invalid(format!("generators must have length {rank}")));
        }
        let mut rows: Vec<Vec<i128>> = gens.iter().filter(|g| g.iter().any(|&x| x != 0)).cloned().collect();
        for col in 0..rank {
            loop {
                let pivot = (col..rows.len()).filter(|&k| rows[k][col] != 0).min_by_key(|&k| rows[k][col].abs());
                let Some(pk) = pivot else {
                    return Err(Error::InfiniteIndex);
                };
                rows.swap(col, pk);
                let mut clean = true;
                for k in col + 1..rows.len() {
                    let q = rows[k][col].div_euclid(rows[col][col]);
                    if q != 0 {
                        let (head, tail) = rows.split_at_mut(k);
                        for (t, h) in tail[0].iter_mut().zip(head[col].iter()) {
                            *t -= q * h;
                        }
                    }
                    if rows[k][col] != 0 {
                        clean = false;
                    }
                }
                if clean {
                    break;
                }
            }
            if rows[col][col] < 0 {
                rows[col].iter_mut().for_each(|x| *x = -*x);
            }
            for j in 0..col {
                let q = rows[j][col].div_euclid(rows[col][col]);
                if q != 0 {
                    let (head, tail) = rows.split_at_mut(col);
                    for (t, h) in head[j].iter_mut().zip(tail[0].iter()) {
                        *t -= q * h;
                    }
                }
            }
        }
        rows.truncate(rank);
        Ok(Lattice { rows })
    }

    pub fn diagonal(entries: &[i128]) -> Result<Self> {
        let r = entries.len();
        let gens: Vec<Vec<i128>> = (0..r)
            .map(|i| (0..r).map(|j| if i == j { entries[i] } else { 0 }).collect())
            .collect();
        Self::from_generators(r, &gens)
    }

    /// Full lattice `Z^r`.
    pub fn full(rank: usize) -> Result<Self> {
        Self::diagonal(&vec![1; rank])
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i128>] {
        &self.rows
    }

    pub fn pivots(&self) -> Vec<i128> {
        (0..self.rank()).map(|i| self.rows[i][i]).collect()
    }

    /// Index in `Z^r`.
    pub fn det(&self) -> u128 {
        self.pivots().iter().map(|&p| p as u128).product()
    }

    /// Canonical representative of `v + L` in the box `prod [0, pivot_i)`.
    pub fn reduce(&self, v: &[i128]) -> Vec<i128> {
        let mut v = v.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let q = v[i].div_euclid(row[i]);
            if q != 0 {
                for (x, r) in v.iter_mut().zip(row.iter()) {
                    *x -= q * r;
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[i128]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// `other ⊆ self`.
    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }

    /// Lattice generated by `self` together with `other`.
    pub fn join(&self, other: &Lattice) -> Result<Lattice> {
        let gens: Vec<Vec<i128>> = self.rows.iter().chain(other.rows.iter()).cloned().collect();
        Lattice::from_generators(self.rank(), &gens)
    }

    /// Enumerate the canonical coset representatives of `Z^r / L`.
    pub fn coset_reps(&self) -> impl Iterator<Item = Vec<i128>> + '_ {
        let pivots = self.pivots();
        let total = self.det();
        (0..total).map(move |mut idx| {
            let mut v = vec![0i128; pivots.len()];
            for i in (0..pivots.len()).rev() {
                let p = pivots[i] as u128;
                v[i] = (idx % p) as i128;
                idx /= p;
            }
            v
        })
    }
}

#[cfg(test)]
mod lattice_tests {
    use super::*;

    #[test]
    fn hnf_is_canonical() {
        let a = Lattice::from_generators(2, &[vec![2, 0], vec![0, 3]]).unwrap();
        let b = Lattice::from_generators(2, &[vec![2, 3], vec![4, 3], vec![0, 6]]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.det(), 6);
        assert_eq!(a.rows(), &[vec![2, 0], vec![0, 3]]);
    }

    #[test]
    fn singular_rejected() {
        assert_eq!(Lattice::from_generators(2, &[vec![1, 1], vec![2, 2]]), Err(Error::InfiniteIndex));
    }

    #[test]
    fn reduction_and_reps() {
        let l = Lattice::from_generators(2, &[vec![2, 1], vec![0, 3]]).unwrap();
        assert_eq!(l.det(), 6);
        let reps: Vec<Vec<i128>> = l.coset_reps().collect();
        assert_eq!(reps.len(), 6);
        for r in &reps {
            assert_eq!(&l.reduce(r), r);
        }
        assert!(l.contains(&[2, 1]));
        assert!(l.contains(&[4, 5]));
        assert!(!l.contains(&[1, 0]));
        let big = Lattice::diagonal(&[4, 6]).unwrap();
        assert!(Lattice::diagonal(&[2, 3]).unwrap().contains_lattice(&big));
    }
}
