//! Normalized-cut bipartition of one group.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Partition;
use crate::pdcore::SymMatrix;

/// A proposed split of group `group` into two non-empty parts. `part_a`
/// holds the lowest-indexed member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub group: usize,
    pub part_a: Vec<usize>,
    pub part_b: Vec<usize>,
    /// Normalized-cut value of the bipartition.
    pub cut: f64,
}

impl Split {
    pub fn apply(&self, p: &Partition) -> Result<Partition> {
        p.split(self.group, &self.part_b)
    }
}

/// Affinity among members `u` of a group:
/// `W = |Ω(U,U)| + 0.5 |Ω(U,Ū)| |Ω(U,Ū)|^T`, zero diagonal.
pub(crate) fn affinity(omega: &SymMatrix, members: &[usize]) -> DMatrix<f64> {
    let d = omega.dim();
    let outside: Vec<usize> = (0..d).filter(|v| !members.contains(v)).collect();
    let n = members.len();
    DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            return 0.0;
        }
        let (u, v) = (members[a], members[b]);
        let shared: f64 = outside.iter().map(|&w| omega.get(u, w).abs() * omega.get(v, w).abs()).sum();
        omega.get(u, v).abs() + 0.5 * shared
    })
}

/// `cut(A,B)/vol(A) + cut(A,B)/vol(B)`, with `0/0` read as 0.
fn ncut(w: &DMatrix<f64>, in_a: &[bool]) -> f64 {
    let n = in_a.len();
    let (mut cut, mut vol_a, mut vol_b) = (0.0, 0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            let x = w[(a, b)];
            if in_a[a] {
                vol_a += x;
            } else {
                vol_b += x;
            }
            if in_a[a] && !in_a[b] {
                cut += x;
            }
        }
    }
    let part = |vol: f64| if cut == 0.0 { 0.0 } else { cut / vol };
    part(vol_a) + part(vol_b)
}

/// Connected components over the positive entries of `w`, restricted to
/// `nodes`; each component sorted, components ordered by smallest node.
fn components(w: &DMatrix<f64>, nodes: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; w.nrows()];
    let mut out = Vec::new();
    for &start in nodes {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut next = 0;
        while next < comp.len() {
            let a = comp[next];
            next += 1;
            for &b in nodes {
                if !seen[b] && w[(a, b)] > 0.0 {
                    seen[b] = true;
                    comp.push(b);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Spectral bipartition of a connected node set: sweep over the sorted
/// entries of `D^{-1/2} v_2`, with `v_2` the second eigenvector of the
/// normalized Laplacian, keeping the prefix with the smallest normalized cut.
fn spectral(w: &DMatrix<f64>, nodes: &[usize]) -> Vec<usize> {
    let m = nodes.len();
    if m == 2 {
        return vec![nodes[0]];
    }
    let deg: Vec<f64> = nodes.iter().map(|&a| nodes.iter().map(|&b| w[(a, b)]).sum()).collect();
    let lap = DMatrix::from_fn(m, m, |a, b| {
        let norm = w[(nodes[a], nodes[b])] / (deg[a] * deg[b]).sqrt();
        if a == b {
            1.0 - norm
        } else {
            -norm
        }
    });
    let eig = SymmetricEigen::new(lap);
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let v = eig.eigenvectors.column(idx[1]);
    let f: Vec<f64> = (0..m).map(|a| v[a] / deg[a].sqrt()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(nodes[a].cmp(&nodes[b])));

    let n = w.nrows();
    let mut best = (f64::INFINITY, 1);
    for size in 1..m {
        let mut in_a = vec![false; n];
        let mut mask = vec![false; n];
        for &a in &nodes[..] {
            mask[a] = true;
        }
        for &o in &order[..size] {
            in_a[nodes[o]] = true;
        }
        let value = ncut_on(w, &in_a, &mask);
        if value < best.0 - 1e-14 {
            best = (value, size);
        }
    }
    let mut a: Vec<usize> = order[..best.1].iter().map(|&o| nodes[o]).collect();
    a.sort_unstable();
    a
}

/// Normalized cut restricted to the nodes in `mask`.
fn ncut_on(w: &DMatrix<f64>, in_a: &[bool], mask: &[bool]) -> f64 {
    let nodes: Vec<usize> = (0..mask.len()).filter(|&a| mask[a]).collect();
    let sub = DMatrix::from_fn(nodes.len(), nodes.len(), |a, b| w[(nodes[a], nodes[b])]);
    let flags: Vec<bool> = nodes.iter().map(|&a| in_a[a]).collect();
    ncut(&sub, &flags)
}

/// Proposes a two-way split of group `k` of `p` from the magnitudes of `omega`.
pub fn propose_split(p: &Partition, k: usize, omega: &SymMatrix) -> Result<Split> {
    if k >= p.k() {
        return Err(Error::InvalidInput(format!("no group {k} in a partition with {} groups", p.k())));
    }
    omega.check_dim(p.dim())?;
    let members = p.members(k);
    if members.len() < 2 {
        return Err(Error::NotSplittable(format!("group {k} has a single member")));
    }
    let n = members.len();
    let w = affinity(omega, &members);
    let deg: Vec<f64> = (0..n).map(|a| w.row(a).sum()).collect();
    let connected: Vec<usize> = (0..n).filter(|&a| deg[a] > 0.0).collect();
    let isolated: Vec<usize> = (0..n).filter(|&a| deg[a] == 0.0).collect();

    let mut side_a: Vec<usize>;
    let mut side_b: Vec<usize>;
    if connected.len() >= 2 {
        let comps = components(&w, &connected);
        if comps.len() > 1 {
            side_a = comps[0].clone();
            side_b = comps[1..].concat();
        } else {
            side_a = spectral(&w, &connected);
            side_b = connected.iter().copied().filter(|a| !side_a.contains(a)).collect();
        }
    } else {
        side_a = if connected.is_empty() { vec![isolated[0]] } else { connected.clone() };
        side_b = Vec::new();
    }
    for &a in &isolated {
        if side_a.contains(&a) {
            continue;
        }
        if side_a.len() < side_b.len() {
            side_a.push(a);
        } else {
            side_b.push(a);
        }
    }
    let in_a: Vec<bool> = (0..n).map(|a| side_a.contains(&a)).collect();
    let cut = ncut(&w, &in_a);
    let mut part_a: Vec<usize> = side_a.iter().map(|&a| members[a]).collect();
    let mut part_b: Vec<usize> = side_b.iter().map(|&a| members[a]).collect();
    part_a.sort_unstable();
    part_b.sort_unstable();
    if part_b.first() < part_a.first() {
        std::mem::swap(&mut part_a, &mut part_b);
    }
    Ok(Split {
        group: k,
        part_a,
        part_b,
        cut,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::model::adjusted_rand_index;

    #[test]
    fn block_diagonal_group_splits_cleanly() {
        let omega = SymMatrix::from_upper_fn(6, |i, j| {
            if i == j {
                2.0
            } else if [0, 2, 4].contains(&i) == [0, 2, 4].contains(&j) {
                0.5
            } else {
                0.0
            }
        });
        let s = propose_split(&Partition::single_group(6), 0, &omega).unwrap();
        assert_eq!(s.part_a, vec![0, 2, 4]);
        assert_eq!(s.part_b, vec![1, 3, 5]);
        assert_eq!(s.cut, 0.0);
    }

    #[test]
    fn pair_has_one_split() {
        let omega = SymMatrix::from_rows(&[vec![1.0, 0.3, 0.0], vec![0.3, 1.0, 0.1], vec![0.0, 0.1, 1.0]]).unwrap();
        let p = Partition::from_labels(&[1, 2, 1]).unwrap();
        let s = propose_split(&p, 0, &omega).unwrap();
        assert_eq!((s.part_a.clone(), s.part_b.clone()), (vec![0], vec![2]));
        // W_02 = 0 + 0.5 |Ω_01||Ω_21| = 0.015; ncut of a two-node graph is 2
        assert!((s.cut - 2.0).abs() < 1e-12);
        assert!(matches!(propose_split(&p, 1, &omega), Err(Error::NotSplittable(_))));
    }

    #[test]
    fn isolated_nodes_go_to_the_smaller_side() {
        let omega = SymMatrix::from_upper_fn(5, |i, j| {
            if i == j {
                1.0
            } else if i < 3 && j < 3 {
                0.4
            } else {
                0.0
            }
        });
        let s = propose_split(&Partition::single_group(5), 0, &omega).unwrap();
        let mut all: Vec<usize> = s.part_a.iter().chain(&s.part_b).copied().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
        assert!(!s.part_a.is_empty() && !s.part_b.is_empty());
        // the identity matrix has no edges at all
        let s = propose_split(&Partition::single_group(4), 0, &SymMatrix::identity(4)).unwrap();
        assert_eq!((s.part_a.len(), s.part_b.len()), (2, 2));
        assert_eq!(s.cut, 0.0);
    }

    #[test]
    fn noisy_planted_blocks_are_recovered() {
        let truth = Partition::from_labels(&[1, 1, 1, 1, 1, 2, 2, 2, 2, 2]).unwrap();
        let mut hits = 0;
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let omega = SymMatrix::from_upper_fn(10, |i, j| {
                if i == j {
                    5.0
                } else if truth.same_group(i, j) {
                    0.5 + 0.2 * rng.random::<f64>()
                } else {
                    0.1 * (rng.random::<f64>() - 0.5)
                }
            });
            let s = propose_split(&Partition::single_group(10), 0, &omega).unwrap();
            let found = s.apply(&Partition::single_group(10)).unwrap();
            if adjusted_rand_index(&found, &truth) > 0.99 {
                hits += 1;
            }
        }
        assert_eq!(hits, 10);
    }

    #[test]
    fn outside_coupling_enters_the_affinity() {
        let omega = SymMatrix::from_rows(&[
            vec![1.0, 0.0, 0.5],
            vec![0.0, 1.0, 0.4],
            vec![0.5, 0.4, 1.0],
        ])
        .unwrap();
        let w = affinity(&omega, &[0, 1]);
        assert!((w[(0, 1)] - 0.1).abs() < 1e-15);
        assert_eq!(w[(0, 0)], 0.0);
    }
}
