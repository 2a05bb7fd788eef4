//! Periodic Bravais lattices with exchange couplings in momentum space.
//!
//! Sign convention: real-space antiferromagnetic couplings are positive,
//! and the Fourier transform carries an overall minus sign,
//! J_q = -Σ_δ J(δ) cos(q·δ), so that J_q is *maximal* at the ordering
//! vector Q (NN chain: J_π = +2J, J_0 = -2J). Most textbooks use the
//! opposite sign; every formula in this crate assumes this one.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Chain,
    Square,
    Hypercubic,
}

impl Geometry {
    fn expected_dims(self) -> Option<usize> {
        match self {
            Geometry::Chain => Some(1),
            Geometry::Square => Some(2),
            Geometry::Hypercubic => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Geometry::Chain => "chain",
            Geometry::Square => "square",
            Geometry::Hypercubic => "hypercubic",
        }
    }
}

/// A periodic lattice with everything derived at construction time:
/// site positions, the momentum grid, J_q on it, the ordering vector Q,
/// and the staggered signs η_j = e^{iQ·r_j} ∈ {+1, -1}.
///
/// Sites and momenta are enumerated row-major with the last dimension
/// fastest. Momenta are stored as integer tuples n, q_i = 2π n_i / L_i.
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeSpec {
    pub geometry: Geometry,
    pub linear_sizes: Vec<usize>,
    /// Symmetric closure of the input couplings: (displacement, J).
    pub couplings: Vec<(Vec<i64>, f64)>,
    pub n_sites: usize,
    /// Integer coordinates of each site (lattice constant 1).
    pub positions: Vec<Vec<i64>>,
    /// Momentum grid as integer tuples, same enumeration order as sites.
    pub momenta: Vec<Vec<usize>>,
    /// J_q on the momentum grid.
    pub jq: Vec<f64>,
    /// Grid index of the ordering vector Q.
    pub q_ordering_index: usize,
    /// η_j = e^{iQ·r_j}, exactly ±1 (2Q is a reciprocal-lattice vector).
    pub eta: Vec<f64>,
    /// Folded real-space bonds (j, k, P_jk) with j < k; P_jk accumulates
    /// every coupling displacement connecting j to k around the torus.
    pub bonds: Vec<(usize, usize, f64)>,
    /// Coordination number: size of the symmetric coupling set.
    pub coordination: usize,
}

impl LatticeSpec {
    pub fn build(
        geometry: Geometry,
        linear_sizes: &[usize],
        couplings: &[(Vec<i64>, f64)],
    ) -> Result<Self> {
        if let Some(d) = geometry.expected_dims() {
            if linear_sizes.len() != d {
                return Err(Error::DimensionCount {
                    geometry: geometry.name(),
                    expected: d,
                    got: linear_sizes.len(),
                });
            }
        }
        if linear_sizes.is_empty() {
            return Err(Error::DimensionCount {
                geometry: geometry.name(),
                expected: 1,
                got: 0,
            });
        }
        for &l in linear_sizes {
            if l < 2 || l % 2 != 0 {
                return Err(Error::OddLinearSize(l));
            }
        }
        if couplings.is_empty() {
            return Err(Error::EmptyCouplings);
        }
        let dims = linear_sizes.len();
        // Symmetric closure: every δ gets a matching -δ with equal J.
        let mut cmap: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (delta, j) in couplings {
            if delta.len() != dims {
                return Err(Error::CouplingDimension {
                    got: delta.clone(),
                    expected: dims,
                });
            }
            if delta.iter().all(|&d| d == 0) {
                return Err(Error::OnSiteCoupling);
            }
            if let Some(&prev) = cmap.get(delta) {
                if prev != *j {
                    return Err(Error::AsymmetricCouplings(
                        delta.clone(),
                        prev,
                        delta.clone(),
                        *j,
                    ));
                }
            }
            cmap.insert(delta.clone(), *j);
        }
        for (delta, j) in couplings {
            let neg: Vec<i64> = delta.iter().map(|d| -d).collect();
            match cmap.get(&neg) {
                Some(&jn) if jn != *j => {
                    return Err(Error::AsymmetricCouplings(delta.clone(), *j, neg, jn));
                }
                Some(_) => {}
                None => {
                    cmap.insert(neg, *j);
                }
            }
        }
        let couplings: Vec<(Vec<i64>, f64)> = cmap.into_iter().collect();

        let n_sites: usize = linear_sizes.iter().product();
        let positions: Vec<Vec<i64>> = (0..n_sites)
            .map(|i| unrank(i, linear_sizes).iter().map(|&c| c as i64).collect())
            .collect();
        let momenta: Vec<Vec<usize>> = (0..n_sites).map(|i| unrank(i, linear_sizes)).collect();

        let jq: Vec<f64> = momenta
            .iter()
            .map(|n| {
                -couplings
                    .iter()
                    .map(|(delta, j)| {
                        let phase: f64 = delta
                            .iter()
                            .zip(n.iter().zip(linear_sizes))
                            .map(|(&d, (&ni, &li))| 2.0 * PI * (ni as f64) * (d as f64) / li as f64)
                            .sum();
                        j * phase.cos()
                    })
                    .sum::<f64>()
            })
            .collect();

        // Ordering vector: maximize J_q over the admissible subgrid
        // 2Q ≡ 0 (n_i ∈ {0, L_i/2}), lexicographic tie-break, then demand
        // the admissible maximum is also the global grid maximum.
        let mut best: Option<(usize, f64)> = None;
        for (idx, n) in momenta.iter().enumerate() {
            if n.iter().zip(linear_sizes).all(|(&ni, &li)| ni == 0 || ni == li / 2) {
                let better = match best {
                    None => true,
                    Some((bidx, bj)) => {
                        jq[idx] > bj + 1e-12
                            || ((jq[idx] - bj).abs() <= 1e-12 && momenta[idx] < momenta[bidx])
                    }
                };
                if better {
                    best = Some((idx, jq[idx]));
                }
            }
        }
        let (q_ordering_index, j_q) = best.ok_or(Error::NoOrderingVector)?;
        let global_max = jq.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if j_q < global_max - 1e-9 {
            return Err(Error::NoOrderingVector);
        }
        if momenta[q_ordering_index].iter().all(|&ni| ni == 0) {
            return Err(Error::FerromagneticOrdering);
        }

        // η_j from integer parity: Q·r_j = π Σ_{i: n_i = L_i/2} x_i.
        let qn = &momenta[q_ordering_index];
        let eta: Vec<f64> = positions
            .iter()
            .map(|r| {
                let s: i64 = r
                    .iter()
                    .zip(qn.iter().zip(linear_sizes))
                    .filter(|(_, (&ni, &li))| ni == li / 2)
                    .map(|(&x, _)| x)
                    .sum();
                if s.rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();

        // Folded bonds: for each site and displacement take the torus
        // neighbor; keep k > j so each unordered pair appears once, with
        // P_jk accumulating all displacements that land on it.
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for j in 0..n_sites {
            for (delta, val) in &couplings {
                let mut coord = positions[j].clone();
                for (c, (&d, &l)) in coord.iter_mut().zip(delta.iter().zip(linear_sizes)) {
                    *c = (*c + d).rem_euclid(l as i64);
                }
                let k = rank(&coord, linear_sizes);
                if k > j {
                    *acc.entry((j, k)).or_insert(0.0) += val;
                }
            }
        }
        let bonds: Vec<(usize, usize, f64)> = acc.into_iter().map(|((j, k), p)| (j, k, p)).collect();

        Ok(LatticeSpec {
            geometry,
            coordination: couplings.len(),
            couplings,
            linear_sizes: linear_sizes.to_vec(),
            n_sites,
            positions,
            momenta,
            jq,
            q_ordering_index,
            eta,
            bonds,
        })
    }

    /// Grid index of an integer momentum tuple.
    pub fn momentum_index(&self, n: &[usize]) -> Result<usize> {
        if n.len() != self.linear_sizes.len()
            || n.iter().zip(&self.linear_sizes).any(|(&ni, &li)| ni >= li)
        {
            return Err(Error::MomentumOffGrid(n.to_vec()));
        }
        Ok(rank_usize(n, &self.linear_sizes))
    }

    /// J_q at a grid momentum.
    pub fn fourier_exchange(&self, n: &[usize]) -> Result<f64> {
        Ok(self.jq[self.momentum_index(n)?])
    }

    /// The ordering vector Q as an integer tuple.
    pub fn ordering_vector(&self) -> &[usize] {
        &self.momenta[self.q_ordering_index]
    }

    /// J_Q, the grid maximum of J_q.
    pub fn j_at_ordering(&self) -> f64 {
        self.jq[self.q_ordering_index]
    }

    /// q·r phase in radians for grid momentum index `iq` and site `j`.
    pub fn q_dot_r(&self, iq: usize, j: usize) -> f64 {
        self.momenta[iq]
            .iter()
            .zip(self.positions[j].iter().zip(&self.linear_sizes))
            .map(|(&ni, (&x, &li))| 2.0 * PI * (ni as f64) * (x as f64) / li as f64)
            .sum()
    }

    /// Grid index of -q.
    pub fn negate_momentum(&self, iq: usize) -> usize {
        let n: Vec<usize> = self.momenta[iq]
            .iter()
            .zip(&self.linear_sizes)
            .map(|(&ni, &li)| (li - ni) % li)
            .collect();
        rank_usize(&n, &self.linear_sizes)
    }

    /// Grid index of q - Q.
    pub fn sub_ordering(&self, iq: usize) -> usize {
        let qn = &self.momenta[self.q_ordering_index];
        let n: Vec<usize> = self.momenta[iq]
            .iter()
            .zip(qn.iter().zip(&self.linear_sizes))
            .map(|(&ni, (&qi, &li))| (ni + li - qi) % li)
            .collect();
        rank_usize(&n, &self.linear_sizes)
    }

    /// Momentum tuple in radians.
    pub fn momentum_radians(&self, iq: usize) -> Vec<f64> {
        self.momenta[iq]
            .iter()
            .zip(&self.linear_sizes)
            .map(|(&ni, &li)| 2.0 * PI * (ni as f64) / li as f64)
            .collect()
    }

    /// Summary record (N, Q, J_Q, z) for logs and sidecars.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "geometry": self.geometry.name(),
            "linear_sizes": self.linear_sizes,
            "n_sites": self.n_sites,
            "ordering_vector_n": self.ordering_vector(),
            "ordering_vector_radians": self.momentum_radians(self.q_ordering_index),
            "j_at_ordering": self.j_at_ordering(),
            "coordination": self.coordination,
        })
    }

    /// Content hash of the construction inputs (hex SHA-256).
    pub fn hash(&self) -> String {
        let canon = serde_json::json!({
            "geometry": self.geometry.name(),
            "linear_sizes": self.linear_sizes,
            "couplings": self.couplings.iter().map(|(d, j)| {
                serde_json::json!({"displacement": d, "j": j})
            }).collect::<Vec<_>>(),
        });
        let mut h = Sha256::new();
        h.update(canon.to_string().as_bytes());
        hex_string(&h.finalize())
    }
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn unrank(mut i: usize, sizes: &[usize]) -> Vec<usize> {
    let mut coord = vec![0usize; sizes.len()];
    for (c, &l) in coord.iter_mut().zip(sizes).rev() {
        *c = i % l;
        i /= l;
    }
    coord
}

fn rank(coord: &[i64], sizes: &[usize]) -> usize {
    coord
        .iter()
        .zip(sizes)
        .fold(0usize, |acc, (&c, &l)| acc * l + c as usize)
}

fn rank_usize(coord: &[usize], sizes: &[usize]) -> usize {
    coord
        .iter()
        .zip(sizes)
        .fold(0usize, |acc, (&c, &l)| acc * l + c)
}

/// NN chain with J = 1, the workhorse test lattice.
pub fn chain(n: usize) -> Result<LatticeSpec> {
    LatticeSpec::build(Geometry::Chain, &[n], &[(vec![1], 1.0)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_chain() {
        let lat = chain(2).unwrap();
        assert_eq!(lat.n_sites, 2);
        assert_eq!(lat.ordering_vector(), &[1]); // q = π
        assert_eq!(lat.eta, vec![1.0, -1.0]);
        // both ±1 displacements fold onto the single pair
        assert_eq!(lat.bonds, vec![(0, 1, 2.0)]);
    }

    #[test]
    fn chain_fourier_values() {
        let lat = chain(8).unwrap();
        assert!((lat.fourier_exchange(&[4]).unwrap() - 2.0).abs() < 1e-15); // J_π = +2
        assert!((lat.fourier_exchange(&[0]).unwrap() + 2.0).abs() < 1e-15); // J_0 = -2
        let sum: f64 = lat.jq.iter().sum();
        assert!(sum.abs() < 1e-12);
        for j in 0..8 {
            assert_eq!(lat.eta[j], if j % 2 == 0 { 1.0 } else { -1.0 });
        }
        assert_eq!(lat.coordination, 2);
    }

    #[test]
    fn square_lattice_ordering() {
        let lat =
            LatticeSpec::build(Geometry::Square, &[4, 4], &[(vec![1, 0], 1.0), (vec![0, 1], 1.0)])
                .unwrap();
        assert_eq!(lat.n_sites, 16);
        assert_eq!(lat.ordering_vector(), &[2, 2]); // Q = (π, π)
        assert!((lat.j_at_ordering() - 4.0).abs() < 1e-15);
        assert_eq!(lat.coordination, 4);
        for (j, pos) in lat.positions.iter().enumerate() {
            let parity = (pos[0] + pos[1]).rem_euclid(2);
            assert_eq!(lat.eta[j], if parity == 0 { 1.0 } else { -1.0 });
        }
        let n_plus = lat.eta.iter().filter(|&&e| e > 0.0).count();
        assert_eq!(n_plus, 8);
    }

    #[test]
    fn ferro_next_nn_keeps_q_pi() {
        let lat = LatticeSpec::build(
            Geometry::Chain,
            &[8],
            &[(vec![1], 1.0), (vec![2], -0.1)],
        )
        .unwrap();
        assert_eq!(lat.ordering_vector(), &[4]);
    }

    #[test]
    fn jq_inversion_symmetry() {
        let lat = LatticeSpec::build(
            Geometry::Square,
            &[4, 6],
            &[(vec![1, 0], 1.0), (vec![0, 1], 0.7), (vec![1, 1], 0.2)],
        )
        .unwrap();
        for iq in 0..lat.n_sites {
            let neg = lat.negate_momentum(iq);
            assert!((lat.jq[iq] - lat.jq[neg]).abs() < 1e-12);
        }
        let sum: f64 = lat.jq.iter().sum();
        assert!(sum.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            LatticeSpec::build(Geometry::Chain, &[7], &[(vec![1], 1.0)]),
            Err(Error::OddLinearSize(7))
        ));
        assert!(matches!(
            LatticeSpec::build(Geometry::Chain, &[8], &[]),
            Err(Error::EmptyCouplings)
        ));
        assert!(matches!(
            LatticeSpec::build(Geometry::Chain, &[8], &[(vec![0], 1.0)]),
            Err(Error::OnSiteCoupling)
        ));
        assert!(matches!(
            LatticeSpec::build(
                Geometry::Chain,
                &[8],
                &[(vec![1], 1.0), (vec![-1], 0.5)]
            ),
            Err(Error::AsymmetricCouplings(..))
        ));
        // Ferromagnetic chain orders at q = 0: rejected.
        assert!(matches!(
            LatticeSpec::build(Geometry::Chain, &[8], &[(vec![1], -1.0)]),
            Err(Error::FerromagneticOrdering)
        ));
        assert!(matches!(
            LatticeSpec::build(Geometry::Square, &[4], &[(vec![1], 1.0)]),
            Err(Error::DimensionCount { .. })
        ));
    }

    #[test]
    fn bond_fold_counts() {
        // N=4 chain: each pair of adjacent sites gets J once from each side.
        let lat = chain(4).unwrap();
        assert_eq!(
            lat.bonds,
            vec![(0, 1, 1.0), (0, 3, 1.0), (1, 2, 1.0), (2, 3, 1.0)]
        );
        // next-NN on N=4: sites two apart see both ±2 displacements.
        let lat = LatticeSpec::build(Geometry::Chain, &[4], &[(vec![1], 1.0), (vec![2], 0.3)])
            .unwrap();
        let p02 = lat
            .bonds
            .iter()
            .find(|(j, k, _)| (*j, *k) == (0, 2))
            .unwrap()
            .2;
        assert!((p02 - 0.6).abs() < 1e-15);
    }

    #[test]
    fn hash_is_input_stable() {
        let a = chain(8).unwrap();
        let b = chain(8).unwrap();
        let c = chain(10).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }
}
