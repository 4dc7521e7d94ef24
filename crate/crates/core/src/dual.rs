//! Dual quivers, their realization by a Markov operator, and K-theory of
//! finite graph algebras.

use std::fmt;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::markov::{InteriorMode, Kernel, MarkovModel};
use crate::quiver::{build_quiver, isomorphic, Edge, Quiver};
use crate::scalar::Scalar;
use crate::snf::smith_normal_form;

/// The dual of a quiver: vertices are edges, edges are composable pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DualQuiver<S> {
    pub quiver: Quiver<S>,
    /// Base-quiver edge indices `(e₁, e₂)` with `r(e₁) = s(e₂)`, one per dual edge.
    pub pairs: Vec<(usize, usize)>,
}

/// Ê⁰ = E¹, Ê¹ = {(e₁, e₂) : r(e₁) = s(e₂)}, ŝ = e₁, r̂ = e₂, λ̂ = λ_{s(e₂)}({e₁}).
pub fn dual_quiver<S: Scalar>(q: &Quiver<S>) -> DualQuiver<S> {
    let base = q.edges();
    let mut pairs = Vec::new();
    for (i, e1) in base.iter().enumerate() {
        for &j in q.out_edges(e1.range) {
            pairs.push((i, j));
        }
    }
    pairs.sort_unstable();
    let edges = pairs
        .iter()
        .map(|&(i, j)| Edge {
            label: format!("({},{})", base[i].label, base[j].label),
            source: i,
            range: j,
            weight: base[i].weight.clone(),
        })
        .collect();
    let vertices = base.iter().map(|e| e.label.clone()).collect();
    // weights over r̂⁻¹(e₂) are the weights of r⁻¹(s(e₂)), which sum to 1
    let quiver = Quiver::new(vertices, edges, InteriorMode::Discrete)
        .expect("dual of a valid quiver is valid");
    DualQuiver { quiver, pairs }
}

/// Finite kernel on `E¹` with `p({e₁}, e₂) = λ_{s(e₂)}({e₁})` when `r(e₁) = s(e₂)`.
pub fn markov_from_quiver<S: Scalar>(q: &Quiver<S>) -> Result<MarkovModel<S>> {
    let sources = q.sources();
    if let Some(v) = sources.ones().next() {
        return Err(Error::Precondition(format!(
            "vertex {} receives no edges; the range map must be surjective and every λ_v a probability measure",
            q.vertices()[v]
        )));
    }
    for v in 0..q.vertex_count() {
        let total = q
            .in_edges(v)
            .iter()
            .fold(S::zero(), |acc, &e| acc + q.edges()[e].weight.clone());
        if !total.approx_eq(&S::one()) {
            return Err(Error::Precondition(format!(
                "weights into {} sum to {:?}; every λ_v must be a probability measure",
                q.vertices()[v],
                total
            )));
        }
    }
    let edges = q.edges();
    let columns = edges
        .iter()
        .map(|e2| {
            q.in_edges(e2.source)
                .iter()
                .map(|&e1| (e1, edges[e1].weight.clone()))
                .collect()
        })
        .collect();
    let kernel = Kernel::from_columns(edges.len(), columns)?;
    MarkovModel::finite_kernel(edges.iter().map(|e| e.label.clone()).collect(), kernel)
}

/// The quiver of `markov_from_quiver(q)` is isomorphic to the dual of `q`.
pub fn verify_dual_realization<S: Scalar>(q: &Quiver<S>) -> Result<bool> {
    let model = markov_from_quiver(q)?;
    Ok(isomorphic(&build_quiver(&model), &dual_quiver(q).quiver))
}

/// `K₀ = Z^free ⊕ ⊕ Z/dᵢ`, `K₁ = Z^rank_k1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KTheoryInvariant {
    pub free_rank_k0: usize,
    pub torsion_k0: Vec<BigInt>,
    pub rank_k1: usize,
}

impl fmt::Display for KTheoryInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut k0: Vec<String> = Vec::new();
        match self.free_rank_k0 {
            0 => {}
            1 => k0.push("Z".into()),
            r => k0.push(format!("Z^{r}")),
        }
        k0.extend(self.torsion_k0.iter().map(|d| format!("Z/{d}")));
        let k0 = if k0.is_empty() { "0".to_string() } else { k0.join(" ⊕ ") };
        let k1 = match self.rank_k1 {
            0 => "0".to_string(),
            1 => "Z".to_string(),
            r => format!("Z^{r}"),
        };
        write!(f, "K0 = {k0}, K1 = {k1}")
    }
}

/// `I − Aᵗ` with `A[v][w]` the number of edges `v → w`.
pub fn graph_relation_matrix<S: Scalar>(q: &Quiver<S>) -> Vec<Vec<BigInt>> {
    let a = q.adjacency_counts();
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| BigInt::from(i64::from(i == j)) - BigInt::from(a[j][i]))
                .collect()
        })
        .collect()
}

/// K-theory of the graph algebra of a finite sink-free quiver, from the
/// Smith normal form of `I − Aᵗ`.
pub fn k_theory_finite_graph<S: Scalar>(q: &Quiver<S>) -> Result<KTheoryInvariant> {
    if let Some(v) = q.sinks().ones().next() {
        return Err(Error::Precondition(format!(
            "vertex {} is a sink; the cokernel/kernel formula needs a sink-free graph",
            q.vertices()[v]
        )));
    }
    let snf = smith_normal_form(&graph_relation_matrix(q));
    let nullity = q.vertex_count() - snf.rank;
    Ok(KTheoryInvariant {
        free_rank_k0: nullity,
        torsion_k0: snf.torsion(),
        rank_k1: nullity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    fn q(n: usize, pairs: &[(usize, usize)]) -> Quiver<Rational> {
        Quiver::from_pairs(n, pairs).unwrap()
    }

    fn pair_labels(d: &DualQuiver<Rational>) -> Vec<String> {
        d.quiver.edges().iter().map(|e| e.label.clone()).collect()
    }

    #[test]
    fn dual_examples() {
        let loop1 = dual_quiver(&q(1, &[(0, 0)]));
        assert_eq!(loop1.quiver.vertices(), ["e0"]);
        assert_eq!(pair_labels(&loop1), ["(e0,e0)"]);

        let o2 = dual_quiver(&q(1, &[(0, 0), (0, 0)]));
        assert_eq!(o2.quiver.vertex_count(), 2);
        assert_eq!(o2.quiver.edge_count(), 4);

        let ab = dual_quiver(&q(2, &[(0, 0), (0, 1)]));
        assert_eq!(pair_labels(&ab), ["(e0,e0)", "(e0,e1)"]);
    }

    #[test]
    fn markov_from_quiver_examples() {
        let cycle = markov_from_quiver(&q(3, &[(0, 1), (1, 2), (2, 0)])).unwrap();
        let rows = cycle.kernel().to_rows();
        for row in &rows {
            assert_eq!(row.iter().filter(|x| **x == ratio(1, 1)).count(), 1);
        }
        let one = markov_from_quiver(&q(1, &[(0, 0)])).unwrap();
        assert_eq!(one.kernel().to_rows(), vec![vec![ratio(1, 1)]]);
        let o2 = markov_from_quiver(&q(1, &[(0, 0), (0, 0)])).unwrap();
        assert_eq!(o2.kernel().to_rows(), vec![vec![ratio(1, 2); 2]; 2]);

        assert!(markov_from_quiver(&q(2, &[(0, 0), (0, 1), (1, 1)])).is_ok());
        assert!(matches!(markov_from_quiver(&q(2, &[(0, 1), (1, 1)])), Err(Error::Precondition(_))));
    }

    #[test]
    fn realization_examples() {
        assert!(verify_dual_realization(&q(3, &[(0, 1), (1, 2), (2, 0)])).unwrap());
        assert!(verify_dual_realization(&q(1, &[(0, 0)])).unwrap());
        assert!(verify_dual_realization(&q(1, &[(0, 0), (0, 0)])).unwrap());
    }

    #[test]
    fn k_theory_examples() {
        let o2 = q(1, &[(0, 0), (0, 0)]);
        let k = k_theory_finite_graph(&o2).unwrap();
        assert_eq!(k.to_string(), "K0 = 0, K1 = 0");
        assert_eq!(k_theory_finite_graph(&dual_quiver(&o2).quiver).unwrap(), k);

        let loop1 = k_theory_finite_graph(&q(1, &[(0, 0)])).unwrap();
        assert_eq!(loop1.to_string(), "K0 = Z, K1 = Z");

        // three loops: O₃, K0 = Z/2
        let o3 = k_theory_finite_graph(&q(1, &[(0, 0), (0, 0), (0, 0)])).unwrap();
        assert_eq!(o3.to_string(), "K0 = Z/2, K1 = 0");

        assert!(matches!(
            k_theory_finite_graph(&q(2, &[(0, 0), (0, 1)])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn range_of_product_set() {
        // r̂(U₁ ∗ U₂) = s⁻¹(r(U₁)) ∩ U₂ for all edge subsets
        let base = q(3, &[(0, 0), (0, 1), (1, 2), (2, 0), (1, 1)]);
        let d = dual_quiver(&base);
        let m = base.edge_count();
        for u1 in 0u32..(1 << m) {
            for u2 in 0u32..(1 << m) {
                let lhs: u32 = d
                    .pairs
                    .iter()
                    .filter(|&&(a, b)| u1 & (1 << a) != 0 && u2 & (1 << b) != 0)
                    .fold(0, |acc, &(_, b)| acc | (1 << b));
                let ranges: Vec<usize> = (0..m)
                    .filter(|e| u1 & (1 << e) != 0)
                    .map(|e| base.edges()[e].range)
                    .collect();
                let rhs: u32 = (0..m)
                    .filter(|&e| u2 & (1 << e) != 0 && ranges.contains(&base.edges()[e].source))
                    .fold(0, |acc, e| acc | (1 << e));
                assert_eq!(lhs, rhs);
            }
        }
    }
}
