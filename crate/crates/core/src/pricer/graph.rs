//! Weighted digraphs over items plus a source, with shortest paths over
//! exact rationals.

use std::collections::BTreeMap;

use crate::allocator::AugmentedMarket;
use crate::legality::check_augmented_optimal;
use crate::error::Result;
use crate::model::{Allocation, BuyerId, ItemId};
use crate::rat::Rat;

/// Item-level preference graph. Vertex `num_items` is the source, which has a
/// zero-weight edge to every item; item edges `x -> y` join items of
/// different owners, weighted by the owner of `x`'s value difference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreferenceGraph {
    pub num_items: usize,
    pub owner: Vec<BuyerId>,
    pub edges: BTreeMap<(ItemId, ItemId), Rat>,
}

pub fn build_preference_graph(aug: &AugmentedMarket, o: &Allocation) -> Result<PreferenceGraph> {
    check_augmented_optimal(aug, o)?;
    let num_items = aug.num_items();
    let mut owner = vec![0; num_items];
    for (i, b) in o.bundles.iter().enumerate() {
        for x in b.iter() {
            owner[x] = i;
        }
    }
    let mut edges = BTreeMap::new();
    for x in 0..num_items {
        for y in 0..num_items {
            if owner[x] != owner[y] {
                let i = owner[x];
                edges.insert((x, y), aug.value(i, x) - aug.value(i, y));
            }
        }
    }
    Ok(PreferenceGraph {
        num_items,
        owner,
        edges,
    })
}

impl PreferenceGraph {
    pub fn source(&self) -> usize {
        self.num_items
    }

    pub fn weight(&self, x: ItemId, y: ItemId) -> Option<&Rat> {
        self.edges.get(&(x, y))
    }

    /// Single-source distances from the source by Bellman-Ford. `None` if a
    /// negative cycle is reachable.
    pub fn distances_from_source(&self) -> Option<Vec<Rat>> {
        let n = self.num_items;
        // Every item is one zero-weight hop from the source.
        let mut dist = vec![Rat::zero(); n];
        for round in 0..=n {
            let mut changed = false;
            for ((x, y), w) in &self.edges {
                let cand = &dist[*x] + w;
                if cand < dist[*y] {
                    dist[*y] = cand;
                    changed = true;
                }
            }
            if !changed {
                return Some(dist);
            }
            if round == n {
                break;
            }
        }
        None
    }

    /// All-pairs shortest walk weights by Floyd-Warshall. Diagonal entries
    /// hold the lightest closed walk through the vertex, not 0.
    pub fn all_pairs(&self) -> Vec<Vec<Option<Rat>>> {
        let n = self.num_items;
        let mut d: Vec<Vec<Option<Rat>>> = vec![vec![None; n]; n];
        for ((x, y), w) in &self.edges {
            d[*x][*y] = Some(w.clone());
        }
        for k in 0..n {
            for i in 0..n {
                let Some(dik) = d[i][k].clone() else { continue };
                for j in 0..n {
                    if let Some(dkj) = &d[k][j] {
                        let cand = &dik + dkj;
                        if d[i][j].as_ref().map_or(true, |cur| cand < *cur) {
                            d[i][j] = Some(cand);
                        }
                    }
                }
            }
        }
        d
    }

    /// Weight of the lightest cycle, or `None` for an acyclic graph. With a
    /// negative cycle present the result is some negative closed walk.
    pub fn min_cycle_weight(&self) -> Option<Rat> {
        let d = self.all_pairs();
        (0..self.num_items).filter_map(|i| d[i][i].clone()).min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize, i64)]) -> PreferenceGraph {
        PreferenceGraph {
            num_items: n,
            owner: (0..n).collect(),
            edges: edges.iter().map(|&(x, y, w)| ((x, y), Rat::from(w))).collect(),
        }
    }

    #[test]
    fn distances_with_negative_edges() {
        let g = graph(3, &[(0, 1, -2), (1, 2, -1), (2, 0, 4)]);
        let d = g.distances_from_source().unwrap();
        assert_eq!(d, vec![Rat::zero(), Rat::from(-2), Rat::from(-3)]);
        assert_eq!(g.min_cycle_weight(), Some(Rat::from(1)));
    }

    #[test]
    fn negative_cycle_detected() {
        let g = graph(2, &[(0, 1, -2), (1, 0, 1)]);
        assert!(g.distances_from_source().is_none());
        assert!(g.min_cycle_weight().unwrap().is_negative());
    }

    #[test]
    fn acyclic_has_no_cycle_weight() {
        assert_eq!(graph(2, &[(0, 1, 5)]).min_cycle_weight(), None);
    }
}
