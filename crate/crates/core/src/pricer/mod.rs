//! Per-round item prices for up to three multi-demand buyers.
//!
//! A round restricts the market to the remaining buyers and available items,
//! prunes it to a minimal welfare-supporting item set, pads it with filler
//! items, builds the preference graph on a base optimal allocation, deletes
//! the item edges behind marked class edges, shifts the surviving edges down
//! by `eps` and prices each item at `eps` minus its source distance.

pub mod graph;
pub mod preprocess;

use std::collections::BTreeSet;

use crate::allocator::{augment, minimal_support, second_best_gap, AugmentedMarket};
use crate::error::{Error, Result};
use crate::legality::{equivalence_partition, item_equivalence_graph, ClassKey, EquivClassPartition, ItemEquivGraph, LegalityTable};
use crate::model::{Allocation, BuyerId, Bundle, ItemId, Market, Price, PriceVector};
use crate::rat::Rat;

pub use graph::{build_preference_graph, PreferenceGraph};
pub use preprocess::preprocess_base_allocation;

/// Marked class-graph edges.
pub type MarkSet = BTreeSet<(ClassKey, ClassKey)>;

pub const MAX_PRICED_BUYERS: usize = 3;

/// Marks every edge on a two-cycle and, with three buyers, the in- and
/// out-edge of a smallest class on each of the two singleton-set three-cycles.
/// Ties between smallest classes go to the lowest class key.
pub fn mark_edges(g: &ItemEquivGraph, n: usize) -> Result<MarkSet> {
    if n > MAX_PRICED_BUYERS {
        return Err(Error::TooManyBuyers {
            what: "edge marking",
            max: MAX_PRICED_BUYERS,
            got: n,
        });
    }
    let mut marks = MarkSet::new();
    for (a, b) in &g.edges {
        if g.has_edge(b, a) {
            marks.insert((a.clone(), b.clone()));
        }
    }
    if n == 3 {
        for cycle in three_cycles() {
            if !cycle.iter().all(|k| g.has_vertex(k)) {
                continue;
            }
            let t = (0..3)
                .min_by(|&s, &t| g.size(&cycle[s]).cmp(&g.size(&cycle[t])).then(cycle[s].cmp(&cycle[t])))
                .expect("three vertices");
            let prev = &cycle[(t + 2) % 3];
            let next = &cycle[(t + 1) % 3];
            marks.insert((prev.clone(), cycle[t].clone()));
            marks.insert((cycle[t].clone(), next.clone()));
        }
    }
    Ok(marks)
}

/// `B_{1,{3}} -> B_{2,{1}} -> B_{3,{2}}` and `B_{1,{2}} -> B_{3,{1}} -> B_{2,{3}}`
/// (buyers 1-based in the labels, 0-based here).
pub fn three_cycles() -> [[ClassKey; 3]; 2] {
    [
        [ClassKey::new(0, [2]), ClassKey::new(1, [0]), ClassKey::new(2, [1])],
        [ClassKey::new(0, [1]), ClassKey::new(2, [0]), ClassKey::new(1, [2])],
    ]
}

/// Removes the item edges behind every marked class edge, lowers every
/// remaining item edge by `eps`, and checks that all cycles stay positive.
pub fn prune_and_perturb(
    h: &PreferenceGraph,
    partition: &EquivClassPartition,
    marks: &MarkSet,
    eps: &Rat,
) -> Result<PreferenceGraph> {
    let class: Vec<Option<&ClassKey>> = (0..h.num_items).map(|x| partition.class_of(x)).collect();
    let removed = |x: ItemId, y: ItemId| match (class[x], class[y]) {
        (Some(a), Some(b)) => marks.contains(&(a.clone(), b.clone())),
        _ => false,
    };
    shift_surviving(h, removed, eps)
}

fn shift_surviving(h: &PreferenceGraph, removed: impl Fn(ItemId, ItemId) -> bool, eps: &Rat) -> Result<PreferenceGraph> {
    let edges = h
        .edges
        .iter()
        .filter(|((x, y), _)| !removed(*x, *y))
        .map(|(&k, w)| (k, w - eps))
        .collect();
    let out = PreferenceGraph {
        num_items: h.num_items,
        owner: h.owner.clone(),
        edges,
    };
    if let Some(w) = out.min_cycle_weight() {
        if !w.is_positive() {
            return Err(Error::NonPositiveCycle(w.to_string()));
        }
    }
    Ok(out)
}

/// Everything computed for one priced round with two or three buyers.
/// Item ids are those of the pruned market unless noted.
#[derive(Clone, Debug)]
pub struct PricingDetail {
    pub market: Market,
    /// Pruned-market item to original item.
    pub item_map: Vec<ItemId>,
    /// Pruned-market buyer to original buyer.
    pub buyer_map: Vec<BuyerId>,
    pub aug: AugmentedMarket,
    pub legality: LegalityTable,
    pub base: Allocation,
    pub partition: EquivClassPartition,
    pub class_graph: ItemEquivGraph,
    pub marks: MarkSet,
    pub h: PreferenceGraph,
    pub h_prime: PreferenceGraph,
    pub delta: Rat,
    pub epsilon: Rat,
    /// Source distance of every augmented item in `h_prime`.
    pub distances: Vec<Rat>,
}

impl PricingDetail {
    /// Price of augmented item `x`; filler items cost 0.
    pub fn augmented_price(&self, x: ItemId) -> Rat {
        if self.aug.is_imaginary(x) {
            Rat::zero()
        } else {
            -&self.distances[x] + &self.epsilon
        }
    }

    /// Item edges of `h` missing from `h_prime`.
    pub fn deleted_edges(&self) -> Vec<(ItemId, ItemId)> {
        self.h
            .edges
            .keys()
            .filter(|k| !self.h_prime.edges.contains_key(k))
            .copied()
            .collect()
    }
}

/// Prices for one round, indexed by original item.
#[derive(Clone, Debug)]
pub struct RoundPricing {
    pub prices: PriceVector,
    pub detail: Option<PricingDetail>,
}

impl RoundPricing {
    pub fn epsilon(&self) -> Option<&Rat> {
        self.detail.as_ref().map(|d| &d.epsilon)
    }
}

/// Which buyers are still to arrive and which items are unsold.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MarketState {
    pub remaining: Vec<BuyerId>,
    pub available: Bundle,
}

impl MarketState {
    pub fn initial(m: &Market) -> Self {
        MarketState {
            remaining: (0..m.num_buyers()).collect(),
            available: m.all_items(),
        }
    }

    /// Residual market over the remaining buyers and available items, plus
    /// the map from its items back to original ids.
    pub fn residual(&self, m: &Market) -> (Market, Vec<ItemId>) {
        let items: Vec<ItemId> = self.available.iter().collect();
        (m.restrict(&items, &self.remaining), items)
    }
}

/// State after buyer `i` leaves with `s`.
pub fn next_round(state: &MarketState, i: BuyerId, s: &Bundle) -> Result<MarketState> {
    let Some(pos) = state.remaining.iter().position(|&b| b == i) else {
        return Err(Error::BuyerOutOfRange(i));
    };
    if let Some(x) = s.iter().find(|&x| !state.available.contains(x)) {
        return Err(Error::Unavailable(x));
    }
    let mut remaining = state.remaining.clone();
    remaining.remove(pos);
    Ok(MarketState {
        remaining,
        available: state.available.difference(s),
    })
}

/// Which edges a pricer deletes before the `eps` shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeRule {
    /// Class-graph marking (the correct rule).
    Marked,
    /// Every edge on a zero-weight cycle of the preference graph. Correct
    /// for unit-demand buyers only; kept as a negative control.
    AllZeroCycles,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PricingOptions {
    pub rule: EdgeRule,
    /// Re-choose the base allocation when filler items are present.
    pub preprocess: bool,
}

impl Default for PricingOptions {
    fn default() -> Self {
        PricingOptions {
            rule: EdgeRule::Marked,
            preprocess: true,
        }
    }
}

/// Prices for the round in which `state.remaining` buyers are left.
pub fn compute_round_prices(m: &Market, state: &MarketState) -> Result<RoundPricing> {
    round_prices(m, state, PricingOptions::default())
}

/// Prices for the opening round of `m`.
pub fn price_market(m: &Market) -> Result<RoundPricing> {
    compute_round_prices(m, &MarketState::initial(m))
}

pub fn round_prices(m: &Market, state: &MarketState, opts: PricingOptions) -> Result<RoundPricing> {
    if state.remaining.len() > MAX_PRICED_BUYERS {
        return Err(Error::TooManyBuyers {
            what: "round pricing",
            max: MAX_PRICED_BUYERS,
            got: state.remaining.len(),
        });
    }
    for &i in &state.remaining {
        if m.valuation(i).is_table() {
            return Err(Error::TableBuyer(i));
        }
    }
    let mut prices = PriceVector::unpurchasable(m.num_items());
    if state.remaining.is_empty() {
        return Ok(RoundPricing { prices, detail: None });
    }
    let (residual, avail) = state.residual(m);
    let support = minimal_support(&residual)?;
    let keep: Vec<ItemId> = support.iter().collect();
    let item_map: Vec<ItemId> = keep.iter().map(|&x| avail[x]).collect();

    if state.remaining.len() == 1 || keep.is_empty() {
        // A lone buyer facing only its support at price 0 demands all of it.
        for &x in &item_map {
            prices.set(x, Price::Finite(Rat::zero()));
        }
        return Ok(RoundPricing { prices, detail: None });
    }

    let pruned = residual.restrict(&keep, &(0..residual.num_buyers()).collect::<Vec<_>>());
    let detail = price_pruned(pruned, item_map, state.remaining.clone(), opts)?;
    for (x, &orig) in detail.item_map.iter().enumerate() {
        prices.set(orig, Price::Finite(detail.augmented_price(x)));
    }
    Ok(RoundPricing {
        prices,
        detail: Some(detail),
    })
}

fn price_pruned(market: Market, item_map: Vec<ItemId>, buyer_map: Vec<BuyerId>, opts: PricingOptions) -> Result<PricingDetail> {
    let n = market.num_buyers();
    let aug = augment(&market)?;
    let legality = LegalityTable::compute(&aug);
    let o = aug.optimal_allocation();
    let (base, partition) = if opts.preprocess {
        preprocess_base_allocation(&aug, &legality, &o)?
    } else {
        let p = equivalence_partition(&aug, &legality, &o)?;
        (o, p)
    };
    let class_graph = item_equivalence_graph(&partition);
    let h = build_preference_graph(&aug, &base)?;
    let delta = second_best_gap(&market)?;
    let epsilon = &delta / Rat::from(aug.num_items() + 1);

    let (marks, h_prime) = match opts.rule {
        EdgeRule::Marked => {
            let marks = mark_edges(&class_graph, n)?;
            let hp = prune_and_perturb(&h, &partition, &marks, &epsilon)?;
            (marks, hp)
        }
        EdgeRule::AllZeroCycles => {
            let d = h.all_pairs();
            let on_zero_cycle = |x: ItemId, y: ItemId| {
                let w = h.weight(x, y).expect("edge exists");
                d[y][x].as_ref().is_some_and(|back| (w + back).is_zero())
            };
            (MarkSet::new(), shift_surviving(&h, on_zero_cycle, &epsilon)?)
        }
    };
    let distances = h_prime
        .distances_from_source()
        .ok_or_else(|| Error::NonPositiveCycle("negative cycle reachable from source".into()))?;

    Ok(PricingDetail {
        market,
        item_map,
        buyer_map,
        aug,
        legality,
        base,
        partition,
        class_graph,
        marks,
        h,
        h_prime,
        delta,
        epsilon,
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{demand_correspondence, Valuation};

    fn running() -> Market {
        let r = |v: &[i64]| v.iter().map(|&x| Rat::from(x)).collect::<Vec<_>>();
        Market::from_valuations(
            ["a", "b", "c", "d", "e"].map(String::from).to_vec(),
            vec![
                Valuation::MultiDemand { k: 2, values: r(&[1, 1, 1, 1, 0]) },
                Valuation::MultiDemand { k: 2, values: r(&[0, 0, 1, 1, 1]) },
                Valuation::UnitDemand { values: r(&[1, 1, 0, 0, 1]) },
            ],
        )
        .unwrap()
    }

    fn q(n: i64, d: i64) -> Price {
        Price::Finite(Rat::new(n, d))
    }

    #[test]
    fn running_example_prices() {
        let m = running();
        let rp = price_market(&m).unwrap();
        let d = rp.detail.as_ref().unwrap();
        assert_eq!(d.delta, Rat::one());
        assert_eq!(d.epsilon, Rat::new(1, 6));
        let expect = vec![q(1, 6), q(1, 6), q(1, 3), q(1, 3), q(1, 6)];
        assert_eq!(rp.prices, PriceVector::new(expect).unwrap());

        let b13 = ClassKey::new(0, [2]);
        let b21 = ClassKey::new(1, [0]);
        let b32 = ClassKey::new(2, [1]);
        let marks: MarkSet = [(b21.clone(), b32.clone()), (b32, b13)].into_iter().collect();
        assert_eq!(d.marks, marks);
        // c, d -> e and e -> a, b
        assert_eq!(d.deleted_edges(), vec![(2, 4), (3, 4), (4, 0), (4, 1)]);

        let all = m.all_items();
        let d1 = demand_correspondence(m.valuation(0), &rp.prices, &all).unwrap();
        assert_eq!(d1, BTreeSet::from([Bundle::from([0, 1])]));
    }

    #[test]
    fn running_example_edge_weights() {
        let m = running();
        let rp = price_market(&m).unwrap();
        let h = &rp.detail.unwrap().h;
        assert_eq!(h.weight(0, 2), Some(&Rat::zero()));
        assert_eq!(h.weight(4, 0), Some(&Rat::zero()));
        assert_eq!(h.weight(0, 4), Some(&Rat::one()));
        assert_eq!(h.weight(0, 1), None);
        assert!(h.min_cycle_weight().unwrap() >= Rat::zero());
    }

    #[test]
    fn naive_rule_prices_everything_equally() {
        let m = running();
        let rp = round_prices(&m, &MarketState::initial(&m), PricingOptions { rule: EdgeRule::AllZeroCycles, preprocess: true }).unwrap();
        assert!(rp.prices.iter().all(|p| p == &q(1, 6)));
        let d1 = demand_correspondence(m.valuation(0), &rp.prices, &m.all_items()).unwrap();
        assert!(d1.contains(&Bundle::from([2, 3])));
    }

    #[test]
    fn mark_edges_examples() {
        let b12 = ClassKey::new(0, [1]);
        let b21 = ClassKey::new(1, [0]);
        let g = ItemEquivGraph {
            vertices: vec![b12.clone(), b21.clone()],
            sizes: [(b12.clone(), 1), (b21.clone(), 2)].into_iter().collect(),
            edges: [(b12.clone(), b21.clone()), (b21.clone(), b12.clone())].into_iter().collect(),
        };
        assert_eq!(mark_edges(&g, 2).unwrap().len(), 2);
        let acyclic = ItemEquivGraph {
            vertices: vec![ClassKey::new(0, [])],
            sizes: [(ClassKey::new(0, []), 1)].into_iter().collect(),
            edges: BTreeSet::new(),
        };
        assert!(mark_edges(&acyclic, 3).unwrap().is_empty());
        assert!(matches!(mark_edges(&acyclic, 4), Err(Error::TooManyBuyers { .. })));
    }

    #[test]
    fn single_buyer_round_is_free() {
        let m = running();
        let state = MarketState {
            remaining: vec![2],
            available: Bundle::from([0, 1, 4]),
        };
        let rp = compute_round_prices(&m, &state).unwrap();
        let finite: Vec<ItemId> = (0..5).filter(|&x| rp.prices.get(x).finite().is_some()).collect();
        assert_eq!(finite.len(), 1);
        assert_eq!(rp.prices.get(finite[0]), &q(0, 1));
    }

    #[test]
    fn next_round_examples() {
        let m = running();
        let s = next_round(&MarketState::initial(&m), 0, &Bundle::from([0, 1])).unwrap();
        assert_eq!(s.remaining, vec![1, 2]);
        assert_eq!(s.available, Bundle::from([2, 3, 4]));
        let (res, map) = s.residual(&m);
        assert_eq!(res.num_buyers(), 2);
        assert_eq!(map, vec![2, 3, 4]);
        assert_eq!(crate::allocator::opt_welfare(&res).unwrap(), Rat::from(3));
        assert_eq!(next_round(&s, 1, &Bundle::from([0])), Err(Error::Unavailable(0)));
        let s = next_round(&s, 1, &Bundle::from([2, 4])).unwrap();
        let s = next_round(&s, 2, &Bundle::new()).unwrap();
        assert!(s.remaining.is_empty());
    }
}
