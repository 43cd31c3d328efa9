//! Welfare-maximizing allocations, the second-best welfare gap, item pruning
//! and the padded ("augmented") market with zero-value filler items.
//!
//! Multi-demand markets are solved by splitting each buyer with cap `k` into
//! `k` unit-demand copies and running an assignment. Markets with table
//! valuations fall back to a dynamic program over item subsets.

use crate::error::{Error, Result};
use crate::matching::max_weight_matching;
use crate::model::{Allocation, BuyerId, Bundle, ItemId, Market, Valuation, MAX_EXHAUSTIVE_ITEMS};
use crate::rat::Rat;

/// Each multi-demand buyer split into `k` identical unit-demand copies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitDemandReduction {
    /// `(original buyer, copy index)` per copy.
    pub copies: Vec<(BuyerId, usize)>,
    /// Item values of each copy.
    pub values: Vec<Vec<Rat>>,
}

pub fn reduce_to_unit_demand(m: &Market) -> Result<UnitDemandReduction> {
    m.require_multi_demand()?;
    let mut copies = Vec::new();
    let mut values = Vec::new();
    for (i, b) in m.buyers().iter().enumerate() {
        let k = b.valuation.cap().expect("multi-demand");
        let vals = b.valuation.item_values().expect("multi-demand");
        for c in 0..k {
            copies.push((i, c));
            values.push(vals.to_vec());
        }
    }
    Ok(UnitDemandReduction { copies, values })
}

impl UnitDemandReduction {
    /// Collects a per-copy assignment into an allocation of the original buyers.
    pub fn lift(&self, n: usize, assign: &[Option<ItemId>]) -> Allocation {
        let mut a = Allocation::empty(n);
        for (c, x) in assign.iter().enumerate() {
            if let Some(x) = x {
                a.bundles[self.copies[c].0].insert(*x);
            }
        }
        a
    }

    /// Hands each buyer's most valuable items to its copies, one per copy.
    /// Items beyond the cap add no value and stay unassigned.
    pub fn lower(&self, a: &Allocation) -> Vec<Option<ItemId>> {
        let mut assign = vec![None; self.copies.len()];
        for (i, bundle) in a.bundles.iter().enumerate() {
            let slots: Vec<usize> = (0..self.copies.len()).filter(|&c| self.copies[c].0 == i).collect();
            let Some(&first) = slots.first() else { continue };
            let mut items: Vec<ItemId> = bundle.iter().collect();
            items.sort_by(|&x, &y| self.values[first][y].cmp(&self.values[first][x]).then(x.cmp(&y)));
            for (slot, x) in slots.into_iter().zip(items) {
                assign[slot] = Some(x);
            }
        }
        assign
    }

    pub fn welfare(&self, assign: &[Option<ItemId>]) -> Rat {
        assign
            .iter()
            .enumerate()
            .filter_map(|(c, x)| x.map(|x| &self.values[c][x]))
            .sum()
    }
}

/// Assignment solver over per-buyer item values with adjustable caps and item
/// subsets. All probes of the allocator and the legality oracle go through it.
#[derive(Clone, Debug)]
pub(crate) struct Solver {
    pub values: Vec<Vec<Rat>>,
    pub caps: Vec<usize>,
}

impl Solver {
    pub fn new(m: &Market) -> Result<Self> {
        m.require_multi_demand()?;
        Ok(Solver {
            values: m
                .buyers()
                .iter()
                .map(|b| b.valuation.item_values().expect("multi-demand").to_vec())
                .collect(),
            caps: m.buyers().iter().map(|b| b.valuation.cap().expect("multi-demand")).collect(),
        })
    }

    /// Best welfare and bundles using `items` under `caps`.
    pub fn solve(&self, items: &[ItemId], caps: &[usize]) -> (Rat, Vec<Bundle>) {
        let mut owners = Vec::new();
        for (i, &k) in caps.iter().enumerate() {
            owners.extend(std::iter::repeat(i).take(k));
        }
        let weights: Vec<Vec<Rat>> = owners
            .iter()
            .map(|&i| items.iter().map(|&x| self.values[i][x].clone()).collect())
            .collect();
        let (total, assign) = max_weight_matching(&weights);
        let mut bundles = vec![Bundle::new(); caps.len()];
        for (row, col) in assign.into_iter().enumerate() {
            if let Some(col) = col {
                bundles[owners[row]].insert(items[col]);
            }
        }
        (total, bundles)
    }

    pub fn opt(&self, items: &[ItemId], caps: &[usize]) -> Rat {
        self.solve(items, caps).0
    }

    /// Best welfare when `x` must go to buyer `j`; `None` if `j` has no room.
    pub fn forced(&self, items: &[ItemId], x: ItemId, j: BuyerId) -> Option<Rat> {
        if self.caps[j] == 0 {
            return None;
        }
        let rest: Vec<ItemId> = items.iter().copied().filter(|&y| y != x).collect();
        let mut caps = self.caps.clone();
        caps[j] -= 1;
        Some(&self.values[j][x] + self.opt(&rest, &caps))
    }

    /// Best welfare when buyer `j` gives up one unit of cap.
    pub fn reduced_cap(&self, items: &[ItemId], j: BuyerId) -> Option<Rat> {
        if self.caps[j] == 0 {
            return None;
        }
        let mut caps = self.caps.clone();
        caps[j] -= 1;
        Some(self.opt(items, &caps))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptResult {
    pub allocation: Allocation,
    pub welfare: Rat,
}

/// A welfare-maximizing allocation. Multi-demand markets use the assignment
/// reduction; anything else uses the subset dynamic program.
pub fn optimal_allocation(m: &Market) -> Result<OptResult> {
    if m.is_multi_demand() {
        let solver = Solver::new(m)?;
        let items: Vec<ItemId> = (0..m.num_items()).collect();
        let (welfare, bundles) = solver.solve(&items, &solver.caps);
        return Ok(OptResult {
            allocation: Allocation::new(bundles),
            welfare,
        });
    }
    let dp = SubsetDp::new(m)?;
    let allocation = dp.first_optimal();
    Ok(OptResult {
        welfare: dp.opt(),
        allocation,
    })
}

pub fn opt_welfare(m: &Market) -> Result<Rat> {
    Ok(optimal_allocation(m)?.welfare)
}

fn opt_without(m: &Market, solver: Option<&Solver>, keep: &[ItemId]) -> Result<Rat> {
    match solver {
        Some(s) => Ok(s.opt(keep, &s.caps)),
        None => opt_welfare(&m.restrict(keep, &(0..m.num_buyers()).collect::<Vec<_>>())),
    }
}

/// Items whose removal strictly lowers the optimal welfare.
pub fn essential_items(m: &Market) -> Result<Bundle> {
    let solver = if m.is_multi_demand() { Some(Solver::new(m)?) } else { None };
    let all: Vec<ItemId> = (0..m.num_items()).collect();
    let opt = opt_without(m, solver.as_ref(), &all)?;
    let mut out = Bundle::new();
    for x in 0..m.num_items() {
        let rest: Vec<ItemId> = all.iter().copied().filter(|&y| y != x).collect();
        if opt_without(m, solver.as_ref(), &rest)? < opt {
            out.insert(x);
        }
    }
    Ok(out)
}

/// A minimal item set that still supports the optimal welfare, found by
/// dropping items in index order whenever the optimum survives without them.
///
/// Every item of the result is essential in the restricted market. Unlike
/// [`essential_items`], this never discards all copies of interchangeable
/// items.
pub fn minimal_support(m: &Market) -> Result<Bundle> {
    let solver = if m.is_multi_demand() { Some(Solver::new(m)?) } else { None };
    let mut keep: Vec<ItemId> = (0..m.num_items()).collect();
    let opt = opt_without(m, solver.as_ref(), &keep)?;
    for x in 0..m.num_items() {
        let rest: Vec<ItemId> = keep.iter().copied().filter(|&y| y != x).collect();
        if opt_without(m, solver.as_ref(), &rest)? == opt {
            keep = rest;
        }
    }
    Ok(keep.into_iter().collect())
}

/// Market padded with zero-value filler items so total supply equals the
/// sum of the caps. Filler items take ids `m..m + imaginary`.
#[derive(Clone, Debug)]
pub struct AugmentedMarket {
    base: Market,
    imaginary: usize,
    solver: Solver,
    opt: Rat,
}

pub fn augment(m: &Market) -> Result<AugmentedMarket> {
    let aug = augment_unchecked(m)?;
    let demand: usize = aug.solver.caps.iter().sum();
    if m.num_items() > demand {
        return Err(Error::SupplyExceedsDemand(m.num_items(), demand));
    }
    Ok(aug)
}

impl AugmentedMarket {
    pub fn base(&self) -> &Market {
        &self.base
    }

    pub fn num_real(&self) -> usize {
        self.base.num_items()
    }

    pub fn num_imaginary(&self) -> usize {
        self.imaginary
    }

    pub fn num_items(&self) -> usize {
        self.base.num_items() + self.imaginary
    }

    pub fn num_buyers(&self) -> usize {
        self.base.num_buyers()
    }

    pub fn is_imaginary(&self, x: ItemId) -> bool {
        x >= self.base.num_items()
    }

    pub fn imaginary_items(&self) -> impl Iterator<Item = ItemId> {
        self.base.num_items()..self.num_items()
    }

    pub fn cap(&self, i: BuyerId) -> usize {
        self.solver.caps[i]
    }

    pub fn opt(&self) -> &Rat {
        &self.opt
    }

    /// Item value, 0 for filler items.
    pub fn value(&self, i: BuyerId, x: ItemId) -> Rat {
        if self.is_imaginary(x) {
            Rat::zero()
        } else {
            self.solver.values[i][x].clone()
        }
    }

    pub fn label(&self, x: ItemId) -> String {
        if self.is_imaginary(x) {
            format!("_d{}", x - self.num_real() + 1)
        } else {
            self.base.items()[x].clone()
        }
    }

    pub fn bundle_label(&self, s: &Bundle) -> String {
        s.iter().map(|x| self.label(x)).collect::<Vec<_>>().join(",")
    }

    pub(crate) fn real_items(&self) -> Vec<ItemId> {
        (0..self.num_real()).collect()
    }

    /// Welfare of an allocation over augmented items (filler counts 0).
    pub fn welfare(&self, a: &Allocation) -> Rat {
        a.bundles
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let real: Bundle = b.iter().filter(|&x| !self.is_imaginary(x)).collect();
                self.base.valuation(i).eval(&real)
            })
            .sum()
    }

    /// Optimal allocation padded with filler so each buyer holds `k_i` items,
    /// provided every real item is allocated (true for pruned markets).
    pub fn optimal_allocation(&self) -> Allocation {
        let (_, mut bundles) = self.solver.solve(&self.real_items(), &self.solver.caps);
        let mut filler = self.imaginary_items();
        for (i, b) in bundles.iter_mut().enumerate() {
            while b.len() < self.solver.caps[i] {
                match filler.next() {
                    Some(d) => {
                        b.insert(d);
                    }
                    None => break,
                }
            }
        }
        Allocation::new(bundles)
    }

    /// Best welfare with real item `x` given to `j`.
    pub fn forced_opt(&self, x: ItemId, j: BuyerId) -> Option<Rat> {
        self.solver.forced(&self.real_items(), x, j)
    }

    /// Best welfare with buyer `j`'s cap lowered by one.
    pub fn reduced_cap_opt(&self, j: BuyerId) -> Option<Rat> {
        self.solver.reduced_cap(&self.real_items(), j)
    }

    /// Best welfare without real item `x`.
    pub fn opt_without(&self, x: ItemId) -> Rat {
        let rest: Vec<ItemId> = self.real_items().into_iter().filter(|&y| y != x).collect();
        self.solver.opt(&rest, &self.solver.caps)
    }
}

/// Optimal welfare minus the best welfare strictly below it.
///
/// Requires every item to be essential. The runner-up is the largest of: the
/// best welfare with a non-legal (item, buyer) pair forced, the best welfare
/// with a buyer's cap cut by one when filler is not legal for that buyer,
/// and the optimum with one item deleted.
pub fn second_best_gap(m: &Market) -> Result<Rat> {
    let aug = augment_pruned(m)?;
    let opt = aug.opt().clone();
    let mut best: Option<Rat> = None;
    let mut offer = |w: Rat| {
        if w < opt && best.as_ref().map_or(true, |b| w > *b) {
            best = Some(w);
        }
    };
    for x in 0..aug.num_real() {
        for j in 0..aug.num_buyers() {
            if let Some(w) = aug.forced_opt(x, j) {
                offer(w);
            }
        }
        offer(aug.opt_without(x));
    }
    if aug.num_imaginary() > 0 {
        for j in 0..aug.num_buyers() {
            if let Some(w) = aug.reduced_cap_opt(j) {
                offer(w);
            }
        }
    }
    match best {
        Some(w2) => Ok(opt - w2),
        None => Err(Error::DegenerateGap),
    }
}

/// Augments a market after checking that every item is essential.
pub(crate) fn augment_pruned(m: &Market) -> Result<AugmentedMarket> {
    let aug = augment_unchecked(m)?;
    for x in 0..aug.num_real() {
        if aug.opt_without(x) == *aug.opt() {
            return Err(Error::NotPruned(x));
        }
    }
    augment(m)
}

fn augment_unchecked(m: &Market) -> Result<AugmentedMarket> {
    let solver = Solver::new(m)?;
    let demand: usize = solver.caps.iter().sum();
    let items: Vec<ItemId> = (0..m.num_items()).collect();
    let opt = solver.opt(&items, &solver.caps);
    Ok(AugmentedMarket {
        base: m.clone(),
        imaginary: demand.saturating_sub(m.num_items()),
        solver,
        opt,
    })
}

/// Optimal welfare over every item subset, for markets with arbitrary
/// valuations: `f[i][U]` is the best welfare buyers `i..n` reach with `U`.
pub struct SubsetDp {
    m: usize,
    tables: Vec<Vec<Rat>>,
    f: Vec<Vec<Rat>>,
}

impl SubsetDp {
    pub fn new(market: &Market) -> Result<Self> {
        let m = market.num_items();
        if m > MAX_EXHAUSTIVE_ITEMS {
            return Err(Error::TooManyItems {
                what: "subset dynamic program",
                max: MAX_EXHAUSTIVE_ITEMS,
                got: m,
            });
        }
        let tables: Vec<Vec<Rat>> = market
            .buyers()
            .iter()
            .map(|b| match b.valuation.to_table() {
                Ok(Valuation::Table { values }) => values,
                _ => unreachable!("table conversion within limits"),
            })
            .collect();
        let n = tables.len();
        let full = 1usize << m;
        let mut f = vec![vec![Rat::zero(); full]; n + 1];
        for i in (0..n).rev() {
            for u in 0..full {
                let mut best = f[i + 1][u].clone();
                let mut s = u;
                while s > 0 {
                    let w = &tables[i][s] + &f[i + 1][u & !s];
                    if w > best {
                        best = w;
                    }
                    s = (s - 1) & u;
                }
                f[i][u] = best;
            }
        }
        Ok(SubsetDp { m, tables, f })
    }

    pub fn opt(&self) -> Rat {
        self.f[0][(1 << self.m) - 1].clone()
    }

    fn choices(&self, i: usize, u: usize) -> Vec<usize> {
        let target = &self.f[i][u];
        let mut out = Vec::new();
        let mut s = u;
        loop {
            if &(&self.tables[i][s] + &self.f[i + 1][u & !s]) == target {
                out.push(s);
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & u;
        }
        out.reverse();
        out
    }

    fn first_optimal(&self) -> Allocation {
        let n = self.tables.len();
        let mut u = (1usize << self.m) - 1;
        let mut bundles = Vec::with_capacity(n);
        for i in 0..n {
            let s = self.choices(i, u)[0];
            bundles.push(Bundle::from_mask(s as u64));
            u &= !s;
        }
        Allocation::new(bundles)
    }

    /// Every optimal allocation, including every placement of items that add
    /// no value. Stops after `limit` allocations.
    pub fn optimal_allocations(&self, limit: usize) -> Vec<Allocation> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.walk(0, (1usize << self.m) - 1, &mut cur, &mut out, limit);
        out
    }

    fn walk(&self, i: usize, u: usize, cur: &mut Vec<usize>, out: &mut Vec<Allocation>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        self.visit(i, u, cur, &mut |a| {
            out.push(a.clone());
            out.len() < limit
        });
    }

    /// Calls `f` on each optimal allocation until it returns `false`.
    /// Returns whether the walk ran to the end.
    pub fn for_each_optimal(&self, f: &mut dyn FnMut(&Allocation) -> bool) -> bool {
        self.visit(0, (1usize << self.m) - 1, &mut Vec::new(), f)
    }

    fn visit(&self, i: usize, u: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&Allocation) -> bool) -> bool {
        if i == self.tables.len() {
            return f(&Allocation::new(cur.iter().map(|&s| Bundle::from_mask(s as u64)).collect()));
        }
        for s in self.choices(i, u) {
            cur.push(s);
            let go_on = self.visit(i + 1, u & !s, cur, f);
            cur.pop();
            if !go_on {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from(n)
    }

    fn md(k: usize, vals: &[i64]) -> Valuation {
        Valuation::MultiDemand {
            k,
            values: vals.iter().map(|&v| r(v)).collect(),
        }
    }

    fn labels(m: usize) -> Vec<String> {
        (0..m).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
    }

    pub(crate) fn running() -> Market {
        Market::from_valuations(
            labels(5),
            vec![
                md(2, &[1, 1, 1, 1, 0]),
                md(2, &[0, 0, 1, 1, 1]),
                Valuation::UnitDemand {
                    values: vec![r(1), r(1), r(0), r(0), r(1)],
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn reduction_copies() {
        let red = reduce_to_unit_demand(&running()).unwrap();
        assert_eq!(red.copies, vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 0)]);
        let one = Market::from_valuations(labels(3), vec![md(3, &[1, 2, 3])]).unwrap();
        let red = reduce_to_unit_demand(&one).unwrap();
        assert_eq!(red.copies.len(), 3);
        assert!(red.values.iter().all(|v| v == &red.values[0]));
    }

    #[test]
    fn reduction_round_trip_keeps_welfare() {
        let m = running();
        let red = reduce_to_unit_demand(&m).unwrap();
        let a = Allocation::new(vec![Bundle::from([0, 1, 4]), Bundle::from([2, 3]), Bundle::new()]);
        let lowered = red.lower(&a);
        assert_eq!(red.welfare(&lowered), crate::model::social_welfare(&m, &a).unwrap());
    }

    #[test]
    fn running_example_optimum() {
        let m = running();
        let res = optimal_allocation(&m).unwrap();
        assert_eq!(res.welfare, r(5));
        assert_eq!(crate::model::social_welfare(&m, &res.allocation).unwrap(), r(5));
        assert_eq!(second_best_gap(&m).unwrap(), r(1));
        assert_eq!(essential_items(&m).unwrap(), Bundle::full(5));
        assert_eq!(augment(&m).unwrap().num_imaginary(), 0);
    }

    #[test]
    fn small_examples() {
        let one = Market::from_valuations(
            labels(2),
            vec![Valuation::UnitDemand {
                values: vec![r(3), r(7)],
            }],
        )
        .unwrap();
        assert_eq!(opt_welfare(&one).unwrap(), r(7));

        let single = Market::from_valuations(labels(1), vec![md(1, &[5])]).unwrap();
        assert_eq!(second_best_gap(&single).unwrap(), r(5));

        let zero_item = Market::from_valuations(labels(2), vec![md(1, &[4, 0])]).unwrap();
        assert_eq!(essential_items(&zero_item).unwrap(), Bundle::from([0]));
        assert_eq!(second_best_gap(&zero_item), Err(Error::NotPruned(1)));

        let dup = Market::from_valuations(labels(2), vec![md(1, &[1, 1])]).unwrap();
        assert!(essential_items(&dup).unwrap().is_empty());
        assert_eq!(minimal_support(&dup).unwrap(), Bundle::from([1]));
    }

    #[test]
    fn augmentation_counts() {
        let two = Market::from_valuations(labels(3), vec![md(2, &[1, 2, 3]), md(2, &[3, 2, 1])]).unwrap();
        assert_eq!(augment(&two).unwrap().num_imaginary(), 1);
        let one = Market::from_valuations(labels(1), vec![md(3, &[1])]).unwrap();
        let aug = augment(&one).unwrap();
        assert_eq!(aug.num_imaginary(), 2);
        let o = aug.optimal_allocation();
        assert_eq!(o.bundles[0].len(), 3);
        let over = Market::from_valuations(labels(3), vec![md(1, &[1, 2, 3])]).unwrap();
        assert_eq!(augment(&over).unwrap_err(), Error::SupplyExceedsDemand(3, 1));
    }

    #[test]
    fn table_markets_use_the_dynamic_program() {
        // One complementary buyer wanting both items, one unit-demand buyer.
        let comp = Valuation::Table {
            values: vec![r(0), r(0), r(0), r(3)],
        };
        let unit = md(1, &[2, 2]);
        let m = Market::from_valuations(labels(2), vec![comp, unit]).unwrap();
        assert!(matches!(reduce_to_unit_demand(&m), Err(Error::TableBuyer(0))));
        let res = optimal_allocation(&m).unwrap();
        assert_eq!(res.welfare, r(3));
        assert_eq!(res.allocation.bundles[0], Bundle::from([0, 1]));
        let dp = SubsetDp::new(&m).unwrap();
        assert_eq!(dp.optimal_allocations(100).len(), 1);
    }
}
