//! Items, bundles, valuations, markets, allocations and prices, plus the basic
//! economic operations over them: value, utility, welfare and demand.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::Rat;

pub type ItemId = usize;
pub type BuyerId = usize;

/// Exhaustive scans over `2^m` bundles refuse markets larger than this.
pub const MAX_EXHAUSTIVE_ITEMS: usize = 16;

/// A set of items, kept sorted.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bundle(BTreeSet<ItemId>);

impl Bundle {
    pub fn new() -> Self {
        Bundle(BTreeSet::new())
    }

    pub fn full(m: usize) -> Self {
        (0..m).collect()
    }

    pub fn from_mask(mask: u64) -> Self {
        (0..64).filter(|i| mask >> i & 1 == 1).collect()
    }

    /// Bit mask of the bundle. All ids must be below 64.
    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &x| {
            assert!(x < 64, "item id {x} does not fit a mask");
            acc | 1 << x
        })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: ItemId) -> bool {
        self.0.contains(&x)
    }

    pub fn insert(&mut self, x: ItemId) -> bool {
        self.0.insert(x)
    }

    pub fn remove(&mut self, x: ItemId) -> bool {
        self.0.remove(&x)
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = ItemId> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &Bundle) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &Bundle) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn union(&self, other: &Bundle) -> Bundle {
        self.0.union(&other.0).copied().collect()
    }

    pub fn difference(&self, other: &Bundle) -> Bundle {
        self.0.difference(&other.0).copied().collect()
    }

    pub fn intersection(&self, other: &Bundle) -> Bundle {
        self.0.intersection(&other.0).copied().collect()
    }

    pub fn symmetric_difference(&self, other: &Bundle) -> Bundle {
        self.0.symmetric_difference(&other.0).copied().collect()
    }

    pub fn with(&self, x: ItemId) -> Bundle {
        let mut b = self.clone();
        b.insert(x);
        b
    }

    pub fn without(&self, x: ItemId) -> Bundle {
        let mut b = self.clone();
        b.remove(x);
        b
    }
}

impl FromIterator<ItemId> for Bundle {
    fn from_iter<I: IntoIterator<Item = ItemId>>(iter: I) -> Self {
        Bundle(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[ItemId; N]> for Bundle {
    fn from(items: [ItemId; N]) -> Self {
        items.into_iter().collect()
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

/// A buyer's valuation over bundles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Valuation {
    /// Sum of the `k` highest item values in the bundle.
    MultiDemand { k: usize, values: Vec<Rat> },
    /// Highest item value in the bundle.
    UnitDemand { values: Vec<Rat> },
    /// Explicit value per bundle, indexed by bundle mask.
    Table { values: Vec<Rat> },
}

impl Valuation {
    /// Cap on the number of items that contribute value, if the valuation is
    /// multi-demand (unit-demand counts as `k = 1`).
    pub fn cap(&self) -> Option<usize> {
        match self {
            Valuation::MultiDemand { k, .. } => Some(*k),
            Valuation::UnitDemand { .. } => Some(1),
            Valuation::Table { .. } => None,
        }
    }

    /// Per-item values of a multi-demand or unit-demand valuation.
    pub fn item_values(&self) -> Option<&[Rat]> {
        match self {
            Valuation::MultiDemand { values, .. } | Valuation::UnitDemand { values } => {
                Some(values)
            }
            Valuation::Table { .. } => None,
        }
    }

    pub fn is_table(&self) -> bool {
        matches!(self, Valuation::Table { .. })
    }

    /// Number of items the valuation is defined over.
    pub fn num_items(&self) -> usize {
        match self {
            Valuation::MultiDemand { values, .. } | Valuation::UnitDemand { values } => {
                values.len()
            }
            Valuation::Table { values } => values.len().trailing_zeros() as usize,
        }
    }

    pub fn value(&self, s: &Bundle) -> Result<Rat> {
        let m = self.num_items();
        if let Some(x) = s.iter().find(|&x| x >= m) {
            return Err(Error::ItemOutOfRange(x));
        }
        Ok(self.eval(s))
    }

    /// `value` without the range check.
    pub(crate) fn eval(&self, s: &Bundle) -> Rat {
        match self {
            Valuation::MultiDemand { k, values } => top_k_sum(*k, s.iter().map(|x| &values[x])),
            Valuation::UnitDemand { values } => top_k_sum(1, s.iter().map(|x| &values[x])),
            Valuation::Table { values } => values[s.mask() as usize].clone(),
        }
    }

    /// Explicit table form over `m` items.
    pub fn to_table(&self) -> Result<Valuation> {
        let m = self.num_items();
        if m > MAX_EXHAUSTIVE_ITEMS {
            return Err(Error::TooManyItems {
                what: "table conversion",
                max: MAX_EXHAUSTIVE_ITEMS,
                got: m,
            });
        }
        let values = (0..1u64 << m)
            .map(|mask| self.eval(&Bundle::from_mask(mask)))
            .collect();
        Ok(Valuation::Table { values })
    }

    /// Same valuation over a subset of the items, in the order of `keep`.
    pub fn restrict(&self, keep: &[ItemId]) -> Valuation {
        match self {
            Valuation::MultiDemand { k, values } => Valuation::MultiDemand {
                k: *k,
                values: keep.iter().map(|&x| values[x].clone()).collect(),
            },
            Valuation::UnitDemand { values } => Valuation::UnitDemand {
                values: keep.iter().map(|&x| values[x].clone()).collect(),
            },
            Valuation::Table { values } => {
                let sub = (0..1u64 << keep.len())
                    .map(|mask| {
                        let orig = (0..keep.len())
                            .filter(|i| mask >> i & 1 == 1)
                            .fold(0u64, |acc, i| acc | 1 << keep[i]);
                        values[orig as usize].clone()
                    })
                    .collect();
                Valuation::Table { values: sub }
            }
        }
    }

    fn validate(&self, buyer: BuyerId, labels: &[String]) -> Result<()> {
        let m = labels.len();
        match self {
            Valuation::MultiDemand { k, values } => {
                if *k == 0 {
                    return Err(Error::ZeroCap(buyer));
                }
                check_item_values(buyer, values, labels)
            }
            Valuation::UnitDemand { values } => check_item_values(buyer, values, labels),
            Valuation::Table { values } => {
                if m > MAX_EXHAUSTIVE_ITEMS {
                    return Err(Error::TooManyItems {
                        what: "table valuation",
                        max: MAX_EXHAUSTIVE_ITEMS,
                        got: m,
                    });
                }
                if values.len() != 1 << m {
                    return Err(Error::Invalid(format!(
                        "table valuation of buyer {buyer} has {} entries, expected {}",
                        values.len(),
                        1usize << m
                    )));
                }
                if !values[0].is_zero() {
                    return Err(Error::NotNormalized {
                        buyer,
                        value: values[0].to_string(),
                    });
                }
                for (mask, v) in values.iter().enumerate() {
                    if v.is_negative() {
                        return Err(Error::NegativeValue {
                            what: format!(
                                "buyer {buyer}, bundle {{{}}}",
                                bundle_label(&Bundle::from_mask(mask as u64), labels)
                            ),
                            value: v.to_string(),
                        });
                    }
                    for x in 0..m {
                        if mask >> x & 1 == 0 {
                            let bigger = mask | 1 << x;
                            if values[bigger] < *v {
                                return Err(Error::NotMonotone {
                                    buyer,
                                    smaller: bundle_label(&Bundle::from_mask(mask as u64), labels),
                                    larger: bundle_label(&Bundle::from_mask(bigger as u64), labels),
                                    lo: v.to_string(),
                                    hi: values[bigger].to_string(),
                                });
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

fn check_item_values(buyer: BuyerId, values: &[Rat], labels: &[String]) -> Result<()> {
    if values.len() != labels.len() {
        return Err(Error::Invalid(format!(
            "buyer {buyer} has {} item values, market has {} items",
            values.len(),
            labels.len()
        )));
    }
    for (x, v) in values.iter().enumerate() {
        if v.is_negative() {
            return Err(Error::NegativeValue {
                what: format!("buyer {buyer}, item {}", labels[x]),
                value: v.to_string(),
            });
        }
    }
    Ok(())
}

fn top_k_sum<'a>(k: usize, vals: impl Iterator<Item = &'a Rat>) -> Rat {
    let mut v: Vec<&Rat> = vals.collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v.into_iter().take(k).sum()
}

/// Comma-separated item labels of a bundle, in item order.
pub fn bundle_label(s: &Bundle, labels: &[String]) -> String {
    s.iter()
        .map(|x| labels.get(x).cloned().unwrap_or_else(|| format!("#{x}")))
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Buyer {
    pub name: String,
    pub valuation: Valuation,
}

/// Item labels plus the buyers' valuations over them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Market {
    items: Vec<String>,
    buyers: Vec<Buyer>,
}

impl Market {
    pub fn new(items: Vec<String>, buyers: Vec<Buyer>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for it in &items {
            if !seen.insert(it.as_str()) {
                return Err(Error::DuplicateItem(it.clone()));
            }
        }
        for (i, b) in buyers.iter().enumerate() {
            b.valuation.validate(i, &items)?;
        }
        Ok(Market { items, buyers })
    }

    /// Builds a market from valuations alone, naming buyers `1..=n`.
    pub fn from_valuations(items: Vec<String>, valuations: Vec<Valuation>) -> Result<Self> {
        let buyers = valuations
            .into_iter()
            .enumerate()
            .map(|(i, valuation)| Buyer {
                name: (i + 1).to_string(),
                valuation,
            })
            .collect();
        Market::new(items, buyers)
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn num_buyers(&self) -> usize {
        self.buyers.len()
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn buyers(&self) -> &[Buyer] {
        &self.buyers
    }

    pub fn valuation(&self, i: BuyerId) -> &Valuation {
        &self.buyers[i].valuation
    }

    pub fn item_index(&self, label: &str) -> Result<ItemId> {
        self.items
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownItem(label.to_string()))
    }

    pub fn bundle(&self, labels: &[&str]) -> Result<Bundle> {
        labels.iter().map(|l| self.item_index(l)).collect()
    }

    pub fn all_items(&self) -> Bundle {
        Bundle::full(self.items.len())
    }

    pub fn label(&self, s: &Bundle) -> String {
        bundle_label(s, &self.items)
    }

    pub fn is_multi_demand(&self) -> bool {
        self.buyers.iter().all(|b| !b.valuation.is_table())
    }

    /// Errors with the first table buyer, if any.
    pub fn require_multi_demand(&self) -> Result<()> {
        match self.buyers.iter().position(|b| b.valuation.is_table()) {
            Some(i) => Err(Error::TableBuyer(i)),
            None => Ok(()),
        }
    }

    pub fn check_bundle(&self, s: &Bundle) -> Result<()> {
        match s.iter().find(|&x| x >= self.items.len()) {
            Some(x) => Err(Error::ItemOutOfRange(x)),
            None => Ok(()),
        }
    }

    pub fn value(&self, i: BuyerId, s: &Bundle) -> Result<Rat> {
        if i >= self.buyers.len() {
            return Err(Error::BuyerOutOfRange(i));
        }
        self.check_bundle(s)?;
        Ok(self.buyers[i].valuation.eval(s))
    }

    /// Sub-market on `items` (in the given order) and `buyers`.
    pub fn restrict(&self, items: &[ItemId], buyers: &[BuyerId]) -> Market {
        Market {
            items: items.iter().map(|&x| self.items[x].clone()).collect(),
            buyers: buyers
                .iter()
                .map(|&i| Buyer {
                    name: self.buyers[i].name.clone(),
                    valuation: self.buyers[i].valuation.restrict(items),
                })
                .collect(),
        }
    }
}

/// One bundle per buyer; bundles are pairwise disjoint.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation {
    pub bundles: Vec<Bundle>,
}

impl Allocation {
    pub fn empty(n: usize) -> Self {
        Allocation {
            bundles: vec![Bundle::new(); n],
        }
    }

    pub fn new(bundles: Vec<Bundle>) -> Self {
        Allocation { bundles }
    }

    /// Errors with the first item found in two bundles.
    pub fn check_disjoint(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for b in &self.bundles {
            for x in b.iter() {
                if !seen.insert(x) {
                    return Err(Error::OverlappingBundles(x));
                }
            }
        }
        Ok(())
    }

    pub fn allocated(&self) -> Bundle {
        self.bundles.iter().flat_map(|b| b.iter()).collect()
    }

    /// Buyer holding `x`, if any.
    pub fn owner(&self, x: ItemId) -> Option<BuyerId> {
        self.bundles.iter().position(|b| b.contains(x))
    }
}

pub fn social_welfare(market: &Market, a: &Allocation) -> Result<Rat> {
    a.check_disjoint()?;
    if a.bundles.len() > market.num_buyers() {
        return Err(Error::BuyerOutOfRange(a.bundles.len() - 1));
    }
    a.bundles
        .iter()
        .enumerate()
        .map(|(i, b)| market.value(i, b))
        .sum()
}

/// An item price: a nonnegative rational, or a sentinel that makes every
/// bundle containing the item undemandable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Price {
    Finite(Rat),
    Unpurchasable,
}

/// Serialized as the rational string, or `"unpurchasable"`.
impl Serialize for Price {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Price::Finite(r) => r.serialize(serializer),
            Price::Unpurchasable => serializer.serialize_str("unpurchasable"),
        }
    }
}

impl Price {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Price::Finite(r) => Some(r),
            Price::Unpurchasable => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct PriceVector(Vec<Price>);

impl PriceVector {
    pub fn new(prices: Vec<Price>) -> Result<Self> {
        for (x, p) in prices.iter().enumerate() {
            if let Price::Finite(r) = p {
                if r.is_negative() {
                    return Err(Error::NegativeValue {
                        what: format!("price of item {x}"),
                        value: r.to_string(),
                    });
                }
            }
        }
        Ok(PriceVector(prices))
    }

    pub fn finite(prices: Vec<Rat>) -> Result<Self> {
        PriceVector::new(prices.into_iter().map(Price::Finite).collect())
    }

    pub fn zeros(m: usize) -> Self {
        PriceVector(vec![Price::Finite(Rat::zero()); m])
    }

    pub fn unpurchasable(m: usize) -> Self {
        PriceVector(vec![Price::Unpurchasable; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, x: ItemId) -> &Price {
        &self.0[x]
    }

    pub fn set(&mut self, x: ItemId, p: Price) {
        if let Price::Finite(r) = &p {
            assert!(!r.is_negative(), "negative price");
        }
        self.0[x] = p;
    }

    pub fn iter(&self) -> impl Iterator<Item = &Price> {
        self.0.iter()
    }

    /// Total price of a bundle; `None` if it contains an unpurchasable item.
    pub fn total(&self, s: &Bundle) -> Option<Rat> {
        s.iter().map(|x| self.0[x].finite().cloned()).sum()
    }
}

/// `v(S) - p(S)`, or `None` (minus infinity) when `S` holds an unpurchasable
/// item. `Option`'s ordering puts `None` below every finite utility.
pub fn utility(v: &Valuation, s: &Bundle, p: &PriceVector) -> Option<Rat> {
    p.total(s).map(|cost| v.eval(s) - cost)
}

/// Every utility-maximizing bundle among subsets of `items`.
///
/// Multi-demand and unit-demand valuations are handled structurally; tables
/// by an exhaustive scan.
pub fn demand_correspondence(
    v: &Valuation,
    p: &PriceVector,
    items: &Bundle,
) -> Result<BTreeSet<Bundle>> {
    match v {
        Valuation::MultiDemand { k, values } => Ok(multi_demand_set(*k, values, p, items)),
        Valuation::UnitDemand { values } => Ok(multi_demand_set(1, values, p, items)),
        Valuation::Table { .. } => demand_exhaustive(v, p, items),
    }
}

/// Demand by scanning every subset of the purchasable available items.
pub fn demand_exhaustive(
    v: &Valuation,
    p: &PriceVector,
    items: &Bundle,
) -> Result<BTreeSet<Bundle>> {
    let pool: Vec<ItemId> = items
        .iter()
        .filter(|&x| p.get(x).finite().is_some())
        .collect();
    if pool.len() > MAX_EXHAUSTIVE_ITEMS {
        return Err(Error::TooManyItems {
            what: "exhaustive demand",
            max: MAX_EXHAUSTIVE_ITEMS,
            got: pool.len(),
        });
    }
    let mut best: Option<Rat> = None;
    let mut out = BTreeSet::new();
    for mask in 0..1u64 << pool.len() {
        let s: Bundle = (0..pool.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| pool[i])
            .collect();
        let u = utility(v, &s, p).expect("pool items are purchasable");
        match &best {
            Some(b) if u < *b => {}
            Some(b) if u == *b => {
                out.insert(s);
            }
            _ => {
                best = Some(u);
                out.clear();
                out.insert(s);
            }
        }
    }
    Ok(out)
}

fn multi_demand_set(k: usize, values: &[Rat], p: &PriceVector, items: &Bundle) -> BTreeSet<Bundle> {
    // (item, per-item utility)
    let cand: Vec<(ItemId, Rat)> = items
        .iter()
        .filter_map(|x| p.get(x).finite().map(|px| (x, &values[x] - px)))
        .collect();
    let mut pos: Vec<&(ItemId, Rat)> = cand.iter().filter(|(_, u)| u.is_positive()).collect();
    pos.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let zero: Vec<ItemId> = cand
        .iter()
        .filter(|(_, u)| u.is_zero())
        .map(|(x, _)| *x)
        .collect();

    let mut small: Vec<Bundle> = Vec::new();
    if pos.len() > k {
        let t = &pos[k - 1].1;
        let forced: Bundle = pos.iter().filter(|(_, u)| u > t).map(|(x, _)| *x).collect();
        let ties: Vec<ItemId> = pos.iter().filter(|(_, u)| u == t).map(|(x, _)| *x).collect();
        for pick in combinations(&ties, k - forced.len()) {
            small.push(forced.union(&pick.into_iter().collect()));
        }
    } else {
        let base: Bundle = pos.iter().map(|(x, _)| *x).collect();
        let room = k - base.len();
        for r in 0..=room.min(zero.len()) {
            for pick in combinations(&zero, r) {
                small.push(base.union(&pick.into_iter().collect()));
            }
        }
    }

    let mut out: BTreeSet<Bundle> = small.iter().cloned().collect();
    // Bundles above the cap: a full top-k bundle padded with free items that
    // do not displace any of its values.
    for t in small.iter().filter(|t| t.len() == k) {
        let floor = t.iter().map(|x| &values[x]).min().expect("k >= 1");
        let free: Vec<ItemId> = cand
            .iter()
            .filter(|(y, _)| {
                !t.contains(*y)
                    && p.get(*y).finite().is_some_and(|py| py.is_zero())
                    && values[*y] <= *floor
            })
            .map(|(y, _)| *y)
            .collect();
        for mask in 1..1u64 << free.len() {
            let mut s = t.clone();
            for (i, &y) in free.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    s.insert(y);
                }
            }
            out.insert(s);
        }
    }
    out
}

/// All `r`-element subsets of `pool`, in lexicographic order of positions.
pub(crate) fn combinations(pool: &[ItemId], r: usize) -> Vec<Vec<ItemId>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(pool: &[ItemId], start: usize, r: usize, cur: &mut Vec<ItemId>, out: &mut Vec<Vec<ItemId>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..pool.len() {
            if pool.len() - i < r - cur.len() {
                break;
            }
            cur.push(pool[i]);
            rec(pool, i + 1, r, cur, out);
            cur.pop();
        }
    }
    rec(pool, 0, r, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from(n)
    }

    fn running() -> Market {
        let items = ["a", "b", "c", "d", "e"].map(String::from).to_vec();
        Market::from_valuations(
            items,
            vec![
                Valuation::MultiDemand {
                    k: 2,
                    values: vec![r(1), r(1), r(1), r(1), r(0)],
                },
                Valuation::MultiDemand {
                    k: 2,
                    values: vec![r(0), r(0), r(1), r(1), r(1)],
                },
                Valuation::UnitDemand {
                    values: vec![r(1), r(1), r(0), r(0), r(1)],
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn value_examples() {
        let m = running();
        assert_eq!(m.value(0, &m.bundle(&["a", "b"]).unwrap()).unwrap(), r(2));
        assert_eq!(m.value(0, &m.bundle(&["a", "b", "c"]).unwrap()).unwrap(), r(2));
        for i in 0..3 {
            assert_eq!(m.value(i, &Bundle::new()).unwrap(), r(0));
        }
        assert!(matches!(
            m.value(0, &Bundle::from([9])),
            Err(Error::ItemOutOfRange(9))
        ));
    }

    #[test]
    fn utility_examples() {
        let m = running();
        let mut p = PriceVector::zeros(5);
        p.set(4, Price::Finite(Rat::new(1, 2)));
        assert_eq!(utility(m.valuation(2), &Bundle::from([4]), &p), Some(Rat::new(1, 2)));
        assert_eq!(utility(m.valuation(2), &Bundle::new(), &p), Some(r(0)));
        let mut q = PriceVector::zeros(5);
        q.set(0, Price::Finite(Rat::new(1, 3)));
        q.set(1, Price::Finite(Rat::new(1, 3)));
        assert_eq!(utility(m.valuation(0), &Bundle::from([0, 1]), &q), Some(Rat::new(4, 3)));
        q.set(1, Price::Unpurchasable);
        assert_eq!(utility(m.valuation(0), &Bundle::from([0, 1]), &q), None);
    }

    #[test]
    fn welfare_examples() {
        let m = running();
        let a = Allocation::new(vec![Bundle::from([0, 1]), Bundle::from([2, 3]), Bundle::from([4])]);
        assert_eq!(social_welfare(&m, &a).unwrap(), r(5));
        let b = Allocation::new(vec![Bundle::from([2, 3]), Bundle::from([4]), Bundle::from([0])]);
        assert_eq!(social_welfare(&m, &b).unwrap(), r(4));
        assert_eq!(social_welfare(&m, &Allocation::empty(3)).unwrap(), r(0));
        let bad = Allocation::new(vec![Bundle::from([0]), Bundle::from([0])]);
        assert_eq!(social_welfare(&m, &bad), Err(Error::OverlappingBundles(0)));
    }

    #[test]
    fn demand_examples() {
        let m = running();
        let half = PriceVector::finite(vec![Rat::new(1, 2); 5]).unwrap();
        let d = demand_correspondence(m.valuation(2), &half, &m.all_items()).unwrap();
        let expect: BTreeSet<Bundle> = [[0], [1], [4]].into_iter().map(Bundle::from).collect();
        assert_eq!(d, expect);

        let none = PriceVector::unpurchasable(5);
        for i in 0..3 {
            let d = demand_correspondence(m.valuation(i), &none, &m.all_items()).unwrap();
            assert_eq!(d, BTreeSet::from([Bundle::new()]));
        }
    }

    #[test]
    fn zero_prices_admit_oversized_bundles() {
        // With free items, padding a full bundle with a worthless item keeps utility.
        let v = Valuation::MultiDemand {
            k: 1,
            values: vec![r(2), r(1)],
        };
        let p = PriceVector::zeros(2);
        let d = demand_correspondence(&v, &p, &Bundle::full(2)).unwrap();
        assert_eq!(d, demand_exhaustive(&v, &p, &Bundle::full(2)).unwrap());
        assert!(d.contains(&Bundle::from([0, 1])));
    }

    #[test]
    fn table_validation() {
        let items = vec!["x".to_string(), "y".to_string()];
        let not_norm = Valuation::Table {
            values: vec![r(1), r(1), r(1), r(2)],
        };
        assert!(matches!(
            Market::from_valuations(items.clone(), vec![not_norm]),
            Err(Error::NotNormalized { .. })
        ));
        let not_mono = Valuation::Table {
            values: vec![r(0), r(2), r(1), r(1)],
        };
        match Market::from_valuations(items.clone(), vec![not_mono]) {
            Err(Error::NotMonotone { smaller, larger, .. }) => {
                assert_eq!(smaller, "x");
                assert_eq!(larger, "x,y");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn restrict_remaps_tables() {
        let v = Valuation::Table {
            values: vec![r(0), r(1), r(2), r(5)],
        };
        let sub = v.restrict(&[1]);
        assert_eq!(sub, Valuation::Table { values: vec![r(0), r(2)] });
        let md = Valuation::MultiDemand {
            k: 2,
            values: vec![r(3), r(4), r(5)],
        };
        assert_eq!(md.restrict(&[2, 0]).eval(&Bundle::from([0, 1])), r(8));
    }

    #[test]
    fn combinations_enumerates() {
        assert_eq!(combinations(&[1, 2, 3], 2), vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(&[1, 2], 0), vec![Vec::<usize>::new()]);
        assert!(combinations(&[1], 2).is_empty());
    }
}
