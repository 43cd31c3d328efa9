//! Which buyer may hold which item in some optimal allocation, the classes
//! of items sharing an owner and a legal-buyer set, and the digraph between
//! those classes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::allocator::AugmentedMarket;
use crate::error::{Error, Result};
use crate::model::{Allocation, BuyerId, Bundle, ItemId};

/// `legal[x][j]`: item `x` (real or filler) goes to buyer `j` in some padded
/// optimal allocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegalityTable {
    legal: Vec<Vec<bool>>,
}

impl LegalityTable {
    pub fn compute(aug: &AugmentedMarket) -> Self {
        let n = aug.num_buyers();
        let mut legal = Vec::with_capacity(aug.num_items());
        for x in 0..aug.num_real() {
            legal.push((0..n).map(|j| probe_real(aug, x, j)).collect());
        }
        let filler: Vec<bool> = (0..n).map(|j| probe_filler(aug, j)).collect();
        for _ in aug.imaginary_items() {
            legal.push(filler.clone());
        }
        LegalityTable { legal }
    }

    pub fn is_legal(&self, x: ItemId, j: BuyerId) -> bool {
        self.legal[x][j]
    }

    pub fn num_items(&self) -> usize {
        self.legal.len()
    }

    /// Buyers for which `x` is legal.
    pub fn buyers(&self, x: ItemId) -> Vec<BuyerId> {
        (0..self.legal[x].len()).filter(|&j| self.legal[x][j]).collect()
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.legal
    }
}

fn probe_real(aug: &AugmentedMarket, x: ItemId, j: BuyerId) -> bool {
    aug.forced_opt(x, j).is_some_and(|w| w == *aug.opt())
}

fn probe_filler(aug: &AugmentedMarket, j: BuyerId) -> bool {
    aug.num_imaginary() > 0 && aug.reduced_cap_opt(j).is_some_and(|w| w == *aug.opt())
}

/// Single legality probe without building the whole table.
pub fn is_legal(aug: &AugmentedMarket, x: ItemId, j: BuyerId) -> bool {
    if aug.is_imaginary(x) {
        probe_filler(aug, j)
    } else {
        probe_real(aug, x, j)
    }
}

/// Class label `(owner, other legal buyers)`. Orders by owner, then by the
/// sorted list of other buyers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassKey {
    pub owner: BuyerId,
    pub others: Vec<BuyerId>,
}

impl ClassKey {
    pub fn new(owner: BuyerId, others: impl IntoIterator<Item = BuyerId>) -> Self {
        let mut others: Vec<BuyerId> = others.into_iter().collect();
        others.sort_unstable();
        others.dedup();
        ClassKey { owner, others }
    }

    pub fn contains_other(&self, j: BuyerId) -> bool {
        self.others.contains(&j)
    }
}

impl fmt::Display for ClassKey {
    /// Buyers are shown 1-based, e.g. `B_{1,{3}}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let others: Vec<String> = self.others.iter().map(|j| (j + 1).to_string()).collect();
        write!(f, "B_{{{},{{{}}}}}", self.owner + 1, others.join(","))
    }
}

/// Items grouped by owner in a base allocation and by legal-buyer set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivClassPartition {
    pub base: Allocation,
    pub classes: BTreeMap<ClassKey, Bundle>,
}

impl EquivClassPartition {
    pub fn class_of(&self, x: ItemId) -> Option<&ClassKey> {
        self.classes.iter().find(|(_, b)| b.contains(x)).map(|(k, _)| k)
    }

    pub fn get(&self, key: &ClassKey) -> Option<&Bundle> {
        self.classes.get(key)
    }

    pub fn size(&self, key: &ClassKey) -> usize {
        self.classes.get(key).map_or(0, Bundle::len)
    }
}

/// Checks that `o` hands each buyer exactly `k_i` augmented items, covers every
/// augmented item once, and reaches the optimal welfare.
pub fn check_augmented_optimal(aug: &AugmentedMarket, o: &Allocation) -> Result<()> {
    o.check_disjoint()?;
    if o.bundles.len() != aug.num_buyers() {
        return Err(Error::Invalid(format!(
            "allocation has {} bundles for {} buyers",
            o.bundles.len(),
            aug.num_buyers()
        )));
    }
    for (i, b) in o.bundles.iter().enumerate() {
        if let Some(x) = b.iter().find(|&x| x >= aug.num_items()) {
            return Err(Error::ItemOutOfRange(x));
        }
        if b.len() != aug.cap(i) {
            return Err(Error::Invalid(format!(
                "buyer {} holds {} augmented items, cap is {}",
                i + 1,
                b.len(),
                aug.cap(i)
            )));
        }
    }
    let w = aug.welfare(o);
    if w != *aug.opt() {
        return Err(Error::NotOptimal {
            got: w.to_string(),
            opt: aug.opt().to_string(),
        });
    }
    Ok(())
}

pub fn equivalence_partition(
    aug: &AugmentedMarket,
    table: &LegalityTable,
    o: &Allocation,
) -> Result<EquivClassPartition> {
    check_augmented_optimal(aug, o)?;
    let mut classes: BTreeMap<ClassKey, Bundle> = BTreeMap::new();
    for (i, b) in o.bundles.iter().enumerate() {
        for x in b.iter() {
            let key = ClassKey::new(i, table.buyers(x).into_iter().filter(|&j| j != i));
            classes.entry(key).or_default().insert(x);
        }
    }
    Ok(EquivClassPartition {
        base: o.clone(),
        classes,
    })
}

/// Digraph on the nonempty classes: `(i, C1) -> (j, C2)` iff `i` is in `C2`,
/// i.e. items of the target class are legal for the source's owner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemEquivGraph {
    pub vertices: Vec<ClassKey>,
    pub sizes: BTreeMap<ClassKey, usize>,
    pub edges: BTreeSet<(ClassKey, ClassKey)>,
}

impl ItemEquivGraph {
    pub fn has_vertex(&self, k: &ClassKey) -> bool {
        self.sizes.contains_key(k)
    }

    pub fn has_edge(&self, a: &ClassKey, b: &ClassKey) -> bool {
        self.edges.contains(&(a.clone(), b.clone()))
    }

    pub fn size(&self, k: &ClassKey) -> usize {
        self.sizes.get(k).copied().unwrap_or(0)
    }
}

pub fn item_equivalence_graph(p: &EquivClassPartition) -> ItemEquivGraph {
    let vertices: Vec<ClassKey> = p
        .classes
        .iter()
        .filter(|(_, b)| !b.is_empty())
        .map(|(k, _)| k.clone())
        .collect();
    let sizes = vertices.iter().map(|k| (k.clone(), p.size(k))).collect();
    let mut edges = BTreeSet::new();
    for a in &vertices {
        for b in &vertices {
            if a != b && b.contains_other(a.owner) {
                edges.insert((a.clone(), b.clone()));
            }
        }
    }
    ItemEquivGraph {
        vertices,
        sizes,
        edges,
    }
}

/// Every buyer holds exactly `k_i` augmented items, each legal for them.
pub fn is_legal_allocation(aug: &AugmentedMarket, table: &LegalityTable, a: &Allocation) -> Result<bool> {
    a.check_disjoint()?;
    if a.bundles.len() != aug.num_buyers() {
        return Ok(false);
    }
    for (i, b) in a.bundles.iter().enumerate() {
        if let Some(x) = b.iter().find(|&x| x >= aug.num_items()) {
            return Err(Error::ItemOutOfRange(x));
        }
        if b.len() != aug.cap(i) || !b.iter().all(|x| table.is_legal(x, i)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pads a real bundle with filler items up to buyer `i`'s cap.
pub fn pad_with_filler(aug: &AugmentedMarket, i: BuyerId, s: &Bundle) -> Bundle {
    let mut out = s.clone();
    for d in aug.imaginary_items() {
        if out.len() >= aug.cap(i) {
            break;
        }
        out.insert(d);
    }
    out
}

/// Gives `s` (padded with filler if short) to buyer `i` and fills every other
/// buyer with exactly `k_j` legal items from the rest, if possible.
///
/// Returns `Ok(None)` when no such completion exists.
pub fn complete_to_legal(
    aug: &AugmentedMarket,
    table: &LegalityTable,
    i: BuyerId,
    s: &Bundle,
) -> Result<Option<Allocation>> {
    if i >= aug.num_buyers() {
        return Err(Error::BuyerOutOfRange(i));
    }
    if let Some(x) = s.iter().find(|&x| x >= aug.num_items()) {
        return Err(Error::ItemOutOfRange(x));
    }
    // Filler items are interchangeable: use whichever ones `s` leaves free.
    let mut s_full = s.clone();
    for d in aug.imaginary_items() {
        if s_full.len() >= aug.cap(i) {
            break;
        }
        if !s_full.contains(d) {
            s_full.insert(d);
        }
    }
    if s_full.len() != aug.cap(i) || !s_full.iter().all(|x| table.is_legal(x, i)) {
        return Err(Error::IllegalBundle(i));
    }

    let rest: Vec<ItemId> = (0..aug.num_items()).filter(|&x| !s_full.contains(x)).collect();
    let slots: Vec<BuyerId> = (0..aug.num_buyers())
        .filter(|&j| j != i)
        .flat_map(|j| std::iter::repeat(j).take(aug.cap(j)))
        .collect();
    if slots.len() != rest.len() {
        return Ok(None);
    }
    // Kuhn's augmenting paths: slots on the left, remaining items on the right.
    let mut item_slot: Vec<Option<usize>> = vec![None; rest.len()];
    for sl in 0..slots.len() {
        let mut seen = vec![false; rest.len()];
        if !kuhn(sl, &slots, &rest, table, &mut seen, &mut item_slot) {
            return Ok(None);
        }
    }
    let mut a = Allocation::empty(aug.num_buyers());
    a.bundles[i] = s_full;
    for (pos, sl) in item_slot.into_iter().enumerate() {
        let sl = sl.expect("perfect matching");
        a.bundles[slots[sl]].insert(rest[pos]);
    }
    Ok(Some(a))
}

fn kuhn(
    sl: usize,
    slots: &[BuyerId],
    rest: &[ItemId],
    table: &LegalityTable,
    seen: &mut [bool],
    item_slot: &mut [Option<usize>],
) -> bool {
    for pos in 0..rest.len() {
        if seen[pos] || !table.is_legal(rest[pos], slots[sl]) {
            continue;
        }
        seen[pos] = true;
        let free = match item_slot[pos] {
            None => true,
            Some(other) => kuhn(other, slots, rest, table, seen, item_slot),
        };
        if free {
            item_slot[pos] = Some(sl);
            return true;
        }
    }
    false
}
