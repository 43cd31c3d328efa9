//! Re-choosing the base optimal allocation when filler items are present and
//! three buyers remain, so that certain class paths ending at a three-buyer
//! class disappear before pricing.

use crate::allocator::AugmentedMarket;
use crate::error::{Error, Result};
use crate::legality::{check_augmented_optimal, equivalence_partition, ClassKey, EquivClassPartition, LegalityTable};
use crate::model::{Allocation, BuyerId};

/// The two class cycles to eliminate for the given filler legality pattern,
/// or `None` when no rewrite is needed.
pub fn target_cycles(aug: &AugmentedMarket, table: &LegalityTable) -> Option<[[ClassKey; 3]; 2]> {
    if aug.num_buyers() != 3 || aug.num_imaginary() == 0 {
        return None;
    }
    let filler = aug.imaginary_items().next()?;
    let legal = table.buyers(filler);
    match legal.as_slice() {
        // Filler legal for one buyer `i` only.
        &[i] => {
            let (j, k) = others(i);
            let top = ClassKey::new(i, [j, k]);
            Some([
                [ClassKey::new(j, [i]), ClassKey::new(k, [j]), top.clone()],
                [ClassKey::new(k, [i]), ClassKey::new(j, [k]), top],
            ])
        }
        // Filler legal for two buyers `j`, `k`; `i` is the third.
        &[j, k] => {
            let i = 3 - j - k;
            Some([
                [ClassKey::new(k, [j]), ClassKey::new(i, [k]), ClassKey::new(j, [i, k])],
                [ClassKey::new(j, [k]), ClassKey::new(i, [j]), ClassKey::new(k, [i, j])],
            ])
        }
        _ => None,
    }
}

fn others(i: BuyerId) -> (BuyerId, BuyerId) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Moves the lowest item of each class on `cycle` to the owner of the
/// preceding class.
pub fn apply_cycle(o: &Allocation, p: &EquivClassPartition, cycle: &[ClassKey]) -> Allocation {
    let mut out = o.clone();
    let len = cycle.len();
    for t in 0..len {
        let from = &cycle[t];
        let to = &cycle[(t + len - 1) % len];
        let x = p
            .get(from)
            .and_then(|b| b.iter().next())
            .expect("cycle classes are nonempty");
        out.bundles[from.owner].remove(x);
        out.bundles[to.owner].insert(x);
    }
    out
}

/// Applies either target cycle while one exists. Each application lowers the
/// total size of a fixed set of classes, so the loop ends.
pub fn preprocess_base_allocation(
    aug: &AugmentedMarket,
    table: &LegalityTable,
    o: &Allocation,
) -> Result<(Allocation, EquivClassPartition)> {
    let mut cur = o.clone();
    let mut part = equivalence_partition(aug, table, &cur)?;
    let Some(cycles) = target_cycles(aug, table) else {
        return Ok((cur, part));
    };
    // Bounded by the number of items; the potential drops every step.
    for _ in 0..=aug.num_items() {
        let Some(cycle) = cycles
            .iter()
            .find(|c| c.iter().all(|k| part.size(k) > 0))
        else {
            return Ok((cur, part));
        };
        cur = apply_cycle(&cur, &part, cycle);
        check_augmented_optimal(aug, &cur)?;
        part = equivalence_partition(aug, table, &cur)?;
    }
    Err(Error::Invalid("base allocation rewrite did not terminate".into()))
}
