//! Deciding whether a small market has a Walrasian equilibrium.
//!
//! Unsold items must be priced 0. Under that convention an equilibrium
//! allocation is always welfare-optimal, so only optimal allocations are
//! tried; for each one the supporting prices form a linear system.

use std::collections::BTreeMap;

use serde::Serialize;

use super::lp::{Feasibility, LinearSystem};
use crate::allocator::SubsetDp;
use crate::error::{Error, Result};
use crate::model::{demand_correspondence, Allocation, ItemId, Market, Price, PriceVector, Valuation};
use crate::rat::Rat;

pub const MAX_WE_ITEMS: usize = 8;
pub const MAX_WE_BUYERS: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeWitness {
    pub exists: bool,
    pub allocation: Option<Allocation>,
    pub prices: Option<PriceVector>,
    /// Optimal allocations whose price system was solved.
    pub allocations_checked: u64,
}

/// The price system supporting `a`: every buyer weakly prefers its bundle
/// to every other bundle. Unknowns are the prices of sold items, in order.
pub fn support_system(m: &Market, a: &Allocation) -> Result<(Vec<ItemId>, LinearSystem)> {
    let sold: Vec<ItemId> = a.allocated().iter().collect();
    let mut rows: BTreeMap<Vec<i8>, Rat> = BTreeMap::new();
    for (i, s) in a.bundles.iter().enumerate() {
        let Valuation::Table { values } = m.valuation(i).to_table()? else {
            unreachable!("to_table yields a table")
        };
        let vs = &values[s.mask() as usize];
        for (t, vt) in values.iter().enumerate() {
            let coeff: Vec<i8> = sold
                .iter()
                .map(|&x| i8::from(s.contains(x)) - i8::from(t >> x & 1 == 1))
                .collect();
            let rhs = vs - vt;
            match rows.get_mut(&coeff) {
                Some(b) if *b <= rhs => {}
                Some(b) => *b = rhs,
                None => {
                    rows.insert(coeff, rhs);
                }
            }
        }
    }
    let mut sys = LinearSystem::new(sold.len());
    for (coeff, rhs) in rows {
        sys.push(coeff.into_iter().map(|c| Rat::from(i64::from(c))).collect(), rhs);
    }
    Ok((sold, sys))
}

/// Prices on sold items, 0 elsewhere, under which `a` is an equilibrium.
pub fn supporting_prices(m: &Market, a: &Allocation) -> Result<Option<PriceVector>> {
    let (sold, sys) = support_system(m, a)?;
    match sys.solve() {
        Feasibility::Feasible(p) => {
            let mut out = PriceVector::zeros(m.num_items());
            for (x, px) in sold.into_iter().zip(p) {
                out.set(x, Price::Finite(px));
            }
            check_equilibrium(m, a, &out)?;
            Ok(Some(out))
        }
        Feasibility::Infeasible(y) => {
            if !sys.refuted_by(&y) {
                return Err(Error::Certificate("infeasibility multipliers do not refute the system".into()));
            }
            Ok(None)
        }
    }
}

/// Every buyer demands its bundle and unsold items cost 0.
pub fn check_equilibrium(m: &Market, a: &Allocation, p: &PriceVector) -> Result<()> {
    let all = m.all_items();
    for x in all.difference(&a.allocated()).iter() {
        if p.get(x) != &Price::Finite(Rat::zero()) {
            return Err(Error::Certificate(format!("unsold item {x} has a nonzero price")));
        }
    }
    for (i, s) in a.bundles.iter().enumerate() {
        if !demand_correspondence(m.valuation(i), p, &all)?.contains(s) {
            return Err(Error::Certificate(format!("buyer {i} does not demand its bundle")));
        }
    }
    Ok(())
}

pub fn walrasian_exists(m: &Market) -> Result<WeWitness> {
    if m.num_items() > MAX_WE_ITEMS {
        return Err(Error::TooManyItems {
            what: "Walrasian equilibrium decider",
            max: MAX_WE_ITEMS,
            got: m.num_items(),
        });
    }
    if m.num_buyers() > MAX_WE_BUYERS {
        return Err(Error::TooManyBuyers {
            what: "Walrasian equilibrium decider",
            max: MAX_WE_BUYERS,
            got: m.num_buyers(),
        });
    }
    let dp = SubsetDp::new(m)?;
    let mut checked = 0u64;
    let mut found: Option<(Allocation, PriceVector)> = None;
    let mut err: Option<Error> = None;
    dp.for_each_optimal(&mut |a| {
        checked += 1;
        match supporting_prices(m, a) {
            Ok(Some(p)) => {
                found = Some((a.clone(), p));
                false
            }
            Ok(None) => true,
            Err(e) => {
                err = Some(e);
                false
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(match found {
        Some((a, p)) => WeWitness {
            exists: true,
            allocation: Some(a),
            prices: Some(p),
            allocations_checked: checked,
        },
        None => WeWitness {
            exists: false,
            allocation: None,
            prices: None,
            allocations_checked: checked,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn md(k: usize, v: &[i64]) -> Valuation {
        Valuation::MultiDemand {
            k,
            values: v.iter().map(|&x| Rat::from(x)).collect(),
        }
    }

    fn labels(m: usize) -> Vec<String> {
        (0..m).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
    }

    #[test]
    fn unit_demand_has_equilibrium() {
        let m = Market::from_valuations(labels(2), vec![md(1, &[3, 1]), md(1, &[2, 2])]).unwrap();
        let w = walrasian_exists(&m).unwrap();
        assert!(w.exists);
        check_equilibrium(&m, w.allocation.as_ref().unwrap(), w.prices.as_ref().unwrap()).unwrap();
    }

    #[test]
    fn complement_buyer_against_unit_buyer_has_none() {
        // Buyer 1 wants the pair at 3 and wins it; keeping buyer 2 away needs
        // both prices at least 2.
        let tab = Valuation::Table {
            values: [0, 0, 0, 3].map(Rat::from).to_vec(),
        };
        let m = Market::from_valuations(labels(2), vec![tab, md(1, &[2, 2])]).unwrap();
        assert!(!walrasian_exists(&m).unwrap().exists);
    }

    #[test]
    fn size_limits() {
        let m = Market::from_valuations(labels(9), vec![md(1, &[1; 9])]).unwrap();
        assert!(matches!(walrasian_exists(&m), Err(Error::TooManyItems { .. })));
    }
}
