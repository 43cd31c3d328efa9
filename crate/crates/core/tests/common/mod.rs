//! Brute-force oracles and random market generators shared by the
//! integration tests.
#![allow(dead_code)]

use dynprice::{Allocation, Bundle, Market, Rat, Valuation};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn r(n: i64) -> Rat {
    Rat::from(n)
}

pub fn labels(m: usize) -> Vec<String> {
    (0..m).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
}

pub fn md(k: usize, vals: &[i64]) -> Valuation {
    Valuation::MultiDemand {
        k,
        values: vals.iter().map(|&v| r(v)).collect(),
    }
}

pub fn running() -> Market {
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

/// Every allocation of `m`'s items (each item to a buyer or to nobody) with
/// its welfare.
pub fn all_allocations(m: &Market) -> Vec<(Allocation, Rat)> {
    let n = m.num_buyers();
    let items = m.num_items();
    let total = (n + 1).pow(items as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut c = code;
        let mut bundles = vec![Bundle::new(); n];
        for x in 0..items {
            let owner = c % (n + 1);
            c /= n + 1;
            if owner < n {
                bundles[owner].insert(x);
            }
        }
        let a = Allocation::new(bundles);
        let w = (0..n).map(|i| m.value(i, &a.bundles[i]).unwrap()).sum();
        out.push((a, w));
    }
    out
}

pub fn brute_opt(m: &Market) -> Rat {
    all_allocations(m).into_iter().map(|(_, w)| w).max().unwrap()
}

/// Best welfare strictly below the optimum, if any.
pub fn brute_second(m: &Market) -> Option<Rat> {
    let opt = brute_opt(m);
    all_allocations(m).into_iter().map(|(_, w)| w).filter(|w| *w < opt).max()
}

/// Maximum-weight matching by trying every injective row assignment.
pub fn brute_matching(w: &[Vec<Rat>]) -> Rat {
    fn rec(w: &[Vec<Rat>], row: usize, used: &mut Vec<bool>) -> Rat {
        if row == w.len() {
            return Rat::zero();
        }
        let mut best = rec(w, row + 1, used);
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                let cand = &w[row][c] + rec(w, row + 1, used);
                used[c] = false;
                if cand > best {
                    best = cand;
                }
            }
        }
        best
    }
    let cols = w.first().map_or(0, Vec::len);
    rec(w, 0, &mut vec![false; cols])
}

/// Random multi-demand market: `n` buyers, `m` items, caps in `1..=max_cap`,
/// integer values in `0..=max_value`. Unit-demand buyers appear as either kind.
pub fn random_market(rng: &mut ChaCha8Rng, n: usize, m: usize, max_cap: usize, max_value: i64) -> Market {
    let buyers = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=max_cap);
            let values: Vec<Rat> = (0..m).map(|_| r(rng.gen_range(0..=max_value))).collect();
            if k == 1 && rng.gen_bool(0.5) {
                Valuation::UnitDemand { values }
            } else {
                Valuation::MultiDemand { k, values }
            }
        })
        .collect();
    Market::from_valuations(labels(m), buyers).unwrap()
}

/// Every bundle of `m` items as a bundle.
pub fn all_bundles(m: usize) -> impl Iterator<Item = Bundle> {
    (0..1u64 << m).map(Bundle::from_mask)
}

use dynprice::legality::{complete_to_legal, pad_with_filler};
use dynprice::pricer::compute_round_prices;
use dynprice::simulator::{price_vector_failures, Round};
use dynprice::{BuyerId, Error, PriceVector};

/// Tallies of the per-round checks run by [`check_round`].
#[derive(Debug, Default, Clone)]
pub struct RoundChecks {
    pub rounds: usize,
    pub priced_rounds: usize,
    pub positive_prices: usize,
    pub strict_edges: usize,
    pub completable_bundles: usize,
    pub positive_cycle_graphs: usize,
}

/// Checks every pricing invariant on one round of the marking pricer:
/// positive real prices, strict preference along surviving edges, legal and
/// completable demanded bundles, no nonpositive cycle left, and every
/// demanded bundle extending to an optimum of the residual market.
pub fn check_round(
    tally: &mut RoundChecks,
    round: &Round<'_>,
    prices: &PriceVector,
    demands: &[(BuyerId, Vec<Bundle>)],
) -> dynprice::Result<()> {
    let fail = |msg: String| Err(Error::Invalid(msg));
    tally.rounds += 1;

    let (residual, avail) = round.state.residual(round.market);
    let local: Vec<_> = avail.iter().map(|&x| prices.get(x).clone()).collect();
    let local = PriceVector::new(local)?;
    let bad = price_vector_failures(&residual, &local)?;
    if !bad.is_empty() {
        return fail(format!("demanded bundles off the optimum: {bad:?}"));
    }

    let rp = compute_round_prices(round.market, round.state)?;
    if &rp.prices != prices {
        return fail("pricer output is not deterministic".into());
    }
    let Some(d) = rp.detail else { return Ok(()) };
    tally.priced_rounds += 1;

    for x in 0..d.aug.num_real() {
        if !d.augmented_price(x).is_positive() {
            return fail(format!("nonpositive price on item {x}"));
        }
    }
    tally.positive_prices += 1;

    for (&(x, y), _) in &d.h_prime.edges {
        if d.aug.is_imaginary(x) && d.aug.is_imaginary(y) {
            continue;
        }
        let i = d.h.owner[x];
        let ux = d.aug.value(i, x) - d.augmented_price(x);
        let uy = d.aug.value(i, y) - d.augmented_price(y);
        if ux <= uy {
            return fail(format!("edge {x}->{y} not strictly preferred: {ux} <= {uy}"));
        }
    }
    tally.strict_edges += 1;

    match d.h_prime.min_cycle_weight() {
        Some(w) if !w.is_positive() => return fail(format!("nonpositive cycle {w}")),
        _ => {}
    }
    tally.positive_cycle_graphs += 1;

    // Demanded bundles in pruned-market ids.
    for (buyer, bundles) in demands {
        let local_buyer = d.buyer_map.iter().position(|b| b == buyer).unwrap();
        for s in bundles {
            let mapped: Option<Bundle> = s
                .iter()
                .map(|x| d.item_map.iter().position(|&y| y == x))
                .collect();
            let Some(mapped) = mapped else {
                return fail(format!("buyer {buyer} demands a pruned item in {s:?}"));
            };
            let padded = pad_with_filler(&d.aug, local_buyer, &mapped);
            if padded.len() != d.aug.cap(local_buyer) {
                return fail(format!("buyer {buyer} demands {s:?}, wrong size after padding"));
            }
            match complete_to_legal(&d.aug, &d.legality, local_buyer, &padded) {
                Ok(Some(_)) => {}
                other => return fail(format!("buyer {buyer} bundle {s:?} not completable: {other:?}")),
            }
        }
    }
    tally.completable_bundles += 1;
    Ok(())
}
