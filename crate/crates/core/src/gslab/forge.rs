//! Given a valuation that is not gross substitutes, adds unit-demand buyers
//! so that the market has neither a Walrasian equilibrium nor a dynamic
//! pricing.
//!
//! From a witness `(A, B, p)` with `B \ A = {b1, b2}` and possibly
//! `A \ B = {a}`, the added buyers are:
//! * `v2`, valuing each `b` at `p_b + v1(M) + 1 + eps'_b`;
//! * `v_a`, valuing `a` at `p_a + eps_a`;
//! * one `v_b` per `b`, valuing `b` at `p_b + eps_b`;
//! * one `v_c` per item outside `A` and `B`, valuing it at `v1(M) + 1`.

use serde::Serialize;

use super::walrasian::{walrasian_exists, WeWitness};
use super::witness::{gs_witness, ViolationWitness};
use crate::error::{Error, Result};
use crate::model::{social_welfare, utility, Allocation, Buyer, Bundle, ItemId, Market, Valuation};
use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForgeParams {
    pub delta: Rat,
    pub epsilon: Rat,
    pub eps_b1: Rat,
    pub eps_b2: Rat,
    pub eps_a: Rat,
    pub eps_b1_prime: Rat,
    pub eps_b2_prime: Rat,
}

/// Which items and buyers play which part. Buyer 0 is `v1`, buyer 1 is `v2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForgeRoles {
    pub a: Option<ItemId>,
    pub b: [ItemId; 2],
    pub common: Bundle,
    pub c: Vec<ItemId>,
    pub buyer_a: Option<usize>,
    pub buyer_b: [usize; 2],
    pub buyer_c: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ForgedMarket {
    #[serde(skip)]
    pub market: Market,
    pub witness: ViolationWitness,
    pub params: ForgeParams,
    pub roles: ForgeRoles,
    pub family: Vec<Allocation>,
    pub family_welfare: Vec<Rat>,
    pub walrasian: WeWitness,
}

impl ForgedMarket {
    /// No Walrasian equilibrium, so no dynamic pricing either: any dynamic
    /// pricing of this market would yield an equilibrium.
    pub fn admits_dynamic_pricing(&self) -> bool {
        self.walrasian.exists
    }
}

struct Eps<'a> {
    a: &'a Rat,
    b: [&'a Rat; 2],
    b_prime: [&'a Rat; 2],
}

fn roles(m: usize, w: &ViolationWitness) -> ForgeRoles {
    let a = w.a.difference(&w.b).iter().next();
    let bs: Vec<ItemId> = w.b.difference(&w.a).iter().collect();
    let both = w.a.union(&w.b);
    let c: Vec<ItemId> = (0..m).filter(|x| !both.contains(*x)).collect();
    let mut next = 2;
    let buyer_a = a.map(|_| {
        next += 1;
        next - 1
    });
    let buyer_b = [next, next + 1];
    next += 2;
    let buyer_c = (next..next + c.len()).collect();
    ForgeRoles {
        a,
        b: [bs[0], bs[1]],
        common: w.a.intersection(&w.b),
        c,
        buyer_a,
        buyer_b,
        buyer_c,
    }
}

fn build(items: &[String], v1: &Valuation, w: &ViolationWitness, r: &ForgeRoles, eps: &Eps<'_>) -> Result<Market> {
    let m = items.len();
    let big = v1.eval(&Bundle::full(m)) + Rat::one();
    let price = |x: ItemId| -> Result<Rat> {
        w.p.get(x)
            .finite()
            .cloned()
            .ok_or_else(|| Error::Certificate(format!("witness leaves item {x} unpriced")))
    };
    let single = |x: ItemId, value: Rat| {
        let mut values = vec![Rat::zero(); m];
        values[x] = value;
        Valuation::UnitDemand { values }
    };
    let mut buyers = vec![Buyer {
        name: "v1".into(),
        valuation: v1.clone(),
    }];
    let mut v2 = vec![Rat::zero(); m];
    for (t, &b) in r.b.iter().enumerate() {
        v2[b] = &(&price(b)? + &big) + eps.b_prime[t];
    }
    buyers.push(Buyer {
        name: "v2".into(),
        valuation: Valuation::UnitDemand { values: v2 },
    });
    if let Some(a) = r.a {
        buyers.push(Buyer {
            name: format!("v_{}", items[a]),
            valuation: single(a, &price(a)? + eps.a),
        });
    }
    for (t, &b) in r.b.iter().enumerate() {
        buyers.push(Buyer {
            name: format!("v_{}", items[b]),
            valuation: single(b, &price(b)? + eps.b[t]),
        });
    }
    for &c in &r.c {
        buyers.push(Buyer {
            name: format!("v_{}", items[c]),
            valuation: single(c, big.clone()),
        });
    }
    Market::new(items.to_vec(), buyers)
}

/// The structured allocation family: `a` goes to `v1` or `v_a`, `v2` takes
/// exactly one of `b1, b2` and the other goes to `v1` or its own buyer,
/// each `c` goes to its buyer, and the common items go to `v1`.
pub fn family(n: usize, r: &ForgeRoles) -> Vec<Allocation> {
    let mut out = Vec::new();
    let a_choices: Vec<Option<usize>> = match (r.a, r.buyer_a) {
        (Some(_), Some(ba)) => vec![Some(0), Some(ba)],
        _ => vec![None],
    };
    for a_to in &a_choices {
        for to_v2 in 0..2 {
            let other = 1 - to_v2;
            for other_to in [0, r.buyer_b[other]] {
                let mut al = Allocation::empty(n);
                al.bundles[0] = r.common.clone();
                if let (Some(a), Some(i)) = (r.a, a_to) {
                    al.bundles[*i].insert(a);
                }
                al.bundles[1].insert(r.b[to_v2]);
                al.bundles[other_to].insert(r.b[other]);
                for (&c, &bc) in r.c.iter().zip(&r.buyer_c) {
                    al.bundles[bc].insert(c);
                }
                out.push(al);
            }
        }
    }
    out
}

fn half_powers(eps: &Rat) -> [Rat; 5] {
    let mut out: [Rat; 5] = Default::default();
    let mut d = Rat::one();
    for slot in out.iter_mut() {
        d = d * Rat::from(2);
        *slot = eps / &d;
    }
    out
}

pub fn forge_counterexample(items: &[String], v1: &Valuation) -> Result<ForgedMarket> {
    let v1 = v1.to_table()?;
    let witness = gs_witness(&v1)?;
    let r = roles(items.len(), &witness);

    // Welfare differences inside the family with every eps term at zero.
    let zero = Rat::zero();
    let flat = Eps {
        a: &zero,
        b: [&zero, &zero],
        b_prime: [&zero, &zero],
    };
    let flat_market = build(items, &v1, &witness, &r, &flat)?;
    let fam = family(flat_market.num_buyers(), &r);
    let flat_w: Vec<Rat> = fam
        .iter()
        .map(|a| social_welfare(&flat_market, a))
        .collect::<Result<_>>()?;
    let mut delta: Option<Rat> = None;
    for (i, wi) in flat_w.iter().enumerate() {
        for wj in &flat_w[i + 1..] {
            let d = (wi - wj).abs();
            if d.is_positive() && delta.as_ref().map_or(true, |cur| d < *cur) {
                delta = Some(d);
            }
        }
    }
    let delta = delta.unwrap_or_else(Rat::one);

    let ua = utility(&v1, &witness.a, &witness.p).expect("witness A is purchasable");
    let ub = utility(&v1, &witness.b, &witness.p).expect("witness B is purchasable");
    let epsilon = (&delta / &Rat::from(2)).min((ub - ua) / Rat::from(4));
    let [eps_b1, eps_b2, eps_a, eps_b1_prime, eps_b2_prime] = half_powers(&epsilon);
    let eps = Eps {
        a: &eps_a,
        b: [&eps_b1, &eps_b2],
        b_prime: [&eps_b1_prime, &eps_b2_prime],
    };
    let market = build(items, &v1, &witness, &r, &eps)?;
    let family_welfare: Vec<Rat> = fam
        .iter()
        .map(|a| social_welfare(&market, a))
        .collect::<Result<_>>()?;
    let mut sorted = family_welfare.clone();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Certificate("two family allocations share a welfare".into()));
    }
    let walrasian = walrasian_exists(&market)?;
    if walrasian.exists {
        return Err(Error::Certificate("forged market has a Walrasian equilibrium".into()));
    }
    Ok(ForgedMarket {
        market,
        witness,
        params: ForgeParams {
            delta,
            epsilon,
            eps_b1,
            eps_b2,
            eps_a,
            eps_b1_prime,
            eps_b2_prime,
        },
        roles: r,
        family: fam,
        family_welfare,
        walrasian,
    })
}
