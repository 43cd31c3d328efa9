//! Sequential arrivals: buyers show up one at a time, see the current prices,
//! take one utility-maximizing bundle and leave.
//!
//! [`adversarial_verify`] walks every arrival order and every tie-break;
//! [`run_once`] samples a single run from a seed.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::allocator::opt_welfare;
use crate::error::{Error, Result};
use crate::model::{demand_correspondence, Allocation, BuyerId, Bundle, Market, PriceVector};
use crate::pricer::{next_round, round_prices, EdgeRule, MarketState, PricingOptions};
use crate::rat::Rat;

pub const DEFAULT_BRANCH_CAP: u64 = 1_000_000;

/// What a pricer sees before posting prices.
#[derive(Clone, Copy, Debug)]
pub struct Round<'a> {
    pub market: &'a Market,
    pub state: &'a MarketState,
    /// Earlier purchases, in arrival order.
    pub history: &'a [(BuyerId, Bundle)],
}

/// A pricing strategy. Prices are indexed by original item; the simulator
/// ignores prices of sold items.
pub trait Pricer {
    fn name(&self) -> String;

    fn prices(&self, round: &Round<'_>) -> Result<PriceVector>;

    /// Whether prices depend on more than the remaining buyers and items.
    fn history_dependent(&self) -> bool {
        false
    }
}

/// The marking-based pricer.
#[derive(Clone, Copy, Debug, Default)]
pub struct Algorithm1Pricer;

impl Pricer for Algorithm1Pricer {
    fn name(&self) -> String {
        "algorithm1".into()
    }

    fn prices(&self, round: &Round<'_>) -> Result<PriceVector> {
        Ok(round_prices(round.market, round.state, PricingOptions::default())?.prices)
    }
}

/// Round pricing with explicit options, for ablations.
#[derive(Clone, Copy, Debug)]
pub struct ConfiguredPricer(pub PricingOptions);

impl Pricer for ConfiguredPricer {
    fn name(&self) -> String {
        format!("{:?}", self.0)
    }

    fn prices(&self, round: &Round<'_>) -> Result<PriceVector> {
        Ok(round_prices(round.market, round.state, self.0)?.prices)
    }
}

/// Deletes every preference edge on a zero-weight cycle. Fails on some
/// multi-demand markets.
#[derive(Clone, Copy, Debug, Default)]
pub struct NaivePricer;

impl Pricer for NaivePricer {
    fn name(&self) -> String {
        "naive".into()
    }

    fn prices(&self, round: &Round<'_>) -> Result<PriceVector> {
        let opts = PricingOptions {
            rule: EdgeRule::AllZeroCycles,
            preprocess: true,
        };
        Ok(round_prices(round.market, round.state, opts)?.prices)
    }
}

/// Posts the same prices every round.
#[derive(Clone, Debug)]
pub struct StaticPricer(pub PriceVector);

impl Pricer for StaticPricer {
    fn name(&self) -> String {
        "static".into()
    }

    fn prices(&self, _round: &Round<'_>) -> Result<PriceVector> {
        Ok(self.0.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub buyer: BuyerId,
    #[serde(skip)]
    pub prices: PriceVector,
    pub demanded: Vec<Bundle>,
    pub chosen: Bundle,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunTrace {
    pub steps: Vec<Step>,
    pub final_allocation: Allocation,
    pub final_welfare: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub opt: Rat,
    /// Purchase decisions explored (one per arriving buyer per demanded bundle).
    pub branches_explored: u64,
    /// Completed runs.
    pub leaves: u64,
    pub min_welfare: Option<Rat>,
    pub max_welfare: Option<Rat>,
    /// Runs that ended below the optimum, up to `VerifyOptions::max_failures`.
    pub failures: Vec<RunTrace>,
    pub failure_count: u64,
    pub verdict: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub branch_cap: u64,
    pub max_failures: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            branch_cap: DEFAULT_BRANCH_CAP,
            max_failures: 16,
        }
    }
}

/// Called once per explored decision point with the posted prices and the
/// demand sets of every remaining buyer.
pub type Observer<'o> = dyn FnMut(&Round<'_>, &PriceVector, &[(BuyerId, Vec<Bundle>)]) -> Result<()> + 'o;

pub fn adversarial_verify(m: &Market, pricer: &dyn Pricer, opts: VerifyOptions) -> Result<VerificationReport> {
    adversarial_verify_with(m, pricer, opts, &mut |_, _, _| Ok(()))
}

pub fn adversarial_verify_with(
    m: &Market,
    pricer: &dyn Pricer,
    opts: VerifyOptions,
    observer: &mut Observer<'_>,
) -> Result<VerificationReport> {
    let opt = opt_welfare(m)?;
    let mut walk = Walk {
        market: m,
        pricer,
        opts,
        observer,
        memo: HashMap::new(),
        report: VerificationReport {
            opt,
            branches_explored: 0,
            leaves: 0,
            min_welfare: None,
            max_welfare: None,
            failures: Vec::new(),
            failure_count: 0,
            verdict: true,
        },
    };
    let state = MarketState::initial(m);
    let mut history = Vec::new();
    let mut steps = Vec::new();
    walk.visit(&state, &mut history, &mut steps)?;
    let mut report = walk.report;
    report.verdict = report.failure_count == 0;
    Ok(report)
}

type DemandSets = Vec<(BuyerId, Vec<Bundle>)>;

struct Walk<'a, 'o> {
    market: &'a Market,
    pricer: &'a dyn Pricer,
    opts: VerifyOptions,
    observer: &'a mut Observer<'o>,
    memo: HashMap<MarketState, (PriceVector, DemandSets)>,
    report: VerificationReport,
}

impl Walk<'_, '_> {
    fn visit(&mut self, state: &MarketState, history: &mut Vec<(BuyerId, Bundle)>, steps: &mut Vec<Step>) -> Result<()> {
        if state.remaining.is_empty() {
            return self.leaf(history, steps);
        }
        let (prices, demands) = match self.memo.get(state) {
            Some(hit) if !self.pricer.history_dependent() => hit.clone(),
            _ => {
                let round = Round {
                    market: self.market,
                    state,
                    history,
                };
                let prices = self.pricer.prices(&round)?;
                let demands = demand_sets(self.market, state, &prices)?;
                (self.observer)(&round, &prices, &demands)?;
                if !self.pricer.history_dependent() {
                    self.memo.insert(state.clone(), (prices.clone(), demands.clone()));
                }
                (prices, demands)
            }
        };
        for (buyer, bundles) in &demands {
            for s in bundles {
                self.report.branches_explored += 1;
                if self.report.branches_explored > self.opts.branch_cap {
                    return Err(Error::BranchBudgetExceeded(self.opts.branch_cap));
                }
                let next = next_round(state, *buyer, s)?;
                history.push((*buyer, s.clone()));
                steps.push(Step {
                    buyer: *buyer,
                    prices: prices.clone(),
                    demanded: bundles.clone(),
                    chosen: s.clone(),
                });
                self.visit(&next, history, steps)?;
                history.pop();
                steps.pop();
            }
        }
        Ok(())
    }

    fn leaf(&mut self, history: &[(BuyerId, Bundle)], steps: &[Step]) -> Result<()> {
        let alloc = allocation_of(self.market, history);
        let w = crate::model::social_welfare(self.market, &alloc)?;
        let r = &mut self.report;
        r.leaves += 1;
        if r.min_welfare.as_ref().map_or(true, |m| w < *m) {
            r.min_welfare = Some(w.clone());
        }
        if r.max_welfare.as_ref().map_or(true, |m| w > *m) {
            r.max_welfare = Some(w.clone());
        }
        if w != r.opt {
            r.failure_count += 1;
            if r.failures.len() < self.opts.max_failures {
                r.failures.push(RunTrace {
                    steps: steps.to_vec(),
                    final_allocation: alloc,
                    final_welfare: w,
                });
            }
        }
        Ok(())
    }
}

fn demand_sets(m: &Market, state: &MarketState, prices: &PriceVector) -> Result<DemandSets> {
    state
        .remaining
        .iter()
        .map(|&i| {
            let d = demand_correspondence(m.valuation(i), prices, &state.available)?;
            Ok((i, d.into_iter().collect()))
        })
        .collect()
}

fn allocation_of(m: &Market, history: &[(BuyerId, Bundle)]) -> Allocation {
    let mut a = Allocation::empty(m.num_buyers());
    for (i, s) in history {
        a.bundles[*i] = s.clone();
    }
    a
}

/// One run with a uniformly random arrival order and uniformly random
/// tie-breaks, reproducible from `seed`.
pub fn run_once(m: &Market, pricer: &dyn Pricer, seed: u64) -> Result<RunTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<BuyerId> = (0..m.num_buyers()).collect();
    order.shuffle(&mut rng);
    let mut state = MarketState::initial(m);
    let mut history: Vec<(BuyerId, Bundle)> = Vec::new();
    let mut steps = Vec::new();
    for &i in &order {
        let round = Round {
            market: m,
            state: &state,
            history: &history,
        };
        let prices = pricer.prices(&round)?;
        let demanded: Vec<Bundle> = demand_correspondence(m.valuation(i), &prices, &state.available)?
            .into_iter()
            .collect();
        let chosen = demanded.choose(&mut rng).cloned().unwrap_or_default();
        state = next_round(&state, i, &chosen)?;
        history.push((i, chosen.clone()));
        steps.push(Step {
            buyer: i,
            prices,
            demanded,
            chosen,
        });
    }
    let final_allocation = allocation_of(m, &history);
    let final_welfare = crate::model::social_welfare(m, &final_allocation)?;
    Ok(RunTrace {
        steps,
        final_allocation,
        final_welfare,
    })
}

/// Demanded bundles (buyer, bundle) that do not extend to an optimal
/// allocation under `p` with every buyer present and every item available.
pub fn price_vector_failures(m: &Market, p: &PriceVector) -> Result<Vec<(BuyerId, Bundle)>> {
    let opt = opt_welfare(m)?;
    let all = m.all_items();
    let mut out = Vec::new();
    for i in 0..m.num_buyers() {
        for s in demand_correspondence(m.valuation(i), p, &all)? {
            let rest: Vec<usize> = all.difference(&s).iter().collect();
            let others: Vec<BuyerId> = (0..m.num_buyers()).filter(|&j| j != i).collect();
            let w = m.valuation(i).eval(&s) + opt_welfare(&m.restrict(&rest, &others))?;
            if w != opt {
                out.push((i, s));
            }
        }
    }
    Ok(out)
}

/// Every demanded bundle of every buyer extends to an optimal allocation.
pub fn verify_price_vector(m: &Market, p: &PriceVector) -> Result<bool> {
    Ok(price_vector_failures(m, p)?.is_empty())
}
