//! A budget-additive market with no Walrasian equilibrium that still has an
//! optimal dynamic pricing, driven by a scripted two-phase pricer.
//!
//! Items `a1 b1 alpha1 a2 b2 alpha2 beta`; buyers `c1 d1 c2 d2`, each with
//! budget 2. `c_i` values `a_i, b_i, alpha_i` at 1; `d_i` values `beta` at 2
//! and `a_i, b_i` at 1.

use crate::error::Result;
use crate::model::{Buyer, Bundle, Market, Price, PriceVector, Valuation};
use crate::rat::Rat;
use crate::simulator::{adversarial_verify, Pricer, Round, VerificationReport, VerifyOptions};

const A: [usize; 2] = [0, 3];
const B: [usize; 2] = [1, 4];
const ALPHA: [usize; 2] = [2, 5];
const BETA: usize = 6;
const BUDGET: i64 = 2;

pub fn default_epsilon() -> Rat {
    Rat::new(1, 100)
}

fn budget_additive(item_values: &[(usize, i64)]) -> Valuation {
    let mut single = [0i64; 7];
    for &(x, v) in item_values {
        single[x] = v;
    }
    let values = (0..1u64 << 7)
        .map(|mask| {
            let total: i64 = Bundle::from_mask(mask).iter().map(|x| single[x]).sum();
            Rat::from(total.min(BUDGET))
        })
        .collect();
    Valuation::Table { values }
}

pub fn appendix_d_market() -> Market {
    let items = ["a1", "b1", "alpha1", "a2", "b2", "alpha2", "beta"].map(String::from).to_vec();
    let mut buyers = Vec::new();
    for i in 0..2 {
        buyers.push(Buyer {
            name: format!("c{}", i + 1),
            valuation: budget_additive(&[(A[i], 1), (B[i], 1), (ALPHA[i], 1)]),
        });
        buyers.push(Buyer {
            name: format!("d{}", i + 1),
            valuation: budget_additive(&[(BETA, 2), (A[i], 1), (B[i], 1)]),
        });
    }
    Market::new(items, buyers).expect("fixed market is valid")
}

/// Posts `alpha = beta = eps`, `a = 2 eps`, `b = 3 eps` until the first
/// purchase. If a `c_i` bought first, every later round posts
/// `beta = b_i = eps`, `a_j = alpha_j = 2 eps`, `b_j = 3 eps` for the other
/// index `j`; if a `d_i` bought first the opening prices stay.
#[derive(Clone, Debug)]
pub struct AppendixDPricer {
    pub epsilon: Rat,
}

impl AppendixDPricer {
    fn opening(&self) -> Vec<Rat> {
        let e = &self.epsilon;
        let mut p = vec![Rat::zero(); 7];
        for i in 0..2 {
            p[ALPHA[i]] = e.clone();
            p[A[i]] = e * &Rat::from(2);
            p[B[i]] = e * &Rat::from(3);
        }
        p[BETA] = e.clone();
        p
    }
}

impl Pricer for AppendixDPricer {
    fn name(&self) -> String {
        format!("appendix-d(eps={})", self.epsilon)
    }

    fn prices(&self, round: &Round<'_>) -> Result<PriceVector> {
        let mut p = self.opening();
        // Buyers are c1, d1, c2, d2: even indices are c buyers.
        if let Some(&(first, _)) = round.history.first() {
            if first % 2 == 0 {
                let i = first / 2;
                let j = 1 - i;
                let e = &self.epsilon;
                p[BETA] = e.clone();
                p[B[i]] = e.clone();
                p[A[j]] = e * &Rat::from(2);
                p[ALPHA[j]] = e * &Rat::from(2);
                p[B[j]] = e * &Rat::from(3);
            }
        }
        PriceVector::new(p.into_iter().map(Price::Finite).collect())
    }

    fn history_dependent(&self) -> bool {
        true
    }
}

pub fn appendix_d_scenario(epsilon: Rat, opts: VerifyOptions) -> Result<VerificationReport> {
    adversarial_verify(&appendix_d_market(), &AppendixDPricer { epsilon }, opts)
}
