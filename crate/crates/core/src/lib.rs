//! Optimal dynamic pricing for markets with up to three multi-demand buyers.
//!
//! The crate computes per-round item prices under which every buyer, in any
//! arrival order and under any tie-breaking, picks a bundle that extends to a
//! welfare-maximizing allocation. It also verifies such pricings exhaustively
//! and ships a small lab for gross-substitutes valuations and Walrasian
//! equilibria.

pub mod allocator;
pub mod error;
pub mod gslab;
pub mod io;
pub mod legality;
pub mod matching;
pub mod model;
pub mod pricer;
pub mod rat;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{
    demand_correspondence, social_welfare, utility, Allocation, Buyer, BuyerId, Bundle, ItemId,
    Market, Price, PriceVector, Valuation,
};
pub use rat::Rat;
