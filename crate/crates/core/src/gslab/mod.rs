//! Gross-substitutes checks, violation witnesses, Walrasian equilibria and
//! markets built to admit no dynamic pricing.

pub mod checks;
pub mod forge;
pub mod lp;
pub mod scenario;
pub mod walrasian;
pub mod witness;

pub use checks::{check_gs, check_rgp, check_sm, GsReport, RgpViolation, SmViolation};
pub use forge::{forge_counterexample, ForgeParams, ForgeRoles, ForgedMarket};
pub use scenario::{appendix_d_market, appendix_d_scenario, AppendixDPricer};
pub use walrasian::{walrasian_exists, WeWitness};
pub use witness::{gs_witness, verify_witness, ViolationWitness};
