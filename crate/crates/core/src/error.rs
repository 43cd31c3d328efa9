use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid rational {0:?}")]
    InvalidRational(String),

    #[error("unknown item {0:?}")]
    UnknownItem(String),

    #[error("item index {0} out of range")]
    ItemOutOfRange(usize),

    #[error("buyer index {0} out of range")]
    BuyerOutOfRange(usize),

    #[error("duplicate item label {0:?}")]
    DuplicateItem(String),

    #[error("market has no {0}")]
    EmptyMarket(&'static str),

    #[error("negative value {value} for {what}")]
    NegativeValue { what: String, value: String },

    #[error("table valuation of buyer {buyer}: v(∅) = {value}, expected 0")]
    NotNormalized { buyer: usize, value: String },

    #[error("table valuation of buyer {buyer} is not monotone: v({smaller}) = {lo} > v({larger}) = {hi}")]
    NotMonotone {
        buyer: usize,
        smaller: String,
        larger: String,
        lo: String,
        hi: String,
    },

    #[error("table valuation of buyer {buyer} is missing bundle {{{bundle}}}")]
    MissingBundle { buyer: usize, bundle: String },

    #[error("multi-demand cap must be positive (buyer {0})")]
    ZeroCap(usize),

    #[error("{what} supports at most {max} items, got {got}")]
    TooManyItems {
        what: &'static str,
        max: usize,
        got: usize,
    },

    #[error("{what} supports at most {max} buyers, got {got}")]
    TooManyBuyers {
        what: &'static str,
        max: usize,
        got: usize,
    },

    #[error("operation requires multi-demand or unit-demand buyers; buyer {0} has a table valuation")]
    TableBuyer(usize),

    #[error("operation requires a table valuation")]
    NotTable,

    #[error("bundles overlap on item {0}")]
    OverlappingBundles(usize),

    #[error("item {0} is not available")]
    Unavailable(usize),

    #[error("market is not pruned: item {0} is not essential")]
    NotPruned(usize),

    #[error("{0} items exceed total demand {1} after pruning")]
    SupplyExceedsDemand(usize, usize),

    #[error("every allocation has the optimal welfare; no second-best gap exists")]
    DegenerateGap,

    #[error("allocation is not optimal: welfare {got}, optimum {opt}")]
    NotOptimal { got: String, opt: String },

    #[error("bundle is not legal for buyer {0}")]
    IllegalBundle(usize),

    #[error("a non-positive cycle survived edge deletion (weight {0})")]
    NonPositiveCycle(String),

    #[error("branch budget of {0} exceeded")]
    BranchBudgetExceeded(u64),

    #[error("valuation is gross substitutes; no violation witness exists")]
    IsGrossSubstitutes,

    #[error("certificate check failed: {0}")]
    Certificate(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("{0}")]
    Invalid(String),
}
