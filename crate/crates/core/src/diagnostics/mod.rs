//! Curvature and convergence instrumentation.

mod ledger;
mod rate;
mod spectrum;

pub use ledger::{ConvergenceLedger, LedgerRecord};
pub use rate::{rate_fit, rate_fit_window, RateFit, RateModel};
pub use spectrum::{
    hutchinson_trace, power_iterate, power_iteration_topk, spectrum_report, EigenEstimate, SpectrumReport,
    TraceEstimate,
};
