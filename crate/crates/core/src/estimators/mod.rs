//! Probability tables, kernel density estimates and plug-in information
//! estimators. All information quantities are in nats.

mod info;
mod kde;
mod tables;

pub use info::{
    cmi_plugin, cond_relevance, joint_mi_exact, joint_mi_exact_with_cap, mi_pair, mi_plugin,
    DEFAULT_JOINT_CAP,
};
pub use kde::{fit_kde, kde_cond_density, Kde1d, Kde2d, KdeModel, KdeTarget, DENSITY_FLOOR};
pub use tables::{fit_cond_pmf, fit_pairwise_cond_pmf, fit_prior, CondTable, PairCondTable};
