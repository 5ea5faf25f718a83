//! Robust barrier-removal planning on tree-structured river networks.
//!
//! A river network is a rooted tree: nodes are contiguous habitat regions
//! carrying a reward, edges are barriers with a passage probability. Each
//! barrier offers a small set of repair actions, and every action's passage
//! probability is only known to lie inside an interval. This crate computes
//! budget-feasible repair policies that stay good against an adversary who
//! picks both a competing policy and the probabilities inside their
//! intervals, either maximizing the *robust ratio* or minimizing *regret*.
//!
//! The main pieces:
//!
//! * [`model`]: instances, policies, parameter vectors, validation,
//!   binarization and exact evaluation.
//! * [`adversary`]: the inner adversary problem, solved by an exact tree DP
//!   or by the rounded DP (an FPTAS for the ratio objective).
//! * [`master`]: the decision problem against a finite scenario set, solved
//!   by branch-and-bound; [`milp`] exports the same problem as an LP file.
//! * [`robust`]: the constraint-generation loop tying the two together.
//! * [`baselines`] and [`generate`]: point-estimate baselines, robustness
//!   metrics, and a seeded synthetic instance generator.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the CLI and
//! benchmarking live in the `riverguard` crate.
//!
//! ```
//! use riverguard_core::model::{Action, EdgeSpec, InstanceSpec, NetworkInstance, NodeSpec, Policy};
//! use riverguard_core::adversary::{self, Objective};
//!
//! let spec = InstanceSpec {
//!     root: 0,
//!     budget: 1.0,
//!     nodes: vec![NodeSpec { id: 0, reward: 1.0 }, NodeSpec { id: 1, reward: 1.0 }],
//!     edges: vec![EdgeSpec {
//!         parent: 0,
//!         child: 1,
//!         actions: vec![Action::new(0.0, 0.2, 0.4), Action::new(1.0, 0.8, 1.0)],
//!     }],
//! };
//! let instance = NetworkInstance::new(&spec).unwrap();
//! let null = Policy::null(&instance);
//! let worst = adversary::solve_exact(&instance, &null, Objective::Ratio).unwrap();
//! assert!((worst.value - 0.6).abs() < 1e-12);
//! ```

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod adversary;
pub mod baselines;
pub mod error;
pub mod generate;
pub mod master;
pub mod milp;
pub mod model;
pub mod pareto;
pub mod robust;

pub use error::CoreError;

/// Relative slack used when comparing an accumulated cost against a budget.
///
/// Costs are summed in different orders by different solvers; a policy that
/// spends exactly the budget must be feasible for all of them.
pub const BUDGET_SLACK: f64 = 1e-9;

/// Returns true when `cost` fits in `budget` up to [`BUDGET_SLACK`].
#[inline]
pub fn within_budget(cost: f64, budget: f64) -> bool {
    cost <= budget + BUDGET_SLACK * budget.abs().max(1.0)
}
