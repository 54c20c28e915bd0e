//! Committee elections under approval changes: Thiele rules, their greedy
//! variants, robustness of winning committees, and random election models.

pub mod codec;
pub mod election;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod greedy;
pub mod instance;
pub mod rule;
pub mod reduction;
pub mod sampler;
pub mod score;
pub mod seed;
pub mod solve;

pub use election::{Ballot, CandidateId, Committee, Election};
pub use error::{Error, Result};
pub use instance::{RceAnswer, RceInstance};
pub use rule::{OwaWeights, Rule, RuleSpec};
