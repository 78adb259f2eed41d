//! Instance generators and the instance file format.

pub mod adversarial;
pub mod io;
pub mod stochastic;

pub use adversarial::{analytic_opt, gen_adversarial, AdversarialParams};
pub use io::{instance_to_json, parse_instance, read_instance, write_instance};
pub use stochastic::{gen_stochastic, item_probabilities, StochasticConfig};
