//! Belief functions over finite multivariate frames, with a population
//! (frequency) reading of Dempster's rule.
//!
//! The algebra ([`Bpa`]), populations, models and engines are generic over
//! [`Scalar`]; the aliases below fix the common choices. `f64` is the working
//! type, [`Rational`] gives exact results for small worked examples.
//!
//! ```
//! use beliefkit::{Bpa64, Frame};
//!
//! let f = Frame::new([("A", vec!["x", "y", "z"])]).unwrap();
//! let m = Bpa64::from_exprs(&f, &[("A={x}", 0.2), ("A={x,y}", 0.5), ("*", 0.3)]).unwrap();
//! let b = f.parse_set("A={x,y}").unwrap();
//! assert!((m.bel(&b).unwrap() - 0.7).abs() < 1e-12);
//! ```

pub mod bpa;
pub mod error;
pub mod format;
pub mod frame;
mod lattice;
pub mod learning;
pub mod netmodel;
pub mod population;
pub mod reasoning;
pub mod rng;
pub mod sampling;
pub mod scalar;

pub use bpa::{combine_all, invert_commonality, Bpa, BpaClass, MeasureRow, MeasureTable, ValidationReport};
pub use error::{Error, Result};
pub use frame::{Bits, ConfigSet, CylinderExpr, Frame, Limits, Variable};
pub use learning::{ci_test, fit_factors, learn_skeleton, CiOptions, CiResult, Skeleton};
pub use netmodel::{
    decompose_joint, is_independence_map, joint_from_model, BeliefNetwork, Dag, FactoredModel, HypergraphModel,
    ModelReport,
};
pub use population::{LabeledObject, Population, Sign};
pub use reasoning::{compare_bels, reason_data, reason_model, BelComparison, DataMode, EvidenceSpec};
pub use sampling::{cancel_signed, sample_hypergraph, sample_network, sample_signed, SampleStats};
pub use scalar::{Rational, Scalar};

pub type Bpa64 = Bpa<f64>;
pub type Bpa32 = Bpa<f32>;
pub type ExactBpa = Bpa<Rational>;
pub type Population64 = Population<f64>;
pub type ExactPopulation = Population<Rational>;
pub type HypergraphModel64 = HypergraphModel<f64>;
pub type BeliefNetwork64 = BeliefNetwork<f64>;
pub type ExactBeliefNetwork = BeliefNetwork<Rational>;
pub type EvidenceSpec64 = EvidenceSpec<f64>;
