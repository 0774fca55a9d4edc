//! Exact Gaussian conditioning on the observed grid values.

pub mod factor;
pub mod predictor;
pub mod sampling;

pub use factor::{factorize, factorize_toeplitz, factorize_with_ridge, TriangularFactor};
pub use predictor::{
    predictor_weights, predictor_weights_with, terminal_compensator_variance, ConditionalProfile,
    EngineOptions, FactorMethod, GaussianEngine, PredictorWeights,
};
pub use sampling::{sample_increments, PathSampler};
