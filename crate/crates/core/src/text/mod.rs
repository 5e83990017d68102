//! Handcrafted linguistic features and bag-of-words vectorizers.

pub mod handcrafted;
pub mod tokenize;
pub mod vectorizer;

pub use handcrafted::{extract_handcrafted, handcrafted_matrix, Dictionary, HandcraftedFeatures};
pub use tokenize::TokenizationRules;
pub use vectorizer::{fit_vectorizer, VectorizerKind, VectorizerModel};

use crate::{FeatureMatrix, Result};

/// Concatenate feature sources column-wise in the order given.
pub fn build_feature_matrix(parts: &[FeatureMatrix]) -> Result<FeatureMatrix> {
    FeatureMatrix::hstack(parts)
}
