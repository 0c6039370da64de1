//! Desk-scale hybrid search: tf-idf lexical retrieval, dense retrieval with a
//! small pre-norm transformer encoder, score fusion, review-dataset splitting
//! and classification metrics.

pub mod dataset;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod hits;
pub mod hybrid;
pub mod io;
pub mod lexical;
pub mod text;
pub mod vector;

pub use dataset::{
    balanced_resample, class_distribution, filter_by_business, load_reviews, split,
    DatasetBundle, LoadReport, Review, SplitSpec,
};
pub use encoder::{encode, init_weights, DenseEmbedding, Encoder, EncoderConfig, EncoderWeights};
pub use error::{Error, Result};
pub use eval::{confusion_counts, ConfusionMatrix, LabelPair, MetricsReport};
pub use hits::SearchHit;
pub use hybrid::{search_hybrid, HybridConfig};
pub use lexical::{build_index, InvertedIndex, Posting};
pub use text::{
    binarize, build_vocabulary, count_vectorize, idf, tfidf_vectorize, tokenize, SparseVector,
    TokenizerConfig, Vocabulary,
};
pub use vector::VectorIndex;
