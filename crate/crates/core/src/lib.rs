pub mod bow;
pub mod eval;
pub mod fixtures;
pub mod generation;
pub mod metadata;
pub mod mood;
pub mod pipeline;
pub mod prompt;
pub mod text;
