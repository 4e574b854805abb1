//! File formats: WAV audio, frame directories, label CSVs, record files,
//! and embedding matrices.

pub mod embeddings;
pub mod frames;
pub mod labels;
pub mod records;
pub mod wav;
