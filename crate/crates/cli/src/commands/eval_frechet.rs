//! `eval-frechet`: Fréchet distance between a reference and a candidate
//! embedding set.

use crate::io::embeddings::read_embeddings;
use anyhow::{Context, Result};
use sav_core::metrics::{fit_gaussian, frechet_distance, SourceTag};
use std::path::Path;

pub fn run(reference: &Path, candidate: &Path) -> Result<f64> {
    let reference_set = read_embeddings(reference, SourceTag::Reference)
        .with_context(|| format!("reference embeddings {}", reference.display()))?;
    let candidate_set = read_embeddings(candidate, SourceTag::Candidate)
        .with_context(|| format!("candidate embeddings {}", candidate.display()))?;
    let a = fit_gaussian(&reference_set)
        .with_context(|| format!("reference embeddings {}", reference.display()))?;
    let b = fit_gaussian(&candidate_set)
        .with_context(|| format!("candidate embeddings {}", candidate.display()))?;
    Ok(frechet_distance(&a, &b)?)
}
