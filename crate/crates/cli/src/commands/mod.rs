pub mod convert;
pub mod eval_align;
pub mod eval_frechet;
pub mod eval_seld;
pub mod stats;
