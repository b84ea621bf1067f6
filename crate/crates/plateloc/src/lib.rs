//! File formats, the external OCR engine bridge, batch evaluation and the
//! `plateloc` command line, on top of the `plateloc-core` geometry.

pub mod cli;
pub mod config;
pub mod engine;
pub mod evaluate;
pub mod io;
pub mod output;
