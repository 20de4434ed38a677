//! Shared inputs for the criterion benchmarks.

use lanecode::corpus::{self, Corpus, CorpusSpec, ScriptClass};

/// Corpus size used by the benches, in UTF-8 bytes.
pub const SIZE: usize = 256 * 1024;

/// One corpus per script class, generated with a fixed seed.
pub fn corpora() -> Vec<(ScriptClass, Corpus)> {
    ScriptClass::ALL
        .iter()
        .map(|&class| (class, corpus::generate(&CorpusSpec::new(class, SIZE, 1))))
        .collect()
}
