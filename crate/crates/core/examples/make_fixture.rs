//! Writes the bundled tiny UCI fixture: `make_fixture <out_dir>`.

use std::path::PathBuf;

use pobp::corpus::synth::{generate, SyntheticSpec};
use pobp::corpus::write_uci_bow;

fn main() -> pobp::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures/tiny".into()));
    std::fs::create_dir_all(&dir).map_err(|e| pobp::Error::Config(format!("{}: {e}", dir.display())))?;
    let spec = SyntheticSpec {
        num_docs: 300,
        vocab_size: 400,
        num_topics: 8,
        mean_doc_len: 60.0,
        seed: 7,
        ..SyntheticSpec::default()
    };
    let corpus = generate(&spec)?;
    write_uci_bow(&corpus, &dir.join("docword.txt"), &dir.join("vocab.txt"))?;
    println!(
        "{}: {} docs, W={}, {} nnz, {} tokens",
        dir.display(),
        corpus.num_docs(),
        corpus.vocab_size(),
        corpus.nnz(),
        corpus.num_tokens()
    );
    Ok(())
}
