//! UCI bag-of-words format: `docword` file with a three-line header
//! (`D`, `W`, `NNZ`) followed by `NNZ` lines of `d w count`, plus a
//! one-word-per-line vocabulary file.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{anonymous_vocab, Entry, SparseCorpus};
use crate::error::{Error, Result};

pub fn load_uci_bow(docword_path: &Path, vocab_path: &Path) -> Result<SparseCorpus> {
    let docword = File::open(docword_path).map_err(|e| Error::io(docword_path, e))?;
    let vocab = File::open(vocab_path).map_err(|e| Error::io(vocab_path, e))?;
    read_uci_bow(
        BufReader::new(docword),
        docword_path,
        Some((BufReader::new(vocab), vocab_path)),
    )
}

/// Load a docword file alone; the vocabulary becomes `w1..wW`.
pub fn load_uci_docword(docword_path: &Path) -> Result<SparseCorpus> {
    let docword = File::open(docword_path).map_err(|e| Error::io(docword_path, e))?;
    read_uci_bow::<_, std::io::Empty>(BufReader::new(docword), docword_path, None)
}

fn parse_header_line(path: &Path, lineno: usize, line: Option<std::io::Result<String>>) -> Result<usize> {
    let line = line
        .ok_or_else(|| Error::parse(path, lineno, "missing header line"))?
        .map_err(|e| Error::io(path, e))?;
    line.trim()
        .parse::<usize>()
        .map_err(|_| Error::parse(path, lineno, format!("expected a non-negative integer, found {:?}", line.trim())))
}

/// Parse from readers. `label` is only used in diagnostics.
pub fn read_uci_bow<R: BufRead, V: BufRead>(
    docword: R,
    label: &Path,
    vocab: Option<(V, &Path)>,
) -> Result<SparseCorpus> {
    let mut lines = docword.lines();
    let num_docs = parse_header_line(label, 1, lines.next())?;
    let vocab_size = parse_header_line(label, 2, lines.next())?;
    let declared_nnz = parse_header_line(label, 3, lines.next())?;

    let mut entries = Vec::with_capacity(declared_nnz);
    let mut lineno = 3;
    for line in lines {
        lineno += 1;
        let line = line.map_err(|e| Error::io(label, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if entries.len() == declared_nnz {
            return Err(Error::parse(
                label,
                lineno,
                format!("body has more than the declared NNZ={declared_nnz} entries"),
            ));
        }
        let mut fields = trimmed.split_whitespace();
        let mut next_field = |name: &str| -> Result<i64> {
            let f = fields
                .next()
                .ok_or_else(|| Error::parse(label, lineno, format!("missing {name} field")))?;
            f.parse::<i64>()
                .map_err(|_| Error::parse(label, lineno, format!("{name} is not an integer: {f:?}")))
        };
        let d = next_field("document")?;
        let w = next_field("word")?;
        let c = next_field("count")?;
        if fields.next().is_some() {
            return Err(Error::parse(label, lineno, "expected exactly three fields"));
        }
        if d < 1 || d as u64 > num_docs as u64 {
            return Err(Error::parse(label, lineno, format!("document index {d} outside 1..={num_docs}")));
        }
        if w < 1 || w as u64 > vocab_size as u64 {
            return Err(Error::parse(label, lineno, format!("word index {w} outside 1..={vocab_size}")));
        }
        if c <= 0 || c > i64::from(u32::MAX) {
            return Err(Error::parse(label, lineno, format!("count must be positive, found {c}")));
        }
        entries.push(Entry {
            doc: (d - 1) as u32,
            word: (w - 1) as u32,
            count: c as u32,
        });
    }
    if entries.len() != declared_nnz {
        return Err(Error::parse(
            label,
            lineno + 1,
            format!(
                "header declares NNZ={declared_nnz} but body has {} entries",
                entries.len()
            ),
        ));
    }

    let words = match vocab {
        Some((reader, vocab_path)) => {
            let words: Vec<String> = reader
                .lines()
                .map(|l| l.map(|s| s.trim_end_matches('\r').to_string()))
                .collect::<std::io::Result<_>>()
                .map_err(|e| Error::io(vocab_path, e))?;
            if words.len() != vocab_size {
                return Err(Error::VocabMismatch {
                    expected: vocab_size,
                    found: words.len(),
                });
            }
            words
        }
        None => anonymous_vocab(vocab_size),
    };
    SparseCorpus::from_entries(num_docs, words, entries)
}

pub fn write_uci_bow(corpus: &SparseCorpus, docword_path: &Path, vocab_path: &Path) -> Result<()> {
    let f = File::create(docword_path).map_err(|e| Error::io(docword_path, e))?;
    let mut out = BufWriter::new(f);
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "{}", corpus.num_docs())?;
        writeln!(out, "{}", corpus.vocab_size())?;
        writeln!(out, "{}", corpus.nnz())?;
        for e in corpus.entries() {
            writeln!(out, "{} {} {}", e.doc + 1, e.word + 1, e.count)?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(docword_path, e))?;

    let f = File::create(vocab_path).map_err(|e| Error::io(vocab_path, e))?;
    let mut out = BufWriter::new(f);
    (|| -> std::io::Result<()> {
        for w in corpus.vocab() {
            writeln!(out, "{w}")?;
        }
        out.flush()
    })()
    .map_err(|e| Error::io(vocab_path, e))
}
