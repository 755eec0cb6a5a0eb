//! Binary matrix files: `K` and `W` as little-endian u64, then `K * W`
//! little-endian f64 values, topic-major.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::inference::{GlobalStats, TopicWordDist};
use crate::scalar::Real;

/// Write a word-major `W x K` buffer as a topic-major `K x W` file.
pub fn write_matrix<T: Real>(path: &Path, num_topics: usize, vocab_size: usize, word_major: &[T]) -> Result<()> {
    if word_major.len() != num_topics * vocab_size {
        return Err(Error::DimensionMismatch {
            expected: format!("{} values", num_topics * vocab_size),
            found: format!("{} values", word_major.len()),
        });
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = |bytes: &[u8]| out.write_all(bytes).map_err(|e| Error::io(path, e));
    write(&(num_topics as u64).to_le_bytes())?;
    write(&(vocab_size as u64).to_le_bytes())?;
    for k in 0..num_topics {
        for w in 0..vocab_size {
            write(&word_major[w * num_topics + k].as_f64().to_le_bytes())?;
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Read a matrix file into `(K, W, word-major values)`.
pub fn read_matrix<T: Real>(path: &Path) -> Result<(usize, usize, Vec<T>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut input = BufReader::new(file);
    let mut buf = [0u8; 8];
    let mut next = |input: &mut BufReader<std::fs::File>| -> Result<[u8; 8]> {
        input.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
        Ok(buf)
    };
    let k = u64::from_le_bytes(next(&mut input)?) as usize;
    let w = u64::from_le_bytes(next(&mut input)?) as usize;
    let len = std::fs::metadata(path).map_err(|e| Error::io(path, e))?.len();
    let expected = 16u64.saturating_add((k as u64).saturating_mul(w as u64).saturating_mul(8));
    if len != expected {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("header declares {k} x {w} but file has {len} bytes, expected {expected}"),
        });
    }
    let mut values = vec![T::zero(); k * w];
    for kk in 0..k {
        for ww in 0..w {
            values[ww * k + kk] = T::of(f64::from_le_bytes(next(&mut input)?));
        }
    }
    Ok((k, w, values))
}

pub fn save_phi_hat<T: Real>(path: &Path, stats: &GlobalStats<T>) -> Result<()> {
    write_matrix(path, stats.num_topics(), stats.vocab_size(), stats.phi_values())
}

pub fn load_phi_hat<T: Real>(path: &Path) -> Result<GlobalStats<T>> {
    let (k, w, values) = read_matrix(path)?;
    GlobalStats::from_phi(k, w, values)
}

pub fn save_phi<T: Real>(path: &Path, phi: &TopicWordDist<T>) -> Result<()> {
    write_matrix(path, phi.num_topics(), phi.vocab_size(), phi.values())
}

pub fn load_phi<T: Real>(path: &Path) -> Result<TopicWordDist<T>> {
    let (k, w, values) = read_matrix(path)?;
    TopicWordDist::from_word_major(k, w, values)
}
