//! Shard files: one binary file per node, a 16-byte header
//! {block-id, node-id, word-count, w} of little-endian u32 followed by the
//! node's w-bit symbols (w in {8, 16}), little-endian, bit-exact across
//! platforms. Extension-field symbols are stored as their m base-field
//! coordinates in order, so word-count = alpha * m.

use std::fs;
use std::path::{Path, PathBuf};

use crate::field::FieldElement;

use super::{BfrError, BfrSystem, SystemState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShardHeader {
    pub block: u32,
    pub node: u32,
    pub word_count: u32,
    pub w: u32,
}

pub fn shard_file_name(block: usize, node: usize) -> String {
    format!("shard_b{block:03}_n{node:03}.bin")
}

pub fn shard_path(dir: &Path, block: usize, node: usize) -> PathBuf {
    dir.join(shard_file_name(block, node))
}

pub fn write_shard(path: &Path, header: &ShardHeader, words: &[u16]) -> Result<(), BfrError> {
    if words.len() != header.word_count as usize {
        return Err(BfrError::ShardFormat(format!(
            "header says {} words, got {}",
            header.word_count,
            words.len()
        )));
    }
    let mut bytes = Vec::with_capacity(16 + words.len() * 2);
    for v in [header.block, header.node, header.word_count, header.w] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    match header.w {
        8 => {
            for &w in words {
                bytes.push(w as u8);
            }
        }
        16 => {
            for &w in words {
                bytes.extend_from_slice(&w.to_le_bytes());
            }
        }
        other => {
            return Err(BfrError::ShardFormat(format!(
                "word size {other} is not byte-aligned (use 8 or 16)"
            )))
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_shard(path: &Path) -> Result<(ShardHeader, Vec<u16>), BfrError> {
    let bytes = fs::read(path)?;
    if bytes.len() < 16 {
        return Err(BfrError::ShardFormat(format!(
            "{}: shorter than the 16-byte header",
            path.display()
        )));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let header = ShardHeader {
        block: u32_at(0),
        node: u32_at(4),
        word_count: u32_at(8),
        w: u32_at(12),
    };
    let count = header.word_count as usize;
    let body = &bytes[16..];
    let words = match header.w {
        8 => {
            if body.len() != count {
                return Err(BfrError::ShardFormat(format!(
                    "{}: expected {count} bytes of symbols, got {}",
                    path.display(),
                    body.len()
                )));
            }
            body.iter().map(|&b| b as u16).collect()
        }
        16 => {
            if body.len() != 2 * count {
                return Err(BfrError::ShardFormat(format!(
                    "{}: expected {} bytes of symbols, got {}",
                    path.display(),
                    2 * count,
                    body.len()
                )));
            }
            body.chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect()
        }
        other => {
            return Err(BfrError::ShardFormat(format!(
                "{}: unsupported word size {other}",
                path.display()
            )))
        }
    };
    Ok((header, words))
}

impl BfrSystem {
    fn require_byte_aligned(&self) -> Result<(), BfrError> {
        match self.field().w() {
            8 | 16 => Ok(()),
            w => Err(BfrError::ShardFormat(format!(
                "shard files need w in {{8, 16}}, system uses w={w}"
            ))),
        }
    }

    /// Flatten node content into shard words (base-field coordinates).
    pub fn node_words(&self, content: &[FieldElement]) -> Vec<u16> {
        content
            .iter()
            .flat_map(|e| e.words().iter().copied())
            .collect()
    }

    /// Rebuild node content from shard words.
    pub fn words_to_node(&self, words: &[u16]) -> Result<Vec<FieldElement>, BfrError> {
        let m = self.field().degree();
        let want = self.params().alpha * m;
        if words.len() != want {
            return Err(BfrError::ShardFormat(format!(
                "node carries {want} words, got {}",
                words.len()
            )));
        }
        words
            .chunks_exact(m)
            .map(|c| Ok(self.field().from_words(c.to_vec())?))
            .collect()
    }

    fn expected_word_count(&self) -> u32 {
        (self.params().alpha * self.field().degree()) as u32
    }

    /// Write every live block's nodes as shard files into `dir`.
    pub fn write_shards(&self, state: &SystemState, dir: &Path) -> Result<(), BfrError> {
        self.require_byte_aligned()?;
        fs::create_dir_all(dir)?;
        let p = self.params();
        for blk in 0..p.b {
            if !state.is_alive(blk) {
                continue;
            }
            for u in 0..p.block_capacity() {
                self.write_node_shard(state, dir, blk, u)?;
            }
        }
        Ok(())
    }

    pub fn write_node_shard(
        &self,
        state: &SystemState,
        dir: &Path,
        block: usize,
        node: usize,
    ) -> Result<(), BfrError> {
        self.require_byte_aligned()?;
        let header = ShardHeader {
            block: block as u32,
            node: node as u32,
            word_count: self.expected_word_count(),
            w: self.field().w(),
        };
        let words = self.node_words(state.node(block, node)?);
        write_shard(&shard_path(dir, block, node), &header, &words)
    }

    pub fn read_node_shard(
        &self,
        dir: &Path,
        block: usize,
        node: usize,
    ) -> Result<Vec<FieldElement>, BfrError> {
        self.require_byte_aligned()?;
        let (header, words) = read_shard(&shard_path(dir, block, node))?;
        if header.block as usize != block || header.node as usize != node {
            return Err(BfrError::ShardFormat(format!(
                "shard header says block {} node {}, expected {block}/{node}",
                header.block, header.node
            )));
        }
        if header.w != self.field().w() || header.word_count != self.expected_word_count() {
            return Err(BfrError::ShardFormat(format!(
                "shard geometry (w={}, words={}) does not match the descriptor",
                header.w, header.word_count
            )));
        }
        self.words_to_node(&words)
    }

    /// Load a state from shard files. A block is alive iff every one of its
    /// node files is present; missing nodes read as zero symbols.
    pub fn read_shards(&self, dir: &Path) -> Result<SystemState, BfrError> {
        self.require_byte_aligned()?;
        let p = self.params();
        let c = p.block_capacity();
        let mut blocks = Vec::with_capacity(p.b);
        let mut alive = Vec::with_capacity(p.b);
        for blk in 0..p.b {
            let mut nodes = Vec::with_capacity(c);
            let mut complete = true;
            for u in 0..c {
                if shard_path(dir, blk, u).exists() {
                    nodes.push(self.read_node_shard(dir, blk, u)?);
                } else {
                    complete = false;
                    nodes.push(vec![self.field().zero(); p.alpha]);
                }
            }
            blocks.push(nodes);
            alive.push(complete);
        }
        Ok(SystemState {
            field: self.field().id(),
            blocks,
            alive,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let dir = std::env::temp_dir().join(format!("bfr-shard-test-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let header = ShardHeader {
            block: 3,
            node: 1,
            word_count: 5,
            w: 8,
        };
        let words = vec![0, 255, 7, 128, 1];
        let path = dir.join(shard_file_name(3, 1));
        write_shard(&path, &header, &words).unwrap();
        let (h2, w2) = read_shard(&path).unwrap();
        assert_eq!(h2, header);
        assert_eq!(w2, words);
        // exact byte layout: header then raw symbols
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 16 + 5);
        assert_eq!(&bytes[..4], &3u32.to_le_bytes());
        assert_eq!(bytes[16], 0);
        assert_eq!(bytes[17], 255);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn sixteen_bit_words() {
        let dir = std::env::temp_dir().join(format!("bfr-shard16-test-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let header = ShardHeader {
            block: 0,
            node: 0,
            word_count: 3,
            w: 16,
        };
        let words = vec![0xffee, 1, 0x1234];
        let path = dir.join(shard_file_name(0, 0));
        write_shard(&path, &header, &words).unwrap();
        let (_, w2) = read_shard(&path).unwrap();
        assert_eq!(w2, words);
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[16..18], &[0xee, 0xff]);
        fs::remove_dir_all(&dir).unwrap();
    }
}
