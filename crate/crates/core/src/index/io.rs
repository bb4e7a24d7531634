//! On-disk index layout.
//!
//! An index directory holds five files:
//!
//! - `metadata.json` — collection stats, quantization ranges, format
//!   version and sha256 checksums of the other four files;
//! - `lexicon.tsv` — one term per line: term, term id, doc frequency,
//!   both channel maxima, byte offset and length in `postings.bin`;
//! - `postings.bin` — per term, a run of blocks, each encoded as
//!   `[count u32][max_docid u32][docids...][impacts...]`, all values
//!   little-endian u32;
//! - `doclens.bin` — one little-endian u32 per document;
//! - `docmap.tsv` — external document id per line, internal id is the
//!   line number.
//!
//! Writing is byte-deterministic for a given in-memory index, so equal
//! indexes produce identical directories (and checksums).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::index::{
    Index, IndexMetadata, Lexicon, LexiconEntry, PostingBlock, PostingList, FORMAT_VERSION,
};
use crate::quantize::PackedImpact;

pub const METADATA_FILE: &str = "metadata.json";
pub const LEXICON_FILE: &str = "lexicon.tsv";
pub const POSTINGS_FILE: &str = "postings.bin";
pub const DOCLENS_FILE: &str = "doclens.bin";
pub const DOCMAP_FILE: &str = "docmap.tsv";

/// `metadata.json` payload: [`IndexMetadata`] scalars plus checksums.
#[derive(Debug, Serialize, Deserialize)]
struct DiskMetadata {
    num_docs: u32,
    avg_doclen: f64,
    primary_quant_max: f64,
    learned_quant_max: f64,
    block_size: u32,
    format_version: u32,
    /// sha256 hex digest per data file name.
    checksums: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn encode_postings(lists: &[PostingList]) -> (Vec<u8>, Vec<(u64, u64)>) {
    let mut buf = Vec::new();
    let mut spans = Vec::with_capacity(lists.len());
    for list in lists {
        let start = buf.len() as u64;
        for block in &list.blocks {
            buf.extend_from_slice(&(block.len() as u32).to_le_bytes());
            buf.extend_from_slice(&block.max_docid.to_le_bytes());
            for &d in &block.docids {
                buf.extend_from_slice(&d.to_le_bytes());
            }
            for &imp in &block.impacts {
                buf.extend_from_slice(&imp.raw().to_le_bytes());
            }
        }
        spans.push((start, buf.len() as u64 - start));
    }
    (buf, spans)
}

fn decode_list(bytes: &[u8], term: &str, block_size: u32) -> Result<Vec<PostingBlock>> {
    let err = |reason: String| Error::load(POSTINGS_FILE, format!("term {term:?}: {reason}"));
    let mut blocks = Vec::new();
    let mut pos = 0usize;
    let read_u32 = |pos: &mut usize| -> Result<u32> {
        let end = *pos + 4;
        let slice = bytes
            .get(*pos..end)
            .ok_or_else(|| err(format!("truncated at byte {pos}", pos = *pos)))?;
        *pos = end;
        Ok(u32::from_le_bytes(slice.try_into().unwrap()))
    };
    while pos < bytes.len() {
        let count = read_u32(&mut pos)? as usize;
        if count == 0 || count > block_size as usize {
            return Err(err(format!("bad block count {count}")));
        }
        let max_docid = read_u32(&mut pos)?;
        let mut docids = Vec::with_capacity(count);
        for _ in 0..count {
            docids.push(read_u32(&mut pos)?);
        }
        let mut impacts = Vec::with_capacity(count);
        for _ in 0..count {
            impacts.push(PackedImpact(read_u32(&mut pos)?));
        }
        blocks.push(PostingBlock {
            max_docid,
            docids,
            impacts,
        });
    }
    Ok(blocks)
}

/// Persist `index` under `dir`, creating the directory if needed.
pub fn write_index(index: &Index, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let (postings, spans) = encode_postings(&index.lists);

    let mut lexicon = String::new();
    for (term, entry) in index.lexicon.iter() {
        let (offset, length) = spans[entry.term_id as usize];
        lexicon.push_str(&format!(
            "{term}\t{}\t{}\t{}\t{}\t{offset}\t{length}\n",
            entry.term_id, entry.doc_frequency, entry.max_primary, entry.max_learned
        ));
    }

    let mut doclens = Vec::with_capacity(index.metadata.doc_lengths.len() * 4);
    for &len in &index.metadata.doc_lengths {
        doclens.extend_from_slice(&len.to_le_bytes());
    }

    let mut docmap = String::new();
    for external in &index.doc_map {
        docmap.push_str(external);
        docmap.push('\n');
    }

    let mut checksums = BTreeMap::new();
    checksums.insert(LEXICON_FILE.to_string(), sha256_hex(lexicon.as_bytes()));
    checksums.insert(POSTINGS_FILE.to_string(), sha256_hex(&postings));
    checksums.insert(DOCLENS_FILE.to_string(), sha256_hex(&doclens));
    checksums.insert(DOCMAP_FILE.to_string(), sha256_hex(docmap.as_bytes()));

    let meta = DiskMetadata {
        num_docs: index.metadata.num_docs,
        avg_doclen: index.metadata.avg_doclen,
        primary_quant_max: index.metadata.primary_quant_max,
        learned_quant_max: index.metadata.learned_quant_max,
        block_size: index.metadata.block_size,
        format_version: index.metadata.format_version,
        checksums,
    };
    let meta_json =
        serde_json::to_string_pretty(&meta).expect("metadata serialization cannot fail") + "\n";

    let write = |name: &str, bytes: &[u8]| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(path.clone(), e))
    };
    write(METADATA_FILE, meta_json.as_bytes())?;
    write(LEXICON_FILE, lexicon.as_bytes())?;
    write(POSTINGS_FILE, &postings)?;
    write(DOCLENS_FILE, &doclens)?;
    write(DOCMAP_FILE, docmap.as_bytes())?;
    Ok(())
}

/// Load an index directory, verifying checksums, the format version and
/// every structural invariant. Any inconsistency is an error naming the
/// offending file.
pub fn load_index(dir: &Path) -> Result<Index> {
    let read = |name: &str| -> Result<Vec<u8>> {
        let path = dir.join(name);
        fs::read(&path).map_err(|e| Error::io(path.clone(), e))
    };

    let meta_bytes = read(METADATA_FILE)?;
    let meta: DiskMetadata = serde_json::from_str(
        std::str::from_utf8(&meta_bytes)
            .map_err(|_| Error::load(METADATA_FILE, "not valid utf-8"))?,
    )
    .map_err(|e| Error::load(METADATA_FILE, e.to_string()))?;

    if meta.format_version != FORMAT_VERSION {
        return Err(Error::load(
            METADATA_FILE,
            format!(
                "format version {} unsupported (expected {})",
                meta.format_version, FORMAT_VERSION
            ),
        ));
    }

    let lexicon_bytes = read(LEXICON_FILE)?;
    let postings_bytes = read(POSTINGS_FILE)?;
    let doclens_bytes = read(DOCLENS_FILE)?;
    let docmap_bytes = read(DOCMAP_FILE)?;

    for (name, bytes) in [
        (LEXICON_FILE, lexicon_bytes.as_slice()),
        (POSTINGS_FILE, postings_bytes.as_slice()),
        (DOCLENS_FILE, doclens_bytes.as_slice()),
        (DOCMAP_FILE, docmap_bytes.as_slice()),
    ] {
        match meta.checksums.get(name) {
            None => {
                return Err(Error::load(
                    METADATA_FILE,
                    format!("missing checksum for {name}"),
                ))
            }
            Some(expected) => {
                let actual = sha256_hex(bytes);
                if *expected != actual {
                    return Err(Error::load(
                        name,
                        format!("checksum mismatch: expected {expected}, got {actual}"),
                    ));
                }
            }
        }
    }

    // Lexicon rows: term \t id \t df \t max_primary \t max_learned \t offset \t length.
    let lexicon_text = std::str::from_utf8(&lexicon_bytes)
        .map_err(|_| Error::load(LEXICON_FILE, "not valid utf-8"))?;
    let mut terms = BTreeMap::new();
    let mut rows: Vec<(String, LexiconEntry)> = Vec::new();
    for (lineno, line) in lexicon_text.lines().enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 7 {
            return Err(Error::parse(
                LEXICON_FILE,
                lineno + 1,
                format!("expected 7 tab-separated fields, got {}", fields.len()),
            ));
        }
        let num = |idx: usize| -> Result<u64> {
            fields[idx].parse::<u64>().map_err(|_| {
                Error::parse(
                    LEXICON_FILE,
                    lineno + 1,
                    format!("bad number {:?}", fields[idx]),
                )
            })
        };
        let entry = LexiconEntry {
            term_id: num(1)? as u32,
            doc_frequency: num(2)? as u32,
            max_primary: num(3)? as u16,
            max_learned: num(4)? as u16,
            offset: num(5)?,
            length: num(6)?,
        };
        rows.push((fields[0].to_string(), entry));
    }
    rows.sort_by_key(|(_, e)| e.term_id);
    let mut lists = Vec::with_capacity(rows.len());
    for (expected_id, (term, entry)) in rows.iter().enumerate() {
        if entry.term_id as usize != expected_id {
            return Err(Error::load(
                LEXICON_FILE,
                format!(
                    "term ids are not dense: term {term:?} has id {}",
                    entry.term_id
                ),
            ));
        }
        let span = postings_bytes
            .get(entry.offset as usize..(entry.offset + entry.length) as usize)
            .ok_or_else(|| {
                Error::load(
                    POSTINGS_FILE,
                    format!(
                        "term {term:?}: span {}+{} out of bounds",
                        entry.offset, entry.length
                    ),
                )
            })?;
        let blocks = decode_list(span, term, meta.block_size)?;
        let list = PostingList {
            doc_frequency: entry.doc_frequency,
            max_primary: entry.max_primary,
            max_learned: entry.max_learned,
            blocks,
        };
        lists.push(list);
        if terms.insert(term.clone(), *entry).is_some() {
            return Err(Error::load(
                LEXICON_FILE,
                format!("duplicate term {term:?}"),
            ));
        }
    }

    if doclens_bytes.len() % 4 != 0 {
        return Err(Error::load(DOCLENS_FILE, "length is not a multiple of 4"));
    }
    let doc_lengths: Vec<u32> = doclens_bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();

    let docmap_text = std::str::from_utf8(&docmap_bytes)
        .map_err(|_| Error::load(DOCMAP_FILE, "not valid utf-8"))?;
    let doc_map: Vec<String> = docmap_text.lines().map(str::to_string).collect();

    let index = Index {
        metadata: IndexMetadata {
            num_docs: meta.num_docs,
            avg_doclen: meta.avg_doclen,
            doc_lengths,
            primary_quant_max: meta.primary_quant_max,
            learned_quant_max: meta.learned_quant_max,
            block_size: meta.block_size,
            format_version: meta.format_version,
        },
        lexicon: Lexicon::new(terms),
        lists,
        doc_map,
    };
    index
        .validate()
        .map_err(|reason| Error::load(dir.display().to_string(), reason))?;
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::DEFAULT_BLOCK_SIZE;

    fn imp(p: u16, l: u16) -> PackedImpact {
        PackedImpact::pack(p, l)
    }

    /// Tiny two-term index exercising multi-block lists.
    fn sample_index() -> Index {
        let a = PostingList::from_postings(
            &(0..300u32)
                .map(|d| (d * 2, imp((d % 7 + 1) as u16, (d % 5) as u16)))
                .collect::<Vec<_>>(),
            DEFAULT_BLOCK_SIZE,
        );
        let b =
            PostingList::from_postings(&[(3, imp(9, 1)), (599, imp(1, 200))], DEFAULT_BLOCK_SIZE);
        let mut terms = BTreeMap::new();
        terms.insert(
            "alpha".to_string(),
            LexiconEntry {
                term_id: 0,
                doc_frequency: a.doc_frequency,
                max_primary: a.max_primary,
                max_learned: a.max_learned,
                offset: 0,
                length: 0,
            },
        );
        terms.insert(
            "beta".to_string(),
            LexiconEntry {
                term_id: 1,
                doc_frequency: b.doc_frequency,
                max_primary: b.max_primary,
                max_learned: b.max_learned,
                offset: 0,
                length: 0,
            },
        );
        let num_docs = 600u32;
        let doc_lengths: Vec<u32> = (0..num_docs).map(|d| d % 11 + 1).collect();
        let sum: u64 = doc_lengths.iter().map(|&l| u64::from(l)).sum();
        Index {
            metadata: IndexMetadata {
                num_docs,
                avg_doclen: sum as f64 / f64::from(num_docs),
                doc_lengths,
                primary_quant_max: 4.25,
                learned_quant_max: 1.5,
                block_size: DEFAULT_BLOCK_SIZE as u32,
                format_version: FORMAT_VERSION,
            },
            lexicon: Lexicon::new(terms),
            lists: vec![a, b],
            doc_map: (0..num_docs).map(|d| format!("doc{d}")).collect(),
        }
    }

    #[test]
    fn roundtrip_preserves_index() {
        let dir = tempfile::tempdir().unwrap();
        let index = sample_index();
        write_index(&index, dir.path()).unwrap();
        let loaded = load_index(dir.path()).unwrap();
        assert_eq!(loaded.metadata.num_docs, index.metadata.num_docs);
        assert_eq!(loaded.metadata.avg_doclen, index.metadata.avg_doclen);
        assert_eq!(loaded.metadata.doc_lengths, index.metadata.doc_lengths);
        assert_eq!(loaded.doc_map, index.doc_map);
        assert_eq!(loaded.lists, index.lists);
        let entry = loaded.lexicon.get("beta").unwrap();
        assert_eq!(entry.doc_frequency, 2);
    }

    #[test]
    fn writes_are_byte_deterministic() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let index = sample_index();
        write_index(&index, d1.path()).unwrap();
        write_index(&index, d2.path()).unwrap();
        for name in [
            METADATA_FILE,
            LEXICON_FILE,
            POSTINGS_FILE,
            DOCLENS_FILE,
            DOCMAP_FILE,
        ] {
            let b1 = fs::read(d1.path().join(name)).unwrap();
            let b2 = fs::read(d2.path().join(name)).unwrap();
            assert_eq!(b1, b2, "{name} differs between identical writes");
        }
    }

    #[test]
    fn missing_metadata_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_index(dir.path()).unwrap_err();
        assert!(err.to_string().contains("metadata.json"), "got: {err}");
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let index = sample_index();
        write_index(&index, dir.path()).unwrap();
        let path = dir.path().join(METADATA_FILE);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(
            &path,
            text.replace("\"format_version\": 1", "\"format_version\": 2"),
        )
        .unwrap();
        let err = load_index(dir.path()).unwrap_err();
        assert!(err.to_string().contains("format version"), "got: {err}");
    }

    #[test]
    fn postings_corruption_fails_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let index = sample_index();
        write_index(&index, dir.path()).unwrap();
        let path = dir.path().join(POSTINGS_FILE);
        let mut bytes = fs::read(&path).unwrap();
        bytes[10] ^= 0xff;
        fs::write(&path, bytes).unwrap();
        let err = load_index(dir.path()).unwrap_err();
        assert!(err.to_string().contains("checksum mismatch"), "got: {err}");
        assert!(err.to_string().contains("postings.bin"), "got: {err}");
    }

    #[test]
    fn truncated_doclens_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let index = sample_index();
        write_index(&index, dir.path()).unwrap();
        let path = dir.path().join(DOCLENS_FILE);
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        let err = load_index(dir.path()).unwrap_err();
        // Truncation shows up first as a checksum failure, which is the point.
        assert!(err.to_string().contains("doclens.bin"), "got: {err}");
    }

    #[test]
    fn stale_lexicon_bounds_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut index = sample_index();
        write_index(&index, dir.path()).unwrap();
        // Rewrite with a lexicon whose stored max disagrees with postings.
        index.lists[1].max_primary = 3;
        let mut terms = BTreeMap::new();
        for (t, e) in index.lexicon.iter() {
            let mut e = *e;
            if t == "beta" {
                e.max_primary = 3;
            }
            terms.insert(t.to_string(), e);
        }
        index.lexicon = Lexicon::new(terms);
        write_index(&index, dir.path()).unwrap();
        let err = load_index(dir.path()).unwrap_err();
        assert!(err.to_string().contains("stale"), "got: {err}");
    }
}
