//! Synthetic workload generator: a seeded collection, learned-impact
//! file, query set and judgments with the statistical shape that makes
//! the two channels behave differently under pruning.
//!
//! Document terms follow a Zipf distribution, so the lexical channel
//! gets the usual skew: frequent terms carry near-zero idf and tiny
//! impact bounds, rare terms carry large ones. Learned weights are
//! heavy-tailed the other way — most weights are small but every list
//! is long enough to contain a few near-maximal ones — so learned list
//! upper bounds sit near the channel maximum while typical postings
//! score far below them. Bounds that overpromise are what blunt
//! pruning on the learned channel; the lexical channel, whose bounds
//! are honest and tiny for frequent terms, stays easy to prune. Each
//! query anchors on one frequent term to keep the matching set large.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Zipf;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub num_docs: usize,
    pub vocab_size: usize,
    /// Mean document length; lengths are uniform over [avg/2, 3·avg/2].
    pub avg_doc_len: usize,
    /// Zipf exponent for document term draws.
    pub doc_zipf_exponent: f64,
    pub num_queries: usize,
    /// Distinct terms per query, anchor included.
    pub query_len: usize,
    /// Zipf exponent for query term draws; flatter than the document
    /// exponent so mid-frequency terms show up.
    pub query_zipf_exponent: f64,
    /// Each query's first term is drawn uniformly from the top ranks
    /// up to this tier, guaranteeing one frequent term per query.
    pub query_anchor_tier: usize,
    /// Non-anchor query terms are redrawn until their rank is at least
    /// this floor, so the anchor stays the only frequent term.
    pub query_term_floor: usize,
    /// Probability that a document term also receives a learned weight.
    pub learned_keep_prob: f64,
    /// Learned weights span this half-open range.
    pub learned_weight_range: (f64, f64),
    /// Power applied to the uniform draw before scaling into the
    /// range: higher values push mass toward the low end while the
    /// occasional draw still lands near the top.
    pub learned_weight_shape: f64,
    /// Mean number of expansion terms (learned-only, absent from the
    /// text) added per document.
    pub expansion_terms_per_doc: f64,
    /// Judged documents sampled per query for the qrels.
    pub judged_per_query: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            num_docs: 1000,
            vocab_size: 2000,
            avg_doc_len: 32,
            doc_zipf_exponent: 1.1,
            num_queries: 200,
            query_len: 4,
            query_zipf_exponent: 0.8,
            query_anchor_tier: 2,
            query_term_floor: 32,
            learned_keep_prob: 0.9,
            learned_weight_range: (0.02, 1.0),
            learned_weight_shape: 6.0,
            expansion_terms_per_doc: 0.5,
            judged_per_query: 5,
        }
    }
}

/// The four generated artifacts, ready to write to disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthOutput {
    pub collection_tsv: String,
    pub impacts_jsonl: String,
    pub queries_tsv: String,
    pub qrels_txt: String,
}

fn term_name(rank: usize) -> String {
    format!("t{rank:05}")
}

fn validate(config: &SynthConfig) -> Result<()> {
    let fail = |msg: String| Err(Error::SynthConfig(msg));
    if config.num_docs == 0 {
        return fail("num_docs must be positive".into());
    }
    if config.vocab_size == 0 {
        return fail("vocab_size must be positive".into());
    }
    if config.avg_doc_len == 0 {
        return fail("avg_doc_len must be positive".into());
    }
    if config.query_len == 0 || config.query_len > config.vocab_size {
        return fail(format!(
            "query_len {} must be in 1..={} (vocab_size)",
            config.query_len, config.vocab_size
        ));
    }
    if config.query_anchor_tier == 0 {
        return fail("query_anchor_tier must be positive".into());
    }
    if config.query_term_floor == 0
        || config.vocab_size - config.query_term_floor.min(config.vocab_size) < config.query_len - 1
    {
        return fail(format!(
            "query_term_floor {} leaves fewer than {} ranks in a vocabulary of {}",
            config.query_term_floor,
            config.query_len - 1,
            config.vocab_size
        ));
    }
    // Float checks are negated so NaN fails them too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(config.doc_zipf_exponent > 0.0) || !(config.query_zipf_exponent > 0.0) {
        return fail("zipf exponents must be positive".into());
    }
    if !(0.0..=1.0).contains(&config.learned_keep_prob) {
        return fail("learned_keep_prob must be in [0, 1]".into());
    }
    let (low, high) = config.learned_weight_range;
    if !(low.is_finite() && high.is_finite() && 0.0 < low && low < high) {
        return fail(format!(
            "learned weight range ({low}, {high}) is not a positive range"
        ));
    }
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(config.learned_weight_shape >= 1.0) {
        return fail("learned_weight_shape must be at least 1".into());
    }
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(config.expansion_terms_per_doc >= 0.0) {
        return fail("expansion_terms_per_doc must be non-negative".into());
    }
    Ok(())
}

/// Generate the full workload for one seed. Byte-deterministic: the
/// same config always yields the same four strings.
pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    validate(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let doc_dist = Zipf::new(config.vocab_size as u64, config.doc_zipf_exponent)
        .map_err(|e| Error::SynthConfig(format!("document term distribution: {e}")))?;
    let query_dist = Zipf::new(config.vocab_size as u64, config.query_zipf_exponent)
        .map_err(|e| Error::SynthConfig(format!("query term distribution: {e}")))?;

    let len_min = config.avg_doc_len.div_ceil(2);
    let len_max = config.avg_doc_len + config.avg_doc_len / 2;

    let mut collection = String::new();
    let mut impacts = String::new();
    let mut doc_terms: Vec<BTreeSet<usize>> = Vec::with_capacity(config.num_docs);
    let (w_low, w_high) = config.learned_weight_range;
    let shape = config.learned_weight_shape;
    let draw_weight =
        |rng: &mut ChaCha8Rng| w_low + (w_high - w_low) * rng.gen::<f64>().powf(shape);
    for i in 0..config.num_docs {
        let docid = format!("D{i:07}");
        let len = rng.gen_range(len_min..=len_max);
        let mut distinct = BTreeSet::new();
        collection.push_str(&docid);
        collection.push('\t');
        for j in 0..len {
            let rank = doc_dist.sample(&mut rng) as usize;
            if j > 0 {
                collection.push(' ');
            }
            collection.push_str(&term_name(rank));
            distinct.insert(rank);
        }
        collection.push('\n');

        let mut vector: BTreeMap<String, f64> = BTreeMap::new();
        for &rank in &distinct {
            if rng.gen::<f64>() < config.learned_keep_prob {
                let weight = draw_weight(&mut rng);
                vector.insert(term_name(rank), weight);
            }
        }
        let mut expansions = config.expansion_terms_per_doc.floor() as usize;
        if rng.gen::<f64>() < config.expansion_terms_per_doc.fract() {
            expansions += 1;
        }
        for _ in 0..expansions {
            let rank = rng.gen_range(1..=config.vocab_size);
            let weight = draw_weight(&mut rng);
            if !distinct.contains(&rank) {
                vector.entry(term_name(rank)).or_insert(weight);
            }
        }
        if !vector.is_empty() {
            let record = serde_json::json!({ "docid": docid, "vector": vector });
            impacts.push_str(&record.to_string());
            impacts.push('\n');
        }
        doc_terms.push(distinct);
    }

    let mut queries = String::new();
    let mut query_terms: Vec<Vec<usize>> = Vec::with_capacity(config.num_queries);
    let anchor_tier = config.query_anchor_tier.min(config.vocab_size);
    for q in 0..config.num_queries {
        let mut terms: Vec<usize> = Vec::with_capacity(config.query_len);
        terms.push(rng.gen_range(1..=anchor_tier));
        let mut attempts = 0usize;
        while terms.len() < config.query_len {
            attempts += 1;
            if attempts > 1000 * config.query_len {
                return Err(Error::SynthConfig(format!(
                    "could not draw {} distinct query terms from a vocabulary of {}",
                    config.query_len, config.vocab_size
                )));
            }
            let rank = query_dist.sample(&mut rng) as usize;
            if rank >= config.query_term_floor && !terms.contains(&rank) {
                terms.push(rank);
            }
        }
        queries.push_str(&format!("q{}\t", q + 1));
        for (j, rank) in terms.iter().enumerate() {
            if j > 0 {
                queries.push(' ');
            }
            queries.push_str(&term_name(*rank));
        }
        queries.push('\n');
        query_terms.push(terms);
    }

    // Judgments sample documents that actually contain a query term,
    // so the metrics exercise non-trivial paths.
    let mut term_docs: HashMap<usize, Vec<usize>> = HashMap::new();
    for (doc, terms) in doc_terms.iter().enumerate() {
        for &rank in terms {
            term_docs.entry(rank).or_default().push(doc);
        }
    }
    let mut qrels = String::new();
    for (q, terms) in query_terms.iter().enumerate() {
        let mut judged: BTreeMap<usize, u32> = BTreeMap::new();
        for _ in 0..config.judged_per_query * 3 {
            if judged.len() >= config.judged_per_query {
                break;
            }
            let rank = terms[rng.gen_range(0..terms.len())];
            let Some(docs) = term_docs.get(&rank) else {
                continue;
            };
            let doc = docs[rng.gen_range(0..docs.len())];
            let roll = rng.gen_range(0..100);
            let grade = match roll {
                0..=19 => 0,
                20..=59 => 1,
                60..=84 => 2,
                _ => 3,
            };
            judged.entry(doc).or_insert(grade);
        }
        for (doc, grade) in judged {
            qrels.push_str(&format!("q{} 0 D{doc:07} {grade}\n", q + 1));
        }
    }

    Ok(SynthOutput {
        collection_tsv: collection,
        impacts_jsonl: impacts,
        queries_tsv: queries,
        qrels_txt: qrels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{read_collection, read_impacts};
    use crate::eval::read_qrels;
    use std::fs;

    fn small() -> SynthConfig {
        SynthConfig {
            num_docs: 120,
            vocab_size: 80,
            avg_doc_len: 12,
            num_queries: 10,
            query_len: 3,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate(&small()).unwrap();
        let b = generate(&SynthConfig {
            seed: 43,
            ..small()
        })
        .unwrap();
        assert_ne!(a.collection_tsv, b.collection_tsv);
    }

    #[test]
    fn shape_matches_config() {
        let config = small();
        let out = generate(&config).unwrap();
        assert_eq!(out.collection_tsv.lines().count(), config.num_docs);
        assert_eq!(out.queries_tsv.lines().count(), config.num_queries);
        for line in out.queries_tsv.lines() {
            let (_, text) = line.split_once('\t').unwrap();
            let terms: Vec<&str> = text.split(' ').collect();
            assert_eq!(terms.len(), config.query_len);
            let distinct: BTreeSet<&str> = terms.iter().copied().collect();
            assert_eq!(
                distinct.len(),
                config.query_len,
                "query terms must be distinct"
            );
        }
        for line in out.collection_tsv.lines() {
            let (_, text) = line.split_once('\t').unwrap();
            let len = text.split(' ').count();
            assert!(len >= config.avg_doc_len / 2 && len <= config.avg_doc_len * 3 / 2);
        }
    }

    #[test]
    fn artifacts_parse_back() {
        let dir = tempfile::tempdir().unwrap();
        let out = generate(&small()).unwrap();
        let coll = dir.path().join("collection.tsv");
        let imp = dir.path().join("impacts.jsonl");
        let qrl = dir.path().join("qrels.txt");
        fs::write(&coll, &out.collection_tsv).unwrap();
        fs::write(&imp, &out.impacts_jsonl).unwrap();
        fs::write(&qrl, &out.qrels_txt).unwrap();

        let docs = read_collection(&coll).unwrap();
        assert_eq!(docs.len(), 120);
        let known: BTreeSet<&str> = docs.iter().map(|d| d.external_docid.as_str()).collect();

        let records = read_impacts(&imp).unwrap();
        assert!(!records.is_empty());
        let (low, high) = small().learned_weight_range;
        for record in &records {
            assert!(known.contains(record.external_docid.as_str()));
            for &w in record.term_weights.values() {
                assert!(w >= low && w < high, "weight {w} outside ({low}, {high})");
            }
        }

        let qrels = read_qrels(&qrl).unwrap();
        assert!(qrels.num_queries() > 0);
    }

    #[test]
    fn expansion_terms_leave_the_document_text() {
        let config = SynthConfig {
            expansion_terms_per_doc: 2.0,
            ..small()
        };
        let out = generate(&config).unwrap();
        let text_terms: Vec<BTreeSet<&str>> = out
            .collection_tsv
            .lines()
            .map(|l| l.split_once('\t').unwrap().1.split(' ').collect())
            .collect();
        let mut saw_expansion = false;
        for line in out.impacts_jsonl.lines() {
            let record: serde_json::Value = serde_json::from_str(line).unwrap();
            let docid = record["docid"].as_str().unwrap();
            let doc_idx: usize = docid[1..].parse().unwrap();
            for term in record["vector"].as_object().unwrap().keys() {
                if !text_terms[doc_idx].contains(term.as_str()) {
                    saw_expansion = true;
                }
            }
        }
        assert!(saw_expansion, "expected learned-only expansion terms");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = |f: fn(&mut SynthConfig)| {
            let mut config = small();
            f(&mut config);
            assert!(matches!(generate(&config), Err(Error::SynthConfig(_))));
        };
        bad(|c| c.num_docs = 0);
        bad(|c| c.vocab_size = 0);
        bad(|c| c.avg_doc_len = 0);
        bad(|c| c.query_len = 0);
        bad(|c| c.query_len = c.vocab_size + 1);
        bad(|c| c.doc_zipf_exponent = 0.0);
        bad(|c| c.learned_weight_range = (0.0, 1.0));
        bad(|c| c.learned_weight_range = (0.8, 0.2));
        bad(|c| c.learned_weight_shape = 0.5);
        bad(|c| c.learned_keep_prob = 1.5);
        bad(|c| c.expansion_terms_per_doc = -1.0);
        bad(|c| c.query_anchor_tier = 0);
        bad(|c| c.query_term_floor = 0);
        bad(|c| c.query_term_floor = c.vocab_size);
        // A floor deep in the tail of a steep distribution stalls the
        // rejection loop and must surface as a config error.
        bad(|c| {
            c.query_zipf_exponent = 8.0;
            c.query_term_floor = 70;
        });
    }
}
