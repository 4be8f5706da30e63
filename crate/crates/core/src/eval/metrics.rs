//! Recall with respect to exact retrieval, MRR and NDCG.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::eval::trec::{Qrels, Run};

/// Per-query values and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub per_query: Vec<(String, f64)>,
    pub mean: f64,
}

impl MetricReport {
    fn from_values(per_query: Vec<(String, f64)>) -> Self {
        let mean = if per_query.is_empty() {
            0.0
        } else {
            per_query.iter().map(|p| p.1).sum::<f64>() / per_query.len() as f64
        };
        Self { per_query, mean }
    }

    /// `qid<TAB>value` lines followed by `ALL<TAB>mean`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (q, v) in &self.per_query {
            let _ = writeln!(out, "{q}\t{v:.6}");
        }
        let _ = writeln!(out, "ALL\t{:.6}", self.mean);
        out
    }
}

/// `|approx@k ∩ exact@k| / |exact@k|` per query of the exact run. Queries
/// missing from `approx` score 0; a query whose exact list is empty scores 1.
pub fn recall_wrt_exact(approx: &Run, exact: &Run, k: usize) -> MetricReport {
    let values = exact
        .queries
        .keys()
        .map(|qid| {
            let truth: HashSet<u64> = exact.ranking(qid).into_iter().take(k).collect();
            let got: HashSet<u64> = approx.ranking(qid).into_iter().take(k).collect();
            let value = if truth.is_empty() { 1.0 } else { got.intersection(&truth).count() as f64 / truth.len() as f64 };
            (qid.clone(), value)
        })
        .collect();
    MetricReport::from_values(values)
}

/// Reciprocal rank of the first document with relevance > 0 within
/// `cutoff`, else 0; one value per query of the run.
pub fn mrr_at(run: &Run, qrels: &Qrels, cutoff: usize) -> MetricReport {
    let values = run
        .queries
        .keys()
        .map(|qid| {
            let rr = run
                .ranking(qid)
                .into_iter()
                .take(cutoff)
                .position(|d| qrels.relevance(qid, d) > 0)
                .map_or(0.0, |r| 1.0 / (r + 1) as f64);
            (qid.clone(), rr)
        })
        .collect();
    MetricReport::from_values(values)
}

fn dcg(rels: impl Iterator<Item = i32>) -> f64 {
    rels.enumerate().map(|(i, rel)| (2f64.powi(rel.max(0)) - 1.0) / ((i + 2) as f64).log2()).sum()
}

/// NDCG with gain `2^rel − 1` and discount `log2(rank + 1)`, normalized by
/// the ideal ordering of the judged documents; 0 for queries without
/// relevant documents.
pub fn ndcg_at(run: &Run, qrels: &Qrels, cutoff: usize) -> MetricReport {
    let values = run
        .queries
        .keys()
        .map(|qid| {
            let mut ideal: Vec<i32> = qrels.judgments.get(qid).map(|j| j.values().copied().collect()).unwrap_or_default();
            ideal.sort_unstable_by(|a, b| b.cmp(a));
            let idcg = dcg(ideal.into_iter().take(cutoff));
            let value = if idcg > 0.0 {
                dcg(run.ranking(qid).into_iter().take(cutoff).map(|d| qrels.relevance(qid, d))) / idcg
            } else {
                0.0
            };
            (qid.clone(), value)
        })
        .collect();
    MetricReport::from_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn run_of(lists: &[(&str, &[u64])]) -> Run {
        let mut run = Run::new();
        for (q, ids) in lists {
            run.queries.insert(q.to_string(), ids.iter().enumerate().map(|(i, &d)| (d, -(i as f64))).collect());
        }
        run
    }

    fn qrels_of(items: &[(&str, u64, i32)]) -> Qrels {
        let mut q = Qrels::default();
        for &(qid, d, r) in items {
            q.judgments.entry(qid.to_string()).or_default().insert(d, r);
        }
        q
    }

    #[test]
    fn recall_cases() {
        let exact = run_of(&[("1", &[1, 2, 3])]);
        assert_eq!(recall_wrt_exact(&exact, &exact, 3).mean, 1.0);
        assert_eq!(recall_wrt_exact(&run_of(&[("1", &[7, 8, 9])]), &exact, 3).mean, 0.0);
        assert_eq!(recall_wrt_exact(&run_of(&[("1", &[3, 1, 2])]), &exact, 3).mean, 1.0);
        assert_eq!(recall_wrt_exact(&Run::new(), &exact, 3).mean, 0.0);
    }

    #[test]
    fn rank_metrics_small_cases() {
        let q = qrels_of(&[("1", 5, 1)]);
        assert_eq!(mrr_at(&run_of(&[("1", &[5, 6])]), &q, 10).mean, 1.0);
        assert_eq!(ndcg_at(&run_of(&[("1", &[5, 6])]), &q, 1000).mean, 1.0);
        assert_eq!(mrr_at(&run_of(&[("1", &[6, 5])]), &q, 10).mean, 0.5);
        assert_eq!(mrr_at(&run_of(&[("1", &[6, 5])]), &q, 1).mean, 0.0);
        // a query without relevant documents counts as 0
        let r = ndcg_at(&run_of(&[("1", &[5]), ("2", &[5])]), &q, 10);
        assert_eq!((r.mean, r.per_query.len()), (0.5, 2));
        assert!(r.to_tsv().ends_with("ALL\t0.500000\n"));
    }

    /// Reference scorer written directly from the definitions, with dense
    /// rank arrays instead of maps.
    fn reference(ranked: &[Vec<u64>], rels: &[Vec<(u64, i32)>], cutoff: usize) -> (f64, f64) {
        let (mut mrr, mut ndcg) = (0.0, 0.0);
        for (list, judged) in ranked.iter().zip(rels) {
            let rel_of = |d: u64| judged.iter().find(|j| j.0 == d).map_or(0, |j| j.1);
            for (i, &d) in list.iter().take(10).enumerate() {
                if rel_of(d) > 0 {
                    mrr += 1.0 / (i as f64 + 1.0);
                    break;
                }
            }
            let mut dcg = 0.0;
            for (i, &d) in list.iter().take(cutoff).enumerate() {
                dcg += (2f64.powi(rel_of(d)) - 1.0) / (i as f64 + 2.0).log2();
            }
            let mut grades: Vec<i32> = judged.iter().map(|j| j.1).collect();
            grades.sort_unstable();
            grades.reverse();
            let mut idcg = 0.0;
            for (i, &g) in grades.iter().take(cutoff).enumerate() {
                idcg += (2f64.powi(g) - 1.0) / (i as f64 + 2.0).log2();
            }
            if idcg > 0.0 {
                ndcg += dcg / idcg;
            }
        }
        (mrr / ranked.len() as f64, ndcg / ranked.len() as f64)
    }

    #[test]
    fn matches_reference_on_random_fixture() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let mut ranked = Vec::new();
        let mut rels = Vec::new();
        let mut run = Run::new();
        let mut qrels = Qrels::default();
        for q in 0..50 {
            let mut docs: Vec<u64> = (0..200).collect();
            docs.shuffle(&mut rng);
            let list: Vec<u64> = docs[..rng.random_range(5..60)].to_vec();
            let mut judged: Vec<(u64, i32)> = Vec::new();
            for &d in &docs[..80] {
                if rng.random_bool(0.1) {
                    judged.push((d, rng.random_range(0..4)));
                }
            }
            run.queries.insert(q.to_string(), list.iter().map(|&d| (d, 0.0)).collect());
            qrels.judgments.insert(q.to_string(), judged.iter().copied().collect());
            ranked.push(list);
            rels.push(judged);
        }
        let (mrr, ndcg) = reference(&ranked, &rels, 1000);
        assert!((mrr_at(&run, &qrels, 10).mean - mrr).abs() < 1e-12);
        assert!((ndcg_at(&run, &qrels, 1000).mean - ndcg).abs() < 1e-12);
    }
}
