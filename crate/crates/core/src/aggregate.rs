//! Sample-selection composers: the metric-agnostic round-robin, the voting
//! aggregator, and the adversarial most-classes-first baseline.

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::metrics::{MetricId, Ranking};
use crate::SampleId;

/// Rankings to compose plus the requested selection size.
///
/// Ranking order is the round-robin turn order.
#[derive(Debug, Clone, Copy)]
pub struct SelectionRequest<'a> {
    pub rankings: &'a [Ranking],
    pub n: usize,
}

/// Chosen samples in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub selected: Vec<SampleId>,
    /// How many selections each ranking contributed (aligned with the
    /// request's ranking order). For voting this counts selected samples in
    /// each ranking's candidate set, so the total may exceed `selected`.
    pub per_metric: Vec<(MetricId, usize)>,
    /// `histogram[v − 1]` = number of candidate samples that got exactly `v`
    /// votes (voting mode only).
    pub vote_histogram: Option<Vec<usize>>,
    /// Index of the ranking whose turn chose each selected sample (round-robin
    /// mode only; empty otherwise).
    pub contributed_by: Vec<usize>,
}

/// Round-robin union of the rankings' heads.
///
/// Per-metric cursors start at the head; metrics take turns in request
/// order; each turn offers the cursor sample and advances the cursor whether
/// or not the sample was already chosen. Stops at `n` chosen or all cursors
/// exhausted.
pub fn metric_agnostic(req: &SelectionRequest) -> Result<SelectionResult> {
    if req.n < 1 {
        return Err(Error::usage("selection size must be at least 1"));
    }
    if req.rankings.is_empty() {
        return Err(Error::usage("metric_agnostic needs at least one ranking"));
    }
    let mut cursors = vec![0usize; req.rankings.len()];
    let mut contributions = vec![0usize; req.rankings.len()];
    let mut chosen: HashSet<SampleId> = HashSet::new();
    let mut selected = Vec::new();
    let mut contributed_by = Vec::new();
    'rounds: loop {
        let mut any_turn = false;
        for (t, ranking) in req.rankings.iter().enumerate() {
            if selected.len() == req.n {
                break 'rounds;
            }
            if cursors[t] >= ranking.ordered.len() {
                continue;
            }
            any_turn = true;
            let id = ranking.ordered[cursors[t]];
            cursors[t] += 1;
            if chosen.insert(id) {
                selected.push(id);
                contributed_by.push(t);
                contributions[t] += 1;
            }
        }
        if !any_turn {
            break;
        }
    }
    let per_metric = req
        .rankings
        .iter()
        .zip(contributions)
        .map(|(r, c)| (r.metric_id, c))
        .collect();
    Ok(SelectionResult {
        selected,
        per_metric,
        vote_histogram: None,
        contributed_by,
    })
}

/// Selection by vote count over each ranking's top-`n` candidate set.
///
/// Votes descending, ties by ascending sample id; the histogram reports how
/// many candidates got 1, 2, …, T votes.
pub fn vote_select(req: &SelectionRequest) -> Result<SelectionResult> {
    if req.n < 1 {
        return Err(Error::usage("selection size must be at least 1"));
    }
    if req.rankings.is_empty() {
        return Err(Error::usage("vote_select needs at least one ranking"));
    }
    let mut votes: BTreeMap<SampleId, usize> = BTreeMap::new();
    for ranking in req.rankings {
        for &id in ranking.ordered.iter().take(req.n) {
            *votes.entry(id).or_insert(0) += 1;
        }
    }
    let mut histogram = vec![0usize; req.rankings.len()];
    for &v in votes.values() {
        histogram[v - 1] += 1;
    }
    let mut order: Vec<(SampleId, usize)> = votes.iter().map(|(&id, &v)| (id, v)).collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let selected: Vec<SampleId> = order.into_iter().take(req.n).map(|(id, _)| id).collect();
    let per_metric = req
        .rankings
        .iter()
        .map(|ranking| {
            let set: HashSet<SampleId> = ranking.ordered.iter().take(req.n).copied().collect();
            let hits = selected.iter().filter(|id| set.contains(id)).count();
            (ranking.metric_id, hits)
        })
        .collect();
    Ok(SelectionResult {
        selected,
        per_metric,
        vote_histogram: Some(histogram),
        contributed_by: Vec::new(),
    })
}

/// Most-classes-first selection from oracle label counts (ablation baseline;
/// the only selector allowed to see ground truth).
pub fn adversarial_select(counts: &[(SampleId, usize)], n: usize) -> Result<SelectionResult> {
    if n < 1 {
        return Err(Error::usage("selection size must be at least 1"));
    }
    let mut order = counts.to_vec();
    order.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let selected = order.into_iter().take(n).map(|(id, _)| id).collect();
    Ok(SelectionResult {
        selected,
        per_metric: Vec::new(),
        vote_histogram: None,
        contributed_by: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ranking(metric_id: MetricId, ids: &[u64]) -> Ranking {
        Ranking {
            metric_id,
            ordered: ids.iter().copied().map(SampleId).collect(),
        }
    }

    fn ids(raw: &[u64]) -> Vec<SampleId> {
        raw.iter().copied().map(SampleId).collect()
    }

    #[test]
    fn round_robin_walks_past_duplicates() {
        // Turn 1 adds a, turn 2 adds b; turn 3 re-offers b and advances past
        // it, turn 4 adds d.
        let rankings = [
            ranking(MetricId::Unc, &[1, 2, 3]), // a b c
            ranking(MetricId::Ent, &[2, 4, 5]), // b d e
        ];
        let result = metric_agnostic(&SelectionRequest {
            rankings: &rankings,
            n: 3,
        })
        .unwrap();
        assert_eq!(result.selected, ids(&[1, 2, 4]));
        assert_eq!(
            result.per_metric,
            vec![(MetricId::Unc, 1), (MetricId::Ent, 2)]
        );
        assert_eq!(result.contributed_by, vec![0, 1, 1]);
    }

    #[test]
    fn identical_rankings_collapse_to_a_prefix() {
        let rankings = [
            ranking(MetricId::Unc, &[5, 6, 7, 8]),
            ranking(MetricId::Ent, &[5, 6, 7, 8]),
            ranking(MetricId::Mm, &[5, 6, 7, 8]),
        ];
        let result = metric_agnostic(&SelectionRequest {
            rankings: &rankings,
            n: 3,
        })
        .unwrap();
        assert_eq!(result.selected, ids(&[5, 6, 7]));
    }

    #[test]
    fn disjoint_rankings_contribute_their_heads() {
        let rankings = [
            ranking(MetricId::Unc, &[1, 2]),
            ranking(MetricId::Ent, &[3, 4]),
            ranking(MetricId::Mm, &[5, 6]),
        ];
        let result = metric_agnostic(&SelectionRequest {
            rankings: &rankings,
            n: 3,
        })
        .unwrap();
        assert_eq!(result.selected, ids(&[1, 3, 5]));
        assert!(result.per_metric.iter().all(|&(_, c)| c == 1));
    }

    #[test]
    fn single_ranking_degenerates_to_its_prefix() {
        let rankings = [ranking(MetricId::SepSum, &[9, 8, 7, 6])];
        let result = metric_agnostic(&SelectionRequest {
            rankings: &rankings,
            n: 2,
        })
        .unwrap();
        assert_eq!(result.selected, ids(&[9, 8]));
    }

    #[test]
    fn exhaustion_yields_a_short_result() {
        let rankings = [
            ranking(MetricId::Unc, &[1, 2]),
            ranking(MetricId::Ent, &[2, 1]),
        ];
        let result = metric_agnostic(&SelectionRequest {
            rankings: &rankings,
            n: 10,
        })
        .unwrap();
        assert_eq!(result.selected, ids(&[1, 2]));
    }

    #[test]
    fn empty_rankings_select_nothing() {
        let rankings = [ranking(MetricId::Unc, &[]), ranking(MetricId::Ent, &[])];
        let result = metric_agnostic(&SelectionRequest {
            rankings: &rankings,
            n: 4,
        })
        .unwrap();
        assert!(result.selected.is_empty());
    }

    #[test]
    fn degenerate_requests_are_usage_errors() {
        let rankings = [ranking(MetricId::Unc, &[1])];
        assert!(metric_agnostic(&SelectionRequest {
            rankings: &rankings,
            n: 0,
        })
        .is_err());
        assert!(metric_agnostic(&SelectionRequest {
            rankings: &[],
            n: 1,
        })
        .is_err());
        assert!(vote_select(&SelectionRequest {
            rankings: &rankings,
            n: 0,
        })
        .is_err());
        assert!(adversarial_select(&[(SampleId(1), 1)], 0).is_err());
    }

    #[test]
    fn vote_example_counts_and_orders() {
        // Top-2 sets {a,b}, {b,c}, {b,d} → b has 3 votes, then a by id.
        let rankings = [
            ranking(MetricId::Unc, &[1, 2]),
            ranking(MetricId::Ent, &[2, 3]),
            ranking(MetricId::Mm, &[2, 4]),
        ];
        let result = vote_select(&SelectionRequest {
            rankings: &rankings,
            n: 2,
        })
        .unwrap();
        assert_eq!(result.selected, ids(&[2, 1]));
        assert_eq!(result.vote_histogram, Some(vec![3, 0, 1]));
    }

    #[test]
    fn unanimous_candidate_is_selected_first() {
        let rankings = [
            ranking(MetricId::Unc, &[7, 1]),
            ranking(MetricId::Ent, &[2, 7]),
            ranking(MetricId::Mm, &[3, 7]),
        ];
        let result = vote_select(&SelectionRequest {
            rankings: &rankings,
            n: 2,
        })
        .unwrap();
        assert_eq!(result.selected[0], SampleId(7));
    }

    #[test]
    fn disjoint_candidate_sets_give_single_votes() {
        let rankings = [
            ranking(MetricId::Unc, &[1, 2]),
            ranking(MetricId::Ent, &[3, 4]),
        ];
        let result = vote_select(&SelectionRequest {
            rankings: &rankings,
            n: 2,
        })
        .unwrap();
        assert_eq!(result.vote_histogram, Some(vec![4, 0]));
        assert_eq!(result.selected, ids(&[1, 2]));
    }

    #[test]
    fn adversarial_orders_by_count_then_id() {
        let counts = [(SampleId(1), 3), (SampleId(2), 1), (SampleId(3), 2)];
        let result = adversarial_select(&counts, 2).unwrap();
        assert_eq!(result.selected, ids(&[1, 3]));

        let equal = [(SampleId(5), 2), (SampleId(3), 2), (SampleId(4), 2)];
        let result = adversarial_select(&equal, 2).unwrap();
        assert_eq!(result.selected, ids(&[3, 4]));

        let result = adversarial_select(&counts, 10).unwrap();
        assert_eq!(result.selected, ids(&[1, 3, 2]));
    }

    /// Literal step-by-step transcription of the round-robin pseudocode,
    /// kept independent of the implementation above.
    fn round_robin_oracle(rankings: &[Vec<u64>], n: usize) -> Vec<u64> {
        let mut idxs = vec![0usize; rankings.len()];
        let mut s: Vec<u64> = Vec::new();
        while s.len() < n && idxs.iter().zip(rankings).any(|(&i, r)| i < r.len()) {
            for t in 0..rankings.len() {
                if s.len() == n {
                    break;
                }
                if idxs[t] < rankings[t].len() {
                    let candidate = rankings[t][idxs[t]];
                    if !s.contains(&candidate) {
                        s.push(candidate);
                    }
                    idxs[t] += 1;
                }
            }
        }
        s
    }

    proptest! {
        #[test]
        fn matches_the_pseudocode_oracle(
            lists in proptest::collection::vec(
                proptest::collection::vec(0u64..30, 0..12),
                1..5,
            ),
            n in 1usize..10,
        ) {
            // Rankings hold unique ids; dedup each generated list.
            let lists: Vec<Vec<u64>> = lists
                .into_iter()
                .map(|mut l| {
                    let mut seen = HashSet::new();
                    l.retain(|id| seen.insert(*id));
                    l
                })
                .collect();
            let rankings: Vec<Ranking> = lists
                .iter()
                .map(|l| ranking(MetricId::Unc, l))
                .collect();
            let result = metric_agnostic(&SelectionRequest {
                rankings: &rankings,
                n,
            })
            .unwrap();
            let oracle = round_robin_oracle(&lists, n);
            prop_assert_eq!(
                result.selected,
                oracle.into_iter().map(SampleId).collect::<Vec<_>>()
            );
        }

        #[test]
        fn selection_is_unique_and_union_bounded(
            lists in proptest::collection::vec(
                proptest::collection::vec(0u64..25, 0..10),
                1..5,
            ),
            n in 1usize..12,
        ) {
            let lists: Vec<Vec<u64>> = lists
                .into_iter()
                .map(|mut l| {
                    let mut seen = HashSet::new();
                    l.retain(|id| seen.insert(*id));
                    l
                })
                .collect();
            let rankings: Vec<Ranking> =
                lists.iter().map(|l| ranking(MetricId::Mm, l)).collect();
            let result = metric_agnostic(&SelectionRequest {
                rankings: &rankings,
                n,
            })
            .unwrap();
            let unique: HashSet<SampleId> = result.selected.iter().copied().collect();
            prop_assert_eq!(unique.len(), result.selected.len());
            let union: HashSet<u64> = lists.iter().flatten().copied().collect();
            prop_assert_eq!(result.selected.len(), n.min(union.len()));
            let contributed: usize = result.per_metric.iter().map(|&(_, c)| c).sum();
            prop_assert_eq!(contributed, result.selected.len());
            prop_assert_eq!(result.contributed_by.len(), result.selected.len());
            prop_assert!(result.contributed_by.iter().all(|&t| t < lists.len()));
        }

        #[test]
        fn truncating_rankings_to_n_changes_nothing(
            lists in proptest::collection::vec(
                proptest::collection::vec(0u64..25, 0..10),
                1..5,
            ),
            n in 1usize..8,
        ) {
            let lists: Vec<Vec<u64>> = lists
                .into_iter()
                .map(|mut l| {
                    let mut seen = HashSet::new();
                    l.retain(|id| seen.insert(*id));
                    l
                })
                .collect();
            let full: Vec<Ranking> = lists.iter().map(|l| ranking(MetricId::Ent, l)).collect();
            let cut: Vec<Ranking> = lists
                .iter()
                .map(|l| ranking(MetricId::Ent, &l[..l.len().min(n)]))
                .collect();
            let a = metric_agnostic(&SelectionRequest { rankings: &full, n }).unwrap();
            let b = metric_agnostic(&SelectionRequest { rankings: &cut, n }).unwrap();
            prop_assert_eq!(a.selected, b.selected);
        }

        #[test]
        fn vote_histogram_sums_to_candidate_union(
            lists in proptest::collection::vec(
                proptest::collection::vec(0u64..25, 0..10),
                1..5,
            ),
            n in 1usize..8,
        ) {
            let lists: Vec<Vec<u64>> = lists
                .into_iter()
                .map(|mut l| {
                    let mut seen = HashSet::new();
                    l.retain(|id| seen.insert(*id));
                    l
                })
                .collect();
            let rankings: Vec<Ranking> =
                lists.iter().map(|l| ranking(MetricId::SepMin, l)).collect();
            let result = vote_select(&SelectionRequest {
                rankings: &rankings,
                n,
            })
            .unwrap();
            let union: HashSet<u64> = lists
                .iter()
                .flat_map(|l| l.iter().take(n))
                .copied()
                .collect();
            let total: usize = result.vote_histogram.unwrap().iter().sum();
            prop_assert_eq!(total, union.len());
        }
    }
}
