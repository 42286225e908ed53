//! Per-sample informativeness scores and selection orderings for the query
//! metrics: UNC, ENT, MM, the three SEP aggregates, and seeded RANDOM.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Prediction, CONFIDENCE_CLAMP};
use crate::SampleId;

/// Query metric identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MetricId {
    Unc,
    Ent,
    Mm,
    SepSum,
    SepMax,
    SepMin,
    Random,
}

/// Whether small or large metric values mark informative samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    SelectMin,
    SelectMax,
}

impl MetricId {
    pub const ALL_SCORED: [MetricId; 6] = [
        MetricId::Unc,
        MetricId::Ent,
        MetricId::Mm,
        MetricId::SepSum,
        MetricId::SepMax,
        MetricId::SepMin,
    ];

    /// Fixed selection direction; `None` for RANDOM.
    pub fn direction(self) -> Option<Direction> {
        match self {
            MetricId::Ent => Some(Direction::SelectMax),
            MetricId::Random => None,
            _ => Some(Direction::SelectMin),
        }
    }
}

impl std::fmt::Display for MetricId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            MetricId::Unc => "UNC",
            MetricId::Ent => "ENT",
            MetricId::Mm => "MM",
            MetricId::SepSum => "SEPSUM",
            MetricId::SepMax => "SEPMAX",
            MetricId::SepMin => "SEPMIN",
            MetricId::Random => "RANDOM",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "UNC" => Ok(MetricId::Unc),
            "ENT" => Ok(MetricId::Ent),
            "MM" => Ok(MetricId::Mm),
            "SEPSUM" => Ok(MetricId::SepSum),
            "SEPMAX" => Ok(MetricId::SepMax),
            "SEPMIN" => Ok(MetricId::SepMin),
            "RANDOM" | "R" => Ok(MetricId::Random),
            other => Err(Error::UnsupportedMetric(other.to_string())),
        }
    }
}

/// Entropy formula variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyKind {
    /// `−Σ_j p_j ln p_j` over the sigmoid confidences directly.
    #[default]
    Plain,
    /// Per-class Bernoulli entropy `−Σ_j [p_j ln p_j + (1−p_j) ln(1−p_j)]`.
    Binary,
}

/// One metric evaluation for one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricScore {
    pub sample_id: SampleId,
    pub metric_id: MetricId,
    pub value: f64,
    pub direction: Direction,
}

/// Best-first sample order under one metric; ties resolved by ascending
/// sample id.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub metric_id: MetricId,
    pub ordered: Vec<SampleId>,
}

/// Σ_j |p_j − 0.5|; minimal values are most informative.
pub fn unc(pred: &Prediction) -> f64 {
    pred.confidences.iter().map(|p| (p - 0.5).abs()).sum()
}

/// Entropy with the default [`EntropyKind::Plain`] formula; maximal values
/// are most informative.
pub fn ent(pred: &Prediction) -> f64 {
    ent_with(pred, EntropyKind::Plain)
}

pub fn ent_with(pred: &Prediction, kind: EntropyKind) -> f64 {
    pred.confidences
        .iter()
        .map(|&p| {
            let p = p.clamp(CONFIDENCE_CLAMP, 1.0 - CONFIDENCE_CLAMP);
            match kind {
                EntropyKind::Plain => -p * p.ln(),
                EntropyKind::Binary => -(p * p.ln() + (1.0 - p) * (1.0 - p).ln()),
            }
        })
        .sum()
}

/// `max_j p_j`; minimal values are most informative.
pub fn mm(pred: &Prediction) -> f64 {
    pred.confidences
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Aggregation over per-class separations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SepAgg {
    Sum,
    Max,
    Min,
}

/// Aggregated foreground–background separation; minimal values are most
/// informative for all three aggregates.
pub fn sep(pred: &Prediction, agg: SepAgg) -> Result<f64> {
    if pred.separations.len() != pred.confidences.len() {
        return Err(Error::UnsupportedMetric(
            "separation metrics need a model with a spatial head".into(),
        ));
    }
    let seps = pred.separations.iter().copied();
    Ok(match agg {
        SepAgg::Sum => seps.sum(),
        SepAgg::Max => seps.fold(f64::NEG_INFINITY, f64::max),
        SepAgg::Min => seps.fold(f64::INFINITY, f64::min),
    })
}

/// Scalar value of a scored metric for one prediction.
pub fn metric_value(pred: &Prediction, metric: MetricId, entropy: EntropyKind) -> Result<f64> {
    match metric {
        MetricId::Unc => Ok(unc(pred)),
        MetricId::Ent => Ok(ent_with(pred, entropy)),
        MetricId::Mm => Ok(mm(pred)),
        MetricId::SepSum => sep(pred, SepAgg::Sum),
        MetricId::SepMax => sep(pred, SepAgg::Max),
        MetricId::SepMin => sep(pred, SepAgg::Min),
        MetricId::Random => Err(Error::UnsupportedMetric(
            "RANDOM carries no per-sample value".into(),
        )),
    }
}

/// All samples' scores under one metric, in input order.
pub fn score_pool(
    preds: &[Prediction],
    metric: MetricId,
    entropy: EntropyKind,
) -> Result<Vec<MetricScore>> {
    let direction = metric
        .direction()
        .ok_or_else(|| Error::UnsupportedMetric("RANDOM carries no per-sample value".into()))?;
    preds
        .iter()
        .map(|pred| {
            Ok(MetricScore {
                sample_id: pred.sample_id,
                metric_id: metric,
                value: metric_value(pred, metric, entropy)?,
                direction,
            })
        })
        .collect()
}

/// Best-first pool order; sorts by direction-adjusted value, ties by
/// ascending sample id. RANDOM is a seeded uniform permutation independent
/// of the input order.
pub fn rank(
    preds: &[Prediction],
    metric: MetricId,
    entropy: EntropyKind,
    seed: u64,
) -> Result<Ranking> {
    if metric == MetricId::Random {
        let ids: Vec<SampleId> = preds.iter().map(|p| p.sample_id).collect();
        return Ok(random_ranking(&ids, seed));
    }
    let direction = metric.direction().expect("scored metric");
    let mut scored: Vec<(f64, SampleId)> = preds
        .iter()
        .map(|pred| Ok((metric_value(pred, metric, entropy)?, pred.sample_id)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| order_by(direction, a, b));
    Ok(Ranking {
        metric_id: metric,
        ordered: scored.into_iter().map(|(_, id)| id).collect(),
    })
}

fn order_by(direction: Direction, a: &(f64, SampleId), b: &(f64, SampleId)) -> std::cmp::Ordering {
    let by_value = match direction {
        Direction::SelectMin => a.0.total_cmp(&b.0),
        Direction::SelectMax => b.0.total_cmp(&a.0),
    };
    by_value.then_with(|| a.1.cmp(&b.1))
}

/// Sorts already-computed values into a best-first id order.
pub fn rank_by_values(values: &[(SampleId, f64)], direction: Direction) -> Vec<SampleId> {
    let mut scored: Vec<(f64, SampleId)> = values.iter().map(|&(id, v)| (v, id)).collect();
    scored.sort_by(|a, b| order_by(direction, a, b));
    scored.into_iter().map(|(_, id)| id).collect()
}

/// Seeded uniform permutation of `ids` (sorted first, so the result does not
/// depend on input order).
pub fn random_ranking(ids: &[SampleId], seed: u64) -> Ranking {
    let mut ids = ids.to_vec();
    ids.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    Ranking {
        metric_id: MetricId::Random,
        ordered: ids,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pred(id: u64, confidences: Vec<f64>, separations: Vec<f64>) -> Prediction {
        let class_scores = confidences.iter().map(|p| (p / (1.0 - p)).ln()).collect();
        Prediction {
            sample_id: SampleId(id),
            confidences,
            separations,
            class_scores,
        }
    }

    fn pred_c(id: u64, confidences: Vec<f64>) -> Prediction {
        let seps = vec![0.0; confidences.len()];
        pred(id, confidences, seps)
    }

    #[test]
    fn unc_anchor_values() {
        assert_eq!(unc(&pred_c(0, vec![0.5, 0.5])), 0.0);
        let eps = 1e-9;
        assert_relative_eq!(
            unc(&pred_c(0, vec![1.0 - eps, eps])),
            1.0,
            max_relative = 1e-6
        );
        assert_relative_eq!(unc(&pred_c(0, vec![0.7, 0.2])), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn ent_anchor_values() {
        assert!(ent(&pred_c(0, vec![1.0])) < 1e-6);
        assert_relative_eq!(
            ent(&pred_c(0, vec![0.5, 0.5])),
            std::f64::consts::LN_2,
            max_relative = 1e-12
        );
        let inv_e = std::f64::consts::E.recip();
        assert_relative_eq!(ent(&pred_c(0, vec![inv_e])), inv_e, max_relative = 1e-12);
    }

    #[test]
    fn ent_binary_variant_counts_both_outcomes() {
        assert_relative_eq!(
            ent_with(&pred_c(0, vec![0.5]), EntropyKind::Binary),
            std::f64::consts::LN_2,
            max_relative = 1e-12
        );
        // Plain form sees only the presence term.
        assert_relative_eq!(
            ent_with(&pred_c(0, vec![0.5]), EntropyKind::Plain),
            0.5 * std::f64::consts::LN_2,
            max_relative = 1e-12
        );
    }

    #[test]
    fn mm_anchor_values() {
        assert_eq!(mm(&pred_c(0, vec![0.9, 0.1])), 0.9);
        assert_eq!(mm(&pred_c(0, vec![0.2, 0.2])), 0.2);
        assert_eq!(
            mm(&pred_c(0, vec![0.3, 0.8, 0.1])),
            mm(&pred_c(0, vec![0.8, 0.1, 0.3]))
        );
    }

    #[test]
    fn sep_aggregates() {
        let p = pred(0, vec![0.5, 0.5], vec![3.0, 1.0]);
        assert_eq!(sep(&p, SepAgg::Sum).unwrap(), 4.0);
        assert_eq!(sep(&p, SepAgg::Max).unwrap(), 3.0);
        assert_eq!(sep(&p, SepAgg::Min).unwrap(), 1.0);

        let zero = pred(0, vec![0.5, 0.5], vec![0.0, 0.0]);
        for agg in [SepAgg::Sum, SepAgg::Max, SepAgg::Min] {
            assert_eq!(sep(&zero, agg).unwrap(), 0.0);
        }
    }

    #[test]
    fn sep_without_separations_is_unsupported() {
        let p = Prediction {
            sample_id: SampleId(0),
            confidences: vec![0.5, 0.5],
            separations: vec![],
            class_scores: vec![0.0, 0.0],
        };
        assert!(matches!(
            sep(&p, SepAgg::Sum),
            Err(Error::UnsupportedMetric(_))
        ));
    }

    #[test]
    fn unc_ranking_orders_ascending_with_id_ties() {
        let preds = vec![
            pred_c(11, vec![0.9]), // unc 0.4
            pred_c(10, vec![0.6]), // unc 0.1
            pred_c(12, vec![0.1]), // unc 0.4, loses tie to 11
        ];
        let ranking = rank(&preds, MetricId::Unc, EntropyKind::Plain, 0).unwrap();
        assert_eq!(
            ranking.ordered,
            vec![SampleId(10), SampleId(11), SampleId(12)]
        );
    }

    #[test]
    fn ent_ranking_takes_maximal_values_first() {
        let preds = vec![pred_c(1, vec![0.99]), pred_c(2, vec![0.5])];
        let ranking = rank(&preds, MetricId::Ent, EntropyKind::Plain, 0).unwrap();
        assert_eq!(ranking.ordered, vec![SampleId(2), SampleId(1)]);
    }

    #[test]
    fn random_ranking_is_seed_deterministic_and_order_independent() {
        let ids: Vec<SampleId> = (0..20).map(SampleId).collect();
        let mut reversed = ids.clone();
        reversed.reverse();
        let a = random_ranking(&ids, 99);
        let b = random_ranking(&reversed, 99);
        assert_eq!(a, b);
        assert_ne!(random_ranking(&ids, 100).ordered, a.ordered);
    }

    #[test]
    fn empty_pool_ranks_empty() {
        let ranking = rank(&[], MetricId::Mm, EntropyKind::Plain, 0).unwrap();
        assert!(ranking.ordered.is_empty());
    }

    #[test]
    fn example_unc_order() {
        // Values {a: 0.1, b: 0.9, c: 0.4} select-min → [a, c, b].
        let ids = [SampleId(1), SampleId(2), SampleId(3)];
        let order = rank_by_values(
            &[(ids[0], 0.1), (ids[1], 0.9), (ids[2], 0.4)],
            Direction::SelectMin,
        );
        assert_eq!(order, vec![ids[0], ids[2], ids[1]]);
    }

    proptest! {
        #[test]
        fn scored_metrics_are_class_permutation_invariant(
            probs in proptest::collection::vec(0.01f64..0.99, 1..8),
            seps in proptest::collection::vec(0.0f64..5.0, 1..8),
            rot in 0usize..8,
        ) {
            let n = probs.len().min(seps.len());
            let probs = &probs[..n];
            let seps = &seps[..n];
            let rot = rot % n;
            let rotate = |v: &[f64]| -> Vec<f64> {
                v.iter().cycle().skip(rot).take(v.len()).copied().collect()
            };
            let base = pred(0, probs.to_vec(), seps.to_vec());
            let turned = pred(0, rotate(probs), rotate(seps));
            prop_assert!((unc(&base) - unc(&turned)).abs() < 1e-12);
            prop_assert!((ent(&base) - ent(&turned)).abs() < 1e-12);
            prop_assert!((mm(&base) - mm(&turned)).abs() < 1e-12);
            for agg in [SepAgg::Sum, SepAgg::Max, SepAgg::Min] {
                prop_assert!((sep(&base, agg).unwrap() - sep(&turned, agg).unwrap()).abs() < 1e-12);
            }
        }

        #[test]
        fn metric_values_respect_their_bounds(
            probs in proptest::collection::vec(0.001f64..0.999, 1..8),
            seps in proptest::collection::vec(0.0f64..5.0, 1..8),
        ) {
            let n = probs.len().min(seps.len());
            let p = pred(0, probs[..n].to_vec(), seps[..n].to_vec());
            prop_assert!(unc(&p) >= 0.0 && unc(&p) <= n as f64 / 2.0);
            prop_assert!(ent(&p) >= 0.0);
            prop_assert!(mm(&p) > 0.0 && mm(&p) < 1.0);
            for agg in [SepAgg::Sum, SepAgg::Max, SepAgg::Min] {
                prop_assert!(sep(&p, agg).unwrap() >= 0.0);
            }
        }

        #[test]
        fn ranking_is_a_permutation_of_the_pool(
            probs in proptest::collection::vec(0.01f64..0.99, 0..12),
        ) {
            let preds: Vec<Prediction> = probs
                .iter()
                .enumerate()
                .map(|(i, &p)| pred_c(i as u64, vec![p]))
                .collect();
            for metric in MetricId::ALL_SCORED {
                let ranking = rank(&preds, metric, EntropyKind::Plain, 0).unwrap();
                let mut ids: Vec<SampleId> = ranking.ordered.clone();
                ids.sort_unstable();
                let expect: Vec<SampleId> = (0..probs.len() as u64).map(SampleId).collect();
                prop_assert_eq!(ids, expect);
            }
        }

        #[test]
        fn argsort_is_invariant_under_monotone_transforms(
            halves in proptest::collection::vec(-20i32..20, 1..12),
            select_max in proptest::bool::ANY,
        ) {
            let direction = if select_max { Direction::SelectMax } else { Direction::SelectMin };
            let values: Vec<(SampleId, f64)> = halves
                .iter()
                .enumerate()
                .map(|(i, &h)| (SampleId(i as u64), h as f64 / 2.0))
                .collect();
            let transformed: Vec<(SampleId, f64)> =
                values.iter().map(|&(id, v)| (id, v.exp())).collect();
            prop_assert_eq!(
                rank_by_values(&values, direction),
                rank_by_values(&transformed, direction)
            );
        }
    }
}
