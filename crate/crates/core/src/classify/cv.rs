//! Grid search of (C, d, λ) by k-fold cross-validation split by video.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{train, LinearModel, TrainConfig};
use crate::change::{detect_candidates, train_change_model, CandidateSet, ChangeParams};
use crate::eval::accuracy;
use crate::inference::{decode, InferenceProblem};
use crate::{Error, FeatureStream, Result, StateSequence};

/// One training video with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVideo {
    pub stream: FeatureStream,
    pub truth: StateSequence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    pub c: f64,
    pub d: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValPlan {
    pub folds: usize,
    pub c_grid: Vec<f64>,
    pub d_grid: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for CrossValPlan {
    fn default() -> Self {
        CrossValPlan {
            folds: 5,
            c_grid: vec![0.01, 0.1, 1.0, 10.0],
            d_grid: vec![3, 6, 9, 12],
            lambda_grid: vec![0.1, 0.3, 1.0, 3.0, 10.0],
            epochs: TrainConfig::default().epochs,
            seed: 0,
        }
    }
}

/// Mean validation accuracy of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvCell {
    pub params: Hyperparameters,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub chosen: Hyperparameters,
    /// Every cell, ordered by C, then d, then λ.
    pub table: Vec<CvCell>,
}

/// Chooses (C, d, λ) maximizing mean per-fold accuracy of the full model.
///
/// Videos are shuffled with the plan's seed and dealt round-robin into folds.
/// The state and change models of a cell share its C. Ties go to the smaller
/// C, then the smaller d, then the smaller λ.
pub fn cross_validate(videos: &[LabeledVideo], plan: &CrossValPlan) -> Result<CvOutcome> {
    if plan.folds < 2 {
        return Err(Error::InvalidParameter(
            "cross-validation needs at least 2 folds".into(),
        ));
    }
    if videos.len() < plan.folds {
        return Err(Error::NotEnoughVideos {
            needed: plan.folds,
            found: videos.len(),
        });
    }
    if plan.c_grid.is_empty() || plan.d_grid.is_empty() || plan.lambda_grid.is_empty() {
        return Err(Error::InvalidParameter("empty hyperparameter grid".into()));
    }
    if plan.d_grid.contains(&0) {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    if plan.lambda_grid.iter().any(|&l| l.is_nan() || l < 0.0) {
        return Err(Error::NegativeLambda);
    }
    let mut c_grid = plan.c_grid.clone();
    let mut d_grid = plan.d_grid.clone();
    let mut lambda_grid = plan.lambda_grid.clone();
    sort_dedup(&mut c_grid);
    d_grid.sort_unstable();
    d_grid.dedup();
    sort_dedup(&mut lambda_grid);

    let mut order: Vec<usize> = (0..videos.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(plan.seed));
    let mut fold_of = vec![0; videos.len()];
    for (pos, &v) in order.iter().enumerate() {
        fold_of[v] = pos % plan.folds;
    }

    let cells = c_grid.len() * d_grid.len() * lambda_grid.len();
    let mut sums = vec![0.0; cells];
    for fold in 0..plan.folds {
        let train_set: Vec<(&FeatureStream, &StateSequence)> = videos
            .iter()
            .zip(&fold_of)
            .filter(|(_, &f)| f != fold)
            .map(|(v, _)| (&v.stream, &v.truth))
            .collect();
        let held_out: Vec<&LabeledVideo> = videos
            .iter()
            .zip(&fold_of)
            .filter(|(_, &f)| f == fold)
            .map(|(v, _)| v)
            .collect();
        for (ci, &c) in c_grid.iter().enumerate() {
            let config = TrainConfig {
                c,
                epochs: plan.epochs,
                seed: plan.seed,
            };
            let state_model = train(&train_set, &config)?;
            let unaries = held_out
                .iter()
                .map(|v| state_model.score_stream(&v.stream))
                .collect::<Result<Vec<_>>>()?;
            for (di, &d) in d_grid.iter().enumerate() {
                let params = ChangeParams::new(d);
                let change_model = match train_change_model(&train_set, &params, &config) {
                    Ok(m) => Some(m),
                    Err(Error::SingleClass) => None,
                    Err(e) => return Err(e),
                };
                let candidates = held_out
                    .iter()
                    .map(|v| candidates_for(&v.stream, change_model.as_ref(), &params))
                    .collect::<Result<Vec<_>>>()?;
                for (li, &lambda) in lambda_grid.iter().enumerate() {
                    let (mut correct, mut total) = (0.0, 0.0);
                    for ((v, unary), cands) in held_out.iter().zip(&unaries).zip(&candidates) {
                        let problem = InferenceProblem::from_stream(
                            unary.clone(),
                            state_model.classes(),
                            cands,
                            &v.stream,
                            lambda,
                        )?;
                        let pred =
                            StateSequence::new(v.truth.label_space().clone(), decode(&problem)?)?;
                        let n = v.truth.len() as f64;
                        correct += accuracy(&pred, &v.truth)? * n;
                        total += n;
                    }
                    let fold_acc = if total > 0.0 { correct / total } else { 0.0 };
                    sums[(ci * d_grid.len() + di) * lambda_grid.len() + li] += fold_acc;
                }
            }
        }
    }

    let mut table = Vec::with_capacity(cells);
    for &c in &c_grid {
        for &d in &d_grid {
            for &lambda in &lambda_grid {
                let score = sums[table.len()] / plan.folds as f64;
                table.push(CvCell {
                    params: Hyperparameters { c, d, lambda },
                    score,
                });
            }
        }
    }
    Ok(CvOutcome {
        chosen: select_cell(&table).expect("grid is not empty"),
        table,
    })
}

/// Highest-scoring cell; ties go to the smaller C, then d, then λ.
pub fn select_cell(table: &[CvCell]) -> Option<Hyperparameters> {
    let key = |p: &Hyperparameters| (p.c, p.d, p.lambda);
    let mut best: Option<&CvCell> = None;
    for cell in table {
        best = match best {
            None => Some(cell),
            Some(b) if cell.score > b.score => Some(cell),
            Some(b)
                if cell.score == b.score
                    && key(&cell.params).partial_cmp(&key(&b.params))
                        == Some(core::cmp::Ordering::Less) =>
            {
                Some(cell)
            }
            keep => keep,
        };
    }
    best.map(|c| c.params)
}

fn candidates_for(
    stream: &FeatureStream,
    model: Option<&LinearModel>,
    params: &ChangeParams,
) -> Result<CandidateSet> {
    match model {
        Some(m) => detect_candidates(stream, m, params),
        None => Ok(CandidateSet::default()),
    }
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite grid values"));
    v.dedup();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(c: f64, d: usize, lambda: f64, score: f64) -> CvCell {
        CvCell {
            params: Hyperparameters { c, d, lambda },
            score,
        }
    }

    #[test]
    fn equal_scores_pick_smallest_parameters() {
        let plan = CrossValPlan::default();
        let mut table = Vec::new();
        for &c in plan.c_grid.iter().rev() {
            for &d in plan.d_grid.iter().rev() {
                for &l in plan.lambda_grid.iter().rev() {
                    table.push(cell(c, d, l, 0.5));
                }
            }
        }
        let chosen = select_cell(&table).unwrap();
        assert_eq!((chosen.c, chosen.d, chosen.lambda), (0.01, 3, 0.1));
    }

    #[test]
    fn best_score_wins_then_order() {
        let table = [
            cell(0.01, 3, 0.1, 0.7),
            cell(1.0, 9, 3.0, 0.9),
            cell(0.1, 12, 10.0, 0.9),
            cell(0.1, 6, 10.0, 0.9),
        ];
        let chosen = select_cell(&table).unwrap();
        assert_eq!((chosen.c, chosen.d, chosen.lambda), (0.1, 6, 10.0));
        assert_eq!(select_cell(&[]), None);
    }
}
