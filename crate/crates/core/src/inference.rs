//! Exact decoding of the pairwise state model.
//!
//! The score of a state sequence `S` is
//!
//! ```text
//! R(S) = Σ_i u(s_i) + λ Σ_i b(s_i, s_{i+1})
//! ```
//!
//! where the binary term forbids a state change between frames `i` and `i+1`
//! unless `i+1` is a change candidate, and at a candidate boundary is
//! `+sim` when the state is kept and `−sim` when it changes, `sim` being the
//! cosine similarity of the mean features of the two segments meeting there.
//!
//! Candidates cut the stream into segments; since no change can happen inside
//! a segment, maximizing `R` reduces to a chain over segments with `K` states
//! each, solved exactly by dynamic programming in `O(|C|·K²)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::change::CandidateSet;
use crate::classify::argmax;
use crate::similarity::cosine_unchecked;
use crate::{Error, FeatureStream, Result};

/// Decoding input: unary scores, candidate boundaries and boundary similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceProblem {
    len: usize,
    states: usize,
    unary: Vec<f64>,
    boundaries: Vec<usize>,
    similarity: Vec<f64>,
    lambda: f64,
}

impl InferenceProblem {
    /// `unary` is row-major `len × states`. `boundaries` are candidate frames
    /// (a change may occur between `c − 1` and `c`), strictly increasing;
    /// frame 0 is ignored since nothing precedes it. `similarity[k]` belongs
    /// to the `k`-th boundary that is kept.
    pub fn new(
        unary: Vec<f64>,
        states: usize,
        boundaries: &[usize],
        similarity: Vec<f64>,
        lambda: f64,
    ) -> Result<Self> {
        if states == 0 {
            return Err(Error::InvalidParameter(
                "at least one state is required".into(),
            ));
        }
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(Error::NegativeLambda);
        }
        if !unary.len().is_multiple_of(states) {
            return Err(Error::LengthMismatch {
                expected: (unary.len() / states + 1) * states,
                found: unary.len(),
            });
        }
        if unary.iter().chain(&similarity).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let len = unary.len() / states;
        let kept: Vec<usize> = boundaries.iter().copied().filter(|&c| c != 0).collect();
        if kept.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "candidates must be strictly increasing".into(),
            ));
        }
        if let Some(&c) = kept.last() {
            if c >= len {
                return Err(Error::InvalidParameter(
                    "candidate beyond the last frame".into(),
                ));
            }
        }
        if similarity.len() != kept.len() {
            return Err(Error::LengthMismatch {
                expected: kept.len(),
                found: similarity.len(),
            });
        }
        Ok(InferenceProblem {
            len,
            states,
            unary,
            boundaries: kept,
            similarity,
            lambda,
        })
    }

    /// Builds the problem from a feature stream: boundary similarities are the
    /// cosine similarities of adjacent segment means.
    pub fn from_stream(
        unary: Vec<f64>,
        states: usize,
        candidates: &CandidateSet,
        stream: &FeatureStream,
        lambda: f64,
    ) -> Result<Self> {
        if states > 0 && unary.len() != stream.len() * states {
            return Err(Error::LengthMismatch {
                expected: stream.len() * states,
                found: unary.len(),
            });
        }
        let boundaries: Vec<usize> = candidates
            .indices()
            .into_iter()
            .filter(|&c| c != 0)
            .collect();
        let means = segment_features(stream, &boundaries)?;
        let similarity = means
            .windows(2)
            .map(|w| cosine_unchecked(&w[0], &w[1]))
            .collect();
        Self::new(unary, states, &boundaries, similarity, lambda)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn unary(&self, frame: usize, state: usize) -> f64 {
        self.unary[frame * self.states + state]
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn similarity(&self) -> &[f64] {
        &self.similarity
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Segment spans `[start, end)`; consecutive candidates delimit them.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        segment_spans(self.len, &self.boundaries)
    }
}

fn segment_spans(len: usize, boundaries: &[usize]) -> Vec<(usize, usize)> {
    let mut cuts = vec![0];
    cuts.extend(boundaries.iter().copied().filter(|&c| c != 0));
    cuts.push(len);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Mean feature of every segment between consecutive candidates.
pub fn segment_features(stream: &FeatureStream, candidates: &[usize]) -> Result<Vec<Vec<f64>>> {
    let kept: Vec<usize> = candidates.iter().copied().filter(|&c| c != 0).collect();
    if kept.windows(2).any(|w| w[0] >= w[1]) || kept.last().is_some_and(|&c| c >= stream.len()) {
        return Err(Error::InvalidParameter(
            "candidates must be strictly increasing and inside the stream".into(),
        ));
    }
    if stream.is_empty() {
        return Ok(Vec::new());
    }
    Ok(segment_spans(stream.len(), &kept)
        .into_iter()
        .map(|(a, b)| stream.mean(a, b))
        .collect())
}

/// State sequence maximizing `R(S)`.
///
/// Among optimal sequences the decoder prefers the lower state index at each
/// segment, scanning from the last segment backwards.
pub fn decode(problem: &InferenceProblem) -> Result<Vec<usize>> {
    if problem.len == 0 {
        return Ok(Vec::new());
    }
    let k = problem.states;
    let segments = problem.segments();
    let seg_unary: Vec<Vec<f64>> = segments
        .iter()
        .map(|&(a, b)| {
            (0..k)
                .map(|s| (a..b).map(|i| problem.unary(i, s)).sum())
                .collect()
        })
        .collect();

    let mut value = seg_unary[0].clone();
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(segments.len());
    back.push(vec![0; k]);
    for (seg, unary) in seg_unary.iter().enumerate().skip(1) {
        let reward = problem.lambda * problem.similarity[seg - 1];
        let mut next = vec![0.0; k];
        let mut from = vec![0; k];
        for s in 0..k {
            let mut best = 0;
            let mut best_v = f64::NEG_INFINITY;
            for (p, &v) in value.iter().enumerate() {
                let cand = v + if p == s { reward } else { -reward };
                if cand > best_v {
                    best_v = cand;
                    best = p;
                }
            }
            next[s] = best_v + unary[s];
            from[s] = best;
        }
        value = next;
        back.push(from);
    }

    let mut seg_states = vec![0; segments.len()];
    let mut s = argmax(&value);
    for seg in (0..segments.len()).rev() {
        seg_states[seg] = s;
        s = back[seg][s];
    }
    let mut out = Vec::with_capacity(problem.len);
    for (&(a, b), &s) in segments.iter().zip(&seg_states) {
        out.extend(core::iter::repeat_n(s, b - a));
    }
    Ok(out)
}

/// `R(S)` evaluated frame by frame; `−∞` when `S` changes state off-candidate.
pub fn score_sequence(problem: &InferenceProblem, states: &[usize]) -> Result<f64> {
    if states.len() != problem.len {
        return Err(Error::LengthMismatch {
            expected: problem.len,
            found: states.len(),
        });
    }
    if let Some(&index) = states.iter().find(|&&s| s >= problem.states) {
        return Err(Error::InvalidLabel {
            index,
            count: problem.states,
        });
    }
    let mut unary = 0.0;
    for (i, &s) in states.iter().enumerate() {
        unary += problem.unary(i, s);
    }
    let mut binary = 0.0;
    let mut next_boundary = 0;
    for i in 0..problem.len.saturating_sub(1) {
        let at_candidate = problem.boundaries.get(next_boundary) == Some(&(i + 1));
        let same = states[i] == states[i + 1];
        if at_candidate {
            let sim = problem.similarity[next_boundary];
            binary += if same { sim } else { -sim };
            next_boundary += 1;
        } else if !same {
            return Ok(f64::NEG_INFINITY);
        }
    }
    Ok(unary + problem.lambda * binary)
}
