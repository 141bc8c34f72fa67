//! Object-category discovery by clustering predicted active segments.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::similarity::cosine_unchecked;
use crate::{Error, FeatureStream, Result, StateSequence};

/// A maximal run of non-free predicted frames in one video.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub video_id: String,
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub state: usize,
    pub mean: Vec<f64>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Runs of non-free states in a decoded sequence, with their mean features.
pub fn active_segments(decoded: &StateSequence, stream: &FeatureStream) -> Result<Vec<Segment>> {
    if decoded.len() != stream.len() {
        return Err(Error::LengthMismatch {
            expected: stream.len(),
            found: decoded.len(),
        });
    }
    let free = decoded.label_space().free_label_index();
    Ok(decoded
        .runs()
        .into_iter()
        .filter(|&(_, _, s)| s != free)
        .map(|(start, end, state)| Segment {
            video_id: stream.meta().video_id.clone(),
            start,
            end,
            state,
            mean: stream.mean(start, end),
        })
        .collect())
}

/// One agglomeration step: cluster `absorbed` joins `kept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub kept: usize,
    pub absorbed: usize,
    pub similarity: f64,
}

/// Flat clustering at `k` clusters together with the merges that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    k: usize,
    assignment: Vec<usize>,
    merges: Vec<Merge>,
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Cluster id in `0..k` per item, numbered by first appearance.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Member item indices of every cluster.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (item, &c) in self.assignment.iter().enumerate() {
            out[c].push(item);
        }
        out
    }
}

/// Full average-linkage agglomeration over a similarity matrix.
///
/// Returns the merge sequence from `n` singletons down to one cluster. Each
/// step merges the pair with the highest mean pairwise similarity; ties go
/// to the lexicographically smallest `(id, id)` pair. A merged cluster keeps
/// the smaller id.
pub fn average_linkage(similarity: &[f64], n: usize) -> Result<Vec<Merge>> {
    if similarity.len() != n * n {
        return Err(Error::LengthMismatch {
            expected: n * n,
            found: similarity.len(),
        });
    }
    if similarity.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut sim = similarity.to_vec();
    let mut size = vec![1usize; n];
    let mut alive = vec![true; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..n {
            if !alive[a] {
                continue;
            }
            for b in a + 1..n {
                if !alive[b] {
                    continue;
                }
                let s = sim[a * n + b];
                if best.is_none_or(|(_, _, v)| s > v) {
                    best = Some((a, b, s));
                }
            }
        }
        let (a, b, s) = best.expect("at least two live clusters");
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for c in 0..n {
            if alive[c] && c != a && c != b {
                let v = (na * sim[a * n + c] + nb * sim[b * n + c]) / (na + nb);
                sim[a * n + c] = v;
                sim[c * n + a] = v;
            }
        }
        size[a] += size[b];
        alive[b] = false;
        merges.push(Merge {
            kept: a,
            absorbed: b,
            similarity: s,
        });
    }
    Ok(merges)
}

/// Flat clustering obtained by replaying the first `n − k` merges.
pub fn cut(merges: &[Merge], n: usize, k: usize) -> Result<Clustering> {
    if k == 0 || k > n || merges.len() + 1 < n {
        return Err(Error::ClusterCount { k, n });
    }
    let mut root: Vec<usize> = (0..n).collect();
    let applied = &merges[..n - k];
    for m in applied {
        for r in root.iter_mut() {
            if *r == m.absorbed {
                *r = m.kept;
            }
        }
    }
    let mut ids: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    let assignment = root
        .iter()
        .map(|&r| {
            *ids[r].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    Ok(Clustering {
        k,
        assignment,
        merges: applied.to_vec(),
    })
}

/// Pairwise cosine similarities of segment means, row-major.
pub fn similarity_matrix(segments: &[Segment]) -> Result<Vec<f64>> {
    let n = segments.len();
    let dim = segments.first().map_or(0, |s| s.mean.len());
    if let Some(s) = segments.iter().find(|s| s.mean.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: s.mean.len(),
        });
    }
    let mut sim = vec![0.0; n * n];
    for a in 0..n {
        sim[a * n + a] = 1.0;
        for b in a + 1..n {
            let v = cosine_unchecked(&segments[a].mean, &segments[b].mean);
            sim[a * n + b] = v;
            sim[b * n + a] = v;
        }
    }
    Ok(sim)
}

/// Average-linkage clustering of segments by cosine similarity down to `k` clusters.
pub fn hac_cluster(segments: &[Segment], k: usize) -> Result<Clustering> {
    let n = segments.len();
    if k == 0 || k > n {
        return Err(Error::ClusterCount { k, n });
    }
    let merges = average_linkage(&similarity_matrix(segments)?, n)?;
    cut(&merges, n, k)
}

/// Modified purity from the ground-truth labels of each cluster's member frames.
///
/// A cluster whose dominant label (lowest index on ties) is not `free`
/// contributes the number of its frames carrying that label. The sum is
/// divided by the number of true active frames.
pub fn purity_from_labels(
    clusters: &[Vec<usize>],
    labels: usize,
    free: usize,
    true_active: usize,
) -> Result<f64> {
    if true_active == 0 {
        return Err(Error::MetricUndefined("no true active frames"));
    }
    let mut discovered = 0usize;
    let mut counts = vec![0usize; labels];
    for members in clusters {
        counts.iter_mut().for_each(|c| *c = 0);
        for &l in members {
            if l >= labels {
                return Err(Error::InvalidLabel {
                    index: l,
                    count: labels,
                });
            }
            counts[l] += 1;
        }
        if members.is_empty() {
            continue;
        }
        let mut dominant = 0;
        for (l, &c) in counts.iter().enumerate() {
            if c > counts[dominant] {
                dominant = l;
            }
        }
        if dominant != free {
            discovered += counts[dominant];
        }
    }
    Ok(discovered as f64 / true_active as f64)
}

/// Modified purity of a segment clustering against per-video ground truth.
///
/// Every video in `truth` counts toward the denominator, including active
/// frames no segment covers.
pub fn modified_purity(
    clustering: &Clustering,
    segments: &[Segment],
    truth: &[(&str, &StateSequence)],
) -> Result<f64> {
    if clustering.assignment.len() != segments.len() {
        return Err(Error::LengthMismatch {
            expected: segments.len(),
            found: clustering.assignment.len(),
        });
    }
    let space = truth
        .first()
        .map(|(_, s)| s.label_space().clone())
        .ok_or(Error::MetricUndefined("no ground truth"))?;
    let free = space.free_label_index();
    let true_active = truth
        .iter()
        .map(|(_, s)| s.states().iter().filter(|&&l| l != free).count())
        .sum();
    let mut clusters = vec![Vec::new(); clustering.k];
    for (seg, &c) in segments.iter().zip(&clustering.assignment) {
        let (_, seq) = truth
            .iter()
            .find(|(id, _)| *id == seg.video_id)
            .ok_or(Error::MetricUndefined("segment video has no ground truth"))?;
        if seg.end > seq.len() {
            return Err(Error::LengthMismatch {
                expected: seq.len(),
                found: seg.end,
            });
        }
        clusters[c].extend_from_slice(&seq.states()[seg.start..seg.end]);
    }
    purity_from_labels(&clusters, space.len(), free, true_active)
}

/// Modified purity at every `k` in `ks`, sharing one agglomeration.
pub fn purity_curve(
    segments: &[Segment],
    truth: &[(&str, &StateSequence)],
    ks: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let n = segments.len();
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::ClusterCount { k, n });
    }
    let merges = average_linkage(&similarity_matrix(segments)?, n)?;
    ks.iter()
        .map(|&k| Ok((k, modified_purity(&cut(&merges, n, k)?, segments, truth)?)))
        .collect()
}
