//! Zooming grid search over a small box.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::scalar::Scalar;

/// Settings for [`maximize_on_box`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSearch<T> {
    /// Grid points per axis, in every round.
    pub points: usize,
    /// Zoom rounds after the coarse pass.
    pub rounds: usize,
    /// Each round's box width as a fraction of the previous one.
    pub zoom: T,
    /// Incumbents zoomed into each round.
    pub keep: usize,
    /// Values closer than this are ties; the point scanned first wins.
    pub tie_tol: T,
}

/// A grid point and its objective value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated<T, const K: usize> {
    pub point: [T; K],
    pub value: T,
}

impl<T: Scalar, const K: usize> Evaluated<T, K> {
    /// `Less` when `self` is preferred: higher value, or a tie with the
    /// lexicographically smaller point.
    pub fn preference(&self, other: &Self, tie_tol: T) -> Ordering {
        if self.value > other.value + tie_tol {
            Ordering::Less
        } else if other.value > self.value + tie_tol {
            Ordering::Greater
        } else {
            lex_cmp(&self.point, &other.point)
        }
    }
}

pub(crate) fn lex_cmp<T: Scalar, const K: usize>(a: &[T; K], b: &[T; K]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

fn axis<T: Scalar>(lo: T, hi: T, n: usize, i: usize) -> T {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * T::of(i as f64) / T::of((n - 1) as f64)
    }
}

/// Points of a regular `n^K` grid, first coordinate varying slowest.
fn grid_points<T: Scalar, const K: usize>(bounds: &[(T, T); K], n: usize) -> Vec<[T; K]> {
    let total = n.pow(K as u32);
    (0..total)
        .map(|mut flat| {
            let mut point = [T::zero(); K];
            for d in (0..K).rev() {
                let i = flat % n;
                flat /= n;
                point[d] = if bounds[d].0 == bounds[d].1 {
                    bounds[d].0
                } else {
                    axis(bounds[d].0, bounds[d].1, n, i)
                };
            }
            point
        })
        .collect()
}

/// Maximizes `objective` over the box `bounds`.
///
/// A coarse grid is laid over the box; each following round re-grids boxes
/// `zoom` times as wide centred on the `keep` best points seen so far
/// (clipped to the original box). Scan order is round by round, box by box,
/// and lexicographic within a box; a later point displaces an earlier one
/// only when it is better by more than `tie_tol`. Evaluations may run in
/// parallel but the reduction follows scan order, so results are
/// deterministic.
pub fn maximize_on_box<T, F, const K: usize>(objective: F, bounds: [(T, T); K], cfg: &GridSearch<T>) -> Evaluated<T, K>
where
    T: Scalar,
    F: Fn([T; K]) -> T + Sync,
{
    assert!(K >= 1 && cfg.points >= 2 && cfg.keep >= 1);
    let mut width = [T::zero(); K];
    for d in 0..K {
        width[d] = bounds[d].1 - bounds[d].0;
    }
    let mut boxes = vec![bounds];
    let mut elite: Vec<Evaluated<T, K>> = Vec::with_capacity(cfg.keep + 1);

    for round in 0..=cfg.rounds {
        let points: Vec<[T; K]> = boxes.iter().flat_map(|b| grid_points(b, cfg.points)).collect();
        let values: Vec<T> = points
            .par_iter()
            .map(|&pt| {
                let v = objective(pt);
                if v.is_nan() {
                    T::neg_infinity()
                } else {
                    v
                }
            })
            .collect();
        for (point, value) in points.into_iter().zip(values) {
            admit(&mut elite, Evaluated { point, value }, cfg);
        }
        if round == cfg.rounds {
            break;
        }
        for d in 0..K {
            width[d] = width[d] * cfg.zoom;
        }
        let half = width.map(|w| w / T::two());
        boxes = elite
            .iter()
            .map(|e| {
                let mut b = bounds;
                for d in 0..K {
                    b[d] = (
                        (e.point[d] - half[d]).max(bounds[d].0),
                        (e.point[d] + half[d]).min(bounds[d].1),
                    );
                }
                b
            })
            .collect();
    }
    elite[0]
}

/// Inserts `cand` into the elite list, keeping at most `cfg.keep` distinct
/// points. A newcomer must beat an incumbent by more than the tie tolerance to
/// rank above it, so among ties the earliest point in scan order stays first.
fn admit<T: Scalar, const K: usize>(elite: &mut Vec<Evaluated<T, K>>, cand: Evaluated<T, K>, cfg: &GridSearch<T>) {
    if elite.iter().any(|e| e.point == cand.point) {
        return;
    }
    let pos = elite
        .iter()
        .position(|e| cand.value > e.value + cfg.tie_tol)
        .unwrap_or(elite.len());
    if pos < cfg.keep {
        elite.insert(pos, cand);
        elite.truncate(cfg.keep);
    }
}
