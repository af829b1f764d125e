//! Brute-force Euclidean k-nearest-neighbor queries.

use std::cmp::Ordering;

use crate::data::{sq_dist, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

fn by_distance_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// The `k` rows of `points` (row-major, `dim` columns) closest to `query`,
/// ascending by distance with ties broken by lower row index. `exclude` removes
/// one row from consideration (typically the query's own row).
pub fn knn_in(
    points: &[f64],
    dim: usize,
    query: &[f64],
    k: usize,
    exclude: Option<usize>,
) -> Result<Vec<Neighbor>> {
    let n = if dim == 0 { 0 } else { points.len() / dim };
    let eligible = n - usize::from(exclude.is_some_and(|e| e < n));
    if k > eligible {
        return Err(Error::InsufficientNeighbors {
            requested: k,
            available: eligible,
        });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut cand: Vec<(f64, usize)> = points
        .chunks_exact(dim)
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, row)| (sq_dist(row, query), i))
        .collect();
    if k < cand.len() {
        cand.select_nth_unstable_by(k - 1, by_distance_then_index);
        cand.truncate(k);
    }
    cand.sort_unstable_by(by_distance_then_index);
    Ok(cand
        .into_iter()
        .map(|(d2, index)| Neighbor {
            index,
            distance: d2.sqrt(),
        })
        .collect())
}

/// k nearest rows of `data` to an arbitrary query point.
pub fn k_nearest_neighbors(
    data: &Dataset,
    query: &[f64],
    k: usize,
    exclude: Option<usize>,
) -> Result<Vec<Neighbor>> {
    if query.len() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            actual: query.len(),
        });
    }
    knn_in(data.values(), data.dim(), query, k, exclude)
}

/// k nearest neighbors of row `i` among the other rows.
pub fn knn_of_row(data: &Dataset, i: usize, k: usize) -> Result<Vec<Neighbor>> {
    knn_in(data.values(), data.dim(), data.row(i), k, Some(i))
}

/// Distance from `query` to the closest row of `points`; `+inf` when empty.
pub fn nearest_distance(points: &[f64], dim: usize, query: &[f64]) -> f64 {
    points
        .chunks_exact(dim)
        .map(|row| sq_dist(row, query))
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f64]) -> Dataset {
        Dataset::from_points(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn nearest_excluding_self() {
        let d = line(&[0.0, 1.0, 3.0]);
        let nn = knn_of_row(&d, 0, 1).unwrap();
        assert_eq!(nn, vec![Neighbor { index: 1, distance: 1.0 }]);
    }

    #[test]
    fn identity_query_has_zero_distance() {
        let d = line(&[0.0, 1.0, 3.0]);
        let nn = k_nearest_neighbors(&d, &[3.0], 1, None).unwrap();
        assert_eq!(nn[0].index, 2);
        assert_eq!(nn[0].distance, 0.0);
    }

    #[test]
    fn ties_break_by_index() {
        let d = line(&[2.0, 0.0, 2.0, 0.0]);
        let nn = k_nearest_neighbors(&d, &[1.0], 3, None).unwrap();
        let idx: Vec<_> = nn.iter().map(|n| n.index).collect();
        assert_eq!(idx, vec![0, 1, 2]);
    }

    #[test]
    fn too_many_neighbors_is_an_error() {
        let d = line(&[0.0, 1.0]);
        assert!(matches!(
            knn_of_row(&d, 0, 2),
            Err(Error::InsufficientNeighbors { requested: 2, available: 1 })
        ));
    }

    #[test]
    fn matches_full_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40 {
            let n = 1 + trial * 5;
            let dim = 1 + trial % 4;
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| (rng.random::<f64>() * 4.0).round() / 4.0).collect())
                .collect();
            let d = Dataset::from_points(rows).unwrap();
            let q: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let k = 1 + trial % n.max(1);
            let k = k.min(n);
            // oracle: sort every (distance, index) pair
            let mut all: Vec<(f64, usize)> = (0..n)
                .map(|i| {
                    let s: f64 = d.row(i).iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum();
                    (s.sqrt(), i)
                })
                .collect();
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let got = k_nearest_neighbors(&d, &q, k, None).unwrap();
            let want: Vec<usize> = all.iter().take(k).map(|p| p.1).collect();
            assert_eq!(got.iter().map(|n| n.index).collect::<Vec<_>>(), want);
        }
    }
}
