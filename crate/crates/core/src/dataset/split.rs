use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// One cross-validation split over labeled row indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified `folds`-way split of labeled rows.
///
/// Fold sizes differ by at most one, larger folds first. Class `c` gets
/// `floor` or `ceil` of `count_c * size_f / n` rows in fold `f`, so its share
/// of every fold is within one sample of its global share. Members are drawn
/// from a per-class shuffle.
pub fn stratified_folds(
    labels: &[usize],
    n_classes: usize,
    folds: usize,
    seed: u64,
) -> Result<Vec<Fold>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= n_classes {
            return Err(Error::InvalidLabel {
                label: l,
                n_classes,
            });
        }
        by_class[l].push(i);
    }
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < folds {
            return Err(Error::ClassTooSmall {
                class,
                count: members.len(),
                required: folds,
            });
        }
    }

    let n = labels.len();
    let sizes: Vec<usize> = (0..folds)
        .map(|f| n / folds + usize::from(f < n % folds))
        .collect();
    let counts: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let table = apportion(&counts, &sizes);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; n];
    for (members, row) in by_class.iter_mut().zip(&table) {
        members.shuffle(&mut rng);
        let mut next = members.iter();
        for (f, &take) in row.iter().enumerate() {
            for &i in next.by_ref().take(take) {
                assignment[i] = f;
            }
        }
    }

    Ok((0..folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..labels.len()).partition(|&i| assignment[i] == f);
            Fold { train, test }
        })
        .collect())
}

/// Integer table with row sums `counts` and column sums `sizes` whose cells are
/// `floor` or `ceil` of `counts[c] * sizes[f] / n`.
///
/// The fractional parts are placed by a unit-capacity bipartite flow; the
/// unrounded table is a feasible fractional flow, so an integral one exists.
fn apportion(counts: &[usize], sizes: &[usize]) -> Vec<Vec<usize>> {
    let n: usize = counts.iter().sum();
    let mut table: Vec<Vec<usize>> = counts
        .iter()
        .map(|&k| sizes.iter().map(|&s| k * s / n).collect())
        .collect();
    let open: Vec<Vec<bool>> = counts
        .iter()
        .map(|&k| sizes.iter().map(|&s| (k * s) % n != 0).collect())
        .collect();
    let mut row_need: Vec<usize> = counts
        .iter()
        .zip(&table)
        .map(|(&k, row)| k - row.iter().sum::<usize>())
        .collect();
    let mut col_need: Vec<usize> = (0..sizes.len())
        .map(|f| sizes[f] - table.iter().map(|row| row[f]).sum::<usize>())
        .collect();
    // extra[c][f]: whether cell (c, f) is rounded up
    let mut extra = vec![vec![false; sizes.len()]; counts.len()];
    while let Some(start) = row_need.iter().position(|&r| r > 0) {
        let path = augmenting_path(start, &open, &extra, &col_need)
            .expect("fractional apportionment always admits an integral rounding");
        for &(c, f, up) in &path {
            extra[c][f] = up;
        }
        row_need[start] -= 1;
        let (_, last, _) = path[path.len() - 1];
        col_need[last] -= 1;
    }
    for (row, ups) in table.iter_mut().zip(&extra) {
        for (cell, &up) in row.iter_mut().zip(ups) {
            *cell += usize::from(up);
        }
    }
    table
}

/// Breadth-first search from row `start` to a column with remaining demand,
/// alternating unused open cells (forward) and used cells (backward).
/// Returns the cells to flip as `(row, column, new value)`.
fn augmenting_path(
    start: usize,
    open: &[Vec<bool>],
    extra: &[Vec<bool>],
    col_need: &[usize],
) -> Option<Vec<(usize, usize, bool)>> {
    let cols = col_need.len();
    let mut row_seen = vec![false; open.len()];
    // col_from[f]: row that reached column f
    let mut col_from: Vec<Option<usize>> = vec![None; cols];
    // row_from[c]: column whose used cell led back to row c
    let mut row_from: Vec<Option<usize>> = vec![None; open.len()];
    let mut queue = std::collections::VecDeque::from([start]);
    row_seen[start] = true;
    while let Some(c) = queue.pop_front() {
        for f in 0..cols {
            if !open[c][f] || extra[c][f] || col_from[f].is_some() {
                continue;
            }
            col_from[f] = Some(c);
            if col_need[f] > 0 {
                let mut path = Vec::new();
                let mut col = f;
                loop {
                    let row = col_from[col].expect("visited column has a parent");
                    path.push((row, col, true));
                    match row_from[row] {
                        Some(back) => {
                            path.push((row, back, false));
                            col = back;
                        }
                        None => break,
                    }
                }
                path.reverse();
                return Some(path);
            }
            for (r, ups) in extra.iter().enumerate() {
                if ups[f] && !row_seen[r] {
                    row_seen[r] = true;
                    row_from[r] = Some(f);
                    queue.push_back(r);
                }
            }
        }
    }
    None
}

/// Unique rows in first-occurrence order with their multiplicities.
pub fn deduplicate(features: &DMatrix<f64>) -> (DMatrix<f64>, Vec<usize>) {
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut order = Vec::new();
    let mut counts = Vec::new();
    for r in 0..features.nrows() {
        // +0.0 and -0.0 compare equal as features
        let key: Vec<u64> = features
            .row(r)
            .iter()
            .map(|&v| if v == 0.0 { 0 } else { v.to_bits() })
            .collect();
        match seen.get(&key) {
            Some(&u) => counts[u] += 1,
            None => {
                seen.insert(key, order.len());
                order.push(r);
                counts.push(1);
            }
        }
    }
    (super::select_rows(features, &order), counts)
}
