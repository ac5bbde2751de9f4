//! Maximum-weight assignment on a square matrix (Hungarian method with
//! row/column potentials, O(k³)).

/// Returns `(total_weight, column_of_row)` for a maximum-weight perfect
/// matching of the `size × size` row-major `weights` matrix.
pub fn max_weight_assignment(weights: &[i64], size: usize) -> (i64, Vec<usize>) {
    assert_eq!(weights.len(), size * size, "weight matrix is not square");
    if size == 0 {
        return (0, Vec::new());
    }
    // Minimise negated weights. Index 0 is a virtual row/column, so the
    // working arrays are 1-based.
    let cost = |r: usize, c: usize| -weights[(r - 1) * size + (c - 1)];
    let mut u = vec![0i64; size + 1];
    let mut v = vec![0i64; size + 1];
    let mut row_of_col = vec![0usize; size + 1];
    let mut way = vec![0usize; size + 1];

    for row in 1..=size {
        row_of_col[0] = row;
        let mut col0 = 0;
        let mut min_slack = vec![i64::MAX; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[col0] = true;
            let r0 = row_of_col[col0];
            let mut delta = i64::MAX;
            let mut col1 = 0;
            for col in 1..=size {
                if used[col] {
                    continue;
                }
                let reduced = cost(r0, col) - u[r0] - v[col];
                if reduced < min_slack[col] {
                    min_slack[col] = reduced;
                    way[col] = col0;
                }
                if min_slack[col] < delta {
                    delta = min_slack[col];
                    col1 = col;
                }
            }
            for col in 0..=size {
                if used[col] {
                    u[row_of_col[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_slack[col] -= delta;
                }
            }
            col0 = col1;
            if row_of_col[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            row_of_col[col0] = row_of_col[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![0usize; size];
    for col in 1..=size {
        col_of_row[row_of_col[col] - 1] = col - 1;
    }
    let total = col_of_row
        .iter()
        .enumerate()
        .map(|(r, &c)| weights[r * size + c])
        .sum();
    (total, col_of_row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(weights: &[i64], size: usize) -> i64 {
        fn go(weights: &[i64], size: usize, row: usize, used: &mut [bool]) -> i64 {
            if row == size {
                return 0;
            }
            let mut best = i64::MIN;
            for col in 0..size {
                if !used[col] {
                    used[col] = true;
                    let rest = go(weights, size, row + 1, used);
                    used[col] = false;
                    best = best.max(weights[row * size + col] + rest);
                }
            }
            best
        }
        go(weights, size, 0, &mut vec![false; size])
    }

    #[test]
    fn small_cases() {
        assert_eq!(max_weight_assignment(&[], 0).0, 0);
        assert_eq!(max_weight_assignment(&[5], 1), (5, vec![0]));
        let (w, cols) = max_weight_assignment(&[1, 9, 8, 2], 2);
        assert_eq!(w, 17);
        assert_eq!(cols, vec![1, 0]);
    }

    proptest! {
        #[test]
        fn matches_enumeration(size in 1usize..=6, seed in any::<u64>()) {
            let mut state = seed;
            let weights: Vec<i64> = (0..size * size)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((state >> 33) % 20) as i64
                })
                .collect();
            let (total, cols) = max_weight_assignment(&weights, size);
            prop_assert_eq!(total, brute_force(&weights, size));
            let mut seen = cols.clone();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..size).collect::<Vec<_>>());
        }
    }
}
