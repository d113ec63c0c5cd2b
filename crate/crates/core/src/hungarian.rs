//! Minimum-cost perfect assignment on a square integer cost matrix
//! (Kuhn-Munkres with row and column potentials, `O(n^3)`).

/// Returns `assignment` with `assignment[row] = column` minimizing the total
/// cost. Panics if `cost` is not square.
pub fn solve(cost: &[Vec<i128>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    assert!(
        cost.iter().all(|r| r.len() == n),
        "cost matrix must be square"
    );

    // 1-based internals; column 0 is a virtual source.
    let mut u = vec![0i128; n + 1];
    let mut v = vec![0i128; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![i128::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = i128::MAX;
            let mut col1 = 0;
            for c in 1..=n {
                if used[c] {
                    continue;
                }
                let reduced = cost[r - 1][c - 1] - u[r] - v[c];
                if reduced < minv[c] {
                    minv[c] = reduced;
                    way[c] = col0;
                }
                if minv[c] < delta {
                    delta = minv[c];
                    col1 = c;
                }
            }
            for c in 0..=n {
                if used[c] {
                    u[owner[c]] += delta;
                    v[c] -= delta;
                } else {
                    minv[c] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0; n];
    for c in 1..=n {
        assignment[owner[c] - 1] = c - 1;
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(cost: &[Vec<i128>], a: &[usize]) -> i128 {
        a.iter().enumerate().map(|(r, &c)| cost[r][c]).sum()
    }

    #[test]
    fn classic_three_by_three() {
        let cost = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
        let a = solve(&cost);
        assert_eq!(total(&cost, &a), 5);
    }

    #[test]
    fn is_a_permutation() {
        let cost: Vec<Vec<i128>> = (0..6)
            .map(|r| (0..6).map(|c| ((r * 7 + c * 3) % 5) as i128).collect())
            .collect();
        let mut a = solve(&cost);
        a.sort_unstable();
        assert_eq!(a, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn empty_matrix() {
        assert!(solve(&[]).is_empty());
    }
}
