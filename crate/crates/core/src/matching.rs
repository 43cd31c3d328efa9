//! Exact maximum-weight bipartite matching (Hungarian method with potentials).

use crate::rat::Rat;

/// Maximum-weight matching of a rectangular matrix with nonnegative weights.
///
/// Returns the total weight and, for each row, the matched column. Every row
/// is matched when `rows <= cols` and every column when `cols <= rows`; the
/// zero padding that makes the problem square never shows up in the result.
pub fn max_weight_matching(weights: &[Vec<Rat>]) -> (Rat, Vec<Option<usize>>) {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    debug_assert!(weights.iter().all(|r| r.len() == cols));
    let n = rows.max(cols);
    if n == 0 {
        return (Rat::zero(), vec![None; rows]);
    }
    let zero = Rat::zero();
    // Minimizing cost = -weight on the square, zero-padded matrix; 1-indexed.
    let cost = |i: usize, j: usize| -> Rat {
        if i <= rows && j <= cols {
            -&weights[i - 1][j - 1]
        } else {
            zero.clone()
        }
    };

    let mut u = vec![Rat::zero(); n + 1];
    let mut v = vec![Rat::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv: Vec<Option<Rat>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta: Option<Rat> = None;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - &u[i0] - &v[j];
                if minv[j].as_ref().map_or(true, |m| cur < *m) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let mj = minv[j].as_ref().expect("set above");
                if delta.as_ref().map_or(true, |d| mj < d) {
                    delta = Some(mj.clone());
                    j1 = j;
                }
            }
            let delta = delta.expect("an unused column remains");
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += &delta;
                    v[j] -= &delta;
                } else if let Some(m) = minv[j].as_mut() {
                    *m -= &delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assign = vec![None; rows];
    let mut total = Rat::zero();
    for j in 1..=cols {
        let i = p[j];
        if i >= 1 && i <= rows {
            assign[i - 1] = Some(j - 1);
            total += &weights[i - 1][j - 1];
        }
    }
    (total, assign)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rat>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| Rat::from(x)).collect())
            .collect()
    }

    #[test]
    fn square_instance() {
        let w = m(&[&[7, 5, 11], &[5, 4, 1], &[9, 3, 2]]);
        let (total, assign) = max_weight_matching(&w);
        assert_eq!(total, Rat::from(24));
        assert_eq!(assign, vec![Some(2), Some(1), Some(0)]);
    }

    #[test]
    fn rectangular_instances() {
        let wide = m(&[&[3, 7]]);
        assert_eq!(max_weight_matching(&wide).0, Rat::from(7));
        let tall = m(&[&[3], &[7], &[5]]);
        let (total, assign) = max_weight_matching(&tall);
        assert_eq!(total, Rat::from(7));
        assert_eq!(assign, vec![None, Some(0), None]);
    }

    #[test]
    fn empty_and_fractional() {
        assert_eq!(max_weight_matching(&[]).0, Rat::zero());
        let w = vec![
            vec![Rat::new(1, 2), Rat::new(1, 3)],
            vec![Rat::new(1, 3), Rat::new(1, 7)],
        ];
        assert_eq!(max_weight_matching(&w).0, Rat::new(2, 3));
    }
}
