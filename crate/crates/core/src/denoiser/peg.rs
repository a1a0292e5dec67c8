use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LdpcCode;
use crate::error::{Error, Result};

/// Regular `(dv, dc)` code by progressive edge growth: each new edge goes to
/// the lowest-degree check that is farthest from the variable in the current
/// graph, which avoids short cycles where possible. Ties are broken by a
/// seeded generator, so a seed identifies the code.
pub fn peg_regular(n: usize, dv: usize, dc: usize, seed: u64) -> Result<LdpcCode> {
    if dv == 0 || dc == 0 || n == 0 || !(n * dv).is_multiple_of(dc) {
        return Err(Error::InvalidArgument(format!(
            "no regular ({dv}, {dc}) graph with {n} variables"
        )));
    }
    let m = n * dv / dc;
    if dv > m {
        return Err(Error::InvalidArgument(format!("variable degree {dv} exceeds {m} checks")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut var_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(dv); n];
    let mut check_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(dc); m];
    let mut seen_check = vec![usize::MAX; m];
    let mut seen_var = vec![usize::MAX; n];
    let mut stamp = 0usize;

    for j in 0..n {
        for _ in 0..dv {
            let open = |c: usize, check_adj: &[Vec<usize>], var_adj: &[Vec<usize>]| {
                check_adj[c].len() < dc && !var_adj[j].contains(&c)
            };
            let candidates: Vec<usize> = if var_adj[j].is_empty() {
                (0..m).filter(|&c| open(c, &check_adj, &var_adj)).collect()
            } else {
                // Breadth-first layers of checks reachable from j.
                stamp += 1;
                let mut queue = VecDeque::from([j]);
                seen_var[j] = stamp;
                let mut previous: Vec<usize> = Vec::new();
                loop {
                    let mut next = VecDeque::new();
                    let mut grew = false;
                    while let Some(v) = queue.pop_front() {
                        for &c in &var_adj[v] {
                            if seen_check[c] == stamp {
                                continue;
                            }
                            seen_check[c] = stamp;
                            grew = true;
                            for &u in &check_adj[c] {
                                if seen_var[u] != stamp {
                                    seen_var[u] = stamp;
                                    next.push_back(u);
                                }
                            }
                        }
                    }
                    let unreached: Vec<usize> = (0..m)
                        .filter(|&c| seen_check[c] != stamp && open(c, &check_adj, &var_adj))
                        .collect();
                    if unreached.is_empty() {
                        break previous;
                    }
                    if !grew || next.is_empty() {
                        break unreached;
                    }
                    previous = unreached;
                    queue = next;
                }
            };
            let candidates = if candidates.is_empty() {
                (0..m).filter(|&c| open(c, &check_adj, &var_adj)).collect()
            } else {
                candidates
            };
            let Some(min_deg) = candidates.iter().map(|&c| check_adj[c].len()).min() else {
                return Err(Error::InvalidArgument(format!(
                    "edge growth stalled at variable {j}; try another seed"
                )));
            };
            let best: Vec<usize> = candidates
                .into_iter()
                .filter(|&c| check_adj[c].len() == min_deg)
                .collect();
            let c = best[rng.random_range(0..best.len())];
            var_adj[j].push(c);
            check_adj[c].push(j);
        }
    }
    LdpcCode::from_checks(n, check_adj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_and_free_of_four_cycles() {
        let code = peg_regular(128, 3, 6, 0).unwrap();
        assert_eq!(code.num_checks(), 64);
        assert!(code.checks().iter().all(|c| c.len() == 6));
        assert!(code.var_checks().iter().all(|c| c.len() == 3));
        assert!(code.girth().unwrap() >= 6, "girth {:?}", code.girth());
        assert!(code.k() >= 64, "k {}", code.k());
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(peg_regular(64, 3, 6, 9).unwrap(), peg_regular(64, 3, 6, 9).unwrap());
        assert_ne!(peg_regular(64, 3, 6, 9).unwrap(), peg_regular(64, 3, 6, 10).unwrap());
    }

    #[test]
    fn rejects_impossible_shapes() {
        assert!(peg_regular(7, 3, 6, 0).is_err());
        assert!(peg_regular(2, 3, 6, 0).is_err());
    }
}
