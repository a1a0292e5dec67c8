use crate::error::{Error, Result};

/// Binary LDPC code given by its parity checks, with a systematic encoder
/// obtained by Gaussian elimination over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdpcCode {
    n: usize,
    k: usize,
    checks: Vec<Vec<usize>>,
    var_checks: Vec<Vec<usize>>,
    redundant_checks: Vec<usize>,
    column_permutation: Vec<usize>,
    /// Reduced rows keyed by their pivot (parity) position.
    parity_rows: Vec<(usize, Vec<u64>)>,
}

impl LdpcCode {
    /// Builds a code from 0-indexed check neighbourhoods.
    pub fn from_checks(n: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("code length must be positive".into()));
        }
        let mut var_checks = vec![Vec::new(); n];
        let mut checks = checks;
        for (c, vars) in checks.iter_mut().enumerate() {
            vars.sort_unstable();
            if vars.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidArgument(format!("check {c} lists a variable twice")));
            }
            for &v in vars.iter() {
                if v >= n {
                    return Err(Error::InvalidArgument(format!(
                        "check {c} references variable {v} outside 0..{n}"
                    )));
                }
                var_checks[v].push(c);
            }
        }
        let echelon = Echelon::reduce(n, &checks);
        let mut is_pivot = vec![false; n];
        for &p in &echelon.pivots {
            is_pivot[p] = true;
        }
        let mut column_permutation: Vec<usize> = (0..n).filter(|&j| !is_pivot[j]).collect();
        column_permutation.extend((0..n).filter(|&j| is_pivot[j]));
        Ok(Self {
            n,
            k: n - echelon.pivots.len(),
            checks,
            var_checks,
            redundant_checks: echelon.redundant,
            column_permutation,
            parity_rows: echelon.pivots.iter().copied().zip(echelon.rows).collect(),
        })
    }

    /// A code without checks: every word is a codeword.
    pub fn uncoded(n: usize) -> Result<Self> {
        Self::from_checks(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Number of parity checks, including redundant ones.
    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    /// Checks incident to each variable, ascending.
    pub fn var_checks(&self) -> &[Vec<usize>] {
        &self.var_checks
    }

    /// Checks dropped as linearly dependent during elimination.
    pub fn redundant_checks(&self) -> &[usize] {
        &self.redundant_checks
    }

    pub fn rank(&self) -> usize {
        self.n - self.k
    }

    pub fn num_edges(&self) -> usize {
        self.checks.iter().map(Vec::len).sum()
    }

    /// Codeword positions in systematic order: the `k` information positions
    /// first, then the parity positions.
    pub fn column_permutation(&self) -> &[usize] {
        &self.column_permutation
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.column_permutation[..self.k]
    }

    /// Encodes `k` information bits (each 0 or 1).
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found: info.len(),
            });
        }
        let mut word = vec![0u64; self.n.div_ceil(64)];
        for (&pos, &bit) in self.info_positions().iter().zip(info) {
            if bit & 1 == 1 {
                word[pos / 64] |= 1 << (pos % 64);
            }
        }
        let mut out = vec![0u8; self.n];
        for (&pos, &bit) in self.info_positions().iter().zip(info) {
            out[pos] = bit & 1;
        }
        for (pivot, row) in &self.parity_rows {
            let ones: u32 = row.iter().zip(&word).map(|(a, b)| (a & b).count_ones()).sum();
            out[*pivot] = (ones & 1) as u8;
        }
        Ok(out)
    }

    /// Reads the information bits back out of a codeword.
    pub fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_positions().iter().map(|&p| codeword[p]).collect()
    }

    /// Parity of every check for a hard-decision word.
    pub fn syndrome(&self, bits: &[u8]) -> Vec<u8> {
        self.checks
            .iter()
            .map(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1)))
            .collect()
    }

    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        bits.len() == self.n && self.syndrome(bits).iter().all(|&s| s == 0)
    }

    /// Length of the shortest cycle in the Tanner graph, `None` if acyclic.
    pub fn girth(&self) -> Option<usize> {
        let total = self.n + self.checks.len();
        let neighbours = |node: usize| -> &[usize] {
            if node < self.n {
                &self.var_checks[node]
            } else {
                &self.checks[node - self.n]
            }
        };
        let mut best: Option<usize> = None;
        let mut dist = vec![usize::MAX; total];
        let mut parent = vec![usize::MAX; total];
        let mut queue = std::collections::VecDeque::new();
        for start in 0..self.n {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[start] = 0;
            parent[start] = usize::MAX;
            queue.clear();
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                if best.is_some_and(|b| 2 * dist[u] + 1 >= b) {
                    break;
                }
                for &raw in neighbours(u) {
                    let w = if u < self.n { raw + self.n } else { raw };
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        queue.push_back(w);
                    } else if parent[u] != w {
                        let cycle = dist[u] + dist[w] + 1;
                        best = Some(best.map_or(cycle, |b| b.min(cycle)));
                    }
                }
            }
        }
        best
    }
}

/// Reduced row echelon form of the parity-check matrix.
struct Echelon {
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
    redundant: Vec<usize>,
}

impl Echelon {
    fn reduce(n: usize, checks: &[Vec<usize>]) -> Self {
        let words = n.div_ceil(64);
        let mut rows: Vec<(usize, Vec<u64>)> = checks
            .iter()
            .enumerate()
            .map(|(c, vars)| {
                let mut row = vec![0u64; words];
                for &v in vars {
                    row[v / 64] ^= 1 << (v % 64);
                }
                (c, row)
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        // Pivots are taken from the right so information bits lead the word.
        for col in (0..n).rev() {
            let (w, bit) = (col / 64, 1u64 << (col % 64));
            let Some(found) = (rank..rows.len()).find(|&r| rows[r].1[w] & bit != 0) else {
                continue;
            };
            rows.swap(rank, found);
            let pivot_row = rows[rank].1.clone();
            for (r, (_, row)) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & bit != 0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        let mut redundant: Vec<usize> = rows[rank..].iter().map(|(c, _)| *c).collect();
        redundant.sort_unstable();
        rows.truncate(rank);
        Self {
            rows: rows.into_iter().map(|(_, row)| row).collect(),
            pivots,
            redundant,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming74() -> LdpcCode {
        LdpcCode::from_checks(7, vec![vec![0, 1, 2, 4], vec![0, 1, 3, 5], vec![0, 2, 3, 6]]).unwrap()
    }

    #[test]
    fn single_parity_check_encodes_by_hand() {
        let code = LdpcCode::from_checks(3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!((code.n(), code.k()), (3, 2));
        assert_eq!(code.encode(&[1, 0]).unwrap(), vec![1, 0, 1]);
        assert_eq!(code.encode(&[0, 0]).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn hamming_all_messages_are_codewords() {
        let code = hamming74();
        assert_eq!(code.k(), 4);
        assert!(code.redundant_checks().is_empty());
        let mut seen = std::collections::HashSet::new();
        for m in 0u8..16 {
            let info: Vec<u8> = (0..4).map(|i| (m >> i) & 1).collect();
            let c = code.encode(&info).unwrap();
            assert!(code.is_codeword(&c));
            assert_eq!(code.extract_info(&c), info);
            seen.insert(c);
        }
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let code = LdpcCode::from_checks(4, vec![vec![0, 1], vec![1, 2], vec![0, 2], vec![2, 3]]).unwrap();
        assert_eq!(code.rank(), 3);
        assert_eq!(code.k(), 1);
        assert_eq!(code.redundant_checks().len(), 1);
        let c = code.encode(&[1]).unwrap();
        assert_eq!(c, vec![1, 1, 1, 1]);
    }

    #[test]
    fn uncoded_has_full_rate() {
        let code = LdpcCode::uncoded(5).unwrap();
        assert_eq!(code.k(), 5);
        assert_eq!(code.encode(&[1, 0, 1, 1, 0]).unwrap(), vec![1, 0, 1, 1, 0]);
    }

    #[test]
    fn rejects_bad_checks() {
        assert!(LdpcCode::from_checks(3, vec![vec![0, 3]]).is_err());
        assert!(LdpcCode::from_checks(3, vec![vec![1, 1]]).is_err());
        assert!(hamming74().encode(&[1, 0]).is_err());
    }

    #[test]
    fn girth_of_small_graphs() {
        assert_eq!(LdpcCode::from_checks(3, vec![vec![0, 1, 2]]).unwrap().girth(), None);
        assert_eq!(hamming74().girth(), Some(4));
        let six = LdpcCode::from_checks(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert_eq!(six.girth(), Some(6));
    }

    #[test]
    fn encoder_beyond_one_word() {
        // Chain checks x_i + x_{i+1} = 0 over 130 bits force a constant word.
        let checks = (0..129).map(|i| vec![i, i + 1]).collect();
        let code = LdpcCode::from_checks(130, checks).unwrap();
        assert_eq!(code.k(), 1);
        assert!(code.encode(&[1]).unwrap().iter().all(|&b| b == 1));
    }
}
