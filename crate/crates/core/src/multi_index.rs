//! Strictly increasing multi-indices and permutation signs.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// All strictly increasing `k`-subsets of `0..dim`, lexicographically ordered.
#[derive(Debug)]
pub struct IndexBasis {
    pub dim: usize,
    pub degree: usize,
    pub indices: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl IndexBasis {
    pub fn get(dim: usize, degree: usize) -> Arc<IndexBasis> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<IndexBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("index basis cache poisoned");
        guard
            .entry((dim, degree))
            .or_insert_with(|| {
                let indices = increasing_indices(dim, degree);
                let lookup = indices.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
                Arc::new(IndexBasis {
                    dim,
                    degree,
                    indices,
                    lookup,
                })
            })
            .clone()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, index: &[usize]) -> Option<usize> {
        self.lookup.get(index).copied()
    }
}

fn increasing_indices(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, dim: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(i + 1, dim, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if degree <= dim {
        rec(0, dim, degree, &mut Vec::with_capacity(degree), &mut out);
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Sorts `seq` and returns the sign of the sorting permutation, or `None`
/// when an entry repeats.
pub fn sort_sign(seq: &[usize]) -> Option<(f64, Vec<usize>)> {
    let mut v = seq.to_vec();
    let mut sign = 1.0;
    // insertion sort; each adjacent swap flips the sign
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sign, v))
}

/// Every permutation of `0..n` together with its sign.
pub fn permutations(n: usize) -> Arc<Vec<(f64, Vec<usize>)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, Vec<usize>)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("permutation cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(f64, Vec<usize>)>) {
                if cur.len() == used.len() {
                    let (s, _) = sort_sign(cur).expect("permutation has no repeats");
                    out.push((s, cur.clone()));
                    return;
                }
                for i in 0..used.len() {
                    if !used[i] {
                        used[i] = true;
                        cur.push(i);
                        rec(cur, used, out);
                        cur.pop();
                        used[i] = false;
                    }
                }
            }
            let mut out = Vec::new();
            rec(&mut Vec::new(), &mut vec![false; n], &mut out);
            Arc::new(out)
        })
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_order() {
        let b = IndexBasis::get(4, 2);
        assert_eq!(
            b.indices,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(b.position(&[1, 3]), Some(4));
        assert_eq!(IndexBasis::get(3, 4).len(), 0);
        assert_eq!(IndexBasis::get(3, 0).indices, vec![Vec::<usize>::new()]);
    }

    #[test]
    fn sort_sign_counts_transpositions() {
        assert_eq!(sort_sign(&[1, 0]), Some((-1.0, vec![0, 1])));
        assert_eq!(sort_sign(&[2, 0, 1]), Some((1.0, vec![0, 1, 2])));
        assert_eq!(sort_sign(&[1, 1]), None);
    }

    #[test]
    fn permutation_signs_sum_to_zero() {
        let p = permutations(4);
        assert_eq!(p.len(), 24);
        assert_eq!(p.iter().map(|(s, _)| s).sum::<f64>(), 0.0);
        assert_eq!(binomial(5, 2), 10);
    }
}
