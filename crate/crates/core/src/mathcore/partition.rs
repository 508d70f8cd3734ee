use crate::error::{PamError, Result};
use std::fmt;

/// Largest weight accepted by [`enumerate_partitions`].
pub const MAX_PARTITION_WEIGHT: usize = 12;

/// An integer partition `λ = (λ₁ ≥ λ₂ ≥ … > 0)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(PamError::InvalidParameter(format!(
                "partition parts must be positive and nonempty: {parts:?}"
            )));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Number of nonzero parts `ℓ(λ)`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `k = Σ λᵢ`.
    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    /// `mᵢ`, the number of parts equal to `i`, for `i = 1..=λ₁` (index 0 unused).
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut m = vec![0; self.parts[0] + 1];
        for &p in &self.parts {
            m[p] += 1;
        }
        m
    }

    /// `m₁! m₂! ⋯`
    pub fn symmetry_factor(&self) -> f64 {
        self.multiplicities()
            .iter()
            .map(|&m| (1..=m).map(|i| i as f64).product::<f64>())
            .product()
    }

    pub fn is_single_part(&self) -> bool {
        self.parts.len() == 1
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// All partitions of `k`, in reverse lexicographic order starting at `(k)`.
pub fn enumerate_partitions(k: usize) -> Result<Vec<Partition>> {
    if k == 0 || k > MAX_PARTITION_WEIGHT {
        return Err(PamError::InvalidParameter(format!(
            "partition weight must lie in 1..={MAX_PARTITION_WEIGHT}, got {k}"
        )));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    descend(k, k, &mut current, &mut out);
    Ok(out)
}

fn descend(remaining: usize, max_part: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition {
            parts: current.clone(),
        });
        return;
    }
    for part in (1..=max_part.min(remaining)).rev() {
        current.push(part);
        descend(remaining - part, part, current, out);
        current.pop();
    }
}

/// Partition numbers by Euler's pentagonal recurrence.
pub fn partition_count(k: usize) -> u64 {
    let mut p = vec![0i64; k + 1];
    p[0] = 1;
    for n in 1..=k {
        let mut acc = 0i64;
        for j in 1.. {
            let g1 = j * (3 * j - 1) / 2;
            if g1 > n {
                break;
            }
            let sign = if j % 2 == 1 { 1 } else { -1 };
            acc += sign * p[n - g1];
            let g2 = j * (3 * j + 1) / 2;
            if g2 <= n {
                acc += sign * p[n - g2];
            }
        }
        p[n] = acc;
    }
    p[k] as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Brute force: every weakly decreasing word over 1..=k of length ≤ k
    /// summing to k, found by exhaustive search over multiplicity vectors.
    fn brute_force(k: usize) -> HashSet<Vec<usize>> {
        let mut found = HashSet::new();
        let mut mult = vec![0usize; k + 1];
        loop {
            let total: usize = (1..=k).map(|i| i * mult[i]).sum();
            if total == k {
                let mut parts = Vec::new();
                for i in (1..=k).rev() {
                    parts.extend(std::iter::repeat(i).take(mult[i]));
                }
                found.insert(parts);
            }
            // odometer over mult[i] in 0..=k/i
            let mut i = 1;
            loop {
                if i > k {
                    return found;
                }
                mult[i] += 1;
                if mult[i] * i <= k {
                    break;
                }
                mult[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn small_cases() {
        let p1 = enumerate_partitions(1).unwrap();
        assert_eq!(p1, vec![Partition::new(vec![1]).unwrap()]);
        let p3: Vec<Vec<usize>> = enumerate_partitions(3)
            .unwrap()
            .iter()
            .map(|p| p.parts().to_vec())
            .collect();
        assert_eq!(p3, vec![vec![3], vec![2, 1], vec![1, 1, 1]]);
        assert_eq!(enumerate_partitions(6).unwrap().len(), 11);
    }

    #[test]
    fn matches_brute_force_up_to_twelve() {
        for k in 1..=MAX_PARTITION_WEIGHT {
            let ours = enumerate_partitions(k).unwrap();
            let set: HashSet<Vec<usize>> = ours.iter().map(|p| p.parts().to_vec()).collect();
            assert_eq!(set.len(), ours.len(), "duplicates at k={k}");
            assert_eq!(set, brute_force(k), "k={k}");
            assert_eq!(ours.len() as u64, partition_count(k));
            for p in &ours {
                let m = p.multiplicities();
                let weighted: usize = m.iter().enumerate().map(|(i, mi)| i * mi).sum();
                assert_eq!(weighted, k);
                assert_eq!(m.iter().sum::<usize>(), p.len());
                assert!(p.parts().windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(enumerate_partitions(0).is_err());
        assert!(enumerate_partitions(13).is_err());
    }

    #[test]
    fn symmetry_factor() {
        assert_eq!(Partition::new(vec![1, 1, 1]).unwrap().symmetry_factor(), 6.0);
        assert_eq!(Partition::new(vec![2, 2, 1]).unwrap().symmetry_factor(), 2.0);
        assert_eq!(Partition::new(vec![3]).unwrap().symmetry_factor(), 1.0);
    }
}
