//! Universal integer hashing and MinHash signatures.
//!
//! A [`HashParams`] is one instance `pi(i) = (a*i + b) mod c` of the classic
//! multiply-add-mod-prime family, drawn with `0 < a, b < c` and `c` the
//! smallest prime at least as large as the attribute universe. Applying `K`
//! independent instances to a set and keeping each argmin element yields a
//! [`Signature`]; the fraction of positions at which two signatures agree is
//! an unbiased estimate of the sets' Jaccard similarity.
//!
//! All arithmetic is done in `u64`, which is exact for any modulus below
//! `2^31` (products stay below `2^62`).

use rand::Rng;

use crate::error::{Error, Result};

/// Largest supported modulus; keeps `a * i + b` inside `u64`.
pub const MAX_MODULUS: u64 = 1 << 31;

// ---------------------------------------------------------------------------
// Hash parameters
// ---------------------------------------------------------------------------

/// Parameters of one universal hash function `i -> (a*i + b) mod c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashParams {
    a: u64,
    b: u64,
    c: u64,
}

impl HashParams {
    /// Validates `0 < a < c`, `0 < b < c`, `c` prime and below [`MAX_MODULUS`].
    pub fn new(a: u64, b: u64, c: u64) -> Result<Self> {
        if c >= MAX_MODULUS {
            return Err(Error::InvalidParameter(format!(
                "modulus {c} exceeds the supported maximum {MAX_MODULUS}"
            )));
        }
        if !is_prime(c) {
            return Err(Error::InvalidParameter(format!("modulus {c} is not prime")));
        }
        if a == 0 || a >= c || b == 0 || b >= c {
            return Err(Error::InvalidParameter(format!(
                "hash multiplier/offset must lie in [1, {c}); got a={a}, b={b}"
            )));
        }
        Ok(Self { a, b, c })
    }

    /// Constructor for callers that already know `c` is a valid prime
    /// (e.g. the family-table builder, which checks it once).
    pub(crate) fn from_checked_prime(a: u64, b: u64, c: u64) -> Self {
        debug_assert!(a > 0 && a < c && b > 0 && b < c);
        Self { a, b, c }
    }

    pub fn multiplier(&self) -> u64 {
        self.a
    }

    pub fn offset(&self) -> u64 {
        self.b
    }

    pub fn modulus(&self) -> u64 {
        self.c
    }

    /// `(a*element + b) mod c`, rejecting elements outside `[0, c)`.
    pub fn hash_value(&self, element: u32) -> Result<u64> {
        if u64::from(element) >= self.c {
            return Err(Error::HashDomain {
                element,
                modulus: self.c,
            });
        }
        Ok(self.eval(element))
    }

    /// Hot-path evaluation; the domain check is the caller's responsibility.
    #[inline]
    pub(crate) fn eval(&self, element: u32) -> u64 {
        debug_assert!(u64::from(element) < self.c);
        (self.a * u64::from(element) + self.b) % self.c
    }
}

/// Draws `c = next_prime(universe_size)` and `a, b` uniform in `[1, c)`.
///
/// The prime depends only on the universe, so every family built against the
/// same dataset shares its modulus.
pub fn sample_hash_params<R: Rng + ?Sized>(universe_size: u32, rng: &mut R) -> Result<HashParams> {
    if universe_size == 0 {
        return Err(Error::InvalidParameter(
            "universe size must be at least 1".into(),
        ));
    }
    let c = next_prime(u64::from(universe_size));
    Ok(sample_with_modulus(c, rng))
}

/// Draws `a, b` for a modulus already known to be prime.
pub(crate) fn sample_with_modulus<R: Rng + ?Sized>(c: u64, rng: &mut R) -> HashParams {
    // Draw order (a then b) is part of the reproducibility contract.
    let a = rng.random_range(1..c);
    let b = rng.random_range(1..c);
    HashParams::from_checked_prime(a, b, c)
}

/// Smallest prime `>= n` (so `next_prime(0) == next_prime(1) == 2`).
pub fn next_prime(n: u64) -> u64 {
    let mut candidate = n.max(2);
    while !is_prime(candidate) {
        candidate += 1;
    }
    candidate
}

/// Trial division; fine for the few-million universe sizes this crate targets.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

// ---------------------------------------------------------------------------
// Element sets
// ---------------------------------------------------------------------------

/// A set of element ids, stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ElementSet {
    ids: Vec<u32>,
}

impl ElementSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a set from arbitrary ids; duplicates collapse, order is ignored.
    pub fn from_ids<I: IntoIterator<Item = u32>>(ids: I) -> Self {
        let mut ids: Vec<u32> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        Self { ids }
    }

    /// Wraps a slice already known to be sorted and duplicate-free.
    pub(crate) fn from_sorted_unchecked(ids: Vec<u32>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        Self { ids }
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.ids.iter().copied()
    }
}

impl FromIterator<u32> for ElementSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        Self::from_ids(iter)
    }
}

/// `|S ∩ T| / |S ∪ T|`, with both-empty defined as 1.0 (two empty sets
/// produce identical signatures, so they count as maximally similar).
pub fn exact_jaccard(s: &ElementSet, t: &ElementSet) -> f64 {
    if s.is_empty() && t.is_empty() {
        return 1.0;
    }
    let mut inter = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    let (a, b) = (s.ids(), t.ids());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

// ---------------------------------------------------------------------------
// MinHash
// ---------------------------------------------------------------------------

/// Element of `set` with the minimal hash value; ties (impossible for an
/// injective affine map, but kept total anyway) go to the smaller id.
pub fn minhash_argmin(set: &ElementSet, params: &HashParams) -> Result<u32> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    // The set is sorted, so checking the largest element covers the domain.
    let max = *set.ids().last().expect("non-empty");
    if u64::from(max) >= params.modulus() {
        return Err(Error::HashDomain {
            element: max,
            modulus: params.modulus(),
        });
    }
    Ok(argmin_over(set.iter(), params).expect("non-empty"))
}

/// Streaming argmin used by both the public ops and the sketch engine.
/// Smaller hash wins; equal hashes go to the smaller element id.
#[inline]
pub(crate) fn argmin_over<I: Iterator<Item = u32>>(elements: I, params: &HashParams) -> Option<u32> {
    let mut best: Option<(u64, u32)> = None;
    for e in elements {
        let h = params.eval(e);
        match best {
            None => best = Some((h, e)),
            Some((bh, be)) => {
                if h < bh || (h == bh && e < be) {
                    best = Some((h, e));
                }
            }
        }
    }
    best.map(|(_, e)| e)
}

/// A length-`K` vector of MinHash sample elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    values: Vec<u32>,
}

impl Signature {
    pub fn from_values(values: Vec<u32>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Signature of `set` under `family`; an empty set yields `family.len()`
/// copies of `sentinel` (by convention the id one past the universe).
pub fn minhash_signature(set: &ElementSet, family: &[HashParams], sentinel: u32) -> Result<Signature> {
    if family.is_empty() {
        return Err(Error::InvalidParameter(
            "signature family must contain at least one hash function".into(),
        ));
    }
    if set.is_empty() {
        return Ok(Signature::from_values(vec![sentinel; family.len()]));
    }
    let mut values = Vec::with_capacity(family.len());
    for params in family {
        values.push(minhash_argmin(set, params)?);
    }
    Ok(Signature::from_values(values))
}

/// Fraction of positions at which two signatures agree (the indicator
/// average that estimates Jaccard similarity).
pub fn estimate_similarity(sig1: &Signature, sig2: &Signature) -> Result<f64> {
    if sig1.len() != sig2.len() {
        return Err(Error::LengthMismatch {
            left: sig1.len(),
            right: sig2.len(),
        });
    }
    if sig1.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot compare zero-length signatures".into(),
        ));
    }
    let equal = sig1
        .values()
        .iter()
        .zip(sig2.values())
        .filter(|(a, b)| a == b)
        .count();
    Ok(equal as f64 / sig1.len() as f64)
}

/// Draws `k` independent hash functions over the given universe, all sharing
/// the cached `next_prime(universe_size)` modulus.
pub fn sample_family<R: Rng + ?Sized>(universe_size: u32, k: usize, rng: &mut R) -> Result<Vec<HashParams>> {
    if universe_size == 0 {
        return Err(Error::InvalidParameter(
            "universe size must be at least 1".into(),
        ));
    }
    let c = next_prime(u64::from(universe_size));
    Ok((0..k).map(|_| sample_with_modulus(c, rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(a: u64, b: u64, c: u64) -> HashParams {
        HashParams::new(a, b, c).unwrap()
    }

    fn set(ids: &[u32]) -> ElementSet {
        ElementSet::from_ids(ids.iter().copied())
    }

    #[test]
    fn hash_value_examples() {
        assert_eq!(params(3, 5, 13).hash_value(4).unwrap(), 4); // (12+5) mod 13
        assert_eq!(params(3, 5, 13).hash_value(0).unwrap(), 5); // b mod c
        assert_eq!(params(2, 3, 7).hash_value(6).unwrap(), 1); // 15 mod 7
    }

    #[test]
    fn hash_value_rejects_out_of_domain() {
        let p = params(3, 5, 13);
        assert!(matches!(
            p.hash_value(13),
            Err(Error::HashDomain { element: 13, modulus: 13 })
        ));
    }

    #[test]
    fn hash_params_validation() {
        assert!(HashParams::new(0, 5, 13).is_err());
        assert!(HashParams::new(3, 0, 13).is_err());
        assert!(HashParams::new(13, 5, 13).is_err());
        assert!(HashParams::new(3, 5, 12).is_err()); // not prime
        assert!(HashParams::new(1, 1, MAX_MODULUS + 1).is_err());
    }

    #[test]
    fn hash_determinism() {
        let p = params(7, 11, 101);
        for e in 0..101 {
            assert_eq!(p.hash_value(e).unwrap(), p.hash_value(e).unwrap());
        }
    }

    #[test]
    fn argmin_singleton() {
        assert_eq!(minhash_argmin(&set(&[0]), &params(3, 5, 13)).unwrap(), 0);
    }

    #[test]
    fn argmin_full_range_inversion() {
        // (3i + 5) mod 13 == 0 at i = 7 (3*7+5 = 26).
        let ids: Vec<u32> = (0..13).collect();
        assert_eq!(minhash_argmin(&set(&ids), &params(3, 5, 13)).unwrap(), 7);
    }

    #[test]
    fn argmin_direct_arithmetic() {
        // hashes: 2 -> 15 mod 13 = 2, 9 -> 64 mod 13 = 12, 11 -> 78 mod 13 = 0.
        assert_eq!(minhash_argmin(&set(&[2, 9, 11]), &params(7, 1, 13)).unwrap(), 11);
    }

    #[test]
    fn argmin_empty_set_errors() {
        assert!(matches!(
            minhash_argmin(&ElementSet::empty(), &params(3, 5, 13)),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn argmin_rejects_elements_outside_domain() {
        assert!(matches!(
            minhash_argmin(&set(&[1, 40]), &params(3, 5, 13)),
            Err(Error::HashDomain { element: 40, .. })
        ));
    }

    #[test]
    fn argmin_is_order_free() {
        // ElementSet canonicalizes, so any insertion order gives one answer.
        let p = params(5, 3, 101);
        let forward = ElementSet::from_ids([10, 20, 30, 40, 50]);
        let backward = ElementSet::from_ids([50, 40, 30, 20, 10]);
        assert_eq!(forward, backward);
        assert_eq!(
            minhash_argmin(&forward, &p).unwrap(),
            minhash_argmin(&backward, &p).unwrap()
        );
    }

    #[test]
    fn signature_of_singleton_repeats_it() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let family = sample_family(100, 4, &mut rng).unwrap();
        let sig = minhash_signature(&set(&[5]), &family, 100).unwrap();
        assert_eq!(sig.values(), &[5, 5, 5, 5]);
    }

    #[test]
    fn signature_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let family = sample_family(1000, 64, &mut rng).unwrap();
        let s = set(&[1, 2, 3, 500, 999]);
        assert_eq!(
            minhash_signature(&s, &family, 1000).unwrap(),
            minhash_signature(&s, &family, 1000).unwrap()
        );
    }

    #[test]
    fn empty_set_signature_is_all_sentinel() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let family = sample_family(50, 8, &mut rng).unwrap();
        let sig = minhash_signature(&ElementSet::empty(), &family, 50).unwrap();
        assert_eq!(sig.values(), &[50; 8]);
    }

    #[test]
    fn estimate_similarity_examples() {
        let a = Signature::from_values(vec![1, 2, 3, 4]);
        let b = Signature::from_values(vec![1, 2, 9, 9]);
        assert_eq!(estimate_similarity(&a, &a).unwrap(), 1.0);
        assert_eq!(estimate_similarity(&a, &b).unwrap(), 0.5);
    }

    #[test]
    fn estimate_similarity_length_mismatch() {
        let a = Signature::from_values(vec![1, 2, 3]);
        let b = Signature::from_values(vec![1, 2]);
        assert!(matches!(
            estimate_similarity(&a, &b),
            Err(Error::LengthMismatch { left: 3, right: 2 })
        ));
    }

    #[test]
    fn overlapping_sets_estimate_close_to_jaccard() {
        // S = {0..9}, T = {5..14}: J = 5/15 = 1/3.
        let s = ElementSet::from_ids(0..10);
        let t = ElementSet::from_ids(5..15);
        assert!((exact_jaccard(&s, &t) - 1.0 / 3.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let family = sample_family(15, 2048, &mut rng).unwrap();
        let sig_s = minhash_signature(&s, &family, 15).unwrap();
        let sig_t = minhash_signature(&t, &family, 15).unwrap();
        let est = estimate_similarity(&sig_s, &sig_t).unwrap();
        assert!((est - 1.0 / 3.0).abs() <= 0.05, "estimate {est} too far from 1/3");
    }

    #[test]
    fn disjoint_sets_estimate_near_zero() {
        let s = ElementSet::from_ids(0..30);
        let t = ElementSet::from_ids(500..530);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let family = sample_family(1000, 2048, &mut rng).unwrap();
        let sig_s = minhash_signature(&s, &family, 1000).unwrap();
        let sig_t = minhash_signature(&t, &family, 1000).unwrap();
        let est = estimate_similarity(&sig_s, &sig_t).unwrap();
        assert!(est <= 0.01, "disjoint sets estimated at {est}");
    }

    #[test]
    fn exact_jaccard_examples() {
        assert_eq!(exact_jaccard(&set(&[1, 2, 3]), &set(&[2, 3, 4])), 0.5);
        assert_eq!(exact_jaccard(&set(&[1, 7, 9]), &set(&[1, 7, 9])), 1.0);
        assert_eq!(exact_jaccard(&set(&[1]), &set(&[2])), 0.0);
        assert_eq!(exact_jaccard(&ElementSet::empty(), &ElementSet::empty()), 1.0);
        assert_eq!(exact_jaccard(&ElementSet::empty(), &set(&[3])), 0.0);
    }

    #[test]
    fn next_prime_examples() {
        assert_eq!(next_prime(0), 2);
        assert_eq!(next_prime(1), 2);
        assert_eq!(next_prime(2), 2);
        assert_eq!(next_prime(13), 13);
        assert_eq!(next_prime(14), 17);
        assert_eq!(next_prime(1_000_000), 1_000_003);
    }

    #[test]
    fn sample_params_uses_next_prime_and_is_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let p13 = sample_hash_params(13, &mut rng).unwrap();
        assert_eq!(p13.modulus(), 13);
        let p14 = sample_hash_params(14, &mut rng).unwrap();
        assert_eq!(p14.modulus(), 17);

        let mut rng_a = ChaCha8Rng::seed_from_u64(7);
        let mut rng_b = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(
            sample_hash_params(1000, &mut rng_a).unwrap(),
            sample_hash_params(1000, &mut rng_b).unwrap()
        );

        for _ in 0..100 {
            let p = sample_hash_params(64, &mut rng).unwrap();
            assert!(p.multiplier() >= 1 && p.multiplier() < p.modulus());
            assert!(p.offset() >= 1 && p.offset() < p.modulus());
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// Signature self-similarity is exactly 1.
            #[test]
            fn self_similarity_is_one(ids in proptest::collection::vec(0u32..500, 1..40), seed in 0u64..1000) {
                let s = ElementSet::from_ids(ids);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let family = sample_family(500, 32, &mut rng).unwrap();
                let sig = minhash_signature(&s, &family, 500).unwrap();
                prop_assert_eq!(estimate_similarity(&sig, &sig).unwrap(), 1.0);
            }

            /// argmin is a pure function of set contents, not insertion order.
            #[test]
            fn argmin_permutation_free(mut ids in proptest::collection::vec(0u32..500, 1..40), seed in 0u64..1000) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let p = sample_hash_params(500, &mut rng).unwrap();
                let forward = ElementSet::from_ids(ids.clone());
                ids.reverse();
                let backward = ElementSet::from_ids(ids);
                prop_assert_eq!(
                    minhash_argmin(&forward, &p).unwrap(),
                    minhash_argmin(&backward, &p).unwrap()
                );
            }

            /// Every signature entry is drawn from the input set.
            #[test]
            fn signature_entries_come_from_the_set(ids in proptest::collection::vec(0u32..300, 1..30), seed in 0u64..1000) {
                let s = ElementSet::from_ids(ids);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let family = sample_family(300, 16, &mut rng).unwrap();
                let sig = minhash_signature(&s, &family, 300).unwrap();
                for &v in sig.values() {
                    prop_assert!(s.contains(v));
                }
            }
        }
    }
}
