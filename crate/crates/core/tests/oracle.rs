use proptest::prelude::*;
use rayon::prelude::*;

use two_squares::arith::{factorize_segment, gcd, in_n, is_prime, isqrt, omega_star, primes_up_to};
use two_squares::reps::{enumerate_primitive_reps, r0_star, r1_of};
use two_squares::sieve::{pair_counts, tally_segment, SegmentPlan};
use two_squares::{pair_sieve, stats};

const X: u64 = 1_000_000;

#[test]
fn sieve_counts_match_direct_search_up_to_a_million() {
    let primes = primes_up_to(isqrt(X) + 1).unwrap();
    let counts = pair_counts(1, X + 1, &primes).unwrap();
    let bad: Vec<u64> = (1..=X)
        .into_par_iter()
        .filter(|&n| {
            let (r, rs) = counts.get(n);
            r1_of(n) != (r as u32, rs as u32)
        })
        .collect();
    assert!(
        bad.is_empty(),
        "mismatch at {:?}",
        &bad[..bad.len().min(10)]
    );
}

#[test]
fn r0_star_matches_enumeration() {
    let bad: Vec<u64> = (1..=100_000u64)
        .into_par_iter()
        .filter(|&n| r0_star(n) != enumerate_primitive_reps(n).len() as u64)
        .collect();
    assert!(
        bad.is_empty(),
        "mismatch at {:?}",
        &bad[..bad.len().min(10)]
    );
}

#[test]
fn support_of_r0_star_is_the_set_n() {
    for n in 1..=50_000u64 {
        assert_eq!(r0_star(n) > 0, in_n(n), "n = {n}");
        if in_n(n) {
            assert_eq!(r0_star(n), 1 << omega_star(n), "n = {n}");
        }
    }
}

#[test]
fn segment_factorization_agrees_with_trial_division() {
    let lo = 999_000_000u64;
    let hi = lo + 20_000;
    let primes = primes_up_to(isqrt(hi) + 1).unwrap();
    let seg = factorize_segment(lo, hi, &primes).unwrap();
    for (n, k, inside) in seg.iter() {
        assert_eq!(k as u32, omega_star(n), "n = {n}");
        assert_eq!(inside, in_n(n), "n = {n}");
    }
}

#[test]
fn tallies_agree_with_a_naive_pass() {
    let x = 200_000u64;
    let report = pair_sieve(x, 1 << 16, 2).unwrap();
    let (mut total, mut total_star, mut m2, mut m3) = (0u64, 0u64, 0u64, 0u64);
    let mut n0 = 0u64;
    // Direct enumeration of pairs, independent of the sieve.
    let mut per_n = vec![0u64; x as usize + 1];
    for p in (2..=isqrt(x)).filter(|&p| is_prime(p)) {
        for a in 1..=isqrt(x - p * p) {
            per_n[(a * a + p * p) as usize] += 1;
            total += 1;
            if gcd(a, p) == 1 {
                total_star += 1;
            }
        }
    }
    for &r in &per_n[1..] {
        if r > 0 {
            n0 += 1;
            m2 += r * (r - 1) / 2;
            if r >= 3 {
                m3 += r * (r - 1) * (r - 2) / 6;
            }
        }
    }
    let t = &report.tally;
    assert_eq!((t.r1_total, t.r1_star_total), (total, total_star));
    assert_eq!((t.moment2, t.moment3), (m2, m3));
    assert_eq!(t.gcd_defect, total - total_star);
    assert_eq!(stats::n0(&report).unwrap(), n0);
}

#[test]
fn small_x_values() {
    let report = pair_sieve(100, 1 << 16, 1).unwrap();
    assert_eq!(report.tally.r1_total, 33);
    assert_eq!(report.tally.gcd_defect, 9);
    let r30 = stats::pi_n_histogram(30, 1).unwrap();
    assert_eq!(r30.get(&1), Some(&7));
}

#[test]
fn json_round_trip_preserves_report() {
    let report = pair_sieve(300_000, 1 << 16, 2).unwrap();
    let text = report.to_json().unwrap();
    let back = two_squares::TallyReport::from_json(&text).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.to_json().unwrap(), text);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_tiling_gives_the_same_tally(x in 100u64..400_000, shift in 0u32..4) {
        let seg = 1u64 << (16 + shift);
        let a = pair_sieve(x, seg, 1).unwrap();
        let b = pair_sieve(x, 1 << 16, 3).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn segment_tallies_merge(x in 100_000u64..300_000, cut in 1u64..99_999) {
        let primes = SegmentPlan::new(x, 1 << 16).unwrap().primes().unwrap();
        let whole = tally_segment(1, x + 1, &primes).unwrap();
        let left = tally_segment(1, cut + 1, &primes).unwrap();
        let right = tally_segment(cut + 1, x + 1, &primes).unwrap();
        prop_assert_eq!(&right.clone().merge(&left).unwrap(), &whole);
        prop_assert_eq!(left.merge(&right).unwrap(), whole);
    }
}
