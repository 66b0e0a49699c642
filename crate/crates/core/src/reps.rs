//! Representations n = a² + b² and the counting functions r₀*, r₁, r₁*.

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, is_prime, isqrt};
use crate::error::{ensure, Result};

/// One representation `n = a² + b²` with `a ≥ 0`, `b > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Representation {
    pub a: u64,
    pub b: u64,
    pub n: u64,
}

impl Representation {
    /// Builds `(a, b)` and checks that `a² + b²` fits in a `u64`.
    pub fn new(a: u64, b: u64) -> Result<Self> {
        ensure!(b > 0, Input, "representation ({a}, {b}) needs b > 0");
        let n = a
            .checked_mul(a)
            .and_then(|a2| b.checked_mul(b).and_then(|b2| a2.checked_add(b2)));
        match n {
            Some(n) => Ok(Representation { a, b, n }),
            None => Err(crate::Error::Input(format!("{a}² + {b}² overflows u64"))),
        }
    }

    pub fn is_primitive(&self) -> bool {
        gcd(self.a, self.b) == 1
    }

    /// The same point reflected across the diagonal.
    pub fn swapped(&self) -> Option<Self> {
        (self.a > 0).then_some(Representation {
            a: self.b,
            b: self.a,
            n: self.n,
        })
    }
}

/// `Some(r)` when `m = r²`.
#[inline]
fn exact_sqrt(m: u64) -> Option<u64> {
    let r = isqrt(m);
    (r * r == m).then_some(r)
}

/// All primitive representations of `n`, by an exhaustive scan over `a ≤ √n`.
///
/// Ordered by `a` ascending. Runs in O(√n).
pub fn enumerate_primitive_reps(n: u64) -> Vec<Representation> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    for a in 0..=isqrt(n) {
        let rest = n - a * a;
        if rest == 0 {
            continue;
        }
        if let Some(b) = exact_sqrt(rest) {
            if gcd(a, b) == 1 {
                out.push(Representation { a, b, n });
            }
        }
    }
    out
}

/// r₀*(n), evaluated multiplicatively from the factorization of `n`.
pub fn r0_star(n: u64) -> u64 {
    assert!(n >= 1, "r0_star is defined for n >= 1");
    let twos = n.trailing_zeros();
    if twos >= 2 {
        return 0;
    }
    let mut m = n >> twos;
    let mut value = 1u64;
    let mut p = 3u64;
    while p.saturating_mul(p) <= m {
        if m.is_multiple_of(p) {
            if p % 4 == 3 {
                return 0;
            }
            value *= 2;
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 2;
    }
    if m > 1 {
        if m % 4 == 3 {
            return 0;
        }
        value *= 2;
    }
    value
}

/// r₀(n) = #{x ≥ 0, y > 0 : x² + y² = n}, without the coprimality condition.
#[cfg(test)]
pub(crate) fn r0(n: u64) -> u64 {
    (0..=isqrt(n))
        .filter(|&x| n - x * x > 0 && exact_sqrt(n - x * x).is_some())
        .count() as u64
}

/// Number of divisors, by trial division.
#[cfg(test)]
pub(crate) fn divisor_count(mut n: u64) -> u64 {
    let mut count = 1;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        count *= e + 1;
        p += 1;
    }
    if n > 1 {
        count *= 2;
    }
    count
}

/// The two primitive representations of `m·n` obtained from
/// `(a + ib)(c ∓ id)`, namely `(ac + bd, |ad − bc|)` and `(|ac − bd|, ad + bc)`.
///
/// Both inputs must be primitive with positive coordinates and `gcd(m, n) = 1`.
pub fn compose(rep_m: &Representation, rep_n: &Representation) -> Result<[Representation; 2]> {
    let (a, b, c, d) = (rep_m.a, rep_m.b, rep_n.a, rep_n.b);
    ensure!(
        a > 0 && b > 0 && c > 0 && d > 0,
        Input,
        "composition needs positive coordinates, got ({a}, {b}) and ({c}, {d})"
    );
    ensure!(
        rep_m.is_primitive() && rep_n.is_primitive(),
        Input,
        "composition needs primitive representations"
    );
    ensure!(
        gcd(rep_m.n, rep_n.n) == 1,
        Input,
        "gcd({}, {}) != 1",
        rep_m.n,
        rep_n.n
    );
    let product = rep_m
        .n
        .checked_mul(rep_n.n)
        .ok_or_else(|| crate::Error::Input("m·n overflows u64".into()))?;

    let (ac, bd, ad, bc) = (a * c, b * d, a * d, b * c);
    let first = (ac + bd, ad.abs_diff(bc));
    let second = (ac.abs_diff(bd), ad + bc);
    ensure!(
        first.1 != 0 && second.0 != 0,
        Invariant,
        "degenerate composition of ({a}, {b}) and ({c}, {d})"
    );
    let reps = [
        Representation {
            a: first.0,
            b: first.1,
            n: product,
        },
        Representation {
            a: second.0,
            b: second.1,
            n: product,
        },
    ];
    for rep in &reps {
        ensure!(
            rep.is_primitive(),
            Invariant,
            "composition produced non-primitive ({}, {})",
            rep.a,
            rep.b
        );
    }
    Ok(reps)
}

/// `(r₁(n), r₁*(n))` by direct search over the prime coordinate.
///
/// `r₁` counts pairs `(a, p)` with `a > 0`, `p` prime and `a² + p² = n`;
/// `r₁*` additionally requires `gcd(a, p) = 1`.
pub fn r1_of(n: u64) -> (u32, u32) {
    let mut r1 = 0;
    let mut r1_star = 0;
    if n < 2 {
        return (0, 0);
    }
    // p² ≤ n - 1 since a ≥ 1.
    for p in 2..=isqrt(n - 1) {
        if let Some(a) = exact_sqrt(n - p * p) {
            if is_prime(p) {
                r1 += 1;
                if a % p != 0 {
                    r1_star += 1;
                }
            }
        }
    }
    (r1, r1_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reps(pairs: &[(u64, u64)]) -> Vec<Representation> {
        pairs
            .iter()
            .map(|&(a, b)| Representation::new(a, b).unwrap())
            .collect()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_primitive_reps(25), reps(&[(3, 4), (4, 3)]));
        assert_eq!(
            enumerate_primitive_reps(65),
            reps(&[(1, 8), (4, 7), (7, 4), (8, 1)])
        );
        assert!(enumerate_primitive_reps(3).is_empty());
        assert_eq!(enumerate_primitive_reps(1), reps(&[(0, 1)]));
        assert_eq!(enumerate_primitive_reps(2), reps(&[(1, 1)]));
    }

    #[test]
    fn r0_star_examples() {
        assert_eq!(r0_star(1), 1);
        assert_eq!(r0_star(2), 1);
        assert_eq!(r0_star(4), 0);
        assert_eq!(r0_star(8), 0);
        assert_eq!(r0_star(65), 4);
        assert_eq!(r0_star(9), 0);
        assert_eq!(r0_star(25), 2);
    }

    #[test]
    fn r0_star_matches_enumeration() {
        for n in 1..=20_000 {
            assert_eq!(
                r0_star(n),
                enumerate_primitive_reps(n).len() as u64,
                "n = {n}"
            );
        }
    }

    #[test]
    fn compose_examples() {
        let m = Representation::new(1, 2).unwrap();
        let n = Representation::new(2, 3).unwrap();
        let out = compose(&m, &n).unwrap();
        assert_eq!(
            out,
            [
                Representation::new(8, 1).unwrap(),
                Representation::new(4, 7).unwrap()
            ]
        );

        let two = Representation::new(1, 1).unwrap();
        let out = compose(&two, &m).unwrap();
        assert_eq!(
            out,
            [
                Representation::new(3, 1).unwrap(),
                Representation::new(1, 3).unwrap()
            ]
        );
    }

    #[test]
    fn compose_covers_65_twice() {
        let mut seen = std::collections::BTreeMap::new();
        for rm in enumerate_primitive_reps(5) {
            for rn in enumerate_primitive_reps(13) {
                for rep in compose(&rm, &rn).unwrap() {
                    *seen.entry((rep.a, rep.b)).or_insert(0) += 1;
                }
            }
        }
        let expected: std::collections::BTreeMap<_, _> =
            [((1, 8), 2), ((4, 7), 2), ((7, 4), 2), ((8, 1), 2)]
                .into_iter()
                .collect();
        assert_eq!(seen, expected);
    }

    #[test]
    fn compose_errors() {
        let a = Representation::new(1, 2).unwrap();
        let b = Representation::new(2, 1).unwrap();
        assert!(matches!(compose(&a, &b), Err(crate::Error::Input(_))));
        let zero = Representation::new(0, 1).unwrap();
        assert!(matches!(compose(&zero, &a), Err(crate::Error::Input(_))));
        let imprimitive = Representation::new(2, 2).unwrap();
        assert!(matches!(
            compose(&imprimitive, &a),
            Err(crate::Error::Input(_))
        ));
    }

    #[test]
    fn r1_examples() {
        assert_eq!(r1_of(13), (2, 2));
        assert_eq!(r1_of(2), (0, 0));
        assert_eq!(r1_of(8), (1, 0));
        // 9 = 0² + 3² is excluded because a must be positive.
        assert_eq!(r1_of(9), (0, 0));
        assert_eq!(r1_of(1), (0, 0));
    }

    #[test]
    fn pointwise_bounds() {
        for n in 1..=100_000u64 {
            let (r1, r1s) = r1_of(n);
            let r0 = r0(n);
            assert!(r1s <= r1);
            assert!(r1 as u64 <= r0, "n = {n}");
            assert!(r0 <= divisor_count(n), "n = {n}");
        }
    }

    fn coprime_pair() -> impl Strategy<Value = (u64, u64)> {
        (1u64..=10_000, 1u64..=10_000).prop_filter("coprime", |&(m, n)| gcd(m, n) == 1)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn r0_star_is_multiplicative((m, n) in coprime_pair()) {
            prop_assert_eq!(r0_star(m * n), r0_star(m) * r0_star(n));
        }
    }

    fn coprime_sums_of_squares() -> impl Strategy<Value = (u64, u64)> {
        let support: Vec<u64> = (2..=10_000).filter(|&n| r0_star(n) > 0).collect();
        let pick = proptest::sample::select(support);
        (pick.clone(), pick).prop_filter("coprime", |&(m, n)| gcd(m, n) == 1)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn composition_covers_each_rep_twice((m, n) in coprime_sums_of_squares()) {
            let mut seen = std::collections::BTreeMap::new();
            for rm in enumerate_primitive_reps(m) {
                for rn in enumerate_primitive_reps(n) {
                    for rep in compose(&rm, &rn).unwrap() {
                        prop_assert_eq!(rep.n, m * n);
                        *seen.entry((rep.a, rep.b)).or_insert(0u32) += 1;
                    }
                }
            }
            let target = enumerate_primitive_reps(m * n);
            prop_assert_eq!(seen.len(), target.len());
            for rep in target {
                prop_assert_eq!(seen.get(&(rep.a, rep.b)).copied(), Some(2));
            }
        }
    }
}
