//! Small-prime utilities. Everything here is deterministic trial division;
//! inputs are desk-scale.

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// Smallest prime `>= n`.
pub fn next_prime(n: u64) -> u64 {
    let mut p = n.max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// Prime factorisation as `(prime, multiplicity)` pairs in increasing order.
pub fn factorize(mut n: u128) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p: u128 = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((u64::try_from(n).expect("prime factor exceeds u64"), 1));
    }
    out
}

/// p-adic valuation of a non-zero integer.
pub fn valuation(mut n: u128, p: u64) -> u64 {
    let p = p as u128;
    let mut e = 0;
    while n != 0 && n.is_multiple_of(p) {
        n /= p;
        e += 1;
    }
    e
}

pub fn gcd(a: u128, b: u128) -> u128 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u128, b: u128) -> u128 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

#[cfg(test)]
mod primes_tests {
    use super::*;

    #[test]
    fn small_primes() {
        let ps: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime(2_147_483_647));
        assert!(!is_prime(2_147_483_649));
    }

    #[test]
    fn factor_roundtrip() {
        for n in 1u128..2000 {
            let prod: u128 = factorize(n).iter().map(|&(p, e)| (p as u128).pow(e as u32)).product();
            assert_eq!(prod, n);
        }
        assert_eq!(factorize(262144), vec![(2, 18)]);
        assert_eq!(factorize(900), vec![(2, 2), (3, 2), (5, 2)]);
    }

    #[test]
    fn next_prime_and_valuation() {
        assert_eq!(next_prime(8), 11);
        assert_eq!(next_prime(0), 2);
        assert_eq!(valuation(48, 2), 4);
        assert_eq!(valuation(48, 5), 0);
        assert_eq!(lcm(4, 6), 12);
    }
}
