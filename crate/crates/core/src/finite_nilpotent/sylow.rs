use super::heisenberg::HeisModuli;
use super::lattice::Lattice;
use super::quotient::FiniteQuotient;
use crate::error::Result;
use crate::supernatural::primes::{factorize, valuation};

fn p_part(n: i128, p: u64) -> i128 {
    (p as i128).pow(valuation(n as u128, p) as u32)
}

/// Sylow factors of a finite nilpotent quotient, by increasing prime. The
/// factor for `p` is again a congruence quotient, obtained by keeping the
/// `p`-parts of the moduli (CRT).
pub fn sylow_decompose(q: &FiniteQuotient) -> Result<Vec<(u64, FiniteQuotient)>> {
    let primes: Vec<u64> = factorize(q.order()).into_iter().map(|(p, _)| p).collect();
    primes
        .into_iter()
        .map(|p| {
            let factor = match q {
                FiniteQuotient::Heisenberg(m) => {
                    FiniteQuotient::Heisenberg(HeisModuli::new(p_part(m.ma, p), p_part(m.mb, p), p_part(m.mc, p))?)
                }
                FiniteQuotient::Abelian(l) => {
                    let pe = p_part(l.det() as i128, p);
                    FiniteQuotient::Abelian(l.join(&Lattice::diagonal(&vec![pe; l.rank()])?)?)
                }
            };
            Ok((p, factor))
        })
        .collect()
}

#[cfg(test)]
mod sylow_tests {
    use super::*;

    #[test]
    fn heisenberg_factors() {
        let q = FiniteQuotient::Heisenberg(HeisModuli::uniform(12).unwrap());
        let f = sylow_decompose(&q).unwrap();
        assert_eq!(
            f,
            vec![
                (2, FiniteQuotient::Heisenberg(HeisModuli::uniform(4).unwrap())),
                (3, FiniteQuotient::Heisenberg(HeisModuli::uniform(3).unwrap())),
            ]
        );
        let q8 = FiniteQuotient::Heisenberg(HeisModuli::uniform(8).unwrap());
        assert_eq!(sylow_decompose(&q8).unwrap(), vec![(2, q8.clone())]);
        assert!(sylow_decompose(&FiniteQuotient::Heisenberg(HeisModuli::uniform(1).unwrap())).unwrap().is_empty());
    }

    #[test]
    fn abelian_factors() {
        let q = FiniteQuotient::Abelian(Lattice::diagonal(&[6, 6]).unwrap());
        let f = sylow_decompose(&q).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0], (2, FiniteQuotient::Abelian(Lattice::diagonal(&[2, 2]).unwrap())));
        assert_eq!(f[1], (3, FiniteQuotient::Abelian(Lattice::diagonal(&[3, 3]).unwrap())));
    }
}
