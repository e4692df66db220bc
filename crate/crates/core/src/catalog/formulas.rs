//! Closed-form field discriminants for quadratic and cyclic quartic fields and
//! the small minimality searches built on them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::BaseField;
use crate::exactfield::rational_to_string;
use crate::Factored;

/// n_r over Q(i), n_r/2 over Q.
pub fn code_rate(base: BaseField, n_r: usize) -> BigRational {
    match base {
        BaseField::Qi => BigRational::from_integer(n_r.into()),
        BaseField::Q => BigRational::new(n_r.into(), 2.into()),
    }
}

fn is_squarefree(n: i64) -> bool {
    let n = n.unsigned_abs();
    if n == 0 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % (d * d) == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Discriminant of Q(sqrt d): d when d = 1 mod 4, else 4d.
pub fn quadratic_discriminant(d: i64) -> Result<i64, String> {
    if d == 0 || d == 1 || !is_squarefree(d) {
        return Err(format!("{d} is not a square-free integer other than 0, 1"));
    }
    Ok(if d.rem_euclid(4) == 1 { d } else { 4 * d })
}

/// Branch of the quartic discriminant formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuarticCase {
    /// D even
    I,
    /// D and B odd
    II,
    /// D odd, B even, A+B = 3 mod 4
    III,
    /// D odd, B even, A+B = 1 mod 4, A = +-C mod 4
    IV,
}

impl QuarticCase {
    pub fn label(self) -> &'static str {
        match self {
            QuarticCase::I => "i",
            QuarticCase::II => "ii",
            QuarticCase::III => "iii",
            QuarticCase::IV => "iv",
        }
    }
}

/// Discriminant of the cyclic quartic field Q(sqrt(A(D + B sqrt D))) with
/// D = B^2 + C^2. `Ok(None)` when no branch applies.
pub fn quartic_cyclic_discriminant(a: i64, b: i64, c: i64, d: i64) -> Result<Option<(i128, QuarticCase)>, String> {
    if a % 2 == 0 || !is_squarefree(a) {
        return Err(format!("A = {a} must be odd and square-free"));
    }
    if b <= 0 || c <= 0 {
        return Err("B and C must be positive".into());
    }
    if d != b * b + c * c || !is_squarefree(d) {
        return Err(format!("D = {d} must equal B^2 + C^2 and be square-free"));
    }
    if a.gcd(&d) != 1 {
        return Err("A and D must be coprime".into());
    }
    let core = (a as i128).pow(2) * (d as i128).pow(3);
    let m4 = |x: i64| x.rem_euclid(4);
    let case = if d % 2 == 0 {
        Some(QuarticCase::I)
    } else if b % 2 == 1 {
        Some(QuarticCase::II)
    } else if m4(a + b) == 3 {
        Some(QuarticCase::III)
    } else if m4(a + b) == 1 && (m4(a) == m4(c) || m4(a) == m4(-c)) {
        Some(QuarticCase::IV)
    } else {
        None
    };
    Ok(case.map(|cs| {
        let f: i128 = match cs {
            QuarticCase::I => 1 << 8,
            QuarticCase::II => 1 << 6,
            QuarticCase::III => 1 << 4,
            QuarticCase::IV => 1,
        };
        (f * core, cs)
    }))
}

fn small_primes(limit: u64) -> Vec<u64> {
    (2..=limit).filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect()
}

fn legendre(a: i64, p: u64) -> i64 {
    let p_i = p as i64;
    let a = a.rem_euclid(p_i);
    if a == 0 {
        return 0;
    }
    let mut r: i64 = 1;
    let mut base = a;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % p_i;
        }
        base = base * base % p_i;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

/// Norms of the prime ideals of Q(sqrt D) lying over primes up to `limit`,
/// sorted, with one entry per prime ideal.
pub fn quadratic_prime_norms(d: i64, limit: u64) -> Vec<u64> {
    let disc = quadratic_discriminant(d).expect("square-free D");
    let mut out = Vec::new();
    for p in small_primes(limit) {
        let split = if disc % p as i64 == 0 {
            0
        } else if p == 2 {
            if disc.rem_euclid(8) == 1 {
                1
            } else {
                -1
            }
        } else {
            legendre(disc, p)
        };
        match split {
            0 => out.push(p),
            1 => {
                out.push(p);
                out.push(p);
            }
            _ => out.push(p * p),
        }
    }
    out.sort_unstable();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "Q-2")]
    Quadratic,
    #[serde(rename = "Q-2-2")]
    Quartic,
}

impl Family {
    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "Q-2" => Some(Family::Quadratic),
            "Q-2-2" => Some(Family::Quartic),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// [d] or [A, B, C, D]
    pub params: Vec<i64>,
    pub case: String,
    /// |disc(E/Q)|
    pub field_disc: String,
    /// |Nm disc(E/L)|
    pub relative_disc: String,
    pub smallest_prime_norms: [u64; 2],
    pub lambda: String,
    /// smallest admissible |Nm(gamma)|
    pub gamma_norm_floor: u64,
    /// lower bound on |Nm disc(O_nat/Z)|
    pub bound: Factored,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub family: Family,
    pub search_bound: i64,
    pub candidates: Vec<Candidate>,
    pub winner: Candidate,
    pub winner_unique: bool,
    pub matches_expected: bool,
    pub notes: String,
}

fn ceil_at_least_one(r: &BigRational) -> u64 {
    let c = r.ceil().to_integer();
    c.to_u64().unwrap_or(u64::MAX).max(1)
}

fn candidate(params: Vec<i64>, case: &str, field_disc: i128, l_disc: i128, primes: [u64; 2]) -> Candidate {
    // tower formula: disc(E/Q) = disc(L/Q)^2 * Nm disc(E/L)
    let field_disc = field_disc.abs();
    let rel = field_disc / (l_disc * l_disc);
    assert_eq!(rel * l_disc * l_disc, field_disc, "tower formula violated for {params:?}");
    let lambda = BigRational::new(BigInt::from(primes[0] * primes[1]), BigInt::from(rel));
    let g = ceil_at_least_one(&lambda);
    let fd = Factored::from_bigint(&BigInt::from(field_disc));
    let bound = fd.pow(2).mul(&Factored::from_u64(g).pow(2));
    Candidate {
        params,
        case: case.to_string(),
        field_disc: field_disc.to_string(),
        relative_disc: rel.to_string(),
        smallest_prime_norms: primes,
        lambda: rational_to_string(&lambda),
        gamma_norm_floor: g,
        bound,
    }
}

/// Search the quadratic (index 2 over Q) or cyclic quartic (index 2 over a real
/// quadratic L) family for the smallest natural-order discriminant bound.
pub fn enumerate_minimality(family: Family, bound: i64) -> Result<MinimalityReport, String> {
    if bound < 10 {
        return Err("search bound must be at least 10".into());
    }
    let mut cands = Vec::new();
    match family {
        Family::Quadratic => {
            for d in -bound..=bound {
                let Ok(disc) = quadratic_discriminant(d) else { continue };
                let case = if d == -3 {
                    "minimal"
                } else if matches!(d.rem_euclid(4), 2 | 3) {
                    "i"
                } else if d == 5 {
                    "iii"
                } else {
                    "ii"
                };
                // L = Q: the two smallest primes are 2 and 3
                cands.push(candidate(vec![d], case, disc as i128, 1, [2, 3]));
            }
        }
        Family::Quartic => {
            for d in 2..=bound {
                if !is_squarefree(d) {
                    continue;
                }
                let l_disc = quadratic_discriminant(d).unwrap() as i128;
                let norms = quadratic_prime_norms(d, 200);
                let primes = [norms[0], norms[1]];
                for b in 1..=d {
                    let c2 = d - b * b;
                    if c2 <= 0 {
                        break;
                    }
                    let c = (c2 as f64).sqrt().round() as i64;
                    if c * c != c2 {
                        continue;
                    }
                    for a in -bound..=bound {
                        if let Ok(Some((disc, cs))) = quartic_cyclic_discriminant(a, b, c, d) {
                            cands.push(candidate(vec![a, b, c, d], cs.label(), disc, l_disc, primes));
                        }
                    }
                }
            }
        }
    }
    if cands.is_empty() {
        return Err("no candidates".into());
    }
    let best = cands.iter().map(|c| c.bound.value()).min().unwrap();
    let winners: Vec<&Candidate> = cands.iter().filter(|c| c.bound.value() == best).collect();
    let winner = winners[0].clone();
    let (expected_params, expected_bound, notes) = match family {
        Family::Quadratic => (
            vec![-3],
            Factored::from_pairs(&[(2, 2), (3, 2)]),
            "bound = disc(E/Q)^2 * max(1, ceil(lambda))^2 with lambda = 6/|disc(E/Q)|",
        ),
        Family::Quartic => (
            vec![-1, 2, 1, 5],
            Factored::from_pairs(&[(2, 4), (5, 6)]),
            "bound = disc(E/Q)^2 * max(1, ceil(lambda))^2 with lambda = Nm(p1 p2)/Nm disc(E/L)",
        ),
    };
    let matches_expected = winners.len() == 1 && winner.params == expected_params && winner.bound == expected_bound;
    Ok(MinimalityReport {
        family,
        search_bound: bound,
        winner_unique: winners.len() == 1,
        candidates: cands,
        winner,
        matches_expected,
        notes: notes.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_examples() {
        assert_eq!(quadratic_discriminant(-3), Ok(-3));
        assert_eq!(quadratic_discriminant(5), Ok(5));
        assert_eq!(quadratic_discriminant(-1), Ok(-4));
        assert!(quadratic_discriminant(12).is_err());
    }

    #[test]
    fn quartic_examples() {
        assert_eq!(quartic_cyclic_discriminant(-1, 2, 1, 5).unwrap(), Some((125, QuarticCase::IV)));
        assert_eq!(quartic_cyclic_discriminant(1, 1, 1, 2).unwrap(), Some((1 << 11, QuarticCase::I)));
        assert_eq!(quartic_cyclic_discriminant(1, 1, 2, 5).unwrap(), Some((64 * 125, QuarticCase::II)));
        assert!(quartic_cyclic_discriminant(2, 1, 2, 5).is_err());
    }

    #[test]
    fn prime_norms_sqrt5() {
        assert_eq!(&quadratic_prime_norms(5, 20)[..3], &[4, 5, 9]);
    }
}
