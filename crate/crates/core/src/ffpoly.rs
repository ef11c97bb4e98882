//! Prime utilities and polynomial functions over the prime field `Z_p`.

use crate::error::{Error, Result};

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve primes as witnesses are
/// sufficient for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Least prime `p >= n`.
pub fn next_prime(n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::invalid(format!("next_prime needs n >= 2, got {n}")));
    }
    let mut p = n;
    while !is_prime(p) {
        p = p
            .checked_add(1)
            .ok_or_else(|| Error::Capacity("prime search overflowed u64".into()))?;
    }
    Ok(p)
}

/// The `k`-th prime strictly greater than `n`.
pub fn kth_next_prime(n: u64, k: usize) -> Result<u64> {
    if k == 0 {
        return Err(Error::invalid("kth_next_prime needs k >= 1"));
    }
    if n < 2 {
        return Err(Error::invalid(format!("kth_next_prime needs n >= 2, got {n}")));
    }
    let mut p = n;
    for _ in 0..k {
        p = next_prime(p + 1)?;
    }
    Ok(p)
}

/// Least `r` with `r^k >= m`, by integer binary search.
pub fn ceil_integer_root(m: u64, k: u32) -> u64 {
    assert!(k >= 1, "root order must be positive");
    if m <= 1 || k == 1 {
        return m;
    }
    // r^k >= m, checked without overflow
    let reaches = |r: u64| -> bool {
        let mut acc: u128 = 1;
        for _ in 0..k {
            acc *= r as u128;
            if acc >= m as u128 {
                return true;
            }
        }
        acc >= m as u128
    };
    let (mut lo, mut hi) = (1u64, m);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// A polynomial function of degree at most `D` over `Z_p`, stored as its
/// coefficients `c_0, ..., c_D` in canonical residues `[0, p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyFn {
    modulus: u64,
    coeffs: Vec<u64>,
}

impl PolyFn {
    pub fn new(modulus: u64, coeffs: Vec<u64>) -> Result<Self> {
        if !is_prime(modulus) {
            return Err(Error::invalid(format!("modulus {modulus} is not prime")));
        }
        if coeffs.is_empty() {
            return Err(Error::invalid("a polynomial needs at least one coefficient"));
        }
        if coeffs.len() as u64 > modulus {
            return Err(Error::DegreeTooLarge {
                degree: coeffs.len() - 1,
                lprime: modulus,
            });
        }
        if let Some(&c) = coeffs.iter().find(|&&c| c >= modulus) {
            return Err(Error::invalid(format!("coefficient {c} not reduced mod {modulus}")));
        }
        Ok(Self { modulus, coeffs })
    }

    /// The polynomial whose coefficients are the base-`p` digits of `index`
    /// (least significant digit multiplies `x^0`).
    pub fn from_index(index: u64, degree: usize, modulus: u64) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(degree + 1);
        let mut rest = index;
        for _ in 0..=degree {
            coeffs.push(rest % modulus);
            rest /= modulus;
        }
        if rest != 0 {
            return Err(Error::invalid(format!(
                "index {index} needs more than {} base-{modulus} digits",
                degree + 1
            )));
        }
        Self::new(modulus, coeffs)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Nominal degree `D` (length of the coefficient list minus one).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Degree of the highest nonzero coefficient, 0 for constants.
    pub fn effective_degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0).unwrap_or(0)
    }

    /// Horner evaluation at `x`. Panics in debug builds when `x` is not a
    /// reduced residue; see [`poly_eval`] for the checked form.
    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        debug_assert!(x < self.modulus);
        self.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| (mul_mod(acc, x, self.modulus) + c) % self.modulus)
    }
}

pub fn poly_eval(p: &PolyFn, x: u64) -> Result<u64> {
    if x >= p.modulus {
        return Err(Error::invalid(format!("point {x} outside Z_{}", p.modulus)));
    }
    Ok(p.eval(x))
}

/// All `p^(D+1)` polynomials of degree at most `D`, in mode-index order.
pub fn enumerate_polys(degree: usize, modulus: u64) -> Result<impl Iterator<Item = PolyFn>> {
    if degree as u64 >= modulus {
        return Err(Error::DegreeTooLarge {
            degree,
            lprime: modulus,
        });
    }
    if !is_prime(modulus) {
        return Err(Error::invalid(format!("modulus {modulus} is not prime")));
    }
    let count = (modulus as u128).pow(degree as u32 + 1);
    if count > u64::MAX as u128 {
        return Err(Error::Capacity(format!("{modulus}^{} polynomials", degree + 1)));
    }
    Ok((0..count as u64).map(move |m| PolyFn::from_index(m, degree, modulus).expect("index in range")))
}

/// Number of points `x < domain_size` where `p(x) == q(x)`.
pub fn count_intersections(p: &PolyFn, q: &PolyFn, domain_size: u64) -> Result<usize> {
    if p.modulus != q.modulus {
        return Err(Error::invalid("polynomials over different fields"));
    }
    if domain_size > p.modulus {
        return Err(Error::invalid(format!(
            "domain size {domain_size} exceeds field order {}",
            p.modulus
        )));
    }
    let n = p.coeffs.len().max(q.coeffs.len());
    let same = (0..n).all(|i| p.coeffs.get(i).unwrap_or(&0) == q.coeffs.get(i).unwrap_or(&0));
    if same {
        return Err(Error::invalid("intersection count of a polynomial with itself"));
    }
    Ok((0..domain_size).filter(|&x| p.eval(x) == q.eval(x)).count())
}
