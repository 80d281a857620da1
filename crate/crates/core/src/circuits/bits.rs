use num_bigint::BigUint;
use num_traits::Zero;

use super::CircuitError;

/// Little-endian binary numeral.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bits(pub Vec<u8>);

impl Bits {
    pub fn is_canonical(&self) -> bool {
        match self.0.as_slice() {
            [] => false,
            [0] => true,
            bs => bs.iter().all(|&b| b <= 1) && bs.last() == Some(&1),
        }
    }

    fn check(&self) -> Result<(), CircuitError> {
        if self.is_canonical() {
            Ok(())
        } else {
            Err(CircuitError::NonCanonicalInput)
        }
    }
}

fn canonical(mut v: Vec<u8>) -> Bits {
    while v.len() > 1 && v.last() == Some(&0) {
        v.pop();
    }
    if v.is_empty() {
        v.push(0);
    }
    Bits(v)
}

pub fn to_bits(n: &BigUint) -> Bits {
    if n.is_zero() {
        return Bits(vec![0]);
    }
    Bits((0..n.bits()).map(|i| n.bit(i) as u8).collect())
}

pub fn from_bits(a: &Bits) -> BigUint {
    let mut n = BigUint::zero();
    for (i, &b) in a.0.iter().enumerate() {
        if b == 1 {
            n.set_bit(i as u64, true);
        }
    }
    n
}

fn add_raw(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(a.len().max(b.len()) + 1);
    let mut c = 0u8;
    for i in 0..a.len().max(b.len()) {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out.push(x ^ y ^ c);
        c = (x & y) | (c & (x ^ y));
    }
    out.push(c);
    out
}

/// Ripple-carry addition, bit by bit.
pub fn big_add(a: &Bits, b: &Bits) -> Result<Bits, CircuitError> {
    a.check()?;
    b.check()?;
    Ok(canonical(add_raw(&a.0, &b.0)))
}

/// Shift-and-add multiplication.
pub fn big_mul(a: &Bits, b: &Bits) -> Result<Bits, CircuitError> {
    a.check()?;
    b.check()?;
    let mut acc = vec![0u8];
    let mut shifted = a.0.clone();
    for &bit in &b.0 {
        if bit == 1 {
            acc = canonical(add_raw(&acc, &shifted)).0;
        }
        shifted.insert(0, 0);
    }
    Ok(canonical(acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_plus_one() {
        assert_eq!(big_add(&Bits(vec![1]), &Bits(vec![1])).unwrap(), Bits(vec![0, 1]));
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(to_bits(&BigUint::zero()), Bits(vec![0]));
        assert_eq!(to_bits(&BigUint::from(6u32)), Bits(vec![0, 1, 1]));
        assert_eq!(big_add(&Bits(vec![0, 0]), &Bits(vec![1])), Err(CircuitError::NonCanonicalInput));
        assert_eq!(big_mul(&Bits(vec![0]), &Bits(vec![1, 1])).unwrap(), Bits(vec![0]));
    }
}
