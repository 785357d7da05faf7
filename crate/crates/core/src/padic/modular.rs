//! Integer arithmetic modulo prime powers below 2^127.

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `p^k`, panicking on overflow (callers keep `k` below the precision cap).
pub fn pow(p: u32, k: u32) -> u128 {
    (p as u128)
        .checked_pow(k)
        .expect("prime power exceeds u128")
}

pub fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    debug_assert!(m < 1 << 127);
    if let Some(prod) = a.checked_mul(b) {
        return prod % m;
    }
    let (hi, lo) = widening_mul(a % m, b % m);
    let mut r = hi % m;
    // Feed the low word in 32-bit chunks while the remainder stays small enough.
    for shift in (0..4).rev() {
        let chunk = (lo >> (32 * shift)) & 0xffff_ffff;
        r = shl_mod(r, 32, m);
        r = add_mod(r, chunk % m, m);
    }
    r
}

fn shl_mod(mut r: u128, bits: u32, m: u128) -> u128 {
    for _ in 0..bits {
        r <<= 1;
        if r >= m {
            r -= m;
        }
    }
    r
}

fn widening_mul(a: u128, b: u128) -> (u128, u128) {
    let mask = u64::MAX as u128;
    let (a0, a1) = (a & mask, a >> 64);
    let (b0, b1) = (b & mask, b >> 64);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & mask) + (p10 & mask);
    let lo = (p00 & mask) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

pub fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

pub fn sub_mod(a: u128, b: u128, m: u128) -> u128 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub fn pow_mod(mut base: u128, mut e: u128, m: u128) -> u128 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u128, m: u128) -> Option<u128> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m as i128) as u128)
}

/// Number of factors of `p` in `n` (`n` nonzero).
pub fn p_adic_order(mut n: u128, p: u32) -> u32 {
    let p = p as u128;
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

pub fn is_square_mod_prime(a: u64, p: u64) -> bool {
    let a = a % p;
    a == 0 || pow_mod(a as u128, ((p - 1) / 2) as u128, p as u128) == 1
}

pub fn smallest_nonresidue(p: u32) -> u32 {
    (2..p)
        .find(|&e| !is_square_mod_prime(e as u64, p as u64))
        .expect("odd prime has a non-residue")
}

/// Tonelli-Shanks square root modulo an odd prime.
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if !is_square_mod_prime(a, p) {
        return None;
    }
    let (p128, a128) = (p as u128, a as u128);
    let mut q = p - 1;
    let mut s = 0;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p).find(|&z| !is_square_mod_prime(z, p)).unwrap() as u128;
    let mut m = s;
    let mut c = pow_mod(z, q as u128, p128);
    let mut t = pow_mod(a128, q as u128, p128);
    let mut r = pow_mod(a128, ((q + 1) / 2) as u128, p128);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p128);
            i += 1;
        }
        let b = pow_mod(c, 1u128 << (m - i - 1), p128);
        m = i;
        c = mul_mod(b, b, p128);
        t = mul_mod(t, c, p128);
        r = mul_mod(r, b, p128);
    }
    Some(r as u64)
}

/// Square root of a unit modulo `p^k` by Newton iteration from a root mod `p`.
pub fn sqrt_mod_prime_power(a: u128, p: u32, k: u32) -> Option<u128> {
    let modulus = pow(p, k);
    let a = a % modulus;
    if a % p as u128 == 0 {
        return None;
    }
    let mut w = sqrt_mod_prime((a % p as u128) as u64, p as u64)? as u128;
    let half = inv_mod(2, modulus)?;
    let mut correct = 1u32;
    while correct < k {
        let winv = inv_mod(w, modulus)?;
        w = mul_mod(add_mod(w, mul_mod(a, winv, modulus), modulus), half, modulus);
        correct *= 2;
    }
    Some(w)
}
