use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Curve equation parameters for `y^2 = x^3 + ax + b (mod p)` together with
/// a generator point and its order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveParams {
    pub name: &'static str,
    pub a: BigUint,
    pub b: BigUint,
    pub p: BigUint,
    pub g: CurvePoint,
    /// Order of the generator `g` (order * g = infinity).
    pub order: BigUint,
}

/// A point on the curve, or the point at infinity (the group identity).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurvePoint {
    Infinity,
    Affine { x: BigUint, y: BigUint },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveError {
    /// Input point does not satisfy the curve equation.
    OffCurve,
    /// The point at infinity where a finite point is required.
    InfinityNotAllowed,
}

impl fmt::Display for CurveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveError::OffCurve => write!(f, "point is not on the curve"),
            CurveError::InfinityNotAllowed => write!(f, "point at infinity not allowed here"),
        }
    }
}

impl CurvePoint {
    pub fn affine(x: u64, y: u64) -> CurvePoint {
        CurvePoint::Affine {
            x: BigUint::from(x),
            y: BigUint::from(y),
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity)
    }
}

impl CurveParams {
    /// The Fig.-3 curve: `y^2 = x^3 + 7 (mod 17)`. The group has 18 points
    /// (17 finite plus infinity) and is cyclic; (6, 6) generates all of it.
    /// Small enough for exhaustive checks.
    pub fn toy17() -> CurveParams {
        CurveParams {
            name: "toy17",
            a: BigUint::zero(),
            b: BigUint::from(7u8),
            p: BigUint::from(17u8),
            g: CurvePoint::affine(6, 6),
            order: BigUint::from(18u8),
        }
    }

    /// A bigger toy profile: `y^2 = x^3 + 7 (mod 10007)`.
    /// Group order and generator were found by brute-force enumeration, which
    /// the test suite repeats. The order 10008 is composite, so this profile
    /// is for point arithmetic, not signing.
    pub fn toy10007() -> CurveParams {
        CurveParams {
            name: "toy10007",
            a: BigUint::zero(),
            b: BigUint::from(7u8),
            p: BigUint::from(10007u32),
            g: CurvePoint::affine(5, 566),
            order: BigUint::from(10008u32),
        }
    }

    /// Toy profile with a prime group order: `y^2 = x^3 + 7 (mod 9739)` has
    /// exactly 9631 points (prime), so every scalar is invertible and the
    /// ECDSA-style scheme is well-posed for every key and message. This is
    /// the default toy profile wherever signatures are involved.
    pub fn toy9739() -> CurveParams {
        CurveParams {
            name: "toy9739",
            a: BigUint::zero(),
            b: BigUint::from(7u8),
            p: BigUint::from(9739u32),
            g: CurvePoint::affine(5, 2479),
            order: BigUint::from(9631u32),
        }
    }

    /// secp256k1: `y^2 = x^3 + 7` over
    /// `p = 2^256 - 2^32 - 2^9 - 2^8 - 2^7 - 2^6 - 2^4 - 1`.
    pub fn secp256k1() -> CurveParams {
        let p = hex_uint("fffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc2f");
        let gx = hex_uint("79be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798");
        let gy = hex_uint("483ada7726a3c4655da4fbfc0e1108a8fd17b448a68554199c47d08ffb10d4b8");
        let order = hex_uint("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141");
        CurveParams {
            name: "secp256k1",
            a: BigUint::zero(),
            b: BigUint::from(7u8),
            p,
            g: CurvePoint::Affine { x: gx, y: gy },
            order,
        }
    }

    /// Select a profile by name; used by CLI configs.
    pub fn by_name(name: &str) -> Option<CurveParams> {
        match name {
            "toy17" => Some(CurveParams::toy17()),
            "toy10007" => Some(CurveParams::toy10007()),
            "toy9739" | "toy" => Some(CurveParams::toy9739()),
            "secp256k1" | "large" => Some(CurveParams::secp256k1()),
            _ => None,
        }
    }

    /// Byte width of a field element (length of p in bytes).
    pub fn field_width(&self) -> usize {
        (self.p.bits() as usize + 7) / 8
    }

    pub fn is_on_curve(&self, point: &CurvePoint) -> bool {
        match point {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => {
                if x >= &self.p || y >= &self.p {
                    return false;
                }
                let lhs = (y * y) % &self.p;
                let rhs = (x * x * x + &self.a * x + &self.b) % &self.p;
                lhs == rhs
            }
        }
    }

    pub fn check_on_curve(&self, point: &CurvePoint) -> Result<(), CurveError> {
        if self.is_on_curve(point) {
            Ok(())
        } else {
            Err(CurveError::OffCurve)
        }
    }

    /// Uncompressed SEC1-style serialization: `0x04 || x || y` with both
    /// coordinates padded to the field width. Infinity is the single byte 0.
    pub fn serialize_point(&self, point: &CurvePoint) -> Vec<u8> {
        match point {
            CurvePoint::Infinity => alloc::vec![0u8],
            CurvePoint::Affine { x, y } => {
                let w = self.field_width();
                let mut out = Vec::with_capacity(1 + 2 * w);
                out.push(0x04);
                out.extend_from_slice(&pad_be(x, w));
                out.extend_from_slice(&pad_be(y, w));
                out
            }
        }
    }

    pub fn deserialize_point(&self, bytes: &[u8]) -> Result<CurvePoint, CurveError> {
        if bytes == [0u8] {
            return Ok(CurvePoint::Infinity);
        }
        let w = self.field_width();
        if bytes.len() != 1 + 2 * w || bytes[0] != 0x04 {
            return Err(CurveError::OffCurve);
        }
        let x = BigUint::from_bytes_be(&bytes[1..1 + w]);
        let y = BigUint::from_bytes_be(&bytes[1 + w..]);
        let point = CurvePoint::Affine { x, y };
        self.check_on_curve(&point)?;
        Ok(point)
    }

    /// Enumerate every finite point of the curve. Intended for toy profiles;
    /// cost is O(p) time and memory.
    pub fn enumerate_points(&self) -> Vec<CurvePoint> {
        let p = u64::try_from(&self.p).expect("enumerate_points is for toy curves");
        let mut roots: Vec<Vec<u64>> = alloc::vec![Vec::new(); p as usize];
        for y in 0..p {
            let yy = mulmod(y, y, p);
            roots[yy as usize].push(y);
        }
        let a = u64::try_from(&self.a).unwrap();
        let b = u64::try_from(&self.b).unwrap();
        let mut points = Vec::new();
        for x in 0..p {
            let rhs = (mulmod(mulmod(x, x, p), x, p) + mulmod(a, x, p) + b) % p;
            for &y in &roots[rhs as usize] {
                points.push(CurvePoint::affine(x, y));
            }
        }
        points
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pad_be(n: &BigUint, width: usize) -> Vec<u8> {
    let bytes = n.to_bytes_be();
    let mut out = alloc::vec![0u8; width.saturating_sub(bytes.len())];
    out.extend_from_slice(&bytes);
    out
}

fn hex_uint(s: &str) -> BigUint {
    BigUint::parse_bytes(s.as_bytes(), 16).expect("valid hex constant")
}

/// Modular subtraction a - b (mod p).
fn submod(a: &BigUint, b: &BigUint, p: &BigUint) -> BigUint {
    if a >= b {
        (a - b) % p
    } else {
        p - ((b - a) % p)
    }
}

/// Modular inverse via extended Euclid. Returns None when gcd(a, m) != 1.
pub(crate) fn modinv(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    use num_bigint::Sign;
    if m.is_zero() {
        return None;
    }
    let mut r0 = BigInt::from_biguint(Sign::Plus, m.clone());
    let mut r1 = BigInt::from_biguint(Sign::Plus, a % m);
    let mut s0 = BigInt::zero();
    let mut s1 = BigInt::one();
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = core::mem::replace(&mut r1, r2);
        let s2 = &s0 - &q * &s1;
        s0 = core::mem::replace(&mut s1, s2);
    }
    if !r0.is_one() {
        return None;
    }
    let m_int = BigInt::from_biguint(Sign::Plus, m.clone());
    let s = ((s0 % &m_int) + &m_int) % &m_int;
    Some(s.to_biguint().unwrap())
}

/// Negate a point: the mirror over the x axis.
pub fn point_neg(point: &CurvePoint, params: &CurveParams) -> CurvePoint {
    match point {
        CurvePoint::Infinity => CurvePoint::Infinity,
        CurvePoint::Affine { x, y } => CurvePoint::Affine {
            x: x.clone(),
            y: if y.is_zero() {
                BigUint::zero()
            } else {
                &params.p - y
            },
        },
    }
}

/// The group law: chord rule for distinct points, tangent rule for doubling,
/// and the inverse pair summing to infinity.
pub fn point_add(
    p1: &CurvePoint,
    p2: &CurvePoint,
    params: &CurveParams,
) -> Result<CurvePoint, CurveError> {
    params.check_on_curve(p1)?;
    params.check_on_curve(p2)?;
    Ok(point_add_unchecked(p1, p2, params))
}

pub(crate) fn point_add_unchecked(
    p1: &CurvePoint,
    p2: &CurvePoint,
    params: &CurveParams,
) -> CurvePoint {
    let p = &params.p;
    let (x1, y1) = match p1 {
        CurvePoint::Infinity => return p2.clone(),
        CurvePoint::Affine { x, y } => (x, y),
    };
    let (x2, y2) = match p2 {
        CurvePoint::Infinity => return p1.clone(),
        CurvePoint::Affine { x, y } => (x, y),
    };
    let lambda = if x1 == x2 {
        if y1 != y2 || y1.is_zero() {
            // P + (-P) = infinity; also covers doubling a 2-torsion point.
            return CurvePoint::Infinity;
        }
        // Tangent rule: lambda = (3 x^2 + a) / (2 y).
        let num = (BigUint::from(3u8) * x1 * x1 + &params.a) % p;
        let den = (BigUint::from(2u8) * y1) % p;
        let inv = modinv(&den, p).expect("p prime and y != 0");
        (num * inv) % p
    } else {
        // Chord rule: lambda = (y2 - y1) / (x2 - x1).
        let num = submod(y2, y1, p);
        let den = submod(x2, x1, p);
        let inv = modinv(&den, p).expect("p prime and x1 != x2");
        (num * inv) % p
    };
    let x3 = submod(&((&lambda * &lambda) % p), &((x1 + x2) % p), p);
    let y3 = submod(&((&lambda * submod(x1, &x3, p)) % p), y1, p);
    CurvePoint::Affine { x: x3, y: y3 }
}

/// Scalar multiplication `m * P` by double-and-add: O(log m) group
/// operations, the same trick that verifies 16P with four doublings.
pub fn scalar_mul(
    m: &BigUint,
    point: &CurvePoint,
    params: &CurveParams,
) -> Result<CurvePoint, CurveError> {
    params.check_on_curve(point)?;
    let mut acc = CurvePoint::Infinity;
    let mut base = point.clone();
    let bits = m.bits();
    for i in 0..bits {
        if m.bit(i) {
            acc = point_add_unchecked(&acc, &base, params);
        }
        if i + 1 < bits {
            base = point_add_unchecked(&base, &base, params);
        }
    }
    Ok(acc)
}

/// Convenience for small scalars.
pub fn scalar_mul_u64(
    m: u64,
    point: &CurvePoint,
    params: &CurveParams,
) -> Result<CurvePoint, CurveError> {
    scalar_mul(&BigUint::from(m), point, params)
}

impl fmt::Display for CurvePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvePoint::Infinity => write!(f, "O"),
            CurvePoint::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

#[allow(dead_code)]
fn _unused(_: String) {}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn all_points_with_infinity(params: &CurveParams) -> Vec<CurvePoint> {
        let mut pts = params.enumerate_points();
        pts.push(CurvePoint::Infinity);
        pts
    }

    #[test]
    fn toy17_has_18_points() {
        let params = CurveParams::toy17();
        let pts = all_points_with_infinity(&params);
        assert_eq!(pts.len(), 18);
        for pt in &pts {
            assert!(params.is_on_curve(pt));
        }
    }

    #[test]
    fn toy17_group_closure_identity_inverse_exhaustive() {
        let params = CurveParams::toy17();
        let pts = all_points_with_infinity(&params);
        for p1 in &pts {
            // Identity element.
            assert_eq!(point_add(p1, &CurvePoint::Infinity, &params).unwrap(), *p1);
            // Inverse element.
            let neg = point_neg(p1, &params);
            assert_eq!(
                point_add(p1, &neg, &params).unwrap(),
                CurvePoint::Infinity
            );
            // Closure over all pairs.
            for p2 in &pts {
                let sum = point_add(p1, p2, &params).unwrap();
                assert!(pts.contains(&sum), "{p1} + {p2} = {sum} escaped the group");
            }
        }
    }

    #[test]
    fn toy17_associativity_sampled_triples() {
        let params = CurveParams::toy17();
        let pts = all_points_with_infinity(&params);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let a = &pts[rng.gen_range(0..pts.len())];
            let b = &pts[rng.gen_range(0..pts.len())];
            let c = &pts[rng.gen_range(0..pts.len())];
            let left = point_add(&point_add(a, b, &params).unwrap(), c, &params).unwrap();
            let right = point_add(a, &point_add(b, c, &params).unwrap(), &params).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn toy_generator_order_matches_brute_force() {
        for params in [
            CurveParams::toy17(),
            CurveParams::toy10007(),
            CurveParams::toy9739(),
        ] {
            // Brute-force iteration: add g to itself until infinity returns.
            let mut acc = params.g.clone();
            let mut order = 1u64;
            while acc != CurvePoint::Infinity {
                acc = point_add(&acc, &params.g, &params).unwrap();
                order += 1;
            }
            assert_eq!(BigUint::from(order), params.order, "{}", params.name);
            // The stated order must send g to infinity via scalar_mul too.
            assert_eq!(
                scalar_mul(&params.order, &params.g, &params).unwrap(),
                CurvePoint::Infinity
            );
        }
    }

    #[test]
    fn toy10007_generator_has_maximal_order() {
        // The generator order must equal the full group size, found by
        // enumeration, so that it generates the whole (cyclic) group.
        let params = CurveParams::toy10007();
        let group_size = params.enumerate_points().len() as u64 + 1;
        assert_eq!(BigUint::from(group_size), params.order);
    }

    #[test]
    fn toy9739_order_is_group_size_and_prime() {
        let params = CurveParams::toy9739();
        let group_size = params.enumerate_points().len() as u64 + 1;
        assert_eq!(BigUint::from(group_size), params.order);
        // Primality by trial division; 9631 is small.
        let n = 9631u64;
        assert!((2..).take_while(|d| d * d <= n).all(|d| n % d != 0));
    }

    #[test]
    fn scalar_mul_matches_repeated_addition_up_to_50() {
        let params = CurveParams::toy17();
        let mut acc = CurvePoint::Infinity;
        for m in 0..=50u64 {
            assert_eq!(scalar_mul_u64(m, &params.g, &params).unwrap(), acc);
            acc = point_add(&acc, &params.g, &params).unwrap();
        }
    }

    #[test]
    fn sixteen_p_via_four_doublings() {
        let params = CurveParams::toy10007();
        let p1 = &params.g;
        // 2P, 4P = 2(2P), 8P = 2(4P), 16P = 2(8P): four point additions.
        let p2 = point_add(p1, p1, &params).unwrap();
        let p4 = point_add(&p2, &p2, &params).unwrap();
        let p8 = point_add(&p4, &p4, &params).unwrap();
        let p16 = point_add(&p8, &p8, &params).unwrap();
        // Equals P added 16 times.
        let mut acc = CurvePoint::Infinity;
        for _ in 0..16 {
            acc = point_add(&acc, p1, &params).unwrap();
        }
        assert_eq!(p16, acc);
        assert_eq!(scalar_mul_u64(16, p1, &params).unwrap(), p16);
    }

    #[test]
    fn zero_scalar_gives_infinity() {
        let params = CurveParams::toy17();
        assert_eq!(
            scalar_mul_u64(0, &params.g, &params).unwrap(),
            CurvePoint::Infinity
        );
    }

    #[test]
    fn off_curve_points_rejected() {
        let params = CurveParams::toy17();
        let bad = CurvePoint::affine(2, 3);
        assert!(!params.is_on_curve(&bad));
        assert_eq!(
            point_add(&bad, &params.g, &params),
            Err(CurveError::OffCurve)
        );
        assert_eq!(
            scalar_mul_u64(3, &bad, &params),
            Err(CurveError::OffCurve)
        );
    }

    #[test]
    fn secp256k1_generator_sanity() {
        let params = CurveParams::secp256k1();
        assert!(params.is_on_curve(&params.g));
        // Well-known doubling of the secp256k1 generator.
        let two_g = point_add(&params.g, &params.g, &params).unwrap();
        let expect = CurvePoint::Affine {
            x: hex_uint("c6047f9441ed7d6d3045406e95c07cd85c778e4b8cef3ca7abac09b95c709ee5"),
            y: hex_uint("1ae168fea63dc339a3c58419466ceaeef7f632653266d0e1236431a950cfe52a"),
        };
        assert_eq!(two_g, expect);
        // order * g = infinity.
        assert_eq!(
            scalar_mul(&params.order, &params.g, &params).unwrap(),
            CurvePoint::Infinity
        );
    }

    #[test]
    fn point_serialization_round_trip() {
        let params = CurveParams::secp256k1();
        let pt = scalar_mul_u64(12345, &params.g, &params).unwrap();
        let bytes = params.serialize_point(&pt);
        assert_eq!(bytes.len(), 65);
        assert_eq!(params.deserialize_point(&bytes).unwrap(), pt);
        let inf = params.serialize_point(&CurvePoint::Infinity);
        assert_eq!(params.deserialize_point(&inf).unwrap(), CurvePoint::Infinity);
    }
}
