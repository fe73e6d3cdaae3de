//! Small exact linear-algebra kernel over arbitrary-precision rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;
pub type Matrix = Vec<Vec<Rational>>;

/// `num / den` as an exact rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `2^{-exp}`.
pub fn dyadic(exp: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << exp as usize)
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect()
}

/// Row vector times matrix.
pub fn vec_mat(v: &[Rational], m: &[Vec<Rational>]) -> Vec<Rational> {
    let cols = m.first().map_or(0, Vec::len);
    let mut out = vec![Rational::zero(); cols];
    for (vi, row) in v.iter().zip(m) {
        if vi.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(row) {
            if !x.is_zero() {
                *o += vi * x;
            }
        }
    }
    out
}

/// Matrix times column vector.
pub fn mat_vec(m: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .filter(|(x, y)| !x.is_zero() && !y.is_zero())
                .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
        })
        .collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn sum(v: &[Rational]) -> Rational {
    v.iter().fold(Rational::zero(), |acc, x| acc + x)
}

/// Determinant by Gaussian elimination with nonzero pivoting.
pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Matrix = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for c in col..n {
                let sub = &factor * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    det
}

/// Determinant of the principal submatrix on the given index set.
pub fn principal_minor(m: &[Vec<Rational>], indices: &[usize]) -> Rational {
    let sub: Matrix = indices
        .iter()
        .map(|&i| indices.iter().map(|&j| m[i][j].clone()).collect())
        .collect();
    determinant(&sub)
}

/// Solves `a · x = b` for square nonsingular `a`. Returns `None` when `a`
/// is singular.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(pivot, col);
        let p = aug[col][col].clone();
        for c in col..=n {
            aug[col][c] = &aug[col][c] / &p;
        }
        for r in 0..n {
            if r == col || aug[r][col].is_zero() {
                continue;
            }
            let factor = aug[r][col].clone();
            for c in col..=n {
                let sub = &factor * &aug[col][c];
                aug[r][c] -= sub;
            }
        }
    }
    Some(aug.into_iter().map(|mut r| r.pop().expect("augmented column")).collect())
}

pub fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn is_nonnegative(x: &Rational) -> bool {
    !x.is_negative()
}
