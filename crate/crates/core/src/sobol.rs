//! Sobol low-discrepancy sequence.
//!
//! Direction numbers are the Joe–Kuo `new-joe-kuo-6.21201` set for the first
//! 32 dimensions; dimension 1 is the van der Corput sequence. Points are
//! produced in Gray-code order, so index 1 is `0.5` in every coordinate and
//! the first coordinate runs `0.5, 0.75, 0.25, 0.375, ...`.

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};

const BITS: usize = 32;

/// `(degree s, polynomial coefficients a, initial m_1..m_s)` for dimensions 2..=32.
const JOE_KUO: [(u32, u32, &[u32]); 31] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
    (6, 19, &[1, 1, 1, 15, 7, 5]),
    (6, 22, &[1, 3, 1, 15, 13, 25]),
    (6, 25, &[1, 1, 5, 5, 19, 61]),
    (7, 1, &[1, 3, 7, 11, 23, 15, 103]),
    (7, 4, &[1, 3, 7, 13, 13, 15, 69]),
    (7, 7, &[1, 1, 3, 13, 7, 35, 63]),
    (7, 8, &[1, 3, 5, 9, 1, 25, 53]),
    (7, 14, &[1, 3, 1, 13, 9, 35, 107]),
    (7, 19, &[1, 3, 1, 5, 27, 61, 31]),
    (7, 21, &[1, 1, 5, 11, 19, 41, 61]),
    (7, 28, &[1, 3, 5, 3, 3, 13, 69]),
    (7, 31, &[1, 1, 7, 13, 1, 19, 1]),
    (7, 32, &[1, 3, 7, 5, 13, 19, 59]),
    (7, 37, &[1, 1, 3, 9, 25, 29, 41]),
    (7, 41, &[1, 3, 5, 13, 23, 1, 55]),
    (7, 42, &[1, 3, 7, 3, 13, 59, 17]),
];

/// Highest dimension with built-in direction numbers.
pub const MAX_DIMENSION: usize = JOE_KUO.len() + 1;

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (s, a, m) = JOE_KUO[dim - 1];
    let s = s as usize;
    for k in 0..s {
        v[k] = m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for l in 1..s {
            if (a >> (s - 1 - l)) & 1 == 1 {
                x ^= v[k - l];
            }
        }
        v[k] = x;
    }
    v
}

/// Stateless Sobol generator over `dim` coordinates.
#[derive(Clone, Debug)]
pub struct Sobol {
    directions: Vec<[u32; BITS]>,
}

impl Sobol {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(domain!("Sobol dimension must be >= 1"));
        }
        if dim > MAX_DIMENSION {
            return Err(Error::UnsupportedDimension { requested: dim, max: MAX_DIMENSION });
        }
        Ok(Self { directions: (0..dim).map(direction_numbers).collect() })
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    /// The point with sequence index `index` (Gray-code order).
    pub fn point(&self, index: u32) -> Vec<f64> {
        let gray = index ^ (index >> 1);
        self.directions
            .iter()
            .map(|v| {
                let mut x = 0u32;
                let mut bits = gray;
                while bits != 0 {
                    let k = bits.trailing_zeros() as usize;
                    x ^= v[k];
                    bits &= bits - 1;
                }
                f64::from(x) / 4_294_967_296.0
            })
            .collect()
    }
}

/// `n` points of the `d`-dimensional sequence starting at index `skip`.
///
/// `skip` must be at least 1: index 0 is the all-zeros corner.
pub fn sobol_points(d: usize, n: usize, skip: usize) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(domain!("Sobol point count must be >= 1"));
    }
    if skip == 0 {
        return Err(domain!("Sobol skip must be >= 1 (index 0 is the all-zeros point)"));
    }
    let last = skip
        .checked_add(n - 1)
        .filter(|&last| last <= u32::MAX as usize)
        .ok_or_else(|| domain!("Sobol index range exceeds 2^32"))?;
    let sobol = Sobol::new(d)?;
    Ok((skip..=last).map(|i| sobol.point(i as u32)).collect())
}
