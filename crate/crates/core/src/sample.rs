use crate::error::{invalid, Error, Result};

/// `n` labelled points `(X_i, Y_i)` in `R^d x {0,1}`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    dim: usize,
    xs: Vec<f64>,
    ys: Vec<u8>,
}

impl Sample {
    pub fn new(dim: usize, xs: Vec<f64>, ys: Vec<u8>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("sample dimension must be >= 1"));
        }
        if xs.len() != dim * ys.len() {
            return Err(Error::DimensionMismatch { expected: dim * ys.len(), got: xs.len() });
        }
        if ys.iter().any(|&y| y > 1) {
            return Err(invalid("labels must be 0 or 1"));
        }
        if xs.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sample coordinates must be finite"));
        }
        Ok(Self { dim, xs, ys })
    }

    /// Builds a sample from a list of points.
    pub fn from_points(points: &[Vec<f64>], ys: Vec<u8>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(invalid("points must share one dimension"));
        }
        Self::new(dim, points.concat(), ys)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.xs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.ys[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.ys
    }

    pub fn coords(&self) -> &[f64] {
        &self.xs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], u8)> + '_ {
        self.xs.chunks_exact(self.dim).zip(self.ys.iter().copied())
    }

    /// FNV-1a hash of the raw bytes; used to check that two arms of an
    /// experiment consumed the same sample.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |b: u8| {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        };
        for v in &self.xs {
            v.to_bits().to_le_bytes().into_iter().for_each(&mut eat);
        }
        self.ys.iter().copied().for_each(eat);
        h
    }
}
