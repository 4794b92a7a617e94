use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Dense `n × d` matrix of observations stored row-major.
///
/// Construction rejects empty input and non-finite entries, so every
/// `SampleSet` in circulation has `n ≥ 1`, `d ≥ 1` and finite data.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T> {
    data: Vec<T>,
    n: usize,
    d: usize,
}

impl<T: Scalar> SampleSet<T> {
    pub fn from_flat(data: Vec<T>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid(format!("sample set must be non-empty, got {n}×{d}")));
        }
        if data.len() != n * d {
            return Err(invalid(format!(
                "flat buffer has {} entries, expected {n}×{d}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(invalid(format!(
                "non-finite entry at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Self { data, n, d })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(invalid(format!(
                "row {bad} has {} columns, expected {d}",
                rows[bad].len()
            )));
        }
        let data = rows.iter().flatten().copied().collect();
        Self::from_flat(data, rows.len(), d)
    }

    /// One-dimensional sample set.
    pub fn univariate(values: &[T]) -> Result<Self> {
        Self::from_flat(values.to_vec(), values.len(), 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    /// Column `j` copied out.
    pub fn column(&self, j: usize) -> Vec<T> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Samples translated by `v` (each row gets `+ v`).
    pub fn translated(&self, v: &[T]) -> Result<Self> {
        crate::error::check_dim(self.d, v.len())?;
        let data = self
            .rows()
            .flat_map(|r| r.iter().zip(v).map(|(&x, &s)| x + s))
            .collect();
        Self::from_flat(data, self.n, self.d)
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::from_flat(self.data.iter().map(|&x| c * x).collect(), self.n, self.d)
    }

    pub fn mean(&self) -> Vec<T> {
        let mut acc = vec![T::zero(); self.d];
        for r in self.rows() {
            for (a, &x) in acc.iter_mut().zip(r) {
                *a = *a + x;
            }
        }
        let n = T::count(self.n);
        acc.into_iter().map(|a| a / n).collect()
    }

    /// Largest Euclidean row norm.
    pub fn max_row_norm(&self) -> T {
        self.rows()
            .map(crate::scalar::norm2)
            .fold(T::zero(), T::max)
    }

    pub(crate) fn set_row(&mut self, i: usize, values: &[T]) {
        self.data[i * self.d..(i + 1) * self.d].copy_from_slice(values);
    }

    /// Converts the entries to another scalar type.
    pub fn cast<U: Scalar>(&self) -> SampleSet<U> {
        SampleSet {
            data: self
                .data
                .iter()
                .map(|x| U::from_f64(x.to_f64_lossy()).unwrap_or_else(U::nan))
                .collect(),
            n: self.n,
            d: self.d,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(SampleSet::<f64>::from_flat(vec![], 0, 1).is_err());
        assert!(SampleSet::from_flat(vec![1.0, f64::NAN], 2, 1).is_err());
        assert!(SampleSet::from_flat(vec![1.0, f64::INFINITY], 1, 2).is_err());
        assert!(SampleSet::from_flat(vec![1.0, 2.0, 3.0], 2, 2).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = SampleSet::from_rows(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert!(err.to_string().contains("row 1"));
    }

    #[test]
    fn translation_and_mean() {
        let s = SampleSet::from_rows(&[vec![0.0, 0.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(s.mean(), vec![1.0, 2.0]);
        let t = s.translated(&[1.0, -1.0]).unwrap();
        assert_eq!(t.row(1), &[3.0, 3.0]);
        assert!(s.translated(&[1.0]).is_err());
    }
}
