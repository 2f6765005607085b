use crate::elliptic_2d::CsrMatrix;

/// Inner product `<a, b>_W = a^T W b` on coefficient vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Euclidean,
    /// Diagonal weights, e.g. trapezoid weights on a 1D grid.
    Diagonal(Vec<f64>),
    /// Symmetric positive definite matrix, e.g. a P1 mass matrix.
    Matrix(CsrMatrix),
}

impl Metric {
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Metric::Diagonal(w) => a.iter().zip(b).zip(w).map(|((x, y), w)| x * y * w).sum(),
            Metric::Matrix(m) => m.inner(a, b),
        }
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.dot(a, a).max(0.0).sqrt()
    }

    /// `W v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Metric::Euclidean => v.to_vec(),
            Metric::Diagonal(w) => v.iter().zip(w).map(|(x, w)| x * w).collect(),
            Metric::Matrix(m) => m.matvec(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_agree_on_identity() {
        let a = [1.0, -2.0, 0.5];
        let b = [3.0, 1.0, 4.0];
        let e = Metric::Euclidean.dot(&a, &b);
        assert_eq!(Metric::Diagonal(vec![1.0; 3]).dot(&a, &b), e);
        assert_eq!(Metric::Matrix(CsrMatrix::identity(3)).dot(&a, &b), e);
        let d = Metric::Diagonal(vec![2.0, 1.0, 0.5]);
        assert_eq!(d.apply(&a), vec![2.0, -2.0, 0.25]);
        assert!((d.norm(&a) - (2.0f64 + 4.0 + 0.125).sqrt()).abs() < 1e-15);
    }
}
