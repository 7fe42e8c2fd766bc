//! Tridiagonal systems for the implicit solvers.

/// Tridiagonal matrix stored by diagonals; `sub[0]` and `sup[n-1]` are unused.
#[derive(Debug, Clone)]
pub(crate) struct Tridiag {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiag {
    pub fn zeros(n: usize) -> Self {
        Tridiag {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    /// Thomas algorithm; returns None on a vanishing pivot.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut piv = self.diag[0];
        if piv == 0.0 || !piv.is_finite() {
            return None;
        }
        c[0] = self.sup[0] / piv;
        d[0] = rhs[0] / piv;
        for i in 1..n {
            piv = self.diag[i] - self.sub[i] * c[i - 1];
            if piv == 0.0 || !piv.is_finite() {
                return None;
            }
            c[i] = self.sup[i] / piv;
            d[i] = (rhs[i] - self.sub[i] * d[i - 1]) / piv;
        }
        let mut x = d;
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= c[i] * next;
        }
        Some(x)
    }
}
