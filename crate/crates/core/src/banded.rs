//! Symmetric positive-definite banded matrices: LDLᵀ factorization, solves,
//! and the entries of the inverse that fall inside the band.

/// Lower band storage: `rows[i][k]` holds `M[i][i - k]` for `k = 0..=bandwidth`.
#[derive(Debug, Clone)]
pub(crate) struct SymBanded {
    bandwidth: usize,
    rows: Vec<Vec<f64>>,
}

impl SymBanded {
    pub(crate) fn zeros(n: usize, bandwidth: usize) -> Self {
        SymBanded {
            bandwidth,
            rows: vec![vec![0.0; bandwidth + 1]; n],
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.rows.len()
    }

    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k > self.bandwidth {
            0.0
        } else {
            self.rows[hi][k]
        }
    }

    pub(crate) fn add(&mut self, i: usize, j: usize, value: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        assert!(k <= self.bandwidth, "entry ({i}, {j}) outside band");
        self.rows[hi][k] += value;
    }

    /// `self + scale * other`, both with the same shape.
    pub(crate) fn add_scaled(&self, other: &SymBanded, scale: f64) -> SymBanded {
        assert_eq!(self.len(), other.len());
        assert_eq!(self.bandwidth, other.bandwidth);
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + scale * y).collect())
            .collect();
        SymBanded {
            bandwidth: self.bandwidth,
            rows,
        }
    }

    /// Returns `None` when a pivot is not strictly positive.
    pub(crate) fn factor(&self) -> Option<LdlBanded> {
        let n = self.len();
        let p = self.bandwidth;
        let mut lower = vec![vec![0.0; p + 1]; n];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let first = i.saturating_sub(p);
            for j in first..i {
                let mut acc = self.rows[i][i - j];
                for s in first.max(j.saturating_sub(p))..j {
                    acc -= lower[i][i - s] * lower[j][j - s] * diag[s];
                }
                lower[i][i - j] = acc / diag[j];
            }
            let mut d = self.rows[i][0];
            for s in first..i {
                d -= lower[i][i - s] * lower[i][i - s] * diag[s];
            }
            if d.is_nan() || d <= 0.0 {
                return None;
            }
            diag[i] = d;
        }
        Some(LdlBanded {
            bandwidth: p,
            lower,
            diag,
        })
    }
}

/// `M = L D Lᵀ` with unit lower-triangular banded `L`.
#[derive(Debug, Clone)]
pub(crate) struct LdlBanded {
    bandwidth: usize,
    /// `lower[i][k] = L[i][i - k]` for `k >= 1`.
    lower: Vec<Vec<f64>>,
    diag: Vec<f64>,
}

impl LdlBanded {
    fn l(&self, i: usize, j: usize) -> f64 {
        self.lower[i][i - j]
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let p = self.bandwidth;
        let mut x = rhs.to_vec();
        for i in 0..n {
            for j in i.saturating_sub(p)..i {
                x[i] -= self.l(i, j) * x[j];
            }
        }
        for (xi, d) in x.iter_mut().zip(&self.diag) {
            *xi /= d;
        }
        for i in (0..n).rev() {
            for k in i + 1..(i + p + 1).min(n) {
                x[i] -= self.l(k, i) * x[k];
            }
        }
        x
    }

    /// Entries of `M⁻¹` within the band (Hutchinson–de Hoog recursion).
    pub(crate) fn inverse_band(&self) -> SymBanded {
        let n = self.diag.len();
        let p = self.bandwidth;
        let mut inv = SymBanded::zeros(n, p);
        for i in (0..n).rev() {
            let end = (i + p + 1).min(n);
            for j in (i + 1..end).rev() {
                let mut acc = 0.0;
                for k in i + 1..end {
                    acc -= self.l(k, i) * inv.get(k, j);
                }
                inv.rows[j][j - i] = acc;
            }
            let mut acc = 1.0 / self.diag[i];
            for k in i + 1..end {
                acc -= self.l(k, i) * inv.get(k, i);
            }
            inv.rows[i][0] = acc;
        }
        inv
    }
}
