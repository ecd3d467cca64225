//! Symmetric tridiagonal eigenvalue tools: Sturm-sequence bisection for a
//! single eigenvalue and shifted inverse iteration for its eigenvector, plus
//! a pivoting tridiagonal linear solver.

/// Symmetric tridiagonal matrix: `diag` of length n, `off` of length n-1.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n();
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            out[i] = v;
        }
    }

    /// Gershgorin upper bound on the spectrum.
    pub fn gershgorin_max(&self) -> f64 {
        let n = self.n();
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            hi = hi.max(self.diag[i] + r);
        }
        hi
    }

    /// Number of eigenvalues strictly below `lambda` (negative pivots of the
    /// LDL^T factorization of `A - lambda I`).
    pub fn sturm_count(&self, lambda: f64) -> usize {
        let n = self.n();
        let guard = 1e-300;
        let mut count = 0;
        let mut q = self.diag[0] - lambda;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let q_safe = if q.abs() < guard {
                if q < 0.0 {
                    -guard
                } else {
                    guard
                }
            } else {
                q
            };
            q = self.diag[i] - lambda - self.off[i - 1] * self.off[i - 1] / q_safe;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The k-th smallest eigenvalue (k = 0 is the smallest), by bisection.
    pub fn eigenvalue_by_index(&self, k: usize) -> f64 {
        let mut hi = self.gershgorin_max();
        let mut lo = {
            // Gershgorin lower bound.
            let n = self.n();
            let mut lo = f64::INFINITY;
            for i in 0..n {
                let mut r = 0.0;
                if i > 0 {
                    r += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    r += self.off[i].abs();
                }
                lo = lo.min(self.diag[i] - r);
            }
            lo
        };
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if self.sturm_count(mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
            // Converge to full relative precision of the eigenvalue itself.
            if hi - lo <= 1e-16 * mid.abs().max(1e-300) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// LU factorization with partial pivoting of a tridiagonal matrix
/// (one fill-in superdiagonal).
pub struct TridiagLu {
    n: usize,
    low: Vec<f64>,   // multipliers
    d: Vec<f64>,     // U main diagonal
    u1: Vec<f64>,    // U first superdiagonal
    u2: Vec<f64>,    // U second superdiagonal (fill-in)
    pivot: Vec<bool>// row swap performed at step i
}

impl TridiagLu {
    /// Factor `A - shift * I` for a symmetric tridiagonal `A`.
    pub fn factor(a: &SymTridiag, shift: f64) -> Self {
        let n = a.n();
        let mut d = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut low = vec![0.0; n];
        let mut pivot = vec![false; n];
        // Running values of the current pivot row.
        let mut cd = a.diag[0] - shift;
        let mut cu = if n > 1 { a.off[0] } else { 0.0 };
        for i in 0..n - 1 {
            let sub = a.off[i];
            let next_d = a.diag[i + 1] - shift;
            let next_u = if i + 2 < n { a.off[i + 1] } else { 0.0 };
            if sub.abs() > cd.abs() {
                pivot[i] = true;
                d[i] = sub;
                u1[i] = next_d;
                u2[i] = next_u;
                let m = cd / sub;
                low[i] = m;
                cd = cu - m * next_d;
                cu = -m * next_u;
            } else {
                d[i] = if cd == 0.0 { 1e-300 } else { cd };
                u1[i] = cu;
                u2[i] = 0.0;
                let m = sub / d[i];
                low[i] = m;
                cd = next_d - m * cu;
                cu = next_u;
            }
        }
        d[n - 1] = if cd == 0.0 { 1e-300 } else { cd };
        TridiagLu {
            n,
            low,
            d,
            u1,
            u2,
            pivot,
        }
    }

    /// Solve `(A - shift I) x = b`.
    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        x.copy_from_slice(b);
        for i in 0..n - 1 {
            if self.pivot[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.low[i] * x[i];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            if i + 1 < n {
                v -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                v -= self.u2[i] * x[i + 2];
            }
            let denom = if self.d[i] == 0.0 { 1e-300 } else { self.d[i] };
            x[i] = v / denom;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag {
            diag: vec![2.0; n],
            off: vec![-1.0; n - 1],
        }
    }

    #[test]
    fn sturm_counts_dirichlet_laplacian() {
        // Eigenvalues of tridiag(-1, 2, -1), n = 5: 2 - 2cos(k pi / 6).
        let a = laplacian(5);
        let evs: Vec<f64> = (1..=5)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 6.0).cos())
            .collect();
        for (k, &ev) in evs.iter().enumerate() {
            assert_eq!(a.sturm_count(ev - 1e-9), k);
            assert_eq!(a.sturm_count(ev + 1e-9), k + 1);
            let found = a.eigenvalue_by_index(k);
            assert!((found - ev).abs() < 1e-12, "k = {k}: {found} vs {ev}");
        }
    }

    #[test]
    fn lu_solves_shifted_system() {
        let a = laplacian(20);
        let shift = 0.1234;
        let lu = TridiagLu::factor(&a, shift);
        let b: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut x = vec![0.0; 20];
        lu.solve(&b, &mut x);
        // Residual check.
        let mut ax = vec![0.0; 20];
        a.mul(&x, &mut ax);
        for i in 0..20 {
            let r = ax[i] - shift * x[i] - b[i];
            assert!(r.abs() < 1e-10, "residual {r} at {i}");
        }
    }
}
