//! Complex banded LU with partial pivoting (LAPACK gbtrf/gbtrs layout).
//!
//! Used for the phonon-pair blocks of the drive-free preconditioner, whose
//! couplings never reach beyond a fixed number of sub/superdiagonals.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// Column-major band storage, ldab = 2*kl + ku + 1 rows per column;
    /// A[i][j] lives at ab[j*ldab + kl + ku + i - j].
    ab: Vec<C64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    /// Factor a banded matrix given by `entry(i, j)` (queried only inside the
    /// band). `kl`/`ku` are clipped to `n - 1`.
    pub fn factor<F>(n: usize, kl: usize, ku: usize, entry: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> C64,
    {
        let kl = kl.min(n.saturating_sub(1));
        let ku = ku.min(n.saturating_sub(1));
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![C64::new(0.0, 0.0); ldab * n];
        for j in 0..n {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            for i in lo..=hi {
                ab[j * ldab + kl + ku + i - j] = entry(i, j);
            }
        }
        let mut ipiv = vec![0usize; n];
        let band = |i: usize, j: usize| j * ldab + kl + ku + i - j;
        for j in 0..n {
            // pivot among rows j..=j+km in column j
            let km = kl.min(n - 1 - j);
            let mut p = 0usize;
            let mut best = ab[band(j, j)].norm();
            for q in 1..=km {
                let mag = ab[band(j + q, j)].norm();
                if mag > best {
                    best = mag;
                    p = q;
                }
            }
            if best < 1e-300 {
                return Err(Error::LinearSolve(format!(
                    "banded LU hit a zero pivot at column {j} of {n}"
                )));
            }
            ipiv[j] = j + p;
            let ce = (j + kl + ku).min(n - 1);
            if p > 0 {
                for c in j..=ce {
                    ab.swap(band(j, c), band(j + p, c));
                }
            }
            let pivot = ab[band(j, j)];
            for i in j + 1..=j + km {
                let m = ab[band(i, j)] / pivot;
                ab[band(i, j)] = m;
            }
            for c in j + 1..=ce {
                let u = ab[band(j, c)];
                if u != C64::new(0.0, 0.0) {
                    for i in j + 1..=j + km {
                        let m = ab[band(i, j)];
                        ab[band(i, c)] -= m * u;
                    }
                }
            }
        }
        Ok(BandedLu { n, kl, ku, ab, ipiv })
    }

    /// In-place solve of A x = b.
    pub fn solve(&self, b: &mut [C64]) {
        debug_assert_eq!(b.len(), self.n);
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let ldab = 2 * kl + ku + 1;
        let band = |i: usize, j: usize| j * ldab + kl + ku + i - j;
        // forward: apply pivots and L
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            let bj = b[j];
            for i in j + 1..=j + km {
                b[i] -= self.ab[band(i, j)] * bj;
            }
        }
        // backward: U
        for j in (0..n).rev() {
            b[j] /= self.ab[band(j, j)];
            let bj = b[j];
            let lo = j.saturating_sub(kl + ku);
            for i in lo..j {
                b[i] -= self.ab[band(i, j)] * bj;
            }
        }
    }
}
