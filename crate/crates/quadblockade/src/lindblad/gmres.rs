//! Preconditioned GMRES for the trace-replaced steady-state system.
//!
//! The preconditioner is the drive-free Liouvillian, which is block
//! lower-triangular over photon sectors (s, s') when they are ordered by
//! decreasing s + s': the only inter-sector coupling left after removing the
//! drive is the photon jump (s+1, s'+1) -> (s, s'). Its diagonal blocks are
//! solved exactly:
//!
//! * sector (0, 0) keeps the full mechanical dissipator and is factored as a
//!   banded system (couplings reach at most N_b + 1 off the diagonal);
//! * every other sector carries at least gamma_c/2 of photon damping, so the
//!   mechanical terms are dropped there and the block becomes a resolvent of
//!   a phonon-pair commutator, solved in the eigenbasis of the per-photon
//!   phonon Hamiltonians.
//!
//! The drive enters only through the outer GMRES iteration, so the result is
//! exact to the requested residual regardless of preconditioner quality.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{phonon_block, FockSpace, ModelParams};
use crate::sparse::ComplexOperator;

use super::banded::BandedLu;

/// Mechanical damping floor used inside the preconditioner so that the
/// (0, 0) block stays nonsingular even for gamma_m -> 0. Only convergence
/// speed depends on it, never the solution.
const GAMMA_M_FLOOR: f64 = 1e-3;

pub(crate) struct SectorPreconditioner {
    na: usize,
    nb: usize,
    delta_c: f64,
    gamma_c: f64,
    /// eigenvectors of the per-photon phonon blocks, stored complex
    q: Vec<DMatrix<C64>>,
    /// matching eigenvalues
    lam: Vec<Vec<f64>>,
    /// banded factorization of the (0, 0) sector
    zero_block: BandedLu,
    /// sectors in decreasing s + s' order
    order: Vec<(usize, usize)>,
}

impl SectorPreconditioner {
    pub fn new(params: &ModelParams, space: &FockSpace) -> Result<Self> {
        let na = space.dim_photon();
        let nb = space.dim_phonon();
        let gm = params.gamma_m.max(GAMMA_M_FLOOR * params.omega_m);
        let nth = params.n_th;

        let mut q = Vec::with_capacity(na);
        let mut lam = Vec::with_capacity(na);
        for s in 0..na {
            let eig = nalgebra::SymmetricEigen::new(phonon_block(params, s, nb));
            q.push(eig.eigenvectors.map(|v| C64::new(v, 0.0)));
            lam.push(eig.eigenvalues.iter().copied().collect());
        }

        // (0, 0) sector over the pair index j = mr + nb * mc:
        //   -i omega_m (mr - mc) on the diagonal, mechanical jumps at
        //   offsets +-(nb + 1), anticommutator damping on the diagonal.
        // Row 0 is pinned to make the block nonsingular; the outer system
        // carries the true trace constraint.
        let n2 = nb * nb;
        let wm = params.omega_m;
        let entry = move |i: usize, j: usize| -> C64 {
            if i == 0 {
                return if j == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            }
            let (mr, mc) = (i % nb, i / nb);
            if i == j {
                let damp = 0.5 * gm * ((nth + 1.0) * (mr + mc) as f64 + nth * (mr + mc + 2) as f64);
                return C64::new(-damp, -wm * (mr as f64 - mc as f64));
            }
            let (jr, jc) = (j % nb, j / nb);
            if jr == mr + 1 && jc == mc + 1 {
                return C64::new(gm * (nth + 1.0) * ((jr * jc) as f64).sqrt(), 0.0);
            }
            if mr > 0 && mc > 0 && jr == mr - 1 && jc == mc - 1 {
                return C64::new(gm * nth * ((mr * mc) as f64).sqrt(), 0.0);
            }
            C64::new(0.0, 0.0)
        };
        let zero_block = BandedLu::factor(n2, nb + 1, nb + 1, entry)?;

        let mut order: Vec<(usize, usize)> =
            (0..na).flat_map(|s| (0..na).map(move |sp| (s, sp))).collect();
        order.sort_by_key(|&(s, sp)| std::cmp::Reverse(s + sp));

        Ok(SectorPreconditioner {
            na,
            nb,
            delta_c: params.delta_c,
            gamma_c: params.gamma_c,
            q,
            lam,
            zero_block,
            order,
        })
    }

    /// z = M^{-1} y over the full vectorized space (column-major, D^2).
    pub fn apply(&self, y: &[C64], z: &mut [C64]) {
        let (na, nb) = (self.na, self.nb);
        let d = na * nb;
        let mut block = DMatrix::<C64>::zeros(nb, nb);
        for &(s, sp) in &self.order {
            // rhs block, minus the photon-jump feed from the already-solved
            // (s+1, s'+1) sector
            let feed = if s + 1 < na && sp + 1 < na {
                Some(self.gamma_c * (((s + 1) * (sp + 1)) as f64).sqrt())
            } else {
                None
            };
            for mc in 0..nb {
                for mr in 0..nb {
                    let mut v = y[(s * nb + mr) + d * (sp * nb + mc)];
                    if let Some(g) = feed {
                        v -= C64::new(g, 0.0)
                            * z[((s + 1) * nb + mr) + d * ((sp + 1) * nb + mc)];
                    }
                    block[(mr, mc)] = v;
                }
            }
            if s == 0 && sp == 0 {
                // banded solve with the pinned row: row 0 sees y directly
                let mut rhs: Vec<C64> = Vec::with_capacity(nb * nb);
                for mc in 0..nb {
                    for mr in 0..nb {
                        rhs.push(block[(mr, mc)]);
                    }
                }
                rhs[0] = y[0];
                self.zero_block.solve(&mut rhs);
                for mc in 0..nb {
                    for mr in 0..nb {
                        z[mr + d * mc] = rhs[mr + nb * mc];
                    }
                }
            } else {
                // spectral solve of -i(H_s X - X H_s') - c X = B
                let qt = self.q[s].adjoint();
                let tilde = &qt * &block * &self.q[sp];
                let shift_re = -0.5 * self.gamma_c * (s + sp) as f64;
                let shift_im = -self.delta_c * (s as f64 - sp as f64);
                let mut solved = tilde;
                for j in 0..nb {
                    for i in 0..nb {
                        let den = C64::new(
                            shift_re,
                            shift_im - (self.lam[s][i] - self.lam[sp][j]),
                        );
                        solved[(i, j)] /= den;
                    }
                }
                let back = &self.q[s] * &solved * self.q[sp].adjoint();
                for mc in 0..nb {
                    for mr in 0..nb {
                        z[(s * nb + mr) + d * (sp * nb + mc)] = back[(mr, mc)];
                    }
                }
            }
        }
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) struct GmresOutcome {
    pub x: Vec<C64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Right-preconditioned GMRES (no restart) on A x = b with optional warm
/// start. Returns a convergence error when `max_iter` Krylov vectors do not
/// reach `tol` (relative to the initial residual).
pub(crate) fn gmres(
    a: &ComplexOperator,
    precond: &SectorPreconditioner,
    b: &[C64],
    x0: Option<&[C64]>,
    tol: f64,
    max_iter: usize,
) -> Result<GmresOutcome> {
    let n = a.dim();
    let zero = C64::new(0.0, 0.0);

    let mut r0 = vec![zero; n];
    match x0 {
        Some(x0) => {
            a.matvec(x0, &mut r0);
            for (r, bi) in r0.iter_mut().zip(b) {
                *r = *bi - *r;
            }
        }
        None => r0.copy_from_slice(b),
    }
    let beta = norm2(&r0);
    let b_norm = norm2(b).max(1e-300);
    if beta / b_norm < tol {
        return Ok(GmresOutcome {
            x: x0.map(|x| x.to_vec()).unwrap_or_else(|| vec![zero; n]),
            iterations: 0,
            relative_residual: beta / b_norm,
        });
    }

    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut v0 = r0;
    for v in v0.iter_mut() {
        *v /= C64::new(beta, 0.0);
    }
    basis.push(v0);

    let mut hess: Vec<Vec<C64>> = Vec::new();
    let mut givens_c: Vec<C64> = Vec::new();
    let mut givens_s: Vec<C64> = Vec::new();
    let mut g = vec![C64::new(beta, 0.0)];
    let mut z = vec![zero; n];
    let mut w = vec![zero; n];
    let mut iterations = 0;
    let mut residual = beta;

    for j in 0..max_iter {
        iterations = j + 1;
        precond.apply(&basis[j], &mut z);
        a.matvec(&z, &mut w);

        let mut hj = Vec::with_capacity(j + 2);
        for i in 0..=j {
            let hij = dot(&basis[i], &w);
            hj.push(hij);
            for (wk, vk) in w.iter_mut().zip(basis[i].iter()) {
                *wk -= hij * vk;
            }
        }
        let h_last = norm2(&w);
        hj.push(C64::new(h_last, 0.0));

        for i in 0..j {
            let t = givens_c[i] * hj[i] + givens_s[i] * hj[i + 1];
            hj[i + 1] = -givens_s[i].conj() * hj[i] + givens_c[i] * hj[i + 1];
            hj[i] = t;
        }
        let (c, s) = {
            let (x, y) = (hj[j], hj[j + 1]);
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            if r == 0.0 {
                (C64::new(1.0, 0.0), zero)
            } else if x.norm() == 0.0 {
                (zero, C64::new(1.0, 0.0))
            } else {
                (C64::new(x.norm() / r, 0.0), (x / x.norm()) * y.conj() / r)
            }
        };
        givens_c.push(c);
        givens_s.push(s);
        let t = c * hj[j] + s * hj[j + 1];
        hj[j] = t;
        hj[j + 1] = zero;
        g.push(zero);
        let gj = g[j];
        g[j] = c * gj;
        g[j + 1] = -s.conj() * gj;
        residual = g[j + 1].norm();
        hess.push(hj);

        if residual / b_norm < tol || h_last < 1e-300 {
            break;
        }
        let mut v_next = w.clone();
        for v in v_next.iter_mut() {
            *v /= C64::new(h_last, 0.0);
        }
        basis.push(v_next);
    }

    if residual / b_norm >= tol {
        return Err(Error::Convergence {
            context: format!("GMRES stalled after {iterations} iterations"),
            prev: residual / b_norm,
            last: residual / b_norm,
        });
    }

    // back substitution for the Krylov coefficients
    let k = iterations;
    let mut yk = vec![zero; k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for j in i + 1..k {
            acc -= hess[j][i] * yk[j];
        }
        yk[i] = acc / hess[i][i];
    }
    let mut u = vec![zero; n];
    for j in 0..k {
        for (uk, vk) in u.iter_mut().zip(basis[j].iter()) {
            *uk += yk[j] * vk;
        }
    }
    let mut x = vec![zero; n];
    precond.apply(&u, &mut x);
    if let Some(x0) = x0 {
        for (xi, x0i) in x.iter_mut().zip(x0) {
            *xi += x0i;
        }
    }
    Ok(GmresOutcome { x, iterations, relative_residual: residual / b_norm })
}
