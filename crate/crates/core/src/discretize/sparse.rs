//! Symmetric sparse matrices and a shifted inverse-iteration eigensolver for
//! the pencil `A x = σ M x`.

use crate::discretize::PencilEigen;
use crate::error::{Result, SpectraError};
use crate::types::TolerancePolicy;

/// Symmetric matrix in compressed row form, both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Triplet accumulator for [`SparseSym`]; duplicate entries are summed.
#[derive(Debug, Clone, Default)]
pub struct SparseBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseBuilder {
    pub fn new(n: usize) -> Self {
        SparseBuilder { n, entries: Vec::new() }
    }

    /// Add `v` at `(i, j)` and, off the diagonal, at `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i.min(j), i.max(j), v));
    }

    pub fn build(mut self) -> SparseSym {
        self.entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut upper: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for (i, j, v) in self.entries {
            match upper.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => upper.push((i, j, v)),
            }
        }
        let mut counts = vec![0usize; self.n + 1];
        for &(i, j, _) in &upper {
            counts[i + 1] += 1;
            if i != j {
                counts[j + 1] += 1;
            }
        }
        for k in 0..self.n {
            counts[k + 1] += counts[k];
        }
        let row_ptr = counts.clone();
        let mut fill = counts;
        let nnz = row_ptr[self.n];
        let mut cols = vec![0; nnz];
        let mut vals = vec![0.0; nnz];
        // lower-triangle entries of row r arrive in increasing column order
        // before the upper ones, since `upper` is sorted by (row, col)
        for &(i, j, v) in &upper {
            if i != j {
                cols[fill[j]] = i;
                vals[fill[j]] = v;
                fill[j] += 1;
            }
        }
        for &(i, j, v) in &upper {
            cols[fill[i]] = j;
            vals[fill[i]] = v;
            fill[i] += 1;
        }
        SparseSym { n: self.n, row_ptr, cols, vals }
    }
}

impl SparseSym {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[row.clone()].binary_search(&j) {
            Ok(k) => self.vals[row.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.apply(x, &mut y);
        y
    }

    /// `Σ_j |a_ij|` for `j ≠ i`.
    fn off_diagonal_row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).filter(|&k| self.cols[k] != i).map(|k| self.vals[k].abs()).sum())
            .collect()
    }

    /// Row sums of the matrix (the lumped form of a mass matrix).
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.vals[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum()).collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).all(|k| (self.vals[k] - self.get(self.cols[k], i)).abs() <= tol))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower bound on the smallest eigenvalue of `A x = σ M x` from Gershgorin
/// discs of both matrices.
fn pencil_lower_bound(a: &SparseSym, m: &SparseSym) -> f64 {
    let (ad, ao) = (a.diagonal(), a.off_diagonal_row_sums());
    let (md, mo) = (m.diagonal(), m.off_diagonal_row_sums());
    let g = ad.iter().zip(&ao).map(|(d, o)| d - o).fold(f64::INFINITY, f64::min);
    if g >= 0.0 {
        return 0.0;
    }
    let mass_min = md.iter().zip(&mo).map(|(d, o)| d - o).fold(f64::INFINITY, f64::min);
    // consistent P1 masses are diagonally dominant only weakly; fall back to
    // a quarter of the smallest diagonal
    let floor = if mass_min > 0.0 { mass_min } else { md.iter().cloned().fold(f64::INFINITY, f64::min) / 4.0 };
    g / floor
}

enum Solve {
    Converged(Vec<f64>),
    Indefinite,
    Stalled,
}

impl SparseSym {
    /// `self + c·other`, merging the two sparsity patterns.
    pub fn add_scaled(&self, other: &SparseSym, c: f64) -> SparseSym {
        let mut row_ptr = vec![0];
        let mut cols = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut vals = Vec::with_capacity(cols.capacity());
        for i in 0..self.n {
            let (mut p, pe) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let (mut q, qe) = (other.row_ptr[i], other.row_ptr[i + 1]);
            while p < pe || q < qe {
                let cp = if p < pe { self.cols[p] } else { usize::MAX };
                let cq = if q < qe { other.cols[q] } else { usize::MAX };
                if cp == cq {
                    cols.push(cp);
                    vals.push(self.vals[p] + c * other.vals[q]);
                    p += 1;
                    q += 1;
                } else if cp < cq {
                    cols.push(cp);
                    vals.push(self.vals[p]);
                    p += 1;
                } else {
                    cols.push(cq);
                    vals.push(c * other.vals[q]);
                    q += 1;
                }
            }
            row_ptr.push(cols.len());
        }
        SparseSym { n: self.n, row_ptr, cols, vals }
    }

    /// Apply the symmetric Gauss–Seidel preconditioner
    /// `((D + L) D⁻¹ (D + U))⁻¹` to `r`.
    fn sgs_solve(&self, diag: &[f64], r: &[f64], z: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut acc = r[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                if j >= i {
                    break;
                }
                acc -= self.vals[k] * z[j];
            }
            z[i] = acc / diag[i];
        }
        for i in (0..n).rev() {
            let mut acc = 0.0;
            for k in (self.row_ptr[i]..self.row_ptr[i + 1]).rev() {
                let j = self.cols[k];
                if j <= i {
                    break;
                }
                acc += self.vals[k] * z[j];
            }
            z[i] -= acc / diag[i];
        }
    }
}

/// Preconditioned conjugate gradients on the shifted operator `s = A − τM`.
/// A direction of non-positive curvature means `τ` is above the bottom of
/// the spectrum.
fn pcg(s: &SparseSym, b: &[f64], x0: Option<Vec<f64>>, rel_tol: f64, max_iter: usize) -> Solve {
    let n = b.len();
    let diag = s.diagonal();
    if diag.iter().any(|&d| !(d > 0.0)) {
        return Solve::Indefinite;
    }
    let mut ap = vec![0.0; n];
    let (mut x, mut r) = match x0 {
        Some(x0) => {
            s.apply(&x0, &mut ap);
            let r = b.iter().zip(&ap).map(|(b, a)| b - a).collect();
            (x0, r)
        }
        None => (vec![0.0; n], b.to_vec()),
    };
    let b_norm = dot(b, b).sqrt();
    if dot(&r, &r).sqrt() <= rel_tol * b_norm {
        return Solve::Converged(x);
    }
    let mut z = vec![0.0; n];
    s.sgs_solve(&diag, &r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        s.apply(&p, &mut ap);
        let curv = dot(&p, &ap);
        if !(curv > 0.0) {
            return Solve::Indefinite;
        }
        let alpha = rz / curv;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= rel_tol * b_norm {
            return Solve::Converged(x);
        }
        s.sgs_solve(&diag, &r, &mut z);
        let rz_new = dot(&r, &z);
        if !(rz_new > 0.0) {
            return Solve::Indefinite;
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Solve::Stalled
}

/// Smallest eigenpair of `A x = σ M x` (both symmetric, `M` positive
/// definite) by shifted inverse iteration with preconditioned
/// conjugate-gradient solves.
///
/// The shift starts at `shift_hint` or a Gershgorin lower bound, is lowered
/// whenever the shifted operator turns out indefinite or the iteration
/// settles on a sign-changing vector, and moves towards the Rayleigh
/// quotient once that has settled. The returned vector is `M`-normalized
/// with positive sum.
pub fn smallest_eig_sparse(a: &SparseSym, m: &SparseSym, shift_hint: Option<f64>, tol: &TolerancePolicy) -> Result<PencilEigen> {
    let tol = tol.validate()?;
    let n = a.dim();
    if n == 0 || m.dim() != n {
        return Err(SpectraError::InvalidMesh("pencil dimensions do not match".into()));
    }
    let bound = pencil_lower_bound(a, m);
    let scale = a.diagonal().iter().zip(m.diagonal()).map(|(a, m)| (a / m).abs()).fold(1.0, f64::max);
    let floor = bound - 1e-3 * scale.min(bound.abs().max(1.0));
    let mut tau = match shift_hint {
        Some(s) if s.is_finite() => s,
        _ => floor,
    };
    // every shift at or below `safe` gave a definite solve; `fail` did not
    let mut safe = floor.min(tau);
    let mut fail = f64::INFINITY;
    let cg_max = 20 * n + 100;

    let m_norm = |x: &[f64]| dot(x, &m.mul(x)).sqrt();
    let mut x = vec![1.0; n];
    let nx = m_norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut rho_prev = f64::NAN;
    let mut d_prev = f64::NAN;
    let mut lowered = 0;
    let mut iterations = 0;
    let mut shifted: Option<(f64, SparseSym)> = None;

    // distance of the next retreat below a failed shift; grows fourfold
    // per consecutive failure
    let mut backoff = 0.0f64;
    let retreat = |tau: f64, safe: f64, backoff: &mut f64| -> f64 {
        *backoff = (4.0 * *backoff).max(1e-3 * (tau.abs() + 1.0));
        (tau - *backoff).max(safe)
    };

    while iterations < tol.max_iterations {
        iterations += 1;
        if shifted.as_ref().is_none_or(|(t, _)| *t != tau) {
            shifted = Some((tau, a.add_scaled(m, -tau)));
        }
        let b = m.mul(&x);
        // y ≈ x / (ρ − τ) once the iteration has locked on
        let guess = (rho_prev.is_finite() && rho_prev > tau).then(|| x.iter().map(|v| v / (rho_prev - tau)).collect());
        let y = match pcg(&shifted.as_ref().unwrap().1, &b, guess, 1e-12, cg_max) {
            Solve::Converged(y) => y,
            Solve::Indefinite | Solve::Stalled => {
                lowered += 1;
                if lowered > 60 {
                    return Err(SpectraError::IndefiniteShift);
                }
                fail = fail.min(tau);
                if tau <= safe {
                    safe = tau - (safe.abs() + 1.0) * 2f64.powi(lowered);
                }
                tau = retreat(tau, safe, &mut backoff);
                rho_prev = f64::NAN;
                d_prev = f64::NAN;
                continue;
            }
        };
        let ny = m_norm(&y);
        x = y.into_iter().map(|v| v / ny).collect();
        if x.iter().sum::<f64>() < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        let ax = a.mul(&x);
        let mx = m.mul(&x);
        let rho = dot(&x, &ax);
        let res: f64 = ax.iter().zip(&mx).map(|(p, q)| (p - rho * q).powi(2)).sum::<f64>().sqrt();
        let ax_norm = dot(&ax, &ax).sqrt();
        if res <= tol.eig_rel_tol * ax_norm + 1e-12 {
            let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            if lo >= -1e-3 * hi {
                return Ok(PencilEigen { value: rho, vector: x, residual: res / ax_norm.max(1e-300), iterations });
            }
            // converged to a higher, sign-changing mode: restart below it
            lowered += 1;
            if lowered > 60 {
                return Err(SpectraError::IndefiniteShift);
            }
            fail = fail.min(tau);
            safe = floor.min(tau - 1e-3 * (tau.abs() + 1.0));
            tau = retreat(tau.min(rho), safe, &mut backoff);
            x = vec![1.0; n];
            let nx = m_norm(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            rho_prev = f64::NAN;
            d_prev = f64::NAN;
            continue;
        }
        safe = safe.max(tau);
        backoff = 0.0;
        if rho_prev.is_finite() && rho > tau {
            // ρ_k − λ₁ shrinks by a factor q² per step; two successive
            // decrements estimate the remaining distance
            let d = rho_prev - rho;
            let contraction = d / d_prev;
            let step = if d >= 0.0 && contraction.is_finite() && (0.0..0.9).contains(&contraction) {
                Some((3.0 * d * contraction / (1.0 - contraction)).max(1e-9 * (rho.abs() + 1.0)))
            } else if d.abs() <= 1e-3 * (rho - tau) {
                Some(0.01 * (rho - tau))
            } else {
                None
            };
            if let Some(step) = step {
                let mut candidate = rho - step;
                if candidate >= fail {
                    candidate = 0.5 * (tau + fail);
                }
                if candidate > tau {
                    tau = candidate;
                    d_prev = f64::NAN;
                    rho_prev = rho;
                    continue;
                }
            }
            d_prev = d;
        }
        rho_prev = rho;
    }
    Err(SpectraError::MaxIterations(iterations))
}
