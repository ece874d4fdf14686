//! Dense linear-algebra kernels: a real nonsymmetric eigensolver
//! (Householder reduction to Hessenberg form followed by shifted double QR,
//! after the classic EISPACK/Jama routines), power iteration for the dominant
//! root of a nonnegative matrix, and small solve helpers.
//!
//! The eigensolver and the power iteration are deliberately independent
//! routes to the dominant eigenvalue; [`perron_root`] cross-checks one
//! against the other and refuses to answer when they disagree.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const EPS: f64 = 2.220446049250313e-16;

/// QR sweeps allowed per eigenvalue before the solver gives up.
const MAX_QR_ITER: usize = 120;

/// Eigendecomposition of a real square matrix. `values[k]` pairs with column
/// `k` of `vectors`; entries are sorted by modulus descending, ties broken by
/// real part descending, then imaginary part descending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub vectors: DMatrix<Complex64>,
}

/// Dominant-root result of [`perron_root`]. `vector` is the L1-normalized
/// limit of the power iteration; it is strictly positive whenever the input
/// matrix is.
#[derive(Debug, Clone)]
pub struct Perron {
    pub root: f64,
    pub vector: DVector<f64>,
}

fn eig_sort_indices(values: &[Complex64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (values[a], values[b]);
        y.norm()
            .partial_cmp(&x.norm())
            .unwrap()
            .then(y.re.partial_cmp(&x.re).unwrap())
            .then(y.im.partial_cmp(&x.im).unwrap())
    });
    idx
}

/// All eigenvalues of `m`, sorted by modulus descending (ties: real part
/// descending, then imaginary part descending).
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    Ok(eigen(m)?.values)
}

/// Full eigendecomposition of `m`. Eigenvectors are unit-scaled columns; for
/// a defective matrix the returned columns can be linearly dependent, which
/// callers detect through the conditioning of the eigenvector matrix.
pub fn eigen(m: &DMatrix<f64>) -> Result<Eigen> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigen expects a square matrix");
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }

    let mut h = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    orthes(&mut h, &mut v);

    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    hqr2(&mut h, &mut v, &mut d, &mut e)?;

    // Unpack the real Schur vectors into complex eigenvectors. A conjugate
    // pair (d[k] ± i e[k]) stores Re in column k and Im in column k+1.
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    let mut k = 0;
    while k < n {
        if e[k] == 0.0 {
            values.push(Complex64::new(d[k], 0.0));
            for i in 0..n {
                vectors[(i, k)] = Complex64::new(v[(i, k)], 0.0);
            }
            k += 1;
        } else {
            values.push(Complex64::new(d[k], e[k]));
            values.push(Complex64::new(d[k + 1], e[k + 1]));
            for i in 0..n {
                vectors[(i, k)] = Complex64::new(v[(i, k)], v[(i, k + 1)]);
                vectors[(i, k + 1)] = Complex64::new(v[(i, k)], -v[(i, k + 1)]);
            }
            k += 2;
        }
    }

    for c in 0..n {
        let norm = (0..n).map(|r| vectors[(r, c)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for r in 0..n {
                vectors[(r, c)] /= norm;
            }
        }
    }

    let order = eig_sort_indices(&values);
    let sorted_values: Vec<Complex64> = order.iter().map(|&i| values[i]).collect();
    let mut sorted_vectors = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            sorted_vectors[(r, dst)] = vectors[(r, src)];
        }
    }

    Ok(Eigen {
        values: sorted_values,
        vectors: sorted_vectors,
    })
}

// Householder reduction to upper Hessenberg form, accumulating the
// transformation in `v` (EISPACK orthes/ortran). Reflector heads survive in
// `ort` across the forward pass because iteration m only writes ort[m..];
// reflector tails are re-read from the untouched column m-1 of h.
fn orthes(h: &mut DMatrix<f64>, v: &mut DMatrix<f64>) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    let low = 0usize;
    let high = n - 1;
    let mut ort = vec![0.0f64; n];

    for m in (low + 1)..high {
        let mut scale = 0.0;
        for i in m..=high {
            scale += h[(i, m - 1)].abs();
        }
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
    }

    // Back-accumulate the reflectors into v, last column first.
    for m in ((low + 1)..high).rev() {
        if h[(m, m - 1)] != 0.0 {
            for i in (m + 1)..=high {
                ort[i] = h[(i, m - 1)];
            }
            for j in m..=high {
                let mut g = 0.0;
                for i in m..=high {
                    g += ort[i] * v[(i, j)];
                }
                // Double division avoids possible underflow.
                g = (g / ort[m]) / h[(m, m - 1)];
                for i in m..=high {
                    v[(i, j)] += g * ort[i];
                }
            }
        }
    }
}

fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}

// Reduction from Hessenberg to real Schur form with eigenvector
// back-substitution (EISPACK hqr2). On iteration-cap overrun the eigenvalues
// extracted so far are reported through the error.
#[allow(clippy::too_many_lines)]
fn hqr2(h: &mut DMatrix<f64>, v: &mut DMatrix<f64>, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let nn = h.nrows();
    let mut n: isize = nn as isize - 1;
    let low: isize = 0;
    let high: isize = nn as isize - 1;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut t, mut w, mut x, mut y): (f64, f64, f64, f64);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }
    if norm == 0.0 {
        for i in 0..nn {
            d[i] = 0.0;
            e[i] = 0.0;
        }
        return Ok(());
    }

    let mut iter = 0usize;
    while n >= low {
        let un = n as usize;
        // Look for a single small subdiagonal element.
        let mut l = n;
        while l > low {
            let ul = l as usize;
            s = h[(ul - 1, ul - 1)].abs() + h[(ul, ul)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(ul, ul - 1)].abs() < EPS * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // One root found.
            h[(un, un)] += exshift;
            d[un] = h[(un, un)];
            e[un] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // Two roots found.
            w = h[(un, un - 1)] * h[(un - 1, un)];
            p = (h[(un - 1, un - 1)] - h[(un, un)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(un, un)] += exshift;
            h[(un - 1, un - 1)] += exshift;
            x = h[(un, un)];

            if q >= 0.0 {
                // Real pair.
                z = if p >= 0.0 { p + z } else { p - z };
                d[un - 1] = x + z;
                d[un] = d[un - 1];
                if z != 0.0 {
                    d[un] = x - w / z;
                }
                e[un - 1] = 0.0;
                e[un] = 0.0;
                x = h[(un, un - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in (un - 1)..nn {
                    z = h[(un - 1, j)];
                    h[(un - 1, j)] = q * z + p * h[(un, j)];
                    h[(un, j)] = q * h[(un, j)] - p * z;
                }
                for i in 0..=un {
                    z = h[(i, un - 1)];
                    h[(i, un - 1)] = q * z + p * h[(i, un)];
                    h[(i, un)] = q * h[(i, un)] - p * z;
                }
                for i in low as usize..=high as usize {
                    z = v[(i, un - 1)];
                    v[(i, un - 1)] = q * z + p * v[(i, un)];
                    v[(i, un)] = q * v[(i, un)] - p * z;
                }
            } else {
                // Complex pair.
                d[un - 1] = x + p;
                d[un] = x + p;
                e[un - 1] = z;
                e[un] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // No convergence yet: form a shift and run a double QR sweep.
            x = h[(un, un)];
            y = 0.0;
            w = 0.0;
            if l < n {
                y = h[(un - 1, un - 1)];
                w = h[(un, un - 1)] * h[(un - 1, un)];
            }

            if iter == 10 {
                exshift += x;
                for i in low as usize..=un {
                    h[(i, i)] -= x;
                }
                s = h[(un, un - 1)].abs() + h[(un - 1, un - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low as usize..=un {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }

            iter += 1;
            if iter > MAX_QR_ITER {
                let partial: Vec<Complex64> = ((un + 1)..nn)
                    .map(|i| Complex64::new(d[i], e[i]))
                    .collect();
                return Err(Error::EigenNonConvergence { dim: nn, partial });
            }

            // Look for two consecutive small subdiagonal elements.
            let mut m = n - 2;
            while m >= l {
                let um = m as usize;
                z = h[(um, um)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(um + 1, um)] + h[(um, um + 1)];
                q = h[(um + 1, um + 1)] - z - r - s;
                r = h[(um + 2, um + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(um, um - 1)].abs() * (q.abs() + r.abs())
                    < EPS
                        * (p.abs()
                            * (h[(um - 1, um - 1)].abs() + z.abs() + h[(um + 1, um + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            let um = m as usize;
            for i in (um + 2)..=un {
                h[(i, i - 2)] = 0.0;
                if i > um + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            for k in um..un {
                let notlast = k != un - 1;
                if k != um {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != um {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..nn {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    for i in 0..=un.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                    for i in low as usize..=high as usize {
                        p = x * v[(i, k)] + y * v[(i, k + 1)];
                        if notlast {
                            p += z * v[(i, k + 2)];
                            v[(i, k + 2)] -= p * r;
                        }
                        v[(i, k)] -= p;
                        v[(i, k + 1)] -= p * q;
                    }
                }
            }
        }
    }

    // Backsubstitute to find vectors of the upper triangular form.
    for nq in (0..nn).rev() {
        p = d[nq];
        q = e[nq];

        if q == 0.0 {
            // Real vector.
            let mut l = nq;
            h[(nq, nq)] = 1.0;
            for i in (0..nq).rev() {
                w = h[(i, i)] - p;
                r = 0.0;
                for j in l..=nq {
                    r += h[(i, j)] * h[(j, nq)];
                }
                if e[i] < 0.0 {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[i] == 0.0 {
                        h[(i, nq)] = if w != 0.0 { -r / w } else { -r / (EPS * norm) };
                    } else {
                        x = h[(i, i + 1)];
                        y = h[(i + 1, i)];
                        q = (d[i] - p) * (d[i] - p) + e[i] * e[i];
                        t = (x * s - z * r) / q;
                        h[(i, nq)] = t;
                        h[(i + 1, nq)] = if x.abs() > z.abs() {
                            (-r - w * t) / x
                        } else {
                            (-s - y * t) / z
                        };
                    }
                    t = h[(i, nq)].abs();
                    if (EPS * t) * t > 1.0 {
                        for j in i..=nq {
                            h[(j, nq)] /= t;
                        }
                    }
                }
            }
        } else if q < 0.0 {
            // Complex vector; the pair occupies columns nq-1 and nq.
            let mut l = nq - 1;
            if h[(nq, nq - 1)].abs() > h[(nq - 1, nq)].abs() {
                h[(nq - 1, nq - 1)] = q / h[(nq, nq - 1)];
                h[(nq - 1, nq)] = -(h[(nq, nq)] - p) / h[(nq, nq - 1)];
            } else {
                let (re, im) = cdiv(0.0, -h[(nq - 1, nq)], h[(nq - 1, nq - 1)] - p, q);
                h[(nq - 1, nq - 1)] = re;
                h[(nq - 1, nq)] = im;
            }
            h[(nq, nq - 1)] = 0.0;
            h[(nq, nq)] = 1.0;
            if nq < 2 {
                continue;
            }
            for i in (0..=(nq - 2)).rev() {
                let mut ra = 0.0;
                let mut sa = 0.0;
                for j in l..=nq {
                    ra += h[(i, j)] * h[(j, nq - 1)];
                    sa += h[(i, j)] * h[(j, nq)];
                }
                w = h[(i, i)] - p;

                if e[i] < 0.0 {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if e[i] == 0.0 {
                        let (re, im) = cdiv(-ra, -sa, w, q);
                        h[(i, nq - 1)] = re;
                        h[(i, nq)] = im;
                    } else {
                        x = h[(i, i + 1)];
                        y = h[(i + 1, i)];
                        let mut vr = (d[i] - p) * (d[i] - p) + e[i] * e[i] - q * q;
                        let vi = (d[i] - p) * 2.0 * q;
                        if vr == 0.0 && vi == 0.0 {
                            vr = EPS * norm * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (re, im) =
                            cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
                        h[(i, nq - 1)] = re;
                        h[(i, nq)] = im;
                        if x.abs() > z.abs() + q.abs() {
                            h[(i + 1, nq - 1)] = (-ra - w * h[(i, nq - 1)] + q * h[(i, nq)]) / x;
                            h[(i + 1, nq)] = (-sa - w * h[(i, nq)] - q * h[(i, nq - 1)]) / x;
                        } else {
                            let (re, im) =
                                cdiv(-r - y * h[(i, nq - 1)], -s - y * h[(i, nq)], z, q);
                            h[(i + 1, nq - 1)] = re;
                            h[(i + 1, nq)] = im;
                        }
                    }
                    t = h[(i, nq - 1)].abs().max(h[(i, nq)].abs());
                    if (EPS * t) * t > 1.0 {
                        for j in i..=nq {
                            h[(j, nq - 1)] /= t;
                            h[(j, nq)] /= t;
                        }
                    }
                }
            }
        }
    }

    // Back-transform to eigenvectors of the original matrix.
    for j in (0..nn).rev() {
        for i in 0..nn {
            z = 0.0;
            for k in 0..=j {
                z += v[(i, k)] * h[(k, j)];
            }
            v[(i, j)] = z;
        }
    }

    Ok(())
}

/// Spectral radius of a nonnegative matrix by shifted power iteration,
/// cross-checked against the QR spectrum. The shift makes the iteration
/// converge even for periodic (cyclic) sparsity patterns. Routes that
/// disagree by more than `1e-8` yield an error rather than a guess.
pub fn perron_root(m: &DMatrix<f64>) -> Result<Perron> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "perron_root expects a square matrix");
    if n == 0 {
        return Err(Error::Domain("perron_root on an empty matrix".into()));
    }
    if m.min() < 0.0 {
        return Err(Error::Domain(
            "perron_root expects a nonnegative matrix".into(),
        ));
    }
    // Row-sum norm bounds the spectral radius from above.
    let scale = m.abs().column_sum().max();
    if scale == 0.0 {
        return Ok(Perron {
            root: 0.0,
            vector: DVector::from_element(n, 1.0 / n as f64),
        });
    }

    let shift = 0.5 * scale;
    let mut v = DVector::from_element(n, 1.0 / n as f64);
    let mut estimate = 0.0f64;
    let mut converged = false;
    for _ in 0..200_000 {
        let mut w = m * &v;
        w.axpy(shift, &v, 1.0);
        let total = w.sum();
        let lam = total - shift;
        w /= total;
        let residual = (m * &w - &w * lam).amax();
        v = w;
        estimate = lam;
        if residual <= 1e-13 * scale.max(1.0) {
            converged = true;
            break;
        }
    }

    let spectrum = eigenvalues(m)?;
    let qr_max = spectrum.first().map(|z| z.norm()).unwrap_or(0.0);
    let root = if converged { estimate } else { qr_max };
    if (root - qr_max).abs() > 1e-8 {
        return Err(Error::SpectralRouteMismatch {
            power: estimate,
            qr: qr_max,
        });
    }
    Ok(Perron { root, vector: v })
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Domain("linear system is singular".into()))
}

/// Inverse of a complex matrix, or an error when numerically singular.
pub fn invert_complex(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Domain("eigenvector matrix is numerically singular".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn residual(m: &DMatrix<f64>, lam: Complex64, vec: &[Complex64]) -> f64 {
        let n = m.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += Complex64::new(m[(i, j)], 0.0) * vec[j];
            }
            acc -= lam * vec[i];
            worst = worst.max(acc.norm());
        }
        worst
    }

    fn check_all_residuals(m: &DMatrix<f64>) {
        let eig = eigen(m).unwrap();
        let norm = m.abs().column_sum().max().max(1e-300);
        for (k, &lam) in eig.values.iter().enumerate() {
            let col: Vec<Complex64> = (0..m.nrows()).map(|r| eig.vectors[(r, k)]).collect();
            let scale: f64 = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(scale > 0.0, "zero eigenvector for eigenvalue {lam}");
            assert!(
                residual(m, lam, &col) <= 1e-10 * norm * (1.0 / scale).max(1.0),
                "residual too large for {lam}"
            );
        }
    }

    #[test]
    fn doubly_stochastic_two_by_two() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let eig = eigenvalues(&m).unwrap();
        assert_abs_diff_eq!(eig[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[0].im, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1].norm(), 0.0, epsilon = 1e-12);
        check_all_residuals(&m);
    }

    #[test]
    fn rotation_orders_conjugates_imaginary_descending() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let eig = eigenvalues(&m).unwrap();
        assert_abs_diff_eq!(eig[0].im, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1].im, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[0].re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn triangular_spectrum_is_diagonal() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 0.89, 0.0, 0.0, 0.89, 0.0, 0.0, 0.0, 0.9]);
        let eig = eigenvalues(&m).unwrap();
        assert_abs_diff_eq!(eig[0].re, 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1].re, 0.89, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[2].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn known_four_by_four_spectrum() {
        // Companion matrix of (x^2-1)(x^2-4): eigenvalues 2, -2, 1, -1.
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 0.0, -4.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 5.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        );
        let eig = eigenvalues(&m).unwrap();
        let mods: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
        assert_abs_diff_eq!(mods[0], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(mods[1], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(mods[2], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(mods[3], 1.0, epsilon = 1e-10);
        // The leading pair is real with opposite signs.
        assert_abs_diff_eq!(eig[0].im, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(eig[0].re + eig[1].re, 0.0, epsilon = 1e-10);
        check_all_residuals(&m);
    }

    #[test]
    fn perron_of_positive_matrix_matches_qr_and_gives_positive_vector() {
        let m = DMatrix::from_row_slice(3, 3, &[0.2, 0.3, 0.1, 0.05, 0.4, 0.2, 0.3, 0.1, 0.25]);
        let p = perron_root(&m).unwrap();
        let qr = eigenvalues(&m).unwrap()[0].norm();
        assert_abs_diff_eq!(p.root, qr, epsilon = 1e-10);
        assert!(p.vector.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn perron_of_cyclic_pattern_converges_via_shift() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 1.0, 0.0]);
        let p = perron_root(&m).unwrap();
        assert_abs_diff_eq!(p.root, 2.0_f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn perron_of_zero_matrix_is_zero() {
        let m = DMatrix::zeros(3, 3);
        assert_eq!(perron_root(&m).unwrap().root, 0.0);
    }

    #[test]
    fn random_matrices_meet_residual_contract() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for dim in 2..=6 {
            for _ in 0..20 {
                let m = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
                check_all_residuals(&m);
            }
        }
    }
}
