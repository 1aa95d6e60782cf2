//! Dense eigenvalues of a real nonsymmetric matrix.
//!
//! Balancing, Householder reduction to upper Hessenberg form and the
//! Francis double-shift QR iteration, following the classic EISPACK
//! `balanc`/`orthes`/`hqr` sequence. Only eigenvalues are computed.

use num_complex::Complex;

use super::Mat;
use crate::error::{Error, Result};
use crate::scalar::Real;

const RADIX: f64 = 2.0;
const MAX_ITS_PER_EIGENVALUE: usize = 60;

/// All eigenvalues of a square real matrix, in the order they deflate.
pub fn eigenvalues<T: Real>(a: &Mat<T>) -> Result<Vec<Complex<T>>> {
    if !a.is_square() {
        return Err(Error::InvalidArgument("eigenvalues of non-square matrix".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    hqr(h)
}

/// Scales rows and columns by powers of two so that their norms are comparable.
pub fn balance<T: Real>(a: &mut Mat<T>) {
    let n = a.rows();
    let radix = T::lit(RADIX);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != T::zero() && r != T::zero() {
                let mut g = r / radix;
                let mut f = T::one();
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < T::lit(0.95) * s {
                    done = false;
                    let g = T::one() / f;
                    for x in a.row_mut(i) {
                        *x *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
    }
}

/// In-place orthogonal similarity reduction to upper Hessenberg form.
pub fn hessenberg<T: Real>(a: &mut Mat<T>) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    for k in 0..n - 2 {
        let alpha_sq: T = (k + 1..n).map(|i| a[(i, k)] * a[(i, k)]).sum();
        let tail_sq: T = (k + 2..n).map(|i| a[(i, k)] * a[(i, k)]).sum();
        if tail_sq == T::zero() {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let norm = alpha_sq.sqrt();
        let alpha = if x0 >= T::zero() { -norm } else { norm };
        // v = x - alpha e1, H = 1 - 2 v vᵀ / (vᵀ v)
        for i in 0..n {
            v[i] = T::zero();
        }
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = a[(i, k)];
        }
        let vtv = v[k + 1] * v[k + 1] + tail_sq;
        let beta = T::lit(2.0) / vtv;

        // left: A <- A - beta v (vᵀ A), rows k+1.., columns k..
        for j in k..n {
            w[j] = T::zero();
        }
        for i in k + 1..n {
            let vi = v[i];
            let row = a.row(i);
            for j in k..n {
                w[j] += vi * row[j];
            }
        }
        for i in k + 1..n {
            let f = beta * v[i];
            let row = a.row_mut(i);
            for j in k..n {
                row[j] -= f * w[j];
            }
        }
        // right: A <- A - beta (A v) vᵀ, all rows, columns k+1..
        for i in 0..n {
            let row = a.row_mut(i);
            let mut d = T::zero();
            for j in k + 1..n {
                d += row[j] * v[j];
            }
            let f = beta * d;
            for j in k + 1..n {
                row[j] -= f * v[j];
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = T::zero();
        }
    }
}

fn sign<T: Real>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix by double-shift QR.
///
/// Works on a 1-based copy to stay close to the reference formulation.
fn hqr<T: Real>(h: Mat<T>) -> Result<Vec<Complex<T>>> {
    let n = h.rows();
    let stride = n + 1;
    let mut a = vec![T::zero(); stride * stride];
    for i in 0..n {
        for j in 0..n {
            a[(i + 1) * stride + j + 1] = h[(i, j)];
        }
    }
    let ix = |i: usize, j: usize| i * stride + j;
    let eps = T::epsilon();
    let mut wr = vec![T::zero(); n + 1];
    let mut wi = vec![T::zero(); n + 1];

    let mut anorm = T::zero();
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[ix(i, j)].abs();
        }
    }

    let mut nn = n;
    let mut t = T::zero();
    let (mut p, mut q, mut r);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0usize;
        let mut l;
        loop {
            l = 1;
            let mut ll = nn;
            while ll >= 2 {
                let mut s = a[ix(ll - 1, ll - 1)].abs() + a[ix(ll, ll)].abs();
                if s == T::zero() {
                    s = anorm;
                }
                if a[ix(ll, ll - 1)].abs() <= eps * s {
                    a[ix(ll, ll - 1)] = T::zero();
                    l = ll;
                    break;
                }
                ll -= 1;
            }
            x = a[ix(nn, nn)];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = T::zero();
                nn -= 1;
                break;
            }
            y = a[ix(nn - 1, nn - 1)];
            w = a[ix(nn, nn - 1)] * a[ix(nn - 1, nn)];
            if l == nn - 1 {
                p = T::lit(0.5) * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                if q >= T::zero() {
                    z = p + sign(z, p);
                    wr[nn - 1] = x + z;
                    wr[nn] = x + z;
                    if z != T::zero() {
                        wr[nn] = x - w / z;
                    }
                    wi[nn - 1] = T::zero();
                    wi[nn] = T::zero();
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn -= 2;
                break;
            }
            if its == MAX_ITS_PER_EIGENVALUE {
                return Err(Error::ConvergenceFailure {
                    iterations: its,
                    estimate: x.as_f64(),
                    residual: a[ix(nn, nn - 1)].abs().as_f64(),
                });
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 1..=nn {
                    a[ix(i, i)] -= x;
                }
                let s = a[ix(nn, nn - 1)].abs() + a[ix(nn - 1, nn - 2)].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            its += 1;
            let mut m = nn - 2;
            loop {
                z = a[ix(m, m)];
                r = x - z;
                let s0 = y - z;
                p = (r * s0 - w) / a[ix(m + 1, m)] + a[ix(m, m + 1)];
                q = a[ix(m + 1, m + 1)] - z - r - s0;
                r = a[ix(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[ix(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[ix(m - 1, m - 1)].abs() + z.abs() + a[ix(m + 1, m + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[ix(i, i - 2)] = T::zero();
                if i != m + 2 {
                    a[ix(i, i - 3)] = T::zero();
                }
            }
            let mut k = m;
            while k + 1 <= nn {
                if k != m {
                    p = a[ix(k, k - 1)];
                    q = a[ix(k + 1, k - 1)];
                    r = T::zero();
                    if k != nn - 1 {
                        r = a[ix(k + 2, k - 1)];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != T::zero() {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != T::zero() {
                    if k == m {
                        if l != m {
                            a[ix(k, k - 1)] = -a[ix(k, k - 1)];
                        }
                    } else {
                        a[ix(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        p = a[ix(k, j)] + q * a[ix(k + 1, j)];
                        if k != nn - 1 {
                            p += r * a[ix(k + 2, j)];
                            a[ix(k + 2, j)] -= p * z;
                        }
                        a[ix(k + 1, j)] -= p * y;
                        a[ix(k, j)] -= p * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        p = x * a[ix(i, k)] + y * a[ix(i, k + 1)];
                        if k != nn - 1 {
                            p += z * a[ix(i, k + 2)];
                            a[ix(i, k + 2)] -= p * r;
                        }
                        a[ix(i, k + 1)] -= p * q;
                        a[ix(i, k)] -= p;
                    }
                }
                k += 1;
            }
        }
    }
    Ok((1..=n).map(|i| Complex::new(wr[i], wi[i])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn permutation_matrix() {
        let a = Mat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let ev = sorted(eigenvalues(&a).unwrap());
        assert!((ev[0].re + 1.0).abs() < 1e-14 && (ev[1].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rotation_gives_conjugate_pair() {
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let a = Mat::from_rows(&[vec![c, -s, 0.0], vec![s, c, 0.0], vec![0.0, 0.0, 0.5]]).unwrap();
        let ev = eigenvalues(&a).unwrap();
        let mut ims: Vec<f64> = ev.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + s).abs() < 1e-13 && ims[1].abs() < 1e-13 && (ims[2] - s).abs() < 1e-13);
    }

    #[test]
    fn companion_matrix_roots() {
        // x^4 - 10x^3 + 35x^2 - 50x + 24 = (x-1)(x-2)(x-3)(x-4)
        let a = Mat::from_rows(&[
            vec![10.0, -35.0, 50.0, -24.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let ev = sorted(eigenvalues(&a).unwrap());
        for (k, z) in ev.iter().enumerate() {
            assert!((z.re - (k + 1) as f64).abs() < 1e-10, "{z}");
            assert!(z.im.abs() < 1e-10);
        }
    }

    #[test]
    fn trace_and_hessenberg_similarity() {
        let n = 9;
        let a = Mat::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.4);
        let ev = eigenvalues(&a).unwrap();
        let sum: Complex<f64> = ev.iter().sum();
        assert!((sum.re - a.trace()).abs() < 1e-12 && sum.im.abs() < 1e-12);
        let mut h = a.clone();
        hessenberg(&mut h);
        for i in 0..n {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(h[(i, j)], 0.0);
            }
        }
        assert!((h.frobenius_norm() - a.frobenius_norm()).abs() < 1e-12);
    }
}
