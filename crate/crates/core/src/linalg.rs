//! Small dense linear algebra for the 4×4 process-matrix computations.
//!
//! Hermitian eigenproblems are solved through the real symmetric embedding
//! `[[A, −B], [B, A]]` of `H = A + iB`, which doubles every eigenvalue but
//! lets a plain cyclic Jacobi sweep do the work.

// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::qubit::C64;

pub type CMatrix4 = [[C64; 4]; 4];
pub type RMatrix4 = [[f64; 4]; 4];

pub const CZERO4: CMatrix4 = [[C64::new(0.0, 0.0); 4]; 4];

/// Inverse of a real 4×4 matrix by Gauss-Jordan elimination with partial
/// pivoting. Returns `None` when a pivot falls below `1e-12` times the
/// largest entry.
pub fn invert4(m: &RMatrix4) -> Option<RMatrix4> {
    let scale = m.iter().flatten().fold(0.0_f64, |a, &b| a.max(b.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut a = *m;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap_or(col);
        if a[pivot][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for k in 0..4 {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for k in 0..4 {
                        a[r][k] -= f * a[col][k];
                        inv[r][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    Some(inv)
}

pub fn matmul4(a: &RMatrix4, b: &RMatrix4) -> RMatrix4 {
    let mut out = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = (0..4).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

/// Cyclic Jacobi eigen-decomposition of a real symmetric matrix.
/// Returns eigenvalues and the matrix whose columns are the eigenvectors.
pub fn symmetric_eigen<const N: usize>(m: &[[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut a = *m;
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..N)
            .flat_map(|p| (0..N).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        let diag: f64 = (0..N).map(|p| a[p][p] * a[p][p]).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut w = [0.0; N];
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = a[i][i];
    }
    (w, v)
}

fn embed(h: &CMatrix4) -> [[f64; 8]; 8] {
    let mut m = [[0.0; 8]; 8];
    for r in 0..4 {
        for c in 0..4 {
            let z = h[r][c];
            m[r][c] = z.re;
            m[r + 4][c + 4] = z.re;
            m[r][c + 4] = -z.im;
            m[r + 4][c] = z.im;
        }
    }
    m
}

/// Symmetrized copy `(H + H†)/2`.
pub fn hermitian_part(h: &CMatrix4) -> CMatrix4 {
    let mut out = CZERO4;
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = (h[r][c] + h[c][r].conj()) * 0.5;
        }
    }
    out
}

/// Eigenvalues of a Hermitian 4×4 matrix, ascending.
pub fn hermitian_eigenvalues4(h: &CMatrix4) -> [f64; 4] {
    let (mut w, _) = symmetric_eigen(&embed(&hermitian_part(h)));
    w.sort_by(f64::total_cmp);
    // Each eigenvalue appears twice in the embedding.
    [w[0], w[2], w[4], w[6]]
}

/// Replaces negative eigenvalues of a Hermitian matrix by zero.
pub fn clip_negative_eigenvalues4(h: &CMatrix4) -> CMatrix4 {
    let (w, v) = symmetric_eigen(&embed(&hermitian_part(h)));
    let mut m = [[0.0; 8]; 8];
    for (k, &lambda) in w.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        for r in 0..8 {
            for c in 0..8 {
                m[r][c] += lambda * v[r][k] * v[c][k];
            }
        }
    }
    let mut out = CZERO4;
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = C64::new(m[r][c], m[r + 4][c]);
        }
    }
    hermitian_part(&out)
}

pub fn trace4(h: &CMatrix4) -> C64 {
    (0..4).map(|i| h[i][i]).sum()
}

pub fn cmatmul4(a: &CMatrix4, b: &CMatrix4) -> CMatrix4 {
    let mut out = CZERO4;
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = (0..4).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

pub fn frobenius4(a: &CMatrix4, b: &CMatrix4) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invert_roundtrip() {
        let m = [
            [1.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, -1.0],
            [1.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 1.0, 0.0],
        ];
        let inv = invert4(&m).unwrap();
        let p = matmul4(&m, &inv);
        for (r, row) in p.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_detected() {
        let mut m = [[1.0; 4]; 4];
        m[0][0] = 2.0;
        assert!(invert4(&m).is_none());
    }

    #[test]
    fn hermitian_eigen_and_clip() {
        // diag(0.7, 0.5, -0.2, 0) rotated by a complex unitary mixing 0 and 2.
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let mut u = CZERO4;
        u[0][0] = C64::new(s, 0.0);
        u[0][2] = C64::new(0.0, s);
        u[2][0] = C64::new(0.0, s);
        u[2][2] = C64::new(s, 0.0);
        u[1][1] = C64::new(1.0, 0.0);
        u[3][3] = C64::new(1.0, 0.0);
        let mut d = CZERO4;
        for (i, l) in [0.7, 0.5, -0.2, 0.0].iter().enumerate() {
            d[i][i] = C64::new(*l, 0.0);
        }
        let mut ud = CZERO4;
        for r in 0..4 {
            for c in 0..4 {
                ud[r][c] = u[c][r].conj();
            }
        }
        let h = cmatmul4(&cmatmul4(&u, &d), &ud);
        let w = hermitian_eigenvalues4(&h);
        for (got, want) in w.iter().zip([-0.2, 0.0, 0.5, 0.7]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let clipped = clip_negative_eigenvalues4(&h);
        let w = hermitian_eigenvalues4(&clipped);
        assert!(w[0].abs() < 1e-12);
        assert!((trace4(&clipped).re - 1.2).abs() < 1e-12);
    }
}
