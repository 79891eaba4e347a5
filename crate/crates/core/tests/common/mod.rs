//! Plain-loop complex arithmetic used as an independent reference.
#![allow(dead_code)]

use weakval::{Complex64, ComplexMatrix};

pub type Cx = (f64, f64);

pub fn mul(a: Cx, b: Cx) -> Cx {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

pub fn add(a: Cx, b: Cx) -> Cx {
    (a.0 + b.0, a.1 + b.1)
}

pub fn conj(a: Cx) -> Cx {
    (a.0, -a.1)
}

pub fn div(a: Cx, b: Cx) -> Cx {
    let d = b.0 * b.0 + b.1 * b.1;
    let n = mul(a, conj(b));
    (n.0 / d, n.1 / d)
}

pub fn to_cx(z: Complex64) -> Cx {
    (z.re, z.im)
}

pub fn mat(m: &ComplexMatrix) -> Vec<Vec<Cx>> {
    m.rows()
        .into_iter()
        .map(|r| r.into_iter().map(to_cx).collect())
        .collect()
}

pub fn vecx(v: &[Complex64]) -> Vec<Cx> {
    v.iter().copied().map(to_cx).collect()
}

pub fn matmul(a: &[Vec<Cx>], b: &[Vec<Cx>]) -> Vec<Vec<Cx>> {
    let n = a.len();
    let mut out = vec![vec![(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = (0.0, 0.0);
            for k in 0..n {
                acc = add(acc, mul(a[i][k], b[k][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn trace(a: &[Vec<Cx>]) -> Cx {
    (0..a.len()).fold((0.0, 0.0), |acc, i| add(acc, a[i][i]))
}

/// `⟨u|M|v⟩`
pub fn sandwich(u: &[Cx], m: &[Vec<Cx>], v: &[Cx]) -> Cx {
    let n = u.len();
    let mut acc = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc = add(acc, mul(conj(u[i]), mul(m[i][j], v[j])));
        }
    }
    acc
}

/// `Σ_b w_b |b⟩⟨b|`
pub fn diag_in_basis(w: &[f64], basis: &[Vec<Cx>]) -> Vec<Vec<Cx>> {
    let n = basis.len();
    let mut out = vec![vec![(0.0, 0.0); n]; n];
    for (wb, b) in w.iter().zip(basis) {
        for i in 0..n {
            for j in 0..n {
                let t = mul(b[i], conj(b[j]));
                out[i][j] = add(out[i][j], (wb * t.0, wb * t.1));
            }
        }
    }
    out
}

pub fn sub(a: &[Vec<Cx>], b: &[Vec<Cx>]) -> Vec<Vec<Cx>> {
    a.iter()
        .zip(b)
        .map(|(r, s)| {
            r.iter()
                .zip(s)
                .map(|(x, y)| (x.0 - y.0, x.1 - y.1))
                .collect()
        })
        .collect()
}

/// `α(b) = ⟨b|âρ|b⟩/⟨b|ρ|b⟩` and `p(b)` by plain loops.
pub fn alpha(rho: &[Vec<Cx>], a: &[Vec<Cx>], b: &[Cx]) -> (Cx, f64) {
    let ar = matmul(a, rho);
    let num = sandwich(b, &ar, b);
    let den = sandwich(b, rho, b);
    (div(num, den), den.0)
}
