//! Small vector helpers and float wrappers so the crate builds without `std`.

pub type Vec3 = [f64; 3];

// With `std` the platform routines are used for the hot kernels; they are
// markedly faster than the portable ones.
#[cfg(feature = "std")]
#[inline]
pub fn sqrt(x: f64) -> f64 {
    x.sqrt()
}
#[cfg(not(feature = "std"))]
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[cfg(feature = "std")]
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    x.powf(y)
}
#[cfg(not(feature = "std"))]
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn abs(x: f64) -> f64 {
    x.abs()
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}
#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}
#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
#[inline]
pub fn norm2(a: Vec3) -> f64 {
    dot(a, a)
}
#[inline]
pub fn norm(a: Vec3) -> f64 {
    sqrt(dot(a, a))
}
#[inline]
pub fn dist(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}
/// Unit vector, or `None` for a (numerically) zero input.
#[inline]
pub fn normalize(a: Vec3) -> Option<Vec3> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

/// Some unit vector orthogonal to `n` (assumed unit).
pub fn any_orthogonal(n: Vec3) -> Vec3 {
    let pick = if abs(n[0]) <= abs(n[1]) && abs(n[0]) <= abs(n[2]) {
        [1.0, 0.0, 0.0]
    } else if abs(n[1]) <= abs(n[2]) {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let t = sub(pick, scale(n, dot(pick, n)));
    normalize(t).unwrap_or([1.0, 0.0, 0.0])
}

/// Symmetric 3x3 matrix stored row-major.
pub type Sym3 = [[f64; 3]; 3];

pub const ZERO3: Sym3 = [[0.0; 3]; 3];

#[inline]
pub fn quad_form(m: &Sym3, v: Vec3) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        acc += v[i] * (m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2]);
    }
    acc
}

pub fn outer_sym(a: Vec3, b: Vec3) -> Sym3 {
    let mut m = ZERO3;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = 0.5 * (a[i] * b[j] + a[j] * b[i]);
        }
    }
    m
}

pub fn sym_axpy(acc: &mut Sym3, w: f64, m: &Sym3) {
    for i in 0..3 {
        for j in 0..3 {
            acc[i][j] += w * m[i][j];
        }
    }
}

/// Solve a 3x3 linear system by Cramer's rule; `None` if singular.
pub fn solve3(a: [[f64; 3]; 3], b: Vec3) -> Option<Vec3> {
    let det = dot(a[0], cross(a[1], a[2]));
    let scale_ref = norm(a[0]) * norm(a[1]) * norm(a[2]);
    if !(abs(det) > 1e-14 * scale_ref) {
        return None;
    }
    let col = |j: usize| [a[0][j], a[1][j], a[2][j]];
    let (c0, c1, c2) = (col(0), col(1), col(2));
    let d = dot(c0, cross(c1, c2));
    Some([
        dot(b, cross(c1, c2)) / d,
        dot(c0, cross(b, c2)) / d,
        dot(c0, cross(c1, b)) / d,
    ])
}

/// Solve a small dense system in place by Gaussian elimination with partial
/// pivoting; `None` if a pivot falls below `1e-13` of the largest entry.
pub fn solve_dense<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    let big = a.iter().flatten().fold(0.0f64, |m, v| m.max(abs(*v)));
    if !(big > 0.0) {
        return None;
    }
    for col in 0..N {
        let piv = (col..N).max_by(|&i, &j| abs(a[i][col]).total_cmp(&abs(a[j][col])))?;
        if abs(a[piv][col]) < 1e-13 * big {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..N {
            let f = a[r][col] / a[col][col];
            for c in col..N {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for r in (0..N).rev() {
        let mut acc = b[r];
        for c in r + 1..N {
            acc -= a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    Some(x)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (alloc::vec::Vec<f64>, alloc::vec::Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / dp;
            if abs(z - z1) < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

const GK_X: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GK_WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for i in 0..7 {
        let fs = f(c - h * GK_X[i]) + f(c + h * GK_X[i]);
        k += GK_WK[i] * fs;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * fs;
        }
    }
    (k * h, abs((k - g) * h))
}

/// Adaptive 15-point Gauss-Kronrod integration on `[a, b]`.
///
/// Returns `(value, error_estimate)`, where the estimate is the summed
/// Gauss/Kronrod discrepancy over the final intervals. Bisects the worst
/// interval until the estimate is below `tol` or 4000 intervals are in use.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let mut parts = alloc::vec![(a, b, gk15(&f, a, b))];
    loop {
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= tol || parts.len() >= 4000 {
            let val = parts.iter().map(|p| p.2 .0).sum();
            return (val, err);
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(&f, lo, mid)));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
}
