//! Small exact matrices and vectors that the numerical pipeline must
//! reproduce. Matrix entries are `m[row][col]`, columns being images of
//! basis states.

use faer::Mat;

use crate::linalg::{re, Vector};
use crate::C64;

fn s3() -> f64 {
    3f64.sqrt()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn mat(rows: &[&[C64]]) -> Mat<C64> {
    Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

fn mat_re(rows: &[[f64; 6]; 6]) -> Mat<C64> {
    Mat::from_fn(6, 6, |i, j| re(rows[i][j]))
}

fn vec_of(v: &[C64]) -> Vector {
    Vector::from_fn(v.len(), |i| v[i])
}

/// Spin configurations of the `L=4`, `S^z=0` sector, `u` for up.
pub const XXZ4_BASIS: [&str; 6] = ["uudd", "udud", "uddu", "duud", "dudu", "dduu"];

/// The open link basis at `L=4` in the order used by the fixtures below.
pub const OPEN4_ORDER: [&str; 6] = ["()()", "(())", "||()", "|()|", "()||", "||||"];

/// Dilute basis at `L=2`: empty, arc, two strings.
pub const DILUTE2_ORDER: [&str; 3] = ["..", "()", "||"];

pub fn xxz_h4() -> Mat<C64> {
    let s = s3();
    let z = re(0.0);
    let t = re(2.0);
    mat(&[
        &[c(0.5, s), t, z, z, z, z],
        &[t, c(-1.5, s), t, t, z, z],
        &[z, t, re(-0.5), z, t, z],
        &[z, t, z, re(-0.5), t, z],
        &[z, z, t, t, c(-1.5, -s), t],
        &[z, z, z, z, t, c(0.5, -s)],
    ])
}

pub fn xxz_h4_spectrum() -> [f64; 6] {
    let r2 = 2f64.sqrt();
    [-4.5, -2.0 * r2 - 0.5, -0.5, 1.5, 1.5, 2.0 * r2 - 0.5]
}

/// Ground state normalized to unit bilinear norm.
pub fn xxz_ground4() -> Vector {
    let s = s3();
    vec_of(&[
        c(-1.0 / 6.0, s / 6.0),
        c(2.0 / 3.0, -s / 3.0),
        re(-2.0 / 3.0),
        re(-2.0 / 3.0),
        c(2.0 / 3.0, s / 3.0),
        c(-1.0 / 6.0, -s / 6.0),
    ])
}

/// Eigenvector at `3/2`; its partner `w` satisfies `<v|w> = -3/4`.
pub fn xxz_level3_4() -> Vector {
    let s = s3();
    vec_of(&[
        c(0.5, -s / 2.0),
        c(-0.5, -s / 2.0),
        re(-1.0),
        re(-1.0),
        c(-0.5, s / 2.0),
        c(0.5, s / 2.0),
    ])
}

pub const XXZ_LEVEL3_PAIRING4: f64 = -0.75;

/// Product of two width-2 singlets.
pub fn xxz_trousers4() -> Vector {
    let s = s3();
    vec_of(&[re(0.0), c(0.5, -s / 2.0), re(-1.0), re(-1.0), c(0.5, s / 2.0), re(0.0)])
}

pub fn b_xxz4() -> f64 {
    -s3() * std::f64::consts::PI / 4.0
}

pub fn polymer_x() -> f64 {
    (2.0 + 2f64.sqrt()).powf(-0.5)
}

pub fn dilute_t2(x: f64) -> Mat<C64> {
    let (x2, x4) = (re(x * x), re(x.powi(4)));
    let (z, o) = (re(0.0), re(1.0));
    mat(&[&[o, z, x2], &[x4, x4, z], &[z, z, x4]])
}

/// Right Jordan basis `|0>, |1>, |1'>` of the `L=2` dilute transfer matrix.
pub fn dilute_kets2(x: f64) -> [Vector; 3] {
    let x4 = x.powi(4);
    let d = 1.0 - x4;
    [
        vec_of(&[re(1.0), re(x4 / d), re(0.0)]),
        vec_of(&[re(0.0), re(-x.powi(6) / d), re(0.0)]),
        vec_of(&[re(-x * x / d), re(0.0), re(1.0)]),
    ]
}

/// Left Jordan basis, strings running to the future.
pub fn dilute_bras2(x: f64) -> [Vector; 3] {
    let x4 = x.powi(4);
    let d = 1.0 - x4;
    [
        vec_of(&[re(1.0), re(x * x / d), re(0.0)]),
        vec_of(&[re(0.0), re(-x.powi(6) / d), re(0.0)]),
        vec_of(&[re(-x4 / d), re(0.0), re(1.0)]),
    ]
}

pub fn b_polymer2() -> f64 {
    let x4 = polymer_x().powi(4);
    4.0 * std::f64::consts::PI / s3() * x4 / (1.0 - x4)
}

/// Geometric generators at `L=4` in [`OPEN4_ORDER`]; the deformation `y`
/// only touches `e_2`, and `y = 1` gives the undeformed matrices.
pub fn open4_generators(n: f64, y: f64) -> [Mat<C64>; 3] {
    [
        mat_re(&[
            [n, 1., 1., 0., 0., 0.],
            [0.; 6],
            [0.; 6],
            [0.; 6],
            [0., 0., 0., 1., n, 1.],
            [0.; 6],
        ]),
        mat_re(&[
            [0.; 6],
            [1., n, 0., 0., 0., 0.],
            [0.; 6],
            [0., 0., 1., n, 1., y],
            [0.; 6],
            [0.; 6],
        ]),
        mat_re(&[
            [n, 1., 0., 0., 1., 0.],
            [0.; 6],
            [0., 0., n, 1., 0., 1.],
            [0.; 6],
            [0.; 6],
            [0.; 6],
        ]),
    ]
}

/// Basis change splitting the generic `L=4` module into standard modules.
pub fn basis_change_p(n: f64) -> Mat<C64> {
    let k = n * n - 2.0;
    let m = (n + 1.0) * k;
    mat_re(&[
        [1., 0., -1. / n, 0., -1. / n, n / m],
        [0., 1., 0., -1. / n, 0., -1. / m],
        [0., 0., 1., 0., 0., -(n - 1.) / k],
        [0., 0., 0., 1., 0., -(n - 2.) / k],
        [0., 0., 0., 0., 1., -(n - 1.) / k],
        [0., 0., 0., 0., 0., 1.],
    ])
}

pub fn conjugated_by_p(n: f64) -> [Mat<C64>; 3] {
    [
        mat_re(&[
            [n, 1., 0., 0., 0., 0.],
            [0.; 6],
            [0.; 6],
            [0.; 6],
            [0., 0., 0., 1., n, 0.],
            [0.; 6],
        ]),
        mat_re(&[
            [0.; 6],
            [1., n, 0., 0., 0., 0.],
            [0.; 6],
            [0., 0., 1., n, 1., 0.],
            [0.; 6],
            [0.; 6],
        ]),
        mat_re(&[
            [n, 1., 0., 0., 0., 0.],
            [0.; 6],
            [0., 0., n, 1., 0., 0.],
            [0.; 6],
            [0.; 6],
            [0.; 6],
        ]),
    ]
}

/// Basis change relating the deformed `n=1` representation to the spin one.
pub fn basis_change_py(y: f64) -> Mat<C64> {
    let d = y - 1.0;
    mat_re(&[
        [1., 0., 1., -1., 0., -1.],
        [-1., 1., 0., 0., -1., 0.],
        [0., 0., -1., 1., 0., 0.],
        [0., 0., (y - 2.) / d, 0., 1., 0.],
        [0., 0., -1., 0., 0., 1.],
        [0., 0., 1. / d, 0., 0., 0.],
    ])
}

pub fn conjugated_by_py() -> [Mat<C64>; 3] {
    [
        mat_re(&[
            [0., 1., 0., 0., 0., 0.],
            [0., 1., 0., 0., 0., 0.],
            [0.; 6],
            [0.; 6],
            [0.; 6],
            [0., 0., 0., 0., 1., 1.],
        ]),
        mat_re(&[
            [0.; 6],
            [0., 1., 1., 0., 0., 0.],
            [0.; 6],
            [0.; 6],
            [0., 0., 0., 1., 1., 1.],
            [0.; 6],
        ]),
        mat_re(&[
            [0., 1., 0., 0., 0., 0.],
            [0., 1., 0., 0., 0., 0.],
            [0.; 6],
            [0., 0., 0., 1., 1., 0.],
            [0.; 6],
            [0.; 6],
        ]),
    ]
}

/// The two states killed by every `n=1` generator at `L=4`, as
/// combinations of named link states.
pub const ANNIHILATED4: [[(&str, f64); 2]; 2] = [[("()()", 1.0), ("(())", -1.0)], [("||||", 1.0), ("|()|", -1.0)]];

/// Two dense `L=6` states whose gluing closes two loops.
pub const LOOP_PAIR6: [&str; 2] = ["()(())", "(()())"];

/// Ising fixed and free boundary entropies.
pub fn ising_entropy_fixed() -> f64 {
    -(2f64.sqrt() / 2.0).ln()
}
