//! Trousers states, the indecomposability parameter `b(L)`, boundary
//! entropies and finite-size extrapolation.

use std::f64::consts::PI;

use faer::linalg::solvers::{Solve, SolveLstsq};
use faer::{Col, ColRef, Mat};

use crate::diagram::{LinkBasis, LinkState};
use crate::error::{bad_param, Error, Result};
use crate::forms::{diagram_form, dilute_form, formal_q_form, loop_form, BilinearForm};
use crate::linalg::{Vector, ZERO};
use crate::models::{
    build_dense_loop_t, build_dilute_t, build_ising, build_percolation_h, build_xxz, critical_x, xxz_fermi_velocity,
    BuiltModel, ModelSpec,
};
use crate::spectral::{
    extract_jordan_cell, ground_state, leading_eigenpair, normalize, Eigenpair, JordanCell, LevelSelector,
    Normalization, Side,
};
use crate::tl::{RepBasis, SpinSector};
use crate::C64;

/// Largest XXZ chain handled by the dense cell extraction.
const XXZ_DENSE_MAX: usize = 12;

#[derive(Clone, Debug)]
pub struct TrousersState {
    pub vector: Vector,
    pub side: Side,
    pub normalization: &'static str,
}

fn halves(l: usize, need_even_half: bool) -> Result<usize> {
    if l < 2 || !l.is_multiple_of(2) {
        return Err(Error::InvalidSize { l, reason: "trousers need an even width" });
    }
    if need_even_half && !l.is_multiple_of(4) {
        return Err(Error::InvalidSize { l, reason: "half width must be even" });
    }
    Ok(l / 2)
}

fn spin_trousers(model: &BuiltModel, half: &Eigenpair, half_model: &BuiltModel) -> Result<Vector> {
    let (RepBasis::Spins { l, configs }, RepBasis::Spins { configs: hc, .. }) = (&model.basis, &half_model.basis) else {
        return Err(Error::Sector("spin trousers need spin bases".into()));
    };
    let h = l / 2;
    let mask = (1u64 << h) - 1;
    let pos = |c: u64| hc.binary_search(&c).ok();
    Ok(Col::from_fn(configs.len(), |k| {
        let c = configs[k];
        match (pos(c >> h), pos(c & mask)) {
            (Some(a), Some(b)) => half.vector[a] * half.vector[b],
            _ => ZERO,
        }
    }))
}

/// Product of the string-free parts of two half-width states, placed side
/// by side. `reflect_right` mirrors the right factor left to right.
fn link_trousers(basis: &LinkBasis, left: (&LinkBasis, &Vector), right: (&LinkBasis, &Vector), reflect_right: bool) -> Result<Vector> {
    let mut out = Col::<C64>::zeros(basis.len());
    for (a, sa) in left.0.iter().enumerate() {
        if sa.has_strings() || left.1[a] == ZERO {
            continue;
        }
        for (b, sb) in right.0.iter().enumerate() {
            if sb.has_strings() || right.1[b] == ZERO {
                continue;
            }
            let sb = if reflect_right { sb.reflect() } else { sb.clone() };
            let s = sa.concat(&sb)?;
            let k = basis.position(&s).ok_or_else(|| Error::Sector(format!("{s} is not in the width-{} basis", basis.len())))?;
            out[k] += left.1[a] * right.1[b];
        }
    }
    Ok(out)
}

fn empty_index(basis: &LinkBasis, l: usize) -> Result<usize> {
    basis
        .position(&LinkState::parse(&".".repeat(l))?)
        .ok_or_else(|| Error::Sector("basis has no empty state".into()))
}

/// Unnormalized trousers state of a Hamiltonian model and the half-width
/// model it came from.
fn raw_trousers(model: &BuiltModel, side: Side) -> Result<Vector> {
    match model.spec {
        ModelSpec::XxzChain { l, q, sector } => {
            if sector != SpinSector::TwiceSz(0) {
                return Err(Error::Sector("XXZ trousers live in the S^z = 0 sector".into()));
            }
            let h = halves(l, true)?;
            let hm = build_xxz(h, q, sector)?;
            let g = leading_eigenpair(&hm, Side::Right, None)?;
            spin_trousers(model, &g, &hm)
        }
        ModelSpec::PercolationH { l, y } => {
            let h = halves(l, true)?;
            let hm = build_percolation_h(h, y)?;
            let g = leading_eigenpair(&hm, Side::Right, None)?;
            let hb = hm.links().expect("link basis");
            link_trousers(model.links().expect("link basis"), (hb, &g.vector), (hb, &g.vector), false)
        }
        ModelSpec::DiluteHoneycombT { l, x, .. } => {
            let h = halves(l, false)?;
            let hm = build_dilute_t(h, x)?;
            let hb = hm.links().expect("link basis");
            let g = leading_eigenpair(&hm, side, None)?;
            let g = normalize(g.vector, None, Normalization::Component(empty_index(hb, h)?))?;
            link_trousers(model.links().expect("link basis"), (hb, &g), (hb, &g), h % 2 == 1)
        }
        _ => Err(Error::Sector("no trousers construction for this model".into())),
    }
}

/// Trousers state of `model`. Hamiltonian models are normalized so that
/// its pairing with the form-normalized ground state is 1; the dilute model
/// by its all-empty component. `ground_hint` is the shift for large XXZ
/// chains.
pub fn trousers(model: &BuiltModel, side: Side, ground_hint: Option<C64>) -> Result<TrousersState> {
    let raw = raw_trousers(model, side)?;
    if let ModelSpec::DiluteHoneycombT { .. } = model.spec {
        return Ok(TrousersState { vector: raw, side, normalization: "empty-component" });
    }
    let form = form_for(model)?;
    let g = ground_state(model, Side::Right, Some(&form), Normalization::Form, ground_hint)?;
    Ok(TrousersState { vector: normalize_against(raw, &form, &g.vector)?, side, normalization: "ground-pairing" })
}

fn normalize_against(t: Vector, form: &BilinearForm, ground: &Vector) -> Result<Vector> {
    let p = form.pairing(t.as_ref(), ground.as_ref());
    if p.norm() < 1e-300 {
        return Err(Error::Singular("trousers state is orthogonal to the ground state".into()));
    }
    Ok(&t * faer::Scale(p.inv()))
}

/// The invariant form each model is self-adjoint under.
pub fn form_for(model: &BuiltModel) -> Result<BilinearForm> {
    let tag = model.operator.basis.clone();
    Ok(match model.spec {
        ModelSpec::XxzChain { .. } | ModelSpec::IsingChain { .. } => formal_q_form(tag, model.dim()),
        ModelSpec::PercolationH { y, .. } => diagram_form(model.links().expect("link basis"), tag, 1.0, y.unwrap_or(1.0)),
        ModelSpec::DenseLoopT { n, .. } => loop_form(model.links().expect("link basis"), tag, n),
        ModelSpec::DiluteHoneycombT { .. } => dilute_form(model.links().expect("link basis"), tag, 1.0),
    })
}

// -------------------------------------------------------------------- b(L)

#[derive(Clone, Debug)]
pub struct BMeasurement {
    pub model: String,
    pub l: usize,
    pub b: f64,
    /// Imaginary part left over from round-off.
    pub b_imag: f64,
    pub delta: f64,
    /// `|<Trousers|v>|` with `v` of unit Euclidean norm: how much `b`
    /// moves under `w -> w + beta v`, per unit `beta`.
    pub gauge_sensitivity: f64,
    pub lambda0: C64,
    pub lambda: C64,
    pub convention: &'static str,
    pub form: String,
    pub residual: f64,
    pub split: f64,
}

/// `4 <Tb|w> <lw|Tk> / <lv|w>` under `form`; for a symmetric problem pass
/// the right cell and trousers twice.
pub fn b_from_parts(
    form: &BilinearForm,
    right: (ColRef<'_, C64>, ColRef<'_, C64>),
    left: (ColRef<'_, C64>, ColRef<'_, C64>),
    tk: ColRef<'_, C64>,
    tb: ColRef<'_, C64>,
) -> Result<C64> {
    let (_, w) = right;
    let (lv, lw) = left;
    let den = form.pairing(lv, w);
    if den.norm() < 1e-300 {
        return Err(Error::Singular("<v|w> vanishes".into()));
    }
    Ok(4.0 * form.pairing(tb, w) * form.pairing(lw, tk) / den)
}

fn measure(model: &BuiltModel, cell: &JordanCell, form: &BilinearForm, tk: &Vector, tb: &Vector, name: String) -> Result<BMeasurement> {
    let right = (cell.right.v.as_ref(), cell.right.w.as_ref());
    let left = cell.left.as_ref().map(|c| (c.v.as_ref(), c.w.as_ref())).unwrap_or(right);
    let b = b_from_parts(form, right, left, tk.as_ref(), tb.as_ref())?;
    let gauge = form.pairing(tb.as_ref(), cell.right.v.as_ref()).norm() / cell.right.v.norm_l2();
    Ok(BMeasurement {
        model: name,
        l: model.l(),
        b: b.re,
        b_imag: b.im,
        delta: cell.delta,
        gauge_sensitivity: gauge,
        lambda0: cell.lambda0,
        lambda: cell.lambda,
        convention: cell.convention.tag(),
        form: form.kind.id(),
        residual: cell.residual,
        split: cell.split,
    })
}

/// Jordan cell and trousers of a symmetric Hamiltonian problem.
fn hamiltonian_b(model: &BuiltModel, sel: LevelSelector, ground_hint: Option<C64>, name: String) -> Result<BMeasurement> {
    let form = form_for(model)?;
    let cell = extract_jordan_cell(model, sel, ground_hint)?;
    let g = ground_state(model, Side::Right, Some(&form), Normalization::Form, ground_hint)?;
    let t = normalize_against(raw_trousers(model, Side::Right)?, &form, &g.vector)?;
    measure(model, &cell, &form, &t, &t, name)
}

pub fn xxz_q() -> C64 {
    C64::from_polar(1.0, PI / 3.0)
}

/// `b(L)` of the XXZ chain at `q = e^{i pi/3}`, `S^z = 0`, from the first
/// doubly degenerate level. Chains beyond the dense range use shift-invert
/// around guesses: the exact ground energy `-3(L-1)/2` at this `q`, and the
/// level placed at the `L = 12` gap estimate.
pub fn b_xxz(l: usize) -> Result<BMeasurement> {
    if l < 4 || !l.is_multiple_of(4) {
        return Err(Error::InvalidSize { l, reason: "XXZ b(L) needs L a multiple of 4" });
    }
    let model = build_xxz(l, xxz_q(), SpinSector::TwiceSz(0))?;
    if l <= XXZ_DENSE_MAX {
        return hamiltonian_b(&model, LevelSelector::FirstDoublet, None, "xxz".into());
    }
    let d12 = crate::spectral::delta_estimate(&build_xxz(12, xxz_q(), SpinSector::TwiceSz(0))?, None)?;
    let e0 = -1.5 * (l as f64 - 1.0);
    let scale = PI * xxz_fermi_velocity(PI / 3.0) / l as f64;
    let sel = LevelSelector::Near(C64::new(e0 + scale * d12, 0.0));
    hamiltonian_b(&model, sel, Some(C64::new(e0 - 0.1 * scale, 0.0)), "xxz".into())
}

/// `b(L)` of the `y`-deformed percolation chain. At `y = 1` the level is
/// diagonalizable and this fails with [`Error::Diagonalizable`].
pub fn b_deformed(l: usize, y: f64) -> Result<BMeasurement> {
    let model = build_percolation_h(l, Some(y))?;
    hamiltonian_b(&model, LevelSelector::FirstDoublet, None, format!("percolation y={y}"))
}

/// `b(L)` of dilute polymers (`n = 0` at the critical monomer fugacity),
/// from the right and left cells of the transfer matrix and the ket and bra
/// trousers states.
pub fn b_polymer(l: usize) -> Result<BMeasurement> {
    b_polymer_at(l, critical_x())
}

pub fn b_polymer_at(l: usize, x: f64) -> Result<BMeasurement> {
    let model = build_dilute_t(l, x)?;
    let form = form_for(&model)?;
    let cell = extract_jordan_cell(&model, LevelSelector::FirstDoublet, None)?;
    let tk = raw_trousers(&model, Side::Right)?;
    let tb = raw_trousers(&model, Side::Left)?;
    measure(&model, &cell, &form, &tk, &tb, "polymer".into())
}

// --------------------------------------------------------- boundary entropy

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsingBoundary {
    /// All spins up.
    Fixed,
    /// Uniform superposition.
    Free,
}

/// `-(1/2) log(<B|0>^2 / <0|0>)`, with the boundary state paired under its
/// own form and the ground state under the model's.
pub fn boundary_free_energy(model: &BuiltModel, form: &BilinearForm, boundary: &Vector, boundary_form: &BilinearForm) -> Result<f64> {
    let g = leading_eigenpair(model, Side::Right, None)?.vector;
    let ov = boundary_form.pairing(boundary.as_ref(), g.as_ref());
    let nn = form.pairing(g.as_ref(), g.as_ref());
    let ratio = ov * ov / nn;
    if ratio.re <= 0.0 || ratio.im.abs() > 1e-8 * ratio.norm() {
        return Err(Error::Singular(format!("overlap ratio {ratio} is not positive")));
    }
    Ok(-0.5 * ratio.re.ln())
}

pub fn ising_free_energy(l: usize, bc: IsingBoundary) -> Result<f64> {
    let model = build_ising(l)?;
    let form = form_for(&model)?;
    let dim = model.dim();
    let b = match bc {
        IsingBoundary::Fixed => Col::from_fn(dim, |i| if i == 0 { C64::new(1.0, 0.0) } else { ZERO }),
        IsingBoundary::Free => Col::from_fn(dim, |_| C64::new((dim as f64).sqrt().recip(), 0.0)),
    };
    boundary_free_energy(&model, &form, &b, &form)
}

pub fn ising_boundary_entropy(sizes: &[usize], bc: IsingBoundary) -> Result<FitResult> {
    let f = sizes.iter().map(|&l| ising_free_energy(l, bc)).collect::<Result<Vec<_>>>()?;
    fit_inverse_powers(sizes, &f)
}

/// Dense loop model on the cylinder, boundary state of adjacent arcs whose
/// loops all touch the boundary and weigh `n1`.
pub fn loop_free_energy(l: usize, n: f64, n1: f64) -> Result<f64> {
    if !(n > 0.0 && n <= 2.0) {
        return Err(bad_param("n", "the transfer matrix ground state needs 0 < n <= 2"));
    }
    if n1 <= 0.0 {
        return Err(bad_param("n1", "must be positive"));
    }
    let model = build_dense_loop_t(l, n)?;
    let basis = model.links().expect("link basis");
    let form = form_for(&model)?;
    let bform = diagram_form(basis, model.operator.basis.clone(), n1, 1.0);
    let k = basis
        .position(&LinkState::parse(&"()".repeat(l / 2))?)
        .ok_or_else(|| Error::Sector("adjacent-arc state missing".into()))?;
    let b = Col::from_fn(model.dim(), |i| if i == k { C64::new(1.0, 0.0) } else { ZERO });
    boundary_free_energy(&model, &form, &b, &bform)
}

/// Closed-form boundary entropy with `n = 2 cos(gamma)`, `g = 1 - gamma/pi`
/// and `n1 = sin((r+1) gamma) / sin(r gamma)`. Returns `(s, r)`.
pub fn loop_entropy_closed_form(n: f64, n1: f64) -> Result<(f64, f64)> {
    if !(n > -2.0 && n < 2.0) {
        return Err(bad_param("n", "needs -2 < n < 2"));
    }
    let gamma = (n / 2.0).acos();
    let g = 1.0 - gamma / PI;
    // n1 = cos(gamma) + sin(gamma) cot(r gamma) is monotone in r gamma on (0, pi)
    let rg = gamma.sin().atan2(n1 - gamma.cos());
    if !(rg > 0.0 && rg < PI) {
        return Err(Error::RootSolve(format!("no r for n1 = {n1}")));
    }
    let r = rg / gamma;
    let inner = (2.0 * g).powf(-0.25) * (rg / g).sin() / rg.sin() * (gamma.sin() / (gamma / g).sin()).sqrt();
    if !(inner > 0.0) {
        return Err(Error::RootSolve(format!("closed form is not real at n = {n}, n1 = {n1}")));
    }
    Ok((-inner.ln(), r))
}

#[derive(Clone, Debug)]
pub struct LoopEntropy {
    pub n: f64,
    pub n1: f64,
    pub lattice: FitResult,
    pub exact: f64,
    pub r: f64,
}

pub fn loop_boundary_entropy(sizes: &[usize], n: f64, n1: f64) -> Result<LoopEntropy> {
    let (exact, r) = loop_entropy_closed_form(n, n1)?;
    let f = sizes.iter().map(|&l| loop_free_energy(l, n, n1)).collect::<Result<Vec<_>>>()?;
    Ok(LoopEntropy { n, n1, lattice: fit_inverse_powers(sizes, &f)?, exact, r })
}

// --------------------------------------------------------------------- fits

#[derive(Clone, Debug)]
pub struct FitResult {
    pub value: f64,
    pub ansatz: String,
    pub coefficients: Vec<f64>,
    pub residual: f64,
    /// Spread across ansaetze; zero for a single interpolation.
    pub uncertainty: f64,
    pub alternatives: Vec<(String, f64)>,
}

/// Exact interpolation by `sum_{k=-1}^{m-2} c_k / L^k` through `m` points;
/// `value` is `c_0`.
pub fn fit_inverse_powers(sizes: &[usize], values: &[f64]) -> Result<FitResult> {
    let m = sizes.len();
    if m < 2 || values.len() != m {
        return Err(Error::TooFewPoints { needed: 2, got: m.min(values.len()) });
    }
    let a = Mat::<f64>::from_fn(m, m, |i, j| (sizes[i] as f64).powi(1 - j as i32));
    let rhs = Col::<f64>::from_fn(m, |i| values[i]);
    let c = a.partial_piv_lu().solve(&rhs);
    let residual = (&a * &c - &rhs).norm_l2();
    Ok(FitResult {
        value: c[1],
        ansatz: format!("interp k=-1..{}", m as i32 - 2),
        coefficients: c.iter().copied().collect(),
        residual,
        uncertainty: 0.0,
        alternatives: Vec::new(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ansatz {
    /// `b + a1/L`
    Linear,
    /// `b + a1/L + a2/L^2`
    Quadratic,
    /// `b + a1/L^p`, `p` fitted in `[0.5, 3]`
    Power,
}

impl Ansatz {
    pub fn id(&self) -> &'static str {
        match self {
            Ansatz::Linear => "lin",
            Ansatz::Quadratic => "quad",
            Ansatz::Power => "pow",
        }
    }

    fn params(&self) -> usize {
        match self {
            Ansatz::Linear => 2,
            Ansatz::Quadratic | Ansatz::Power => 3,
        }
    }
}

struct Lsq {
    coefficients: Vec<f64>,
    residual: f64,
    condition: f64,
}

fn lstsq(ls: &[f64], bs: &[f64], exps: &[f64]) -> Lsq {
    let a = Mat::<f64>::from_fn(ls.len(), exps.len(), |i, j| ls[i].powf(-exps[j]));
    let rhs = Col::<f64>::from_fn(bs.len(), |i| bs[i]);
    let c = a.qr().solve_lstsq(&rhs);
    let residual = (&a * &c - &rhs).norm_l2();
    let s = a.singular_values().unwrap_or_default();
    let condition = match (s.first(), s.last()) {
        (Some(hi), Some(lo)) if *lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    };
    Lsq { coefficients: c.iter().copied().collect(), residual, condition }
}

pub fn fit_ansatz(points: &[(usize, f64)], ansatz: Ansatz) -> Result<FitResult> {
    if points.len() < ansatz.params() {
        return Err(Error::TooFewPoints { needed: ansatz.params(), got: points.len() });
    }
    let ls: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let bs: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (fit, extra) = match ansatz {
        Ansatz::Linear => (lstsq(&ls, &bs, &[0.0, 1.0]), None),
        Ansatz::Quadratic => (lstsq(&ls, &bs, &[0.0, 1.0, 2.0]), None),
        Ansatz::Power => {
            let res = |p: f64| lstsq(&ls, &bs, &[0.0, p]).residual;
            let grid: Vec<f64> = (0..=100).map(|k| 0.5 + 2.5 * k as f64 / 100.0).collect();
            let k = (0..grid.len()).min_by(|&a, &b| res(grid[a]).total_cmp(&res(grid[b]))).unwrap();
            let (mut lo, mut hi) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..80 {
                let (x1, x2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
                if res(x1) < res(x2) {
                    hi = x2;
                } else {
                    lo = x1;
                }
            }
            let p = 0.5 * (lo + hi);
            (lstsq(&ls, &bs, &[0.0, p]), Some(p))
        }
    };
    let mut coefficients = fit.coefficients;
    coefficients.extend(extra);
    Ok(FitResult {
        value: coefficients[0],
        ansatz: ansatz.id().into(),
        coefficients,
        residual: fit.residual,
        uncertainty: 0.0,
        alternatives: vec![(format!("cond={:.3e}", fit.condition), fit.condition)],
    })
}

/// Infinite-size estimate of `b(L)`. The central value comes from the
/// quadratic ansatz when its design matrix is well conditioned (the linear
/// one otherwise); the uncertainty is the spread across all ansaetze.
pub fn extrapolate_b(points: &[(usize, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: points.len() });
    }
    let fits: Vec<FitResult> =
        [Ansatz::Linear, Ansatz::Quadratic, Ansatz::Power].iter().map(|&a| fit_ansatz(points, a)).collect::<Result<_>>()?;
    let quad_cond = fits[1].alternatives[0].1;
    let central = if quad_cond < 1e8 { &fits[1] } else { &fits[0] };
    let lo = fits.iter().map(|f| f.value).fold(f64::INFINITY, f64::min);
    let hi = fits.iter().map(|f| f.value).fold(f64::NEG_INFINITY, f64::max);
    Ok(FitResult {
        value: central.value,
        ansatz: central.ansatz.clone(),
        coefficients: central.coefficients.clone(),
        residual: central.residual,
        uncertainty: hi - lo,
        alternatives: fits.iter().map(|f| (f.ansatz.clone(), f.value)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;

    #[test]
    fn xxz_trousers_l4() {
        let m = build_xxz(4, xxz_q(), SpinSector::TwiceSz(0)).unwrap();
        let t = trousers(&m, Side::Right, None).unwrap();
        let r = reference::xxz_trousers4();
        // proportional to the reference, and pairs to 1 with the ground state
        let k = t.vector[1] / r[1];
        for i in 0..6 {
            assert!((t.vector[i] - k * r[i]).norm() < 1e-12);
        }
        let form = form_for(&m).unwrap();
        let g = ground_state(&m, Side::Right, Some(&form), Normalization::Form, None).unwrap();
        assert!((form.pairing(t.vector.as_ref(), g.vector.as_ref()) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn trousers_blind_to_v() {
        for l in [4, 8] {
            assert!(b_xxz(l).unwrap().gauge_sensitivity < 1e-12);
        }
        for l in [4, 6] {
            assert!(b_polymer(l).unwrap().gauge_sensitivity < 1e-12);
        }
    }

    #[test]
    fn dilute_trousers_small() {
        let x = critical_x();
        let m2 = build_dilute_t(2, x).unwrap();
        let t = trousers(&m2, Side::Right, None).unwrap();
        let e = empty_index(m2.links().unwrap(), 2).unwrap();
        for i in 0..m2.dim() {
            let want = if i == e { 1.0 } else { 0.0 };
            assert!((t.vector[i] - want).norm() < 1e-14);
        }
        let m4 = build_dilute_t(4, x).unwrap();
        let t = trousers(&m4, Side::Right, None).unwrap();
        let a = x.powi(4) / (1.0 - x.powi(4));
        let b = m4.links().unwrap();
        for (s, want) in [("....", 1.0), ("()..", a), ("..()", a), ("()()", a * a), (".().", 0.0)] {
            let k = b.position(&LinkState::parse(s).unwrap()).unwrap();
            assert!((t.vector[k].re - want).abs() < 1e-12, "{s}");
        }
    }

    #[test]
    fn b_small_sizes() {
        let bx = b_xxz(4).unwrap();
        assert!((bx.b - reference::b_xxz4()).abs() < 1e-9);
        assert!(bx.b_imag.abs() < 1e-9);
        let bp = b_polymer(2).unwrap();
        assert!((bp.b - reference::b_polymer2()).abs() < 1e-9);
        let bd = b_deformed(4, 2.0).unwrap();
        assert!((bd.b - bx.b).abs() < 1e-8);
        assert!(matches!(b_deformed(4, 1.0), Err(Error::Diagonalizable { .. })));
    }

    #[test]
    fn closed_form_at_r_one() {
        for n in [0.3, 1.0, 1.5] {
            let (s, r) = loop_entropy_closed_form(n, n).unwrap();
            let gamma = (n / 2.0f64).acos();
            let g = 1.0 - gamma / PI;
            let direct = -((2.0 * g).powf(-0.25) * ((gamma / g).sin() / gamma.sin()).sqrt()).ln();
            assert!((r - 1.0).abs() < 1e-12 && (s - direct).abs() < 1e-12);
        }
        let (s, _) = loop_entropy_closed_form(2f64.sqrt(), 1.0).unwrap();
        assert!(s.is_finite());
    }

    #[test]
    fn interpolation_and_extrapolation_identities() {
        let f = fit_inverse_powers(&[4, 8], &[2.0 * 4.0 + 0.5, 2.0 * 8.0 + 0.5]).unwrap();
        assert!((f.value - 0.5).abs() < 1e-13);
        let pts: Vec<(usize, f64)> = [4, 8, 12, 16].iter().map(|&l| (l, -0.6 + 3.0 / l as f64)).collect();
        let e = extrapolate_b(&pts).unwrap();
        assert!((e.value + 0.6).abs() < 1e-12);
        assert!(e.uncertainty < 1e-6);
        assert!(extrapolate_b(&pts[..2]).is_err());
    }
}
