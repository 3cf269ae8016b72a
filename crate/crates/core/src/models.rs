//! Hamiltonians and transfer matrices: the periodic Ising chain, the
//! quantum-group symmetric XXZ chain, the dense loop model on a cylinder,
//! the dilute loop model on the honeycomb strip, and the open TL
//! (percolation) chain.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::diagram::{
    apply_e, apply_losange, enumerate_dense, enumerate_dilute, honeycomb_halves, DiluteSector, EOutcome, HalfTile,
    LinkBasis, LinkState, LosangeTile,
};
use crate::error::{bad_param, Error, Result};
use crate::linalg::{sparse_from_triplets, BasisTag, Matrix, Operator, ONE};
use crate::tl::{build_deformed_rep, build_geometric_rep, build_spin_rep, spin_bit, RepBasis, SpinSector};
use crate::C64;

/// Largest Ising chain (2^18 states).
pub const MAX_ISING_L: usize = 18;

/// Stored entries allowed per dilute transfer matrix (about 1 GB of
/// triplets); larger widths fail with [`Error::InvalidSize`].
pub const MAX_TRANSFER_ENTRIES: usize = 30_000_000;

/// How a Jordan cell of this operator is normalized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Convention {
    /// `(L / (pi v_F)) (H - E_0)` has unit off-diagonal entry.
    Hamiltonian { v_f: f64 },
    /// `T = lambda_0 exp[-kappa (Delta + N)]` with `kappa = (2/sqrt 3)(pi/L)`.
    Transfer { kappa: f64 },
}

impl Convention {
    pub fn tag(&self) -> &'static str {
        match self {
            Convention::Hamiltonian { .. } => "hamiltonian",
            Convention::Transfer { .. } => "transfer",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelSpec {
    IsingChain { l: usize },
    XxzChain { l: usize, q: C64, sector: SpinSector },
    DenseLoopT { l: usize, n: f64 },
    DiluteHoneycombT { l: usize, x: f64, sector: DiluteSector },
    PercolationH { l: usize, y: Option<f64> },
}

impl ModelSpec {
    pub fn build(&self) -> Result<BuiltModel> {
        match *self {
            ModelSpec::IsingChain { l } => build_ising(l),
            ModelSpec::XxzChain { l, q, sector } => build_xxz(l, q, sector),
            ModelSpec::DenseLoopT { l, n } => build_dense_loop_t(l, n),
            ModelSpec::DiluteHoneycombT { l, x, sector } => build_dilute_t_in(l, x, sector),
            ModelSpec::PercolationH { l, y } => build_percolation_h(l, y),
        }
    }

    pub fn l(&self) -> usize {
        match *self {
            ModelSpec::IsingChain { l }
            | ModelSpec::XxzChain { l, .. }
            | ModelSpec::DenseLoopT { l, .. }
            | ModelSpec::DiluteHoneycombT { l, .. }
            | ModelSpec::PercolationH { l, .. } => l,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BuiltModel {
    pub spec: ModelSpec,
    pub operator: Operator,
    /// Action on bras, present when it is not the transpose of `operator`.
    pub left_operator: Option<Operator>,
    pub basis: RepBasis,
    pub convention: Convention,
}

impl BuiltModel {
    pub fn l(&self) -> usize {
        self.spec.l()
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// String number of each basis state for link bases with strings; the
    /// operator never increases it.
    pub fn grading(&self) -> Option<Vec<usize>> {
        match (&self.basis, self.spec) {
            (RepBasis::Links(b), ModelSpec::DiluteHoneycombT { .. }) => {
                Some(b.iter().map(|s| s.string_count()).collect())
            }
            _ => None,
        }
    }

    pub fn links(&self) -> Option<&LinkBasis> {
        match &self.basis {
            RepBasis::Links(b) => Some(b),
            _ => None,
        }
    }
}

/// Fermi velocity of `(L-1)/2 - 2 sum e_i` in the spin representation with
/// `q = e^{i gamma}`: `2 pi sin(gamma) / gamma`.
pub fn xxz_fermi_velocity(gamma: f64) -> f64 {
    2.0 * PI * gamma.sin() / gamma
}

pub fn honeycomb_kappa(l: usize) -> f64 {
    2.0 / 3f64.sqrt() * PI / l as f64
}

/// Critical monomer fugacity of the dilute `n = 0` model.
pub fn critical_x() -> f64 {
    (2.0 + 2f64.sqrt()).powf(-0.5)
}

/// `-sum sigma^z_i sigma^z_{i+1} - sum sigma^x_i`, periodic.
pub fn build_ising(l: usize) -> Result<BuiltModel> {
    if !(2..=MAX_ISING_L).contains(&l) {
        return Err(Error::InvalidSize { l, reason: "Ising chains need 2 <= L <= 18" });
    }
    let dim = 1usize << l;
    let cols: Vec<Vec<(usize, usize, C64)>> = (0..dim)
        .into_par_iter()
        .map(|c| {
            let mut t = Vec::with_capacity(l + 1);
            let mut diag = 0.0;
            for i in 0..l {
                let j = (i + 1) % l;
                let same = ((c >> i) & 1) == ((c >> j) & 1);
                diag -= if same { 1.0 } else { -1.0 };
                t.push((c ^ (1 << i), c, C64::new(-1.0, 0.0)));
            }
            t.push((c, c, C64::new(diag, 0.0)));
            t
        })
        .collect();
    let t: Vec<_> = cols.into_iter().flatten().collect();
    let operator = Operator::new(Matrix::Sparse(sparse_from_triplets(dim, &t)), BasisTag::new(format!("spins L={l} All")));
    Ok(BuiltModel {
        spec: ModelSpec::IsingChain { l },
        operator,
        left_operator: None,
        basis: RepBasis::Spins { l, configs: (0..dim as u64).collect() },
        convention: Convention::Hamiltonian { v_f: 2.0 },
    })
}

/// Open XXZ chain with the quantum-group boundary term, assembled from the
/// spin TL generators.
pub fn build_xxz(l: usize, q: C64, sector: SpinSector) -> Result<BuiltModel> {
    if (q.norm() - 1.0).abs() > 1e-12 {
        return Err(bad_param("q", "must lie on the unit circle"));
    }
    if l % 2 == 1 && sector == SpinSector::TwiceSz(0) {
        return Err(Error::InvalidSize { l, reason: "S^z = 0 needs an even number of sites" });
    }
    let rep = build_spin_rep(l, q, sector)?;
    let operator = rep.hamiltonian();
    let gamma = q.arg().abs();
    Ok(BuiltModel {
        spec: ModelSpec::XxzChain { l, q, sector },
        operator,
        left_operator: None,
        basis: rep.basis,
        convention: Convention::Hamiltonian { v_f: xxz_fermi_velocity(gamma) },
    })
}

/// The XXZ chain written with Pauli matrices, for cross-checks.
pub fn xxz_pauli_form(l: usize, q: C64, configs: &[u64]) -> Vec<(usize, usize, C64)> {
    let index: HashMap<u64, usize> = configs.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let sz = |c: u64, i: usize| if c & spin_bit(l, i) == 0 { 1.0 } else { -1.0 };
    let (ch, sh) = ((q + q.inv()) / 2.0, (q - q.inv()) / 2.0);
    let mut t = Vec::new();
    for (k, &c) in configs.iter().enumerate() {
        let mut d = sh * (sz(c, 0) - sz(c, l - 1));
        for i in 0..l - 1 {
            d += ch * sz(c, i) * sz(c, i + 1);
            if sz(c, i) != sz(c, i + 1) {
                let f = c ^ spin_bit(l, i) ^ spin_bit(l, i + 1);
                t.push((index[&f], k, C64::new(2.0, 0.0)));
            }
        }
        t.push((k, k, d));
    }
    t
}

/// Dense loop transfer matrix on the cylinder as a product of `1 + e_i`
/// factors: first the pairs `(2k, 2k+1)`, then `(2k+1, 2k+2 mod L)`.
pub fn build_dense_loop_t(l: usize, n: f64) -> Result<BuiltModel> {
    let states = enumerate_dense(l)?;
    let basis = LinkBasis::new(states);
    let dim = basis.len();
    let pairs: Vec<(usize, usize)> =
        (0..l).step_by(2).map(|i| (i, i + 1)).chain((1..l).step_by(2).map(|i| (i, (i + 1) % l))).collect();
    let factors = pairs
        .iter()
        .map(|&(i, j)| {
            let mut t = Vec::with_capacity(2 * dim);
            for (k, s) in basis.iter().enumerate() {
                t.push((k, k, ONE));
                let (img, out) = apply_e(s, i, j);
                let w = if out == EOutcome::ClosedLoop { n } else { 1.0 };
                let row = basis.position(&img).ok_or_else(|| Error::Sector(format!("{img} left the basis")))?;
                t.push((row, k, C64::new(w, 0.0)));
            }
            Ok(sparse_from_triplets(dim, &t))
        })
        .collect::<Result<Vec<_>>>()?;
    let matrix = if l == 2 { Matrix::Dense(Matrix::Factored(factors).to_dense()) } else { Matrix::Factored(factors) };
    Ok(BuiltModel {
        spec: ModelSpec::DenseLoopT { l, n },
        operator: Operator::new(matrix, BasisTag::new(format!("dense-links L={l}"))),
        left_operator: None,
        basis: RepBasis::Links(basis),
        convention: Convention::Transfer { kappa: PI / l as f64 },
    })
}

/// Default sector of the dilute transfer matrix: zero and two strings.
/// The subspace is invariant under both operators and holds the ground
/// state and the first degenerate level.
pub fn default_dilute_sector(_l: usize) -> DiluteSector {
    DiluteSector::even_up_to(2)
}

pub fn build_dilute_t(l: usize, x: f64) -> Result<BuiltModel> {
    build_dilute_t_in(l, x, default_dilute_sector(l))
}

/// Honeycomb transfer matrix of the `n = 0` dilute loop model. The right
/// operator stacks the lower then the upper half row on kets; the left
/// operator stacks them in reverse order on bras, whose strings run to
/// the future.
pub fn build_dilute_t_in(l: usize, x: f64, sector: DiluteSector) -> Result<BuiltModel> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(bad_param("x", "monomer fugacity must be positive"));
    }
    let states = enumerate_dilute(l, sector)?;
    let basis = LinkBasis::new(states);
    let (lower, upper) = honeycomb_halves(l);
    let right: Vec<HalfTile> = lower.iter().chain(upper.iter()).copied().collect();
    let left: Vec<HalfTile> = upper.iter().chain(lower.iter()).copied().collect();
    let tag = BasisTag::new(format!("dilute L={l} {sector:?}"));
    let op = |order: &[HalfTile]| -> Result<Operator> {
        let stored = AtomicUsize::new(0);
        let cols: Vec<Vec<(usize, usize, C64)>> = basis
            .states()
            .par_iter()
            .enumerate()
            .map(|(k, s)| {
                let col = propagate(s, order, x);
                if stored.fetch_add(col.len(), Ordering::Relaxed) + col.len() > MAX_TRANSFER_ENTRIES {
                    return Err(Error::InvalidSize { l, reason: "transfer matrix exceeds the memory budget" });
                }
                col.into_iter()
                    .map(|(img, w)| {
                        basis
                            .position(&img)
                            .map(|row| (row, k, C64::new(w, 0.0)))
                            .ok_or_else(|| Error::Sector(format!("{img} left the basis")))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let t: Vec<_> = cols.into_iter().flatten().collect();
        Ok(Operator::new(Matrix::from_triplets(basis.len(), &t), tag.clone()))
    };
    let operator = op(&right)?;
    let left_operator = Some(op(&left)?);
    Ok(BuiltModel {
        spec: ModelSpec::DiluteHoneycombT { l, x, sector },
        operator,
        left_operator,
        basis: RepBasis::Links(basis),
        convention: Convention::Transfer { kappa: honeycomb_kappa(l) },
    })
}

/// All weighted outcomes of stacking the given tiles on one state. Closed
/// loops carry weight zero and are dropped.
pub fn propagate(state: &LinkState, tiles: &[HalfTile], x: f64) -> Vec<(LinkState, f64)> {
    let mut cur: HashMap<LinkState, f64> = HashMap::from([(state.clone(), 1.0)]);
    for &t in tiles {
        let mut next: HashMap<LinkState, f64> = HashMap::with_capacity(cur.len() * 2);
        for (s, w) in cur {
            match t {
                HalfTile::Triangle(i) => {
                    let f = if s.site(i).is_occupied() { x } else { 1.0 };
                    *next.entry(s).or_default() += w * f;
                }
                HalfTile::Losange(i) => {
                    let (a, b) = (s.site(i).is_occupied(), s.site(i + 1).is_occupied());
                    for tile in LosangeTile::compatible(a, b) {
                        let (img, out) = apply_losange(&s, i, tile).expect("tile chosen to be compatible");
                        if out.closed_loops > 0 {
                            continue;
                        }
                        *next.entry(img).or_default() += w * x.powi(out.monomers as i32);
                    }
                }
            }
        }
        cur = next;
    }
    let mut out: Vec<_> = cur.into_iter().filter(|(_, w)| *w != 0.0).collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// `(L-1)/2 - 2 sum e_i` on all open link states at `n = 1`, geometric
/// (`y = None` or `Some(1)`) or deformed.
pub fn build_percolation_h(l: usize, y: Option<f64>) -> Result<BuiltModel> {
    let rep = match y {
        Some(y) if y != 1.0 => build_deformed_rep(l, C64::new(y, 0.0))?,
        _ => build_geometric_rep(l, ONE)?,
    };
    let operator = rep.hamiltonian();
    Ok(BuiltModel {
        spec: ModelSpec::PercolationH { l, y },
        operator,
        left_operator: None,
        basis: rep.basis,
        convention: Convention::Hamiltonian { v_f: xxz_fermi_velocity(PI / 3.0) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::reference;

    fn q3() -> C64 {
        C64::from_polar(1.0, PI / 3.0)
    }

    #[test]
    fn xxz_h4_fixture_and_pauli_form() {
        let m = build_xxz(4, q3(), SpinSector::TwiceSz(0)).unwrap();
        let h = m.operator.matrix.to_dense();
        assert!(max_abs((&h - reference::xxz_h4()).as_ref()) < 1e-14);
        for l in [4, 6] {
            let m = build_xxz(l, q3(), SpinSector::TwiceSz(0)).unwrap();
            let RepBasis::Spins { configs, .. } = &m.basis else { unreachable!() };
            let p = crate::linalg::dense_from_triplets(configs.len(), &xxz_pauli_form(l, q3(), configs));
            assert!(max_abs((m.operator.matrix.to_dense() - p).as_ref()) < 1e-13);
        }
        if let Convention::Hamiltonian { v_f } = m.convention {
            assert!((v_f - 3.0 * 3f64.sqrt()).abs() < 1e-13);
        }
    }

    #[test]
    fn xxz_commutes_with_sz() {
        let m = build_xxz(6, q3(), SpinSector::All).unwrap();
        for (i, j, _) in m.operator.matrix.triplets() {
            assert_eq!(i.count_ones(), j.count_ones());
        }
    }

    #[test]
    fn dilute_t2_fixture() {
        let x = critical_x();
        let m = build_dilute_t(2, x).unwrap();
        let names: Vec<_> = m.links().unwrap().iter().map(|s| s.to_string()).collect();
        assert_eq!(names, reference::DILUTE2_ORDER);
        let t = m.operator.matrix.to_dense();
        assert!(max_abs((t - reference::dilute_t2(x)).as_ref()) < 1e-15);
    }

    #[test]
    fn dilute_strings_never_increase() {
        let m = build_dilute_t_in(5, 0.6, DiluteSector::ALL).unwrap();
        let b = m.links().unwrap();
        for op in [&m.operator, m.left_operator.as_ref().unwrap()] {
            for (i, j, _) in op.matrix.triplets() {
                assert!(b.get(i).string_count() <= b.get(j).string_count());
            }
        }
    }

    #[test]
    fn dense_loop_l2() {
        // one row on two sites: two tilted squares, each 1 + e
        let n = 0.7;
        let m = build_dense_loop_t(2, n).unwrap();
        let t = m.operator.matrix.to_dense();
        assert!((t[(0, 0)] - C64::new((1.0 + n) * (1.0 + n), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn ising_l2() {
        let m = build_ising(2).unwrap();
        let h = m.operator.matrix.to_dense();
        // periodic L=2 counts the bond twice
        assert_eq!(h[(0, 0)], C64::new(-2.0, 0.0));
        assert_eq!(h[(1, 0)], C64::new(-1.0, 0.0));
        assert!(build_ising(19).is_err());
    }
}
