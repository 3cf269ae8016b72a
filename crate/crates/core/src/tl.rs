//! Temperley-Lieb generators in the link-state and spin representations,
//! relation checks, and structure probes of the `n = 1` link module.

use faer::Mat;

use crate::diagram::{apply_e, enumerate_open, EOutcome, LinkBasis, LinkState, OpenSector};
use crate::error::{bad_param, Error, Result};
use crate::linalg::{inverse, max_abs, null_space, BasisTag, Matrix, Operator, ONE};
use crate::reference;
use crate::C64;

/// Twice the magnetization, or the full `2^L` space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinSector {
    All,
    TwiceSz(i32),
}

/// Spin configurations as bit masks: site 0 is the most significant bit,
/// a set bit is a down spin. Ascending order.
pub fn spin_configs(l: usize, sector: SpinSector) -> Result<Vec<u64>> {
    if l == 0 || l > 24 {
        return Err(Error::InvalidSize { l, reason: "spin bases support 1..=24 sites" });
    }
    let keep = |c: u64| match sector {
        SpinSector::All => true,
        SpinSector::TwiceSz(m) => l as i32 - 2 * c.count_ones() as i32 == m,
    };
    let out: Vec<u64> = (0..1u64 << l).filter(|&c| keep(c)).collect();
    if out.is_empty() {
        return Err(Error::Sector(format!("no configurations with {sector:?} on {l} sites")));
    }
    Ok(out)
}

/// Bit of site `i` in a configuration of `l` sites.
pub fn spin_bit(l: usize, i: usize) -> u64 {
    1 << (l - 1 - i)
}

pub fn spin_label(l: usize, c: u64) -> String {
    (0..l).map(|i| if c & spin_bit(l, i) == 0 { 'u' } else { 'd' }).collect()
}

#[derive(Clone, Debug)]
pub enum RepBasis {
    Links(LinkBasis),
    Spins { l: usize, configs: Vec<u64> },
}

impl RepBasis {
    pub fn len(&self) -> usize {
        match self {
            RepBasis::Links(b) => b.len(),
            RepBasis::Spins { configs, .. } => configs.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug)]
pub struct TlRep {
    pub l: usize,
    pub n: C64,
    pub y: Option<C64>,
    pub basis: RepBasis,
    pub tag: BasisTag,
    /// `generators[i]` acts on sites `(i, i+1)`, i.e. it is `e_{i+1}`.
    pub generators: Vec<Matrix>,
}

impl TlRep {
    pub fn generator(&self, i: usize) -> Operator {
        Operator::new(self.generators[i].clone(), self.tag.clone())
    }

    /// `(L-1)/2 - 2 sum e_i`.
    pub fn hamiltonian(&self) -> Operator {
        let dim = self.basis.len();
        let mut t: Vec<(usize, usize, C64)> =
            (0..dim).map(|k| (k, k, C64::new((self.l as f64 - 1.0) / 2.0, 0.0))).collect();
        for g in &self.generators {
            t.extend(g.triplets().into_iter().map(|(i, j, v)| (i, j, -2.0 * v)));
        }
        Operator::new(Matrix::from_triplets(dim, &t), self.tag.clone())
    }
}

fn links_rep(l: usize, basis: LinkBasis, n: C64, y: Option<C64>, tag: BasisTag) -> Result<TlRep> {
    let yw = y.unwrap_or(ONE);
    let dim = basis.len();
    let mut generators = Vec::with_capacity(l - 1);
    for i in 0..l - 1 {
        let mut t = Vec::with_capacity(dim);
        for (k, s) in basis.iter().enumerate() {
            let (img, out) = apply_e(s, i, i + 1);
            let w = match out {
                EOutcome::ClosedLoop => n,
                EOutcome::Reconnected => ONE,
                EOutcome::Contracted { left_label } if left_label % 2 == 0 => yw,
                EOutcome::Contracted { .. } => ONE,
            };
            let row = basis
                .position(&img)
                .ok_or_else(|| Error::Sector(format!("{img} is outside the basis")))?;
            t.push((row, k, w));
        }
        generators.push(Matrix::from_triplets(dim, &t));
    }
    Ok(TlRep { l, n, y, basis: RepBasis::Links(basis), tag, generators })
}

/// Link-state representation on all defect sectors: closing a loop gives
/// `n`, contracting two strings gives 1.
pub fn build_geometric_rep(l: usize, n: C64) -> Result<TlRep> {
    geometric_on(l, open_basis(l)?, n)
}

/// Same generators on an explicitly ordered open basis.
pub fn geometric_on(l: usize, basis: LinkBasis, n: C64) -> Result<TlRep> {
    check_open_basis(l, &basis)?;
    let tag = BasisTag::new(format!("open-links L={l} order={}", order_id(&basis)));
    links_rep(l, basis, n, None, tag)
}

/// `n = 1` link representation in which contracting strings with labels
/// `(2k, 2k+1)` costs `y`; other contractions cost 1.
pub fn build_deformed_rep(l: usize, y: C64) -> Result<TlRep> {
    deformed_on(l, open_basis(l)?, y)
}

pub fn deformed_on(l: usize, basis: LinkBasis, y: C64) -> Result<TlRep> {
    check_open_basis(l, &basis)?;
    let tag = BasisTag::new(format!("open-links L={l} order={}", order_id(&basis)));
    links_rep(l, basis, ONE, Some(y), tag)
}

fn open_basis(l: usize) -> Result<LinkBasis> {
    if l < 2 {
        return Err(Error::InvalidSize { l, reason: "need at least two sites" });
    }
    Ok(LinkBasis::new(enumerate_open(l, OpenSector::All)?))
}

fn check_open_basis(l: usize, basis: &LinkBasis) -> Result<()> {
    if l < 2 {
        return Err(Error::InvalidSize { l, reason: "need at least two sites" });
    }
    if basis.iter().any(|s| s.len() != l || s.empty_count() > 0) {
        return Err(Error::Sector("open bases hold fully occupied states of the given size".into()));
    }
    Ok(())
}

fn order_id(basis: &LinkBasis) -> String {
    let canonical = enumerate_open(basis.get(0).len(), OpenSector::All).ok();
    match canonical {
        Some(c) if c.as_slice() == basis.states() => "canonical".into(),
        _ => basis.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","),
    }
}

/// Spin-1/2 representation with `n = q + 1/q`. On sites `(i, i+1)` in the
/// basis `(uu, ud, du, dd)` the generator is
/// `[[0,0,0,0],[0,1/q,-1,0],[0,-1,q,0],[0,0,0,0]]`.
pub fn build_spin_rep(l: usize, q: C64, sector: SpinSector) -> Result<TlRep> {
    if q.norm() == 0.0 {
        return Err(bad_param("q", "must be nonzero"));
    }
    if l < 2 {
        return Err(Error::InvalidSize { l, reason: "need at least two sites" });
    }
    let configs = spin_configs(l, sector)?;
    let index: std::collections::HashMap<u64, usize> = configs.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let dim = configs.len();
    let qi = q.inv();
    let mut generators = Vec::with_capacity(l - 1);
    for i in 0..l - 1 {
        let (bi, bj) = (spin_bit(l, i), spin_bit(l, i + 1));
        let mut t = Vec::new();
        for (k, &c) in configs.iter().enumerate() {
            let (di, dj) = (c & bi != 0, c & bj != 0);
            if di == dj {
                continue;
            }
            let flipped = index[&(c ^ bi ^ bj)];
            t.push((k, k, if di { q } else { qi }));
            t.push((flipped, k, -ONE));
        }
        generators.push(Matrix::from_triplets(dim, &t));
    }
    let tag = BasisTag::new(format!("spins L={l} {sector:?}"));
    Ok(TlRep { l, n: q + qi, y: None, basis: RepBasis::Spins { l, configs }, tag, generators })
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RelationReport {
    /// `max |e_i^2 - n e_i|`
    pub square: f64,
    /// `max |e_i e_{i+-1} e_i - e_i|`
    pub braid: f64,
    /// `max |[e_i, e_j]|` for `|i-j| >= 2`
    pub commute: f64,
}

impl RelationReport {
    pub fn max(&self) -> f64 {
        self.square.max(self.braid).max(self.commute)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max() < tol
    }
}

pub fn check_tl_relations(rep: &TlRep) -> RelationReport {
    let es: Vec<Mat<C64>> = rep.generators.iter().map(|g| g.to_dense()).collect();
    check_relations(&es, rep.n)
}

/// Relation residuals for arbitrary generator matrices.
pub fn check_relations(es: &[Mat<C64>], n: C64) -> RelationReport {
    let mut r = RelationReport::default();
    for (i, e) in es.iter().enumerate() {
        r.square = r.square.max(max_abs((e * e - e * faer::Scale(n)).as_ref()));
        for (j, f) in es.iter().enumerate() {
            if j + 1 == i || i + 1 == j {
                r.braid = r.braid.max(max_abs((e * f * e - e).as_ref()));
            } else if j >= i + 2 {
                r.commute = r.commute.max(max_abs((e * f - f * e).as_ref()));
            }
        }
    }
    r
}

#[derive(Clone, Debug)]
pub struct StructureProbe {
    /// Columns span the joint kernel of every generator.
    pub annihilated: Mat<C64>,
    pub count: usize,
}

/// Joint kernel of the `n = 1` geometric generators.
pub fn percolation_structure_probe(l: usize) -> Result<StructureProbe> {
    let rep = build_geometric_rep(l, ONE)?;
    joint_kernel(&rep)
}

pub fn joint_kernel(rep: &TlRep) -> Result<StructureProbe> {
    let dim = rep.basis.len();
    let es: Vec<Mat<C64>> = rep.generators.iter().map(|g| g.to_dense()).collect();
    let stacked = Mat::from_fn(dim * es.len(), dim, |r, c| es[r / dim][(r % dim, c)]);
    let (annihilated, _) = null_space(stacked.as_ref(), 1e-10)?;
    let count = annihilated.ncols();
    Ok(StructureProbe { annihilated, count })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BasisChange {
    /// Generic loop weight `n`.
    Generic { n: f64 },
    /// The deformed `n = 1` representation.
    Deformed { y: f64 },
}

#[derive(Clone, Debug)]
pub struct BasisChangeReport {
    pub conjugated: Vec<Mat<C64>>,
    /// Finest contiguous block partition for which every conjugated
    /// generator is block upper triangular.
    pub block_sizes: Vec<usize>,
    pub block_diagonal: bool,
    /// Largest deviation from the expected conjugated matrices.
    pub fixture_residual: f64,
}

/// Conjugates the `L=4` generators (in the fixture order) by `P` or `P_y`
/// and reads off the block structure.
pub fn verify_basis_change(change: BasisChange) -> Result<BasisChangeReport> {
    let basis = LinkBasis::new(
        reference::OPEN4_ORDER.iter().map(|s| LinkState::parse(s)).collect::<Result<Vec<_>>>()?,
    );
    let (rep, p, expected) = match change {
        BasisChange::Generic { n } => {
            (geometric_on(4, basis, C64::new(n, 0.0))?, reference::basis_change_p(n), reference::conjugated_by_p(n))
        }
        BasisChange::Deformed { y } => {
            (deformed_on(4, basis, C64::new(y, 0.0))?, reference::basis_change_py(y), reference::conjugated_by_py())
        }
    };
    if max_abs(p.as_ref()) > 1e12 || p.col_iter().flat_map(|c| c.iter().copied().collect::<Vec<_>>()).any(|v| !v.is_finite()) {
        return Err(Error::Singular(format!("basis change {change:?} does not exist")));
    }
    let pinv = inverse(p.as_ref())?;
    let conjugated: Vec<Mat<C64>> = rep.generators.iter().map(|g| &pinv * g.to_dense() * &p).collect();
    let fixture_residual = conjugated
        .iter()
        .zip(expected.iter())
        .map(|(a, b)| max_abs((a - b).as_ref()))
        .fold(0.0, f64::max);
    let (block_sizes, block_diagonal) = block_structure(&conjugated, 1e-10);
    Ok(BasisChangeReport { conjugated, block_sizes, block_diagonal, fixture_residual })
}

/// Finest contiguous partition making all matrices block upper triangular,
/// and whether they are then block diagonal.
pub fn block_structure(ms: &[Mat<C64>], tol: f64) -> (Vec<usize>, bool) {
    let dim = ms.first().map_or(0, |m| m.nrows());
    // reach[c] = largest row r >= c with a nonzero entry (r, c) below the diagonal
    let mut reach: Vec<usize> = (0..dim).collect();
    for m in ms {
        for c in 0..dim {
            for r in c + 1..dim {
                if m[(r, c)].norm() > tol {
                    reach[c] = reach[c].max(r);
                }
            }
        }
    }
    let mut sizes = Vec::new();
    let mut start = 0;
    let mut end = 0;
    for c in 0..dim {
        end = end.max(reach[c]);
        if c == end {
            sizes.push(c + 1 - start);
            start = c + 1;
        }
    }
    let mut block_of = Vec::with_capacity(dim);
    for (b, &s) in sizes.iter().enumerate() {
        block_of.extend(std::iter::repeat_n(b, s));
    }
    let diagonal = ms.iter().all(|m| {
        (0..dim).all(|c| (0..dim).all(|r| block_of[r] == block_of[c] || m[(r, c)].norm() <= tol))
    });
    (sizes, diagonal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::standard_dim;

    fn fixture_basis() -> LinkBasis {
        LinkBasis::new(reference::OPEN4_ORDER.iter().map(|s| LinkState::parse(s).unwrap()).collect())
    }

    #[test]
    fn geometric_l4_matches_fixture() {
        for n in [0.5, 1.0, 1.7] {
            let rep = geometric_on(4, fixture_basis(), C64::new(n, 0.0)).unwrap();
            let exp = reference::open4_generators(n, 1.0);
            for (g, e) in rep.generators.iter().zip(exp.iter()) {
                assert!(max_abs((g.to_dense() - e).as_ref()) < 1e-15);
            }
        }
    }

    #[test]
    fn deformed_l4_matches_fixture() {
        for y in [2.0, -1.0, 0.3] {
            let rep = deformed_on(4, fixture_basis(), C64::new(y, 0.0)).unwrap();
            let exp = reference::open4_generators(1.0, y);
            for (g, e) in rep.generators.iter().zip(exp.iter()) {
                assert!(max_abs((g.to_dense() - e).as_ref()) < 1e-15);
            }
        }
    }

    #[test]
    fn l2_generator() {
        let n = C64::new(0.7, 0.0);
        let rep = build_geometric_rep(2, n).unwrap();
        let e = rep.generators[0].to_dense();
        assert_eq!((e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]), (n, ONE, C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
    }

    #[test]
    fn spin_l2_eigenvalues() {
        let q = C64::from_polar(1.0, 0.4);
        let rep = build_spin_rep(2, q, SpinSector::TwiceSz(0)).unwrap();
        let e = rep.generators[0].to_dense();
        // trace and determinant of the 2x2 block give the eigenvalues {n, 0}
        let tr = e[(0, 0)] + e[(1, 1)];
        let det = e[(0, 0)] * e[(1, 1)] - e[(0, 1)] * e[(1, 0)];
        assert!((tr - (q + q.inv())).norm() < 1e-14 && det.norm() < 1e-14);
    }

    #[test]
    fn spin_hamiltonian_is_h4() {
        let q = C64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let rep = build_spin_rep(4, q, SpinSector::TwiceSz(0)).unwrap();
        let h = rep.hamiltonian().matrix.to_dense();
        assert!(max_abs((h - reference::xxz_h4()).as_ref()) < 1e-14);
        let labels: Vec<_> = match &rep.basis {
            RepBasis::Spins { configs, .. } => configs.iter().map(|&c| spin_label(4, c)).collect(),
            _ => unreachable!(),
        };
        assert_eq!(labels, reference::XXZ4_BASIS);
    }

    #[test]
    fn relations_hold() {
        let q = C64::from_polar(1.0, std::f64::consts::PI / 3.0);
        assert!(check_tl_relations(&build_spin_rep(3, q, SpinSector::All).unwrap()).holds(1e-12));
        assert!(check_tl_relations(&build_geometric_rep(6, ONE).unwrap()).holds(1e-12));
        assert!(check_tl_relations(&build_deformed_rep(6, C64::new(-1.0, 0.0)).unwrap()).holds(1e-12));
        assert!(check_tl_relations(&build_deformed_rep(4, C64::new(2.0, 0.0)).unwrap()).holds(1e-12));
    }

    #[test]
    fn corrupted_generator_detected() {
        let rep = build_geometric_rep(4, ONE).unwrap();
        let mut es: Vec<_> = rep.generators.iter().map(|g| g.to_dense()).collect();
        es[1][(0, 3)] += C64::new(1e-3, 0.0);
        assert!(check_relations(&es, ONE).max() >= 1e-4);
    }

    #[test]
    fn deformed_at_one_is_geometric() {
        let a = build_deformed_rep(6, ONE).unwrap();
        let b = build_geometric_rep(6, ONE).unwrap();
        for (x, y) in a.generators.iter().zip(&b.generators) {
            assert_eq!(x.to_dense(), y.to_dense());
        }
    }

    #[test]
    fn defect_grading() {
        let rep = build_geometric_rep(6, C64::new(0.4, 0.0)).unwrap();
        let RepBasis::Links(basis) = &rep.basis else { unreachable!() };
        for g in &rep.generators {
            for (i, j, _) in g.triplets() {
                assert!(basis.get(i).string_count() <= basis.get(j).string_count());
            }
        }
        let sizes: Vec<u64> = (0..=3).map(|j| standard_dim(6, 2 * j)).collect();
        assert_eq!(sizes.iter().sum::<u64>() as usize, basis.len());
    }

    #[test]
    fn annihilated_states() {
        let probe = percolation_structure_probe(4).unwrap();
        assert_eq!(probe.count, 2);
        let basis = LinkBasis::new(enumerate_open(4, OpenSector::All).unwrap());
        // each printed combination lies in the kernel span
        for combo in reference::ANNIHILATED4 {
            let mut v = faer::Col::<C64>::zeros(basis.len());
            for (s, c) in combo {
                v[basis.position(&LinkState::parse(s).unwrap()).unwrap()] = C64::new(c, 0.0);
            }
            let k = &probe.annihilated;
            let proj = k * (k.adjoint() * &v);
            assert!((proj - &v).norm_l2() < 1e-12);
        }
        assert_eq!(percolation_structure_probe(6).unwrap().count, 2);
        for l in [6, 8, 10] {
            assert_eq!(percolation_structure_probe(l).unwrap().count, exact_joint_nullity(l));
        }
        // width 2: the kernel of [[1,1],[0,0]] is one-dimensional
        assert_eq!(percolation_structure_probe(2).unwrap().count, 1);
    }

    /// Nullity of the stacked integer generator matrices by fraction-free
    /// elimination.
    fn exact_joint_nullity(l: usize) -> usize {
        let rep = build_geometric_rep(l, ONE).unwrap();
        let dim = rep.basis.len();
        let mut rows: Vec<Vec<i128>> = Vec::new();
        for g in &rep.generators {
            let d = g.to_dense();
            for r in 0..dim {
                rows.push((0..dim).map(|c| d[(r, c)].re.round() as i128).collect());
            }
        }
        let mut rank = 0;
        for col in 0..dim {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for row in rows.iter_mut().skip(rank + 1) {
                let f = row[col];
                if f != 0 {
                    for c in 0..dim {
                        row[c] = row[c] * pivot[col] - f * pivot[c];
                    }
                    let g = row.iter().fold(0i128, |a, &b| gcd(a, b.abs()));
                    if g > 1 {
                        row.iter_mut().for_each(|x| *x /= g);
                    }
                }
            }
            rank += 1;
        }
        dim - rank
    }

    fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 { a } else { gcd(b, a % b) }
    }

    #[test]
    fn basis_changes() {
        let r = verify_basis_change(BasisChange::Generic { n: 0.5 }).unwrap();
        assert!(r.fixture_residual < 1e-12);
        assert_eq!((r.block_sizes.as_slice(), r.block_diagonal), (&[2, 3, 1][..], true));
        let r = verify_basis_change(BasisChange::Deformed { y: 2.0 }).unwrap();
        assert!(r.fixture_residual < 1e-12);
        assert_eq!((r.block_sizes.as_slice(), r.block_diagonal), (&[1, 1, 1, 3][..], false));
        assert!(verify_basis_change(BasisChange::Generic { n: 2f64.sqrt() }).is_err());
        assert!(verify_basis_change(BasisChange::Deformed { y: 1.0 }).is_err());
    }
}
