//! Bilinear pairings (never conjugating) under which the lattice operators
//! are self-adjoint: the loop form on link states, the identity form on
//! spins, and the dilute form with strings and optional deformation.

use faer::{Col, ColRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diagram::{glue, LinkBasis};
use crate::error::{Error, Result};
use crate::linalg::{dot, BasisTag, Matrix, Operator, Vector, ZERO};
use crate::C64;

/// Link bases whose Gram matrix would hold more entries than this are
/// paired on the fly instead.
pub const GRAM_ENTRY_LIMIT: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairingKind {
    /// Identity Gram matrix in the spin basis.
    FormalQ,
    /// Glue the mirrored bra on the ket: `n` per closed loop, `y` per
    /// contraction of strings `(2k, 2k+1)`, zero for mismatched empty sites
    /// or strings joined across.
    Diagram { n: f64, y: f64 },
}

impl PairingKind {
    pub fn id(&self) -> String {
        match self {
            PairingKind::FormalQ => "formal-q".into(),
            PairingKind::Diagram { n, y } if *y == 1.0 => format!("loop(n={n})"),
            PairingKind::Diagram { n, y } => format!("diagram(n={n},y={y})"),
        }
    }
}

#[derive(Clone, Debug)]
enum Gram {
    Identity(usize),
    Stored(Matrix),
    /// Entries recomputed from the diagrams at each pairing.
    Implicit(LinkBasis),
}

#[derive(Clone, Debug)]
pub struct BilinearForm {
    pub basis: BasisTag,
    pub kind: PairingKind,
    gram: Gram,
}

impl BilinearForm {
    pub fn dim(&self) -> usize {
        match &self.gram {
            Gram::Identity(n) => *n,
            Gram::Stored(m) => m.dim(),
            Gram::Implicit(b) => b.len(),
        }
    }

    /// `sum_ij u_i G_ij v_j`, no conjugation.
    pub fn pairing(&self, u: ColRef<'_, C64>, v: ColRef<'_, C64>) -> C64 {
        match &self.gram {
            Gram::Identity(_) => dot(u, v),
            Gram::Stored(g) => dot(u, g.apply(v).as_ref()),
            Gram::Implicit(basis) => {
                let PairingKind::Diagram { n, y } = self.kind else { unreachable!() };
                let states = basis.states();
                (0..states.len())
                    .into_par_iter()
                    .map(|a| {
                        if u[a] == ZERO {
                            return ZERO;
                        }
                        let row: C64 = states
                            .iter()
                            .enumerate()
                            .filter(|(b, _)| v[*b] != ZERO)
                            .map(|(b, s)| v[b] * glue(&states[a], s).expect("same size").weight(n, y))
                            .sum();
                        u[a] * row
                    })
                    .sum()
            }
        }
    }

    /// `G v`.
    pub fn apply(&self, v: ColRef<'_, C64>) -> Vector {
        match &self.gram {
            Gram::Identity(_) => v.to_owned(),
            Gram::Stored(g) => g.apply(v),
            Gram::Implicit(_) => {
                let n = self.dim();
                let mut out = Col::zeros(n);
                let mut e = Col::<C64>::zeros(n);
                for a in 0..n {
                    e[a] = C64::new(1.0, 0.0);
                    out[a] = self.pairing(e.as_ref(), v);
                    e[a] = ZERO;
                }
                out
            }
        }
    }

    /// Materialized Gram matrix (identity included).
    pub fn gram(&self) -> Matrix {
        match &self.gram {
            Gram::Identity(n) => Matrix::identity(*n),
            Gram::Stored(g) => g.clone(),
            Gram::Implicit(b) => {
                let PairingKind::Diagram { n, y } = self.kind else { unreachable!() };
                Matrix::from_triplets(b.len(), &diagram_entries(b, n, y))
            }
        }
    }
}

pub fn formal_q_form(basis: BasisTag, dim: usize) -> BilinearForm {
    BilinearForm { basis, kind: PairingKind::FormalQ, gram: Gram::Identity(dim) }
}

/// Diagram form on any link basis. Only pairs with equal empty-site sets
/// can be nonzero, so states are grouped by occupancy first.
pub fn diagram_form(basis: &LinkBasis, tag: BasisTag, n: f64, y: f64) -> BilinearForm {
    let kind = PairingKind::Diagram { n, y };
    let groups = occupancy_groups(basis);
    let entries: usize = groups.iter().map(|g| g.len() * g.len()).sum();
    let gram = if entries > GRAM_ENTRY_LIMIT {
        Gram::Implicit(basis.clone())
    } else {
        Gram::Stored(Matrix::from_triplets(basis.len(), &diagram_entries(basis, n, y)))
    };
    BilinearForm { basis: tag, kind, gram }
}

/// Loop form on dense periodic states.
pub fn loop_form(basis: &LinkBasis, tag: BasisTag, n: f64) -> BilinearForm {
    diagram_form(basis, tag, n, 1.0)
}

/// Dilute form: `n = 0`, so any closed loop kills the pairing.
pub fn dilute_form(basis: &LinkBasis, tag: BasisTag, y: f64) -> BilinearForm {
    diagram_form(basis, tag, 0.0, y)
}

fn occupancy_groups(basis: &LinkBasis) -> Vec<Vec<usize>> {
    let mut map: std::collections::BTreeMap<u64, Vec<usize>> = Default::default();
    for (k, s) in basis.iter().enumerate() {
        map.entry(s.occupancy()).or_default().push(k);
    }
    map.into_values().collect()
}

fn diagram_entries(basis: &LinkBasis, n: f64, y: f64) -> Vec<(usize, usize, C64)> {
    let groups = occupancy_groups(basis);
    groups
        .par_iter()
        .flat_map_iter(|g| {
            let mut t = Vec::new();
            for &a in g {
                for &b in g {
                    let w = glue(basis.get(a), basis.get(b)).expect("same size").weight(n, y);
                    if w != 0.0 {
                        t.push((a, b, C64::new(w, 0.0)));
                    }
                }
            }
            t
        })
        .collect()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    let v = Col::from_fn(n, |_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let norm = v.norm_l2();
    v * faer::Scale(C64::new(1.0 / norm, 0.0))
}

/// Largest `|<A u, v> - <u, A v>|` over seeded random unit vectors. With a
/// left action `A_left` present, compares `<A_left u, v>` with `<u, A v>`.
pub fn selfadjointness_defect(
    op: &Operator,
    left: Option<&Operator>,
    form: &BilinearForm,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    op.basis.ensure_same(&form.basis)?;
    if let Some(l) = left {
        l.basis.ensure_same(&form.basis)?;
    }
    if op.dim() != form.dim() {
        return Err(Error::SizeMismatch(op.dim(), form.dim()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let u = random_unit(&mut rng, op.dim());
        let v = random_unit(&mut rng, op.dim());
        let au = left.unwrap_or(op).apply(u.as_ref());
        let av = op.apply(v.as_ref());
        let d = (form.pairing(au.as_ref(), v.as_ref()) - form.pairing(u.as_ref(), av.as_ref())).norm();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// `max |G A - A_left^T G|` computed entrywise (small dense operators).
pub fn gram_defect(op: &Operator, left: Option<&Operator>, form: &BilinearForm) -> Result<f64> {
    op.basis.ensure_same(&form.basis)?;
    let g = form.gram().to_dense();
    let a = op.matrix.to_dense();
    let al = left.map_or_else(|| a.clone(), |l| l.matrix.to_dense());
    Ok(crate::linalg::max_abs((&g * &a - al.transpose() * &g).as_ref()))
}
