//! Planar pairing states and the diagram operations every representation is
//! built from.
//!
//! A [`LinkState`] is a row of `L` sites, each empty, an arc endpoint, or a
//! string (a line running to the infinite past). Arcs never cross and strings
//! are never nested under an arc. The compact text form uses `(` and `)` for
//! arc endpoints, `|` for strings and `.` for empty sites, so `"(|)"` is
//! rejected while `"|().|"` is a valid dilute state.
//!
//! Dense periodic states (chords in a disk) use the same encoding: a
//! non-crossing matching of points on a circle, read from site 1 to site L,
//! is a non-crossing matching on the line.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Largest width accepted by the dense enumeration.
pub const MAX_DENSE_L: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Site {
    Empty,
    Arc(u8),
    String,
}

impl Site {
    fn role(self) -> u8 {
        match self {
            Site::Empty => 0,
            Site::Arc(_) => 1,
            Site::String => 2,
        }
    }

    pub fn is_occupied(self) -> bool {
        self != Site::Empty
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinkState {
    sites: Vec<Site>,
}

impl LinkState {
    /// Validates partner symmetry, planarity and that no string sits under
    /// an arc.
    pub fn new(sites: Vec<Site>) -> Result<Self> {
        let s = LinkState { sites };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let bad = |why| Err(Error::MalformedState(format!("{:?}", self.sites), why));
        let l = self.sites.len();
        let mut stack: Vec<usize> = Vec::new();
        for (i, &s) in self.sites.iter().enumerate() {
            match s {
                Site::Empty => {}
                Site::String => {
                    if !stack.is_empty() {
                        return bad("string nested under an arc");
                    }
                }
                Site::Arc(p) => {
                    let p = p as usize;
                    if p >= l || p == i || self.sites[p] != Site::Arc(i as u8) {
                        return bad("arc partner is not symmetric");
                    }
                    if p > i {
                        stack.push(i);
                    } else if stack.pop() != Some(p) {
                        return bad("arcs cross");
                    }
                }
            }
        }
        if !stack.is_empty() {
            return bad("unclosed arc");
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sites = Vec::with_capacity(text.len());
        let mut stack = Vec::new();
        for (i, c) in text.chars().enumerate() {
            match c {
                '.' => sites.push(Site::Empty),
                '|' => sites.push(Site::String),
                '(' => {
                    stack.push(i);
                    sites.push(Site::Empty);
                }
                ')' => {
                    let j = stack
                        .pop()
                        .ok_or_else(|| Error::MalformedState(text.into(), "unbalanced ')'"))?;
                    sites[j] = Site::Arc(i as u8);
                    sites.push(Site::Arc(j as u8));
                }
                _ => return Err(Error::MalformedState(text.into(), "unknown character")),
            }
        }
        if !stack.is_empty() {
            return Err(Error::MalformedState(text.into(), "unbalanced '('"));
        }
        LinkState::new(sites)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, i: usize) -> Site {
        self.sites[i]
    }

    pub fn partner(&self, i: usize) -> Option<usize> {
        match self.sites[i] {
            Site::Arc(p) => Some(p as usize),
            _ => None,
        }
    }

    pub fn string_count(&self) -> usize {
        self.sites.iter().filter(|&&s| s == Site::String).count()
    }

    pub fn empty_count(&self) -> usize {
        self.sites.iter().filter(|&&s| s == Site::Empty).count()
    }

    pub fn has_strings(&self) -> bool {
        self.sites.contains(&Site::String)
    }

    /// 1-based label of the string at site `i` among the strings, counted
    /// from the left.
    pub fn string_label(&self, i: usize) -> usize {
        1 + self.sites[..i].iter().filter(|&&s| s == Site::String).count()
    }

    /// Occupancy bitmask, bit `i` set when site `i` is not empty.
    pub fn occupancy(&self) -> u64 {
        self.sites
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_occupied())
            .fold(0, |m, (i, _)| m | (1 << i))
    }

    /// Vertical reflection used when a ket is turned into a bra. Site roles
    /// are unchanged, so the data is the same.
    pub fn mirror(&self) -> LinkState {
        self.clone()
    }

    /// Left-right reflection `i -> L-1-i`.
    pub fn reflect(&self) -> LinkState {
        let l = self.len();
        let sites = self
            .sites
            .iter()
            .rev()
            .map(|&s| match s {
                Site::Arc(p) => Site::Arc((l - 1 - p as usize) as u8),
                other => other,
            })
            .collect();
        LinkState { sites }
    }

    /// Places `other` to the right of `self` with no arcs across the seam.
    pub fn concat(&self, other: &LinkState) -> Result<LinkState> {
        let off = self.len();
        let mut sites = self.sites.clone();
        sites.extend(other.sites.iter().map(|&s| match s {
            Site::Arc(p) => Site::Arc(p + off as u8),
            x => x,
        }));
        LinkState::new(sites)
    }

    pub(crate) fn from_sites_unchecked(sites: Vec<Site>) -> Self {
        LinkState { sites }
    }

    pub(crate) fn sites_mut(&mut self) -> &mut [Site] {
        &mut self.sites
    }
}

impl Ord for LinkState {
    fn cmp(&self, other: &Self) -> Ordering {
        let roles = |s: &LinkState| s.sites.iter().map(|x| x.role()).collect::<Vec<_>>();
        let partners = |s: &LinkState| {
            s.sites
                .iter()
                .map(|x| match x {
                    Site::Arc(p) => *p,
                    _ => 0,
                })
                .collect::<Vec<_>>()
        };
        self.len()
            .cmp(&other.len())
            .then_with(|| roles(self).cmp(&roles(other)))
            .then_with(|| partners(self).cmp(&partners(other)))
    }
}

impl PartialOrd for LinkState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sites.iter().enumerate() {
            let c = match *s {
                Site::Empty => '.',
                Site::String => '|',
                Site::Arc(p) if (p as usize) > i => '(',
                Site::Arc(_) => ')',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Ordered basis with a reverse index.
#[derive(Clone, Debug)]
pub struct LinkBasis {
    states: Vec<LinkState>,
    index: HashMap<LinkState, usize>,
}

impl LinkBasis {
    pub fn new(states: Vec<LinkState>) -> Self {
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        LinkBasis { states, index }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[LinkState] {
        &self.states
    }

    pub fn get(&self, k: usize) -> &LinkState {
        &self.states[k]
    }

    pub fn position(&self, s: &LinkState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LinkState> {
        self.states.iter()
    }
}

// ---------------------------------------------------------------- counting

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

pub fn catalan(k: usize) -> u64 {
    binomial(2 * k, k) / (k as u64 + 1)
}

/// Dimension of the standard module on `l` sites with `defects` through
/// lines: `C(L, (L+2j)/2) - C(L, (L+2j)/2 + 1)`.
pub fn standard_dim(l: usize, defects: usize) -> u64 {
    if defects > l || !(l - defects).is_multiple_of(2) {
        return 0;
    }
    let k = (l + defects) / 2;
    binomial(l, k) - binomial(l, k + 1)
}

// ------------------------------------------------------------- enumeration

#[derive(Clone, Copy)]
struct Roles {
    empty: bool,
    string: bool,
}

fn enumerate_raw(l: usize, roles: Roles) -> Vec<LinkState> {
    fn rec(i: usize, l: usize, roles: Roles, sites: &mut Vec<Site>, stack: &mut Vec<usize>, out: &mut Vec<LinkState>) {
        let open = stack.len();
        if open > l - i {
            return;
        }
        if i == l {
            out.push(LinkState::from_sites_unchecked(sites.clone()));
            return;
        }
        if roles.empty {
            sites.push(Site::Empty);
            rec(i + 1, l, roles, sites, stack, out);
            sites.pop();
        }
        if roles.string && open == 0 {
            sites.push(Site::String);
            rec(i + 1, l, roles, sites, stack, out);
            sites.pop();
        }
        sites.push(Site::Empty);
        stack.push(i);
        rec(i + 1, l, roles, sites, stack, out);
        stack.pop();
        sites.pop();
        if let Some(j) = stack.pop() {
            sites[j] = Site::Arc(i as u8);
            sites.push(Site::Arc(j as u8));
            rec(i + 1, l, roles, sites, stack, out);
            sites.pop();
            sites[j] = Site::Empty;
            stack.push(j);
        }
    }
    let mut out = Vec::new();
    rec(0, l, roles, &mut Vec::with_capacity(l), &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Non-crossing perfect matchings of `l` points, canonical order.
pub fn enumerate_dense(l: usize) -> Result<Vec<LinkState>> {
    if l == 0 || !l.is_multiple_of(2) {
        return Err(Error::InvalidSize { l, reason: "dense states need an even positive size" });
    }
    if l > MAX_DENSE_L {
        return Err(Error::InvalidSize { l, reason: "dense enumeration is capped at L=20" });
    }
    Ok(enumerate_raw(l, Roles { empty: false, string: false }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpenSector {
    All,
    /// Exactly this many through lines (`2j`).
    Defects(usize),
}

/// Open link states grouped by defect number (ascending), canonical order
/// inside each group.
pub fn enumerate_open(l: usize, sector: OpenSector) -> Result<Vec<LinkState>> {
    if l == 0 {
        return Err(Error::InvalidSize { l, reason: "need at least one site" });
    }
    let mut all = enumerate_raw(l, Roles { empty: false, string: true });
    all.sort_by(|a, b| a.string_count().cmp(&b.string_count()).then_with(|| a.cmp(b)));
    Ok(match sector {
        OpenSector::All => all,
        OpenSector::Defects(d) => all.into_iter().filter(|s| s.string_count() == d).collect(),
    })
}

/// Which dilute states to keep. Strings are created and destroyed in pairs,
/// so each string-number parity is an invariant subspace of the transfer
/// matrix, as is every "at most k strings" subspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiluteSector {
    pub even_strings_only: bool,
    pub max_strings: Option<usize>,
}

impl DiluteSector {
    pub const ALL: DiluteSector = DiluteSector { even_strings_only: false, max_strings: None };
    pub const EVEN: DiluteSector = DiluteSector { even_strings_only: true, max_strings: None };

    pub fn even_up_to(max_strings: usize) -> Self {
        DiluteSector { even_strings_only: true, max_strings: Some(max_strings) }
    }

    pub fn contains(&self, s: &LinkState) -> bool {
        let k = s.string_count();
        !(self.even_strings_only && k % 2 == 1) && self.max_strings.is_none_or(|m| k <= m)
    }
}

/// Dilute states in canonical order (lexicographic in the site roles
/// `empty < arc < string`, then in the partner array).
pub fn enumerate_dilute(l: usize, sector: DiluteSector) -> Result<Vec<LinkState>> {
    if l == 0 {
        return Err(Error::InvalidSize { l, reason: "need at least one site" });
    }
    if l > 24 {
        return Err(Error::InvalidSize { l, reason: "dilute enumeration is capped at L=24" });
    }
    let all = enumerate_raw(l, Roles { empty: true, string: true });
    Ok(all.into_iter().filter(|s| sector.contains(s)).collect())
}

// -------------------------------------------------------------------- glue

/// Bookkeeping for the diagram obtained by placing a bra (the mirror image
/// of a state) on top of a ket.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GlueResult {
    pub closed_loops: usize,
    pub contracted_string_pairs: usize,
    /// Contractions whose left string has an even label.
    pub odd_even_contractions: usize,
    /// Bra strings joined to ket strings.
    pub through_lines: usize,
    /// Empty-site patterns differ, or some string is left unmatched.
    pub mismatch: bool,
}

impl GlueResult {
    /// `n^loops * y^(odd-even contractions)`, zero on mismatch.
    pub fn weight(&self, n: f64, y: f64) -> f64 {
        if self.mismatch {
            return 0.0;
        }
        n.powi(self.closed_loops as i32) * y.powi(self.odd_even_contractions as i32)
    }
}

pub fn glue(bra: &LinkState, ket: &LinkState) -> Result<GlueResult> {
    let l = bra.len();
    if ket.len() != l {
        return Err(Error::SizeMismatch(l, ket.len()));
    }
    let mut res = GlueResult::default();
    if bra.occupancy() != ket.occupancy() {
        res.mismatch = true;
        return Ok(res);
    }
    let mut seen = vec![false; l];
    // Open paths start at a string end, from above (bra) or below (ket).
    for start in 0..l {
        for from_bra in [true, false] {
            let s0 = if from_bra { bra } else { ket };
            if seen[start] || s0.site(start) != Site::String {
                continue;
            }
            seen[start] = true;
            let mut cur = start;
            let mut down = from_bra;
            loop {
                let next = if down { ket } else { bra };
                match next.site(cur) {
                    Site::String => break,
                    Site::Arc(p) => {
                        cur = p as usize;
                        seen[cur] = true;
                        down = !down;
                    }
                    Site::Empty => unreachable!("occupancy patterns agree"),
                }
            }
            // `down` is the direction of the final string segment.
            let ends_in_bra = !down;
            if ends_in_bra == from_bra {
                res.contracted_string_pairs += 1;
                let left = start.min(cur);
                if s0.string_label(left) % 2 == 0 {
                    res.odd_even_contractions += 1;
                }
            } else {
                res.through_lines += 1;
            }
        }
    }
    for i in 0..l {
        if seen[i] || !bra.site(i).is_occupied() {
            continue;
        }
        res.closed_loops += 1;
        let mut cur = i;
        let mut down = true;
        loop {
            seen[cur] = true;
            let next = if down { ket } else { bra };
            cur = next.partner(cur).expect("closed loops only contain arcs");
            seen[cur] = true;
            down = !down;
            if cur == i && down {
                break;
            }
        }
    }
    if res.through_lines > 0 {
        res.mismatch = true;
    }
    Ok(res)
}

// ------------------------------------------------------------ TL generator

/// What happened when a generator acted on a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EOutcome {
    ClosedLoop,
    Reconnected,
    /// Two strings joined into an arc; `left_label` is the 1-based label of
    /// the left one before contraction.
    Contracted { left_label: usize },
}

/// Cup-cap generator on sites `i` and `j` (`j = i + 1`, or `j = 0` with
/// `i = L - 1` for the periodic seam). Both sites must be occupied.
pub fn apply_e(state: &LinkState, i: usize, j: usize) -> (LinkState, EOutcome) {
    let mut s = state.clone();
    let (a, b) = (state.site(i), state.site(j));
    let outcome = match (a, b) {
        (Site::Arc(p), _) if p as usize == j => return (s, EOutcome::ClosedLoop),
        (Site::String, Site::String) => EOutcome::Contracted { left_label: state.string_label(i.min(j)) },
        (Site::Arc(p), Site::String) => {
            s.sites_mut()[p as usize] = Site::String;
            EOutcome::Reconnected
        }
        (Site::String, Site::Arc(q)) => {
            s.sites_mut()[q as usize] = Site::String;
            EOutcome::Reconnected
        }
        (Site::Arc(p), Site::Arc(q)) => {
            s.sites_mut()[p as usize] = Site::Arc(q);
            s.sites_mut()[q as usize] = Site::Arc(p);
            EOutcome::Reconnected
        }
        _ => panic!("generator acts on occupied sites only"),
    };
    s.sites_mut()[i] = Site::Arc(j as u8);
    s.sites_mut()[j] = Site::Arc(i as u8);
    (s, outcome)
}

// ------------------------------------------------------------ dense rows

/// One row of the periodic dense loop transfer matrix: tilted squares on
/// pairs `(2k, 2k+1)` at the bottom and `(2k+1, 2k+2 mod L)` at the top,
/// each either vertical (`false`) or cup-cap (`true`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseRow {
    pub bottom: Vec<bool>,
    pub top: Vec<bool>,
}

impl DenseRow {
    pub fn identity(l: usize) -> Self {
        DenseRow { bottom: vec![false; l / 2], top: vec![false; l / 2] }
    }
}

/// Stacks a dense row on a periodic state, returning the new state and the
/// number of closed loops.
pub fn stack_dense_row(state: &LinkState, row: &DenseRow) -> Result<(LinkState, usize)> {
    let l = state.len();
    if !l.is_multiple_of(2) || state.has_strings() || state.empty_count() > 0 {
        return Err(Error::Sector("dense rows act on perfect matchings".into()));
    }
    if row.bottom.len() != l / 2 || row.top.len() != l / 2 {
        return Err(Error::SizeMismatch(l / 2, row.bottom.len().min(row.top.len())));
    }
    let mut s = state.clone();
    let mut loops = 0;
    let pairs = (0..l / 2)
        .filter(|&k| row.bottom[k])
        .map(|k| (2 * k, 2 * k + 1))
        .chain((0..l / 2).filter(|&k| row.top[k]).map(|k| (2 * k + 1, (2 * k + 2) % l)));
    for (i, j) in pairs {
        let (next, out) = apply_e(&s, i, j);
        if out == EOutcome::ClosedLoop {
            loops += 1;
        }
        s = next;
    }
    Ok((s, loops))
}

// ----------------------------------------------------------- dilute rows

/// The eight losange configurations on a pair of sites. Weights are
/// `x^monomers`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LosangeTile {
    Empty,
    /// Left strand continues upward on the left site.
    PassLeft,
    PassRight,
    PassBoth,
    /// A new arc born on the two top sites.
    NewArc,
    /// The two bottom strands are joined.
    Join,
    ShiftRight,
    ShiftLeft,
}

impl LosangeTile {
    pub const ALL: [LosangeTile; 8] = [
        LosangeTile::Empty,
        LosangeTile::PassLeft,
        LosangeTile::PassRight,
        LosangeTile::PassBoth,
        LosangeTile::NewArc,
        LosangeTile::Join,
        LosangeTile::ShiftRight,
        LosangeTile::ShiftLeft,
    ];

    pub fn monomers(self) -> u32 {
        match self {
            LosangeTile::Empty => 0,
            LosangeTile::PassLeft | LosangeTile::PassRight => 1,
            _ => 2,
        }
    }

    /// Bottom occupancy `(left, right)` the tile requires.
    pub fn bottom(self) -> (bool, bool) {
        match self {
            LosangeTile::Empty | LosangeTile::NewArc => (false, false),
            LosangeTile::PassLeft | LosangeTile::ShiftRight => (true, false),
            LosangeTile::PassRight | LosangeTile::ShiftLeft => (false, true),
            LosangeTile::PassBoth | LosangeTile::Join => (true, true),
        }
    }

    /// Tiles compatible with the given bottom occupancy.
    pub fn compatible(left: bool, right: bool) -> impl Iterator<Item = LosangeTile> {
        LosangeTile::ALL.into_iter().filter(move |t| t.bottom() == (left, right))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tile {
    Losange { site: usize, tile: LosangeTile },
    /// Boundary half-tile on one site; weight `x` when a strand crosses it.
    Triangle { site: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RowOutcome {
    pub monomers: u32,
    pub closed_loops: usize,
    pub string_joins: usize,
}

fn move_strand(s: &mut LinkState, from: usize, to: usize) {
    let site = s.site(from);
    if let Site::Arc(p) = site {
        s.sites_mut()[p as usize] = Site::Arc(to as u8);
    }
    s.sites_mut()[to] = site;
    s.sites_mut()[from] = Site::Empty;
}

/// Places one losange on sites `(i, i+1)`.
pub fn apply_losange(state: &LinkState, i: usize, tile: LosangeTile) -> Result<(LinkState, RowOutcome)> {
    if i + 1 >= state.len() {
        return Err(Error::IncompatibleTile { tile: format!("{tile:?}"), site: i, reason: "outside the strip" });
    }
    let occ = (state.site(i).is_occupied(), state.site(i + 1).is_occupied());
    if occ != tile.bottom() {
        return Err(Error::IncompatibleTile {
            tile: format!("{tile:?}"),
            site: i,
            reason: "line enters an empty junction",
        });
    }
    let mut s = state.clone();
    let mut out = RowOutcome { monomers: tile.monomers(), ..Default::default() };
    match tile {
        LosangeTile::Empty | LosangeTile::PassLeft | LosangeTile::PassRight | LosangeTile::PassBoth => {}
        LosangeTile::NewArc => {
            s.sites_mut()[i] = Site::Arc(i as u8 + 1);
            s.sites_mut()[i + 1] = Site::Arc(i as u8);
        }
        LosangeTile::ShiftRight => move_strand(&mut s, i, i + 1),
        LosangeTile::ShiftLeft => move_strand(&mut s, i + 1, i),
        LosangeTile::Join => {
            match (state.site(i), state.site(i + 1)) {
                (Site::Arc(p), _) if p as usize == i + 1 => out.closed_loops = 1,
                (Site::Arc(p), Site::Arc(q)) => {
                    s.sites_mut()[p as usize] = Site::Arc(q);
                    s.sites_mut()[q as usize] = Site::Arc(p);
                }
                (Site::Arc(p), Site::String) => s.sites_mut()[p as usize] = Site::String,
                (Site::String, Site::Arc(q)) => s.sites_mut()[q as usize] = Site::String,
                (Site::String, Site::String) => out.string_joins = 1,
                _ => unreachable!("both sites are occupied"),
            }
            s.sites_mut()[i] = Site::Empty;
            s.sites_mut()[i + 1] = Site::Empty;
        }
    }
    Ok((s, out))
}

/// Applies a sequence of tiles, accumulating the weight bookkeeping.
pub fn stack_dilute_row(state: &LinkState, row: &[Tile]) -> Result<(LinkState, RowOutcome)> {
    let mut s = state.clone();
    let mut total = RowOutcome::default();
    for t in row {
        match *t {
            Tile::Losange { site, tile } => {
                let (next, o) = apply_losange(&s, site, tile)?;
                total.monomers += o.monomers;
                total.closed_loops += o.closed_loops;
                total.string_joins += o.string_joins;
                s = next;
            }
            Tile::Triangle { site } => {
                if site >= s.len() {
                    return Err(Error::IncompatibleTile { tile: "Triangle".into(), site, reason: "outside the strip" });
                }
                if s.site(site).is_occupied() {
                    total.monomers += 1;
                }
            }
        }
    }
    Ok((s, total))
}

/// Tile positions of the two half rows of the honeycomb transfer matrix.
/// Returns `(lower, upper)`; the right action applies `lower` first.
///
/// Even `L`: losanges on `(0,1), (2,3), ...` below; triangles on the two
/// boundary sites and losanges `(1,2), (3,4), ...` above. Odd `L`: the
/// lower half ends in a triangle on the last site, the upper half starts
/// with one on the first site.
pub fn honeycomb_halves(l: usize) -> (Vec<HalfTile>, Vec<HalfTile>) {
    let mut lower: Vec<HalfTile> = (0..l.saturating_sub(1)).step_by(2).map(HalfTile::Losange).collect();
    let mut upper = vec![HalfTile::Triangle(0)];
    upper.extend((1..l.saturating_sub(1)).step_by(2).map(HalfTile::Losange));
    if l.is_multiple_of(2) {
        upper.push(HalfTile::Triangle(l - 1));
    } else {
        lower.push(HalfTile::Triangle(l - 1));
    }
    (lower, upper)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfTile {
    Losange(usize),
    Triangle(usize),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(s: &str) -> LinkState {
        LinkState::parse(s).unwrap()
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["()(())", "|().|", "..", "||()", "(.)"] {
            assert_eq!(st(s).to_string(), s);
        }
        assert!(LinkState::parse("(|)").is_err());
        assert!(LinkState::parse("(()").is_err());
    }

    #[test]
    fn dense_counts() {
        assert_eq!(enumerate_dense(2).unwrap().len(), 1);
        assert_eq!(enumerate_dense(4).unwrap().len(), 2);
        assert_eq!(enumerate_dense(6).unwrap().len(), 5);
        assert!(enumerate_dense(5).is_err());
        assert!(enumerate_dense(22).is_err());
    }

    #[test]
    fn open_sectors() {
        let all = enumerate_open(4, OpenSector::All).unwrap();
        let names: Vec<_> = all.iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["()()", "(())", "()||", "|()|", "||()", "||||"]);
        let two = enumerate_open(2, OpenSector::All).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(enumerate_open(4, OpenSector::Defects(2)).unwrap().len(), 3);
    }

    #[test]
    fn dilute_small() {
        let names = |l, sec| {
            enumerate_dilute(l, sec).unwrap().iter().map(|s| s.to_string()).collect::<Vec<_>>()
        };
        assert_eq!(names(1, DiluteSector::ALL), [".", "|"]);
        assert_eq!(names(2, DiluteSector::EVEN), ["..", "()", "||"]);
        assert_eq!(names(2, DiluteSector::ALL).len(), 5);
    }

    #[test]
    fn glue_examples() {
        let g = glue(&st("()(())"), &st("(()())")).unwrap();
        assert_eq!(g.closed_loops, 2);
        let g = glue(&st("..()"), &st("..||")).unwrap();
        assert_eq!((g.contracted_string_pairs, g.mismatch), (1, false));
        assert!(glue(&st("..()"), &st("()..")).unwrap().mismatch);
        assert!(glue(&st("||"), &st("||")).unwrap().mismatch);
    }

    #[test]
    fn worked_dense_row() {
        let row = DenseRow { bottom: vec![false, true, false], top: vec![true, false, false] };
        let (s, loops) = stack_dense_row(&st("()(())"), &row).unwrap();
        assert_eq!((s.to_string().as_str(), loops), ("(())()", 0));
    }

    #[test]
    fn losange_join_strings() {
        let (s, o) = apply_losange(&st("||"), 0, LosangeTile::Join).unwrap();
        assert_eq!((s.to_string().as_str(), o.string_joins, o.monomers), ("..", 1, 2));
        assert!(apply_losange(&st(".|"), 0, LosangeTile::PassLeft).is_err());
    }

    #[test]
    fn halves() {
        let (lo, up) = honeycomb_halves(4);
        assert_eq!(lo, [HalfTile::Losange(0), HalfTile::Losange(2)]);
        assert_eq!(up, [HalfTile::Triangle(0), HalfTile::Losange(1), HalfTile::Triangle(3)]);
        let (lo, up) = honeycomb_halves(3);
        assert_eq!(lo, [HalfTile::Losange(0), HalfTile::Triangle(2)]);
        assert_eq!(up, [HalfTile::Triangle(0), HalfTile::Losange(1)]);
    }
}
