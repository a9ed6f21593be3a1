//! Explicit complete representation of `Z` on the base
//! `U = ⋃ U_{n,i}`, `U_{n,i} = ω × {(n,i)}`.
//!
//! Every atom is mapped to a binary relation on `U`. The only sparse
//! relations are `R = rep(r(n,k))` and its complement `T` inside
//! `U_{n,0} × U_{n,k}`; membership in `R` is decided by reading the exponents
//! of 2, 3 and 5 off a point index. All checks run over a finite
//! [`RepWindow`] of points; witnesses may leave the window.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::atoms::{build_z, AtomLabel, FiniteAtomStructure, ValidationReport};
use crate::error::{Error, Result};

/// The point `(index, n, i)` of `U_{n,i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RepPoint {
    pub index: u64,
    pub n: u32,
    pub i: u32,
}

impl RepPoint {
    pub fn new(index: u64, n: u32, i: u32) -> Self {
        debug_assert!(i <= n);
        Self { index, n, i }
    }

    fn block(&self) -> (u32, u32) {
        (self.n, self.i)
    }

    fn with_index(self, index: u64) -> Self {
        Self { index, ..self }
    }
}

impl fmt::Display for RepPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.index, self.n, self.i)
    }
}

/// Which half of `U_{n,0} × U_{n,k}` a witness must land in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Selector {
    /// `rep(r(n,k))`.
    R,
    /// `rep(w(n,0,n,k))`, the complement of `R` in the block.
    T,
}

impl Selector {
    pub const BOTH: [Selector; 2] = [Selector::R, Selector::T];
}

/// Points with plant index `≤ plants` and point index `< indices`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RepWindow {
    pub plants: u32,
    pub indices: u64,
}

impl RepWindow {
    /// Fails unless `indices ≥ 2` and every witness and search index the
    /// checks can produce fits in 64 bits.
    pub fn new(plants: u32, indices: u64) -> Result<Self> {
        if indices < 2 {
            return Err(Error::Precondition("window index bound must be at least 2".into()));
        }
        let window = Self { plants, indices };
        window.search_bound()?;
        let m = u32::try_from(indices).map_err(|_| Error::Overflow("window".into()))?;
        pow(6, 2 * m - 1)?;
        Ok(window)
    }

    /// `2^M · 3^(M+1) · 5^N`: no middle point constructed or searched by
    /// the checks exceeds this index.
    pub fn search_bound(&self) -> Result<u64> {
        let m = u32::try_from(self.indices).map_err(|_| Error::Overflow("window".into()))?;
        mul(mul(pow(2, m)?, pow(3, m + 1)?)?, pow(5, self.plants)?)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (u32, u32)> {
        let plants = self.plants;
        (0..=plants).flat_map(|n| (0..=n).map(move |i| (n, i)))
    }

    pub fn points(&self) -> Vec<RepPoint> {
        self.blocks()
            .flat_map(|(n, i)| (0..self.indices).map(move |idx| RepPoint::new(idx, n, i)))
            .collect()
    }

    fn block_points(&self, n: u32, i: u32) -> impl Iterator<Item = RepPoint> {
        (0..self.indices).map(move |idx| RepPoint::new(idx, n, i))
    }
}

fn pow(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp)
        .ok_or_else(|| Error::Overflow(format!("{base}^{exp}")))
}

fn mul(a: u64, b: u64) -> Result<u64> {
    a.checked_mul(b)
        .ok_or_else(|| Error::Overflow(format!("{a}·{b}")))
}

/// Exponents `(e2, e3, e5)` with `x = 2^e2 · 3^e3 · 5^e5`, or `None` when
/// `x` has another prime factor (or is zero).
pub fn factor_235(mut x: u64) -> Option<(u64, u64, u64)> {
    if x == 0 {
        return None;
    }
    let mut exps = [0u64; 3];
    for (e, p) in exps.iter_mut().zip([2, 3, 5]) {
        while x % p == 0 {
            x /= p;
            *e += 1;
        }
    }
    (x == 1).then_some((exps[0], exps[1], exps[2]))
}

/// The representation map `rep`, optionally with defining clauses of `R`
/// switched off (for fault-injection tests).
///
/// `R = rep(r(n,k))` is the union of
/// 1. `⟨(i,n,0), (2^i 3^j, n,k)⟩`,
/// 2. `⟨(i,n,0), (2^j 3^i, n,k)⟩`,
/// 3. `⟨(2^i 3^j, n,0), (i,n,k)⟩`,
/// 4. `⟨(2^j 3^i, n,0), (i,n,k)⟩`,
/// 5. `⟨(2^i 5^k, n,0), (i,n,k)⟩`,
///
/// over all `i, j ∈ ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Representation {
    clauses: [bool; 5],
}

impl Default for Representation {
    fn default() -> Self {
        Self { clauses: [true; 5] }
    }
}

impl Representation {
    pub fn new() -> Self {
        Self::default()
    }

    /// The same map with clause `clause` (1-based) of `R` dropped.
    pub fn without_clause(mut self, clause: usize) -> Self {
        self.clauses[clause - 1] = false;
        self
    }

    /// Whether `((u, n, 0), (v, n, k)) ∈ rep(r(n,k))`.
    pub fn r_contains(&self, k: u32, u: u64, v: u64) -> bool {
        let [c1, c2, c3, c4, c5] = self.clauses;
        if let Some((e2, e3, e5)) = factor_235(v) {
            if e5 == 0 && ((c1 && e2 == u) || (c2 && e3 == u)) {
                return true;
            }
        }
        if let Some((e2, e3, e5)) = factor_235(u) {
            if e5 == 0 && ((c3 && e2 == v) || (c4 && e3 == v)) {
                return true;
            }
            if c5 && e3 == 0 && e5 == u64::from(k) && e2 == v {
                return true;
            }
        }
        false
    }

    /// Membership of `(u, v)` in `X ∈ {R, T}` for the leaf `(n, k)`; both
    /// points must lie in `U_{n,0}` and `U_{n,k}` respectively.
    pub fn selected(&self, sel: Selector, k: u32, u: RepPoint, v: RepPoint) -> bool {
        if u.i != 0 || v.i != k || u.n != v.n {
            return false;
        }
        self.r_contains(k, u.index, v.index) == (sel == Selector::R)
    }

    /// Whether `(u, v) ∈ rep(a)`. Opaque labels have empty representation.
    pub fn contains(&self, a: &AtomLabel, u: RepPoint, v: RepPoint) -> bool {
        match *a {
            AtomLabel::Identity { n, i } => u == v && u.block() == (n, i),
            AtomLabel::R { n, k } => {
                u.block() == (n, 0) && v.block() == (n, k) && self.r_contains(k, u.index, v.index)
            }
            AtomLabel::RConv { n, k } => self.contains(&AtomLabel::R { n, k }, v, u),
            AtomLabel::W { n, i, m, j } => {
                if u.block() != (n, i) || v.block() != (m, j) {
                    false
                } else if (n, i) == (m, j) {
                    u.index != v.index
                } else if n == m && i == 0 {
                    !self.r_contains(j, u.index, v.index)
                } else if n == m && j == 0 {
                    !self.r_contains(i, v.index, u.index)
                } else {
                    true
                }
            }
            AtomLabel::Opaque(_) => false,
        }
    }

    /// The atom whose representation contains `(u, v)`.
    pub fn atom_of(&self, u: RepPoint, v: RepPoint) -> AtomLabel {
        let (n, i, m, j) = (u.n, u.i, v.n, v.i);
        if u.block() == v.block() && u.index == v.index {
            AtomLabel::Identity { n, i }
        } else if n == m && i == 0 && j > 0 && self.r_contains(j, u.index, v.index) {
            AtomLabel::R { n, k: j }
        } else if n == m && j == 0 && i > 0 && self.r_contains(i, v.index, u.index) {
            AtomLabel::RConv { n, k: i }
        } else {
            AtomLabel::W { n, i, m, j }
        }
    }
}

fn p23(a: u64, b: u64) -> Result<u64> {
    let a = u32::try_from(a).map_err(|_| Error::Overflow("exponent".into()))?;
    let b = u32::try_from(b).map_err(|_| Error::Overflow("exponent".into()))?;
    mul(pow(2, a)?, pow(3, b)?)
}

fn p25(a: u64, c: u32) -> Result<u64> {
    let a = u32::try_from(a).map_err(|_| Error::Overflow("exponent".into()))?;
    mul(pow(2, a)?, pow(5, c)?)
}

/// Index of the middle point for distinct indices `i` (first coordinate)
/// and `j` (second): `2^i 3^j`, `2^i 3^(j+1)`, `2^(i+1) 3^j` or
/// `2^q 3^q` with `q = i + j + 1`, according to `(X, Y)`.
fn distinct_witness(i: u64, j: u64, x: Selector, y: Selector) -> Result<u64> {
    use Selector::*;
    match (x, y) {
        (R, R) => p23(i, j),
        (R, T) => p23(i, j + 1),
        (T, R) => p23(i + 1, j),
        (T, T) => p23(i + j + 1, i + j + 1),
    }
}

/// (r3): for distinct `u, v ∈ U_{n,0}`, a point `w ∈ U_{n,k}` with
/// `(u, w) ∈ X` and `(v, w) ∈ Y`.
pub fn witness_r3(u: RepPoint, v: RepPoint, x: Selector, y: Selector, k: u32) -> Result<RepPoint> {
    if u.i != 0 || v.i != 0 || u.n != v.n || u.index == v.index || k == 0 || k > u.n {
        return Err(Error::Precondition(format!(
            "(r3) needs distinct points of U_(n,0) and 1 ≤ k ≤ n, got {u}, {v}, k = {k}"
        )));
    }
    Ok(RepPoint::new(distinct_witness(u.index, v.index, x, y)?, u.n, k))
}

/// (r4): for distinct `u, v ∈ U_{n,k}`, a point `w ∈ U_{n,0}` with
/// `(w, u) ∈ X` and `(w, v) ∈ Y`.
pub fn witness_r4(u: RepPoint, v: RepPoint, x: Selector, y: Selector) -> Result<RepPoint> {
    if u.i == 0 || u.block() != v.block() || u.index == v.index {
        return Err(Error::Precondition(format!(
            "(r4) needs distinct points of one U_(n,k), k ≥ 1, got {u}, {v}"
        )));
    }
    Ok(RepPoint::new(distinct_witness(u.index, v.index, x, y)?, u.n, 0))
}

/// (r5): for `u ∈ U_{n,k}`, `v ∈ U_{n,ℓ}` with `k ≠ ℓ`, a point
/// `w ∈ U_{n,0}` with `(w, u) ∈ X` and `(w, v) ∈ Y`. Equal indices use the
/// fifth clause of `R`: `w = 2^i 5^k` separates the two leaves.
pub fn witness_r5(u: RepPoint, v: RepPoint, x: Selector, y: Selector) -> Result<RepPoint> {
    if u.n != v.n || u.i == 0 || v.i == 0 || u.i == v.i {
        return Err(Error::Precondition(format!(
            "(r5) needs points of two distinct leaves of one plant, got {u}, {v}"
        )));
    }
    let (i, j) = (u.index, v.index);
    let index = if i != j {
        distinct_witness(i, j, x, y)?
    } else {
        use Selector::*;
        match (x, y) {
            (R, R) => p23(i, i)?,
            (R, T) => p25(i, u.i)?,
            (T, R) => p25(i, v.i)?,
            (T, T) => p23(2 * i + 1, 2 * i + 1)?,
        }
    };
    Ok(RepPoint::new(index, u.n, 0))
}

/// A window check: failures plus counters describing what was verified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepCheck {
    pub report: ValidationReport,
    pub stats: BTreeMap<String, u64>,
}

impl RepCheck {
    fn new() -> Self {
        Self {
            report: ValidationReport::new(),
            stats: BTreeMap::new(),
        }
    }

    fn count(&mut self, key: &str) {
        *self.stats.entry(key.to_string()).or_default() += 1;
    }

    pub fn passed(&self) -> bool {
        self.report.passed
    }
}

/// The window checks of the representation, against `Z` truncated to the
/// window's plants.
pub struct RepChecker {
    pub rep: Representation,
    pub window: RepWindow,
    z: FiniteAtomStructure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Diagonal,
    Diversity,
    Full,
    Split { n: u32, k: u32, sel: Selector },
    SplitConv { n: u32, k: u32, sel: Selector },
}

fn shape(a: &AtomLabel) -> Shape {
    match *a {
        AtomLabel::Identity { .. } => Shape::Diagonal,
        AtomLabel::R { n, k } => Shape::Split { n, k, sel: Selector::R },
        AtomLabel::RConv { n, k } => Shape::SplitConv { n, k, sel: Selector::R },
        AtomLabel::W { n, i, m, j } if (n, i) == (m, j) => Shape::Diversity,
        AtomLabel::W { n, i: 0, m, j } if n == m && j > 0 => Shape::Split {
            n,
            k: j,
            sel: Selector::T,
        },
        AtomLabel::W { n, i, m, j: 0 } if n == m && i > 0 => Shape::SplitConv {
            n,
            k: i,
            sel: Selector::T,
        },
        _ => Shape::Full,
    }
}

fn blocks_of(a: &AtomLabel) -> ((u32, u32), (u32, u32)) {
    match *a {
        AtomLabel::Identity { n, i } => ((n, i), (n, i)),
        AtomLabel::R { n, k } => ((n, 0), (n, k)),
        AtomLabel::RConv { n, k } => ((n, k), (n, 0)),
        AtomLabel::W { n, i, m, j } => ((n, i), (m, j)),
        AtomLabel::Opaque(_) => unreachable!("opaque atoms are not represented"),
    }
}

/// Which composition clause a triple `P(a, b, c)` instantiates.
///
/// `iv.1`–`iv.6` are the leaf cases; `-conv` marks their mirror images under
/// `(a, b, c) ↦ (b̆, ă, c̆)`. `unit` and `diagonal` cover identity atoms and
/// `dense` the triples without a split atom.
pub fn composition_case(a: &AtomLabel, b: &AtomLabel, c: &AtomLabel) -> &'static str {
    use Shape::*;
    let (sa, sb, sc) = (shape(a), shape(b), shape(c));
    if sa == Diagonal || sb == Diagonal {
        return "unit";
    }
    if sc == Diagonal {
        return "diagonal";
    }
    let (da, ra) = blocks_of(a);
    let (_, rb) = blocks_of(b);
    let split = |s: Shape| matches!(s, Split { .. });
    let conv = |s: Shape| matches!(s, SplitConv { .. });
    match (sa, sb, sc) {
        (Diversity, _, _) if split(sb) && split(sc) => "iv.1",
        (_, Diversity, _) if conv(sa) && conv(sc) => "iv.1-conv",
        (Diversity, _, _) if conv(sb) && conv(sc) => "iv.2",
        (_, Diversity, _) if split(sa) && split(sc) => "iv.2-conv",
        (Full, _, _) if conv(sb) && conv(sc) && da.0 == ra.0 => "iv.3",
        (_, Full, _) if split(sa) && split(sc) && ra.0 == rb.0 => "iv.3-conv",
        (Split { .. }, SplitConv { .. }, Diversity) => "iv.4",
        (SplitConv { .. }, Split { .. }, Diversity) => "iv.5",
        (SplitConv { n, .. }, Split { n: n2, .. }, Full) if n == n2 => "iv.6",
        _ if split(sa) || split(sb) || conv(sa) || conv(sb) => "leaf-adjacent",
        _ => "dense",
    }
}

impl RepChecker {
    pub fn new(rep: Representation, window: RepWindow) -> Self {
        Self {
            rep,
            window,
            z: build_z(window.plants),
        }
    }

    pub fn structure(&self) -> &FiniteAtomStructure {
        &self.z
    }

    fn label_index(&self, a: &AtomLabel) -> Option<usize> {
        self.z.index_of(a).ok()
    }

    /// (i): every windowed pair lies in exactly one atom, the one named by
    /// `atom_of`, and every atom has a pair.
    pub fn check_partition(&self) -> RepCheck {
        let mut out = RepCheck::new();
        let points = self.window.points();
        let mut nonempty = vec![false; self.z.len()];
        for &u in &points {
            for &v in &points {
                let holders: Vec<usize> = (0..self.z.len())
                    .filter(|&a| self.rep.contains(self.z.label(a), u, v))
                    .collect();
                out.count("pairs");
                match holders.as_slice() {
                    [a] => {
                        nonempty[*a] = true;
                        if *self.z.label(*a) != self.rep.atom_of(u, v) {
                            out.report.fail("atom-of", [u.to_string(), v.to_string()]);
                        }
                    }
                    _ => {
                        let mut w = vec![u.to_string(), v.to_string()];
                        w.extend(holders.iter().map(|&a| self.z.label(a).to_string()));
                        out.report.fail("partition", w);
                    }
                }
            }
        }
        for (a, seen) in nonempty.into_iter().enumerate() {
            if !seen {
                out.report.fail("nonempty", [self.z.label(a)]);
            }
        }
        out
    }

    /// (ii) identity atoms are exactly the atoms meeting, and contained in,
    /// the diagonal; (iii) `C(a, b)` iff `rep(b) = rep(a)˘`.
    pub fn check_identity_converse(&self) -> RepCheck {
        let mut out = RepCheck::new();
        let points = self.window.points();
        let n = self.z.len();
        let mut meets_diag = vec![false; n];
        let mut off_diag = vec![false; n];
        for &u in &points {
            for &v in &points {
                for a in 0..n {
                    let label = self.z.label(a);
                    let here = self.rep.contains(label, u, v);
                    if here {
                        if u == v {
                            meets_diag[a] = true;
                        } else {
                            off_diag[a] = true;
                        }
                    }
                    let conv = self.z.label(self.z.converse(a));
                    if here != self.rep.contains(conv, v, u) {
                        out.report.fail(
                            "converse",
                            [label.to_string(), u.to_string(), v.to_string()],
                        );
                    }
                }
                let (a, b) = (self.rep.atom_of(u, v), self.rep.atom_of(v, u));
                match (self.label_index(&a), self.label_index(&b)) {
                    (Some(ai), Some(bi)) if self.z.converse(ai) == bi => out.count("converse-pairs"),
                    _ => out.report.fail("converse-atom", [a.to_string(), b.to_string()]),
                }
            }
        }
        for a in 0..n {
            let identity = self.z.is_identity(a);
            if identity != meets_diag[a] || identity == off_diag[a] {
                out.report.fail("identity", [self.z.label(a)]);
            }
        }
        out
    }

    fn verify(&self, out: &mut RepCheck, lemma: &str, ok: bool, ctx: impl FnOnce() -> Vec<String>) {
        if ok {
            out.count(lemma);
        } else {
            out.report.fail(lemma, ctx());
        }
    }

    /// (r1)–(r5) over every windowed point and selector combination, with
    /// each constructed witness re-checked by membership.
    pub fn check_r_properties(&self) -> RepCheck {
        let mut out = RepCheck::new();
        let w = &self.window;
        let sel_name = |s: Selector| format!("{s:?}");
        for n in 1..=w.plants {
            for k in 1..=n {
                let roots: Vec<_> = w.block_points(n, 0).collect();
                let leaves: Vec<_> = w.block_points(n, k).collect();
                for x in Selector::BOTH {
                    for y in Selector::BOTH {
                        for &u in &roots {
                            for &v in roots.iter().filter(|v| v.index != u.index) {
                                let r = witness_r3(u, v, x, y, k);
                                let ok = r.as_ref().is_ok_and(|&m| {
                                    self.rep.selected(x, k, u, m) && self.rep.selected(y, k, v, m)
                                });
                                self.verify(&mut out, "r3", ok, || {
                                    vec![u.to_string(), v.to_string(), sel_name(x), sel_name(y), format!("{r:?}")]
                                });
                            }
                        }
                        for &u in &leaves {
                            for &v in leaves.iter().filter(|v| v.index != u.index) {
                                let r = witness_r4(u, v, x, y);
                                let ok = r.as_ref().is_ok_and(|&m| {
                                    self.rep.selected(x, k, m, u) && self.rep.selected(y, k, m, v)
                                });
                                self.verify(&mut out, "r4", ok, || {
                                    vec![u.to_string(), v.to_string(), sel_name(x), sel_name(y), format!("{r:?}")]
                                });
                            }
                        }
                        for l in (1..=n).filter(|&l| l != k) {
                            for &u in &leaves {
                                for v in w.block_points(n, l) {
                                    let r = witness_r5(u, v, x, y);
                                    let ok = r.as_ref().is_ok_and(|&m| {
                                        self.rep.selected(x, k, m, u)
                                            && self.rep.selected(y, l, m, v)
                                    });
                                    self.verify(&mut out, "r5", ok, || {
                                        vec![u.to_string(), v.to_string(), sel_name(x), sel_name(y), format!("{r:?}")]
                                    });
                                }
                            }
                        }
                    }
                }
                for x in Selector::BOTH {
                    for &u in &roots {
                        // (r1) through (r3): w ∈ X from u, once with the other
                        // root in X and once in its complement.
                        let other = u.with_index(if u.index == 0 { 1 } else { 0 });
                        let flip = if x == Selector::R { Selector::T } else { Selector::R };
                        let pair = (
                            witness_r3(u, other, x, x, k),
                            witness_r3(u, other, x, flip, k),
                        );
                        let ok = matches!(pair, (Ok(a), Ok(b)) if a != b
                            && self.rep.selected(x, k, u, a) && self.rep.selected(x, k, u, b));
                        self.verify(&mut out, "r1-via-r3", ok, || vec![u.to_string(), sel_name(x)]);
                        let found = self.scan(n, k, |m| self.rep.selected(x, k, u, m), 2);
                        self.verify(&mut out, "r1-direct", found.len() == 2, || {
                            vec![u.to_string(), sel_name(x)]
                        });
                    }
                    for &v in &leaves {
                        let other = v.with_index(if v.index == 0 { 1 } else { 0 });
                        let flip = if x == Selector::R { Selector::T } else { Selector::R };
                        let pair = (witness_r4(v, other, x, x), witness_r4(v, other, x, flip));
                        let ok = matches!(pair, (Ok(a), Ok(b)) if a != b
                            && self.rep.selected(x, k, a, v) && self.rep.selected(x, k, b, v));
                        self.verify(&mut out, "r2-via-r4", ok, || vec![v.to_string(), sel_name(x)]);
                        let found = self.scan(n, 0, |m| self.rep.selected(x, k, m, v), 2);
                        self.verify(&mut out, "r2-direct", found.len() == 2, || {
                            vec![v.to_string(), sel_name(x)]
                        });
                    }
                }
            }
        }
        out
    }

    /// Up to `want` points of `U_{n,i}` satisfying `pred`, by increasing
    /// index below the search bound.
    fn scan(&self, n: u32, i: u32, pred: impl Fn(RepPoint) -> bool, want: usize) -> Vec<RepPoint> {
        let bound = self.window.search_bound().expect("validated window");
        (0..bound)
            .map(|idx| RepPoint::new(idx, n, i))
            .filter(|&p| pred(p))
            .take(want)
            .collect()
    }

    /// A point `w` with `(u, w) ∈ rep(a)` and `(w, v) ∈ rep(b)`, built the
    /// way the corresponding lemma builds it. Returns the lemma used.
    pub fn middle_point(
        &self,
        a: &AtomLabel,
        b: &AtomLabel,
        u: RepPoint,
        v: RepPoint,
    ) -> Option<(RepPoint, &'static str)> {
        use Shape::*;
        let (_, (bn, bi)) = blocks_of(a);
        if blocks_of(b).0 != (bn, bi) {
            return None;
        }
        let rep = &self.rep;
        let first = |pred: &dyn Fn(RepPoint) -> bool| self.scan(bn, bi, pred, 1).pop();
        let found = |w: Option<RepPoint>, lemma| w.map(|w| (w, lemma));
        match (shape(a), shape(b)) {
            (Diagonal, _) => Some((u, "unit")),
            (_, Diagonal) => Some((v, "unit")),
            (Split { k, sel: x, .. }, SplitConv { sel: y, .. }) => {
                if u.index != v.index {
                    found(witness_r3(u, v, x, y, k).ok(), "r3")
                } else {
                    found(first(&|w| rep.contains(a, u, w) && rep.contains(b, w, v)), "r1")
                }
            }
            (SplitConv { k, sel: x, .. }, Split { k: l, sel: y, .. }) => {
                if k != l {
                    found(witness_r5(u, v, x, y).ok(), "r5")
                } else if u.index != v.index {
                    found(witness_r4(u, v, x, y).ok(), "r4")
                } else {
                    found(first(&|w| rep.contains(a, u, w) && rep.contains(b, w, v)), "r2")
                }
            }
            (Split { .. }, Diversity | Full) => {
                found(first(&|w| rep.contains(a, u, w) && rep.contains(b, w, v)), "r1")
            }
            (Diversity | Full, Split { .. }) => {
                found(first(&|w| rep.contains(b, w, v) && rep.contains(a, u, w)), "r2")
            }
            (SplitConv { .. }, Diversity | Full) => {
                found(first(&|w| rep.contains(a, u, w) && rep.contains(b, w, v)), "r2")
            }
            (Diversity | Full, SplitConv { .. }) => {
                found(first(&|w| rep.contains(b, w, v) && rep.contains(a, u, w)), "r1")
            }
            (Diversity | Full, Diversity | Full) => {
                let w = (0..3)
                    .map(|idx| RepPoint::new(idx, bn, bi))
                    .find(|&w| rep.contains(a, u, w) && rep.contains(b, w, v));
                found(w, "dense")
            }
            _ => None,
        }
    }

    /// Indices that represent every behaviour a middle point can have
    /// relative to windowed endpoints: all small indices, `2^a 3^b` and
    /// `2^a 5^c` with `a, b ≤ M`, `1 ≤ c ≤ N`, and one index `7M` with a
    /// foreign prime factor.
    pub fn middle_candidates(&self) -> Vec<u64> {
        let m = self.window.indices;
        let mut out: Vec<u64> = (0..m).collect();
        for a in 0..=m {
            for b in 0..=m {
                out.push(p23(a, b).expect("validated window"));
            }
            for c in 1..=self.window.plants {
                out.push(p25(a, c).expect("validated window"));
            }
        }
        out.push(7 * m);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// (iv) in both directions. Every triple `P(a, b, c)` gets a middle point
    /// for every windowed pair of `rep(c)`; conversely every middle point
    /// found among [`Self::middle_candidates`] between windowed endpoints
    /// lies on a triple of `P`.
    pub fn check_composition_clauses(&self) -> RepCheck {
        let mut out = RepCheck::new();
        let z = &self.z;
        let mut by_result: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
        for (a, b, c) in z.triples() {
            by_result.entry(c).or_default().push((a, b));
        }
        let points = self.window.points();
        let candidates = self.middle_candidates();
        let blocks: Vec<_> = self.window.blocks().collect();
        for &u in &points {
            for &v in &points {
                let c_label = self.rep.atom_of(u, v);
                let Some(c) = self.label_index(&c_label) else {
                    out.report.fail("atom-of", [u.to_string(), v.to_string()]);
                    continue;
                };
                for &(a, b) in by_result.get(&c).map(Vec::as_slice).unwrap_or(&[]) {
                    let (al, bl) = (z.label(a), z.label(b));
                    let case = composition_case(al, bl, &c_label);
                    let ok = self.middle_point(al, bl, u, v).is_some_and(|(w, _)| {
                        self.rep.contains(al, u, w) && self.rep.contains(bl, w, v)
                    });
                    if ok {
                        out.count(case);
                    } else {
                        out.report.fail(
                            case,
                            [al.to_string(), bl.to_string(), c_label.to_string(), u.to_string(), v.to_string()],
                        );
                    }
                }
                for &(bn, bi) in &blocks {
                    for &idx in &candidates {
                        let w = RepPoint::new(idx, bn, bi);
                        let (a_label, b_label) = (self.rep.atom_of(u, w), self.rep.atom_of(w, v));
                        let holds = match (self.label_index(&a_label), self.label_index(&b_label)) {
                            (Some(a), Some(b)) => z.p(a, b, c),
                            _ => false,
                        };
                        if holds {
                            out.count("converse-direction");
                        } else {
                            out.report.fail(
                                "converse-direction",
                                [a_label.to_string(), b_label.to_string(), c_label.to_string(), u.to_string(), w.to_string(), v.to_string()],
                            );
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Selector::{R, T};

    fn l(s: &str) -> AtomLabel {
        s.parse().unwrap()
    }

    fn p(index: u64, n: u32, i: u32) -> RepPoint {
        RepPoint::new(index, n, i)
    }

    #[test]
    fn factorization() {
        assert_eq!(factor_235(1), Some((0, 0, 0)));
        assert_eq!(factor_235(360), Some((3, 2, 1)));
        assert_eq!(factor_235(7), None);
        assert_eq!(factor_235(0), None);
    }

    #[test]
    fn membership_examples() {
        let rep = Representation::new();
        assert!(rep.contains(&l("r(1,1)"), p(0, 1, 0), p(1, 1, 1)));
        assert!(!rep.contains(&l("w(1,0,1,1)"), p(0, 1, 0), p(1, 1, 1)));
        assert!(rep.contains(&l("id(1,0)"), p(5, 1, 0), p(5, 1, 0)));
        assert!(!rep.contains(&l("id(1,0)"), p(5, 1, 0), p(4, 1, 0)));
        assert!(rep.contains(&l("rc(1,1)"), p(1, 1, 1), p(0, 1, 0)));
        // (2^2 5^1, 2, 0) is related to (2, 2, 1) by the fifth clause only.
        assert!(rep.contains(&l("r(2,1)"), p(20, 2, 0), p(2, 2, 1)));
        assert!(!rep.contains(&l("r(2,2)"), p(20, 2, 0), p(2, 2, 2)));
        assert!(!Representation::new()
            .without_clause(5)
            .contains(&l("r(2,1)"), p(20, 2, 0), p(2, 2, 1)));
    }

    /// Direct enumeration of the five clause sets, independent of
    /// `factor_235`.
    fn enumerated_r(k: u32, bound: u64) -> std::collections::BTreeSet<(u64, u64)> {
        let mut out = std::collections::BTreeSet::new();
        let powers = |base: u64| {
            let mut v = vec![1u64];
            while *v.last().unwrap() * base < bound * bound * 1000 {
                let next = v.last().unwrap() * base;
                v.push(next);
            }
            v
        };
        let (p2, p3) = (powers(2), powers(3));
        let p5k = 5u64.pow(k);
        for i in 0..bound {
            for (j, _) in p3.iter().enumerate() {
                for (x, y) in [
                    (i, p2.get(i as usize).map(|a| a * p3[j])),
                    (i, p3.get(i as usize).and_then(|a| p2.get(j).map(|b| a * b))),
                ] {
                    if let Some(y) = y {
                        if y < bound {
                            out.insert((x, y));
                        }
                    }
                }
                for x in [
                    p2.get(i as usize).map(|a| a * p3[j]),
                    p3.get(i as usize).and_then(|a| p2.get(j).map(|b| a * b)),
                ]
                .into_iter()
                .flatten()
                {
                    if x < bound {
                        out.insert((x, i));
                    }
                }
            }
            if let Some(a) = p2.get(i as usize) {
                if a * p5k < bound {
                    out.insert((a * p5k, i));
                }
            }
        }
        out
    }

    #[test]
    fn membership_matches_clause_enumeration() {
        let rep = Representation::new();
        for k in 1..=3 {
            let expected = enumerated_r(k, 200);
            for u in 0..200 {
                for v in 0..200 {
                    assert_eq!(
                        rep.r_contains(k, u, v),
                        expected.contains(&(u, v)),
                        "k={k} u={u} v={v}"
                    );
                }
            }
        }
    }

    #[test]
    fn r3_examples() {
        let (u, v) = (p(0, 1, 0), p(1, 1, 0));
        assert_eq!(witness_r3(u, v, R, R, 1).unwrap(), p(3, 1, 1));
        assert_eq!(witness_r3(u, v, R, T, 1).unwrap(), p(9, 1, 1));
        let tt = witness_r3(u, v, T, T, 1).unwrap();
        assert_eq!(tt, p(36, 1, 1));
        let rep = Representation::new();
        assert!(!rep.contains(&l("r(1,1)"), u, tt) && !rep.contains(&l("r(1,1)"), v, tt));
        assert!(witness_r3(u, u, R, R, 1).is_err());
        assert!(witness_r3(u, v, R, R, 2).is_err());
    }

    #[test]
    fn r4_r5_examples() {
        assert_eq!(witness_r4(p(0, 1, 1), p(1, 1, 1), R, R).unwrap(), p(3, 1, 0));
        assert_eq!(witness_r5(p(2, 2, 1), p(2, 2, 2), R, T).unwrap(), p(20, 2, 0));
        assert!(witness_r4(p(0, 1, 1), p(0, 1, 1), R, R).is_err());
        assert!(witness_r5(p(0, 2, 1), p(0, 2, 1), R, R).is_err());
        let rep = Representation::new();
        for (x, y) in [(R, R), (R, T), (T, R), (T, T)] {
            let (u, v) = (p(2, 2, 1), p(2, 2, 2));
            let w = witness_r5(u, v, x, y).unwrap();
            assert!(rep.selected(x, 1, w, u) && rep.selected(y, 2, w, v), "{x:?}{y:?}");
        }
    }

    #[test]
    fn window_bounds() {
        assert!(RepWindow::new(3, 1).is_err());
        let w = RepWindow::new(3, 6).unwrap();
        assert_eq!(w.search_bound().unwrap(), 64 * 2187 * 125);
        assert_eq!(w.points().len(), 60);
        assert!(matches!(RepWindow::new(3, 40), Err(Error::Overflow(_))));
    }

    #[test]
    fn small_window_checks_pass() {
        let checker = RepChecker::new(Representation::new(), RepWindow::new(2, 4).unwrap());
        for check in [
            checker.check_partition(),
            checker.check_identity_converse(),
            checker.check_r_properties(),
            checker.check_composition_clauses(),
        ] {
            assert!(check.passed(), "{:?}", check.report.failures);
        }
    }

    #[test]
    fn wider_window_partitions() {
        let checker = RepChecker::new(Representation::new(), RepWindow::new(2, 8).unwrap());
        assert!(checker.check_partition().passed());
        let bound = checker.window.search_bound().unwrap();
        assert!(checker.middle_candidates().iter().all(|&c| c <= bound));
    }

    #[test]
    fn dropping_fifth_clause_breaks_r5_only() {
        let checker = RepChecker::new(
            Representation::new().without_clause(5),
            RepWindow::new(2, 4).unwrap(),
        );
        assert!(checker.check_partition().passed());
        let r = checker.check_r_properties();
        assert_eq!(
            r.report.failed_checks().into_iter().collect::<Vec<_>>(),
            vec!["r5"]
        );
    }

    #[test]
    fn dropping_first_clause_is_named() {
        let checker = RepChecker::new(
            Representation::new().without_clause(1),
            RepWindow::new(2, 4).unwrap(),
        );
        let r = checker.check_r_properties();
        assert!(r.report.failed_checks().contains("r3"));
    }

    #[test]
    fn identity_not_in_leaf_round_trip() {
        let checker = RepChecker::new(Representation::new(), RepWindow::new(1, 6).unwrap());
        let r = l("r(1,1)");
        let u = p(0, 0, 0);
        for w in checker.window.points() {
            assert!(!checker.rep.contains(&r, u, w));
        }
    }

    #[test]
    fn case_labels() {
        assert_eq!(composition_case(&l("w(1,0,1,0)"), &l("r(1,1)"), &l("w(1,0,1,1)")), "iv.1");
        assert_eq!(composition_case(&l("r(2,1)"), &l("rc(2,1)"), &l("w(2,0,2,0)")), "iv.4");
        assert_eq!(composition_case(&l("rc(2,1)"), &l("w(2,0,2,2)"), &l("w(2,1,2,2)")), "iv.6");
        assert_eq!(composition_case(&l("w(2,1,2,2)"), &l("rc(2,2)"), &l("w(2,1,2,0)")), "iv.3");
        assert_eq!(composition_case(&l("r(1,1)"), &l("rc(1,1)"), &l("id(1,0)")), "diagonal");
        assert_eq!(composition_case(&l("w(0,0,1,0)"), &l("w(1,0,0,0)"), &l("w(0,0,0,0)")), "dense");
    }
}
