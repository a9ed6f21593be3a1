//! Finite atom structures `⟨S, P, C, I⟩` and the plant structure `Z`.
//!
//! A [`FiniteAtomStructure`] stores its atoms in label order together with a
//! composition table `atom × atom → set of atoms`; the ternary relation `P`
//! is read off that table. [`build_z`] produces the truncation of `Z` to
//! plants with index at most `N`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of an atom.
///
/// The four structured variants are the atoms of `Z`: `id(n,i)` with
/// `i ≤ n`, `r(n,k)` and its converse `rc(n,k)` with `1 ≤ k ≤ n`, and
/// `w(n,i,m,j)` with `i ≤ n`, `j ≤ m`. Atoms of any other structure use
/// [`AtomLabel::Opaque`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomLabel {
    Identity { n: u32, i: u32 },
    R { n: u32, k: u32 },
    RConv { n: u32, k: u32 },
    W { n: u32, i: u32, m: u32, j: u32 },
    Opaque(String),
}

impl AtomLabel {
    pub fn identity(n: u32, i: u32) -> Result<Self> {
        Self::Identity { n, i }.validated()
    }

    pub fn r(n: u32, k: u32) -> Result<Self> {
        Self::R { n, k }.validated()
    }

    pub fn r_conv(n: u32, k: u32) -> Result<Self> {
        Self::RConv { n, k }.validated()
    }

    pub fn w(n: u32, i: u32, m: u32, j: u32) -> Result<Self> {
        Self::W { n, i, m, j }.validated()
    }

    pub fn opaque(name: impl Into<String>) -> Self {
        Self::Opaque(name.into())
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            Self::Identity { n, i } => i <= n,
            Self::R { n, k } | Self::RConv { n, k } => 1 <= k && k <= n,
            Self::W { n, i, m, j } => i <= n && j <= m,
            Self::Opaque(ref name) => {
                !name.is_empty() && !name.chars().any(char::is_whitespace)
            }
        }
    }

    fn validated(self) -> Result<Self> {
        if self.is_valid() {
            Ok(self)
        } else {
            Err(Error::InvalidLabel(self.to_string()))
        }
    }

    /// Largest plant index mentioned by a `Z` label.
    pub fn plant_bound(&self) -> Option<u32> {
        match *self {
            Self::Identity { n, .. } | Self::R { n, .. } | Self::RConv { n, .. } => Some(n),
            Self::W { n, m, .. } => Some(n.max(m)),
            Self::Opaque(_) => None,
        }
    }
}

impl fmt::Display for AtomLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity { n, i } => write!(f, "id({n},{i})"),
            Self::R { n, k } => write!(f, "r({n},{k})"),
            Self::RConv { n, k } => write!(f, "rc({n},{k})"),
            Self::W { n, i, m, j } => write!(f, "w({n},{i},{m},{j})"),
            Self::Opaque(name) => f.write_str(name),
        }
    }
}

impl FromStr for AtomLabel {
    type Err = Error;

    /// Parses the canonical forms `id(n,i)`, `r(n,k)`, `rc(n,k)` and
    /// `w(n,i,m,j)`. Any other whitespace-free word is an opaque label.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidLabel(s.to_string());
        let structured = s
            .split_once('(')
            .filter(|(head, rest)| matches!(*head, "id" | "r" | "rc" | "w") && rest.ends_with(')'));
        let Some((head, rest)) = structured else {
            let label = Self::Opaque(s.to_string());
            return if label.is_valid() { Ok(label) } else { Err(bad()) };
        };
        let args = rest[..rest.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<u32>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let label = match (head, args.as_slice()) {
            ("id", &[n, i]) => Self::Identity { n, i },
            ("r", &[n, k]) => Self::R { n, k },
            ("rc", &[n, k]) => Self::RConv { n, k },
            ("w", &[n, i, m, j]) => Self::W { n, i, m, j },
            _ => return Err(bad()),
        };
        label.validated().map_err(|_| bad())
    }
}

impl Serialize for AtomLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AtomLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serialized form of a structure, as read and written by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureParts {
    pub atoms: Vec<AtomLabel>,
    pub identity: Vec<AtomLabel>,
    pub converse: Vec<(AtomLabel, AtomLabel)>,
    pub triples: Vec<(AtomLabel, AtomLabel, AtomLabel)>,
}

/// Outcome of a batch of checks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub failures: Vec<Failure>,
    /// Number of failures found, including ones beyond the recorded cap.
    pub total_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub check: String,
    pub witness: Vec<String>,
}

const MAX_RECORDED_FAILURES: usize = 64;

impl ValidationReport {
    pub fn new() -> Self {
        Self {
            passed: true,
            failures: Vec::new(),
            total_failures: 0,
        }
    }

    pub fn fail<I, S>(&mut self, check: &str, witness: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.passed = false;
        self.total_failures += 1;
        if self.failures.len() < MAX_RECORDED_FAILURES {
            self.failures.push(Failure {
                check: check.to_string(),
                witness: witness.into_iter().map(|w| w.to_string()).collect(),
            });
        }
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.passed &= other.passed;
        self.total_failures += other.total_failures;
        let room = MAX_RECORDED_FAILURES.saturating_sub(self.failures.len());
        self.failures.extend(other.failures.into_iter().take(room));
    }

    pub fn failed_checks(&self) -> BTreeSet<&str> {
        self.failures.iter().map(|f| f.check.as_str()).collect()
    }
}

/// An explicit finite atom structure.
///
/// Atoms are kept sorted by label so that every enumeration, report and
/// counterexample is reproducible. `C` is stored as a total function; it
/// need not be an involution (that is checked, not assumed).
#[derive(Debug, Clone)]
pub struct FiniteAtomStructure {
    atoms: Vec<AtomLabel>,
    index: HashMap<AtomLabel, usize>,
    identity: FixedBitSet,
    converse: Vec<usize>,
    /// `comp[a * n + b]` is `{c : P(a, b, c)}`.
    comp: Vec<FixedBitSet>,
    domain: Vec<Vec<usize>>,
    range: Vec<Vec<usize>>,
}

impl PartialEq for FiniteAtomStructure {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
            && self.identity == other.identity
            && self.converse == other.converse
            && self.comp == other.comp
    }
}

impl Eq for FiniteAtomStructure {}

impl FiniteAtomStructure {
    /// Builds a structure from labelled relations.
    ///
    /// Fails on duplicate or invalid labels, on relation entries naming
    /// unknown atoms, and when `converse` does not give every atom exactly
    /// one image.
    pub fn from_relations<C, T>(
        atoms: Vec<AtomLabel>,
        identity: impl IntoIterator<Item = AtomLabel>,
        converse: C,
        triples: T,
    ) -> Result<Self>
    where
        C: IntoIterator<Item = (AtomLabel, AtomLabel)>,
        T: IntoIterator<Item = (AtomLabel, AtomLabel, AtomLabel)>,
    {
        let mut atoms = atoms;
        atoms.sort();
        for pair in atoms.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateAtom(pair[0].to_string()));
            }
        }
        if let Some(bad) = atoms.iter().find(|a| !a.is_valid()) {
            return Err(Error::InvalidLabel(bad.to_string()));
        }
        let index: HashMap<AtomLabel, usize> =
            atoms.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let lookup = |a: &AtomLabel| {
            index
                .get(a)
                .copied()
                .ok_or_else(|| Error::UnknownAtom(a.to_string()))
        };

        let n = atoms.len();
        let mut id_bits = FixedBitSet::with_capacity(n);
        for e in identity {
            id_bits.insert(lookup(&e)?);
        }
        let mut conv: Vec<Option<usize>> = vec![None; n];
        for (a, b) in converse {
            let (a, b) = (lookup(&a)?, lookup(&b)?);
            match conv[a] {
                Some(prev) if prev != b => {
                    return Err(Error::ConverseNotFunction(atoms[a].to_string()))
                }
                _ => conv[a] = Some(b),
            }
        }
        let converse = conv
            .iter()
            .enumerate()
            .map(|(a, c)| c.ok_or_else(|| Error::ConverseNotFunction(atoms[a].to_string())))
            .collect::<Result<Vec<_>>>()?;
        let triples = triples
            .into_iter()
            .map(|(a, b, c)| Ok((lookup(&a)?, lookup(&b)?, lookup(&c)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_indexed(atoms, index, id_bits, converse, triples))
    }

    fn from_indexed(
        atoms: Vec<AtomLabel>,
        index: HashMap<AtomLabel, usize>,
        identity: FixedBitSet,
        converse: Vec<usize>,
        triples: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Self {
        let n = atoms.len();
        let mut comp = vec![FixedBitSet::with_capacity(n); n * n];
        for (a, b, c) in triples {
            comp[a * n + b].insert(c);
        }
        let mut domain = vec![Vec::new(); n];
        let mut range = vec![Vec::new(); n];
        for e in identity.ones() {
            for a in 0..n {
                if comp[e * n + a].contains(a) {
                    domain[a].push(e);
                }
                if comp[a * n + e].contains(a) {
                    range[a].push(e);
                }
            }
        }
        Self {
            atoms,
            index,
            identity,
            converse,
            comp,
            domain,
            range,
        }
    }

    pub fn from_parts(parts: &StructureParts) -> Result<Self> {
        Self::from_relations(
            parts.atoms.clone(),
            parts.identity.iter().cloned(),
            parts.converse.iter().cloned(),
            parts.triples.iter().cloned(),
        )
    }

    pub fn to_parts(&self) -> StructureParts {
        let label = |i: usize| self.atoms[i].clone();
        StructureParts {
            atoms: self.atoms.clone(),
            identity: self.identity.ones().map(label).collect(),
            converse: (0..self.len()).map(|a| (label(a), label(self.converse[a]))).collect(),
            triples: self
                .triples()
                .map(|(a, b, c)| (label(a), label(b), label(c)))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[AtomLabel] {
        &self.atoms
    }

    pub fn label(&self, a: usize) -> &AtomLabel {
        &self.atoms[a]
    }

    pub fn index_of(&self, label: &AtomLabel) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownAtom(label.to_string()))
    }

    pub fn contains(&self, label: &AtomLabel) -> bool {
        self.index.contains_key(label)
    }

    pub fn is_identity(&self, a: usize) -> bool {
        self.identity.contains(a)
    }

    pub fn identity_set(&self) -> &FixedBitSet {
        &self.identity
    }

    pub fn identity_atoms(&self) -> Vec<usize> {
        self.identity.ones().collect()
    }

    pub fn diversity_atoms(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| !self.is_identity(a)).collect()
    }

    pub fn converse(&self, a: usize) -> usize {
        self.converse[a]
    }

    pub fn converse_of(&self, a: &AtomLabel) -> Result<AtomLabel> {
        Ok(self.atoms[self.converse[self.index_of(a)?]].clone())
    }

    /// `P(a, b, c)`.
    #[inline]
    pub fn p(&self, a: usize, b: usize, c: usize) -> bool {
        self.comp[a * self.len() + b].contains(c)
    }

    /// `{c : P(a, b, c)}`.
    #[inline]
    pub fn compose_atoms(&self, a: usize, b: usize) -> &FixedBitSet {
        &self.comp[a * self.len() + b]
    }

    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let n = self.len();
        (0..n * n).flat_map(move |ab| self.comp[ab].ones().map(move |c| (ab / n, ab % n, c)))
    }

    pub fn triple_count(&self) -> usize {
        self.comp.iter().map(|s| s.count_ones(..)).sum()
    }

    pub fn domain(&self, a: usize) -> Result<usize> {
        self.unique(a, &self.domain[a], "domain")
    }

    pub fn range(&self, a: usize) -> Result<usize> {
        self.unique(a, &self.range[a], "range")
    }

    fn unique(&self, a: usize, candidates: &[usize], which: &'static str) -> Result<usize> {
        match candidates {
            [e] => Ok(*e),
            _ => Err(Error::MalformedDomainRange {
                atom: self.atoms[a].to_string(),
                which,
                count: candidates.len(),
            }),
        }
    }

    pub fn domain_of(&self, a: &AtomLabel) -> Result<AtomLabel> {
        Ok(self.atoms[self.domain(self.index_of(a)?)?].clone())
    }

    pub fn range_of(&self, a: &AtomLabel) -> Result<AtomLabel> {
        Ok(self.atoms[self.range(self.index_of(a)?)?].clone())
    }

    /// Ordered pairs of distinct identity atoms with at least two atoms
    /// going from the first to the second.
    pub fn splitable_pair_indices(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for a in 0..n {
            if let (Ok(x), Ok(y)) = (self.domain(a), self.range(a)) {
                if x != y {
                    *counts.entry((x, y)).or_default() += 1;
                }
            }
        }
        let mut pairs: Vec<_> = counts
            .into_iter()
            .filter(|&(_, c)| c >= 2)
            .map(|(pair, _)| pair)
            .collect();
        pairs.sort_unstable();
        pairs
    }

    pub fn splitable_pairs(&self) -> Vec<(AtomLabel, AtomLabel)> {
        self.splitable_pair_indices()
            .into_iter()
            .map(|(x, y)| (self.atoms[x].clone(), self.atoms[y].clone()))
            .collect()
    }

    /// Orbit of a triple under `(a,b,c) ↦ (ă,c,b)` and `(a,b,c) ↦ (c,b̆,a)`.
    pub fn peircean_transforms(
        &self,
        t: (AtomLabel, AtomLabel, AtomLabel),
    ) -> Result<BTreeSet<(AtomLabel, AtomLabel, AtomLabel)>> {
        for a in [&t.0, &t.1, &t.2] {
            self.index_of(a)?;
        }
        Ok(peircean_orbit(t, |a| {
            self.converse_of(a).expect("orbit stays inside the structure")
        }))
    }

    /// Invariants every structure is expected to satisfy: converse is an
    /// involution fixing identity atoms, and each atom has a unique domain
    /// and range.
    pub fn check_well_formed(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        for a in 0..self.len() {
            let ca = self.converse[a];
            if self.converse[ca] != a {
                report.fail("converse-involution", [&self.atoms[a], &self.atoms[ca]]);
            }
            if self.is_identity(a) && ca != a {
                report.fail("identity-self-converse", [&self.atoms[a], &self.atoms[ca]]);
            }
            if self.domain[a].len() != 1 {
                report.fail("domain-unique", [&self.atoms[a]]);
            }
            if self.range[a].len() != 1 {
                report.fail("range-unique", [&self.atoms[a]]);
            }
        }
        report
    }

    /// Atom-level relation algebra axioms: converse involution, the identity
    /// law on both sides, Peircean rotation and associativity of the
    /// composition table.
    pub fn check_ra_axioms(&self) -> ValidationReport {
        let mut report = self.check_well_formed();
        self.check_identity_law(&mut report);
        self.check_peircean(&mut report);
        self.check_associativity(&mut report);
        report
    }

    fn check_identity_law(&self, report: &mut ValidationReport) {
        let n = self.len();
        for a in 0..n {
            let mut right = FixedBitSet::with_capacity(n);
            let mut left = FixedBitSet::with_capacity(n);
            for e in self.identity.ones() {
                right.union_with(self.compose_atoms(a, e));
                left.union_with(self.compose_atoms(e, a));
            }
            for (name, set) in [("identity-law-right", &right), ("identity-law-left", &left)] {
                if set.count_ones(..) != 1 || !set.contains(a) {
                    for c in (0..n).filter(|&c| set.contains(c) != (c == a)) {
                        report.fail(name, [&self.atoms[a], &self.atoms[c]]);
                    }
                }
            }
        }
    }

    fn check_peircean(&self, report: &mut ValidationReport) {
        let n = self.len();
        for a in 0..n {
            let ca = self.converse[a];
            for b in 0..n {
                let cb = self.converse[b];
                for c in 0..n {
                    let p0 = self.p(a, b, c);
                    if p0 != self.p(ca, c, b) || p0 != self.p(c, cb, a) {
                        report.fail("peircean", [&self.atoms[a], &self.atoms[b], &self.atoms[c]]);
                    }
                }
            }
        }
    }

    fn check_associativity(&self, report: &mut ValidationReport) {
        let n = self.len();
        let mut left = FixedBitSet::with_capacity(n);
        let mut right = FixedBitSet::with_capacity(n);
        for a in 0..n {
            for b in 0..n {
                let ab = self.compose_atoms(a, b);
                for c in 0..n {
                    let bc = self.compose_atoms(b, c);
                    if ab.is_clear() && bc.is_clear() {
                        continue;
                    }
                    left.clear();
                    right.clear();
                    for e in ab.ones() {
                        left.union_with(self.compose_atoms(e, c));
                    }
                    for f in bc.ones() {
                        right.union_with(self.compose_atoms(a, f));
                    }
                    if left != right {
                        let d = left.symmetric_difference(&right).next().unwrap();
                        report.fail(
                            "associativity",
                            [&self.atoms[a], &self.atoms[b], &self.atoms[c], &self.atoms[d]],
                        );
                    }
                }
            }
        }
    }
}

/// Closure of `{t}` under the two Peircean rotations, for any converse map.
pub fn peircean_orbit<T, F>(t: (T, T, T), conv: F) -> BTreeSet<(T, T, T)>
where
    T: Ord + Clone,
    F: Fn(&T) -> T,
{
    let mut orbit = BTreeSet::new();
    let mut pending = vec![t];
    while let Some((a, b, c)) = pending.pop() {
        if orbit.contains(&(a.clone(), b.clone(), c.clone())) {
            continue;
        }
        pending.push((conv(&a), c.clone(), b.clone()));
        pending.push((c.clone(), conv(&b), a.clone()));
        orbit.insert((a, b, c));
    }
    orbit
}

fn z_domain(a: &AtomLabel) -> AtomLabel {
    match *a {
        AtomLabel::Identity { .. } => a.clone(),
        AtomLabel::R { n, .. } => AtomLabel::Identity { n, i: 0 },
        AtomLabel::RConv { n, k } => AtomLabel::Identity { n, i: k },
        AtomLabel::W { n, i, .. } => AtomLabel::Identity { n, i },
        AtomLabel::Opaque(_) => unreachable!("opaque labels are not atoms of Z"),
    }
}

fn z_range(a: &AtomLabel) -> AtomLabel {
    match *a {
        AtomLabel::Identity { .. } => a.clone(),
        AtomLabel::R { n, k } => AtomLabel::Identity { n, i: k },
        AtomLabel::RConv { n, .. } => AtomLabel::Identity { n, i: 0 },
        AtomLabel::W { m, j, .. } => AtomLabel::Identity { n: m, i: j },
        AtomLabel::Opaque(_) => unreachable!("opaque labels are not atoms of Z"),
    }
}

fn z_converse(a: &AtomLabel) -> AtomLabel {
    match *a {
        AtomLabel::Identity { .. } => a.clone(),
        AtomLabel::R { n, k } => AtomLabel::RConv { n, k },
        AtomLabel::RConv { n, k } => AtomLabel::R { n, k },
        AtomLabel::W { n, i, m, j } => AtomLabel::W { n: m, i: j, m: n, j: i },
        AtomLabel::Opaque(_) => unreachable!("opaque labels are not atoms of Z"),
    }
}

/// The atoms of `Z` whose plant indices are all at most `bound`.
pub fn z_atoms(bound: u32) -> Vec<AtomLabel> {
    let mut atoms = Vec::new();
    for n in 0..=bound {
        atoms.extend((0..=n).map(|i| AtomLabel::Identity { n, i }));
        atoms.extend((1..=n).map(|k| AtomLabel::R { n, k }));
        atoms.extend((1..=n).map(|k| AtomLabel::RConv { n, k }));
        for m in 0..=bound {
            for i in 0..=n {
                atoms.extend((0..=m).map(|j| AtomLabel::W { n, i, m, j }));
            }
        }
    }
    atoms.sort();
    atoms
}

/// `Z` truncated to plants `0..=bound`.
pub fn build_z(bound: u32) -> FiniteAtomStructure {
    let atoms = z_atoms(bound);
    let index: HashMap<AtomLabel, usize> =
        atoms.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
    let n = atoms.len();
    let idx = |a: &AtomLabel| index[a];

    let mut identity = FixedBitSet::with_capacity(n);
    let mut domain = vec![0; n];
    let mut range = vec![0; n];
    let mut converse = vec![0; n];
    for (a, label) in atoms.iter().enumerate() {
        if matches!(label, AtomLabel::Identity { .. }) {
            identity.insert(a);
        }
        domain[a] = idx(&z_domain(label));
        range[a] = idx(&z_range(label));
        converse[a] = idx(&z_converse(label));
    }

    let mut triples = Vec::new();
    for a in 0..n {
        triples.push((domain[a], a, a));
        triples.push((a, range[a], a));
        triples.push((a, converse[a], domain[a]));
    }
    // Diversity atoms grouped by (domain, range).
    let mut blocks: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for a in (0..n).filter(|&a| !identity.contains(a)) {
        blocks.entry((domain[a], range[a])).or_default().push(a);
    }
    let diversity: Vec<usize> = (0..n).filter(|&a| !identity.contains(a)).collect();
    for &a in &diversity {
        for &b in diversity.iter().filter(|&&b| domain[b] == range[a]) {
            if let Some(cs) = blocks.get(&(domain[a], range[b])) {
                triples.extend(cs.iter().map(|&c| (a, b, c)));
            }
        }
    }
    FiniteAtomStructure::from_indexed(atoms, index, identity, converse, triples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(s: &str) -> AtomLabel {
        s.parse().unwrap()
    }

    #[test]
    fn inventory_counts() {
        // |I| = Σ(n+1), |r| = |rc| = Σn, |w| = |I|².
        for (bound, total) in [(0, 2), (1, 14), (2, 48), (3, 122)] {
            let z = build_z(bound);
            let ids: usize = (0..=bound as usize).map(|n| n + 1).sum();
            let rs: usize = (0..=bound as usize).sum();
            assert_eq!(z.len(), total);
            assert_eq!(z.len(), ids + 2 * rs + ids * ids);
            assert_eq!(z.identity_atoms().len(), ids);
        }
        let z0 = build_z(0);
        assert_eq!(z0.atoms(), &[l("id(0,0)"), l("w(0,0,0,0)")]);
    }

    #[test]
    fn label_round_trip_and_rejects() {
        for s in ["id(1,0)", "r(2,1)", "rc(2,1)", "w(1,0,1,1)", "chain(0,5)", "x-"] {
            assert_eq!(l(s).to_string(), s);
        }
        assert!("id(1,2)".parse::<AtomLabel>().is_err());
        assert!("r(1,0)".parse::<AtomLabel>().is_err());
        assert!("w(1,0,1)".parse::<AtomLabel>().is_err());
        assert!("".parse::<AtomLabel>().is_err());
        assert!(AtomLabel::r(3, 4).is_err());
    }

    #[test]
    fn converse_domain_range_examples() {
        let z1 = build_z(1);
        assert_eq!(z1.converse_of(&l("w(1,0,1,1)")).unwrap(), l("w(1,1,1,0)"));
        assert_eq!(z1.converse_of(&l("id(1,0)")).unwrap(), l("id(1,0)"));
        assert_eq!(z1.converse_of(&l("r(1,1)")).unwrap(), l("rc(1,1)"));
        assert!(matches!(
            z1.converse_of(&l("r(2,1)")),
            Err(Error::UnknownAtom(_))
        ));

        let z2 = build_z(2);
        assert_eq!(z2.domain_of(&l("r(2,1)")).unwrap(), l("id(2,0)"));
        assert_eq!(z2.range_of(&l("r(2,1)")).unwrap(), l("id(2,1)"));
        assert_eq!(z1.domain_of(&l("id(0,0)")).unwrap(), l("id(0,0)"));
    }

    #[test]
    fn converse_and_domain_invariants() {
        let z = build_z(3);
        for a in 0..z.len() {
            assert_eq!(z.converse(z.converse(a)), a);
            assert_eq!(z.domain(z.converse(a)).unwrap(), z.range(a).unwrap());
            assert_eq!(z.range(z.converse(a)).unwrap(), z.domain(a).unwrap());
        }
    }

    #[test]
    fn atoms_between_identity_atoms() {
        let z = build_z(3);
        let splitable: BTreeSet<_> = z.splitable_pair_indices().into_iter().collect();
        for x in z.identity_atoms() {
            for y in z.identity_atoms() {
                let count = (0..z.len())
                    .filter(|&a| z.domain(a).unwrap() == x && z.range(a).unwrap() == y)
                    .count();
                let expected = if x == y || splitable.contains(&(x, y)) { 2 } else { 1 };
                assert_eq!(count, expected, "{} -> {}", z.label(x), z.label(y));
            }
        }
    }

    #[test]
    fn splitable_pair_examples() {
        assert_eq!(
            build_z(1).splitable_pairs(),
            vec![(l("id(1,0)"), l("id(1,1)")), (l("id(1,1)"), l("id(1,0)"))]
        );
        assert!(build_z(0).splitable_pairs().is_empty());
        assert_eq!(build_z(2).splitable_pairs().len(), 6);
    }

    #[test]
    fn peircean_examples() {
        let z1 = build_z(1);
        let fixed = z1
            .peircean_transforms((l("id(0,0)"), l("id(0,0)"), l("id(0,0)")))
            .unwrap();
        assert_eq!(fixed.len(), 1);

        // The rotations collapse on (r, rc, id): only three distinct triples.
        let orbit = z1
            .peircean_transforms((l("r(1,1)"), l("rc(1,1)"), l("id(1,0)")))
            .unwrap();
        let expected: BTreeSet<_> = [
            (l("r(1,1)"), l("rc(1,1)"), l("id(1,0)")),
            (l("rc(1,1)"), l("id(1,0)"), l("rc(1,1)")),
            (l("id(1,0)"), l("r(1,1)"), l("r(1,1)")),
        ]
        .into_iter()
        .collect();
        assert_eq!(orbit, expected);

        let generic = z1
            .peircean_transforms((l("w(0,0,1,0)"), l("r(1,1)"), l("w(0,0,1,1)")))
            .unwrap();
        assert_eq!(generic.len(), 6);
        for (a, b, c) in &generic {
            let g1 = (z1.converse_of(a).unwrap(), c.clone(), b.clone());
            let g2 = (c.clone(), z1.converse_of(b).unwrap(), a.clone());
            assert!(generic.contains(&g1) && generic.contains(&g2));
        }
    }

    #[test]
    fn ra_axioms_hold_on_small_truncations() {
        for bound in 0..=2 {
            let report = build_z(bound).check_ra_axioms();
            assert!(report.passed, "Z{bound}: {:?}", report.failures);
        }
    }

    #[test]
    fn non_involutive_converse_is_reported() {
        let mut parts = build_z(1).to_parts();
        for (a, b) in parts.converse.iter_mut() {
            if *a == l("r(1,1)") {
                *b = l("w(1,1,1,0)");
            }
        }
        let broken = FiniteAtomStructure::from_parts(&parts).unwrap();
        let report = broken.check_ra_axioms();
        assert!(!report.passed);
        assert!(report.failures.iter().any(|f| f.check == "converse-involution"
            && f.witness == ["r(1,1)", "w(1,1,1,0)"]));
    }

    #[test]
    fn deleted_triple_breaks_axioms() {
        let mut parts = build_z(1).to_parts();
        let victim = (l("r(1,1)"), l("w(1,1,1,1)"), l("w(1,0,1,1)"));
        parts.triples.retain(|t| *t != victim);
        let report = FiniteAtomStructure::from_parts(&parts).unwrap().check_ra_axioms();
        assert!(report.failed_checks().contains("peircean"));
    }

    #[test]
    fn parts_round_trip() {
        let z = build_z(2);
        let back = FiniteAtomStructure::from_parts(&z.to_parts()).unwrap();
        assert_eq!(back, z);
        let json = serde_json::to_string(&z.to_parts()).unwrap();
        let parsed: StructureParts = serde_json::from_str(&json).unwrap();
        assert_eq!(FiniteAtomStructure::from_parts(&parsed).unwrap(), z);
    }

    #[test]
    fn malformed_inputs_rejected() {
        let a = l("a");
        let b = l("b");
        let dup = FiniteAtomStructure::from_relations(
            vec![a.clone(), a.clone()],
            [],
            [],
            [],
        );
        assert!(matches!(dup, Err(Error::DuplicateAtom(_))));
        let partial = FiniteAtomStructure::from_relations(
            vec![a.clone(), b.clone()],
            [a.clone()],
            [(a.clone(), a.clone())],
            [],
        );
        assert!(matches!(partial, Err(Error::ConverseNotFunction(_))));
        let s = FiniteAtomStructure::from_relations(
            vec![a.clone(), b.clone()],
            [a.clone()],
            [(a.clone(), a.clone()), (b.clone(), b.clone())],
            [(a.clone(), a.clone(), a.clone())],
        )
        .unwrap();
        assert!(matches!(
            s.domain_of(&b),
            Err(Error::MalformedDomainRange { count: 0, .. })
        ));
        assert!(s.check_well_formed().failed_checks().contains("domain-unique"));
    }
}
