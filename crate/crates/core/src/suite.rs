//! Batch verification suites and their JSON reports.
//!
//! Independent checks inside a suite run on the rayon pool; reports list
//! checks in a fixed order, so equal inputs give equal reports apart from
//! `elapsed_ms`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::atoms::{build_z, FiniteAtomStructure, StructureParts, ValidationReport};
use crate::chain::{self, ChainAtom, ChainKind, ChainStructure, FinCof};
use crate::complex::{diversity_product_formula_check, random_term, ComplexAlgebra, Element};
use crate::error::{Error, Result};
use crate::logic::ef_equivalent;
use crate::rep::{RepCheck, RepChecker, RepWindow, Representation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
    pub stats: BTreeMap<String, Value>,
}

impl CheckResult {
    fn new(name: &str, ok: bool) -> Self {
        Self {
            name: name.to_string(),
            status: Status::from_bool(ok),
            counterexample: None,
            stats: BTreeMap::new(),
        }
    }

    fn stat(mut self, key: &str, value: impl Serialize) -> Self {
        self.stats.insert(key.to_string(), serde_json::to_value(value).unwrap());
        self
    }

    fn counterexample(mut self, value: impl Serialize) -> Self {
        self.counterexample = Some(serde_json::to_value(value).unwrap());
        self
    }

    fn from_validation(name: &str, report: &ValidationReport) -> Self {
        let mut out = Self::new(name, report.passed).stat("failures", report.total_failures);
        if let Some(first) = report.failures.first() {
            out = out.counterexample(first);
        }
        out
    }

    fn from_rep(name: &str, check: &RepCheck) -> Self {
        let mut out = Self::from_validation(name, &check.report);
        for (k, v) in &check.stats {
            out = out.stat(k, v);
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub structure: Value,
    pub checks: Vec<CheckResult>,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap()
    }

    /// One line per check.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} on {}\n", self.suite, self.structure);
        for c in &self.checks {
            let status = if c.passed() { "pass" } else { "FAIL" };
            let stats: Vec<String> = c.stats.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out += &format!("  {status:4} {:24} {}\n", c.name, stats.join(" "));
            if let Some(ce) = &c.counterexample {
                out += &format!("       counterexample: {ce}\n");
            }
        }
        out += &format!(
            "{} ({} ms)\n",
            if self.passed() { "all checks passed" } else { "some checks failed" },
            self.elapsed_ms
        );
        out
    }
}

fn finish(suite: &str, structure: Value, checks: Vec<CheckResult>, start: Instant) -> Report {
    Report {
        suite: suite.to_string(),
        structure,
        checks,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

/// A structure named on the command line: `z:N`, `file:PATH` (JSON parts)
/// or a chain component list such as `omega,zed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureSpec {
    Z(u32),
    File(PathBuf),
    Chain(ChainStructure),
}

impl FromStr for StructureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(n) = s.strip_prefix("z:") {
            let n = n
                .parse()
                .map_err(|_| Error::InvalidStructure(format!("bad plant bound in `{s}`")))?;
            Ok(Self::Z(n))
        } else if let Some(path) = s.strip_prefix("file:") {
            Ok(Self::File(path.into()))
        } else {
            Ok(Self::Chain(s.parse()?))
        }
    }
}

impl fmt::Display for StructureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Z(n) => write!(f, "z:{n}"),
            Self::File(p) => write!(f, "file:{}", p.display()),
            Self::Chain(c) => write!(f, "{c}"),
        }
    }
}

/// Chain structures are made finite by keeping indices `0..=r` of `ω`
/// components and `-r..=r` of `ℤ` components.
pub const CHAIN_RADIUS: i64 = 4;

impl StructureSpec {
    pub fn load(&self) -> Result<FiniteAtomStructure> {
        match self {
            Self::Z(n) => Ok(build_z(*n)),
            Self::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidStructure(format!("{}: {e}", path.display())))?;
                let parts: StructureParts = serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidStructure(format!("{}: {e}", path.display())))?;
                FiniteAtomStructure::from_parts(&parts)
            }
            Self::Chain(c) => {
                let windows: Vec<_> = c
                    .components()
                    .iter()
                    .map(|k| match k {
                        ChainKind::Omega => (0, CHAIN_RADIUS),
                        ChainKind::Zed => (-CHAIN_RADIUS, CHAIN_RADIUS),
                    })
                    .collect();
                chain::truncate(c, &windows)
            }
        }
    }

    pub fn describe(&self, s: &FiniteAtomStructure) -> Value {
        json!({
            "spec": self.to_string(),
            "atoms": s.len(),
            "identity_atoms": s.identity_atoms().len(),
        })
    }
}

/// Well-formedness, the relation-algebra axioms and the diversity-product
/// implication.
pub fn verify_structure(spec: &StructureSpec) -> Result<Report> {
    let start = Instant::now();
    let s = spec.load()?;
    let (wf, (ra, dp)) = rayon::join(
        || s.check_well_formed(),
        || rayon::join(|| s.check_ra_axioms(), || diversity_product_formula_check(&s)),
    );
    let checks = vec![
        CheckResult::from_validation("well-formed", &wf),
        CheckResult::from_validation("ra-axioms", &ra).stat("triples", s.triple_count()),
        CheckResult::from_validation("diversity-product", &dp),
    ];
    Ok(finish("verify-z", spec.describe(&s), checks, start))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermConfig {
    pub trials: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for TermConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            max_depth: 5,
            seed: 0,
        }
    }
}

#[derive(Default)]
struct Tally {
    checked: u64,
    first: Option<Value>,
    violations: u64,
}

impl Tally {
    fn record(&mut self, ok: bool, ctx: impl FnOnce() -> Value) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.first.is_none() {
                self.first = Some(ctx());
            }
        }
    }

    fn result(self, name: &str) -> CheckResult {
        let mut out = CheckResult::new(name, self.violations == 0)
            .stat("checked", self.checked)
            .stat("violations", self.violations);
        out.counterexample = self.first;
        out
    }
}

/// Splitting laws over `trials` random terms. Term `t` is generated from
/// seed `seed + t` and paired with term `t + 1`.
pub fn splits_suite(spec: &StructureSpec, cfg: TermConfig) -> Result<Report> {
    let start = Instant::now();
    let s = spec.load()?;
    let alg = ComplexAlgebra::new(&s);
    let terms = (0..=cfg.trials as u64)
        .map(|t| random_term(&s, cfg.max_depth, cfg.seed.wrapping_add(t)))
        .collect::<Result<Vec<_>>>()?;
    let values = terms.iter().map(|t| alg.eval(t)).collect::<Result<Vec<_>>>()?;
    let labels = |e: &Element| e.labels(&s).iter().map(ToString::to_string).collect::<Vec<_>>();
    let splits = |e: &Element| alg.split_set(e);
    let div = alg.complement(&alg.identity());
    let mut tallies: BTreeMap<&str, Tally> = BTreeMap::new();
    let mut max_splits = 0;
    for i in 0..cfg.trials {
        let (t, a, b) = (&terms[i], &values[i], &values[i + 1]);
        let (sa, sb) = (splits(a), splits(b));
        max_splits = max_splits.max(sa.len());
        let union: std::collections::BTreeSet<_> = sa.union(&sb).copied().collect();
        tallies.entry("leaf-bound").or_default().record(sa.len() <= t.leaf_count(), || {
            json!({"term": t.to_string(), "splits": sa.len(), "leaves": t.leaf_count()})
        });
        let join = alg.join(a, b);
        tallies.entry("union-bound").or_default().record(splits(&join).is_subset(&union), || {
            json!({"a": terms[i].to_string(), "b": terms[i + 1].to_string()})
        });
        let comp = alg.compose(a, b);
        tallies.entry("composition-bound").or_default().record(splits(&comp).is_subset(&union), || {
            json!({"a": terms[i].to_string(), "b": terms[i + 1].to_string()})
        });
        tallies
            .entry("complement-invariance")
            .or_default()
            .record(splits(&alg.complement(a)) == sa, || json!({"term": t.to_string()}));
        let conv: std::collections::BTreeSet<_> = sa.iter().map(|&(x, y)| (y, x)).collect();
        tallies
            .entry("sigma-symmetry")
            .or_default()
            .record(splits(&alg.converse(a)) == conv, || json!({"term": t.to_string()}));
        let (da, db) = (alg.meet(a, &div), alg.meet(b, &div));
        let star = alg.check_star(&da, &db)?;
        tallies.entry("star").or_default().record(star, || {
            json!({"a": labels(&da), "b": labels(&db)})
        });
    }
    let checks = [
        "leaf-bound",
        "union-bound",
        "composition-bound",
        "complement-invariance",
        "sigma-symmetry",
        "star",
    ]
    .into_iter()
    .map(|name| {
        let r = tallies.remove(name).unwrap_or_default().result(name);
        if name == "leaf-bound" {
            r.stat("max_splits", max_splits)
        } else {
            r
        }
    })
    .collect();
    let mut structure = spec.describe(&s);
    structure["trials"] = json!(cfg.trials);
    structure["max_depth"] = json!(cfg.max_depth);
    structure["seed"] = json!(cfg.seed);
    Ok(finish("splits-suite", structure, checks, start))
}

/// The splitting sentence with the constructive witnesses, each verified
/// against every splitable pair at its root.
pub fn check_phi_suite(spec: &StructureSpec) -> Result<Report> {
    let start = Instant::now();
    let s = spec.load()?;
    let alg = ComplexAlgebra::new(&s);
    let phi = alg.check_phi()?;
    let verified: usize = phi.roots.iter().map(|r| r.splitable_to.len() - r.unsplit.len()).sum();
    let mut check = CheckResult::new("phi", phi.holds)
        .stat("roots", phi.roots.len())
        .stat("pairs_verified", verified);
    if let Some(bad) = phi.roots.iter().find(|r| !r.unsplit.is_empty()) {
        check = check.counterexample(bad);
    }
    Ok(finish("check-phi", spec.describe(&s), vec![check], start))
}

/// The representation checks on the window of plants `0..=n` and indices
/// below `m`.
pub fn verify_rep(n: u32, m: u64) -> Result<Report> {
    let start = Instant::now();
    let checker = RepChecker::new(Representation::new(), RepWindow::new(n, m)?);
    let jobs: [(&str, fn(&RepChecker) -> RepCheck); 4] = [
        ("partition", RepChecker::check_partition),
        ("identity-converse", RepChecker::check_identity_converse),
        ("r-properties", RepChecker::check_r_properties),
        ("composition-clauses", RepChecker::check_composition_clauses),
    ];
    let checks = jobs
        .par_iter()
        .map(|(name, job)| CheckResult::from_rep(name, &job(&checker)))
        .collect();
    let structure = json!({
        "spec": format!("z:{n}"),
        "atoms": checker.structure().len(),
        "window_plants": n,
        "window_indices": m,
        "search_bound": checker.window.search_bound()?,
    });
    Ok(finish("verify-rep", structure, checks, start))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainConfig {
    pub trials: usize,
    pub seed: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { trials: 500, seed: 0 }
    }
}

/// Frontier ranges for random elements, and the truncation window around
/// them.
fn chain_ranges(s: &ChainStructure) -> (Vec<(i64, i64)>, Vec<(i64, i64)>) {
    s.components()
        .iter()
        .map(|k| match k {
            ChainKind::Omega => ((0, 40), (0, 44)),
            ChainKind::Zed => ((-20, 20), (-24, 24)),
        })
        .unzip()
}

fn in_shrunk_window(s: &ChainStructure, windows: &[(i64, i64)], a: &ChainAtom) -> bool {
    match *a {
        ChainAtom::Elem { component, index } => {
            let (lo, hi) = windows[component];
            let lo = if s.components()[component] == ChainKind::Omega { lo } else { lo + 2 };
            (lo..=hi - 2).contains(&index)
        }
        _ => true,
    }
}

fn oracle_check(s: &ChainStructure, cfg: ChainConfig) -> Result<(CheckResult, CheckResult)> {
    let (ranges, windows) = chain_ranges(s);
    let t = chain::truncate(s, &windows)?;
    let alg = ComplexAlgebra::new(&t);
    let atoms: Vec<ChainAtom> = t
        .atoms()
        .iter()
        .map(|l| l.to_string().parse())
        .collect::<Result<_>>()?;
    let element = |x: &FinCof| {
        Element::from_indices(t.len(), (0..atoms.len()).filter(|&k| x.contains(&atoms[k])))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs: Vec<(FinCof, FinCof)> = (0..cfg.trials)
        .map(|_| {
            let x = chain::random_fincof(s, &ranges, &mut rng);
            (x, chain::random_fincof(s, &ranges, &mut rng))
        })
        .collect();
    let outcomes: Vec<(Tally, Tally)> = pairs
        .par_iter()
        .map(|(x, y)| {
            let exact = chain::compose(s, x, y);
            let brute = alg.compose(&element(x), &element(y));
            let mut oracle = Tally::default();
            for (k, a) in atoms.iter().enumerate() {
                if in_shrunk_window(s, &windows, a) {
                    oracle.record(exact.contains(a) == brute.contains(k), || {
                        json!({"x": x.to_string(), "y": y.to_string(), "atom": a.to_string()})
                    });
                }
            }
            let mut tail = Tally::default();
            for (c, kind) in s.components().iter().enumerate() {
                let sign = if *kind == ChainKind::Zed { -1 } else { 1 };
                for far in [60, 61, 1000] {
                    for index in [far, sign * far] {
                        let a = ChainAtom::elem(c, index);
                        tail.record(exact.contains(&a) == chain::compose_contains(s, x, y, &a), || {
                            json!({"x": x.to_string(), "y": y.to_string(), "atom": a.to_string()})
                        });
                    }
                }
            }
            (oracle, tail)
        })
        .collect();
    let (mut oracle, mut tail) = (Tally::default(), Tally::default());
    for (o, t) in outcomes {
        for (acc, part) in [(&mut oracle, o), (&mut tail, t)] {
            acc.checked += part.checked;
            acc.violations += part.violations;
            if acc.first.is_none() {
                acc.first = part.first;
            }
        }
    }
    Ok((
        oracle.result("oracle-equivalence").stat("pairs", cfg.trials),
        tail.result("frontier-soundness"),
    ))
}

fn succ_check(s: &ChainStructure) -> CheckResult {
    let mut atoms = ChainAtom::SPECIAL.to_vec();
    for (c, k) in s.components().iter().enumerate() {
        let range = match k {
            ChainKind::Omega => 0..=12,
            ChainKind::Zed => -12..=12,
        };
        atoms.extend(range.map(|i| ChainAtom::elem(c, i)));
    }
    let mut tally = Tally::default();
    for n in &atoms {
        for m in &atoms {
            let expected = s.successor(n).as_ref() == Some(m);
            tally.record(chain::succ_holds(s, n, m) == expected, || {
                json!({"n": n.to_string(), "m": m.to_string()})
            });
        }
    }
    tally.result("succ-definability")
}

fn phi_hh_check(s: &ChainStructure) -> CheckResult {
    let report = chain::check_phi_hh(s);
    let mut out = CheckResult::new("phi-hh", report.holds)
        .stat("decided", report.decisions.len())
        .stat("witnessed", report.decisions.iter().filter(|(_, d)| d.holds).count());
    if let Some((n, d)) = report.decisions.iter().find(|(_, d)| !d.holds) {
        out = out.counterexample(json!({"n": n, "trace": d.trace}));
    } else if let Some((n, d)) = report.decisions.last() {
        out = out.stat("last_witness", json!({"n": n, "witness": d.witness}));
    }
    out
}

/// Exact composition against a truncated brute force, successor
/// definability, and the predecessor-closure sentence.
pub fn hh_suite(s: &ChainStructure, cfg: ChainConfig) -> Result<Report> {
    let start = Instant::now();
    let (oracle, (succ, phi)) = rayon::join(
        || oracle_check(s, cfg),
        || rayon::join(|| succ_check(s), || phi_hh_check(s)),
    );
    let (oracle, tail) = oracle?;
    let structure = json!({"spec": s.to_string(), "trials": cfg.trials, "seed": cfg.seed});
    Ok(finish("hh-suite", structure, vec![oracle, tail, succ, phi], start))
}

/// Whether Duplicator survives `rounds` rounds, and otherwise the fewest
/// rounds Spoiler needs.
pub fn ef_suite(left: &StructureSpec, right: &StructureSpec, rounds: usize) -> Result<Report> {
    let start = Instant::now();
    let (a, b) = (left.load()?, right.load()?);
    let r = ef_equivalent(&a, &b, rounds)?;
    let check = CheckResult::new("ef-equivalent", r.equivalent)
        .stat("rounds", rounds)
        .stat("distinguishing_depth", r.distinguishing_depth);
    let structure = json!({"left": left.describe(&a), "right": right.describe(&b)});
    Ok(finish("ef", structure, vec![check], start))
}
