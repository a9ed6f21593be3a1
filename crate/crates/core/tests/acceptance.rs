//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use atomwork::chain::{self, ChainAtom, ChainStructure, FinCof};
use atomwork::complex::diversity_product_formula_check;
use atomwork::logic::{ef_equivalent, relabel};
use atomwork::suite::{self, ChainConfig, Report, StructureSpec, TermConfig};
use atomwork::{build_z, AtomLabel, ComplexAlgebra, Result};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { ok, detail: detail.into() })
}

/// The `Z` labels for plants `0..=n`, listed straight from the index sets.
fn enumerate_z(n: u32) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let blocks: Vec<(u32, u32)> = (0..=n).flat_map(|p| (0..=p).map(move |i| (p, i))).collect();
    for &(p, i) in &blocks {
        out.insert(format!("id({p},{i})"));
        if i >= 1 {
            out.insert(format!("r({p},{i})"));
            out.insert(format!("rc({p},{i})"));
        }
        for &(q, j) in &blocks {
            out.insert(format!("w({p},{i},{q},{j})"));
        }
    }
    out
}

fn inventory() -> Result<Outcome> {
    let start = Instant::now();
    let mut ok = true;
    for (n, size) in [(1, 14), (2, 48)] {
        let z = build_z(n);
        let labels: BTreeSet<String> = z.atoms().iter().map(ToString::to_string).collect();
        ok &= z.len() == size && labels == enumerate_z(n);
    }
    let pairs = build_z(2).splitable_pairs().len();
    let elapsed = start.elapsed();
    ok &= pairs == 6 && elapsed < Duration::from_secs(1);
    outcome(ok, format!("Z1 14 atoms, Z2 48 atoms, {pairs} splitable pairs in Z2, {elapsed:.0?}"))
}

fn ra_axioms() -> Result<Outcome> {
    let start = Instant::now();
    let mut ok = true;
    for n in 0..=3 {
        ok &= build_z(n).check_ra_axioms().passed;
    }
    outcome(ok, format!("Z0..Z3, {:.1?}", start.elapsed()))
}

fn diversity_product() -> Result<Outcome> {
    let z1 = build_z(1);
    // Unpruned sweep over every assignment on Z1.
    let len = z1.len();
    let mut assignments = 0u64;
    let mut violations = 0u64;
    for a in 0..len {
        for b in 0..len {
            for c in 0..len {
                for d in 0..len {
                    for x in 0..len {
                        for y in 0..len {
                            assignments += 1;
                            let premise = !z1.is_identity(a)
                                && !z1.is_identity(b)
                                && z1.is_identity(x)
                                && z1.is_identity(y)
                                && x != y
                                && z1.p(a, b, c)
                                && z1.p(x, c, c)
                                && z1.p(x, d, d)
                                && z1.p(c, y, c)
                                && z1.p(d, y, d);
                            if premise && !z1.p(a, b, d) {
                                violations += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    let pruned1 = diversity_product_formula_check(&z1);
    let pruned2 = diversity_product_formula_check(&build_z(2));
    let counterexamples = violations + pruned1.total_failures as u64 + pruned2.total_failures as u64;
    outcome(
        counterexamples == 0,
        format!("{assignments} assignments on Z1, pruned search on Z1 and Z2, {counterexamples} counterexamples"),
    )
}

fn splitting_suite() -> Result<Outcome> {
    let mut ok = true;
    let mut violations = 0;
    for n in 1..=3 {
        let r = suite::splits_suite(&StructureSpec::Z(n), TermConfig { trials: 1000, max_depth: 5, seed: 0 })?;
        ok &= r.passed();
        violations += r
            .checks
            .iter()
            .map(|c| c.stats["violations"].as_u64().unwrap())
            .sum::<u64>();
    }
    outcome(ok, format!("1000 terms of depth <= 5 on each of Z1, Z2, Z3, {violations} violations"))
}

fn phi() -> Result<Outcome> {
    let mut ok = true;
    let mut verified = 0;
    for n in 0..=3 {
        let z = build_z(n);
        let alg = ComplexAlgebra::new(&z);
        let report = alg.check_phi()?;
        ok &= report.holds;
        for root in &report.roots {
            let witness = alg.element(&root.witness)?;
            for y in &root.splitable_to {
                ok &= alg.sigma(&witness, &root.x, y);
                verified += 1;
            }
        }
    }
    outcome(ok, format!("Z0..Z3, {verified} (root, pair) witnesses re-checked by sigma"))
}

fn representation() -> Result<Outcome> {
    let start = Instant::now();
    let r = suite::verify_rep(3, 6)?;
    let witnesses: u64 = r
        .checks
        .iter()
        .find(|c| c.name == "r-properties")
        .map(|c| ["r3", "r4", "r5"].iter().map(|k| c.stats[*k].as_u64().unwrap()).sum())
        .unwrap_or(0);
    outcome(
        r.passed() && witnesses > 0,
        format!("window N=3 M=6, {witnesses} witness formulas re-verified, {:.1?}", start.elapsed()),
    )
}

fn chain_separation() -> Result<Outcome> {
    let h = ChainStructure::omega();
    let mut ok = true;
    for n in 0..=20 {
        let d = chain::decide_pred_split(&h, ChainAtom::X, &ChainAtom::elem(0, n))?;
        ok &= d.holds && d.witness == Some(FinCof::finite((0..=n).map(|i| ChainAtom::elem(0, i))));
    }
    ok &= chain::check_phi_hh(&h).holds;
    let h2 = chain::check_phi_hh(&ChainStructure::omega_zed());
    let trace = h2.decisions.iter().find(|(_, d)| !d.holds).map(|(_, d)| d.trace.len()).unwrap_or(0);
    ok &= !h2.holds && trace > 0;
    outcome(ok, format!("omega holds with {{0..n}} for n <= 20, omega+zed fails after {trace} templates"))
}

fn chain_oracle() -> Result<Outcome> {
    let mut ok = true;
    let mut checked = 0;
    let mut disagreements = 0;
    for s in [ChainStructure::omega(), ChainStructure::omega_zed()] {
        let r = suite::hh_suite(&s, ChainConfig { trials: 500, seed: 0 })?;
        for c in r.checks.iter().filter(|c| c.name == "oracle-equivalence") {
            ok &= c.passed();
            checked += c.stats["checked"].as_u64().unwrap();
            disagreements += c.stats["violations"].as_u64().unwrap();
        }
    }
    outcome(ok, format!("500 pairs per structure, {checked} atom comparisons, {disagreements} disagreements"))
}

fn ef_games() -> Result<Outcome> {
    let (z1, z2) = (build_z(1), build_z(2));
    let same = ef_equivalent(&z1, &z1, 4)?;
    let first = ef_equivalent(&z1, &z2, 4)?;
    let second = ef_equivalent(&z1, &z2, 4)?;
    let renamed = relabel(&z2, |a: &AtomLabel| AtomLabel::opaque(format!("v{a}").replace(['(', ')', ','], "_")))?;
    let iso = ef_equivalent(&z2, &renamed, 4)?;
    let k = first.distinguishing_depth;
    let ok = same.equivalent
        && !first.equivalent
        && k.is_some_and(|k| k <= 4)
        && first == second
        && iso.equivalent;
    let depth = k.map_or("none".to_string(), |k| k.to_string());
    outcome(ok, format!("Z1 vs Z2 first separated at depth {depth}, relabeled Z2 equivalent at depth 4"))
}

fn strip(r: &Report) -> String {
    Report { elapsed_ms: 0, ..r.clone() }.to_json()
}

fn determinism() -> Result<Outcome> {
    let runs: Vec<Box<dyn Fn() -> Result<Report>>> = vec![
        Box::new(|| suite::verify_structure(&StructureSpec::Z(2))),
        Box::new(|| suite::splits_suite(&StructureSpec::Z(2), TermConfig { trials: 200, max_depth: 5, seed: 5 })),
        Box::new(|| suite::check_phi_suite(&StructureSpec::Z(2))),
        Box::new(|| suite::verify_rep(2, 4)),
        Box::new(|| suite::hh_suite(&ChainStructure::omega_zed(), ChainConfig { trials: 50, seed: 5 })),
        Box::new(|| suite::ef_suite(&StructureSpec::Z(0), &StructureSpec::Z(1), 3)),
    ];
    let mut ok = true;
    for run in &runs {
        ok &= strip(&run()?) == strip(&run()?);
    }
    outcome(ok, format!("{} suites run twice, reports identical apart from elapsed_ms", runs.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("structure inventory", inventory),
        ("relation-algebra axioms", ra_axioms),
        ("diversity-product implication", diversity_product),
        ("splitting lemma suite", splitting_suite),
        ("phi on truncations", phi),
        ("representation window", representation),
        ("chain separation", chain_separation),
        ("chain oracle equivalence", chain_oracle),
        ("EF games", ef_games),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match check() {
            Ok(o) => (o.ok, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {:>2} {} {name}: {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
