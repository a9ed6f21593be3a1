//! First-order logic over atom structures (signature `P`, `C`, `I`, `=`)
//! and Ehrenfeucht–Fraïssé games between finite structures.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::atoms::{AtomLabel, FiniteAtomStructure};
use crate::error::{Error, Result};
use crate::sexpr::{self, parse_error, SExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Guard {
    Any,
    Identity,
    Diversity,
}

impl Guard {
    fn admits(self, s: &FiniteAtomStructure, a: usize) -> bool {
        match self {
            Guard::Any => true,
            Guard::Identity => s.is_identity(a),
            Guard::Diversity => !s.is_identity(a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    P(String, String, String),
    C(String, String),
    I(String),
    Eq(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    ForAll(String, Guard, Box<Formula>),
    Exists(String, Guard, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Self {
        Self::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Self::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Self::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Self::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(v: &str, g: Guard, f: Formula) -> Self {
        Self::ForAll(v.into(), g, Box::new(f))
    }

    pub fn exists(v: &str, g: Guard, f: Formula) -> Self {
        Self::Exists(v.into(), g, Box::new(f))
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Self::P(..) | Self::C(..) | Self::I(_) | Self::Eq(..) => 0,
            Self::Not(f) => f.quantifier_depth(),
            Self::And(a, b) | Self::Or(a, b) | Self::Implies(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Self::ForAll(_, _, f) | Self::Exists(_, _, f) => 1 + f.quantifier_depth(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut var = |v: &String| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Self::P(a, b, c) => [a, b, c].into_iter().for_each(var),
            Self::C(a, b) | Self::Eq(a, b) => [a, b].into_iter().for_each(var),
            Self::I(a) => var(a),
            Self::Not(f) => f.collect_free(bound, out),
            Self::And(a, b) | Self::Or(a, b) | Self::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Self::ForAll(v, _, f) | Self::Exists(v, _, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    fn from_sexpr(e: SExpr) -> Result<Self> {
        let (items, offset) = match e {
            SExpr::List(items, offset) => (items, offset),
            SExpr::Word(w, offset) => return Err(parse_error(offset, format!("expected a formula, found `{w}`"))),
        };
        let mut items = items.into_iter();
        let head = match items.next() {
            Some(SExpr::Word(w, _)) => w,
            _ => return Err(parse_error(offset, "expected an operator")),
        };
        let rest: Vec<SExpr> = items.collect();
        let var = |e: &SExpr| match e {
            SExpr::Word(w, _) => Ok(w.clone()),
            other => Err(parse_error(other.offset(), "expected a variable")),
        };
        let arity = |n: usize| {
            if rest.len() == n {
                Ok(())
            } else {
                Err(parse_error(offset, format!("`{head}` takes {n} arguments, got {}", rest.len())))
            }
        };
        match head.as_str() {
            "P" => {
                arity(3)?;
                Ok(Self::P(var(&rest[0])?, var(&rest[1])?, var(&rest[2])?))
            }
            "C" => {
                arity(2)?;
                Ok(Self::C(var(&rest[0])?, var(&rest[1])?))
            }
            "I" => {
                arity(1)?;
                Ok(Self::I(var(&rest[0])?))
            }
            "=" => {
                arity(2)?;
                Ok(Self::Eq(var(&rest[0])?, var(&rest[1])?))
            }
            "not" => {
                arity(1)?;
                Ok(Self::not(Self::from_sexpr(rest.into_iter().next().unwrap())?))
            }
            "implies" => {
                arity(2)?;
                let mut it = rest.into_iter();
                let a = Self::from_sexpr(it.next().unwrap())?;
                Ok(Self::implies(a, Self::from_sexpr(it.next().unwrap())?))
            }
            "and" | "or" => {
                if rest.len() < 2 {
                    return Err(parse_error(offset, format!("`{head}` takes at least 2 arguments")));
                }
                let parts = rest.into_iter().map(Self::from_sexpr).collect::<Result<Vec<_>>>()?;
                let join = if head == "and" { Self::and } else { Self::or };
                Ok(parts.into_iter().reduce(join).unwrap())
            }
            "forall" | "exists" => {
                arity(2)?;
                let mut it = rest.into_iter();
                let binder = it.next().unwrap();
                let (v, guard) = match binder {
                    SExpr::Word(w, _) => (w, Guard::Any),
                    SExpr::List(parts, o) => match parts.as_slice() {
                        [SExpr::Word(v, _), SExpr::Word(g, go)] => {
                            let guard = match g.as_str() {
                                "any" => Guard::Any,
                                "identity" => Guard::Identity,
                                "diversity" => Guard::Diversity,
                                _ => return Err(parse_error(*go, format!("unknown guard `{g}`"))),
                            };
                            (v.clone(), guard)
                        }
                        _ => return Err(parse_error(o, "expected `(VAR GUARD)`")),
                    },
                };
                let body = Self::from_sexpr(it.next().unwrap())?;
                Ok(if head == "forall" {
                    Self::ForAll(v, guard, Box::new(body))
                } else {
                    Self::Exists(v, guard, Box::new(body))
                })
            }
            other => Err(parse_error(offset, format!("unknown operator `{other}`"))),
        }
    }
}

impl FromStr for Formula {
    type Err = Error;

    /// `(P a b c)`, `(C a b)`, `(I a)`, `(= a b)`, `(not f)`,
    /// `(and f g …)`, `(or f g …)`, `(implies f g)`, `(forall x f)`,
    /// `(exists (x identity) f)`; guards are `any`, `identity`, `diversity`.
    fn from_str(s: &str) -> Result<Self> {
        Self::from_sexpr(sexpr::parse(s)?)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let binder = |v: &str, g: &Guard| match g {
            Guard::Any => v.to_string(),
            Guard::Identity => format!("({v} identity)"),
            Guard::Diversity => format!("({v} diversity)"),
        };
        match self {
            Self::P(a, b, c) => write!(f, "(P {a} {b} {c})"),
            Self::C(a, b) => write!(f, "(C {a} {b})"),
            Self::I(a) => write!(f, "(I {a})"),
            Self::Eq(a, b) => write!(f, "(= {a} {b})"),
            Self::Not(a) => write!(f, "(not {a})"),
            Self::And(a, b) => write!(f, "(and {a} {b})"),
            Self::Or(a, b) => write!(f, "(or {a} {b})"),
            Self::Implies(a, b) => write!(f, "(implies {a} {b})"),
            Self::ForAll(v, g, a) => write!(f, "(forall {} {a})", binder(v, g)),
            Self::Exists(v, g, a) => write!(f, "(exists {} {a})", binder(v, g)),
        }
    }
}

/// Truth of `f` in `s` with free variables assigned by `env`.
pub fn evaluate(s: &FiniteAtomStructure, f: &Formula, env: &BTreeMap<String, AtomLabel>) -> Result<bool> {
    let mut stack = env
        .iter()
        .map(|(v, a)| Ok((v.clone(), s.index_of(a)?)))
        .collect::<Result<Vec<_>>>()?;
    eval_in(s, f, &mut stack)
}

/// Truth of a sentence.
pub fn holds(s: &FiniteAtomStructure, f: &Formula) -> Result<bool> {
    evaluate(s, f, &BTreeMap::new())
}

fn lookup(stack: &[(String, usize)], v: &str) -> Result<usize> {
    stack
        .iter()
        .rev()
        .find(|(name, _)| name == v)
        .map(|&(_, a)| a)
        .ok_or_else(|| Error::UnboundVariable(v.to_string()))
}

fn eval_in(s: &FiniteAtomStructure, f: &Formula, stack: &mut Vec<(String, usize)>) -> Result<bool> {
    Ok(match f {
        Formula::P(a, b, c) => s.p(lookup(stack, a)?, lookup(stack, b)?, lookup(stack, c)?),
        Formula::C(a, b) => s.converse(lookup(stack, a)?) == lookup(stack, b)?,
        Formula::I(a) => s.is_identity(lookup(stack, a)?),
        Formula::Eq(a, b) => lookup(stack, a)? == lookup(stack, b)?,
        Formula::Not(g) => !eval_in(s, g, stack)?,
        Formula::And(a, b) => eval_in(s, a, stack)? && eval_in(s, b, stack)?,
        Formula::Or(a, b) => eval_in(s, a, stack)? || eval_in(s, b, stack)?,
        Formula::Implies(a, b) => !eval_in(s, a, stack)? || eval_in(s, b, stack)?,
        Formula::ForAll(v, g, body) | Formula::Exists(v, g, body) => {
            let universal = matches!(f, Formula::ForAll(..));
            for a in (0..s.len()).filter(|&a| g.admits(s, a)) {
                stack.push((v.clone(), a));
                let value = eval_in(s, body, stack);
                stack.pop();
                if value? != universal {
                    return Ok(!universal);
                }
            }
            universal
        }
    })
}

/// A random sentence of quantifier depth at most `depth` over variables
/// `v0, v1, …`.
pub fn random_sentence<R: Rng>(depth: usize, rng: &mut R) -> Formula {
    random_formula(depth, &mut Vec::new(), rng)
}

fn random_formula<R: Rng>(depth: usize, scope: &mut Vec<String>, rng: &mut R) -> Formula {
    let guard = |rng: &mut R| match rng.gen_range(0..3) {
        0 => Guard::Any,
        1 => Guard::Identity,
        _ => Guard::Diversity,
    };
    if depth > 0 && (scope.is_empty() || rng.gen_bool(0.6)) {
        let v = format!("v{}", scope.len());
        let g = guard(rng);
        scope.push(v.clone());
        let body = random_formula(depth - 1, scope, rng);
        scope.pop();
        return if rng.gen_bool(0.5) {
            Formula::ForAll(v, g, Box::new(body))
        } else {
            Formula::Exists(v, g, Box::new(body))
        };
    }
    if scope.is_empty() {
        // No variable to mention: a trivially true sentence.
        return Formula::forall("v0", Guard::Any, Formula::Eq("v0".into(), "v0".into()));
    }
    let pick = |rng: &mut R| scope[rng.gen_range(0..scope.len())].clone();
    match rng.gen_range(0..8) {
        0 | 1 => Formula::P(pick(rng), pick(rng), pick(rng)),
        2 => Formula::C(pick(rng), pick(rng)),
        3 => Formula::I(pick(rng)),
        4 => Formula::Eq(pick(rng), pick(rng)),
        5 => Formula::not(random_formula(depth, scope, rng)),
        6 => Formula::and(random_formula(depth, scope, rng), random_formula(depth, scope, rng)),
        _ => Formula::or(random_formula(depth, scope, rng), random_formula(depth, scope, rng)),
    }
}

/// Pebbled pairs, one atom per structure, and the rounds left to play.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct EfPosition {
    pub pebbles: Vec<(usize, usize)>,
    pub rounds: usize,
}

impl EfPosition {
    pub fn start(rounds: usize) -> Self {
        Self {
            pebbles: Vec::new(),
            rounds,
        }
    }
}

/// Whether the pebbles induce a partial isomorphism for `P`, `C`, `I`
/// and equality.
pub fn partial_isomorphism(a: &FiniteAtomStructure, b: &FiniteAtomStructure, pebbles: &[(usize, usize)]) -> bool {
    let (xs, ys): (Vec<usize>, Vec<usize>) = pebbles.iter().copied().unzip();
    atomic_type(a, &xs) == atomic_type(b, &ys)
}

/// Plain game-tree search, exponential in the number of rounds.
pub fn duplicator_wins_naive(a: &FiniteAtomStructure, b: &FiniteAtomStructure, pos: &EfPosition) -> bool {
    if !partial_isomorphism(a, b, &pos.pebbles) {
        return false;
    }
    if pos.rounds == 0 {
        return true;
    }
    let reply = |pebbles: Vec<(usize, usize)>| {
        duplicator_wins_naive(a, b, &EfPosition { pebbles, rounds: pos.rounds - 1 })
    };
    let extend = |x: usize, y: usize| {
        let mut p = pos.pebbles.clone();
        p.push((x, y));
        p
    };
    (0..a.len()).all(|x| (0..b.len()).any(|y| reply(extend(x, y))))
        && (0..b.len()).all(|y| (0..a.len()).any(|x| reply(extend(x, y))))
}

/// Largest number of rounds `ef_equivalent` accepts; the type table for
/// `k` rounds enumerates all `k`-tuples of atoms.
pub const MAX_EF_ROUNDS: usize = 6;

type AtomicKey = [u128; 3];

fn set_bit(key: &mut AtomicKey, bit: usize) {
    key[bit / 128] |= 1u128 << (bit % 128);
}

fn atomic_type(s: &FiniteAtomStructure, t: &[usize]) -> Vec<bool> {
    let mut out = Vec::new();
    for &x in t {
        out.push(s.is_identity(x));
        for &y in t {
            out.push(x == y);
            out.push(s.converse(x) == y);
            for &z in t {
                out.push(s.p(x, y, z));
            }
        }
    }
    out
}

/// Shared type numbering for the two structures of a game.
struct TypeTable {
    k: usize,
    leaves: HashMap<AtomicKey, u32>,
    inner: HashMap<(usize, Vec<u32>), u32>,
}

impl TypeTable {
    fn new(k: usize) -> Self {
        Self {
            k,
            leaves: HashMap::new(),
            inner: HashMap::new(),
        }
    }

    fn intern_leaf(&mut self, key: AtomicKey) -> u32 {
        let next = self.leaves.len() as u32;
        *self.leaves.entry(key).or_insert(next)
    }

    fn intern_inner(&mut self, level: usize, children: Vec<u32>) -> u32 {
        let next = self.inner.len() as u32;
        *self.inner.entry((level, children)).or_insert(next)
    }

    /// Bits recording the atomic facts that involve the last position of
    /// `t`.
    fn extend_key(&self, s: &FiniteAtomStructure, t: &[usize], mut key: AtomicKey) -> AtomicKey {
        let k = self.k;
        let j = t.len() - 1;
        let p_base = 2 * k * k + k;
        let new = t[j];
        if s.is_identity(new) {
            set_bit(&mut key, j);
        }
        for (x, &a) in t.iter().enumerate() {
            if a == new {
                set_bit(&mut key, k + x * k + j);
                set_bit(&mut key, k + j * k + x);
            }
            if s.converse(a) == new {
                set_bit(&mut key, k + k * k + x * k + j);
            }
            if s.converse(new) == a {
                set_bit(&mut key, k + k * k + j * k + x);
            }
            for (y, &b) in t.iter().enumerate() {
                for (p, q, r, (u, v, w)) in [
                    (x, y, j, (a, b, new)),
                    (x, j, y, (a, new, b)),
                    (j, x, y, (new, a, b)),
                ] {
                    if s.p(u, v, w) {
                        set_bit(&mut key, p_base + (p * k + q) * k + r);
                    }
                }
            }
        }
        key
    }

    /// The rank `k - |t|` type of `t`: the set of types of its one-point
    /// extensions, down to atomic types of `k`-tuples.
    fn rank_type(&mut self, s: &FiniteAtomStructure, t: &mut Vec<usize>, key: AtomicKey) -> u32 {
        if t.len() == self.k {
            return self.intern_leaf(key);
        }
        let mut children = Vec::with_capacity(s.len());
        for b in 0..s.len() {
            t.push(b);
            let next = self.extend_key(s, t, key);
            children.push(self.rank_type(s, t, next));
            t.pop();
        }
        children.sort_unstable();
        children.dedup();
        self.intern_inner(t.len(), children)
    }
}

/// Whether Duplicator wins the `k`-round game on `a` and `b` from the
/// empty position.
pub fn duplicator_wins(a: &FiniteAtomStructure, b: &FiniteAtomStructure, k: usize) -> Result<bool> {
    if k > MAX_EF_ROUNDS {
        return Err(Error::Precondition(format!(
            "at most {MAX_EF_ROUNDS} rounds are supported, got {k}"
        )));
    }
    let mut table = TypeTable::new(k);
    let ta = table.rank_type(a, &mut Vec::new(), [0; 3]);
    let tb = table.rank_type(b, &mut Vec::new(), [0; 3]);
    Ok(ta == tb)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EfResult {
    pub equivalent: bool,
    pub rounds: usize,
    /// Fewest rounds in which Spoiler wins, when at most `rounds`.
    pub distinguishing_depth: Option<usize>,
}

/// Plays the games with `1..=rounds` rounds and reports the first one
/// Spoiler wins; equivalently, the least quantifier depth of a sentence
/// separating the two structures.
pub fn ef_equivalent(a: &FiniteAtomStructure, b: &FiniteAtomStructure, rounds: usize) -> Result<EfResult> {
    for k in 1..=rounds {
        if !duplicator_wins(a, b, k)? {
            return Ok(EfResult {
                equivalent: false,
                rounds,
                distinguishing_depth: Some(k),
            });
        }
    }
    Ok(EfResult {
        equivalent: true,
        rounds,
        distinguishing_depth: None,
    })
}

/// A copy of `s` with every atom renamed by `rename`, which must be
/// injective.
pub fn relabel(s: &FiniteAtomStructure, rename: impl Fn(&AtomLabel) -> AtomLabel) -> Result<FiniteAtomStructure> {
    let map: Vec<AtomLabel> = s.atoms().iter().map(&rename).collect();
    FiniteAtomStructure::from_relations(
        map.clone(),
        s.identity_atoms().iter().map(|&a| map[a].clone()),
        (0..s.len()).map(|a| (map[a].clone(), map[s.converse(a)].clone())),
        s.triples().map(|(a, b, c)| (map[a].clone(), map[b].clone(), map[c].clone())),
    )
}
