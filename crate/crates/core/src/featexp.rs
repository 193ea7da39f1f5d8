//! Feature expressions, configurations and the truth-table decision procedures.
//!
//! Every decision (`sat`, `entails`, equivalence) enumerates all assignments
//! over the declared feature universe, so the universe is capped at
//! [`MAX_FEATURES`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Not;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest feature universe the enumerating decision procedures accept.
pub const MAX_FEATURES: usize = 24;

/// Propositional formula over feature names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatExp {
    True,
    Feat(String),
    Not(Box<FeatExp>),
    And(Box<FeatExp>, Box<FeatExp>),
    Or(Box<FeatExp>, Box<FeatExp>),
}

impl std::ops::Not for FeatExp {
    type Output = FeatExp;

    fn not(self) -> FeatExp {
        FeatExp::Not(Box::new(self))
    }
}

impl FeatExp {
    pub fn feat(name: impl Into<String>) -> Self {
        FeatExp::Feat(name.into())
    }

    /// `!true`, the only way to spell false in the grammar.
    pub fn falsum() -> Self {
        FeatExp::Not(Box::new(FeatExp::True))
    }

    pub fn and(self, rhs: FeatExp) -> Self {
        FeatExp::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: FeatExp) -> Self {
        FeatExp::Or(Box::new(self), Box::new(rhs))
    }

    /// Left-nested conjunction; `True` for an empty iterator.
    pub fn conjunction(parts: impl IntoIterator<Item = FeatExp>) -> Self {
        parts
            .into_iter()
            .reduce(|acc, p| acc.and(p))
            .unwrap_or(FeatExp::True)
    }

    /// Left-nested disjunction; `!true` for an empty iterator.
    pub fn disjunction(parts: impl IntoIterator<Item = FeatExp>) -> Self {
        parts
            .into_iter()
            .reduce(|acc, p| acc.or(p))
            .unwrap_or_else(FeatExp::falsum)
    }

    pub fn is_true(&self) -> bool {
        matches!(self, FeatExp::True)
    }

    /// Feature names mentioned by the formula, sorted and deduplicated.
    pub fn features(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_features(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_features<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            FeatExp::True => {}
            FeatExp::Feat(name) => out.push(name),
            FeatExp::Not(e) => e.collect_features(out),
            FeatExp::And(l, r) | FeatExp::Or(l, r) => {
                l.collect_features(out);
                r.collect_features(out);
            }
        }
    }

    /// Evaluates under `k`. Fails if the formula mentions a feature outside
    /// `k`'s domain.
    pub fn eval(&self, k: &Configuration) -> Result<bool> {
        Ok(match self {
            FeatExp::True => true,
            FeatExp::Feat(name) => k
                .get(name)
                .ok_or_else(|| Error::malformed(format!("feature `{name}` is not assigned")))?,
            FeatExp::Not(e) => !e.eval(k)?,
            FeatExp::And(l, r) => {
                let (a, b) = (l.eval(k)?, r.eval(k)?);
                a && b
            }
            FeatExp::Or(l, r) => {
                let (a, b) = (l.eval(k)?, r.eval(k)?);
                a || b
            }
        })
    }

    /// Equivalence-preserving constant folding. Never consults a universe.
    pub fn simplify(&self) -> FeatExp {
        match self {
            FeatExp::True | FeatExp::Feat(_) => self.clone(),
            FeatExp::Not(e) => match e.simplify() {
                FeatExp::Not(inner) => *inner,
                other => other.not(),
            },
            FeatExp::And(l, r) => {
                let (l, r) = (l.simplify(), r.simplify());
                if l.is_true() {
                    r
                } else if r.is_true() {
                    l
                } else if is_falsum(&l) || is_falsum(&r) {
                    FeatExp::falsum()
                } else if l == r {
                    l
                } else {
                    l.and(r)
                }
            }
            FeatExp::Or(l, r) => {
                let (l, r) = (l.simplify(), r.simplify());
                if l.is_true() || r.is_true() {
                    FeatExp::True
                } else if is_falsum(&l) {
                    r
                } else if is_falsum(&r) || l == r {
                    l
                } else {
                    l.or(r)
                }
            }
        }
    }

    /// Constant folding plus collapse of tautologies to `true` and
    /// contradictions to `!true` over `universe`.
    pub fn simplify_in(&self, universe: &[String]) -> Result<FeatExp> {
        if is_tautology(self, universe)? {
            return Ok(FeatExp::True);
        }
        if !sat(self, universe)? {
            return Ok(FeatExp::falsum());
        }
        Ok(self.simplify())
    }
}

fn is_falsum(e: &FeatExp) -> bool {
    matches!(e, FeatExp::Not(inner) if inner.is_true())
}

impl fmt::Display for FeatExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn prec(e: &FeatExp) -> u8 {
            match e {
                FeatExp::Or(..) => 1,
                FeatExp::And(..) => 2,
                _ => 3,
            }
        }
        fn go(e: &FeatExp, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match e {
                FeatExp::True => f.write_str("true"),
                FeatExp::Feat(name) => f.write_str(name),
                FeatExp::Not(inner) => {
                    f.write_str("!")?;
                    wrap(inner, prec(inner) < 3, f)
                }
                FeatExp::And(l, r) => {
                    wrap(l, prec(l) < 2, f)?;
                    f.write_str(" && ")?;
                    wrap(r, prec(r) <= 2, f)
                }
                FeatExp::Or(l, r) => {
                    wrap(l, false, f)?;
                    f.write_str(" || ")?;
                    wrap(r, prec(r) <= 1, f)
                }
            }
        }
        fn wrap(e: &FeatExp, parens: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if parens {
                f.write_str("(")?;
                go(e, f)?;
                f.write_str(")")
            } else {
                go(e, f)
            }
        }
        go(self, f)
    }
}

/// Formula with feature names resolved to universe indices; evaluates
/// against a bit mask where bit `i` is the value of feature `i`.
enum Compiled {
    True,
    Var(usize),
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    fn new(e: &FeatExp, universe: &[String]) -> Result<Compiled> {
        Ok(match e {
            FeatExp::True => Compiled::True,
            FeatExp::Feat(name) => Compiled::Var(
                universe
                    .iter()
                    .position(|f| f == name)
                    .ok_or_else(|| Error::malformed(format!("undeclared feature `{name}`")))?,
            ),
            FeatExp::Not(inner) => Compiled::Not(Box::new(Compiled::new(inner, universe)?)),
            FeatExp::And(l, r) => Compiled::And(
                Box::new(Compiled::new(l, universe)?),
                Box::new(Compiled::new(r, universe)?),
            ),
            FeatExp::Or(l, r) => Compiled::Or(
                Box::new(Compiled::new(l, universe)?),
                Box::new(Compiled::new(r, universe)?),
            ),
        })
    }

    fn eval(&self, mask: u32) -> bool {
        match self {
            Compiled::True => true,
            Compiled::Var(i) => mask & (1 << i) != 0,
            Compiled::Not(e) => !e.eval(mask),
            Compiled::And(l, r) => l.eval(mask) && r.eval(mask),
            Compiled::Or(l, r) => l.eval(mask) || r.eval(mask),
        }
    }
}

fn check_capacity(universe: &[String]) -> Result<()> {
    if universe.len() > MAX_FEATURES {
        return Err(Error::Capacity(format!(
            "{} features declared, truth-table procedures support at most {MAX_FEATURES}",
            universe.len()
        )));
    }
    Ok(())
}

fn masks(universe: &[String]) -> std::ops::Range<u32> {
    0..(1u32 << universe.len())
}

/// True iff some assignment over `universe` satisfies `phi`.
pub fn sat(phi: &FeatExp, universe: &[String]) -> Result<bool> {
    check_capacity(universe)?;
    let c = Compiled::new(phi, universe)?;
    Ok(masks(universe).any(|m| c.eval(m)))
}

/// True iff every model of `psi` is a model of `phi`.
pub fn entails(psi: &FeatExp, phi: &FeatExp, universe: &[String]) -> Result<bool> {
    Ok(!sat(&psi.clone().and(phi.clone().not()), universe)?)
}

pub fn is_tautology(phi: &FeatExp, universe: &[String]) -> Result<bool> {
    Ok(!sat(&phi.clone().not(), universe)?)
}

pub fn equivalent(a: &FeatExp, b: &FeatExp, universe: &[String]) -> Result<bool> {
    check_capacity(universe)?;
    let (ca, cb) = (Compiled::new(a, universe)?, Compiled::new(b, universe)?);
    Ok(masks(universe).all(|m| ca.eval(m) == cb.eval(m)))
}

/// A total truth assignment over a feature universe, kept in universe order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Configuration {
    assignment: Vec<(String, bool)>,
}

impl Configuration {
    pub fn new(assignment: Vec<(String, bool)>) -> Self {
        Configuration { assignment }
    }

    /// Builds the configuration whose feature `i` is bit `i` of `mask`.
    pub fn from_mask(universe: &[String], mask: u32) -> Self {
        Configuration {
            assignment: universe
                .iter()
                .enumerate()
                .map(|(i, f)| (f.clone(), mask & (1 << i) != 0))
                .collect(),
        }
    }

    pub fn mask(&self) -> u32 {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, (_, v))| *v)
            .fold(0, |m, (i, _)| m | (1 << i))
    }

    pub fn get(&self, feature: &str) -> Option<bool> {
        self.assignment
            .iter()
            .find(|(f, _)| f == feature)
            .map(|&(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.assignment.iter().map(|(f, v)| (f.as_str(), *v))
    }

    pub fn universe(&self) -> Vec<String> {
        self.assignment.iter().map(|(f, _)| f.clone()).collect()
    }

    /// Parses `A,!B`: one literal per feature of `universe`, in any order.
    pub fn parse_literals(text: &str, universe: &[String]) -> Result<Self> {
        let mut seen: BTreeMap<&str, bool> = BTreeMap::new();
        for lit in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = match lit.strip_prefix('!') {
                Some(rest) => (rest.trim(), false),
                None => (lit, true),
            };
            if !universe.iter().any(|f| f == name) {
                return Err(Error::malformed(format!("unknown feature `{name}` in configuration")));
            }
            if seen.insert(name, value).is_some() {
                return Err(Error::malformed(format!("feature `{name}` assigned twice")));
            }
        }
        let missing: Vec<&str> = universe
            .iter()
            .map(String::as_str)
            .filter(|f| !seen.contains_key(f))
            .collect();
        if !missing.is_empty() {
            return Err(Error::malformed(format!(
                "configuration must assign every feature; missing {}",
                missing.join(", ")
            )));
        }
        Ok(Configuration {
            assignment: universe.iter().map(|f| (f.clone(), seen[f.as_str()])).collect(),
        })
    }

    /// Listing order: the all-true assignment first, earlier features vary slowest.
    fn listing_key(&self) -> Vec<bool> {
        self.assignment.iter().map(|(_, v)| !v).collect()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", config_to_fexp(self))
    }
}

/// The conjunction of literals that exactly one assignment satisfies.
pub fn config_to_fexp(k: &Configuration) -> FeatExp {
    FeatExp::conjunction(k.iter().map(|(name, v)| {
        let lit = FeatExp::feat(name);
        if v {
            lit
        } else {
            lit.not()
        }
    }))
}

/// Feature universe together with the nonempty set of valid configurations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigSpace {
    universe: Vec<String>,
    configs: Vec<Configuration>,
}

impl ConfigSpace {
    pub fn new(universe: Vec<String>, mut configs: Vec<Configuration>) -> Result<Self> {
        check_capacity(&universe)?;
        if configs.is_empty() {
            return Err(Error::malformed("the set of valid configurations is empty"));
        }
        for k in &configs {
            if k.universe() != universe {
                return Err(Error::malformed(format!(
                    "configuration `{k}` does not assign exactly the declared features"
                )));
            }
        }
        configs.sort_by_key(Configuration::listing_key);
        configs.dedup();
        Ok(ConfigSpace { universe, configs })
    }

    /// Every assignment over `universe`.
    pub fn all(universe: Vec<String>) -> Result<Self> {
        valid_configs(&universe, &FeatExp::True)
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn contains(&self, k: &Configuration) -> bool {
        self.configs.contains(k)
    }

    pub fn is_complete(&self) -> bool {
        self.configs.len() == 1usize << self.universe.len()
    }
}

/// The feature-model formula: the disjunction of every valid configuration.
pub fn kappa(space: &ConfigSpace) -> Result<FeatExp> {
    if space.configs.is_empty() {
        return Err(Error::malformed("the set of valid configurations is empty"));
    }
    Ok(FeatExp::disjunction(space.configs.iter().map(config_to_fexp)))
}

/// All assignments over `universe` satisfying `kappa`.
pub fn valid_configs(universe: &[String], kappa: &FeatExp) -> Result<ConfigSpace> {
    check_capacity(universe)?;
    let c = Compiled::new(kappa, universe)?;
    let configs = masks(universe)
        .filter(|&m| c.eval(m))
        .map(|m| Configuration::from_mask(universe, m))
        .collect::<Vec<_>>();
    if configs.is_empty() {
        return Err(Error::malformed(format!(
            "feature model `{kappa}` admits no configuration"
        )));
    }
    ConfigSpace::new(universe.to_vec(), configs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn a() -> FeatExp {
        FeatExp::feat("A")
    }

    fn b() -> FeatExp {
        FeatExp::feat("B")
    }

    fn k(pairs: &[(&str, bool)]) -> Configuration {
        Configuration::new(pairs.iter().map(|(f, v)| (f.to_string(), *v)).collect())
    }

    #[test]
    fn eval_examples() {
        let kab = k(&[("A", true), ("B", false)]);
        assert!(FeatExp::True.eval(&kab).unwrap());
        assert!(a().and(b().not()).eval(&kab).unwrap());
        assert!(!a().and(b()).eval(&k(&[("A", false), ("B", true)])).unwrap());
        assert!(FeatExp::feat("C").eval(&kab).is_err());
    }

    #[test]
    fn sat_examples() {
        assert!(!sat(&a().and(a().not()), &u(&["A"])).unwrap());
        assert!(sat(&a().or(b()), &u(&["A", "B"])).unwrap());
        // the only model is A=false, B=true
        let phi = a().not().and(b()).and(a().or(b()));
        assert!(sat(&phi, &u(&["A", "B"])).unwrap());
    }

    #[test]
    fn entails_examples() {
        let ab = u(&["A", "B"]);
        assert!(entails(&a().and(b()), &a(), &ab).unwrap());
        assert!(!entails(&a(), &a().and(b()), &ab).unwrap());
        assert!(entails(&b(), &a().or(a().not()), &ab).unwrap());
    }

    #[test]
    fn capacity_cap() {
        let big: Vec<String> = (0..25).map(|i| format!("F{i}")).collect();
        assert!(matches!(sat(&FeatExp::True, &big), Err(Error::Capacity(_))));
    }

    #[test]
    fn config_literals() {
        assert_eq!(config_to_fexp(&k(&[("A", true), ("B", false)])), a().and(b().not()));
        assert_eq!(config_to_fexp(&k(&[("A", true)])), a());
        assert_eq!(
            config_to_fexp(&k(&[("A", false), ("B", false)])),
            a().not().and(b().not())
        );
    }

    #[test]
    fn kappa_examples() {
        let ab = u(&["A", "B"]);
        let all = ConfigSpace::all(ab.clone()).unwrap();
        assert_eq!(all.len(), 4);
        assert!(is_tautology(&kappa(&all).unwrap(), &ab).unwrap());

        let one = ConfigSpace::new(u(&["A"]), vec![k(&[("A", true)])]).unwrap();
        assert_eq!(kappa(&one).unwrap(), a());

        let two = ConfigSpace::new(
            ab,
            vec![k(&[("A", true), ("B", true)]), k(&[("A", false), ("B", false)])],
        )
        .unwrap();
        assert_eq!(kappa(&two).unwrap(), a().and(b()).or(a().not().and(b().not())));
    }

    #[test]
    fn valid_configs_examples() {
        let one = valid_configs(&u(&["A"]), &FeatExp::True).unwrap();
        assert_eq!(one.configs(), &[k(&[("A", true)]), k(&[("A", false)])]);
        let two = valid_configs(&u(&["A", "B"]), &a()).unwrap();
        assert_eq!(
            two.configs(),
            &[k(&[("A", true), ("B", true)]), k(&[("A", true), ("B", false)])]
        );
        assert!(valid_configs(&u(&["A", "B"]), &a().and(a().not())).is_err());
    }

    #[test]
    fn listing_order_matches_conjunction_order() {
        let all = ConfigSpace::all(u(&["A", "B"])).unwrap();
        let shown: Vec<String> = all.configs().iter().map(|c| c.to_string()).collect();
        assert_eq!(shown, ["A && B", "A && !B", "!A && B", "!A && !B"]);
    }

    #[test]
    fn parse_literals_rejects_partial() {
        let ab = u(&["A", "B"]);
        assert_eq!(
            Configuration::parse_literals("A, !B", &ab).unwrap(),
            k(&[("A", true), ("B", false)])
        );
        assert!(Configuration::parse_literals("A", &ab).is_err());
        assert!(Configuration::parse_literals("A,B,C", &ab).is_err());
        assert!(Configuration::parse_literals("A,!A,B", &ab).is_err());
    }

    #[test]
    fn display_precedence() {
        let e = a().or(b()).and(a().not().not());
        assert_eq!(e.to_string(), "(A || B) && !!A");
        let e = a().and(b().and(a()));
        assert_eq!(e.to_string(), "A && (B && A)");
        assert_eq!(FeatExp::falsum().to_string(), "!true");
    }

    #[test]
    fn simplify_folds_constants() {
        let ab = u(&["A", "B"]);
        let e = FeatExp::True.and(a()).or(FeatExp::falsum()).and(b().not().not());
        let s = e.simplify();
        assert_eq!(s, a().and(b()));
        assert!(equivalent(&e, &s, &ab).unwrap());
        assert_eq!(a().or(a().not()).simplify_in(&ab).unwrap(), FeatExp::True);
    }
}
