#![allow(dead_code)]

use std::ops::Not;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use reconf::featexp::{config_to_fexp, kappa, ConfigSpace, Configuration, FeatExp};
use reconf::lang::{family_to_string, parse_family, BinOp, ConfigSpec, Expr, FamilyProgram, Stmt};
use reconf::semantics::Store;

pub const FEATURES: [&str; 4] = ["A", "B", "C", "D"];
pub const VARS: [&str; 3] = ["x", "y", "z"];
pub const MAX_DEPTH: u32 = 5;

/// Random program and family generator. Every loop terminates: most count a
/// fresh counter up to a bound, the rest count a program variable up.
pub struct Gen {
    pub rng: StdRng,
    features: Vec<String>,
    loops: u32,
    pub choices: bool,
    pub free_loops: bool,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: StdRng::seed_from_u64(seed),
            features: Vec::new(),
            loops: 0,
            choices: false,
            free_loops: true,
        }
    }

    pub fn with_features(mut self, features: Vec<String>) -> Self {
        self.features = features;
        self
    }

    pub fn universe(&mut self, max: usize) -> Vec<String> {
        let n = self.rng.gen_range(0..=max);
        FEATURES[..n].iter().map(|f| f.to_string()).collect()
    }

    pub fn constant(&mut self) -> i64 {
        self.rng.gen_range(-3..=3)
    }

    pub fn var(&mut self) -> String {
        VARS.choose(&mut self.rng).unwrap().to_string()
    }

    pub fn fexp(&mut self, depth: u32) -> FeatExp {
        if self.features.is_empty() {
            return FeatExp::True;
        }
        let leaf = depth == 0 || self.rng.gen_bool(0.3);
        if leaf {
            return match self.rng.gen_range(0..10) {
                0 => FeatExp::True,
                _ => FeatExp::feat(self.features.choose(&mut self.rng).unwrap().clone()),
            };
        }
        match self.rng.gen_range(0..3) {
            0 => self.fexp(depth - 1).not(),
            1 => self.fexp(depth - 1).and(self.fexp(depth - 1)),
            _ => self.fexp(depth - 1).or(self.fexp(depth - 1)),
        }
    }

    pub fn expr(&mut self, depth: u32) -> Expr {
        if depth == 0 || self.rng.gen_bool(0.4) {
            return if self.rng.gen_bool(0.5) {
                Expr::Int(self.constant())
            } else {
                Expr::var(self.var())
            };
        }
        if self.choices && self.rng.gen_bool(0.15) {
            return Expr::choice(self.expr(depth - 1), self.expr(depth - 1));
        }
        let op = *BinOp::ALL.choose(&mut self.rng).unwrap();
        Expr::bin(op, self.expr(depth - 1), self.expr(depth - 1))
    }

    /// A family statement of nesting depth at most `depth`.
    pub fn stmt(&mut self, depth: u32) -> Stmt {
        if depth <= 1 {
            return self.simple();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..100) {
            0..=19 => self.simple(),
            20..=39 => Stmt::seq(self.stmt(d), self.stmt(d)),
            40..=49 => Stmt::if_then_else(self.expr(2), self.stmt(d), self.stmt(d)),
            50..=57 => self.bounded_loop(d),
            58..=69 if !self.features.is_empty() => Stmt::ifdef(self.fexp(2), self.stmt(d)),
            70..=77 if !self.features.is_empty() => {
                let phi = self.fexp(2);
                let s0 = self.stmt(d);
                let s1 = if self.rng.gen_bool(0.4) { s0.clone() } else { self.stmt(d) };
                Stmt::seq(Stmt::ifdef(phi.clone(), s0), Stmt::ifdef(phi.not(), s1))
            }
            78..=89 if !self.features.is_empty() => {
                let name = ["x", "y"].choose(&mut self.rng).unwrap().to_string();
                Stmt::ifdef_decl(self.fexp(2), name, self.constant(), self.stmt(d))
            }
            90..=95 => Stmt::var_decl(self.var(), self.expr(2), self.stmt(d)),
            58..=89 => Stmt::seq(self.stmt(d), self.stmt(d)),
            96 if self.free_loops => {
                let x = self.var();
                let c = self.constant();
                Stmt::while_do(
                    Expr::bin(BinOp::Lt, Expr::var(x.as_str()), Expr::Int(c)),
                    Stmt::assign(x.as_str(), Expr::bin(BinOp::Add, Expr::var(x.as_str()), Expr::Int(1))),
                )
            }
            _ => self.simple(),
        }
    }

    fn simple(&mut self) -> Stmt {
        if self.rng.gen_bool(0.1) {
            Stmt::skip()
        } else {
            let x = self.var();
            Stmt::assign(x, self.expr(2))
        }
    }

    /// `var lN := 0 in while lN < c do { body; lN := lN + 1 }`
    fn bounded_loop(&mut self, depth: u32) -> Stmt {
        self.loops += 1;
        let l = format!("l{}", self.loops);
        let bound = self.rng.gen_range(0..=3);
        let step = Stmt::assign(l.as_str(), Expr::bin(BinOp::Add, Expr::var(l.as_str()), Expr::Int(1)));
        let body = Stmt::seq(self.stmt(depth), step);
        Stmt::var_decl(
            l.as_str(),
            Expr::Int(0),
            Stmt::while_do(Expr::bin(BinOp::Lt, Expr::var(l.as_str()), Expr::Int(bound)), body),
        )
    }

    /// A random nonempty set of configurations, described one of three ways.
    pub fn config_spec(&mut self, universe: &[String]) -> ConfigSpec {
        let total = 1u32 << universe.len();
        let mut masks: Vec<u32> = (0..total).filter(|_| self.rng.gen_bool(0.6)).collect();
        if masks.is_empty() {
            masks.push(self.rng.gen_range(0..total));
        }
        if masks.len() as u32 == total && self.rng.gen_bool(0.5) {
            return ConfigSpec::All;
        }
        let configs: Vec<Configuration> =
            masks.iter().map(|&m| Configuration::from_mask(universe, m)).collect();
        if self.rng.gen_bool(0.5) {
            ConfigSpec::List(configs.iter().map(config_to_fexp).collect())
        } else {
            let space = ConfigSpace::new(universe.to_vec(), configs).unwrap();
            ConfigSpec::Formula(kappa(&space).unwrap())
        }
    }

    /// A random family, printed and parsed back so positions are real.
    pub fn family(&mut self, max_features: usize) -> FamilyProgram {
        self.features = self.universe(max_features);
        self.loops = 0;
        let depth = self.rng.gen_range(2..=MAX_DEPTH);
        let parts = self.rng.gen_range(2..=4);
        let body = Stmt::seq_all((0..parts).map(|_| self.stmt(depth)).collect::<Vec<_>>());
        let config_spec = self.config_spec(&self.features.clone());
        let p = FamilyProgram {
            universe: self.features.clone(),
            config_spec,
            body,
        };
        let text = family_to_string(&p);
        parse_family(&text).unwrap_or_else(|e| panic!("generated family does not parse: {e}\n{text}"))
    }

    /// The default store plus two random ones over the family's variables.
    pub fn stores(&mut self, p: &FamilyProgram) -> Vec<Store> {
        let vars = p.variables();
        let mut out = vec![Store::zeroed(&vars)];
        for _ in 0..2 {
            let mut s = Store::new();
            for x in &vars {
                s.set(x.clone(), self.constant());
            }
            out.push(s);
        }
        out
    }

    pub fn config(&mut self, universe: &[String]) -> Configuration {
        let m = self.rng.gen_range(0..1u32 << universe.len());
        Configuration::from_mask(universe, m)
    }
}

/// Truth-table oracle independent of the library's decision procedures.
pub fn holds(phi: &FeatExp, k: &Configuration) -> bool {
    match phi {
        FeatExp::True => true,
        FeatExp::Feat(f) => k.get(f).unwrap(),
        FeatExp::Not(a) => !holds(a, k),
        FeatExp::And(a, b) => holds(a, k) && holds(b, k),
        FeatExp::Or(a, b) => holds(a, k) || holds(b, k),
    }
}

pub fn all_configs(universe: &[String]) -> Vec<Configuration> {
    (0..1u32 << universe.len())
        .map(|m| Configuration::from_mask(universe, m))
        .collect()
}
