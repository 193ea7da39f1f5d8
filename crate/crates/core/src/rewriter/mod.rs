//! Reconfiguration of a program family into one single program: features
//! become nondeterministically initialized variables, conditional
//! declarations are renamed apart (rules 1–3), optionally adjacent
//! duplicates are merged (rule 5), and `#if`s become `if`s (rule 4).

mod env;
mod guards;
mod oracle;
mod rules;

use std::collections::BTreeMap;
use std::ops::Not;

use crate::error::{Error, Pos, Result};
use crate::featexp::{is_tautology, kappa, ConfigSpace, FeatExp};
use crate::lang::{Expr, FamilyProgram, Stmt};

pub use env::{Binding, FreshNameSupply, Region, RenameEnv};
pub use guards::{eliminate_ifdefs, encode_fexp, inline_guards, inline_guards_mapped};
pub use oracle::{
    check_outcome_preservation, check_outcome_preservation_with, default_stores,
    EquivalenceReport, Side, Verdict, Witness,
};
pub use rules::{rewrite_decl, rewrite_def, rewrite_use, Rewriter, RewriteContext, Rule, RuleEvent};

/// `var A1 := 0 or 1 in … var An := 0 or 1 in body`.
pub fn pre_transform(p: &FamilyProgram) -> Result<Stmt> {
    check_no_clash(p)?;
    Ok(wrap_features(&p.universe, p.body.clone()))
}

fn check_no_clash(p: &FamilyProgram) -> Result<()> {
    let vars = p.body.all_vars();
    match p.universe.iter().find(|f| vars.contains(*f)) {
        Some(f) => Err(Error::malformed(format!(
            "feature `{f}` is also used as a program variable"
        ))),
        None => Ok(()),
    }
}

fn wrap_features(universe: &[String], body: Stmt) -> Stmt {
    universe.iter().rev().fold(body, |acc, f| {
        Stmt::var_decl(
            f.as_str(),
            Expr::choice(Expr::Int(0), Expr::Int(1)),
            acc,
        )
    })
}

/// When some feature assignments are invalid, resets them to the first
/// valid configuration so that every run follows a valid variant.
fn normalize_features(space: &ConfigSpace, kappa: &FeatExp) -> Result<Option<Stmt>> {
    if is_tautology(kappa, space.universe())? {
        return Ok(None);
    }
    let first = &space.configs()[0];
    let resets = first
        .iter()
        .map(|(f, on)| Stmt::assign(f, Expr::Int(on as i64)));
    Ok(Some(Stmt::if_then_else(
        encode_fexp(&kappa.clone().not()),
        Stmt::seq_all(resets),
        Stmt::skip(),
    )))
}

/// The full pipeline output with its bookkeeping.
#[derive(Debug, Clone)]
pub struct Reconfigured {
    pub program: Stmt,
    /// Rule (1)–(3) applications in traversal order.
    pub trace: Vec<RuleEvent>,
    /// Positions of statements merged away by rule (5), mapped to the
    /// statements that replaced them.
    pub moved: BTreeMap<Pos, Pos>,
    pub visits: u64,
    pub widest_env: usize,
}

/// Runs the whole pipeline: optional guard inlining, feature
/// pre-transformation, rules (1)–(3) and `#if` elimination.
pub fn reconfigure(p: &FamilyProgram, optimize: bool) -> Result<Reconfigured> {
    check_no_clash(p)?;
    let space = p.config_space()?;
    let kappa = kappa(&space)?;
    let universe = p.universe.as_slice();
    let (body, moved) = if optimize {
        inline_guards_mapped(&p.body, universe)?
    } else {
        (p.body.clone(), BTreeMap::new())
    };
    let body = match normalize_features(&space, &kappa)? {
        Some(reset) => Stmt::seq(reset, body),
        None => body,
    };
    let wrapped = wrap_features(universe, body);

    let fresh = FreshNameSupply::avoiding(
        wrapped.all_vars().into_iter().chain(universe.iter().cloned()),
    );
    let mut rw = Rewriter::new(universe, fresh);
    let renamed = rw.rewrite(&wrapped, &RewriteContext::top(), &RenameEnv::new())?;
    let program = eliminate_ifdefs(&renamed, &kappa, universe)?;
    Ok(Reconfigured {
        program,
        visits: rw.visits(),
        widest_env: rw.widest_env(),
        trace: rw.into_trace(),
        moved,
    })
}

/// The single program simulating every valid variant of `p`.
pub fn rewrite_preserve(p: &FamilyProgram, optimize: bool) -> Result<Stmt> {
    Ok(reconfigure(p, optimize)?.program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{alpha_equivalent, parse_family, parse_single};

    #[test]
    fn pre_transform_wraps_features_in_order() {
        let p = parse_family("features A, B; configs all; program y := 1").unwrap();
        let out = pre_transform(&p).unwrap();
        let want = parse_single("var A := 0 or 1 in var B := 0 or 1 in y := 1").unwrap();
        assert!(out.same_shape(&want));

        let p = parse_family("features; configs all; program y := 1").unwrap();
        assert_eq!(pre_transform(&p).unwrap(), p.body);
    }

    #[test]
    fn conditional_declarations_are_renamed_apart() {
        let p = parse_family(
            "features A, B; configs all; program \
             #if (A) var x := 2 in #endif \
             #if (!A) var x := 5 in #endif \
             #if (B) y := x #endif",
        )
        .unwrap();
        let out = rewrite_preserve(&p, true).unwrap();
        let want = parse_single(
            "var A := 0 or 1 in var B := 0 or 1 in \
             var x1 := 2 in var x2 := 5 in \
             if B then { { if A then y := x1 else skip }; if A == 0 then y := x2 else skip } else skip",
        )
        .unwrap();
        assert!(alpha_equivalent(&out, &want), "{out}");
    }

    #[test]
    fn division_family_shape() {
        let p = parse_family(
            "features A, B; configs all; program \
             x := 1; #if (A) x := x + 1 #endif; #if (B) x := x - 1 #endif; ret := 2 / x",
        )
        .unwrap();
        let out = rewrite_preserve(&p, true).unwrap();
        let want = parse_single(
            "var A := 0 or 1 in var B := 0 or 1 in \
             x := 1; { if A then x := x + 1 else skip }; { if B then x := x - 1 else skip }; ret := 2 / x",
        )
        .unwrap();
        assert!(out.same_shape(&want), "{out}");
    }

    #[test]
    fn featureless_family_is_unchanged() {
        let p = parse_family("features; configs all; program x := 1; while x < 3 do x := x + 1").unwrap();
        assert_eq!(rewrite_preserve(&p, true).unwrap(), p.body);
    }

    #[test]
    fn restricted_models_reset_invalid_assignments() {
        let p = parse_family("features A; configs A; program x := 0; #if (A) x := 1 #endif").unwrap();
        let out = rewrite_preserve(&p, false).unwrap().to_string();
        assert!(out.contains("A := 1"), "{out}");
    }
}
