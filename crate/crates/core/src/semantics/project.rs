use crate::error::{Error, Result};
use crate::featexp::Configuration;
use crate::lang::{Expr, FamilyProgram, Stmt};

use super::explore::semantics_over;
use super::outcome::OutcomeSet;
use super::store::Store;

/// The variant of `family` selected by `k`: `#if` bodies survive iff `k`
/// satisfies their presence condition, and a conditional declaration becomes
/// an ordinary one iff its condition holds.
pub fn project(family: &Stmt, k: &Configuration) -> Result<Stmt> {
    match family {
        Stmt::IfDef { pc, body, pos } => {
            if pc.eval(k)? {
                project(body, k)
            } else {
                Ok(Stmt::Skip(*pos))
            }
        }
        Stmt::IfDefDecl {
            pc,
            name,
            init,
            scope,
            pos,
        } => {
            let scope = project(scope, k)?;
            if pc.eval(k)? {
                Ok(Stmt::VarDecl {
                    name: name.clone(),
                    init: Expr::Int(*init),
                    body: Box::new(scope),
                    pos: *pos,
                })
            } else {
                Ok(scope)
            }
        }
        other => other.try_map_children(|c| project(c, k)),
    }
}

/// Outcomes of each valid variant, in configuration listing order.
pub fn variant_outcomes(
    p: &FamilyProgram,
    stores: &[Store],
    fuel: u64,
) -> Result<Vec<(Configuration, OutcomeSet)>> {
    let space = p.config_space()?;
    space
        .configs()
        .iter()
        .map(|k| {
            let variant = project(&p.body, k)?;
            Ok((k.clone(), semantics_over(&variant, stores, fuel)))
        })
        .collect()
}

/// Union of the outcomes of every valid variant.
pub fn family_outcomes(p: &FamilyProgram, stores: &[Store], fuel: u64) -> Result<OutcomeSet> {
    if stores.is_empty() {
        return Err(Error::malformed("at least one initial store is required"));
    }
    let mut out = OutcomeSet::new();
    for (_, o) in variant_outcomes(p, stores, fuel)? {
        out.extend(o);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_family, parse_single};
    use crate::semantics::{ErrorKind, Outcome};

    const ONE_BAD_VARIANT: &str = "features A, B;\nconfigs all;\nprogram\n  x := 1;\n  #if (A) x := x + 1 #endif;\n  #if (B) x := x - 1 #endif;\n  ret := 2 / x\n";

    fn k(text: &str, p: &FamilyProgram) -> Configuration {
        Configuration::parse_literals(text, &p.universe).unwrap()
    }

    #[test]
    fn variants_of_the_division_family() {
        let p = parse_family(ONE_BAD_VARIANT).unwrap();
        let ab = project(&p.body, &k("A,B", &p)).unwrap();
        let want = parse_single("x := 1; x := x + 1; x := x - 1; ret := 2 / x").unwrap();
        assert!(ab.same_shape(&want));

        let none = project(&p.body, &k("!A,!B", &p)).unwrap();
        let want = parse_single("x := 1; skip; skip; ret := 2 / x").unwrap();
        assert!(none.same_shape(&want));
    }

    #[test]
    fn skip_projects_to_skip() {
        let p = parse_family("features A; configs all; program skip").unwrap();
        assert!(project(&p.body, &k("A", &p)).unwrap().same_shape(&Stmt::skip()));
    }

    #[test]
    fn conditional_declaration_projection() {
        let p = parse_family(
            "features A; configs all; program #if (A) var x := 2 in #endif y := x",
        )
        .unwrap();
        let on = project(&p.body, &k("A", &p)).unwrap();
        assert!(on.same_shape(&parse_single("var x := 2 in y := x").unwrap()));
        let off = project(&p.body, &k("!A", &p)).unwrap();
        assert!(off.same_shape(&parse_single("y := x").unwrap()));
    }

    #[test]
    fn division_family_outcomes() {
        let p = parse_family(ONE_BAD_VARIANT).unwrap();
        let store = Store::zeroed(&p.variables());
        let out = family_outcomes(&p, &[store], 1_000).unwrap();
        let rets: Vec<i64> = out.finals().map(|s| s.get("ret").unwrap()).collect();
        assert_eq!(rets.len(), 2);
        assert!(rets.contains(&1) && rets.contains(&2));
        let errors: Vec<_> = out.errors().collect();
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].kind, ErrorKind::DivByZero);
    }

    #[test]
    fn two_projections_of_one_ifdef() {
        let p = parse_family("features A; configs all; program #if (A) x := 1 #endif").unwrap();
        let out = family_outcomes(&p, &[Store::new().with("x", 0)], 100).unwrap();
        let want: OutcomeSet = [0, 1]
            .into_iter()
            .map(|v| Outcome::Final {
                store: Store::new().with("x", v),
            })
            .collect();
        assert_eq!(out, want);
    }

    #[test]
    fn family_without_ifs_matches_single_program() {
        let p = parse_family("features A; configs A; program x := x * 2").unwrap();
        let stores = [Store::new().with("x", 3)];
        assert_eq!(
            family_outcomes(&p, &stores, 100).unwrap(),
            semantics_over(&parse_single("x := x * 2").unwrap(), &stores, 100)
        );
    }
}
