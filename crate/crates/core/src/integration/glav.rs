use std::collections::BTreeMap;

use super::system::GlavSystem;
use crate::category::{compose, MappingComponent, Morphism, Variant};
use crate::error::Result;
use crate::query::{eval_rule, Atom, Head, Rule, Term};
use crate::relational::{Instance, Relation};

/// The helper object and the three morphisms built from a GLAV system.
#[derive(Debug, Clone)]
pub struct GlavDecomposition {
    /// One relation `c1, c2, ..` per assertion: the target query's answers.
    pub helper: Instance,
    /// Source queries into the helper (sound).
    pub f_a: Morphism,
    /// Target queries onto the helper (exact).
    pub f_b: Morphism,
    /// `f_b⁻¹ ∘ f_a`, from the source to the target.
    pub direct: Morphism,
}

/// Splits `system` through a helper object. GAV definitions count as
/// assertions whose target query copies the defined relation.
pub fn glav_decompose(system: &GlavSystem, source: &Instance, target: &Instance) -> Result<GlavDecomposition> {
    let mut pairs: Vec<(Rule, Rule)> = system
        .assertions
        .iter()
        .map(|a| (a.source.clone(), a.target.clone()))
        .collect();
    for (name, def) in system.gav.definitions() {
        pairs.push((def.clone(), copy_rule(name, def.arity())));
    }

    let mut helper = BTreeMap::new();
    let mut into_a = Vec::new();
    let mut into_b = Vec::new();
    for (i, (qs, qg)) in pairs.iter().enumerate() {
        let name = format!("c{}", i + 1);
        let ext: Relation = eval_rule(qg, target)?;
        helper.insert(name.clone(), ext);
        into_a.push(MappingComponent::new(qs.clone(), Variant::Inclusion, name.clone()));
        into_b.push(MappingComponent::new(qg.clone(), Variant::Equal, name));
    }
    let helper = Instance::from_named(helper);
    let f_a = Morphism::atomic(source, &helper, into_a)?;
    let f_b = Morphism::atomic(target, &helper, into_b)?;
    let direct = compose(&f_b.invert(), &f_a)?;
    Ok(GlavDecomposition {
        helper,
        f_a,
        f_b,
        direct,
    })
}

fn copy_rule(name: &str, arity: usize) -> Rule {
    let vars: Vec<String> = (1..=arity).map(|i| format!("X{i}")).collect();
    let atom = Atom::rel(name, vars.iter().map(|v| Term::var(v.as_str())).collect());
    Rule::new(
        Head {
            name: Some(name.to_string()),
            vars,
        },
        vec![atom],
    )
    .expect("a copy rule is safe")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integration::{parse_glav, Schema};
    use crate::power_view::{closure, ViewBound};
    use crate::relational::parse_facts;

    fn k1() -> ViewBound {
        ViewBound::new(1)
    }

    #[test]
    fn single_assertion() {
        let sys = parse_glav("map: q(X) :- s(X). => p(X) :- g(X, Z).", Schema::new(), Schema::new()).unwrap();
        let d = glav_decompose(
            &sys,
            &parse_facts("s(a).").unwrap(),
            &parse_facts("g(a, #1).").unwrap(),
        )
        .unwrap();
        assert_eq!(d.helper.get("c1"), Some(&Relation::from_rows(&[["a"]])));
        let expected = closure(&Instance::from_relations([Relation::from_rows(&[["a"]])]), k1()).unwrap();
        assert_eq!(d.direct.flux(k1()).unwrap(), expected);
        assert_eq!(d.direct.dom().clone(), parse_facts("s(a).").unwrap());
    }

    #[test]
    fn empty_system() {
        let d = glav_decompose(&GlavSystem::default(), &parse_facts("s(a).").unwrap(), &Instance::new()).unwrap();
        assert!(d.helper.is_zero());
        assert!(d.direct.flux(k1()).unwrap().is_zero());
    }

    #[test]
    fn gav_definition_routes_to_its_relation() {
        let sys = parse_glav("gav: g(X) :- s(X, Y).", Schema::new(), Schema::new()).unwrap();
        let src = parse_facts("s(a, b).").unwrap();
        let tgt = parse_facts("g(a).").unwrap();
        let d = glav_decompose(&sys, &src, &tgt).unwrap();
        assert!(d.f_b.classify(k1()).unwrap().iso);
        assert!(d.direct.equivalent(&d.f_a, k1()).unwrap());
    }
}
