use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::query::{eval_rule, Rule};
use crate::relational::{Instance, Relation, Tag, TaggedRelation, Value};

/// How a component's view relates to its target's extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    /// The view is contained in the target (sound).
    Inclusion,
    /// The view contains the target (complete).
    InverseInclusion,
    /// Both (exact).
    Equal,
}

impl Variant {
    pub fn keyword(self) -> &'static str {
        match self {
            Variant::Inclusion => "sound",
            Variant::InverseInclusion => "complete",
            Variant::Equal => "exact",
        }
    }

    /// Accepts `sound|complete|exact` and `inclusion|inverse_inclusion|equal`.
    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "sound" | "inclusion" => Variant::Inclusion,
            "complete" | "inverse_inclusion" => Variant::InverseInclusion,
            "exact" | "equal" => Variant::Equal,
            _ => return None,
        })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Inclusion => "inclusion",
            Variant::InverseInclusion => "inverse_inclusion",
            Variant::Equal => "equal",
        })
    }
}

/// One view-mapping: a query over the domain, an optional constant
/// translation, a variant and a codomain relation (`None` for a Yes/No
/// query, which targets ⊥).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MappingComponent {
    pub query: Rule,
    pub translation: Option<BTreeMap<Value, Value>>,
    pub variant: Variant,
    pub target: Option<String>,
}

impl MappingComponent {
    pub fn new(query: Rule, variant: Variant, target: impl Into<String>) -> Self {
        MappingComponent {
            query,
            translation: None,
            variant,
            target: Some(target.into()),
        }
    }

    /// A Yes/No component: it transmits nothing.
    pub fn boolean(query: Rule) -> Self {
        MappingComponent {
            query,
            translation: None,
            variant: Variant::Inclusion,
            target: None,
        }
    }

    pub fn with_translation(mut self, table: BTreeMap<Value, Value>) -> Self {
        self.translation = Some(table);
        self
    }

    /// Label used in trees and diagrams: the rule's head name, if any.
    pub fn label(&self) -> Option<&str> {
        self.query.name()
    }

    /// `∂0`: relation symbols read by the query.
    pub fn sources(&self) -> BTreeSet<&str> {
        self.query.body_symbols()
    }

    fn translate(&self, view: Relation) -> Relation {
        match &self.translation {
            None => view,
            Some(table) => view.map_values(|v| table.get(v).cloned().unwrap_or_else(|| v.clone())),
        }
    }
}

impl fmt::Display for MappingComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let target = self.target.as_deref().unwrap_or("_");
        write!(f, "{target} <- {} variant={}", self.query, self.variant.keyword())
    }
}

/// A component after validation, with the relation it actually transmits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Checked {
    pub component: MappingComponent,
    pub extent: TaggedRelation,
}

/// Evaluates and checks a component against its endpoints.
pub(crate) fn check(dom: &Instance, cod: &Instance, c: &MappingComponent) -> Result<Checked> {
    let tag = source_tag(dom, &c.query)?;
    let view = c.translate(eval_rule(&c.query, dom)?);
    let Some(target) = &c.target else {
        return Ok(Checked {
            component: c.clone(),
            extent: TaggedRelation::bottom(),
        });
    };
    let ext = cod
        .get(target)
        .ok_or_else(|| Error::UnboundSymbol(target.clone()))?;
    let arity = c.query.arity();
    let projected = if ext.is_empty() {
        Relation::empty(arity)
    } else {
        if arity > ext.arity() {
            return Err(Error::ArityMismatch {
                symbol: target.clone(),
                expected: ext.arity(),
                found: arity,
            });
        }
        let prefix: Vec<usize> = (0..arity).collect();
        ext.project(&prefix)?
    };

    let violation = |offending: Relation| -> Result<()> {
        if offending.is_empty() {
            return Ok(());
        }
        Err(Error::VariantViolation {
            target: target.clone(),
            variant: c.variant.to_string(),
            offending: offending.iter().cloned().collect(),
        })
    };
    let extent = match c.variant {
        Variant::Inclusion => {
            violation(view.difference(&projected))?;
            view
        }
        Variant::InverseInclusion => {
            violation(projected.difference(&view))?;
            projected
        }
        Variant::Equal => {
            violation(view.difference(&projected))?;
            violation(projected.difference(&view))?;
            view
        }
    };
    Ok(Checked {
        component: c.clone(),
        extent: TaggedRelation {
            tag,
            relation: extent,
        },
    })
}

/// The coproduct component every body symbol lives in.
fn source_tag(dom: &Instance, query: &Rule) -> Result<Tag> {
    let mut tags = BTreeSet::new();
    for s in query.body_symbols() {
        let r = dom
            .get_tagged(s)
            .ok_or_else(|| Error::UnboundSymbol(s.to_string()))?;
        // ⊥ belongs to every component
        if !r.relation.is_empty() {
            tags.insert(r.tag.clone());
        }
    }
    if tags.len() > 1 {
        return Err(Error::CrossComponentQuery(query.to_string()));
    }
    Ok(tags.into_iter().next().unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_rule;
    use crate::relational::{combine, parse_facts, CombineMode};

    fn comp(rule: &str, variant: Variant, target: &str) -> MappingComponent {
        MappingComponent::new(parse_rule(rule).unwrap(), variant, target)
    }

    #[test]
    fn inclusion_records_the_view() {
        let dom = parse_facts("r(a, b).").unwrap();
        let cod = parse_facts("t(a). t(c).").unwrap();
        let c = check(&dom, &cod, &comp("q(X) :- r(X, Y).", Variant::Inclusion, "t")).unwrap();
        assert_eq!(c.extent.relation, Relation::from_rows(&[["a"]]));
        let c = check(&dom, &cod, &comp("q(X) :- r(X, Y).", Variant::InverseInclusion, "t"));
        match c {
            Err(Error::VariantViolation { offending, .. }) => {
                assert_eq!(offending, vec![crate::relational::Tuple::from(["c"])])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inclusion_into_empty_target_fails() {
        let dom = parse_facts("r(a, b).").unwrap();
        let cod = Instance::new().with("t", Relation::empty(1));
        assert!(matches!(
            check(&dom, &cod, &comp("q(X) :- r(X, Y).", Variant::Inclusion, "t")),
            Err(Error::VariantViolation { .. })
        ));
    }

    #[test]
    fn inverse_inclusion_records_the_target_prefix() {
        let dom = parse_facts("r(a, b). r(c, d).").unwrap();
        let cod = parse_facts("t(a, z).").unwrap();
        let c = check(
            &dom,
            &cod,
            &comp("q(X) :- r(X, Y).", Variant::InverseInclusion, "t"),
        )
        .unwrap();
        assert_eq!(c.extent.relation, Relation::from_rows(&[["a"]]));
    }

    #[test]
    fn translation_applies_before_the_check() {
        let dom = parse_facts("r(a).").unwrap();
        let cod = parse_facts("t(x).").unwrap();
        let table = BTreeMap::from([(Value::constant("a"), Value::constant("x"))]);
        let c = comp("q(X) :- r(X).", Variant::Equal, "t").with_translation(table);
        assert_eq!(
            check(&dom, &cod, &c).unwrap().extent.relation,
            Relation::from_rows(&[["x"]])
        );
    }

    #[test]
    fn cross_component_queries_are_rejected() {
        let a = parse_facts("r(a).").unwrap();
        let ab = combine(&a, &a, CombineMode::Coproduct).unwrap();
        let cod = parse_facts("t(a, a).").unwrap();
        assert!(matches!(
            check(&ab, &cod, &comp("q(X, Y) :- inl_r(X), inr_r(Y).", Variant::Inclusion, "t")),
            Err(Error::CrossComponentQuery(_))
        ));
        let ok = check(&ab, &cod, &comp("q(X) :- inl_r(X).", Variant::Inclusion, "t")).unwrap();
        assert!(!ok.extent.tag.is_untagged());
    }

    #[test]
    fn yes_no_components_transmit_bottom() {
        let dom = parse_facts("r(a, a).").unwrap();
        let c = MappingComponent::boolean(parse_rule(":- r(X, X).").unwrap());
        assert!(check(&dom, &Instance::new(), &c).unwrap().extent.relation.is_bottom());
    }
}
