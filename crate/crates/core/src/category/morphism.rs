use std::fmt;
use std::sync::{Arc, OnceLock};

use super::component::{check, Checked, MappingComponent, Variant};
use crate::error::{Error, Result};
use crate::power_view::{closure, ViewBound, ViewSet};
use crate::query::{Atom, Head, Rule, Term};
use crate::relational::{combine, instances_equal, CombineMode, Instance, Side};

/// An arrow between two instances. Cheap to clone; the flux is computed on
/// first use and cached together with its arity bound.
#[derive(Clone)]
pub struct Morphism(Arc<Node>);

struct Node {
    dom: Instance,
    cod: Instance,
    shape: Shape,
    flux: OnceLock<(usize, ViewSet)>,
}

#[derive(Clone)]
pub(crate) enum Shape {
    Atomic(Vec<Checked>),
    /// `outer ∘ inner`.
    Composed(Morphism, Morphism),
    Inverse(Morphism),
    /// Identity view-maps over a fixed set of views.
    ViewMap(ViewSet),
    Sum(Morphism, Morphism),
    Copair(Morphism, Morphism),
    Injection(Side),
}

/// Result of [`Morphism::classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Classification {
    pub mono: bool,
    pub epi: bool,
    pub iso: bool,
}

/// Result of [`pullback`]: the apex views, an instance carrying them, and
/// the two legs into the domains.
#[derive(Debug, Clone)]
pub struct Pullback {
    pub apex: ViewSet,
    pub apex_object: Instance,
    pub h_a: Morphism,
    pub h_b: Morphism,
}

impl Morphism {
    fn build(dom: Instance, cod: Instance, shape: Shape) -> Morphism {
        Morphism(Arc::new(Node {
            dom,
            cod,
            shape,
            flux: OnceLock::new(),
        }))
    }

    /// Validates every component against `dom` and `cod`.
    pub fn atomic(
        dom: &Instance,
        cod: &Instance,
        components: impl IntoIterator<Item = MappingComponent>,
    ) -> Result<Morphism> {
        let mut checked = Vec::new();
        for c in components {
            let c = check(dom, cod, &c)?;
            if !checked.contains(&c) {
                checked.push(c);
            }
        }
        Ok(Morphism::build(dom.clone(), cod.clone(), Shape::Atomic(checked)))
    }

    /// The morphism without components (its flux is `{⊥}`).
    pub fn empty(dom: &Instance, cod: &Instance) -> Morphism {
        Morphism::build(dom.clone(), cod.clone(), Shape::Atomic(Vec::new()))
    }

    /// One exact copy component per relation of `a`.
    pub fn identity(a: &Instance) -> Morphism {
        let a = a.with_view_names();
        let components = a
            .names()
            .filter(|(_, r)| !r.relation.is_bottom())
            .map(|(name, r)| copy_component(name, r.relation.arity()));
        Morphism::atomic(&a, &a, components).expect("copy components always validate")
    }

    /// Identity view-maps over `views`, from `dom` to `cod`. The views are
    /// taken as given.
    pub fn view_map(dom: &Instance, cod: &Instance, views: ViewSet) -> Morphism {
        Morphism::build(dom.clone(), cod.clone(), Shape::ViewMap(views))
    }

    /// `η_A : A → TA`, with `TA` given by its generating views.
    pub fn eta(a: &Instance, bound: ViewBound) -> Result<Morphism> {
        let t = closure(a, bound)?;
        Ok(Morphism::view_map(a, &t.generator_instance(), t))
    }

    /// `μ_A : TTA → TA`.
    pub fn mu(a: &Instance, bound: ViewBound) -> Result<Morphism> {
        let t = closure(a, bound)?;
        let tt = closure(&t.generator_instance(), bound)?;
        let ta = t.generator_instance();
        Ok(Morphism::view_map(&tt.generator_instance(), &ta, tt))
    }

    /// The coproduct injection `A → A + B` (or `B → A + B` for `Right`).
    pub fn injection(a: &Instance, b: &Instance, side: Side) -> Result<Morphism> {
        let sum = combine(a, b, CombineMode::Coproduct)?;
        let dom = match side {
            Side::Left => a,
            Side::Right => b,
        };
        Ok(Morphism::build(
            dom.with_view_names(),
            sum,
            Shape::Injection(side),
        ))
    }

    pub fn dom(&self) -> &Instance {
        &self.0.dom
    }

    pub fn cod(&self) -> &Instance {
        &self.0.cod
    }

    pub(crate) fn shape(&self) -> &Shape {
        &self.0.shape
    }

    /// Components of an atomic morphism, in construction order.
    pub fn components(&self) -> Vec<&MappingComponent> {
        match &self.0.shape {
            Shape::Atomic(cs) => cs.iter().map(|c| &c.component).collect(),
            _ => Vec::new(),
        }
    }

    /// The reversed arrow; its flux is the same.
    pub fn invert(&self) -> Morphism {
        Morphism::build(
            self.0.cod.clone(),
            self.0.dom.clone(),
            Shape::Inverse(self.clone()),
        )
    }

    /// The set of views the morphism transmits, closed at `bound`.
    pub fn flux(&self, bound: ViewBound) -> Result<ViewSet> {
        if let Some((k, v)) = self.0.flux.get() {
            if *k == bound.max_arity {
                return Ok(v.clone());
            }
            // cached for another bound
            return self.compute_flux(bound);
        }
        let v = self.compute_flux(bound)?;
        let _ = self.0.flux.set((bound.max_arity, v.clone()));
        Ok(v)
    }

    fn compute_flux(&self, bound: ViewBound) -> Result<ViewSet> {
        match &self.0.shape {
            Shape::Atomic(cs) => {
                let extents = Instance::from_tagged(cs.iter().map(|c| c.extent.clone()));
                closure(&extents, bound)
            }
            Shape::Composed(outer, inner) => outer.flux(bound)?.intersection(&inner.flux(bound)?),
            Shape::Inverse(f) => f.flux(bound),
            Shape::ViewMap(views) => closure(&views.generator_instance(), bound),
            Shape::Sum(f, g) | Shape::Copair(f, g) => f.flux(bound)?.coproduct(&g.flux(bound)?),
            Shape::Injection(side) => Ok(closure(&self.0.dom, bound)?.tagged(*side)),
        }
    }

    /// Mono iff the flux is the closure of the domain, epi iff it is the
    /// closure of the codomain.
    pub fn classify(&self, bound: ViewBound) -> Result<Classification> {
        let f = self.flux(bound)?;
        let mono = f.equals(&closure(&self.0.dom, bound)?)?;
        let epi = f.equals(&closure(&self.0.cod, bound)?)?;
        Ok(Classification {
            mono,
            epi,
            iso: mono && epi,
        })
    }

    /// Splits the morphism through its flux: `(epi, mono)` with
    /// `mono ∘ epi ≈ self`.
    pub fn factorize(&self, bound: ViewBound) -> Result<(Morphism, Morphism)> {
        let f = self.flux(bound)?;
        let mid = f.generator_instance();
        let epi = Morphism::view_map(&self.0.dom, &mid, f.clone());
        let mono = Morphism::view_map(&mid, &self.0.cod, f);
        Ok((epi, mono))
    }

    /// `T f : TA → TB`, identity view-maps over the flux.
    pub fn t_arrow(&self, bound: ViewBound) -> Result<Morphism> {
        let dom = closure(&self.0.dom, bound)?.generator_instance();
        let cod = closure(&self.0.cod, bound)?.generator_instance();
        Ok(Morphism::view_map(&dom, &cod, self.flux(bound)?))
    }

    /// `f ≈ g`: equal fluxes.
    pub fn equivalent(&self, other: &Morphism, bound: ViewBound) -> Result<bool> {
        self.flux(bound)?.equals(&other.flux(bound)?)
    }

    /// `f ⪯ g`: the flux of `f` is contained in that of `g`.
    pub fn precedes(&self, other: &Morphism, bound: ViewBound) -> Result<bool> {
        self.flux(bound)?.is_subset(&other.flux(bound)?)
    }
}

/// `outer ∘ inner`; the inner codomain must equal the outer domain.
pub fn compose(outer: &Morphism, inner: &Morphism) -> Result<Morphism> {
    if !instances_equal(inner.cod(), outer.dom()) {
        return Err(Error::EndpointMismatch(
            "codomain of the inner morphism differs from the domain of the outer one".into(),
        ));
    }
    Ok(Morphism::build(
        inner.dom().clone(),
        outer.cod().clone(),
        Shape::Composed(outer.clone(), inner.clone()),
    ))
}

/// `f + g : A + B → C + D`.
pub fn sum(f: &Morphism, g: &Morphism) -> Result<Morphism> {
    let dom = combine(f.dom(), g.dom(), CombineMode::Coproduct)?;
    let cod = combine(f.cod(), g.cod(), CombineMode::Coproduct)?;
    Ok(Morphism::build(dom, cod, Shape::Sum(f.clone(), g.clone())))
}

/// `[f, g] : A + B → C` for `f : A → C` and `g : B → C`.
pub fn copair(f: &Morphism, g: &Morphism) -> Result<Morphism> {
    if !instances_equal(f.cod(), g.cod()) {
        return Err(Error::EndpointMismatch("copairing needs a common codomain".into()));
    }
    let dom = combine(f.dom(), g.dom(), CombineMode::Coproduct)?;
    Ok(Morphism::build(
        dom,
        f.cod().clone(),
        Shape::Copair(f.clone(), g.clone()),
    ))
}

/// The fibred product of `f` and `g` over their common codomain.
pub fn pullback(f: &Morphism, g: &Morphism, bound: ViewBound) -> Result<Pullback> {
    if !instances_equal(f.cod(), g.cod()) {
        return Err(Error::EndpointMismatch("pullback needs a common codomain".into()));
    }
    let apex = f.flux(bound)?.intersection(&g.flux(bound)?)?;
    let apex_object = apex.generator_instance();
    Ok(Pullback {
        h_a: Morphism::view_map(&apex_object, f.dom(), apex.clone()),
        h_b: Morphism::view_map(&apex_object, g.dom(), apex.clone()),
        apex,
        apex_object,
    })
}

/// `r(X1, .., Xn) :- r(X1, .., Xn).` as an exact component.
pub(crate) fn copy_component(name: &str, arity: usize) -> MappingComponent {
    let vars: Vec<String> = (1..=arity).map(|i| format!("X{i}")).collect();
    let atom = Atom::rel(name, vars.iter().map(|v| Term::var(v.as_str())).collect());
    let rule = Rule::new(
        Head {
            name: Some(name.to_string()),
            vars,
        },
        vec![atom],
    )
    .expect("a copy rule is safe");
    MappingComponent::new(rule, Variant::Equal, name)
}

impl fmt::Debug for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Morphism({self})")
    }
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.shape {
            Shape::Atomic(cs) => {
                f.write_str("{")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{}", c.component)?;
                }
                f.write_str("}")
            }
            Shape::Composed(o, i) => write!(f, "({o} . {i})"),
            Shape::Inverse(m) => write!(f, "inv({m})"),
            Shape::ViewMap(v) => write!(f, "views[{}]", v.generators().count()),
            Shape::Sum(a, b) => write!(f, "({a} + {b})"),
            Shape::Copair(a, b) => write!(f, "[{a}, {b}]"),
            Shape::Injection(Side::Left) => f.write_str("inl"),
            Shape::Injection(Side::Right) => f.write_str("inr"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_rule;
    use crate::relational::{parse_facts, Relation};

    fn inst(src: &str) -> Instance {
        parse_facts(src).unwrap()
    }

    fn k(n: usize) -> ViewBound {
        ViewBound::new(n)
    }

    fn projection() -> Morphism {
        let a = inst("r(a, b).");
        let b = inst("t(a).");
        let c = MappingComponent::new(parse_rule("q(X) :- r(X, Y).").unwrap(), Variant::Inclusion, "t");
        Morphism::atomic(&a, &b, [c]).unwrap()
    }

    fn unary(rel: &str) -> ViewSet {
        closure(&Instance::from_relations([Relation::from_rows(&[[rel]])]), k(1)).unwrap()
    }

    #[test]
    fn projection_flux() {
        let f = projection();
        assert_eq!(f.flux(k(1)).unwrap(), unary("a"));
        let c = f.classify(k(1)).unwrap();
        assert!(!c.mono);
        assert!(c.epi);
    }

    #[test]
    fn identity_is_iso() {
        let a = inst("r(a, b). s(c).");
        let id = Morphism::identity(&a);
        assert!(id.classify(k(2)).unwrap().iso);
        assert_eq!(id.flux(k(2)).unwrap(), closure(&a, k(2)).unwrap());
        assert!(Morphism::identity(&Instance::new()).flux(k(2)).unwrap().is_zero());
    }

    #[test]
    fn identity_at_k1() {
        let a = inst("r(a).");
        let f = Morphism::identity(&a).flux(k(1)).unwrap();
        assert_eq!(f.expand(10).unwrap(), Instance::from_relations([Relation::from_rows(&[["a"]])]));
    }

    #[test]
    fn empty_morphism_is_neither() {
        let f = Morphism::empty(&inst("r(a)."), &inst("s(b)."));
        assert!(f.flux(k(2)).unwrap().is_zero());
        assert_eq!(f.classify(k(2)).unwrap(), Classification::default());
    }

    #[test]
    fn composing_disjoint_fluxes() {
        let a = inst("r(a).");
        let b = inst("r(a). s(b).");
        let c = inst("t(b).");
        let f = Morphism::atomic(
            &a,
            &b,
            [MappingComponent::new(parse_rule("q(X) :- r(X).").unwrap(), Variant::Inclusion, "r")],
        )
        .unwrap();
        let g = Morphism::atomic(
            &b,
            &c,
            [MappingComponent::new(parse_rule("q(X) :- s(X).").unwrap(), Variant::Equal, "t")],
        )
        .unwrap();
        assert_eq!(f.flux(k(1)).unwrap(), unary("a"));
        assert_eq!(g.flux(k(1)).unwrap(), unary("b"));
        assert!(compose(&g, &f).unwrap().flux(k(1)).unwrap().is_zero());
        assert!(matches!(compose(&f, &g), Err(Error::EndpointMismatch(_))));
    }

    #[test]
    fn flux_cache_respects_the_bound() {
        let a = inst("r(a, b).");
        let id = Morphism::identity(&a);
        let two = id.flux(k(2)).unwrap();
        let one = id.flux(k(1)).unwrap();
        assert_eq!(one.bound(), 1);
        assert_eq!(id.flux(k(2)).unwrap(), two);
    }

    #[test]
    fn yes_no_component_transmits_nothing() {
        let a = inst("r(a, a).");
        let c = MappingComponent::boolean(parse_rule(":- r(X, X).").unwrap());
        let f = Morphism::atomic(&a, &a, [c]).unwrap();
        assert!(f.flux(k(2)).unwrap().is_zero());
    }

    #[test]
    fn factorize_projection() {
        let f = projection();
        let (epi, mono) = f.factorize(k(1)).unwrap();
        assert_eq!(epi.cod().clone(), Instance::from_relations([Relation::from_rows(&[["a"]])]));
        assert!(epi.classify(k(1)).unwrap().epi);
        assert!(mono.classify(k(1)).unwrap().mono);
        assert!(compose(&mono, &epi).unwrap().equivalent(&f, k(1)).unwrap());
    }

    #[test]
    fn pullback_of_nested_views() {
        let a = inst("r(a).");
        let b = inst("r(a). s(b).");
        let f = Morphism::identity(&a);
        let f = Morphism::view_map(f.dom(), &b, f.flux(k(1)).unwrap());
        let g = Morphism::identity(&b);
        let p = pullback(&f, &g, k(1)).unwrap();
        assert_eq!(p.apex, unary("a"));
        assert!(p.h_a.classify(k(1)).unwrap().mono);
        let left = compose(&f, &p.h_a).unwrap();
        let right = compose(&g, &p.h_b).unwrap();
        assert!(left.equivalent(&right, k(1)).unwrap());
    }

    #[test]
    fn inverse_and_t_arrow() {
        let f = projection();
        let inv = f.invert();
        assert_eq!(inv.dom().clone(), f.cod().clone());
        assert!(inv.equivalent(&f, k(1)).unwrap());
        assert_eq!(inv.classify(k(1)).unwrap().mono, f.classify(k(1)).unwrap().epi);
        let t = f.t_arrow(k(1)).unwrap();
        assert_eq!(t.classify(k(1)).unwrap(), f.classify(k(1)).unwrap());
        assert!(t.t_arrow(k(1)).unwrap().equivalent(&t, k(1)).unwrap());
    }

    #[test]
    fn eta_is_iso_and_mu_is_identity() {
        let a = inst("r(a, b). s(b).");
        assert!(Morphism::eta(&a, k(2)).unwrap().classify(k(2)).unwrap().iso);
        let mu = Morphism::mu(&a, k(2)).unwrap();
        assert_eq!(mu.flux(k(2)).unwrap(), closure(&a, k(2)).unwrap());
    }

    #[test]
    fn coproduct_laws() {
        let a = inst("r(a).");
        let b = inst("s(b).");
        let c = inst("t(a). t(b).");
        let f = Morphism::atomic(
            &a,
            &c,
            [MappingComponent::new(parse_rule("q(X) :- r(X).").unwrap(), Variant::Inclusion, "t")],
        )
        .unwrap();
        let g = Morphism::atomic(
            &b,
            &c,
            [MappingComponent::new(parse_rule("q(X) :- s(X).").unwrap(), Variant::Inclusion, "t")],
        )
        .unwrap();
        let s = sum(&f, &g).unwrap();
        assert_eq!(
            s.flux(k(2)).unwrap(),
            f.flux(k(2)).unwrap().coproduct(&g.flux(k(2)).unwrap()).unwrap()
        );
        let cp = copair(&f, &g).unwrap();
        let inl = Morphism::injection(&a, &b, Side::Left).unwrap();
        let back = compose(&cp, &inl).unwrap().flux(k(2)).unwrap().untag(Side::Left);
        assert_eq!(back, f.flux(k(2)).unwrap());

        let zero = Morphism::empty(&Instance::new(), &Instance::new());
        let fz = sum(&f, &zero).unwrap().flux(k(2)).unwrap().untag(Side::Left);
        assert_eq!(fz, f.flux(k(2)).unwrap());
    }

    #[test]
    fn copy_component_round_trips() {
        let c = copy_component("r", 2);
        assert_eq!(c.query, parse_rule("r(X1, X2) :- r(X1, X2).").unwrap());
    }
}
