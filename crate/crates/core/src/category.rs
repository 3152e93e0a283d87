//! The economic category: objects are panel variables, morphisms are
//! composable series transforms kept as data so they can be canonicalized,
//! compared, printed and serialized.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::panel::{Panel, Series, VariableId};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EconObject {
    pub id: VariableId,
    #[serde(default)]
    pub description: String,
}

impl EconObject {
    pub fn new(id: impl Into<VariableId>, description: impl Into<String>) -> Self {
        EconObject { id: id.into(), description: description.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MorphismKind {
    /// `a·x + b`
    Affine { a: f64, b: f64 },
    /// `x·s(t)`
    ScaleBySeries { series: VariableId },
    /// `num(t) / den(t)`, independent of the input
    Ratio { num: VariableId, den: VariableId },
    /// `x / (1 + ρ(t))`
    RiskDiscount { rho: VariableId },
    /// Left-to-right composition.
    Chain { inner: Vec<Morphism> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Morphism {
    pub source: VariableId,
    pub target: VariableId,
    #[serde(flatten)]
    pub kind: MorphismKind,
}

impl Morphism {
    pub fn new(source: impl Into<VariableId>, target: impl Into<VariableId>, kind: MorphismKind) -> Self {
        Morphism { source: source.into(), target: target.into(), kind }
    }

    pub fn affine(source: impl Into<VariableId>, target: impl Into<VariableId>, a: f64, b: f64) -> Self {
        Morphism::new(source, target, MorphismKind::Affine { a, b })
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && matches!(self.kind, MorphismKind::Affine { a, b } if a == 1.0 && b == 0.0)
    }

    /// Builds a chain, checking that it is non-empty and that consecutive
    /// members line up.
    pub fn chain(inner: Vec<Morphism>) -> Result<Self> {
        let (first, last) = match (inner.first(), inner.last()) {
            (Some(f), Some(l)) => (f.source.clone(), l.target.clone()),
            _ => return Err(Error::InvalidArgument("empty chain".into())),
        };
        for w in inner.windows(2) {
            check_endpoints(&w[0], &w[1])?;
        }
        Ok(Morphism::new(first, last, MorphismKind::Chain { inner }))
    }

    /// Members of the morphism as a flat left-to-right list.
    fn flatten(&self) -> Vec<Morphism> {
        match &self.kind {
            MorphismKind::Chain { inner } => inner.iter().flat_map(Morphism::flatten).collect(),
            _ => vec![self.clone()],
        }
    }

    /// Whether evaluation reads the source column at all.
    fn reads_input(&self) -> bool {
        match &self.kind {
            MorphismKind::Ratio { .. } => false,
            MorphismKind::Chain { inner } => inner.first().is_some_and(Morphism::reads_input),
            _ => true,
        }
    }

    /// Variables the morphism needs from a panel.
    pub fn referenced_variables(&self) -> Vec<VariableId> {
        let mut out = Vec::new();
        if self.reads_input() {
            out.push(self.source.clone());
        }
        self.collect_parameters(&mut out);
        out.dedup();
        out
    }

    fn collect_parameters(&self, out: &mut Vec<VariableId>) {
        match &self.kind {
            MorphismKind::Affine { .. } => {}
            MorphismKind::ScaleBySeries { series } => out.push(series.clone()),
            MorphismKind::Ratio { num, den } => {
                out.push(num.clone());
                out.push(den.clone());
            }
            MorphismKind::RiskDiscount { rho } => out.push(rho.clone()),
            MorphismKind::Chain { inner } => inner.iter().for_each(|m| m.collect_parameters(out)),
        }
    }
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MorphismKind::Affine { a, b } => write!(f, "Affine({a}, {b})")?,
            MorphismKind::ScaleBySeries { series } => write!(f, "ScaleBySeries({series})")?,
            MorphismKind::Ratio { num, den } => write!(f, "Ratio({num}, {den})")?,
            MorphismKind::RiskDiscount { rho } => write!(f, "RiskDiscount({rho})")?,
            MorphismKind::Chain { inner } => {
                write!(f, "Chain[")?;
                for (i, m) in inner.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, "]")?;
            }
        }
        write!(f, ": {} -> {}", self.source, self.target)
    }
}

fn check_endpoints(f: &Morphism, g: &Morphism) -> Result<()> {
    if f.target != g.source {
        return Err(Error::IncompatibleEndpoints {
            target: f.target.to_string(),
            source_id: g.source.to_string(),
        });
    }
    Ok(())
}

pub fn identity(obj: &VariableId) -> Morphism {
    Morphism::affine(obj.clone(), obj.clone(), 1.0, 0.0)
}

fn merge_affine(f: &Morphism, g: &Morphism) -> Option<Morphism> {
    match (&f.kind, &g.kind) {
        (MorphismKind::Affine { a: a1, b: b1 }, MorphismKind::Affine { a: a2, b: b2 }) => Some(
            Morphism::affine(f.source.clone(), g.target.clone(), a2 * a1, a2 * b1 + b2),
        ),
        _ => None,
    }
}

/// `g ∘ f`: apply `f`, then `g`.
///
/// Identities are absorbed, two affines fold into one, and anything else
/// becomes a flat chain whose adjacent affines at the junction are folded.
pub fn compose(f: &Morphism, g: &Morphism) -> Result<Morphism> {
    check_endpoints(f, g)?;
    if g.is_identity() {
        return Ok(f.clone());
    }
    if f.is_identity() {
        return Ok(g.clone());
    }
    if let Some(m) = merge_affine(f, g) {
        return Ok(m);
    }
    let mut items = f.flatten();
    let mut rest = g.flatten().into_iter();
    if let (Some(last), Some(next)) = (items.last(), rest.as_slice().first()) {
        if let Some(m) = merge_affine(last, next) {
            items.pop();
            items.push(m);
            rest.next();
        }
    }
    items.extend(rest);
    items.retain(|m| !m.is_identity());
    match items.len() {
        0 => Ok(identity(&f.source)),
        1 => {
            let mut m = items.pop().unwrap();
            m.source = f.source.clone();
            m.target = g.target.clone();
            Ok(m)
        }
        _ => Ok(Morphism::new(f.source.clone(), g.target.clone(), MorphismKind::Chain { inner: items })),
    }
}

/// Composes a non-empty path left to right.
pub fn compose_path(path: &[&Morphism]) -> Result<Morphism> {
    let (first, rest) = path
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty path".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, m| compose(&acc, m))
}

/// Pointwise application of `m` to the panel column of its source.
pub fn evaluate(m: &Morphism, panel: &Panel) -> Result<Series> {
    let input = if m.reads_input() {
        panel.column(m.source.as_str())?.clone()
    } else {
        Series::missing(panel.len())
    };
    apply(m, &input, panel)
}

fn apply(m: &Morphism, x: &Series, panel: &Panel) -> Result<Series> {
    let zip_with = |s: &Series, f: &dyn Fn(usize, f64, f64) -> Result<f64>| -> Result<Series> {
        x.values()
            .iter()
            .zip(s.values())
            .enumerate()
            .map(|(t, pair)| match pair {
                (Some(a), Some(b)) => f(t, *a, *b).map(Some),
                _ => Ok(None),
            })
            .collect::<Result<Vec<_>>>()
            .map(Series::from_options)
    };
    match &m.kind {
        MorphismKind::Affine { a, b } => Ok(x.map(|v| a * v + b)),
        MorphismKind::ScaleBySeries { series } => {
            let s = panel.column(series.as_str())?;
            zip_with(s, &|_, v, w| Ok(v * w))
        }
        MorphismKind::RiskDiscount { rho } => {
            let s = panel.column(rho.as_str())?;
            zip_with(s, &|t, v, r| {
                let denom = 1.0 + r;
                if denom == 0.0 {
                    Err(Error::DivisionByZero(Some(panel.dates()[t])))
                } else {
                    Ok(v / denom)
                }
            })
        }
        MorphismKind::Ratio { num, den } => {
            let n = panel.column(num.as_str())?;
            let d = panel.column(den.as_str())?;
            n.values()
                .iter()
                .zip(d.values())
                .enumerate()
                .map(|(t, pair)| match pair {
                    (Some(_), Some(b)) if *b == 0.0 => Err(Error::DivisionByZero(Some(panel.dates()[t]))),
                    (Some(a), Some(b)) => Ok(Some(a / b)),
                    _ => Ok(None),
                })
                .collect::<Result<Vec<_>>>()
                .map(Series::from_options)
        }
        MorphismKind::Chain { inner } => inner.iter().try_fold(x.clone(), |acc, step| apply(step, &acc, panel)),
    }
}

/// Largest absolute pointwise difference. A value present on one side only
/// counts as an infinite deviation.
pub fn max_deviation(a: &Series, b: &Series) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.values().iter().zip(b.values()).fold(0.0, |m, pair| match pair {
        (Some(x), Some(y)) => m.max((x - y).abs()),
        (None, None) => m,
        _ => f64::INFINITY,
    })
}

/// `1e-9 · max(1, max|v|)` over the given series.
pub fn default_tolerance<'a>(series: impl IntoIterator<Item = &'a Series>) -> f64 {
    let scale = series
        .into_iter()
        .flat_map(|s| s.present().map(f64::abs).collect::<Vec<_>>())
        .fold(1.0f64, f64::max);
    1e-9 * scale
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub name: String,
    #[serde(flatten)]
    pub morphism: Morphism,
}

impl Edge {
    pub fn new(name: impl Into<String>, morphism: Morphism) -> Self {
        Edge { name: name.into(), morphism }
    }
}

/// Two paths (lists of edge names, applied left to right) declared equal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathPair {
    pub left: Vec<String>,
    pub right: Vec<String>,
}

impl PathPair {
    pub fn new<S: Into<String>>(left: impl IntoIterator<Item = S>, right: impl IntoIterator<Item = S>) -> Self {
        PathPair {
            left: left.into_iter().map(Into::into).collect(),
            right: right.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagram {
    pub nodes: Vec<EconObject>,
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub equal_paths: Vec<PathPair>,
}

impl Diagram {
    /// Checks node uniqueness, that every edge endpoint is a node and that
    /// declared paths name existing edges.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for n in &self.nodes {
            if !seen.insert(&n.id) {
                return Err(Error::InvalidArgument(format!("duplicate object {}", n.id)));
            }
        }
        for e in &self.edges {
            for end in [&e.morphism.source, &e.morphism.target] {
                if !seen.contains(end) {
                    return Err(Error::UnknownVariable(end.to_string()));
                }
            }
        }
        for pair in &self.equal_paths {
            for name in pair.left.iter().chain(&pair.right) {
                self.edge(name)?;
            }
        }
        Ok(())
    }

    pub fn edge(&self, name: &str) -> Result<&Edge> {
        self.edges
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::UnknownEdge(name.to_owned()))
    }

    pub fn path(&self, names: &[String]) -> Result<Morphism> {
        let edges = names
            .iter()
            .map(|n| self.edge(n).map(|e| &e.morphism))
            .collect::<Result<Vec<_>>>()?;
        compose_path(&edges)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: Diagram = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathPairReport {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommuteReport {
    pub pairs: Vec<PathPairReport>,
    pub passed: bool,
}

/// Evaluates both sides of every declared path pair on `panel` and compares
/// them pointwise. `tol = None` uses [`default_tolerance`] per pair.
pub fn check_commutes(d: &Diagram, panel: &Panel, tol: Option<f64>) -> Result<CommuteReport> {
    let mut pairs = Vec::with_capacity(d.equal_paths.len());
    for pair in &d.equal_paths {
        let left = evaluate(&d.path(&pair.left)?, panel)?;
        let right = evaluate(&d.path(&pair.right)?, panel)?;
        let dev = max_deviation(&left, &right);
        let tolerance = tol.unwrap_or_else(|| default_tolerance([&left, &right]));
        pairs.push(PathPairReport {
            left: pair.left.clone(),
            right: pair.right.clone(),
            max_deviation: dev,
            tolerance,
            passed: dev <= tolerance,
        });
    }
    let passed = pairs.iter().all(|p| p.passed);
    Ok(CommuteReport { pairs, passed })
}

/// How a functor acts on morphisms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum MorphismMap {
    /// Same kind and parameters; endpoints and referenced variables renamed
    /// through the object map (variables outside it are kept).
    Structural,
    /// Every morphism goes to the identity on its mapped endpoints.
    Identities,
    /// Explicit pairs. Chains missing from the table map member-wise.
    Table { entries: Vec<(Morphism, Morphism)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Functor {
    pub name: String,
    pub object_map: BTreeMap<VariableId, VariableId>,
    pub morphism_map: MorphismMap,
}

impl Functor {
    pub fn identity<'a>(objects: impl IntoIterator<Item = &'a VariableId>) -> Self {
        Functor {
            name: "identity".into(),
            object_map: objects.into_iter().map(|o| (o.clone(), o.clone())).collect(),
            morphism_map: MorphismMap::Structural,
        }
    }

    pub fn map_object(&self, obj: &VariableId) -> Result<VariableId> {
        self.object_map
            .get(obj)
            .cloned()
            .ok_or_else(|| Error::UnmappedObject(obj.to_string()))
    }

    fn rename(&self, v: &VariableId) -> VariableId {
        self.object_map.get(v).cloned().unwrap_or_else(|| v.clone())
    }

    pub fn map_morphism(&self, m: &Morphism) -> Result<Morphism> {
        let source = self.map_object(&m.source)?;
        let target = self.map_object(&m.target)?;
        match &self.morphism_map {
            MorphismMap::Identities => Ok(Morphism::affine(source, target, 1.0, 0.0)),
            MorphismMap::Structural => {
                let kind = match &m.kind {
                    MorphismKind::Affine { a, b } => MorphismKind::Affine { a: *a, b: *b },
                    MorphismKind::ScaleBySeries { series } => {
                        MorphismKind::ScaleBySeries { series: self.rename(series) }
                    }
                    MorphismKind::Ratio { num, den } => {
                        MorphismKind::Ratio { num: self.rename(num), den: self.rename(den) }
                    }
                    MorphismKind::RiskDiscount { rho } => MorphismKind::RiskDiscount { rho: self.rename(rho) },
                    MorphismKind::Chain { inner } => MorphismKind::Chain {
                        inner: inner.iter().map(|x| self.map_morphism(x)).collect::<Result<_>>()?,
                    },
                };
                Ok(Morphism { source, target, kind })
            }
            MorphismMap::Table { entries } => {
                if let Some((_, image)) = entries.iter().find(|(k, _)| k == m) {
                    return Ok(image.clone());
                }
                if m.is_identity() {
                    return Ok(identity(&source));
                }
                match &m.kind {
                    MorphismKind::Chain { inner } => {
                        let mapped = inner.iter().map(|x| self.map_morphism(x)).collect::<Result<Vec<_>>>()?;
                        compose_path(&mapped.iter().collect::<Vec<_>>())
                    }
                    _ => Err(Error::UnmappedMorphism(m.to_string())),
                }
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Image of a diagram under `functor`. Objects that collapse onto the same
/// image appear once; edge names and declared paths carry over.
pub fn apply_functor(functor: &Functor, d: &Diagram) -> Result<Diagram> {
    let mut nodes: Vec<EconObject> = Vec::with_capacity(d.nodes.len());
    for n in &d.nodes {
        let id = functor.map_object(&n.id)?;
        if !nodes.iter().any(|x| x.id == id) {
            nodes.push(EconObject { id, description: n.description.clone() });
        }
    }
    let edges = d
        .edges
        .iter()
        .map(|e| Ok(Edge { name: e.name.clone(), morphism: functor.map_morphism(&e.morphism)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Diagram { nodes, edges, equal_paths: d.equal_paths.clone() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawCheck {
    pub law: String,
    pub subject: String,
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctorLawReport {
    pub functor: String,
    pub checks: Vec<LawCheck>,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Checks `F(id_X) = id_{F X}` for every endpoint of the samples and
/// `F(g∘f) = F(g)∘F(f)` for every composable ordered pair, by evaluating
/// both sides on `panel`.
pub fn check_functor_laws(
    functor: &Functor,
    samples: &[Morphism],
    panel: &Panel,
    tol: f64,
) -> Result<FunctorLawReport> {
    let mut checks = Vec::new();
    let mut objects: Vec<&VariableId> = samples.iter().flat_map(|m| [&m.source, &m.target]).collect();
    objects.sort();
    objects.dedup();
    for obj in objects {
        let image = functor.map_morphism(&identity(obj))?;
        let expected = identity(&functor.map_object(obj)?);
        let dev = if image == expected {
            0.0
        } else {
            max_deviation(&evaluate(&image, panel)?, &evaluate(&expected, panel)?)
        };
        checks.push(LawCheck {
            law: "identity".into(),
            subject: obj.to_string(),
            max_deviation: dev,
            passed: dev <= tol,
        });
    }
    for f in samples {
        for g in samples.iter().filter(|g| g.source == f.target) {
            let lhs = functor.map_morphism(&compose(f, g)?)?;
            let rhs = compose(&functor.map_morphism(f)?, &functor.map_morphism(g)?)?;
            let dev = max_deviation(&evaluate(&lhs, panel)?, &evaluate(&rhs, panel)?);
            checks.push(LawCheck {
                law: "composition".into(),
                subject: format!("({g}) after ({f})"),
                max_deviation: dev,
                passed: dev <= tol,
            });
        }
    }
    let max_deviation = checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
    Ok(FunctorLawReport {
        functor: functor.name.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        max_deviation,
    })
}

/// Functor that leaves objects alone and shifts the intercept of the listed
/// affine edges by `delta`, e.g. a rate hike `i ↦ i + Δ`. Other edges map to
/// themselves. Used to build post-policy ("primed") diagrams.
pub fn policy_functor(name: &str, d: &Diagram, shifted_edges: &[&str], delta: f64) -> Result<Functor> {
    let mut entries = Vec::new();
    for e in &d.edges {
        let image = match (&e.morphism.kind, shifted_edges.contains(&e.name.as_str())) {
            (MorphismKind::Affine { a, b }, true) => Morphism {
                kind: MorphismKind::Affine { a: *a, b: b + delta },
                ..e.morphism.clone()
            },
            (_, true) => {
                return Err(Error::InvalidArgument(format!("edge {} is not affine", e.name)));
            }
            _ => e.morphism.clone(),
        };
        entries.push((e.morphism.clone(), image));
    }
    Ok(Functor {
        name: name.to_owned(),
        object_map: d.nodes.iter().map(|n| (n.id.clone(), n.id.clone())).collect(),
        morphism_map: MorphismMap::Table { entries },
    })
}

/// Random morphisms between `objects`, drawing parameters from `params`.
///
/// Affine coefficients are multiples of 1/8 in [-2, 2] with `a ≠ 0`, so products
/// and sums of a few of them are exact in binary floating point and composed
/// affines are order-independent bit for bit.
pub fn random_morphisms<R: Rng>(rng: &mut R, objects: &[VariableId], params: &[VariableId], n: usize) -> Vec<Morphism> {
    assert!(!objects.is_empty() && !params.is_empty());
    let pick = |rng: &mut R, v: &[VariableId]| v[rng.random_range(0..v.len())].clone();
    let dyadic = |rng: &mut R| loop {
        let k: i32 = rng.random_range(-16..=16);
        if k != 0 {
            return k as f64 / 8.0;
        }
    };
    (0..n)
        .map(|_| {
            let source = pick(rng, objects);
            let target = pick(rng, objects);
            let kind = match rng.random_range(0..6) {
                0..=2 => MorphismKind::Affine { a: dyadic(rng), b: dyadic(rng) },
                3 => MorphismKind::ScaleBySeries { series: pick(rng, params) },
                4 => MorphismKind::RiskDiscount { rho: pick(rng, params) },
                _ => MorphismKind::Ratio { num: pick(rng, params), den: pick(rng, params) },
            };
            Morphism { source, target, kind }
        })
        .collect()
}

/// Objects of the two-currency category with the panel columns that proxy them.
pub fn standard_objects() -> Vec<EconObject> {
    [
        ("M2", "peso money demand L_ARS (proxied by M2)"),
        ("M2 Usd", "dollar money demand L_USD (proxied by M2 Usd)"),
        ("Pi Exp", "expected Argentine inflation"),
        ("Usa Pi Exp", "expected US inflation"),
        ("E", "devaluation expectation"),
        ("Gdp_argentina", "income Y"),
        ("Short Interest", "peso interest rate i_ARS"),
        ("Short Term Usd Rate", "dollar interest rate i_USD"),
        ("Embi+ARG", "sovereign risk premium"),
        ("Historical Ars Usd", "observed ARS/USD exchange rate"),
    ]
    .into_iter()
    .map(|(id, d)| EconObject::new(id, d))
    .collect()
}

/// A small diagram over canonical panel columns whose declared paths commute
/// on any data: peso conversion commutes with discounting at the peso rate,
/// and two routes from the short peso rate (percent) to a spread-adjusted
/// fraction agree.
pub fn standard_diagram() -> Diagram {
    let to_pesos = |src: &str, dst: &str| {
        Morphism::new(src, dst, MorphismKind::ScaleBySeries { series: "Historical Ars Usd".into() })
    };
    let discount = |src: &str, dst: &str| {
        Morphism::new(src, dst, MorphismKind::RiskDiscount { rho: "Short Interest".into() })
    };
    let nodes = [
        ("M2 Usd", "dollar money stock"),
        ("M2 Usd in pesos", "dollar money stock valued in pesos"),
        ("M2 Usd discounted", "dollar money stock discounted at the peso rate"),
        ("V", "discounted peso value of the dollar stock"),
        ("Short Interest", "peso short rate, percent"),
        ("short_fraction", "peso short rate as a fraction"),
        ("long_fraction_proxy", "peso short rate plus a fixed term spread, fraction"),
    ];
    Diagram {
        nodes: nodes.iter().map(|(id, d)| EconObject::new(*id, *d)).collect(),
        edges: vec![
            Edge::new("to_pesos", to_pesos("M2 Usd", "M2 Usd in pesos")),
            Edge::new("discount_pesos", discount("M2 Usd in pesos", "V")),
            Edge::new("discount", discount("M2 Usd", "M2 Usd discounted")),
            Edge::new("to_pesos_discounted", to_pesos("M2 Usd discounted", "V")),
            Edge::new("to_fraction", Morphism::affine("Short Interest", "short_fraction", 0.01, 0.0)),
            Edge::new("add_spread", Morphism::affine("short_fraction", "long_fraction_proxy", 1.0, 0.02)),
            Edge::new("direct", Morphism::affine("Short Interest", "long_fraction_proxy", 0.01, 0.02)),
        ],
        equal_paths: vec![
            PathPair::new(["to_pesos", "discount_pesos"], ["discount", "to_pesos_discounted"]),
            PathPair::new(["to_fraction", "add_spread"], ["direct"]),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn panel(cols: Vec<(&str, Vec<f64>)>) -> Panel {
        let n = cols[0].1.len();
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let dates = (0..n as u64).map(|i| start + chrono::Days::new(i)).collect();
        Panel::from_columns(dates, cols).unwrap()
    }

    fn v(s: &str) -> VariableId {
        VariableId::from(s)
    }

    #[test]
    fn affine_composition_is_canonical() {
        let f = Morphism::affine("x", "y", 2.0, 1.0);
        let g = Morphism::affine("y", "z", 3.0, 0.0);
        assert_eq!(compose(&f, &g).unwrap(), Morphism::affine("x", "z", 6.0, 3.0));
    }

    #[test]
    fn identity_laws_preserve_form() {
        let f = Morphism::new("x", "y", MorphismKind::RiskDiscount { rho: v("r") });
        assert_eq!(compose(&f, &identity(&v("y"))).unwrap(), f);
        assert_eq!(compose(&identity(&v("x")), &f).unwrap(), f);
        let a = Morphism::affine("x", "y", 0.5, -2.0);
        assert_eq!(compose(&a, &identity(&v("y"))).unwrap(), a);
    }

    #[test]
    fn incompatible_endpoints() {
        let f = Morphism::affine("x", "y", 1.0, 1.0);
        let g = Morphism::affine("z", "w", 1.0, 1.0);
        assert!(matches!(compose(&f, &g), Err(Error::IncompatibleEndpoints { .. })));
        assert!(Morphism::chain(vec![f.clone(), g]).is_err());
        assert!(Morphism::chain(vec![]).is_err());
    }

    #[test]
    fn evaluation_semantics() {
        let p = panel(vec![("L_ARS", vec![100.0]), ("L_USD", vec![2.0]), ("rho", vec![0.25]), ("zero", vec![0.0])]);
        let disc = Morphism::new("L_ARS", "L_ARS", MorphismKind::RiskDiscount { rho: v("rho") });
        assert_eq!(evaluate(&disc, &p).unwrap(), Series::from_values(vec![80.0]));
        let none = Morphism::new("L_ARS", "L_ARS", MorphismKind::RiskDiscount { rho: v("zero") });
        assert_eq!(evaluate(&none, &p).unwrap(), Series::from_values(vec![100.0]));

        let q = panel(vec![("L_ARS", vec![4.0]), ("L_USD", vec![2.0])]);
        let ratio = Morphism::new("L_ARS", "R", MorphismKind::Ratio { num: v("L_ARS"), den: v("L_USD") });
        assert_eq!(evaluate(&ratio, &q).unwrap(), Series::from_values(vec![2.0]));
        assert_eq!(evaluate(&identity(&v("L_USD")), &q).unwrap(), Series::from_values(vec![2.0]));
    }

    #[test]
    fn division_by_zero_carries_the_date() {
        let p = panel(vec![("x", vec![1.0, 1.0]), ("d", vec![1.0, 0.0]), ("r", vec![0.0, -1.0])]);
        let day2 = p.dates()[1];
        let ratio = Morphism::new("x", "y", MorphismKind::Ratio { num: v("x"), den: v("d") });
        assert_eq!(evaluate(&ratio, &p), Err(Error::DivisionByZero(Some(day2))));
        let disc = Morphism::new("x", "y", MorphismKind::RiskDiscount { rho: v("r") });
        assert_eq!(evaluate(&disc, &p), Err(Error::DivisionByZero(Some(day2))));
        let missing = Morphism::new("nope", "y", MorphismKind::Affine { a: 1.0, b: 0.0 });
        assert_eq!(evaluate(&missing, &p), Err(Error::UnknownVariable("nope".into())));
    }

    #[test]
    fn chains_flatten_in_order() {
        let f = Morphism::new("x", "y", MorphismKind::ScaleBySeries { series: v("s") });
        let g = Morphism::affine("y", "z", 2.0, 1.0);
        let h = Morphism::new("z", "w", MorphismKind::RiskDiscount { rho: v("s") });
        let left = compose(&compose(&f, &g).unwrap(), &h).unwrap();
        let right = compose(&f, &compose(&g, &h).unwrap()).unwrap();
        assert_eq!(left, right);
        match &left.kind {
            MorphismKind::Chain { inner } => assert_eq!(inner.len(), 3),
            other => panic!("expected chain, got {other:?}"),
        }
    }

    fn equilibrium_diagram() -> Diagram {
        let scale = |src: &str, s: &str| Morphism::new(src, "V", MorphismKind::ScaleBySeries { series: v(s) });
        Diagram {
            nodes: vec![EconObject::new("L_ARS", ""), EconObject::new("L_USD", ""), EconObject::new("V", "")],
            edges: vec![Edge::new("pi_ars", scale("L_ARS", "pi_ars")), Edge::new("pi_usd", scale("L_USD", "pi_usd"))],
            equal_paths: vec![PathPair::new(["pi_ars"], ["pi_usd"])],
        }
    }

    #[test]
    fn equilibrium_condition_commutes_on_matching_products() {
        let l_ars = vec![10.0, 20.0, 5.0];
        let pi_ars = vec![0.3, 0.1, 0.8];
        let l_usd = vec![2.0, 4.0, 8.0];
        let pi_usd: Vec<f64> = (0..3).map(|i| l_ars[i] * pi_ars[i] / l_usd[i]).collect();
        let p = panel(vec![
            ("L_ARS", l_ars.clone()),
            ("L_USD", l_usd.clone()),
            ("pi_ars", pi_ars.clone()),
            ("pi_usd", pi_usd.clone()),
        ]);
        let d = equilibrium_diagram();
        d.validate().unwrap();
        let tol = 1e-9;
        let report = check_commutes(&d, &p, Some(tol)).unwrap();
        assert!(report.passed, "{report:?}");

        // Perturb one product by 10·tol: deviation ≈ that perturbation.
        let mut bumped = pi_usd.clone();
        bumped[1] += 10.0 * tol / l_usd[1];
        let q = panel(vec![("L_ARS", l_ars), ("L_USD", l_usd), ("pi_ars", pi_ars), ("pi_usd", bumped)]);
        let report = check_commutes(&d, &q, Some(tol)).unwrap();
        assert!(!report.passed);
        assert!((report.pairs[0].max_deviation - 10.0 * tol).abs() < 1e-12);
        // Monotone in tolerance.
        assert!(check_commutes(&d, &q, Some(20.0 * tol)).unwrap().passed);
    }

    #[test]
    fn single_edge_composite_commutes_with_its_path() {
        let f = Morphism::affine("a", "b", 2.0, 1.0);
        let g = Morphism::new("b", "c", MorphismKind::ScaleBySeries { series: v("s") });
        let d = Diagram {
            nodes: ["a", "b", "c"].iter().map(|n| EconObject::new(*n, "")).collect(),
            edges: vec![
                Edge::new("f", f.clone()),
                Edge::new("g", g.clone()),
                Edge::new("gf", compose(&f, &g).unwrap()),
            ],
            equal_paths: vec![PathPair::new(["f", "g"], ["gf"])],
        };
        let p = panel(vec![("a", vec![1.0, 2.0, 3.0]), ("s", vec![0.5, -1.0, 4.0])]);
        let r = check_commutes(&d, &p, None).unwrap();
        assert!(r.passed);
        assert_eq!(r.pairs[0].max_deviation, 0.0);
    }

    #[test]
    fn standard_diagram_commutes_on_canonical_panel() {
        let d = standard_diagram();
        d.validate().unwrap();
        let p = crate::synth::canonical_panel(7, 200).unwrap();
        let r = check_commutes(&d, &p, None).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn diagram_validation_and_json() {
        let d = equilibrium_diagram();
        let back = Diagram::from_json(&d.to_json().unwrap()).unwrap();
        assert_eq!(back, d);
        let mut broken = d.clone();
        broken.nodes.pop();
        assert!(broken.validate().is_err());
        let mut broken = d;
        broken.equal_paths.push(PathPair::new(["nope"], ["pi_usd"]));
        assert_eq!(broken.validate(), Err(Error::UnknownEdge("nope".into())));
    }

    #[test]
    fn functor_images() {
        let d = equilibrium_diagram();
        let ids: Vec<VariableId> = d.nodes.iter().map(|n| n.id.clone()).collect();
        assert_eq!(apply_functor(&Functor::identity(&ids), &d).unwrap(), d);

        let renaming = Functor {
            name: "rename".into(),
            object_map: [("L_ARS", "M2"), ("L_USD", "M2 Usd"), ("V", "V")]
                .into_iter()
                .map(|(a, b)| (v(a), v(b)))
                .collect(),
            morphism_map: MorphismMap::Structural,
        };
        let image = apply_functor(&renaming, &d).unwrap();
        assert_eq!(image.nodes[0].id, v("M2"));
        for (a, b) in d.edges.iter().zip(&image.edges) {
            assert_eq!(std::mem::discriminant(&a.morphism.kind), std::mem::discriminant(&b.morphism.kind));
        }

        let collapse = Functor {
            name: "collapse".into(),
            object_map: ids.iter().map(|o| (o.clone(), v("pt"))).collect(),
            morphism_map: MorphismMap::Identities,
        };
        let image = apply_functor(&collapse, &d).unwrap();
        assert_eq!(image.nodes.len(), 1);
        let p = panel(vec![("pt", vec![1.0, -3.0])]);
        assert!(check_commutes(&image, &p, Some(0.0)).unwrap().passed);

        let partial = Functor { object_map: BTreeMap::new(), ..renaming };
        assert_eq!(apply_functor(&partial, &d), Err(Error::UnmappedObject("L_ARS".into())));
    }

    #[test]
    fn functor_laws() {
        let p = panel(vec![("x", vec![1.0, 2.0, -4.0]), ("y", vec![0.5, 0.25, 3.0])]);
        let f = Morphism::affine("x", "y", 2.0, 1.0);
        let g = Morphism::affine("y", "x", 3.0, 0.0);
        let samples = vec![f.clone(), g.clone()];
        let id = Functor::identity(&[v("x"), v("y")]);
        let r = check_functor_laws(&id, &samples, &p, 0.0).unwrap();
        assert!(r.passed);
        assert_eq!(r.max_deviation, 0.0);

        // Copying affines verbatim through a table is a functor too.
        let copy = Functor {
            name: "copy".into(),
            object_map: id.object_map.clone(),
            morphism_map: MorphismMap::Table { entries: vec![(f.clone(), f.clone()), (g.clone(), g.clone())] },
        };
        let composites: Vec<Morphism> = vec![compose(&f, &g).unwrap(), compose(&g, &f).unwrap()];
        let copy = Functor {
            morphism_map: match copy.morphism_map {
                MorphismMap::Table { mut entries } => {
                    entries.extend(composites.iter().map(|c| (c.clone(), c.clone())));
                    MorphismMap::Table { entries }
                }
                other => other,
            },
            ..copy
        };
        assert!(check_functor_laws(&copy, &samples, &p, 1e-12).unwrap().passed);

        // Hand-built violation: the composite is sent somewhere else.
        let bad = Functor {
            name: "bad".into(),
            object_map: id.object_map.clone(),
            morphism_map: MorphismMap::Table {
                entries: vec![
                    (f.clone(), f.clone()),
                    (g.clone(), g.clone()),
                    (compose(&f, &g).unwrap(), Morphism::affine("x", "x", 6.0, 4.0)),
                    (composites[1].clone(), composites[1].clone()),
                ],
            },
        };
        let r = check_functor_laws(&bad, &samples, &p, 1e-9).unwrap();
        assert!(!r.passed);
        assert!((r.max_deviation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn policy_functor_shifts_intercepts() {
        let d = Diagram {
            nodes: vec![EconObject::new("i", ""), EconObject::new("L", "")],
            edges: vec![Edge::new("demand", Morphism::affine("i", "L", -0.5, 10.0))],
            equal_paths: vec![],
        };
        let f = policy_functor("hike", &d, &["demand"], 2.0).unwrap();
        let primed = apply_functor(&f, &d).unwrap();
        assert_eq!(primed.edges[0].morphism.kind, MorphismKind::Affine { a: -0.5, b: 12.0 });
    }

    #[test]
    fn morphism_json_shape() {
        let m = Morphism::new("a", "b", MorphismKind::Ratio { num: v("n"), den: v("d") });
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json["kind"], "ratio");
        assert_eq!(json["num"], "n");
        assert_eq!(serde_json::from_value::<Morphism>(json).unwrap(), m);
    }
}
