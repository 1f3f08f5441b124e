use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;

use crate::graph::GraphSchema;
use crate::regex::StateId;

use super::expr::Expr;
use super::value::{ScalarKind, Value, ValueKind};

/// An NFA transition `(from_state, to_state)`.
pub type Transition = (StateId, StateId);

/// Ordered dictionary layout. Slot order is the flattened column order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DictionarySchema {
    entries: Vec<(String, ValueKind)>,
}

impl DictionarySchema {
    pub fn new<I, K>(entries: I) -> Self
    where
        I: IntoIterator<Item = (K, ValueKind)>,
        K: Into<String>,
    {
        DictionarySchema {
            entries: entries.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn entries(&self) -> &[(String, ValueKind)] {
        &self.entries
    }

    pub fn keys(&self) -> Vec<String> {
        self.entries.iter().map(|(k, _)| k.clone()).collect()
    }

    pub fn kind(&self, key: &str) -> Option<ValueKind> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn slot(&self, key: &str) -> Option<usize> {
        self.entries.iter().position(|(k, _)| k == key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, key: impl Into<String>, kind: ValueKind) {
        self.entries.push((key.into(), kind));
    }
}

/// A per-transition function table, or a single transition-independent
/// entry when the aggregate is factorized.
#[derive(Debug, Clone, PartialEq)]
pub enum PerTransition<T> {
    Factorized(T),
    Keyed(BTreeMap<Transition, T>),
}

impl<T> PerTransition<T> {
    pub fn get(&self, from: StateId, to: StateId) -> Option<&T> {
        match self {
            PerTransition::Factorized(v) => Some(v),
            PerTransition::Keyed(m) => m.get(&(from, to)),
        }
    }

    pub fn is_factorized(&self) -> bool {
        matches!(self, PerTransition::Factorized(_))
    }

    pub fn values(&self) -> Box<dyn Iterator<Item = &T> + '_> {
        match self {
            PerTransition::Factorized(v) => Box::new(std::iter::once(v)),
            PerTransition::Keyed(m) => Box::new(m.values()),
        }
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> PerTransition<U> {
        match self {
            PerTransition::Factorized(v) => PerTransition::Factorized(f(v)),
            PerTransition::Keyed(m) => {
                PerTransition::Keyed(m.iter().map(|(k, v)| (*k, f(v))).collect())
            }
        }
    }
}

/// Map from dictionary key to the expression computing its new value.
/// Keys without an entry keep their value.
pub type UpdateMap = IndexMap<String, Expr>;

#[derive(Debug, Clone, PartialEq)]
pub struct SelectiveAggregateSpec {
    pub schema: DictionarySchema,
    pub init: IndexMap<String, Expr>,
    pub update: PerTransition<UpdateMap>,
    pub viable: PerTransition<Expr>,
    pub finalize: IndexMap<String, Expr>,
    pub viable_final: Expr,
}

impl SelectiveAggregateSpec {
    /// The aggregate that keeps no state and accepts everything.
    pub fn always_true() -> Self {
        SelectiveAggregateSpec {
            schema: DictionarySchema::default(),
            init: IndexMap::new(),
            update: PerTransition::Factorized(IndexMap::new()),
            viable: PerTransition::Factorized(Expr::t()),
            finalize: IndexMap::new(),
            viable_final: Expr::t(),
        }
    }

    pub fn is_factorized(&self) -> bool {
        self.update.is_factorized() && self.viable.is_factorized()
    }

    /// Initial dictionary values, in schema order.
    pub fn initial_values(&self) -> Vec<Option<&Expr>> {
        self.schema
            .entries()
            .iter()
            .map(|(k, _)| self.init.get(k))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathQuerySpec {
    pub name: Option<String>,
    pub start_vertices: Vec<String>,
    pub regex: String,
    pub aggregate: SelectiveAggregateSpec,
    pub max_length: usize,
}

impl fmt::Display for PathQuerySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] from {:?} up to {}",
            self.name.as_deref().unwrap_or("query"),
            self.regex,
            self.start_vertices,
            self.max_length
        )
    }
}

fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (2..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken.contains(n))
        .unwrap()
}

fn merge_maps(a: &UpdateMap, b: &UpdateMap) -> UpdateMap {
    let mut out = a.clone();
    out.extend(b.iter().map(|(k, v)| (k.clone(), v.clone())));
    out
}

fn combine<T: Clone>(
    a: &PerTransition<T>,
    b: &PerTransition<T>,
    both: impl Fn(&T, &T) -> T,
) -> PerTransition<T> {
    use PerTransition::*;
    match (a, b) {
        (Factorized(x), Factorized(y)) => Factorized(both(x, y)),
        (Keyed(m), Factorized(y)) => Keyed(m.iter().map(|(k, x)| (*k, both(x, y))).collect()),
        (Factorized(x), Keyed(m)) => Keyed(m.iter().map(|(k, y)| (*k, both(x, y))).collect()),
        (Keyed(m), Keyed(n)) => {
            let keys: BTreeSet<&Transition> = m.keys().chain(n.keys()).collect();
            Keyed(
                keys.into_iter()
                    .map(|k| {
                        let v = match (m.get(k), n.get(k)) {
                            (Some(x), Some(y)) => both(x, y),
                            (Some(x), None) | (None, Some(x)) => x.clone(),
                            (None, None) => unreachable!(),
                        };
                        (*k, v)
                    })
                    .collect(),
            )
        }
    }
}

/// Conjoins two selective aggregates. Keys of `b` that collide with keys of
/// `a` get a `_2` suffix (then `_3`, ...) and `b`'s references follow.
pub fn compose(a: &SelectiveAggregateSpec, b: &SelectiveAggregateSpec) -> SelectiveAggregateSpec {
    let mut taken: BTreeSet<String> = a.schema.entries().iter().map(|(k, _)| k.clone()).collect();
    let mut renames: BTreeMap<String, String> = BTreeMap::new();
    let mut schema = a.schema.clone();
    for (k, kind) in b.schema.entries() {
        let name = fresh_name(k, &taken);
        taken.insert(name.clone());
        renames.insert(k.clone(), name.clone());
        schema.push(name, *kind);
    }
    let rn = |k: &str| renames.get(k).cloned().unwrap_or_else(|| k.to_string());
    let rename_map = |m: &UpdateMap| -> UpdateMap {
        m.iter()
            .map(|(k, e)| (rn(k), e.rename_dict(&rn)))
            .collect()
    };

    let b_init = rename_map(&b.init);
    let b_update = b.update.map(rename_map);
    let b_viable = b.viable.map(|e| e.rename_dict(&rn));

    let mut init = a.init.clone();
    init.extend(b_init);

    let mut out_taken: BTreeSet<String> = a.finalize.keys().cloned().collect();
    let mut finalize = a.finalize.clone();
    for (k, e) in &b.finalize {
        let name = fresh_name(k, &out_taken);
        out_taken.insert(name.clone());
        finalize.insert(name, e.rename_dict(&rn));
    }

    SelectiveAggregateSpec {
        schema,
        init,
        update: combine(&a.update, &b_update, merge_maps),
        viable: combine(&a.viable, &b_viable, |x, y| Expr::and([x.clone(), y.clone()])),
        finalize,
        viable_final: Expr::and([a.viable_final.clone(), b.viable_final.rename_dict(&rn)]),
    }
}

/// Dictionary key holding the collected values of `prop`.
pub fn collected_key(prop: &str) -> String {
    format!("{prop}_list")
}

fn collected_source(prop: &str, g_schema: &GraphSchema) -> (Expr, ScalarKind) {
    match prop {
        "id" => (Expr::EdgeId, ScalarKind::String),
        "label" => (Expr::EdgeLabel, ScalarKind::String),
        p => (
            Expr::edge(p),
            g_schema.kind(p).map(ScalarKind::from).unwrap_or(ScalarKind::String),
        ),
    }
}

/// The no-early-filtering aggregate: collect each listed property (`id` and
/// `label` name the edge id and label) into a list and check `phi` on the
/// complete path only. `phi` refers to the lists as `<prop>_list`.
pub fn default_construction(
    phi: Expr,
    collected_props: &[&str],
    g_schema: &GraphSchema,
) -> SelectiveAggregateSpec {
    let mut schema = DictionarySchema::default();
    let mut init = IndexMap::new();
    let mut update = IndexMap::new();
    for prop in collected_props {
        let key = collected_key(prop);
        let (source, kind) = collected_source(prop, g_schema);
        schema.push(key.clone(), ValueKind::List(kind));
        init.insert(key.clone(), Expr::lit(Value::empty_list()));
        update.insert(key.clone(), Expr::list_append(Expr::dict(&key), source));
    }
    let finalize = schema
        .entries()
        .iter()
        .map(|(k, _)| (k.clone(), Expr::dict(k)))
        .collect();
    SelectiveAggregateSpec {
        schema,
        init,
        update: PerTransition::Factorized(update),
        viable: PerTransition::Factorized(Expr::t()),
        finalize,
        viable_final: phi,
    }
}
