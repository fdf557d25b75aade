//! Single-locus program mutators.
//!
//! Each mutator changes exactly one thing (a language tag, a method, a type
//! site, or the order of a supertype list) and returns a [`MutationRecord`]
//! that can replay or revert the edit. Mutated programs stay structurally
//! valid but their semantic validity is unknown.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ir::{Builtin, IrProgram, Lang, MethodDecl, MethodRef, SuperTypeRef, TypeRef};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MutatorKind {
    LangShuffler,
    FunctionRemoval,
    TypeChanger,
    SupertypeOrder,
}

impl MutatorKind {
    pub const ALL: [MutatorKind; 4] =
        [MutatorKind::LangShuffler, MutatorKind::FunctionRemoval, MutatorKind::TypeChanger, MutatorKind::SupertypeOrder];

    pub fn display_name(self) -> &'static str {
        match self {
            MutatorKind::LangShuffler => "LangShuffler",
            MutatorKind::FunctionRemoval => "FunctionRemoval",
            MutatorKind::TypeChanger => "TypeChanger",
            MutatorKind::SupertypeOrder => "SupertypeOrder",
        }
    }
}

impl fmt::Display for MutatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl std::str::FromStr for MutatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        MutatorKind::ALL
            .into_iter()
            .find(|k| k.display_name().to_ascii_lowercase() == norm)
            .ok_or_else(|| format!("unknown mutator `{s}`"))
    }
}

/// A single mutable type usage inside a declaration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "site", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TypeSite {
    SuperArg { supertype: usize, arg: usize },
    Param { method: String, index: usize },
    Return { method: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Locus {
    pub decl: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<TypeSite>,
}

/// Audit entry for one mutation; `before`/`after` are JSON fragments of
/// the edited locus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationRecord {
    pub mutator: MutatorKind,
    pub target: Locus,
    pub before: Value,
    pub after: Value,
    /// Draw index of the generator stream when the mutation started.
    pub seed: u64,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum MutationError {
    #[error("no {0} mutation possible: {1}")]
    NoMutationPossible(MutatorKind, String),
    #[error("record does not apply: {0}")]
    Replay(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MutatorConfig {
    pub languages: BTreeSet<Lang>,
    /// Builtins the type changer may draw. `UNIT` is only used at return sites.
    pub builtins: Vec<Builtin>,
    pub enabled: BTreeSet<MutatorKind>,
}

impl Default for MutatorConfig {
    fn default() -> Self {
        MutatorConfig {
            languages: [Lang::Java, Lang::Kotlin].into_iter().collect(),
            builtins: Builtin::ALL.to_vec(),
            enabled: [MutatorKind::LangShuffler, MutatorKind::FunctionRemoval, MutatorKind::TypeChanger]
                .into_iter()
                .collect(),
        }
    }
}

type Mutation = Result<(IrProgram, MutationRecord), MutationError>;

fn finish(program: &IrProgram, record: MutationRecord) -> Mutation {
    let out = record.replay(program)?;
    Ok((out, record))
}

/// Java plus at most one other language.
fn lang_mix_ok(langs: &BTreeSet<Lang>) -> bool {
    langs.iter().filter(|l| **l != Lang::Java).count() <= 1
}

/// Changes the language tag of one declaration.
pub fn lang_shuffler(program: &IrProgram, rng: &mut Rng, config: &MutatorConfig) -> Mutation {
    let seed = rng.draws();
    if config.languages.len() < 2 {
        return Err(MutationError::NoMutationPossible(MutatorKind::LangShuffler, "language set is a singleton".into()));
    }
    let mut moves = Vec::new();
    for (i, d) in program.declarations.iter().enumerate() {
        for &l in &config.languages {
            if l == d.lang {
                continue;
            }
            let langs: BTreeSet<Lang> =
                program.declarations.iter().enumerate().map(|(j, e)| if j == i { l } else { e.lang }).collect();
            if lang_mix_ok(&langs) {
                moves.push((i, l));
            }
        }
    }
    let Some(&(i, l)) = rng.choose(&moves) else {
        return Err(MutationError::NoMutationPossible(MutatorKind::LangShuffler, "no retag keeps the language mix".into()));
    };
    let d = &program.declarations[i];
    finish(
        program,
        MutationRecord {
            mutator: MutatorKind::LangShuffler,
            target: Locus { decl: d.name.clone(), method: None, site: None },
            before: json!(d.lang),
            after: json!(l),
            seed,
        },
    )
}

/// Removes one method, dropping `overrides` references to it.
pub fn function_removal(program: &IrProgram, rng: &mut Rng) -> Mutation {
    let seed = rng.draws();
    let all: Vec<(usize, usize)> = program
        .declarations
        .iter()
        .enumerate()
        .flat_map(|(i, d)| (0..d.methods.len()).map(move |k| (i, k)))
        .collect();
    let Some(&(i, k)) = rng.choose(&all) else {
        return Err(MutationError::NoMutationPossible(MutatorKind::FunctionRemoval, "program has no methods".into()));
    };
    finish(program, removal_record(program, i, k, seed))
}

/// Record that removes method `k` of declaration `i`.
pub fn removal_record(program: &IrProgram, i: usize, k: usize, seed: u64) -> MutationRecord {
    let d = &program.declarations[i];
    let m = &d.methods[k];
    let removed = MethodRef::new(d.name.clone(), m.name.clone());
    let pruned: Vec<Value> = program
        .declarations
        .iter()
        .flat_map(|e| {
            e.methods
                .iter()
                .filter(|n| !(e.name == d.name && n.name == m.name) && n.overrides.contains(&removed))
                .map(move |n| json!({"decl": e.name, "method": n.name}))
        })
        .collect();
    MutationRecord {
        mutator: MutatorKind::FunctionRemoval,
        target: Locus { decl: d.name.clone(), method: Some(m.name.clone()), site: None },
        before: json!({"index": k, "method": m, "pruned": pruned}),
        after: Value::Null,
        seed,
    }
}

/// Every type site of every declaration, in declaration order.
pub fn type_sites(program: &IrProgram) -> Vec<(usize, TypeSite)> {
    let mut out = Vec::new();
    for (i, d) in program.declarations.iter().enumerate() {
        for (s, st) in d.supertypes.iter().enumerate() {
            for a in 0..st.args.len() {
                out.push((i, TypeSite::SuperArg { supertype: s, arg: a }));
            }
        }
        for m in &d.methods {
            for p in 0..m.params.len() {
                out.push((i, TypeSite::Param { method: m.name.clone(), index: p }));
            }
            out.push((i, TypeSite::Return { method: m.name.clone() }));
        }
    }
    out
}

pub fn site_type<'a>(program: &'a IrProgram, decl: usize, site: &TypeSite) -> Option<&'a TypeRef> {
    let d = program.declarations.get(decl)?;
    match site {
        TypeSite::SuperArg { supertype, arg } => d.supertypes.get(*supertype)?.args.get(*arg),
        TypeSite::Param { method, index } => Some(&d.method(method)?.params.get(*index)?.ty),
        TypeSite::Return { method } => Some(&d.method(method)?.return_type),
    }
}

pub(crate) fn site_type_mut<'a>(program: &'a mut IrProgram, decl: &str, site: &TypeSite) -> Option<&'a mut TypeRef> {
    let d = program.decl_mut(decl)?;
    match site {
        TypeSite::SuperArg { supertype, arg } => d.supertypes.get_mut(*supertype)?.args.get_mut(*arg),
        TypeSite::Param { method, index } => {
            Some(&mut d.methods.iter_mut().find(|m| m.name == *method)?.params.get_mut(*index)?.ty)
        }
        TypeSite::Return { method } => Some(&mut d.methods.iter_mut().find(|m| m.name == *method)?.return_type),
    }
}

/// Replacement candidates for a site: configured builtins, non-generic
/// declarations, and the enclosing declaration's type parameters.
fn site_alternatives(program: &IrProgram, decl: usize, site: &TypeSite, config: &MutatorConfig) -> Vec<TypeRef> {
    let d = &program.declarations[decl];
    let current = site_type(program, decl, site);
    let allow_unit = matches!(site, TypeSite::Return { .. });
    let mut pool: Vec<TypeRef> = config
        .builtins
        .iter()
        .filter(|b| allow_unit || **b != Builtin::Unit)
        .map(|b| TypeRef::builtin(*b))
        .collect();
    pool.extend(program.declarations.iter().filter(|e| e.type_params.is_empty()).map(|e| TypeRef::simple(e.name.clone())));
    pool.extend(d.type_params.iter().map(|t| TypeRef::param(t.name.clone())));
    pool.retain(|t| Some(t) != current);
    pool
}

/// Replaces one type usage with a different, arity-correct type.
pub fn type_changer(program: &IrProgram, rng: &mut Rng, config: &MutatorConfig) -> Mutation {
    let seed = rng.draws();
    let sites: Vec<(usize, TypeSite, Vec<TypeRef>)> = type_sites(program)
        .into_iter()
        .map(|(i, s)| {
            let alts = site_alternatives(program, i, &s, config);
            (i, s, alts)
        })
        .filter(|(_, _, alts)| !alts.is_empty())
        .collect();
    if sites.is_empty() {
        return Err(MutationError::NoMutationPossible(MutatorKind::TypeChanger, "no type site with an alternative".into()));
    }
    let (i, site, alts) = &sites[rng.below(sites.len())];
    let new = rng.choose(alts).unwrap().clone();
    let old = site_type(program, *i, site).unwrap().clone();
    let d = &program.declarations[*i];
    let method = match site {
        TypeSite::Param { method, .. } | TypeSite::Return { method } => Some(method.clone()),
        TypeSite::SuperArg { .. } => None,
    };
    finish(
        program,
        MutationRecord {
            mutator: MutatorKind::TypeChanger,
            target: Locus { decl: d.name.clone(), method, site: Some(site.clone()) },
            before: json!(old),
            after: json!(new),
            seed,
        },
    )
}

/// Permutes the supertype list of one declaration.
pub fn supertype_order_shuffle(program: &IrProgram, rng: &mut Rng) -> Mutation {
    let seed = rng.draws();
    let candidates: Vec<usize> =
        program.declarations.iter().enumerate().filter(|(_, d)| d.supertypes.len() >= 2).map(|(i, _)| i).collect();
    let Some(&i) = rng.choose(&candidates) else {
        return Err(MutationError::NoMutationPossible(MutatorKind::SupertypeOrder, "no declaration has two supertypes".into()));
    };
    let d = &program.declarations[i];
    let mut order: Vec<usize> = (0..d.supertypes.len()).collect();
    rng.shuffle(&mut order);
    if order.iter().enumerate().all(|(a, b)| a == *b) {
        order.swap(0, 1);
    }
    let permuted: Vec<SuperTypeRef> = order.iter().map(|&k| d.supertypes[k].clone()).collect();
    finish(
        program,
        MutationRecord {
            mutator: MutatorKind::SupertypeOrder,
            target: Locus { decl: d.name.clone(), method: None, site: None },
            before: json!(d.supertypes),
            after: json!(permuted),
            seed,
        },
    )
}

pub fn mutate(program: &IrProgram, kind: MutatorKind, rng: &mut Rng, config: &MutatorConfig) -> Mutation {
    match kind {
        MutatorKind::LangShuffler => lang_shuffler(program, rng, config),
        MutatorKind::FunctionRemoval => function_removal(program, rng),
        MutatorKind::TypeChanger => type_changer(program, rng, config),
        MutatorKind::SupertypeOrder => supertype_order_shuffle(program, rng),
    }
}

/// Applies one mutator drawn uniformly from the enabled set; inapplicable
/// draws fall through to the remaining enabled mutators.
pub fn mutate_random(program: &IrProgram, rng: &mut Rng, config: &MutatorConfig) -> Mutation {
    let mut kinds: Vec<MutatorKind> = config.enabled.iter().copied().collect();
    let mut last = MutationError::NoMutationPossible(
        MutatorKind::LangShuffler,
        "no mutator enabled".into(),
    );
    while !kinds.is_empty() {
        let k = kinds.remove(rng.below(kinds.len()));
        match mutate(program, k, rng, config) {
            Ok(r) => return Ok(r),
            Err(e) => last = e,
        }
    }
    Err(last)
}

impl MutationRecord {
    /// Applies the record to its pre-image and appends it to provenance.
    pub fn replay(&self, pre: &IrProgram) -> Result<IrProgram, MutationError> {
        let mut out = pre.clone();
        self.apply(&mut out, true)?;
        out.provenance.push(self.clone());
        Ok(out)
    }

    /// Undoes the record on its post-image.
    pub fn revert(&self, post: &IrProgram) -> Result<IrProgram, MutationError> {
        let mut out = post.clone();
        if out.provenance.last() != Some(self) {
            return Err(MutationError::Replay("record is not the last provenance entry".into()));
        }
        out.provenance.pop();
        self.apply(&mut out, false)?;
        Ok(out)
    }

    fn apply(&self, program: &mut IrProgram, forward: bool) -> Result<(), MutationError> {
        let bad = |m: &str| MutationError::Replay(m.to_string());
        let value = if forward { &self.after } else { &self.before };
        let decl_name = &self.target.decl;
        match self.mutator {
            MutatorKind::LangShuffler => {
                let lang: Lang = serde_json::from_value(value.clone()).map_err(|e| bad(&e.to_string()))?;
                program.decl_mut(decl_name).ok_or_else(|| bad("missing declaration"))?.lang = lang;
            }
            MutatorKind::SupertypeOrder => {
                let list: Vec<SuperTypeRef> = serde_json::from_value(value.clone()).map_err(|e| bad(&e.to_string()))?;
                program.decl_mut(decl_name).ok_or_else(|| bad("missing declaration"))?.supertypes = list;
            }
            MutatorKind::TypeChanger => {
                let ty: TypeRef = serde_json::from_value(value.clone()).map_err(|e| bad(&e.to_string()))?;
                let site = self.target.site.as_ref().ok_or_else(|| bad("type change without site"))?;
                *site_type_mut(program, decl_name, site).ok_or_else(|| bad("missing type site"))? = ty;
            }
            MutatorKind::FunctionRemoval => {
                let index = self.before["index"].as_u64().ok_or_else(|| bad("missing index"))? as usize;
                let method: MethodDecl =
                    serde_json::from_value(self.before["method"].clone()).map_err(|e| bad(&e.to_string()))?;
                let removed = MethodRef::new(decl_name.clone(), method.name.clone());
                let pruned: Vec<MethodRef> =
                    serde_json::from_value(self.before["pruned"].clone()).map_err(|e| bad(&e.to_string()))?;
                let d = program.decl_mut(decl_name).ok_or_else(|| bad("missing declaration"))?;
                if forward {
                    if d.methods.get(index).map(|m| &m.name) != Some(&method.name) {
                        return Err(bad("method not at recorded index"));
                    }
                    d.methods.remove(index);
                } else {
                    if index > d.methods.len() {
                        return Err(bad("recorded index out of range"));
                    }
                    d.methods.insert(index, method);
                }
                for p in &pruned {
                    let owner = program.decl_mut(&p.decl).ok_or_else(|| bad("missing pruned owner"))?;
                    let m = owner.methods.iter_mut().find(|m| m.name == p.method).ok_or_else(|| bad("missing pruned method"))?;
                    if forward {
                        m.overrides.remove(&removed);
                    } else {
                        m.overrides.insert(removed.clone());
                    }
                }
            }
        }
        Ok(())
    }

    /// JSON pointer prefixes (into the pre-image with provenance removed)
    /// that this record is allowed to change.
    pub fn touched_paths(&self, pre: &IrProgram) -> Vec<String> {
        let Some(i) = pre.decl_index(&self.target.decl) else { return Vec::new() };
        let d = &pre.declarations[i];
        let method_index = |name: &str| d.methods.iter().position(|m| m.name == name);
        match self.mutator {
            MutatorKind::LangShuffler => vec![format!("/declarations/{i}/lang")],
            MutatorKind::SupertypeOrder => vec![format!("/declarations/{i}/supertypes")],
            MutatorKind::TypeChanger => match &self.target.site {
                Some(TypeSite::SuperArg { supertype, arg }) => {
                    vec![format!("/declarations/{i}/supertypes/{supertype}/args/{arg}")]
                }
                Some(TypeSite::Param { method, index }) => method_index(method)
                    .map(|k| vec![format!("/declarations/{i}/methods/{k}/params/{index}/type")])
                    .unwrap_or_default(),
                Some(TypeSite::Return { method }) => method_index(method)
                    .map(|k| vec![format!("/declarations/{i}/methods/{k}/return_type")])
                    .unwrap_or_default(),
                None => Vec::new(),
            },
            MutatorKind::FunctionRemoval => {
                let mut out = vec![format!("/declarations/{i}/methods")];
                let pruned: Vec<MethodRef> = serde_json::from_value(self.before["pruned"].clone()).unwrap_or_default();
                for p in pruned {
                    if let Some(j) = pre.decl_index(&p.decl) {
                        if let Some(k) = pre.declarations[j].methods.iter().position(|m| m.name == p.method) {
                            out.push(format!("/declarations/{j}/methods/{k}/overrides"));
                        }
                    }
                }
                out
            }
        }
    }
}

/// JSON pointers at which two documents differ. Arrays of different length
/// are reported as a whole.
pub fn json_diff_paths(a: &Value, b: &Value) -> Vec<String> {
    fn go(a: &Value, b: &Value, path: &mut String, out: &mut Vec<String>) {
        match (a, b) {
            (Value::Object(x), Value::Object(y)) => {
                let keys: BTreeSet<&String> = x.keys().chain(y.keys()).collect();
                for k in keys {
                    let len = path.len();
                    path.push('/');
                    path.push_str(k);
                    go(x.get(k).unwrap_or(&Value::Null), y.get(k).unwrap_or(&Value::Null), path, out);
                    path.truncate(len);
                }
            }
            (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
                for (i, (p, q)) in x.iter().zip(y).enumerate() {
                    let len = path.len();
                    path.push_str(&format!("/{i}"));
                    go(p, q, path, out);
                    path.truncate(len);
                }
            }
            _ if a == b => {}
            _ => out.push(path.clone()),
        }
    }
    let mut out = Vec::new();
    go(a, b, &mut String::new(), &mut out);
    out
}
