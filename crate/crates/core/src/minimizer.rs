//! Automated reduction of trigger programs.
//!
//! Passes are tried in priority order. A candidate that still reproduces
//! the original signature is kept and the search restarts from the top;
//! one that loses the bug is rolled back; one that produces a different
//! flagged signature is rolled back and reported as a forked finding.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::harness::{self, HarnessError, RunDirs, TestMode, TestVerdict, ToolchainPlan};
use crate::ir::{validate_with, Builtin, IrProgram, Lang, MethodRef, TypeRef, ValidationMode};
use crate::mutators::{self, TypeSite};
use crate::render;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReductionPassKind {
    RemoveMethod,
    FlattenLanguage,
    ReplaceCustomType,
    ConcretizeTypeParam,
    RemoveTypeParam,
    RemoveDecl,
    ReorderSupertypes,
}

impl ReductionPassKind {
    /// Priority order, highest first.
    pub const ALL: [ReductionPassKind; 7] = [
        ReductionPassKind::RemoveMethod,
        ReductionPassKind::FlattenLanguage,
        ReductionPassKind::ReplaceCustomType,
        ReductionPassKind::ConcretizeTypeParam,
        ReductionPassKind::RemoveTypeParam,
        ReductionPassKind::RemoveDecl,
        ReductionPassKind::ReorderSupertypes,
    ];

    /// Reordering never shrinks the program, so it is only ever explored
    /// for new findings and always rolled back.
    pub fn is_exploratory(self) -> bool {
        self == ReductionPassKind::ReorderSupertypes
    }
}

/// Path to a node inside a type tree, as argument indices from the root.
pub type NodePath = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "pass", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReductionPass {
    RemoveMethod { decl: String, method: String },
    FlattenLanguage { decl: String },
    ReplaceCustomType { decl: String, site: TypeSite, node: NodePath, replacement: Builtin },
    ConcretizeTypeParam { decl: String, site: TypeSite, node: NodePath },
    RemoveTypeParam { decl: String, param: String },
    RemoveDecl { decl: String },
    ReorderSupertypes { decl: String, order: Vec<usize> },
}

impl ReductionPass {
    pub fn kind(&self) -> ReductionPassKind {
        match self {
            ReductionPass::RemoveMethod { .. } => ReductionPassKind::RemoveMethod,
            ReductionPass::FlattenLanguage { .. } => ReductionPassKind::FlattenLanguage,
            ReductionPass::ReplaceCustomType { .. } => ReductionPassKind::ReplaceCustomType,
            ReductionPass::ConcretizeTypeParam { .. } => ReductionPassKind::ConcretizeTypeParam,
            ReductionPass::RemoveTypeParam { .. } => ReductionPassKind::RemoveTypeParam,
            ReductionPass::RemoveDecl { .. } => ReductionPassKind::RemoveDecl,
            ReductionPass::ReorderSupertypes { .. } => ReductionPassKind::ReorderSupertypes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PassOutcome {
    Kept,
    RolledBack,
    Forked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrailEntry {
    pub pass: ReductionPass,
    pub outcome: PassOutcome,
}

/// A flagged program whose signature differs from the one being minimized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForkedFinding {
    pub program: IrProgram,
    pub signature: String,
    pub verdict: Option<TestVerdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimizationResult {
    pub minimized: IrProgram,
    pub trail: Vec<TrailEntry>,
    pub forked_findings: Vec<ForkedFinding>,
    pub budget_exhausted: bool,
    pub oracle_calls: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum MinimizeError {
    #[error("oracle does not reproduce the finding: expected {expected}, observed {observed:?}")]
    OracleDrift { expected: String, observed: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeConfig {
    /// Maximum number of oracle calls.
    pub budget: usize,
    pub pivot: Lang,
    pub enabled: BTreeSet<ReductionPassKind>,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            budget: 10_000,
            pivot: Lang::Java,
            enabled: ReductionPassKind::ALL.into_iter().filter(|k| !k.is_exploratory()).collect(),
        }
    }
}

/// What the oracle saw: a signature when the program triggers a bug.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Observation {
    pub signature: Option<String>,
    pub verdict: Option<TestVerdict>,
}

pub trait Oracle {
    fn observe(&mut self, program: &IrProgram) -> Observation;
}

/// In-process oracle from a predicate returning the bug signature.
pub struct PredicateOracle<F>(pub F);

impl<F: FnMut(&IrProgram) -> Option<String>> Oracle for PredicateOracle<F> {
    fn observe(&mut self, program: &IrProgram) -> Observation {
        Observation { signature: (self.0)(program), verdict: None }
    }
}

/// Oracle that renders the program and runs it through the harness.
pub struct HarnessOracle {
    pub mode: TestMode,
    pub plans: Vec<ToolchainPlan>,
    pub dirs: RunDirs,
    calls: usize,
    cache: HashMap<String, Observation>,
}

impl HarnessOracle {
    /// `plans` holds one plan for normal testing or two for differential.
    pub fn new(mode: TestMode, plans: Vec<ToolchainPlan>, runs_dir: PathBuf, run_id: &str) -> Self {
        HarnessOracle { mode, plans, dirs: RunDirs::new(&runs_dir, run_id), calls: 0, cache: HashMap::new() }
    }

    fn run(&mut self, program: &IrProgram) -> Result<TestVerdict, String> {
        let bundle = render::render(program).map_err(|e| e.to_string())?;
        self.calls += 1;
        let id = format!("step{:05}", self.calls);
        let v: Result<TestVerdict, HarnessError> = match (self.mode, self.plans.as_slice()) {
            (TestMode::Normal, [p, ..]) => harness::normal_test(&bundle, p, &self.dirs, &id),
            (TestMode::Differential, [a, b, ..]) => harness::differential_test(&bundle, (a, b), &self.dirs, &id),
            _ => return Err("oracle has too few toolchain plans".into()),
        };
        v.map_err(|e| e.to_string())
    }
}

/// Signature of a flagged verdict: result class plus diagnostic fingerprint.
pub fn verdict_signature(v: &TestVerdict) -> Option<String> {
    v.fingerprint().map(|fp| format!("{:?}:{fp}", v.result))
}

impl Oracle for HarnessOracle {
    fn observe(&mut self, program: &IrProgram) -> Observation {
        let key = program.structure_value().to_string();
        if let Some(o) = self.cache.get(&key) {
            return o.clone();
        }
        let o = match self.run(program) {
            Ok(v) => Observation { signature: verdict_signature(&v), verdict: Some(v) },
            Err(_) => Observation::default(),
        };
        self.cache.insert(key, o.clone());
        o
    }
}

/// Nodes of a type tree with their paths, pre-order.
pub fn type_nodes(t: &TypeRef) -> Vec<(NodePath, &TypeRef)> {
    fn go<'a>(t: &'a TypeRef, path: &mut NodePath, out: &mut Vec<(NodePath, &'a TypeRef)>) {
        out.push((path.clone(), t));
        if let TypeRef::ClassType { args, .. } = t {
            for (i, a) in args.iter().enumerate() {
                path.push(i);
                go(a, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

fn replace_node(t: &mut TypeRef, path: &[usize], new: TypeRef) -> bool {
    match path.split_first() {
        None => {
            *t = new;
            true
        }
        Some((i, rest)) => match t {
            TypeRef::ClassType { args, .. } => args.get_mut(*i).is_some_and(|a| replace_node(a, rest, new)),
            _ => false,
        },
    }
}

/// Retags `decl` and every same-language declaration connected to it by
/// inheritance edges to `pivot`. Flattening a whole component can never
/// add a language switch to an inheritance chain.
pub fn flatten_language(program: &IrProgram, decl: &str, pivot: Lang) -> IrProgram {
    let mut out = program.clone();
    let Some(start) = program.decl(decl) else { return out };
    let lang = start.lang;
    if lang == pivot {
        return out;
    }
    let mut component: HashSet<&str> = HashSet::from([start.name.as_str()]);
    let mut stack = vec![start.name.as_str()];
    while let Some(n) = stack.pop() {
        for d in &program.declarations {
            if d.lang != lang || component.contains(d.name.as_str()) {
                continue;
            }
            let linked = d.supertypes.iter().any(|s| s.target == n)
                || program.decl(n).is_some_and(|nd| nd.supertypes.iter().any(|s| s.target == d.name));
            if linked {
                component.insert(d.name.as_str());
                stack.push(d.name.as_str());
            }
        }
    }
    for d in &mut out.declarations {
        if component.contains(d.name.as_str()) {
            d.lang = pivot;
        }
    }
    out
}

fn map_all_types(program: &mut IrProgram, f: &mut impl FnMut(&str, TypeRef) -> TypeRef) {
    for d in &mut program.declarations {
        let owner = d.name.clone();
        for st in &mut d.supertypes {
            for a in &mut st.args {
                *a = a.map(&mut |t| f(&owner, t));
            }
        }
        for m in &mut d.methods {
            for p in &mut m.params {
                p.ty = p.ty.map(&mut |t| f(&owner, t));
            }
            m.return_type = m.return_type.map(&mut |t| f(&owner, t));
        }
    }
}

fn remove_method(program: &mut IrProgram, decl: &str, method: &str) -> bool {
    let Some(d) = program.decl_mut(decl) else { return false };
    let Some(k) = d.methods.iter().position(|m| m.name == method) else { return false };
    d.methods.remove(k);
    let gone = MethodRef::new(decl, method);
    for d in &mut program.declarations {
        for m in &mut d.methods {
            m.overrides.remove(&gone);
        }
    }
    true
}

fn remove_type_param(program: &mut IrProgram, decl: &str, param: &str) -> bool {
    let Some(d) = program.decl_mut(decl) else { return false };
    let Some(k) = d.type_params.iter().position(|t| t.name == param) else { return false };
    d.type_params.remove(k);
    map_all_types(program, &mut |owner, t| match t {
        TypeRef::TypeParam { name } if owner == decl && name == param => TypeRef::string(),
        TypeRef::ClassType { name, mut args } if name == decl => {
            if k < args.len() {
                args.remove(k);
            }
            TypeRef::ClassType { name, args }
        }
        other => other,
    });
    for d in &mut program.declarations {
        for st in d.supertypes.iter_mut().filter(|s| s.target == decl) {
            if k < st.args.len() {
                st.args.remove(k);
            }
        }
    }
    true
}

fn remove_decl(program: &mut IrProgram, decl: &str) -> bool {
    let Some(i) = program.decl_index(decl) else { return false };
    program.declarations.remove(i);
    for d in &mut program.declarations {
        d.supertypes.retain(|s| s.target != decl);
        for m in &mut d.methods {
            m.overrides.retain(|r| r.decl != decl);
        }
    }
    map_all_types(program, &mut |_, t| match t {
        TypeRef::ClassType { ref name, .. } if name == decl => TypeRef::top(),
        other => other,
    });
    true
}

fn apply_raw(program: &IrProgram, pass: &ReductionPass, pivot: Lang) -> Option<IrProgram> {
    let mut out = program.clone();
    let ok = match pass {
        ReductionPass::RemoveMethod { decl, method } => remove_method(&mut out, decl, method),
        ReductionPass::FlattenLanguage { decl } => {
            out = flatten_language(program, decl, pivot);
            out != *program
        }
        ReductionPass::ReplaceCustomType { decl, site, node, replacement } => {
            match mutators::site_type_mut(&mut out, decl, site) {
                Some(t) => {
                    let is_custom = type_nodes(t).iter().any(|(p, n)| p == node && matches!(n, TypeRef::ClassType { .. }));
                    is_custom && replace_node(t, node, TypeRef::builtin(*replacement))
                }
                None => false,
            }
        }
        ReductionPass::ConcretizeTypeParam { decl, site, node } => match mutators::site_type_mut(&mut out, decl, site) {
            Some(t) => {
                let is_param = type_nodes(t).iter().any(|(p, n)| p == node && matches!(n, TypeRef::TypeParam { .. }));
                is_param && replace_node(t, node, TypeRef::string())
            }
            None => false,
        },
        ReductionPass::RemoveTypeParam { decl, param } => remove_type_param(&mut out, decl, param),
        ReductionPass::RemoveDecl { decl } => remove_decl(&mut out, decl),
        ReductionPass::ReorderSupertypes { decl, order } => match out.decl_mut(decl) {
            Some(d) if order.len() == d.supertypes.len() => {
                let old = d.supertypes.clone();
                d.supertypes = order.iter().filter_map(|&k| old.get(k).cloned()).collect();
                d.supertypes.len() == old.len() && d.supertypes != old
            }
            _ => false,
        },
    };
    ok.then_some(out)
}

/// Applies one pass. `None` when the pass does not apply or the result is
/// not structurally valid.
pub fn apply_pass(program: &IrProgram, pass: &ReductionPass, pivot: Lang) -> Option<IrProgram> {
    let out = apply_raw(program, pass, pivot)?;
    validate_with(&out, ValidationMode::StructuralOnly).is_valid().then_some(out)
}

/// Every pass of `kind` that could apply to `program`, in a fixed order.
pub fn candidate_passes(program: &IrProgram, kind: ReductionPassKind, pivot: Lang) -> Vec<ReductionPass> {
    let mut out = Vec::new();
    let sites = mutators::type_sites(program);
    for (i, d) in program.declarations.iter().enumerate() {
        let decl = d.name.clone();
        match kind {
            ReductionPassKind::RemoveMethod => {
                out.extend(d.methods.iter().map(|m| ReductionPass::RemoveMethod { decl: decl.clone(), method: m.name.clone() }))
            }
            ReductionPassKind::FlattenLanguage if d.lang != pivot => out.push(ReductionPass::FlattenLanguage { decl }),
            ReductionPassKind::FlattenLanguage => {}
            ReductionPassKind::ReplaceCustomType | ReductionPassKind::ConcretizeTypeParam => {
                for (_, site) in sites.iter().filter(|(j, _)| *j == i) {
                    let Some(t) = mutators::site_type(program, i, site) else { continue };
                    for (node, n) in type_nodes(t) {
                        match (kind, n) {
                            (ReductionPassKind::ReplaceCustomType, TypeRef::ClassType { .. }) => {
                                for replacement in [Builtin::String, Builtin::Top] {
                                    out.push(ReductionPass::ReplaceCustomType {
                                        decl: decl.clone(),
                                        site: site.clone(),
                                        node: node.clone(),
                                        replacement,
                                    });
                                }
                            }
                            (ReductionPassKind::ConcretizeTypeParam, TypeRef::TypeParam { .. }) => {
                                out.push(ReductionPass::ConcretizeTypeParam { decl: decl.clone(), site: site.clone(), node })
                            }
                            _ => {}
                        }
                    }
                }
            }
            ReductionPassKind::RemoveTypeParam => out.extend(
                d.type_params.iter().map(|t| ReductionPass::RemoveTypeParam { decl: decl.clone(), param: t.name.clone() }),
            ),
            ReductionPassKind::RemoveDecl => out.push(ReductionPass::RemoveDecl { decl }),
            ReductionPassKind::ReorderSupertypes if d.supertypes.len() >= 2 => {
                out.push(ReductionPass::ReorderSupertypes { decl, order: (0..d.supertypes.len()).rev().collect() })
            }
            ReductionPassKind::ReorderSupertypes => {}
        }
    }
    out
}

/// Size components that every kept pass must not increase, with at least
/// one strictly decreasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeMeasure {
    pub decls: usize,
    pub methods: usize,
    pub supertypes: usize,
    pub type_params: usize,
    pub type_nodes: usize,
    pub custom_type_nodes: usize,
    pub param_usages: usize,
    pub foreign_decls: usize,
}

impl SizeMeasure {
    pub fn of(program: &IrProgram, pivot: Lang) -> Self {
        let mut m = SizeMeasure {
            decls: program.declarations.len(),
            methods: program.method_count(),
            supertypes: program.declarations.iter().map(|d| d.supertypes.len()).sum(),
            type_params: program.declarations.iter().map(|d| d.type_params.len()).sum(),
            type_nodes: 0,
            custom_type_nodes: 0,
            param_usages: 0,
            foreign_decls: program.declarations.iter().filter(|d| d.lang != pivot).count(),
        };
        for d in &program.declarations {
            for t in d.type_usages() {
                t.walk(&mut |n| {
                    m.type_nodes += 1;
                    match n {
                        TypeRef::ClassType { .. } => m.custom_type_nodes += 1,
                        TypeRef::TypeParam { .. } => m.param_usages += 1,
                        TypeRef::Builtin { .. } => {}
                    }
                });
            }
        }
        m
    }

    fn parts(&self) -> [usize; 8] {
        [
            self.decls,
            self.methods,
            self.supertypes,
            self.type_params,
            self.type_nodes,
            self.custom_type_nodes,
            self.param_usages,
            self.foreign_decls,
        ]
    }

    /// Pareto-smaller: no component larger, at least one smaller.
    pub fn strictly_below(&self, other: &SizeMeasure) -> bool {
        let (a, b) = (self.parts(), other.parts());
        a.iter().zip(&b).all(|(x, y)| x <= y) && a != b
    }
}

pub fn minimize(
    program: &IrProgram,
    oracle: &mut dyn Oracle,
    config: &MinimizeConfig,
) -> Result<MinimizationResult, MinimizeError> {
    let first = oracle.observe(program);
    let Some(target) = first.signature else {
        return Err(MinimizeError::OracleDrift { expected: "a flagged verdict".into(), observed: None });
    };
    minimize_towards(program, &target, oracle, config)
}

/// Minimizes while preserving `target`, which the program must reproduce.
pub fn minimize_towards(
    program: &IrProgram,
    target: &str,
    oracle: &mut dyn Oracle,
    config: &MinimizeConfig,
) -> Result<MinimizationResult, MinimizeError> {
    let observed = oracle.observe(program).signature;
    if observed.as_deref() != Some(target) {
        return Err(MinimizeError::OracleDrift { expected: target.to_string(), observed });
    }
    let mut calls = 2;
    let mut current = program.clone();
    let mut trail = Vec::new();
    let mut forked: Vec<ForkedFinding> = Vec::new();
    let mut seen_forks: HashSet<String> = HashSet::new();
    let mut explored: HashSet<String> = HashSet::new();
    let mut budget_exhausted = false;
    'outer: loop {
        for kind in ReductionPassKind::ALL.into_iter().filter(|k| config.enabled.contains(k)) {
            for pass in candidate_passes(&current, kind, config.pivot) {
                let Some(candidate) = apply_pass(&current, &pass, config.pivot) else { continue };
                if !kind.is_exploratory()
                    && !SizeMeasure::of(&candidate, config.pivot).strictly_below(&SizeMeasure::of(&current, config.pivot))
                {
                    continue;
                }
                if kind.is_exploratory() && !explored.insert(candidate.structure_value().to_string()) {
                    continue;
                }
                if calls >= config.budget {
                    budget_exhausted = true;
                    break 'outer;
                }
                calls += 1;
                let obs = oracle.observe(&candidate);
                match obs.signature {
                    Some(s) if s == target && !kind.is_exploratory() => {
                        current = candidate;
                        trail.push(TrailEntry { pass, outcome: PassOutcome::Kept });
                        continue 'outer;
                    }
                    Some(s) if s != target => {
                        if seen_forks.insert(s.clone()) {
                            forked.push(ForkedFinding { program: candidate, signature: s, verdict: obs.verdict });
                        }
                        trail.push(TrailEntry { pass, outcome: PassOutcome::Forked });
                    }
                    _ => trail.push(TrailEntry { pass, outcome: PassOutcome::RolledBack }),
                }
            }
        }
        break;
    }
    Ok(MinimizationResult { minimized: current, trail, forked_findings: forked, budget_exhausted, oracle_calls: calls })
}

/// Re-applies the kept passes of a trail to the original program.
pub fn replay_trail(program: &IrProgram, trail: &[TrailEntry], pivot: Lang) -> Option<IrProgram> {
    trail
        .iter()
        .filter(|e| e.outcome == PassOutcome::Kept)
        .try_fold(program.clone(), |p, e| apply_pass(&p, &e.pass, pivot))
}
