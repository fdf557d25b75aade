//! Structural validity checker. Violations are returned as data.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::hierarchy::{ancestor_instantiations, substitute, Hierarchy};
use super::{ClassModifier, DeclKind, IrProgram, MethodKind, TypeDecl, TypeRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationKind {
    DuplicateDecl,
    Cycle,
    UnresolvedType,
    ArityMismatch,
    MultipleClassSupertypes,
    InterfaceExtendsClass,
    DuplicateTypeParam,
    FinalSupertype,
    DuplicateSupertype,
    UnknownTypeParam,
    MisplacedUnit,
    InterfaceModifier,
    AbstractMethodInConcreteClass,
    FinalMethodInInterface,
    DuplicateParam,
    DuplicateMethod,
    OverrideTargetMissing,
    OverrideTargetNotInherited,
    OverrideArityMismatch,
    /// Only reported in [`ValidationMode::Full`].
    OverrideSignatureMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Dotted location, e.g. `A0.func.arg0`.
    pub path: String,
    /// Declarations involved (cycle members, missing targets).
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub names: BTreeSet<String>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    fn push(&mut self, kind: ViolationKind, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { kind, path: path.into(), names: BTreeSet::new(), message: message.into() });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ValidationMode {
    /// All invariants, including override signature equality.
    #[default]
    Full,
    /// Skips override signature equality; used on mutated programs.
    StructuralOnly,
}

pub fn validate(program: &IrProgram) -> ValidationReport {
    validate_with(program, ValidationMode::Full)
}

pub fn validate_with(program: &IrProgram, mode: ValidationMode) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut by_name: HashMap<&str, &TypeDecl> = HashMap::new();
    for d in &program.declarations {
        if by_name.insert(d.name.as_str(), d).is_some() {
            report.push(ViolationKind::DuplicateDecl, &d.name, format!("declaration `{}` defined more than once", d.name));
        }
    }

    let cyclic = check_cycles(program, &by_name, &mut report);
    for d in &program.declarations {
        check_decl(d, &by_name, &mut report);
    }
    let hierarchy = Hierarchy::new(program);
    for d in &program.declarations {
        check_overrides(d, &hierarchy, &cyclic, mode, &mut report);
    }
    report
}

/// Reports one violation per strongly connected component of the
/// supertype graph. Returns every declaration that sits on a cycle.
fn check_cycles(program: &IrProgram, by_name: &HashMap<&str, &TypeDecl>, report: &mut ValidationReport) -> HashSet<String> {
    // Tarjan's SCC.
    struct State<'a> {
        index: HashMap<&'a str, usize>,
        low: HashMap<&'a str, usize>,
        on_stack: HashSet<&'a str>,
        stack: Vec<&'a str>,
        next: usize,
        sccs: Vec<Vec<&'a str>>,
    }
    fn strong<'a>(v: &'a str, by_name: &HashMap<&'a str, &'a TypeDecl>, s: &mut State<'a>) {
        s.index.insert(v, s.next);
        s.low.insert(v, s.next);
        s.next += 1;
        s.stack.push(v);
        s.on_stack.insert(v);
        if let Some(d) = by_name.get(v) {
            for st in &d.supertypes {
                let w = st.target.as_str();
                let Some((&w, _)) = by_name.get_key_value(w) else { continue };
                if !s.index.contains_key(w) {
                    strong(w, by_name, s);
                    let lw = s.low[w];
                    let lv = s.low.get_mut(v).unwrap();
                    *lv = (*lv).min(lw);
                } else if s.on_stack.contains(w) {
                    let iw = s.index[w];
                    let lv = s.low.get_mut(v).unwrap();
                    *lv = (*lv).min(iw);
                }
            }
        }
        if s.low[v] == s.index[v] {
            let mut comp = Vec::new();
            while let Some(w) = s.stack.pop() {
                s.on_stack.remove(w);
                comp.push(w);
                if w == v {
                    break;
                }
            }
            s.sccs.push(comp);
        }
    }

    let mut s = State {
        index: HashMap::new(),
        low: HashMap::new(),
        on_stack: HashSet::new(),
        stack: Vec::new(),
        next: 0,
        sccs: Vec::new(),
    };
    for d in &program.declarations {
        if !s.index.contains_key(d.name.as_str()) {
            strong(by_name.get_key_value(d.name.as_str()).map(|(k, _)| *k).unwrap(), by_name, &mut s);
        }
    }
    let mut cyclic = HashSet::new();
    for comp in s.sccs {
        let self_loop = comp.len() == 1
            && by_name.get(comp[0]).is_some_and(|d| d.supertypes.iter().any(|st| st.target == comp[0]));
        if comp.len() > 1 || self_loop {
            let names: BTreeSet<String> = comp.iter().map(|n| n.to_string()).collect();
            let path = names.iter().next().cloned().unwrap_or_default();
            cyclic.extend(names.iter().cloned());
            report.violations.push(Violation {
                kind: ViolationKind::Cycle,
                message: format!("supertype cycle through {}", names.iter().cloned().collect::<Vec<_>>().join(", ")),
                path,
                names,
            });
        }
    }
    cyclic
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Site {
    SuperArg,
    Param,
    Return,
}

fn check_type(
    t: &TypeRef,
    site: Site,
    top_level: bool,
    decl: &TypeDecl,
    by_name: &HashMap<&str, &TypeDecl>,
    path: &str,
    report: &mut ValidationReport,
) {
    match t {
        TypeRef::Builtin { .. } if t.is_unit() => {
            if !(site == Site::Return && top_level) {
                report.push(ViolationKind::MisplacedUnit, path, "UNIT is only allowed as a return type");
            }
        }
        TypeRef::Builtin { .. } => {}
        TypeRef::TypeParam { name } => {
            if !decl.has_type_param(name) {
                report.push(ViolationKind::UnknownTypeParam, path, format!("type parameter `{name}` is not declared by `{}`", decl.name));
            }
        }
        TypeRef::ClassType { name, args } => {
            match by_name.get(name.as_str()) {
                None => {
                    let mut v = Violation {
                        kind: ViolationKind::UnresolvedType,
                        path: path.to_string(),
                        names: BTreeSet::new(),
                        message: format!("type `{name}` does not resolve"),
                    };
                    v.names.insert(name.clone());
                    report.violations.push(v);
                }
                Some(target) if target.type_params.len() != args.len() => {
                    report.push(
                        ViolationKind::ArityMismatch,
                        path,
                        format!("`{name}` expects {} type arguments, got {}", target.type_params.len(), args.len()),
                    );
                }
                Some(_) => {}
            }
            for a in args {
                check_type(a, site, false, decl, by_name, path, report);
            }
        }
    }
}

fn check_decl(d: &TypeDecl, by_name: &HashMap<&str, &TypeDecl>, report: &mut ValidationReport) {
    let name = d.name.as_str();
    if d.kind == DeclKind::Interface && d.modifier != ClassModifier::Abstract {
        report.push(ViolationKind::InterfaceModifier, name, "interfaces are implicitly abstract");
    }
    let mut tps = HashSet::new();
    for tp in &d.type_params {
        if !tps.insert(tp.name.as_str()) {
            report.push(ViolationKind::DuplicateTypeParam, name, format!("type parameter `{}` declared twice", tp.name));
        }
    }

    let mut class_supers = 0;
    let mut seen_targets = HashSet::new();
    for (i, st) in d.supertypes.iter().enumerate() {
        let path = format!("{name}.supertypes[{i}]");
        if !seen_targets.insert(st.target.as_str()) {
            report.push(ViolationKind::DuplicateSupertype, &path, format!("`{}` listed twice", st.target));
        }
        match by_name.get(st.target.as_str()) {
            None => {
                let mut v = Violation {
                    kind: ViolationKind::UnresolvedType,
                    path: path.clone(),
                    names: BTreeSet::new(),
                    message: format!("supertype `{}` does not resolve", st.target),
                };
                v.names.insert(st.target.clone());
                report.violations.push(v);
            }
            Some(target) => {
                if target.kind == DeclKind::Class {
                    class_supers += 1;
                    if d.kind == DeclKind::Interface {
                        report.push(ViolationKind::InterfaceExtendsClass, &path, format!("interface extends class `{}`", st.target));
                    }
                    if target.modifier == ClassModifier::Final {
                        report.push(ViolationKind::FinalSupertype, &path, format!("`{}` is final", st.target));
                    }
                }
                if target.type_params.len() != st.args.len() {
                    report.push(
                        ViolationKind::ArityMismatch,
                        &path,
                        format!("`{}` expects {} type arguments, got {}", st.target, target.type_params.len(), st.args.len()),
                    );
                }
            }
        }
        for a in &st.args {
            check_type(a, Site::SuperArg, true, d, by_name, &path, report);
        }
    }
    if class_supers > 1 {
        report.push(ViolationKind::MultipleClassSupertypes, name, format!("{class_supers} class supertypes"));
    }

    let mut sigs = HashSet::new();
    for m in &d.methods {
        let mpath = format!("{name}.{}", m.name);
        if !sigs.insert(m.signature()) {
            report.push(ViolationKind::DuplicateMethod, &mpath, format!("`{}` declared twice with the same signature", m.signature()));
        }
        if m.kind == MethodKind::Abstract && !d.is_abstract() {
            report.push(ViolationKind::AbstractMethodInConcreteClass, &mpath, "abstract method in a non-abstract class");
        }
        if m.kind == MethodKind::Final && d.kind == DeclKind::Interface {
            report.push(ViolationKind::FinalMethodInInterface, &mpath, "interface methods cannot be final");
        }
        let mut pnames = HashSet::new();
        for p in &m.params {
            let ppath = format!("{mpath}.{}", p.name);
            if !pnames.insert(p.name.as_str()) {
                report.push(ViolationKind::DuplicateParam, &ppath, format!("parameter `{}` declared twice", p.name));
            }
            check_type(&p.ty, Site::Param, true, d, by_name, &ppath, report);
        }
        check_type(&m.return_type, Site::Return, true, d, by_name, &format!("{mpath}.<return>"), report);
    }
}

fn check_overrides(
    d: &TypeDecl,
    hierarchy: &Hierarchy<'_>,
    cyclic: &HashSet<String>,
    mode: ValidationMode,
    report: &mut ValidationReport,
) {
    let ancestors = hierarchy.ancestors(d);
    let instantiations = if mode == ValidationMode::Full && !cyclic.contains(&d.name) {
        ancestor_instantiations(hierarchy, d).ok()
    } else {
        None
    };
    for m in &d.methods {
        let mpath = format!("{}.{}", d.name, m.name);
        for target in &m.overrides {
            let Some(tm) = hierarchy.method(target) else {
                let mut v = Violation {
                    kind: ViolationKind::OverrideTargetMissing,
                    path: mpath.clone(),
                    names: BTreeSet::new(),
                    message: format!("overridden method `{target}` does not exist"),
                };
                v.names.insert(target.decl.clone());
                report.violations.push(v);
                continue;
            };
            if !ancestors.contains(&target.decl) {
                report.push(ViolationKind::OverrideTargetNotInherited, &mpath, format!("`{}` is not a supertype of `{}`", target.decl, d.name));
                continue;
            }
            if tm.params.len() != m.params.len() {
                report.push(
                    ViolationKind::OverrideArityMismatch,
                    &mpath,
                    format!("`{target}` takes {} parameters, override takes {}", tm.params.len(), m.params.len()),
                );
                continue;
            }
            let Some(inst) = &instantiations else { continue };
            let Some(arg_lists) = inst.get(&target.decl) else { continue };
            let Some(target_decl) = hierarchy.get(&target.decl) else { continue };
            let own: Vec<TypeRef> = m.params.iter().map(|p| p.ty.clone()).collect();
            let matches = arg_lists.iter().any(|args| {
                let binding = target_decl.type_params.iter().map(|p| p.name.clone()).zip(args.iter().cloned()).collect();
                let subst: Result<Vec<TypeRef>, _> = tm.params.iter().map(|p| substitute(&p.ty, &binding)).collect();
                subst.is_ok_and(|s| s == own)
            });
            if !matches {
                report.push(
                    ViolationKind::OverrideSignatureMismatch,
                    &mpath,
                    format!("`{}` does not match the signature of `{target}`", m.signature()),
                );
            }
        }
    }
}
