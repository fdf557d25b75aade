//! Supertype resolution with generic substitution and inherited-method maps.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DeclKind, IrError, IrProgram, MethodKind, MethodRef, SuperTypeRef, TypeDecl, TypeRef};

pub type Binding = BTreeMap<String, TypeRef>;

/// Replaces every type parameter in `ty` using `binding`.
pub fn substitute(ty: &TypeRef, binding: &Binding) -> Result<TypeRef, IrError> {
    match ty {
        TypeRef::TypeParam { name } => {
            binding.get(name).cloned().ok_or_else(|| IrError::UnboundTypeParam(name.clone()))
        }
        TypeRef::ClassType { name, args } => Ok(TypeRef::ClassType {
            name: name.clone(),
            args: args.iter().map(|a| substitute(a, binding)).collect::<Result<_, _>>()?,
        }),
        TypeRef::Builtin { .. } => Ok(ty.clone()),
    }
}

/// Override key: method name plus parameter types after substitution.
/// Return types are deliberately not part of the key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MethodSignature {
    pub name: String,
    pub param_types: Vec<TypeRef>,
}

impl fmt::Display for MethodSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, t) in self.param_types.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

/// A method seen from a descendant, with its types rewritten into the
/// descendant's type parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedMethod {
    pub owner: String,
    pub owner_kind: DeclKind,
    pub method: String,
    pub kind: MethodKind,
    pub param_names: Vec<String>,
    pub param_types: Vec<TypeRef>,
    pub return_type: TypeRef,
}

impl ResolvedMethod {
    pub fn method_ref(&self) -> MethodRef {
        MethodRef::new(self.owner.clone(), self.method.clone())
    }

    pub fn signature(&self) -> MethodSignature {
        MethodSignature { name: self.method.clone(), param_types: self.param_types.clone() }
    }

    pub fn is_concrete(&self) -> bool {
        self.kind != MethodKind::Abstract
    }

    fn substituted(&self, binding: &Binding) -> Result<Self, IrError> {
        Ok(ResolvedMethod {
            param_types: self.param_types.iter().map(|t| substitute(t, binding)).collect::<Result<_, _>>()?,
            return_type: substitute(&self.return_type, binding)?,
            ..self.clone()
        })
    }
}

/// Value of the inherited-method map: the contribution of the parent class
/// and the most specific interface contributions. An interface method that
/// another contribution already overrides is left out.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InheritedMethods {
    pub method_in_super_class: Option<ResolvedMethod>,
    pub methods_in_interfaces: Vec<ResolvedMethod>,
}

impl InheritedMethods {
    pub fn all(&self) -> impl Iterator<Item = &ResolvedMethod> {
        self.method_in_super_class.iter().chain(self.methods_in_interfaces.iter())
    }

    pub fn is_empty(&self) -> bool {
        self.method_in_super_class.is_none() && self.methods_in_interfaces.is_empty()
    }

    /// Distinct directly inherited methods, as override targets.
    pub fn targets(&self) -> BTreeSet<MethodRef> {
        self.all().map(ResolvedMethod::method_ref).collect()
    }
}

type MemberMap = BTreeMap<MethodSignature, Vec<ResolvedMethod>>;

/// Name-indexed view over a program, optionally with one extra declaration
/// that is still under construction.
pub struct Hierarchy<'a> {
    decls: HashMap<&'a str, &'a TypeDecl>,
}

impl<'a> Hierarchy<'a> {
    pub fn new(program: &'a IrProgram) -> Self {
        let mut decls = HashMap::new();
        for d in &program.declarations {
            decls.entry(d.name.as_str()).or_insert(d);
        }
        Hierarchy { decls }
    }

    pub fn with_extra(program: &'a IrProgram, extra: &'a TypeDecl) -> Self {
        let mut h = Self::new(program);
        h.decls.insert(extra.name.as_str(), extra);
        h
    }

    pub fn get(&self, name: &str) -> Option<&'a TypeDecl> {
        self.decls.get(name).copied()
    }

    pub fn method(&self, r: &MethodRef) -> Option<&'a super::MethodDecl> {
        self.get(&r.decl).and_then(|d| d.method(&r.method))
    }

    fn resolve_super(&self, decl: &TypeDecl, st: &SuperTypeRef) -> Result<&'a TypeDecl, IrError> {
        self.get(&st.target).ok_or_else(|| IrError::UnresolvedSupertype {
            decl: decl.name.clone(),
            target: st.target.clone(),
        })
    }

    /// Binding from the target's type parameters to the supertype's arguments.
    pub fn binding_for(&self, target: &TypeDecl, st: &SuperTypeRef) -> Binding {
        target
            .type_params
            .iter()
            .zip(st.args.iter())
            .map(|(p, a)| (p.name.clone(), a.clone()))
            .collect()
    }

    /// Every (transitive) supertype name of `decl`.
    pub fn ancestors(&self, decl: &TypeDecl) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<&str> = decl.supertypes.iter().map(|s| s.target.as_str()).collect();
        while let Some(n) = stack.pop() {
            if out.insert(n.to_string()) {
                if let Some(d) = self.get(n) {
                    stack.extend(d.supertypes.iter().map(|s| s.target.as_str()));
                }
            }
        }
        out
    }

    /// True when `a` reaches `b` by following `overrides` edges.
    pub fn overrides_transitively(&self, a: &MethodRef, b: &MethodRef) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![a.clone()];
        while let Some(cur) = stack.pop() {
            if !seen.insert(cur.clone()) {
                continue;
            }
            if let Some(m) = self.method(&cur) {
                for t in &m.overrides {
                    if t == b {
                        return true;
                    }
                    stack.push(t.clone());
                }
            }
        }
        false
    }

    /// Members visible in `decl` (own and inherited), expressed in `decl`'s
    /// own type parameters. Inherited entries hold the most-derived
    /// declarations per signature; a parent class provider hides interface
    /// providers.
    pub fn effective_members(&self, decl: &TypeDecl) -> Result<BTreeMap<MethodSignature, Vec<ResolvedMethod>>, IrError> {
        let mut stack = Vec::new();
        self.members_guarded(decl, &mut stack)
    }

    fn members_guarded(&self, decl: &TypeDecl, stack: &mut Vec<String>) -> Result<MemberMap, IrError> {
        if stack.contains(&decl.name) {
            return Ok(MemberMap::new());
        }
        stack.push(decl.name.clone());
        let contributions = self.contributions(decl, stack)?;
        stack.pop();

        let mut out = MemberMap::new();
        for m in &decl.methods {
            let rm = ResolvedMethod {
                owner: decl.name.clone(),
                owner_kind: decl.kind,
                method: m.name.clone(),
                kind: m.kind,
                param_names: m.params.iter().map(|p| p.name.clone()).collect(),
                param_types: m.params.iter().map(|p| p.ty.clone()).collect(),
                return_type: m.return_type.clone(),
            };
            out.entry(rm.signature()).or_insert_with(|| vec![rm]);
        }

        let mut keys = BTreeSet::new();
        for (_, c) in &contributions {
            keys.extend(c.keys().cloned());
        }
        for sig in keys {
            if out.contains_key(&sig) {
                continue;
            }
            let from_class: Vec<ResolvedMethod> = contributions
                .iter()
                .filter(|(is_class, _)| *is_class)
                .flat_map(|(_, c)| c.get(&sig).cloned().unwrap_or_default())
                .collect();
            if !from_class.is_empty() && from_class.iter().all(|m| m.owner_kind == DeclKind::Class) {
                out.insert(sig, from_class);
                continue;
            }
            let mut all: Vec<ResolvedMethod> = Vec::new();
            for (_, c) in &contributions {
                for m in c.get(&sig).into_iter().flatten() {
                    if !all.iter().any(|x| x.owner == m.owner && x.method == m.method) {
                        all.push(m.clone());
                    }
                }
            }
            let refs: Vec<MethodRef> = all.iter().map(ResolvedMethod::method_ref).collect();
            let pruned: Vec<ResolvedMethod> = all
                .into_iter()
                .filter(|m| {
                    let mr = m.method_ref();
                    !refs.iter().any(|o| *o != mr && self.overrides_transitively(o, &mr))
                })
                .collect();
            out.insert(sig, pruned);
        }
        Ok(out)
    }

    /// Per direct supertype: (is the supertype a class, its members in `decl`'s terms).
    fn contributions(&self, decl: &TypeDecl, stack: &mut Vec<String>) -> Result<Vec<(bool, MemberMap)>, IrError> {
        let mut out = Vec::with_capacity(decl.supertypes.len());
        for st in &decl.supertypes {
            let target = self.resolve_super(decl, st)?;
            let binding = self.binding_for(target, st);
            let members = self.members_guarded(target, stack)?;
            let mut map = MemberMap::new();
            for (_, list) in members {
                for m in list {
                    let rm = m.substituted(&binding)?;
                    map.entry(rm.signature()).or_default().push(rm);
                }
            }
            out.push((target.kind == DeclKind::Class, map));
        }
        Ok(out)
    }

    /// The inherited-method map of `decl`: keys are signatures visible
    /// through direct supertypes, values split into the parent-class
    /// contribution and the interface contributions.
    pub fn signature_map(&self, decl: &TypeDecl) -> Result<BTreeMap<MethodSignature, InheritedMethods>, IrError> {
        let mut stack = vec![decl.name.clone()];
        let contributions = self.contributions(decl, &mut stack)?;
        let mut out: BTreeMap<MethodSignature, InheritedMethods> = BTreeMap::new();
        for (is_class, map) in contributions {
            for (sig, list) in map {
                let entry = out.entry(sig).or_default();
                for m in list {
                    if is_class && m.owner_kind == DeclKind::Class && entry.method_in_super_class.is_none() {
                        entry.method_in_super_class = Some(m);
                    } else {
                        entry.methods_in_interfaces.push(m);
                    }
                }
            }
        }
        for entry in out.values_mut() {
            let mut uniq: Vec<ResolvedMethod> = Vec::new();
            for m in entry.methods_in_interfaces.drain(..) {
                if !uniq.iter().any(|u| u.method_ref() == m.method_ref()) {
                    uniq.push(m);
                }
            }
            let others: Vec<MethodRef> =
                entry.method_in_super_class.iter().chain(uniq.iter()).map(ResolvedMethod::method_ref).collect();
            uniq.retain(|m| {
                let r = m.method_ref();
                !others.iter().any(|o| *o != r && self.overrides_transitively(o, &r))
            });
            entry.methods_in_interfaces = uniq;
        }
        out.retain(|_, v| !v.is_empty());
        Ok(out)
    }
}

/// Inherited-method map of `decl` within `program`.
pub fn collect_method_signature_map(
    decl: &TypeDecl,
    program: &IrProgram,
) -> Result<BTreeMap<MethodSignature, InheritedMethods>, IrError> {
    Hierarchy::with_extra(program, decl).signature_map(decl)
}

/// For every transitive supertype, the set of argument lists under which
/// `decl` inherits it, expressed in `decl`'s type parameters.
pub fn ancestor_instantiations(
    hierarchy: &Hierarchy<'_>,
    decl: &TypeDecl,
) -> Result<BTreeMap<String, BTreeSet<Vec<TypeRef>>>, IrError> {
    let mut out: BTreeMap<String, BTreeSet<Vec<TypeRef>>> = BTreeMap::new();
    let identity: Binding = decl.type_params.iter().map(|p| (p.name.clone(), TypeRef::param(p.name.clone()))).collect();
    let mut work: Vec<(&TypeDecl, Binding, usize)> = vec![(decl, identity, 0)];
    let limit = hierarchy.decls.len() + 1;
    while let Some((d, binding, depth)) = work.pop() {
        if depth > limit {
            continue;
        }
        for st in &d.supertypes {
            let args: Vec<TypeRef> = st.args.iter().map(|a| substitute(a, &binding)).collect::<Result<_, _>>()?;
            let fresh = out.entry(st.target.clone()).or_default().insert(args.clone());
            if !fresh {
                continue;
            }
            let target = hierarchy.resolve_super(d, st)?;
            let next: Binding = target.type_params.iter().map(|p| p.name.clone()).zip(args).collect();
            work.push((target, next, depth + 1));
        }
    }
    Ok(out)
}

/// Ancestors that `decl` inherits under more than one argument list.
pub fn inconsistent_instantiations(hierarchy: &Hierarchy<'_>, decl: &TypeDecl) -> Result<Vec<String>, IrError> {
    Ok(ancestor_instantiations(hierarchy, decl)?
        .into_iter()
        .filter(|(_, v)| v.len() > 1)
        .map(|(k, _)| k)
        .collect())
}
