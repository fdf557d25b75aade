//! Universal program model shared by every stage of the fuzzer.
//!
//! A program is an ordered list of class and interface declarations, each
//! tagged with the JVM language it will be rendered in. The model only
//! captures inheritance, generics and method signatures; there are no
//! expressions, fields, constructors or access modifiers.

mod hierarchy;
mod metrics;
mod validate;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::mutators::MutationRecord;

pub use hierarchy::{
    ancestor_instantiations, collect_method_signature_map, inconsistent_instantiations,
    substitute, Hierarchy, InheritedMethods, MethodSignature, ResolvedMethod,
};
pub use metrics::{
    cross_language_complexity, inheritance_depth, inheritance_width, is_cross_language,
    is_generics_related, ProgramMetrics,
};
pub use validate::{validate, validate_with, ValidationMode, ValidationReport, Violation, ViolationKind};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum IrError {
    #[error("type parameter `{0}` has no binding")]
    UnboundTypeParam(String),
    #[error("supertype `{target}` of `{decl}` does not resolve to a declaration")]
    UnresolvedSupertype { decl: String, target: String },
    #[error("declaration `{0}` not found")]
    UnknownDecl(String),
    #[error("malformed program JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Lang {
    Java,
    Kotlin,
    Groovy,
    Scala,
}

impl Lang {
    pub const ALL: [Lang; 4] = [Lang::Java, Lang::Kotlin, Lang::Groovy, Lang::Scala];

    pub fn extension(self) -> &'static str {
        match self {
            Lang::Java => "java",
            Lang::Kotlin => "kt",
            Lang::Groovy => "groovy",
            Lang::Scala => "scala",
        }
    }

    pub fn from_extension(ext: &str) -> Option<Lang> {
        Lang::ALL.into_iter().find(|l| l.extension() == ext)
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Lang::Java => "JAVA",
            Lang::Kotlin => "KOTLIN",
            Lang::Groovy => "GROOVY",
            Lang::Scala => "SCALA",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Lang {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "JAVA" => Ok(Lang::Java),
            "KOTLIN" => Ok(Lang::Kotlin),
            "GROOVY" => Ok(Lang::Groovy),
            "SCALA" => Ok(Lang::Scala),
            other => Err(format!("unknown language `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DeclKind {
    Class,
    Interface,
}

/// Non-access modifier of a declaration. Interfaces always carry `Abstract`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassModifier {
    Open,
    Final,
    Abstract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Builtin {
    /// Root of the reference type hierarchy: Object / Any / AnyRef.
    Top,
    String,
    Int,
    /// Only legal as a return type.
    Unit,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::Top, Builtin::String, Builtin::Int, Builtin::Unit];
}

/// A type usage. Raw types and wildcards are not representable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TypeRef {
    ClassType { name: String, args: Vec<TypeRef> },
    TypeParam { name: String },
    Builtin { id: Builtin },
}

impl TypeRef {
    pub fn class(name: impl Into<String>, args: Vec<TypeRef>) -> Self {
        TypeRef::ClassType { name: name.into(), args }
    }

    pub fn simple(name: impl Into<String>) -> Self {
        TypeRef::ClassType { name: name.into(), args: Vec::new() }
    }

    pub fn param(name: impl Into<String>) -> Self {
        TypeRef::TypeParam { name: name.into() }
    }

    pub fn builtin(id: Builtin) -> Self {
        TypeRef::Builtin { id }
    }

    pub fn top() -> Self {
        Self::builtin(Builtin::Top)
    }

    pub fn string() -> Self {
        Self::builtin(Builtin::String)
    }

    pub fn int() -> Self {
        Self::builtin(Builtin::Int)
    }

    pub fn unit() -> Self {
        Self::builtin(Builtin::Unit)
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, TypeRef::Builtin { id: Builtin::Unit })
    }

    /// Calls `f` on this type and every nested type argument, outermost first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a TypeRef)) {
        f(self);
        if let TypeRef::ClassType { args, .. } = self {
            for a in args {
                a.walk(f);
            }
        }
    }

    /// Number of nodes in the type tree.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    pub fn mentions_param(&self, param: &str) -> bool {
        let mut hit = false;
        self.walk(&mut |t| {
            if matches!(t, TypeRef::TypeParam { name } if name == param) {
                hit = true;
            }
        });
        hit
    }

    pub fn mentions_decl(&self, decl: &str) -> bool {
        let mut hit = false;
        self.walk(&mut |t| {
            if matches!(t, TypeRef::ClassType { name, .. } if name == decl) {
                hit = true;
            }
        });
        hit
    }

    /// Rewrites every node bottom-up.
    pub fn map(&self, f: &mut impl FnMut(TypeRef) -> TypeRef) -> TypeRef {
        let inner = match self {
            TypeRef::ClassType { name, args } => TypeRef::ClassType {
                name: name.clone(),
                args: args.iter().map(|a| a.map(f)).collect(),
            },
            other => other.clone(),
        };
        f(inner)
    }
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRef::ClassType { name, args } => {
                f.write_str(name)?;
                if !args.is_empty() {
                    f.write_str("<")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(">")?;
                }
                Ok(())
            }
            TypeRef::TypeParam { name } => f.write_str(name),
            TypeRef::Builtin { id } => write!(f, "{id:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypeParamDecl {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SuperTypeRef {
    pub target: String,
    pub args: Vec<TypeRef>,
}

impl SuperTypeRef {
    pub fn new(target: impl Into<String>, args: Vec<TypeRef>) -> Self {
        SuperTypeRef { target: target.into(), args }
    }

    pub fn as_type(&self) -> TypeRef {
        TypeRef::class(self.target.clone(), self.args.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MethodKind {
    Abstract,
    Final,
    /// Open method in a class, default method in an interface.
    Normal,
}

/// Reference to a method by owning declaration and method name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MethodRef {
    pub decl: String,
    pub method: String,
}

impl MethodRef {
    pub fn new(decl: impl Into<String>, method: impl Into<String>) -> Self {
        MethodRef { decl: decl.into(), method: method.into() }
    }
}

impl fmt::Display for MethodRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}", self.decl, self.method)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ParamDecl {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: TypeRef,
}

impl ParamDecl {
    pub fn new(name: impl Into<String>, ty: TypeRef) -> Self {
        ParamDecl { name: name.into(), ty }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MethodDecl {
    pub name: String,
    pub params: Vec<ParamDecl>,
    pub return_type: TypeRef,
    pub kind: MethodKind,
    /// Methods this one directly overrides.
    #[serde(default)]
    pub overrides: BTreeSet<MethodRef>,
}

impl MethodDecl {
    pub fn new(name: impl Into<String>, params: Vec<ParamDecl>, return_type: TypeRef, kind: MethodKind) -> Self {
        MethodDecl { name: name.into(), params, return_type, kind, overrides: BTreeSet::new() }
    }

    pub fn overriding(mut self, targets: impl IntoIterator<Item = MethodRef>) -> Self {
        self.overrides.extend(targets);
        self
    }

    pub fn signature(&self) -> MethodSignature {
        MethodSignature {
            name: self.name.clone(),
            param_types: self.params.iter().map(|p| p.ty.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypeDecl {
    pub name: String,
    pub kind: DeclKind,
    pub modifier: ClassModifier,
    pub lang: Lang,
    pub type_params: Vec<TypeParamDecl>,
    pub supertypes: Vec<SuperTypeRef>,
    pub methods: Vec<MethodDecl>,
}

impl TypeDecl {
    pub fn class(name: impl Into<String>, modifier: ClassModifier, lang: Lang) -> Self {
        TypeDecl {
            name: name.into(),
            kind: DeclKind::Class,
            modifier,
            lang,
            type_params: Vec::new(),
            supertypes: Vec::new(),
            methods: Vec::new(),
        }
    }

    pub fn interface(name: impl Into<String>, lang: Lang) -> Self {
        TypeDecl {
            name: name.into(),
            kind: DeclKind::Interface,
            modifier: ClassModifier::Abstract,
            lang,
            type_params: Vec::new(),
            supertypes: Vec::new(),
            methods: Vec::new(),
        }
    }

    pub fn with_type_params(mut self, names: &[&str]) -> Self {
        self.type_params = names.iter().map(|n| TypeParamDecl { name: (*n).to_string() }).collect();
        self
    }

    pub fn with_super(mut self, st: SuperTypeRef) -> Self {
        self.supertypes.push(st);
        self
    }

    pub fn with_method(mut self, m: MethodDecl) -> Self {
        self.methods.push(m);
        self
    }

    pub fn is_interface(&self) -> bool {
        self.kind == DeclKind::Interface
    }

    pub fn is_abstract(&self) -> bool {
        self.is_interface() || self.modifier == ClassModifier::Abstract
    }

    pub fn has_type_param(&self, name: &str) -> bool {
        self.type_params.iter().any(|t| t.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| m.name == name)
    }

    /// Every type usage in the declaration: supertype arguments, parameter
    /// types and return types.
    pub fn type_usages(&self) -> impl Iterator<Item = &TypeRef> {
        self.supertypes
            .iter()
            .flat_map(|s| s.args.iter())
            .chain(self.methods.iter().flat_map(|m| m.params.iter().map(|p| &p.ty).chain(std::iter::once(&m.return_type))))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrProgram {
    pub declarations: Vec<TypeDecl>,
    pub seed: u64,
    #[serde(default)]
    pub provenance: Vec<MutationRecord>,
}

impl IrProgram {
    pub fn new(seed: u64) -> Self {
        IrProgram { declarations: Vec::new(), seed, provenance: Vec::new() }
    }

    pub fn with_decl(mut self, decl: TypeDecl) -> Self {
        self.declarations.push(decl);
        self
    }

    pub fn decl(&self, name: &str) -> Option<&TypeDecl> {
        self.declarations.iter().find(|d| d.name == name)
    }

    pub fn decl_mut(&mut self, name: &str) -> Option<&mut TypeDecl> {
        self.declarations.iter_mut().find(|d| d.name == name)
    }

    pub fn decl_index(&self, name: &str) -> Option<usize> {
        self.declarations.iter().position(|d| d.name == name)
    }

    pub fn method_count(&self) -> usize {
        self.declarations.iter().map(|d| d.methods.len()).sum()
    }

    pub fn languages(&self) -> BTreeSet<Lang> {
        self.declarations.iter().map(|d| d.lang).collect()
    }

    /// Stable identifier: the generation seed, plus a content hash once the
    /// program has been mutated.
    pub fn id(&self) -> String {
        let base = format!("p{:016x}", self.seed);
        if self.provenance.is_empty() {
            return base;
        }
        let digest = Sha256::digest(self.to_canonical_json().as_bytes());
        let short: String = digest.iter().take(4).map(|b| format!("{b:02x}")).collect();
        format!("{base}-m{short}")
    }

    /// Canonical JSON: fixed field order, two-space indentation, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("IR serialization is infallible");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, IrError> {
        serde_json::from_str(text).map_err(|e| IrError::Json(e.to_string()))
    }

    /// Canonical JSON value with provenance removed; used for structural diffs.
    pub fn structure_value(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("IR serialization is infallible");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("provenance");
        }
        v
    }
}
