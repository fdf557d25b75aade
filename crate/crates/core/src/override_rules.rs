//! Universal override rules: whether a subclass must, can, or cannot
//! override an inherited signature, given the parent-class method and the
//! interface methods sharing that signature.

use serde::{Deserialize, Serialize};

use crate::ir::{InheritedMethods, Lang, MethodKind, TypeDecl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SuperMethodKind {
    /// No method with this signature in the parent class.
    Null,
    Abstract,
    Final,
    Normal,
}

impl SuperMethodKind {
    pub const ALL: [SuperMethodKind; 4] =
        [SuperMethodKind::Null, SuperMethodKind::Abstract, SuperMethodKind::Final, SuperMethodKind::Normal];

    pub fn of(inherited: &InheritedMethods) -> Self {
        match inherited.method_in_super_class.as_ref().map(|m| m.kind) {
            None => SuperMethodKind::Null,
            Some(MethodKind::Abstract) => SuperMethodKind::Abstract,
            Some(MethodKind::Final) => SuperMethodKind::Final,
            Some(MethodKind::Normal) => SuperMethodKind::Normal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InterfaceMethodConfig {
    MultiAllAbstract,
    MultiSomeConcrete,
    OneAbstract,
    OneConcrete,
    None,
}

impl InterfaceMethodConfig {
    pub const ALL: [InterfaceMethodConfig; 5] = [
        InterfaceMethodConfig::MultiAllAbstract,
        InterfaceMethodConfig::MultiSomeConcrete,
        InterfaceMethodConfig::OneAbstract,
        InterfaceMethodConfig::OneConcrete,
        InterfaceMethodConfig::None,
    ];

    /// Counts interface contributions; any non-abstract (default) method
    /// makes the set concrete.
    pub fn of(inherited: &InheritedMethods) -> Self {
        let methods = &inherited.methods_in_interfaces;
        let concrete = methods.iter().any(|m| m.kind != MethodKind::Abstract);
        match (methods.len(), concrete) {
            (0, _) => InterfaceMethodConfig::None,
            (1, false) => InterfaceMethodConfig::OneAbstract,
            (1, true) => InterfaceMethodConfig::OneConcrete,
            (_, false) => InterfaceMethodConfig::MultiAllAbstract,
            (_, true) => InterfaceMethodConfig::MultiSomeConcrete,
        }
    }

    pub fn is_multi(self) -> bool {
        matches!(self, InterfaceMethodConfig::MultiAllAbstract | InterfaceMethodConfig::MultiSomeConcrete)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OverrideVerdict {
    Must,
    Can,
    Cant,
    /// Cannot override; additionally a Kotlin subclass is retagged to Java.
    CantStar,
    /// No inherited method exists.
    Impossible,
}

/// Decision table, checked row by row on the parent-class method.
pub fn classify_override(super_kind: SuperMethodKind, iface: InterfaceMethodConfig) -> OverrideVerdict {
    use InterfaceMethodConfig as I;
    use OverrideVerdict::*;
    match super_kind {
        SuperMethodKind::Null => match iface {
            I::MultiAllAbstract | I::MultiSomeConcrete | I::OneAbstract => Must,
            I::OneConcrete => Can,
            I::None => Impossible,
        },
        SuperMethodKind::Abstract => Must,
        SuperMethodKind::Final => match iface {
            I::MultiSomeConcrete | I::OneConcrete => CantStar,
            _ => Cant,
        },
        SuperMethodKind::Normal => match iface {
            I::MultiSomeConcrete | I::OneConcrete => Must,
            _ => Can,
        },
    }
}

pub fn classify_inherited(inherited: &InheritedMethods) -> OverrideVerdict {
    classify_override(SuperMethodKind::of(inherited), InterfaceMethodConfig::of(inherited))
}

/// Kotlin subclasses in a final-versus-concrete-interface conflict are
/// rewritten to Java; every other declaration is returned unchanged.
pub fn apply_cant_star_adjustment(decl: &TypeDecl, verdict: OverrideVerdict) -> TypeDecl {
    let mut out = decl.clone();
    if verdict == OverrideVerdict::CantStar && decl.lang == Lang::Kotlin {
        out.lang = Lang::Java;
    }
    out
}
