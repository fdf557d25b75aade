//! Random generation of valid cross-language programs.
//!
//! Declarations are produced one at a time: name and kind, language tag,
//! type parameters, supertypes drawn from earlier declarations, fresh
//! methods, and finally the overrides required (or allowed) by the
//! override rules.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::ir::{
    collect_method_signature_map, inconsistent_instantiations, Builtin, ClassModifier, DeclKind, Hierarchy, IrError,
    IrProgram, Lang, MethodDecl, MethodKind, ParamDecl, SuperTypeRef, TypeDecl, TypeParamDecl, TypeRef,
};
use crate::override_rules::{
    apply_cant_star_adjustment, classify_inherited, InterfaceMethodConfig, OverrideVerdict,
};
use crate::rng::Rng;

/// Attempts made for a constrained draw before falling back.
pub const RETRY_BOUND: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Ir(#[from] IrError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRange {
    pub min: usize,
    pub max: usize,
}

impl CountRange {
    pub const fn new(min: usize, max: usize) -> Self {
        CountRange { min, max }
    }

    pub fn to_range(self) -> RangeInclusive<usize> {
        self.min..=self.max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub decl_count: CountRange,
    pub parent_class_prob: f64,
    pub interface_count: CountRange,
    pub type_param_count: CountRange,
    pub method_count: CountRange,
    pub param_count: CountRange,
    pub can_override_prob: f64,
    pub interface_ratio: f64,
    pub languages: BTreeSet<Lang>,
    /// Lets abstract classes leave inherited abstract-only methods
    /// unimplemented.
    pub abstract_class_exemption: bool,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            decl_count: CountRange::new(4, 12),
            parent_class_prob: 0.3,
            interface_count: CountRange::new(0, 3),
            type_param_count: CountRange::new(0, 2),
            method_count: CountRange::new(1, 3),
            param_count: CountRange::new(0, 2),
            can_override_prob: 0.5,
            interface_ratio: 0.5,
            languages: [Lang::Java, Lang::Kotlin].into_iter().collect(),
            abstract_class_exemption: false,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: String| Err(GenError::InvalidConfig(m));
        for (name, p) in [
            ("parent_class_prob", self.parent_class_prob),
            ("can_override_prob", self.can_override_prob),
            ("interface_ratio", self.interface_ratio),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        for (name, r) in [
            ("decl_count", self.decl_count),
            ("interface_count", self.interface_count),
            ("type_param_count", self.type_param_count),
            ("method_count", self.method_count),
            ("param_count", self.param_count),
        ] {
            if r.min > r.max {
                return bad(format!("{name} range {}..{} is empty", r.min, r.max));
            }
        }
        if !self.languages.contains(&Lang::Java) {
            return bad("languages must include JAVA".into());
        }
        if self.languages.len() > 2 {
            return bad("languages may hold JAVA plus at most one other language".into());
        }
        Ok(())
    }
}

/// Generates one program; a pure function of `config`.
pub fn generate_ir_program(config: &GenConfig) -> Result<IrProgram, GenError> {
    config.validate()?;
    let mut rng = Rng::from_seed(config.seed);
    let mut program = IrProgram::new(config.seed);
    let count = rng.range(config.decl_count.to_range());
    let langs: Vec<Lang> = config.languages.iter().copied().collect();
    for _ in 0..count {
        let kind = if rng.chance(config.interface_ratio) { DeclKind::Interface } else { DeclKind::Class };
        let name = fresh_decl_name(&program, kind);
        let lang = *rng.choose(&langs).expect("validated non-empty");
        let mut decl = match kind {
            DeclKind::Interface => TypeDecl::interface(name, lang),
            DeclKind::Class => {
                let modifier = *rng.choose(&[ClassModifier::Open, ClassModifier::Final, ClassModifier::Abstract]).unwrap();
                TypeDecl::class(name, modifier, lang)
            }
        };
        decl.type_params = generate_type_parameters(&decl, &program, &mut rng, config);
        decl.supertypes = generate_super_types(&decl, &program, &mut rng, config)?;
        decl.methods = generate_methods(&decl, &program, &mut rng, config);
        let overrides = generate_overrides(&mut decl, &program, &mut rng, config)?;
        decl.methods.extend(overrides);
        program.declarations.push(decl);
    }
    Ok(program)
}

fn fresh_decl_name(program: &IrProgram, kind: DeclKind) -> String {
    let prefix = if kind == DeclKind::Interface { "I" } else { "A" };
    (0..).map(|i| format!("{prefix}{i}")).find(|n| program.decl(n).is_none()).unwrap()
}

fn fresh_method_name(program: &IrProgram, decl: &TypeDecl) -> String {
    let used: BTreeSet<&str> = program
        .declarations
        .iter()
        .chain(std::iter::once(decl))
        .flat_map(|d| d.methods.iter().map(|m| m.name.as_str()))
        .collect();
    std::iter::once("func".to_string())
        .chain((1..).map(|i| format!("func{i}")))
        .find(|n| !used.contains(n.as_str()))
        .unwrap()
}

/// Type parameters named `T<n>`, unique across the whole program.
pub fn generate_type_parameters(decl: &TypeDecl, program: &IrProgram, rng: &mut Rng, config: &GenConfig) -> Vec<TypeParamDecl> {
    let count = rng.range(config.type_param_count.to_range());
    let mut used: BTreeSet<String> = program
        .declarations
        .iter()
        .chain(std::iter::once(decl))
        .flat_map(|d| d.type_params.iter().map(|t| t.name.clone()))
        .collect();
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    while out.len() < count {
        let n = format!("T{i}");
        if used.insert(n.clone()) {
            out.push(TypeParamDecl { name: n });
        }
        i += 1;
    }
    out
}

/// Candidate type arguments: the declaration's own type parameters,
/// reference builtins, and non-generic declarations (including itself).
fn argument_pool(decl: &TypeDecl, program: &IrProgram) -> Vec<TypeRef> {
    let mut pool = vec![TypeRef::top(), TypeRef::string(), TypeRef::int()];
    pool.extend(decl.type_params.iter().map(|t| TypeRef::param(t.name.clone())));
    pool.extend(
        program
            .declarations
            .iter()
            .chain(std::iter::once(decl))
            .filter(|d| d.type_params.is_empty())
            .map(|d| TypeRef::simple(d.name.clone())),
    );
    pool
}

fn draw_args(arity: usize, pool: &[TypeRef], rng: &mut Rng) -> Vec<TypeRef> {
    (0..arity).map(|_| rng.choose(pool).cloned().expect("pool never empty")).collect()
}

/// Type for a parameter or return: anything from the argument pool, or a
/// generic declaration instantiated with pool arguments.
fn draw_usage_type(decl: &TypeDecl, program: &IrProgram, pool: &[TypeRef], rng: &mut Rng) -> TypeRef {
    let generic: Vec<&TypeDecl> = program.declarations.iter().filter(|d| !d.type_params.is_empty()).collect();
    let total = pool.len() + generic.len() + usize::from(!decl.type_params.is_empty());
    let pick = rng.below(total);
    if pick < pool.len() {
        pool[pick].clone()
    } else if pick < pool.len() + generic.len() {
        let g = generic[pick - pool.len()];
        TypeRef::class(g.name.clone(), draw_args(g.type_params.len(), pool, rng))
    } else {
        TypeRef::class(decl.name.clone(), draw_args(decl.type_params.len(), pool, rng))
    }
}

fn consistent_with(decl: &TypeDecl, program: &IrProgram, supers: &[SuperTypeRef]) -> Result<bool, IrError> {
    let mut probe = decl.clone();
    probe.supertypes = supers.to_vec();
    let h = Hierarchy::with_extra(program, &probe);
    Ok(inconsistent_instantiations(&h, &probe)?.is_empty())
}

/// Parent class (classes only) and interfaces, drawn from earlier
/// declarations. Draws that would make a generic ancestor reachable under
/// two different argument lists are retried, then dropped.
pub fn generate_super_types(
    decl: &TypeDecl,
    program: &IrProgram,
    rng: &mut Rng,
    config: &GenConfig,
) -> Result<Vec<SuperTypeRef>, IrError> {
    let pool = argument_pool(decl, program);
    let mut supers: Vec<SuperTypeRef> = Vec::new();

    if decl.kind == DeclKind::Class && rng.chance(config.parent_class_prob) {
        let parents: Vec<&TypeDecl> = program
            .declarations
            .iter()
            .filter(|d| d.kind == DeclKind::Class && d.modifier != ClassModifier::Final)
            .collect();
        if !parents.is_empty() {
            for _ in 0..RETRY_BOUND {
                let p = parents[rng.below(parents.len())];
                let st = SuperTypeRef::new(p.name.clone(), draw_args(p.type_params.len(), &pool, rng));
                let mut trial = supers.clone();
                trial.push(st);
                if consistent_with(decl, program, &trial)? {
                    supers = trial;
                    break;
                }
            }
        }
    }

    let wanted = rng.range(config.interface_count.to_range());
    let interfaces: Vec<&TypeDecl> = program.declarations.iter().filter(|d| d.kind == DeclKind::Interface).collect();
    for _ in 0..wanted {
        let open: Vec<&TypeDecl> =
            interfaces.iter().copied().filter(|i| !supers.iter().any(|s| s.target == i.name)).collect();
        if open.is_empty() {
            break;
        }
        for _ in 0..RETRY_BOUND {
            let i = open[rng.below(open.len())];
            let st = SuperTypeRef::new(i.name.clone(), draw_args(i.type_params.len(), &pool, rng));
            let mut trial = supers.clone();
            trial.push(st);
            if consistent_with(decl, program, &trial)? {
                supers = trial;
                break;
            }
        }
    }
    Ok(supers)
}

/// Fresh, uniquely named member methods.
pub fn generate_methods(decl: &TypeDecl, program: &IrProgram, rng: &mut Rng, config: &GenConfig) -> Vec<MethodDecl> {
    let pool = argument_pool(decl, program);
    let count = rng.range(config.method_count.to_range());
    let kinds: &[MethodKind] = match (decl.kind, decl.modifier) {
        (DeclKind::Interface, _) => &[MethodKind::Abstract, MethodKind::Normal],
        (DeclKind::Class, ClassModifier::Abstract) => &[MethodKind::Abstract, MethodKind::Final, MethodKind::Normal],
        (DeclKind::Class, _) => &[MethodKind::Final, MethodKind::Normal],
    };
    let mut probe = decl.clone();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let name = fresh_method_name(program, &probe);
        let n_params = rng.range(config.param_count.to_range());
        let params = (0..n_params)
            .map(|i| ParamDecl::new(format!("arg{i}"), draw_usage_type(decl, program, &pool, rng)))
            .collect();
        let return_type = if rng.below(pool.len() + 1) == 0 {
            TypeRef::builtin(Builtin::Unit)
        } else {
            draw_usage_type(decl, program, &pool, rng)
        };
        let kind = *rng.choose(kinds).unwrap();
        let m = MethodDecl::new(name, params, return_type, kind);
        probe.methods.push(m.clone());
        out.push(m);
    }
    out
}

/// The verdict the generator acts on for one inherited signature.
///
/// Classes follow the decision table. Interfaces may always choose, except
/// that several inherited contributions force an override so that no
/// interface inherits unrelated defaults.
pub fn effective_verdict(decl: &TypeDecl, inherited: &crate::ir::InheritedMethods, config: &GenConfig) -> OverrideVerdict {
    if decl.kind == DeclKind::Interface {
        return if InterfaceMethodConfig::of(inherited).is_multi() { OverrideVerdict::Must } else { OverrideVerdict::Can };
    }
    let verdict = classify_inherited(inherited);
    if verdict == OverrideVerdict::Must
        && decl.modifier == ClassModifier::Abstract
        && config.abstract_class_exemption
        && inherited.all().all(|m| m.kind == MethodKind::Abstract)
    {
        return OverrideVerdict::Can;
    }
    verdict
}

/// Override methods for `decl`. May retag `decl` (Kotlin to Java) when a
/// final parent method meets a concrete interface method.
pub fn generate_overrides(
    decl: &mut TypeDecl,
    program: &IrProgram,
    rng: &mut Rng,
    config: &GenConfig,
) -> Result<Vec<MethodDecl>, IrError> {
    let map = collect_method_signature_map(decl, program)?;
    let mut out = Vec::new();
    for (sig, inherited) in &map {
        let verdict = effective_verdict(decl, inherited, config);
        let emit = match verdict {
            OverrideVerdict::Must => true,
            OverrideVerdict::Can => rng.chance(config.can_override_prob),
            OverrideVerdict::CantStar => {
                *decl = apply_cant_star_adjustment(decl, verdict);
                false
            }
            OverrideVerdict::Cant | OverrideVerdict::Impossible => false,
        };
        if !emit {
            continue;
        }
        let first = inherited.all().next().expect("map entries are non-empty");
        let params = first
            .param_names
            .iter()
            .zip(&sig.param_types)
            .map(|(n, t)| ParamDecl::new(n.clone(), t.clone()))
            .collect();
        out.push(
            MethodDecl::new(sig.name.clone(), params, first.return_type.clone(), MethodKind::Normal)
                .overriding(inherited.targets()),
        );
    }
    Ok(out)
}
