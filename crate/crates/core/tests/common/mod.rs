//! Shared builders for the trigger-program fixtures.
#![allow(dead_code)]

use std::path::PathBuf;

pub mod conformance;
pub mod criteria;
pub mod mock;

use jvmfuzz::ir::{
    ClassModifier, IrProgram, Lang, MethodDecl, MethodKind, MethodRef, ParamDecl, SuperTypeRef, TypeDecl, TypeRef,
};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn st(target: &str) -> SuperTypeRef {
    SuperTypeRef::new(target, vec![])
}

fn st_args(target: &str, args: Vec<TypeRef>) -> SuperTypeRef {
    SuperTypeRef::new(target, args)
}

fn m(name: &str, params: Vec<(&str, TypeRef)>, ret: TypeRef, kind: MethodKind) -> MethodDecl {
    MethodDecl::new(name, params.into_iter().map(|(n, t)| ParamDecl::new(n, t)).collect(), ret, kind)
}

fn r(decl: &str, method: &str) -> MethodRef {
    MethodRef::new(decl, method)
}

pub fn fig2() -> IrProgram {
    use Lang::Kotlin;
    IrProgram::new(2)
        .with_decl(
            TypeDecl::class("A", ClassModifier::Open, Kotlin)
                .with_method(m("foo", vec![], TypeRef::unit(), MethodKind::Final)),
        )
        .with_decl(TypeDecl::interface("IB", Kotlin).with_method(m("foo", vec![], TypeRef::unit(), MethodKind::Normal)))
        .with_decl(TypeDecl::class("C", ClassModifier::Final, Kotlin).with_super(st("A")).with_super(st("IB")))
}

fn fig3_base(a3_overrides: bool) -> IrProgram {
    use Lang::{Java, Kotlin};
    let func = |kind| m("func", vec![("arg0", TypeRef::top())], TypeRef::unit(), kind);
    let mut a3 = TypeDecl::class("A3", ClassModifier::Final, Kotlin)
        .with_super(st_args("A2", vec![TypeRef::top()]))
        .with_super(st("I1"))
        .with_super(st("I0"));
    if a3_overrides {
        a3 = a3.with_method(func(MethodKind::Normal).overriding([r("A1", "func"), r("I1", "func")]));
    }
    IrProgram::new(3)
        .with_decl(TypeDecl::interface("I0", Kotlin).with_method(func(MethodKind::Abstract)))
        .with_decl(
            TypeDecl::interface("I1", Kotlin)
                .with_super(st("I0"))
                .with_method(func(MethodKind::Normal).overriding([r("I0", "func")])),
        )
        .with_decl(
            TypeDecl::class("A1", ClassModifier::Abstract, Kotlin)
                .with_super(st("I0"))
                .with_method(func(MethodKind::Normal).overriding([r("I0", "func")])),
        )
        .with_decl(
            TypeDecl::class("A2", ClassModifier::Open, Java)
                .with_type_params(&["T"])
                .with_super(st("A1"))
                .with_super(st("I1")),
        )
        .with_decl(a3)
}

/// The published trigger: `A3` leaves `func` to its supertypes.
pub fn fig3() -> IrProgram {
    fig3_base(false)
}

/// The generated program before function removal dropped `A3::func`.
pub fn fig3_pre() -> IrProgram {
    fig3_base(true)
}

pub fn fig6a() -> IrProgram {
    use Lang::Kotlin;
    IrProgram::new(6)
        .with_decl(TypeDecl::interface("I0", Kotlin))
        .with_decl(TypeDecl::interface("I1", Kotlin).with_type_params(&["T0"]).with_super(st("I0")))
        .with_decl(TypeDecl::interface("I2", Kotlin).with_super(st_args("I1", vec![TypeRef::simple("I0")])))
        .with_decl(
            TypeDecl::class("A2", ClassModifier::Final, Kotlin)
                .with_super(st("I2"))
                .with_super(st("I0"))
                .with_super(st_args("I1", vec![TypeRef::simple("A2")])),
        )
}

pub fn fig6b() -> IrProgram {
    use Lang::Scala;
    IrProgram::new(61)
        .with_decl(
            TypeDecl::class("A0", ClassModifier::Abstract, Scala).with_type_params(&["T"]).with_method(m(
                "func",
                vec![("arg0", TypeRef::class("A0", vec![TypeRef::string()])), ("arg1", TypeRef::param("T"))],
                TypeRef::unit(),
                MethodKind::Abstract,
            )),
        )
        .with_decl(
            TypeDecl::class("A1", ClassModifier::Abstract, Scala)
                .with_super(st_args("A0", vec![TypeRef::string()]))
                .with_method(
                    m(
                        "func",
                        vec![("arg0", TypeRef::class("A0", vec![TypeRef::top()])), ("arg1", TypeRef::string())],
                        TypeRef::unit(),
                        MethodKind::Normal,
                    )
                    .overriding([r("A0", "func")]),
                ),
        )
}

pub fn fig7a() -> IrProgram {
    use Lang::{Groovy, Java};
    IrProgram::new(7)
        .with_decl(
            TypeDecl::interface("A", Java)
                .with_type_params(&["T"])
                .with_method(m("func", vec![], TypeRef::param("T"), MethodKind::Abstract)),
        )
        .with_decl(
            TypeDecl::interface("B", Java)
                .with_super(st_args("A", vec![TypeRef::string()]))
                .with_method(m("func", vec![], TypeRef::string(), MethodKind::Normal).overriding([r("A", "func")])),
        )
        .with_decl(
            TypeDecl::class("C", ClassModifier::Open, Groovy)
                .with_super(st_args("A", vec![TypeRef::string()]))
                .with_super(st("B")),
        )
}

/// Control: the same shape without type parameters.
pub fn fig7b() -> IrProgram {
    use Lang::{Groovy, Java};
    IrProgram::new(71)
        .with_decl(TypeDecl::interface("A1", Java).with_method(m("func", vec![], TypeRef::string(), MethodKind::Abstract)))
        .with_decl(
            TypeDecl::interface("B1", Java)
                .with_super(st("A1"))
                .with_method(m("func", vec![], TypeRef::string(), MethodKind::Normal).overriding([r("A1", "func")])),
        )
        .with_decl(TypeDecl::class("C1", ClassModifier::Open, Groovy).with_super(st("A1")).with_super(st("B1")))
}

pub fn fig8() -> IrProgram {
    use Lang::{Java, Kotlin};
    let func = |kind| m("func", vec![], TypeRef::unit(), kind);
    IrProgram::new(8)
        .with_decl(TypeDecl::interface("ITop", Java).with_method(func(MethodKind::Normal)))
        .with_decl(
            TypeDecl::interface("ISecondary", Java)
                .with_super(st("ITop"))
                .with_method(func(MethodKind::Normal).overriding([r("ITop", "func")])),
        )
        .with_decl(TypeDecl::interface("IChild", Java).with_super(st("ISecondary")).with_super(st("ITop")))
        .with_decl(
            TypeDecl::class("GrandParent", ClassModifier::Open, Java)
                .with_super(st("ITop"))
                .with_method(func(MethodKind::Final).overriding([r("ITop", "func")])),
        )
        .with_decl(
            TypeDecl::class("Parent", ClassModifier::Open, Java).with_super(st("GrandParent")).with_super(st("ISecondary")),
        )
        .with_decl(
            TypeDecl::class("Child", ClassModifier::Abstract, Kotlin).with_super(st("Parent")).with_super(st("IChild")),
        )
}

pub fn fig9() -> IrProgram {
    use Lang::{Java, Kotlin};
    IrProgram::new(9)
        .with_decl(
            TypeDecl::class("A0", ClassModifier::Abstract, Java).with_type_params(&["T"]).with_method(m(
                "func",
                vec![("arg0", TypeRef::class("A0", vec![TypeRef::top()])), ("arg1", TypeRef::param("T"))],
                TypeRef::top(),
                MethodKind::Abstract,
            )),
        )
        .with_decl(
            TypeDecl::class("A1", ClassModifier::Abstract, Java)
                .with_super(st_args("A0", vec![TypeRef::simple("A1")]))
                .with_method(m(
                    "func",
                    vec![("arg0", TypeRef::class("A0", vec![TypeRef::simple("A1")])), ("arg1", TypeRef::simple("A1"))],
                    TypeRef::top(),
                    MethodKind::Normal,
                )),
        )
        .with_decl(TypeDecl::class("A2", ClassModifier::Final, Kotlin).with_super(st("A1")))
}

pub fn fig11() -> IrProgram {
    use Lang::Groovy;
    IrProgram::new(11)
        .with_decl(
            TypeDecl::class("A", ClassModifier::Open, Groovy)
                .with_method(m("func", vec![], TypeRef::unit(), MethodKind::Final)),
        )
        .with_decl(TypeDecl::interface("I0", Groovy).with_method(m("func", vec![], TypeRef::unit(), MethodKind::Normal)))
        .with_decl(TypeDecl::class("B", ClassModifier::Open, Groovy).with_super(st("A")).with_super(st("I0")))
}

fn fig12_base(arg: TypeRef) -> IrProgram {
    use Lang::{Java, Scala};
    IrProgram::new(12)
        .with_decl(TypeDecl::interface("I0", Java).with_type_params(&["T"]).with_method(m(
            "func",
            vec![("t", TypeRef::param("T"))],
            TypeRef::param("T"),
            MethodKind::Normal,
        )))
        .with_decl(
            TypeDecl::interface("I1", Java).with_super(st_args("I0", vec![TypeRef::string()])).with_method(
                m("func", vec![("s", TypeRef::string())], TypeRef::string(), MethodKind::Normal)
                    .overriding([r("I0", "func")]),
            ),
        )
        .with_decl(
            TypeDecl::class("A0", ClassModifier::Abstract, Scala)
                .with_super(st("I1"))
                .with_super(st_args("I0", vec![arg.clone()]))
                .with_method(
                    m("func", vec![("s", arg)], TypeRef::string(), MethodKind::Normal)
                        .overriding([r("I1", "func"), r("I0", "func")]),
                ),
        )
}

/// The mutated trigger: `I0<Object>` and an `Object` parameter.
pub fn fig12() -> IrProgram {
    fig12_base(TypeRef::top())
}

/// Before the two type changes.
pub fn fig12_pre() -> IrProgram {
    fig12_base(TypeRef::string())
}

/// Every transcribable trigger program, by fixture name.
pub fn all_figures() -> Vec<(&'static str, IrProgram)> {
    vec![
        ("fig2", fig2()),
        ("fig3", fig3()),
        ("fig6a", fig6a()),
        ("fig6b", fig6b()),
        ("fig7a", fig7a()),
        ("fig7b", fig7b()),
        ("fig8", fig8()),
        ("fig9", fig9()),
        ("fig11", fig11()),
        ("fig12", fig12()),
    ]
}

/// Identifier, number and punctuation tokens; whitespace is ignored.
pub fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() || c == '_' {
            cur.push(c);
            continue;
        }
        if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
        if !c.is_whitespace() {
            out.push(c.to_string());
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}
