//! Java and Groovy share one surface syntax for the constructs we emit.

use crate::ir::{Builtin, ClassModifier, IrProgram, MethodDecl, MethodKind, TypeDecl, TypeRef};

use super::{is_class_target, is_override, join};

pub(super) fn ty(t: &TypeRef) -> String {
    match t {
        TypeRef::Builtin { id } => match id {
            Builtin::Top => "Object".into(),
            Builtin::String => "String".into(),
            Builtin::Int => "Integer".into(),
            Builtin::Unit => "void".into(),
        },
        TypeRef::TypeParam { name } => name.clone(),
        TypeRef::ClassType { name, args } if args.is_empty() => name.clone(),
        TypeRef::ClassType { name, args } => format!("{name}<{}>", join(args, ", ", ty)),
    }
}

fn header(decl: &TypeDecl, program: &IrProgram) -> String {
    let mut s = String::from("public ");
    if decl.is_interface() {
        s.push_str("interface ");
    } else {
        match decl.modifier {
            ClassModifier::Abstract => s.push_str("abstract "),
            ClassModifier::Final => s.push_str("final "),
            ClassModifier::Open => {}
        }
        s.push_str("class ");
    }
    s.push_str(&decl.name);
    if !decl.type_params.is_empty() {
        s.push_str(&format!("<{}>", join(&decl.type_params, ", ", |t| t.name.clone())));
    }
    let (classes, ifaces): (Vec<_>, Vec<_>) =
        decl.supertypes.iter().partition(|st| !decl.is_interface() && is_class_target(program, &st.target));
    if let Some(c) = classes.first() {
        s.push_str(&format!(" extends {}", ty(&c.as_type())));
    }
    if !ifaces.is_empty() {
        let kw = if decl.is_interface() { "extends" } else { "implements" };
        s.push_str(&format!(" {kw} {}", join(&ifaces, ", ", |st| ty(&st.as_type()))));
    }
    s
}

fn method(decl: &TypeDecl, m: &MethodDecl, out: &mut String) {
    if is_override(m) {
        out.push_str("    @Override\n");
    }
    let params = join(&m.params, ", ", |p| format!("{} {}", ty(&p.ty), p.name));
    let sig = format!("{} {}({params})", ty(&m.return_type), m.name);
    let body = if m.return_type.is_unit() { "{}".to_string() } else { "{\n        return null;\n    }".to_string() };
    let line = match (decl.is_interface(), m.kind) {
        (true, MethodKind::Abstract) => format!("public {sig};"),
        (true, _) => format!("public default {sig} {body}"),
        (false, MethodKind::Abstract) => format!("public abstract {sig};"),
        (false, MethodKind::Final) => format!("public final {sig} {body}"),
        (false, MethodKind::Normal) => format!("public {sig} {body}"),
    };
    out.push_str("    ");
    out.push_str(&line);
    out.push('\n');
}

pub(super) fn render(decl: &TypeDecl, program: &IrProgram) -> String {
    let mut out = header(decl, program);
    out.push_str(" {\n");
    for m in &decl.methods {
        method(decl, m, &mut out);
    }
    out.push_str("}\n");
    out
}
