use crate::ir::{Builtin, ClassModifier, IrProgram, MethodDecl, MethodKind, TypeDecl, TypeRef};

use super::{is_class_target, is_override, join, RenderOptions};

fn ty(t: &TypeRef) -> String {
    match t {
        TypeRef::Builtin { id } => match id {
            Builtin::Top => "Any".into(),
            Builtin::String => "String".into(),
            Builtin::Int => "Int".into(),
            Builtin::Unit => "Unit".into(),
        },
        TypeRef::TypeParam { name } => name.clone(),
        TypeRef::ClassType { name, args } if args.is_empty() => name.clone(),
        TypeRef::ClassType { name, args } => format!("{name}<{}>", join(args, ", ", ty)),
    }
}

fn value_ty(t: &TypeRef, options: &RenderOptions) -> String {
    if options.kotlin_nullable {
        format!("{}?", ty(t))
    } else {
        ty(t)
    }
}

fn header(decl: &TypeDecl, program: &IrProgram) -> String {
    let mut s = String::new();
    if decl.is_interface() {
        s.push_str("interface ");
    } else {
        match decl.modifier {
            ClassModifier::Abstract => s.push_str("abstract "),
            ClassModifier::Open => s.push_str("open "),
            ClassModifier::Final => {}
        }
        s.push_str("class ");
    }
    s.push_str(&decl.name);
    if !decl.type_params.is_empty() {
        s.push_str(&format!("<{}>", join(&decl.type_params, ", ", |t| t.name.clone())));
    }
    if !decl.supertypes.is_empty() {
        let supers = join(&decl.supertypes, ", ", |st| {
            let t = ty(&st.as_type());
            if !decl.is_interface() && is_class_target(program, &st.target) {
                format!("{t}()")
            } else {
                t
            }
        });
        s.push_str(&format!(": {supers}"));
    }
    s
}

fn method(decl: &TypeDecl, m: &MethodDecl, options: &RenderOptions, out: &mut String) {
    let params = join(&m.params, ", ", |p| format!("{}: {}", p.name, value_ty(&p.ty, options)));
    let ret = if m.return_type.is_unit() { String::new() } else { format!(": {}", value_ty(&m.return_type, options)) };
    let body = if m.return_type.is_unit() {
        " {}"
    } else if options.kotlin_nullable {
        " {\n        return null\n    }"
    } else {
        " = TODO()"
    };
    let ov = is_override(m);
    let mods = match (decl.is_interface(), m.kind, ov) {
        (true, _, true) => "override ",
        (true, _, false) => "",
        (false, MethodKind::Abstract, true) => "abstract override ",
        (false, MethodKind::Abstract, false) => "abstract ",
        (false, MethodKind::Final, true) => "final override ",
        (false, MethodKind::Final, false) => "",
        (false, MethodKind::Normal, true) => "override ",
        (false, MethodKind::Normal, false) if decl.modifier == ClassModifier::Final => "",
        (false, MethodKind::Normal, false) => "open ",
    };
    let body = if m.kind == MethodKind::Abstract { "" } else { body };
    out.push_str(&format!("    {mods}fun {}({params}){ret}{body}\n", m.name));
}

pub(super) fn render(decl: &TypeDecl, program: &IrProgram, options: &RenderOptions) -> String {
    let mut out = header(decl, program);
    if decl.methods.is_empty() {
        out.push('\n');
        return out;
    }
    out.push_str(" {\n");
    for m in &decl.methods {
        method(decl, m, options, &mut out);
    }
    out.push_str("}\n");
    out
}
