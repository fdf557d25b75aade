use crate::ir::{Builtin, ClassModifier, IrProgram, MethodDecl, MethodKind, TypeDecl, TypeRef};

use super::{is_class_target, is_override, join};

fn ty(t: &TypeRef) -> String {
    match t {
        TypeRef::Builtin { id } => match id {
            Builtin::Top => "AnyRef".into(),
            Builtin::String => "String".into(),
            // Boxed, so signatures match Java's Integer and Kotlin's Int?.
            Builtin::Int => "Integer".into(),
            Builtin::Unit => "Unit".into(),
        },
        TypeRef::TypeParam { name } => name.clone(),
        TypeRef::ClassType { name, args } if args.is_empty() => name.clone(),
        TypeRef::ClassType { name, args } => format!("{name}[{}]", join(args, ", ", ty)),
    }
}

fn header(decl: &TypeDecl, program: &IrProgram) -> String {
    let mut s = String::new();
    if decl.is_interface() {
        s.push_str("trait ");
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
        s.push_str(&format!("[{}]", join(&decl.type_params, ", ", |t| t.name.clone())));
    }
    // The class parent must come first; trait order is kept.
    let mut supers: Vec<_> = decl.supertypes.iter().filter(|st| is_class_target(program, &st.target)).collect();
    supers.extend(decl.supertypes.iter().filter(|st| !is_class_target(program, &st.target)));
    for (i, st) in supers.iter().enumerate() {
        s.push_str(if i == 0 { " extends " } else { " with " });
        s.push_str(&ty(&st.as_type()));
    }
    s
}

fn method(m: &MethodDecl, out: &mut String) {
    let params = join(&m.params, ", ", |p| format!("{}: {}", p.name, ty(&p.ty)));
    let ret = ty(&m.return_type);
    let mut mods = String::new();
    if is_override(m) {
        mods.push_str("override ");
    }
    if m.kind == MethodKind::Final {
        mods.push_str("final ");
    }
    let body = match m.kind {
        MethodKind::Abstract => String::new(),
        _ if m.return_type.is_unit() => " = {}".into(),
        _ => format!(" = null.asInstanceOf[{ret}]"),
    };
    out.push_str(&format!("  {mods}def {}({params}): {ret}{body}\n", m.name));
}

pub(super) fn render(decl: &TypeDecl, program: &IrProgram) -> String {
    let mut out = header(decl, program);
    if decl.methods.is_empty() {
        out.push('\n');
        return out;
    }
    out.push_str(" {\n");
    for m in &decl.methods {
        method(m, &mut out);
    }
    out.push_str("}\n");
    out
}
