//! Override-rule conformance checker written against the IR data model
//! only. It recomputes the inherited methods of every declaration with its
//! own substitution code and looks verdicts up in the JSON table fixture.

use std::collections::{BTreeMap, BTreeSet};

use jvmfuzz::ir::{DeclKind, IrProgram, Lang, MethodKind, MethodRef, TypeDecl, TypeRef};

pub struct Table {
    columns: Vec<String>,
    rows: BTreeMap<String, Vec<String>>,
}

impl Table {
    pub fn load() -> Table {
        let text = std::fs::read_to_string(super::fixtures_dir().join("override_table.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let columns = v["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_string()).collect();
        let rows = v["rows"]
            .as_object()
            .unwrap()
            .iter()
            .map(|(k, cells)| (k.clone(), cells.as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_string()).collect()))
            .collect();
        Table { columns, rows }
    }

    pub fn cell(&self, row: &str, column: &str) -> &str {
        let i = self.columns.iter().position(|c| c == column).unwrap();
        &self.rows[row][i]
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn row_names(&self) -> impl Iterator<Item = &String> {
        self.rows.keys()
    }
}

type Bind = BTreeMap<String, TypeRef>;

fn subst(t: &TypeRef, b: &Bind) -> TypeRef {
    match t {
        TypeRef::TypeParam { name } => b.get(name).cloned().unwrap_or_else(|| t.clone()),
        TypeRef::ClassType { name, args } => {
            TypeRef::ClassType { name: name.clone(), args: args.iter().map(|a| subst(a, b)).collect() }
        }
        other => other.clone(),
    }
}

#[derive(Clone)]
struct Entry {
    owner: String,
    owner_is_class: bool,
    method: String,
    kind: MethodKind,
    depth: usize,
    on_class_chain: bool,
}

type Sig = (String, Vec<TypeRef>);

fn collect(p: &IrProgram, decl: &TypeDecl, bind: &Bind, depth: usize, chain: bool, out: &mut Vec<(Sig, Entry)>, guard: &mut Vec<String>) {
    if guard.contains(&decl.name) {
        return;
    }
    guard.push(decl.name.clone());
    for m in &decl.methods {
        let sig = (m.name.clone(), m.params.iter().map(|x| subst(&x.ty, bind)).collect());
        out.push((
            sig,
            Entry {
                owner: decl.name.clone(),
                owner_is_class: decl.kind == DeclKind::Class,
                method: m.name.clone(),
                kind: m.kind,
                depth,
                on_class_chain: chain,
            },
        ));
    }
    for st in &decl.supertypes {
        let Some(target) = p.decl(&st.target) else { continue };
        let inner: Bind =
            target.type_params.iter().zip(&st.args).map(|(tp, a)| (tp.name.clone(), subst(a, bind))).collect();
        let next_chain = chain && target.kind == DeclKind::Class;
        collect(p, target, &inner, depth + 1, next_chain, out, guard);
    }
    guard.pop();
}

fn overrides_star(p: &IrProgram, from: &MethodRef, to: &MethodRef) -> bool {
    let mut seen = BTreeSet::new();
    let mut todo = vec![from.clone()];
    while let Some(r) = todo.pop() {
        if !seen.insert(r.clone()) {
            continue;
        }
        let Some(m) = p.decl(&r.decl).and_then(|d| d.method(&r.method)) else { continue };
        for t in &m.overrides {
            if t == to {
                return true;
            }
            todo.push(t.clone());
        }
    }
    false
}

/// Per signature: the parent-class method kind and the interface methods.
pub struct Inherited {
    pub super_kind: Option<MethodKind>,
    pub iface: Vec<(MethodRef, MethodKind)>,
    pub targets: BTreeSet<MethodRef>,
}

pub fn inherited(p: &IrProgram, decl: &TypeDecl) -> BTreeMap<Sig, Inherited> {
    let own: Bind = decl.type_params.iter().map(|t| (t.name.clone(), TypeRef::param(t.name.clone()))).collect();
    let mut by_sig: BTreeMap<Sig, (Option<Entry>, Vec<Entry>)> = BTreeMap::new();
    for st in &decl.supertypes {
        let Some(target) = p.decl(&st.target) else { continue };
        let bind: Bind =
            target.type_params.iter().zip(&st.args).map(|(tp, a)| (tp.name.clone(), subst(a, &own))).collect();
        let mut found = Vec::new();
        let is_class = target.kind == DeclKind::Class;
        collect(p, target, &bind, 1, is_class, &mut found, &mut vec![decl.name.clone()]);
        let mut side: BTreeMap<Sig, Vec<Entry>> = BTreeMap::new();
        for (s, e) in found {
            side.entry(s).or_default().push(e);
        }
        for (s, entries) in side {
            let slot = by_sig.entry(s).or_default();
            let provider = entries.iter().filter(|e| e.on_class_chain && e.owner_is_class).min_by_key(|e| e.depth);
            match provider {
                Some(c) if slot.0.is_none() => slot.0 = Some(c.clone()),
                Some(_) => {}
                None => slot.1.extend(entries.into_iter().filter(|e| !e.owner_is_class)),
            }
        }
    }
    let mut out = BTreeMap::new();
    for (s, (class, ifaces)) in by_sig {
        let mut uniq: Vec<Entry> = Vec::new();
        for e in ifaces {
            if !uniq.iter().any(|u| u.owner == e.owner && u.method == e.method) {
                uniq.push(e);
            }
        }
        let mut refs: Vec<MethodRef> = uniq.iter().map(|e| MethodRef::new(&e.owner, &e.method)).collect();
        let n = refs.len();
        if let Some(c) = &class {
            refs.push(MethodRef::new(&c.owner, &c.method));
        }
        let kept: Vec<(MethodRef, MethodKind)> = uniq
            .iter()
            .zip(&refs[..n])
            .filter(|(_, r)| !refs.iter().any(|o| o != *r && overrides_star(p, o, r)))
            .map(|(e, r)| (r.clone(), e.kind))
            .collect();
        let mut targets: BTreeSet<MethodRef> = kept.iter().map(|(r, _)| r.clone()).collect();
        if let Some(c) = &class {
            targets.insert(MethodRef::new(&c.owner, &c.method));
        }
        out.insert(s, Inherited { super_kind: class.map(|c| c.kind), iface: kept, targets });
    }
    out
}

fn row(kind: Option<MethodKind>) -> &'static str {
    match kind {
        None => "NULL",
        Some(MethodKind::Abstract) => "ABSTRACT",
        Some(MethodKind::Final) => "FINAL",
        Some(MethodKind::Normal) => "NORMAL",
    }
}

fn column(iface: &[(MethodRef, MethodKind)]) -> &'static str {
    let concrete = iface.iter().any(|(_, k)| *k != MethodKind::Abstract);
    match (iface.len(), concrete) {
        (0, _) => "NONE",
        (1, false) => "ONE_ABSTRACT",
        (1, true) => "ONE_CONCRETE",
        (_, false) => "MULTI_ALL_ABSTRACT",
        (_, true) => "MULTI_SOME_CONCRETE",
    }
}

/// Every override-rule violation in `p`, as human-readable strings.
pub fn check(p: &IrProgram, table: &Table) -> Vec<String> {
    let mut errors = Vec::new();
    for d in &p.declarations {
        for (sig, inh) in inherited(p, d) {
            let declared = d.methods.iter().find(|m| m.name == sig.0 && m.params.iter().map(|x| &x.ty).eq(sig.1.iter()));
            let verdict = if d.kind == DeclKind::Interface {
                if inh.iface.len() > 1 { "MUST" } else { "CAN" }
            } else {
                table.cell(row(inh.super_kind), column(&inh.iface))
            };
            let at = format!("{}.{}", d.name, sig.0);
            match verdict {
                "MUST" if declared.is_none() => errors.push(format!("{at}: MUST override but does not")),
                "CANT" | "CANT_STAR" if declared.is_some() => errors.push(format!("{at}: {verdict} but overrides")),
                "IMPOSSIBLE" => errors.push(format!("{at}: impossible cell reached")),
                _ => {}
            }
            if verdict == "CANT_STAR" && d.lang == Lang::Kotlin {
                errors.push(format!("{at}: CANT* left on a Kotlin class"));
            }
            if let Some(m) = declared {
                if m.overrides != inh.targets {
                    errors.push(format!("{at}: overrides {:?}, expected {:?}", m.overrides, inh.targets));
                }
            }
        }
        for m in &d.methods {
            if m.overrides.is_empty() {
                continue;
            }
            let inh = inherited(p, d);
            let sig = (m.name.clone(), m.params.iter().map(|x| x.ty.clone()).collect::<Vec<_>>());
            if !inh.contains_key(&sig) {
                errors.push(format!("{}.{}: overrides without inheriting the signature", d.name, m.name));
            }
        }
    }
    errors
}
