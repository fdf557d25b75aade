//! Source renderers. Each declaration becomes one file in the language of
//! its tag; files live in the default package.

mod java;
mod kotlin;
mod scala;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ir::{IrProgram, Lang, MethodDecl, TypeDecl, TypeRef};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("{lang} cannot express {what} in `{decl}`")]
    UnrenderableConstruct { lang: Lang, decl: String, what: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    /// Render Kotlin parameter and return types as nullable so bodies can
    /// return `null`.
    pub kotlin_nullable: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { kotlin_nullable: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub path: String,
    pub lang: Lang,
    pub content: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceBundle {
    pub files: Vec<SourceFile>,
    /// Declaration name to file path.
    pub entry_metadata: BTreeMap<String, String>,
}

impl SourceBundle {
    pub fn languages(&self) -> Vec<Lang> {
        let mut out: Vec<Lang> = self.files.iter().map(|f| f.lang).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn files_in(&self, lang: Lang) -> impl Iterator<Item = &SourceFile> {
        self.files.iter().filter(move |f| f.lang == lang)
    }

    /// All files concatenated with `// FILE:` separators.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        for f in &self.files {
            out.push_str(&format!("// FILE: {}\n", f.path));
            out.push_str(&f.content);
        }
        out
    }

    /// Writes `<dir>/src/<file>` for every file plus `<dir>/bundle.json`.
    pub fn write_to(&self, dir: &Path) -> io::Result<PathBuf> {
        let src = dir.join("src");
        fs::create_dir_all(&src)?;
        for f in &self.files {
            fs::write(src.join(&f.path), &f.content)?;
        }
        let manifest = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        fs::write(dir.join("bundle.json"), manifest + "\n")?;
        Ok(src)
    }

    pub fn read_from(dir: &Path) -> io::Result<SourceBundle> {
        let text = fs::read_to_string(dir.join("bundle.json"))?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

pub fn render(program: &IrProgram) -> Result<SourceBundle, RenderError> {
    render_with(program, &RenderOptions::default())
}

pub fn render_with(program: &IrProgram, options: &RenderOptions) -> Result<SourceBundle, RenderError> {
    let mut bundle = SourceBundle::default();
    for d in &program.declarations {
        let path = format!("{}.{}", d.name, d.lang.extension());
        let content = render_decl_with(d, program, options)?;
        bundle.entry_metadata.insert(d.name.clone(), path.clone());
        bundle.files.push(SourceFile { path, lang: d.lang, content });
    }
    Ok(bundle)
}

pub fn render_decl(decl: &TypeDecl, program: &IrProgram) -> Result<String, RenderError> {
    render_decl_with(decl, program, &RenderOptions::default())
}

pub fn render_decl_with(decl: &TypeDecl, program: &IrProgram, options: &RenderOptions) -> Result<String, RenderError> {
    check_renderable(decl)?;
    Ok(match decl.lang {
        Lang::Java | Lang::Groovy => java::render(decl, program),
        Lang::Kotlin => kotlin::render(decl, program, options),
        Lang::Scala => scala::render(decl, program),
    })
}

fn check_renderable(decl: &TypeDecl) -> Result<(), RenderError> {
    let fail = |what: String| RenderError::UnrenderableConstruct { lang: decl.lang, decl: decl.name.clone(), what };
    let nested_unit = |t: &TypeRef| {
        let mut hit = false;
        if let TypeRef::ClassType { args, .. } = t {
            for a in args {
                a.walk(&mut |x| hit |= x.is_unit());
            }
        }
        hit
    };
    for st in &decl.supertypes {
        if st.args.iter().any(|a| {
            let mut hit = false;
            a.walk(&mut |x| hit |= x.is_unit());
            hit
        }) {
            return Err(fail(format!("a unit type argument to `{}`", st.target)));
        }
    }
    for m in &decl.methods {
        if m.params.iter().any(|p| p.ty.is_unit() || nested_unit(&p.ty)) || nested_unit(&m.return_type) {
            return Err(fail(format!("a unit type outside the return position of `{}`", m.name)));
        }
        if decl.is_interface() && m.kind == crate::ir::MethodKind::Final {
            return Err(fail(format!("final interface method `{}`", m.name)));
        }
    }
    Ok(())
}

/// Whether a supertype name refers to a class (as opposed to an interface).
fn is_class_target(program: &IrProgram, name: &str) -> bool {
    program.decl(name).map(|d| !d.is_interface()).unwrap_or(false)
}

fn is_override(m: &MethodDecl) -> bool {
    !m.overrides.is_empty()
}

fn join<T>(items: &[T], sep: &str, f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(sep)
}
