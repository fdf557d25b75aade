//! Trigger-program characteristics: inheritance depth/width, cross-language
//! and generics flags, and the language-switch complexity used by the
//! minimizer.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{IrProgram, TypeDecl, TypeRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramMetrics {
    pub cross_language: bool,
    pub generics_related: bool,
    pub depth: usize,
    pub width: usize,
}

impl ProgramMetrics {
    pub fn of(program: &IrProgram) -> Self {
        ProgramMetrics {
            cross_language: is_cross_language(program),
            generics_related: is_generics_related(program),
            depth: inheritance_depth(program),
            width: inheritance_width(program),
        }
    }
}

/// Longest supertype chain, counted in edges, with a lone declaration
/// counting as a chain of length 1. Zero for an empty program.
pub fn inheritance_depth(program: &IrProgram) -> usize {
    if program.declarations.is_empty() {
        return 0;
    }
    let longest = longest_chain(program, |_, _| 1);
    longest.max(1)
}

/// Largest supertype list of any single declaration.
pub fn inheritance_width(program: &IrProgram) -> usize {
    program.declarations.iter().map(|d| d.supertypes.len()).max().unwrap_or(0)
}

/// Maximum number of language switches along any inheritance chain.
pub fn cross_language_complexity(program: &IrProgram) -> usize {
    longest_chain(program, |child, parent| usize::from(child.lang != parent.lang))
}

/// Longest weighted path over supertype edges. Cycles are cut.
fn longest_chain(program: &IrProgram, weight: impl Fn(&TypeDecl, &TypeDecl) -> usize) -> usize {
    let by_name: HashMap<&str, &TypeDecl> = program.declarations.iter().map(|d| (d.name.as_str(), d)).collect();
    let mut memo: HashMap<&str, usize> = HashMap::new();

    fn visit<'a>(
        d: &'a TypeDecl,
        by_name: &HashMap<&'a str, &'a TypeDecl>,
        memo: &mut HashMap<&'a str, usize>,
        on_path: &mut Vec<&'a str>,
        weight: &dyn Fn(&TypeDecl, &TypeDecl) -> usize,
    ) -> usize {
        if let Some(v) = memo.get(d.name.as_str()) {
            return *v;
        }
        if on_path.contains(&d.name.as_str()) {
            return 0;
        }
        on_path.push(d.name.as_str());
        let mut best = 0;
        for st in &d.supertypes {
            if let Some(parent) = by_name.get(st.target.as_str()) {
                let v = weight(d, parent) + visit(parent, by_name, memo, on_path, weight);
                best = best.max(v);
            }
        }
        on_path.pop();
        memo.insert(d.name.as_str(), best);
        best
    }

    let mut on_path = Vec::new();
    program
        .declarations
        .iter()
        .map(|d| visit(d, &by_name, &mut memo, &mut on_path, &weight))
        .max()
        .unwrap_or(0)
}

/// True when some declaration references (as supertype or type usage) a
/// declaration tagged with a different language.
pub fn is_cross_language(program: &IrProgram) -> bool {
    let langs: HashMap<&str, _> = program.declarations.iter().map(|d| (d.name.as_str(), d.lang)).collect();
    program.declarations.iter().any(|d| {
        let differs = |name: &str| langs.get(name).is_some_and(|l| *l != d.lang);
        if d.supertypes.iter().any(|s| differs(&s.target)) {
            return true;
        }
        let mut hit = false;
        for t in d.type_usages() {
            t.walk(&mut |t| {
                if let TypeRef::ClassType { name, .. } = t {
                    hit |= differs(name);
                }
            });
        }
        hit
    })
}

pub fn is_generics_related(program: &IrProgram) -> bool {
    program.declarations.iter().any(|d| !d.type_params.is_empty())
}
