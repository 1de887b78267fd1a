use std::collections::BTreeMap;

use thiserror::Error;

pub const ROOT_TYPE: &str = "object";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeTreeError {
    #[error("type `{0}` declared twice")]
    Duplicate(String),
    #[error("type `{child}` names undeclared parent `{parent}`")]
    UnknownParent { child: String, parent: String },
    #[error("type hierarchy has a cycle through `{0}`")]
    Cycle(String),
}

/// Type hierarchy of a domain.
///
/// `object` always exists. A type declared without `- parent` is a root of
/// its own, so `robot` and `liquid` need not be objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeTree {
    order: Vec<String>,
    parent: BTreeMap<String, Option<String>>,
}

impl Default for TypeTree {
    fn default() -> Self {
        let mut parent = BTreeMap::new();
        parent.insert(ROOT_TYPE.to_string(), None);
        TypeTree { order: Vec::new(), parent }
    }
}

impl TypeTree {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a tree from `(type, parent)` pairs in declaration order.
    /// Parents may be declared after their children.
    pub fn from_decls<I>(decls: I) -> Result<Self, TypeTreeError>
    where
        I: IntoIterator<Item = (String, Option<String>)>,
    {
        let mut tree = TypeTree::default();
        for (name, parent) in decls {
            if tree.order.contains(&name) {
                return Err(TypeTreeError::Duplicate(name));
            }
            if name == ROOT_TYPE && parent.is_some() {
                return Err(TypeTreeError::Cycle(name));
            }
            tree.order.push(name.clone());
            tree.parent.insert(name, parent);
        }
        for (child, parent) in &tree.parent {
            if let Some(p) = parent {
                if !tree.parent.contains_key(p) {
                    return Err(TypeTreeError::UnknownParent { child: child.clone(), parent: p.clone() });
                }
            }
        }
        for name in tree.parent.keys() {
            let mut cur = tree.parent[name].as_ref();
            let mut steps = 0;
            while let Some(p) = cur {
                steps += 1;
                if p == name || steps > tree.parent.len() {
                    return Err(TypeTreeError::Cycle(name.clone()));
                }
                cur = tree.parent[p].as_ref();
            }
        }
        Ok(tree)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.parent.contains_key(name)
    }

    pub fn parent_of(&self, name: &str) -> Option<&str> {
        self.parent.get(name).and_then(|p| p.as_deref())
    }

    /// Reflexive-transitive subtype test.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        let mut cur = Some(sub);
        while let Some(t) = cur {
            if t == sup {
                return true;
            }
            cur = self.parent_of(t);
        }
        false
    }

    /// Declared types with their parents, in declaration order.
    pub fn declared(&self) -> impl Iterator<Item = (&str, Option<&str>)> {
        self.order.iter().map(|t| (t.as_str(), self.parent_of(t)))
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}
