//! Polynomial indeterminates: variables, `pi`, and function kernels.
//!
//! Every atom is interned once in a process-wide table and referred to by an
//! [`AtomId`]. Ids depend on interning order, so anything that must be stable
//! across runs (printing order) uses the atom's sort key instead.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::Arc;

use once_cell::sync::Lazy;
use parking_lot::RwLock;

use crate::expr::{Expr, Func, Symbol, UserFn};

pub type AtomId = u32;

/// An indeterminate of the rational-function field.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Atom {
    Var(Symbol),
    Pi,
    /// Elementary function applied to a canonical argument.
    Func(Func, Expr),
    /// `base^(1/q)` for `q >= 2`; `q == 2` prints as `sqrt`.
    Root(Expr, u32),
    /// Opaque user function (possibly differentiated) at canonical arguments.
    User(UserFn, Vec<Expr>),
}

impl Atom {
    pub fn is_constant(&self) -> bool {
        match self {
            Atom::Var(_) => false,
            Atom::Pi => true,
            Atom::Func(_, a) | Atom::Root(a, _) => a.is_constant(),
            Atom::User(_, args) => args.iter().all(Expr::is_constant),
        }
    }

    /// Variables occurring anywhere inside the atom.
    pub fn free_vars(&self, out: &mut Vec<Symbol>) {
        match self {
            Atom::Var(s) => {
                if !out.contains(s) {
                    out.push(s.clone())
                }
            }
            Atom::Pi => {}
            Atom::Func(_, a) | Atom::Root(a, _) => a.collect_vars(out),
            Atom::User(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::print::atom_plain(self))
    }
}

struct Entry {
    atom: Arc<Atom>,
    key: Arc<str>,
}

struct Interner {
    atoms: Vec<Entry>,
    ids: HashMap<Arc<Atom>, AtomId>,
}

static INTERNER: Lazy<RwLock<Interner>> = Lazy::new(|| {
    RwLock::new(Interner {
        atoms: Vec::new(),
        ids: HashMap::new(),
    })
});

fn sort_key(atom: &Atom) -> String {
    let class = match atom {
        Atom::Pi => '0',
        Atom::Var(_) => '1',
        _ => '2',
    };
    format!("{class}{}", crate::print::atom_plain(atom))
}

static ROOTS_PRESENT: AtomicBool = AtomicBool::new(false);

/// Whether any root kernel has been created; lets the common case skip the
/// root-reduction pass.
pub fn roots_present() -> bool {
    ROOTS_PRESENT.load(AtomicOrdering::Relaxed)
}

pub fn intern(atom: Atom) -> AtomId {
    if let Some(&id) = INTERNER.read().ids.get(&atom) {
        return id;
    }
    let key: Arc<str> = Arc::from(sort_key(&atom));
    let mut w = INTERNER.write();
    if let Some(&id) = w.ids.get(&atom) {
        return id;
    }
    let id = w.atoms.len() as AtomId;
    if matches!(atom, Atom::Root(..)) {
        ROOTS_PRESENT.store(true, AtomicOrdering::Relaxed);
    }
    let a = Arc::new(atom);
    w.atoms.push(Entry {
        atom: a.clone(),
        key,
    });
    w.ids.insert(a, id);
    id
}

pub fn lookup(id: AtomId) -> Arc<Atom> {
    INTERNER.read().atoms[id as usize].atom.clone()
}

/// Run-independent ordering key of an interned atom.
pub fn key(id: AtomId) -> Arc<str> {
    INTERNER.read().atoms[id as usize].key.clone()
}

pub fn var_id(name: &str) -> AtomId {
    intern(Atom::Var(Arc::from(name)))
}

pub fn pi_id() -> AtomId {
    intern(Atom::Pi)
}
