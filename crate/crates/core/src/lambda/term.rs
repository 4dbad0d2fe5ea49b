use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

/// Variable identifier. Shared so that rewriting can copy names cheaply.
pub type Name = Arc<str>;

/// An untyped lambda term.
///
/// Terms are immutable and structurally shared: rewriting clones `Arc`s
/// instead of whole subtrees, which matters because the distribution rule
/// duplicates its argument on every application. Each node caches its tree
/// size, its free variables and whether a redex occurs anywhere below it.
///
/// Equality and hashing are alpha-canonical: `λx.x == λy.y`.
#[derive(Clone)]
pub struct LambdaTerm(Arc<Node>);

struct Node {
    kind: TermKind,
    size: usize,
    free: BTreeSet<Name>,
    has_redex: bool,
}

// Long chains of uniquely owned nodes would overflow the stack under the
// default recursive drop, so children are detached onto a heap stack.
impl Drop for Node {
    fn drop(&mut self) {
        let mut stack = Vec::new();
        detach_children(&mut self.kind, &mut stack);
        while let Some(term) = stack.pop() {
            if let Ok(mut node) = Arc::try_unwrap(term.0) {
                detach_children(&mut node.kind, &mut stack);
            }
        }
    }
}

fn detach_children(kind: &mut TermKind, stack: &mut Vec<LambdaTerm>) {
    match kind {
        TermKind::Var(_) => {}
        TermKind::Abs(_, body) => stack.push(std::mem::replace(body, placeholder())),
        TermKind::App(f, a) => {
            stack.push(std::mem::replace(f, placeholder()));
            stack.push(std::mem::replace(a, placeholder()));
        }
    }
}

fn placeholder() -> LambdaTerm {
    static LEAF: OnceLock<LambdaTerm> = OnceLock::new();
    LEAF.get_or_init(|| LambdaTerm::var("_")).clone()
}

/// The three term constructors.
pub enum TermKind {
    Var(Name),
    Abs(Name, LambdaTerm),
    App(LambdaTerm, LambdaTerm),
}

impl LambdaTerm {
    pub fn var(name: impl Into<Name>) -> Self {
        let name = name.into();
        let mut free = BTreeSet::new();
        free.insert(name.clone());
        LambdaTerm(Arc::new(Node {
            kind: TermKind::Var(name),
            size: 1,
            free,
            has_redex: false,
        }))
    }

    pub fn abs(bound: impl Into<Name>, body: LambdaTerm) -> Self {
        let bound = bound.into();
        let mut free = body.0.free.clone();
        free.remove(&bound);
        LambdaTerm(Arc::new(Node {
            size: body.size().saturating_add(1),
            has_redex: body.has_redex(),
            free,
            kind: TermKind::Abs(bound, body),
        }))
    }

    pub fn app(function: LambdaTerm, argument: LambdaTerm) -> Self {
        let mut free = function.0.free.clone();
        free.extend(argument.0.free.iter().cloned());
        let has_redex = function.is_abs() || function.has_redex() || argument.has_redex();
        LambdaTerm(Arc::new(Node {
            size: function.size().saturating_add(argument.size()).saturating_add(1),
            has_redex,
            free,
            kind: TermKind::App(function, argument),
        }))
    }

    pub fn kind(&self) -> &TermKind {
        &self.0.kind
    }

    /// Number of nodes in the (unshared) syntax tree.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn free_vars(&self) -> &BTreeSet<Name> {
        &self.0.free
    }

    pub fn is_free(&self, name: &str) -> bool {
        self.0.free.contains(name)
    }

    /// True if some subterm has the shape `(λx.E)Q`.
    pub fn has_redex(&self) -> bool {
        self.0.has_redex
    }

    pub fn is_abs(&self) -> bool {
        matches!(self.0.kind, TermKind::Abs(..))
    }

    pub fn is_var(&self) -> bool {
        matches!(self.0.kind, TermKind::Var(_))
    }

    pub fn is_closed(&self) -> bool {
        self.0.free.is_empty()
    }

    pub fn depth(&self) -> usize {
        match self.kind() {
            TermKind::Var(_) => 0,
            TermKind::Abs(_, body) => 1 + body.depth(),
            TermKind::App(f, a) => 1 + f.depth().max(a.depth()),
        }
    }

    /// Every identifier occurring in the term, bound or free.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t.kind() {
                TermKind::Var(x) => {
                    out.insert(x.clone());
                }
                TermKind::Abs(x, body) => {
                    out.insert(x.clone());
                    stack.push(body);
                }
                TermKind::App(f, a) => {
                    stack.push(f);
                    stack.push(a);
                }
            }
        }
        out
    }

    /// Printed form with bound variables renamed by binder depth.
    ///
    /// Two terms are alpha-equivalent iff their canonical keys are equal.
    /// Bound names use a prefix (`v`, `vv`, ...) chosen so that no free
    /// variable of the term can be captured.
    pub fn canonical_key(&self) -> String {
        let prefix = canonical_prefix(self.free_vars());
        let mut out = String::new();
        let mut scope: Vec<&str> = Vec::new();
        write_canonical(self, &prefix, &mut scope, &mut out);
        out
    }
}

fn canonical_prefix(free: &BTreeSet<Name>) -> String {
    let mut prefix = String::from("v");
    loop {
        let clash = free.iter().any(|n| {
            n.strip_prefix(prefix.as_str())
                .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
        });
        if !clash {
            return prefix;
        }
        prefix.push('v');
    }
}

fn write_canonical<'a>(t: &'a LambdaTerm, prefix: &str, scope: &mut Vec<&'a str>, out: &mut String) {
    match t.kind() {
        TermKind::Var(x) => match scope.iter().rposition(|b| *b == &**x) {
            Some(level) => {
                out.push_str(prefix);
                out.push_str(&level.to_string());
            }
            None => out.push_str(x),
        },
        TermKind::Abs(x, body) => {
            out.push('λ');
            out.push_str(prefix);
            out.push_str(&scope.len().to_string());
            out.push('.');
            scope.push(x);
            write_canonical(body, prefix, scope, out);
            scope.pop();
        }
        TermKind::App(f, a) => {
            out.push('(');
            write_canonical(f, prefix, scope, out);
            out.push(')');
            write_canonical(a, prefix, scope, out);
        }
    }
}

fn alpha_eq<'a>(a: &'a LambdaTerm, sa: &mut Vec<&'a str>, b: &'a LambdaTerm, sb: &mut Vec<&'a str>) -> bool {
    if sa.is_empty() && sb.is_empty() && Arc::ptr_eq(&a.0, &b.0) {
        return true;
    }
    if a.size() != b.size() {
        return false;
    }
    match (a.kind(), b.kind()) {
        (TermKind::Var(x), TermKind::Var(y)) => {
            let ix = sa.iter().rposition(|n| *n == &**x);
            let iy = sb.iter().rposition(|n| *n == &**y);
            match (ix, iy) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (TermKind::Abs(x, bx), TermKind::Abs(y, by)) => {
            sa.push(x);
            sb.push(y);
            let eq = alpha_eq(bx, sa, by, sb);
            sa.pop();
            sb.pop();
            eq
        }
        (TermKind::App(fa, aa), TermKind::App(fb, ab)) => alpha_eq(fa, sa, fb, sb) && alpha_eq(aa, sa, ab, sb),
        _ => false,
    }
}

fn hash_canonical<'a, H: Hasher>(t: &'a LambdaTerm, scope: &mut Vec<&'a str>, state: &mut H) {
    match t.kind() {
        TermKind::Var(x) => match scope.iter().rposition(|b| *b == &**x) {
            Some(level) => {
                0u8.hash(state);
                level.hash(state);
            }
            None => {
                1u8.hash(state);
                x.hash(state);
            }
        },
        TermKind::Abs(x, body) => {
            2u8.hash(state);
            scope.push(x);
            hash_canonical(body, scope, state);
            scope.pop();
        }
        TermKind::App(f, a) => {
            3u8.hash(state);
            hash_canonical(f, scope, state);
            hash_canonical(a, scope, state);
        }
    }
}

impl PartialEq for LambdaTerm {
    fn eq(&self, other: &Self) -> bool {
        alpha_eq(self, &mut Vec::new(), other, &mut Vec::new())
    }
}

impl Eq for LambdaTerm {}

impl Hash for LambdaTerm {
    fn hash<H: Hasher>(&self, state: &mut H) {
        hash_canonical(self, &mut Vec::new(), state);
    }
}

impl fmt::Display for LambdaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            TermKind::Var(x) => f.write_str(x),
            TermKind::Abs(x, body) => write!(f, "λ{x}.{body}"),
            TermKind::App(func, arg) => write!(f, "({func}){arg}"),
        }
    }
}

impl fmt::Debug for LambdaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LambdaTerm({self})")
    }
}
