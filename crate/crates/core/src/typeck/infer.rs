//! Algorithmic typing. Logical rules are syntax directed; structural rules
//! are applied only at prefix subjects, output objects, recursion entry,
//! parallel splits and leaves.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::derivation::{Derivation, TRule};
use crate::subst::{subst_idents, subst_procvar};
use crate::syntax::{fresh_text, ChannelState, Ident, Name, ProcVar, Process, Var};
use crate::types::{decrement, Attribute, Decrement, Subject, Type, TypeEnv};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InferOptions {
    /// Largest unique index a split may create; `None` derives it from the
    /// environment and the number of prefixes.
    pub max_index: Option<u32>,
    /// Budget of judgments visited before giving up.
    pub max_steps: usize,
}

impl Default for InferOptions {
    fn default() -> Self {
        InferOptions {
            max_index: None,
            max_steps: 2_000_000,
        }
    }
}

/// The deepest judgment the search could not type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub depth: usize,
    pub rule: &'static str,
    pub env: TypeEnv,
    pub process: Process,
    pub reason: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {} |- {}: {}",
            self.rule, self.env, self.process, self.reason
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum InferError {
    #[error("not typable: {0}")]
    NotTypable(Box<Failure>),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

pub fn infer(env: &TypeEnv, p: &Process) -> Result<Derivation, InferError> {
    infer_with(env, p, InferOptions::default())
}

/// Searches for a derivation of `env |- p'` where `p'` is `p` with binders
/// renamed apart from each other and from the environment.
pub fn infer_with(env: &TypeEnv, p: &Process, opts: InferOptions) -> Result<Derivation, InferError> {
    let p = barendregt(env, p);
    let max_index = opts
        .max_index
        .unwrap_or_else(|| env.max_unique_index() + p.prefix_count() as u32 + 1);
    let mut universe: BTreeSet<Vec<Type>> = BTreeSet::from([Vec::new()]);
    for (_, t) in env.entries() {
        collect_lists(t, &mut universe);
    }
    let mut search = Search {
        universe: universe.into_iter().collect(),
        max_index,
        max_steps: opts.max_steps,
        steps: 0,
        bound_hit: None,
        memo: HashMap::new(),
        deepest: None,
    };
    match search.go(env, &p, 0) {
        Some(d) => Ok(d),
        None => match search.bound_hit {
            Some(why) => Err(InferError::Inconclusive(why)),
            None => Err(InferError::NotTypable(Box::new(search.deepest.unwrap_or(Failure {
                depth: 0,
                rule: "-",
                env: env.clone(),
                process: p,
                reason: "no rule applies".into(),
            })))),
        },
    }
}

fn collect_lists(t: &Type, out: &mut BTreeSet<Vec<Type>>) {
    if let Type::Chan(objs, _) = t {
        out.insert(objs.clone());
        for o in objs {
            collect_lists(o, out);
        }
    }
}

/// Renames binders that clash with each other, with free identifiers or
/// with subjects of `env`.
pub fn barendregt(env: &TypeEnv, p: &Process) -> Process {
    let mut used: BTreeSet<String> = env.subjects().iter().map(|s| s.text().to_string()).collect();
    used.extend(p.free_idents().iter().map(|u| u.text().to_string()));
    used.extend(p.free_procvars().iter().map(|x| x.0.clone()));
    freshen(p, &mut used)
}

fn freshen(p: &Process, used: &mut BTreeSet<String>) -> Process {
    let pick = |text: &str, used: &mut BTreeSet<String>| -> Option<String> {
        if used.insert(text.to_string()) {
            None
        } else {
            let f = fresh_text(text, used);
            used.insert(f.clone());
            Some(f)
        }
    };
    match p {
        Process::Nil | Process::PVar(_) => p.clone(),
        Process::Output {
            subject,
            objects,
            cont,
        } => Process::output(subject.clone(), objects.clone(), freshen(cont, used)),
        Process::Free { subject, cont } => Process::free(subject.clone(), freshen(cont, used)),
        Process::Match {
            left,
            right,
            then,
            otherwise,
        } => Process::matching(
            left.clone(),
            right.clone(),
            freshen(then, used),
            freshen(otherwise, used),
        ),
        Process::Par(l, r) => {
            let l = freshen(l, used);
            Process::par(l, freshen(r, used))
        }
        Process::Input {
            subject,
            params,
            cont,
        } => {
            let mut renames = Vec::new();
            let params: Vec<Var> = params
                .iter()
                .map(|x| match pick(&x.0, used) {
                    Some(f) => {
                        renames.push((Ident::Var(x.clone()), Ident::var(f.clone())));
                        Var(f)
                    }
                    None => x.clone(),
                })
                .collect();
            let cont = subst_idents(cont, &renames);
            Process::input(subject.clone(), params, freshen(&cont, used))
        }
        Process::Alloc { binder, body } => match pick(&binder.0, used) {
            Some(f) => {
                let body = subst_idents(body, &[(Ident::Var(binder.clone()), Ident::var(f.clone()))]);
                Process::alloc(Var(f), freshen(&body, used))
            }
            None => Process::alloc(binder.clone(), freshen(body, used)),
        },
        Process::Scope { name, state, body } => match pick(&name.0, used) {
            Some(f) => {
                let body = subst_idents(body, &[(Ident::Name(name.clone()), Ident::name(f.clone()))]);
                Process::scope(Name(f), *state, freshen(&body, used))
            }
            None => Process::scope(name.clone(), *state, freshen(body, used)),
        },
        Process::Rec { binder, body } => match pick(&binder.0, used) {
            Some(f) => {
                let body = subst_procvar(body, binder, &Process::PVar(ProcVar(f.clone())));
                Process::rec(ProcVar(f), freshen(&body, used))
            }
            None => Process::rec(binder.clone(), freshen(body, used)),
        },
    }
}

fn free_subjects(p: &Process) -> BTreeSet<Subject> {
    let mut s: BTreeSet<Subject> = p.free_idents().into_iter().map(Subject::Id).collect();
    s.extend(p.free_procvars().into_iter().map(Subject::PVar));
    s
}

/// Syntactic occurrences of `s`, ignoring binders (binders are distinct
/// after renaming).
fn occurrences(p: &Process, s: &Subject) -> usize {
    let hit = |u: &Ident| usize::from(matches!(s, Subject::Id(v) if v == u));
    match p {
        Process::Nil => 0,
        Process::PVar(x) => usize::from(matches!(s, Subject::PVar(y) if y == x)),
        Process::Output {
            subject,
            objects,
            cont,
        } => hit(subject) + objects.iter().map(hit).sum::<usize>() + occurrences(cont, s),
        Process::Input { subject, cont, .. } => hit(subject) + occurrences(cont, s),
        Process::Free { subject, cont } => hit(subject) + occurrences(cont, s),
        Process::Match {
            left,
            right,
            then,
            otherwise,
        } => hit(left) + hit(right) + occurrences(then, s) + occurrences(otherwise, s),
        Process::Par(l, r) => occurrences(l, s) + occurrences(r, s),
        Process::Rec { body, .. } | Process::Alloc { body, .. } | Process::Scope { body, .. } => {
            occurrences(body, s)
        }
    }
}

/// Structural steps applied bottom-up from a conclusion environment.
#[derive(Clone)]
struct Chain {
    steps: Vec<(TRule, TypeEnv)>,
    env: TypeEnv,
}

impl Chain {
    fn new(env: &TypeEnv) -> Self {
        Chain {
            steps: Vec::new(),
            env: env.clone(),
        }
    }

    fn weaken(&mut self, s: &Subject, t: &Type) {
        self.steps.push((TRule::Weak, self.env.clone()));
        let removed = self.env.remove_one(s, t);
        debug_assert!(removed);
    }

    fn replace(&mut self, rule: TRule, s: &Subject, from: &Type, to: &Type) {
        if from == to {
            return;
        }
        self.steps.push((rule, self.env.clone()));
        let removed = self.env.remove_one(s, from);
        debug_assert!(removed);
        self.env.insert(s.clone(), to.clone());
    }

    fn sub(&mut self, s: &Subject, from: &Type, to: &Type) {
        self.replace(TRule::Sub, s, from, to);
    }

    fn rev(&mut self, s: &Subject, from: &Type, to: &Type) {
        self.replace(TRule::Rev, s, from, to);
    }

    fn split(&mut self, s: &Subject, from: &Type, a: &Type, b: &Type) {
        self.steps.push((TRule::Con, self.env.clone()));
        let removed = self.env.remove_one(s, from);
        debug_assert!(removed);
        self.env.insert(s.clone(), a.clone());
        self.env.insert(s.clone(), b.clone());
    }

    fn wrap(self, p: &Process, inner: Derivation) -> Derivation {
        self.steps
            .into_iter()
            .rev()
            .fold(inner, |d, (rule, env)| Derivation::node(rule, env, p.clone(), vec![d]))
    }
}

fn distinct_types(env: &TypeEnv, s: &Subject) -> Vec<Type> {
    let mut v: Vec<Type> = env.types_of(s).cloned().collect();
    v.dedup();
    v
}

/// Where one assumption goes at a parallel split.
#[derive(Clone, Debug)]
enum Placement {
    Left,
    Right,
    Drop,
    /// Copy an unrestricted or process assumption to both sides.
    Copy,
    /// Revise to the list, split off `k` affine halves to the given side
    /// and send the remaining unique assumption to the other.
    Split {
        list: Vec<Type>,
        k: u32,
        affine_left: bool,
    },
    /// Revise to the list, raise to unrestricted and copy.
    Share { list: Vec<Type> },
}

struct Search {
    universe: Vec<Vec<Type>>,
    max_index: u32,
    max_steps: usize,
    steps: usize,
    bound_hit: Option<String>,
    memo: HashMap<(TypeEnv, Process), Option<Derivation>>,
    deepest: Option<Failure>,
}

impl Search {
    fn note(&mut self, depth: usize, rule: &'static str, env: &TypeEnv, p: &Process, reason: String) {
        if self.deepest.as_ref().is_none_or(|f| depth > f.depth) {
            self.deepest = Some(Failure {
                depth,
                rule,
                env: env.clone(),
                process: p.clone(),
                reason,
            });
        }
    }

    fn index_ok(&mut self, i: u32) -> bool {
        if i > self.max_index {
            if self.bound_hit.is_none() {
                self.bound_hit = Some(format!("unique index bound {} reached", self.max_index));
            }
            false
        } else {
            true
        }
    }

    /// Object lists of the given arity, the current one first.
    fn lists(&self, current: &[Type], arity: usize) -> Vec<Vec<Type>> {
        let mut out = Vec::new();
        if current.len() == arity {
            out.push(current.to_vec());
        }
        for l in &self.universe {
            if l.len() == arity && l.as_slice() != current {
                out.push(l.clone());
            }
        }
        out
    }

    fn go(&mut self, env: &TypeEnv, p: &Process, depth: usize) -> Option<Derivation> {
        if self.bound_hit.is_some() && self.steps > self.max_steps {
            return None;
        }
        self.steps += 1;
        if self.steps > self.max_steps {
            self.bound_hit = Some(format!("search budget of {} judgments exhausted", self.max_steps));
            return None;
        }
        let key = (env.clone(), p.clone());
        if let Some(r) = self.memo.get(&key) {
            return r.clone();
        }
        let r = self.dispatch(env, p, depth);
        self.memo.insert(key, r.clone());
        r
    }

    fn dispatch(&mut self, env: &TypeEnv, p: &Process, depth: usize) -> Option<Derivation> {
        match p {
            Process::Nil => {
                let mut chain = Chain::new(env);
                for (s, t) in env.entries() {
                    chain.weaken(s, t);
                }
                Some(chain.wrap(p, Derivation::leaf(TRule::Nil, TypeEnv::new(), p.clone())))
            }
            Process::PVar(x) => {
                let xs = Subject::PVar(x.clone());
                if !env.types_of(&xs).any(|t| *t == Type::Proc) {
                    self.note(depth, "tVar", env, p, format!("no assumption {x}: proc"));
                    return None;
                }
                let mut chain = Chain::new(env);
                let mut kept = false;
                for (s, t) in env.entries() {
                    if !kept && *s == xs && *t == Type::Proc {
                        kept = true;
                    } else {
                        chain.weaken(s, t);
                    }
                }
                let leaf = Derivation::leaf(TRule::Var, chain.env.clone(), p.clone());
                Some(chain.wrap(p, leaf))
            }
            Process::Free { subject, cont } => {
                let s = Subject::Id(subject.clone());
                let options: Vec<Type> = distinct_types(env, &s)
                    .into_iter()
                    .filter(Type::is_unique_now)
                    .collect();
                if options.is_empty() {
                    self.note(depth, "tFree", env, p, format!("`{subject}` is not unique now"));
                }
                for t in options {
                    let rest = env.without(&s, &t).expect("present");
                    if let Some(d) = self.go(&rest, cont, depth + 1) {
                        return Some(Derivation::node(TRule::Free, env.clone(), p.clone(), vec![d]));
                    }
                }
                None
            }
            Process::Alloc { binder, body } => {
                let x = Subject::Id(Ident::Var(binder.clone()));
                let inner = env.with(x, Type::chan(Vec::new(), Attribute::Unique(0)));
                let d = self.go(&inner, body, depth + 1)?;
                Some(Derivation::node(TRule::All, env.clone(), p.clone(), vec![d]))
            }
            Process::Scope { name, state, body } => match state {
                ChannelState::Allocated => {
                    let c = Subject::Id(Ident::Name(name.clone()));
                    let inner = env.with(c, Type::chan(Vec::new(), Attribute::Unique(0)));
                    let d = self.go(&inner, body, depth + 1)?;
                    Some(Derivation::node(TRule::Rst1, env.clone(), p.clone(), vec![d]))
                }
                ChannelState::Deallocated => {
                    let d = self.go(env, body, depth + 1)?;
                    Some(Derivation::node(TRule::Rst2, env.clone(), p.clone(), vec![d]))
                }
            },
            Process::Match {
                left,
                right,
                then,
                otherwise,
            } => {
                for u in [left, right] {
                    let s = Subject::Id(u.clone());
                    if !env.types_of(&s).any(|t| matches!(t, Type::Chan(..))) {
                        self.note(depth, "tIf", env, p, format!("no channel assumption for `{u}`"));
                        return None;
                    }
                }
                let a = self.go(env, then, depth + 1)?;
                let b = self.go(env, otherwise, depth + 1)?;
                Some(Derivation::node(TRule::If, env.clone(), p.clone(), vec![a, b]))
            }
            Process::Rec { binder, body } => self.rec(env, p, binder, body, depth),
            Process::Input {
                subject,
                params,
                cont,
            } => self.input(env, p, subject, params, cont, depth),
            Process::Output {
                subject,
                objects,
                cont,
            } => self.output(env, p, subject, objects, cont, depth),
            Process::Par(l, r) => self.par(env, p, l, r, depth),
        }
    }

    fn rec(
        &mut self,
        env: &TypeEnv,
        p: &Process,
        binder: &ProcVar,
        body: &Process,
        depth: usize,
    ) -> Option<Derivation> {
        let used = free_subjects(body);
        let mut base = Chain::new(env);
        let mut revisable: Vec<(Subject, Type)> = Vec::new();
        for (s, t) in env.entries() {
            if !used.contains(s) {
                base.weaken(s, t);
                continue;
            }
            match t {
                Type::Proc | Type::Chan(_, Attribute::Unrestricted) => {}
                Type::Chan(_, Attribute::Affine) => base.weaken(s, t),
                Type::Chan(_, Attribute::Unique(0)) => revisable.push((s.clone(), t.clone())),
                Type::Chan(_, Attribute::Unique(_)) => {
                    base.sub(s, t, &t.with_attr(Attribute::Unrestricted))
                }
            }
        }
        // Every combination of object lists for the unique-now assumptions.
        let mut choices: Vec<Chain> = vec![base];
        for (s, t) in &revisable {
            let objs = t.objects().unwrap_or_default();
            let mut next = Vec::new();
            for chain in &choices {
                for list in self.lists(objs, objs.len()).into_iter().chain(
                    self.universe.iter().filter(|l| l.len() != objs.len()).cloned(),
                ) {
                    let mut c = chain.clone();
                    let revised = Type::chan(list.clone(), Attribute::Unique(0));
                    c.rev(s, t, &revised);
                    c.sub(s, &revised, &revised.with_attr(Attribute::Unrestricted));
                    next.push(c);
                }
            }
            choices = next;
        }
        let x = Subject::PVar(binder.clone());
        for chain in choices {
            let inner = chain.env.with(x.clone(), Type::Proc);
            if let Some(d) = self.go(&inner, body, depth + 1) {
                let node = Derivation::node(TRule::Rec, chain.env.clone(), p.clone(), vec![d]);
                return Some(chain.wrap(p, node));
            }
        }
        self.note(depth, "tRec", env, p, "body not typable under unrestricted assumptions".into());
        None
    }

    /// Ways of using an assumption of `s` as the subject of an action with
    /// the given arity. Each yields the chain up to the action, the type
    /// the action consumes and the environment left for the continuation
    /// (before parameters or objects are accounted for).
    fn subject_uses(
        &mut self,
        env: &TypeEnv,
        s: &Subject,
        arity: Option<usize>,
    ) -> Vec<(Chain, Type)> {
        let mut out = Vec::new();
        for t in distinct_types(env, s) {
            let Type::Chan(objs, a) = &t else { continue };
            match a {
                Attribute::Unique(0) => {
                    if !self.index_ok(1) {
                        continue;
                    }
                    let lists = match arity {
                        Some(n) => self.lists(objs, n),
                        None => vec![objs.clone()],
                    };
                    for list in lists {
                        let mut chain = Chain::new(env);
                        let revised = Type::chan(list.clone(), Attribute::Unique(0));
                        chain.rev(s, &t, &revised);
                        let aff = Type::chan(list.clone(), Attribute::Affine);
                        let next = Type::chan(list, Attribute::Unique(1));
                        chain.split(s, &revised, &aff, &next);
                        out.push((chain, next));
                    }
                }
                _ => {
                    if arity.is_none_or(|n| n == objs.len()) {
                        out.push((Chain::new(env), t.clone()));
                    }
                }
            }
        }
        out
    }

    fn input(
        &mut self,
        env: &TypeEnv,
        p: &Process,
        subject: &Ident,
        params: &[Var],
        cont: &Process,
        depth: usize,
    ) -> Option<Derivation> {
        let s = Subject::Id(subject.clone());
        let uses = self.subject_uses(env, &s, Some(params.len()));
        if uses.is_empty() {
            self.note(depth, "tIn", env, p, format!("no usable assumption for `{subject}` with arity {}", params.len()));
        }
        for (chain, t) in uses {
            let mut premise = chain.env.without(&s, &t).expect("present");
            match decrement(&t) {
                Decrement::Type(d) => premise.insert(s.clone(), d),
                Decrement::Consumed => {}
                Decrement::Undefined => continue,
            }
            for (x, o) in params.iter().zip(t.objects().unwrap_or_default()) {
                premise.insert(Subject::Id(Ident::Var(x.clone())), o.clone());
            }
            if let Some(d) = self.go(&premise, cont, depth + 1) {
                let node = Derivation::node(TRule::In, chain.env.clone(), p.clone(), vec![d]);
                return Some(chain.wrap(p, node));
            }
        }
        None
    }

    fn output(
        &mut self,
        env: &TypeEnv,
        p: &Process,
        subject: &Ident,
        objects: &[Ident],
        cont: &Process,
        depth: usize,
    ) -> Option<Derivation> {
        let s = Subject::Id(subject.clone());
        let uses = self.subject_uses(env, &s, Some(objects.len()));
        if uses.is_empty() {
            self.note(depth, "tOut", env, p, format!("no usable assumption for `{subject}` with arity {}", objects.len()));
        }
        for (chain, t) in uses {
            let required: Vec<Type> = t.objects().unwrap_or_default().to_vec();
            let mut reserved = TypeEnv::new().with(s.clone(), t.clone());
            if let Some(d) =
                self.hand_over(chain, &mut reserved, p, objects, &required, 0, &s, &t, cont, depth)
            {
                return Some(d);
            }
        }
        None
    }

    /// Finds assumptions for objects `i..`, then types the continuation.
    #[allow(clippy::too_many_arguments)]
    fn hand_over(
        &mut self,
        chain: Chain,
        reserved: &mut TypeEnv,
        p: &Process,
        objects: &[Ident],
        required: &[Type],
        i: usize,
        s: &Subject,
        t: &Type,
        cont: &Process,
        depth: usize,
    ) -> Option<Derivation> {
        if i == objects.len() {
            let mut premise = chain.env.minus(reserved);
            match decrement(t) {
                Decrement::Type(d) => premise.insert(s.clone(), d),
                Decrement::Consumed => {}
                Decrement::Undefined => return None,
            }
            let d = self.go(&premise, cont, depth + 1)?;
            let node = Derivation::node(TRule::Out, chain.env.clone(), p.clone(), vec![d]);
            return Some(chain.wrap(p, node));
        }
        let v = Subject::Id(objects[i].clone());
        let want = &required[i];
        let available = chain.env.minus(reserved);
        let options: Vec<Chain> = distinct_types(&available, &v)
            .into_iter()
            .filter_map(|a| self.convert(&chain, &v, &a, want))
            .collect();
        if options.is_empty() {
            self.note(
                depth,
                "tOut",
                &chain.env,
                p,
                format!("no assumption for object `{}` yields {want}", objects[i]),
            );
        }
        for c in options {
            reserved.insert(v.clone(), want.clone());
            let r = self.hand_over(c, reserved, p, objects, required, i + 1, s, t, cont, depth);
            reserved.remove_one(&v, want);
            if r.is_some() {
                return r;
            }
        }
        None
    }

    /// Structural steps producing an extra assumption `v: want` from `a`,
    /// keeping the strongest remainder.
    fn convert(&mut self, chain: &Chain, v: &Subject, a: &Type, want: &Type) -> Option<Chain> {
        let mut c = chain.clone();
        if a == want && !matches!(a, Type::Chan(_, Attribute::Unrestricted) | Type::Proc) {
            return Some(c);
        }
        let (Type::Chan(have, attr), Type::Chan(need, b)) = (a, want) else {
            if a == want {
                c.split(v, a, a, a);
                return Some(c);
            }
            return None;
        };
        let mut attr = *attr;
        let mut cur = a.clone();
        if have != need {
            if attr != Attribute::Unique(0) {
                return None;
            }
            let revised = Type::chan(need.clone(), Attribute::Unique(0));
            c.rev(v, &cur, &revised);
            cur = revised;
            attr = Attribute::Unique(0);
        }
        let with = |x: Attribute| Type::chan(need.clone(), x);
        match (attr, *b) {
            (Attribute::Unrestricted, Attribute::Unrestricted) => {
                c.split(v, &cur, &cur, &cur);
            }
            (Attribute::Unrestricted, Attribute::Affine) => {
                c.split(v, &cur, &cur, &cur);
                c.sub(v, &cur, want);
            }
            (Attribute::Affine, Attribute::Affine) => {}
            (Attribute::Unique(k), Attribute::Affine) => {
                if !self.index_ok(k + 1) {
                    return None;
                }
                c.split(v, &cur, &with(Attribute::Affine), &with(Attribute::Unique(k + 1)));
            }
            (Attribute::Unique(_), Attribute::Unrestricted) => {
                let unr = with(Attribute::Unrestricted);
                c.sub(v, &cur, &unr);
                c.split(v, &unr, &unr, &unr);
            }
            (Attribute::Unique(k), Attribute::Unique(j)) if k <= j => {
                c.sub(v, &cur, want);
            }
            _ => return None,
        }
        Some(c)
    }

    fn par(
        &mut self,
        env: &TypeEnv,
        p: &Process,
        l: &Process,
        r: &Process,
        depth: usize,
    ) -> Option<Derivation> {
        let fl = free_subjects(l);
        let fr = free_subjects(r);
        // Options per assumption, in environment order.
        let mut options: Vec<(Subject, Type, Vec<Placement>)> = Vec::new();
        for (s, t) in env.entries() {
            let (inl, inr) = (fl.contains(s), fr.contains(s));
            let opts = match (inl, inr) {
                (false, false) => vec![Placement::Drop],
                (true, false) => vec![Placement::Left],
                (false, true) => vec![Placement::Right],
                (true, true) => self.placements(t, occurrences(l, s), occurrences(r, s)),
            };
            options.push((s.clone(), t.clone(), opts));
        }
        let mut choice = vec![0usize; options.len()];
        loop {
            if let Some(d) = self.try_placement(env, p, l, r, &options, &choice, depth) {
                return Some(d);
            }
            if self.steps > self.max_steps {
                return None;
            }
            // Advance the mixed-radix counter.
            let mut i = options.len();
            loop {
                if i == 0 {
                    self.note(depth, "tPar", env, p, "no distribution of the environment types both sides".into());
                    return None;
                }
                i -= 1;
                choice[i] += 1;
                if choice[i] < options[i].2.len() {
                    break;
                }
                choice[i] = 0;
            }
        }
    }

    fn placements(&mut self, t: &Type, uses_left: usize, uses_right: usize) -> Vec<Placement> {
        match t {
            Type::Proc | Type::Chan(_, Attribute::Unrestricted) => vec![Placement::Copy],
            Type::Chan(_, Attribute::Affine) => vec![Placement::Left, Placement::Right],
            Type::Chan(objs, Attribute::Unique(i)) => {
                let lists = if *i == 0 {
                    let mut v = vec![objs.clone()];
                    v.extend(self.universe.iter().filter(|l| *l != objs).cloned());
                    v
                } else {
                    vec![objs.clone()]
                };
                let mut out = Vec::new();
                for list in &lists {
                    for (affine_left, uses) in [(true, uses_left), (false, uses_right)] {
                        for k in 1..=uses as u32 {
                            if !self.index_ok(i + k) {
                                break;
                            }
                            out.push(Placement::Split {
                                list: list.clone(),
                                k,
                                affine_left,
                            });
                        }
                    }
                }
                for list in lists {
                    out.push(Placement::Share { list });
                }
                out.push(Placement::Left);
                out.push(Placement::Right);
                out
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn try_placement(
        &mut self,
        env: &TypeEnv,
        p: &Process,
        l: &Process,
        r: &Process,
        options: &[(Subject, Type, Vec<Placement>)],
        choice: &[usize],
        depth: usize,
    ) -> Option<Derivation> {
        let mut chain = Chain::new(env);
        let mut left = TypeEnv::new();
        let mut right = TypeEnv::new();
        for ((s, t, opts), &c) in options.iter().zip(choice) {
            match &opts[c] {
                Placement::Drop => chain.weaken(s, t),
                Placement::Left => left.insert(s.clone(), t.clone()),
                Placement::Right => right.insert(s.clone(), t.clone()),
                Placement::Copy => {
                    chain.split(s, t, t, t);
                    left.insert(s.clone(), t.clone());
                    right.insert(s.clone(), t.clone());
                }
                Placement::Share { list } => {
                    let revised = Type::chan(list.clone(), t.attr().expect("channel"));
                    if revised != *t {
                        chain.rev(s, t, &revised);
                    }
                    let unr = revised.with_attr(Attribute::Unrestricted);
                    chain.sub(s, &revised, &unr);
                    chain.split(s, &unr, &unr, &unr);
                    left.insert(s.clone(), unr.clone());
                    right.insert(s.clone(), unr);
                }
                Placement::Split {
                    list,
                    k,
                    affine_left,
                } => {
                    let Some(Attribute::Unique(i)) = t.attr() else {
                        unreachable!("split placements are for unique assumptions")
                    };
                    let mut cur = Type::chan(list.clone(), Attribute::Unique(i));
                    chain.rev(s, t, &cur);
                    let aff = Type::chan(list.clone(), Attribute::Affine);
                    let (aff_side, uniq_side) = if *affine_left {
                        (&mut left, &mut right)
                    } else {
                        (&mut right, &mut left)
                    };
                    for j in 1..=*k {
                        let next = Type::chan(list.clone(), Attribute::Unique(i + j));
                        chain.split(s, &cur, &aff, &next);
                        aff_side.insert(s.clone(), aff.clone());
                        cur = next;
                    }
                    uniq_side.insert(s.clone(), cur);
                }
            }
        }
        debug_assert_eq!(left.union(&right), chain.env);
        let dl = self.go(&left, l, depth + 1)?;
        let dr = self.go(&right, r, depth + 1)?;
        let node = Derivation::node(TRule::Par, chain.env.clone(), p.clone(), vec![dl, dr]);
        Some(chain.wrap(p, node))
    }
}
