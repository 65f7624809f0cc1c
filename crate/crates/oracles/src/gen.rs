//! Random well-scoped processes and closed configurations.

use pir_core::{ChannelState, Configuration, Ident, Name, ProcVar, Process, Var};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

const FREE_NAMES: [&str; 3] = ["a", "b", "c"];
const VARS: [&str; 4] = ["x", "y", "z", "w"];
const SCOPE_NAMES: [&str; 2] = ["n", "m"];
const PVARS: [&str; 2] = ["X", "Y"];

#[derive(Clone, Default)]
struct Ctx {
    vars: Vec<String>,
    scoped: Vec<String>,
    pvars: Vec<String>,
}

impl Ctx {
    fn ident<R: Rng>(&self, rng: &mut R) -> Ident {
        let total = FREE_NAMES.len() + self.vars.len() + self.scoped.len();
        let mut i = rng.random_range(0..total);
        if i < FREE_NAMES.len() {
            return Ident::name(FREE_NAMES[i]);
        }
        i -= FREE_NAMES.len();
        if i < self.vars.len() {
            return Ident::var(self.vars[i].clone());
        }
        Ident::name(self.scoped[i - self.vars.len()].clone())
    }
}

/// A process with at most `budget` prefixes and binders. Free identifiers
/// are names drawn from a small pool.
pub fn process<R: Rng>(rng: &mut R, budget: usize) -> Process {
    gen(rng, budget, &Ctx::default())
}

fn gen<R: Rng>(rng: &mut R, budget: usize, ctx: &Ctx) -> Process {
    if budget == 0 {
        if !ctx.pvars.is_empty() && rng.random_bool(0.4) {
            let x = ctx.pvars.choose(rng).expect("non-empty");
            return Process::PVar(ProcVar::new(x.clone()));
        }
        return Process::Nil;
    }
    let kinds: [(u32, u8); 9] = [
        (5, 0), // output
        (5, 1), // input
        (if budget >= 2 { 4 } else { 0 }, 2), // par
        (1, 3), // match
        (1, 4), // rec
        (2, 5), // alloc
        (1, 6), // scope
        (2, 7), // free
        (1, 8), // nil early
    ];
    let total: u32 = kinds.iter().map(|k| k.0).sum();
    let mut roll = rng.random_range(0..total);
    let mut kind = 8;
    for (w, k) in kinds {
        if roll < w {
            kind = k;
            break;
        }
        roll -= w;
    }
    let rest = budget - 1;
    match kind {
        0 => {
            let subject = ctx.ident(rng);
            let n = rng.random_range(0..=2);
            let objects = (0..n).map(|_| ctx.ident(rng)).collect();
            Process::output(subject, objects, gen(rng, rest, ctx))
        }
        1 => {
            let subject = ctx.ident(rng);
            let n = rng.random_range(0..=2);
            let mut pool = VARS.to_vec();
            pool.shuffle(rng);
            let params: Vec<Var> = pool[..n].iter().map(|s| Var::new(*s)).collect();
            let mut inner = ctx.clone();
            inner.vars.extend(params.iter().map(|v| v.0.clone()));
            Process::input(subject, params, gen(rng, rest, &inner))
        }
        2 => {
            let k = rng.random_range(1..budget);
            Process::par(gen(rng, k, ctx), gen(rng, budget - k, ctx))
        }
        3 => {
            let k = rng.random_range(0..=rest);
            let (l, r) = (ctx.ident(rng), ctx.ident(rng));
            Process::matching(l, r, gen(rng, k, ctx), gen(rng, rest - k, ctx))
        }
        4 => {
            let x = *PVARS.choose(rng).expect("non-empty");
            let mut inner = ctx.clone();
            inner.pvars.push(x.to_string());
            Process::rec(ProcVar::new(x), gen(rng, rest, &inner))
        }
        5 => {
            let x = *VARS.choose(rng).expect("non-empty");
            let mut inner = ctx.clone();
            inner.vars.push(x.to_string());
            Process::alloc(Var::new(x), gen(rng, rest, &inner))
        }
        6 => {
            let n = *SCOPE_NAMES.choose(rng).expect("non-empty");
            let state = if rng.random_bool(0.75) {
                ChannelState::Allocated
            } else {
                ChannelState::Deallocated
            };
            let mut inner = ctx.clone();
            inner.scoped.push(n.to_string());
            Process::scope(Name::new(n), state, gen(rng, rest, &inner))
        }
        7 => {
            let u = ctx.ident(rng);
            Process::free(u, gen(rng, rest, ctx))
        }
        _ => Process::Nil,
    }
}

/// A closed configuration whose store covers the free names, most of them
/// allocated.
pub fn configuration<R: Rng>(rng: &mut R, budget: usize) -> Configuration {
    let process = process(rng, budget);
    let store = process
        .free_names()
        .into_iter()
        .map(|n| {
            let s = if rng.random_bool(0.8) {
                ChannelState::Allocated
            } else {
                ChannelState::Deallocated
            };
            (n, s)
        })
        .collect();
    Configuration { store, process }
}
