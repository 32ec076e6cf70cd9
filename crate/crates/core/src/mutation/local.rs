use super::{MutationError, Mutator, Prompt};
use crate::afdsl::{BinOp, Expr, Func, Program, Reduce, Var};
use crate::seeds;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Structural edits applied by [`LocalMutator`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutationKind {
    /// Multiply a literal by a factor drawn from `[0.5, 2]`.
    ScaleConstant,
    /// Swap a binary operator or function for another of the same arity class.
    SwapOperator,
    /// Replace a subtree with one taken from the lower-scoring program.
    Graft,
    /// Add an exploration bonus `BETA * sqrt(VAR)` in the reduction's direction.
    ExplorationBonus,
    /// `argmax(e)` becomes `argmin(-e)` and back.
    FlipReduction,
}

impl MutationKind {
    pub const ALL: [MutationKind; 5] = [
        MutationKind::ScaleConstant,
        MutationKind::SwapOperator,
        MutationKind::Graft,
        MutationKind::ExplorationBonus,
        MutationKind::FlipReduction,
    ];
}

/// Offline candidate generator: random structural edits of the prompt's best
/// program. Deterministic given the seed.
#[derive(Clone, Debug)]
pub struct LocalMutator {
    pub attempts: usize,
}

impl Default for LocalMutator {
    fn default() -> Self {
        Self { attempts: 8 }
    }
}

const UNARY: [Func; 6] = [Func::Abs, Func::Sqrt, Func::Exp, Func::Log, Func::NormCdf, Func::NormPdf];

fn swap_class(op: BinOp) -> BinOp {
    match op {
        BinOp::Add => BinOp::Sub,
        BinOp::Sub => BinOp::Add,
        BinOp::Mul => BinOp::Div,
        BinOp::Div => BinOp::Mul,
        BinOp::Pow => BinOp::Mul,
    }
}

fn positions(e: &Expr, pred: impl Fn(&Expr) -> bool) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 0;
    e.visit(&mut |n| {
        if pred(n) {
            out.push(k);
        }
        k += 1;
    });
    out
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        None
    } else {
        Some(xs[rng.random_range(0..xs.len())])
    }
}

fn subtree(e: &Expr, k: usize) -> Expr {
    let mut e = e.clone();
    e.nth_mut(k).expect("index from traversal").clone()
}

impl LocalMutator {
    /// Applies one edit. `None` when the edit has no site in the program.
    pub fn apply(
        &self,
        kind: MutationKind,
        target: &Program,
        donor: &Program,
        rng: &mut ChaCha8Rng,
    ) -> Option<Program> {
        let mut body = target.inlined_body();
        let mut reduce = target.reduce;
        match kind {
            MutationKind::ScaleConstant => {
                let k = pick(rng, &positions(&body, |n| matches!(n, Expr::Lit(_))))?;
                let factor: f64 = rng.random_range(0.5..=2.0);
                if let Some(Expr::Lit(v)) = body.nth_mut(k) {
                    *v *= factor;
                }
            }
            MutationKind::SwapOperator => {
                let sites = positions(&body, |n| match n {
                    Expr::Binary(..) => true,
                    Expr::Call(f, _) => UNARY.contains(f) || matches!(f, Func::Min | Func::Max),
                    _ => false,
                });
                let k = pick(rng, &sites)?;
                let choice = rng.random_range(0..UNARY.len() - 1);
                match body.nth_mut(k)? {
                    Expr::Binary(op, ..) => *op = swap_class(*op),
                    Expr::Call(f, _) if *f == Func::Min => *f = Func::Max,
                    Expr::Call(f, _) if *f == Func::Max => *f = Func::Min,
                    Expr::Call(f, _) => {
                        let others: Vec<Func> = UNARY.iter().copied().filter(|g| g != f).collect();
                        *f = others[choice];
                    }
                    _ => return None,
                }
            }
            MutationKind::Graft => {
                let donor_body = donor.inlined_body();
                let from = rng.random_range(0..donor_body.node_count());
                let graft = subtree(&donor_body, from);
                let to = rng.random_range(0..body.node_count());
                *body.nth_mut(to)? = graft;
            }
            MutationKind::ExplorationBonus => {
                let bonus = Expr::bin(
                    BinOp::Mul,
                    Expr::Var(Var::Beta),
                    Expr::call(Func::Sqrt, vec![Expr::Var(Var::Var)]),
                );
                let op = if reduce == Reduce::Argmax { BinOp::Add } else { BinOp::Sub };
                body = Expr::bin(op, body, bonus);
            }
            MutationKind::FlipReduction => {
                body = match body {
                    Expr::Neg(inner) => *inner,
                    other => Expr::neg(other),
                };
                reduce = if reduce == Reduce::Argmax { Reduce::Argmin } else { Reduce::Argmax };
            }
        }
        Some(Program::new(reduce, body))
    }

    fn one(&self, prompt: &Prompt, rng: &mut ChaCha8Rng) -> String {
        let target = prompt.latest();
        for _ in 0..self.attempts {
            let kind = MutationKind::ALL[rng.random_range(0..MutationKind::ALL.len())];
            if let Some(p) = self.apply(kind, target, prompt.earliest(), rng) {
                if p.check().is_ok() && p != *target {
                    return p.render();
                }
            }
        }
        target.render()
    }
}

impl Mutator for LocalMutator {
    fn propose(&self, prompt: &Prompt, seed: u64, n: usize) -> Result<Vec<String>, MutationError> {
        Ok((0..n as u64)
            .map(|k| self.one(prompt, &mut seeds::rng(seeds::derive(seed, &[k]))))
            .collect())
    }
}
