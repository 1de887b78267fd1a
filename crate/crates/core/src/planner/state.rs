use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::numeric::Scalar;
use crate::pddl::{ArithOp, AssignOp, CmpOp};

/// Packed world state: one bit per interned atom, one slot per interned fluent.
#[derive(Debug, Clone)]
pub struct State<N> {
    pub(crate) bits: Vec<u64>,
    pub(crate) fluents: Vec<Option<N>>,
}

impl<N: Scalar> State<N> {
    pub(crate) fn empty(atoms: usize, fluents: usize) -> Self {
        State { bits: vec![0; atoms.div_ceil(64)], fluents: vec![None; fluents] }
    }

    pub fn has(&self, atom: usize) -> bool {
        self.bits[atom / 64] >> (atom % 64) & 1 == 1
    }

    pub(crate) fn set(&mut self, atom: usize, on: bool) {
        let mask = 1u64 << (atom % 64);
        if on {
            self.bits[atom / 64] |= mask;
        } else {
            self.bits[atom / 64] &= !mask;
        }
    }

    pub fn value(&self, fluent: usize) -> Option<&N> {
        self.fluents[fluent].as_ref()
    }

    pub(crate) fn set_value(&mut self, fluent: usize, v: N) {
        self.fluents[fluent] = Some(v);
    }

    /// Indices of true atoms, ascending.
    pub fn true_atoms(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.bits.len() * 64).filter(|&i| self.has(i))
    }
}

impl<N: Scalar> PartialEq for State<N> {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits && self.fluents == other.fluents
    }
}

impl<N: Scalar> Eq for State<N> {}

impl<N: Scalar> Hash for State<N> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.bits.hash(state);
        for f in &self.fluents {
            match f {
                None => 0u8.hash(state),
                Some(v) => {
                    1u8.hash(state);
                    v.hash_scalar(state);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroundExpr<N> {
    Const(N),
    Fluent(usize),
    Bin(ArithOp, Box<GroundExpr<N>>, Box<GroundExpr<N>>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroundConjunct<N> {
    Atom { atom: usize, positive: bool },
    Compare { op: CmpOp, lhs: GroundExpr<N>, rhs: GroundExpr<N> },
}

/// Ground conjunction; index `i` corresponds to conjunct `i` of the source condition.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundCondition<N> {
    pub conjuncts: Vec<GroundConjunct<N>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundAssign<N> {
    pub op: AssignOp,
    pub target: usize,
    pub value: GroundExpr<N>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("fluent #{0} has no value")]
    MissingFluent(usize),
    #[error("division by zero")]
    DivisionByZero,
}

impl<N: Scalar> GroundExpr<N> {
    pub fn eval(&self, s: &State<N>) -> Result<N, EvalError> {
        match self {
            GroundExpr::Const(c) => Ok(c.clone()),
            GroundExpr::Fluent(i) => s.value(*i).cloned().ok_or(EvalError::MissingFluent(*i)),
            GroundExpr::Bin(op, l, r) => {
                let (l, r) = (l.eval(s)?, r.eval(s)?);
                Ok(match op {
                    ArithOp::Add => l + r,
                    ArithOp::Sub => l - r,
                    ArithOp::Mul => l * r,
                    ArithOp::Div => {
                        if r.is_zero() {
                            return Err(EvalError::DivisionByZero);
                        }
                        l / r
                    }
                })
            }
        }
    }
}

impl<N: Scalar> GroundConjunct<N> {
    pub fn eval(&self, s: &State<N>) -> Result<bool, EvalError> {
        match self {
            GroundConjunct::Atom { atom, positive } => Ok(s.has(*atom) == *positive),
            GroundConjunct::Compare { op, lhs, rhs } => Ok(op.holds(&lhs.eval(s)?, &rhs.eval(s)?)),
        }
    }
}

impl<N: Scalar> GroundCondition<N> {
    /// Index of the first conjunct that does not hold.
    pub fn first_unmet(&self, s: &State<N>) -> Result<Option<usize>, EvalError> {
        for (i, c) in self.conjuncts.iter().enumerate() {
            if !c.eval(s)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Strict check; a comparison over a valueless fluent is an error.
    pub fn satisfied(&self, s: &State<N>) -> Result<bool, EvalError> {
        Ok(self.first_unmet(s)?.is_none())
    }

    /// Search-time check; a comparison over a valueless fluent is false.
    pub fn holds_lenient(&self, s: &State<N>) -> bool {
        self.conjuncts.iter().all(|c| c.eval(s).unwrap_or(false))
    }
}
