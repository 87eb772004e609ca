use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use super::{AlgebraError, LoopElement, LoopGenerator};
use crate::scalar::{Scalar, Symbol};

/// Abstract generator symbol `χ₁ … χ₆`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chi(u8);

impl Chi {
    pub const ALL: [Chi; 6] = [Chi(1), Chi(2), Chi(3), Chi(4), Chi(5), Chi(6)];

    pub fn new(k: u8) -> Result<Chi, WordError> {
        if (1..=6).contains(&k) {
            Ok(Chi(k))
        } else {
            Err(WordError::BadLeaf(k.to_string()))
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// `χ₁ ↔ χ₂`, `χ₃ ↔ χ₄`; `χ₅`, `χ₆` fixed.
    pub fn swapped(self) -> Chi {
        match self.0 {
            1 => Chi(2),
            2 => Chi(1),
            3 => Chi(4),
            4 => Chi(3),
            k => Chi(k),
        }
    }
}

impl fmt::Display for Chi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl FromStr for Chi {
    type Err = WordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix('x').ok_or_else(|| WordError::BadLeaf(s.into()))?;
        let k: u8 = digits.parse().map_err(|_| WordError::BadLeaf(s.into()))?;
        Chi::new(k).map_err(|_| WordError::BadLeaf(s.into()))
    }
}

impl Serialize for Chi {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Chi {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum WordError {
    #[error("leaf symbol {0:?} is not one of x1..x6")]
    BadLeaf(String),
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error("bad mode expression {0:?}")]
    BadMode(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BracketWord {
    Leaf(Chi),
    Bracket(Box<BracketWord>, Box<BracketWord>),
}

impl BracketWord {
    pub fn leaf(k: u8) -> BracketWord {
        BracketWord::Leaf(Chi::new(k).expect("leaf in 1..=6"))
    }

    pub fn br(a: BracketWord, b: BracketWord) -> BracketWord {
        BracketWord::Bracket(Box::new(a), Box::new(b))
    }

    /// `[[a,b],c]` for leaf indices.
    pub fn nested(a: u8, b: u8, c: u8) -> BracketWord {
        Self::br(Self::br(Self::leaf(a), Self::leaf(b)), Self::leaf(c))
    }

    pub fn leaves(&self) -> Vec<Chi> {
        match self {
            BracketWord::Leaf(c) => vec![*c],
            BracketWord::Bracket(a, b) => {
                let mut v = a.leaves();
                v.extend(b.leaves());
                v
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            BracketWord::Leaf(_) => 0,
            BracketWord::Bracket(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn from_json(v: &Value) -> Result<BracketWord, WordError> {
        match v {
            Value::String(s) => Ok(BracketWord::Leaf(s.parse()?)),
            Value::Array(items) if items.len() == 2 => Ok(BracketWord::br(
                BracketWord::from_json(&items[0])?,
                BracketWord::from_json(&items[1])?,
            )),
            other => Err(WordError::Malformed(other.to_string())),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            BracketWord::Leaf(c) => Value::String(c.to_string()),
            BracketWord::Bracket(a, b) => Value::Array(vec![a.to_json(), b.to_json()]),
        }
    }
}

impl fmt::Display for BracketWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketWord::Leaf(c) => write!(f, "{c}"),
            BracketWord::Bracket(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

impl Serialize for BracketWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BracketWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        BracketWord::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Linear combination `Σ cᵢ wᵢ` of bracket words.
pub type Combination = Vec<(Scalar, BracketWord)>;

/// Integer mode written as `a·n + b·l + c` in the two free mode parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ModeExpr {
    pub n: i32,
    pub l: i32,
    pub c: i32,
}

impl ModeExpr {
    pub const fn new(n: i32, l: i32, c: i32) -> Self {
        ModeExpr { n, l, c }
    }

    pub fn eval(&self, n: i32, l: i32) -> i32 {
        self.n * n + self.l * l + self.c
    }
}

impl FromStr for ModeExpr {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || WordError::BadMode(s.into());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut out = ModeExpr::default();
        let mut rest = compact.as_str();
        while !rest.is_empty() {
            let (sign, body) = match rest.as_bytes()[0] {
                b'-' => (-1, &rest[1..]),
                b'+' => (1, &rest[1..]),
                _ => (1, rest),
            };
            let end = body.find(['+', '-']).unwrap_or(body.len());
            let chunk = &body[..end];
            rest = &body[end..];
            let chunk = chunk.trim_end_matches('*');
            let (digits, var) = match chunk.chars().last() {
                Some(v @ ('n' | 'l')) => (chunk[..chunk.len() - 1].trim_end_matches('*'), Some(v)),
                _ => (chunk, None),
            };
            let k = if digits.is_empty() {
                if var.is_none() {
                    return Err(bad());
                }
                1
            } else {
                digits.parse::<i32>().map_err(|_| bad())?
            };
            match var {
                Some('n') => out.n += sign * k,
                Some('l') => out.l += sign * k,
                _ => out.c += sign * k,
            }
        }
        Ok(out)
    }
}

impl fmt::Display for ModeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, v) in [(self.n, "n"), (self.l, "l")] {
            match k {
                0 => {}
                1 => parts.push(v.to_string()),
                -1 => parts.push(format!("-{v}")),
                k => parts.push(format!("{k}{v}")),
            }
        }
        if self.c != 0 || parts.is_empty() {
            parts.push(self.c.to_string());
        }
        let mut s = parts[0].clone();
        for p in &parts[1..] {
            if let Some(r) = p.strip_prefix('-') {
                s.push('-');
                s.push_str(r);
            } else {
                s.push('+');
                s.push_str(p);
            }
        }
        f.write_str(&s)
    }
}

impl Serialize for ModeExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ModeExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            Value::Number(n) => n
                .as_i64()
                .map(|c| ModeExpr::new(0, 0, c as i32))
                .ok_or_else(|| serde::de::Error::custom("mode must be an integer")),
            other => Err(serde::de::Error::custom(format!("bad mode {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageTerm {
    pub coeff: Scalar,
    pub l: u8,
    pub m: u8,
    pub mode: ModeExpr,
}

/// A candidate homomorphism `χᵢ ↦ LoopElement`.
///
/// Each image is `prefactor[i] · Σ coeff · T_lm^(mode(n,l))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MappingTable {
    pub n: i32,
    pub l: i32,
    pub images: [Option<Vec<ImageTerm>>; 6],
    pub prefactors: [Scalar; 6],
}

fn term(coeff: Scalar, l: u8, m: u8, mode: ModeExpr) -> ImageTerm {
    ImageTerm { coeff, l, m, mode }
}

impl MappingTable {
    /// The default assignment with index folding `χ₃ → T₁₀`, `χ₄ → T₂₀`.
    pub fn standard(n: i32, l: i32) -> MappingTable {
        let lam = Scalar::sym(Symbol::Lambda);
        let lam2 = lam.pow(2);
        let ci = Scalar::i();
        let mi3l2 = &(&Scalar::int(-3) * &ci) * &lam2;
        let mik = &(-&ci) * &Scalar::sym(Symbol::Kappa);
        let images = [
            Some(vec![term(Scalar::one(), 0, 1, ModeExpr::new(1, 0, 0))]),
            Some(vec![term(Scalar::one(), 0, 2, ModeExpr::new(1, 0, 0))]),
            Some(vec![term(Scalar::one(), 1, 0, ModeExpr::new(-1, 0, 0))]),
            Some(vec![term(Scalar::one(), 2, 0, ModeExpr::new(-1, 0, 0))]),
            Some(vec![
                term(lam.clone(), 1, 1, ModeExpr::new(0, 1, 0)),
                term(lam, 2, 2, ModeExpr::new(0, 1, 0)),
            ]),
            Some(vec![
                term(mi3l2.clone(), 1, 1, ModeExpr::new(0, 2, 0)),
                term(mi3l2, 2, 2, ModeExpr::new(0, 2, 0)),
                term(mik.clone(), 1, 2, ModeExpr::new(0, 0, 0)),
                term(mik, 2, 1, ModeExpr::new(0, 0, 0)),
            ]),
        ];
        MappingTable {
            n,
            l,
            images,
            prefactors: std::array::from_fn(|_| Scalar::one()),
        }
    }

    pub fn with_prefactors(&self, prefactors: [Scalar; 6]) -> MappingTable {
        MappingTable {
            prefactors,
            ..self.clone()
        }
    }

    pub fn with_modes(&self, n: i32, l: i32) -> MappingTable {
        MappingTable { n, l, ..self.clone() }
    }

    pub fn unassign(&mut self, chi: Chi) {
        self.images[(chi.index() - 1) as usize] = None;
    }

    pub fn image(&self, chi: Chi) -> Result<LoopElement<Scalar>, AlgebraError> {
        let k = (chi.index() - 1) as usize;
        let terms = self.images[k].as_ref().ok_or(AlgebraError::Unassigned(chi))?;
        let mut out = LoopElement::zero();
        for t in terms {
            let g = LoopGenerator::new(t.l, t.m, t.mode.eval(self.n, self.l))?;
            out.add_term(g, &t.coeff * &self.prefactors[k]);
        }
        Ok(out)
    }

    pub fn evaluate(&self, w: &BracketWord) -> Result<LoopElement<Scalar>, AlgebraError> {
        match w {
            BracketWord::Leaf(c) => self.image(*c),
            BracketWord::Bracket(a, b) => Ok(self.evaluate(a)?.bracket(&self.evaluate(b)?)),
        }
    }

    pub fn evaluate_combination(&self, expr: &[(Scalar, BracketWord)]) -> Result<LoopElement<Scalar>, AlgebraError> {
        let mut out = LoopElement::zero();
        for (c, w) in expr {
            out = out.add(&self.evaluate(w)?.mul_coeff(c));
        }
        Ok(out)
    }

    /// Membership of `expr` in the kernel of this map.
    pub fn kernel_member(&self, expr: &[(Scalar, BracketWord)]) -> Result<bool, AlgebraError> {
        Ok(self.evaluate_combination(expr)?.is_zero())
    }

    pub fn from_json_str(text: &str) -> Result<MappingTable, AlgebraError> {
        serde_json::from_str(text).map_err(|e| AlgebraError::Data(e.to_string()))
    }
}

/// Convenience wrappers mirroring the operation names.
pub fn evaluate_word(map: &MappingTable, w: &BracketWord) -> Result<LoopElement<Scalar>, AlgebraError> {
    map.evaluate(w)
}

pub fn kernel_member(map: &MappingTable, expr: &[(Scalar, BracketWord)]) -> Result<bool, AlgebraError> {
    map.kernel_member(expr)
}
