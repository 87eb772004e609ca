use num_complex::Complex64;

use super::{DiffPoly, DiffPolyError, JetVar};
use crate::scalar::Symbol;

/// A [`DiffPoly`] flattened for repeated floating-point evaluation:
/// symbols are bound once, jets are read from a slot array.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<(Complex64, i32, Vec<(usize, u32)>)>,
}

impl CompiledPoly {
    pub fn compile(
        p: &DiffPoly,
        symbols: &dyn Fn(Symbol) -> Complex64,
        slot: &dyn Fn(&JetVar) -> Option<usize>,
    ) -> Result<Self, DiffPolyError> {
        let mut terms = Vec::new();
        for (m, c) in p.terms() {
            let coeff = c.eval(symbols);
            let mut vars = Vec::new();
            for (v, e) in m.factors() {
                vars.push((slot(v).ok_or(DiffPolyError::UnboundJet(*v))?, *e));
            }
            terms.push((coeff, m.lambda, vars));
        }
        Ok(CompiledPoly { terms })
    }

    pub fn eval(&self, jets: &[Complex64], lambda: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, k, vars) in &self.terms {
            let mut t = *c;
            if *k != 0 {
                t *= lambda.powi(*k);
            }
            for &(i, e) in vars {
                t *= if e == 1 { jets[i] } else { jets[i].powu(e) };
            }
            acc += t;
        }
        acc
    }
}
