//! A small qudit state-vector oracle for transversal multi-controlled-Z
//! circuits on CSS code states.
//!
//! States are dense complex amplitude vectors over GF(p)^n for prime p; the
//! oracle builds encoded coset superpositions, applies the diagonal phase
//! circuit defined by a multilinear form's entries, and compares against
//! encoding after the logical gates.

use crate::budget::{Budget, BudgetExceeded};
use crate::complexes::ChainComplex;
use crate::field::{Fe, Field};
use crate::reduce::EntryForm;
use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateVecError {
    #[error("state-vector oracle needs a prime field of size <= 3, got {0}")]
    FieldTooLarge(u64),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

/// A dense state over n qudits of prime dimension p; amplitude index is the
/// big-endian base-p expansion of the computational basis label.
#[derive(Debug, Clone)]
pub struct QuditState {
    pub p: u64,
    pub n: usize,
    pub amps: Vec<Complex64>,
}

impl QuditState {
    pub fn zero_state(p: u64, n: usize) -> QuditState {
        let mut amps = vec![Complex64::new(0.0, 0.0); (p as usize).pow(n as u32)];
        amps[0] = Complex64::new(1.0, 0.0);
        QuditState { p, n, amps }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in self.amps.iter_mut() {
                *a /= n;
            }
        }
    }

    /// Largest amplitude difference to another normalized state.
    pub fn distance(&self, other: &QuditState) -> f64 {
        assert_eq!(self.amps.len(), other.amps.len());
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn index_of(&self, word: &[Fe]) -> usize {
        let mut idx = 0usize;
        for &x in word {
            idx = idx * self.p as usize + x.0 as usize;
        }
        idx
    }

    /// Tensor product self (x) other.
    pub fn tensor(&self, other: &QuditState) -> QuditState {
        assert_eq!(self.p, other.p);
        let mut amps =
            vec![Complex64::new(0.0, 0.0); self.amps.len() * other.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for (j, b) in other.amps.iter().enumerate() {
                amps[i * other.amps.len() + j] = a * b;
            }
        }
        QuditState { p: self.p, n: self.n + other.n, amps }
    }
}

/// The uniform superposition over the coset (sum_j y_j z_j) + B^i of a
/// cochain complex: the encoding isometry applied to |y>.
pub fn encode_coset(
    c: &ChainComplex,
    level: usize,
    logicals: &[Vec<Fe>],
    y: &[Fe],
    budget: &Budget,
) -> Result<QuditState, StateVecError> {
    let field = &c.field;
    let p = field.size();
    assert_eq!(field.m(), 1, "statevector oracle works over prime fields");
    let n = c.dims[level];
    budget.check("statevector size", Budget::power(p, n))?;
    assert_eq!(logicals.len(), y.len());
    // base word sum_j y_j z_j
    let mut base = vec![Fe::ZERO; n];
    for (z, &c_y) in logicals.iter().zip(y) {
        for (i, &zi) in z.iter().enumerate() {
            base[i] = field.add(base[i], field.mul(c_y, zi));
        }
    }
    // enumerate B^level = image of delta_{level-1} over a row basis
    let span = c.coboundary_span(level);
    let (rref, _) = span.rref(field);
    let k = rref.len();
    budget.check("coboundary enumeration", Budget::power(p, k))?;
    let mut state = QuditState {
        p,
        n,
        amps: vec![Complex64::new(0.0, 0.0); (p as usize).pow(n as u32)],
    };
    let combos = Budget::power(p, k);
    let mut coeffs = vec![Fe::ZERO; k];
    for idx in 0..combos {
        let mut rem = idx;
        for cc in coeffs.iter_mut() {
            *cc = Fe((rem % p as u128) as u32);
            rem /= p as u128;
        }
        let mut word = base.clone();
        for (bi, &cc) in coeffs.iter().enumerate() {
            if !cc.is_zero() {
                for &(col, v) in &rref[bi] {
                    word[col] = field.add(word[col], field.mul(cc, v));
                }
            }
        }
        let pos = state.index_of(&word);
        state.amps[pos] += Complex64::new(1.0, 0.0);
    }
    state.normalize();
    Ok(state)
}

/// Applies the diagonal phase circuit of a multilinear form: for each entry
/// ((u_1..u_r), a) a C^{r-1}Z^a gate acts on qudit u_h of block h, adding the
/// phase exp(2 pi i tr(a z_1 ... z_r) / p) per basis label.
pub fn apply_form_circuit(
    field: &Field,
    state: &mut QuditState,
    block_sizes: &[usize],
    form: &EntryForm,
) {
    let p = field.p();
    let offsets: Vec<usize> = block_sizes
        .iter()
        .scan(0usize, |acc, &b| {
            let o = *acc;
            *acc += b;
            Some(o)
        })
        .collect();
    for (idx, amp) in state.amps.iter_mut().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let word = {
            // decode without borrowing state
            let mut w = vec![Fe::ZERO; state.n];
            let mut rem = idx;
            for i in (0..state.n).rev() {
                w[i] = Fe((rem % p as usize) as u32);
                rem /= p as usize;
            }
            w
        };
        let mut exponent = 0u64;
        for (us, a) in &form.entries {
            let mut prod = *a;
            for (h, &u) in us.iter().enumerate() {
                let z = word[offsets[h] + u];
                if z.is_zero() {
                    prod = Fe::ZERO;
                    break;
                }
                prod = field.mul(prod, z);
            }
            if !prod.is_zero() {
                exponent = (exponent + field.abs_trace(prod)) % p;
            }
        }
        if exponent != 0 {
            *amp *= Complex64::from_polar(1.0, TAU * exponent as f64 / p as f64);
        }
    }
}

/// The logical C^{r-1}Z phase on logical labels: product over j of the gate
/// phase on (y^{(1)}_j, ..., y^{(r)}_j).
pub fn logical_phase(field: &Field, ys: &[Vec<Fe>]) -> Complex64 {
    let p = field.p();
    let s = ys[0].len();
    let mut exponent = 0u64;
    for j in 0..s {
        let mut prod = Fe::ONE;
        for y in ys {
            prod = field.mul(prod, y[j]);
        }
        exponent = (exponent + field.abs_trace(prod)) % p;
    }
    Complex64::from_polar(1.0, TAU * exponent as f64 / p as f64)
}

/// Verifies, by full state-vector simulation, that the physical circuit of
/// the form's gates acts on encoded states exactly as the logical
/// C^{r-1}Z^{(x) s}: for every logical input tuple,
/// circuit(Enc(y^(1)) (x) ... (x) Enc(y^(r))) = Enc(...) . logical phases.
/// Returns the worst amplitude deviation.
pub fn statevector_oracle(
    complexes: &[&ChainComplex],
    level: usize,
    form: &EntryForm,
    logicals: &[Vec<Vec<Fe>>],
    budget: &Budget,
) -> Result<f64, StateVecError> {
    let field = &complexes[0].field;
    let p = field.size();
    if field.m() != 1 || p > 3 {
        return Err(StateVecError::FieldTooLarge(field.size()));
    }
    let r = complexes.len();
    let s = logicals[0].len();
    let total_qudits: usize = complexes.iter().map(|c| c.dims[level]).sum();
    budget.check("statevector oracle", Budget::power(p, total_qudits))?;
    let block_sizes: Vec<usize> = complexes.iter().map(|c| c.dims[level]).collect();
    let logical_tuples = Budget::power(p, s * r);
    budget.check("logical input enumeration", logical_tuples)?;
    let mut worst: f64 = 0.0;
    for combo in 0..logical_tuples {
        // decode r logical words of length s
        let mut rem = combo;
        let mut ys: Vec<Vec<Fe>> = Vec::with_capacity(r);
        for _ in 0..r {
            let mut y = vec![Fe::ZERO; s];
            for yj in y.iter_mut() {
                *yj = Fe((rem % p as u128) as u32);
                rem /= p as u128;
            }
            ys.push(y);
        }
        // LHS: circuit applied to the tensor of encodings
        let mut lhs = encode_coset(complexes[0], level, &logicals[0], &ys[0], budget)?;
        for h in 1..r {
            let enc = encode_coset(complexes[h], level, &logicals[h], &ys[h], budget)?;
            lhs = lhs.tensor(&enc);
        }
        let mut rhs = lhs.clone();
        apply_form_circuit(field, &mut lhs, &block_sizes, form);
        // RHS: logical phase times the unmodified encoding
        let phase = logical_phase(field, &ys);
        for a in rhs.amps.iter_mut() {
            *a *= phase;
        }
        worst = worst.max(lhs.distance(&rhs));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMat;
    use std::sync::Arc;

    fn trivial_code(field: Arc<Field>, n: usize) -> ChainComplex {
        ChainComplex::new(
            field,
            vec![0, n, 0],
            vec![vec![], (0..n).map(|i| format!("q{i}")).collect(), vec![]],
            vec![SparseMat::zero(n, 0), SparseMat::zero(0, n)],
        )
        .unwrap()
    }

    /// The [[7,1]] CSS code from the Hamming code: delta_0 = H^T (X checks),
    /// delta_1 = H (Z checks).
    fn steane(field: Arc<Field>) -> ChainComplex {
        let h_rows = [
            [1u32, 0, 1, 0, 1, 0, 1],
            [0, 1, 1, 0, 0, 1, 1],
            [0, 0, 0, 1, 1, 1, 1],
        ];
        let h = SparseMat::from_dense(
            &field,
            &h_rows
                .iter()
                .map(|r| r.iter().map(|&x| Fe(x)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        );
        ChainComplex::new(
            field,
            vec![3, 7, 3],
            vec![
                (0..3).map(|i| format!("x{i}")).collect(),
                (0..7).map(|i| format!("q{i}")).collect(),
                (0..3).map(|i| format!("z{i}")).collect(),
            ],
            vec![h.transpose(), h],
        )
        .unwrap()
    }

    #[test]
    fn zero_form_is_identity_circuit() {
        let f = Arc::new(Field::new(2, 1).unwrap());
        let c = trivial_code(f.clone(), 2);
        let form = EntryForm { r: 2, slot_dims: vec![2, 2], entries: vec![] };
        let logicals = vec![vec![Fe::ONE, Fe::ZERO], vec![Fe::ZERO, Fe::ONE]];
        let budget = Budget::default();
        let enc = encode_coset(&c, 1, &logicals, &[Fe::ONE, Fe::ONE], &budget).unwrap();
        let mut after = enc.clone().tensor(&enc);
        let before = after.clone();
        apply_form_circuit(&f, &mut after, &[2, 2], &form);
        assert!(after.distance(&before) < 1e-12);
    }

    #[test]
    fn cz_phases_match_gate_display() {
        // p = 3, trivial length-1 codes, zeta = x y: the circuit is a single
        // CZ_3 whose phases on |z1 z2> are e^{2 pi i z1 z2 / 3}
        let f = Arc::new(Field::new(3, 1).unwrap());
        let c = trivial_code(f.clone(), 1);
        let form = EntryForm {
            r: 2,
            slot_dims: vec![1, 1],
            entries: vec![(vec![0, 0], Fe::ONE)],
        };
        let logicals = vec![vec![vec![Fe::ONE]], vec![vec![Fe::ONE]]];
        let worst =
            statevector_oracle(&[&c, &c], 1, &form, &logicals, &Budget::default()).unwrap();
        assert!(worst < 1e-8, "worst deviation {worst}");
        // and directly: the diagonal entries of the circuit on a basis state
        let mut state = QuditState::zero_state(3, 2);
        state.amps.fill(Complex64::new(0.0, 0.0));
        let idx = 2 * 3 + 2; // |z1=2, z2=2>
        state.amps[idx] = Complex64::new(1.0, 0.0);
        apply_form_circuit(&f, &mut state, &[1, 1], &form);
        let expected = Complex64::from_polar(1.0, TAU * ((2.0 * 2.0) % 3.0) / 3.0);
        assert!((state.amps[idx] - expected).norm() < 1e-12);
    }

    #[test]
    fn steane_transversal_cz() {
        // two Steane blocks, zeta = dot product: transversal CZ implements
        // logical CZ on the (1111111, 1111111) logical pair
        let f = Arc::new(Field::new(2, 1).unwrap());
        let c = steane(f.clone());
        assert_eq!(c.cohomology_dim(1), 1);
        let form = EntryForm {
            r: 2,
            slot_dims: vec![7, 7],
            entries: (0..7).map(|i| (vec![i, i], Fe::ONE)).collect(),
        };
        let logical = vec![vec![Fe::ONE; 7]];
        let logicals = vec![logical.clone(), logical];
        let budget = Budget::new(1 << 24);
        let worst = statevector_oracle(&[&c, &c], 1, &form, &logicals, &budget).unwrap();
        assert!(worst < 1e-8, "worst deviation {worst}");
    }

    #[test]
    fn ccz_on_three_trivial_blocks() {
        // r = 3: zeta = x y z on length-1 trivial codes: the circuit is one
        // CCZ; logical action is CCZ
        let f = Arc::new(Field::new(2, 1).unwrap());
        let c = trivial_code(f.clone(), 1);
        let form = EntryForm {
            r: 3,
            slot_dims: vec![1, 1, 1],
            entries: vec![(vec![0, 0, 0], Fe::ONE)],
        };
        let logicals = vec![
            vec![vec![Fe::ONE]],
            vec![vec![Fe::ONE]],
            vec![vec![Fe::ONE]],
        ];
        let worst =
            statevector_oracle(&[&c, &c, &c], 1, &form, &logicals, &Budget::default()).unwrap();
        assert!(worst < 1e-12);
    }

    #[test]
    fn f3_two_logical_pairs() {
        // p = 3, two no-stabilizer qutrits per block, diagonal form: CZ x CZ
        let f = Arc::new(Field::new(3, 1).unwrap());
        let c = trivial_code(f.clone(), 2);
        let form = EntryForm {
            r: 2,
            slot_dims: vec![2, 2],
            entries: vec![(vec![0, 0], Fe::ONE), (vec![1, 1], Fe::ONE)],
        };
        let basis = vec![vec![Fe::ONE, Fe::ZERO], vec![Fe::ZERO, Fe::ONE]];
        let logicals = vec![basis.clone(), basis];
        let worst =
            statevector_oracle(&[&c, &c], 1, &form, &logicals, &Budget::default()).unwrap();
        assert!(worst < 1e-8);
    }
}
