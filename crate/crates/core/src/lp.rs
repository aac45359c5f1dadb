//! Exact rational linear feasibility via Fourier-Motzkin elimination.
//!
//! Handles mixed strict/non-strict inequalities and produces witness points,
//! which the probabilistic one-step oracle and the model extraction need.
//! Everything runs over `BigRational`; no floating point anywhere.

use std::collections::BTreeMap;

use num::{BigRational, Signed, Zero};

/// `Σ coeffs[i]·x_i ≤ bound`, or `<` when `strict`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<BigRational>,
    pub bound: BigRational,
    pub strict: bool,
}

#[derive(Clone, Debug, Default)]
pub struct System {
    n_vars: usize,
    constraints: Vec<Constraint>,
}

impl System {
    pub fn new(n_vars: usize) -> System {
        System {
            n_vars,
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<BigRational>, bound: BigRational, strict: bool) {
        debug_assert_eq!(coeffs.len(), self.n_vars);
        self.constraints.push(Constraint {
            coeffs,
            bound,
            strict,
        });
    }

    pub fn add_le(&mut self, coeffs: Vec<BigRational>, bound: BigRational) {
        self.add(coeffs, bound, false);
    }

    pub fn add_lt(&mut self, coeffs: Vec<BigRational>, bound: BigRational) {
        self.add(coeffs, bound, true);
    }

    pub fn add_ge(&mut self, coeffs: Vec<BigRational>, bound: BigRational) {
        self.add(coeffs.into_iter().map(|c| -c).collect(), -bound, false);
    }

    pub fn add_eq(&mut self, coeffs: Vec<BigRational>, bound: BigRational) {
        self.add_le(coeffs.clone(), bound.clone());
        self.add_ge(coeffs, bound);
    }

    /// Nonnegativity of every variable.
    pub fn add_nonneg_all(&mut self) {
        for i in 0..self.n_vars {
            let mut c = vec![BigRational::zero(); self.n_vars];
            c[i] = -BigRational::from_integer(1.into());
            self.add_le(c, BigRational::zero());
        }
    }

    pub fn feasible(&self) -> bool {
        self.witness().is_some()
    }

    /// A satisfying assignment, if one exists.
    pub fn witness(&self) -> Option<Vec<BigRational>> {
        // stages[k] = system over variables k.. with variables 0..k eliminated
        let mut stages: Vec<Vec<Constraint>> = Vec::with_capacity(self.n_vars + 1);
        stages.push(normalize(self.constraints.clone()));
        for var in 0..self.n_vars {
            let next = eliminate(&stages[var], var, self.n_vars);
            stages.push(normalize(next));
        }
        // Ground stage: all coefficients zero.
        for c in &stages[self.n_vars] {
            debug_assert!(c.coeffs.iter().all(|x| x.is_zero()));
            let ok = if c.strict {
                BigRational::zero() < c.bound
            } else {
                BigRational::zero() <= c.bound
            };
            if !ok {
                return None;
            }
        }
        // Back-substitute, choosing the last variable first.
        let mut assignment = vec![BigRational::zero(); self.n_vars];
        #[allow(clippy::needless_range_loop)]
        for var in (0..self.n_vars).rev() {
            let mut lower: Option<(BigRational, bool)> = None;
            let mut upper: Option<(BigRational, bool)> = None;
            for c in &stages[var] {
                let a = &c.coeffs[var];
                if a.is_zero() {
                    continue;
                }
                // a·x + Σ_{j>var} c_j·x_j ≤ bound
                let mut rest = c.bound.clone();
                for j in var + 1..self.n_vars {
                    rest -= &c.coeffs[j] * &assignment[j];
                }
                let limit = rest / a;
                if a.is_positive() {
                    // x ≤ limit
                    match &upper {
                        Some((u, us)) if *u < limit || (*u == limit && (*us || !c.strict)) => {}
                        _ => upper = Some((limit, c.strict)),
                    }
                } else {
                    // x ≥ limit
                    match &lower {
                        Some((l, ls)) if *l > limit || (*l == limit && (*ls || !c.strict)) => {}
                        _ => lower = Some((limit, c.strict)),
                    }
                }
            }
            let one = BigRational::from_integer(1.into());
            let two = BigRational::from_integer(2.into());
            assignment[var] = match (lower, upper) {
                (None, None) => BigRational::zero(),
                (Some((l, ls)), None) => {
                    if ls {
                        l + one
                    } else {
                        l
                    }
                }
                (None, Some((u, us))) => {
                    if us {
                        u - one
                    } else {
                        u
                    }
                }
                (Some((l, ls)), Some((u, us))) => {
                    if l == u {
                        debug_assert!(!ls && !us, "FM said feasible but bounds clash");
                        l
                    } else {
                        debug_assert!(l < u);
                        (l + u) / &two
                    }
                }
            };
        }
        Some(assignment)
    }
}

/// Eliminates `var`: keeps constraints not mentioning it, combines every
/// (lower, upper) bound pair. Strictness propagates through combination.
fn eliminate(constraints: &[Constraint], var: usize, n_vars: usize) -> Vec<Constraint> {
    let mut unrelated = Vec::new();
    let mut uppers = Vec::new(); // positive coefficient on var
    let mut lowers = Vec::new(); // negative coefficient on var
    for c in constraints {
        let a = &c.coeffs[var];
        if a.is_zero() {
            unrelated.push(c.clone());
        } else if a.is_positive() {
            uppers.push(c);
        } else {
            lowers.push(c);
        }
    }
    let mut out = unrelated;
    for up in &uppers {
        for lo in &lowers {
            let au = &up.coeffs[var];
            let al = &lo.coeffs[var]; // negative
            // up/au gives x ≤ ...; -(lo/al) gives x ≥ ...; combine.
            let scale_u = -al.clone(); // positive
            let scale_l = au.clone(); // positive
            let mut coeffs = Vec::with_capacity(n_vars);
            for j in 0..n_vars {
                coeffs.push(&up.coeffs[j] * &scale_u + &lo.coeffs[j] * &scale_l);
            }
            debug_assert!(coeffs[var].is_zero());
            let bound = &up.bound * &scale_u + &lo.bound * &scale_l;
            out.push(Constraint {
                coeffs,
                bound,
                strict: up.strict || lo.strict,
            });
        }
    }
    out
}

/// Scales each constraint so its first nonzero coefficient is ±1 and keeps
/// only the tightest bound per coefficient vector. Ground absurdities are kept
/// as-is so the feasibility check can see them.
fn normalize(constraints: Vec<Constraint>) -> Vec<Constraint> {
    let mut tightest: BTreeMap<Vec<BigRational>, (BigRational, bool)> = BTreeMap::new();
    let mut ground = Vec::new();
    for mut c in constraints {
        let scale = c.coeffs.iter().find(|x| !x.is_zero()).map(|x| x.abs());
        match scale {
            None => ground.push(c),
            Some(s) => {
                for x in &mut c.coeffs {
                    *x /= &s;
                }
                c.bound /= &s;
                match tightest.get_mut(&c.coeffs) {
                    Some((b, strict)) => {
                        if c.bound < *b || (c.bound == *b && c.strict && !*strict) {
                            *b = c.bound;
                            *strict = c.strict;
                        }
                    }
                    None => {
                        tightest.insert(c.coeffs, (c.bound, c.strict));
                    }
                }
            }
        }
    }
    let mut out = ground;
    for (coeffs, (bound, strict)) in tightest {
        out.push(Constraint {
            coeffs,
            bound,
            strict,
        });
    }
    out
}

/// Convenience: builds a `BigRational` from an `i64` pair.
pub fn big(numer: i64, denom: i64) -> BigRational {
    BigRational::new(numer.into(), denom.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_witness(sys: &System) {
        let w = sys.witness().expect("feasible");
        for c in &sys.constraints {
            let lhs: BigRational = c
                .coeffs
                .iter()
                .zip(&w)
                .map(|(a, x)| a * x)
                .fold(BigRational::zero(), |a, b| a + b);
            if c.strict {
                assert!(lhs < c.bound, "strict constraint violated");
            } else {
                assert!(lhs <= c.bound, "constraint violated");
            }
        }
    }

    #[test]
    fn simple_feasible() {
        // x + y = 1, x ≥ 0, y ≥ 0, x < 1/2
        let mut sys = System::new(2);
        sys.add_eq(vec![big(1, 1), big(1, 1)], big(1, 1));
        sys.add_nonneg_all();
        sys.add_lt(vec![big(1, 1), big(0, 1)], big(1, 2));
        check_witness(&sys);
    }

    #[test]
    fn strict_infeasible() {
        // x ≥ 1 and x < 1
        let mut sys = System::new(1);
        sys.add_ge(vec![big(1, 1)], big(1, 1));
        sys.add_lt(vec![big(1, 1)], big(1, 1));
        assert!(!sys.feasible());
    }

    #[test]
    fn distribution_mass_clash() {
        // μ(A) ≥ 1/2, μ(B) ≥ 2/3, A and B disjoint within a 2-point space:
        // x + y = 1 cannot carry mass 7/6.
        let mut sys = System::new(2);
        sys.add_eq(vec![big(1, 1), big(1, 1)], big(1, 1));
        sys.add_nonneg_all();
        sys.add_ge(vec![big(1, 1), big(0, 1)], big(1, 2));
        sys.add_ge(vec![big(0, 1), big(1, 1)], big(2, 3));
        assert!(!sys.feasible());
    }

    #[test]
    fn equality_only() {
        let mut sys = System::new(3);
        sys.add_eq(vec![big(1, 1), big(1, 1), big(1, 1)], big(1, 1));
        sys.add_nonneg_all();
        check_witness(&sys);
    }

    #[test]
    fn randomised_witnesses_satisfy() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=4usize);
            let mut sys = System::new(n);
            sys.add_nonneg_all();
            let k = rng.gen_range(1..=5usize);
            for _ in 0..k {
                let coeffs: Vec<BigRational> =
                    (0..n).map(|_| big(rng.gen_range(-3..=3i64), 1)).collect();
                let bound = big(rng.gen_range(-2..=6i64), rng.gen_range(1..=3i64));
                sys.add(coeffs, bound, rng.gen_bool(0.3));
            }
            if let Some(w) = sys.witness() {
                for c in &sys.constraints {
                    let lhs: BigRational = c
                        .coeffs
                        .iter()
                        .zip(&w)
                        .map(|(a, x)| a * x)
                        .fold(BigRational::zero(), |a, b| a + b);
                    if c.strict {
                        assert!(lhs < c.bound);
                    } else {
                        assert!(lhs <= c.bound);
                    }
                }
            }
        }
    }
}
