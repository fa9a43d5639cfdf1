//! Verification suites: grids of residual checks with a machine-readable report.
//!
//! Every case evaluates one residual and passes iff `residual ≤ tolerance`.
//! Cases run in parallel; the report is sorted by case id.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cgc::cg_matrix;
use crate::error::{Error, Result};
use crate::hseries::{gauss_binomial, q_factorial, q_integer, q_power, HSeries, HalfInt};
use crate::matrix::SeriesMatrix;
use crate::qplane::{
    monomials_up_to, mu_classical, mu_deformed, mu_deformed_by_normal_ordering, PlaneElement, StarProduct,
};
use crate::reps::Generator;
use crate::spacetime4d::{
    r_matrix_rep, verify_r_intertwining, verify_yang_baxter, FourElement, LegCopy, Star4, Variant,
};
use crate::twist::{twist_rep, verify_coassociator_on_products, verify_intertwiner, EtaFunction};

/// Tolerance for comparisons of ħ⁰ slices against undeformed objects.
pub const CLASSICAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Series,
    Cgc,
    Twist,
    Plane,
    Spacetime,
}

impl Suite {
    const PARTS: [Suite; 5] = [Suite::Series, Suite::Cgc, Suite::Twist, Suite::Plane, Suite::Spacetime];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::All => "all",
            Suite::Series => "series",
            Suite::Cgc => "cgc",
            Suite::Twist => "twist",
            Suite::Plane => "plane",
            Suite::Spacetime => "spacetime",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "series" => Suite::Series,
            "cgc" => Suite::Cgc,
            "twist" => Suite::Twist,
            "plane" => Suite::Plane,
            "spacetime" => Suite::Spacetime,
            other => return Err(Error::Parse(format!("unknown suite `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub max_spin: HalfInt,
    pub order: usize,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub id: String,
    pub parameters: BTreeMap<String, String>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub cases: Vec<CaseResult>,
    pub summary: Summary,
}

impl VerifyReport {
    fn from_cases(suite: Suite, mut cases: Vec<CaseResult>) -> Self {
        cases.sort_by(|a, b| a.id.cmp(&b.id));
        let summary = Summary {
            total: cases.len(),
            passed: cases.iter().filter(|c| c.pass).count(),
            max_residual: cases.iter().map(|c| c.residual).fold(0.0, f64::max),
        };
        VerifyReport { suite, cases, summary }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.passed == self.summary.total
    }
}

type Check = Box<dyn Fn() -> Result<f64> + Send + Sync>;

struct Case {
    id: String,
    parameters: BTreeMap<String, String>,
    tolerance: f64,
    check: Check,
}

#[derive(Default)]
struct Grid {
    cases: Vec<Case>,
}

impl Grid {
    fn push(
        &mut self,
        id: impl Into<String>,
        parameters: &[(&str, String)],
        tolerance: f64,
        check: impl Fn() -> Result<f64> + Send + Sync + 'static,
    ) {
        self.cases.push(Case {
            id: id.into(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            tolerance,
            check: Box::new(check),
        });
    }

    fn run(self) -> Result<Vec<CaseResult>> {
        self.cases
            .into_par_iter()
            .map(|c| {
                let residual = (c.check)()?;
                Ok(CaseResult {
                    pass: residual <= c.tolerance,
                    id: c.id,
                    parameters: c.parameters,
                    residual,
                    tolerance: c.tolerance,
                })
            })
            .collect()
    }
}

pub fn run_suite(suite: Suite, config: &VerifyConfig) -> Result<VerifyReport> {
    let mut grid = Grid::default();
    let parts: Vec<Suite> = if suite == Suite::All { Suite::PARTS.to_vec() } else { vec![suite] };
    for part in parts {
        match part {
            Suite::Series => series_cases(&mut grid, config),
            Suite::Cgc => cgc_cases(&mut grid, config),
            Suite::Twist => twist_cases(&mut grid, config),
            Suite::Plane => plane_cases(&mut grid, config),
            Suite::Spacetime => spacetime_cases(&mut grid, config),
            Suite::All => unreachable!(),
        }
    }
    Ok(VerifyReport::from_cases(suite, grid.run()?))
}

fn spin_pairs(max: HalfInt) -> Vec<(HalfInt, HalfInt)> {
    HalfInt::spins_up_to(max).flat_map(|a| HalfInt::spins_up_to(max).map(move |b| (a, b))).collect()
}

fn pair_params(j1: HalfInt, j2: HalfInt) -> Vec<(&'static str, String)> {
    vec![("j1", j1.to_string()), ("j2", j2.to_string())]
}

fn identity_residual(m: &SeriesMatrix) -> f64 {
    m.distance(&SeriesMatrix::identity(m.rows(), m.order()))
}

fn classical_tol(config: &VerifyConfig) -> f64 {
    config.tol.min(CLASSICAL_TOL)
}

fn series_cases(grid: &mut Grid, config: &VerifyConfig) {
    let k = config.order;
    let tol = config.tol;
    let samples = move || {
        vec![
            HSeries::from_coeffs((0..=k).map(|i| 1.0 + 0.5 * i as f64).collect()),
            HSeries::from_coeffs((0..=k).map(|i| if i % 2 == 0 { -0.25 } else { 2.0 }).collect()),
            q_power(1.5, k),
        ]
    };
    let order = [("order", k.to_string())];
    grid.push("series/ring-axioms", &order, tol, move || {
        let s = samples();
        let (a, b, c) = (&s[0], &s[1], &s[2]);
        let assoc = (&(a * b) * c).distance(&(a * &(b * c)));
        let distrib = (a * &(b + c)).distance(&(&(a * b) + &(a * c)));
        let comm = (a * b).distance(&(b * a));
        Ok(assoc.max(distrib).max(comm))
    });
    grid.push("series/inverse-and-sqrt", &order, tol, move || {
        let one = HSeries::one(k);
        let mut worst: f64 = 0.0;
        for s in samples().iter().filter(|s| s.constant_term() > 0.0) {
            worst = worst.max((s * &s.invert()?).distance(&one));
            let r = s.sqrt()?;
            worst = worst.max((&r * &r).distance(s));
        }
        Ok(worst)
    });
    let n_max = config.max_spin.twice().max(1) as i64 + 2;
    grid.push("series/q-integers", &[("order", k.to_string()), ("n_max", n_max.to_string())], tol, move || {
        let q_diff = &q_power(1.0, k) - &q_power(-1.0, k);
        let mut worst: f64 = 0.0;
        for n in 0..=n_max {
            let lhs = &q_integer(n, k) * &q_diff;
            let rhs = &q_power(n as f64, k) - &q_power(-(n as f64), k);
            worst = worst.max(lhs.distance(&rhs));
            let fact = &q_factorial(n as u32 + 1, k) - &(&q_integer(n + 1, k) * &q_factorial(n as u32, k));
            worst = worst.max(fact.max_abs());
        }
        Ok(worst)
    });
    grid.push("series/gauss-binomials", &[("order", k.to_string()), ("n_max", n_max.to_string())], tol, move || {
        let mut worst: f64 = 0.0;
        for n in 0..=n_max {
            for j in 0..=n {
                let g = gauss_binomial(n, j, -2, k)?;
                worst = worst.max(g.distance(&gauss_binomial(n, n - j, -2, k)?));
                let classical = (1..=j).fold(1.0, |acc, i| acc * (n - j + i) as f64 / i as f64);
                worst = worst.max((g.constant_term() - classical).abs());
            }
        }
        Ok(worst)
    });
}

fn cgc_cases(grid: &mut Grid, config: &VerifyConfig) {
    let k = config.order;
    for (j1, j2) in spin_pairs(config.max_spin) {
        let params = pair_params(j1, j2);
        for deformed in [true, false] {
            let tag = if deformed { "qcg" } else { "cg" };
            grid.push(format!("cgc/{tag}-orthogonality/{j1},{j2}"), &params, config.tol, move || {
                let c = cg_matrix(j1, j2, deformed, k).matrix;
                let rows = identity_residual(&(&c * &c.transpose()));
                let cols = identity_residual(&(&c.transpose() * &c));
                Ok(rows.max(cols))
            });
        }
        grid.push(format!("cgc/classical-limit/{j1},{j2}"), &params, classical_tol(config), move || {
            let q = cg_matrix(j1, j2, true, k).matrix;
            let c = cg_matrix(j1, j2, false, 0).matrix;
            Ok((q.constant_term() - c.constant_term()).amax())
        });
    }
}

fn twist_cases(grid: &mut Grid, config: &VerifyConfig) {
    let k = config.order;
    let eta = EtaFunction::one();
    for (j1, j2) in spin_pairs(config.max_spin) {
        let params = pair_params(j1, j2);
        for g in [Generator::E, Generator::F, Generator::K] {
            let eta = eta.clone();
            let mut p = params.clone();
            p.push(("g", g.to_string()));
            grid.push(format!("twist/intertwining/{j1},{j2}/{g}"), &p, config.tol, move || {
                verify_intertwiner(&twist_rep(j1, j2, &eta, k)?, g)
            });
        }
        let e = eta.clone();
        grid.push(format!("twist/inverse/{j1},{j2}"), &params, config.tol, move || {
            twist_rep(j1, j2, &e, k)?.inverse_residual()
        });
        let e = eta.clone();
        grid.push(format!("twist/classical-limit/{j1},{j2}"), &params, classical_tol(config), move || {
            let f = twist_rep(j1, j2, &e, k)?.forward.matrix;
            Ok((f.constant_term() - SeriesMatrix::identity(f.rows(), 0).constant_term()).amax())
        });
    }
    let small = config.max_spin.min(HalfInt::ONE);
    for j1 in HalfInt::spins_up_to(small) {
        for (j2, j3) in spin_pairs(small) {
            let eta = eta.clone();
            let p = [("j1", j1.to_string()), ("j2", j2.to_string()), ("j3", j3.to_string())];
            grid.push(format!("twist/coassociator-on-products/{j1},{j2},{j3}"), &p, config.tol, move || {
                verify_coassociator_on_products(j1, j2, j3, &eta, k)
            });
        }
    }
}

fn basis_pairs(j1: HalfInt, j2: HalfInt, order: usize) -> Vec<(PlaneElement, PlaneElement)> {
    let mut out = Vec::new();
    for m1 in j1.weights() {
        for m2 in j2.weights() {
            out.push((
                PlaneElement::basis(j1, m1, order).expect("valid weight"),
                PlaneElement::basis(j2, m2, order).expect("valid weight"),
            ));
        }
    }
    out
}

fn max_over<T>(items: &[T], mut f: impl FnMut(&T) -> Result<f64>) -> Result<f64> {
    items.iter().try_fold(0.0, |acc: f64, t| Ok(acc.max(f(t)?)))
}

fn plane_cases(grid: &mut Grid, config: &VerifyConfig) {
    let k = config.order;
    let star = Arc::new(StarProduct::new(EtaFunction::one(), k));
    for (j1, j2) in spin_pairs(config.max_spin) {
        let params = pair_params(j1, j2);
        let sp = star.clone();
        grid.push(format!("plane/star-equals-quantum-product/{j1},{j2}"), &params, config.tol, move || {
            max_over(&basis_pairs(j1, j2, k), |(a, b)| Ok(sp.star(a, b)?.distance(&mu_deformed(a, b))))
        });
        grid.push(format!("plane/dual-route-product/{j1},{j2}"), &params, config.tol, move || {
            max_over(&basis_pairs(j1, j2, k), |(a, b)| {
                Ok(mu_deformed(a, b).distance(&mu_deformed_by_normal_ordering(a, b)))
            })
        });
        for g in [Generator::E, Generator::F, Generator::K] {
            let sp = star.clone();
            let mut p = params.clone();
            p.push(("g", g.to_string()));
            grid.push(format!("plane/covariance/{j1},{j2}/{g}"), &p, config.tol, move || {
                max_over(&basis_pairs(j1, j2, k), |(a, b)| sp.covariance_residual(g, a, b))
            });
        }
        let sp = star.clone();
        grid.push(format!("plane/classical-limit/{j1},{j2}"), &params, classical_tol(config), move || {
            max_over(&basis_pairs(j1, j2, k), |(a, b)| {
                Ok(sp.star(a, b)?.slice(0).distance(&mu_classical(a, b).slice(0)))
            })
        });
    }
    let sp = star.clone();
    grid.push("plane/commutation-relation", &[("order", k.to_string())], config.tol, move || {
        let (x, y) = (PlaneElement::x(k), PlaneElement::y(k));
        let yx = sp.star(&y, &x)?.scale_series(&q_power(1.0, k));
        Ok(sp.star(&x, &y)?.distance(&yx))
    });
    let max_degree = config.max_spin.twice().max(1) as u32;
    let by_degree: Vec<Vec<PlaneElement>> = (0..=max_degree)
        .map(|d| monomials_up_to(d, k).into_iter().skip((d * (d + 1) / 2) as usize).collect())
        .collect();
    let by_degree = Arc::new(by_degree);
    for da in 0..=max_degree {
        for db in 0..=max_degree {
            for dc in 0..=max_degree {
                let sp = star.clone();
                let mons = by_degree.clone();
                let p = [("deg_a", da.to_string()), ("deg_b", db.to_string()), ("deg_c", dc.to_string())];
                grid.push(format!("plane/associativity/{da},{db},{dc}"), &p, config.tol, move || {
                    let mut worst: f64 = 0.0;
                    for a in &mons[da as usize] {
                        for b in &mons[db as usize] {
                            for c in &mons[dc as usize] {
                                worst = worst.max(sp.associator_residual(a, b, c)?);
                            }
                        }
                    }
                    Ok(worst)
                });
            }
        }
    }
}

fn spacetime_cases(grid: &mut Grid, config: &VerifyConfig) {
    let k = config.order;
    let small = config.max_spin.min(HalfInt::ONE);
    for (j1, j2) in spin_pairs(small) {
        for g in [Generator::E, Generator::F, Generator::K] {
            let mut p = pair_params(j1, j2);
            p.push(("g", g.to_string()));
            grid.push(format!("spacetime/r-intertwining/{j1},{j2}/{g}"), &p, config.tol, move || {
                verify_r_intertwining(j1, j2, g, k)
            });
        }
        grid.push(
            format!("spacetime/r-classical-limit/{j1},{j2}"),
            &pair_params(j1, j2),
            classical_tol(config),
            move || {
                let r = r_matrix_rep(j1, j2, k)?.matrix.matrix;
                Ok((r.constant_term() - SeriesMatrix::identity(r.rows(), 0).constant_term()).amax())
            },
        );
    }
    let half = HalfInt::HALF;
    grid.push("spacetime/yang-baxter/1/2,1/2,1/2", &[("order", k.to_string())], config.tol, move || {
        verify_yang_baxter(half, half, half, k)
    });

    let euclid = Arc::new(Star4::new(Variant::Euclidean, EtaFunction::one(), k));
    let plane = Arc::new(StarProduct::new(EtaFunction::one(), k));
    for da in 0..=2u32 {
        for db in 0..=2u32 {
            let (s4, sp) = (euclid.clone(), plane.clone());
            let p = [("deg_a", da.to_string()), ("deg_b", db.to_string())];
            grid.push(format!("spacetime/euclid-factorization/{da},{db}"), &p, config.tol, move || {
                let of_degree = |d: u32| -> Vec<PlaneElement> {
                    monomials_up_to(d, k).into_iter().skip((d * (d + 1) / 2) as usize).collect()
                };
                let right = monomials_up_to(1, k);
                let mut worst: f64 = 0.0;
                for a in &of_degree(da) {
                    for b in &of_degree(db) {
                        for a2 in &right {
                            for b2 in &right {
                                let lhs = s4.star(&FourElement::tensor(a, a2), &FourElement::tensor(b, b2))?;
                                let rhs = FourElement::tensor(&sp.star(a, b)?, &sp.star(a2, b2)?);
                                worst = worst.max(lhs.distance(&rhs));
                            }
                        }
                    }
                }
                Ok(worst)
            });
        }
    }

    let mink_order = k.min(4);
    let mink = Arc::new(Star4::new(Variant::Minkowski, EtaFunction::one(), mink_order));
    for (i, name) in ["x1", "y1", "x2", "y2"].into_iter().enumerate() {
        let s4 = mink.clone();
        let p = [("first", name.to_string()), ("order", mink_order.to_string())];
        grid.push(format!("spacetime/minkowski-associativity/{name}"), &p, config.tol, move || {
            let coords = FourElement::coordinates(mink_order);
            let a = &coords[i];
            let mut worst: f64 = 0.0;
            for b in &coords {
                for c in &coords {
                    worst = worst.max(s4.associator_residual(a, b, c)?);
                }
            }
            Ok(worst)
        });
    }

    for (variant, s4) in [(Variant::Euclidean, euclid.clone()), (Variant::Minkowski, mink.clone())] {
        grid.push(
            format!("spacetime/classical-limit-commutative/{variant}"),
            &[("variant", variant.to_string())],
            classical_tol(config),
            move || {
                let elems = crate::spacetime4d::monomials_up_to(1, s4.order());
                let mut worst: f64 = 0.0;
                for a in &elems {
                    for b in &elems {
                        worst = worst.max(s4.star(a, b)?.slice(0).distance(&s4.star(b, a)?.slice(0)));
                    }
                }
                Ok(worst)
            },
        );
    }

    for copy in [LegCopy::Left, LegCopy::Right] {
        for g in [Generator::E, Generator::F, Generator::K] {
            let s4 = euclid.clone();
            let tag = if copy == LegCopy::Left { "left" } else { "right" };
            let p = [("copy", tag.to_string()), ("g", g.to_string())];
            grid.push(format!("spacetime/euclid-covariance/{tag}/{g}"), &p, config.tol, move || {
                let coords = FourElement::coordinates(k);
                let mut worst: f64 = 0.0;
                for a in &coords {
                    for b in &coords {
                        worst = worst.max(s4.covariance_residual(g, copy, a, b)?);
                    }
                }
                Ok(worst)
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(tol: f64) -> VerifyConfig {
        VerifyConfig { max_spin: HalfInt::ONE, order: 4, tol }
    }

    #[test]
    fn suites_pass_at_default_tolerance() {
        for suite in Suite::PARTS {
            let report = run_suite(suite, &config(1e-9)).unwrap();
            assert!(report.all_passed(), "{suite}: {:?}", report.cases.iter().filter(|c| !c.pass).collect::<Vec<_>>());
            assert_eq!(report.summary.total, report.cases.len());
        }
    }

    #[test]
    fn zero_tolerance_fails_the_plane_suite() {
        let report = run_suite(Suite::Plane, &config(0.0)).unwrap();
        assert!(!report.all_passed());
        assert!(report.cases.iter().all(|c| c.pass == (c.residual <= c.tolerance)));
    }

    #[test]
    fn report_is_sorted_and_round_trips() {
        let report = run_suite(Suite::Cgc, &config(1e-9)).unwrap();
        let ids: Vec<&String> = report.cases.iter().map(|c| &c.id).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        let json = serde_json::to_string(&report).unwrap();
        let back: VerifyReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        assert_eq!(run_suite(Suite::Cgc, &config(1e-9)).unwrap(), report);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::All, Suite::Series, Suite::Cgc, Suite::Twist, Suite::Plane, Suite::Spacetime] {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }
}
