//! Parameter sets of the published solution graphs.

use kbwave::quartic::Params;
use kbwave::solutions::{case1, case2, Branch, Case1Kind, Case2Kind, ClosedFormSolution, SolutionError};

const S3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Build {
    One(Case1Kind, [f64; 3]),
    Two(Case2Kind, [f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    /// Closed form as displayed with the graph.
    pub display: &'static str,
    pub params: Params,
    build: Build,
}

impl Preset {
    pub fn solution(&self, xi0: f64) -> Result<ClosedFormSolution, SolutionError> {
        match self.build {
            Build::One(kind, [f1, f2, f3]) => case1(kind, f1, f2, f3, Branch::Upper, xi0),
            Build::Two(kind, [f1, f2, f3]) => case2(kind, f1, f2, f3, xi0),
        }
    }

    /// Zeros of `F` for these parameters, with multiplicity.
    pub fn root_values(&self) -> [f64; 4] {
        let (kind_two, [f1, f2, f3]) = match self.build {
            Build::One(_, r) => (false, r),
            Build::Two(_, r) => (true, r),
        };
        let f4 = if kind_two { f1 * f2 * f3 / (f2 * f3 + f1 * f2 - f1 * f3) } else { f1 + f3 - f2 };
        let mut v = [f1, f2, f3, f4];
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        v
    }
}

pub fn all() -> Vec<Preset> {
    let r14 = 2.0 * 14f64.sqrt();
    vec![
        Preset {
            name: "fig-case1a",
            display: "u = sech(xi) - 2, xi = x - 2t",
            params: Params::new(2.0, -7.0 / 4.0, -7.0 / 2.0, -3.0 / 2.0),
            build: Build::One(Case1Kind::Cn, [-3.0, -2.0, -1.0]),
        },
        Preset {
            name: "fig-case1b-k05",
            display: "u = dn(xi; k=1/2) - 2, xi = x - 2t",
            params: Params::new(2.0, -25.0 / 16.0, -25.0 / 8.0, -39.0 / 32.0),
            build: Build::One(Case1Kind::Dn, [-3.0, -2.0 - 0.5 * S3, -1.0]),
        },
        Preset {
            name: "fig-case2a",
            display: "u = 1/(-2 - sqrt(3) sin(xi)), xi = x - t",
            params: Params::new(1.0, 0.75, 0.0, 0.0),
            build: Build::Two(Case2Kind::Sn, [-2.0 - S3, 0.0, -2.0 + S3]),
        },
        Preset {
            name: "fig-case2b",
            display: "u = 1/(2 - sqrt(3) cos(xi)), xi = x + t",
            params: Params::new(-1.0, 0.75, 0.0, 0.0),
            build: Build::Two(Case2Kind::Cn, [2.0 - S3, 0.0, 2.0 + S3]),
        },
        Preset {
            name: "fig-case2bc-k1",
            display: "u = 1/(1 - sqrt(7/8) sech(sqrt(7) xi)), xi = x + 9t/2",
            params: Params::new(-4.5, 10.0, 4.0, -1.0),
            build: Build::Two(Case2Kind::Cn, [8.0 - r14, 1.0, 8.0 + r14]),
        },
        Preset {
            name: "fig-case2e",
            display: "u = sin(2xi/sqrt(3))/(sin(2xi/sqrt(3)) + 2), xi = x + t/3",
            params: Params::new(-1.0 / 3.0, 5.0 / 18.0, -1.0 / 6.0, 1.0 / 24.0),
            build: Build::Two(Case2Kind::InvSn, [-1.0, 1.0, 1.0 / 3.0]),
        },
        Preset {
            name: "fig-case2f",
            display: "u = cos(2xi/sqrt(3))/(cos(2xi/sqrt(3)) + 2), xi = x + t/3",
            params: Params::new(-1.0 / 3.0, 5.0 / 18.0, -1.0 / 6.0, 1.0 / 24.0),
            build: Build::Two(Case2Kind::InvCn, [-1.0, 1.0, 1.0 / 3.0]),
        },
        Preset {
            name: "fig-case2f-k1",
            display: "u = sech(xi/sqrt(3))/(sech(xi/sqrt(3)) + 2), xi = x - t/6",
            params: Params::new(1.0 / 6.0, 1.0 / 9.0, 0.0, 0.0),
            build: Build::Two(Case2Kind::InvCn, [-1.0, 0.0, 1.0 / 3.0]),
        },
    ]
}

pub fn find(name: &str) -> Option<Preset> {
    all().into_iter().find(|p| p.name == name)
}

pub fn names() -> Vec<&'static str> {
    all().iter().map(|p| p.name).collect()
}
