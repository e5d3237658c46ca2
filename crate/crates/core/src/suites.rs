//! Named benchmark instances.
//!
//! A small catalog of synthetic problems exercising the main regimes:
//! gaussian complements, fully non-gaussian products, rotation-symmetric
//! factors that force cross-moment extension, and labeled concepts for the
//! learner. Benchmarks and integration tests refer to these by name so
//! that numbers stay comparable across runs.

use crate::dataset::{
    gen_factorizable, gen_labeled, ComponentDist, ComponentSpec, Concept, GroundTruth,
    SampleMatrix,
};
use crate::error::Result;

/// A fully specified synthetic problem.
#[derive(Debug, Clone)]
pub struct SuiteInstance {
    pub name: &'static str,
    pub spec: ComponentSpec,
    pub n: usize,
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    /// Present on learning instances; samples come labeled.
    pub concept: Option<Concept>,
}

impl SuiteInstance {
    /// Draws the instance's samples and ground truth.
    pub fn materialize(&self) -> Result<(SampleMatrix, GroundTruth)> {
        match &self.concept {
            Some(c) => gen_labeled(&self.spec, self.n, self.k, c, self.samples, self.seed),
            None => gen_factorizable(&self.spec, self.n, self.k, self.samples, self.seed),
        }
    }
}

/// The standard catalog.
pub fn standard_suites() -> Vec<SuiteInstance> {
    vec![
        SuiteInstance {
            name: "box_gauss_n10",
            spec: ComponentSpec {
                v: ComponentDist::isotropic_box(2),
                w: ComponentDist::Gaussian,
            },
            n: 10,
            k: 2,
            samples: 200_000,
            seed: 1001,
            concept: None,
        },
        SuiteInstance {
            name: "ball_gauss_n8",
            spec: ComponentSpec {
                v: ComponentDist::isotropic_ball(3),
                w: ComponentDist::Gaussian,
            },
            n: 8,
            k: 3,
            samples: 200_000,
            seed: 1002,
            concept: None,
        },
        SuiteInstance {
            name: "mix_gauss_n6",
            spec: ComponentSpec {
                v: ComponentDist::Mixture {
                    weights: vec![0.5, 0.5],
                    components: vec![
                        ComponentDist::isotropic_box(2),
                        ComponentDist::isotropic_ball(2),
                    ],
                },
                w: ComponentDist::Gaussian,
            },
            n: 6,
            k: 2,
            samples: 200_000,
            seed: 1003,
            concept: None,
        },
        SuiteInstance {
            name: "box_box_n6",
            spec: ComponentSpec {
                v: ComponentDist::isotropic_box(3),
                w: ComponentDist::isotropic_box(3),
            },
            n: 6,
            k: 3,
            samples: 150_000,
            seed: 1004,
            concept: None,
        },
        SuiteInstance {
            name: "ball_box_n6",
            spec: ComponentSpec {
                v: ComponentDist::isotropic_ball(3),
                w: ComponentDist::isotropic_box(3),
            },
            n: 6,
            k: 3,
            samples: 150_000,
            seed: 1005,
            concept: None,
        },
        SuiteInstance {
            name: "concept_box_n10",
            spec: ComponentSpec {
                v: ComponentDist::isotropic_box(2),
                w: ComponentDist::Gaussian,
            },
            n: 10,
            k: 2,
            samples: 200_000,
            seed: 1006,
            concept: Some(Concept::Box {
                intervals: vec![(-1.0, 1.0), (-1.2, 0.9)],
            }),
        },
        SuiteInstance {
            name: "concept_hull_n8",
            spec: ComponentSpec {
                v: ComponentDist::isotropic_ball(3),
                w: ComponentDist::Gaussian,
            },
            n: 8,
            k: 3,
            samples: 200_000,
            seed: 1007,
            concept: Some(Concept::Box {
                intervals: vec![(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
            }),
        },
    ]
}

/// Looks an instance up by name.
pub fn suite(name: &str) -> Option<SuiteInstance> {
    standard_suites().into_iter().find(|s| s.name == name)
}
