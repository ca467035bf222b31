//! Built-in benchmark plants and their expected design outcomes.

use firsyn::analysis::GateVerdict;
use firsyn::benchmarks;
use firsyn::sysmodel::PlantModel;

use crate::document::SystemFile;

/// Outcomes the bench command checks against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectations {
    pub strong_stabilizability: GateVerdict,
    /// Convex output-feedback LMI feasible for the static law.
    pub convex_order0_feasible: bool,
    /// Smallest FIR order reaching `ρ < 1`; `None` when no order up to the
    /// sweep limit does.
    pub min_stabilizing_order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub model: PlantModel,
    pub expected: Expectations,
}

impl BenchmarkEntry {
    pub fn system_file(&self) -> SystemFile {
        SystemFile::new(self.id, self.model.clone())
    }
}

/// The four benchmark plants in a fresh copy.
pub fn registry() -> Vec<BenchmarkEntry> {
    vec![
        BenchmarkEntry {
            id: "system1",
            description: "(z-2)/((z-3)(z-4)), strongly stabilizable",
            model: PlantModel::TransferFunction(benchmarks::g1()),
            expected: Expectations {
                strong_stabilizability: GateVerdict::NecessaryConditionHolds,
                convex_order0_feasible: false,
                min_stabilizing_order: Some(0),
            },
        },
        BenchmarkEntry {
            id: "system2",
            description: "(z-2)/(z(z-3)), not strongly stabilizable",
            model: PlantModel::TransferFunction(benchmarks::g2()),
            expected: Expectations {
                strong_stabilizability: GateVerdict::Fails,
                convex_order0_feasible: false,
                min_stabilizing_order: None,
            },
        },
        BenchmarkEntry {
            id: "system3",
            description: "linearized batch reactor sampled at 0.1",
            model: PlantModel::StateSpace(benchmarks::system3()),
            expected: Expectations {
                strong_stabilizability: GateVerdict::NotApplicableMimo,
                convex_order0_feasible: false,
                min_stabilizing_order: Some(1),
            },
        },
        BenchmarkEntry {
            id: "system4",
            description: "two-input single-output plant",
            model: PlantModel::StateSpace(benchmarks::system4()),
            expected: Expectations {
                strong_stabilizability: GateVerdict::NotApplicableMimo,
                convex_order0_feasible: true,
                min_stabilizing_order: Some(0),
            },
        },
    ]
}

pub fn lookup(id: &str) -> Option<BenchmarkEntry> {
    registry().into_iter().find(|e| e.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use firsyn::sysmodel::StateSpaceSystem;

    #[test]
    fn models_match_core_benchmarks() {
        let ss: Vec<StateSpaceSystem> = registry().iter().map(|e| e.model.to_state_space().unwrap()).collect();
        assert_eq!(ss, benchmarks::all().to_vec());
        assert!(lookup("system3").is_some());
        assert!(lookup("system5").is_none());
    }
}
