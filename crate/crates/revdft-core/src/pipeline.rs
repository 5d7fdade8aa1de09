//! High-level orchestration shared by the command line tool and the
//! Python bindings: transform dispatch by method name, annotation-aware
//! grading, and the glue between test sources, rules, and fault universes.

use crate::circuit::{Circuit, CircuitError, LineId};
use crate::fault::{
    enumerate_faults_with, EnumerateOptions, FaultError, FaultKind, FaultUniverse, Multiplicity,
};
use crate::offline::{
    modify_mct_offline, modify_mctf_offline, OfflineError, OfflineTestableCircuit,
};
use crate::online::{
    convert_mct_to_mctf_online, modify_mcf_online, modify_mct_online, OnlineError,
    OnlineTestableCircuit,
};
use crate::testset::{
    grade, greedy_minimal_testset, CoverageReport, ResponseRule, TestSet, TestSetError,
};

/// Every testability transform, by its public name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    OnlineMct,
    OnlineMcf,
    OnlineMctf,
    OfflineMct,
    OfflineMctf,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::OnlineMct,
        Method::OnlineMcf,
        Method::OnlineMctf,
        Method::OfflineMct,
        Method::OfflineMctf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::OnlineMct => "online-mct",
            Method::OnlineMcf => "online-mcf",
            Method::OnlineMctf => "online-mctf",
            Method::OfflineMct => "offline-mct",
            Method::OfflineMctf => "offline-mctf",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| PipelineError::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(
        "unknown method {0:?} (expected online-mct, online-mcf, online-mctf, offline-mct, or offline-mctf)"
    )]
    UnknownMethod(String),
    #[error("the designed test set comes from a transform annotation, which this circuit lacks")]
    DesignedTestsNeedAnnotation,
    #[error(transparent)]
    Online(#[from] OnlineError),
    #[error(transparent)]
    Offline(#[from] OfflineError),
    #[error(transparent)]
    Tests(#[from] TestSetError),
    #[error(transparent)]
    Fault(#[from] FaultError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// The result of applying a testability transform: the annotated circuit
/// plus the names of the wires the scheme added.
#[derive(Debug, Clone)]
pub struct TransformOutcome {
    pub circuit: Circuit,
    pub method: Method,
    pub check_line: Option<String>,
    pub parity_line: Option<String>,
    pub test_line: Option<String>,
}

/// Applies the named transform to a circuit.
pub fn transform(circuit: &Circuit, method: Method) -> Result<TransformOutcome, PipelineError> {
    let name_of = |c: &Circuit, line: LineId| c.line_name(line).to_string();
    let outcome = match method {
        Method::OnlineMct | Method::OnlineMcf | Method::OnlineMctf => {
            let testable = match method {
                Method::OnlineMct => modify_mct_online(circuit)?,
                Method::OnlineMcf => modify_mcf_online(circuit)?,
                _ => convert_mct_to_mctf_online(circuit)?,
            };
            let check = name_of(testable.circuit(), testable.check_line());
            let parity = testable.parity_line().map(|l| name_of(testable.circuit(), l));
            TransformOutcome {
                circuit: testable.into_circuit(),
                method,
                check_line: Some(check),
                parity_line: parity,
                test_line: None,
            }
        }
        Method::OfflineMct | Method::OfflineMctf => {
            let testable = match method {
                Method::OfflineMct => modify_mct_offline(circuit)?,
                _ => modify_mctf_offline(circuit)?,
            };
            let test = name_of(testable.circuit(), testable.test_line());
            TransformOutcome {
                circuit: testable.into_circuit(),
                method,
                check_line: None,
                parity_line: None,
                test_line: Some(test),
            }
        }
    };
    Ok(outcome)
}

/// A transform annotation recovered from a circuit, if any.
pub enum Provenance {
    Online(Box<OnlineTestableCircuit>),
    Offline(Box<OfflineTestableCircuit>),
    None,
}

/// Recovers the instrumented view from an annotated circuit. A circuit
/// without any annotation is `Provenance::None`; a circuit whose
/// annotation does not match its structure is an error.
pub fn detect_provenance(circuit: &Circuit) -> Result<Provenance, PipelineError> {
    match OnlineTestableCircuit::from_annotated(circuit) {
        Ok(t) => return Ok(Provenance::Online(Box::new(t))),
        Err(OnlineError::MissingAnnotation) => return Ok(Provenance::None),
        Err(OnlineError::MalformedAnnotation(_)) => {}
        Err(err) => return Err(err.into()),
    }
    match OfflineTestableCircuit::from_annotated(circuit) {
        Ok(t) => Ok(Provenance::Offline(Box::new(t))),
        Err(err) => Err(err.into()),
    }
}

/// Where grading vectors come from.
#[derive(Debug, Clone)]
pub enum TestSource {
    /// The annotated scheme's own test set: the uniform identity vectors
    /// for a blocking test mode, the input sweep for a concurrent checker.
    Designed,
    /// Vectors supplied by the caller (typically a parsed vector file).
    Vectors(TestSet),
    /// Greedy cover generated against the graded universe.
    ExhaustiveGreedy,
}

/// A grading request as the tools expose it.
#[derive(Debug, Clone)]
pub struct GradeRequest {
    pub kind: FaultKind,
    pub multiplicity: Multiplicity,
    pub tests: TestSource,
    /// Overrides the rule implied by the test source or annotation.
    pub rule: Option<ResponseRule>,
    pub options: EnumerateOptions,
}

/// What a grading run actually did, alongside the report.
#[derive(Debug, Clone)]
pub struct GradeOutcome {
    pub report: CoverageReport,
    pub tests: TestSet,
    pub rule: ResponseRule,
    /// True when the universe was the annotation's designed fault universe
    /// rather than a raw enumeration.
    pub designed_universe: bool,
}

/// Grades a circuit with annotation awareness.
///
/// When the circuit carries a transform annotation and the requested kind
/// matches the scheme's designed universe (single bit flips for a
/// concurrent checker, single or multiple stuck-at for a blocking test
/// mode), the designed universe is graded: that is the claim the transform
/// makes. Any other kind grades the raw enumerated universe. The response
/// rule defaults to the scheme's rule (check wire or identity), then to
/// the test set's own rule.
pub fn grade_circuit(
    circuit: &Circuit,
    request: &GradeRequest,
) -> Result<GradeOutcome, PipelineError> {
    let provenance = detect_provenance(circuit)?;

    let designed = match (&provenance, request.kind, request.multiplicity) {
        (Provenance::Online(t), FaultKind::BitFlip, Multiplicity::Single) => {
            Some(t.bitflip_universe())
        }
        (Provenance::Offline(t), FaultKind::StuckAt, Multiplicity::Single) => {
            Some(t.stuck_at_universe())
        }
        (Provenance::Offline(t), FaultKind::StuckAt, Multiplicity::Multiple(k)) => {
            Some(t.multiple_stuck_at_universe(k, &request.options)?)
        }
        _ => None,
    };
    let designed_universe = designed.is_some();
    let universe: FaultUniverse = match designed {
        Some(u) => u,
        None => enumerate_faults_with(circuit, request.kind, request.multiplicity, &request.options)?,
    };

    let scheme_rule = match &provenance {
        Provenance::Online(t) => Some(t.check_rule()),
        Provenance::Offline(_) => Some(ResponseRule::IdentityOutput),
        Provenance::None => None,
    };

    match &request.tests {
        TestSource::Designed => {
            let mut tests = match &provenance {
                Provenance::Online(t) => t.baseline_tests(),
                Provenance::Offline(t) => t.gts(),
                Provenance::None => return Err(PipelineError::DesignedTestsNeedAnnotation),
            };
            if let Some(rule) = request.rule {
                tests.rule = rule;
            }
            let report = grade(circuit, &tests, &universe)?;
            let rule = tests.rule;
            Ok(GradeOutcome { report, tests, rule, designed_universe })
        }
        TestSource::Vectors(tests) => {
            let mut tests = tests.clone();
            if let Some(rule) = request.rule {
                tests.rule = rule;
            }
            let report = grade(circuit, &tests, &universe)?;
            let rule = tests.rule;
            Ok(GradeOutcome { report, tests, rule, designed_universe })
        }
        TestSource::ExhaustiveGreedy => {
            let rule = request
                .rule
                .or(scheme_rule)
                .unwrap_or(ResponseRule::CompareToFaultFree);
            let (tests, report) = greedy_minimal_testset(circuit, &universe, rule)?;
            Ok(GradeOutcome { report, tests, rule, designed_universe })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, Control};
    use crate::offline::OfflineMethod;
    use crate::online::OnlineMethod;

    fn toffoli_circuit() -> Circuit {
        let mut b = CircuitBuilder::new();
        let a = b.input("a");
        let x = b.input("b");
        let t = b.input("c");
        b.mct([Control::pos(a), Control::pos(x)], t);
        b.build().unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for method in Method::ALL {
            assert_eq!(method.name().parse::<Method>().unwrap(), method);
        }
        assert!("sideways".parse::<Method>().is_err());
    }

    #[test]
    fn transform_dispatches_and_reports_added_wires() {
        let c = toffoli_circuit();
        let online = transform(&c, Method::OnlineMct).unwrap();
        assert_eq!(online.check_line.as_deref(), Some("chk"));
        assert_eq!(online.parity_line.as_deref(), Some("par"));
        assert_eq!(online.test_line, None);

        let offline = transform(&c, Method::OfflineMct).unwrap();
        assert_eq!(offline.test_line.as_deref(), Some("tst"));
        assert_eq!(offline.check_line, None);

        let err = transform(
            &{
                let mut b = CircuitBuilder::new();
                let a = b.input("a");
                let x = b.input("b");
                b.mcf([], a, x);
                b.build().unwrap()
            },
            Method::OnlineMct,
        )
        .unwrap_err();
        assert!(err.to_string().contains("gate 1"));
    }

    #[test]
    fn provenance_detection_covers_all_three_cases() {
        let c = toffoli_circuit();
        assert!(matches!(detect_provenance(&c).unwrap(), Provenance::None));

        let online = transform(&c, Method::OnlineMctf).unwrap();
        match detect_provenance(&online.circuit).unwrap() {
            Provenance::Online(t) => assert_eq!(t.method(), OnlineMethod::MctfConverted),
            _ => panic!("expected a concurrent checker"),
        }

        let offline = transform(&c, Method::OfflineMctf).unwrap();
        match detect_provenance(&offline.circuit).unwrap() {
            Provenance::Offline(t) => assert_eq!(t.method(), OfflineMethod::MctfBlocking),
            _ => panic!("expected a blocking test mode"),
        }
    }

    #[test]
    fn annotated_grading_uses_the_designed_universe_and_rule() {
        let c = toffoli_circuit();
        let request = |kind, tests| GradeRequest {
            kind,
            multiplicity: Multiplicity::Single,
            tests,
            rule: None,
            options: EnumerateOptions::default(),
        };

        let online = transform(&c, Method::OnlineMct).unwrap();
        let outcome =
            grade_circuit(&online.circuit, &request(FaultKind::BitFlip, TestSource::Designed))
                .unwrap();
        assert!(outcome.designed_universe);
        assert_eq!(outcome.report.coverage, 1.0);
        assert!(matches!(outcome.rule, ResponseRule::CheckLineZero(_)));

        let offline = transform(&c, Method::OfflineMct).unwrap();
        let outcome =
            grade_circuit(&offline.circuit, &request(FaultKind::StuckAt, TestSource::Designed))
                .unwrap();
        assert!(outcome.designed_universe);
        assert_eq!(outcome.report.coverage, 1.0);
        assert_eq!(outcome.rule, ResponseRule::IdentityOutput);
        assert_eq!(outcome.tests.name, "gts");

        // multiple stuck-at sets also grade against the designed universe
        let outcome = grade_circuit(
            &offline.circuit,
            &GradeRequest {
                kind: FaultKind::StuckAt,
                multiplicity: Multiplicity::Multiple(2),
                tests: TestSource::Designed,
                rule: None,
                options: EnumerateOptions::default(),
            },
        )
        .unwrap();
        assert!(outcome.designed_universe);
        assert_eq!(outcome.report.coverage, 1.0, "{:?}", outcome.report.undetected.first());

        // a different fault kind falls back to raw enumeration
        let outcome =
            grade_circuit(&offline.circuit, &request(FaultKind::MissingGate, TestSource::Designed))
                .unwrap();
        assert!(!outcome.designed_universe);
    }

    #[test]
    fn unannotated_circuits_grade_with_plain_universes() {
        let c = toffoli_circuit();
        let outcome = grade_circuit(
            &c,
            &GradeRequest {
                kind: FaultKind::MissingGate,
                multiplicity: Multiplicity::Single,
                tests: TestSource::ExhaustiveGreedy,
                rule: None,
                options: EnumerateOptions::default(),
            },
        )
        .unwrap();
        assert!(!outcome.designed_universe);
        assert_eq!(outcome.rule, ResponseRule::CompareToFaultFree);
        assert_eq!(outcome.report.coverage, 1.0);

        let err = grade_circuit(
            &c,
            &GradeRequest {
                kind: FaultKind::StuckAt,
                multiplicity: Multiplicity::Single,
                tests: TestSource::Designed,
                rule: None,
                options: EnumerateOptions::default(),
            },
        )
        .unwrap_err();
        assert!(matches!(err, PipelineError::DesignedTestsNeedAnnotation));
    }

    #[test]
    fn rule_overrides_take_precedence() {
        let c = toffoli_circuit();
        let offline = transform(&c, Method::OfflineMct).unwrap();
        let outcome = grade_circuit(
            &offline.circuit,
            &GradeRequest {
                kind: FaultKind::StuckAt,
                multiplicity: Multiplicity::Single,
                tests: TestSource::Designed,
                rule: Some(ResponseRule::CompareToFaultFree),
                options: EnumerateOptions::default(),
            },
        )
        .unwrap();
        assert_eq!(outcome.rule, ResponseRule::CompareToFaultFree);
    }
}
