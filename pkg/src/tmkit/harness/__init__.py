from tmkit.harness.oracle import Oracle, OracleError, compile_oracle
from tmkit.harness.runner import (
    CaseFailure,
    ValidationReport,
    chain_scenarios,
    check_scenario,
    run_all,
    run_scenario,
)
from tmkit.harness.scenario import (
    Assertion,
    AttrCheck,
    InjectionTemplate,
    IntRange,
    Multisets,
    OutputSpec,
    Scenario,
    StoreItems,
    UnboundedGenerator,
    UpstreamOutput,
    ValueSet,
    enumerate_inputs,
)

__all__ = [
    "Assertion", "AttrCheck", "CaseFailure", "InjectionTemplate", "IntRange", "Multisets", "Oracle",
    "OracleError", "OutputSpec", "Scenario", "StoreItems", "UnboundedGenerator", "UpstreamOutput",
    "ValidationReport", "ValueSet", "chain_scenarios", "check_scenario", "compile_oracle",
    "enumerate_inputs", "run_all", "run_scenario",
]
