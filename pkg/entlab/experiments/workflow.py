"""LangGraph workflow that chains every audit suite into the full run."""
from typing import Callable, Dict, TypedDict

import pandas as pd
from langgraph.graph import END, StateGraph

from entlab.core.exceptions import EntlabError
from entlab.core.logger import get_logger, log_execution_time
from entlab.experiments.suites import SUITES, SuiteResult

logger = get_logger(__name__)


class WorkflowState(TypedDict):
    """State for the full-suite workflow."""
    seed: int
    jobs: int
    results: Dict[str, SuiteResult]
    errors: Dict[str, str]


def make_suite_node(name: str) -> Callable[[WorkflowState], WorkflowState]:
    """Node that runs one suite and records either its result or its error."""
    suite = SUITES[name]

    def node(state: WorkflowState) -> WorkflowState:
        try:
            state["results"][name] = suite(state["seed"], state["jobs"])
        except EntlabError as e:
            logger.error(f"Error in {name} node: {e}")
            state["errors"][name] = f"{type(e).__name__}: {e}"
            state["results"][name] = SuiteResult(name, checks={"completed": False})
        return state

    node.__name__ = f"{name.replace('-', '_')}_node"
    return node


# Build the graph
workflow = StateGraph(WorkflowState)

names = list(SUITES)
for suite_name in names:
    workflow.add_node(suite_name, make_suite_node(suite_name))

workflow.set_entry_point(names[0])
for current, following in zip(names, names[1:]):
    workflow.add_edge(current, following)
workflow.add_edge(names[-1], END)

# Compile the graph
app = workflow.compile()


@log_execution_time(logger)
def run_full_suite(seed: int, jobs: int = 1) -> SuiteResult:
    """
    Run every suite in a fixed order and merge their outcomes.

    Metric and check names are prefixed with the suite name; a suite that
    raised contributes a failed ``completed`` check and its error text.
    """
    final = app.invoke({"seed": seed, "jobs": jobs, "results": {}, "errors": {}})
    merged = SuiteResult("full-suite")
    rows = []
    for name in names:
        result = final["results"][name]
        for key, value in result.metrics.items():
            merged.metrics[f"{name}.{key}"] = value
        for key, passed in result.checks.items():
            merged.checks[f"{name}.{key}"] = passed
            rows.append({"suite": name, "check": key, "passed": passed})
        if name in final["errors"]:
            merged.metrics[f"{name}.error"] = final["errors"][name]
    merged.table = pd.DataFrame(rows, columns=["suite", "check", "passed"])
    return merged
