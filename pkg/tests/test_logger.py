import json
import logging

from pytest import raises

from entlab.core.exceptions import BudgetExceededError
from entlab.core.logger import JSONFormatter, get_logger, log_execution_time


def make_record(**extra):
    record = logging.LogRecord("entlab.test", logging.INFO, __file__, 10, "Audit %s", ("delta",), None)
    for key, value in extra.items():
        setattr(record, key, value)
    return record


def test_formatter_merges_nested_extra():
    line = JSONFormatter().format(make_record(extra={"check": "delta", "passed": True}))
    payload = json.loads(line)
    assert payload["message"] == "Audit delta"
    assert payload["level"] == "INFO"
    assert payload["check"] == "delta"
    assert payload["passed"] is True


def test_get_logger_writes_once():
    first = get_logger("entlab.test.handlers")
    second = get_logger("entlab.test.handlers")
    assert first is second
    assert len(first.handlers) == 1
    assert not first.propagate


def test_execution_time_reraises():
    logger = get_logger("entlab.test.timing")

    @log_execution_time(logger)
    def exhausted():
        raise BudgetExceededError("too many labelings")

    with raises(BudgetExceededError):
        exhausted()
    assert exhausted.__name__ == "exhausted"
