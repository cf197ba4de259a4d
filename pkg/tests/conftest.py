import os
import sys

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", ()))
            if rep.when == "call" and "criterion" in props:
                lines.append((props["criterion"], outcome.upper()[:4], props.get("detail", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for label, verdict, detail in sorted(lines, key=lambda x: _order(x[0])):
            terminalreporter.write_line(f"{verdict:4}  {label}  {detail}")


def _order(label):
    head = label.split()[0].strip("#").rstrip(":")
    digits = "".join(ch for ch in head if ch.isdigit())
    return (int(digits) if digits else 99, label)
