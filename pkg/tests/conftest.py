import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        parts = RESULTS[k]
        ok = all(p[1] for p in parts)
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}")
        for name, good, detail in parts:
            terminalreporter.write_line(f"    {name}: {'pass' if good else 'FAIL'} {detail}".rstrip())
