import os

from hypothesis import HealthCheck, settings

from edgeprov.domain import EdgeDevice, EdgeNode, ResourceVector, Service

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=300,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def vec(p=0, s=0, m=0, n=0):
    return ResourceVector(p, s, m, n)


def device(dev_id="D", cap=(10, 10, 10, 10), rate=1.0, read=1.0, write=1.0, containers=None):
    return EdgeDevice(dev_id, vec(*cap), write_speed=write, read_speed=read, compute_rate=rate,
                      containers=containers or [])


def small_node(n=3, cap=(6400, 6400, 6400, 6400)):
    return EdgeNode("N", [device(f"D{i}", cap, rate=1000.0 * (i + 1), read=100.0, write=50.0)
                          for i in range(n)])


def small_service(sid="s", amounts=(640, 640, 640, 640)):
    return Service(sid, vec(*amounts))


# one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
