import pytest

from noma_secrecy import montecarlo as mc
from noma_secrecy.config import SicMode, SystemConfig, validate_config

FULL_DROPS = 100_000
REDUCED_DROPS = 20_000
MC_SEED = 20240611

_ACCEPTANCE_LINES: list[str] = []


def record(line: str) -> None:
    """Acceptance result line, echoed in the terminal summary."""
    print(line)
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def baseline(K: int, sic: str, **over) -> SystemConfig:
    mode = SicMode.perfect() if sic == "psic" else SicMode.imperfect(1.0)
    return validate_config(SystemConfig(K=K, sic=mode, **over))


CASES = [(2, "psic"), (2, "ipsic"), (1, "psic"), (1, "ipsic")]


@pytest.fixture(scope="session")
def batches():
    """10^5 simulated drops per (K, SIC) case, shared by every test."""
    return {case: mc.simulate(baseline(*case), FULL_DROPS, MC_SEED) for case in CASES}
