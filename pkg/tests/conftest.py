"""Shared fixtures: the reference two-switch model and a couple of tiny ones."""

from pathlib import Path

import pytest

from mcfsm.dsl import compile_model, parse

MODELS_DIR = Path(__file__).resolve().parent.parent / "models"

COMBO_PATH = MODELS_DIR / "combo_switches.mcfsm"

# A live coupling cycle: each machine's edge is captured by the other,
# so one external event cascades forever.
LOOP_SOURCE = """
FSM class "Flip" {
    hop a_b += xKick yTick
    hop b_a += xKick yTick
}

McFSM class "Loop" {
    Flip inst P {
        Start: a
        cap &xKick += ../xGo ../Q/yTick
    }
    Flip inst Q {
        Start: a
        cap &xKick += ../P/yTick
    }
}
"""

# Single machine capturing its own edge: the first hop drags the second along.
SOLO_SOURCE = """
FSM class "Chain" {
    hop a_b += xNext yStep
    hop b_c += xNext yStep
}

McFSM class "Solo" {
    Chain inst C {
        Start: a
        cap ../C/a_b += ../xNudge
        cap ../C/b_c += ../C/a_b
    }
}
"""

# One trigger fans out: A and B both react to xFire, C counts their edges.
FAN_SOURCE = """
FSM class "Emit" {
    hop idle_done += xFire yOut
    hop done_idle += xReset yBack
}

FSM class "Count" {
    hop c0_c1 += xBump
    hop c1_c2 += xBump
    hop c2_c0 += xBump
}

McFSM class "Fan" {
    Emit inst A {
        Start: idle
        cap &xFire  += ../xFire
        cap &xReset += ../xReset
    }
    Emit inst B {
        Start: idle
        cap &xFire  += ../xFire
        cap &xReset += ../xReset
    }
    Count inst C {
        Start: c0
        cap &xBump += ../A/yOut ../B/yOut
    }
}
"""


@pytest.fixture(scope="session")
def combo_source() -> str:
    return COMBO_PATH.read_text()


@pytest.fixture(scope="session")
def combo_model(combo_source):
    return compile_model(combo_source, "ComboSwitches", filename=str(COMBO_PATH))


@pytest.fixture(scope="session")
def combo_ast(combo_source):
    return parse(combo_source, filename=str(COMBO_PATH))


@pytest.fixture(scope="session")
def loop_model():
    return compile_model(LOOP_SOURCE, "Loop")


@pytest.fixture(scope="session")
def solo_model():
    return compile_model(SOLO_SOURCE, "Solo")


@pytest.fixture(scope="session")
def fan_model():
    return compile_model(FAN_SOURCE, "Fan")


# --------------------------------------------------------------- acceptance

# (name, passed, seconds), appended by the acceptance suite in run order
ACCEPTANCE_RESULTS: list[tuple[str, bool, float]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, passed, elapsed in ACCEPTANCE_RESULTS:
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"acceptance: {name} {verdict} ({elapsed:.2f}s)")
