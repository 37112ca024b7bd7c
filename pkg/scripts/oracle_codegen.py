"""Pre-test oracle run for the codegen module."""

import random
import subprocess
import tempfile
from pathlib import Path

from mcfsm.analysis import expand_product, generate_switch_family
from mcfsm.codegen import emit_source, emit_table, event_index, parse_table
from mcfsm.dsl import compile_model
from mcfsm.model import initial_state
from mcfsm.runtime import macro_step, run_sequence

combo = compile_model(Path("models/combo_switches.mcfsm").read_text(), "ComboSwitches")

table = emit_table(combo)
print("=== combo table ===")
print(table.decode())
assert emit_table(combo) == table, "not deterministic"

back = parse_table(table)
assert back.name == combo.name
assert back.external_events == combo.external_events
assert back.dispatch_order == combo.dispatch_order
rng = random.Random(17)
events = [rng.choice(["xPressS1", "xPressS2"]) for _ in range(100)]
f1, t1 = run_sequence(combo, initial_state(combo), events)
f2, t2 = run_sequence(back, initial_state(back), events)
assert f1 == f2
assert all(a.fired_edges == b.fired_edges for a, b in zip(t1, t2))
print("round-trip: traces equal over 100 events")

# --- C backend ---
HARNESS = r"""
#include <stdio.h>
#include "model.c"

int main(void)
{
    uint16_t state[MCFSM_N_MACHINES];
    unsigned v, i;
    int rc;
    for (;;) {
        for (i = 0; i < MCFSM_N_MACHINES; i++) {
            if (scanf("%u", &v) != 1) return 0;
            state[i] = (uint16_t)v;
        }
        if (scanf("%u", &v) != 1) return 0;
        rc = mcfsm_step(state, (uint16_t)v);
        printf("%d", rc);
        for (i = 0; i < MCFSM_N_MACHINES; i++) printf(" %u", state[i]);
        printf("\n");
    }
}
"""


def drive(model, lines):
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        (tmp / "model.c").write_text(emit_source(model, "c"))
        (tmp / "harness.c").write_text(HARNESS)
        subprocess.run(
            ["gcc", "-std=c99", "-Wall", "-Wextra", "-Werror", "-O2",
             "-o", str(tmp / "harness"), str(tmp / "harness.c")],
            check=True,
        )
        proc = subprocess.run(
            [str(tmp / "harness")], input="\n".join(lines) + "\n",
            capture_output=True, text=True, check=True,
        )
    return proc.stdout.splitlines()


def sid_maps(model):
    return [
        ({s.name: i for i, s in enumerate(m.states)},
         [s.name for s in m.states])
        for m in model.machines
    ]


# exhaustive differential on the reference model
product = expand_product(combo)
index = event_index(combo)
maps = sid_maps(combo)
lines, expected = [], []
for state in product.states:
    assign = state.assignment()
    sids = [maps[i][0][assign[m.instance_path]] for i, m in enumerate(combo.machines)]
    for ext in combo.external_events:
        lines.append(" ".join(map(str, sids + [index[ext]])))
        post = product.transitions[(state, ext)].assignment()
        post_sids = [maps[i][0][post[m.instance_path]] for i, m in enumerate(combo.machines)]
        _, trace = macro_step(combo, state, ext)
        expected.append(" ".join(map(str, [trace.step_count] + post_sids)))
out = drive(combo, lines)
assert out == expected, f"combo divergence:\n{out[:4]}\nvs\n{expected[:4]}"
print(f"combo exhaustive differential: {len(lines)} cases agree")

# fuzz the (3,3) family
fam = generate_switch_family(3, 3)
index = event_index(fam)
maps = sid_maps(fam)
rng = random.Random(2026)
state = initial_state(fam)
lines, expected = [], []
for _ in range(10_000):
    ext = f"/SwitchBank/xPressS{rng.randint(1, 3)}"
    assign = state.assignment()
    sids = [maps[i][0][assign[m.instance_path]] for i, m in enumerate(fam.machines)]
    lines.append(" ".join(map(str, sids + [index[ext]])))
    state, trace = macro_step(fam, state, ext)
    post = state.assignment()
    post_sids = [maps[i][0][post[m.instance_path]] for i, m in enumerate(fam.machines)]
    expected.append(" ".join(map(str, [trace.step_count] + post_sids)))
out = drive(fam, lines)
assert out == expected
print("family(3,3) differential fuzz: 10000 steps agree")

# overflow in C: loop model
LOOP = Path("tests/conftest.py")  # reuse source text
import tests.conftest as cf  # noqa: E402

loop = compile_model(cf.LOOP_SOURCE, "Loop")
index = event_index(loop)
out = drive(loop, ["0 0 " + str(index["/Loop/xGo"])])
print("loop overflow rc:", out[0])
assert out[0].startswith("-1 ")

out = drive(combo, ["0 0 0 99"])
print("bad event rc:", out[0])
assert out[0] == "-2 0 0 0"
print("ALL CODEGEN ORACLES OK")
