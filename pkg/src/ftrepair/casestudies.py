"""Built-in example models: a power grid with load switches, and a
pressure cooker with a failable vent."""
from __future__ import annotations

import numpy as np

from .core import Model, Predicate, Relation, StateSpace, UsageError


# ------------------------------------------------------------ smart grid
#
# Variables (in declaration order): generation capacity VG, sensed loads
# V1 and V2 (each 0..max), and two load switches w1, w2.  The controller
# should keep the switch settings consistent with the sensed loads:
# serve both loads when the capacity covers their sum, serve the one that
# fits when only one does (preferring the larger when either would fit on
# its own but not both), and shed both otherwise.  The environment updates
# the sensors at will; the program may only toggle switches, never sensors
# (variant "db"), and in variant "db2" it may not toggle both switches in
# one step.


def _grid_values(m: int):
    n = m * m * m * 4
    idx = np.arange(n)
    w2 = idx & 1
    w1 = (idx >> 1) & 1
    rest = idx >> 2
    v2 = rest % m
    rest //= m
    v1 = rest % m
    vg = rest // m
    return vg, v1, v2, w1.astype(bool), w2.astype(bool)


def _grid_invariant_mask(vg, v1, v2, w1, w2):
    both_fit = v1 + v2 <= vg
    only_1 = (v1 <= vg) & (v2 > vg)
    only_2 = (v1 > vg) & (v2 <= vg)
    neither = (v1 > vg) & (v2 > vg)
    one_of_two = (v1 + v2 > vg) & (v1 <= vg) & (v2 <= vg)
    return (
        (both_fit & w1 & w2)
        | (only_1 & w1 & ~w2)
        | (only_2 & ~w1 & w2)
        | (neither & ~w1 & ~w2)
        | (one_of_two & (v1 <= v2) & ~w1 & w2)
        | (one_of_two & (v1 > v2) & w1 & ~w2)
    )


def smart_grid_model(max_value: int, variant: str = "db", k: int = 2) -> Model:
    """The load-switch grid over sensor domain ``0..max_value``."""
    if max_value < 1:
        raise UsageError("max_value must be at least 1")
    if variant not in ("db", "db2"):
        raise UsageError(f"unknown variant {variant!r}")
    m = max_value + 1
    n = m * m * m * 4
    vg, v1, v2, w1, w2 = _grid_values(m)
    space = StateSpace(
        n,
        tuple(
            f"VG={vg[i]},V1={v1[i]},V2={v2[i]},"
            f"w1={'true' if w1[i] else 'false'},w2={'true' if w2[i] else 'false'}"
            for i in range(n)
        ),
    )
    invariant = Predicate(space, _grid_invariant_mask(vg, v1, v2, w1, w2))

    sensor_id = np.arange(n) >> 2  # states share it iff all sensors agree
    switch_id = np.arange(n) & 3

    chunk = max(1, (1 << 22) // n)

    def rows(predicate_on_pair):
        for lo in range(0, n, chunk):
            yield predicate_on_pair(slice(lo, min(lo + chunk, n)))

    delta_e = Relation.from_row_chunks(
        space, rows(lambda rs: switch_id[rs][:, None] == switch_id[None, :])
    )
    if variant == "db":
        bad = lambda rs: sensor_id[rs][:, None] != sensor_id[None, :]
    else:
        w1i = w1.astype(np.int8)
        w2i = w2.astype(np.int8)
        bad = lambda rs: (sensor_id[rs][:, None] != sensor_id[None, :]) | (
            (w1i[rs][:, None] != w1i[None, :]) & (w2i[rs][:, None] != w2i[None, :])
        )
    delta_b = Relation.from_row_chunks(space, rows(bad))
    empty = Relation.empty(space)
    return Model(space, empty, delta_e, delta_b, empty, empty, invariant, k)


def smart_grid_text(max_value: int, variant: str = "db", k: int = 2) -> str:
    """The same grid, as a model file."""
    if variant not in ("db", "db2"):
        raise UsageError(f"unknown variant {variant!r}")
    db2_clause = "\n    (w1' != w1) && (w2' != w2);" if variant == "db2" else ""
    return f"""\
// Power grid with two load switches.  The environment updates the three
// sensors (switch-preserving transitions); the program may only change
// the switches{' and never both at once' if variant == 'db2' else ''}.
model smart_grid_{variant} {{
  var VG: 0..{max_value};
  var V1: 0..{max_value};
  var V2: 0..{max_value};
  var w1: bool;
  var w2: bool;
  invariant:
    ((V1 + V2 <= VG) && (w1 && w2))
    || ((V1 <= VG && V2 > VG) && (w1 && !w2))
    || ((V1 > VG && V2 <= VG) && (!w1 && w2))
    || ((V1 > VG && V2 > VG) && (!w1 && !w2))
    || ((V1 + V2 > VG && V1 <= VG && V2 <= VG && V1 <= V2) && (!w1 && w2))
    || ((V1 + V2 > VG && V1 <= VG && V2 <= VG && V1 > V2) && (w1 && !w2));
  program {{}}
  environment {{
    (w1' == w1) && (w2' == w2);
  }}
  bad {{
    (VG' != VG) || (V1' != V1) || (V2' != V2);{db2_clause}
  }}
  restricted {{}}
  faults {{}}
  k: {k};
}}
"""


# -------------------------------------------------------- pressure cooker
#
# Pressure ranges over 0..6; the vent (when working) releases pressure at
# levels 4 and 5, an overpressure valve drops level 6 down to 3, and the
# heat source raises the pressure.  A fault breaks the vent for good.
# The goal: from anywhere, reach pressure below 4.


def pressure_cooker_model(k: int = 3, with_valve: bool = True) -> Model:
    n = 14  # pressure 0..6, vent ok/broken
    sid = lambda p, ok: p * 2 + (1 if ok else 0)
    labels = tuple(
        f"p={p},vent={'ok' if ok else 'broken'}"
        for p in range(7)
        for ok in (False, True)
    )
    space = StateSpace(n, labels)
    prog = []
    for ok in (False, True):
        if ok:
            prog += [(sid(4, ok), sid(3, ok)), (sid(5, ok), sid(4, ok))]
        if with_valve:
            prog.append((sid(6, ok), sid(3, ok)))
    env = []
    for ok in (False, True):
        env += [(sid(4, ok), sid(5, ok)), (sid(5, ok), sid(6, ok)), (sid(6, ok), sid(6, ok))]
    faults = [(sid(p, True), sid(p, False)) for p in range(7)]
    empty = Relation.empty(space)
    return Model(
        space,
        Relation.from_pairs(space, prog),
        Relation.from_pairs(space, env),
        empty,
        empty,
        Relation.from_pairs(space, faults),
        Predicate.from_ids(space, [sid(p, ok) for p in range(4) for ok in (False, True)]),
        k,
    )


def pressure_cooker_text(k: int = 3) -> str:
    return f"""\
// Pressure cooker: heat raises the pressure, the vent (while it works)
// releases it at levels 4 and 5, and the overpressure valve dumps level 6
// down to 3.  A fault breaks the vent permanently.  Goal: from any state,
// the pressure drops below 4.
model pressure_cooker {{
  var p: 0..6;
  var vent_ok: bool;
  invariant: p <= 3;
  program {{
    vent_ok && (p == 4 || p == 5) && (p' == p - 1) && (vent_ok' == vent_ok);
    (p == 6) && (p' == 3) && (vent_ok' == vent_ok);
  }}
  environment {{
    (p >= 4 && p <= 5) && (p' == p + 1) && (vent_ok' == vent_ok);
    (p == 6) && (p' == 6) && (vent_ok' == vent_ok);
  }}
  bad {{}}
  restricted {{}}
  faults {{
    vent_ok && !vent_ok' && (p' == p);
  }}
  k: {k};
}}
"""
