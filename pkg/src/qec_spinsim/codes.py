"""Static definitions of the surface-17 and BS-17 codes and their decoders.

Both codes live on the same 3x3 data-qubit grid (qubit q sits at row q//3,
column q%3).  The Bacon-Shor spec additionally carries the parity map that
rebuilds its weight-6 stabilizer outcomes from the surface-code outcomes,
plus the weight-2 gauge generators used for residual-error classification.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .tableau import PauliString

N_DATA = 9


@dataclass(frozen=True)
class Syndrome:
    """Stabilizer outcomes as +-1 tuples, X block then Z block."""

    x_bits: tuple[int, ...]
    z_bits: tuple[int, ...]

    def __post_init__(self):
        if not all(b in (1, -1) for b in self.x_bits + self.z_bits):
            raise ValueError("syndrome entries must be +-1")

    @property
    def trivial(self) -> bool:
        return all(b == 1 for b in self.x_bits + self.z_bits)


def syndrome_key(bits: tuple[int, ...]) -> tuple[int, ...]:
    """Lookup keying: outcome -1 maps to bit 1."""
    return tuple(0 if b == 1 else 1 for b in bits)


@dataclass(frozen=True)
class CodeSpec:
    name: str
    n_data: int
    x_stabilizers: tuple[PauliString, ...]
    z_stabilizers: tuple[PauliString, ...]
    logical_x: PauliString
    logical_z: PauliString
    x_lookup: dict[tuple[int, ...], PauliString]
    z_lookup: dict[tuple[int, ...], PauliString]
    # BS only: surface-stabilizer indices whose outcomes multiply to each
    # weight-6 stabilizer, and the weight-2 gauge generators.
    x_parity_map: tuple[tuple[int, ...], ...] | None = None
    z_parity_map: tuple[tuple[int, ...], ...] | None = None
    gauge_generators: tuple[PauliString, ...] = field(default_factory=tuple)

    def __post_init__(self):
        gens = self.x_stabilizers + self.z_stabilizers
        for a in gens:
            for b in gens:
                if not a.commutes_with(b):
                    raise ValueError(f"stabilizers {a.label()} and {b.label()} anticommute")
        for log in (self.logical_x, self.logical_z):
            for g in gens:
                if not log.commutes_with(g):
                    raise ValueError(f"logical {log.label()} anticommutes with {g.label()}")
        if self.logical_x.commutes_with(self.logical_z):
            raise ValueError("logical X and Z must anticommute")
        _check_lookup(self.x_lookup, self.x_stabilizers)
        _check_lookup(self.z_lookup, self.z_stabilizers)

    def stabilizer_generators(self) -> tuple[PauliString, ...]:
        return self.x_stabilizers + self.z_stabilizers


def _check_lookup(table: dict, generators: tuple[PauliString, ...]):
    """Each correction must reproduce the syndrome key it is filed under."""
    for key, corr in table.items():
        if len(key) != len(generators):
            raise ValueError("lookup key length mismatch")
        pattern = tuple(0 if corr.commutes_with(g) else 1 for g in generators)
        if pattern != key:
            raise ValueError(
                f"lookup entry {key} -> {corr.label()} has syndrome {pattern}")


def _p(label: str) -> PauliString:
    return PauliString.from_label(N_DATA, label)


def _table(generator_count: int, rows: dict[tuple[int, ...], str]):
    out = {}
    for signs, label in rows.items():
        out[syndrome_key(signs)] = _p(label)
    if len(out) != 2 ** generator_count:
        raise ValueError("lookup table is not total")
    return out


# Appendix lookup tables; keys are stabilizer outcomes in generator order.
_SURFACE_X_TABLE = {
    (+1, +1, +1, +1): "I",
    (+1, +1, +1, -1): "Z6",
    (+1, +1, -1, +1): "Z5",
    (+1, +1, -1, -1): "Z7",
    (+1, -1, +1, +1): "Z0",
    (+1, -1, +1, -1): "Z3Z6",
    (+1, -1, -1, +1): "Z4",
    (+1, -1, -1, -1): "Z4Z6",
    (-1, +1, +1, +1): "Z2",
    (-1, +1, +1, -1): "Z2Z6",
    (-1, +1, -1, +1): "Z2Z5",
    (-1, +1, -1, -1): "Z2Z7",
    (-1, -1, +1, +1): "Z1",
    (-1, -1, +1, -1): "Z1Z6",
    (-1, -1, -1, +1): "Z2Z4",
    (-1, -1, -1, -1): "Z1Z7",
}

_SURFACE_Z_TABLE = {
    (+1, +1, +1, +1): "I",
    (+1, +1, +1, -1): "X8",
    (+1, +1, -1, +1): "X6",
    (+1, +1, -1, -1): "X7X8",
    (+1, -1, +1, +1): "X1",
    (+1, -1, +1, -1): "X5",
    (+1, -1, -1, +1): "X4",
    (+1, -1, -1, -1): "X4X8",
    (-1, +1, +1, +1): "X0",
    (-1, +1, +1, -1): "X0X8",
    (-1, +1, -1, +1): "X3",
    (-1, +1, -1, -1): "X3X8",
    (-1, -1, +1, +1): "X0X1",
    (-1, -1, +1, -1): "X0X5",
    (-1, -1, -1, +1): "X0X4",
    (-1, -1, -1, -1): "X3X5",
}

_BS_X_TABLE = {
    (+1, +1): "I",
    (+1, -1): "Z2",
    (-1, +1): "Z0",
    (-1, -1): "Z1",
}

_BS_Z_TABLE = {
    (+1, +1): "I",
    (+1, -1): "X6",
    (-1, +1): "X0",
    (-1, -1): "X3",
}


@lru_cache(maxsize=1)
def surface17_spec() -> CodeSpec:
    return CodeSpec(
        name="surface17",
        n_data=N_DATA,
        x_stabilizers=(_p("X1X2"), _p("X0X1X3X4"), _p("X4X5X7X8"), _p("X6X7")),
        z_stabilizers=(_p("Z0Z3"), _p("Z1Z2Z4Z5"), _p("Z3Z4Z6Z7"), _p("Z5Z8")),
        logical_x=_p("X0X3X6"),
        logical_z=_p("Z0Z1Z2"),
        x_lookup=_table(4, _SURFACE_X_TABLE),
        z_lookup=_table(4, _SURFACE_Z_TABLE),
    )


@lru_cache(maxsize=1)
def bs17_spec() -> CodeSpec:
    surface = surface17_spec()
    x_stabs = (_p("X0X1X3X4X6X7"), _p("X1X2X4X5X7X8"))
    z_stabs = (_p("Z0Z3Z1Z4Z2Z5"), _p("Z3Z6Z4Z7Z5Z8"))
    x_map = tuple(_decompose_over(s, surface.x_stabilizers) for s in x_stabs)
    z_map = tuple(_decompose_over(s, surface.z_stabilizers) for s in z_stabs)
    # weight-2 gauge generators: XX on horizontal neighbours, ZZ on vertical
    gauge = tuple(_p(f"X{q}X{q + 1}") for q in (0, 1, 3, 4, 6, 7)) + tuple(
        _p(f"Z{q}Z{q + 3}") for q in range(6))
    return CodeSpec(
        name="bs17",
        n_data=N_DATA,
        x_stabilizers=x_stabs,
        z_stabilizers=z_stabs,
        logical_x=_p("X0X3X6"),
        logical_z=_p("Z0Z1Z2"),
        x_lookup=_table(2, _BS_X_TABLE),
        z_lookup=_table(2, _BS_Z_TABLE),
        x_parity_map=x_map,
        z_parity_map=z_map,
        gauge_generators=gauge,
    )


def _decompose_over(target: PauliString, basis: tuple[PauliString, ...]) -> tuple[int, ...]:
    """Indices of basis generators whose product equals target (GF(2) solve)."""
    vec = target.x_mask | (target.z_mask << target.n)
    rows = [p.x_mask | (p.z_mask << p.n) for p in basis]
    for combo in range(1 << len(basis)):
        acc = 0
        for i in range(len(basis)):
            if (combo >> i) & 1:
                acc ^= rows[i]
        if acc == vec:
            return tuple(i for i in range(len(basis)) if (combo >> i) & 1)
    raise ValueError(f"{target.label()} is not a product of the given generators")


def decode(code: CodeSpec, syndrome: Syndrome) -> PauliString:
    """Lookup-table correction; X and Z errors are decoded independently."""
    if len(syndrome.x_bits) != len(code.x_stabilizers) or len(
            syndrome.z_bits) != len(code.z_stabilizers):
        raise ValueError("syndrome length does not match the code")
    cz = code.x_lookup[syndrome_key(syndrome.x_bits)]
    cx = code.z_lookup[syndrome_key(syndrome.z_bits)]
    # corrections are applied as Pauli frame updates: global phase dropped
    return PauliString(code.n_data, cz.x_mask ^ cx.x_mask, cz.z_mask ^ cx.z_mask)


def bs_syndrome_from_surface(code: CodeSpec, surface_syndrome: Syndrome) -> Syndrome:
    """BS stabilizer outcomes as products of their constituent surface outcomes."""
    if code.x_parity_map is None or code.z_parity_map is None:
        raise ValueError("code carries no gauge parity map")
    x_bits = tuple(
        _prod(surface_syndrome.x_bits[i] for i in group) for group in code.x_parity_map)
    z_bits = tuple(
        _prod(surface_syndrome.z_bits[i] for i in group) for group in code.z_parity_map)
    return Syndrome(x_bits, z_bits)


def _prod(values) -> int:
    out = 1
    for v in values:
        out *= v
    return out


def in_group(generators: tuple[PauliString, ...], p: PauliString) -> bool:
    """GF(2) span membership of p's X/Z vector (signs ignored)."""
    n = p.n
    vec = p.x_mask | (p.z_mask << n)
    pivots = []
    for g in generators:
        row = g.x_mask | (g.z_mask << n)
        for piv in pivots:
            row = min(row, row ^ piv)
        if row:
            pivots.append(row)
    pivots.sort(reverse=True)
    for piv in pivots:
        vec = min(vec, vec ^ piv)
    return vec == 0


def residual_is_trivial(code: CodeSpec, residual: PauliString) -> bool:
    """Stabilizer-group membership (surface) or gauge-group membership (BS)."""
    gens = code.stabilizer_generators() + code.gauge_generators
    return in_group(gens, residual)


def format_code_spec(code: CodeSpec) -> str:
    """Human-readable dump of generators, logicals, and lookup tables."""
    lines = [f"code {code.name} on {code.n_data} data qubits"]
    for tag, gens in (("X", code.x_stabilizers), ("Z", code.z_stabilizers)):
        for i, g in enumerate(gens, start=1):
            lines.append(f"S_{tag}({i}) = {g.label()[1:]}")
    lines.append(f"logical X = {code.logical_x.label()[1:]}")
    lines.append(f"logical Z = {code.logical_z.label()[1:]}")
    for tag, table in (("X", code.x_lookup), ("Z", code.z_lookup)):
        lines.append(f"{tag}-stabilizer lookup:")
        for key in sorted(table):
            signs = " ".join("-1" if b else "+1" for b in key)
            lines.append(f"  {signs} -> {table[key].label()[1:]}")
    if code.x_parity_map is not None:
        for tag, groups in (("X", code.x_parity_map), ("Z", code.z_parity_map)):
            for i, group in enumerate(groups, start=1):
                members = " * ".join(f"surface S_{tag}({j + 1})" for j in group)
                lines.append(f"S_{tag}({i}) outcome = {members}")
    return "\n".join(lines) + "\n"
