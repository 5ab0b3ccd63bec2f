"""Timed QEC circuits, the adaptive protocols, and the noise-free EC oracle.

Qubit layout: data qubits 0-8 on the 3x3 grid (qubit q at row q//3, column
q%3), X-check ancillas 9-12 and Z-check ancillas 13-16 in generator order.
All syndrome extraction runs the same gate sequence for both codes; only the
classical decoding differs.

The CZ schedule walks weight-4 X checks row-major (NW, NE, SW, SE) and Z
checks column-major (NW, SW, NE, SE); boundary weight-2 checks occupy the
timesteps of their surviving corners.  This keeps ancilla hook errors
perpendicular to the matching logical operator, which the exhaustive
single-fault suite verifies behaviourally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import CodeSpec, Syndrome, bs_syndrome_from_surface, decode, surface17_spec
from .noise import NoiseParams, fault_probabilities
from .tableau import PauliString, StabilizerTableau, new_tableau

N_QUBITS = 17
DATA_QUBITS = tuple(range(9))
X_ANCILLAS = (9, 10, 11, 12)
Z_ANCILLAS = (13, 14, 15, 16)
ANCILLAS = X_ANCILLAS + Z_ANCILLAS

# (timestep, data qubit) per check, in generator order
_X_SCHEDULE = (
    ((2, 1), (3, 2)),                    # S_X(1) = X1X2
    ((0, 0), (1, 1), (2, 3), (3, 4)),    # S_X(2)
    ((0, 4), (1, 5), (2, 7), (3, 8)),    # S_X(3)
    ((0, 6), (1, 7)),                    # S_X(4) = X6X7
)
_Z_SCHEDULE = (
    ((2, 0), (3, 3)),                    # S_Z(1) = Z0Z3
    ((0, 1), (1, 4), (2, 2), (3, 5)),    # S_Z(2)
    ((0, 3), (1, 6), (2, 4), (3, 7)),    # S_Z(3)
    ((0, 5), (1, 8)),                    # S_Z(4) = Z5Z8
)

# GHZ trios along the code columns; entangling steps middle-up then middle-down
_GHZ_TRIOS = ((0, 3, 6), (1, 4, 7), (2, 5, 8))


@dataclass(frozen=True)
class PrepLayer:
    targets: tuple[int, ...]
    duration: float


@dataclass(frozen=True)
class RotationLayer:
    rotations: tuple[tuple[int, int], ...]  # (qubit, +-1) for RY(+-pi/2)
    duration: float = 0.0


@dataclass(frozen=True)
class CzLayer:
    pairs: tuple[tuple[int, int], ...]
    duration: float


@dataclass(frozen=True)
class MeasureLayer:
    targets: tuple[int, ...]
    duration: float


Layer = PrepLayer | RotationLayer | CzLayer | MeasureLayer


def _layer_qubits(layer: Layer) -> tuple[int, ...]:
    if isinstance(layer, RotationLayer):
        return tuple(q for q, _ in layer.rotations)
    if isinstance(layer, CzLayer):
        return tuple(q for pair in layer.pairs for q in pair)
    return layer.targets


@dataclass(frozen=True)
class FaultLocation:
    """One potential fault: category, anchor layer, target(s), induced Pauli."""

    category: int
    layer: int
    qubits: tuple[int, ...]
    pauli: str          # "X", "Y", "Z", or "ZZ"
    duration: float = 0.0   # idle categories: the layer duration

    def pauli_string(self, n: int = N_QUBITS) -> PauliString:
        x = z = 0
        if self.pauli == "X":
            x = 1 << self.qubits[0]
        elif self.pauli == "Y":
            x = z = 1 << self.qubits[0]
        elif self.pauli == "Z":
            z = 1 << self.qubits[0]
        elif self.pauli == "ZZ":
            z = (1 << self.qubits[0]) | (1 << self.qubits[1])
        else:
            raise ValueError(f"unknown fault pauli {self.pauli!r}")
        return PauliString(n, x, z)


_CATEGORY_PAULI = {1: "X", 2: "X", 3: "Y", 4: "ZZ", 5: "Z", 6: "Z", 7: "Z", 8: "Z"}


@dataclass(frozen=True)
class Circuit:
    """A timed layer schedule plus its enumerated fault locations."""

    n_qubits: int
    layers: tuple[Layer, ...]
    encoding: str
    gate_params: str  # "ancilla" for syndrome extraction, "data" for the GHZ prep
    locations: tuple[FaultLocation, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for layer in self.layers:
            qubits = _layer_qubits(layer)
            if len(set(qubits)) != len(qubits):
                raise ValueError(f"layer touches a qubit twice: {layer}")
            if any(not 0 <= q < self.n_qubits for q in qubits):
                raise ValueError("layer target out of range")

    def duration(self) -> float:
        return float(np.sum([layer.duration for layer in self.layers]))

    def idle_durations(self) -> dict[int, set[float]]:
        out: dict[int, set[float]] = {c: set() for c in (5, 6, 7, 8)}
        for loc in self.locations:
            if loc.category >= 5:
                out[loc.category].add(loc.duration)
        return out

    def cz_count(self) -> int:
        return sum(len(layer.pairs) for layer in self.layers
                   if isinstance(layer, CzLayer))


def enumerate_fault_locations(circuit_layers: tuple[Layer, ...],
                              layer_offset: int = 0) -> tuple[FaultLocation, ...]:
    """All potential fault locations of a layer schedule.

    Ancillas count as idle between their preparation and measurement; data
    qubits count as idle in every timed layer that does not act on them.
    """
    locations: list[FaultLocation] = []
    active_ancillas: set[int] = set()
    for i, layer in enumerate(circuit_layers):
        idx = layer_offset + i
        if isinstance(layer, PrepLayer):
            for q in layer.targets:
                locations.append(FaultLocation(1, idx, (q,), "X"))
            active_ancillas |= set(layer.targets) - set(DATA_QUBITS)
            for q in DATA_QUBITS:
                if q not in layer.targets:
                    locations.append(FaultLocation(5, idx, (q,), "Z", layer.duration))
        elif isinstance(layer, RotationLayer):
            for q, _ in layer.rotations:
                locations.append(FaultLocation(3, idx, (q,), "Y"))
        elif isinstance(layer, CzLayer):
            busy = set(_layer_qubits(layer))
            for pair in layer.pairs:
                locations.append(FaultLocation(4, idx, pair, "ZZ"))
            for q in DATA_QUBITS:
                if q not in busy:
                    locations.append(FaultLocation(7, idx, (q,), "Z", layer.duration))
            for q in sorted(active_ancillas - busy):
                locations.append(FaultLocation(8, idx, (q,), "Z", layer.duration))
        elif isinstance(layer, MeasureLayer):
            for q in layer.targets:
                locations.append(FaultLocation(2, idx, (q,), "X"))
            for q in DATA_QUBITS:
                if q not in layer.targets:
                    locations.append(FaultLocation(6, idx, (q,), "Z", layer.duration))
            active_ancillas -= set(layer.targets)
    return tuple(locations)


def location_counts(locations) -> tuple[int, ...]:
    counts = [0] * 8
    for loc in locations:
        counts[loc.category - 1] += 1
    return tuple(counts)


# -- circuit builders ---------------------------------------------------------

def _t_cz(params: NoiseParams) -> float:
    if params.data.t_cz != params.ancilla.t_cz:
        raise ValueError("data and ancilla CZ durations must agree")
    return params.data.t_cz


def _cz_layers(schedule, ancillas, t_cz) -> list[CzLayer]:
    layers = []
    for step in range(4):
        pairs = tuple((ancillas[i], q) for i, legs in enumerate(schedule)
                      for (ts, q) in legs if ts == step)
        layers.append(CzLayer(pairs, t_cz))
    return layers


def build_round(encoding: str, params: NoiseParams) -> Circuit:
    """One full QEC round measuring all eight surface-code checks.

    X checks run in CZ timesteps 1-4 with the data rotated into the Z basis,
    Z checks in timesteps 5-8; all eight ancillas are read out together.
    """
    t_cz = _t_cz(params)
    layers: list[Layer] = [
        PrepLayer(ANCILLAS, params.ancilla.t_prep),
        RotationLayer(tuple((q, -1) for q in DATA_QUBITS + ANCILLAS)),
        *_cz_layers(_X_SCHEDULE, X_ANCILLAS, t_cz),
        RotationLayer(tuple((q, +1) for q in DATA_QUBITS)),
        *_cz_layers(_Z_SCHEDULE, Z_ANCILLAS, t_cz),
        RotationLayer(tuple((q, +1) for q in ANCILLAS)),
        MeasureLayer(ANCILLAS, params.ancilla.t_readout),
    ]
    layers = tuple(layers)
    return Circuit(N_QUBITS, layers, encoding, "ancilla",
                   enumerate_fault_locations(layers))


def build_half_round(kind: str, encoding: str, params: NoiseParams) -> Circuit:
    """A Z-only or X-only check round used by the projective state preparation."""
    t_cz = _t_cz(params)
    if kind == "z":
        ancillas, schedule = Z_ANCILLAS, _Z_SCHEDULE
        pre = RotationLayer(tuple((a, -1) for a in ancillas))
        post = RotationLayer(tuple((a, +1) for a in ancillas))
    elif kind == "x":
        ancillas, schedule = X_ANCILLAS, _X_SCHEDULE
        pre = RotationLayer(tuple((q, -1) for q in DATA_QUBITS + ancillas))
        post = RotationLayer(tuple((q, +1) for q in DATA_QUBITS + ancillas))
    else:
        raise ValueError(f"unknown half-round kind {kind!r}")
    layers = (
        PrepLayer(ancillas, params.ancilla.t_prep),
        pre,
        *_cz_layers(schedule, ancillas, t_cz),
        post,
        MeasureLayer(ancillas, params.ancilla.t_readout),
    )
    return Circuit(N_QUBITS, layers, encoding, "ancilla",
                   enumerate_fault_locations(layers))


def build_data_prep(basis: str, encoding: str, params: NoiseParams) -> Circuit:
    """Noisy product-state initialization of the data register."""
    layers: list[Layer] = [PrepLayer(DATA_QUBITS, params.data.t_prep)]
    if basis == "plus":
        layers.append(RotationLayer(tuple((q, +1) for q in DATA_QUBITS)))
    elif basis != "zero":
        raise ValueError(f"unknown preparation basis {basis!r}")
    layers = tuple(layers)
    return Circuit(N_QUBITS, layers, encoding, "ancilla",
                   enumerate_fault_locations(layers))


def build_ghz_prep(params: NoiseParams) -> Circuit:
    """Three parallel GHZ circuits along the code columns (data qubits only)."""
    t_cz = _t_cz(params)
    layers = (
        PrepLayer(DATA_QUBITS, params.data.t_prep),
        RotationLayer(tuple((q, +1) for q in DATA_QUBITS)),
        CzLayer(tuple((a, b) for a, b, _ in _GHZ_TRIOS), t_cz),
        CzLayer(tuple((b, c) for _, b, c in _GHZ_TRIOS), t_cz),
        RotationLayer(tuple((q, -1) for trio in _GHZ_TRIOS for q in (trio[0], trio[2]))),
    )
    return Circuit(N_QUBITS, layers, params.encoding, "data",
                   enumerate_fault_locations(layers))


def dump_circuit(circuit: Circuit) -> str:
    """One layer per line: `<duration_us> <gate>(<qubits>)...`."""
    lines = []
    for layer in circuit.layers:
        if isinstance(layer, PrepLayer):
            ops = [f"PREP({q})" for q in layer.targets]
        elif isinstance(layer, RotationLayer):
            ops = [f"RY{'+' if s > 0 else '-'}({q})" for q, s in layer.rotations]
        elif isinstance(layer, CzLayer):
            ops = [f"CZ({a},{b})" for a, b in layer.pairs]
        else:
            ops = [f"MEAS({q})" for q in layer.targets]
        lines.append(" ".join([repr(layer.duration)] + ops))
    return "\n".join(lines) + "\n"


# -- state construction and the ideal-EC oracle -------------------------------

def perfect_plus_state(n: int = N_QUBITS) -> StabilizerTableau:
    """Noise-free surface-17 |+>_L (also a gauge fixing of the BS-17 |+>_L).

    Built by projecting |0...0> onto +1 eigenspaces of the X stabilizers and
    the logical X; the forced projections stand in for measure-and-fixup.
    """
    code = surface17_spec()
    state = new_tableau(n)
    for s in code.x_stabilizers:
        state.measure_pauli(s.padded(n), None, force=1)
    state.measure_pauli(code.logical_x.padded(n), None, force=1)
    return state


def ideal_ec(code: CodeSpec, state: StabilizerTableau, logical: str = "X") -> bool:
    """Noise-free error correction; True iff the residual error is logical.

    Syndrome extraction is direct (eigenvalue_of), with no circuit and no
    faults; the final check compares the logical eigenvalue against +1.
    """
    n = state.n
    x_bits = tuple(state.eigenvalue_of(s.padded(n)) for s in code.x_stabilizers)
    z_bits = tuple(state.eigenvalue_of(s.padded(n)) for s in code.z_stabilizers)
    assert None not in x_bits and None not in z_bits, \
        "state is not a Pauli deformation of the codespace"
    correction = decode(code, Syndrome(x_bits, z_bits))
    state.apply_pauli(correction.padded(n))
    op = code.logical_x if logical == "X" else code.logical_z
    value = state.eigenvalue_of(op.padded(n))
    assert value is not None
    return value != 1


@dataclass(frozen=True)
class ProtocolOutcome:
    rounds: int
    syndrome_history: tuple
    correction: PauliString
    logical_failure: bool


# -- protocols ----------------------------------------------------------------

class Protocol:
    """A maximal unrolling with branch logic; segments share one location list."""

    kind: str

    def __init__(self, segments: list[tuple[str, Circuit]], params: NoiseParams):
        self.params = params
        self.segment_names = tuple(name for name, _ in segments)
        self.segments = {}
        layers: list[Layer] = []
        locations: list[FaultLocation] = []
        offset = 0
        for name, circ in segments:
            self.segments[name] = (offset, offset + len(circ.layers))
            layers.extend(circ.layers)
            locations.extend(enumerate_fault_locations(circ.layers, offset))
            offset += len(circ.layers)
        gate_params = segments[0][1].gate_params
        # category-major ordering so the sampler's weight vectors slice cleanly
        locations.sort(key=lambda loc: (loc.category, loc.layer, loc.qubits))
        self.circuit = Circuit(N_QUBITS, tuple(layers), params.encoding,
                               gate_params, tuple(locations))
        self.locations = self.circuit.locations
        self.counts = location_counts(self.locations)
        self.probabilities = fault_probabilities(params, self.circuit)

    # scalar (tableau) execution ------------------------------------------

    def _initial_state(self) -> StabilizerTableau:
        raise NotImplementedError

    def run(self, assignment, rng: np.random.Generator) -> ProtocolOutcome:
        raise NotImplementedError

    def _execute_segment(self, name, state, faults, rng) -> dict[int, int]:
        start, end = self.segments[name]
        outcomes: dict[int, int] = {}
        for idx in range(start, end):
            layer = self.circuit.layers[idx]
            anchored = faults.get(idx, {})
            if isinstance(layer, PrepLayer):
                for q in layer.targets:
                    state.prepare_z(q, rng)
                    _inject(state, anchored, ("prep", q))
                _inject_idles(state, anchored)
            elif isinstance(layer, RotationLayer):
                for q, sgn in layer.rotations:
                    state.ry_plus(q) if sgn > 0 else state.ry_minus(q)
                    _inject(state, anchored, ("rot", q))
            elif isinstance(layer, CzLayer):
                for a, b in layer.pairs:
                    state.cz(a, b)
                    _inject(state, anchored, ("cz", a, b))
                _inject_idles(state, anchored)
            else:
                _inject_idles(state, anchored)
                for q in layer.targets:
                    _inject(state, anchored, ("meas", q))
                    outcomes[q] = state.measure_z(q, rng)
        return outcomes

    def _group_faults(self, assignment):
        """Map active locations to (layer, anchor) for the scalar runner."""
        by_layer: dict[int, dict] = {}
        for i in assignment:
            loc = self.locations[i]
            anchored = by_layer.setdefault(loc.layer, {})
            if loc.category in (1,):
                key = ("prep", loc.qubits[0])
            elif loc.category == 2:
                key = ("meas", loc.qubits[0])
            elif loc.category == 3:
                key = ("rot", loc.qubits[0])
            elif loc.category == 4:
                key = ("cz",) + loc.qubits
            else:
                key = ("idle", loc.qubits[0])
            anchored.setdefault(key, []).append(loc)
        return by_layer


def _inject(state, anchored, key):
    for loc in anchored.get(key, ()):
        state.apply_pauli(loc.pauli_string(state.n))


def _inject_idles(state, anchored):
    for key, locs in anchored.items():
        if key[0] == "idle":
            for loc in locs:
                state.apply_pauli(loc.pauli_string(state.n))


class QecStepProtocol(Protocol):
    """Adaptive one-or-two-round QEC step on a perfect logical |+>."""

    kind = "qec-step"

    def __init__(self, code: CodeSpec, params: NoiseParams):
        self.code = code
        self.surface = surface17_spec()
        round_a = build_round(params.encoding, params)
        round_b = build_round(params.encoding, params)
        super().__init__([("round1", round_a), ("round2", round_b)], params)

    def _initial_state(self):
        return perfect_plus_state(N_QUBITS)

    def _round_syndrome(self, outcomes) -> Syndrome:
        return Syndrome(tuple(outcomes[a] for a in X_ANCILLAS),
                        tuple(outcomes[a] for a in Z_ANCILLAS))

    def decode_syndrome(self, surface_syndrome: Syndrome) -> PauliString:
        if self.code.name == "surface17":
            return decode(self.code, surface_syndrome)
        bs_syn = bs_syndrome_from_surface(self.code, surface_syndrome)
        return decode(self.code, bs_syn)

    def run(self, assignment, rng) -> ProtocolOutcome:
        faults = self._group_faults(assignment)
        state = self._initial_state()
        syn1 = self._round_syndrome(self._execute_segment("round1", state, faults, rng))
        history = [syn1]
        rounds = 1
        last = syn1
        if not syn1.trivial:
            rounds = 2
            last = self._round_syndrome(
                self._execute_segment("round2", state, faults, rng))
            history.append(last)
        correction = self.decode_syndrome(last)
        state.apply_pauli(correction.padded(state.n))
        failure = ideal_ec(self.code, state)
        return ProtocolOutcome(rounds, tuple(history), correction, failure)


class SurfacePrepProtocol(Protocol):
    """Projective fault-tolerant preparation of the surface-17 logical |+>.

    For the |0> variant the X and Z roles are interchanged; "primary" below
    refers to the projecting check type (Z for |+>, X for |0>).
    """

    kind = "surface-prep"

    def __init__(self, params: NoiseParams, basis: str = "plus"):
        self.code = surface17_spec()
        self.basis = basis
        primary = "z" if basis == "plus" else "x"
        secondary = "x" if basis == "plus" else "z"
        self.primary = primary
        enc = params.encoding
        super().__init__(
            [
                ("data-prep", build_data_prep(basis, enc, params)),
                ("p1", build_half_round(primary, enc, params)),
                ("s1", build_half_round(secondary, enc, params)),
                ("p2", build_half_round(primary, enc, params)),
                ("s2", build_half_round(secondary, enc, params)),
                ("p3", build_half_round(primary, enc, params)),
            ],
            params,
        )

    def _ancillas(self, kind: str):
        return Z_ANCILLAS if kind == "z" else X_ANCILLAS

    def run(self, assignment, rng) -> ProtocolOutcome:
        faults = self._group_faults(assignment)
        state = new_tableau(N_QUBITS)
        prim_anc = self._ancillas(self.primary)
        sec_anc = self._ancillas("x" if self.primary == "z" else "z")

        self._execute_segment("data-prep", state, faults, rng)
        out = self._execute_segment("p1", state, faults, rng)
        p1 = tuple(out[a] for a in prim_anc)
        out = self._execute_segment("s1", state, faults, rng)
        s1 = tuple(out[a] for a in sec_anc)
        history = [(self.primary, p1), ("x" if self.primary == "z" else "z", s1)]

        flagged = any(b == -1 for b in s1)
        out = self._execute_segment("p2", state, faults, rng)
        p2 = tuple(out[a] for a in prim_anc)
        history.append((self.primary, p2))
        final_secondary = s1
        if flagged:
            out = self._execute_segment("s2", state, faults, rng)
            final_secondary = tuple(out[a] for a in sec_anc)
            history.append(("x" if self.primary == "z" else "z", final_secondary))

        primary_rounds = 2
        final_primary = p2
        if p1 != p2:
            out = self._execute_segment("p3", state, faults, rng)
            final_primary = tuple(out[a] for a in prim_anc)
            history.append((self.primary, final_primary))
            primary_rounds = 3

        if self.primary == "z":
            syndrome = Syndrome(final_secondary, final_primary)
        else:
            syndrome = Syndrome(final_primary, final_secondary)
        correction = decode(self.code, syndrome)
        state.apply_pauli(correction.padded(state.n))
        failure = ideal_ec(self.code, state,
                           logical="X" if self.basis == "plus" else "Z")
        return ProtocolOutcome(primary_rounds, tuple(history), correction, failure)


class BsPrepProtocol(Protocol):
    """Unitary BS-17 logical |+> preparation: GHZ states along the columns.

    Row/column relabeling is classical and error-free, so the circuit acts on
    column trios directly; there are no ancillas and no measurements.
    """

    kind = "bs-prep"

    def __init__(self, params: NoiseParams, code: CodeSpec):
        self.code = code
        super().__init__([("ghz", build_ghz_prep(params))], params)

    def run(self, assignment, rng) -> ProtocolOutcome:
        faults = self._group_faults(assignment)
        state = new_tableau(N_QUBITS)
        self._execute_segment("ghz", state, faults, rng)
        failure = ideal_ec(self.code, state)
        identity = PauliString(self.code.n_data, 0, 0)
        return ProtocolOutcome(0, (), identity, failure)


def run_qec_step(code: CodeSpec, encoding: str, params: NoiseParams,
                 assignment, rng) -> ProtocolOutcome:
    return QecStepProtocol(code, params).run(assignment, rng)


def run_surface_plus_prep(encoding: str, params: NoiseParams, assignment, rng,
                          basis: str = "plus") -> ProtocolOutcome:
    return SurfacePrepProtocol(params, basis).run(assignment, rng)


def run_bs_plus_prep(params: NoiseParams, assignment, rng,
                     code: CodeSpec | None = None) -> ProtocolOutcome:
    from .codes import bs17_spec
    return BsPrepProtocol(params, code or bs17_spec()).run(assignment, rng)
