"""CHP-style stabilizer tableau simulator for the {RY(+-pi/2), CZ, Pauli} gate set.

The tableau keeps 2n generator rows (n destabilizers followed by n
stabilizers) as binary X/Z matrices plus a per-row phase exponent of i,
kept mod 4.  Every exposed operator is Hermitian, so row phases are always
even (sign = (-1)^(r/2)); the mod-4 arithmetic only shows up transiently
inside row multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GATE_NAMES = ("ry+", "ry-", "cz", "x", "y", "z")

_PAULI_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


@dataclass(frozen=True)
class PauliString:
    """Signed n-qubit Pauli operator stored as X/Z bit masks.

    Bit q of ``x_mask``/``z_mask`` holds the X/Z component on qubit q; a
    qubit with both bits set carries the Hermitian Y.  ``sign`` is +1 or -1.
    """

    n: int
    x_mask: int = 0
    z_mask: int = 0
    sign: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("PauliString needs at least one qubit")
        full = (1 << self.n) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError("mask exceeds qubit count")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def from_label(cls, n: int, label: str, sign: int = 1) -> "PauliString":
        """Parse labels like ``"X0X1Z4"`` or ``"Y3"``; ``"I"`` is identity."""
        x = z = 0
        i = 0
        label = label.strip()
        if label in ("I", ""):
            return cls(n, 0, 0, sign)
        while i < len(label):
            kind = label[i]
            if kind not in "XYZ":
                raise ValueError(f"bad Pauli letter {kind!r} in {label!r}")
            j = i + 1
            while j < len(label) and label[j].isdigit():
                j += 1
            if j == i + 1:
                raise ValueError(f"missing qubit index in {label!r}")
            q = int(label[i + 1:j])
            if q >= n:
                raise ValueError(f"qubit {q} out of range for n={n}")
            bit = 1 << q
            if (x | z) & bit:
                raise ValueError(f"qubit {q} repeated in {label!r}")
            if kind in "XY":
                x |= bit
            if kind in "ZY":
                z |= bit
            i = j
        return cls(n, x, z, sign)

    def label(self) -> str:
        terms = []
        for q in range(self.n):
            pair = ((self.x_mask >> q) & 1, (self.z_mask >> q) & 1)
            if pair != (0, 0):
                terms.append(f"{_PAULI_LETTER[pair]}{q}")
        body = "".join(terms) or "I"
        return ("-" if self.sign < 0 else "+") + body

    @property
    def weight(self) -> int:
        return int.bit_count(self.x_mask | self.z_mask)

    def support(self) -> tuple[int, ...]:
        m = self.x_mask | self.z_mask
        return tuple(q for q in range(self.n) if (m >> q) & 1)

    def commutes_with(self, other: "PauliString") -> bool:
        if self.n != other.n:
            raise ValueError("width mismatch")
        overlap = int.bit_count(self.x_mask & other.z_mask)
        overlap += int.bit_count(self.z_mask & other.x_mask)
        return overlap % 2 == 0

    def mul(self, other: "PauliString") -> "PauliString":
        """Exact product; defined only for commuting factors (Hermitian result)."""
        if not self.commutes_with(other):
            raise ValueError("product of anticommuting Paulis is not Hermitian")
        k = _phase_exponent(self.x_mask, self.z_mask, other.x_mask, other.z_mask)
        if k % 2:
            raise AssertionError("commuting product produced odd phase")
        sign = self.sign * other.sign * (-1 if k % 4 == 2 else 1)
        return PauliString(self.n, self.x_mask ^ other.x_mask,
                           self.z_mask ^ other.z_mask, sign)

    def padded(self, n: int) -> "PauliString":
        """Same operator embedded in the first qubits of a wider register."""
        if n < self.n:
            raise ValueError("cannot shrink a PauliString")
        return PauliString(n, self.x_mask, self.z_mask, self.sign)


def _phase_exponent(x1: int, z1: int, x2: int, z2: int) -> int:
    """Exponent k of i in P1*P2 = i^k * P3 for Hermitian-canonical Paulis."""
    k = 0
    m = x1 | z1 | x2 | z2
    q = 0
    while m >> q:
        a = ((x1 >> q) & 1, (z1 >> q) & 1)
        b = ((x2 >> q) & 1, (z2 >> q) & 1)
        k += _G_TABLE[a + b]
        q += 1
    return k % 4


# g(x1, z1, x2, z2): i-exponent from multiplying single-qubit Paulis P1*P2,
# the same bookkeeping CHP's rowsum uses.
_G_TABLE = {
    (0, 0, 0, 0): 0, (0, 0, 0, 1): 0, (0, 0, 1, 0): 0, (0, 0, 1, 1): 0,
    (0, 1, 0, 0): 0, (0, 1, 0, 1): 0, (0, 1, 1, 0): 1, (0, 1, 1, 1): -1,
    (1, 0, 0, 0): 0, (1, 0, 0, 1): -1, (1, 0, 1, 0): 0, (1, 0, 1, 1): 1,
    (1, 1, 0, 0): 0, (1, 1, 0, 1): 1, (1, 1, 1, 0): -1, (1, 1, 1, 1): 0,
}


class StabilizerTableau:
    """Mutable stabilizer state: n destabilizer rows then n stabilizer rows."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)  # i-exponent mod 4, always even
        for i in range(n):
            self.x[i, i] = 1          # destabilizer X_i
            self.z[n + i, i] = 1      # stabilizer Z_i

    # -- row access -------------------------------------------------------

    def row(self, i: int) -> PauliString:
        x = int.from_bytes(np.packbits(self.x[i], bitorder="little").tobytes(), "little")
        z = int.from_bytes(np.packbits(self.z[i], bitorder="little").tobytes(), "little")
        sign = -1 if self.r[i] % 4 == 2 else 1
        return PauliString(self.n, x, z, sign)

    def stabilizers(self) -> list[PauliString]:
        return [self.row(self.n + i) for i in range(self.n)]

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.n = self.n
        t.x = self.x.copy()
        t.z = self.z.copy()
        t.r = self.r.copy()
        return t

    # -- gates --------------------------------------------------------------

    def ry_plus(self, q: int):
        """RY(+pi/2): X -> -Z, Z -> X."""
        self._check_q(q)
        flip = self.x[:, q] & (1 - self.z[:, q])
        self.r = (self.r + 2 * flip) % 4
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def ry_minus(self, q: int):
        """RY(-pi/2): X -> Z, Z -> -X."""
        self._check_q(q)
        flip = self.z[:, q] & (1 - self.x[:, q])
        self.r = (self.r + 2 * flip) % 4
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def cz(self, a: int, b: int):
        self._check_q(a)
        self._check_q(b)
        if a == b:
            raise ValueError("CZ targets must be distinct")
        xa, za = self.x[:, a], self.z[:, a]
        xb, zb = self.x[:, b], self.z[:, b]
        flip = xa & xb & (za ^ zb)
        self.r = (self.r + 2 * flip) % 4
        self.z[:, a] ^= xb
        self.z[:, b] ^= xa

    def pauli_x(self, q: int):
        self._check_q(q)
        self.r = (self.r + 2 * self.z[:, q]) % 4

    def pauli_y(self, q: int):
        self._check_q(q)
        self.r = (self.r + 2 * (self.x[:, q] ^ self.z[:, q])) % 4

    def pauli_z(self, q: int):
        self._check_q(q)
        self.r = (self.r + 2 * self.x[:, q]) % 4

    def apply_pauli(self, p: PauliString):
        """Conjugate the state by p (sign of p is a global phase, ignored)."""
        if p.n != self.n:
            raise ValueError("width mismatch")
        px = _mask_to_bits(p.x_mask, self.n)
        pz = _mask_to_bits(p.z_mask, self.n)
        anti = ((self.x @ pz) + (self.z @ px)) % 2
        self.r = (self.r + 2 * anti.astype(np.uint8)) % 4

    # -- measurement, preparation, eigenvalues ------------------------------

    def measure_z(self, q: int, rng: np.random.Generator) -> int:
        self._check_q(q)
        return self.measure_pauli(
            PauliString(self.n, 0, 1 << q), rng)

    def prepare_z(self, q: int, rng: np.random.Generator | None = None):
        """Reset qubit q to |0>: measure Z_q, apply X on outcome -1."""
        self._check_q(q)
        zq = PauliString(self.n, 0, 1 << q)
        if self._first_anticommuting_stab(zq) is not None and rng is None:
            raise ValueError("prepare_z on an indeterminate qubit needs a coin source")
        outcome = self.measure_pauli(zq, rng)
        if outcome == -1:
            self.pauli_x(q)

    def measure_pauli(self, p: PauliString, rng: np.random.Generator | None,
                      force: int | None = None) -> int:
        """Projectively measure a Hermitian Pauli; returns the +-1 outcome.

        ``force`` overrides the coin for a random outcome (used to build
        reference states by projection-plus-fixup; it is a post-selection,
        not a physical operation).
        """
        if p.n != self.n:
            raise ValueError("width mismatch")
        n = self.n
        anti = self._anticommutation_vector(p)
        stab_idx = np.flatnonzero(anti[n:])
        if stab_idx.size:
            pp = n + int(stab_idx[0])
            for i in np.flatnonzero(anti):
                if i != pp:
                    self._rowmult(int(i), pp)
            # old stabilizer row pp becomes the destabilizer of p
            self.x[pp - n] = self.x[pp]
            self.z[pp - n] = self.z[pp]
            self.r[pp - n] = self.r[pp]
            if force is not None:
                outcome = force
            elif rng is None:
                raise ValueError("random measurement needs a coin source")
            else:
                outcome = 1 if rng.integers(2) == 0 else -1
            self.x[pp] = _mask_to_bits(p.x_mask, n)
            self.z[pp] = _mask_to_bits(p.z_mask, n)
            self.r[pp] = 0 if outcome * p.sign > 0 else 2
            return outcome
        return self._deterministic_eigenvalue(p)

    def eigenvalue_of(self, p: PauliString) -> int | None:
        """+-1 if +-p is in the stabilizer group, None if indeterminate."""
        if p.n != self.n:
            raise ValueError("width mismatch")
        if self._first_anticommuting_stab(p) is not None:
            return None
        return self._deterministic_eigenvalue(p)

    # -- invariant checks (used by tests) ------------------------------------

    def check_invariants(self):
        n = self.n
        if np.any(self.r % 2):
            raise AssertionError("odd row phase")
        sym = (self.x @ self.z.T + self.z @ self.x.T) % 2
        expect = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        for i in range(n):
            expect[i, n + i] = expect[n + i, i] = 1
        if not np.array_equal(sym, expect):
            raise AssertionError("symplectic pairing violated")

    # -- internals -----------------------------------------------------------

    def _check_q(self, q: int):
        if not 0 <= q < self.n:
            raise ValueError(f"qubit {q} out of range for n={self.n}")

    def _anticommutation_vector(self, p: PauliString) -> np.ndarray:
        px = _mask_to_bits(p.x_mask, self.n)
        pz = _mask_to_bits(p.z_mask, self.n)
        return ((self.x @ pz) + (self.z @ px)) % 2

    def _first_anticommuting_stab(self, p: PauliString) -> int | None:
        anti = self._anticommutation_vector(p)[self.n:]
        idx = np.flatnonzero(anti)
        return None if idx.size == 0 else int(idx[0])

    def _rowmult(self, h: int, i: int):
        """Row h := (row i) * (row h), CHP rowsum."""
        g = _G_VEC[(self.x[i] << 3) | (self.z[i] << 2) | (self.x[h] << 1) | self.z[h]]
        self.r[h] = (int(self.r[h]) + int(self.r[i]) + int(g.sum())) % 4
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def _deterministic_eigenvalue(self, p: PauliString) -> int:
        n = self.n
        anti = self._anticommutation_vector(p)[:n]
        sx = np.zeros(n, dtype=np.uint8)
        sz = np.zeros(n, dtype=np.uint8)
        r = 0
        for j in np.flatnonzero(anti):
            i = n + int(j)
            g = _G_VEC[(self.x[i] << 3) | (self.z[i] << 2) | (sx << 1) | sz]
            r = (r + int(self.r[i]) + int(g.sum())) % 4
            sx ^= self.x[i]
            sz ^= self.z[i]
        if not (np.array_equal(sx, _mask_to_bits(p.x_mask, n))
                and np.array_equal(sz, _mask_to_bits(p.z_mask, n))):
            raise AssertionError("operator commutes with the group but is not in it")
        return (1 if r == 0 else -1) * p.sign


# vectorized g over 4-bit packed (x1 z1 x2 z2)
_G_VEC = np.zeros(16, dtype=np.int8)
for _bits, _val in _G_TABLE.items():
    _G_VEC[(_bits[0] << 3) | (_bits[1] << 2) | (_bits[2] << 1) | _bits[3]] = _val


def _mask_to_bits(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> q) & 1 for q in range(n)], dtype=np.uint8)


# -- module-level operation wrappers ----------------------------------------

def new_tableau(n: int) -> StabilizerTableau:
    """The state |0...0>: stabilizers +Z_1..+Z_n."""
    return StabilizerTableau(n)


def apply_gate(state: StabilizerTableau, gate: str, qubits: tuple[int, ...] | list[int]):
    """Apply one named gate from {ry+, ry-, cz, x, y, z} in place."""
    qubits = tuple(qubits)
    if gate == "cz":
        if len(qubits) != 2:
            raise ValueError("cz takes two targets")
        state.cz(*qubits)
        return state
    if len(qubits) != 1:
        raise ValueError(f"{gate} takes one target")
    q = qubits[0]
    if gate == "ry+":
        state.ry_plus(q)
    elif gate == "ry-":
        state.ry_minus(q)
    elif gate == "x":
        state.pauli_x(q)
    elif gate == "y":
        state.pauli_y(q)
    elif gate == "z":
        state.pauli_z(q)
    else:
        raise ValueError(f"unknown gate {gate!r}")
    return state


def measure_z(state: StabilizerTableau, q: int, rng: np.random.Generator) -> int:
    return state.measure_z(q, rng)


def prepare_z(state: StabilizerTableau, q: int, rng: np.random.Generator | None = None):
    state.prepare_z(q, rng)
    return state


def eigenvalue_of(state: StabilizerTableau, p: PauliString) -> int | None:
    return state.eigenvalue_of(p)
