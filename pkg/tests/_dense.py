"""Small dense state-vector simulator used as an independent test oracle.

Supports the same gate set as the tableau engine on <= a handful of qubits,
including projective Z measurements with full branch enumeration, so exact
joint outcome distributions can be computed.
"""

from __future__ import annotations

import numpy as np

_RY_PLUS = np.array([[1, -1], [1, 1]], dtype=complex) / np.sqrt(2)
_RY_MINUS = np.array([[1, 1], [-1, 1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_ONE_QUBIT = {"ry+": _RY_PLUS, "ry-": _RY_MINUS, "x": _X, "y": _Y, "z": _Z}


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = 1.0
    return psi


def apply_1q(psi: np.ndarray, n: int, gate: str, q: int) -> np.ndarray:
    u = _ONE_QUBIT[gate]
    # index convention: bit q of the basis index is qubit q
    t = psi.reshape([2] * n)
    axis = n - 1 - q
    t = np.moveaxis(t, axis, 0)
    t = np.tensordot(u, t, axes=([1], [0]))
    t = np.moveaxis(t, 0, axis)
    return t.reshape(-1)


def apply_cz(psi: np.ndarray, n: int, a: int, b: int) -> np.ndarray:
    idx = np.arange(2 ** n)
    mask = (((idx >> a) & 1) & ((idx >> b) & 1)).astype(bool)
    out = psi.copy()
    out[mask] *= -1
    return out


def z_outcome_probabilities(psi: np.ndarray, n: int, q: int) -> tuple[float, float]:
    idx = np.arange(2 ** n)
    bit = ((idx >> q) & 1).astype(bool)
    p1 = float(np.sum(np.abs(psi[bit]) ** 2))
    return 1.0 - p1, p1


def project_z(psi: np.ndarray, n: int, q: int, outcome_bit: int) -> np.ndarray:
    idx = np.arange(2 ** n)
    keep = ((idx >> q) & 1) == outcome_bit
    out = np.where(keep, psi, 0)
    norm = np.linalg.norm(out)
    return out / norm


def run_branches(n: int, ops: list[tuple]) -> dict[tuple[int, ...], float]:
    """Exact joint distribution over recorded measurement outcomes.

    ops entries: ("gate", name, q[, b]) | ("measure", q) | ("prepare", q).
    Measurement outcomes are recorded as +-1 in circuit order.
    """
    dist: dict[tuple[int, ...], float] = {}

    def walk(psi, i, record, prob):
        if prob < 1e-12:
            return
        while i < len(ops):
            op = ops[i]
            if op[0] == "gate":
                name = op[1]
                if name == "cz":
                    psi = apply_cz(psi, n, op[2], op[3])
                else:
                    psi = apply_1q(psi, n, name, op[2])
                i += 1
            elif op[0] == "prepare":
                q = op[2] if len(op) > 2 else op[1]
                p0, p1 = z_outcome_probabilities(psi, n, q)
                for bit, p in ((0, p0), (1, p1)):
                    if p < 1e-12:
                        continue
                    branch = project_z(psi, n, q, bit)
                    if bit == 1:
                        branch = apply_1q(branch, n, "x", q)
                    walk(branch, i + 1, record, prob * p)
                return
            else:  # measure
                q = op[1]
                p0, p1 = z_outcome_probabilities(psi, n, q)
                for bit, p in ((0, p0), (1, p1)):
                    if p < 1e-12:
                        continue
                    branch = project_z(psi, n, q, bit)
                    walk(branch, i + 1, record + (1 - 2 * bit,), prob * p)
                return
        dist[record] = dist.get(record, 0.0) + prob

    walk(zero_state(n), 0, (), 1.0)
    return dist
