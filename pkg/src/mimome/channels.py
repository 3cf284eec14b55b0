"""Channel containers and matrix file I/O.

A wiretap channel instance is a pair of complex matrices acting on the same
transmit vector: the legitimate receiver sees ``Hb @ x`` and the eavesdropper
sees ``He @ x``, each corrupted by unit-variance circularly symmetric Gaussian
noise. Matrices travel on disk as JSON objects ``{"rows": R, "cols": C,
"data": [[re, im], ...]}`` with ``data`` flat in row-major order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelPair:
    """Main channel ``hb`` (m_b x m_a) and eavesdropper channel ``he`` (m_e x m_a)."""

    hb: np.ndarray
    he: np.ndarray

    def __post_init__(self):
        hb = np.asarray(self.hb, dtype=complex)
        he = np.asarray(self.he, dtype=complex)
        if hb.ndim != 2 or he.ndim != 2:
            raise ValueError("channel matrices must be 2-D")
        if hb.shape[1] != he.shape[1]:
            raise ValueError(
                f"transmit dimensions differ: hb has {hb.shape[1]} columns, "
                f"he has {he.shape[1]}"
            )
        if min(hb.shape) < 1 or min(he.shape) < 1:
            raise ValueError("antenna counts must be positive")
        if not (np.all(np.isfinite(hb.view(float))) and np.all(np.isfinite(he.view(float)))):
            raise ValueError("channel matrices must have finite entries")
        object.__setattr__(self, "hb", hb)
        object.__setattr__(self, "he", he)

    @property
    def m_a(self) -> int:
        return self.hb.shape[1]

    @property
    def m_b(self) -> int:
        return self.hb.shape[0]

    @property
    def m_e(self) -> int:
        return self.he.shape[0]


def matrix_to_json(m) -> dict:
    """Encode a complex matrix as a row-major JSON-serializable dict."""
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    data = [[float(v.real), float(v.imag)] for v in m.ravel(order="C")]
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "data": data}


def matrix_from_json(obj) -> np.ndarray:
    """Decode the ``{"rows", "cols", "data"}`` matrix format."""
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"matrix object missing field: {exc}") from exc
    if rows < 1:
        raise ValueError(f"field 'rows': must be positive, got {rows}")
    if cols < 1:
        raise ValueError(f"field 'cols': must be positive, got {cols}")
    if len(data) != rows * cols:
        raise ValueError(
            f"matrix data length {len(data)} does not match rows*cols = {rows * cols}"
        )
    flat = np.empty(rows * cols, dtype=complex)
    for i, entry in enumerate(data):
        if len(entry) != 2:
            raise ValueError(f"data[{i}] must be a [re, im] pair")
        flat[i] = complex(float(entry[0]), float(entry[1]))
    return flat.reshape(rows, cols)


def save_matrix(path, m) -> None:
    with open(path, "w") as fh:
        json.dump(matrix_to_json(m), fh)
        fh.write("\n")


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return matrix_from_json(json.load(fh))


def load_channel_pair(hb_path, he_path) -> ChannelPair:
    return ChannelPair(load_matrix(hb_path), load_matrix(he_path))
