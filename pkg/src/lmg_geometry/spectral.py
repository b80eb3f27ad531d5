"""Eigendecomposition, state selection and density of states."""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .spin import build_hamiltonian, check_spin


class EigensolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    j: Optional[float] = None
    params: object = None

    @property
    def width(self):
        return float(self.eigenvalues[-1] - self.eigenvalues[0])


@dataclass(frozen=True)
class StateSelector:
    """Which eigenstate to follow: 'ground', 'highest' or 'index'."""
    kind: str = "ground"
    index: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("ground", "highest", "index"):
            raise ValueError(f"unknown state kind {self.kind!r}")
        if self.kind == "index" and (self.index is None or self.index < 0):
            raise ValueError("index selector needs a non-negative index")

    @classmethod
    def parse(cls, sel):
        """Accept a StateSelector, 'ground', 'highest', or an integer index."""
        if isinstance(sel, cls):
            return sel
        if isinstance(sel, (int, np.integer)):
            return cls("index", int(sel))
        s = str(sel).strip().lower()
        if s in ("ground", "highest"):
            return cls(s)
        if s.startswith("index"):
            s = s[5:].lstrip(":= ")
        try:
            return cls("index", int(s))
        except ValueError:
            raise ValueError(f"bad state selector {sel!r}") from None

    def __str__(self):
        return self.kind if self.kind != "index" else str(self.index)


@dataclass(frozen=True)
class DosHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray


def fix_signs(vecs):
    """Make the largest-magnitude component of every column positive real."""
    vecs = np.array(vecs)
    idx = np.argmax(np.abs(vecs), axis=0)
    piv = vecs[idx, np.arange(vecs.shape[1])]
    phase = piv / np.abs(piv)
    return vecs / phase if np.iscomplexobj(vecs) else vecs * np.sign(piv)


def diagonalize(H, j=None, params=None):
    """Full eigendecomposition of a Hermitian matrix.

    Args:
        H: square Hermitian array, real symmetric for the LMG model.
        j, params: optional metadata stored on the result.

    Returns:
        Spectrum with ascending eigenvalues and sign-fixed eigenvectors.
    """
    H = np.asarray(H)
    if np.iscomplexobj(H) and not np.any(H.imag):
        H = H.real
    try:
        w, v = scipy.linalg.eigh(H, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"eigensolver failed: {exc}") from exc
    return Spectrum(w, fix_signs(v), j, params)


def spectrum_at(j, p):
    """Diagonalize the LMG Hamiltonian at parameter point p."""
    j = check_spin(j)
    return diagonalize(build_hamiltonian(j, p), j, p)


def select_state(s, sel):
    """Index of the selected eigenstate within spectrum s."""
    sel = StateSelector.parse(sel)
    dim = len(s.eigenvalues)
    if sel.kind == "ground":
        return 0
    if sel.kind == "highest":
        return dim - 1
    if sel.index >= dim:
        raise IndexError(f"state index {sel.index} outside [0, {dim - 1}]")
    return sel.index


def density_of_states(s, bins, j=None):
    """Histogram of E_k/j over [E_min/j, E_max/j] with equal-width bins.

    The last bin is closed on the right, so every level is counted.
    """
    if int(bins) < 2:
        raise ValueError("bins must be >= 2")
    j = check_spin(j if j is not None else s.j)
    e = np.asarray(s.eigenvalues) / j
    counts, edges = np.histogram(e, bins=int(bins), range=(e.min(), e.max()))
    return DosHistogram(edges, counts)
