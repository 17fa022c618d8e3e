"""Forcing inputs for the cable-mass experiments.

Four oscillating input families drive the left mass:

    input1: u(t) = 0.1 sin(0.2 pi t)
    input2: u(t) = 0.02 cos(a t) + 0.03 cos(b t), frequencies taken
            from the two slowest-decaying eigenvalue pairs of A
    input3: u(t) = c1 sin(m t) + c2 cos(nfreq t)
    input4: u(t) = 0.1 square(0.2 pi t)

plus the zero input for unforced energy studies.  The square wave is
+1 where sin > 0, -1 where sin < 0 and 0 at the crossings, so input4
takes values in {+0.1, 0, -0.1} exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg

KINDS = ("sine1", "eig_cos2", "sin_cos3", "square4", "zero")

#: Mapping of config-facing preset names to input kinds.
INPUT_PRESETS = {
    "input1": "sine1",
    "input2": "eig_cos2",
    "input3": "sin_cos3",
    "input4": "square4",
    "zero": "zero",
}


@dataclass(frozen=True)
class InputSpec:
    """One forcing input.

    c1, c2, m, nfreq parameterize the sin_cos3 kind (the model study
    never pinned these constants; the defaults here are just a mild
    two-tone signal).  a, b are the eig_cos2 frequencies; they stay
    None until resolved against a concrete system.  scale multiplies
    the whole signal.
    """

    kind: str = "sine1"
    c1: float = 0.05
    c2: float = 0.05
    m: float = 1.0
    nfreq: float = 2.0
    a: float | None = None
    b: float | None = None
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown input kind {self.kind!r}")
        for name in ("c1", "c2", "m", "nfreq", "scale"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        for name in ("m", "nfreq"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        for name in ("a", "b"):
            value = getattr(self, name)
            if value is not None and (not np.isfinite(value) or value < 0.0):
                raise ValueError(f"{name} must be finite and nonnegative")


def input_preset(name: str) -> InputSpec:
    """InputSpec for a named preset ("input1".."input4", "zero")."""
    try:
        kind = INPUT_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown input preset {name!r}") from None
    return InputSpec(kind=kind)


def square_wave(s):
    """Square wave: sign of sin(s), with 0 at the sign changes."""
    return np.sign(np.sin(s))


def eval_input(spec: InputSpec, t):
    """Evaluate the input at time t (scalar or array)."""
    if spec.kind == "sine1":
        value = 0.1 * np.sin(0.2 * np.pi * t)
    elif spec.kind == "eig_cos2":
        if spec.a is None or spec.b is None:
            raise ValueError("eig_cos2 frequencies are unresolved; call "
                             "input2_frequencies against a system first")
        value = 0.02 * np.cos(spec.a * t) + 0.03 * np.cos(spec.b * t)
    elif spec.kind == "sin_cos3":
        value = spec.c1 * np.sin(spec.m * t) + spec.c2 * np.cos(spec.nfreq * t)
    elif spec.kind == "square4":
        value = 0.1 * square_wave(0.2 * np.pi * t)
    else:  # zero
        value = np.zeros_like(np.asarray(t, dtype=float))
        if np.isscalar(t):
            value = 0.0
    return spec.scale * value


def _system_matrix(sys_or_matrix) -> np.ndarray:
    return getattr(sys_or_matrix, "a", sys_or_matrix)


def dominant_modes(sys_or_matrix, count: int = 2) -> np.ndarray:
    """Eigenvalues with the largest real parts, one per conjugate pair.

    Real eigenvalues and the upper-half-plane member of each complex
    pair are kept, sorted by decreasing real part.
    """
    eigs = linalg.eigenvalues(_system_matrix(sys_or_matrix))
    reps = eigs[eigs.imag >= 0.0]
    order = np.lexsort((-np.abs(reps.imag), -reps.real))
    return reps[order][:count]


def input2_frequencies(sys_or_matrix, mode: str = "literal") -> tuple[float, float]:
    """Forcing frequencies (a, b) for the eig_cos2 input.

    mode="literal" (default) reads the frequencies off the two largest
    real parts of the eigenvalues of A, which gives slow near-constant
    cosines whose beating grows the response before the damping pulls
    it back.  mode="imag" instead takes the absolute imaginary parts of
    those dominant eigenvalues, i.e. forcing at the two slowest-decaying
    resonances.  Either way the magnitudes are returned, since cos is
    even.
    """
    if mode not in ("imag", "literal"):
        raise ValueError(f"input2_mode must be 'imag' or 'literal', got {mode!r}")
    modes = dominant_modes(sys_or_matrix, count=2)
    if modes.size < 2:
        raise ValueError("system has fewer than two eigenvalue pairs")
    if mode == "imag":
        return float(abs(modes[0].imag)), float(abs(modes[1].imag))
    return float(abs(modes[0].real)), float(abs(modes[1].real))


def resolve_input(spec: InputSpec, sys_or_matrix, mode: str = "literal") -> InputSpec:
    """Fill in the eig_cos2 frequencies of spec from a concrete system."""
    if spec.kind != "eig_cos2" or (spec.a is not None and spec.b is not None):
        return spec
    a, b = input2_frequencies(sys_or_matrix, mode=mode)
    return InputSpec(kind=spec.kind, c1=spec.c1, c2=spec.c2, m=spec.m,
                     nfreq=spec.nfreq, a=a, b=b, scale=spec.scale)
