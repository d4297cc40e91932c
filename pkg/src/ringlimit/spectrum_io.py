"""Two-column CSV spectrum files and plot-ready data.

Layout::

    wavelength_nm,transmission
    1490,0.99871...
    ...

One header line, ascending wavelengths in nm, ``.`` as decimal point,
LF line endings. Values are written with the shortest representation
that round-trips exactly, so write-then-read is lossless.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .devices import Spectrum
from .errors import SpectrumFormatError

HEADER = "wavelength_nm,transmission"
PER_NM = 1e9


def _fmt(value: float) -> str:
    return repr(float(value))


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_columns(header: str, first: Iterable[float], second: Iterable[float]) -> str:
    rows = [header]
    rows.extend(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(first, second))
    return "\n".join(rows) + "\n"


def write_columns(path, header: str, first: Sequence[float], second: Sequence[float]) -> None:
    atomic_write_text(path, format_columns(header, first, second))


def format_spectrum(spectrum: Spectrum) -> str:
    return format_columns(HEADER, spectrum.wavelengths * PER_NM, spectrum.transmission)


def write_spectrum(spectrum: Spectrum, path) -> None:
    atomic_write_text(path, format_spectrum(spectrum))


def parse_spectrum(text: str) -> Spectrum:
    """Parse spectrum text; row numbers in errors are 1-based file lines."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip() != HEADER:
        raise SpectrumFormatError(f"expected header '{HEADER}'", row=1)
    n = len(lines) - 1
    wl = np.empty(n)
    tr = np.empty(n)
    previous = -np.inf
    for k, line in enumerate(lines[1:]):
        row = k + 2
        parts = line.strip().split(",")
        if len(parts) != 2:
            raise SpectrumFormatError(f"expected 2 comma-separated fields, got {len(parts)}", row=row)
        try:
            w, t = float(parts[0]), float(parts[1])
        except ValueError:
            raise SpectrumFormatError(f"not a number: {line.strip()!r}", row=row) from None
        if not (np.isfinite(w) and np.isfinite(t)):
            raise SpectrumFormatError("non-finite value", row=row)
        if w <= previous:
            raise SpectrumFormatError("wavelengths must be strictly ascending", row=row)
        previous = w
        wl[k] = w
        tr[k] = t
    if n < 2:
        raise SpectrumFormatError(f"a spectrum needs at least 2 data rows, found {n}")
    return Spectrum(wl / PER_NM, tr)


def read_spectrum(path) -> Spectrum:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_spectrum(fh.read())
