"""Exact SI defining constants (2019 redefinition)."""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = 299_792_458.0  # m/s
    h: float = 6.626_070_15e-34  # J s

    @property
    def hbar(self) -> float:
        return self.h / (2.0 * math.pi)


SI = PhysicalConstants()

C = SI.c
H = SI.h
HBAR = SI.hbar
