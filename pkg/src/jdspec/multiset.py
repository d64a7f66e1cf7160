"""Sorted eigenvalue multisets and their comparison."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MERGE_RTOL = 1e-9
PAIR_RTOL = 1e-8


def _sort_key(v):
    v = complex(v)
    return (v.real, v.imag)


@dataclass(frozen=True)
class SpectrumMultiset:
    """Distinct eigenvalues (increasing) with multiplicities and provenance tags.

    Values are real unless built from genuinely complex data.
    """

    values: np.ndarray
    multiplicities: np.ndarray
    provenance: tuple = field(default=(), compare=False)

    @classmethod
    def from_values(
        cls,
        values: Iterable,
        provenance: Sequence | None = None,
        merge_rtol: float = MERGE_RTOL,
    ) -> "SpectrumMultiset":
        vals = list(values)
        tags = list(provenance) if provenance is not None else ["direct"] * len(vals)
        if len(tags) != len(vals):
            raise ValueError("provenance length differs from values")
        order = sorted(range(len(vals)), key=lambda i: _sort_key(vals[i]))
        merged: list[list] = []
        for i in order:
            v = vals[i]
            if merged and abs(v - merged[-1][0]) <= merge_rtol * (1.0 + abs(v)):
                m = merged[-1]
                # running mean keeps merged clusters centred
                m[0] = (m[0] * m[1] + v) / (m[1] + 1)
                m[1] += 1
            else:
                merged.append([v, 1, tags[i]])
        is_complex = any(isinstance(m[0], complex) and abs(m[0].imag) > 0 for m in merged)
        dtype = complex if is_complex else float
        arr = np.array([m[0] if is_complex else np.real(m[0]) for m in merged], dtype=dtype)
        mult = np.array([m[1] for m in merged], dtype=int)
        return cls(arr, mult, tuple(m[2] for m in merged))

    @property
    def total(self) -> int:
        return int(self.multiplicities.sum())

    def expanded(self) -> np.ndarray:
        return np.repeat(self.values, self.multiplicities)

    def __len__(self):
        return len(self.values)

    def to_json(self) -> dict:
        return {
            "values": [float(v) for v in np.real(self.values)],
            "multiplicities": [int(m) for m in self.multiplicities],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "value", "multiplicity", "provenance"])
        for i, (v, m) in enumerate(zip(self.values, self.multiplicities)):
            tag = self.provenance[i] if i < len(self.provenance) else "direct"
            w.writerow([i, repr(float(np.real(v))), int(m), tag])
        return buf.getvalue()

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


@dataclass
class MatchReport:
    max_distance: float
    unmatched_a: list
    unmatched_b: list
    multiplicity_disagreements: list
    tol: float

    @property
    def ok(self) -> bool:
        return not self.unmatched_a and not self.unmatched_b and self.max_distance <= self.tol

    def to_json(self) -> dict:
        return {
            "max_distance": self.max_distance,
            "unmatched_a": [float(np.real(v)) for v in self.unmatched_a],
            "unmatched_b": [float(np.real(v)) for v in self.unmatched_b],
            "multiplicity_disagreements": self.multiplicity_disagreements,
            "tol": self.tol,
            "match": self.ok,
        }


def compare_spectra(A: SpectrumMultiset, B: SpectrumMultiset, tol: float = PAIR_RTOL) -> MatchReport:
    """Greedy pairing of the expanded, sorted multisets.

    Two entries pair when they are within ``tol * (1 + |x|)``.  Unpaired
    entries on either side are reported, as are distinct values whose
    multiplicities differ between the two sides.
    """
    xa = sorted(A.expanded().tolist(), key=_sort_key)
    xb = sorted(B.expanded().tolist(), key=_sort_key)
    i = j = 0
    max_d = 0.0
    ua, ub = [], []
    while i < len(xa) and j < len(xb):
        d = abs(xa[i] - xb[j])
        if d <= tol * (1.0 + abs(xa[i])):
            max_d = max(max_d, d)
            i += 1
            j += 1
        elif _sort_key(xa[i]) < _sort_key(xb[j]):
            ua.append(xa[i])
            i += 1
        else:
            ub.append(xb[j])
            j += 1
    ua.extend(xa[i:])
    ub.extend(xb[j:])
    disagreements = []
    for v, m in zip(A.values, A.multiplicities):
        close = [mb for vb, mb in zip(B.values, B.multiplicities) if abs(v - vb) <= tol * (1.0 + abs(v))]
        mb = sum(close)
        if mb != m:
            disagreements.append({"value": float(np.real(v)), "a": int(m), "b": int(mb)})
    return MatchReport(float(max_d), ua, ub, disagreements, tol)
