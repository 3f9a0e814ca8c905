"""Per-generation phase records of a DEGA run on LeadingOnes."""

from __future__ import annotations

import io
from dataclasses import dataclass, fields

import numpy as np

from . import _kernels as K

DIVERSITY = "diversity"
EXPLOITATION = "exploitation"


@dataclass(frozen=True)
class PhaseEvent:
    """Population snapshot after one generation.

    ``generation`` is the number of evaluations spent so far; the initial
    pair appears at 2.  ``H`` is the Hamming distance restricted to the
    non-optimized part NO, ``H_bar`` the number of agreeing NO positions,
    ``B``/``S`` the blocking (both zero) and skipping (both one) positions,
    and ``alpha = |NO| / n``.
    """

    generation: int
    kind: str
    lo1: float
    lo2: float
    H: int
    H_bar: int
    B: int
    S: int
    alpha: float


FIELD_NAMES = tuple(f.name for f in fields(PhaseEvent))


class PhaseTrace:
    """Sequence of :class:`PhaseEvent` backed by a compact array."""

    def __init__(self, rows: np.ndarray, n: int) -> None:
        self.rows = np.asarray(rows, dtype=np.float64).reshape(-1, K.TRACE_COLS)
        self.n = int(n)

    def __len__(self) -> int:
        return self.rows.shape[0]

    def __getitem__(self, i: int) -> PhaseEvent:
        r = self.rows[i]
        return PhaseEvent(
            generation=int(r[K.T_GEN]),
            kind=DIVERSITY if r[K.T_KIND] == K.KIND_DIVERSITY else EXPLOITATION,
            lo1=float(r[K.T_LO1]),
            lo2=float(r[K.T_LO2]),
            H=int(r[K.T_H]),
            H_bar=int(r[K.T_HBAR]),
            B=int(r[K.T_B]),
            S=int(r[K.T_S]),
            alpha=float(r[K.T_NO]) / self.n,
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def generation(self) -> np.ndarray:
        return self.rows[:, K.T_GEN]

    @property
    def is_diversity(self) -> np.ndarray:
        return self.rows[:, K.T_KIND] == K.KIND_DIVERSITY

    @property
    def lo1(self) -> np.ndarray:
        return self.rows[:, K.T_LO1]

    @property
    def lo2(self) -> np.ndarray:
        return self.rows[:, K.T_LO2]

    @property
    def H(self) -> np.ndarray:
        return self.rows[:, K.T_H]

    @property
    def no_size(self) -> np.ndarray:
        return self.rows[:, K.T_NO]

    def to_tsv(self) -> str:
        buf = io.StringIO()
        buf.write("\t".join(FIELD_NAMES) + "\n")
        for ev in self:
            buf.write(
                f"{ev.generation}\t{ev.kind}\t{ev.lo1:g}\t{ev.lo2:g}\t{ev.H}\t{ev.H_bar}"
                f"\t{ev.B}\t{ev.S}\t{ev.alpha:.10g}\n"
            )
        return buf.getvalue()

    @classmethod
    def from_tsv(cls, text: str, n: int) -> PhaseTrace:
        lines = text.splitlines()
        if not lines or tuple(lines[0].split("\t")) != FIELD_NAMES:
            raise ValueError("missing or wrong trace header")
        rows = []
        for line in lines[1:]:
            p = line.split("\t")
            kind = K.KIND_DIVERSITY if p[1] == DIVERSITY else K.KIND_EXPLOITATION
            rows.append([float(p[0]), kind, float(p[2]), float(p[3]), float(p[4]),
                         float(p[5]), float(p[6]), float(p[7]), round(float(p[8]) * n)])
        return cls(np.array(rows, dtype=np.float64), n)
