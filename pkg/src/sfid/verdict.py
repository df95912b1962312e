"""Three-valued verdicts and verifiable counterexamples."""
from dataclasses import dataclass, field
from enum import Enum

from . import linalg as la
from .lifting import FactorPair, pairs_equivalent, sum_tuple, tuple_equivalent


class Status(Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNKNOWN = "Unknown"

    @property
    def exit_code(self):
        return {"Holds": 0, "Fails": 1, "Unknown": 2}[self.value]


_RANK = {Status.HOLDS: 0, Status.UNKNOWN: 1, Status.FAILS: 2}


@dataclass(frozen=True)
class FactorCounterexample:
    """Two factor pairs with the same product that are not equivalent."""
    original: FactorPair
    alternative: FactorPair

    def verify(self, tol=la.DEFAULT_TOL, in_family=None):
        loose = tol.loosened(10)
        scale = max(self.original.scale(), self.alternative.scale())
        if not la.close(self.original.product(), self.alternative.product(), loose, scale):
            return False
        if in_family is not None and not in_family(self.alternative):
            return False
        return pairs_equivalent(self.original, self.alternative, loose) is None


@dataclass(frozen=True)
class TupleCounterexample:
    """Two rank-one tuples with the same sum that are not permutations of each other."""
    original: object
    alternative: object

    def verify(self, tol=la.DEFAULT_TOL, in_family=None):
        loose = tol.loosened(10)
        scale = max(la.max_abs(la.to_float(self.original)), la.max_abs(la.to_float(self.alternative)))
        if not la.close(sum_tuple(self.original), sum_tuple(self.alternative), loose, scale):
            return False
        for k in range(self.alternative.shape[0]):
            if la.numerical_rank(self.alternative[k], tol) > 1:
                return False
        if in_family is not None and not in_family(self.alternative):
            return False
        return tuple_equivalent(self.original, self.alternative, loose) is None


@dataclass(frozen=True, eq=False)
class Verdict:
    status: Status
    witness: object = None
    provenance: tuple = ()
    tolerance: la.Tolerance = la.DEFAULT_TOL
    details: dict = field(default_factory=dict)

    @property
    def holds(self):
        return self.status is Status.HOLDS

    @property
    def fails(self):
        return self.status is Status.FAILS

    @property
    def unknown(self):
        return self.status is Status.UNKNOWN


def holds(provenance, tol, **details):
    return Verdict(Status.HOLDS, None, tuple(provenance), tol, details)


def unknown(provenance, tol, reason, **details):
    details = dict(details, reason=reason)
    return Verdict(Status.UNKNOWN, None, tuple(provenance), tol, details)


def fails(witness, provenance, tol, in_family=None, **details):
    """Failing verdict whose constructive witness is re-checked first.

    A counterexample that does not survive re-verification downgrades the
    verdict to Unknown instead of being reported.
    """
    if hasattr(witness, "verify") and not witness.verify(tol, in_family):
        return unknown(provenance, tol, "counterexample failed re-verification", **details)
    return Verdict(Status.FAILS, witness, tuple(provenance), tol, details)


def merge(verdicts):
    """Combine with Fails over Unknown over Holds; the first worst verdict wins."""
    verdicts = list(verdicts)
    worst = max(verdicts, key=lambda v: _RANK[v.status])
    first = next(v for v in verdicts if v.status is worst.status)
    provenance = []
    for v in verdicts:
        provenance.extend(p for p in v.provenance if p not in provenance)
    return Verdict(first.status, first.witness, tuple(provenance), first.tolerance, first.details)
