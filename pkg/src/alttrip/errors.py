"""Exception types shared across the engine.

Every error raised on purpose by this package derives from AltTripError so
callers can catch the whole family with one clause.  Subclasses also inherit
from ValueError or KeyError where that matches how standard library code
would classify the failure.
"""


class AltTripError(Exception):
    """Base class for all engine errors."""


# ---------------------------------------------------------------- catalog ---

class ParseError(AltTripError, ValueError):
    """A CSV/JSON input could not be parsed or failed field validation."""


class DuplicateId(AltTripError, ValueError):
    """Two catalog rows share the same POI id."""


class EmptyCatalog(AltTripError, ValueError):
    """The catalog contains no POIs."""


class UnknownPOI(AltTripError, KeyError):
    """A POI id does not exist in the catalog."""


class TooFewRoutes(AltTripError, ValueError):
    """Not enough routes for the requested fold split."""


# ------------------------------------------------------------- embeddings ---

class DegenerateGeometry(AltTripError, ValueError):
    """All pairwise POI distances are equal; distance weights are undefined."""


class NonFiniteLoss(AltTripError, ArithmeticError):
    """A training loss became NaN or infinite."""


class ConfigMismatch(AltTripError, ValueError):
    """A configuration combination is not allowed (e.g. loss vs graph kind)."""


class ShapeMismatch(AltTripError, ValueError):
    """Array shapes are inconsistent (embedding row counts, vector lengths)."""


# -------------------------------------------------------- sequence model ----

class InvalidId(AltTripError, KeyError):
    """A POI id is out of range for the model's catalog."""


class EmptyPrefix(AltTripError, ValueError):
    """A step-probability query needs at least one conditioning POI."""


class BadPosition(AltTripError, ValueError):
    """A position index lies outside the valid range for the operation."""


class EmptyTrainingSet(AltTripError, ValueError):
    """No routes were provided for training."""


# ----------------------------------------------------------------- planner --

class NoEligiblePOI(AltTripError, ValueError):
    """No POI is eligible for prominence (catalog has only endpoints)."""


class ExhaustedCandidates(AltTripError, RuntimeError):
    """Generation needed an unvisited POI but none remained."""


class ConstraintUnsupported(AltTripError, ValueError):
    """The chosen generation method cannot honor the given constraints."""


# ----------------------------------------------------------------- sampler --

class InfeasibleConstraints(AltTripError, RuntimeError):
    """No constraint-satisfying itinerary was found within the attempt budget."""


class IllegalMove(AltTripError, ValueError):
    """A move is not allowed at the given position (protected POI, bad slot)."""


class MissingTableEntry(AltTripError, KeyError):
    """A cost or travel-time matrix lacks an entry for a POI pair."""


# ----------------------------------------------------------------- metrics --

class EmptyGroundTruth(AltTripError, ValueError):
    """A query has no ground-truth routes to score against."""


class SingletonSet(AltTripError, ValueError):
    """Diversity is undefined for a single itinerary."""


# ---------------------------------------------------------------- appshell --

class VersionMismatch(AltTripError, ValueError):
    """A checkpoint was written by an incompatible format version."""


class HashMismatch(AltTripError, ValueError):
    """Chained content hashes disagree (stale or mixed artifacts)."""


class CorruptFile(AltTripError, ValueError):
    """A checkpoint failed its integrity check."""


class BindFailure(AltTripError, OSError):
    """The HTTP service could not bind its address."""
