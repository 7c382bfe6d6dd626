"""Exception hierarchy shared by all gadkit modules.

Three families matter to the command-line surface: configuration problems
(exit code 2), data problems (exit code 3), and numeric failures (exit
code 4). Everything else derives from ``GadkitError`` directly.
"""


class GadkitError(Exception):
    """Base class for all errors raised by gadkit."""


class ConfigError(GadkitError):
    """Bad or inconsistent configuration."""


class DataError(GadkitError):
    """Malformed, missing, or contradictory input data."""


class NumericError(GadkitError):
    """Numeric computation failed or was asked something ill-posed."""


# --- graph model -----------------------------------------------------------

class IndexOutOfRangeError(DataError):
    """An edge endpoint fell outside the node range."""


class SelfLoopError(DataError):
    """A self-loop edge was supplied where none are allowed."""


class ShapeMismatchError(NumericError):
    """Array shapes are incompatible for the requested operation."""


class NotAPermutationError(GadkitError):
    """The supplied index sequence is not a bijection on 0..n-1."""


class InvalidConfigError(ConfigError):
    """A generator or run configuration violates its own constraints."""


class EmptyGraphError(DataError):
    """An operation that needs at least one node received none."""


# --- TU flat-file parsing --------------------------------------------------

class MissingFileError(DataError):
    """A mandatory dataset file is absent."""


class MalformedLineError(DataError):
    """A dataset file line could not be parsed."""

    def __init__(self, path, line_no, detail):
        super().__init__(f"{path}:{line_no}: {detail}")
        self.path = str(path)
        self.line_no = line_no


class DanglingNodeIdError(DataError):
    """An edge referenced a node id that no graph owns."""


class InconsistentCountsError(DataError):
    """File cardinalities disagree with each other."""


# --- autodiff --------------------------------------------------------------

class NonFiniteResultError(NumericError):
    """An operation produced NaN or Inf."""


class NotScalarError(NumericError):
    """backward() was called on a non 1x1 tensor."""


class DetachedLossError(NumericError):
    """backward() was called on a tensor with no recorded history."""


class MissingGradientError(NumericError):
    """An optimizer step found a parameter without a gradient."""


# --- losses and discriminator ----------------------------------------------

class NonBinaryAdjacencyError(DataError):
    """The reconstruction target adjacency is not a 0/1 matrix."""


class EmptyAnchorSetError(DataError):
    """The contrastive loss received an empty anchor set."""


class TooFewGraphsError(DataError):
    """Similarity scoring needs at least two graphs."""


class EmptyVectorError(DataError):
    """A quantile was requested over an empty vector."""


# --- denoising machinery ---------------------------------------------------

class NoNormalGraphsError(DataError):
    """The discriminator flagged every training graph as anomalous."""


class EmptyBankError(DataError):
    """Mixup fusion received an empty anchor bank."""


class DegeneratePoolsError(DataError):
    """A similarity region holds no graphs to sample from."""


# --- scoring ---------------------------------------------------------------

class TooFewVectorsError(DataError):
    """Fitting the scoring head needs at least two error vectors."""


class UnfittedHeadError(GadkitError):
    """The scoring head was used before normalization stats were set."""


# --- experiment harness ----------------------------------------------------

class SingleClassDatasetError(DataError):
    """Splitting requires both normal and anomalous graphs."""


class SingleClassLabelsError(DataError):
    """AUROC requires both label classes to be present."""


class PoolExhaustedError(DataError):
    """The anomaly injection pool is smaller than the requested count."""


class EmptyGridError(ConfigError):
    """A sweep was requested with no grid points."""
