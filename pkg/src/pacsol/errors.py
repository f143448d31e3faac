"""Exception hierarchy shared by the solvers, the harness and the CLI."""


class PacsolError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(PacsolError, ValueError):
    """Accuracy/confidence parameters or constants out of range."""


class EmptyBatch(PacsolError, ValueError):
    """Empirical loss requested on a batch with no points."""


class UnsupportedDistribution(PacsolError, ValueError):
    """The distribution has no enumerable explicit support."""


class SolverFailure(PacsolError):
    """A solver could not produce a solution for its input.

    The Monte-Carlo harness records these as failed trials instead of
    aborting the run.
    """


class NoConsistentGame(SolverFailure, LookupError):
    """No game in the class agrees with the batch (or the prior gives it no mass)."""


class NoConsistentPartition(SolverFailure):
    """Every partition of the players is blocked by some sampled coalition."""


class NoEmpiricalWinner(SolverFailure):
    """No sampled candidate beats every other sampled candidate."""


class NotFound(SolverFailure):
    """No restricted market assignment admits feasible prices and budgets."""


class Infeasible(SolverFailure):
    """The linear program has no feasible point."""


class Unbounded(SolverFailure):
    """The linear program objective is unbounded in the optimization direction."""


class TiesPresent(PacsolError, ValueError):
    """A tournament operation that needs a tie-free majority graph met a tied pair."""
