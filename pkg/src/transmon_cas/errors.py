"""Exception types raised by the simulation library."""


class CasError(Exception):
    """Base class for model and numerical failures."""


class ConfigError(CasError, ValueError):
    """Invalid run configuration (unknown key, bad value, empty sweep)."""


class DegenerateConnectedLevels(CasError):
    """A perturbation element connects two bare levels that are (nearly) degenerate."""

    def __init__(self, pair, gap):
        self.pair = pair
        self.gap = gap
        super().__init__(
            f"perturbation connects near-degenerate bare states {pair[0]} and {pair[1]} "
            f"(gap {gap:.3e} rad/ns)"
        )


class SingularDenominator(CasError, ZeroDivisionError):
    """A closed-form expression hits a pole."""

    def __init__(self, factor, value=0.0):
        self.factor = factor
        self.value = value
        super().__init__(f"singular denominator: {factor} = {value:.3e}")


class LabelAmbiguous(CasError):
    """An eigenvector cannot be tagged with a unique bare label."""

    def __init__(self, label, candidates, overlaps):
        self.label = label
        self.candidates = tuple(candidates)
        self.overlaps = tuple(overlaps)
        super().__init__(
            f"label {label} is ambiguous: eigen-indices {self.candidates} "
            f"with overlaps {tuple(round(o, 4) for o in self.overlaps)}"
        )


class NoAnticrossing(CasError):
    """The branch splitting is monotone across the scan window."""


class ToleranceNotMet(CasError):
    """Time propagation failed or violated its conservation tolerance."""


class NegativeDephasing(CasError, ValueError):
    """T2 exceeds 2*T1, which would require a negative pure-dephasing rate."""


class FitDiverged(CasError):
    """A least-squares fit did not converge."""


class LeakageExceeded(CasError):
    """Population left the computational subspace beyond the allowed threshold."""


class OptimizationStalled(CasError):
    """An optimizer stopped improving before meeting its tolerance."""
