"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid arguments: bad probabilities, length mismatches, malformed tables."""


class ResourceError(RuntimeError):
    """A requested computation exceeds a configured enumeration or dense-matrix cap."""


class ConsistencyError(RuntimeError):
    """Two independent evaluation routes disagreed beyond tolerance."""
