"""Exception types shared across the package."""


class QcsError(Exception):
    """Base class for all package-specific errors."""


class GraphGenerationError(QcsError):
    """Random graph generation exhausted its retry budget."""


class NotStronglyConnectedError(QcsError):
    """An operation requiring strong connectivity got a graph without it."""


class ProtocolError(QcsError):
    """A protocol-level contract was violated (caller bug)."""


class InvalidInitializationError(ProtocolError):
    """A node was initialized with values the protocol cannot accept."""


class RoutingError(ProtocolError):
    """A message reached a node it was not addressed to (harness bug)."""


class ConservationError(QcsError):
    """The mass-conservation ledger failed to balance."""


class InvariantError(QcsError):
    """A run-time invariant audit failed (diagnostic abort)."""


class CapacityExceededError(QcsError):
    """Total demand exceeds the available capacity of the network."""


class InvalidInstanceError(QcsError):
    """An application instance violates its own validity constraints."""


class ConfigError(QcsError):
    """An experiment configuration is malformed; message names the field."""
