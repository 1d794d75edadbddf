class SimulationError(RuntimeError):
    pass


class ProtocolError(SimulationError):
    """Malformed or unknown operator; indicates a host-side bug."""


class RoutingError(SimulationError):
    """An operator reached a module that does not own the node."""


class ContractError(SimulationError):
    """A caller violated an operation's precondition."""
