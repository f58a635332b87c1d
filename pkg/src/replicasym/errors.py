"""Exception types shared across the engines."""


class ShapeMismatchError(ValueError):
    """Two objects that must share a system shape do not."""


class NotFactoredError(ValueError):
    """An operation that needs a factored projector witness got a general one."""


class ResourceCapExceeded(RuntimeError):
    """The number of live terms grew beyond the configured cap."""

    def __init__(self, count, cap):
        super().__init__(f"live term count {count} exceeds cap {cap}")
        self.count = count
        self.cap = cap
